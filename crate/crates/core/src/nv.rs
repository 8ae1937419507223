//! NV spin model: resonance frequencies under a bias field, the
//! FM-demodulated ODMR lineshape, its slope, and conversion of demodulated
//! pixel-value shifts back to Tesla.
//!
//! The Zeeman model is secular: each axis responds to the magnitude of the
//! field projection on it, at a fixed rate `df/dB`. The dip is a single
//! Lorentzian per resonance (hyperfine structure merged by power
//! broadening), and the square-wave FM demodulation is modeled as the
//! two-point difference of the lineshape at `f_mw +- fm_deviation`.

use crate::error::Error;
use crate::geom::default_nv_axes;
use crate::rng::SplitMix64;
use crate::vec3::Vec3;
use crate::Result;
use rand::Rng;

/// NV ensemble model parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct NVModel {
    /// Zero-field splitting D, MHz.
    pub zero_field_splitting_mhz: f64,
    /// Resonance shift per unit axial field, Hz/nT.
    pub gyromagnetic_dfdb_hz_per_nt: f64,
    /// The four crystallographic axes (unit vectors).
    pub axes: [Vec3; 4],
    /// Fractional fluorescence contrast of one resonance dip.
    pub contrast: f64,
    /// Lorentzian half-width at half-maximum, MHz.
    pub linewidth_hwhm_mhz: f64,
    /// Square-wave FM deviation, MHz.
    pub fm_deviation_mhz: f64,
}

impl Default for NVModel {
    fn default() -> Self {
        NVModel {
            zero_field_splitting_mhz: 2870.0,
            gyromagnetic_dfdb_hz_per_nt: 28.0,
            axes: default_nv_axes(),
            contrast: 0.014,
            linewidth_hwhm_mhz: 0.5,
            fm_deviation_mhz: 4.0,
        }
    }
}

impl NVModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.contrast > 0.0 && self.contrast < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "contrast must be in (0, 1), got {}",
                self.contrast
            )));
        }
        if !(self.linewidth_hwhm_mhz > 0.0) {
            return Err(Error::InvalidArgument("linewidth must be positive".into()));
        }
        if !(self.fm_deviation_mhz > 0.0) {
            return Err(Error::InvalidArgument(
                "fm_deviation must be positive".into(),
            ));
        }
        for axis in &self.axes {
            if (axis.norm() - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidArgument(
                    "NV axes must be unit vectors".into(),
                ));
            }
        }
        Ok(())
    }

    /// Resonance shift for an axial field given in Tesla, in MHz.
    pub fn shift_mhz_per_t(&self, b_axial_t: f64) -> f64 {
        // T -> nT is 1e9, Hz -> MHz is 1e-6.
        self.gyromagnetic_dfdb_hz_per_nt * b_axial_t * 1e3
    }
}

/// f- and f+ of one axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisResonance {
    pub axis_index: usize,
    pub f_minus_mhz: f64,
    pub f_plus_mhz: f64,
}

/// One resonance line with its axis label and branch (-1 for f-, +1 for f+).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResonanceLine {
    pub f_mhz: f64,
    pub axis_index: usize,
    pub branch: i8,
}

/// Per-axis resonance pairs f+- = D +- df/dB * |B . axis| for a static field
/// `b_t` (Tesla).
pub fn resonance_frequencies(b_t: Vec3, model: &NVModel) -> [AxisResonance; 4] {
    let d = model.zero_field_splitting_mhz;
    let mut out = [AxisResonance {
        axis_index: 0,
        f_minus_mhz: d,
        f_plus_mhz: d,
    }; 4];
    for (i, axis) in model.axes.iter().enumerate() {
        let shift = model.shift_mhz_per_t(b_t.dot(*axis).abs());
        out[i] = AxisResonance {
            axis_index: i,
            f_minus_mhz: d - shift,
            f_plus_mhz: d + shift,
        };
    }
    out
}

/// All eight resonance lines sorted by frequency.
pub fn resonance_lines(b_t: Vec3, model: &NVModel) -> Vec<ResonanceLine> {
    let mut lines = Vec::with_capacity(8);
    for r in resonance_frequencies(b_t, model) {
        lines.push(ResonanceLine {
            f_mhz: r.f_minus_mhz,
            axis_index: r.axis_index,
            branch: -1,
        });
        lines.push(ResonanceLine {
            f_mhz: r.f_plus_mhz,
            axis_index: r.axis_index,
            branch: 1,
        });
    }
    lines.sort_by(|a, b| a.f_mhz.total_cmp(&b.f_mhz));
    lines
}

/// Lorentzian dip: 1 - C * G^2 / ((f - f0)^2 + G^2), in (1 - C, 1].
pub fn lorentzian_pv(f_mw_mhz: f64, f0_mhz: f64, model: &NVModel) -> f64 {
    let g2 = model.linewidth_hwhm_mhz * model.linewidth_hwhm_mhz;
    let d = f_mw_mhz - f0_mhz;
    1.0 - model.contrast * g2 / (d * d + g2)
}

/// Demodulated response of the square-wave FM scheme: the lineshape
/// difference at the two toggle frequencies, antisymmetric about `f0`.
pub fn demod_response(f_mw_mhz: f64, f0_mhz: f64, model: &NVModel) -> f64 {
    let dev = model.fm_deviation_mhz;
    0.5 * (lorentzian_pv(f_mw_mhz + dev, f0_mhz, model)
        - lorentzian_pv(f_mw_mhz - dev, f0_mhz, model))
}

fn lorentzian_dpv(f_mw_mhz: f64, f0_mhz: f64, model: &NVModel) -> f64 {
    let g2 = model.linewidth_hwhm_mhz * model.linewidth_hwhm_mhz;
    let d = f_mw_mhz - f0_mhz;
    let den = d * d + g2;
    2.0 * model.contrast * g2 * d / (den * den)
}

/// Analytic derivative of [`demod_response`] with respect to `f_mw`, per MHz.
pub fn slope_dpvdf(f_mw_mhz: f64, f0_mhz: f64, model: &NVModel) -> f64 {
    let dev = model.fm_deviation_mhz;
    0.5 * (lorentzian_dpv(f_mw_mhz + dev, f0_mhz, model)
        - lorentzian_dpv(f_mw_mhz - dev, f0_mhz, model))
}

/// Convert a demodulated pixel-value shift into Tesla using the calibrated
/// slope (pv per MHz). Returns `None` (dead pixel) when |slope| is at or
/// below `slope_floor_per_mhz`; dead pixels are excluded from maps rather
/// than zero-filled.
pub fn field_from_pv(
    delta_pv: f64,
    slope_per_mhz: f64,
    slope_floor_per_mhz: f64,
    model: &NVModel,
) -> Option<f64> {
    if !slope_per_mhz.is_finite() || slope_per_mhz.abs() <= slope_floor_per_mhz {
        return None;
    }
    let df_mhz = delta_pv / slope_per_mhz;
    // MHz -> Hz -> nT -> T.
    Some(df_mhz * 1e6 / self_dfdb(model) * 1e-9)
}

fn self_dfdb(model: &NVModel) -> f64 {
    model.gyromagnetic_dfdb_hz_per_nt
}

/// Demodulated ODMR spectrum: frequencies and dimensionless pre-quantization
/// response values.
#[derive(Debug, Clone, PartialEq)]
pub struct OdmrSpectrum {
    pub frequencies_mhz: Vec<f64>,
    pub values: Vec<f64>,
}

impl OdmrSpectrum {
    pub fn new(frequencies_mhz: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if frequencies_mhz.len() != values.len() {
            return Err(Error::InvalidArgument(
                "spectrum frequency and value lengths differ".into(),
            ));
        }
        if frequencies_mhz.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument(
                "spectrum frequencies must be strictly increasing".into(),
            ));
        }
        Ok(OdmrSpectrum {
            frequencies_mhz,
            values,
        })
    }

    /// Model spectrum of a single resonance at `f0`.
    pub fn from_model(model: &NVModel, f0_mhz: f64, frequencies_mhz: Vec<f64>) -> Result<Self> {
        let values = frequencies_mhz
            .iter()
            .map(|f| demod_response(*f, f0_mhz, model))
            .collect();
        Self::new(frequencies_mhz, values)
    }
}

/// Per-pixel resonance-center scatter: `f_center + uniform(-scatter, +scatter)`,
/// seeded. Models local strain and offset-field inhomogeneity.
pub fn pixel_f0_scatter(f_center_mhz: f64, n_pixels: usize, scatter_mhz: f64, seed: u64) -> Vec<f64> {
    let mut rng = SplitMix64::new(seed);
    (0..n_pixels)
        .map(|_| f_center_mhz + rng.gen_range(-scatter_mhz..=scatter_mhz))
        .collect()
}
