//! Drive current waveforms: AC square wave, bipolar pulse train, synthetic
//! fEPSP, and arbitrary sampled traces. All are deterministic pure functions
//! of time, reentrant, and immutable after construction.

use std::path::Path;

use crate::error::Error;
use crate::Result;

#[derive(Debug, Clone, PartialEq)]
pub enum Waveform {
    /// Alternating +-amplitude at `duty` fraction positive (0.5 = symmetric).
    Square {
        frequency_hz: f64,
        amplitude_a: f64,
        duty: f64,
    },
    /// +amplitude for `fwd_s`, -amplitude for `rev_s`, zero for the rest of
    /// each `period_s`.
    PulseTrain {
        fwd_s: f64,
        rev_s: f64,
        period_s: f64,
        amplitude_a: f64,
    },
    /// Brief biphasic stimulus artifact followed by a negative-going
    /// difference-of-exponentials deflection normalized to peak `amplitude_a`.
    Fepsp {
        amplitude_a: f64,
        artifact_width_s: f64,
        tau_fast_s: f64,
        tau_slow_s: f64,
        onset_s: f64,
        /// Derived: peak of exp(-t/tau_slow) - exp(-t/tau_fast).
        peak_norm: f64,
    },
    /// Zero-order-hold playback of a sample array.
    Sampled { values_a: Vec<f64>, rate_hz: f64 },
}

impl Waveform {
    pub fn square(frequency_hz: f64, amplitude_a: f64) -> Result<Waveform> {
        Self::square_with_duty(frequency_hz, amplitude_a, 0.5)
    }

    pub fn square_with_duty(frequency_hz: f64, amplitude_a: f64, duty: f64) -> Result<Waveform> {
        if !(frequency_hz > 0.0) {
            return Err(Error::Config(format!(
                "square wave frequency must be positive, got {frequency_hz}"
            )));
        }
        if !(duty > 0.0 && duty < 1.0) {
            return Err(Error::Config(format!(
                "square wave duty must be in (0, 1), got {duty}"
            )));
        }
        if !amplitude_a.is_finite() {
            return Err(Error::Config("square wave amplitude must be finite".into()));
        }
        Ok(Waveform::Square {
            frequency_hz,
            amplitude_a,
            duty,
        })
    }

    pub fn pulse_train(fwd_s: f64, rev_s: f64, period_s: f64, amplitude_a: f64) -> Result<Waveform> {
        if !(fwd_s > 0.0 && rev_s >= 0.0 && period_s > 0.0) {
            return Err(Error::Config(
                "pulse widths must be positive and period positive".into(),
            ));
        }
        if fwd_s + rev_s > period_s {
            return Err(Error::Config(format!(
                "pulse widths ({} s) exceed period ({period_s} s)",
                fwd_s + rev_s
            )));
        }
        if !amplitude_a.is_finite() {
            return Err(Error::Config("pulse amplitude must be finite".into()));
        }
        Ok(Waveform::PulseTrain {
            fwd_s,
            rev_s,
            period_s,
            amplitude_a,
        })
    }

    pub fn fepsp(
        amplitude_a: f64,
        artifact_width_s: f64,
        tau_fast_s: f64,
        tau_slow_s: f64,
        onset_s: f64,
    ) -> Result<Waveform> {
        if !(tau_slow_s > tau_fast_s && tau_fast_s > 0.0) {
            return Err(Error::Config(format!(
                "fEPSP requires tau_slow > tau_fast > 0, got {tau_slow_s} and {tau_fast_s}"
            )));
        }
        if !(artifact_width_s >= 0.0 && onset_s >= 0.0) {
            return Err(Error::Config(
                "fEPSP artifact width and onset must be non-negative".into(),
            ));
        }
        let t_peak = tau_slow_s * tau_fast_s / (tau_slow_s - tau_fast_s)
            * (tau_slow_s / tau_fast_s).ln();
        let peak_norm = (-t_peak / tau_slow_s).exp() - (-t_peak / tau_fast_s).exp();
        Ok(Waveform::Fepsp {
            amplitude_a,
            artifact_width_s,
            tau_fast_s,
            tau_slow_s,
            onset_s,
            peak_norm,
        })
    }

    /// fEPSP with the default shape: 0.05 ms biphasic artifact, 1 ms / 5 ms
    /// decay constants, 20 ms onset.
    pub fn fepsp_default(amplitude_a: f64) -> Waveform {
        Self::fepsp(amplitude_a, 0.05e-3, 1e-3, 5e-3, 20e-3).expect("default fEPSP parameters")
    }

    pub fn sampled(values_a: Vec<f64>, rate_hz: f64) -> Result<Waveform> {
        if values_a.is_empty() {
            return Err(Error::Config("sampled waveform has no samples".into()));
        }
        if values_a.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("sampled waveform has non-finite values".into()));
        }
        if !(rate_hz > 0.0) {
            return Err(Error::Config(format!(
                "sampled waveform rate must be positive, got {rate_hz}"
            )));
        }
        Ok(Waveform::Sampled { values_a, rate_hz })
    }

    /// Current in amperes at time `t` seconds.
    pub fn sample(&self, t: f64) -> f64 {
        match self {
            Waveform::Square {
                frequency_hz,
                amplitude_a,
                duty,
            } => {
                let phase = (t * frequency_hz).rem_euclid(1.0);
                if phase < *duty {
                    *amplitude_a
                } else {
                    -*amplitude_a
                }
            }
            Waveform::PulseTrain {
                fwd_s,
                rev_s,
                period_s,
                amplitude_a,
            } => {
                let tau = t.rem_euclid(*period_s);
                if tau < *fwd_s {
                    *amplitude_a
                } else if tau < fwd_s + rev_s {
                    -*amplitude_a
                } else {
                    0.0
                }
            }
            Waveform::Fepsp {
                amplitude_a,
                artifact_width_s,
                tau_fast_s,
                tau_slow_s,
                onset_s,
                peak_norm,
            } => {
                let tp = t - onset_s;
                if tp < 0.0 {
                    0.0
                } else if tp < artifact_width_s / 2.0 {
                    *amplitude_a
                } else if tp < *artifact_width_s {
                    -*amplitude_a
                } else {
                    let u = tp - artifact_width_s;
                    -amplitude_a * ((-u / tau_slow_s).exp() - (-u / tau_fast_s).exp()) / peak_norm
                }
            }
            Waveform::Sampled { values_a, rate_hz } => {
                let idx = (t * rate_hz).floor();
                let idx = if idx < 0.0 {
                    0
                } else {
                    (idx as usize).min(values_a.len() - 1)
                };
                values_a[idx]
            }
        }
    }

    pub fn amplitude_a(&self) -> f64 {
        match self {
            Waveform::Square { amplitude_a, .. }
            | Waveform::PulseTrain { amplitude_a, .. }
            | Waveform::Fepsp { amplitude_a, .. } => *amplitude_a,
            Waveform::Sampled { values_a, .. } => values_a
                .iter()
                .fold(0.0f64, |m, v| m.max(v.abs())),
        }
    }

    /// True when the waveform is identically zero on `[t0, t1]`, checked on a
    /// dense grid.
    pub fn is_quiet(&self, t0_s: f64, t1_s: f64, n_checks: usize) -> bool {
        (0..=n_checks).all(|i| {
            let t = t0_s + (t1_s - t0_s) * i as f64 / n_checks as f64;
            self.sample(t) == 0.0
        })
    }
}

/// Load a sampled waveform from CSV: a `rate_hz=<value>` header line followed
/// by one current value (A) per line. `#` starts a comment.
pub fn load_sampled_csv(path: impl AsRef<Path>) -> Result<Waveform> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut rate_hz: Option<f64> = None;
    let mut values = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("rate_hz") {
            let rest = rest.trim_start().strip_prefix('=').ok_or_else(|| {
                Error::Config(format!("{}: malformed rate_hz header", path.display()))
            })?;
            rate_hz = Some(rest.trim().parse().map_err(|_| {
                Error::Config(format!(
                    "{}: bad rate_hz value {:?} on line {}",
                    path.display(),
                    rest.trim(),
                    lineno + 1
                ))
            })?);
            continue;
        }
        let v: f64 = line.parse().map_err(|_| {
            Error::Config(format!(
                "{}: bad sample value {:?} on line {}",
                path.display(),
                line,
                lineno + 1
            ))
        })?;
        values.push(v);
    }
    let rate_hz = rate_hz
        .ok_or_else(|| Error::Config(format!("{}: missing rate_hz header", path.display())))?;
    Waveform::sampled(values, rate_hz)
}

/// Write a sampled waveform CSV (the inverse of [`load_sampled_csv`]).
pub fn write_sampled_csv(path: impl AsRef<Path>, values_a: &[f64], rate_hz: f64) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::with_capacity(values_a.len() * 24 + 32);
    out.push_str(&format!("rate_hz={rate_hz}\n"));
    for v in values_a {
        out.push_str(&format!("{v}\n"));
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}
