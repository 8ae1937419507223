//! Circuit geometry and the magnetic field it produces.
//!
//! A circuit is an ordered chain of straight wire segments carrying one
//! current path. Fields are evaluated with the exact closed form for a
//! finite straight segment and summed over segments in a fixed order, so
//! results are independent of how evaluation points are partitioned across
//! threads.
//!
//! Track width enters through a near-track current-density factor: a
//! segment narrower than the widest segment of its path squeezes the same
//! current through a smaller cross-section, and close to the track (standoff
//! comparable to the width) the field scales with the surface current
//! density, i.e. with 1/width. Each segment therefore contributes with an
//! effective line current `I * (w_max / w_segment)`. For a uniform-width
//! path the factor is 1 everywhere and the model reduces to a plain
//! centerline line current.

use rayon::prelude::*;

use crate::camera::PixelGrid;
use crate::error::Error;
use crate::vec3::Vec3;
use crate::Result;

/// mu0 / 4pi with lengths in micrometers: T*um/A.
pub const MU0_OVER_4PI_UM: f64 = 0.1;

/// Points closer than this to a segment centerline are rejected (um).
pub const SINGULARITY_GUARD_UM: f64 = 1e-6;

/// Tolerance for end-to-start connectivity between consecutive segments (um).
pub const CONNECT_TOL_UM: f64 = 1e-9;

/// One straight piece of track. Positions in um, width in um.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WireSegment {
    pub start: Vec3,
    pub end: Vec3,
    pub width: f64,
}

impl WireSegment {
    pub fn new(start: Vec3, end: Vec3, width: f64) -> Result<Self> {
        if !(width > 0.0) {
            return Err(Error::InvalidGeometry(format!(
                "segment width must be positive, got {width}"
            )));
        }
        if !start.is_finite() || !end.is_finite() {
            return Err(Error::InvalidGeometry(
                "segment endpoints must be finite".into(),
            ));
        }
        if (end - start).norm() == 0.0 {
            return Err(Error::InvalidGeometry(
                "segment start and end coincide".into(),
            ));
        }
        Ok(WireSegment { start, end, width })
    }

    pub fn length(&self) -> f64 {
        (self.end - self.start).norm()
    }

    /// Distance from `p` to the segment (not the infinite line).
    pub fn distance_to(&self, p: Vec3) -> f64 {
        let d = self.end - self.start;
        let t = ((p - self.start).dot(d) / d.dot(d)).clamp(0.0, 1.0);
        (p - (self.start + d * t)).norm()
    }
}

/// In-plane direction of a cross arm.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

impl Axis {
    pub fn unit(self) -> Vec3 {
        match self {
            Axis::X => Vec3::new(1.0, 0.0, 0.0),
            Axis::Y => Vec3::new(0.0, 1.0, 0.0),
        }
    }
}

impl std::str::FromStr for Axis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "x" | "X" => Ok(Axis::X),
            "y" | "Y" => Ok(Axis::Y),
            other => Err(Error::InvalidArgument(format!(
                "axis must be x or y, got {other:?}"
            ))),
        }
    }
}

/// An ordered, connected chain of segments carrying one current path.
#[derive(Debug, Clone, PartialEq)]
pub struct CircuitLayout {
    pub name: String,
    segments: Vec<WireSegment>,
    /// Per-segment current-density factor w_max / w_i.
    weights: Vec<f64>,
}

impl CircuitLayout {
    pub fn new(name: impl Into<String>, segments: Vec<WireSegment>) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::InvalidGeometry("layout has no segments".into()));
        }
        for pair in segments.windows(2) {
            let gap = (pair[1].start - pair[0].end).norm();
            if gap > CONNECT_TOL_UM {
                return Err(Error::InvalidGeometry(format!(
                    "consecutive segments are not connected (gap {gap:.3e} um)"
                )));
            }
        }
        let w_max = segments.iter().map(|s| s.width).fold(f64::MIN, f64::max);
        let weights = segments.iter().map(|s| w_max / s.width).collect();
        Ok(CircuitLayout {
            name: name.into(),
            segments,
            weights,
        })
    }

    pub fn segments(&self) -> &[WireSegment] {
        &self.segments
    }

    /// Current-density factor applied to segment `i` (1.0 for the widest).
    pub fn drive_weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    /// Minimum distance from `p` to any segment of the path.
    pub fn distance_to(&self, p: Vec3) -> f64 {
        self.segments
            .iter()
            .map(|s| s.distance_to(p))
            .fold(f64::INFINITY, f64::min)
    }

    /// Layout rotated by 90 degrees about +z.
    pub fn rot90_z(&self) -> CircuitLayout {
        let segments = self
            .segments
            .iter()
            .map(|s| WireSegment {
                start: s.start.rot90_z(),
                end: s.end.rot90_z(),
                width: s.width,
            })
            .collect();
        CircuitLayout {
            name: self.name.clone(),
            segments,
            weights: self.weights.clone(),
        }
    }
}

/// Field sample: B in Tesla at a position in um.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldSample {
    pub b: Vec3,
    pub position: Vec3,
}

/// Build the straight current path of a lithographic cross.
///
/// The cross consists of two independent perpendicular paths; `axis` selects
/// the one carrying current. `arm_length` is measured from the center to the
/// end of each arm, so the path spans `2 * arm_length`. The central
/// `center_extent` of the path is `center_width` wide; the arms are
/// `track_width` wide.
pub fn make_cross_layout(
    track_width: f64,
    center_width: f64,
    center_extent: f64,
    arm_length: f64,
    axis: Axis,
) -> Result<CircuitLayout> {
    for (label, v) in [
        ("track_width", track_width),
        ("center_width", center_width),
        ("center_extent", center_extent),
        ("arm_length", arm_length),
    ] {
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::InvalidGeometry(format!(
                "{label} must be positive, got {v}"
            )));
        }
    }
    if center_width > track_width {
        return Err(Error::InvalidGeometry(format!(
            "center_width ({center_width}) exceeds track_width ({track_width})"
        )));
    }
    let half_extent = center_extent / 2.0;
    if half_extent >= arm_length {
        return Err(Error::InvalidGeometry(format!(
            "center_extent/2 ({half_extent}) must be smaller than arm_length ({arm_length})"
        )));
    }
    let u = axis.unit();
    let at = |s: f64| u * s;
    let segments = vec![
        WireSegment::new(at(-arm_length), at(-half_extent), track_width)?,
        WireSegment::new(at(-half_extent), at(half_extent), center_width)?,
        WireSegment::new(at(half_extent), at(arm_length), track_width)?,
    ];
    let name = format!("cross_{}", if axis == Axis::X { "x" } else { "y" });
    CircuitLayout::new(name, segments)
}

/// Closed-form field of one finite straight segment carrying `current_a`,
/// evaluated at `p`. No singularity guard; callers check distance first.
#[inline]
fn segment_field(seg: &WireSegment, current_a: f64, p: Vec3) -> Vec3 {
    let r1 = p - seg.start;
    let r2 = p - seg.end;
    let n1 = r1.norm();
    let n2 = r2.norm();
    let denom = n1 * n2 * (n1 * n2 + r1.dot(r2));
    r1.cross(r2) * (MU0_OVER_4PI_UM * current_a * (n1 + n2) / denom)
}

/// Total field of the layout at `p` (um), in Tesla.
///
/// Sums the exact finite-segment closed form over segments in path order;
/// each segment carries `current_a * drive_weight`.
pub fn field_at_point(layout: &CircuitLayout, current_a: f64, p: Vec3) -> Result<FieldSample> {
    let dist = layout.distance_to(p);
    if dist < SINGULARITY_GUARD_UM {
        return Err(Error::Singularity {
            limit_um: SINGULARITY_GUARD_UM,
        });
    }
    let mut b = Vec3::ZERO;
    for (i, seg) in layout.segments.iter().enumerate() {
        b = b + segment_field(seg, current_a * layout.weights[i], p);
    }
    Ok(FieldSample { b, position: p })
}

/// Project a field vector onto a unit sensing axis. Errors if `axis` is not
/// normalized to within 1e-9.
pub fn project(b: Vec3, axis: Vec3) -> Result<f64> {
    if (axis.norm() - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidArgument(format!(
            "sensing axis must be a unit vector, |axis| = {:.12}",
            axis.norm()
        )));
    }
    Ok(b.dot(axis))
}

/// Projected-field image over a pixel grid, in Tesla.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldMap {
    pub rows: usize,
    pub cols: usize,
    pub pitch_um: f64,
    pub standoff_um: f64,
    /// Row-major projected field, Tesla. NaN marks excluded pixels.
    pub values_t: Vec<f64>,
}

impl FieldMap {
    pub fn value(&self, row: usize, col: usize) -> f64 {
        self.values_t[row * self.cols + col]
    }

    /// Largest finite |value| in the map.
    pub fn peak_abs(&self) -> f64 {
        self.values_t
            .iter()
            .filter(|v| v.is_finite())
            .fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Map scaled to its own peak magnitude (relative map in [-1, 1]).
    pub fn normalized(&self) -> FieldMap {
        let peak = self.peak_abs();
        let scale = if peak > 0.0 { 1.0 / peak } else { 0.0 };
        FieldMap {
            values_t: self.values_t.iter().map(|v| v * scale).collect(),
            ..self.clone()
        }
    }

    /// (row, col) of the largest |value|.
    pub fn argmax_abs(&self) -> (usize, usize) {
        let mut best = (0, 0);
        let mut best_v = -1.0;
        for r in 0..self.rows {
            for c in 0..self.cols {
                let v = self.value(r, c).abs();
                if v.is_finite() && v > best_v {
                    best_v = v;
                    best = (r, c);
                }
            }
        }
        best
    }
}

/// Projected field at every pixel center of `grid`, in a plane at
/// `z = standoff_um`, onto `axis` (unit vector).
pub fn field_map(
    layout: &CircuitLayout,
    current_a: f64,
    grid: &PixelGrid,
    standoff_um: f64,
    axis: Vec3,
) -> Result<FieldMap> {
    if grid.rows == 0 || grid.cols == 0 {
        return Err(Error::InvalidArgument("empty pixel grid".into()));
    }
    if !(standoff_um > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "standoff must be positive, got {standoff_um}"
        )));
    }
    // Validate the axis once up front.
    project(Vec3::ZERO, axis)?;

    let mut values = vec![0.0f64; grid.rows * grid.cols];
    values
        .par_chunks_mut(grid.cols)
        .enumerate()
        .try_for_each(|(row, out)| -> Result<()> {
            for (col, slot) in out.iter_mut().enumerate() {
                let mut p = grid.pixel_center(row, col);
                p.z = standoff_um;
                let sample = field_at_point(layout, current_a, p)?;
                *slot = sample.b.dot(axis);
            }
            Ok(())
        })?;

    Ok(FieldMap {
        rows: grid.rows,
        cols: grid.cols,
        pitch_um: grid.pitch_um,
        standoff_um,
        values_t: values,
    })
}

/// The four <111> NV axes of a (100)-cut crystal, components (+-1,+-1,1)/sqrt(3)
/// with positive component products.
pub fn default_nv_axes() -> [Vec3; 4] {
    let s = 1.0 / 3.0f64.sqrt();
    [
        Vec3::new(s, s, s),
        Vec3::new(s, -s, -s),
        Vec3::new(-s, s, -s),
        Vec3::new(-s, -s, s),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, rtol: f64) -> bool {
        (a - b).abs() <= rtol * a.abs().max(b.abs())
    }

    /// Independent oracle: dense midpoint summation of dl x r / r^3 elements.
    fn dense_sum_field(layout: &CircuitLayout, current_a: f64, p: Vec3, n_per_seg: usize) -> Vec3 {
        let mut b = Vec3::ZERO;
        for (i, seg) in layout.segments().iter().enumerate() {
            let i_eff = current_a * layout.drive_weight(i);
            let d = seg.end - seg.start;
            let dl = d * (1.0 / n_per_seg as f64);
            for k in 0..n_per_seg {
                let mid = seg.start + d * ((k as f64 + 0.5) / n_per_seg as f64);
                let r = p - mid;
                let rn = r.norm();
                b = b + dl.cross(r) * (MU0_OVER_4PI_UM * i_eff / (rn * rn * rn));
            }
        }
        b
    }

    fn long_y_wire() -> CircuitLayout {
        let seg = WireSegment::new(
            Vec3::new(0.0, -1e6, 10.0),
            Vec3::new(0.0, 1e6, 10.0),
            10.0,
        )
        .unwrap();
        CircuitLayout::new("long_y", vec![seg]).unwrap()
    }

    #[test]
    fn matches_infinite_wire_oracle_at_400_ut() {
        // mu0 I / (2 pi d) with I = 20 mA, d = 10 um.
        let expected = 2.0e-7 * 0.02 / 10e-6; // 400 uT
        let sample = field_at_point(&long_y_wire(), 0.02, Vec3::ZERO).unwrap();
        assert!(close(sample.b.norm(), expected, 1e-6));
        // Azimuthal direction: pure +-x below a +y current.
        assert!(sample.b.x.abs() > 1e9 * sample.b.y.abs());
        assert!(sample.b.x.abs() > 1e9 * sample.b.z.abs());
        assert!(sample.b.x < 0.0);
    }

    #[test]
    fn zero_current_gives_zero_field() {
        let sample = field_at_point(&long_y_wire(), 0.0, Vec3::new(5.0, 3.0, 0.0)).unwrap();
        assert_eq!(sample.b, Vec3::ZERO);
    }

    #[test]
    fn field_is_antisymmetric_in_current() {
        let p = Vec3::new(7.0, -3.0, 2.0);
        let fwd = field_at_point(&long_y_wire(), 0.013, p).unwrap().b;
        let rev = field_at_point(&long_y_wire(), -0.013, p).unwrap().b;
        assert_eq!(fwd, -rev);
    }

    #[test]
    fn finite_segment_converges_to_infinite_wire() {
        // Half-length to distance ratio 1e5: relative error below 1e-6.
        let d = 10.0;
        let seg = WireSegment::new(
            Vec3::new(0.0, -1e6, d),
            Vec3::new(0.0, 1e6, d),
            10.0,
        )
        .unwrap();
        let layout = CircuitLayout::new("l", vec![seg]).unwrap();
        let b = field_at_point(&layout, 1.0, Vec3::ZERO).unwrap().b.norm();
        let inf = 2.0 * MU0_OVER_4PI_UM / d;
        assert!(close(b, inf, 1e-6));
    }

    #[test]
    fn inverse_distance_decay() {
        let layout = long_y_wire(); // wire at z = 10
        let b1 = field_at_point(&layout, 0.01, Vec3::new(0.0, 0.0, 0.0))
            .unwrap()
            .b
            .norm();
        let b2 = field_at_point(&layout, 0.01, Vec3::new(0.0, 0.0, -10.0))
            .unwrap()
            .b
            .norm();
        assert!((b1 / b2 - 2.0).abs() < 1e-3);
    }

    #[test]
    fn superposition_over_equal_width_segments() {
        let a = WireSegment::new(Vec3::new(0.0, -50.0, 0.0), Vec3::new(0.0, 0.0, 0.0), 5.0)
            .unwrap();
        let b = WireSegment::new(Vec3::new(0.0, 0.0, 0.0), Vec3::new(30.0, 0.0, 0.0), 5.0)
            .unwrap();
        let both = CircuitLayout::new("both", vec![a, b]).unwrap();
        let la = CircuitLayout::new("a", vec![a]).unwrap();
        let lb = CircuitLayout::new("b", vec![b]).unwrap();
        let p = Vec3::new(4.0, 6.0, 9.0);
        let f_both = field_at_point(&both, 0.02, p).unwrap().b;
        let f_sum = field_at_point(&la, 0.02, p).unwrap().b + field_at_point(&lb, 0.02, p).unwrap().b;
        assert!(close(f_both.x, f_sum.x, 1e-12));
        assert!(close(f_both.y, f_sum.y, 1e-12));
        assert!(close(f_both.z, f_sum.z, 1e-12));
    }

    #[test]
    fn singularity_guard_rejects_on_wire_points() {
        let err = field_at_point(&long_y_wire(), 0.01, Vec3::new(0.0, 3.0, 10.0));
        assert!(matches!(err, Err(Error::Singularity { .. })));
    }

    #[test]
    fn disconnected_segments_rejected() {
        let a = WireSegment::new(Vec3::ZERO, Vec3::new(10.0, 0.0, 0.0), 5.0).unwrap();
        let b = WireSegment::new(Vec3::new(11.0, 0.0, 0.0), Vec3::new(20.0, 0.0, 0.0), 5.0)
            .unwrap();
        assert!(CircuitLayout::new("gap", vec![a, b]).is_err());
    }

    #[test]
    fn cross_layout_shape() {
        let layout = make_cross_layout(10.0, 5.0, 15.0, 225.0, Axis::Y).unwrap();
        let segs = layout.segments();
        assert_eq!(segs.len(), 3);
        assert_eq!(segs[0].start, Vec3::new(0.0, -225.0, 0.0));
        assert_eq!(segs[1].start, Vec3::new(0.0, -7.5, 0.0));
        assert_eq!(segs[1].end, Vec3::new(0.0, 7.5, 0.0));
        assert_eq!(segs[1].width, 5.0);
        assert_eq!(segs[2].end, Vec3::new(0.0, 225.0, 0.0));
        // Narrow center carries doubled current density.
        assert_eq!(layout.drive_weight(0), 1.0);
        assert_eq!(layout.drive_weight(1), 2.0);
    }

    #[test]
    fn cross_layout_rejects_bad_dimensions() {
        assert!(make_cross_layout(0.0, 5.0, 15.0, 225.0, Axis::Y).is_err());
        assert!(make_cross_layout(10.0, -1.0, 15.0, 225.0, Axis::Y).is_err());
        assert!(make_cross_layout(10.0, 11.0, 15.0, 225.0, Axis::Y).is_err());
        assert!(make_cross_layout(10.0, 5.0, 500.0, 225.0, Axis::Y).is_err());
    }

    #[test]
    fn degenerate_cross_equals_uniform_track() {
        let cross = make_cross_layout(10.0, 10.0, 15.0, 225.0, Axis::X).unwrap();
        let single = CircuitLayout::new(
            "uniform",
            vec![WireSegment::new(
                Vec3::new(-225.0, 0.0, 0.0),
                Vec3::new(225.0, 0.0, 0.0),
                10.0,
            )
            .unwrap()],
        )
        .unwrap();
        for p in [
            Vec3::new(0.0, 0.0, 10.0),
            Vec3::new(40.0, -12.0, 8.0),
            Vec3::new(-100.0, 30.0, 20.0),
        ] {
            let a = field_at_point(&cross, 0.004, p).unwrap().b;
            let b = field_at_point(&single, 0.004, p).unwrap().b;
            assert!(close(a.x, b.x, 1e-12) && close(a.y, b.y, 1e-12) && close(a.z, b.z, 1e-12));
        }
    }

    #[test]
    fn cross_axes_related_by_rotation() {
        let lx = make_cross_layout(10.0, 5.0, 15.0, 225.0, Axis::X).unwrap();
        let ly = make_cross_layout(10.0, 5.0, 15.0, 225.0, Axis::Y).unwrap();
        let rotated = lx.rot90_z();
        assert_eq!(rotated.segments(), ly.segments());
    }

    #[test]
    fn closed_form_matches_dense_summation_oracle() {
        let layout = make_cross_layout(10.0, 5.0, 15.0, 225.0, Axis::Y).unwrap();
        for p in [
            Vec3::new(3.0, 1.0, 10.0),
            Vec3::new(-20.0, 55.0, 10.0),
            Vec3::new(80.0, -140.0, 12.5),
        ] {
            let exact = field_at_point(&layout, 0.004, p).unwrap().b;
            let oracle = dense_sum_field(&layout, 0.004, p, 60_000);
            assert!(close(exact.x, oracle.x, 1e-5));
            assert!(close(exact.y, oracle.y, 1e-5));
            assert!(close(exact.z, oracle.z, 1e-5));
        }
    }

    #[test]
    fn project_examples() {
        let ut = 1e-6;
        let b = Vec3::new(1.0 * ut, 0.0, 0.0);
        assert_eq!(project(b, Vec3::new(1.0, 0.0, 0.0)).unwrap(), ut);
        // Azimuthal field around a straight wire has no component along it.
        let sample = field_at_point(&long_y_wire(), 0.02, Vec3::new(8.0, 0.0, 0.0)).unwrap();
        let along = project(sample.b, Vec3::new(0.0, 1.0, 0.0)).unwrap();
        assert!(along.abs() < 1e-18);
        assert!(project(b, Vec3::new(1.0, 1.0, 0.0)).is_err());
    }

    #[test]
    fn rotation_equivariance_of_projection() {
        let layout = make_cross_layout(10.0, 5.0, 15.0, 225.0, Axis::Y).unwrap();
        let axis = Vec3::new(1.0, 1.0, 1.0).normalized();
        let p = Vec3::new(17.0, -42.0, 10.0);
        let direct = project(field_at_point(&layout, 0.004, p).unwrap().b, axis).unwrap();
        let rotated = project(
            field_at_point(&layout.rot90_z(), 0.004, p.rot90_z()).unwrap().b,
            axis.rot90_z(),
        )
        .unwrap();
        assert!(close(direct, rotated, 1e-12));
    }

    #[test]
    fn field_map_basics() {
        let layout = make_cross_layout(10.0, 5.0, 15.0, 225.0, Axis::Y).unwrap();
        let axis = Vec3::new(1.0, 1.0, 1.0).normalized();
        let grid = PixelGrid::centered(64, 64, 1.5);
        let map = field_map(&layout, 0.004, &grid, 10.0, axis).unwrap();
        // Peak sits right next to the track centerline (col index of x ~ -4 um).
        let (_, col) = map.argmax_abs();
        let x_peak = grid.pixel_center(0, col).x;
        assert!((x_peak + 4.14).abs() <= 2.0 * grid.pitch_um + 0.76);

        // Linearity: doubling current doubles every pixel.
        let map2 = field_map(&layout, 0.008, &grid, 10.0, axis).unwrap();
        for (a, b) in map.values_t.iter().zip(&map2.values_t) {
            assert!(close(*b, 2.0 * *a, 1e-12));
        }

        // Normalization helper peaks at magnitude 1.
        let norm = map.normalized();
        assert!((norm.peak_abs() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn field_map_rejects_empty_grid_and_bad_standoff() {
        let layout = long_y_wire();
        let axis = Vec3::new(0.0, 0.0, 1.0);
        let empty = PixelGrid::centered(0, 10, 1.5);
        assert!(field_map(&layout, 0.01, &empty, 10.0, axis).is_err());
        let grid = PixelGrid::centered(4, 4, 1.5);
        assert!(field_map(&layout, 0.01, &grid, 0.0, axis).is_err());
    }
}
