//! Admissible curves in the Weyl chamber.

use serde::{Deserialize, Serialize};

use crate::error::{DunklError, Result};
use crate::groups::{chamber_test, cone_parameter, norm, RootSystem, VectorN};

/// Half-width of the parameter window over which bent-curve corners are
/// blended.
pub const CORNER_HALF_WIDTH: f64 = 0.01;
/// Samples per unit parameter used to certify bent curves.
const SAMPLES_PER_UNIT: usize = 400;

/// Shape of a curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CurveKind {
    /// `κ(t) = t·x`.
    Ray { direction: VectorN },
    /// Starts at the origin, passes through `waypoints[j]` at `t = j + 1`
    /// (piecewise linear with corners blended), then continues as a ray
    /// along the last segment.
    Bent { waypoints: Vec<VectorN> },
    /// `z(t) = t·e^{iθ}·x`; only used for the half-plane limit.
    ComplexRay { direction: VectorN, theta: f64 },
}

/// A curve together with its certified cone parameter δ.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdmissibleCurve {
    #[serde(flatten)]
    kind: CurveKind,
    delta: f64,
    #[serde(skip)]
    segments: Vec<VectorN>,
}

fn smoothstep(u: f64) -> f64 {
    u * u * (3.0 - 2.0 * u)
}

/// `∫_0^u smoothstep`.
fn smoothstep_integral(u: f64) -> f64 {
    u * u * u * (1.0 - 0.5 * u)
}

impl AdmissibleCurve {
    pub fn ray(rs: &RootSystem, direction: &[f64]) -> Result<Self> {
        check_dim(rs, direction)?;
        if !chamber_test(rs, direction, None) {
            return Err(DunklError::Admissibility(format!(
                "ray direction {direction:?} is not in the open chamber"
            )));
        }
        Ok(Self {
            kind: CurveKind::Ray { direction: direction.to_vec() },
            delta: cone_parameter(rs, direction),
            segments: vec![direction.to_vec()],
        })
    }

    pub fn complex_ray(rs: &RootSystem, direction: &[f64], theta: f64) -> Result<Self> {
        if !(0.0..=std::f64::consts::FRAC_PI_2).contains(&theta) {
            return Err(DunklError::InvalidParameter(format!("θ must lie in [0, π/2], got {theta}")));
        }
        let base = Self::ray(rs, direction)?;
        Ok(Self { kind: CurveKind::ComplexRay { direction: direction.to_vec(), theta }, ..base })
    }

    /// Bent curve through `waypoints`; requires successive differences
    /// (including the first waypoint itself) to lie in the chamber.
    pub fn bent(rs: &RootSystem, waypoints: &[VectorN]) -> Result<Self> {
        if waypoints.is_empty() {
            return Err(DunklError::InvalidParameter("bent curve needs at least one waypoint".into()));
        }
        for w in waypoints {
            check_dim(rs, w)?;
        }
        let mut prev = vec![0.0; waypoints[0].len()];
        let segments = waypoints
            .iter()
            .map(|w| {
                let d = w.iter().zip(&prev).map(|(a, b)| a - b).collect();
                prev = w.clone();
                d
            })
            .collect();
        let curve = Self { kind: CurveKind::Bent { waypoints: waypoints.to_vec() }, delta: 0.0, segments };
        for (j, d) in curve.segments.iter().enumerate() {
            if !chamber_test(rs, d, None) {
                return Err(DunklError::Admissibility(format!(
                    "segment {j} direction {d:?} is not in the chamber"
                )));
            }
        }
        let delta = curve.certify(rs)?;
        Ok(Self { delta, ..curve })
    }

    pub fn from_kind(rs: &RootSystem, kind: &CurveKind) -> Result<Self> {
        match kind {
            CurveKind::Ray { direction } => Self::ray(rs, direction),
            CurveKind::Bent { waypoints } => Self::bent(rs, waypoints),
            CurveKind::ComplexRay { direction, theta } => Self::complex_ray(rs, direction, *theta),
        }
    }

    pub fn kind(&self) -> &CurveKind {
        &self.kind
    }

    /// Certified δ with `κ(t) ∈ C_δ` for all `t > 0`.
    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn dim(&self) -> usize {
        match &self.kind {
            CurveKind::Ray { direction } | CurveKind::ComplexRay { direction, .. } => direction.len(),
            CurveKind::Bent { waypoints } => waypoints[0].len(),
        }
    }

    /// `κ(t)` (for a complex ray, the real direction scaled by `t`).
    pub fn point(&self, t: f64) -> VectorN {
        match &self.kind {
            CurveKind::Ray { direction } | CurveKind::ComplexRay { direction, .. } => {
                direction.iter().map(|v| v * t).collect()
            }
            CurveKind::Bent { waypoints } => bent_eval(waypoints, &self.segments, t).0,
        }
    }

    /// `κ′(t)`.
    pub fn velocity(&self, t: f64) -> VectorN {
        match &self.kind {
            CurveKind::Ray { direction } | CurveKind::ComplexRay { direction, .. } => direction.clone(),
            CurveKind::Bent { waypoints } => bent_eval(waypoints, &self.segments, t).1,
        }
    }

    /// Point and velocity together (cheaper for bent curves).
    pub fn point_velocity(&self, t: f64) -> (VectorN, VectorN) {
        match &self.kind {
            CurveKind::Bent { waypoints } => bent_eval(waypoints, &self.segments, t),
            _ => (self.point(t), self.velocity(t)),
        }
    }

    /// Largest `t` with `|κ(t)|·scale ≤ radius` (|κ| is increasing on
    /// admissible curves in a chamber of angle below π/2).
    pub fn parameter_at_radius(&self, radius: f64, scale: f64) -> f64 {
        let target = radius / scale;
        match &self.kind {
            CurveKind::Ray { direction } | CurveKind::ComplexRay { direction, .. } => target / norm(direction),
            CurveKind::Bent { .. } => {
                let (mut lo, mut hi) = (0.0, 1.0);
                while norm(&self.point(hi)) < target {
                    lo = hi;
                    hi *= 2.0;
                }
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if norm(&self.point(mid)) <= target {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                    if hi - lo <= 1e-15 * hi {
                        break;
                    }
                }
                lo
            }
        }
    }

    /// Samples κ and κ′ densely over the bent part and returns the smallest
    /// cone parameter seen (the final ray is a positive combination of two
    /// chamber vectors, so its cone parameter is bounded by the endpoints').
    fn certify(&self, rs: &RootSystem) -> Result<f64> {
        let dirs = &self.segments;
        let m = dirs.len();
        let mut delta = f64::INFINITY;
        let total = (m + 1) * SAMPLES_PER_UNIT;
        for s in 1..=total {
            let t = s as f64 / SAMPLES_PER_UNIT as f64;
            let (p, v) = self.point_velocity(t);
            if !chamber_test(rs, &v, None) {
                return Err(DunklError::Admissibility(format!("κ′({t}) leaves the chamber")));
            }
            let cp = cone_parameter(rs, &p);
            if !(cp > 0.0) {
                return Err(DunklError::Admissibility(format!("κ({t}) leaves the chamber")));
            }
            delta = delta.min(cp);
        }
        // corner windows get extra resolution
        for j in 1..m {
            for s in 0..=64 {
                let t = j as f64 - CORNER_HALF_WIDTH + 2.0 * CORNER_HALF_WIDTH * s as f64 / 64.0;
                let (p, v) = self.point_velocity(t);
                if !chamber_test(rs, &v, None) {
                    return Err(DunklError::Admissibility(format!("κ′({t}) leaves the chamber")));
                }
                delta = delta.min(cone_parameter(rs, &p));
            }
        }
        Ok(delta.min(cone_parameter(rs, &dirs[m - 1])))
    }
}

fn check_dim(rs: &RootSystem, v: &[f64]) -> Result<()> {
    if v.len() != rs.dim() {
        return Err(DunklError::DimensionMismatch { expected: rs.dim(), got: v.len() });
    }
    if v.iter().any(|c| !c.is_finite()) {
        return Err(DunklError::InvalidParameter("non-finite curve coordinate".into()));
    }
    Ok(())
}

/// Position and velocity of the blended polyline 0 → w_0 → w_1 → … .
fn bent_eval(waypoints: &[VectorN], dirs: &[VectorN], t: f64) -> (VectorN, VectorN) {
    let n = waypoints[0].len();
    let m = dirs.len();
    let w = CORNER_HALF_WIDTH;
    let corner = t.round() as usize;
    let anchor = |j: usize| -> VectorN {
        if j == 0 {
            vec![0.0; n]
        } else {
            waypoints[j - 1].clone()
        }
    };
    if corner >= 1 && corner < m && (t - corner as f64).abs() < w {
        let j = corner;
        let (d0, d1) = (&dirs[j - 1], &dirs[j]);
        let u = (t - (j as f64 - w)) / (2.0 * w);
        let s = smoothstep(u);
        let si = smoothstep_integral(u);
        let xj = anchor(j);
        let pos = (0..n)
            .map(|i| xj[i] - w * d0[i] + (t - (j as f64 - w)) * d0[i] + 2.0 * w * si * (d1[i] - d0[i]))
            .collect();
        let vel = (0..n).map(|i| (1.0 - s) * d0[i] + s * d1[i]).collect();
        return (pos, vel);
    }
    let seg = if t <= 0.0 { 0 } else { (t.floor() as usize).min(m - 1) };
    let base = anchor(seg);
    let d = &dirs[seg];
    let pos = (0..n).map(|i| base[i] + (t - seg as f64) * d[i]).collect();
    (pos, d.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::{make_root_system, Family};

    #[test]
    fn ray_rejects_wall_direction() {
        let rs = make_root_system(Family::Z2N(1), &[1.0]).unwrap();
        assert!(AdmissibleCurve::ray(&rs, &[-1.0]).is_err());
        let c = AdmissibleCurve::ray(&rs, &[2.0]).unwrap();
        assert!((c.delta() - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn bent_curve_is_continuous_and_matches_waypoints() {
        let rs = make_root_system(Family::Dihedral(4), &[1.0, 1.0]).unwrap();
        // chamber of B₂ here is 0 < y < x
        let wp = vec![vec![2.0, 0.5], vec![3.5, 1.2], vec![5.5, 1.6]];
        let c = AdmissibleCurve::bent(&rs, &wp).unwrap();
        assert!(c.delta() > 0.0);
        for (j, w) in wp.iter().enumerate() {
            let p = c.point(j as f64 + 1.0);
            // at a corner the blend shifts the point by O(w·|Δd|)
            let off = norm(&p.iter().zip(w).map(|(a, b)| a - b).collect::<Vec<_>>());
            assert!(off < 0.01, "waypoint {j}: {off}");
        }
        for s in 0..4000 {
            let t = 0.3 + s as f64 * 1e-3;
            let h = 1e-7;
            let (p1, v) = c.point_velocity(t);
            let p2 = c.point(t + h);
            for i in 0..2 {
                assert!(((p2[i] - p1[i]) / h - v[i]).abs() < 1e-4, "t = {t}");
            }
        }
    }

    #[test]
    fn bent_curve_rejects_backward_segment() {
        let rs = make_root_system(Family::Dihedral(4), &[1.0, 1.0]).unwrap();
        let wp = vec![vec![2.0, 0.5], vec![1.5, 0.4]];
        assert!(matches!(AdmissibleCurve::bent(&rs, &wp), Err(DunklError::Admissibility(_))));
    }

    #[test]
    fn radius_parameter_inverts_norm() {
        let rs = make_root_system(Family::Dihedral(4), &[1.0, 1.0]).unwrap();
        let c = AdmissibleCurve::bent(&rs, &[vec![1.0, 0.2], vec![2.5, 1.0]]).unwrap();
        let t = c.parameter_at_radius(8.0, 2.0);
        assert!((norm(&c.point(t)) - 4.0).abs() < 1e-10);
    }
}
