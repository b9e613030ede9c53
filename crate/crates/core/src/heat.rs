//! Dunkl-type heat kernel, its short-time comparison with the Gaussian,
//! Wiener averages of the representing measures, and the product
//! decomposition for partly vanishing multiplicities.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::asymptotics::{integrate_f_accumulate, normalized_kernel_ray, IntegrationOptions};
use crate::curve::AdmissibleCurve;
use crate::dunkl::{kernel_polynomial, kernel_series, MAX_SERIES_DEGREE};
use crate::error::{DunklError, Result};
use crate::groups::{
    chamber_test, dot, gamma_index, is_regular, make_root_system, mehta_constant, norm, weight, Family,
    ReflectionGroup, RootSystem, VectorN,
};
use crate::quadrature::{adaptive, gauss_legendre};
use crate::specfun::{ln_gamma, Rank1Params};

/// Series is used while `|x||y|/(2t)` stays at or below this.
pub const SERIES_SWITCH: f64 = 8.0;
/// Series tolerance for heat evaluations (values there are `O(e^{|x||y|/2t})`).
const HEAT_SERIES_TOL: f64 = 1e-11;
const WIENER_SERIES_TOL: f64 = 1e-13;

/// One heat-kernel evaluation point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatQuery {
    pub t: f64,
    pub x: VectorN,
    pub y: VectorN,
}

impl HeatQuery {
    pub fn new(t: f64, x: VectorN, y: VectorN) -> Result<Self> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(DunklError::InvalidParameter(format!("heat time must be positive, got {t}")));
        }
        if x.len() != y.len() {
            return Err(DunklError::DimensionMismatch { expected: x.len(), got: y.len() });
        }
        Ok(Self { t, x, y })
    }
}

/// How `E_k(x/√(2t), y/√(2t))` was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalPath {
    Series,
    Ode,
}

impl std::fmt::Display for EvalPath {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            EvalPath::Series => "series",
            EvalPath::Ode => "ode",
        })
    }
}

/// Per-`s` data of `E_k(s x, y)`: `log E_k(s x, y) − s⟨x,y⟩ + γ log s`
/// is awkward near walls, so carry `ψ = s^γ e^{−s⟨x,y⟩} E_k(sx, y)` and a
/// real exponent shift `e^{shift}` with `E_k(sx,y) = ψ s^{−γ} e^{s⟨x,y⟩ + shift}`.
struct Scaled {
    psi: f64,
    shift: f64,
    path: EvalPath,
}

/// `E_k(sx, y)` for every `s` in `s_list` (ascending), split as in [`Scaled`].
fn scaled_kernel(rs: &RootSystem, group: &ReflectionGroup, x: &[f64], y: &[f64], s_list: &[f64]) -> Result<Vec<Scaled>> {
    let gamma = gamma_index(rs);
    let r = norm(x) * norm(y);
    let xy = dot(x, y);
    let mut out: Vec<Option<Scaled>> = (0..s_list.len()).map(|_| None).collect();
    let mut ode = Vec::new();
    for (i, &s) in s_list.iter().enumerate() {
        if s * r <= SERIES_SWITCH {
            let sx: Vec<Complex64> = x.iter().map(|&v| Complex64::new(s * v, 0.0)).collect();
            let yc: Vec<Complex64> = y.iter().map(|&v| Complex64::new(v, 0.0)).collect();
            let e = kernel_series(rs, &sx, &yc, HEAT_SERIES_TOL, MAX_SERIES_DEGREE)?.value.re;
            out[i] = Some(Scaled { psi: s.powf(gamma) * (-s * xy).exp() * e, shift: 0.0, path: EvalPath::Series });
        } else {
            ode.push(i);
        }
    }
    if !ode.is_empty() {
        // x = h x_c, h⁻¹y = g y_c, so E(sx, y) = E(s x_c, g y_c) = Ψ̂_g(s) s^{−γ} e^{s⟨x_c,y_c⟩}
        let (h, xc) = group.to_chamber(rs, x);
        let hy = group.apply(group.inverse(h), y);
        let (g, yc) = group.to_chamber(rs, &hy);
        if !chamber_test(rs, &xc, None) || !chamber_test(rs, &yc, None) {
            return Err(DunklError::Regime(
                "the small-time path needs regular x and y; points on a wall are out of reach".into(),
            ));
        }
        let ss: Vec<f64> = ode.iter().map(|&i| s_list[i]).collect();
        let (_, vals) = normalized_kernel_ray(group, rs, &xc, &yc, 0.0, &ss, &IntegrationOptions::default())?;
        let dxy = dot(&xc, &yc) - xy;
        for (&i, v) in ode.iter().zip(vals) {
            out[i] = Some(Scaled { psi: v[g].re, shift: s_list[i] * dxy, path: EvalPath::Ode });
        }
    }
    Ok(out.into_iter().map(|o| o.expect("every s assigned")).collect())
}

fn check_pair(rs: &RootSystem, x: &[f64], y: &[f64]) -> Result<()> {
    for v in [x, y] {
        if v.len() != rs.dim() {
            return Err(DunklError::DimensionMismatch { expected: rs.dim(), got: v.len() });
        }
    }
    Ok(())
}

/// `Γ_k(t,x,y) = (2t)^{−γ−N/2} c_k^{−1} e^{−(|x|²+|y|²)/4t} E_k(x/√(2t), y/√(2t))`.
pub fn heat_kernel(rs: &RootSystem, group: &ReflectionGroup, q: &HeatQuery) -> Result<f64> {
    let q = HeatQuery::new(q.t, q.x.clone(), q.y.clone())?;
    check_pair(rs, &q.x, &q.y)?;
    let ck = mehta_constant(rs)?;
    let s = 0.5 / q.t;
    let sc = scaled_kernel(rs, group, &q.x, &q.y, &[s])?.pop().expect("one value");
    let d2: f64 = q.x.iter().zip(&q.y).map(|(a, b)| (a - b) * (a - b)).sum();
    // (2t)^{−γ} s^{−γ} = 1
    let n = rs.dim() as f64;
    Ok((2.0 * q.t).powf(-0.5 * n) / ck * (-d2 / (4.0 * q.t) + sc.shift).exp() * sc.psi)
}

/// Free Gaussian heat kernel `(4πt)^{−N/2} e^{−|x−y|²/4t}`.
pub fn gaussian_kernel(t: f64, x: &[f64], y: &[f64]) -> f64 {
    let d2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
    (4.0 * PI * t).powf(-0.5 * x.len() as f64) * (-d2 / (4.0 * t)).exp()
}

/// `√(w_k(x)w_k(y)) Γ_k(t,x,y)/Γ_0(t,x,y)` at one `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeatRatio {
    pub t: f64,
    pub ratio: f64,
    pub path: EvalPath,
}

/// Short-time ratios over a decreasing `t_grid`.
pub fn shorttime_ratio(rs: &RootSystem, group: &ReflectionGroup, x: &[f64], y: &[f64], t_grid: &[f64]) -> Result<Vec<HeatRatio>> {
    check_pair(rs, x, y)?;
    if t_grid.is_empty() || t_grid.iter().any(|&t| !(t > 0.0)) || t_grid.windows(2).any(|w| w[1] >= w[0]) {
        return Err(DunklError::InvalidParameter("t grid must be positive and strictly decreasing".into()));
    }
    let c0 = (2.0 * PI).powf(0.5 * rs.dim() as f64);
    let ck = mehta_constant(rs)?;
    let pref = (weight(rs, x) * weight(rs, y)).sqrt() * c0 / ck;
    let s_list: Vec<f64> = t_grid.iter().map(|t| 0.5 / t).collect();
    let vals = scaled_kernel(rs, group, x, y, &s_list)?;
    Ok(t_grid
        .iter()
        .zip(vals)
        .map(|(&t, v)| HeatRatio { t, ratio: pref * v.psi * v.shift.exp(), path: v.path })
        .collect())
}

/// Writes `t,ratio,path` rows.
pub fn heat_ratios_to_csv<W: Write>(rows: &[HeatRatio], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    let io = |e: csv::Error| DunklError::Internal(format!("csv output: {e}"));
    wr.write_record(["t", "ratio", "path"]).map_err(io)?;
    for r in rows {
        wr.write_record([format!("{:.16e}", r.t), format!("{:.16e}", r.ratio), r.path.to_string()]).map_err(io)?;
    }
    wr.flush().map_err(|e| DunklError::Internal(format!("csv output: {e}")))
}

/// Averages `n^{−N}∫_{|ξ|≤n}|E_k(ix,ξ)|²dξ` over a radius grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WienerScan {
    pub x: VectorN,
    pub n_grid: Vec<f64>,
    pub averages: Vec<f64>,
}

impl WienerScan {
    pub fn new(x: VectorN, n_grid: Vec<f64>, averages: Vec<f64>) -> Result<Self> {
        if n_grid.len() != averages.len() {
            return Err(DunklError::DimensionMismatch { expected: n_grid.len(), got: averages.len() });
        }
        if n_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(DunklError::InvalidParameter("radii must increase strictly".into()));
        }
        if averages.iter().any(|a| !(*a >= 0.0)) {
            return Err(DunklError::InvalidParameter("averages must be non-negative".into()));
        }
        Ok(Self { x, n_grid, averages })
    }

    /// Writes `n,average` rows.
    pub fn to_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        let io = |e: csv::Error| DunklError::Internal(format!("csv output: {e}"));
        wr.write_record(["n", "average"]).map_err(io)?;
        for (n, a) in self.n_grid.iter().zip(&self.averages) {
            wr.write_record([format!("{:.16e}", n), format!("{:.16e}", a)]).map_err(io)?;
        }
        wr.flush().map_err(|e| DunklError::Internal(format!("csv output: {e}")))
    }
}

/// Quadrature settings for Wiener averages.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WienerOptions {
    /// Angular nodes per chamber coordinate; `None` picks from `n|x|`.
    pub angular_nodes: Option<usize>,
    /// Gauss–Legendre order per radial panel in the series core.
    pub core_order: usize,
    pub integration: IntegrationOptions,
}

impl Default for WienerOptions {
    fn default() -> Self {
        Self { angular_nodes: None, core_order: 20, integration: IntegrationOptions::default() }
    }
}

/// Unit directions in the closed chamber with quadrature weights for the
/// surface measure of the sphere restricted to it.
fn chamber_directions(rs: &RootSystem, nodes: usize) -> Result<Vec<(VectorN, f64)>> {
    match rs.dim() {
        1 => Ok(vec![(vec![1.0], 1.0)]),
        2 => {
            let (lo, hi) = chamber_sector(rs);
            let rule = gauss_legendre(nodes);
            let half = 0.5 * (hi - lo);
            Ok(rule
                .nodes
                .iter()
                .zip(&rule.weights)
                .map(|(s, w)| {
                    let a = lo + half * (1.0 + s);
                    (vec![a.cos(), a.sin()], w * half)
                })
                .collect())
        }
        3 if matches!(rs.family(), Family::Z2N(3)) => {
            // positive octant in polar/azimuthal angles
            let rule = gauss_legendre(nodes);
            let h = PI / 4.0;
            let mut out = Vec::with_capacity(nodes * nodes);
            for (a, wa) in rule.nodes.iter().zip(&rule.weights) {
                let th = h * (1.0 + a);
                for (b, wb) in rule.nodes.iter().zip(&rule.weights) {
                    let ph = h * (1.0 + b);
                    let u = vec![th.sin() * ph.cos(), th.sin() * ph.sin(), th.cos()];
                    out.push((u, wa * wb * h * h * th.sin()));
                }
            }
            Ok(out)
        }
        n => Err(DunklError::InvalidParameter(format!("Wiener averages are implemented for N ≤ 3, got N = {n}"))),
    }
}

/// Angular interval `(lo, hi)` of the planar chamber.
fn chamber_sector(rs: &RootSystem) -> (f64, f64) {
    // chamber directions are those with every ⟨α,u⟩ > 0; bracket by the wall angles
    let mut walls: Vec<f64> = rs
        .positive_roots()
        .iter()
        .flat_map(|a| {
            let p = a[1].atan2(a[0]) + PI / 2.0;
            [p.rem_euclid(2.0 * PI), (p + PI).rem_euclid(2.0 * PI)]
        })
        .collect();
    walls.sort_by(f64::total_cmp);
    for i in 0..walls.len() {
        let lo = walls[i];
        let mut hi = walls[(i + 1) % walls.len()];
        if hi <= lo {
            hi += 2.0 * PI;
        }
        let mid = 0.5 * (lo + hi);
        if chamber_test(rs, &[mid.cos(), mid.sin()], None) {
            return (lo, hi);
        }
    }
    unreachable!("a planar root system has a chamber between consecutive walls")
}

/// Wiener averages for every `n` in `n_grid` (strictly increasing, ≥ 1).
pub fn wiener_scan(rs: &RootSystem, group: &ReflectionGroup, x: &[f64], n_grid: &[f64], opts: &WienerOptions) -> Result<WienerScan> {
    use rayon::prelude::*;
    if x.len() != rs.dim() {
        return Err(DunklError::DimensionMismatch { expected: rs.dim(), got: x.len() });
    }
    if !is_regular(rs, x) {
        return Err(DunklError::InvalidParameter(format!("x = {x:?} is not regular")));
    }
    if n_grid.is_empty() || n_grid[0] < 1.0 || n_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(DunklError::InvalidParameter("radii must be ≥ 1 and strictly increasing".into()));
    }
    let dim = rs.dim();
    // E(ix, ξ) integrated over the ball is invariant under x → gx
    let (_, xc) = group.to_chamber(rs, x);
    let xn = norm(&xc);
    let n_max = *n_grid.last().expect("non-empty");
    let width = if dim == 2 { let (lo, hi) = chamber_sector(rs); hi - lo } else { PI / 2.0 };
    let nodes = opts.angular_nodes.unwrap_or_else(|| ((1.5 * n_max * xn * width).ceil() as usize).clamp(12, 400));
    let dirs = chamber_directions(rs, nodes)?;
    // |E(iru, h x_c)|² summed over h covers the whole G-orbit of the direction
    let r0 = opts.integration.seed_radius / xn;
    let degree = series_degree(opts.integration.seed_radius, WIENER_SERIES_TOL)?;
    let polys = (0..group.order())
        .map(|h| {
            let hx: Vec<Complex64> = group.apply(h, &xc).iter().map(|&v| Complex64::new(v, 0.0)).collect();
            kernel_polynomial(rs, &hx, degree)
        })
        .collect::<Result<Vec<_>>>()?;
    let gamma = gamma_index(rs);
    let wx = weight(rs, &xc);
    let core_rule = gauss_legendre(opts.core_order);
    let per_dir = dirs
        .par_iter()
        .map(|(u, wt)| -> Result<Vec<f64>> {
            // radial polynomials r ↦ P_h(iru): coefficient of r^n is i^n H_n(u)
            let radial: Vec<Vec<Complex64>> = polys
                .iter()
                .map(|p| {
                    let mut c = vec![Complex64::default(); degree as usize + 1];
                    for (e, v) in p.terms() {
                        let d: u32 = e.iter().sum();
                        let m = e.iter().zip(u).fold(1.0, |acc, (&k, ui)| acc * ui.powi(k as i32));
                        c[d as usize] += v * m * Complex64::i().powu(d);
                    }
                    c
                })
                .collect();
            let core_density = |r: f64| -> f64 {
                let mut s = 0.0;
                for c in &radial {
                    let v = c.iter().rev().fold(Complex64::default(), |acc, a| acc * r + a);
                    s += v.norm_sqr();
                }
                s * r.powi(dim as i32 - 1)
            };
            let core_to = |b: f64| -> f64 {
                // panels of about one radian of phase
                let panels = ((b * xn * 2.0).ceil() as usize).max(2);
                let h = b / panels as f64;
                (0..panels).map(|j| core_rule.integrate(j as f64 * h, (j + 1) as f64 * h, core_density)).sum()
            };
            let core_full = core_to(r0);
            let outer: Vec<f64> = n_grid.iter().copied().filter(|&n| n > r0).collect();
            let mut q = Vec::new();
            if !outer.is_empty() {
                let curve = AdmissibleCurve::ray(rs, u)?;
                let wu = weight(rs, u);
                let (_, acc) = integrate_f_accumulate(&curve, group, rs, &xc, &outer, &opts.integration, |t, f| {
                    let s: f64 = f.iter().map(|c| c.norm_sqr()).sum();
                    s * t.powi(dim as i32 - 1) / (wu * t.powf(2.0 * gamma) * wx)
                })?;
                q = acc;
            }
            let mut qi = q.into_iter();
            Ok(n_grid
                .iter()
                .map(|&n| wt * if n <= r0 { core_to(n) } else { core_full + qi.next().expect("outer value") })
                .collect())
        })
        .collect::<Result<Vec<_>>>()?;
    let averages = (0..n_grid.len())
        .map(|j| per_dir.iter().map(|v| v[j]).sum::<f64>() / n_grid[j].powi(dim as i32))
        .collect();
    WienerScan::new(x.to_vec(), n_grid.to_vec(), averages)
}

/// Smallest degree whose tail bound at `|x||y| = radius` is below `tol`.
fn series_degree(radius: f64, tol: f64) -> Result<u32> {
    let mut term = 1.0;
    for n in 1..=MAX_SERIES_DEGREE {
        term *= radius / n as f64;
        let next = term * radius / (n as f64 + 1.0);
        let ratio = radius / (n as f64 + 2.0);
        if ratio < 1.0 && next / (1.0 - ratio) < tol {
            return Ok(n);
        }
    }
    Err(DunklError::Regime(format!("series core radius {radius} needs more than {MAX_SERIES_DEGREE} degrees")))
}

/// Single Wiener average `n^{−N}∫_{|ξ|≤n}|E_k(ix,ξ)|²dξ`.
pub fn wiener_average(rs: &RootSystem, group: &ReflectionGroup, x: &[f64], n: f64) -> Result<f64> {
    Ok(wiener_scan(rs, group, x, &[n], &WienerOptions::default())?.averages[0])
}

/// Least-squares slope of `log(average)` against `log(n)`.
pub fn continuity_slope(scan: &WienerScan) -> Result<f64> {
    if scan.n_grid.len() < 4 {
        return Err(DunklError::InvalidParameter(format!("need at least 4 grid points, got {}", scan.n_grid.len())));
    }
    if scan.averages.iter().any(|&a| !(a > 0.0)) {
        return Err(DunklError::InvalidParameter("averages must be positive for a log fit".into()));
    }
    let xs: Vec<f64> = scan.n_grid.iter().map(|n| n.ln()).collect();
    let ys: Vec<f64> = scan.averages.iter().map(|a| a.ln()).collect();
    let m = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / m, ys.iter().sum::<f64>() / m);
    let sxy: f64 = xs.iter().zip(&ys).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = xs.iter().map(|a| (a - mx) * (a - mx)).sum();
    Ok(sxy / sxx)
}

/// Residual of the split `E_k(x,y) = E_{k′}(x′,y′)·e^{⟨x″,y″⟩}` for `Z2^N`,
/// where primes keep the coordinates with positive multiplicity.
pub fn product_decomposition_check(rs: &RootSystem, x: &[f64], y: &[f64], tol: f64) -> Result<f64> {
    check_pair(rs, x, y)?;
    let Family::Z2N(n) = rs.family() else {
        return Err(DunklError::InvalidParameter("product decomposition applies to Z2^N".into()));
    };
    let ks = rs.multiplicities();
    if ks.iter().all(|&k| k > 0.0) {
        return Err(DunklError::InvalidParameter("needs at least one vanishing multiplicity".into()));
    }
    let c = |v: &[f64]| -> Vec<Complex64> { v.iter().map(|&a| Complex64::new(a, 0.0)).collect() };
    let full = kernel_series(rs, &c(x), &c(y), tol, MAX_SERIES_DEGREE)?.value;
    let keep: Vec<usize> = (0..n).filter(|&i| ks[i] > 0.0).collect();
    let rest: f64 = (0..n).filter(|&i| ks[i] == 0.0).map(|i| x[i] * y[i]).sum();
    let reduced = if keep.is_empty() {
        Complex64::new(1.0, 0.0)
    } else {
        let sub = make_root_system(Family::Z2N(keep.len()), &keep.iter().map(|&i| ks[i]).collect::<Vec<_>>())?;
        let xs: Vec<f64> = keep.iter().map(|&i| x[i]).collect();
        let ys: Vec<f64> = keep.iter().map(|&i| y[i]).collect();
        kernel_series(&sub, &c(&xs), &c(&ys), tol, MAX_SERIES_DEGREE)?.value
    };
    Ok((full - reduced * rest.exp()).norm())
}

/// `μ_x^k([−|x|, u])` for the rank-one representing measure, by quadrature
/// of the explicit density.
pub fn rank1_measure_cdf(k: f64, x: f64, u: f64) -> Result<f64> {
    let k = Rank1Params::new(k)?.k();
    if k == 0.0 {
        return Err(DunklError::InvalidParameter("k = 0 is a point mass; no density".into()));
    }
    if x == 0.0 || !x.is_finite() {
        return Err(DunklError::InvalidParameter(format!("x must be non-zero, got {x}")));
    }
    let a = x.abs();
    if u <= -a {
        return Ok(0.0);
    }
    if u >= a {
        return Ok(1.0);
    }
    // in r = u/x the density is c(1−r)^{k−1}(1+r)^k on [−1, 1]
    let c = (ln_gamma(k + 0.5) - ln_gamma(0.5) - ln_gamma(k)).exp();
    let (lo, hi) = if x > 0.0 { (-1.0, u / x) } else { (u / x, 1.0) };
    Ok((c * jacobi_mass(k, lo, hi)?).clamp(0.0, 1.0))
}

/// `∫_lo^hi (1−r)^{k−1}(1+r)^k dr` on `[−1, 1]`, with the endpoint
/// singularities removed by `v = (1+r)^{k+1}` and `v = (1−r)^k`.
fn jacobi_mass(k: f64, lo: f64, hi: f64) -> Result<f64> {
    let left = |a: f64, b: f64| -> Result<f64> {
        if b <= a {
            return Ok(0.0);
        }
        let (va, vb) = ((1.0 + a).powf(k + 1.0), (1.0 + b).powf(k + 1.0));
        let f = |v: f64| (2.0 - v.powf(1.0 / (k + 1.0))).powf(k - 1.0);
        Ok(adaptive(va, vb, 1e-13, 1e-12, f)? / (k + 1.0))
    };
    let right = |a: f64, b: f64| -> Result<f64> {
        if b <= a {
            return Ok(0.0);
        }
        let (va, vb) = ((1.0 - b).powf(k), (1.0 - a).powf(k));
        let f = |v: f64| (2.0 - v.powf(1.0 / k)).powf(k);
        Ok(adaptive(va, vb, 1e-13, 1e-12, f)? / k)
    };
    Ok(left(lo, hi.min(0.0))? + right(lo.max(0.0), hi)?)
}
