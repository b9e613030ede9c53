//! The field `F = (F_g)` along admissible curves, its linear ODE system
//! `F′ = A F`, the Wintner integrability conditions, extraction of the
//! limit vector `v`, and the half-plane limit along complex rays.

use std::f64::consts::{PI, SQRT_2};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::ser::SerializeSeq;
use serde::{Serialize, Serializer};

use crate::curve::{AdmissibleCurve, CurveKind};
use crate::dunkl::{kernel_series, MAX_SERIES_DEGREE};
use crate::error::{DunklError, Result};
use crate::groups::{
    chamber_test, cone_parameter, dot, gamma_index, is_regular, norm, weight, GroupDescriptor,
    ReflectionGroup, RootSystem, VectorN,
};
use crate::ode::{integrate, OdeOptions, OdeStats};
use crate::quadrature::{adaptive, gauss_legendre};
use crate::specfun::{exp_e1, si_ci};

/// `|κ(t₀)|·|y|` at the series seed.
pub const DEFAULT_SEED_RADIUS: f64 = 6.0;
/// Largest step as a fraction of the shortest local oscillation period.
pub const STEP_PERIOD_FRACTION: f64 = 0.125;
/// Truncation tolerance of the series seed.
pub const SEED_TOL: f64 = 1e-13;

/// Complex vector indexed by group elements, in the group's element order.
#[derive(Debug, Clone, PartialEq)]
pub struct FVector(pub Vec<Complex64>);

impl FVector {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn max_abs_diff(&self, other: &FVector) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn norm_inf(&self) -> f64 {
        self.0.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

#[derive(Serialize)]
struct ReIm {
    re: f64,
    im: f64,
}

impl Serialize for FVector {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(self.0.len()))?;
        for c in &self.0 {
            seq.serialize_element(&ReIm { re: c.re, im: c.im })?;
        }
        seq.end()
    }
}

/// `|G|×|G|` complex matrix at parameter `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemMatrix {
    pub t: f64,
    pub entries: DMatrix<Complex64>,
}

impl SystemMatrix {
    /// Max row sum of moduli.
    pub fn norm_inf(&self) -> f64 {
        row_norm(&self.entries)
    }

    /// Column indices with nonzero entries in row `g`.
    pub fn row_support(&self, g: usize) -> Vec<usize> {
        (0..self.entries.ncols()).filter(|&h| self.entries[(g, h)] != Complex64::default()).collect()
    }
}

fn row_norm(m: &DMatrix<Complex64>) -> f64 {
    m.row_iter().map(|r| r.iter().map(|c| c.norm()).sum::<f64>()).fold(0.0, f64::max)
}

/// Data of `(R, G, y)` used by every ODE evaluation: `b[α][g] = ⟨α, g y⟩`
/// and `sigma[α][g]` = index of `σ_α g`.
struct Pairing {
    roots: Vec<VectorN>,
    k: Vec<f64>,
    b: Vec<Vec<f64>>,
    sigma: Vec<Vec<usize>>,
    order: usize,
}

fn pairing(rs: &RootSystem, group: &ReflectionGroup, y: &[f64]) -> Result<Pairing> {
    if y.len() != rs.dim() {
        return Err(DunklError::DimensionMismatch { expected: rs.dim(), got: y.len() });
    }
    if group.dim() != rs.dim() {
        return Err(DunklError::DimensionMismatch { expected: rs.dim(), got: group.dim() });
    }
    if !chamber_test(rs, y, None) {
        return Err(DunklError::InvalidParameter(format!("y = {y:?} must lie in the open chamber")));
    }
    let order = group.order();
    let gy: Vec<VectorN> = (0..order).map(|g| group.apply(g, y)).collect();
    let roots = rs.positive_roots().to_vec();
    let b = roots.iter().map(|a| gy.iter().map(|v| dot(a, v)).collect()).collect();
    let sigma = (0..roots.len()).map(|r| (0..order).map(|g| group.left_reflect(r, g)).collect()).collect();
    Ok(Pairing { k: rs.multiplicities(), roots, b, sigma, order })
}

fn real_curve(curve: &AdmissibleCurve) -> Result<()> {
    if matches!(curve.kind(), CurveKind::ComplexRay { .. }) {
        return Err(DunklError::InvalidParameter(
            "this operation needs a real admissible curve, not a complex ray".into(),
        ));
    }
    Ok(())
}

fn curve_pairs(p: &Pairing, curve: &AdmissibleCurve, t: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let (x, v) = curve.point_velocity(t);
    let ax: Vec<f64> = p.roots.iter().map(|a| dot(a, &x)).collect();
    if ax.iter().any(|&u| !(u > 0.0)) {
        return Err(DunklError::Admissibility(format!("κ({t}) = {x:?} is not in the open chamber")));
    }
    let av: Vec<f64> = p.roots.iter().map(|a| dot(a, &v)).collect();
    Ok((ax, av))
}

/// `F_g(x, y) = √(w_k(x)w_k(y)) e^{−i⟨x,gy⟩} E_k(ix, gy)` by the series.
pub fn field_f(rs: &RootSystem, group: &ReflectionGroup, x: &[f64], y: &[f64]) -> Result<FVector> {
    if x.len() != rs.dim() || y.len() != rs.dim() {
        return Err(DunklError::DimensionMismatch { expected: rs.dim(), got: x.len().min(y.len()) });
    }
    if !is_regular(rs, x) {
        return Err(DunklError::InvalidParameter(format!("x = {x:?} is not regular")));
    }
    let pref = (weight(rs, x) * weight(rs, y)).sqrt();
    let ix: Vec<Complex64> = x.iter().map(|&v| Complex64::new(0.0, v)).collect();
    let vals = (0..group.order())
        .map(|g| {
            let gy = group.apply(g, y);
            let gyc: Vec<Complex64> = gy.iter().map(|&v| Complex64::new(v, 0.0)).collect();
            let e = kernel_series(rs, &ix, &gyc, SEED_TOL, MAX_SERIES_DEGREE)?.value;
            Ok(Complex64::from_polar(pref, -dot(x, &gy)) * e)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FVector(vals))
}

/// `A(t) = Σ_α k(α) B_α(t)` with
/// `(B_α)_{g,σ_α g} = ⟨α,κ′⟩/⟨α,κ⟩ · e^{−i⟨α,κ⟩⟨α,gy⟩}`.
pub fn matrix_a(curve: &AdmissibleCurve, group: &ReflectionGroup, rs: &RootSystem, y: &[f64], t: f64) -> Result<SystemMatrix> {
    real_curve(curve)?;
    let p = pairing(rs, group, y)?;
    let (ax, av) = curve_pairs(&p, curve, t)?;
    let mut m = DMatrix::<Complex64>::zeros(p.order, p.order);
    for (r, &k) in p.k.iter().enumerate() {
        if k == 0.0 {
            continue;
        }
        for g in 0..p.order {
            m[(g, p.sigma[r][g])] += Complex64::from_polar(k * av[r] / ax[r], -ax[r] * p.b[r][g]);
        }
    }
    Ok(SystemMatrix { t, entries: m })
}

/// `Ã(t) = ∫_t^∞ A(s) ds` in closed form:
/// entry `k(α)[i·sign(b)·si(φ) − Ci(φ)]` with `b = ⟨α,gy⟩`, `φ = ⟨α,κ(t)⟩|b|`.
pub fn matrix_a_tilde(curve: &AdmissibleCurve, group: &ReflectionGroup, rs: &RootSystem, y: &[f64], t: f64) -> Result<SystemMatrix> {
    real_curve(curve)?;
    let p = pairing(rs, group, y)?;
    let (ax, _) = curve_pairs(&p, curve, t)?;
    a_tilde_from(&p, &ax, t)
}

fn a_tilde_from(p: &Pairing, ax: &[f64], t: f64) -> Result<SystemMatrix> {
    let mut m = DMatrix::<Complex64>::zeros(p.order, p.order);
    for (r, &k) in p.k.iter().enumerate() {
        if k == 0.0 {
            continue;
        }
        for g in 0..p.order {
            let b = p.b[r][g];
            let (si, ci) = si_ci(ax[r] * b.abs())?;
            m[(g, p.sigma[r][g])] += Complex64::new(-ci, b.signum() * si) * k;
        }
    }
    Ok(SystemMatrix { t, entries: m })
}

/// Smallest phase `φ_{α,g}(t)` over roots with `k(α) > 0`.
fn phi_min(p: &Pairing, ax: &[f64]) -> f64 {
    let mut m = f64::INFINITY;
    for (r, &k) in p.k.iter().enumerate() {
        if k > 0.0 {
            for g in 0..p.order {
                m = m.min(ax[r] * p.b[r][g].abs());
            }
        }
    }
    m
}

/// Step cap from the fastest local oscillation `|⟨α,κ′⟩⟨α,gy⟩|`.
fn oscillation_cap(p: &Pairing, av: &[f64], fraction: f64) -> f64 {
    let mut w = 0.0f64;
    for (r, &k) in p.k.iter().enumerate() {
        if k > 0.0 {
            for g in 0..p.order {
                w = w.max((av[r] * p.b[r][g]).abs());
            }
        }
    }
    if w == 0.0 {
        f64::INFINITY
    } else {
        fraction * 2.0 * PI / w
    }
}

/// Settings shared by the integration routines.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntegrationOptions {
    pub rtol: f64,
    pub atol: f64,
    pub seed_radius: f64,
    pub period_fraction: f64,
}

impl Default for IntegrationOptions {
    fn default() -> Self {
        Self { rtol: 1e-11, atol: 1e-13, seed_radius: DEFAULT_SEED_RADIUS, period_fraction: STEP_PERIOD_FRACTION }
    }
}

impl IntegrationOptions {
    fn ode(&self) -> OdeOptions {
        OdeOptions { rtol: self.rtol, atol: self.atol, initial_step: 1e-3, min_rel_step: 1e-13 }
    }
}

/// Values of `F` at checkpoints along a curve.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub t0: f64,
    pub seed: FVector,
    pub checkpoints: Vec<Checkpoint>,
    #[serde(skip)]
    pub stats: OdeStats,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Checkpoint {
    pub t: f64,
    pub f: FVector,
}

/// Seed parameter `t₀`: the largest `t` with `|κ(t)|·|y| ≤ seed_radius`.
pub fn seed_parameter(curve: &AdmissibleCurve, y: &[f64], seed_radius: f64) -> f64 {
    curve.parameter_at_radius(seed_radius, norm(y))
}

/// Integrates `F′ = AF` from the series seed at `t₀` through `checkpoints`.
/// Checkpoints at or below `t₀` are evaluated by the series directly.
pub fn integrate_f_trajectory(
    curve: &AdmissibleCurve,
    group: &ReflectionGroup,
    rs: &RootSystem,
    y: &[f64],
    checkpoints: &[f64],
    opts: &IntegrationOptions,
) -> Result<Trajectory> {
    Ok(trajectory_inner(curve, group, rs, y, checkpoints, opts, None::<fn(f64, &[Complex64]) -> f64>)?.0)
}

/// Like [`integrate_f_trajectory`], also accumulating
/// `Q(t) = ∫_{t₀}^t density(s, F(κ(s))) ds` alongside the system, so the
/// integral inherits the step control. Returns `Q` at each checkpoint
/// (zero at and below `t₀`).
pub fn integrate_f_accumulate<D>(
    curve: &AdmissibleCurve,
    group: &ReflectionGroup,
    rs: &RootSystem,
    y: &[f64],
    checkpoints: &[f64],
    opts: &IntegrationOptions,
    density: D,
) -> Result<(Trajectory, Vec<f64>)>
where
    D: Fn(f64, &[Complex64]) -> f64,
{
    trajectory_inner(curve, group, rs, y, checkpoints, opts, Some(density))
}

fn trajectory_inner<D>(
    curve: &AdmissibleCurve,
    group: &ReflectionGroup,
    rs: &RootSystem,
    y: &[f64],
    checkpoints: &[f64],
    opts: &IntegrationOptions,
    density: Option<D>,
) -> Result<(Trajectory, Vec<f64>)>
where
    D: Fn(f64, &[Complex64]) -> f64,
{
    real_curve(curve)?;
    let p = pairing(rs, group, y)?;
    let t0 = seed_parameter(curve, y, opts.seed_radius);
    if !(t0 > 0.0) {
        return Err(DunklError::Regime("seed radius too small for this curve".into()));
    }
    if checkpoints.windows(2).any(|w| w[1] <= w[0]) {
        return Err(DunklError::InvalidParameter("checkpoints must increase".into()));
    }
    let seed = field_f(rs, group, &curve.point(t0), y)?;
    let mut out = Vec::with_capacity(checkpoints.len());
    let mut acc = Vec::with_capacity(checkpoints.len());
    let mut later = Vec::new();
    for &t in checkpoints {
        if t <= t0 {
            out.push(Checkpoint { t, f: field_f(rs, group, &curve.point(t), y)? });
            acc.push(0.0);
        } else {
            later.push(t);
        }
    }
    let mut stats = OdeStats::default();
    if !later.is_empty() {
        let n = p.order;
        let mut y0 = seed.0.clone();
        if density.is_some() {
            y0.push(Complex64::default());
        }
        let mut bad: Option<DunklError> = None;
        let (ys, st) = integrate(
            |t, f, df| match curve_pairs(&p, curve, t) {
                Ok((ax, av)) => {
                    rhs(&p, &ax, &av, &f[..n], &mut df[..n]);
                    if let Some(d) = &density {
                        df[n] = Complex64::new(d(t, &f[..n]), 0.0);
                    }
                }
                Err(e) => {
                    bad.get_or_insert(e);
                    df.iter_mut().for_each(|d| *d = Complex64::new(f64::NAN, 0.0));
                }
            },
            t0,
            &y0,
            &later,
            &opts.ode(),
            |t| {
                let v = curve.velocity(t);
                let av: Vec<f64> = p.roots.iter().map(|a| dot(a, &v)).collect();
                oscillation_cap(&p, &av, opts.period_fraction)
            },
        )
        .map_err(|e| bad.clone().unwrap_or(e))?;
        stats = st;
        for (t, mut f) in later.into_iter().zip(ys) {
            if density.is_some() {
                acc.push(f.pop().expect("accumulator component").re);
            } else {
                acc.push(0.0);
            }
            out.push(Checkpoint { t, f: FVector(f) });
        }
    }
    Ok((Trajectory { t0, seed, checkpoints: out, stats }, acc))
}

fn rhs(p: &Pairing, ax: &[f64], av: &[f64], f: &[Complex64], df: &mut [Complex64]) {
    df.iter_mut().for_each(|d| *d = Complex64::default());
    for (r, &k) in p.k.iter().enumerate() {
        if k == 0.0 {
            continue;
        }
        let c = k * av[r] / ax[r];
        for g in 0..p.order {
            df[g] += Complex64::from_polar(c, -ax[r] * p.b[r][g]) * f[p.sigma[r][g]];
        }
    }
}

/// `F(κ(T))` from the ODE with the given step-control tolerance.
pub fn integrate_f(
    curve: &AdmissibleCurve,
    group: &ReflectionGroup,
    rs: &RootSystem,
    y: &[f64],
    t_final: f64,
    tol: f64,
) -> Result<FVector> {
    let opts = IntegrationOptions { rtol: tol, atol: tol * 1e-2, ..Default::default() };
    let tr = integrate_f_trajectory(curve, group, rs, y, &[t_final], &opts)?;
    Ok(tr.checkpoints.into_iter().next().expect("one checkpoint").f)
}

/// Outcome of the Wintner-condition checks.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WintnerReport {
    /// Closed-form `Ã` exists and obeys `‖Ã(t)‖ ≤ Σ k(α)·4/φ_min(t)` at the sampled `t`.
    pub cond1: bool,
    pub a_tilde_norm_t0: f64,
    pub a_tilde_norm_end: f64,
    pub a_tilde_bound_end: f64,
    /// `∫_{t₀}^{T} ‖A Ã‖_∞ dt`, computed numerically.
    pub cond2_integral: f64,
    /// Rigorous bound on `∫_T^∞ ‖A Ã‖_∞` from the `4/τ` bounds on si and Ci.
    pub cond2_tail_bound: f64,
    /// `T · cond2_tail_bound`.
    pub tail_constant: f64,
    /// `C` fitted from `∫_{T₁}^{T₂} ‖AÃ‖ ≈ C(1/T₁ − 1/T₂)`.
    pub fitted_constant: f64,
    /// `T²·max_g Σ_{α,β} k(α)k(β)⟨α,κ′⟩/(⟨α,κ⟩ φ_{β,σ_α g})` at `T`.
    pub envelope_constant: f64,
    pub cond2: bool,
    pub t0: f64,
    pub t_end: f64,
}

/// Parameters for [`wintner_check`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WintnerOptions {
    pub t_end: f64,
    pub order: usize,
}

impl Default for WintnerOptions {
    fn default() -> Self {
        Self { t_end: 1e3, order: 8 }
    }
}

/// Checks both Wintner conditions along `curve` from `t0`.
pub fn wintner_check(
    curve: &AdmissibleCurve,
    group: &ReflectionGroup,
    rs: &RootSystem,
    y: &[f64],
    t0: f64,
    opts: &WintnerOptions,
) -> Result<WintnerReport> {
    real_curve(curve)?;
    let p = pairing(rs, group, y)?;
    let t_end = opts.t_end.max(4.0 * t0);
    if !(t0 > 0.0) {
        return Err(DunklError::InvalidParameter(format!("t0 must be positive, got {t0}")));
    }
    // condition (1): Ã in closed form, with the entrywise 4/φ bound
    let ksum: f64 = p.k.iter().sum();
    let mut cond1 = true;
    let mut norms = Vec::new();
    let mut t = t0;
    let mut last_bound = 0.0;
    while t <= t_end * (1.0 + 1e-12) {
        let (ax, _) = curve_pairs(&p, curve, t)?;
        let at = a_tilde_from(&p, &ax, t)?;
        let nrm = at.norm_inf();
        let bound = if ksum == 0.0 { 0.0 } else { ksum * 4.0 / phi_min(&p, &ax) };
        cond1 &= nrm.is_finite() && nrm <= bound * (1.0 + 1e-12);
        norms.push(nrm);
        last_bound = bound;
        t = if t * 2.0 > t_end && t < t_end { t_end } else { t * 2.0 };
    }
    // condition (2): ∫‖AÃ‖
    let integrand = |t: f64| -> Result<f64> {
        let (ax, av) = curve_pairs(&p, curve, t)?;
        let a = a_matrix_from(&p, &ax, &av);
        let at = a_tilde_from(&p, &ax, t)?;
        Ok(row_norm(&(a * at.entries)))
    };
    let t1 = t_end / 4.0;
    let i_lo = integrate_panels(&p, curve, t0, t1, opts.order, &integrand)?;
    let i_hi = integrate_panels(&p, curve, t1, t_end, opts.order, &integrand)?;
    let cond2_integral = i_lo + i_hi;
    let fitted_constant = i_hi / (1.0 / t1 - 1.0 / t_end);
    // rigorous tail Σ_α k(α) C₂ / ⟨α,κ(T)⟩
    let delta = curve.delta();
    let (ax_end, av_end) = curve_pairs(&p, curve, t_end)?;
    let mut c2 = 0.0;
    for (r, &k) in p.k.iter().enumerate() {
        if k > 0.0 {
            let bmin = p.b[r].iter().map(|b| b.abs()).fold(f64::INFINITY, f64::min);
            c2 += k * 4.0 / bmin;
        }
    }
    c2 *= SQRT_2 / delta;
    let cond2_tail_bound: f64 = p.k.iter().zip(&ax_end).map(|(k, u)| k * c2 / u).sum();
    let envelope_constant = t_end * t_end * envelope(&p, &ax_end, &av_end);
    let cond2 = cond2_integral.is_finite() && cond2_tail_bound.is_finite();
    Ok(WintnerReport {
        cond1,
        a_tilde_norm_t0: norms[0],
        a_tilde_norm_end: *norms.last().expect("at least one sample"),
        a_tilde_bound_end: last_bound,
        cond2_integral,
        cond2_tail_bound,
        tail_constant: t_end * cond2_tail_bound,
        fitted_constant,
        envelope_constant,
        cond2,
        t0,
        t_end,
    })
}

fn a_matrix_from(p: &Pairing, ax: &[f64], av: &[f64]) -> DMatrix<Complex64> {
    let mut m = DMatrix::<Complex64>::zeros(p.order, p.order);
    for (r, &k) in p.k.iter().enumerate() {
        if k == 0.0 {
            continue;
        }
        for g in 0..p.order {
            m[(g, p.sigma[r][g])] += Complex64::from_polar(k * av[r] / ax[r], -ax[r] * p.b[r][g]);
        }
    }
    m
}

/// `max_g Σ_{α,β} k(α)k(β)⟨α,κ′⟩/(⟨α,κ⟩ φ_{β,σ_α g})`, the row-sum envelope
/// of `|A||Ã|` with `|E₁(iφ)| ≈ 1/φ`.
fn envelope(p: &Pairing, ax: &[f64], av: &[f64]) -> f64 {
    let mut best = 0.0f64;
    for g in 0..p.order {
        let mut row = 0.0;
        for (a, &ka) in p.k.iter().enumerate() {
            if ka == 0.0 {
                continue;
            }
            let h = p.sigma[a][g];
            for (b, &kb) in p.k.iter().enumerate() {
                if kb == 0.0 {
                    continue;
                }
                row += ka * kb * av[a] / ax[a] / (ax[b] * p.b[b][h].abs());
            }
        }
        best = best.max(row);
    }
    best
}

/// Composite Gauss–Legendre with panels no longer than half the local
/// oscillation period (and geometric growth so long ranges stay cheap).
fn integrate_panels(
    p: &Pairing,
    curve: &AdmissibleCurve,
    a: f64,
    b: f64,
    order: usize,
    f: &dyn Fn(f64) -> Result<f64>,
) -> Result<f64> {
    let rule = gauss_legendre(order);
    let mut acc = 0.0;
    let mut lo = a;
    while lo < b {
        let v = curve.velocity(lo);
        let av: Vec<f64> = p.roots.iter().map(|r| dot(r, &v)).collect();
        let half_period = oscillation_cap(p, &av, 0.5);
        // phase differences between products also oscillate at up to twice
        // the single-root rate
        let w = (0.5 * half_period).min(0.25 * lo.max(1e-3)).min(b - lo);
        let hi = if lo + w >= b * (1.0 - 1e-15) { b } else { lo + w };
        let mut panel = 0.0;
        for (x, wt) in rule.nodes.iter().zip(&rule.weights) {
            panel += wt * f(lo + 0.5 * (hi - lo) * (1.0 + x))?;
        }
        acc += 0.5 * (hi - lo) * panel;
        lo = hi;
    }
    Ok(acc)
}

/// `R(φ) = ∫_φ^∞ e^{−iw} E⁺(w) dw / w` with `E⁺(w) = ∫_w^∞ e^{iv}/v dv`,
/// evaluated after `w = φ/τ`.
fn resonant_tail(phi: f64) -> Result<Complex64> {
    adaptive(0.0, 1.0, 1e-14, 1e-12, |tau: f64| {
        exp_e1(Complex64::new(0.0, -phi / tau)).unwrap_or_default() / tau
    })
}

/// Extraction settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExtractOptions {
    pub t_final: f64,
    /// Log-spaced checkpoints recorded between `t₀` and `T`.
    pub n_checkpoints: usize,
    /// Apply the second (resonant) Picard correction.
    pub refine: bool,
    pub integration: IntegrationOptions,
    pub wintner_t_end: f64,
}

impl Default for ExtractOptions {
    fn default() -> Self {
        Self {
            t_final: 1e4,
            n_checkpoints: 12,
            refine: true,
            integration: IntegrationOptions::default(),
            wintner_t_end: 1e3,
        }
    }
}

/// Result of [`extract_v`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AsymptoticsReport {
    pub group: GroupDescriptor,
    pub k: Vec<f64>,
    pub y: VectorN,
    pub curve: AdmissibleCurve,
    pub t0: f64,
    pub final_t: f64,
    pub v: FVector,
    /// `(I − Ã(T))⁻¹ F(T)` before the resonant correction.
    pub first_order: FVector,
    pub raw: FVector,
    pub checkpoints: Vec<Checkpoint>,
    pub wintner: WintnerReport,
    pub a_tilde_norm: f64,
    pub acceleration_delta: f64,
    pub steps: usize,
}

/// Estimates `v = lim F(κ(t), y)` along `curve`.
pub fn extract_v(
    curve: &AdmissibleCurve,
    group: &ReflectionGroup,
    rs: &RootSystem,
    y: &[f64],
    opts: &ExtractOptions,
) -> Result<AsymptoticsReport> {
    real_curve(curve)?;
    let p = pairing(rs, group, y)?;
    let t0 = seed_parameter(curve, y, opts.integration.seed_radius);
    if !(opts.t_final > t0) {
        return Err(DunklError::InvalidParameter(format!(
            "final parameter {} must exceed the seed parameter {t0}",
            opts.t_final
        )));
    }
    let wintner = wintner_check(
        curve,
        group,
        rs,
        y,
        t0,
        &WintnerOptions { t_end: opts.wintner_t_end.min(opts.t_final).max(4.0 * t0), ..Default::default() },
    )?;
    if !(wintner.cond1 && wintner.cond2) {
        return Err(DunklError::ConditionFailed(format!(
            "Wintner conditions not certified (cond1 = {}, cond2 = {})",
            wintner.cond1, wintner.cond2
        )));
    }
    let n = opts.n_checkpoints.max(1);
    let ratio = (opts.t_final / t0).powf(1.0 / n as f64);
    let mut cps: Vec<f64> = (1..n).map(|j| t0 * ratio.powi(j as i32)).collect();
    cps.push(opts.t_final);
    let tr = integrate_f_trajectory(curve, group, rs, y, &cps, &opts.integration)?;
    let raw = tr.checkpoints.last().expect("final checkpoint").f.clone();
    let (ax, _) = curve_pairs(&p, curve, opts.t_final)?;
    let at = a_tilde_from(&p, &ax, opts.t_final)?;
    let id = DMatrix::<Complex64>::identity(p.order, p.order);
    let rhs_vec = DVector::from_column_slice(&raw.0);
    let first = solve(&(&id - &at.entries), &rhs_vec)?;
    let (v, delta) = if opts.refine && !rs.is_trivial() {
        let mut m = &id - &at.entries;
        for (r, &k) in p.k.iter().enumerate() {
            if k == 0.0 {
                continue;
            }
            for g in 0..p.order {
                let b = p.b[r][g];
                let rt = resonant_tail(ax[r] * b.abs())?;
                let rt = if b < 0.0 { rt.conj() } else { rt };
                m[(g, g)] += rt * (k * k);
            }
        }
        let v = solve(&m, &rhs_vec)?;
        let d = v.iter().zip(first.iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        (v, d)
    } else {
        let d = first.iter().zip(&raw.0).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        (first.clone(), d)
    };
    Ok(AsymptoticsReport {
        group: rs.descriptor(),
        k: rs.orbit_multiplicities().to_vec(),
        y: y.to_vec(),
        curve: curve.clone(),
        t0,
        final_t: opts.t_final,
        v: FVector(v.iter().copied().collect()),
        first_order: FVector(first.iter().copied().collect()),
        raw,
        checkpoints: tr.checkpoints,
        wintner,
        a_tilde_norm: at.norm_inf(),
        acceleration_delta: delta,
        steps: tr.stats.accepted,
    })
}

fn solve(m: &DMatrix<Complex64>, b: &DVector<Complex64>) -> Result<DVector<Complex64>> {
    let lu = m.clone().lu();
    lu.solve(b)
        .filter(|x| x.iter().all(|c| c.re.is_finite() && c.im.is_finite()))
        .ok_or_else(|| DunklError::Singular("I − Ã(T) is singular; increase T".into()))
}

/// Discrepancies across curves and `y` values.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InvarianceReport {
    /// `max ‖v(curve_i, y_j) − v(curve_k, y_l)‖_∞` over all runs.
    pub max_pair_discrepancy: f64,
    /// `max_g |v_g − v_{g⁻¹}|` over all runs.
    pub max_inverse_asymmetry: f64,
    /// `max_g ||v_g| − |v_{g⁻¹}||` over all runs.
    pub max_modulus_asymmetry: f64,
    pub min_modulus: f64,
    pub runs: Vec<AsymptoticsReport>,
}

/// Runs [`extract_v`] for every `(curve, y)` combination and compares.
pub fn invariance_suite(
    group: &ReflectionGroup,
    rs: &RootSystem,
    y_list: &[VectorN],
    curve_list: &[AdmissibleCurve],
    opts: &ExtractOptions,
) -> Result<InvarianceReport> {
    use rayon::prelude::*;
    let jobs: Vec<(&AdmissibleCurve, &VectorN)> =
        curve_list.iter().flat_map(|c| y_list.iter().map(move |y| (c, y))).collect();
    let runs = jobs
        .par_iter()
        .map(|(c, y)| extract_v(c, group, rs, y, opts))
        .collect::<Result<Vec<_>>>()?;
    let mut pair = 0.0f64;
    for i in 0..runs.len() {
        for j in i + 1..runs.len() {
            pair = pair.max(runs[i].v.max_abs_diff(&runs[j].v));
        }
    }
    let mut asym = 0.0f64;
    let mut masym = 0.0f64;
    let mut minmod = f64::INFINITY;
    for r in &runs {
        for g in 0..group.order() {
            let (a, b) = (r.v.0[g], r.v.0[group.inverse(g)]);
            asym = asym.max((a - b).norm());
            masym = masym.max((a.norm() - b.norm()).abs());
            minmod = minmod.min(a.norm());
        }
    }
    Ok(InvarianceReport {
        max_pair_discrepancy: pair,
        max_inverse_asymmetry: asym,
        max_modulus_asymmetry: masym,
        min_modulus: minmod,
        runs,
    })
}

/// `Ψ̂_g(t) = t^γ e^{−z⟨x,y⟩} E_k(zx, gy)` along `z = t e^{iθ}`, at the
/// checkpoints, by the series below the seed radius and the ODE
/// `Ψ̂′_g = e^{iθ}(⟨x,gy⟩ − ⟨x,y⟩)Ψ̂_g + Σ_α k(α)/t · Ψ̂_{σ_α g}` above.
pub fn normalized_kernel_ray(
    group: &ReflectionGroup,
    rs: &RootSystem,
    x: &[f64],
    y: &[f64],
    theta: f64,
    checkpoints: &[f64],
    opts: &IntegrationOptions,
) -> Result<(f64, Vec<Vec<Complex64>>)> {
    let p = pairing(rs, group, y)?;
    if x.len() != rs.dim() || !chamber_test(rs, x, None) {
        return Err(DunklError::InvalidParameter(format!("x = {x:?} must lie in the open chamber")));
    }
    if !(0.0..=PI / 2.0 + 1e-15).contains(&theta) {
        return Err(DunklError::InvalidParameter(format!("θ must lie in [0, π/2], got {theta}")));
    }
    let gamma = gamma_index(rs);
    let rot = Complex64::from_polar(1.0, theta);
    let xy = dot(x, y);
    let mu: Vec<Complex64> = (0..p.order).map(|g| rot * (xy - dot(x, &group.apply(g, y)))).collect();
    let t0 = opts.seed_radius / (norm(x) * norm(y));
    let series_at = |t: f64| -> Result<Vec<Complex64>> {
        let z = rot * t;
        let zx: Vec<Complex64> = x.iter().map(|&v| z * v).collect();
        let scale = (-z * xy).exp() * t.powf(gamma);
        (0..p.order)
            .map(|g| {
                let gy: Vec<Complex64> = group.apply(g, y).iter().map(|&v| Complex64::new(v, 0.0)).collect();
                Ok(kernel_series(rs, &zx, &gy, SEED_TOL, MAX_SERIES_DEGREE)?.value * scale)
            })
            .collect()
    };
    let mut out = vec![Vec::new(); checkpoints.len()];
    let mut later = Vec::new();
    for (i, &t) in checkpoints.iter().enumerate() {
        if t <= t0 {
            out[i] = series_at(t)?;
        } else {
            later.push((i, t));
        }
    }
    if !later.is_empty() {
        let seed = series_at(t0)?;
        let ts: Vec<f64> = later.iter().map(|l| l.1).collect();
        if ts.windows(2).any(|w| w[1] <= w[0]) {
            return Err(DunklError::InvalidParameter("checkpoints must increase".into()));
        }
        let wmax = mu.iter().map(|m| m.norm()).fold(0.0, f64::max);
        let cap = if wmax == 0.0 { f64::INFINITY } else { opts.period_fraction * 2.0 * PI / wmax };
        let (ys, _) = integrate(
            |t, f, df| {
                for g in 0..p.order {
                    df[g] = -mu[g] * f[g];
                }
                for (r, &k) in p.k.iter().enumerate() {
                    if k == 0.0 {
                        continue;
                    }
                    for g in 0..p.order {
                        df[g] += f[p.sigma[r][g]] * (k / t);
                    }
                }
            },
            t0,
            &seed,
            &ts,
            &opts.ode(),
            |_| cap,
        )?;
        for ((i, _), v) in later.into_iter().zip(ys) {
            out[i] = v;
        }
    }
    Ok((t0, out))
}

/// Estimate of `lim z^γ e^{−z⟨x,y⟩} E_k(zx, y)` along `z = t e^{iθ}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComplexRayLimit {
    pub theta: f64,
    pub t0: f64,
    pub t_final: f64,
    pub limit: Complex64,
    /// Unaccelerated `z^γ e^{−z⟨x,y⟩} E_k(zx, y)` at `t = T`.
    pub raw: Complex64,
    pub acceleration_delta: f64,
}

/// Half-plane limit along `z = t e^{iθ}`, accelerated with the first-order
/// tail `Σ_α k(α)[e^{λT}E₁(λT)(Ψ̂_{σ_α}(T) − k(α)Ψ̂_e(T)/(λT)) + k(α)Ψ̂_e(T)/(λT)]`,
/// `λ = e^{iθ}⟨α,x⟩⟨α,y⟩`.
pub fn complex_ray_limit(
    group: &ReflectionGroup,
    rs: &RootSystem,
    x: &[f64],
    y: &[f64],
    theta: f64,
    t_final: f64,
    opts: &IntegrationOptions,
) -> Result<ComplexRayLimit> {
    let (t0, vals) = normalized_kernel_ray(group, rs, x, y, theta, &[t_final], opts)?;
    let psi = &vals[0];
    let gamma = gamma_index(rs);
    let rot = Complex64::from_polar(1.0, theta);
    let phase = Complex64::from_polar(1.0, theta * gamma);
    let mut acc = psi[0];
    for (r, a) in rs.positive_roots().iter().enumerate() {
        let k = rs.k(r);
        if k == 0.0 {
            continue;
        }
        let lam = rot * dot(a, x) * dot(a, y);
        let lt = lam * t_final;
        let eps = exp_e1(lt)?;
        let s = psi[group.reflection_element(r)];
        acc += (eps * (s - psi[0] * k / lt) + psi[0] * k / lt) * k;
    }
    Ok(ComplexRayLimit {
        theta,
        t0,
        t_final,
        limit: phase * acc,
        raw: phase * psi[0],
        acceleration_delta: (acc - psi[0]).norm(),
    })
}

/// Outcome of [`bound_probe`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundProbe {
    pub delta: f64,
    /// Empirical `sup w_k(x)|E_k(ix, gy)|²` over the grid.
    pub sup: f64,
    pub argmax: VectorN,
    pub directions: usize,
    pub points: usize,
}

/// Directions of a fixed grid on the unit sphere that lie in `C_δ`.
pub fn cone_directions(rs: &RootSystem, delta: f64, resolution: usize) -> Vec<VectorN> {
    let n = rs.dim();
    let mut out = Vec::new();
    if n == 1 {
        if chamber_test(rs, &[1.0], Some(delta)) {
            out.push(vec![1.0]);
        }
        return out;
    }
    if n == 2 {
        for j in 0..resolution {
            let a = 2.0 * PI * (j as f64 + 0.5) / resolution as f64;
            let u = vec![a.cos(), a.sin()];
            if cone_parameter(rs, &u) > delta {
                out.push(u);
            }
        }
        return out;
    }
    // lattice in [-1,1]^N, normalized
    let side = resolution.max(2);
    let total = side.pow(n as u32);
    for idx in 0..total {
        let mut rem = idx;
        let mut u = vec![0.0; n];
        for c in u.iter_mut() {
            *c = -1.0 + 2.0 * ((rem % side) as f64 + 0.5) / side as f64;
            rem /= side;
        }
        let l = norm(&u);
        let u: VectorN = u.iter().map(|c| c / l).collect();
        if cone_parameter(rs, &u) > delta {
            out.push(u);
        }
    }
    out
}

/// Empirical sup of `|F_g(x, y)|²/w_k(y) = w_k(x)|E_k(ix, gy)|²` over
/// `x = r·u`, `u ∈ C_δ` directions, `r` in `radius_grid`.
pub fn bound_probe(
    group: &ReflectionGroup,
    rs: &RootSystem,
    y: &[f64],
    delta: f64,
    radius_grid: &[f64],
    resolution: usize,
    opts: &IntegrationOptions,
) -> Result<BoundProbe> {
    use rayon::prelude::*;
    if !(delta > 0.0) {
        return Err(DunklError::InvalidParameter(format!("δ must be positive, got {delta}")));
    }
    if radius_grid.windows(2).any(|w| w[1] <= w[0]) || radius_grid.first().is_some_and(|&r| r <= 0.0) {
        return Err(DunklError::InvalidParameter("radius grid must be positive and increasing".into()));
    }
    let dirs = cone_directions(rs, delta, resolution);
    let wy = weight(rs, y);
    let per_dir = dirs
        .par_iter()
        .map(|u| -> Result<(f64, VectorN)> {
            let curve = AdmissibleCurve::ray(rs, u)?;
            let tr = integrate_f_trajectory(&curve, group, rs, y, radius_grid, opts)?;
            let mut best = (0.0f64, Vec::new());
            for cp in &tr.checkpoints {
                let m = cp.f.0.iter().map(|c| c.norm_sqr()).fold(0.0, f64::max) / wy;
                if m > best.0 {
                    best = (m, curve.point(cp.t));
                }
            }
            Ok(best)
        })
        .collect::<Result<Vec<_>>>()?;
    let (sup, argmax) = per_dir.into_iter().fold((0.0, Vec::new()), |acc, v| if v.0 > acc.0 { v } else { acc });
    Ok(BoundProbe { delta, sup, argmax, directions: dirs.len(), points: dirs.len() * radius_grid.len() })
}
