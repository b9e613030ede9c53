//! Dunkl operators, the intertwining operator degree by degree, and the
//! power series of the Dunkl kernel.

use std::collections::{HashMap, VecDeque};
use std::sync::{Arc, Mutex, OnceLock, RwLock};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{DunklError, Result};
use crate::groups::{RootSystem, dot};
use crate::poly::{monomial_basis, Exponent, MultiPoly};

/// Highest degree the intertwiner is built to.
pub const MAX_SERIES_DEGREE: u32 = 40;
/// Residual bound for the per-degree linear solves.
pub const SOLVE_RESIDUAL: f64 = 1e-10;

const DIVISION_TOL: f64 = 1e-9;

/// `T_ξ(k) p = ∂_ξ p + Σ_α k(α) ⟨α,ξ⟩ (p − p∘σ_α)/⟨α,·⟩`.
pub fn dunkl_apply(p: &MultiPoly, xi: &[f64], rs: &RootSystem) -> Result<MultiPoly> {
    let n = rs.dim();
    if p.nvars() != n {
        return Err(DunklError::DimensionMismatch { expected: n, got: p.nvars() });
    }
    if xi.len() != n {
        return Err(DunklError::DimensionMismatch { expected: n, got: xi.len() });
    }
    let mut out = p.directional(xi);
    for (r, a) in rs.positive_roots().iter().enumerate() {
        let k = rs.k(r);
        let ax = dot(a, xi);
        if k == 0.0 || ax == 0.0 || p.is_zero() {
            continue;
        }
        let sigma: Vec<f64> = rs.reflection_matrix(r).transpose().iter().copied().collect();
        let num = p - &p.linear_substitute(&sigma);
        if num.max_coeff() <= 1e-14 * p.max_coeff() {
            continue;
        }
        let q = num.divide_linear(a, DIVISION_TOL)?;
        out = &out + &q.scale(Complex64::new(k * ax, 0.0));
    }
    Ok(out)
}

/// Largest coefficient of `T_ξ T_η p − T_η T_ξ p`.
pub fn commutativity_residual(rs: &RootSystem, xi: &[f64], eta: &[f64], p: &MultiPoly) -> Result<f64> {
    let a = dunkl_apply(&dunkl_apply(p, eta, rs)?, xi, rs)?;
    let b = dunkl_apply(&dunkl_apply(p, xi, rs)?, eta, rs)?;
    Ok((&a - &b).max_coeff())
}

/// `V_k` restricted to homogeneous polynomials of one degree, in the
/// graded-lex monomial basis (column `j` is `V_k` of basis monomial `j`).
///
/// Entries are real because `k` is real.
#[derive(Debug, Clone, PartialEq)]
pub struct IntertwiningMatrix {
    pub degree: u32,
    pub basis: Vec<Exponent>,
    pub matrix: DMatrix<f64>,
}

impl IntertwiningMatrix {
    /// Applies `V_k` to a homogeneous polynomial of this degree.
    pub fn apply(&self, p: &MultiPoly) -> MultiPoly {
        let coeffs: Vec<Complex64> = self.basis.iter().map(|e| p.coeff(e)).collect();
        let mut out = MultiPoly::zero(p.nvars());
        for (i, e) in self.basis.iter().enumerate() {
            let v: Complex64 = (0..self.basis.len()).map(|j| coeffs[j] * self.matrix[(i, j)]).sum();
            out.add_term(e.clone(), v);
        }
        out
    }
}

struct Level {
    basis: Vec<Exponent>,
    index: HashMap<Exponent, usize>,
    /// Rows: `(i, m')` with `m'` a degree `n-1` monomial, blocks by coordinate.
    stacked: DMatrix<f64>,
    pinv: DMatrix<f64>,
    cond: f64,
    /// Max-row-sum norm of `stacked`.
    norm: f64,
    v: OnceLock<DMatrix<f64>>,
}

/// Per-root-system cache of the stacked Dunkl systems and `V_n`.
pub struct Intertwiner {
    rs: RootSystem,
    levels: RwLock<Vec<Arc<Level>>>,
}

/// Root systems kept in the shared cache; the oldest is dropped beyond this.
const REGISTRY_CAP: usize = 8;

#[derive(Default)]
struct Registry {
    map: HashMap<String, Arc<Intertwiner>>,
    order: VecDeque<String>,
}

fn registry() -> &'static Mutex<Registry> {
    static REG: OnceLock<Mutex<Registry>> = OnceLock::new();
    REG.get_or_init(|| Mutex::new(Registry::default()))
}

impl Intertwiner {
    pub fn new(rs: &RootSystem) -> Self {
        let n = rs.dim();
        let basis = monomial_basis(n, 0);
        let index = basis.iter().cloned().enumerate().map(|(i, e)| (e, i)).collect();
        let level0 = Level {
            basis,
            index,
            stacked: DMatrix::zeros(0, 1),
            pinv: DMatrix::zeros(1, 0),
            cond: 1.0,
            norm: 0.0,
            v: OnceLock::from(DMatrix::from_element(1, 1, 1.0)),
        };
        Self { rs: rs.clone(), levels: RwLock::new(vec![Arc::new(level0)]) }
    }

    /// Shared instance for `rs`, keyed by family and multiplicities.
    pub fn shared(rs: &RootSystem) -> Arc<Intertwiner> {
        let key = format!("{}:{:?}", rs.family(), rs.orbit_multiplicities().iter().map(|k| k.to_bits()).collect::<Vec<_>>());
        let mut reg = registry().lock().expect("intertwiner registry poisoned");
        if let Some(it) = reg.map.get(&key) {
            return it.clone();
        }
        while reg.order.len() >= REGISTRY_CAP {
            if let Some(old) = reg.order.pop_front() {
                reg.map.remove(&old);
            }
        }
        let it = Arc::new(Intertwiner::new(rs));
        reg.map.insert(key.clone(), it.clone());
        reg.order.push_back(key);
        it
    }

    pub fn root_system(&self) -> &RootSystem {
        &self.rs
    }

    fn level(&self, n: u32) -> Result<Arc<Level>> {
        if n > MAX_SERIES_DEGREE {
            return Err(DunklError::Regime(format!(
                "degree {n} exceeds the intertwiner cap {MAX_SERIES_DEGREE}"
            )));
        }
        if let Some(l) = self.levels.read().expect("cache poisoned").get(n as usize) {
            return Ok(l.clone());
        }
        let mut levels = self.levels.write().expect("cache poisoned");
        while levels.len() <= n as usize {
            let deg = levels.len() as u32;
            let prev = levels[deg as usize - 1].clone();
            levels.push(Arc::new(self.build_level(deg, &prev)?));
        }
        Ok(levels[n as usize].clone())
    }

    fn build_level(&self, deg: u32, prev: &Level) -> Result<Level> {
        let nv = self.rs.dim();
        let basis = monomial_basis(nv, deg);
        let index: HashMap<Exponent, usize> = basis.iter().cloned().enumerate().map(|(i, e)| (e, i)).collect();
        let dp = prev.basis.len();
        let mut stacked = DMatrix::<f64>::zeros(nv * dp, basis.len());
        for i in 0..nv {
            let mut xi = vec![0.0; nv];
            xi[i] = 1.0;
            for (col, e) in basis.iter().enumerate() {
                let t = dunkl_apply(&MultiPoly::monomial(e.clone(), Complex64::new(1.0, 0.0)), &xi, &self.rs)?;
                for (f, c) in t.terms() {
                    let row = *prev.index.get(f).ok_or_else(|| {
                        DunklError::Internal("Dunkl operator left the homogeneous space".into())
                    })?;
                    stacked[(i * dp + row, col)] = c.re;
                }
            }
        }
        // Solve in the Bombieri-scaled basis sqrt(n!/β!)·x^β, whose norm is
        // invariant under orthogonal maps; the raw monomial basis degrades
        // geometrically with degree for rotated root systems.
        let scale_in: Vec<f64> = basis.iter().map(|e| bombieri_scale(e)).collect();
        let scale_out: Vec<f64> = prev.basis.iter().map(|e| bombieri_scale(e)).collect();
        let mut scaled = stacked.clone();
        for ((r, c), v) in scaled.iter_mut().enumerate().map(|(idx, v)| ((idx % (nv * dp), idx / (nv * dp)), v)) {
            *v *= scale_out[r % dp] / scale_in[c];
        }
        // SVD factors are not reliable enough to invert with (they can miss
        // by O(1e-1) on well-conditioned blocks); Householder QR is. The
        // square factor R carries the singular values at a fraction of the cost.
        let ncols = basis.len();
        let qr = scaled.clone().qr();
        let r = qr.r();
        let sv = r.clone().singular_values();
        let smax = sv.max();
        let smin = sv.min();
        if !(smin > 1e-12 * smax) {
            return Err(DunklError::Singular(format!(
                "stacked Dunkl system at degree {deg} is singular (σ_min/σ_max = {:.2e})",
                smin / smax
            )));
        }
        let qt = qr.q().transpose();
        let mut pinv = r
            .solve_upper_triangular(&qt)
            .ok_or_else(|| DunklError::Singular(format!("triangular factor at degree {deg} is singular")))?;
        let id_err = (&pinv * &scaled - DMatrix::<f64>::identity(ncols, ncols)).abs().max();
        if id_err > 1e-9 {
            return Err(DunklError::Internal(format!(
                "left inverse at degree {deg} misses the identity by {id_err:.2e}"
            )));
        }
        for ((r, c), v) in pinv.iter_mut().enumerate().map(|(idx, v)| ((idx % basis.len(), idx / basis.len()), v)) {
            *v *= scale_out[c % dp] / scale_in[r];
        }
        let norm = stacked.row_iter().map(|r| r.abs().sum()).fold(0.0, f64::max);
        Ok(Level { basis, index, stacked, pinv, cond: smax / smin, norm, v: OnceLock::new() })
    }

    /// Condition number of the stacked system at degree `n`.
    pub fn condition(&self, n: u32) -> Result<f64> {
        Ok(self.level(n)?.cond)
    }

    /// `V_n` built recursively from `T_i V_n = V_{n−1} ∂_i`.
    pub fn matrix(&self, n: u32) -> Result<IntertwiningMatrix> {
        let level = self.level(n)?;
        let v = self.v_matrix(n, &level)?;
        Ok(IntertwiningMatrix { degree: n, basis: level.basis.clone(), matrix: v })
    }

    fn v_matrix(&self, n: u32, level: &Level) -> Result<DMatrix<f64>> {
        if let Some(v) = level.v.get() {
            return Ok(v.clone());
        }
        let prev = self.level(n - 1)?;
        let vprev = self.v_matrix(n - 1, &prev)?;
        let nv = self.rs.dim();
        let dp = prev.basis.len();
        let mut rhs = DMatrix::<f64>::zeros(nv * dp, level.basis.len());
        for (col, e) in level.basis.iter().enumerate() {
            for i in 0..nv {
                if e[i] == 0 {
                    continue;
                }
                let mut f = e.clone();
                f[i] -= 1;
                let j = prev.index[&f];
                for row in 0..dp {
                    rhs[(i * dp + row, col)] = e[i] as f64 * vprev[(row, j)];
                }
            }
        }
        let v = &level.pinv * &rhs;
        let res = (&level.stacked * &v - &rhs).abs().max();
        let scale = level.norm * v.abs().max() + rhs.abs().max();
        if res > SOLVE_RESIDUAL * scale {
            return Err(DunklError::Internal(format!(
                "intertwining solve at degree {n} has residual {res:.2e}"
            )));
        }
        Ok(level.v.get_or_init(|| v).clone())
    }

    /// Coefficients of `V_k(⟨·,y⟩^n / n!)` for `n = 0..=max_degree`,
    /// obtained from `T_i p_n = y_i p_{n−1}`.
    fn homogeneous_parts(&self, y: &[Complex64], max_degree: u32, mut stop: impl FnMut(u32, &[Complex64], &Level) -> bool) -> Result<()> {
        let nv = self.rs.dim();
        let mut prev: Vec<Complex64> = vec![Complex64::new(1.0, 0.0)];
        let l0 = self.level(0)?;
        if stop(0, &prev, &l0) {
            return Ok(());
        }
        let mut global = 0.0f64;
        for n in 1..=max_degree {
            let level = self.level(n)?;
            let dp = prev.len();
            let rhs_re = DVector::from_iterator(nv * dp, (0..nv).flat_map(|i| prev.iter().map(move |c| (y[i] * c).re)).collect::<Vec<_>>());
            let rhs_im = DVector::from_iterator(nv * dp, (0..nv).flat_map(|i| prev.iter().map(move |c| (y[i] * c).im)).collect::<Vec<_>>());
            let re = &level.pinv * &rhs_re;
            let im = &level.pinv * &rhs_im;
            let res = (&level.stacked * &re - &rhs_re).abs().max().max((&level.stacked * &im - &rhs_im).abs().max());
            // Later degrees are tiny, so the residual is measured against the
            // largest right-hand side seen: that is what it perturbs in the sum.
            let scale = level.norm * re.abs().max().max(im.abs().max()) + rhs_re.abs().max().max(rhs_im.abs().max());
            global = global.max(scale);
            if res > SOLVE_RESIDUAL * global {
                return Err(DunklError::Internal(format!(
                    "kernel recursion at degree {n} has residual {res:.2e} (scale {scale:.2e})"
                )));
            }
            let cur: Vec<Complex64> = re.iter().zip(im.iter()).map(|(a, b)| Complex64::new(*a, *b)).collect();
            if stop(n, &cur, &level) {
                return Ok(());
            }
            prev = cur;
        }
        Ok(())
    }
}

/// `sqrt(β!/|β|!)`, the Bombieri weight of `x^β`.
fn bombieri_scale(e: &[u32]) -> f64 {
    use crate::specfun::ln_gamma;
    let n: u32 = e.iter().sum();
    let lf = |m: u32| ln_gamma(m as f64 + 1.0);
    (0.5 * (e.iter().map(|&b| lf(b)).sum::<f64>() - lf(n))).exp()
}

fn cnorm(v: &[Complex64]) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

fn eval_basis(basis: &[Exponent], coeffs: &[Complex64], x: &[Complex64]) -> Complex64 {
    basis
        .iter()
        .zip(coeffs)
        .map(|(e, c)| e.iter().zip(x).fold(*c, |acc, (&k, xi)| acc * xi.powu(k)))
        .sum()
}

/// Truncated kernel series value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeriesValue {
    pub value: Complex64,
    /// Bound on the omitted terms `Σ_{n>M} (|x||y|)^n/n!`.
    pub tail: f64,
    /// Highest degree summed.
    pub degree: u32,
}

/// Sum of the tail `Σ_{j>n} r^j/j!` bounded geometrically from its first term.
fn tail_after(r: f64, n: u32, term_n: f64) -> f64 {
    let next = term_n * r / (n as f64 + 1.0);
    let ratio = r / (n as f64 + 2.0);
    if ratio < 1.0 {
        next / (1.0 - ratio)
    } else {
        f64::INFINITY
    }
}

/// `E_k(x, y) ≈ Σ_{n≤M} V_k(⟨·,y⟩^n/n!)(x)`, truncated once the measure
/// bound `(|x||y|)^n/n!` on the tail drops below `tol`.
pub fn kernel_series(rs: &RootSystem, x: &[Complex64], y: &[Complex64], tol: f64, max_degree: u32) -> Result<SeriesValue> {
    let nv = rs.dim();
    for v in [x.len(), y.len()] {
        if v != nv {
            return Err(DunklError::DimensionMismatch { expected: nv, got: v });
        }
    }
    if !(tol > 0.0) {
        return Err(DunklError::InvalidParameter(format!("tolerance must be positive, got {tol}")));
    }
    let r = cnorm(x) * cnorm(y);
    if r == 0.0 {
        return Ok(SeriesValue { value: Complex64::new(1.0, 0.0), tail: 0.0, degree: 0 });
    }
    let it = Intertwiner::shared(rs);
    let mut sum = Complex64::default();
    let mut term_bound = 1.0;
    let mut out = None;
    it.homogeneous_parts(y, max_degree.min(MAX_SERIES_DEGREE), |n, coeffs, level| {
        sum += eval_basis(&level.basis, coeffs, x);
        if n > 0 {
            term_bound *= r / n as f64;
        }
        let tail = tail_after(r, n, term_bound);
        if tail < tol {
            out = Some(SeriesValue { value: sum, tail, degree: n });
            true
        } else {
            false
        }
    })?;
    out.ok_or_else(|| {
        DunklError::Regime(format!(
            "kernel series at |x||y| = {r:.3} does not reach tolerance {tol:.1e} by degree {}",
            max_degree.min(MAX_SERIES_DEGREE)
        ))
    })
}

/// The truncated series as a polynomial in `x` (degrees `0..=degree`).
pub fn kernel_polynomial(rs: &RootSystem, y: &[Complex64], degree: u32) -> Result<MultiPoly> {
    let it = Intertwiner::shared(rs);
    let mut p = MultiPoly::zero(rs.dim());
    it.homogeneous_parts(y, degree, |n, coeffs, level| {
        for (e, c) in level.basis.iter().zip(coeffs) {
            p.add_term(e.clone(), *c);
        }
        n >= degree
    })?;
    Ok(p)
}

/// `V_n` of the root system, from the shared cache.
pub fn intertwining_matrix(rs: &RootSystem, n: u32) -> Result<IntertwiningMatrix> {
    Intertwiner::shared(rs).matrix(n)
}

/// `|T_ξ P(x) − ⟨ξ,y⟩ P(x)|` where `P` is the series `kernel_series` would
/// sum at `(x, y)`, carried one degree further.
pub fn eigen_residual(rs: &RootSystem, x: &[f64], y: &[Complex64], xi: &[f64], tol: f64, max_degree: u32) -> Result<f64> {
    let xc: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let sv = kernel_series(rs, &xc, y, tol, max_degree)?;
    // one degree past the truncation, so T_ξ drops only a term below tol
    let p = kernel_polynomial(rs, y, (sv.degree + 1).min(max_degree))?;
    let tp = dunkl_apply(&p, xi, rs)?;
    let xy: Complex64 = xi.iter().zip(y).map(|(a, b)| b * a).sum();
    Ok((tp.eval(&xc) - xy * p.eval(&xc)).norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::{make_root_system, Family};

    fn c(v: f64) -> Complex64 {
        Complex64::new(v, 0.0)
    }

    #[test]
    fn rank_one_operator_examples() {
        let rs = make_root_system(Family::Z2N(1), &[1.0]).unwrap();
        let x2 = MultiPoly::monomial(vec![2], c(1.0));
        assert_eq!(dunkl_apply(&x2, &[1.0], &rs).unwrap(), MultiPoly::monomial(vec![1], c(2.0)));
        let x = MultiPoly::monomial(vec![1], c(1.0));
        let t = dunkl_apply(&x, &[1.0], &rs).unwrap();
        assert!((t.coeff(&[0]) - c(3.0)).norm() < 1e-14);
    }

    #[test]
    fn intertwiner_low_degrees() {
        let rs = make_root_system(Family::Z2N(1), &[0.75]).unwrap();
        let v0 = intertwining_matrix(&rs, 0).unwrap();
        assert_eq!(v0.matrix[(0, 0)], 1.0);
        let v1 = intertwining_matrix(&rs, 1).unwrap();
        assert!((v1.matrix[(0, 0)] - 1.0 / 2.5).abs() < 1e-14);
    }

    #[test]
    fn trivial_multiplicity_gives_exponential() {
        let rs = make_root_system(Family::Dihedral(3), &[0.0]).unwrap();
        let x = [c(0.3), c(-0.8)];
        let y = [c(1.1), c(0.4)];
        let e = kernel_series(&rs, &x, &y, 1e-15, 40).unwrap();
        let exact = (x[0] * y[0] + x[1] * y[1]).exp();
        assert!((e.value - exact).norm() < 1e-14);
    }

    #[test]
    fn series_rejects_large_arguments() {
        let rs = make_root_system(Family::Z2N(1), &[1.0]).unwrap();
        assert!(matches!(
            kernel_series(&rs, &[c(10.0)], &[c(10.0)], 1e-12, 40),
            Err(DunklError::Regime(_))
        ));
    }
}

