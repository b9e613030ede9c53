//! Root systems, reflection groups, Weyl chambers, the weight `w_k` and the
//! Mehta-type Gaussian constant `c_k`.
//!
//! Two families are supported: the product group `Z₂^N` (roots `±√2 e_i`)
//! and the dihedral groups `I₂(m)`, `m ≥ 3`. Roots are normalized to
//! `|α|² = 2`.

use std::f64::consts::{PI, SQRT_2};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{DunklError, Result};
use crate::quadrature::{gauss_jacobi, gauss_legendre};
use crate::specfun::ln_gamma;

/// A point of `ℝ^N`.
pub type VectorN = Vec<f64>;
/// A point of `ℂ^N`.
pub type CVectorN = Vec<Complex64>;

/// Hard cap on the group order during closure.
pub const CLOSURE_CAP: usize = 4096;
/// Entrywise tolerance used to identify group elements.
pub const ELEMENT_TOL: f64 = 1e-9;

const COORD_ZERO: f64 = 1e-12;

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn cdot(a: &[f64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| y * x).sum()
}

/// Root system family and its parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", content = "param")]
pub enum Family {
    /// `Z₂^N` acting by coordinate sign changes.
    #[serde(rename = "Z2^N")]
    Z2N(usize),
    /// Dihedral group of order `2m`.
    #[serde(rename = "I2")]
    Dihedral(usize),
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Family::Z2N(n) => write!(f, "Z2^{n}"),
            Family::Dihedral(m) => write!(f, "I2({m})"),
        }
    }
}

/// A reduced root system with a fixed positive subsystem and multiplicities.
#[derive(Debug, Clone, PartialEq)]
pub struct RootSystem {
    dim: usize,
    family: Family,
    positive_roots: Vec<VectorN>,
    orbit_of_root: Vec<usize>,
    orbit_multiplicity: Vec<f64>,
}

/// JSON form of a root system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupDescriptor {
    #[serde(flatten)]
    pub family: Family,
    pub multiplicities: Vec<f64>,
    pub positive_roots: Vec<VectorN>,
}

/// Builds the root system of `family` with multiplicities given either per
/// root orbit or per positive root (in which case they must be constant on
/// orbits).
pub fn make_root_system(family: Family, multiplicities: &[f64]) -> Result<RootSystem> {
    let (dim, roots, orbits) = match family {
        Family::Z2N(n) => {
            if n == 0 {
                return Err(DunklError::InvalidParameter("Z2^N needs N >= 1".into()));
            }
            let roots = (0..n)
                .map(|i| {
                    let mut v = vec![0.0; n];
                    v[i] = SQRT_2;
                    v
                })
                .collect::<Vec<_>>();
            (n, roots, (0..n).collect::<Vec<_>>())
        }
        Family::Dihedral(m) => {
            if m < 3 {
                return Err(DunklError::InvalidParameter(format!(
                    "I2(m) needs m >= 3, got {m}"
                )));
            }
            let roots = (0..m)
                .map(|j| {
                    let a = j as f64 * PI / m as f64;
                    lex_positive(vec![-SQRT_2 * a.sin(), SQRT_2 * a.cos()])
                })
                .collect::<Vec<_>>();
            let orbits = (0..m).map(|j| if m % 2 == 0 { j % 2 } else { 0 }).collect();
            (2, roots, orbits)
        }
    };
    let n_orbits = orbits.iter().max().map_or(0, |m| m + 1);
    let orbit_multiplicity = if multiplicities.len() == n_orbits {
        multiplicities.to_vec()
    } else if multiplicities.len() == roots.len() {
        let mut per_orbit = vec![f64::NAN; n_orbits];
        for (r, &o) in orbits.iter().enumerate() {
            let k = multiplicities[r];
            if per_orbit[o].is_nan() {
                per_orbit[o] = k;
            } else if per_orbit[o] != k {
                return Err(DunklError::MultiplicityNotOrbitConstant(format!(
                    "roots {r} and an earlier root share orbit {o} but have k = {k} vs {}",
                    per_orbit[o]
                )));
            }
        }
        per_orbit
    } else {
        return Err(DunklError::InvalidParameter(format!(
            "{family} expects {n_orbits} multiplicities (one per root orbit), got {}",
            multiplicities.len()
        )));
    };
    for (o, &k) in orbit_multiplicity.iter().enumerate() {
        if !k.is_finite() || k < 0.0 {
            return Err(DunklError::NegativeMultiplicity { orbit: o, value: k });
        }
    }
    let rs = RootSystem {
        dim,
        family,
        positive_roots: roots,
        orbit_of_root: orbits,
        orbit_multiplicity,
    };
    rs.validate()?;
    Ok(rs)
}

fn lex_positive(v: VectorN) -> VectorN {
    match v.iter().find(|c| c.abs() > COORD_ZERO) {
        Some(&c) if c < 0.0 => v.into_iter().map(|x| -x).collect(),
        _ => v,
    }
}

impl RootSystem {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn positive_roots(&self) -> &[VectorN] {
        &self.positive_roots
    }

    pub fn num_positive_roots(&self) -> usize {
        self.positive_roots.len()
    }

    pub fn num_orbits(&self) -> usize {
        self.orbit_multiplicity.len()
    }

    pub fn orbit_multiplicities(&self) -> &[f64] {
        &self.orbit_multiplicity
    }

    /// Multiplicity `k(α)` of the positive root with index `root`.
    pub fn k(&self, root: usize) -> f64 {
        self.orbit_multiplicity[self.orbit_of_root[root]]
    }

    pub fn multiplicities(&self) -> Vec<f64> {
        (0..self.positive_roots.len()).map(|r| self.k(r)).collect()
    }

    /// Same roots with new per-orbit multiplicities.
    pub fn with_multiplicities(&self, multiplicities: &[f64]) -> Result<RootSystem> {
        make_root_system(self.family, multiplicities)
    }

    pub fn is_trivial(&self) -> bool {
        self.orbit_multiplicity.iter().all(|&k| k == 0.0)
    }

    pub fn descriptor(&self) -> GroupDescriptor {
        GroupDescriptor {
            family: self.family,
            multiplicities: self.orbit_multiplicity.clone(),
            positive_roots: self.positive_roots.clone(),
        }
    }

    pub fn from_descriptor(d: &GroupDescriptor) -> Result<RootSystem> {
        make_root_system(d.family, &d.multiplicities)
    }

    /// Reflection `σ_α x = x - ⟨α,x⟩ α` (using `|α|² = 2`).
    pub fn reflect(&self, root: usize, x: &[f64]) -> VectorN {
        let a = &self.positive_roots[root];
        let s = dot(a, x);
        x.iter().zip(a).map(|(xi, ai)| xi - s * ai).collect()
    }

    pub fn reflection_matrix(&self, root: usize) -> DMatrix<f64> {
        let a = &self.positive_roots[root];
        DMatrix::from_fn(self.dim, self.dim, |i, j| {
            (if i == j { 1.0 } else { 0.0 }) - a[i] * a[j]
        })
    }

    fn all_roots(&self) -> Vec<VectorN> {
        self.positive_roots
            .iter()
            .flat_map(|a| [a.clone(), a.iter().map(|x| -x).collect()])
            .collect()
    }

    fn validate(&self) -> Result<()> {
        let all = self.all_roots();
        let find = |v: &[f64]| all.iter().any(|r| r.iter().zip(v).all(|(a, b)| (a - b).abs() < 1e-9));
        for (i, a) in self.positive_roots.iter().enumerate() {
            if (dot(a, a) - 2.0).abs() > 1e-12 {
                return Err(DunklError::Internal(format!("root {i} is not normalized")));
            }
            for b in &all {
                if !find(&self.reflect(i, b)) {
                    return Err(DunklError::Internal(format!("σ_{i} does not preserve R")));
                }
            }
            for (j, b) in self.positive_roots.iter().enumerate() {
                if i != j && (dot(a, b).abs() - 2.0).abs() < 1e-9 {
                    return Err(DunklError::Internal(format!("roots {i} and {j} are parallel")));
                }
            }
            // orbit ids must be constant under the group action on roots
            for j in 0..self.positive_roots.len() {
                let img = lex_positive(self.reflect(i, &self.positive_roots[j]));
                let target = self
                    .positive_roots
                    .iter()
                    .position(|r| r.iter().zip(&img).all(|(p, q)| (p - q).abs() < 1e-9))
                    .ok_or_else(|| DunklError::Internal("reflected root not found".into()))?;
                if self.orbit_of_root[target] != self.orbit_of_root[j] {
                    return Err(DunklError::Internal("orbit labelling is not G-invariant".into()));
                }
            }
        }
        Ok(())
    }
}

/// The finite group generated by the root reflections, as dense orthogonal
/// matrices. Element 0 is the identity.
#[derive(Debug, Clone)]
pub struct ReflectionGroup {
    dim: usize,
    elements: Vec<DMatrix<f64>>,
    inverse_index: Vec<usize>,
    generator_roots: Vec<usize>,
    /// `left_reflection[α][g]` is the index of `σ_α g`.
    left_reflection: Vec<Vec<usize>>,
    mult: Vec<Vec<usize>>,
}

fn same_element(a: &DMatrix<f64>, b: &DMatrix<f64>) -> bool {
    a.iter().zip(b.iter()).all(|(x, y)| (x - y).abs() < ELEMENT_TOL)
}

/// Closes the set of root reflections under multiplication.
pub fn generate_group(rs: &RootSystem) -> Result<ReflectionGroup> {
    let dim = rs.dim();
    let gens: Vec<DMatrix<f64>> = (0..rs.num_positive_roots()).map(|r| rs.reflection_matrix(r)).collect();
    let mut elements = vec![DMatrix::<f64>::identity(dim, dim)];
    let mut frontier = vec![0usize];
    while let Some(idx) = frontier.pop() {
        for g in &gens {
            let prod = g * &elements[idx];
            if !elements.iter().any(|e| same_element(e, &prod)) {
                if elements.len() >= CLOSURE_CAP {
                    return Err(DunklError::ClosureOverflow { cap: CLOSURE_CAP });
                }
                elements.push(prod);
                frontier.push(elements.len() - 1);
            }
        }
    }
    let lookup = |m: &DMatrix<f64>| -> Result<usize> {
        elements
            .iter()
            .position(|e| same_element(e, m))
            .ok_or_else(|| DunklError::Internal("group is not closed".into()))
    };
    for (i, e) in elements.iter().enumerate() {
        let err = (e.transpose() * e - DMatrix::<f64>::identity(dim, dim)).abs().max();
        if err > 1e-12 {
            return Err(DunklError::Internal(format!("element {i} is not orthogonal ({err:.1e})")));
        }
    }
    let mut mult = vec![vec![0usize; elements.len()]; elements.len()];
    for (i, a) in elements.iter().enumerate() {
        for (j, b) in elements.iter().enumerate() {
            mult[i][j] = lookup(&(a * b))?;
        }
    }
    let inverse_index = (0..elements.len())
        .map(|i| {
            mult[i]
                .iter()
                .position(|&p| p == 0)
                .ok_or_else(|| DunklError::Internal("missing inverse".into()))
        })
        .collect::<Result<Vec<_>>>()?;
    let generator_roots: Vec<usize> = gens.iter().map(&lookup).collect::<Result<_>>()?;
    let left_reflection = generator_roots
        .iter()
        .map(|&s| (0..elements.len()).map(|g| mult[s][g]).collect())
        .collect();
    Ok(ReflectionGroup {
        dim,
        elements,
        inverse_index,
        generator_roots,
        left_reflection,
        mult,
    })
}

impl ReflectionGroup {
    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn element(&self, g: usize) -> &DMatrix<f64> {
        &self.elements[g]
    }

    pub fn inverse(&self, g: usize) -> usize {
        self.inverse_index[g]
    }

    pub fn compose(&self, g: usize, h: usize) -> usize {
        self.mult[g][h]
    }

    /// Element index of the reflection in positive root `root`.
    pub fn reflection_element(&self, root: usize) -> usize {
        self.generator_roots[root]
    }

    /// Index of `σ_α g`.
    pub fn left_reflect(&self, root: usize, g: usize) -> usize {
        self.left_reflection[root][g]
    }

    pub fn apply(&self, g: usize, x: &[f64]) -> VectorN {
        let m = &self.elements[g];
        (0..self.dim).map(|i| (0..self.dim).map(|j| m[(i, j)] * x[j]).sum()).collect()
    }

    pub fn apply_c(&self, g: usize, x: &[Complex64]) -> CVectorN {
        let m = &self.elements[g];
        (0..self.dim).map(|i| (0..self.dim).map(|j| x[j] * m[(i, j)]).sum()).collect()
    }

    /// An element `h` and the point `h⁻¹x` lying in the closed chamber, so
    /// that `x = h (h⁻¹x)`.
    pub fn to_chamber(&self, rs: &RootSystem, x: &[f64]) -> (usize, VectorN) {
        let mut best = (0, x.to_vec(), f64::NEG_INFINITY);
        for g in 0..self.order() {
            let y = self.apply(self.inverse(g), x);
            let score = rs
                .positive_roots()
                .iter()
                .map(|a| dot(a, &y))
                .fold(f64::INFINITY, f64::min);
            if score > best.2 {
                best = (g, y, score);
            }
        }
        (best.0, best.1)
    }
}

/// `w_k(x) = ∏_{α∈R₊} |⟨α,x⟩|^{2k(α)}`.
pub fn weight(rs: &RootSystem, x: &[f64]) -> f64 {
    rs.positive_roots()
        .iter()
        .enumerate()
        .map(|(r, a)| dot(a, x).abs().powf(2.0 * rs.k(r)))
        .product()
}

/// `γ = Σ_{α∈R₊} k(α)`.
pub fn gamma_index(rs: &RootSystem) -> f64 {
    (0..rs.num_positive_roots()).map(|r| rs.k(r)).sum()
}

/// Cone parameter of `C_δ = {x ∈ C : ⟨α,x⟩ > δ|x|}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChamberSpec {
    delta: f64,
}

impl ChamberSpec {
    pub fn new(delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta < SQRT_2) {
            return Err(DunklError::InvalidParameter(format!(
                "cone parameter must lie in (0, √2), got {delta}"
            )));
        }
        Ok(Self { delta })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }
}

/// Membership in the chamber `C` (`delta = None`) or in `C_δ`.
pub fn chamber_test(rs: &RootSystem, x: &[f64], delta: Option<f64>) -> bool {
    let bound = delta.map_or(0.0, |d| d * norm(x));
    rs.positive_roots().iter().all(|a| dot(a, x) > bound)
}

/// Largest δ with `x ∈ C_δ` (non-positive when `x ∉ C`).
pub fn cone_parameter(rs: &RootSystem, x: &[f64]) -> f64 {
    let n = norm(x);
    rs.positive_roots()
        .iter()
        .map(|a| dot(a, x) / n)
        .fold(f64::INFINITY, f64::min)
}

/// True when `x` lies on no root hyperplane.
pub fn is_regular(rs: &RootSystem, x: &[f64]) -> bool {
    let scale = norm(x).max(f64::MIN_POSITIVE);
    rs.positive_roots().iter().all(|a| dot(a, x).abs() > 1e-12 * scale)
}

/// Checks `⟨gx, y⟩ ≤ ⟨x, y⟩` for every group element, with `x, y ∈ C`.
pub fn dominant_pairing_check(group: &ReflectionGroup, rs: &RootSystem, x: &[f64], y: &[f64]) -> Result<bool> {
    if !chamber_test(rs, x, None) || !chamber_test(rs, y, None) {
        return Err(DunklError::InvalidParameter(
            "dominant pairing check needs x and y in the chamber".into(),
        ));
    }
    let base = dot(x, y);
    let slack = 1e-12 * norm(x) * norm(y);
    Ok((0..group.order()).all(|g| dot(&group.apply(g, x), y) <= base + slack))
}

/// Mehta-type constant `c_k = ∫ e^{-|x|²/2} w_k(x) dx`.
///
/// The Gaussian radial moment is a Γ-value; the remaining angular integral
/// of `w_k` over the circle (dihedral case) is computed by Gauss–Jacobi
/// quadrature on each arc between consecutive walls, with the wall
/// singularities absorbed into the Jacobi weight. `Z₂^N` factorizes into
/// one-dimensional integrals.
pub fn mehta_constant(rs: &RootSystem) -> Result<f64> {
    match rs.family() {
        Family::Z2N(n) => Ok((0..n)
            .map(|i| {
                // ∫ e^{-x²/2} |√2 x|^{2k} dx = 2^k · 2^{k+1/2} Γ(k+1/2)
                let k = rs.k(i);
                ((2.0 * k + 0.5) * std::f64::consts::LN_2 + ln_gamma(k + 0.5)).exp()
            })
            .product()),
        Family::Dihedral(_) => {
            let g = gamma_index(rs);
            let radial = (g * std::f64::consts::LN_2 + ln_gamma(g + 1.0)).exp();
            Ok(radial * dihedral_angular_integral(rs)?)
        }
    }
}

/// `∫_0^{2π} w_k(cos φ, sin φ) dφ` for a dihedral root system.
pub fn dihedral_angular_integral(rs: &RootSystem) -> Result<f64> {
    let m = rs.num_positive_roots();
    // wall directions: φ with ⟨α_j, u(φ)⟩ = 0
    let mut walls: Vec<(f64, usize)> = Vec::with_capacity(2 * m);
    for (j, a) in rs.positive_roots().iter().enumerate() {
        let phi = a[1].atan2(a[0]) + PI / 2.0;
        for shift in [0.0, PI] {
            walls.push(((phi + shift).rem_euclid(2.0 * PI), j));
        }
    }
    walls.sort_by(|p, q| p.0.total_cmp(&q.0));
    let panel_sum = |n: usize| -> Result<f64> {
        let mut total = 0.0;
        for i in 0..walls.len() {
            let (lo, ja) = walls[i];
            let (mut hi, jb) = walls[(i + 1) % walls.len()];
            if hi <= lo {
                hi += 2.0 * PI;
            }
            let half = 0.5 * (hi - lo);
            let (ka, kb) = (rs.k(ja), rs.k(jb));
            let rule = if ka == 0.0 && kb == 0.0 {
                gauss_legendre(n)
            } else {
                gauss_jacobi(n, 2.0 * kb, 2.0 * ka)?
            };
            for (s, w) in rule.nodes.iter().zip(&rule.weights) {
                let phi = lo + half * (1.0 + s);
                let u = [phi.cos(), phi.sin()];
                let mut f = 1.0;
                for (r, a) in rs.positive_roots().iter().enumerate() {
                    let k = rs.k(r);
                    if k == 0.0 {
                        continue;
                    }
                    f *= if r == ja {
                        (SQRT_2 * (half * (1.0 + s)).sin() / (1.0 + s)).powf(2.0 * k)
                    } else if r == jb {
                        (SQRT_2 * (half * (1.0 - s)).sin() / (1.0 - s)).powf(2.0 * k)
                    } else {
                        dot(a, &u).abs().powf(2.0 * k)
                    };
                }
                total += half * w * f;
            }
        }
        Ok(total)
    };
    let mut n = 16;
    let mut prev = panel_sum(n)?;
    while n <= 256 {
        n *= 2;
        let next = panel_sum(n)?;
        if (next - prev).abs() <= 1e-12 * next.abs() {
            return Ok(next);
        }
        prev = next;
    }
    Err(DunklError::Quadrature("angular Mehta integral did not settle".into()))
}
