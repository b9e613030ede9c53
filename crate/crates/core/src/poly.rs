//! Sparse multivariate polynomials with complex coefficients.

use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{DunklError, Result};

/// Exponent multi-index.
pub type Exponent = Vec<u32>;

/// Polynomial in `nvars` variables, stored as exponent → coefficient.
/// Zero coefficients are never stored.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiPoly {
    nvars: usize,
    terms: BTreeMap<Exponent, Complex64>,
}

/// Monomials of total degree `n` in `nvars` variables, graded-lex order
/// (`x_1^n` first).
pub fn monomial_basis(nvars: usize, n: u32) -> Vec<Exponent> {
    fn rec(prefix: &mut Exponent, left: usize, rem: u32, out: &mut Vec<Exponent>) {
        if left == 1 {
            prefix.push(rem);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for e in (0..=rem).rev() {
            prefix.push(e);
            rec(prefix, left - 1, rem - e, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if nvars == 0 {
        return out;
    }
    rec(&mut Vec::with_capacity(nvars), nvars, n, &mut out);
    out
}

impl MultiPoly {
    pub fn zero(nvars: usize) -> Self {
        Self { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: Complex64) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(vec![0; nvars], c);
        p
    }

    pub fn monomial(exp: Exponent, c: Complex64) -> Self {
        let mut p = Self::zero(exp.len());
        p.add_term(exp, c);
        p
    }

    /// `Σ_i c_i x_i`.
    pub fn linear(coeffs: &[Complex64]) -> Self {
        let n = coeffs.len();
        let mut p = Self::zero(n);
        for (i, &c) in coeffs.iter().enumerate() {
            let mut e = vec![0; n];
            e[i] = 1;
            p.add_term(e, c);
        }
        p
    }

    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (Exponent, Complex64)>) -> Result<Self> {
        let mut p = Self::zero(nvars);
        for (e, c) in terms {
            if e.len() != nvars {
                return Err(DunklError::DimensionMismatch { expected: nvars, got: e.len() });
            }
            p.add_term(e, c);
        }
        Ok(p)
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> &BTreeMap<Exponent, Complex64> {
        &self.terms
    }

    pub fn coeff(&self, e: &[u32]) -> Complex64 {
        self.terms.get(e).copied().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    pub fn max_coeff(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn add_term(&mut self, e: Exponent, c: Complex64) {
        debug_assert_eq!(e.len(), self.nvars);
        if c == Complex64::default() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(e) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if *o.get() == Complex64::default() {
                    o.remove();
                }
            }
        }
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let mut p = Self::zero(self.nvars);
        for (e, v) in &self.terms {
            p.add_term(e.clone(), v * c);
        }
        p
    }

    /// Drops coefficients below `eps · max_coeff`.
    pub fn prune(&mut self, eps: f64) {
        let cut = eps * self.max_coeff();
        self.terms.retain(|_, c| c.norm() > cut);
    }

    /// Homogeneous component of degree `n`.
    pub fn homogeneous_part(&self, n: u32) -> Self {
        Self {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .filter(|(e, _)| e.iter().sum::<u32>() == n)
                .map(|(e, c)| (e.clone(), *c))
                .collect(),
        }
    }

    pub fn eval(&self, x: &[Complex64]) -> Complex64 {
        self.terms
            .iter()
            .map(|(e, c)| {
                e.iter()
                    .zip(x)
                    .fold(*c, |acc, (&k, xi)| acc * xi.powu(k))
            })
            .sum()
    }

    pub fn eval_real(&self, x: &[f64]) -> Complex64 {
        let xc: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.eval(&xc)
    }

    /// `∂/∂x_i`.
    pub fn partial(&self, i: usize) -> Self {
        let mut p = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            if e[i] > 0 {
                let mut f = e.clone();
                f[i] -= 1;
                p.add_term(f, c * e[i] as f64);
            }
        }
        p
    }

    /// Directional derivative `∂_ξ`.
    pub fn directional(&self, xi: &[f64]) -> Self {
        let mut p = Self::zero(self.nvars);
        for (i, &v) in xi.iter().enumerate() {
            if v != 0.0 {
                p = &p + &self.partial(i).scale(Complex64::new(v, 0.0));
            }
        }
        p
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Self::constant(self.nvars, Complex64::new(1.0, 0.0));
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    /// `p(Mx)` for a real `nvars × nvars` matrix given row-major.
    pub fn linear_substitute(&self, m: &[f64]) -> Self {
        let n = self.nvars;
        let images: Vec<MultiPoly> = (0..n)
            .map(|i| MultiPoly::linear(&(0..n).map(|j| Complex64::new(m[i * n + j], 0.0)).collect::<Vec<_>>()))
            .collect();
        // cache powers of each image
        let maxdeg: Vec<u32> = (0..n)
            .map(|i| self.terms.keys().map(|e| e[i]).max().unwrap_or(0))
            .collect();
        let powers: Vec<Vec<MultiPoly>> = (0..n)
            .map(|i| {
                let mut v = vec![MultiPoly::constant(n, Complex64::new(1.0, 0.0))];
                for d in 1..=maxdeg[i] {
                    let next = &v[d as usize - 1] * &images[i];
                    v.push(next);
                }
                v
            })
            .collect();
        let mut out = Self::zero(n);
        for (e, c) in &self.terms {
            let mut t = MultiPoly::constant(n, *c);
            for i in 0..n {
                if e[i] > 0 {
                    t = &t * &powers[i][e[i] as usize];
                }
            }
            for (e, c) in t.terms {
                out.add_term(e, c);
            }
        }
        out
    }

    /// Exact division by the linear form `⟨a, x⟩`.
    ///
    /// Synthetic division along the coordinate where `|a_j|` is largest.
    /// Returns the quotient, and errors if the remainder exceeds
    /// `rel_tol · max_coeff(self)`.
    pub fn divide_linear(&self, a: &[f64], rel_tol: f64) -> Result<Self> {
        let n = self.nvars;
        let (j, aj) = a
            .iter()
            .enumerate()
            .max_by(|p, q| p.1.abs().total_cmp(&q.1.abs()))
            .map(|(j, v)| (j, *v))
            .ok_or_else(|| DunklError::InvalidParameter("empty linear form".into()))?;
        if aj == 0.0 {
            return Err(DunklError::InvalidParameter("zero linear form".into()));
        }
        let scale = self.max_coeff();
        let mut rem = self.terms.clone();
        let mut quot = Self::zero(n);
        loop {
            let top = rem.keys().map(|e| e[j]).max().unwrap_or(0);
            if top == 0 {
                break;
            }
            let lead: Vec<(Exponent, Complex64)> = rem
                .iter()
                .filter(|(e, _)| e[j] == top)
                .map(|(e, c)| (e.clone(), *c))
                .collect();
            for (e, c) in lead {
                let mut q = e.clone();
                q[j] -= 1;
                let qc = c / aj;
                // subtract qc · x^q · ⟨a, x⟩
                for (i, &ai) in a.iter().enumerate() {
                    if ai == 0.0 {
                        continue;
                    }
                    let mut m = q.clone();
                    m[i] += 1;
                    let entry = rem.entry(m.clone()).or_default();
                    *entry -= qc * ai;
                    if i == j || entry.norm() == 0.0 {
                        rem.remove(&m);
                    }
                }
                quot.add_term(q, qc);
            }
        }
        let r = rem.values().map(|c| c.norm()).fold(0.0, f64::max);
        if r > rel_tol * scale.max(f64::MIN_POSITIVE) {
            return Err(DunklError::Internal(format!(
                "linear-form division left remainder {r:.3e} (scale {scale:.3e})"
            )));
        }
        Ok(quot)
    }
}

impl Add for &MultiPoly {
    type Output = MultiPoly;
    fn add(self, rhs: &MultiPoly) -> MultiPoly {
        let mut p = self.clone();
        for (e, c) in &rhs.terms {
            p.add_term(e.clone(), *c);
        }
        p
    }
}

impl Sub for &MultiPoly {
    type Output = MultiPoly;
    fn sub(self, rhs: &MultiPoly) -> MultiPoly {
        let mut p = self.clone();
        for (e, c) in &rhs.terms {
            p.add_term(e.clone(), -c);
        }
        p
    }
}

impl Neg for &MultiPoly {
    type Output = MultiPoly;
    fn neg(self) -> MultiPoly {
        self.scale(Complex64::new(-1.0, 0.0))
    }
}

impl Mul for &MultiPoly {
    type Output = MultiPoly;
    fn mul(self, rhs: &MultiPoly) -> MultiPoly {
        let mut acc: BTreeMap<Exponent, Complex64> = BTreeMap::new();
        for (e1, c1) in &self.terms {
            for (e2, c2) in &rhs.terms {
                let e: Exponent = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                *acc.entry(e).or_default() += c1 * c2;
            }
        }
        acc.retain(|_, c| *c != Complex64::default());
        MultiPoly { nvars: self.nvars, terms: acc }
    }
}
