//! Scalar special functions and the rank-one closed forms.
//!
//! Sign conventions for the integral sine and cosine follow the tail form
//! `si(τ) = -∫_τ^∞ sin u / u du`, `Ci(τ) = -∫_τ^∞ cos u / u du`.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{DunklError, Result};
use crate::quadrature::gauss_jacobi;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Rank-one agreement tolerance between the Bessel and Kummer routes.
pub const RANK1_AGREEMENT: f64 = 1e-10;

/// Largest `|zw|` accepted by [`rank1_kernel`].
pub const RANK1_MAX_ARG: f64 = 50.0;

/// Multiplicity parameter of the rank-one group `Z₂`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rank1Params {
    k: f64,
}

impl Rank1Params {
    pub fn new(k: f64) -> Result<Self> {
        if !(k >= 0.0) || !k.is_finite() {
            return Err(DunklError::InvalidParameter(format!(
                "rank-one multiplicity must be finite and non-negative, got {k}"
            )));
        }
        Ok(Self { k })
    }

    pub fn k(&self) -> f64 {
        self.k
    }
}

/// Γ(x) for x > 0.
pub fn gamma_fn(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(DunklError::InvalidParameter(format!(
            "gamma_fn needs a positive argument, got {x}"
        )));
    }
    Ok(statrs::function::gamma::gamma(x))
}

pub fn ln_gamma(x: f64) -> f64 {
    statrs::function::gamma::ln_gamma(x)
}

/// 1/Γ(x), zero at the poles.
pub fn rgamma(x: f64) -> f64 {
    if x <= 0.0 && x == x.floor() {
        0.0
    } else {
        1.0 / statrs::function::gamma::gamma(x)
    }
}

/// Normalized Bessel function `j_α(z) = Γ(α+1) Σ (-1)^n (z/2)^{2n} / (n! Γ(n+α+1))`.
///
/// The power series is used while the real part of `z` is small enough that
/// alternating cancellation stays below ~1e-12; beyond that the Poisson
/// integral is evaluated with a Gauss–Jacobi rule.
pub fn bessel_j_norm(alpha: f64, z: Complex64) -> Result<Complex64> {
    if !(alpha > -1.0) {
        return Err(DunklError::InvalidParameter(format!(
            "bessel_j_norm needs alpha > -1, got {alpha}"
        )));
    }
    if z.norm() > RANK1_MAX_ARG {
        return Err(DunklError::Regime(format!(
            "|z| = {:.3} exceeds the supported range {RANK1_MAX_ARG}",
            z.norm()
        )));
    }
    if z.re.abs() <= 8.0 {
        return Ok(bessel_series(alpha, z));
    }
    if alpha == -0.5 {
        return Ok(z.cos());
    }
    if alpha < -0.5 {
        // j_α = j_{α+1} - z² j_{α+2} / (4(α+1)(α+2))
        let j1 = bessel_poisson(alpha + 1.0, z)?;
        let j2 = bessel_poisson(alpha + 2.0, z)?;
        return Ok(j1 - z * z * j2 / (4.0 * (alpha + 1.0) * (alpha + 2.0)));
    }
    bessel_poisson(alpha, z)
}

fn bessel_series(alpha: f64, z: Complex64) -> Complex64 {
    let q = -(z * z) / 4.0;
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    for n in 1..400 {
        let nf = n as f64;
        term *= q / (nf * (nf + alpha));
        sum += term;
        if term.norm() <= 1e-17 * sum.norm() && nf > q.norm().sqrt() {
            break;
        }
    }
    sum
}

fn bessel_poisson(alpha: f64, z: Complex64) -> Result<Complex64> {
    // j_α(z) = Γ(α+1)/(√π Γ(α+1/2)) ∫_{-1}^{1} e^{izt} (1-t²)^{α-1/2} dt
    let n = (z.norm() * 0.5).ceil() as usize + 30;
    let rule = gauss_jacobi(n, alpha - 0.5, alpha - 0.5)?;
    let iz = Complex64::i() * z;
    let mut acc = Complex64::new(0.0, 0.0);
    for (t, w) in rule.nodes.iter().zip(&rule.weights) {
        acc += (iz * t).exp() * w;
    }
    let norm = (ln_gamma(alpha + 1.0) - 0.5 * PI.ln() - ln_gamma(alpha + 0.5)).exp();
    Ok(acc * norm)
}

/// Kummer's confluent hypergeometric function ₁F₁(a; b; z).
///
/// Small |z|: power series (after Kummer's transformation when Re z < 0).
/// Moderate |z| with 0 < a < b: Euler integral via Gauss–Jacobi.
/// Large |z|: the two-sided asymptotic expansion, optimally truncated.
pub fn kummer_1f1(a: f64, b: f64, z: Complex64) -> Result<Complex64> {
    if b <= 0.0 && b == b.floor() {
        return Err(DunklError::InvalidParameter(format!(
            "1F1 has a pole at non-positive integer b = {b}"
        )));
    }
    if a == 0.0 || z == Complex64::new(0.0, 0.0) {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let r = z.norm();
    if r <= 8.0 {
        return Ok(if z.re < 0.0 {
            z.exp() * kummer_series(b - a, b, -z)?
        } else {
            kummer_series(a, b, z)?
        });
    }
    if r > 40.0 {
        if let Ok(v) = kummer_asymptotic(a, b, z) {
            return Ok(v);
        }
    }
    if a > 0.0 && b > a {
        return Ok(if z.re < 0.0 {
            z.exp() * kummer_euler(b - a, b, -z)?
        } else {
            kummer_euler(a, b, z)?
        });
    }
    if z.re < 0.0 {
        Ok(z.exp() * kummer_series(b - a, b, -z)?)
    } else {
        kummer_series(a, b, z)
    }
}

fn kummer_series(a: f64, b: f64, z: Complex64) -> Result<Complex64> {
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    let mut biggest = 1.0f64;
    for n in 0..2000 {
        let nf = n as f64;
        term *= z * ((a + nf) / ((b + nf) * (nf + 1.0)));
        sum += term;
        biggest = biggest.max(term.norm());
        if term.norm() <= 1e-17 * sum.norm() && nf > z.norm() {
            let lost = biggest * f64::EPSILON / sum.norm().max(f64::MIN_POSITIVE);
            if lost > 1e-9 {
                return Err(DunklError::Regime(format!(
                    "1F1 series loses too much precision (relative error ~{lost:.1e})"
                )));
            }
            return Ok(sum);
        }
    }
    Err(DunklError::Regime("1F1 series did not converge".into()))
}

fn kummer_euler(a: f64, b: f64, z: Complex64) -> Result<Complex64> {
    // Γ(b)/(Γ(a)Γ(b-a)) ∫_0^1 e^{zt} t^{a-1} (1-t)^{b-a-1} dt with t = (1+s)/2
    let n = (z.norm() * 0.5).ceil() as usize + 30;
    let rule = gauss_jacobi(n, b - a - 1.0, a - 1.0)?;
    let mut acc = Complex64::new(0.0, 0.0);
    for (s, w) in rule.nodes.iter().zip(&rule.weights) {
        acc += (z * (0.5 * (1.0 + s))).exp() * w;
    }
    let log_norm = ln_gamma(b) - ln_gamma(a) - ln_gamma(b - a) + (1.0 - b) * std::f64::consts::LN_2;
    Ok(acc * log_norm.exp())
}

fn asymptotic_sum(p: f64, q: f64, w: Complex64) -> Option<Complex64> {
    // Σ_s (p)_s (q)_s / s! · w^{-s}, truncated at the smallest term.
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    let mut last = 1.0f64;
    for s in 0..200 {
        let sf = s as f64;
        let next = term * ((p + sf) * (q + sf) / (sf + 1.0)) / w;
        let mag = next.norm();
        if mag > last {
            break;
        }
        term = next;
        sum += term;
        last = mag;
        if mag <= 1e-17 * sum.norm() {
            return Some(sum);
        }
    }
    (last <= 1e-12 * sum.norm()).then_some(sum)
}

fn kummer_asymptotic(a: f64, b: f64, z: Complex64) -> Result<Complex64> {
    let fail = || DunklError::Regime(format!("1F1 asymptotic expansion not accurate at |z| = {}", z.norm()));
    let log_z = z.ln();
    let mut total = Complex64::new(0.0, 0.0);
    let ra = rgamma(a);
    if ra != 0.0 {
        let s1 = asymptotic_sum(1.0 - a, b - a, z).ok_or_else(fail)?;
        total += (z + (a - b) * log_z).exp() * s1 * ra;
    }
    let rba = rgamma(b - a);
    if rba != 0.0 {
        let s2 = asymptotic_sum(a, a - b + 1.0, -z).ok_or_else(fail)?;
        let sign = if z.im >= 0.0 { 1.0 } else { -1.0 };
        let phase = Complex64::from_polar(1.0, sign * PI * a);
        total += phase * (-a * log_z).exp() * s2 * rba;
    }
    Ok(total * statrs::function::gamma::gamma(b))
}

/// `e^z E₁(z)` for `Re z ≥ 0`, `z ≠ 0`.
pub fn exp_e1(z: Complex64) -> Result<Complex64> {
    if z.re < 0.0 || z.norm() == 0.0 {
        return Err(DunklError::InvalidParameter(format!(
            "exp_e1 needs Re z >= 0 and z != 0, got {z}"
        )));
    }
    if z.norm() < 2.0 {
        // E₁(z) = -γ - ln z - Σ_{n≥1} (-z)^n / (n n!)
        let mut term = Complex64::new(1.0, 0.0);
        let mut sum = Complex64::new(0.0, 0.0);
        for n in 1..200 {
            let nf = n as f64;
            term *= -z / nf;
            let add = term / nf;
            sum += add;
            if add.norm() < 1e-18 {
                break;
            }
        }
        let e1 = -EULER_GAMMA - z.ln() - sum;
        return Ok(z.exp() * e1);
    }
    // Modified Lentz on 1/(z+1- 1/(z+3- 4/(z+5- ...)))
    let tiny = 1e-300;
    let mut bb = z + 1.0;
    let mut c = Complex64::new(1.0 / tiny, 0.0);
    let mut d = Complex64::new(1.0, 0.0) / bb;
    let mut h = d;
    for i in 1..10_000 {
        let an = -((i * i) as f64);
        bb += 2.0;
        d = Complex64::new(1.0, 0.0) / (d * an + bb);
        c = bb + Complex64::new(an, 0.0) / c;
        let del = c * d;
        h *= del;
        if (del - 1.0).norm() < 1e-16 {
            return Ok(h);
        }
    }
    Err(DunklError::Internal("exp_e1 continued fraction did not converge".into()))
}

/// Integral sine and cosine `(si(τ), Ci(τ))` as negative upper tails.
///
/// Power series for τ ≤ 4, continued fraction for E₁(iτ) up to τ = 40, and
/// the integration-by-parts asymptotic expansion beyond.
pub fn si_ci(tau: f64) -> Result<(f64, f64)> {
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(DunklError::InvalidParameter(format!(
            "si_ci needs a positive finite argument, got {tau}"
        )));
    }
    if tau <= 4.0 {
        let t2 = tau * tau;
        let mut s_term = tau;
        let mut si_sum = tau;
        let mut c_term = 1.0;
        let mut ci_sum = 0.0;
        for n in 1..60 {
            let nf = n as f64;
            s_term *= -t2 / ((2.0 * nf) * (2.0 * nf + 1.0));
            si_sum += s_term / (2.0 * nf + 1.0);
            c_term *= -t2 / ((2.0 * nf - 1.0) * (2.0 * nf));
            ci_sum += c_term / (2.0 * nf);
            if s_term.abs() < 1e-18 && c_term.abs() < 1e-18 {
                break;
            }
        }
        return Ok((si_sum - FRAC_PI_2, EULER_GAMMA + tau.ln() + ci_sum));
    }
    if tau <= 40.0 {
        // E₁(iτ) = -Ci(τ) + i si(τ)
        let z = Complex64::new(0.0, tau);
        let e1 = exp_e1(z)? * (-z).exp();
        return Ok((e1.im, -e1.re));
    }
    let (f, g) = auxiliary_fg(tau);
    let (s, c) = tau.sin_cos();
    Ok((-f * c - g * s, f * s - g * c))
}

fn auxiliary_fg(x: f64) -> (f64, f64) {
    // f ~ (1/x) Σ (-1)^n (2n)!/x^{2n},  g ~ (1/x²) Σ (-1)^n (2n+1)!/x^{2n}
    let x2 = x * x;
    let mut f_term = 1.0;
    let mut f_sum = 1.0;
    let mut g_term = 1.0;
    let mut g_sum = 1.0;
    for n in 1..200 {
        let nf = n as f64;
        let nf_next = f_term * (-(2.0 * nf - 1.0) * (2.0 * nf) / x2);
        let ng_next = g_term * (-(2.0 * nf) * (2.0 * nf + 1.0) / x2);
        if nf_next.abs() > f_term.abs() || ng_next.abs() > g_term.abs() {
            break;
        }
        f_term = nf_next;
        g_term = ng_next;
        f_sum += f_term;
        g_sum += g_term;
        if f_term.abs() < 1e-18 && g_term.abs() < 1e-18 {
            break;
        }
    }
    (f_sum / x, g_sum / x2)
}

/// Rank-one Dunkl kernel `E_k(z, w)`.
///
/// Evaluated twice, via `j_{k-1/2}(izw) + zw/(2k+1) j_{k+1/2}(izw)` and via
/// `e^{zw} ₁F₁(k, 2k+1, -2zw)`; the two must agree to [`RANK1_AGREEMENT`].
/// Returns the Bessel-form value.
pub fn rank1_kernel(k: f64, z: Complex64, w: Complex64) -> Result<Complex64> {
    let (bessel, kummer) = rank1_kernel_both(k, z, w)?;
    let scale = bessel.norm().max(kummer.norm());
    if (bessel - kummer).norm() > RANK1_AGREEMENT * scale {
        return Err(DunklError::Internal(format!(
            "rank-one kernel routes disagree at zw = {}: {bessel} vs {kummer}",
            z * w
        )));
    }
    Ok(bessel)
}

/// Both rank-one evaluation routes, `(bessel_form, kummer_form)`, unchecked.
pub fn rank1_kernel_both(k: f64, z: Complex64, w: Complex64) -> Result<(Complex64, Complex64)> {
    let params = Rank1Params::new(k)?;
    let u = z * w;
    if u.norm() > RANK1_MAX_ARG {
        return Err(DunklError::Regime(format!(
            "|zw| = {:.3} exceeds {RANK1_MAX_ARG}",
            u.norm()
        )));
    }
    let k = params.k();
    let iu = Complex64::i() * u;
    let bessel = bessel_j_norm(k - 0.5, iu)? + u / (2.0 * k + 1.0) * bessel_j_norm(k + 0.5, iu)?;
    let kummer = u.exp() * kummer_1f1(k, 2.0 * k + 1.0, -2.0 * u)?;
    Ok((bessel, kummer))
}

/// Density of the rank-one representing measure μ_x^k at `u`.
pub fn rank1_density(k: f64, x: f64, u: f64) -> Result<f64> {
    if !(k > 0.0) {
        return Err(DunklError::InvalidParameter(
            "rank-one density needs k > 0; k = 0 is a point mass".into(),
        ));
    }
    if x == 0.0 || !x.is_finite() {
        return Err(DunklError::InvalidParameter(format!(
            "rank-one density needs x != 0, got {x}"
        )));
    }
    if u.abs() > x.abs() {
        return Ok(0.0);
    }
    let c = (ln_gamma(k + 0.5) - ln_gamma(0.5) - ln_gamma(k)).exp();
    let r = u / x;
    Ok(c / x.abs() * (1.0 - r).powf(k - 1.0) * (1.0 + r).powf(k))
}

/// Rank-one representing measure: an atom at the origin when `k = 0`, else
/// the explicit density on `[-|x|, |x|]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Rank1Measure {
    Atom { at: f64 },
    Density { k: f64, x: f64 },
}

impl Rank1Measure {
    pub fn new(k: f64, x: f64) -> Result<Self> {
        let p = Rank1Params::new(k)?;
        if p.k() == 0.0 || x == 0.0 {
            Ok(Self::Atom { at: x })
        } else {
            Ok(Self::Density { k: p.k(), x })
        }
    }
}

/// The rank-one constants `(v_e, v_σ)` in the closed form
/// `Γ(2k+1)/(2^k Γ(k+1)) · i^{∓k}`.
///
/// This closed form corresponds to the weight `|x|^{2k}`; with roots
/// normalized to `|α|² = 2` the limits of the field carry an extra `2^k`,
/// see [`rank1_v_normalized`].
pub fn rank1_v(k: f64) -> Result<(Complex64, Complex64)> {
    let p = Rank1Params::new(k)?;
    let k = p.k();
    let modulus = (ln_gamma(2.0 * k + 1.0) - k * std::f64::consts::LN_2 - ln_gamma(k + 1.0)).exp();
    Ok((
        Complex64::from_polar(modulus, -k * FRAC_PI_2),
        Complex64::from_polar(modulus, k * FRAC_PI_2),
    ))
}

/// Rank-one limits `(v_e, v_σ)` for the weight `w_k(x) = |√2 x|^{2k}` used
/// throughout this crate: `Γ(2k+1)/Γ(k+1) · i^{∓k}`.
pub fn rank1_v_normalized(k: f64) -> Result<(Complex64, Complex64)> {
    let (ve, vs) = rank1_v(k)?;
    let scale = 2f64.powf(k);
    Ok((ve * scale, vs * scale))
}
