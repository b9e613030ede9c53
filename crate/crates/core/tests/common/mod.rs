//! Reference computations used by the integration tests. Everything here is
//! deliberately built from scratch (tanh–sinh quadrature, explicit
//! densities, finite differences) so it shares no code path with the crate.
#![allow(dead_code)]

use num_complex::Complex64;
use statrs::function::gamma::ln_gamma;

/// Tanh–sinh rule on `[a, b]`; tolerates integrable endpoint singularities.
pub fn tanh_sinh<F: Fn(f64) -> f64>(a: f64, b: f64, f: F) -> f64 {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let step = 1.0 / 64.0;
    let mut sum = 0.0;
    let mut j = 0i64;
    loop {
        let t = j as f64 * step;
        let u = std::f64::consts::FRAC_PI_2 * t.sinh();
        let x = u.tanh();
        let w = std::f64::consts::FRAC_PI_2 * t.cosh() / u.cosh().powi(2);
        if w < 1e-300 || t > 6.0 {
            break;
        }
        // distance to each end computed without cancellation
        let d = h / (u.exp() * u.cosh());
        let mut add = 0.0;
        for (xi, near) in [(c + h * x, b - d), (c - h * x, a + d)] {
            let xi = if x > 0.999 { near } else { xi };
            if xi > a && xi < b {
                let v = f(xi);
                if v.is_finite() {
                    add += v;
                }
            }
        }
        if j == 0 {
            add *= 0.5;
        }
        sum += w * add;
        j += 1;
    }
    sum * h * step
}

pub fn tanh_sinh_c<F: Fn(f64) -> Complex64>(a: f64, b: f64, f: F) -> Complex64 {
    Complex64::new(tanh_sinh(a, b, |x| f(x).re), tanh_sinh(a, b, |x| f(x).im))
}

/// Nodes and weights of composite Gauss–Legendre (5 points per panel).
pub fn gl_nodes(a: f64, b: f64, panels: usize) -> Vec<(f64, f64)> {
    const X: [f64; 5] = [0.0, -0.538_469_310_105_683, 0.538_469_310_105_683, -0.906_179_845_938_664, 0.906_179_845_938_664];
    const W: [f64; 5] = [
        0.568_888_888_888_888_9,
        0.478_628_670_499_366_5,
        0.478_628_670_499_366_5,
        0.236_926_885_056_189_1,
        0.236_926_885_056_189_1,
    ];
    let h = (b - a) / panels as f64;
    let mut out = Vec::with_capacity(5 * panels);
    for p in 0..panels {
        let m = a + (p as f64 + 0.5) * h;
        for (x, w) in X.iter().zip(W) {
            out.push((m + 0.5 * h * x, 0.5 * h * w));
        }
    }
    out
}

/// Plain composite Gauss–Legendre (5 points) with `panels` panels.
pub fn panels_c<F: Fn(f64) -> Complex64>(a: f64, b: f64, panels: usize, f: F) -> Complex64 {
    gl_nodes(a, b, panels).into_iter().map(|(t, w)| f(t) * w).sum()
}

/// Rank-one kernel from its representing measure,
/// `E_k(x, y) = c∫_{−1}^{1} e^{rxy}(1−r)^{k−1}(1+r)^k dr`, for `k > 0`.
pub fn rank1_kernel_by_measure(k: f64, x: f64, y: Complex64) -> Complex64 {
    let c = (ln_gamma(k + 0.5) - ln_gamma(0.5) - ln_gamma(k)).exp();
    // v = (1−r)^k absorbs the (1−r)^{k−1} endpoint singularity, which f64
    // cannot resolve near r = 1 when k < 1
    let f = |v: f64| {
        let s = v.powf(1.0 / k);
        (y * ((1.0 - s) * x)).exp() * (2.0 - s).powf(k)
    };
    tanh_sinh_c(0.0, 2f64.powf(k), f) * (c / k)
}

/// `lim_{t→∞} t^k e^{−t x y} E_k(t x, y)` in rank one, from the
/// large-argument behaviour `₁F₁(a, b, −u) ~ Γ(b)/Γ(b−a) u^{−a}`.
pub fn rank1_halfplane_limit(k: f64, x: f64, y: f64) -> f64 {
    (ln_gamma(2.0 * k + 1.0) - ln_gamma(k + 1.0)).exp() / (2.0 * x * y).powf(k)
}

/// Planar `w_k` for roots `√2(−sin(jπ/m), cos(jπ/m))` with per-root `k`.
pub fn dihedral_weight(m: usize, ks: &[f64], p: [f64; 2]) -> f64 {
    (0..m)
        .map(|j| {
            let a = j as f64 * std::f64::consts::PI / m as f64;
            let ip = std::f64::consts::SQRT_2 * (-a.sin() * p[0] + a.cos() * p[1]);
            ip.abs().powf(2.0 * ks[j])
        })
        .product()
}

/// `c_k = ∫_{ℝ²} e^{−|x|²/2} w_k(x) dx` for the dihedral group of order `2m`
/// by tanh–sinh on every arc between walls and on the radius.
pub fn dihedral_mehta(m: usize, ks: &[f64]) -> f64 {
    let gamma: f64 = ks.iter().sum();
    let radial = tanh_sinh(0.0, 1.0, |s| {
        // r = s/(1−s)
        let r = s / (1.0 - s);
        (-0.5 * r * r).exp() * r.powf(2.0 * gamma + 1.0) / (1.0 - s).powi(2)
    });
    let arc = std::f64::consts::PI / m as f64;
    let mut ang = 0.0;
    for j in 0..2 * m {
        // walls at φ = jπ/m (the root at angle jπ/m + π/2 is normal to it)
        let lo = j as f64 * arc;
        ang += tanh_sinh(lo, lo + arc, |phi| dihedral_weight(m, ks, [phi.cos(), phi.sin()]));
    }
    radial * ang
}

/// `μ_x^k([−|x|, u])` through the regularized incomplete beta function.
pub fn rank1_cdf_by_beta(k: f64, x: f64, u: f64) -> f64 {
    let a = x.abs();
    let r = (u / a).clamp(-1.0, 1.0);
    if x > 0.0 {
        // mass of (1−r)^{k−1}(1+r)^k on [−1, r]: p = (1+r)/2 ~ Beta(k+1, k)
        statrs::function::beta::beta_reg(k + 1.0, k, 0.5 * (1.0 + r))
    } else {
        // reflected measure
        1.0 - statrs::function::beta::beta_reg(k + 1.0, k, 0.5 * (1.0 - r))
    }
}

/// Dunkl operator applied to `f` at `x` with central differences:
/// `∂_ξ f(x) + Σ_α k(α)⟨α,ξ⟩(f(x) − f(σ_α x))/⟨α,x⟩`.
pub fn dunkl_fd<F: Fn(&[f64]) -> Complex64>(f: F, x: &[f64], xi: &[f64], roots: &[Vec<f64>], ks: &[f64]) -> Complex64 {
    let h = 1e-4;
    let shift = |s: f64| -> Vec<f64> { x.iter().zip(xi).map(|(a, b)| a + s * b).collect() };
    // fourth-order central difference
    let d = (f(&shift(-2.0 * h)) - f(&shift(-h)) * 8.0 + f(&shift(h)) * 8.0 - f(&shift(2.0 * h))) / (12.0 * h);
    let fx = f(x);
    let mut s = d;
    for (a, &k) in roots.iter().zip(ks) {
        let ax: f64 = a.iter().zip(x).map(|(p, q)| p * q).sum();
        let aa: f64 = a.iter().map(|p| p * p).sum();
        let sx: Vec<f64> = x.iter().zip(a).map(|(p, q)| p - 2.0 * ax / aa * q).collect();
        let axi: f64 = a.iter().zip(xi).map(|(p, q)| p * q).sum();
        s += (fx - f(&sx)) * (k * axi / ax);
    }
    s
}

/// Rank-one Wiener average `(1/n)∫_{−n}^{n}|E_k(ix, ξ)|²dξ`, integrand from
/// the measure.
pub fn rank1_wiener_by_measure(k: f64, x: f64, n: f64) -> f64 {
    let panels = (8.0 * n * x.abs()).ceil() as usize + 8;
    let f = |xi: f64| Complex64::new(rank1_kernel_by_measure(k, x, Complex64::new(0.0, xi)).norm_sqr(), 0.0);
    panels_c(-n, n, panels, f).re / n
}

/// Rank-one heat kernel from the measure-based kernel, with
/// `w_k(x) = |√2 x|^{2k}` and `c_k = 2^{2k+1/2}Γ(k+1/2)`.
pub fn rank1_heat_by_measure(k: f64, t: f64, x: f64, y: f64) -> f64 {
    let ck = ((2.0 * k + 0.5) * std::f64::consts::LN_2 + ln_gamma(k + 0.5)).exp();
    let s = 1.0 / (2.0 * t);
    let e = rank1_kernel_by_measure(k, s * x, Complex64::new(y, 0.0)).re;
    (2.0 * t).powf(-k - 0.5) / ck * (-(x * x + y * y) / (4.0 * t)).exp() * e
}
