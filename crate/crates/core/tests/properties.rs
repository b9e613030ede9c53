//! Property tests for the structural invariants of each module.

use dunkl_core::asymptotics::{matrix_a, matrix_a_tilde};
use dunkl_core::curve::AdmissibleCurve;
use dunkl_core::dunkl::{kernel_polynomial, kernel_series};
use dunkl_core::groups::{
    chamber_test, cone_parameter, dot, generate_group, make_root_system, mehta_constant, weight, Family,
    ReflectionGroup, RootSystem,
};
use dunkl_core::heat::{heat_kernel, HeatQuery};
use dunkl_core::specfun::{rank1_kernel, rank1_kernel_both, rank1_v, si_ci, gamma_fn};
use std::f64::consts::TAU;

use num_complex::Complex64;
use proptest::prelude::*;

const TOL: f64 = 1e-12;

fn system(idx: usize, k1: f64, k2: f64) -> (RootSystem, ReflectionGroup) {
    let (fam, ks) = match idx {
        0 => (Family::Z2N(1), vec![k1]),
        1 => (Family::Z2N(2), vec![k1, k2]),
        2 => (Family::Dihedral(3), vec![k1]),
        3 => (Family::Dihedral(4), vec![k1, k2]),
        4 => (Family::Dihedral(5), vec![k1]),
        _ => (Family::Dihedral(6), vec![k1, k2]),
    };
    let rs = make_root_system(fam, &ks).unwrap();
    let g = generate_group(&rs).unwrap();
    (rs, g)
}

fn cvec(v: &[f64]) -> Vec<Complex64> {
    v.iter().map(|&a| Complex64::new(a, 0.0)).collect()
}

fn ivec(v: &[f64]) -> Vec<Complex64> {
    v.iter().map(|&a| Complex64::new(0.0, a)).collect()
}

fn point(dim: usize, a: f64, r: f64) -> Vec<f64> {
    if dim == 1 {
        vec![r * a.cos().signum() * a.cos().abs().max(0.1)]
    } else {
        vec![r * a.cos(), r * a.sin()]
    }
}

fn series(rs: &RootSystem, x: &[Complex64], y: &[Complex64]) -> Complex64 {
    kernel_series(rs, x, y, TOL, 40).unwrap().value
}

/// A point of the open chamber from an angle fraction and radius.
fn chamber_point(rs: &RootSystem, g: &ReflectionGroup, a: f64, r: f64) -> Vec<f64> {
    let p = point(rs.dim(), a, r);
    let (_, c) = g.to_chamber(rs, &p);
    c
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, ..ProptestConfig::default() })]

    #[test]
    fn weight_is_invariant_and_homogeneous(idx in 0usize..6, k1 in 0.0..2.0f64, k2 in 0.0..2.0f64,
                                           a in 0.0..TAU, r in 0.2..2.0f64, lam in 0.1..5.0f64) {
        let (rs, g) = system(idx, k1, k2);
        let x = point(rs.dim(), a, r);
        let w = weight(&rs, &x);
        for h in 0..g.order() {
            let wg = weight(&rs, &g.apply(h, &x));
            prop_assert!((wg - w).abs() <= 1e-10 * w.max(1e-300));
        }
        let gamma: f64 = rs.multiplicities().iter().sum();
        let xl: Vec<f64> = x.iter().map(|v| v * lam).collect();
        prop_assert!((weight(&rs, &xl) - lam.powf(2.0 * gamma) * w).abs() <= 1e-10 * lam.powf(2.0 * gamma) * w);
    }

    #[test]
    fn reflections_are_involutions(idx in 0usize..6) {
        let (rs, _) = system(idx, 1.0, 1.0);
        for r in 0..rs.num_positive_roots() {
            let m = rs.reflection_matrix(r);
            let sq = &m * &m;
            let id = nalgebra::DMatrix::<f64>::identity(rs.dim(), rs.dim());
            prop_assert!((sq - id).abs().max() < 1e-12);
        }
    }

    #[test]
    fn cone_membership_implies_chamber(idx in 0usize..6, a in 0.0..TAU, r in 0.1..3.0f64, delta in 0.0..1.4f64) {
        let (rs, _) = system(idx, 1.0, 1.0);
        let x = point(rs.dim(), a, r);
        if chamber_test(&rs, &x, Some(delta)) {
            prop_assert!(chamber_test(&rs, &x, None));
            prop_assert!(cone_parameter(&rs, &x) > delta);
        }
    }

    #[test]
    fn kernel_symmetry_invariance_homogeneity(idx in 0usize..6, k1 in 0.0..2.0f64, k2 in 0.0..2.0f64,
                                              a in 0.0..TAU, b in 0.0..TAU, rx in 0.1..1.8f64,
                                              ry in 0.1..1.8f64, lam in -1.5..1.5f64) {
        let (rs, g) = system(idx, k1, k2);
        let x = point(rs.dim(), a, rx);
        let y = point(rs.dim(), b, ry);
        let e = series(&rs, &cvec(&x), &cvec(&y));
        prop_assert!((series(&rs, &cvec(&y), &cvec(&x)) - e).norm() <= 2.0 * TOL * e.norm().max(1.0));
        for h in 0..g.order() {
            let eg = series(&rs, &cvec(&g.apply(h, &x)), &cvec(&g.apply(h, &y)));
            prop_assert!((eg - e).norm() <= 2.0 * TOL * e.norm().max(1.0));
        }
        let xl: Vec<f64> = x.iter().map(|v| v * lam).collect();
        let yl: Vec<f64> = y.iter().map(|v| v * lam).collect();
        let l = series(&rs, &cvec(&xl), &cvec(&y));
        let r = series(&rs, &cvec(&x), &cvec(&yl));
        prop_assert!((l - r).norm() <= 2.0 * TOL * l.norm().max(1.0));
    }

    #[test]
    fn oscillatory_kernel_bounded_and_conjugate(idx in 0usize..6, k1 in 0.0..2.0f64, k2 in 0.0..2.0f64,
                                                a in 0.0..TAU, b in 0.0..TAU, rx in 0.1..2.0f64, ry in 0.1..2.0f64) {
        let (rs, _) = system(idx, k1, k2);
        let x = point(rs.dim(), a, rx);
        let y = point(rs.dim(), b, ry);
        let e = series(&rs, &ivec(&x), &cvec(&y));
        prop_assert!(e.norm() <= 1.0 + 2.0 * TOL);
        let xm: Vec<f64> = x.iter().map(|v| -v).collect();
        let em = series(&rs, &ivec(&xm), &cvec(&y));
        prop_assert!((em - e.conj()).norm() <= 2.0 * TOL);
    }

    #[test]
    fn intertwined_powers_are_real_and_bounded(idx in 0usize..6, k1 in 0.0..2.0f64, k2 in 0.0..2.0f64,
                                               a in 0.0..TAU, b in 0.0..TAU, n in 1u32..12) {
        let (rs, _) = system(idx, k1, k2);
        let x = point(rs.dim(), a, 1.3);
        let y = point(rs.dim(), b, 0.8);
        // homogeneous part n of the kernel polynomial is V(⟨·,y⟩^n)/n!
        let p = kernel_polynomial(&rs, &cvec(&y), n).unwrap().homogeneous_part(n);
        let fact: f64 = (1..=n).map(f64::from).product();
        let v = p.eval_real(&x) * fact;
        let bound = (1.3f64 * 0.8).powi(n as i32);
        prop_assert!(v.im.abs() <= 1e-10 * bound.max(1.0));
        prop_assert!(v.re.abs() <= bound * (1.0 + 1e-10));
    }

    #[test]
    fn rank_one_kernel_oscillatory_bound(k in 0.0..4.0f64, x in -6.0..6.0f64, y in -6.0..6.0f64) {
        let e = rank1_kernel(k, Complex64::new(0.0, x), Complex64::new(y, 0.0)).unwrap();
        prop_assert!(e.norm() <= 1.0 + 1e-12);
    }

    #[test]
    fn si_ci_obey_two_over_tau(lt in -1.0..4.0f64) {
        let tau = 10f64.powf(lt);
        let (si, ci) = si_ci(tau).unwrap();
        prop_assert!(si.abs() <= 2.0 / tau);
        prop_assert!(ci.abs() <= 2.0 / tau);
    }

    #[test]
    fn system_matrix_sparsity_and_tilde_bound(idx in 2usize..6, k1 in 0.1..2.0f64, k2 in 0.1..2.0f64,
                                              a in 0.05..0.95f64, b in 0.05..0.95f64, t in 0.5..200.0f64) {
        let (rs, g) = system(idx, k1, k2);
        let dir = chamber_point(&rs, &g, 0.3 + a, 1.0);
        let y = chamber_point(&rs, &g, 0.3 + b, 1.2);
        prop_assume!(cone_parameter(&rs, &dir) > 0.05 && cone_parameter(&rs, &y) > 0.05);
        let curve = AdmissibleCurve::ray(&rs, &dir).unwrap();
        let am = matrix_a(&curve, &g, &rs, &y, t).unwrap();
        for row in 0..g.order() {
            let mut want: Vec<usize> = (0..rs.num_positive_roots()).map(|r| g.left_reflect(r, row)).collect();
            want.sort_unstable();
            want.dedup();
            prop_assert_eq!(am.row_support(row), want);
        }
        let at = matrix_a_tilde(&curve, &g, &rs, &y, t).unwrap();
        let x = curve.point(t);
        let mut phi_min = f64::INFINITY;
        for (r, al) in rs.positive_roots().iter().enumerate() {
            for h in 0..g.order() {
                let _ = r;
                phi_min = phi_min.min(dot(al, &x) * dot(al, &g.apply(h, &y)).abs());
            }
        }
        let ksum: f64 = rs.multiplicities().iter().sum();
        prop_assert!(at.norm_inf() <= ksum * 4.0 / phi_min);
    }

    #[test]
    fn heat_kernel_group_invariant(idx in 0usize..4, k1 in 0.0..2.0f64, k2 in 0.0..2.0f64,
                                   a in 0.0..TAU, b in 0.0..TAU, t in 0.1..2.0f64) {
        let (rs, g) = system(idx, k1, k2);
        let x = point(rs.dim(), a, 1.1);
        let y = point(rs.dim(), b, 0.7);
        let v = heat_kernel(&rs, &g, &HeatQuery::new(t, x.clone(), y.clone()).unwrap()).unwrap();
        for h in 0..g.order() {
            let q = HeatQuery::new(t, g.apply(h, &x), g.apply(h, &y)).unwrap();
            let vg = heat_kernel(&rs, &g, &q).unwrap();
            prop_assert!((vg - v).abs() <= 1e-10 * v);
        }
    }
}

#[test]
fn mehta_constant_trivial_multiplicity_is_gaussian_mass() {
    for (fam, ks) in [
        (Family::Z2N(1), vec![0.0]),
        (Family::Z2N(3), vec![0.0; 3]),
        (Family::Dihedral(3), vec![0.0]),
        (Family::Dihedral(4), vec![0.0, 0.0]),
        (Family::Dihedral(7), vec![0.0]),
    ] {
        let rs = make_root_system(fam, &ks).unwrap();
        let want = (2.0 * std::f64::consts::PI).powf(0.5 * rs.dim() as f64);
        let got = mehta_constant(&rs).unwrap();
        assert!((got / want - 1.0).abs() < 1e-8, "{fam}: {got}");
    }
}

#[test]
fn rank_one_routes_agree_on_grid() {
    for i in 0..20 {
        let k = 0.05 + 3.95 * i as f64 / 19.0;
        for j in 0..20 {
            let u = -20.0 + 40.0 * j as f64 / 19.0;
            for z in [Complex64::new(u, 0.0), Complex64::new(0.0, u)] {
                let (b, m) = rank1_kernel_both(k, z, Complex64::new(1.0, 0.0)).unwrap();
                assert!((b - m).norm() <= 1e-10 * b.norm().max(m.norm()), "k = {k}, zw = {z}");
            }
        }
    }
}

#[test]
fn rank_one_constants_modulus_and_argument() {
    for k in [0.25, 0.5, 1.0, 1.5, 2.0, 3.0] {
        let (ve, vs) = rank1_v(k).unwrap();
        let m = gamma_fn(2.0 * k + 1.0).unwrap() / (2f64.powf(k) * gamma_fn(k + 1.0).unwrap());
        assert!((ve.norm() / m - 1.0).abs() < 1e-12 && (vs.norm() / m - 1.0).abs() < 1e-12);
        let wrap = |a: f64| (a + std::f64::consts::PI).rem_euclid(2.0 * std::f64::consts::PI) - std::f64::consts::PI;
        assert!(wrap(ve.arg() + k * std::f64::consts::FRAC_PI_2).abs() < 1e-12);
        assert!(wrap(vs.arg() - k * std::f64::consts::FRAC_PI_2).abs() < 1e-12);
    }
}
