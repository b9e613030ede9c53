use dunkl_core::asymptotics::{complex_ray_limit, invariance_suite, ExtractOptions, IntegrationOptions};
use dunkl_core::curve::AdmissibleCurve;
use dunkl_core::dunkl::{eigen_residual, kernel_series, MAX_SERIES_DEGREE};
use dunkl_core::groups::{gamma_index, is_regular, mehta_constant};
use dunkl_core::heat::{continuity_slope, heat_ratios_to_csv, shorttime_ratio, wiener_scan, WienerOptions};
use dunkl_core::specfun::rank1_kernel;
use dunkl_core::DunklError;
use num_complex::Complex64;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::{check_point, check_positive, section, RunConfig};
use crate::error::CliError;
use crate::output::{fmt_f, Output, Table};

const SCHEMA: u32 = 1;

fn cplx(v: &[f64]) -> Vec<Complex64> {
    v.iter().map(|&a| Complex64::new(a, 0.0)).collect()
}

fn cjson(z: Complex64) -> Value {
    json!({ "re": z.re, "im": z.im })
}

pub fn group_info(cfg: &RunConfig) -> Result<Output, CliError> {
    let (rs, g) = cfg.group.build()?;
    let ck = mehta_constant(&rs)?;
    let d = rs.descriptor();
    let gamma = gamma_index(&rs);
    let json = json!({
        "schema": SCHEMA,
        "command": "group-info",
        "group": d,
        "order": g.order(),
        "gamma": gamma,
        "orbits": rs.num_orbits(),
        "mehta_constant": ck,
    });
    let mut t = Table::new(&["field", "value"]);
    t.push(vec!["family".into(), rs.family().to_string()]);
    t.push(vec!["order".into(), g.order().to_string()]);
    t.push(vec!["gamma".into(), fmt_f(gamma)]);
    t.push(vec!["orbits".into(), rs.num_orbits().to_string()]);
    for (i, k) in rs.orbit_multiplicities().iter().enumerate() {
        t.push(vec![format!("k_{i}"), fmt_f(*k)]);
    }
    t.push(vec!["mehta_constant".into(), fmt_f(ck)]);
    for (i, a) in rs.positive_roots().iter().enumerate() {
        let coords: Vec<String> = a.iter().map(|v| fmt_f(*v)).collect();
        t.push(vec![format!("root_{i}"), coords.join(" ")]);
    }
    Ok(Output { json, table: t })
}

pub fn kernel(cfg: &RunConfig) -> Result<Output, CliError> {
    let p = section(&cfg.kernel, "kernel")?;
    let (rs, _) = cfg.group.build()?;
    let n = rs.dim();
    check_positive("kernel.tol", p.tol)?;
    if p.pairs.is_empty() {
        return Err(CliError::Config("kernel.pairs is empty".into()));
    }
    for (i, pr) in p.pairs.iter().enumerate() {
        check_point(&format!("kernel.pairs[{i}].x"), &pr.x, n)?;
        check_point(&format!("kernel.pairs[{i}].y"), &pr.y, n)?;
    }
    let rank_one = n == 1;
    let rows = p
        .pairs
        .par_iter()
        .map(|pr| -> Result<_, DunklError> {
            let y = cplx(&pr.y);
            let sv = kernel_series(&rs, &cplx(&pr.x), &y, p.tol, MAX_SERIES_DEGREE)?;
            let mut res = 0.0f64;
            for i in 0..n {
                let mut xi = vec![0.0; n];
                xi[i] = 1.0;
                res = res.max(eigen_residual(&rs, &pr.x, &y, &xi, p.tol, MAX_SERIES_DEGREE)?);
            }
            let oracle = if rank_one {
                Some(rank1_kernel(rs.orbit_multiplicities()[0], Complex64::new(pr.x[0], 0.0), y[0])?)
            } else {
                None
            };
            Ok((sv, res, oracle))
        })
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| match e {
            DunklError::Regime(m) => DunklError::Regime(format!("{m}; use `dunkl asym` for large |x||y|")),
            other => other,
        })?;
    let mut header: Vec<String> = (0..n).map(|i| format!("x_{i}")).collect();
    header.extend((0..n).map(|i| format!("y_{i}")));
    header.extend(["re", "im", "tail_bound", "eigen_residual", "oracle_re", "oracle_im"].map(String::from));
    let mut t = Table::from_header(header);
    let mut jrows = Vec::new();
    for (pr, (sv, res, oracle)) in p.pairs.iter().zip(&rows) {
        let mut r: Vec<String> = pr.x.iter().chain(&pr.y).map(|v| fmt_f(*v)).collect();
        r.extend([fmt_f(sv.value.re), fmt_f(sv.value.im), fmt_f(sv.tail), fmt_f(*res)]);
        match oracle {
            Some(o) => r.extend([fmt_f(o.re), fmt_f(o.im)]),
            None => r.extend([String::new(), String::new()]),
        }
        t.push(r);
        jrows.push(json!({
            "x": pr.x,
            "y": pr.y,
            "value": cjson(sv.value),
            "tail_bound": sv.tail,
            "degree": sv.degree,
            "eigen_residual": res,
            "oracle": oracle.map(cjson),
        }));
    }
    let json = json!({ "schema": SCHEMA, "command": "kernel", "group": rs.descriptor(), "rows": jrows });
    Ok(Output { json, table: t })
}

pub fn asym(cfg: &RunConfig) -> Result<Output, CliError> {
    let p = section(&cfg.asym, "asym")?;
    let (rs, g) = cfg.group.build()?;
    let n = rs.dim();
    if p.y.is_empty() || p.curves.is_empty() {
        return Err(CliError::Config("asym needs at least one y and one curve".into()));
    }
    for (i, y) in p.y.iter().enumerate() {
        check_point(&format!("asym.y[{i}]"), y, n)?;
    }
    check_positive("asym.t_final", p.t_final)?;
    check_positive("asym.rtol", p.rtol)?;
    if p.n_checkpoints == 0 {
        return Err(CliError::Config("asym.n_checkpoints must be at least 1".into()));
    }
    let curves = p
        .curves
        .iter()
        .map(|k| AdmissibleCurve::from_kind(&rs, k))
        .collect::<Result<Vec<_>, _>>()
        .map_err(CliError::config)?;
    if let Some(h) = &p.half_plane {
        check_point("asym.half_plane.x", &h.x, n)?;
        check_positive("asym.half_plane.t_final", h.t_final)?;
        if h.thetas.iter().any(|t| !(0.0..=std::f64::consts::FRAC_PI_2).contains(t)) {
            return Err(CliError::Config("asym.half_plane.thetas must lie in [0, π/2]".into()));
        }
    }
    let integration = IntegrationOptions { rtol: p.rtol, ..IntegrationOptions::default() };
    let opts = ExtractOptions { t_final: p.t_final, n_checkpoints: p.n_checkpoints, integration, ..ExtractOptions::default() };
    let rep = invariance_suite(&g, &rs, &p.y, &curves, &opts)?;

    let gamma = gamma_index(&rs);
    let c0 = (2.0 * std::f64::consts::PI).powf(0.5 * n as f64);
    let mehta = mehta_constant(&rs).ok().map(|ck| {
        // i^{−γ} c_k / c₀
        let predicted = Complex64::from_polar(ck / c0, -gamma * std::f64::consts::FRAC_PI_2);
        let ve = rep.runs[0].v.0[0];
        json!({ "c_k": ck, "c_0": c0, "predicted_v_e": cjson(predicted), "v_e": cjson(ve), "gap": (ve - predicted).norm() })
    });
    let half = match &p.half_plane {
        Some(h) => {
            let lims = h
                .thetas
                .par_iter()
                .map(|&th| complex_ray_limit(&g, &rs, &h.x, &p.y[0], th, h.t_final, &integration))
                .collect::<Result<Vec<_>, _>>()?;
            Some(
                lims.iter()
                    .map(|l| {
                        json!({
                            "theta": l.theta,
                            "t0": l.t0,
                            "t_final": l.t_final,
                            "limit": cjson(l.limit),
                            "raw": cjson(l.raw),
                            "acceleration_delta": l.acceleration_delta,
                        })
                    })
                    .collect::<Vec<_>>(),
            )
        }
        None => None,
    };
    let json = json!({
        "schema": SCHEMA,
        "command": "asym",
        "group": rs.descriptor(),
        "order": g.order(),
        "gamma": gamma,
        "v": rep.runs[0].v,
        "deltas": {
            "max_pair_discrepancy": rep.max_pair_discrepancy,
            "max_inverse_asymmetry": rep.max_inverse_asymmetry,
            "max_modulus_asymmetry": rep.max_modulus_asymmetry,
            "min_modulus": rep.min_modulus,
        },
        "mehta_check": mehta,
        "half_plane": half,
        "runs": rep.runs,
    });
    let mut t = Table::new(&["run", "t", "g", "re", "im"]);
    for (i, r) in rep.runs.iter().enumerate() {
        for c in &r.checkpoints {
            for (gi, f) in c.f.0.iter().enumerate() {
                t.push(vec![i.to_string(), fmt_f(c.t), gi.to_string(), fmt_f(f.re), fmt_f(f.im)]);
            }
        }
    }
    Ok(Output { json, table: t })
}

pub fn heat(cfg: &RunConfig) -> Result<Output, CliError> {
    let p = section(&cfg.heat, "heat")?;
    let (rs, g) = cfg.group.build()?;
    check_point("heat.x", &p.x, rs.dim())?;
    check_point("heat.y", &p.y, rs.dim())?;
    if p.t_grid.is_empty() || p.t_grid.iter().any(|t| !(*t > 0.0)) || p.t_grid.windows(2).any(|w| w[1] >= w[0]) {
        return Err(CliError::Config("heat.t_grid must be positive and strictly decreasing".into()));
    }
    let rows = shorttime_ratio(&rs, &g, &p.x, &p.y, &p.t_grid)?;
    let mut buf = Vec::new();
    heat_ratios_to_csv(&rows, &mut buf)?;
    let table = Table::from_csv(&buf)?;
    let json = json!({ "schema": SCHEMA, "command": "heat", "group": rs.descriptor(), "x": p.x, "y": p.y, "rows": rows });
    Ok(Output { json, table })
}

pub fn wiener(cfg: &RunConfig) -> Result<Output, CliError> {
    let p = section(&cfg.wiener, "wiener")?;
    let (rs, g) = cfg.group.build()?;
    check_point("wiener.x", &p.x, rs.dim())?;
    if !is_regular(&rs, &p.x) {
        return Err(CliError::Config(format!("wiener.x = {:?} lies on a reflecting hyperplane", p.x)));
    }
    if p.n_grid.is_empty() || p.n_grid.iter().any(|v| !(*v > 0.0)) || p.n_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(CliError::Config("wiener.n_grid must be positive and strictly increasing".into()));
    }
    let scan = wiener_scan(&rs, &g, &p.x, &p.n_grid, &WienerOptions::default())?;
    let slope = if scan.n_grid.len() >= 4 { Some(continuity_slope(&scan)?) } else { None };
    let mut t = Table::new(&["n", "average"]);
    for (n, a) in scan.n_grid.iter().zip(&scan.averages) {
        t.push(vec![fmt_f(*n), fmt_f(*a)]);
    }
    t.push(vec!["slope".into(), slope.map(fmt_f).unwrap_or_default()]);
    let json = json!({
        "schema": SCHEMA,
        "command": "wiener",
        "group": rs.descriptor(),
        "x": scan.x,
        "n_grid": scan.n_grid,
        "averages": scan.averages,
        "slope": slope,
    });
    Ok(Output { json, table: t })
}
