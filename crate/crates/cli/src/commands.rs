use std::fmt::Write as _;

use ellres::geom::{elliptic_genus, localization_sum};
use ellres::qtheta::QSeries;
use ellres::residue::{
    cn_direct, cn_localization, cn_quadrature, route_error, virtual_normalize, IntegrandSpec,
};
use ellres::weights::{sample_generic_point, SamplerOptions};
use ellres::Complex;
use serde_json::{json, Value};

use crate::args::{GenusArgs, Method, ResidueArgs};
use crate::input::{fmt_complex, load_config, load_model, CliResult, YSpec};

type C = Complex<f64>;

fn pair(z: C) -> Value {
    json!([z.re, z.im])
}

fn coeff_lines(out: &mut String, series: &QSeries<f64>) {
    for (k, c) in series.coeffs().iter().enumerate() {
        let _ = writeln!(out, "q^{k:<3} {}", fmt_complex(*c));
    }
}

pub fn genus(a: &GenusArgs) -> CliResult<String> {
    let model = load_model(&a.model)?;
    let y_spec: YSpec = a.y.parse()?;
    let y = y_spec.resolve(a.seed)?;
    let p = sample_generic_point(
        a.seed,
        model.lattice_rank,
        y,
        &model.separation_constraints(),
        &SamplerOptions::default(),
    )?;
    let v = if a.raw {
        localization_sum(&model, &p, a.q_order)?
    } else {
        elliptic_genus(&model, &p, a.q_order)?
    };
    if a.json {
        let report = json!({
            "model": a.model.display().to_string(),
            "fixed_points": model.points.len(),
            "lattice_rank": model.lattice_rank,
            "y_spec": y_spec.to_string(),
            "y": pair(y),
            "t": p.t.iter().copied().map(pair).collect::<Vec<_>>(),
            "seed": a.seed,
            "q_order": a.q_order,
            "normalized": !a.raw,
            "coefficients": v.series.coeffs().iter().copied().map(pair).collect::<Vec<_>>(),
            "scale": v.scale,
            "relative_size": v.relative_size(),
        });
        return Ok(serde_json::to_string_pretty(&report).expect("json") + "\n");
    }
    let mut out = String::new();
    let _ = writeln!(
        out,
        "model {} ({} fixed points, lattice rank {})",
        a.model.display(),
        model.points.len(),
        model.lattice_rank
    );
    let _ = writeln!(out, "y = {}", fmt_complex(y));
    for (i, t) in p.t.iter().enumerate() {
        let _ = writeln!(out, "t{i} = {}", fmt_complex(*t));
    }
    coeff_lines(&mut out, &v.series);
    let _ = writeln!(out, "scale {:.14e}", v.scale);
    let _ = writeln!(out, "relative size {:.3e}", v.relative_size());
    Ok(out)
}

struct MethodResult {
    method: Method,
    series: QSeries<f64>,
    scale: Option<f64>,
}

fn method_name(m: Method) -> &'static str {
    match m {
        Method::Direct => "direct",
        Method::Quadrature => "quadrature",
        Method::Localization => "localization",
    }
}

pub fn residue(a: &ResidueArgs) -> CliResult<String> {
    let raw = load_config(&a.config)?;
    let y_spec: YSpec = a.y.parse()?;
    let y = y_spec.resolve(a.seed)?;
    let normalized = !raw.is_genuine();
    let cfg = virtual_normalize(&raw, y)?;
    let spec = IntegrandSpec::new(a.n, cfg, y);
    let methods = if a.all_methods {
        vec![Method::Direct, Method::Quadrature, Method::Localization]
    } else {
        vec![a.method]
    };
    let results = methods
        .into_iter()
        .map(|method| {
            let (series, scale) = match method {
                Method::Direct => {
                    let v = cn_direct(&spec, a.q_order)?;
                    (v.series, Some(v.scale))
                }
                Method::Quadrature => (cn_quadrature(&spec, a.q_order, a.points)?, None),
                Method::Localization => {
                    let v = cn_localization(&spec, a.q_order)?;
                    (v.series, Some(v.scale))
                }
            };
            Ok(MethodResult { method, series, scale })
        })
        .collect::<CliResult<Vec<_>>>()?;
    let scale = results.iter().filter_map(|r| r.scale).fold(0.0f64, f64::max);
    let mut deviation = None;
    if results.len() > 1 {
        let mut worst = 0.0f64;
        for i in 0..results.len() {
            for j in i + 1..results.len() {
                worst = worst.max(route_error(&results[i].series, &results[j].series, scale)?);
            }
        }
        deviation = Some(worst);
    }
    let relative = |s: &QSeries<f64>| if scale > 0.0 { s.max_abs() / scale } else { s.max_abs() };

    if a.json {
        let report = json!({
            "config": a.config.display().to_string(),
            "r_plus": raw.rank_plus(),
            "r_minus": raw.rank_minus(),
            "virtual_normalized": normalized,
            "n": a.n,
            "y_spec": y_spec.to_string(),
            "y": pair(y),
            "q_order": a.q_order,
            "points": a.points,
            "results": results.iter().map(|r| json!({
                "method": method_name(r.method),
                "coefficients": r.series.coeffs().iter().copied().map(pair).collect::<Vec<_>>(),
                "scale": r.scale,
                "relative_size": relative(&r.series),
            })).collect::<Vec<_>>(),
            "max_pairwise_deviation": deviation,
        });
        return Ok(serde_json::to_string_pretty(&report).expect("json") + "\n");
    }
    let mut out = String::new();
    let _ = writeln!(
        out,
        "config {} (r+ = {}, r- = {}{})",
        a.config.display(),
        raw.rank_plus(),
        raw.rank_minus(),
        if normalized { ", virtual roots normalized" } else { "" }
    );
    let _ = writeln!(out, "y = {}, n = {}", fmt_complex(y), a.n);
    for r in &results {
        let _ = writeln!(out, "[{}]", method_name(r.method));
        coeff_lines(&mut out, &r.series);
        if let Some(s) = r.scale {
            let _ = writeln!(out, "scale {s:.14e}");
        }
        let _ = writeln!(out, "relative size {:.3e}", relative(&r.series));
    }
    if let Some(d) = deviation {
        let _ = writeln!(out, "max pairwise deviation {d:.3e}");
    }
    Ok(out)
}
