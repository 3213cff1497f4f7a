//! The four commands. Each prints a config-echo header and `key = value`
//! lines to stdout and, with `--out`, writes its artifacts to that directory.

use std::fmt::Write as _;
use std::fs;

use serde_json::json;
use tandem_core::characteristic::{check_simple_real_eigenvalues, log_grid, trace_level_curves, CurveResolution};
use tandem_core::exact::{
    compare_grids, simulate_pn, solve_pn, solve_tau_inf, truncation_certificate, ErrorSummary, DEFAULT_MAX_ITER,
};
use tandem_core::harmonic::{assemble_ha_k, build_bound_certificate, build_h_a0, c_star, HarmonicFn, TAIL_RTOL};
use tandem_core::roots::build_root_catalog;
use tandem_core::{BoundCertificate, Error, ModelFile, ModelParams, RootCatalog};

use crate::format::{self, num};
use crate::{Command, Failure, RunConfig};

const MC_PATHS: u64 = 100_000;
const MC_STEP_CAP: u64 = 10_000_000;

/// Text for stdout plus files for the output directory.
struct Output {
    text: String,
    files: Vec<(&'static str, String)>,
}

impl Output {
    fn line(&mut self, key: &str, value: impl std::fmt::Display) {
        let _ = writeln!(self.text, "{key} = {value}");
    }
}

pub fn run(c: &RunConfig) -> Result<(), Failure> {
    let mut out = Output {
        text: format::header(c),
        files: Vec::new(),
    };
    let result = match c.command {
        Command::Validate => validate(c, &mut out),
        Command::Analyze => analyze(c, &mut out),
        Command::Approximate => approximate(c, &mut out),
        Command::Compare => compare(c, &mut out),
    };
    // partial reports are still useful when a check fails
    print!("{}", out.text);
    result?;
    if let Some(dir) = &c.out {
        fs::create_dir_all(dir)?;
        for (name, body) in &out.files {
            fs::write(dir.join(name), body)?;
        }
    }
    Ok(())
}

fn load(c: &RunConfig) -> Result<ModelParams, Failure> {
    let file = ModelFile::load(&c.model)?;
    let report = file.validate();
    if !report.inputs_ok() {
        return Err(Error::InvalidModel(report.messages.join("; ")).into());
    }
    if !report.is_stable() {
        let [a, b] = report.stability_margins;
        return Err(Error::Unstable(a, b).into());
    }
    Ok(file.into_params()?)
}

fn validate(c: &RunConfig, out: &mut Output) -> Result<(), Failure> {
    let file = ModelFile::load(&c.model)?;
    let report = file.validate();
    out.line("num_regimes", file.lam.len());
    out.line("stochastic_ok", report.stochastic_ok);
    out.line("irreducible_ok", report.irreducible_ok);
    out.line("aperiodic_ok", report.aperiodic_ok);
    out.line("rates_normalized_ok", report.rates_normalized_ok);
    let [s1, s2] = report.stability_margins;
    out.line("stability_margins", format!("{}, {}", num(s1), num(s2)));
    out.line("stable", report.is_stable());
    out.line("tridiagonal_strict", report.tridiagonal_strict);
    for m in &report.messages {
        out.line("message", m);
    }
    let mut json = json!({ "config": format::config_json(c), "report": report });
    if !report.inputs_ok() {
        out.line("status", "invalid");
        return Err(Error::InvalidModel(report.messages.join("; ")).into());
    }
    if !report.is_stable() {
        out.line("status", "unstable");
        return Err(Error::Unstable(s1, s2).into());
    }
    let params = file.into_params()?;
    let eigen = check_simple_real_eigenvalues(&params, &log_grid(1e-2, 5.0, 25));
    out.line("simple_real_eigenvalues", eigen.is_simple());
    out.line("min_eigen_gap", num(eigen.min_gap));
    let cat = build_root_catalog(&params, c.k, c.r)?;
    let f = &cat.flags;
    out.line("conj", f.conj);
    out.line("conj_sum", num(f.conj_sum));
    out.line("rho_distinct", f.rho_distinct);
    out.line("rho2_span_ok", f.rho2_span.as_ref().is_some_and(|s| s.ok));
    out.line("branch_spans_ok", f.branch_spans.iter().all(|s| s.ok));
    out.line("circle_spans_ok", f.circle_spans.iter().all(|s| s.ok));
    out.line("ones_span_ok", f.ones_span.ok);
    out.line("conjugation_closed", f.conjugation_closed);
    json["eigen"] = json!(eigen);
    json["flags"] = json!(f);
    out.files.push(("validation.json", format::json_text(&json)));
    if !f.conj {
        out.line("status", "unsupported");
        return Err(Error::Unsupported(format!(
            "conjugate assumption fails (sum {} is not negative)",
            num(f.conj_sum)
        ))
        .into());
    }
    out.line("status", "ok");
    Ok(())
}

fn catalog_json(c: &RunConfig, cat: &RootCatalog) -> serde_json::Value {
    json!({
        "config": format::config_json(c),
        "num_regimes": cat.num_regimes(),
        "K": cat.k,
        "R": cat.r,
        "rho1": format::point(&cat.rho1),
        "rho2": format::point(&cat.rho2),
        "alpha_star": format::points(&cat.alpha_star),
        "rho2_branches": format::points(&cat.rho2_branches),
        "rho1_branches": format::points(&cat.rho1_branches),
        "rho2_branch_families": cat.rho2_branch_families.iter().map(format::family).collect::<Vec<_>>(),
        "circle_families": cat.circle_families.iter().map(|f| {
            let mut v = format::family(&f.family);
            v["k"] = json!(f.k);
            v["j"] = json!(f.j);
            v
        }).collect::<Vec<_>>(),
        "points": cat.all_points().len(),
        "harmonic_functions": cat.harmonic_function_count(),
        "flags": cat.flags,
    })
}

fn analyze(c: &RunConfig, out: &mut Output) -> Result<(), Failure> {
    let params = load(c)?;
    let cat = build_root_catalog(&params, c.k, c.r)?;
    out.line("rho1", num(cat.rho1_value()));
    out.line("rho2", num(cat.rho2_value()));
    match cat.alpha_star.first() {
        Some(p) => out.line("alpha_star_1", num(p.alpha.re)),
        None => out.line("alpha_star_1", "none"),
    }
    out.line("points", cat.all_points().len());
    out.line("harmonic_functions", cat.harmonic_function_count());
    out.line("circle_families", cat.circle_families.len());
    out.line("conj", cat.flags.conj);
    out.line("conjugation_closed", cat.flags.conjugation_closed);
    let mut csv = format::header(c);
    csv.push_str("branch,alpha,beta\n");
    for j in 1..=params.num_regimes() {
        let samples = trace_level_curves(&params, j, CurveResolution::default());
        out.line(&format!("level_curve_branch_{j}"), samples.len());
        for s in samples {
            let _ = writeln!(csv, "{},{},{}", s.branch, num(s.alpha), num(s.beta));
        }
    }
    out.files.push(("catalog.json", format::json_text(&catalog_json(c, &cat))));
    out.files.push(("level_curves.csv", csv));
    Ok(())
}

/// The approximation selected by `K`: `h^{a,0}` for `K = 0`, else `h^{a*,K}`.
struct Fitted {
    kind: &'static str,
    function: HarmonicFn,
    cert: BoundCertificate,
    coefficients: Vec<tandem_core::C64>,
    condition: Option<f64>,
    warnings: Vec<String>,
}

fn fit(params: &ModelParams, cat: &RootCatalog) -> Result<Fitted, Failure> {
    if cat.k == 0 {
        let (function, cert) = build_h_a0(params, cat)?;
        return Ok(Fitted {
            kind: "h_a0",
            function,
            cert,
            coefficients: Vec::new(),
            condition: None,
            warnings: Vec::new(),
        });
    }
    let a = assemble_ha_k(params, cat)?;
    let (mut cert, _) = build_bound_certificate(params, cat)?;
    cert.c_star = Some(c_star(&a.function, TAIL_RTOL)?);
    Ok(Fitted {
        kind: "h_aK",
        function: a.function,
        cert,
        coefficients: a.coefficients,
        condition: Some(a.condition),
        warnings: a.warnings,
    })
}

fn opt(x: Option<f64>) -> String {
    x.map_or("none".to_string(), num)
}

fn approximate(c: &RunConfig, out: &mut Output) -> Result<(), Failure> {
    let params = load(c)?;
    let cat = build_root_catalog(&params, c.k, c.r)?;
    let f = fit(&params, &cat)?;
    out.line("approximation", f.kind);
    out.line("terms", f.function.terms().len());
    out.line("condition", opt(f.condition));
    for w in &f.warnings {
        out.line("warning", w);
    }
    let cert = &f.cert;
    out.line("c0", num(cert.c0));
    out.line("c1", num(cert.c1));
    out.line("c2", num(cert.c2));
    out.line("c9", opt(cert.c9));
    out.line("c10", opt(cert.c10));
    out.line("c11", opt(cert.c11));
    out.line("c_star", opt(cert.c_star));
    let body = json!({
        "config": format::config_json(c),
        "approximation": f.kind,
        "coefficients": f.coefficients.iter().map(|&z| format::complex(z)).collect::<Vec<_>>(),
        "condition": f.condition,
        "warnings": f.warnings,
        "function": format::function(&f.function),
    });
    out.files.push(("approximant.json", format::json_text(&body)));
    let cert_body = json!({ "config": format::config_json(c), "certificate": cert });
    out.files.push(("certificate.json", format::json_text(&cert_body)));
    Ok(())
}

fn summary_lines(out: &mut Output, prefix: &str, s: &ErrorSummary) {
    out.line(&format!("{prefix}cells"), s.cells);
    out.line(&format!("{prefix}undefined"), s.undefined);
    out.line(&format!("{prefix}max_abs_err"), num(s.max_abs_err));
    out.line(&format!("{prefix}max_log_rel_err"), num(s.max_log_rel_err));
    match s.argmax {
        Some((x1, x2, m)) => out.line(&format!("{prefix}argmax"), format!("{x1},{x2},{}", m + 1)),
        None => out.line(&format!("{prefix}argmax"), "none"),
    }
    out.line(&format!("{prefix}max_log_rel_err_outside_layer"), num(s.max_log_rel_err_outside_layer));
    out.line(&format!("{prefix}layer_cells"), s.layer_cells);
}

fn compare(c: &RunConfig, out: &mut Output) -> Result<(), Failure> {
    let params = load(c)?;
    let n = c.n as usize;
    let cat = build_root_catalog(&params, c.k, c.r)?;
    let f = fit(&params, &cat)?;
    let exact = solve_pn(&params, n, c.tol, DEFAULT_MAX_ITER)?;
    let h = f.function.real_part();
    let approx = |x1: usize, x2: usize, m: usize| h.eval_at_exit(n as i64, x1 as i64, x2 as i64, m);
    let grid = compare_grids(&cat, approx, &exact)?;
    out.line("approximation", f.kind);
    out.line("sweeps", exact.iterations);
    out.line("final_change", num(exact.final_sup_change));
    let all = grid.summary(None);
    summary_lines(out, "", &all);
    let per: Vec<ErrorSummary> = (0..params.num_regimes()).map(|m| grid.summary(Some(m))).collect();
    for (m, s) in per.iter().enumerate() {
        summary_lines(out, &format!("regime_{}.", m + 1), s);
    }

    let start = (n / 2, n / 5, 0);
    let mc = simulate_pn(&params, n, start, MC_PATHS, c.seed, MC_STEP_CAP)?;
    out.line("mc_start", format!("{},{},1", start.0, start.1));
    out.line("mc_estimate", num(mc.estimate));
    out.line("mc_stderr", num(mc.stderr));
    out.line("mc_exact", num(exact.at(start.0, start.1, 0)));

    let mut exact_csv = format::header(c);
    exact_csv.push_str("x1,x2,m,value\n");
    for (x1, x2, m, v) in exact.cells() {
        let _ = writeln!(exact_csv, "{x1},{x2},{},{}", m + 1, num(v));
    }
    let mut approx_csv = format::header(c);
    approx_csv.push_str("x1,x2,m,value\n");
    let mut error_csv = format::header(c);
    error_csv.push_str("x1,x2,m,approx,exact,abs_err,log_rel_err,layer,excluded_theorem,excluded_alt\n");
    for e in &grid.cells {
        let _ = writeln!(approx_csv, "{},{},{},{}", e.x1, e.x2, e.m + 1, num(e.approx));
        let _ = writeln!(
            error_csv,
            "{},{},{},{},{},{},{},{},{},{}",
            e.x1,
            e.x2,
            e.m + 1,
            num(e.approx),
            num(e.exact),
            num(e.abs_err),
            e.log_rel_err.map_or(String::new(), num),
            e.layer as u8,
            e.excluded_theorem as u8,
            e.excluded_alt as u8
        );
    }
    let mut summary = json!({
        "config": format::config_json(c),
        "approximation": f.kind,
        "sweeps": exact.iterations,
        "final_change": exact.final_sup_change,
        "summary": all,
        "regimes": per,
        "monte_carlo": mc,
        "monte_carlo_start": [start.0, start.1, 1],
    });

    if let Some(w) = c.trunc {
        let mut strip = solve_tau_inf(&params, w as usize, c.tol, DEFAULT_MAX_ITER)?;
        let (_, upper) = build_bound_certificate(&params, &cat)?;
        let bound = truncation_certificate(&strip, &upper)?;
        strip.truncation_bound = Some(bound);
        out.line("strip_sweeps", strip.iterations);
        out.line("strip_truncation_bound", num(bound));
        let mut csv = format::header(c);
        csv.push_str("u,y2,m,value\n");
        for (u, y2, m, v) in strip.cells() {
            let _ = writeln!(csv, "{u},{y2},{},{}", m + 1, num(v));
        }
        out.files.push(("strip.csv", csv));
        summary["strip"] = json!({ "width": w, "sweeps": strip.iterations, "truncation_bound": bound });
    }

    out.files.push(("exact.csv", exact_csv));
    out.files.push(("approx.csv", approx_csv));
    out.files.push(("error.csv", error_csv));
    out.files.push(("summary.json", format::json_text(&summary)));
    Ok(())
}
