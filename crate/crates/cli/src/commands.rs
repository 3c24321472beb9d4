use convdiff_core::evolution::{EvolutionTrace, GalerkinMatrix, Method};
use convdiff_core::fourier::{build_a, build_b, build_c, build_j, build_m_matrix, check_j_selfadjoint, factorization_residual};
use convdiff_core::io::{self, BandDocument};
use convdiff_core::physical::{
    apply_l, check_jlj, check_l_equals_ms, check_m_mean_invariance, check_theta_constraints, estimate_p1, norm_g,
    norm_m, p2, p3,
};
use convdiff_core::quadrature::QuadratureGrid;
use convdiff_core::resolvent::{solve_l, ResolventOptions};
use convdiff_core::spectral::{convergence_study, eigenvalues, QrOptions};
use convdiff_core::TrigPoly;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::config::{Defaults, Format, RunConfig, Shared};
use crate::output::{Sink, VerificationReport};
use crate::{read_poly, CliError};

pub fn build(shared: Shared) -> Result<(), CliError> {
    let cfg = RunConfig::resolve(
        shared,
        &Defaults {
            command: "build",
            n: 4,
            n_list: &[],
            tolerances: &[],
        },
    )?;
    let (n, eps) = (cfg.n, cfg.eps());
    let docs = [
        ("A", BandDocument::new(&build_a(n, &eps)?, 1)),
        ("B", BandDocument::new(&build_b(n, &eps)?, 1)),
        ("C", BandDocument::new(&build_c::<f64>(n)?, 1)),
        ("J", BandDocument::new(&build_j::<f64>(n)?, 1)),
        ("M", BandDocument::new(&build_m_matrix(n, &eps)?, -(n as i64))),
    ];
    let sink = Sink::new(&cfg)?;
    for (stem, doc) in &docs {
        match cfg.format {
            Format::Csv => sink.csv(stem, |w, c| io::write_band_csv(w, doc, Some(c)))?,
            Format::Json => sink.json(stem, serde_json::to_value(doc).expect("serializable"), json!([]))?,
        };
    }
    println!(
        "build: eps={} N={} wrote A, B, C, J, M to {}",
        cfg.epsilon,
        n,
        cfg.output_dir.display()
    );
    Ok(())
}

fn random_real(rng: &mut ChaCha8Rng, max_degree: usize) -> TrigPoly {
    let degree = rng.random_range(0..=max_degree);
    TrigPoly::random(rng, degree, true, false)
}

pub fn verify(shared: Shared, inject_fault: bool, samples: usize) -> Result<(), CliError> {
    let mut cfg = RunConfig::resolve(
        shared,
        &Defaults {
            command: "verify",
            n: 64,
            n_list: &[],
            tolerances: &[
                ("factorization", 1e-13),
                ("j_selfadjoint", 1e-15),
                ("jlj", 1e-13),
                ("l_equals_ms", 1e-14),
                ("sector_decoupling", 1e-15),
                ("m_mean", 1e-13),
                ("theta", 1e-13),
            ],
        },
    )?;
    cfg.param("inject_fault", inject_fault);
    cfg.param("samples", samples);
    let (n, eps) = (cfg.n, cfg.eps());
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let polys: Vec<TrigPoly> = (0..samples).map(|_| random_real(&mut rng, 30)).collect();
    let mut report = VerificationReport::default();

    report.run("factorization", cfg.tol("factorization"), || {
        let a = build_a(n, &eps)?;
        let mut b = build_b(n, &eps)?;
        if inject_fault {
            b.upper.iter_mut().for_each(|v| *v = -*v);
        }
        let c = build_c(n)?;
        Ok(factorization_residual(&a, &b, &c)? / a.max_abs_entry())
    })?;
    report.run("j_selfadjoint", cfg.tol("j_selfadjoint"), || Ok(check_j_selfadjoint(n, &eps)?))?;
    report.run("jlj", cfg.tol("jlj"), || {
        Ok(polys.iter().map(|y| check_jlj(y, eps)).fold(0.0, f64::max))
    })?;
    // relative to the largest coefficient of L y
    report.run("l_equals_ms", cfg.tol("l_equals_ms"), || {
        Ok(polys
            .iter()
            .map(|y| check_l_equals_ms(y, eps) / apply_l(y, eps).max_abs_coeff().max(1.0))
            .fold(0.0, f64::max))
    })?;
    report.run("sector_decoupling", cfg.tol("sector_decoupling"), || {
        let g = GalerkinMatrix::new(n, eps)?;
        Ok(g.sector_coupling().max(g.block_identity_residual()?))
    })?;
    report.run("m_mean", cfg.tol("m_mean"), || {
        Ok(polys.iter().map(|y| check_m_mean_invariance(y, eps)).fold(0.0, f64::max))
    })?;
    report.run("theta", cfg.tol("theta"), || {
        Ok(polys
            .iter()
            .map(|y| {
                let (a, b) = check_theta_constraints(y);
                a.max(b)
            })
            .fold(0.0, f64::max))
    })?;

    let sink = Sink::new(&cfg)?;
    match cfg.format {
        Format::Csv => {
            let rows: Vec<Vec<String>> = report
                .checks
                .iter()
                .map(|c| {
                    vec![
                        c.name.clone(),
                        if c.passed { "pass" } else { "fail" }.to_string(),
                        format!("{:e}", c.residual),
                        format!("{:e}", c.tolerance),
                        format!("{:.6}", c.runtime_s),
                    ]
                })
                .collect();
            sink.table("verify", &["name", "status", "residual", "tolerance", "runtime_s"], &rows)?
        }
        Format::Json => sink.json("verify", json!({ "passed": report.passed() }), report.to_json())?,
    };
    for c in &report.checks {
        println!(
            "  {:<18} {}  residual {:.3e}  tol {:.1e}  {:.3}s",
            c.name,
            if c.passed { "PASS" } else { "FAIL" },
            c.residual,
            c.tolerance,
            c.runtime_s
        );
    }
    let failed: Vec<&str> = report.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
    println!(
        "verify: eps={} N={} {}/{} checks passed",
        cfg.epsilon,
        n,
        report.checks.len() - failed.len(),
        report.checks.len()
    );
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Verification(failed.join(", ")))
    }
}

pub fn spectrum(shared: Shared, k: usize) -> Result<(), CliError> {
    let mut cfg = RunConfig::resolve(
        shared,
        &Defaults {
            command: "spectrum",
            n: 64,
            n_list: &[],
            tolerances: &[("convergence", 1e-6)],
        },
    )?;
    cfg.param("k", k);
    let eps = cfg.eps();
    let sink = Sink::new(&cfg)?;
    if cfg.n_list.len() >= 2 {
        let table = convergence_study(eps, &cfg.n_list, k, cfg.tol("convergence"), QrOptions::default())?;
        match cfg.format {
            Format::Csv => sink.csv("convergence", |w, c| io::write_convergence_csv(w, &table, Some(c)))?,
            Format::Json => sink.json("convergence", serde_json::to_value(&table).expect("serializable"), json!([]))?,
        };
        let converged = table.converged().iter().filter(|c| **c).count();
        let max_im = table
            .max_imag_converged()
            .map(|v| format!("{v:.3e}"))
            .unwrap_or_else(|| "n/a".into());
        println!(
            "spectrum: eps={} N={:?} k={}: {}/{} converged to {:e}; max |Im| among converged = {}",
            cfg.epsilon,
            cfg.n_list,
            table.k,
            converged,
            table.k,
            table.tolerance,
            max_im
        );
    } else {
        let n = cfg.n_list.first().copied().unwrap_or(cfg.n);
        let s = eigenvalues(&build_a(n, &eps)?, QrOptions::default())?;
        match cfg.format {
            Format::Csv => sink.csv("spectrum", |w, c| io::write_spectrum_csv(w, &s, None, Some(c)))?,
            Format::Json => sink.json("spectrum", serde_json::to_value(&s).expect("serializable"), json!([]))?,
        };
        let max_im = s.eigenvalues.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
        let smallest = s.eigenvalues.first().copied().unwrap_or_default();
        println!(
            "spectrum: eps={} N={}: {} eigenvalues, smallest {:.10}{:+.3e}i, max |Im| = {:.3e}, {} QR sweeps",
            cfg.epsilon,
            n,
            s.eigenvalues.len(),
            smallest.re,
            smallest.im,
            max_im,
            s.iterations
        );
    }
    Ok(())
}

/// Built-in right-hand sides and, where known, the exact zero-mean solution.
fn builtin_phi(name: &str, cfg: &RunConfig) -> Option<(TrigPoly, Option<TrigPoly>)> {
    let eps = cfg.eps();
    match name {
        "builtin:cosx-image" => Some((apply_l(&TrigPoly::cos(1), eps), Some(TrigPoly::cos(1)))),
        "builtin:sin2x-image" => Some((apply_l(&TrigPoly::sin(2), eps), Some(TrigPoly::sin(2)))),
        "builtin:one" => Some((TrigPoly::constant(1.0), None)),
        _ => None,
    }
}

pub fn resolve(shared: Shared, phi_spec: &str) -> Result<(), CliError> {
    let mut cfg = RunConfig::resolve(
        shared,
        &Defaults {
            command: "resolve",
            n: 1,
            n_list: &[],
            tolerances: &[("residual", 1e-6), ("mean", 1e-10)],
        },
    )?;
    cfg.param("phi", phi_spec);
    let (phi, exact) = match builtin_phi(phi_spec, &cfg) {
        Some(p) => p,
        None if phi_spec.starts_with("builtin:") => {
            return Err(CliError::Usage(format!(
                "unknown built-in {phi_spec:?}; expected builtin:cosx-image, builtin:sin2x-image or builtin:one"
            )))
        }
        None => (read_poly(phi_spec)?, None),
    };
    let grid = QuadratureGrid::new(cfg.grid(), cfg.epsilon)?;
    let opts = ResolventOptions {
        mean_tolerance: cfg.tol("mean"),
        residual_tolerance: cfg.tol("residual"),
    };
    let sol = solve_l(&phi, cfg.eps(), &grid, &opts)?;
    let max_error = exact.as_ref().map(|y| sol.max_error(|x| y.eval_real(x)));

    let sink = Sink::new(&cfg)?;
    let report = json!({
        "nodes": grid.len(),
        "residual_rms": sol.residual_rms,
        "residual_max": sol.residual_max,
        "periodicity_gap": sol.periodicity_gap,
        "max_error_vs_exact": max_error,
        "grid": grid.config,
    });
    let checks = json!([{
        "name": "residual",
        "passed": sol.residual_rms <= opts.residual_tolerance,
        "residual": sol.residual_rms,
        "tolerance": opts.residual_tolerance,
    }]);
    match cfg.format {
        Format::Csv => sink.csv("solution", |w, c| io::write_solution_csv(w, &sol, Some(c)))?,
        Format::Json => sink.json(
            "solution",
            json!({ "x": sol.x, "y": sol.y, "dy": sol.dy, "report": report.clone() }),
            checks.clone(),
        )?,
    };
    sink.json("report", report, checks)?;
    println!(
        "resolve: eps={} nodes={} residual_rms={:.3e} periodicity_gap={:.3e}{}",
        cfg.epsilon,
        grid.len(),
        sol.residual_rms,
        sol.periodicity_gap,
        max_error.map(|e| format!(" max_error={e:.3e}")).unwrap_or_default()
    );
    Ok(())
}

pub fn norms(shared: Shared, samples: usize, degree: usize) -> Result<(), CliError> {
    let mut cfg = RunConfig::resolve(
        shared,
        &Defaults {
            command: "norms",
            n: 256,
            n_list: &[],
            tolerances: &[],
        },
    )?;
    cfg.param("samples", samples);
    cfg.param("degree", degree);
    let eps = cfg.eps();
    let upper = p2(eps);
    let p1 = estimate_p1(cfg.n, eps)?;
    let lower = p3(p1);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut rows = Vec::with_capacity(samples);
    let (mut worst_upper, mut worst_lower) = (0.0f64, f64::INFINITY);
    let mut violations = 0;
    for k in 0..samples {
        let y = TrigPoly::random(&mut rng, degree.max(1), true, true);
        let (g, m) = (norm_g(&y, eps), norm_m(&y));
        let ratio = g / m;
        worst_upper = worst_upper.max(ratio / upper);
        worst_lower = worst_lower.min(ratio / lower);
        let ok = ratio <= upper && ratio >= lower;
        if !ok {
            violations += 1;
        }
        rows.push(vec![
            (k + 1).to_string(),
            g.to_string(),
            m.to_string(),
            ratio.to_string(),
            ok.to_string(),
        ]);
    }
    let sink = Sink::new(&cfg)?;
    let summary = json!({
        "p1_estimate": p1,
        "p2": upper,
        "p3": lower,
        "worst_ratio_over_p2": worst_upper,
        "worst_ratio_over_p3": worst_lower,
        "violations": violations,
    });
    match cfg.format {
        Format::Csv => sink.table("norms", &["sample", "norm_g", "norm_m", "ratio", "within_bounds"], &rows)?,
        Format::Json => sink.json(
            "norms",
            json!({ "summary": summary, "samples": rows }),
            json!([{ "name": "norm_equivalence", "passed": violations == 0, "violations": violations }]),
        )?,
    };
    println!(
        "norms: eps={} samples={} p2={} p3={:.4} (p1≈{:.4} at N={}): worst ratio/p2 = {:.4}, min ratio/p3 = {:.4}, violations = {}",
        cfg.epsilon, samples, upper, lower, p1, cfg.n, worst_upper, worst_lower, violations
    );
    if violations == 0 {
        Ok(())
    } else {
        Err(CliError::Verification(format!("{violations} samples violate the norm bounds")))
    }
}

fn builtin_y0(name: &str) -> Option<TrigPoly> {
    match name {
        "builtin:cosx" => Some(TrigPoly::cos(1)),
        "builtin:sin2x" => Some(TrigPoly::sin(2)),
        _ => None,
    }
}

pub fn evolve(shared: Shared, times: &[f64], y0_spec: &str, method: &str) -> Result<(), CliError> {
    let mut cfg = RunConfig::resolve(
        shared,
        &Defaults {
            command: "evolve",
            n: 16,
            n_list: &[],
            tolerances: &[],
        },
    )?;
    let method: Method = method.parse().map_err(|e: convdiff_core::Error| CliError::Usage(e.to_string()))?;
    cfg.param("times", times);
    cfg.param("y0", y0_spec);
    cfg.param("method", method);
    let y0 = match builtin_y0(y0_spec) {
        Some(p) => p,
        None if y0_spec.starts_with("builtin:") => {
            return Err(CliError::Usage(format!(
                "unknown built-in {y0_spec:?}; expected builtin:cosx or builtin:sin2x"
            )))
        }
        None => read_poly(y0_spec)?,
    };
    let mut ts: Vec<f64> = times.to_vec();
    if ts.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
        return Err(CliError::Usage("times must be finite and non-negative".into()));
    }
    ts.retain(|t| *t > 0.0);
    let trace = EvolutionTrace::compute(&y0, &ts, cfg.n, cfg.eps(), method)?;
    let sink = Sink::new(&cfg)?;
    match cfg.format {
        Format::Csv => sink.csv("trace", |w, c| io::write_trace_csv(w, &trace, Some(c)))?,
        Format::Json => sink.json("trace", serde_json::to_value(&trace).expect("serializable"), json!([]))?,
    };
    let last = trace.times.len() - 1;
    println!(
        "evolve: eps={} N={} method={} t_max={} norm {:.6e} -> {:.6e}, growth {:.3e}, fallbacks {}",
        cfg.epsilon,
        cfg.n,
        method,
        trace.times[last],
        trace.norms[0],
        trace.norms[last],
        trace.growth[last],
        trace.fell_back.iter().filter(|f| **f).count()
    );
    Ok(())
}
