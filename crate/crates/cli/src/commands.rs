use std::path::Path;
use std::time::Instant;

use ladcd::data::{fmt_f64, read_csv, CsvData};
use ladcd::experiment::{self, BenchConfig, BenchInit, ReplicateConfig, ReplicateInit};
use ladcd::{
    contaminate, exact_lad_small, generate_synthetic, write_csv, ContamSpec, FitResult, InitStrategy, LoadOptions,
    ResponseColumn, SynthSpec,
};
use serde_json::json;

use crate::args::{BenchArgs, DataArgs, FitArgs, InitKind, OracleArgs, ReplicateArgs, ReplicateInitKind, SynthArgs};
use crate::report::{emit, CheckOutcome, DataSummary, FitDocument, Manifest, OracleDocument, ReplicateDocument, SCHEMA_VERSION};
use crate::CliError;

fn csv_writer(path: &Path) -> Result<csv::Writer<std::fs::File>, CliError> {
    csv::Writer::from_path(path).map_err(|e| CliError::Output(format!("{}: {e}", path.display())))
}

fn write_rows(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<(), CliError> {
    let fail = |e: csv::Error| CliError::Output(format!("{}: {e}", path.display()));
    let mut w = csv_writer(path)?;
    w.write_record(header).map_err(fail)?;
    for row in rows {
        w.write_record(&row).map_err(fail)?;
    }
    w.flush().map_err(|e| CliError::Output(format!("{}: {e}", path.display())))
}

fn load(a: &DataArgs) -> Result<(CsvData, DataSummary), CliError> {
    // A response given as a number is an index unless a column has that name.
    let header: Vec<String> = csv::Reader::from_path(&a.data)
        .and_then(|mut r| r.headers().map(|h| h.iter().map(|s| s.trim().to_string()).collect()))
        .unwrap_or_default();
    let opts = LoadOptions {
        response: ResponseColumn::parse(&a.response, &header),
        intercept: !a.no_intercept,
        drop_na: a.drop_na,
    };
    let data = read_csv(&a.data, &opts)?;
    if !data.dropped_rows.is_empty() {
        eprintln!("ladcd: dropped {} rows with missing values", data.dropped_rows.len());
    }
    let summary = DataSummary {
        path: a.data.display().to_string(),
        n: data.dataset.n(),
        p: data.dataset.p(),
        response: data.response_name.clone(),
        columns: data.names.clone(),
        dropped_rows: data.dropped_rows.clone(),
    };
    Ok((data, summary))
}

fn write_trace(path: &Path, fit: &FitResult, n: usize) -> Result<(), CliError> {
    let n = n as f64;
    let rows = std::iter::once(fit.initial_objective)
        .chain(fit.objective_trace.iter().copied())
        .enumerate()
        .map(|(k, obj)| vec![k.to_string(), fmt_f64(obj), fmt_f64(obj / n)]);
    write_rows(path, &["sweep", "objective", "train_mae"], rows)
}

pub fn fit(a: &FitArgs) -> Result<(), CliError> {
    let started = Instant::now();
    let (data, summary) = load(&a.data)?;
    let d = &data.dataset;
    let cfg = a.solver.config(a.seed);
    cfg.validate()?;
    if a.init == InitKind::Multistart && a.starts == 0 {
        return Err(CliError::Invalid("--starts must be at least 1".into()));
    }
    let strategy = match a.init {
        InitKind::Zero => InitStrategy::Zero,
        InitKind::Ridge => InitStrategy::Ridge(a.ridge.config()),
        InitKind::Ga => InitStrategy::Ga(a.ga.config(a.seed)),
        InitKind::Multistart => InitStrategy::MultiStart {
            starts: a.starts,
            init_scale: a.init_scale,
        },
    };
    let report = ladcd::fit(d, &strategy, &cfg)?;

    let config = json!({
        "response": summary.response,
        "intercept": !a.data.no_intercept,
        "drop_na": a.data.drop_na,
        "init": report.init_method.as_str(),
        "solver": cfg,
        "ridge": a.ridge.config(),
        "ga": a.ga.config(a.seed),
        "starts": a.starts,
        "init_scale": a.init_scale,
        "strict": a.strict,
    });
    let mut manifest = Manifest::new("fit", config, a.seed);
    if let Some(t) = &a.trace {
        write_trace(t, &report.fit, d.n())?;
        manifest.output("trace", t);
    }
    if let Some(r) = &a.report {
        manifest.output("report", r);
    }
    if a.timings {
        let solve = report.fit.wall_time;
        let total = started.elapsed().as_secs_f64();
        manifest.timings = Some(
            [
                ("total_seconds", total),
                ("solve_seconds", solve),
                ("median_sweep_seconds", experiment::median_sweep_time(&report.fit)),
            ]
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect(),
        );
    }
    let converged = report.fit.converged;
    emit(&FitDocument::new(&report, summary, manifest), a.report.as_deref())?;
    if a.strict && !converged {
        return Err(CliError::NotConverged(format!(
            "sweep budget of {} exhausted",
            cfg.max_sweeps
        )));
    }
    Ok(())
}

pub fn synth(a: &SynthArgs) -> Result<(), CliError> {
    let spec = SynthSpec {
        beta_true: a.beta.clone(),
        add_intercept: !a.no_intercept,
        ..SynthSpec::new(a.n, a.p, a.sigma, a.seed)
    };
    let (clean, beta) = generate_synthetic(&spec)?;
    let contam = ContamSpec {
        shift: a.contam_shift,
        one_sided: a.contam_one_sided,
        ..ContamSpec::new(a.contam_frac, a.contam_sigma, a.seed)
    };
    let d = contaminate(&clean, &beta, &contam)?;
    write_csv(&a.out, &d)?;

    let mut manifest = Manifest::new("synth", json!({ "data": spec, "contamination": contam }), a.seed);
    manifest.output("data", &a.out);
    if let Some(path) = &a.beta_out {
        let names = (0..beta.len()).map(|j| match (spec.add_intercept, j) {
            (true, 0) => "intercept".to_string(),
            (true, j) => format!("x{j}"),
            (false, j) => format!("x{}", j + 1),
        });
        let rows = names.zip(beta.iter()).map(|(name, b)| vec![name, fmt_f64(*b)]);
        write_rows(path, &["name", "value"], rows)?;
        manifest.output("beta", path);
    }
    if let Some(path) = &a.manifest {
        manifest.output("manifest", path);
        emit(&json!({ "schema_version": SCHEMA_VERSION, "manifest": manifest }), Some(path))?;
    }
    Ok(())
}

pub fn replicate(a: &ReplicateArgs) -> Result<(), CliError> {
    let started = Instant::now();
    let init = match a.init {
        ReplicateInitKind::Random => ReplicateInit::Random { scale: a.init_scale },
        ReplicateInitKind::Zero => ReplicateInit::Zero,
        ReplicateInitKind::Ridge => ReplicateInit::Ridge(a.ridge.config()),
    };
    let cfg = ReplicateConfig {
        reps: a.reps,
        n: a.n,
        p: a.p,
        sigma: a.sigma,
        init,
        resample_data: a.resample_data,
        seed: a.seed,
        solver: a.solver.config(a.seed),
    };
    cfg.solver.validate()?;
    let summary = experiment::replicate(&cfg)?;
    let mut manifest = Manifest::new("replicate", serde_json::to_value(&cfg).expect("plain data"), a.seed);
    if let Some(out) = &a.out {
        manifest.output("summary", out);
    }
    if a.timings {
        manifest.timings = Some([("total_seconds".to_string(), started.elapsed().as_secs_f64())].into());
    }
    let doc = ReplicateDocument {
        schema_version: SCHEMA_VERSION,
        summary,
        manifest,
    };
    emit(&doc, a.out.as_deref())
}

pub fn bench(a: &BenchArgs) -> Result<(), CliError> {
    let started = Instant::now();
    let inits = a
        .inits
        .iter()
        .map(|s| s.parse::<BenchInit>())
        .collect::<Result<Vec<_>, _>>()?;
    if a.p_grid.is_empty() || inits.is_empty() {
        return Err(CliError::Invalid("--p-grid and --inits must be non-empty".into()));
    }
    let cfg = BenchConfig {
        n: a.n,
        p_grid: a.p_grid.clone(),
        inits,
        sigma: a.sigma,
        seed: a.seed,
        solver: a.solver.config(a.seed),
        ridge: a.ridge.config(),
        ga: a.ga.config(a.seed),
    };
    cfg.solver.validate()?;
    cfg.ga.validate()?;
    // Concurrent cells would distort each other's timings.
    let rows = experiment::bench(&cfg, !a.timings)?;

    let mut header = vec![
        "n", "p", "init", "init_mae", "train_mae", "objective", "best_mae", "param_mae", "sweeps", "converged", "escapes",
    ];
    if a.timings {
        header.extend(["init_seconds", "wall_seconds", "sec_per_sweep"]);
    }
    let records = rows.iter().map(|r| {
        let mut rec = vec![
            r.n.to_string(),
            r.p.to_string(),
            r.init.as_str().to_string(),
            fmt_f64(r.init_mae),
            fmt_f64(r.train_mae),
            fmt_f64(r.objective),
            fmt_f64(r.best_mae),
            fmt_f64(r.param_mae),
            r.sweeps.to_string(),
            r.converged.to_string(),
            r.escapes.to_string(),
        ];
        if a.timings {
            rec.extend([fmt_f64(r.init_time), fmt_f64(r.wall_time), fmt_f64(r.sec_per_sweep)]);
        }
        rec
    });
    write_rows(&a.out, &header, records)?;

    if let Some(path) = &a.manifest {
        let mut manifest = Manifest::new("bench", serde_json::to_value(&cfg).expect("plain data"), a.seed);
        manifest.output("bench", &a.out);
        manifest.output("manifest", path);
        if a.timings {
            manifest.timings = Some([("total_seconds".to_string(), started.elapsed().as_secs_f64())].into());
        }
        emit(&json!({ "schema_version": SCHEMA_VERSION, "manifest": manifest }), Some(path))?;
    }
    Ok(())
}

pub fn oracle(a: &OracleArgs) -> Result<(), CliError> {
    let (data, summary) = load(&a.data)?;
    let sol = exact_lad_small(&data.dataset)?;
    let config = json!({
        "response": summary.response,
        "intercept": !a.data.no_intercept,
        "drop_na": a.data.drop_na,
        "rtol": a.rtol,
    });
    let mut manifest = Manifest::new("oracle", config, 0);
    if let Some(out) = &a.out {
        manifest.output("result", out);
    }
    let mut doc = OracleDocument::new(&sol, summary, manifest);

    if let Some(path) = &a.check {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))?;
        let report: serde_json::Value =
            serde_json::from_str(&text).map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))?;
        let reported = report["fit"]["final_objective"]
            .as_f64()
            .ok_or_else(|| CliError::Invalid(format!("{}: no fit.final_objective", path.display())))?;
        let gap = (reported - sol.objective).abs() / sol.objective.abs().max(1.0);
        doc.check = Some(CheckOutcome {
            report: path.display().to_string(),
            reported_objective: reported,
            relative_gap: gap,
            rtol: a.rtol,
            passed: gap <= a.rtol,
        });
    }
    emit(&doc, a.out.as_deref())?;
    match &doc.check {
        Some(c) if !c.passed => Err(CliError::CheckFailed(format!(
            "reported objective {} vs exact {} (relative gap {:.3e} > {:.1e})",
            c.reported_objective, sol.objective, c.relative_gap, c.rtol
        ))),
        _ => Ok(()),
    }
}
