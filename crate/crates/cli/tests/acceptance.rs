//! Acceptance gate: every criterion runs once, sequentially, and prints one
//! `[PASS]`/`[FAIL]` line. The process exits non-zero if any criterion fails.

mod common;

use std::path::Path;
use std::time::Instant;

use ladcd::experiment::{quantile, replicate, ReplicateConfig, ReplicateInit};
use ladcd::median::{check_weighted_median, median, weighted_median, WeightedSample};
use ladcd::solver::{naive_cd_observed, optimized_cd_observed, SweepInfo};
use ladcd::{
    contaminate, exact_lad_small, generate_synthetic, lad_objective, ols_fit, optimized_cd, ridge_fit, rng,
    Coefficients, ContamSpec, Dataset, FitResult, RidgeConfig, SolverConfig, SynthSpec,
};

/// Monotonicity bookkeeping over every fit the suite runs.
#[derive(Default)]
struct Fits {
    count: usize,
    violations: Vec<String>,
}

impl Fits {
    fn record(&mut self, label: &str, fit: &FitResult) {
        self.count += 1;
        let slack = 1e-9 * (1.0 + fit.initial_objective);
        if fit.max_increase() > slack {
            self.violations.push(format!("{label}: increase {:.3e}", fit.max_increase()));
        }
    }

    fn record_flag(&mut self, label: &str, monotone: bool) {
        self.count += 1;
        if !monotone {
            self.violations.push(label.to_string());
        }
    }
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn gaussian(seed: u64, n: usize, p: usize, intercept: bool) -> Dataset {
    let mut g = rng::stream(seed, "acceptance", 0);
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            (0..p)
                .map(|j| if intercept && j == 0 { 1.0 } else { rng::standard_normal(&mut g) })
                .collect()
        })
        .collect();
    let y = (0..n).map(|_| rng::standard_normal(&mut g)).collect();
    Dataset::from_rows(&rows, y, intercept.then_some(0)).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

fn l1_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

fn oracle_equivalence(fits: &mut Fits) -> Outcome {
    let t = Instant::now();
    let cfg = SolverConfig::default();
    let (mut worst, mut bad) = (0.0f64, 0);
    for seed in 0..50u64 {
        let p = 1 + (seed % 3) as usize;
        let n = (p + 1 + (seed as usize * 7) % (11 - p - 1)).min(10);
        let d = gaussian(seed, n, p, seed % 2 == 0);
        let oracle = exact_lad_small(&d).unwrap();
        let fit = optimized_cd(&d, &Coefficients::zeros(p), &cfg).unwrap();
        fits.record("oracle-equivalence", &fit);
        let gap = rel(fit.final_objective, oracle.objective);
        worst = worst.max(gap);
        bad += usize::from(gap > 1e-6);
    }
    let secs = t.elapsed().as_secs_f64();
    outcome(
        bad == 0 && secs < 10.0,
        format!("{bad}/50 above 1e-6, worst relative gap {worst:.2e}, {secs:.2}s"),
    )
}

fn naive_matches_optimized(fits: &mut Fits) -> Outcome {
    let t = Instant::now();
    let cfg = SolverConfig::default();
    let (mut worst, mut bad) = (0.0f64, 0);
    for seed in 0..100u64 {
        let n = 5 + (seed as usize * 37) % 96;
        let p = 1 + (seed as usize * 7) % 10;
        let d = gaussian(10_000 + seed, n, p, seed % 2 == 0);
        let beta0 = Coefficients::zeros(p);
        let (mut a, mut b) = (Vec::new(), Vec::new());
        let fa = naive_cd_observed(&d, &beta0, &cfg, &mut |s: &SweepInfo| a.push(s.beta.to_vec())).unwrap();
        let fb = optimized_cd_observed(&d, &beta0, &cfg, &mut |s: &SweepInfo| b.push(s.beta.to_vec())).unwrap();
        fits.record("naive", &fa);
        fits.record("optimized", &fb);
        let gap = a
            .iter()
            .zip(&b)
            .flat_map(|(x, y)| x.iter().zip(y).map(|(u, v)| (u - v).abs()))
            .fold(0.0f64, f64::max);
        worst = worst.max(gap);
        bad += usize::from(a.len() != b.len() || gap > 1e-8);
    }
    let secs = t.elapsed().as_secs_f64();
    outcome(
        bad == 0 && secs < 30.0,
        format!("{bad}/100 instances differ, worst per-sweep gap {worst:.2e}, {secs:.2}s"),
    )
}

fn weighted_median_kernel() -> Outcome {
    let t = Instant::now();
    let mut g = rng::stream(4, "acceptance-median", 0);
    let mut failures = 0;
    for case in 0..1000 {
        let len = 1 + (rng::open_unit(&mut g) * 50.0) as usize;
        // Round to a coarse grid so ties occur.
        let values: Vec<f64> = (0..len).map(|_| (rng::normal(&mut g, 0.0, 3.0) * 4.0).round() / 4.0).collect();
        let mut weights: Vec<f64> = (0..len)
            .map(|_| if rng::open_unit(&mut g) < 0.1 { 0.0 } else { rng::open_unit(&mut g) * 5.0 })
            .collect();
        if weights.iter().all(|&w| w == 0.0) {
            weights[0] = 1.0;
        }
        let s = WeightedSample::new(values.clone(), weights.clone()).unwrap();
        let b = weighted_median(&s).unwrap();
        let m = median(&values).unwrap();
        let total = s.total_weight();

        let mut ok = check_weighted_median(&s, b);
        // Smallest sample value whose left mass reaches half the total.
        let lower = values
            .iter()
            .zip(&weights)
            .filter(|(_, w)| **w > 0.0)
            .map(|(v, _)| *v)
            .filter(|&c| {
                values.iter().zip(&weights).filter(|(v, _)| **v <= c).map(|(_, w)| w).sum::<f64>() >= total / 2.0
            })
            .fold(f64::INFINITY, f64::min);
        ok &= b == lower;
        let unit = WeightedSample::unit(values.clone()).unwrap();
        ok &= weighted_median(&unit).unwrap() == m;
        let plain = |a: f64| values.iter().map(|v| (v - a).abs()).sum::<f64>();
        for _ in 0..100 {
            let probe = rng::normal(&mut g, 0.0, 5.0);
            ok &= s.objective(b) <= s.objective(probe) + 1e-9;
            ok &= plain(m) <= plain(probe) + 1e-9;
        }
        if !ok {
            failures += 1;
            eprintln!("  weighted median case {case} failed");
        }
    }
    let secs = t.elapsed().as_secs_f64();
    outcome(
        failures == 0 && secs < 5.0,
        format!("{failures}/1000 samples violated a check (100 probes each), {secs:.2}s"),
    )
}

fn outlier_robustness(fits: &mut Fits) -> Outcome {
    let t = Instant::now();
    let cfg = SolverConfig::default();
    let (mut lad_err, mut ols_err) = (Vec::new(), Vec::new());
    let mut worst = 0.0f64;
    for rep in 0..50u64 {
        let spec = SynthSpec {
            beta_true: Some(vec![2.0, 5.0]),
            ..SynthSpec::new(1000, 1, 5.0, 500 + rep)
        };
        let (clean, truth) = generate_synthetic(&spec).unwrap();
        let d = contaminate(&clean, &truth, &ContamSpec::new(0.2, 25.0, 500 + rep)).unwrap();
        let fit = optimized_cd(&d, &Coefficients::zeros(2), &cfg).unwrap();
        fits.record("robustness", &fit);
        lad_err.push(l1_dist(&fit.beta, &truth));
        ols_err.push(l1_dist(&ols_fit(&d).unwrap(), &truth));

        let mut pick = rng::stream(rep, "acceptance-subsample", 0);
        let mut rows = rand::seq::index::sample(&mut pick, 1000, 200).into_vec();
        rows.sort_unstable();
        let sub = d.select_rows(&rows).unwrap();
        let exact = exact_lad_small(&sub).unwrap();
        let sub_fit = optimized_cd(&sub, &Coefficients::zeros(2), &cfg).unwrap();
        fits.record("robustness-subsample", &sub_fit);
        worst = worst.max(rel(sub_fit.train_mae(), exact.objective / 200.0));
    }
    let med = |v: &mut Vec<f64>| {
        v.sort_by(f64::total_cmp);
        quantile(v, 0.5)
    };
    let (lad, ols) = (med(&mut lad_err), med(&mut ols_err));
    let secs = t.elapsed().as_secs_f64();
    outcome(
        lad <= ols && worst <= 1e-6 && secs < 120.0,
        format!(
            "median ‖β̂−β*‖₁ LAD {lad:.4} vs OLS {ols:.4}; worst n=200 MAE gap to exact {worst:.2e}; {secs:.1}s"
        ),
    )
}

fn warm_start_refinement(fits: &mut Fits) -> Outcome {
    // Gaussian noise plus 20% gross outliers, all on one side of the plane, so
    // the least-squares start is visibly biased.
    let spec = SynthSpec {
        beta_true: Some(vec![2.0, 5.0]),
        ..SynthSpec::new(1000, 1, 5.0, 42)
    };
    let (clean, truth) = generate_synthetic(&spec).unwrap();
    let contam = ContamSpec {
        shift: 50.0,
        one_sided: true,
        ..ContamSpec::new(0.2, 25.0, 42)
    };
    let d = contaminate(&clean, &truth, &contam).unwrap();
    let n = d.n() as f64;
    let cfg = SolverConfig::default();
    let start = ridge_fit(&d, &RidgeConfig::default()).unwrap();
    let ridge = optimized_cd(&d, &start, &cfg).unwrap();
    let zero = optimized_cd(&d, &Coefficients::zeros(2), &cfg).unwrap();
    fits.record("warm-start ridge", &ridge);
    fits.record("warm-start zero", &zero);
    let init_mae = lad_objective(&d, &start).unwrap() / n;
    let reduction = 1.0 - ridge.train_mae() / init_mae;
    let agreement = (ridge.train_mae() - zero.train_mae()).abs() / zero.train_mae();
    let best = lad_objective(&d, &truth).unwrap() / n;
    outcome(
        reduction >= 0.15 && agreement <= 0.02,
        format!(
            "ridge MAE {init_mae:.3} -> {:.3} ({:.1}% lower), zero-init {:.3} ({:.2e} apart), true-β MAE {best:.3}",
            ridge.train_mae(),
            100.0 * reduction,
            zero.train_mae(),
            agreement
        ),
    )
}

fn high_dimensional(fits: &mut Fits) -> Outcome {
    let t = Instant::now();
    let cfg = SolverConfig::default();
    let mut pass = true;
    let mut parts = Vec::new();
    for p in [150, 200] {
        let (d, _) = generate_synthetic(&SynthSpec::new(100, p, 1.0, p as u64)).unwrap();
        let start = ridge_fit(&d, &RidgeConfig::default()).unwrap();
        let ridge_obj = lad_objective(&d, &start).unwrap();
        let fit = optimized_cd(&d, &start, &cfg).unwrap();
        fits.record("high-dimensional", &fit);
        let terminated = fit.converged || fit.sweeps_used == cfg.max_sweeps;
        pass &= terminated && fit.is_monotone() && fit.final_objective <= ridge_obj;
        parts.push(format!(
            "p={p}: {ridge_obj:.3} -> {:.3e} in {} sweeps (converged={})",
            fit.final_objective, fit.sweeps_used, fit.converged
        ));
    }
    let secs = t.elapsed().as_secs_f64();
    outcome(pass && secs < 30.0, format!("{}; {secs:.1}s", parts.join(", ")))
}

/// Median seconds per sweep for each dataset. Fits are interleaved in rounds
/// so that slow drifts in machine load affect every configuration alike.
fn sweep_medians(sets: &[Dataset], fits: &mut Fits) -> Vec<f64> {
    let cfg = SolverConfig {
        tol: 0.0,
        max_sweeps: 10,
        escape_stalls: false,
        ..SolverConfig::default()
    };
    let mut times = vec![Vec::new(); sets.len()];
    for _ in 0..4 {
        for (d, t) in sets.iter().zip(times.iter_mut()) {
            let fit = optimized_cd(d, &Coefficients::zeros(d.p()), &cfg).unwrap();
            fits.record("timing", &fit);
            t.extend(fit.sweep_times);
        }
    }
    times
        .iter_mut()
        .map(|t| {
            t.sort_by(f64::total_cmp);
            quantile(t, 0.5)
        })
        .collect()
}

fn sweep_scaling(fits: &mut Fits) -> Outcome {
    let shapes = [(2000, 100), (2000, 400), (1000, 100), (4000, 100)];
    let sets: Vec<Dataset> = shapes
        .iter()
        .map(|&(n, p)| generate_synthetic(&SynthSpec::new(n, p, 1.0, 8)).unwrap().0)
        .collect();
    let m = sweep_medians(&sets, fits);
    let (by_p, by_n) = (m[1] / m[0], m[3] / m[2]);
    outcome(
        (3.0..=6.0).contains(&by_p) && (3.2..=7.0).contains(&by_n),
        format!("p 400/100 ratio {by_p:.2} (want [3, 6]); n 4000/1000 ratio {by_n:.2} (want [3.2, 7]); 40 sweeps each"),
    )
}

fn stability(fits: &mut Fits) -> Outcome {
    let t = Instant::now();
    let cfg = ReplicateConfig {
        reps: 100,
        n: 1000,
        p: 5,
        sigma: 1.0,
        init: ReplicateInit::Random { scale: 1.0 },
        resample_data: false,
        seed: 2024,
        solver: SolverConfig::default(),
    };
    let s = replicate(&cfg).unwrap();
    for (k, r) in s.reps.iter().enumerate() {
        fits.record_flag(&format!("replicate {k}"), r.monotone);
    }
    // Informational: with fresh data per replicate the spread is dominated by
    // sampling noise in the data, not by the solver.
    let resampled = replicate(&ReplicateConfig { resample_data: true, ..cfg.clone() }).unwrap();
    let target = (2.0 / std::f64::consts::PI).sqrt();
    let off = (s.mean - target).abs() / target;
    let secs = t.elapsed().as_secs_f64();
    outcome(
        s.cv < 0.02 && off <= 0.10 && secs < 120.0,
        format!(
            "fixed data, random starts: mean {:.4} ({:.1}% from √(2/π)), cv {:.2e}, 5-95% [{:.4}, {:.4}]; \
             resampled data cv {:.2e} (info); {secs:.1}s",
            s.mean,
            100.0 * off,
            s.cv,
            s.q05,
            s.q95,
            resampled.cv
        ),
    )
}

fn run_twice(dir: &Path, args: &[String], outputs: &[&str]) -> Result<(), String> {
    let mut first = Vec::new();
    for round in 0..2 {
        let argv: Vec<&str> = args.iter().map(String::as_str).collect();
        let out = common::ladcd(&argv);
        if !out.status.success() {
            return Err(format!("{} exited {:?}", args[0], out.status.code()));
        }
        let mut bytes = out.stdout;
        for name in outputs {
            let path = dir.join(name);
            bytes.extend(std::fs::read(&path).map_err(|e| format!("{name}: {e}"))?);
            std::fs::remove_file(&path).ok();
        }
        if round == 0 {
            first = bytes;
        } else if bytes != first {
            return Err(format!("{} output changed between runs", args[0]));
        }
    }
    Ok(())
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let at = |name: &str| d.join(name).display().to_string();
    let data = at("data.csv");
    let synth: Vec<String> = [
        "synth", "--n", "150", "--p", "3", "--sigma", "2", "--contam-frac", "0.1", "--seed", "3", "--out", &data,
        "--beta-out", &at("beta.csv"), "--manifest", &at("synth.json"),
    ]
    .map(String::from)
    .to_vec();
    let mut failures = Vec::new();
    if let Err(e) = run_twice(d, &synth, &["beta.csv", "synth.json"]) {
        failures.push(e);
    }
    // Leave a dataset behind for the commands that read one.
    common::ladcd(&synth.iter().map(String::as_str).collect::<Vec<_>>());
    let tiny = at("tiny.csv");
    std::fs::write(&tiny, "x,y\n0,0\n1,1\n2,5\n3,2\n4,4\n").unwrap();

    let mut runs: Vec<(Vec<String>, Vec<&str>)> = Vec::new();
    for init in ["zero", "ridge", "ga", "multistart"] {
        runs.push((
            vec![
                "fit", "--data", &data, "--response", "y", "--init", init, "--ga-generations", "20", "--seed", "5",
                "--report", &at("fit.json"), "--trace", &at("trace.csv"),
            ]
            .into_iter()
            .map(String::from)
            .collect(),
            vec!["fit.json", "trace.csv"],
        ));
    }
    runs.push((
        ["replicate", "--reps", "8", "--n", "200", "--p", "3", "--seed", "6", "--out", &at("rep.json")]
            .map(String::from)
            .to_vec(),
        vec!["rep.json"],
    ));
    runs.push((
        ["replicate", "--reps", "4", "--n", "100", "--p", "2", "--resample-data", "--seed", "6"]
            .map(String::from)
            .to_vec(),
        vec![],
    ));
    runs.push((
        [
            "bench", "--n", "120", "--p-grid", "5,20", "--inits", "zero,ridge,ga", "--ga-population", "10",
            "--ga-generations", "10", "--seed", "7", "--out", &at("bench.csv"), "--manifest", &at("bench.json"),
        ]
        .map(String::from)
        .to_vec(),
        vec!["bench.csv", "bench.json"],
    ));
    runs.push((
        ["oracle", "--data", &tiny, "--response", "y", "--out", &at("oracle.json")].map(String::from).to_vec(),
        vec!["oracle.json"],
    ));
    for (args, outputs) in &runs {
        if let Err(e) = run_twice(d, args, outputs) {
            failures.push(e);
        }
    }
    let total = runs.len() + 1;
    outcome(
        failures.is_empty(),
        if failures.is_empty() {
            format!("{total} command lines reproduced byte-for-byte")
        } else {
            failures.join("; ")
        },
    )
}

fn main() {
    // Cargo's test runner passes filters such as `--list`; this suite always
    // runs in full and only when executed directly or via `cargo test`.
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let started = Instant::now();
    let mut fits = Fits::default();
    let mut results: Vec<(&str, Outcome)> = vec![
        ("1 oracle equivalence", oracle_equivalence(&mut fits)),
        ("3 naive/optimized equivalence", naive_matches_optimized(&mut fits)),
        ("4 weighted-median kernel", weighted_median_kernel()),
        ("5 outlier robustness", outlier_robustness(&mut fits)),
        ("6 warm-start refinement", warm_start_refinement(&mut fits)),
        ("7 high-dimensional runs", high_dimensional(&mut fits)),
        ("8 sweep-cost scaling", sweep_scaling(&mut fits)),
        ("9 stability replication", stability(&mut fits)),
        ("10 determinism", determinism()),
    ];
    let monotone = outcome(
        fits.violations.is_empty(),
        format!("{} violations across {} fits", fits.violations.len(), fits.count),
    );
    for v in &fits.violations {
        eprintln!("  non-monotone: {v}");
    }
    results.insert(1, ("2 monotone descent", monotone));

    let mut failed = 0;
    for (name, o) in &results {
        println!("[{}] {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.pass);
    }
    println!(
        "acceptance: {}/{} criteria passed in {:.1}s",
        results.len() - failed,
        results.len(),
        started.elapsed().as_secs_f64()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
