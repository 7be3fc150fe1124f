use std::fs;
use std::path::Path;
use std::time::Instant;

use anyhow::{Context, Result};
use cetradeoff::optimizers::{c1, c1_assisted, c1_assisted_covariant, classical_capacity, n_shot};
use cetradeoff::report::{curve_csv, svg_plot, Plot, Series};
use cetradeoff::spec::ChannelSpec;
use cetradeoff::tradeoff::{analyze, linear_grid, main_theorem_demo, sample_curve};
use cetradeoff::verify::{run_suite, SUITES};
use cetradeoff::{Channel, OptimizerConfig};
use serde_json::json;

use crate::args::{CapacityArgs, DemoArgs, DescribeArgs, Mode, SweepArgs, VerifyArgs};
use crate::cache::{self, Artifacts, RunRecord};
use crate::UsageError;

/// Shared state of one invocation.
pub struct Run<'a> {
    pub out: &'a Path,
    pub seed: u64,
    start: Instant,
}

impl<'a> Run<'a> {
    pub fn new(out: &'a Path, seed: u64) -> Self {
        Self { out, seed, start: Instant::now() }
    }

    fn config(&self) -> OptimizerConfig {
        OptimizerConfig::default().with_seed(self.seed)
    }

    fn record(
        &self,
        command: &str,
        spec_hash: Option<String>,
        config: serde_json::Value,
        outputs: serde_json::Value,
        artifacts: Artifacts,
    ) -> Result<()> {
        let record = RunRecord {
            command: command.into(),
            spec_hash,
            config,
            seed: self.seed,
            outputs,
            wall_time_s: self.start.elapsed().as_secs_f64(),
            artifacts: artifacts.into_vec(),
        };
        let path = cache::cache_path(self.out);
        cache::append(&path, &record).with_context(|| format!("appending run record to {}", path.display()))
    }
}

pub struct LoadedSpec {
    pub spec: ChannelSpec,
    pub channel: Channel,
    pub hash: String,
}

pub fn load_spec(path: &Path) -> Result<LoadedSpec> {
    let text = fs::read_to_string(path).map_err(|e| UsageError(format!("reading spec {}: {e}", path.display())))?;
    let spec = ChannelSpec::from_json(&text)?;
    let channel = spec.resolve()?;
    let hash = cache::sha256_hex(serde_json::to_string(&spec)?.as_bytes());
    Ok(LoadedSpec { spec, channel, hash })
}

fn dims(channel: &Channel) -> String {
    format!("{} -> {}, {} Kraus operators", channel.dim_in(), channel.dim_out(), channel.kraus().len())
}

pub fn capacity(run: &Run, args: &CapacityArgs) -> Result<u8> {
    let loaded = load_spec(&args.spec)?;
    let ch = &loaded.channel;
    let cfg = run.config();
    let require_budget = || args.budget.ok_or_else(|| UsageError("mode c1p requires --P".into()));
    let (result, method) = match args.mode {
        Mode::Classical => (classical_capacity(ch, 1e-10)?, "blahut_arimoto"),
        Mode::C1 => (c1(ch, &cfg)?, "ensemble_search"),
        Mode::C1p => {
            let budget = require_budget()?;
            if ch.covariant_inner().is_ok() {
                (c1_assisted_covariant(ch, budget, &cfg)?, "covariant_single_state")
            } else {
                (c1_assisted(ch, budget, &cfg)?, "assisted_ensemble_search")
            }
        }
        Mode::Nshot => {
            let n = args.n.ok_or_else(|| UsageError("mode nshot requires --n".into()))?;
            (n_shot(ch, n, args.budget, &cfg)?, "tensor_power_search")
        }
    };
    let mode = format!("{:?}", args.mode).to_lowercase();
    println!("channel: {} ({})", ch.label(), dims(ch));
    println!("mode: {mode} ({method})");
    println!("value: {:.6} bits per use", result.value);
    println!(
        "witness: {} signals, weights [{}], converged {}",
        result.witness.len(),
        result.witness.signals().iter().map(|s| format!("{:.4}", s.weight)).collect::<Vec<_>>().join(", "),
        result.converged
    );
    let config = json!({"mode": mode, "P": args.budget, "n": args.n, "optimizer": cfg});
    let mut artifacts = Artifacts::new(run.out);
    let report = json!({
        "command": "capacity",
        "spec": loaded.spec,
        "config": config,
        "method": method,
        "result": result,
    });
    let path = artifacts.write_json("capacity.json", &report)?;
    println!("wrote {}", path.display());
    let outputs = json!({"value": result.value, "converged": result.converged, "evaluations": result.evaluations});
    run.record("capacity", Some(loaded.hash), config, outputs, artifacts)?;
    Ok(0)
}

pub fn sweep(run: &Run, args: &SweepArgs) -> Result<u8> {
    let loaded = load_spec(&args.spec)?;
    let ch = &loaded.channel;
    let cfg = run.config();
    let pmax = args.pmax.unwrap_or((ch.dim_in() as f64).log2());
    if args.points == 0 || pmax.is_nan() || pmax < args.pmin || (args.points > 1 && pmax == args.pmin) {
        return Err(
            UsageError(format!("invalid sweep range [{}, {pmax}] with {} points", args.pmin, args.points)).into()
        );
    }
    let grid = linear_grid(args.pmin, pmax, args.points);
    let curve = sample_curve(ch, &grid, &cfg)?;
    // Slope analysis needs at least two intervals.
    let analysis = if curve.len() >= 3 { Some(analyze(&curve, 0.0)?) } else { None };
    let mut artifacts = Artifacts::new(run.out);
    let csv = artifacts.write("curve.csv", &curve_csv(&curve))?;
    let plot = Plot {
        title: &format!("Capacity vs entanglement budget: {}", ch.label()),
        x_label: "P (ebits per use)",
        y_label: "rate (bits per use)",
        series: vec![Series::from_curve(&curve, "one-shot capacity", "#1f77b4")],
        shade: None,
    };
    let svg = artifacts.write("curve.svg", &svg_plot(&plot))?;
    let report = json!({
        "command": "sweep",
        "spec": loaded.spec,
        "grid": grid,
        "curve": curve,
        "analysis": analysis,
        "monotone_slack": curve.monotone_slack(),
        "concavity_deviation": curve.concavity_deviation(),
        "budget_slack": curve.budget_slack(),
    });
    let json_path = artifacts.write_json("analysis.json", &report)?;
    for pt in curve.points() {
        println!("P = {:.6}  rate = {:.6}{}", pt.p, pt.rate, if pt.repaired { "  (repaired)" } else { "" });
    }
    if let Some(a) = &analysis {
        let (lo, hi) = a.p_bar_interval;
        println!("unit-slope regime ends in [{lo:.4}, {hi:.4}]; slopes nonincreasing: {}", a.slopes_nonincreasing);
    }
    println!("wrote {}, {}, {}", csv.display(), svg.display(), json_path.display());
    let config = json!({"pmin": args.pmin, "pmax": pmax, "points": args.points, "optimizer": cfg});
    let outputs = json!({"rates": curve.rates(), "p_bar": analysis.as_ref().map(|a| a.p_bar)});
    run.record("sweep", Some(loaded.hash), config, outputs, artifacts)?;
    Ok(0)
}

pub fn verify(run: &Run, args: &VerifyArgs) -> Result<u8> {
    let suites: Vec<&str> = match args.suite.as_str() {
        "all" => SUITES.to_vec(),
        s if SUITES.contains(&s) => vec![s],
        other => return Err(UsageError(format!("unknown suite {other:?}; expected all or one of {SUITES:?}")).into()),
    };
    let cfg = run.config();
    let mut artifacts = Artifacts::new(run.out);
    let mut reports = Vec::new();
    for suite in suites {
        let start = Instant::now();
        let report = run_suite(suite, args.trials, run.seed, &cfg)?;
        println!(
            "{suite}: {} - {} trials, {} violations, worst slack {:.3e} ({:.1}s)",
            if report.passed() { "PASS" } else { "FAIL" },
            report.trials,
            report.violations,
            report.worst_slack,
            start.elapsed().as_secs_f64()
        );
        if !report.passed() {
            println!("  replay seeds: {:?}", report.instances);
        }
        artifacts.write_json(&format!("verify-{suite}.json"), &report)?;
        reports.push(report);
    }
    let violations: usize = reports.iter().map(|r| r.violations).sum();
    let path = artifacts
        .write_json("verify.json", &json!({"seed": run.seed, "violations": violations, "reports": reports}))?;
    println!("wrote {}", path.display());
    let config = json!({"suite": args.suite, "trials": args.trials, "optimizer": cfg});
    run.record("verify", None, config, json!({"violations": violations}), artifacts)?;
    Ok(if violations == 0 { 0 } else { 1 })
}

pub fn demo(run: &Run, args: &DemoArgs) -> Result<u8> {
    let cfg = run.config();
    let demo = main_theorem_demo(args.epsilon, args.lambda, args.points, &cfg)?;
    let mut artifacts = Artifacts::new(run.out);
    artifacts.write("demo-one-shot.csv", &curve_csv(&demo.one_shot_flagged))?;
    artifacts.write("demo-model.csv", &curve_csv(&demo.model_flagged))?;
    let plot = Plot {
        title: "Flagged channel: one-shot vs regularized model",
        x_label: "P (ebits per use)",
        y_label: "rate (bits per use)",
        series: vec![
            Series::from_curve(&demo.one_shot_flagged, "one-shot", "#1f77b4"),
            Series::from_curve(&demo.model_flagged, "regularized model", "#d62728"),
        ],
        shade: demo.report.witness_interval,
    };
    let svg = artifacts.write("demo.svg", &svg_plot(&plot))?;
    let json_path = artifacts.write_json("demo.json", &demo)?;
    println!("classical branch: eta = {:.6}, capacity = {:.6}", demo.eta, demo.classical_branch);
    println!("endpoint gaps: P=0 {:.2e}, P=max {:.2e}", demo.endpoint_gaps.0, demo.endpoint_gaps.1);
    match demo.report.witness_interval {
        Some((lo, hi)) => println!("superadditivity witnessed on P in [{lo:.4}, {hi:.4}]"),
        None => println!("no superadditivity witness"),
    }
    println!("wrote {}, {}", svg.display(), json_path.display());
    let config = json!({"epsilon": args.epsilon, "lambda": args.lambda, "points": args.points, "optimizer": cfg});
    let outputs =
        json!({"eta": demo.eta, "witness_interval": demo.report.witness_interval, "endpoint_gaps": demo.endpoint_gaps});
    run.record("demo-main-theorem", None, config, outputs, artifacts)?;
    Ok(0)
}

pub fn describe(args: &DescribeArgs) -> Result<u8> {
    let loaded = load_spec(&args.spec)?;
    let ch = &loaded.channel;
    eprintln!("channel: {} ({})", ch.label(), dims(ch));
    eprintln!("classical: {}", ch.is_classical());
    eprintln!("covariant extension: {}", ch.covariant_inner().is_ok());
    eprintln!("completeness deviation: {:.3e}", ch.completeness_deviation());
    eprintln!("spec sha256: {}", loaded.hash);
    let spec = if args.literal { ChannelSpec::literal(ch) } else { loaded.spec };
    println!("{}", spec.to_json());
    Ok(0)
}
