//! `mmrisk`: exact, asymptotic and simulated risk of missing-mass
//! estimators, plus the minimax bound calculators.
//!
//! Exit codes: 0 on success, 2 for usage errors, 3 when a computation
//! rejects its inputs or would exceed a resource limit.

mod output;

use std::fs;
use std::io::{self, Write};
use std::process::ExitCode;
use std::time::Instant;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use mmrisk_core::bounds::{self, BernoulliEstimator};
use mmrisk_core::montecarlo::{self, SweepMethod};
use mmrisk_core::{risk, DirichletSpec, DistSpec, EstimatorSpec, SimConfig, SweepAxis};
use serde_json::{json, Value};

const EXIT_PRECONDITION: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "mmrisk", version, about = "Risk of missing-mass estimators")]
struct Cli {
    /// Worker threads for parallel sections (0 = one per core).
    #[arg(long, global = true, env = "MMRISK_THREADS", default_value_t = 0)]
    threads: usize,

    /// Add elapsed wall time to the JSON record. Output is then no longer
    /// byte-for-byte reproducible.
    #[arg(long, global = true)]
    timing: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Risk or bias of an estimator under a fixed distribution.
    Risk(RiskArgs),
    /// Bounds on the minimax risk and the checks behind them.
    Bounds(BoundsArgs),
    /// Maximize the worst-case risk coefficients.
    Optimize(OptimizeArgs),
    /// Risk along one parameter axis, as CSV.
    Sweep(SweepArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum RiskMode {
    Exact,
    Asymptotic,
    Mc,
    Brute,
    Bias,
    McBias,
}

#[derive(Args, Debug)]
struct RiskArgs {
    #[arg(long, value_enum)]
    method: RiskMode,
    /// Distribution: uniform:K, pc:P0:K, zipf:K:S, uniform-cn:C,
    /// explicit:P1,P2,... or explicit:@file.json.
    #[arg(long, value_parser = parse_dist)]
    dist: DistSpec,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 100_000)]
    reps: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// `gt` or `dirichlet:<alpha>:<k>`.
    #[arg(long, default_value = "gt")]
    estimator: EstimatorSpec,
}

#[derive(Args, Debug)]
#[command(group(
    ArgGroup::new("mode")
        .required(true)
        .args(["dirichlet", "bracket", "de3", "bernoulli", "mc_bayes"])
))]
struct BoundsArgs {
    /// Bayes risk under the scaled symmetric Dirichlet prior.
    #[arg(long)]
    dirichlet: bool,
    /// Lower and upper constants bracketing the minimax risk.
    #[arg(long)]
    bracket: bool,
    /// Concentration of the missing mass under the P_c family.
    #[arg(long)]
    de3: bool,
    /// Worst-case risk of the Bernoulli estimators on [1/2, 1].
    #[arg(long)]
    bernoulli: bool,
    /// Closed-form Dirichlet Bayes risk against simulation.
    #[arg(long)]
    mc_bayes: bool,

    #[arg(long)]
    n: usize,
    /// Prior size factor, k = ceil(c n^2).
    #[arg(long, default_value_t = 0.5)]
    c: f64,
    #[arg(long, default_value_t = 0.5)]
    p0: f64,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long, default_value_t = 10_001)]
    grid: usize,
    #[arg(long, default_value_t = 100_000)]
    reps: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Target {
    GtUniform,
    Dirichlet,
}

#[derive(Args, Debug)]
struct OptimizeArgs {
    #[arg(long, value_enum)]
    target: Target,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum SweepMode {
    Exact,
    Asymptotic,
    Mc,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[arg(long)]
    axis: SweepAxis,
    #[arg(long, required = true, value_delimiter = ',', num_args = 1..)]
    values: Vec<f64>,
    /// Sample length; required unless sweeping over n.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, value_parser = parse_dist, default_value = "uniform-cn:1")]
    dist: DistSpec,
    #[arg(long, value_enum, default_value = "exact")]
    method: SweepMode,
    #[arg(long, default_value_t = 10_000)]
    reps: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "gt")]
    estimator: EstimatorSpec,
}

/// Flag-level distribution parser. `explicit:@path` reads either a full
/// JSON descriptor or a bare probability array from `path`.
fn parse_dist(s: &str) -> Result<DistSpec, String> {
    let Some(path) = s.trim().strip_prefix("explicit:@") else {
        return s.parse().map_err(|e| format!("{e}"));
    };
    let text = fs::read_to_string(path).map_err(|e| format!("cannot read {path}: {e}"))?;
    if let Ok(spec) = serde_json::from_str::<DistSpec>(&text) {
        return Ok(spec);
    }
    serde_json::from_str::<Vec<f64>>(&text)
        .map(|probs| DistSpec::Explicit { probs })
        .map_err(|e| format!("{path} is neither a distribution descriptor nor an array: {e}"))
}

type CmdResult<T> = Result<T, mmrisk_core::Error>;

struct Outcome {
    params: Value,
    results: Value,
    seed: Option<u64>,
}

fn gt_only(e: &EstimatorSpec, what: &str) -> CmdResult<()> {
    if *e == EstimatorSpec::GoodTuring {
        Ok(())
    } else {
        Err(mmrisk_core::Error::InvalidArgument(format!(
            "{what} is only available for the Good-Turing estimator"
        )))
    }
}

fn to_value<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report types serialize")
}

fn cmd_risk(a: &RiskArgs) -> CmdResult<Outcome> {
    let cfg = SimConfig::new(a.n, a.reps, a.seed, a.estimator, a.dist.clone());
    let uses_seed = matches!(a.method, RiskMode::Mc | RiskMode::McBias);
    let results = match a.method {
        RiskMode::Exact => {
            gt_only(&a.estimator, "exact risk")?;
            to_value(&risk::exact_risk_gt_spec(&a.dist, a.n)?)
        }
        RiskMode::Asymptotic => {
            gt_only(&a.estimator, "asymptotic risk")?;
            to_value(&risk::asymptotic_risk_gt_spec(&a.dist, a.n)?)
        }
        RiskMode::Mc => to_value(&montecarlo::mc_risk_report(&cfg)?),
        RiskMode::Brute => {
            let d = cfg.validate()?;
            to_value(&risk::brute_force_risk(&d, a.n, &a.estimator)?)
        }
        RiskMode::Bias => {
            gt_only(&a.estimator, "exact bias")?;
            let d = a.dist.build(a.n)?;
            let bias = risk::exact_bias_gt(&d, a.n)?;
            json!({ "n": a.n, "dist": d.label(), "bias": bias, "bound": 1.0 / a.n as f64 })
        }
        RiskMode::McBias => {
            let est = montecarlo::mc_bias(&cfg)?;
            json!({ "n": a.n, "bias": est.mean, "stderr": est.stderr, "reps": est.stats.count() })
        }
    };
    let mut params = json!({
        "method": a.method.to_possible_value().map(|v| v.get_name().to_owned()),
        "dist": a.dist.to_string(),
        "n": a.n,
        "estimator": a.estimator.to_string(),
    });
    if uses_seed {
        params["reps"] = json!(a.reps);
    }
    Ok(Outcome {
        params,
        results,
        seed: uses_seed.then_some(a.seed),
    })
}

fn cmd_bounds(a: &BoundsArgs) -> CmdResult<Outcome> {
    if a.dirichlet {
        let report = bounds::dirichlet_bound(a.n, a.c)?;
        return Ok(Outcome {
            params: json!({ "mode": "dirichlet", "n": a.n, "c": a.c }),
            results: json!({
                "bound": to_value(&report),
                "coefficient": bounds::dirichlet_coefficient(a.c)?,
                "limit": 4.0 / 27.0,
            }),
            seed: None,
        });
    }
    if a.bracket {
        let b = bounds::minimax_bracket(a.n)?;
        return Ok(Outcome {
            params: json!({ "mode": "bracket", "n": a.n }),
            results: json!({ "lower": to_value(&b.lower), "upper": to_value(&b.upper) }),
            seed: None,
        });
    }
    if a.de3 {
        let r = bounds::de3_check(a.n, a.p0, a.reps, a.seed)?;
        let mut results = to_value(&r);
        results["rate_ok"] = json!(r.rate_ok());
        results["gap_ok"] = json!(r.gap_ok());
        return Ok(Outcome {
            params: json!({ "mode": "de3", "n": a.n, "p0": a.p0, "reps": a.reps }),
            results,
            seed: Some(a.seed),
        });
    }
    if a.bernoulli {
        let mut results = serde_json::Map::new();
        for (name, kind) in [
            ("empirical", BernoulliEstimator::Empirical),
            ("add_half_sqrt_n", BernoulliEstimator::AddHalfSqrtN),
        ] {
            let w = bounds::bernoulli_worst_case_risk(a.n, kind, a.grid)?;
            results.insert(
                name.into(),
                json!({
                    "p_worst": w.p_worst,
                    "risk": w.risk,
                    "normalized_risk": a.n as f64 * w.risk,
                    "closed_form": kind.worst_case_closed_form(a.n),
                }),
            );
        }
        return Ok(Outcome {
            params: json!({ "mode": "bernoulli", "n": a.n, "grid": a.grid }),
            results: Value::Object(results),
            seed: None,
        });
    }
    // --mc-bayes
    let spec = match (a.k, a.alpha) {
        (Some(k), Some(alpha)) => DirichletSpec::new(k, alpha)?,
        (None, None) => DirichletSpec::scaled(a.n, a.c)?,
        _ => {
            return Err(mmrisk_core::Error::InvalidArgument(
                "--k and --alpha must be given together".into(),
            ))
        }
    };
    let closed = bounds::dirichlet_bayes_risk(a.n, &spec)?;
    let mc = bounds::mc_bayes_variance(a.n, &spec, a.reps, a.seed)?;
    Ok(Outcome {
        params: json!({
            "mode": "mc_bayes", "n": a.n, "k": spec.k(), "alpha": spec.alpha(), "reps": a.reps,
        }),
        results: json!({
            "closed_form": closed,
            "mc_mean": mc.mean,
            "mc_stderr": mc.stderr,
            "z": (closed - mc.mean) / mc.stderr,
        }),
        seed: Some(a.seed),
    })
}

fn cmd_optimize(a: &OptimizeArgs) -> CmdResult<Outcome> {
    let (name, m, extra) = match a.target {
        Target::GtUniform => (
            "gt-uniform",
            risk::maximize_uniform_coefficient(),
            json!({ "upper_bound_constant": risk::gt_upper_bound_constant() }),
        ),
        Target::Dirichlet => (
            "dirichlet",
            bounds::maximize_dirichlet_coefficient(),
            json!({ "closed_form": 4.0 / 27.0 }),
        ),
    };
    let mut results = json!({ "c": m.argmax, "value": m.value, "iterations": m.iterations });
    if let (Value::Object(r), Value::Object(e)) = (&mut results, extra) {
        r.extend(e);
    }
    Ok(Outcome {
        params: json!({ "target": name }),
        results,
        seed: None,
    })
}

fn cmd_sweep(a: &SweepArgs, out: &mut impl Write) -> CmdResult<()> {
    let n = match (a.axis, a.n) {
        (_, Some(n)) => n,
        (SweepAxis::N, None) => 1,
        (_, None) => {
            return Err(mmrisk_core::Error::InvalidArgument(format!(
                "--n is required when sweeping over {}",
                a.axis
            )))
        }
    };
    let method = match a.method {
        SweepMode::Exact => SweepMethod::Exact,
        SweepMode::Asymptotic => SweepMethod::Asymptotic,
        SweepMode::Mc => SweepMethod::Mc,
    };
    let base = SimConfig::new(n, a.reps, a.seed, a.estimator, a.dist.clone());
    let rows = montecarlo::sweep(&base, a.axis, &a.values, method)?;
    let mut text = String::from(output::CSV_HEADER);
    text.push('\n');
    for row in &rows {
        text.push_str(&output::csv_row(row));
        text.push('\n');
    }
    let _ = out.write_all(text.as_bytes());
    Ok(())
}

fn record(command: &str, outcome: Outcome, elapsed: Option<f64>) -> Value {
    let argv: Vec<String> = std::env::args().skip(1).collect();
    let mut rec = json!({
        "command": command,
        "argv": argv,
        "params": outcome.params,
        "results": outcome.results,
        "seed": outcome.seed,
        "version": env!("CARGO_PKG_VERSION"),
    });
    if let Some(t) = elapsed {
        rec["wall_time_s"] = json!(t);
    }
    rec
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.threads > 0 {
        // Fails only if a pool already exists, which cannot happen here.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global();
    }
    let start = Instant::now();
    let stdout = io::stdout();
    let mut out = stdout.lock();

    let result = match &cli.command {
        Command::Sweep(a) => cmd_sweep(a, &mut out).map(|_| None),
        Command::Risk(a) => cmd_risk(a).map(|o| Some(("risk", o))),
        Command::Bounds(a) => cmd_bounds(a).map(|o| Some(("bounds", o))),
        Command::Optimize(a) => cmd_optimize(a).map(|o| Some(("optimize", o))),
    };
    match result {
        Ok(Some((name, outcome))) => {
            let elapsed = cli.timing.then(|| start.elapsed().as_secs_f64());
            let line = output::to_json(&record(name, outcome, elapsed));
            let _ = writeln!(out, "{line}");
            ExitCode::SUCCESS
        }
        Ok(None) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_PRECONDITION)
        }
    }
}
