use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hybrid_relay::ba::{train_lambda, BaWeights};
use hybrid_relay::engine::{
    point_training, run_scenario_with, summary_table, write_aggregates, write_records,
    write_relays, PolicyKind, RunMetrics, Scenario,
};
use hybrid_relay::verify::{self, SuiteResult, VerifyOptions};
use hybrid_relay::ChannelModel;

mod recipes;

type CliResult<T> = Result<T, String>;

#[derive(Parser, Debug)]
#[command(
    name = "hrelay",
    version,
    about = "Relay selection for dual-hop hybrid RF/FSO networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Default)]
struct Overrides {
    /// First seed; the scenario's seed list is renumbered from here
    #[arg(long)]
    seed: Option<u64>,

    /// Fading slots per seed and sweep point
    #[arg(long)]
    slots: Option<usize>,

    /// Comma-separated policies, e.g. nonba,ba,delay-ba
    #[arg(long, value_delimiter = ',')]
    policies: Option<Vec<PolicyKind>>,

    /// Relay buffer size in bits for delay-ba
    #[arg(long)]
    qmax: Option<f64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a scenario file and write CSV results
    Run {
        #[arg(long)]
        scenario: PathBuf,

        /// Output directory
        #[arg(long, env = "HRELAY_OUT", default_value = "results")]
        out: PathBuf,

        /// Weights file from train-lambda, used at every sweep point
        #[arg(long)]
        lambda: Option<PathBuf>,

        #[command(flatten)]
        overrides: Overrides,
    },
    /// Run a bundled figure recipe (fig3 .. fig8)
    Figure {
        #[arg(long)]
        figure: String,

        /// Output directory; results go to <out>/<figure>
        #[arg(long, env = "HRELAY_OUT", default_value = "results")]
        out: PathBuf,

        /// Print the recipe files instead of running them
        #[arg(long)]
        print: bool,

        #[command(flatten)]
        overrides: Overrides,
    },
    /// Train the buffer-aided weights of every sweep point
    TrainLambda {
        #[arg(long)]
        scenario: PathBuf,

        #[arg(long, env = "HRELAY_OUT", default_value = "results")]
        out: PathBuf,

        #[arg(long)]
        seed: Option<u64>,

        /// Fading draws per iteration
        #[arg(long)]
        samples: Option<usize>,

        #[arg(long)]
        iterations: Option<usize>,
    },
    /// Run the oracle self checks at reduced scale
    Verify {
        /// Network to check on; defaults to three relays at 800 m
        #[arg(long)]
        scenario: Option<PathBuf>,

        /// Fading slots per stochastic suite
        #[arg(long, default_value_t = 20_000)]
        slots: usize,

        #[arg(long, default_value_t = 1)]
        seed: u64,

        /// Weights file to check for flow balance
        #[arg(long)]
        lambda: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run {
            scenario,
            out,
            lambda,
            overrides,
        } => cmd_run(&scenario, &out, lambda.as_deref(), &overrides),
        Command::Figure {
            figure,
            out,
            print,
            overrides,
        } => cmd_figure(&figure, &out, print, &overrides),
        Command::TrainLambda {
            scenario,
            out,
            seed,
            samples,
            iterations,
        } => cmd_train(&scenario, &out, seed, samples, iterations),
        Command::Verify {
            scenario,
            slots,
            seed,
            lambda,
        } => cmd_verify(scenario.as_deref(), slots, seed, lambda.as_deref()),
    };
    match result {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn load_scenario(path: &Path) -> CliResult<Scenario> {
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
            return Err(format!("scenario file not found: {}", path.display()))
        }
        Err(e) => return Err(format!("cannot read {}: {e}", path.display())),
    };
    Scenario::from_toml(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn apply(s: &mut Scenario, o: &Overrides) -> CliResult<()> {
    if let Some(seed) = o.seed {
        let n = s.run.seeds.len().max(1) as u64;
        s.run.seeds = (seed..seed + n).collect();
        s.training.seed = seed;
    }
    if let Some(slots) = o.slots {
        s.run.slots = slots;
    }
    if let Some(p) = &o.policies {
        s.policies.include = p.clone();
    }
    if let Some(q) = o.qmax {
        s.run.qmax = q;
    }
    s.validate().map_err(|e| e.to_string())
}

fn load_weights(path: &Path) -> CliResult<BaWeights<f64>> {
    BaWeights::load(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn run(s: &Scenario, lambda: Option<&BaWeights<f64>>) -> CliResult<RunMetrics> {
    let weights = match lambda {
        Some(w) => Some(vec![
            w.clone();
            s.points().map_err(|e| e.to_string())?.len()
        ]),
        None => None,
    };
    run_scenario_with(s, weights.as_deref()).map_err(|e| e.to_string())
}

fn write_outputs(runs: &[RunMetrics], out: &Path) -> CliResult<()> {
    let io = |e: std::io::Error| format!("{}: {e}", out.display());
    fs::create_dir_all(out).map_err(io)?;
    let create = |name: &str| File::create(out.join(name)).map(BufWriter::new).map_err(io);
    let csv = |e: hybrid_relay::Error| e.to_string();
    write_records(runs, create("records.csv")?).map_err(csv)?;
    write_aggregates(runs, create("aggregate.csv")?).map_err(csv)?;
    write_relays(runs, create("relays.csv")?).map_err(csv)?;
    let summary: String = runs
        .iter()
        .map(summary_table)
        .collect::<Vec<_>>()
        .join("\n");
    fs::write(out.join("summary.txt"), &summary).map_err(io)?;
    print!("{summary}");
    eprintln!("wrote {}", out.display());
    Ok(())
}

fn cmd_run(path: &Path, out: &Path, lambda: Option<&Path>, o: &Overrides) -> CliResult<ExitCode> {
    let mut s = load_scenario(path)?;
    apply(&mut s, o)?;
    let w = lambda.map(load_weights).transpose()?;
    let m = run(&s, w.as_ref())?;
    write_outputs(&[m], out)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_figure(id: &str, out: &Path, print: bool, o: &Overrides) -> CliResult<ExitCode> {
    let list = recipes::figure(id).ok_or_else(|| {
        format!(
            "unknown figure `{id}` (known: {})",
            recipes::ids().join(", ")
        )
    })?;
    if print {
        for r in list {
            println!("# --- {}.toml\n{}", r.name, r.text);
        }
        return Ok(ExitCode::SUCCESS);
    }
    let mut runs = Vec::new();
    for r in list {
        let mut s = Scenario::from_toml(r.text).map_err(|e| format!("recipe {}: {e}", r.name))?;
        apply(&mut s, o)?;
        eprintln!("running {}", r.name);
        runs.push(run(&s, None)?);
    }
    write_outputs(&runs, &out.join(id))?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_train(
    path: &Path,
    out: &Path,
    seed: Option<u64>,
    samples: Option<usize>,
    iterations: Option<usize>,
) -> CliResult<ExitCode> {
    let mut s = load_scenario(path)?;
    if let Some(seed) = seed {
        s.training.seed = seed;
    }
    if let Some(n) = samples {
        s.training.samples = n;
    }
    if let Some(k) = iterations {
        s.training.iterations = k;
    }
    s.validate().map_err(|e| e.to_string())?;
    let points = s.points().map_err(|e| e.to_string())?;
    fs::create_dir_all(out).map_err(|e| format!("{}: {e}", out.display()))?;
    for (i, p) in points.iter().enumerate() {
        let model = ChannelModel::new(&p.network).map_err(|e| e.to_string())?;
        let w: BaWeights<f64> =
            train_lambda(&model, &point_training(&s.training, i)).map_err(|e| e.to_string())?;
        let name = if points.len() == 1 {
            "lambda.toml".to_string()
        } else {
            format!("lambda-{}.toml", i + 1)
        };
        let file = out.join(name);
        w.save(&file)
            .map_err(|e| format!("{}: {e}", file.display()))?;
        let lambda: Vec<String> = w.lambda.iter().map(|l| format!("{l:.6}")).collect();
        println!(
            "point {} ({} iterations, converged: {}): lambda = [{}] -> {}",
            i + 1,
            w.trace.iterations,
            w.trace.converged,
            lambda.join(", "),
            file.display()
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(
    path: Option<&Path>,
    slots: usize,
    seed: u64,
    lambda: Option<&Path>,
) -> CliResult<ExitCode> {
    let mut opts = VerifyOptions {
        slots,
        seed,
        ..VerifyOptions::default()
    };
    if let Some(p) = path {
        opts.scenario = load_scenario(p)?;
    }
    // an unreadable weights file fails its own suite, the others still run
    let mut bad_weights = None;
    if let Some(p) = lambda {
        match load_weights(p) {
            Ok(w) if w.relays() == opts.scenario.network.relays => opts.weights = Some(w),
            Ok(w) => {
                bad_weights = Some(format!(
                    "{} holds {} weights for a {}-relay network",
                    p.display(),
                    w.relays(),
                    opts.scenario.network.relays
                ))
            }
            Err(e) => bad_weights = Some(e),
        }
    }
    let mut results = verify::run_all(&opts).map_err(|e| e.to_string())?;
    if let Some(reason) = bad_weights {
        for r in results.iter_mut().filter(|r| r.name == "lambda-residual") {
            *r = SuiteResult {
                name: r.name,
                passed: false,
                detail: reason.clone(),
            };
        }
    }
    for r in &results {
        println!("{r}");
    }
    Ok(if results.iter().all(|r| r.passed) {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}
