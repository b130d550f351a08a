use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde_json::{Map, Value};

use clusterkit::harness::commands::{self, Format, Output};
use clusterkit::harness::ExperimentConfig;
use clusterkit::sampling::Method;
use clusterkit::{Error, Model, Result};

#[derive(Parser)]
#[command(name = "clusterkit", version, about = "Weighted sets and multisets of clusters: exact counts, asymptotics, sampling")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON configuration: a file path or an inline JSON object.
    #[arg(long, global = true)]
    config: Option<String>,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value = "json")]
    format: Format,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (defaults to the number of cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

/// Fields that override the corresponding configuration keys.
#[derive(Args, Default)]
struct Overrides {
    #[arg(long, value_enum)]
    model: Option<Model>,
    #[arg(long)]
    n: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Exact coefficients, or the exact law of kappa, L or M.
    Count(Overrides),
    /// Saddle-point estimate of a coefficient or count.
    Estimate(Overrides),
    /// Solve a saddle-point equation.
    Saddle(Overrides),
    /// Draw random cluster structures.
    Sample {
        #[command(flatten)]
        o: Overrides,
        #[arg(long)]
        count: Option<usize>,
        #[arg(long, value_enum)]
        method: Option<Method>,
    },
    /// Gumbel centering and scale of the largest cluster.
    GumbelScale(Overrides),
    /// Sum asymptotics against direct summation.
    EmLemma,
    /// H-admissibility diagnostics on a circle.
    HadmProbe,
    VerifyCoefficients,
    VerifyGumbel,
    VerifySmallest,
    VerifyMoments,
    VerifyLlt,
    VerifyBivariate,
}

fn load_config(arg: Option<&str>) -> Result<Map<String, Value>> {
    let text = match arg {
        None => return Ok(Map::new()),
        Some(s) if s.trim_start().starts_with('{') => s.to_string(),
        Some(path) => std::fs::read_to_string(path)?,
    };
    match serde_json::from_str(&text)? {
        Value::Object(m) => Ok(m),
        _ => Err(Error::InvalidParameter("the configuration must be a JSON object".into())),
    }
}

fn parse<T: DeserializeOwned>(m: Map<String, Value>) -> Result<T> {
    Ok(serde_json::from_value(Value::Object(m))?)
}

fn apply(m: &mut Map<String, Value>, o: &Overrides) {
    if let Some(model) = o.model {
        m.insert("model".into(), serde_json::to_value(model).expect("model serializes"));
    }
    if let Some(n) = o.n {
        m.insert("n".into(), n.into());
    }
}

fn experiment(mut m: Map<String, Value>, name: &str) -> Result<ExperimentConfig> {
    m.insert("experiment".into(), name.into());
    parse(m)
}

fn run(cli: &Cli) -> Result<Output> {
    let mut m = load_config(cli.config.as_deref())?;
    if let Some(seed) = cli.seed {
        m.insert("seed".into(), seed.into());
    }
    match &cli.command {
        Command::Count(o) => {
            apply(&mut m, o);
            commands::count(&parse(m)?)
        }
        Command::Estimate(o) => {
            apply(&mut m, o);
            commands::estimate(&parse(m)?)
        }
        Command::Saddle(o) => {
            apply(&mut m, o);
            if o.model.is_some() {
                let kind = m.remove("model").expect("just inserted");
                m.insert("kind".into(), kind);
            }
            commands::saddle(&parse(m)?)
        }
        Command::Sample { o, count, method } => {
            apply(&mut m, o);
            if let Some(c) = count {
                m.insert("count".into(), (*c).into());
            }
            if let Some(method) = method {
                m.insert("method".into(), serde_json::to_value(method)?);
            }
            commands::sample(&parse(m)?)
        }
        Command::GumbelScale(o) => {
            apply(&mut m, o);
            commands::gumbel_scale(&parse(m)?)
        }
        Command::EmLemma => commands::em_lemma(&parse(m)?),
        Command::HadmProbe => commands::hadm_probe(&parse(m)?),
        Command::VerifyCoefficients => commands::verify(&experiment(m, "coefficients")?),
        Command::VerifyGumbel => commands::verify(&experiment(m, "gumbel")?),
        Command::VerifySmallest => commands::verify(&experiment(m, "smallest")?),
        Command::VerifyMoments => commands::verify(&experiment(m, "moments")?),
        Command::VerifyLlt => commands::verify(&experiment(m, "llt")?),
        Command::VerifyBivariate => commands::verify(&experiment(m, "bivariate")?),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(k) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(k).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let result = run(&cli).and_then(|out| {
        let bytes = out.render(cli.format)?;
        match &cli.out {
            Some(path) => std::fs::write(path, bytes)?,
            None => std::io::stdout().write_all(&bytes)?,
        }
        Ok(())
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
