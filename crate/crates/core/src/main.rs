use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Map, Value};

use seqdisc::b92::{eve_knowledge_rate, run_session, Eve, SessionConfig};
use seqdisc::neumark::{build_dilation, dilation_statistics, povm_equivalence};
use seqdisc::report::{json_to_key_value_csv, round_json_floats};
use seqdisc::sequential::{build_chain, optimal_n_observer, optimize_two_observer, simulate_chain};
use seqdisc::states::make_state_pair;
use seqdisc::strategies::{make_curve, simulate_strategy, StrategyKind};
use seqdisc::ud_povm::build_intermediate_ud;

#[derive(Parser)]
#[command(name = "seqdisc", version, about = "Sequential unambiguous state discrimination")]
struct Cli {
    /// Seed for Monte Carlo commands.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file; standard output when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Output format. Defaults to csv for `curves` and json elsewhere.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Optimal two-observer point and the n-observer optimum.
    Optimize {
        #[arg(long)]
        s: f64,
        #[arg(long, default_value_t = 2)]
        n: usize,
    },
    /// Joint success of the four strategies over a grid of overlaps.
    Curves {
        #[arg(long, default_value_t = 0.0)]
        s_min: f64,
        #[arg(long, default_value_t = 1.0)]
        s_max: f64,
        #[arg(long, default_value_t = 101)]
        steps: usize,
        /// Also write an SVG plot of the four curves here.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Monte Carlo estimate for one strategy or an n-observer chain.
    Simulate {
        /// 1, 2, 3 or seq.
        #[arg(long, default_value = "seq")]
        kind: String,
        #[arg(long)]
        s: f64,
        /// Observers in the chain (seq only).
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, default_value_t = 1_000_000)]
        trials: u64,
    },
    /// Dilation of the optimal measurement and its residuals.
    Neumark {
        #[arg(long)]
        s: f64,
        /// Also write the 6x6 unitary here as CSV.
        #[arg(long)]
        matrix: Option<PathBuf>,
    },
    /// Key distribution session described by a JSON config.
    B92 {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        s: Option<f64>,
        #[arg(long)]
        rounds: Option<u64>,
        /// two_qubit or one_qubit_sequential.
        #[arg(long)]
        mode: Option<String>,
        /// none or intercept_ud.
        #[arg(long)]
        eve: Option<String>,
    },
}

fn to_value<T: Serialize>(v: &T) -> Result<Value> {
    Ok(serde_json::to_value(v)?)
}

fn render(mut value: Value, format: Format) -> Result<String> {
    round_json_floats(&mut value);
    Ok(match format {
        Format::Json => {
            let mut text = serde_json::to_string_pretty(&value)?;
            text.push('\n');
            text
        }
        Format::Csv => json_to_key_value_csv(&value),
    })
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => write_text(path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn optimize(s: f64, n: usize) -> Result<Value> {
    let two = optimize_two_observer(s)?;
    let p_n = optimal_n_observer(s, n)?;
    let mut v = to_value(&two)?;
    let obj = v.as_object_mut().expect("struct serializes to an object");
    obj.insert("n".into(), json!(n));
    obj.insert("p_n".into(), json!(p_n));
    Ok(v)
}

fn simulate(kind: &str, s: f64, n: usize, trials: u64, seed: u64) -> Result<Value> {
    let kind: StrategyKind = kind.parse()?;
    let (report, analytic) = match kind {
        StrategyKind::Sequential => {
            let chain = build_chain(s, n)?;
            (simulate_chain(&chain, trials, seed)?, chain.analytic_joint_success())
        }
        other => {
            if n != 2 {
                bail!("invalid parameter `n`: strategy {other} involves exactly 2 observers");
            }
            (simulate_strategy(other, s, trials, seed)?, other.closed_form(s)?)
        }
    };
    let mut v = to_value(&report)?;
    let obj = v.as_object_mut().expect("struct serializes to an object");
    obj.insert("kind".into(), json!(kind.to_string()));
    obj.insert("s".into(), json!(s));
    obj.insert("seed".into(), json!(seed));
    obj.insert("analytic_joint_probability".into(), json!(analytic));
    Ok(v)
}

fn neumark(s: f64, matrix: Option<&Path>) -> Result<Value> {
    let d = build_dilation(s)?;
    let meas = build_intermediate_ud(&make_state_pair(s)?, s.sqrt(), s.sqrt())?;
    let one = dilation_statistics(&d, 1)?;
    let two = dilation_statistics(&d, 2)?;
    if let Some(path) = matrix {
        write_text(path, &d.to_csv())?;
    }
    Ok(json!({
        "s": s,
        "theta": d.theta,
        "theta_prime": d.theta_prime,
        "unitarity_residual": d.unitarity_residual()?,
        "equivalence_residual": povm_equivalence(&d, &meas)?,
        "input1_probabilities": one.probabilities,
        "input2_probabilities": two.probabilities,
    }))
}

fn b92(
    config: Option<&Path>,
    seed: Option<u64>,
    overrides: [(&str, Option<Value>); 4],
) -> Result<Value> {
    let mut fields = match config {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
            match serde_json::from_str(&text).with_context(|| format!("malformed JSON in {}", path.display()))? {
                Value::Object(map) => map,
                _ => bail!("invalid parameter `config`: expected a JSON object"),
            }
        }
        None => Map::new(),
    };
    for (name, value) in overrides {
        if let Some(v) = value {
            fields.insert(name.into(), v);
        }
    }
    if let Some(seed) = seed {
        fields.insert("seed".into(), json!(seed));
    }
    let cfg = SessionConfig::from_json(&Value::Object(fields))?;
    let report = run_session(&cfg)?;
    let mut v = json!({ "config": cfg, "report": report });
    if cfg.eve != Eve::None {
        v["eve_knowledge_analytic"] = json!(eve_knowledge_rate(&cfg)?);
    }
    Ok(v)
}

fn run(cli: Cli) -> Result<()> {
    let out = cli.out.as_deref();
    match cli.command {
        Command::Optimize { s, n } => emit(out, &render(optimize(s, n)?, cli.format.unwrap_or(Format::Json))?),
        Command::Curves {
            s_min,
            s_max,
            steps,
            svg,
        } => {
            let curve = make_curve(s_min, s_max, steps)?;
            let text = match cli.format.unwrap_or(Format::Csv) {
                Format::Csv => curve.to_csv(),
                Format::Json => render(to_value(&curve)?, Format::Json)?,
            };
            emit(out, &text)?;
            if let Some(path) = svg {
                write_text(&path, &curve.to_svg())?;
            }
            Ok(())
        }
        Command::Simulate { kind, s, n, trials } => {
            let v = simulate(&kind, s, n, trials, cli.seed.unwrap_or(0))?;
            emit(out, &render(v, cli.format.unwrap_or(Format::Json))?)
        }
        Command::Neumark { s, matrix } => {
            let v = neumark(s, matrix.as_deref())?;
            emit(out, &render(v, cli.format.unwrap_or(Format::Json))?)
        }
        Command::B92 {
            config,
            s,
            rounds,
            mode,
            eve,
        } => {
            let overrides = [
                ("s", s.map(|x| json!(x))),
                ("rounds", rounds.map(|x| json!(x))),
                ("mode", mode.map(Value::String)),
                ("eve", eve.map(Value::String)),
            ];
            let v = b92(config.as_deref(), cli.seed, overrides)?;
            emit(out, &render(v, cli.format.unwrap_or(Format::Json))?)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
