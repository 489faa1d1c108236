//! `fairvote` command-line front end.
//!
//! Exit codes: 0 success, 1 usage/IO/parse error, 2 proven infeasible,
//! 3 feasibility unknown.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use fairvote::experiments::{
    generate_euclidean, run_experiment, EuclideanConfig, ExperimentOutput,
};
use fairvote::{
    eval_score, feasibility_exact, solve, violation_report, Committee, Error, FeasibilityOptions,
    FeasibilityStatus, Instance, Rule, Solution, SolveOptions, Strategy,
};
use serde_json::json;

/// Seed used when `--seed` is not given.
const DEFAULT_SEED: u64 = 2022;

#[derive(Parser, Debug)]
#[command(
    name = "fairvote",
    version,
    about = "Multiwinner committee selection under group fairness bounds"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output format
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Diagnostics on stderr
    #[arg(short, long, global = true)]
    verbose: bool,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Select a committee
    Solve(SolveArgs),
    /// Decide whether any committee meets the bounds
    Feasibility(FeasibilityArgs),
    /// Run the 2D Euclidean study
    Experiment(ExperimentArgs),
    /// Write one Euclidean instance as an instance document
    Generate(GenerateArgs),
    /// Evaluate a given committee
    Score(ScoreArgs),
}

#[derive(Args, Debug)]
struct SolveArgs {
    #[arg(long)]
    instance: PathBuf,
    /// sntv, bloc, k-borda, alpha-cc or beta-cc
    #[arg(long)]
    rule: String,
    #[arg(long, default_value = "auto", help = strategy_help())]
    strategy: String,
    /// Master seed [default: 2022]
    #[arg(long)]
    seed: Option<u64>,
    /// Deadline for feasibility search inside the solver
    #[arg(long, default_value_t = 2000)]
    deadline_ms: u64,
    /// Continuous greedy steps [default: max(10k, 100)]
    #[arg(long)]
    steps: Option<usize>,
    /// Roundings per fractional point
    #[arg(long)]
    rounds: Option<usize>,
}

fn strategy_help() -> String {
    let names: Vec<&str> = Strategy::ALL.iter().map(|s| s.name()).collect();
    format!("Solver: {}", names.join(", "))
}

#[derive(Args, Debug)]
struct FeasibilityArgs {
    #[arg(long)]
    instance: PathBuf,
    /// Master seed [default: 2022]
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 2000)]
    deadline_ms: u64,
}

#[derive(Args, Debug)]
struct ExperimentArgs {
    /// JSON config; missing fields take their defaults
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the configured repetitions
    #[arg(long)]
    reps: Option<usize>,
    /// Overrides the configured seed
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated rules, overriding the config
    #[arg(long, value_delimiter = ',')]
    rules: Option<Vec<String>>,
    /// Where trials.csv, summary.csv and metadata.json go
    #[arg(long, default_value = "fairvote-out")]
    out_dir: PathBuf,
}

#[derive(Args, Debug)]
struct GenerateArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Trial index whose instance is generated
    #[arg(long, default_value_t = 0)]
    trial: usize,
    /// Overrides the configured seed
    #[arg(long)]
    seed: Option<u64>,
    /// Output path; stdout when absent
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ScoreArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long)]
    rule: String,
    /// Comma-separated 1-based candidate ids
    #[arg(long, value_delimiter = ',', required = true)]
    committee: Vec<usize>,
}

/// A finished command: what to print and the exit code.
struct Done {
    code: u8,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(done) => ExitCode::from(done.code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<Error>() {
        Some(
            Error::Infeasible(_)
            | Error::NoPerfectMatching
            | Error::StructurallyInfeasibleGroup { .. },
        ) => 2,
        Some(Error::FeasibilityUnknown(_)) => 3,
        _ => 1,
    }
}

fn run(cli: &Cli) -> Result<Done> {
    match &cli.command {
        Command::Solve(a) => cmd_solve(cli, a),
        Command::Feasibility(a) => cmd_feasibility(cli, a),
        Command::Experiment(a) => cmd_experiment(cli, a),
        Command::Generate(a) => cmd_generate(a),
        Command::Score(a) => cmd_score(cli, a),
    }
}

fn load_instance(path: &Path) -> Result<Instance> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    // keep the library error so a structurally infeasible group maps to exit 2
    Ok(Instance::from_json(&text)?)
}

fn load_config(path: Option<&Path>) -> Result<EuclideanConfig> {
    let Some(path) = path else {
        return Ok(EuclideanConfig::default());
    };
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
}

fn print_json(v: &serde_json::Value) -> Result<()> {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, v)?;
    writeln!(out)?;
    Ok(())
}

fn print_csv(header: &[&str], row: &[String]) -> Result<()> {
    let mut wr = csv::Writer::from_writer(io::stdout().lock());
    wr.write_record(header)?;
    wr.write_record(row)?;
    wr.flush()?;
    Ok(())
}

fn join(ids: &[usize]) -> String {
    ids.iter()
        .map(usize::to_string)
        .collect::<Vec<_>>()
        .join(";")
}

fn cmd_solve(cli: &Cli, a: &SolveArgs) -> Result<Done> {
    let inst = load_instance(&a.instance)?;
    let rule = Rule::from_name(&a.rule)?;
    let defaults = SolveOptions::default();
    let opts = SolveOptions {
        strategy: Strategy::from_name(&a.strategy)?,
        seed: a.seed.unwrap_or(DEFAULT_SEED),
        steps: a.steps,
        rounds: a.rounds.unwrap_or(defaults.rounds),
        feasibility: FeasibilityOptions {
            deadline: Duration::from_millis(a.deadline_ms),
            ..defaults.feasibility.clone()
        },
        ..defaults
    };
    let sol: Solution = solve(&inst, &rule, &opts)?;
    if cli.verbose {
        eprintln!("solver {} finished in {:.1?}", sol.solver, sol.runtime);
    }
    match cli.format {
        Format::Json => print_json(&sol.to_json(&inst))?,
        Format::Csv => print_csv(
            &[
                "committee",
                "score",
                "solver",
                "guarantee",
                "feasible",
                "seed",
            ],
            &[
                join(&sol.committee.one_based()),
                sol.score.to_string(),
                sol.solver.clone(),
                sol.guarantee.to_json()["kind"]
                    .as_str()
                    .unwrap_or_default()
                    .to_string(),
                sol.committee.is_feasible(&inst).to_string(),
                sol.seed.to_string(),
            ],
        )?,
    }
    Ok(Done { code: 0 })
}

fn cmd_feasibility(cli: &Cli, a: &FeasibilityArgs) -> Result<Done> {
    let inst = load_instance(&a.instance)?;
    let opts = FeasibilityOptions {
        deadline: Duration::from_millis(a.deadline_ms),
        seed: a.seed.unwrap_or(DEFAULT_SEED),
        ..FeasibilityOptions::default()
    };
    let report = feasibility_exact(&inst, &opts);
    if cli.verbose {
        eprintln!("decided by {}", report.method);
    }
    let (status, code, witness) = match &report.status {
        FeasibilityStatus::Feasible(c) => ("feasible", 0, join(&c.one_based())),
        FeasibilityStatus::Infeasible(_) => ("infeasible", 2, String::new()),
        FeasibilityStatus::Unknown(_) => ("unknown", 3, String::new()),
    };
    match cli.format {
        Format::Json => print_json(&report.to_json())?,
        Format::Csv => print_csv(
            &["status", "method", "delta", "witness"],
            &[
                status.to_string(),
                report.method.to_string(),
                report.delta.to_string(),
                witness,
            ],
        )?,
    }
    Ok(Done { code })
}

fn cmd_experiment(cli: &Cli, a: &ExperimentArgs) -> Result<Done> {
    let mut cfg = load_config(a.config.as_deref())?;
    if let Some(r) = a.reps {
        cfg.repetitions = r;
    }
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    if let Some(rules) = &a.rules {
        cfg.rules = rules.clone();
    }
    cfg.validate()?;
    let out: ExperimentOutput = run_experiment(&cfg)?;

    fs::create_dir_all(&a.out_dir).with_context(|| format!("creating {}", a.out_dir.display()))?;
    let create = |name: &str| {
        let p = a.out_dir.join(name);
        fs::File::create(&p).with_context(|| format!("creating {}", p.display()))
    };
    out.write_trials_csv(io::BufWriter::new(create("trials.csv")?))?;
    out.write_summary_csv(io::BufWriter::new(create("summary.csv")?))?;
    serde_json::to_writer_pretty(create("metadata.json")?, &ExperimentOutput::metadata(&cfg))?;
    if cli.verbose {
        eprintln!(
            "wrote {} trial records to {}",
            out.trials.len(),
            a.out_dir.display()
        );
    }

    match cli.format {
        Format::Json => print_json(&serde_json::to_value(&out.rows)?)?,
        Format::Csv => out.write_summary_csv(io::stdout().lock())?,
    }
    Ok(Done { code: 0 })
}

fn cmd_generate(a: &GenerateArgs) -> Result<Done> {
    let mut cfg = load_config(a.config.as_deref())?;
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    cfg.validate()?;
    let ei = generate_euclidean(&cfg, cfg.trial_seed(a.trial))?;
    let text = ei.instance.to_json_pretty();
    match &a.out {
        Some(p) => fs::write(p, text + "\n").with_context(|| format!("writing {}", p.display()))?,
        None => println!("{text}"),
    }
    Ok(Done { code: 0 })
}

fn cmd_score(cli: &Cli, a: &ScoreArgs) -> Result<Done> {
    let inst = load_instance(&a.instance)?;
    let rule = Rule::from_name(&a.rule)?;
    let committee = Committee::from_one_based(&inst, &a.committee)?;
    if committee.len() != inst.k() {
        bail!(
            "committee has {} members but k = {}",
            committee.len(),
            inst.k()
        );
    }
    let score = eval_score(&rule, &inst, committee.members())?;
    let feasible = committee.is_feasible(&inst);
    match cli.format {
        Format::Json => print_json(&json!({
            "committee": committee.one_based(),
            "rule": rule.name(),
            "score": score,
            "feasible": feasible,
            "violation": violation_report(&committee, &inst).to_json(),
        }))?,
        Format::Csv => print_csv(
            &["committee", "rule", "score", "feasible"],
            &[
                join(&committee.one_based()),
                rule.name().to_string(),
                score.to_string(),
                feasible.to_string(),
            ],
        )?,
    }
    Ok(Done { code: 0 })
}
