//! Command-line front end: validation, the exhaustive searches, game play,
//! the hidden-variable grid, and distribution inspection, all seeded and
//! reproducible.
//!
//! Exit codes: 0 on success, 1 for usage/parse errors, 2 when a custom input
//! set fails validation. An unwinnable game is a result, not an error.

use std::fs;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use kspt_core::coloring::{min_contextuality, parity_certificate, search_noncontextual};
use kspt_core::harness::play_rounds;
use kspt_core::hvt2d::verification_table;
use kspt_core::ks::setfile::{parse_set_text, SetFileError};
use kspt_core::ks::{cabello_set, validate_bases, IntVec4, KsSet};
use kspt_core::quantum::joint_distribution;
use kspt_core::strategies::{self, DeterministicStrategy, MixtureStrategy, Strategy};

#[derive(Parser)]
#[command(
    name = "kspt",
    version,
    about = "18-ray Kochen-Specker construction and the pseudo-telepathy game built on it"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a vector set: orthogonality, distinct rays, occurrence counts
    Verify(SetArgs),
    /// Exhaustive noncontextual search plus the parity certificate
    Search(SetArgs),
    /// Minimum-contextuality search over all per-basis slot choices
    MinContext(SetArgs),
    /// Exhaustive search for the best deterministic strategy
    BestClassical(SetArgs),
    /// Play seeded rounds of a strategy and emit the transcript
    Play(PlayArgs),
    /// Verify the 2-D hidden-variable model against the Born rule
    Hvt2d(HvtArgs),
    /// Dump the exact joint outcome distribution for a basis pair
    Inspect(InspectArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Human,
    Json,
}

#[derive(Args)]
struct SetArgs {
    /// Vector set: "builtin" or a path to a set file
    #[arg(long, default_value = "builtin")]
    set: String,
    #[arg(long, value_enum, default_value_t = Format::Human)]
    format: Format,
}

#[derive(Args)]
struct PlayArgs {
    #[command(flatten)]
    common: SetArgs,
    /// quantum | best-classical | one-cbit | deterministic:<file> | mixture:<file>
    #[arg(long)]
    strategy: String,
    #[arg(long, default_value_t = 10_000)]
    rounds: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct HvtArgs {
    #[arg(long, value_enum, default_value_t = Format::Human)]
    format: Format,
    /// Monte Carlo samples per grid pair
    #[arg(long, default_value_t = 10_000)]
    rounds: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Grid size; odd sizes hit overlaps -1, 0, +1 exactly
    #[arg(long, default_value_t = 101)]
    pairs: usize,
}

#[derive(Args)]
struct InspectArgs {
    #[command(flatten)]
    common: SetArgs,
    /// Alice's basis, 1-based as printed
    #[arg(long)]
    alice_basis: usize,
    /// Bob's basis, 1-based as printed
    #[arg(long)]
    bob_basis: usize,
}

struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: 1,
            message: message.into(),
        }
    }

    fn invalid_set(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprint!("{e}");
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("kspt: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    match cli.command {
        Command::Verify(args) => verify(&args),
        Command::Search(args) => search(&args),
        Command::MinContext(args) => min_context(&args),
        Command::BestClassical(args) => best_classical_cmd(&args),
        Command::Play(args) => play(&args),
        Command::Hvt2d(args) => hvt2d(&args),
        Command::Inspect(args) => inspect(&args),
    }
}

fn load_raw_bases(source: &str) -> Result<Vec<[IntVec4; 4]>, CliError> {
    if source == "builtin" {
        return Ok(cabello_set().bases().iter().map(|b| *b.vectors()).collect());
    }
    let text = fs::read_to_string(source)
        .map_err(|e| CliError::usage(format!("cannot read set file {source}: {e}")))?;
    parse_set_text(&text).map_err(|e| CliError::usage(format!("set file {source}: {e}")))
}

fn load_set(source: &str) -> Result<KsSet, CliError> {
    if source == "builtin" {
        return Ok(cabello_set());
    }
    let text = fs::read_to_string(source)
        .map_err(|e| CliError::usage(format!("cannot read set file {source}: {e}")))?;
    kspt_core::ks::setfile::parse_set(&text).map_err(|e| match e {
        SetFileError::Parse(p) => CliError::usage(format!("set file {source}: {p}")),
        SetFileError::Invalid(v) => CliError::invalid_set(format!("set file {source}: {v}")),
    })
}

fn emit(value: serde_json::Value) {
    println!(
        "{}",
        serde_json::to_string_pretty(&value).expect("reports serialize")
    );
}

fn verify(args: &SetArgs) -> Result<ExitCode, CliError> {
    let raw = load_raw_bases(&args.set)?;
    let report = validate_bases(&raw);
    match args.format {
        Format::Json => emit(report.to_json_value()),
        Format::Human => {
            println!("set: {} ({} bases)", args.set, report.bases.len());
            for basis in &report.bases {
                if basis.orthogonal() {
                    println!("basis {}: orthogonal", basis.index + 1);
                } else {
                    for v in &basis.violations {
                        println!(
                            "basis {}: slots {} and {} not orthogonal (dot {}){}",
                            basis.index + 1,
                            v.slot_a + 1,
                            v.slot_b + 1,
                            v.dot,
                            if v.same_ray { " (same ray)" } else { "" }
                        );
                    }
                }
            }
            println!("distinct rays: {}", report.distinct_vectors());
            let multiset: Vec<String> = report
                .occurrence_multiset()
                .iter()
                .map(|(count, rays)| format!("{rays} rays x{count}"))
                .collect();
            println!("occurrence counts: {}", multiset.join(", "));
            println!("valid: {}", if report.is_valid() { "yes" } else { "no" });
        }
    }
    if report.is_valid() {
        Ok(ExitCode::SUCCESS)
    } else {
        Ok(ExitCode::from(2))
    }
}

fn search(args: &SetArgs) -> Result<ExitCode, CliError> {
    let set = load_set(&args.set)?;
    let satisfying = search_noncontextual(&set).map_err(|e| CliError::usage(e.to_string()))?;
    let certificate = parity_certificate(&set);
    match args.format {
        Format::Json => emit(json!({
            "satisfying": satisfying.iter().map(|a| a.to_json_value()).collect::<Vec<_>>(),
            "parityCertificate": certificate.as_ref().map(|c| c.to_json_value()),
        })),
        Format::Human => {
            println!("satisfying noncontextual assignments: {}", satisfying.len());
            if satisfying.len() <= 32 {
                for a in &satisfying {
                    let marked: Vec<String> = a
                        .values()
                        .iter()
                        .filter(|(_, &bit)| bit)
                        .map(|(v, _)| v.to_string())
                        .collect();
                    println!("  1-rays: {}", marked.join(" "));
                }
            }
            match &certificate {
                Some(c) => println!(
                    "parity certificate: {} bases (odd), every occurrence count even: unsatisfiable",
                    c.basis_count()
                ),
                None => println!("parity certificate: none"),
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn min_context(args: &SetArgs) -> Result<ExitCode, CliError> {
    let set = load_set(&args.set)?;
    let result = min_contextuality(&set).map_err(|e| CliError::usage(e.to_string()))?;
    match args.format {
        Format::Json => emit(result.to_json_value()),
        Format::Human => {
            println!("minimum contextuality defect: {}", result.defect);
            let witness: Vec<String> = result
                .witness
                .choices()
                .iter()
                .map(|c| (c + 1).to_string())
                .collect();
            println!("witness slot per basis: {}", witness.join(" "));
            if result.mismatched.is_empty() {
                println!("mismatched rays: none");
            } else {
                let rays: Vec<String> = result.mismatched.iter().map(|v| v.to_string()).collect();
                println!("mismatched rays: {}", rays.join(" "));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn best_classical_cmd(args: &SetArgs) -> Result<ExitCode, CliError> {
    let set = load_set(&args.set)?;
    let (win, strategy) =
        strategies::best_classical(&set).map_err(|e| CliError::usage(e.to_string()))?;
    match args.format {
        Format::Json => {
            let mut value = strategy.to_json_value();
            value["winProb"] = json!(win.fraction());
            emit(value);
        }
        Format::Human => {
            println!(
                "best deterministic win probability: {} ({:.6})",
                win,
                win.to_f64()
            );
            let choices: Vec<String> = strategy
                .alice_choices()
                .iter()
                .map(|c| (c + 1).to_string())
                .collect();
            println!("alice slot per basis: {}", choices.join(" "));
            let ones: Vec<String> = strategy
                .bob_table()
                .iter()
                .filter(|(_, &bit)| bit)
                .map(|(v, _)| v.to_string())
                .collect();
            println!("bob 1-rays: {}", ones.join(" "));
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn build_strategy(set: &KsSet, name: &str) -> Result<Box<dyn Strategy>, CliError> {
    if let Some(path) = name.strip_prefix("deterministic:") {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::usage(format!("cannot read strategy file {path}: {e}")))?;
        let strategy = DeterministicStrategy::from_json_str(set, &text)
            .map_err(|e| CliError::usage(format!("strategy file {path}: {e}")))?;
        Ok(Box::new(strategy))
    } else if let Some(path) = name.strip_prefix("mixture:") {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::usage(format!("cannot read strategy file {path}: {e}")))?;
        let strategy = MixtureStrategy::from_json_str(set, &text)
            .map_err(|e| CliError::usage(format!("strategy file {path}: {e}")))?;
        Ok(Box::new(strategy))
    } else {
        strategies::builtin(set, name).map_err(|e| CliError::usage(e.to_string()))
    }
}

fn play(args: &PlayArgs) -> Result<ExitCode, CliError> {
    let set = load_set(&args.common.set)?;
    let strategy = build_strategy(&set, &args.strategy)?;
    let transcript = play_rounds(&set, strategy.as_ref(), args.rounds, args.seed)
        .map_err(|e| CliError::usage(e.to_string()))?;
    match args.common.format {
        Format::Json => println!("{}", transcript.to_json_string()),
        Format::Human => {
            let s = &transcript.summary;
            println!(
                "strategy: {}  seed: {}",
                transcript.strategy, transcript.seed
            );
            println!(
                "rounds: {}  wins: {}  win rate: {} ({:.6})",
                s.rounds,
                s.wins,
                s.win_rate,
                s.win_rate.to_f64()
            );
            println!(
                "mean bits per round: {}/{}",
                s.mean_bits.numer(),
                s.mean_bits.denom()
            );
            let failures = transcript
                .rounds
                .iter()
                .filter(|r| r.error.is_some())
                .count();
            if failures > 0 {
                println!("rounds lost to strategy errors: {failures}");
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn hvt2d(args: &HvtArgs) -> Result<ExitCode, CliError> {
    if args.pairs < 2 {
        return Err(CliError::usage("hvt2d needs at least 2 grid pairs"));
    }
    if args.rounds < 1 {
        return Err(CliError::usage("hvt2d needs at least 1 sample per pair"));
    }
    let rows = verification_table(args.pairs, args.rounds, args.seed);
    match args.format {
        Format::Json => emit(json!({
            "pairs": args.pairs,
            "samples": args.rounds,
            "seed": args.seed,
            "rows": rows.iter().map(|r| r.to_json_value()).collect::<Vec<_>>(),
        })),
        Format::Human => {
            println!(
                "{:>10}  {:>10}  {:>10}  {:>10}  {:>10}",
                "n.m", "analytic", "born", "mc", "stderr"
            );
            for r in &rows {
                println!(
                    "{:>10.6}  {:>10.6}  {:>10.6}  {:>10.6}  {:>10.6}",
                    r.n_dot_m, r.analytic, r.born, r.mc_estimate, r.std_error
                );
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn inspect(args: &InspectArgs) -> Result<ExitCode, CliError> {
    let set = load_set(&args.common.set)?;
    let in_range = |k: usize| (1..=set.num_bases()).contains(&k);
    if !in_range(args.alice_basis) || !in_range(args.bob_basis) {
        return Err(CliError::usage(format!(
            "basis indices are 1..={}",
            set.num_bases()
        )));
    }
    let d = joint_distribution(&set, args.alice_basis - 1, args.bob_basis - 1)
        .map_err(|e| CliError::usage(e.to_string()))?;
    match args.common.format {
        Format::Json => emit(d.to_json_value()),
        Format::Human => {
            println!(
                "joint outcome distribution, alice basis {} x bob basis {}",
                args.alice_basis, args.bob_basis
            );
            for i in 0..4 {
                let row: Vec<String> = (0..4).map(|j| d.prob(i, j).fraction()).collect();
                println!("  {}", row.join("  "));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}
