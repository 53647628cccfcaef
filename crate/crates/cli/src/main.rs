//! Command-line driver for the proof systems in `pzk`.
//!
//! Every command prints a JSON report (or writes it to `--report`) and exits
//! with 0 when the run met its expected outcome, 1 when an envelope or
//! expected verdict was violated, and 2 on usage or input errors.

mod commands;
mod params;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::{Ctx, Outcome};
use params::Params;
use pzk::harness::Protocol;

#[derive(Parser)]
#[command(name = "pzk", version, about = "Zero-knowledge sumcheck, commitments and sum-product circuit proofs")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Field: a prime `p` or `gf2^d`; each command has its own default.
    #[arg(long, global = true)]
    field: Option<String>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Repetitions for statistical commands.
    #[arg(long, global = true)]
    trials: Option<usize>,
    /// Command parameters as `key=value,...` or a JSON object.
    #[arg(long, global = true)]
    params: Option<String>,
    /// JSON input document.
    #[arg(long = "in", global = true)]
    input: Option<std::path::PathBuf>,
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    report: Option<std::path::PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Field arithmetic.
    Field {
        #[command(subcommand)]
        cmd: FieldCmd,
    },
    /// Plain sumcheck.
    Sumcheck {
        #[command(subcommand)]
        cmd: SumcheckCmd,
    },
    /// Zero-knowledge sumcheck.
    Zksumcheck {
        #[command(subcommand)]
        cmd: ZkSumcheckCmd,
    },
    /// Algebraic commitments.
    Commit {
        #[command(subcommand)]
        cmd: CommitCmd,
    },
    /// Sum-product circuits.
    Spc {
        #[command(subcommand)]
        cmd: SpcCmd,
    },
    /// True quantified Boolean formulas.
    Tqbf {
        #[command(subcommand)]
        cmd: ProveCmd,
    },
    /// Oracle 3-SAT.
    O3sat {
        #[command(subcommand)]
        cmd: ProveCmd,
    },
    /// Layered arithmetic circuits.
    Circuit {
        #[command(subcommand)]
        cmd: ProveCmd,
    },
    /// Algebraic query complexity thresholds.
    Aqc {
        #[command(subcommand)]
        cmd: AqcCmd,
    },
}

#[derive(Subcommand)]
enum FieldCmd {
    /// Size and a few inverses.
    Info,
}

#[derive(Subcommand)]
enum SumcheckCmd {
    /// One run; `prover=honest|liar|over_degree`, `claim=true|false`.
    Run,
    /// Acceptance rate of a consistent liar against the soundness envelope.
    Soundness,
}

#[derive(Subcommand)]
enum ZkSumcheckCmd {
    /// One run; `variant=weak|strong`, `verifier=honest|no_queries|early_probe|late_probe`.
    Run,
    /// One simulated view, with the simulator's summand queries.
    Simulate,
    /// Soundness of the strong protocol against a consistent liar.
    Soundness,
    /// Real versus simulated view distributions.
    Zktest,
}

#[derive(Subcommand)]
enum CommitCmd {
    /// Sample and commit to a polynomial regenerated from the seed.
    New,
    /// Open a commitment at `alpha`; `forge=true` claims a wrong value.
    Open,
    /// Search for linear dependence among queries below the hiding bound.
    HidingCheck,
}

#[derive(Subcommand)]
enum SpcCmd {
    /// Structural diagnostics for a circuit document.
    Validate,
    /// Value of the root.
    Eval,
    /// Plain protocol; leaves listed in `aux` are treated as witness.
    Prove,
    /// Zero-knowledge protocol.
    Zkprove,
    /// Real versus simulated view distributions of the zero-knowledge protocol.
    Zktest,
}

#[derive(Subcommand)]
enum ProveCmd {
    /// Reduce the instance to a circuit and run the interactive proof.
    Prove,
}

#[derive(Subcommand)]
enum AqcCmd {
    /// Measured query thresholds against the hiding bound.
    Check,
}

fn dispatch(cmd: &Command, ctx: &Ctx) -> pzk::Result<Outcome> {
    let variant = || match ctx.params.str("variant").unwrap_or("strong") {
        "weak" => Ok(Protocol::Weak),
        "strong" => Ok(Protocol::Strong),
        other => Err(pzk::Error::Format(format!("--params: unknown variant {other:?}"))),
    };
    match cmd {
        Command::Field { cmd: FieldCmd::Info } => commands::field_info(ctx),
        Command::Sumcheck { cmd: SumcheckCmd::Run } => commands::sumcheck_run(ctx, Protocol::Standard),
        Command::Sumcheck { cmd: SumcheckCmd::Soundness } => commands::sumcheck_soundness(ctx, Protocol::Standard),
        Command::Zksumcheck { cmd: ZkSumcheckCmd::Run } => commands::sumcheck_run(ctx, variant()?),
        Command::Zksumcheck { cmd: ZkSumcheckCmd::Simulate } => commands::zksumcheck_simulate(ctx),
        Command::Zksumcheck { cmd: ZkSumcheckCmd::Soundness } => commands::sumcheck_soundness(ctx, Protocol::Strong),
        Command::Zksumcheck { cmd: ZkSumcheckCmd::Zktest } => commands::zksumcheck_zktest(ctx),
        Command::Commit { cmd: CommitCmd::New } => commands::commit_new(ctx),
        Command::Commit { cmd: CommitCmd::Open } => commands::commit_open(ctx),
        Command::Commit { cmd: CommitCmd::HidingCheck } => commands::commit_hiding_check(ctx),
        Command::Spc { cmd: SpcCmd::Validate } => commands::spc_validate(ctx),
        Command::Spc { cmd: SpcCmd::Eval } => commands::spc_eval(ctx),
        Command::Spc { cmd: SpcCmd::Prove } => commands::spc_prove(ctx),
        Command::Spc { cmd: SpcCmd::Zkprove } => commands::spc_zkprove(ctx),
        Command::Spc { cmd: SpcCmd::Zktest } => commands::spc_zktest(ctx),
        Command::Tqbf { cmd: ProveCmd::Prove } => commands::tqbf_prove(ctx),
        Command::O3sat { cmd: ProveCmd::Prove } => commands::o3sat_prove(ctx),
        Command::Circuit { cmd: ProveCmd::Prove } => commands::circuit_prove(ctx),
        Command::Aqc { cmd: AqcCmd::Check } => commands::aqc_check(ctx),
    }
}

fn usage_error(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("pzk: {msg}");
    ExitCode::from(2)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let g = cli.global;
    let params = match Params::parse(g.params.as_deref()) {
        Ok(p) => p,
        Err(e) => return usage_error(e),
    };
    let input = match g.input.as_deref().map(std::fs::read_to_string).transpose() {
        Ok(i) => i,
        Err(e) => return usage_error(format!("--in: {e}")),
    };
    let ctx = Ctx { field: g.field, seed: g.seed, trials: g.trials, params, input };
    let outcome = match dispatch(&cli.command, &ctx) {
        Ok(o) => o,
        Err(e) => return usage_error(e),
    };
    let text = serde_json::to_string_pretty(&outcome.report).expect("reports are plain JSON values");
    match g.report {
        Some(path) => {
            if let Err(e) = std::fs::write(&path, text + "\n") {
                return usage_error(format!("--report: {e}"));
            }
        }
        None => println!("{text}"),
    }
    ExitCode::from(if outcome.pass { 0 } else { 1 })
}
