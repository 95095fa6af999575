use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use obstacle_cli::{build_experiment, presets, resolve_out_dir, Config, RunError};

/// Structured-grid obstacle-problem experiments: solve, audit the
/// inequalities, and emit CSV/field artifacts.
///
/// Exit codes: 0 all checks passed; 2 configuration error; 3 solver failure;
/// 4 verification-check failure; 5 artifact IO error.
#[derive(Parser)]
#[command(name = "obstacle", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Experiment config (flat `key = value` lines, `#` comments).
    #[arg(long)]
    config: PathBuf,
    /// Output directory (default: `run.out` key, then $OBSTACLE_OUT, then ./out).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed override for randomized pipelines (default: `run.seed`, then 42).
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// List the available presets.
    Presets,
    /// Run the preset named by the config's `run.preset` key.
    Run(RunArgs),
    /// Solve one obstacle problem and write the solution field.
    Solve(RunArgs),
    /// Audit the two-sided Lewy-Stampacchia bounds on a converged solve.
    LsAudit(RunArgs),
    /// Reconstruct the discontinuity term and check A u + beta = f.
    EquationAudit(RunArgs),
    /// Bounded-data approximation chain with in-measure diagnostics.
    Chain(RunArgs),
    /// L1 contraction of xi = f - A u over data pairs.
    Contraction(RunArgs),
    /// Coincidence-set stability bound under a declared margin.
    Stability(RunArgs),
    /// Coincidence-set convergence along an obstacle perturbation family.
    ChiConvergence(RunArgs),
    /// Validate the variable exponent and its derived exponents.
    ExponentReport(RunArgs),
    /// Randomized audit of the flux structure conditions.
    StructureAudit(RunArgs),
    /// Solver order check against a manufactured smooth solution.
    Manufactured(RunArgs),
}

fn execute(preset_from_config: bool, preset: &str, args: RunArgs) -> Result<(), RunError> {
    let cfg = Config::load(&args.config)?;
    let base_dir = args
        .config
        .parent()
        .map(|p| p.to_path_buf())
        .unwrap_or_else(|| PathBuf::from("."));
    let preset_name = if preset_from_config {
        cfg.require("run.preset")?.to_string()
    } else {
        preset.to_string()
    };
    if !presets::PRESETS.iter().any(|(name, _)| *name == preset_name) {
        return Err(RunError::Config(format!("unknown preset `{preset_name}`")));
    }
    let out_dir = resolve_out_dir(args.out.clone(), &cfg, &base_dir);
    let exp = build_experiment(cfg, &base_dir, out_dir, args.seed)?;
    presets::dispatch(&preset_name, &exp)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Presets => {
            for (name, what) in presets::PRESETS {
                println!("{name:16} {what}");
            }
            return ExitCode::SUCCESS;
        }
        Command::Run(args) => execute(true, "", args),
        Command::Solve(args) => execute(false, "solve", args),
        Command::LsAudit(args) => execute(false, "ls-audit", args),
        Command::EquationAudit(args) => execute(false, "equation-audit", args),
        Command::Chain(args) => execute(false, "chain", args),
        Command::Contraction(args) => execute(false, "contraction", args),
        Command::Stability(args) => execute(false, "stability", args),
        Command::ChiConvergence(args) => execute(false, "chi-convergence", args),
        Command::ExponentReport(args) => execute(false, "exponent-report", args),
        Command::StructureAudit(args) => execute(false, "structure-audit", args),
        Command::Manufactured(args) => execute(false, "manufactured", args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
