//! `bw`: command-line front end for the birnbaum-core engine.

pub mod commands;
pub mod error;
pub mod reproduction;
pub mod report;
pub mod workspace;

use clap::{Parser, Subcommand};

use birnbaum_core::methods::AuditOptions;

use crate::commands::{parse_conditioning, parse_rational_arg, parse_thetas};
use crate::error::{CliError, EXIT_USAGE};
use crate::report::Report;
use crate::workspace::{fixture, parse_workspace, Workspace};

#[derive(Debug, Parser)]
#[command(name = "bw", version, about = "Sufficiency, conditionality, ancillarity and likelihood on finite experiments")]
pub struct Cli {
    /// Workspace file, or `@example1` / `@mayo` for a bundled fixture.
    #[arg(long, global = true, default_value = "@example1")]
    pub workspace: String,
    /// Emit the machine-readable JSON report.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse and validate the workspace.
    Validate,
    /// Minimal sufficient partition with its θ-free conditionals.
    SuffMin { experiment: String },
    /// Every non-trivial ancillary partition (capped by outcome count).
    Ancillaries {
        experiment: String,
        /// Largest sample space to enumerate; default BW_ANCILLARY_CAP or 12.
        #[arg(long)]
        cap: Option<usize>,
    },
    /// Condition an experiment on one block of an ancillary statistic.
    Condition {
        experiment: String,
        statistic: String,
        /// An outcome label inside the block, or `#k` for the k-th block.
        block: String,
    },
    /// Test one relation (S, C, A or L) between two bases `exp:outcome`.
    Relate { kind: String, first: String, second: String },
    /// Equivalence closure of a universe under a set of relations.
    Closure {
        universe: String,
        #[arg(long, default_value = "S,C")]
        kinds: String,
    },
    /// C-S-C witness chain between two L-related bases.
    Chain { first: String, second: String },
    /// Check closure({S,C}) = L on a universe after adding chain mixtures.
    VerifyBirnbaum {
        universe: String,
        #[arg(long, default_value_t = 1)]
        depth: usize,
    },
    /// One-sided p-values for the binomial family.
    Pvalue {
        #[command(subcommand)]
        test: PvalueCommand,
    },
    /// Separate the method output M from the inference Ev on the stopping-rule mixture.
    AuditMayo {
        #[arg(long, default_value_t = 12)]
        n: u64,
        #[arg(long, default_value_t = 3)]
        k: u64,
        #[arg(long, default_value = "1/2")]
        theta0: String,
        #[arg(long, default_value_t = 9)]
        successes: u64,
        /// Truncation of the negative-binomial sample space.
        #[arg(long)]
        tail: Option<u64>,
        /// Comma-separated parameter grid for the finite experiments.
        #[arg(long)]
        thetas: Option<String>,
    },
    /// Coverage of C = {X} when P(X=θ) = 1-θ and P(X=0) = θ.
    CoverageEx3 {
        theta: String,
        /// unconditional, given_X_positive or given_X_zero
        conditioning: String,
    },
    /// Two-point model with tilt ε: conditional coverage table.
    Twopoint {
        epsilon: String,
        #[arg(allow_hyphen_values = true)]
        theta: String,
    },
    /// Equal-level versus most powerful tests for two instruments.
    NpMixture {
        sigma1: f64,
        sigma2: f64,
        #[arg(allow_hyphen_values = true)]
        mu0: f64,
        #[arg(allow_hyphen_values = true)]
        mu1: f64,
        n: u32,
        alpha: f64,
        /// Sample-size range `a..b` for the reproduction sweep.
        #[arg(long)]
        sweep_n: Option<String>,
    },
    /// Every worked example with matched/derived/unreconciled flags.
    PaperReport,
}

#[derive(Debug, Subcommand)]
pub enum PvalueCommand {
    /// P(Binomial(n, θ0) ≥ successes)
    Binom {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        theta0: String,
        #[arg(long)]
        successes: u64,
    },
    /// P(S ≥ successes), S the successes before the k-th failure
    Negbinom {
        #[arg(long)]
        k: u64,
        #[arg(long)]
        theta0: String,
        #[arg(long)]
        successes: u64,
    },
    /// Average of the two for data with n - successes = k failures
    Mixture {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        k: u64,
        #[arg(long)]
        theta0: String,
        #[arg(long)]
        successes: u64,
    },
}

/// Exit code and captured output of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn load_workspace(source: &str) -> Result<Workspace, CliError> {
    let text = match source.strip_prefix('@') {
        Some(name) => fixture(name)
            .ok_or_else(|| CliError::usage(format!("no bundled workspace `{name}` (expected example1 or mayo)")))?
            .to_string(),
        None => std::fs::read_to_string(source)
            .map_err(|e| CliError::domain("IO_ERROR", format!("reading {source}: {e}")))?,
    };
    Ok(parse_workspace(&text)?)
}

fn execute(cli: &Cli) -> Result<Report, CliError> {
    let ws = || load_workspace(&cli.workspace);
    match &cli.command {
        Command::Validate => Ok(commands::validate(&ws()?, &cli.workspace)),
        Command::SuffMin { experiment } => commands::suff_min(&ws()?, experiment),
        Command::Ancillaries { experiment, cap } => {
            let cap = commands::ancillary_cap(*cap)?;
            commands::ancillaries(&ws()?, experiment, cap)
        }
        Command::Condition {
            experiment,
            statistic,
            block,
        } => commands::condition_cmd(&ws()?, experiment, statistic, block),
        Command::Relate { kind, first, second } => commands::relate(&ws()?, kind, first, second),
        Command::Closure { universe, kinds } => commands::closure_cmd(&ws()?, universe, kinds),
        Command::Chain { first, second } => commands::chain_cmd(&ws()?, first, second),
        Command::VerifyBirnbaum { universe, depth } => commands::verify_birnbaum_cmd(&ws()?, universe, *depth),
        Command::Pvalue { test } => match test {
            PvalueCommand::Binom { n, theta0, successes } => {
                commands::pvalue_binom(*n, &parse_rational_arg("theta0", theta0)?, *successes)
            }
            PvalueCommand::Negbinom { k, theta0, successes } => {
                commands::pvalue_negbinom(*k, &parse_rational_arg("theta0", theta0)?, *successes)
            }
            PvalueCommand::Mixture { n, k, theta0, successes } => {
                commands::pvalue_mixture(*n, *k, &parse_rational_arg("theta0", theta0)?, *successes)
            }
        },
        Command::AuditMayo {
            n,
            k,
            theta0,
            successes,
            tail,
            thetas,
        } => {
            let mut options = AuditOptions {
                tail: *tail,
                ..AuditOptions::default()
            };
            if let Some(list) = thetas {
                options.thetas = parse_thetas(list)?;
            }
            commands::audit_mayo(*n, *k, &parse_rational_arg("theta0", theta0)?, *successes, &options)
        }
        Command::CoverageEx3 { theta, conditioning } => {
            commands::coverage_ex3(&parse_rational_arg("theta", theta)?, parse_conditioning(conditioning)?)
        }
        Command::Twopoint { epsilon, theta } => commands::twopoint(
            &parse_rational_arg("epsilon", epsilon)?,
            &parse_rational_arg("theta", theta)?,
        ),
        Command::NpMixture {
            sigma1,
            sigma2,
            mu0,
            mu1,
            n,
            alpha,
            sweep_n,
        } => {
            let sweep = sweep_n.as_deref().map(commands::parse_range).transpose()?;
            commands::np_mixture(*sigma1, *sigma2, *mu0, *mu1, *n, *alpha, sweep)
        }
        Command::PaperReport => reproduction::reproduction_report(),
    }
}

/// Runs one command line (including the program name) without touching the
/// process streams.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let text = e.render().to_string();
            let (stdout, stderr) = if code == 0 { (text, String::new()) } else { (String::new(), text) };
            return Outcome { code, stdout, stderr };
        }
    };
    match execute(&cli) {
        Ok(report) => Outcome {
            code: 0,
            stdout: report.render(cli.json),
            stderr: String::new(),
        },
        Err(e) => {
            let stdout = if cli.json {
                let value = serde_json::json!({
                    "command": format!("{:?}", cli.command).split([' ', '{']).next().unwrap_or_default().to_lowercase(),
                    "error": { "code": e.code, "message": e.message },
                });
                format!("{}\n", serde_json::to_string_pretty(&value).expect("JSON values serialize"))
            } else {
                String::new()
            };
            Outcome {
                code: e.exit,
                stdout,
                stderr: format!("{e}\n"),
            }
        }
    }
}
