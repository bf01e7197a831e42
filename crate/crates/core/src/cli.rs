//! The `otl` command line: `solve`, `simulate`, `compare` and `verify`.
//!
//! Exit codes: 0 success or pass, 1 verification failure, 2 configuration
//! error, 3 resource-limit error.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::config::RunConfig;
use crate::error::Error;
use crate::mdp::solve_q;
use crate::output;
use crate::policy::{make_policy, PolicySpec};
use crate::sim;
use crate::verify::{self, Suite};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_RESOURCE: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "otl", version, about = "Bellman-optimal trading under subjective beliefs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve the Q-table and print the optimal action per stage.
    Solve {
        #[arg(long)]
        config: PathBuf,
        /// Write the Q-table as CSV.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Print the fully resolved configuration and exit.
        #[arg(long)]
        dump_config: bool,
    },
    /// Run one policy and write per-path records.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        policy: String,
        #[arg(long)]
        out: PathBuf,
        /// Also write the stats row as CSV.
        #[arg(long)]
        stats: Option<PathBuf>,
    },
    /// Compare policies on common random numbers.
    Compare {
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated policy names.
        #[arg(long)]
        policies: String,
        #[arg(long)]
        out: PathBuf,
        /// Also write the pairwise differences as CSV.
        #[arg(long)]
        diffs: Option<PathBuf>,
    },
    /// Run the verification suites.
    Verify {
        #[arg(long, value_enum, default_value_t = SuiteArg::All)]
        suite: SuiteArg,
        #[arg(long)]
        json: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SuiteArg {
    All,
    Bellman,
    Example21,
    Averaging,
    Price,
}

impl From<SuiteArg> for Suite {
    fn from(s: SuiteArg) -> Self {
        match s {
            SuiteArg::All => Suite::All,
            SuiteArg::Bellman => Suite::Bellman,
            SuiteArg::Example21 => Suite::Example21,
            SuiteArg::Averaging => Suite::Averaging,
            SuiteArg::Price => Suite::Price,
        }
    }
}

#[derive(Debug)]
enum Failure {
    Domain(Error),
    Io(PathBuf, io::Error),
    VerifyFailed,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Domain(e)
    }
}

fn exit_code(f: &Failure) -> i32 {
    match f {
        Failure::Domain(Error::ResourceLimit(_)) => EXIT_RESOURCE,
        Failure::Domain(_) | Failure::Io(..) => EXIT_CONFIG,
        Failure::VerifyFailed => EXIT_VERIFY_FAILED,
    }
}

/// Entry point for the binary.
pub fn main<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = io::stdout();
    let stderr = io::stderr();
    run(args, &mut stdout.lock(), &mut stderr.lock())
}

/// Parse `args` (including the program name) and execute, writing
/// human-readable output to `out` and diagnostics to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = if e.use_stderr() {
                write!(err, "{}", e.render())
            } else {
                write!(out, "{}", e.render())
            };
            return code;
        }
    };
    match execute(cli.command, out) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            match &f {
                Failure::Domain(e) => {
                    let _ = writeln!(err, "error: {e}");
                }
                Failure::Io(path, e) => {
                    let _ = writeln!(err, "error: {}: {e}", path.display());
                }
                Failure::VerifyFailed => {
                    let _ = writeln!(err, "verification failed");
                }
            }
            exit_code(&f)
        }
    }
}

fn write_file(path: &Path, f: impl FnOnce(&mut BufWriter<File>) -> io::Result<()>) -> Result<(), Failure> {
    let io_err = |e| Failure::Io(path.to_path_buf(), e);
    let mut w = BufWriter::new(File::create(path).map_err(io_err)?);
    f(&mut w).map_err(io_err)?;
    w.flush().map_err(io_err)
}

fn stdout_err(e: io::Error) -> Failure {
    Failure::Io(PathBuf::from("<stdout>"), e)
}

fn execute(command: Command, out: &mut dyn Write) -> Result<(), Failure> {
    match command {
        Command::Solve {
            config,
            out: csv,
            dump_config,
        } => {
            let cfg = RunConfig::from_file(&config)?;
            if dump_config {
                write!(out, "{}", cfg.dump()).map_err(stdout_err)?;
                return Ok(());
            }
            let table = solve_q(&cfg.problem()?)?;
            writeln!(out, "# Q-table (horizon {}, belief {})", table.horizon(), table.problem().initial_belief)
                .map_err(stdout_err)?;
            for e in table.entries() {
                writeln!(
                    out,
                    "t={}, {}, {:?}, belief={}{}",
                    e.t,
                    e.action,
                    e.q_value,
                    e.belief_id,
                    if e.is_optimal { ", optimal" } else { "" }
                )
                .map_err(stdout_err)?;
            }
            writeln!(out, "# optimal policy").map_err(stdout_err)?;
            for (t, id, action) in table.policy() {
                writeln!(out, "t={t} → {action}  (belief {id})").map_err(stdout_err)?;
            }
            if let Some(path) = csv {
                write_file(&path, |w| output::write_qtable_csv(&table, w))?;
            }
            Ok(())
        }
        Command::Simulate {
            config,
            policy,
            out: csv,
            stats,
        } => {
            let cfg = RunConfig::from_file(&config)?;
            let spec: PolicySpec = policy.parse()?;
            let policy = make_policy(spec, &cfg.problem()?)?;
            let result = sim::run(&policy, &cfg.market()?, &cfg.sim_config())?;
            write_file(&csv, |w| output::write_paths_csv(&result, w))?;
            let row = [(result.policy.as_str(), &result.stats)];
            output::write_stats_csv(row, &mut *out).map_err(stdout_err)?;
            if let Some(path) = stats {
                write_file(&path, |w| output::write_stats_csv(row, w))?;
            }
            Ok(())
        }
        Command::Compare {
            config,
            policies,
            out: csv,
            diffs,
        } => {
            let cfg = RunConfig::from_file(&config)?;
            let problem = cfg.problem()?;
            let policies = policies
                .split(',')
                .map(|name| make_policy(name.parse()?, &problem))
                .collect::<Result<Vec<_>, Error>>()?;
            let table = sim::compare(&policies, &cfg.market()?, &cfg.sim_config())?;
            write_file(&csv, |w| output::write_comparison_csv(&table, w))?;
            output::write_comparison_csv(&table, &mut *out).map_err(stdout_err)?;
            output::write_diffs_csv(&table, &mut *out).map_err(stdout_err)?;
            if let Some(path) = diffs {
                write_file(&path, |w| output::write_diffs_csv(&table, w))?;
            }
            Ok(())
        }
        Command::Verify { suite, json } => {
            let reports = verify::run_suite(suite.into());
            for r in &reports {
                write!(out, "{r}").map_err(stdout_err)?;
            }
            let overall = reports.iter().all(|r| r.overall);
            writeln!(out, "overall: {}", if overall { "PASS" } else { "FAIL" }).map_err(stdout_err)?;
            if let Some(path) = json {
                let doc = serde_json::json!({
                    "reports": reports.iter().map(verify::Report::to_json).collect::<Vec<_>>(),
                    "overall": overall,
                });
                write_file(&path, |w| {
                    serde_json::to_writer_pretty(&mut *w, &doc).map_err(io::Error::from)?;
                    writeln!(w)
                })?;
            }
            if overall {
                Ok(())
            } else {
                Err(Failure::VerifyFailed)
            }
        }
    }
}
