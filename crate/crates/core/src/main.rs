//! `dqcheck check A B` and `dqcheck bench`.
//!
//! Exit codes: 0 equivalent, 1 not equivalent, 2 error or inconclusive.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use dqcheck::bench::{suite, Suite};
use dqcheck::circuit::{CircuitSpec, Mode};
use dqcheck::encoding::{PlanMode, DEFAULT_MAX_OPEN};
use dqcheck::equivalence::CheckConfig;
use dqcheck::report::{run_check, run_full, run_pair, table, Report};
use dqcheck::text;

#[derive(Parser)]
#[command(
    name = "dqcheck",
    version,
    about = "Equivalence checking of dynamic quantum circuits"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    M,
    Q,
    Full,
}

#[derive(Clone, Copy, ValueEnum)]
enum PlanArg {
    Basic,
    Partitioned,
}

impl From<PlanArg> for PlanMode {
    fn from(p: PlanArg) -> Self {
        match p {
            PlanArg::Basic => PlanMode::Sequential,
            PlanArg::Partitioned => PlanMode::PerQubit,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    Qft,
    Pe,
    Qec,
    All,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check two circuit files for equivalence.
    Check {
        file_a: PathBuf,
        file_b: PathBuf,
        #[arg(long, value_enum, default_value = "m")]
        mode: ModeArg,
        #[arg(long, value_enum, default_value = "partitioned")]
        plan: PlanArg,
        /// Also require equal branch norms in q-mode.
        #[arg(long)]
        strict_q: bool,
        /// Tolerance on probabilities and norms.
        #[arg(long, env = "DQCHECK_EPS", default_value_t = dqcheck::equivalence::DEFAULT_EPS)]
        eps: f64,
        /// Largest number of open indices of an intermediate tensor.
        #[arg(long, default_value_t = DEFAULT_MAX_OPEN)]
        max_open: usize,
        /// Print a table instead of a JSON record.
        #[arg(long)]
        human: bool,
    },
    /// Run benchmark pairs and print one row per pair.
    Bench {
        /// Suites to run; may be repeated.
        #[arg(long, value_enum, required = true)]
        suite: Vec<SuiteArg>,
        /// Largest QFT and phase estimation size.
        #[arg(long, default_value_t = 12)]
        max_n: usize,
        /// Plans to run; may be repeated (default: both).
        #[arg(long, value_enum)]
        plan: Vec<PlanArg>,
        /// Print JSON lines instead of a table.
        #[arg(long)]
        json: bool,
        /// Only run rows whose name contains this text.
        #[arg(long)]
        filter: Option<String>,
    },
}

fn exit_code(r: &Report) -> u8 {
    match r.verdict.as_str() {
        "Equivalent" => 0,
        "NotEquivalent" => 1,
        _ => 2,
    }
}

fn load(path: &PathBuf) -> Result<CircuitSpec, String> {
    let bytes = std::fs::read(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let src =
        String::from_utf8(bytes).map_err(|_| format!("{}: not UTF-8 text", path.display()))?;
    text::parse(&src).map_err(|e| format!("{}: {e}", path.display()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.cmd {
        Cmd::Check {
            file_a,
            file_b,
            mode,
            plan,
            strict_q,
            eps,
            max_open,
            human,
        } => {
            let specs = load(&file_a).and_then(|a| Ok((a, load(&file_b)?)));
            let (a, b) = match specs {
                Ok(s) => s,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(2);
                }
            };
            if !(eps.is_finite() && eps >= 0.0) {
                eprintln!("error: --eps must be a non-negative number");
                return ExitCode::from(2);
            }
            let name = format!(
                "{} vs {}",
                file_a.file_stem().unwrap_or_default().to_string_lossy(),
                file_b.file_stem().unwrap_or_default().to_string_lossy()
            );
            let report = match mode {
                ModeArg::Full => run_full(&name, &a, &b),
                ModeArg::M | ModeArg::Q => {
                    let mut cfg = CheckConfig::new(
                        if matches!(mode, ModeArg::M) {
                            Mode::M
                        } else {
                            Mode::Q
                        },
                        plan.into(),
                    );
                    cfg.strict_q = strict_q;
                    cfg.eps = eps;
                    cfg.max_open = max_open;
                    run_check(&name, &a, &b, &cfg)
                }
            };
            if human {
                print!("{}", table(std::slice::from_ref(&report)));
            } else {
                println!("{}", report.to_json());
            }
            if let Some(r) = &report.reason {
                eprintln!("{}: {r}", report.verdict);
            }
            ExitCode::from(exit_code(&report))
        }
        Cmd::Bench {
            suite: suites,
            max_n,
            plan,
            json,
            filter,
        } => {
            let mut pairs = Vec::new();
            for s in suites {
                let s = match s {
                    SuiteArg::Qft => Suite::Qft,
                    SuiteArg::Pe => Suite::Pe,
                    SuiteArg::Qec => Suite::Qec,
                    SuiteArg::All => Suite::All,
                };
                for p in suite(s, max_n) {
                    if !pairs
                        .iter()
                        .any(|q: &dqcheck::bench::BenchmarkPair| q.name == p.name)
                    {
                        pairs.push(p);
                    }
                }
            }
            if let Some(f) = &filter {
                pairs.retain(|p| p.name.contains(f.as_str()));
            }
            if pairs.is_empty() {
                eprintln!("error: the selection contains no benchmarks");
                return ExitCode::from(2);
            }
            let plans: Vec<PlanMode> = if plan.is_empty() {
                vec![PlanMode::Sequential, PlanMode::PerQubit]
            } else {
                plan.into_iter().map(Into::into).collect()
            };
            let mut rows = Vec::new();
            for p in &pairs {
                for &pl in &plans {
                    let r = run_pair(p, pl);
                    if json {
                        println!("{}", r.to_json());
                    }
                    rows.push(r);
                }
            }
            if !json {
                print!("{}", table(&rows));
            }
            let bad = rows.iter().filter(|r| r.verdict != "Equivalent").count();
            if bad > 0 {
                eprintln!("{bad} row(s) not Equivalent");
                return ExitCode::from(1);
            }
            ExitCode::SUCCESS
        }
    }
}
