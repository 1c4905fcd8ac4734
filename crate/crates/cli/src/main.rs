use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use accel_cli::config::ExperimentConfig;
use accel_cli::error::{CliError, Result};
use accel_cli::runner::{certify_record_rows, run_experiment};
use accel_cli::{suite, table2, Overrides};
use accel_core::bench::Scale;
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "accel", version, about = "Run and check estimate-sequence first-order methods")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScaleArg {
    Desk,
    Paper,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment from a TOML config.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Directory for the trace and summary (default: current directory).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        max_iter: Option<usize>,
        #[arg(long)]
        eps_rel: Option<f64>,
    },
    /// Print the dampening table.
    Table2 {
        /// Columns q_l (default: the reference columns).
        #[arg(long, num_args = 1.., value_delimiter = ',')]
        ql: Option<Vec<f64>>,
        /// Rows q_u / q_l.
        #[arg(long, num_args = 1.., value_delimiter = ',')]
        ratios: Option<Vec<f64>>,
        /// Full-precision CSV instead of the rounded text table.
        #[arg(long)]
        csv: bool,
    },
    /// Check the invariants of a trace written by `run`.
    Certify {
        #[arg(long)]
        trace: PathBuf,
        #[arg(long)]
        config: PathBuf,
    },
    /// Run the benchmark suite.
    Bench {
        #[arg(long, value_enum, default_value = "desk")]
        scale: ScaleArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "bench-out")]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn dispatch(cmd: Command) -> Result<()> {
    match cmd {
        Command::Run { config, seed, out, max_iter, eps_rel } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            cfg.apply(&Overrides { seed, max_iter, eps_rel })?;
            let out = out.unwrap_or_else(|| PathBuf::from("."));
            let (outcome, files) = run_experiment(&cfg, &out)?;
            let s = &outcome.summary;
            println!(
                "{} on {} (n = {}): {} iterations, threshold at {}, {:.3} s",
                s.solver,
                s.problem,
                s.dim,
                s.iterations,
                s.iterations_to_threshold.map_or("-".into(), |k| k.to_string()),
                s.wall_time_s
            );
            print!("{}", s.certificates);
            println!("trace: {}\nsummary: {}", files.trace.display(), files.summary.display());
            if let Some(gp) = files.gnuplot {
                println!("gnuplot: {}", gp.display());
            }
            if !s.passed() {
                return Err(CliError::Certificate(format!("see {}", files.summary.display())));
            }
            Ok(())
        }
        Command::Table2 { ql, ratios, csv } => {
            let t = table2::table2(ql.as_deref(), ratios.as_deref())?;
            print!("{}", if csv { table2::render_csv(&t) } else { table2::render_text(&t) });
            Ok(())
        }
        Command::Certify { trace, config } => {
            let cfg = ExperimentConfig::load(&config)?;
            let file = fs::File::open(&trace).map_err(|e| CliError::io(&trace, e))?;
            let rows = accel_core::trace::read_trace_csv(file).map_err(|e| match e {
                accel_core::Error::Trace(m) => CliError::Config(format!("{}: {m}", trace.display())),
                other => other.into(),
            })?;
            let (report, asserted) = certify_record_rows(&cfg, &rows)?;
            print!("{report}");
            if asserted && !report.all_passed() {
                return Err(CliError::Certificate(trace.display().to_string()));
            }
            Ok(())
        }
        Command::Bench { scale, seed, out } => {
            let scale = match scale {
                ScaleArg::Desk => Scale::Desk,
                ScaleArg::Paper => Scale::Paper,
            };
            let cases = suite::suite(scale, seed);
            let report = suite::run_suite(&cases, &out.join(format!("{scale:?}").to_lowercase()), suite::thread_cap()?)?;
            print!("{}", report.render());
            if !report.passed() {
                return Err(CliError::Certificate("a suite run failed or broke an asserted certificate".into()));
            }
            Ok(())
        }
    }
}
