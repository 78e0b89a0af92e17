use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rtaccel::config::{BenchmarkConfig, Overrides, Space};
use rtaccel::history::read_history;
use rtaccel::oracle::{run_oracle, ORACLE_TOL};
use rtaccel::plot::{residual_plot, Series};
use rtaccel::{run_suite, write_atomic, Error};

#[derive(Parser)]
#[command(name = "rtaccel", version, about = "Accelerated source iteration benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every configured case and write CSV tables and SVG plots.
    Run(ConfigArgs),
    /// Compare converged iterates with a dense solve on a tiny instance.
    Oracle(ConfigArgs),
    /// Plot one or more history CSV files.
    Plot {
        #[arg(required = true)]
        histories: Vec<PathBuf>,
        /// Output SVG; defaults to the first input with an .svg extension.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value = "residual history")]
        title: String,
    },
}

#[derive(Args)]
struct ConfigArgs {
    /// JSON config; built-in defaults when omitted.
    config: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    g: Option<Vec<f64>>,
    #[arg(long = "K", value_delimiter = ',')]
    k: Option<Vec<usize>>,
    /// none, wc, w1 or w1-m<m>
    #[arg(long, value_delimiter = ',')]
    space: Option<Vec<Space>>,
    #[arg(long, value_delimiter = ',')]
    cells: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    level: Option<Vec<usize>>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl ConfigArgs {
    fn load(self) -> Result<BenchmarkConfig, Error> {
        let mut cfg = match &self.config {
            Some(p) => BenchmarkConfig::load(p)?,
            None => BenchmarkConfig::default(),
        };
        let o = Overrides {
            g: self.g,
            k: self.k,
            spaces: self.space,
            cells: self.cells,
            levels: self.level,
            tol: self.tol,
            output: self.out,
        };
        o.apply(&mut cfg)?;
        Ok(cfg)
    }
}

fn run(cmd: Command) -> Result<bool, Error> {
    match cmd {
        Command::Run(args) => {
            let cfg = args.load()?;
            let report = run_suite(&cfg)?;
            for r in &report.rows {
                let it = r.iterations.map_or("-".into(), |n| n.to_string());
                let fac = r.max_factor.map_or("-".into(), |f| format!("{f:.4}"));
                println!("g={} K={} {} cells={} level={}: {it} iterations, max factor {fac}, {}", r.g, r.k, r.space, r.cells, r.level, r.status);
            }
            println!("summary: {}", report.summary.display());
            Ok(report.failures() == 0)
        }
        Command::Oracle(args) => {
            let cfg = args.load()?;
            let rows = run_oracle(&cfg)?;
            for r in &rows {
                println!(
                    "g={} K={} {}: {} iterations, M-norm error {:.3e} ({})",
                    r.g,
                    r.k,
                    r.space,
                    r.iterations,
                    r.error,
                    if r.passed { "ok" } else { "FAILED" }
                );
            }
            println!("tolerance {ORACLE_TOL:e}");
            Ok(rows.iter().all(|r| r.passed))
        }
        Command::Plot { histories, out, title } => {
            let mut series = Vec::new();
            for p in &histories {
                let f = std::fs::File::open(p).map_err(|e| Error::Io { path: p.clone(), source: e })?;
                let label = p.file_stem().map_or_else(|| p.display().to_string(), |s| s.to_string_lossy().into_owned());
                series.push(Series::from_history(label, &read_history(f)?));
            }
            let out = out.unwrap_or_else(|| histories[0].with_extension("svg"));
            write_atomic(&out, residual_plot(&title, &series).as_bytes())?;
            println!("{}", out.display());
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
