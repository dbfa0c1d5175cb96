use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use mdlab::report::{load_reports, write_plot_data, write_reports};
use mdlab::sweep::{plot_series, run_sweep};
use mdlab::{run, CheckName, CheckReport, LabConfig, LabError, ReportFormat};

#[derive(Parser)]
#[command(name = "mdlab", version, about = "Verification runs for thermal one-particle structures")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one check (or `all`) on a config.
    Verify {
        check: String,
        #[arg(long)]
        config: PathBuf,
        /// Override a config key, e.g. `--set model.N=64`.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        /// Write reports here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value = "json-lines")]
        format: ReportFormat,
    },
    /// Run the selected checks over the sweep axes of a config.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the summary (pass counts, worst metrics) as JSON.
        #[arg(long)]
        summary: Option<PathBuf>,
    },
    /// Convert a JSON-lines report.
    Report {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value = "csv")]
        format: ReportFormat,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Export `CHECK:METRIC:PARAM` as an x-y series instead.
        #[arg(long, value_name = "CHECK:METRIC:PARAM")]
        plot: Option<String>,
    },
    /// List the available checks.
    List,
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn execute(cli: Cli) -> Result<bool, LabError> {
    match cli.command {
        Command::Verify {
            check,
            config,
            overrides,
            out,
            format,
        } => {
            let config = LabConfig::load_with_overrides(&config, &overrides)?;
            let checks = if check == "all" {
                CheckName::ALL.to_vec()
            } else {
                vec![CheckName::parse(&check)?]
            };
            let reports: Vec<CheckReport> = checks.iter().map(|&c| run(c, &config)).collect();
            for r in &reports {
                log_report(r);
            }
            output(&reports, format, out)?;
            Ok(reports.iter().all(|r| r.pass))
        }
        Command::Sweep {
            config,
            overrides,
            out,
            summary,
        } => {
            let config = LabConfig::load_with_overrides(&config, &overrides)?;
            let outcome = run_sweep(&config)?;
            for s in &outcome.summary {
                eprintln!("{}: {}/{} passed", s.check, s.passed, s.runs);
            }
            if let Some(path) = summary {
                let mut f = std::fs::File::create(path)?;
                serde_json::to_writer_pretty(&mut f, &outcome.summary)?;
                writeln!(f)?;
            }
            output(&outcome.reports, ReportFormat::JsonLines, out)?;
            Ok(outcome.all_passed())
        }
        Command::Report {
            input,
            format,
            out,
            plot,
        } => {
            let reports = load_reports(&input)?;
            match plot {
                Some(spec) => {
                    let parts: Vec<&str> = spec.split(':').collect();
                    let [check, metric, param] = parts[..] else {
                        return Err(LabError::Report(format!("plot spec `{spec}` is not CHECK:METRIC:PARAM")));
                    };
                    let series = plot_series(&reports, check, metric, param);
                    match out {
                        Some(p) => write_plot_data(&series, param, metric, std::fs::File::create(p)?)?,
                        None => write_plot_data(&series, param, metric, io::stdout().lock())?,
                    }
                }
                None => output(&reports, format, out)?,
            }
            Ok(reports.iter().all(|r| r.pass))
        }
        Command::List => {
            for name in CheckName::names() {
                println!("{name}");
            }
            Ok(true)
        }
    }
}

fn log_report(r: &CheckReport) {
    let status = if r.pass { "PASS" } else { "FAIL" };
    match &r.error {
        Some(e) => eprintln!("{status} {} ({:.3} s): {e}", r.check, r.wall_time),
        None => eprintln!("{status} {} ({:.3} s)", r.check, r.wall_time),
    }
}

fn output(reports: &[CheckReport], format: ReportFormat, out: Option<PathBuf>) -> Result<(), LabError> {
    match out {
        Some(path) => mdlab::emit_report(reports, format, &path),
        None => write_reports(reports, format, io::stdout().lock()),
    }
}
