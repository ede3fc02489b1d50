use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use dcm_core::exact::{parse_exact, Exact};
use dcm_core::io::{fixtures, SessionDocument};
use dcm_core::io::fleet::{parse_fleet, Fleet, Strictness};
use dcm_core::robustness::ScenarioGrid;
use dcm_core::Execution;
use dcm_gateway::config::ServerConfig;
use dcm_gateway::error::{GatewayError, Result};
use dcm_gateway::ops::{self, Inputs, Overrides, SweepParams};
use dcm_gateway::reproduce::{reproduce, Scenario};
use dcm_gateway::views::render_derived;

#[derive(Parser)]
#[command(name = "dcm", version, about = "Ship risk classification with the Deck of Cards Method")]
struct Cli {
    /// Run on one thread.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Rebuild the bundled sample and compare every published figure.
    ReproducePaper {
        #[arg(long)]
        session: Option<PathBuf>,
        #[arg(long)]
        fleet: Option<PathBuf>,
        /// Check only the robustness cells at this ratio.
        #[arg(long, value_parser = number)]
        z: Option<Exact>,
        /// Check only the robustness cells at this cutoff.
        #[arg(long, value_parser = number)]
        lambda23: Option<Exact>,
    },
    /// Classify a fleet and write `<out>.csv` and `<out>.json`.
    Classify {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, default_value = "results")]
        out: PathBuf,
    },
    /// Reclassify over a grid of cutoffs and ratios.
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        /// Comma-separated cutoffs (default 35..45).
        #[arg(long, value_delimiter = ',', value_parser = number)]
        lambdas: Option<Vec<Exact>>,
        /// Comma-separated ratios (default 3.25..5.25 by 0.5).
        #[arg(long = "z-values", value_delimiter = ',', value_parser = number)]
        z_values: Option<Vec<Exact>>,
        /// `ship,category` CSV to compare against.
        #[arg(long)]
        baseline: Option<PathBuf>,
        /// Also write the per-cell category matrix for this ship.
        #[arg(long)]
        ship: Option<String>,
        #[arg(long, default_value = "sweep")]
        out: PathBuf,
    },
    /// Inspect session files.
    Session {
        #[command(subcommand)]
        action: SessionAction,
    },
    /// Start the HTTP session service.
    Serve {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        bind: Option<String>,
        #[arg(long)]
        data_dir: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum SessionAction {
    /// Report consistency problems; exits non-zero if any.
    Validate { path: PathBuf },
    /// Print derived value functions and weights.
    Show { path: PathBuf },
}

#[derive(Args)]
struct CommonArgs {
    #[arg(long)]
    fleet: PathBuf,
    #[arg(long)]
    session: PathBuf,
    /// Reference lists, required for raw fleets.
    #[arg(long)]
    lists: Option<PathBuf>,
    #[arg(long, value_parser = number)]
    lambda23: Option<Exact>,
    #[arg(long, value_parser = number)]
    lambda12: Option<Exact>,
    #[arg(long, value_parser = number)]
    z: Option<Exact>,
    /// Ignore unknown columns and give unlisted entries the worst level.
    #[arg(long)]
    lenient: bool,
}

fn number(s: &str) -> std::result::Result<Exact, String> {
    parse_exact(s).map_err(|e| e.to_string())
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| GatewayError::File {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

fn load_session(path: &Path) -> Result<SessionDocument> {
    SessionDocument::parse(&read(path)?).map_err(GatewayError::core(path.display().to_string()))
}

/// Writes every file or none: contents go to temporaries first.
fn write_all(files: &[(PathBuf, &str)]) -> Result<()> {
    let mut staged = Vec::new();
    for (path, contents) in files {
        let tmp = path.with_extension(format!(
            "{}.partial",
            path.extension().and_then(|e| e.to_str()).unwrap_or("")
        ));
        if let Err(e) = std::fs::write(&tmp, contents) {
            for (t, _) in &staged {
                let _ = std::fs::remove_file(t);
            }
            return Err(GatewayError::File {
                path: path.display().to_string(),
                message: e.to_string(),
            });
        }
        staged.push((tmp, path.clone()));
    }
    for (tmp, path) in staged {
        std::fs::rename(&tmp, &path).map_err(|e| GatewayError::File {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
    }
    Ok(())
}

fn with_suffix(base: &Path, suffix: &str) -> PathBuf {
    let mut s = base.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

struct Loaded {
    session: SessionDocument,
    fleet: String,
    lists: Option<String>,
    overrides: Overrides,
}

fn load_common(c: &CommonArgs) -> Result<Loaded> {
    Ok(Loaded {
        session: load_session(&c.session)?,
        fleet: read(&c.fleet)?,
        lists: c.lists.as_deref().map(read).transpose()?,
        overrides: Overrides {
            lambda_23: c.lambda23.clone(),
            lambda_12: c.lambda12.clone(),
            z: c.z.clone(),
            lenient: c.lenient,
        },
    })
}

fn run(cli: Cli) -> Result<ExitCode> {
    let exec = if cli.sequential { Execution::Sequential } else { Execution::Parallel };
    match cli.command {
        Command::ReproducePaper { session, fleet, z, lambda23 } => {
            let session = match session {
                Some(p) => load_session(&p)?,
                None => fixtures::reference_session(),
            };
            let fleet = match fleet {
                Some(p) => {
                    let text = read(&p)?;
                    match parse_fleet(text.as_bytes(), None, &session.framework, Strictness::Strict)
                        .map_err(GatewayError::core(p.display().to_string()))?
                    {
                        Fleet::Performance(f) => f,
                        Fleet::Raw(raw) => {
                            dcm_core::io::lists::map_fleet(&raw, &fixtures::sample_lists(), Default::default())
                                .map_err(GatewayError::core(p.display().to_string()))?
                                .0
                        }
                    }
                }
                None => fixtures::sample_performance_fleet(),
            };
            let report = reproduce(&session, &fleet, &Scenario { z, lambda_23: lambda23 }, exec)?;
            print!("{}", report.render());
            Ok(if report.passed() { ExitCode::SUCCESS } else { ExitCode::FAILURE })
        }
        Command::Classify { common, out } => {
            let l = load_common(&common)?;
            let inputs = Inputs {
                session: &l.session,
                fleet: &l.fleet,
                lists: l.lists.as_deref(),
                overrides: &l.overrides,
            };
            let output = ops::classify(&inputs, exec)?;
            write_all(&[
                (with_suffix(&out, ".csv"), &output.results_csv),
                (with_suffix(&out, ".json"), &output.results_json),
            ])?;
            for w in &output.warnings {
                eprintln!("warning: ship {}: {} has no entry for {:?}; assigned {}", w.ship, w.list, w.key, w.assigned);
            }
            println!("C1 {}\nC2 {}\nC3 {}", output.counts.c1, output.counts.c2, output.counts.c3);
            Ok(ExitCode::SUCCESS)
        }
        Command::Sweep { common, lambdas, z_values, baseline, ship, out } => {
            let l = load_common(&common)?;
            let baseline_text = baseline.as_deref().map(read).transpose()?;
            let grid = match (lambdas, z_values) {
                (None, None) => None,
                (lv, zv) => {
                    let d = ScenarioGrid::default_grid();
                    Some(ScenarioGrid {
                        lambda_values: lv.unwrap_or(d.lambda_values),
                        z_values: zv.unwrap_or(d.z_values),
                    })
                }
            };
            let inputs = Inputs {
                session: &l.session,
                fleet: &l.fleet,
                lists: l.lists.as_deref(),
                overrides: &l.overrides,
            };
            let params = SweepParams {
                grid,
                baseline: baseline_text.as_deref(),
                ship: ship.as_deref(),
            };
            let output = ops::run_sweep(&inputs, &params, exec)?;
            let mut files = vec![
                (with_suffix(&out, "-counts.csv"), output.counts_csv.as_str()),
                (with_suffix(&out, ".json"), output.sweep_json.as_str()),
            ];
            if let (Some(name), Some(csv)) = (&ship, &output.ship_csv) {
                files.push((with_suffix(&out, &format!("-{name}.csv")), csv.as_str()));
            }
            write_all(&files)?;
            print!("{}", output.counts_csv);
            if baseline_text.is_some() {
                println!("cells differing from baseline: {}", output.changed_cells);
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Session { action } => match action {
            SessionAction::Validate { path } => {
                let session = load_session(&path)?;
                let report = session.validate();
                println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
                Ok(if report.is_valid() { ExitCode::SUCCESS } else { ExitCode::FAILURE })
            }
            SessionAction::Show { path } => {
                let session = load_session(&path)?;
                let report = session.validate();
                let derived = session.derive().map_err(GatewayError::core(path.display().to_string()))?;
                print!("{}", render_derived(&derived, &report));
                Ok(ExitCode::SUCCESS)
            }
        },
        Command::Serve { config, bind, data_dir } => {
            let cfg = ServerConfig::resolve(config.as_deref(), |k| std::env::var(k).ok(), bind, data_dir)?;
            let rt = tokio::runtime::Runtime::new().map_err(|e| GatewayError::Usage(e.to_string()))?;
            rt.block_on(dcm_gateway::http::serve(cfg))
                .map_err(|e| GatewayError::Usage(format!("server: {e}")))?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if let GatewayError::Core {
                source: dcm_core::Error::InconsistentTable { report, .. } | dcm_core::Error::InconsistentCloseness(report),
                ..
            } = &e
            {
                eprintln!("{}", serde_json::to_string_pretty(report).expect("report serializes"));
            }
            ExitCode::from(2)
        }
    }
}
