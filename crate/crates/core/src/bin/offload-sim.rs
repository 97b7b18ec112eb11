use std::io::stdout;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fuzzyq_offload::experiment::{
    append_csv, build_environment, build_world, grid_search_fp, sweep, write_csv, write_json_report, ResultRow,
    ScenarioConfig, SweepSpec, GRID_HEADER, RESULT_HEADER,
};
use fuzzyq_offload::{Error, Result};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "offload-sim", version, about = "Crowdsensing data offloading simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and append a result row.
    Run {
        #[command(flatten)]
        common: Common,
        /// Per-packet CSV log.
        #[arg(long, value_name = "PATH")]
        event_log: Option<PathBuf>,
        /// Full JSON report (configuration and metrics).
        #[arg(long, value_name = "PATH")]
        report: Option<PathBuf>,
    },
    /// Grid search over fixed-probability strategies.
    GridFp {
        #[command(flatten)]
        common: Common,
        /// Values tried for each of p_keep, p_rsu and p_sensor.
        #[arg(long, value_delimiter = ',', default_values_t = [0.1, 0.2, 0.3, 0.4, 0.5])]
        values: Vec<f64>,
    },
    /// Sweep one configuration field over a list of values and seeds.
    Sweep {
        /// Sweep spec (`axis`, `values`, `seeds`, `base`).
        #[arg(long, value_name = "PATH")]
        config: Option<PathBuf>,
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
        /// Overrides the spec's axis.
        #[arg(long)]
        axis: Option<String>,
        /// Overrides the spec's values (JSON scalars, comma separated).
        #[arg(long, value_delimiter = ',')]
        values: Option<Vec<String>>,
        #[arg(long, value_delimiter = ',')]
        seeds: Option<Vec<u64>>,
        #[arg(long, value_name = "K")]
        warmup_slots: Option<u64>,
    },
}

#[derive(Args)]
struct Common {
    /// Scenario JSON; built-in defaults when omitted.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// CSV to append to; stdout when omitted.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
    /// Exclude packets generated before slot K from the metrics.
    #[arg(long, value_name = "K")]
    warmup_slots: Option<u64>,
}

impl Common {
    fn scenario(&self) -> Result<ScenarioConfig> {
        let mut cfg = match &self.config {
            Some(p) => ScenarioConfig::load(p)?,
            None => ScenarioConfig::default(),
        };
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(k) = self.warmup_slots {
            cfg.warmup_slots = k;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn emit<S: Serialize>(out: Option<&Path>, header: &[&str], rows: &[S]) -> Result<()> {
    match out {
        Some(p) => append_csv(p, header, rows),
        None => write_csv(stdout().lock(), header, rows, true),
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run {
            common,
            event_log,
            report,
        } => {
            let cfg = common.scenario()?;
            let env = build_environment(&cfg)?;
            let mut world = build_world(&cfg, env, event_log.is_some())?;
            let metrics = world.run(cfg.horizon);
            if let Some(path) = &event_log {
                let f = std::fs::File::create(path).map_err(|e| Error::Io {
                    path: path.clone(),
                    source: e,
                })?;
                world.write_event_log(f)?;
            }
            if let Some(path) = &report {
                write_json_report(path, &cfg, &metrics)?;
            }
            emit(common.out.as_deref(), &RESULT_HEADER, &[ResultRow::new(&cfg, &metrics)])
        }
        Command::GridFp { common, values } => {
            let cfg = common.scenario()?;
            let result = grid_search_fp(&cfg, &values)?;
            for (k, r, s) in &result.skipped {
                eprintln!("skipped p_keep={k} p_rsu={r} p_sensor={s}: probabilities exceed 1");
            }
            emit(common.out.as_deref(), &GRID_HEADER, &result.rows)
        }
        Command::Sweep {
            config,
            out,
            axis,
            values,
            seeds,
            warmup_slots,
        } => {
            let mut spec = match &config {
                Some(p) => SweepSpec::load(p)?,
                None => {
                    let axis = axis.clone().ok_or_else(|| {
                        Error::InvalidConfig(vec!["sweep needs --config or --axis with --values".into()])
                    })?;
                    SweepSpec {
                        axis,
                        values: Vec::new(),
                        seeds: (1..=5).collect(),
                        base: ScenarioConfig::default(),
                    }
                }
            };
            if let Some(a) = axis {
                spec.axis = a;
            }
            if let Some(vs) = values {
                spec.values = vs
                    .iter()
                    .map(|v| serde_json::from_str(v).unwrap_or_else(|_| serde_json::Value::String(v.clone())))
                    .collect();
            }
            if let Some(s) = seeds {
                spec.seeds = s;
            }
            if let Some(k) = warmup_slots {
                spec.base.warmup_slots = k;
            }
            let groups = sweep(&spec)?;
            let rows: Vec<&ResultRow> = groups.iter().flat_map(|g| g.rows()).collect();
            emit(out.as_deref(), &RESULT_HEADER, &rows)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
