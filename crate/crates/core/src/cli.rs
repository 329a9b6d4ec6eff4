//! Command-line front end of the `klrfs` binary.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand};

use crate::data::DataMatrix;
use crate::error::{Error, Result};
use crate::pipeline::config::{schema_help, ExperimentConfig, Method};
use crate::pipeline::dataset::{load_dataset, save_dataset, summarize, LabelSpec};
use crate::pipeline::report::{write_file, ExperimentReport};
use crate::pipeline::run::{run_benchmark, run_delta_sweep, run_evaluate, select_on_dataset};
use crate::pipeline::synth::gen_synthetic;

#[derive(Debug, Parser)]
#[command(name = "klrfs", version, about = "Kernel-alignment feature selection with a latent-space target")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Configuration file of `key = value` lines.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Dataset CSV (overrides `data`).
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Master seed (overrides `seed`).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads (overrides `jobs`).
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Comma-separated feature counts (overrides `p_select`).
    #[arg(long = "p-select")]
    pub p_select: Option<String>,
    /// Further `key=value` configuration overrides.
    #[arg(value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Select features on a whole dataset and write the kernel weights.
    Select {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        out: PathBuf,
        /// Mixture coefficient (default: `benchmark_delta`).
        #[arg(long)]
        delta: Option<f64>,
    },
    /// Repeated-split evaluation of KLR-FS at one delta.
    Evaluate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        delta: Option<f64>,
    },
    /// KLR-FS over the delta grid.
    SweepDelta {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        out: PathBuf,
    },
    /// KLR-FS against baseline selectors on shared splits.
    Benchmark {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        out: PathBuf,
        /// Comma-separated methods (overrides `methods`).
        #[arg(long)]
        method: Option<String>,
    },
    /// Write a synthetic dataset with planted informative features.
    Synth {
        /// Output CSV; planted features go to `<out>.planted.json`.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 120)]
        samples: usize,
        #[arg(long, default_value_t = 500)]
        features: usize,
        #[arg(long, default_value_t = 10)]
        informative: usize,
        #[arg(long, default_value_t = 1.5)]
        shift: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Check that a dataset parses and print its shape.
    ValidateData {
        #[command(flatten)]
        common: Common,
    },
}

fn build_config(common: &Common) -> Result<ExperimentConfig> {
    let mut cfg = match &common.config {
        Some(p) => ExperimentConfig::from_file(p)?,
        None => ExperimentConfig::default(),
    };
    let mut overrides = common.overrides.clone();
    if let Some(d) = &common.data {
        overrides.push(format!("data={}", d.display()));
    }
    if let Some(s) = common.seed {
        overrides.push(format!("seed={s}"));
    }
    if let Some(j) = common.jobs {
        overrides.push(format!("jobs={j}"));
    }
    if let Some(p) = &common.p_select {
        overrides.push(format!("p_select={p}"));
    }
    cfg.apply_overrides(&overrides)?;
    Ok(cfg)
}

fn load(cfg: &ExperimentConfig) -> Result<DataMatrix> {
    let path = cfg
        .data
        .as_ref()
        .ok_or_else(|| Error::Config("no dataset: pass --data or set data".into()))?;
    load_dataset(
        path,
        &LabelSpec {
            column: cfg.label_column.clone(),
            positive: cfg.positive_class.clone(),
        },
    )
}

fn write_log(out: &Path, command: &str, cfg: &ExperimentConfig) -> Result<()> {
    let secs = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
    let text = format!(
        "command = {command}\nfinished_unix_time = {secs}\nklrfs_version = {}\n{}",
        env!("CARGO_PKG_VERSION"),
        cfg.to_text()
    );
    write_file(&out.join("run.log"), &text)
}

fn finish_report(report: &ExperimentReport, out: &Path, command: &str) -> Result<()> {
    report.write(out)?;
    write_log(out, command, &report.config)?;
    print!("{}", report.summary_table());
    Ok(())
}

/// Runs a parsed command.
pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Select { common, out, delta } => {
            let cfg = build_config(&common)?;
            let data = load(&cfg)?;
            let delta = delta.unwrap_or(cfg.benchmark_delta);
            let sel = select_on_dataset(&cfg, &data, delta, cfg.max_p())?;
            std::fs::create_dir_all(&out).map_err(|e| Error::io(&out, e))?;
            write_file(&out.join("solution.json"), &serde_json::to_string_pretty(&sel).expect("serializes"))?;
            let mut names = sel.selected_names.join("\n");
            names.push('\n');
            write_file(&out.join("selected_features.txt"), &names)?;
            write_log(&out, "select", &cfg)?;
            for (name, w) in sel.selected_names.iter().zip(&sel.weights) {
                println!("{name}\t{w:.6}");
            }
            Ok(())
        }
        Command::Evaluate { common, out, delta } => {
            let cfg = build_config(&common)?;
            let data = load(&cfg)?;
            let report = run_evaluate(&cfg, &data, delta.unwrap_or(cfg.benchmark_delta))?;
            finish_report(&report, &out, "evaluate")
        }
        Command::SweepDelta { common, out } => {
            let cfg = build_config(&common)?;
            let data = load(&cfg)?;
            let report = run_delta_sweep(&cfg, &data)?;
            finish_report(&report, &out, "sweep-delta")?;
            for a in report.aggregates.iter().filter(|a| a.delta == Some(0.0)) {
                if let Some(auc) = a.auc_mean {
                    println!("delta=0 (latent target only) p={} mean AUC {auc:.4}", a.p);
                }
            }
            Ok(())
        }
        Command::Benchmark { common, out, method } => {
            let mut cfg = build_config(&common)?;
            if let Some(m) = method {
                cfg.methods = m.split(',').map(str::parse::<Method>).collect::<Result<_>>()?;
                cfg.validate()?;
            }
            let data = load(&cfg)?;
            let report = run_benchmark(&cfg, &data)?;
            finish_report(&report, &out, "benchmark")
        }
        Command::Synth {
            out,
            samples,
            features,
            informative,
            shift,
            seed,
        } => {
            let s = gen_synthetic(samples, features, informative, shift, seed)?;
            if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
            }
            save_dataset(&s.data, &out, "label")?;
            let mut meta_path = out.clone().into_os_string();
            meta_path.push(".planted.json");
            write_file(
                Path::new(&meta_path),
                &serde_json::to_string_pretty(&s.meta).expect("serializes"),
            )?;
            println!("wrote {} ({samples} x {features}, planted {:?})", out.display(), s.meta.planted_names);
            Ok(())
        }
        Command::ValidateData { common } => {
            let cfg = build_config(&common)?;
            let data = load(&cfg)?;
            let s = summarize(&data);
            println!(
                "ok: {} samples, {} features, {} positive, {} negative",
                s.n_samples, s.n_features, s.n_positive, s.n_negative
            );
            if !s.constant_features.is_empty() {
                println!("constant features: {}", s.constant_features.join(", "));
            }
            Ok(())
        }
    }
}

/// Parses `std::env::args`, runs, and maps errors to exit codes.
pub fn main() -> ExitCode {
    let keys = schema_help();
    let matches = Cli::command()
        .after_long_help(keys.clone())
        .mut_subcommands(|sub| sub.after_long_help(keys.clone()))
        .get_matches();
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(c) => c,
        Err(e) => e.exit(),
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
