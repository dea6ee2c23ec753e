use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use cmab_core::harness::{
    diagnostic_concentration, emit_csv, emit_timing_csv, preset, run_experiment, timing_report,
    ExperimentConfig, PRESETS,
};
use cmab_core::CmabError;

#[derive(Parser, Debug)]
#[command(version, about = "Combinatorial semi-bandit regret benchmarks", long_about = None)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run an experiment and write regret.csv (and timing.csv) to OUTPUT
    Run {
        /// Config file, or the name of a bundled preset
        #[arg(long)]
        config: String,
        /// Output directory, created if missing
        #[arg(long)]
        output: PathBuf,
        #[arg(long)]
        reps: Option<usize>,
        #[arg(long)]
        horizon: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Record per-round selection time
        #[arg(long)]
        timing: bool,
        /// Let all policies of a repetition see the same outcome stream
        #[arg(long)]
        couple_streams: bool,
        /// Comma-separated subset of the configured policy names
        #[arg(long, value_delimiter = ',')]
        policies: Option<Vec<String>>,
    },
    /// List the bundled presets
    ListPresets,
    /// Print a bundled preset
    ShowPreset { name: String },
    /// Count concentration events of CTS-Beta on the config's instance
    DiagnoseConcentration {
        #[arg(long)]
        config: String,
        /// Multiplier on the event radius
        #[arg(long, default_value_t = 1.0)]
        radius_scale: f64,
        #[arg(long)]
        reps: Option<usize>,
        #[arg(long)]
        horizon: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn load(
    config: &str,
    reps: Option<usize>,
    horizon: Option<usize>,
    seed: Option<u64>,
) -> Result<ExperimentConfig, CmabError> {
    let mut cfg = ExperimentConfig::load(config)?;
    if let Some(r) = reps {
        cfg.repetitions = r;
    }
    if let Some(t) = horizon {
        cfg.horizon = t;
    }
    if let Some(s) = seed {
        cfg.seed = s;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn execute(command: Command) -> Result<(), CmabError> {
    match command {
        Command::Run {
            config,
            output,
            reps,
            horizon,
            seed,
            timing,
            couple_streams,
            policies,
        } => {
            let mut cfg = load(&config, reps, horizon, seed)?;
            cfg.timing |= timing;
            cfg.couple_streams |= couple_streams;
            if let Some(names) = policies {
                cfg.select_policies(&names)?;
            }
            let result = run_experiment(&cfg)?;
            std::fs::create_dir_all(&output).map_err(|source| CmabError::Io {
                path: output.clone(),
                source,
            })?;
            emit_csv(&result, &output.join("regret.csv"))?;
            if cfg.timing {
                emit_timing_csv(&result, &output.join("timing.csv"))?;
            }
            let times = timing_report(&result);
            for c in &result.curves {
                let ms = times
                    .iter()
                    .find(|(v, p, _)| *v == c.variant && *p == c.policy)
                    .map(|(_, _, ms)| format!("  {ms:.4} ms/round"))
                    .unwrap_or_default();
                let sd = c.std.last().copied().unwrap_or(0.0);
                println!(
                    "{:<40} final regret {:>12.3} +- {:<10.3}{ms}",
                    c.label(),
                    c.final_mean(),
                    sd
                );
            }
            println!("wrote {}", output.join("regret.csv").display());
        }
        Command::ListPresets => {
            for (name, _) in PRESETS {
                let cfg = ExperimentConfig::load(name)?;
                println!("{name:<22} {}", cfg.description.as_deref().unwrap_or(""));
            }
        }
        Command::ShowPreset { name } => {
            let text = preset(&name)
                .ok_or_else(|| CmabError::Config(format!("unknown preset {name:?}")))?;
            print!("{text}");
        }
        Command::DiagnoseConcentration {
            config,
            radius_scale,
            reps,
            horizon,
            seed,
        } => {
            let cfg = load(&config, reps, horizon, seed)?;
            let rep = diagnostic_concentration(&cfg, radius_scale)?;
            let summary = serde_json::json!({
                "events": rep.total(),
                "per_run": rep.per_run,
                "runs": cfg.repetitions,
                "horizon": cfg.horizon,
                "rounds_checked": rep.rounds_checked,
                "actions": rep.num_actions,
                "max_action_size": rep.max_action_size,
                "radius_scale": radius_scale,
            });
            println!("{summary}");
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!(
                "{}",
                serde_json::json!({ "error": e.kind(), "message": e.to_string() })
            );
            ExitCode::FAILURE
        }
    }
}
