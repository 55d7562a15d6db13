use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use astrogate::config::{load_config, ConfigFile, Loaded};
use astrogate::network::{build_gate, GateConfig, GatePreset, LogicInputs};
use astrogate::output::{run_single, run_sweep};
use astrogate::sweep::SweepSpec;
use astrogate::{Error, Result};

#[derive(Parser)]
#[command(name = "astrogate", version, about = "Neuron-astrocyte logic gate simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one gate and write its trace and metrics.
    Run {
        #[arg(long)]
        preset: Option<String>,
        /// Logic inputs, e.g. `10` or `1,1`.
        #[arg(long)]
        inputs: Option<String>,
        #[arg(long)]
        sigma: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// TOML gate file; flags given alongside override its values.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Run a noise sweep and write per-trial and summary CSVs.
    Sweep {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long)]
        base_seed: Option<u64>,
    },
    /// List the registered gate presets.
    Presets,
}

// Preset and input strings are parsed here rather than by clap so that bad
// values exit as configuration errors.
fn gate_config(
    preset: Option<String>,
    inputs: Option<String>,
    sigma: Option<f64>,
    seed: Option<u64>,
    config: Option<PathBuf>,
) -> Result<Loaded<GateConfig>> {
    let preset = preset.map(|p| p.parse::<GatePreset>()).transpose()?;
    let inputs = inputs.map(|i| i.parse::<LogicInputs>()).transpose()?;
    let mut loaded = match (config, preset) {
        (Some(path), None) => match load_config(&path)? {
            ConfigFile::Gate(g) => g,
            ConfigFile::Sweep(_) => {
                return Err(Error::config("config", "`run` needs a gate file, found a sweep specification"))
            }
        },
        (Some(_), Some(_)) => return Err(Error::config("preset", "give either --preset or --config, not both")),
        (None, preset) => {
            let preset = preset.unwrap_or(GatePreset::OrTonic);
            Loaded {
                value: build_gate(preset, LogicInputs([true, false]), 0.0, 0)?,
                overrides: Vec::new(),
            }
        }
    };
    let cfg = &mut loaded.value;
    if let Some(i) = inputs {
        cfg.logic_inputs = i;
        loaded.overrides.push(format!("--inputs {i}"));
    }
    if let Some(s) = sigma {
        cfg.noise_sigma = s;
        loaded.overrides.push(format!("--sigma {s}"));
    }
    if let Some(s) = seed {
        cfg.seed = s;
        loaded.overrides.push(format!("--seed {s}"));
    }
    cfg.validate()?;
    Ok(loaded)
}

fn sweep_spec(config: Option<PathBuf>, base_seed: Option<u64>) -> Result<Loaded<SweepSpec>> {
    let mut loaded = match config {
        Some(path) => match load_config(&path)? {
            ConfigFile::Sweep(s) => s,
            ConfigFile::Gate(_) => return Err(Error::config("config", "`sweep` needs a sweep specification")),
        },
        None => Loaded {
            value: SweepSpec::default(),
            overrides: Vec::new(),
        },
    };
    if let Some(seed) = base_seed {
        loaded.value.base_seed = seed;
        loaded.overrides.push(format!("--base-seed {seed}"));
    }
    Ok(loaded)
}

fn print_presets() {
    println!("{:<13} {:<4} {:<7} {:>9} {:>6}  {:<22} description", "preset", "gate", "pattern", "amplitude", "w", "alpha/beta/gamma/delta");
    for p in GatePreset::REGISTERED {
        let spec = p.spec().expect("registered presets have a spec");
        let [a, b, g, d] = spec.gains;
        println!(
            "{:<13} {:<4} {:<7} {:>9} {:>6}  {:<22} {}",
            p.name(),
            spec.kind.to_string(),
            spec.pattern,
            spec.amplitude,
            spec.w,
            format!("{a}/{b}/{g}/{d}"),
            spec.description
        );
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run {
            preset,
            inputs,
            sigma,
            seed,
            out,
            config,
        } => {
            let loaded = gate_config(preset, inputs, sigma, seed, config)?;
            for o in &loaded.overrides {
                log::info!("override {o}");
            }
            let cfg = &loaded.value;
            let result = run_single(cfg, &loaded.overrides, &out)?;
            println!(
                "{} inputs [{}] sigma={} seed={}: {}",
                cfg.preset,
                cfg.logic_inputs,
                cfg.noise_sigma,
                cfg.seed,
                result.report.caption()
            );
            println!("observed {}", result.report.observed_bits);
            println!("expected {}", result.report.expected_bits);
            println!("trace   {}", result.trace_path.display());
            println!("metrics {}", result.metrics_path.display());
        }
        Command::Sweep { config, out, base_seed } => {
            let loaded = sweep_spec(config, base_seed)?;
            let spec = &loaded.value;
            log::info!("sweep of {} runs", spec.n_runs());
            let result = run_sweep(spec, &loaded.overrides, &out)?;
            for r in &result.summary.rows {
                println!(
                    "{:<13} [{}] sigma={:<4} accuracy={:.2}±{:.2} LER={:.2}±{:.2}% failures={}",
                    r.variant, r.inputs, r.sigma, r.acc_mean, r.acc_std, r.ler_mean, r.ler_std, r.failures
                );
            }
            println!("per-trial {}", result.per_trial_path.display());
            println!("summary   {}", result.summary_path.display());
        }
        Command::Presets => print_presets(),
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
