use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use fdpn::analytic::{inband_average, predict};
use fdpn::experiments::{
    compare_report, load_config, preset, read_result, run_sweep, write_result, write_spectrum_csv, SpectrumTable,
};
use fdpn::simulator::{run_monte_carlo, stderr_db};
use fdpn::to_db;

#[derive(Parser)]
#[command(name = "fdpn", version, about = "Phase-noise limits on full-duplex SI cancellation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one of the figure sweeps (fig3 .. fig10).
    Figure {
        name: String,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Sweep CSV path; spectra go beside it. Defaults to `<name>.csv`.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        analytic_only: bool,
    },
    /// Run a single scenario from a JSON file and write its spectrum.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides `sim.trials`.
        #[arg(long)]
        trials: Option<usize>,
        /// Overrides `sim.seed`.
        #[arg(long)]
        seed: Option<u64>,
        /// Spectrum CSV path; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        analytic_only: bool,
    },
    /// Summarize closed-form vs simulated differences in a CSV.
    Compare {
        #[arg(long = "in")]
        input: PathBuf,
    },
}

fn run(cli: Cli) -> fdpn::Result<()> {
    match cli.command {
        Command::Figure { name, trials, seed, out, analytic_only } => {
            let spec = preset(&name)?;
            let trials = if analytic_only { 0 } else { trials };
            let result = run_sweep(&spec, trials, seed)?;
            let out = out.unwrap_or_else(|| PathBuf::from(format!("{name}.csv")));
            for p in write_result(&result, &out)? {
                eprintln!("wrote {}", p.display());
            }
        }
        Command::Run { config, trials, seed, out, analytic_only } => {
            let mut cfg = load_config(&config)?;
            if let Some(t) = trials {
                cfg.trials = t;
            }
            if let Some(s) = seed {
                cfg.master_seed = s;
            }
            cfg.validate()?;
            let prediction = predict(&cfg)?;
            let active = &cfg.waveform.active_set;
            eprintln!("analytic inband: {:.3} dB", inband_average(&prediction.post_dlc, active)?);
            let mc = if analytic_only { None } else { Some(run_monte_carlo(&cfg, cfg.trials, cfg.master_seed)?) };
            if let Some(mc) = &mc {
                eprintln!(
                    "simulated inband: {:.3} dB ± {:.3} dB over {} trials",
                    mc.inband_post_db(),
                    mc.inband_post_stderr_db(),
                    mc.trials_run
                );
            }
            let reference = cfg.reference_power();
            let table = SpectrumTable {
                label: "run".into(),
                analytic_db: prediction.post_dlc.db(),
                sim_mean_db: mc.as_ref().map(|m| m.mean_post.iter().map(|v| to_db(v / reference)).collect()),
                sim_stderr_db: mc
                    .as_ref()
                    .map(|m| m.mean_post.iter().zip(&m.stderr_post).map(|(&a, &s)| stderr_db(a, s)).collect()),
                active_set: active.clone(),
            };
            match out {
                Some(p) => write_spectrum_csv(&table, std::fs::File::create(p)?)?,
                None => write_spectrum_csv(&table, std::io::stdout().lock())?,
            }
        }
        Command::Compare { input } => {
            let result = read_result(&input)?;
            print!("{}", compare_report(&result)?);
        }
    }
    Ok(())
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
