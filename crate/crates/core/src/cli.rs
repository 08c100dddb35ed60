//! Command-line front end.
//!
//! ```text
//! dbqg run configs/default_experiment.toml --trials 50 --out results/
//! dbqg single --algo dbqg --seed 7
//! dbqg sweep --points -10,0,10,20,30 --trials 100
//! dbqg verify
//! dbqg config > my_experiment.toml
//! ```

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use crate::dma::codebook;
use crate::error::{Error, Result};
use crate::harness::{
    emit_outputs, exhaustive_battery, fmt_sig, noise_sweep_points, run_experiment, run_trial, AlgorithmSpec,
    BatteryConfig, Experiment, ExperimentConfig, OutputPaths, SweepMode,
};

#[derive(Debug, Parser)]
#[command(name = "dbqg", version, about = "Blind DMA relay beamforming experiments")]
struct Cli {
    /// Worker threads for trial-level parallelism (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a full experiment described by a TOML file.
    Run {
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Run one algorithm on one trial and print its convergence curve.
    Single {
        #[arg(long)]
        algo: String,
        #[arg(long)]
        seed: u64,
        /// Experiment file supplying scenario, oracle and parameters.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Expected all-zero SNR (dB); default: last sweep point of the config.
        #[arg(long, allow_hyphen_values = true)]
        snr: Option<f64>,
    },
    /// Noise sweep with default settings unless a config file is given.
    Sweep {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Comma-separated sweep points.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        points: Option<Vec<f64>>,
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        /// Comma-separated algorithm names.
        #[arg(long, value_delimiter = ',')]
        algos: Option<Vec<String>>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Compare DBQG and classic GA with exhaustive search on 2x2 arrays.
    Verify {
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
    /// Print the default experiment configuration as TOML.
    Config,
}

#[derive(Debug, clap::Args)]
struct Overrides {
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    no_plot: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    NoisePower,
    Expected,
    PerTrial,
}

impl From<ModeArg> for SweepMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::NoisePower => SweepMode::NoisePower,
            ModeArg::Expected => SweepMode::ExpectedAllzeroSnr,
            ModeArg::PerTrial => SweepMode::PerTrialAllzeroSnr,
        }
    }
}

impl Overrides {
    fn apply(&self, config: &mut ExperimentConfig) {
        if let Some(t) = self.trials {
            config.trials = t;
        }
        if let Some(s) = self.seed {
            config.seed = s;
        }
        if let Some(dir) = &self.out {
            config.output.dir = dir.clone();
        }
        if self.no_plot {
            config.output.plot_script = false;
        }
    }
}

/// Parses `argv` (program name first), runs the command and returns the
/// process exit code.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("warning: cannot configure thread pool: {e}");
        }
    }
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn load_or_default(path: Option<&PathBuf>) -> Result<ExperimentConfig> {
    match path {
        Some(p) => ExperimentConfig::load(p),
        None => Ok(ExperimentConfig::default()),
    }
}

fn execute(command: Command) -> Result<i32> {
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match command {
        Command::Run { config, overrides } => {
            let mut config = ExperimentConfig::load(&config)?;
            overrides.apply(&mut config);
            run_and_write(&config, &mut out)?;
        }
        Command::Sweep {
            config,
            points,
            mode,
            algos,
            overrides,
        } => {
            let mut config = load_or_default(config.as_ref())?;
            if let Some(points) = points {
                config.sweep.points = points;
            }
            if let Some(mode) = mode {
                config.sweep.mode = mode.into();
            }
            if let Some(names) = algos {
                config.algorithms = names
                    .iter()
                    .map(|n| AlgorithmSpec::from_name(n.trim()))
                    .collect::<Result<_>>()?;
            }
            overrides.apply(&mut config);
            run_and_write(&config, &mut out)?;
        }
        Command::Single {
            algo,
            seed,
            config,
            snr,
        } => {
            let mut config = load_or_default(config.as_ref())?;
            let spec = match config.algorithms.iter().find(|a| a.name() == algo) {
                Some(spec) => spec.clone(),
                None => AlgorithmSpec::from_name(&algo)?,
            };
            config.algorithms = vec![spec];
            config.seed = seed;
            config.trials = 1;
            if config.sweep.mode == SweepMode::NoisePower && snr.is_some() {
                config.sweep.mode = SweepMode::ExpectedAllzeroSnr;
            }
            let point = match snr {
                Some(s) => s,
                None => *config.sweep.points.last().ok_or_else(|| Error::config("noise sweep has no points"))?,
            };
            config.sweep.points = vec![point];
            config.validate()?;
            let points = noise_sweep_points(&config)?;
            let cb = codebook(config.phase_bits)?;
            let run = run_trial(&config, &points, &cb, 0)?.remove(0);
            print_single(&mut out, &run).map_err(|e| Error::io("<stdout>", e))?;
        }
        Command::Verify { trials, seed } => {
            let config = BatteryConfig {
                trials,
                seed,
                ..BatteryConfig::default()
            };
            let report = exhaustive_battery(&config)?;
            let dbqg_ok = report.dbqg_rate() >= 0.95;
            let ga_ok = report.ga_rate() >= 0.80;
            let verdict = |ok: bool| if ok { "PASS" } else { "FAIL" };
            writeln!(
                out,
                "dbqg global-optimum hit rate {}/{} = {} (>= 0.95) {}",
                report.dbqg_hits,
                report.trials,
                fmt_sig(report.dbqg_rate()),
                verdict(dbqg_ok)
            )
            .and_then(|_| {
                writeln!(
                    out,
                    "ga   global-optimum hit rate {}/{} = {} (>= 0.80) {}",
                    report.ga_hits,
                    report.trials,
                    fmt_sig(report.ga_rate()),
                    verdict(ga_ok)
                )
            })
            .map_err(|e| Error::io("<stdout>", e))?;
            return Ok(if dbqg_ok && ga_ok { 0 } else { 1 });
        }
        Command::Config => {
            let text = ExperimentConfig::default().to_toml()?;
            out.write_all(text.as_bytes()).map_err(|e| Error::io("<stdout>", e))?;
        }
    }
    Ok(0)
}

fn run_and_write(config: &ExperimentConfig, out: &mut impl Write) -> Result<()> {
    let experiment = run_experiment(config)?;
    let paths = OutputPaths::in_dir(&config.output.dir, config.output.plot_script);
    emit_outputs(&experiment, &paths)?;
    print_summary(out, &experiment, &paths).map_err(|e| Error::io("<stdout>", e))
}

fn print_summary(out: &mut impl Write, experiment: &Experiment, paths: &OutputPaths) -> std::io::Result<()> {
    writeln!(
        out,
        "{:<6} {:>10} {:>14} {:>12} {:>10} {:>12}",
        "algo", "point", "allzero_snr", "mean_sinr", "stderr", "evaluations"
    )?;
    for r in &experiment.summary.rows {
        writeln!(
            out,
            "{:<6} {:>10} {:>14} {:>12} {:>10} {:>12}",
            r.algorithm,
            fmt_sig(r.point_label),
            fmt_sig(r.mean_allzero_snr_db),
            fmt_sig(r.mean_sinr_db),
            fmt_sig(r.stderr_db),
            fmt_sig(r.mean_evaluations)
        )?;
    }
    writeln!(out, "wrote {}", paths.summary_csv.display())?;
    writeln!(out, "wrote {}", paths.curves_csv.display())?;
    writeln!(out, "wrote {}", paths.records_jsonl.display())?;
    if let Some(p) = &paths.plot_script {
        writeln!(out, "wrote {}", p.display())?;
    }
    Ok(())
}

fn print_single(out: &mut impl Write, run: &crate::harness::TrialRun) -> std::io::Result<()> {
    writeln!(out, "# algorithm {} scenario seed {}", run.algorithm, run.scenario_seed)?;
    writeln!(out, "# all-zero snr {} dB", fmt_sig(run.allzero_snr_db))?;
    writeln!(out, "# initial indicator {} dB", fmt_sig(run.record.init_indicator))?;
    writeln!(out, "generation,best_db,evaluations")?;
    for g in &run.record.per_generation {
        writeln!(out, "{},{},{}", g.generation, fmt_sig(g.best_indicator), g.evaluations)?;
    }
    writeln!(out, "# final sinr {} dB after {} evaluations", fmt_sig(run.final_sinr_db), run.record.evaluations)
}
