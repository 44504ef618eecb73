use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use mimic_ebom::model::{random_source, UnivariateModel};
use mimic_ebom::runner::{self, ExperimentConfig, RunRecord, SnapshotPolicy};
use mimic_ebom::theory::{blockwise_profile, verify_tail_bound, UnivariateTheoremReport};

#[derive(Parser)]
#[command(
    name = "mimic",
    version,
    about = "MIMIC on EqualBlocksOneMax: experiments and model analysis"
)]
struct Cli {
    /// TOML file with experiment settings; flags given on the command line win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Independent runs at a single problem size.
    Run {
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        runs: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        lambda_factor: Option<f64>,
        #[arg(long)]
        mu_divisor: Option<f64>,
        #[arg(long)]
        cap: Option<u64>,
        #[arg(long, value_enum)]
        snapshots: Option<Snapshots>,
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Runs over a range of problem sizes.
    Grid {
        #[arg(long)]
        n_min: Option<usize>,
        #[arg(long)]
        n_max: Option<usize>,
        #[arg(long)]
        n_step: Option<usize>,
        #[arg(long)]
        runs: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        cap: Option<u64>,
        #[arg(long, value_enum)]
        snapshots: Option<Snapshots>,
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Recomputes quality columns and aggregates from a results directory.
    Analyze {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Checks the Hamming-tail bound for a univariate frequency vector.
    VerifyUnivariate {
        /// Required unless the profile is read from a file.
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, value_enum)]
        profile: Profile,
        /// Probabilities separated by commas or whitespace, for `--profile file`.
        #[arg(long)]
        p_file: Option<PathBuf>,
        /// Per-entry distance budget of the blockwise profile, in units of 1/n.
        #[arg(long, default_value_t = 1.0)]
        spread: f64,
        #[arg(long)]
        gamma: f64,
        #[arg(long, default_value_t = 1_000_000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Writes per-n quartiles of one metric for plotting.
    PlotData {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        metric: String,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Snapshots {
    None,
    Final,
    All,
}

impl From<Snapshots> for SnapshotPolicy {
    fn from(s: Snapshots) -> Self {
        match s {
            Snapshots::None => SnapshotPolicy::None,
            Snapshots::Final => SnapshotPolicy::Final,
            Snapshots::All => SnapshotPolicy::EveryIteration,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Profile {
    Uniform,
    Blockwise,
    File,
}

fn base_config(path: Option<&Path>) -> Result<ExperimentConfig> {
    match path {
        Some(p) => Ok(ExperimentConfig::from_toml_file(p)?),
        None => Ok(ExperimentConfig::default()),
    }
}

fn report(records: &[RunRecord], out: &Path) {
    let aborted = records.iter().filter(|r| r.aborted()).count();
    eprintln!(
        "{} runs written to {} ({} aborted)",
        records.len(),
        out.display(),
        aborted
    );
}

fn read_profile(path: &Path) -> Result<UnivariateModel> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let freqs = text
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<f64>()
                .with_context(|| format!("bad probability `{t}`"))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(UnivariateModel::new(freqs)?)
}

fn run(cli: Cli) -> Result<()> {
    let config_path = cli.config.as_deref();
    match cli.command {
        Command::Run {
            n,
            runs,
            seed,
            lambda_factor,
            mu_divisor,
            cap,
            snapshots,
            workers,
            out,
        } => {
            let mut c = base_config(config_path)?;
            match n {
                Some(n) => c.n_values = vec![n],
                None if config_path.is_some() && c.n_values.len() == 1 => {}
                None => bail!("--n is required (or a config file with a single n)"),
            }
            c.runs_per_n = runs.unwrap_or(c.runs_per_n);
            c.master_seed = seed.unwrap_or(c.master_seed);
            c.lambda_factor = lambda_factor.unwrap_or(c.lambda_factor);
            c.mu_divisor = mu_divisor.unwrap_or(c.mu_divisor);
            c.iteration_cap = cap.unwrap_or(c.iteration_cap);
            c.workers = workers.unwrap_or(c.workers);
            if let Some(s) = snapshots {
                c.snapshot_policy = s.into();
            }
            let records = runner::run_grid_to_dir(&c, &out)?;
            report(&records, &out);
        }
        Command::Grid {
            n_min,
            n_max,
            n_step,
            runs,
            seed,
            cap,
            snapshots,
            workers,
            out,
        } => {
            let mut c = base_config(config_path)?;
            if n_min.is_some() || n_max.is_some() || n_step.is_some() {
                let lo = n_min.unwrap_or(50);
                let hi = n_max.unwrap_or(200);
                let step = n_step.unwrap_or(10);
                if step == 0 || lo > hi {
                    bail!("empty range of n: {lo}..={hi} step {step}");
                }
                c.n_values = (lo..=hi).step_by(step).collect();
            }
            c.runs_per_n = runs.unwrap_or(c.runs_per_n);
            c.master_seed = seed.unwrap_or(c.master_seed);
            c.iteration_cap = cap.unwrap_or(c.iteration_cap);
            c.workers = workers.unwrap_or(c.workers);
            if let Some(s) = snapshots {
                c.snapshot_policy = s.into();
            }
            let records = runner::run_grid_to_dir(&c, &out)?;
            report(&records, &out);
        }
        Command::Analyze { input, out } => {
            let records = runner::analyze(&input, &out)?;
            report(&records, &out);
        }
        Command::VerifyUnivariate {
            n,
            profile,
            p_file,
            spread,
            gamma,
            trials,
            seed,
        } => {
            let mut rng = random_source(seed);
            let p = match profile {
                Profile::Uniform => UnivariateModel::uniform(n.context("--n is required")?),
                Profile::Blockwise => {
                    blockwise_profile(n.context("--n is required")?, spread, &mut rng)?
                }
                Profile::File => {
                    let p = read_profile(
                        &p_file.context("--p-file is required for the file profile")?,
                    )?;
                    if let Some(n) = n.filter(|&n| n != p.n()) {
                        bail!(
                            "--n {n} disagrees with the {} probabilities in the file",
                            p.n()
                        );
                    }
                    p
                }
            };
            let r = verify_tail_bound(&p, gamma, trials, &mut rng)?;
            println!("{}", UnivariateTheoremReport::CSV_HEADER);
            println!("{}", r.csv_row());
            if r.precondition_violated {
                eprintln!(
                    "gamma {gamma} is below 4k = {:.4}; the bound is not claimed here",
                    4.0 * r.k_implied
                );
            }
        }
        Command::PlotData { input, metric, out } => {
            runner::plot_data(&input, &metric, &out)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
