//! Command-line interface.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use morphevo_core::analysis::{compare_final_generation, final_means_csv, summarize_arm, PairingMode};
use morphevo_core::controller::CpgConfig;
use morphevo_core::decoder::{decode_brain, DecodeLimits};
use morphevo_core::descriptors::{descriptor_vector, DESCRIPTOR_NAMES};
use morphevo_core::fitness::{evaluate_directed, FitnessBreakdown, FitnessParams};
use morphevo_core::simulation::{simulate, SimConfig, SimError};
use morphevo_core::terrain::Environment;

use crate::archive::{self, RunStatus};
use crate::documents::{self, BodyDocument, GenomeDocument, GenomeRole};
use crate::experiment::{self, ExperimentSpec};
use crate::parallel::ParallelEvaluator;
use crate::trajectory_io::{breakdown_text, trajectory_csv};
use crate::Error;

#[derive(Debug, Parser)]
#[command(name = "morphevo", version, about = "Co-evolve modular robot bodies and CPG controllers")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EnvironmentArg {
    Plain,
    Rough,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run every repetition of an experiment spec.
    Evolve {
        /// Experiment spec file (JSON).
        spec: PathBuf,
        /// Base seed; run i uses seed + i. Overrides the spec.
        #[arg(long)]
        seed: Option<u64>,
        /// Evaluation threads (default: available cores).
        #[arg(long)]
        workers: Option<usize>,
        /// Continue an interrupted experiment in the output directory.
        #[arg(long)]
        resume: bool,
        /// Scaled-down run: mu 8, lambda 4, 5 generations, 2 runs.
        #[arg(long)]
        smoke: bool,
        /// Output directory (default: the spec's output_dir, else out/<name>).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Suppress per-generation progress lines.
        #[arg(long)]
        quiet: bool,
    },
    /// Simulate one body and brain; print the fitness breakdown and the
    /// trajectory as CSV.
    Evaluate {
        /// Body document.
        body: PathBuf,
        /// Brain genome document.
        brain: PathBuf,
        #[arg(long, value_enum, default_value = "plain")]
        environment: EnvironmentArg,
        /// Terrain seed for the rough environment.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Evaluation time in seconds.
        #[arg(long, default_value_t = 30.0)]
        duration: f64,
    },
    /// Print the morphological descriptors of a body document.
    Descriptors {
        body: PathBuf,
        /// Emit JSON instead of CSV.
        #[arg(long)]
        json: bool,
    },
    /// Compare the final generations of two experiment output directories.
    Analyze {
        arm_a: PathBuf,
        arm_b: PathBuf,
        /// Rank-sum test on unpaired runs instead of the paired signed-rank test.
        #[arg(long)]
        unpaired: bool,
        /// Also write report and plot-data CSV files here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Parses `args` and runs the command; returns the process exit status.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => {
                    let _ = write!(stdout, "{text}");
                    if e.kind() == ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand {
                        1
                    } else {
                        0
                    }
                }
                _ => {
                    let _ = write!(stderr, "{text}");
                    1
                }
            };
        }
    };
    match execute(cli.command, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

fn out_err(e: std::io::Error) -> Error {
    Error::Internal(format!("writing output: {e}"))
}

fn workers(requested: Option<usize>) -> Result<usize, Error> {
    match requested {
        Some(0) => Err(Error::Usage("--workers must be at least 1".into())),
        Some(n) => Ok(n),
        None => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

pub fn execute(command: Command, stdout: &mut dyn Write) -> Result<(), Error> {
    match command {
        Command::Evolve {
            spec,
            seed,
            workers: w,
            resume,
            smoke,
            out,
            quiet,
        } => evolve(&spec, seed, workers(w)?, resume, smoke, out, quiet, stdout),
        Command::Evaluate {
            body,
            brain,
            environment,
            seed,
            duration,
        } => evaluate(&body, &brain, environment, seed, duration, stdout),
        Command::Descriptors { body, json } => descriptors(&body, json, stdout),
        Command::Analyze {
            arm_a,
            arm_b,
            unpaired,
            out,
        } => analyze(&arm_a, &arm_b, unpaired, out.as_deref(), stdout),
    }
}

#[allow(clippy::too_many_arguments)]
fn evolve(
    spec_path: &Path,
    seed: Option<u64>,
    workers: usize,
    resume: bool,
    smoke: bool,
    out: Option<PathBuf>,
    quiet: bool,
    stdout: &mut dyn Write,
) -> Result<(), Error> {
    let spec = ExperimentSpec::load(spec_path)?;
    let mut config = spec.config()?;
    if smoke {
        config = experiment::smoke(config);
    }
    if let Some(s) = seed {
        config.seed = s;
    }
    let out = out
        .or_else(|| spec.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out").join(&spec.name));
    let evaluator = ParallelEvaluator::new(workers)?;
    let total = config.generations;
    let mut failed_write = None;
    let statuses = archive::run_experiment(&spec.name, &config, &out, &evaluator, resume, &mut |run, rec| {
        if !quiet && failed_write.is_none() {
            if let Err(e) = writeln!(
                stdout,
                "run {run} gen {}/{total} mean {:.5} best {:.5} la {:.2} failures {}",
                rec.generation,
                rec.mean_fitness(),
                rec.best_fitness(),
                rec.mean_la_count(),
                rec.failures
            ) {
                failed_write = Some(e);
            }
        }
    })?;
    if let Some(e) = failed_write {
        return Err(out_err(e));
    }
    for (run, status) in statuses.iter().enumerate() {
        match status {
            RunStatus::Skipped => writeln!(stdout, "run {run} already complete").map_err(out_err)?,
            RunStatus::Resumed { from } => writeln!(stdout, "run {run} resumed from generation {from}").map_err(out_err)?,
            RunStatus::Completed => {}
        }
    }
    writeln!(stdout, "metrics digest {}", archive::metrics_digest(&out)?).map_err(out_err)?;
    writeln!(stdout, "output {}", out.display()).map_err(out_err)?;
    Ok(())
}

fn evaluate(
    body_path: &Path,
    brain_path: &Path,
    environment: EnvironmentArg,
    seed: u64,
    duration: f64,
    stdout: &mut dyn Write,
) -> Result<(), Error> {
    let body = documents::read::<BodyDocument>(body_path)?.into_body()?;
    let brain_genome = documents::read::<GenomeDocument>(brain_path)?.into_genome(GenomeRole::Brain)?;
    let env = match environment {
        EnvironmentArg::Plain => Environment::default(),
        EnvironmentArg::Rough => Environment::rough_default(seed),
    };
    let terrain = env.build()?;
    let sim = SimConfig {
        duration,
        ..SimConfig::default()
    };
    if let Some(field) = sim.invalid_field() {
        return Err(Error::Config(format!("--{field}")));
    }
    let brain = decode_brain(&brain_genome, &body, &DecodeLimits::default());
    match simulate(&body, &brain, &terrain, &sim, &CpgConfig::default()) {
        Ok(t) => {
            let b = evaluate_directed(&t, &FitnessParams::default()).map_err(|e| Error::Internal(e.to_string()))?;
            for line in breakdown_text(&b).lines() {
                writeln!(stdout, "# {line}").map_err(out_err)?;
            }
            write!(stdout, "{}", trajectory_csv(&t)).map_err(out_err)?;
        }
        Err(SimError::Unstable { time, speed }) => {
            for line in breakdown_text(&FitnessBreakdown::ZERO).lines() {
                writeln!(stdout, "# {line}").map_err(out_err)?;
            }
            writeln!(stdout, "# unstable at t = {time:.3} s (speed {speed:.1} m/s)").map_err(out_err)?;
        }
        Err(e) => return Err(Error::Invalid(e.to_string())),
    }
    Ok(())
}

fn descriptors(body_path: &Path, json: bool, stdout: &mut dyn Write) -> Result<(), Error> {
    let body = documents::read::<BodyDocument>(body_path)?.into_body()?;
    let d = descriptor_vector(&body).map_err(|e| Error::Invalid(e.to_string()))?;
    if json {
        write!(stdout, "{}", documents::to_canonical(&d)).map_err(out_err)?;
    } else {
        let values: Vec<String> = d.values().iter().map(|v| v.to_string()).collect();
        writeln!(stdout, "{}", DESCRIPTOR_NAMES.join(",")).map_err(out_err)?;
        writeln!(stdout, "{}", values.join(",")).map_err(out_err)?;
    }
    Ok(())
}

fn label(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn analyze(a: &Path, b: &Path, unpaired: bool, out: Option<&Path>, stdout: &mut dyn Write) -> Result<(), Error> {
    let arm_a = archive::load_arm(a)?;
    let arm_b = archive::load_arm(b)?;
    let mode = if unpaired { PairingMode::Unpaired } else { PairingMode::Paired };
    let (la, lb) = (label(a), label(b));
    let report = compare_final_generation(&arm_a, &arm_b, mode)?.with_labels(&la, &lb);
    write!(stdout, "{}", report.to_text()).map_err(out_err)?;
    if let Some(dir) = out {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let files = [
            ("comparison.txt", report.to_text()),
            ("comparison.csv", report.to_csv()),
            ("progression_a.csv", summarize_arm(&arm_a)?.to_csv()),
            ("progression_b.csv", summarize_arm(&arm_b)?.to_csv()),
            ("final_a.csv", final_means_csv(&arm_a)),
            ("final_b.csv", final_means_csv(&arm_b)),
        ];
        for (name, text) in files {
            let path = dir.join(name);
            std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        }
    }
    Ok(())
}
