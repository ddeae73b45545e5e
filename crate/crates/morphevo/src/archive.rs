//! On-disk run archives.
//!
//! ```text
//! <out>/runs/run_00/config.snapshot
//!                   checkpoint.json      latest completed generation
//!                   done                 present once the run finished
//!                   gen_0/population.json
//!                         metrics.csv
//!                         fitness.csv
//!                         best.json best_body.json best_brain.json
//! ```
//!
//! Generation directories are written under a `.partial` name and renamed
//! when complete; the checkpoint is replaced the same way. Nothing written
//! depends on wall-clock time or the number of workers.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use morphevo_core::analysis::{MetricRow, RunSeries};
use morphevo_core::descriptors::{DescriptorVector, DESCRIPTOR_NAMES};
use morphevo_core::evolution::{
    BatchEvaluator, Evolution, EvolutionConfig, EvolutionState, GenerationRecord, Member,
};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::documents::{self, BodyDocument, GenomeDocument, GenomeRole, IndividualDocument, FORMAT_VERSION};
use crate::Error;

const PARTIAL: &str = ".partial";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigSnapshot {
    pub format_version: u32,
    pub name: String,
    pub run: usize,
    pub seed: u64,
    pub config: EvolutionConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PopulationDocument {
    pub format_version: u32,
    pub generation: usize,
    pub individuals: Vec<IndividualDocument>,
}

pub fn run_dir(out: &Path, run: usize) -> PathBuf {
    out.join("runs").join(format!("run_{run:02}"))
}

pub fn generation_dir(run_dir: &Path, generation: usize) -> PathBuf {
    run_dir.join(format!("gen_{generation}"))
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> Error + '_ {
    move |e| Error::io(path, e)
}

fn metrics_csv(record: &GenerationRecord) -> Result<Vec<u8>, Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["id", "fitness"];
    header.extend(DESCRIPTOR_NAMES);
    header.push("la_count");
    w.write_record(&header).map_err(csv_err)?;
    for e in &record.entries {
        let mut row = vec![e.id.to_string(), e.fitness.to_string()];
        row.extend(e.descriptors.values().iter().map(|v| v.to_string()));
        row.push(e.la_count.to_string());
        w.write_record(&row).map_err(csv_err)?;
    }
    w.into_inner().map_err(|e| Error::Internal(e.to_string()))
}

fn fitness_csv(record: &GenerationRecord) -> Result<Vec<u8>, Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["id", "fitness", "distProjection", "lengthTraj", "delta", "penalty"])
        .map_err(csv_err)?;
    for e in &record.entries {
        let b = &e.breakdown;
        w.write_record([
            e.id.to_string(),
            e.fitness.to_string(),
            b.dist_projection.to_string(),
            b.length_traj.to_string(),
            b.delta.to_string(),
            b.penalty.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.into_inner().map_err(|e| Error::Internal(e.to_string()))
}

fn csv_err(e: csv::Error) -> Error {
    Error::Parse(format!("csv: {e}"))
}

fn compact<T: Serialize>(value: &T) -> Vec<u8> {
    let mut v = serde_json::to_vec(value).expect("documents serialize");
    v.push(b'\n');
    v
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), Error> {
    fs::write(path, bytes).map_err(io_err(path))
}

/// Writes one generation directory atomically.
pub fn write_generation(run_dir: &Path, record: &GenerationRecord, population: &[Member]) -> Result<(), Error> {
    let target = generation_dir(run_dir, record.generation);
    let tmp = PathBuf::from(format!("{}{PARTIAL}", target.display()));
    if tmp.exists() {
        fs::remove_dir_all(&tmp).map_err(io_err(&tmp))?;
    }
    fs::create_dir_all(&tmp).map_err(io_err(&tmp))?;
    let doc = PopulationDocument {
        format_version: FORMAT_VERSION,
        generation: record.generation,
        individuals: population.iter().map(|m| IndividualDocument::new(&m.individual)).collect(),
    };
    write_file(&tmp.join("population.json"), &compact(&doc))?;
    write_file(&tmp.join("metrics.csv"), &metrics_csv(record)?)?;
    write_file(&tmp.join("fitness.csv"), &fitness_csv(record)?)?;
    let best = &record.best;
    documents::write(&tmp.join("best.json"), &IndividualDocument::new(best))?;
    documents::write(&tmp.join("best_body.json"), &BodyDocument::new(&best.body))?;
    documents::write(&tmp.join("best_brain.json"), &GenomeDocument::new(GenomeRole::Brain, &best.brain_genome))?;
    if target.exists() {
        fs::remove_dir_all(&target).map_err(io_err(&target))?;
    }
    fs::rename(&tmp, &target).map_err(io_err(&target))
}

pub fn write_checkpoint(run_dir: &Path, state: &EvolutionState) -> Result<(), Error> {
    let path = run_dir.join("checkpoint.json");
    let tmp = run_dir.join(format!("checkpoint.json{PARTIAL}"));
    write_file(&tmp, &compact(state))?;
    fs::rename(&tmp, &path).map_err(io_err(&path))
}

pub fn read_checkpoint(run_dir: &Path) -> Result<EvolutionState, Error> {
    let path = run_dir.join("checkpoint.json");
    let text = fs::read_to_string(&path).map_err(io_err(&path))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

/// Numbered children `<prefix><n>` of `dir`, sorted by number.
fn numbered(dir: &Path, prefix: &str) -> Result<Vec<(usize, PathBuf)>, Error> {
    let mut out = Vec::new();
    let entries = match fs::read_dir(dir) {
        Ok(e) => e,
        Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(out),
        Err(e) => return Err(Error::io(dir, e)),
    };
    for entry in entries {
        let entry = entry.map_err(io_err(dir))?;
        let name = entry.file_name().to_string_lossy().into_owned();
        if let Some(n) = name.strip_prefix(prefix).and_then(|s| s.parse::<usize>().ok()) {
            out.push((n, entry.path()));
        }
    }
    out.sort();
    Ok(out)
}

/// Progress callback: `(run, record)` after each generation is on disk.
pub type Progress<'a> = dyn FnMut(usize, &GenerationRecord) + 'a;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunStatus {
    Completed,
    Resumed { from: usize },
    Skipped,
}

/// Runs (or resumes) every repetition of an experiment into `out`.
pub fn run_experiment<E: BatchEvaluator + ?Sized>(
    name: &str,
    config: &EvolutionConfig,
    out: &Path,
    evaluator: &E,
    resume: bool,
    progress: &mut Progress<'_>,
) -> Result<Vec<RunStatus>, Error> {
    config.validate()?;
    if !resume && out.join("runs").exists() {
        return Err(Error::Usage(format!(
            "{} already holds runs; pass --resume to continue it",
            out.display()
        )));
    }
    (0..config.runs)
        .map(|run| run_one(name, config, out, run, evaluator, resume, progress))
        .collect()
}

fn run_one<E: BatchEvaluator + ?Sized>(
    name: &str,
    config: &EvolutionConfig,
    out: &Path,
    run: usize,
    evaluator: &E,
    resume: bool,
    progress: &mut Progress<'_>,
) -> Result<RunStatus, Error> {
    let dir = run_dir(out, run);
    let snapshot = ConfigSnapshot {
        format_version: FORMAT_VERSION,
        name: name.to_string(),
        run,
        seed: config.run_seed(run),
        config: config.clone(),
    };
    let snapshot_path = dir.join("config.snapshot");
    let checkpoint_path = dir.join("checkpoint.json");

    let (mut evo, status) = if resume && checkpoint_path.exists() {
        let previous: ConfigSnapshot = documents::read(&snapshot_path)?;
        if previous != snapshot {
            return Err(Error::Usage(format!(
                "{} was produced with a different configuration",
                dir.display()
            )));
        }
        if dir.join("done").exists() {
            return Ok(RunStatus::Skipped);
        }
        let state = read_checkpoint(&dir)?;
        let from = state.generation;
        // Anything past the checkpoint is regenerated identically.
        for (g, path) in numbered(&dir, "gen_")? {
            if g > from {
                fs::remove_dir_all(&path).map_err(io_err(&path))?;
            }
        }
        (Evolution::restore(config, state)?, RunStatus::Resumed { from })
    } else {
        if dir.exists() {
            fs::remove_dir_all(&dir).map_err(io_err(&dir))?;
        }
        fs::create_dir_all(&dir).map_err(io_err(&dir))?;
        documents::write(&snapshot_path, &snapshot)?;
        let (evo, record) = Evolution::start(config, snapshot.seed, evaluator)?;
        persist(&dir, &evo, &record)?;
        progress(run, &record);
        (evo, RunStatus::Completed)
    };

    while !evo.is_finished() {
        let record = evo.step(evaluator);
        persist(&dir, &evo, &record)?;
        progress(run, &record);
    }
    write_file(&dir.join("done"), b"")?;
    Ok(status)
}

fn persist(dir: &Path, evo: &Evolution, record: &GenerationRecord) -> Result<(), Error> {
    let wrap = |e: Error| Error::Checkpoint {
        generation: record.generation,
        source: Box::new(e),
    };
    write_generation(dir, record, evo.population()).map_err(wrap)?;
    write_checkpoint(dir, &evo.snapshot()).map_err(wrap)
}

fn parse_metrics(path: &Path) -> Result<Vec<MetricRow>, Error> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    let bad = |what: &str| Error::Parse(format!("{}: bad {what}", path.display()));
    let mut rows = Vec::new();
    for record in reader.records() {
        let r = record.map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        if r.len() != 11 {
            return Err(bad("column count"));
        }
        let f = |i: usize| r[i].parse::<f64>().map_err(|_| bad(&format!("number `{}`", &r[i])));
        rows.push(MetricRow {
            id: r[0].parse().map_err(|_| bad("id"))?,
            fitness: f(1)?,
            descriptors: DescriptorVector {
                branching: f(2)?,
                coverage: f(3)?,
                rel_joints: f(4)?,
                rel_limbs: f(5)?,
                rel_limb_length: f(6)?,
                proportion: f(7)?,
                absolute_size: r[8].parse().map_err(|_| bad("absolute_size"))?,
                symmetry: f(9)?,
            },
            la_count: r[10].parse().map_err(|_| bad("la_count"))?,
        });
    }
    Ok(rows)
}

/// Metrics of every finished run under `out`, in run order.
pub fn load_arm(out: &Path) -> Result<Vec<RunSeries>, Error> {
    let mut arm = Vec::new();
    for (_, dir) in numbered(&out.join("runs"), "run_")? {
        if !dir.join("done").exists() {
            continue;
        }
        let mut series = RunSeries::default();
        for (_, gen) in numbered(&dir, "gen_")? {
            series.generations.push(parse_metrics(&gen.join("metrics.csv"))?);
        }
        arm.push(series);
    }
    if arm.is_empty() {
        return Err(Error::Usage(format!("no finished runs under {}", out.display())));
    }
    Ok(arm)
}

fn all_files(root: &Path, dir: &Path, out: &mut Vec<PathBuf>) -> Result<(), Error> {
    for entry in fs::read_dir(dir).map_err(io_err(dir))? {
        let path = entry.map_err(io_err(dir))?.path();
        if path.is_dir() {
            all_files(root, &path, out)?;
        } else {
            out.push(path.strip_prefix(root).expect("under root").to_path_buf());
        }
    }
    Ok(())
}

fn digest_files(root: &Path, files: &[PathBuf]) -> Result<String, Error> {
    let mut h = Sha256::new();
    for rel in files {
        let bytes = fs::read(root.join(rel)).map_err(io_err(rel))?;
        h.update(rel.to_string_lossy().replace('\\', "/").as_bytes());
        h.update([0]);
        h.update((bytes.len() as u64).to_le_bytes());
        h.update(&bytes);
    }
    Ok(format!("{:x}", h.finalize()))
}

/// SHA-256 over every file below `root`, keyed by relative path.
pub fn tree_digest(root: &Path) -> Result<String, Error> {
    let mut files = Vec::new();
    all_files(root, root, &mut files)?;
    files.sort();
    digest_files(root, &files)
}

/// SHA-256 over every `metrics.csv` below `root`.
pub fn metrics_digest(root: &Path) -> Result<String, Error> {
    let mut files = Vec::new();
    all_files(root, root, &mut files)?;
    files.retain(|f| f.file_name().is_some_and(|n| n == "metrics.csv"));
    files.sort();
    digest_files(root, &files)
}
