//! Steady-state (mu + lambda) evolution with tournament selection.
//!
//! Each generation breeds `lambda` offspring. Every offspring has two
//! parents picked by independent tournaments; both genomes are crossed over
//! and then mutated. Survivors are `mu` sequential tournaments over the
//! combined pool, each winner leaving the pool. This is not elitist: the
//! best individual can be lost.
//!
//! All random draws for a generation happen serially before evaluation, so
//! how a [`BatchEvaluator`] schedules its work cannot change the outcome.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::controller::CpgConfig;
use crate::decoder::{body_registry, brain_registry, decode_brain, DecodeLimits, Individual, OUTPUT_ACTIVATION};
use crate::descriptors::{descriptor_vector, DescriptorVector};
use crate::fitness::{evaluate_directed, FitnessBreakdown, FitnessParams};
use crate::genome::{crossover, mutate, Cppn, InnovationRegistry, MutationParams};
use crate::rng::{restore, seeded, stream_position, RunRng};
use crate::simulation::{simulate, SimConfig};
use crate::terrain::{Environment, Heightmap, TerrainError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolutionConfig {
    pub mu: usize,
    pub lambda: usize,
    pub generations: usize,
    pub runs: usize,
    pub tournament_size: usize,
    pub seed: u64,
    pub environment: Environment,
    /// Generation-0 weights are uniform in `±initial_weight_range`.
    pub initial_weight_range: f64,
    pub body_mutation: MutationParams,
    pub brain_mutation: MutationParams,
    /// Also carries the linear-actuator switch.
    pub decode: DecodeLimits,
    pub cpg: CpgConfig,
    pub sim: SimConfig,
    pub fitness: FitnessParams,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        EvolutionConfig {
            mu: 100,
            lambda: 50,
            generations: 300,
            runs: 20,
            tournament_size: 2,
            seed: 0,
            environment: Environment::default(),
            initial_weight_range: 3.0,
            body_mutation: MutationParams::default(),
            brain_mutation: MutationParams::default(),
            decode: DecodeLimits::default(),
            cpg: CpgConfig::default(),
            sim: SimConfig::default(),
            fitness: FitnessParams::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvolutionError {
    #[error("invalid configuration field `{0}`")]
    Config(String),
    #[error(transparent)]
    Terrain(#[from] TerrainError),
    #[error("tournament over an empty pool")]
    EmptyPool,
    #[error("checkpoint does not match the configuration: {0}")]
    Checkpoint(String),
}

impl EvolutionConfig {
    pub fn linear_actuator_enabled(&self) -> bool {
        self.decode.linear_actuator_enabled
    }

    /// First invalid field as a dotted path, if any.
    pub fn invalid_field(&self) -> Option<String> {
        if self.lambda < 1 {
            return Some("lambda".into());
        }
        if self.mu < self.lambda {
            return Some("mu".into());
        }
        if self.runs < 1 {
            return Some("runs".into());
        }
        if self.tournament_size < 2 {
            return Some("tournament_size".into());
        }
        if !(self.initial_weight_range > 0.0) {
            return Some("initial_weight_range".into());
        }
        let nested = [
            ("body_mutation", self.body_mutation.invalid_field()),
            ("brain_mutation", self.brain_mutation.invalid_field()),
            ("decode", self.decode.invalid_field()),
            ("sim", self.sim.invalid_field()),
            ("fitness", self.fitness.invalid_field()),
        ];
        for (section, field) in nested {
            if let Some(f) = field {
                return Some(alloc::format!("{section}.{f}"));
            }
        }
        if !self.cpg.base_frequency.is_finite() || !self.cpg.gain.is_finite() || !self.cpg.coupling_scale.is_finite() {
            return Some("cpg".into());
        }
        None
    }

    pub fn validate(&self) -> Result<(), EvolutionError> {
        match self.invalid_field() {
            Some(f) => Err(EvolutionError::Config(f)),
            None => Ok(()),
        }
    }

    /// Seed of repetition `run`.
    pub fn run_seed(&self, run: usize) -> u64 {
        self.seed.wrapping_add(run as u64)
    }
}

/// Outcome of evaluating one individual.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub fitness: f64,
    pub breakdown: FitnessBreakdown,
    pub descriptors: DescriptorVector,
    pub la_count: usize,
    /// Why the fitness was forced to zero, if it was.
    pub diagnostic: Option<String>,
}

/// Simulates one individual; failures score zero with a diagnostic.
pub fn evaluate_individual(ind: &Individual, terrain: &Heightmap, config: &EvolutionConfig) -> Evaluation {
    let descriptors = descriptor_vector(&ind.body).expect("decoded bodies are valid");
    let brain = decode_brain(&ind.brain_genome, &ind.body, &config.decode);
    let outcome = simulate(&ind.body, &brain, terrain, &config.sim, &config.cpg)
        .map_err(|e| e.to_string())
        .and_then(|t| evaluate_directed(&t, &config.fitness).map_err(|e| e.to_string()));
    let (breakdown, diagnostic) = match outcome {
        Ok(b) if b.fitness.is_finite() => (b, None),
        Ok(_) => (FitnessBreakdown::ZERO, Some("non-finite fitness".to_string())),
        Err(e) => (FitnessBreakdown::ZERO, Some(e)),
    };
    Evaluation {
        fitness: breakdown.fitness,
        breakdown,
        descriptors,
        la_count: ind.linear_actuator_count(),
        diagnostic,
    }
}

/// Evaluates a batch; results must be in input order.
pub trait BatchEvaluator {
    fn evaluate_batch(&self, batch: &[Individual], terrain: &Heightmap, config: &EvolutionConfig) -> Vec<Evaluation>;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SerialEvaluator;

impl BatchEvaluator for SerialEvaluator {
    fn evaluate_batch(&self, batch: &[Individual], terrain: &Heightmap, config: &EvolutionConfig) -> Vec<Evaluation> {
        batch.iter().map(|i| evaluate_individual(i, terrain, config)).collect()
    }
}

/// Index of the tournament winner among `fitness`.
///
/// Draws `k` entrants uniformly with replacement; the highest fitness wins,
/// ties broken uniformly among the tied draws.
pub fn binary_tournament<R: Rng + ?Sized>(fitness: &[f64], k: usize, rng: &mut R) -> Result<usize, EvolutionError> {
    if fitness.is_empty() {
        return Err(EvolutionError::EmptyPool);
    }
    let mut best = rng.gen_range(0..fitness.len());
    let mut ties = 1u32;
    for _ in 1..k {
        let c = rng.gen_range(0..fitness.len());
        if fitness[c] > fitness[best] {
            best = c;
            ties = 1;
        } else if fitness[c] == fitness[best] {
            // Reservoir choice keeps each tied draw equally likely.
            ties += 1;
            if rng.gen_range(0..ties) == 0 {
                best = c;
            }
        }
    }
    Ok(best)
}

/// An evaluated population member.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Member {
    pub individual: Individual,
    pub evaluation: Evaluation,
}

/// Per-individual row of a generation record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordEntry {
    pub id: u64,
    pub fitness: f64,
    pub descriptors: DescriptorVector,
    pub la_count: usize,
    pub breakdown: FitnessBreakdown,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationRecord {
    pub generation: usize,
    /// Population after survivor selection, in population order.
    pub entries: Vec<RecordEntry>,
    /// Fittest member; lowest id on ties.
    pub best: Individual,
    /// Offspring evaluated this generation (0 for generation 0).
    pub offspring: usize,
    /// Evaluations that ended in a diagnostic.
    pub failures: usize,
}

impl GenerationRecord {
    pub fn mean_fitness(&self) -> f64 {
        self.entries.iter().map(|e| e.fitness).sum::<f64>() / self.entries.len() as f64
    }

    pub fn best_fitness(&self) -> f64 {
        self.entries.iter().map(|e| e.fitness).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn mean_la_count(&self) -> f64 {
        self.entries.iter().map(|e| e.la_count as f64).sum::<f64>() / self.entries.len() as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunArchive {
    pub seed: u64,
    pub config: EvolutionConfig,
    pub generations: Vec<GenerationRecord>,
}

impl RunArchive {
    pub fn final_generation(&self) -> Option<&GenerationRecord> {
        self.generations.last()
    }
}

/// Everything needed to continue a run after the last completed generation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolutionState {
    pub seed: u64,
    pub generation: usize,
    pub rng_word_pos: u128,
    pub next_id: u64,
    pub body_registry: InnovationRegistry,
    pub brain_registry: InnovationRegistry,
    pub population: Vec<Member>,
}

/// A single evolutionary run, advanced one generation at a time.
#[derive(Debug, Clone)]
pub struct Evolution {
    config: EvolutionConfig,
    terrain: Heightmap,
    seed: u64,
    rng: RunRng,
    body_registry: InnovationRegistry,
    brain_registry: InnovationRegistry,
    next_id: u64,
    generation: usize,
    population: Vec<Member>,
}

fn record(generation: usize, population: &[Member], offspring: usize, failures: usize) -> GenerationRecord {
    let mut best = &population[0];
    for m in population {
        let (f, b) = (m.evaluation.fitness, best.evaluation.fitness);
        if f > b || (f == b && m.individual.id < best.individual.id) {
            best = m;
        }
    }
    GenerationRecord {
        generation,
        entries: population
            .iter()
            .map(|m| RecordEntry {
                id: m.individual.id,
                fitness: m.evaluation.fitness,
                descriptors: m.evaluation.descriptors,
                la_count: m.evaluation.la_count,
                breakdown: m.evaluation.breakdown,
            })
            .collect(),
        best: best.individual.clone(),
        offspring,
        failures,
    }
}

fn attach(individuals: Vec<Individual>, evaluations: Vec<Evaluation>) -> Vec<Member> {
    assert_eq!(individuals.len(), evaluations.len(), "evaluator dropped results");
    individuals
        .into_iter()
        .zip(evaluations)
        .map(|(mut individual, evaluation)| {
            individual.fitness = Some(evaluation.fitness);
            individual.descriptors = Some(evaluation.descriptors);
            Member { individual, evaluation }
        })
        .collect()
}

impl Evolution {
    /// Creates and evaluates generation 0 for the given run seed.
    pub fn start<E: BatchEvaluator + ?Sized>(
        config: &EvolutionConfig,
        seed: u64,
        evaluator: &E,
    ) -> Result<(Self, GenerationRecord), EvolutionError> {
        config.validate()?;
        let terrain = config.environment.build()?;
        let mut rng = seeded(seed);
        let mut body_reg = body_registry();
        let mut brain_reg = brain_registry();
        let individuals: Vec<Individual> = (0..config.mu as u64)
            .map(|id| {
                let body = Cppn::minimal(&mut body_reg, OUTPUT_ACTIVATION, config.initial_weight_range, &mut rng);
                let brain = Cppn::minimal(&mut brain_reg, OUTPUT_ACTIVATION, config.initial_weight_range, &mut rng);
                Individual::new(id, body, brain, &config.decode)
            })
            .collect();
        let evaluations = evaluator.evaluate_batch(&individuals, &terrain, config);
        let failures = evaluations.iter().filter(|e| e.diagnostic.is_some()).count();
        let population = attach(individuals, evaluations);
        let rec = record(0, &population, 0, failures);
        Ok((
            Evolution {
                config: config.clone(),
                terrain,
                seed,
                rng,
                body_registry: body_reg,
                brain_registry: brain_reg,
                next_id: config.mu as u64,
                generation: 0,
                population,
            },
            rec,
        ))
    }

    /// Rebuilds a run from a checkpoint.
    pub fn restore(config: &EvolutionConfig, state: EvolutionState) -> Result<Self, EvolutionError> {
        config.validate()?;
        if state.population.len() != config.mu {
            return Err(EvolutionError::Checkpoint(alloc::format!(
                "population has {} members, expected {}",
                state.population.len(),
                config.mu
            )));
        }
        let terrain = config.environment.build()?;
        let population = state
            .population
            .into_iter()
            .map(|m| {
                let mut individual =
                    Individual::new(m.individual.id, m.individual.body_genome, m.individual.brain_genome, &config.decode);
                individual.fitness = Some(m.evaluation.fitness);
                individual.descriptors = Some(m.evaluation.descriptors);
                Member {
                    individual,
                    evaluation: m.evaluation,
                }
            })
            .collect();
        Ok(Evolution {
            config: config.clone(),
            terrain,
            seed: state.seed,
            rng: restore(state.seed, state.rng_word_pos),
            body_registry: state.body_registry,
            brain_registry: state.brain_registry,
            next_id: state.next_id,
            generation: state.generation,
            population,
        })
    }

    pub fn snapshot(&self) -> EvolutionState {
        EvolutionState {
            seed: self.seed,
            generation: self.generation,
            rng_word_pos: stream_position(&self.rng),
            next_id: self.next_id,
            body_registry: self.body_registry.clone(),
            brain_registry: self.brain_registry.clone(),
            population: self.population.clone(),
        }
    }

    pub fn generation(&self) -> usize {
        self.generation
    }

    pub fn population(&self) -> &[Member] {
        &self.population
    }

    pub fn terrain(&self) -> &Heightmap {
        &self.terrain
    }

    pub fn is_finished(&self) -> bool {
        self.generation >= self.config.generations
    }

    fn breed(&mut self) -> Vec<Individual> {
        let fitness: Vec<f64> = self.population.iter().map(|m| m.evaluation.fitness).collect();
        let k = self.config.tournament_size;
        let mut offspring = Vec::with_capacity(self.config.lambda);
        for _ in 0..self.config.lambda {
            let a = &self.population[binary_tournament(&fitness, k, &mut self.rng).expect("population is non-empty")];
            let b = &self.population[binary_tournament(&fitness, k, &mut self.rng).expect("population is non-empty")];
            let (fa, fb) = (a.evaluation.fitness, b.evaluation.fitness);
            let body = crossover(&a.individual.body_genome, &b.individual.body_genome, fa, fb, &mut self.rng);
            let brain = crossover(&a.individual.brain_genome, &b.individual.brain_genome, fa, fb, &mut self.rng);
            let body = mutate(&body, &self.config.body_mutation, &mut self.body_registry, &mut self.rng).0;
            let brain = mutate(&brain, &self.config.brain_mutation, &mut self.brain_registry, &mut self.rng).0;
            offspring.push(Individual::new(self.next_id, body, brain, &self.config.decode));
            self.next_id += 1;
        }
        offspring
    }

    fn select_survivors(&mut self, mut pool: Vec<Member>) -> Vec<Member> {
        let mut survivors = Vec::with_capacity(self.config.mu);
        let mut fitness: Vec<f64> = pool.iter().map(|m| m.evaluation.fitness).collect();
        for _ in 0..self.config.mu {
            let w = binary_tournament(&fitness, self.config.tournament_size, &mut self.rng).expect("pool >= mu");
            fitness.remove(w);
            survivors.push(pool.remove(w));
        }
        survivors
    }

    /// Breeds, evaluates and selects one generation.
    pub fn step<E: BatchEvaluator + ?Sized>(&mut self, evaluator: &E) -> GenerationRecord {
        let offspring = self.breed();
        let evaluations = evaluator.evaluate_batch(&offspring, &self.terrain, &self.config);
        let failures = evaluations.iter().filter(|e| e.diagnostic.is_some()).count();
        let count = offspring.len();
        let mut pool = core::mem::take(&mut self.population);
        pool.extend(attach(offspring, evaluations));
        self.population = self.select_survivors(pool);
        self.generation += 1;
        record(self.generation, &self.population, count, failures)
    }
}

/// Runs one complete evolution with the given seed.
pub fn evolve_with<E: BatchEvaluator + ?Sized>(
    config: &EvolutionConfig,
    seed: u64,
    evaluator: &E,
) -> Result<RunArchive, EvolutionError> {
    let (mut evo, first) = Evolution::start(config, seed, evaluator)?;
    let mut generations = alloc::vec![first];
    while !evo.is_finished() {
        generations.push(evo.step(evaluator));
    }
    Ok(RunArchive {
        seed,
        config: config.clone(),
        generations,
    })
}

/// Runs one evolution with the configured seed on the calling thread.
pub fn evolve(config: &EvolutionConfig) -> Result<RunArchive, EvolutionError> {
    evolve_with(config, config.seed, &SerialEvaluator)
}

/// Independent repetitions with seeds `seed + i`.
pub fn run_experiment<E: BatchEvaluator + ?Sized>(
    config: &EvolutionConfig,
    repetitions: usize,
    evaluator: &E,
) -> Result<Vec<RunArchive>, EvolutionError> {
    if repetitions < 1 {
        return Err(EvolutionError::Config("runs".into()));
    }
    (0..repetitions).map(|i| evolve_with(config, config.run_seed(i), evaluator)).collect()
}
