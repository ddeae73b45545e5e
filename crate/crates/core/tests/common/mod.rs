#![allow(dead_code)]

use morphevo_core::decoder::{body_registry, brain_registry, decode_brain, BrainSpec, DecodeLimits, Individual, OUTPUT_ACTIVATION};
use morphevo_core::genome::{mutate, Cppn, InnovationRegistry, MutationParams};
use morphevo_core::rng::{seeded, RunRng};

pub struct Breeder {
    pub rng: RunRng,
    pub body: InnovationRegistry,
    pub brain: InnovationRegistry,
    pub limits: DecodeLimits,
    next_id: u64,
}

impl Breeder {
    pub fn new(seed: u64) -> Self {
        Breeder {
            rng: seeded(seed),
            body: body_registry(),
            brain: brain_registry(),
            limits: DecodeLimits::default(),
            next_id: 0,
        }
    }

    /// A minimal genome pair pushed through `rounds` default mutations.
    pub fn individual(&mut self, rounds: usize) -> (Individual, BrainSpec) {
        let params = MutationParams::default();
        let mut b = Cppn::minimal(&mut self.body, OUTPUT_ACTIVATION, 3.0, &mut self.rng);
        let mut n = Cppn::minimal(&mut self.brain, OUTPUT_ACTIVATION, 3.0, &mut self.rng);
        for _ in 0..rounds {
            b = mutate(&b, &params, &mut self.body, &mut self.rng).0;
            n = mutate(&n, &params, &mut self.brain, &mut self.rng).0;
        }
        let ind = Individual::new(self.next_id, b, n, &self.limits);
        self.next_id += 1;
        let brain = decode_brain(&ind.brain_genome, &ind.body, &self.limits);
        (ind, brain)
    }
}
