//! CPPN genotypes with NEAT historical markings.
//!
//! Genomes are feed-forward: the enabled connections always form a DAG and
//! are evaluated in topological order. Innovation numbers come from an
//! [`InnovationRegistry`] shared by every genome of one role (body or brain)
//! within a run, so identical structural mutations line up during crossover.

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::rng::{gaussian, uniform};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Innovation(pub u64);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Identity,
    Sigmoid,
    Sine,
    Gaussian,
    Tanh,
}

impl Activation {
    pub const PALETTE: [Activation; 5] = [
        Activation::Identity,
        Activation::Sigmoid,
        Activation::Sine,
        Activation::Gaussian,
        Activation::Tanh,
    ];

    pub fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Identity => x,
            Activation::Sigmoid => 1.0 / (1.0 + libm::exp(-x)),
            Activation::Sine => libm::sin(x),
            Activation::Gaussian => libm::exp(-x * x),
            Activation::Tanh => libm::tanh(x),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeRole {
    Input,
    Output,
    Hidden,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeGene {
    pub id: NodeId,
    pub role: NodeRole,
    pub activation: Activation,
    /// Added to the weighted input sum; ignored on input nodes.
    pub bias: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConnectionGene {
    pub innovation: Innovation,
    pub from: NodeId,
    pub to: NodeId,
    pub weight: f64,
    pub enabled: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GenomeError {
    #[error("expected {expected} inputs, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("connection {0:?} references an unknown node")]
    UnknownNode(Innovation),
    #[error("innovation ids are not strictly increasing at {0:?}")]
    InnovationOrder(Innovation),
    #[error("enabled connections contain a cycle")]
    Cycle,
    #[error("connection {0:?} targets an input node")]
    IntoInput(Innovation),
    #[error("node ids are not strictly increasing at {0:?}")]
    NodeOrder(NodeId),
    #[error("genome has {found} {what} nodes, header says {declared}")]
    IoCount {
        what: &'static str,
        found: usize,
        declared: usize,
    },
}

/// A compositional pattern producing network.
///
/// Node ids `0..input_count` are inputs, the next `output_count` ids are
/// outputs, and hidden nodes follow. `nodes` is sorted by id and
/// `connections` by innovation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Cppn {
    pub input_count: usize,
    pub output_count: usize,
    pub nodes: Vec<NodeGene>,
    pub connections: Vec<ConnectionGene>,
}

impl Cppn {
    /// Inputs and outputs only, no connections. Output biases start at zero.
    pub fn bare(input_count: usize, output_count: usize, output_activation: Activation) -> Self {
        let mut nodes = Vec::with_capacity(input_count + output_count);
        for i in 0..input_count {
            nodes.push(NodeGene {
                id: NodeId(i as u32),
                role: NodeRole::Input,
                activation: Activation::Identity,
                bias: 0.0,
            });
        }
        for o in 0..output_count {
            nodes.push(NodeGene {
                id: NodeId((input_count + o) as u32),
                role: NodeRole::Output,
                activation: output_activation,
                bias: 0.0,
            });
        }
        Cppn {
            input_count,
            output_count,
            nodes,
            connections: Vec::new(),
        }
    }

    /// Every input wired to every output with uniform random weights in
    /// `±weight_range` and output biases uniform in `±1`.
    pub fn minimal<R: Rng + ?Sized>(
        registry: &mut InnovationRegistry,
        output_activation: Activation,
        weight_range: f64,
        rng: &mut R,
    ) -> Self {
        let mut g = Cppn::bare(registry.input_count, registry.output_count, output_activation);
        for n in g.nodes.iter_mut().filter(|n| n.role == NodeRole::Output) {
            n.bias = uniform(rng, 1.0);
        }
        for i in 0..registry.input_count {
            for o in 0..registry.output_count {
                let from = NodeId(i as u32);
                let to = NodeId((registry.input_count + o) as u32);
                let innovation = registry.connection(from, to);
                g.connections.push(ConnectionGene {
                    innovation,
                    from,
                    to,
                    weight: uniform(rng, weight_range),
                    enabled: true,
                });
            }
        }
        g.connections.sort_by_key(|c| c.innovation);
        g
    }

    pub fn input_id(&self, i: usize) -> NodeId {
        NodeId(i as u32)
    }

    pub fn output_id(&self, o: usize) -> NodeId {
        NodeId((self.input_count + o) as u32)
    }

    pub fn node(&self, id: NodeId) -> Option<&NodeGene> {
        self.nodes
            .binary_search_by_key(&id, |n| n.id)
            .ok()
            .map(|i| &self.nodes[i])
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn connection_count(&self) -> usize {
        self.connections.len()
    }

    pub fn has_edge(&self, from: NodeId, to: NodeId) -> bool {
        self.connections.iter().any(|c| c.from == from && c.to == to)
    }

    /// Checks id ordering, references and acyclicity.
    pub fn check(&self) -> Result<(), GenomeError> {
        let inputs = self.nodes.iter().filter(|n| n.role == NodeRole::Input).count();
        let outputs = self.nodes.iter().filter(|n| n.role == NodeRole::Output).count();
        if inputs != self.input_count {
            return Err(GenomeError::IoCount {
                what: "input",
                found: inputs,
                declared: self.input_count,
            });
        }
        if outputs != self.output_count {
            return Err(GenomeError::IoCount {
                what: "output",
                found: outputs,
                declared: self.output_count,
            });
        }
        for w in self.nodes.windows(2) {
            if w[1].id <= w[0].id {
                return Err(GenomeError::NodeOrder(w[1].id));
            }
        }
        for w in self.connections.windows(2) {
            if w[1].innovation <= w[0].innovation {
                return Err(GenomeError::InnovationOrder(w[1].innovation));
            }
        }
        for c in &self.connections {
            let (Some(_), Some(to)) = (self.node(c.from), self.node(c.to)) else {
                return Err(GenomeError::UnknownNode(c.innovation));
            };
            if to.role == NodeRole::Input {
                return Err(GenomeError::IntoInput(c.innovation));
            }
        }
        self.topological_order().map(|_| ())
    }

    /// Node indices in a topological order of the enabled-edge graph,
    /// ties broken by node id.
    fn topological_order(&self) -> Result<Vec<usize>, GenomeError> {
        let n = self.nodes.len();
        let index: BTreeMap<NodeId, usize> = self.nodes.iter().enumerate().map(|(i, g)| (g.id, i)).collect();
        let mut indegree = alloc::vec![0usize; n];
        let mut out: Vec<Vec<usize>> = alloc::vec![Vec::new(); n];
        for c in self.connections.iter().filter(|c| c.enabled) {
            let (Some(&f), Some(&t)) = (index.get(&c.from), index.get(&c.to)) else {
                return Err(GenomeError::UnknownNode(c.innovation));
            };
            out[f].push(t);
            indegree[t] += 1;
        }
        let mut ready: BTreeSet<usize> = (0..n).filter(|&i| indegree[i] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(i) = ready.pop_first() {
            order.push(i);
            for &t in &out[i] {
                indegree[t] -= 1;
                if indegree[t] == 0 {
                    ready.insert(t);
                }
            }
        }
        if order.len() != n {
            return Err(GenomeError::Cycle);
        }
        Ok(order)
    }

    /// True if an enabled path leads from `from` to `to`.
    fn reaches(&self, from: NodeId, to: NodeId) -> bool {
        if from == to {
            return true;
        }
        let mut seen = BTreeSet::new();
        let mut queue = VecDeque::from([from]);
        while let Some(n) = queue.pop_front() {
            for c in self.connections.iter().filter(|c| c.enabled && c.from == n) {
                if c.to == to {
                    return true;
                }
                if seen.insert(c.to) {
                    queue.push_back(c.to);
                }
            }
        }
        false
    }

    /// Compiles the genome for repeated evaluation.
    pub fn compile(&self) -> Result<CompiledCppn, GenomeError> {
        let order = self.topological_order()?;
        let index: BTreeMap<NodeId, usize> = self.nodes.iter().enumerate().map(|(i, g)| (g.id, i)).collect();
        let mut incoming: Vec<Vec<(usize, f64)>> = alloc::vec![Vec::new(); self.nodes.len()];
        for c in self.connections.iter().filter(|c| c.enabled) {
            incoming[index[&c.to]].push((index[&c.from], c.weight));
        }
        let steps = order
            .into_iter()
            .filter(|&i| self.nodes[i].role != NodeRole::Input)
            .map(|i| EvalStep {
                node: i,
                activation: self.nodes[i].activation,
                bias: self.nodes[i].bias,
                incoming: core::mem::take(&mut incoming[i]),
            })
            .collect();
        Ok(CompiledCppn {
            input_count: self.input_count,
            node_count: self.nodes.len(),
            outputs: (0..self.output_count).map(|o| index[&self.output_id(o)]).collect(),
            steps,
        })
    }

    /// One-shot evaluation. Prefer [`Cppn::compile`] in loops.
    pub fn evaluate(&self, inputs: &[f64]) -> Result<Vec<f64>, GenomeError> {
        self.compile()?.evaluate(inputs)
    }

    /// Splits the enabled connection `innovation` with a new hidden node.
    ///
    /// The old connection is disabled; the incoming half gets weight 1 and
    /// the outgoing half inherits the old weight. Returns the new node id, or
    /// `None` if the connection is missing/disabled or the registry's node
    /// for this split already exists in the genome.
    pub fn add_node<R: Rng + ?Sized>(
        &mut self,
        innovation: Innovation,
        registry: &mut InnovationRegistry,
        rng: &mut R,
    ) -> Option<NodeId> {
        let pos = self
            .connections
            .iter()
            .position(|c| c.innovation == innovation && c.enabled)?;
        let (from, to, weight) = {
            let c = &self.connections[pos];
            (c.from, c.to, c.weight)
        };
        let split = registry.split(innovation, from, to, rng);
        if self.node(split.node).is_some() {
            return None;
        }
        self.connections[pos].enabled = false;
        let at = self.nodes.partition_point(|n| n.id < split.node);
        self.nodes.insert(
            at,
            NodeGene {
                id: split.node,
                role: NodeRole::Hidden,
                activation: split.activation,
                bias: 0.0,
            },
        );
        self.push_connection(split.incoming, from, split.node, 1.0);
        self.push_connection(split.outgoing, split.node, to, weight);
        Some(split.node)
    }

    /// Adds `from -> to` unless it already exists, targets an input, leaves
    /// an output, or would close a cycle.
    pub fn add_connection(
        &mut self,
        from: NodeId,
        to: NodeId,
        weight: f64,
        registry: &mut InnovationRegistry,
    ) -> Result<Innovation, AddConnectionRejected> {
        let (Some(f), Some(t)) = (self.node(from), self.node(to)) else {
            return Err(AddConnectionRejected::Invalid);
        };
        if t.role == NodeRole::Input || f.role == NodeRole::Output {
            return Err(AddConnectionRejected::Invalid);
        }
        if self.has_edge(from, to) {
            return Err(AddConnectionRejected::Exists);
        }
        if self.reaches(to, from) {
            return Err(AddConnectionRejected::Cycle);
        }
        let innovation = registry.connection(from, to);
        self.push_connection(innovation, from, to, weight);
        Ok(innovation)
    }

    fn push_connection(&mut self, innovation: Innovation, from: NodeId, to: NodeId, weight: f64) {
        let at = self.connections.partition_point(|c| c.innovation < innovation);
        self.connections.insert(
            at,
            ConnectionGene {
                innovation,
                from,
                to,
                weight,
                enabled: true,
            },
        );
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AddConnectionRejected {
    Invalid,
    Exists,
    Cycle,
}

#[derive(Debug, Clone)]
struct EvalStep {
    node: usize,
    activation: Activation,
    bias: f64,
    incoming: Vec<(usize, f64)>,
}

/// A genome flattened into an evaluation schedule.
#[derive(Debug, Clone)]
pub struct CompiledCppn {
    input_count: usize,
    node_count: usize,
    outputs: Vec<usize>,
    steps: Vec<EvalStep>,
}

impl CompiledCppn {
    pub fn evaluate(&self, inputs: &[f64]) -> Result<Vec<f64>, GenomeError> {
        let mut out = alloc::vec![0.0; self.outputs.len()];
        self.evaluate_into(inputs, &mut out)?;
        Ok(out)
    }

    pub fn evaluate_into(&self, inputs: &[f64], out: &mut [f64]) -> Result<(), GenomeError> {
        if inputs.len() != self.input_count {
            return Err(GenomeError::DimensionMismatch {
                expected: self.input_count,
                got: inputs.len(),
            });
        }
        let mut values = alloc::vec![0.0; self.node_count];
        values[..self.input_count].copy_from_slice(inputs);
        for step in &self.steps {
            let sum = step.bias + step.incoming.iter().map(|&(i, w)| w * values[i]).sum::<f64>();
            let v = step.activation.apply(sum);
            values[step.node] = if v.is_finite() { v } else { 0.0 };
        }
        for (o, &i) in out.iter_mut().zip(&self.outputs) {
            *o = values[i];
        }
        Ok(())
    }
}

/// Assignment of one split: the hidden node and its two connections.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitRecord {
    pub node: NodeId,
    pub activation: Activation,
    pub incoming: Innovation,
    pub outgoing: Innovation,
}

/// Hands out innovation numbers and hidden-node ids.
///
/// Records are never forgotten, so a structural mutation seen before always
/// maps to the same markings, which in particular holds within a generation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InnovationRegistry {
    pub input_count: usize,
    pub output_count: usize,
    next_innovation: u64,
    next_node: u32,
    connections: BTreeMap<u32, BTreeMap<u32, Innovation>>,
    splits: BTreeMap<u64, SplitRecord>,
}

impl InnovationRegistry {
    pub fn new(input_count: usize, output_count: usize) -> Self {
        InnovationRegistry {
            input_count,
            output_count,
            next_innovation: 1,
            next_node: (input_count + output_count) as u32,
            connections: BTreeMap::new(),
            splits: BTreeMap::new(),
        }
    }

    pub fn connection(&mut self, from: NodeId, to: NodeId) -> Innovation {
        let next = &mut self.next_innovation;
        *self
            .connections
            .entry(from.0)
            .or_default()
            .entry(to.0)
            .or_insert_with(|| {
                let id = Innovation(*next);
                *next += 1;
                id
            })
    }

    pub fn lookup_connection(&self, from: NodeId, to: NodeId) -> Option<Innovation> {
        self.connections.get(&from.0)?.get(&to.0).copied()
    }

    pub fn split<R: Rng + ?Sized>(
        &mut self,
        innovation: Innovation,
        from: NodeId,
        to: NodeId,
        rng: &mut R,
    ) -> SplitRecord {
        if let Some(rec) = self.splits.get(&innovation.0) {
            return *rec;
        }
        let node = NodeId(self.next_node);
        self.next_node += 1;
        let activation = Activation::PALETTE[rng.gen_range(0..Activation::PALETTE.len())];
        let incoming = self.connection(from, node);
        let outgoing = self.connection(node, to);
        let rec = SplitRecord {
            node,
            activation,
            incoming,
            outgoing,
        };
        self.splits.insert(innovation.0, rec);
        rec
    }

    pub fn issued_innovations(&self) -> u64 {
        self.next_innovation - 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MutationParams {
    pub p_weight_perturb: f64,
    pub p_weight_reset: f64,
    pub p_add_connection: f64,
    pub p_add_node: f64,
    pub weight_perturb_sigma: f64,
    pub weight_range: f64,
}

impl Default for MutationParams {
    fn default() -> Self {
        MutationParams {
            p_weight_perturb: 0.8,
            p_weight_reset: 0.1,
            p_add_connection: 0.05,
            p_add_node: 0.03,
            weight_perturb_sigma: 0.5,
            weight_range: 3.0,
        }
    }
}

impl MutationParams {
    pub const NONE: MutationParams = MutationParams {
        p_weight_perturb: 0.0,
        p_weight_reset: 0.0,
        p_add_connection: 0.0,
        p_add_node: 0.0,
        weight_perturb_sigma: 0.0,
        weight_range: 1.0,
    };

    /// Name of the first out-of-domain field, if any.
    pub fn invalid_field(&self) -> Option<&'static str> {
        let probs = [
            ("p_weight_perturb", self.p_weight_perturb),
            ("p_weight_reset", self.p_weight_reset),
            ("p_add_connection", self.p_add_connection),
            ("p_add_node", self.p_add_node),
        ];
        for (name, p) in probs {
            if !(0.0..=1.0).contains(&p) {
                return Some(name);
            }
        }
        if !(self.weight_perturb_sigma >= 0.0) {
            return Some("weight_perturb_sigma");
        }
        if !(self.weight_range > 0.0) {
            return Some("weight_range");
        }
        None
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MutationReport {
    pub weights_perturbed: usize,
    pub weights_reset: usize,
    pub added_node: Option<NodeId>,
    pub added_connection: Option<Innovation>,
    pub skipped_cycles: usize,
    pub skipped_other: usize,
}

const ADD_CONNECTION_ATTEMPTS: usize = 20;

/// NEAT mutation: weight and bias mutations on every gene, then at most one
/// structural mutation (add-node, else add-connection).
pub fn mutate<R: Rng + ?Sized>(
    parent: &Cppn,
    params: &MutationParams,
    registry: &mut InnovationRegistry,
    rng: &mut R,
) -> (Cppn, MutationReport) {
    let mut g = parent.clone();
    let mut report = MutationReport::default();
    let range = params.weight_range;

    let mutate_value = |v: &mut f64, rng: &mut R, report: &mut MutationReport| {
        if rng.gen::<f64>() < params.p_weight_perturb {
            *v = (*v + params.weight_perturb_sigma * gaussian(rng)).clamp(-range, range);
            report.weights_perturbed += 1;
        } else if rng.gen::<f64>() < params.p_weight_reset {
            *v = uniform(rng, range);
            report.weights_reset += 1;
        }
    };
    for c in &mut g.connections {
        mutate_value(&mut c.weight, rng, &mut report);
    }
    for n in g.nodes.iter_mut().filter(|n| n.role != NodeRole::Input) {
        mutate_value(&mut n.bias, rng, &mut report);
    }

    let roll = rng.gen::<f64>();
    if roll < params.p_add_node {
        let enabled: Vec<Innovation> = g.connections.iter().filter(|c| c.enabled).map(|c| c.innovation).collect();
        if enabled.is_empty() {
            report.skipped_other += 1;
        } else {
            let pick = enabled[rng.gen_range(0..enabled.len())];
            match g.add_node(pick, registry, rng) {
                Some(id) => report.added_node = Some(id),
                None => report.skipped_other += 1,
            }
        }
    } else if roll < params.p_add_node + params.p_add_connection {
        let sources: Vec<NodeId> = g.nodes.iter().filter(|n| n.role != NodeRole::Output).map(|n| n.id).collect();
        let targets: Vec<NodeId> = g.nodes.iter().filter(|n| n.role != NodeRole::Input).map(|n| n.id).collect();
        for _ in 0..ADD_CONNECTION_ATTEMPTS {
            let from = sources[rng.gen_range(0..sources.len())];
            let to = targets[rng.gen_range(0..targets.len())];
            let w = uniform(rng, range);
            match g.add_connection(from, to, w, registry) {
                Ok(inn) => {
                    report.added_connection = Some(inn);
                    break;
                }
                Err(AddConnectionRejected::Cycle) => report.skipped_cycles += 1,
                Err(_) => report.skipped_other += 1,
            }
        }
    }
    (g, report)
}

/// NEAT crossover aligned on innovation numbers.
///
/// Matching genes come from either parent with equal probability;
/// disjoint and excess genes come from the fitter parent, or from each
/// parent with probability 1/2 on a fitness tie. Genes whose endpoints
/// duplicate an earlier gene are dropped, and an enabled gene that would
/// close a cycle is inherited disabled.
pub fn crossover<R: Rng + ?Sized>(a: &Cppn, b: &Cppn, fitness_a: f64, fitness_b: f64, rng: &mut R) -> Cppn {
    let tie = fitness_a == fitness_b;
    let a_fitter = fitness_a >= fitness_b;
    let mut chosen: Vec<(&ConnectionGene, &Cppn)> = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < a.connections.len() || j < b.connections.len() {
        let ca = a.connections.get(i);
        let cb = b.connections.get(j);
        match (ca, cb) {
            (Some(x), Some(y)) if x.innovation == y.innovation => {
                if rng.gen::<bool>() {
                    chosen.push((x, a));
                } else {
                    chosen.push((y, b));
                }
                i += 1;
                j += 1;
            }
            (Some(x), y) if y.is_none_or(|y| x.innovation < y.innovation) => {
                if (tie && rng.gen::<bool>()) || (!tie && a_fitter) {
                    chosen.push((x, a));
                }
                i += 1;
            }
            (_, Some(y)) => {
                if (tie && rng.gen::<bool>()) || (!tie && !a_fitter) {
                    chosen.push((y, b));
                }
                j += 1;
            }
            (Some(_), None) | (None, None) => unreachable!(),
        }
    }

    let fitter = if a_fitter { a } else { b };
    let mut child = Cppn::bare(fitter.input_count, fitter.output_count, Activation::Identity);
    child.nodes = fitter.nodes.iter().filter(|n| n.role != NodeRole::Hidden).cloned().collect();
    for n in child.nodes.iter_mut() {
        if let (Some(na), Some(nb)) = (a.node(n.id), b.node(n.id)) {
            *n = if rng.gen::<bool>() { na.clone() } else { nb.clone() };
        }
    }
    let mut hidden: BTreeMap<NodeId, NodeGene> = BTreeMap::new();
    for (c, owner) in &chosen {
        for id in [c.from, c.to] {
            if child.node(id).is_some() || hidden.contains_key(&id) {
                continue;
            }
            let gene = match (a.node(id), b.node(id)) {
                (Some(na), Some(nb)) => {
                    if rng.gen::<bool>() {
                        na
                    } else {
                        nb
                    }
                }
                _ => owner.node(id).expect("connection endpoint present in its parent"),
            };
            hidden.insert(id, gene.clone());
        }
    }
    child.nodes.extend(hidden.into_values());
    child.nodes.sort_by_key(|n| n.id);

    for (c, _) in chosen {
        if child.has_edge(c.from, c.to) {
            continue;
        }
        let mut gene = c.clone();
        if gene.enabled && child.reaches(gene.to, gene.from) {
            gene.enabled = false;
        }
        child.connections.push(gene);
    }
    child
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    fn single(weight: f64, activation: Activation) -> Cppn {
        let mut reg = InnovationRegistry::new(1, 1);
        let mut g = Cppn::bare(1, 1, activation);
        g.add_connection(NodeId(0), NodeId(1), weight, &mut reg).unwrap();
        g
    }

    #[test]
    fn identity_pass_through() {
        assert_eq!(single(1.0, Activation::Identity).evaluate(&[0.7]).unwrap(), [0.7]);
        assert_eq!(single(-2.0, Activation::Identity).evaluate(&[0.5]).unwrap(), [-1.0]);
    }

    #[test]
    fn tanh_symmetry() {
        let mut reg = InnovationRegistry::new(2, 1);
        let mut g = Cppn::bare(2, 1, Activation::Tanh);
        g.add_connection(NodeId(0), NodeId(2), 1.0, &mut reg).unwrap();
        g.add_connection(NodeId(1), NodeId(2), 1.0, &mut reg).unwrap();
        for x in [0.0, 0.3, -1.7, 12.5] {
            assert_eq!(g.evaluate(&[x, -x]).unwrap(), [0.0]);
        }
    }

    #[test]
    fn dimension_mismatch() {
        let g = single(1.0, Activation::Identity);
        assert_eq!(
            g.evaluate(&[1.0, 2.0]),
            Err(GenomeError::DimensionMismatch { expected: 1, got: 2 })
        );
    }

    #[test]
    fn unconnected_output_yields_activated_bias() {
        let mut g = Cppn::bare(3, 2, Activation::Tanh);
        g.nodes[3].bias = 0.5;
        let out = g.evaluate(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(out, [libm::tanh(0.5), 0.0]);
    }

    #[test]
    fn zero_params_is_identity() {
        let mut reg = InnovationRegistry::new(3, 2);
        let mut rng = seeded(1);
        let g = Cppn::minimal(&mut reg, Activation::Tanh, 3.0, &mut rng);
        let (m, report) = mutate(&g, &MutationParams::NONE, &mut reg, &mut rng);
        assert_eq!(m, g);
        assert_eq!(report, MutationReport::default());
    }

    #[test]
    fn add_node_on_only_connection() {
        let mut reg = InnovationRegistry::new(1, 1);
        let mut g = Cppn::bare(1, 1, Activation::Identity);
        let inn = g.add_connection(NodeId(0), NodeId(1), 0.4, &mut reg).unwrap();
        let mut rng = seeded(2);
        let node = g.add_node(inn, &mut reg, &mut rng).unwrap();
        assert_eq!(g.node_count(), 3);
        assert_eq!(g.connection_count(), 3);
        assert!(!g.connections.iter().find(|c| c.innovation == inn).unwrap().enabled);
        let into = g.connections.iter().find(|c| c.to == node).unwrap();
        let out = g.connections.iter().find(|c| c.from == node).unwrap();
        assert_eq!((into.weight, out.weight), (1.0, 0.4));
        g.check().unwrap();
        // The same split cannot be applied twice.
        assert_eq!(g.add_node(inn, &mut reg, &mut rng), None);
    }

    #[test]
    fn same_structural_mutation_same_innovation() {
        let mut reg = InnovationRegistry::new(2, 1);
        let mut rng = seeded(5);
        let base = Cppn::bare(2, 1, Activation::Tanh);
        let mut g1 = base.clone();
        let mut g2 = base.clone();
        let i1 = g1.add_connection(NodeId(0), NodeId(2), 0.1, &mut reg).unwrap();
        let i2 = g2.add_connection(NodeId(0), NodeId(2), -0.9, &mut reg).unwrap();
        assert_eq!(i1, i2);
        let n1 = g1.add_node(i1, &mut reg, &mut rng).unwrap();
        let n2 = g2.add_node(i2, &mut reg, &mut rng).unwrap();
        assert_eq!(n1, n2);
        let inns = |g: &Cppn| g.connections.iter().map(|c| c.innovation).collect::<Vec<_>>();
        assert_eq!(inns(&g1), inns(&g2));
        assert_eq!(g1.node(n1).unwrap().activation, g2.node(n2).unwrap().activation);
    }

    #[test]
    fn cycle_rejected() {
        let mut reg = InnovationRegistry::new(1, 1);
        let mut rng = seeded(9);
        let mut g = Cppn::bare(1, 1, Activation::Identity);
        let inn = g.add_connection(NodeId(0), NodeId(1), 1.0, &mut reg).unwrap();
        let h1 = g.add_node(inn, &mut reg, &mut rng).unwrap();
        let into_h1 = g.connections.iter().find(|c| c.to == h1).unwrap().innovation;
        let h2 = g.add_node(into_h1, &mut reg, &mut rng).unwrap();
        // h2 -> h1 exists; h1 -> h2 would close a loop.
        assert_eq!(
            g.add_connection(h1, h2, 1.0, &mut reg),
            Err(AddConnectionRejected::Cycle)
        );
        assert_eq!(
            g.add_connection(NodeId(1), h1, 1.0, &mut reg),
            Err(AddConnectionRejected::Invalid)
        );
    }

    #[test]
    fn crossover_identical_parents_is_identity() {
        let mut reg = InnovationRegistry::new(3, 6);
        let mut rng = seeded(4);
        let mut g = Cppn::minimal(&mut reg, Activation::Tanh, 3.0, &mut rng);
        let params = MutationParams {
            p_add_node: 0.5,
            p_add_connection: 0.5,
            ..MutationParams::default()
        };
        for _ in 0..20 {
            g = mutate(&g, &params, &mut reg, &mut rng).0;
        }
        for _ in 0..10 {
            assert_eq!(crossover(&g, &g, 1.0, 1.0, &mut rng), g);
        }
    }

    #[test]
    fn excess_from_fitter_parent() {
        let mut reg = InnovationRegistry::new(2, 1);
        let mut a = Cppn::bare(2, 1, Activation::Tanh);
        a.add_connection(NodeId(0), NodeId(2), 0.5, &mut reg).unwrap();
        a.add_connection(NodeId(1), NodeId(2), 0.5, &mut reg).unwrap();
        let b = a.clone();
        let mut rng = seeded(8);
        let inn3 = {
            let conn = a.connections[0].innovation;
            a.add_node(conn, &mut reg, &mut rng).unwrap();
            a.connections.last().unwrap().innovation
        };
        for seed in 0..20 {
            let mut rng = seeded(seed);
            let child = crossover(&a, &b, 2.0, 1.0, &mut rng);
            assert!(child.connections.iter().any(|c| c.innovation == inn3));
            child.check().unwrap();
            let child = crossover(&a, &b, 0.0, 1.0, &mut rng);
            assert!(child.connections.iter().all(|c| c.innovation < Innovation(3)));
        }
    }

    #[test]
    fn crossover_disables_cycle_closing_gene() {
        // a carries h2 -> h1, b carries h1 -> h2 under another innovation.
        let mut reg = InnovationRegistry::new(1, 1);
        let mut rng = seeded(0);
        let mut base = Cppn::bare(1, 1, Activation::Identity);
        let inn = base.add_connection(NodeId(0), NodeId(1), 1.0, &mut reg).unwrap();
        let h1 = base.add_node(inn, &mut reg, &mut rng).unwrap();
        let into_h1 = base.connections.iter().find(|c| c.to == h1).unwrap().innovation;
        let mut a = base.clone();
        let h2 = a.add_node(into_h1, &mut reg, &mut rng).unwrap();
        let mut b = a.clone();
        for c in b.connections.iter_mut() {
            if c.from == h2 && c.to == h1 {
                c.from = h1;
                c.to = h2;
                c.innovation = Innovation(1000);
            }
        }
        b.connections.sort_by_key(|c| c.innovation);
        for c in b.connections.iter_mut().filter(|c| c.from == NodeId(0) && c.to == h2) {
            c.enabled = false;
        }
        b.check().unwrap();
        a.check().unwrap();
        for seed in 0..30 {
            let mut rng = seeded(seed);
            let child = crossover(&a, &b, 1.0, 1.0, &mut rng);
            child.check().unwrap();
        }
    }
}
