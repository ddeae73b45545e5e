//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Run with `cargo test -p morphevo --test acceptance`; a nonzero exit
//! status means at least one criterion failed.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::{Duration, Instant};

use morphevo::archive;
use morphevo::parallel::ParallelEvaluator;
use morphevo_core::analysis::{compare_final_generation, MetricRow, PairingMode, RunSeries};
use morphevo_core::controller::{CpgConfig, CpgNetwork};
use morphevo_core::decoder::{body_registry, brain_registry, decode_brain, BrainSpec, CpgEdge, DecodeLimits, JointRef, OUTPUT_ACTIVATION};
use morphevo_core::descriptors::{descriptor_vector, DescriptorVector};
use morphevo_core::evolution::EvolutionConfig;
use morphevo_core::fitness::{evaluate_path, FitnessParams};
use morphevo_core::genome::{crossover, mutate, Cppn, InnovationRegistry, MutationParams};
use morphevo_core::morphology::{BodyGraph, BodyNode, Cell, ModuleKind};
use morphevo_core::rng::{seeded, RunRng};
use morphevo_core::simulation::{SimConfig, Simulator};
use morphevo_core::terrain::{Environment, Heightmap};
use rand::Rng;

type Outcome = Result<String, String>;

/// Name, points and spawn yaw.
type PathFixture = (String, Vec<(f64, f64)>, f64);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

// ---------------------------------------------------------------- C1

/// Independent evaluation of the fitness formula: polar angle via atan2 and
/// a Kahan-summed path length.
fn fitness_oracle(points: &[(f64, f64)], yaw: f64, p: &FitnessParams) -> f64 {
    let (x0, y0) = points[0];
    let (x1, y1) = *points.last().unwrap();
    let (mut len, mut carry) = (0.0f64, 0.0f64);
    for w in points.windows(2) {
        let seg = (w[1].0 - w[0].0).hypot(w[1].1 - w[0].1) - carry;
        let t = len + seg;
        carry = (t - len) - seg;
        len = t;
    }
    let r = (x1 - x0).hypot(y1 - y0);
    let rel = (y1 - y0).atan2(x1 - x0) - (yaw + p.beta0);
    let (s, c) = rel.sin_cos();
    let proj = r * c;
    let wrapped = (rel + std::f64::consts::PI).rem_euclid(std::f64::consts::TAU) - std::f64::consts::PI;
    let delta = if r == 0.0 { 0.0 } else { wrapped.abs() };
    (proj.abs() / (len + p.epsilon)) * (proj / (delta + 1.0) - p.penalty_coefficient * (r * s).abs())
}

fn polyline(waypoints: &[(f64, f64)], per_segment: usize) -> Vec<(f64, f64)> {
    let mut out = vec![waypoints[0]];
    for w in waypoints.windows(2) {
        for k in 1..=per_segment {
            let t = k as f64 / per_segment as f64;
            out.push((w[0].0 + t * (w[1].0 - w[0].0), w[0].1 + t * (w[1].1 - w[0].1)));
        }
    }
    out
}

fn c1() -> Outcome {
    let p = FitnessParams::default();
    let (s, c) = p.beta0.sin_cos();
    let u = (c, s);
    let ortho = (-s, c);
    let mut rng = seeded(101);
    let mut fixtures: Vec<PathFixture> = Vec::new();
    for k in 1..=6 {
        let d = 0.3 * k as f64;
        fixtures.push((format!("straight {d}"), polyline(&[(0.0, 0.0), (d * u.0, d * u.1)], 10), 0.0));
        fixtures.push((format!("orthogonal {d}"), polyline(&[(0.0, 0.0), (d * ortho.0, d * ortho.1)], 7), 0.0));
        fixtures.push((format!("backward {d}"), polyline(&[(1.0, 1.0), (1.0 - d * u.0, 1.0 - d * u.1)], 5), 0.0));
    }
    for k in 0..8 {
        let yaw = rng.gen_range(-3.0..3.0);
        let mut pts = vec![(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))];
        for i in 0..12 {
            let side = if i % 2 == 0 { 0.2 } else { -0.2 };
            let last = *pts.last().unwrap();
            pts.push((last.0 + 0.15 * u.0 + side * ortho.0, last.1 + 0.15 * u.1 + side * ortho.1));
        }
        fixtures.push((format!("zig-zag {k}"), polyline(&pts, 3), yaw));
    }
    ensure(fixtures.len() >= 20, || "too few fixtures".into())?;
    let mut worst: f64 = 0.0;
    for (name, pts, yaw) in &fixtures {
        let got = evaluate_path(pts.iter().copied(), *yaw, &p).map_err(|e| e.to_string())?;
        let want = fitness_oracle(pts, *yaw, &p);
        let err = (got.fitness - want).abs();
        worst = worst.max(err);
        ensure(err < 1e-9, || format!("{name}: {} vs oracle {want}", got.fitness))?;
        // Resampling the same path leaves fitness unchanged.
        let dense: Vec<(f64, f64)> = polyline(pts, 4);
        let again = evaluate_path(dense, *yaw, &p).unwrap().fitness;
        ensure((again - got.fitness).abs() < 1e-6, || format!("{name}: resampling moved fitness"))?;
    }

    let straight = evaluate_path(polyline(&[(0.0, 0.0), u], 10), 0.0, &p).unwrap();
    ensure(
        (straight.dist_projection - 1.0).abs() < 1e-12
            && (straight.length_traj - 1.0).abs() < 1e-12
            && straight.delta < 1e-7
            && straight.penalty < 1e-12
            && (straight.fitness - 1.0).abs() < 1e-9,
        || format!("straight-line example: {straight:?}"),
    )?;
    let still = evaluate_path(vec![(0.4, -0.2); 11], 0.0, &p).unwrap();
    ensure(still.dist_projection == 0.0 && still.fitness == 0.0, || format!("stationary example: {still:?}"))?;
    let side = evaluate_path(polyline(&[(0.0, 0.0), ortho], 10), 0.0, &p).unwrap();
    ensure(side.dist_projection == 0.0 && side.fitness == 0.0 && side.penalty > 0.0, || {
        format!("orthogonal example: {side:?}")
    })?;
    Ok(format!("{} trajectories, max |error| {worst:.1e}; worked examples hold", fixtures.len()))
}

// ---------------------------------------------------------------- C2

fn brick() -> BodyNode {
    BodyNode::new(ModuleKind::Brick)
}

fn c2() -> Outcome {
    let core = BodyGraph::core_only();
    let chain = BodyGraph::from_root(
        BodyNode::new(ModuleKind::Core).with(0, brick().with(0, brick().with(0, brick().with(0, brick())))),
    );
    let plus = BodyGraph::from_root(
        BodyNode::new(ModuleKind::Core).with(0, brick()).with(1, brick()).with(2, brick()).with(3, brick()),
    );
    let goldens: [(&str, &BodyGraph, [f64; 8]); 3] = [
        ("core-only", &core, [0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 1.0, 1.0]),
        ("5-chain", &chain, [0.0, 1.0, 0.0, 0.25, 1.0, 0.2, 5.0, 1.0]),
        ("plus", &plus, [1.0, 5.0 / 9.0, 0.0, 1.0, 0.25, 1.0, 5.0, 1.0]),
    ];
    for (name, body, want) in goldens {
        let got = descriptor_vector(body).map_err(|e| e.to_string())?.values();
        ensure(got == want, || format!("{name}: {got:?} != {want:?}"))?;
    }

    let mut rng = seeded(202);
    let mut body_reg = body_registry();
    let params = MutationParams {
        p_add_node: 0.2,
        p_add_connection: 0.3,
        ..MutationParams::default()
    };
    let limits = DecodeLimits::default();
    let mut sizes = BTreeMap::new();
    for _ in 0..1000 {
        let mut g = Cppn::minimal(&mut body_reg, OUTPUT_ACTIVATION, 3.0, &mut rng);
        for _ in 0..rng.gen_range(0..10) {
            g = mutate(&g, &params, &mut body_reg, &mut rng).0;
        }
        let body = morphevo_core::decoder::decode_body(&g, &limits);
        let d = descriptor_vector(&body).map_err(|e| e.to_string())?;
        ensure(d.normalized().iter().all(|v| (0.0..=1.0).contains(v)), || format!("out of range: {d:?}"))?;
        *sizes.entry(d.absolute_size).or_insert(0) += 1;
    }
    Ok(format!("3 goldens exact; 1000 random bodies in range (sizes {sizes:?})"))
}

// ---------------------------------------------------------------- C3

fn brute_force_p(d: &[f64]) -> f64 {
    let d: Vec<f64> = d.iter().copied().filter(|&v| v != 0.0).collect();
    let n = d.len();
    let rank = |a: f64| {
        let less = d.iter().filter(|b| b.abs() < a.abs()).count() as f64;
        let eq = d.iter().filter(|b| b.abs() == a.abs()).count() as f64;
        less + (eq + 1.0) / 2.0
    };
    let ranks: Vec<f64> = d.iter().map(|&a| rank(a)).collect();
    let w: f64 = ranks.iter().zip(&d).filter(|(_, v)| **v > 0.0).map(|(r, _)| r).sum();
    let (mut le, mut ge) = (0u64, 0u64);
    for mask in 0u32..(1 << n) {
        let s: f64 = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| ranks[i]).sum();
        le += u64::from(s <= w + 1e-9);
        ge += u64::from(s >= w - 1e-9);
    }
    (2.0 * le.min(ge) as f64 / (1u64 << n) as f64).min(1.0)
}

fn c3() -> Outcome {
    use morphevo_core::analysis::wilcoxon_signed_rank;
    let r = wilcoxon_signed_rank(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0], &[0.0; 6]).map_err(|e| e.to_string())?;
    ensure(r.statistic == 21.0 && r.p_value == 0.03125, || format!("n=6 all positive: {r:?}"))?;
    let mut rng = seeded(303);
    let mut worst: f64 = 0.0;
    let mut tested = 0;
    while tested < 200 {
        let n = rng.gen_range(5..=12);
        // Coarse values produce ties; an occasional zero is dropped.
        let d: Vec<f64> = (0..n).map(|_| f64::from(rng.gen_range(-8i32..=8)) * 0.5).collect();
        if d.iter().filter(|v| **v != 0.0).count() < 5 {
            continue;
        }
        let got = wilcoxon_signed_rank(&d, &vec![0.0; n]).map_err(|e| e.to_string())?;
        let want = brute_force_p(&d);
        worst = worst.max((got.p_value - want).abs());
        ensure((got.p_value - want).abs() < 1e-12, || format!("{d:?}: {} vs {want}", got.p_value))?;
        tested += 1;
    }
    Ok(format!("200 fixtures n<=12, max |dp| {worst:.1e}; n=6 p=0.03125"))
}

// ---------------------------------------------------------------- C4

fn cli(args: &[&str]) -> Result<String, String> {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = morphevo::cli::run(args.iter().copied(), &mut out, &mut err);
    if code == 0 {
        Ok(String::from_utf8_lossy(&out).into_owned())
    } else {
        Err(format!("exit {code}: {}", String::from_utf8_lossy(&err)))
    }
}

fn spec_path(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("specs").join(name).display().to_string()
}

fn c4() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let spec = spec_path("experiment1_la.spec");
    let mut digests = Vec::new();
    for (label, workers) in [("a", "1"), ("b", "1"), ("c", "8")] {
        let out = tmp.path().join(label);
        let out_s = out.display().to_string();
        cli(&["morphevo", "evolve", &spec, "--smoke", "--seed", "17", "--workers", workers, "--quiet", "--out", &out_s])?;
        digests.push((
            archive::tree_digest(&out).map_err(|e| e.to_string())?,
            archive::metrics_digest(&out).map_err(|e| e.to_string())?,
        ));
    }
    ensure(digests[0].0 == digests[1].0, || "equal seeds gave different archives".into())?;
    ensure(digests[0].1 == digests[2].1, || "1 vs 8 workers gave different metrics".into())?;
    ensure(digests[0].0 == digests[2].0, || "1 vs 8 workers gave different archives".into())?;
    Ok(format!("archive {}, metrics {}", &digests[0].0[..12], &digests[0].1[..12]))
}

// ---------------------------------------------------------------- C5

fn c5() -> Outcome {
    let brain = BrainSpec {
        joints: vec![JointRef {
            placement: 1,
            cell: Cell::new(1, 0, 0),
            kind: ModuleKind::HingeHorizontal,
        }],
        edges: Vec::<CpgEdge>::new(),
    };
    let mut net = CpgNetwork::new(&brain, &CpgConfig::default());
    let dt = 0.005;
    let mut prev = net.oscillators[0].x;
    let mut crossings = Vec::new();
    for k in 1..=6000 {
        net.advance(dt);
        let x = net.oscillators[0].x;
        if prev < 0.0 && x >= 0.0 {
            crossings.push((k as f64 - x / (x - prev)) * dt);
        }
        prev = x;
    }
    let period = (crossings.last().unwrap() - crossings[0]) / (crossings.len() - 1) as f64;
    let period_err = (period - 1.0).abs();
    ensure(period_err < 0.01, || format!("period {period}"))?;

    let plain = Heightmap::plain(20.0).map_err(|e| e.to_string())?;
    let t = morphevo_core::simulation::simulate(
        &BodyGraph::core_only(),
        &BrainSpec::default(),
        &plain,
        &SimConfig::default(),
        &CpgConfig::default(),
    )
    .map_err(|e| e.to_string())?;
    let (a, b) = (t.samples[0], *t.samples.last().unwrap());
    let drift = (b.x - a.x).hypot(b.y - a.y);
    ensure(drift < 1e-3, || format!("core-only drift {drift}"))?;

    let body = BodyGraph::from_root(
        BodyNode::new(ModuleKind::Core)
            .with(0, BodyNode::new(ModuleKind::HingeHorizontal).with(0, brick()))
            .with(1, BodyNode::new(ModuleKind::HingeVertical).with(0, BodyNode::new(ModuleKind::LinearActuator).with(0, brick())))
            .with(2, brick().rotated().with(1, brick())),
    );
    let brain = decode_brain(&Cppn::bare(6, 1, OUTPUT_ACTIVATION), &body, &DecodeLimits::default());
    let cpg = CpgConfig {
        gain: 0.0,
        ..CpgConfig::default()
    };
    let mut sim = Simulator::new(&body, &brain, &plain, &SimConfig::default(), &cpg).map_err(|e| e.to_string())?;
    sim.settle().map_err(|e| e.to_string())?;
    let mut ke = sim.kinetic_energy();
    let mut worst_rise: f64 = 0.0;
    for _ in 0..6000 {
        sim.step().map_err(|e| e.to_string())?;
        let next = sim.kinetic_energy();
        worst_rise = worst_rise.max(next - ke);
        ensure(next <= ke + 1e-8, || format!("kinetic energy rose {ke} -> {next}"))?;
        ke = next;
    }
    Ok(format!(
        "period error {:.3}%, core drift {drift:.1e} m, max KE rise {worst_rise:.1e} J",
        period_err * 100.0
    ))
}

// ---------------------------------------------------------------- C6 / C7

fn desk_config(environment: Environment) -> EvolutionConfig {
    EvolutionConfig {
        mu: 20,
        lambda: 10,
        generations: 30,
        runs: 5,
        seed: 1000,
        environment,
        decode: DecodeLimits {
            linear_actuator_enabled: false,
            ..DecodeLimits::default()
        },
        ..EvolutionConfig::default()
    }
}

fn run_arm(name: &str, config: &EvolutionConfig, out: &Path) -> Result<Vec<RunSeries>, String> {
    let evaluator = ParallelEvaluator::new(std::thread::available_parallelism().map_or(1, |n| n.get())).map_err(|e| e.to_string())?;
    archive::run_experiment(name, config, out, &evaluator, false, &mut |_, _| {}).map_err(|e| e.to_string())?;
    archive::load_arm(out).map_err(|e| e.to_string())
}

fn mean_fitness(rows: &[MetricRow]) -> f64 {
    rows.iter().map(|r| r.fitness).sum::<f64>() / rows.len() as f64
}

fn c6(plain_arm: &[RunSeries]) -> Outcome {
    let mut improved = 0;
    let mut detail = Vec::new();
    for run in plain_arm {
        let first = mean_fitness(&run.generations[0]);
        let last = mean_fitness(run.generations.last().unwrap());
        ensure(run.generations.len() == 31, || format!("{} generations recorded", run.generations.len()))?;
        improved += usize::from(last >= first);
        detail.push(format!("{first:.4}->{last:.4}"));
    }
    ensure(improved >= 4, || format!("only {improved}/5 runs improved: {}", detail.join(" ")))?;
    Ok(format!("{improved}/5 runs improved: {}", detail.join(" ")))
}

fn synthetic_arm(shift: f64, seed: u64) -> Vec<RunSeries> {
    let mut rng = seeded(seed);
    (0..20)
        .map(|_| {
            let rows = |rng: &mut RunRng, shift: f64| -> Vec<MetricRow> {
                (0..10)
                    .map(|id| MetricRow {
                        id,
                        fitness: rng.gen_range(0.0..0.1),
                        descriptors: DescriptorVector {
                            branching: rng.gen_range(0.0..0.3),
                            coverage: (rng.gen_range(0.3..0.4) + shift).min(1.0),
                            rel_joints: rng.gen_range(0.0..1.0),
                            rel_limbs: rng.gen_range(0.0..1.0),
                            rel_limb_length: rng.gen_range(0.0..1.0),
                            proportion: rng.gen_range(0.2..1.0),
                            absolute_size: rng.gen_range(1..=10),
                            symmetry: rng.gen_range(0.0..1.0),
                        },
                        la_count: 0,
                    })
                    .collect()
            };
            RunSeries {
                generations: vec![rows(&mut rng, 0.0), rows(&mut rng, shift)],
            }
        })
        .collect()
}

fn c7(plain_arm: &[RunSeries], rough_arm: &[RunSeries]) -> Outcome {
    let report = compare_final_generation(plain_arm, rough_arm, PairingMode::Paired).map_err(|e| e.to_string())?;
    ensure(report.rows.len() == 9, || format!("{} rows", report.rows.len()))?;
    ensure(report.rows.iter().all(|r| r.mean_a.is_finite() && r.mean_b.is_finite()), || "non-finite means".into())?;
    let text = report.clone().with_labels("plain", "rough").to_text();
    ensure(text.lines().count() == 11, || format!("report has {} lines", text.lines().count()))?;

    // Coverage shifted by ~10 standard deviations of its run means.
    let a = synthetic_arm(0.0, 71);
    let b = synthetic_arm(0.3, 72);
    let synthetic = compare_final_generation(&a, &b, PairingMode::Paired).map_err(|e| e.to_string())?;
    let flagged: Vec<&str> = synthetic.rows.iter().filter(|r| r.significant()).map(|r| r.metric.name()).collect();
    ensure(flagged.contains(&"coverage"), || format!("shifted descriptor not flagged: {flagged:?}"))?;
    let p_values: Vec<String> = report
        .rows
        .iter()
        .map(|r| match &r.result {
            Ok(t) => format!("{}={:.3}", r.metric.name(), t.p_value),
            Err(_) => format!("{}=n/a", r.metric.name()),
        })
        .collect();
    Ok(format!("desk report 9 rows [{}]; synthetic flags {flagged:?}", p_values.join(" ")))
}

// ---------------------------------------------------------------- C8

fn c8() -> Outcome {
    let mut rng = seeded(808);
    let params = MutationParams {
        p_add_node: 0.25,
        p_add_connection: 0.35,
        ..MutationParams::default()
    };
    let mut checked = 0usize;
    for registry in [body_registry(), brain_registry()] {
        let mut reg: InnovationRegistry = registry;
        let mut pop: Vec<Cppn> = (0..10).map(|_| Cppn::minimal(&mut reg, OUTPUT_ACTIVATION, 3.0, &mut rng)).collect();
        let mut by_innovation: BTreeMap<u64, (u32, u32)> = BTreeMap::new();
        let mut by_pair: BTreeMap<(u32, u32), u64> = BTreeMap::new();
        for _ in 0..5000 {
            let i = rng.gen_range(0..pop.len());
            pop[i] = if rng.gen_bool(0.5) {
                mutate(&pop[i], &params, &mut reg, &mut rng).0
            } else {
                let j = rng.gen_range(0..pop.len());
                crossover(&pop[i], &pop[j], rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0), &mut rng)
            };
            let g = &pop[i];
            g.check().map_err(|e| format!("operator broke a genome: {e}"))?;
            for c in &g.connections {
                let pair = (c.from.0, c.to.0);
                ensure(*by_innovation.entry(c.innovation.0).or_insert(pair) == pair, || {
                    format!("innovation {} reused", c.innovation.0)
                })?;
                ensure(*by_pair.entry(pair).or_insert(c.innovation.0) == c.innovation.0, || {
                    format!("pair {pair:?} carries two innovations")
                })?;
            }
            checked += 1;
        }
        for g in &pop {
            ensure(crossover(g, g, 0.5, 0.5, &mut rng) == *g, || "crossover with self changed a genome".into())?;
        }
    }

    // Two individuals making the same structural change in one generation.
    let mut reg = body_registry();
    let base = Cppn::minimal(&mut reg, OUTPUT_ACTIVATION, 3.0, &mut rng);
    let split = MutationParams {
        p_add_node: 1.0,
        ..MutationParams::NONE
    };
    let mut first_seen: BTreeMap<u64, Vec<(u32, u32, u64)>> = BTreeMap::new();
    for _ in 0..100 {
        let child = mutate(&base, &split, &mut reg, &mut rng).0;
        let split_inn = child.connections.iter().find(|c| !c.enabled).unwrap().innovation.0;
        let added: Vec<(u32, u32, u64)> = child
            .connections
            .iter()
            .filter(|c| base.connections.iter().all(|b| b.innovation != c.innovation))
            .map(|c| (c.from.0, c.to.0, c.innovation.0))
            .collect();
        let prev = first_seen.entry(split_inn).or_insert_with(|| added.clone());
        ensure(*prev == added, || "repeated split received new markings".into())?;
    }
    Ok(format!("{checked} operator applications; {} distinct splits share markings", first_seen.len()))
}

// ---------------------------------------------------------------- driver

fn report(id: &str, title: &str, limit: Duration, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let outcome = f();
    let elapsed = start.elapsed();
    let outcome = match outcome {
        Ok(d) if elapsed > limit => Err(format!("{d}; took {elapsed:.1?}, limit {limit:?}")),
        other => other,
    };
    match &outcome {
        Ok(detail) => println!("PASS {id} {title} ({elapsed:.2?}): {detail}"),
        Err(reason) => println!("FAIL {id} {title} ({elapsed:.2?}): {reason}"),
    }
    outcome.is_ok()
}

fn main() {
    let mut ok = true;
    ok &= report("C1", "fitness oracle suite", Duration::from_secs(1), c1);
    ok &= report("C2", "descriptor goldens and ranges", Duration::from_secs(10), c2);
    ok &= report("C3", "Wilcoxon exactness", Duration::from_secs(30), c3);
    ok &= report("C4", "archive determinism", Duration::from_secs(300), c4);
    ok &= report("C5", "CPG and physics sanity", Duration::from_secs(60), c5);

    let tmp = tempfile::tempdir().expect("temp dir");
    let start = Instant::now();
    let plain = run_arm("desk_plain", &desk_config(Environment::default()), &tmp.path().join("plain"));
    let plain_time = start.elapsed();
    ok &= report("C6", "evolution smoke trend", Duration::from_secs(900).saturating_sub(plain_time), || {
        c6(plain.as_ref().map_err(Clone::clone)?)
    });
    let start = Instant::now();
    let rough = run_arm("desk_rough", &desk_config(Environment::rough_default(1)), &tmp.path().join("rough"));
    let rough_time = start.elapsed();
    ok &= report("C7", "plain vs rough comparison pipeline", Duration::from_secs(900).saturating_sub(rough_time), || {
        c7(plain.as_ref().map_err(Clone::clone)?, rough.as_ref().map_err(Clone::clone)?)
    });
    println!("     (desk arms: plain {plain_time:.1?}, rough {rough_time:.1?})");
    ok &= report("C8", "NEAT operator invariants", Duration::from_secs(60), c8);

    if !ok {
        std::process::exit(1);
    }
}
