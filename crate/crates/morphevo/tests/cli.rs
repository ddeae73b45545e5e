use std::fs;
use std::path::{Path, PathBuf};

use morphevo::archive::{self, RunStatus};
use morphevo::documents::{self, BodyDocument, GenomeDocument, GenomeRole};
use morphevo::experiment::{self, ExperimentSpec};
use morphevo::parallel::ParallelEvaluator;
use morphevo_core::decoder::OUTPUT_ACTIVATION;
use morphevo_core::genome::Cppn;
use morphevo_core::morphology::{BodyGraph, BodyNode, ModuleKind};

struct Output {
    code: i32,
    stdout: String,
    stderr: String,
}

fn run(args: &[&str]) -> Output {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut full = vec!["morphevo"];
    full.extend_from_slice(args);
    let code = morphevo::cli::run(full, &mut out, &mut err);
    Output {
        code,
        stdout: String::from_utf8(out).unwrap(),
        stderr: String::from_utf8(err).unwrap(),
    }
}

fn spec_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("specs").join(name)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write_core_only(dir: &Path) -> (PathBuf, PathBuf) {
    let body = dir.join("body.json");
    let brain = dir.join("brain.json");
    documents::write(&body, &BodyDocument::new(&BodyGraph::core_only())).unwrap();
    documents::write(&brain, &GenomeDocument::new(GenomeRole::Brain, &Cppn::bare(6, 1, OUTPUT_ACTIVATION))).unwrap();
    (body, brain)
}

fn smoke_config() -> morphevo_core::evolution::EvolutionConfig {
    let spec = ExperimentSpec::load(&spec_path("experiment1_nola.spec")).unwrap();
    let mut c = experiment::smoke(spec.config().unwrap());
    c.runs = 3;
    c.seed = 5;
    c
}

#[test]
fn help_and_usage_exit_codes() {
    assert_eq!(run(&["--help"]).code, 0);
    assert_eq!(run(&["--version"]).code, 0);
    assert_eq!(run(&[]).code, 1);
    assert_eq!(run(&["frobnicate"]).code, 1);
}

#[test]
fn invalid_spec_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("bad.spec");
    fs::write(
        &spec,
        r#"{"format_version": 1, "name": "bad", "environment": {"kind": "plain"},
            "linear_actuator_enabled": false, "overrides": {"sim": {"dt": -0.01}}}"#,
    )
    .unwrap();
    let out = run(&["evolve", s(&spec), "--out", s(&dir.path().join("o"))]);
    assert_eq!(out.code, 1);
    assert!(out.stderr.contains("sim.dt"), "{}", out.stderr);
    assert!(!dir.path().join("o").exists());
}

#[test]
fn missing_file_is_reported() {
    let out = run(&["descriptors", "/nonexistent/body.json"]);
    assert_eq!(out.code, 1);
    assert!(out.stderr.contains("/nonexistent/body.json"), "{}", out.stderr);
    let out = run(&["evolve", "/nonexistent/x.spec", "--smoke"]);
    assert_eq!(out.code, 1);
}

#[test]
fn evaluate_core_only_is_zero_and_repeatable() {
    let dir = tempfile::tempdir().unwrap();
    let (body, brain) = write_core_only(dir.path());
    let a = run(&["evaluate", s(&body), s(&brain), "--duration", "5"]);
    assert_eq!(a.code, 0, "{}", a.stderr);
    assert!(a.stdout.lines().any(|l| l.starts_with("# fitness") && l.trim_end().ends_with(" 0")), "{}", a.stdout);
    // Header plus one row per 0.1 s sample.
    let csv_rows = a.stdout.lines().filter(|l| !l.starts_with('#')).count();
    assert_eq!(csv_rows, 1 + 51);
    let b = run(&["evaluate", s(&body), s(&brain), "--duration", "5"]);
    assert_eq!(a.stdout, b.stdout);
    let rough = run(&["evaluate", s(&body), s(&brain), "--environment", "rough", "--seed", "3", "--duration", "2"]);
    assert_eq!(rough.code, 0, "{}", rough.stderr);
}

#[test]
fn evaluate_rejects_the_wrong_genome_role() {
    let dir = tempfile::tempdir().unwrap();
    let (body, _) = write_core_only(dir.path());
    let wrong = dir.path().join("wrong.json");
    documents::write(&wrong, &GenomeDocument::new(GenomeRole::Body, &Cppn::bare(3, 6, OUTPUT_ACTIVATION))).unwrap();
    let out = run(&["evaluate", s(&body), s(&wrong)]);
    assert_eq!(out.code, 1);
    assert!(out.stderr.contains("body"), "{}", out.stderr);
}

#[test]
fn descriptors_of_core_only() {
    let dir = tempfile::tempdir().unwrap();
    let (body, _) = write_core_only(dir.path());
    let out = run(&["descriptors", s(&body)]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    assert_eq!(
        out.stdout,
        "branching,coverage,rel_joints,rel_limbs,rel_limb_length,proportion,absolute_size,symmetry\n0,1,0,0,0,1,1,1\n"
    );
    let json = run(&["descriptors", s(&body), "--json"]);
    assert!(json.stdout.contains("\"absolute_size\": 1"), "{}", json.stdout);
}

#[test]
fn ten_module_body_round_trips() {
    let brick = || BodyNode::new(ModuleKind::Brick);
    let body = BodyGraph::from_root(
        BodyNode::new(ModuleKind::Core)
            .with(
                0,
                BodyNode::new(ModuleKind::HingeHorizontal)
                    .with(0, brick().with(0, BodyNode::new(ModuleKind::LinearActuator).with(0, brick()))),
            )
            .with(
                1,
                BodyNode::new(ModuleKind::HingeVertical).with(0, brick().rotated().with(1, brick()).with(3, brick())),
            )
            .with(3, brick()),
    );
    assert_eq!(body.module_count(), 10);
    assert!(body.validate().is_ok());
    let text = documents::serialize_body(&body);
    let back = documents::deserialize_body(&text).unwrap();
    assert_eq!(back, body);
    assert_eq!(documents::serialize_body(&back), text);
}

#[test]
fn smoke_archive_resume_and_analysis() {
    let dir = tempfile::tempdir().unwrap();
    let config = smoke_config();
    let evaluator = ParallelEvaluator::new(2).unwrap();

    let full = dir.path().join("full");
    let statuses = archive::run_experiment("nola", &config, &full, &evaluator, false, &mut |_, _| {}).unwrap();
    assert_eq!(statuses, vec![RunStatus::Completed; 3]);

    // Derived seeds give distinct runs.
    let m0 = fs::read(full.join("runs/run_00/gen_5/metrics.csv")).unwrap();
    let m1 = fs::read(full.join("runs/run_01/gen_5/metrics.csv")).unwrap();
    assert_ne!(m0, m1);

    // Interrupt run 1 after generation 2 is on disk, then resume.
    let cut = dir.path().join("cut");
    let interrupted = std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| {
        archive::run_experiment("nola", &config, &cut, &evaluator, false, &mut |run, rec| {
            if run == 1 && rec.generation == 2 {
                panic!("interrupted");
            }
        })
    }));
    assert!(interrupted.is_err());
    assert!(!cut.join("runs/run_01/done").exists());
    assert!(archive::run_experiment("nola", &config, &cut, &evaluator, false, &mut |_, _| {}).is_err());
    let statuses = archive::run_experiment("nola", &config, &cut, &evaluator, true, &mut |_, _| {}).unwrap();
    assert_eq!(statuses, vec![RunStatus::Skipped, RunStatus::Resumed { from: 2 }, RunStatus::Completed]);
    assert_eq!(archive::tree_digest(&full).unwrap(), archive::tree_digest(&cut).unwrap());

    // Resuming a finished experiment changes nothing.
    let statuses = archive::run_experiment("nola", &config, &cut, &evaluator, true, &mut |_, _| {}).unwrap();
    assert_eq!(statuses, vec![RunStatus::Skipped; 3]);
    assert_eq!(archive::tree_digest(&full).unwrap(), archive::tree_digest(&cut).unwrap());

    // A different configuration is refused on resume.
    let mut other = config.clone();
    other.seed += 1;
    assert!(archive::run_experiment("nola", &other, &cut, &evaluator, true, &mut |_, _| {}).is_err());

    // Comparing an arm with itself: nine rows, nothing significant.
    let report_dir = dir.path().join("report");
    let out = run(&["analyze", s(&full), s(&cut), "--out", s(&report_dir)]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    let csv = fs::read_to_string(report_dir.join("comparison.csv")).unwrap();
    assert_eq!(csv.lines().count(), 10, "{csv}");
    assert!(!out.stdout.contains("**"), "{}", out.stdout);
    for name in ["progression_a.csv", "progression_b.csv", "final_a.csv", "final_b.csv"] {
        assert!(report_dir.join(name).exists(), "{name}");
    }
}

#[test]
fn evolve_command_reports_digest() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("o");
    let spec = spec_path("experiment1_nola.spec");
    let args = ["evolve", s(&spec), "--smoke", "--seed", "9", "--quiet", "--out", s(&out_dir)];
    let out = run(&args);
    assert_eq!(out.code, 0, "{}", out.stderr);
    let digest = archive::metrics_digest(&out_dir).unwrap();
    assert!(out.stdout.contains(&format!("metrics digest {digest}")), "{}", out.stdout);
    // A second run into the same directory needs --resume.
    assert_eq!(run(&args).code, 1);
    let mut resumed = args.to_vec();
    resumed.push("--resume");
    let again = run(&resumed);
    assert_eq!(again.code, 0, "{}", again.stderr);
    assert!(again.stdout.contains("run 1 already complete"), "{}", again.stdout);
}
