//! Comparing experiment arms.
//!
//! Rank statistics work on doubled ranks so that midranks stay integral and
//! exact null distributions can be counted by dynamic programming.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::descriptors::{DescriptorVector, DESCRIPTOR_NAMES};
use crate::evolution::RunArchive;

/// Largest sample for which exact null distributions are used.
pub const EXACT_LIMIT: usize = 25;
pub const MIN_SAMPLES: usize = 5;
pub const SIGNIFICANCE: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AnalysisError {
    #[error("samples differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("need at least {MIN_SAMPLES} nonzero differences, got {0}")]
    InsufficientSamples(usize),
    #[error("arm is empty")]
    EmptyArm,
    #[error("arms have different run counts ({0} vs {1})")]
    ArmSizeMismatch(usize, usize),
    #[error("runs disagree on generation count ({0} vs {1})")]
    Misaligned(usize, usize),
    #[error("non-finite sample value")]
    NonFinite,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestMethod {
    Exact,
    NormalApproximation,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub statistic: f64,
    pub p_value: f64,
    pub n: usize,
    pub method: TestMethod,
}

/// Doubled midranks of `values` (ascending) and the tie group sizes.
fn doubled_midranks(values: &[f64]) -> (Vec<u64>, Vec<u64>) {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = alloc::vec![0u64; values.len()];
    let mut ties = Vec::new();
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && values[order[j]] == values[order[i]] {
            j += 1;
        }
        // Ranks i+1..=j average to (i + 1 + j) / 2.
        let r = (i + 1 + j) as u64;
        for &k in &order[i..j] {
            ranks[k] = r;
        }
        ties.push((j - i) as u64);
        i = j;
    }
    (ranks, ties)
}

fn tie_term(ties: &[u64]) -> f64 {
    ties.iter().map(|&t| (t * t * t - t) as f64).sum()
}

fn normal_two_sided(z: f64) -> f64 {
    libm::erfc(z.abs() / core::f64::consts::SQRT_2).min(1.0)
}

fn two_sided(counts: &[f64], observed: usize, total: f64) -> f64 {
    let lower: f64 = counts[..=observed].iter().sum();
    let upper: f64 = counts[observed..].iter().sum();
    (2.0 * lower.min(upper) / total).min(1.0)
}

/// Paired two-sided Wilcoxon signed-rank test on `xs - ys`.
///
/// Zero differences are dropped. `statistic` is the positive rank sum.
pub fn wilcoxon_signed_rank(xs: &[f64], ys: &[f64]) -> Result<TestResult, AnalysisError> {
    if xs.len() != ys.len() {
        return Err(AnalysisError::LengthMismatch(xs.len(), ys.len()));
    }
    let diffs: Vec<f64> = xs.iter().zip(ys).map(|(x, y)| x - y).collect();
    if diffs.iter().any(|d| !d.is_finite()) {
        return Err(AnalysisError::NonFinite);
    }
    let nonzero: Vec<f64> = diffs.into_iter().filter(|&d| d != 0.0).collect();
    let n = nonzero.len();
    if n == 0 {
        return Ok(TestResult {
            statistic: 0.0,
            p_value: 1.0,
            n: 0,
            method: TestMethod::Exact,
        });
    }
    if n < MIN_SAMPLES {
        return Err(AnalysisError::InsufficientSamples(n));
    }
    let abs: Vec<f64> = nonzero.iter().map(|d| d.abs()).collect();
    let (ranks, ties) = doubled_midranks(&abs);
    let t_obs: u64 = ranks.iter().zip(&nonzero).filter(|(_, &d)| d > 0.0).map(|(r, _)| r).sum();
    let statistic = t_obs as f64 / 2.0;

    if n <= EXACT_LIMIT {
        // counts[s] = sign assignments whose positive doubled-rank sum is s.
        let max: u64 = ranks.iter().sum();
        let mut counts = alloc::vec![0.0f64; max as usize + 1];
        counts[0] = 1.0;
        let mut reach = 0usize;
        for &r in &ranks {
            let r = r as usize;
            for s in (0..=reach).rev() {
                let c = counts[s];
                if c != 0.0 {
                    counts[s + r] += c;
                }
            }
            reach += r;
        }
        let p = two_sided(&counts, t_obs as usize, libm::pow(2.0, n as f64));
        return Ok(TestResult {
            statistic,
            p_value: p,
            n,
            method: TestMethod::Exact,
        });
    }

    let nf = n as f64;
    let mean = nf * (nf + 1.0) / 4.0;
    let var = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0 - tie_term(&ties) / 48.0;
    let p = if var > 0.0 {
        normal_two_sided((statistic - mean) / libm::sqrt(var))
    } else {
        1.0
    };
    Ok(TestResult {
        statistic,
        p_value: p,
        n,
        method: TestMethod::NormalApproximation,
    })
}

/// Unpaired two-sided Wilcoxon rank-sum (Mann-Whitney) test.
///
/// `statistic` is the rank sum of `xs`. Exact (conditional on ties) when
/// both samples have at most [`EXACT_LIMIT`] values.
pub fn wilcoxon_rank_sum(xs: &[f64], ys: &[f64]) -> Result<TestResult, AnalysisError> {
    let (n1, n2) = (xs.len(), ys.len());
    if n1.min(n2) < MIN_SAMPLES {
        return Err(AnalysisError::InsufficientSamples(n1.min(n2)));
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(AnalysisError::NonFinite);
    }
    let all: Vec<f64> = xs.iter().chain(ys).copied().collect();
    let (ranks, ties) = doubled_midranks(&all);
    if ties.len() == 1 {
        return Ok(TestResult {
            statistic: (n1 * (n1 + n2 + 1)) as f64 / 2.0,
            p_value: 1.0,
            n: n1 + n2,
            method: TestMethod::Exact,
        });
    }
    let t_obs: u64 = ranks[..n1].iter().sum();
    let statistic = t_obs as f64 / 2.0;

    if n1.max(n2) <= EXACT_LIMIT {
        // table[k][s] = subsets of size k with doubled rank sum s.
        let max: u64 = ranks.iter().sum();
        let width = max as usize + 1;
        let mut table = alloc::vec![0.0f64; (n1 + 1) * width];
        table[0] = 1.0;
        for &r in &ranks {
            let r = r as usize;
            for k in (0..n1).rev() {
                for s in (0..width - r).rev() {
                    let c = table[k * width + s];
                    if c != 0.0 {
                        table[(k + 1) * width + s + r] += c;
                    }
                }
            }
        }
        let counts = &table[n1 * width..];
        let total: f64 = counts.iter().sum();
        let p = two_sided(counts, t_obs as usize, total);
        return Ok(TestResult {
            statistic,
            p_value: p,
            n: n1 + n2,
            method: TestMethod::Exact,
        });
    }

    let (a, b) = (n1 as f64, n2 as f64);
    let n = a + b;
    let mean = a * (n + 1.0) / 2.0;
    let var = a * b / 12.0 * ((n + 1.0) - tie_term(&ties) / (n * (n - 1.0)));
    let p = if var > 0.0 {
        normal_two_sided((statistic - mean) / libm::sqrt(var))
    } else {
        1.0
    };
    Ok(TestResult {
        statistic,
        p_value: p,
        n: n1 + n2,
        method: TestMethod::NormalApproximation,
    })
}

/// One population member as stored in the metrics tables.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricRow {
    pub id: u64,
    pub fitness: f64,
    pub descriptors: DescriptorVector,
    pub la_count: usize,
}

/// Per-generation populations of one run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunSeries {
    pub generations: Vec<Vec<MetricRow>>,
}

impl From<&RunArchive> for RunSeries {
    fn from(archive: &RunArchive) -> Self {
        RunSeries {
            generations: archive
                .generations
                .iter()
                .map(|g| {
                    g.entries
                        .iter()
                        .map(|e| MetricRow {
                            id: e.id,
                            fitness: e.fitness,
                            descriptors: e.descriptors,
                            la_count: e.la_count,
                        })
                        .collect()
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Metric {
    Fitness,
    /// Index into [`DESCRIPTOR_NAMES`].
    Descriptor(usize),
    LaCount,
}

impl Metric {
    /// Fitness followed by the eight descriptors.
    pub fn report_rows() -> impl Iterator<Item = Metric> {
        core::iter::once(Metric::Fitness).chain((0..DESCRIPTOR_NAMES.len()).map(Metric::Descriptor))
    }

    pub fn all() -> impl Iterator<Item = Metric> {
        Metric::report_rows().chain(core::iter::once(Metric::LaCount))
    }

    pub fn name(self) -> &'static str {
        match self {
            Metric::Fitness => "fitness",
            Metric::Descriptor(i) => DESCRIPTOR_NAMES[i],
            Metric::LaCount => "la_count",
        }
    }

    pub fn value(self, row: &MetricRow) -> f64 {
        match self {
            Metric::Fitness => row.fitness,
            Metric::Descriptor(i) => row.descriptors.values()[i],
            Metric::LaCount => row.la_count as f64,
        }
    }
}

fn population_mean(rows: &[MetricRow], metric: Metric) -> f64 {
    if rows.is_empty() {
        return f64::NAN;
    }
    rows.iter().map(|r| metric.value(r)).sum::<f64>() / rows.len() as f64
}

/// Linear-interpolation quantile of sorted data (Hyndman-Fan type 7).
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = libm::floor(h) as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProgressionPoint {
    pub generation: usize,
    pub mean: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
}

fn check_aligned(runs: &[RunSeries]) -> Result<usize, AnalysisError> {
    let first = runs.first().ok_or(AnalysisError::EmptyArm)?.generations.len();
    for r in runs {
        if r.generations.len() != first {
            return Err(AnalysisError::Misaligned(first, r.generations.len()));
        }
    }
    Ok(first)
}

/// Cross-run mean and quartiles of the per-run population mean.
pub fn progression_series(runs: &[RunSeries], metric: Metric) -> Result<Vec<ProgressionPoint>, AnalysisError> {
    let generations = check_aligned(runs)?;
    Ok((0..generations)
        .map(|g| {
            let mut v: Vec<f64> = runs.iter().map(|r| population_mean(&r.generations[g], metric)).collect();
            let mean = v.iter().sum::<f64>() / v.len() as f64;
            v.sort_by(f64::total_cmp);
            ProgressionPoint {
                generation: g,
                mean,
                q1: quantile(&v, 0.25),
                median: quantile(&v, 0.5),
                q3: quantile(&v, 0.75),
            }
        })
        .collect())
}

/// Progression of every metric for one arm.
#[derive(Debug, Clone, PartialEq)]
pub struct ArmSummary {
    pub series: Vec<(Metric, Vec<ProgressionPoint>)>,
}

pub fn summarize_arm(runs: &[RunSeries]) -> Result<ArmSummary, AnalysisError> {
    Ok(ArmSummary {
        series: Metric::all()
            .map(|m| progression_series(runs, m).map(|s| (m, s)))
            .collect::<Result<_, _>>()?,
    })
}

impl ArmSummary {
    /// Long-format plot data: `metric,generation,mean,q1,median,q3`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("metric,generation,mean,q1,median,q3\n");
        for (m, points) in &self.series {
            for p in points {
                let _ = writeln!(out, "{},{},{},{},{},{}", m.name(), p.generation, p.mean, p.q1, p.median, p.q3);
            }
        }
        out
    }
}

/// Per-run population means of the final generation.
pub fn final_means(runs: &[RunSeries], metric: Metric) -> Vec<f64> {
    runs.iter()
        .map(|r| r.generations.last().map_or(f64::NAN, |g| population_mean(g, metric)))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairingMode {
    /// Signed-rank test, runs paired by index.
    #[default]
    Paired,
    /// Rank-sum test on the two sets of runs.
    Unpaired,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub metric: Metric,
    pub mean_a: f64,
    pub mean_b: f64,
    pub result: Result<TestResult, AnalysisError>,
}

impl ComparisonRow {
    pub fn significant(&self) -> bool {
        matches!(&self.result, Ok(r) if r.p_value < SIGNIFICANCE)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub label_a: String,
    pub label_b: String,
    pub mode: PairingMode,
    pub rows: Vec<ComparisonRow>,
}

/// Tests fitness and every descriptor on final-generation run means.
pub fn compare_final_generation(
    arm_a: &[RunSeries],
    arm_b: &[RunSeries],
    mode: PairingMode,
) -> Result<ComparisonReport, AnalysisError> {
    if arm_a.is_empty() || arm_b.is_empty() {
        return Err(AnalysisError::EmptyArm);
    }
    if mode == PairingMode::Paired && arm_a.len() != arm_b.len() {
        return Err(AnalysisError::ArmSizeMismatch(arm_a.len(), arm_b.len()));
    }
    let rows = Metric::report_rows()
        .map(|metric| {
            let a = final_means(arm_a, metric);
            let b = final_means(arm_b, metric);
            let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
            let result = match mode {
                PairingMode::Paired => wilcoxon_signed_rank(&a, &b),
                PairingMode::Unpaired => wilcoxon_rank_sum(&a, &b),
            };
            ComparisonRow {
                metric,
                mean_a: mean(&a),
                mean_b: mean(&b),
                result,
            }
        })
        .collect();
    Ok(ComparisonReport {
        label_a: "a".into(),
        label_b: "b".into(),
        mode,
        rows,
    })
}

impl ComparisonReport {
    pub fn with_labels(mut self, a: &str, b: &str) -> Self {
        self.label_a = a.into();
        self.label_b = b.into();
        self
    }

    /// Markdown table; significant p-values are bold.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "| metric | mean {} | mean {} | p-value |", self.label_a, self.label_b);
        out.push_str("|---|---|---|---|\n");
        for r in &self.rows {
            let p = match &r.result {
                Ok(t) if r.significant() => alloc::format!("**{:.4}**", t.p_value),
                Ok(t) => alloc::format!("{:.4}", t.p_value),
                Err(_) => "n/a".into(),
            };
            let _ = writeln!(out, "| {} | {:.4} | {:.4} | {} |", r.metric.name(), r.mean_a, r.mean_b, p);
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("metric,mean_a,mean_b,statistic,p_value,n,method,significant\n");
        for r in &self.rows {
            let _ = match &r.result {
                Ok(t) => writeln!(
                    out,
                    "{},{},{},{},{},{},{},{}",
                    r.metric.name(),
                    r.mean_a,
                    r.mean_b,
                    t.statistic,
                    t.p_value,
                    t.n,
                    match t.method {
                        TestMethod::Exact => "exact",
                        TestMethod::NormalApproximation => "normal",
                    },
                    r.significant()
                ),
                Err(_) => writeln!(out, "{},{},{},,n/a,,,false", r.metric.name(), r.mean_a, r.mean_b),
            };
        }
        out
    }
}

/// Box-plot data: one row per run with final-generation means.
pub fn final_means_csv(runs: &[RunSeries]) -> String {
    let mut out = String::from("run");
    for m in Metric::all() {
        out.push(',');
        out.push_str(m.name());
    }
    out.push('\n');
    let columns: Vec<Vec<f64>> = Metric::all().map(|m| final_means(runs, m)).collect();
    for i in 0..runs.len() {
        let _ = write!(out, "{i}");
        for c in &columns {
            let _ = write!(out, ",{}", c[i]);
        }
        out.push('\n');
    }
    out
}
