//! Benchmark suites: a grid of generated graphs, seeds and algorithms, run
//! one at a time and aggregated into test counts and effect metrics.
//!
//! Runs are independent and pure in their inputs, so callers may execute
//! them in any order or in parallel and aggregate afterwards.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::adjustment::{ate_set, metrics, AteSet, Metrics, RunRecord};
use crate::ci::{CiError, CiSource};
use crate::discovery::{discover, run_combined, Algorithm, LocalStructure};
use crate::graph::Dag;
use crate::synth::{generate_graph, sample_data, sample_sem, DgpConfig, DgpKind, SemModel};
use crate::NodeSet;

/// How the CI tests of a suite are answered.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "engine", rename_all = "kebab-case")]
pub enum BenchCi {
    #[default]
    Oracle,
    FisherZ {
        #[serde(default = "default_alpha")]
        alpha: f64,
        samples: Vec<usize>,
        #[serde(default = "one")]
        replications: usize,
    },
}

fn default_alpha() -> f64 {
    0.05
}

fn one() -> usize {
    1
}

/// A generator plus the seeds to draw from it. Seeds are the explicit
/// list followed by `0..seed_count`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphFamily {
    #[serde(flatten)]
    pub kind: DgpKind,
    #[serde(default)]
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub seed_count: u64,
}

impl GraphFamily {
    pub fn all_seeds(&self) -> Vec<u64> {
        let mut out = self.seeds.clone();
        out.extend(0..self.seed_count);
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct SuiteSpec {
    #[serde(default)]
    pub graphs: Vec<GraphFamily>,
    #[serde(default)]
    pub algorithms: Vec<Algorithm>,
    #[serde(default)]
    pub ci: BenchCi,
    #[serde(default)]
    pub test_cap: Option<usize>,
}

/// One cell of the grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRun {
    pub graph_id: String,
    pub kind: DgpKind,
    pub seed: u64,
    pub algorithm: Algorithm,
    pub samples: Option<usize>,
    pub replication: usize,
}

/// Short label of a generator.
pub fn kind_label(kind: &DgpKind) -> String {
    match kind {
        DgpKind::CovMed(c) => format!("covmed-c{}-m{}", c.n_c, c.n_m),
        DgpKind::ErdosRenyi { n, p } => format!("er-n{n}-p{p}"),
        DgpKind::Fig5a { clique } => format!("fig5a-n{clique}"),
        DgpKind::Fig5b { sep, clique } => format!("fig5b-m{sep}-n{clique}"),
    }
}

/// Expands a suite into its runs, in a fixed order: family, seed, sample
/// size, replication, algorithm.
pub fn expand(spec: &SuiteSpec) -> Vec<BenchRun> {
    let sizes: Vec<(Option<usize>, usize)> = match &spec.ci {
        BenchCi::Oracle => vec![(None, 1)],
        BenchCi::FisherZ {
            samples,
            replications,
            ..
        } => samples.iter().map(|&n| (Some(n), *replications)).collect(),
    };
    let mut out = Vec::new();
    for fam in &spec.graphs {
        for seed in fam.all_seeds() {
            let graph_id = format!("{}-s{seed}", kind_label(&fam.kind));
            for &(samples, reps) in &sizes {
                for replication in 0..reps {
                    for &algorithm in &spec.algorithms {
                        out.push(BenchRun {
                            graph_id: graph_id.clone(),
                            kind: fam.kind,
                            seed,
                            algorithm,
                            samples,
                            replication,
                        });
                    }
                }
            }
        }
    }
    out
}

/// Per-run output, one CSV row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRecord {
    pub graph_id: String,
    pub seed: u64,
    pub algorithm: Algorithm,
    pub samples: Option<usize>,
    pub replication: usize,
    pub nodes: usize,
    pub tests: usize,
    pub capped: bool,
    pub parents: usize,
    pub children: usize,
    pub unoriented: usize,
    pub ate_size: usize,
    pub winner: Option<Algorithm>,
    pub error: Option<String>,
    #[serde(skip)]
    pub evaluation: Option<RunRecord>,
}

/// Mixes a run seed with a stream tag so the SEM and each replication's
/// data use unrelated random streams.
fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed
        .wrapping_mul(0x9e37_79b9_7f4a_7c15)
        .wrapping_add(stream.wrapping_mul(0xbf58_476d_1ce4_e5b9));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// The SEM used for a generated graph and seed.
pub fn model_for(g: &Dag, seed: u64) -> SemModel {
    sample_sem(g, derive_seed(seed, 1))
}

fn run_algorithm(
    src: &CiSource,
    x: usize,
    algo: Algorithm,
) -> Result<(LocalStructure, Option<Algorithm>), CiError> {
    if algo == Algorithm::Combined {
        let r = run_combined(|_| src.fork(), x)?;
        return Ok((r.structure, Some(r.winner)));
    }
    discover(src, x, algo).map(|ls| (ls, None))
}

/// Executes one run. Failures are recorded in the record, not returned.
pub fn execute(run: &BenchRun, ci: &BenchCi, test_cap: Option<usize>) -> BenchRecord {
    let mut rec = BenchRecord {
        graph_id: run.graph_id.clone(),
        seed: run.seed,
        algorithm: run.algorithm,
        samples: run.samples,
        replication: run.replication,
        nodes: 0,
        tests: 0,
        capped: false,
        parents: 0,
        children: 0,
        unoriented: 0,
        ate_size: 0,
        winner: None,
        error: None,
        evaluation: None,
    };
    if let Err(e) = fill(&mut rec, run, ci, test_cap) {
        rec.error = Some(e);
    }
    rec
}

fn fill(
    rec: &mut BenchRecord,
    run: &BenchRun,
    ci: &BenchCi,
    test_cap: Option<usize>,
) -> Result<(), String> {
    let cfg = DgpConfig::new(run.kind, run.seed);
    let g = Arc::new(generate_graph(&cfg).map_err(|e| e.to_string())?);
    let (x, y) = cfg.roles(&g);
    rec.nodes = g.n();
    let oracle = CiSource::oracle(g.clone());
    let (src, data) = match (ci, run.samples) {
        (BenchCi::FisherZ { alpha, .. }, Some(n)) => {
            let model = model_for(&g, run.seed);
            let data = Arc::new(sample_data(
                &model,
                n,
                derive_seed(run.seed, 2 + run.replication as u64),
            ));
            let src = CiSource::fisher_z(data.clone(), *alpha).map_err(|e| e.to_string())?;
            (src, Some((model, data)))
        }
        _ => (oracle.fork(), None),
    };
    let src = src.with_cap(test_cap);
    let (ls, winner) = run_algorithm(&src, x, run.algorithm).map_err(|e| e.to_string())?;
    rec.tests = ls.tests_used;
    rec.capped = ls.capped;
    rec.parents = ls.parents.len();
    rec.children = ls.children.len();
    rec.unoriented = ls.unoriented.len();
    rec.winner = winner;
    let Some((model, data)) = data else {
        return Ok(());
    };
    let tag = run.algorithm.name();
    let estimated = ate_set(&ls, y, data.as_ref(), tag).map_err(|e| e.to_string())?;
    rec.ate_size = estimated.len();
    let (reference_ls, _) = run_algorithm(&oracle, x, run.algorithm).map_err(|e| e.to_string())?;
    let reference: AteSet =
        ate_set(&reference_ls, y, &model.covariance(), tag).map_err(|e| e.to_string())?;
    rec.evaluation = Some(RunRecord {
        estimated,
        reference,
        true_parents: g.parents(x).iter().copied().collect::<NodeSet>(),
    });
    Ok(())
}

/// Aggregate over the runs sharing an algorithm and sample size.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Aggregate {
    pub algorithm: Algorithm,
    pub samples: Option<usize>,
    pub runs: usize,
    pub errors: usize,
    pub capped: usize,
    pub mean_tests: f64,
    pub median_tests: f64,
    pub metrics: Option<Metrics>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchReport {
    pub schema: &'static str,
    pub records: Vec<BenchRecord>,
    pub aggregates: Vec<Aggregate>,
}

fn median(sorted: &[usize]) -> f64 {
    match sorted.len() {
        0 => 0.0,
        k if k % 2 == 1 => sorted[k / 2] as f64,
        k => (sorted[k / 2 - 1] + sorted[k / 2]) as f64 / 2.0,
    }
}

/// Groups records by algorithm and sample size. Effect metrics appear only
/// for groups whose runs carry evaluations.
pub fn aggregate(records: &[BenchRecord]) -> Vec<Aggregate> {
    let mut groups: BTreeMap<(Algorithm, Option<usize>), Vec<&BenchRecord>> = BTreeMap::new();
    for r in records {
        groups.entry((r.algorithm, r.samples)).or_default().push(r);
    }
    groups
        .into_iter()
        .map(|((algorithm, samples), rs)| {
            let ok: Vec<&&BenchRecord> = rs.iter().filter(|r| r.error.is_none()).collect();
            let mut tests: Vec<usize> = ok.iter().map(|r| r.tests).collect();
            tests.sort_unstable();
            let evals: Vec<RunRecord> = ok.iter().filter_map(|r| r.evaluation.clone()).collect();
            Aggregate {
                algorithm,
                samples,
                runs: rs.len(),
                errors: rs.len() - ok.len(),
                capped: ok.iter().filter(|r| r.capped).count(),
                mean_tests: if tests.is_empty() {
                    0.0
                } else {
                    tests.iter().sum::<usize>() as f64 / tests.len() as f64
                },
                median_tests: median(&tests),
                metrics: (!evals.is_empty()).then(|| metrics(&evals)),
            }
        })
        .collect()
}

/// Runs a suite sequentially.
pub fn run_suite(spec: &SuiteSpec) -> BenchReport {
    let records: Vec<BenchRecord> = expand(spec)
        .iter()
        .map(|r| execute(r, &spec.ci, spec.test_cap))
        .collect();
    report(records)
}

pub fn report(records: Vec<BenchRecord>) -> BenchReport {
    let aggregates = aggregate(&records);
    BenchReport {
        schema: crate::io::SCHEMA,
        records,
        aggregates,
    }
}

/// Per-run records as CSV text.
pub fn records_csv(records: &[BenchRecord]) -> Result<String, csv::Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in records {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}
