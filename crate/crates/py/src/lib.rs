//! Python bindings: graphs, SEMs, datasets, discovery runs and the
//! adjustment and faithfulness helpers built on them.

use std::collections::BTreeMap;
use std::sync::Arc;

use lcd_core::adjustment::{
    ate_set, hausdorff_sq as core_hausdorff_sq, optimal_adjustment_set as core_optimal,
    EffectEstimator, OptimalSet,
};
use lcd_core::ci::Override;
use lcd_core::discovery::{self, run_combined, run_sd};
use lcd_core::faithfulness::{hybrid_procedure, test_mff, test_sd_result, HybridOrder};
use lcd_core::io::{graph_to_json, model_to_json, parse_graph, parse_overrides};
use lcd_core::synth::{generate_graph, sample_data, sample_sem, DgpConfig, SemModel};
use lcd_core::{fixtures, Algorithm, CiError, CiSource, Dag, LocalStructure, NodeSet};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn ci_err(e: CiError) -> PyErr {
    PyRuntimeError::new_err(e.to_string())
}

fn index(dag: &Dag, name: &str) -> PyResult<usize> {
    dag.index_of(name)
        .ok_or_else(|| PyValueError::new_err(format!("unknown node `{name}`")))
}

fn indices(names: &[String], wanted: &[String]) -> PyResult<NodeSet> {
    wanted
        .iter()
        .map(|w| {
            names
                .iter()
                .position(|n| n == w)
                .ok_or_else(|| PyValueError::new_err(format!("unknown node `{w}`")))
        })
        .collect()
}

fn named(names: &[String], s: &NodeSet) -> Vec<String> {
    s.iter().map(|&v| names[v].clone()).collect()
}

/// A directed acyclic graph with named nodes.
#[pyclass(frozen)]
struct Graph {
    dag: Arc<Dag>,
}

#[pymethods]
impl Graph {
    #[new]
    #[pyo3(signature = (nodes, edges=Vec::new()))]
    fn new(nodes: Vec<String>, edges: Vec<(String, String)>) -> PyResult<Self> {
        let pairs: Vec<(&str, &str)> = edges.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
        let dag = Dag::from_named_edges(&nodes, &pairs).map_err(value_err)?;
        Ok(Self { dag: Arc::new(dag) })
    }

    /// Parses graph JSON or a text edge list.
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        let file = parse_graph(text).map_err(value_err)?;
        Ok(Self {
            dag: Arc::new(file.dag),
        })
    }

    /// Builds a graph from a generator config such as
    /// `{"kind": "erdos_renyi", "n": 10, "p": 0.3, "seed": 1}`.
    #[staticmethod]
    fn generate(config: &str) -> PyResult<Self> {
        let cfg: DgpConfig = serde_json::from_str(config).map_err(value_err)?;
        let dag = generate_graph(&cfg).map_err(value_err)?;
        Ok(Self { dag: Arc::new(dag) })
    }

    /// A built-in graph: `fig1`, or the graph of a named scenario.
    #[staticmethod]
    fn fixture(name: &str) -> PyResult<Self> {
        let dag = match name {
            "fig1" => fixtures::fig1(),
            other => {
                fixtures::scenario(other)
                    .ok_or_else(|| PyValueError::new_err(format!("unknown fixture `{other}`")))?
                    .graph
            }
        };
        Ok(Self { dag: Arc::new(dag) })
    }

    #[staticmethod]
    fn fig5a(clique: usize) -> Self {
        Self {
            dag: Arc::new(fixtures::fig5a(clique)),
        }
    }

    #[staticmethod]
    fn fig5b(sep: usize, clique: usize) -> Self {
        Self {
            dag: Arc::new(fixtures::fig5b(sep, clique)),
        }
    }

    #[getter]
    fn nodes(&self) -> Vec<String> {
        self.dag.names().to_vec()
    }

    fn edges(&self) -> Vec<(String, String)> {
        self.dag
            .edges()
            .into_iter()
            .map(|(a, b)| (self.dag.name(a).to_string(), self.dag.name(b).to_string()))
            .collect()
    }

    fn parents(&self, node: &str) -> PyResult<Vec<String>> {
        let v = index(&self.dag, node)?;
        Ok(self.dag.parents(v).iter().map(|&p| self.dag.name(p).to_string()).collect())
    }

    fn children(&self, node: &str) -> PyResult<Vec<String>> {
        let v = index(&self.dag, node)?;
        Ok(self.dag.children(v).iter().map(|&c| self.dag.name(c).to_string()).collect())
    }

    fn markov_blanket(&self, node: &str) -> PyResult<Vec<String>> {
        let v = index(&self.dag, node)?;
        Ok(named(self.dag.names(), &self.dag.markov_blanket(v)))
    }

    #[pyo3(signature = (a, b, given=Vec::new()))]
    fn d_separated(&self, a: &str, b: &str, given: Vec<String>) -> PyResult<bool> {
        let s = indices(self.dag.names(), &given)?;
        self.dag
            .d_separated(index(&self.dag, a)?, index(&self.dag, b)?, &s)
            .map_err(value_err)
    }

    fn to_json(&self) -> String {
        graph_to_json(&self.dag)
    }

    fn __len__(&self) -> usize {
        self.dag.n()
    }

    fn __repr__(&self) -> String {
        format!("Graph(nodes={}, edges={})", self.dag.n(), self.dag.edge_count())
    }
}

/// Forced CI verdicts of a named scenario, as JSON.
#[pyfunction]
fn scenario_overrides(name: &str) -> PyResult<String> {
    let s = fixtures::scenario(name)
        .ok_or_else(|| PyValueError::new_err(format!("unknown scenario `{name}`")))?;
    Ok(lcd_core::io::overrides_to_json(&s.overrides, &s.graph))
}

/// A linear-Gaussian SEM over a graph.
#[pyclass(frozen)]
struct Model {
    model: SemModel,
}

#[pymethods]
impl Model {
    /// Random weights and noise variances for `graph`.
    #[staticmethod]
    #[pyo3(signature = (graph, seed=0))]
    fn random(graph: PyRef<'_, Graph>, seed: u64) -> Self {
        Self {
            model: sample_sem(&graph.dag, seed),
        }
    }

    /// Parses a graph file carrying weights and noise variances.
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        let file = parse_graph(text).map_err(value_err)?;
        let model = file
            .model()
            .ok_or_else(|| PyValueError::new_err("graph file lacks weights or noise variances"))?;
        Ok(Self { model })
    }

    #[getter]
    fn graph(&self) -> Graph {
        Graph {
            dag: Arc::new(self.model.graph.clone()),
        }
    }

    fn weights(&self) -> BTreeMap<(String, String), f64> {
        let g = &self.model.graph;
        self.model
            .weights
            .iter()
            .map(|(&(a, b), &w)| ((g.name(a).to_string(), g.name(b).to_string()), w))
            .collect()
    }

    fn total_effect(&self, x: &str, y: &str) -> PyResult<f64> {
        let g = &self.model.graph;
        Ok(self.model.total_effect(index(g, x)?, index(g, y)?))
    }

    /// Population effect of `x` on `y` adjusting for `given`.
    #[pyo3(signature = (x, y, given=Vec::new()))]
    fn theta(&self, x: &str, y: &str, given: Vec<String>) -> PyResult<f64> {
        let g = &self.model.graph;
        let s = indices(g.names(), &given)?;
        self.model
            .covariance()
            .theta(index(g, x)?, index(g, y)?, &s)
            .map_err(value_err)
    }

    fn covariance(&self) -> Vec<Vec<f64>> {
        let sigma = self.model.covariance().sigma;
        sigma.row_iter().map(|r| r.iter().copied().collect()).collect()
    }

    #[pyo3(signature = (n, seed=0))]
    fn sample(&self, n: usize, seed: u64) -> Data {
        Data {
            data: Arc::new(sample_data(&self.model, n, seed)),
        }
    }

    fn to_json(&self) -> String {
        model_to_json(&self.model)
    }
}

/// Samples in canonical column order.
#[pyclass(frozen)]
struct Data {
    data: Arc<lcd_core::Dataset>,
}

#[pymethods]
impl Data {
    #[staticmethod]
    fn read_csv(path: &str) -> PyResult<Self> {
        let data = lcd_core::Dataset::from_csv_path(path).map_err(value_err)?;
        Ok(Self {
            data: Arc::new(data),
        })
    }

    fn write_csv(&self, path: &str) -> PyResult<()> {
        let f = std::fs::File::create(path).map_err(value_err)?;
        self.data.write_csv(f).map_err(value_err)
    }

    #[getter]
    fn names(&self) -> Vec<String> {
        self.data.names().to_vec()
    }

    fn __len__(&self) -> usize {
        self.data.n()
    }

    /// Least-squares effect of `x` on `y` adjusting for `given`.
    #[pyo3(signature = (x, y, given=Vec::new()))]
    fn theta(&self, x: &str, y: &str, given: Vec<String>) -> PyResult<f64> {
        let names = self.data.names();
        let pick = |n: &str| indices(names, &[n.to_string()]).map(|s| *s.first().unwrap());
        let s = indices(names, &given)?;
        self.data.theta(pick(x)?, pick(y)?, &s).map_err(value_err)
    }
}

/// What a discovery run learned, with the ATE set over the locally valid
/// parent sets.
#[pyclass(frozen, get_all)]
struct Structure {
    algorithm: String,
    target: String,
    parents: Vec<String>,
    children: Vec<String>,
    unoriented: Vec<String>,
    tests: usize,
    capped: bool,
    winner: Option<String>,
    /// `(adjustment set, effect)` pairs; empty when no outcome was given.
    ate: Vec<(Vec<String>, f64)>,
}

#[pymethods]
impl Structure {
    fn __repr__(&self) -> String {
        format!(
            "Structure(algorithm={:?}, parents={:?}, children={:?}, unoriented={:?}, tests={})",
            self.algorithm, self.parents, self.children, self.unoriented, self.tests
        )
    }
}

enum Engine<'a> {
    Graph(&'a Graph, Option<&'a str>),
    Data(&'a Data, f64),
}

fn source(engine: &Engine<'_>) -> PyResult<(CiSource, Vec<String>)> {
    match engine {
        Engine::Graph(g, None) => Ok((CiSource::oracle(g.dag.clone()), g.dag.names().to_vec())),
        Engine::Graph(g, Some(text)) => {
            let ov: Vec<Override> = parse_overrides(text, &g.dag).map_err(value_err)?;
            Ok((CiSource::scripted(g.dag.clone(), &ov), g.dag.names().to_vec()))
        }
        Engine::Data(d, alpha) => Ok((
            CiSource::fisher_z(d.data.clone(), *alpha).map_err(value_err)?,
            d.data.names().to_vec(),
        )),
    }
}

fn engine_of<'a>(
    graph: &'a Option<PyRef<'_, Graph>>,
    data: &'a Option<PyRef<'_, Data>>,
    overrides: Option<&'a str>,
    alpha: f64,
) -> PyResult<Engine<'a>> {
    match (graph, data) {
        (Some(g), None) => Ok(Engine::Graph(g, overrides)),
        (None, Some(d)) if overrides.is_none() => Ok(Engine::Data(d, alpha)),
        (None, Some(_)) => Err(PyValueError::new_err("overrides need a graph")),
        _ => Err(PyValueError::new_err("give exactly one of graph or data")),
    }
}

struct Effects<'a> {
    model: Option<&'a Model>,
    data: Option<&'a Data>,
}

impl EffectEstimator for Effects<'_> {
    fn theta(
        &self,
        x: usize,
        y: usize,
        s: &NodeSet,
    ) -> Result<f64, lcd_core::adjustment::AdjustmentError> {
        match (self.data, self.model) {
            (Some(d), _) => d.data.theta(x, y, s),
            (None, Some(m)) => m.model.covariance().theta(x, y, s),
            (None, None) => unreachable!("checked by the caller"),
        }
    }
}

fn run(src: &CiSource, x: usize, algo: Algorithm) -> PyResult<(LocalStructure, Option<Algorithm>)> {
    if algo == Algorithm::Combined {
        let r = run_combined(|_| src.fork(), x).map_err(ci_err)?;
        return Ok((r.structure, Some(r.winner)));
    }
    Ok((discovery::discover(src, x, algo).map_err(ci_err)?, None))
}

/// Runs a discovery algorithm around `treatment`. With a graph the CI
/// tests are answered exactly (or by `overrides` where given); with data
/// they use Fisher-z at `alpha`. When `outcome` is given, effects come from
/// `model` (graph runs, random weights by default) or from the data.
#[pyfunction]
#[pyo3(signature = (graph=None, data=None, treatment="X", outcome=None, algorithm="ldecc", alpha=0.05, overrides=None, model=None, test_cap=None, seed=0))]
#[allow(clippy::too_many_arguments)]
fn discover(
    graph: Option<PyRef<'_, Graph>>,
    data: Option<PyRef<'_, Data>>,
    treatment: &str,
    outcome: Option<&str>,
    algorithm: &str,
    alpha: f64,
    overrides: Option<&str>,
    model: Option<PyRef<'_, Model>>,
    test_cap: Option<usize>,
    seed: u64,
) -> PyResult<Structure> {
    let algo: Algorithm = algorithm.parse().map_err(PyValueError::new_err)?;
    let engine = engine_of(&graph, &data, overrides, alpha)?;
    let (src, names) = source(&engine)?;
    let src = src.with_cap(test_cap);
    let x = *indices(&names, &[treatment.to_string()])?.first().unwrap();
    let (ls, winner) = run(&src, x, algo)?;
    let fallback;
    let effects = Effects {
        model: match (&model, &graph) {
            (Some(m), _) => Some(&**m),
            (None, Some(g)) => {
                fallback = Model {
                    model: sample_sem(&g.dag, seed),
                };
                Some(&fallback)
            }
            _ => None,
        },
        data: data.as_deref(),
    };
    let ate = match outcome {
        Some(y) if !ls.capped => {
            let y = *indices(&names, &[y.to_string()])?.first().unwrap();
            ate_set(&ls, y, &effects, algo.name())
                .map_err(value_err)?
                .entries
                .iter()
                .map(|e| (named(&names, &e.set), e.theta))
                .collect()
        }
        _ => Vec::new(),
    };
    Ok(Structure {
        algorithm: algo.name().to_string(),
        target: names[x].clone(),
        parents: named(&names, &ls.parents),
        children: named(&names, &ls.children),
        unoriented: named(&names, &ls.unoriented),
        tests: ls.tests_used,
        capped: ls.capped,
        winner: winner.map(|w| w.name().to_string()),
        ate,
    })
}

/// Optimal adjustment set learned around `treatment`, or `None` when no
/// valid adjustment set exists.
#[pyfunction]
#[pyo3(signature = (graph, treatment, outcome, overrides=None))]
fn optimal_adjustment_set(
    graph: PyRef<'_, Graph>,
    treatment: &str,
    outcome: &str,
    overrides: Option<&str>,
) -> PyResult<Option<Vec<String>>> {
    let (src, names) = source(&Engine::Graph(&graph, overrides))?;
    let x = index(&graph.dag, treatment)?;
    let y = index(&graph.dag, outcome)?;
    let ls = discovery::discover(&src, x, Algorithm::Ldecc).map_err(ci_err)?;
    Ok(match core_optimal(&src, &ls, y).map_err(ci_err)? {
        OptimalSet::NoValidAdj => None,
        OptimalSet::Set(s) => Some(named(&names, &s)),
    })
}

/// Runs a faithfulness tester (`mff` or `sd`) and returns
/// `(subject, status)` pairs, status being `Fail`, `Unknown` or `NoValidMns`.
#[pyfunction]
#[pyo3(signature = (graph, test, treatment="X", overrides=None))]
fn faithfulness(
    graph: PyRef<'_, Graph>,
    test: &str,
    treatment: &str,
    overrides: Option<&str>,
) -> PyResult<Vec<(Vec<String>, String)>> {
    let (src, names) = source(&Engine::Graph(&graph, overrides))?;
    let x = index(&graph.dag, treatment)?;
    let mut out = Vec::new();
    match test {
        "mff" => {
            let ls = discovery::discover(&src, x, Algorithm::Ldecc).map_err(ci_err)?;
            let ne = ls.neighbors();
            for v in (0..names.len()).filter(|v| *v != x && !ne.contains(v)) {
                let verdict = test_mff(&src, x, &ne, v).map_err(ci_err)?;
                out.push((vec![names[v].clone()], format!("{:?}", verdict.status)));
            }
        }
        "sd" => {
            let ls = run_sd(&src, x, false).map_err(ci_err)?;
            for (uc, _, verdict) in test_sd_result(&src, &ls).map_err(ci_err)? {
                let subject = [uc.p, uc.r, uc.q].iter().map(|&v| names[v].clone()).collect();
                out.push((subject, format!("{:?}", verdict.status)));
            }
        }
        other => return Err(PyValueError::new_err(format!("unknown tester `{other}`"))),
    }
    Ok(out)
}

/// Hybrid procedure: returns whether it switched algorithms and the ATE
/// set it settled on.
#[pyfunction]
#[pyo3(signature = (graph, model, treatment="X", outcome="Y", order="sd-first", overrides=None))]
fn hybrid(
    graph: PyRef<'_, Graph>,
    model: PyRef<'_, Model>,
    treatment: &str,
    outcome: &str,
    order: &str,
    overrides: Option<&str>,
) -> PyResult<(bool, Vec<(Vec<String>, f64)>)> {
    let order = match order {
        "sd-first" => HybridOrder::SdFirst,
        "ldecc-first" => HybridOrder::LdeccFirst,
        other => return Err(PyValueError::new_err(format!("unknown order `{other}`"))),
    };
    let (src, names) = source(&Engine::Graph(&graph, overrides))?;
    let x = index(&graph.dag, treatment)?;
    let y = index(&graph.dag, outcome)?;
    let h = hybrid_procedure(&src, x, y, order, &model.model.covariance()).map_err(ci_err)?;
    let entries = h
        .ate
        .entries
        .iter()
        .map(|e| (named(&names, &e.set), e.theta))
        .collect();
    Ok((h.switched, entries))
}

/// Squared Hausdorff distance between two nonempty sets of effects.
#[pyfunction]
fn hausdorff_sq(a: Vec<f64>, b: Vec<f64>) -> PyResult<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(PyValueError::new_err("both sets must be nonempty"));
    }
    Ok(core_hausdorff_sq(&a, &b))
}

#[pymodule]
fn lcd(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Graph>()?;
    m.add_class::<Model>()?;
    m.add_class::<Data>()?;
    m.add_class::<Structure>()?;
    m.add_function(wrap_pyfunction!(discover, m)?)?;
    m.add_function(wrap_pyfunction!(optimal_adjustment_set, m)?)?;
    m.add_function(wrap_pyfunction!(faithfulness, m)?)?;
    m.add_function(wrap_pyfunction!(hybrid, m)?)?;
    m.add_function(wrap_pyfunction!(hausdorff_sq, m)?)?;
    m.add_function(wrap_pyfunction!(scenario_overrides, m)?)?;
    Ok(())
}
