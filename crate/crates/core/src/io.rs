//! File formats: graph JSON and text edge lists, override lists, and the
//! named JSON reports emitted for discovery results and ATE sets.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::adjustment::AteSet;
use crate::ci::{CiError, Override, TraceEntry};
use crate::discovery::LocalStructure;
use crate::graph::{Dag, GraphError};
use crate::synth::{SemModel, SynthError};
use crate::NodeSet;

/// Version tag carried by every report.
pub const SCHEMA: &str = "lcd/1";

#[derive(Debug, Error)]
pub enum IoError {
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("line {line}: {msg}")]
    EdgeList { line: usize, msg: String },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Query(#[from] CiError),
    #[error("weights must be given for every edge or for none; noise variances for every node or none")]
    PartialParameters,
    #[error(transparent)]
    Model(#[from] SynthError),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct EdgeRecord {
    from: String,
    to: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    weight: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct GraphRecord {
    nodes: Vec<String>,
    #[serde(default)]
    edges: Vec<EdgeRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    noise_var: Option<BTreeMap<String, f64>>,
}

/// A parsed graph file: the structure plus whatever SEM parameters it
/// carried.
#[derive(Debug, Clone)]
pub struct GraphFile {
    pub dag: Dag,
    pub weights: Option<BTreeMap<(usize, usize), f64>>,
    pub noise_var: Option<Vec<f64>>,
}

impl GraphFile {
    /// The SEM, when both weights and noise variances were given.
    pub fn model(&self) -> Option<SemModel> {
        let (w, nv) = (self.weights.as_ref()?, self.noise_var.as_ref()?);
        SemModel::new(self.dag.clone(), w.clone(), nv.clone()).ok()
    }
}

fn assemble(
    nodes: &[String],
    edges: &[EdgeRecord],
    noise: Option<&BTreeMap<String, f64>>,
) -> Result<GraphFile, IoError> {
    let mut dag = Dag::new(nodes)?;
    let mut weights = BTreeMap::new();
    for e in edges {
        let (a, b) = (dag.require(&e.from)?, dag.require(&e.to)?);
        dag.add_edge(a, b)?;
        if let Some(w) = e.weight {
            weights.insert((a, b), w);
        }
    }
    let noise_var = match noise {
        None => None,
        Some(map) => {
            let mut out = vec![f64::NAN; dag.n()];
            for (name, v) in map {
                out[dag.require(name)?] = *v;
            }
            if out.iter().any(|v| v.is_nan()) {
                return Err(IoError::PartialParameters);
            }
            Some(out)
        }
    };
    if !weights.is_empty() && weights.len() != dag.edge_count() {
        return Err(IoError::PartialParameters);
    }
    let weights = (!weights.is_empty() || dag.edge_count() == 0 && noise_var.is_some())
        .then_some(weights);
    if let (Some(w), Some(nv)) = (&weights, &noise_var) {
        SemModel::new(dag.clone(), w.clone(), nv.clone())?;
    }
    Ok(GraphFile {
        dag,
        weights,
        noise_var,
    })
}

/// Parses a graph from JSON (`{"nodes": [...], "edges": [...]}`) or from a
/// text edge list with one `A -> B [weight]` per line. In an edge list,
/// nodes take the order of first appearance; a line holding a single name
/// declares an isolated node, and `#` starts a comment.
pub fn parse_graph(text: &str) -> Result<GraphFile, IoError> {
    if text.trim_start().starts_with('{') {
        let rec: GraphRecord = serde_json::from_str(text)?;
        return assemble(&rec.nodes, &rec.edges, rec.noise_var.as_ref());
    }
    let mut nodes: Vec<String> = Vec::new();
    let mut edges = Vec::new();
    let declare = |name: &str, nodes: &mut Vec<String>| {
        if !nodes.iter().any(|n| n == name) {
            nodes.push(name.to_string());
        }
    };
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let bad = |msg: &str| IoError::EdgeList {
            line: i + 1,
            msg: msg.to_string(),
        };
        let Some((from, rest)) = line.split_once("->") else {
            if line.split_whitespace().count() != 1 {
                return Err(bad("expected `A -> B [weight]` or a single node name"));
            }
            declare(line, &mut nodes);
            continue;
        };
        let from = from.trim();
        let mut parts = rest.split_whitespace();
        let to = parts.next().ok_or_else(|| bad("missing edge head"))?;
        let weight = parts
            .next()
            .map(|w| w.parse::<f64>().map_err(|_| bad("weight is not a number")))
            .transpose()?;
        if parts.next().is_some() || from.is_empty() || from.contains(char::is_whitespace) {
            return Err(bad("expected `A -> B [weight]`"));
        }
        declare(from, &mut nodes);
        declare(to, &mut nodes);
        edges.push(EdgeRecord {
            from: from.to_string(),
            to: to.to_string(),
            weight,
        });
    }
    assemble(&nodes, &edges, None)
}

/// Graph JSON for a bare DAG.
pub fn graph_to_json(dag: &Dag) -> String {
    to_pretty(&graph_record(dag, None))
}

/// Graph JSON with edge weights and noise variances.
pub fn model_to_json(model: &SemModel) -> String {
    to_pretty(&graph_record(&model.graph, Some(model)))
}

fn graph_record(dag: &Dag, model: Option<&SemModel>) -> GraphRecord {
    let name = |v: usize| dag.name(v).to_string();
    GraphRecord {
        nodes: dag.names().to_vec(),
        edges: dag
            .edges()
            .into_iter()
            .map(|(a, b)| EdgeRecord {
                from: name(a),
                to: name(b),
                weight: model.map(|m| m.weights[&(a, b)]),
            })
            .collect(),
        noise_var: model.map(|m| {
            m.noise_var
                .iter()
                .enumerate()
                .map(|(v, s)| (name(v), *s))
                .collect()
        }),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct OverrideRecord {
    a: String,
    b: String,
    #[serde(default)]
    s: Vec<String>,
    independent: bool,
}

/// Parses a JSON list of forced verdicts against the node names of `dag`.
pub fn parse_overrides(text: &str, dag: &Dag) -> Result<Vec<Override>, IoError> {
    let recs: Vec<OverrideRecord> = serde_json::from_str(text)?;
    recs.iter()
        .map(|r| {
            let s = r
                .s
                .iter()
                .map(|n| dag.require(n))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(Override::new(
                dag.require(&r.a)?,
                dag.require(&r.b)?,
                s,
                r.independent,
            )?)
        })
        .collect()
}

pub fn overrides_to_json(overrides: &[Override], dag: &Dag) -> String {
    let recs: Vec<OverrideRecord> = overrides
        .iter()
        .map(|o| OverrideRecord {
            a: dag.name(o.query.a()).to_string(),
            b: dag.name(o.query.b()).to_string(),
            s: o.query.s().iter().map(|&v| dag.name(v).to_string()).collect(),
            independent: o.independent,
        })
        .collect();
    to_pretty(&recs)
}

fn names_of(names: &[String], s: &NodeSet) -> Vec<String> {
    s.iter().map(|&v| names[v].clone()).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceRecord {
    pub a: String,
    pub b: String,
    pub s: Vec<String>,
    pub independent: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub statistic: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_value: Option<f64>,
}

/// Discovery result with node names in place of indices.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscoveryReport {
    pub schema: &'static str,
    pub algorithm: String,
    pub target: String,
    pub parents: Vec<String>,
    pub children: Vec<String>,
    pub unoriented: Vec<String>,
    pub non_colliders: Vec<[String; 2]>,
    pub tests: usize,
    pub capped: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<Vec<TraceRecord>>,
}

impl DiscoveryReport {
    pub fn new(
        algorithm: &str,
        ls: &LocalStructure,
        names: &[String],
        trace: Option<&[TraceEntry]>,
    ) -> Self {
        Self {
            schema: SCHEMA,
            algorithm: algorithm.to_string(),
            target: names[ls.target].clone(),
            parents: names_of(names, &ls.parents),
            children: names_of(names, &ls.children),
            unoriented: names_of(names, &ls.unoriented),
            non_colliders: ls
                .non_colliders
                .iter()
                .map(|&(a, b)| [names[a].clone(), names[b].clone()])
                .collect(),
            tests: ls.tests_used,
            capped: ls.capped,
            trace: trace.map(|t| {
                t.iter()
                    .map(|e| TraceRecord {
                        a: names[e.query.a()].clone(),
                        b: names[e.query.b()].clone(),
                        s: e.query.s().iter().map(|&v| names[v].clone()).collect(),
                        independent: e.verdict.independent,
                        statistic: e.verdict.statistic,
                        p_value: e.verdict.p_value,
                    })
                    .collect()
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AteEntryReport {
    pub set: Vec<String>,
    pub theta: f64,
}

/// ATE set with node names in place of indices.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AteReport {
    pub schema: &'static str,
    pub source: String,
    pub treatment: String,
    pub outcome: String,
    pub entries: Vec<AteEntryReport>,
}

impl AteReport {
    pub fn new(ate: &AteSet, names: &[String], x: usize, y: usize) -> Self {
        Self {
            schema: SCHEMA,
            source: ate.source.clone(),
            treatment: names[x].clone(),
            outcome: names[y].clone(),
            entries: ate
                .entries
                .iter()
                .map(|e| AteEntryReport {
                    set: names_of(names, &e.set),
                    theta: e.theta,
                })
                .collect(),
        }
    }
}

/// Pretty JSON with a trailing newline.
pub fn to_pretty<T: Serialize + ?Sized>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::synth::sample_sem;

    #[test]
    fn edge_list_round_trip() {
        let g = parse_graph("# fig\nA -> W 0.5\nB -> W -1\nW -> X 2\nZ\n").unwrap();
        assert_eq!(g.dag.names(), ["A", "W", "B", "X", "Z"]);
        assert_eq!(g.dag.edge_count(), 3);
        assert_eq!(g.weights.as_ref().unwrap()[&(2, 1)], -1.0);
        assert!(g.model().is_none());
        assert!(matches!(
            parse_graph("A -> B 0.5\nB -> C\n"),
            Err(IoError::PartialParameters)
        ));
        let back = parse_graph(&graph_to_json(&g.dag)).unwrap();
        assert_eq!(back.dag, g.dag);
    }

    #[test]
    fn edge_list_errors_name_the_line() {
        let err = parse_graph("A -> B\nA -> B x\n").unwrap_err();
        assert!(matches!(err, IoError::EdgeList { line: 2, .. }));
        assert!(matches!(parse_graph("A -> B\nB -> A\n"), Err(IoError::Graph(_))));
    }

    #[test]
    fn model_round_trip() {
        let m = sample_sem(&fixtures::fig1(), 4);
        let back = parse_graph(&model_to_json(&m)).unwrap();
        assert_eq!(back.model().unwrap(), m);
    }

    #[test]
    fn partial_weights_rejected() {
        let text = r#"{"nodes":["A","B","C"],"edges":[{"from":"A","to":"B","weight":0.5},{"from":"B","to":"C"}],"noise_var":{"A":0.1,"B":0.1,"C":0.1}}"#;
        assert!(matches!(parse_graph(text), Err(IoError::PartialParameters)));
    }

    #[test]
    fn overrides_round_trip() {
        let s = fixtures::example18();
        let text = overrides_to_json(&s.overrides, &s.graph);
        assert_eq!(parse_overrides(&text, &s.graph).unwrap(), s.overrides);
        let bad = r#"[{"a":"Q","b":"X","s":[],"independent":true}]"#;
        assert!(parse_overrides(bad, &s.graph).is_err());
    }
}
