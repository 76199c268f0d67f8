//! Seeded generators: random graphs, linear-Gaussian SEM parameters and
//! samples drawn from them.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::adjustment::SemCovariance;
use crate::ci::Dataset;
use crate::fixtures;
use crate::graph::Dag;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SynthError {
    #[error("probability `{name}` = {value} outside [0, 1]")]
    Probability { name: &'static str, value: f64 },
    #[error("size `{0}` must be at least 1")]
    Size(&'static str),
    #[error("edge weight or noise variance refers to an unknown edge or node")]
    Mismatch,
}

/// Edge probabilities and sizes of the covariate/mediator design.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CovMed {
    pub n_c: usize,
    pub n_m: usize,
    pub p_cx: f64,
    pub p_cc: f64,
    pub p_cy: f64,
    pub p_mx: f64,
    pub p_mm: f64,
    pub p_my: f64,
    pub p_cm: f64,
}

impl Default for CovMed {
    fn default() -> Self {
        Self {
            n_c: 20,
            n_m: 3,
            p_cx: 0.1,
            p_cc: 0.1,
            p_cy: 0.1,
            p_mx: 0.1,
            p_mm: 0.1,
            p_my: 0.1,
            p_cm: 0.05,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DgpKind {
    CovMed(CovMed),
    ErdosRenyi { n: usize, p: f64 },
    Fig5a { clique: usize },
    Fig5b { sep: usize, clique: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DgpConfig {
    #[serde(flatten)]
    pub kind: DgpKind,
    #[serde(default)]
    pub seed: u64,
}

impl DgpConfig {
    pub fn new(kind: DgpKind, seed: u64) -> Self {
        Self { kind, seed }
    }

    fn validate(&self) -> Result<(), SynthError> {
        let prob = |name, value: f64| {
            if (0.0..=1.0).contains(&value) {
                Ok(())
            } else {
                Err(SynthError::Probability { name, value })
            }
        };
        let size = |name, v: usize| if v >= 1 { Ok(()) } else { Err(SynthError::Size(name)) };
        match self.kind {
            DgpKind::CovMed(c) => {
                for (name, v) in [
                    ("p_cx", c.p_cx),
                    ("p_cc", c.p_cc),
                    ("p_cy", c.p_cy),
                    ("p_mx", c.p_mx),
                    ("p_mm", c.p_mm),
                    ("p_my", c.p_my),
                    ("p_cm", c.p_cm),
                ] {
                    prob(name, v)?;
                }
                size("n_c", c.n_c)?;
                size("n_m", c.n_m)
            }
            DgpKind::ErdosRenyi { n, p } => {
                prob("p", p)?;
                size("n", n)
            }
            DgpKind::Fig5a { clique } => size("clique", clique),
            DgpKind::Fig5b { sep, clique } => {
                size("sep", sep)?;
                size("clique", clique)
            }
        }
    }

    /// Treatment and outcome of a generated graph. Named designs use `X`
    /// and `Y`; random graphs draw the treatment from the seed and take its
    /// first child (or the last other node) as outcome.
    pub fn roles(&self, g: &Dag) -> (usize, usize) {
        if let (Some(x), Some(y)) = (g.index_of("X"), g.index_of("Y")) {
            return (x, y);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ 0x9e37_79b9_7f4a_7c15);
        let x = rng.random_range(0..g.n());
        let y = g
            .children(x)
            .first()
            .copied()
            .unwrap_or(if x + 1 == g.n() { 0 } else { g.n() - 1 });
        (x, y)
    }
}

fn numbered(prefix: &str, k: usize) -> Vec<String> {
    (1..=k).map(|i| format!("{prefix}{i}")).collect()
}

/// Generates the graph described by `cfg`, deterministically in its seed.
///
/// Covariate/mediator node order is `C1..Cn, X, M1..Mm, Y`; every edge
/// points forward in that order, covariate-mediator edges included.
pub fn generate_graph(cfg: &DgpConfig) -> Result<Dag, SynthError> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    match cfg.kind {
        DgpKind::CovMed(c) => {
            let cs = numbered("C", c.n_c);
            let ms = numbered("M", c.n_m);
            let mut names = cs.clone();
            names.push("X".into());
            names.extend(ms.iter().cloned());
            names.push("Y".into());
            let mut g = Dag::new(&names).expect("unique names");
            let x = c.n_c;
            let m0 = x + 1;
            let y = m0 + c.n_m;
            let mut maybe = |g: &mut Dag, a: usize, b: usize, p: f64| {
                if rng.random_bool(p) {
                    g.add_edge(a, b).expect("forward edges are acyclic");
                }
            };
            for i in 0..c.n_c {
                for j in i + 1..c.n_c {
                    maybe(&mut g, i, j, c.p_cc);
                }
                maybe(&mut g, i, x, c.p_cx);
                maybe(&mut g, i, y, c.p_cy);
                for k in 0..c.n_m {
                    maybe(&mut g, i, m0 + k, c.p_cm);
                }
            }
            for k in 0..c.n_m {
                maybe(&mut g, x, m0 + k, c.p_mx);
                for l in k + 1..c.n_m {
                    maybe(&mut g, m0 + k, m0 + l, c.p_mm);
                }
                maybe(&mut g, m0 + k, y, c.p_my);
            }
            Ok(g)
        }
        DgpKind::ErdosRenyi { n, p } => {
            let mut g = Dag::new(&numbered("V", n)).expect("unique names");
            for i in 0..n {
                for j in i + 1..n {
                    if rng.random_bool(p) {
                        g.add_edge(i, j).expect("forward edges are acyclic");
                    }
                }
            }
            Ok(g)
        }
        DgpKind::Fig5a { clique } => Ok(fixtures::fig5a(clique)),
        DgpKind::Fig5b { sep, clique } => Ok(fixtures::fig5b(sep, clique)),
    }
}

/// A linear-Gaussian structural equation model over a DAG.
#[derive(Debug, Clone, PartialEq)]
pub struct SemModel {
    pub graph: Dag,
    /// Coefficient of each `(parent, child)` edge.
    pub weights: BTreeMap<(usize, usize), f64>,
    /// Noise variance per node, in canonical order.
    pub noise_var: Vec<f64>,
}

impl SemModel {
    pub fn new(
        graph: Dag,
        weights: BTreeMap<(usize, usize), f64>,
        noise_var: Vec<f64>,
    ) -> Result<Self, SynthError> {
        let edges_match = weights.len() == graph.edge_count()
            && weights.keys().all(|&(a, b)| graph.has_edge(a, b));
        if !edges_match || noise_var.len() != graph.n() || noise_var.iter().any(|v| *v <= 0.0) {
            return Err(SynthError::Mismatch);
        }
        Ok(Self {
            graph,
            weights,
            noise_var,
        })
    }

    /// Weighted adjacency, row = parent, column = child.
    pub fn coefficients(&self) -> DMatrix<f64> {
        let n = self.graph.n();
        let mut b = DMatrix::zeros(n, n);
        for (&(a, c), &w) in &self.weights {
            b[(a, c)] = w;
        }
        b
    }

    /// `(I - B)^-1`; entry `(a, c)` sums edge-weight products over directed
    /// paths from `a` to `c`.
    fn path_sums(&self) -> DMatrix<f64> {
        let n = self.graph.n();
        (DMatrix::identity(n, n) - self.coefficients())
            .try_inverse()
            .expect("I - B is unit triangular under a topological order")
    }

    /// Implied covariance `(I - B)^-T D (I - B)^-1`.
    pub fn covariance(&self) -> SemCovariance {
        let inv = self.path_sums();
        let d = DMatrix::from_diagonal(&DVector::from_row_slice(&self.noise_var));
        SemCovariance::new(inv.transpose() * d * inv)
    }

    /// Total causal effect of `x` on `y`.
    pub fn total_effect(&self, x: usize, y: usize) -> f64 {
        self.path_sums()[(x, y)]
    }
}

/// Draws edge weights uniformly from `[-1, -0.25] ∪ [0.25, 1]` and noise
/// variances uniformly from `[0.1, 0.2]`.
pub fn sample_sem(g: &Dag, seed: u64) -> SemModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut weights = BTreeMap::new();
    for (a, b) in g.edges() {
        let mag = rng.random_range(0.25..=1.0);
        let w = if rng.random_bool(0.5) { mag } else { -mag };
        weights.insert((a, b), w);
    }
    let noise_var = (0..g.n()).map(|_| rng.random_range(0.1..=0.2)).collect();
    SemModel {
        graph: g.clone(),
        weights,
        noise_var,
    }
}

/// Ancestral sampling of `n` rows; columns follow canonical node order.
pub fn sample_data(model: &SemModel, n: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = &model.graph;
    let order = g.topological_order();
    let noise: Vec<Normal<f64>> = model
        .noise_var
        .iter()
        .map(|v| Normal::new(0.0, v.sqrt()).expect("positive variance"))
        .collect();
    let mut values = DMatrix::zeros(n, g.n());
    for row in 0..n {
        for &v in &order {
            let mean: f64 = g
                .parents(v)
                .iter()
                .map(|&p| model.weights[&(p, v)] * values[(row, p)])
                .sum();
            values[(row, v)] = mean + noise[v].sample(&mut rng);
        }
    }
    Dataset::new(g.names().to_vec(), values).expect("shape matches the graph")
}
