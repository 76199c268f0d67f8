//! Conditional-independence queries, the engines answering them, and the
//! counting/caching source every algorithm talks to.

mod dataset;
mod gate;
mod iamb;

pub use dataset::{fisher_z_test, DataError, Dataset};
pub use gate::TurnGate;
pub use iamb::{find_markov_blanket, find_markov_blanket_within};

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use serde::Serialize;
use thiserror::Error;

use crate::graph::Dag;
use crate::NodeSet;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CiError {
    #[error("malformed query: {0}")]
    InvalidQuery(String),
    #[error("node index {0} is outside the engine's universe")]
    UnknownNode(usize),
    #[error("test budget of {0} queries exhausted")]
    CapReached(usize),
    #[error("degenerate test: conditioning set of size {size} needs more than {n} samples")]
    InsufficientSamples { size: usize, n: usize },
    #[error("singular correlation block; collinear columns: {0}")]
    Singular(String),
    #[error("run stopped because the competing run finished")]
    Aborted,
}

/// One test `a ⟂ b | s`, stored canonically (`a < b`, `s` sorted).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct CiQuery {
    a: usize,
    b: usize,
    s: Vec<usize>,
}

impl CiQuery {
    pub fn new<I: IntoIterator<Item = usize>>(a: usize, b: usize, s: I) -> Result<Self, CiError> {
        if a == b {
            return Err(CiError::InvalidQuery(format!("endpoints coincide ({a})")));
        }
        let mut s: Vec<usize> = s.into_iter().collect();
        s.sort_unstable();
        s.dedup();
        if s.binary_search(&a).is_ok() || s.binary_search(&b).is_ok() {
            return Err(CiError::InvalidQuery(
                "an endpoint appears in the conditioning set".into(),
            ));
        }
        let (a, b) = if a < b { (a, b) } else { (b, a) };
        Ok(Self { a, b, s })
    }

    pub fn a(&self) -> usize {
        self.a
    }

    pub fn b(&self) -> usize {
        self.b
    }

    pub fn s(&self) -> &[usize] {
        &self.s
    }

    pub fn s_set(&self) -> NodeSet {
        self.s.iter().copied().collect()
    }

    fn max_index(&self) -> usize {
        self.s.iter().copied().chain([self.a, self.b]).max().unwrap_or(0)
    }
}

/// Outcome of one test. Statistic and p-value are present only for
/// data-driven engines.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CiVerdict {
    pub independent: bool,
    pub statistic: Option<f64>,
    pub p_value: Option<f64>,
}

impl CiVerdict {
    pub fn exact(independent: bool) -> Self {
        Self {
            independent,
            statistic: None,
            p_value: None,
        }
    }
}

/// A verdict forced onto an exact query.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Override {
    pub query: CiQuery,
    pub independent: bool,
}

impl Override {
    pub fn new<I: IntoIterator<Item = usize>>(
        a: usize,
        b: usize,
        s: I,
        independent: bool,
    ) -> Result<Self, CiError> {
        Ok(Self {
            query: CiQuery::new(a, b, s)?,
            independent,
        })
    }
}

/// The three ways of answering a query.
#[derive(Debug, Clone)]
pub enum CiEngine {
    /// d-separation in a known DAG.
    Oracle(Arc<Dag>),
    /// Fisher-z partial-correlation test on a dataset.
    FisherZ { data: Arc<Dataset>, alpha: f64 },
    /// d-separation with a list of forced verdicts taking precedence.
    Scripted {
        dag: Arc<Dag>,
        overrides: Arc<HashMap<CiQuery, bool>>,
    },
}

impl CiEngine {
    pub fn scripted(dag: Arc<Dag>, overrides: &[Override]) -> Self {
        let map = overrides
            .iter()
            .map(|o| (o.query.clone(), o.independent))
            .collect();
        Self::Scripted {
            dag,
            overrides: Arc::new(map),
        }
    }

    /// Number of variables the engine knows about.
    pub fn universe(&self) -> usize {
        match self {
            Self::Oracle(g) | Self::Scripted { dag: g, .. } => g.n(),
            Self::FisherZ { data, .. } => data.p(),
        }
    }

    /// Node names in canonical order.
    pub fn names(&self) -> Vec<String> {
        match self {
            Self::Oracle(g) | Self::Scripted { dag: g, .. } => g.names().to_vec(),
            Self::FisherZ { data, .. } => data.names().to_vec(),
        }
    }

    pub fn evaluate(&self, q: &CiQuery) -> Result<CiVerdict, CiError> {
        if q.max_index() >= self.universe() {
            return Err(CiError::UnknownNode(q.max_index()));
        }
        match self {
            Self::Oracle(g) => Ok(CiVerdict::exact(d_sep(g, q))),
            Self::Scripted { dag, overrides } => Ok(CiVerdict::exact(
                overrides.get(q).copied().unwrap_or_else(|| d_sep(dag, q)),
            )),
            Self::FisherZ { data, alpha } => fisher_z_test(data, q, *alpha),
        }
    }
}

fn d_sep(g: &Dag, q: &CiQuery) -> bool {
    g.d_separated(q.a, q.b, &q.s_set())
        .expect("indices validated against the universe")
}

/// One evaluated query, in evaluation order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceEntry {
    pub query: CiQuery,
    pub verdict: CiVerdict,
}

#[derive(Debug, Default)]
struct SourceState {
    cache: HashMap<CiQuery, CiVerdict>,
    evaluated: usize,
    requested: usize,
    trace: Vec<TraceEntry>,
}

/// A counting, caching front end over a [`CiEngine`].
///
/// `tests_used` counts distinct evaluated queries: with the cache on it
/// equals the cache size, with the cache off it counts every evaluation.
/// `requests` counts every call, including cache hits.
#[derive(Debug)]
pub struct CiSource {
    engine: CiEngine,
    cache_enabled: bool,
    tracing: bool,
    cap: Option<usize>,
    state: Mutex<SourceState>,
    gate: Option<(Arc<TurnGate>, usize)>,
}

impl CiSource {
    pub fn new(engine: CiEngine) -> Self {
        Self {
            engine,
            cache_enabled: true,
            tracing: false,
            cap: None,
            state: Mutex::new(SourceState::default()),
            gate: None,
        }
    }

    pub fn oracle(dag: Arc<Dag>) -> Self {
        Self::new(CiEngine::Oracle(dag))
    }

    pub fn scripted(dag: Arc<Dag>, overrides: &[Override]) -> Self {
        Self::new(CiEngine::scripted(dag, overrides))
    }

    pub fn fisher_z(data: Arc<Dataset>, alpha: f64) -> Result<Self, CiError> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(CiError::InvalidQuery(format!(
                "significance {alpha} outside (0, 1)"
            )));
        }
        Ok(Self::new(CiEngine::FisherZ { data, alpha }))
    }

    pub fn with_cache(mut self, enabled: bool) -> Self {
        self.cache_enabled = enabled;
        self
    }

    pub fn with_cap(mut self, cap: Option<usize>) -> Self {
        self.cap = cap;
        self
    }

    pub fn with_trace(mut self, enabled: bool) -> Self {
        self.tracing = enabled;
        self
    }

    /// Makes every evaluated query wait for this side's turn at `gate`.
    pub fn with_gate(mut self, gate: Arc<TurnGate>, side: usize) -> Self {
        self.gate = Some((gate, side));
        self
    }

    pub fn engine(&self) -> &CiEngine {
        &self.engine
    }

    pub fn n(&self) -> usize {
        self.engine.universe()
    }

    pub fn names(&self) -> Vec<String> {
        self.engine.names()
    }

    pub fn query(&self, q: &CiQuery) -> Result<CiVerdict, CiError> {
        {
            let mut st = self.state.lock().unwrap();
            st.requested += 1;
            if self.cache_enabled {
                if let Some(v) = st.cache.get(q) {
                    return Ok(*v);
                }
            }
            if let Some(cap) = self.cap {
                if st.evaluated >= cap {
                    return Err(CiError::CapReached(cap));
                }
            }
        }
        if let Some((gate, side)) = &self.gate {
            gate.acquire(*side)?;
        }
        let verdict = self.engine.evaluate(q)?;
        let mut st = self.state.lock().unwrap();
        st.evaluated += 1;
        if self.cache_enabled {
            st.cache.insert(q.clone(), verdict);
        }
        if self.tracing {
            st.trace.push(TraceEntry {
                query: q.clone(),
                verdict,
            });
        }
        Ok(verdict)
    }

    /// `a ⟂ b | s` as a boolean.
    pub fn independent(&self, a: usize, b: usize, s: &NodeSet) -> Result<bool, CiError> {
        let q = CiQuery::new(a, b, s.iter().copied())?;
        self.query(&q).map(|v| v.independent)
    }

    /// Distinct evaluated queries.
    pub fn tests_used(&self) -> usize {
        self.state.lock().unwrap().evaluated
    }

    /// Every call, including cache hits.
    pub fn requests(&self) -> usize {
        self.state.lock().unwrap().requested
    }

    pub fn cache_size(&self) -> usize {
        self.state.lock().unwrap().cache.len()
    }

    pub fn trace(&self) -> Vec<TraceEntry> {
        self.state.lock().unwrap().trace.clone()
    }

    /// A fresh source over the same engine with the same cache, cap and
    /// trace settings, no history and no gate.
    pub fn fork(&self) -> CiSource {
        CiSource {
            engine: self.engine.clone(),
            cache_enabled: self.cache_enabled,
            tracing: self.tracing,
            cap: self.cap,
            state: Mutex::new(SourceState::default()),
            gate: None,
        }
    }

    pub(crate) fn release_gate(&self, succeeded: bool) {
        if let Some((gate, side)) = &self.gate {
            gate.finish(*side, succeeded);
        }
    }
}
