//! From local structure to treatment effects: locally valid parent sets,
//! population and sample effect estimates, the generalized backdoor check,
//! the optimal adjustment set, and evaluation metrics.

mod gbc;
mod metrics;

pub use gbc::{check_gbc, optimal_adjustment_set, possible_descendants, GbcReport, OptimalSet};
pub use metrics::{hausdorff_sq, metrics, Metrics, RunRecord};

use std::collections::BTreeSet;

use itertools::Itertools;
use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use thiserror::Error;

use crate::ci::Dataset;
use crate::discovery::LocalStructure;
use crate::NodeSet;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AdjustmentError {
    #[error("singular covariance block for regressors {0:?}")]
    Singular(Vec<usize>),
    #[error("rank-deficient design for regressors {0:?}")]
    RankDeficient(Vec<usize>),
    #[error("need more than {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("adjustment set contains the treatment or outcome")]
    InvalidSet,
    #[error("node index {0} out of range")]
    UnknownNode(usize),
}

/// One candidate effect: the adjustment set and the estimate it yields.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AteEntry {
    pub set: NodeSet,
    pub theta: f64,
}

/// Candidate effects keyed by adjustment set, sorted by set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AteSet {
    pub source: String,
    pub entries: Vec<AteEntry>,
}

impl AteSet {
    pub fn new(source: impl Into<String>) -> Self {
        Self {
            source: source.into(),
            entries: Vec::new(),
        }
    }

    /// Inserts an entry; an existing entry for the same set is kept.
    pub fn insert(&mut self, set: NodeSet, theta: f64) {
        if let Err(pos) = self.entries.binary_search_by(|e| e.set.cmp(&set)) {
            self.entries.insert(pos, AteEntry { set, theta });
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn sets(&self) -> BTreeSet<NodeSet> {
        self.entries.iter().map(|e| e.set.clone()).collect()
    }

    pub fn thetas(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.theta).collect()
    }

    pub fn get(&self, set: &NodeSet) -> Option<f64> {
        self.entries
            .binary_search_by(|e| e.set.cmp(set))
            .ok()
            .map(|i| self.entries[i].theta)
    }

    pub fn contains_set(&self, set: &NodeSet) -> bool {
        self.get(set).is_some()
    }

    /// Entries of both, `self` winning on shared sets.
    pub fn union(&self, other: &AteSet, source: impl Into<String>) -> AteSet {
        let mut out = AteSet::new(source);
        for e in self.entries.iter().chain(&other.entries) {
            out.insert(e.set.clone(), e.theta);
        }
        out
    }
}

/// Something that can produce the effect of `x` on `y` adjusting for `s`.
pub trait EffectEstimator {
    fn theta(&self, x: usize, y: usize, s: &NodeSet) -> Result<f64, AdjustmentError>;
}

/// Covariance matrix of a linear SEM in canonical node order.
#[derive(Debug, Clone, PartialEq)]
pub struct SemCovariance {
    pub sigma: DMatrix<f64>,
}

impl SemCovariance {
    pub fn new(sigma: DMatrix<f64>) -> Self {
        Self { sigma }
    }
}

fn check_set(x: usize, y: usize, s: &NodeSet, n: usize) -> Result<(), AdjustmentError> {
    if let Some(&bad) = s.iter().chain([&x, &y]).find(|&&v| v >= n) {
        return Err(AdjustmentError::UnknownNode(bad));
    }
    if s.contains(&x) || s.contains(&y) {
        return Err(AdjustmentError::InvalidSet);
    }
    Ok(())
}

impl EffectEstimator for SemCovariance {
    /// Coefficient of `x` in the population regression of `y` on `{x} ∪ s`.
    fn theta(&self, x: usize, y: usize, s: &NodeSet) -> Result<f64, AdjustmentError> {
        check_set(x, y, s, self.sigma.nrows())?;
        let regs: Vec<usize> = std::iter::once(x).chain(s.iter().copied()).collect();
        let k = regs.len();
        let szz = DMatrix::from_fn(k, k, |i, j| self.sigma[(regs[i], regs[j])]);
        let szy = DVector::from_fn(k, |i, _| self.sigma[(regs[i], y)]);
        let chol = szz
            .cholesky()
            .ok_or_else(|| AdjustmentError::Singular(regs.clone()))?;
        Ok(chol.solve(&szy)[0])
    }
}

const RANK_TOL: f64 = 1e-10;

impl EffectEstimator for Dataset {
    /// Ordinary least squares coefficient of `x` regressing `y` on `{x} ∪ s`
    /// with an intercept.
    fn theta(&self, x: usize, y: usize, s: &NodeSet) -> Result<f64, AdjustmentError> {
        check_set(x, y, s, self.p())?;
        let regs: Vec<usize> = std::iter::once(x).chain(s.iter().copied()).collect();
        let n = self.n();
        if n <= regs.len() + 1 {
            return Err(AdjustmentError::TooFewSamples {
                needed: regs.len() + 1,
                got: n,
            });
        }
        let values = self.values();
        let centered = |j: usize| {
            let col = values.column(j);
            let mean = col.mean();
            col.map(|v| v - mean)
        };
        let yc = centered(y);
        let mut design = DMatrix::zeros(n, regs.len());
        let mut scale = Vec::with_capacity(regs.len());
        let y_norm = yc.norm().max(1.0);
        for (k, &j) in regs.iter().enumerate() {
            let c = centered(j);
            let norm = c.norm();
            let raw_norm = values.column(j).norm().max(1.0);
            if norm <= RANK_TOL * raw_norm {
                return Err(AdjustmentError::RankDeficient(regs.clone()));
            }
            design.set_column(k, &(c / norm));
            scale.push(norm);
        }
        let gram = design.transpose() * &design;
        let svd = gram.clone().svd(true, true);
        let max_sv = svd.singular_values.max();
        if svd.singular_values.min() <= RANK_TOL * max_sv {
            return Err(AdjustmentError::RankDeficient(regs));
        }
        let rhs = design.transpose() * (&yc / y_norm);
        let beta = svd
            .solve(&rhs, RANK_TOL)
            .map_err(|_| AdjustmentError::RankDeficient(regs.clone()))?;
        Ok(beta[0] * y_norm / scale[0])
    }
}

/// Population effect of `x` on `y` adjusting for `s`.
pub fn population_theta(
    sigma: &SemCovariance,
    x: usize,
    y: usize,
    s: &NodeSet,
) -> Result<f64, AdjustmentError> {
    sigma.theta(x, y, s)
}

/// OLS effect estimate of `x` on `y` adjusting for `s`.
pub fn estimate_theta(
    data: &Dataset,
    x: usize,
    y: usize,
    s: &NodeSet,
) -> Result<f64, AdjustmentError> {
    data.theta(x, y, s)
}

/// Every parent set of the target consistent with the local structure:
/// all known parents plus any subset of the unoriented neighbors, as long
/// as no two members form a recorded non-collider. Ordered by the number
/// of added neighbors, then lexicographically.
pub fn locally_valid_parent_sets(ls: &LocalStructure) -> Vec<NodeSet> {
    let unoriented: Vec<usize> = ls.unoriented.iter().copied().collect();
    let mut out = Vec::new();
    for size in 0..=unoriented.len() {
        for extra in unoriented.iter().copied().combinations(size) {
            let s: NodeSet = ls.parents.iter().copied().chain(extra).collect();
            let members: Vec<usize> = s.iter().copied().collect();
            let valid = members
                .iter()
                .tuple_combinations()
                .all(|(&a, &b)| !ls.is_non_collider(a, b));
            if valid {
                out.push(s);
            }
        }
    }
    out
}

/// ATE set of a discovery result: one entry per locally valid parent set.
/// A set containing `y` means `y` causes `x`, so its effect is zero.
pub fn ate_set<E: EffectEstimator + ?Sized>(
    ls: &LocalStructure,
    y: usize,
    estimator: &E,
    source: &str,
) -> Result<AteSet, AdjustmentError> {
    let mut out = AteSet::new(source);
    for s in locally_valid_parent_sets(ls) {
        let theta = if s.contains(&y) {
            0.0
        } else {
            estimator.theta(ls.target, y, &s)?
        };
        out.insert(s, theta);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::node_set;

    fn sigma_of(b: &[(usize, usize, f64)], noise: &[f64]) -> SemCovariance {
        let n = noise.len();
        let mut bm = DMatrix::zeros(n, n);
        for &(i, j, w) in b {
            bm[(i, j)] = w;
        }
        let inv = (DMatrix::identity(n, n) - bm).try_inverse().unwrap();
        let d = DMatrix::from_diagonal(&DVector::from_row_slice(noise));
        SemCovariance::new(inv.transpose() * d * inv)
    }

    #[test]
    fn chain_effect_is_product() {
        let s = sigma_of(&[(0, 1, 0.5), (1, 2, 0.5)], &[1.0, 1.0, 1.0]);
        assert!((s.theta(0, 2, &NodeSet::new()).unwrap() - 0.25).abs() < 1e-12);
    }

    #[test]
    fn confounder_adjustment() {
        // W=0, X=1, Y=2
        let s = sigma_of(&[(0, 1, 0.8), (0, 2, 0.5), (1, 2, 0.3)], &[1.0, 1.0, 1.0]);
        assert!((s.theta(1, 2, &node_set([0])).unwrap() - 0.3).abs() < 1e-12);
        assert!((s.theta(1, 2, &NodeSet::new()).unwrap() - 0.3).abs() > 0.05);
    }

    #[test]
    fn ols_identity_and_rank() {
        let x = [0.3, -1.2, 0.8, 2.2, -0.4, 1.0];
        let d = Dataset::new(
            vec!["X".into(), "Y".into(), "K".into()],
            DMatrix::from_fn(6, 3, |i, j| if j == 2 { 4.0 } else { x[i] }),
        )
        .unwrap();
        assert!((d.theta(0, 1, &NodeSet::new()).unwrap() - 1.0).abs() < 1e-12);
        assert!(matches!(
            d.theta(2, 1, &NodeSet::new()),
            Err(AdjustmentError::RankDeficient(_))
        ));
    }

    #[test]
    fn valid_parent_sets() {
        let mut ls = LocalStructure::new(0);
        ls.parents = node_set([1]);
        assert_eq!(locally_valid_parent_sets(&ls), vec![node_set([1])]);

        let mut ls = LocalStructure::new(0);
        ls.unoriented = node_set([1, 2]);
        ls.mark_non_collider(1, 2);
        assert_eq!(
            locally_valid_parent_sets(&ls),
            vec![NodeSet::new(), node_set([1]), node_set([2])]
        );

        let mut ls = LocalStructure::new(0);
        ls.parents = node_set([1]);
        ls.unoriented = node_set([2]);
        assert_eq!(
            locally_valid_parent_sets(&ls),
            vec![node_set([1]), node_set([1, 2])]
        );
    }

    #[test]
    fn ate_set_dedupes_and_unions() {
        let mut a = AteSet::new("a");
        a.insert(node_set([1]), 0.5);
        a.insert(node_set([1]), 0.9);
        let mut b = AteSet::new("b");
        b.insert(node_set([2]), 0.1);
        let u = a.union(&b, "u");
        assert_eq!(u.len(), 2);
        assert_eq!(u.get(&node_set([1])), Some(0.5));
        assert_eq!(a.union(&a, "same").sets(), a.sets());
    }
}
