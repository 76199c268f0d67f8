use serde::Serialize;

use super::AteSet;
use crate::NodeSet;

/// One evaluated run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    /// ATE set from the run under evaluation.
    pub estimated: AteSet,
    /// ATE set of the same algorithm under the exact CI oracle, carrying the
    /// true effect values.
    pub reference: AteSet,
    /// Parents of the treatment in the true graph.
    pub true_parents: NodeSet,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metrics {
    pub accuracy: f64,
    pub recall: f64,
    /// `None` when every estimate was empty.
    pub mse_hausdorff: Option<f64>,
    pub n_runs: usize,
    pub empty_estimates: usize,
}

/// Squared Hausdorff distance between two nonempty finite sets of reals.
pub fn hausdorff_sq(a: &[f64], b: &[f64]) -> f64 {
    let directed = |from: &[f64], to: &[f64]| {
        from.iter()
            .map(|u| {
                to.iter()
                    .map(|v| (u - v).powi(2))
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(f64::NEG_INFINITY, f64::max)
    };
    directed(a, b).max(directed(b, a))
}

/// Accuracy (estimated adjustment sets equal the oracle run's), recall (the
/// true parent set is among the estimated sets) and mean squared Hausdorff
/// distance to the true effect values. Runs with an empty estimate are left
/// out of the distance and counted separately.
pub fn metrics(runs: &[RunRecord]) -> Metrics {
    let n = runs.len();
    let frac = |k: usize| if n == 0 { 0.0 } else { k as f64 / n as f64 };
    let accurate = runs
        .iter()
        .filter(|r| r.estimated.sets() == r.reference.sets())
        .count();
    let recalled = runs
        .iter()
        .filter(|r| r.estimated.contains_set(&r.true_parents))
        .count();
    let mut total = 0.0;
    let mut counted = 0;
    let mut empty = 0;
    for r in runs {
        if r.estimated.is_empty() || r.reference.is_empty() {
            empty += 1;
            continue;
        }
        total += hausdorff_sq(&r.estimated.thetas(), &r.reference.thetas());
        counted += 1;
    }
    Metrics {
        accuracy: frac(accurate),
        recall: frac(recalled),
        mse_hausdorff: (counted > 0).then(|| total / counted as f64),
        n_runs: n,
        empty_estimates: empty,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::node_set;

    fn ate(entries: &[(&[usize], f64)]) -> AteSet {
        let mut a = AteSet::new("t");
        for (s, t) in entries {
            a.insert(node_set(s.iter().copied()), *t);
        }
        a
    }

    #[test]
    fn hausdorff_hand_values() {
        assert_eq!(hausdorff_sq(&[0.0, 2.0], &[1.0]), 1.0);
        assert_eq!(hausdorff_sq(&[1.0], &[1.0]), 0.0);
        assert_eq!(hausdorff_sq(&[0.0], &[3.0, 1.0]), 9.0);
    }

    #[test]
    fn perfect_runs() {
        let r = RunRecord {
            estimated: ate(&[(&[1], 1.0)]),
            reference: ate(&[(&[1], 1.0)]),
            true_parents: node_set([1]),
        };
        let m = metrics(&[r.clone(), r]);
        assert_eq!((m.accuracy, m.recall, m.mse_hausdorff), (1.0, 1.0, Some(0.0)));
    }

    #[test]
    fn missing_parent_set_costs_recall() {
        let r = RunRecord {
            estimated: ate(&[(&[2], 0.4)]),
            reference: ate(&[(&[1], 1.0)]),
            true_parents: node_set([1]),
        };
        let m = metrics(&[r]);
        assert_eq!((m.accuracy, m.recall), (0.0, 0.0));
    }

    #[test]
    fn empty_estimate_is_excluded() {
        let r = RunRecord {
            estimated: AteSet::new("t"),
            reference: ate(&[(&[1], 1.0)]),
            true_parents: node_set([1]),
        };
        let m = metrics(&[r]);
        assert_eq!(m.empty_estimates, 1);
        assert_eq!(m.mse_hausdorff, None);
    }
}
