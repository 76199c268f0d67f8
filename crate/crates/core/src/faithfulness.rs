//! Testers for faithfulness violations that would mislead SD or LDECC, and
//! the two procedures built on them: the conservative union of both ATE
//! sets and the hybrid that switches algorithms on a detected violation.

use itertools::Itertools;
use serde::Serialize;

use crate::adjustment::{ate_set, AteSet, EffectEstimator};
use crate::ci::{CiError, CiQuery, CiSource, CiVerdict};
use crate::discovery::{run_ldecc, run_sd, LdeccOptions, LocalStructure};
use crate::graph::UnshieldedCollider;
use crate::NodeSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FaithfulnessStatus {
    /// A violation was detected.
    Fail,
    /// Nothing was detected; this says nothing about whether one exists.
    Unknown,
    /// No subset of the target's neighbors separates the node from it.
    NoValidMns,
}

/// A tester's call and the queries behind it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FaithfulnessVerdict {
    pub status: FaithfulnessStatus,
    pub evidence: Vec<(CiQuery, CiVerdict)>,
}

impl FaithfulnessVerdict {
    pub fn is_fail(&self) -> bool {
        self.status == FaithfulnessStatus::Fail
    }
}

/// Subsets of a neighbor set that separate some node from the target.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SeparatorFamily {
    pub q: Vec<NodeSet>,
    pub q_min: Vec<NodeSet>,
}

impl SeparatorFamily {
    fn contains(&self, s: &NodeSet) -> bool {
        self.q.contains(s)
    }
}

/// Tests `a ⟂ x | S` for every `S ⊆ ne_x`, by increasing size, returning the
/// separating family and the evaluated queries.
pub fn separator_family(
    src: &CiSource,
    x: usize,
    ne_x: &NodeSet,
    a: usize,
) -> Result<(SeparatorFamily, Vec<(CiQuery, CiVerdict)>), CiError> {
    let ne: Vec<usize> = ne_x.iter().copied().collect();
    let mut q = Vec::new();
    let mut evidence = Vec::new();
    for size in 0..=ne.len() {
        for s in ne.iter().copied().combinations(size) {
            let query = CiQuery::new(a, x, s.iter().copied())?;
            let verdict = src.query(&query)?;
            if verdict.independent {
                q.push(s.into_iter().collect::<NodeSet>());
            }
            evidence.push((query, verdict));
        }
    }
    let q_min = q
        .iter()
        .filter(|s| !q.iter().any(|t| t != *s && t.is_subset(s)))
        .cloned()
        .collect();
    Ok((SeparatorFamily { q, q_min }, evidence))
}

/// Separator-faithfulness tester for a node `a` outside `Ne⁺(X)`: fails when
/// the minimal separators are not unique, or when a separating superset of
/// the minimal one has a non-separating set strictly in between.
pub fn test_mff(
    src: &CiSource,
    x: usize,
    ne_x: &NodeSet,
    a: usize,
) -> Result<FaithfulnessVerdict, CiError> {
    let (fam, evidence) = separator_family(src, x, ne_x, a)?;
    let verdict = |status| FaithfulnessVerdict {
        status,
        evidence: evidence.clone(),
    };
    if fam.q.is_empty() {
        return Ok(verdict(FaithfulnessStatus::NoValidMns));
    }
    if fam.q_min.len() > 1 {
        return Ok(verdict(FaithfulnessStatus::Fail));
    }
    let s = &fam.q_min[0];
    for wide in fam.q.iter().filter(|t| *t != s && s.is_subset(t)) {
        let extra: Vec<usize> = wide.difference(s).copied().collect();
        for k in 1..extra.len() {
            for add in extra.iter().copied().combinations(k) {
                let mid: NodeSet = s.iter().copied().chain(add).collect();
                if !fam.contains(&mid) {
                    return Ok(verdict(FaithfulnessStatus::Fail));
                }
            }
        }
    }
    Ok(verdict(FaithfulnessStatus::Unknown))
}

/// SD tester for a detected collider `p -> r <- q`: with `poc_parents` the
/// parents SD oriented because of it, fails when no separating subset of
/// `ne_x` containing all of them exists for `p` or for `q`. Endpoints that
/// are `x` or one of its neighbors can never be separated from it and are
/// not tested.
pub fn test_sd(
    src: &CiSource,
    x: usize,
    ne_x: &NodeSet,
    uc: &UnshieldedCollider,
    poc_parents: &NodeSet,
) -> Result<FaithfulnessVerdict, CiError> {
    let mut evidence = Vec::new();
    let mut fail = false;
    for end in [uc.p, uc.q] {
        if end == x || ne_x.contains(&end) {
            continue;
        }
        let (fam, ev) = separator_family(src, x, ne_x, end)?;
        evidence.extend(ev);
        if !fam.q.iter().any(|s| poc_parents.is_subset(s)) {
            fail = true;
        }
    }
    let status = if fail {
        FaithfulnessStatus::Fail
    } else {
        FaithfulnessStatus::Unknown
    };
    Ok(FaithfulnessVerdict { status, evidence })
}

/// Runs [`test_sd`] for every collider credited with orienting a parent in
/// an SD result. Colliders that oriented nothing are skipped since their
/// check is vacuous.
pub fn test_sd_result(
    src: &CiSource,
    ls: &LocalStructure,
) -> Result<Vec<(UnshieldedCollider, NodeSet, FaithfulnessVerdict)>, CiError> {
    let ne = ls.neighbors();
    let mut out = Vec::new();
    for (id, uc) in ls.detected_colliders.iter().enumerate() {
        let poc: NodeSet = ls
            .parent_origins
            .iter()
            .filter(|(_, ids)| ids.contains(&id))
            .map(|(&p, _)| p)
            .collect();
        if poc.is_empty() {
            continue;
        }
        let verdict = test_sd(src, ls.target, &ne, uc, &poc)?;
        out.push((*uc, poc, verdict));
    }
    Ok(out)
}

/// Union of two ATE sets keyed by adjustment set.
pub fn conservative_ate_set(sd: &AteSet, ldecc: &AteSet) -> AteSet {
    sd.union(ldecc, "union")
}

/// Which algorithm the hybrid procedure trusts first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum HybridOrder {
    SdFirst,
    LdeccFirst,
}

/// Result of the hybrid procedure with the verdicts that drove it.
#[derive(Debug, Clone, Serialize)]
pub struct HybridOutcome {
    pub ate: AteSet,
    pub switched: bool,
    pub verdicts: Vec<FaithfulnessVerdict>,
}

/// Runs the first algorithm with its tester; on any `Fail`, runs the other
/// algorithm and returns its ATE set instead.
pub fn hybrid_procedure<E: EffectEstimator + ?Sized>(
    src: &CiSource,
    x: usize,
    y: usize,
    order: HybridOrder,
    estimator: &E,
) -> Result<HybridOutcome, CiError> {
    let (first, verdicts) = match order {
        HybridOrder::SdFirst => {
            let ls = run_sd(src, x, false)?;
            let v: Vec<_> = test_sd_result(src, &ls)?
                .into_iter()
                .map(|(_, _, v)| v)
                .collect();
            (ls, v)
        }
        HybridOrder::LdeccFirst => {
            let opts = LdeccOptions {
                mff_guard: true,
                ..LdeccOptions::default()
            };
            let ls = run_ldecc(src, x, opts)?;
            let v = ls.mff_verdicts.iter().map(|(_, v)| v.clone()).collect();
            (ls, v)
        }
    };
    let switched = verdicts.iter().any(FaithfulnessVerdict::is_fail);
    let chosen = if !switched {
        first
    } else {
        match order {
            HybridOrder::SdFirst => run_ldecc(src, x, LdeccOptions::default())?,
            HybridOrder::LdeccFirst => run_sd(src, x, false)?,
        }
    };
    let tag = match (order, switched) {
        (HybridOrder::SdFirst, false) | (HybridOrder::LdeccFirst, true) => "sd",
        _ => "ldecc",
    };
    let ate = ate_set(&chosen, y, estimator, tag).map_err(|e| CiError::InvalidQuery(e.to_string()))?;
    Ok(HybridOutcome {
        ate,
        switched,
        verdicts,
    })
}
