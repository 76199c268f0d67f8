use std::sync::Arc;

use serde::Serialize;

use super::{run_ldecc, run_sd, Algorithm, LdeccOptions, LocalStructure};
use crate::ci::{CiError, CiSource, TurnGate};

const LDECC_SIDE: usize = 0;
const SD_SIDE: usize = 1;

/// Outcome of interleaving SD with LDECC.
#[derive(Debug, Clone, Serialize)]
pub struct CombinedResult {
    pub structure: LocalStructure,
    pub winner: Algorithm,
    pub total_tests: usize,
    pub sd_tests: usize,
    pub ldecc_tests: usize,
}

/// Runs SD and LDECC on two sources from `factory` (called with the side
/// index: 0 for LDECC, 1 for SD), strictly alternating one evaluated query
/// per turn with LDECC moving first. The first run to finish wins and the
/// other is stopped at its next query. If both hit the test cap, the run
/// that used more tests is reported.
pub fn run_combined<F>(factory: F, x: usize) -> Result<CombinedResult, CiError>
where
    F: Fn(usize) -> CiSource,
{
    let gate = Arc::new(TurnGate::new(LDECC_SIDE));
    let ldecc_src = factory(LDECC_SIDE).with_gate(gate.clone(), LDECC_SIDE);
    let sd_src = factory(SD_SIDE).with_gate(gate.clone(), SD_SIDE);
    let (ldecc, sd) = std::thread::scope(|scope| {
        let l = scope.spawn(|| {
            let r = run_ldecc(&ldecc_src, x, LdeccOptions::default());
            ldecc_src.release_gate(matches!(&r, Ok(ls) if !ls.capped));
            r
        });
        let s = scope.spawn(|| {
            let r = run_sd(&sd_src, x, false);
            sd_src.release_gate(matches!(&r, Ok(ls) if !ls.capped));
            r
        });
        (l.join().expect("LDECC thread"), s.join().expect("SD thread"))
    });
    let ldecc_tests = ldecc_src.tests_used();
    let sd_tests = sd_src.tests_used();
    let total_tests = ldecc_tests + sd_tests;
    let (winner, structure) = match gate.winner() {
        Some(LDECC_SIDE) => (Algorithm::Ldecc, ldecc?),
        Some(_) => (Algorithm::Sd, sd?),
        None => match (ldecc, sd) {
            (Ok(l), Ok(s)) => {
                if s.tests_used > l.tests_used {
                    (Algorithm::Sd, s)
                } else {
                    (Algorithm::Ldecc, l)
                }
            }
            (Err(e), _) | (_, Err(e)) => return Err(e),
        },
    };
    let mut structure = structure;
    structure.tests_used = total_tests;
    Ok(CombinedResult {
        structure,
        winner,
        total_tests,
        sd_tests,
        ldecc_tests,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::graph::Dag;

    #[test]
    fn fig1_bound_holds() {
        let g = Arc::new(fixtures::fig1());
        let x = g.index_of("X").unwrap();
        let res = run_combined(|_| CiSource::oracle(g.clone()), x).unwrap();
        let t_sd = run_sd(&CiSource::oracle(g.clone()), x, false).unwrap().tests_used;
        let t_l = run_ldecc(&CiSource::oracle(g.clone()), x, LdeccOptions::default())
            .unwrap()
            .tests_used;
        assert!(res.total_tests <= 2 * t_sd.min(t_l) + 1);
    }

    #[test]
    fn two_nodes() {
        let g = Arc::new(Dag::from_named_edges(&["X", "Y"], &[("X", "Y")]).unwrap());
        let res = run_combined(|_| CiSource::oracle(g.clone()), 0).unwrap();
        assert_eq!(res.structure.unoriented.len(), 1);
    }

    #[test]
    fn both_capped_reports_further_run() {
        let g = Arc::new(fixtures::fig1());
        let res = run_combined(|_| CiSource::oracle(g.clone()).with_cap(Some(2)), 4).unwrap();
        assert!(res.structure.capped);
        assert_eq!(res.total_tests, 4);
    }
}
