use std::sync::{Condvar, Mutex};

use super::CiError;

#[derive(Debug)]
struct GateState {
    turn: usize,
    holding: [bool; 2],
    stopped: [bool; 2],
    winner: Option<usize>,
}

/// Strict alternation between two runs: each evaluated query takes one
/// turn, and a turn passes to the other side only when the holder asks for
/// its next query or stops. Once one side finishes, the other is aborted at
/// its next request.
#[derive(Debug)]
pub struct TurnGate {
    state: Mutex<GateState>,
    wake: Condvar,
}

impl TurnGate {
    /// A gate where `first` takes the opening turn.
    pub fn new(first: usize) -> Self {
        assert!(first < 2, "a gate has two sides");
        Self {
            state: Mutex::new(GateState {
                turn: first,
                holding: [false; 2],
                stopped: [false; 2],
                winner: None,
            }),
            wake: Condvar::new(),
        }
    }

    pub(crate) fn acquire(&self, side: usize) -> Result<(), CiError> {
        let other = 1 - side;
        let mut st = self.state.lock().unwrap();
        if st.holding[side] {
            st.holding[side] = false;
            st.turn = other;
            self.wake.notify_all();
        }
        while st.turn != side && !st.stopped[other] && st.winner.is_none() {
            st = self.wake.wait(st).unwrap();
        }
        if st.winner.is_some_and(|w| w != side) {
            return Err(CiError::Aborted);
        }
        st.holding[side] = true;
        Ok(())
    }

    /// Marks `side` as done. The first side to finish successfully wins.
    pub(crate) fn finish(&self, side: usize, succeeded: bool) {
        let mut st = self.state.lock().unwrap();
        st.stopped[side] = true;
        st.holding[side] = false;
        st.turn = 1 - side;
        if succeeded && st.winner.is_none() {
            st.winner = Some(side);
        }
        self.wake.notify_all();
    }

    pub fn winner(&self) -> Option<usize> {
        self.state.lock().unwrap().winner
    }
}
