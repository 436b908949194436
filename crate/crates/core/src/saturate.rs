//! Closing an automaton under alternate k-adic expansions.
//!
//! A k-adic rational has two expansions, `p a (k-1)^ω` and `p (a+1) 0^ω`.
//! The carry transducer recognises pairs of digit words with equal value,
//! coordinate by coordinate; saturation is the image of an automaton under
//! that relation.

use std::collections::HashMap;

use crate::automaton::{set_language_equal, trim, SetAutomaton};
use crate::digits::{Alphabet, Symbol};

/// Per-coordinate status of the carry transducer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CarryStatus {
    /// Both words agree so far.
    Equal,
    /// Left word took `a`, right took `a+1`; left continues `k-1`, right `0`.
    LeftLow,
    /// Mirror of `LeftLow`.
    LeftHigh,
}

impl CarryStatus {
    fn code(self) -> u32 {
        match self {
            CarryStatus::Equal => 0,
            CarryStatus::LeftLow => 1,
            CarryStatus::LeftHigh => 2,
        }
    }

    fn from_code(c: u32) -> Self {
        match c {
            0 => CarryStatus::Equal,
            1 => CarryStatus::LeftLow,
            _ => CarryStatus::LeftHigh,
        }
    }
}

/// Letter-to-letter transducer for the same-value relation on Σ_k^d words.
///
/// States are status vectors packed base 3; state 0 is all-`Equal`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CarryTransducer {
    alphabet: Alphabet,
}

impl CarryTransducer {
    pub fn new(alphabet: Alphabet) -> Self {
        CarryTransducer { alphabet }
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn num_states(&self) -> u32 {
        3u32.pow(self.alphabet.d())
    }

    pub fn start(&self) -> u32 {
        0
    }

    pub fn status(&self, state: u32) -> Vec<CarryStatus> {
        let d = self.alphabet.d() as usize;
        let mut out = vec![CarryStatus::Equal; d];
        let mut s = state;
        for slot in out.iter_mut().rev() {
            *slot = CarryStatus::from_code(s % 3);
            s /= 3;
        }
        out
    }

    fn pack(statuses: &[CarryStatus]) -> u32 {
        statuses.iter().fold(0, |acc, s| acc * 3 + s.code())
    }

    /// Moves of one coordinate: `(right digit, next status)` for a left digit.
    fn coord_moves(k: u32, status: CarryStatus, u: u32) -> Vec<(u32, CarryStatus)> {
        match status {
            CarryStatus::Equal => {
                let mut m = vec![(u, CarryStatus::Equal)];
                if u + 1 < k {
                    m.push((u + 1, CarryStatus::LeftLow));
                }
                if u > 0 {
                    m.push((u - 1, CarryStatus::LeftHigh));
                }
                m
            }
            CarryStatus::LeftLow if u == k - 1 => vec![(0, CarryStatus::LeftLow)],
            CarryStatus::LeftHigh if u == 0 => vec![(k - 1, CarryStatus::LeftHigh)],
            _ => Vec::new(),
        }
    }

    /// All `(right letter, next state)` pairs for a left letter.
    pub fn outputs(&self, state: u32, left: Symbol) -> Vec<(Symbol, u32)> {
        let k = self.alphabet.k();
        let d = self.alphabet.d() as usize;
        let statuses = self.status(state);
        let mut digits = vec![0; d];
        self.alphabet.decode_into(left, &mut digits);
        let per: Vec<Vec<(u32, CarryStatus)>> = (0..d)
            .map(|l| Self::coord_moves(k, statuses[l], digits[l]))
            .collect();
        if per.iter().any(Vec::is_empty) {
            return Vec::new();
        }
        let mut out = Vec::new();
        let mut choice = vec![0usize; d];
        loop {
            let mut right = 0;
            let mut next = Vec::with_capacity(d);
            for l in 0..d {
                let (v, s) = per[l][choice[l]];
                right = right * k + v;
                next.push(s);
            }
            out.push((right, Self::pack(&next)));
            // Odometer over per-coordinate choices.
            let mut l = d;
            loop {
                if l == 0 {
                    out.sort_unstable();
                    return out;
                }
                l -= 1;
                choice[l] += 1;
                if choice[l] < per[l].len() {
                    break;
                }
                choice[l] = 0;
            }
        }
    }

    /// Runs the transducer on a pair of equal-length words.
    pub fn run(&self, left: &[Symbol], right: &[Symbol]) -> Option<u32> {
        if left.len() != right.len() {
            return None;
        }
        let mut state = self.start();
        for (&u, &v) in left.iter().zip(right) {
            state = self
                .outputs(state, u)
                .into_iter()
                .find(|&(r, _)| r == v)
                .map(|(_, s)| s)?;
        }
        Some(state)
    }
}

/// The transducer for base `k`, dimension `d`.
pub fn carry_transducer(alphabet: Alphabet) -> CarryTransducer {
    CarryTransducer::new(alphabet)
}

/// An automaton whose language contains every expansion of every point it names.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SaturatedAutomaton {
    automaton: SetAutomaton,
    certified: bool,
}

impl SaturatedAutomaton {
    pub fn automaton(&self) -> &SetAutomaton {
        &self.automaton
    }

    pub fn into_inner(self) -> SetAutomaton {
        self.automaton
    }

    /// True when produced by [`saturate`] or a saturation-preserving rebase.
    pub fn is_certified(&self) -> bool {
        self.certified
    }

    /// Wraps an automaton after checking it is saturation-closed.
    pub fn checked(a: SetAutomaton) -> Option<Self> {
        is_saturated(&a).then_some(SaturatedAutomaton {
            automaton: a,
            certified: true,
        })
    }

    pub(crate) fn trusted(a: SetAutomaton) -> Self {
        SaturatedAutomaton {
            automaton: a,
            certified: true,
        }
    }
}

/// Image of `a` under the same-value relation, trimmed.
pub fn saturate(a: &SetAutomaton) -> SaturatedAutomaton {
    let t = carry_transducer(a.alphabet());
    let mut index: HashMap<(usize, u32), usize> = HashMap::new();
    let mut states: Vec<(usize, u32)> = Vec::new();
    for &q in a.initial() {
        index.insert((q, t.start()), states.len());
        states.push((q, t.start()));
    }
    let initial: Vec<usize> = (0..states.len()).collect();
    let mut edges = Vec::new();
    let mut i = 0;
    while i < states.len() {
        let (q, ts) = states[i];
        for &(u, q2) in a.edges(q) {
            for (v, ts2) in t.outputs(ts, u) {
                let id = *index.entry((q2, ts2)).or_insert_with(|| {
                    states.push((q2, ts2));
                    states.len() - 1
                });
                edges.push((i, v, id));
            }
        }
        i += 1;
    }
    let raw = SetAutomaton::from_edges_untrimmed(a.alphabet(), states.len(), initial, edges)
        .expect("product edges are in range");
    let automaton = trim(&raw).expect("a nonempty set keeps its own expansions");
    SaturatedAutomaton {
        automaton,
        certified: true,
    }
}

/// Whether `a` already contains every alternate expansion.
pub fn is_saturated(a: &SetAutomaton) -> bool {
    set_language_equal(saturate(a).automaton(), a).expect("same alphabet")
}

/// Raw-vs-saturated prefix counts at depth `p`; the saturated count is never
/// smaller.
pub fn saturation_growth(a: &SetAutomaton, p: usize) -> (usize, usize) {
    let s = saturate(a);
    (a.words_of_length(p).len(), s.automaton().words_of_length(p).len())
}
