//! Safety automata over digit alphabets.
//!
//! Every state is accepting: an automaton names the compact set of points
//! whose digit expansions label infinite paths from an initial state. Finite
//! behaviour is the prefix language, i.e. the labels of finite paths from an
//! initial state of a trim automaton.

use std::collections::{BTreeSet, HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::digits::{Alphabet, Symbol};
use crate::error::{Error, Result};

/// Outgoing edges of one state, sorted by (symbol, target) and duplicate-free.
pub type EdgeList = Vec<(Symbol, usize)>;

/// Nondeterministic safety automaton.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SetAutomaton {
    alphabet: Alphabet,
    initial: Vec<usize>,
    edges: Vec<EdgeList>,
}

/// Deterministic safety automaton with a single initial state.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DeterministicAutomaton {
    alphabet: Alphabet,
    initial: usize,
    edges: Vec<EdgeList>,
}

fn check_edges(alphabet: &Alphabet, n: usize, edges: &[EdgeList]) -> Result<()> {
    for (q, out) in edges.iter().enumerate() {
        for &(s, t) in out {
            if !alphabet.contains(s) {
                return Err(Error::InvalidAutomaton(format!(
                    "state {q}: symbol {s} outside alphabet"
                )));
            }
            if t >= n {
                return Err(Error::InvalidAutomaton(format!(
                    "state {q}: target {t} out of range"
                )));
            }
        }
    }
    Ok(())
}

impl SetAutomaton {
    /// Builds an automaton without trimming. Use [`trim`] before handing it to
    /// the rest of the pipeline.
    pub fn from_edges_untrimmed(
        alphabet: Alphabet,
        num_states: usize,
        initial: impl IntoIterator<Item = usize>,
        edges: impl IntoIterator<Item = (usize, Symbol, usize)>,
    ) -> Result<Self> {
        let mut lists = vec![Vec::new(); num_states];
        for (q, s, t) in edges {
            if q >= num_states {
                return Err(Error::InvalidAutomaton(format!("source {q} out of range")));
            }
            lists[q].push((s, t));
        }
        for l in &mut lists {
            l.sort_unstable();
            l.dedup();
        }
        check_edges(&alphabet, num_states, &lists)?;
        let mut initial: Vec<usize> = initial.into_iter().collect();
        initial.sort_unstable();
        initial.dedup();
        if let Some(&q) = initial.iter().find(|&&q| q >= num_states) {
            return Err(Error::InvalidAutomaton(format!("initial {q} out of range")));
        }
        Ok(SetAutomaton {
            alphabet,
            initial,
            edges: lists,
        })
    }

    /// Builds and trims.
    pub fn new(
        alphabet: Alphabet,
        num_states: usize,
        initial: impl IntoIterator<Item = usize>,
        edges: impl IntoIterator<Item = (usize, Symbol, usize)>,
    ) -> Result<Self> {
        trim(&Self::from_edges_untrimmed(alphabet, num_states, initial, edges)?)
    }

    /// One state with a self-loop on each listed letter.
    pub fn single_state(alphabet: Alphabet, letters: &[Vec<u32>]) -> Result<Self> {
        let edges = letters
            .iter()
            .map(|b| alphabet.encode(b).map(|s| (0, s, 0)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(alphabet, 1, [0], edges)
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn num_states(&self) -> usize {
        self.edges.len()
    }

    pub fn initial(&self) -> &[usize] {
        &self.initial
    }

    pub fn edges(&self, q: usize) -> &[(Symbol, usize)] {
        &self.edges[q]
    }

    pub fn num_edges(&self) -> usize {
        self.edges.iter().map(Vec::len).sum()
    }

    /// Every state reachable and live.
    pub fn is_trim(&self) -> bool {
        match trim(self) {
            Ok(t) => t.num_states() == self.num_states(),
            Err(_) => false,
        }
    }

    pub fn is_deterministic(&self) -> bool {
        self.initial.len() == 1
            && self
                .edges
                .iter()
                .all(|out| out.windows(2).all(|w| w[0].0 != w[1].0))
    }

    /// All words of length `p` labelling a path from an initial state.
    ///
    /// Enumerates paths directly; exponential, intended for small depths.
    pub fn words_of_length(&self, p: usize) -> BTreeSet<Vec<Symbol>> {
        let mut out = BTreeSet::new();
        let mut word = Vec::with_capacity(p);
        for &q in &self.initial {
            walk_paths(&self.edges, q, p, &mut word, &mut out);
        }
        out
    }

    pub fn to_json(&self) -> AutomatonJson {
        AutomatonJson::build(&self.alphabet, self.num_states(), &self.initial, &self.edges)
    }

    pub fn from_json(j: &AutomatonJson) -> Result<Self> {
        let (alphabet, n, initial, edges) = j.parts()?;
        Self::from_edges_untrimmed(alphabet, n, initial, edges)
    }
}

fn walk_paths(
    edges: &[EdgeList],
    q: usize,
    remaining: usize,
    word: &mut Vec<Symbol>,
    out: &mut BTreeSet<Vec<Symbol>>,
) {
    if remaining == 0 {
        out.insert(word.clone());
        return;
    }
    for &(s, t) in &edges[q] {
        word.push(s);
        walk_paths(edges, t, remaining - 1, word, out);
        word.pop();
    }
}

impl DeterministicAutomaton {
    pub fn new(
        alphabet: Alphabet,
        num_states: usize,
        initial: usize,
        edges: impl IntoIterator<Item = (usize, Symbol, usize)>,
    ) -> Result<Self> {
        let a = SetAutomaton::new(alphabet, num_states, [initial], edges)?;
        if !a.is_deterministic() {
            return Err(Error::InvalidAutomaton(
                "two successors for one (state, letter) pair".into(),
            ));
        }
        Ok(DeterministicAutomaton {
            alphabet: a.alphabet,
            initial: a.initial[0],
            edges: a.edges,
        })
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn num_states(&self) -> usize {
        self.edges.len()
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn edges(&self, q: usize) -> &[(Symbol, usize)] {
        &self.edges[q]
    }

    pub fn num_edges(&self) -> usize {
        self.edges.iter().map(Vec::len).sum()
    }

    pub fn step(&self, q: usize, s: Symbol) -> Option<usize> {
        let out = &self.edges[q];
        out.binary_search_by_key(&s, |e| e.0).ok().map(|i| out[i].1)
    }

    /// The same automaton with the initial state moved to `q`, restricted to
    /// what `q` reaches.
    pub fn rooted_at(&self, q: usize) -> DeterministicAutomaton {
        renumber_bfs(self.alphabet, q, &self.edges)
    }

    pub fn to_set_automaton(&self) -> SetAutomaton {
        SetAutomaton {
            alphabet: self.alphabet,
            initial: vec![self.initial],
            edges: self.edges.clone(),
        }
    }

    pub fn words_of_length(&self, p: usize) -> BTreeSet<Vec<Symbol>> {
        self.to_set_automaton().words_of_length(p)
    }

    /// Number of words of each length `0..=p`, by dynamic programming.
    pub fn count_words(&self, p: usize) -> Vec<num_bigint::BigUint> {
        use num_bigint::BigUint;
        use num_traits::{One, Zero};
        let n = self.num_states();
        let mut cur = vec![BigUint::zero(); n];
        cur[self.initial] = BigUint::one();
        let mut out = vec![BigUint::one()];
        for _ in 0..p {
            let mut next = vec![BigUint::zero(); n];
            for (q, c) in cur.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                for &(_, t) in &self.edges[q] {
                    next[t] += c;
                }
            }
            out.push(next.iter().sum());
            cur = next;
        }
        out
    }

    /// Canonical JSON form: states numbered breadth-first, edges sorted.
    pub fn to_json(&self) -> AutomatonJson {
        AutomatonJson::build(&self.alphabet, self.num_states(), &[self.initial], &self.edges)
    }

    pub fn from_json(j: &AutomatonJson) -> Result<Self> {
        let (alphabet, n, initial, edges) = j.parts()?;
        if initial.len() != 1 {
            return Err(Error::InvalidAutomaton(
                "deterministic automaton needs exactly one initial state".into(),
            ));
        }
        Self::new(alphabet, n, initial[0], edges)
    }
}

/// Marks states from which some infinite path leaves.
pub fn live_states(a: &SetAutomaton) -> Vec<bool> {
    let n = a.num_states();
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut out_count = vec![0usize; n];
    for (q, out) in a.edges.iter().enumerate() {
        out_count[q] = out.len();
        for &(_, t) in out {
            preds[t].push(q);
        }
    }
    let mut live = vec![true; n];
    let mut queue: VecDeque<usize> = (0..n).filter(|&q| out_count[q] == 0).collect();
    for &q in &queue {
        live[q] = false;
    }
    // A state dies once every edge leaving it leads to a dead state.
    while let Some(q) = queue.pop_front() {
        for &p in &preds[q] {
            if live[p] {
                out_count[p] -= 1;
                if out_count[p] == 0 {
                    live[p] = false;
                    queue.push_back(p);
                }
            }
        }
    }
    live
}

/// Removes unreachable and dead states.
///
/// A state is live when some infinite path leaves it; the surviving automaton
/// has the same ω-language and every state has an outgoing edge.
pub fn trim(a: &SetAutomaton) -> Result<SetAutomaton> {
    let n = a.num_states();
    let live = live_states(a);
    let mut reach = vec![false; n];
    let mut stack: Vec<usize> = a.initial.iter().copied().filter(|&q| live[q]).collect();
    for &q in &stack {
        reach[q] = true;
    }
    while let Some(q) = stack.pop() {
        for &(_, t) in &a.edges[q] {
            if live[t] && !reach[t] {
                reach[t] = true;
                stack.push(t);
            }
        }
    }
    let mut remap = vec![usize::MAX; n];
    let mut next = 0;
    for q in 0..n {
        if reach[q] {
            remap[q] = next;
            next += 1;
        }
    }
    if next == 0 {
        return Err(Error::EmptySet);
    }
    let edges = (0..n)
        .filter(|&q| reach[q])
        .map(|q| {
            a.edges[q]
                .iter()
                .filter(|&&(_, t)| reach[t])
                .map(|&(s, t)| (s, remap[t]))
                .collect()
        })
        .collect();
    let initial = a
        .initial
        .iter()
        .filter(|&&q| reach[q])
        .map(|&q| remap[q])
        .collect();
    Ok(SetAutomaton {
        alphabet: a.alphabet,
        initial,
        edges,
    })
}

/// Subset construction. The input should be trim; the result then is too.
pub fn determinize(a: &SetAutomaton) -> DeterministicAutomaton {
    let start: Vec<usize> = a.initial.clone();
    let mut index: HashMap<Vec<usize>, usize> = HashMap::new();
    let mut subsets = vec![start.clone()];
    index.insert(start, 0);
    let mut edges: Vec<EdgeList> = Vec::new();
    let mut i = 0;
    while i < subsets.len() {
        let mut moves: Vec<(Symbol, usize)> = subsets[i]
            .iter()
            .flat_map(|&q| a.edges[q].iter().copied())
            .collect();
        moves.sort_unstable();
        moves.dedup();
        let mut out = Vec::new();
        let mut j = 0;
        while j < moves.len() {
            let s = moves[j].0;
            let mut target = Vec::new();
            while j < moves.len() && moves[j].0 == s {
                target.push(moves[j].1);
                j += 1;
            }
            let id = match index.get(&target) {
                Some(&id) => id,
                None => {
                    let id = subsets.len();
                    index.insert(target.clone(), id);
                    subsets.push(target);
                    id
                }
            };
            out.push((s, id));
        }
        edges.push(out);
        i += 1;
    }
    DeterministicAutomaton {
        alphabet: a.alphabet,
        initial: 0,
        edges,
    }
}

/// Minimal automaton with the same prefix language, in canonical numbering.
///
/// With every state accepting, two states are equivalent iff they are
/// bisimilar: same letters out, equivalent targets. Partition refinement
/// starts from a single block.
pub fn minimize(a: &DeterministicAutomaton) -> DeterministicAutomaton {
    let n = a.num_states();
    let mut block = vec![0usize; n];
    let mut num_blocks = 1;
    loop {
        let mut ids: HashMap<(usize, Vec<(Symbol, usize)>), usize> = HashMap::new();
        let mut next = vec![0usize; n];
        for q in 0..n {
            let sig: Vec<(Symbol, usize)> = a.edges[q].iter().map(|&(s, t)| (s, block[t])).collect();
            let len = ids.len();
            next[q] = *ids.entry((block[q], sig)).or_insert(len);
        }
        let count = ids.len();
        block = next;
        if count == num_blocks {
            break;
        }
        num_blocks = count;
    }
    let mut edges = vec![Vec::new(); num_blocks];
    let mut filled = vec![false; num_blocks];
    for q in 0..n {
        let b = block[q];
        if !filled[b] {
            filled[b] = true;
            edges[b] = a.edges[q].iter().map(|&(s, t)| (s, block[t])).collect();
        }
    }
    renumber_bfs(a.alphabet, block[a.initial], &edges)
}

/// Breadth-first renumbering from `root`, letters in increasing order.
fn renumber_bfs(alphabet: Alphabet, root: usize, edges: &[EdgeList]) -> DeterministicAutomaton {
    let mut id = vec![usize::MAX; edges.len()];
    let mut order = vec![root];
    id[root] = 0;
    let mut i = 0;
    while i < order.len() {
        let q = order[i];
        for &(_, t) in &edges[q] {
            if id[t] == usize::MAX {
                id[t] = order.len();
                order.push(t);
            }
        }
        i += 1;
    }
    let new_edges = order
        .iter()
        .map(|&q| edges[q].iter().map(|&(s, t)| (s, id[t])).collect())
        .collect();
    DeterministicAutomaton {
        alphabet,
        initial: 0,
        edges: new_edges,
    }
}

/// Canonical minimal form of a nondeterministic automaton.
pub fn canonical(a: &SetAutomaton) -> DeterministicAutomaton {
    minimize(&determinize(a))
}

/// Whether two deterministic automata have the same prefix language.
pub fn language_equal(a: &DeterministicAutomaton, b: &DeterministicAutomaton) -> Result<bool> {
    if a.alphabet != b.alphabet {
        return Err(Error::BaseMismatch {
            left_k: a.alphabet.k(),
            left_d: a.alphabet.d(),
            right_k: b.alphabet.k(),
            right_d: b.alphabet.d(),
        });
    }
    Ok(minimize(a) == minimize(b))
}

/// [`language_equal`] for nondeterministic inputs.
pub fn set_language_equal(a: &SetAutomaton, b: &SetAutomaton) -> Result<bool> {
    language_equal(&determinize(a), &determinize(b))
}

/// Wire format shared by every automaton export.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AutomatonJson {
    pub k: u32,
    pub d: u32,
    pub states: Vec<usize>,
    pub initial: Vec<usize>,
    pub edges: Vec<EdgeJson>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EdgeJson {
    pub from: usize,
    pub digits: Vec<u32>,
    pub to: usize,
}

impl AutomatonJson {
    fn build(alphabet: &Alphabet, n: usize, initial: &[usize], edges: &[EdgeList]) -> Self {
        let mut list: Vec<EdgeJson> = edges
            .iter()
            .enumerate()
            .flat_map(|(q, out)| {
                out.iter().map(move |&(s, t)| EdgeJson {
                    from: q,
                    digits: alphabet.decode(s).0,
                    to: t,
                })
            })
            .collect();
        list.sort();
        AutomatonJson {
            k: alphabet.k(),
            d: alphabet.d(),
            states: (0..n).collect(),
            initial: initial.to_vec(),
            edges: list,
        }
    }

    #[allow(clippy::type_complexity)]
    fn parts(&self) -> Result<(Alphabet, usize, Vec<usize>, Vec<(usize, Symbol, usize)>)> {
        let alphabet = Alphabet::new(self.k, self.d)?;
        let n = self.states.len();
        if self.states.iter().enumerate().any(|(i, &s)| i != s) {
            return Err(Error::InvalidAutomaton(
                "states must be numbered 0..n in order".into(),
            ));
        }
        let edges = self
            .edges
            .iter()
            .map(|e| {
                if e.from >= n || e.to >= n {
                    return Err(Error::InvalidAutomaton(format!(
                        "edge {} -> {} references a missing state",
                        e.from, e.to
                    )));
                }
                alphabet.encode(&e.digits).map(|s| (e.from, s, e.to))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok((alphabet, n, self.initial.clone(), edges))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ab(k: u32, d: u32) -> Alphabet {
        Alphabet::new(k, d).unwrap()
    }

    fn cantor() -> SetAutomaton {
        SetAutomaton::single_state(ab(3, 1), &[vec![0], vec![2]]).unwrap()
    }

    fn full(k: u32) -> SetAutomaton {
        let letters: Vec<Vec<u32>> = (0..k).map(|b| vec![b]).collect();
        SetAutomaton::single_state(ab(k, 1), &letters).unwrap()
    }

    /// Cantor unrolled so that states track position mod 3.
    fn cantor_unrolled() -> SetAutomaton {
        let edges = (0..3).flat_map(|q| [(q, 0, (q + 1) % 3), (q, 2, (q + 1) % 3)]);
        SetAutomaton::new(ab(3, 1), 3, [0], edges).unwrap()
    }

    #[test]
    fn trim_keeps_trim_input() {
        let c = cantor();
        assert_eq!(trim(&c).unwrap(), c);
        assert!(c.is_trim());
    }

    #[test]
    fn trim_removes_dead_state() {
        let a = SetAutomaton::from_edges_untrimmed(ab(3, 1), 2, [0], [(0, 0, 0), (0, 2, 1)]).unwrap();
        assert!(!a.is_trim());
        let t = trim(&a).unwrap();
        assert_eq!(t.num_states(), 1);
        assert_eq!(t.edges(0), &[(0, 0)]);
    }

    #[test]
    fn trim_of_dead_only_state_is_empty() {
        let a = SetAutomaton::from_edges_untrimmed(ab(3, 1), 1, [0], []).unwrap();
        assert!(matches!(trim(&a), Err(Error::EmptySet)));
    }

    #[test]
    fn trim_drops_transitively_dead_chain() {
        // 0 -> 1 -> 2, 2 has no edges; 0 also loops.
        let a = SetAutomaton::from_edges_untrimmed(
            ab(2, 1),
            3,
            [0],
            [(0, 0, 0), (0, 1, 1), (1, 1, 2)],
        )
        .unwrap();
        let t = trim(&a).unwrap();
        assert_eq!(t.num_states(), 1);
    }

    #[test]
    fn determinize_fixes_deterministic_input() {
        let c = cantor();
        let d = determinize(&c);
        assert_eq!(d.num_states(), 1);
        assert_eq!(d.to_set_automaton(), c);
        let f = full(2);
        assert_eq!(determinize(&f).to_set_automaton(), f);
    }

    #[test]
    fn determinize_two_initial_loops() {
        let a = SetAutomaton::new(ab(3, 1), 2, [0, 1], [(0, 0, 0), (1, 2, 1)]).unwrap();
        let d = determinize(&a);
        assert_eq!(d.num_states(), 3);
        // Oracle: brute-force path enumeration on the nondeterministic input.
        for p in 0..=5 {
            let expected: BTreeSet<Vec<u32>> = [vec![0; p], vec![2; p]].into_iter().collect();
            assert_eq!(a.words_of_length(p), expected);
            assert_eq!(d.words_of_length(p), expected);
        }
    }

    #[test]
    fn minimize_merges_bisimilar_states() {
        let a = DeterministicAutomaton::new(
            ab(3, 1),
            2,
            0,
            [(0, 0, 1), (0, 2, 0), (1, 0, 0), (1, 2, 1)],
        )
        .unwrap();
        assert_eq!(minimize(&a).num_states(), 1);
        let c = determinize(&cantor());
        assert_eq!(minimize(&c), c);
    }

    #[test]
    fn minimize_unrolled_cantor() {
        let u = cantor_unrolled();
        let d = determinize(&u);
        assert_eq!(d.num_states(), 3);
        let m = minimize(&d);
        assert_eq!(m.num_states(), 1);
        for p in 0..=6 {
            assert_eq!(u.words_of_length(p), cantor().words_of_length(p));
        }
    }

    #[test]
    fn language_equality_examples() {
        let c = determinize(&cantor());
        assert!(language_equal(&c, &c).unwrap());
        let f3 = determinize(&full(3));
        assert!(!language_equal(&c, &f3).unwrap());
        assert!(full(3).words_of_length(2).contains(&vec![1, 1]));
        assert!(!cantor().words_of_length(2).contains(&vec![1, 1]));
        let u = determinize(&cantor_unrolled());
        assert!(language_equal(&c, &u).unwrap());
        let f2 = determinize(&full(2));
        assert!(matches!(
            language_equal(&c, &f2),
            Err(Error::BaseMismatch { .. })
        ));
    }

    #[test]
    fn json_round_trip_is_canonical() {
        let u = canonical(&cantor_unrolled());
        let j = u.to_json();
        assert_eq!(j.edges.len(), 2);
        let back = DeterministicAutomaton::from_json(&j).unwrap();
        assert_eq!(back, u);
        let text = serde_json::to_string(&j).unwrap();
        assert_eq!(text, r#"{"k":3,"d":1,"states":[0],"initial":[0],"edges":[{"from":0,"digits":[0],"to":0},{"from":0,"digits":[2],"to":0}]}"#);
    }

    #[test]
    fn json_rejects_bad_digits() {
        let mut j = cantor().to_json();
        j.edges[0].digits = vec![5];
        assert!(SetAutomaton::from_json(&j).is_err());
    }
}
