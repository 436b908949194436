//! The k-kernel of an automaton-presented set.
//!
//! Kernel elements are the rescaled intersections of X with grid cubes. Each
//! is stored as the canonical minimal automaton of its saturated language, so
//! set equality is structural equality. The kernel automaton moves from an
//! element to the element obtained by zooming into one digit cube.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::automaton::{
    canonical, minimize, trim, AutomatonJson, DeterministicAutomaton, EdgeJson, EdgeList,
    SetAutomaton,
};
use crate::digits::{Alphabet, Symbol, MAX_BASE};
use crate::error::{Error, Result};
use crate::matrix::SquareMatrix;
use crate::saturate::SaturatedAutomaton;

pub const DEFAULT_MAX_ELEMENTS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KernelOptions {
    pub max_elements: usize,
}

impl Default for KernelOptions {
    fn default() -> Self {
        KernelOptions {
            max_elements: DEFAULT_MAX_ELEMENTS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KernelPresentation {
    alphabet: Alphabet,
    elements: Vec<DeterministicAutomaton>,
    transitions: Vec<EdgeList>,
    matrix: SquareMatrix,
}

impl KernelPresentation {
    /// Assembles a presentation from parts, checking only shape: indices in
    /// range, one target per (element, digit), a square matrix of the right
    /// size. Semantic consistency is [`KernelPresentation::closure_violations`].
    pub fn from_parts(
        alphabet: Alphabet,
        elements: Vec<DeterministicAutomaton>,
        transitions: Vec<EdgeList>,
        matrix: SquareMatrix,
    ) -> Result<Self> {
        let n = elements.len();
        if n == 0 {
            return Err(Error::InvalidKernel("no elements".into()));
        }
        if transitions.len() != n || matrix.n() != n {
            return Err(Error::InvalidKernel(format!(
                "{n} elements but {} transition rows and a {}x{} matrix",
                transitions.len(),
                matrix.n(),
                matrix.n()
            )));
        }
        if let Some(e) = elements.iter().find(|e| e.alphabet() != alphabet) {
            return Err(Error::BaseMismatch {
                left_k: alphabet.k(),
                left_d: alphabet.d(),
                right_k: e.alphabet().k(),
                right_d: e.alphabet().d(),
            });
        }
        for (j, row) in transitions.iter().enumerate() {
            for w in row.windows(2) {
                if w[0].0 >= w[1].0 {
                    return Err(Error::InvalidKernel(format!(
                        "element {j}: transitions unsorted or not deterministic"
                    )));
                }
            }
            for &(s, t) in row {
                if !alphabet.contains(s) || t >= n {
                    return Err(Error::InvalidKernel(format!(
                        "element {j}: transition to {t} on symbol {s} out of range"
                    )));
                }
            }
        }
        Ok(KernelPresentation {
            alphabet,
            elements,
            transitions,
            matrix,
        })
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn k(&self) -> u32 {
        self.alphabet.k()
    }

    pub fn d(&self) -> u32 {
        self.alphabet.d()
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[DeterministicAutomaton] {
        &self.elements
    }

    pub fn element(&self, i: usize) -> Result<&DeterministicAutomaton> {
        self.elements.get(i).ok_or(Error::InvalidElement {
            index: i,
            n: self.len(),
        })
    }

    /// `(digit, target)` pairs out of element `j`, by increasing digit.
    pub fn transitions(&self, j: usize) -> &[(Symbol, usize)] {
        &self.transitions[j]
    }

    pub fn step(&self, j: usize, b: Symbol) -> Option<usize> {
        let row = &self.transitions[j];
        row.binary_search_by_key(&b, |e| e.0).ok().map(|i| row[i].1)
    }

    /// A[i][j] = number of digits b with step(j, b) = i.
    pub fn matrix(&self) -> &SquareMatrix {
        &self.matrix
    }

    pub fn labels(&self) -> Vec<String> {
        (0..self.len()).map(|i| format!("X{i}")).collect()
    }

    /// The deterministic automaton whose states are kernel elements.
    pub fn kernel_automaton(&self) -> DeterministicAutomaton {
        let edges = self
            .transitions
            .iter()
            .enumerate()
            .flat_map(|(j, row)| row.iter().map(move |&(s, t)| (j, s, t)));
        DeterministicAutomaton::new(self.alphabet, self.len(), 0, edges)
            .expect("kernel transitions are deterministic and every element is live")
    }

    /// Re-derives every transition and the matrix from the element automata
    /// and reports each disagreement.
    pub fn closure_violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let n = self.len();
        let mut index: HashMap<&DeterministicAutomaton, usize> = HashMap::new();
        for (i, e) in self.elements.iter().enumerate() {
            if &minimize(e) != e {
                out.push(format!("element {i} is not in canonical minimal form"));
            }
            if let Some(prev) = index.insert(e, i) {
                out.push(format!("elements {prev} and {i} name the same set"));
            }
        }
        for j in 0..n {
            let set = self.elements[j].to_set_automaton();
            for b in self.alphabet.symbols() {
                let expected = digit_quotient(&set, b).map(|q| canonical(&q));
                let recorded = self.step(j, b);
                let digits = self.alphabet.decode(b);
                match (expected, recorded) {
                    (None, None) => {}
                    (None, Some(t)) => out.push(format!(
                        "X{j} has no points in cube {digits} but records target X{t}"
                    )),
                    (Some(_), None) => out.push(format!(
                        "X{j} meets cube {digits} but records no target"
                    )),
                    (Some(q), Some(t)) => {
                        if q != self.elements[t] {
                            out.push(format!("quotient of X{j} by {digits} differs from X{t}"));
                        }
                    }
                }
            }
        }
        let mut rebuilt = SquareMatrix::zeros(n);
        for (j, row) in self.transitions.iter().enumerate() {
            for &(_, i) in row {
                rebuilt.add_to(i, j, 1);
            }
        }
        for i in 0..n {
            for j in 0..n {
                if rebuilt.get(i, j) != self.matrix.get(i, j) {
                    out.push(format!(
                        "A[{i}][{j}] = {} but transitions give {}",
                        self.matrix.get(i, j),
                        rebuilt.get(i, j)
                    ));
                }
            }
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(j) = stack.pop() {
            for &(_, t) in &self.transitions[j] {
                if !seen[t] {
                    seen[t] = true;
                    stack.push(t);
                }
            }
        }
        for (i, s) in seen.iter().enumerate() {
            if !s {
                out.push(format!("X{i} unreachable from X0"));
            }
        }
        out
    }

    pub fn to_json(&self) -> KernelJson {
        let mut transitions: Vec<EdgeJson> = self
            .transitions
            .iter()
            .enumerate()
            .flat_map(|(j, row)| {
                row.iter().map(move |&(s, t)| EdgeJson {
                    from: j,
                    digits: self.alphabet.decode(s).0,
                    to: t,
                })
            })
            .collect();
        transitions.sort();
        KernelJson {
            k: self.k(),
            d: self.d(),
            labels: self.labels(),
            elements: self.elements.iter().map(|e| e.to_json()).collect(),
            transitions,
            matrix: self.matrix.rows(),
        }
    }

    pub fn from_json(j: &KernelJson) -> Result<Self> {
        let alphabet = Alphabet::new(j.k, j.d)?;
        let n = j.elements.len();
        let elements = j
            .elements
            .iter()
            .map(DeterministicAutomaton::from_json)
            .collect::<Result<Vec<_>>>()?;
        let mut transitions: Vec<EdgeList> = vec![Vec::new(); n];
        for e in &j.transitions {
            if e.from >= n {
                return Err(Error::InvalidKernel(format!(
                    "transition from missing element {}",
                    e.from
                )));
            }
            transitions[e.from].push((alphabet.encode(&e.digits)?, e.to));
        }
        for row in &mut transitions {
            row.sort_unstable();
        }
        if j.matrix.len() != n || j.matrix.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidKernel(format!("matrix must be {n}x{n}")));
        }
        Self::from_parts(alphabet, elements, transitions, SquareMatrix::from_rows(&j.matrix))
    }
}

/// JSON export of a kernel presentation; `matrix` is row-major.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KernelJson {
    pub k: u32,
    pub d: u32,
    pub labels: Vec<String>,
    pub elements: Vec<AutomatonJson>,
    pub transitions: Vec<EdgeJson>,
    pub matrix: Vec<Vec<u64>>,
}

/// The words that continue after digit `b`, or `None` when no path starts
/// with `b`. Follows `b` from every initial state, then trims.
pub fn digit_quotient(a: &SetAutomaton, b: Symbol) -> Option<SetAutomaton> {
    let initial: Vec<usize> = a
        .initial()
        .iter()
        .flat_map(|&q| a.edges(q).iter().filter(|e| e.0 == b).map(|e| e.1))
        .collect();
    if initial.is_empty() {
        return None;
    }
    let edges = (0..a.num_states()).flat_map(|q| a.edges(q).iter().map(move |&(s, t)| (q, s, t)));
    let raw = SetAutomaton::from_edges_untrimmed(a.alphabet(), a.num_states(), initial, edges)
        .expect("same shape as the source");
    trim(&raw).ok()
}

pub fn compute_kernel(a: &SaturatedAutomaton) -> Result<KernelPresentation> {
    compute_kernel_with(a, &KernelOptions::default())
}

/// Breadth-first closure of X under digit quotients, X first.
pub fn compute_kernel_with(a: &SaturatedAutomaton, opts: &KernelOptions) -> Result<KernelPresentation> {
    let alphabet = a.automaton().alphabet();
    let root = canonical(a.automaton());
    let mut elements = vec![root.clone()];
    let mut index: HashMap<DeterministicAutomaton, usize> = HashMap::new();
    index.insert(root, 0);
    let mut transitions: Vec<EdgeList> = Vec::new();
    let mut j = 0;
    while j < elements.len() {
        let set = elements[j].to_set_automaton();
        let letters: Vec<Symbol> = {
            let mut l: Vec<Symbol> = set.edges(set.initial()[0]).iter().map(|e| e.0).collect();
            l.dedup();
            l
        };
        let mut row = Vec::with_capacity(letters.len());
        for b in letters {
            let Some(q) = digit_quotient(&set, b) else {
                continue;
            };
            let q = canonical(&q);
            let id = match index.get(&q) {
                Some(&id) => id,
                None => {
                    if elements.len() >= opts.max_elements {
                        return Err(Error::KernelOverflow {
                            cap: opts.max_elements,
                        });
                    }
                    let id = elements.len();
                    index.insert(q.clone(), id);
                    elements.push(q);
                    id
                }
            };
            row.push((b, id));
        }
        transitions.push(row);
        j += 1;
    }
    let n = elements.len();
    let mut matrix = SquareMatrix::zeros(n);
    for (j, row) in transitions.iter().enumerate() {
        for &(_, i) in row {
            matrix.add_to(i, j, 1);
        }
    }
    Ok(KernelPresentation {
        alphabet,
        elements,
        transitions,
        matrix,
    })
}

pub fn subdivision_matrix(kp: &KernelPresentation) -> SquareMatrix {
    kp.matrix().clone()
}

/// Regroups `e` consecutive base-k digits into one base-k^e digit.
pub fn rebase_automaton(a: &SetAutomaton, e: u32) -> Result<SetAutomaton> {
    assert!(e >= 1, "exponent must be positive");
    let k = a.alphabet().k();
    let d = a.alphabet().d() as usize;
    let big = (k as u64).checked_pow(e).filter(|&b| b <= MAX_BASE as u64);
    let Some(big) = big else {
        return Err(Error::BaseOverflow {
            base: (k as u64).saturating_pow(e),
            max: MAX_BASE,
        });
    };
    let target = Alphabet::new(big as u32, d as u32)?;
    let mut edges = Vec::new();
    let mut digits = vec![0u32; d];
    for q in 0..a.num_states() {
        let mut stack: Vec<(usize, u32, Vec<u32>)> = vec![(q, 0, vec![0; d])];
        while let Some((state, depth, acc)) = stack.pop() {
            if depth == e {
                edges.push((q, target.encode(&acc)?, state));
                continue;
            }
            for &(s, t) in a.edges(state) {
                a.alphabet().decode_into(s, &mut digits);
                let next: Vec<u32> = acc.iter().zip(&digits).map(|(&x, &b)| x * k + b).collect();
                stack.push((t, depth + 1, next));
            }
        }
    }
    SetAutomaton::new(target, a.num_states(), a.initial().iter().copied(), edges)
}

/// [`rebase_automaton`] on a saturated automaton; grouping digits maps the
/// expansions of a point bijectively onto its base-k^e expansions, so the
/// result stays saturated.
pub fn rebase(a: &SaturatedAutomaton, e: u32) -> Result<SaturatedAutomaton> {
    Ok(SaturatedAutomaton::trusted(rebase_automaton(a.automaton(), e)?))
}
