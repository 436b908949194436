//! Word counts of the cube language and the entropy of X.
//!
//! A digit word belongs to the language when its closed cube meets some
//! kernel element. Counts are exact big integers; logarithms come last.

use std::collections::{BTreeSet, HashMap};

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::digits::Symbol;
use crate::error::{Error, Result};
use crate::kernel::KernelPresentation;
use crate::matrix::SquareMatrix;
use crate::numeric::big_ln;
use crate::spectral::{spectral_radius_with, DimensionResult, LogEnclosure, SpectralOptions, SpectralResult};

/// Subset construction over the kernel automaton, started from the set of
/// all elements.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountingAutomaton {
    subsets: Vec<Vec<usize>>,
    edges: Vec<Vec<(Symbol, usize)>>,
}

impl CountingAutomaton {
    pub fn new(kp: &KernelPresentation) -> Self {
        let start: Vec<usize> = (0..kp.len()).collect();
        let mut index: HashMap<Vec<usize>, usize> = HashMap::new();
        index.insert(start.clone(), 0);
        let mut subsets = vec![start];
        let mut edges = Vec::new();
        let mut q = 0;
        while q < subsets.len() {
            let mut by_symbol: std::collections::BTreeMap<Symbol, BTreeSet<usize>> = Default::default();
            for &j in &subsets[q] {
                for &(b, t) in kp.transitions(j) {
                    by_symbol.entry(b).or_default().insert(t);
                }
            }
            let mut row = Vec::with_capacity(by_symbol.len());
            for (b, targets) in by_symbol {
                let key: Vec<usize> = targets.into_iter().collect();
                let id = match index.get(&key) {
                    Some(&id) => id,
                    None => {
                        let id = subsets.len();
                        index.insert(key.clone(), id);
                        subsets.push(key);
                        id
                    }
                };
                row.push((b, id));
            }
            edges.push(row);
            q += 1;
        }
        CountingAutomaton { subsets, edges }
    }

    pub fn num_states(&self) -> usize {
        self.subsets.len()
    }

    /// Kernel elements represented by state `q`; state 0 holds all of them.
    pub fn subset(&self, q: usize) -> &[usize] {
        &self.subsets[q]
    }

    pub fn edges(&self, q: usize) -> &[(Symbol, usize)] {
        &self.edges[q]
    }

    /// M[t][s] = number of digits leading from state s to state t.
    pub fn transfer_matrix(&self) -> SquareMatrix {
        let mut m = SquareMatrix::zeros(self.num_states());
        for (s, row) in self.edges.iter().enumerate() {
            for &(_, t) in row {
                m.add_to(t, s, 1);
            }
        }
        m
    }

    /// Path counts from the start state for every depth `0..=p`.
    pub fn path_counts(&self, p: u32) -> Vec<BigUint> {
        let n = self.num_states();
        let mut v = vec![BigUint::zero(); n];
        v[0] = BigUint::one();
        let mut out = vec![BigUint::one()];
        for _ in 0..p {
            let mut next = vec![BigUint::zero(); n];
            for (s, row) in self.edges.iter().enumerate() {
                if v[s].is_zero() {
                    continue;
                }
                for &(_, t) in row {
                    next[t] += &v[s];
                }
            }
            v = next;
            out.push(v.iter().sum());
        }
        out
    }
}

/// 𝕁ᵀA^p for depths `0..=p`: entry `[p][i]` counts level-p cubes meeting X_i.
pub fn cube_count_table(kp: &KernelPresentation, p: u32) -> Vec<Vec<BigUint>> {
    let a = kp.matrix();
    let mut row = vec![BigUint::one(); kp.len()];
    let mut out = vec![row.clone()];
    for _ in 0..p {
        row = a.vec_mul(&row);
        out.push(row.clone());
    }
    out
}

/// Number of level-p closed cubes meeting X_i.
pub fn cube_count(kp: &KernelPresentation, i: usize, p: u32) -> Result<BigUint> {
    kp.element(i)?;
    let a = kp.matrix();
    let mut v = vec![BigUint::zero(); kp.len()];
    v[i] = BigUint::one();
    for _ in 0..p {
        v = a.mul_vec(&v);
    }
    Ok(v.into_iter().sum())
}

/// Number of distinct length-p words whose cube meets some kernel element.
pub fn word_count(kp: &KernelPresentation, p: u32) -> BigUint {
    CountingAutomaton::new(kp).path_counts(p).pop().expect("depth 0 present")
}

/// Word counts for every depth `0..=p`.
pub fn word_counts(kp: &KernelPresentation, p: u32) -> Vec<BigUint> {
    CountingAutomaton::new(kp).path_counts(p)
}

/// log_k x, exact when x is a power of k.
pub fn log_k_big(x: &BigUint, k: u32) -> f64 {
    if let Some(e) = exact_log(x, k) {
        return e as f64;
    }
    big_ln(x) / (k as f64).ln()
}

fn exact_log(x: &BigUint, k: u32) -> Option<u64> {
    let mut x = x.clone();
    let k = BigUint::from(k);
    let mut e = 0;
    while !x.is_one() {
        let (q, r) = x.div_rem(&k);
        if !r.is_zero() || q.is_zero() {
            return None;
        }
        x = q;
        e += 1;
    }
    Some(e)
}

/// log_k (num/den), exact when the quotient is a power of k.
fn log_k_ratio(num: &BigUint, den: &BigUint, k: u32) -> f64 {
    let (q, r) = num.div_rem(den);
    if r.is_zero() {
        if let Some(e) = exact_log(&q, k) {
            return e as f64;
        }
    }
    (big_ln(num) - big_ln(den)) / (k as f64).ln()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntropyEstimate {
    pub p: u32,
    /// (1/p) log_k P(p).
    pub direct: f64,
    /// log_k (P(p+1)/P(p)).
    pub ratio: f64,
}

fn estimate_from(counts: &[BigUint], p: u32, k: u32) -> EntropyEstimate {
    let pp = &counts[p as usize];
    let next = &counts[p as usize + 1];
    let direct = if p == 0 { 0.0 } else { log_k_big(pp, k) / p as f64 };
    EntropyEstimate {
        p,
        direct,
        ratio: log_k_ratio(next, pp, k),
    }
}

pub fn entropy_estimate(kp: &KernelPresentation, p: u32) -> EntropyEstimate {
    assert!(p >= 1, "depth must be positive");
    estimate_from(&word_counts(kp, p + 1), p, kp.k())
}

/// Exact counts at one depth.
#[derive(Debug, Clone, PartialEq)]
pub struct CountReport {
    pub p: u32,
    pub total: BigUint,
    pub per_element: Vec<BigUint>,
    pub estimate: Option<EntropyEstimate>,
}

impl CountReport {
    pub fn max_element(&self) -> BigUint {
        self.per_element.iter().max().cloned().unwrap_or_default()
    }

    pub fn sum_elements(&self) -> BigUint {
        self.per_element.iter().sum()
    }

    /// max_i ≤ total ≤ Σ_i ≤ n · max_i, as a list of violated inequalities.
    pub fn sandwich_violations(&self) -> Vec<String> {
        let max = self.max_element();
        let sum = self.sum_elements();
        let n = BigUint::from(self.per_element.len());
        let mut out = Vec::new();
        if max > self.total {
            out.push(format!("p={}: max_i {max} > P {}", self.p, self.total));
        }
        if self.total > sum {
            out.push(format!("p={}: P {} > sum_i {sum}", self.p, self.total));
        }
        if sum > &n * &max {
            out.push(format!("p={}: sum_i {sum} > n*max_i {}", self.p, &n * &max));
        }
        out
    }

    pub fn to_json(&self) -> CountJson {
        CountJson {
            p: self.p,
            total: self.total.to_string(),
            per_element: self.per_element.iter().map(|x| x.to_string()).collect(),
            direct: self.estimate.map(|e| e.direct),
            ratio: self.estimate.map(|e| e.ratio),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountJson {
    pub p: u32,
    pub total: String,
    pub per_element: Vec<String>,
    pub direct: Option<f64>,
    pub ratio: Option<f64>,
}

/// Count reports for every depth `0..=p`.
pub fn count_reports(kp: &KernelPresentation, p: u32) -> Vec<CountReport> {
    let totals = word_counts(kp, p + 1);
    let per = cube_count_table(kp, p);
    (0..=p)
        .map(|q| CountReport {
            p: q,
            total: totals[q as usize].clone(),
            per_element: per[q as usize].clone(),
            estimate: (q >= 1).then(|| estimate_from(&totals, q, kp.k())),
        })
        .collect()
}

/// Entropy log_k ρ of the counting automaton's transfer matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct EntropyResult {
    pub rho: SpectralResult,
    pub entropy: LogEnclosure,
    pub counting_states: usize,
    pub diagnostics: Vec<EntropyEstimate>,
}

pub fn entropy(kp: &KernelPresentation, tol: f64) -> Result<EntropyResult> {
    entropy_with(kp, &SpectralOptions::with_tol(tol), 10)
}

/// As [`entropy`], with estimator diagnostics for depths `1..=depth`.
pub fn entropy_with(kp: &KernelPresentation, opts: &SpectralOptions, depth: u32) -> Result<EntropyResult> {
    let ca = CountingAutomaton::new(kp);
    let rho = spectral_radius_with(&ca.transfer_matrix(), opts)?;
    let entropy = LogEnclosure::of(&rho, kp.k(), kp.d());
    let counts = ca.path_counts(depth + 1);
    let diagnostics = (1..=depth).map(|p| estimate_from(&counts, p, kp.k())).collect();
    Ok(EntropyResult {
        rho,
        entropy,
        counting_states: ca.num_states(),
        diagnostics,
    })
}

pub const DEFAULT_SANDWICH_DEPTH: u32 = 30;

/// Dimension and entropy computed along separate paths, with the checks that
/// tie them together.
#[derive(Debug, Clone, PartialEq)]
pub struct TheoremReport {
    pub dimension: DimensionResult,
    pub entropy: EntropyResult,
    pub sandwich_depth: u32,
    /// |ratio estimator − dimension| at the sandwich depth.
    pub gelfand_gap: f64,
    pub violations: Vec<String>,
}

impl TheoremReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn verify_theorem(kp: &KernelPresentation, tol: f64) -> Result<TheoremReport> {
    verify_theorem_with(kp, &SpectralOptions::with_tol(tol), DEFAULT_SANDWICH_DEPTH)
}

pub fn verify_theorem_with(kp: &KernelPresentation, opts: &SpectralOptions, depth: u32) -> Result<TheoremReport> {
    let rho_a = spectral_radius_with(kp.matrix(), opts)?;
    let dimension = DimensionResult::new(rho_a, kp.k(), kp.d());
    let entropy = entropy_with(kp, opts, depth.min(10))?;
    let mut violations = Vec::new();
    if !dimension.rho.intersects(&entropy.rho) {
        violations.push(format!(
            "rho(A) in [{}, {}] misses rho(M) in [{}, {}]",
            dimension.rho.lower, dimension.rho.upper, entropy.rho.lower, entropy.rho.upper
        ));
    }
    if !dimension.dimension.intersects(&entropy.entropy) {
        violations.push(format!(
            "dimension [{}, {}] misses entropy [{}, {}]",
            dimension.dimension.lower, dimension.dimension.upper, entropy.entropy.lower, entropy.entropy.upper
        ));
    }
    let reports = count_reports(kp, depth);
    for r in &reports {
        violations.extend(r.sandwich_violations());
    }
    let gelfand_gap = reports
        .last()
        .and_then(|r| r.estimate)
        .map(|e| (e.ratio - dimension.value()).abs())
        .unwrap_or(0.0);
    let report = TheoremReport {
        dimension,
        entropy,
        sandwich_depth: depth,
        gelfand_gap,
        violations,
    };
    if report.passed() {
        Ok(report)
    } else {
        Err(Error::VerificationFailed(Box::new(report)))
    }
}
