//! Certified Perron roots of nonnegative integer matrices.
//!
//! The matrix is split into strongly connected components. On each
//! irreducible block B the Collatz–Wielandt quotients of B+I against a
//! positive integer vector bound ρ(B)+1 from both sides; power iteration
//! tightens them. All arithmetic is exact.

use std::cmp::Ordering;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::KernelPresentation;
use crate::matrix::SquareMatrix;
use crate::numeric::{bits_for, rational_from_f64, rational_to_decimal, rational_to_f64_down, rational_to_f64_up};

pub const DEFAULT_MAX_ITERATIONS: u64 = 1_000_000;

/// Strongly connected components of the digraph with an edge j → i whenever
/// A[i][j] > 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Condensation {
    components: Vec<Vec<usize>>,
    component_of: Vec<usize>,
    dag: Vec<(usize, usize)>,
}

impl Condensation {
    /// Components sorted by smallest member; members sorted.
    pub fn components(&self) -> &[Vec<usize>] {
        &self.components
    }

    pub fn component_of(&self, v: usize) -> usize {
        self.component_of[v]
    }

    /// Edges between distinct components, deduplicated and sorted.
    pub fn dag(&self) -> &[(usize, usize)] {
        &self.dag
    }
}

pub fn scc_decompose(a: &SquareMatrix) -> Condensation {
    let n = a.n();
    let succ: Vec<Vec<usize>> = (0..n)
        .map(|j| (0..n).filter(|&i| a.get(i, j) > 0).collect())
        .collect();

    // Iterative Tarjan.
    const UNSEEN: usize = usize::MAX;
    let mut index = vec![UNSEEN; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut raw: Vec<Vec<usize>> = Vec::new();
    let mut counter = 0;
    for root in 0..n {
        if index[root] != UNSEEN {
            continue;
        }
        let mut call: Vec<(usize, usize)> = vec![(root, 0)];
        index[root] = counter;
        low[root] = counter;
        counter += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(&mut (v, ref mut next)) = call.last_mut() {
            if *next < succ[v].len() {
                let w = succ[v][*next];
                *next += 1;
                if index[w] == UNSEEN {
                    index[w] = counter;
                    low[w] = counter;
                    counter += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                call.pop();
                if let Some(&(parent, _)) = call.last() {
                    low[parent] = low[parent].min(low[v]);
                }
                if low[v] == index[v] {
                    let mut comp = Vec::new();
                    loop {
                        let w = stack.pop().expect("tarjan stack");
                        on_stack[w] = false;
                        comp.push(w);
                        if w == v {
                            break;
                        }
                    }
                    comp.sort_unstable();
                    raw.push(comp);
                }
            }
        }
    }
    raw.sort_by_key(|c| c[0]);
    let mut component_of = vec![0; n];
    for (c, comp) in raw.iter().enumerate() {
        for &v in comp {
            component_of[v] = c;
        }
    }
    let mut dag: Vec<(usize, usize)> = (0..n)
        .flat_map(|j| succ[j].iter().map(move |&i| (j, i)))
        .map(|(j, i)| (component_of[j], component_of[i]))
        .filter(|(x, y)| x != y)
        .collect();
    dag.sort_unstable();
    dag.dedup();
    Condensation {
        components: raw,
        component_of,
        dag,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralOptions {
    /// Target width of the enclosure.
    pub tol: BigRational,
    /// Power-iteration steps allowed per component.
    pub max_iterations: u64,
}

impl SpectralOptions {
    pub fn with_tol(tol: f64) -> Self {
        assert!(tol > 0.0 && tol.is_finite(), "tolerance must be positive");
        SpectralOptions {
            tol: rational_from_f64(tol),
            max_iterations: DEFAULT_MAX_ITERATIONS,
        }
    }
}

impl Default for SpectralOptions {
    fn default() -> Self {
        Self::with_tol(1e-9)
    }
}

/// Enclosure of ρ for one strongly connected component.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentBound {
    pub members: Vec<usize>,
    pub lower: BigRational,
    pub upper: BigRational,
    pub iterations: u64,
}

/// A rational enclosure `lower ≤ ρ(A) ≤ upper`.
///
/// The bounds are valid even when `certified` is false; only the requested
/// width was missed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpectralResult {
    pub lower: BigRational,
    pub upper: BigRational,
    /// Members of a component whose upper bound is the overall upper bound.
    pub scc_witness: Vec<usize>,
    pub iterations: u64,
    pub certified: bool,
    pub components: Vec<ComponentBound>,
}

impl SpectralResult {
    pub fn value(&self) -> f64 {
        let mid = (&self.lower + &self.upper) / BigRational::from_integer(2.into());
        rational_to_f64_down(&mid)
    }

    pub fn width(&self) -> BigRational {
        &self.upper - &self.lower
    }

    pub fn width_f64(&self) -> f64 {
        rational_to_f64_up(&self.width())
    }

    pub fn contains(&self, x: &BigRational) -> bool {
        &self.lower <= x && x <= &self.upper
    }

    pub fn intersects(&self, other: &SpectralResult) -> bool {
        self.lower <= other.upper && other.lower <= self.upper
    }

    pub fn to_json(&self, places: usize) -> SpectralJson {
        SpectralJson {
            lower: rational_to_decimal(&self.lower, places, false),
            upper: rational_to_decimal(&self.upper, places, true),
            precision: places,
            value: format!("{:.*}", places.min(17), self.value()),
            scc_witness: self.scc_witness.clone(),
            iterations: self.iterations,
            certified: self.certified,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpectralJson {
    pub lower: String,
    pub upper: String,
    pub precision: usize,
    pub value: String,
    pub scc_witness: Vec<usize>,
    pub iterations: u64,
    pub certified: bool,
}

pub fn spectral_radius(a: &SquareMatrix, tol: f64) -> Result<SpectralResult> {
    spectral_radius_with(a, &SpectralOptions::with_tol(tol))
}

pub fn spectral_radius_with(a: &SquareMatrix, opts: &SpectralOptions) -> Result<SpectralResult> {
    assert!(opts.tol > BigRational::zero(), "tolerance must be positive");
    let cond = scc_decompose(a);
    let mut components = Vec::with_capacity(cond.components().len());
    let mut certified = true;
    let mut iterations = 0;
    for members in cond.components() {
        let b = a.submatrix(members);
        let (lower, upper, iters, ok) = if b.is_zero() {
            (BigRational::zero(), BigRational::zero(), 0, true)
        } else {
            collatz_wielandt(&b, opts)
        };
        certified &= ok;
        iterations += iters;
        components.push(ComponentBound {
            members: members.clone(),
            lower,
            upper,
            iterations: iters,
        });
    }
    let lower = components.iter().map(|c| &c.lower).max().cloned().unwrap_or_else(BigRational::zero);
    let witness = components
        .iter()
        .max_by(|x, y| x.upper.cmp(&y.upper).then(y.members[0].cmp(&x.members[0])))
        .map(|c| c.members.clone())
        .unwrap_or_default();
    let upper = components.iter().map(|c| &c.upper).max().cloned().unwrap_or_else(BigRational::zero);
    let result = SpectralResult {
        lower,
        upper,
        scc_witness: witness,
        iterations,
        certified,
        components,
    };
    if result.certified {
        Ok(result)
    } else {
        Err(Error::ToleranceNotReached(Box::new(result)))
    }
}

/// Bounds on ρ(B) for irreducible nonzero B. Returns (lower, upper,
/// iterations, reached tolerance).
fn collatz_wielandt(b: &SquareMatrix, opts: &SpectralOptions) -> (BigRational, BigRational, u64, bool) {
    let n = b.n();
    let mut m = b.clone();
    for i in 0..n {
        m.add_to(i, i, 1);
    }
    let bits = 128 + bits_for(&opts.tol);
    let mut v: Vec<BigUint> = vec![BigUint::one(); n];
    let mut best_lo: Option<BigRational> = None;
    let mut best_hi: Option<BigRational> = None;
    let mut iter = 0;
    loop {
        let w = m.mul_vec(&v);
        iter += 1;
        // Positive diagonal and positive v keep w positive.
        let (mut lo_i, mut hi_i) = (0, 0);
        for i in 1..n {
            if ratio_cmp(&w[i], &v[i], &w[lo_i], &v[lo_i]) == Ordering::Less {
                lo_i = i;
            }
            if ratio_cmp(&w[i], &v[i], &w[hi_i], &v[hi_i]) == Ordering::Greater {
                hi_i = i;
            }
        }
        let one = BigRational::one();
        let lo = ratio(&w[lo_i], &v[lo_i]) - &one;
        let hi = ratio(&w[hi_i], &v[hi_i]) - &one;
        if best_lo.as_ref().is_none_or(|x| &lo > x) {
            best_lo = Some(lo);
        }
        if best_hi.as_ref().is_none_or(|x| &hi < x) {
            best_hi = Some(hi);
        }
        let (l, h) = (best_lo.as_ref().unwrap(), best_hi.as_ref().unwrap());
        if h - l <= opts.tol {
            return (l.clone(), h.clone(), iter, true);
        }
        if iter >= opts.max_iterations {
            return (l.clone(), h.clone(), iter, false);
        }
        let max = w.iter().max().expect("nonempty").clone();
        v = w
            .iter()
            .map(|x| {
                let num = x << bits;
                let q = &num / &max;
                if (&q * &max) == num {
                    q
                } else {
                    q + 1u32
                }
            })
            .collect();
    }
}

fn ratio_cmp(a: &BigUint, b: &BigUint, c: &BigUint, d: &BigUint) -> Ordering {
    (a * d).cmp(&(c * b))
}

fn ratio(a: &BigUint, b: &BigUint) -> BigRational {
    BigRational::new(BigInt::from(a.clone()), BigInt::from(b.clone()))
}

/// `[lower, upper]` enclosure of log_k ρ, clamped to `[0, d]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LogEnclosure {
    pub lower: f64,
    pub upper: f64,
    pub value: f64,
}

impl LogEnclosure {
    /// Outward-rounded log base `k` of the rational interval.
    pub fn of(rho: &SpectralResult, k: u32, d: u32) -> Self {
        let ln_k = (k as f64).ln();
        let cap = d as f64;
        let lower = if rho.lower <= BigRational::one() {
            0.0
        } else {
            let x = rational_to_f64_down(&rho.lower);
            widen_down(widen_down(x.ln()) / ln_k.next_up())
        };
        let upper = if rho.upper <= BigRational::one() {
            // ρ is 0 or at least 1 for integer matrices.
            0.0
        } else {
            let x = rational_to_f64_up(&rho.upper);
            widen_up(widen_up(x.ln()) / ln_k.next_down())
        };
        let lower = lower.clamp(0.0, cap);
        let upper = upper.clamp(lower, cap);
        let mid = rho.value();
        let value = if mid <= 1.0 { 0.0 } else { (mid.ln() / ln_k).clamp(lower, upper) };
        LogEnclosure { lower, upper, value }
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }

    pub fn intersects(&self, other: &LogEnclosure) -> bool {
        self.lower <= other.upper && other.lower <= self.upper
    }
}

fn widen_down(x: f64) -> f64 {
    x.next_down().next_down()
}

fn widen_up(x: f64) -> f64 {
    x.next_up().next_up()
}

/// Hausdorff dimension log_k ρ(A) with the enclosure it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct DimensionResult {
    pub k: u32,
    pub d: u32,
    pub rho: SpectralResult,
    pub dimension: LogEnclosure,
}

impl DimensionResult {
    pub fn new(rho: SpectralResult, k: u32, d: u32) -> Self {
        let dimension = LogEnclosure::of(&rho, k, d);
        DimensionResult { k, d, rho, dimension }
    }

    pub fn value(&self) -> f64 {
        self.dimension.value
    }

    pub fn to_json(&self, places: usize) -> DimensionJson {
        DimensionJson {
            k: self.k,
            d: self.d,
            value: format!("{:.*}", places.min(17), self.dimension.value),
            lower: format!("{:.*}", places.min(17), round_toward(self.dimension.lower, places, false)),
            upper: format!("{:.*}", places.min(17), round_toward(self.dimension.upper, places, true)),
            rho: self.rho.to_json(places),
        }
    }
}

/// Nudges `x` so that printing it with `places` decimals stays outward.
fn round_toward(x: f64, places: usize, up: bool) -> f64 {
    let places = places.min(17) as i32;
    let scale = 10f64.powi(places);
    let r = if up { (x * scale).ceil() / scale } else { (x * scale).floor() / scale };
    if up { r.max(x) } else { r.min(x) }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DimensionJson {
    pub k: u32,
    pub d: u32,
    pub value: String,
    pub lower: String,
    pub upper: String,
    pub rho: SpectralJson,
}

pub fn dimension(kp: &KernelPresentation, tol: f64) -> Result<DimensionResult> {
    dimension_with(kp, &SpectralOptions::with_tol(tol))
}

pub fn dimension_with(kp: &KernelPresentation, opts: &SpectralOptions) -> Result<DimensionResult> {
    let rho = spectral_radius_with(kp.matrix(), opts)?;
    Ok(DimensionResult::new(rho, kp.k(), kp.d()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m<const N: usize>(rows: [[u64; N]; N]) -> SquareMatrix {
        SquareMatrix::from_rows(&rows)
    }

    fn int(x: i64) -> BigRational {
        BigRational::from_integer(x.into())
    }

    fn cantor() -> SquareMatrix {
        m([[2, 0, 0, 0], [1, 0, 0, 0], [0, 1, 1, 0], [0, 1, 0, 1]])
    }

    #[test]
    fn scc_examples() {
        let c = scc_decompose(&cantor());
        assert_eq!(c.components(), &[vec![0], vec![1], vec![2], vec![3]]);
        assert_eq!(c.dag(), &[(0, 1), (1, 2), (1, 3)]);
        assert_eq!(scc_decompose(&m([[0, 1], [1, 0]])).components(), &[vec![0, 1]]);
        assert_eq!(scc_decompose(&m([[1]])).components(), &[vec![0]]);
    }

    #[test]
    fn scc_mixed() {
        // 0 <-> 2, 1 alone feeding into them, 3 reached from 2.
        let a = m([[0, 1, 1, 0], [0, 0, 0, 0], [1, 0, 0, 0], [0, 0, 1, 1]]);
        let c = scc_decompose(&a);
        assert_eq!(c.components(), &[vec![0, 2], vec![1], vec![3]]);
        assert_eq!(c.dag(), &[(0, 2), (1, 0)]);
    }

    #[test]
    fn cantor_radius_is_exactly_two() {
        let r = spectral_radius(&cantor(), 1e-12).unwrap();
        assert!(r.contains(&int(2)));
        assert!(r.width() <= rational_from_f64(1e-12));
        assert_eq!(r.scc_witness, vec![0]);
    }

    #[test]
    fn trivial_radii() {
        let r = spectral_radius(&m([[1]]), 1e-9).unwrap();
        assert_eq!((r.lower.clone(), r.upper.clone()), (int(1), int(1)));
        let r = spectral_radius(&m([[0, 2], [2, 0]]), 1e-9).unwrap();
        assert!(r.contains(&int(2)));
        let r = spectral_radius(&m([[0, 1], [0, 0]]), 1e-9).unwrap();
        assert_eq!((r.lower.clone(), r.upper.clone()), (int(0), int(0)));
    }

    #[test]
    fn golden_ratio_enclosed() {
        let r = spectral_radius(&m([[1, 1], [1, 0]]), 1e-15).unwrap();
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        assert!(r.lower <= rational_from_f64(phi + 1e-15));
        assert!(r.upper >= rational_from_f64(phi - 1e-15));
        assert!(r.width_f64() <= 1e-15);
        // φ² = φ + 1 changes sign across the enclosure.
        let f = |x: &BigRational| x * x - x - int(1);
        assert!(f(&r.lower) <= BigRational::zero() && f(&r.upper) >= BigRational::zero());
    }

    #[test]
    fn iteration_cap_reports_uncertified_bounds() {
        let opts = SpectralOptions {
            tol: rational_from_f64(1e-30),
            max_iterations: 2,
        };
        match spectral_radius_with(&m([[1, 1], [1, 0]]), &opts) {
            Err(Error::ToleranceNotReached(r)) => {
                assert!(!r.certified);
                assert!(r.lower < r.upper);
                let phi = rational_from_f64((1.0 + 5f64.sqrt()) / 2.0);
                assert!(r.lower < phi && phi < r.upper);
            }
            other => panic!("expected tolerance failure, got {other:?}"),
        }
    }

    #[test]
    fn transpose_and_permutation_invariance() {
        let a = m([[1, 1, 0], [1, 0, 1], [0, 2, 1]]);
        let r = spectral_radius(&a, 1e-12).unwrap();
        let rt = spectral_radius(&a.transpose(), 1e-12).unwrap();
        assert!(r.intersects(&rt));
        let rp = spectral_radius(&a.permute(&[2, 0, 1]), 1e-12).unwrap();
        assert_eq!((rp.lower, rp.upper), (r.lower, r.upper));
    }

    #[test]
    fn log_enclosure_of_exact_powers() {
        let r = spectral_radius(&m([[2]]), 1e-9).unwrap();
        let e = LogEnclosure::of(&r, 2, 1);
        assert!(e.contains(1.0));
        assert_eq!(e.upper, 1.0);
        let r = spectral_radius(&cantor(), 1e-12).unwrap();
        let e = LogEnclosure::of(&r, 3, 1);
        assert!(e.contains(2f64.ln() / 3f64.ln()));
        assert!(e.width() <= 1e-11);
    }

    #[test]
    fn json_has_decimal_strings() {
        let r = spectral_radius(&cantor(), 1e-12).unwrap();
        let j = r.to_json(15);
        assert_eq!(j.lower, "2.000000000000000");
        assert_eq!(j.upper, "2.000000000000000");
        assert_eq!(j.precision, 15);
    }
}
