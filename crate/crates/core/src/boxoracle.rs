//! Closed-cube box counts computed straight from the branch maps.
//!
//! This is deliberately independent of the automaton pipeline. A closed
//! rectangle R meets the attractor K iff some branch f has
//! f⁻¹(R) ∩ [0,1]^d nonempty and meeting K. Rectangles have corners in
//! k^-m ℤ, so the preimage graph is finite and "meets K" is the greatest
//! fixed point: R meets K iff an infinite branch sequence keeps it nonempty.

use num_bigint::BigUint;
use rustc_hash::{FxHashMap, FxHashSet};

use crate::corpus::{builtin, Builtin};
use crate::digits::MAX_DIM;
use crate::error::{Error, Result};

pub const DEFAULT_BOX_BUDGET: usize = 10_000_000;

/// Attractor of the maps x ↦ (x + b)/k.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeometricSet {
    pub name: String,
    pub k: u32,
    pub d: u32,
    pub branches: Vec<Vec<u32>>,
}

impl From<Builtin> for GeometricSet {
    fn from(b: Builtin) -> Self {
        GeometricSet {
            name: b.name,
            k: b.k,
            d: b.d,
            branches: b.branches,
        }
    }
}

pub fn builtin_set(name: &str) -> Result<GeometricSet> {
    builtin(name).map(GeometricSet::from)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoxCount {
    pub p: u32,
    pub count: BigUint,
}

/// `[lo, hi]` per coordinate, in units of k^-m; the exponent is kept minimal.
/// Coordinates past the dimension stay `(0, 0)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct Rect {
    m: u32,
    bounds: [(i128, i128); MAX_DIM as usize],
}

/// Memoized meets-K oracle for one set.
pub struct BoxOracle {
    set: GeometricSet,
    memo: FxHashMap<Rect, bool>,
    budget: usize,
}

impl BoxOracle {
    pub fn new(set: GeometricSet) -> Self {
        Self::with_budget(set, DEFAULT_BOX_BUDGET)
    }

    pub fn with_budget(set: GeometricSet, budget: usize) -> Self {
        assert!(!set.branches.is_empty(), "a set needs at least one branch");
        BoxOracle {
            set,
            memo: FxHashMap::default(),
            budget,
        }
    }

    pub fn set(&self) -> &GeometricSet {
        &self.set
    }

    fn dims(&self) -> usize {
        self.set.d as usize
    }

    fn normalize(&self, mut r: Rect) -> Rect {
        let k = self.set.k as i128;
        let d = self.dims();
        while r.m > 0 && r.bounds[..d].iter().all(|&(a, b)| a % k == 0 && b % k == 0) {
            for (a, b) in &mut r.bounds[..d] {
                *a /= k;
                *b /= k;
            }
            r.m -= 1;
        }
        r
    }

    fn is_unit(&self, r: &Rect) -> bool {
        r.m == 0 && r.bounds[..self.dims()].iter().all(|&b| b == (0, 1))
    }

    /// f_b⁻¹(r) ∩ [0,1]^d, or `None` when empty.
    fn preimage(&self, r: &Rect, b: &[u32]) -> Option<Rect> {
        let k = self.set.k as i128;
        let scale = k.pow(r.m);
        let mut bounds = r.bounds;
        for (slot, &digit) in bounds.iter_mut().zip(b) {
            let lo = (k * slot.0 - digit as i128 * scale).max(0);
            let hi = (k * slot.1 - digit as i128 * scale).min(scale);
            if lo > hi {
                return None;
            }
            *slot = (lo, hi);
        }
        Some(self.normalize(Rect { m: r.m, bounds }))
    }

    fn meets(&mut self, root: Rect) -> bool {
        if self.is_unit(&root) {
            return true;
        }
        if let Some(&v) = self.memo.get(&root) {
            return v;
        }
        let mut stack: Vec<(Rect, usize)> = vec![(root, 0)];
        let mut on_stack: FxHashSet<Rect> = FxHashSet::default();
        on_stack.insert(root);
        while let Some((rect, next)) = stack.last_mut() {
            if *next == self.set.branches.len() {
                let (r, _) = stack.pop().expect("nonempty");
                on_stack.remove(&r);
                self.memo.insert(r, false);
                continue;
            }
            let b = *next;
            *next += 1;
            let Some(child) = self.preimage(rect, &self.set.branches[b]) else {
                continue;
            };
            let hit = self.is_unit(&child) || on_stack.contains(&child) || self.memo.get(&child) == Some(&true);
            if hit {
                for (r, _) in stack.drain(..) {
                    self.memo.insert(r, true);
                }
                return true;
            }
            if self.memo.get(&child) == Some(&false) {
                continue;
            }
            on_stack.insert(child);
            stack.push((child, 0));
        }
        false
    }

    /// Whether the closed level-p cube at integer position `pos` meets K.
    pub fn cube_meets(&mut self, p: u32, pos: &[u64]) -> bool {
        let mut bounds = [(0, 0); MAX_DIM as usize];
        for (slot, &c) in bounds.iter_mut().zip(pos) {
            *slot = (c as i128, c as i128 + 1);
        }
        let r = self.normalize(Rect { m: p, bounds });
        self.meets(r)
    }

    /// Positions of all level-p cubes meeting K, sorted.
    pub fn cubes(&mut self, p: u32) -> Result<Vec<Vec<u64>>> {
        self.check_exponent(p)?;
        let d = self.set.d as usize;
        let k = self.set.k as u64;
        let mut level: Vec<Vec<u64>> = vec![vec![0; d]];
        for q in 1..=p {
            let mut next = Vec::new();
            for parent in &level {
                let mut child = vec![0u64; d];
                for offset in 0..k.pow(d as u32) {
                    let mut o = offset;
                    for c in (0..d).rev() {
                        child[c] = parent[c] * k + o % k;
                        o /= k;
                    }
                    if self.cube_meets(q, &child) {
                        if next.len() >= self.budget {
                            return Err(Error::BudgetExceeded { cap: self.budget });
                        }
                        next.push(child.clone());
                    }
                }
            }
            level = next;
        }
        level.sort_unstable();
        Ok(level)
    }

    fn check_exponent(&self, p: u32) -> Result<()> {
        // Preimages multiply coordinates by k before clipping.
        let fits = (self.set.k as u128).checked_pow(p + 1).is_some_and(|x| x < 1 << 100);
        if fits {
            Ok(())
        } else {
            Err(Error::BudgetExceeded { cap: self.budget })
        }
    }

    /// N_q for every depth `0..=p`.
    pub fn counts(&mut self, p: u32) -> Result<Vec<BoxCount>> {
        (0..=p)
            .map(|q| {
                Ok(BoxCount {
                    p: q,
                    count: BigUint::from(self.cubes(q)?.len()),
                })
            })
            .collect()
    }
}

pub fn count_boxes(s: &GeometricSet, p: u32) -> Result<BoxCount> {
    let cubes = BoxOracle::new(s.clone()).cubes(p)?;
    Ok(BoxCount {
        p,
        count: BigUint::from(cubes.len()),
    })
}

/// `(log_k(N_p)/p, log_k(N_{p+1}/N_p))`.
pub fn box_dimension_estimate(s: &GeometricSet, p: u32) -> Result<(f64, f64)> {
    assert!(p >= 1, "depth must be positive");
    let mut oracle = BoxOracle::new(s.clone());
    let np = oracle.cubes(p)?.len() as f64;
    let next = oracle.cubes(p + 1)?.len() as f64;
    let ln_k = (s.k as f64).ln();
    let direct = (np.ln() / ln_k) / p as f64;
    let ratio = (next / np).ln() / ln_k;
    Ok((snap(direct), snap(ratio)))
}

/// Rounds values within a few ulps of an integer onto it.
fn snap(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() <= 4.0 * f64::EPSILON * r.abs().max(1.0) {
        r
    } else {
        x
    }
}

pub fn counts_csv(counts: &[BoxCount]) -> String {
    let mut s = String::from("p,N_p\n");
    for c in counts {
        s.push_str(&format!("{},{}\n", c.p, c.count));
    }
    s
}
