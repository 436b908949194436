//! The Mauldin–Williams graph-directed construction of a kernel presentation.
//!
//! Kernel element X_i is laid out in the block [2i, 2i+1] × [0,1]^(d-1).
//! Vertex (h,i,j) is the h-th scaled copy of X_i inside the copy of X_j,
//! bound to the h-th digit (lexicographically) that leads from j to i. Its
//! seed is that digit's closed cube in block j, and an edge (h,i,j) → (r,s,i)
//! carries the map sending block i onto the seed.

use std::fmt::Write as _;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::digits::DigitTuple;
use crate::error::{Error, Result};
use crate::kernel::KernelPresentation;
use crate::matrix::SquareMatrix;
use crate::spectral::{scc_decompose, spectral_radius_with, DimensionResult, SpectralOptions};

pub const DEFAULT_PATH_BUDGET: usize = 1_000_000;

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Closed axis-parallel cube `lo + [0, side]^d`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RationalCube {
    pub lo: Vec<BigRational>,
    pub side: BigRational,
}

impl RationalCube {
    pub fn hi(&self) -> Vec<BigRational> {
        self.lo.iter().map(|x| x + &self.side).collect()
    }

    pub fn contains(&self, other: &RationalCube) -> bool {
        self.lo
            .iter()
            .zip(&other.lo)
            .all(|(a, b)| a <= b && b + &other.side <= a + &self.side)
    }

    pub fn interiors_meet(&self, other: &RationalCube) -> bool {
        self.lo
            .iter()
            .zip(&other.lo)
            .all(|(a, b)| a.max(b) < &(a + &self.side).min(b + &other.side))
    }
}

/// `x ↦ ratio · x + translation`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimilarityMap {
    pub ratio: BigRational,
    pub translation: Vec<BigRational>,
}

impl SimilarityMap {
    pub fn identity(d: usize) -> Self {
        SimilarityMap {
            ratio: BigRational::one(),
            translation: vec![BigRational::zero(); d],
        }
    }

    pub fn apply(&self, x: &[BigRational]) -> Vec<BigRational> {
        x.iter().zip(&self.translation).map(|(x, t)| &self.ratio * x + t).collect()
    }

    pub fn apply_cube(&self, c: &RationalCube) -> RationalCube {
        RationalCube {
            lo: self.apply(&c.lo),
            side: &self.ratio * &c.side,
        }
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &SimilarityMap) -> SimilarityMap {
        SimilarityMap {
            ratio: &self.ratio * &inner.ratio,
            translation: self.apply(&inner.translation),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vertex {
    /// Copy number, starting at 1.
    pub h: u32,
    /// The contained element.
    pub i: usize,
    /// The container.
    pub j: usize,
    pub digit: DigitTuple,
}

impl Vertex {
    pub fn label(&self) -> String {
        if self.h < 10 && self.i < 10 && self.j < 10 {
            format!("{}{}{}", self.h, self.i, self.j)
        } else {
            format!("{},{},{}", self.h, self.i, self.j)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GgdcGraph {
    pub k: u32,
    pub d: u32,
    pub vertices: Vec<Vertex>,
    /// `(source, target)` vertex indices, sorted.
    pub edges: Vec<(usize, usize)>,
    pub seeds: Vec<RationalCube>,
    /// The map on every edge out of a vertex.
    pub maps: Vec<SimilarityMap>,
}

/// Lower corner of the block holding element `i`.
fn block_offset(i: usize, d: usize) -> Vec<BigRational> {
    let mut o = vec![BigRational::zero(); d];
    o[0] = rat(2 * i as i64, 1);
    o
}

pub fn build_ggdc(kp: &KernelPresentation) -> GgdcGraph {
    let k = kp.k();
    let d = kp.d() as usize;
    let n = kp.len();
    let inv_k = rat(1, k as i64);
    let mut vertices = Vec::new();
    let mut seeds = Vec::new();
    let mut maps = Vec::new();
    for j in 0..n {
        let mut copies = vec![0u32; n];
        // Transitions are sorted by symbol, which is lexicographic digit order.
        for &(b, i) in kp.transitions(j) {
            copies[i] += 1;
            let digit = kp.alphabet().decode(b);
            let corner: Vec<BigRational> = block_offset(j, d)
                .iter()
                .zip(digit.digits())
                .map(|(o, &x)| o + rat(x as i64, k as i64))
                .collect();
            seeds.push(RationalCube {
                lo: corner.clone(),
                side: inv_k.clone(),
            });
            let from = block_offset(i, d);
            maps.push(SimilarityMap {
                ratio: inv_k.clone(),
                translation: corner.iter().zip(&from).map(|(c, f)| c - f * &inv_k).collect(),
            });
            vertices.push(Vertex {
                h: copies[i],
                i,
                j,
                digit,
            });
        }
    }
    let mut order: Vec<usize> = (0..vertices.len()).collect();
    order.sort_by_key(|&v| (vertices[v].j, vertices[v].i, vertices[v].h));
    let vertices: Vec<Vertex> = order.iter().map(|&v| vertices[v].clone()).collect();
    let seeds: Vec<RationalCube> = order.iter().map(|&v| seeds[v].clone()).collect();
    let maps: Vec<SimilarityMap> = order.iter().map(|&v| maps[v].clone()).collect();
    let mut edges = Vec::new();
    for (s, vs) in vertices.iter().enumerate() {
        for (t, vt) in vertices.iter().enumerate() {
            if vt.j == vs.i {
                edges.push((s, t));
            }
        }
    }
    GgdcGraph {
        k,
        d: d as u32,
        vertices,
        edges,
        seeds,
        maps,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct GgdcValidation {
    pub liveness: Vec<String>,
    pub seed_overlap: Vec<String>,
    pub containment: Vec<String>,
    pub cycle_ratio: Vec<String>,
}

impl GgdcValidation {
    pub fn passed(&self) -> bool {
        self.liveness.is_empty()
            && self.seed_overlap.is_empty()
            && self.containment.is_empty()
            && self.cycle_ratio.is_empty()
    }

    pub fn all(&self) -> Vec<String> {
        [&self.liveness, &self.seed_overlap, &self.containment, &self.cycle_ratio]
            .into_iter()
            .flatten()
            .cloned()
            .collect()
    }
}

impl GgdcGraph {
    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn successors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        let start = self.edges.partition_point(|e| e.0 < v);
        self.edges[start..].iter().take_while(move |e| e.0 == v).map(|e| e.1)
    }

    /// Unweighted adjacency, M[t][s] = 1 for each edge s → t.
    pub fn adjacency(&self) -> SquareMatrix {
        let mut m = SquareMatrix::zeros(self.num_vertices());
        for &(s, t) in &self.edges {
            m.add_to(t, s, 1);
        }
        m
    }

    /// Checks the construction axioms; never fails, only reports.
    pub fn validate(&self) -> GgdcValidation {
        let mut out = GgdcValidation::default();
        let n = self.num_vertices();
        let mut has_out = vec![false; n];
        for &(s, _) in &self.edges {
            has_out[s] = true;
        }
        for (v, ok) in has_out.iter().enumerate() {
            if !ok {
                out.liveness.push(format!("vertex {} has no outgoing edge", self.vertices[v].label()));
            }
        }
        for a in 0..n {
            if self.seeds[a].side <= BigRational::zero() {
                out.seed_overlap.push(format!("seed of {} has empty interior", self.vertices[a].label()));
            }
            for b in a + 1..n {
                if self.seeds[a].interiors_meet(&self.seeds[b]) {
                    out.seed_overlap.push(format!(
                        "seeds of {} and {} overlap",
                        self.vertices[a].label(),
                        self.vertices[b].label()
                    ));
                }
            }
        }
        for v in 0..n {
            let images: Vec<(usize, RationalCube)> = self
                .successors(v)
                .map(|u| (u, self.maps[v].apply_cube(&self.seeds[u])))
                .collect();
            for (u, img) in &images {
                if !self.seeds[v].contains(img) {
                    out.containment.push(format!(
                        "image of seed {} leaves seed {}",
                        self.vertices[*u].label(),
                        self.vertices[v].label()
                    ));
                }
            }
            for x in 0..images.len() {
                for y in x + 1..images.len() {
                    if images[x].1.interiors_meet(&images[y].1) {
                        out.containment.push(format!(
                            "images of {} and {} inside {} overlap",
                            self.vertices[images[x].0].label(),
                            self.vertices[images[y].0].label(),
                            self.vertices[v].label()
                        ));
                    }
                }
            }
        }
        // Every cycle lies in one component; all maps on it must contract.
        let cond = scc_decompose(&self.adjacency());
        for comp in cond.components() {
            let cyclic = comp.len() > 1 || self.successors(comp[0]).any(|u| u == comp[0]);
            if !cyclic {
                continue;
            }
            for &v in comp {
                let r = &self.maps[v].ratio;
                if *r >= BigRational::one() || *r <= BigRational::zero() {
                    out.cycle_ratio.push(format!(
                        "map at {} on a cycle has ratio {r}",
                        self.vertices[v].label()
                    ));
                }
            }
        }
        out
    }

    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph ggdc {\n");
        for v in &self.vertices {
            let _ = writeln!(s, "  \"{}\";", v.label());
        }
        for &(a, b) in &self.edges {
            let _ = writeln!(
                s,
                "  \"{}\" -> \"{}\";",
                self.vertices[a].label(),
                self.vertices[b].label()
            );
        }
        s.push_str("}\n");
        s
    }

    pub fn to_json(&self) -> GgdcJson {
        let frac = |x: &BigRational| [x.numer().to_string(), x.denom().to_string()];
        GgdcJson {
            k: self.k,
            d: self.d,
            vertices: self
                .vertices
                .iter()
                .zip(&self.seeds)
                .zip(&self.maps)
                .map(|((v, c), m)| VertexJson {
                    label: v.label(),
                    h: v.h,
                    i: v.i,
                    j: v.j,
                    digits: v.digit.0.clone(),
                    seed_lo: c.lo.iter().map(frac).collect(),
                    seed_hi: c.hi().iter().map(frac).collect(),
                    map_ratio: frac(&m.ratio),
                    map_translation: m.translation.iter().map(frac).collect(),
                })
                .collect(),
            edges: self.edges.clone(),
        }
    }
}

/// Rationals are `[numerator, denominator]` decimal string pairs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexJson {
    pub label: String,
    pub h: u32,
    pub i: usize,
    pub j: usize,
    pub digits: Vec<u32>,
    pub seed_lo: Vec<[String; 2]>,
    pub seed_hi: Vec<[String; 2]>,
    pub map_ratio: [String; 2],
    pub map_translation: Vec<[String; 2]>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GgdcJson {
    pub k: u32,
    pub d: u32,
    pub vertices: Vec<VertexJson>,
    pub edges: Vec<(usize, usize)>,
}

pub fn validate_ggdc(g: &GgdcGraph) -> GgdcValidation {
    g.validate()
}

/// log_k ρ(Ã); every ratio is 1/k, so the similarity dimension reduces to this.
pub fn ggdc_dimension(g: &GgdcGraph, tol: f64) -> Result<DimensionResult> {
    ggdc_dimension_with(g, &SpectralOptions::with_tol(tol))
}

pub fn ggdc_dimension_with(g: &GgdcGraph, opts: &SpectralOptions) -> Result<DimensionResult> {
    let rho = spectral_radius_with(&g.adjacency(), opts)?;
    Ok(DimensionResult::new(rho, g.k, g.d))
}

/// The level-p construction: T_σ(J_σ(p)) over all length-p paths σ. Cubes
/// have side k^-(p+1); the result is sorted and deduplicated.
pub fn level_sets(g: &GgdcGraph, p: u32) -> Result<Vec<RationalCube>> {
    level_sets_with(g, p, DEFAULT_PATH_BUDGET)
}

pub fn level_sets_with(g: &GgdcGraph, p: u32, budget: usize) -> Result<Vec<RationalCube>> {
    let d = g.d as usize;
    let mut frontier: Vec<(usize, SimilarityMap)> =
        (0..g.num_vertices()).map(|v| (v, SimilarityMap::identity(d))).collect();
    if frontier.len() > budget {
        return Err(Error::PathBudgetExceeded { cap: budget });
    }
    for _ in 0..p {
        let mut next = Vec::new();
        for (u, m) in &frontier {
            let step = m.compose(&g.maps[*u]);
            for w in g.successors(*u) {
                if next.len() >= budget {
                    return Err(Error::PathBudgetExceeded { cap: budget });
                }
                next.push((w, step.clone()));
            }
        }
        frontier = next;
    }
    let mut cubes: Vec<RationalCube> = frontier.iter().map(|(u, m)| m.apply_cube(&g.seeds[*u])).collect();
    cubes.sort();
    cubes.dedup();
    Ok(cubes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automaton::SetAutomaton;
    use crate::digits::Alphabet;
    use crate::kernel::compute_kernel;
    use crate::saturate::saturate;

    fn kernel(k: u32, d: u32, letters: &[&[u32]]) -> KernelPresentation {
        let letters: Vec<Vec<u32>> = letters.iter().map(|l| l.to_vec()).collect();
        let a = SetAutomaton::single_state(Alphabet::new(k, d).unwrap(), &letters).unwrap();
        compute_kernel(&saturate(&a)).unwrap()
    }

    fn cantor() -> GgdcGraph {
        build_ggdc(&kernel(3, 1, &[&[0], &[2]]))
    }

    /// Labels with elements counted from 1.
    fn one_based(g: &GgdcGraph, v: usize) -> String {
        let x = &g.vertices[v];
        format!("{}{}{}", x.h, x.i + 1, x.j + 1)
    }

    #[test]
    fn cantor_graph_adjacency() {
        let g = cantor();
        let mut labels: Vec<String> = (0..g.num_vertices()).map(|v| one_based(&g, v)).collect();
        labels.sort();
        assert_eq!(labels, ["111", "121", "132", "133", "142", "144", "211"]);
        let mut edges: Vec<(String, String)> = g
            .edges
            .iter()
            .map(|&(a, b)| (one_based(&g, a), one_based(&g, b)))
            .collect();
        edges.sort();
        let mut expected: Vec<(String, String)> = [
            ("111", "111"),
            ("111", "121"),
            ("111", "211"),
            ("211", "111"),
            ("211", "121"),
            ("211", "211"),
            ("121", "132"),
            ("121", "142"),
            ("132", "133"),
            ("142", "144"),
            ("133", "133"),
            ("144", "144"),
        ]
        .iter()
        .map(|(a, b)| (a.to_string(), b.to_string()))
        .collect();
        expected.sort();
        assert_eq!(edges, expected);
        assert!(g.validate().passed());
    }

    #[test]
    fn cantor_digit_binding() {
        let g = cantor();
        // The two copies of C in C sit on digits 0 and 2; {0,1} on digit 1.
        let find = |h, i, j| g.vertices.iter().position(|v| (v.h, v.i, v.j) == (h, i, j)).unwrap();
        assert_eq!(g.vertices[find(1, 0, 0)].digit.0, vec![0]);
        assert_eq!(g.vertices[find(2, 0, 0)].digit.0, vec![2]);
        assert_eq!(g.vertices[find(1, 1, 0)].digit.0, vec![1]);
        // T_121 maps block 1 = [2,3] onto [1/3, 2/3].
        let m = &g.maps[find(1, 1, 0)];
        assert_eq!(m.apply(&[rat(2, 1)]), vec![rat(1, 3)]);
        assert_eq!(m.apply(&[rat(3, 1)]), vec![rat(2, 3)]);
    }

    #[test]
    fn trivial_graphs() {
        let g = build_ggdc(&kernel(3, 1, &[&[0]]));
        assert_eq!((g.num_vertices(), g.num_edges()), (1, 1));
        let g = build_ggdc(&kernel(2, 1, &[&[0], &[1]]));
        assert_eq!((g.num_vertices(), g.num_edges()), (2, 4));
        assert!(ggdc_dimension(&g, 1e-9).unwrap().dimension.contains(1.0));
    }

    #[test]
    fn cantor_dimension_transfers() {
        let g = cantor();
        let r = ggdc_dimension(&g, 1e-12).unwrap();
        assert!(r.rho.contains(&rat(2, 1)));
        let w: Vec<String> = r.rho.scc_witness.iter().map(|&v| one_based(&g, v)).collect();
        assert_eq!(w, ["111", "211"]);
    }

    #[test]
    fn fault_injection() {
        let mut g = cantor();
        g.edges.retain(|&(s, _)| s != 0);
        assert!(!g.validate().liveness.is_empty());

        let mut g = cantor();
        g.seeds[1] = g.seeds[0].clone();
        assert!(!g.validate().seed_overlap.is_empty());
    }

    #[test]
    fn cantor_levels() {
        let g = cantor();
        let l1 = level_sets(&g, 1).unwrap();
        // Block 0 at level 1: the eight ninths of the saturated depth-2 words.
        let block0: Vec<i64> = l1
            .iter()
            .filter(|c| c.lo[0] < rat(1, 1))
            .map(|c| (&c.lo[0] * rat(9, 1)).to_integer().try_into().unwrap())
            .collect();
        assert_eq!(block0, vec![0, 1, 2, 3, 5, 6, 7, 8]);
        for c in &l1 {
            assert_eq!(c.side, rat(1, 9));
        }
        let l2 = level_sets(&g, 2).unwrap();
        for c in &l2 {
            assert!(l1.iter().any(|p| p.contains(c)));
        }
        assert!(matches!(level_sets_with(&g, 3, 10), Err(Error::PathBudgetExceeded { cap: 10 })));
    }

    #[test]
    fn dot_and_json() {
        let g = cantor();
        let dot = g.to_dot();
        assert_eq!(dot.matches("->").count(), 12);
        assert!(dot.contains("\"100\" -> \"110\";"));
        let j = g.to_json();
        assert_eq!(j.vertices.len(), 7);
        assert_eq!(j.vertices[0].map_ratio, ["1".to_string(), "3".to_string()]);
    }
}
