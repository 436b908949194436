mod common;

use std::collections::HashSet;

use common::{corpus, kernel_of};
use num_bigint::BigUint;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use selfsim::automaton::canonical;
use selfsim::boxoracle::{builtin_set, BoxOracle, GeometricSet};
use selfsim::corpus::builtin;
use selfsim::entropy::{count_reports, cube_count, entropy_estimate, verify_theorem, word_count};
use selfsim::ggdc::{build_ggdc, ggdc_dimension, level_sets, RationalCube};
use selfsim::kernel::{compute_kernel, digit_quotient, rebase};
use selfsim::render::level_approximation;
use selfsim::saturate::saturate;
use selfsim::spectral::dimension;
use selfsim::specdsl::load;

#[test]
fn oracle_counts_equal_pipeline_counts() {
    for (b, kp) in corpus() {
        let mut oracle = BoxOracle::new(GeometricSet::from(b.clone()));
        for p in 0..=6 {
            let n = BigUint::from(oracle.cubes(p).unwrap().len());
            assert_eq!(cube_count(&kp, 0, p).unwrap(), n, "{} p={p}", b.name);
            // Monotone sandwich against the whole language.
            assert!(n <= word_count(&kp, p), "{} p={p}", b.name);
        }
    }
}

#[test]
fn oracle_is_submultiplicative() {
    // Two-dimensional sets stop at depth 6; the carpet's N_8 is in the tens of millions.
    for (name, depth) in [("cantor", 8usize), ("vicsek", 8), ("cantor-square", 6), ("sierpinski-carpet", 6)] {
        let mut o = BoxOracle::new(builtin_set(name).unwrap());
        let n: Vec<usize> = (0..=depth).map(|p| o.cubes(p as u32).unwrap().len()).collect();
        for p in 0..=4 {
            for q in 0..=4 {
                if p + q <= depth {
                    assert!(n[p + q] <= n[p] * n[q], "{name} {p}+{q}");
                }
            }
        }
        for p in 0..depth {
            assert!(n[p + 1] <= n[p] * 9, "{name} {p}");
        }
    }
}

#[test]
fn sandwich_to_depth_thirty() {
    for (b, kp) in corpus() {
        for r in count_reports(&kp, 30) {
            assert!(r.sandwich_violations().is_empty(), "{}: {:?}", b.name, r.sandwich_violations());
        }
    }
}

#[test]
fn column_sums_are_level_one_counts() {
    for (b, kp) in corpus() {
        for j in 0..kp.len() {
            let col = BigUint::from(kp.matrix().column_sum(j));
            assert_eq!(col, cube_count(&kp, j, 1).unwrap(), "{} X{j}", b.name);
        }
    }
}

#[test]
fn kernel_closure_on_random_pairs() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5e1f_5133);
    for (b, kp) in corpus() {
        let alphabet = kp.alphabet();
        for _ in 0..10 {
            let j = rng.gen_range(0..kp.len());
            let s = rng.gen_range(0..alphabet.size());
            let q = digit_quotient(&kp.element(j).unwrap().to_set_automaton(), s).map(|q| canonical(&q));
            match (q, kp.step(j, s)) {
                (None, None) => {}
                (Some(q), Some(t)) => assert_eq!(&q, kp.element(t).unwrap(), "{} X{j} by {s}", b.name),
                (q, t) => panic!("{}: X{j} by {s}: quotient {:?} target {t:?}", b.name, q.is_some()),
            }
        }
        assert!(kp.closure_violations().is_empty(), "{}", b.name);
    }
}

#[test]
fn theorem_holds_on_corpus() {
    for (b, kp) in corpus() {
        let r = verify_theorem(&kp, 1e-10).unwrap_or_else(|e| panic!("{}: {e}", b.name));
        assert!(r.passed());
        assert!(r.dimension.dimension.intersects(&r.entropy.entropy), "{}", b.name);
    }
}

#[test]
fn ratio_estimator_at_depth_sixty() {
    for (b, kp) in corpus() {
        let dim = dimension(&kp, 1e-12).unwrap().value();
        let e = entropy_estimate(&kp, 60);
        assert!((e.ratio - dim).abs() <= 1e-6, "{}: {} vs {dim}", b.name, e.ratio);
    }
}

#[test]
fn cantor_word_count_equals_cube_count() {
    let kp = kernel_of(&builtin("cantor").unwrap());
    for p in 0..=60 {
        assert_eq!(word_count(&kp, p), cube_count(&kp, 0, p).unwrap());
    }
}

#[test]
fn base_change_invariance() {
    for name in ["cantor", "cantor-square", "vicsek", "full-cube-2-2"] {
        let b = builtin(name).unwrap();
        let s = saturate(&b.automaton().unwrap());
        let d1 = dimension(&compute_kernel(&s).unwrap(), 1e-12).unwrap();
        let r = rebase(&s, 2).unwrap();
        let d2 = dimension(&compute_kernel(&r).unwrap(), 1e-12).unwrap();
        assert_eq!(r.automaton().alphabet().k(), b.k * b.k);
        assert!((d1.value() - d2.value()).abs() <= 1e-9, "{name}: {} vs {}", d1.value(), d2.value());
    }
}

#[test]
fn ggdc_invariants() {
    for (b, kp) in corpus() {
        let g = build_ggdc(&kp);
        let total: u64 = (0..kp.len()).map(|j| kp.matrix().column_sum(j)).sum();
        assert_eq!(g.num_vertices() as u64, total, "{}", b.name);
        let edges: u64 = g.vertices.iter().map(|v| kp.matrix().column_sum(v.i)).sum();
        assert_eq!(g.num_edges() as u64, edges, "{}", b.name);
        assert!(g.validate().passed(), "{}: {:?}", b.name, g.validate());
        let tol = 1e-10;
        let ra = dimension(&kp, tol).unwrap();
        let rg = ggdc_dimension(&g, tol).unwrap();
        assert!(ra.rho.intersects(&rg.rho), "{}", b.name);
    }
}

#[test]
fn ggdc_levels_nest_and_count() {
    for name in ["cantor", "vicsek", "singleton-zero", "full-cube-2-1"] {
        let kp = kernel_of(&builtin(name).unwrap());
        let k = BigRational::from_integer(kp.k().into());
        let g = build_ggdc(&kp);
        let mut prev: HashSet<RationalCube> = level_sets(&g, 0).unwrap().into_iter().collect();
        let mut scale = k.clone();
        for p in 1..=5 {
            let level = level_sets(&g, p).unwrap();
            // Level-p cubes sit on the k^-(p+1) grid; the enclosing k^-p grid
            // cube must be a level-(p-1) cube.
            for c in &level {
                let parent = RationalCube {
                    lo: c.lo.iter().map(|x| (x * &scale).floor() / &scale).collect(),
                    side: BigRational::from_integer(1.into()) / &scale,
                };
                assert!(parent.contains(c) && prev.contains(&parent), "{name} p={p}");
            }
            // Level p inside block j is the level-(p+1) cube set of X_j.
            for j in 0..kp.len() {
                let lo = BigRational::from_integer((2 * j as i64).into());
                let hi = BigRational::from_integer((2 * j as i64 + 1).into());
                let in_block = level.iter().filter(|c| c.lo[0] >= lo && c.lo[0] < hi).count();
                assert_eq!(BigUint::from(in_block), cube_count(&kp, j, p + 1).unwrap(), "{name} p={p} X{j}");
            }
            prev = level.into_iter().collect();
            scale *= &k;
        }
    }
}

#[test]
fn render_matches_counts_and_nests() {
    for (b, kp) in corpus() {
        for i in 0..kp.len().min(3) {
            let mut prev = level_approximation(&kp, i, 0).unwrap();
            for p in 1..=5 {
                let c = level_approximation(&kp, i, p).unwrap();
                assert_eq!(BigUint::from(c.len()), cube_count(&kp, i, p).unwrap(), "{} X{i} p={p}", b.name);
                let k = b.k as u64;
                for cube in &c.cubes {
                    let parent: Vec<u64> = cube.iter().map(|x| x / k).collect();
                    assert!(prev.cubes.binary_search(&parent).is_ok());
                }
                prev = c;
            }
        }
        let mut oracle = BoxOracle::new(GeometricSet::from(b.clone()));
        assert_eq!(level_approximation(&kp, 0, 3).unwrap().cubes, oracle.cubes(3).unwrap(), "{}", b.name);
    }
}

#[test]
fn vicsek_spec_matches_oracle() {
    let text = "base 3\ndim 2\nallow (1,1)\nallow (0,1)\nallow (2,1)\nallow (1,0)\nallow (1,2)\n";
    let a = load(text).unwrap();
    assert_eq!(a.num_states(), 1);
    assert_eq!(a.num_edges(), 5);
    let kp = compute_kernel(&saturate(&a)).unwrap();
    let n2 = BoxOracle::new(builtin_set("vicsek").unwrap()).cubes(2).unwrap().len();
    assert_eq!(cube_count(&kp, 0, 2).unwrap(), BigUint::from(n2));
    let dim = dimension(&kp, 1e-12).unwrap();
    assert!(dim.dimension.contains(5f64.ln() / 3f64.ln()));
}
