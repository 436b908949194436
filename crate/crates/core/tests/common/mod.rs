//! Oracles shared by the integration tests. Nothing here calls into the
//! spectral module; roots are located from the exact characteristic
//! polynomial.

#![allow(dead_code)]

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use selfsim::corpus::{builtins, Builtin};
use selfsim::kernel::{compute_kernel, KernelPresentation};
use selfsim::matrix::SquareMatrix;
use selfsim::saturate::saturate;

pub fn kernel_of(b: &Builtin) -> KernelPresentation {
    compute_kernel(&saturate(&b.automaton().unwrap())).unwrap()
}

pub fn corpus() -> Vec<(Builtin, KernelPresentation)> {
    builtins().iter().map(|b| (b.clone(), kernel_of(b))).collect()
}

pub fn int(x: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(x))
}

/// Coefficients, lowest degree first.
pub type Poly = Vec<BigRational>;

/// det(xI − A) by Faddeev–LeVerrier.
pub fn charpoly(a: &SquareMatrix) -> Poly {
    let n = a.n();
    let am: Vec<Vec<BigRational>> = a.rows().iter().map(|r| r.iter().map(|&x| int(x as i64)).collect()).collect();
    let mut c = vec![BigRational::zero(); n + 1];
    c[n] = BigRational::one();
    let mut m = vec![vec![BigRational::zero(); n]; n];
    for k in 1..=n {
        // M_k = A M_{k-1} + c_{n-k+1} I
        let mut next = vec![vec![BigRational::zero(); n]; n];
        for i in 0..n {
            for j in 0..n {
                let mut s = BigRational::zero();
                for l in 0..n {
                    if !am[i][l].is_zero() && !m[l][j].is_zero() {
                        s += &am[i][l] * &m[l][j];
                    }
                }
                if i == j {
                    s += &c[n - k + 1];
                }
                next[i][j] = s;
            }
        }
        m = next;
        let mut tr = BigRational::zero();
        for i in 0..n {
            for l in 0..n {
                tr += &am[i][l] * &m[l][i];
            }
        }
        c[n - k] = -tr / int(k as i64);
    }
    c
}

fn trim_poly(mut p: Poly) -> Poly {
    while p.len() > 1 && p.last().unwrap().is_zero() {
        p.pop();
    }
    p
}

pub fn eval(p: &Poly, x: &BigRational) -> BigRational {
    p.iter().rev().fold(BigRational::zero(), |acc, c| acc * x + c)
}

fn derivative(p: &Poly) -> Poly {
    trim_poly(p.iter().enumerate().skip(1).map(|(i, c)| c * int(i as i64)).collect())
}

fn rem(a: &Poly, b: &Poly) -> Poly {
    let mut r = a.clone();
    let db = b.len() - 1;
    let lead = b.last().unwrap().clone();
    while r.len() > db && !(r.len() == 1 && r[0].is_zero()) {
        let shift = r.len() - 1 - db;
        let q = r.last().unwrap() / &lead;
        for (i, c) in b.iter().enumerate() {
            r[i + shift] -= &q * c;
        }
        r.pop();
        r = trim_poly(r);
        if r.len() <= db {
            break;
        }
    }
    trim_poly(r)
}

fn is_zero_poly(p: &Poly) -> bool {
    p.iter().all(Zero::is_zero)
}

fn sturm_chain(p: &Poly) -> Vec<Poly> {
    let mut chain = vec![p.clone(), derivative(p)];
    loop {
        let n = chain.len();
        if is_zero_poly(&chain[n - 1]) || chain[n - 1].len() == 1 {
            break;
        }
        let r: Poly = rem(&chain[n - 2], &chain[n - 1]).into_iter().map(|c| -c).collect();
        if is_zero_poly(&r) {
            break;
        }
        chain.push(r);
    }
    chain.retain(|q| !is_zero_poly(q));
    chain
}

fn sign_changes(chain: &[Poly], x: &BigRational) -> usize {
    let signs: Vec<bool> = chain
        .iter()
        .map(|q| eval(q, x))
        .filter(|v| !v.is_zero())
        .map(|v| v.is_positive())
        .collect();
    signs.windows(2).filter(|w| w[0] != w[1]).count()
}

/// Divides out (x − r) while r is a root.
fn deflate(mut p: Poly, r: &BigRational) -> (Poly, usize) {
    let mut times = 0;
    while p.len() > 1 && eval(&p, r).is_zero() {
        // Synthetic division.
        let n = p.len() - 1;
        let mut q = vec![BigRational::zero(); n];
        let mut carry = BigRational::zero();
        for i in (0..n).rev() {
            carry = &p[i + 1] + &carry * r;
            q[i] = carry.clone();
        }
        p = q;
        times += 1;
    }
    (p, times)
}

/// Distinct real roots of `p` in the open interval (a, b), a < b, where
/// neither endpoint is a root.
fn roots_between(p: &Poly, a: &BigRational, b: &BigRational) -> usize {
    let chain = sturm_chain(p);
    sign_changes(&chain, a) - sign_changes(&chain, b)
}

fn cauchy_bound(p: &Poly) -> BigRational {
    let lead = p.last().unwrap().abs();
    let m = p[..p.len() - 1].iter().map(|c| c.abs() / &lead).max().unwrap_or_else(BigRational::zero);
    m + int(1)
}

/// Checks that [lo, hi] holds a real root of det(xI − A) and that no real
/// root exceeds hi.
pub fn enclosure_is_sound(a: &SquareMatrix, lo: &BigRational, hi: &BigRational) -> Result<(), String> {
    let p = trim_poly(charpoly(a));
    let (p, at_hi) = deflate(p, hi);
    let (p, at_lo) = if lo != hi { deflate(p, lo) } else { (p, 0) };
    let above = if p.len() > 1 {
        let bound = cauchy_bound(&p).max(hi + int(1));
        roots_between(&p, hi, &bound)
    } else {
        0
    };
    if above > 0 {
        return Err(format!("{above} root(s) above {hi}"));
    }
    let inside = at_hi + at_lo + if lo < hi && p.len() > 1 { roots_between(&p, lo, hi) } else { 0 };
    if inside == 0 {
        return Err(format!("no root in [{lo}, {hi}]"));
    }
    Ok(())
}
