//! Square nonnegative integer matrices.

use num_bigint::BigUint;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SquareMatrix {
    n: usize,
    data: Vec<u64>,
}

impl SquareMatrix {
    pub fn zeros(n: usize) -> Self {
        SquareMatrix {
            n,
            data: vec![0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    /// Builds from row-major rows; panics unless all rows have length `rows.len()`.
    pub fn from_rows<R: AsRef<[u64]>>(rows: &[R]) -> Self {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for r in rows {
            let r = r.as_ref();
            assert_eq!(r.len(), n, "matrix must be square");
            data.extend_from_slice(r);
        }
        SquareMatrix { n, data }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: u64) {
        self.data[i * self.n + j] = v;
    }

    pub fn add_to(&mut self, i: usize, j: usize, v: u64) {
        self.data[i * self.n + j] += v;
    }

    pub fn rows(&self) -> Vec<Vec<u64>> {
        self.data.chunks(self.n.max(1)).take(self.n).map(|r| r.to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    /// Simultaneous row/column relabeling: result[perm[i]][perm[j]] = self[i][j].
    pub fn permute(&self, perm: &[usize]) -> Self {
        assert_eq!(perm.len(), self.n);
        let mut p = Self::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                p.set(perm[i], perm[j], self.get(i, j));
            }
        }
        p
    }

    pub fn submatrix(&self, idx: &[usize]) -> Self {
        let mut s = Self::zeros(idx.len());
        for (a, &i) in idx.iter().enumerate() {
            for (b, &j) in idx.iter().enumerate() {
                s.set(a, b, self.get(i, j));
            }
        }
        s
    }

    pub fn column_sum(&self, j: usize) -> u64 {
        (0..self.n).map(|i| self.get(i, j)).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&x| x == 0)
    }

    /// `self · v` over big integers.
    pub fn mul_vec(&self, v: &[BigUint]) -> Vec<BigUint> {
        assert_eq!(v.len(), self.n);
        (0..self.n)
            .map(|i| {
                let mut acc = BigUint::zero();
                for (j, vj) in v.iter().enumerate() {
                    let a = self.get(i, j);
                    if a != 0 && !vj.is_zero() {
                        acc += vj * a;
                    }
                }
                acc
            })
            .collect()
    }

    /// `vᵀ · self` over big integers.
    pub fn vec_mul(&self, v: &[BigUint]) -> Vec<BigUint> {
        assert_eq!(v.len(), self.n);
        (0..self.n)
            .map(|j| {
                let mut acc = BigUint::zero();
                for (i, vi) in v.iter().enumerate() {
                    let a = self.get(i, j);
                    if a != 0 && !vi.is_zero() {
                        acc += vi * a;
                    }
                }
                acc
            })
            .collect()
    }

    /// Exact power `self^p` as big-integer rows, by repeated squaring.
    pub fn pow_big(&self, mut p: u32) -> Vec<Vec<BigUint>> {
        let n = self.n;
        let mut result: Vec<Vec<BigUint>> = (0..n)
            .map(|i| (0..n).map(|j| BigUint::from((i == j) as u8)).collect())
            .collect();
        let mut base: Vec<Vec<BigUint>> = self
            .rows()
            .into_iter()
            .map(|r| r.into_iter().map(BigUint::from).collect())
            .collect();
        while p > 0 {
            if p & 1 == 1 {
                result = big_mul(&result, &base);
            }
            p >>= 1;
            if p > 0 {
                base = big_mul(&base, &base);
            }
        }
        result
    }
}

fn big_mul(a: &[Vec<BigUint>], b: &[Vec<BigUint>]) -> Vec<Vec<BigUint>> {
    let n = a.len();
    let mut c = vec![vec![BigUint::zero(); n]; n];
    for i in 0..n {
        for l in 0..n {
            if a[i][l].is_zero() {
                continue;
            }
            for j in 0..n {
                if !b[l][j].is_zero() {
                    c[i][j] += &a[i][l] * &b[l][j];
                }
            }
        }
    }
    c
}
