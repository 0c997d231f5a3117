use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::max_abs;

/// Components of a tensor at one point, in the ambient chart.
///
/// Storage is dense and row-major with the contravariant (upper) indices
/// first, then the covariant (lower) ones: `B^i_jkl` lives at
/// `((i*n + j)*n + k)*n + l`. Symmetry is never assumed by the storage.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TensorValue {
    pub n: usize,
    pub con: usize,
    pub cov: usize,
    pub comps: Vec<f64>,
}

impl TensorValue {
    pub fn new(n: usize, con: usize, cov: usize, comps: Vec<f64>) -> Result<Self> {
        let want = n.pow((con + cov) as u32);
        if comps.len() != want {
            return Err(Error::ShapeMismatch(format!(
                "{} components for a rank-{} tensor in dimension {n}",
                comps.len(),
                con + cov
            )));
        }
        Ok(Self { n, con, cov, comps })
    }

    pub fn zeros(n: usize, con: usize, cov: usize) -> Self {
        Self {
            n,
            con,
            cov,
            comps: vec![0.0; n.pow((con + cov) as u32)],
        }
    }

    pub fn from_fn(n: usize, con: usize, cov: usize, mut f: impl FnMut(&[usize]) -> f64) -> Self {
        let rank = con + cov;
        let mut t = Self::zeros(n, con, cov);
        let mut idx = vec![0usize; rank];
        for flat in 0..t.comps.len() {
            let mut r = flat;
            for slot in (0..rank).rev() {
                idx[slot] = r % n;
                r /= n;
            }
            t.comps[flat] = f(&idx);
        }
        t
    }

    /// Rank-2 tensor from a matrix.
    pub fn from_matrix(m: &DMatrix<f64>, con: usize, cov: usize) -> Self {
        let n = m.nrows();
        Self::from_fn(n, con, cov, |ix| m[(ix[0], ix[1])])
    }

    pub fn rank(&self) -> usize {
        self.con + self.cov
    }

    fn flat(&self, idx: &[usize]) -> usize {
        idx.iter().fold(0, |acc, &i| acc * self.n + i)
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        debug_assert_eq!(idx.len(), self.rank());
        self.comps[self.flat(idx)]
    }

    /// Rank-2 tensor as a matrix.
    pub fn to_matrix(&self) -> DMatrix<f64> {
        assert_eq!(self.rank(), 2, "to_matrix needs a rank-2 tensor");
        DMatrix::from_row_slice(self.n, self.n, &self.comps)
    }

    /// Max-absolute-component norm. Chart dependent.
    pub fn norm(&self) -> f64 {
        max_abs(&self.comps)
    }

    pub fn scale(&self, c: f64) -> Self {
        Self {
            comps: self.comps.iter().map(|v| v * c).collect(),
            ..self.clone()
        }
    }

    pub fn max_abs_diff(&self, other: &TensorValue) -> f64 {
        self.comps
            .iter()
            .zip(&other.comps)
            .fold(0.0f64, |acc, (a, b)| acc.max((a - b).abs()))
    }

    /// Contract index `slot` with the vector `v`.
    pub fn contract(&self, slot: usize, v: &[f64]) -> TensorValue {
        assert!(slot < self.rank());
        let (con, cov) = if slot < self.con {
            (self.con - 1, self.cov)
        } else {
            (self.con, self.cov - 1)
        };
        TensorValue::from_fn(self.n, con, cov, |ix| {
            let mut full = Vec::with_capacity(ix.len() + 1);
            full.extend_from_slice(&ix[..slot]);
            full.push(0);
            full.extend_from_slice(&ix[slot..]);
            (0..self.n)
                .map(|k| {
                    full[slot] = k;
                    self.get(&full) * v[k]
                })
                .sum()
        })
    }

    /// Largest difference between the tensor and any transposition of its
    /// last `k` indices.
    pub fn symmetry_residual(&self, k: usize) -> f64 {
        assert!(k <= self.rank());
        let lead = self.rank() - k;
        let mut worst = 0.0f64;
        let perms = permutations(k);
        for flat in 0..self.comps.len() {
            let mut idx = vec![0; self.rank()];
            let mut r = flat;
            for slot in (0..self.rank()).rev() {
                idx[slot] = r % self.n;
                r /= self.n;
            }
            let v = self.comps[flat];
            for perm in &perms {
                let mut other = idx.clone();
                for (dst, &src) in perm.iter().enumerate() {
                    other[lead + dst] = idx[lead + src];
                }
                worst = worst.max((v - self.get(&other)).abs());
            }
        }
        worst
    }
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(k - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, k - 1);
            out.push(q);
        }
    }
    out
}
