//! Kronecker products of dense blocks over contiguous site groups.

use std::sync::Arc;

use nalgebra::{DMatrix, DMatrixView, DMatrixViewMut};

use super::LinearMap;
use crate::error::{Error, Result};

/// `⊗_g M_g` where block `g` acts on the sites `start_g..start_g + len_g`;
/// groups without a matrix act as the identity.
#[derive(Debug, Clone)]
pub struct GroupKron {
    q: usize,
    m: usize,
    blocks: Vec<(usize, usize, Arc<DMatrix<f64>>)>,
}

impl GroupKron {
    pub fn identity(q: usize, m: usize) -> Self {
        GroupKron { q, m, blocks: Vec::new() }
    }

    /// Adds a `q^len × q^len` block on `start..start+len`.
    pub fn with_block(mut self, start: usize, len: usize, mat: Arc<DMatrix<f64>>) -> Result<Self> {
        let dim = self.q.pow(len as u32);
        if mat.nrows() != dim || mat.ncols() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: mat.nrows() });
        }
        if start + len > self.m {
            return Err(Error::InvalidParams(format!("block {start}..{} leaves [0, {})", start + len, self.m)));
        }
        if self.blocks.iter().any(|&(s, l, _)| start < s + l && s < start + len) {
            return Err(Error::InvalidParams("blocks overlap".into()));
        }
        self.blocks.push((start, len, mat));
        Ok(self)
    }

    pub fn sites(&self) -> usize {
        self.m
    }

    pub fn blocks(&self) -> &[(usize, usize, Arc<DMatrix<f64>>)] {
        &self.blocks
    }

    fn run(&self, x: &[f64], transpose: bool) -> Vec<f64> {
        assert_eq!(x.len(), self.q.pow(self.m as u32), "input length");
        let mut cur = x.to_vec();
        for (start, len, mat) in &self.blocks {
            let outer = self.q.pow(*start as u32);
            let mid = self.q.pow(*len as u32);
            let inner = self.q.pow((self.m - start - len) as u32);
            let mut next = vec![0.0; cur.len()];
            let m = if transpose { mat.transpose() } else { mat.as_ref().clone() };
            if inner == 1 {
                // rows of length `mid`, read column-major as one `mid × outer` matrix
                let y = DMatrixView::from_slice(&cur, mid, outer);
                DMatrixViewMut::from_slice(&mut next, mid, outer).gemm(1.0, &m, &y, 0.0);
            } else {
                // each outer slab is `mid × inner` row-major, i.e. `inner × mid` column-major
                let mt = m.transpose();
                for (src, dst) in cur.chunks(mid * inner).zip(next.chunks_mut(mid * inner)) {
                    let y = DMatrixView::from_slice(src, inner, mid);
                    DMatrixViewMut::from_slice(dst, inner, mid).gemm(1.0, &y, &mt, 0.0);
                }
            }
            cur = next;
        }
        cur
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut blocks: Vec<_> = self.blocks.iter().collect();
        blocks.sort_by_key(|b| b.0);
        let mut out = DMatrix::from_element(1, 1, 1.0);
        let mut site = 0;
        for (start, len, mat) in blocks {
            out =
                out.kronecker(&DMatrix::identity(self.q.pow((start - site) as u32), self.q.pow((start - site) as u32)));
            out = out.kronecker(mat.as_ref());
            site = start + len;
        }
        let rest = self.q.pow((self.m - site) as u32);
        out.kronecker(&DMatrix::identity(rest, rest))
    }
}

impl LinearMap for GroupKron {
    fn nrows(&self) -> usize {
        self.q.pow(self.m as u32)
    }

    fn ncols(&self) -> usize {
        self.q.pow(self.m as u32)
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.run(x, false)
    }

    fn apply_transpose(&self, y: &[f64]) -> Vec<f64> {
        self.run(y, true)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use rand::Rng;

    #[test]
    fn matches_dense_kronecker() {
        let mut r = rng::root(5);
        let mut rand_mat = |d: usize| Arc::new(DMatrix::from_fn(d, d, |_, _| r.gen_range(-1.0..1.0)));
        let k = GroupKron::identity(2, 5).with_block(3, 2, rand_mat(4)).unwrap().with_block(0, 2, rand_mat(4)).unwrap();
        let d = k.to_dense();
        let x: Vec<f64> = (0..32).map(|i| (i as f64).sin()).collect();
        let y = k.apply(&x);
        let dy = d.apply(&x);
        let yt = k.apply_transpose(&x);
        let dyt = d.apply_transpose(&x);
        for i in 0..32 {
            assert!((y[i] - dy[i]).abs() < 1e-12);
            assert!((yt[i] - dyt[i]).abs() < 1e-12);
        }
        assert!(GroupKron::identity(2, 5)
            .with_block(1, 3, rand_mat(8))
            .unwrap()
            .with_block(0, 2, rand_mat(4))
            .is_err());
    }
}
