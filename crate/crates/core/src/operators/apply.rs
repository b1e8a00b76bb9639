//! Matrix-free application of [`OperatorExpression`].
//!
//! Terms are merged into a trie over the sites. A depth-first walk keeps one
//! tensor per level; a `Π_0` branch averages its axis down to length one and
//! the result is broadcast back on the way up, so weight-zero sites cost
//! nothing below the point where they are averaged.

use super::{LinearMap, OperatorExpression, SiteFactor};

#[derive(Default)]
struct Node {
    coefficient: f64,
    children: Vec<(SiteFactor, Node)>,
}

impl Node {
    fn insert(&mut self, factors: &[SiteFactor], coefficient: f64) {
        match factors.split_first() {
            None => self.coefficient += coefficient,
            Some((f, rest)) => {
                let idx = match self.children.iter().position(|(g, _)| g == f) {
                    Some(i) => i,
                    None => {
                        self.children.push((f.clone(), Node::default()));
                        self.children.len() - 1
                    }
                };
                self.children[idx].1.insert(rest, coefficient);
            }
        }
    }
}

/// A tensor whose axes have length `q` or, once averaged, `1`.
#[derive(Clone)]
struct Tensor {
    data: Vec<f64>,
    dims: Vec<usize>,
}

impl Tensor {
    fn split(&self, axis: usize) -> (usize, usize, usize) {
        let outer = self.dims[..axis].iter().product();
        let inner = self.dims[axis + 1..].iter().product();
        (outer, self.dims[axis], inner)
    }

    fn mean(&self, axis: usize) -> Tensor {
        let (outer, len, inner) = self.split(axis);
        let mut data = vec![0.0; outer * inner];
        for o in 0..outer {
            let out = &mut data[o * inner..(o + 1) * inner];
            for a in 0..len {
                let src = &self.data[(o * len + a) * inner..(o * len + a + 1) * inner];
                for (d, s) in out.iter_mut().zip(src) {
                    *d += s;
                }
            }
            let inv = 1.0 / len as f64;
            out.iter_mut().for_each(|d| *d *= inv);
        }
        let mut dims = self.dims.clone();
        dims[axis] = 1;
        Tensor { data, dims }
    }

    /// `self += broadcast(small)` along `axis`, where `small` has length one there.
    fn add_broadcast(&mut self, small: &Tensor, axis: usize, sign: f64) {
        let (outer, len, inner) = self.split(axis);
        for o in 0..outer {
            let src = &small.data[o * inner..(o + 1) * inner];
            for a in 0..len {
                let dst = &mut self.data[(o * len + a) * inner..(o * len + a + 1) * inner];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += sign * s;
                }
            }
        }
    }

    fn add(&mut self, other: &Tensor) {
        for (d, s) in self.data.iter_mut().zip(&other.data) {
            *d += s;
        }
    }

    /// Applies the row-major `q × q` matrix `m` along `axis`.
    fn apply_axis(&self, m: &[f64], axis: usize) -> Tensor {
        let (outer, len, inner) = self.split(axis);
        let mut data = vec![0.0; self.data.len()];
        for o in 0..outer {
            for r in 0..len {
                let dst = (o * len + r) * inner;
                for c in 0..len {
                    let w = m[r * len + c];
                    if w == 0.0 {
                        continue;
                    }
                    let src = (o * len + c) * inner;
                    for k in 0..inner {
                        data[dst + k] += w * self.data[src + k];
                    }
                }
            }
        }
        Tensor { data, dims: self.dims.clone() }
    }
}

fn eval(node: &Node, depth: usize, t: &Tensor) -> Tensor {
    if node.children.is_empty() {
        let mut out = t.clone();
        out.data.iter_mut().for_each(|x| *x *= node.coefficient);
        return out;
    }
    let mut acc = Tensor { data: vec![0.0; t.data.len()], dims: t.dims.clone() };
    let needs_mean = node.children.iter().any(|(f, _)| matches!(f, SiteFactor::Pi0 | SiteFactor::Pi1));
    let mean = needs_mean.then(|| t.mean(depth));
    for (f, child) in &node.children {
        match f {
            SiteFactor::Identity => acc.add(&eval(child, depth + 1, t)),
            SiteFactor::Pi0 => {
                let r = eval(child, depth + 1, mean.as_ref().unwrap());
                acc.add_broadcast(&r, depth, 1.0);
            }
            SiteFactor::Pi1 => {
                let mut u = t.clone();
                u.add_broadcast(mean.as_ref().unwrap(), depth, -1.0);
                acc.add(&eval(child, depth + 1, &u));
            }
            SiteFactor::Dense(m) => acc.add(&eval(child, depth + 1, &t.apply_axis(m, depth))),
        }
    }
    acc
}

impl OperatorExpression {
    fn trie(&self, transpose: bool) -> Node {
        let mut root = Node::default();
        for t in &self.terms {
            if transpose {
                let f: Vec<SiteFactor> = t.factors.iter().map(|f| f.transpose(self.q)).collect();
                root.insert(&f, t.coefficient);
            } else {
                root.insert(&t.factors, t.coefficient);
            }
        }
        root
    }

    /// The unrestricted sum of terms applied to a vector on `[q]^m`.
    fn apply_full(&self, x: &[f64], transpose: bool) -> Vec<f64> {
        if self.terms.is_empty() {
            return vec![0.0; x.len()];
        }
        let t = Tensor { data: x.to_vec(), dims: vec![self.q; self.m] };
        eval(&self.trie(transpose), 0, &t).data
    }
}

impl LinearMap for OperatorExpression {
    fn nrows(&self) -> usize {
        OperatorExpression::nrows(self)
    }

    fn ncols(&self) -> usize {
        OperatorExpression::ncols(self)
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.ncols(), "input length");
        let full = self.apply_full(x, false);
        if self.restriction.is_empty() {
            return full;
        }
        let s = self.row_scale();
        self.gather().iter().map(|&g| s * full[g]).collect()
    }

    fn apply_transpose(&self, y: &[f64]) -> Vec<f64> {
        assert_eq!(y.len(), self.nrows(), "input length");
        if self.restriction.is_empty() {
            return self.apply_full(y, true);
        }
        let s = self.row_scale();
        let mut full = vec![0.0; self.ncols()];
        for (&g, &v) in self.gather().iter().zip(y) {
            full[g] += s * v;
        }
        self.apply_full(&full, true)
    }
}
