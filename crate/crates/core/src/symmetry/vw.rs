//! The projectors `V`, `W`, `V′` and the error term `Φ` on `[3n]`.

use std::sync::Arc;

use nalgebra::DMatrix;

use super::projectors::{group_v, phi};
use crate::error::Result;
use crate::operators::{site_projectors, GroupKron, LinearMap};

#[derive(Debug, Clone)]
pub struct VwProjectors {
    pub n: usize,
    pub q: usize,
    pub cutoff: usize,
    /// `V^T = Σ_{k ≤ K} Π̄_k` on the `n` sites of one group.
    pub group_v: Arc<DMatrix<f64>>,
    /// The same on `n − 1` sites.
    pub tail_v: Arc<DMatrix<f64>>,
    /// `Φ^A = Σ_{k=1}^{K} Φ_k` on `n` sites.
    pub phi_a: Arc<DMatrix<f64>>,
    /// `V = V^A ⊗ V^B ⊗ V^C`.
    pub v: GroupKron,
    /// `W = I^A ⊗ V^B ⊗ V^C`.
    pub w: GroupKron,
    /// `V′ = Π_0 ⊗ V^{[2..n]} ⊗ V^B ⊗ V^C`.
    pub v_prime: GroupKron,
    /// `Φ = Φ^A ⊗ V^B ⊗ V^C`.
    pub phi: GroupKron,
}

pub fn build_v_w(cutoff: usize, n: usize, q: usize) -> Result<VwProjectors> {
    let group = Arc::new(group_v(cutoff, n, q)?);
    let tail = Arc::new(group_v(cutoff, n - 1, q)?);
    let mut phi_a = DMatrix::zeros(group.nrows(), group.ncols());
    for k in 1..=cutoff {
        phi_a += phi(k, n, q)?;
    }
    let phi_a = Arc::new(phi_a);
    let m = 3 * n;
    let bc =
        |k: GroupKron| -> Result<GroupKron> { k.with_block(n, n, group.clone())?.with_block(2 * n, n, group.clone()) };
    let v = bc(GroupKron::identity(q, m).with_block(0, n, group.clone())?)?;
    let w = bc(GroupKron::identity(q, m))?;
    let mut vp = GroupKron::identity(q, m).with_block(0, 1, Arc::new(site_projectors(q).0))?;
    if n > 1 {
        vp = vp.with_block(1, n - 1, tail.clone())?;
    }
    let v_prime = bc(vp)?;
    let phi = bc(GroupKron::identity(q, m).with_block(0, n, phi_a.clone())?)?;
    Ok(VwProjectors { n, q, cutoff, group_v: group, tail_v: tail, phi_a, v, w, v_prime, phi })
}

/// `max |(Mᵀu − u)_i|` for the uniform unit vector `u`: zero iff `Π_∅ M = Π_∅`.
pub fn uniform_fixed_defect(map: &dyn LinearMap) -> f64 {
    let d = map.ncols();
    let u = vec![1.0 / (d as f64).sqrt(); d];
    map.apply_transpose(&u).iter().zip(&u).fold(0.0f64, |a, (x, y)| a.max((x - y).abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::OperatorExpression;
    use crate::sets::SiteSet;
    use crate::symmetry::projectors::{bar_pi, weight_projector};

    fn max_abs(m: &DMatrix<f64>) -> f64 {
        m.iter().fold(0.0f64, |a, &b| a.max(b.abs()))
    }

    #[test]
    fn projector_identities_n2() {
        let (n, q) = (2, 3);
        let p = build_v_w(2, n, q).unwrap();
        let v = p.v.to_dense();
        let w = p.w.to_dense();
        assert!(max_abs(&(&v * &v - &v)) < 1e-10);
        assert!(max_abs(&(&w * &w - &w)) < 1e-10);
        assert!(uniform_fixed_defect(&p.v) < 1e-12);
        // (Π_{kA} ⊗ Π_{kB} ⊗ Π_{kC}) V = Π̄_{kA} ⊗ Π̄_{kB} ⊗ Π̄_{kC}
        for ka in 0..=2 {
            for kb in 0..=2 {
                for kc in 0..=2 {
                    let pk = weight_projector(ka, n, q)
                        .unwrap()
                        .kronecker(&weight_projector(kb, n, q).unwrap())
                        .kronecker(&weight_projector(kc, n, q).unwrap());
                    let bar = bar_pi(ka, n, q)
                        .unwrap()
                        .kronecker(&bar_pi(kb, n, q).unwrap())
                        .kronecker(&bar_pi(kc, n, q).unwrap());
                    assert!(max_abs(&(pk * &v - bar)) < 1e-10);
                }
            }
        }
        let empty =
            OperatorExpression::projector_sum(q, 3 * n, &[(SiteSet::empty(), 1.0)]).unwrap().to_dense(4096).unwrap();
        assert!(max_abs(&(&empty * &v - &empty)) < 1e-10);
    }
}
