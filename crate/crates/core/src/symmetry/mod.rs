//! Symmetrization: partitions and characters, isotypic and exactly-k
//! projectors, the `V`/`W` projectors, the `Φ_k` error terms, and the overlap
//! statistics behind the Λ bound.

pub mod johnson;
pub mod overlap;
pub mod partitions;
pub mod projectors;
pub mod vw;

pub use johnson::{harmonic_projector, phi_norm_weight_space, phi_weight_space};
pub use overlap::{lambda_bound, overlap_l, tail_check, LambdaMode, LambdaReport, OverlapConfig, TailReport, TailRow};
pub use partitions::{character, cycle_type, partitions, Partition};
pub use projectors::{
    bar_pi, canonical_pairs, exactly_k_isotypic, f_projector, group_v, isotypic, kappa_check, kappa_dense, kappa_rank,
    phi, phi_error, symmetric_norm, weight_projector, GroupAction,
};
pub use vw::{build_v_w, uniform_fixed_defect, VwProjectors};
