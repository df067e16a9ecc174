//! Box geometry, hopping kernels, distance fields, multiple commutators and
//! the row-sum constants κ, M, M_k.

mod commutator;
mod constants;
mod distance;
mod geometry;
mod kernel;
mod sparse;

pub use commutator::{b_operator, commutator_with_values, multi_commutator};
pub use constants::{exponential_moment, moment_norms, structural_constants, StructuralConstants};
pub use distance::{distance_field, DistanceField, DistanceSource};
pub use geometry::{BoxGeometry, NormChoice};
pub use kernel::{
    build_exponential_kernel, build_laplacian, build_powerlaw_kernel, KernelFamily, KernelSpec, LatticeKernel,
    DEFAULT_FLOOR,
};
pub use sparse::SparseMatrix;
