use super::{DistanceField, LatticeKernel, SparseMatrix};
use crate::{Error, Result, C64};

/// Kernel of `ad^k_φ(H₀)`: entries `(φ(y) - φ(x))^k H₀(x,y)`.
///
/// `ad_φ(A) = [A, φ]` with φ acting as multiplication. The result is
/// Hermitian for even `k` and anti-Hermitian for odd `k`.
pub fn multi_commutator(kernel: &LatticeKernel, phi: &DistanceField, k: usize) -> Result<SparseMatrix> {
    if k == 0 {
        return Err(Error::param("k", "commutator order must be at least 1"));
    }
    check_sizes(kernel, phi.values())?;
    Ok(commutator_with_values(kernel.matrix(), phi.values(), k))
}

/// Same formula for an arbitrary real field and matrix.
pub fn commutator_with_values(matrix: &SparseMatrix, phi: &[f64], k: usize) -> SparseMatrix {
    matrix.map_entries(|x, y, v| v * (phi[y] - phi[x]).powi(k as i32))
}

/// `B_k = i·ad^k_φ(H₀)`; Hermitian for odd `k` only.
pub fn b_operator(kernel: &LatticeKernel, phi: &DistanceField, k: usize) -> Result<SparseMatrix> {
    Ok(multi_commutator(kernel, phi, k)?.scale(C64::new(0.0, 1.0)))
}

fn check_sizes(kernel: &LatticeKernel, phi: &[f64]) -> Result<()> {
    if kernel.site_count() != phi.len() {
        return Err(Error::param(
            "phi",
            format!("field has {} sites, kernel has {}", phi.len(), kernel.site_count()),
        ));
    }
    Ok(())
}
