//! Dense Hermitian eigensolver used as an oracle on small models.

use nalgebra::SymmetricEigen;

use crate::error::{Error, Result};
use crate::linalg::{SparseOperator, C64};

/// Largest dimension the dense oracle accepts.
pub const DENSE_LIMIT: usize = 4000;

/// Sorted eigenvalues of a Hermitian sparse operator.
pub fn dense_spectrum(op: &SparseOperator) -> Result<Vec<f64>> {
    if op.n > DENSE_LIMIT {
        return Err(Error::DimensionOverflow { dim: op.n, limit: DENSE_LIMIT });
    }
    let mut ev: Vec<f64> = op.to_dense().symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

/// Lowest eigenpair by full diagonalization.
pub fn dense_ground(op: &SparseOperator) -> Result<(f64, Vec<C64>)> {
    if op.n > DENSE_LIMIT {
        return Err(Error::DimensionOverflow { dim: op.n, limit: DENSE_LIMIT });
    }
    let eig = SymmetricEigen::new(op.to_dense());
    let mut imin = 0;
    for i in 1..op.n {
        if eig.eigenvalues[i] < eig.eigenvalues[imin] {
            imin = i;
        }
    }
    Ok((eig.eigenvalues[imin], eig.eigenvectors.column(imin).iter().copied().collect()))
}
