//! Bipartite density matrices on `A (x) B`.

use crate::error::{Error, Result};
use crate::linalg::{
    self, c, complex_gaussian, is_hermitian, min_eigenvalue, partial_trace, tensor, ComplexMatrix, ComplexVector,
    DimPair, RandomSeed, Subsystem,
};

/// Validity tolerance for states: PSD and unit trace up to this slack.
pub const STATE_TOL: f64 = 1e-12;

/// A density matrix on `A (x) B` with row index `a * |B| + b`.
#[derive(Debug, Clone, PartialEq)]
pub struct BipartiteState {
    dims: DimPair,
    matrix: ComplexMatrix,
}

impl BipartiteState {
    /// Validates shape, Hermiticity, positivity and trace.
    pub fn new(matrix: ComplexMatrix, dims: DimPair) -> Result<Self> {
        Self::with_tolerance(matrix, dims, STATE_TOL)
    }

    pub fn with_tolerance(matrix: ComplexMatrix, dims: DimPair, tol: f64) -> Result<Self> {
        let n = dims.total();
        if matrix.shape() != (n, n) {
            return Err(Error::DimensionMismatch(format!(
                "state on ({}, {}) must be {n}x{n}, got {}x{}",
                dims.dim_a,
                dims.dim_b,
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if !is_hermitian(&matrix, tol) {
            return Err(Error::InvalidState("matrix is not Hermitian".into()));
        }
        let tr = matrix.trace();
        if (tr - c(1.0, 0.0)).norm() > tol {
            return Err(Error::InvalidState(format!("trace is {tr}, expected 1")));
        }
        let min = min_eigenvalue(&matrix);
        if min < -tol {
            return Err(Error::InvalidState(format!("minimum eigenvalue {min:e} is negative")));
        }
        Ok(BipartiteState { dims, matrix })
    }

    pub(crate) fn from_parts_unchecked(matrix: ComplexMatrix, dims: DimPair) -> Self {
        debug_assert_eq!(matrix.shape(), (dims.total(), dims.total()));
        BipartiteState { dims, matrix }
    }

    pub fn dims(&self) -> DimPair {
        self.dims
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    /// Reduced state on `side`.
    pub fn marginal(&self, side: Subsystem) -> ComplexMatrix {
        partial_trace(&self.matrix, self.dims, side.other()).expect("shape checked on construction")
    }

    /// The same state with the roles of `A` and `B` exchanged.
    pub fn swap(&self) -> BipartiteState {
        let (da, db) = (self.dims.dim_a, self.dims.dim_b);
        let n = da * db;
        let m = &self.matrix;
        let swapped = ComplexMatrix::from_fn(n, n, |r, col| {
            let (b, a) = (r / da, r % da);
            let (bp, ap) = (col / da, col % da);
            m[(a * db + b, ap * db + bp)]
        });
        BipartiteState { dims: self.dims.swapped(), matrix: swapped }
    }

    /// Views the state with `side` in the role of `A`.
    pub fn oriented(&self, side: Subsystem) -> BipartiteState {
        match side {
            Subsystem::A => self.clone(),
            Subsystem::B => self.swap(),
        }
    }

    /// Frobenius distance between two states of equal dimensions.
    pub fn distance(&self, other: &BipartiteState) -> f64 {
        (&self.matrix - &other.matrix).norm()
    }
}

/// `|Phi+><Phi+|` with `|Phi+> = d^{-1/2} sum_i |ii>`.
pub fn max_entangled(d: usize) -> Result<BipartiteState> {
    let dims = DimPair::new(d, d)?;
    let mut v = ComplexVector::zeros(d * d);
    for i in 0..d {
        v[i * d + i] = c(1.0 / (d as f64).sqrt(), 0.0);
    }
    Ok(BipartiteState::from_parts_unchecked(&v * v.adjoint(), dims))
}

pub fn product(rho_a: &ComplexMatrix, rho_b: &ComplexMatrix) -> Result<BipartiteState> {
    let dims = DimPair::new(rho_a.nrows(), rho_b.nrows())?;
    BipartiteState::new(tensor(rho_a, rho_b), dims)
}

/// Product of two independent full-rank random densities.
pub fn random_product(dim_a: usize, dim_b: usize, seed: RandomSeed) -> Result<BipartiteState> {
    let mut rng = seed.rng();
    let a = linalg::random_density_from(&mut rng, dim_a, dim_a);
    let b = linalg::random_density_from(&mut rng, dim_b, dim_b);
    product(&a, &b)
}

/// Haar-random pure state on `A (x) B`.
pub fn random_pure(dim_a: usize, dim_b: usize, seed: RandomSeed) -> Result<BipartiteState> {
    let dims = DimPair::new(dim_a, dim_b)?;
    let g = complex_gaussian(&mut seed.rng(), dims.total(), 1);
    let v = &g / c(g.norm(), 0.0);
    Ok(BipartiteState::from_parts_unchecked(&v * v.adjoint(), dims))
}

/// Random mixed state of the given rank on `A (x) B`.
pub fn random_mixed(dim_a: usize, dim_b: usize, rank: usize, seed: RandomSeed) -> Result<BipartiteState> {
    let dims = DimPair::new(dim_a, dim_b)?;
    let m = linalg::random_density(dims.total(), rank, seed)?;
    Ok(BipartiteState::from_parts_unchecked(m, dims))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::random_density;

    #[test]
    fn validation_rejects_bad_matrices() {
        let dims = DimPair::new(2, 2).unwrap();
        assert!(matches!(BipartiteState::new(ComplexMatrix::zeros(4, 4), dims), Err(Error::InvalidState(_))));
        assert!(matches!(BipartiteState::new(ComplexMatrix::identity(3, 3), dims), Err(Error::DimensionMismatch(_))));
        let mut m = ComplexMatrix::zeros(4, 4);
        m[(0, 0)] = c(1.5, 0.0);
        m[(1, 1)] = c(-0.5, 0.0);
        assert!(BipartiteState::new(m, dims).is_err());
    }

    #[test]
    fn swap_is_an_involution_and_exchanges_marginals() {
        let rho = random_mixed(2, 3, 4, RandomSeed(1)).unwrap();
        let s = rho.swap();
        assert_eq!(s.dims(), DimPair::new(3, 2).unwrap());
        assert_eq!(s.swap(), rho);
        assert!((s.marginal(Subsystem::A) - rho.marginal(Subsystem::B)).norm() < 1e-15);

        let a = random_density(2, 2, RandomSeed(2)).unwrap();
        let b = random_density(3, 3, RandomSeed(3)).unwrap();
        let p = product(&a, &b).unwrap().swap();
        assert!((p.matrix() - tensor(&b, &a)).norm() < 1e-15);
    }

    #[test]
    fn generated_states_are_valid() {
        for d in 1..=4 {
            let phi = max_entangled(d).unwrap();
            BipartiteState::new(phi.matrix().clone(), phi.dims()).unwrap();
        }
        for s in 0..20 {
            for st in [
                random_pure(2, 3, RandomSeed(s)).unwrap(),
                random_mixed(3, 2, 3, RandomSeed(s)).unwrap(),
                random_product(3, 3, RandomSeed(s)).unwrap(),
            ] {
                BipartiteState::new(st.matrix().clone(), st.dims()).unwrap();
            }
        }
    }
}
