//! State-to-map duality and the faithfulness certificate.
//!
//! For a state `rho` on `A (x) B` the map `A -> B` is
//! `sigma -> Tr_A[(sigma^T (x) 1) rho]` and the map `B -> A` is
//! `sigma -> Tr_B[(1 (x) sigma^T) rho]`, with transposes in the computational
//! basis. Both are stored as transfer matrices on column-stacked operators.
//! A state is faithful on `A` exactly when the `A -> B` map is injective,
//! i.e. its transfer matrix has rank `|A|^2`.

use nalgebra::DMatrix;

use crate::channel::transfer_to_choi;
use crate::error::{Error, Result};
use crate::linalg::{
    self, c, hermitian_basis, hermitian_eigen, hs_inner, identity, is_hermitian, rank_and_nullspace, unvec, vec,
    ComplexMatrix, DimPair, SingularGap, Subsystem,
};
use crate::state::BipartiteState;

/// Eigenvalues of a marginal at or below this value are outside its support.
pub const SUPPORT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    AToB,
    BToA,
}

/// Matrix of a linear map `B(C^dim_in) -> B(C^dim_out)` on column-stacked operators.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferMatrix {
    pub dim_in: usize,
    pub dim_out: usize,
    pub matrix: ComplexMatrix,
}

impl TransferMatrix {
    pub fn new(matrix: ComplexMatrix, dim_in: usize, dim_out: usize) -> Result<Self> {
        if matrix.shape() != (dim_out * dim_out, dim_in * dim_in) {
            return Err(Error::DimensionMismatch(format!(
                "transfer matrix for {dim_in}->{dim_out} must be {}x{}, got {}x{}",
                dim_out * dim_out,
                dim_in * dim_in,
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(TransferMatrix { dim_in, dim_out, matrix })
    }

    pub fn apply(&self, x: &ComplexMatrix) -> ComplexMatrix {
        unvec(&(&self.matrix * vec(x)), self.dim_out, self.dim_out)
    }

    pub fn choi(&self) -> ComplexMatrix {
        transfer_to_choi(&self.matrix, self.dim_in, self.dim_out)
    }

    pub fn is_hermitian_preserving(&self, tol: f64) -> bool {
        let choi = self.choi();
        is_hermitian(&choi, tol * choi.norm().max(1.0))
    }

    /// Real matrix of the map restricted to Hermitian operators, in the
    /// Gell-Mann bases of input and output.
    pub fn hermitian_real_matrix(&self) -> DMatrix<f64> {
        let basis_in = hermitian_basis(self.dim_in);
        let basis_out = hermitian_basis(self.dim_out);
        let mut out = DMatrix::zeros(basis_out.len(), basis_in.len());
        for (k, e) in basis_in.iter().enumerate() {
            let img = self.apply(e);
            for (r, f) in basis_out.iter().enumerate() {
                out[(r, k)] = hs_inner(f, &img).re;
            }
        }
        out
    }
}

/// Transfer matrix of the map induced by `rho` in `direction`.
pub fn state_to_map(rho: &BipartiteState, direction: Direction) -> TransferMatrix {
    let DimPair { dim_a: da, dim_b: db } = rho.dims();
    let m = rho.matrix();
    match direction {
        // J[(b + b' db), (a' + a da)] = rho[(a' db + b), (a db + b')]
        Direction::AToB => {
            let j = ComplexMatrix::from_fn(db * db, da * da, |r, col| {
                let (b, bp) = (r % db, r / db);
                let (ap, a) = (col % da, col / da);
                m[(ap * db + b, a * db + bp)]
            });
            TransferMatrix { dim_in: da, dim_out: db, matrix: j }
        }
        // J[(a + a' da), (b' + b db)] = rho[(a db + b'), (a' db + b)]
        Direction::BToA => {
            let j = ComplexMatrix::from_fn(da * da, db * db, |r, col| {
                let (a, ap) = (r % da, r / da);
                let (bp, b) = (col % db, col / db);
                m[(a * db + bp, ap * db + b)]
            });
            TransferMatrix { dim_in: db, dim_out: da, matrix: j }
        }
    }
}

/// Inverse of [`state_to_map`]; fails when the result is not a density matrix.
pub fn map_to_state(t: &TransferMatrix, dims: DimPair, direction: Direction) -> Result<BipartiteState> {
    let DimPair { dim_a: da, dim_b: db } = dims;
    let (din, dout) = match direction {
        Direction::AToB => (da, db),
        Direction::BToA => (db, da),
    };
    if t.dim_in != din || t.dim_out != dout {
        return Err(Error::DimensionMismatch(format!(
            "map {}->{} does not match state dims ({da}, {db})",
            t.dim_in, t.dim_out
        )));
    }
    let j = &t.matrix;
    let n = da * db;
    let m = ComplexMatrix::from_fn(n, n, |r, col| {
        let (a, b) = (r / db, r % db);
        let (ap, bp) = (col / db, col % db);
        match direction {
            Direction::AToB => j[(b + bp * db, a + ap * da)],
            Direction::BToA => j[(a + ap * da, b + bp * db)],
        }
    });
    BipartiteState::new(m, dims)
}

/// Result of projecting both subsystems onto the supports of their marginals.
#[derive(Debug, Clone)]
pub struct SupportRestriction {
    pub state: BipartiteState,
    pub original_dims: DimPair,
    /// Isometry onto `supp rho_A`; `None` when the marginal was already full rank.
    pub isometry_a: Option<ComplexMatrix>,
    pub isometry_b: Option<ComplexMatrix>,
}

impl SupportRestriction {
    pub fn changed(&self) -> bool {
        self.isometry_a.is_some() || self.isometry_b.is_some()
    }
}

fn support_isometry(marginal: &ComplexMatrix) -> Option<ComplexMatrix> {
    let (values, vectors) = hermitian_eigen(marginal);
    let keep: Vec<usize> = (0..values.len()).filter(|&k| values[k] > SUPPORT_TOL).collect();
    if keep.len() == values.len() {
        return None;
    }
    Some(ComplexMatrix::from_fn(marginal.nrows(), keep.len(), |r, k| vectors[(r, keep[k])]))
}

pub fn support_restriction(rho: &BipartiteState) -> SupportRestriction {
    let dims = rho.dims();
    let iso_a = support_isometry(&rho.marginal(Subsystem::A));
    let iso_b = support_isometry(&rho.marginal(Subsystem::B));
    if iso_a.is_none() && iso_b.is_none() {
        return SupportRestriction { state: rho.clone(), original_dims: dims, isometry_a: None, isometry_b: None };
    }
    let va = iso_a.clone().unwrap_or_else(|| identity(dims.dim_a));
    let vb = iso_b.clone().unwrap_or_else(|| identity(dims.dim_b));
    let v = va.kronecker(&vb);
    let mut m = v.adjoint() * rho.matrix() * &v;
    m = linalg::hermitian_part(&m);
    let tr = m.trace();
    m /= tr;
    let new_dims = DimPair { dim_a: va.ncols(), dim_b: vb.ncols() };
    SupportRestriction {
        state: BipartiteState::from_parts_unchecked(m, new_dims),
        original_dims: dims,
        isometry_a: iso_a,
        isometry_b: iso_b,
    }
}

/// Restricts `A` and `B` to the supports of the marginals.
pub fn restrict_support(rho: &BipartiteState) -> BipartiteState {
    support_restriction(rho).state
}

#[derive(Debug, Clone, PartialEq)]
pub struct FaithfulnessCertificate {
    pub faithful: bool,
    pub rank: usize,
    /// `|A|^2` of the support-restricted probed side.
    pub required_rank: usize,
    pub gap: SingularGap,
    pub singular_values: Vec<f64>,
    pub tol: f64,
    pub side: Subsystem,
    pub original_dims: DimPair,
    /// Dimensions after support restriction, with the probed side first.
    pub restricted_dims: DimPair,
}

impl FaithfulnessCertificate {
    pub fn support_restricted(&self) -> bool {
        let oriented = match self.side {
            Subsystem::A => self.original_dims,
            Subsystem::B => self.original_dims.swapped(),
        };
        oriented != self.restricted_dims
    }
}

/// Rank test for faithfulness on `side`, after support restriction.
pub fn certify_faithful(rho: &BipartiteState, side: Subsystem, tol: f64) -> FaithfulnessCertificate {
    let oriented = rho.oriented(side);
    let restricted = support_restriction(&oriented);
    let dims = restricted.state.dims();
    let j = state_to_map(&restricted.state, Direction::AToB);
    let r = rank_and_nullspace(&j.matrix, tol);
    let required = dims.dim_a * dims.dim_a;
    FaithfulnessCertificate {
        faithful: r.rank == required,
        rank: r.rank,
        required_rank: required,
        gap: r.gap,
        singular_values: r.singular_values,
        tol: r.tol,
        side,
        original_dims: rho.dims(),
        restricted_dims: dims,
    }
}

/// Numerical rank of the real matrix of a Hermitian-preserving map.
pub fn hermitian_rank(t: &TransferMatrix, tol: f64) -> usize {
    rank_and_nullspace(&t.hermitian_real_matrix(), tol).rank
}

/// Scales a transfer matrix, e.g. to compare against `sigma -> sigma / d`.
pub fn scaled_identity_map(d: usize, factor: f64) -> TransferMatrix {
    TransferMatrix { dim_in: d, dim_out: d, matrix: identity(d * d) * c(factor, 0.0) }
}
