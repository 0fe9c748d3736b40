//! Channel-difference decomposition of trace-annihilating maps and explicit
//! witness pairs for states that are not faithful.
//!
//! A Hermitian-preserving map has a Choi eigendecomposition
//! `D = sum_i l_i Ad_{V_i}` with real `l_i` and HS-orthonormal `V_i`. When
//! `D` annihilates traces, `sum_i l_i V_i† V_i = 0` and `D` splits into
//! `alpha (K0 - K1)` for two CPTP maps sharing a completing Kraus operator.

use crate::channel::{apply_on_a, Channel};
use crate::error::{Error, Result};
use crate::jamiolkowski::{state_to_map, support_restriction, Direction, TransferMatrix};
use crate::linalg::{
    c, from_hermitian_coordinates, hermitian_basis, hermitian_eigen, hermitian_operator_norm, identity, psd_sqrt,
    rank_and_nullspace, unvec, vec, ComplexMatrix, DimPair, Subsystem,
};
use crate::state::BipartiteState;

/// Choi Hermiticity slack, relative to the Choi norm.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Bound on `||D†(1)||_F` for a map to count as trace-annihilating.
pub const TRACE_ANNIHILATION_TOL: f64 = 1e-10;
/// Choi eigenvalues below this fraction of the largest are treated as zero.
pub const EIGEN_DROP_REL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct HermitianPreservingMap {
    pub transfer: TransferMatrix,
    pub trace_annihilating: bool,
}

impl HermitianPreservingMap {
    pub fn new(transfer: TransferMatrix) -> Result<Self> {
        let choi = transfer.choi();
        let defect = (&choi - choi.adjoint()).norm();
        if defect > HERMITIAN_TOL * choi.norm().max(1.0) {
            return Err(Error::NotHermitianPreserving(format!("Choi anti-Hermitian part has norm {defect:e}")));
        }
        let mut map = HermitianPreservingMap { transfer, trace_annihilating: false };
        map.trace_annihilating = map.trace_residual() <= TRACE_ANNIHILATION_TOL;
        Ok(map)
    }

    /// `sum_i l_i Ad_{V_i}` from explicit terms.
    pub fn from_terms(terms: &[(f64, ComplexMatrix)]) -> Result<Self> {
        let (dout, din) =
            terms.first().map(|(_, v)| v.shape()).ok_or_else(|| Error::InvalidArgument("no terms".into()))?;
        let t = terms.iter().fold(ComplexMatrix::zeros(dout * dout, din * din), |acc, (l, v)| {
            acc + v.map(|z| z.conj()).kronecker(v) * c(*l, 0.0)
        });
        HermitianPreservingMap::new(TransferMatrix::new(t, din, dout)?)
    }

    pub fn dim_in(&self) -> usize {
        self.transfer.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.transfer.dim_out
    }

    pub fn apply(&self, x: &ComplexMatrix) -> ComplexMatrix {
        self.transfer.apply(x)
    }

    /// The adjoint map applied to the identity; zero iff `Tr D(X) = 0` for all `X`.
    pub fn dual_identity(&self) -> ComplexMatrix {
        let v = self.transfer.matrix.adjoint() * vec(&identity(self.dim_out()));
        unvec(&v, self.dim_in(), self.dim_in())
    }

    pub fn trace_residual(&self) -> f64 {
        self.dual_identity().norm()
    }
}

/// Real eigenpairs `(l_i, V_i)` of the Choi matrix with `V_i` reshaped to
/// `dim_out x dim_in` and HS-normalized; numerically zero eigenvalues are dropped.
pub fn hp_eigendecompose(map: &HermitianPreservingMap) -> Vec<(f64, ComplexMatrix)> {
    let (din, dout) = (map.dim_in(), map.dim_out());
    let (values, vectors) = hermitian_eigen(&map.transfer.choi());
    let largest = values.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    let cutoff = EIGEN_DROP_REL * largest;
    values
        .iter()
        .enumerate()
        .filter(|(_, l)| l.abs() > cutoff)
        .map(|(k, &l)| (l, unvec(&vectors.column(k).into_owned(), dout, din)))
        .collect()
}

#[derive(Debug, Clone)]
pub struct Lemma1Decomposition {
    pub alpha: f64,
    pub k0: Channel,
    pub k1: Channel,
}

/// Writes a trace-annihilating Hermitian-preserving map as `alpha (K0 - K1)`
/// with `K0`, `K1` CPTP.
pub fn lemma1_decompose(map: &HermitianPreservingMap) -> Result<Lemma1Decomposition> {
    if map.transfer.matrix.norm() == 0.0 {
        return Err(Error::ZeroMap);
    }
    let residual = map.trace_residual();
    if residual > TRACE_ANNIHILATION_TOL {
        return Err(Error::NotTraceAnnihilating(residual));
    }
    let terms = hp_eigendecompose(map);
    let din = map.dim_in();
    let positive_part = terms
        .iter()
        .filter(|(l, _)| *l >= 0.0)
        .fold(ComplexMatrix::zeros(din, din), |acc, (l, v)| acc + v.adjoint() * v * c(*l, 0.0));
    let alpha = hermitian_operator_norm(&positive_part);
    if alpha.is_nan() || alpha <= 0.0 {
        return Err(Error::ZeroMap);
    }
    let completion = psd_sqrt(&(identity(din) * c(alpha, 0.0) - &positive_part));
    let inv_sqrt_alpha = c(1.0 / alpha.sqrt(), 0.0);
    let keep_completion = completion.norm_squared() > 1e-14 * alpha;

    let mut kraus0 = Vec::new();
    let mut kraus1 = Vec::new();
    for (l, v) in &terms {
        let op = v * c((l.abs() / alpha).sqrt(), 0.0);
        if *l >= 0.0 {
            kraus0.push(op);
        } else {
            kraus1.push(op);
        }
    }
    if keep_completion || kraus0.is_empty() {
        kraus0.push(&completion * inv_sqrt_alpha);
    }
    if keep_completion || kraus1.is_empty() {
        kraus1.push(&completion * inv_sqrt_alpha);
    }
    Ok(Lemma1Decomposition { alpha, k0: Channel::from_kraus(kraus0)?, k1: Channel::from_kraus(kraus1)? })
}

/// Two distinct channels that produce the same output on a non-faithful state.
#[derive(Debug, Clone)]
pub struct WitnessPair {
    pub k0: Channel,
    pub k1: Channel,
    pub alpha: f64,
    /// `||K0_A(rho) - K1_A(rho)||_F` on the support-restricted state.
    pub output_gap: f64,
    /// `||Choi(K0) - Choi(K1)||_F`.
    pub channel_gap: f64,
    pub side: Subsystem,
    /// Support-restricted dimensions, probed side first. The channels act on
    /// the restricted probed side.
    pub restricted_dims: DimPair,
    /// The trace-annihilating map `X -> <E, X> G` that was decomposed.
    pub difference: HermitianPreservingMap,
}

/// Builds a witness pair for a state that is not faithful on `side`, or
/// returns `None` when the `B -> A` map is onto the Hermitian operators on `A`.
pub fn faithfulness_witness(rho: &BipartiteState, side: Subsystem, tol: f64) -> Result<Option<WitnessPair>> {
    let restricted = support_restriction(&rho.oriented(side)).state;
    let dims = restricted.dims();
    let da = dims.dim_a;

    // W = real span of the image of Hermitian operators under B -> A
    let image = state_to_map(&restricted, Direction::BToA).hermitian_real_matrix();
    let complement = rank_and_nullspace(&image.transpose(), tol);
    if complement.null_basis.is_empty() {
        return Ok(None);
    }
    let basis_a = hermitian_basis(da);
    let traceless_norm = |x: &nalgebra::DVector<f64>| x.rows(1, x.len() - 1).norm();
    let e_coords = complement
        .null_basis
        .iter()
        .max_by(|x, y| traceless_norm(x).total_cmp(&traceless_norm(y)))
        .expect("nonempty complement");
    let e = from_hermitian_coordinates(e_coords, &basis_a);
    let mut g = &e - identity(da) * (e.trace() / c(da as f64, 0.0));
    if g.norm() < 1e-12 {
        g = basis_a[1].clone();
    }
    g /= c(g.norm(), 0.0);

    let transfer = TransferMatrix::new(vec(&g) * vec(&e).adjoint(), da, da)?;
    let difference = HermitianPreservingMap::new(transfer)?;
    let Lemma1Decomposition { alpha, k0, k1 } = lemma1_decompose(&difference)?;

    let out0 = apply_on_a(&k0, &restricted)?;
    let out1 = apply_on_a(&k1, &restricted)?;
    let output_gap = out0.distance(&out1);
    let channel_gap = (k0.choi() - k1.choi()).norm();
    Ok(Some(WitnessPair { k0, k1, alpha, output_gap, channel_gap, side, restricted_dims: dims, difference }))
}
