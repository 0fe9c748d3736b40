//! Local commutant of a bipartite state and the sensitivity certificate.
//!
//! A state is sensitive to unitary (equivalently, unital) channels on `A`
//! exactly when the only operators `M` on `A` with `[M (x) 1, rho] = 0` are
//! multiples of the identity. When the commutant is larger, a Hermitian
//! element of it has a nontrivial spectral decomposition, and its
//! eigenprojectors form a local measurement that leaves the state unchanged.

use crate::error::{Error, Result};
use crate::linalg::{
    antihermitian_part, c, distance_from_scalar, hermitian_eigen, hermitian_function, hermitian_part, hs_inner,
    identity, rank_and_nullspace, tensor, unit, unvec, vec, ComplexMatrix, DimPair, SingularGap, Subsystem,
};
use crate::state::{BipartiteState, STATE_TOL};

/// Residual bound for projector algebra and for the invariance of the state.
pub const PCQ_TOL: f64 = 1e-10;

/// Relative spacing below which eigenvalues are merged into one eigenspace.
pub const EIGEN_CLUSTER_REL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ChannelClass {
    Unitary,
    Unital,
}

/// HS-orthonormal basis of `{M : [M (x) 1, rho] = 0}` on the chosen side.
#[derive(Debug, Clone)]
pub struct CommutantBasis {
    pub side: Subsystem,
    pub elements: Vec<ComplexMatrix>,
    pub nullity: usize,
    pub tol: f64,
    pub gap: SingularGap,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectiveMeasurement {
    pub projectors: Vec<ComplexMatrix>,
}

impl ProjectiveMeasurement {
    pub fn len(&self) -> usize {
        self.projectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.projectors.is_empty()
    }

    /// Largest violation of Hermiticity, idempotence, orthogonality or completeness.
    pub fn algebra_residual(&self) -> f64 {
        let Some(first) = self.projectors.first() else {
            return f64::INFINITY;
        };
        let d = first.nrows();
        let mut worst: f64 = 0.0;
        let mut total = ComplexMatrix::zeros(d, d);
        for (i, p) in self.projectors.iter().enumerate() {
            worst = worst.max((p - p.adjoint()).norm());
            for (j, q) in self.projectors.iter().enumerate() {
                let expected = if i == j { p.clone() } else { ComplexMatrix::zeros(d, d) };
                worst = worst.max((p * q - expected).norm());
            }
            total += p;
        }
        worst.max((total - identity(d)).norm())
    }

    /// `sum_i (P_i (x) 1) rho (P_i (x) 1)` with the projectors on subsystem A.
    pub fn measure(&self, rho: &BipartiteState) -> ComplexMatrix {
        let db = rho.dims().dim_b;
        let n = rho.dims().total();
        self.projectors.iter().fold(ComplexMatrix::zeros(n, n), |acc, p| {
            let big = tensor(p, &identity(db));
            acc + &big * rho.matrix() * &big
        })
    }

    /// Frobenius distance between the measured and the original state.
    pub fn invariance_residual(&self, rho: &BipartiteState) -> f64 {
        (self.measure(rho) - rho.matrix()).norm()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SensitivityCertificate {
    pub sensitive: bool,
    pub class: ChannelClass,
    pub side: Subsystem,
    pub nullity: usize,
    /// Present exactly when the state is not sensitive; projectors act on `side`.
    pub pcq_measurement: Option<ProjectiveMeasurement>,
    pub tol: f64,
    pub gap: SingularGap,
}

/// Matrix of `M -> (M (x) 1) rho - rho (M (x) 1)` on column-stacked `M`.
pub fn commutator_matrix(rho: &BipartiteState) -> ComplexMatrix {
    let DimPair { dim_a: da, dim_b: db } = rho.dims();
    let n = da * db;
    let m = rho.matrix();
    let mut out = ComplexMatrix::zeros(n * n, da * da);
    for j in 0..da {
        for i in 0..da {
            let big = tensor(&unit(da, i, j), &identity(db));
            let comm = &big * m - m * &big;
            out.set_column(i + j * da, &vec(&comm));
        }
    }
    out
}

pub fn commutant_basis(rho: &BipartiteState, side: Subsystem, tol: f64) -> CommutantBasis {
    let oriented = rho.oriented(side);
    let da = oriented.dims().dim_a;
    let r = rank_and_nullspace(&commutator_matrix(&oriented), tol);
    let elements: Vec<ComplexMatrix> = r.null_basis.iter().map(|v| unvec(v, da, da)).collect();
    CommutantBasis { side, nullity: elements.len(), elements, tol: r.tol, gap: r.gap }
}

/// Commutant element with the largest component orthogonal to the identity.
fn least_scalar_element(basis: &CommutantBasis) -> Option<&ComplexMatrix> {
    basis
        .elements
        .iter()
        .map(|m| {
            let d = m.nrows();
            let unit_id = identity(d) * c(1.0 / (d as f64).sqrt(), 0.0);
            let along = hs_inner(&unit_id, m);
            ((m - &unit_id * along).norm(), m)
        })
        .max_by(|a, b| a.0.total_cmp(&b.0))
        .map(|(_, m)| m)
}

/// A non-scalar Hermitian element of the commutant, if the commutant is nontrivial.
pub fn hermitian_commutant_element(basis: &CommutantBasis) -> Option<ComplexMatrix> {
    if basis.nullity <= 1 {
        return None;
    }
    let m = least_scalar_element(basis)?;
    let h = hermitian_part(m);
    if distance_from_scalar(&h) > EIGEN_CLUSTER_REL * m.norm() {
        Some(h)
    } else {
        Some(antihermitian_part(m))
    }
}

/// Eigenprojectors of a Hermitian matrix, merging eigenvalues closer than
/// `EIGEN_CLUSTER_REL` times the spectral range.
pub fn eigenprojectors(h: &ComplexMatrix) -> Vec<ComplexMatrix> {
    let (values, vectors) = hermitian_eigen(h);
    let d = h.nrows();
    let range = values.last().copied().unwrap_or(0.0) - values.first().copied().unwrap_or(0.0);
    let threshold = EIGEN_CLUSTER_REL * range;
    let mut projectors = Vec::new();
    let mut current = ComplexMatrix::zeros(d, d);
    for k in 0..values.len() {
        if k > 0 && values[k] - values[k - 1] > threshold {
            projectors.push(std::mem::replace(&mut current, ComplexMatrix::zeros(d, d)));
        }
        let v = vectors.column(k);
        current += v * v.adjoint();
    }
    projectors.push(current);
    projectors
}

/// Local measurement on `side` that leaves the state invariant, or `None`
/// when the commutant is trivial.
pub fn extract_pcq(rho: &BipartiteState, side: Subsystem, tol: f64) -> Result<Option<ProjectiveMeasurement>> {
    let basis = commutant_basis(rho, side, tol);
    extract_from_basis(rho, &basis)
}

fn extract_from_basis(rho: &BipartiteState, basis: &CommutantBasis) -> Result<Option<ProjectiveMeasurement>> {
    let Some(h) = hermitian_commutant_element(basis) else {
        return Ok(None);
    };
    let measurement = ProjectiveMeasurement { projectors: eigenprojectors(&h) };
    if measurement.len() < 2 {
        return Err(Error::Verification(
            "commutant element has a single eigenspace; null-space tolerance is inconsistent".into(),
        ));
    }
    let algebra = measurement.algebra_residual();
    if algebra > PCQ_TOL {
        return Err(Error::Verification(format!("projector algebra residual {algebra:e}")));
    }
    let invariance = measurement.invariance_residual(&rho.oriented(basis.side));
    if invariance > PCQ_TOL {
        return Err(Error::Verification(format!("measurement perturbs the state by {invariance:e}")));
    }
    Ok(Some(measurement))
}

/// Sensitivity to unitary or unital channels on `side`. Both classes are
/// decided by the same test: the commutant is spanned by the identity.
///
/// Fails only if a nontrivial commutant is found but the extracted
/// measurement does not verify.
pub fn certify_sensitive(
    rho: &BipartiteState,
    side: Subsystem,
    class: ChannelClass,
    tol: f64,
) -> Result<SensitivityCertificate> {
    let basis = commutant_basis(rho, side, tol);
    let pcq_measurement = extract_from_basis(rho, &basis)?;
    Ok(SensitivityCertificate {
        sensitive: basis.nullity == 1,
        class,
        side,
        nullity: basis.nullity,
        pcq_measurement,
        tol: basis.tol,
        gap: basis.gap,
    })
}

/// Faithfulness to unitary operations. Unitary operations form a group, so
/// faithfulness and sensitivity to them coincide.
pub fn certify_faithful_to_unitaries(rho: &BipartiteState, side: Subsystem, tol: f64) -> Result<bool> {
    Ok(certify_sensitive(rho, side, ChannelClass::Unitary, tol)?.sensitive)
}

/// `exp(i theta H)` for Hermitian `H`.
pub fn unitary_from_generator(h: &ComplexMatrix, theta: f64) -> ComplexMatrix {
    hermitian_function(h, |x| c(0.0, theta * x).exp())
}

/// `sum_i p_i |i><i| (x) sigma_i`.
pub fn make_cq_state(p: &[f64], sigmas: &[ComplexMatrix]) -> Result<BipartiteState> {
    if p.is_empty() || p.len() != sigmas.len() {
        return Err(Error::InvalidArgument(format!(
            "need one state per probability, got {} probabilities and {} states",
            p.len(),
            sigmas.len()
        )));
    }
    if p.iter().any(|&x| x.is_nan() || x < 0.0) || (p.iter().sum::<f64>() - 1.0).abs() > STATE_TOL {
        return Err(Error::InvalidArgument("p is not a probability vector".into()));
    }
    let db = sigmas[0].nrows();
    for s in sigmas {
        BipartiteState::new(s.clone(), DimPair::new(1, db)?)
            .map_err(|e| Error::InvalidArgument(format!("conditional state: {e}")))?;
    }
    let da = p.len();
    let m = p.iter().zip(sigmas).enumerate().fold(ComplexMatrix::zeros(da * db, da * db), |acc, (i, (&pi, s))| {
        acc + tensor(&unit(da, i, i), s) * c(pi, 0.0)
    });
    BipartiteState::new(m, DimPair::new(da, db)?)
}

/// `1/2 diag(lambda) (x) |0><0| + 1/2 |+><+| (x) |1><1|` on `C^d (x) C^2`,
/// with `lambda` a non-degenerate spectrum of length `d >= 2`.
///
/// Not faithful (its `B -> A` map has a two-dimensional image) but sensitive
/// to unital channels and faithful to unitary operations.
pub fn make_prop4_state(lambda: &[f64]) -> Result<BipartiteState> {
    let d = lambda.len();
    if d < 2 {
        return Err(Error::InvalidArgument("need at least two eigenvalues".into()));
    }
    if lambda.iter().any(|&x| x.is_nan() || x <= 0.0) || (lambda.iter().sum::<f64>() - 1.0).abs() > STATE_TOL {
        return Err(Error::InvalidArgument("lambda must be a positive probability vector".into()));
    }
    for i in 0..d {
        for j in (i + 1)..d {
            if (lambda[i] - lambda[j]).abs() <= STATE_TOL {
                return Err(Error::InvalidArgument(format!(
                    "spectrum is degenerate: lambda[{i}] = lambda[{j}] = {}",
                    lambda[i]
                )));
            }
        }
    }
    let diag = ComplexMatrix::from_fn(d, d, |i, j| if i == j { c(lambda[i], 0.0) } else { c(0.0, 0.0) });
    let plus = ComplexMatrix::from_element(d, d, c(1.0 / d as f64, 0.0));
    let m = (tensor(&diag, &unit(2, 0, 0)) + tensor(&plus, &unit(2, 1, 1))) * c(0.5, 0.0);
    BipartiteState::new(m, DimPair::new(d, 2)?)
}
