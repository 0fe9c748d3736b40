//! CP maps in Kraus, Choi and transfer-matrix form.
//!
//! Conventions:
//! - Choi matrix is unnormalized, `C = sum_ij |i><j| (x) E(|i><j|)`, so a
//!   trace-preserving map has `Tr C = dim_in`.
//! - Transfer matrix acts on column-stacked operators,
//!   `vec(E(X)) = T vec(X)`; for a Kraus operator `K` the contribution is
//!   `conj(K) (x) K`.

use rand::Rng;
use rand_distr::Exp1;

use crate::error::{Error, Result};
use crate::linalg::{
    self, c, haar_unitary_from, hermitian_eigen, identity, is_hermitian, min_eigenvalue, unit, unvec, vec,
    ComplexMatrix, ComplexVector, RandomSeed,
};
use crate::state::BipartiteState;

/// Tolerance used for the CPTP validity checks on generated channels.
pub const CHANNEL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ReprKind {
    Kraus,
    Choi,
    Transfer,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Repr {
    Kraus(Vec<ComplexMatrix>),
    Choi(ComplexMatrix),
    Transfer(ComplexMatrix),
}

/// A linear map `B(C^dim_in) -> B(C^dim_out)`, typically completely positive.
#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    dim_in: usize,
    dim_out: usize,
    repr: Repr,
}

impl Channel {
    pub fn from_kraus(kraus: Vec<ComplexMatrix>) -> Result<Self> {
        let first = kraus.first().ok_or_else(|| Error::InvalidChannel("empty Kraus list".into()))?;
        let (dim_out, dim_in) = first.shape();
        if dim_in == 0 || dim_out == 0 {
            return Err(Error::InvalidChannel("zero-dimensional Kraus operator".into()));
        }
        if kraus.iter().any(|k| k.shape() != (dim_out, dim_in)) {
            return Err(Error::DimensionMismatch("Kraus operators differ in shape".into()));
        }
        Ok(Channel { dim_in, dim_out, repr: Repr::Kraus(kraus) })
    }

    pub fn from_choi(choi: ComplexMatrix, dim_in: usize, dim_out: usize) -> Result<Self> {
        let n = dim_in * dim_out;
        if choi.shape() != (n, n) || n == 0 {
            return Err(Error::DimensionMismatch(format!(
                "Choi matrix must be {n}x{n}, got {}x{}",
                choi.nrows(),
                choi.ncols()
            )));
        }
        Ok(Channel { dim_in, dim_out, repr: Repr::Choi(choi) })
    }

    pub fn from_transfer(transfer: ComplexMatrix, dim_in: usize, dim_out: usize) -> Result<Self> {
        if transfer.shape() != (dim_out * dim_out, dim_in * dim_in) || dim_in == 0 || dim_out == 0 {
            return Err(Error::DimensionMismatch(format!(
                "transfer matrix must be {}x{}, got {}x{}",
                dim_out * dim_out,
                dim_in * dim_in,
                transfer.nrows(),
                transfer.ncols()
            )));
        }
        Ok(Channel { dim_in, dim_out, repr: Repr::Transfer(transfer) })
    }

    pub fn identity(d: usize) -> Self {
        Channel { dim_in: d, dim_out: d, repr: Repr::Kraus(vec![identity(d)]) }
    }

    /// `X -> U X U†`.
    pub fn unitary(u: ComplexMatrix) -> Result<Self> {
        Channel::from_kraus(vec![u])
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn repr(&self) -> &Repr {
        &self.repr
    }

    pub fn kind(&self) -> ReprKind {
        match self.repr {
            Repr::Kraus(_) => ReprKind::Kraus,
            Repr::Choi(_) => ReprKind::Choi,
            Repr::Transfer(_) => ReprKind::Transfer,
        }
    }

    pub fn kraus_ops(&self) -> Option<&[ComplexMatrix]> {
        match &self.repr {
            Repr::Kraus(k) => Some(k),
            _ => None,
        }
    }

    pub fn apply(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        if x.shape() != (self.dim_in, self.dim_in) {
            return Err(Error::DimensionMismatch(format!(
                "channel input is {0}x{0}, got {1}x{2}",
                self.dim_in,
                x.nrows(),
                x.ncols()
            )));
        }
        Ok(match &self.repr {
            Repr::Kraus(ks) => {
                ks.iter().fold(ComplexMatrix::zeros(self.dim_out, self.dim_out), |acc, k| acc + k * x * k.adjoint())
            }
            Repr::Transfer(t) => unvec(&(t * vec(x)), self.dim_out, self.dim_out),
            Repr::Choi(_) => {
                let t = self.transfer();
                unvec(&(t * vec(x)), self.dim_out, self.dim_out)
            }
        })
    }

    pub fn choi(&self) -> ComplexMatrix {
        match &self.repr {
            Repr::Choi(c) => c.clone(),
            Repr::Transfer(t) => transfer_to_choi(t, self.dim_in, self.dim_out),
            Repr::Kraus(ks) => {
                let n = self.dim_in * self.dim_out;
                let mut out = ComplexMatrix::zeros(n, n);
                for k in ks {
                    // column-stacked vec(K) indexed i * dim_out + a  <->  K[a, i]
                    let v = vec(k);
                    out += &v * v.adjoint();
                }
                out
            }
        }
    }

    pub fn transfer(&self) -> ComplexMatrix {
        match &self.repr {
            Repr::Transfer(t) => t.clone(),
            Repr::Choi(c) => choi_to_transfer(c, self.dim_in, self.dim_out),
            Repr::Kraus(ks) => {
                let (din, dout) = (self.dim_in, self.dim_out);
                ks.iter()
                    .fold(ComplexMatrix::zeros(dout * dout, din * din), |acc, k| acc + k.map(|z| z.conj()).kronecker(k))
            }
        }
    }

    /// Kraus operators from the Choi eigendecomposition; eigenvalues `<= tol`
    /// are dropped and a clearly negative eigenvalue is an error.
    pub fn kraus(&self, tol: f64) -> Result<Vec<ComplexMatrix>> {
        if let Repr::Kraus(k) = &self.repr {
            return Ok(k.clone());
        }
        let choi = self.choi();
        if !is_hermitian(&choi, 1e-10 * choi.norm().max(1.0)) {
            return Err(Error::InvalidChannel("Choi matrix is not Hermitian".into()));
        }
        let (values, vectors) = hermitian_eigen(&choi);
        let scale = values.iter().fold(0.0_f64, |a, v| a.max(v.abs())).max(1.0);
        let negative_tol = CHANNEL_TOL * scale;
        let tol = if tol > 0.0 { tol } else { 1e-12 * scale };
        if values.first().is_some_and(|&v| v < -negative_tol.max(tol)) {
            return Err(Error::InvalidChannel(format!(
                "Choi matrix has negative eigenvalue {:e}; map is not CP",
                values[0]
            )));
        }
        let kraus: Vec<ComplexMatrix> = values
            .iter()
            .enumerate()
            .filter(|(_, &lam)| lam > tol)
            .map(|(k, &lam)| {
                let v: ComplexVector = vectors.column(k).into_owned() * c(lam.sqrt(), 0.0);
                unvec(&v, self.dim_out, self.dim_in)
            })
            .collect();
        if kraus.is_empty() {
            return Ok(vec![ComplexMatrix::zeros(self.dim_out, self.dim_in)]);
        }
        Ok(kraus)
    }

    pub fn convert(&self, target: ReprKind) -> Result<Channel> {
        let repr = match target {
            ReprKind::Kraus => Repr::Kraus(self.kraus(0.0)?),
            ReprKind::Choi => Repr::Choi(self.choi()),
            ReprKind::Transfer => Repr::Transfer(self.transfer()),
        };
        Ok(Channel { dim_in: self.dim_in, dim_out: self.dim_out, repr })
    }

    /// `self` after `first`, i.e. `X -> self(first(X))`.
    pub fn compose(&self, first: &Channel) -> Result<Channel> {
        if first.dim_out != self.dim_in {
            return Err(Error::DimensionMismatch("composition dimensions do not chain".into()));
        }
        Channel::from_transfer(self.transfer() * first.transfer(), first.dim_in, self.dim_out)
    }

    /// `p * self + (1 - p) * other`.
    pub fn mix(&self, other: &Channel, p: f64) -> Result<Channel> {
        if self.dim_in != other.dim_in || self.dim_out != other.dim_out {
            return Err(Error::DimensionMismatch("mixture of channels with different dimensions".into()));
        }
        let t = self.transfer() * c(p, 0.0) + other.transfer() * c(1.0 - p, 0.0);
        Channel::from_transfer(t, self.dim_in, self.dim_out)
    }

    /// `sum_i K_i† K_i`, i.e. the adjoint map applied to the identity.
    pub fn dual_identity(&self) -> ComplexMatrix {
        match &self.repr {
            Repr::Kraus(ks) => {
                ks.iter().fold(ComplexMatrix::zeros(self.dim_in, self.dim_in), |acc, k| acc + k.adjoint() * k)
            }
            _ => {
                let t = self.transfer();
                let v = t.adjoint() * vec(&identity(self.dim_out));
                unvec(&v, self.dim_in, self.dim_in)
            }
        }
    }
}

/// Reshuffle between the two matrix forms. Both index `E(|i><j|)[a, b]`:
/// Choi at `(i * dout + a, j * dout + b)`, transfer at `(a + b * dout, i + j * din)`.
pub fn transfer_to_choi(t: &ComplexMatrix, din: usize, dout: usize) -> ComplexMatrix {
    let n = din * dout;
    ComplexMatrix::from_fn(n, n, |r, col| {
        let (i, a) = (r / dout, r % dout);
        let (j, b) = (col / dout, col % dout);
        t[(a + b * dout, i + j * din)]
    })
}

pub fn choi_to_transfer(choi: &ComplexMatrix, din: usize, dout: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(dout * dout, din * din, |r, col| {
        let (a, b) = (r % dout, r / dout);
        let (i, j) = (col % din, col / din);
        choi[(i * dout + a, j * dout + b)]
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelClassReport {
    pub is_cp: bool,
    pub min_choi_eigenvalue: f64,
    pub is_tp: bool,
    /// `||sum K† K - 1||_op`
    pub tp_residual: f64,
    pub is_unital: bool,
    /// `||E(1) - 1||_op`
    pub unital_residual: f64,
    pub tol: f64,
}

/// Membership in the CP / TP / unital classes with residual evidence.
pub fn classify(ch: &Channel, tol: f64) -> ChannelClassReport {
    let tol = if tol > 0.0 { tol } else { CHANNEL_TOL };
    let choi = ch.choi();
    let min_eig = min_eigenvalue(&choi);
    let hermitian_defect = (&choi - choi.adjoint()).norm();
    let tp_residual = linalg::operator_norm(&(ch.dual_identity() - identity(ch.dim_in())));
    let unital_residual = if ch.dim_in() == ch.dim_out() {
        linalg::operator_norm(&(ch.apply(&identity(ch.dim_in())).expect("square map") - identity(ch.dim_out())))
    } else {
        f64::INFINITY
    };
    ChannelClassReport {
        is_cp: min_eig >= -tol && hermitian_defect <= tol,
        min_choi_eigenvalue: min_eig,
        is_tp: tp_residual <= tol,
        tp_residual,
        is_unital: unital_residual <= tol,
        unital_residual,
        tol,
    }
}

/// `(E (x) id_B)(rho)`.
pub fn apply_on_a(ch: &Channel, rho: &BipartiteState) -> Result<BipartiteState> {
    let dims = rho.dims();
    if ch.dim_in() != dims.dim_a || ch.dim_out() != dims.dim_a {
        return Err(Error::DimensionMismatch(format!(
            "channel {}->{} cannot act on subsystem A of dimension {}",
            ch.dim_in(),
            ch.dim_out(),
            dims.dim_a
        )));
    }
    let (da, db) = (dims.dim_a, dims.dim_b);
    let m = rho.matrix();
    let out = match ch.repr() {
        Repr::Kraus(ks) => ks.iter().fold(ComplexMatrix::zeros(da * db, da * db), |acc, k| {
            let big = k.kronecker(&identity(db));
            acc + &big * m * big.adjoint()
        }),
        _ => {
            // act blockwise: block (b, b') of the B-indices is an operator on A
            let mut out = ComplexMatrix::zeros(da * db, da * db);
            for b in 0..db {
                for bp in 0..db {
                    let block = ComplexMatrix::from_fn(da, da, |a, ap| m[(a * db + b, ap * db + bp)]);
                    let img = ch.apply(&block)?;
                    for a in 0..da {
                        for ap in 0..da {
                            out[(a * db + b, ap * db + bp)] = img[(a, ap)];
                        }
                    }
                }
            }
            out
        }
    };
    Ok(BipartiteState::from_parts_unchecked(out, dims))
}

/// `E` acting on subsystem `side`.
pub fn apply_on(ch: &Channel, rho: &BipartiteState, side: linalg::Subsystem) -> Result<BipartiteState> {
    match side {
        linalg::Subsystem::A => apply_on_a(ch, rho),
        linalg::Subsystem::B => Ok(apply_on_a(ch, &rho.swap())?.swap()),
    }
}

fn haar_isometry<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix {
    let u = haar_unitary_from(rng, rows);
    u.columns(0, cols).into_owned()
}

/// Random CPTP map from a Haar isometry `C^d -> C^d (x) C^env`, environment traced out.
pub fn random_cptp(d: usize, env: usize, seed: RandomSeed) -> Result<Channel> {
    if d == 0 || env == 0 {
        return Err(Error::InvalidArgument("dimensions must be positive".into()));
    }
    let mut rng = seed.rng();
    let iso = haar_isometry(&mut rng, d * env, d);
    // rows indexed e * d + a: Kraus K_e = <e| V
    let kraus = (0..env).map(|e| iso.rows(e * d, d).into_owned()).collect();
    Channel::from_kraus(kraus)
}

/// Uniform point of the probability simplex (Dirichlet(1, ..., 1)).
pub(crate) fn dirichlet_uniform<R: Rng>(rng: &mut R, k: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..k).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / total).collect()
}

/// `sum_i p_i Ad_{U_i}` with Dirichlet weights and Haar unitaries.
pub fn random_unitary_mixture(d: usize, k: usize, seed: RandomSeed) -> Result<Channel> {
    if d == 0 || k == 0 {
        return Err(Error::InvalidArgument("dimensions must be positive".into()));
    }
    let mut rng = seed.rng();
    let weights = dirichlet_uniform(&mut rng, k);
    let kraus = weights.iter().map(|&p| haar_unitary_from(&mut rng, d) * c(p.sqrt(), 0.0)).collect();
    Channel::from_kraus(kraus)
}

/// Schur-product channel `M -> C o M` for a correlation matrix `C`
/// (PSD with unit diagonal).
pub fn schur_channel(corr: &ComplexMatrix) -> Result<Channel> {
    if !corr.is_square() || corr.nrows() == 0 {
        return Err(Error::InvalidArgument("correlation matrix must be square".into()));
    }
    let d = corr.nrows();
    if !is_hermitian(corr, 1e-12) {
        return Err(Error::InvalidArgument("correlation matrix is not Hermitian".into()));
    }
    if (0..d).any(|i| (corr[(i, i)] - c(1.0, 0.0)).norm() > 1e-12) {
        return Err(Error::InvalidArgument("correlation matrix must have unit diagonal".into()));
    }
    if min_eigenvalue(corr) < -1e-12 {
        return Err(Error::InvalidArgument("correlation matrix is not PSD".into()));
    }
    // vec(C o M) = diag(vec C) vec(M)
    let v = vec(corr);
    let t = ComplexMatrix::from_diagonal(&v);
    Channel::from_transfer(t, d, d)
}

/// `X -> sum_i |i><i| X |i><i|`.
pub fn full_dephasing(d: usize) -> Channel {
    Channel::from_kraus((0..d).map(|i| unit(d, i, i)).collect()).expect("nonempty")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{hermitian_basis, random_density, tensor, DimPair};

    fn pauli_x() -> ComplexMatrix {
        ComplexMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)])
    }

    fn phi_plus_projector(d: usize) -> ComplexMatrix {
        let mut v = ComplexVector::zeros(d * d);
        for i in 0..d {
            v[i * d + i] = c(1.0, 0.0);
        }
        &v * v.adjoint()
    }

    /// Oracle: Choi built directly from the definition `sum |i><j| (x) E(|i><j|)`.
    fn choi_by_definition(ch: &Channel) -> ComplexMatrix {
        let (din, dout) = (ch.dim_in(), ch.dim_out());
        let mut out = ComplexMatrix::zeros(din * dout, din * dout);
        for i in 0..din {
            for j in 0..din {
                out += tensor(&unit(din, i, j), &ch.apply(&unit(din, i, j)).unwrap());
            }
        }
        out
    }

    #[test]
    fn identity_choi_is_unnormalized_bell_projector() {
        let ch = Channel::identity(2);
        assert!((ch.choi() - phi_plus_projector(2)).norm() < 1e-15);
        assert!((ch.choi() - choi_by_definition(&ch)).norm() < 1e-15);
        assert!((ch.choi().trace() - c(2.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn unitary_choi_is_rank_one() {
        let u = linalg::haar_unitary(3, RandomSeed(5));
        let choi = Channel::unitary(u).unwrap().choi();
        assert_eq!(linalg::rank_and_nullspace(&choi, 0.0).rank, 1);
    }

    #[test]
    fn representations_agree_on_hermitian_basis() {
        let basis = hermitian_basis(3);
        for s in 0..100 {
            let ch = random_cptp(3, 1 + (s as usize % 3), RandomSeed(s)).unwrap();
            let choi = ch.choi();
            assert!((&choi - choi_by_definition(&ch)).norm() < 1e-12);
            let via_choi = Channel::from_choi(choi.clone(), 3, 3).unwrap();
            let via_transfer = Channel::from_transfer(ch.transfer(), 3, 3).unwrap();
            let kraus = Channel::from_kraus(via_choi.kraus(0.0).unwrap()).unwrap();
            assert!((kraus.choi() - &choi).norm() <= 1e-10);
            for b in &basis {
                let reference = ch.apply(b).unwrap();
                assert!((via_choi.apply(b).unwrap() - &reference).norm() <= 1e-10);
                assert!((via_transfer.apply(b).unwrap() - &reference).norm() <= 1e-10);
                assert!((kraus.apply(b).unwrap() - &reference).norm() <= 1e-10);
            }
        }
    }

    #[test]
    fn kraus_extraction_rejects_non_cp() {
        let ch = Channel::from_choi(-phi_plus_projector(2), 2, 2).unwrap();
        assert!(matches!(ch.kraus(0.0), Err(Error::InvalidChannel(_))));
        assert!(ch.convert(ReprKind::Kraus).is_err());
    }

    #[test]
    fn classify_reference_channels() {
        let r = classify(&Channel::unitary(linalg::haar_unitary(2, RandomSeed(1))).unwrap(), 0.0);
        assert!(r.is_cp && r.is_tp && r.is_unital);

        let damping = Channel::from_kraus(vec![unit(2, 0, 0), unit(2, 0, 1)]).unwrap();
        let r = classify(&damping, 0.0);
        assert!(r.is_cp && r.is_tp && !r.is_unital);
        // E(1) = 2|0><0|, residual ||diag(1,-1)||_op = 1
        assert!((r.unital_residual - 1.0).abs() < 1e-14);

        // sum K†K = 0.9 * 1 leaves residual 0.1 in any dimension
        for d in [2, 3] {
            let short = Channel::from_kraus(vec![identity(d) * c(0.9f64.sqrt(), 0.0)]).unwrap();
            let r = classify(&short, 0.0);
            assert!(r.is_cp && !r.is_tp);
            assert!((r.tp_residual - 0.1).abs() < 1e-14);
        }
    }

    #[test]
    fn apply_on_a_cases() {
        let dims = DimPair::new(2, 3).unwrap();
        let rho = BipartiteState::new(random_density(6, 6, RandomSeed(3)).unwrap(), dims).unwrap();
        let same = apply_on_a(&Channel::identity(2), &rho).unwrap();
        assert!((same.matrix() - rho.matrix()).norm() < 1e-15);

        let dims = DimPair::new(2, 2).unwrap();
        let zero_zero = BipartiteState::new(unit(4, 0, 0), dims).unwrap();
        let flipped = apply_on_a(&Channel::unitary(pauli_x()).unwrap(), &zero_zero).unwrap();
        assert!((flipped.matrix() - unit(4, 2, 2)).norm() < 1e-15);

        let rho =
            BipartiteState::new(random_density(6, 3, RandomSeed(4)).unwrap(), DimPair::new(3, 2).unwrap()).unwrap();
        for s in 0..20 {
            let ch = random_cptp(3, 2, RandomSeed(s)).unwrap();
            let out = apply_on_a(&ch, &rho).unwrap();
            assert!((out.matrix().trace() - c(1.0, 0.0)).norm() < 1e-12);
            let via_transfer = apply_on_a(&ch.convert(ReprKind::Transfer).unwrap(), &rho).unwrap();
            assert!((via_transfer.matrix() - out.matrix()).norm() < 1e-12);
        }
        assert!(apply_on_a(&Channel::identity(3), &zero_zero).is_err());
    }

    #[test]
    fn random_cptp_properties() {
        let ch = random_cptp(3, 1, RandomSeed(8)).unwrap();
        let k = &ch.kraus_ops().unwrap()[0];
        assert!((k.adjoint() * k - identity(3)).norm() < 1e-12);
        for s in 0..100 {
            let ch = random_cptp(2, 3, RandomSeed(s)).unwrap();
            assert_eq!(ch.kraus_ops().unwrap().len(), 3);
            let r = classify(&ch, 0.0);
            assert!(r.is_cp && r.is_tp, "{r:?}");
            assert!((ch.choi().trace() - c(2.0, 0.0)).norm() < 1e-10);
        }
        assert_eq!(random_cptp(2, 2, RandomSeed(9)).unwrap(), random_cptp(2, 2, RandomSeed(9)).unwrap());
    }

    #[test]
    fn random_unitary_mixture_properties() {
        let single = random_unitary_mixture(3, 1, RandomSeed(0)).unwrap();
        let u = &single.kraus_ops().unwrap()[0];
        assert!((u.adjoint() * u - identity(3)).norm() < 1e-12);
        for s in 0..100 {
            let k = 1 + (s as usize % 4);
            let ch = random_unitary_mixture(3, k, RandomSeed(s)).unwrap();
            let r = classify(&ch, 0.0);
            assert!(r.is_cp && r.is_tp && r.is_unital);
            assert!(r.unital_residual <= 1e-10);
            let rank = linalg::rank_and_nullspace(&ch.choi(), 0.0).rank;
            assert!(rank <= k);
        }
    }

    #[test]
    fn schur_channel_cases() {
        let ones = ComplexMatrix::from_element(3, 3, c(1.0, 0.0));
        let ch = schur_channel(&ones).unwrap();
        assert!((ch.transfer() - Channel::identity(3).transfer()).norm() < 1e-15);

        let deph = schur_channel(&identity(3)).unwrap();
        assert!((deph.choi() - full_dephasing(3).choi()).norm() < 1e-15);

        // random correlation matrix: Gram matrix of unit vectors
        let g = linalg::complex_gaussian(&mut RandomSeed(2).rng(), 4, 4);
        let gram = g.adjoint() * &g;
        let corr = ComplexMatrix::from_fn(4, 4, |i, j| gram[(i, j)] / (gram[(i, i)].re * gram[(j, j)].re).sqrt());
        let ch = schur_channel(&corr).unwrap();
        let r = classify(&ch, 0.0);
        assert!(r.is_cp && r.is_tp && r.is_unital);
        let diag = ComplexMatrix::from_diagonal(&ComplexVector::from_fn(4, |i, _| c(i as f64 + 0.5, 0.0)));
        assert!((ch.apply(&diag).unwrap() - &diag).norm() < 1e-14);
        // entrywise product oracle
        let x = linalg::complex_gaussian(&mut RandomSeed(3).rng(), 4, 4);
        let expected = ComplexMatrix::from_fn(4, 4, |i, j| corr[(i, j)] * x[(i, j)]);
        assert!((ch.apply(&x).unwrap() - expected).norm() < 1e-14);

        let bad_diag = identity(2) * c(2.0, 0.0);
        assert!(schur_channel(&bad_diag).is_err());
        let not_psd = ComplexMatrix::from_row_slice(2, 2, &[c(1., 0.), c(2., 0.), c(2., 0.), c(1., 0.)]);
        assert!(schur_channel(&not_psd).is_err());
    }

    #[test]
    fn composition_multiplies_transfer_matrices() {
        for s in 0..20 {
            let e = random_cptp(2, 2, RandomSeed(s)).unwrap();
            let f = random_cptp(2, 3, RandomSeed(s + 50)).unwrap();
            let x = linalg::complex_gaussian(&mut RandomSeed(s + 99).rng(), 2, 2);
            let direct = f.apply(&e.apply(&x).unwrap()).unwrap();
            let composed = f.compose(&e).unwrap();
            assert!((composed.apply(&x).unwrap() - direct).norm() < 1e-12);
            assert!((composed.transfer() - f.transfer() * e.transfer()).norm() < 1e-14);
        }
    }

    #[test]
    fn unital_fixed_points_commute_with_kraus_operators() {
        // diagonal states are fixed by Schur channels; every Kraus operator must commute
        let g = linalg::complex_gaussian(&mut RandomSeed(12).rng(), 3, 3);
        let gram = g.adjoint() * &g;
        let corr = ComplexMatrix::from_fn(3, 3, |i, j| gram[(i, j)] / (gram[(i, i)].re * gram[(j, j)].re).sqrt());
        for ch in [schur_channel(&corr).unwrap(), full_dephasing(3)] {
            let state =
                ComplexMatrix::from_diagonal(&ComplexVector::from_vec(vec![c(0.5, 0.), c(0.3, 0.), c(0.2, 0.)]));
            assert!((ch.apply(&state).unwrap() - &state).norm() <= 1e-10);
            for k in ch.kraus(0.0).unwrap() {
                assert!(linalg::commutator(&k, &state).norm() <= 1e-8);
            }
        }
    }
}
