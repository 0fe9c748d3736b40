//! Dense complex linear algebra on finite-dimensional operator spaces.
//!
//! Matrices are `nalgebra::DMatrix<Complex64>`. Operators are vectorized by
//! column stacking, which coincides with nalgebra's column-major storage:
//! `vec(m)[i + j * rows] = m[(i, j)]`.

use nalgebra::{ComplexField, DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type ComplexMatrix = DMatrix<C64>;
pub type ComplexVector = DVector<C64>;

/// Relative factor of the default numerical-rank threshold.
pub const DEFAULT_RANK_EPS: f64 = 1e-12;

/// Explicit randomness source. Identical seeds give bit-identical samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RandomSeed(pub u64);

impl RandomSeed {
    pub fn rng(self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.0)
    }

    /// Independent child seed, e.g. one per trial of a batch.
    pub fn derive(self, index: u64) -> RandomSeed {
        // splitmix64 finalizer
        let mut z = self.0 ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        RandomSeed(z ^ (z >> 31))
    }
}

/// Subsystem dimensions `(|A|, |B|)` of a bipartite operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DimPair {
    pub dim_a: usize,
    pub dim_b: usize,
}

impl DimPair {
    pub fn new(dim_a: usize, dim_b: usize) -> Result<Self> {
        if dim_a == 0 || dim_b == 0 {
            return Err(Error::InvalidArgument(format!(
                "subsystem dimensions must be positive, got ({dim_a}, {dim_b})"
            )));
        }
        Ok(DimPair { dim_a, dim_b })
    }

    pub fn total(&self) -> usize {
        self.dim_a * self.dim_b
    }

    pub fn swapped(&self) -> DimPair {
        DimPair { dim_a: self.dim_b, dim_b: self.dim_a }
    }

    pub fn of(&self, side: Subsystem) -> usize {
        match side {
            Subsystem::A => self.dim_a,
            Subsystem::B => self.dim_b,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Subsystem {
    A,
    B,
}

impl Subsystem {
    pub fn other(self) -> Subsystem {
        match self {
            Subsystem::A => Subsystem::B,
            Subsystem::B => Subsystem::A,
        }
    }
}

impl std::fmt::Display for Subsystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Subsystem::A => f.write_str("A"),
            Subsystem::B => f.write_str("B"),
        }
    }
}

impl std::str::FromStr for Subsystem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "A" | "a" => Ok(Subsystem::A),
            "B" | "b" => Ok(Subsystem::B),
            _ => Err(Error::InvalidArgument(format!("unknown subsystem `{s}`"))),
        }
    }
}

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn identity(d: usize) -> ComplexMatrix {
    ComplexMatrix::identity(d, d)
}

/// `|i><j|` in dimension `d`.
pub fn unit(d: usize, i: usize, j: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(d, d);
    m[(i, j)] = C64::new(1.0, 0.0);
    m
}

/// Kronecker product; row index of the result is `i_a * rows(b) + i_b`.
pub fn tensor(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

/// Column-stacking vectorization.
pub fn vec(m: &ComplexMatrix) -> ComplexVector {
    ComplexVector::from_column_slice(m.as_slice())
}

pub fn unvec(v: &ComplexVector, rows: usize, cols: usize) -> ComplexMatrix {
    assert_eq!(v.len(), rows * cols, "unvec: length mismatch");
    ComplexMatrix::from_column_slice(rows, cols, v.as_slice())
}

/// Hilbert-Schmidt inner product `Tr[a† b]`.
pub fn hs_inner(a: &ComplexMatrix, b: &ComplexMatrix) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

pub fn commutator(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a * b - b * a
}

pub fn hermitian_part(m: &ComplexMatrix) -> ComplexMatrix {
    (m + m.adjoint()) * C64::new(0.5, 0.0)
}

/// `(m - m†) / 2i`, Hermitian, so that `m = H + i K`.
pub fn antihermitian_part(m: &ComplexMatrix) -> ComplexMatrix {
    (m - m.adjoint()) * C64::new(0.0, -0.5)
}

pub fn is_hermitian(m: &ComplexMatrix, tol: f64) -> bool {
    m.is_square() && (0..m.nrows()).all(|i| (0..m.ncols()).all(|j| (m[(i, j)] - m[(j, i)].conj()).norm() <= tol))
}

/// Largest distance from a scalar multiple of the identity, in Frobenius norm.
pub fn distance_from_scalar(m: &ComplexMatrix) -> f64 {
    let d = m.nrows();
    let shift = m.trace() / C64::new(d as f64, 0.0);
    (m - identity(d) * shift).norm()
}

fn check_bipartite(m: &ComplexMatrix, dims: DimPair) -> Result<()> {
    if m.nrows() != dims.total() || m.ncols() != dims.total() {
        return Err(Error::DimensionMismatch(format!(
            "expected {0}x{0} operator for dims ({1}, {2}), got {3}x{4}",
            dims.total(),
            dims.dim_a,
            dims.dim_b,
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(())
}

/// Traces out the subsystem `which`, returning the reduced operator on the other one.
pub fn partial_trace(m: &ComplexMatrix, dims: DimPair, which: Subsystem) -> Result<ComplexMatrix> {
    check_bipartite(m, dims)?;
    let (da, db) = (dims.dim_a, dims.dim_b);
    Ok(match which {
        Subsystem::A => ComplexMatrix::from_fn(db, db, |b, bp| (0..da).map(|a| m[(a * db + b, a * db + bp)]).sum()),
        Subsystem::B => ComplexMatrix::from_fn(da, da, |a, ap| (0..db).map(|b| m[(a * db + b, ap * db + b)]).sum()),
    })
}

/// Transposes the indices of the factor `which` in the computational basis.
pub fn partial_transpose(m: &ComplexMatrix, dims: DimPair, which: Subsystem) -> Result<ComplexMatrix> {
    check_bipartite(m, dims)?;
    let db = dims.dim_b;
    let n = dims.total();
    Ok(ComplexMatrix::from_fn(n, n, |r, col| {
        let (a, b) = (r / db, r % db);
        let (ap, bp) = (col / db, col % db);
        match which {
            Subsystem::A => m[(ap * db + b, a * db + bp)],
            Subsystem::B => m[(a * db + bp, ap * db + b)],
        }
    }))
}

/// The pair of singular values straddling the rank threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingularGap {
    /// Smallest singular value counted towards the rank.
    pub retained: Option<f64>,
    /// Largest singular value treated as zero.
    pub discarded: Option<f64>,
}

impl SingularGap {
    /// `retained / discarded`; infinite when nothing was discarded or the
    /// discarded value is exactly zero.
    pub fn ratio(&self) -> f64 {
        match (self.retained, self.discarded) {
            (Some(r), Some(d)) if d > 0.0 => r / d,
            (None, Some(_)) => 0.0,
            _ => f64::INFINITY,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RankDecomposition<T: ComplexField<RealField = f64>> {
    pub rank: usize,
    /// Orthonormal basis of the right null space.
    pub null_basis: Vec<DVector<T>>,
    /// Descending singular values.
    pub singular_values: Vec<f64>,
    pub tol: f64,
    pub gap: SingularGap,
}

impl<T: ComplexField<RealField = f64>> RankDecomposition<T> {
    pub fn nullity(&self) -> usize {
        self.null_basis.len()
    }
}

/// Default threshold `max(rows, cols) * sigma_max * 1e-12`.
pub fn default_tol(rows: usize, cols: usize, sigma_max: f64) -> f64 {
    rows.max(cols) as f64 * sigma_max * DEFAULT_RANK_EPS
}

struct SortedSvd<T: ComplexField<RealField = f64>> {
    u: DMatrix<T>,
    sigma: Vec<f64>,
    // rows are v_k^dagger
    v_t: DMatrix<T>,
}

fn sorted_svd<T: ComplexField<RealField = f64>>(m: &DMatrix<T>) -> SortedSvd<T> {
    let svd = m.clone().svd(true, true);
    let (u, v_t) = (svd.u.expect("u requested"), svd.v_t.expect("v_t requested"));
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let sigma = order.iter().map(|&i| svd.singular_values[i]).collect();
    let u = DMatrix::from_fn(u.nrows(), order.len(), |r, k| u[(r, order[k])].clone());
    let v_t = DMatrix::from_fn(order.len(), v_t.ncols(), |k, col| v_t[(order[k], col)].clone());
    SortedSvd { u, sigma, v_t }
}

fn resolve_tol(tol: f64, rows: usize, cols: usize, sigma: &[f64]) -> f64 {
    if tol > 0.0 {
        tol
    } else {
        default_tol(rows, cols, sigma.first().copied().unwrap_or(0.0))
    }
}

/// Numerical rank and orthonormal right null space. `tol = 0` selects
/// [`default_tol`].
pub fn rank_and_nullspace<T: ComplexField<RealField = f64>>(m: &DMatrix<T>, tol: f64) -> RankDecomposition<T> {
    assert!(tol >= 0.0, "tolerance must be nonnegative");
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return RankDecomposition {
            rank: 0,
            null_basis: (0..cols)
                .map(|k| DVector::from_fn(cols, |i, _| if i == k { T::one() } else { T::zero() }))
                .collect(),
            singular_values: vec![],
            tol,
            gap: SingularGap { retained: None, discarded: None },
        };
    }
    // Pad with zero rows so the SVD yields a full set of right singular vectors.
    let padded;
    let work = if rows < cols {
        padded = DMatrix::from_fn(cols, cols, |i, j| if i < rows { m[(i, j)].clone() } else { T::zero() });
        &padded
    } else {
        m
    };
    let svd = sorted_svd(work);
    let sigma: Vec<f64> = svd.sigma.iter().take(rows.min(cols)).copied().collect();
    let tol = resolve_tol(tol, rows, cols, &sigma);
    let rank = sigma.iter().filter(|&&s| s > tol).count();
    let null_basis = (rank..cols).map(|k| svd.v_t.row(k).adjoint()).collect();
    let gap = SingularGap {
        retained: rank.checked_sub(1).map(|k| sigma[k]),
        discarded: sigma.get(rank).copied().or(if rank < cols { Some(0.0) } else { None }),
    };
    RankDecomposition { rank, null_basis, singular_values: sigma, tol, gap }
}

/// Moore-Penrose pseudo-inverse with singular values `<= tol` dropped.
pub fn pseudo_inverse<T: ComplexField<RealField = f64>>(m: &DMatrix<T>, tol: f64) -> DMatrix<T> {
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return DMatrix::zeros(cols, rows);
    }
    let svd = sorted_svd(m);
    let tol = resolve_tol(tol, rows, cols, &svd.sigma);
    let mut out = DMatrix::zeros(cols, rows);
    for (k, &s) in svd.sigma.iter().enumerate() {
        if s <= tol {
            break;
        }
        let v = svd.v_t.row(k).adjoint();
        let u_dag = svd.u.column(k).adjoint();
        out += (v * u_dag) * T::from_real(1.0 / s);
    }
    out
}

/// Real eigenvalues (ascending) and orthonormal eigenvectors of a Hermitian matrix.
pub fn hermitian_eigen(m: &ComplexMatrix) -> (Vec<f64>, ComplexMatrix) {
    let h = hermitian_part(m);
    let n = h.nrows();
    let eig = h.symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = ComplexMatrix::from_fn(n, order.len(), |r, k| eig.eigenvectors[(r, order[k])]);
    (values, vectors)
}

pub fn min_eigenvalue(m: &ComplexMatrix) -> f64 {
    hermitian_eigen(m).0.first().copied().unwrap_or(0.0)
}

/// Applies `f` to the spectrum of a Hermitian matrix.
pub fn hermitian_function(m: &ComplexMatrix, f: impl Fn(f64) -> C64) -> ComplexMatrix {
    let (values, vectors) = hermitian_eigen(m);
    let d = m.nrows();
    let mut out = ComplexMatrix::zeros(d, d);
    for (k, &lam) in values.iter().enumerate() {
        let v = vectors.column(k);
        out += (v * v.adjoint()) * f(lam);
    }
    out
}

/// Principal square root of a PSD matrix; negative eigenvalues are clamped to zero.
pub fn psd_sqrt(m: &ComplexMatrix) -> ComplexMatrix {
    hermitian_function(m, |x| C64::new(x.max(0.0).sqrt(), 0.0))
}

/// Largest singular value.
pub fn operator_norm(m: &ComplexMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.singular_values().max()
}

/// Spectral norm of a Hermitian matrix.
pub fn hermitian_operator_norm(m: &ComplexMatrix) -> f64 {
    hermitian_eigen(m).0.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

pub(crate) fn complex_gaussian<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix {
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    ComplexMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re * scale, im * scale)
    })
}

pub(crate) fn haar_unitary_from<R: Rng>(rng: &mut R, d: usize) -> ComplexMatrix {
    let g = complex_gaussian(rng, d, d);
    let qr = g.qr();
    let (q, r) = (qr.q(), qr.r());
    let phases = ComplexMatrix::from_fn(d, d, |i, j| {
        if i != j {
            return C64::new(0.0, 0.0);
        }
        let rii = r[(i, i)];
        if rii.norm() > 0.0 {
            rii / rii.norm()
        } else {
            C64::new(1.0, 0.0)
        }
    });
    q * phases
}

/// Haar-random unitary via QR of a complex Ginibre matrix with phase correction.
pub fn haar_unitary(d: usize, seed: RandomSeed) -> ComplexMatrix {
    assert!(d >= 1, "dimension must be positive");
    haar_unitary_from(&mut seed.rng(), d)
}

/// Generalized Gell-Mann basis preceded by `1/sqrt(d)`.
///
/// Order: scaled identity, then for each pair `j < k` the symmetric and
/// antisymmetric elements, then the `d - 1` diagonal elements. Every element
/// is Hermitian and the set is orthonormal under `Tr[a† b]`.
pub fn hermitian_basis(d: usize) -> Vec<ComplexMatrix> {
    assert!(d >= 1, "dimension must be positive");
    let mut basis = Vec::with_capacity(d * d);
    basis.push(identity(d) * C64::new(1.0 / (d as f64).sqrt(), 0.0));
    let s = std::f64::consts::FRAC_1_SQRT_2;
    for j in 0..d {
        for k in (j + 1)..d {
            let mut sym = ComplexMatrix::zeros(d, d);
            sym[(j, k)] = C64::new(s, 0.0);
            sym[(k, j)] = C64::new(s, 0.0);
            basis.push(sym);
            let mut asym = ComplexMatrix::zeros(d, d);
            asym[(j, k)] = C64::new(0.0, -s);
            asym[(k, j)] = C64::new(0.0, s);
            basis.push(asym);
        }
    }
    for l in 1..d {
        let norm = 1.0 / ((l * (l + 1)) as f64).sqrt();
        let mut diag = ComplexMatrix::zeros(d, d);
        for m in 0..l {
            diag[(m, m)] = C64::new(norm, 0.0);
        }
        diag[(l, l)] = C64::new(-(l as f64) * norm, 0.0);
        basis.push(diag);
    }
    basis
}

/// Real coordinates of a Hermitian operator in [`hermitian_basis`].
pub fn hermitian_coordinates(h: &ComplexMatrix, basis: &[ComplexMatrix]) -> DVector<f64> {
    DVector::from_iterator(basis.len(), basis.iter().map(|b| hs_inner(b, h).re))
}

pub fn from_hermitian_coordinates(x: &DVector<f64>, basis: &[ComplexMatrix]) -> ComplexMatrix {
    let d = basis[0].nrows();
    basis.iter().zip(x.iter()).fold(ComplexMatrix::zeros(d, d), |acc, (b, &w)| acc + b * C64::new(w, 0.0))
}

pub(crate) fn random_density_from<R: Rng>(rng: &mut R, d: usize, rank: usize) -> ComplexMatrix {
    let g = complex_gaussian(rng, d, rank);
    let w = &g * g.adjoint();
    let tr = w.trace();
    let mut rho = w / tr;
    // exact Hermiticity
    rho = hermitian_part(&rho);
    rho
}

/// Wishart-style random density matrix `G G† / Tr` with `G` of shape `d x rank`.
pub fn random_density(d: usize, rank: usize, seed: RandomSeed) -> Result<ComplexMatrix> {
    if d == 0 || rank == 0 || rank > d {
        return Err(Error::InvalidArgument(format!("rank must satisfy 1 <= rank <= d, got rank {rank} for d {d}")));
    }
    Ok(random_density_from(&mut seed.rng(), d, rank))
}
