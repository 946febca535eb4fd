//! Dense Hermitian operators, eigenvalue spectra and truncation convergence.

use ndarray::{s, Array1, Array2, Axis, ShapeBuilder};
use ndarray_linalg::{Eigh, EigValsh, SVD, UPLO};
use num_complex::Complex64;
use num_traits::Zero;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Absolute Hermiticity tolerance applied by [`HermitianOperator::new`].
pub const HERMITICITY_TOL: f64 = 1e-13;

#[derive(Clone, Debug)]
enum Storage {
    Real(Array2<f64>),
    Complex(Array2<C64>),
}

/// Dense Hermitian matrix.
///
/// Real symmetric matrices are stored without an imaginary part and are
/// diagonalized with the real symmetric LAPACK driver.
#[derive(Clone, Debug)]
pub struct HermitianOperator {
    data: Storage,
}

fn real_residual(m: &Array2<f64>) -> f64 {
    let n = m.nrows();
    let mut r = 0.0f64;
    for i in 0..n {
        for j in 0..i {
            r = r.max((m[[i, j]] - m[[j, i]]).abs());
        }
    }
    r
}

fn complex_residual(m: &Array2<C64>) -> f64 {
    let n = m.nrows();
    let mut r = 0.0f64;
    for i in 0..n {
        for j in 0..=i {
            r = r.max((m[[i, j]] - m[[j, i]].conj()).norm());
        }
    }
    r
}

fn check_square(rows: usize, cols: usize) -> Result<()> {
    if rows == 0 || rows != cols {
        return Err(Error::Shape(format!("expected a non-empty square matrix, got {rows}x{cols}")));
    }
    Ok(())
}

impl HermitianOperator {
    /// Validates Hermiticity to [`HERMITICITY_TOL`] and stores the exactly
    /// symmetrized matrix. Purely real input takes the real fast path.
    pub fn new(m: Array2<C64>) -> Result<Self> {
        check_square(m.nrows(), m.ncols())?;
        let r = complex_residual(&m);
        if r > HERMITICITY_TOL {
            return Err(Error::NotHermitian(r));
        }
        Ok(Self::from_complex_unchecked(m))
    }

    pub fn from_real(m: Array2<f64>) -> Result<Self> {
        check_square(m.nrows(), m.ncols())?;
        let r = real_residual(&m);
        if r > HERMITICITY_TOL {
            return Err(Error::NotHermitian(r));
        }
        Ok(Self { data: Storage::Real(symmetrize_real(m)) })
    }

    /// Builds `(m + m†)/2`. Used by model builders whose construction is
    /// Hermitian only up to rounding.
    pub fn symmetrized(m: Array2<C64>) -> Result<Self> {
        check_square(m.nrows(), m.ncols())?;
        Ok(Self::from_complex_unchecked(m))
    }

    pub fn symmetrized_real(m: Array2<f64>) -> Result<Self> {
        check_square(m.nrows(), m.ncols())?;
        Ok(Self { data: Storage::Real(symmetrize_real(m)) })
    }

    fn from_complex_unchecked(m: Array2<C64>) -> Self {
        if m.iter().all(|z| z.im == 0.0) {
            return Self { data: Storage::Real(symmetrize_real(m.mapv(|z| z.re))) };
        }
        let n = m.nrows();
        let mut h = m;
        for i in 0..n {
            h[[i, i]] = C64::new(h[[i, i]].re, 0.0);
            for j in 0..i {
                let v = (h[[i, j]] + h[[j, i]].conj()) * 0.5;
                h[[i, j]] = v;
                h[[j, i]] = v.conj();
            }
        }
        Self { data: Storage::Complex(h) }
    }

    pub fn identity(dim: usize) -> Self {
        Self { data: Storage::Real(Array2::eye(dim)) }
    }

    pub fn diagonal(values: &[f64]) -> Result<Self> {
        check_square(values.len(), values.len())?;
        Ok(Self { data: Storage::Real(Array2::from_diag(&Array1::from(values.to_vec()))) })
    }

    pub fn dim(&self) -> usize {
        match &self.data {
            Storage::Real(m) => m.nrows(),
            Storage::Complex(m) => m.nrows(),
        }
    }

    pub fn is_real(&self) -> bool {
        matches!(self.data, Storage::Real(_))
    }

    pub fn entry(&self, i: usize, j: usize) -> C64 {
        match &self.data {
            Storage::Real(m) => C64::new(m[[i, j]], 0.0),
            Storage::Complex(m) => m[[i, j]],
        }
    }

    pub fn to_complex(&self) -> Array2<C64> {
        match &self.data {
            Storage::Real(m) => m.mapv(|x| C64::new(x, 0.0)),
            Storage::Complex(m) => m.clone(),
        }
    }

    /// Real matrix if the operator is real symmetric.
    pub fn as_real(&self) -> Option<&Array2<f64>> {
        match &self.data {
            Storage::Real(m) => Some(m),
            Storage::Complex(_) => None,
        }
    }

    /// Largest `|A_ij − conj(A_ji)|`.
    pub fn hermiticity_residual(&self) -> f64 {
        match &self.data {
            Storage::Real(m) => real_residual(m),
            Storage::Complex(m) => complex_residual(m),
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        match &self.data {
            Storage::Real(m) => Self { data: Storage::Real(m * c) },
            Storage::Complex(m) => Self { data: Storage::Complex(m.mapv(|z| z * c)) },
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::Shape(format!("dimension mismatch {} vs {}", self.dim(), other.dim())));
        }
        Ok(match (&self.data, &other.data) {
            (Storage::Real(a), Storage::Real(b)) => Self { data: Storage::Real(a + b) },
            _ => Self { data: Storage::Complex(self.to_complex() + other.to_complex()) },
        })
    }

    /// Conjugation `U A U†` by a unitary matrix.
    pub fn conjugated(&self, u: &Array2<C64>) -> Result<Self> {
        let a = self.to_complex();
        let ud = u.t().mapv(|z| z.conj());
        Self::symmetrized(u.dot(&a).dot(&ud))
    }

    /// Restriction to a list of basis indices.
    pub fn restricted(&self, idx: &[usize]) -> Result<Self> {
        check_square(idx.len(), idx.len())?;
        Ok(match &self.data {
            Storage::Real(m) => {
                Self { data: Storage::Real(m.select(Axis(0), idx).select(Axis(1), idx)) }
            }
            Storage::Complex(m) => {
                Self { data: Storage::Complex(m.select(Axis(0), idx).select(Axis(1), idx)) }
            }
        })
    }
}

fn symmetrize_real(mut m: Array2<f64>) -> Array2<f64> {
    let n = m.nrows();
    for i in 0..n {
        for j in 0..i {
            let v = 0.5 * (m[[i, j]] + m[[j, i]]);
            m[[i, j]] = v;
            m[[j, i]] = v;
        }
    }
    m
}

/// Truncation descriptor attached to a spectrum.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct BasisMeta {
    pub dim: usize,
    pub size: usize,
    pub label: String,
}

#[derive(Clone, Debug)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    pub basis_meta: BasisMeta,
    /// Absolute drift of each eigenvalue between the last two truncation
    /// sizes. Zero-filled for a single diagonalization.
    pub convergence_estimate: Vec<f64>,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn max_drift(&self) -> f64 {
        self.convergence_estimate.iter().cloned().fold(0.0, f64::max)
    }
}

fn check_count(h: &HermitianOperator, count: usize) -> Result<()> {
    if count == 0 || count > h.dim() {
        return Err(Error::Count { count, dim: h.dim() });
    }
    Ok(())
}

fn lapack<E: std::fmt::Display>(e: E) -> Error {
    Error::Lapack(e.to_string())
}

/// The `count` lowest eigenvalues in ascending order.
pub fn eigh(h: &HermitianOperator, count: usize) -> Result<Spectrum> {
    check_count(h, count)?;
    let mut vals = match &h.data {
        Storage::Real(m) => m.eigvalsh(UPLO::Lower).map_err(lapack)?.to_vec(),
        Storage::Complex(m) => m.eigvalsh(UPLO::Lower).map_err(lapack)?.to_vec(),
    };
    vals.sort_by(|a, b| a.total_cmp(b));
    vals.truncate(count);
    Ok(Spectrum {
        convergence_estimate: vec![0.0; count],
        eigenvalues: vals,
        basis_meta: BasisMeta { dim: h.dim(), size: h.dim(), label: String::new() },
    })
}

/// Lowest `count` eigenpairs; eigenvectors are the columns of the matrix.
pub fn eigh_pairs(h: &HermitianOperator, count: usize) -> Result<(Spectrum, Array2<C64>)> {
    check_count(h, count)?;
    let (vals, vecs) = match &h.data {
        Storage::Real(m) => {
            let (v, w) = m.eigh(UPLO::Lower).map_err(lapack)?;
            (v, w.mapv(|x| C64::new(x, 0.0)))
        }
        Storage::Complex(m) => {
            // column-major copy, otherwise the eigenvectors come back conjugated
            let mut f = Array2::zeros(m.dim().f());
            f.assign(m);
            f.eigh(UPLO::Lower).map_err(lapack)?
        }
    };
    let spec = Spectrum {
        eigenvalues: vals.slice(s![..count]).to_vec(),
        convergence_estimate: vec![0.0; count],
        basis_meta: BasisMeta { dim: h.dim(), size: h.dim(), label: String::new() },
    };
    Ok((spec, vecs.slice(s![.., ..count]).to_owned()))
}

/// Growth schedule for [`converge_spectrum`].
#[derive(Clone, Debug)]
pub struct ConvergenceConfig {
    pub start: usize,
    pub growth: f64,
    pub abs_tol: f64,
    pub max_size: usize,
}

impl ConvergenceConfig {
    pub fn new(start: usize, abs_tol: f64, max_size: usize) -> Self {
        Self { start, growth: 1.5, abs_tol, max_size }
    }

    pub fn with_growth(mut self, growth: f64) -> Self {
        self.growth = growth;
        self
    }
}

fn next_size(cur: usize, growth: f64) -> usize {
    ((cur as f64 * growth).ceil() as usize).max(cur + 1)
}

/// Grows the truncation geometrically until the lowest `count` eigenvalues
/// move less than `abs_tol` between successive sizes.
pub fn converge_spectrum<F>(builder: F, count: usize, cfg: &ConvergenceConfig) -> Result<Spectrum>
where
    F: Fn(usize) -> Result<HermitianOperator>,
{
    converge_levels(
        |size| {
            let h = builder(size)?;
            if h.dim() < count {
                return Ok((Vec::new(), h.dim()));
            }
            Ok((eigh(&h, count)?.eigenvalues, h.dim()))
        },
        count,
        cfg,
    )
}

/// [`converge_spectrum`] for callers that diagonalize on their own (for
/// example block by block). `levels(size)` returns the ascending lowest
/// levels and the basis dimension; fewer than `count` levels means the
/// basis is still too small.
pub fn converge_levels<F>(levels: F, count: usize, cfg: &ConvergenceConfig) -> Result<Spectrum>
where
    F: Fn(usize) -> Result<(Vec<f64>, usize)>,
{
    if !(cfg.abs_tol > 0.0) || !(cfg.growth > 1.0) || cfg.start == 0 {
        return Err(Error::Invalid("convergence config needs abs_tol > 0, growth > 1, start >= 1".into()));
    }
    if count == 0 {
        return Err(Error::Count { count, dim: 0 });
    }
    let mut size = cfg.start;
    let mut prev: Option<Vec<f64>> = None;
    let mut last_drift = Vec::new();
    while size <= cfg.max_size {
        let (mut ev, dim) = levels(size)?;
        if ev.len() < count {
            size = next_size(size, cfg.growth);
            continue;
        }
        ev.truncate(count);
        if let Some(p) = &prev {
            let drift: Vec<f64> = ev.iter().zip(p).map(|(a, b)| (a - b).abs()).collect();
            if drift.iter().all(|d| *d < cfg.abs_tol) {
                return Ok(Spectrum {
                    eigenvalues: ev,
                    convergence_estimate: drift,
                    basis_meta: BasisMeta { dim, size, label: String::new() },
                });
            }
            last_drift = drift;
        }
        prev = Some(ev);
        if size == cfg.max_size {
            break;
        }
        size = next_size(size, cfg.growth).min(cfg.max_size);
    }
    Err(Error::NotConverged { size: cfg.max_size, drift: last_drift, eigenvalues: prev.unwrap_or_default() })
}

#[derive(Clone, Debug, PartialEq)]
pub struct DegeneracyPair {
    pub index_even: usize,
    pub index_odd: usize,
    pub splitting: f64,
}

#[derive(Clone, Debug)]
pub struct DegeneracyReport {
    pub pairs: Vec<DegeneracyPair>,
    pub max_splitting: f64,
    pub tolerance_used: f64,
    /// Index of a trailing eigenvalue left without a partner.
    pub unpaired: Option<usize>,
}

impl DegeneracyReport {
    /// True when every pair is within tolerance and nothing is left over.
    pub fn all_paired(&self) -> bool {
        self.unpaired.is_none() && self.max_splitting <= self.tolerance_used
    }

    pub fn flagged(&self) -> Vec<usize> {
        self.pairs
            .iter()
            .enumerate()
            .filter(|(_, p)| p.splitting > self.tolerance_used)
            .map(|(i, _)| i)
            .collect()
    }
}

/// Pairs eigenvalues (0,1), (2,3), ... of a sorted spectrum.
pub fn pair_degeneracies(s: &Spectrum, tol: f64) -> Result<DegeneracyReport> {
    let ev = &s.eigenvalues;
    if ev.len() < 2 {
        return Err(Error::Invalid("pairing needs at least two eigenvalues".into()));
    }
    let pairs: Vec<DegeneracyPair> = (0..ev.len() / 2)
        .map(|k| DegeneracyPair {
            index_even: 2 * k,
            index_odd: 2 * k + 1,
            splitting: (ev[2 * k + 1] - ev[2 * k]).max(0.0),
        })
        .collect();
    let max_splitting = pairs.iter().map(|p| p.splitting).fold(0.0, f64::max);
    Ok(DegeneracyReport {
        pairs,
        max_splitting,
        tolerance_used: tol,
        unpaired: if ev.len() % 2 == 1 { Some(ev.len() - 1) } else { None },
    })
}

/// Spectral norm of an arbitrary complex matrix.
pub fn spectral_norm(m: &Array2<C64>) -> f64 {
    let fro = m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if fro == 0.0 {
        return 0.0;
    }
    match m.svd(false, false) {
        Ok((_, sv, _)) => sv.iter().cloned().fold(0.0, f64::max),
        Err(_) => fro,
    }
}

/// Tensor product with row-major composite index `i*dim(b) + j`.
pub fn kron<T>(a: &Array2<T>, b: &Array2<T>) -> Array2<T>
where
    T: Copy + std::ops::Mul<Output = T> + Zero,
{
    let (ar, ac) = a.dim();
    let (br, bc) = b.dim();
    let mut out = Array2::<T>::zeros((ar * br, ac * bc));
    for i in 0..ar {
        for j in 0..ac {
            let x = a[[i, j]];
            if x.is_zero() {
                continue;
            }
            let mut blk = out.slice_mut(s![i * br..(i + 1) * br, j * bc..(j + 1) * bc]);
            blk.zip_mut_with(b, |o, y| *o = x * *y);
        }
    }
    out
}

/// Checks the linked BLAS against a direct sum on an `n × n` product and an
/// eigendecomposition residual. Returns the larger relative error.
pub fn blas_self_test(n: usize) -> f64 {
    let a = Array2::from_shape_fn((n, n), |(i, j)| ((i * 7 + j * 13) % 17) as f64 / 17.0 - 0.5);
    let b = Array2::from_shape_fn((n, n), |(i, j)| ((i * 3 + j * 5) % 11) as f64 / 11.0 - 0.5);
    let c = a.dot(&b);
    let mut err = 0.0f64;
    for i in (0..n).step_by(7) {
        for j in (0..n).step_by(5) {
            let s: f64 = (0..n).map(|k| a[[i, k]] * b[[k, j]]).sum();
            err = err.max((s - c[[i, j]]).abs() / n as f64);
        }
    }
    let h = &a + &a.t();
    match h.eigh(UPLO::Lower) {
        Ok((w, v)) => {
            for k in (0..n).step_by(11) {
                let col = v.column(k);
                let r = h.dot(&col) - &col * w[k];
                let scale = w.iter().fold(1.0f64, |m, x| m.max(x.abs()));
                err = err.max(r.iter().fold(0.0f64, |m, x| m.max(x.abs())) / scale);
            }
        }
        Err(_) => err = f64::INFINITY,
    }
    err
}

extern "C" {
    fn openblas_set_num_threads(n: std::os::raw::c_int);
}

/// Caps the threads OpenBLAS uses inside a single call.
pub fn set_blas_threads(n: usize) {
    // SAFETY: plain setter exported by the linked OpenBLAS.
    unsafe { openblas_set_num_threads(n.max(1) as std::os::raw::c_int) }
}
