//! Dense complex linear algebra.
//!
//! Everything here works on [`ComplexMatrix`], a row-major buffer of
//! [`C64`] entries. Dimensions are small (tens at most), so every routine is a
//! plain O(d^3) dense algorithm.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Maximum tolerated `|A - A^dag|` entry for inputs that must be Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-9;

/// Default clamp for tiny negative eigenvalues in [`mat_sqrt_psd`].
pub const DEFAULT_CLAMP_TOL: f64 = 1e-9;

/// Jacobi sweeps stop once every off-diagonal magnitude is below this
/// (scaled by `max(1, max |A_ij|)`).
pub const JACOBI_OFFDIAG_TOL: f64 = 1e-12;

const JACOBI_MAX_SWEEPS: usize = 100;

/// Eigenvalues within this fraction of the spectral radius are rounding noise
/// and are treated as exact zeros by [`mat_sqrt_psd`].
pub const SQRT_NOISE_FLOOR: f64 = 1e-14;

/// Candidates with residual norm below this are skipped when completing an
/// isometry.
pub const COMPLETION_SKIP_TOL: f64 = 1e-8;

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Dense complex matrix stored row-major.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    /// Builds a matrix from row-major entries, rejecting wrong lengths and
    /// non-finite values.
    pub fn new(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::BadShape {
                expected: rows * cols,
                found: data.len(),
            });
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![C64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = re(1.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_real_diag(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = re(d);
        }
        m
    }

    /// Builds a square or rectangular matrix from nested rows of real entries.
    /// Panics on ragged input; meant for literals in code and tests.
    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let r = rows.len();
        let cols = rows.first().map_or(0, |row| row.len());
        assert!(rows.iter().all(|row| row.len() == cols), "ragged rows");
        Self::from_fn(r, cols, |i, j| re(rows[i][j]))
    }

    /// `|u><v|`.
    pub fn outer(u: &[C64], v: &[C64]) -> Self {
        Self::from_fn(u.len(), v.len(), |i, j| u[i] * v[j].conj())
    }

    /// Column vector from a slice.
    pub fn column_vector(v: &[C64]) -> Self {
        Self {
            rows: v.len(),
            cols: 1,
            data: v.to_vec(),
        }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn set_column(&mut self, j: usize, v: &[C64]) {
        assert_eq!(v.len(), self.rows);
        for (i, &z) in v.iter().enumerate() {
            self[(i, j)] = z;
        }
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn conj(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(re(s))
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entry-wise difference magnitude. Panics on shape mismatch.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `max |A - A^dag|` entry; infinite for non-square input.
    pub fn hermitian_asymmetry(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let n = self.rows;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// `(A + A^dag) / 2`.
    pub fn hermitized(&self) -> Self {
        assert!(self.is_square());
        Self::from_fn(self.rows, self.cols, |i, j| {
            (self[(i, j)] + self[(j, i)].conj()) * 0.5
        })
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| {
                let row = &self.data[i * self.cols..(i + 1) * self.cols];
                row.iter().zip(v).map(|(a, b)| a * b).sum()
            })
            .collect()
    }

    /// `A X A^dag`.
    pub fn sandwich(&self, x: &Self) -> Self {
        &(self * x) * &self.adjoint()
    }

    fn zip_with(&self, other: &Self, f: impl Fn(C64, C64) -> C64) -> Self {
        assert_eq!(
            (self.rows, self.cols),
            (other.rows, other.cols),
            "shape mismatch"
        );
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, "{:+.6}{:+.6}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.cols, rhs.rows, "inner dimension mismatch");
        let mut out = ComplexMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                let rhs_row = &rhs.data[k * rhs.cols..(k + 1) * rhs.cols];
                let out_row = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
                for (o, b) in out_row.iter_mut().zip(rhs_row) {
                    *o += a * b;
                }
            }
        }
        out
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn neg(self) -> ComplexMatrix {
        self.scale_real(-1.0)
    }
}

/// Eigensystem of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Column `i` is the eigenvector of `eigenvalues[i]`.
    pub eigenvectors: ComplexMatrix,
}

impl HermitianEigen {
    /// `V diag(f(lambda)) V^dag`.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let v = &self.eigenvectors;
        let n = v.rows();
        let mapped: Vec<f64> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        ComplexMatrix::from_fn(n, n, |i, j| {
            (0..n)
                .map(|k| v[(i, k)] * mapped[k] * v[(j, k)].conj())
                .sum()
        })
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.map_spectrum(|l| l)
    }

    pub fn eigenvector(&self, k: usize) -> Vec<C64> {
        self.eigenvectors.column(k)
    }
}

fn require_square(a: &ComplexMatrix) -> Result<()> {
    if a.is_square() {
        Ok(())
    } else {
        Err(Error::NotSquare(a.rows(), a.cols()))
    }
}

fn require_hermitian(a: &ComplexMatrix) -> Result<()> {
    require_square(a)?;
    let asym = a.hermitian_asymmetry();
    if asym > HERMITIAN_TOL {
        return Err(Error::NotHermitian(asym));
    }
    Ok(())
}

/// Full eigensystem of a Hermitian matrix by cyclic complex Jacobi rotations.
///
/// Each rotation first removes the phase of `A_pq` with a diagonal unitary and
/// then applies the real symmetric Jacobi rotation, so every step is a unitary
/// similarity and the accumulated eigenvector matrix stays unitary.
pub fn herm_eig(a: &ComplexMatrix) -> Result<HermitianEigen> {
    require_hermitian(a)?;
    let n = a.rows();
    let mut m = a.hermitized();
    let mut v = ComplexMatrix::identity(n);
    let threshold = JACOBI_OFFDIAG_TOL * a.max_abs().max(1.0);

    let off_diag = |m: &ComplexMatrix| {
        let mut worst = 0.0f64;
        for p in 0..n {
            for q in p + 1..n {
                worst = worst.max(m[(p, q)].norm());
            }
        }
        worst
    };

    let mut converged = off_diag(&m) < threshold;
    let mut sweeps = 0;
    while !converged {
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(Error::NoConvergence(sweeps));
        }
        for p in 0..n {
            for q in p + 1..n {
                jacobi_rotate(&mut m, &mut v, p, q);
            }
        }
        sweeps += 1;
        converged = off_diag(&m) < threshold;
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].re.total_cmp(&m[(j, j)].re));
    let eigenvalues = order.iter().map(|&i| m[(i, i)].re).collect();
    let eigenvectors = ComplexMatrix::from_fn(n, n, |i, k| v[(i, order[k])]);
    Ok(HermitianEigen {
        eigenvalues,
        eigenvectors,
    })
}

fn jacobi_rotate(m: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let apq = m[(p, q)];
    let mag = apq.norm();
    if mag < 1e-300 {
        return;
    }
    let phase_conj = (apq / mag).conj();
    let tau = (m[(q, q)].re - m[(p, p)].re) / (2.0 * mag);
    let t = if tau.abs() > 1e150 {
        0.5 / tau
    } else {
        let sign = if tau >= 0.0 { 1.0 } else { -1.0 };
        sign / (tau.abs() + (1.0 + tau * tau).sqrt())
    };
    let cs = 1.0 / (1.0 + t * t).sqrt();
    let sn = t * cs;

    // W restricted to the (p, q) plane.
    let w_pp = re(cs);
    let w_pq = re(sn);
    let w_qp = phase_conj * (-sn);
    let w_qq = phase_conj * cs;

    let n = m.rows();
    for k in 0..n {
        let mkp = m[(k, p)];
        let mkq = m[(k, q)];
        m[(k, p)] = mkp * w_pp + mkq * w_qp;
        m[(k, q)] = mkp * w_pq + mkq * w_qq;

        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * w_pp + vkq * w_qp;
        v[(k, q)] = vkp * w_pq + vkq * w_qq;
    }
    for k in 0..n {
        let mpk = m[(p, k)];
        let mqk = m[(q, k)];
        m[(p, k)] = w_pp.conj() * mpk + w_qp.conj() * mqk;
        m[(q, k)] = w_pq.conj() * mpk + w_qq.conj() * mqk;
    }
    m[(p, q)] = re(0.0);
    m[(q, p)] = re(0.0);
    m[(p, p)] = re(m[(p, p)].re);
    m[(q, q)] = re(m[(q, q)].re);
}

/// Square root of a Hermitian PSD matrix, `V diag(sqrt(max(lambda, 0))) V^dag`.
///
/// Eigenvalues in `[-clamp_tol, 0)` are clamped to zero; anything more
/// negative is rejected. Eigenvalues below `SQRT_NOISE_FLOOR` times the
/// spectral radius are also zeroed, since the square root would otherwise
/// amplify rounding noise of order 1e-16 into 1e-8.
pub fn mat_sqrt_psd(a: &ComplexMatrix, clamp_tol: f64) -> Result<ComplexMatrix> {
    let eig = herm_eig(a)?;
    if let Some(&lowest) = eig.eigenvalues.first() {
        if lowest < -clamp_tol {
            return Err(Error::NegativeEigenvalue(lowest));
        }
    }
    let floor = SQRT_NOISE_FLOOR * spectral_radius(&eig.eigenvalues);
    Ok(eig.map_spectrum(|l| if l <= floor { 0.0 } else { l.sqrt() }))
}

/// Sum of square roots of the (clamped) eigenvalues of a Hermitian PSD
/// matrix, i.e. `Tr sqrt(A)`, with the same clamping as [`mat_sqrt_psd`].
pub fn trace_sqrt_psd(a: &ComplexMatrix, clamp_tol: f64) -> Result<f64> {
    let eig = herm_eig(a)?;
    if let Some(&lowest) = eig.eigenvalues.first() {
        if lowest < -clamp_tol {
            return Err(Error::NegativeEigenvalue(lowest));
        }
    }
    let floor = SQRT_NOISE_FLOOR * spectral_radius(&eig.eigenvalues);
    Ok(eig
        .eigenvalues
        .iter()
        .filter(|&&l| l > floor)
        .map(|l| l.sqrt())
        .sum())
}

fn spectral_radius(eigenvalues: &[f64]) -> f64 {
    eigenvalues.iter().map(|l| l.abs()).fold(0.0, f64::max)
}

/// `Tr|A|` for Hermitian `A`: the sum of absolute eigenvalues.
pub fn trace_norm(a: &ComplexMatrix) -> Result<f64> {
    let eig = herm_eig(a)?;
    Ok(eig.eigenvalues.iter().map(|l| l.abs()).sum())
}

/// Singular values in descending order, via the eigenvalues of `A^dag A`.
pub fn singular_values(a: &ComplexMatrix) -> Result<Vec<f64>> {
    let gram = (&a.adjoint() * a).hermitized();
    let eig = herm_eig(&gram)?;
    Ok(eig
        .eigenvalues
        .iter()
        .rev()
        .map(|&l| l.max(0.0).sqrt())
        .collect())
}

/// Kronecker product; `kron(A, B)[(i*p + k, j*q + l)] = A[i,j] B[k,l]`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (p, q) = (b.rows(), b.cols());
    ComplexMatrix::from_fn(a.rows() * p, a.cols() * q, |r, s| {
        a[(r / p, s / q)] * b[(r % p, s % q)]
    })
}

/// Which tensor factor survives a partial trace.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Subsystem {
    System,
    Ancilla,
}

/// Partial trace of an operator on `system (x) ancilla`.
pub fn partial_trace(
    m: &ComplexMatrix,
    dim_sys: usize,
    dim_anc: usize,
    keep: Subsystem,
) -> Result<ComplexMatrix> {
    let total = dim_sys * dim_anc;
    if m.rows() != total || m.cols() != total {
        return Err(Error::DimensionMismatch {
            expected: total,
            found: m.rows().max(m.cols()),
        });
    }
    Ok(match keep {
        Subsystem::System => ComplexMatrix::from_fn(dim_sys, dim_sys, |i, j| {
            (0..dim_anc)
                .map(|a| m[(i * dim_anc + a, j * dim_anc + a)])
                .sum()
        }),
        Subsystem::Ancilla => ComplexMatrix::from_fn(dim_anc, dim_anc, |a, b| {
            (0..dim_sys)
                .map(|i| m[(i * dim_anc + a, i * dim_anc + b)])
                .sum()
        }),
    })
}

/// Conjugate-linear inner product `<u|v>`.
pub fn inner(u: &[C64], v: &[C64]) -> C64 {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

pub fn vec_norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Removes the components of `v` along each (orthonormal) basis vector, twice
/// for numerical stability.
fn project_out(v: &mut [C64], basis: &[Vec<C64>]) {
    for _ in 0..2 {
        for b in basis {
            let overlap = inner(b, v);
            for (x, bx) in v.iter_mut().zip(b) {
                *x -= overlap * bx;
            }
        }
    }
}

/// Orthonormalises the columns of `a` in order (modified Gram-Schmidt with
/// re-orthogonalisation). Returns `None` if a column is numerically dependent
/// on the earlier ones.
pub fn orthonormalize_columns(a: &ComplexMatrix) -> Option<ComplexMatrix> {
    let mut accepted: Vec<Vec<C64>> = Vec::with_capacity(a.cols());
    for j in 0..a.cols() {
        let mut v = a.column(j);
        let before = vec_norm(&v);
        project_out(&mut v, &accepted);
        let norm = vec_norm(&v);
        if norm <= 1e-12 * before.max(f64::MIN_POSITIVE) {
            return None;
        }
        v.iter_mut().for_each(|x| *x /= norm);
        accepted.push(v);
    }
    let mut out = ComplexMatrix::zeros(a.rows(), a.cols());
    for (j, col) in accepted.iter().enumerate() {
        out.set_column(j, col);
    }
    Some(out)
}

/// `max |V^dag V - I|` entry.
pub fn isometry_defect(v: &ComplexMatrix) -> f64 {
    let gram = &v.adjoint() * v;
    gram.max_abs_diff(&ComplexMatrix::identity(v.cols()))
}

/// Extends a matrix with orthonormal columns to a square unitary.
///
/// The first columns of the result are exactly the input columns; the rest
/// come from the standard basis, Gram-Schmidt orthogonalised against the
/// columns accepted so far, skipping near-dependent candidates.
pub fn complete_isometry(v: &ComplexMatrix) -> Result<ComplexMatrix> {
    let (n, k) = (v.rows(), v.cols());
    let defect = isometry_defect(v);
    if k > n || defect > 1e-9 {
        return Err(Error::ColumnsNotOrthonormal(defect));
    }
    let mut columns: Vec<Vec<C64>> = (0..k).map(|j| v.column(j)).collect();
    for i in 0..n {
        if columns.len() == n {
            break;
        }
        let mut cand = vec![re(0.0); n];
        cand[i] = re(1.0);
        project_out(&mut cand, &columns);
        let norm = vec_norm(&cand);
        if norm < COMPLETION_SKIP_TOL {
            continue;
        }
        cand.iter_mut().for_each(|x| *x /= norm);
        columns.push(cand);
    }
    let mut u = ComplexMatrix::zeros(n, n);
    for (j, col) in columns.iter().enumerate() {
        u.set_column(j, col);
    }
    Ok(u)
}
