//! Quantum states, the fidelity and trace-distance metrics, and seeded random
//! ensembles.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use std::f64::consts::FRAC_1_SQRT_2;

use crate::error::{Error, Result};
use crate::matcore::{
    self, inner, mat_sqrt_psd, orthonormalize_columns, re, trace_norm, trace_sqrt_psd, vec_norm,
    ComplexMatrix, C64, DEFAULT_CLAMP_TOL,
};

/// Tolerance used by the checked [`DensityMatrix`] constructor.
pub const STATE_TOL: f64 = 1e-9;

/// Norm tolerance for [`PureState::new`].
pub const PURE_NORM_TOL: f64 = 1e-12;

/// The generator used for every random ensemble in the crate.
pub type StdRng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> StdRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Mixes `(seed, stream, index)` into an independent per-trial seed
/// (SplitMix64 finaliser), so trial `i` of a suite does not depend on how many
/// trials ran before it or on which thread runs it.
pub fn derive_seed(seed: u64, stream: u64, index: u64) -> u64 {
    let mut z = seed
        ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ index.wrapping_mul(0xD1B5_4A32_D192_ED03);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Unit vector in `C^d`.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    amplitudes: Vec<C64>,
}

impl PureState {
    /// Rejects vectors whose Euclidean norm differs from one by more than
    /// [`PURE_NORM_TOL`].
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::InvalidState("empty amplitude vector".into()));
        }
        if amplitudes
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::NonFinite);
        }
        let norm = vec_norm(&amplitudes);
        if (norm - 1.0).abs() > PURE_NORM_TOL {
            return Err(Error::InvalidState(format!("norm {norm} is not 1")));
        }
        Ok(Self { amplitudes })
    }

    /// Scales a nonzero vector to unit norm.
    pub fn normalized(mut amplitudes: Vec<C64>) -> Result<Self> {
        let norm = vec_norm(&amplitudes);
        if norm.is_nan() || norm <= 1e-300 || !norm.is_finite() {
            return Err(Error::InvalidState("cannot normalise a zero vector".into()));
        }
        amplitudes.iter_mut().for_each(|z| *z /= norm);
        Ok(Self { amplitudes })
    }

    /// Computational basis state `|index>`.
    pub fn basis(dim: usize, index: usize) -> Self {
        assert!(
            index < dim,
            "basis index {index} out of range for dim {dim}"
        );
        let mut amplitudes = vec![re(0.0); dim];
        amplitudes[index] = re(1.0);
        Self { amplitudes }
    }

    /// `(|0> + |1>)/sqrt2`.
    pub fn plus() -> Self {
        Self {
            amplitudes: vec![re(FRAC_1_SQRT_2), re(FRAC_1_SQRT_2)],
        }
    }

    /// `(|0> - |1>)/sqrt2`.
    pub fn minus() -> Self {
        Self {
            amplitudes: vec![re(FRAC_1_SQRT_2), re(-FRAC_1_SQRT_2)],
        }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn inner(&self, other: &PureState) -> C64 {
        inner(&self.amplitudes, &other.amplitudes)
    }

    /// `|psi><psi|`.
    pub fn projector(&self) -> DensityMatrix {
        DensityMatrix::new_unchecked(ComplexMatrix::outer(&self.amplitudes, &self.amplitudes))
    }

    /// Same ray with the largest-magnitude amplitude made real and positive.
    pub fn phase_normalized(&self) -> Self {
        let pivot = self
            .amplitudes
            .iter()
            .copied()
            .max_by(|a, b| a.norm().total_cmp(&b.norm()))
            .unwrap_or(re(1.0));
        let phase = if pivot.norm() > 0.0 {
            pivot.conj() / pivot.norm()
        } else {
            re(1.0)
        };
        Self {
            amplitudes: self.amplitudes.iter().map(|&z| z * phase).collect(),
        }
    }
}

/// Hermitian, positive semidefinite, unit-trace operator.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    mat: ComplexMatrix,
}

impl DensityMatrix {
    pub fn new(mat: ComplexMatrix) -> Result<Self> {
        Self::with_tolerance(mat, STATE_TOL)
    }

    /// Validates Hermiticity, unit trace and positivity with the given
    /// tolerance.
    pub fn with_tolerance(mat: ComplexMatrix, tol: f64) -> Result<Self> {
        if !mat.is_square() {
            return Err(Error::NotSquare(mat.rows(), mat.cols()));
        }
        if mat.rows() == 0 {
            return Err(Error::InvalidState("zero-dimensional matrix".into()));
        }
        let asym = mat.hermitian_asymmetry();
        if asym > tol {
            return Err(Error::InvalidState(format!(
                "not Hermitian (max asymmetry {asym:e})"
            )));
        }
        let tr = mat.trace();
        if (tr.re - 1.0).abs() > tol || tr.im.abs() > tol {
            return Err(Error::InvalidState(format!(
                "trace {} + {}i is not 1",
                tr.re, tr.im
            )));
        }
        let eig = matcore::herm_eig(&mat.hermitized())?;
        let lowest = eig.eigenvalues[0];
        if lowest < -tol {
            return Err(Error::InvalidState(format!(
                "negative eigenvalue {lowest:e}"
            )));
        }
        Ok(Self { mat })
    }

    /// Skips validation; for intermediate values that are valid by
    /// construction.
    pub fn new_unchecked(mat: ComplexMatrix) -> Self {
        Self { mat }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            mat: ComplexMatrix::identity(dim).scale_real(1.0 / dim as f64),
        }
    }

    pub fn dim(&self) -> usize {
        self.mat.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.mat
    }

    /// `Tr rho^2`.
    pub fn purity(&self) -> f64 {
        (&self.mat * &self.mat).trace().re
    }

    /// `U rho U^dag`.
    pub fn evolve(&self, u: &ComplexMatrix) -> Self {
        Self {
            mat: u.sandwich(&self.mat),
        }
    }
}

fn require_same_dim(a: usize, b: usize) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            expected: a,
            found: b,
        })
    }
}

/// Squared Uhlmann fidelity `(Tr sqrt(sqrt(r1) r2 sqrt(r1)))^2`, clamped to
/// `[0, 1]`.
pub fn fidelity(r1: &DensityMatrix, r2: &DensityMatrix) -> Result<f64> {
    require_same_dim(r1.dim(), r2.dim())?;
    let root = mat_sqrt_psd(&r1.mat.hermitized(), DEFAULT_CLAMP_TOL)?;
    let product = (&(&root * &r2.mat) * &root).hermitized();
    let t = trace_sqrt_psd(&product, DEFAULT_CLAMP_TOL)?;
    Ok((t * t).clamp(0.0, 1.0))
}

/// `|<p1|p2>|`.
pub fn pure_overlap(p1: &PureState, p2: &PureState) -> Result<f64> {
    require_same_dim(p1.dim(), p2.dim())?;
    Ok(p1.inner(p2).norm())
}

/// `Tr|r1 - r2| / 2`.
pub fn trace_distance(r1: &DensityMatrix, r2: &DensityMatrix) -> Result<f64> {
    require_same_dim(r1.dim(), r2.dim())?;
    let diff = (&r1.mat - &r2.mat).hermitized();
    Ok(0.5 * trace_norm(&diff)?)
}

/// Complex standard normal with `E|z|^2 = 1`.
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let x: f64 = rng.sample(StandardNormal);
    let y: f64 = rng.sample(StandardNormal);
    C64::new(x, y) * FRAC_1_SQRT_2
}

/// Ginibre matrix with i.i.d. complex standard normal entries.
pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| complex_normal(rng))
}

/// Haar-random isometry `C^cols -> C^rows`: Gram-Schmidt of a Ginibre matrix.
///
/// Gram-Schmidt is QR with a positive real diagonal in R, which is exactly the
/// phase fix that makes the columns Haar distributed. The result equals the
/// first `cols` columns of the Haar unitary that the same construction would
/// give for a square Ginibre matrix.
pub fn random_isometry<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    assert!(cols <= rows && cols >= 1);
    loop {
        if let Some(q) = orthonormalize_columns(&ginibre(rows, cols, rng)) {
            return q;
        }
    }
}

/// Haar-random unitary.
pub fn random_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix {
    random_isometry(dim, dim, rng)
}

/// Haar-random pure state from a seed.
pub fn random_pure(dim: usize, seed: u64) -> PureState {
    random_pure_with(dim, &mut seeded_rng(seed))
}

/// Haar-random pure state: a normalised complex Gaussian vector.
pub fn random_pure_with<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> PureState {
    assert!(dim >= 1, "dimension must be at least 1");
    loop {
        let v: Vec<C64> = (0..dim).map(|_| complex_normal(rng)).collect();
        if let Ok(state) = PureState::normalized(v) {
            return state;
        }
    }
}

/// Random mixed state `G G^dag / Tr[G G^dag]` with `G` a `dim x rank` Ginibre
/// matrix.
pub fn random_density(dim: usize, rank: usize, seed: u64) -> Result<DensityMatrix> {
    random_density_with(dim, rank, &mut seeded_rng(seed))
}

pub fn random_density_with<R: Rng + ?Sized>(
    dim: usize,
    rank: usize,
    rng: &mut R,
) -> Result<DensityMatrix> {
    if rank == 0 || rank > dim {
        return Err(Error::BadRank { rank, dim });
    }
    let g = ginibre(dim, rank, rng);
    let gg = (&g * &g.adjoint()).hermitized();
    let tr = gg.trace().re;
    Ok(DensityMatrix::new_unchecked(gg.scale_real(1.0 / tr)))
}
