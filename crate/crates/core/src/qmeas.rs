//! POVMs, Kraus instruments and the operations they induce on states.
//!
//! An instrument is a list of Kraus operators `K_j` grouped by a partition
//! into outcomes: outcome `k` owns the index set `I_k`, its effect is
//! `Pi_k = sum_{j in I_k} K_j^dag K_j`, and the unnormalised post-measurement
//! map is `L_k(rho) = sum_{j in I_k} K_j rho K_j^dag`.

use rand::Rng;
use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::matcore::{c, herm_eig, kron, re, ComplexMatrix, C64};
use crate::qstate::{self, random_isometry, seeded_rng, trace_distance, DensityMatrix, PureState};

/// Outcomes with probability at or below this are never conditioned on.
pub const PROB_FLOOR: f64 = 1e-12;

/// Completeness and positivity tolerance for the checked constructors.
pub const MEASUREMENT_TOL: f64 = 1e-9;

/// A set of positive effects summing to the identity.
#[derive(Clone, Debug)]
pub struct Povm {
    dim: usize,
    effects: Vec<ComplexMatrix>,
}

impl Povm {
    pub fn new(effects: Vec<ComplexMatrix>) -> Result<Self> {
        Self::with_tolerance(effects, MEASUREMENT_TOL)
    }

    pub fn with_tolerance(effects: Vec<ComplexMatrix>, tol: f64) -> Result<Self> {
        let dim = match effects.first() {
            Some(e) if e.is_square() && e.rows() > 0 => e.rows(),
            Some(e) => return Err(Error::NotSquare(e.rows(), e.cols())),
            None => return Err(Error::InvalidPovm("no effects".into())),
        };
        let mut total = ComplexMatrix::zeros(dim, dim);
        for (k, e) in effects.iter().enumerate() {
            if e.rows() != dim || e.cols() != dim {
                return Err(Error::InvalidPovm(format!(
                    "effect {k} is {}x{}, expected {dim}x{dim}",
                    e.rows(),
                    e.cols()
                )));
            }
            let asym = e.hermitian_asymmetry();
            if asym > tol {
                return Err(Error::InvalidPovm(format!(
                    "effect {k} is not Hermitian (asymmetry {asym:e})"
                )));
            }
            let lowest = herm_eig(&e.hermitized())?.eigenvalues[0];
            if lowest < -tol {
                return Err(Error::InvalidPovm(format!(
                    "effect {k} has negative eigenvalue {lowest:e}"
                )));
            }
            total = &total + e;
        }
        let defect = total.max_abs_diff(&ComplexMatrix::identity(dim));
        if defect > tol {
            return Err(Error::InvalidPovm(format!(
                "effects sum to identity only within {defect:e}"
            )));
        }
        Ok(Self { dim, effects })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn effects(&self) -> &[ComplexMatrix] {
        &self.effects
    }

    pub fn n_outcomes(&self) -> usize {
        self.effects.len()
    }

    /// Born rule `Tr[rho Pi_k]`.
    pub fn probability(&self, rho: &DensityMatrix, k: usize) -> Result<f64> {
        let effect = self.effects.get(k).ok_or(Error::BadOutcomeIndex {
            index: k,
            outcomes: self.effects.len(),
        })?;
        if rho.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: rho.dim(),
            });
        }
        Ok((rho.matrix() * effect).trace().re)
    }
}

/// Kraus operators with an outcome partition.
#[derive(Clone, Debug)]
pub struct KrausInstrument {
    dim: usize,
    kraus: Vec<ComplexMatrix>,
    partition: Vec<Vec<usize>>,
}

impl KrausInstrument {
    pub fn new(kraus: Vec<ComplexMatrix>, partition: Vec<Vec<usize>>) -> Result<Self> {
        Self::with_tolerance(kraus, partition, MEASUREMENT_TOL)
    }

    /// Checks shapes, that the partition is disjoint and exhaustive, and that
    /// `sum_j K_j^dag K_j = I` within `tol`.
    pub fn with_tolerance(
        kraus: Vec<ComplexMatrix>,
        partition: Vec<Vec<usize>>,
        tol: f64,
    ) -> Result<Self> {
        let dim = match kraus.first() {
            Some(k) if k.is_square() && k.rows() > 0 => k.rows(),
            Some(k) => {
                return Err(Error::InvalidInstrument(format!(
                    "Kraus operator 0 is {}x{}, not square",
                    k.rows(),
                    k.cols()
                )))
            }
            None => return Err(Error::InvalidInstrument("no Kraus operators".into())),
        };
        for (j, k) in kraus.iter().enumerate() {
            if k.rows() != dim || k.cols() != dim {
                return Err(Error::InvalidInstrument(format!(
                    "Kraus operator {j} is {}x{}, expected {dim}x{dim}",
                    k.rows(),
                    k.cols()
                )));
            }
        }
        check_partition(&partition, kraus.len()).map_err(Error::InvalidInstrument)?;
        let instr = Self {
            dim,
            kraus,
            partition,
        };
        let defect = instr.completeness_defect();
        if defect > tol {
            return Err(Error::InvalidInstrument(format!(
                "sum of K^dag K differs from identity by {defect:e}"
            )));
        }
        Ok(instr)
    }

    pub(crate) fn new_unchecked(kraus: Vec<ComplexMatrix>, partition: Vec<Vec<usize>>) -> Self {
        let dim = kraus[0].rows();
        Self {
            dim,
            kraus,
            partition,
        }
    }

    /// Every Kraus operator is its own outcome.
    pub fn fine_grained(kraus: Vec<ComplexMatrix>) -> Result<Self> {
        let partition = (0..kraus.len()).map(|j| vec![j]).collect();
        Self::new(kraus, partition)
    }

    /// Projective measurement in the computational basis, `K_k = |k><k|`.
    pub fn von_neumann(dim: usize) -> Self {
        let kraus = (0..dim)
            .map(|k| {
                let mut p = ComplexMatrix::zeros(dim, dim);
                p[(k, k)] = re(1.0);
                p
            })
            .collect();
        Self::new_unchecked(kraus, (0..dim).map(|k| vec![k]).collect())
    }

    /// Single-outcome instrument that does nothing.
    pub fn identity(dim: usize) -> Self {
        Self::new_unchecked(vec![ComplexMatrix::identity(dim)], vec![vec![0]])
    }

    /// Single-outcome instrument applying the unitary `u`.
    pub fn unitary(u: ComplexMatrix) -> Result<Self> {
        Self::new(vec![u], vec![vec![0]])
    }

    /// Reads a qubit in the computational basis and always leaves it in
    /// `|+>`: `K_0 = |+><0|`, `K_1 = |+><1|`.
    pub fn measure_and_prepare_plus() -> Self {
        let h = FRAC_1_SQRT_2;
        let k0 = ComplexMatrix::from_real_rows(&[&[h, 0.0], &[h, 0.0]]);
        let k1 = ComplexMatrix::from_real_rows(&[&[0.0, h], &[0.0, h]]);
        Self::new_unchecked(vec![k0, k1], vec![vec![0], vec![1]])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kraus(&self) -> &[ComplexMatrix] {
        &self.kraus
    }

    pub fn partition(&self) -> &[Vec<usize>] {
        &self.partition
    }

    pub fn n_outcomes(&self) -> usize {
        self.partition.len()
    }

    pub fn n_kraus(&self) -> usize {
        self.kraus.len()
    }

    /// `max |sum_j K_j^dag K_j - I|` entry.
    pub fn completeness_defect(&self) -> f64 {
        let mut total = ComplexMatrix::zeros(self.dim, self.dim);
        for k in &self.kraus {
            total = &total + &(&k.adjoint() * k);
        }
        total.max_abs_diff(&ComplexMatrix::identity(self.dim))
    }

    /// Outcome that Kraus index `j` belongs to.
    pub fn outcome_of(&self, j: usize) -> Option<usize> {
        self.partition.iter().position(|cell| cell.contains(&j))
    }

    fn cell(&self, k: usize) -> Result<&[usize]> {
        self.partition
            .get(k)
            .map(Vec::as_slice)
            .ok_or(Error::BadOutcomeIndex {
                index: k,
                outcomes: self.partition.len(),
            })
    }

    fn require_dim(&self, found: usize) -> Result<()> {
        if found == self.dim {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: self.dim,
                found,
            })
        }
    }
}

/// Partition cells must be disjoint and cover `0..n`.
pub(crate) fn check_partition(
    partition: &[Vec<usize>],
    n: usize,
) -> std::result::Result<(), String> {
    if partition.is_empty() {
        return Err("partition has no outcomes".into());
    }
    let mut seen = vec![false; n];
    for (k, cell) in partition.iter().enumerate() {
        for &j in cell {
            if j >= n {
                return Err(format!(
                    "partition cell {k} references index {j}, only {n} exist"
                ));
            }
            if seen[j] {
                return Err(format!("index {j} appears in more than one partition cell"));
            }
            seen[j] = true;
        }
    }
    if let Some(j) = seen.iter().position(|&s| !s) {
        return Err(format!("index {j} is not assigned to any outcome"));
    }
    Ok(())
}

/// `Pi_k = sum_{j in I_k} K_j^dag K_j`, one effect per outcome.
pub fn effects_of(instr: &KrausInstrument) -> Povm {
    let effects = instr
        .partition
        .iter()
        .map(|cell| {
            let mut e = ComplexMatrix::zeros(instr.dim, instr.dim);
            for &j in cell {
                let k = &instr.kraus[j];
                e = &e + &(&k.adjoint() * k);
            }
            e
        })
        .collect();
    Povm {
        dim: instr.dim,
        effects,
    }
}

/// Unnormalised `L_k(rho) = sum_{j in I_k} K_j rho K_j^dag`.
pub fn apply_outcome_map(
    instr: &KrausInstrument,
    rho: &ComplexMatrix,
    k: usize,
) -> Result<ComplexMatrix> {
    let cell = instr.cell(k)?;
    instr.require_dim(rho.rows())?;
    let mut out = ComplexMatrix::zeros(instr.dim, instr.dim);
    for &j in cell {
        out = &out + &instr.kraus[j].sandwich(rho);
    }
    Ok(out)
}

/// `p_k = Tr[rho Pi_k]`.
pub fn outcome_probability(instr: &KrausInstrument, rho: &DensityMatrix, k: usize) -> Result<f64> {
    Ok(apply_outcome_map(instr, rho.matrix(), k)?.trace().re)
}

pub fn outcome_probabilities(instr: &KrausInstrument, rho: &DensityMatrix) -> Result<Vec<f64>> {
    (0..instr.n_outcomes())
        .map(|k| outcome_probability(instr, rho, k))
        .collect()
}

/// State-reduction rule: `L_k(rho) / p_k`, refused when `p_k <= PROB_FLOOR`.
pub fn conditional_output(
    instr: &KrausInstrument,
    rho: &DensityMatrix,
    k: usize,
) -> Result<DensityMatrix> {
    let unnormalised = apply_outcome_map(instr, rho.matrix(), k)?;
    normalise_conditional(unnormalised, k)
}

pub(crate) fn normalise_conditional(
    unnormalised: ComplexMatrix,
    k: usize,
) -> Result<DensityMatrix> {
    let p = unnormalised.trace().re;
    if p.is_nan() || p <= PROB_FLOOR {
        return Err(Error::OutcomeProbabilityTooSmall {
            outcome: k,
            probability: p,
        });
    }
    Ok(DensityMatrix::new_unchecked(
        unnormalised.hermitized().scale_real(1.0 / p),
    ))
}

/// Non-selective output `sum_j K_j rho K_j^dag`.
pub fn unconditional_output(instr: &KrausInstrument, rho: &DensityMatrix) -> Result<DensityMatrix> {
    instr.require_dim(rho.dim())?;
    let mut out = ComplexMatrix::zeros(instr.dim, instr.dim);
    for k in &instr.kraus {
        out = &out + &k.sandwich(rho.matrix());
    }
    Ok(DensityMatrix::new_unchecked(out.hermitized()))
}

/// True iff some effect differs from `(Tr Pi_k / d) I` by more than `tol`,
/// i.e. the outcome statistics depend on the input state.
pub fn is_informative(povm: &Povm, tol: f64) -> bool {
    let d = povm.dim as f64;
    let id = ComplexMatrix::identity(povm.dim);
    povm.effects.iter().any(|e| {
        let flat = id.scale(e.trace() / d);
        e.max_abs_diff(&flat) > tol
    })
}

/// Column-stacking vectorisation: `vec(X)[col * d + row] = X[row, col]`.
pub fn vectorize(x: &ComplexMatrix) -> Vec<C64> {
    let (r, cols) = (x.rows(), x.cols());
    let mut v = Vec::with_capacity(r * cols);
    for col in 0..cols {
        for row in 0..r {
            v.push(x[(row, col)]);
        }
    }
    v
}

/// Inverse of [`vectorize`] for a `d x d` operator.
pub fn unvectorize(v: &[C64], d: usize) -> ComplexMatrix {
    assert_eq!(v.len(), d * d);
    ComplexMatrix::from_fn(d, d, |row, col| v[col * d + row])
}

/// Matrix of `L_k` acting on column-stacked operators.
#[derive(Clone, Debug)]
pub struct Superoperator {
    dim: usize,
    mat: ComplexMatrix,
}

impl Superoperator {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.mat
    }

    /// `unvec(M vec(X))`.
    pub fn apply(&self, x: &ComplexMatrix) -> ComplexMatrix {
        unvectorize(&self.mat.apply(&vectorize(x)), self.dim)
    }
}

/// `M = sum_{j in I_k} conj(K_j) (x) K_j`, so that `M vec(X) = vec(L_k(X))`
/// under column stacking.
pub fn superoperator_matrix(instr: &KrausInstrument, k: usize) -> Result<Superoperator> {
    let cell = instr.cell(k)?;
    let d = instr.dim;
    let mut mat = ComplexMatrix::zeros(d * d, d * d);
    for &j in cell {
        let kj = &instr.kraus[j];
        mat = &mat + &kron(&kj.conj(), kj);
    }
    Ok(Superoperator { dim: d, mat })
}

/// Pure states left unchanged by outcome `k`: `L_k(|psi><psi|) / p_k` is
/// within trace distance `tol` of `|psi><psi|`.
///
/// Candidates come from the eigen-operators of the superoperator (eigenvalues
/// from a complex Schur form, eigenvectors as null vectors of `M - lambda I`),
/// reshaped, split into Hermitian parts and diagonalised. Eigenvectors of the
/// Hermitian parts of the Kraus operators are added as a second source. Every
/// candidate goes through the direct fixed-point test; the search is sound but
/// only best-effort complete.
pub fn unmodified_pure_states(
    instr: &KrausInstrument,
    k: usize,
    tol: f64,
) -> Result<Vec<PureState>> {
    let sup = superoperator_matrix(instr, k)?;
    let d = instr.dim;
    let mut candidates: Vec<Vec<C64>> = Vec::new();

    for x in eigen_operators(&sup)? {
        push_hermitian_part_eigenvectors(&x, &mut candidates)?;
    }
    for &j in instr.cell(k)? {
        push_hermitian_part_eigenvectors(&instr.kraus[j], &mut candidates)?;
        let range = &instr.kraus[j] * &instr.kraus[j].adjoint();
        push_hermitian_part_eigenvectors(&range, &mut candidates)?;
    }
    for i in 0..d {
        candidates.push(PureState::basis(d, i).amplitudes().to_vec());
    }

    let mut found: Vec<PureState> = Vec::new();
    for amps in candidates {
        let Ok(psi) = PureState::normalized(amps) else {
            continue;
        };
        if found.iter().any(|f| f.inner(&psi).norm_sqr() > 1.0 - 1e-8) {
            continue;
        }
        let proj = psi.projector();
        let Ok(out) = conditional_output(instr, &proj, k) else {
            continue;
        };
        if trace_distance(&out, &proj)? < tol {
            found.push(psi.phase_normalized());
        }
    }
    Ok(found)
}

/// Basis vectors (reshaped to `d x d`) of the eigenspaces of a superoperator.
fn eigen_operators(sup: &Superoperator) -> Result<Vec<ComplexMatrix>> {
    let m = sup.matrix();
    let n = m.rows();
    let dm = DMatrix::from_fn(n, n, |i, j| m[(i, j)]);
    let Some(eigenvalues) = dm.eigenvalues() else {
        return Ok(Vec::new());
    };
    let scale = m.max_abs().max(1.0);
    let mut lambdas: Vec<C64> = Vec::new();
    for &l in eigenvalues.iter() {
        if !lambdas.iter().any(|&seen| (seen - l).norm() < 1e-9 * scale) {
            lambdas.push(l);
        }
    }

    let mut ops = Vec::new();
    for lambda in lambdas {
        let shifted = m - &ComplexMatrix::identity(n).scale(lambda);
        let gram = (&shifted.adjoint() * &shifted).hermitized();
        let eig = herm_eig(&gram)?;
        let cutoff = 1e-8 * scale * scale;
        for (idx, &val) in eig.eigenvalues.iter().enumerate() {
            if idx == 0 || val < cutoff {
                ops.push(unvectorize(&eig.eigenvector(idx), sup.dim));
            }
        }
    }
    Ok(ops)
}

/// Eigenvectors with non-negligible eigenvalue of `(X + X^dag)/2` and
/// `(X - X^dag)/2i`.
fn push_hermitian_part_eigenvectors(x: &ComplexMatrix, out: &mut Vec<Vec<C64>>) -> Result<()> {
    let adj = x.adjoint();
    let parts = [(x + &adj).scale_real(0.5), (x - &adj).scale(c(0.0, -0.5))];
    for h in parts {
        let scale = h.max_abs();
        if scale < 1e-12 {
            continue;
        }
        let eig = herm_eig(&h.hermitized())?;
        let radius = eig.eigenvalues.iter().map(|l| l.abs()).fold(0.0, f64::max);
        for (idx, &val) in eig.eigenvalues.iter().enumerate() {
            if val.abs() > 1e-6 * radius {
                out.push(eig.eigenvector(idx));
            }
        }
    }
    Ok(())
}

/// Random instrument read off a Haar isometry `C^dim -> C^dim (x) C^n`, with
/// `n = n_outcomes * kraus_per_outcome`: `K_j[i, l] = V[i*n + j, l]`. Outcome
/// `k` owns Kraus indices `k*kraus_per_outcome .. (k+1)*kraus_per_outcome`.
pub fn random_instrument(
    dim: usize,
    n_outcomes: usize,
    kraus_per_outcome: usize,
    seed: u64,
) -> KrausInstrument {
    random_instrument_with(dim, n_outcomes, kraus_per_outcome, &mut seeded_rng(seed))
}

pub fn random_instrument_with<R: Rng + ?Sized>(
    dim: usize,
    n_outcomes: usize,
    kraus_per_outcome: usize,
    rng: &mut R,
) -> KrausInstrument {
    assert!(dim >= 1 && n_outcomes >= 1 && kraus_per_outcome >= 1);
    let n = n_outcomes * kraus_per_outcome;
    let v = random_isometry(dim * n, dim, rng);
    let kraus = (0..n)
        .map(|j| ComplexMatrix::from_fn(dim, dim, |i, l| v[(i * n + j, l)]))
        .collect();
    let partition = (0..n_outcomes)
        .map(|k| (k * kraus_per_outcome..(k + 1) * kraus_per_outcome).collect())
        .collect();
    KrausInstrument::new_unchecked(kraus, partition)
}

/// Random instrument with `n_kraus` operators split as evenly as possible
/// into `n_outcomes` contiguous outcome groups.
pub fn random_instrument_grouped<R: Rng + ?Sized>(
    dim: usize,
    n_kraus: usize,
    n_outcomes: usize,
    rng: &mut R,
) -> KrausInstrument {
    assert!(n_outcomes >= 1 && n_outcomes <= n_kraus);
    let fine = random_instrument_with(dim, n_kraus, 1, rng);
    let mut partition = vec![Vec::new(); n_outcomes];
    for j in 0..n_kraus {
        partition[j * n_outcomes / n_kraus].push(j);
    }
    KrausInstrument::new_unchecked(fine.kraus, partition)
}

/// Random single-Kraus (unitary) instrument.
pub fn random_unitary_instrument<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> KrausInstrument {
    KrausInstrument::new_unchecked(vec![qstate::random_unitary(dim, rng)], vec![vec![0]])
}

#[doc(hidden)]
pub fn max_vec_route_discrepancy(
    instr: &KrausInstrument,
    rho: &DensityMatrix,
    k: usize,
) -> Result<f64> {
    let sup = superoperator_matrix(instr, k)?;
    let direct = apply_outcome_map(instr, rho.matrix(), k)?;
    Ok(sup.apply(rho.matrix()).max_abs_diff(&direct))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::{random_density, random_pure};
    use approx::assert_abs_diff_eq;

    fn mp() -> KrausInstrument {
        KrausInstrument::measure_and_prepare_plus()
    }

    fn diag(entries: &[f64]) -> ComplexMatrix {
        ComplexMatrix::from_real_diag(entries)
    }

    #[test]
    fn constructor_rejects_incomplete_and_bad_partitions() {
        let half = diag(&[1.0, 0.5]);
        assert!(matches!(
            KrausInstrument::fine_grained(vec![half]),
            Err(Error::InvalidInstrument(_))
        ));
        let vn = KrausInstrument::von_neumann(2);
        let k = vn.kraus().to_vec();
        assert!(KrausInstrument::new(k.clone(), vec![vec![0]]).is_err());
        assert!(KrausInstrument::new(k.clone(), vec![vec![0, 1], vec![1]]).is_err());
        assert!(KrausInstrument::new(k.clone(), vec![vec![0, 2]]).is_err());
        assert!(KrausInstrument::new(k, vec![vec![0, 1]]).is_ok());
        assert!(KrausInstrument::new(vec![ComplexMatrix::zeros(2, 3)], vec![vec![0]]).is_err());
    }

    #[test]
    fn povm_constructor_validates() {
        assert!(Povm::new(vec![diag(&[1.0, 0.0]), diag(&[0.0, 1.0])]).is_ok());
        assert!(Povm::new(vec![diag(&[1.0, 0.0])]).is_err());
        assert!(Povm::new(vec![diag(&[1.5, 0.0]), diag(&[-0.5, 1.0])]).is_err());
    }

    #[test]
    fn effects_examples() {
        let vn = effects_of(&KrausInstrument::von_neumann(2));
        assert_eq!(vn.effects(), &[diag(&[1.0, 0.0]), diag(&[0.0, 1.0])]);

        let p = effects_of(&mp());
        assert!(p.effects()[0].max_abs_diff(&diag(&[1.0, 0.0])) < 1e-15);
        assert!(p.effects()[1].max_abs_diff(&diag(&[0.0, 1.0])) < 1e-15);

        let u = crate::qstate::random_unitary(3, &mut seeded_rng(1));
        let single = effects_of(&KrausInstrument::unitary(u).unwrap());
        assert_eq!(single.n_outcomes(), 1);
        assert!(single.effects()[0].max_abs_diff(&ComplexMatrix::identity(3)) < 1e-12);
        assert!(Povm::new(single.effects().to_vec()).is_ok());
    }

    #[test]
    fn probability_examples() {
        let vn = KrausInstrument::von_neumann(2);
        let plus = PureState::plus().projector();
        assert_abs_diff_eq!(
            outcome_probability(&vn, &plus, 0).unwrap(),
            0.5,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            outcome_probability(&vn, &plus, 1).unwrap(),
            0.5,
            epsilon = 1e-15
        );

        let zero = PureState::basis(2, 0).projector();
        assert_abs_diff_eq!(
            outcome_probability(&mp(), &zero, 0).unwrap(),
            1.0,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            outcome_probability(&mp(), &zero, 1).unwrap(),
            0.0,
            epsilon = 1e-15
        );

        let instr = random_instrument(3, 3, 2, 9);
        let rho = random_density(3, 2, 4).unwrap();
        let total: f64 = outcome_probabilities(&instr, &rho).unwrap().iter().sum();
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-12);
        assert_eq!(
            outcome_probability(&instr, &rho, 3).unwrap_err(),
            Error::BadOutcomeIndex {
                index: 3,
                outcomes: 3
            }
        );
        assert!(matches!(
            outcome_probability(&instr, &zero, 0),
            Err(Error::DimensionMismatch { .. })
        ));
        let povm = effects_of(&instr);
        assert_abs_diff_eq!(
            povm.probability(&rho, 1).unwrap(),
            outcome_probability(&instr, &rho, 1).unwrap(),
            epsilon = 1e-14
        );
    }

    #[test]
    fn conditional_examples() {
        let zero = PureState::basis(2, 0).projector();
        let out = conditional_output(&mp(), &zero, 0).unwrap();
        assert!(trace_distance(&out, &PureState::plus().projector()).unwrap() < 1e-14);

        let vn = KrausInstrument::von_neumann(2);
        let out = conditional_output(&vn, &PureState::plus().projector(), 0).unwrap();
        assert!(out.matrix().max_abs_diff(zero.matrix()) < 1e-15);

        let rho = random_density(3, 3, 2).unwrap();
        let same = conditional_output(&KrausInstrument::identity(3), &rho, 0).unwrap();
        assert!(same.matrix().max_abs_diff(rho.matrix()) < 1e-15);
    }

    #[test]
    fn conditioning_on_impossible_outcome_is_refused() {
        let zero = PureState::basis(2, 0).projector();
        assert!(matches!(
            conditional_output(&mp(), &zero, 1),
            Err(Error::OutcomeProbabilityTooSmall { outcome: 1, .. })
        ));
    }

    #[test]
    fn unconditional_examples() {
        let rho = random_density(2, 2, 3).unwrap();
        let same = unconditional_output(&KrausInstrument::identity(2), &rho).unwrap();
        assert!(same.matrix().max_abs_diff(rho.matrix()) < 1e-15);

        let out = unconditional_output(&mp(), &rho).unwrap();
        assert!(
            out.matrix()
                .max_abs_diff(PureState::plus().projector().matrix())
                < 1e-14
        );

        let vn = KrausInstrument::von_neumann(2);
        let out = unconditional_output(&vn, &PureState::plus().projector()).unwrap();
        assert!(out.matrix().max_abs_diff(&diag(&[0.5, 0.5])) < 1e-15);
    }

    #[test]
    fn informativeness_examples() {
        let id = ComplexMatrix::identity(2);
        assert!(!is_informative(&Povm::new(vec![id.clone()]).unwrap(), 1e-9));
        let half = id.scale_real(0.5);
        assert!(!is_informative(
            &Povm::new(vec![half.clone(), half]).unwrap(),
            1e-9
        ));
        let basis = Povm::new(vec![diag(&[1.0, 0.0]), diag(&[0.0, 1.0])]).unwrap();
        assert!(is_informative(&basis, 1e-9));
    }

    #[test]
    fn superoperator_examples() {
        let id = superoperator_matrix(&KrausInstrument::identity(3), 0).unwrap();
        assert_eq!(id.matrix(), &ComplexMatrix::identity(9));

        // L(X) = P X P with P = diag(1, 0) keeps only X[0,0]; vec index 0
        let p = KrausInstrument::new_unchecked(vec![diag(&[1.0, 0.0])], vec![vec![0]]);
        let sup = superoperator_matrix(&p, 0).unwrap();
        assert_eq!(sup.matrix(), &diag(&[1.0, 0.0, 0.0, 0.0]));

        let instr = random_instrument(3, 2, 2, 21);
        let rho = random_density(3, 3, 22).unwrap();
        for k in 0..2 {
            assert!(max_vec_route_discrepancy(&instr, &rho, k).unwrap() < 1e-12);
        }
        assert!(matches!(
            superoperator_matrix(&instr, 2),
            Err(Error::BadOutcomeIndex { .. })
        ));
    }

    #[test]
    fn vec_is_column_stacking() {
        let x = ComplexMatrix::from_real_rows(&[&[1.0, 2.0], &[3.0, 4.0]]);
        assert_eq!(vectorize(&x), vec![re(1.0), re(3.0), re(2.0), re(4.0)]);
        assert_eq!(unvectorize(&vectorize(&x), 2), x);
    }

    fn contains(states: &[PureState], target: &PureState) -> bool {
        states
            .iter()
            .any(|s| s.inner(target).norm_sqr() > 1.0 - 1e-9)
    }

    #[test]
    fn fixed_states_of_von_neumann() {
        let vn = KrausInstrument::von_neumann(2);
        let fixed = unmodified_pure_states(&vn, 0, 1e-9).unwrap();
        assert!(contains(&fixed, &PureState::basis(2, 0)));
        assert_eq!(fixed.len(), 1);
    }

    #[test]
    fn fixed_states_of_phase_gate() {
        let theta: f64 = 0.7;
        let u = ComplexMatrix::new(
            2,
            2,
            vec![re(1.0), re(0.0), re(0.0), c(theta.cos(), theta.sin())],
        )
        .unwrap();
        let fixed = unmodified_pure_states(&KrausInstrument::unitary(u).unwrap(), 0, 1e-9).unwrap();
        assert_eq!(fixed.len(), 2);
        assert!(contains(&fixed, &PureState::basis(2, 0)));
        assert!(contains(&fixed, &PureState::basis(2, 1)));
    }

    #[test]
    fn fixed_state_of_measure_and_prepare_plus() {
        // L_0(|+><+|) = |<0|+>|^2 |+><+| = |+><+| / 2
        let fixed = unmodified_pure_states(&mp(), 0, 1e-9).unwrap();
        assert_eq!(fixed.len(), 1);
        assert!(contains(&fixed, &PureState::plus()));
    }

    #[test]
    fn fixed_states_pass_direct_check() {
        for seed in 0..30 {
            let instr = random_instrument(2, 2, 1, seed);
            for k in 0..2 {
                for psi in unmodified_pure_states(&instr, k, 1e-7).unwrap() {
                    let proj = psi.projector();
                    let out = conditional_output(&instr, &proj, k).unwrap();
                    assert!(trace_distance(&out, &proj).unwrap() < 1e-7);
                }
            }
        }
    }

    #[test]
    fn random_instrument_contracts() {
        let single = random_instrument(3, 1, 1, 5);
        assert_eq!(single.n_kraus(), 1);
        assert!(crate::matcore::isometry_defect(&single.kraus()[0]) < 1e-12);

        for seed in 0..20 {
            let instr = random_instrument(4, 4, 4, seed);
            assert!(instr.completeness_defect() < 1e-9);
            assert!(check_partition(instr.partition(), instr.n_kraus()).is_ok());
        }
        let a = random_instrument(2, 2, 2, 17);
        let b = random_instrument(2, 2, 2, 17);
        assert_eq!(a.kraus(), b.kraus());
    }

    #[test]
    fn uninformative_povm_has_state_independent_statistics() {
        let s = ComplexMatrix::identity(2).scale_real(FRAC_1_SQRT_2);
        let instr = KrausInstrument::fine_grained(vec![s.clone(), s]).unwrap();
        assert!(!is_informative(&effects_of(&instr), 1e-9));
        let a = random_pure(2, 1).projector();
        let b = random_pure(2, 2).projector();
        for k in 0..2 {
            assert_abs_diff_eq!(
                outcome_probability(&instr, &a, k).unwrap(),
                outcome_probability(&instr, &b, k).unwrap(),
                epsilon = 1e-12
            );
        }
    }
}
