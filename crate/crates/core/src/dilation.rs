//! Indirect measurement model: the system couples unitarily to an ancilla
//! prepared in a pure state, then the ancilla is read out projectively in its
//! computational basis, with basis indices grouped into outcomes.

use crate::error::{Error, Result};
use crate::matcore::{
    complete_isometry, herm_eig, isometry_defect, kron, partial_trace, singular_values,
    ComplexMatrix, Subsystem, C64,
};
use crate::qmeas::{check_partition, normalise_conditional, KrausInstrument};
use crate::qstate::{
    derive_seed, fidelity, random_pure_with, seeded_rng, DensityMatrix, PureState,
};

/// Unitarity tolerance for [`IndirectModel::new`].
pub const UNITARY_TOL: f64 = 1e-9;

/// RNG stream for the random pairs of [`signaling_witness`].
const WITNESS_STREAM: u64 = 0x5167;

/// System + ancilla dilation of a measurement.
#[derive(Clone, Debug)]
pub struct IndirectModel {
    dim_sys: usize,
    dim_anc: usize,
    unitary: ComplexMatrix,
    ancilla_init: PureState,
    readout_partition: Vec<Vec<usize>>,
}

impl IndirectModel {
    pub fn new(
        dim_sys: usize,
        dim_anc: usize,
        unitary: ComplexMatrix,
        ancilla_init: PureState,
        readout_partition: Vec<Vec<usize>>,
    ) -> Result<Self> {
        let total = dim_sys * dim_anc;
        if total == 0 {
            return Err(Error::InvalidModel("zero dimension".into()));
        }
        if unitary.rows() != total || unitary.cols() != total {
            return Err(Error::InvalidModel(format!(
                "unitary is {}x{}, expected {total}x{total}",
                unitary.rows(),
                unitary.cols()
            )));
        }
        let defect = isometry_defect(&unitary);
        if defect > UNITARY_TOL {
            return Err(Error::InvalidModel(format!(
                "interaction is not unitary (defect {defect:e})"
            )));
        }
        if ancilla_init.dim() != dim_anc {
            return Err(Error::InvalidModel(format!(
                "ancilla state has dimension {}, expected {dim_anc}",
                ancilla_init.dim()
            )));
        }
        check_partition(&readout_partition, dim_anc).map_err(Error::InvalidModel)?;
        Ok(Self {
            dim_sys,
            dim_anc,
            unitary,
            ancilla_init,
            readout_partition,
        })
    }

    /// `U = U_sys (x) U_anc`.
    pub fn factorized(
        u_sys: &ComplexMatrix,
        u_anc: &ComplexMatrix,
        ancilla_init: PureState,
        readout_partition: Vec<Vec<usize>>,
    ) -> Result<Self> {
        Self::new(
            u_sys.rows(),
            u_anc.rows(),
            kron(u_sys, u_anc),
            ancilla_init,
            readout_partition,
        )
    }

    pub fn dim_sys(&self) -> usize {
        self.dim_sys
    }

    pub fn dim_anc(&self) -> usize {
        self.dim_anc
    }

    pub fn unitary(&self) -> &ComplexMatrix {
        &self.unitary
    }

    pub fn ancilla_init(&self) -> &PureState {
        &self.ancilla_init
    }

    pub fn readout_partition(&self) -> &[Vec<usize>] {
        &self.readout_partition
    }

    pub fn n_outcomes(&self) -> usize {
        self.readout_partition.len()
    }

    fn require_sys_dim(&self, found: usize) -> Result<()> {
        if found == self.dim_sys {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: self.dim_sys,
                found,
            })
        }
    }

    /// `U (rho (x) sigma) U^dag`.
    fn joint_output(&self, rho: &DensityMatrix) -> Result<ComplexMatrix> {
        self.require_sys_dim(rho.dim())?;
        let sigma = self.ancilla_init.projector();
        Ok(self.unitary.sandwich(&kron(rho.matrix(), sigma.matrix())))
    }

    /// `I (x) P_k` with `P_k` the sum of the readout projectors of outcome `k`.
    fn readout_projector(&self, k: usize) -> Result<ComplexMatrix> {
        let cell = self
            .readout_partition
            .get(k)
            .ok_or(Error::BadOutcomeIndex {
                index: k,
                outcomes: self.readout_partition.len(),
            })?;
        let mut p = ComplexMatrix::zeros(self.dim_anc, self.dim_anc);
        for &j in cell {
            p[(j, j)] = C64::new(1.0, 0.0);
        }
        Ok(kron(&ComplexMatrix::identity(self.dim_sys), &p))
    }

    /// `U (psi (x) a0)` as a joint state vector.
    fn evolve_pure(&self, psi: &PureState) -> Result<Vec<C64>> {
        self.require_sys_dim(psi.dim())?;
        let joint: Vec<C64> = psi
            .amplitudes()
            .iter()
            .flat_map(|&s| self.ancilla_init.amplitudes().iter().map(move |&a| s * a))
            .collect();
        Ok(self.unitary.apply(&joint))
    }
}

/// Dilation of an instrument with one ancilla level per Kraus operator.
///
/// The isometry `|psi>|0> -> sum_j K_j|psi>|j>` fills the columns
/// `l * n` (input `|l>|0>`) of the unitary; the remaining columns are its
/// deterministic completion.
pub fn dilate(instr: &KrausInstrument) -> Result<IndirectModel> {
    let d = instr.dim();
    let n = instr.n_kraus();
    let isometry = ComplexMatrix::from_fn(d * n, d, |row, l| {
        let (i, j) = (row / n, row % n);
        instr.kraus()[j][(i, l)]
    });
    let completed = complete_isometry(&isometry)?;

    let mut unitary = ComplexMatrix::zeros(d * n, d * n);
    let mut spare = d..d * n;
    for col in 0..d * n {
        let source = if col % n == 0 {
            col / n
        } else {
            spare.next().expect("completion has d*n columns")
        };
        unitary.set_column(col, &completed.column(source));
    }
    IndirectModel::new(
        d,
        n,
        unitary,
        PureState::basis(n, 0),
        instr.partition().to_vec(),
    )
}

/// Denominator of the conditional-state formula, `Tr[(I (x) P_k) U(rho (x) sigma)U^dag]`.
pub fn outcome_probability_from_model(
    model: &IndirectModel,
    rho: &DensityMatrix,
    k: usize,
) -> Result<f64> {
    let projector = model.readout_projector(k)?;
    let joint = model.joint_output(rho)?;
    Ok((&projector * &joint).trace().re)
}

/// Conditional system state after reading outcome `k` on the ancilla:
/// `Tr_A[(I (x) P_k) U(rho (x) sigma)U^dag (I (x) P_k)]`, normalised.
pub fn conditional_from_model(
    model: &IndirectModel,
    rho: &DensityMatrix,
    k: usize,
) -> Result<DensityMatrix> {
    let projector = model.readout_projector(k)?;
    let joint = model.joint_output(rho)?;
    let projected = &(&projector * &joint) * &projector;
    let reduced = partial_trace(&projected, model.dim_sys, model.dim_anc, Subsystem::System)?;
    normalise_conditional(reduced, k)
}

/// Ancilla state after the interaction, before readout.
pub fn ancilla_output(model: &IndirectModel, rho: &DensityMatrix) -> Result<DensityMatrix> {
    let joint = model.joint_output(rho)?;
    let reduced = partial_trace(&joint, model.dim_sys, model.dim_anc, Subsystem::Ancilla)?;
    Ok(DensityMatrix::new_unchecked(reduced.hermitized()))
}

/// Operator-Schmidt weights of the interaction, descending and summing to 1.
///
/// The realigned matrix `R[(i, j), (a, b)] = U[(i, a), (j, b)]` has rank one
/// exactly when `U` is a product `A (x) B`.
pub fn operator_schmidt_weights(model: &IndirectModel) -> Result<Vec<f64>> {
    let (ds, da) = (model.dim_sys, model.dim_anc);
    let u = &model.unitary;
    let realigned = ComplexMatrix::from_fn(ds * ds, da * da, |r, s| {
        let (i, j) = (r / ds, r % ds);
        let (a, b) = (s / da, s % da);
        u[(i * da + a, j * da + b)]
    });
    let sv = singular_values(&realigned)?;
    let total: f64 = sv.iter().map(|s| s * s).sum();
    Ok(sv.iter().map(|s| s * s / total).collect())
}

/// True iff the leading operator-Schmidt term carries more than `1 - tol` of
/// the weight.
pub fn is_factorized(model: &IndirectModel, tol: f64) -> bool {
    match operator_schmidt_weights(model) {
        Ok(w) => w.first().is_some_and(|&top| top > 1.0 - tol),
        Err(_) => false,
    }
}

/// Pair of system inputs whose ancilla outputs are least similar.
#[derive(Clone, Debug)]
pub struct SignalingWitness {
    pub first: PureState,
    pub second: PureState,
    /// `F(ancilla_output(first), ancilla_output(second))`.
    pub fidelity: f64,
}

/// Searches computational-basis pairs and then `trials` random pure pairs
/// for the smallest ancilla-output fidelity. A value below one means the
/// interaction carries information about the system into the probe.
pub fn signaling_witness(
    model: &IndirectModel,
    trials: usize,
    seed: u64,
) -> Result<SignalingWitness> {
    let d = model.dim_sys;
    let mut best = SignalingWitness {
        first: PureState::basis(d, 0),
        second: PureState::basis(d, 0),
        fidelity: f64::INFINITY,
    };
    let mut consider = |a: PureState, b: PureState| -> Result<()> {
        let f = fidelity(
            &ancilla_output(model, &a.projector())?,
            &ancilla_output(model, &b.projector())?,
        )?;
        if f < best.fidelity {
            best = SignalingWitness {
                first: a,
                second: b,
                fidelity: f,
            };
        }
        Ok(())
    };
    for i in 0..d {
        for j in i + 1..d {
            consider(PureState::basis(d, i), PureState::basis(d, j))?;
        }
    }
    for t in 0..trials {
        let mut rng = seeded_rng(derive_seed(seed, WITNESS_STREAM, t as u64));
        let a = random_pure_with(d, &mut rng);
        let b = random_pure_with(d, &mut rng);
        consider(a, b)?;
    }
    if !best.fidelity.is_finite() {
        best.fidelity = 1.0;
    }
    Ok(best)
}

/// Splits a bipartite pure state into `(system, ancilla)` factors, or
/// returns `None` when the top Schmidt weight is below `1 - tol`.
pub fn split_product_state(
    joint: &[C64],
    dim_sys: usize,
    dim_anc: usize,
    tol: f64,
) -> Result<Option<(PureState, PureState)>> {
    let m = ComplexMatrix::from_fn(dim_sys, dim_anc, |i, a| joint[i * dim_anc + a]);
    let reduced = (&m * &m.adjoint()).hermitized();
    let eig = herm_eig(&reduced)?;
    let top = *eig.eigenvalues.last().expect("nonempty spectrum");
    let total: f64 = eig.eigenvalues.iter().sum();
    if top < (1.0 - tol) * total {
        return Ok(None);
    }
    let sys = eig.eigenvector(dim_sys - 1);
    let anc: Vec<C64> = (0..dim_anc)
        .map(|a| (0..dim_sys).map(|i| sys[i].conj() * m[(i, a)]).sum())
        .collect();
    Ok(Some((
        PureState::normalized(sys)?,
        PureState::normalized(anc)?,
    )))
}

/// `U (psi (x) a0)` split into system and apparatus states, or
/// [`Error::EntanglingEvolution`].
pub fn product_evolution(
    model: &IndirectModel,
    psi: &PureState,
    tol: f64,
) -> Result<(PureState, PureState)> {
    let joint = model.evolve_pure(psi)?;
    split_product_state(&joint, model.dim_sys, model.dim_anc, tol)?
        .ok_or(Error::EntanglingEvolution)
}
