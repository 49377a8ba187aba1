//! The information-disturbance relations as executable checks.
//!
//! The central record pairs the fidelity `F(rho, rho')` of a measurement's
//! input and output with the optimal error `p_e` for telling the two apart;
//! the tradeoff asserts `F <= H2(p_e)`, i.e. `1 - F >= 1 - H2(p_e)`.

use std::f64::consts::FRAC_1_SQRT_2;

use serde::Serialize;

use crate::dilation::{product_evolution, IndirectModel};
use crate::discrim::{
    binary_entropy, classical_outcome_error, helstrom_error, pure_error_from_overlap,
};
use crate::error::{Error, Result};
use crate::format::fmt_sig;
use crate::matcore::{c, ComplexMatrix, C64};
use crate::qmeas::{
    conditional_output, effects_of, is_informative, outcome_probability, unconditional_output,
    KrausInstrument, MEASUREMENT_TOL, PROB_FLOOR,
};
use crate::qstate::{
    derive_seed, fidelity, random_pure_with, seeded_rng, DensityMatrix, PureState,
};

/// A record holds when `slack >= -SLACK_TOL`.
pub const SLACK_TOL: f64 = 1e-9;

/// Top Schmidt weight a joint output must reach to count as a product.
pub const SCHMIDT_TOL: f64 = 1e-8;

const SEARCH_STREAM: u64 = 0x3a;

/// One evaluated instance of the bound `F <= H2(p_e)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TradeoffRecord {
    pub instrument_label: String,
    pub input_label: String,
    pub fid_in_out: f64,
    pub disturbance: f64,
    pub p_e_opt: f64,
    pub entropy: f64,
    pub info: f64,
    pub slack: f64,
    pub holds: bool,
    /// Error of guessing from the instrument's own outcome record, when the
    /// record came from an instrument. Reported, not asserted.
    pub p_e_apparatus: Option<f64>,
}

impl TradeoffRecord {
    pub fn from_values(fid: f64, p_e: f64) -> Result<Self> {
        let entropy = binary_entropy(p_e)?;
        let slack = entropy - fid;
        Ok(Self {
            instrument_label: String::new(),
            input_label: String::new(),
            fid_in_out: fid,
            disturbance: 1.0 - fid,
            p_e_opt: p_e,
            entropy,
            info: 1.0 - entropy,
            slack,
            holds: slack >= -SLACK_TOL,
            p_e_apparatus: None,
        })
    }

    pub fn labelled(mut self, instrument: impl Into<String>, input: impl Into<String>) -> Self {
        self.instrument_label = instrument.into();
        self.input_label = input.into();
        self
    }
}

/// `F(r1, r2)` against `H2` of the Helstrom error between `r1` and `r2`.
pub fn fidelity_entropy_bound(r1: &DensityMatrix, r2: &DensityMatrix) -> Result<TradeoffRecord> {
    let f = fidelity(r1, r2)?;
    let p_e = helstrom_error(r1, r2)?.p_error;
    TradeoffRecord::from_values(f, p_e)
}

/// The tradeoff for `rho` and the non-selective output `sum_j K_j rho K_j^dag`.
pub fn infodist_check(instr: &KrausInstrument, rho: &DensityMatrix) -> Result<TradeoffRecord> {
    let out = unconditional_output(instr, rho)?;
    let mut record = fidelity_entropy_bound(rho, &out)?;
    record.p_e_apparatus = Some(classical_outcome_error(instr, rho, &out)?.p_error);
    Ok(record)
}

/// Pure-state form for a non-entangling interaction.
///
/// With `U|psi>|a0> = |psi'>|a>` and `U|psi'>|a0> = |psi''>|a'>`, the
/// record uses `F = |<psi|psi'>|^2` and the error of discriminating the
/// apparatus states `|a>, |a'>`.
pub fn pure_tradeoff_check(model: &IndirectModel, psi: &PureState) -> Result<TradeoffRecord> {
    if psi.dim() != model.dim_sys() {
        return Err(Error::DimensionMismatch {
            expected: model.dim_sys(),
            found: psi.dim(),
        });
    }
    let (psi_out, a) = product_evolution(model, psi, SCHMIDT_TOL)?;
    let (_, a_out) = product_evolution(model, &psi_out, SCHMIDT_TOL)?;
    let f = psi.inner(&psi_out).norm_sqr().min(1.0);
    let p_e = pure_error_from_overlap(a.inner(&a_out).norm())?;
    TradeoffRecord::from_values(f, p_e)
}

/// Fidelities before and after the same outcome `k`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FidelityPair {
    pub input: f64,
    pub output: f64,
}

impl FidelityPair {
    pub fn increase(&self) -> f64 {
        self.output - self.input
    }
}

/// `F(r1, r2)` and the fidelity of the normalised outputs of outcome `k`.
///
/// For a single outcome this can go either way: a filtering outcome may make
/// the outputs more distinguishable than the inputs. Equality holds when the
/// outcome map is unitary.
pub fn monotonicity_check(
    instr: &KrausInstrument,
    r1: &DensityMatrix,
    r2: &DensityMatrix,
    k: usize,
) -> Result<FidelityPair> {
    let out1 = conditional_output(instr, r1, k)?;
    let out2 = conditional_output(instr, r2, k)?;
    Ok(FidelityPair {
        input: fidelity(r1, r2)?,
        output: fidelity(&out1, &out2)?,
    })
}

/// `F(r1, r2)` and the fidelity of the non-selective outputs
/// `sum_j K_j r K_j^dag`; the second is never smaller.
pub fn channel_monotonicity_check(
    instr: &KrausInstrument,
    r1: &DensityMatrix,
    r2: &DensityMatrix,
) -> Result<FidelityPair> {
    let out1 = unconditional_output(instr, r1)?;
    let out2 = unconditional_output(instr, r2)?;
    Ok(FidelityPair {
        input: fidelity(r1, r2)?,
        output: fidelity(&out1, &out2)?,
    })
}

/// Best pair found by [`fidelity_increase_search`].
#[derive(Clone, Debug)]
pub struct FidelityIncrease {
    pub first: DensityMatrix,
    pub second: DensityMatrix,
    pub outcome: usize,
    pub fidelities: FidelityPair,
}

impl FidelityIncrease {
    pub fn increase(&self) -> f64 {
        self.fidelities.increase()
    }
}

fn superpose(d: usize, i: usize, j: usize, phase: C64) -> PureState {
    let mut amps = vec![C64::new(0.0, 0.0); d];
    amps[i] = c(FRAC_1_SQRT_2, 0.0);
    amps[j] = phase * FRAC_1_SQRT_2;
    PureState::normalized(amps).expect("unit vector")
}

/// Basis pairs, then pairs from the unbiased bases `(|i> + e^{i phi}|j>)/sqrt2`.
fn structured_pairs(d: usize) -> Vec<(PureState, PureState)> {
    let mut pairs = Vec::new();
    for i in 0..d {
        for j in i + 1..d {
            pairs.push((PureState::basis(d, i), PureState::basis(d, j)));
        }
    }
    let one = c(1.0, 0.0);
    let imag = c(0.0, 1.0);
    for i in 0..d {
        for j in i + 1..d {
            pairs.push((PureState::basis(d, i), superpose(d, i, j, one)));
            pairs.push((PureState::basis(d, i), superpose(d, i, j, imag)));
            pairs.push((superpose(d, i, j, one), superpose(d, i, j, -one)));
            pairs.push((superpose(d, i, j, imag), superpose(d, i, j, -imag)));
        }
    }
    pairs
}

/// Searches for two inputs whose fidelity grows under the same outcome.
///
/// Tries computational-basis pairs, unbiased pairs and then `trials` random
/// pure pairs, across every outcome where both inputs have probability above
/// the floor, and returns the pair with the largest `F_out - F_in`.
pub fn fidelity_increase_search(
    instr: &KrausInstrument,
    trials: usize,
    seed: u64,
) -> Result<FidelityIncrease> {
    if !is_informative(&effects_of(instr), MEASUREMENT_TOL) {
        return Err(Error::UninformativeInstrument);
    }
    let d = instr.dim();
    let mut best: Option<FidelityIncrease> = None;
    let mut consider = |a: &PureState, b: &PureState| -> Result<()> {
        let (ra, rb) = (a.projector(), b.projector());
        for k in 0..instr.n_outcomes() {
            if outcome_probability(instr, &ra, k)? <= PROB_FLOOR
                || outcome_probability(instr, &rb, k)? <= PROB_FLOOR
            {
                continue;
            }
            let pair = monotonicity_check(instr, &ra, &rb, k)?;
            if best.as_ref().is_none_or(|b| pair.increase() > b.increase()) {
                best = Some(FidelityIncrease {
                    first: ra.clone(),
                    second: rb.clone(),
                    outcome: k,
                    fidelities: pair,
                });
            }
        }
        Ok(())
    };
    for (a, b) in structured_pairs(d) {
        consider(&a, &b)?;
    }
    for t in 0..trials {
        let mut rng = seeded_rng(derive_seed(seed, SEARCH_STREAM, t as u64));
        let a = random_pure_with(d, &mut rng);
        let b = random_pure_with(d, &mut rng);
        consider(&a, &b)?;
    }
    best.ok_or(Error::UninformativeInstrument)
}

/// Two-outcome qubit measurement of strength `eta`: `eta = 0` learns
/// nothing, `eta = 1` is the computational-basis measurement.
pub fn weak_family(eta: f64) -> Result<KrausInstrument> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::OutOfRange {
            value: eta,
            low: 0.0,
            high: 1.0,
        });
    }
    let strong = ((1.0 + eta) / 2.0).sqrt();
    let weak = ((1.0 - eta) / 2.0).sqrt();
    let k0 = ComplexMatrix::from_real_diag(&[strong, weak]);
    let k1 = ComplexMatrix::from_real_diag(&[weak, strong]);
    KrausInstrument::fine_grained(vec![k0, k1])
}

/// One point of a [`saturation_scan`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FamilyPoint {
    pub param: f64,
    pub record: TradeoffRecord,
}

/// [`infodist_check`] on [`weak_family`] over `n_points` evenly spaced
/// strengths in `[0, 1]`.
pub fn saturation_scan(n_points: usize, input: &DensityMatrix) -> Result<Vec<FamilyPoint>> {
    if input.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: input.dim(),
        });
    }
    if n_points < 3 {
        return Err(Error::OutOfRange {
            value: n_points as f64,
            low: 3.0,
            high: f64::INFINITY,
        });
    }
    (0..n_points)
        .map(|i| {
            let eta = if i == n_points - 1 {
                1.0
            } else {
                i as f64 / (n_points - 1) as f64
            };
            let record = infodist_check(&weak_family(eta)?, input)?
                .labelled(format!("weak({})", fmt_sig(eta, 12)), "input");
            Ok(FamilyPoint { param: eta, record })
        })
        .collect()
}

pub const CSV_HEADER: &str = "param,fidelity,p_e,entropy,info,disturbance,slack,holds";

/// Scan rows as CSV with a header, 12 significant digits and LF endings.
pub fn scan_csv(points: &[FamilyPoint]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for p in points {
        let r = &p.record;
        let fields = [
            p.param,
            r.fid_in_out,
            r.p_e_opt,
            r.entropy,
            r.info,
            r.disturbance,
            r.slack,
        ];
        for x in fields {
            out.push_str(&fmt_sig(x, 12));
            out.push(',');
        }
        out.push_str(if r.holds { "true" } else { "false" });
        out.push('\n');
    }
    out
}
