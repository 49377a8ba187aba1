//! Randomised property suites behind `qtradeoff verify`.
//!
//! Trial `t` of suite `s` draws everything from
//! `seeded_rng(derive_seed(seed, s, t))`, so results do not depend on how
//! trials are scheduled across threads.

use rand::Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use qtradeoff::dilation::{
    ancilla_output, conditional_from_model, dilate, outcome_probability_from_model,
    signaling_witness, IndirectModel,
};
use qtradeoff::discrim::entropy_inequality_suite;
use qtradeoff::qmeas::{
    conditional_output, effects_of, is_informative, outcome_probability, random_instrument_grouped,
    random_unitary_instrument, KrausInstrument, MEASUREMENT_TOL, PROB_FLOOR,
};
use qtradeoff::qstate::{
    derive_seed, fidelity, pure_overlap, random_density_with, random_pure_with, random_unitary,
    seeded_rng, trace_distance, StdRng,
};
use qtradeoff::tradeoff::{
    channel_monotonicity_check, fidelity_increase_search, infodist_check, monotonicity_check,
};
use qtradeoff::Result;

use crate::output::{num, text};

/// Per-trial outcome before aggregation.
enum Case {
    Value(f64),
    Skipped,
    Failed(String),
}

impl From<Result<Option<f64>>> for Case {
    fn from(r: Result<Option<f64>>) -> Self {
        match r {
            Ok(Some(v)) => Case::Value(v),
            Ok(None) => Case::Skipped,
            Err(e) => Case::Failed(e.to_string()),
        }
    }
}

#[derive(Clone, Copy)]
enum Worst {
    Max,
    Min,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteResult {
    pub name: &'static str,
    pub cases: usize,
    pub skipped: usize,
    pub violations: usize,
    pub errors: usize,
    pub worst: f64,
    pub threshold: f64,
    pub note: Option<String>,
}

impl SuiteResult {
    pub fn passed(&self) -> bool {
        self.violations == 0 && self.errors == 0
    }

    pub fn to_json(&self) -> Value {
        json!({
            "name": self.name,
            "cases": self.cases,
            "skipped": self.skipped,
            "violations": self.violations,
            "errors": self.errors,
            "worst": num(self.worst),
            "threshold": num(self.threshold),
            "passed": self.passed(),
            "note": self.note,
        })
    }

    pub fn text_row(&self) -> String {
        format!(
            "{:<22} {:>7} {:>8} {:>11} {:>7}  {:<13} {:<12} {}",
            self.name,
            self.cases,
            self.skipped,
            self.violations,
            self.errors,
            text(self.worst),
            text(self.threshold),
            if self.passed() { "PASS" } else { "FAIL" }
        )
    }
}

pub fn text_header() -> String {
    format!(
        "{:<22} {:>7} {:>8} {:>11} {:>7}  {:<13} {:<12} {}",
        "suite", "cases", "skipped", "violations", "errors", "worst", "threshold", "status"
    )
}

fn summarize(
    name: &'static str,
    threshold: f64,
    worst: Worst,
    cases: Vec<Case>,
    violates: impl Fn(f64) -> bool,
) -> SuiteResult {
    let mut result = SuiteResult {
        name,
        cases: cases.len(),
        skipped: 0,
        violations: 0,
        errors: 0,
        worst: f64::NAN,
        threshold,
        note: None,
    };
    let mut first_error = None;
    for case in cases {
        match case {
            Case::Value(v) => {
                if violates(v) {
                    result.violations += 1;
                }
                result.worst = match worst {
                    _ if result.worst.is_nan() => v,
                    Worst::Max => result.worst.max(v),
                    Worst::Min => result.worst.min(v),
                };
            }
            Case::Skipped => result.skipped += 1,
            Case::Failed(msg) => {
                result.errors += 1;
                first_error.get_or_insert(msg);
            }
        }
    }
    if let Some(msg) = first_error {
        result.note = Some(format!("first error: {msg}"));
    }
    result
}

fn trials_par<T: Send>(trials: usize, f: impl Fn(u64) -> T + Sync + Send) -> Vec<T> {
    (0..trials as u64).into_par_iter().map(f).collect()
}

#[derive(Clone, Copy, Debug)]
pub struct VerifyConfig {
    pub dim: usize,
    pub trials: usize,
    pub seed: u64,
    pub tol: f64,
}

impl VerifyConfig {
    fn rng(&self, suite: u64, trial: u64) -> StdRng {
        seeded_rng(derive_seed(self.seed, suite, trial))
    }
}

/// Instrument with 1-4 Kraus operators in 1-4 outcome groups.
fn any_instrument(d: usize, rng: &mut StdRng) -> KrausInstrument {
    let n = rng.random_range(1..=4);
    let m = rng.random_range(1..=n);
    random_instrument_grouped(d, n, m, rng)
}

fn tradeoff_suite(cfg: &VerifyConfig) -> SuiteResult {
    let cases = trials_par(cfg.trials, |t| {
        let mut rng = cfg.rng(1, t);
        let instr = any_instrument(cfg.dim, &mut rng);
        let rank = rng.random_range(1..=cfg.dim);
        let mut run = || -> Result<Option<f64>> {
            let rho = random_density_with(cfg.dim, rank, &mut rng)?;
            Ok(Some(infodist_check(&instr, &rho)?.slack))
        };
        Case::from(run())
    });
    summarize("tradeoff", -cfg.tol, Worst::Min, cases, |s| s < -cfg.tol)
}

fn increase_suite(cfg: &VerifyConfig) -> SuiteResult {
    let cases = trials_par(cfg.trials, |t| {
        let mut rng = cfg.rng(2, t);
        let n = rng.random_range(2..=4);
        let m = rng.random_range(2..=n);
        let instr = random_instrument_grouped(cfg.dim, n, m, &mut rng);
        if !is_informative(&effects_of(&instr), MEASUREMENT_TOL) {
            return Case::Skipped;
        }
        let search_seed = derive_seed(cfg.seed, 2, t) ^ 0x9e37_79b9;
        Case::from(fidelity_increase_search(&instr, 20, search_seed).map(|w| Some(w.increase())))
    });
    summarize("fidelity-increase", 1e-6, Worst::Min, cases, |inc| {
        inc <= 1e-6
    })
}

fn unitary_equality_suite(cfg: &VerifyConfig) -> SuiteResult {
    let cases = trials_par(cfg.trials, |t| {
        let mut rng = cfg.rng(3, t);
        let instr = random_unitary_instrument(cfg.dim, &mut rng);
        let mut run = || -> Result<Option<f64>> {
            let a = random_density_with(cfg.dim, cfg.dim, &mut rng)?;
            let b = random_pure_with(cfg.dim, &mut rng).projector();
            Ok(Some(
                monotonicity_check(&instr, &a, &b, 0)?.increase().abs(),
            ))
        };
        Case::from(run())
    });
    summarize("unitary-equality", 1e-9, Worst::Max, cases, |gap| {
        gap >= 1e-9
    })
}

fn monotonicity_suite(cfg: &VerifyConfig) -> SuiteResult {
    let per_trial = trials_par(cfg.trials, |t| {
        let mut rng = cfg.rng(4, t);
        let instr = any_instrument(cfg.dim, &mut rng);
        let rank = rng.random_range(1..=cfg.dim);
        let mut run = || -> Result<(f64, usize, usize)> {
            let a = random_pure_with(cfg.dim, &mut rng).projector();
            let b = random_density_with(cfg.dim, rank, &mut rng)?;
            let drop = -channel_monotonicity_check(&instr, &a, &b)?.increase();
            let (mut decreases, mut checked) = (0, 0);
            for k in 0..instr.n_outcomes() {
                if outcome_probability(&instr, &a, k)? > PROB_FLOOR
                    && outcome_probability(&instr, &b, k)? > PROB_FLOOR
                {
                    checked += 1;
                    if monotonicity_check(&instr, &a, &b, k)?.increase() < -cfg.tol {
                        decreases += 1;
                    }
                }
            }
            Ok((drop, decreases, checked))
        };
        run()
    });
    let (mut decreases, mut checked) = (0, 0);
    let cases = per_trial
        .into_iter()
        .map(|r| match r {
            Ok((drop, dec, chk)) => {
                decreases += dec;
                checked += chk;
                Case::Value(drop)
            }
            Err(e) => Case::Failed(e.to_string()),
        })
        .collect();
    let mut result = summarize("channel-monotonicity", cfg.tol, Worst::Max, cases, |d| {
        d > cfg.tol
    });
    if result.note.is_none() {
        result.note = Some(format!(
            "single-outcome fidelity decreased in {decreases} of {checked} (outcome, pair) cases; not a theorem, not counted"
        ));
    }
    result
}

fn no_signaling_suite(cfg: &VerifyConfig) -> SuiteResult {
    let cases = trials_par(cfg.trials, |t| {
        let mut rng = cfg.rng(5, t);
        let da = rng.random_range(1..=3);
        let mut run = || -> Result<Option<f64>> {
            let v = random_unitary(cfg.dim, &mut rng);
            let w = random_unitary(da, &mut rng);
            let init = random_pure_with(da, &mut rng);
            let model = IndirectModel::factorized(&v, &w, init, vec![(0..da).collect()])?;
            let a = random_density_with(cfg.dim, cfg.dim, &mut rng)?;
            let b = random_pure_with(cfg.dim, &mut rng).projector();
            let f = fidelity(&ancilla_output(&model, &a)?, &ancilla_output(&model, &b)?)?;
            Ok(Some((1.0 - f).abs()))
        };
        Case::from(run())
    });
    summarize("no-signaling", 1e-9, Worst::Max, cases, |gap| gap > 1e-9)
}

fn witness_suite(cfg: &VerifyConfig) -> SuiteResult {
    let cases = trials_par(cfg.trials, |t| {
        let mut rng = cfg.rng(6, t);
        let n = rng.random_range(2..=4);
        let instr = random_instrument_grouped(cfg.dim, n, n, &mut rng);
        if !is_informative(&effects_of(&instr), MEASUREMENT_TOL) {
            return Case::Skipped;
        }
        let run = || -> Result<Option<f64>> {
            let model = dilate(&instr)?;
            let wit = signaling_witness(&model, 20, derive_seed(cfg.seed, 6, t) ^ 0x51)?;
            Ok(Some(wit.fidelity))
        };
        Case::from(run())
    });
    summarize("signaling-witness", 1.0 - 1e-6, Worst::Max, cases, |f| {
        f >= 1.0 - 1e-6
    })
}

fn round_trip_suite(cfg: &VerifyConfig) -> SuiteResult {
    let cases = trials_par(cfg.trials, |t| {
        let mut rng = cfg.rng(7, t);
        let instr = any_instrument(cfg.dim, &mut rng);
        let rank = rng.random_range(1..=cfg.dim);
        let mut run = || -> Result<Option<f64>> {
            let rho = random_density_with(cfg.dim, rank, &mut rng)?;
            let model = dilate(&instr)?;
            let mut worst: f64 = 0.0;
            for k in 0..instr.n_outcomes() {
                let p_direct = outcome_probability(&instr, &rho, k)?;
                let p_model = outcome_probability_from_model(&model, &rho, k)?;
                // probability tolerance is 1e-10
                worst = worst.max(10.0 * (p_direct - p_model).abs());
                if p_direct > 1e-6 {
                    let direct = conditional_output(&instr, &rho, k)?;
                    let via = conditional_from_model(&model, &rho, k)?;
                    worst = worst.max(trace_distance(&direct, &via)?);
                }
            }
            Ok(Some(worst))
        };
        Case::from(run())
    });
    summarize("dilation-round-trip", 1e-9, Worst::Max, cases, |x| {
        x >= 1e-9
    })
}

fn entropy_suite() -> SuiteResult {
    let case = Case::from(
        entropy_inequality_suite(10_001)
            .map(|r| Some(r.worst_violation().max(r.endpoint_equality_residual))),
    );
    summarize("entropy-inequalities", 1e-12, Worst::Max, vec![case], |v| {
        v > 1e-12
    })
}

fn metric_suite(cfg: &VerifyConfig) -> SuiteResult {
    let cases = trials_par(cfg.trials, |t| {
        let mut rng = cfg.rng(8, t);
        let (r1, r2) = (rng.random_range(1..=cfg.dim), rng.random_range(1..=cfg.dim));
        let mut run = || -> Result<Option<f64>> {
            let a = random_density_with(cfg.dim, r1, &mut rng)?;
            let b = random_density_with(cfg.dim, r2, &mut rng)?;
            let f = fidelity(&a, &b)?;
            let fvdg = trace_distance(&a, &b)? - (1.0 - f).max(0.0).sqrt();
            let p = random_pure_with(cfg.dim, &mut rng);
            let q = random_pure_with(cfg.dim, &mut rng);
            let overlap = pure_overlap(&p, &q)?;
            let pure_gap = (fidelity(&p.projector(), &q.projector())? - overlap * overlap).abs();
            Ok(Some(fvdg.max(pure_gap).max(f - 1.0)))
        };
        Case::from(run())
    });
    summarize("fidelity-metrics", 1e-8, Worst::Max, cases, |x| x > 1e-8)
}

/// Runs every suite in a fixed order.
pub fn run_suites(cfg: &VerifyConfig) -> Vec<SuiteResult> {
    vec![
        tradeoff_suite(cfg),
        increase_suite(cfg),
        unitary_equality_suite(cfg),
        monotonicity_suite(cfg),
        no_signaling_suite(cfg),
        witness_suite(cfg),
        round_trip_suite(cfg),
        entropy_suite(),
        metric_suite(cfg),
    ]
}
