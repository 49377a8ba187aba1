//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::process::Command;
use std::time::{Duration, Instant};

use rand::Rng;
use rayon::prelude::*;
use serde_json::Value;

use qtradeoff::dilation::{
    ancilla_output, conditional_from_model, dilate, outcome_probability_from_model,
    signaling_witness, IndirectModel,
};
use qtradeoff::discrim::{binary_entropy, entropy_inequality_suite, helstrom_error};
use qtradeoff::matcore::{c, re, ComplexMatrix};
use qtradeoff::qmeas::{
    conditional_output, effects_of, is_informative, outcome_probability, random_instrument_grouped,
    random_unitary_instrument, MEASUREMENT_TOL,
};
use qtradeoff::qstate::{
    derive_seed, fidelity, pure_overlap, random_density_with, random_pure_with, random_unitary,
    seeded_rng, trace_distance, DensityMatrix, PureState, StdRng,
};
use qtradeoff::tradeoff::{
    fidelity_increase_search, infodist_check, monotonicity_check, saturation_scan, scan_csv,
};

const SEED: u64 = 20_240_917;
const TIME_BUDGET: Duration = Duration::from_secs(60);

/// Named sub-checks of one criterion.
#[derive(Default)]
struct Checks {
    lines: Vec<(bool, String)>,
}

impl Checks {
    fn check(&mut self, ok: bool, what: impl Into<String>) {
        self.lines.push((ok, what.into()));
    }

    fn passed(&self) -> bool {
        self.lines.iter().all(|(ok, _)| *ok)
    }
}

fn rng(stream: u64, i: u64) -> StdRng {
    seeded_rng(derive_seed(SEED, stream, i))
}

fn criterion_1(c: &mut Checks) {
    let start = Instant::now();
    let n = 10_000;
    let slacks: Vec<Result<f64, String>> = (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng(1, i);
            let d = rng.random_range(2..=4);
            let k = rng.random_range(1..=4);
            let m = rng.random_range(1..=k);
            let rank = rng.random_range(1..=d);
            let instr = random_instrument_grouped(d, k, m, &mut rng);
            let rho = random_density_with(d, rank, &mut rng).map_err(|e| e.to_string())?;
            let r = infodist_check(&instr, &rho).map_err(|e| e.to_string())?;
            let recomputed =
                binary_entropy(r.p_e_opt).map_err(|e| e.to_string())? - (1.0 - r.disturbance);
            Ok(recomputed.min(r.slack))
        })
        .collect();
    let errors = slacks.iter().filter(|s| s.is_err()).count();
    let worst = slacks
        .iter()
        .filter_map(|s| s.as_ref().ok())
        .fold(f64::INFINITY, |a, &b| a.min(b));
    let elapsed = start.elapsed();
    c.check(errors == 0, format!("{n} pairs evaluated, {errors} errors"));
    c.check(worst >= -1e-9, format!("worst slack {worst:e} >= -1e-9"));
    c.check(
        elapsed <= TIME_BUDGET,
        format!("runtime {:.1}s <= 60s", elapsed.as_secs_f64()),
    );
}

fn criterion_2(c: &mut Checks) {
    let start = Instant::now();
    let mut drawn = 0u64;
    let mut instruments = Vec::new();
    while instruments.len() < 500 {
        let mut rng = rng(2, drawn);
        drawn += 1;
        let d = rng.random_range(2..=4);
        let k = rng.random_range(2..=4);
        let m = rng.random_range(2..=k);
        let instr = random_instrument_grouped(d, k, m, &mut rng);
        if is_informative(&effects_of(&instr), MEASUREMENT_TOL) {
            instruments.push((instr, drawn));
        }
    }
    let increases: Vec<f64> = instruments
        .par_iter()
        .map(|(instr, id)| {
            fidelity_increase_search(instr, 20, derive_seed(SEED, 20, *id))
                .map(|w| w.increase())
                .unwrap_or(f64::NAN)
        })
        .collect();
    let smallest = increases.iter().copied().fold(f64::INFINITY, f64::min);
    let all_found = increases.iter().all(|&x| x > 1e-6);
    c.check(
        all_found,
        format!("500 informative instruments, smallest F_out - F_in = {smallest:e} > 1e-6"),
    );

    let gaps: Vec<f64> = (0..100u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng(21, i);
            let d = rng.random_range(2..=4);
            let instr = random_unitary_instrument(d, &mut rng);
            let a = random_density_with(d, rng.random_range(1..=d), &mut rng).unwrap();
            let b = random_pure_with(d, &mut rng).projector();
            monotonicity_check(&instr, &a, &b, 0)
                .map(|p| p.increase().abs())
                .unwrap_or(f64::NAN)
        })
        .collect();
    let max_gap = gaps.iter().copied().fold(0.0, f64::max);
    let gaps_ok = gaps.iter().all(|&g| g < 1e-9);
    c.check(
        gaps_ok,
        format!("100 unitary instruments, max |F_out - F_in| = {max_gap:e} < 1e-9"),
    );
    let elapsed = start.elapsed();
    c.check(
        elapsed <= TIME_BUDGET,
        format!("runtime {:.1}s <= 60s", elapsed.as_secs_f64()),
    );
}

fn parse_matrix(v: &Value) -> Option<ComplexMatrix> {
    let rows = v.as_array()?;
    let n = rows.len();
    let mut data = Vec::with_capacity(n * n);
    for row in rows {
        for z in row.as_array()? {
            let pair = z.as_array()?;
            data.push(c(pair.first()?.as_f64()?, pair.get(1)?.as_f64()?));
        }
    }
    ComplexMatrix::new(n, n, data).ok()
}

fn criterion_3(c: &mut Checks) {
    let bin = env!("CARGO_BIN_EXE_qtradeoff");
    let out = match Command::new(bin)
        .args(["demo", "--format", "json"])
        .output()
    {
        Ok(o) => o,
        Err(e) => return c.check(false, format!("demo did not run: {e}")),
    };
    c.check(out.status.code() == Some(0), "demo exits 0");
    let report: Value = match serde_json::from_slice(&out.stdout) {
        Ok(v) => v,
        Err(e) => return c.check(false, format!("demo JSON unreadable: {e}")),
    };

    let expected_effects = [
        ComplexMatrix::from_real_diag(&[1.0, 0.0]),
        ComplexMatrix::from_real_diag(&[0.0, 1.0]),
    ];
    let effects: Vec<ComplexMatrix> = report["effects"]
        .as_array()
        .map(|a| a.iter().filter_map(parse_matrix).collect())
        .unwrap_or_default();
    let effects_ok = effects.len() == 2
        && effects
            .iter()
            .zip(&expected_effects)
            .all(|(a, b)| a.max_abs_diff(b) < 1e-12);
    c.check(effects_ok, "effects are {|0><0|, |1><1|}");

    let plus = PureState::plus().projector();
    let outputs: Vec<DensityMatrix> = report["conditional_outputs"]
        .as_array()
        .map(|a| {
            a.iter()
                .filter_map(|o| parse_matrix(&o["state"]))
                .map(DensityMatrix::new_unchecked)
                .collect()
        })
        .unwrap_or_default();
    let worst_td = outputs
        .iter()
        .map(|o| trace_distance(o, &plus).unwrap_or(f64::INFINITY))
        .fold(0.0, f64::max);
    c.check(
        outputs.len() == 2 && worst_td < 1e-10,
        format!("both conditional outputs are |+><+| (max trace distance {worst_td:e} < 1e-10)"),
    );

    let record = &report["record"];
    let f = record["fidelity"].as_f64().unwrap_or(f64::NAN);
    let p_e = record["p_e"].as_f64().unwrap_or(f64::NAN);
    let h2 = record["entropy"].as_f64().unwrap_or(f64::NAN);
    c.check((f - 0.5).abs() <= 1e-10, format!("F = {f} (0.5 +- 1e-10)"));
    let p_expected = (1.0 - FRAC_1_SQRT_2) / 2.0;
    c.check(
        (p_e - p_expected).abs() <= 1e-10,
        format!("p_e = {p_e} ((1 - 1/sqrt2)/2 = {p_expected} +- 1e-10)"),
    );
    c.check(
        (h2 - 0.60098).abs() <= 1e-4,
        format!(
            "H2(p_e) = {h2} (0.60098 +- 1e-4, off by {:.3e})",
            (h2 - 0.60098).abs()
        ),
    );
    c.check(
        record["holds"] == Value::Bool(true) && f <= h2,
        format!("bound satisfied: {f} <= {h2}"),
    );

    let text = Command::new(bin).arg("demo").output();
    let text_ok = text
        .map(|o| String::from_utf8_lossy(&o.stdout).contains("F = 0.5"))
        .unwrap_or(false);
    c.check(text_ok, "text output reports F = 0.5");
}

fn criterion_4(c: &mut Checks) {
    let results: Vec<Result<(f64, f64), String>> = (0..500u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng(4, i);
            let d = rng.random_range(2..=3);
            let k = rng.random_range(1..=4);
            let m = rng.random_range(1..=k);
            let instr = random_instrument_grouped(d, k, m, &mut rng);
            let rho = random_density_with(d, rng.random_range(1..=d), &mut rng)
                .map_err(|e| e.to_string())?;
            let model = dilate(&instr).map_err(|e| e.to_string())?;
            let (mut td, mut dp) = (0.0f64, 0.0f64);
            for k in 0..instr.n_outcomes() {
                let p = outcome_probability(&instr, &rho, k).map_err(|e| e.to_string())?;
                let p_model =
                    outcome_probability_from_model(&model, &rho, k).map_err(|e| e.to_string())?;
                dp = dp.max((p - p_model).abs());
                if p > 1e-6 {
                    let a = conditional_output(&instr, &rho, k).map_err(|e| e.to_string())?;
                    let b = conditional_from_model(&model, &rho, k).map_err(|e| e.to_string())?;
                    td = td.max(trace_distance(&a, &b).map_err(|e| e.to_string())?);
                }
            }
            Ok((td, dp))
        })
        .collect();
    let errors = results.iter().filter(|r| r.is_err()).count();
    let (td, dp) = results
        .iter()
        .filter_map(|r| r.as_ref().ok())
        .fold((0.0f64, 0.0f64), |(a, b), &(x, y)| (a.max(x), b.max(y)));
    c.check(
        errors == 0,
        format!("500 instruments dilated, {errors} errors"),
    );
    c.check(
        td < 1e-9,
        format!("max conditional-state trace distance {td:e} < 1e-9"),
    );
    c.check(dp < 1e-10, format!("max probability gap {dp:e} < 1e-10"));
}

fn criterion_5(c: &mut Checks) {
    let report = match entropy_inequality_suite(10_000) {
        Ok(r) => r,
        Err(e) => return c.check(false, format!("suite failed: {e}")),
    };
    for check in &report.checks {
        c.check(
            check.max_violation <= 1e-12,
            format!(
                "{}: max violation {:e} at {}",
                check.name, check.max_violation, check.location
            ),
        );
    }
    c.check(
        report.endpoint_equality_residual <= 1e-12,
        format!(
            "equality at p in {{0, 1/2, 1}}: residual {:e}",
            report.endpoint_equality_residual
        ),
    );
}

fn criterion_6(c: &mut Checks) {
    let mut drawn = 0u64;
    let mut worst_witness: f64 = 0.0;
    let mut found = 0;
    while found < 100 {
        let mut rng = rng(6, drawn);
        let d = rng.random_range(2..=3);
        let k = rng.random_range(2..=4);
        let instr = random_instrument_grouped(d, k, k, &mut rng);
        let seed = derive_seed(SEED, 60, drawn);
        drawn += 1;
        if !is_informative(&effects_of(&instr), MEASUREMENT_TOL) {
            continue;
        }
        found += 1;
        let f = dilate(&instr)
            .and_then(|m| signaling_witness(&m, 20, seed))
            .map(|w| w.fidelity)
            .unwrap_or(f64::NAN);
        worst_witness = if f.is_nan() { f } else { worst_witness.max(f) };
    }
    c.check(
        worst_witness < 1.0 - 1e-6,
        format!("100 informative dilations, largest witness fidelity {worst_witness} < 1 - 1e-6"),
    );

    let gaps: Vec<f64> = (0..100u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng(61, i);
            let ds = rng.random_range(2..=3);
            let da = rng.random_range(2..=3);
            let v = random_unitary(ds, &mut rng);
            let w = random_unitary(da, &mut rng);
            let init = random_pure_with(da, &mut rng);
            let Ok(model) = IndirectModel::factorized(&v, &w, init, vec![(0..da).collect()]) else {
                return f64::NAN;
            };
            let mut gap: f64 = 0.0;
            for _ in 0..5 {
                let a = random_density_with(ds, rng.random_range(1..=ds), &mut rng).unwrap();
                let b = random_pure_with(ds, &mut rng).projector();
                let f = ancilla_output(&model, &a)
                    .and_then(|oa| ancilla_output(&model, &b).and_then(|ob| fidelity(&oa, &ob)))
                    .unwrap_or(f64::NAN);
                gap = if f.is_nan() {
                    f
                } else {
                    gap.max((1.0 - f).abs())
                };
            }
            gap
        })
        .collect();
    let max_gap = gaps.iter().copied().fold(0.0, f64::max);
    c.check(
        gaps.iter().all(|&g| g <= 1e-9),
        format!("100 factorized unitaries, max |1 - F| of ancilla outputs {max_gap:e} <= 1e-9"),
    );
}

/// Best error of any projective qubit measurement with Bloch direction on
/// a `n_theta x n_phi` grid, guessing the likelier state per outcome.
fn brute_force_error(r1: &DensityMatrix, r2: &DensityMatrix, n_theta: usize, n_phi: usize) -> f64 {
    let diff = r1.matrix() - r2.matrix();
    let mut best = 0.5;
    for i in 0..n_theta {
        let theta = PI * i as f64 / (n_theta - 1) as f64;
        for j in 0..n_phi {
            let phi = 2.0 * PI * j as f64 / n_phi as f64;
            let v = [
                re((theta / 2.0).cos()),
                c(phi.cos(), phi.sin()) * (theta / 2.0).sin(),
            ];
            let p = ComplexMatrix::outer(&v, &v);
            let bias = (&p * &diff).trace().re;
            best = f64::min(best, 0.5 - 0.5 * bias.abs());
        }
    }
    best
}

fn criterion_7(c: &mut Checks) {
    let metrics: Vec<(f64, f64)> = (0..10_000u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng(7, i);
            let d = rng.random_range(2..=6);
            let a = random_density_with(d, rng.random_range(1..=d), &mut rng).unwrap();
            let b = random_density_with(d, rng.random_range(1..=d), &mut rng).unwrap();
            let f = fidelity(&a, &b).unwrap_or(f64::NAN);
            let fvdg = trace_distance(&a, &b).unwrap_or(f64::NAN) - (1.0 - f).max(0.0).sqrt();
            let p = random_pure_with(d, &mut rng);
            let q = random_pure_with(d, &mut rng);
            let overlap = pure_overlap(&p, &q).unwrap_or(f64::NAN);
            let pure_gap = (fidelity(&p.projector(), &q.projector()).unwrap_or(f64::NAN)
                - overlap * overlap)
                .abs();
            (fvdg, pure_gap)
        })
        .collect();
    let worst_fvdg = metrics
        .iter()
        .map(|m| m.0)
        .fold(f64::NEG_INFINITY, f64::max);
    let worst_pure = metrics.iter().map(|m| m.1).fold(0.0, f64::max);
    c.check(
        metrics.iter().all(|m| m.0 <= 1e-8),
        format!("Fuchs-van de Graaf on 10^4 pairs: max T - sqrt(1-F) = {worst_fvdg:e} <= 1e-8"),
    );
    c.check(
        metrics.iter().all(|m| m.1 <= 1e-8),
        format!("pure fidelity vs overlap^2 on 10^4 pairs: max gap {worst_pure:e} <= 1e-8"),
    );

    let gaps: Vec<f64> = (0..100u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng(71, i);
            let a = random_density_with(2, rng.random_range(1..=2), &mut rng).unwrap();
            let b = random_density_with(2, rng.random_range(1..=2), &mut rng).unwrap();
            let brute = brute_force_error(&a, &b, 100, 100);
            let helstrom = helstrom_error(&a, &b)
                .map(|r| r.p_error)
                .unwrap_or(f64::NAN);
            if brute < helstrom - 1e-12 {
                return f64::INFINITY;
            }
            (brute - helstrom).abs()
        })
        .collect();
    let max_gap = gaps.iter().copied().fold(0.0, f64::max);
    c.check(
        gaps.iter().all(|&g| g <= 1e-3),
        format!("Helstrom vs 10^4-point projective grid on 100 qubit pairs: max gap {max_gap:e} <= 1e-3"),
    );
}

fn criterion_8(c: &mut Checks) {
    let plus = PureState::plus().projector();
    let points = match saturation_scan(101, &plus) {
        Ok(p) => p,
        Err(e) => return c.check(false, format!("scan failed: {e}")),
    };
    let at = |eta: f64| points.iter().find(|p| (p.param - eta).abs() < 1e-12);
    match at(0.0) {
        Some(p) => c.check(
            p.record.slack.abs() <= 1e-9,
            format!("slack at eta=0: {:e}", p.record.slack),
        ),
        None => c.check(false, "no eta=0 point"),
    }
    match at(0.5) {
        Some(p) => c.check(
            p.record.slack > 1e-4,
            format!("slack at eta=0.5: {} > 1e-4", p.record.slack),
        ),
        None => c.check(false, "no eta=0.5 point"),
    }
    let failing = points.iter().filter(|p| !p.record.holds).count();
    c.check(
        failing == 0,
        format!(
            "holds at all {} grid points ({failing} failing)",
            points.len()
        ),
    );

    let bin = env!("CARGO_BIN_EXE_qtradeoff");
    let run = || {
        Command::new(bin)
            .args(["curve", "--trials", "101", "--seed", "5", "--format", "csv"])
            .output()
            .map(|o| o.stdout)
            .unwrap_or_default()
    };
    let (first, second) = (run(), run());
    c.check(
        !first.is_empty() && first == second,
        format!("CLI CSV byte-identical across runs ({} bytes)", first.len()),
    );
    c.check(
        first == scan_csv(&points).into_bytes(),
        "CLI CSV matches the library scan",
    );
}

type Criterion = (&'static str, fn(&mut Checks));

fn main() {
    let criteria: [Criterion; 8] = [
        (
            "tradeoff over 10^4 random instrument/state pairs",
            criterion_1,
        ),
        ("fidelity increase and unitary equality", criterion_2),
        ("measure-and-prepare-|+> example", criterion_3),
        ("dilation round trip", criterion_4),
        ("entropy inequality kit", criterion_5),
        ("no-signaling and its converse", criterion_6),
        ("fidelity and metric layer", criterion_7),
        ("saturation scan", criterion_8),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let mut checks = Checks::default();
        run(&mut checks);
        let status = if checks.passed() { "PASS" } else { "FAIL" };
        if !checks.passed() {
            failed += 1;
        }
        println!(
            "{status} criterion {}: {name} ({:.1}s)",
            i + 1,
            start.elapsed().as_secs_f64()
        );
        for (ok, line) in &checks.lines {
            println!("    [{}] {line}", if *ok { "ok" } else { "FAIL" });
        }
    }
    println!("{} of 8 criteria passed", 8 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
