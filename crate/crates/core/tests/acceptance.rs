//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits nonzero if any fails.

use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use approx::abs_diff_eq;
use num_complex::Complex64;
use sha2::{Digest, Sha256};

use seqdisc::b92::{eve_knowledge_rate, run_session, Eve, Mode, SessionConfig};
use seqdisc::linalg::{ComplexMatrix, ComplexVector};
use seqdisc::mc::sigma_distance;
use seqdisc::neumark::{build_dilation, dilation_statistics, povm_equivalence};
use seqdisc::sequential::{
    build_chain, optimize_two_observer, schedule_joint_success, simulate_chain, TallyReport,
};
use seqdisc::states::make_state_pair;
use seqdisc::strategies::{at_least_one, make_curve, simulate_strategy, StrategyKind};
use seqdisc::ud_povm::{build_intermediate_ud, build_optimal_ud, Outcome, UdMeasurement};
use seqdisc::{Constraint, Error};

const MC_TRIALS: u64 = 1_000_000;
const SIGMAS: f64 = 4.0;

/// Monte Carlo trials run without an eavesdropper and the conclusive
/// misidentifications among them.
#[derive(Default)]
struct ZeroErrorLedger {
    trials: u64,
    errors: u64,
}

impl ZeroErrorLedger {
    fn add_tally(&mut self, r: &TallyReport) {
        self.trials += r.trials;
        self.errors += r.error_count;
    }
}

struct Verdict {
    passed: bool,
    detail: String,
}

fn verdict(passed: bool, detail: String) -> Verdict {
    Verdict { passed, detail }
}

fn failed(e: impl std::fmt::Display) -> Verdict {
    verdict(false, format!("error: {e}"))
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn central_result(ledger: &mut ZeroErrorLedger) -> Result<Verdict, Error> {
    let start = Instant::now();
    let mut worst_p: f64 = 0.0;
    let mut worst_t: f64 = 0.0;
    for k in 0..100 {
        let s = 0.01 + 0.98 * (k as f64 + 0.5) / 100.0;
        let opt = optimize_two_observer(s)?;
        worst_p = worst_p.max((opt.p_star - (1.0 - s.sqrt()).powi(2)).abs());
        worst_t = worst_t.max((opt.t_star - s.sqrt()).abs());
    }
    let mut worst_z: f64 = 0.0;
    for (i, s) in [0.1, 0.25, 0.5, 0.75].into_iter().enumerate() {
        let r = simulate_chain(&build_chain(s, 2)?, MC_TRIALS, 100 + i as u64)?;
        ledger.add_tally(&r);
        let z = sigma_distance(r.estimated_joint_probability.value, (1.0 - s.sqrt()).powi(2), r.trials);
        worst_z = worst_z.max(z);
    }
    let secs = start.elapsed().as_secs_f64();
    Ok(verdict(
        worst_p <= 1e-8 && worst_z < SIGMAS && secs < 30.0,
        format!("max |p*-(1-sqrt s)^2| = {worst_p:.2e}, max |t*-sqrt s| = {worst_t:.2e}, worst MC {worst_z:.2} sigma, {secs:.1} s"),
    ))
}

/// Eigenvalues of a 2×2 Hermitian matrix in closed form.
fn eigenvalues_2x2(m: &ComplexMatrix) -> [f64; 2] {
    let a = m.get(0, 0).re;
    let d = m.get(1, 1).re;
    let b = m.get(0, 1).norm();
    let mean = 0.5 * (a + d);
    let radius = (0.25 * (a - d).powi(2) + b * b).sqrt();
    [mean - radius, mean + radius]
}

fn frobenius_from_identity(m: &ComplexMatrix) -> f64 {
    let mut sum = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            let target = if i == j { 1.0 } else { 0.0 };
            sum += (m.get(i, j) - c(target)).norm_sqr();
        }
    }
    sum.sqrt()
}

/// Worst of completeness, positivity, zero-error and overlap-law residuals.
fn measurement_residual(m: &UdMeasurement, s: f64, q1: f64, q2: f64) -> Result<f64, Error> {
    let outcomes = [Outcome::Failure, Outcome::State1, Outcome::State2];
    let mut povm_sum = ComplexMatrix::zeros(2, 2)?;
    let mut kraus_sum = ComplexMatrix::zeros(2, 2)?;
    let mut negativity: f64 = 0.0;
    for o in outcomes {
        povm_sum = povm_sum.add(m.povm(o))?;
        let a = m.kraus(o);
        kraus_sum = kraus_sum.add(&a.adjoint().matmul(a)?)?;
        negativity = negativity.max(-eigenvalues_2x2(m.povm(o))[0]);
    }
    let completeness = frobenius_from_identity(&povm_sum).max(frobenius_from_identity(&kraus_sum));

    let pair = make_state_pair(s)?;
    let zero_error = m
        .povm(Outcome::State2)
        .expectation(&pair.psi1)?
        .norm()
        .max(m.povm(Outcome::State1).expectation(&pair.psi2)?.norm())
        .max(m.kraus(Outcome::State2).apply(&pair.psi1)?.norm_sqr())
        .max(m.kraus(Outcome::State1).apply(&pair.psi2)?.norm_sqr());

    let fail1 = m.kraus(Outcome::Failure).apply(&pair.psi1)?.normalized()?;
    let fail2 = m.kraus(Outcome::Failure).apply(&pair.psi2)?.normalized()?;
    let overlap: Complex64 = fail1
        .entries()
        .iter()
        .zip(fail2.entries())
        .map(|(a, b)| a.conj() * b)
        .sum();
    let overlap_law = (overlap.norm() - s / (q1 * q2).sqrt()).abs();

    Ok(completeness.max(negativity).max(zero_error).max(overlap_law))
}

fn constraint_law() -> Result<Verdict, Error> {
    let mut built = 0;
    let mut rejected = 0;
    let mut worst: f64 = 0.0;
    let mut misclassified = Vec::new();
    for m10 in [1u64, 3, 5, 7, 9] {
        let s = m10 as f64 / 10.0;
        let pair = make_state_pair(s)?;
        for a in 1..=50u64 {
            for b in 1..=50u64 {
                let (q1, q2) = (a as f64 / 50.0, b as f64 / 50.0);
                // q1 q2 >= s² decided in exact integers
                let admissible = a * b >= 25 * m10 * m10;
                match build_intermediate_ud(&pair, q1, q2) {
                    Ok(m) if admissible => {
                        built += 1;
                        let r = measurement_residual(&m, s, q1, q2)?;
                        worst = worst.max(r);
                        if !m.validate().passed() {
                            misclassified.push(format!("diagnostics fail at s={s} q=({q1},{q2})"));
                        }
                    }
                    Err(Error::ConstraintViolation {
                        constraint: Constraint::FailurePositivity,
                        ..
                    }) if !admissible => rejected += 1,
                    other => misclassified.push(format!("s={s} q=({q1},{q2}): {:?}", other.map(|_| ()))),
                }
            }
        }
    }
    Ok(verdict(
        worst <= 1e-10 && misclassified.is_empty(),
        format!(
            "{built} builds, worst residual {worst:.2e}; {rejected} rejections; {} misclassified{}",
            misclassified.len(),
            misclassified.first().map(|m| format!(" (first: {m})")).unwrap_or_default()
        ),
    ))
}

fn zero_error(ledger: &ZeroErrorLedger) -> Verdict {
    verdict(
        ledger.trials >= 10_000_000 && ledger.errors == 0,
        format!("{} conclusive errors in {} trials", ledger.errors, ledger.trials),
    )
}

fn four_strategies(ledger: &mut ZeroErrorLedger) -> Result<Verdict, Error> {
    let curve = make_curve(0.0, 1.0, 1002)?;
    let inside = curve.s_grid.iter().filter(|&&s| s > 0.0 && s < 1.0).count();
    let mut formula_gap: f64 = 0.0;
    let mut analytic_gap: f64 = 0.0;
    for (i, &s) in curve.s_grid.iter().enumerate() {
        let oracle = [(1.0 - s.sqrt()).powi(2), 1.0 - s, (1.0 - s).powi(2), (1.0 - s).powi(2) / (1.0 + s)];
        let lib = [curve.p_seq[i], curve.p1[i], curve.p2[i], curve.p3[i]];
        for (o, l) in oracle.iter().zip(lib) {
            formula_gap = formula_gap.max((o - l).abs());
        }
        // at least one party succeeds: announce and resend hinge on Bob,
        // cloning on the cloner and either copy, the chain on either stage
        let either = [
            1.0 - s,
            1.0 - s,
            (1.0 - s * s) / (1.0 + s),
            1.0 - s.sqrt() * s.sqrt(),
            at_least_one(s)?,
            curve.at_least_one[i],
        ];
        for e in either {
            analytic_gap = analytic_gap.max((e - (1.0 - s)).abs());
        }
        if s > 0.0 && s < 1.0 {
            analytic_gap = analytic_gap.max((build_chain(s, 2)?.analytic_at_least_one() - (1.0 - s)).abs());
        }
    }
    let expected = [
        (StrategyKind::Announce, 0.75),
        (StrategyKind::Resend, 0.5625),
        (StrategyKind::Clone, 0.45),
        (StrategyKind::Sequential, 0.25),
    ];
    let mut closed_ok = true;
    let mut worst_z: f64 = 0.0;
    for (i, (kind, value)) in expected.into_iter().enumerate() {
        closed_ok &= abs_diff_eq!(kind.closed_form(0.25)?, value, epsilon = 1e-12);
        let r = simulate_strategy(kind, 0.25, MC_TRIALS, 200 + i as u64)?;
        ledger.add_tally(&r);
        worst_z = worst_z
            .max(sigma_distance(r.estimated_joint_probability.value, value, r.trials))
            .max(sigma_distance(r.estimated_at_least_one_probability.value, 0.75, r.trials));
    }
    let ordered = curve.strictly_ordered_inside();
    Ok(verdict(
        inside == 1000 && ordered && formula_gap < 1e-12 && closed_ok && analytic_gap < 1e-12 && worst_z < SIGMAS,
        format!(
            "{inside} interior points strictly ordered: {ordered}; closed forms at s=0.25 exact: {closed_ok}; \
             at-least-one gap {analytic_gap:.1e}; worst MC {worst_z:.2} sigma"
        ),
    ))
}

/// `(1 − s/t₁)(1 − t₁/t₂)(1 − t₂)`, three observers with equal failure per
/// stage.
fn three_stage(s: f64, t1: f64, t2: f64) -> f64 {
    (1.0 - s / t1) * (1.0 - t1 / t2) * (1.0 - t2)
}

fn n_observer_law(ledger: &mut ZeroErrorLedger) -> Result<Verdict, Error> {
    let chain = build_chain(0.729, 3)?;
    let r = simulate_chain(&chain, MC_TRIALS, 300)?;
    ledger.add_tally(&r);
    let z = sigma_distance(r.estimated_joint_probability.value, 0.001, r.trials);

    const N: usize = 500;
    let mut worst_excess = f64::NEG_INFINITY;
    let mut library_gap: f64 = 0.0;
    for s in [0.05, 0.1, 0.25, 0.5, 0.729, 0.9] {
        let bound = (1.0 - f64::powf(s, 1.0 / 3.0)).powi(3);
        let mut best: f64 = 0.0;
        for i in 0..=N {
            let t1 = s + (1.0 - s) * i as f64 / N as f64;
            for j in 0..=N {
                let t2 = t1 + (1.0 - t1) * j as f64 / N as f64;
                let p = three_stage(s, t1, t2);
                best = best.max(p);
                if i % 50 == 0 && j % 50 == 0 {
                    library_gap = library_gap.max((schedule_joint_success(s, &[t1, t2])? - p).abs());
                }
            }
        }
        worst_excess = worst_excess.max(best - bound);
    }
    Ok(verdict(
        z < SIGMAS && worst_excess <= 1e-6 && library_gap < 1e-12,
        format!(
            "n=3 s=0.729 estimate {:.5} ({z:.2} sigma from 0.001); best grid schedule exceeds bound by {worst_excess:.2e}",
            r.estimated_joint_probability.value
        ),
    ))
}

fn neumark_equivalence() -> Result<Verdict, Error> {
    let mut unitarity: f64 = 0.0;
    let mut equivalence: f64 = 0.0;
    let mut forbidden: f64 = 0.0;
    let mut action: f64 = 0.0;
    for k in 1..=50 {
        let s = k as f64 / 51.0;
        let d = build_dilation(s)?;
        let mut gram: f64 = 0.0;
        for i in 0..6 {
            for j in 0..6 {
                let dot: Complex64 = (0..6).map(|r| d.u.get(r, i).conj() * d.u.get(r, j)).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                gram += (dot - c(target)).norm_sqr();
            }
        }
        unitarity = unitarity.max(gram.sqrt());
        let q = s.sqrt();
        let meas = build_intermediate_ud(&make_state_pair(s)?, q, q)?;
        equivalence = equivalence.max(povm_equivalence(&d, &meas)?);
        forbidden = forbidden
            .max(dilation_statistics(&d, 1)?.probabilities[2])
            .max(dilation_statistics(&d, 2)?.probabilities[1]);

        // U|ψᵢ⟩|0⟩ = |φᵢ⟩(√q|0⟩ + √(1−q)|i⟩)
        let inputs = make_state_pair(s)?;
        let outputs = make_state_pair(q)?;
        for i in 1..=2 {
            let mut ancilla = [0.0; 3];
            ancilla[0] = q.sqrt();
            ancilla[i] = (1.0 - q).sqrt();
            let expected = outputs.state(i)?.kron(&ComplexVector::from_real(&ancilla)?)?;
            let joint = inputs.state(i)?.kron(&ComplexVector::basis(3, 0)?)?;
            action = action.max(d.u.apply(&joint)?.max_abs_diff(&expected)?);
        }
    }
    Ok(verdict(
        unitarity < 1e-10 && equivalence < 1e-10 && forbidden < 1e-12 && action < 1e-10,
        format!(
            "max unitarity {unitarity:.1e}, equivalence {equivalence:.1e}, forbidden outcome {forbidden:.1e}, action {action:.1e}"
        ),
    ))
}

struct EveOracle {
    eve_known: f64,
    errors_bob: f64,
    errors_charlie: f64,
}

fn conclusive(o: Outcome) -> Option<usize> {
    match o {
        Outcome::State1 => Some(1),
        Outcome::State2 => Some(2),
        Outcome::Failure => None,
    }
}

/// Enumerates Eve's outcome tree and the receivers' outcomes exactly.
fn eve_oracle(s: f64, mode: Mode) -> Result<EveOracle, Error> {
    let pair = make_state_pair(s)?;
    let optimal = build_optimal_ud(&pair)?;
    let chain = build_chain(s, 2)?;
    let (bob_stage, charlie_stage) = (&chain.stages()[0], &chain.stages()[1]);
    let outcomes = [Outcome::Failure, Outcome::State1, Outcome::State2];
    let mut oracle = EveOracle {
        eve_known: 0.0,
        errors_bob: 0.0,
        errors_charlie: 0.0,
    };
    for bit in 1..=2 {
        let psi = pair.state(bit)?;
        let eve_probs = optimal.outcome_probabilities(psi)?;
        // (probability, forwarded index, Eve learned the bit)
        let mut forwarded: Vec<(f64, usize, bool)> = Vec::new();
        let attempts: Vec<(f64, Option<usize>)> = match mode {
            Mode::OneQubitSequential => outcomes.iter().map(|&o| (eve_probs[o.label()], conclusive(o))).collect(),
            Mode::TwoQubit => outcomes
                .iter()
                .flat_map(|&a| outcomes.iter().map(move |&b| (a, b)))
                .map(|(a, b)| (eve_probs[a.label()] * eve_probs[b.label()], conclusive(a).or(conclusive(b))))
                .collect(),
        };
        for (p, found) in attempts {
            match found {
                Some(k) => forwarded.push((p, k, true)),
                None => {
                    forwarded.push((0.5 * p, 1, false));
                    forwarded.push((0.5 * p, 2, false));
                }
            }
        }
        for (p, k, knows) in forwarded {
            let weight = 0.5 * p;
            if knows {
                oracle.eve_known += weight;
            }
            let sent = pair.state(k)?;
            match mode {
                Mode::TwoQubit => {
                    let probs = optimal.outcome_probabilities(sent)?;
                    let wrong = if bit == 1 { Outcome::State2 } else { Outcome::State1 };
                    oracle.errors_bob += weight * probs[wrong.label()];
                    oracle.errors_charlie += weight * probs[wrong.label()];
                }
                Mode::OneQubitSequential => {
                    for b in outcomes {
                        let after_bob = bob_stage.kraus(b).apply(sent)?;
                        let p_bob = after_bob.norm_sqr();
                        if conclusive(b).is_some_and(|x| x != bit) {
                            oracle.errors_bob += weight * p_bob;
                        }
                        for c_out in outcomes {
                            if conclusive(c_out).is_some_and(|x| x != bit) {
                                oracle.errors_charlie += weight * charlie_stage.kraus(c_out).apply(&after_bob)?.norm_sqr();
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(oracle)
}

fn b92_scenarios(ledger: &mut ZeroErrorLedger) -> Result<Verdict, Error> {
    let mut worst_sift: f64 = 0.0;
    let mut worst_eve: f64 = 0.0;
    let mut worst_err: f64 = 0.0;
    let mut worst_closed: f64 = 0.0;
    let mut errors_positive = true;
    let mut seed = 400;
    for mode in [Mode::TwoQubit, Mode::OneQubitSequential] {
        for s in [0.1, 0.25, 0.5, 0.75] {
            seed += 1;
            let cfg = SessionConfig {
                s,
                rounds: MC_TRIALS,
                mode,
                eve: Eve::None,
                seed,
            };
            let r = run_session(&cfg)?;
            ledger.trials += r.rounds;
            ledger.errors += r.errors_bob + r.errors_charlie;
            let expected = match mode {
                Mode::TwoQubit => (1.0 - s).powi(2),
                Mode::OneQubitSequential => (1.0 - s.sqrt()).powi(2),
            };
            worst_sift = worst_sift.max(sigma_distance(r.rates.both_sifted.value, expected, r.rounds));
        }
        for s in [0.25, 0.5, 0.75] {
            seed += 1;
            let cfg = SessionConfig {
                s,
                rounds: MC_TRIALS,
                mode,
                eve: Eve::InterceptUd,
                seed,
            };
            let r = run_session(&cfg)?;
            let closed = eve_knowledge_rate(&cfg)?;
            let oracle = eve_oracle(s, mode)?;
            worst_closed = worst_closed.max((oracle.eve_known - closed).abs());
            worst_eve = worst_eve.max(sigma_distance(r.rates.eve_known.value, closed, r.rounds));
            worst_err = worst_err
                .max(sigma_distance(r.rates.errors_bob.value, oracle.errors_bob, r.rounds))
                .max(sigma_distance(r.rates.errors_charlie.value, oracle.errors_charlie, r.rounds));
            errors_positive &= r.errors_bob > 0 && oracle.errors_bob > 0.0;
        }
    }
    Ok(verdict(
        worst_sift < SIGMAS && worst_eve < SIGMAS && worst_err < SIGMAS && errors_positive && worst_closed < 1e-12,
        format!(
            "worst sift {worst_sift:.2} sigma, Eve knowledge {worst_eve:.2} sigma, error rates {worst_err:.2} sigma; \
             oracle vs closed-form knowledge {worst_closed:.1e}; errors present: {errors_positive}"
        ),
    ))
}

fn file_hash(path: &Path) -> String {
    let bytes = fs::read(path).unwrap_or_default();
    Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn determinism() -> Result<Verdict, String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let config = dir.path().join("session.json");
    fs::write(
        &config,
        r#"{"s": 0.3, "rounds": 200000, "mode": "one_qubit_sequential", "eve": "intercept_ud", "seed": 12}"#,
    )
    .map_err(|e| e.to_string())?;
    let config = config.to_str().unwrap().to_string();

    let commands: Vec<(Vec<&str>, Option<&str>)> = vec![
        (vec!["optimize", "--s", "0.3", "--n", "4"], None),
        (vec!["optimize", "--s", "0.3", "--format", "csv"], None),
        (vec!["curves", "--steps", "201"], Some("--svg")),
        (vec!["simulate", "--kind", "1", "--s", "0.4", "--trials", "300000", "--seed", "17"], None),
        (vec!["simulate", "--kind", "2", "--s", "0.4", "--trials", "300000", "--seed", "17"], None),
        (vec!["simulate", "--kind", "3", "--s", "0.4", "--trials", "300000", "--seed", "17"], None),
        (vec!["simulate", "--kind", "seq", "--s", "0.4", "--n", "4", "--trials", "300000", "--seed", "17"], None),
        (vec!["neumark", "--s", "0.6"], Some("--matrix")),
        (vec!["b92", "--config", &config], None),
        (vec!["b92", "--config", &config, "--mode", "two_qubit", "--seed", "5"], None),
    ];
    let mut files = 0;
    let mut mismatches = Vec::new();
    for (idx, (args, side_flag)) in commands.iter().enumerate() {
        let mut hashes = Vec::new();
        for rep in 0..2 {
            let out = dir.path().join(format!("out-{idx}-{rep}"));
            let side = dir.path().join(format!("side-{idx}-{rep}"));
            let mut cmd = Command::new(env!("CARGO_BIN_EXE_seqdisc"));
            cmd.args(args).arg("--out").arg(&out);
            if let Some(flag) = side_flag {
                cmd.arg(flag).arg(&side);
            }
            let status = cmd.output().map_err(|e| e.to_string())?;
            if !status.status.success() {
                return Err(format!("`{}` failed: {}", args.join(" "), String::from_utf8_lossy(&status.stderr)));
            }
            let mut h = vec![file_hash(&out)];
            if side_flag.is_some() {
                h.push(file_hash(&side));
            }
            hashes.push(h);
        }
        files += hashes[0].len();
        if hashes[0] != hashes[1] {
            mismatches.push(args.join(" "));
        }
    }
    Ok(verdict(
        mismatches.is_empty(),
        format!(
            "{} commands, {files} files compared by SHA-256; mismatches: {}",
            commands.len(),
            if mismatches.is_empty() { "none".to_string() } else { mismatches.join("; ") }
        ),
    ))
}

fn main() {
    let start = Instant::now();
    let mut ledger = ZeroErrorLedger::default();
    // the zero-error tally accumulates over the Monte Carlo criteria, so
    // criterion 3 is judged after them
    let mut results: Vec<(u8, &str, Verdict)> = vec![
        (1, "central result", central_result(&mut ledger).unwrap_or_else(failed)),
        (2, "constraint law", constraint_law().unwrap_or_else(failed)),
        (4, "four-strategy comparison", four_strategies(&mut ledger).unwrap_or_else(failed)),
        (5, "n-observer law", n_observer_law(&mut ledger).unwrap_or_else(failed)),
        (6, "Neumark equivalence", neumark_equivalence().unwrap_or_else(failed)),
        (7, "B92 scenarios", b92_scenarios(&mut ledger).unwrap_or_else(failed)),
    ];
    results.push((3, "zero-error property", zero_error(&ledger)));
    results.push((8, "CLI determinism", determinism().unwrap_or_else(failed)));
    results.sort_by_key(|r| r.0);

    println!();
    for (n, name, v) in &results {
        println!("criterion {n} {name}: {} ({})", if v.passed { "PASS" } else { "FAIL" }, v.detail);
    }
    let failures = results.iter().filter(|r| !r.2.passed).count();
    println!(
        "acceptance: {} of {} criteria passed in {:.1} s",
        results.len() - failures,
        results.len(),
        start.elapsed().as_secs_f64()
    );
    if failures > 0 {
        std::process::exit(1);
    }
}
