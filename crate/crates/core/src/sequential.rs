//! Chains of observers measuring the same qubit one after another.
//!
//! Observer `k` discriminates the two states left behind by observer
//! `k − 1`; each intermediate measurement raises the overlap, and the last
//! observer measures optimally so the final overlap is 1.
//!
//! With equal failure probabilities a stage taking overlap `u` to `v` has
//! `q = u/v`, so a chain with overlaps `s = u₀ < u₁ < … < uₙ = 1` succeeds
//! for every observer with probability `∏ₖ (1 − uₖ₋₁/uₖ)`. The geometric
//! schedule `uₖ = s^{(n−k)/n}` gives every stage `q = s^{1/n}` and the
//! joint success `(1 − s^{1/n})ⁿ`. Only that optimum is known in closed
//! form; the schedule producing it is a reconstruction and is checked
//! against a brute-force search over schedules in the tests.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Constraint, Error, Result};
use crate::linalg::DEFAULT_TOL;
use crate::mc::{run_trials, Estimate, Tally};
use crate::states::{check_interior_overlap, check_overlap, make_state_pair};
use crate::ud_povm::{build_intermediate_ud, Outcome, UdMeasurement};

/// Lower/upper offset of the optimizer bracket from `[s, 1]`.
pub const BRACKET_EPS: f64 = 1e-9;
pub const MAX_GOLDEN_ITERATIONS: usize = 200;
pub const GOLDEN_WIDTH_TOL: f64 = 1e-12;

/// Average joint success of Bob then Charlie with equal priors.
///
/// `q_bob` and `q_charlie` are `(q₁, q₂)` for each observer. The
/// intermediate overlap is read off Charlie's constraint `q₁ᶜq₂ᶜ = t²`;
/// Bob's product must then equal `s²/t²`.
pub fn joint_success_analytic(s: f64, q_bob: (f64, f64), q_charlie: (f64, f64)) -> Result<f64> {
    check_overlap(s)?;
    for (name, q) in [
        ("q_bob.1", q_bob.0),
        ("q_bob.2", q_bob.1),
        ("q_charlie.1", q_charlie.0),
        ("q_charlie.2", q_charlie.1),
    ] {
        if !(0.0..=1.0).contains(&q) {
            return Err(Error::invalid(name, format!("{q} is outside [0, 1]")));
        }
    }
    let t = (q_charlie.0 * q_charlie.1).sqrt();
    if t < s - DEFAULT_TOL || t > 1.0 + DEFAULT_TOL {
        return Err(Error::ConstraintViolation {
            constraint: Constraint::OverlapRange,
            detail: format!("t = {t} from Charlie's failure probabilities is outside [{s}, 1]"),
        });
    }
    let bob_product = q_bob.0 * q_bob.1;
    // Bob's constraint multiplied through by t²
    if (bob_product * t * t - s * s).abs() > DEFAULT_TOL {
        return Err(Error::ConstraintViolation {
            constraint: Constraint::BobOverlap,
            detail: format!("q1B*q2B = {bob_product} but s^2/t^2 = {}", s * s / (t * t)),
        });
    }
    Ok(0.5 * ((1.0 - q_bob.0) * (1.0 - q_charlie.0) + (1.0 - q_bob.1) * (1.0 - q_charlie.1)))
}

/// Golden-section search for the maximum of a unimodal `f` on `[a, b]`.
///
/// Returns `(x, f(x), iterations)`, stopping once the bracket is narrower
/// than `width_tol` or after `max_iterations` shrinks.
pub fn golden_section_maximize(
    f: impl Fn(f64) -> f64,
    mut a: f64,
    mut b: f64,
    width_tol: f64,
    max_iterations: usize,
) -> (f64, f64, usize) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let mut iterations = 0;
    while b - a > width_tol && iterations < max_iterations {
        if f1 > f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        }
        iterations += 1;
    }
    let x = 0.5 * (a + b);
    (x, f(x), iterations)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoObserverOptimum {
    pub s: f64,
    /// Optimal intermediate overlap.
    pub t_star: f64,
    /// Common failure probability of Bob and Charlie at the optimum.
    pub q_star: f64,
    /// Maximal joint success probability.
    pub p_star: f64,
    /// `(1 − √s)²`
    pub closed_form: f64,
    pub iterations: usize,
}

/// Joint success `(1 − s/t)(1 − t)` on the equal-failure slice.
pub fn equal_failure_joint_success(s: f64, t: f64) -> f64 {
    (1.0 - s / t) * (1.0 - t)
}

/// Maximizes the two-observer joint success over `t ∈ [s, 1]`.
///
/// Golden-section search localizes the maximum; one Newton step on the
/// stationarity condition `s/t² = 1` then removes the `√ε` error golden
/// section leaves on a flat maximum.
pub fn optimize_two_observer(s: f64) -> Result<TwoObserverOptimum> {
    check_interior_overlap(s)?;
    let objective = |t: f64| equal_failure_joint_success(s, t);
    let (t_golden, _, iterations) = golden_section_maximize(
        objective,
        s + BRACKET_EPS,
        1.0 - BRACKET_EPS,
        GOLDEN_WIDTH_TOL,
        MAX_GOLDEN_ITERATIONS,
    );
    // dP/dt = s/t² − 1, d²P/dt² = −2s/t³
    let t = t_golden;
    let t_star = t - (s / (t * t) - 1.0) / (-2.0 * s / (t * t * t));
    let t_star = if t_star > s && t_star < 1.0 && objective(t_star) >= objective(t_golden) {
        t_star
    } else {
        t_golden
    };
    Ok(TwoObserverOptimum {
        s,
        t_star,
        q_star: t_star,
        p_star: objective(t_star),
        closed_form: (1.0 - s.sqrt()).powi(2),
        iterations,
    })
}

fn check_observers(n: usize) -> Result<()> {
    if n < 1 {
        return Err(Error::invalid("n", "at least one observer is required"));
    }
    Ok(())
}

/// `(1 − s^{1/n})ⁿ`, the best joint success of `n` equal-failure observers.
pub fn optimal_n_observer(s: f64, n: usize) -> Result<f64> {
    check_overlap(s)?;
    check_observers(n)?;
    Ok((1.0 - s.powf(1.0 / n as f64)).powi(n as i32))
}

/// Joint success of the chain `s → overlaps[0] → … → 1`.
///
/// `overlaps` lists the intermediate overlaps only; it must be
/// non-decreasing and lie in `[s, 1]`.
pub fn schedule_joint_success(s: f64, overlaps: &[f64]) -> Result<f64> {
    check_interior_overlap(s)?;
    let path = full_schedule(s, overlaps)?;
    Ok(path.windows(2).map(|w| 1.0 - w[0] / w[1]).product())
}

fn full_schedule(s: f64, overlaps: &[f64]) -> Result<Vec<f64>> {
    let mut path = Vec::with_capacity(overlaps.len() + 2);
    path.push(s);
    path.extend_from_slice(overlaps);
    path.push(1.0);
    for w in path.windows(2) {
        if w[1] < w[0] || w[1] > 1.0 {
            return Err(Error::ConstraintViolation {
                constraint: Constraint::OverlapRange,
                detail: format!("overlap schedule {path:?} is not non-decreasing within [s, 1]"),
            });
        }
    }
    Ok(path)
}

/// An `n`-observer chain of unambiguous measurements.
#[derive(Debug, Clone)]
pub struct ChainSpec {
    s: f64,
    stages: Vec<UdMeasurement>,
}

impl ChainSpec {
    /// Checks overlap chaining between consecutive stages and that the
    /// final stage leaves overlap 1.
    pub fn from_stages(s: f64, stages: Vec<UdMeasurement>) -> Result<Self> {
        check_interior_overlap(s)?;
        check_observers(stages.len())?;
        let mut expected = s;
        for (k, stage) in stages.iter().enumerate() {
            if (stage.input_overlap() - expected).abs() > DEFAULT_TOL {
                return Err(Error::ParameterMismatch(format!(
                    "stage {} expects overlap {} but receives {expected}",
                    k + 1,
                    stage.input_overlap()
                )));
            }
            expected = stage.output_overlap();
        }
        if (expected - 1.0).abs() > DEFAULT_TOL {
            return Err(Error::ParameterMismatch(format!(
                "last stage leaves overlap {expected}, not 1"
            )));
        }
        Ok(Self { s, stages })
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn n(&self) -> usize {
        self.stages.len()
    }

    pub fn stages(&self) -> &[UdMeasurement] {
        &self.stages
    }

    /// Probability that every observer succeeds, averaged over the prior.
    pub fn analytic_joint_success(&self) -> f64 {
        let branch = |pick: fn((f64, f64)) -> f64| -> f64 {
            self.stages
                .iter()
                .map(|m| 1.0 - pick(m.failure_probabilities()))
                .product()
        };
        0.5 * (branch(|q| q.0) + branch(|q| q.1))
    }

    /// Probability that at least one observer succeeds.
    pub fn analytic_at_least_one(&self) -> f64 {
        let branch = |pick: fn((f64, f64)) -> f64| -> f64 {
            1.0 - self
                .stages
                .iter()
                .map(|m| pick(m.failure_probabilities()))
                .product::<f64>()
        };
        0.5 * (branch(|q| q.0) + branch(|q| q.1))
    }
}

/// Chain with the geometric overlap schedule `s^{(n−k)/n}`.
pub fn build_chain(s: f64, n: usize) -> Result<ChainSpec> {
    check_interior_overlap(s)?;
    check_observers(n)?;
    let overlaps: Vec<f64> = (1..n).map(|k| s.powf((n - k) as f64 / n as f64)).collect();
    build_chain_with_schedule(s, &overlaps)
}

/// Chain through the given intermediate overlaps with equal failure
/// probabilities at every stage.
pub fn build_chain_with_schedule(s: f64, overlaps: &[f64]) -> Result<ChainSpec> {
    check_interior_overlap(s)?;
    let path = full_schedule(s, overlaps)?;
    let mut stages = Vec::with_capacity(path.len() - 1);
    for w in path.windows(2) {
        let pair = make_state_pair(w[0])?;
        let q = w[0] / w[1];
        stages.push(build_intermediate_ud(&pair, q, q)?);
    }
    ChainSpec::from_stages(s, stages)
}

/// Raw counters accumulated over trials.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Counts {
    pub trials: u64,
    pub prepared: [u64; 2],
    pub all_success: [u64; 2],
    pub observer_success: Vec<u64>,
    pub at_least_one: u64,
    pub errors: u64,
}

impl Tally for Counts {
    fn merge(&mut self, other: Self) {
        self.trials += other.trials;
        for i in 0..2 {
            self.prepared[i] += other.prepared[i];
            self.all_success[i] += other.all_success[i];
        }
        if self.observer_success.len() < other.observer_success.len() {
            self.observer_success.resize(other.observer_success.len(), 0);
        }
        for (a, b) in self.observer_success.iter_mut().zip(other.observer_success) {
            *a += b;
        }
        self.at_least_one += other.at_least_one;
        self.errors += other.errors;
    }
}

impl Counts {
    /// Records one trial. `outcomes[k]` is observer `k`'s result.
    pub fn record(&mut self, prepared: usize, outcomes: &[Outcome]) {
        if self.observer_success.len() < outcomes.len() {
            self.observer_success.resize(outcomes.len(), 0);
        }
        let target = if prepared == 1 { Outcome::State1 } else { Outcome::State2 };
        let mut all = true;
        let mut any = false;
        for (k, &o) in outcomes.iter().enumerate() {
            if o == target {
                self.observer_success[k] += 1;
                any = true;
            } else {
                all = false;
                if o.is_conclusive() {
                    self.errors += 1;
                }
            }
        }
        self.trials += 1;
        self.prepared[prepared - 1] += 1;
        if all {
            self.all_success[prepared - 1] += 1;
        }
        if any {
            self.at_least_one += 1;
        }
    }

    pub fn into_report(self, observers: usize) -> TallyReport {
        let joint = self.all_success[0] + self.all_success[1];
        let mut per_observer = self.observer_success;
        per_observer.resize(observers, 0);
        TallyReport {
            trials: self.trials,
            observers,
            prepared_counts: self.prepared,
            per_branch_success_counts: self.all_success,
            per_observer_success_counts: per_observer,
            at_least_one_success: self.at_least_one,
            error_count: self.errors,
            estimated_joint_probability: Estimate::from_counts(joint, self.trials),
            estimated_at_least_one_probability: Estimate::from_counts(self.at_least_one, self.trials),
        }
    }
}

/// Outcome statistics of a Monte Carlo run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TallyReport {
    pub trials: u64,
    pub observers: usize,
    /// How often `|ψ₁⟩` and `|ψ₂⟩` were prepared.
    pub prepared_counts: [u64; 2],
    /// Trials in which every observer identified the state, by prepared state.
    pub per_branch_success_counts: [u64; 2],
    pub per_observer_success_counts: Vec<u64>,
    pub at_least_one_success: u64,
    /// Conclusive results naming the wrong state.
    pub error_count: u64,
    pub estimated_joint_probability: Estimate,
    pub estimated_at_least_one_probability: Estimate,
}

pub(crate) fn draw_prepared(rng: &mut impl Rng) -> usize {
    if rng.random::<f64>() < 0.5 {
        1
    } else {
        2
    }
}

/// Threads a qubit through every stage of the chain, `trials` times.
pub fn simulate_chain(chain: &ChainSpec, trials: u64, seed: u64) -> Result<TallyReport> {
    if trials < 1 {
        return Err(Error::invalid("trials", "must be at least 1"));
    }
    let n = chain.n();
    let counts: Counts = run_trials(trials, seed, |rng, tally: &mut Counts| {
        let prepared = draw_prepared(rng);
        let mut state = chain.stages[0].input_pair().state(prepared)?.clone();
        let mut outcomes = Vec::with_capacity(n);
        for stage in &chain.stages {
            let (outcome, post) = stage.apply_to_state(&state, rng.random())?;
            outcomes.push(outcome);
            state = post;
        }
        tally.record(prepared, &outcomes);
        Ok::<(), Error>(())
    })?;
    Ok(counts.into_report(n))
}
