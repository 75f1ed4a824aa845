//! Three-outcome unambiguous discrimination measurements on a qubit.
//!
//! A measurement is stored as its Kraus operators `A₀, A₁, A₂` together with
//! the POVM elements they induce. Conclusive outcome `1` only fires on
//! `|ψ₁⟩` and outcome `2` only on `|ψ₂⟩`; outcome `0` is the inconclusive
//! one. Both the success and failure branches for input `|ψᵢ⟩` leave the
//! qubit in the same state `|φᵢ⟩`, so a later observer still faces a
//! two-state discrimination problem with overlap `t = s/√(q₁q₂)`.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Constraint, Error, Result};
use crate::linalg::{hermitian_eigenvalues, is_positive_semidefinite, ComplexMatrix, ComplexVector, DEFAULT_TOL};
use crate::states::{check_interior_overlap, make_state_pair, real_overlap, StatePair};

/// Measurement outcome label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Outcome {
    Failure,
    State1,
    State2,
}

impl Outcome {
    /// Order in which `[0, 1)` is partitioned when sampling.
    pub const SAMPLING_ORDER: [Outcome; 3] = [Outcome::State1, Outcome::State2, Outcome::Failure];

    pub fn label(self) -> usize {
        match self {
            Outcome::Failure => 0,
            Outcome::State1 => 1,
            Outcome::State2 => 2,
        }
    }

    /// The conclusive outcome naming `|ψᵢ⟩`.
    pub fn identifying(index: usize) -> Result<Self> {
        match index {
            1 => Ok(Outcome::State1),
            2 => Ok(Outcome::State2),
            other => Err(Error::InvalidInputIndex(other)),
        }
    }

    pub fn is_conclusive(self) -> bool {
        self != Outcome::Failure
    }
}

#[derive(Debug, Clone)]
pub struct UdMeasurement {
    /// `A₀, A₁, A₂`, indexed by outcome label.
    kraus: [ComplexMatrix; 3],
    /// `Π₀, Π₁, Π₂`, indexed by outcome label.
    povm: [ComplexMatrix; 3],
    input_pair: StatePair,
    output_pair: StatePair,
    q1: f64,
    q2: f64,
    c1: f64,
    c2: f64,
    a1: f64,
    a2: f64,
}

fn check_failure_probability(name: &'static str, q: f64) -> Result<()> {
    if !(q > 0.0 && q <= 1.0) {
        return Err(Error::invalid(name, format!("{q} is outside (0, 1]")));
    }
    Ok(())
}

/// Intermediate measurement with failure probabilities `q₁, q₂`.
///
/// Requires `q₁q₂ ≥ s²`. At equality the output overlap is 1 and nothing is
/// left for a later observer.
pub fn build_intermediate_ud(pair: &StatePair, q1: f64, q2: f64) -> Result<UdMeasurement> {
    let s = pair.s;
    check_interior_overlap(s)?;
    check_failure_probability("q1", q1)?;
    check_failure_probability("q2", q2)?;
    let product = q1 * q2;
    if product < s * s * (1.0 - DEFAULT_TOL) {
        return Err(Error::ConstraintViolation {
            constraint: Constraint::FailurePositivity,
            detail: format!("q1*q2 = {product} < s^2 = {}", s * s),
        });
    }
    let t = (s / product.sqrt()).min(1.0);
    let output_pair = make_state_pair(t)?;
    let denom = 1.0 - s * s;
    let mut m = UdMeasurement::from_raw_coefficients(
        pair.clone(),
        output_pair,
        (1.0 - q1) / denom,
        (1.0 - q2) / denom,
        q1 / denom,
        q2 / denom,
    )?;
    m.q1 = q1;
    m.q2 = q2;
    Ok(m)
}

/// Optimal measurement: `q₁ = q₂ = s`, both post-measurement states coincide.
pub fn build_optimal_ud(pair: &StatePair) -> Result<UdMeasurement> {
    build_intermediate_ud(pair, pair.s, pair.s)
}

impl UdMeasurement {
    /// Assembles a measurement directly from its coefficients, without the
    /// positivity and consistency checks the builders apply.
    ///
    /// `A₁ = √c₁|φ₁⟩⟨ψ₂⊥|`, `A₂ = √c₂|φ₂⟩⟨ψ₁⊥|`,
    /// `A₀ = √a₁|φ₁⟩⟨ψ₂⊥| + √a₂|φ₂⟩⟨ψ₁⊥|` and `Π₀ = I − Π₁ − Π₂`.
    /// Failure probabilities are recovered as `qᵢ = 1 − cᵢ(1 − s²)`.
    pub fn from_raw_coefficients(
        input_pair: StatePair,
        output_pair: StatePair,
        c1: f64,
        c2: f64,
        a1: f64,
        a2: f64,
    ) -> Result<Self> {
        for (name, v) in [("c1", c1), ("c2", c2), ("a1", a1), ("a2", a2)] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::invalid(name, format!("{v} must be a finite non-negative number")));
            }
        }
        let root = |x: f64| Complex64::new(x.sqrt(), 0.0);
        let to_phi1 = ComplexMatrix::outer(&output_pair.psi1, &input_pair.psi2_perp);
        let to_phi2 = ComplexMatrix::outer(&output_pair.psi2, &input_pair.psi1_perp);

        let a_1 = to_phi1.scale(root(c1));
        let a_2 = to_phi2.scale(root(c2));
        let a_0 = to_phi1.scale(root(a1)).add(&to_phi2.scale(root(a2)))?;

        let pi_1 = a_1.adjoint().matmul(&a_1)?;
        let pi_2 = a_2.adjoint().matmul(&a_2)?;
        let pi_0 = ComplexMatrix::identity(2)?.sub(&pi_1)?.sub(&pi_2)?;

        let denom = 1.0 - input_pair.s * input_pair.s;
        Ok(Self {
            kraus: [a_0, a_1, a_2],
            povm: [pi_0, pi_1, pi_2],
            q1: 1.0 - c1 * denom,
            q2: 1.0 - c2 * denom,
            input_pair,
            output_pair,
            c1,
            c2,
            a1,
            a2,
        })
    }

    pub fn kraus(&self, outcome: Outcome) -> &ComplexMatrix {
        &self.kraus[outcome.label()]
    }

    pub fn povm(&self, outcome: Outcome) -> &ComplexMatrix {
        &self.povm[outcome.label()]
    }

    pub fn input_pair(&self) -> &StatePair {
        &self.input_pair
    }

    pub fn output_pair(&self) -> &StatePair {
        &self.output_pair
    }

    /// Overlap `s` of the states this measurement discriminates.
    pub fn input_overlap(&self) -> f64 {
        self.input_pair.s
    }

    /// Overlap `t` of the post-measurement states.
    pub fn output_overlap(&self) -> f64 {
        self.output_pair.s
    }

    pub fn failure_probabilities(&self) -> (f64, f64) {
        (self.q1, self.q2)
    }

    pub fn success_coefficients(&self) -> (f64, f64) {
        (self.c1, self.c2)
    }

    pub fn failure_coefficients(&self) -> (f64, f64) {
        (self.a1, self.a2)
    }

    /// `Tr Π₀ = 2 − c₁ − c₂`
    pub fn failure_trace(&self) -> f64 {
        2.0 - self.c1 - self.c2
    }

    /// `det Π₀ = 1 − c₁ − c₂ + c₁c₂(1 − s²)`
    pub fn failure_determinant(&self) -> f64 {
        let s = self.input_pair.s;
        1.0 - self.c1 - self.c2 + self.c1 * self.c2 * (1.0 - s * s)
    }

    /// `⟨ψ|Πⱼ|ψ⟩` for each outcome, indexed by label and clamped at zero.
    pub fn outcome_probabilities(&self, state: &ComplexVector) -> Result<[f64; 3]> {
        let mut probs = [0.0; 3];
        for (p, pi) in probs.iter_mut().zip(&self.povm) {
            *p = pi.expectation(state)?.re.max(0.0);
        }
        Ok(probs)
    }

    /// Measures `|ψᵢ⟩` using a uniform variate `rand ∈ [0, 1)`.
    ///
    /// `[0, 1)` is split into cells of width `⟨ψᵢ|Πⱼ|ψᵢ⟩` in the order
    /// `1, 2, 0`. Returns the outcome and the normalized `Aⱼ|ψᵢ⟩`.
    pub fn apply(&self, input_index: usize, rand: f64) -> Result<(Outcome, ComplexVector)> {
        let state = self.input_pair.state(input_index)?.clone();
        self.apply_to_state(&state, rand)
    }

    /// Same as [`apply`](Self::apply) for an arbitrary qubit state. Outside
    /// the declared pair the zero-error property no longer holds.
    pub fn apply_to_state(&self, state: &ComplexVector, rand: f64) -> Result<(Outcome, ComplexVector)> {
        let probs = self.outcome_probabilities(state)?;
        let mut cumulative = 0.0;
        let mut chosen = None;
        for outcome in Outcome::SAMPLING_ORDER {
            let p = probs[outcome.label()];
            if p <= 0.0 {
                continue;
            }
            cumulative += p;
            chosen = Some(outcome);
            if rand < cumulative {
                break;
            }
        }
        let outcome = chosen.ok_or_else(|| Error::invalid("state", "all outcome probabilities vanish"))?;
        let post = self.kraus(outcome).apply(state)?.normalized()?;
        Ok((outcome, post))
    }

    /// Residuals of every structural property the measurement should have.
    pub fn validate(&self) -> Diagnostics {
        self.validate_with_tol(DEFAULT_TOL)
    }

    pub fn validate_with_tol(&self, tol: f64) -> Diagnostics {
        let identity = ComplexMatrix::identity(2).expect("2x2 identity");
        let sum = self.povm.iter().fold(ComplexMatrix::zeros(2, 2).expect("2x2"), |acc, pi| {
            acc.add(pi).expect("2x2 sum")
        });
        let completeness_residual = sum.sub(&identity).expect("2x2").frobenius_norm();

        let kraus_gap = |j: usize| {
            let induced = self.kraus[j].adjoint().matmul(&self.kraus[j]).expect("2x2");
            self.povm[j].sub(&induced).expect("2x2").frobenius_norm()
        };
        let kraus_residuals = [kraus_gap(1), kraus_gap(2)];
        let consistency_gap = kraus_gap(0);

        let min_eigenvalues = self.povm.clone().map(|pi| {
            hermitian_eigenvalues(&pi, f64::INFINITY)
                .map(|v| v[0])
                .unwrap_or(f64::NAN)
        });
        let failure_positive = is_positive_semidefinite(&self.povm[0], tol).unwrap_or(false);

        let psi1 = &self.input_pair.psi1;
        let psi2 = &self.input_pair.psi2;
        let expect = |j: usize, v: &ComplexVector| self.povm[j].expectation(v).map(|z| z.re).unwrap_or(f64::NAN);
        let zero_error_residuals = [expect(2, psi1).abs(), expect(1, psi2).abs()];
        let success_residuals = [
            (expect(1, psi1) - (1.0 - self.q1)).abs(),
            (expect(2, psi2) - (1.0 - self.q2)).abs(),
        ];

        let t_measured = real_overlap(&self.output_pair.psi1, &self.output_pair.psi2);
        let t_law = self.input_pair.s / (self.q1 * self.q2).sqrt();
        let overlap_residual = (t_measured - t_law).abs();

        let det_numeric = self.povm[0].det2().map(|z| z.re).unwrap_or(f64::NAN);
        Diagnostics {
            tol,
            completeness_residual,
            kraus_residuals,
            consistency_gap,
            min_eigenvalues,
            failure_positive,
            failure_trace: self.failure_trace(),
            failure_determinant: self.failure_determinant(),
            failure_determinant_numeric: det_numeric,
            zero_error_residuals,
            success_residuals,
            overlap_residual,
            saturated: self.failure_determinant().abs() <= tol,
        }
    }
}

/// Output of [`UdMeasurement::validate`].
#[derive(Debug, Clone, Serialize)]
pub struct Diagnostics {
    pub tol: f64,
    /// `‖Π₀ + Π₁ + Π₂ − I‖_F`
    pub completeness_residual: f64,
    /// `‖Πⱼ − Aⱼ†Aⱼ‖_F` for `j = 1, 2`.
    pub kraus_residuals: [f64; 2],
    /// `‖Π₀ − A₀†A₀‖_F`; nonzero when `q₁q₂ ≠ s²/t²`.
    pub consistency_gap: f64,
    /// Smallest eigenvalue of `Π₀, Π₁, Π₂`.
    pub min_eigenvalues: [f64; 3],
    /// Trace/determinant positivity of `Π₀`.
    pub failure_positive: bool,
    pub failure_trace: f64,
    pub failure_determinant: f64,
    pub failure_determinant_numeric: f64,
    /// `⟨ψ₁|Π₂|ψ₁⟩` and `⟨ψ₂|Π₁|ψ₂⟩`.
    pub zero_error_residuals: [f64; 2],
    /// `|⟨ψᵢ|Πᵢ|ψᵢ⟩ − (1 − qᵢ)|`
    pub success_residuals: [f64; 2],
    /// `|⟨φ₁|φ₂⟩ − s/√(q₁q₂)|`
    pub overlap_residual: f64,
    /// `det Π₀ = 0`: the measurement exhausts the available information.
    pub saturated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub value: f64,
    pub passed: bool,
}

impl Diagnostics {
    pub fn checks(&self) -> Vec<Check> {
        let tol = self.tol;
        let small = |name, value: f64| Check {
            name,
            value,
            passed: value.abs() <= tol,
        };
        let floor = |name, value: f64| Check {
            name,
            value,
            passed: value >= -tol,
        };
        vec![
            small("completeness", self.completeness_residual),
            small("kraus_1", self.kraus_residuals[0]),
            small("kraus_2", self.kraus_residuals[1]),
            small("consistency", self.consistency_gap),
            floor("positivity_0", self.min_eigenvalues[0]),
            floor("positivity_1", self.min_eigenvalues[1]),
            floor("positivity_2", self.min_eigenvalues[2]),
            floor("failure_trace", self.failure_trace),
            floor("failure_determinant", self.failure_determinant),
            small("zero_error_1", self.zero_error_residuals[0]),
            small("zero_error_2", self.zero_error_residuals[1]),
            small("success_1", self.success_residuals[0]),
            small("success_2", self.success_residuals[1]),
            small("overlap_law", self.overlap_residual),
        ]
    }

    pub fn passed(&self) -> bool {
        self.failure_positive && self.checks().iter().all(|c| c.passed)
    }
}
