//! Neumark realization of Bob's optimal-point measurement.
//!
//! The qubit (`a`) is coupled to a qutrit ancilla (`b`) prepared in `|0⟩_b`;
//! a projective measurement of the ancilla then yields failure (`|0⟩_b`),
//! outcome 1 (`|1⟩_b`) or outcome 2 (`|2⟩_b`). For the two-observer
//! optimum `q₁ = q₂ = t = √s` the coupling is fixed on the two inputs
//! `|0⟩_a|0⟩_b` and `|1⟩_a|0⟩_b` and completed to a full unitary.
//!
//! Product-space index: `qubit * 3 + qutrit`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{complete_to_unitary, fidelity, inner_product, ComplexMatrix, ComplexVector, DEFAULT_TOL};
use crate::report::format_sig;
use crate::states::{check_interior_overlap, make_state_pair, StatePair};
use crate::ud_povm::{Outcome, UdMeasurement};

pub const ANCILLA_DIM: usize = 3;
pub const JOINT_DIM: usize = 2 * ANCILLA_DIM;

/// Probabilities below this are treated as outcomes that never occur.
const NEGLIGIBLE: f64 = 1e-20;
/// Post-states are only compared for outcomes at least this likely.
const COMPARED: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct DilationUnitary {
    pub u: ComplexMatrix,
    pub s: f64,
    /// `s = cos 2θ`
    pub theta: f64,
    /// `t = cos 2θ′` with `t = √s`
    pub theta_prime: f64,
    pub v1: ComplexVector,
    pub v2: ComplexVector,
}

fn joint_index(qubit: usize, qutrit: usize) -> usize {
    qubit * ANCILLA_DIM + qutrit
}

fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Builds the coupling unitary for overlap `s` at the optimal point.
pub fn build_dilation(s: f64) -> Result<DilationUnitary> {
    check_interior_overlap(s)?;
    let r = s.sqrt();
    let quarter = r.sqrt();
    let side = ((1.0 - r) / 2.0).sqrt();
    let v1 = ComplexVector::from_real(&[2f64.sqrt() * quarter, side, side])?
        .scale(real(1.0 / (1.0 + r).sqrt()));
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let v2 = ComplexVector::from_real(&[0.0, h, -h])?;

    let e0 = ComplexVector::basis(2, 0)?;
    let e1 = ComplexVector::basis(2, 1)?;
    // U|0⟩_a|0⟩_b
    let from_zero = e0
        .kron(&v1)?
        .scale(real(1.0 + r))
        .add(&e1.kron(&v2)?.scale(real(1.0 - r)))?
        .scale(real(1.0 / (2.0 * (1.0 + s)).sqrt()));
    // U|1⟩_a|0⟩_b
    let from_one = e0.kron(&v2)?.add(&e1.kron(&v1)?)?.scale(real(h));

    let completed = complete_to_unitary(&[from_zero, from_one])?;
    // completion puts the prescribed columns first; move them to |0,0⟩ and |1,0⟩
    let mut order = vec![2, 3, 4, 5];
    order.insert(joint_index(0, 0), 0);
    order.insert(joint_index(1, 0), 1);
    let columns: Vec<ComplexVector> = order.iter().map(|&c| completed.column(c)).collect();
    let u = ComplexMatrix::from_columns(&columns)?;

    let pair = make_state_pair(s)?;
    Ok(DilationUnitary {
        u,
        s,
        theta: pair.theta,
        theta_prime: 0.5 * r.acos(),
        v1,
        v2,
    })
}

/// Ancilla-measurement statistics for one input state.
#[derive(Debug, Clone)]
pub struct DilationStatistics {
    /// Indexed by outcome label: failure, 1, 2.
    pub probabilities: [f64; 3],
    /// Conditional qubit state per outcome; `None` when it never occurs.
    pub post_states: [Option<ComplexVector>; 3],
}

impl DilationUnitary {
    pub fn input_pair(&self) -> Result<StatePair> {
        make_state_pair(self.s)
    }

    /// Failure probability realized by the coupling, `√s`.
    pub fn failure_probability(&self) -> f64 {
        self.s.sqrt()
    }

    pub fn unitarity_residual(&self) -> Result<f64> {
        self.u.unitarity_residual()
    }

    /// `U(|ψᵢ⟩_a|0⟩_b)`
    pub fn evolve(&self, input_index: usize) -> Result<ComplexVector> {
        let pair = self.input_pair()?;
        let joint = pair.state(input_index)?.kron(&ComplexVector::basis(ANCILLA_DIM, 0)?)?;
        self.u.apply(&joint)
    }

    /// Six rows of twelve reals: real and imaginary part of each entry,
    /// interleaved, row-major.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for r in 0..JOINT_DIM {
            let cells: Vec<String> = (0..JOINT_DIM)
                .flat_map(|c| {
                    let z = self.u.get(r, c);
                    [format_sig(z.re), format_sig(z.im)]
                })
                .collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

/// Applies the coupling to `|ψᵢ⟩_a|0⟩_b` and projects the ancilla.
pub fn dilation_statistics(d: &DilationUnitary, input_index: usize) -> Result<DilationStatistics> {
    let evolved = d.evolve(input_index)?;
    let mut probabilities = [0.0; 3];
    let mut post_states: [Option<ComplexVector>; 3] = [None, None, None];
    for b in 0..ANCILLA_DIM {
        let branch = ComplexVector::new(vec![
            evolved.get(joint_index(0, b)),
            evolved.get(joint_index(1, b)),
        ])?;
        let p = branch.norm_sqr();
        probabilities[b] = p;
        if p > NEGLIGIBLE {
            post_states[b] = Some(branch.normalized()?);
        }
    }
    Ok(DilationStatistics {
        probabilities,
        post_states,
    })
}

/// Largest disagreement between the dilation and the Kraus description of
/// the same measurement: worst probability gap plus worst post-state
/// infidelity, over both inputs and all outcomes.
pub fn povm_equivalence(d: &DilationUnitary, meas: &UdMeasurement) -> Result<f64> {
    if (meas.input_overlap() - d.s).abs() > DEFAULT_TOL {
        return Err(Error::ParameterMismatch(format!(
            "measurement overlap {} differs from dilation overlap {}",
            meas.input_overlap(),
            d.s
        )));
    }
    let q = d.failure_probability();
    let (q1, q2) = meas.failure_probabilities();
    if (q1 - q).abs() > DEFAULT_TOL || (q2 - q).abs() > DEFAULT_TOL {
        return Err(Error::ParameterMismatch(format!(
            "measurement failure probabilities ({q1}, {q2}) differ from the dilation's {q}"
        )));
    }
    let pair = d.input_pair()?;
    let mut prob_gap: f64 = 0.0;
    let mut infidelity: f64 = 0.0;
    for i in 1..=2 {
        let stats = dilation_statistics(d, i)?;
        let psi = pair.state(i)?;
        let povm_probs = meas.outcome_probabilities(psi)?;
        for outcome in [Outcome::Failure, Outcome::State1, Outcome::State2] {
            let j = outcome.label();
            prob_gap = prob_gap.max((stats.probabilities[j] - povm_probs[j]).abs());
            if povm_probs[j] < COMPARED {
                continue;
            }
            let kraus_post = meas.kraus(outcome).apply(psi)?.normalized()?;
            match &stats.post_states[j] {
                Some(post) => infidelity = infidelity.max(1.0 - fidelity(post, &kraus_post)?),
                None => infidelity = 1.0,
            }
        }
    }
    Ok(prob_gap + infidelity)
}

/// `⟨v₁|v₂⟩`
pub fn ancilla_overlap(d: &DilationUnitary) -> Result<Complex64> {
    inner_product(&d.v1, &d.v2)
}
