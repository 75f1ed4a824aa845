//! The pair of non-orthogonal qubit states Alice prepares.
//!
//! States live in the computational basis as
//! `|ψ₁,₂⟩ = cos θ|0⟩ ± sin θ|1⟩` with `s = cos 2θ`, so the overlap is
//! real and non-negative. The complements carry the phases that make
//!
//! ```text
//! |ψ₂⟩  = s|ψ₁⟩ + √(1−s²)|ψ₁⊥⟩
//! |ψ₂⊥⟩ = √(1−s²)|ψ₁⟩ − s|ψ₁⊥⟩
//! ```
//!
//! hold exactly, which in this basis gives `|ψ₁⊥⟩ = (sin θ, −cos θ)` and
//! `|ψ₂⊥⟩ = (sin θ, cos θ)`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{ComplexVector, DEFAULT_TOL};

#[derive(Debug, Clone, PartialEq)]
pub struct StatePair {
    /// Real overlap `⟨ψ₁|ψ₂⟩`.
    pub s: f64,
    /// Half-angle with `s = cos 2θ`.
    pub theta: f64,
    pub psi1: ComplexVector,
    pub psi2: ComplexVector,
    pub psi1_perp: ComplexVector,
    pub psi2_perp: ComplexVector,
}

impl StatePair {
    /// `|ψ₁⟩` for index 1, `|ψ₂⟩` for index 2.
    pub fn state(&self, index: usize) -> Result<&ComplexVector> {
        match index {
            1 => Ok(&self.psi1),
            2 => Ok(&self.psi2),
            other => Err(Error::InvalidInputIndex(other)),
        }
    }
}

pub(crate) fn check_overlap(s: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&s) || s.is_nan() {
        return Err(Error::OverlapOutOfRange(s));
    }
    Ok(())
}

/// Rejects the endpoints `s = 0` and `s = 1` as well as anything outside.
pub(crate) fn check_interior_overlap(s: f64) -> Result<()> {
    check_overlap(s)?;
    if s == 0.0 || s == 1.0 {
        return Err(Error::DegenerateOverlap(s));
    }
    Ok(())
}

pub fn make_state_pair(s: f64) -> Result<StatePair> {
    check_overlap(s)?;
    let theta = 0.5 * s.acos();
    let (sin, cos) = theta.sin_cos();
    let psi1 = ComplexVector::from_real(&[cos, sin])?;
    let psi2 = ComplexVector::from_real(&[cos, -sin])?;
    let psi1_perp = orthogonal_complement(&psi1)?;
    // −orthogonal_complement(ψ₂): keeps ⟨ψ₂⊥|ψ₁⟩ = +√(1−s²)
    let psi2_perp = ComplexVector::from_real(&[sin, cos])?;
    Ok(StatePair {
        s,
        theta,
        psi1,
        psi2,
        psi1_perp,
        psi2_perp,
    })
}

/// Unit vector orthogonal to the qubit state `v = (a, b)`: `(b̄, −ā)`.
pub fn orthogonal_complement(v: &ComplexVector) -> Result<ComplexVector> {
    if v.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: v.dim(),
        });
    }
    let norm = v.norm();
    if (norm - 1.0).abs() > DEFAULT_TOL {
        return Err(Error::NotNormalized(norm));
    }
    let (a, b) = (v.get(0), v.get(1));
    ComplexVector::new(vec![b.conj(), -a.conj()])
}

/// `⟨a|b⟩` as a real number; the states built here have real amplitudes.
pub(crate) fn real_overlap(a: &ComplexVector, b: &ComplexVector) -> f64 {
    let z: Complex64 = a
        .entries()
        .iter()
        .zip(b.entries())
        .map(|(x, y)| x.conj() * y)
        .sum();
    z.re
}
