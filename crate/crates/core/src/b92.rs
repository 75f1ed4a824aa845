//! B92-style key distribution from Alice to Bob and Charlie.
//!
//! Alice's bit selects `|ψ₁⟩` or `|ψ₂⟩`. In `two_qubit` mode each receiver
//! gets its own copy and measures it with the optimal unambiguous
//! measurement; in `one_qubit_sequential` mode a single qubit passes through
//! the optimal two-observer chain. A round is sifted for a receiver when
//! their result is conclusive.
//!
//! Eve (`intercept_ud`) measures with the optimal unambiguous measurement and
//! resends the state she identified, or a uniformly random guess from the
//! pair when she fails. In `two_qubit` mode she attacks both copies; a
//! success on either copy fixes what she sends on both, and when both
//! attempts fail a single guess is sent on both. In `one_qubit_sequential`
//! mode only the Alice→Bob link is attacked.
//!
//! Report JSON fields: `rounds`, `both_sifted`, `bob_sifted`,
//! `charlie_sifted`, `eve_known`, `errors_bob`, `errors_charlie`, and
//! `rates` holding a `{value, std_error}` pair for each count.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::mc::{run_trials, Estimate, Tally};
use crate::sequential::build_chain;
use crate::states::{check_interior_overlap, make_state_pair};
use crate::ud_povm::{build_optimal_ud, Outcome};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    TwoQubit,
    OneQubitSequential,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Eve {
    None,
    InterceptUd,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::TwoQubit => "two_qubit",
            Mode::OneQubitSequential => "one_qubit_sequential",
        }
    }
}

impl Eve {
    pub fn as_str(self) -> &'static str {
        match self {
            Eve::None => "none",
            Eve::InterceptUd => "intercept_ud",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Display for Eve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "two_qubit" => Ok(Mode::TwoQubit),
            "one_qubit_sequential" => Ok(Mode::OneQubitSequential),
            other => Err(Error::invalid(
                "mode",
                format!("expected two_qubit or one_qubit_sequential, got {other:?}"),
            )),
        }
    }
}

impl FromStr for Eve {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Eve::None),
            "intercept_ud" => Ok(Eve::InterceptUd),
            other => Err(Error::invalid(
                "eve",
                format!("expected none or intercept_ud, got {other:?}"),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SessionConfig {
    pub s: f64,
    pub rounds: u64,
    pub mode: Mode,
    pub eve: Eve,
    pub seed: u64,
}

impl SessionConfig {
    pub fn validate(&self) -> Result<()> {
        check_interior_overlap(self.s).map_err(|e| Error::invalid("s", e.to_string()))?;
        if self.rounds < 1 {
            return Err(Error::invalid("rounds", "must be at least 1"));
        }
        Ok(())
    }

    /// Reads a config object. `s`, `rounds` and `mode` are required; `eve`
    /// defaults to `none` and `seed` to 0. Errors name the offending field.
    pub fn from_json(value: &Value) -> Result<Self> {
        let obj = value
            .as_object()
            .ok_or_else(|| Error::invalid("config", "expected a JSON object"))?;
        let field = |name: &'static str| obj.get(name).filter(|v| !v.is_null());
        let required = |name: &'static str| field(name).ok_or_else(|| Error::invalid(name, "missing field"));
        let text = |name: &'static str, v: &Value| -> Result<String> {
            v.as_str()
                .map(str::to_string)
                .ok_or_else(|| Error::invalid(name, "expected a string"))
        };
        let count = |name: &'static str, v: &Value| -> Result<u64> {
            v.as_u64()
                .ok_or_else(|| Error::invalid(name, "expected a non-negative integer"))
        };

        let s = required("s")?
            .as_f64()
            .ok_or_else(|| Error::invalid("s", "expected a number"))?;
        let rounds = count("rounds", required("rounds")?)?;
        let mode = text("mode", required("mode")?)?.parse()?;
        let eve = match field("eve") {
            Some(v) => text("eve", v)?.parse()?,
            None => Eve::None,
        };
        let seed = match field("seed") {
            Some(v) => count("seed", v)?,
            None => 0,
        };
        let cfg = SessionConfig {
            s,
            rounds,
            mode,
            eve,
            seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KeyRates {
    pub both_sifted: Estimate,
    pub bob_sifted: Estimate,
    pub charlie_sifted: Estimate,
    pub eve_known: Estimate,
    pub errors_bob: Estimate,
    pub errors_charlie: Estimate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KeyReport {
    pub rounds: u64,
    pub both_sifted: u64,
    pub bob_sifted: u64,
    pub charlie_sifted: u64,
    pub eve_known: u64,
    pub errors_bob: u64,
    pub errors_charlie: u64,
    pub rates: KeyRates,
}

#[derive(Debug, Default)]
struct KeyCounts {
    rounds: u64,
    both_sifted: u64,
    bob_sifted: u64,
    charlie_sifted: u64,
    eve_known: u64,
    errors_bob: u64,
    errors_charlie: u64,
}

impl Tally for KeyCounts {
    fn merge(&mut self, other: Self) {
        self.rounds += other.rounds;
        self.both_sifted += other.both_sifted;
        self.bob_sifted += other.bob_sifted;
        self.charlie_sifted += other.charlie_sifted;
        self.eve_known += other.eve_known;
        self.errors_bob += other.errors_bob;
        self.errors_charlie += other.errors_charlie;
    }
}

impl KeyCounts {
    fn record(&mut self, bit: usize, eve_knows: bool, bob: Outcome, charlie: Outcome) {
        let truth = if bit == 1 { Outcome::State1 } else { Outcome::State2 };
        self.rounds += 1;
        self.eve_known += u64::from(eve_knows);
        self.bob_sifted += u64::from(bob.is_conclusive());
        self.charlie_sifted += u64::from(charlie.is_conclusive());
        self.both_sifted += u64::from(bob.is_conclusive() && charlie.is_conclusive());
        self.errors_bob += u64::from(bob.is_conclusive() && bob != truth);
        self.errors_charlie += u64::from(charlie.is_conclusive() && charlie != truth);
    }

    fn into_report(self) -> KeyReport {
        let rate = |k| Estimate::from_counts(k, self.rounds);
        KeyReport {
            rounds: self.rounds,
            both_sifted: self.both_sifted,
            bob_sifted: self.bob_sifted,
            charlie_sifted: self.charlie_sifted,
            eve_known: self.eve_known,
            errors_bob: self.errors_bob,
            errors_charlie: self.errors_charlie,
            rates: KeyRates {
                both_sifted: rate(self.both_sifted),
                bob_sifted: rate(self.bob_sifted),
                charlie_sifted: rate(self.charlie_sifted),
                eve_known: rate(self.eve_known),
                errors_bob: rate(self.errors_bob),
                errors_charlie: rate(self.errors_charlie),
            },
        }
    }
}

fn uniform_index(rng: &mut impl Rng) -> usize {
    if rng.random::<f64>() < 0.5 {
        1
    } else {
        2
    }
}

fn identified_index(outcome: Outcome) -> Option<usize> {
    match outcome {
        Outcome::State1 => Some(1),
        Outcome::State2 => Some(2),
        Outcome::Failure => None,
    }
}

pub fn run_session(cfg: &SessionConfig) -> Result<KeyReport> {
    cfg.validate()?;
    let pair = make_state_pair(cfg.s)?;
    let optimal = build_optimal_ud(&pair)?;
    let chain = build_chain(cfg.s, 2)?;
    let (bob_stage, charlie_stage) = (&chain.stages()[0], &chain.stages()[1]);

    let counts: KeyCounts = run_trials(cfg.rounds, cfg.seed, |rng, tally: &mut KeyCounts| {
        let bit = uniform_index(rng);
        match cfg.mode {
            Mode::TwoQubit => {
                let (sent, eve_knows) = match cfg.eve {
                    Eve::None => ((bit, bit), false),
                    Eve::InterceptUd => {
                        let first = identified_index(optimal.apply(bit, rng.random())?.0);
                        let second = identified_index(optimal.apply(bit, rng.random())?.0);
                        match first.or(second) {
                            Some(k) => ((k, k), true),
                            None => {
                                let guess = uniform_index(rng);
                                ((guess, guess), false)
                            }
                        }
                    }
                };
                let (bob, _) = optimal.apply(sent.0, rng.random())?;
                let (charlie, _) = optimal.apply(sent.1, rng.random())?;
                tally.record(bit, eve_knows, bob, charlie);
            }
            Mode::OneQubitSequential => {
                let (sent, eve_knows) = match cfg.eve {
                    Eve::None => (bit, false),
                    Eve::InterceptUd => match identified_index(optimal.apply(bit, rng.random())?.0) {
                        Some(k) => (k, true),
                        None => (uniform_index(rng), false),
                    },
                };
                let (bob, post) = bob_stage.apply(sent, rng.random())?;
                let (charlie, _) = charlie_stage.apply_to_state(&post, rng.random())?;
                tally.record(bit, eve_knows, bob, charlie);
            }
        }
        Ok::<(), Error>(())
    })?;
    Ok(counts.into_report())
}

/// Probability that Eve identifies Alice's bit in one round.
pub fn eve_knowledge_rate(cfg: &SessionConfig) -> Result<f64> {
    check_interior_overlap(cfg.s)?;
    match (cfg.eve, cfg.mode) {
        (Eve::None, _) => Err(Error::invalid("eve", "no eavesdropper configured")),
        (Eve::InterceptUd, Mode::OneQubitSequential) => Ok(1.0 - cfg.s),
        (Eve::InterceptUd, Mode::TwoQubit) => Ok(1.0 - cfg.s * cfg.s),
    }
}

/// Probability that both receivers obtain a conclusive result, no Eve.
pub fn both_sifted_rate(s: f64, mode: Mode) -> Result<f64> {
    check_interior_overlap(s)?;
    Ok(match mode {
        Mode::TwoQubit => (1.0 - s).powi(2),
        Mode::OneQubitSequential => (1.0 - s.sqrt()).powi(2),
    })
}
