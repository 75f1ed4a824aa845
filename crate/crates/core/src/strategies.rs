//! Sequential discrimination against three strategies that let Bob talk to
//! Charlie after measuring.
//!
//! 1. Bob measures optimally and announces the result.
//! 2. Bob measures optimally and, on success, sends Charlie a fresh qubit in
//!    the state he found.
//! 3. Bob clones the qubit probabilistically (success `1/(1+s)`); on success
//!    both measure a copy optimally.
//!
//! The Monte Carlo paths draw the quantum measurements through
//! [`UdMeasurement::apply`] and the classical steps (cloner success) as
//! Bernoulli trials.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mc::run_trials;
use crate::report::format_sig;
use crate::sequential::{build_chain, draw_prepared, simulate_chain, Counts, TallyReport};
use crate::states::{check_interior_overlap, check_overlap, make_state_pair};
use crate::ud_povm::{build_optimal_ud, Outcome};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StrategyKind {
    /// Strategy 1: classical announcement of Bob's result.
    Announce,
    /// Strategy 2: Bob resends the identified state.
    Resend,
    /// Strategy 3: probabilistic cloning.
    Clone,
    /// No communication; the optimal two-observer chain.
    Sequential,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 4] = [
        StrategyKind::Announce,
        StrategyKind::Resend,
        StrategyKind::Clone,
        StrategyKind::Sequential,
    ];

    pub fn closed_form(self, s: f64) -> Result<f64> {
        match self {
            StrategyKind::Announce => strategy1(s),
            StrategyKind::Resend => strategy2(s),
            StrategyKind::Clone => strategy3(s),
            StrategyKind::Sequential => sequential_optimum(s),
        }
    }
}

impl FromStr for StrategyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "1" => Ok(StrategyKind::Announce),
            "2" => Ok(StrategyKind::Resend),
            "3" => Ok(StrategyKind::Clone),
            "seq" => Ok(StrategyKind::Sequential),
            other => Err(Error::invalid("kind", format!("unknown strategy `{other}` (expected 1, 2, 3 or seq)"))),
        }
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StrategyKind::Announce => "1",
            StrategyKind::Resend => "2",
            StrategyKind::Clone => "3",
            StrategyKind::Sequential => "seq",
        })
    }
}

/// `1 − s`
pub fn strategy1(s: f64) -> Result<f64> {
    check_overlap(s)?;
    Ok(1.0 - s)
}

/// `(1 − s)²`
pub fn strategy2(s: f64) -> Result<f64> {
    check_overlap(s)?;
    Ok((1.0 - s).powi(2))
}

/// `(1 − s)²/(1 + s)`
pub fn strategy3(s: f64) -> Result<f64> {
    check_overlap(s)?;
    Ok((1.0 - s).powi(2) / (1.0 + s))
}

/// `(1 − √s)²`
pub fn sequential_optimum(s: f64) -> Result<f64> {
    check_overlap(s)?;
    Ok((1.0 - s.sqrt()).powi(2))
}

/// Success probability of the probabilistic cloner on the pair.
pub fn cloning_success(s: f64) -> Result<f64> {
    check_overlap(s)?;
    Ok(1.0 / (1.0 + s))
}

/// Probability that at least one party identifies the state. The same
/// `1 − s` for all four strategies.
pub fn at_least_one(s: f64) -> Result<f64> {
    strategy1(s)
}

pub fn simulate_strategy(kind: StrategyKind, s: f64, trials: u64, seed: u64) -> Result<TallyReport> {
    check_interior_overlap(s)?;
    if trials < 1 {
        return Err(Error::invalid("trials", "must be at least 1"));
    }
    if kind == StrategyKind::Sequential {
        return simulate_chain(&build_chain(s, 2)?, trials, seed);
    }
    let pair = make_state_pair(s)?;
    let optimal = build_optimal_ud(&pair)?;
    let clone_p = cloning_success(s)?;

    let counts: Counts = run_trials(trials, seed, |rng, tally: &mut Counts| {
        let prepared = draw_prepared(rng);
        let outcomes = match kind {
            StrategyKind::Announce => {
                let (bob, _) = optimal.apply(prepared, rng.random())?;
                // Charlie learns whatever Bob learned
                [bob, bob]
            }
            StrategyKind::Resend => {
                let (bob, _) = optimal.apply(prepared, rng.random())?;
                let charlie = match bob {
                    Outcome::State1 => optimal.apply(1, rng.random())?.0,
                    Outcome::State2 => optimal.apply(2, rng.random())?.0,
                    Outcome::Failure => Outcome::Failure,
                };
                [bob, charlie]
            }
            StrategyKind::Clone => {
                if rng.random::<f64>() < clone_p {
                    let (bob, _) = optimal.apply(prepared, rng.random())?;
                    let (charlie, _) = optimal.apply(prepared, rng.random())?;
                    [bob, charlie]
                } else {
                    [Outcome::Failure, Outcome::Failure]
                }
            }
            StrategyKind::Sequential => unreachable!("handled above"),
        };
        tally.record(prepared, &outcomes);
        Ok::<(), Error>(())
    })?;
    Ok(counts.into_report(2))
}

/// Closed-form joint success of all four strategies over a grid of `s`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyCurve {
    pub s_grid: Vec<f64>,
    pub p_seq: Vec<f64>,
    pub p1: Vec<f64>,
    pub p2: Vec<f64>,
    pub p3: Vec<f64>,
    pub at_least_one: Vec<f64>,
}

pub const CURVE_HEADER: &str = "s,p_seq,p1,p2,p3,at_least_one";

pub fn make_curve(s_min: f64, s_max: f64, steps: usize) -> Result<StrategyCurve> {
    check_overlap(s_min).map_err(|_| Error::invalid("s_min", format!("{s_min} is outside [0, 1]")))?;
    check_overlap(s_max).map_err(|_| Error::invalid("s_max", format!("{s_max} is outside [0, 1]")))?;
    if s_min >= s_max {
        return Err(Error::invalid("s_min", format!("{s_min} must be below s_max = {s_max}")));
    }
    if steps < 2 {
        return Err(Error::invalid("steps", "need at least 2 grid points"));
    }
    let mut curve = StrategyCurve {
        s_grid: Vec::with_capacity(steps),
        p_seq: Vec::with_capacity(steps),
        p1: Vec::with_capacity(steps),
        p2: Vec::with_capacity(steps),
        p3: Vec::with_capacity(steps),
        at_least_one: Vec::with_capacity(steps),
    };
    for i in 0..steps {
        let s = if i == steps - 1 {
            s_max
        } else {
            s_min + (s_max - s_min) * i as f64 / (steps - 1) as f64
        };
        curve.s_grid.push(s);
        curve.p_seq.push(sequential_optimum(s)?);
        curve.p1.push(strategy1(s)?);
        curve.p2.push(strategy2(s)?);
        curve.p3.push(strategy3(s)?);
        curve.at_least_one.push(at_least_one(s)?);
    }
    if let Some(i) = curve.first_ordering_violation() {
        return Err(Error::invalid(
            "curve",
            format!("ordering p1 >= p2 >= p3 >= p_seq fails at s = {}", curve.s_grid[i]),
        ));
    }
    Ok(curve)
}

impl StrategyCurve {
    pub fn len(&self) -> usize {
        self.s_grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s_grid.is_empty()
    }

    /// Index of the first point where `p1 ≥ p2 ≥ p3 ≥ p_seq` fails.
    pub fn first_ordering_violation(&self) -> Option<usize> {
        (0..self.len()).find(|&i| {
            !(self.p1[i] >= self.p2[i] && self.p2[i] >= self.p3[i] && self.p3[i] >= self.p_seq[i])
        })
    }

    /// Strict ordering at every point with `0 < s < 1`.
    pub fn strictly_ordered_inside(&self) -> bool {
        (0..self.len())
            .filter(|&i| self.s_grid[i] > 0.0 && self.s_grid[i] < 1.0)
            .all(|i| self.p1[i] > self.p2[i] && self.p2[i] > self.p3[i] && self.p3[i] > self.p_seq[i])
    }

    fn row(&self, i: usize) -> [f64; 6] {
        [
            self.s_grid[i],
            self.p_seq[i],
            self.p1[i],
            self.p2[i],
            self.p3[i],
            self.at_least_one[i],
        ]
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(64 * (self.len() + 1));
        out.push_str(CURVE_HEADER);
        out.push('\n');
        for i in 0..self.len() {
            let cells: Vec<String> = self.row(i).iter().map(|&x| format_sig(x)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        if lines.next() != Some(CURVE_HEADER) {
            return Err(Error::invalid("csv", format!("header must be `{CURVE_HEADER}`")));
        }
        let mut curve = StrategyCurve {
            s_grid: vec![],
            p_seq: vec![],
            p1: vec![],
            p2: vec![],
            p3: vec![],
            at_least_one: vec![],
        };
        for (n, line) in lines.enumerate().filter(|(_, l)| !l.is_empty()) {
            let cells: Vec<f64> = line
                .split(',')
                .map(str::parse)
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::invalid("csv", format!("row {}: {e}", n + 1)))?;
            if cells.len() != 6 {
                return Err(Error::invalid("csv", format!("row {} has {} cells", n + 1, cells.len())));
            }
            curve.s_grid.push(cells[0]);
            curve.p_seq.push(cells[1]);
            curve.p1.push(cells[2]);
            curve.p2.push(cells[3]);
            curve.p3.push(cells[4]);
            curve.at_least_one.push(cells[5]);
        }
        Ok(curve)
    }

    /// Minimal SVG plot on `[0, 1] × [0, 1]`: sequential solid, strategy 1
    /// dotted, strategy 2 dot-dashed, strategy 3 dashed.
    pub fn to_svg(&self) -> String {
        const SIZE: f64 = 400.0;
        const MARGIN: f64 = 50.0;
        let px = |x: f64| MARGIN + x * SIZE;
        let py = |y: f64| MARGIN + (1.0 - y) * SIZE;
        let total = SIZE + 2.0 * MARGIN;

        let mut svg = format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{total}\" height=\"{total}\" viewBox=\"0 0 {total} {total}\">\n"
        );
        svg.push_str(&format!(
            "<rect x=\"{MARGIN}\" y=\"{MARGIN}\" width=\"{SIZE}\" height=\"{SIZE}\" fill=\"none\" stroke=\"black\"/>\n"
        ));
        for k in 0..=4 {
            let v = k as f64 / 4.0;
            svg.push_str(&format!(
                "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"12\" text-anchor=\"middle\">{v}</text>\n",
                px(v),
                py(0.0) + 18.0
            ));
            svg.push_str(&format!(
                "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"12\" text-anchor=\"end\">{v}</text>\n",
                px(0.0) - 6.0,
                py(v) + 4.0
            ));
        }
        svg.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"14\" text-anchor=\"middle\">s</text>\n",
            px(0.5),
            py(0.0) + 38.0
        ));
        svg.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"14\" text-anchor=\"middle\" transform=\"rotate(-90 {:.1} {:.1})\">P_s</text>\n",
            px(0.0) - 34.0,
            py(0.5),
            px(0.0) - 34.0,
            py(0.5)
        ));

        let series: [(&str, &[f64], &str); 4] = [
            ("p_seq", &self.p_seq, ""),
            ("p1", &self.p1, "2,4"),
            ("p2", &self.p2, "8,4,2,4"),
            ("p3", &self.p3, "8,4"),
        ];
        for (name, ys, dash) in series {
            let points: Vec<String> = self
                .s_grid
                .iter()
                .zip(ys)
                .map(|(&x, &y)| format!("{:.2},{:.2}", px(x), py(y)))
                .collect();
            let dash_attr = if dash.is_empty() {
                String::new()
            } else {
                format!(" stroke-dasharray=\"{dash}\"")
            };
            svg.push_str(&format!(
                "<polyline id=\"{name}\" fill=\"none\" stroke=\"black\" stroke-width=\"1.5\"{dash_attr} points=\"{}\"/>\n",
                points.join(" ")
            ));
        }
        svg.push_str("</svg>\n");
        svg
    }
}
