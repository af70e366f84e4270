//! Alternating-series evaluation with an explicit convergence contract.
//!
//! Every series in this crate stops when three consecutive terms each
//! contribute less than `rel_tolerance` of the running partial sum, or when
//! three consecutive terms fall below the rounding floor ε·Σ|tₖ| of what has
//! already been accumulated (no further term can improve such a sum; the
//! result carries a `saturated` flag). Hitting `max_terms` first is a hard
//! `SeriesNotConverged` error, never a silent truncation. Summation is
//! compensated (Neumaier) because the expansions alternate with
//! near-cancelling terms.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesControl {
    pub rel_tolerance: f64,
    pub max_terms: usize,
}

impl Default for SeriesControl {
    fn default() -> Self {
        SeriesControl {
            rel_tolerance: 1e-12,
            max_terms: 500,
        }
    }
}

impl SeriesControl {
    pub fn new(rel_tolerance: f64, max_terms: usize) -> Result<Self> {
        if !(rel_tolerance > 0.0 && rel_tolerance < 1.0) {
            return Err(Error::domain(
                "SeriesControl",
                format!("rel_tolerance must lie in (0, 1), got {rel_tolerance}"),
            ));
        }
        if max_terms == 0 {
            return Err(Error::domain("SeriesControl", "max_terms must be ≥ 1"));
        }
        Ok(SeriesControl {
            rel_tolerance,
            max_terms,
        })
    }
}

/// Neumaier (improved Kahan–Babuška) compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, term: f64) {
        let t = self.sum + term;
        if self.sum.abs() >= term.abs() {
            self.compensation += (self.sum - t) + term;
        } else {
            self.compensation += (term - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

/// Outcome of a converged series evaluation.
#[derive(Debug, Clone, Copy)]
pub struct SeriesSum {
    pub value: f64,
    pub terms_used: usize,
    /// Index of the largest-magnitude term, the spot to inspect when a
    /// result looks suspicious.
    pub dominant_index: usize,
    pub dominant_magnitude: f64,
    /// True when the sum stopped at its rounding floor rather than at the
    /// requested tolerance: remaining terms were smaller than ε·Σ|tₖ|, so
    /// the value is cancellation-limited and accurate only to that floor.
    pub saturated: bool,
}

/// Sums `term(k)` for k = 0, 1, … under the convergence contract.
pub fn sum_series<F>(ctl: &SeriesControl, context: &'static str, mut term: F) -> Result<SeriesSum>
where
    F: FnMut(usize) -> f64,
{
    let mut acc = CompensatedSum::default();
    let mut gross = 0.0f64;
    let mut small_streak = 0usize;
    let mut floor_streak = 0usize;
    let mut dominant_index = 0usize;
    let mut dominant_magnitude = 0.0f64;
    let mut last = 0.0f64;

    for k in 0..ctl.max_terms {
        let t = term(k);
        acc.add(t);
        gross += t.abs();
        last = t;
        if t.abs() > dominant_magnitude {
            dominant_magnitude = t.abs();
            dominant_index = k;
        }
        // threshold floors at a denormal-safe constant so an identically
        // zero tail still converges
        let threshold = ctl.rel_tolerance * acc.value().abs().max(1e-300);
        if t.abs() <= threshold {
            small_streak += 1;
            if small_streak >= 3 {
                return Ok(SeriesSum {
                    value: acc.value(),
                    terms_used: k + 1,
                    dominant_index,
                    dominant_magnitude,
                    saturated: false,
                });
            }
        } else {
            small_streak = 0;
        }
        if t.abs() <= f64::EPSILON * gross {
            floor_streak += 1;
            if floor_streak >= 3 {
                return Ok(SeriesSum {
                    value: acc.value(),
                    terms_used: k + 1,
                    dominant_index,
                    dominant_magnitude,
                    saturated: true,
                });
            }
        } else {
            floor_streak = 0;
        }
    }

    Err(Error::SeriesNotConverged {
        context,
        terms: ctl.max_terms,
        last_term: last,
        partial_sum: acc.value(),
    })
}
