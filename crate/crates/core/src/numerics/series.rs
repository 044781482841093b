//! Compensated summation and series evaluation with a tail-window stop rule.

use crate::error::{domain, Error, Result};
use serde::{Deserialize, Serialize};

/// Tolerances shared by every series and quadrature evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_terms: usize,
    /// Consecutive below-tolerance terms required before stopping.
    pub tail_window: usize,
}

impl Default for SeriesConfig {
    fn default() -> Self {
        Self { rel_tol: 1e-12, abs_tol: 1e-300, max_terms: 10_000, tail_window: 3 }
    }
}

impl SeriesConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol >= 10.0 * f64::EPSILON) || !self.rel_tol.is_finite() {
            return domain(format!("rel_tol must be >= {:e}", 10.0 * f64::EPSILON));
        }
        if !(self.abs_tol >= 0.0) || !self.abs_tol.is_finite() {
            return domain("abs_tol must be finite and >= 0");
        }
        if self.tail_window == 0 || self.max_terms < self.tail_window {
            return domain("need tail_window >= 1 and max_terms >= tail_window");
        }
        Ok(())
    }
}

/// Neumaier (improved Kahan–Babuška) running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for NeumaierSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = Self::default();
        for x in iter {
            s.add(x);
        }
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesSum {
    pub value: f64,
    pub terms_used: usize,
    pub converged: bool,
    /// Σ|term|; `abs_sum / |value|` bounds the cancellation loss.
    pub abs_sum: f64,
}

/// Sums `term(0), term(1), …` until `tail_window` consecutive terms satisfy
/// `|term| <= max(abs_tol, rel_tol·|partial|)`.
pub fn sum_series<F>(mut term: F, config: &SeriesConfig) -> Result<SeriesSum>
where
    F: FnMut(usize) -> f64,
{
    let mut acc = NeumaierSum::default();
    let mut abs_sum = 0.0;
    let mut small = 0;
    for m in 0..config.max_terms {
        let t = term(m);
        if !t.is_finite() {
            return Err(Error::NonFinite { index: m });
        }
        acc.add(t);
        abs_sum += t.abs();
        let partial = acc.value();
        if t.abs() <= config.abs_tol.max(config.rel_tol * partial.abs()) {
            small += 1;
            if small >= config.tail_window {
                return Ok(SeriesSum { value: partial, terms_used: m + 1, converged: true, abs_sum });
            }
        } else {
            small = 0;
        }
    }
    Ok(SeriesSum { value: acc.value(), terms_used: config.max_terms, converged: false, abs_sum })
}
