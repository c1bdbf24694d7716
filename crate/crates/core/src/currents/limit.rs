//! Monotone sequences indexed by truncation level and their limit verdicts.

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    NonIncreasing,
    NonDecreasing,
    /// No monotonicity is enforced (e.g. differences of two monotone sequences).
    Unconstrained,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LimitVerdict {
    Converged,
    Diverged,
    Undecided,
}

/// Number of consecutive small steps required for convergence.
pub const FLAT_STEPS: usize = 3;

/// Relative slack allowed against the declared direction.
pub const MONOTONE_SLACK: f64 = 1e-10;

#[derive(Clone, Debug, Serialize)]
pub struct LimitEstimate {
    pub values: Vec<(usize, f64)>,
    pub direction: Direction,
    pub verdict: LimitVerdict,
    /// Last value plus a geometric-tail estimate (equal to the last value when
    /// the recent differences do not shrink geometrically).
    pub extrapolated: f64,
    pub tol: f64,
    pub cap: f64,
}

impl LimitEstimate {
    /// Validates monotonicity and classifies the sequence.
    ///
    /// Converged: the last `FLAT_STEPS` absolute differences are all below
    /// `tol`. Diverged: some value exceeds `cap` in absolute value.
    pub fn from_sequence(
        values: Vec<(usize, f64)>,
        direction: Direction,
        tol: f64,
        cap: f64,
    ) -> Result<Self> {
        if !(tol > 0.0) {
            return Err(Error::InvalidSpec(format!("tolerance {tol} must be positive")));
        }
        for w in values.windows(2) {
            let ((_, prev), (n, next)) = (w[0], w[1]);
            let slack = MONOTONE_SLACK * prev.abs().max(next.abs()).max(1.0);
            let bad = match direction {
                Direction::NonIncreasing => next > prev + slack,
                Direction::NonDecreasing => next < prev - slack,
                Direction::Unconstrained => false,
            };
            if bad {
                return Err(Error::NonMonotone {
                    n,
                    previous: prev,
                    next,
                });
            }
        }
        let diverged = values.iter().any(|&(_, v)| !(v.abs() <= cap));
        let diffs: Vec<f64> = values.windows(2).map(|w| w[1].1 - w[0].1).collect();
        let converged = diffs.len() >= FLAT_STEPS
            && diffs[diffs.len() - FLAT_STEPS..].iter().all(|d| d.abs() < tol);
        let verdict = if diverged {
            LimitVerdict::Diverged
        } else if converged {
            LimitVerdict::Converged
        } else {
            LimitVerdict::Undecided
        };
        let last = values.last().map(|&(_, v)| v).unwrap_or(f64::NAN);
        let extrapolated = last + geometric_tail(&diffs);
        Ok(LimitEstimate {
            values,
            direction,
            verdict,
            extrapolated,
            tol,
            cap,
        })
    }

    pub fn last(&self) -> Option<f64> {
        self.values.last().map(|&(_, v)| v)
    }

    pub fn last_n(&self) -> Option<usize> {
        self.values.last().map(|&(n, _)| n)
    }

    /// Largest relative step among the last `k` steps.
    pub fn recent_relative_change(&self, k: usize) -> Option<f64> {
        if self.values.len() < k + 1 {
            return None;
        }
        let tail = &self.values[self.values.len() - k - 1..];
        Some(
            tail.windows(2)
                .map(|w| (w[1].1 - w[0].1).abs() / w[1].1.abs().max(f64::MIN_POSITIVE))
                .fold(0.0, f64::max),
        )
    }
}

/// Sum of the geometric continuation `d q + d q² + …` of the last difference,
/// with ratio estimated from the last three differences.
fn geometric_tail(diffs: &[f64]) -> f64 {
    if diffs.len() < 3 {
        return 0.0;
    }
    let d = &diffs[diffs.len() - 3..];
    if d[0] == 0.0 || d[1] == 0.0 {
        return 0.0;
    }
    let (q1, q2) = (d[1] / d[0], d[2] / d[1]);
    if !(0.0..1.0).contains(&q1) || !(0.0..1.0).contains(&q2) {
        return 0.0;
    }
    let q = (q1 * q2).sqrt();
    d[2] * q / (1.0 - q)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(v: &[f64]) -> Vec<(usize, f64)> {
        v.iter().enumerate().map(|(i, &x)| (i + 1, x)).collect()
    }

    #[test]
    fn geometric_sequence_extrapolates_to_limit() {
        let v: Vec<f64> = (0..12).map(|k| 2.0 - 0.5f64.powi(k)).collect();
        let est = LimitEstimate::from_sequence(seq(&v), Direction::NonDecreasing, 1e-2, 1e6).unwrap();
        assert_eq!(est.verdict, LimitVerdict::Converged);
        assert!((est.extrapolated - 2.0).abs() < 1e-12);
    }

    #[test]
    fn cap_and_monotonicity() {
        let est = LimitEstimate::from_sequence(seq(&[1.0, 10.0, 1e7]), Direction::NonDecreasing, 1e-4, 1e6)
            .unwrap();
        assert_eq!(est.verdict, LimitVerdict::Diverged);
        let err = LimitEstimate::from_sequence(seq(&[1.0, 0.5]), Direction::NonDecreasing, 1e-4, 1e6);
        assert!(matches!(err, Err(Error::NonMonotone { n: 2, .. })));
        let ok = LimitEstimate::from_sequence(seq(&[1.0, 1.0 - 1e-12]), Direction::NonDecreasing, 1e-4, 1e6);
        assert!(ok.is_ok());
    }

    #[test]
    fn linear_growth_is_undecided() {
        let v: Vec<f64> = (1..20).map(|k| k as f64 / 2.0).collect();
        let est = LimitEstimate::from_sequence(seq(&v), Direction::NonDecreasing, 1e-4, 1e6).unwrap();
        assert_eq!(est.verdict, LimitVerdict::Undecided);
        assert_eq!(est.extrapolated, est.last().unwrap());
    }
}
