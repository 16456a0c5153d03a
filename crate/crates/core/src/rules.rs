//! Stopping rules and the borrowing diagnostic: pure functions from
//! posterior summaries to decisions.
//!
//! Three rules govern a trial with one interim look:
//!
//! * **early winner** — at the interim, `P(theta_t > theta_c | data) > p_u`;
//! * **early futility** — at the interim, `P(theta_t > theta_min | data) < p_l`;
//! * **final winner** — at completion, `P(theta_t > theta_c | data) > p_0`
//!   (strict; equality is not a win).
//!
//! The winner rule is checked before futility: both firing at once is
//! practically impossible under sensible thresholds, but the precedence must
//! be fixed, and an overwhelming win should not be discarded as futility.
//!
//! The effective historical sample size (EHSS) quantifies borrowing: it maps
//! the posterior-precision gain of the commensurate fit over the
//! current-data-only fit to an equivalent number of historical patients,
//! clamped to `[0, n0k]`.

use crate::model::PosteriorDraws;
use core::fmt;

/// Interim verdict with the probabilities that produced it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterimDecision {
    pub outcome: InterimOutcome,
    /// `P(theta_t > theta_c | interim data)`.
    pub prob_sup: f64,
    /// `P(theta_t > theta_min | interim data)`.
    pub prob_min: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InterimOutcome {
    StopEarlyWinner,
    StopEarlyFutility,
    Continue,
}

/// Final-analysis verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FinalOutcome {
    FinalWinner,
    NoWinner,
}

/// Applies the interim rules; winner checked first, then futility.
pub fn interim_decide(prob_sup: f64, prob_min: f64, p_u: f64, p_l: f64) -> InterimDecision {
    debug_assert!((0.0..=1.0).contains(&prob_sup) && (0.0..=1.0).contains(&prob_min));
    let outcome = if prob_sup > p_u {
        InterimOutcome::StopEarlyWinner
    } else if prob_min < p_l {
        InterimOutcome::StopEarlyFutility
    } else {
        InterimOutcome::Continue
    };
    InterimDecision { outcome, prob_sup, prob_min }
}

/// Applies the final-winner rule (strict inequality).
pub fn final_decide(prob_sup: f64, p_0: f64) -> FinalOutcome {
    debug_assert!((0.0..=1.0).contains(&prob_sup));
    if prob_sup > p_0 {
        FinalOutcome::FinalWinner
    } else {
        FinalOutcome::NoWinner
    }
}

/// Precision inputs to [`ehss`] must be strictly positive.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NonPositivePrecision;

impl fmt::Display for NonPositivePrecision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "posterior precisions must be strictly positive")
    }
}

impl core::error::Error for NonPositivePrecision {}

/// Effective historical sample size for one arm:
/// `min(max(n0k * (prec_full / prec_current - 1), 0), n0k)`.
///
/// Zero when borrowing adds no precision; capped at the historical arm size
/// (the posterior cannot absorb more patients than the historical arm has).
pub fn ehss(prec_full: f64, prec_current: f64, n0k: u32) -> Result<f64, NonPositivePrecision> {
    if !(prec_full > 0.0 && prec_current > 0.0) {
        return Err(NonPositivePrecision);
    }
    let n0 = f64::from(n0k);
    Ok((n0 * (prec_full / prec_current - 1.0)).clamp(0.0, n0))
}

/// Test oracle: does the final-winner verdict agree with the verdict from
/// the equal-tail `2*p_0 - 1` credible interval of `delta = theta_t -
/// theta_c` (interval entirely above 0 means winner)?
///
/// With the lower quantile taken as the smallest draw `x` whose empirical
/// CDF reaches `1 - p_0`, the two verdicts coincide exactly — this function
/// exists so the test suite can assert that equivalence on arbitrary draws.
pub fn ci_equivalence_check(draws: &PosteriorDraws, p_0: f64) -> bool {
    debug_assert!(p_0 > 0.5 && p_0 < 1.0);
    let g = draws.len();
    assert!(g >= 2, "credible interval needs at least two draws");
    let mut delta: alloc::vec::Vec<f64> =
        draws.theta[1].iter().zip(&draws.theta[0]).map(|(t, c)| t - c).collect();

    let prob_sup = delta.iter().filter(|d| **d > 0.0).count() as f64 / g as f64;
    let by_rule = final_decide(prob_sup, p_0) == FinalOutcome::FinalWinner;

    delta.sort_unstable_by(|a, b| a.partial_cmp(b).expect("draws are finite"));
    let idx = libm::ceil((1.0 - p_0) * g as f64) as usize - 1;
    let lower = delta[idx];
    let by_interval = lower > 0.0;

    by_rule == by_interval
}
