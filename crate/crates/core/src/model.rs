//! Shared domain types: design configuration, truth scenarios, trial data,
//! posterior draws, and per-replication outcomes.
//!
//! Arms are indexed `0` for control and `1` for treatment throughout; the
//! treatment effect of interest is `theta[1] - theta[0]`.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

/// Control arm index.
pub const ARM_CONTROL: usize = 0;
/// Treatment arm index.
pub const ARM_TREATMENT: usize = 1;

/// Posterior-probability stopping thresholds.
///
/// * `p_u` — early-win bound: stop for efficacy at the interim when
///   `P(theta_t > theta_c | data) > p_u`.
/// * `p_l` — futility bound: stop for futility at the interim when
///   `P(theta_t > theta_min | data) < p_l`.
/// * `p_0` — final-analysis bound: declare the treatment the winner when
///   `P(theta_t > theta_c | data) > p_0` at the end of the trial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    pub p_u: f64,
    pub p_l: f64,
    pub p_0: f64,
}

impl Thresholds {
    /// Checks `0 < p_l < p_0 <= p_u < 1`.
    pub fn is_ordered(&self) -> bool {
        self.p_l > 0.0 && self.p_l < self.p_0 && self.p_0 <= self.p_u && self.p_u < 1.0
    }
}

/// Complete specification of one candidate design.
///
/// Defaults give the built-in reference configuration: a 40-patient current
/// trial (20 per arm) after a 50-patient historical study, interim grid at
/// every 10% of enrollment, diffuse hyperpriors, and reference MCMC sizes.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignConfig {
    /// Current-trial enrollment in the control arm.
    pub n1: u32,
    /// Current-trial enrollment in the treatment arm (must equal `n1`).
    pub n2: u32,
    /// Historical-study enrollment, control arm.
    pub n01: u32,
    /// Historical-study enrollment, treatment arm.
    pub n02: u32,
    /// Candidate interim-analysis times as total current-trial enrollment
    /// (patients observed across both arms when the look happens).
    pub ia_grid: Vec<u32>,
    /// Minimal clinically relevant treatment mean used by the futility rule.
    pub theta_min: f64,
    /// Stopping thresholds; `p_u` is typically overwritten by calibration.
    pub thresholds: Thresholds,
    /// Prior standard deviation of the historical means `theta0_k`.
    pub sigma0: f64,
    /// Shape of the Gamma hyperprior on the commensurability precisions.
    pub tau_shape: f64,
    /// Rate of the Gamma hyperprior on the commensurability precisions.
    pub tau_rate: f64,
    /// Shape of the Gamma hyperpriors on the sampling precisions.
    pub omega_shape: f64,
    /// Rate of the Gamma hyperpriors on the sampling precisions.
    pub omega_rate: f64,
    /// Response standard deviation used when simulating data.
    pub gen_sd: f64,
    /// Target one-sided type I error for calibration.
    pub alpha_target: f64,
    /// Weight on early-futility (vs early-win) probability in the payoff.
    pub weight_w: f64,
    /// Monte Carlo replications per operating-characteristic estimate.
    pub n_rep: u32,
    /// Gibbs iterations per chain, including burn-in.
    pub mcmc_iters: u32,
    /// Fraction of each chain discarded as burn-in.
    pub burn_frac: f64,
    /// Master seed; every stream in a study derives from it.
    pub seed: u64,
}

impl Default for DesignConfig {
    fn default() -> Self {
        DesignConfig {
            n1: 20,
            n2: 20,
            n01: 25,
            n02: 25,
            ia_grid: (0..=40).step_by(4).collect(),
            theta_min: 15.0,
            thresholds: Thresholds { p_u: 0.998, p_l: 0.25, p_0: 0.975 },
            sigma0: 100.0,
            tau_shape: 0.02,
            tau_rate: 1.0,
            omega_shape: 0.01,
            omega_rate: 1.0,
            gen_sd: 22.0,
            alpha_target: 0.05,
            weight_w: 0.5,
            n_rep: 5000,
            mcmc_iters: 5000,
            burn_frac: 0.2,
            seed: 0xCADE,
        }
    }
}

impl DesignConfig {
    /// Planned total current-trial enrollment.
    pub fn n_total(&self) -> u32 {
        self.n1 + self.n2
    }

    /// Retained draws per chain: `floor(mcmc_iters * (1 - burn_frac))`.
    pub fn draws_per_chain(&self) -> u32 {
        libm::floor(f64::from(self.mcmc_iters) * (1.0 - self.burn_frac)) as u32
    }

    /// Burn-in iterations: whatever `draws_per_chain` leaves behind.
    pub fn burn_iters(&self) -> u32 {
        self.mcmc_iters - self.draws_per_chain()
    }

    /// Checks every structural invariant, collecting all violations rather
    /// than stopping at the first.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let mut v: Vec<String> = Vec::new();
        if self.n1 == 0 || self.n2 == 0 {
            v.push("n1 and n2 must be positive".into());
        }
        if self.n1 != self.n2 {
            v.push(alloc::format!(
                "equal allocation required: n1 = {} but n2 = {}",
                self.n1, self.n2
            ));
        }
        let n = self.n_total();
        if n > u32::from(u16::MAX) {
            v.push(alloc::format!(
                "total enrollment {n} exceeds the supported maximum of {}",
                u16::MAX
            ));
        }
        if self.ia_grid.is_empty() {
            v.push("ia_grid must contain at least one interim time".into());
        }
        for &np in &self.ia_grid {
            if np % 2 != 0 {
                v.push(alloc::format!(
                    "interim time {np} is odd; equal allocation needs an even count"
                ));
            }
            if np > n {
                v.push(alloc::format!(
                    "interim time {np} exceeds the total enrollment {n}"
                ));
            }
        }
        if !self.ia_grid.windows(2).all(|w| w[0] < w[1]) {
            v.push("ia_grid must be strictly increasing".into());
        }
        if !self.theta_min.is_finite() {
            v.push("theta_min must be finite".into());
        }
        if !self.thresholds.is_ordered() {
            v.push(alloc::format!(
                "thresholds must satisfy 0 < p_l < p_0 <= p_u < 1; \
                 got p_l = {}, p_0 = {}, p_u = {}",
                self.thresholds.p_l, self.thresholds.p_0, self.thresholds.p_u
            ));
        }
        for (name, val) in [
            ("sigma0", self.sigma0),
            ("tau_shape", self.tau_shape),
            ("tau_rate", self.tau_rate),
            ("omega_shape", self.omega_shape),
            ("omega_rate", self.omega_rate),
            ("gen_sd", self.gen_sd),
        ] {
            if !(val.is_finite() && val > 0.0) {
                v.push(alloc::format!("{name} must be finite and positive, got {val}"));
            }
        }
        if !(self.alpha_target > 0.0 && self.alpha_target < 1.0) {
            v.push(alloc::format!(
                "alpha_target must lie in (0, 1), got {}",
                self.alpha_target
            ));
        }
        if !(0.0..=1.0).contains(&self.weight_w) {
            v.push(alloc::format!("weight_w must lie in [0, 1], got {}", self.weight_w));
        }
        if self.n_rep == 0 {
            v.push("n_rep must be positive".into());
        }
        if self.mcmc_iters < 100 {
            v.push(alloc::format!("mcmc_iters must be at least 100, got {}", self.mcmc_iters));
        }
        if !(self.burn_frac > 0.0 && self.burn_frac < 1.0) {
            v.push(alloc::format!("burn_frac must lie in (0, 1), got {}", self.burn_frac));
        } else if self.mcmc_iters >= 100 && self.draws_per_chain() < 2 {
            v.push("burn_frac leaves fewer than two retained draws per chain".into());
        }
        if v.is_empty() {
            Ok(())
        } else {
            Err(ConfigError { violations: v })
        }
    }
}

/// All invariant violations found in a [`DesignConfig`].
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    violations: Vec<String>,
}

impl ConfigError {
    pub fn violations(&self) -> &[String] {
        &self.violations
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid design configuration ({} problem(s)):", self.violations.len())?;
        for msg in &self.violations {
            write!(f, "\n  - {msg}")?;
        }
        Ok(())
    }
}

impl core::error::Error for ConfigError {}

/// Independent normal design prior on the two arm means, used to average
/// operating characteristics over plausible treatment effects.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesignPrior {
    /// Means of `(theta_control, theta_treatment)`.
    pub mean: [f64; 2],
    /// Standard deviations of `(theta_control, theta_treatment)`.
    pub sd: [f64; 2],
}

impl DesignPrior {
    pub fn is_valid(&self) -> bool {
        self.mean.iter().all(|m| m.is_finite())
            && self.sd.iter().all(|s| s.is_finite() && *s > 0.0)
    }
}

/// How the true arm means are chosen for each simulated replication.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TruthScenario {
    /// Fixed `(theta_control, theta_treatment)`, e.g. a point null.
    Fixed { theta: [f64; 2] },
    /// Arm means redrawn from a design prior every replication.
    FromPrior(DesignPrior),
}

/// Observations for one simulated (or real) trial, split by study and arm.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrialData {
    /// Current-trial responses, `[control, treatment]`.
    pub current: [Vec<f64>; 2],
    /// Historical-study responses, `[control, treatment]`.
    pub historical: [Vec<f64>; 2],
}

impl TrialData {
    /// Current-trial observation count across both arms.
    pub fn n_current(&self) -> usize {
        self.current[0].len() + self.current[1].len()
    }

    /// Historical observation count across both arms.
    pub fn n_historical(&self) -> usize {
        self.historical[0].len() + self.historical[1].len()
    }

    /// True when any observation is NaN or infinite.
    pub fn has_non_finite(&self) -> bool {
        self.current
            .iter()
            .chain(self.historical.iter())
            .any(|arm| arm.iter().any(|y| !y.is_finite()))
    }
}

/// Retained posterior draws from one Gibbs run.
///
/// `theta` is always present; the commensurate-model components are `None`
/// when the chain was fit with the current-data-only variant.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorDraws {
    /// Current-trial arm means, `[control, treatment]`.
    pub theta: [Vec<f64>; 2],
    /// Historical arm means.
    pub theta0: Option<[Vec<f64>; 2]>,
    /// Commensurability precisions.
    pub tau: Option<[Vec<f64>; 2]>,
    /// Current-trial sampling precision.
    pub omega: Vec<f64>,
    /// Historical sampling precision.
    pub omega0: Option<Vec<f64>>,
}

impl PosteriorDraws {
    /// Number of retained draws.
    pub fn len(&self) -> usize {
        self.theta[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Terminal classification of one simulated trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Decision {
    /// Stopped at the interim with the treatment declared the winner.
    EarlyWin,
    /// Stopped at the interim for futility.
    EarlyFutility,
    /// Ran to completion and declared the treatment the winner.
    FinalWin,
    /// Ran to completion without declaring a winner.
    NoWin,
}

/// Stage at which a trial reached its decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Interim,
    Final,
}

impl Decision {
    pub fn stage(self) -> Stage {
        match self {
            Decision::EarlyWin | Decision::EarlyFutility => Stage::Interim,
            Decision::FinalWin | Decision::NoWin => Stage::Final,
        }
    }

    /// True when the treatment was declared the winner at either stage.
    pub fn is_win(self) -> bool {
        matches!(self, Decision::EarlyWin | Decision::FinalWin)
    }
}

/// Result of one simulated replication.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReplicationOutcome {
    pub decision: Decision,
    /// Patients enrolled when the trial ended: the interim time for early
    /// stops, the full enrollment otherwise.
    pub sample_used: u32,
    /// Effective historical sample size at the interim, `[control, treatment]`.
    pub ehss: [f64; 2],
    /// Raised when total borrowing looks excessive at the interim
    /// (`ehss[0] + ehss[1] > 2 * n_prime`); reported, never acted on.
    pub ehss_flag: bool,
}

impl ReplicationOutcome {
    pub fn stage(&self) -> Stage {
        self.decision.stage()
    }
}

/// A Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Estimate {
    pub value: f64,
    pub se: f64,
}

impl Estimate {
    /// Binomial proportion estimate from `hits` out of `n` replications.
    pub fn proportion(hits: u32, n: u32) -> Estimate {
        let p = f64::from(hits) / f64::from(n);
        Estimate { value: p, se: libm::sqrt(p * (1.0 - p) / f64::from(n)) }
    }
}

/// Frequentist and Bayesian operating characteristics of one design
/// (an interim time plus calibrated thresholds).
#[derive(Debug, Clone, PartialEq)]
pub struct OperatingCharacteristics {
    /// Interim-analysis time (total enrollment at the look).
    pub n_prime: u32,
    /// Thresholds in force.
    pub thresholds: Thresholds,
    /// Type I error under the point null, with its early/final split
    /// (`type1.value == type1_early + type1_final` exactly, by counting).
    pub type1: Estimate,
    pub type1_early: f64,
    pub type1_final: f64,
    /// Power under the point alternative.
    pub power: Estimate,
    /// Early-futility probability under the point null.
    pub p_futility_null: Estimate,
    /// Early-win probability under the point alternative.
    pub p_earlywin_alt: Estimate,
    /// Early-stopping probability under the design prior.
    pub p_stop: Estimate,
    /// Payoff at the configured weight.
    pub payoff: Estimate,
    /// Expected sample size under the design prior.
    pub expected_ss: Estimate,
}

impl OperatingCharacteristics {
    /// Structural checks every assembled row must satisfy; `n` is the full
    /// enrollment. Returns the first violated condition by name.
    pub fn check(&self, n: u32) -> Result<(), &'static str> {
        let in_unit = |e: &Estimate| (0.0..=1.0).contains(&e.value);
        if !(in_unit(&self.type1)
            && in_unit(&self.power)
            && in_unit(&self.p_futility_null)
            && in_unit(&self.p_earlywin_alt)
            && in_unit(&self.p_stop))
        {
            return Err("probability outside [0, 1]");
        }
        if self.type1.value != self.type1_early + self.type1_final {
            return Err("type I split does not sum to the total");
        }
        let (lo, hi) = (f64::from(self.n_prime), f64::from(n));
        if !(self.expected_ss.value >= lo && self.expected_ss.value <= hi) {
            return Err("expected sample size outside [n_prime, n]");
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_is_valid() {
        let config = DesignConfig::default();
        assert!(config.validate().is_ok());
        assert_eq!(config.n_total(), 40);
        assert_eq!(config.ia_grid, vec![0, 4, 8, 12, 16, 20, 24, 28, 32, 36, 40]);
    }

    #[test]
    fn draw_counts_follow_retention_formula() {
        let mut config = DesignConfig::default();
        assert_eq!(config.draws_per_chain(), 4000);
        assert_eq!(config.burn_iters(), 1000);

        // Non-integral split: retention is floored, burn-in takes the rest.
        config.mcmc_iters = 1001;
        config.burn_frac = 0.2;
        assert_eq!(config.draws_per_chain(), 800);
        assert_eq!(config.burn_iters(), 201);
    }

    #[test]
    fn validation_collects_every_violation() {
        let mut config = DesignConfig::default();
        config.n2 = 21; // unequal arms
        config.ia_grid = vec![3, 41, 98]; // odd, over-total entries
        config.thresholds = Thresholds { p_u: 0.9, p_l: 0.95, p_0: 0.975 }; // misordered
        config.sigma0 = -1.0;
        let err = config.validate().unwrap_err();
        let text = alloc::format!("{err}");
        assert!(err.violations().len() >= 5, "got: {text}");
        assert!(text.contains("n1 = 20 but n2 = 21"));
        assert!(text.contains("interim time 3 is odd"));
        assert!(text.contains("interim time 98 exceeds the total enrollment"));
        assert!(text.contains("p_l"));
        assert!(text.contains("sigma0"));
    }

    #[test]
    fn odd_interim_time_is_rejected() {
        let mut config = DesignConfig::default();
        config.ia_grid = vec![0, 7, 40];
        let err = config.validate().unwrap_err();
        assert!(err.violations().iter().any(|m| m.contains("7 is odd")));
    }

    #[test]
    fn interim_past_total_is_rejected() {
        let mut config = DesignConfig::default();
        config.ia_grid = vec![0, 44];
        let err = config.validate().unwrap_err();
        assert!(err.violations().iter().any(|m| m.contains("44 exceeds")));
    }

    #[test]
    fn threshold_ordering_is_enforced() {
        let mut config = DesignConfig::default();
        config.thresholds.p_l = 0.98; // above p_0
        assert!(config.validate().is_err());
        config.thresholds.p_l = 0.0; // boundary excluded
        assert!(config.validate().is_err());
        config.thresholds = Thresholds { p_u: 1.0, p_l: 0.25, p_0: 0.975 };
        assert!(config.validate().is_err());
        // p_0 == p_u is allowed.
        config.thresholds = Thresholds { p_u: 0.975, p_l: 0.25, p_0: 0.975 };
        assert!(config.validate().is_ok());
    }

    #[test]
    fn decision_stage_and_win_classification() {
        assert_eq!(Decision::EarlyWin.stage(), Stage::Interim);
        assert_eq!(Decision::EarlyFutility.stage(), Stage::Interim);
        assert_eq!(Decision::FinalWin.stage(), Stage::Final);
        assert_eq!(Decision::NoWin.stage(), Stage::Final);
        assert!(Decision::EarlyWin.is_win());
        assert!(Decision::FinalWin.is_win());
        assert!(!Decision::EarlyFutility.is_win());
        assert!(!Decision::NoWin.is_win());
    }

    #[test]
    fn proportion_estimate_matches_binomial_se() {
        let e = Estimate::proportion(50, 200);
        assert_eq!(e.value, 0.25);
        let expected_se = (0.25f64 * 0.75 / 200.0).sqrt();
        assert!((e.se - expected_se).abs() < 1e-15);
    }
}
