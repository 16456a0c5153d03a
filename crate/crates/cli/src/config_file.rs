//! TOML study configuration: parsing, defaults, validation, and the
//! resolved settings consumed by the pipeline.
//!
//! Every section may be omitted; defaults reproduce the reference study
//! (two arms of 20 with a 25-per-arm historical study, interim grid
//! 0..40 by 4, four design priors at treatment effects 0/15/25/35, payoff
//! weights 0/0.5/0.75/1).  `deny_unknown_fields` turns typos into config
//! errors instead of silently ignored keys.

use cadence_core::calib::default_pu_grid;
use cadence_core::model::Thresholds;
use cadence_core::payoff::{NetGainParams, PayoffMode};
use cadence_core::{DesignConfig, DesignPrior};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// On-disk configuration (one-to-one with the TOML file).
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FileConfig {
    pub design: DesignSection,
    pub thresholds: ThresholdsSection,
    pub prior_hyper: PriorHyperSection,
    pub historical: HistoricalSection,
    pub hypotheses: HypothesesSection,
    pub mcmc: McmcSection,
    pub run: RunSection,
    pub calibration: CalibrationSection,
    pub design_priors: Vec<PriorSection>,
    pub payoff: PayoffSection,
    pub net_gain: Option<NetGainSection>,
    pub ehss_variants: EhssVariantsSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DesignSection {
    /// Current-trial enrollment per arm (control, treatment).
    pub n1: u32,
    pub n2: u32,
    /// Interim-analysis grid in total responses (even, ascending).
    pub ia_grid: Vec<u32>,
    /// Minimal clinically relevant effect for the futility rule.
    pub theta_min: f64,
    /// Data-generating response standard deviation.
    pub gen_sd: f64,
    /// Target type I error for threshold calibration.
    pub alpha_target: f64,
}

impl Default for DesignSection {
    fn default() -> Self {
        let d = DesignConfig::default();
        DesignSection {
            n1: d.n1,
            n2: d.n2,
            ia_grid: d.ia_grid,
            theta_min: d.theta_min,
            gen_sd: d.gen_sd,
            alpha_target: d.alpha_target,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ThresholdsSection {
    /// Early-winner threshold (calibration starting point / fallback).
    pub p_u: f64,
    /// Early-futility threshold.
    pub p_l: f64,
    /// Final-winner threshold.
    pub p_0: f64,
}

impl Default for ThresholdsSection {
    fn default() -> Self {
        let t = DesignConfig::default().thresholds;
        ThresholdsSection { p_u: t.p_u, p_l: t.p_l, p_0: t.p_0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PriorHyperSection {
    /// Vague-prior standard deviation on the historical arm means.
    pub sigma0: f64,
    /// Gamma prior on the commensurability precisions.
    pub tau_shape: f64,
    pub tau_rate: f64,
    /// Gamma prior on the response precisions.
    pub omega_shape: f64,
    pub omega_rate: f64,
}

impl Default for PriorHyperSection {
    fn default() -> Self {
        let d = DesignConfig::default();
        PriorHyperSection {
            sigma0: d.sigma0,
            tau_shape: d.tau_shape,
            tau_rate: d.tau_rate,
            omega_shape: d.omega_shape,
            omega_rate: d.omega_rate,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HistoricalSection {
    /// Historical enrollment per arm (control, treatment).
    pub n01: u32,
    pub n02: u32,
    /// True treatment effect used to simulate the historical study.
    pub delta0: f64,
    /// Historical response standard deviation.
    pub sd: f64,
}

impl Default for HistoricalSection {
    fn default() -> Self {
        let d = DesignConfig::default();
        HistoricalSection { n01: d.n01, n02: d.n02, delta0: 25.0, sd: d.gen_sd }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HypothesesSection {
    /// Point-alternative treatment effect for power and payoff rates; the
    /// point null is always no effect in either arm.
    pub alt_delta: f64,
}

impl Default for HypothesesSection {
    fn default() -> Self {
        HypothesesSection { alt_delta: 20.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct McmcSection {
    pub iters: u32,
    pub burn_frac: f64,
}

impl Default for McmcSection {
    fn default() -> Self {
        let d = DesignConfig::default();
        McmcSection { iters: d.mcmc_iters, burn_frac: d.burn_frac }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSection {
    pub n_rep: u32,
    pub seed: u64,
}

impl Default for RunSection {
    fn default() -> Self {
        let d = DesignConfig::default();
        RunSection { n_rep: d.n_rep, seed: d.seed }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CalibrationSection {
    /// Early-winner threshold search grid, strictly descending.
    pub pu_grid: Vec<f64>,
    /// Optional minimum power for a design to count as admissible.
    pub power_floor: Option<f64>,
    /// Search all three thresholds instead of `p_u` alone.
    pub search_all: bool,
    /// Grids for the full search (descending); required when `search_all`.
    pub pl_grid: Option<Vec<f64>>,
    pub p0_grid: Option<Vec<f64>>,
}

impl Default for CalibrationSection {
    fn default() -> Self {
        CalibrationSection {
            pu_grid: default_pu_grid(),
            power_floor: None,
            search_all: false,
            pl_grid: None,
            p0_grid: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PriorSection {
    /// Name used in file names and table columns: `[a-z0-9_]+`.
    pub name: String,
    /// Design-prior mean response per arm (control, treatment).
    pub mean: [f64; 2],
    /// Design-prior standard deviation per arm.
    pub sd: [f64; 2],
}

fn default_priors() -> Vec<PriorSection> {
    [0.0, 15.0, 25.0, 35.0]
        .iter()
        .map(|&delta| PriorSection {
            name: format!("delta_{}", delta as u32),
            mean: [0.0, delta],
            sd: [5.0, 5.0],
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PayoffSection {
    /// Weights on early-futility vs early-win value in the ratio payoffs.
    pub weights: Vec<f64>,
    /// Payoff modes to evaluate: "frequentist", "bayesian", "net_gain".
    pub modes: Vec<String>,
}

impl Default for PayoffSection {
    fn default() -> Self {
        PayoffSection {
            weights: vec![0.0, 0.5, 0.75, 1.0],
            modes: vec!["frequentist".into(), "bayesian".into()],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetGainSection {
    /// Gain for a correct early futility stop.
    pub a1: f64,
    /// Gain (typically a loss) for completing with no winner.
    pub a2: f64,
    /// Gain for an early winner.
    pub b1: f64,
    /// Gain for a final-analysis winner.
    pub b2: f64,
    pub cost_per_patient: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EhssVariantsSection {
    /// Extra historical sizes (n01, n02) for borrowing-sensitivity tables;
    /// each variant redraws the historical study at that size and tabulates
    /// EHSS over the full interim grid and all design priors.
    pub n0_pairs: Vec<[u32; 2]>,
}

/// A design prior with its file-name-safe label.
#[derive(Debug, Clone, PartialEq)]
pub struct NamedPrior {
    pub name: String,
    pub prior: DesignPrior,
}

/// Fully validated settings consumed by the pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct StudySettings {
    pub config: DesignConfig,
    pub historical_delta0: f64,
    pub historical_sd: f64,
    pub alt_delta: f64,
    pub pu_grid: Vec<f64>,
    pub power_floor: Option<f64>,
    pub search_all: bool,
    pub pl_grid: Option<Vec<f64>>,
    pub p0_grid: Option<Vec<f64>>,
    pub priors: Vec<NamedPrior>,
    pub weights: Vec<f64>,
    pub modes: Vec<PayoffMode>,
    pub ehss_variants: Vec<[u32; 2]>,
}

impl FileConfig {
    /// Parses a TOML document.
    pub fn from_toml(text: &str) -> Result<FileConfig, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(format!("config parse error: {e}")))
    }

    /// Normalized serialization, embedded in run metadata for replay.
    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    /// Applies the reduced-scale preset: fewer replications, shorter chains.
    pub fn apply_desk_preset(&mut self) {
        self.run.n_rep = 1000;
        self.mcmc.iters = 2000;
        self.mcmc.burn_frac = 0.2;
    }

    /// Overrides the master seed.
    pub fn apply_seed(&mut self, seed: u64) {
        self.run.seed = seed;
    }

    /// Restricts payoff evaluation to a single mode.
    pub fn apply_mode(&mut self, mode: &str) {
        self.payoff.modes = vec![mode.to_string()];
    }

    /// Validates everything and resolves into pipeline settings.
    pub fn resolve(&self) -> Result<StudySettings, CliError> {
        let config = DesignConfig {
            n1: self.design.n1,
            n2: self.design.n2,
            n01: self.historical.n01,
            n02: self.historical.n02,
            ia_grid: self.design.ia_grid.clone(),
            theta_min: self.design.theta_min,
            thresholds: Thresholds {
                p_u: self.thresholds.p_u,
                p_l: self.thresholds.p_l,
                p_0: self.thresholds.p_0,
            },
            sigma0: self.prior_hyper.sigma0,
            tau_shape: self.prior_hyper.tau_shape,
            tau_rate: self.prior_hyper.tau_rate,
            omega_shape: self.prior_hyper.omega_shape,
            omega_rate: self.prior_hyper.omega_rate,
            gen_sd: self.design.gen_sd,
            alpha_target: self.design.alpha_target,
            weight_w: 0.5,
            n_rep: self.run.n_rep,
            mcmc_iters: self.mcmc.iters,
            burn_frac: self.mcmc.burn_frac,
            seed: self.run.seed,
        };
        config.validate().map_err(|e| CliError::Config(format!("invalid design config: {e}")))?;

        let mut problems: Vec<String> = Vec::new();
        let check_desc_grid = |grid: &[f64], name: &str, problems: &mut Vec<String>| {
            if grid.is_empty() {
                problems.push(format!("{name} must be nonempty"));
            }
            if !grid.iter().all(|p| p.is_finite() && *p > 0.0 && *p < 1.0) {
                problems.push(format!("{name} values must lie strictly inside (0, 1)"));
            }
            if !grid.windows(2).all(|w| w[0] > w[1]) {
                problems.push(format!("{name} must be strictly descending"));
            }
        };
        check_desc_grid(&self.calibration.pu_grid, "calibration.pu_grid", &mut problems);
        if self.calibration.search_all {
            match (&self.calibration.pl_grid, &self.calibration.p0_grid) {
                (Some(pl), Some(p0)) => {
                    check_desc_grid(pl, "calibration.pl_grid", &mut problems);
                    check_desc_grid(p0, "calibration.p0_grid", &mut problems);
                    // Every scanned tuple must keep p_l < p_0 <= p_u.
                    if let (Some(&pu_min), Some(&p0_max)) =
                        (self.calibration.pu_grid.last(), p0.first())
                    {
                        if pu_min < p0_max {
                            problems.push(
                                "calibration.pu_grid entries must not fall below \
                                 calibration.p0_grid entries (the early-win bar \
                                 cannot sit under the final bar)"
                                    .into(),
                            );
                        }
                    }
                    if let (Some(&pl_max), Some(&p0_min)) = (pl.first(), p0.last()) {
                        if pl_max >= p0_min {
                            problems.push(
                                "calibration.pl_grid entries must stay strictly below \
                                 calibration.p0_grid entries"
                                    .into(),
                            );
                        }
                    }
                }
                _ => problems.push(
                    "calibration.search_all requires calibration.pl_grid and calibration.p0_grid"
                        .into(),
                ),
            }
        } else if self.calibration.pu_grid.iter().any(|&p_u| p_u < self.thresholds.p_0) {
            problems.push(
                "calibration.pu_grid entries must not fall below thresholds.p_0 \
                 (the early-win bar cannot sit under the final bar)"
                    .into(),
            );
        }
        if let Some(floor) = self.calibration.power_floor {
            if !(0.0..=1.0).contains(&floor) {
                problems.push("calibration.power_floor must lie in [0, 1]".into());
            }
        }
        if !(self.historical.sd.is_finite() && self.historical.sd > 0.0) {
            problems.push("historical.sd must be positive and finite".into());
        }
        if !self.historical.delta0.is_finite() {
            problems.push("historical.delta0 must be finite".into());
        }
        if !self.hypotheses.alt_delta.is_finite() {
            problems.push("hypotheses.alt_delta must be finite".into());
        }

        if self.design_priors.is_empty() {
            problems.push("design_priors must contain at least one prior".into());
        }
        if self.design_priors.len() > 255 {
            problems.push("design_priors supports at most 255 priors".into());
        }
        let mut priors = Vec::with_capacity(self.design_priors.len());
        for (i, p) in self.design_priors.iter().enumerate() {
            let name_ok = !p.name.is_empty()
                && p.name.chars().all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_');
            if !name_ok {
                problems.push(format!(
                    "design_priors[{i}].name {:?} must match [a-z0-9_]+ (it names files)",
                    p.name
                ));
            }
            if self.design_priors[..i].iter().any(|q| q.name == p.name) {
                problems.push(format!("design_priors[{i}].name {:?} is duplicated", p.name));
            }
            let prior = DesignPrior { mean: p.mean, sd: p.sd };
            if !prior.is_valid() {
                problems.push(format!(
                    "design_priors[{i}] must have finite means and positive finite sds"
                ));
            }
            priors.push(NamedPrior { name: p.name.clone(), prior });
        }

        if self.payoff.weights.is_empty() {
            problems.push("payoff.weights must be nonempty".into());
        }
        if !self.payoff.weights.iter().all(|w| w.is_finite() && (0.0..=1.0).contains(w)) {
            problems.push("payoff.weights must lie in [0, 1]".into());
        }
        if self.payoff.modes.is_empty() {
            problems.push("payoff.modes must be nonempty".into());
        }
        let mut modes = Vec::with_capacity(self.payoff.modes.len());
        for m in &self.payoff.modes {
            match m.as_str() {
                "frequentist" => modes.push(PayoffMode::Frequentist),
                "bayesian" => modes.push(PayoffMode::Bayesian),
                "net_gain" => match &self.net_gain {
                    Some(g) => {
                        let params = NetGainParams {
                            a1: g.a1,
                            a2: g.a2,
                            b1: g.b1,
                            b2: g.b2,
                            c: g.cost_per_patient,
                        };
                        if params.validate().is_err() {
                            problems.push(
                                "net_gain requires finite gains with a2 < a1 and b2 < b1".into(),
                            );
                        }
                        modes.push(PayoffMode::NetGain(params));
                    }
                    None => problems
                        .push("payoff mode \"net_gain\" requires a [net_gain] section".into()),
                },
                other => problems.push(format!(
                    "unknown payoff mode {other:?} (expected frequentist, bayesian, net_gain)"
                )),
            }
        }

        for (i, pair) in self.ehss_variants.n0_pairs.iter().enumerate() {
            if pair[0] == 0 || pair[1] == 0 {
                problems.push(format!("ehss_variants.n0_pairs[{i}] must be positive per arm"));
            }
        }

        if problems.is_empty() {
            Ok(StudySettings {
                config,
                historical_delta0: self.historical.delta0,
                historical_sd: self.historical.sd,
                alt_delta: self.hypotheses.alt_delta,
                pu_grid: self.calibration.pu_grid.clone(),
                power_floor: self.calibration.power_floor,
                search_all: self.calibration.search_all,
                pl_grid: self.calibration.pl_grid.clone(),
                p0_grid: self.calibration.p0_grid.clone(),
                priors,
                weights: self.payoff.weights.clone(),
                modes,
                ehss_variants: self.ehss_variants.n0_pairs.clone(),
            })
        } else {
            Err(CliError::Config(format!("invalid config: {}", problems.join("; "))))
        }
    }
}

impl FileConfig {
    /// The reference study: plain defaults plus the four named design
    /// priors (serde's default for a missing `design_priors` list is empty,
    /// which `resolve` rejects).
    pub fn reference() -> FileConfig {
        FileConfig { design_priors: default_priors(), ..FileConfig::default() }
    }
}

/// Annotated reference configuration printed by `default-config`; parses
/// back to [`FileConfig::reference`].
pub const REFERENCE_TOML: &str = r#"# Reference study configuration.
# Every section is optional; omitted keys take the values shown here.

[design]
n1 = 20               # current-trial enrollment, control arm
n2 = 20               # current-trial enrollment, treatment arm
ia_grid = [0, 4, 8, 12, 16, 20, 24, 28, 32, 36, 40]  # interim looks (total responses)
theta_min = 15.0      # minimal clinically relevant effect (futility rule)
gen_sd = 22.0         # data-generating response standard deviation
alpha_target = 0.05   # calibration target for the type I error

[thresholds]
p_u = 0.998           # early-winner threshold (calibration starting point)
p_l = 0.25            # early-futility threshold
p_0 = 0.975           # final-winner threshold

[prior_hyper]
sigma0 = 100.0        # vague-prior sd on historical arm means
tau_shape = 0.02      # Gamma prior on commensurability precisions
tau_rate = 1.0
omega_shape = 0.01    # Gamma prior on response precisions
omega_rate = 1.0

[historical]
n01 = 25              # historical enrollment, control arm
n02 = 25              # historical enrollment, treatment arm
delta0 = 25.0         # true effect used to simulate the historical study
sd = 22.0

[hypotheses]
alt_delta = 20.0      # point alternative for power and payoff rates

[mcmc]
iters = 5000
burn_frac = 0.2

[run]
n_rep = 5000
seed = 51934

[calibration]
# pu_grid defaults to 0.998 down to 0.976 in steps of 0.002; entries
# must stay at or above p_0 so the early-win bar never sits under the
# final bar.
pu_grid = [
    0.998, 0.996, 0.994, 0.992, 0.990, 0.988,
    0.986, 0.984, 0.982, 0.980, 0.978, 0.976,
]
search_all = false    # set true (with pl_grid/p0_grid) for a 3-way search

[[design_priors]]
name = "delta_0"
mean = [0.0, 0.0]
sd = [5.0, 5.0]

[[design_priors]]
name = "delta_15"
mean = [0.0, 15.0]
sd = [5.0, 5.0]

[[design_priors]]
name = "delta_25"
mean = [0.0, 25.0]
sd = [5.0, 5.0]

[[design_priors]]
name = "delta_35"
mean = [0.0, 35.0]
sd = [5.0, 5.0]

[payoff]
weights = [0.0, 0.5, 0.75, 1.0]
modes = ["frequentist", "bayesian"]   # add "net_gain" with a [net_gain] section

# [net_gain]
# a1 = 0.0              # gain: correct early futility stop
# a2 = -1.0             # gain: completed, no winner
# b1 = 2.0              # gain: early winner
# b2 = 1.0              # gain: final-analysis winner
# cost_per_patient = 0.01

[ehss_variants]
# Extra historical sizes for borrowing-sensitivity tables, e.g.
# n0_pairs = [[10, 10], [50, 50], [10, 40], [40, 10]]
n0_pairs = []
"#;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_toml_parses_to_the_reference_config() {
        let parsed = FileConfig::from_toml(REFERENCE_TOML).unwrap();
        assert_eq!(parsed, FileConfig::reference());
    }

    #[test]
    fn empty_document_resolves_via_defaults_except_priors() {
        let parsed = FileConfig::from_toml("").unwrap();
        // serde's default for the priors list is empty, which must be a
        // config error; the reference config fills in the four priors.
        assert!(parsed.resolve().is_err());
        let settings = FileConfig::reference().resolve().unwrap();
        assert_eq!(settings.priors.len(), 4);
        assert_eq!(settings.config.n_total(), 40);
        assert_eq!(settings.pu_grid.len(), 12);
        assert_eq!(settings.modes.len(), 2);
    }

    #[test]
    fn round_trips_through_normalized_toml() {
        let reference = FileConfig::reference();
        let text = reference.to_toml();
        let back = FileConfig::from_toml(&text).unwrap();
        assert_eq!(back, reference);
        assert_eq!(back.resolve().unwrap(), reference.resolve().unwrap());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = FileConfig::from_toml("[design]\nbogus_key = 3\n").unwrap_err();
        assert!(matches!(err, CliError::Config(_)));
        assert!(err.to_string().contains("bogus_key"));
    }

    #[test]
    fn partial_overrides_keep_other_defaults() {
        let parsed = FileConfig::from_toml("[run]\nn_rep = 10\nseed = 7\n").unwrap();
        assert_eq!(parsed.run.n_rep, 10);
        assert_eq!(parsed.run.seed, 7);
        assert_eq!(parsed.design.n1, 20);
        assert_eq!(parsed.mcmc.iters, 5000);
    }

    #[test]
    fn desk_preset_reduces_scale_only() {
        let mut c = FileConfig::reference();
        c.apply_desk_preset();
        assert_eq!(c.run.n_rep, 1000);
        assert_eq!(c.mcmc.iters, 2000);
        assert_eq!(c.design.n1, 20);
    }

    #[test]
    fn bad_prior_names_and_duplicates_are_config_errors() {
        let mut c = FileConfig::reference();
        c.design_priors[0].name = "Bad Name".into();
        let err = c.resolve().unwrap_err();
        assert!(err.to_string().contains("a-z0-9_"));

        let mut c = FileConfig::reference();
        c.design_priors[1].name = c.design_priors[0].name.clone();
        let err = c.resolve().unwrap_err();
        assert!(err.to_string().contains("duplicated"));
    }

    #[test]
    fn net_gain_mode_requires_its_section() {
        let mut c = FileConfig::reference();
        c.payoff.modes = vec!["net_gain".into()];
        assert!(c.resolve().unwrap_err().to_string().contains("[net_gain]"));
        c.net_gain = Some(NetGainSection { a1: 0.0, a2: -1.0, b1: 2.0, b2: 1.0, cost_per_patient: 0.01 });
        let settings = c.resolve().unwrap();
        assert!(matches!(settings.modes[0], PayoffMode::NetGain(_)));
    }

    #[test]
    fn malformed_calibration_grid_is_a_config_error() {
        let mut c = FileConfig::reference();
        c.calibration.pu_grid = vec![0.97, 0.98];
        assert!(c.resolve().unwrap_err().to_string().contains("descending"));
        let mut c = FileConfig::reference();
        c.calibration.search_all = true;
        assert!(c.resolve().unwrap_err().to_string().contains("search_all"));
    }

    #[test]
    fn pu_grid_below_p0_is_a_config_error() {
        let mut c = FileConfig::reference();
        c.calibration.pu_grid = vec![0.998, 0.976, 0.974];
        let err = c.resolve().unwrap_err();
        assert!(err.to_string().contains("thresholds.p_0"), "{err}");
    }

    #[test]
    fn invalid_core_fields_surface_as_config_errors() {
        let mut c = FileConfig::reference();
        c.design.n2 = 21; // arms must be equal
        assert!(matches!(c.resolve().unwrap_err(), CliError::Config(_)));
        let mut c = FileConfig::reference();
        c.design.ia_grid = vec![1, 2];
        assert!(matches!(c.resolve().unwrap_err(), CliError::Config(_)));
    }
}
