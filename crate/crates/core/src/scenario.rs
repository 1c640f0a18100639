//! Scenario documents: parameters, initial herd and solver settings in one
//! TOML file, plus the builtin herds and a seeded herd generator.
//!
//! ```toml
//! name = "pair"
//!
//! [params]
//! epsilon = 0.1
//! v = 1.0
//! kappa = 3
//! home = 4.0
//! d_lo = 0.5
//! d_hi = 1.5
//! sight = { kind = "constant" }
//! panic_profile = { kind = "ramp" }
//! environment = { kind = "waves", amplitude = 0.4, omega = 2.0 }
//!
//! [[initial]]
//! position = -1.0
//! weight = 1
//!
//! [[initial]]
//! position = 1.0
//! weight = 1
//!
//! [settings]
//! step = 0.01
//! event_tol = 1e-9
//! merge_gap = 1e-9
//! horizon = 20.0
//! max_events = 1000
//! ```

use std::ops::{Range, RangeInclusive};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{EngineError, SolverSettings};
use crate::functions::{Environment, PanicProfile, SightKernel};
use crate::model::{ModelError, ModelParams};
use crate::state::HerdState;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScenarioError {
    #[error("malformed scenario: {0}")]
    Malformed(String),
    #[error("{field}: {reason}")]
    Invalid { field: String, reason: String },
    #[error("unknown builtin scenario `{0}`")]
    UnknownBuiltin(String),
}

impl From<ModelError> for ScenarioError {
    fn from(err: ModelError) -> Self {
        match err {
            ModelError::InvalidParam { field, reason } => ScenarioError::Invalid {
                field: format!("params.{field}"),
                reason,
            },
            other => ScenarioError::Invalid {
                field: "params".into(),
                reason: other.to_string(),
            },
        }
    }
}

impl From<EngineError> for ScenarioError {
    fn from(err: EngineError) -> Self {
        match err {
            EngineError::InvalidSettings { field, reason } => ScenarioError::Invalid {
                field: format!("settings.{field}"),
                reason,
            },
            other => ScenarioError::Invalid {
                field: "settings".into(),
                reason: other.to_string(),
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialGroup {
    pub position: f64,
    pub weight: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    /// When set, the initial herd is replaced by a seeded random herd with the
    /// same group count, position span and weight span as `initial`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub params: ModelParams,
    pub initial: Vec<InitialGroup>,
    pub settings: SolverSettings,
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<(), ScenarioError> {
        if self.name.trim().is_empty() {
            return Err(ScenarioError::Invalid {
                field: "name".into(),
                reason: "must not be empty".into(),
            });
        }
        self.params.validate()?;
        self.settings.validate()?;
        if self.initial.is_empty() {
            return Err(ScenarioError::Invalid {
                field: "initial".into(),
                reason: "needs at least one group".into(),
            });
        }
        for (k, group) in self.initial.iter().enumerate() {
            if group.weight == 0 {
                return Err(ScenarioError::Invalid {
                    field: format!("initial[{k}].weight"),
                    reason: "must be ≥ 1".into(),
                });
            }
            if !(group.position.is_finite() && group.position < self.params.home) {
                return Err(ScenarioError::Invalid {
                    field: format!("initial[{k}].position"),
                    reason: format!(
                        "must be finite and below home = {} (got {})",
                        self.params.home, group.position
                    ),
                });
            }
        }
        Ok(())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }

    /// Total population ℳ of the herd this scenario starts from.
    pub fn total_weight(&self) -> u64 {
        self.initial_groups()
            .iter()
            .map(|&(_, w)| u64::from(w))
            .sum()
    }

    /// Same scenario with `initial` replaced by the seeded variant.
    pub fn randomized(&self, seed: u64) -> ScenarioConfig {
        let lo = self
            .initial
            .iter()
            .map(|g| g.position)
            .fold(f64::INFINITY, f64::min);
        let hi = self
            .initial
            .iter()
            .map(|g| g.position)
            .fold(f64::NEG_INFINITY, f64::max);
        let w_lo = self.initial.iter().map(|g| g.weight).min().unwrap_or(1);
        let w_hi = self.initial.iter().map(|g| g.weight).max().unwrap_or(1);
        let span = if hi > lo {
            lo..hi
        } else {
            lo..lo + (self.params.home - lo).min(1.0)
        };
        let initial = random_herd(seed, self.initial.len(), span, w_lo..=w_hi)
            .into_iter()
            .map(|(position, weight)| InitialGroup { position, weight })
            .collect();
        ScenarioConfig {
            name: format!("{}-seed{seed}", self.name),
            seed: None,
            initial,
            ..self.clone()
        }
    }

    fn initial_groups(&self) -> Vec<(f64, u32)> {
        match self.seed {
            Some(seed) => self.randomized(seed).initial_groups(),
            None => self
                .initial
                .iter()
                .map(|g| (g.position, g.weight))
                .collect(),
        }
    }

    /// Herd at time 0, after applying `seed` when one is set.
    pub fn initial_state(&self) -> HerdState {
        HerdState::new(&self.initial_groups()).expect("validated scenario has a valid herd")
    }
}

/// Parses and fully validates a scenario document.
pub fn parse_scenario(text: &str) -> Result<ScenarioConfig, ScenarioError> {
    let config: ScenarioConfig = toml::from_str(text)
        .map_err(|e| ScenarioError::Malformed(e.to_string().trim_end().to_owned()))?;
    config.validate()?;
    Ok(config)
}

/// Seeded herd of `n_groups` groups with positions drawn uniformly from
/// `positions` and weights from `weights`. Groups drawn at the same position
/// are fused, so the result is strictly increasing.
pub fn random_herd(
    seed: u64,
    n_groups: usize,
    positions: Range<f64>,
    weights: RangeInclusive<u32>,
) -> Vec<(f64, u32)> {
    assert!(positions.start < positions.end, "empty position range");
    assert!(
        *weights.start() >= 1 && weights.start() <= weights.end(),
        "bad weight range"
    );
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut herd: Vec<(f64, u32)> = (0..n_groups)
        .map(|_| {
            (
                rng.random_range(positions.clone()),
                rng.random_range(weights.clone()),
            )
        })
        .collect();
    herd.sort_by(|a, b| a.0.total_cmp(&b.0));
    herd.dedup_by(|later, kept| {
        if later.0 == kept.0 {
            kept.1 += later.1;
            true
        } else {
            false
        }
    });
    herd
}

pub const ALL_HOME: &str = "all-home";
pub const TWO_LEFT_IN_WATER: &str = "two-left-in-water";
pub const ONE_FROZEN_IN_WATER: &str = "one-frozen-in-water";
pub const FROZEN_ON_SHORE: &str = "frozen-on-shore";

fn base_params(environment: Environment) -> ModelParams {
    ModelParams {
        epsilon: 0.1,
        v: 1.0,
        kappa: 3,
        home: 4.0,
        d_lo: 0.5,
        d_hi: 1.5,
        sight: SightKernel::Ramp { radius: 3.0 },
        panic_profile: PanicProfile::Ramp,
        environment,
    }
}

fn waves(amplitude: f64, omega: f64, phase: f64) -> Environment {
    Environment::Waves {
        amplitude,
        omega,
        phase,
        shoreline: 0.0,
        blend: 0.5,
    }
}

fn singletons(positions: &[f64]) -> Vec<InitialGroup> {
    positions
        .iter()
        .map(|&position| InitialGroup {
            position,
            weight: 1,
        })
        .collect()
}

fn settings(horizon: f64) -> SolverSettings {
    SolverSettings {
        step: 0.01,
        event_tol: 1e-9,
        merge_gap: 1e-9,
        horizon,
        max_events: 1000,
    }
}

/// The four reference herds: twenty penguins split between the sea (below 0)
/// and the foreshore, with the burrow at 4.
pub fn builtin_scenarios() -> Vec<ScenarioConfig> {
    vec![
        ScenarioConfig {
            name: ALL_HOME.into(),
            seed: None,
            params: base_params(waves(0.4, 2.0, 0.0)),
            initial: singletons(&[
                -3.1, -2.75, -2.4, -2.1, -1.8, -1.45, -1.15, -0.8, -0.5, -0.2, 0.15, 0.45, 0.8,
                1.1, 1.4, 1.75, 2.05, 2.4, 2.7, 3.0,
            ]),
            settings: settings(30.0),
        },
        ScenarioConfig {
            name: TWO_LEFT_IN_WATER.into(),
            seed: None,
            params: base_params(waves(0.3, 1.5, 0.4)),
            initial: singletons(&[
                -6.2, -5.4, -2.2, -1.9, -1.6, -1.3, -1.0, -0.7, -0.4, -0.1, 0.2, 0.5, 0.8, 1.1,
                1.4, 1.7, 2.0, 2.3, 2.6, 2.9,
            ]),
            settings: settings(20.0),
        },
        ScenarioConfig {
            name: ONE_FROZEN_IN_WATER.into(),
            seed: None,
            params: base_params(waves(0.3, 2.5, 1.0)),
            initial: singletons(&[
                -6.0, -2.4, -2.1, -1.8, -1.5, -1.2, -0.9, -0.6, -0.3, 0.0, 0.3, 0.6, 0.9, 1.2, 1.5,
                1.8, 2.1, 2.4, 2.7, 3.0,
            ]),
            settings: settings(20.0),
        },
        ScenarioConfig {
            name: FROZEN_ON_SHORE.into(),
            seed: None,
            params: base_params(waves(0.3, 2.0, 0.0)),
            initial: singletons(&[
                0.3, 2.0, 2.1, 2.2, 2.3, 2.4, 2.5, 2.6, 2.7, 2.8, 2.9, 3.0, 3.1, 3.2, 3.3, 3.4,
                3.5, 3.6, 3.7, 3.8,
            ]),
            settings: settings(20.0),
        },
    ]
}

pub fn builtin(name: &str) -> Result<ScenarioConfig, ScenarioError> {
    builtin_scenarios()
        .into_iter()
        .find(|s| s.name == name)
        .ok_or_else(|| ScenarioError::UnknownBuiltin(name.to_owned()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const MINIMAL: &str = r#"
name = "pair"

[params]
epsilon = 0.1
v = 1.0
kappa = 3
home = 4.0
d_lo = 0.5
d_hi = 1.5
sight = { kind = "gaussian" }
panic_profile = { kind = "ramp" }
environment = { kind = "neutral" }

[[initial]]
position = -1.0
weight = 1

[[initial]]
position = 1.0
weight = 1

[settings]
step = 0.01
event_tol = 1e-9
merge_gap = 1e-9
horizon = 20.0
max_events = 1000
"#;

    #[test]
    fn parses_minimal_document() {
        let config = parse_scenario(MINIMAL).unwrap();
        assert_eq!(config.initial.len(), 2);
        assert_eq!(config.total_weight(), 2);
        assert_eq!(config.params.sight, SightKernel::Gaussian);
    }

    #[test]
    fn rejects_small_kappa() {
        let err = parse_scenario(&MINIMAL.replace("kappa = 3", "kappa = 1")).unwrap_err();
        let msg = err.to_string();
        assert!(
            msg.contains("kappa ≥ 2") && msg.starts_with("params.kappa"),
            "{msg}"
        );
    }

    #[test]
    fn rejects_slow_cruise() {
        let err = parse_scenario(&MINIMAL.replace("v = 1.0", "v = 0.1")).unwrap_err();
        let msg = err.to_string();
        assert!(
            msg.contains("v > ε") && msg.starts_with("params.v"),
            "{msg}"
        );
    }

    #[test]
    fn rejects_unknown_keys_and_kinds() {
        let typo = MINIMAL.replace("epsilon = 0.1", "epsilon = 0.1\nepsilom = 0.2");
        assert!(
            matches!(parse_scenario(&typo), Err(ScenarioError::Malformed(m)) if m.contains("epsilom"))
        );
        let kind = MINIMAL.replace("\"gaussian\"", "\"lorentzian\"");
        assert!(
            matches!(parse_scenario(&kind), Err(ScenarioError::Malformed(m)) if m.contains("lorentzian"))
        );
        let extra = MINIMAL.replace(
            "{ kind = \"neutral\" }",
            "{ kind = \"neutral\", amplitude = 1.0 }",
        );
        assert!(parse_scenario(&extra).is_err());
        assert!(matches!(
            parse_scenario("name = "),
            Err(ScenarioError::Malformed(_))
        ));
    }

    #[test]
    fn rejects_herd_at_home() {
        let err = parse_scenario(&MINIMAL.replace("position = 1.0", "position = 4.0")).unwrap_err();
        assert!(err.to_string().starts_with("initial[1].position"), "{err}");
        let err = parse_scenario(
            &MINIMAL.replace("weight = 1\n\n[settings]", "weight = 0\n\n[settings]"),
        )
        .unwrap_err();
        assert!(err.to_string().starts_with("initial[1].weight"), "{err}");
        let err = parse_scenario(&MINIMAL.replace("step = 0.01", "step = -1.0")).unwrap_err();
        assert!(err.to_string().starts_with("settings.step"), "{err}");
    }

    #[test]
    fn builtins_are_valid_twenty_penguin_herds() {
        let all = builtin_scenarios();
        assert_eq!(all.len(), 4);
        for config in &all {
            config.validate().unwrap();
            assert_eq!(config.params.home, 4.0);
            assert_eq!(config.total_weight(), 20);
            assert_eq!(parse_scenario(&config.to_toml()).unwrap(), *config);
        }
        assert!(builtin("nope").is_err());
    }

    #[test]
    fn random_herd_examples() {
        let a = random_herd(7, 6, -3.0..3.0, 1..=3);
        assert_eq!(a, random_herd(7, 6, -3.0..3.0, 1..=3));
        assert_ne!(a, random_herd(8, 6, -3.0..3.0, 1..=3));
        assert_eq!(random_herd(1, 1, 0.0..1.0, 2..=2).len(), 1);
        assert!(a.iter().all(|&(p, w)| p < 3.0 && (1..=3).contains(&w)));
    }

    #[test]
    fn seeded_scenario_keeps_envelope() {
        let mut config = parse_scenario(MINIMAL).unwrap();
        config.seed = Some(42);
        let state = config.initial_state();
        assert_eq!(state.len(), 2);
        assert!(state.positions.iter().all(|&p| (-1.0..1.0).contains(&p)));
        assert_eq!(parse_scenario(&config.to_toml()).unwrap(), config);
    }

    proptest! {
        #[test]
        fn random_herds_are_strictly_increasing(
            seed in any::<u64>(),
            n in 1usize..30,
            lo in -10.0f64..0.0,
            width in 0.001f64..10.0,
        ) {
            let herd = random_herd(seed, n, lo..lo + width, 1..=4);
            prop_assert!(herd.windows(2).all(|w| w[0].0 < w[1].0));
            prop_assert_eq!(herd.iter().map(|g| g.1 as usize).sum::<usize>() >= n, true);
            prop_assert!(herd.iter().all(|g| g.0 < lo + width));
        }

        #[test]
        fn documents_round_trip(
            epsilon in 0.0f64..0.5,
            kappa in 2u32..6,
            amplitude in 0.0f64..1.0,
            positions in prop::collection::vec(-5.0f64..3.9, 1..8),
        ) {
            let mut config = parse_scenario(MINIMAL).unwrap();
            config.params.epsilon = epsilon;
            config.params.kappa = kappa;
            config.params.environment = waves(amplitude, 1.0, 0.25);
            config.initial = singletons(&positions);
            let text = config.to_toml();
            let back = parse_scenario(&text).unwrap();
            prop_assert_eq!(&back, &config);
            prop_assert_eq!(back.to_toml(), text);
        }
    }
}
