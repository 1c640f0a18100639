//! Seeded random herds shared by the integration tests.
#![allow(dead_code)]

use std::path::PathBuf;

use parade_core::{
    parse_scenario, Environment, HerdState, ModelParams, PanicProfile, ScenarioConfig, SightKernel,
    SolverSettings, Trajectory,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct Case {
    pub seed: u64,
    pub initial: HerdState,
    pub params: ModelParams,
    pub settings: SolverSettings,
}

#[derive(Clone, Copy)]
pub struct Limits {
    pub max_groups: usize,
    pub max_population: u32,
    pub max_weight: u32,
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_sight(rng: &mut ChaCha8Rng) -> SightKernel {
    match rng.random_range(0..3) {
        0 => SightKernel::Constant,
        1 => SightKernel::Gaussian,
        _ => SightKernel::Ramp {
            radius: rng.random_range(1.0..5.0),
        },
    }
}

pub fn random_waves(rng: &mut ChaCha8Rng, max_amplitude: f64) -> Environment {
    Environment::Waves {
        amplitude: rng.random_range(0.0..max_amplitude),
        omega: rng.random_range(0.5..3.0),
        phase: rng.random_range(0.0..std::f64::consts::TAU),
        shoreline: 0.0,
        blend: rng.random_range(0.3..1.0),
    }
}

pub fn random_params(rng: &mut ChaCha8Rng, environment: Environment) -> ModelParams {
    let epsilon = rng.random_range(0.05..0.5);
    let d_lo = rng.random_range(0.2..1.0);
    ModelParams {
        epsilon,
        v: epsilon + rng.random_range(0.2..1.5),
        kappa: rng.random_range(2..=5),
        home: 4.0,
        d_lo,
        d_hi: d_lo + rng.random_range(0.2..1.5),
        sight: random_sight(rng),
        panic_profile: if rng.random_bool(0.8) {
            PanicProfile::Ramp
        } else {
            PanicProfile::AlwaysOne
        },
        environment,
    }
}

/// Herd of at most `limits.max_groups` groups below the burrow, total weight
/// capped at `limits.max_population`.
pub fn random_herd(rng: &mut ChaCha8Rng, limits: Limits, span: (f64, f64)) -> HerdState {
    let n = rng.random_range(1..=limits.max_groups);
    let mut left = limits.max_population;
    let mut groups = Vec::new();
    for _ in 0..n {
        if left == 0 {
            break;
        }
        let w = rng.random_range(1..=limits.max_weight.min(left));
        left -= w;
        groups.push((rng.random_range(span.0..span.1), w));
    }
    groups.sort_by(|a, b| a.0.total_cmp(&b.0));
    groups.dedup_by(|later, kept| {
        if later.0 == kept.0 {
            kept.1 += later.1;
            true
        } else {
            false
        }
    });
    HerdState::new(&groups).expect("random herd is valid")
}

pub fn settings(step: f64, horizon: f64) -> SolverSettings {
    SolverSettings {
        step,
        event_tol: 1e-9,
        merge_gap: 1e-9,
        horizon,
        max_events: 1000,
    }
}

/// General purpose random scenario: any catalogue function, waves up to 0.6.
pub fn random_case(seed: u64, limits: Limits, horizon: f64) -> Case {
    let mut rng = rng(seed);
    let environment = if rng.random_bool(0.5) {
        Environment::Neutral
    } else {
        random_waves(&mut rng, 0.6)
    };
    let params = random_params(&mut rng, environment);
    let initial = random_herd(&mut rng, limits, (-6.0, 3.5));
    Case {
        seed,
        initial,
        params,
        settings: settings(0.01, horizon),
    }
}

pub fn scenario_path(file: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../scenarios")
        .join(file)
}

pub fn load_scenario(file: &str) -> ScenarioConfig {
    let text = std::fs::read_to_string(scenario_path(file)).expect("fixture exists");
    parse_scenario(&text).expect("fixture parses")
}

/// Arrived weight strictly before `t`.
pub fn arrived_before(traj: &Trajectory, t: f64) -> u64 {
    traj.arrivals()
        .iter()
        .filter(|a| a.time < t)
        .map(|a| u64::from(a.weight))
        .sum()
}

/// Conservation violations over every recorded sample: active weight of the
/// segment plus the weight that arrived before the segment opened.
pub fn conservation_violations(traj: &Trajectory) -> Vec<String> {
    let total = traj.total_weight();
    let mut out = Vec::new();
    for segment in &traj.segments {
        let active: u64 = segment.weights.iter().map(|&w| u64::from(w)).sum();
        let arrived: u64 = traj
            .arrivals()
            .iter()
            .filter(|a| a.time <= segment.start())
            .map(|a| u64::from(a.weight))
            .sum();
        for &t in &segment.times {
            if active + arrived != total {
                out.push(format!(
                    "t = {t}: {active} active + {arrived} home != {total}"
                ));
            }
        }
    }
    out
}
