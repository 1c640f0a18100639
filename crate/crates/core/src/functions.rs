//! Catalogue of the scalar functions that parameterize the model: the
//! eye-sight kernel, the panic profile and the environment forcing.

use serde::{Deserialize, Serialize};

/// Eye-sight kernel: how strongly a group weighs another group at distance `r`.
///
/// Every kind is nonnegative, nonincreasing and Lipschitz on `[0, ∞)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", from = "doc::Sight")]
pub enum SightKernel {
    /// Perfect eye-sight: every group is seen with weight 1.
    Constant,
    /// `exp(-r^2)`: nearby groups count much more than distant ones.
    Gaussian,
    /// `max(0, 1 - r / radius)`: nothing beyond `radius` is seen.
    Ramp { radius: f64 },
}

impl SightKernel {
    #[inline]
    pub fn eval(&self, r: f64) -> f64 {
        match *self {
            SightKernel::Constant => 1.0,
            SightKernel::Gaussian => (-r * r).exp(),
            SightKernel::Ramp { radius } => (1.0 - r / radius).max(0.0),
        }
    }

    /// Value at distance zero, the supremum of the kernel.
    pub fn peak(&self) -> f64 {
        self.eval(0.0)
    }

    pub(crate) fn validate(&self) -> Result<(), String> {
        match *self {
            SightKernel::Ramp { radius } if !(radius.is_finite() && radius > 0.0) => {
                Err(format!("ramp radius must be finite and > 0 (got {radius})"))
            }
            _ => Ok(()),
        }
    }
}

/// Shape of the isolation profile φ between the self-confidence distance
/// `d_lo` and the panic distance `d_hi`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", from = "doc::Panic")]
pub enum PanicProfile {
    /// `clamp((d_hi - r) / (d_hi - d_lo), 0, 1)`.
    Ramp,
    /// φ ≡ 1: groups never panic.
    AlwaysOne,
}

impl PanicProfile {
    #[inline]
    pub fn eval(&self, r: f64, d_lo: f64, d_hi: f64) -> f64 {
        match self {
            PanicProfile::Ramp => ((d_hi - r) / (d_hi - d_lo)).clamp(0.0, 1.0),
            PanicProfile::AlwaysOne => 1.0,
        }
    }

    /// Limit of φ(r) as r → ∞. Used as the value of the neighbour term when a
    /// group has no other group to look at.
    pub fn at_infinity(&self) -> f64 {
        match self {
            PanicProfile::Ramp => 0.0,
            PanicProfile::AlwaysOne => 1.0,
        }
    }
}

/// External forcing `f(r, t)` acting on every group regardless of panic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", from = "doc::Env")]
pub enum Environment {
    /// `f ≡ 0`.
    Neutral,
    /// Sea waves below the shoreline:
    /// `amplitude · sin(omega·t + phase) · clamp((shoreline - r) / blend, 0, 1)`.
    Waves {
        amplitude: f64,
        omega: f64,
        phase: f64,
        shoreline: f64,
        blend: f64,
    },
}

fn default_blend() -> f64 {
    0.5
}

/// Input forms of the function catalogue. serde ignores extra keys next to
/// a unit variant's tag, so every kind is read as a struct variant instead.
mod doc {
    use serde::Deserialize;

    #[derive(Deserialize)]
    #[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
    pub(super) enum Sight {
        Constant {},
        Gaussian {},
        Ramp { radius: f64 },
    }

    impl From<Sight> for super::SightKernel {
        fn from(d: Sight) -> Self {
            match d {
                Sight::Constant {} => Self::Constant,
                Sight::Gaussian {} => Self::Gaussian,
                Sight::Ramp { radius } => Self::Ramp { radius },
            }
        }
    }

    #[derive(Deserialize)]
    #[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
    pub(super) enum Panic {
        Ramp {},
        AlwaysOne {},
    }

    impl From<Panic> for super::PanicProfile {
        fn from(d: Panic) -> Self {
            match d {
                Panic::Ramp {} => Self::Ramp,
                Panic::AlwaysOne {} => Self::AlwaysOne,
            }
        }
    }

    #[derive(Deserialize)]
    #[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
    pub(super) enum Env {
        Neutral {},
        Waves {
            amplitude: f64,
            omega: f64,
            #[serde(default)]
            phase: f64,
            #[serde(default)]
            shoreline: f64,
            #[serde(default = "super::default_blend")]
            blend: f64,
        },
    }

    impl From<Env> for super::Environment {
        fn from(d: Env) -> Self {
            match d {
                Env::Neutral {} => Self::Neutral,
                Env::Waves {
                    amplitude,
                    omega,
                    phase,
                    shoreline,
                    blend,
                } => Self::Waves {
                    amplitude,
                    omega,
                    phase,
                    shoreline,
                    blend,
                },
            }
        }
    }
}

impl Environment {
    #[inline]
    pub fn eval(&self, r: f64, t: f64) -> f64 {
        match *self {
            Environment::Neutral => 0.0,
            Environment::Waves {
                amplitude,
                omega,
                phase,
                shoreline,
                blend,
            } => {
                let depth = ((shoreline - r) / blend).clamp(0.0, 1.0);
                if depth == 0.0 {
                    return 0.0;
                }
                amplitude * (omega * t + phase).sin() * depth
            }
        }
    }

    /// True when `f` vanishes everywhere, not just at the sampled points.
    pub fn is_identically_zero(&self) -> bool {
        match *self {
            Environment::Neutral => true,
            Environment::Waves { amplitude, .. } => amplitude == 0.0,
        }
    }

    /// Exact value of `inf { f(r, t) : r ∈ ℝ, t ≥ t_from }`.
    ///
    /// The shoreline ramp reaches both 0 (on land) and 1 (deep water), so the
    /// infimum is the most negative value the time factor can take, capped at 0.
    pub fn infimum_from(&self, t_from: f64) -> f64 {
        match *self {
            Environment::Neutral => 0.0,
            Environment::Waves {
                amplitude,
                omega,
                phase,
                ..
            } => {
                if amplitude == 0.0 {
                    0.0
                } else if omega != 0.0 {
                    -amplitude.abs()
                } else {
                    (amplitude * (omega * t_from + phase).sin()).min(0.0)
                }
            }
        }
    }

    pub(crate) fn validate(&self) -> Result<(), String> {
        match *self {
            Environment::Neutral => Ok(()),
            Environment::Waves {
                amplitude,
                omega,
                phase,
                shoreline,
                blend,
            } => {
                for (name, value) in [
                    ("amplitude", amplitude),
                    ("omega", omega),
                    ("phase", phase),
                    ("shoreline", shoreline),
                ] {
                    if !value.is_finite() {
                        return Err(format!("waves {name} must be finite (got {value})"));
                    }
                }
                if !(blend.is_finite() && blend > 0.0) {
                    return Err(format!("waves blend must be finite and > 0 (got {blend})"));
                }
                Ok(())
            }
        }
    }
}
