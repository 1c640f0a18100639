//! Pointwise right-hand side of the herd's equation of motion for a fixed
//! number of groups.
//!
//! For group `i` with position `p_i` and weight `w_i`:
//!
//! ```text
//! dp_i/dt = P_i · (epsilon + V_i) + f(p_i, t)
//! V_i     = (1 - mu(w_i)) · m_i + v · mu(w_i)
//! m_i     = Σ_j sign(p_j - p_i) · w_j · s(|p_i - p_j|)
//! P_i     = max(indicator(w_i), max_{j≠i} phi(|p_i - p_j|))
//! ```

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::functions::{Environment, PanicProfile, SightKernel};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("group index {index} out of range for a herd of {len} groups")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("positions ({positions}) and weights ({weights}) differ in length")]
    LengthMismatch { positions: usize, weights: usize },
    #[error("params.{field}: {reason}")]
    InvalidParam { field: &'static str, reason: String },
}

/// Scalar constants and function choices shared by every group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    /// Homeward drift speed of a self-confident group.
    pub epsilon: f64,
    /// Cruising speed of groups with at least `kappa` members.
    pub v: f64,
    /// Group size from which the cruising strategy takes over.
    pub kappa: u32,
    /// Burrow position `H`.
    pub home: f64,
    /// Self-confidence distance: neighbours this close remove all panic.
    pub d_lo: f64,
    /// Panic distance: neighbours this far away offer no reassurance.
    pub d_hi: f64,
    pub sight: SightKernel,
    pub panic_profile: PanicProfile,
    pub environment: Environment,
}

impl ModelParams {
    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |field, reason: String| Err(ModelError::InvalidParam { field, reason });
        for (field, value) in [
            ("epsilon", self.epsilon),
            ("v", self.v),
            ("home", self.home),
            ("d_lo", self.d_lo),
            ("d_hi", self.d_hi),
        ] {
            if !value.is_finite() {
                return bad(field, format!("must be finite (got {value})"));
            }
        }
        if self.epsilon < 0.0 {
            return bad(
                "epsilon",
                format!("must satisfy ε ≥ 0 (got {})", self.epsilon),
            );
        }
        if self.v <= self.epsilon {
            return bad(
                "v",
                format!(
                    "must satisfy v > ε (v = {}, epsilon = {})",
                    self.v, self.epsilon
                ),
            );
        }
        if self.kappa < 2 {
            return bad(
                "kappa",
                format!("must satisfy kappa ≥ 2 (got {})", self.kappa),
            );
        }
        if self.home <= 0.0 {
            return bad("home", format!("must satisfy H > 0 (got {})", self.home));
        }
        if self.d_lo <= 0.0 {
            return bad("d_lo", format!("must satisfy d_lo > 0 (got {})", self.d_lo));
        }
        if self.d_hi <= self.d_lo {
            return bad(
                "d_hi",
                format!(
                    "must satisfy d_hi > d_lo (d_hi = {}, d_lo = {})",
                    self.d_hi, self.d_lo
                ),
            );
        }
        self.sight
            .validate()
            .or_else(|reason| bad("sight", reason))?;
        self.environment
            .validate()
            .or_else(|reason| bad("environment", reason))?;
        Ok(())
    }

    #[inline]
    pub fn phi(&self, r: f64) -> f64 {
        self.panic_profile.eval(r, self.d_lo, self.d_hi)
    }
}

/// Cruising switch: 1 once a group has at least `kappa` members.
#[inline]
pub fn mu(ell: u32, kappa: u32) -> u32 {
    u32::from(ell >= kappa)
}

/// 1 for groups of two or more, 0 for a lone penguin.
#[inline]
pub fn group_indicator(ell: u32) -> u32 {
    u32::from(ell >= 2)
}

#[inline]
fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

fn check_index(i: usize, positions: &[f64], weights: &[u32]) -> Result<(), ModelError> {
    if positions.len() != weights.len() {
        return Err(ModelError::LengthMismatch {
            positions: positions.len(),
            weights: weights.len(),
        });
    }
    if i >= positions.len() {
        return Err(ModelError::IndexOutOfRange {
            index: i,
            len: positions.len(),
        });
    }
    Ok(())
}

#[inline]
fn visual_drive_unchecked(
    i: usize,
    positions: &[f64],
    weights: &[u32],
    sight: &SightKernel,
) -> f64 {
    let pi = positions[i];
    positions
        .iter()
        .zip(weights)
        .map(|(&pj, &wj)| sign(pj - pi) * f64::from(wj) * sight.eval((pi - pj).abs()))
        .sum()
}

/// Drive for a herd known to be sorted: groups with a larger index are ahead.
/// Trial points of an integration step may overshoot a contact, and reading
/// the direction off the index keeps the extrapolation smooth there.
#[inline]
fn visual_drive_ordered(i: usize, positions: &[f64], weights: &[u32], sight: &SightKernel) -> f64 {
    let pi = positions[i];
    positions
        .iter()
        .zip(weights)
        .enumerate()
        .filter(|&(j, _)| j != i)
        .map(|(j, (&pj, &wj))| {
            let dir = if j > i { 1.0 } else { -1.0 };
            dir * f64::from(wj) * sight.eval((pi - pj).abs())
        })
        .sum()
}

#[inline]
fn strategic_velocity_unchecked(
    i: usize,
    positions: &[f64],
    weights: &[u32],
    params: &ModelParams,
    ordered: bool,
) -> f64 {
    if mu(weights[i], params.kappa) == 1 {
        params.v
    } else if ordered {
        visual_drive_ordered(i, positions, weights, &params.sight)
    } else {
        visual_drive_unchecked(i, positions, weights, &params.sight)
    }
}

#[inline]
fn panic_unchecked(i: usize, positions: &[f64], weights: &[u32], params: &ModelParams) -> f64 {
    if group_indicator(weights[i]) == 1 {
        return 1.0;
    }
    let pi = positions[i];
    let nearest = positions
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != i)
        .map(|(_, &pj)| (pi - pj).abs())
        .fold(f64::INFINITY, f64::min);
    if nearest.is_finite() {
        params.phi(nearest)
    } else {
        params.panic_profile.at_infinity()
    }
}

/// Signed visual drive `m_i`: weighted sight of the groups ahead minus the
/// groups behind.
pub fn visual_drive(
    i: usize,
    positions: &[f64],
    weights: &[u32],
    sight: &SightKernel,
) -> Result<f64, ModelError> {
    check_index(i, positions, weights)?;
    Ok(visual_drive_unchecked(i, positions, weights, sight))
}

/// Strategic velocity `V_i`: exactly `v` for groups of size ≥ kappa, the
/// visual drive otherwise.
pub fn strategic_velocity(
    i: usize,
    positions: &[f64],
    weights: &[u32],
    params: &ModelParams,
) -> Result<f64, ModelError> {
    check_index(i, positions, weights)?;
    Ok(strategic_velocity_unchecked(
        i, positions, weights, params, false,
    ))
}

/// Panic multiplier `P_i ∈ [0, 1]`.
///
/// φ is nonincreasing, so the max over the other groups is φ at the nearest
/// one. A group with nobody else around takes φ's limit at infinity.
pub fn panic(
    i: usize,
    positions: &[f64],
    weights: &[u32],
    params: &ModelParams,
) -> Result<f64, ModelError> {
    check_index(i, positions, weights)?;
    Ok(panic_unchecked(i, positions, weights, params))
}

/// Panic values for every group at once.
pub fn panic_all(positions: &[f64], weights: &[u32], params: &ModelParams) -> Vec<f64> {
    (0..positions.len())
        .map(|i| panic_unchecked(i, positions, weights, params))
        .collect()
}

/// Velocity of every group, written into `out`.
pub fn rhs_into(positions: &[f64], weights: &[u32], t: f64, params: &ModelParams, out: &mut [f64]) {
    rhs_impl(positions, weights, t, params, out, false);
}

/// Like [`rhs_into`], with the direction of every neighbour taken from its
/// index. Agrees with [`rhs_into`] on strictly increasing positions.
pub fn rhs_ordered_into(
    positions: &[f64],
    weights: &[u32],
    t: f64,
    params: &ModelParams,
    out: &mut [f64],
) {
    rhs_impl(positions, weights, t, params, out, true);
}

fn rhs_impl(
    positions: &[f64],
    weights: &[u32],
    t: f64,
    params: &ModelParams,
    out: &mut [f64],
    ordered: bool,
) {
    debug_assert_eq!(positions.len(), weights.len());
    debug_assert_eq!(positions.len(), out.len());
    for (i, slot) in out.iter_mut().enumerate() {
        let panic = panic_unchecked(i, positions, weights, params);
        let intent = if panic == 0.0 {
            0.0
        } else {
            panic
                * (params.epsilon
                    + strategic_velocity_unchecked(i, positions, weights, params, ordered))
        };
        *slot = intent + params.environment.eval(positions[i], t);
    }
}

/// Velocity of every group.
pub fn rhs(positions: &[f64], weights: &[u32], t: f64, params: &ModelParams) -> Vec<f64> {
    let mut out = vec![0.0; positions.len()];
    rhs_into(positions, weights, t, params, &mut out);
    out
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use proptest::prelude::*;

    pub(crate) fn params() -> ModelParams {
        ModelParams {
            epsilon: 0.1,
            v: 1.0,
            kappa: 3,
            home: 4.0,
            d_lo: 0.5,
            d_hi: 2.0,
            sight: SightKernel::Constant,
            panic_profile: PanicProfile::Ramp,
            environment: Environment::Neutral,
        }
    }

    #[test]
    fn mu_and_indicator() {
        assert_eq!(mu(3, 3), 1);
        assert_eq!(mu(2, 3), 0);
        assert_eq!(mu(7, 2), 1);
        assert_eq!(group_indicator(1), 0);
        assert_eq!(group_indicator(2), 1);
        assert_eq!(group_indicator(5), 1);
    }

    #[test]
    fn visual_drive_examples() {
        let p = [0.0, 1.0, 2.0];
        let w = [1, 1, 1];
        // i = 0 is the rear group: two groups ahead, none behind
        assert_eq!(
            visual_drive(0, &p, &w, &SightKernel::Constant).unwrap(),
            2.0
        );
        assert_eq!(
            visual_drive(1, &p, &w, &SightKernel::Constant).unwrap(),
            0.0
        );
        let g = visual_drive(0, &p, &w, &SightKernel::Gaussian).unwrap();
        assert!((g - 0.386_195).abs() < 1e-6, "{g}");
        assert!((g - ((-1.0f64).exp() + (-4.0f64).exp())).abs() < 1e-15);
        assert!(matches!(
            visual_drive(3, &p, &w, &SightKernel::Constant),
            Err(ModelError::IndexOutOfRange { index: 3, len: 3 })
        ));
    }

    #[test]
    fn strategic_velocity_examples() {
        let mut prm = params();
        let p = [0.0, 1.0, 2.0];
        assert_eq!(strategic_velocity(1, &p, &[1, 3, 1], &prm).unwrap(), prm.v);
        assert_eq!(strategic_velocity(0, &p, &[1, 1, 1], &prm).unwrap(), 2.0);
        assert_eq!(strategic_velocity(0, &[1.5], &[2], &prm).unwrap(), 0.0);
        prm.kappa = 2;
        assert_eq!(strategic_velocity(0, &[1.5], &[2], &prm).unwrap(), 1.0);
    }

    #[test]
    fn panic_examples() {
        let prm = params();
        assert_eq!(panic(0, &[0.0, 100.0], &[2, 1], &prm).unwrap(), 1.0);
        assert_eq!(panic(0, &[0.0, 10.0], &[1, 1], &prm).unwrap(), 0.0);
        assert_eq!(panic(1, &[0.0, 0.4], &[1, 1], &prm).unwrap(), 1.0);
        // lone groups: singleton freezes, pair proceeds
        assert_eq!(panic(0, &[0.0], &[1], &prm).unwrap(), 0.0);
        assert_eq!(panic(0, &[0.0], &[2], &prm).unwrap(), 1.0);
        let calm = ModelParams {
            panic_profile: PanicProfile::AlwaysOne,
            ..prm
        };
        assert_eq!(panic(0, &[0.0], &[1], &calm).unwrap(), 1.0);
    }

    #[test]
    fn rhs_examples() {
        let prm = params();
        assert_eq!(rhs(&[0.0], &[1], 0.0, &prm), vec![0.0]);
        let big = rhs(&[0.0, 30.0], &[3, 1], 0.0, &prm);
        assert_eq!(big[0], prm.epsilon + prm.v);

        let pair = ModelParams {
            epsilon: 0.0,
            panic_profile: PanicProfile::AlwaysOne,
            ..prm
        };
        assert_eq!(rhs(&[-1.0, 1.0], &[1, 1], 0.0, &pair), vec![1.0, -1.0]);
    }

    #[test]
    fn validation_names_field() {
        let mut prm = params();
        prm.kappa = 1;
        let msg = prm.validate().unwrap_err().to_string();
        assert!(msg.contains("kappa ≥ 2"), "{msg}");
        let mut prm = params();
        prm.v = prm.epsilon;
        let msg = prm.validate().unwrap_err().to_string();
        assert!(msg.contains("v > ε"), "{msg}");
        let mut prm = params();
        prm.d_hi = prm.d_lo;
        assert!(prm.validate().unwrap_err().to_string().contains("d_hi"));
        let mut prm = params();
        prm.home = 0.0;
        assert!(prm.validate().is_err());
        assert!(params().validate().is_ok());
    }

    fn kernel() -> impl Strategy<Value = SightKernel> {
        prop_oneof![
            Just(SightKernel::Constant),
            Just(SightKernel::Gaussian),
            (0.2f64..5.0).prop_map(|radius| SightKernel::Ramp { radius }),
        ]
    }

    /// Sorted positions with pairwise gaps of at least `gap`.
    fn herd(max_len: usize, gap: f64) -> impl Strategy<Value = (Vec<f64>, Vec<u32>)> {
        prop::collection::vec((gap..gap + 2.0, 1u32..5), 1..=max_len).prop_map(|raw| {
            let mut x = -5.0;
            raw.into_iter()
                .map(|(dx, w)| {
                    x += dx;
                    (x, w)
                })
                .unzip()
        })
    }

    proptest! {
        #[test]
        fn switches_are_binary_and_monotone(ell in 1u32..50, kappa in 2u32..20) {
            prop_assert!(mu(ell, kappa) <= 1);
            prop_assert!(mu(ell, kappa) <= mu(ell + 1, kappa));
            prop_assert!(group_indicator(ell) <= group_indicator(ell + 1));
        }

        #[test]
        fn panic_in_unit_interval((p, w) in herd(8, 0.01), sight in kernel()) {
            let prm = ModelParams { sight, ..params() };
            for i in 0..p.len() {
                let value = panic(i, &p, &w, &prm).unwrap();
                prop_assert!((0.0..=1.0).contains(&value));
                if w[i] >= 2 {
                    prop_assert_eq!(value, 1.0);
                }
            }
        }

        #[test]
        fn pair_drive_is_antisymmetric(gap in 0.0f64..20.0, weight in 1u32..6, sight in kernel()) {
            let p = [-gap / 2.0, gap / 2.0];
            let w = [weight, weight];
            let front = visual_drive(1, &p, &w, &sight).unwrap();
            let rear = visual_drive(0, &p, &w, &sight).unwrap();
            prop_assert_eq!(rear, -front);
        }

        #[test]
        fn drive_bounded_by_visible_mass((p, w) in herd(10, 0.01), sight in kernel()) {
            let total: u32 = w.iter().sum();
            for i in 0..p.len() {
                let m = visual_drive(i, &p, &w, &sight).unwrap();
                prop_assert!(m.abs() <= sight.peak() * f64::from(total - w[i]) + 1e-12);
            }
        }

        #[test]
        fn rhs_is_lipschitz_away_from_contact(
            (p, w) in herd(8, 0.2),
            sight in kernel(),
            dir in prop::collection::vec(-1.0f64..1.0, 8),
            t in 0.0f64..10.0,
        ) {
            let prm = ModelParams {
                sight,
                environment: Environment::Waves {
                    amplitude: 0.4, omega: 2.0, phase: 0.0, shoreline: 0.0, blend: 0.5,
                },
                ..params()
            };
            let total: f64 = w.iter().map(|&x| f64::from(x)).sum();
            // Row-wise gradient bound: kernels have Lipschitz constant ≤ 5 here,
            // φ at most 1/(d_hi - d_lo), the shoreline ramp amplitude/blend.
            let lipschitz = 2.0 * total * 5.0
                + std::f64::consts::SQRT_2 * (prm.epsilon + total) / (prm.d_hi - prm.d_lo)
                + 0.8;
            let bound = lipschitz * (p.len() as f64).sqrt();
            let h = 0.2 / 4.0 * 0.5;
            let n = p.len();
            let norm = dir[..n].iter().map(|d| d * d).sum::<f64>().sqrt().max(1e-9);
            let shifted: Vec<f64> = p.iter().zip(&dir).map(|(x, d)| x + h * d / norm).collect();
            let a = rhs(&p, &w, t, &prm);
            let b = rhs(&shifted, &w, t, &prm);
            let diff = a.iter().zip(&b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
            prop_assert!(diff / h <= bound, "quotient {} exceeds {}", diff / h, bound);
        }
    }
}
