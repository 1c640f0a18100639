//! Stop-and-go integration of the herd.
//!
//! Between resets the groups stay strictly ordered and the velocity field is
//! Lipschitz, so a fixed-step RK4 integrator advances them. A step that ends
//! with two neighbours in contact (gap ≤ `merge_gap`) or a group at or past
//! the burrow is bisected down to `event_tol`. At the localized instant
//! coincident groups are fused into one (merges first, leftmost first), groups
//! at the burrow are clamped and retired, and integration restarts from the
//! reduced herd.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{panic_all, rhs_into, rhs_ordered_into, ModelError, ModelParams};
use crate::state::{Arrival, GroupId, HerdState, StateError};

/// Hard cap on bisection rounds per event. Reaching it means `event_tol` is
/// below what floating point can resolve at the current time.
const MAX_BISECTIONS: u32 = 200;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    State(#[from] StateError),
    #[error("settings.{field}: {reason}")]
    InvalidSettings { field: &'static str, reason: String },
    #[error("event localization failed near t = {time} after {iterations} bisections (step too large for the dynamics or event_tol below float resolution)")]
    EventLocalization { time: f64, iterations: u32 },
    #[error("more than {limit} events by t = {time}; reset times may be accumulating")]
    TooManyEvents { limit: usize, time: f64 },
    #[error("merge participants {participants:?} are not adjacent in the ordering")]
    NonAdjacentMerge { participants: Vec<GroupId> },
    #[error("event participant {id} is not an active group")]
    UnknownGroup { id: GroupId },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSettings {
    /// Base RK4 step.
    pub step: f64,
    /// Width of the time bracket an event is localized to.
    pub event_tol: f64,
    /// Neighbours closer than this are in contact.
    pub merge_gap: f64,
    pub horizon: f64,
    /// Zeno guard on the number of merge and arrival events.
    pub max_events: usize,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            step: 0.01,
            event_tol: 1e-9,
            merge_gap: 1e-9,
            horizon: 20.0,
            max_events: 10_000,
        }
    }
}

impl SolverSettings {
    pub fn validate(&self) -> Result<(), EngineError> {
        let bad = |field, reason: String| Err(EngineError::InvalidSettings { field, reason });
        if !(self.step.is_finite() && self.step > 0.0) {
            return bad(
                "step",
                format!("must be finite and > 0 (got {})", self.step),
            );
        }
        if !(self.event_tol > 0.0 && self.event_tol <= self.step) {
            return bad(
                "event_tol",
                format!("must satisfy 0 < event_tol ≤ step (got {})", self.event_tol),
            );
        }
        if !(self.merge_gap.is_finite() && self.merge_gap >= 0.0) {
            return bad(
                "merge_gap",
                format!("must be finite and ≥ 0 (got {})", self.merge_gap),
            );
        }
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return bad(
                "horizon",
                format!("must be finite and > 0 (got {})", self.horizon),
            );
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Merge,
    Arrival,
    Horizon,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub kind: EventKind,
    pub time: f64,
    /// Groups involved, in position order.
    pub participants: Vec<GroupId>,
    /// Where a merged group starts out.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub merged_position: Option<f64>,
    /// Id minted for the merged group.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub merged_into: Option<GroupId>,
}

/// Solution on one interval between resets, during which the set of active
/// groups and their weights do not change.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub ids: Vec<GroupId>,
    pub weights: Vec<u32>,
    pub times: Vec<f64>,
    /// One row per sample time, one column per group.
    pub positions: Vec<Vec<f64>>,
    pub panic: Vec<Vec<f64>>,
}

impl Segment {
    fn open(state: &HerdState, params: &ModelParams) -> Self {
        let mut segment = Self {
            ids: state.ids.clone(),
            weights: state.weights.clone(),
            times: Vec::new(),
            positions: Vec::new(),
            panic: Vec::new(),
        };
        segment.record(state, params);
        segment
    }

    fn record(&mut self, state: &HerdState, params: &ModelParams) {
        let positions: Vec<f64> = state
            .positions
            .iter()
            .map(|&p| p.min(params.home))
            .collect();
        self.panic
            .push(panic_all(&positions, &state.weights, params));
        self.positions.push(positions);
        self.times.push(state.time);
    }

    pub fn start(&self) -> f64 {
        self.times[0]
    }

    pub fn end(&self) -> f64 {
        *self
            .times
            .last()
            .expect("segments hold at least one sample")
    }

    /// Positions at `t` by linear interpolation between samples.
    pub fn positions_at(&self, t: f64) -> Vec<f64> {
        let k = self.times.partition_point(|&s| s <= t);
        if k == 0 {
            return self.positions[0].clone();
        }
        if k == self.times.len() {
            return self.positions[k - 1].clone();
        }
        let (t0, t1) = (self.times[k - 1], self.times[k]);
        let theta = if t1 > t0 { (t - t0) / (t1 - t0) } else { 0.0 };
        self.positions[k - 1]
            .iter()
            .zip(&self.positions[k])
            .map(|(a, b)| a + theta * (b - a))
            .collect()
    }
}

/// Complete record of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub segments: Vec<Segment>,
    pub events: Vec<Event>,
    /// Parents of every group minted by a merge.
    pub genealogy: BTreeMap<GroupId, Vec<GroupId>>,
    pub initial: HerdState,
    pub final_state: HerdState,
    pub home: f64,
    pub settings: SolverSettings,
}

/// Active groups of a trajectory at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub time: f64,
    pub ids: Vec<GroupId>,
    pub positions: Vec<f64>,
    pub weights: Vec<u32>,
}

impl Trajectory {
    pub fn start_time(&self) -> f64 {
        self.initial.time
    }

    pub fn end_time(&self) -> f64 {
        self.final_state.time
    }

    /// Conserved population ℳ.
    pub fn total_weight(&self) -> u64 {
        self.initial.total_weight()
    }

    pub fn arrivals(&self) -> &[Arrival] {
        &self.final_state.arrived
    }

    pub fn merge_count(&self) -> usize {
        self.events
            .iter()
            .filter(|e| e.kind == EventKind::Merge)
            .count()
    }

    /// Active herd at time `t`. At a reset instant the post-reset herd is
    /// returned. `None` outside the simulated span or once every group is home.
    pub fn snapshot(&self, t: f64) -> Option<Snapshot> {
        if t < self.start_time() || t > self.end_time() {
            return None;
        }
        if self.final_state.is_empty() && t >= self.end_time() {
            return None;
        }
        let segment = self.segments.iter().rev().find(|s| s.start() <= t)?;
        if t > segment.end() {
            return None;
        }
        Some(Snapshot {
            time: t,
            ids: segment.ids.clone(),
            positions: segment.positions_at(t),
            weights: segment.weights.clone(),
        })
    }
}

/// RK4 step of size `h` for the active groups of `state`.
pub fn advance(state: &HerdState, params: &ModelParams, h: f64) -> HerdState {
    let n = state.len();
    let (p, w, t) = (&state.positions, &state.weights, state.time);
    let mut k1 = vec![0.0; n];
    let mut k2 = vec![0.0; n];
    let mut k3 = vec![0.0; n];
    let mut k4 = vec![0.0; n];
    let mut tmp = vec![0.0; n];

    rhs_ordered_into(p, w, t, params, &mut k1);
    for i in 0..n {
        tmp[i] = p[i] + 0.5 * h * k1[i];
    }
    rhs_ordered_into(&tmp, w, t + 0.5 * h, params, &mut k2);
    for i in 0..n {
        tmp[i] = p[i] + 0.5 * h * k2[i];
    }
    rhs_ordered_into(&tmp, w, t + 0.5 * h, params, &mut k3);
    for i in 0..n {
        tmp[i] = p[i] + h * k3[i];
    }
    rhs_ordered_into(&tmp, w, t + h, params, &mut k4);

    let positions = (0..n)
        .map(|i| p[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect();
    HerdState {
        time: t + h,
        positions,
        ..state.clone()
    }
}

/// One base step of the smooth flow. Weights and ids are untouched.
pub fn step_smooth(
    state: &HerdState,
    params: &ModelParams,
    settings: &SolverSettings,
) -> HerdState {
    advance(state, params, settings.step)
}

/// Largest amount by which neighbours have passed through each other.
fn overlap(state: &HerdState) -> f64 {
    state
        .positions
        .windows(2)
        .map(|w| w[0] - w[1])
        .fold(0.0, f64::max)
}

fn has_event(state: &HerdState, home: f64, merge_gap: f64) -> bool {
    state.positions.windows(2).any(|w| w[1] - w[0] <= merge_gap)
        || state.positions.iter().any(|&p| p >= home)
}

/// First pending reset in `state`, if any: the leftmost chain of touching
/// neighbours, otherwise the leftmost group at or past the burrow.
pub fn detect(state: &HerdState, params: &ModelParams, settings: &SolverSettings) -> Option<Event> {
    let p = &state.positions;
    if let Some(first) = p.windows(2).position(|w| w[1] - w[0] <= settings.merge_gap) {
        let mut last = first + 1;
        while last + 1 < p.len() && p[last + 1] - p[last] <= settings.merge_gap {
            last += 1;
        }
        let range = first..=last;
        let mass: f64 = state.weights[range.clone()]
            .iter()
            .map(|&w| f64::from(w))
            .sum();
        let moment: f64 = p[range.clone()]
            .iter()
            .zip(&state.weights[range.clone()])
            .map(|(&x, &w)| x * f64::from(w))
            .sum();
        return Some(Event {
            kind: EventKind::Merge,
            time: state.time,
            participants: state.ids[range].to_vec(),
            merged_position: Some(moment / mass),
            merged_into: None,
        });
    }
    p.iter().position(|&x| x >= params.home).map(|i| Event {
        kind: EventKind::Arrival,
        time: state.time,
        participants: vec![state.ids[i]],
        merged_position: None,
        merged_into: None,
    })
}

/// Checks whether the step `pre → post` runs into a reset and, if so,
/// bisects the step to find the first instant where one is pending.
///
/// Every trial point is a fresh RK4 step from `pre`, so the returned state is
/// integrated to the event time rather than interpolated.
pub fn locate_event(
    pre: &HerdState,
    post: &HerdState,
    params: &ModelParams,
    settings: &SolverSettings,
) -> Result<Option<(Event, HerdState)>, EngineError> {
    if !has_event(post, params.home, settings.merge_gap) {
        return Ok(None);
    }
    let (mut lo, mut hi) = (0.0, post.time - pre.time);
    let mut at_hi = post.clone();
    let mut iterations = 0;
    loop {
        let bracketed = hi - lo <= settings.event_tol;
        // a fast neighbour can pass well through the contact point within
        // event_tol, so also shrink until the overlap is below merge_gap
        if bracketed && overlap(&at_hi) <= settings.merge_gap {
            break;
        }
        let mid = lo + 0.5 * (hi - lo);
        iterations += 1;
        if iterations > MAX_BISECTIONS || mid <= lo || mid >= hi {
            if bracketed {
                break;
            }
            return Err(EngineError::EventLocalization {
                time: pre.time + hi,
                iterations,
            });
        }
        let trial = advance(pre, params, mid);
        if has_event(&trial, params.home, settings.merge_gap) {
            hi = mid;
            at_hi = trial;
        } else {
            lo = mid;
        }
    }
    let event = detect(&at_hi, params, settings).expect("bracketed state has a pending event");
    Ok(Some((event, at_hi)))
}

fn participant_indices(state: &HerdState, event: &Event) -> Result<Vec<usize>, EngineError> {
    event
        .participants
        .iter()
        .map(|&id| state.index_of(id).ok_or(EngineError::UnknownGroup { id }))
        .collect()
}

/// Fuses the participants of a merge event into one group. Returns the new
/// herd and the id of the fused group.
pub fn apply_merge(state: &HerdState, event: &Event) -> Result<(HerdState, GroupId), EngineError> {
    debug_assert_eq!(event.kind, EventKind::Merge);
    let mut idx = participant_indices(state, event)?;
    idx.sort_unstable();
    let contiguous = idx.windows(2).all(|w| w[1] == w[0] + 1);
    if idx.len() < 2 || !contiguous {
        return Err(EngineError::NonAdjacentMerge {
            participants: event.participants.clone(),
        });
    }
    let (first, last) = (idx[0], idx[idx.len() - 1]);
    let weight: u32 = state.weights[first..=last].iter().sum();
    let position = event
        .merged_position
        .unwrap_or_else(|| state.positions[first..=last].iter().sum::<f64>() / idx.len() as f64);
    let id = state.next_id;

    let mut next = state.clone();
    next.time = event.time;
    next.ids.splice(first..=last, [id]);
    next.positions.splice(first..=last, [position]);
    next.weights.splice(first..=last, [weight]);
    next.next_id += 1;
    Ok((next, id))
}

/// Clamps the arriving group at the burrow and moves it to the arrived set.
pub fn apply_arrival(state: &HerdState, event: &Event) -> Result<HerdState, EngineError> {
    debug_assert_eq!(event.kind, EventKind::Arrival);
    let mut next = state.clone();
    next.time = event.time;
    for i in participant_indices(state, event)?.into_iter().rev() {
        let id = next.ids.remove(i);
        next.positions.remove(i);
        let weight = next.weights.remove(i);
        next.arrived.push(Arrival {
            id,
            weight,
            time: event.time,
        });
    }
    Ok(next)
}

struct Recorder<'a> {
    params: &'a ModelParams,
    settings: &'a SolverSettings,
    segments: Vec<Segment>,
    events: Vec<Event>,
    genealogy: BTreeMap<GroupId, Vec<GroupId>>,
    resets: usize,
}

impl Recorder<'_> {
    /// Applies every reset pending at the current instant.
    fn resolve(&mut self, mut state: HerdState) -> Result<HerdState, EngineError> {
        while let Some(mut event) = detect(&state, self.params, self.settings) {
            self.resets += 1;
            if self.resets > self.settings.max_events {
                return Err(EngineError::TooManyEvents {
                    limit: self.settings.max_events,
                    time: state.time,
                });
            }
            state = match event.kind {
                EventKind::Merge => {
                    let (next, id) = apply_merge(&state, &event)?;
                    event.merged_into = Some(id);
                    self.genealogy.insert(id, event.participants.clone());
                    next
                }
                _ => apply_arrival(&state, &event)?,
            };
            self.events.push(event);
        }
        Ok(state)
    }
}

/// Runs the stop-and-go construction from `initial` until every group is
/// home or the horizon is reached.
pub fn simulate(
    initial: &HerdState,
    params: &ModelParams,
    settings: &SolverSettings,
) -> Result<Trajectory, EngineError> {
    params.validate()?;
    settings.validate()?;
    initial.check_sorted()?;
    if initial.is_empty() {
        return Err(StateError::Empty.into());
    }
    if let Some(index) = initial.weights.iter().position(|&w| w == 0) {
        return Err(StateError::ZeroWeight { index }.into());
    }

    let horizon = settings.horizon;
    let fixed_environment = params.environment.is_identically_zero();
    let mut rec = Recorder {
        params,
        settings,
        segments: Vec::new(),
        events: Vec::new(),
        genealogy: BTreeMap::new(),
        resets: 0,
    };
    let mut state = rec.resolve(initial.clone())?;
    let mut velocity = Vec::new();

    'segments: while !state.is_empty() {
        let mut segment = Segment::open(&state, params);
        loop {
            if state.time >= horizon {
                rec.segments.push(segment);
                rec.events.push(Event {
                    kind: EventKind::Horizon,
                    time: state.time,
                    participants: state.ids.clone(),
                    merged_position: None,
                    merged_into: None,
                });
                break 'segments;
            }

            if fixed_environment {
                velocity.resize(state.len(), 0.0);
                rhs_into(
                    &state.positions,
                    &state.weights,
                    state.time,
                    params,
                    &mut velocity,
                );
                if velocity.iter().all(|&v| v == 0.0) {
                    // fixed point: nothing moves again
                    state.time = horizon;
                    segment.record(&state, params);
                    continue;
                }
            }

            let mut h = settings.step.min(horizon - state.time);
            if horizon - (state.time + h) < 1e-12 * horizon.max(1.0) {
                h = horizon - state.time;
            }
            let mut post = advance(&state, params, h);
            if h == horizon - state.time {
                post.time = horizon;
            }
            match locate_event(&state, &post, params, settings)? {
                None => {
                    state = post;
                    segment.record(&state, params);
                }
                Some((_, at_event)) => {
                    segment.record(&at_event, params);
                    rec.segments.push(segment);
                    state = rec.resolve(at_event)?;
                    continue 'segments;
                }
            }
        }
    }

    Ok(Trajectory {
        segments: rec.segments,
        events: rec.events,
        genealogy: rec.genealogy,
        initial: initial.clone(),
        final_state: state,
        home: params.home,
        settings: *settings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions::{Environment, PanicProfile, SightKernel};

    fn params() -> ModelParams {
        ModelParams {
            epsilon: 0.0,
            v: 1.0,
            kappa: 2,
            home: 4.0,
            d_lo: 0.5,
            d_hi: 2.0,
            sight: SightKernel::Constant,
            panic_profile: PanicProfile::AlwaysOne,
            environment: Environment::Neutral,
        }
    }

    fn settings() -> SolverSettings {
        SolverSettings {
            step: 0.1,
            event_tol: 1e-10,
            merge_gap: 1e-9,
            horizon: 10.0,
            max_events: 100,
        }
    }

    #[test]
    fn constant_speed_step_is_exact() {
        let s = HerdState::new(&[(0.0, 2)]).unwrap();
        let next = step_smooth(&s, &params(), &settings());
        assert!((next.positions[0] - 0.1).abs() < 1e-15);
        assert_eq!(next.weights, vec![2]);
    }

    #[test]
    fn frozen_singleton_does_not_move() {
        let prm = ModelParams {
            panic_profile: PanicProfile::Ramp,
            ..params()
        };
        let s = HerdState::new(&[(0.3, 1)]).unwrap();
        assert_eq!(step_smooth(&s, &prm, &settings()).positions, vec![0.3]);
    }

    #[test]
    fn symmetric_pair_closes_linearly() {
        let s = HerdState::new(&[(-1.0, 1), (1.0, 1)]).unwrap();
        let next = step_smooth(&s, &params(), &settings());
        let gap = next.positions[1] - next.positions[0];
        assert!((gap - 1.8).abs() < 1e-14, "{gap}");
    }

    #[test]
    fn locates_contact_of_symmetric_pair() {
        let prm = params();
        let set = settings();
        let mut s = HerdState::new(&[(-1.0, 1), (1.0, 1)]).unwrap();
        for _ in 0..9 {
            s = step_smooth(&s, &prm, &set);
        }
        let post = step_smooth(&s, &prm, &set);
        let (event, at) = locate_event(&s, &post, &prm, &set).unwrap().unwrap();
        assert_eq!(event.kind, EventKind::Merge);
        // contact registers once the gap is within merge_gap, at closing speed 2
        let slack = set.event_tol + set.merge_gap / 2.0 + 1e-12;
        assert!((event.time - 1.0).abs() <= slack, "{}", event.time);
        assert!(event.merged_position.unwrap().abs() < 1e-9);
        assert_eq!(at.time, event.time);
    }

    #[test]
    fn locates_arrival_crossing() {
        let prm = params();
        let set = settings();
        let s = HerdState::new(&[(3.95, 2)]).unwrap();
        let post = step_smooth(&s, &prm, &set);
        let (event, _) = locate_event(&s, &post, &prm, &set).unwrap().unwrap();
        assert_eq!(event.kind, EventKind::Arrival);
        assert!((event.time - 0.05).abs() <= set.event_tol + 1e-12);
    }

    #[test]
    fn static_herd_has_no_event() {
        let prm = ModelParams {
            panic_profile: PanicProfile::Ramp,
            ..params()
        };
        let s = HerdState::new(&[(-5.0, 1), (0.0, 1)]).unwrap();
        let post = step_smooth(&s, &prm, &settings());
        assert_eq!(post.positions, s.positions);
        assert!(locate_event(&s, &post, &prm, &settings())
            .unwrap()
            .is_none());
    }

    #[test]
    fn merges_sum_weights() {
        let s = HerdState::new(&[(-1.0, 1), (0.0, 1), (0.0, 2), (0.0, 1), (3.0, 2)]).unwrap();
        let event = detect(&s, &params(), &settings()).unwrap();
        assert_eq!(event.participants, vec![1, 2, 3]);
        let (merged, id) = apply_merge(&s, &event).unwrap();
        assert_eq!(id, 5);
        assert_eq!(merged.weights, vec![1, 4, 2]);
        assert_eq!(merged.ids, vec![0, 5, 4]);
        assert_eq!(merged.total_weight(), s.total_weight());

        let pair = HerdState::new(&[(1.0, 2), (1.0, 3)]).unwrap();
        let event = detect(&pair, &params(), &settings()).unwrap();
        let (merged, _) = apply_merge(&pair, &event).unwrap();
        assert_eq!(merged.weights, vec![5]);
    }

    #[test]
    fn rejects_non_adjacent_merge() {
        let s = HerdState::new(&[(0.0, 1), (1.0, 1), (2.0, 1)]).unwrap();
        let event = Event {
            kind: EventKind::Merge,
            time: 0.0,
            participants: vec![0, 2],
            merged_position: Some(1.0),
            merged_into: None,
        };
        assert!(matches!(
            apply_merge(&s, &event),
            Err(EngineError::NonAdjacentMerge { .. })
        ));
    }

    #[test]
    fn arrival_retires_group_only() {
        let s = HerdState::new(&[(1.0, 1), (2.5, 1), (4.0, 5)]).unwrap();
        let event = detect(&s, &params(), &settings()).unwrap();
        assert_eq!(event.kind, EventKind::Arrival);
        let next = apply_arrival(&s, &event).unwrap();
        assert_eq!(next.positions, vec![1.0, 2.5]);
        assert_eq!(
            next.arrived,
            vec![Arrival {
                id: 2,
                weight: 5,
                time: 0.0
            }]
        );
        assert_eq!(next.total_weight(), 7);
    }

    #[test]
    fn symmetric_pair_merges_then_arrives() {
        let prm = params();
        let set = settings();
        let traj = simulate(&HerdState::new(&[(-1.0, 1), (1.0, 1)]).unwrap(), &prm, &set).unwrap();
        let kinds: Vec<_> = traj.events.iter().map(|e| e.kind).collect();
        assert_eq!(kinds, vec![EventKind::Merge, EventKind::Arrival]);
        assert!((traj.events[0].time - 1.0).abs() < 1e-6);
        assert!((traj.events[1].time - 5.0).abs() < 1e-6);
        assert_eq!(traj.genealogy[&2], vec![0, 1]);
        assert!(traj.final_state.is_empty());
        assert!(traj.end_time() < set.horizon);
    }

    #[test]
    fn lone_singleton_stays_put() {
        let prm = ModelParams {
            panic_profile: PanicProfile::Ramp,
            ..params()
        };
        let traj = simulate(&HerdState::new(&[(0.0, 1)]).unwrap(), &prm, &settings()).unwrap();
        assert_eq!(traj.final_state.positions, vec![0.0]);
        assert_eq!(traj.end_time(), 10.0);
        assert!(traj.segments[0].positions.iter().all(|row| row[0] == 0.0));
        assert_eq!(traj.events.last().unwrap().kind, EventKind::Horizon);
    }

    #[test]
    fn duplicate_initial_positions_premerge() {
        let traj = simulate(
            &HerdState::new(&[(0.0, 1), (0.0, 2), (-3.0, 1)]).unwrap(),
            &params(),
            &settings(),
        )
        .unwrap();
        assert_eq!(traj.events[0].kind, EventKind::Merge);
        assert_eq!(traj.events[0].time, 0.0);
        assert_eq!(traj.segments[0].weights, vec![1, 3]);
    }

    #[test]
    fn zeno_guard_reports() {
        let set = SolverSettings {
            max_events: 1,
            ..settings()
        };
        let err = simulate(
            &HerdState::new(&[(-1.0, 1), (1.0, 1)]).unwrap(),
            &params(),
            &set,
        )
        .unwrap_err();
        assert!(matches!(err, EngineError::TooManyEvents { limit: 1, .. }));
    }

    #[test]
    fn settings_validation() {
        let mut s = settings();
        s.event_tol = 1.0;
        assert!(s.validate().is_err());
        let mut s = settings();
        s.step = 0.0;
        assert!(s.validate().is_err());
        assert!(settings().validate().is_ok());
    }

    #[test]
    fn snapshot_prefers_post_reset_herd() {
        let traj = simulate(
            &HerdState::new(&[(-1.0, 1), (1.0, 1)]).unwrap(),
            &params(),
            &settings(),
        )
        .unwrap();
        let t = traj.events[0].time;
        let snap = traj.snapshot(t).unwrap();
        assert_eq!(snap.weights, vec![2]);
        let before = traj.snapshot(0.5).unwrap();
        assert_eq!(before.ids, vec![0, 1]);
        assert!((before.positions[0] + 0.5).abs() < 1e-9);
        assert!(traj.snapshot(traj.end_time() + 1.0).is_none());
    }
}
