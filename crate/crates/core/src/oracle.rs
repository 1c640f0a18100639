//! Brute-force reference integrator for cross-checking the engine.
//!
//! Explicit Euler with a tiny step. Within an Euler step every group moves
//! along a straight line, so contact and arrival times inside the step are
//! solved exactly instead of bisected. Only the pointwise velocity field and
//! the reset rules are shared with the engine.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::engine::{Event, EventKind, Segment, SolverSettings, Trajectory};
use crate::model::{panic_all, rhs, ModelParams};
use crate::state::{Arrival, GroupId, HerdState};

pub const MAX_GROUPS: usize = 5;
pub const MAX_POPULATION: u64 = 8;

/// Samples are kept every this many Euler steps.
const RECORD_STRIDE: u64 = 100;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("instance too large for the oracle: {groups} groups / {population} penguins (limits {MAX_GROUPS} / {MAX_POPULATION})")]
    TooLarge { groups: usize, population: u64 },
    #[error("micro step must be finite and > 0 (got {0})")]
    BadStep(f64),
    #[error("more than {0} events")]
    TooManyEvents(usize),
}

struct Herd {
    t: f64,
    ids: Vec<GroupId>,
    pos: Vec<f64>,
    w: Vec<u32>,
    arrived: Vec<Arrival>,
    next_id: GroupId,
}

impl Herd {
    fn as_state(&self) -> HerdState {
        HerdState {
            time: self.t,
            ids: self.ids.clone(),
            positions: self.pos.clone(),
            weights: self.w.clone(),
            arrived: self.arrived.clone(),
            next_id: self.next_id,
        }
    }

    fn sample(&self, segment: &mut Segment, params: &ModelParams) {
        let pos: Vec<f64> = self.pos.iter().map(|&p| p.min(params.home)).collect();
        segment.panic.push(panic_all(&pos, &self.w, params));
        segment.positions.push(pos);
        segment.times.push(self.t);
    }

    fn new_segment(&self, params: &ModelParams) -> Segment {
        let mut segment = Segment {
            ids: self.ids.clone(),
            weights: self.w.clone(),
            times: Vec::new(),
            positions: Vec::new(),
            panic: Vec::new(),
        };
        self.sample(&mut segment, params);
        segment
    }

    /// Fuses every run of neighbours flagged in `touching[i]` (pair i, i+1).
    fn fuse(
        &mut self,
        touching: &[bool],
        events: &mut Vec<Event>,
        genealogy: &mut BTreeMap<GroupId, Vec<GroupId>>,
    ) {
        let mut i = 0;
        let mut ids = Vec::new();
        let mut pos = Vec::new();
        let mut w = Vec::new();
        while i < self.pos.len() {
            let mut j = i;
            while j < touching.len() && touching[j] {
                j += 1;
            }
            if j == i {
                ids.push(self.ids[i]);
                pos.push(self.pos[i]);
                w.push(self.w[i]);
            } else {
                let mass: u32 = self.w[i..=j].iter().sum();
                let centre = self.pos[i..=j]
                    .iter()
                    .zip(&self.w[i..=j])
                    .map(|(&p, &m)| p * f64::from(m))
                    .sum::<f64>()
                    / f64::from(mass);
                let id = self.next_id;
                self.next_id += 1;
                let parents = self.ids[i..=j].to_vec();
                genealogy.insert(id, parents.clone());
                events.push(Event {
                    kind: EventKind::Merge,
                    time: self.t,
                    participants: parents,
                    merged_position: Some(centre),
                    merged_into: Some(id),
                });
                ids.push(id);
                pos.push(centre);
                w.push(mass);
            }
            i = j + 1;
        }
        self.ids = ids;
        self.pos = pos;
        self.w = w;
    }

    fn retire(&mut self, home: f64, events: &mut Vec<Event>) {
        while let Some(i) = self.pos.iter().position(|&p| p >= home) {
            let id = self.ids.remove(i);
            self.pos.remove(i);
            let weight = self.w.remove(i);
            self.arrived.push(Arrival {
                id,
                weight,
                time: self.t,
            });
            events.push(Event {
                kind: EventKind::Arrival,
                time: self.t,
                participants: vec![id],
                merged_position: None,
                merged_into: None,
            });
        }
    }
}

/// Integrates `initial` with explicit Euler steps of `micro_step`, applying the
/// same merge (`settings.merge_gap`) and arrival resets as the engine, until
/// everyone is home or `settings.horizon` is reached.
pub fn oracle_integrate(
    initial: &HerdState,
    params: &ModelParams,
    settings: &SolverSettings,
    micro_step: f64,
) -> Result<Trajectory, OracleError> {
    let population = initial.total_weight();
    if initial.len() > MAX_GROUPS || population > MAX_POPULATION {
        return Err(OracleError::TooLarge {
            groups: initial.len(),
            population,
        });
    }
    if !(micro_step.is_finite() && micro_step > 0.0) {
        return Err(OracleError::BadStep(micro_step));
    }
    let home = params.home;
    let gap_min = settings.merge_gap;
    let mut herd = Herd {
        t: initial.time,
        ids: initial.ids.clone(),
        pos: initial.positions.clone(),
        w: initial.weights.clone(),
        arrived: initial.arrived.clone(),
        next_id: initial.next_id,
    };
    let mut events = Vec::new();
    let mut genealogy = BTreeMap::new();
    let mut segments = Vec::new();

    let touching: Vec<bool> = herd
        .pos
        .windows(2)
        .map(|p| p[1] - p[0] <= gap_min)
        .collect();
    herd.fuse(&touching, &mut events, &mut genealogy);
    herd.retire(home, &mut events);

    'outer: while !herd.pos.is_empty() {
        let mut segment = herd.new_segment(params);
        let start = herd.t;
        let mut k: u64 = 0;
        loop {
            if herd.t >= settings.horizon {
                if segment.times.last() != Some(&herd.t) {
                    herd.sample(&mut segment, params);
                }
                segments.push(segment);
                events.push(Event {
                    kind: EventKind::Horizon,
                    time: herd.t,
                    participants: herd.ids.clone(),
                    merged_position: None,
                    merged_into: None,
                });
                break 'outer;
            }
            let next_t = (start + (k + 1) as f64 * micro_step).min(settings.horizon);
            let dt = next_t - herd.t;
            let vel = rhs(&herd.pos, &herd.w, herd.t, params);

            // earliest reset along the straight-line step
            let n = herd.pos.len();
            let mut hit = vec![f64::INFINITY; n.saturating_sub(1)];
            for i in 0..n.saturating_sub(1) {
                let gap = herd.pos[i + 1] - herd.pos[i];
                let closing = vel[i] - vel[i + 1];
                if closing > 0.0 && gap - closing * dt <= gap_min {
                    hit[i] = ((gap - gap_min) / closing).max(0.0);
                }
            }
            let mut home_hit = vec![f64::INFINITY; n];
            for i in 0..n {
                if vel[i] > 0.0 && herd.pos[i] + vel[i] * dt >= home {
                    home_hit[i] = ((home - herd.pos[i]) / vel[i]).max(0.0);
                }
            }
            let tau = hit
                .iter()
                .chain(&home_hit)
                .copied()
                .fold(f64::INFINITY, f64::min);

            if tau.is_finite() {
                let slack = 1e-12 * dt.max(1e-300);
                for (p, v) in herd.pos.iter_mut().zip(&vel) {
                    *p += v * tau;
                }
                herd.t += tau;
                herd.sample(&mut segment, params);
                segments.push(segment);
                let touching: Vec<bool> = hit.iter().map(|&h| h <= tau + slack).collect();
                let arriving: Vec<GroupId> = (0..n)
                    .filter(|&i| home_hit[i] <= tau + slack)
                    .map(|i| herd.ids[i])
                    .collect();
                for i in 0..n {
                    if arriving.contains(&herd.ids[i]) {
                        herd.pos[i] = herd.pos[i].max(home);
                    }
                }
                herd.fuse(&touching, &mut events, &mut genealogy);
                herd.retire(home, &mut events);
                if events.len() > settings.max_events {
                    return Err(OracleError::TooManyEvents(settings.max_events));
                }
                continue 'outer;
            }

            for (p, v) in herd.pos.iter_mut().zip(&vel) {
                *p += v * dt;
            }
            herd.t = next_t;
            k += 1;
            if k.is_multiple_of(RECORD_STRIDE) || herd.t >= settings.horizon {
                herd.sample(&mut segment, params);
            }
        }
    }

    Ok(Trajectory {
        segments,
        events,
        genealogy,
        initial: initial.clone(),
        final_state: herd.as_state(),
        home,
        settings: *settings,
    })
}

/// How far two trajectories of the same herd are apart.
#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    /// Same kinds and participants, in the same order.
    pub same_events: bool,
    pub max_event_time_error: f64,
    /// Sup over the samples of `a` of the distance to `b`'s path of the same
    /// group, interpolated at the same time.
    pub max_position_error: f64,
}

fn paths(traj: &Trajectory) -> BTreeMap<GroupId, Vec<(f64, f64)>> {
    let mut out: BTreeMap<GroupId, Vec<(f64, f64)>> = BTreeMap::new();
    for segment in &traj.segments {
        for (k, &id) in segment.ids.iter().enumerate() {
            let path = out.entry(id).or_default();
            for (row, &t) in segment.times.iter().enumerate() {
                path.push((t, segment.positions[row][k]));
            }
        }
    }
    out
}

fn interpolate(path: &[(f64, f64)], t: f64) -> f64 {
    let k = path.partition_point(|&(s, _)| s <= t);
    if k == 0 {
        return path[0].1;
    }
    if k == path.len() {
        return path[k - 1].1;
    }
    let (t0, p0) = path[k - 1];
    let (t1, p1) = path[k];
    if t1 > t0 {
        p0 + (t - t0) / (t1 - t0) * (p1 - p0)
    } else {
        p1
    }
}

pub fn compare(a: &Trajectory, b: &Trajectory) -> Comparison {
    let same_events = a.events.len() == b.events.len()
        && a.events
            .iter()
            .zip(&b.events)
            .all(|(x, y)| x.kind == y.kind && x.participants == y.participants);
    let max_event_time_error = if same_events {
        a.events
            .iter()
            .zip(&b.events)
            .map(|(x, y)| (x.time - y.time).abs())
            .fold(0.0, f64::max)
    } else {
        f64::INFINITY
    };
    let reference = paths(b);
    let mut max_position_error: f64 = 0.0;
    for (id, path) in paths(a) {
        let Some(other) = reference.get(&id) else {
            max_position_error = f64::INFINITY;
            continue;
        };
        for (t, p) in path {
            max_position_error = max_position_error.max((p - interpolate(other, t)).abs());
        }
    }
    Comparison {
        same_events,
        max_event_time_error,
        max_position_error,
    }
}
