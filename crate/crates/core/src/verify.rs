//! Homecoming bookkeeping and numerical witnesses for the two homecoming
//! theorems.
//!
//! Both theorems are sufficient conditions. A certificate records whether the
//! hypotheses hold at `t_o` and, if they do, whether the simulated trajectory
//! actually delivers the promised arrivals by the promised time.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{EventKind, Trajectory};
use crate::model::ModelParams;
use crate::state::GroupId;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VerifyError {
    #[error("time {t} outside the simulated span [{start}, {end}]")]
    TimeOutOfRange { t: f64, start: f64, end: f64 },
    #[error("group index {index} invalid at t = {t} ({active} active groups)")]
    InvalidIndex { index: usize, t: f64, active: usize },
}

/// Total weight of the groups that reached the burrow by time `t`.
pub fn homecoming_count(traj: &Trajectory, t: f64) -> Result<u64, VerifyError> {
    if !(t >= traj.start_time() && t <= traj.end_time()) {
        return Err(VerifyError::TimeOutOfRange {
            t,
            start: traj.start_time(),
            end: traj.end_time(),
        });
    }
    Ok(arrived_by(traj, t))
}

fn arrived_by(traj: &Trajectory, t: f64) -> u64 {
    traj.arrivals()
        .iter()
        .filter(|a| a.time <= t)
        .map(|a| u64::from(a.weight))
        .sum()
}

/// First time at which at least `count` penguins are home.
fn first_time_reaching(traj: &Trajectory, count: u64) -> Option<f64> {
    if count == 0 {
        return Some(traj.start_time());
    }
    let mut home = 0;
    for arrival in traj.arrivals() {
        home += u64::from(arrival.weight);
        if home >= count {
            return Some(arrival.time);
        }
    }
    None
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CountSample {
    pub time: f64,
    pub home: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrozenGroup {
    pub id: GroupId,
    pub position: f64,
    pub weight: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HomecomingReport {
    /// Population ℳ.
    pub total: u64,
    /// Penguins home at the end of the run.
    pub home_at_end: u64,
    pub end_time: f64,
    /// Step function 𝒩(t): its value at the start and after every arrival.
    pub homecoming: Vec<CountSample>,
    pub arrivals: Vec<crate::state::Arrival>,
    /// Active groups that are panicking (panic value 0) when the run stops.
    pub frozen_at_end: Vec<FrozenGroup>,
}

impl HomecomingReport {
    pub fn new(traj: &Trajectory) -> Self {
        let mut homecoming = vec![CountSample {
            time: traj.start_time(),
            home: arrived_by(traj, traj.start_time()),
        }];
        let mut home = 0;
        for arrival in traj.arrivals() {
            home += u64::from(arrival.weight);
            match homecoming.last_mut() {
                Some(last) if last.time == arrival.time => last.home = home,
                _ => homecoming.push(CountSample {
                    time: arrival.time,
                    home,
                }),
            }
        }
        let mut frozen_at_end = Vec::new();
        if let Some(last) = traj.segments.last() {
            if !traj.final_state.is_empty() {
                let row = last.panic.len() - 1;
                for (k, &id) in last.ids.iter().enumerate() {
                    if last.panic[row][k] == 0.0 {
                        frozen_at_end.push(FrozenGroup {
                            id,
                            position: last.positions[row][k],
                            weight: last.weights[k],
                        });
                    }
                }
            }
        }
        Self {
            total: traj.total_weight(),
            home_at_end: arrived_by(traj, traj.end_time()),
            end_time: traj.end_time(),
            homecoming,
            arrivals: traj.arrivals().to_vec(),
            frozen_at_end,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremCertificate {
    /// 1: the rear group has at least two members. 2: some group reached kappa.
    pub theorem: u8,
    pub t_o: f64,
    /// Index of the group the hypothesis is about, in position order at `t_o`.
    pub group_index: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub group_id: Option<GroupId>,
    /// Guaranteed lower bound on the speed of that group after `t_o`.
    pub iota: f64,
    /// Penguins promised home by `bound_t`.
    pub required: u64,
    pub applicable: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound_t: Option<f64>,
    pub witnessed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witnessed_t: Option<f64>,
    /// False when the run stopped before `bound_t` without the promise being
    /// met, so the trajectory neither confirms nor refutes it.
    pub decidable: bool,
    pub note: String,
}

impl TheoremCertificate {
    /// Applicable, decidable and not witnessed: the simulation contradicts the
    /// theorem.
    pub fn is_counterexample(&self) -> bool {
        self.applicable && self.decidable && !self.witnessed
    }
}

fn certify(
    traj: &Trajectory,
    theorem: u8,
    t_o: f64,
    group_index: usize,
    hypothesis: Result<(GroupId, f64, f64, u64), String>,
) -> TheoremCertificate {
    let mut cert = TheoremCertificate {
        theorem,
        t_o,
        group_index,
        group_id: None,
        iota: 0.0,
        required: 0,
        applicable: false,
        bound_t: None,
        witnessed: false,
        witnessed_t: None,
        decidable: true,
        note: String::new(),
    };
    let (id, position, iota, required) = match hypothesis {
        Ok(h) => h,
        Err(note) => {
            cert.note = note;
            return cert;
        }
    };
    cert.group_id = Some(id);
    cert.iota = iota;
    cert.required = required;
    if iota.is_nan() || iota <= 0.0 {
        cert.note = format!("speed bound iota = {iota} is not positive");
        return cert;
    }
    let bound = t_o + (traj.home - position) / iota;
    let tol = traj.settings.event_tol;
    cert.applicable = true;
    cert.bound_t = Some(bound);
    match first_time_reaching(traj, required) {
        Some(t) => {
            let t = t.max(t_o);
            cert.witnessed_t = Some(t);
            cert.witnessed = t <= bound + tol;
            cert.note = if cert.witnessed {
                "witnessed".into()
            } else {
                format!("promised arrivals came {} after the bound", t - bound)
            };
        }
        None => {
            cert.decidable = traj.end_time() >= bound + tol;
            cert.note = if cert.decidable {
                "promised arrivals never happened before the bound".into()
            } else {
                format!("run stopped at {} before the bound", traj.end_time())
            };
        }
    }
    cert
}

/// Rear-group theorem: if the rearmost group has at least two members at
/// `t_o` and `epsilon + inf f > 0` from `t_o` on, the whole herd is home by
/// `t_o + (H - p_1(t_o)) / iota`.
pub fn check_theorem1(traj: &Trajectory, params: &ModelParams, t_o: f64) -> TheoremCertificate {
    let hypothesis = match traj.snapshot(t_o) {
        None => Err(format!("no active herd at t_o = {t_o}")),
        Some(snap) if snap.weights[0] < 2 => Err(format!(
            "rear group {} has weight {} < 2",
            snap.ids[0], snap.weights[0]
        )),
        Some(snap) => Ok((
            snap.ids[0],
            snap.positions[0],
            params.epsilon + params.environment.infimum_from(t_o),
            traj.total_weight(),
        )),
    };
    certify(traj, 1, t_o, 0, hypothesis)
}

/// Large-group theorem: if group `j_o` has at least `kappa` members at `t_o`
/// and `epsilon + v + inf f > 0`, that group and every group ahead of it are
/// home by `t_o + (H - p_{j_o}(t_o)) / iota`.
pub fn check_theorem2(
    traj: &Trajectory,
    params: &ModelParams,
    t_o: f64,
    j_o: usize,
) -> Result<TheoremCertificate, VerifyError> {
    let snap = traj.snapshot(t_o).ok_or(VerifyError::InvalidIndex {
        index: j_o,
        t: t_o,
        active: 0,
    })?;
    if j_o >= snap.ids.len() {
        return Err(VerifyError::InvalidIndex {
            index: j_o,
            t: t_o,
            active: snap.ids.len(),
        });
    }
    let weight = snap.weights[j_o];
    let hypothesis = if weight < params.kappa {
        Err(format!(
            "group {} has weight {weight} < kappa = {}",
            snap.ids[j_o], params.kappa
        ))
    } else {
        let ahead: u64 = snap.weights[j_o..].iter().map(|&w| u64::from(w)).sum();
        Ok((
            snap.ids[j_o],
            snap.positions[j_o],
            params.epsilon + params.v + params.environment.infimum_from(t_o),
            ahead + arrived_by(traj, t_o),
        ))
    };
    Ok(certify(traj, 2, t_o, j_o, hypothesis))
}

/// Certificates at the start of the run and right after every merge: the
/// rear-group theorem once per instant, the large-group theorem for every
/// group of size at least kappa.
pub fn certify_trajectory(traj: &Trajectory, params: &ModelParams) -> Vec<TheoremCertificate> {
    let mut instants = vec![traj.start_time()];
    for event in &traj.events {
        if event.kind == EventKind::Merge && instants.last() != Some(&event.time) {
            instants.push(event.time);
        }
    }
    let mut out = Vec::new();
    for t_o in instants {
        let Some(snap) = traj.snapshot(t_o) else {
            continue;
        };
        out.push(check_theorem1(traj, params, t_o));
        for (j, &w) in snap.weights.iter().enumerate() {
            if w >= params.kappa {
                out.push(check_theorem2(traj, params, t_o, j).expect("index from snapshot"));
            }
        }
    }
    out
}
