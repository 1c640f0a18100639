//! Text renderings of a trajectory.

use std::collections::BTreeMap;
use std::fmt::Write;

use serde::Serialize;

use crate::engine::{Event, Trajectory};
use crate::state::GroupId;
use crate::verify::{HomecomingReport, TheoremCertificate};

pub const CSV_HEADER: &str = "t,group_id,position,weight,panic";

/// `%.12g`-style rendering: 12 significant digits, trailing zeros trimmed,
/// exponent form only for very large or very small magnitudes.
pub fn format_sig(x: f64) -> String {
    const DIGITS: i32 = 12;
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..DIGITS).contains(&exp) {
        let decimals = (DIGITS - 1 - exp).max(0) as usize;
        trim(format!("{x:.decimals$}"))
    } else {
        format!("{}e{exp}", trim(mantissa.to_owned()))
    }
}

fn trim(mut s: String) -> String {
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
    if s == "-0" {
        s = "0".into();
    }
    s
}

struct Row {
    t: f64,
    id: GroupId,
    position: f64,
    weight: u32,
    panic: f64,
}

/// One row per group per sample time, then one row per arrival at the
/// burrow, sorted by `(t, group_id)`.
pub fn export_csv(traj: &Trajectory) -> String {
    let mut rows = Vec::new();
    let mut last_panic: BTreeMap<GroupId, f64> = BTreeMap::new();
    for segment in &traj.segments {
        for (row, &t) in segment.times.iter().enumerate() {
            for (k, &id) in segment.ids.iter().enumerate() {
                let panic = segment.panic[row][k];
                last_panic.insert(id, panic);
                rows.push(Row {
                    t,
                    id,
                    position: segment.positions[row][k],
                    weight: segment.weights[k],
                    panic,
                });
            }
        }
    }
    for arrival in traj.arrivals() {
        rows.push(Row {
            t: arrival.time,
            id: arrival.id,
            position: traj.home,
            weight: arrival.weight,
            panic: last_panic.get(&arrival.id).copied().unwrap_or(1.0),
        });
    }
    rows.sort_by(|a, b| a.t.total_cmp(&b.t).then(a.id.cmp(&b.id)));

    let mut out = String::with_capacity(rows.len() * 48);
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{}",
            format_sig(r.t),
            r.id,
            format_sig(r.position),
            r.weight,
            format_sig(r.panic)
        )
        .expect("writing to a String");
    }
    out
}

#[derive(Serialize)]
struct EventLog<'a> {
    event: &'a [Event],
}

#[derive(Serialize)]
struct CertificateLog<'a> {
    certificate: &'a [TheoremCertificate],
}

/// Event log as a TOML document with one `[[event]]` table per reset.
pub fn events_document(traj: &Trajectory) -> String {
    toml::to_string(&EventLog {
        event: &traj.events,
    })
    .expect("events serialize")
}

pub fn report_document(report: &HomecomingReport) -> String {
    toml::to_string(report).expect("report serializes")
}

pub fn certificates_document(certificates: &[TheoremCertificate]) -> String {
    toml::to_string(&CertificateLog {
        certificate: certificates,
    })
    .expect("certificates serialize")
}
