//! Scalar metrics of a run, derived only from its trace and event list.
//!
//! A signal has settled at the first instant after which it stays inside its
//! band for [`SETTLE_HOLD`] seconds without interruption, looking only at the
//! segment up to the next event.

use std::fmt::Write as _;

use thiserror::Error;

use crate::sim::{EventKind, ScenarioEvent};
use crate::trace::{Trace, TraceRow};

pub const SETTLE_HOLD: f64 = 0.2;
/// Band on `|f_e − f_d|`, N.
pub const FORCE_BAND: f64 = 0.02;
/// Band on `|v|`, m/s.
pub const SLIP_BAND: f64 = 1e-3;
/// Band on the reference error, as a fraction of the step size.
pub const REFERENCE_BAND: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventClass {
    Reference,
    Force,
    Mass,
}

impl EventClass {
    pub fn as_str(self) -> &'static str {
        match self {
            EventClass::Reference => "reference",
            EventClass::Force => "force",
            EventClass::Mass => "mass",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "reference" => Some(EventClass::Reference),
            "force" => Some(EventClass::Force),
            "mass" => Some(EventClass::Mass),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EventSummary {
    pub time: f64,
    pub class: EventClass,
    /// Time from the event until its signal settled; `None` if it never did
    /// before the next event.
    pub settling_time: Option<f64>,
    /// Largest slip speed between this event and the next.
    pub max_abs_v: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub scenario: String,
    /// Worst, over inter-event segments, of the mean `|f_e − f_d|` in the
    /// final [`SETTLE_HOLD`] seconds of the segment.
    pub steady_state_force_error: f64,
    pub events: Vec<EventSummary>,
    /// `m̂` at the end of each segment delimited by mass events.
    pub final_m_hat: Vec<f64>,
}

/// Time from `t_event` until `rows` stay within band for `hold` seconds.
pub fn settling_time(rows: &[TraceRow], t_event: f64, hold: f64, within: impl Fn(&TraceRow) -> bool) -> Option<f64> {
    let mut run_start: Option<f64> = None;
    for r in rows {
        if within(r) {
            let start = *run_start.get_or_insert(r.t);
            if r.t - start >= hold - 1e-9 {
                return Some(start - t_event);
            }
        } else {
            run_start = None;
        }
    }
    None
}

/// Rows from `from` up to (excluding) `to`; the last segment includes the
/// final row.
fn segment(trace: &Trace, from: f64, to: Option<f64>) -> &[TraceRow] {
    match to {
        Some(to) => trace.window(from, to),
        None => trace.window(from, f64::INFINITY),
    }
}

pub fn summarize(scenario: &str, trace: &Trace, events: &[ScenarioEvent]) -> RunSummary {
    let end = trace.last().map_or(0.0, |r| r.t);

    let mut bounds: Vec<f64> = std::iter::once(0.0).chain(events.iter().map(|e| e.time)).collect();
    bounds.dedup();
    let steady_state_force_error = bounds
        .iter()
        .enumerate()
        .filter_map(|(i, &from)| {
            let to = bounds.get(i + 1).copied();
            let seg = segment(trace, from, to);
            let seg_end = seg.last()?.t;
            let tail: Vec<f64> =
                seg.iter().filter(|r| r.t >= seg_end - SETTLE_HOLD).map(|r| (r.f_e - r.f_d).abs()).collect();
            Some(tail.iter().sum::<f64>() / tail.len() as f64)
        })
        .fold(0.0, f64::max);

    let mut summaries = Vec::with_capacity(events.len());
    for (i, ev) in events.iter().enumerate() {
        let next = events[i + 1..].iter().map(|e| e.time).find(|&t| t > ev.time);
        let seg = segment(trace, ev.time, next);
        let (class, settling_time) = match ev.kind {
            EventKind::Reference { target, step } => {
                let band = REFERENCE_BAND * step.abs();
                (EventClass::Reference, settling_time(seg, ev.time, SETTLE_HOLD, |r| (r.theta1 - target).abs() <= band))
            }
            EventKind::Force { .. } => {
                (EventClass::Force, settling_time(seg, ev.time, SETTLE_HOLD, |r| (r.f_e - r.f_d).abs() < FORCE_BAND))
            }
            EventKind::Mass { .. } => {
                (EventClass::Mass, settling_time(seg, ev.time, SETTLE_HOLD, |r| r.v.abs() < SLIP_BAND))
            }
        };
        let max_abs_v = seg.iter().map(|r| r.v.abs()).fold(0.0, f64::max);
        summaries.push(EventSummary { time: ev.time, class, settling_time, max_abs_v });
    }

    let mut mass_bounds: Vec<f64> = events
        .iter()
        .filter(|e| matches!(e.kind, EventKind::Mass { .. }))
        .map(|e| e.time)
        .filter(|&t| t <= end)
        .collect();
    mass_bounds.push(f64::INFINITY);
    let final_m_hat =
        mass_bounds.iter().filter_map(|&t| trace.rows.iter().take_while(|r| r.t < t).last().map(|r| r.m_hat)).collect();

    RunSummary { scenario: scenario.to_owned(), steady_state_force_error, events: summaries, final_m_hat }
}

#[derive(Debug, Error, PartialEq)]
#[error("summary line {line}: {message}")]
pub struct SummaryParseError {
    pub line: usize,
    pub message: String,
}

impl RunSummary {
    /// `key = value` lines, one metric per line.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "scenario = {}", self.scenario);
        let _ = writeln!(s, "steady_state_force_error_n = {}", self.steady_state_force_error);
        let _ = writeln!(s, "events = {}", self.events.len());
        for (i, e) in self.events.iter().enumerate() {
            let n = i + 1;
            let _ = writeln!(s, "event.{n}.time_s = {}", e.time);
            let _ = writeln!(s, "event.{n}.kind = {}", e.class.as_str());
            match e.settling_time {
                Some(t) => writeln!(s, "event.{n}.settling_time_s = {t}"),
                None => writeln!(s, "event.{n}.settling_time_s = none"),
            }
            .expect("writing to a String");
            let _ = writeln!(s, "event.{n}.max_abs_v_m_per_s = {}", e.max_abs_v);
        }
        let _ = writeln!(s, "segments = {}", self.final_m_hat.len());
        for (i, m) in self.final_m_hat.iter().enumerate() {
            let _ = writeln!(s, "segment.{}.final_m_hat_kg = {m}", i + 1);
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self, SummaryParseError> {
        let mut pairs = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| SummaryParseError { line: i + 1, message: "expected `key = value`".into() })?;
            pairs.push((i + 1, k.trim().to_owned(), v.trim().to_owned()));
        }
        let get = |key: &str| -> Result<(usize, &str), SummaryParseError> {
            pairs
                .iter()
                .find(|(_, k, _)| k == key)
                .map(|(l, _, v)| (*l, v.as_str()))
                .ok_or_else(|| SummaryParseError { line: 0, message: format!("missing {key}") })
        };
        let num = |key: &str| -> Result<f64, SummaryParseError> {
            let (line, v) = get(key)?;
            v.parse().map_err(|_| SummaryParseError { line, message: format!("{key}: not a number") })
        };
        let count = |key: &str| -> Result<usize, SummaryParseError> {
            let (line, v) = get(key)?;
            v.parse().map_err(|_| SummaryParseError { line, message: format!("{key}: not a count") })
        };

        let mut events = Vec::new();
        for n in 1..=count("events")? {
            let (line, kind) = get(&format!("event.{n}.kind"))?;
            let class = EventClass::parse(kind)
                .ok_or_else(|| SummaryParseError { line, message: format!("unknown event kind {kind}") })?;
            let settling_key = format!("event.{n}.settling_time_s");
            let settling_time = match get(&settling_key)?.1 {
                "none" => None,
                _ => Some(num(&settling_key)?),
            };
            events.push(EventSummary {
                time: num(&format!("event.{n}.time_s"))?,
                class,
                settling_time,
                max_abs_v: num(&format!("event.{n}.max_abs_v_m_per_s"))?,
            });
        }
        let final_m_hat =
            (1..=count("segments")?).map(|n| num(&format!("segment.{n}.final_m_hat_kg"))).collect::<Result<_, _>>()?;
        Ok(RunSummary {
            scenario: get("scenario")?.1.to_owned(),
            steady_state_force_error: num("steady_state_force_error_n")?,
            events,
            final_m_hat,
        })
    }
}
