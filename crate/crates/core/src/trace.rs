//! Time series recorded by the simulator and its CSV form.
//!
//! Columns, in order: `t,theta1,theta1_dot,tau_c,tau_d,f_e,f_d,v,m_hat,phase`.
//! Floats are written in shortest round-trip form, so parsing an emitted file
//! reproduces the in-memory trace bit for bit.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::impedance::ControlPhase;

pub const CSV_HEADER: [&str; 10] = ["t", "theta1", "theta1_dot", "tau_c", "tau_d", "f_e", "f_d", "v", "m_hat", "phase"];

/// One sample. Controller-side signals (`tau_d`, `f_d`, `m_hat`, `phase`) are
/// the values held over the step that starts at `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub t: f64,
    pub theta1: f64,
    pub theta1_dot: f64,
    pub tau_c: f64,
    pub tau_d: f64,
    pub f_e: f64,
    pub f_d: f64,
    pub v: f64,
    pub m_hat: f64,
    #[serde(with = "phase_code")]
    pub phase: ControlPhase,
}

mod phase_code {
    use super::ControlPhase;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(p: &ControlPhase, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u8(p.code())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<ControlPhase, D::Error> {
        let code = u8::deserialize(d)?;
        ControlPhase::from_code(code).ok_or_else(|| D::Error::custom(format!("unknown phase code {code}")))
    }
}

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("unexpected header {found:?}")]
    Header { found: Vec<String> },
    #[error("row {row}: time does not increase")]
    NonMonotonicTime { row: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trace {
    pub rows: Vec<TraceRow>,
}

impl Trace {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn last(&self) -> Option<&TraceRow> {
        self.rows.last()
    }

    pub fn column(&self, f: impl Fn(&TraceRow) -> f64) -> Vec<f64> {
        self.rows.iter().map(f).collect()
    }

    /// Rows with `from <= t < to`.
    pub fn window(&self, from: f64, to: f64) -> &[TraceRow] {
        let lo = self.rows.partition_point(|r| r.t < from);
        let hi = self.rows.partition_point(|r| r.t < to);
        &self.rows[lo..hi.max(lo)]
    }

    /// Sample closest to `t`.
    pub fn at(&self, t: f64) -> Option<&TraceRow> {
        let i = self.rows.partition_point(|r| r.t < t);
        let after = self.rows.get(i);
        let before = i.checked_sub(1).and_then(|j| self.rows.get(j));
        match (before, after) {
            (Some(b), Some(a)) => Some(if (t - b.t) <= (a.t - t) { b } else { a }),
            (b, a) => b.or(a),
        }
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), TraceError> {
        let mut w = csv::Writer::from_writer(out);
        for row in &self.rows {
            w.serialize(row)?;
        }
        if self.rows.is_empty() {
            w.write_record(CSV_HEADER)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv output is utf-8")
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self, TraceError> {
        let mut r = csv::Reader::from_reader(input);
        let header: Vec<String> = r.headers()?.iter().map(str::to_owned).collect();
        if header != CSV_HEADER {
            return Err(TraceError::Header { found: header });
        }
        let mut rows: Vec<TraceRow> = Vec::new();
        for (i, rec) in r.deserialize().enumerate() {
            let row: TraceRow = rec?;
            if rows.last().is_some_and(|prev| prev.t >= row.t) {
                return Err(TraceError::NonMonotonicTime { row: i + 1 });
            }
            rows.push(row);
        }
        Ok(Trace { rows })
    }
}
