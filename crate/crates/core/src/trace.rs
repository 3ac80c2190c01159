//! Incumbent traces: the time-stamped improvements found by a solver run.
//!
//! CSV layout: header `seconds,profit,bits,bound` for classical traces and
//! `cycles,profit,bits,bound` for emulated quantum traces. `bits` is a 0/1
//! string (or empty); `bound` is an optional best-known bound.

use std::fmt;
use std::io::{Read, Write};
use std::path::Path as FsPath;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{check_feasible, evaluate_profit, Bits, KnapsackInstance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TraceSource {
    InternalClassical,
    ExternalClassical,
    QuantumEmulated,
}

impl fmt::Display for TraceSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TraceSource::InternalClassical => "internal-classical",
            TraceSource::ExternalClassical => "external-classical",
            TraceSource::QuantumEmulated => "quantum-emulated",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub enum Timestamp {
    Seconds(f64),
    Cycles(u64),
}

impl Timestamp {
    pub fn seconds(self) -> Option<f64> {
        match self {
            Timestamp::Seconds(s) => Some(s),
            Timestamp::Cycles(_) => None,
        }
    }

    pub fn cycles(self) -> Option<u64> {
        match self {
            Timestamp::Cycles(c) => Some(c),
            Timestamp::Seconds(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceEntry {
    pub timestamp: Timestamp,
    pub profit: u64,
    /// `None` for profit-only rows, which cannot be verified.
    pub bits: Option<Bits>,
    pub bound: Option<u64>,
}

impl TraceEntry {
    pub fn is_verified(&self) -> bool {
        self.bits.is_some()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchTrace {
    pub instance: String,
    pub source: TraceSource,
    entries: Vec<TraceEntry>,
    pub best_bound: Option<u64>,
}

impl SearchTrace {
    pub fn new(instance: impl Into<String>, source: TraceSource) -> Self {
        SearchTrace { instance: instance.into(), source, entries: Vec::new(), best_bound: None }
    }

    pub fn entries(&self) -> &[TraceEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn last(&self) -> Option<&TraceEntry> {
        self.entries.last()
    }

    fn uses_cycles(&self) -> bool {
        self.source == TraceSource::QuantumEmulated
    }

    /// Appends an entry, enforcing strictly increasing timestamps and
    /// profits and the timestamp unit of the source.
    pub fn push(&mut self, entry: TraceEntry) -> Result<()> {
        let row = self.entries.len() + 1;
        let err = |message: String| Error::Trace { row, message };
        match entry.timestamp {
            Timestamp::Cycles(_) if !self.uses_cycles() => {
                return Err(err("classical traces are timed in seconds".into()))
            }
            Timestamp::Seconds(_) if self.uses_cycles() => {
                return Err(err("quantum traces are timed in cycles".into()))
            }
            Timestamp::Seconds(s) if !(s.is_finite() && s >= 0.0) => {
                return Err(err(format!("invalid time {s}")))
            }
            _ => {}
        }
        if let Some(prev) = self.entries.last() {
            if entry.timestamp.partial_cmp(&prev.timestamp) != Some(std::cmp::Ordering::Greater) {
                return Err(err("timestamps must strictly increase".into()));
            }
            if entry.profit <= prev.profit {
                return Err(err(format!("profit decreased or repeated ({} after {})", entry.profit, prev.profit)));
            }
        }
        if let Some(b) = entry.bound {
            self.best_bound = Some(self.best_bound.map_or(b, |best| best.min(b)));
        }
        self.entries.push(entry);
        Ok(())
    }

    /// Checks every verifiable entry against the instance: feasible, and
    /// profit equal to the objective of its bits.
    pub fn validate(&self, instance: &KnapsackInstance) -> Result<()> {
        for (k, entry) in self.entries.iter().enumerate() {
            if let Some(bits) = &entry.bits {
                check_entry(instance, bits, entry.profit, k + 1)?;
            }
        }
        Ok(())
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(writer);
        let time_col = if self.uses_cycles() { "cycles" } else { "seconds" };
        out.write_record([time_col, "profit", "bits", "bound"])?;
        for e in &self.entries {
            let time = match e.timestamp {
                Timestamp::Seconds(s) => s.to_string(),
                Timestamp::Cycles(c) => c.to_string(),
            };
            let bits = e.bits.as_ref().map(ToString::to_string).unwrap_or_default();
            let bound = e.bound.map(|b| b.to_string()).unwrap_or_default();
            out.write_record([time, e.profit.to_string(), bits, bound])?;
        }
        out.flush().map_err(|e| Error::io("<trace writer>", e))?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv is utf-8")
    }
}

fn check_entry(instance: &KnapsackInstance, bits: &Bits, profit: u64, row: usize) -> Result<()> {
    let (feasible, residuals) =
        check_feasible(instance, bits).map_err(|e| Error::Trace { row, message: e.to_string() })?;
    if !feasible {
        return Err(Error::Trace { row, message: format!("bits {bits} are infeasible (residuals {residuals:?})") });
    }
    let actual = evaluate_profit(instance, bits)?;
    if actual != profit {
        return Err(Error::Trace { row, message: format!("profit {profit} does not match bits {bits} (objective {actual})") });
    }
    Ok(())
}

/// Reads a trace CSV. The timestamp header (`seconds` or `cycles`) selects
/// classical or quantum semantics; classical traces are tagged
/// `source_if_classical`.
pub fn read_trace<R: Read>(
    reader: R,
    instance: &KnapsackInstance,
    source_if_classical: TraceSource,
) -> Result<SearchTrace> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).flexible(true).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let (time_idx, cycles) = match (col("seconds"), col("cycles")) {
        (Some(i), None) => (i, false),
        (None, Some(i)) => (i, true),
        _ => return Err(Error::Trace { row: 0, message: "header needs exactly one of `seconds` or `cycles`".into() }),
    };
    let profit_idx =
        col("profit").ok_or_else(|| Error::Trace { row: 0, message: "header lacks a `profit` column".into() })?;
    let bits_idx = col("bits");
    let bound_idx = col("bound");

    let source = if cycles { TraceSource::QuantumEmulated } else { source_if_classical };
    let mut trace = SearchTrace::new(instance.name(), source);
    for (k, record) in rdr.records().enumerate() {
        let record = record?;
        let row = k + 1;
        let err = |message: String| Error::Trace { row, message };
        let field = |idx: Option<usize>| idx.and_then(|i| record.get(i)).filter(|s| !s.is_empty());

        let raw_time = field(Some(time_idx)).ok_or_else(|| err("missing timestamp".into()))?;
        let timestamp = if cycles {
            Timestamp::Cycles(raw_time.parse().map_err(|_| err(format!("bad cycle count {raw_time:?}")))?)
        } else {
            Timestamp::Seconds(raw_time.parse().map_err(|_| err(format!("bad seconds {raw_time:?}")))?)
        };
        let raw_profit = field(Some(profit_idx)).ok_or_else(|| err("missing profit".into()))?;
        let profit = raw_profit.parse().map_err(|_| err(format!("bad profit {raw_profit:?}")))?;
        let bits = field(bits_idx).map(str::parse::<Bits>).transpose().map_err(|e| err(e.to_string()))?;
        let bound = field(bound_idx)
            .map(|b| b.parse::<u64>().map_err(|_| err(format!("bad bound {b:?}"))))
            .transpose()?;
        if let Some(bits) = &bits {
            check_entry(instance, bits, profit, row)?;
        }
        trace.push(TraceEntry { timestamp, profit, bits, bound }).map_err(|e| match e {
            Error::Trace { message, .. } => Error::Trace { row, message },
            other => other,
        })?;
    }
    Ok(trace)
}

/// Loads an external solver's incumbent trace (`seconds,profit,bits,bound`).
pub fn ingest_external_trace(path: impl AsRef<FsPath>, instance: &KnapsackInstance) -> Result<SearchTrace> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let trace = read_trace(file, instance, TraceSource::ExternalClassical)?;
    if trace.source != TraceSource::ExternalClassical {
        return Err(Error::input(format!("{}: classical traces are timed in seconds", path.display())));
    }
    Ok(trace)
}
