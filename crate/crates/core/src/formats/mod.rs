//! Instance file formats.
//!
//! * `json`: the canonical format, see `schemas/instance.schema.json`.
//! * `orlib`: OR-Library style multidimensional instances, optionally packed
//!   several to a file.
//! * `qkplib`: whitespace-separated quadratic instances whose section order
//!   is given by a [`QkpDescriptor`].

mod json;
mod orlib;
mod qkplib;

use std::fmt;
use std::path::Path as FsPath;
use std::str::FromStr;

pub use json::{from_json, to_json};
pub use orlib::parse_orlib;
pub use qkplib::{parse_qkplib, QkpDescriptor, QkpSection};

use crate::error::{Error, InvalidInstance, Result};
use crate::instance::KnapsackInstance;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Orlib,
    Qkplib,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(Format::Json),
            "orlib" => Ok(Format::Orlib),
            "qkplib" => Ok(Format::Qkplib),
            other => Err(Error::input(format!("unknown format {other:?} (expected json, orlib or qkplib)"))),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Json => "json",
            Format::Orlib => "orlib",
            Format::Qkplib => "qkplib",
        })
    }
}

#[derive(Debug, Clone, Default)]
pub struct FormatOptions {
    /// Problem index inside a multi-problem ORLIB container (0-based).
    pub orlib_index: Option<usize>,
    pub qkp_descriptor: QkpDescriptor,
}

/// A parsed instance together with the optimum recorded in the file, if
/// any.
#[derive(Debug, Clone)]
pub struct LoadedInstance {
    pub instance: KnapsackInstance,
    pub known_optimum: Option<u64>,
}

pub fn parse_instance(path: impl AsRef<FsPath>, format: Format) -> Result<KnapsackInstance> {
    load_instance(path, format, &FormatOptions::default()).map(|l| l.instance)
}

pub fn load_instance(path: impl AsRef<FsPath>, format: Format, options: &FormatOptions) -> Result<LoadedInstance> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let label = path.display().to_string();
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    parse_text(&text, &label, &stem, format, options)
}

/// Parses in-memory text; `label` appears in error messages and `stem`
/// names instances whose format carries no name.
pub fn parse_text(
    text: &str,
    label: &str,
    stem: &str,
    format: Format,
    options: &FormatOptions,
) -> Result<LoadedInstance> {
    match format {
        Format::Json => from_json(text, label).map(|instance| LoadedInstance { instance, known_optimum: None }),
        Format::Orlib => parse_orlib(text, label, stem, options.orlib_index),
        Format::Qkplib => parse_qkplib(text, label, &options.qkp_descriptor)
            .map(|instance| LoadedInstance { instance, known_optimum: None }),
    }
}

/// Whitespace tokens tagged with their 1-based line number.
pub(crate) struct Tokens<'a> {
    label: &'a str,
    items: Vec<(usize, &'a str)>,
    pos: usize,
    last_line: usize,
}

impl<'a> Tokens<'a> {
    pub(crate) fn new(text: &'a str, label: &'a str) -> Self {
        Self::from_lines(text.lines().enumerate().map(|(i, l)| (i + 1, l)), label)
    }

    pub(crate) fn from_lines(lines: impl Iterator<Item = (usize, &'a str)>, label: &'a str) -> Self {
        let mut items = Vec::new();
        let mut last_line = 1;
        for (line, content) in lines {
            last_line = line;
            items.extend(content.split_whitespace().map(|t| (line, t)));
        }
        Tokens { label, items, pos: 0, last_line }
    }

    pub(crate) fn remaining(&self) -> usize {
        self.items.len() - self.pos
    }

    /// Line of the next token (or of the end of input).
    pub(crate) fn line(&self) -> usize {
        self.items.get(self.pos).map_or(self.last_line, |t| t.0)
    }

    pub(crate) fn error(&self, line: usize, message: impl Into<String>) -> Error {
        Error::Parse { path: self.label.to_string(), line, message: message.into() }
    }

    pub(crate) fn next_u64(&mut self, what: &str) -> Result<(usize, u64)> {
        let Some(&(line, tok)) = self.items.get(self.pos) else {
            return Err(self.error(self.last_line, format!("unexpected end of input while reading {what}")));
        };
        self.pos += 1;
        // Some published files write integral values as `12.0`.
        let value = tok
            .parse::<u64>()
            .ok()
            .or_else(|| tok.parse::<f64>().ok().filter(|v| v.fract() == 0.0 && *v >= 0.0).map(|v| v as u64))
            .ok_or_else(|| self.error(line, format!("expected a nonnegative integer for {what}, found {tok:?}")))?;
        Ok((line, value))
    }

    pub(crate) fn next_usize(&mut self, what: &str) -> Result<(usize, usize)> {
        let (line, v) = self.next_u64(what)?;
        usize::try_from(v).map(|v| (line, v)).map_err(|_| self.error(line, format!("{what} is too large")))
    }

    pub(crate) fn skip(&mut self, count: usize, what: &str) -> Result<()> {
        for _ in 0..count {
            self.next_u64(what)?;
        }
        Ok(())
    }
}

/// Source lines of the tokens that make up an instance, used to attach line
/// numbers to validation failures.
#[derive(Debug, Default)]
pub(crate) struct LineMap {
    pub weights: Vec<Vec<usize>>,
    pub capacities: Vec<usize>,
    /// `profits[i][j]` for matrices, `profits[0][j]` for vectors.
    pub profits: Vec<Vec<usize>>,
    pub fallback: usize,
}

impl LineMap {
    pub(crate) fn locate(&self, err: &InvalidInstance) -> usize {
        let get = |rows: &Vec<Vec<usize>>, r: usize, c: usize| rows.get(r).and_then(|row| row.get(c)).copied();
        match *err {
            InvalidInstance::WeightExceedsCapacity { dim, item, .. } => get(&self.weights, dim, item),
            InvalidInstance::CapacityNotBinding { dim, .. } | InvalidInstance::ZeroCapacity { dim } => {
                self.capacities.get(dim).copied()
            }
            InvalidInstance::AsymmetricProfit { row, col, .. } => get(&self.profits, col, row),
            _ => None,
        }
        .unwrap_or(self.fallback)
    }
}

pub(crate) fn invalid_at(label: &str, lines: &LineMap, err: InvalidInstance) -> Error {
    Error::Parse { path: label.to_string(), line: lines.locate(&err), message: format!("invalid instance: {err}") }
}
