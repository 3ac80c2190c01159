use std::fmt;
use std::str::FromStr;

use super::{invalid_at, LineMap, Tokens};
use crate::error::{Error, Result};
use crate::instance::{KnapsackInstance, Profits, Validation};

/// One section of a quadratic instance file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QkpSection {
    /// The whole first line, taken verbatim as the instance name.
    Name,
    N,
    Capacity,
    Weights,
    /// `n` diagonal profits.
    Linear,
    /// Rows `m = 1..n-1` holding `p_{m m'}` for `m' > m`; each value is
    /// stored in both triangles of the matrix.
    Upper,
    /// All `n x n` entries, diagonal included; must be symmetric.
    Full,
    /// One ignored token (e.g. a constraint-type flag).
    Skip,
}

impl FromStr for QkpSection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim() {
            "name" => QkpSection::Name,
            "n" => QkpSection::N,
            "capacity" => QkpSection::Capacity,
            "weights" => QkpSection::Weights,
            "linear" => QkpSection::Linear,
            "upper" => QkpSection::Upper,
            "full" => QkpSection::Full,
            "skip" => QkpSection::Skip,
            other => return Err(Error::input(format!("unknown section {other:?} in format descriptor"))),
        })
    }
}

impl fmt::Display for QkpSection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            QkpSection::Name => "name",
            QkpSection::N => "n",
            QkpSection::Capacity => "capacity",
            QkpSection::Weights => "weights",
            QkpSection::Linear => "linear",
            QkpSection::Upper => "upper",
            QkpSection::Full => "full",
            QkpSection::Skip => "skip",
        })
    }
}

/// Section order of a quadratic instance file, written as a comma list such
/// as `name,n,capacity,weights,linear,upper`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QkpDescriptor(Vec<QkpSection>);

impl QkpDescriptor {
    /// Name line, `n`, capacity, weights, linear profits, upper triangle.
    pub fn standard() -> Self {
        use QkpSection::*;
        QkpDescriptor(vec![Name, N, Capacity, Weights, Linear, Upper])
    }

    /// The layout used by the classic Billionnet-Soutif generator files:
    /// name, `n`, linear profits, upper triangle, a constraint-type token,
    /// capacity, weights.
    pub fn billionnet_soutif() -> Self {
        use QkpSection::*;
        QkpDescriptor(vec![Name, N, Linear, Upper, Skip, Capacity, Weights])
    }

    pub fn sections(&self) -> &[QkpSection] {
        &self.0
    }

    fn check(&self) -> Result<()> {
        use QkpSection::*;
        let count = |s: QkpSection| self.0.iter().filter(|&&x| x == s).count();
        if self.0.iter().position(|&s| s == Name).is_some_and(|p| p != 0) || count(Name) > 1 {
            return Err(Error::input("`name` may only appear first"));
        }
        for required in [N, Capacity, Weights] {
            if count(required) != 1 {
                return Err(Error::input(format!("descriptor needs exactly one `{required}`")));
            }
        }
        if count(Full) + count(Upper) != 1 {
            return Err(Error::input("descriptor needs exactly one of `upper` or `full`"));
        }
        if count(Upper) == 1 && count(Linear) != 1 {
            return Err(Error::input("`upper` needs a `linear` section"));
        }
        if count(Full) == 1 && count(Linear) != 0 {
            return Err(Error::input("`full` already holds the diagonal; drop `linear`"));
        }
        let n_pos = self.0.iter().position(|&s| s == N).unwrap();
        if self.0[..n_pos].iter().any(|s| matches!(s, Weights | Linear | Upper | Full)) {
            return Err(Error::input("`n` must precede every per-item section"));
        }
        Ok(())
    }
}

impl Default for QkpDescriptor {
    fn default() -> Self {
        Self::standard()
    }
}

impl FromStr for QkpDescriptor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let descriptor = match s.trim() {
            "standard" => Self::standard(),
            "billionnet-soutif" => Self::billionnet_soutif(),
            list => QkpDescriptor(list.split(',').map(str::parse).collect::<Result<_>>()?),
        };
        descriptor.check()?;
        Ok(descriptor)
    }
}

impl fmt::Display for QkpDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(ToString::to_string).collect();
        f.write_str(&parts.join(","))
    }
}

pub fn parse_qkplib(text: &str, label: &str, descriptor: &QkpDescriptor) -> Result<KnapsackInstance> {
    descriptor.check()?;
    let sections = descriptor.sections();
    let (name, mut tokens) = if sections.first() == Some(&QkpSection::Name) {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
        let name = lines.next().map(|(_, l)| l.trim().to_string()).unwrap_or_default();
        (name, Tokens::from_lines(lines, label))
    } else {
        (String::new(), Tokens::new(text, label))
    };

    let mut n = 0usize;
    let mut capacity = None;
    let mut weights = Vec::new();
    let mut matrix: Vec<Vec<u64>> = Vec::new();
    let mut lines = LineMap::default();
    lines.fallback = tokens.line();

    for &section in sections {
        match section {
            QkpSection::Name => {}
            QkpSection::N => {
                let (line, value) = tokens.next_usize("item count n")?;
                if value == 0 {
                    return Err(tokens.error(line, "n must be positive"));
                }
                n = value;
                lines.fallback = line;
                matrix = vec![vec![0; n]; n];
                lines.profits = vec![vec![line; n]; n];
            }
            QkpSection::Capacity => {
                let (line, c) = tokens.next_u64("capacity")?;
                capacity = Some(c);
                lines.capacities = vec![line];
            }
            QkpSection::Weights => {
                let mut row_lines = Vec::with_capacity(n);
                for _ in 0..n {
                    let (line, w) = tokens.next_u64("weight")?;
                    weights.push(w);
                    row_lines.push(line);
                }
                lines.weights = vec![row_lines];
            }
            QkpSection::Linear => {
                for m in 0..n {
                    let (line, p) = tokens.next_u64("linear profit")?;
                    matrix[m][m] = p;
                    lines.profits[m][m] = line;
                }
            }
            QkpSection::Upper => {
                for m in 0..n {
                    for other in (m + 1)..n {
                        let (line, p) = tokens.next_u64("quadratic profit")?;
                        matrix[m][other] = p;
                        matrix[other][m] = p;
                        lines.profits[m][other] = line;
                        lines.profits[other][m] = line;
                    }
                }
            }
            QkpSection::Full => {
                for m in 0..n {
                    for other in 0..n {
                        let (line, p) = tokens.next_u64("profit matrix entry")?;
                        matrix[m][other] = p;
                        lines.profits[m][other] = line;
                    }
                }
            }
            QkpSection::Skip => tokens.skip(1, "skipped token")?,
        }
    }
    if tokens.remaining() > 0 {
        return Err(tokens.error(tokens.line(), format!("{} unexpected trailing tokens", tokens.remaining())));
    }
    let capacity = capacity.expect("descriptor has a capacity section");
    let name = if name.is_empty() { label.to_string() } else { name };
    KnapsackInstance::new(name, vec![weights], vec![capacity], Profits::Matrix(matrix), Validation::Strict)
        .map_err(|e| invalid_at(label, &lines, e))
}
