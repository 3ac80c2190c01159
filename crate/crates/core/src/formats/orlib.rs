use super::{invalid_at, LineMap, LoadedInstance, Tokens};
use crate::error::Result;
use crate::instance::{KnapsackInstance, Profits, Validation};

/// Parses OR-Library style multidimensional data.
///
/// A problem is `n d [opt]`, then `n` profits, `d` rows of `n` weights and
/// `d` capacities. `opt == 0` means the optimum is unknown. Without an
/// `index`, the file holds one problem and the optimum token is present iff
/// the token count says so. With an `index`, the file starts with the
/// number of problems and every problem carries the optimum token.
pub fn parse_orlib(text: &str, label: &str, stem: &str, index: Option<usize>) -> Result<LoadedInstance> {
    let mut tokens = Tokens::new(text, label);
    match index {
        None => {
            let (line, n) = tokens.next_usize("item count n")?;
            let (_, d) = tokens.next_usize("dimension count d")?;
            let body = n
                .checked_mul(d)
                .and_then(|nd| nd.checked_add(n + d))
                .ok_or_else(|| tokens.error(line, "header sizes overflow"))?;
            let has_optimum = match tokens.remaining() {
                r if r == body => false,
                r if r == body + 1 => true,
                r => {
                    return Err(tokens.error(
                        line,
                        format!(
                            "header says n={n}, d={d}: expected {body} or {} further tokens, found {r} \
                             (multi-problem files need an index)",
                            body + 1
                        ),
                    ))
                }
            };
            let loaded = read_problem(&mut tokens, label, stem.to_string(), n, d, line, has_optimum)?;
            Ok(loaded)
        }
        Some(index) => {
            let (line, count) = tokens.next_usize("problem count")?;
            if index >= count {
                return Err(tokens.error(line, format!("problem index {index} out of range (file holds {count})")));
            }
            for k in 0..=index {
                let (line, n) = tokens.next_usize("item count n")?;
                let (_, d) = tokens.next_usize("dimension count d")?;
                let name = format!("{stem}#{k}");
                let loaded = read_problem(&mut tokens, label, name, n, d, line, true)?;
                if k == index {
                    return Ok(loaded);
                }
            }
            unreachable!("loop returns at the requested index")
        }
    }
}

fn read_problem(
    tokens: &mut Tokens<'_>,
    label: &str,
    name: String,
    n: usize,
    d: usize,
    header_line: usize,
    has_optimum: bool,
) -> Result<LoadedInstance> {
    if n == 0 || d == 0 {
        return Err(tokens.error(header_line, "n and d must be positive"));
    }
    let known_optimum = if has_optimum {
        Some(tokens.next_u64("known optimum")?.1).filter(|&opt| opt != 0)
    } else {
        None
    };
    let mut lines = LineMap { fallback: header_line, ..LineMap::default() };
    let mut profits = Vec::with_capacity(n);
    let mut profit_lines = Vec::with_capacity(n);
    for _ in 0..n {
        let (line, p) = tokens.next_u64("profit")?;
        profits.push(p);
        profit_lines.push(line);
    }
    lines.profits.push(profit_lines);
    let mut weights = Vec::with_capacity(d);
    for _ in 0..d {
        let mut row = Vec::with_capacity(n);
        let mut row_lines = Vec::with_capacity(n);
        for _ in 0..n {
            let (line, w) = tokens.next_u64("weight")?;
            row.push(w);
            row_lines.push(line);
        }
        weights.push(row);
        lines.weights.push(row_lines);
    }
    let mut capacities = Vec::with_capacity(d);
    for _ in 0..d {
        let (line, c) = tokens.next_u64("capacity")?;
        capacities.push(c);
        lines.capacities.push(line);
    }
    let instance = KnapsackInstance::new(name, weights, capacities, Profits::Vector(profits), Validation::Strict)
        .map_err(|e| invalid_at(label, &lines, e))?;
    Ok(LoadedInstance { instance, known_optimum })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::instance::ProblemKind;

    // n=2, d=3, optimum unknown.
    const SMALL: &str = "2 3 0\n10 20\n3 4\n5 5\n1 6\n5 6 6\n";

    #[test]
    fn header_is_n_then_d_then_optimum() {
        let loaded = parse_orlib(SMALL, "small.txt", "small", None).unwrap();
        let inst = &loaded.instance;
        assert_eq!(inst.kind(), ProblemKind::Mdkp);
        assert_eq!((inst.n(), inst.d()), (2, 3));
        assert_eq!(loaded.known_optimum, None);
        assert_eq!(inst.weights()[2], vec![1, 6]);
        assert_eq!(inst.capacities(), &[5, 6, 6]);
        assert_eq!(inst.name(), "small");
    }

    #[test]
    fn optimum_token_is_optional() {
        let without = "2 3\n10 20\n3 4\n5 5\n1 6\n5 6 6\n";
        let loaded = parse_orlib(without, "x", "x", None).unwrap();
        assert_eq!(loaded.instance.capacities(), &[5, 6, 6]);
        let with = "2 3 25\n10 20\n3 4\n5 5\n1 6\n5 6 6\n";
        assert_eq!(parse_orlib(with, "x", "x", None).unwrap().known_optimum, Some(25));
    }

    #[test]
    fn container_files_by_index() {
        let container = format!("2\n{SMALL}2 1 20\n7 9\n4 5\n6\n");
        let second = parse_orlib(&container, "c.txt", "c", Some(1)).unwrap();
        assert_eq!(second.instance.name(), "c#1");
        assert_eq!(second.known_optimum, Some(20));
        assert_eq!(second.instance.capacities(), &[6]);
        assert!(parse_orlib(&container, "c.txt", "c", Some(2)).is_err());
        // without the index flag the leading count is misread as n
        assert!(matches!(parse_orlib(&container, "c.txt", "c", None), Err(Error::Parse { .. })));
    }

    #[test]
    fn errors_report_lines() {
        let bad = "2 3 0\n10 20\n3 4\n5 x\n1 6\n5 6 6\n";
        assert!(matches!(parse_orlib(bad, "b", "b", None), Err(Error::Parse { line: 4, .. })));
        // weight 7 > capacity 6 in the third dimension
        let heavy = "2 3 0\n10 20\n3 4\n5 5\n7 6\n5 6 6\n";
        match parse_orlib(heavy, "h", "h", None).unwrap_err() {
            Error::Parse { line, message, .. } => {
                assert_eq!(line, 5);
                assert!(message.contains("exceeds capacity"));
            }
            other => panic!("{other}"),
        }
        let short = "2 3 0\n10 20\n3 4\n";
        assert!(matches!(parse_orlib(short, "s", "s", None), Err(Error::Parse { .. })));
    }
}
