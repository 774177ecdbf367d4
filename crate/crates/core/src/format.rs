//! Plain-text formats for gonosomal specs and crossing tables.
//!
//! Both formats are line oriented. `#` starts a comment, blank lines are
//! ignored and every other line is `key = value`.
//!
//! A spec file:
//!
//! ```text
//! name = wolbachia
//! param eta = 3/4
//! n = 3
//! row = 3/4 0 0 | 1/4
//! row = 0 1/2 0 | 1/2
//! row = 3/8 1/8 3/8 | 1/8
//! ```
//!
//! A crossing table file (pairs are one-based):
//!
//! ```text
//! dim = 3
//! female = (1,1) (1,2) (2,3)
//! male = (1,3)
//! product (2,3) = (1,2):1/3 (2,3):1/3 (1,3):1/3
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_traits::Zero;
use thiserror::Error;

use crate::algebra::{GonosomalSpec, Pair};
use crate::realizability::CrossTable;
use crate::scalar::{format_rational, parse_rational, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

/// A spec together with its optional name and parameter bindings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpecDocument {
    pub name: Option<String>,
    pub params: Vec<(String, Rational)>,
    pub spec: GonosomalSpec,
}

struct Line<'a> {
    number: usize,
    raw: &'a str,
    key: &'a str,
    value: &'a str,
    value_offset: usize,
}

impl Line<'_> {
    fn error_at(&self, offset: usize, message: impl Into<String>) -> ParseError {
        ParseError {
            line: self.number,
            column: offset + 1,
            message: message.into(),
        }
    }

    fn error(&self, message: impl Into<String>) -> ParseError {
        let indent = self.raw.len() - self.raw.trim_start().len();
        self.error_at(indent, message)
    }
}

fn lines(text: &str) -> Result<Vec<Line<'_>>, ParseError> {
    let mut out = Vec::new();
    for (index, raw) in text.lines().enumerate() {
        let content = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        };
        if content.trim().is_empty() {
            continue;
        }
        let Some(eq) = content.find('=') else {
            let indent = raw.len() - raw.trim_start().len();
            return Err(ParseError {
                line: index + 1,
                column: indent + 1,
                message: "expected `key = value`".to_string(),
            });
        };
        let value_part = &content[eq + 1..];
        let lead = value_part.len() - value_part.trim_start().len();
        out.push(Line {
            number: index + 1,
            raw,
            key: content[..eq].trim(),
            value: value_part.trim(),
            value_offset: eq + 1 + lead,
        });
    }
    Ok(out)
}

/// Whitespace separated tokens of a value with their byte offsets in the line.
fn tokens<'a>(line: &Line<'a>) -> Vec<(usize, &'a str)> {
    let mut out = Vec::new();
    let value = line.value;
    let mut start = None;
    for (i, c) in value.char_indices() {
        match (c.is_whitespace(), start) {
            (true, Some(s)) => {
                out.push((line.value_offset + s, &value[s..i]));
                start = None;
            }
            (false, None) => start = Some(i),
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((line.value_offset + s, &value[s..]));
    }
    out
}

fn rational_token(line: &Line<'_>, offset: usize, token: &str) -> Result<Rational, ParseError> {
    parse_rational(token).map_err(|e| line.error_at(offset, e.to_string()))
}

pub fn parse_spec(text: &str) -> Result<SpecDocument, ParseError> {
    let mut name = None;
    let mut params = Vec::new();
    let mut declared_n: Option<(usize, usize)> = None;
    let mut rows: Vec<(Vec<Rational>, Rational)> = Vec::new();
    let mut last_line = 0;

    for line in lines(text)? {
        last_line = line.number;
        match line.key {
            "name" => {
                if line.value.is_empty() {
                    return Err(line.error("empty name"));
                }
                name = Some(line.value.to_string());
            }
            "n" => {
                let n: usize = line
                    .value
                    .parse()
                    .map_err(|_| line.error_at(line.value_offset, "n must be a positive integer"))?;
                if n == 0 {
                    return Err(line.error_at(line.value_offset, "n must be a positive integer"));
                }
                declared_n = Some((n, line.number));
            }
            "row" => {
                let toks = tokens(&line);
                let Some(bar) = toks.iter().position(|(_, t)| *t == "|") else {
                    return Err(line.error_at(line.value_offset, "row needs `|` before the male coefficient"));
                };
                if bar + 2 != toks.len() {
                    let (offset, _) = toks
                        .get(bar + 2)
                        .copied()
                        .unwrap_or((line.value_offset + line.value.len(), ""));
                    return Err(line.error_at(offset, "exactly one male coefficient must follow `|`"));
                }
                let female = toks[..bar]
                    .iter()
                    .map(|&(o, t)| rational_token(&line, o, t))
                    .collect::<Result<Vec<_>, _>>()?;
                let (o, t) = toks[bar + 1];
                let male = rational_token(&line, o, t)?;
                if let Some((n, _)) = declared_n {
                    if female.len() != n {
                        return Err(line.error_at(
                            line.value_offset,
                            format!("row has {} female coefficients, expected {n}", female.len()),
                        ));
                    }
                }
                rows.push((female, male));
            }
            key => {
                if let Some(param) = key.strip_prefix("param") {
                    let param = param.trim();
                    if param.is_empty() || param.contains(char::is_whitespace) {
                        return Err(line.error("expected `param <name> = <value>`"));
                    }
                    let value = rational_token(&line, line.value_offset, line.value)?;
                    params.push((param.to_string(), value));
                } else {
                    return Err(line.error(format!("unknown key `{key}`")));
                }
            }
        }
    }

    let eof = ParseError {
        line: last_line.max(1),
        column: 1,
        message: String::new(),
    };
    if rows.is_empty() {
        return Err(ParseError {
            message: "no rows".to_string(),
            ..eof
        });
    }
    let n = rows[0].0.len();
    if let Some((declared, line)) = declared_n {
        if rows.len() != declared {
            return Err(ParseError {
                line,
                column: 1,
                message: format!("n = {declared} but {} rows are given", rows.len()),
            });
        }
    } else if rows.len() != n {
        return Err(ParseError {
            message: format!("{} rows given but each has {n} female coefficients", rows.len()),
            ..eof
        });
    }
    let spec = GonosomalSpec::from_rows(rows).map_err(|e| ParseError {
        message: e.to_string(),
        ..eof
    })?;
    Ok(SpecDocument { name, params, spec })
}

pub fn write_spec(doc: &SpecDocument) -> String {
    let mut out = String::new();
    if let Some(name) = &doc.name {
        let _ = writeln!(out, "name = {name}");
    }
    for (key, value) in &doc.params {
        let _ = writeln!(out, "param {key} = {}", format_rational(value));
    }
    let _ = writeln!(out, "n = {}", doc.spec.n());
    for i in 0..doc.spec.n() {
        let female: Vec<String> = doc.spec.gamma()[i].iter().map(format_rational).collect();
        let _ = writeln!(
            out,
            "row = {} | {}",
            female.join(" "),
            format_rational(&doc.spec.gamma_tilde()[i])
        );
    }
    out
}

/// Parses `(i,j)` written one-based, allowing spaces inside the parentheses.
fn parse_pair(line: &Line<'_>, offset: usize, text: &str) -> Result<Pair, ParseError> {
    let inner = text
        .strip_prefix('(')
        .and_then(|t| t.strip_suffix(')'))
        .ok_or_else(|| line.error_at(offset, format!("expected a pair `(i,j)`, found `{text}`")))?;
    let mut parts = inner.split(',');
    let (Some(a), Some(b), None) = (parts.next(), parts.next(), parts.next()) else {
        return Err(line.error_at(offset, format!("expected a pair `(i,j)`, found `{text}`")));
    };
    let index = |s: &str| -> Result<usize, ParseError> {
        match s.trim().parse::<usize>() {
            Ok(v) if v >= 1 => Ok(v),
            _ => Err(line.error_at(
                offset,
                format!("pair indices are one-based integers, found `{}`", s.trim()),
            )),
        }
    };
    Ok(Pair::one_based(index(a)?, index(b)?))
}

/// Splits a value into tokens, keeping `(i, j)` together even with spaces.
fn pair_tokens<'a>(line: &Line<'a>) -> Vec<(usize, &'a str)> {
    let value = line.value;
    let mut out = Vec::new();
    let mut depth = 0usize;
    let mut start: Option<usize> = None;
    for (i, c) in value.char_indices() {
        match c {
            '(' => {
                depth += 1;
                start.get_or_insert(i);
            }
            ')' => depth = depth.saturating_sub(1),
            c if c.is_whitespace() && depth == 0 => {
                if let Some(s) = start.take() {
                    out.push((line.value_offset + s, &value[s..i]));
                }
            }
            _ => {
                start.get_or_insert(i);
            }
        }
    }
    if let Some(s) = start {
        out.push((line.value_offset + s, &value[s..]));
    }
    out
}

pub fn parse_cross_table(text: &str) -> Result<CrossTable, ParseError> {
    let mut dim: Option<usize> = None;
    let mut female: Option<Vec<Pair>> = None;
    let mut male: Option<Pair> = None;
    let mut raw_products: Vec<(usize, Pair, Vec<(Pair, Rational)>)> = Vec::new();
    let mut last_line = 0;

    for line in lines(text)? {
        last_line = line.number;
        match line.key {
            "dim" => {
                let d: usize = line
                    .value
                    .parse()
                    .map_err(|_| line.error_at(line.value_offset, "dim must be a positive integer"))?;
                dim = Some(d);
            }
            "female" => {
                let pairs = pair_tokens(&line)
                    .into_iter()
                    .map(|(o, t)| parse_pair(&line, o, t))
                    .collect::<Result<Vec<_>, _>>()?;
                female = Some(pairs);
            }
            "male" => {
                let toks = pair_tokens(&line);
                if toks.len() != 1 {
                    return Err(line.error_at(line.value_offset, "exactly one male pair is expected"));
                }
                male = Some(parse_pair(&line, toks[0].0, toks[0].1)?);
            }
            key => {
                let Some(rest) = key.strip_prefix("product") else {
                    return Err(line.error(format!("unknown key `{key}`")));
                };
                let key_offset = line.raw.find("product").unwrap_or(0) + "product".len();
                let lhs = rest.trim();
                let lhs_offset = key_offset + (rest.len() - rest.trim_start().len());
                let target = parse_pair(&line, lhs_offset, lhs)?;
                let mut terms = Vec::new();
                for (offset, tok) in pair_tokens(&line) {
                    let Some(colon) = tok.rfind(':') else {
                        return Err(line.error_at(offset, format!("expected `(i,j):coefficient`, found `{tok}`")));
                    };
                    let pair = parse_pair(&line, offset, &tok[..colon])?;
                    let coeff = rational_token(&line, offset + colon + 1, &tok[colon + 1..])?;
                    terms.push((pair, coeff));
                }
                raw_products.push((line.number, target, terms));
            }
        }
    }

    let at_end = |message: &str| ParseError {
        line: last_line.max(1),
        column: 1,
        message: message.to_string(),
    };
    let dim = dim.ok_or_else(|| at_end("missing `dim`"))?;
    let female = female.ok_or_else(|| at_end("missing `female`"))?;
    let male = male.ok_or_else(|| at_end("missing `male`"))?;

    let mut products = BTreeMap::new();
    for (line, target, terms) in raw_products {
        let line_error = |message: String| ParseError {
            line,
            column: 1,
            message,
        };
        let mut coeffs = vec![Rational::zero(); female.len() + 1];
        for (pair, coeff) in terms {
            let slot = if pair == male {
                female.len()
            } else {
                female
                    .iter()
                    .position(|&p| p == pair)
                    .ok_or_else(|| line_error(format!("{pair} is neither a female pair nor the male pair")))?
            };
            coeffs[slot] += coeff;
        }
        if products.insert(target, coeffs).is_some() {
            return Err(line_error(format!("product for {target} given twice")));
        }
    }
    CrossTable::new(dim, female, male, products).map_err(|e| at_end(&e.to_string()))
}

pub fn write_cross_table(table: &CrossTable) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "dim = {}", table.dim());
    let female: Vec<String> = table.female_pairs().iter().map(ToString::to_string).collect();
    let _ = writeln!(out, "female = {}", female.join(" "));
    let _ = writeln!(out, "male = {}", table.male_pair());
    let pairs: Vec<Pair> = table
        .female_pairs()
        .iter()
        .copied()
        .chain(std::iter::once(table.male_pair()))
        .collect();
    for (target, coeffs) in table.products() {
        let terms: Vec<String> = pairs
            .iter()
            .zip(coeffs)
            .filter(|(_, c)| !c.is_zero())
            .map(|(p, c)| format!("{p}:{}", format_rational(c)))
            .collect();
        let _ = writeln!(out, "product {target} = {}", terms.join(" "));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ratio;

    const WOLBACHIA: &str = "\
# ZW feminisation by Wolbachia
name = wolbachia
param eta = 3/4
n = 3
row = 3/4 0 0 | 1/4
row = 0 1/2 0 | 1/2
row = 3/8 1/8 3/8 | 1/8
";

    #[test]
    fn spec_round_trip_is_exact() {
        let doc = parse_spec(WOLBACHIA).unwrap();
        assert_eq!(doc.name.as_deref(), Some("wolbachia"));
        assert_eq!(doc.params, vec![("eta".to_string(), ratio(3, 4))]);
        assert_eq!(doc.spec.gamma()[2][1], ratio(1, 8));
        let again = parse_spec(&write_spec(&doc)).unwrap();
        assert_eq!(again, doc);
    }

    #[test]
    fn decimals_become_rationals() {
        let doc = parse_spec("row = 0.5 0.25 | 0.25\nrow = 0 1e0 | 0\n").unwrap();
        assert_eq!(doc.spec.gamma()[0][1], ratio(1, 4));
    }

    #[test]
    fn spec_errors_carry_positions() {
        let err = parse_spec("n = 2\nrow = 1/2 x | 1/2\n").unwrap_err();
        assert_eq!((err.line, err.column), (2, 11));
        let err = parse_spec("row = 1 0 1\n").unwrap_err();
        assert_eq!(err.line, 1);
        let err = parse_spec("  colour = blue\n").unwrap_err();
        assert_eq!((err.line, err.column), (1, 3));
        let err = parse_spec("n = 2\nrow = 1 0 | 0\n").unwrap_err();
        assert!(err.message.contains("n = 2"));
    }

    #[test]
    fn cross_table_round_trip() {
        let text =
            "dim = 3\nfemale = (1,1) (1, 2) (2,3)\nmale = (1,3)\nproduct (2,3) = (1,2):1/3 (2,3):1/3 (1,3):1/3\n";
        let table = parse_cross_table(text).unwrap();
        assert_eq!(table.female_pairs().len(), 3);
        assert_eq!(table.male_pair(), Pair::one_based(1, 3));
        let coeffs = &table.products()[&Pair::one_based(2, 3)];
        assert_eq!(coeffs[3], ratio(1, 3));
        assert_eq!(parse_cross_table(&write_cross_table(&table)).unwrap(), table);
    }

    #[test]
    fn cross_table_errors() {
        let err = parse_cross_table("dim = 3\nfemale = (1,1) (0,2)\n").unwrap_err();
        assert_eq!((err.line, err.column), (2, 16));
        let err = parse_cross_table("dim = 3\nfemale = (1,1)\nmale = (1,2)\nproduct (1,1) = (2,2):1\n").unwrap_err();
        assert_eq!(err.line, 4);
        let err = parse_cross_table("dim = 3\nfemale = (1,1)\nmale = (1,2)\n").unwrap_err();
        assert!(err.message.contains("no products"));
    }
}
