//! Plain-text SDP instance format.
//!
//! ```text
//! # comment
//! m n
//! c_1 ... c_m
//! F 0
//! row col value        (1-indexed, upper triangle, exact rationals)
//! F 1
//! ...
//! ```
//!
//! Blank lines and `#` comments are ignored. Entries listed for the lower
//! triangle are rejected; repeated entries are an error.

use std::fmt::Write as _;

use rug::Rational;
use thiserror::Error;

use super::{SdProblem, SdpError};
use crate::linalg::SymMatrix;
use crate::text::parse_rational;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParseError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("unexpected end of input: {0}")]
    Eof(String),
    #[error(transparent)]
    Problem(#[from] SdpError),
}

fn syntax(line: usize, msg: impl Into<String>) -> ParseError {
    ParseError::Syntax { line, msg: msg.into() }
}

impl SdProblem {
    pub fn parse(text: &str) -> Result<SdProblem, ParseError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());

        let (ln, header) = lines.next().ok_or_else(|| ParseError::Eof("missing \"m n\" header".into()))?;
        let dims: Vec<usize> = header
            .split_whitespace()
            .map(|t| t.parse::<usize>().map_err(|_| syntax(ln, format!("bad dimension {t:?}"))))
            .collect::<Result<_, _>>()?;
        let [m, n] = dims[..] else {
            return Err(syntax(ln, "header must be \"m n\""));
        };
        if n == 0 {
            return Err(syntax(ln, "matrix dimension must be positive"));
        }

        let mut c = Vec::with_capacity(m);
        if m > 0 {
            let (ln, row) = lines.next().ok_or_else(|| ParseError::Eof("missing objective vector".into()))?;
            for tok in row.split_whitespace() {
                c.push(parse_rational(tok).ok_or_else(|| syntax(ln, format!("bad rational {tok:?}")))?);
            }
            if c.len() != m {
                return Err(syntax(ln, format!("expected {m} objective entries, found {}", c.len())));
            }
        }

        let mut mats: Vec<Option<Vec<Vec<Rational>>>> = vec![None; m + 1];
        let mut current: Option<usize> = None;
        for (ln, line) in lines {
            let toks: Vec<&str> = line.split_whitespace().collect();
            if toks[0] == "F" {
                let [_, idx] = toks[..] else {
                    return Err(syntax(ln, "block header must be \"F i\""));
                };
                let i: usize = idx.parse().map_err(|_| syntax(ln, format!("bad matrix index {idx:?}")))?;
                if i > m {
                    return Err(syntax(ln, format!("matrix index {i} exceeds m = {m}")));
                }
                if mats[i].is_some() {
                    return Err(syntax(ln, format!("matrix F{i} given twice")));
                }
                mats[i] = Some(vec![vec![Rational::new(); n]; n]);
                current = Some(i);
                continue;
            }
            let Some(i) = current else {
                return Err(syntax(ln, "entry before any \"F i\" header"));
            };
            let [r, s, v] = toks[..] else {
                return Err(syntax(ln, "entry must be \"row col value\""));
            };
            let r: usize = r.parse().map_err(|_| syntax(ln, format!("bad row {r:?}")))?;
            let s: usize = s.parse().map_err(|_| syntax(ln, format!("bad column {s:?}")))?;
            if r == 0 || s == 0 || r > n || s > n {
                return Err(syntax(ln, format!("index ({r}, {s}) outside 1..={n}")));
            }
            if r > s {
                return Err(syntax(ln, format!("entry ({r}, {s}) is below the diagonal")));
            }
            let v = parse_rational(v).ok_or_else(|| syntax(ln, format!("bad rational {v:?}")))?;
            let mat = mats[i].as_mut().expect("current block exists");
            if mat[r - 1][s - 1].cmp0().is_ne() {
                return Err(syntax(ln, format!("entry ({r}, {s}) of F{i} repeated")));
            }
            mat[r - 1][s - 1] = v.clone();
            mat[s - 1][r - 1] = v;
        }

        let f = mats
            .into_iter()
            .map(|m| {
                let rows = m.unwrap_or_else(|| vec![vec![Rational::new(); n]; n]);
                SymMatrix::from_rows(&rows).expect("filled symmetrically")
            })
            .collect();
        Ok(SdProblem::new(c, f)?)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{} {}", self.m(), self.n()).unwrap();
        if self.m() > 0 {
            let c: Vec<String> = self.c().iter().map(|v| v.to_string()).collect();
            writeln!(out, "{}", c.join(" ")).unwrap();
        }
        for (i, fi) in self.matrices().iter().enumerate() {
            writeln!(out, "F {i}").unwrap();
            for (r, s, v) in fi.upper() {
                if v.cmp0().is_ne() {
                    writeln!(out, "{} {} {}", r + 1, s + 1, v).unwrap();
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOY: &str = "# minimize x s.t. [[x,1],[1,x]] >= 0\n1 2\n1\nF 0\n1 2 1\n\nF 1\n1 1 1\n2 2 1\n";

    #[test]
    fn parses_toy() {
        let p = SdProblem::parse(TOY).unwrap();
        assert_eq!(p.m(), 1);
        assert_eq!(p.n(), 2);
        assert_eq!(*p.f(0).get(1, 0), 1);
        assert_eq!(*p.f(1), SymMatrix::identity(2));
        assert_eq!(SdProblem::parse(&p.to_text()).unwrap(), p);
    }

    #[test]
    fn rational_entries_are_exact() {
        let p = SdProblem::parse("1 1\n-2/6\nF 1\n1 1 0.1\n").unwrap();
        assert_eq!(p.c()[0], Rational::from((-1, 3)));
        assert_eq!(*p.f(1).get(0, 0), Rational::from((1, 10)));
        assert!(p.f(0).is_zero());
    }

    #[test]
    fn reports_errors_with_lines() {
        assert!(matches!(SdProblem::parse(""), Err(ParseError::Eof(_))));
        assert!(matches!(
            SdProblem::parse("1 2\n1\nF 0\n2 1 1\n"),
            Err(ParseError::Syntax { line: 4, .. })
        ));
        assert!(matches!(
            SdProblem::parse("1 2\n1\nF 3\n"),
            Err(ParseError::Syntax { line: 3, .. })
        ));
        assert!(matches!(
            SdProblem::parse("1 2\n1 2\n"),
            Err(ParseError::Syntax { line: 2, .. })
        ));
        assert!(matches!(
            SdProblem::parse("1 2\n1\n1 1 1\n"),
            Err(ParseError::Syntax { line: 3, .. })
        ));
    }
}
