//! Certificate files.
//!
//! ```text
//! arity 1
//! basis 2
//! 0
//! 1
//! r = 0
//! 1 1 2
//! 1 2 1
//! 2 2 1
//! ```
//!
//! After the header come the basis exponent vectors, one per line, then the
//! bound `r`, then every upper-triangle entry `i j value` of `W` (1-based).
//! Values are exact rationals `p/q` or integers; `#` starts a comment.

use std::fmt::Write as _;

use rug::Rational;
use thiserror::Error;

use super::{GramSystem, RationalProgram};
use crate::linalg::{ldlt_exact, PsdDecision, SymMatrix};
use crate::polytope::ExponentVector;
use crate::text::parse_rational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CertificateParseError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("unexpected end of certificate: {0}")]
    Eof(&'static str),
}

/// A lower bound `r` with `f − r·g = m(x)ᵀ W m(x)` and `W ⪰ 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SosCertificate {
    pub r: Rational,
    pub basis: Vec<ExponentVector>,
    pub w: SymMatrix<Rational>,
    /// Pivots of the exact `LDLᵀ` proving `W ⪰ 0`.
    pub psd_witness: Vec<Rational>,
}

impl SosCertificate {
    pub fn to_text(&self) -> String {
        let arity = self.basis.first().map_or(0, Vec::len);
        let mut s = format!("arity {arity}\nbasis {}\n", self.basis.len());
        for b in &self.basis {
            let line: Vec<String> = b.iter().map(u32::to_string).collect();
            s.push_str(&line.join(" "));
            s.push('\n');
        }
        let _ = writeln!(s, "r = {}", self.r);
        for (i, j, v) in self.w.upper() {
            let _ = writeln!(s, "{} {} {}", i + 1, j + 1, v);
        }
        s
    }

    /// Parses the file format; the PSD witness is recomputed.
    pub fn parse(text: &str) -> Result<Self, CertificateParseError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());
        let syntax = |line: usize, msg: String| CertificateParseError::Syntax { line, msg };

        let (ln, l) = lines.next().ok_or(CertificateParseError::Eof("arity"))?;
        let arity: usize = l
            .strip_prefix("arity")
            .and_then(|v| v.trim().parse().ok())
            .ok_or_else(|| syntax(ln, "expected `arity <n>`".into()))?;
        let (ln, l) = lines.next().ok_or(CertificateParseError::Eof("basis"))?;
        let size: usize = l
            .strip_prefix("basis")
            .and_then(|v| v.trim().parse().ok())
            .ok_or_else(|| syntax(ln, "expected `basis <k>`".into()))?;
        let mut basis = Vec::with_capacity(size);
        for _ in 0..size {
            let (ln, l) = lines.next().ok_or(CertificateParseError::Eof("basis exponents"))?;
            let e: Vec<u32> = l
                .split_whitespace()
                .map(|t| t.parse().map_err(|_| syntax(ln, format!("invalid exponent `{t}`"))))
                .collect::<Result<_, _>>()?;
            if e.len() != arity {
                return Err(syntax(ln, format!("expected {arity} exponents, found {}", e.len())));
            }
            basis.push(e);
        }
        let (ln, l) = lines.next().ok_or(CertificateParseError::Eof("r"))?;
        let r = l
            .strip_prefix('r')
            .map(str::trim_start)
            .and_then(|v| v.strip_prefix('='))
            .and_then(parse_rational)
            .ok_or_else(|| syntax(ln, "expected `r = <rational>`".into()))?;
        let mut w = SymMatrix::zeros(size);
        for (ln, l) in lines {
            let parts: Vec<&str> = l.split_whitespace().collect();
            let [i, j, v] = parts.as_slice() else {
                return Err(syntax(ln, "expected `i j value`".into()));
            };
            let idx = |t: &str| t.parse::<usize>().ok().filter(|&k| k >= 1 && k <= size);
            let (Some(i), Some(j)) = (idx(i), idx(j)) else {
                return Err(syntax(ln, format!("index out of range 1..={size}")));
            };
            if i > j {
                return Err(syntax(ln, "entries must be in the upper triangle".into()));
            }
            let v = parse_rational(v).ok_or_else(|| syntax(ln, format!("invalid value `{v}`")))?;
            w.set(i - 1, j - 1, v);
        }
        let psd_witness = match ldlt_exact(&w) {
            PsdDecision::Psd { pivots, .. } => pivots,
            PsdDecision::NotPsd { .. } => Vec::new(),
        };
        Ok(SosCertificate {
            r,
            basis,
            w,
            psd_witness,
        })
    }
}

/// True iff `f − r·g = m(x)ᵀ W m(x)` holds coefficientwise and `W ⪰ 0`,
/// both decided in exact arithmetic.
pub fn verify_certificate(prog: &RationalProgram, cert: &SosCertificate) -> bool {
    let k = cert.basis.len();
    if cert.w.n() != k || cert.basis.iter().any(|b| b.len() != prog.arity()) {
        return false;
    }
    let system = GramSystem::new(prog, &cert.basis);
    if system.gram_polynomial(&cert.w) != prog.residual_poly(&cert.r) {
        return false;
    }
    ldlt_exact(&cert.w).is_psd()
}
