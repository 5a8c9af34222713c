//! Sums-of-squares lower bounds for rational functions.
//!
//! For `f/g` with `g > 0`, any `r` admitting an identity
//! `f − r·g = m(x)ᵀ W m(x)` with `W ⪰ 0` is a lower bound of `f/g`. The
//! largest such `r` solves an SDP; its floating-point iterates are
//! rationalized and projected onto the affine set of exact identities, and
//! every projection that is positive semidefinite yields a certificate that
//! can be checked with exact arithmetic alone.

mod certificate;
mod certify;
mod gram;
mod poly;
mod project;

pub use certificate::{verify_certificate, CertificateParseError, SosCertificate};
pub use certify::{certify, certify_observed, CertifiedStep, CERTIFY_NU, CertifyConfig, CertifyReport};
pub use gram::{build_basis, get_sdp, GramSystem, MsosPoint, SosSdp};
pub use poly::{PolyParseError, SparsePolynomial};
pub use project::{project_to_chi, rationalize, round_to_denominator};

use thiserror::Error;

use crate::ipm::SolverError;
use crate::linalg::Rational;
use crate::sdp::SdpError;

#[derive(Debug, Error)]
pub enum SosError {
    #[error("f and g have no terms")]
    EmptySupport,
    #[error("monomial basis does not cover exponent {0:?}")]
    BasisIncomplete(Vec<u32>),
    #[error("no matrix satisfies the identity constraints for this basis")]
    DegenerateConstraints,
    #[error("no certified bound after {iterations} iterations (last projection: {diagnostic})")]
    NoCertificateFound { iterations: usize, diagnostic: String },
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Model(#[from] SdpError),
}

#[derive(Debug, Error)]
pub enum ProgramParseError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("missing `{0}:` line")]
    Missing(&'static str),
    #[error("in `{field}`: {source}")]
    Poly {
        field: &'static str,
        #[source]
        source: PolyParseError,
    },
    #[error("g is identically zero")]
    ZeroDenominator,
}

/// Minimize `f(x)/g(x)`, with `g > 0` on `ℝⁿ` asserted by the caller.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalProgram {
    pub vars: Vec<String>,
    pub f: SparsePolynomial,
    pub g: SparsePolynomial,
}

impl RationalProgram {
    pub fn new(vars: Vec<String>, f: SparsePolynomial, g: SparsePolynomial) -> Result<Self, ProgramParseError> {
        assert_eq!(f.arity(), vars.len(), "f arity");
        assert_eq!(g.arity(), vars.len(), "g arity");
        if g.is_zero() {
            return Err(ProgramParseError::ZeroDenominator);
        }
        Ok(RationalProgram { vars, f, g })
    }

    pub fn arity(&self) -> usize {
        self.vars.len()
    }

    /// Parses
    ///
    /// ```text
    /// vars: x y
    /// f: x^2 + y^2 + 1
    /// g: 1
    /// ```
    ///
    /// Blank lines and `#` comments are ignored.
    pub fn parse(text: &str) -> Result<Self, ProgramParseError> {
        let mut vars: Option<Vec<String>> = None;
        let mut f_src = None;
        let mut g_src = None;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, rest)) = line.split_once(':') else {
                return Err(ProgramParseError::Syntax {
                    line: i + 1,
                    msg: "expected `key: value`".into(),
                });
            };
            let slot = match key.trim() {
                "vars" => {
                    vars = Some(rest.split_whitespace().map(str::to_string).collect());
                    continue;
                }
                "f" => &mut f_src,
                "g" => &mut g_src,
                other => {
                    return Err(ProgramParseError::Syntax {
                        line: i + 1,
                        msg: format!("unknown key `{other}`"),
                    })
                }
            };
            *slot = Some(rest.trim().to_string());
        }
        let vars = vars.ok_or(ProgramParseError::Missing("vars"))?;
        let f_src = f_src.ok_or(ProgramParseError::Missing("f"))?;
        let g_src = g_src.ok_or(ProgramParseError::Missing("g"))?;
        let f = SparsePolynomial::parse(&f_src, &vars).map_err(|source| ProgramParseError::Poly { field: "f", source })?;
        let g = SparsePolynomial::parse(&g_src, &vars).map_err(|source| ProgramParseError::Poly { field: "g", source })?;
        Self::new(vars, f, g)
    }

    pub fn to_text(&self) -> String {
        format!(
            "vars: {}\nf: {}\ng: {}\n",
            self.vars.join(" "),
            self.f.to_string_with(&self.vars),
            self.g.to_string_with(&self.vars)
        )
    }

    /// `f − r·g`.
    pub fn residual_poly(&self, r: &Rational) -> SparsePolynomial {
        &self.f - &self.g.scale(r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_program_file() {
        let p = RationalProgram::parse("# example\nvars: x\nf: x^4 + 1\n\ng: x^2 + 1\n").unwrap();
        assert_eq!(p.vars, vec!["x".to_string()]);
        assert_eq!(p.f.coeff(&[4]), 1);
        assert_eq!(p.g.coeff(&[2]), 1);
        let again = RationalProgram::parse(&p.to_text()).unwrap();
        assert_eq!(again, p);
    }

    #[test]
    fn parse_program_errors() {
        assert!(matches!(RationalProgram::parse("vars: x\nf: x\n"), Err(ProgramParseError::Missing("g"))));
        assert!(matches!(RationalProgram::parse("vars: x\nf: x\ng: 0\n"), Err(ProgramParseError::ZeroDenominator)));
        assert!(matches!(
            RationalProgram::parse("vars: x\nf: x +\ng: 1\n"),
            Err(ProgramParseError::Poly { field: "f", .. })
        ));
        assert!(matches!(RationalProgram::parse("vars x\n"), Err(ProgramParseError::Syntax { line: 1, .. })));
    }
}
