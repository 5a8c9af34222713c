//! Sparse multivariate polynomials with exact rational coefficients.
//!
//! # Expression grammar
//!
//! ```text
//! expr    := sign? term (('+' | '-') term)*
//! term    := factor ('*'? factor)*          juxtaposition multiplies
//! factor  := atom ('^' integer)?
//! atom    := number | variable | '(' expr ')'
//! number  := digits ('.' digits)? (('e' | 'E') sign? digits)? ('/' digits)?
//! variable:= letter (letter | digit | '_')*
//! ```
//!
//! `/` is only accepted directly inside a numeric literal, so `3/4x^2` is
//! `(3/4)·x²`. Whitespace is insignificant except that it separates
//! juxtaposed factors such as `x y`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use rug::Rational;
use thiserror::Error;

use crate::polytope::ExponentVector;
use crate::text::parse_rational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PolyParseError {
    #[error("unexpected `{found}` at offset {pos}")]
    Unexpected { pos: usize, found: String },
    #[error("unexpected end of expression")]
    Eof,
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("invalid number `{0}`")]
    BadNumber(String),
    #[error("exponent `{0}` is not a nonnegative integer")]
    BadExponent(String),
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SparsePolynomial {
    arity: usize,
    terms: BTreeMap<ExponentVector, Rational>,
}

impl SparsePolynomial {
    pub fn zero(arity: usize) -> Self {
        SparsePolynomial {
            arity,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(arity: usize, c: Rational) -> Self {
        Self::monomial(vec![0; arity], c)
    }

    /// The variable `x_i` (0-based).
    pub fn var(arity: usize, i: usize) -> Self {
        let mut e = vec![0; arity];
        e[i] = 1;
        Self::monomial(e, Rational::from(1))
    }

    pub fn monomial(exp: ExponentVector, c: Rational) -> Self {
        let mut p = Self::zero(exp.len());
        if c.cmp0().is_ne() {
            p.terms.insert(exp, c);
        }
        p
    }

    /// Sums coefficients of repeated exponents; all exponents must have `arity` entries.
    pub fn from_terms(arity: usize, terms: impl IntoIterator<Item = (ExponentVector, Rational)>) -> Self {
        let mut p = Self::zero(arity);
        for (e, c) in terms {
            assert_eq!(e.len(), arity, "exponent arity");
            p.add_term(e, c);
        }
        p
    }

    fn add_term(&mut self, e: ExponentVector, c: Rational) {
        let entry = self.terms.entry(e);
        match entry {
            std::collections::btree_map::Entry::Vacant(v) => {
                if c.cmp0().is_ne() {
                    v.insert(c);
                }
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().cmp0().is_eq() {
                    o.remove();
                }
            }
        }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn terms(&self) -> &BTreeMap<ExponentVector, Rational> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, e: &[u32]) -> Rational {
        self.terms.get(e).cloned().unwrap_or_default()
    }

    pub fn support(&self) -> Vec<ExponentVector> {
        self.terms.keys().cloned().collect()
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.cmp0().is_eq() {
            return Self::zero(self.arity);
        }
        SparsePolynomial {
            arity: self.arity,
            terms: self.terms.iter().map(|(e, v)| (e.clone(), Rational::from(v * c))).collect(),
        }
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut out = Self::constant(self.arity, Rational::from(1));
        for _ in 0..k {
            out = &out * self;
        }
        out
    }

    pub fn eval(&self, x: &[Rational]) -> Rational {
        assert_eq!(x.len(), self.arity, "point arity");
        let mut s = Rational::new();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (xi, &k) in x.iter().zip(e) {
                for _ in 0..k {
                    t *= xi;
                }
            }
            s += t;
        }
        s
    }

    /// Substitutes `x_i ↦ subs[i]` (all of the same arity).
    pub fn compose(&self, subs: &[SparsePolynomial]) -> Self {
        assert_eq!(subs.len(), self.arity, "substitution arity");
        let arity = subs.first().map_or(0, |s| s.arity);
        let mut out = Self::zero(arity);
        for (e, c) in &self.terms {
            let mut t = Self::constant(arity, c.clone());
            for (s, &k) in subs.iter().zip(e) {
                t = &t * &s.pow(k);
            }
            out = &out + &t;
        }
        out
    }

    /// Parses an expression over the named variables.
    pub fn parse(expr: &str, vars: &[String]) -> Result<Self, PolyParseError> {
        let tokens = tokenize(expr)?;
        let mut parser = Parser {
            tokens,
            pos: 0,
            vars,
        };
        let p = parser.expr()?;
        match parser.tokens.get(parser.pos) {
            None => Ok(p),
            Some((at, tok)) => Err(PolyParseError::Unexpected {
                pos: *at,
                found: tok.to_string(),
            }),
        }
    }

    /// Renders with the given variable names, terms in descending graded-lex order.
    pub fn to_string_with(&self, vars: &[String]) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let mut exps: Vec<&ExponentVector> = self.terms.keys().collect();
        exps.sort_by(|a, b| crate::polytope::graded_lex_cmp(b, a));
        let mut out = String::new();
        for (k, e) in exps.into_iter().enumerate() {
            let c = &self.terms[e];
            let neg = c.cmp0().is_lt();
            if k == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            let a = Rational::from(c.abs_ref());
            let mono: Vec<String> = e
                .iter()
                .enumerate()
                .filter(|(_, &p)| p > 0)
                .map(|(i, &p)| if p == 1 { vars[i].clone() } else { format!("{}^{}", vars[i], p) })
                .collect();
            if mono.is_empty() {
                out.push_str(&a.to_string());
            } else {
                if a != 1 {
                    out.push_str(&a.to_string());
                    out.push('*');
                }
                out.push_str(&mono.join("*"));
            }
        }
        out
    }

    pub fn default_names(arity: usize) -> Vec<String> {
        (1..=arity).map(|i| format!("x{i}")).collect()
    }
}

impl fmt::Debug for SparsePolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_string_with(&Self::default_names(self.arity)))
    }
}

impl fmt::Display for SparsePolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_string_with(&Self::default_names(self.arity)))
    }
}

impl Add for &SparsePolynomial {
    type Output = SparsePolynomial;
    fn add(self, rhs: &SparsePolynomial) -> SparsePolynomial {
        assert_eq!(self.arity, rhs.arity, "arity mismatch");
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }
}

impl Sub for &SparsePolynomial {
    type Output = SparsePolynomial;
    fn sub(self, rhs: &SparsePolynomial) -> SparsePolynomial {
        assert_eq!(self.arity, rhs.arity, "arity mismatch");
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(e.clone(), Rational::from(-c));
        }
        out
    }
}

impl Mul for &SparsePolynomial {
    type Output = SparsePolynomial;
    fn mul(self, rhs: &SparsePolynomial) -> SparsePolynomial {
        assert_eq!(self.arity, rhs.arity, "arity mismatch");
        let mut out = SparsePolynomial::zero(self.arity);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &rhs.terms {
                let e: ExponentVector = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.add_term(e, Rational::from(ca * cb));
            }
        }
        out
    }
}

impl Neg for &SparsePolynomial {
    type Output = SparsePolynomial;
    fn neg(self) -> SparsePolynomial {
        self.scale(&Rational::from(-1))
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(String),
    Ident(String),
    Op(char),
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Token::Num(s) | Token::Ident(s) => f.write_str(s),
            Token::Op(c) => write!(f, "{c}"),
        }
    }
}

fn tokenize(s: &str) -> Result<Vec<(usize, Token)>, PolyParseError> {
    let chars: Vec<(usize, char)> = s.char_indices().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let digits = |i: &mut usize| {
        let start = *i;
        while *i < chars.len() && chars[*i].1.is_ascii_digit() {
            *i += 1;
        }
        *i > start
    };
    while i < chars.len() {
        let (at, c) = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            digits(&mut i);
            if i < chars.len() && chars[i].1 == '.' {
                i += 1;
                digits(&mut i);
            }
            if i < chars.len() && (chars[i].1 == 'e' || chars[i].1 == 'E') {
                let save = i;
                i += 1;
                if i < chars.len() && (chars[i].1 == '+' || chars[i].1 == '-') {
                    i += 1;
                }
                if !digits(&mut i) {
                    i = save;
                }
            }
            if i + 1 < chars.len() && chars[i].1 == '/' && chars[i + 1].1.is_ascii_digit() {
                i += 1;
                digits(&mut i);
            }
            let end = chars.get(i).map_or(s.len(), |&(p, _)| p);
            out.push((at, Token::Num(s[chars[start].0..end].to_string())));
        } else if c.is_alphabetic() {
            let start = i;
            while i < chars.len() && (chars[i].1.is_alphanumeric() || chars[i].1 == '_') {
                i += 1;
            }
            let end = chars.get(i).map_or(s.len(), |&(p, _)| p);
            out.push((at, Token::Ident(s[chars[start].0..end].to_string())));
        } else if "+-*^()".contains(c) {
            out.push((at, Token::Op(c)));
            i += 1;
        } else {
            return Err(PolyParseError::Unexpected {
                pos: at,
                found: c.to_string(),
            });
        }
    }
    Ok(out)
}

struct Parser<'a> {
    tokens: Vec<(usize, Token)>,
    pos: usize,
    vars: &'a [String],
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|(_, t)| t)
    }

    fn next(&mut self) -> Result<(usize, Token), PolyParseError> {
        let t = self.tokens.get(self.pos).cloned().ok_or(PolyParseError::Eof)?;
        self.pos += 1;
        Ok(t)
    }

    fn arity(&self) -> usize {
        self.vars.len()
    }

    fn expr(&mut self) -> Result<SparsePolynomial, PolyParseError> {
        let mut negate = false;
        match self.peek() {
            Some(Token::Op('-')) => {
                negate = true;
                self.pos += 1;
            }
            Some(Token::Op('+')) => self.pos += 1,
            _ => {}
        }
        let mut acc = self.term()?;
        if negate {
            acc = -&acc;
        }
        loop {
            match self.peek() {
                Some(Token::Op('+')) => {
                    self.pos += 1;
                    acc = &acc + &self.term()?;
                }
                Some(Token::Op('-')) => {
                    self.pos += 1;
                    acc = &acc - &self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<SparsePolynomial, PolyParseError> {
        let mut acc = self.factor()?;
        loop {
            match self.peek() {
                Some(Token::Op('*')) => {
                    self.pos += 1;
                    acc = &acc * &self.factor()?;
                }
                Some(Token::Num(_) | Token::Ident(_) | Token::Op('(')) => {
                    acc = &acc * &self.factor()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn factor(&mut self) -> Result<SparsePolynomial, PolyParseError> {
        let base = self.atom()?;
        if self.peek() == Some(&Token::Op('^')) {
            self.pos += 1;
            let (_, tok) = self.next()?;
            let k = match &tok {
                Token::Num(s) => s.parse::<u32>().map_err(|_| PolyParseError::BadExponent(s.clone()))?,
                other => return Err(PolyParseError::BadExponent(other.to_string())),
            };
            return Ok(base.pow(k));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<SparsePolynomial, PolyParseError> {
        let (at, tok) = self.next()?;
        match tok {
            Token::Num(s) => {
                let v = parse_rational(&s).ok_or(PolyParseError::BadNumber(s))?;
                Ok(SparsePolynomial::constant(self.arity(), v))
            }
            Token::Ident(name) => {
                let i = self
                    .vars
                    .iter()
                    .position(|v| *v == name)
                    .ok_or(PolyParseError::UnknownVariable(name))?;
                Ok(SparsePolynomial::var(self.arity(), i))
            }
            Token::Op('(') => {
                let inner = self.expr()?;
                match self.next() {
                    Ok((_, Token::Op(')'))) => Ok(inner),
                    Ok((pos, t)) => Err(PolyParseError::Unexpected {
                        pos,
                        found: t.to_string(),
                    }),
                    Err(e) => Err(e),
                }
            }
            other => Err(PolyParseError::Unexpected {
                pos: at,
                found: other.to_string(),
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    fn q(a: i64, b: i64) -> Rational {
        Rational::from((a, b))
    }

    #[test]
    fn parse_univariate() {
        let x = names(&["x"]);
        let p = SparsePolynomial::parse("x^2 + 2x + 2", &x).unwrap();
        assert_eq!(p.coeff(&[2]), 1);
        assert_eq!(p.coeff(&[1]), 2);
        assert_eq!(p.coeff(&[0]), 2);
        assert_eq!(p.terms().len(), 3);
    }

    #[test]
    fn parse_juxtaposition_and_fractions() {
        let v = names(&["x", "y"]);
        let p = SparsePolynomial::parse("3/4x^2 y - 0.5 x y^2 + (x - y)^2", &v).unwrap();
        assert_eq!(p.coeff(&[2, 1]), q(3, 4));
        assert_eq!(p.coeff(&[1, 2]), q(-1, 2));
        assert_eq!(p.coeff(&[2, 0]), 1);
        assert_eq!(p.coeff(&[1, 1]), -2);
        assert_eq!(p.coeff(&[0, 2]), 1);
    }

    #[test]
    fn parse_errors() {
        let x = names(&["x"]);
        assert_eq!(SparsePolynomial::parse("y + 1", &x), Err(PolyParseError::UnknownVariable("y".into())));
        assert_eq!(SparsePolynomial::parse("x +", &x), Err(PolyParseError::Eof));
        assert!(matches!(SparsePolynomial::parse("x ^ y", &x), Err(PolyParseError::BadExponent(_))));
        assert!(matches!(SparsePolynomial::parse("x ) 1", &x), Err(PolyParseError::Unexpected { .. })));
        assert!(matches!(SparsePolynomial::parse("x % 1", &x), Err(PolyParseError::Unexpected { .. })));
    }

    #[test]
    fn arithmetic_and_eval() {
        let v = names(&["x", "y"]);
        let a = SparsePolynomial::parse("x + y", &v).unwrap();
        let b = SparsePolynomial::parse("x - y", &v).unwrap();
        let prod = &a * &b;
        assert_eq!(prod, SparsePolynomial::parse("x^2 - y^2", &v).unwrap());
        assert!((&prod - &prod).is_zero());
        assert_eq!(prod.eval(&[q(3, 1), q(1, 2)]), q(35, 4));
        assert_eq!(a.pow(3).degree(), Some(3));
    }

    #[test]
    fn display_round_trips() {
        let v = names(&["x", "y"]);
        let p = SparsePolynomial::parse("-2/3 x^2y + x - 7 + y^3", &v).unwrap();
        let s = p.to_string_with(&v);
        assert_eq!(SparsePolynomial::parse(&s, &v).unwrap(), p);
    }

    #[test]
    fn compose_substitutes() {
        let v = names(&["x"]);
        let p = SparsePolynomial::parse("x^2 + 1", &v).unwrap();
        let w = names(&["s", "t"]);
        let sub = SparsePolynomial::parse("s - t", &w).unwrap();
        assert_eq!(p.compose(&[sub]), SparsePolynomial::parse("s^2 - 2 s t + t^2 + 1", &w).unwrap());
    }
}
