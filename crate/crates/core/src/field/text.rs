//! Textual element format.
//!
//! ```text
//! element  := "0" | term ( "+" term )*
//! term     := coeff "*" "p^" exponent | "p^" exponent | coeff
//! coeff    := residue                      (c = 1)
//!           | "[" residue ( "," residue )* "]"   (exactly c residues, ζ_0 first)
//!           | digit{c}                     (c > 1: c base-p digits, ζ_0 first)
//! exponent := ["-"] digits
//! ```
//!
//! A bare `coeff` is the constant term. Repeated exponents add up.
//! `Display` writes terms in increasing exponent order, always as
//! `coeff*p^e`, with bracketed coefficients when c > 1; `parse` reads
//! that form back exactly.

use std::fmt;

use super::gf::Field;
use super::local::LocalFieldElement;
use crate::error::{Error, Result};

fn parse_coeff(field: &Field, text: &str) -> Result<u32> {
    let p = field.p();
    let c = field.c() as usize;
    let bad = |why: String| Error::Parse(format!("coefficient {text:?}: {why}"));
    let digits: Vec<u32> = if let Some(inner) = text.strip_prefix('[') {
        let inner = inner
            .strip_suffix(']')
            .ok_or_else(|| bad("missing ']'".into()))?;
        inner
            .split(',')
            .map(|d| d.trim().parse::<u32>().map_err(|e| bad(e.to_string())))
            .collect::<Result<_>>()?
    } else if c == 1 {
        vec![text.parse::<u32>().map_err(|e| bad(e.to_string()))?]
    } else {
        text.chars()
            .map(|ch| {
                ch.to_digit(10)
                    .ok_or_else(|| bad(format!("{ch:?} is not a digit")))
            })
            .collect::<Result<_>>()?
    };
    if digits.len() != c {
        return Err(bad(format!(
            "expected {c} coordinates, found {}",
            digits.len()
        )));
    }
    if let Some(d) = digits.iter().find(|&&d| d >= p) {
        return Err(bad(format!("residue {d} not in [0, {p})")));
    }
    Ok(digits.iter().rev().fold(0, |acc, &d| acc * p + d))
}

fn parse_exponent(text: &str) -> Result<i32> {
    let body = text
        .strip_prefix("p^")
        .ok_or_else(|| Error::Parse(format!("expected p^<exponent>, found {text:?}")))?;
    body.trim()
        .parse::<i32>()
        .map_err(|e| Error::Parse(format!("exponent {body:?}: {e}")))
}

impl LocalFieldElement {
    pub fn parse(field: &Field, text: &str, precision: i32) -> Result<Self> {
        let text = text.trim();
        if text.is_empty() {
            return Err(Error::Parse("empty element".into()));
        }
        if text == "0" {
            return Ok(LocalFieldElement::zero(field, precision));
        }
        let mut terms = Vec::new();
        for raw in text.split('+') {
            let term: String = raw.chars().filter(|ch| !ch.is_whitespace()).collect();
            if term.is_empty() {
                return Err(Error::Parse(format!("empty term in {text:?}")));
            }
            let (coeff, exponent) = match term.split_once('*') {
                Some((c, e)) => (parse_coeff(field, c)?, parse_exponent(e)?),
                None if term.starts_with("p^") => (1, parse_exponent(&term)?),
                None => (parse_coeff(field, &term)?, 0),
            };
            terms.push((exponent, coeff));
        }
        Ok(LocalFieldElement::from_terms(field, &terms, precision))
    }
}

impl fmt::Display for LocalFieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let c = self.field().c();
        for (i, (e, coeff)) in self.terms().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            if c == 1 {
                write!(f, "{coeff}*p^{e}")?;
            } else {
                let coords = self.coefficient(e).coeffs();
                let joined: Vec<String> = coords.iter().map(u32::to_string).collect();
                write!(f, "[{}]*p^{e}", joined.join(","))?;
            }
        }
        Ok(())
    }
}
