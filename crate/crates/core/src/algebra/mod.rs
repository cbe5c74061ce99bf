//! Exact-rational symbolic layer.
//!
//! Polynomials live over the alphabet [`Sym`]; all coefficients are
//! [`BigRational`], so every identity here is checked for exact equality.

pub mod combinatorics;
pub mod pairings;
pub mod rilt;
pub mod series;

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::Serialize;
use thiserror::Error;

use crate::poly::{Monomial, Poly};

pub type Q = BigRational;
pub type QPoly = Poly<Sym, Q>;

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn q_ratio(a: i64, b: i64) -> Q {
    Q::new(BigInt::from(a), BigInt::from(b))
}

pub fn q_big(n: BigInt) -> Q {
    Q::from_integer(n)
}

pub fn factorial(n: u32) -> BigInt {
    (1..=n).fold(BigInt::from(1), |acc, k| acc * k)
}

pub fn binomial(n: u32, k: u32) -> BigInt {
    if k > n {
        return BigInt::from(0);
    }
    factorial(n) / (factorial(k) * factorial(n - k))
}

/// Order of a cycle function. Cycles of order one do not exist.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct CycleOrder(u32);

impl CycleOrder {
    pub fn new(j: u32) -> Option<Self> {
        (j >= 2).then_some(CycleOrder(j))
    }

    pub fn get(self) -> u32 {
        self.0
    }
}

/// Indeterminates of the symbolic layer.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sym {
    /// Total local time of the soup.
    L1,
    /// Local time of a single path.
    SelfL1,
    H1,
    G,
    U,
    Alpha,
    /// Chain function ch_i, i ≥ 1 (ch_0 = 1 is never a variable).
    Ch(u32),
    Cy(CycleOrder),
}

impl fmt::Display for Sym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sym::L1 => write!(f, "L1"),
            Sym::SelfL1 => write!(f, "SL1"),
            Sym::H1 => write!(f, "H1"),
            Sym::G => write!(f, "G"),
            Sym::U => write!(f, "u"),
            Sym::Alpha => write!(f, "alpha"),
            Sym::Ch(i) => write!(f, "ch{i}"),
            Sym::Cy(j) => write!(f, "cy{}", j.get()),
        }
    }
}

/// ch_j as a polynomial, with ch_0 = 1.
pub fn ch(j: u32) -> QPoly {
    if j == 0 {
        QPoly::one()
    } else {
        QPoly::var(Sym::Ch(j))
    }
}

pub fn cy(j: u32) -> QPoly {
    QPoly::var(Sym::Cy(CycleOrder::new(j).expect("cycle order ≥ 2")))
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AlgebraError {
    #[error("{what}: polynomials differ at monomial {monomial} ({left} vs {right})")]
    Mismatch { what: String, monomial: String, left: String, right: String },
    #[error("requested order {requested} exceeds the series truncation order {order}")]
    Truncation { requested: usize, order: usize },
    #[error("{what}: {left} vs {right}")]
    ValueMismatch { what: String, left: String, right: String },
}

pub fn monomial_string(m: &Monomial<Sym>) -> String {
    if m.is_one() {
        return "1".into();
    }
    m.factors()
        .iter()
        .map(|(v, e)| if *e == 1 { v.to_string() } else { format!("{v}^{e}") })
        .collect::<Vec<_>>()
        .join("*")
}

/// Exact equality, or a mismatch error naming the first differing coefficient.
pub fn assert_equal(what: &str, a: &QPoly, b: &QPoly) -> Result<(), AlgebraError> {
    match a.first_difference(b) {
        None => Ok(()),
        Some((m, l, r)) => Err(AlgebraError::Mismatch {
            what: what.into(),
            monomial: monomial_string(&m),
            left: l.to_string(),
            right: r.to_string(),
        }),
    }
}

/// Canonical JSON: terms in sorted monomial order, coefficients as rational strings.
pub fn to_json(p: &QPoly) -> serde_json::Value {
    let terms: Vec<serde_json::Value> = p
        .terms()
        .map(|(m, c)| {
            let mono: Vec<serde_json::Value> = m
                .factors()
                .iter()
                .map(|(v, e)| serde_json::json!([v.to_string(), e]))
                .collect();
            serde_json::json!({ "monomial": mono, "coeff": c.to_string() })
        })
        .collect();
    serde_json::Value::Array(terms)
}

/// Human-readable form, e.g. `L1^2 - 2*ch1*L1`.
pub fn pretty(p: &QPoly) -> String {
    if p.is_zero() {
        return "0".into();
    }
    let mut out = String::new();
    for (i, (m, c)) in p.terms().enumerate() {
        let neg = c < &q(0);
        let mag = if neg { -c.clone() } else { c.clone() };
        if i == 0 {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        let mono = monomial_string(m);
        if m.is_one() {
            out.push_str(&mag.to_string());
        } else if mag == q(1) {
            out.push_str(&mono);
        } else {
            out.push_str(&format!("{mag}*{mono}"));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cycle_order_one_is_unrepresentable() {
        assert!(CycleOrder::new(1).is_none());
        assert!(CycleOrder::new(0).is_none());
        assert_eq!(CycleOrder::new(2).unwrap().get(), 2);
    }

    #[test]
    fn canonical_json_is_sorted_and_exact() {
        let p = &(&QPoly::var(Sym::L1) * &QPoly::var(Sym::L1)) - &ch(1).scale(&q_ratio(3, 2));
        let js = to_json(&p).to_string();
        assert_eq!(js, r#"[{"coeff":"1","monomial":[["L1",2]]},{"coeff":"-3/2","monomial":[["ch1",1]]}]"#);
    }
}
