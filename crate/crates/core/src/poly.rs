//! Sparse multivariate polynomials with ordered variables.
//!
//! Used with exact rationals for the symbolic identities and with `f64` for
//! the moment oracle.

use std::collections::BTreeMap;
use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_traits::{One, Zero};

/// Coefficient ring.
pub trait Coeff:
    Clone
    + PartialEq
    + Debug
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
}

impl<T> Coeff for T where
    T: Clone
        + PartialEq
        + Debug
        + Zero
        + One
        + Add<Output = T>
        + Sub<Output = T>
        + Mul<Output = T>
        + Div<Output = T>
        + Neg<Output = T>
{
}

/// A power product: variables in increasing order, exponents positive.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial<V>(Vec<(V, u32)>);

impl<V: Ord + Clone> Monomial<V> {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn var(v: V, exp: u32) -> Self {
        if exp == 0 {
            Self::one()
        } else {
            Monomial(vec![(v, exp)])
        }
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (V, u32)>) -> Self {
        let mut map: BTreeMap<V, u32> = BTreeMap::new();
        for (v, e) in pairs {
            *map.entry(v).or_insert(0) += e;
        }
        Monomial(map.into_iter().filter(|&(_, e)| e > 0).collect())
    }

    pub fn factors(&self) -> &[(V, u32)] {
        &self.0
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|(_, e)| e).sum()
    }

    pub fn exponent(&self, v: &V) -> u32 {
        self.0.iter().find(|(w, _)| w == v).map_or(0, |(_, e)| *e)
    }

    pub fn mul(&self, other: &Self) -> Self {
        let (a, b) = (&self.0, &other.0);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                std::cmp::Ordering::Less => {
                    out.push(a[i].clone());
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(b[j].clone());
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    out.push((a[i].0.clone(), a[i].1 + b[j].1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Monomial(out)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Poly<V: Ord, C> {
    terms: BTreeMap<Monomial<V>, C>,
}

impl<V: Ord + Clone, C: Coeff> Default for Poly<V, C> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<V: Ord + Clone, C: Coeff> Poly<V, C> {
    pub fn zero() -> Self {
        Poly { terms: BTreeMap::new() }
    }

    pub fn one() -> Self {
        Self::constant(C::one())
    }

    pub fn constant(c: C) -> Self {
        Self::term(Monomial::one(), c)
    }

    pub fn var(v: V) -> Self {
        Self::term(Monomial::var(v, 1), C::one())
    }

    pub fn term(m: Monomial<V>, c: C) -> Self {
        let mut p = Self::zero();
        p.add_term(m, c);
        p
    }

    pub fn add_term(&mut self, m: Monomial<V>, c: C) {
        if c.is_zero() {
            return;
        }
        match self.terms.remove(&m) {
            Some(old) => {
                let s = old + c;
                if !s.is_zero() {
                    self.terms.insert(m, s);
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial<V>, &C)> {
        self.terms.iter()
    }

    pub fn coeff(&self, m: &Monomial<V>) -> C {
        self.terms.get(m).cloned().unwrap_or_else(C::zero)
    }

    /// The constant coefficient if the polynomial has no other terms.
    pub fn as_constant(&self) -> Option<C> {
        match self.terms.len() {
            0 => Some(C::zero()),
            1 => self.terms.get(&Monomial::one()).cloned(),
            _ => None,
        }
    }

    pub fn scale(&self, c: &C) -> Self {
        let mut out = Self::zero();
        for (m, a) in &self.terms {
            out.add_term(m.clone(), a.clone() * c.clone());
        }
        out
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut out = Self::one();
        for _ in 0..n {
            out = &out * self;
        }
        out
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    /// Replace each variable by a polynomial (possibly over another alphabet).
    pub fn substitute<W: Ord + Clone>(&self, f: impl Fn(&V) -> Poly<W, C>) -> Poly<W, C> {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let mut t = Poly::constant(c.clone());
            for (v, e) in m.factors() {
                t = &t * &f(v).pow(*e);
            }
            out = &out + &t;
        }
        out
    }

    /// Rename variables (a monomial-level substitution without expansion).
    pub fn rename<W: Ord + Clone>(&self, f: impl Fn(&V) -> W) -> Poly<W, C> {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let mm = Monomial::from_pairs(m.factors().iter().map(|(v, e)| (f(v), *e)));
            out.add_term(mm, c.clone());
        }
        out
    }

    pub fn eval(&self, f: impl Fn(&V) -> C) -> C {
        let mut acc = C::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (v, e) in m.factors() {
                let x = f(v);
                for _ in 0..*e {
                    t = t * x.clone();
                }
            }
            acc = acc + t;
        }
        acc
    }

    pub fn map_coeffs<D: Coeff>(&self, f: impl Fn(&C) -> D) -> Poly<V, D> {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            out.add_term(m.clone(), f(c));
        }
        out
    }

    /// First monomial (in term order) where the two polynomials differ.
    pub fn first_difference(&self, other: &Self) -> Option<(Monomial<V>, C, C)> {
        let mut keys: Vec<&Monomial<V>> = self.terms.keys().chain(other.terms.keys()).collect();
        keys.sort();
        keys.dedup();
        keys.into_iter()
            .map(|m| (m.clone(), self.coeff(m), other.coeff(m)))
            .find(|(_, a, b)| a != b)
    }
}

impl<V: Ord + Clone, C: Coeff> Add for &Poly<V, C> {
    type Output = Poly<V, C>;
    fn add(self, o: &Poly<V, C>) -> Poly<V, C> {
        let mut out = self.clone();
        for (m, c) in &o.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl<V: Ord + Clone, C: Coeff> Sub for &Poly<V, C> {
    type Output = Poly<V, C>;
    fn sub(self, o: &Poly<V, C>) -> Poly<V, C> {
        let mut out = self.clone();
        for (m, c) in &o.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }
}

impl<V: Ord + Clone, C: Coeff> Mul for &Poly<V, C> {
    type Output = Poly<V, C>;
    fn mul(self, o: &Poly<V, C>) -> Poly<V, C> {
        let mut out = Poly::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &o.terms {
                out.add_term(ma.mul(mb), ca.clone() * cb.clone());
            }
        }
        out
    }
}

impl<V: Ord + Clone, C: Coeff> Neg for &Poly<V, C> {
    type Output = Poly<V, C>;
    fn neg(self) -> Poly<V, C> {
        self.scale(&-C::one())
    }
}

macro_rules! owned_ops {
    ($($tr:ident $f:ident),*) => {$(
        impl<V: Ord + Clone, C: Coeff> $tr for Poly<V, C> {
            type Output = Poly<V, C>;
            fn $f(self, o: Poly<V, C>) -> Poly<V, C> {
                (&self).$f(&o)
            }
        }
        impl<V: Ord + Clone, C: Coeff> $tr<&Poly<V, C>> for Poly<V, C> {
            type Output = Poly<V, C>;
            fn $f(self, o: &Poly<V, C>) -> Poly<V, C> {
                (&self).$f(o)
            }
        }
    )*};
}

owned_ops!(Add add, Sub sub, Mul mul);

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;
    use proptest::prelude::*;

    type P = Poly<u8, BigRational>;

    fn q(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    fn arb_poly() -> impl Strategy<Value = P> {
        prop::collection::vec((0u8..3, 0u32..3, 0u8..3, 0u32..3, -5i64..5), 0..5).prop_map(|ts| {
            let mut p = P::zero();
            for (a, ea, b, eb, c) in ts {
                p.add_term(Monomial::from_pairs([(a, ea), (b, eb)]), q(c));
            }
            p
        })
    }

    #[test]
    fn binomial_square() {
        let x = P::var(0);
        let y = P::var(1);
        let s = (&x + &y).pow(2);
        assert_eq!(s.coeff(&Monomial::from_pairs([(0, 1), (1, 1)])), q(2));
        assert_eq!(s.len(), 3);
        assert!((&s - &s).is_zero());
    }

    proptest! {
        #[test]
        fn ring_laws(a in arb_poly(), b in arb_poly(), c in arb_poly()) {
            prop_assert_eq!(&a * &b, &b * &a);
            prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
            prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
            prop_assert!(!(&a - &b).terms().any(|(_, c)| num_traits::Zero::is_zero(c)));
        }

        #[test]
        fn evaluation_is_a_homomorphism(a in arb_poly(), b in arb_poly(), xs in prop::collection::vec(-3i64..3, 3)) {
            let at = |v: &u8| q(xs[*v as usize]);
            prop_assert_eq!((&a * &b).eval(at), a.eval(at) * b.eval(at));
            prop_assert_eq!((&a + &b).eval(at), a.eval(at) + b.eval(at));
        }
    }
}
