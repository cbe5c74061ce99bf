//! Truncated power series in one formal variable with polynomial coefficients.

use super::{q, AlgebraError, Q, QPoly};

#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    /// coeffs[k] multiplies s^k; always `order + 1` entries.
    pub coeffs: Vec<QPoly>,
}

impl Series {
    pub fn zero(order: usize) -> Self {
        Series { coeffs: vec![QPoly::zero(); order + 1] }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn from_coeffs(mut coeffs: Vec<QPoly>, order: usize) -> Self {
        coeffs.resize(order + 1, QPoly::zero());
        Series { coeffs }
    }

    pub fn constant(p: QPoly, order: usize) -> Self {
        Self::from_coeffs(vec![p], order)
    }

    /// The series s itself.
    pub fn variable(order: usize) -> Self {
        Self::from_coeffs(vec![QPoly::zero(), QPoly::one()], order)
    }

    pub fn coeff(&self, k: usize) -> Result<&QPoly, AlgebraError> {
        self.coeffs.get(k).ok_or(AlgebraError::Truncation { requested: k, order: self.order() })
    }

    pub fn add(&self, o: &Series) -> Series {
        let coeffs = self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| a + b).collect();
        Series { coeffs }
    }

    pub fn scale_poly(&self, p: &QPoly) -> Series {
        Series { coeffs: self.coeffs.iter().map(|c| c * p).collect() }
    }

    pub fn mul(&self, o: &Series) -> Series {
        let n = self.order().min(o.order());
        let mut out = Series::zero(n);
        for i in 0..=n {
            if self.coeffs[i].is_zero() {
                continue;
            }
            for j in 0..=n - i {
                out.coeffs[i + j] = &out.coeffs[i + j] + &(&self.coeffs[i] * &o.coeffs[j]);
            }
        }
        out
    }

    /// exp(f) for f with zero constant term, via e' = f' e.
    pub fn exp(&self) -> Series {
        assert!(self.coeffs[0].is_zero(), "exp needs a series without constant term");
        let n = self.order();
        let mut e = Series::zero(n);
        e.coeffs[0] = QPoly::one();
        for m in 1..=n {
            let mut acc = QPoly::zero();
            for k in 1..=m {
                let t = &self.coeffs[k] * &e.coeffs[m - k];
                acc = &acc + &t.scale(&q(k as i64));
            }
            e.coeffs[m] = acc.scale(&(Q::from_integer(1.into()) / q(m as i64)));
        }
        e
    }

    /// 1/f for f whose constant term is a nonzero rational constant.
    pub fn inverse(&self) -> Series {
        let c0 = self.coeffs[0].as_constant().filter(|c| *c != q(0)).expect("invertible constant term");
        let inv0 = Q::from_integer(1.into()) / c0;
        let n = self.order();
        let mut out = Series::zero(n);
        out.coeffs[0] = QPoly::constant(inv0.clone());
        for m in 1..=n {
            let mut acc = QPoly::zero();
            for k in 1..=m {
                acc = &acc + &(&self.coeffs[k] * &out.coeffs[m - k]);
            }
            out.coeffs[m] = acc.scale(&-inv0.clone());
        }
        out
    }

    /// Σ_j a_j g^j for polynomial coefficients a_j, where g has no constant term.
    pub fn compose(outer: &[QPoly], g: &Series) -> Series {
        let n = g.order();
        let mut out = Series::zero(n);
        let mut power = Series::constant(QPoly::one(), n);
        for a in outer.iter().take(n + 1) {
            out = out.add(&power.scale_poly(a));
            power = power.mul(g);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::super::{Sym, q_ratio};
    use super::*;

    #[test]
    fn exp_of_s() {
        let e = Series::variable(6).exp();
        assert_eq!(e.coeffs[3], QPoly::constant(q_ratio(1, 6)));
    }

    #[test]
    fn inverse_of_one_minus_us() {
        let u = QPoly::var(Sym::U);
        let f = Series::from_coeffs(vec![QPoly::one(), -&u], 5);
        let g = f.inverse();
        for k in 0..=5 {
            assert_eq!(g.coeffs[k], u.pow(k as u32));
        }
        let id = f.mul(&g);
        assert_eq!(id, Series::constant(QPoly::one(), 5));
    }
}
