//! Renormalized intersection local time polynomials and the coefficient
//! families that invert them.
//!
//! Three independent constructions of L_n as a polynomial in L_1 are
//! provided: the toy-model generating function exp(sL_1/(1+su)), the
//! recursion over chain specs σ, and the generating function in w = t·c(t)
//! with c(t) = Σ ch_j t^j. They must agree exactly.

use super::combinatorics::{compositions, ChainSpec};
use super::series::Series;
use super::{assert_equal, ch, cy, factorial, q_big, AlgebraError, Q, QPoly, Sym};

/// Largest order the exact routines are configured for.
pub const MAX_SERIES_ORDER: usize = 12;

fn inv_factorial(n: u32) -> Q {
    Q::new(1.into(), factorial(n))
}

/// L_0..=L_{n_max} in (L1, u) from Σ sⁿ L_n/n! = exp(s L_1/(1+su)).
pub fn rilt_polys_gf(n_max: usize) -> Result<Vec<QPoly>, AlgebraError> {
    if n_max > MAX_SERIES_ORDER {
        return Err(AlgebraError::Truncation { requested: n_max, order: MAX_SERIES_ORDER });
    }
    let order = n_max;
    let u = QPoly::var(Sym::U);
    // s/(1+su) = Σ_{k≥1} (−u)^{k−1} s^k
    let mut t = Series::zero(order);
    for k in 1..=order {
        t.coeffs[k] = (-&u).pow(k as u32 - 1);
    }
    let e = t.scale_poly(&QPoly::var(Sym::L1)).exp();
    (0..=n_max)
        .map(|n| Ok(e.coeff(n)?.scale(&q_big(factorial(n as u32)))))
        .collect()
}

/// L_0..=L_{n_max} in (var, ch_i) by the chain recursion
/// L_n = var^n − Σ_σ n!/(Π k_i! (n−|σ|₊)!) Π ch_i^{k_i} L_{n−|σ|},
/// over chain-only σ with 1 ≤ |σ| and |σ|₊ ≤ n.
pub fn rilt_polys_recursive(n_max: usize, var: Sym) -> Vec<QPoly> {
    let x = QPoly::var(var);
    let mut out: Vec<QPoly> = vec![QPoly::one()];
    for n in 1..=n_max as u32 {
        let mut l = x.pow(n);
        for sigma in ChainSpec::enumerate(n, false) {
            if sigma.size() == 0 {
                continue;
            }
            let mut den = factorial(n - sigma.size_plus());
            let mut mono = QPoly::one();
            for (i, k) in sigma.chain_counts() {
                den *= factorial(k);
                mono = &mono * &ch(i).pow(k);
            }
            let coef = Q::new(factorial(n), den);
            let j = &mono * &out[(n - sigma.size()) as usize];
            l = &l - &j.scale(&coef);
        }
        out.push(l);
    }
    out
}

/// L_n = B_n(var) from Σ_n wⁿ B_n/n! = e^{t·var}, w = t·c(t), c(t) = Σ_j ch_j t^j.
pub fn rilt_polys_ljo(n_max: usize, var: Sym) -> Vec<QPoly> {
    let order = n_max;
    let chs: Vec<QPoly> = (0..=order as u32).map(ch).collect();
    let w = Series::variable(order);
    // Fixed point t = w / c(t); each pass fixes one more coefficient.
    let mut t = w.clone();
    for _ in 0..=order {
        let c = Series::compose(&chs, &t);
        t = w.mul(&c.inverse());
    }
    let e = t.scale_poly(&QPoly::var(var)).exp();
    (0..=n_max)
        .map(|n| e.coeffs[n].scale(&q_big(factorial(n as u32))))
        .collect()
}

/// Substitute ch_j ↦ u^j.
pub fn toy_specialize(p: &QPoly) -> QPoly {
    p.substitute(|v| match v {
        Sym::Ch(j) => QPoly::var(Sym::U).pow(*j),
        other => QPoly::var(*other),
    })
}

/// Assert the recursive, ljo and toy generating-function routes agree for n ≤ n_max.
pub fn check_rilt_routes(n_max: usize) -> Result<Vec<QPoly>, AlgebraError> {
    let rec = rilt_polys_recursive(n_max, Sym::L1);
    let ljo = rilt_polys_ljo(n_max, Sym::L1);
    let gf = rilt_polys_gf(n_max)?;
    for n in 0..=n_max {
        assert_equal(&format!("L_{n}: recursion vs ljo"), &rec[n], &ljo[n])?;
        assert_equal(&format!("L_{n}: recursion (ch_j = u^j) vs generating function"), &toy_specialize(&rec[n]), &gf[n])?;
    }
    Ok(rec)
}

/// Single-path polynomials: the same recursion in the variable SL1, checked
/// against the soup polynomials after renaming.
pub fn self_ilt_polys(n_max: usize) -> Result<Vec<QPoly>, AlgebraError> {
    let single = rilt_polys_recursive(n_max, Sym::SelfL1);
    let soup = rilt_polys_recursive(n_max, Sym::L1);
    for n in 0..=n_max {
        let renamed = single[n].rename(|v| if *v == Sym::SelfL1 { Sym::L1 } else { *v });
        assert_equal(&format!("single-path L_{n} vs soup L_{n}"), &renamed, &soup[n])?;
    }
    Ok(single)
}

/// B_{n,k} = (n!/k!) Σ_{Σ(j_b+1)=n} Π ch_{j_b}, ch_0 = 1.
pub fn coeff_b(n: u32, k: u32) -> QPoly {
    if k > n {
        return QPoly::zero();
    }
    let mut acc = QPoly::zero();
    if k == 0 {
        if n == 0 {
            acc = QPoly::one();
        }
    } else {
        for js in compositions(n - k, k, 0) {
            let mut t = QPoly::one();
            for j in js {
                t = &t * &ch(j);
            }
            acc = &acc + &t;
        }
    }
    acc.scale(&Q::new(factorial(n), factorial(k)))
}

/// A_{n,k} = (n!/k!) Σ_r (1/r!) Σ Π cy_{i_a}/(2 i_a) Π ch_{j_b}, cycle orders i_a ≥ 2,
/// over Σ i_a + Σ (j_b + 1) = n.
pub fn coeff_a(n: u32, k: u32) -> QPoly {
    if k > n {
        return QPoly::zero();
    }
    let mut acc = QPoly::zero();
    for r in 0..=n / 2 {
        let mut per_r = QPoly::zero();
        // a = total cycle weight
        for a in 2 * r..=n - k {
            if r == 0 && a > 0 {
                break;
            }
            let chain_part = coeff_b(n - a, k).scale(&Q::new(factorial(k), factorial(n - a)));
            if chain_part.is_zero() {
                continue;
            }
            let mut cyc = QPoly::zero();
            for is in compositions(a, r, 2) {
                let mut t = QPoly::one();
                for i in is {
                    t = &t * &cy(i).scale(&Q::new(1.into(), (2 * i).into()));
                }
                cyc = &cyc + &t;
            }
            per_r = &per_r + &(&cyc * &chain_part);
        }
        acc = &acc + &per_r.scale(&inv_factorial(r));
    }
    acc.scale(&Q::new(factorial(n), factorial(k)))
}

/// I_n(σ) = n!/((n−|σ|₊)! Π k_i! Π m_j!) Π ch_i^{k_i} Π (cy_j/(2j))^{m_j}.
pub fn coeff_i(n: u32, sigma: &ChainSpec) -> QPoly {
    let mut den = factorial(n - sigma.size_plus());
    let mut t = QPoly::one();
    for (i, k) in sigma.chain_counts() {
        den *= factorial(k);
        t = &t * &ch(i).pow(k);
    }
    for (j, m) in sigma.cycle_counts() {
        den *= factorial(m);
        t = &t * &cy(j).scale(&Q::new(1.into(), (2 * j).into())).pow(m);
    }
    t.scale(&Q::new(factorial(n), den))
}

/// H̃_0..=H̃_{n_max} by H̃_n = H_1^n − Σ_{1 ≤ |σ|, |σ|₊ ≤ n} I_n(σ) H̃_{n−|σ|}.
pub fn wtilde_h(n_max: usize) -> Vec<QPoly> {
    let h = QPoly::var(Sym::H1);
    let mut out = vec![QPoly::one()];
    for n in 1..=n_max as u32 {
        let mut acc = h.pow(n);
        for sigma in ChainSpec::enumerate(n, true) {
            if sigma.size() == 0 {
                continue;
            }
            let t = &coeff_i(n, &sigma) * &out[(n - sigma.size()) as usize];
            acc = &acc - &t;
        }
        out.push(acc);
    }
    out
}

/// H_1^n = Σ_k A_{n,k} H̃_k for all n ≤ n_max.
pub fn check_a_expansion(n_max: usize) -> Result<(), AlgebraError> {
    let ht = wtilde_h(n_max);
    for n in 0..=n_max as u32 {
        let mut rhs = QPoly::zero();
        for k in 0..=n {
            rhs = &rhs + &(&coeff_a(n, k) * &ht[k as usize]);
        }
        assert_equal(&format!("H_1^{n} = Σ A_{{{n},k}} H~_k"), &QPoly::var(Sym::H1).pow(n), &rhs)?;
    }
    Ok(())
}

/// L_1^n = Σ_k B_{n,k} L_k for all n ≤ n_max.
pub fn check_b_expansion(n_max: usize) -> Result<(), AlgebraError> {
    let l = rilt_polys_recursive(n_max, Sym::L1);
    for n in 0..=n_max as u32 {
        let mut rhs = QPoly::zero();
        for k in 0..=n {
            rhs = &rhs + &(&coeff_b(n, k) * &l[k as usize]);
        }
        assert_equal(&format!("L_1^{n} = Σ B_{{{n},k}} L_k"), &QPoly::var(Sym::L1).pow(n), &rhs)?;
    }
    Ok(())
}

/// Toy-model L_n as f64 coefficients c with L_n(x) = Σ_m c[m] x^m, for given u.
pub fn toy_rilt_coefficients(n_max: usize, u: f64) -> Result<Vec<Vec<f64>>, AlgebraError> {
    use num_traits::ToPrimitive;
    let gf = rilt_polys_gf(n_max)?;
    Ok(gf
        .iter()
        .enumerate()
        .map(|(n, p)| {
            let mut c = vec![0.0; n + 1];
            for (m, coef) in p.terms() {
                let deg = m.exponent(&Sym::L1) as usize;
                let upow = m.exponent(&Sym::U) as i32;
                c[deg] += coef.to_f64().expect("finite rational") * u.powi(upow);
            }
            c
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::super::{q, q_ratio};
    use super::*;
    use crate::poly::Monomial;

    fn l1() -> QPoly {
        QPoly::var(Sym::L1)
    }

    #[test]
    fn worked_examples() {
        let l = rilt_polys_recursive(3, Sym::L1);
        assert_eq!(l[1], l1());
        assert_eq!(l[2], &l1().pow(2) - &(&ch(1) * &l1()).scale(&q(2)));
        let expected3 = &(&l1().pow(3) - &(&ch(1) * &l1().pow(2)).scale(&q(6)))
            + &(&(&ch(1).pow(2).scale(&q(12)) - &ch(2).scale(&q(6))) * &l1());
        assert_eq!(l[3], expected3);

        let gf = rilt_polys_gf(3).unwrap();
        let u = QPoly::var(Sym::U);
        assert_eq!(gf[2], &l1().pow(2) - &(&u * &l1()).scale(&q(2)));
        let want = &(&l1().pow(3) - &(&u * &l1().pow(2)).scale(&q(6))) + &(&u.pow(2) * &l1()).scale(&q(6));
        assert_eq!(gf[3], want);
    }

    #[test]
    fn all_routes_agree_to_eight() {
        check_rilt_routes(8).unwrap();
        self_ilt_polys(8).unwrap();
    }

    #[test]
    fn truncation_error() {
        assert!(matches!(rilt_polys_gf(MAX_SERIES_ORDER + 1), Err(AlgebraError::Truncation { .. })));
    }

    #[test]
    fn b_coefficients() {
        assert_eq!(coeff_b(3, 3), QPoly::one());
        assert_eq!(coeff_b(3, 2), ch(1).scale(&q(6)));
        assert_eq!(coeff_b(3, 1), ch(2).scale(&q(6)));
        assert_eq!(coeff_b(3, 0), QPoly::zero());
        check_b_expansion(8).unwrap();
    }

    #[test]
    fn a_coefficients() {
        assert_eq!(coeff_a(2, 2), QPoly::one());
        assert_eq!(coeff_a(2, 1), ch(1).scale(&q(2)));
        assert_eq!(coeff_a(2, 0), cy(2).scale(&q_ratio(1, 2)));
        assert_eq!(coeff_a(3, 1), &ch(2).scale(&q(6)) + &cy(2).scale(&q_ratio(3, 2)));
        assert_eq!(coeff_a(3, 0), cy(3));
        check_a_expansion(5).unwrap();
    }

    #[test]
    fn h_tilde_two() {
        let ht = wtilde_h(2);
        let h = QPoly::var(Sym::H1);
        let want = &(&h.pow(2) - &(&ch(1) * &h).scale(&q(2))) - &cy(2).scale(&q_ratio(1, 2));
        assert_eq!(ht[1], h);
        assert_eq!(ht[2], want);
    }

    #[test]
    fn cycles_of_order_one_would_break_the_expansion() {
        // With i_a ≥ 1 the formula would pick up a "cy_1" term at A_{1,0};
        // our A_{1,0} is zero, matching H_1 = H~_1.
        assert!(coeff_a(1, 0).is_zero());
        assert_eq!(coeff_a(1, 1), QPoly::one());
    }

    #[test]
    fn toy_coefficients_match_polys() {
        let c = toy_rilt_coefficients(3, 0.5).unwrap();
        assert_eq!(c[2], vec![0.0, -1.0, 1.0]);
        assert_eq!(c[3], vec![0.0, 1.5, -3.0, 1.0]);
        let gf = rilt_polys_gf(2).unwrap();
        assert_eq!(gf[2].coeff(&Monomial::var(Sym::L1, 2)), q(1));
    }
}
