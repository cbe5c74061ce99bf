//! Pairings of (R × {1,2}) ∪ S ∪ U with no point of R paired with itself,
//! and their decomposition into chains and cycles.
//!
//! Each point of R carries two half-points; each point of S ∪ U carries one.
//! Reading every pair as an edge between owners, a pairing becomes a graph
//! in which R-points have degree 2 and S ∪ U points have degree 1. Its
//! components are paths between S ∪ U points (chains; order = number of
//! edges) and cycles inside R (order = number of points).

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::RngExt;
use serde::Serialize;

use super::combinatorics::ChainSpec;
use super::{factorial, q, AlgebraError, Q};
use crate::rng;

/// Number of pairings per σ.
pub type Census = BTreeMap<ChainSpec, u64>;

/// Enumerate all admissible pairings for |R| = r and |S| + |U| = e, calling
/// `visit` with the σ of each.
pub fn for_each_pairing(r: usize, e: usize, mut visit: impl FnMut(&ChainSpec)) {
    assert!(e % 2 == 0, "|S| + |U| must be even");
    let halves = 2 * r + e;
    let owner = |h: usize| if h < 2 * r { h / 2 } else { r + (h - 2 * r) };
    let mut partner = vec![usize::MAX; halves];

    fn rec(
        partner: &mut [usize],
        owner: &dyn Fn(usize) -> usize,
        r: usize,
        e: usize,
        visit: &mut dyn FnMut(&ChainSpec),
    ) {
        let Some(first) = partner.iter().position(|&p| p == usize::MAX) else {
            visit(&decompose(partner, owner, r, e));
            return;
        };
        for second in first + 1..partner.len() {
            if partner[second] != usize::MAX || owner(first) == owner(second) {
                continue;
            }
            partner[first] = second;
            partner[second] = first;
            rec(partner, owner, r, e, visit);
            partner[first] = usize::MAX;
            partner[second] = usize::MAX;
        }
    }
    rec(&mut partner, &owner, r, e, &mut visit);
}

/// Chain/cycle type of a complete pairing given as a partner table over half-points.
fn decompose(partner: &[usize], owner: &dyn Fn(usize) -> usize, r: usize, e: usize) -> ChainSpec {
    let nodes = r + e;
    // Half-points of each owner.
    let halves_of = |v: usize| -> Vec<usize> { if v < r { vec![2 * v, 2 * v + 1] } else { vec![2 * r + (v - r)] } };
    let mut seen = vec![false; nodes];
    let mut sigma = ChainSpec::empty();
    // Chains start and end at S ∪ U points.
    for start in r..nodes {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        let mut h = halves_of(start)[0];
        let mut edges = 0;
        loop {
            let other = partner[h];
            edges += 1;
            let v = owner(other);
            seen[v] = true;
            if v >= r {
                break;
            }
            // Leave v through its other half-point.
            h = if other % 2 == 0 { other + 1 } else { other - 1 };
        }
        sigma.add_chain(edges);
    }
    for start in 0..r {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        let mut h = 2 * start;
        let mut len = 1;
        loop {
            let other = partner[h];
            let v = owner(other);
            if v == start {
                break;
            }
            seen[v] = true;
            len += 1;
            h = if other % 2 == 0 { other + 1 } else { other - 1 };
        }
        sigma.add_cycle(len);
    }
    sigma
}

pub fn census(r: usize, e: usize) -> Census {
    let mut c = Census::new();
    for_each_pairing(r, e, |s| *c.entry(s.clone()).or_insert(0) += 1);
    c
}

/// The count formula as printed, with both products running from l = 1:
/// |R|! / Π (l!)^{m_l} m_l! ((l−1)!)^{k_l} k_l! · Π ((l−1)!/2)^{m_l} ((l−1)!)^{k_l}
/// · (|S|+|U|)! / 2^{Σ k_l} · 2^{|R|}.
pub fn count_formula(r: u32, e: u32, sigma: &ChainSpec) -> Q {
    let mut num = factorial(r) * factorial(e) * (BigInt::one() << r);
    let mut den = BigInt::one() << sigma.num_chains();
    for (l, k) in sigma.chain_counts() {
        den *= factorial(l - 1).pow(k) * factorial(k);
        num *= factorial(l - 1).pow(k);
    }
    for (l, m) in sigma.cycle_counts() {
        den *= factorial(l).pow(m) * factorial(m) * (BigInt::from(2)).pow(m);
        num *= factorial(l - 1).pow(m);
    }
    Q::new(num, den)
}

/// Normalized form: |R|! (|S|+|U|)! 2^{|R|} / (2^p Π m_l! k_l! Π (2l)^{m_l}).
pub fn count_normalized(r: u32, e: u32, sigma: &ChainSpec) -> Q {
    let num = factorial(r) * factorial(e) * (BigInt::one() << r);
    let mut den = BigInt::one() << sigma.num_chains();
    for (_, k) in sigma.chain_counts() {
        den *= factorial(k);
    }
    for (l, m) in sigma.cycle_counts() {
        den *= factorial(m) * BigInt::from(2 * l).pow(m);
    }
    Q::new(num, den)
}

/// All σ that can arise: |σ|₊ = r + e and p = e/2.
pub fn admissible_specs(r: u32, e: u32) -> Vec<ChainSpec> {
    ChainSpec::enumerate(r + e, true)
        .into_iter()
        .filter(|s| s.size_plus() == r + e && 2 * s.num_chains() == e)
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct PairingReport {
    pub r: u32,
    pub e: u32,
    pub pairings: u64,
    pub specs: usize,
    pub pass: bool,
}

/// Census vs formula for one (|R|, |S|+|U|), plus the weighted identity with
/// random rational chain/cycle values.
pub fn pairing_check(r: u32, e: u32, seed: u64) -> Result<PairingReport, AlgebraError> {
    // Random positive rationals for ch_l and cy_l.
    let mut rng = rng::stream(seed, (r as u64) << 8 | e as u64, 0);
    let top = (r + e + 1) as usize;
    let mut rand_q = || Q::new(BigInt::from(rng.random_range(1..50i64)), BigInt::from(rng.random_range(1..50i64)));
    let chv: Vec<Q> = (0..=top).map(|_| rand_q()).collect();
    let cyv: Vec<Q> = (0..=top).map(|_| rand_q()).collect();
    let weight = |s: &ChainSpec| -> Q {
        let mut w = Q::one();
        for (l, k) in s.chain_counts() {
            w *= chv[l as usize].clone().pow(k as i32);
        }
        for (l, m) in s.cycle_counts() {
            w *= cyv[l as usize].clone().pow(m as i32);
        }
        w
    };

    let mut counts = Census::new();
    let mut direct = Q::zero();
    let mut cache: BTreeMap<ChainSpec, Q> = BTreeMap::new();
    for_each_pairing(r as usize, e as usize, |s| {
        *counts.entry(s.clone()).or_insert(0) += 1;
        let w = cache.entry(s.clone()).or_insert_with(|| weight(s));
        direct += w.clone();
    });
    direct /= Q::from_integer(BigInt::one() << r);

    let specs = admissible_specs(r, e);
    for s in counts.keys() {
        if !specs.contains(s) {
            return Err(AlgebraError::ValueMismatch {
                what: format!("pairing census (|R|={r}, |S|+|U|={e}) produced inadmissible sigma {s}"),
                left: "present".into(),
                right: "absent".into(),
            });
        }
    }
    let mut regrouped = Q::zero();
    for s in &specs {
        let got = Q::from_integer(BigInt::from(counts.get(s).copied().unwrap_or(0)));
        let lit = count_formula(r, e, s);
        let norm = count_normalized(r, e, s);
        if got != lit || lit != norm {
            return Err(AlgebraError::ValueMismatch {
                what: format!("pairing count for sigma {s} (|R|={r}, |S|+|U|={e}) census vs formula vs normalized"),
                left: got.to_string(),
                right: format!("{lit} / {norm}"),
            });
        }
        // Final-line weight: 2^{-p} |R|! e! / Π m! k! · Π ch^k (cy/2l)^m.
        let mut w = Q::new(factorial(r) * factorial(e), BigInt::one() << s.num_chains());
        for (l, k) in s.chain_counts() {
            w = w * chv[l as usize].clone().pow(k as i32) / Q::from_integer(factorial(k));
        }
        for (l, m) in s.cycle_counts() {
            let c = cyv[l as usize].clone() / q(2 * l as i64);
            w = w * c.pow(m as i32) / Q::from_integer(factorial(m));
        }
        regrouped += w;
    }
    if regrouped != direct {
        return Err(AlgebraError::ValueMismatch {
            what: format!("weighted pairing sum (|R|={r}, |S|+|U|={e})"),
            left: direct.to_string(),
            right: regrouped.to_string(),
        });
    }
    Ok(PairingReport { r, e, pairings: counts.values().sum(), specs: specs.len(), pass: true })
}
