//! Chain/cycle bookkeeping and the exact counting identities around it.

use std::fmt;

use num_bigint::BigInt;
use num_traits::Zero;
use serde::Serialize;

use super::{binomial, factorial, AlgebraError};

/// σ = (k_1, k_2, …; m_2, m_3, …): k_i chains of order i, m_j cycles of order j.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct ChainSpec {
    /// chains[i - 1] = k_i
    chains: Vec<u32>,
    /// cycles[j - 2] = m_j
    cycles: Vec<u32>,
}

impl ChainSpec {
    pub fn new(chains: Vec<u32>, cycles: Vec<u32>) -> Self {
        let mut s = ChainSpec { chains, cycles };
        s.trim();
        s
    }

    fn trim(&mut self) {
        while self.chains.last() == Some(&0) {
            self.chains.pop();
        }
        while self.cycles.last() == Some(&0) {
            self.cycles.pop();
        }
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn k(&self, i: u32) -> u32 {
        if i == 0 {
            return 0;
        }
        self.chains.get(i as usize - 1).copied().unwrap_or(0)
    }

    pub fn m(&self, j: u32) -> u32 {
        if j < 2 {
            return 0;
        }
        self.cycles.get(j as usize - 2).copied().unwrap_or(0)
    }

    /// Chain orders i with k_i > 0, paired with k_i.
    pub fn chain_counts(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.chains.iter().enumerate().filter(|(_, &k)| k > 0).map(|(i, &k)| (i as u32 + 1, k))
    }

    pub fn cycle_counts(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.cycles.iter().enumerate().filter(|(_, &m)| m > 0).map(|(j, &m)| (j as u32 + 2, m))
    }

    pub fn add_chain(&mut self, order: u32) {
        assert!(order >= 1);
        let i = order as usize - 1;
        if self.chains.len() <= i {
            self.chains.resize(i + 1, 0);
        }
        self.chains[i] += 1;
    }

    pub fn add_cycle(&mut self, order: u32) {
        assert!(order >= 2, "there are no cycles of order one");
        let j = order as usize - 2;
        if self.cycles.len() <= j {
            self.cycles.resize(j + 1, 0);
        }
        self.cycles[j] += 1;
    }

    /// |σ| = Σ i k_i + Σ j m_j
    pub fn size(&self) -> u32 {
        self.chain_counts().map(|(i, k)| i * k).sum::<u32>() + self.cycle_counts().map(|(j, m)| j * m).sum::<u32>()
    }

    /// |σ|₊ = Σ (i+1) k_i + Σ j m_j
    pub fn size_plus(&self) -> u32 {
        self.size() + self.num_chains()
    }

    /// p = Σ k_i
    pub fn num_chains(&self) -> u32 {
        self.chains.iter().sum()
    }

    pub fn has_cycles(&self) -> bool {
        !self.cycles.is_empty()
    }

    /// All σ with |σ|₊ ≤ max_plus (cycles only if requested).
    pub fn enumerate(max_plus: u32, with_cycles: bool) -> Vec<ChainSpec> {
        // Parts: (cost, is_cycle, order). Enumerate multiplicities part by part.
        let mut parts: Vec<(u32, bool, u32)> = (1..max_plus).map(|i| (i + 1, false, i)).collect();
        if with_cycles {
            parts.extend((2..=max_plus).map(|j| (j, true, j)));
        }
        let mut out = Vec::new();
        fn rec(parts: &[(u32, bool, u32)], budget: u32, cur: &mut ChainSpec, out: &mut Vec<ChainSpec>) {
            let Some((&(cost, cyc, order), rest)) = parts.split_first() else {
                let mut s = cur.clone();
                s.trim();
                out.push(s);
                return;
            };
            let mut used = 0;
            let saved = cur.clone();
            loop {
                rec(rest, budget - used, cur, out);
                if used + cost > budget {
                    break;
                }
                used += cost;
                if cyc {
                    cur.add_cycle(order);
                } else {
                    cur.add_chain(order);
                }
            }
            *cur = saved;
        }
        rec(&parts, max_plus, &mut ChainSpec::empty(), &mut out);
        out.sort();
        out
    }
}

impl fmt::Display for ChainSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ks: Vec<String> = self.chains.iter().map(|k| k.to_string()).collect();
        let ms: Vec<String> = self.cycles.iter().map(|m| m.to_string()).collect();
        write!(f, "({};{})", ks.join(","), ms.join(","))
    }
}

/// Sequences of `k` integers, each ≥ `min`, summing to `total`.
pub fn compositions(total: u32, k: u32, min: u32) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    fn rec(left: u32, k: u32, min: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if k == 0 {
            if left == 0 {
                out.push(cur.clone());
            }
            return;
        }
        let mut v = min;
        while v <= left && left - v >= min * (k - 1) {
            cur.push(v);
            rec(left - v, k - 1, min, cur, out);
            cur.pop();
            v += 1;
        }
    }
    rec(total, k, min, &mut Vec::new(), &mut out);
    out
}

/// Σ_s C(2p, s) Σ_v m!/(t! v! c!) 2^v with t = (k − s − v)/2 and
/// c = m − t − v, over integer-feasible (s, v).
pub fn multinomial_sum(k: u32, m: u32, p: u32) -> BigInt {
    let mut total = BigInt::zero();
    for s in 0..=(2 * p).min(k) {
        for v in 0..=(k - s) {
            if (k - s - v) % 2 != 0 {
                continue;
            }
            let t = (k - s - v) / 2;
            if t + v > m {
                continue;
            }
            let c = m - t - v;
            let multi = factorial(m) / (factorial(t) * factorial(v) * factorial(c));
            total += binomial(2 * p, s) * multi * (BigInt::from(1) << v);
        }
    }
    total
}

/// Both sides of the multinomial identity: (sum, C(2m + 2p, k)).
pub fn multinomial_identity(k: u32, m: u32, p: u32) -> (BigInt, BigInt) {
    (multinomial_sum(k, m, p), binomial(2 * m + 2 * p, k))
}

/// ρ(σ, k) by the sum over set sizes, with m = n − |σ|₊ and p = Σ k_i.
pub fn rho_sum(n: u32, sigma: &ChainSpec, k: u32) -> BigInt {
    let m = n - sigma.size_plus();
    multinomial_sum(k, m, sigma.num_chains())
}

/// ρ(σ, k) = C(2(n − |σ|), k).
pub fn rho_closed(n: u32, sigma: &ChainSpec, k: u32) -> BigInt {
    binomial(2 * (n - sigma.size()), k)
}

#[derive(Debug, Clone, Serialize)]
pub struct RhoReport {
    pub n_max: u32,
    pub cases: usize,
    pub pass: bool,
}

/// Exhaustive ρ check for every n ≤ n_max, σ with |σ|₊ ≤ n, and k ≤ 2n + 1.
pub fn rho_check(n_max: u32) -> Result<RhoReport, AlgebraError> {
    let mut cases = 0;
    for n in 0..=n_max {
        for sigma in ChainSpec::enumerate(n, true) {
            for k in 0..=2 * n + 1 {
                let (a, b) = (rho_sum(n, &sigma, k), rho_closed(n, &sigma, k));
                if a != b {
                    return Err(AlgebraError::ValueMismatch {
                        what: format!("rho(n={n}, sigma={sigma}, k={k})"),
                        left: a.to_string(),
                        right: b.to_string(),
                    });
                }
                cases += 1;
            }
        }
    }
    Ok(RhoReport { n_max, cases, pass: true })
}
