//! Pathwise decomposition of L_n over the trajectories of a soup.
//!
//! L_n(x) = B_n(Σ_ω ℓ_ω(x)) equals the sum over set partitions D_1 ∪ … ∪ D_l
//! of [1,n] of Σ over ordered tuples of distinct trajectories of
//! Π_j B_{|D_j|}(ℓ_{ω_j}(x)).

use serde::Serialize;

use super::partitions::set_partitions;
use super::OracleError;
use crate::algebra::rilt::toy_rilt_coefficients;
use crate::lattice::Site;
use crate::sim::{trajectory_local_times, Soup, SoupSampler};

pub const DECOMPOSITION_REL_TOL: f64 = 1e-9;
pub const MAX_DECOMPOSITION_ORDER: u32 = 4;

fn eval_b(coeffs: &[Vec<f64>], m: usize, l: f64) -> f64 {
    coeffs[m].iter().rev().fold(0.0, |acc, c| acc * l + c)
}

/// Σ over ordered tuples of distinct indices of Π_j f_j(index_j).
fn distinct_tuple_sum(values: &[Vec<f64>]) -> f64 {
    fn rec(values: &[Vec<f64>], used: &mut Vec<bool>) -> f64 {
        let Some((first, rest)) = values.split_first() else {
            return 1.0;
        };
        let mut total = 0.0;
        for i in 0..used.len() {
            if used[i] || first[i] == 0.0 {
                continue;
            }
            used[i] = true;
            total += first[i] * rec(rest, used);
            used[i] = false;
        }
        total
    }
    let width = values.first().map_or(0, Vec::len);
    rec(values, &mut vec![false; width])
}

#[derive(Debug, Clone, Serialize)]
pub struct DecompositionCase {
    pub n: u32,
    pub direct: f64,
    pub decomposed: f64,
    pub rel_err: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DecompositionReport {
    pub seed_master: u64,
    pub seed_index: u64,
    pub site: Vec<i64>,
    pub trajectories_at_site: usize,
    pub cases: Vec<DecompositionCase>,
    pub pass: bool,
}

/// Check the identity for n = 1..=n_max on one soup. Errors name the soup seed.
pub fn decomposition_check(soup: &Soup, n_max: u32, site: Site, u0: f64, d: usize) -> Result<DecompositionReport, OracleError> {
    if n_max > MAX_DECOMPOSITION_ORDER {
        return Err(OracleError::Degree { kind: "decomposition", degree: n_max, bound: MAX_DECOMPOSITION_ORDER });
    }
    let coeffs = toy_rilt_coefficients(n_max as usize, u0)?;
    // Trajectories missing the site contribute B_m(0) = 0 for m ≥ 1.
    let ells: Vec<f64> = trajectory_local_times(soup, &[site]).into_iter().map(|v| v[0]).filter(|&l| l > 0.0).collect();
    let total: f64 = ells.iter().sum();
    let mut cases = Vec::new();
    for n in 1..=n_max {
        let direct = eval_b(&coeffs, n as usize, total);
        let mut decomposed = 0.0;
        for blocks in set_partitions(n as usize) {
            let per_block: Vec<Vec<f64>> =
                blocks.iter().map(|b| ells.iter().map(|&l| eval_b(&coeffs, b.len(), l)).collect()).collect();
            decomposed += distinct_tuple_sum(&per_block);
        }
        let scale = (total + n as f64 * u0).powi(n as i32);
        let rel_err = (direct - decomposed).abs() / scale.max(f64::MIN_POSITIVE);
        if rel_err > DECOMPOSITION_REL_TOL {
            return Err(OracleError::Mismatch {
                what: format!("decomposition L_{n} (soup seed {}/{})", soup.seed.master, soup.seed.index),
                index: format!("{:?}", site.coords(d)),
                lhs: direct,
                rhs: decomposed,
            });
        }
        cases.push(DecompositionCase { n, direct, decomposed, rel_err });
    }
    Ok(DecompositionReport {
        seed_master: soup.seed.master,
        seed_index: soup.seed.index,
        site: site.coords(d).to_vec(),
        trajectories_at_site: ells.len(),
        cases,
        pass: true,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct DecompositionBatch {
    pub soups: u64,
    pub n_max: u32,
    pub max_rel_err: f64,
    pub max_trajectories_at_site: usize,
    pub pass: bool,
}

/// Run the check on soups 0..soups of the run seeded by `master`.
pub fn decomposition_batch(
    sampler: &SoupSampler,
    alpha: f64,
    site: Site,
    n_max: u32,
    soups: u64,
    master: u64,
) -> Result<DecompositionBatch, OracleError> {
    let d = sampler.table.spec.d;
    let mut max_rel_err: f64 = 0.0;
    let mut max_traj = 0;
    for i in 0..soups {
        let soup = sampler.sample(alpha, master, i)?;
        let r = decomposition_check(&soup, n_max, site, sampler.u0(), d)?;
        max_traj = max_traj.max(r.trajectories_at_site);
        max_rel_err = r.cases.iter().map(|c| c.rel_err).fold(max_rel_err, f64::max);
    }
    Ok(DecompositionBatch { soups, n_max, max_rel_err, max_trajectories_at_site: max_traj, pass: true })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::Trajectory;

    fn soup_with(ls: &[f64]) -> Soup {
        let x = Site::ORIGIN;
        let mut s = Soup::empty(1.0, vec![x]);
        for &l in ls {
            s.trajectories.push(Trajectory { entrance: x, forward: vec![(x, l)], backward: vec![] });
        }
        s.count = ls.len();
        s
    }

    #[test]
    fn empty_soup() {
        let r = decomposition_check(&soup_with(&[]), 4, Site::ORIGIN, 0.5, 1).unwrap();
        assert!(r.cases.iter().all(|c| c.direct == 0.0 && c.decomposed == 0.0));
    }

    #[test]
    fn single_trajectory() {
        let r = decomposition_check(&soup_with(&[1.3]), 4, Site::ORIGIN, 0.5, 1).unwrap();
        assert!(r.pass);
    }

    #[test]
    fn two_trajectories_n2_by_hand() {
        let (a, b, u) = (0.7, 1.9, 0.4);
        let r = decomposition_check(&soup_with(&[a, b]), 2, Site::ORIGIN, u, 1).unwrap();
        let want = (a * a - 2.0 * u * a) + (b * b - 2.0 * u * b) + 2.0 * a * b;
        assert!((r.cases[1].decomposed - want).abs() < 1e-14);
        assert!((r.cases[1].direct - want).abs() < 1e-14);
    }

    #[test]
    fn many_trajectories() {
        let r = decomposition_check(&soup_with(&[0.1, 2.0, 0.5, 1.1, 3.2, 0.05]), 4, Site::ORIGIN, 0.9, 1).unwrap();
        assert!(r.pass);
    }

    #[test]
    fn order_bound() {
        assert!(decomposition_check(&soup_with(&[1.0]), 5, Site::ORIGIN, 0.5, 1).is_err());
    }
}
