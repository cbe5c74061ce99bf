//! Both sides of the generalized isomorphism at lattice points, and their
//! moment comparison.
//!
//! LHS_n(x) = Σ_j C(n,j) :G_x^{2j}:/2^j · L_{n−j}(x), soup at intensity α²,
//! with L_m = B_m(ℓ_x) under ch_j = u(0)^j.
//! RHS_n(x) = J_n(x) = Σ_j C(2n,j) α^{2n−j} :G_x^j:/2^{j/2}, field only.

use serde::Serialize;

use super::{evaluate, ell, gf, MomentOracle, ObsVar, OracleError, PointObservable};
use crate::algebra::rilt::toy_rilt_coefficients;
use crate::field::{wick_coefficients, CovarianceFactor};
use crate::lattice::Site;
use crate::rng;
use crate::sim::{local_time_field, SoupSampler};
use crate::stats::{parallel_estimates, rel_err};

pub const EXACT_REL_TOL: f64 = 1e-9;
pub const MC_Z_BOUND: f64 = 4.0;

fn binom(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// :G_x^m: as a polynomial in g_x.
pub fn wick_observable(x: Site, m: u32, u0: f64) -> PointObservable {
    let mut p = PointObservable::zero();
    for (j, c) in wick_coefficients(m).into_iter().enumerate() {
        let mono = gf(x).pow(m - 2 * j as u32);
        p = &p + &mono.scale(&(c as f64 * u0.powi(j as i32)));
    }
    p
}

/// B_m(ℓ_x) with ch_j = u0^j.
pub fn rilt_observable(x: Site, m: u32, u0: f64) -> Result<PointObservable, OracleError> {
    let coeffs = toy_rilt_coefficients(m as usize, u0)?;
    let mut p = PointObservable::zero();
    for (i, c) in coeffs[m as usize].iter().enumerate() {
        if *c != 0.0 {
            p = &p + &ell(x).pow(i as u32).scale(c);
        }
    }
    Ok(p)
}

pub fn build_lhs(n: u32, x: Site, u0: f64) -> Result<PointObservable, OracleError> {
    let mut p = PointObservable::zero();
    for j in 0..=n {
        let w = wick_observable(x, 2 * j, u0).scale(&(binom(n, j) / 2f64.powi(j as i32)));
        p = &p + &(&w * &rilt_observable(x, n - j, u0)?);
    }
    Ok(p)
}

pub fn build_rhs(n: u32, x: Site, alpha: f64, u0: f64) -> PointObservable {
    let mut p = PointObservable::zero();
    for j in 0..=2 * n {
        let c = binom(2 * n, j) * alpha.powi((2 * n - j) as i32) / 2f64.powf(j as f64 / 2.0);
        p = &p + &wick_observable(x, j, u0).scale(&c);
    }
    p
}

/// The unrenormalized n = 1 pair ½g² + ℓ and ½(g + √2α)².
pub fn plain_pair(x: Site, alpha: f64) -> (PointObservable, PointObservable) {
    let lhs = &gf(x).pow(2).scale(&0.5) + &ell(x);
    let shifted = &gf(x) + &PointObservable::constant(2f64.sqrt() * alpha);
    (lhs, shifted.pow(2).scale(&0.5))
}

/// All a ∈ ℕ^count with 1 ≤ |a| ≤ max_order, in graded lexicographic order.
pub fn multi_indices(count: usize, max_order: u32) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    for total in 1..=max_order {
        let mut cur = vec![0u32; count];
        fn rec(i: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
            if i + 1 == cur.len() {
                cur[i] = left;
                out.push(cur.clone());
                return;
            }
            for a in (0..=left).rev() {
                cur[i] = a;
                rec(i + 1, left - a, cur, out);
            }
        }
        if count > 0 {
            rec(0, total, &mut cur, &mut out);
        }
    }
    out
}

fn product(per_site: &[PointObservable], index: &[u32]) -> PointObservable {
    let mut p = PointObservable::one();
    for (obs, &a) in per_site.iter().zip(index) {
        if a > 0 {
            p = &p * &obs.pow(a);
        }
    }
    p
}

#[derive(Debug, Clone, Serialize)]
pub struct IsoCase {
    pub form: &'static str,
    pub index: Vec<u32>,
    pub exact_lhs: f64,
    pub exact_rhs: f64,
    pub rel_err: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct IsoReport {
    pub identity: &'static str,
    pub n: u32,
    pub alpha: f64,
    pub sites: Vec<Vec<i64>>,
    pub max_order: u32,
    pub u0: f64,
    pub tolerance: f64,
    pub cases: Vec<IsoCase>,
    pub max_rel_err: f64,
    pub pass: bool,
}

/// Exact comparison of E[Π LHS_n(x_i)^{a_i}] and E[Π RHS_n(x_i)^{a_i}] for
/// every multi-index of order ≤ `max_order`. For n = 1 the plain pair is
/// compared as well. The first mismatch is returned as an error.
pub fn iso_verify_exact(
    oracle: &MomentOracle,
    n: u32,
    sites: &[Site],
    alpha: f64,
    max_order: u32,
) -> Result<IsoReport, OracleError> {
    let u0 = oracle.table.u0;
    let d = oracle.table.spec.d;
    let lhs: Vec<_> = sites.iter().map(|&x| build_lhs(n, x, u0)).collect::<Result<_, _>>()?;
    let rhs: Vec<_> = sites.iter().map(|&x| build_rhs(n, x, alpha, u0)).collect();
    let mut forms = vec![("wick", lhs, rhs)];
    if n == 1 {
        let (pl, pr): (Vec<_>, Vec<_>) = sites.iter().map(|&x| plain_pair(x, alpha)).unzip();
        forms.push(("plain", pl, pr));
    }
    let mut cases = Vec::new();
    for (form, lhs, rhs) in &forms {
        for index in multi_indices(sites.len(), max_order) {
            let order: u32 = index.iter().sum();
            let a = oracle.expectation(&product(lhs, &index), alpha * alpha)?;
            let b = oracle.expectation(&product(rhs, &index), alpha * alpha)?;
            let floor = (u0 + alpha * alpha).powi((n * order) as i32);
            let err = rel_err(a, b, floor);
            let pass = err <= EXACT_REL_TOL;
            if !pass {
                return Err(OracleError::Mismatch {
                    what: format!("isomorphism n={n} ({form} form)"),
                    index: format!("{index:?}"),
                    lhs: a,
                    rhs: b,
                });
            }
            cases.push(IsoCase { form, index, exact_lhs: a, exact_rhs: b, rel_err: err, pass });
        }
    }
    let max_rel_err = cases.iter().map(|c| c.rel_err).fold(0.0, f64::max);
    Ok(IsoReport {
        identity: "iso",
        n,
        alpha,
        sites: sites.iter().map(|x| x.coords(d).to_vec()).collect(),
        max_order,
        u0,
        tolerance: EXACT_REL_TOL,
        cases,
        max_rel_err,
        pass: true,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct McCase {
    pub index: Vec<u32>,
    /// Exact common value when available within the degree bounds.
    pub exact: Option<f64>,
    pub mc_lhs: f64,
    pub se_lhs: f64,
    pub mc_rhs: f64,
    pub se_rhs: f64,
    pub z_lhs: f64,
    pub z_rhs: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct IsoMcReport {
    pub identity: &'static str,
    pub n: u32,
    pub alpha: f64,
    pub samples: u64,
    pub seed: u64,
    pub z_bound: f64,
    pub cases: Vec<McCase>,
    pub max_abs_z: f64,
    pub pass: bool,
}

/// Monte Carlo version over joint (soup at α², field) samples. Soup `i` and
/// field `i` come from disjoint streams of the same `(seed, i)` key. When the
/// exact value is out of reach each side is compared with the other.
pub fn iso_verify_mc(
    sampler: &SoupSampler,
    n: u32,
    alpha: f64,
    max_order: u32,
    samples: u64,
    seed: u64,
) -> Result<IsoMcReport, OracleError> {
    let sites = sampler.k().to_vec();
    let u0 = sampler.u0();
    let factor = CovarianceFactor::new(&sampler.table, &sites)?;
    let lhs: Vec<_> = sites.iter().map(|&x| build_lhs(n, x, u0)).collect::<Result<_, _>>()?;
    let rhs: Vec<_> = sites.iter().map(|&x| build_rhs(n, x, alpha, u0)).collect();
    let indices = multi_indices(sites.len(), max_order);

    let est = parallel_estimates(samples, |i| -> Result<Vec<f64>, OracleError> {
        let soup = sampler.sample(alpha * alpha, seed, i)?;
        let ltf = local_time_field(&soup, &sites);
        let field = factor.sample(&mut rng::field_stream(seed, i));
        let at = |v: &[f64], x: Site| v[sites.iter().position(|s| *s == x).expect("site in window")];
        let val = |o: &PointObservable| evaluate(o, |x| at(&ltf.values, x), |x| at(&field.values, x));
        let l: Vec<f64> = lhs.iter().map(val).collect();
        let r: Vec<f64> = rhs.iter().map(val).collect();
        let mut out = Vec::with_capacity(2 * indices.len());
        for idx in &indices {
            let prod = |v: &[f64]| v.iter().zip(idx).map(|(x, &a)| x.powi(a as i32)).product::<f64>();
            out.push(prod(&l));
            out.push(prod(&r));
        }
        Ok(out)
    })?;

    let oracle = MomentOracle::new(sampler.table.clone());
    let mut cases = Vec::new();
    for (k, index) in indices.into_iter().enumerate() {
        let (el, er) = (&est[2 * k], &est[2 * k + 1]);
        let exact = oracle.expectation(&product(&rhs, &index), 0.0).ok();
        let (z_lhs, z_rhs) = match exact {
            Some(t) => (el.z(t), er.z(t)),
            None => {
                let z = (el.mean - er.mean) / (el.se.powi(2) + er.se.powi(2)).sqrt();
                (z, -z)
            }
        };
        let pass = z_lhs.abs() < MC_Z_BOUND && z_rhs.abs() < MC_Z_BOUND;
        cases.push(McCase {
            index,
            exact,
            mc_lhs: el.mean,
            se_lhs: el.se,
            mc_rhs: er.mean,
            se_rhs: er.se,
            z_lhs,
            z_rhs,
            pass,
        });
    }
    let max_abs_z = cases.iter().map(|c| c.z_lhs.abs().max(c.z_rhs.abs())).fold(0.0, f64::max);
    let pass = cases.iter().all(|c| c.pass);
    Ok(IsoMcReport { identity: "iso", n, alpha, samples, seed, z_bound: MC_Z_BOUND, cases, max_abs_z, pass })
}

/// True if the observable involves no soup variables.
pub fn is_field_only(obs: &PointObservable) -> bool {
    obs.terms().all(|(m, _)| m.factors().iter().all(|(v, _)| matches!(v, ObsVar::Gf(_))))
}
