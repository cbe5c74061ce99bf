//! Exact expectations of polynomials in soup local times and field values.
//!
//! Soup moments come from the Poisson master formula: a product of local
//! times at k points is a sum over set partitions of the points, each block
//! contributing α times a permutation sum of Green's function chains.
//! Field moments come from Isserlis' pairing sum.

pub mod crosscheck;
pub mod decomposition;
pub mod iso;
pub mod partitions;

use std::collections::HashMap;
use std::sync::Mutex;

use serde::Serialize;
use thiserror::Error;

use crate::lattice::{GreenTable, LatticeError, Site};
use crate::poly::Poly;
use partitions::{for_each_permutation, perfect_matchings, set_partitions};

pub const MAX_SOUP_DEGREE: u32 = 8;
pub const MAX_GAUSS_DEGREE: u32 = 10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("{kind} degree {degree} exceeds the bound {bound}")]
    Degree { kind: &'static str, degree: u32, bound: u32 },
    #[error("{what}: exact mismatch at {index}: {lhs} vs {rhs}")]
    Mismatch { what: String, index: String, lhs: f64, rhs: f64 },
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Algebra(#[from] crate::algebra::AlgebraError),
    #[error(transparent)]
    Sim(#[from] crate::sim::SimError),
    #[error(transparent)]
    Field(#[from] crate::field::FieldError),
}

/// Observable variables: soup local time ℓ_x or field value g_x.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum ObsVar {
    Ell(Site),
    Gf(Site),
}

pub type PointObservable = Poly<ObsVar, f64>;

pub fn ell(x: Site) -> PointObservable {
    PointObservable::var(ObsVar::Ell(x))
}

pub fn gf(x: Site) -> PointObservable {
    PointObservable::var(ObsVar::Gf(x))
}

/// Moment engine over a fixed Green's table; memoizes block sums.
#[derive(Debug)]
pub struct MomentOracle {
    pub table: GreenTable,
    quasi: Mutex<HashMap<Vec<Site>, f64>>,
    gauss: Mutex<HashMap<Vec<Site>, f64>>,
}

impl MomentOracle {
    pub fn new(table: GreenTable) -> Self {
        Self { table, quasi: Mutex::new(HashMap::new()), gauss: Mutex::new(HashMap::new()) }
    }

    pub fn u(&self, x: Site, y: Site) -> Result<f64, OracleError> {
        Ok(self.table.get(x - y)?)
    }

    /// Σ over orderings of the points of Π u between consecutive points.
    pub fn quasi_moment(&self, points: &[Site]) -> Result<f64, OracleError> {
        if points.len() as u32 > MAX_SOUP_DEGREE {
            return Err(OracleError::Degree { kind: "soup", degree: points.len() as u32, bound: MAX_SOUP_DEGREE });
        }
        let mut key = points.to_vec();
        key.sort();
        if let Some(v) = self.quasi.lock().unwrap().get(&key) {
            return Ok(*v);
        }
        for a in &key {
            for b in &key {
                self.u(*a, *b)?;
            }
        }
        let mut total = 0.0;
        for_each_permutation(&key, |p| {
            total += p.windows(2).map(|w| self.table.u(w[0] - w[1])).product::<f64>();
        });
        self.quasi.lock().unwrap().insert(key, total);
        Ok(total)
    }

    /// Coefficients c_j with E[Π ℓ] = Σ_j c_j α^j.
    pub fn soup_moment_coeffs(&self, points: &[Site]) -> Result<Vec<f64>, OracleError> {
        let k = points.len();
        let mut c = vec![0.0; k + 1];
        for blocks in set_partitions(k) {
            let mut t = 1.0;
            for b in &blocks {
                let pts: Vec<Site> = b.iter().map(|&i| points[i]).collect();
                t *= self.quasi_moment(&pts)?;
            }
            c[blocks.len()] += t;
        }
        Ok(c)
    }

    pub fn soup_moment(&self, points: &[Site], alpha: f64) -> Result<f64, OracleError> {
        let c = self.soup_moment_coeffs(points)?;
        Ok(c.iter().enumerate().map(|(j, cj)| cj * alpha.powi(j as i32)).sum())
    }

    /// E[Π g] by the pairing sum.
    pub fn gaussian_moment(&self, points: &[Site]) -> Result<f64, OracleError> {
        let n = points.len();
        if n as u32 > MAX_GAUSS_DEGREE {
            return Err(OracleError::Degree { kind: "gaussian", degree: n as u32, bound: MAX_GAUSS_DEGREE });
        }
        if n % 2 == 1 {
            return Ok(0.0);
        }
        let mut key = points.to_vec();
        key.sort();
        if let Some(v) = self.gauss.lock().unwrap().get(&key) {
            return Ok(*v);
        }
        let mut total = 0.0;
        for m in perfect_matchings(n) {
            let mut t = 1.0;
            for (a, b) in m {
                t *= self.u(key[a], key[b])?;
            }
            total += t;
        }
        self.gauss.lock().unwrap().insert(key, total);
        Ok(total)
    }

    /// E of a polynomial observable, soup at intensity `alpha` independent of the field.
    pub fn expectation(&self, obs: &PointObservable, alpha: f64) -> Result<f64, OracleError> {
        let mut total = 0.0;
        for (m, c) in obs.terms() {
            let mut ells = Vec::new();
            let mut gs = Vec::new();
            for (v, e) in m.factors() {
                for _ in 0..*e {
                    match v {
                        ObsVar::Ell(x) => ells.push(*x),
                        ObsVar::Gf(x) => gs.push(*x),
                    }
                }
            }
            let g = self.gaussian_moment(&gs)?;
            if g == 0.0 {
                continue;
            }
            total += c * g * self.soup_moment(&ells, alpha)?;
        }
        Ok(total)
    }
}

/// Evaluate an observable on concrete local times and field values.
pub fn evaluate(obs: &PointObservable, ell_at: impl Fn(Site) -> f64, g_at: impl Fn(Site) -> f64) -> f64 {
    obs.eval(|v| match v {
        ObsVar::Ell(x) => ell_at(*x),
        ObsVar::Gf(x) => g_at(*x),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::WalkSpec;

    fn oracle_1d() -> (MomentOracle, f64) {
        let spec = WalkSpec::nearest_neighbor(1, 1.0).unwrap();
        let table = GreenTable::compute(&spec, 3, 1e-12).unwrap();
        let u0 = table.u0;
        (MomentOracle::new(table), u0)
    }

    #[test]
    fn quasi_moments() {
        let (o, u0) = oracle_1d();
        let x = Site::ORIGIN;
        assert_eq!(o.quasi_moment(&[x]).unwrap(), 1.0);
        assert!((o.quasi_moment(&[x, x]).unwrap() - 2.0 * u0).abs() < 1e-15);
        assert!((o.quasi_moment(&[x, x, x]).unwrap() - 6.0 * u0 * u0).abs() < 1e-14);
    }

    #[test]
    fn soup_moments() {
        let (o, u0) = oracle_1d();
        let x = Site::ORIGIN;
        let a = 1.7;
        assert!((o.soup_moment(&[x], a).unwrap() - a).abs() < 1e-15);
        assert!((o.soup_moment(&[x, x], a).unwrap() - (a * a + 2.0 * a * u0)).abs() < 1e-14);
        let want = a.powi(3) + 6.0 * a * a * u0 + 6.0 * a * u0 * u0;
        assert!((o.soup_moment(&[x, x, x], a).unwrap() - want).abs() < 1e-13);
        let y = Site::new(&[2]);
        let uxy = o.table.u(y);
        assert!((o.soup_moment(&[x, y], a).unwrap() - (a * a + 2.0 * a * uxy)).abs() < 1e-14);
    }

    #[test]
    fn alpha_grading_matches_block_counts() {
        let (o, _) = oracle_1d();
        let pts = [Site::ORIGIN, Site::new(&[1]), Site::ORIGIN, Site::new(&[-1]), Site::new(&[1])];
        let c = o.soup_moment_coeffs(&pts).unwrap();
        assert_eq!(c[0], 0.0);
        // All singletons: product of five 1's.
        assert_eq!(c[5], 1.0);
        let a: f64 = 0.6;
        let direct = o.soup_moment(&pts, a).unwrap();
        let rebuilt: f64 = c.iter().enumerate().map(|(j, cj)| cj * a.powi(j as i32)).sum();
        assert!((direct - rebuilt).abs() < 1e-14);
    }

    #[test]
    fn gaussian_moments() {
        let (o, u0) = oracle_1d();
        let x = Site::ORIGIN;
        let y = Site::new(&[1]);
        let uxy = o.table.u(y);
        assert!((o.gaussian_moment(&[x, x]).unwrap() - u0).abs() < 1e-15);
        assert!((o.gaussian_moment(&[x, x, x, x]).unwrap() - 3.0 * u0 * u0).abs() < 1e-14);
        let want = u0 * u0 + 2.0 * uxy * uxy;
        assert!((o.gaussian_moment(&[x, x, y, y]).unwrap() - want).abs() < 1e-14);
        assert_eq!(o.gaussian_moment(&[x, y, y]).unwrap(), 0.0);
    }

    #[test]
    fn expectation_examples() {
        let (o, u0) = oracle_1d();
        let x = Site::ORIGIN;
        let a: f64 = 0.8;
        assert_eq!(o.expectation(&PointObservable::one(), a * a).unwrap(), 1.0);
        let obs = &gf(x).pow(2).scale(&0.5) + &ell(x);
        assert!((o.expectation(&obs, a * a).unwrap() - (0.5 * u0 + a * a)).abs() < 1e-14);
        let want = 0.75 * u0 * u0 + 3.0 * a * a * u0 + a.powi(4);
        assert!((o.expectation(&obs.pow(2), a * a).unwrap() - want).abs() < 1e-13);
    }

    #[test]
    fn degree_bound() {
        let (o, _) = oracle_1d();
        let pts = vec![Site::ORIGIN; 9];
        assert!(matches!(o.soup_moment(&pts, 1.0), Err(OracleError::Degree { .. })));
    }
}
