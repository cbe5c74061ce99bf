//! Centered Gaussian field with covariance u(x − y) on a finite window, and
//! Wick powers of a single Gaussian variable.

use nalgebra::{Cholesky, DMatrix, DVector};
use rand::distr::Distribution;
use rand_distr::StandardNormal;
use serde::Serialize;
use thiserror::Error;

use crate::lattice::{GreenTable, LatticeError, Site};
use crate::rng::Rng;
use crate::stats::rel_err;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FieldError {
    #[error("covariance not positive definite even with jitter {0}")]
    NotPositiveDefinite(f64),
    #[error("window must be nonempty")]
    EmptyWindow,
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

#[derive(Debug, Clone)]
pub struct CovarianceFactor {
    pub sites: Vec<Site>,
    pub covariance: DMatrix<f64>,
    pub lower: DMatrix<f64>,
    pub jitter: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FieldSample {
    pub sites: Vec<Site>,
    pub values: Vec<f64>,
}

impl FieldSample {
    pub fn to_csv(&self, d: usize) -> String {
        let mut out: String = (0..d).map(|i| format!("x{i},")).collect();
        out.push_str("g\n");
        for (x, v) in self.sites.iter().zip(&self.values) {
            for c in x.coords(d) {
                out.push_str(&format!("{c},"));
            }
            out.push_str(&format!("{v:.17e}\n"));
        }
        out
    }
}

impl CovarianceFactor {
    /// Cholesky factor of [u(x_i − x_j)], adding diagonal jitter by decades
    /// (starting at 1e-16·u0) only when the plain factorization fails.
    pub fn new(table: &GreenTable, window: &[Site]) -> Result<Self, FieldError> {
        if window.is_empty() {
            return Err(FieldError::EmptyWindow);
        }
        let n = window.len();
        let mut cov = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                cov[(i, j)] = table.get(window[i] - window[j])?;
            }
        }
        let cap = 1e-8 * table.u0;
        let mut jitter = 0.0;
        loop {
            let mut m = cov.clone();
            for i in 0..n {
                m[(i, i)] += jitter;
            }
            if let Some(ch) = Cholesky::new(m) {
                return Ok(Self { sites: window.to_vec(), covariance: cov, lower: ch.l(), jitter });
            }
            jitter = if jitter == 0.0 { 1e-16 * table.u0 } else { jitter * 10.0 };
            if jitter > cap * (1.0 + 1e-12) {
                return Err(FieldError::NotPositiveDefinite(cap));
            }
        }
    }

    /// max |L Lᵀ − (C + jitter I)|.
    pub fn reconstruction_residual(&self) -> f64 {
        let n = self.sites.len();
        let mut target = self.covariance.clone();
        for i in 0..n {
            target[(i, i)] += self.jitter;
        }
        (&self.lower * self.lower.transpose() - target).amax()
    }

    pub fn sample(&self, rng: &mut Rng) -> FieldSample {
        let n = self.sites.len();
        let z = DVector::from_iterator(n, (0..n).map(|_| StandardNormal.sample(rng)));
        let g = &self.lower * z;
        FieldSample { sites: self.sites.clone(), values: g.iter().copied().collect() }
    }
}

fn factorial(n: u64) -> u128 {
    (1..=n as u128).product()
}

fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k as u128).fold(1u128, |acc, i| acc * (n as u128 - i) / (i + 1))
}

/// Integer coefficients c_j of :G^n: = Σ_j c_j u^j g^{n−2j}:
/// c_j = (−1)^j C(n, 2j) (2j)! / (j! 2^j).
pub fn wick_coefficients(n: u32) -> Vec<i128> {
    let n = n as u64;
    (0..=n / 2)
        .map(|j| {
            let mag = binomial(n, 2 * j) * factorial(2 * j) / (factorial(j) << j);
            let mag = mag as i128;
            if j % 2 == 0 {
                mag
            } else {
                -mag
            }
        })
        .collect()
}

/// :G^n: evaluated at G = g with E G² = u0.
pub fn wick_power(g: f64, n: u32, u0: f64) -> f64 {
    wick_coefficients(n)
        .iter()
        .enumerate()
        .map(|(j, &c)| c as f64 * u0.powi(j as i32) * g.powi(n as i32 - 2 * j as i32))
        .sum()
}

/// Physicists' Hermite polynomial by the three-term recurrence.
pub fn hermite(n: u32, x: f64) -> f64 {
    let (mut a, mut b) = (1.0, 2.0 * x);
    if n == 0 {
        return a;
    }
    for k in 1..n {
        let next = 2.0 * x * b - 2.0 * k as f64 * a;
        a = b;
        b = next;
    }
    b
}

/// Generalized Laguerre polynomial L_n^{(a)}(x) by the three-term recurrence.
pub fn laguerre(n: u32, a: f64, x: f64) -> f64 {
    let (mut p0, mut p1) = (1.0, 1.0 + a - x);
    if n == 0 {
        return p0;
    }
    for k in 1..n {
        let k = k as f64;
        let next = ((2.0 * k + 1.0 + a - x) * p1 - (k + a) * p0) / (k + 1.0);
        p0 = p1;
        p1 = next;
    }
    p1
}

/// :G^n: via (u0/2)^{n/2} H_n(g/√(2u0)).
pub fn wick_via_hermite(g: f64, n: u32, u0: f64) -> f64 {
    (u0 / 2.0).powf(n as f64 / 2.0) * hermite(n, g / (2.0 * u0).sqrt())
}

/// :G^{2n}:/2^n via (−u0)^n n! L_n^{(−1/2)}(g²/(2u0)).
pub fn half_even_wick_via_laguerre(g: f64, n: u32, u0: f64) -> f64 {
    (-u0).powi(n as i32) * factorial(n as u64) as f64 * laguerre(n, -0.5, g * g / (2.0 * u0))
}

#[derive(Debug, Clone, Serialize)]
pub struct WickCheckReport {
    pub identity: String,
    pub n_max: u32,
    pub u0: f64,
    pub max_rel_err: f64,
    pub worst_n: u32,
    pub worst_g: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl WickCheckReport {
    fn new(identity: &str, n_max: u32, u0: f64, tolerance: f64) -> Self {
        Self {
            identity: identity.into(),
            n_max,
            u0,
            max_rel_err: 0.0,
            worst_n: 0,
            worst_g: 0.0,
            tolerance,
            pass: true,
        }
    }

    fn record(&mut self, n: u32, g: f64, err: f64) {
        if err > self.max_rel_err || err.is_nan() {
            self.max_rel_err = err;
            self.worst_n = n;
            self.worst_g = g;
        }
        self.pass = self.max_rel_err <= self.tolerance;
    }
}

/// Compare the explicit sum against the Hermite and Laguerre routes.
/// Errors are relative to max(|a|, |b|, u0^{n/2}).
pub fn hermite_check(n_max: u32, u0: f64, g_grid: &[f64], tolerance: f64) -> (WickCheckReport, WickCheckReport) {
    let mut herm = WickCheckReport::new("hermite", n_max, u0, tolerance);
    let mut lag = WickCheckReport::new("laguerre", n_max, u0, tolerance);
    for n in 0..=n_max {
        let floor = u0.powf(n as f64 / 2.0);
        for &g in g_grid {
            let direct = wick_power(g, n, u0);
            herm.record(n, g, rel_err(direct, wick_via_hermite(g, n, u0), floor));
            if n % 2 == 0 {
                let half = direct / 2f64.powi(n as i32 / 2);
                let lg = half_even_wick_via_laguerre(g, n / 2, u0);
                lag.record(n, g, rel_err(half, lg, floor / 2f64.powi(n as i32 / 2)));
            }
        }
    }
    (herm, lag)
}

/// P_n with :G^{2n}: = P_n(G²), as coefficients of y^{n−j}.
pub fn p_coefficients(n: u32) -> Vec<i128> {
    wick_coefficients(2 * n)
}

pub fn eval_p(n: u32, y: f64, u0: f64) -> f64 {
    p_coefficients(n)
        .iter()
        .enumerate()
        .map(|(j, &c)| c as f64 * u0.powi(j as i32) * y.powi(n as i32 - j as i32))
        .sum()
}

/// :(G+c)^m: from the binomial Wick expansion Σ_k C(m,k) c^{m−k} :G^k:.
pub fn shifted_wick(g: f64, c: f64, m: u32, u0: f64) -> f64 {
    (0..=m)
        .map(|k| binomial(m as u64, k as u64) as f64 * c.powi((m - k) as i32) * wick_power(g, k, u0))
        .sum()
}

/// Check :(G+c)^{2n}: = P_n((G+c)²) pointwise.
pub fn shifted_wick_check(n_max: u32, u0: f64, c: f64, g_grid: &[f64], tolerance: f64) -> WickCheckReport {
    let mut rep = WickCheckReport::new(&format!("shifted_wick(c={c})"), n_max, u0, tolerance);
    for n in 0..=n_max {
        for &g in g_grid {
            let a = shifted_wick(g, c, 2 * n, u0);
            let b = eval_p(n, (g + c) * (g + c), u0);
            let floor = u0.powi(n as i32).max((c * c).powi(n as i32));
            rep.record(n, g, rel_err(a, b, floor));
        }
    }
    rep
}

/// Σ_{n≤N} s^n :G^n:/n!, to compare against exp(sg − s²u0/2).
pub fn wick_series(s: f64, g: f64, u0: f64, order: u32) -> f64 {
    (0..=order)
        .map(|n| s.powi(n as i32) * wick_power(g, n, u0) / factorial(n as u64) as f64)
        .sum()
}

/// Points {−3,…,3}·√u0 refined to the given number of steps per unit.
pub fn default_grid(u0: f64, per_unit: usize) -> Vec<f64> {
    let steps = 6 * per_unit;
    (0..=steps)
        .map(|i| (-3.0 + i as f64 / per_unit as f64) * u0.sqrt())
        .collect()
}
