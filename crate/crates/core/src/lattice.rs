//! Killed symmetric continuous-time random walk on Z^d and its potential theory.
//!
//! The walk jumps at total rate 1 according to a symmetric kernel `p` and is
//! killed at rate `kappa`. Its potential density is
//!
//! ```text
//! u(x) = (2π)^{-d} ∫_{[-π,π]^d} cos(x·θ) / (κ + ψ(θ)) dθ,   ψ(θ) = Σ_e p(e) (1 − cos e·θ).
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Neg, Sub};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const MAX_DIM: usize = 3;

/// A lattice point in Z^d, d ≤ 3. Unused trailing coordinates are zero.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
pub struct Site(pub [i64; MAX_DIM]);

impl Site {
    pub const ORIGIN: Site = Site([0; MAX_DIM]);

    pub fn new(coords: &[i64]) -> Self {
        assert!(coords.len() <= MAX_DIM, "at most {MAX_DIM} coordinates");
        let mut c = [0; MAX_DIM];
        c[..coords.len()].copy_from_slice(coords);
        Site(c)
    }

    pub fn unit(d: usize, axis: usize, sign: i64) -> Self {
        assert!(axis < d && d <= MAX_DIM);
        let mut c = [0; MAX_DIM];
        c[axis] = sign;
        Site(c)
    }

    pub fn coords(&self, d: usize) -> &[i64] {
        &self.0[..d]
    }

    pub fn dot(&self, theta: &[f64]) -> f64 {
        self.0.iter().zip(theta).map(|(&a, &t)| a as f64 * t).sum()
    }

    pub fn linf(&self) -> i64 {
        self.0.iter().map(|c| c.abs()).max().unwrap_or(0)
    }

    pub fn l1(&self) -> i64 {
        self.0.iter().map(|c| c.abs()).sum()
    }
}

impl fmt::Debug for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.0[0], self.0[1], self.0[2])
    }
}

impl Add for Site {
    type Output = Site;
    fn add(self, o: Site) -> Site {
        Site([self.0[0] + o.0[0], self.0[1] + o.0[1], self.0[2] + o.0[2]])
    }
}

impl Sub for Site {
    type Output = Site;
    fn sub(self, o: Site) -> Site {
        Site([self.0[0] - o.0[0], self.0[1] - o.0[1], self.0[2] - o.0[2]])
    }
}

impl Neg for Site {
    type Output = Site;
    fn neg(self) -> Site {
        Site([-self.0[0], -self.0[1], -self.0[2]])
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LatticeError {
    #[error("dimension {0} unsupported (need 1..={MAX_DIM})")]
    Dimension(usize),
    #[error("killing rate must be positive and finite, got {0}")]
    Killing(f64),
    #[error("jump kernel invalid: {0}")]
    Kernel(String),
    #[error("Green's function quadrature did not reach relative tolerance {tol} with {points} points per axis (last change {change})")]
    QuadratureNonConvergence { tol: f64, points: usize, change: f64 },
    #[error("displacement {0:?} is outside the Green table window")]
    OutsideWindow(Site),
    #[error("equilibrium system is numerically singular for |K| = {0}")]
    Singular(usize),
    #[error("equilibrium weight at {site:?} is negative ({weight})")]
    NegativeWeight { site: Site, weight: f64 },
    #[error("site set K must be nonempty")]
    EmptySet,
}

/// The killed walk: dimension, symmetric jump kernel, killing rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WalkSpec {
    pub d: usize,
    pub kernel: Vec<(Site, f64)>,
    pub kappa: f64,
}

impl WalkSpec {
    pub fn new(d: usize, kernel: Vec<(Site, f64)>, kappa: f64) -> Result<Self, LatticeError> {
        if d == 0 || d > MAX_DIM {
            return Err(LatticeError::Dimension(d));
        }
        if !(kappa > 0.0 && kappa.is_finite()) {
            return Err(LatticeError::Killing(kappa));
        }
        let mut total = 0.0;
        let mut map = BTreeMap::new();
        for &(e, p) in &kernel {
            if e == Site::ORIGIN {
                return Err(LatticeError::Kernel("p(0) must be zero".into()));
            }
            if e.0[d..].iter().any(|&c| c != 0) {
                return Err(LatticeError::Kernel(format!("jump {e:?} leaves Z^{d}")));
            }
            if !(p >= 0.0) {
                return Err(LatticeError::Kernel(format!("negative weight at {e:?}")));
            }
            *map.entry(e).or_insert(0.0) += p;
            total += p;
        }
        if (total - 1.0).abs() > 1e-12 {
            return Err(LatticeError::Kernel(format!("weights sum to {total}")));
        }
        for (e, p) in &map {
            let q = map.get(&-*e).copied().unwrap_or(0.0);
            if (p - q).abs() > 1e-12 {
                return Err(LatticeError::Kernel(format!("asymmetric at {e:?}")));
            }
        }
        let kernel = map.into_iter().filter(|&(_, p)| p > 0.0).collect();
        Ok(Self { d, kernel, kappa })
    }

    /// Uniform nearest-neighbour kernel, p(±e_i) = 1/(2d).
    pub fn nearest_neighbor(d: usize, kappa: f64) -> Result<Self, LatticeError> {
        if d == 0 || d > MAX_DIM {
            return Err(LatticeError::Dimension(d));
        }
        let p = 1.0 / (2 * d) as f64;
        let kernel = (0..d)
            .flat_map(|i| [(Site::unit(d, i, 1), p), (Site::unit(d, i, -1), p)])
            .collect();
        Self::new(d, kernel, kappa)
    }

    /// ψ(θ) = Σ_e p(e)(1 − cos e·θ).
    pub fn characteristic_exponent(&self, theta: &[f64]) -> f64 {
        self.kernel
            .iter()
            .map(|(e, p)| p * (1.0 - e.dot(theta).cos()))
            .sum()
    }

    /// u(x) for a single displacement.
    pub fn green(&self, x: Site, rel_tol: f64) -> Result<f64, LatticeError> {
        Ok(periodic_green(self, &[x], rel_tol)?[0])
    }
}

/// Tensor-product periodic trapezoid rule for u at every requested
/// displacement, doubling the resolution until the largest relative change
/// drops below `rel_tol`.
fn periodic_green(spec: &WalkSpec, xs: &[Site], rel_tol: f64) -> Result<Vec<f64>, LatticeError> {
    const MAX_POINTS: usize = 1 << 21;
    let d = spec.d;
    let mut n = 8usize;
    let mut prev = evaluate_trapezoid(spec, xs, n);
    loop {
        let next_n = 2 * n;
        if next_n.pow(d as u32) > MAX_POINTS {
            let change = max_rel_change(&prev, &evaluate_trapezoid(spec, xs, n));
            return Err(LatticeError::QuadratureNonConvergence { tol: rel_tol, points: n, change });
        }
        let next = evaluate_trapezoid(spec, xs, next_n);
        let change = max_rel_change(&prev, &next);
        n = next_n;
        prev = next;
        // Spectral convergence: once the change is tiny the newer value is far better still.
        if change < rel_tol {
            return Ok(prev);
        }
    }
}

fn max_rel_change(a: &[f64], b: &[f64]) -> f64 {
    let scale = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs() / scale)
        .fold(0.0, f64::max)
}

fn evaluate_trapezoid(spec: &WalkSpec, xs: &[Site], n: usize) -> Vec<f64> {
    let d = spec.d;
    let h = 2.0 * PI / n as f64;
    let total = n.pow(d as u32);
    let mut acc = vec![0.0; xs.len()];
    let mut theta = [0.0; MAX_DIM];
    for idx in 0..total {
        let mut r = idx;
        for t in theta.iter_mut().take(d) {
            *t = -PI + h * (r % n) as f64;
            r /= n;
        }
        let w = 1.0 / (spec.kappa + spec.characteristic_exponent(&theta[..d]));
        for (a, x) in acc.iter_mut().zip(xs) {
            *a += w * x.dot(&theta[..d]).cos();
        }
    }
    let norm = 1.0 / total as f64;
    acc.iter().map(|a| a * norm).collect()
}

/// Tabulated potential on the box {x : |x|_∞ ≤ radius}.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GreenTable {
    pub spec: WalkSpec,
    pub radius: i64,
    pub values: BTreeMap<Site, f64>,
    pub u0: f64,
    pub rel_tol: f64,
}

impl GreenTable {
    pub fn compute(spec: &WalkSpec, radius: i64, rel_tol: f64) -> Result<Self, LatticeError> {
        let sites = box_sites(spec.d, radius);
        let vals = periodic_green(spec, &sites, rel_tol)?;
        let values: BTreeMap<Site, f64> = sites.into_iter().zip(vals).collect();
        let u0 = values[&Site::ORIGIN];
        Ok(Self { spec: spec.clone(), radius, values, u0, rel_tol })
    }

    /// Smallest table covering all differences of the given sites.
    pub fn covering(spec: &WalkSpec, sites: &[Site], rel_tol: f64) -> Result<Self, LatticeError> {
        let mut radius = 0;
        for a in sites {
            for b in sites {
                radius = radius.max((*a - *b).linf());
            }
        }
        Self::compute(spec, radius, rel_tol)
    }

    pub fn get(&self, x: Site) -> Result<f64, LatticeError> {
        self.values.get(&x).copied().ok_or(LatticeError::OutsideWindow(x))
    }

    /// u(x) for a displacement known to lie inside the window.
    pub fn u(&self, x: Site) -> f64 {
        self.values[&x]
    }

    /// Max residual of (κ+1)u(x) − Σ p(e)u(x−e) − 1{x=0} over sites whose
    /// neighbours are all tabulated.
    pub fn resolvent_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for (&x, &ux) in &self.values {
            let mut s = 0.0;
            let mut inside = true;
            for (e, p) in &self.spec.kernel {
                match self.values.get(&(x - *e)) {
                    Some(v) => s += p * v,
                    None => {
                        inside = false;
                        break;
                    }
                }
            }
            if inside {
                let delta = if x == Site::ORIGIN { 1.0 } else { 0.0 };
                worst = worst.max(((self.spec.kappa + 1.0) * ux - s - delta).abs());
            }
        }
        worst
    }

    pub fn to_csv(&self) -> String {
        let d = self.spec.d;
        let mut out = String::new();
        let header: Vec<String> = (0..d).map(|i| format!("x{i}")).collect();
        out.push_str(&header.join(","));
        out.push_str(",u\n");
        for (x, v) in &self.values {
            let cols: Vec<String> = x.coords(d).iter().map(|c| c.to_string()).collect();
            out.push_str(&format!("{},{:.17e}\n", cols.join(","), v));
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        let d = self.spec.d;
        let rows: Vec<serde_json::Value> = self
            .values
            .iter()
            .map(|(x, v)| serde_json::json!({ "x": x.coords(d), "u": v }))
            .collect();
        serde_json::json!({
            "d": d,
            "kappa": self.spec.kappa,
            "radius": self.radius,
            "u0": self.u0,
            "values": rows,
        })
    }
}

/// All sites of Z^d with sup-norm ≤ radius, in lexicographic order.
pub fn box_sites(d: usize, radius: i64) -> Vec<Site> {
    let side = (2 * radius + 1) as usize;
    let mut out = Vec::with_capacity(side.pow(d as u32));
    for idx in 0..side.pow(d as u32) {
        let mut r = idx;
        let mut c = [0i64; MAX_DIM];
        for slot in c.iter_mut().take(d) {
            *slot = (r % side) as i64 - radius;
            r /= side;
        }
        out.push(Site(c));
    }
    out.sort();
    out
}

/// Equilibrium measure and capacity of a finite set K.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EquilibriumData {
    pub sites: Vec<Site>,
    pub weights: Vec<f64>,
    pub cap: f64,
}

impl EquilibriumData {
    /// Solve Σ_y u(x−y) e(y) = 1 on K by dense LU.
    pub fn solve(table: &GreenTable, k: &[Site]) -> Result<Self, LatticeError> {
        if k.is_empty() {
            return Err(LatticeError::EmptySet);
        }
        let sites: Vec<Site> = k.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
        let n = sites.len();
        let mut gram = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                gram[(i, j)] = table.get(sites[i] - sites[j])?;
            }
        }
        let rhs = DVector::from_element(n, 1.0);
        let sol = gram
            .clone()
            .lu()
            .solve(&rhs)
            .ok_or(LatticeError::Singular(n))?;
        let resid = (&gram * &sol - &rhs).amax();
        if !resid.is_finite() || resid > 1e-8 {
            return Err(LatticeError::Singular(n));
        }
        let tol = 1e-12 * sol.amax();
        for (i, &w) in sol.iter().enumerate() {
            if w < -tol {
                return Err(LatticeError::NegativeWeight { site: sites[i], weight: w });
            }
        }
        let weights: Vec<f64> = sol.iter().map(|w| w.max(0.0)).collect();
        let cap = weights.iter().sum();
        Ok(Self { sites, weights, cap })
    }

    pub fn weight(&self, x: Site) -> Option<f64> {
        self.sites.iter().position(|s| *s == x).map(|i| self.weights[i])
    }

    /// e_K / cap as a probability vector.
    pub fn entrance_distribution(&self) -> Vec<f64> {
        self.weights.iter().map(|w| w / self.cap).collect()
    }

    /// Σ_z u(y−z) e_K(z): the probability that the walk from y ever visits K.
    pub fn hitting_probability(&self, table: &GreenTable, y: Site) -> Result<f64, LatticeError> {
        let mut s = 0.0;
        for (z, w) in self.sites.iter().zip(&self.weights) {
            s += table.get(y - *z)? * w;
        }
        Ok(s)
    }

    /// Max-norm residual of the defining system.
    pub fn residual(&self, table: &GreenTable) -> f64 {
        self.sites
            .iter()
            .map(|&x| (self.hitting_probability(table, x).unwrap_or(f64::NAN) - 1.0).abs())
            .fold(0.0, f64::max)
    }
}
