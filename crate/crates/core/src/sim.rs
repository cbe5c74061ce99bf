//! Sampling the interlacement soup restricted to trajectories that hit K.
//!
//! Each trajectory is bilateral. Time 0 is its first visit to K at the
//! entrance site `x0`. The forward part is an ordinary killed walk from `x0`
//! (including the holding interval at `x0`). The backward part is the
//! time-reversed past: a walk from `x0` that, after its first jump, never
//! returns to K. By symmetry of the kernel it is sampled forward.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::RngExt;
use rand_distr::{Exp, Poisson};
use serde::Serialize;
use thiserror::Error;

use crate::lattice::{EquilibriumData, GreenTable, LatticeError, Site, WalkSpec};
use crate::rng::{self, Rng};
use crate::stats::{parallel_estimates, Estimate};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("backward walk exceeded the rejection budget of {0} attempts")]
    RejectionBudget(u64),
    #[error("entrance site {0:?} is not in K")]
    NotInK(Site),
    #[error("intensity must be finite and nonnegative, got {0}")]
    Intensity(f64),
    #[error("exponential moment diverges: δ·u(0) = {0} ≥ 1")]
    Divergent(f64),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

/// A list of (site, holding time) pairs.
pub type Segment = Vec<(Site, f64)>;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub entrance: Site,
    pub forward: Segment,
    /// Sites visited before time 0, listed from time 0 backwards.
    pub backward: Segment,
}

impl Trajectory {
    /// Total time spent at `x`.
    pub fn occupation(&self, x: Site) -> f64 {
        self.forward
            .iter()
            .chain(&self.backward)
            .filter(|(s, _)| *s == x)
            .map(|(_, t)| t)
            .sum()
    }

    pub fn lifetime(&self) -> f64 {
        self.forward.iter().chain(&self.backward).map(|(_, t)| t).sum()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SeedRecord {
    pub master: u64,
    pub index: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Soup {
    pub alpha: f64,
    pub k: Vec<Site>,
    pub count: usize,
    pub trajectories: Vec<Trajectory>,
    pub seed: SeedRecord,
}

impl Soup {
    pub fn empty(alpha: f64, k: Vec<Site>) -> Self {
        Soup { alpha, k, count: 0, trajectories: Vec::new(), seed: SeedRecord { master: 0, index: 0 } }
    }

    pub fn to_json(&self, d: usize) -> serde_json::Value {
        let seg = |s: &Segment| -> serde_json::Value {
            serde_json::json!({
                "sites": s.iter().map(|(x, _)| x.coords(d).to_vec()).collect::<Vec<_>>(),
                "holding": s.iter().map(|(_, t)| *t).collect::<Vec<_>>(),
            })
        };
        serde_json::json!({
            "alpha": self.alpha,
            "K": self.k.iter().map(|x| x.coords(d).to_vec()).collect::<Vec<_>>(),
            "count": self.count,
            "seed": self.seed,
            "trajectories": self.trajectories.iter().map(|t| serde_json::json!({
                "entrance": t.entrance.coords(d),
                "forward": seg(&t.forward),
                "backward": seg(&t.backward),
            })).collect::<Vec<_>>(),
        })
    }
}

/// Total occupation time per requested site.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocalTimeField {
    pub sites: Vec<Site>,
    pub values: Vec<f64>,
}

impl LocalTimeField {
    pub fn get(&self, x: Site) -> Option<f64> {
        self.sites.iter().position(|s| *s == x).map(|i| self.values[i])
    }

    pub fn to_csv(&self, d: usize) -> String {
        let mut out: String = (0..d).map(|i| format!("x{i},")).collect();
        out.push_str("L1\n");
        for (x, v) in self.sites.iter().zip(&self.values) {
            for c in x.coords(d) {
                out.push_str(&format!("{c},"));
            }
            out.push_str(&format!("{v:.17e}\n"));
        }
        out
    }
}

pub fn local_time_field(soup: &Soup, sites: &[Site]) -> LocalTimeField {
    let mut values = vec![0.0; sites.len()];
    for t in &soup.trajectories {
        for (s, h) in t.forward.iter().chain(&t.backward) {
            for (i, x) in sites.iter().enumerate() {
                if s == x {
                    values[i] += h;
                }
            }
        }
    }
    LocalTimeField { sites: sites.to_vec(), values }
}

/// Per-trajectory occupation vectors at `sites`.
pub fn trajectory_local_times(soup: &Soup, sites: &[Site]) -> Vec<Vec<f64>> {
    soup.trajectories
        .iter()
        .map(|t| sites.iter().map(|&x| t.occupation(x)).collect())
        .collect()
}

/// Jump sampler and killing law for a walk.
#[derive(Debug, Clone)]
pub struct Walker {
    pub spec: WalkSpec,
    jumps: Vec<Site>,
    choose: WeightedIndex<f64>,
    hold: Exp<f64>,
    kill_prob: f64,
}

impl Walker {
    pub fn new(spec: &WalkSpec) -> Self {
        let jumps = spec.kernel.iter().map(|(e, _)| *e).collect();
        let choose = WeightedIndex::new(spec.kernel.iter().map(|(_, p)| *p))
            .expect("validated kernel has positive total weight");
        let hold = Exp::new(1.0 + spec.kappa).expect("positive rate");
        Self { spec: spec.clone(), jumps, choose, hold, kill_prob: spec.kappa / (1.0 + spec.kappa) }
    }

    fn jump(&self, rng: &mut Rng) -> Site {
        self.jumps[self.choose.sample(rng)]
    }

    fn killed(&self, rng: &mut Rng) -> bool {
        rng.random::<f64>() < self.kill_prob
    }

    /// Killed walk from `x0`; each visited site carries an Exp(1+κ) holding time.
    pub fn forward_walk(&self, x0: Site, rng: &mut Rng) -> Segment {
        let mut seg = Vec::new();
        let mut x = x0;
        loop {
            seg.push((x, self.hold.sample(rng)));
            if self.killed(rng) {
                return seg;
            }
            x = x + self.jump(rng);
        }
    }

    /// One attempt at the backward segment: `Some` iff the walk after its
    /// first event never enters K. The holding at `x0` is not included.
    pub fn backward_attempt(&self, k: &[Site], x0: Site, rng: &mut Rng) -> Option<Segment> {
        let mut seg = Vec::new();
        if self.killed(rng) {
            return Some(seg);
        }
        let mut x = x0 + self.jump(rng);
        loop {
            if k.contains(&x) {
                return None;
            }
            seg.push((x, self.hold.sample(rng)));
            if self.killed(rng) {
                return Some(seg);
            }
            x = x + self.jump(rng);
        }
    }

    pub fn backward_walk(&self, k: &[Site], x0: Site, rng: &mut Rng, budget: u64) -> Result<Segment, SimError> {
        if !k.contains(&x0) {
            return Err(SimError::NotInK(x0));
        }
        for _ in 0..budget {
            if let Some(seg) = self.backward_attempt(k, x0, rng) {
                return Ok(seg);
            }
        }
        Err(SimError::RejectionBudget(budget))
    }
}

/// Everything needed to sample soups on a fixed K.
#[derive(Debug, Clone)]
pub struct SoupSampler {
    pub walker: Walker,
    pub table: GreenTable,
    pub eq: EquilibriumData,
    pub budget: u64,
    entrance: WeightedIndex<f64>,
}

impl SoupSampler {
    pub fn new(spec: &WalkSpec, k: &[Site], rel_tol: f64) -> Result<Self, SimError> {
        let table = GreenTable::covering(spec, k, rel_tol)?;
        let eq = EquilibriumData::solve(&table, k)?;
        Ok(Self::from_parts(spec, table, eq))
    }

    pub fn from_parts(spec: &WalkSpec, table: GreenTable, eq: EquilibriumData) -> Self {
        let entrance = WeightedIndex::new(eq.weights.iter().copied()).expect("capacity is positive");
        Self { walker: Walker::new(spec), table, eq, budget: 1_000_000, entrance }
    }

    pub fn k(&self) -> &[Site] {
        &self.eq.sites
    }

    pub fn u0(&self) -> f64 {
        self.table.u0
    }

    /// Soup number `index` of the run seeded by `master`.
    pub fn sample(&self, alpha: f64, master: u64, index: u64) -> Result<Soup, SimError> {
        if !(alpha >= 0.0 && alpha.is_finite()) {
            return Err(SimError::Intensity(alpha));
        }
        let mut rng = rng::stream(master, index, rng::SOUP_STREAM);
        let mean = alpha * self.eq.cap;
        let count = if mean > 0.0 {
            Poisson::new(mean).expect("positive mean").sample(&mut rng) as usize
        } else {
            0
        };
        let entrances: Vec<Site> = (0..count).map(|_| self.eq.sites[self.entrance.sample(&mut rng)]).collect();
        let k = self.k();
        let mut trajectories = Vec::with_capacity(count);
        for (j, &x0) in entrances.iter().enumerate() {
            let mut trng = rng::trajectory_stream(master, index, j as u64);
            let forward = self.walker.forward_walk(x0, &mut trng);
            let backward = self.walker.backward_walk(k, x0, &mut trng, self.budget)?;
            trajectories.push(Trajectory { entrance: x0, forward, backward });
        }
        Ok(Soup { alpha, k: k.to_vec(), count, trajectories, seed: SeedRecord { master, index } })
    }

    /// Monte Carlo over `samples` soups, accumulating each observable component.
    pub fn monte_carlo<F>(&self, alpha: f64, master: u64, samples: u64, observe: F) -> Result<Vec<Estimate>, SimError>
    where
        F: Fn(&Soup) -> Vec<f64> + Sync,
    {
        parallel_estimates(samples, |i| Ok(observe(&self.sample(alpha, master, i)?)))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ExpMomentReport {
    pub site: Vec<i64>,
    pub alpha: f64,
    pub delta: f64,
    pub u0: f64,
    pub target: f64,
    pub estimate: Estimate,
    pub z: f64,
}

/// Compare the empirical mean of exp(δ L_1(x)) with exp(αδ/(1 − δu(0))).
pub fn exp_moment_check(
    sampler: &SoupSampler,
    x: Site,
    alpha: f64,
    delta: f64,
    samples: u64,
    master: u64,
) -> Result<ExpMomentReport, SimError> {
    if !sampler.k().contains(&x) {
        return Err(SimError::NotInK(x));
    }
    let u0 = sampler.u0();
    if delta * u0 >= 1.0 {
        return Err(SimError::Divergent(delta * u0));
    }
    let target = (alpha * delta / (1.0 - delta * u0)).exp();
    let est = sampler.monte_carlo(alpha, master, samples, |soup| {
        let l: f64 = soup.trajectories.iter().map(|t| t.occupation(x)).sum();
        vec![(delta * l).exp()]
    })?[0];
    Ok(ExpMomentReport {
        site: x.coords(sampler.walker.spec.d).to_vec(),
        alpha,
        delta,
        u0,
        target,
        z: est.z(target),
        estimate: est,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sampler_1d() -> SoupSampler {
        let spec = WalkSpec::nearest_neighbor(1, 1.0).unwrap();
        SoupSampler::new(&spec, &[Site::new(&[0]), Site::new(&[1])], 1e-12).unwrap()
    }

    #[test]
    fn zero_intensity_gives_empty_soup() {
        let s = sampler_1d();
        let soup = s.sample(0.0, 1, 0).unwrap();
        assert_eq!(soup.count, 0);
        let f = local_time_field(&soup, s.k());
        assert!(f.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn backward_segments_avoid_k() {
        let s = sampler_1d();
        for i in 0..200 {
            let soup = s.sample(2.0, 11, i).unwrap();
            assert_eq!(soup.trajectories.len(), soup.count);
            for t in &soup.trajectories {
                assert!(t.backward.iter().all(|(x, _)| !s.k().contains(x)));
                assert_eq!(t.forward[0].0, t.entrance);
                assert!(t.forward.iter().chain(&t.backward).all(|(_, h)| *h > 0.0));
            }
        }
    }

    #[test]
    fn sampling_is_reproducible() {
        let s = sampler_1d();
        let a = s.sample(1.5, 5, 17).unwrap();
        let b = s.sample(1.5, 5, 17).unwrap();
        assert_eq!(a.trajectories, b.trajectories);
    }

    #[test]
    fn single_trajectory_field_is_its_occupation() {
        let s = sampler_1d();
        let soup = (0..)
            .map(|i| s.sample(1.0, 3, i).unwrap())
            .find(|soup| soup.count == 1)
            .unwrap();
        let f = local_time_field(&soup, s.k());
        for (x, v) in f.sites.iter().zip(&f.values) {
            assert_eq!(*v, soup.trajectories[0].occupation(*x));
        }
    }

    #[test]
    fn field_is_additive_over_soups() {
        let s = sampler_1d();
        let a = s.sample(1.0, 3, 1).unwrap();
        let b = s.sample(1.0, 3, 2).unwrap();
        let mut union = a.clone();
        union.trajectories.extend(b.trajectories.iter().cloned());
        let fa = local_time_field(&a, s.k());
        let fb = local_time_field(&b, s.k());
        let fu = local_time_field(&union, s.k());
        for i in 0..fu.values.len() {
            assert!((fu.values[i] - fa.values[i] - fb.values[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn huge_killing_gives_single_interval() {
        let spec = WalkSpec::nearest_neighbor(2, 1e6).unwrap();
        let w = Walker::new(&spec);
        let mut rng = rng::stream(1, 0, 0);
        let singles = (0..1000).filter(|_| w.forward_walk(Site::ORIGIN, &mut rng).len() == 1).count();
        assert!(singles >= 995);
    }

    #[test]
    fn divergent_delta_rejected() {
        let s = sampler_1d();
        let err = exp_moment_check(&s, Site::ORIGIN, 1.0, 2.0 / s.u0(), 10, 0).unwrap_err();
        assert!(matches!(err, SimError::Divergent(_)));
    }

    #[test]
    fn trivial_exponential_moments() {
        let s = sampler_1d();
        let r = exp_moment_check(&s, Site::ORIGIN, 1.0, 0.0, 100, 0).unwrap();
        assert_eq!(r.target, 1.0);
        assert_eq!(r.estimate.mean, 1.0);
        let r = exp_moment_check(&s, Site::ORIGIN, 0.0, 0.5, 100, 0).unwrap();
        assert_eq!(r.target, 1.0);
        assert_eq!(r.estimate.mean, 1.0);
    }
}
