//! The acceptance suite: thirteen criteria, each with pinned parameters and
//! tolerances, shared by the `acceptance` test target and `interlace selftest`.

use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Value};

use crate::algebra::combinatorics::{multinomial_identity, rho_check};
use crate::algebra::pairings::pairing_check;
use crate::algebra::rilt::{check_a_expansion, check_b_expansion, check_rilt_routes};
use crate::continuum::{asymptotics, default_eps_grid, dual_route_check, h, h_brownian, ChainEngine, ContinuumSpec};
use crate::field::{default_grid, hermite_check, shifted_wick_check};
use crate::lattice::{GreenTable, Site, WalkSpec};
use crate::oracle::crosscheck::rilt_moment_crosscheck;
use crate::oracle::decomposition::{decomposition_batch, DECOMPOSITION_REL_TOL};
use crate::oracle::iso::{iso_verify_exact, iso_verify_mc};
use crate::oracle::MomentOracle;
use crate::rng;
use crate::sim::{exp_moment_check, SoupSampler};
use crate::stats::{Estimate, Running};

pub const GREEN_REL_TOL: f64 = 1e-8;
pub const GREEN_SECONDS: f64 = 1.0;
pub const Z_BOUND: f64 = 4.0;
pub const FIRST_MOMENT_SECONDS: f64 = 60.0;
pub const WICK_REL_TOL: f64 = 1e-10;
pub const COMBINATORICS_SECONDS: f64 = 300.0;
pub const ISO_REL_TOL: f64 = 1e-9;
pub const RATIO_SPREAD_BOUND: f64 = 10.0;
pub const H_REL_TOL: f64 = 1e-8;
pub const ASYMPTOTICS_SECONDS: f64 = 300.0;

/// Green's table tolerance used by every lattice criterion.
const TABLE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct AcceptanceConfig {
    pub seed: u64,
    pub mc_samples: u64,
    pub decomposition_soups: u64,
}

impl Default for AcceptanceConfig {
    fn default() -> Self {
        Self { seed: 20_240_611, mc_samples: 100_000, decomposition_soups: 100 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CriterionResult {
    pub id: u32,
    pub name: &'static str,
    pub pass: bool,
    pub summary: String,
    pub details: Value,
    #[serde(skip)]
    pub seconds: f64,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        format!(
            "[{}] {:>2} {:<28} {} ({:.2}s)",
            if self.pass { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.summary,
            self.seconds
        )
    }
}

type Outcome = Result<(bool, String, Value), String>;

fn timed(id: u32, name: &'static str, f: impl FnOnce() -> Outcome) -> CriterionResult {
    let start = Instant::now();
    let out = f();
    let seconds = start.elapsed().as_secs_f64();
    match out {
        Ok((pass, summary, details)) => CriterionResult { id, name, pass, summary, details, seconds },
        Err(e) => CriterionResult { id, name, pass: false, summary: format!("error: {e}"), details: Value::Null, seconds },
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

/// d = 2, κ = 0.5 walk with K = {0, e_1}: the soup used by criteria 2, 3 and 11.
fn planar_sampler() -> Result<SoupSampler, String> {
    let spec = WalkSpec::nearest_neighbor(2, 0.5).map_err(err)?;
    SoupSampler::new(&spec, &[Site::ORIGIN, Site::unit(2, 0, 1)], TABLE_TOL).map_err(err)
}

pub fn green_closed_form() -> CriterionResult {
    timed(1, "green_closed_form", || {
        let start = Instant::now();
        let spec = WalkSpec::nearest_neighbor(1, 1.0).map_err(err)?;
        let u0 = spec.green(Site::ORIGIN, 1e-12).map_err(err)?;
        let secs = start.elapsed().as_secs_f64();
        let exact = 1.0 / 3f64.sqrt();
        let rel = (u0 - exact).abs() / exact;
        let pass = rel < GREEN_REL_TOL && secs < GREEN_SECONDS;
        Ok((pass, format!("u(0) = {u0:.15}, rel err {rel:.2e}"), json!({"u0": u0, "exact": exact, "rel_err": rel})))
    })
}

fn soup_moment_estimates(sampler: &SoupSampler, alpha: f64, samples: u64, seed: u64) -> Result<Vec<Estimate>, String> {
    let (x, y) = (Site::ORIGIN, Site::unit(2, 0, 1));
    sampler
        .monte_carlo(alpha, seed, samples, |soup| {
            let lx: f64 = soup.trajectories.iter().map(|t| t.occupation(x)).sum();
            let ly: f64 = soup.trajectories.iter().map(|t| t.occupation(y)).sum();
            vec![lx, ly, lx * lx, lx * ly, lx * lx * lx, lx * lx * ly]
        })
        .map_err(err)
}

pub fn first_moment(cfg: &AcceptanceConfig) -> CriterionResult {
    timed(2, "first_moment", || {
        let start = Instant::now();
        let sampler = planar_sampler()?;
        let alpha = 1.0;
        let est = soup_moment_estimates(&sampler, alpha, cfg.mc_samples, cfg.seed)?;
        let secs = start.elapsed().as_secs_f64();
        let z = [est[0].z(alpha), est[1].z(alpha)];
        let pass = z.iter().all(|v| v.abs() < Z_BOUND) && secs < FIRST_MOMENT_SECONDS;
        Ok((
            pass,
            format!("E L(0) = {:.4}±{:.4}, E L(e1) = {:.4}±{:.4}, z = ({:.2}, {:.2})", est[0].mean, est[0].se, est[1].mean, est[1].se, z[0], z[1]),
            json!({"alpha": alpha, "estimates": [est[0], est[1]], "z": z}),
        ))
    })
}

pub fn higher_moments(cfg: &AcceptanceConfig) -> CriterionResult {
    timed(3, "soup_moments_2_3", || {
        let sampler = planar_sampler()?;
        let alpha = 1.0;
        let est = soup_moment_estimates(&sampler, alpha, cfg.mc_samples, cfg.seed + 1)?;
        let oracle = MomentOracle::new(sampler.table.clone());
        let (x, y) = (Site::ORIGIN, Site::unit(2, 0, 1));
        let point_sets: [&[Site]; 4] = [&[x, x], &[x, y], &[x, x, x], &[x, x, y]];
        let mut z = Vec::new();
        let mut targets = Vec::new();
        for (k, pts) in point_sets.iter().enumerate() {
            let t = oracle.soup_moment(pts, alpha).map_err(err)?;
            targets.push(t);
            z.push(est[k + 2].z(t));
        }
        let worst = z.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        Ok((
            worst < Z_BOUND,
            format!("4 moments (xx, xy, xxx, xxy), max |z| = {worst:.2}"),
            json!({"targets": targets, "estimates": &est[2..], "z": z}),
        ))
    })
}

pub fn exponential_moment(cfg: &AcceptanceConfig) -> CriterionResult {
    timed(4, "exponential_moment", || {
        let sampler = planar_sampler()?;
        let delta = 0.5 / sampler.u0();
        let r = exp_moment_check(&sampler, Site::ORIGIN, 1.0, delta, cfg.mc_samples, cfg.seed + 2).map_err(err)?;
        Ok((
            r.z.abs() < Z_BOUND,
            format!("E e^(δL) = {:.4}±{:.4} vs {:.4}, z = {:.2}", r.estimate.mean, r.estimate.se, r.target, r.z),
            serde_json::to_value(&r).map_err(err)?,
        ))
    })
}

pub fn backward_acceptance(cfg: &AcceptanceConfig) -> CriterionResult {
    timed(5, "backward_acceptance", || {
        let sampler = planar_sampler()?;
        let x = Site::ORIGIN;
        let kappa = sampler.walker.spec.kappa;
        let p = sampler.eq.weight(x).ok_or("origin not in K")? / (1.0 + kappa);
        let mut rng = rng::stream(cfg.seed + 3, 0, 0);
        let mut acc = Running::new();
        for _ in 0..cfg.mc_samples {
            let ok = sampler.walker.backward_attempt(sampler.k(), x, &mut rng).is_some();
            acc.push(if ok { 1.0 } else { 0.0 });
        }
        let n = cfg.mc_samples as f64;
        let z = (acc.mean() - p) / (p * (1.0 - p) / n).sqrt();
        Ok((
            z.abs() < Z_BOUND,
            format!("rate {:.5} vs e_K/(1+κ) = {p:.5}, z = {z:.2}", acc.mean()),
            json!({"rate": acc.mean(), "target": p, "attempts": cfg.mc_samples, "z": z}),
        ))
    })
}

pub fn rilt_routes() -> CriterionResult {
    timed(6, "rilt_routes", || {
        let polys = check_rilt_routes(8).map_err(err)?;
        Ok((true, "generating function, recursion and ljo agree for n ≤ 8".into(), json!({"n_max": 8, "terms": polys.iter().map(|p| p.len()).collect::<Vec<_>>()})))
    })
}

pub fn wick_identities() -> CriterionResult {
    timed(7, "wick_identities", || {
        let mut reports = Vec::new();
        let mut pass = true;
        let mut worst: f64 = 0.0;
        for u0 in [1.0 / 3f64.sqrt(), 1.0, 2.5] {
            let grid = default_grid(u0, 8);
            let (herm, lag) = hermite_check(12, u0, &grid, WICK_REL_TOL);
            pass &= herm.pass && lag.pass;
            worst = worst.max(herm.max_rel_err).max(lag.max_rel_err);
            reports.push(serde_json::to_value(&herm).map_err(err)?);
            reports.push(serde_json::to_value(&lag).map_err(err)?);
            for c in [-2.0, -1.0, 1.0, 2.0] {
                let s = shifted_wick_check(4, u0, c, &grid, WICK_REL_TOL);
                pass &= s.pass;
                worst = worst.max(s.max_rel_err);
                reports.push(serde_json::to_value(&s).map_err(err)?);
            }
        }
        Ok((pass, format!("Hermite, Laguerre, shifted (n ≤ 4, c ∈ ±1, ±2): max rel err {worst:.2e}"), Value::Array(reports)))
    })
}

pub fn coefficient_identities() -> CriterionResult {
    timed(8, "coefficient_identities", || {
        check_a_expansion(5).map_err(err)?;
        check_b_expansion(8).map_err(err)?;
        Ok((true, "A-expansion n ≤ 5, B-expansion n ≤ 8 exact".into(), json!({"a_n_max": 5, "b_n_max": 8})))
    })
}

pub fn combinatorics(cfg: &AcceptanceConfig) -> CriterionResult {
    timed(9, "combinatorics", || {
        let start = Instant::now();
        let rho = rho_check(6).map_err(err)?;
        let mut identity_cases = 0;
        for k in 0..=8 {
            for m in 0..=8 {
                for p in 0..=8 {
                    let (a, b) = multinomial_identity(k, m, p);
                    if a != b {
                        return Ok((false, format!("multinomial identity fails at k={k}, m={m}, p={p}"), Value::Null));
                    }
                    identity_cases += 1;
                }
            }
        }
        let mut pairings = 0;
        let mut specs = 0;
        for r in 0..=5 {
            for e in [0, 2, 4, 6] {
                let rep = pairing_check(r, e, cfg.seed).map_err(err)?;
                pairings += rep.pairings;
                specs += rep.specs;
            }
        }
        let secs = start.elapsed().as_secs_f64();
        Ok((
            secs < COMBINATORICS_SECONDS,
            format!("rho {} cases, identity {identity_cases} cases, {pairings} pairings over {specs} sigma", rho.cases),
            json!({"rho_cases": rho.cases, "identity_cases": identity_cases, "pairings": pairings, "sigma_classes": specs}),
        ))
    })
}

pub fn isomorphism(cfg: &AcceptanceConfig) -> CriterionResult {
    timed(10, "isomorphism", || {
        let spec = WalkSpec::nearest_neighbor(1, 1.0).map_err(err)?;
        let sites = [Site::ORIGIN, Site::new(&[1])];
        let alpha = 1.0;
        let sampler = SoupSampler::new(&spec, &sites, TABLE_TOL).map_err(err)?;
        let oracle = MomentOracle::new(sampler.table.clone());
        let e1 = iso_verify_exact(&oracle, 1, &sites, alpha, 4).map_err(err)?;
        let e2 = iso_verify_exact(&oracle, 2, &sites, alpha, 2).map_err(err)?;
        let exact_err = e1.max_rel_err.max(e2.max_rel_err);
        let m1 = iso_verify_mc(&sampler, 1, alpha, 4, cfg.mc_samples, cfg.seed + 4).map_err(err)?;
        let m2 = iso_verify_mc(&sampler, 2, alpha, 2, cfg.mc_samples, cfg.seed + 5).map_err(err)?;
        let z = m1.max_abs_z.max(m2.max_abs_z);
        let pass = e1.pass && e2.pass && exact_err <= ISO_REL_TOL && m1.pass && m2.pass;
        Ok((
            pass,
            format!("exact {} cases, max rel err {exact_err:.1e}; MC max |z| = {z:.2}", e1.cases.len() + e2.cases.len()),
            json!({"exact": [e1, e2], "mc": [m1, m2]}),
        ))
    })
}

pub fn decomposition(cfg: &AcceptanceConfig) -> CriterionResult {
    timed(11, "decomposition", || {
        let sampler = planar_sampler()?;
        let b = decomposition_batch(&sampler, 3.0, Site::ORIGIN, 4, cfg.decomposition_soups, cfg.seed + 6).map_err(err)?;
        Ok((
            b.pass && b.max_rel_err <= DECOMPOSITION_REL_TOL,
            format!("{} soups, n ≤ 4, max rel err {:.1e}, up to {} paths at site", b.soups, b.max_rel_err, b.max_trajectories_at_site),
            serde_json::to_value(&b).map_err(err)?,
        ))
    })
}

pub fn continuum_asymptotics() -> CriterionResult {
    timed(12, "continuum_asymptotics", || {
        let start = Instant::now();
        let spec = ContinuumSpec::brownian(1.0).map_err(err)?;
        let mut h_err: f64 = 0.0;
        for s in [1.0, 10.0, 100.0, 1000.0] {
            let exact = h_brownian(spec.kappa, s);
            h_err = h_err.max((h(&spec, s).map_err(err)? - exact).abs() / exact);
        }
        let engine = ChainEngine::new(spec).map_err(err)?;
        let report = asymptotics(&engine, 3, &default_eps_grid()).map_err(err)?;
        let dual = dual_route_check(&engine, 1, 0.25, 0.5).map_err(err)?;
        let secs = start.elapsed().as_secs_f64();
        let worst = report.spread.iter().fold(0.0f64, |m, v| m.max(*v));
        let pass = h_err < H_REL_TOL
            && worst < RATIO_SPREAD_BOUND
            && report.all_positive
            && report.h_increasing
            && dual.ch_rel_err[0] < 1e-6
            && dual.cy2_rel_err < 1e-5
            && secs < ASYMPTOTICS_SECONDS;
        Ok((
            pass,
            format!(
                "spread ch1..3 = {:.3}/{:.3}/{:.3}, h rel err {h_err:.1e}, dual routes {:.1e}/{:.1e}",
                report.spread[0], report.spread[1], report.spread[2], dual.ch_rel_err[0], dual.cy2_rel_err
            ),
            json!({"h_rel_err": h_err, "report": report, "dual": dual}),
        ))
    })
}

pub fn rilt_crosscheck() -> CriterionResult {
    timed(13, "rilt_moment_crosscheck", || {
        let spec = WalkSpec::nearest_neighbor(1, 1.0).map_err(err)?;
        let sites = [Site::ORIGIN, Site::new(&[1]), Site::new(&[-2]), Site::new(&[3])];
        let table = GreenTable::covering(&spec, &sites, TABLE_TOL).map_err(err)?;
        let oracle = MomentOracle::new(table);
        let r = rilt_moment_crosscheck(&oracle, 4, &sites, 0.8).map_err(err)?;
        let pass = r.single_point_means_ok && (r.labelled_agrees || r.segments_agrees);
        Ok((pass, format!("{} profiles; {}", r.cases.len(), r.finding), serde_json::to_value(&r).map_err(err)?))
    })
}

/// All criteria in order.
pub fn run_all(cfg: &AcceptanceConfig) -> Vec<CriterionResult> {
    vec![
        green_closed_form(),
        first_moment(cfg),
        higher_moments(cfg),
        exponential_moment(cfg),
        backward_acceptance(cfg),
        rilt_routes(),
        wick_identities(),
        coefficient_identities(),
        combinatorics(cfg),
        isomorphism(cfg),
        decomposition(cfg),
        continuum_asymptotics(),
        rilt_crosscheck(),
    ]
}
