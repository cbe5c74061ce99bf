//! Chain and cycle functions of a killed 2-D Lévy process with a radial
//! exponent, and the growth rate h(s).
//!
//! Everything is radial, so functions on the unit disc are stored by their
//! values on a Gauss-Legendre grid in r ∈ [0, 1]. Writing g_1 = f and
//! g_{j+1} = f · (u_ε ∗ g_j) with u_ε(x) = u(εx), the chain function is
//! ch_k(ε) = ∫ g_{k+1}. The convolution is applied in two independent ways:
//! through Hankel transforms with û_ε(ρ) = ε⁻²/(ψ(ρ/ε)+κ) (any exponent), and
//! in real space through the angular average of K_0 (Brownian only).

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use puruspe::{In, Jn, Kn};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::quad::{reference_rule, Adaptive, Grid, QuadError};

pub const DIM: usize = 2;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ContinuumError {
    #[error("killing rate must be positive and finite, got {0}")]
    Kappa(f64),
    #[error("chain order must be at least 1")]
    Order,
    #[error("{0} is only available for the Brownian exponent")]
    Unsupported(&'static str),
    #[error("unknown exponent '{0}' (expected 'brownian' or 'log:<a>')")]
    Exponent(String),
    #[error("ε must lie in (0, 1], got {0}")]
    Epsilon(f64),
    #[error(transparent)]
    Quadrature(#[from] QuadError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Exponent {
    /// ψ(ρ) = ρ²/2.
    Brownian,
    /// ψ(ρ) = ρ²/(log(e+ρ))^a.
    LogCorrected { a: f64 },
}

impl Exponent {
    pub fn psi(&self, rho: f64) -> f64 {
        match *self {
            Exponent::Brownian => 0.5 * rho * rho,
            Exponent::LogCorrected { a } => rho * rho / (std::f64::consts::E + rho).ln().powf(a),
        }
    }

    pub fn parse(s: &str) -> Result<Self, ContinuumError> {
        let s = s.trim().to_ascii_lowercase();
        if s == "brownian" {
            return Ok(Exponent::Brownian);
        }
        s.strip_prefix("log:")
            .and_then(|a| a.parse::<f64>().ok())
            .filter(|a| a.is_finite() && *a >= 0.0)
            .map(|a| Exponent::LogCorrected { a })
            .ok_or(ContinuumError::Exponent(s))
    }

    pub fn label(&self) -> String {
        match self {
            Exponent::Brownian => "brownian".into(),
            Exponent::LogCorrected { a } => format!("log:{a}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContinuumSpec {
    pub exponent: Exponent,
    pub kappa: f64,
    /// Radial grid size on [0, 1].
    pub nodes: usize,
    /// Gauss-Legendre order of each half of the real-space convolution.
    pub inner: usize,
}

impl ContinuumSpec {
    pub fn new(exponent: Exponent, kappa: f64) -> Result<Self, ContinuumError> {
        if !(kappa > 0.0 && kappa.is_finite()) {
            return Err(ContinuumError::Kappa(kappa));
        }
        Ok(Self { exponent, kappa, nodes: 96, inner: 64 })
    }

    pub fn brownian(kappa: f64) -> Result<Self, ContinuumError> {
        Self::new(Exponent::Brownian, kappa)
    }

    /// û(ρ) = 1/(ψ(ρ)+κ).
    pub fn u_hat(&self, rho: f64) -> f64 {
        1.0 / (self.exponent.psi(rho) + self.kappa)
    }

    /// Transform of x ↦ u(εx).
    pub fn u_hat_scaled(&self, rho: f64, eps: f64) -> f64 {
        self.u_hat(rho / eps) / (eps * eps)
    }

    /// Mass of the Brownian potential: u(x) = K_0(m|x|)/π.
    fn brownian_mass(&self) -> Result<f64, ContinuumError> {
        match self.exponent {
            Exponent::Brownian => Ok((2.0 * self.kappa).sqrt()),
            _ => Err(ContinuumError::Unsupported("the real-space route")),
        }
    }
}

/// h(s) = ∫_{|ξ|≤s} dξ/(ψ(|ξ|)+κ).
pub fn h(spec: &ContinuumSpec, s: f64) -> Result<f64, ContinuumError> {
    if s <= 0.0 {
        return Ok(0.0);
    }
    let quad = Adaptive::new(1e-13);
    let mut total = 0.0;
    // Split at powers of ten so each piece is well scaled.
    let mut a = 0.0;
    let mut b = s.min(1.0);
    loop {
        total += quad.integrate(|r| r * spec.u_hat(r), a, b)?;
        if b >= s {
            break;
        }
        a = b;
        b = (b * 10.0).min(s);
    }
    Ok(2.0 * PI * total)
}

/// Closed form for ψ = ρ²/2: 2π ln(1 + s²/(2κ)).
pub fn h_brownian(kappa: f64, s: f64) -> f64 {
    2.0 * PI * (s * s / (2.0 * kappa)).ln_1p()
}

/// The normalized bump c·exp(−1/(1−r²)) on the unit disc.
#[derive(Debug, Clone, Copy)]
pub struct Mollifier {
    pub norm: f64,
}

impl Mollifier {
    pub fn new() -> Result<Self, ContinuumError> {
        let mass = Adaptive::new(1e-14).integrate(|r| 2.0 * PI * r * bump(r), 0.0, 1.0)?;
        Ok(Self { norm: 1.0 / mass })
    }

    pub fn f(&self, r: f64) -> f64 {
        self.norm * bump(r)
    }
}

fn bump(r: f64) -> f64 {
    if r < 1.0 {
        (-1.0 / (1.0 - r * r)).exp()
    } else {
        0.0
    }
}

/// Gauss-Legendre grid on [0, 1] with barycentric interpolation weights.
#[derive(Debug, Clone)]
struct RadialGrid {
    r: Vec<f64>,
    w: Vec<f64>,
    bary: Vec<f64>,
}

impl RadialGrid {
    fn new(n: usize) -> Self {
        let rule = reference_rule(n);
        let r = rule.iter().map(|(x, _)| 0.5 * (x + 1.0)).collect();
        let w = rule.iter().map(|(_, w)| 0.5 * w).collect();
        let bary = rule
            .iter()
            .enumerate()
            .map(|(i, (x, w))| {
                let s = ((1.0 - x * x) * w).sqrt();
                if i % 2 == 0 {
                    s
                } else {
                    -s
                }
            })
            .collect();
        Self { r, w, bary }
    }

    /// Values of the interpolating basis at `x`.
    fn basis(&self, x: f64) -> Vec<f64> {
        if let Some(i) = self.r.iter().position(|&ri| ri == x) {
            let mut e = vec![0.0; self.r.len()];
            e[i] = 1.0;
            return e;
        }
        let t: Vec<f64> = self.r.iter().zip(&self.bary).map(|(ri, b)| b / (x - ri)).collect();
        let s: f64 = t.iter().sum();
        t.into_iter().map(|v| v / s).collect()
    }
}

/// Largest frequency kept in Hankel integrals. f̂ is below 1e-7 there, and
/// the radial grid still resolves J_0(ρr).
const RHO_MAX: f64 = 160.0;
/// Smallest frequency kept; the omitted disc contributes O((ρ/ε)²).
const RHO_MIN: f64 = 1e-9;

/// Precomputed grids and transform matrices shared by every ε.
#[derive(Debug, Clone)]
pub struct ChainEngine {
    pub spec: ContinuumSpec,
    pub mollifier: Mollifier,
    grid: RadialGrid,
    f: Vec<f64>,
    rho: Grid,
    /// J_0(ρ_m r_i).
    j0: DMatrix<f64>,
    f_hat: Vec<f64>,
}

impl ChainEngine {
    pub fn new(spec: ContinuumSpec) -> Result<Self, ContinuumError> {
        let mollifier = Mollifier::new()?;
        let grid = RadialGrid::new(spec.nodes);
        let f: Vec<f64> = grid.r.iter().map(|&r| mollifier.f(r)).collect();
        let geometric = Grid::uniform(RHO_MIN.ln(), 0.0, 48, 12);
        let geometric = Grid {
            nodes: geometric.nodes.iter().map(|t| t.exp()).collect(),
            weights: geometric.nodes.iter().zip(&geometric.weights).map(|(t, w)| w * t.exp()).collect(),
        };
        let rho = geometric.join(Grid::uniform(1.0, RHO_MAX, 80, 12));
        let j0 = DMatrix::from_fn(rho.len(), grid.r.len(), |m, i| Jn(0, rho.nodes[m] * grid.r[i]));
        let mut engine = Self { spec, mollifier, grid, f, rho, j0, f_hat: Vec::new() };
        engine.f_hat = engine.hankel(&engine.f.clone());
        Ok(engine)
    }

    /// ĝ(ρ_m) = 2π ∫_0^1 g(r) J_0(ρ_m r) r dr from grid values.
    fn hankel(&self, g: &[f64]) -> Vec<f64> {
        let v = DVector::from_iterator(g.len(), (0..g.len()).map(|i| 2.0 * PI * self.grid.w[i] * self.grid.r[i] * g[i]));
        (&self.j0 * v).iter().copied().collect()
    }

    /// Radial transform of the mollifier at the Hankel nodes.
    pub fn f_hat_table(&self) -> (&[f64], &[f64]) {
        (&self.rho.nodes, &self.f_hat)
    }

    pub fn f_hat(&self, rho: f64) -> f64 {
        (0..self.grid.r.len())
            .map(|i| 2.0 * PI * self.grid.w[i] * self.grid.r[i] * self.f[i] * Jn(0, rho * self.grid.r[i]))
            .sum()
    }

    /// Operator G ↦ u_ε ∗ (f·G) on grid values, through Hankel transforms.
    fn fourier_operator(&self, eps: f64) -> DMatrix<f64> {
        let n = self.grid.r.len();
        let d = DVector::from_iterator(
            self.rho.len(),
            (0..self.rho.len()).map(|m| {
                let rho = self.rho.nodes[m];
                self.rho.weights[m] * rho * self.spec.u_hat_scaled(rho, eps) / (2.0 * PI)
            }),
        );
        let scaled = DMatrix::from_fn(self.rho.len(), n, |m, l| {
            d[m] * self.j0[(m, l)] * 2.0 * PI * self.grid.w[l] * self.grid.r[l] * self.f[l]
        });
        self.j0.transpose() * scaled
    }

    /// The same operator from the angular average
    /// (1/2π)∫ K_0(m|r − s e^{iθ}|) dθ = I_0(m·min(r,s)) K_0(m·max(r,s)).
    fn real_operator(&self, eps: f64) -> Result<DMatrix<f64>, ContinuumError> {
        let m = self.spec.brownian_mass()? * eps;
        let n = self.grid.r.len();
        let inner = reference_rule(self.spec.inner);
        let mut t = DMatrix::zeros(n, n);
        for i in 0..n {
            let ri = self.grid.r[i];
            let (k_out, i_out) = (Kn(0, m * ri), In(0, m * ri));
            for (a, b, below) in [(0.0, ri, true), (ri, 1.0, false)] {
                let half = 0.5 * (b - a);
                for (x, w) in &inner {
                    let s = a + half * (x + 1.0);
                    let kernel = if below { k_out * In(0, m * s) } else { i_out * Kn(0, m * s) };
                    // u = K_0/π, angular integral 2π.
                    let c = 2.0 * kernel * s * self.mollifier.f(s) * half * w;
                    for (l, bl) in self.grid.basis(s).into_iter().enumerate() {
                        t[(i, l)] += c * bl;
                    }
                }
            }
        }
        Ok(t)
    }

    fn chains_from(&self, op: &DMatrix<f64>, kmax: u32) -> Vec<f64> {
        let n = self.grid.r.len();
        let outer: Vec<f64> = (0..n).map(|i| 2.0 * PI * self.grid.w[i] * self.grid.r[i] * self.f[i]).collect();
        let mut g = DVector::from_element(n, 1.0);
        (1..=kmax)
            .map(|_| {
                g = op * &g;
                outer.iter().zip(g.iter()).map(|(a, b)| a * b).sum()
            })
            .collect()
    }

    fn check(&self, kmax: u32, eps: f64) -> Result<(), ContinuumError> {
        if kmax == 0 {
            return Err(ContinuumError::Order);
        }
        if !(eps > 0.0 && eps <= 1.0) {
            return Err(ContinuumError::Epsilon(eps));
        }
        Ok(())
    }

    /// ch_1..=ch_kmax at ε through Hankel transforms.
    pub fn chains_fourier(&self, kmax: u32, eps: f64) -> Result<Vec<f64>, ContinuumError> {
        self.check(kmax, eps)?;
        Ok(self.chains_from(&self.fourier_operator(eps), kmax))
    }

    /// ch_1..=ch_kmax at ε by real-space quadrature (Brownian only).
    pub fn chains_real(&self, kmax: u32, eps: f64) -> Result<Vec<f64>, ContinuumError> {
        self.check(kmax, eps)?;
        Ok(self.chains_from(&self.real_operator(eps)?, kmax))
    }

    /// Preferred route: real space when available, Hankel otherwise.
    pub fn chains(&self, kmax: u32, eps: f64) -> Result<Vec<f64>, ContinuumError> {
        match self.spec.exponent {
            Exponent::Brownian => self.chains_real(kmax, eps),
            _ => self.chains_fourier(kmax, eps),
        }
    }

    /// ch_1 with |f̂| replaced by 1 on the frequency domain used: h(ρ_max/ε)/(2π)².
    pub fn chain1_bound(&self, eps: f64) -> Result<f64, ContinuumError> {
        Ok(h(&self.spec, RHO_MAX / eps)? / (4.0 * PI * PI))
    }

    /// ch_1 = (2π)⁻¹ ∫ û_ε(ρ) f̂(ρ)² ρ dρ directly.
    pub fn chain1_spectral(&self, eps: f64) -> f64 {
        (0..self.rho.len())
            .map(|m| {
                let rho = self.rho.nodes[m];
                self.rho.weights[m] * rho * self.spec.u_hat_scaled(rho, eps) * self.f_hat[m].powi(2)
            })
            .sum::<f64>()
            / (2.0 * PI)
    }

    /// cy_2 = (2π)⁻³ ∫ (û_ε ∗ û_ε)(ρ) f̂(ρ)² ρ dρ, with the Brownian
    /// convolution in closed form.
    pub fn cycle2_fourier(&self, eps: f64) -> Result<f64, ContinuumError> {
        self.check(1, eps)?;
        let a = self.spec.brownian_mass()? * eps;
        let total: f64 = (0..self.rho.len())
            .map(|m| {
                let rho = self.rho.nodes[m];
                self.rho.weights[m] * rho * brownian_self_convolution(rho, a) * self.f_hat[m].powi(2)
            })
            .sum();
        Ok(total / (2.0 * PI).powi(3))
    }

    /// cy_2 = ∫ u(εz)² A(z) dz with A = f ∗ f computed in real space.
    pub fn cycle2_real(&self, eps: f64) -> Result<f64, ContinuumError> {
        self.check(1, eps)?;
        let m = self.spec.brownian_mass()? * eps;
        let mut breaks: Vec<f64> = (1..=40).rev().map(|j| 2f64.powi(-j)).collect();
        breaks.insert(0, 0.0);
        breaks.extend([0.75, 1.0, 1.25, 1.5, 1.75, 2.0]);
        let grid = Grid::composite(&breaks, 12);
        let total: f64 = grid
            .nodes
            .par_iter()
            .zip(&grid.weights)
            .map(|(&r, &w)| {
                let u = Kn(0, m * r) / PI;
                w * 2.0 * PI * r * u * u * self.autocorrelation(r)
            })
            .sum();
        Ok(total)
    }

    /// A(r) = ∫ f(y) f(y − z) dy for |z| = r.
    pub fn autocorrelation(&self, r: f64) -> f64 {
        const ANGLES: usize = 256;
        let mut total = 0.0;
        for (i, &s) in self.grid.r.iter().enumerate() {
            let mut ring = 0.0;
            for p in 0..ANGLES {
                let phi = 2.0 * PI * p as f64 / ANGLES as f64;
                let dist = (s * s + r * r - 2.0 * s * r * phi.cos()).max(0.0).sqrt();
                ring += self.mollifier.f(dist);
            }
            total += self.grid.w[i] * s * self.f[i] * ring * 2.0 * PI / ANGLES as f64;
        }
        total
    }
}

/// ∫_{ℝ²} û(μ) û(λ−μ) dμ for û(λ) = 2/(|λ|²+a²), |λ| = ρ:
/// 4π ∫_0^1 dx/(a² + ρ²x(1−x)) = 16π ln((D+ρ)/(2a)) / (ρD), D = √(ρ²+4a²).
pub fn brownian_self_convolution(rho: f64, a: f64) -> f64 {
    if rho < 1e-6 * a {
        return 4.0 * PI / (a * a);
    }
    let d = (rho * rho + 4.0 * a * a).sqrt();
    16.0 * PI * ((d + rho) / (2.0 * a)).ln() / (rho * d)
}

#[derive(Debug, Clone, Serialize)]
pub struct AsymptoticsRow {
    pub eps: f64,
    pub h: f64,
    pub ch: Vec<f64>,
    pub cy2: Option<f64>,
    pub ch_ratio: Vec<f64>,
    pub cy2_ratio: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AsymptoticsReport {
    pub exponent: String,
    pub kappa: f64,
    pub kmax: u32,
    pub rows: Vec<AsymptoticsRow>,
    /// max/min of ch_k/h^k over the grid, per k.
    pub spread: Vec<f64>,
    pub cy2_spread: Option<f64>,
    pub all_positive: bool,
    pub h_increasing: bool,
}

impl AsymptoticsReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("eps,h");
        for k in 1..=self.kmax {
            out.push_str(&format!(",ch{k}"));
        }
        out.push_str(",cy2");
        for k in 1..=self.kmax {
            out.push_str(&format!(",ch{k}_over_h{k}"));
        }
        out.push_str(",cy2_over_h2\n");
        let opt = |v: Option<f64>| v.map_or(String::new(), |x| format!("{x:.12e}"));
        for row in &self.rows {
            out.push_str(&format!("{:.12e},{:.12e}", row.eps, row.h));
            for c in &row.ch {
                out.push_str(&format!(",{c:.12e}"));
            }
            out.push_str(&format!(",{}", opt(row.cy2)));
            for c in &row.ch_ratio {
                out.push_str(&format!(",{c:.12e}"));
            }
            out.push_str(&format!(",{}\n", opt(row.cy2_ratio)));
        }
        out
    }
}

fn spread(v: impl Iterator<Item = f64>) -> f64 {
    let (lo, hi) = v.fold((f64::INFINITY, 0.0f64), |(lo, hi), x| (lo.min(x), hi.max(x)));
    hi / lo
}

/// ε ∈ {2⁻³, …, 2⁻¹⁰}.
pub fn default_eps_grid() -> Vec<f64> {
    (3..=10).map(|j| 2f64.powi(-j)).collect()
}

pub fn asymptotics(engine: &ChainEngine, kmax: u32, eps_grid: &[f64]) -> Result<AsymptoticsReport, ContinuumError> {
    let spec = engine.spec;
    let brownian = spec.exponent == Exponent::Brownian;
    let rows: Vec<AsymptoticsRow> = eps_grid
        .par_iter()
        .map(|&eps| -> Result<AsymptoticsRow, ContinuumError> {
            let hv = h(&spec, 1.0 / eps)?;
            let ch = engine.chains(kmax, eps)?;
            let cy2 = if brownian { Some(engine.cycle2_fourier(eps)?) } else { None };
            let ch_ratio = ch.iter().enumerate().map(|(k, c)| c / hv.powi(k as i32 + 1)).collect();
            Ok(AsymptoticsRow { eps, h: hv, cy2_ratio: cy2.map(|c| c / (hv * hv)), ch, cy2, ch_ratio })
        })
        .collect::<Result<_, _>>()?;
    let spread_k = (0..kmax as usize).map(|k| spread(rows.iter().map(|r| r.ch_ratio[k]))).collect();
    let cy2_spread = if brownian { Some(spread(rows.iter().filter_map(|r| r.cy2_ratio))) } else { None };
    let all_positive = rows.iter().all(|r| r.h > 0.0 && r.ch.iter().all(|&c| c > 0.0) && r.cy2.is_none_or(|c| c > 0.0));
    let mut by_eps: Vec<&AsymptoticsRow> = rows.iter().collect();
    by_eps.sort_by(|a, b| b.eps.total_cmp(&a.eps));
    let h_increasing = by_eps.windows(2).all(|w| w[1].h > w[0].h);
    Ok(AsymptoticsReport {
        exponent: spec.exponent.label(),
        kappa: spec.kappa,
        kmax,
        rows,
        spread: spread_k,
        cy2_spread,
        all_positive,
        h_increasing,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct DualRouteReport {
    pub ch_eps: f64,
    pub ch_real: Vec<f64>,
    pub ch_fourier: Vec<f64>,
    pub ch_rel_err: Vec<f64>,
    pub cy2_eps: f64,
    pub cy2_real: f64,
    pub cy2_fourier: f64,
    pub cy2_rel_err: f64,
}

/// Real-space vs Hankel evaluation of ch_1..=ch_kmax at `ch_eps` and of cy_2 at `cy2_eps`.
pub fn dual_route_check(engine: &ChainEngine, kmax: u32, ch_eps: f64, cy2_eps: f64) -> Result<DualRouteReport, ContinuumError> {
    let ch_real = engine.chains_real(kmax, ch_eps)?;
    let ch_fourier = engine.chains_fourier(kmax, ch_eps)?;
    let ch_rel_err = ch_real.iter().zip(&ch_fourier).map(|(a, b)| (a - b).abs() / b.abs()).collect();
    let cy2_real = engine.cycle2_real(cy2_eps)?;
    let cy2_fourier = engine.cycle2_fourier(cy2_eps)?;
    Ok(DualRouteReport {
        ch_eps,
        ch_real,
        ch_fourier,
        ch_rel_err,
        cy2_eps,
        cy2_rel_err: (cy2_real - cy2_fourier).abs() / cy2_fourier.abs(),
        cy2_real,
        cy2_fourier,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::OnceLock;

    fn engine() -> &'static ChainEngine {
        static E: OnceLock<ChainEngine> = OnceLock::new();
        E.get_or_init(|| ChainEngine::new(ContinuumSpec::brownian(1.0).unwrap()).unwrap())
    }

    #[test]
    fn h_closed_form() {
        let spec = ContinuumSpec::brownian(1.0).unwrap();
        assert_eq!(h(&spec, 0.0).unwrap(), 0.0);
        for s in [1.0, 10.0, 100.0, 1000.0] {
            let a = h(&spec, s).unwrap();
            let b = h_brownian(1.0, s);
            assert!((a - b).abs() / b < 1e-8, "s={s}: {a} vs {b}");
        }
    }

    #[test]
    fn mollifier_mass_and_transform() {
        let e = engine();
        assert!((e.f_hat(0.0) - 1.0).abs() < 1e-10);
        let (_, table) = e.f_hat_table();
        assert!(table.iter().all(|v| v.abs() <= 1.0 + 1e-12));
        assert!(e.f_hat(RHO_MAX).abs() < 1e-7);
    }

    #[test]
    fn self_convolution_closed_form() {
        let a = 0.3;
        for rho in [0.0, 1e-3, 0.5, 2.0, 40.0] {
            let direct = 4.0 * PI * Adaptive::new(1e-13).integrate(|x| 1.0 / (a * a + rho * rho * x * (1.0 - x)), 0.0, 1.0).unwrap();
            let closed = brownian_self_convolution(rho, a);
            assert!((direct - closed).abs() / closed < 1e-9, "rho={rho}");
        }
    }

    #[test]
    fn first_chain_three_ways() {
        let e = engine();
        let eps = 0.25;
        let real = e.chains_real(1, eps).unwrap()[0];
        let hankel = e.chains_fourier(1, eps).unwrap()[0];
        let spectral = e.chain1_spectral(eps);
        assert!((real - hankel).abs() / hankel < 1e-6);
        assert!((spectral - hankel).abs() / hankel < 1e-10);
        assert!(hankel <= e.chain1_bound(eps).unwrap());
    }

    #[test]
    fn higher_chains_agree() {
        let e = engine();
        let r = dual_route_check(e, 3, 0.125, 0.5).unwrap();
        assert!(r.ch_rel_err.iter().all(|&x| x < 1e-6), "{:?}", r.ch_rel_err);
        assert!(r.cy2_rel_err < 1e-5, "{} vs {}", r.cy2_real, r.cy2_fourier);
    }

    #[test]
    fn grid_refinement() {
        let coarse = ChainEngine::new(ContinuumSpec { nodes: 64, inner: 48, ..ContinuumSpec::brownian(1.0).unwrap() }).unwrap();
        let eps = 2f64.powi(-10);
        let a = coarse.chains_real(3, eps).unwrap();
        let b = engine().chains_real(3, eps).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() / y < 1e-7, "{x} vs {y}");
        }
    }

    #[test]
    fn log_corrected_runs() {
        let spec = ContinuumSpec::new(Exponent::parse("log:1").unwrap(), 1.0).unwrap();
        let e = ChainEngine::new(spec).unwrap();
        let c = e.chains(2, 0.25).unwrap();
        assert!(c.iter().all(|&v| v > 0.0));
        assert!(e.chains_real(1, 0.25).is_err());
        assert!(Exponent::parse("cauchy").is_err());
    }
}
