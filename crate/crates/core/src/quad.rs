//! Quadrature helpers shared by the lattice and continuum modules.
//!
//! Two tools live here: composite Gauss-Legendre node sets (fixed grids that
//! are reused across many integrands) and an adaptive bisection driver built
//! on a pair of Gauss-Legendre rules.

use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadError {
    #[error("adaptive quadrature did not converge on [{a}, {b}]: estimate {estimate}, error {error} (tolerance {tolerance})")]
    NoConvergence {
        a: f64,
        b: f64,
        estimate: f64,
        error: f64,
        tolerance: f64,
    },
    #[error("non-finite integrand value at x = {0}")]
    NonFinite(f64),
}

/// Gauss-Legendre nodes and weights on [-1, 1], nodes ascending.
pub fn reference_rule(order: usize) -> Vec<(f64, f64)> {
    let order = NonZeroUsize::new(order).expect("quadrature order must be positive");
    let mut rule = GaussLegendre::new(order).as_node_weight_pairs().to_vec();
    rule.sort_by(|a, b| a.0.total_cmp(&b.0));
    rule
}

/// A fixed composite Gauss-Legendre grid: `nodes[i]` carries weight `weights[i]`.
#[derive(Debug, Clone)]
pub struct Grid {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Grid {
    /// Composite rule with `order` nodes on every panel between consecutive breakpoints.
    pub fn composite(breaks: &[f64], order: usize) -> Self {
        let rule = reference_rule(order);
        let mut nodes = Vec::with_capacity(rule.len() * breaks.len());
        let mut weights = Vec::with_capacity(rule.len() * breaks.len());
        for w in breaks.windows(2) {
            let (a, b) = (w[0], w[1]);
            let half = 0.5 * (b - a);
            let mid = 0.5 * (b + a);
            for &(x, wt) in &rule {
                nodes.push(mid + half * x);
                weights.push(half * wt);
            }
        }
        Self { nodes, weights }
    }

    /// Evenly spaced panels on [a, b].
    pub fn uniform(a: f64, b: f64, panels: usize, order: usize) -> Self {
        let breaks: Vec<f64> = (0..=panels)
            .map(|i| a + (b - a) * i as f64 / panels as f64)
            .collect();
        Self::composite(&breaks, order)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }

    /// Concatenate two grids (their supports should not overlap).
    pub fn join(mut self, other: Grid) -> Self {
        self.nodes.extend(other.nodes);
        self.weights.extend(other.weights);
        self
    }
}

/// Adaptive integration by interval bisection.
///
/// Each interval is estimated with a 10-point and a 21-point Gauss-Legendre
/// rule; intervals whose two estimates disagree by more than their share of
/// the tolerance are split.
#[derive(Debug, Clone)]
pub struct Adaptive {
    coarse: Vec<(f64, f64)>,
    fine: Vec<(f64, f64)>,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_depth: u32,
}

impl Adaptive {
    pub fn new(rel_tol: f64) -> Self {
        Self {
            coarse: reference_rule(10),
            fine: reference_rule(21),
            rel_tol,
            abs_tol: 0.0,
            max_depth: 48,
        }
    }

    pub fn with_abs_tol(mut self, abs_tol: f64) -> Self {
        self.abs_tol = abs_tol;
        self
    }

    fn apply(rule: &[(f64, f64)], f: &mut impl FnMut(f64) -> f64, a: f64, b: f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (b + a);
        half * rule.iter().map(|&(x, w)| w * f(mid + half * x)).sum::<f64>()
    }

    /// Integrate `f` over [a, b].
    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64, a: f64, b: f64) -> Result<f64, QuadError> {
        if a == b {
            return Ok(0.0);
        }
        // A rough global scale for the relative tolerance.
        let scale = Self::apply(&self.fine, &mut f, a, b).abs();
        if !scale.is_finite() {
            return Err(QuadError::NonFinite(0.5 * (a + b)));
        }
        let mut total = 0.0;
        let mut stack = vec![(a, b, 0u32)];
        let width = (b - a).abs();
        while let Some((lo, hi, depth)) = stack.pop() {
            let coarse = Self::apply(&self.coarse, &mut f, lo, hi);
            let fine = Self::apply(&self.fine, &mut f, lo, hi);
            if !fine.is_finite() {
                return Err(QuadError::NonFinite(0.5 * (lo + hi)));
            }
            let err = (fine - coarse).abs();
            let share = (hi - lo).abs() / width;
            let tol = (self.rel_tol * scale).max(self.abs_tol) * share.max(1e-3);
            if err <= tol || err <= 1e-15 * fine.abs() {
                total += fine;
            } else if depth >= self.max_depth {
                return Err(QuadError::NoConvergence {
                    a: lo,
                    b: hi,
                    estimate: fine,
                    error: err,
                    tolerance: tol,
                });
            } else {
                let mid = 0.5 * (lo + hi);
                stack.push((mid, hi, depth + 1));
                stack.push((lo, mid, depth + 1));
            }
        }
        Ok(total)
    }

    /// Integrate over [a, ∞) by splitting into geometrically growing pieces
    /// until a piece contributes less than the tolerance.
    pub fn integrate_to_infinity(
        &self,
        mut f: impl FnMut(f64) -> f64,
        a: f64,
        first_width: f64,
    ) -> Result<f64, QuadError> {
        let mut total = 0.0;
        let mut lo = a;
        let mut width = first_width;
        let mut quiet = 0;
        for _ in 0..200 {
            let piece = self.integrate(&mut f, lo, lo + width)?;
            total += piece;
            if piece.abs() <= self.rel_tol * total.abs() * 1e-2 {
                quiet += 1;
                if quiet >= 3 {
                    return Ok(total);
                }
            } else {
                quiet = 0;
            }
            lo += width;
            width *= 2.0;
        }
        Err(QuadError::NoConvergence {
            a,
            b: lo,
            estimate: total,
            error: f64::NAN,
            tolerance: self.rel_tol,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn composite_grid_integrates_polynomials() {
        let grid = Grid::uniform(0.0, 2.0, 3, 4);
        let v = grid.integrate(|x| x * x * x);
        assert!((v - 4.0).abs() < 1e-13);
    }

    #[test]
    fn adaptive_handles_log_singularity() {
        let q = Adaptive::new(1e-12);
        let v = q.integrate(|x: f64| x.ln(), 0.0, 1.0).unwrap();
        assert!((v + 1.0).abs() < 1e-10, "{v}");
    }

    #[test]
    fn adaptive_tail() {
        let q = Adaptive::new(1e-12);
        let v = q.integrate_to_infinity(|x: f64| (-x).exp(), 0.0, 1.0).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
    }
}
