//! Running mean / standard error and z-scores for Monte Carlo checks.

use rayon::prelude::*;
use serde::Serialize;

/// Welford accumulator.
#[derive(Debug, Clone, Default)]
pub struct Running {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Running {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    /// Combine two accumulators (Chan et al.).
    pub fn merge(&mut self, other: &Running) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = other.clone();
            return;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        self.mean += delta * other.n as f64 / n as f64;
        self.m2 += other.m2 + delta * delta * (self.n as f64) * (other.n as f64) / n as f64;
        self.n = n;
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }

    pub fn std_err(&self) -> f64 {
        if self.n == 0 {
            f64::INFINITY
        } else {
            (self.variance() / self.n as f64).sqrt()
        }
    }

    pub fn estimate(&self) -> Estimate {
        Estimate { mean: self.mean(), se: self.std_err(), n: self.n }
    }
}

impl FromIterator<f64> for Running {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut r = Running::new();
        for x in iter {
            r.push(x);
        }
        r
    }
}

#[derive(Debug, Clone, Copy, Serialize, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub se: f64,
    pub n: u64,
}

impl Estimate {
    /// (mean − target)/se. A zero standard error gives 0 on an exact hit and ±∞ otherwise.
    pub fn z(&self, target: f64) -> f64 {
        let diff = self.mean - target;
        if self.se > 0.0 {
            diff / self.se
        } else if diff.abs() <= 1e-12 * target.abs().max(1.0) {
            0.0
        } else {
            diff.signum() * f64::INFINITY
        }
    }
}

/// Evaluate `observe(i)` for i in 0..samples and accumulate each component.
/// Fixed-size chunks run in parallel and are merged in index order, so the
/// result does not depend on the thread schedule.
pub fn parallel_estimates<E, F>(samples: u64, observe: F) -> Result<Vec<Estimate>, E>
where
    E: Send,
    F: Fn(u64) -> Result<Vec<f64>, E> + Sync,
{
    const CHUNK: u64 = 2048;
    let chunks: Vec<u64> = (0..samples.div_ceil(CHUNK)).collect();
    let partial: Result<Vec<Vec<Running>>, E> = chunks
        .par_iter()
        .map(|&c| {
            let mut acc: Vec<Running> = Vec::new();
            for i in c * CHUNK..((c + 1) * CHUNK).min(samples) {
                let obs = observe(i)?;
                if acc.is_empty() {
                    acc = vec![Running::new(); obs.len()];
                }
                for (a, v) in acc.iter_mut().zip(obs) {
                    a.push(v);
                }
            }
            Ok(acc)
        })
        .collect();
    let mut total: Vec<Running> = Vec::new();
    for part in partial? {
        if total.is_empty() {
            total = part;
        } else {
            for (t, p) in total.iter_mut().zip(&part) {
                t.merge(p);
            }
        }
    }
    Ok(total.iter().map(Running::estimate).collect())
}

/// Scale-aware relative error: |a − b| / max(|a|, |b|, floor).
pub fn rel_err(a: f64, b: f64, floor: f64) -> f64 {
    let den = a.abs().max(b.abs()).max(floor);
    if den == 0.0 {
        0.0
    } else {
        (a - b).abs() / den
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn known_sample() {
        let r: Running = [1.0, 2.0, 3.0, 4.0].into_iter().collect();
        assert_eq!(r.mean(), 2.5);
        assert!((r.variance() - 5.0 / 3.0).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn merge_equals_sequential(xs in prop::collection::vec(-1e3f64..1e3, 1..60), cut in 0usize..60) {
            let cut = cut.min(xs.len());
            let all: Running = xs.iter().copied().collect();
            let mut left: Running = xs[..cut].iter().copied().collect();
            let right: Running = xs[cut..].iter().copied().collect();
            left.merge(&right);
            prop_assert_eq!(left.count(), all.count());
            prop_assert!((left.mean() - all.mean()).abs() < 1e-9);
            prop_assert!((left.variance() - all.variance()).abs() < 1e-6 * all.variance().max(1.0));
        }
    }
}
