use interlace_core::field::{wick_power, CovarianceFactor};
use interlace_core::lattice::{box_sites, GreenTable, WalkSpec};
use interlace_core::oracle::iso::wick_observable;
use interlace_core::oracle::MomentOracle;
use interlace_core::rng;
use interlace_core::stats::parallel_estimates;

const Z: f64 = 4.0;
const SAMPLES: u64 = 100_000;

fn setup() -> (GreenTable, CovarianceFactor, Vec<interlace_core::lattice::Site>) {
    let spec = WalkSpec::nearest_neighbor(2, 1.0).unwrap();
    let window = box_sites(2, 1);
    let table = GreenTable::covering(&spec, &window, 1e-12).unwrap();
    let factor = CovarianceFactor::new(&table, &window).unwrap();
    (table, factor, window)
}

#[test]
fn empirical_covariance() {
    let (table, factor, window) = setup();
    let pairs: Vec<(usize, usize)> = (0..window.len()).flat_map(|i| (i..window.len()).map(move |j| (i, j))).collect();
    let est = parallel_estimates(SAMPLES, |i| -> Result<Vec<f64>, ()> {
        let g = factor.sample(&mut rng::stream(21, i, 0)).values;
        Ok(pairs.iter().map(|&(a, b)| g[a] * g[b]).collect())
    })
    .unwrap();
    for (e, &(a, b)) in est.iter().zip(&pairs) {
        let u = table.u(window[a] - window[b]);
        assert!(e.z(u).abs() < Z, "({a},{b}): {} vs {u}", e.mean);
    }
}

#[test]
fn wick_powers_are_centered() {
    let (table, factor, _) = setup();
    let u0 = table.u0;
    let est = parallel_estimates(SAMPLES, |i| -> Result<Vec<f64>, ()> {
        let g = factor.sample(&mut rng::stream(22, i, 0)).values[0];
        Ok((1..=6).map(|n| wick_power(g, n, u0)).collect())
    })
    .unwrap();
    for (n, e) in est.iter().enumerate() {
        assert!(e.z(0.0).abs() < Z, "n={}: {} ± {}", n + 1, e.mean, e.se);
    }
}

#[test]
fn wick_orthogonality() {
    let (table, factor, window) = setup();
    let u0 = table.u0;
    let (x, y) = (window[0], window[4]);
    let (ix, iy) = (0, 4);
    let oracle = MomentOracle::new(table.clone());
    let mut targets = Vec::new();
    for n in 0..=4 {
        for m in 0..=4 {
            let obs = &wick_observable(x, n, u0) * &wick_observable(y, m, u0);
            let exact = oracle.expectation(&obs, 0.0).unwrap();
            let closed = if n == m { (1..=n).product::<u32>() as f64 * table.u(x - y).powi(n as i32) } else { 0.0 };
            assert!((exact - closed).abs() < 1e-12 * (1.0 + closed.abs()), "({n},{m})");
            targets.push((n, m, exact));
        }
    }
    let est = parallel_estimates(SAMPLES, |i| -> Result<Vec<f64>, ()> {
        let g = factor.sample(&mut rng::stream(23, i, 0)).values;
        Ok(targets.iter().map(|&(n, m, _)| wick_power(g[ix], n, u0) * wick_power(g[iy], m, u0)).collect())
    })
    .unwrap();
    for (e, &(n, m, t)) in est.iter().zip(&targets) {
        assert!(e.z(t).abs() < Z || (n == 0 && m == 0), "({n},{m}): {} ± {} vs {t}", e.mean, e.se);
    }
}

#[test]
fn reconstruction_on_a_larger_window() {
    let spec = WalkSpec::nearest_neighbor(3, 0.3).unwrap();
    let window = box_sites(3, 1);
    let table = GreenTable::covering(&spec, &window, 1e-12).unwrap();
    let factor = CovarianceFactor::new(&table, &window).unwrap();
    assert!(factor.reconstruction_residual() < 1e-10);
}
