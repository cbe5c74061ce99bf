use interlace_core::lattice::{box_sites, EquilibriumData, GreenTable, Site, WalkSpec};
use interlace_core::rng;
use interlace_core::sim::Walker;
use interlace_core::stats::parallel_estimates;
use rand::RngExt;

#[test]
fn green_matches_occupation_time_2d() {
    let spec = WalkSpec::nearest_neighbor(2, 0.5).unwrap();
    let x = Site::new(&[1, 0]);
    let u = spec.green(x, 1e-12).unwrap();
    let walker = Walker::new(&spec);
    let est = parallel_estimates(1_000_000, |i| -> Result<Vec<f64>, ()> {
        let seg = walker.forward_walk(Site::ORIGIN, &mut rng::stream(41, i, 0));
        Ok(vec![seg.iter().filter(|(s, _)| *s == x).map(|(_, t)| t).sum()])
    })
    .unwrap();
    assert!(est[0].z(u).abs() < 4.0, "MC {} ± {} vs {}", est[0].mean, est[0].se, u);
}

#[test]
fn green_is_even_and_peaked_at_origin() {
    for (d, kappa) in [(1, 0.3), (2, 0.5), (3, 0.1)] {
        let spec = WalkSpec::nearest_neighbor(d, kappa).unwrap();
        let table = GreenTable::compute(&spec, 2, 1e-10).unwrap();
        for x in box_sites(d, 2) {
            let (a, b) = (table.u(x), table.u(-x));
            assert!((a - b).abs() <= 1e-12 * a);
            assert!(a > 0.0 && a <= table.u0);
        }
    }
}

#[test]
fn capacity_of_two_points_increases_with_distance() {
    let spec = WalkSpec::nearest_neighbor(2, 0.5).unwrap();
    let table = GreenTable::compute(&spec, 8, 1e-11).unwrap();
    let caps: Vec<f64> = [1, 2, 4, 8]
        .iter()
        .map(|&r| EquilibriumData::solve(&table, &[Site::ORIGIN, Site::new(&[r, 0])]).unwrap().cap)
        .collect();
    assert!(caps.windows(2).all(|w| w[1] > w[0]));
    let limit = 2.0 / table.u0;
    assert!(caps[3] < limit && caps[3] > 0.99 * limit);
    // Closed form for two points: 2/(u0 + u(x)).
    for (&r, &c) in [1, 2, 4, 8].iter().zip(&caps) {
        let want = 2.0 / (table.u0 + table.u(Site::new(&[r, 0])));
        assert!((c - want).abs() < 1e-12 * want);
    }
}

#[test]
fn hitting_probability_matches_simulation() {
    let spec = WalkSpec::nearest_neighbor(2, 0.5).unwrap();
    let k = [Site::ORIGIN, Site::new(&[1, 0]), Site::new(&[0, 1])];
    let table = GreenTable::compute(&spec, 6, 1e-11).unwrap();
    let eq = EquilibriumData::solve(&table, &k).unwrap();
    assert!(eq.residual(&table) < 1e-10);
    let walker = Walker::new(&spec);
    let mut pick = rng::stream(9, 0, 0);
    for trial in 0..50 {
        let y = loop {
            let y = Site::new(&[pick.random_range(-3..=3), pick.random_range(-3..=3)]);
            if !k.contains(&y) {
                break y;
            }
        };
        let p = eq.hitting_probability(&table, y).unwrap();
        assert!(p <= 1.0 + 1e-10);
        if trial < 3 {
            let est = parallel_estimates(20_000, |i| -> Result<Vec<f64>, ()> {
                let seg = walker.forward_walk(y, &mut rng::stream(10 + trial, i, 0));
                Ok(vec![if seg.iter().any(|(s, _)| k.contains(s)) { 1.0 } else { 0.0 }])
            })
            .unwrap();
            assert!(est[0].z(p).abs() < 4.0, "y={y:?}: {} vs {p}", est[0].mean);
        }
    }
}

#[test]
fn equilibrium_residual_for_sixteen_sites() {
    let spec = WalkSpec::nearest_neighbor(2, 0.2).unwrap();
    let k: Vec<Site> = box_sites(2, 1).into_iter().chain([Site::new(&[3, 0]), Site::new(&[0, 3]), Site::new(&[-3, 0]), Site::new(&[2, 2]), Site::new(&[-2, -2]), Site::new(&[2, -2]), Site::new(&[-2, 2])]).collect();
    assert_eq!(k.len(), 16);
    let table = GreenTable::covering(&spec, &k, 1e-12).unwrap();
    let eq = EquilibriumData::solve(&table, &k).unwrap();
    assert!(eq.residual(&table) < 1e-10);
    assert!(eq.weights.iter().all(|&w| w >= 0.0));
}
