use interlace_core::lattice::{Site, WalkSpec};
use interlace_core::oracle::MomentOracle;
use interlace_core::rng;
use interlace_core::sim::{exp_moment_check, local_time_field, SoupSampler, Walker};
use interlace_core::stats::parallel_estimates;

const Z: f64 = 4.0;

#[test]
fn forward_walk_lifetime_and_occupation() {
    let spec = WalkSpec::nearest_neighbor(3, 0.4).unwrap();
    let walker = Walker::new(&spec);
    let x = Site::new(&[1, 1, 0]);
    let u = spec.green(x, 1e-10).unwrap();
    let est = parallel_estimates(100_000, |i| -> Result<Vec<f64>, ()> {
        let seg = walker.forward_walk(Site::ORIGIN, &mut rng::stream(3, i, 0));
        let life: f64 = seg.iter().map(|(_, t)| t).sum();
        let occ: f64 = seg.iter().filter(|(s, _)| *s == x).map(|(_, t)| t).sum();
        Ok(vec![life, occ])
    })
    .unwrap();
    assert!(est[0].z(1.0 / 0.4).abs() < Z, "lifetime {}", est[0].mean);
    assert!(est[1].z(u).abs() < Z, "occupation {} vs {u}", est[1].mean);
}

#[test]
fn backward_attempt_frequencies() {
    let spec = WalkSpec::nearest_neighbor(2, 0.5).unwrap();
    let k = [Site::ORIGIN, Site::new(&[1, 0])];
    let sampler = SoupSampler::new(&spec, &k, 1e-12).unwrap();
    let e = sampler.eq.weight(Site::ORIGIN).unwrap();
    let mut r = rng::stream(77, 0, 0);
    let n = 100_000;
    let (mut accepted, mut empty) = (0u64, 0u64);
    for _ in 0..n {
        if let Some(seg) = sampler.walker.backward_attempt(&k, Site::ORIGIN, &mut r) {
            accepted += 1;
            assert!(seg.iter().all(|(s, _)| !k.contains(s)));
            if seg.is_empty() {
                empty += 1;
            }
        }
    }
    let binom_z = |hits: u64, trials: u64, p: f64| (hits as f64 / trials as f64 - p) / (p * (1.0 - p) / trials as f64).sqrt();
    assert!(binom_z(accepted, n, e / 1.5).abs() < Z);
    // An immediately killed attempt is always accepted.
    assert!(binom_z(empty, n, 0.5 / 1.5).abs() < Z);
    assert!(binom_z(empty, accepted, 0.5 / e).abs() < Z);
}

#[test]
fn trajectory_count_is_poisson_mean() {
    let spec = WalkSpec::nearest_neighbor(2, 0.5).unwrap();
    let sampler = SoupSampler::new(&spec, &[Site::ORIGIN, Site::new(&[0, 2])], 1e-12).unwrap();
    let alpha = 1.7;
    let est = sampler.monte_carlo(alpha, 5, 100_000, |s| vec![s.count as f64]).unwrap();
    assert!(est[0].z(alpha * sampler.eq.cap).abs() < Z);
}

#[test]
fn third_moment_at_three_sites() {
    let spec = WalkSpec::nearest_neighbor(2, 0.5).unwrap();
    let k = [Site::ORIGIN, Site::new(&[1, 0]), Site::new(&[1, 1])];
    let sampler = SoupSampler::new(&spec, &k, 1e-12).unwrap();
    let alpha = 0.8;
    let est = sampler
        .monte_carlo(alpha, 6, 100_000, |s| {
            let f = local_time_field(s, &k);
            vec![f.values[0] * f.values[1] * f.values[2], f.values[0] * f.values[2]]
        })
        .unwrap();
    let oracle = MomentOracle::new(sampler.table.clone());
    let t3 = oracle.soup_moment(&k, alpha).unwrap();
    let t2 = oracle.soup_moment(&[k[0], k[2]], alpha).unwrap();
    assert!(est[0].z(t3).abs() < Z, "{} vs {t3}", est[0].mean);
    assert!(est[1].z(t2).abs() < Z, "{} vs {t2}", est[1].mean);
}

#[test]
fn exponential_moment_one_dimension() {
    let spec = WalkSpec::nearest_neighbor(1, 1.0).unwrap();
    let sampler = SoupSampler::new(&spec, &[Site::ORIGIN], 1e-12).unwrap();
    let delta = 0.5 * 3f64.sqrt();
    let r = exp_moment_check(&sampler, Site::ORIGIN, 1.0, delta, 100_000, 8).unwrap();
    let want = (delta / (1.0 - delta / 3f64.sqrt())).exp();
    assert!((r.target - want).abs() < 1e-9 * want);
    assert!(r.z.abs() < Z, "{} ± {} vs {}", r.estimate.mean, r.estimate.se, r.target);
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let spec = WalkSpec::nearest_neighbor(2, 0.5).unwrap();
    let sampler = SoupSampler::new(&spec, &[Site::ORIGIN], 1e-12).unwrap();
    let run = || sampler.monte_carlo(1.0, 12, 10_000, |s| vec![local_time_field(s, &[Site::ORIGIN]).values[0]]).unwrap();
    let a = run();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let b = pool.install(run);
    assert_eq!(a[0].mean.to_bits(), b[0].mean.to_bits());
    assert_eq!(a[0].se.to_bits(), b[0].se.to_bits());
}
