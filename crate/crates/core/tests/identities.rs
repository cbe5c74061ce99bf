use interlace_core::lattice::{GreenTable, Site, WalkSpec};
use interlace_core::oracle::crosscheck::rilt_moment_crosscheck;
use interlace_core::oracle::decomposition::decomposition_batch;
use interlace_core::oracle::iso::{iso_verify_exact, iso_verify_mc, rilt_observable};
use interlace_core::oracle::MomentOracle;
use interlace_core::sim::SoupSampler;
use proptest::prelude::*;

fn oracle(d: usize, kappa: f64, sites: &[Site]) -> MomentOracle {
    let spec = WalkSpec::nearest_neighbor(d, kappa).unwrap();
    MomentOracle::new(GreenTable::covering(&spec, sites, 1e-12).unwrap())
}

#[test]
fn isomorphism_exact_in_two_dimensions() {
    let sites = [Site::ORIGIN, Site::new(&[1, 1])];
    let o = oracle(2, 0.3, &sites);
    for alpha in [0.0, 0.4, 1.3] {
        assert!(iso_verify_exact(&o, 1, &sites, alpha, 4).unwrap().pass);
        assert!(iso_verify_exact(&o, 2, &sites, alpha, 2).unwrap().pass);
    }
}

#[test]
fn isomorphism_exact_rejects_degree_overflow() {
    let sites = [Site::ORIGIN];
    let o = oracle(1, 1.0, &sites);
    assert!(iso_verify_exact(&o, 3, &sites, 1.0, 2).is_err());
}

#[test]
fn isomorphism_monte_carlo_n3() {
    let spec = WalkSpec::nearest_neighbor(1, 1.0).unwrap();
    let sampler = SoupSampler::new(&spec, &[Site::ORIGIN], 1e-12).unwrap();
    let r = iso_verify_mc(&sampler, 3, 0.9, 1, 100_000, 31).unwrap();
    assert!(r.pass, "{:?}", r.cases);
    // n = 3 at order 1 is within the degree bounds, so the exact target is used.
    assert!(r.cases[0].exact.is_some());
}

#[test]
fn decomposition_in_three_dimensions() {
    let spec = WalkSpec::nearest_neighbor(3, 0.2).unwrap();
    let sampler = SoupSampler::new(&spec, &[Site::ORIGIN, Site::new(&[1, 0, 0]), Site::new(&[0, 1, 0])], 1e-10).unwrap();
    let b = decomposition_batch(&sampler, 4.0, Site::new(&[1, 0, 0]), 4, 100, 3).unwrap();
    assert!(b.pass);
    assert!(b.max_trajectories_at_site >= 2);
}

#[test]
fn crosscheck_up_to_five() {
    let sites = [Site::ORIGIN, Site::new(&[1])];
    let o = oracle(1, 0.7, &sites);
    let r = rilt_moment_crosscheck(&o, 5, &sites, 1.1).unwrap();
    assert!(r.labelled_agrees && r.segments_agrees && r.single_point_means_ok);
    let two = r.cases.iter().find(|c| c.profile == vec![2]).unwrap();
    assert!((two.literal_ratio - 2.0).abs() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn renormalized_means_are_powers_of_alpha(alpha in 0.0f64..3.0, n in 1u32..=4, kappa in 0.2f64..2.0) {
        let x = Site::ORIGIN;
        let o = oracle(2, kappa, &[x]);
        let obs = rilt_observable(x, n, o.table.u0).unwrap();
        let m = o.expectation(&obs, alpha).unwrap();
        let want = alpha.powi(n as i32);
        prop_assert!((m - want).abs() <= 1e-10 * (1.0 + o.table.u0 + alpha).powi(n as i32));
    }

    #[test]
    fn alpha_grading_reconstructs(alpha in 0.0f64..2.0, k in 1usize..=5, seed in 0u64..1000) {
        let sites = [Site::ORIGIN, Site::new(&[1]), Site::new(&[-1]), Site::new(&[2])];
        let o = oracle(1, 0.5, &sites);
        let pts: Vec<Site> = (0..k).map(|i| sites[((seed >> (2 * i)) & 3) as usize]).collect();
        let c = o.soup_moment_coeffs(&pts).unwrap();
        prop_assert_eq!(c[0], 0.0);
        prop_assert_eq!(c[k], 1.0);
        let rebuilt: f64 = c.iter().enumerate().map(|(j, cj)| cj * alpha.powi(j as i32)).sum();
        let direct = o.soup_moment(&pts, alpha).unwrap();
        prop_assert!((rebuilt - direct).abs() <= 1e-12 * (1.0 + direct.abs()));
    }
}
