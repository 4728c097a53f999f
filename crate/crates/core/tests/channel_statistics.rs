use multiris_core::channel::stream::{tag, StreamKey};
use multiris_core::channel::{
    complex_gaussian, direct_variance, pathloss, sample_direct, sample_realization, steering_vector, ClusterConfig,
    Orientation, Position3D, RisGeometry,
};
use multiris_core::harness::SetupSpec;
use num_complex::Complex64;
use proptest::prelude::*;

fn empirical_variance(samples: &[Complex64]) -> f64 {
    samples.iter().map(|c| c.norm_sqr()).sum::<f64>() / samples.len() as f64
}

#[test]
fn direct_link_variance_with_and_without_wall() {
    for id in [2, 3] {
        let scene = SetupSpec::preset(id).unwrap().scene().unwrap();
        let expected = pathloss(10.0f64.hypot(1.0), 2.0, 3.5e9).unwrap() * if id == 3 { 0.1 } else { 1.0 };
        assert!((direct_variance(&scene).unwrap() - expected).abs() <= 1e-12 * expected);

        let mut rng = StreamKey::new(11, id as u64).rng(tag::DIRECT);
        let draws: Vec<Complex64> = (0..100_000).map(|_| sample_direct(&scene, &mut rng).unwrap()).collect();
        let v = empirical_variance(&draws);
        assert!((v / expected - 1.0).abs() < 0.03, "setup {id}: {v} vs {expected}");
        let mean = draws.iter().sum::<Complex64>() / draws.len() as f64;
        assert!(mean.norm() < 0.02 * expected.sqrt());
    }
}

#[test]
fn unit_gaussian_power() {
    let mut rng = StreamKey::new(3, 0).rng(0);
    let draws: Vec<Complex64> = (0..100_000).map(|_| complex_gaussian(&mut rng, 1.0)).collect();
    assert!((empirical_variance(&draws) - 1.0).abs() < 0.03);
}

#[test]
fn replay_is_bit_identical() {
    let scene = SetupSpec::preset(1).unwrap().scene().unwrap();
    let cc = ClusterConfig::default();
    for i in 0..5 {
        let a = sample_realization(&scene, &cc, StreamKey::new(42, i)).unwrap();
        let b = sample_realization(&scene, &cc, StreamKey::new(42, i)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, sample_realization(&scene, &cc, StreamKey::new(43, i)).unwrap());
    }
}

#[test]
fn incident_links_of_different_ris_are_uncorrelated() {
    let scene = SetupSpec::preset(1).unwrap().scene().unwrap();
    let cc = ClusterConfig { los_probability: 0.0, ..ClusterConfig::default() };
    let n = 4000;
    let (mut cross, mut p1, mut p2) = (Complex64::new(0.0, 0.0), 0.0, 0.0);
    for i in 0..n {
        let r = sample_realization(&scene, &cc, StreamKey::new(5, i)).unwrap();
        let (a, b) = (r.h[0][0], r.h[1][0]);
        cross += a * b.conj();
        p1 += a.norm_sqr();
        p2 += b.norm_sqr();
    }
    let rho = cross.norm() / (p1 * p2).sqrt();
    assert!(rho < 0.05, "correlation {rho}");
}

#[test]
fn reflect_link_power_is_deterministic() {
    let scene = SetupSpec::preset(1).unwrap().scene().unwrap();
    let cc = ClusterConfig::default();
    let d = scene.ris[2].position.distance(scene.rx);
    let expected = pathloss(d, 2.0, 3.5e9).unwrap();
    for i in 0..50 {
        let r = sample_realization(&scene, &cc, StreamKey::new(9, i)).unwrap();
        assert!(r.g[2].iter().all(|x| (x.norm_sqr() / expected - 1.0).abs() < 1e-12));
    }
}

proptest! {
    #[test]
    fn steering_entries_have_unit_modulus(
        rows in 1usize..9,
        cols in 1usize..9,
        spacing in 0.05f64..2.0,
        az in -1.5f64..1.5,
        el in -1.5f64..1.5,
        heading in 0.0f64..std::f64::consts::TAU,
    ) {
        let o = Orientation::vertical_facing(Position3D::new(heading.cos(), heading.sin(), 0.0)).unwrap();
        let geom = RisGeometry::new(rows, cols, spacing, o).unwrap();
        let a = steering_vector(&geom, az, el);
        prop_assert_eq!(a.len(), rows * cols);
        for x in a {
            prop_assert!((x.norm() - 1.0).abs() <= 4.0 * f64::EPSILON);
        }
    }
}
