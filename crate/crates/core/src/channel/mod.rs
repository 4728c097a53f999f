//! Channel synthesis for the TX → RIS → RX links and the direct TX → RX link.
//!
//! * `g_m` (RIS → RX) is pure line-of-sight: one steering vector scaled by
//!   `sqrt(G * L)` and rotated by a uniform random phase.
//! * `h_m` (TX → RIS) is Ricean: `S` clustered scattered rays normalized by
//!   `S^{-1/2}`, plus a Bernoulli-gated line-of-sight term built like `g_m`.
//! * `h_0` is Rayleigh with variance equal to the TX–RX path loss, reduced by
//!   an optional wall penetration loss.

mod geometry;
pub mod stream;

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, TAU};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

pub use geometry::{Orientation, Position3D, Ris, RisGeometry};
pub use stream::StreamKey;

use crate::error::{domain, Result};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Free-space reference loss at one meter, `(c / (4 pi f_c))^2`.
pub fn reference_loss(carrier_frequency: f64) -> f64 {
    (SPEED_OF_LIGHT / (4.0 * PI * carrier_frequency)).powi(2)
}

/// Log-distance path loss `L(d) = L_ref(f_c) * d^(-exponent)` as a linear power ratio.
pub fn pathloss(distance: f64, exponent: f64, carrier_frequency: f64) -> Result<f64> {
    if !(distance > 0.0 && distance.is_finite()) {
        return Err(domain(format!("path loss needs a positive distance, got {distance}")));
    }
    if !(exponent > 0.0 && carrier_frequency > 0.0) {
        return Err(domain("path loss exponent and carrier frequency must be positive"));
    }
    Ok(reference_loss(carrier_frequency) * distance.powf(-exponent))
}

/// Element radiation pattern as a function of elevation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RadiationPattern {
    Isotropic,
    /// `cos^n(elevation)`, zero at and beyond the grazing angle.
    CosinePower(f64),
}

impl RadiationPattern {
    pub fn gain(&self, elevation: f64) -> f64 {
        match *self {
            RadiationPattern::Isotropic => 1.0,
            RadiationPattern::CosinePower(n) => {
                if elevation.abs() >= FRAC_PI_2 {
                    return 0.0;
                }
                elevation.cos().max(0.0).powf(n)
            }
        }
    }
}

/// Array response of a rectangular RIS, row-major.
pub fn steering_vector(geom: &RisGeometry, azimuth: f64, elevation: f64) -> Vec<Complex64> {
    let horizontal = elevation.cos() * azimuth.sin();
    let vertical = elevation.sin();
    let k = TAU * geom.spacing_wavelengths;
    let mut out = Vec::with_capacity(geom.len());
    for p in 0..geom.rows {
        for q in 0..geom.cols {
            let phase = k * (p as f64 * horizontal + q as f64 * vertical);
            out.push(Complex64::from_polar(1.0, phase));
        }
    }
    out
}

/// Scene geometry and propagation constants.
#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub tx: Position3D,
    pub rx: Position3D,
    pub ris: Vec<Ris>,
    pub carrier_frequency: f64,
    pub pathloss_exponent: f64,
    pub pattern: RadiationPattern,
    /// Extra attenuation of the direct link in dB; zero without a wall.
    pub direct_penetration_loss_db: f64,
}

impl Scene {
    pub fn validate(&self) -> Result<()> {
        if self.ris.is_empty() {
            return Err(domain("a scene needs at least one RIS"));
        }
        if !(self.carrier_frequency > 0.0 && self.pathloss_exponent > 0.0) {
            return Err(domain("carrier frequency and path loss exponent must be positive"));
        }
        if !(self.direct_penetration_loss_db >= 0.0) {
            return Err(domain("penetration loss must be non-negative"));
        }
        let mut nodes = vec![self.tx, self.rx];
        nodes.extend(self.ris.iter().map(|r| r.position));
        if nodes.iter().any(|p| !p.is_finite()) {
            return Err(domain("node positions must be finite"));
        }
        for (i, a) in nodes.iter().enumerate() {
            for b in &nodes[i + 1..] {
                if a.distance(*b) <= 0.0 {
                    return Err(domain("scene nodes must be pairwise distinct"));
                }
            }
        }
        Ok(())
    }

    /// Number of RISs M.
    pub fn num_ris(&self) -> usize {
        self.ris.len()
    }

    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier_frequency
    }

    /// Same scene with the RX moved.
    pub fn with_rx(&self, rx: Position3D) -> Scene {
        Scene { rx, ..self.clone() }
    }

    pub fn pathloss(&self, distance: f64) -> Result<f64> {
        pathloss(distance, self.pathloss_exponent, self.carrier_frequency)
    }

    fn ris(&self, m: usize) -> Result<&Ris> {
        self.ris.get(m).ok_or_else(|| domain(format!("RIS index {m} out of range (M = {})", self.ris.len())))
    }
}

/// Scattering model for the TX → RIS links.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterConfig {
    /// Rays per cluster; the cluster count C is its length.
    pub rays_per_cluster: Vec<usize>,
    pub azimuth_center_range: (f64, f64),
    pub elevation_center_range: (f64, f64),
    /// Standard deviation of the per-ray angular offset, radians.
    pub intra_cluster_spread: f64,
    pub los_probability: f64,
}

impl Default for ClusterConfig {
    fn default() -> Self {
        Self {
            rays_per_cluster: vec![8; 3],
            azimuth_center_range: (-FRAC_PI_2, FRAC_PI_2),
            elevation_center_range: (-FRAC_PI_4, FRAC_PI_4),
            intra_cluster_spread: 5f64.to_radians(),
            los_probability: 1.0,
        }
    }
}

impl ClusterConfig {
    pub fn num_clusters(&self) -> usize {
        self.rays_per_cluster.len()
    }

    /// Total ray count S.
    pub fn num_rays(&self) -> usize {
        self.rays_per_cluster.iter().sum()
    }

    pub fn validate(&self) -> Result<()> {
        if self.rays_per_cluster.is_empty() || self.rays_per_cluster.contains(&0) {
            return Err(domain("need at least one cluster and at least one ray per cluster"));
        }
        let (a0, a1) = self.azimuth_center_range;
        let (e0, e1) = self.elevation_center_range;
        if !(a0 <= a1 && e0 <= e1) {
            return Err(domain("angle ranges must be ordered (low, high)"));
        }
        if !(self.intra_cluster_spread >= 0.0) {
            return Err(domain("intra-cluster spread must be non-negative"));
        }
        if !(0.0..=1.0).contains(&self.los_probability) {
            return Err(domain("LOS probability must lie in [0, 1]"));
        }
        Ok(())
    }
}

/// One draw of every link.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    /// Incident channels TX → RIS m, K entries each.
    pub h: Vec<Vec<Complex64>>,
    /// Reflect channels RIS m → RX, K entries each.
    pub g: Vec<Vec<Complex64>>,
    /// Direct TX → RX channel.
    pub h0: Complex64,
}

impl ChannelRealization {
    pub fn num_ris(&self) -> usize {
        self.h.len()
    }

    pub fn is_finite(&self) -> bool {
        self.h0.is_finite() && self.h.iter().chain(&self.g).flatten().all(|c| c.is_finite())
    }
}

/// Deterministic line-of-sight vector from `ris` towards `node` with phase `eta`:
/// `sqrt(G(theta) L(d)) e^{j eta} a(phi, theta)`.
pub fn los_vector(scene: &Scene, ris: &Ris, node: Position3D, eta: f64) -> Result<Vec<Complex64>> {
    let delta = node - ris.position;
    let d = delta.norm();
    if !(d > 0.0) {
        return Err(domain("node coincides with the RIS"));
    }
    let (az, el) = ris.geometry.orientation.angles_of(delta * (1.0 / d));
    let amp = (scene.pattern.gain(el) * scene.pathloss(d)?).sqrt();
    let rot = Complex64::from_polar(amp, eta);
    Ok(steering_vector(&ris.geometry, az, el).into_iter().map(|a| rot * a).collect())
}

/// One scattered path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ray {
    /// Small-scale complex gain alpha.
    pub gain: Complex64,
    /// Amplitude `sqrt(G L)` of the path.
    pub amplitude: f64,
    pub azimuth: f64,
    pub elevation: f64,
}

/// `S^{-1/2} * sum_s alpha_s Xi_s a(phi_s, theta_s)` over the given rays.
pub fn scattered_component(geom: &RisGeometry, rays: &[Ray]) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); geom.len()];
    if rays.is_empty() {
        return out;
    }
    let kappa = (rays.len() as f64).powf(-0.5);
    for ray in rays {
        let w = ray.gain * ray.amplitude;
        for (o, a) in out.iter_mut().zip(steering_vector(geom, ray.azimuth, ray.elevation)) {
            *o += w * a;
        }
    }
    for o in &mut out {
        *o *= kappa;
    }
    out
}

/// Circularly-symmetric complex Gaussian with the given variance.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> Complex64 {
    let s = (variance / 2.0).sqrt();
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(s * re, s * im)
}

fn uniform_in<R: Rng + ?Sized>(rng: &mut R, (lo, hi): (f64, f64)) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}

/// Draws the RIS m → RX channel.
pub fn sample_g<R: Rng + ?Sized>(scene: &Scene, m: usize, rng: &mut R) -> Result<Vec<Complex64>> {
    let ris = scene.ris(m)?;
    let eta = TAU * rng.random::<f64>();
    los_vector(scene, ris, scene.rx, eta)
}

/// Draws the TX → RIS m channel.
pub fn sample_h<R: Rng + ?Sized>(scene: &Scene, m: usize, cc: &ClusterConfig, rng: &mut R) -> Result<Vec<Complex64>> {
    let ris = scene.ris(m)?;
    let d = ris.position.distance(scene.tx);
    if !(d > 0.0) {
        return Err(domain("TX coincides with the RIS"));
    }
    let loss = scene.pathloss(d)?;
    let spread = Normal::new(0.0, cc.intra_cluster_spread).map_err(|e| domain(e.to_string()))?;

    let mut rays = Vec::with_capacity(cc.num_rays());
    for &count in &cc.rays_per_cluster {
        let az_c = uniform_in(rng, cc.azimuth_center_range);
        let el_c = uniform_in(rng, cc.elevation_center_range);
        for _ in 0..count {
            let azimuth = az_c + spread.sample(rng);
            let elevation = (el_c + spread.sample(rng)).clamp(-FRAC_PI_2, FRAC_PI_2);
            let gain = complex_gaussian(rng, 1.0);
            let amplitude = (scene.pattern.gain(elevation) * loss).sqrt();
            rays.push(Ray { gain, amplitude, azimuth, elevation });
        }
    }
    let mut h = scattered_component(&ris.geometry, &rays);

    // Draw both LOS variables unconditionally so the stream layout is fixed.
    let los_present = rng.random::<f64>() < cc.los_probability;
    let eta = TAU * rng.random::<f64>();
    if los_present {
        for (x, l) in h.iter_mut().zip(los_vector(scene, ris, scene.tx, eta)?) {
            *x += l;
        }
    }
    Ok(h)
}

/// Variance of the direct link, `L(d_h) * 10^(-wall / 10)`.
pub fn direct_variance(scene: &Scene) -> Result<f64> {
    let d = scene.tx.distance(scene.rx);
    Ok(scene.pathloss(d)? * 10f64.powf(-scene.direct_penetration_loss_db / 10.0))
}

/// Draws the direct TX → RX channel.
pub fn sample_direct<R: Rng + ?Sized>(scene: &Scene, rng: &mut R) -> Result<Complex64> {
    Ok(complex_gaussian(rng, direct_variance(scene)?))
}

/// Draws a full realization. Every link reads its own substream of `key`.
pub fn sample_realization(scene: &Scene, cc: &ClusterConfig, key: StreamKey) -> Result<ChannelRealization> {
    scene.validate()?;
    cc.validate()?;
    let m_count = scene.num_ris();
    let mut h = Vec::with_capacity(m_count);
    let mut g = Vec::with_capacity(m_count);
    for m in 0..m_count {
        h.push(sample_h(scene, m, cc, &mut key.rng(stream::tag::incident(m)))?);
        g.push(sample_g(scene, m, &mut key.rng(stream::tag::reflect(m)))?);
    }
    let h0 = sample_direct(scene, &mut key.rng(stream::tag::DIRECT))?;
    Ok(ChannelRealization { h, g, h0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn facing_y() -> Orientation {
        Orientation::vertical_facing(Position3D::new(0.0, 1.0, 0.0)).unwrap()
    }

    fn small_scene(pattern: RadiationPattern) -> Scene {
        let geom = RisGeometry::new(2, 2, 0.5, facing_y()).unwrap();
        Scene {
            tx: Position3D::new(0.0, 10.0, 2.0),
            rx: Position3D::new(6.0, 8.0, 1.0),
            ris: vec![
                Ris { position: Position3D::new(4.0, 0.0, 2.0), geometry: geom },
                Ris { position: Position3D::new(8.0, 0.0, 2.0), geometry: geom },
            ],
            carrier_frequency: 3.5e9,
            pathloss_exponent: 2.0,
            pattern,
            direct_penetration_loss_db: 0.0,
        }
    }

    #[test]
    fn pathloss_power_law_ratio() {
        let a = pathloss(3.0, 2.0, 3.5e9).unwrap();
        let b = pathloss(30.0, 2.0, 3.5e9).unwrap();
        assert!((b / a - 0.01).abs() < 1e-15);
    }

    #[test]
    fn pathloss_identity_at_unit_reference() {
        // wavelength 4 pi makes the reference loss exactly one
        let f = SPEED_OF_LIGHT / (4.0 * PI);
        assert!((pathloss(1.0, 2.0, f).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn pathloss_at_twenty_meters() {
        // (299792458 / (4 pi 3.5e9))^2 / 400, evaluated by hand
        let wavelength = 299_792_458.0 / 3.5e9; // 0.085655 m
        let lref = (wavelength / (4.0 * PI)).powi(2); // 4.6460e-5
        let expected = 1.161_5e-7;
        let got = pathloss(20.0, 2.0, 3.5e9).unwrap();
        assert!((got - lref / 400.0).abs() < 1e-22);
        assert!((got - expected).abs() / expected < 1e-4, "{got}");
    }

    #[test]
    fn pathloss_rejects_non_positive_distance() {
        assert!(pathloss(0.0, 2.0, 3.5e9).is_err());
        assert!(pathloss(-1.0, 2.0, 3.5e9).is_err());
    }

    #[test]
    fn radiation_pattern_values() {
        assert_eq!(RadiationPattern::Isotropic.gain(1.2), 1.0);
        assert_eq!(RadiationPattern::CosinePower(2.0).gain(0.0), 1.0);
        assert!((RadiationPattern::CosinePower(2.0).gain(PI / 3.0) - 0.25).abs() < 1e-15);
        assert_eq!(RadiationPattern::CosinePower(2.0).gain(FRAC_PI_2), 0.0);
        assert_eq!(RadiationPattern::CosinePower(2.0).gain(-FRAC_PI_2), 0.0);
    }

    #[test]
    fn steering_broadside_is_all_ones() {
        let geom = RisGeometry::new(3, 4, 0.37, facing_y()).unwrap();
        for a in steering_vector(&geom, 0.0, 0.0) {
            assert_eq!(a, Complex64::new(1.0, 0.0));
        }
    }

    #[test]
    fn steering_two_by_one_endfire() {
        let geom = RisGeometry::new(2, 1, 0.5, facing_y()).unwrap();
        let a = steering_vector(&geom, FRAC_PI_2, 0.0);
        assert!((a[0] - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        assert!((a[1] - Complex64::new(-1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn g_broadside_identity_composition() {
        let f = SPEED_OF_LIGHT / (4.0 * PI);
        let mut scene = small_scene(RadiationPattern::Isotropic);
        scene.carrier_frequency = f;
        let ris = scene.ris[0];
        let node = ris.position + ris.geometry.orientation.normal();
        for x in los_vector(&scene, &ris, node, 0.0).unwrap() {
            assert!((x - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn g_entries_share_magnitude() {
        let scene = small_scene(RadiationPattern::CosinePower(2.0));
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let g = sample_g(&scene, 1, &mut rng).unwrap();
        let m0 = g[0].norm();
        assert!(g.iter().all(|x| (x.norm() - m0).abs() < 1e-18));
    }

    #[test]
    fn g_mean_power_is_gain_times_loss() {
        let scene = small_scene(RadiationPattern::CosinePower(1.0));
        let ris = scene.ris[0];
        let delta = scene.rx - ris.position;
        let (_, el) = ris.geometry.orientation.angles_of(delta * (1.0 / delta.norm()));
        let expected = scene.pattern.gain(el) * scene.pathloss(delta.norm()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 10_000;
        let mut acc = 0.0;
        for _ in 0..n {
            acc += sample_g(&scene, 0, &mut rng).unwrap()[3].norm_sqr();
        }
        let mean = acc / n as f64;
        assert!((mean - expected).abs() / expected < 1e-12, "{mean} vs {expected}");
    }

    #[test]
    fn coincident_nodes_are_domain_errors() {
        let mut scene = small_scene(RadiationPattern::Isotropic);
        scene.rx = scene.ris[0].position;
        assert!(sample_g(&scene, 0, &mut ChaCha8Rng::seed_from_u64(0)).is_err());
        let mut scene = small_scene(RadiationPattern::Isotropic);
        scene.tx = scene.ris[1].position;
        assert!(sample_h(&scene, 1, &ClusterConfig::default(), &mut ChaCha8Rng::seed_from_u64(0)).is_err());
    }

    #[test]
    fn single_ray_rayleigh_moment() {
        let scene = small_scene(RadiationPattern::Isotropic);
        let cc = ClusterConfig { rays_per_cluster: vec![1], los_probability: 0.0, ..Default::default() };
        let k = scene.ris[0].geometry.len() as f64;
        let loss = scene.pathloss(scene.tx.distance(scene.ris[0].position)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 100_000;
        let mut acc = 0.0;
        for _ in 0..n {
            acc += sample_h(&scene, 0, &cc, &mut rng).unwrap().iter().map(|x| x.norm_sqr()).sum::<f64>();
        }
        let mean = acc / n as f64;
        assert!((mean / (k * loss) - 1.0).abs() < 0.03, "{}", mean / (k * loss));
    }

    #[test]
    fn grazing_scatterers_leave_only_los() {
        let scene = small_scene(RadiationPattern::CosinePower(2.0));
        let cc = ClusterConfig {
            rays_per_cluster: vec![3, 2],
            elevation_center_range: (FRAC_PI_2, FRAC_PI_2),
            intra_cluster_spread: 0.0,
            los_probability: 1.0,
            ..Default::default()
        };
        let h = sample_h(&scene, 0, &cc, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        // Same LOS vector up to the random phase: ratio is one constant unit-modulus rotation times scale 1.
        let los = los_vector(&scene, &scene.ris[0], scene.tx, 0.0).unwrap();
        let rot = h[0] / los[0];
        assert!((rot.norm() - 1.0).abs() < 1e-12);
        for (a, b) in h.iter().zip(&los) {
            assert!((a - rot * b).norm() < 1e-12 * b.norm());
        }
    }

    #[test]
    fn kappa_normalization_of_identical_rays() {
        let geom = RisGeometry::new(2, 2, 0.5, facing_y()).unwrap();
        let ray = Ray { gain: Complex64::new(1.0, 0.0), amplitude: 1.0, azimuth: 0.0, elevation: 0.0 };
        let single = scattered_component(&geom, &[ray]);
        let four = scattered_component(&geom, &[ray; 4]);
        for (s, f) in single.iter().zip(&four) {
            assert!((f - s * 2.0).norm() < 1e-15);
        }
    }

    #[test]
    fn direct_link_variance_and_wall() {
        let mut scene = small_scene(RadiationPattern::Isotropic);
        let var0 = direct_variance(&scene).unwrap();
        let expected = scene.pathloss(scene.tx.distance(scene.rx)).unwrap();
        assert_eq!(var0, expected);
        scene.direct_penetration_loss_db = 10.0;
        assert!((direct_variance(&scene).unwrap() / var0 - 0.1).abs() < 1e-15);

        scene.direct_penetration_loss_db = 0.0;
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let n = 100_000;
        let draws: Vec<Complex64> = (0..n).map(|_| sample_direct(&scene, &mut rng).unwrap()).collect();
        let var = draws.iter().map(|x| x.norm_sqr()).sum::<f64>() / n as f64;
        let mean = draws.iter().sum::<Complex64>() / n as f64;
        assert!((var / var0 - 1.0).abs() < 0.03);
        // standard error of the mean is sqrt(var0 / n)
        assert!(mean.norm() < 5.0 * (var0 / n as f64).sqrt());
    }

    #[test]
    fn realization_replay_and_rejects_empty_scene() {
        let scene = small_scene(RadiationPattern::Isotropic);
        let cc = ClusterConfig::default();
        let a = sample_realization(&scene, &cc, StreamKey::new(42, 9)).unwrap();
        let b = sample_realization(&scene, &cc, StreamKey::new(42, 9)).unwrap();
        assert_eq!(a, b);
        assert!(a.is_finite());
        let empty = Scene { ris: vec![], ..scene };
        assert!(sample_realization(&empty, &cc, StreamKey::new(42, 9)).is_err());
    }
}
