#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use whichway::interferometer::{
    Arm, BeamSplitterSpec, InputPort, InterferometerConfig, PacketSpec, WhichWayDetectorSpec,
};
use whichway::Complex64;

pub fn random_splitter(rng: &mut impl Rng) -> BeamSplitterSpec {
    let theta = rng.random_range(0.0..PI / 2.0);
    let t = Complex64::from_polar(theta.cos(), rng.random_range(0.0..2.0 * PI));
    let r = Complex64::from_polar(theta.sin(), rng.random_range(0.0..2.0 * PI));
    BeamSplitterSpec::new(t, r)
}

/// Random splitters, recoil in [0, 3σ], pointer overlap in [0, 1], phase in [0, 2π).
pub fn random_config(rng: &mut impl Rng, packet: PacketSpec) -> InterferometerConfig {
    let bs_in = random_splitter(rng).with_packet(packet);
    let bs_out = random_splitter(rng).with_packet(packet);
    let arm = if rng.random_bool(0.5) {
        Arm::Reflected
    } else {
        Arm::Transmitted
    };
    let port = if rng.random_bool(0.5) {
        InputPort::One
    } else {
        InputPort::Two
    };
    InterferometerConfig::new(bs_in, Some(bs_out))
        .with_recoil(rng.random_range(0.0..3.0) * packet.width)
        .with_phase(rng.random_range(0.0..2.0 * PI))
        .with_detector(WhichWayDetectorSpec::new(arm, rng.random_range(0.0..=1.0)))
        .with_input_port(port)
}

pub fn random_configs(seed: u64, count: usize, packet: PacketSpec) -> Vec<InterferometerConfig> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| random_config(&mut rng, packet)).collect()
}

/// Packet used by the dense reference route: ±10σ on 64 points.
pub fn small_packet() -> PacketSpec {
    PacketSpec::default().with_points(64)
}

/// `∫ψ(p)ψ(p − δ)dp = exp(−δ²/(8σ²))` for the normalized Gaussian with
/// momentum spread σ.
pub fn gaussian_overlap(delta: f64, sigma: f64) -> f64 {
    (-delta * delta / (8.0 * sigma * sigma)).exp()
}
