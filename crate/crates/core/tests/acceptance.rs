//! Acceptance gate: each numbered criterion prints one PASS or FAIL line and
//! the process exits non-zero if any of them fails.

mod common;

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use whichway::collapse::{reduce_statistical, CollapseError, EntanglementSpec};
use whichway::interferometer::{
    evolve, evolve_dense, output_probabilities, path_coefficients, visibility, Arm,
    BeamSplitterSpec, InterferometerConfig, PacketSpec, WhichWayDetectorSpec,
};
use whichway::scenario::Scenario;
use whichway::tolerance::MAX_DENSE_DIMENSION;
use whichway::wavepacket::Wavepacket;
use whichway::Complex64;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn phases(n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |k| 2.0 * PI * k as f64 / n as f64)
}

fn ww(arm: Arm, gamma: f64) -> WhichWayDetectorSpec {
    WhichWayDetectorSpec::new(arm, gamma)
}

fn criterion_1() -> Outcome {
    let mut worst: f64 = 0.0;
    let cfg = InterferometerConfig::balanced().with_detector(ww(Arm::Reflected, 0.0));
    for phi in phases(100) {
        let p3 = output_probabilities(&cfg.with_phase(phi)).map_err(|e| e.to_string())?.p3;
        worst = worst.max((p3 - 0.5).abs());
    }
    check(worst < 1e-10, format!("50/50: max |p3 - 0.5| = {worst:e}"))?;

    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut general: f64 = 0.0;
    for _ in 0..10 {
        let bs_in = common::random_splitter(&mut rng);
        let bs_out = common::random_splitter(&mut rng);
        let expected = (bs_in.t * bs_out.t).norm_sqr() + (bs_in.r * bs_out.r).norm_sqr();
        let cfg = InterferometerConfig::new(bs_in, Some(bs_out)).with_detector(ww(Arm::Transmitted, 0.0));
        for phi in phases(100) {
            let p3 = output_probabilities(&cfg.with_phase(phi)).map_err(|e| e.to_string())?.p3;
            general = general.max((p3 - expected).abs());
        }
    }
    check(general < 1e-10, format!("general splitters: max deviation {general:e}"))?;
    Ok(format!("max |p3 - 0.5| = {worst:.1e}, general (t,r) deviation {general:.1e}"))
}

fn criterion_2() -> Outcome {
    let cfg = InterferometerConfig::balanced().with_detector(ww(Arm::Reflected, 1.0));
    let mut worst: f64 = 0.0;
    for phi in phases(100) {
        let p3 = output_probabilities(&cfg.with_phase(phi)).map_err(|e| e.to_string())?.p3;
        worst = worst.max((p3 - (1.0 - phi.cos()) / 2.0).abs());
    }
    let v = visibility(&cfg, 100).map_err(|e| e.to_string())?;
    check(worst < 1e-10, format!("fringe deviation {worst:e}"))?;
    check((v - 1.0).abs() < 1e-10, format!("visibility {v}"))?;
    Ok(format!("fringe deviation {worst:.1e}, V = {v:.12}"))
}

fn criterion_3() -> Outcome {
    let packet = Wavepacket::default_gaussian(0.0, 1.0).map_err(|e| e.to_string())?;
    let omega = packet.recoil_overlap(1e-4).map_err(|e| e.to_string())?.norm();
    let deficit = omega - 1.0;
    check(
        (deficit + 1.25e-9).abs() < 2e-9,
        format!("|Ω| - 1 = {deficit:e}, expected about -1.25e-9"),
    )?;
    let v = visibility(&InterferometerConfig::balanced().with_recoil(1e-4), 100).map_err(|e| e.to_string())?;
    check(1.0 - v < 1e-8, format!("1 - V = {:e}", 1.0 - v))?;
    Ok(format!("|Ω| - 1 = {deficit:.3e}, 1 - V = {:.1e}", 1.0 - v))
}

fn criterion_4() -> Outcome {
    let mut report = Vec::new();
    for delta in [0.5, 1.0, 2.0] {
        let v = visibility(&InterferometerConfig::balanced().with_recoil(delta), 100).map_err(|e| e.to_string())?;
        let expected = (-delta * delta / 4.0f64).exp();
        check(
            (v - expected).abs() < 1e-6,
            format!("δp/σ = {delta}: V = {v}, expected {expected}"),
        )?;
        report.push(format!("{delta}: {:.1e}", (v - expected).abs()));
    }
    Ok(format!("|V - exp(-δ²/4σ²)| at {}", report.join(", ")))
}

fn criterion_5() -> Outcome {
    let mut worst: f64 = 0.0;
    for cfg in common::random_configs(2024, 500, PacketSpec::default()) {
        let a = evolve(&cfg).and_then(|s| s.probabilities()).map_err(|e| e.to_string())?;
        let b = path_coefficients(&cfg).map_err(|e| e.to_string())?.probabilities();
        worst = worst.max((a.p3 - b.p3).abs()).max((a.p4 - b.p4).abs());
    }
    check(worst < 1e-8, format!("evolve vs coefficients: {worst:e}"))?;

    let mut dense_worst: f64 = 0.0;
    for cfg in common::random_configs(4096, 50, common::small_packet()) {
        let factorized = evolve(&cfg)
            .and_then(|s| s.to_dense())
            .map_err(|e| e.to_string())?;
        let dense = evolve_dense(&cfg, MAX_DENSE_DIMENSION).map_err(|e| e.to_string())?;
        for (x, y) in factorized.amplitudes().iter().zip(dense.amplitudes()) {
            dense_worst = dense_worst.max((x - y).norm());
        }
    }
    check(dense_worst < 1e-10, format!("factorized vs dense: {dense_worst:e}"))?;
    Ok(format!(
        "500 configs max |Δp| = {worst:.1e}; 50 dense configs max |Δψ| = {dense_worst:.1e}"
    ))
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let theta = rng.random_range(0.0..PI / 2.0);
        let a1 = Complex64::from_polar(theta.cos(), rng.random_range(0.0..2.0 * PI));
        let a2 = Complex64::from_polar(theta.sin(), rng.random_range(0.0..2.0 * PI));
        let spec = EntanglementSpec::stern_gerlach(a1, a2).map_err(|e| e.to_string())?;
        let psi = spec.entangle().map_err(|e| e.to_string())?;
        let rho = reduce_statistical(&psi).map_err(|e| e.to_string())?;
        let weights = [a1.norm_sqr(), a2.norm_sqr()];
        for j in 0..2 {
            for k in 0..2 {
                let m = rho.get(j, k);
                let target = if j == k { weights[j] } else { 0.0 };
                worst = worst.max((m - target).norm());
            }
        }
        for (l, &w) in weights.iter().enumerate() {
            if w < 1e-12 {
                continue;
            }
            let out = spec.reduce_postselect(&psi, l).map_err(|e| e.to_string())?;
            let purity = out.post_state.density().map_err(|e| e.to_string())?.purity();
            worst = worst.max((purity - 1.0).abs());
            check(out.probability == psi_weight(&psi, l), "probability is not |a_l|²")?;
        }
    }
    check(worst < 1e-12, format!("reduction deviation {worst:e}"))?;

    let spec = EntanglementSpec::stern_gerlach(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0))
        .map_err(|e| e.to_string())?;
    let psi = spec.entangle().map_err(|e| e.to_string())?;
    match spec.reduce_postselect(&psi, 1) {
        Err(CollapseError::DegenerateOutcome { .. }) => {}
        other => return Err(format!("degenerate post-selection returned {other:?}")),
    }
    Ok(format!("max deviation {worst:.1e}; degenerate outcome rejected"))
}

/// `Σ_i |⟨ξ_l, η_l | ψ⟩|²` computed straight from the amplitudes: the
/// standard-basis record puts branch `l` at flat index `l·(d+1)`.
fn psi_weight(psi: &whichway::tensor::CompositeState, l: usize) -> f64 {
    let d = psi.layout().dims()[1];
    psi.amplitudes()[l * d + l].norm_sqr()
}

fn criterion_7() -> Outcome {
    let text = "kind = \"stern_gerlach\"\na1 = 0.6\na2 = 0.8\nshots = 100000\nseed = 42\n";
    let first = Scenario::parse(text, &[]).and_then(|s| s.run()).map_err(|e| e.to_string())?;
    let second = Scenario::parse(text, &[]).and_then(|s| s.run()).map_err(|e| e.to_string())?;
    check(first.to_csv() == second.to_csv(), "CSV differs between identical runs")?;
    check(first.to_json() == second.to_json(), "JSON differs between identical runs")?;

    let freq = first.column("frequency").ok_or("no frequency column")?[0];
    let p = 0.36;
    let sd = (p * (1.0 - p) / 1e5f64).sqrt();
    let z = (freq - p) / sd;
    check(z.abs() <= 5.0, format!("frequency {freq} is {z:.2} standard deviations off"))?;
    Ok(format!("f₁ = {freq} ({z:+.2}σ), reruns bitwise identical"))
}

fn criterion_8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(808);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let bs_in = common::random_splitter(&mut rng).with_recoil(rng.random_range(0.0..2.0));
        let missing = InterferometerConfig::new(bs_in, None);
        let explicit = InterferometerConfig::new(bs_in, Some(BeamSplitterSpec::absent()));
        for phi in phases(16) {
            let a = output_probabilities(&missing.with_phase(phi)).map_err(|e| e.to_string())?;
            let b = output_probabilities(&explicit.with_phase(phi)).map_err(|e| e.to_string())?;
            worst = worst
                .max((a.p3 - b.p3).abs())
                .max((a.p4 - b.p4).abs())
                .max((a.p3 - bs_in.t.norm_sqr()).abs());
        }
    }
    check(worst < 1e-12, format!("max deviation {worst:e}"))?;
    Ok(format!("max deviation {worst:.1e}"))
}

fn criterion_9() -> Outcome {
    let mut worst: f64 = 0.0;
    for gamma in [0.0, 0.3, 0.7, 1.0] {
        for recoil in [0.0, 0.5, 1.5] {
            for phi in phases(12) {
                let base = InterferometerConfig::balanced().with_recoil(recoil).with_phase(phi);
                let r = output_probabilities(&base.with_detector(ww(Arm::Reflected, gamma)))
                    .map_err(|e| e.to_string())?;
                let t = output_probabilities(&base.with_detector(ww(Arm::Transmitted, gamma)))
                    .map_err(|e| e.to_string())?;
                worst = worst.max((r.p3 - t.p3).abs()).max((r.p4 - t.p4).abs());
            }
        }
    }
    check(worst < 1e-12, format!("max arm asymmetry {worst:e}"))?;
    Ok(format!("max arm asymmetry {worst:.1e}"))
}

fn criterion_10() -> Outcome {
    let mut worst: f64 = 0.0;
    for gamma in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let cfg = InterferometerConfig::balanced().with_detector(ww(Arm::Reflected, gamma));
        let v = visibility(&cfg, 100).map_err(|e| e.to_string())?;
        let sum = v * v + (1.0 - gamma * gamma);
        worst = worst.max((sum - 1.0).abs());
    }
    check(worst < 1e-8, format!("max |V² + D² - 1| = {worst:e}"))?;
    Ok(format!("max |V² + D² - 1| = {worst:.1e}"))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("which-way marking erases interference", criterion_1),
        ("ideal fringes with an inert detector", criterion_2),
        ("tiny recoil leaves the fringes intact", criterion_3),
        ("visibility follows the Gaussian recoil law", criterion_4),
        ("evolution routes agree", criterion_5),
        ("collapse reductions", criterion_6),
        ("seeded spin sampling", criterion_7),
        ("removing the output splitter", criterion_8),
        ("detector arm symmetry", criterion_9),
        ("complementarity saturates", criterion_10),
    ];
    let start = Instant::now();
    let mut failures = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t0 = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f))
            .unwrap_or_else(|_| Err("panicked".to_string()));
        let secs = t0.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2}: PASS  {name} ({detail}) [{secs:.2}s]", i + 1),
            Err(detail) => {
                failures += 1;
                println!("criterion {:>2}: FAIL  {name} ({detail}) [{secs:.2}s]", i + 1);
            }
        }
    }
    println!(
        "acceptance: {}/{} passed in {:.2}s",
        criteria.len() - failures,
        criteria.len(),
        start.elapsed().as_secs_f64()
    );
    if failures > 0 {
        std::process::exit(1);
    }
}
