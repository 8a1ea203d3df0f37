//! Seeded Monte Carlo of a spin-1/2 measurement with amplitudes (0.6, 0.8).

use whichway::collapse::EntanglementSpec;
use whichway::Complex64;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = EntanglementSpec::stern_gerlach(Complex64::new(0.6, 0.0), Complex64::new(0.8, 0.0))?;
    let psi = spec.entangle()?;
    let shots = 100_000;
    for seed in [1, 2, 42] {
        let counts = spec.sample_outcomes(&psi, shots, seed)?;
        let f = counts.frequencies();
        let sd = (0.36f64 * 0.64 / shots as f64).sqrt();
        println!(
            "seed {seed:>2}: up {:>6} down {:>6}  f_up = {:.5} ({:+.2} sd)",
            counts.counts[0],
            counts.counts[1],
            f[0],
            (f[0] - 0.36) / sd
        );
    }
    Ok(())
}
