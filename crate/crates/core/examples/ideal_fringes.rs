//! Balanced interferometer without recoil or detector: p3 = (1 - cos φ)/2.

use std::f64::consts::PI;
use whichway::interferometer::{output_probabilities, visibility, InterferometerConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let config = InterferometerConfig::balanced();
    println!("{:>8} {:>10} {:>10} {:>10}", "phase", "p3", "p4", "cosine");
    for k in 0..=8 {
        let phi = 2.0 * PI * k as f64 / 8.0;
        let p = output_probabilities(&config.with_phase(phi))?;
        println!("{phi:8.4} {:10.6} {:10.6} {:10.6}", p.p3, p.p4, (1.0 - phi.cos()) / 2.0);
    }
    println!("visibility = {:.12}", visibility(&config, 100)?);
    Ok(())
}
