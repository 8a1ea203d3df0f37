//! With ideal beam splitters the detector's distinguishability D = sqrt(1 - gamma²)
//! and the fringe visibility saturate V² + D² = 1.

use whichway::interferometer::{visibility, Arm, InterferometerConfig, WhichWayDetectorSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    println!("{:>6} {:>10} {:>10} {:>12}", "gamma", "V", "D", "V² + D²");
    for k in 0..=10 {
        let gamma = k as f64 / 10.0;
        let config = InterferometerConfig::balanced()
            .with_detector(WhichWayDetectorSpec::new(Arm::Reflected, gamma));
        let v = visibility(&config, 100)?;
        let d = (1.0 - gamma * gamma).sqrt();
        println!("{gamma:6.2} {v:10.6} {d:10.6} {:12.9}", v * v + d * d);
    }
    Ok(())
}
