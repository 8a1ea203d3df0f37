//! A detector whose pointer states overlap by gamma scales the fringes by gamma.
//! At gamma = 0 the output ports are populated by the classical mixture.

use whichway::interferometer::{
    output_probabilities, visibility, Arm, InterferometerConfig, WhichWayDetectorSpec,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for arm in [Arm::Reflected, Arm::Transmitted] {
        println!("detector on the {arm:?} arm");
        for gamma in [0.0, 0.25, 0.5, 0.75, 1.0] {
            let config = InterferometerConfig::balanced()
                .with_detector(WhichWayDetectorSpec::new(arm, gamma))
                .with_phase(std::f64::consts::FRAC_PI_2 * 0.5);
            let p = output_probabilities(&config)?;
            let v = visibility(&config, 100)?;
            println!("  gamma {gamma:.2}: p3 = {:.6}  V = {v:.6}", p.p3);
        }
    }
    Ok(())
}
