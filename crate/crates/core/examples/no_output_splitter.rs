//! Without the output splitter each port sees one arm only, so the phase is
//! invisible and p3 = |t1|².

use whichway::interferometer::{output_probabilities, BeamSplitterSpec, InterferometerConfig};
use whichway::Complex64;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let bs_in = BeamSplitterSpec::new(Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8));
    let config = InterferometerConfig::new(bs_in, None);
    for phi in [0.0, 1.0, 2.0, 3.0] {
        let p = output_probabilities(&config.with_phase(phi))?;
        println!("phase {phi:.1}: p3 = {:.12} p4 = {:.12}", p.p3, p.p4);
    }
    println!("|t1|² = {:.12}", bs_in.t.norm_sqr());
    Ok(())
}
