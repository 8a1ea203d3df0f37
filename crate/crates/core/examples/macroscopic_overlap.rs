//! A photon kick that is tiny compared with the splitter's momentum spread
//! leaves the interference essentially untouched. Also prints where the
//! momentum goes.

use whichway::interferometer::{
    momentum_transfer_report, visibility, BeamSplitterSpec, InterferometerConfig,
};
use whichway::wavepacket::Wavepacket;
use whichway::Complex64;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let packet = Wavepacket::default_gaussian(0.0, 1.0)?;
    for delta in [1e-2, 1e-3, 1e-4] {
        let omega = packet.recoil_overlap(delta)?.norm();
        let v = visibility(&InterferometerConfig::balanced().with_recoil(delta), 100)?;
        println!(
            "δp/σ = {delta:.0e}: |Ω| - 1 = {:+.3e} (series {:+.3e}), 1 - V = {:.3e}",
            omega - 1.0,
            -delta * delta / 8.0,
            1.0 - v
        );
    }

    let mirror = BeamSplitterSpec::new(Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0));
    let config = InterferometerConfig::new(mirror, None).with_recoil(0.3);
    let report = momentum_transfer_report(&config)?;
    println!(
        "fully reflecting input splitter, recoil 0.3: mean momentum shift {:+.6}, |Ω| = {:.6}",
        report.bs_in.mean_shift, report.bs_in.overlap_magnitude
    );
    Ok(())
}
