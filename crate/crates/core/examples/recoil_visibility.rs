//! Recoiling beam splitters: each reflection kicks a Gaussian momentum packet
//! and the fringe visibility drops to exp(-δp²/(4σ²)) for two splitters.

use whichway::interferometer::{visibility, InterferometerConfig};
use whichway::wavepacket::Wavepacket;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let packet = Wavepacket::default_gaussian(0.0, 1.0)?;
    println!("{:>8} {:>12} {:>12} {:>12}", "δp/σ", "|Ω|", "V", "exp(-δ²/4)");
    for delta in [0.0, 0.25, 0.5, 1.0, 1.5, 2.0, 3.0] {
        let omega = packet.recoil_overlap(delta)?.norm();
        let v = visibility(&InterferometerConfig::balanced().with_recoil(delta), 100)?;
        println!(
            "{delta:8.2} {omega:12.8} {v:12.8} {:12.8}",
            (-delta * delta / 4.0f64).exp()
        );
    }
    Ok(())
}
