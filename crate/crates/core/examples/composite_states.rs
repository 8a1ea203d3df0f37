//! Build a two-qubit Bell state, trace out one half, and compare purities.

use whichway::tensor::{partial_trace, CompositeState, SubsystemSpec};
use whichway::Complex64;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let zero = Complex64::new(0.0, 0.0);
    let bell = CompositeState::new(
        vec![SubsystemSpec::new("A", 2)?, SubsystemSpec::new("B", 2)?],
        vec![Complex64::new(h, 0.0), zero, zero, Complex64::new(h, 0.0)],
    )?;
    let rho_a = partial_trace(&bell.density()?, &["A"])?;
    println!("Bell state, reduced to A:");
    for i in 0..2 {
        println!("  [{:.3}, {:.3}]", rho_a.get(i, 0).re, rho_a.get(i, 1).re);
    }
    println!("  purity = {:.6}", rho_a.purity());

    let plus = CompositeState::single("A", vec![Complex64::new(h, 0.0); 2])?;
    let up = CompositeState::basis("B", 2, 0)?;
    let product = plus.tensor(&up)?;
    let reduced = partial_trace(&product.density()?, &["A"])?;
    println!("product state, reduced to A: purity = {:.6}", reduced.purity());
    Ok(())
}
