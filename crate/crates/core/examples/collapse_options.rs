//! Two ways to end a measurement: trace out the apparatus (a mixture) or
//! condition on one pointer reading (a pure eigenstate).

use whichway::collapse::{reduce_statistical, EntanglementSpec};
use whichway::Complex64;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let amplitudes = vec![
        Complex64::new(0.5, 0.0),
        Complex64::new(0.0, 0.5),
        Complex64::new(-0.5, 0.5),
    ];
    let spec = EntanglementSpec::standard(amplitudes, vec![-1.0, 0.0, 1.0])?;
    let psi = spec.entangle()?;

    let rho = reduce_statistical(&psi)?;
    println!("statistical reduction (system density matrix, real parts):");
    for i in 0..3 {
        let row: Vec<String> = (0..3).map(|j| format!("{:6.3}", rho.get(i, j).re)).collect();
        println!("  [{}]", row.join(", "));
    }
    println!("  purity = {:.4}", rho.purity());

    for l in 0..spec.branches() {
        let outcome = spec.reduce_postselect(&psi, l)?;
        let purity = outcome.post_state.density()?.purity();
        println!(
            "post-select outcome {l} (eigenvalue {:+}): probability {:.3}, purity {purity:.3}",
            outcome.eigenvalue, outcome.probability
        );
    }
    Ok(())
}
