//! Run a scenario file the way the command-line tool does, with overrides.
//!
//! ```text
//! cargo run --example scenario_runner -- crates/core/scenarios/which_way.toml ww.arm=transmitted
//! ```

use whichway::scenario::{Override, Scenario};

const DEFAULT: &str = r#"
kind = "mz"
[ww]
gamma = 0.5
[[sweep]]
parameter = "phase"
start = 0.0
stop = 3.141592653589793
steps = 5
"#;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let text = match args.next() {
        Some(path) => std::fs::read_to_string(path)?,
        None => DEFAULT.to_string(),
    };
    let overrides = args.map(|a| a.parse()).collect::<Result<Vec<Override>, _>>()?;
    let scenario = Scenario::parse(&text, &overrides)?;
    let diagnostics = scenario.diagnostics();
    if !diagnostics.is_empty() {
        for d in diagnostics {
            eprintln!("{d}");
        }
        std::process::exit(1);
    }
    let table = scenario.run()?;
    print!("{}", table.to_csv());
    if let Some(v) = table.metadata.get("visibility") {
        println!("# visibility: {v}");
    }
    Ok(())
}
