//! Runs a small experiment from an inline config and prints its checks.
use bdlab::harness::{run_experiment, ExperimentConfig};

const CONFIG: &str = r#"
name = "example"
system = "hermite-zeros"
n = [25, 50, 100, 200]

[[threshold]]
metric = "ks"
n = 200
max = 0.02
"#;

fn main() -> bdlab::Result<()> {
    let cfg = ExperimentConfig::from_toml(CONFIG)?;
    let report = run_experiment(&cfg, CONFIG)?;
    for c in &report.cells {
        println!("N = {:4}  KS = {:.5}", c.n, c.ks_pooled.unwrap_or(f64::NAN));
    }
    for c in &report.checks {
        println!("{:?}", c);
    }
    println!("passed: {}", report.passed);
    Ok(())
}
