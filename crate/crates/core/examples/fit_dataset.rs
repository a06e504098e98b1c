//! Fit superpositions with one to three S-curves to synthetic B-H data read
//! from CSV text, and compare residuals.

use scurve::dataset::{Branch, Dataset};
use scurve::fitting::{fit_superposition, CenterStrategy, FitConfig};
use scurve::superposition::{Component, Superposition};

fn main() -> scurve::Result<()> {
    let truth = Superposition::new(
        4.0,
        vec![Component::new(0.8, 0.05, -10.0, 0.0), Component::new(0.3, 0.02, 25.0, 0.3)],
    )?;
    let mut csv = String::from("H,B\n");
    for i in 0..60 {
        let h = -120.0 + 4.0 * i as f64;
        csv.push_str(&format!("{h},{}\n", truth.eval(h)?));
    }
    let data = Dataset::from_csv_str(&csv, "synthetic", Branch::Initial)?;

    for n in 1..=3 {
        let fit = fit_superposition(&data, &FitConfig::with_curves(n))?;
        println!("n = {n}: rms {:.3e}, {} iterations, a = {:.4}", fit.rms_residual, fit.iterations, fit.model.a());
    }

    let given = FitConfig {
        n_curves: 2,
        center_strategy: CenterStrategy::User(vec![(-10.0, 0.0), (25.0, 0.3)]),
        ..FitConfig::default()
    };
    let fit = fit_superposition(&data, &given)?;
    println!("\ncenters given: rms {:.3e}", fit.rms_residual);
    for (c, t) in fit.model.components().iter().zip(truth.components()) {
        println!("  p m = {:.6} (true {:.6})", c.slope(), t.slope());
    }
    println!("\n{}", fit.model.to_json());
    Ok(())
}
