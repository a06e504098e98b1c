//! Profile a branch model: inflection, maximum permeability, a0 interval,
//! nonlinearity and knee.

use scurve::fixtures;
use scurve::profiling::{profile, SearchRange};

fn main() -> scurve::Result<()> {
    for (name, model) in [("upper", fixtures::ferrite_upper()), ("lower", fixtures::ferrite_lower())] {
        let range = SearchRange::around(&model);
        let p = profile(&model, &range)?;
        println!("{name} branch over [{:.1}, {:.1}] A/m", range.lo, range.hi);
        println!("  x0 = {:.4} A/m, y0 = {:.5} T, m0 = {:.6} H/m (mu_r {:.1})", p.x0, p.y0, p.m0, p.relative_permeability);
        match &p.a_interval {
            Ok(iv) => println!("  a0 in [{:.4}, {:.4}] T^-2", iv.a1, iv.a2),
            Err(reason) => println!("  a0 interval unavailable: {reason}"),
        }
        println!("  nonlinearity {:.4}%, damped measure {:.6}", 100.0 * p.pct_nonlinearity, p.damped_measure);
        if let Some(k) = p.knee {
            println!("  knee at ({:.3}, {:.5})", k.x_k, k.y_k);
        }
    }
    Ok(())
}
