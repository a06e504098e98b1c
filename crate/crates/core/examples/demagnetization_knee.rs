//! Knee of a second-quadrant demagnetization branch. The range ends at
//! H = 0, so the curvature maximum may sit on the boundary.

use scurve::profiling::{knee_point, SearchRange};
use scurve::superposition::{Component, Superposition};

fn main() -> scurve::Result<()> {
    let branch = Superposition::new(
        8.0,
        vec![Component::new(0.9, 0.02, -400.0, 0.3), Component::new(0.15, 0.004, -300.0, 0.9)],
    )?;
    for (lo, hi) in [(-600.0, 0.0), (-600.0, -420.0), (-380.0, 0.0)] {
        let knee = knee_point(&branch, &SearchRange::new(lo, hi))?;
        println!("H in [{lo:>6.1}, {hi:>6.1}]: knee at H = {:>9.3} A/m, B = {:.4} T", knee.x_k, knee.y_k);
    }
    Ok(())
}
