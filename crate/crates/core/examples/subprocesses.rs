//! A fitted hysteresis branch split into magnetizing and dissipative parts,
//! and into the subprocesses S_I and S_II.

use scurve::fixtures;

fn main() -> scurve::Result<()> {
    let upper = fixtures::ferrite_upper();
    let (magnetizing, dissipative) = upper.split_by_sign();
    let magnetizing = magnetizing.expect("branch has a magnetizing term");
    let dissipative = dissipative.expect("branch has a dissipative term");
    println!("sum of p m: magnetizing {:.4}, dissipative {:.4}", magnetizing.slope_sum(), dissipative.slope_sum());

    println!("\n{:>8} {:>10} {:>10} {:>10} {:>10} {:>10}", "H", "B", "S_I", "S_II", "magnet.", "dissip.");
    for h in (-6..=6).map(|i| i as f64 * 20.0) {
        let s = upper.decompose_subprocesses(h)?;
        println!(
            "{h:>8.1} {:>10.5} {:>10.5} {:>10.5} {:>10.5} {:>10.5}",
            upper.eval(h)?,
            s.s_one,
            s.s_two,
            magnetizing.eval(h)?,
            dissipative.eval(h)?
        );
    }
    Ok(())
}
