//! One S-curve: forward and inverse maps, derivatives and the two radical
//! terms of the closed form.

use scurve::scurve::{cardano_terms, SCurveParams};

fn main() -> scurve::Result<()> {
    let curve = SCurveParams::new(15.52, 0.131, 0.0, 0.0)?;
    println!("{:>8} {:>12} {:>12} {:>12} {:>12}", "H", "B", "dB/dH", "d2", "d3");
    for h in [-40.0, -20.0, -5.0, 0.0, 5.0, 20.0, 40.0] {
        let d = curve.derivatives(h)?;
        println!("{h:>8.1} {:>12.6} {:>12.6} {:>12.3e} {:>12.3e}", d.y, d.d1, d.d2, d.d3);
    }

    let b = curve.eval_forward(12.5)?;
    println!("\ninverse of B({b:.6}) = {}", curve.eval_inverse(b)?);

    let (s1, s2) = cardano_terms(curve.a, curve.m * 12.5)?;
    println!("S1 = {s1:.6}, S2 = {s2:.6}, S1 + S2 = {:.6}", s1 + s2);
    Ok(())
}
