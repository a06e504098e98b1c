//! Loop crossings and area, for a two-parameter loop and for the bundled
//! fitted branches.

use scurve::fixtures;
use scurve::hysteresis::{analyze, closed_form_area, intersections, quadrature_area, representative_loop, HysteresisLoop};

fn main() -> scurve::Result<()> {
    let p = fixtures::representative_params();
    let lp = representative_loop(p.a, p.m, p.upper_center, p.lower_center)?;
    let pts = intersections(&lp)?;
    println!("two-parameter loop a = {}, m = {}", p.a, p.m);
    println!("  crossings ({:.4}, {:.4}) and ({:.4}, {:.4})", pts.0.x, pts.0.y, pts.1.x, pts.1.y);
    println!("  area along B (closed form) {:.6}", closed_form_area(&lp, pts)?);
    println!("  area along H (quadrature)  {:.6}", quadrature_area(&lp, pts)?);

    let fitted = HysteresisLoop::auto(fixtures::ferrite_upper(), fixtures::ferrite_lower())?;
    let r = analyze(&fitted)?;
    println!("\nfitted ferrite loop");
    println!("  crossings ({:.3}, {:.4}) and ({:.3}, {:.4})", r.left.x, r.left.y, r.right.x, r.right.y);
    println!("  area {:.4} J/m^3", r.area);
    Ok(())
}
