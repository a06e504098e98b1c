//! Write an SVG of the bundled fitted loop with its crossings marked.
//!
//! `cargo run --example plot_loop -- loop.svg`

use scurve::fixtures;
use scurve::hysteresis::{analyze, HysteresisLoop};
use scurve::plot::{sample_model, Chart};

fn main() -> scurve::Result<()> {
    let path = std::env::args().nth(1).unwrap_or_else(|| "loop.svg".into());
    let lp = HysteresisLoop::auto(fixtures::ferrite_upper(), fixtures::ferrite_lower())?;
    let r = analyze(&lp)?;
    let (lo, hi) = (r.left.x - 40.0, r.right.x + 40.0);
    let svg = Chart::new("ferrite loop")
        .line("upper", sample_model(lp.upper(), lo, hi, 300)?)
        .line("lower", sample_model(lp.lower(), lo, hi, 300)?)
        .annotate("left", r.left.x, r.left.y)
        .annotate("right", r.right.x, r.right.y)
        .to_svg();
    std::fs::write(&path, svg)?;
    println!("wrote {path}");
    Ok(())
}
