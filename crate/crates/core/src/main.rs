#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use scurve::dataset::{Branch, Dataset};
use scurve::fitting::{fit_superposition, CenterStrategy, FitConfig, FitResult};
use scurve::hysteresis::{analyze, representative_loop, HysteresisLoop, LoopAnalysis};
use scurve::plot::{sample_model, Chart};
use scurve::profiling::{profile, profile_dataset, CurveProfile, SearchRange};
use scurve::report::{fit_report, load_model, to_text};
use scurve::superposition::Superposition;
use scurve::{demo, Error, Result};

/// Fit, profile and compare S-curve models of B-H data.
#[derive(Parser)]
#[command(name = "scurve", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a superposition of S-curves to a CSV of H,B samples.
    Fit {
        #[arg(long)]
        data: PathBuf,
        #[command(flatten)]
        fit: FitArgs,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        plot: Option<PathBuf>,
    },
    /// Inflection, maximum permeability, a0 interval and knee of a model.
    Profile {
        #[arg(long, conflicts_with = "data", required_unless_present = "data")]
        model: Option<PathBuf>,
        #[arg(long)]
        data: Option<PathBuf>,
        #[command(flatten)]
        fit: FitArgs,
        /// Search range `lo:hi` for a model file; defaults to the model's own span.
        #[arg(long, allow_hyphen_values = true)]
        range: Option<String>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        plot: Option<PathBuf>,
    },
    /// Crossings and area of a loop from two branches (CSV data or JSON models),
    /// or of a two-parameter loop given by --a, --m and two centers.
    Hysteresis {
        #[arg(long, requires = "lower", required_unless_present = "a")]
        upper: Option<PathBuf>,
        #[arg(long)]
        lower: Option<PathBuf>,
        #[arg(long, conflicts_with_all = ["upper", "lower"], requires_all = ["m", "upper_center", "lower_center"])]
        a: Option<f64>,
        #[arg(long)]
        m: Option<f64>,
        /// `x:y`
        #[arg(long, allow_hyphen_values = true)]
        upper_center: Option<String>,
        /// `x:y`
        #[arg(long, allow_hyphen_values = true)]
        lower_center: Option<String>,
        #[command(flatten)]
        fit: FitArgs,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        plot: Option<PathBuf>,
    },
    /// Evaluate a model and its first three derivatives at one H value.
    Eval {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, allow_negative_numbers = true)]
        at: f64,
    },
    /// Reference checks on the bundled loop models.
    Demo,
}

#[derive(Args)]
struct FitArgs {
    /// Number of S-curves.
    #[arg(long)]
    n: Option<usize>,
    /// Inflection centers `x:y,x:y,...`; overrides automatic selection.
    #[arg(long, allow_hyphen_values = true)]
    centers: Option<String>,
    /// TOML fit configuration.
    #[arg(long)]
    config: Option<PathBuf>,
}

impl FitArgs {
    fn config(&self, default_n: usize) -> Result<FitConfig> {
        let mut cfg = match &self.config {
            Some(path) => FitConfig::from_toml(&std::fs::read_to_string(path)?)?,
            None => FitConfig::with_curves(default_n),
        };
        if let Some(n) = self.n {
            cfg.n_curves = n;
        }
        if let Some(list) = &self.centers {
            let centers = list.split(',').map(parse_pair).collect::<Result<Vec<_>>>()?;
            if self.n.is_none() {
                cfg.n_curves = centers.len();
            }
            cfg.center_strategy = CenterStrategy::User(centers);
        }
        Ok(cfg)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Fit { data, fit, out, plot } => cmd_fit(&data, &fit, &out, plot.as_deref()),
        Command::Profile { model, data, fit, range, out, plot } => {
            cmd_profile(model.as_deref(), data.as_deref(), &fit, range.as_deref(), &out, plot.as_deref())
        }
        Command::Hysteresis { upper, lower, a, m, upper_center, lower_center, fit, out, plot } => {
            let lp = match (upper, lower, a, m, upper_center, lower_center) {
                (Some(u), Some(l), ..) => load_loop(&u, &l, &fit),
                (_, _, Some(a), Some(m), Some(uc), Some(lc)) => {
                    parse_pair(&uc).and_then(|uc| parse_pair(&lc).and_then(|lc| representative_loop(a, m, uc, lc)))
                }
                _ => Err(Error::InvalidModel("give --upper/--lower or --a/--m/--upper-center/--lower-center".into())),
            };
            lp.and_then(|lp| cmd_hysteresis(&lp, &out, plot.as_deref()))
        }
        Command::Eval { model, at } => cmd_eval(&model, at),
        Command::Demo => {
            let checks = demo::run();
            print!("{}", demo::render(&checks));
            if checks.iter().all(|c| c.pass) {
                Ok(())
            } else {
                return ExitCode::FAILURE;
            }
        }
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if let Error::AmbiguousInflection { brackets } | Error::Topology { crossings: brackets } = &e {
                for b in brackets.iter().take(16) {
                    eprintln!("  sign change in [{}, {}]", b.lo, b.hi);
                }
            }
            ExitCode::FAILURE
        }
    }
}

fn cmd_fit(data: &Path, args: &FitArgs, out: &Path, plot: Option<&Path>) -> Result<()> {
    let ds = Dataset::from_csv_path(data, Branch::Initial)?;
    let fit = fit_checked(&ds, &args.config(1)?)?;
    write(out, &to_text(&fit_report(&fit)))?;
    if let Some(path) = plot {
        let (lo, hi) = ds.h_range();
        let chart = Chart::new(format!("{} fit, n = {}", ds.label, fit.model.len()))
            .markers("data", ds.samples().iter().map(|s| (s.h, s.b)).collect())
            .line("model", sample_model(&fit.model, lo, hi, 400)?);
        write(path, &chart.to_svg())?;
    }
    println!("rms residual {:e} after {} iterations", fit.rms_residual, fit.iterations);
    Ok(())
}

fn cmd_profile(
    model: Option<&Path>,
    data: Option<&Path>,
    args: &FitArgs,
    range: Option<&str>,
    out: &Path,
    plot: Option<&Path>,
) -> Result<()> {
    let (sup, prof, ds): (Superposition, CurveProfile, Option<Dataset>) = match (model, data) {
        (Some(path), _) => {
            let sup = load_model(&std::fs::read_to_string(path)?)?;
            let range = match range {
                Some(text) => {
                    let (lo, hi) = parse_pair(text)?;
                    SearchRange::new(lo, hi)
                }
                None => SearchRange::around(&sup),
            };
            let prof = profile(&sup, &range)?;
            (sup, prof, None)
        }
        (None, Some(path)) => {
            let ds = Dataset::from_csv_path(path, Branch::Initial)?;
            let fit = fit_checked(&ds, &args.config(1)?)?;
            let prof = profile_dataset(&fit.model, &ds)?;
            (fit.model, prof, Some(ds))
        }
        (None, None) => return Err(Error::InvalidModel("give --model or --data".into())),
    };
    write(out, &to_text(&prof.to_json()))?;
    for w in &prof.warnings {
        eprintln!("warning: {w}");
    }
    if let Some(path) = plot {
        let (lo, hi) = match &ds {
            Some(d) => d.h_range(),
            None => {
                let r = SearchRange::around(&sup);
                (r.lo, r.hi)
            }
        };
        let mut chart = Chart::new("profile").line("model", sample_model(&sup, lo, hi, 400)?);
        if let Some(d) = &ds {
            chart = chart.markers("data", d.samples().iter().map(|s| (s.h, s.b)).collect());
        }
        chart = chart.annotate("inflection", prof.x0, prof.y0);
        if let Some(k) = prof.knee {
            chart = chart.annotate("knee", k.x_k, k.y_k);
        }
        write(path, &chart.to_svg())?;
    }
    Ok(())
}

fn load_loop(upper: &Path, lower: &Path, args: &FitArgs) -> Result<HysteresisLoop> {
    let is_json = |p: &Path| p.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
    if is_json(upper) && is_json(lower) {
        let up = load_model(&std::fs::read_to_string(upper)?)?;
        let low = load_model(&std::fs::read_to_string(lower)?)?;
        return HysteresisLoop::auto(up, low);
    }
    if is_json(upper) || is_json(lower) {
        return Err(Error::InvalidModel("--upper and --lower must both be CSV or both JSON".into()));
    }
    let cfg = args.config(2)?;
    let up_data = Dataset::from_csv_path(upper, Branch::HysteresisUpper)?;
    let low_data = Dataset::from_csv_path(lower, Branch::HysteresisLower)?;
    let up = fit_checked(&up_data, &cfg)?;
    let low = fit_checked(&low_data, &cfg)?;
    HysteresisLoop::from_data(up.model, low.model, &up_data, &low_data)
}

fn cmd_hysteresis(lp: &HysteresisLoop, out: &Path, plot: Option<&Path>) -> Result<()> {
    let r: LoopAnalysis = analyze(lp)?;
    write(out, &to_text(&r.to_json(lp)))?;
    if let Some(path) = plot {
        let pad = 0.15 * (r.right.x - r.left.x);
        let (lo, hi) = (r.left.x - pad, r.right.x + pad);
        let chart = Chart::new(format!("loop area {:.6e}", r.area))
            .line("upper", sample_model(lp.upper(), lo, hi, 400)?)
            .line("lower", sample_model(lp.lower(), lo, hi, 400)?)
            .annotate("left", r.left.x, r.left.y)
            .annotate("right", r.right.x, r.right.y);
        write(path, &chart.to_svg())?;
    }
    println!("area {}", scurve::report::sig9(r.area));
    Ok(())
}

fn cmd_eval(model: &Path, at: f64) -> Result<()> {
    let sup = load_model(&std::fs::read_to_string(model)?)?;
    let (y, d1, d2, d3) = sup.derivatives(at)?;
    println!("{}", to_text(&json!({ "x": at, "y": y, "d1": d1, "d2": d2, "d3": d3 })).trim_end());
    Ok(())
}

/// Fit failures carry the best model found; report them as errors.
fn fit_checked(data: &Dataset, cfg: &FitConfig) -> Result<FitResult> {
    let fit = fit_superposition(data, cfg)?;
    if !fit.converged {
        eprintln!("warning: fit stopped at the iteration cap (rms {:e})", fit.rms_residual);
    }
    Ok(fit)
}

fn parse_pair(text: &str) -> Result<(f64, f64)> {
    let bad = || Error::InvalidModel(format!("expected `x:y`, got '{text}'"));
    let (x, y) = text.split_once(':').ok_or_else(bad)?;
    Ok((x.trim().parse().map_err(|_| bad())?, y.trim().parse().map_err(|_| bad())?))
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text)?;
    Ok(())
}
