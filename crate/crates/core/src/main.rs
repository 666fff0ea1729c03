//! Command-line interface over the library: coefficient dumps, single
//! scheme applications, convergence sweeps, telegraph solves, and the
//! property suite.
//!
//! Exit codes: 0 success, 1 property/check failure, 2 usage error.

use clap::{Parser, Subcommand};
use riesz_kit::coeffs::{a_coeffs, b_coeffs, g_coeffs, RieszOrder};
use riesz_kit::harness::{
    emit, example1_sweep, example3_sweep, fmt_e, property_suite, ConvergenceRow, EmitFormat,
};
use riesz_kit::riesz_ops::{exact_riesz_symmetric_poly, riesz_derivative, Grid1D, GridFn};
use riesz_kit::telegraph::{example3, manufactured, solve};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "riesz-kit", version, about = "High-order Riesz derivative schemes and a telegraph equation solver")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Dump centred-difference weights g_k, compact weights b for every
    /// scheme order, and the series coefficients a_0..a_3.
    Coeffs {
        #[arg(long)]
        alpha: f64,
        /// Largest k for the g_k list.
        #[arg(long, default_value_t = 10)]
        count: usize,
        #[arg(long, default_value = "pretty")]
        format: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Apply one scheme to u(x) = x^p(1−x)^p and report the value, exact
    /// derivative, and absolute error at x = 1/2.
    RieszApply {
        #[arg(long)]
        alpha: f64,
        /// Scheme order: 2, 4, 6, 8 or 10.
        #[arg(long)]
        order: usize,
        /// Number of grid cells M on [0, 1] (must be even).
        #[arg(long)]
        m: usize,
        /// Polynomial exponent p of u(x) = x^p(1−x)^p.
        #[arg(long)]
        poly: usize,
        #[arg(long, default_value = "pretty")]
        format: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Spatial convergence sweep (error at x = 1/2 under grid refinement).
    RieszConvergence {
        /// Scheme order: 4, 6, 8 or 10.
        #[arg(long, default_value_t = 4)]
        scheme: usize,
        /// Polynomial exponent override (defaults to the scheme order;
        /// use 1 for the order-reduction experiment).
        #[arg(long)]
        poly: Option<usize>,
        /// Comma-separated α values.
        #[arg(long, value_delimiter = ',')]
        alphas: Option<Vec<f64>>,
        /// Comma-separated cell counts M (even).
        #[arg(long, value_delimiter = ',')]
        cells: Option<Vec<usize>>,
        #[arg(long, default_value = "csv")]
        format: String,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        parallel: usize,
    },
    /// Solve one telegraph problem and dump the space-time solution as JSON.
    TelegraphSolve {
        #[arg(long)]
        alpha: f64,
        #[arg(long, default_value_t = 1.0)]
        nu: f64,
        #[arg(long, default_value_t = 1.0)]
        kappa_sq: f64,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: usize,
        /// `example3` or `manufactured:m=<int>`.
        #[arg(long, default_value = "example3")]
        problem: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Space-time convergence sweep of the telegraph solver with τ = h.
    TelegraphConvergence {
        #[arg(long, value_delimiter = ',', default_value = "1.2,1.4,1.6,1.8")]
        alphas: Vec<f64>,
        /// Comma-separated M = N values.
        #[arg(long, value_delimiter = ',', default_value = "4,8,16,32,64,128")]
        cells: Vec<usize>,
        #[arg(long, default_value = "csv")]
        format: String,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        parallel: usize,
    },
    /// Run the full invariant suite and report pass/fail per property.
    VerifyProperties {
        #[arg(long, default_value = "pretty")]
        format: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn write_out(out: &Option<PathBuf>, content: &str) -> std::io::Result<()> {
    match out {
        Some(path) => std::fs::write(path, content),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn parse_format(s: &str) -> Result<EmitFormat, String> {
    s.parse::<EmitFormat>().map_err(|e| e.to_string())
}

/// Default (α, M) grids per scheme order, matching the published tables.
fn default_sweep(scheme: usize, poly: Option<usize>) -> (Vec<f64>, Vec<usize>) {
    if poly == Some(1) {
        return (vec![1.1, 1.5, 1.9], vec![10, 20, 40, 80, 160]);
    }
    match scheme {
        4 => (vec![1.1, 1.3, 1.5, 1.7, 1.9], vec![20, 40, 80, 160, 320]),
        6 => (vec![1.1, 1.3, 1.5, 1.7, 1.9], vec![20, 24, 28, 32, 36]),
        _ => (vec![1.1, 1.5, 1.9], vec![30, 34, 38, 42, 46]),
    }
}

fn emit_rows(rows: &[ConvergenceRow], format: &str, out: &Option<PathBuf>) -> Result<(), String> {
    let fmt = parse_format(format)?;
    write_out(out, &emit(rows, fmt)).map_err(|e| e.to_string())
}

fn run_coeffs(alpha: f64, count: usize, format: &str, out: &Option<PathBuf>) -> Result<(), String> {
    let fmt = parse_format(format)?;
    let order = RieszOrder::new(alpha).map_err(|e| e.to_string())?;
    let g = g_coeffs(&order, count);
    let a = a_coeffs(&order);
    let bs: Vec<(usize, Vec<f64>)> = [4usize, 6, 8, 10]
        .iter()
        .map(|&so| (so, b_coeffs(&order, so).unwrap().as_slice().to_vec()))
        .collect();
    let text = match fmt {
        EmitFormat::Csv => {
            let mut s = String::from("series,index,value\n");
            for (k, v) in g.as_slice().iter().enumerate() {
                s.push_str(&format!("g,{k},{}\n", fmt_e(*v)));
            }
            for (so, b) in &bs {
                for (l, v) in b.iter().enumerate() {
                    s.push_str(&format!("b{so},{l},{}\n", fmt_e(*v)));
                }
            }
            for (p, v) in a.as_slice().iter().enumerate() {
                s.push_str(&format!("a,{p},{}\n", fmt_e(*v)));
            }
            s
        }
        EmitFormat::Json => {
            let b_map: serde_json::Map<String, serde_json::Value> = bs
                .iter()
                .map(|(so, b)| (so.to_string(), serde_json::json!(b)))
                .collect();
            let mut s = serde_json::to_string_pretty(&serde_json::json!({
                "alpha": alpha,
                "kappa_alpha": order.kappa_alpha(),
                "g": g.as_slice(),
                "b": b_map,
                "a": a.as_slice(),
            }))
            .unwrap();
            s.push('\n');
            s
        }
        EmitFormat::Pretty => {
            let mut s = format!("alpha = {alpha}, kappa_alpha = {}\n\n", order.kappa_alpha());
            for (k, v) in g.as_slice().iter().enumerate() {
                s.push_str(&format!("g[{k:>3}] = {:>14}\n", fmt_e(*v)));
            }
            for (so, b) in &bs {
                s.push('\n');
                for (l, v) in b.iter().enumerate() {
                    s.push_str(&format!("b{so}[{l}] = {:>14}\n", fmt_e(*v)));
                }
            }
            s.push('\n');
            for (p, v) in a.as_slice().iter().enumerate() {
                s.push_str(&format!("a[{p}] = {:>14}\n", fmt_e(*v)));
            }
            s
        }
    };
    write_out(out, &text).map_err(|e| e.to_string())
}

fn run_riesz_apply(
    alpha: f64,
    scheme: usize,
    m: usize,
    poly: usize,
    format: &str,
    out: &Option<PathBuf>,
) -> Result<(), String> {
    let fmt = parse_format(format)?;
    if m % 2 != 0 {
        return Err(format!("M = {m} must be even so x = 1/2 is a grid node"));
    }
    let order = RieszOrder::new(alpha).map_err(|e| e.to_string())?;
    let grid = Grid1D::new(0.0, 1.0, m).map_err(|e| e.to_string())?;
    let u = GridFn::sample(grid, |x| x.powi(poly as i32) * (1.0 - x).powi(poly as i32));
    let w = riesz_derivative(&u, &order, scheme).map_err(|e| e.to_string())?;
    let approx = w.values()[m / 2 - 1];
    let exact = exact_riesz_symmetric_poly(poly, &order, 0.5).map_err(|e| e.to_string())?;
    let error = (approx - exact).abs();
    let text = match fmt {
        EmitFormat::Csv => format!(
            "alpha,order,poly,h,approx,exact,error\n{alpha},{scheme},{poly},{},{},{},{}\n",
            1.0 / m as f64,
            fmt_e(approx),
            fmt_e(exact),
            fmt_e(error)
        ),
        EmitFormat::Json => {
            let mut s = serde_json::to_string_pretty(&serde_json::json!({
                "alpha": alpha,
                "order": scheme,
                "poly": poly,
                "h": 1.0 / m as f64,
                "approx": approx,
                "exact": exact,
                "error": error,
            }))
            .unwrap();
            s.push('\n');
            s
        }
        EmitFormat::Pretty => format!(
            "alpha = {alpha}, scheme order {scheme}, u = x^{poly}(1-x)^{poly}, h = 1/{m}\n\
             approx(1/2) = {}\nexact(1/2)  = {}\nerror       = {}\n",
            fmt_e(approx),
            fmt_e(exact),
            fmt_e(error)
        ),
    };
    write_out(out, &text).map_err(|e| e.to_string())
}

fn run_telegraph_solve(
    alpha: f64,
    nu: f64,
    kappa_sq: f64,
    m: usize,
    n: usize,
    problem: &str,
    out: &Option<PathBuf>,
) -> Result<(), String> {
    let order = RieszOrder::new(alpha).map_err(|e| e.to_string())?;
    let p = if problem == "example3" {
        if nu != 1.0 || kappa_sq != 1.0 {
            return Err("example3 fixes nu = 1 and kappa-sq = 1".into());
        }
        example3(&order).map_err(|e| e.to_string())?
    } else if let Some(spec) = problem.strip_prefix("manufactured:m=") {
        let poly: usize = spec.parse().map_err(|_| format!("bad problem spec {problem:?}"))?;
        manufactured(&order, nu, kappa_sq, poly).map_err(|e| e.to_string())?
    } else {
        return Err(format!("unknown problem {problem:?} (example3 | manufactured:m=<int>)"));
    };
    let sol = solve(&p, m, n).map_err(|e| e.to_string())?;
    let mut text = serde_json::to_string_pretty(&sol.to_json()).unwrap();
    text.push('\n');
    write_out(out, &text).map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result: Result<bool, String> = match &cli.cmd {
        Cmd::Coeffs { alpha, count, format, out } => {
            run_coeffs(*alpha, *count, format, out).map(|_| true)
        }
        Cmd::RieszApply { alpha, order, m, poly, format, out } => {
            run_riesz_apply(*alpha, *order, *m, *poly, format, out).map(|_| true)
        }
        Cmd::RieszConvergence { scheme, poly, alphas, cells, format, out, parallel } => {
            let (def_alphas, def_cells) = default_sweep(*scheme, *poly);
            let alphas = alphas.clone().unwrap_or(def_alphas);
            let cells = cells.clone().unwrap_or(def_cells);
            example1_sweep(*scheme, *poly, &alphas, &cells, *parallel)
                .map_err(|e| e.to_string())
                .and_then(|rows| emit_rows(&rows, format, out).map(|_| true))
        }
        Cmd::TelegraphSolve { alpha, nu, kappa_sq, m, n, problem, out } => {
            run_telegraph_solve(*alpha, *nu, *kappa_sq, *m, *n, problem, out).map(|_| true)
        }
        Cmd::TelegraphConvergence { alphas, cells, format, out, parallel } => {
            example3_sweep(alphas, cells, *parallel)
                .map_err(|e| e.to_string())
                .and_then(|rows| emit_rows(&rows, format, out).map(|_| true))
        }
        Cmd::VerifyProperties { format, out } => {
            let report = property_suite();
            let run = parse_format(format).and_then(|fmt| {
                let text = match fmt {
                    EmitFormat::Json => {
                        let mut s = serde_json::to_string_pretty(&report).unwrap();
                        s.push('\n');
                        s
                    }
                    _ => report.pretty(),
                };
                write_out(out, &text).map_err(|e| e.to_string())
            });
            run.map(|_| report.all_passed())
        }
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
