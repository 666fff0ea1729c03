//! Verification harness: convergence-table sweeps for the three numerical
//! examples, the structured property suite, and canonical CSV/JSON/pretty
//! emitters.

use crate::coeffs::{
    a_coeffs, g_coeffs, theorem1_bounds, CentredCoeffs, RieszOrder,
};
use crate::error::{Error, Result};
use crate::linalg::{
    banded_solve, cholesky_pd_check, gershgorin_interval, toeplitz_matvec, BandedMatrix,
};
use crate::riesz_ops::{
    build_a, build_d, centred_diff_apply, exact_riesz_symmetric_poly, riesz_derivative, Grid1D,
    GridFn,
};
use crate::telegraph::{
    example3, manufactured, max_error, solve, stability_check, step, StepMatrices,
    TelegraphProblem,
};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

/// One record of a convergence table: absolute error E at resolution
/// (h[, τ]) and the experimental convergence order against the previous
/// (coarser) row of the same α block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub alpha: f64,
    pub h: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    #[serde(rename = "E")]
    pub e: f64,
    #[serde(rename = "ECO", default, skip_serializing_if = "Option::is_none")]
    pub eco: Option<f64>,
}

/// ECO = log(E(h₁)/E(h₂)) / log(h₁/h₂) for h₁ > h₂; for τ = h refinement
/// by factor 2 this reduces to log₂(E(2τ,2h)/E(τ,h)).
pub fn eco(e_coarse: f64, h_coarse: f64, e_fine: f64, h_fine: f64) -> f64 {
    (e_coarse / e_fine).ln() / (h_coarse / h_fine).ln()
}

/// Run `n` independent cells on up to `threads` workers, returning results
/// in index order regardless of completion order.
pub fn run_parallel<T, F>(n: usize, threads: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    if threads <= 1 || n <= 1 {
        return (0..n).map(f).collect();
    }
    let counter = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<T>>> = (0..n).map(|_| Mutex::new(None)).collect();
    std::thread::scope(|s| {
        for _ in 0..threads.min(n) {
            s.spawn(|| loop {
                let i = counter.fetch_add(1, Ordering::Relaxed);
                if i >= n {
                    break;
                }
                let out = f(i);
                *slots[i].lock().unwrap() = Some(out);
            });
        }
    });
    slots.into_iter().map(|m| m.into_inner().unwrap().unwrap()).collect()
}

/// Assemble rows from per-cell errors laid out α-outer / resolution-inner,
/// filling ECO from the previous row of each α block.
fn assemble_rows(
    alphas: &[f64],
    hs: &[f64],
    taus: Option<&[f64]>,
    errors: &[f64],
) -> Vec<ConvergenceRow> {
    let mut rows = Vec::with_capacity(alphas.len() * hs.len());
    for (ai, &alpha) in alphas.iter().enumerate() {
        for (hi, &h) in hs.iter().enumerate() {
            let e = errors[ai * hs.len() + hi];
            let eco_val = if hi == 0 {
                None
            } else {
                Some(eco(errors[ai * hs.len() + hi - 1], hs[hi - 1], e, h))
            };
            rows.push(ConvergenceRow {
                alpha,
                h,
                tau: taus.map(|t| t[hi]),
                e,
                eco: eco_val,
            });
        }
    }
    rows
}

/// Absolute error of one scheme application on u(x) = x^m(1−x)^m at
/// x = 1/2, grid of `m_cells` on [0, 1].
fn scheme_error_at_half(
    scheme_order: usize,
    poly_m: usize,
    alpha: f64,
    m_cells: usize,
) -> Result<f64> {
    if m_cells % 2 != 0 {
        return Err(Error::InvalidGrid(format!(
            "M = {m_cells}: x = 1/2 is a grid node only for even M"
        )));
    }
    let order = RieszOrder::new(alpha)?;
    let grid = Grid1D::new(0.0, 1.0, m_cells)?;
    let u = GridFn::sample(grid, |x| x.powi(poly_m as i32) * (1.0 - x).powi(poly_m as i32));
    let w = riesz_derivative(&u, &order, scheme_order)?;
    let exact = exact_riesz_symmetric_poly(poly_m, &order, 0.5)?;
    Ok((w.values()[m_cells / 2 - 1] - exact).abs())
}

/// Spatial sweep of the polynomial example: scheme of order 2n applied to
/// u_n(x) = x^{2n}(1−x)^{2n}, error at x = 1/2. The polynomial degree is
/// matched to the scheme (4 ↔ u₂, 6 ↔ u₃, 8 ↔ u₄, 10 ↔ u₅) unless
/// overridden via `poly_m`.
pub fn example1_sweep(
    scheme_order: usize,
    poly_m: Option<usize>,
    alphas: &[f64],
    m_cells: &[usize],
    threads: usize,
) -> Result<Vec<ConvergenceRow>> {
    let poly_m = poly_m.unwrap_or(scheme_order);
    for &m in m_cells {
        if m % 2 != 0 {
            return Err(Error::InvalidGrid(format!("M = {m} must be even (x = 1/2 sampling)")));
        }
    }
    let cells: Vec<(f64, usize)> = alphas
        .iter()
        .flat_map(|&a| m_cells.iter().map(move |&m| (a, m)))
        .collect();
    let results = run_parallel(cells.len(), threads, |i| {
        let (a, m) = cells[i];
        scheme_error_at_half(scheme_order, poly_m, a, m)
    });
    let errors = results.into_iter().collect::<Result<Vec<f64>>>()?;
    let hs: Vec<f64> = m_cells.iter().map(|&m| 1.0 / m as f64).collect();
    Ok(assemble_rows(alphas, &hs, None, &errors))
}

/// Order-reduction sweep: the 4th-order scheme on u(x) = x(1−x), which
/// violates the smoothness hypothesis; the observed order drops to 2.
pub fn example2_sweep(
    alphas: &[f64],
    m_cells: &[usize],
    threads: usize,
) -> Result<Vec<ConvergenceRow>> {
    example1_sweep(4, Some(1), alphas, m_cells, threads)
}

/// Telegraph sweep with the τ = h pairing: for each (α, M = N) run the
/// full solver on the published example and record the space-time max
/// error against its (residual-resolved) exact solution.
pub fn example3_sweep(
    alphas: &[f64],
    m_eq_n: &[usize],
    threads: usize,
) -> Result<Vec<ConvergenceRow>> {
    let cells: Vec<(f64, usize)> = alphas
        .iter()
        .flat_map(|&a| m_eq_n.iter().map(move |&m| (a, m)))
        .collect();
    let results = run_parallel(cells.len(), threads, |i| -> Result<f64> {
        let (a, mn) = cells[i];
        let order = RieszOrder::new(a)?;
        let p = example3(&order)?;
        let sol = solve(&p, mn, mn)?;
        let exact = p.exact().ok_or_else(|| Error::Domain("example lacks exact solution".into()))?;
        Ok(max_error(&sol, exact))
    });
    let errors = results.into_iter().collect::<Result<Vec<f64>>>()?;
    let hs: Vec<f64> = m_eq_n.iter().map(|&m| 1.0 / m as f64).collect();
    let taus = hs.clone();
    Ok(assemble_rows(alphas, &hs, Some(&taus), &errors))
}

// ---------------------------------------------------------------------------
// Property suite
// ---------------------------------------------------------------------------

/// One named invariant check with its tolerance spelled out.
#[derive(Debug, Clone, Serialize)]
pub struct PropertyCheck {
    pub name: String,
    pub tolerance: String,
    pub passed: bool,
    pub detail: String,
}

/// Structured pass/fail report of the whole invariant suite.
#[derive(Debug, Clone, Serialize)]
pub struct PropertyReport {
    pub checks: Vec<PropertyCheck>,
}

impl PropertyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn pretty(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let mark = if c.passed { "PASS" } else { "FAIL" };
            out.push_str(&format!("{mark}  {:<42} tol {:<24} {}\n", c.name, c.tolerance, c.detail));
        }
        let (p, n) = (self.checks.iter().filter(|c| c.passed).count(), self.checks.len());
        out.push_str(&format!("{p}/{n} properties passed\n"));
        out
    }
}

/// Residual and tolerance of the two-sided coefficient identity
/// Σ_{k≠0}|g_k| = g_0, with the analytic tail bound (plus a small
/// floating-point accumulation allowance) as tolerance. Public so a
/// deliberately corrupted coefficient table can be fed in to demonstrate
/// the check has teeth.
pub fn theorem1_iv_identity(c: &CentredCoeffs) -> Result<(f64, f64)> {
    let order = RieszOrder::new(c.alpha())?;
    let bounds = theorem1_bounds(&order);
    let k_max = c.max_index();
    let tail: f64 = (1..=k_max).map(|k| c.g(k).abs()).sum();
    let residual = (c.g(0) - 2.0 * tail).abs();
    let tol = 2.0 * bounds.tail_upper(k_max + 1) + 1e-9;
    Ok((residual, tol))
}

fn check(name: &str, tolerance: &str, passed: bool, detail: String) -> PropertyCheck {
    PropertyCheck { name: name.into(), tolerance: tolerance.into(), passed, detail }
}

struct Lcg(u64);

impl Lcg {
    fn next_f64(&mut self) -> f64 {
        self.0 = self.0.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (self.0 >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
    }

    fn next_unit(&mut self) -> f64 {
        0.5 * (self.next_f64() + 1.0)
    }
}

/// Run every named invariant from the coefficient, matrix, operator and
/// solver layers; failures become report entries, never panics.
pub fn property_suite() -> PropertyReport {
    let mut checks = Vec::new();
    let alphas = [1.1, 1.3, 1.5, 1.7, 1.9];

    // --- Theorem 1 (i): per-coefficient bounds for k >= 3.
    {
        let mut worst = f64::INFINITY;
        let mut ok = true;
        for &a in &alphas {
            let order = RieszOrder::new(a).unwrap();
            let b = theorem1_bounds(&order);
            let g = g_coeffs(&order, 120);
            for k in 3..=120 {
                let lo = b.g_lower(k);
                let hi = b.g_upper(k);
                let v = g.g(k).abs();
                worst = worst.min((v - lo).min(hi - v));
                ok &= lo < v && v < hi;
            }
        }
        checks.push(check(
            "theorem1-i-coefficient-bounds",
            "strict inequality",
            ok,
            format!("min slack {worst:.3e}"),
        ));
    }

    // --- Theorem 1 (ii)/(iii): partial-sum and tail bounds.
    {
        let mut ok = true;
        let mut detail = String::from("all sampled (n, m) windows inside bounds");
        'outer: for &a in &alphas {
            let order = RieszOrder::new(a).unwrap();
            let b = theorem1_bounds(&order);
            let g = g_coeffs(&order, 2000);
            for n in [3usize, 5, 10] {
                for m in [n, n + 17, n + 500] {
                    let s: f64 = (n..=m).map(|k| g.g(k).abs()).sum();
                    if !(b.sum_lower(m, n) < s && s < b.sum_upper(m, n)) {
                        ok = false;
                        detail = format!("window n={n}, m={m} escapes at alpha={a}");
                        break 'outer;
                    }
                }
                // Tail: Σ_{k=n}^{K} with K large is inside the Q bounds.
                let t: f64 = (n..=2000).map(|k| g.g(k).abs()).sum();
                if !(b.tail_lower(n) < t + b.tail_upper(2001) && t < b.tail_upper(n)) {
                    ok = false;
                    detail = format!("tail n={n} escapes at alpha={a}");
                    break 'outer;
                }
            }
        }
        checks.push(check("theorem1-ii-iii-sum-tail-bounds", "strict inequality", ok, detail));
    }

    // --- Theorem 1 (iv): identity Σ_{k≠0}|g_k| = g_0 with analytic tail
    // tolerance, plus the two-sided range bounds for g_0.
    {
        let mut ok = true;
        let mut worst: f64 = 0.0;
        for &a in &alphas {
            let order = RieszOrder::new(a).unwrap();
            let g = g_coeffs(&order, 100_000);
            let (res, tol) = theorem1_iv_identity(&g).unwrap();
            worst = worst.max(res / tol);
            ok &= res <= tol;
            let lo = 2f64.powf(1.0 + a) / ((1.0 + a) * PI);
            let hi = 2f64.powf(1.0 + a) / PI;
            ok &= lo <= g.g(0) && g.g(0) <= hi;
        }
        checks.push(check(
            "theorem1-iv-identity-and-range",
            "2·tail_upper(K+1) + 1e-9",
            ok,
            format!("max residual/tol {worst:.3}"),
        ));
    }

    // --- Theorem 1 (v): monotonicity of g_k in α.
    {
        let mut ok = true;
        let mut a1 = 1.05;
        while a1 < 1.9 {
            let a2 = a1 + 0.05;
            let g1 = g_coeffs(&RieszOrder::new(a1).unwrap(), 40);
            let g2 = g_coeffs(&RieszOrder::new(a2).unwrap(), 40);
            for k in 0..=40 {
                if k == 1 {
                    ok &= g1.g(k) > g2.g(k);
                } else {
                    ok &= g1.g(k) < g2.g(k);
                }
            }
            a1 = a2;
        }
        checks.push(check(
            "theorem1-v-alpha-monotonicity",
            "strict inequality",
            ok,
            "0.05 alpha grid, k <= 40".into(),
        ));
    }

    // --- Appendix Lemma I scalar inequalities by dense sampling.
    {
        let mut ok = true;
        let mut x: f64 = 1e-4;
        while x < 1.0 {
            ok &= 1.0 - x < (-x).exp();
            if x <= 0.7968 {
                ok &= 1.0 - x > (-2.0 * x).exp();
            }
            x += 1e-4;
        }
        checks.push(check(
            "lemma-i-scalar-inequalities",
            "strict inequality",
            ok,
            "1−x < e^{−x} on (0,1); 1−x > e^{−2x} on (0,0.7968]".into(),
        ));
    }

    // --- Series coefficients vs generating function (2 sin(z/2)/z)^α.
    {
        let mut ok = true;
        let mut worst: f64 = 0.0;
        for &a in &alphas {
            let s = a_coeffs(&RieszOrder::new(a).unwrap());
            let z: f64 = 0.1;
            let gen = (2.0 * (z / 2.0).sin() / z).powf(a);
            let res = (s.eval(z) - gen).abs();
            worst = worst.max(res / z.powi(8));
            ok &= res <= 5.0 * z.powi(8);
        }
        checks.push(check(
            "series-a-generating-function",
            "5·|z|^8 at z = 0.1",
            ok,
            format!("max residual/z^8 = {worst:.3}"),
        ));
    }

    // --- Lemmas 4 and 9: D_α inner-product inequalities, 100 random vectors.
    {
        let mut rng = Lcg(0xD1CE);
        let mut ok = true;
        for &a in &[1.1, 1.5, 1.9] {
            let order = RieszOrder::new(a).unwrap();
            let m = 24;
            let h = 1.0 / m as f64;
            let d = build_d(&order, m);
            for _ in 0..100 {
                let v: Vec<f64> = (0..m - 1).map(|_| rng.next_f64()).collect();
                let dv = d.matvec(&v).unwrap();
                let vv: f64 = h * v.iter().map(|x| x * x).sum::<f64>();
                let dvv: f64 = h * v.iter().zip(&dv).map(|(x, y)| x * y).sum::<f64>();
                let dvdv: f64 = h * dv.iter().map(|x| x * x).sum::<f64>();
                ok &= (1.0 - a / 6.0) * vv <= dvv + 1e-12 * vv;
                ok &= dvv <= vv * (1.0 + 1e-12);
                ok &= dvdv.sqrt() <= vv.sqrt() * (1.0 + 1e-12);
            }
        }
        checks.push(check(
            "lemma-4-9-d-alpha-inner-products",
            "1e-12 relative slack",
            ok,
            "(1−α/6)‖v‖² ≤ (D_α v, v) ≤ ‖v‖², ‖D_α v‖ ≤ ‖v‖".into(),
        ));
    }

    // --- Lemma 5: A_α is self-adjoint in the h-weighted inner product.
    {
        let mut rng = Lcg(0xA5A5);
        let mut ok = true;
        let order = RieszOrder::new(1.7).unwrap();
        let m = 24;
        let h = 1.0 / m as f64;
        let a_mat = build_a(&order, m);
        for _ in 0..100 {
            let u: Vec<f64> = (0..m - 1).map(|_| rng.next_f64()).collect();
            let v: Vec<f64> = (0..m - 1).map(|_| rng.next_f64()).collect();
            let au = toeplitz_matvec(&a_mat, &u).unwrap();
            let av = toeplitz_matvec(&a_mat, &v).unwrap();
            let lhs: f64 = h * au.iter().zip(&v).map(|(x, y)| x * y).sum::<f64>();
            let rhs: f64 = h * u.iter().zip(&av).map(|(x, y)| x * y).sum::<f64>();
            ok &= (lhs - rhs).abs() <= 1e-12 * lhs.abs().max(1e-6);
        }
        checks.push(check(
            "lemma-5-a-alpha-self-adjoint",
            "1e-12 relative",
            ok,
            "(A_α u, v) = (u, A_α v), 100 random pairs".into(),
        ));
    }

    // --- Lemma 6: A_α positive definite.
    {
        let mut ok = true;
        for m in [8usize, 16, 32, 64] {
            let mut a = 1.1;
            while a < 1.95 {
                let order = RieszOrder::new(a).unwrap();
                ok &= cholesky_pd_check(&build_a(&order, m).to_dense()).unwrap();
                a += 0.1;
            }
        }
        checks.push(check(
            "lemma-6-a-alpha-positive-definite",
            "Cholesky pivots > −1e-12·scale",
            ok,
            "M in {8,16,32,64}, alpha on 0.1 grid".into(),
        ));
    }

    // --- Lemma 8: G_α PD under the stability condition (50 random sets).
    {
        let mut rng = Lcg(0x6A1F);
        let mut ok = true;
        let mut tested = 0;
        while tested < 50 {
            let a = 1.05 + 0.9 * rng.next_unit();
            let nu = 0.2 + 2.0 * rng.next_unit();
            let kappa_sq = 0.2 + 2.0 * rng.next_unit();
            let m = 8 + (8.0 * rng.next_unit()) as usize;
            let n = 8 + (24.0 * rng.next_unit()) as usize;
            let order = RieszOrder::new(a.min(1.95)).unwrap();
            let h = 1.0 / m as f64;
            let tau = 1.0 / n as f64;
            let lhs = (tau / h.powf(order.alpha())) / (tau * nu * nu / 12.0 + 1.0 / tau);
            let g0 = g_coeffs(&order, 0).g(0);
            let rhs = (6.0 - order.alpha()) / (2.0 * kappa_sq * g0);
            if lhs > rhs {
                continue;
            }
            tested += 1;
            let scale = (tau * kappa_sq / (6.0 * h.powf(order.alpha())))
                / (tau * nu * nu / 12.0 + 1.0 / tau);
            let g_mat =
                build_d(&order, m).to_dense().add_scaled(-scale, &build_a(&order, m).to_dense());
            ok &= cholesky_pd_check(&g_mat).unwrap();
        }
        checks.push(check(
            "lemma-8-g-alpha-pd-under-stability",
            "Cholesky pivots > −1e-12·scale",
            ok,
            "50 random parameter sets satisfying the condition".into(),
        ));
    }

    // --- Gershgorin interval of A_α inside (0, g_0 + 2^{1+α}/π).
    {
        let mut ok = true;
        for &a in &alphas {
            let order = RieszOrder::new(a).unwrap();
            let g0 = g_coeffs(&order, 0).g(0);
            let iv = gershgorin_interval(&build_a(&order, 32).to_dense());
            ok &= iv.lower > 0.0 && iv.upper < g0 + 2f64.powf(1.0 + a) / PI;
        }
        checks.push(check(
            "gershgorin-a-alpha-interval",
            "strict containment",
            ok,
            "interval inside (0, g_0 + 2^{1+α}/π), M = 32".into(),
        ));
    }

    // --- Classical limit: relaxed α = 2 reduces scheme 4 to the compact
    // second-derivative formula; continuity at α = 1.9999.
    {
        let passed = classical_limit_check();
        checks.push(check(
            "classical-limit-compact-laplacian",
            "1e-8 at α=2; O(2−α) continuity",
            passed.is_ok() && *passed.as_ref().unwrap(),
            match &passed {
                Ok(_) => "scheme 4 vs (I + δ²/12)^{-1}δ²/h² on x³(1−x)³".into(),
                Err(e) => format!("error: {e}"),
            },
        ));
    }

    // --- Theorem 3 behavioral stability: no blowup over 1024 steps.
    {
        let passed = no_blowup_check();
        checks.push(check(
            "theorem3-no-blowup-1024-steps",
            "level-difference ≤ 100× early max",
            passed.is_ok() && *passed.as_ref().unwrap(),
            match &passed {
                Ok(_) => "homogeneous problem, random initial perturbation".into(),
                Err(e) => format!("error: {e}"),
            },
        ));
    }

    // --- Oracle equivalences (also acceptance criterion 8).
    {
        let passed = oracle_equivalences_check();
        checks.push(check(
            "oracle-equivalences",
            "1e-14 paths / 1e-12 sources",
            passed.is_ok() && *passed.as_ref().unwrap(),
            match &passed {
                Ok(_) => "scheme-4 vs D_α path; centred vs Toeplitz; printed vs manufactured f"
                    .into(),
                Err(e) => format!("error: {e}"),
            },
        ));
    }

    PropertyReport { checks }
}

fn classical_limit_check() -> Result<bool> {
    let m = 16;
    let grid = Grid1D::new(0.0, 1.0, m)?;
    let h = grid.h();
    let u = GridFn::sample(grid, |x| x.powi(3) * (1.0 - x).powi(3));
    let compact_d2 = |vals: &[f64]| -> Result<Vec<f64>> {
        let d2: Vec<f64> = (1..m)
            .map(|j| (vals[j - 1] - 2.0 * vals[j] + vals[j + 1]) / (h * h))
            .collect();
        let mut lhs = BandedMatrix::zeros(m - 1, 1);
        for i in 0..m - 1 {
            lhs.set_entry(i, i, 1.0 - 2.0 / 12.0);
            if i > 0 {
                lhs.set_entry(i, i - 1, 1.0 / 12.0);
            }
            if i + 1 < m - 1 {
                lhs.set_entry(i, i + 1, 1.0 / 12.0);
            }
        }
        banded_solve(&lhs, &d2)
    };
    let reference = compact_d2(u.values())?;
    let mut ok = true;
    // Exact limit: α = 2 relaxed must agree to rounding.
    let w2 = riesz_derivative(&u, &RieszOrder::relaxed(2.0)?, 4)?;
    for (a, b) in w2.values().iter().zip(&reference) {
        ok &= (a - b).abs() <= 1e-8 * (1.0 + b.abs());
    }
    // Continuity: α = 1.9999 stays within O(2−α) of the limit.
    let alpha = 1.9999;
    let w = riesz_derivative(&u, &RieszOrder::new(alpha)?, 4)?;
    let scale: f64 = reference.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    for (a, b) in w.values().iter().zip(&reference) {
        ok &= (a - b).abs() <= 10.0 * (2.0 - alpha) * scale + 1e-8;
    }
    Ok(ok)
}

fn no_blowup_check() -> Result<bool> {
    let order = RieszOrder::new(1.5)?;
    let p = TelegraphProblem::new(
        order,
        1.0,
        1.0,
        (0.0, 1.0),
        1.0,
        Box::new(|_| 0.0),
        Box::new(|_| 0.0),
        Box::new(|_, _| 0.0),
    )?;
    let m = 16;
    let n = 1024;
    if !stability_check(&p, m, n)?.satisfied {
        return Ok(false);
    }
    let mats = StepMatrices::build(&p, m, n)?;
    let mut rng = Lcg(0xB10B);
    let mut prev: Vec<f64> = (0..m - 1).map(|_| 1e-3 * rng.next_f64()).collect();
    let mut curr: Vec<f64> = (0..m - 1).map(|_| 1e-3 * rng.next_f64()).collect();
    let zeros = vec![0.0; m + 1];
    let h = 1.0 / m as f64;
    let mut early_max: f64 = 0.0;
    let mut overall_max: f64 = 0.0;
    for s in 1..n {
        let next = step(&mats, &prev, &curr, &zeros, &zeros, &zeros)?;
        let d =
            (h * next.iter().zip(&curr).map(|(x, y)| (x - y) * (x - y)).sum::<f64>()).sqrt();
        if s <= 5 {
            early_max = early_max.max(d);
        }
        overall_max = overall_max.max(d);
        prev = curr;
        curr = next;
    }
    Ok(overall_max <= 100.0 * early_max)
}

fn oracle_equivalences_check() -> Result<bool> {
    let mut ok = true;
    let order = RieszOrder::new(1.5)?;
    let m = 16;
    let grid = Grid1D::new(0.0, 1.0, m)?;
    let u = GridFn::sample(grid, |x| x.powi(4) * (1.0 - x).powi(4));

    // Scheme-4 path vs explicit D_α banded solve of the raw difference.
    let w4 = riesz_derivative(&u, &order, 4)?;
    let diff = centred_diff_apply(&order, &u)?;
    let h_a = grid.h().powf(order.alpha());
    let rhs: Vec<f64> = diff.iter().map(|v| -v / h_a).collect();
    let d = build_d(&order, m);
    let via_d = banded_solve(&d, &rhs)?;
    let scale: f64 = via_d.iter().fold(0.0_f64, |acc, v| acc.max(v.abs())).max(1.0);
    for (a, b) in w4.values().iter().zip(&via_d) {
        ok &= (a - b).abs() <= 1e-14 * scale;
    }

    // Centred difference vs Toeplitz matvec.
    let a_mat = build_a(&order, m);
    let av = toeplitz_matvec(&a_mat, u.interior())?;
    let dscale: f64 = diff.iter().fold(0.0_f64, |acc, v| acc.max(v.abs())).max(1.0);
    for (a, b) in diff.iter().zip(&av) {
        ok &= (a - b).abs() <= 1e-14 * dscale;
    }

    // Printed vs manufactured source on the 17×17 sample grid.
    for &alpha in &[1.2, 1.4, 1.6, 1.8] {
        let o = RieszOrder::new(alpha)?;
        let printed = example3(&o)?;
        let made = manufactured(&o, 1.0, 1.0, 6)?;
        for i in 0..=16 {
            let x = i as f64 / 16.0;
            for k in 0..=16 {
                let t = k as f64 / 16.0;
                ok &= (printed.f(x, t) - made.f(x, t)).abs() <= 1e-12;
            }
        }
    }
    Ok(ok)
}

// ---------------------------------------------------------------------------
// Emitters
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmitFormat {
    Csv,
    Json,
    Pretty,
}

impl std::str::FromStr for EmitFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            "pretty" => Ok(Self::Pretty),
            other => Err(Error::Domain(format!("unknown format {other:?}"))),
        }
    }
}

/// 7-significant-digit e-format with a signed two-digit exponent, matching
/// the tables' number style (e.g. `5.712995e-06`).
pub fn fmt_e(x: f64) -> String {
    let s = format!("{x:.6e}");
    let (mant, exp) = s.split_once('e').unwrap();
    let (sign, digits) = match exp.strip_prefix('-') {
        Some(d) => ("-", d),
        None => ("+", exp),
    };
    format!("{mant}e{sign}{digits:0>2}")
}

fn csv_line(r: &ConvergenceRow) -> String {
    format!(
        "{},{},{},{},{}",
        r.alpha,
        r.h,
        r.tau.map(|t| t.to_string()).unwrap_or_default(),
        fmt_e(r.e),
        r.eco.map(|v| format!("{v:.4}")).unwrap_or_default(),
    )
}

/// Serialize a table. CSV uses the canonical header `alpha,h,tau,E,ECO`
/// with empty cells for absent τ/ECO; JSON is an array of row objects;
/// pretty is a column-aligned layout with a blank line between α blocks.
pub fn emit(rows: &[ConvergenceRow], format: EmitFormat) -> String {
    match format {
        EmitFormat::Csv => {
            let mut out = String::from("alpha,h,tau,E,ECO\n");
            for r in rows {
                out.push_str(&csv_line(r));
                out.push('\n');
            }
            out
        }
        EmitFormat::Json => {
            let mut s = serde_json::to_string_pretty(rows).expect("rows serialize");
            s.push('\n');
            s
        }
        EmitFormat::Pretty => {
            let mut out = format!(
                "{:>7}  {:>12}  {:>12}  {:>13}  {:>8}\n",
                "alpha", "h", "tau", "E", "ECO"
            );
            let mut last_alpha = f64::NAN;
            for r in rows {
                if !last_alpha.is_nan() && r.alpha != last_alpha {
                    out.push('\n');
                }
                last_alpha = r.alpha;
                out.push_str(&format!(
                    "{:>7}  {:>12}  {:>12}  {:>13}  {:>8}\n",
                    r.alpha,
                    format!("{:.6}", r.h),
                    r.tau.map(|t| format!("{t:.6}")).unwrap_or_else(|| "-".into()),
                    fmt_e(r.e),
                    r.eco.map(|v| format!("{v:.4}")).unwrap_or_else(|| "-".into()),
                ));
            }
            out
        }
    }
}

/// Parse canonical CSV back into rows; emit ∘ parse is byte-identical.
pub fn parse_csv(s: &str) -> Result<Vec<ConvergenceRow>> {
    let mut lines = s.lines();
    match lines.next() {
        Some("alpha,h,tau,E,ECO") => {}
        other => {
            return Err(Error::CsvParse(format!("bad header {other:?}")));
        }
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != 5 {
            return Err(Error::CsvParse(format!("line {}: expected 5 fields", i + 2)));
        }
        let num = |s: &str| -> Result<f64> {
            s.parse::<f64>().map_err(|e| Error::CsvParse(format!("line {}: {e}", i + 2)))
        };
        let opt = |s: &str| -> Result<Option<f64>> {
            if s.is_empty() {
                Ok(None)
            } else {
                num(s).map(Some)
            }
        };
        rows.push(ConvergenceRow {
            alpha: num(parts[0])?,
            h: num(parts[1])?,
            tau: opt(parts[2])?,
            e: num(parts[3])?,
            eco: opt(parts[4])?,
        });
    }
    Ok(rows)
}

/// Parse the JSON emitter's output back into rows.
pub fn parse_json(s: &str) -> Result<Vec<ConvergenceRow>> {
    Ok(serde_json::from_str(s)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffs::g_coeffs;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn fmt_e_examples() {
        assert_eq!(fmt_e(5.712995e-6), "5.712995e-06");
        assert_eq!(fmt_e(1.985528e-6), "1.985528e-06");
        assert_eq!(fmt_e(-2.5), "-2.500000e+00");
        assert_eq!(fmt_e(1.23e-13), "1.230000e-13");
        assert_eq!(fmt_e(0.0), "0.000000e+00");
    }

    #[test]
    fn csv_empty_and_single_row() {
        assert_eq!(emit(&[], EmitFormat::Csv), "alpha,h,tau,E,ECO\n");
        let row = ConvergenceRow { alpha: 1.5, h: 0.05, tau: None, e: 5.712995e-6, eco: None };
        assert_eq!(emit(&[row], EmitFormat::Csv), "alpha,h,tau,E,ECO\n1.5,0.05,,5.712995e-06,\n");
    }

    #[test]
    fn csv_round_trip_is_byte_identical() {
        let rows = vec![
            ConvergenceRow { alpha: 1.1, h: 0.05, tau: None, e: 1.985528e-6, eco: None },
            ConvergenceRow {
                alpha: 1.1,
                h: 0.025,
                tau: None,
                e: 1.247417e-7,
                eco: Some(3.9925),
            },
            ConvergenceRow {
                alpha: 1.2,
                h: 0.125,
                tau: Some(0.125),
                e: 3.374742e-6,
                eco: Some(4.296),
            },
        ];
        let csv = emit(&rows, EmitFormat::Csv);
        let parsed = parse_csv(&csv).unwrap();
        assert_eq!(emit(&parsed, EmitFormat::Csv), csv);
    }

    #[test]
    fn json_round_trip_preserves_table() {
        let rows = vec![
            ConvergenceRow { alpha: 1.5, h: 0.05, tau: None, e: 5.712995e-6, eco: None },
            ConvergenceRow {
                alpha: 1.5,
                h: 0.025,
                tau: Some(0.025),
                e: 3.588944e-7,
                eco: Some(3.9926),
            },
        ];
        let parsed = parse_json(&emit(&rows, EmitFormat::Json)).unwrap();
        assert_eq!(parsed, rows);
    }

    #[test]
    fn parse_csv_rejects_malformed_input() {
        assert!(parse_csv("h,alpha\n").is_err());
        assert!(parse_csv("alpha,h,tau,E,ECO\n1.5,0.05\n").is_err());
        assert!(parse_csv("alpha,h,tau,E,ECO\nx,0.05,,1e-6,\n").is_err());
    }

    #[test]
    fn eco_is_scale_invariant() {
        let base = eco(1.9e-6, 0.05, 1.2e-7, 0.025);
        let scaled = eco(1.9e-3, 0.05, 1.2e-4, 0.025);
        assert!((base - scaled).abs() < 1e-12);
    }

    #[test]
    fn example1_sweep_matches_frozen_errors() {
        let rows = example1_sweep(4, None, &[1.5], &[20, 40], 1).unwrap();
        assert_eq!(rows.len(), 2);
        assert!(rel(rows[0].e, 5.771_266_287_542_264_89e-6) <= 1e-6);
        assert!(rel(rows[1].e, 3.598_066_020_821_244_49e-7) <= 1e-6);
        assert!(rows[0].eco.is_none());
        let o = rows[1].eco.unwrap();
        assert!((o - 4.0).abs() < 0.1, "ECO {o}");
    }

    #[test]
    fn example1_sweep_rejects_odd_m() {
        assert!(example1_sweep(4, None, &[1.5], &[21], 1).is_err());
    }

    #[test]
    fn example2_sweep_shows_order_two() {
        let rows = example2_sweep(&[1.5], &[10, 20, 40], 1).unwrap();
        assert!(rel(rows[0].e, 2.836_228_263_576_545_67e-3) <= 1e-6);
        assert!(rel(rows[1].e, 7.065_730_943_747_183_80e-4) <= 1e-6);
        let o = rows[2].eco.unwrap();
        assert!((o - 2.0).abs() < 0.05, "ECO {o}");
    }

    #[test]
    fn example3_sweep_matches_frozen_errors() {
        let rows = example3_sweep(&[1.2], &[4, 8], 1).unwrap();
        assert!(rel(rows[0].e, 5.035_898_932_857_893_39e-5) <= 1e-6);
        assert!(rel(rows[1].e, 2.597_094_445_823_682_10e-6) <= 1e-6);
        assert_eq!(rows[0].tau, Some(0.25));
        let o = rows[1].eco.unwrap();
        assert!((o - 4.28).abs() < 0.1, "ECO {o}");
    }

    #[test]
    fn parallel_sweep_matches_serial() {
        let serial = example1_sweep(4, None, &[1.3, 1.7], &[20, 40], 1).unwrap();
        let parallel = example1_sweep(4, None, &[1.3, 1.7], &[20, 40], 4).unwrap();
        assert_eq!(serial, parallel);
    }

    #[test]
    fn property_suite_is_green() {
        let report = property_suite();
        assert!(report.all_passed(), "\n{}", report.pretty());
    }

    #[test]
    fn injected_coefficient_fault_is_detected() {
        let order = RieszOrder::new(1.5).unwrap();
        let good = g_coeffs(&order, 100_000);
        let (res, tol) = theorem1_iv_identity(&good).unwrap();
        assert!(res <= tol);
        // Corrupt g_1 by 1e-6: the identity check must fail.
        let mut g = good.as_slice().to_vec();
        g[1] += 1e-6;
        let bad = CentredCoeffs::from_raw(1.5, g);
        let (res, tol) = theorem1_iv_identity(&bad).unwrap();
        assert!(res > tol, "fault not detected: residual {res} <= tol {tol}");
    }
}
