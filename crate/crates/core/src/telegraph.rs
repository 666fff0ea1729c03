//! Three-level compact finite difference solver for the Riesz spatial
//! telegraph equation
//!
//! u_tt + ν u_t = κ² ∂^α u/∂|x|^α + f(x, t),   u(l,t) = u(L,t) = 0,
//!
//! fourth-order accurate in both time and space, including the first-level
//! bootstrap solve and the sufficient stability condition.

use crate::coeffs::{g_coeffs, RieszOrder};
use crate::error::{Error, Result};
use crate::linalg::{toeplitz_matvec, BandedMatrix, DenseFactorization, SymToeplitzMatrix};
use crate::riesz_ops::{build_a, build_d, exact_riesz_symmetric_poly, Grid1D};
use crate::specfun::gamma;
use serde::Serialize;
use std::f64::consts::PI;

/// Uniform time grid on [0, T] with N steps: t_s = s τ, τ = T/N.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    t_final: f64,
    n: usize,
    tau: f64,
}

impl TimeGrid {
    pub fn new(t_final: f64, n: usize) -> Result<Self> {
        if !(t_final > 0.0) {
            return Err(Error::InvalidGrid(format!("need T > 0, got {t_final}")));
        }
        if n < 2 {
            return Err(Error::InvalidGrid(format!("need N >= 2, got {n}")));
        }
        Ok(Self { t_final, n, tau: t_final / n as f64 })
    }

    pub fn t_final(&self) -> f64 {
        self.t_final
    }

    pub fn steps(&self) -> usize {
        self.n
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn node(&self, s: usize) -> f64 {
        s as f64 * self.tau
    }
}

/// Choice of the scalar coefficient multiplying the A_α·φ term of the
/// first-level bootstrap right-hand side.
///
/// Collecting the Taylor expansion of u(x, τ) termwise gives the ∂^α φ
/// coefficient κ²τ²(2 − ντ)/6. The published formula instead prints
/// (2 − ν²) in that position, which is dimensionally inconsistent (it mixes
/// a ν²τ³-order term into a τ²-level coefficient) and demotes the bootstrap
/// to second order, dragging the global order down to ~1. The
/// derivation-consistent coefficient is the default; the printed variant is
/// kept selectable so the order collapse can be demonstrated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BootstrapCoefficient {
    /// κ²τ²(2 − ντ)/6 — restores O(τ⁴ + h⁴) overall.
    #[default]
    DerivationConsistent,
    /// κ²τ²(2 − ν²)/6 — the formula as published.
    AsPrinted,
}

type ScalarFn = Box<dyn Fn(f64) -> f64 + Sync + Send>;
type SpaceTimeFn = Box<dyn Fn(f64, f64) -> f64 + Sync + Send>;

/// PDE data for one telegraph problem on [l, L] × [0, T].
pub struct TelegraphProblem {
    nu: f64,
    kappa_sq: f64,
    order: RieszOrder,
    l: f64,
    r: f64,
    t_final: f64,
    phi: ScalarFn,
    phi_t: ScalarFn,
    f: SpaceTimeFn,
    f_t0: Option<ScalarFn>,
    exact: Option<SpaceTimeFn>,
    bootstrap: BootstrapCoefficient,
}

impl TelegraphProblem {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        order: RieszOrder,
        nu: f64,
        kappa_sq: f64,
        domain: (f64, f64),
        t_final: f64,
        phi: ScalarFn,
        phi_t: ScalarFn,
        f: SpaceTimeFn,
    ) -> Result<Self> {
        if !(nu > 0.0) {
            return Err(Error::Domain(format!("damping nu must be positive, got {nu}")));
        }
        if !(domain.1 > domain.0) {
            return Err(Error::InvalidGrid("need L > l".into()));
        }
        if !(t_final > 0.0) {
            return Err(Error::InvalidGrid("need T > 0".into()));
        }
        let p = Self {
            nu,
            kappa_sq,
            order,
            l: domain.0,
            r: domain.1,
            t_final,
            phi,
            phi_t,
            f,
            f_t0: None,
            exact: None,
            bootstrap: BootstrapCoefficient::default(),
        };
        // Compatibility with the homogeneous Dirichlet data.
        let scale = (p.phi)(0.5 * (p.l + p.r)).abs().max(1.0);
        for e in [p.l, p.r] {
            if (p.phi)(e).abs() > 1e-12 * scale {
                return Err(Error::Domain(format!("phi({e}) != 0 violates boundary data")));
            }
        }
        Ok(p)
    }

    pub fn with_f_t0(mut self, f_t0: ScalarFn) -> Self {
        self.f_t0 = Some(f_t0);
        self
    }

    pub fn with_exact(mut self, exact: SpaceTimeFn) -> Self {
        self.exact = Some(exact);
        self
    }

    pub fn with_bootstrap(mut self, bootstrap: BootstrapCoefficient) -> Self {
        self.bootstrap = bootstrap;
        self
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn kappa_sq(&self) -> f64 {
        self.kappa_sq
    }

    pub fn order(&self) -> &RieszOrder {
        &self.order
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.l, self.r)
    }

    pub fn t_final(&self) -> f64 {
        self.t_final
    }

    pub fn exact(&self) -> Option<&SpaceTimeFn> {
        self.exact.as_ref()
    }

    pub fn f(&self, x: f64, t: f64) -> f64 {
        (self.f)(x, t)
    }

    /// ∂f/∂t at t = 0: the supplied callable when present, otherwise a
    /// fourth-order central difference with step τ_fd = max(τ/64, 1e-5).
    /// The term enters the bootstrap at O(τ³), so an O(τ_fd⁴) substitute
    /// cannot disturb the global O(τ⁴) order.
    fn f_t0_value(&self, x: f64, tau: f64) -> f64 {
        match &self.f_t0 {
            Some(g) => g(x),
            None => {
                let d = (tau / 64.0).max(1e-5);
                let f = &self.f;
                (-f(x, 2.0 * d) + 8.0 * f(x, d) - 8.0 * f(x, -d) + f(x, -2.0 * d)) / (12.0 * d)
            }
        }
    }
}

/// Both sides of the sufficient stability condition, plus the
/// informational proof-side timestep condition.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct StabilityReport {
    /// (τ/h^α)(τν²/12 + 1/τ)^{−1}.
    pub lhs: f64,
    /// (6 − α)/(2 κ² g_0).
    pub rhs: f64,
    pub satisfied: bool,
    pub margin: f64,
    /// τ(13/24 + ντ/4) ≤ √3/9 — the convergence proof's extra timestep
    /// condition, informational only.
    pub proof_timestep_ok: bool,
}

/// Evaluate the stability condition for a prospective (M, N) pair.
pub fn stability_check(p: &TelegraphProblem, m: usize, n: usize) -> Result<StabilityReport> {
    let h = (p.r - p.l) / m as f64;
    let tau = p.t_final / n as f64;
    let g0 = g_coeffs(&p.order, 0).g(0);
    let lhs = (tau / h.powf(p.order.alpha())) / (tau * p.nu * p.nu / 12.0 + 1.0 / tau);
    let rhs = (6.0 - p.order.alpha()) / (2.0 * p.kappa_sq * g0);
    let proof_timestep_ok = tau * (13.0 / 24.0 + p.nu * tau / 4.0) <= 3f64.sqrt() / 9.0;
    Ok(StabilityReport { lhs, rhs, satisfied: lhs <= rhs, margin: rhs - lhs, proof_timestep_ok })
}

/// Time-independent matrices and factorizations for one (M, N) run,
/// factored once and reused across all steps.
pub struct StepMatrices {
    grid: Grid1D,
    tgrid: TimeGrid,
    nu: f64,
    alpha: f64,
    /// a = ν²/12 + 1/τ².
    a: f64,
    /// b = ν/(2τ).
    b: f64,
    /// c₂ = (κ²/h^α)(5/6).
    c2: f64,
    /// c₃ = (κ²/h^α)(1/12 − ντ/24).
    c3: f64,
    /// κ²/h^α, kept for the unexpanded-form residual evaluation.
    kappa_h: f64,
    d: BandedMatrix,
    a_mat: SymToeplitzMatrix,
    lhs: DenseFactorization,
    boot: DenseFactorization,
}

impl StepMatrices {
    pub fn build(p: &TelegraphProblem, m: usize, n: usize) -> Result<Self> {
        let grid = Grid1D::new(p.l, p.r, m)?;
        let tgrid = TimeGrid::new(p.t_final, n)?;
        let h = grid.h();
        let tau = tgrid.tau();
        let alpha = p.order.alpha();
        let kappa_h = p.kappa_sq / h.powf(alpha);
        let a = p.nu * p.nu / 12.0 + 1.0 / (tau * tau);
        let b = p.nu / (2.0 * tau);
        // c₁ = (κ²/h^α)(1/12 + ντ/24), folded into the factored LHS.
        let c1 = kappa_h * (1.0 / 12.0 + p.nu * tau / 24.0);
        let c2 = kappa_h * (5.0 / 6.0);
        let c3 = kappa_h * (1.0 / 12.0 - p.nu * tau / 24.0);
        let d = build_d(&p.order, m);
        let a_mat = build_a(&p.order, m);
        let lhs_dense = d.to_dense().scale(a + b).add_scaled(c1, &a_mat.to_dense());
        let lhs = DenseFactorization::factor(&lhs_dense)?;
        let boot_dense = d
            .to_dense()
            .add_scaled(p.kappa_sq * tau * tau / (6.0 * h.powf(alpha)), &a_mat.to_dense());
        let boot = DenseFactorization::factor(&boot_dense)?;
        Ok(Self { grid, tgrid, nu: p.nu, alpha, a, b, c2, c3, kappa_h, d, a_mat, lhs, boot })
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn time_grid(&self) -> &TimeGrid {
        &self.tgrid
    }

    /// The temporal compact bracket H_t applied to full-node samples of f at
    /// three consecutive levels.
    fn h_t_bracket(&self, f_prev: &[f64], f_curr: &[f64], f_next: &[f64]) -> Vec<f64> {
        let c = self.nu * self.tgrid.tau() / 24.0;
        f_curr
            .iter()
            .zip(f_prev)
            .zip(f_next)
            .map(|((&fc, &fp), &fn_)| fc + (fn_ - 2.0 * fc + fp) / 12.0 + c * (fn_ - fp))
            .collect()
    }

    /// Apply D_α to the interior part of a full-node vector, including the
    /// boundary closure terms (α/24)·v_0 and (α/24)·v_M that arise when v
    /// does not vanish at the boundary (the source term f does not).
    fn apply_d_with_boundary(&self, v_nodes: &[f64]) -> Result<Vec<f64>> {
        let m = self.grid.cells();
        let mut out = self.d.matvec(&v_nodes[1..m])?;
        out[0] += self.alpha / 24.0 * v_nodes[0];
        out[m - 2] += self.alpha / 24.0 * v_nodes[m];
        Ok(out)
    }
}

/// One application of the three-level scheme: given interior u^{s−1}, u^s
/// and full-node samples of f at levels s−1, s, s+1, produce interior
/// u^{s+1}.
///
/// This is the expanded form [(a+b)D + c₁A] u^{s+1}
/// = [2aD − c₂A] u^s + [−(a−b)D − c₃A] u^{s−1} + D·(H_t f), obtained by
/// collecting the operator equation D J_t u = −(κ²/h^α) H_t (A u) + D H_t f
/// level by level; `step_residual` re-evaluates the unexpanded form as an
/// independent oracle.
pub fn step(
    m: &StepMatrices,
    u_prev: &[f64],
    u_curr: &[f64],
    f_prev: &[f64],
    f_curr: &[f64],
    f_next: &[f64],
) -> Result<Vec<f64>> {
    let dim = m.grid.cells() - 1;
    for v in [u_prev, u_curr] {
        if v.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: v.len() });
        }
    }
    for v in [f_prev, f_curr, f_next] {
        if v.len() != dim + 2 {
            return Err(Error::DimensionMismatch { expected: dim + 2, got: v.len() });
        }
    }
    let d_curr = m.d.matvec(u_curr)?;
    let a_curr = toeplitz_matvec(&m.a_mat, u_curr)?;
    let d_prev = m.d.matvec(u_prev)?;
    let a_prev = toeplitz_matvec(&m.a_mat, u_prev)?;
    let hf = m.h_t_bracket(f_prev, f_curr, f_next);
    let dhf = m.apply_d_with_boundary(&hf)?;
    let mut rhs = vec![0.0; dim];
    for j in 0..dim {
        rhs[j] = 2.0 * m.a * d_curr[j] - m.c2 * a_curr[j] - (m.a - m.b) * d_prev[j]
            - m.c3 * a_prev[j]
            + dhf[j];
    }
    m.lhs.solve(&rhs)
}

/// Max-norm residual of the unexpanded operator equation
/// D (J_t u) + (κ²/h^α) H_t (A u) − D (H_t f) at one step; an independent
/// check that the expanded coefficients used by [`step`] are exact.
pub fn step_residual(
    m: &StepMatrices,
    u_prev: &[f64],
    u_curr: &[f64],
    u_next: &[f64],
    f_prev: &[f64],
    f_curr: &[f64],
    f_next: &[f64],
) -> Result<f64> {
    let tau = m.tgrid.tau();
    let dim = u_curr.len();
    // J_t u = (ν²/12 + 1/τ²) δ_t² u + (ν/2τ)(u^{s+1} − u^{s−1}).
    let jt: Vec<f64> = (0..dim)
        .map(|j| {
            m.a * (u_next[j] - 2.0 * u_curr[j] + u_prev[j]) + m.b * (u_next[j] - u_prev[j])
        })
        .collect();
    let lhs = m.d.matvec(&jt)?;
    let au_prev = toeplitz_matvec(&m.a_mat, u_prev)?;
    let au_curr = toeplitz_matvec(&m.a_mat, u_curr)?;
    let au_next = toeplitz_matvec(&m.a_mat, u_next)?;
    let c = m.nu * tau / 24.0;
    let ht_au: Vec<f64> = (0..dim)
        .map(|j| {
            au_curr[j] + (au_next[j] - 2.0 * au_curr[j] + au_prev[j]) / 12.0
                + c * (au_next[j] - au_prev[j])
        })
        .collect();
    let hf = m.h_t_bracket(f_prev, f_curr, f_next);
    let dhf = m.apply_d_with_boundary(&hf)?;
    let mut res: f64 = 0.0;
    for j in 0..dim {
        res = res.max((lhs[j] + m.kappa_h * ht_au[j] - dhf[j]).abs());
    }
    Ok(res)
}

/// First-level bootstrap: solve
/// (D_α + (κ²τ²/(6h^α)) A_α) u¹
///   = D_α·[φ + (τ/6)(6 − 3ντ + ν²τ²)φ̇ + (τ²/6)(3 − ντ)f(·,0)
///          + (τ³/6)∂_t f(·,0)] − (κ²τ²/(6h^α))·c·A_α·φ
/// on interior nodes, where c is the bootstrap coefficient (2 − ντ by
/// default; see [`BootstrapCoefficient`]). The bracket is evaluated on all
/// nodes so the D_α boundary closure picks up the nonzero boundary values
/// of f(·,0) and ∂_t f(·,0).
pub fn bootstrap_first_level(p: &TelegraphProblem, m: &StepMatrices) -> Result<Vec<f64>> {
    let grid = &m.grid;
    let tau = m.tgrid.tau();
    let nu = p.nu;
    let cells = grid.cells();
    let mut bracket = Vec::with_capacity(cells + 1);
    for j in 0..=cells {
        let x = grid.node(j);
        bracket.push(
            (p.phi)(x)
                + tau / 6.0 * (6.0 - 3.0 * nu * tau + nu * nu * tau * tau) * (p.phi_t)(x)
                + tau * tau / 6.0 * (3.0 - nu * tau) * (p.f)(x, 0.0)
                + tau.powi(3) / 6.0 * p.f_t0_value(x, tau),
        );
    }
    let mut rhs = m.apply_d_with_boundary(&bracket)?;
    let c = match p.bootstrap {
        BootstrapCoefficient::DerivationConsistent => 2.0 - nu * tau,
        BootstrapCoefficient::AsPrinted => 2.0 - nu * nu,
    };
    let phi_int: Vec<f64> = grid.interior_nodes().iter().map(|&x| (p.phi)(x)).collect();
    let a_phi = toeplitz_matvec(&m.a_mat, &phi_int)?;
    let scale = p.kappa_sq * tau * tau / (6.0 * grid.h().powf(p.order.alpha()));
    for (r, ap) in rhs.iter_mut().zip(&a_phi) {
        *r -= scale * c * ap;
    }
    m.boot.solve(&rhs)
}

/// Full space-time solution of one run, with the stability record.
pub struct Solution {
    grid: Grid1D,
    tgrid: TimeGrid,
    /// values[s][j] on all nodes j = 0..M (boundary rows identically zero).
    values: Vec<Vec<f64>>,
    stability: StabilityReport,
    alpha: f64,
}

impl Solution {
    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn time_grid(&self) -> &TimeGrid {
        &self.tgrid
    }

    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn stability(&self) -> &StabilityReport {
        &self.stability
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// JSON dump of the run in a stable schema.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "l": self.grid.left(),
            "L": self.grid.right(),
            "T": self.tgrid.t_final(),
            "M": self.grid.cells(),
            "N": self.tgrid.steps(),
            "alpha": self.alpha,
            "values": self.values,
            "stability": self.stability,
        })
    }
}

/// Run the full scheme: u⁰ = φ, u¹ from the bootstrap, then the three-level
/// recurrence, with every matrix factored exactly once. A violated
/// stability condition is recorded in the returned report, not an error
/// (the condition is sufficient, not necessary).
pub fn solve(p: &TelegraphProblem, m_cells: usize, n_steps: usize) -> Result<Solution> {
    let mats = StepMatrices::build(p, m_cells, n_steps)?;
    let stability = stability_check(p, m_cells, n_steps)?;
    let grid = mats.grid;
    let tgrid = mats.tgrid;
    let m = grid.cells();

    let full = |interior: &[f64]| -> Vec<f64> {
        let mut row = Vec::with_capacity(m + 1);
        row.push(0.0);
        row.extend_from_slice(interior);
        row.push(0.0);
        row
    };

    // f sampled at every node and level once.
    let fvals: Vec<Vec<f64>> = (0..=n_steps)
        .map(|s| (0..=m).map(|j| (p.f)(grid.node(j), tgrid.node(s))).collect())
        .collect();

    let u0_int: Vec<f64> = grid.interior_nodes().iter().map(|&x| (p.phi)(x)).collect();
    let u1_int = bootstrap_first_level(p, &mats)?;

    let mut values = Vec::with_capacity(n_steps + 1);
    values.push(full(&u0_int));
    values.push(full(&u1_int));
    let mut prev = u0_int;
    let mut curr = u1_int;
    for s in 1..n_steps {
        let next = step(&mats, &prev, &curr, &fvals[s - 1], &fvals[s], &fvals[s + 1])?;
        values.push(full(&next));
        prev = curr;
        curr = next;
    }
    Ok(Solution { grid, tgrid, values, stability, alpha: p.order.alpha() })
}

/// E(τ, h) = max over all nodes and levels of |u(x_j, t_s) − u_j^s|.
pub fn max_error(sol: &Solution, exact: impl Fn(f64, f64) -> f64) -> f64 {
    let mut e: f64 = 0.0;
    for (s, row) in sol.values.iter().enumerate() {
        let t = sol.tgrid.node(s);
        for (j, &v) in row.iter().enumerate() {
            e = e.max((exact(sol.grid.node(j), t) - v).abs());
        }
    }
    e
}

/// Which time factor the published example's exact solution uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Example3Candidate {
    /// u = x⁶(1−x)⁶ e^t (as stated in the example's text).
    ExpT,
    /// u = x⁶(1−x)⁶ e^{t²} (consistent with the printed source term).
    ExpTSquared,
}

/// The printed source term of the telegraph example (ν = 1, κ² = 1):
/// f(x,t) = 2(2t² + t + 1)e^{t²} x⁶(1−x)⁶
///   + (e^{t²}/(2 cos(πα/2))) Σ_{ℓ=0}^{6} c_ℓ Γ(7+ℓ)/Γ(7+ℓ−α)
///     [x^{6+ℓ−α} + (1−x)^{6+ℓ−α}],  c = (1, −6, 15, −20, 15, −6, 1).
fn example3_source(alpha: f64) -> impl Fn(f64, f64) -> f64 + Sync + Send {
    const C: [f64; 7] = [1.0, -6.0, 15.0, -20.0, 15.0, -6.0, 1.0];
    let sec = 1.0 / (PI * alpha / 2.0).cos();
    // Γ(7+ℓ) at integer argument is (6+ℓ)!, kept exact; only the
    // fractional-argument denominator needs the gamma routine.
    let ratios: Vec<f64> = (0..7)
        .map(|l| {
            let fact: f64 = (2..=(6 + l)).map(|j| j as f64).product();
            fact / gamma(7.0 + l as f64 - alpha).unwrap()
        })
        .collect();
    move |x: f64, t: f64| {
        let w = x.powi(6) * (1.0 - x).powi(6);
        let et2 = (t * t).exp();
        let mut s = 0.0;
        for l in 0..7 {
            let e = 6.0 + l as f64 - alpha;
            s += C[l] * ratios[l] * (x.powf(e) + (1.0 - x).powf(e));
        }
        2.0 * (2.0 * t * t + t + 1.0) * et2 * w + 0.5 * et2 * sec * s
    }
}

/// Resolve which exact-solution candidate actually satisfies the PDE with
/// the printed source term, by direct residual substitution on an interior
/// sample grid. Returns the winner together with both max residuals.
pub fn resolve_example3_exact(order: &RieszOrder) -> Result<(Example3Candidate, f64, f64)> {
    let alpha = order.alpha();
    let f = example3_source(alpha);
    let mut res_t: f64 = 0.0;
    let mut res_t2: f64 = 0.0;
    for i in 1..=9 {
        let x = i as f64 / 10.0;
        let w = x.powi(6) * (1.0 - x).powi(6);
        let riesz_w = exact_riesz_symmetric_poly(6, order, x)?;
        for k in 0..=8 {
            let t = k as f64 / 8.0;
            // u_tt + u_t − Riesz(u) − f for u = w T(t), ν = κ² = 1.
            let r1 = 2.0 * t.exp() * w - t.exp() * riesz_w - f(x, t);
            let r2 = 2.0 * (2.0 * t * t + t + 1.0) * (t * t).exp() * w
                - (t * t).exp() * riesz_w
                - f(x, t);
            res_t = res_t.max(r1.abs());
            res_t2 = res_t2.max(r2.abs());
        }
    }
    let winner =
        if res_t2 < res_t { Example3Candidate::ExpTSquared } else { Example3Candidate::ExpT };
    Ok((winner, res_t, res_t2))
}

/// The published numerical example: ν = 1, κ² = 1 on [0,1] × [0,1], initial
/// data φ = x⁶(1−x)⁶, φ̇ = 0, the printed source term, and the exact
/// solution selected by [`resolve_example3_exact`].
pub fn example3(order: &RieszOrder) -> Result<TelegraphProblem> {
    let alpha = order.alpha();
    let (winner, _, _) = resolve_example3_exact(order)?;
    let f = example3_source(alpha);
    let exact: SpaceTimeFn = match winner {
        Example3Candidate::ExpTSquared => {
            Box::new(|x: f64, t: f64| x.powi(6) * (1.0 - x).powi(6) * (t * t).exp())
        }
        Example3Candidate::ExpT => {
            Box::new(|x: f64, t: f64| x.powi(6) * (1.0 - x).powi(6) * t.exp())
        }
    };
    // ∂_t f(x, 0): the polynomial part differentiates to 2 x⁶(1−x)⁶ at
    // t = 0; the e^{t²} factors contribute nothing there.
    let f_t0: ScalarFn = Box::new(|x: f64| 2.0 * x.powi(6) * (1.0 - x).powi(6));
    Ok(TelegraphProblem::new(
        *order,
        1.0,
        1.0,
        (0.0, 1.0),
        1.0,
        Box::new(|x: f64| x.powi(6) * (1.0 - x).powi(6)),
        Box::new(|_x: f64| 0.0),
        Box::new(f),
    )?
    .with_f_t0(f_t0)
    .with_exact(exact))
}

/// Manufactured problem with exact solution u = x^m (1−x)^m e^{t²} on
/// [0,1] × [0,1]: the source is assembled from the analytic time
/// derivatives and the exact Riesz derivative, giving an independent
/// cross-check of the printed source term (they must agree for m = 6).
pub fn manufactured(order: &RieszOrder, nu: f64, kappa_sq: f64, m: usize) -> Result<TelegraphProblem> {
    if m < 2 {
        return Err(Error::Domain("manufactured problem needs m >= 2 (boundary-finite Riesz)".into()));
    }
    let alpha = order.alpha();
    // Precompute the exact-Riesz expansion coefficients of x^m(1−x)^m.
    let mut coefs = Vec::with_capacity(m + 1);
    for ell in 0..=m {
        let c = crate::riesz_ops::symmetric_poly_coef(m, ell, alpha).unwrap_or(0.0);
        let sign = if ell % 2 == 0 { 1.0 } else { -1.0 };
        coefs.push(sign * c);
    }
    let half_sec = 0.5 / (PI * alpha / 2.0).cos();
    let mm = m as i32;
    let riesz_w = move |x: f64| -> f64 {
        let mut s = 0.0;
        for (ell, &c) in coefs.iter().enumerate() {
            let e = (m + ell) as f64 - alpha;
            s += c * (x.powf(e) + (1.0 - x).powf(e));
        }
        -half_sec * s
    };
    let w = move |x: f64| x.powi(mm) * (1.0 - x).powi(mm);
    let f: SpaceTimeFn = Box::new(move |x: f64, t: f64| {
        let tt = (t * t).exp();
        // T'' + ν T' with T = e^{t²}: (2 + 4t²)e^{t²} + ν·2t e^{t²}.
        let time_part = (2.0 + 4.0 * t * t + nu * 2.0 * t) * tt;
        time_part * w(x) - kappa_sq * tt * riesz_w(x)
    });
    let f_t0: ScalarFn = Box::new(move |x: f64| 2.0 * nu * w(x));
    let exact: SpaceTimeFn = Box::new(move |x: f64, t: f64| w(x) * (t * t).exp());
    Ok(TelegraphProblem::new(
        *order,
        nu,
        kappa_sq,
        (0.0, 1.0),
        1.0,
        Box::new(w),
        Box::new(|_x: f64| 0.0),
        f,
    )?
    .with_f_t0(f_t0)
    .with_exact(exact))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::cholesky_pd_check;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    struct Lcg(u64);
    impl Lcg {
        fn next_f64(&mut self) -> f64 {
            self.0 = self.0.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (self.0 >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
        }
    }

    #[test]
    fn stability_report_examples() {
        let order = RieszOrder::new(1.5).unwrap();
        let p = example3(&order).unwrap();
        let rep = stability_check(&p, 32, 32).unwrap();
        assert!(rep.satisfied);
        assert!(rep.margin > 0.0);
        // rhs with α → 2 relaxed: (6−2)/(2κ²·2) = 1/κ².
        let order2 = RieszOrder::relaxed(2.0).unwrap();
        let p2 = manufactured(&order2, 1.0, 1.0, 6).unwrap();
        let rep2 = stability_check(&p2, 16, 16).unwrap();
        assert!((rep2.rhs - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_data_gives_zero_solution() {
        let order = RieszOrder::new(1.5).unwrap();
        let p = TelegraphProblem::new(
            order,
            1.0,
            1.0,
            (0.0, 1.0),
            1.0,
            Box::new(|_| 0.0),
            Box::new(|_| 0.0),
            Box::new(|_, _| 0.0),
        )
        .unwrap();
        let sol = solve(&p, 8, 8).unwrap();
        for row in sol.values() {
            for &v in row {
                assert_eq!(v, 0.0);
            }
        }
    }

    #[test]
    fn example3_resolution_prefers_exp_t_squared() {
        for alpha in [1.2, 1.5, 1.8] {
            let order = RieszOrder::new(alpha).unwrap();
            let (winner, res_t, res_t2) = resolve_example3_exact(&order).unwrap();
            assert_eq!(winner, Example3Candidate::ExpTSquared);
            // The consistent candidate wins by many orders of magnitude;
            // the absolute scale of the loser's residual is set by
            // max|x⁶(1−x)⁶| ≈ 2.4e-4, so ~1e-4 is an O(1) mismatch.
            assert!(res_t2 < 1e-10, "residual {res_t2}");
            assert!(res_t > 1e-4, "residual {res_t}");
            assert!(res_t > 1e5 * res_t2.max(1e-300));
        }
    }

    #[test]
    fn printed_f_matches_manufactured_f() {
        // Criterion: once the exact-solution ambiguity is resolved, the
        // printed source and the manufactured source agree pointwise.
        for alpha in [1.2, 1.6, 1.9] {
            let order = RieszOrder::new(alpha).unwrap();
            let printed = example3(&order).unwrap();
            let made = manufactured(&order, 1.0, 1.0, 6).unwrap();
            for i in 0..=16 {
                let x = i as f64 / 16.0;
                for k in 0..=16 {
                    let t = k as f64 / 16.0;
                    let a = printed.f(x, t);
                    let b = made.f(x, t);
                    assert!(
                        (a - b).abs() <= 1e-12 * (1.0 + a.abs()),
                        "f mismatch at alpha={alpha}, x={x}, t={t}: {a} vs {b}"
                    );
                }
            }
        }
    }

    /// Frozen end-to-end errors from the double-precision reference
    /// pipeline (exact solution x⁶(1−x)⁶ e^{t²}).
    #[test]
    fn solver_matches_frozen_errors() {
        let cases = [
            (1.2, 4, 5.035_898_932_857_893_39e-5),
            (1.2, 8, 2.597_094_445_823_682_10e-6),
            (1.6, 8, 3.596_611_385_981_254_33e-6),
            (1.8, 8, 3.531_161_380_700_663_38e-6),
        ];
        for (alpha, mn, want) in cases {
            let order = RieszOrder::new(alpha).unwrap();
            let p = example3(&order).unwrap();
            let sol = solve(&p, mn, mn).unwrap();
            let e = max_error(&sol, |x, t| x.powi(6) * (1.0 - x).powi(6) * (t * t).exp());
            // Rounding differences against the reference pipeline's gamma
            // implementation cap agreement around 1e-8 relative.
            assert!(rel(e, want) <= 1e-6, "alpha={alpha} M=N={mn}: E={e:.12e} want {want:.12e}");
        }
    }

    #[test]
    fn solver_is_fourth_order_on_example3() {
        let order = RieszOrder::new(1.6).unwrap();
        let p = example3(&order).unwrap();
        let exact = |x: f64, t: f64| x.powi(6) * (1.0 - x).powi(6) * (t * t).exp();
        let e8 = max_error(&solve(&p, 8, 8).unwrap(), exact);
        let e16 = max_error(&solve(&p, 16, 16).unwrap(), exact);
        let e32 = max_error(&solve(&p, 32, 32).unwrap(), exact);
        let eco1 = (e8 / e16).log2();
        let eco2 = (e16 / e32).log2();
        assert!((eco1 - 4.0).abs() < 0.3, "ECO {eco1}");
        assert!((eco2 - 4.0).abs() < 0.2, "ECO {eco2}");
    }

    #[test]
    fn printed_bootstrap_coefficient_collapses_order() {
        // With the published (2 − ν²) coefficient the first level is only
        // second-order accurate and the global order degrades toward 1;
        // refining the grid must then improve the error far more slowly
        // than fourth order.
        let order = RieszOrder::new(1.6).unwrap();
        let exact = |x: f64, t: f64| x.powi(6) * (1.0 - x).powi(6) * (t * t).exp();
        let p_bad = example3(&order).unwrap().with_bootstrap(BootstrapCoefficient::AsPrinted);
        let e16 = max_error(&solve(&p_bad, 16, 16).unwrap(), exact);
        let e32 = max_error(&solve(&p_bad, 32, 32).unwrap(), exact);
        let eco = (e16 / e32).log2();
        assert!(eco < 3.0, "printed coefficient unexpectedly kept order: ECO = {eco}");
        // And the default restores it at the same resolutions.
        let p_good = example3(&order).unwrap();
        let g16 = max_error(&solve(&p_good, 16, 16).unwrap(), exact);
        let g32 = max_error(&solve(&p_good, 32, 32).unwrap(), exact);
        assert!(((g16 / g32).log2() - 4.0).abs() < 0.2);
        assert!(g32 < e32);
    }

    #[test]
    fn step_residual_vanishes_on_solver_trajectory() {
        let order = RieszOrder::new(1.4).unwrap();
        let p = example3(&order).unwrap();
        let mn = 16;
        let mats = StepMatrices::build(&p, mn, mn).unwrap();
        let sol = solve(&p, mn, mn).unwrap();
        let grid = sol.grid();
        let fvals: Vec<Vec<f64>> = (0..=mn)
            .map(|s| (0..=mn).map(|j| p.f(grid.node(j), sol.time_grid().node(s))).collect())
            .collect();
        let vals = sol.values();
        let mut scale: f64 = 0.0;
        for row in vals {
            for &v in row {
                scale = scale.max(v.abs());
            }
        }
        // The expanded step and the unexpanded operator form are the same
        // equation; the trajectory must satisfy both to rounding error.
        let interior = |s: usize| &vals[s][1..mn];
        for s in 1..mn {
            let r = step_residual(
                &mats,
                interior(s - 1),
                interior(s),
                interior(s + 1),
                &fvals[s - 1],
                &fvals[s],
                &fvals[s + 1],
            )
            .unwrap();
            // Scale by the dominant coefficient magnitude (a ~ 1/τ²).
            assert!(r <= 1e-12 * mats.a * scale.max(1.0), "residual {r} at level {s}");
        }
    }

    #[test]
    fn bootstrap_zero_rhs_and_u1_accuracy() {
        let order = RieszOrder::new(1.6).unwrap();
        let zero = TelegraphProblem::new(
            order,
            1.0,
            1.0,
            (0.0, 1.0),
            1.0,
            Box::new(|_| 0.0),
            Box::new(|_| 0.0),
            Box::new(|_, _| 0.0),
        )
        .unwrap();
        let mats = StepMatrices::build(&zero, 8, 8).unwrap();
        let u1 = bootstrap_first_level(&zero, &mats).unwrap();
        assert!(u1.iter().all(|v| *v == 0.0));

        // The first level of the real example is O(τ⁴ + h⁴)-accurate.
        let p = example3(&order).unwrap();
        let mut prev_err = f64::INFINITY;
        for mn in [8usize, 16, 32] {
            let mats = StepMatrices::build(&p, mn, mn).unwrap();
            let u1 = bootstrap_first_level(&p, &mats).unwrap();
            let tau = mats.time_grid().tau();
            let mut err: f64 = 0.0;
            for (j, &x) in mats.grid().interior_nodes().iter().enumerate() {
                let exact = x.powi(6) * (1.0 - x).powi(6) * (tau * tau).exp();
                err = err.max((u1[j] - exact).abs());
            }
            assert!(err < prev_err / 8.0, "u1 error {err} not ~4th order vs {prev_err}");
            prev_err = err;
        }
    }

    #[test]
    fn fd_substitute_for_f_t0_preserves_order() {
        let order = RieszOrder::new(1.6).unwrap();
        let alpha = order.alpha();
        let f = example3_source(alpha);
        let exact = |x: f64, t: f64| x.powi(6) * (1.0 - x).powi(6) * (t * t).exp();
        // Same problem but without the analytic ∂_t f(·, 0).
        let p = TelegraphProblem::new(
            order,
            1.0,
            1.0,
            (0.0, 1.0),
            1.0,
            Box::new(|x: f64| x.powi(6) * (1.0 - x).powi(6)),
            Box::new(|_| 0.0),
            Box::new(f),
        )
        .unwrap();
        let e16 = max_error(&solve(&p, 16, 16).unwrap(), exact);
        let e32 = max_error(&solve(&p, 32, 32).unwrap(), exact);
        assert!(((e16 / e32).log2() - 4.0).abs() < 0.2);
    }

    #[test]
    fn lemma4_lemma9_d_alpha_inner_product_bounds() {
        let mut rng = Lcg(2024);
        for alpha in [1.1, 1.5, 1.9] {
            let order = RieszOrder::new(alpha).unwrap();
            let m = 24;
            let h = 1.0 / m as f64;
            let d = build_d(&order, m);
            for _ in 0..100 {
                let v: Vec<f64> = (0..m - 1).map(|_| rng.next_f64()).collect();
                let dv = d.matvec(&v).unwrap();
                // h-weighted inner products.
                let vv: f64 = h * v.iter().map(|x| x * x).sum::<f64>();
                let dvv: f64 = h * v.iter().zip(&dv).map(|(x, y)| x * y).sum::<f64>();
                let dvdv: f64 = h * dv.iter().map(|x| x * x).sum::<f64>();
                assert!((1.0 - alpha / 6.0) * vv <= dvv + 1e-12 * vv);
                assert!(dvv <= vv * (1.0 + 1e-12));
                assert!(dvdv.sqrt() <= vv.sqrt() * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn lemma5_a_alpha_self_adjoint() {
        let mut rng = Lcg(777);
        let order = RieszOrder::new(1.7).unwrap();
        let m = 24;
        let h = 1.0 / m as f64;
        let a = build_a(&order, m);
        for _ in 0..50 {
            let u: Vec<f64> = (0..m - 1).map(|_| rng.next_f64()).collect();
            let v: Vec<f64> = (0..m - 1).map(|_| rng.next_f64()).collect();
            let au = toeplitz_matvec(&a, &u).unwrap();
            let av = toeplitz_matvec(&a, &v).unwrap();
            let lhs: f64 = h * au.iter().zip(&v).map(|(x, y)| x * y).sum::<f64>();
            let rhs: f64 = h * u.iter().zip(&av).map(|(x, y)| x * y).sum::<f64>();
            assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(1e-6));
        }
    }

    #[test]
    fn lemma8_g_alpha_positive_definite_under_condition() {
        let mut rng = Lcg(31337);
        let mut tested = 0;
        while tested < 50 {
            let alpha = 1.05 + 0.9 * (rng.next_f64() * 0.5 + 0.5);
            let nu = 0.2 + 2.0 * (rng.next_f64() * 0.5 + 0.5);
            let kappa_sq = 0.2 + 2.0 * (rng.next_f64() * 0.5 + 0.5);
            let m = 8 + (8.0 * (rng.next_f64() * 0.5 + 0.5)) as usize;
            let n = 8 + (24.0 * (rng.next_f64() * 0.5 + 0.5)) as usize;
            let order = RieszOrder::new(alpha.min(1.95)).unwrap();
            let h = 1.0 / m as f64;
            let tau = 1.0 / n as f64;
            let lhs = (tau / h.powf(order.alpha())) / (tau * nu * nu / 12.0 + 1.0 / tau);
            let g0 = g_coeffs(&order, 0).g(0);
            let rhs = (6.0 - order.alpha()) / (2.0 * kappa_sq * g0);
            if lhs > rhs {
                continue; // condition not satisfied; sample again
            }
            tested += 1;
            // G_α = D_α − (τκ²/(6h^α))(τν²/12 + 1/τ)^{−1} A_α.
            let scale = (tau * kappa_sq / (6.0 * h.powf(order.alpha())))
                / (tau * nu * nu / 12.0 + 1.0 / tau);
            let g_mat = build_d(&order, m).to_dense().add_scaled(-scale, &build_a(&order, m).to_dense());
            assert!(
                cholesky_pd_check(&g_mat).unwrap(),
                "G_alpha not PD at alpha={alpha}, nu={nu}, kappa_sq={kappa_sq}, M={m}, N={n}"
            );
        }
    }

    #[test]
    fn no_blowup_over_1024_steps() {
        // Homogeneous problem under the stability condition, started from a
        // random perturbation: the level-difference norm must stay within
        // 100× its early maximum (behavioral stability certificate).
        let order = RieszOrder::new(1.5).unwrap();
        let p = TelegraphProblem::new(
            order,
            1.0,
            1.0,
            (0.0, 1.0),
            1.0,
            Box::new(|_| 0.0),
            Box::new(|_| 0.0),
            Box::new(|_, _| 0.0),
        )
        .unwrap();
        let m = 16;
        let n = 1024;
        assert!(stability_check(&p, m, n).unwrap().satisfied);
        let mats = StepMatrices::build(&p, m, n).unwrap();
        let mut rng = Lcg(5150);
        let mut prev: Vec<f64> = (0..m - 1).map(|_| 1e-3 * rng.next_f64()).collect();
        let mut curr: Vec<f64> = (0..m - 1).map(|_| 1e-3 * rng.next_f64()).collect();
        let zeros = vec![0.0; m + 1];
        let h = 1.0 / m as f64;
        let diff_norm = |a: &[f64], b: &[f64]| -> f64 {
            (h * a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>()).sqrt()
        };
        let mut early_max: f64 = 0.0;
        let mut overall_max: f64 = 0.0;
        for s in 1..n {
            let next = step(&mats, &prev, &curr, &zeros, &zeros, &zeros).unwrap();
            let d = diff_norm(&next, &curr);
            if s <= 5 {
                early_max = early_max.max(d);
            }
            overall_max = overall_max.max(d);
            prev = curr;
            curr = next;
        }
        assert!(overall_max <= 100.0 * early_max, "{overall_max} vs early {early_max}");
    }

    #[test]
    fn solution_json_schema() {
        let order = RieszOrder::new(1.5).unwrap();
        let p = example3(&order).unwrap();
        let sol = solve(&p, 8, 8).unwrap();
        let j = sol.to_json();
        assert_eq!(j["M"], 8);
        assert_eq!(j["N"], 8);
        assert_eq!(j["alpha"], 1.5);
        assert_eq!(j["values"].as_array().unwrap().len(), 9);
        assert_eq!(j["values"][0].as_array().unwrap().len(), 9);
        assert!(j["stability"]["satisfied"].as_bool().unwrap());
    }

    #[test]
    fn problem_validation() {
        let order = RieszOrder::new(1.5).unwrap();
        // nu must be positive.
        assert!(TelegraphProblem::new(
            order,
            0.0,
            1.0,
            (0.0, 1.0),
            1.0,
            Box::new(|_| 0.0),
            Box::new(|_| 0.0),
            Box::new(|_, _| 0.0),
        )
        .is_err());
        // phi must vanish at the boundary.
        assert!(TelegraphProblem::new(
            order,
            1.0,
            1.0,
            (0.0, 1.0),
            1.0,
            Box::new(|_| 1.0),
            Box::new(|_| 0.0),
            Box::new(|_, _| 0.0),
        )
        .is_err());
    }
}
