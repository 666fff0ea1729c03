//! Scalar coefficient families: the fractional centred-difference weights
//! `g_k`, the fractional-compact weights `b_ℓ`, the generating-series
//! coefficients `a_p`, and the analytic bound functions used by the
//! property suite.

use crate::error::{Error, Result};
use crate::specfun::gamma;
use std::f64::consts::PI;

/// Validated fractional order α ∈ (1, 2) with the derived constant
/// κ_α = ½ sec(πα/2) (negative on the open interval).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RieszOrder {
    alpha: f64,
    kappa_alpha: f64,
}

impl RieszOrder {
    /// Strict constructor: rejects anything outside the open interval (1, 2).
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 1.0 && alpha < 2.0) {
            return Err(Error::InvalidOrder { alpha, interval: "(1, 2)" });
        }
        Ok(Self::build(alpha))
    }

    /// Relaxed constructor admitting α ∈ (1, 2], intended solely for
    /// classical-limit tests (α = 2 reduces every operator to its integer
    /// second-derivative counterpart).
    pub fn relaxed(alpha: f64) -> Result<Self> {
        if !(alpha > 1.0 && alpha <= 2.0) {
            return Err(Error::InvalidOrder { alpha, interval: "(1, 2]" });
        }
        Ok(Self::build(alpha))
    }

    fn build(alpha: f64) -> Self {
        let kappa_alpha = 0.5 / (PI * alpha / 2.0).cos();
        Self { alpha, kappa_alpha }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// κ_α = ½ sec(πα/2); negative for α ∈ (1, 2).
    pub fn kappa_alpha(&self) -> f64 {
        self.kappa_alpha
    }
}

/// The centred-difference weights g_0..g_K for one α. Only the non-negative
/// indices are stored since g_k = g_{−k}.
#[derive(Debug, Clone)]
pub struct CentredCoeffs {
    alpha: f64,
    g: Vec<f64>,
}

impl CentredCoeffs {
    /// Construct from precomputed weights. Intended for tests (fault
    /// injection) and deserialization; normal code goes through [`g_coeffs`].
    pub fn from_raw(alpha: f64, g: Vec<f64>) -> Self {
        Self { alpha, g }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Maximum stored index K.
    pub fn max_index(&self) -> usize {
        self.g.len() - 1
    }

    /// g_{|k|}.
    pub fn g(&self, k: usize) -> f64 {
        self.g[k]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.g
    }

    /// Two-sided truncated sum g_0 + 2 Σ_{k=1}^{K} g_k. The full two-sided
    /// sum over all k is zero, so this tends to 0 as K grows.
    pub fn partial_sum(&self, k_max: usize) -> f64 {
        assert!(k_max <= self.max_index(), "partial_sum index exceeds stored range");
        self.g[0] + 2.0 * self.g[1..=k_max].iter().sum::<f64>()
    }
}

/// g_0 = Γ(α+1)/Γ²(α/2+1), then the forward recursion
/// g_k = (1 − (α+1)/(α/2+k)) g_{k−1}. The recursion is multiplicative with
/// factors in (0, 1) for k ≥ 2, hence numerically stable and O(K).
pub fn g_coeffs(order: &RieszOrder, k_max: usize) -> CentredCoeffs {
    let a = order.alpha();
    let mut g = Vec::with_capacity(k_max + 1);
    // Both gamma arguments are in (1, 3.1); no pole or overflow is possible.
    let g0 = gamma(a + 1.0).unwrap() / gamma(a / 2.0 + 1.0).unwrap().powi(2);
    g.push(g0);
    for k in 1..=k_max {
        let prev = g[k - 1];
        g.push((1.0 - (a + 1.0) / (a / 2.0 + k as f64)) * prev);
    }
    CentredCoeffs { alpha: a, g }
}

/// Free-function form of the truncated two-sided sum.
pub fn partial_sum(c: &CentredCoeffs, k_max: usize) -> f64 {
    c.partial_sum(k_max)
}

/// Compact-correction weights b_0..b_{n−1} for a scheme of order 2n.
#[derive(Debug, Clone)]
pub struct CompactCoeffs {
    scheme_order: usize,
    b: Vec<f64>,
}

impl CompactCoeffs {
    pub fn scheme_order(&self) -> usize {
        self.scheme_order
    }

    /// n = scheme_order / 2.
    pub fn n(&self) -> usize {
        self.scheme_order / 2
    }

    pub fn b(&self, ell: usize) -> f64 {
        self.b[ell]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.b
    }
}

/// The closed-form compact weights, truncated to n = scheme_order/2 entries:
/// b_0 = 1, b_1 = −α/24, b_2 = (11/2880 + α/1152)α,
/// b_3 = −(191/362880 + 11α/69120 + α²/82944)α,
/// b_4 = (2497/29030400 + 10181α/348364800 + 11α²/3317760 + α³/7962624)α.
pub fn b_coeffs(order: &RieszOrder, scheme_order: usize) -> Result<CompactCoeffs> {
    let n = match scheme_order {
        2 | 4 | 6 | 8 | 10 => scheme_order / 2,
        other => return Err(Error::UnsupportedScheme(other)),
    };
    let a = order.alpha();
    let full = [
        1.0,
        -a / 24.0,
        (11.0 / 2880.0 + a / 1152.0) * a,
        -(191.0 / 362880.0 + 11.0 * a / 69120.0 + a * a / 82944.0) * a,
        (2497.0 / 29030400.0 + 10181.0 * a / 348364800.0 + 11.0 * a * a / 3317760.0
            + a * a * a / 7962624.0)
            * a,
    ];
    Ok(CompactCoeffs { scheme_order, b: full[..n].to_vec() })
}

/// Generating-series coefficients a_0..a_3 of the symbol expansion
/// (2 sin(z/2)/z)^α = Σ_p a_p z^{2p} + O(z^8).
#[derive(Debug, Clone, Copy)]
pub struct SeriesCoeffs {
    a: [f64; 4],
}

impl SeriesCoeffs {
    pub fn a(&self, p: usize) -> f64 {
        self.a[p]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.a
    }

    /// Evaluate the truncated series Σ_{p=0}^{3} a_p z^{2p}.
    pub fn eval(&self, z: f64) -> f64 {
        let z2 = z * z;
        self.a[0] + z2 * (self.a[1] + z2 * (self.a[2] + z2 * self.a[3]))
    }
}

/// a_0 = 1, a_1 = −α/24, a_2 = (1/1920 + (α−1)/1152)α,
/// a_3 = −(1/322560 + (α−1)/46080 + (α−1)(α−2)/82944)α.
pub fn a_coeffs(order: &RieszOrder) -> SeriesCoeffs {
    let a = order.alpha();
    SeriesCoeffs {
        a: [
            1.0,
            -a / 24.0,
            (1.0 / 1920.0 + (a - 1.0) / 1152.0) * a,
            -(1.0 / 322560.0 + (a - 1.0) / 46080.0 + (a - 1.0) * (a - 2.0) / 82944.0) * a,
        ],
    }
}

/// The bound machinery of the coefficient theory: the positive constant
/// S(α) = −Γ(α+1)/(Γ(α/2−1)Γ(α/2+3)) (positive because Γ(α/2−1) < 0 on
/// (1, 2)) and the finite/infinite summation bound evaluators P1, P2, Q1, Q2.
///
/// The sign convention throughout makes every bound a positive quantity:
/// the printed "−S(α)" factors in P1/P2/Q1/Q2 refer to the sign-flipped
/// (negative) variant of S, so with the positive S stored here they are
/// simply S(α) itself.
#[derive(Debug, Clone, Copy)]
pub struct Theorem1Bounds {
    alpha: f64,
    s: f64,
}

impl Theorem1Bounds {
    pub fn s(&self) -> f64 {
        self.s
    }

    /// Pointwise lower bound on |g_k| for k ≥ 3:
    /// S(α)((α+4)/(α+2k))^{2(α+1)}. Note the lower bound uses exponent
    /// 2(α+1) while the upper uses (α+1), exactly as printed.
    pub fn g_lower(&self, k: usize) -> f64 {
        let a = self.alpha;
        self.s * ((a + 4.0) / (a + 2.0 * k as f64)).powf(2.0 * (a + 1.0))
    }

    /// Pointwise upper bound on |g_k| for k ≥ 3:
    /// S(α)((α+6)/(α+2(k+1)))^{α+1}.
    pub fn g_upper(&self, k: usize) -> f64 {
        let a = self.alpha;
        self.s * ((a + 6.0) / (a + 2.0 * (k as f64 + 1.0))).powf(a + 1.0)
    }

    /// P1(m,n,α) = S(α)[(α+2n)^{−(2α+1)} − (α+2m+2)^{−(2α+1)}].
    pub fn p1(&self, m: usize, n: usize) -> f64 {
        let a = self.alpha;
        let e = -(2.0 * a + 1.0);
        self.s * ((a + 2.0 * n as f64).powf(e) - (a + 2.0 * m as f64 + 2.0).powf(e))
    }

    /// P2(m,n,α) = S(α)[(α+2n)^{−α} − (α+2m+2)^{−α}].
    pub fn p2(&self, m: usize, n: usize) -> f64 {
        let a = self.alpha;
        self.s * ((a + 2.0 * n as f64).powf(-a) - (a + 2.0 * m as f64 + 2.0).powf(-a))
    }

    /// Q1(n,α) = S(α)/(α+2n)^{2α+1}.
    pub fn q1(&self, n: usize) -> f64 {
        let a = self.alpha;
        self.s / (a + 2.0 * n as f64).powf(2.0 * a + 1.0)
    }

    /// Q2(n,α) = S(α)/(α+2n)^α.
    pub fn q2(&self, n: usize) -> f64 {
        let a = self.alpha;
        self.s / (a + 2.0 * n as f64).powf(a)
    }

    /// Full lower bound on Σ_{k=n}^{m} |g_k|:
    /// P1(m,n,α) (α+4)^{2(α+1)} / (2(2α+1)).
    pub fn sum_lower(&self, m: usize, n: usize) -> f64 {
        let a = self.alpha;
        self.p1(m, n) * (a + 4.0).powf(2.0 * (a + 1.0)) / (2.0 * (2.0 * a + 1.0))
    }

    /// Full upper bound on Σ_{k=n}^{m} |g_k|: P2(m,n,α) (α+6)^{α+1} / (2α).
    pub fn sum_upper(&self, m: usize, n: usize) -> f64 {
        let a = self.alpha;
        self.p2(m, n) * (a + 6.0).powf(a + 1.0) / (2.0 * a)
    }

    /// Full lower bound on the tail Σ_{k=n}^{∞} |g_k|.
    pub fn tail_lower(&self, n: usize) -> f64 {
        let a = self.alpha;
        self.q1(n) * (a + 4.0).powf(2.0 * (a + 1.0)) / (2.0 * (2.0 * a + 1.0))
    }

    /// Full upper bound on the tail Σ_{k=n}^{∞} |g_k|.
    pub fn tail_upper(&self, n: usize) -> f64 {
        let a = self.alpha;
        self.q2(n) * (a + 6.0).powf(a + 1.0) / (2.0 * a)
    }

    /// Lower end of the two-sided bound 2^{1+α}/((1+α)π) ≤ Σ_{k≠0}|g_k|.
    pub fn two_sided_lower(&self) -> f64 {
        let a = self.alpha;
        2f64.powf(1.0 + a) / ((1.0 + a) * PI)
    }

    /// Upper end of the two-sided bound Σ_{k≠0}|g_k| ≤ 2^{1+α}/π.
    pub fn two_sided_upper(&self) -> f64 {
        2f64.powf(1.0 + self.alpha) / PI
    }
}

/// Build the bound evaluators for one α.
pub fn theorem1_bounds(order: &RieszOrder) -> Theorem1Bounds {
    let a = order.alpha();
    // Γ(α/2−1) has argument in (−0.5, 0): negative non-integer, handled by
    // the reflection path; the quotient is finite.
    let s = -gamma(a + 1.0).unwrap() / (gamma(a / 2.0 - 1.0).unwrap() * gamma(a / 2.0 + 3.0).unwrap());
    Theorem1Bounds { alpha: a, s }
}
