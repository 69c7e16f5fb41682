//! Function-class checks: the Frullani form of `ln(1+x)`, finite-order
//! complete-monotonicity tests, Bernstein and Thorin–Bernstein functions
//! with finitely many atoms, and the `g'/g` ratios behind the MRC/EGC
//! composition arguments.
//!
//! These are falsification tools. A pass means no sign violation was found
//! at the sampled points up to the requested order.

use std::fmt;

use crate::quad::{self, Tolerance};
use crate::{Error, Result};

/// Highest derivative order `cm_check` accepts.
pub const MAX_CM_ORDER: usize = 4;

/// `∫₀^∞ (1 − e^{-sx}) e^{-s} / s ds`, which equals `ln(1+x)`.
pub fn frullani_capacity(x: f64) -> Result<f64> {
    if !(x.is_finite() && x > 0.0) {
        return Err(Error::domain("frullani_capacity", format!("x must be positive, got {x}")));
    }
    let f = |s: f64| {
        if s == 0.0 {
            x
        } else {
            -(-s * x).exp_m1() * (-s).exp() / s
        }
    };
    let tol = Tolerance::abs(1e-13).with_rel(1e-13);
    Ok(quad::integrate_half_line_split(f, &[1.0 / x], tol)?.value)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CmOutcome {
    Pass,
    /// First point and order where `(−1)^k Δᵏ f < −ε`.
    Fail { point: f64, order: usize, signed_difference: f64 },
}

impl CmOutcome {
    pub fn passed(&self) -> bool {
        matches!(self, CmOutcome::Pass)
    }
}

impl fmt::Display for CmOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CmOutcome::Pass => f.write_str("pass"),
            CmOutcome::Fail {
                point,
                order,
                signed_difference,
            } => write!(f, "fail at x={point} order={order} ((-1)^k diff = {signed_difference:.3e})"),
        }
    }
}

/// Default step at `x`: `1e-3·x`, floored at `1e-5`.
pub fn default_step(x: f64) -> f64 {
    (1e-3 * x.abs()).max(1e-5)
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Central difference `Σ_j (−1)^j C(k,j) f(x + (k − 2j)h)` of order `k`.
pub fn central_difference<F: FnMut(f64) -> Result<f64>>(f: &mut F, x: f64, k: usize, h: f64) -> Result<f64> {
    let mut acc = 0.0;
    for j in 0..=k {
        let v = f(x + (k as f64 - 2.0 * j as f64) * h)?;
        if !v.is_finite() {
            return Err(Error::domain("cm_check", format!("f is not finite near x={x}")));
        }
        let term = binomial(k, j) * v;
        acc += if j % 2 == 0 { term } else { -term };
    }
    Ok(acc)
}

/// Check `(−1)^k Δᵏ f(x) ≥ −(1e-6·|f(x)| + 1e-9)` for `k = 0..=max_order`
/// at each point. `h = None` uses [`default_step`] per point.
pub fn cm_check<F: FnMut(f64) -> Result<f64>>(
    mut f: F,
    points: &[f64],
    max_order: usize,
    h: Option<f64>,
) -> Result<CmOutcome> {
    if max_order > MAX_CM_ORDER {
        return Err(Error::Parameter(format!("cm_check order {max_order} exceeds {MAX_CM_ORDER}")));
    }
    for &x in points {
        let step = h.unwrap_or_else(|| default_step(x));
        let fx = f(x)?;
        if !fx.is_finite() {
            return Err(Error::domain("cm_check", format!("f({x}) is not finite")));
        }
        let eps = 1e-6 * fx.abs() + 1e-9;
        for k in 0..=max_order {
            let d = central_difference(&mut f, x, k, step)?;
            let signed = if k % 2 == 0 { d } else { -d };
            if signed < -eps {
                return Ok(CmOutcome::Fail {
                    point: x,
                    order: k,
                    signed_difference: signed,
                });
            }
        }
    }
    Ok(CmOutcome::Pass)
}

/// Finitely many atoms `(location, weight)` plus the linear part `a + bx`
/// of a Bernstein or Thorin–Bernstein representation.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedAtomMeasure {
    atoms: Vec<(f64, f64)>,
    pub a: f64,
    pub b: f64,
}

impl WeightedAtomMeasure {
    pub fn new(mut atoms: Vec<(f64, f64)>, a: f64, b: f64) -> Result<Self> {
        if atoms.iter().any(|&(u, w)| !(u.is_finite() && u > 0.0) || !(w.is_finite() && w >= 0.0)) {
            return Err(Error::Parameter("atoms need locations > 0 and weights >= 0".into()));
        }
        if !(a.is_finite() && a >= 0.0 && b.is_finite() && b >= 0.0) {
            return Err(Error::Parameter("a and b must be nonnegative".into()));
        }
        atoms.sort_by(|p, q| p.0.total_cmp(&q.0));
        if atoms.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::Parameter("atom locations must be distinct".into()));
        }
        Ok(WeightedAtomMeasure { atoms, a, b })
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }
}

/// `a + bx + Σ w (1 − e^{-ux})`.
pub fn bernstein_eval(rep: &WeightedAtomMeasure, x: f64) -> f64 {
    rep.a + rep.b * x + rep.atoms.iter().map(|&(u, w)| -w * (-u * x).exp_m1()).sum::<f64>()
}

/// `a + bx + Σ w ln(1 + x/u)`.
pub fn tbf_eval(rep: &WeightedAtomMeasure, x: f64) -> f64 {
    rep.a + rep.b * x + rep.atoms.iter().map(|&(u, w)| w * (x / u).ln_1p()).sum::<f64>()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Combiner {
    Mrc,
    Egc,
}

impl fmt::Display for Combiner {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Combiner::Mrc => "mrc",
            Combiner::Egc => "egc",
        })
    }
}

/// Branches assumed by the EGC ratio check; `M` cancels in `g'/g`.
const EGC_BRANCHES: f64 = 2.0;

/// Combined power as a function of one branch power `x`, the others fixed
/// and summarised by `k`: `x + k` (MRC) or `(√x + k)²/M` (EGC, `k = Σ√x_m`).
pub fn combiner_slice(combiner: Combiner, x: f64, k: f64) -> f64 {
    match combiner {
        Combiner::Mrc => x + k,
        Combiner::Egc => (x.sqrt() + k).powi(2) / EGC_BRANCHES,
    }
}

/// Closed form of `g'(x)/g(x)`.
pub fn combiner_ratio(combiner: Combiner, x: f64, k: f64) -> f64 {
    match combiner {
        Combiner::Mrc => 1.0 / (x + k),
        Combiner::Egc => 1.0 / (x + k * x.sqrt()),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RatioReport {
    /// Largest relative gap between the numeric and closed-form ratio.
    pub max_rel_error: f64,
    pub cm: CmOutcome,
    pub passed: bool,
}

/// Compare a central-difference `g'/g` with its closed form on `x_grid`
/// (agreement within 1e-6 relative) and test the closed form for complete
/// monotonicity up to order 4.
pub fn ctbf_ratio_check(combiner: Combiner, k: f64, x_grid: &[f64]) -> Result<RatioReport> {
    if !(k.is_finite() && k >= 0.0) {
        return Err(Error::Parameter(format!("k must be nonnegative, got {k}")));
    }
    if x_grid.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
        return Err(Error::Parameter("x grid must be positive".into()));
    }
    let mut max_rel_error: f64 = 0.0;
    for &x in x_grid {
        let h = 1e-4 * x;
        let g = |t: f64| combiner_slice(combiner, t, k);
        let numeric = (g(x + h) - g(x - h)) / (2.0 * h) / g(x);
        let exact = combiner_ratio(combiner, x, k);
        max_rel_error = max_rel_error.max((numeric - exact).abs() / exact.abs().max(1.0));
    }
    let cm = cm_check(|x| Ok(combiner_ratio(combiner, x, k)), x_grid, MAX_CM_ORDER, None)?;
    Ok(RatioReport {
        max_rel_error,
        passed: max_rel_error <= 1e-6 && cm.passed(),
        cm,
    })
}
