//! Verdicts for the ergodic-capacity order and the Laplace-transform order.
//!
//! `X ≤_c Y` means `C_X(ρ) ≤ C_Y(ρ)` for every `ρ ≥ 0`; `X ≤_Lt Y` means
//! `E[e^{-uY}] ≤ E[e^{-uX}]` for every `u ≥ 0`. Both quantify over a
//! continuum, so every verdict here is grid-restricted: `FirstDominated`
//! certifies the inequality at the evaluated points and nothing more.
//!
//! A difference with magnitude at or below the tolerance counts as no
//! evidence either way. For Monte Carlo comparisons the per-point tolerance
//! is raised to twice the 95% half-width of the paired difference.

use std::fmt;

use rayon::prelude::*;

use crate::mc::McConfig;
use crate::models::{FadingModel, Mean};
use crate::transform::{self, db_to_linear, fmt_db, CapacityCurve, Engine, Existence};
use crate::{Error, Result};

/// Default tolerance (nats) for deterministic comparisons.
pub const DEFAULT_TOL: f64 = 1e-6;

/// Relative `ρ` precision of crossover refinement.
pub const CROSSOVER_PRECISION: f64 = 1e-3;

/// SNR points, specified in dB and held in linear scale.
#[derive(Debug, Clone, PartialEq)]
pub struct SnrGrid {
    linear: Vec<f64>,
}

impl SnrGrid {
    /// Grid from linear values; must be strictly increasing and nonnegative.
    pub fn from_linear(linear: Vec<f64>) -> Result<Self> {
        if linear.is_empty() {
            return Err(Error::Parameter("SNR grid is empty".into()));
        }
        if linear.iter().any(|r| !r.is_finite() || *r < 0.0) {
            return Err(Error::Parameter("SNR grid values must be finite and nonnegative".into()));
        }
        if linear.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Parameter("SNR grid must be strictly increasing".into()));
        }
        Ok(SnrGrid { linear })
    }

    /// Grid from dB values (`-inf` maps to `ρ = 0`).
    pub fn from_db(db: &[f64]) -> Result<Self> {
        Self::from_linear(db.iter().map(|&d| db_to_linear(d)).collect())
    }

    /// `start:step:stop` in dB, endpoints included, optionally preceded by `ρ = 0`.
    pub fn range_db(start: f64, step: f64, stop: f64, with_zero: bool) -> Result<Self> {
        if !(start.is_finite() && step.is_finite() && stop.is_finite()) || step <= 0.0 || stop < start {
            return Err(Error::Parameter(format!(
                "bad dB range {start}:{step}:{stop} (need step > 0 and stop >= start)"
            )));
        }
        let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
        let mut linear = Vec::with_capacity(count + 1);
        if with_zero {
            linear.push(0.0);
        }
        linear.extend((0..count).map(|i| db_to_linear(start + i as f64 * step)));
        Self::from_linear(linear)
    }

    /// Parse `start:step:stop` (dB).
    pub fn parse_db(spec: &str, with_zero: bool) -> Result<Self> {
        let parts: Vec<&str> = spec.split(':').collect();
        let num = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::Parameter(format!("bad grid `{spec}`: `{s}` is not a number")))
        };
        match parts.as_slice() {
            [a, b, c] => Self::range_db(num(a)?, num(b)?, num(c)?, with_zero),
            [a] => Self::from_db(&[num(a)?]),
            _ => Err(Error::Parameter(format!("bad grid `{spec}`, expected start:step:stop in dB"))),
        }
    }

    pub fn linear(&self) -> &[f64] {
        &self.linear
    }

    pub fn len(&self) -> usize {
        self.linear.len()
    }

    pub fn is_empty(&self) -> bool {
        self.linear.is_empty()
    }
}

impl Default for SnrGrid {
    /// `ρ = 0` followed by −10 to 30 dB in 1 dB steps.
    fn default() -> Self {
        Self::range_db(-10.0, 1.0, 30.0, true).expect("valid default grid")
    }
}

/// `u` grid for the Laplace order: 61 log-spaced points on `[10⁻², 10³]`.
pub fn default_u_grid() -> Vec<f64> {
    (0..61).map(|i| 10f64.powf(-2.0 + 5.0 * i as f64 / 60.0)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Relation {
    /// The second argument dominates: `X ≤ Y`.
    FirstDominated,
    /// The first argument dominates: `Y ≤ X`.
    FirstDominates,
    Equal,
    Crossover,
    /// No usable evidence (empty or non-finite input).
    Indeterminate,
}

impl Relation {
    /// The relation with the arguments swapped.
    pub fn flipped(self) -> Relation {
        match self {
            Relation::FirstDominated => Relation::FirstDominates,
            Relation::FirstDominates => Relation::FirstDominated,
            other => other,
        }
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrderVerdict {
    pub relation: Relation,
    /// Interpolated sign changes of the difference (linear scale).
    pub crossover_points: Vec<f64>,
    /// Largest `|Δ|` observed.
    pub margin: f64,
    /// Largest per-point tolerance applied.
    pub tolerance: f64,
    /// Warnings collected while producing the verdict.
    pub notes: Vec<String>,
}

impl OrderVerdict {
    /// Verdict with arguments swapped: relation flipped, everything else kept.
    pub fn flipped(&self) -> OrderVerdict {
        OrderVerdict {
            relation: self.relation.flipped(),
            ..self.clone()
        }
    }
}

impl fmt::Display for OrderVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let xs: Vec<String> = self.crossover_points.iter().map(|&r| fmt_db(r)).collect();
        write!(
            f,
            "verdict={} margin={:.6e} crossovers=[{}] tol={:.3e}",
            self.relation,
            self.margin,
            xs.join(","),
            self.tolerance
        )
    }
}

fn evidence(delta: f64, tol: f64) -> i8 {
    if delta > tol {
        1
    } else if delta < -tol {
        -1
    } else {
        0
    }
}

/// Classify a difference curve `Δ(t)` where positive means the second
/// argument is larger (better). `tol[i]` is the per-point dead band.
pub fn classify(points: &[f64], delta: &[f64], tol: &[f64]) -> OrderVerdict {
    let tolerance = tol.iter().copied().fold(0.0, f64::max);
    let indeterminate = |note: &str| OrderVerdict {
        relation: Relation::Indeterminate,
        crossover_points: Vec::new(),
        margin: f64::NAN,
        tolerance,
        notes: vec![note.to_string()],
    };
    if points.is_empty() || points.len() != delta.len() || delta.len() != tol.len() {
        return indeterminate("empty or mismatched input");
    }
    if delta.iter().any(|d| !d.is_finite()) {
        return indeterminate("non-finite difference");
    }
    let margin = delta.iter().fold(0.0, |m: f64, d| m.max(d.abs()));
    let signed: Vec<(usize, i8)> = delta
        .iter()
        .zip(tol)
        .enumerate()
        .map(|(i, (&d, &t))| (i, evidence(d, t)))
        .filter(|(_, s)| *s != 0)
        .collect();
    let mut crossover_points = Vec::new();
    for w in signed.windows(2) {
        let ((i, si), (j, sj)) = (w[0], w[1]);
        if si != sj {
            crossover_points.push(interpolate_root(points, delta, i, j));
        }
    }
    let pos = signed.iter().any(|(_, s)| *s > 0);
    let neg = signed.iter().any(|(_, s)| *s < 0);
    let relation = match (pos, neg) {
        (false, false) => Relation::Equal,
        (true, false) => Relation::FirstDominated,
        (false, true) => Relation::FirstDominates,
        (true, true) => Relation::Crossover,
    };
    OrderVerdict {
        relation,
        crossover_points,
        margin,
        tolerance,
        notes: Vec::new(),
    }
}

/// Root of the piecewise-linear interpolant of `delta` (in log scale when
/// both ends are positive) between evidence points `i < j`.
fn interpolate_root(points: &[f64], delta: &[f64], i: usize, j: usize) -> f64 {
    let k = (i..j)
        .find(|&k| delta[k].signum() != delta[k + 1].signum() || delta[k + 1] == 0.0)
        .unwrap_or(i);
    let (a, b) = (points[k], points[k + 1]);
    let (da, db) = (delta[k], delta[k + 1]);
    let t = if da == db { 0.5 } else { da / (da - db) };
    if a > 0.0 {
        (a.ln() + t * (b.ln() - a.ln())).exp()
    } else {
        a + t * (b - a)
    }
}

/// Two capacity curves, their difference `C_Y − C_X` and the verdict.
#[derive(Debug, Clone, PartialEq)]
pub struct CapacityComparison {
    pub x: CapacityCurve,
    pub y: CapacityCurve,
    pub delta: Vec<f64>,
    /// 95% half-width of each difference; zero for deterministic engines.
    pub delta_ci: Vec<f64>,
    pub verdict: OrderVerdict,
}

impl CapacityComparison {
    /// CSV `rho_db,rho_lin,capacity_x,ci_x,capacity_y,ci_y,delta,delta_ci,n`
    /// (capacities in nats).
    pub fn to_csv(&self) -> String {
        let mut s = String::from("rho_db,rho_lin,capacity_x,ci_x,capacity_y,ci_y,delta,delta_ci,n\n");
        for i in 0..self.delta.len() {
            s.push_str(&format!(
                "{},{},{},{},{},{},{},{},{}\n",
                fmt_db(self.x.grid[i]),
                self.x.grid[i],
                self.x.values[i],
                self.x.ci_half_width[i],
                self.y.values[i],
                self.y.ci_half_width[i],
                self.delta[i],
                self.delta_ci[i],
                self.x.sample_count
            ));
        }
        s
    }
}

/// Build a comparison from a difference curve with per-point half-widths.
pub fn compare_curves(
    x: CapacityCurve,
    y: CapacityCurve,
    delta: Vec<f64>,
    delta_ci: Vec<f64>,
    tol: f64,
) -> CapacityComparison {
    let tols: Vec<f64> = delta_ci.iter().map(|c| tol.max(2.0 * c)).collect();
    let verdict = classify(&x.grid, &delta, &tols);
    CapacityComparison {
        x,
        y,
        delta,
        delta_ci,
        verdict,
    }
}

fn existence_notes(model: &FadingModel, label: &str, notes: &mut Vec<String>) -> Result<()> {
    match transform::exists_shannon(model) {
        Existence::Finite { .. } => Ok(()),
        Existence::Unknown { growth_exponent } => {
            notes.push(format!(
                "{label}={model}: Shannon-transform existence undecided (ccdf integral growth exponent {growth_exponent:.3})"
            ));
            Ok(())
        }
        Existence::Infinite => Err(Error::Domain {
            func: "capacity_order",
            detail: format!("{label}={model} has no finite Shannon transform"),
        }),
    }
}

/// Evaluate both Shannon transforms on the grid and compare them.
///
/// Monte Carlo runs draw both models from common random numbers and use
/// `max(tol, 2·CI(Δ))` as the per-point dead band.
pub fn capacity_comparison(
    x: &FadingModel,
    y: &FadingModel,
    grid: &SnrGrid,
    engine: Engine,
    tol: f64,
    mc: Option<McConfig>,
) -> Result<CapacityComparison> {
    let mut notes = Vec::new();
    existence_notes(x, "X", &mut notes)?;
    existence_notes(y, "Y", &mut notes)?;
    let rho = grid.linear();
    let mut cmp = if engine.is_monte_carlo() {
        let cfg = mc.ok_or_else(|| Error::Parameter("Monte Carlo engine requires n and seed".into()))?;
        let p = transform::paired_monte_carlo(x, y, rho, cfg)?;
        compare_curves(p.x, p.y, p.delta, p.delta_ci, tol)
    } else {
        let cx = transform::curve(x, rho, engine, None)?;
        let cy = transform::curve(y, rho, engine, None)?;
        let delta = cx.values.iter().zip(&cy.values).map(|(a, b)| b - a).collect();
        compare_curves(cx, cy, delta, vec![0.0; rho.len()], tol)
    };
    cmp.verdict.notes.extend(notes);
    Ok(cmp)
}

/// Ergodic-capacity order verdict for `X` against `Y` on the grid.
pub fn capacity_order(
    x: &FadingModel,
    y: &FadingModel,
    grid: &SnrGrid,
    engine: Engine,
    tol: f64,
    mc: Option<McConfig>,
) -> Result<OrderVerdict> {
    Ok(capacity_comparison(x, y, grid, engine, tol, mc)?.verdict)
}

/// Laplace-transform values of both models on `u_grid` and `Δ = φ_X − φ_Y`.
pub fn laplace_difference(x: &FadingModel, y: &FadingModel, u_grid: &[f64]) -> Result<Vec<f64>> {
    u_grid
        .par_iter()
        .map(|&u| Ok(x.laplace(u)? - y.laplace(u)?))
        .collect()
}

/// Laplace-transform order verdict: `Y` dominates where `φ_Y ≤ φ_X`.
pub fn lt_order(x: &FadingModel, y: &FadingModel, u_grid: &[f64], tol: f64) -> Result<OrderVerdict> {
    if u_grid.iter().any(|u| !(u.is_finite() && *u > 0.0)) || u_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Parameter("u grid must be positive and strictly increasing".into()));
    }
    let delta = laplace_difference(x, y, u_grid)?;
    Ok(classify(u_grid, &delta, &vec![tol; u_grid.len()]))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum S3Status {
    Consistent,
    /// Laplace order fails (crossing transforms) while a capacity order holds;
    /// allowed because the implication has no converse.
    CounterexamplePattern,
    /// Laplace dominance without the implied capacity dominance.
    Violation,
}

impl fmt::Display for S3Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            S3Status::Consistent => "consistent",
            S3Status::CounterexamplePattern => "counterexample-pattern",
            S3Status::Violation => "violation",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct S3Report {
    pub lt: OrderVerdict,
    pub capacity: OrderVerdict,
    pub status: S3Status,
}

/// Judge a pair of verdicts against "`X ≤_Lt Y` implies `X ≤_c Y`",
/// applied in both directions.
pub fn s3_status(lt: Relation, capacity: Relation) -> S3Status {
    use Relation::*;
    let implied_ok = |want: Relation| matches!(capacity, Indeterminate | Equal) || capacity == want;
    match lt {
        FirstDominated if !implied_ok(FirstDominated) => S3Status::Violation,
        FirstDominates if !implied_ok(FirstDominates) => S3Status::Violation,
        Equal if !matches!(capacity, Equal | Indeterminate) => S3Status::Violation,
        Crossover if matches!(capacity, FirstDominated | FirstDominates) => S3Status::CounterexamplePattern,
        _ => S3Status::Consistent,
    }
}

/// Check the Laplace-order implication on one pair.
pub fn check_s3(
    x: &FadingModel,
    y: &FadingModel,
    grid: &SnrGrid,
    u_grid: &[f64],
    engine: Engine,
    tol: f64,
    mc: Option<McConfig>,
) -> Result<S3Report> {
    let lt = lt_order(x, y, u_grid, tol)?;
    let capacity = capacity_order(x, y, grid, engine, tol, mc)?;
    let status = s3_status(lt.relation, capacity.relation);
    Ok(S3Report { lt, capacity, status })
}

#[derive(Debug, Clone, PartialEq)]
pub enum MeanCheck {
    Pass { mean_x: f64, mean_y: f64 },
    Fail { mean_x: f64, mean_y: f64 },
    Skipped(String),
}

impl fmt::Display for MeanCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MeanCheck::Pass { mean_x, mean_y } => write!(f, "pass (E[X]={mean_x:.6}, E[Y]={mean_y:.6})"),
            MeanCheck::Fail { mean_x, mean_y } => write!(f, "FAIL (E[X]={mean_x:.6}, E[Y]={mean_y:.6})"),
            MeanCheck::Skipped(why) => write!(f, "skipped ({why})"),
        }
    }
}

/// A capacity order forces the dominated channel's mean power to be no
/// larger: check that against an existing verdict.
pub fn mean_necessary(x: &FadingModel, y: &FadingModel, verdict: Relation, tol: f64) -> MeanCheck {
    let (mean_x, mean_y) = match (x.mean(), y.mean()) {
        (Mean::Finite(a), Mean::Finite(b)) => (a, b),
        (Mean::Infinite, _) => return MeanCheck::Skipped("X has infinite mean".into()),
        (_, Mean::Infinite) => return MeanCheck::Skipped("Y has infinite mean".into()),
    };
    let holds = match verdict {
        Relation::FirstDominated => mean_x <= mean_y + tol,
        Relation::FirstDominates => mean_y <= mean_x + tol,
        Relation::Equal => (mean_x - mean_y).abs() <= tol,
        _ => return MeanCheck::Skipped(format!("no capacity order ({verdict})")),
    };
    if holds {
        MeanCheck::Pass { mean_x, mean_y }
    } else {
        MeanCheck::Fail { mean_x, mean_y }
    }
}

/// Sign changes of `B − A` on the shared grid, each refined to relative
/// `ρ` precision [`CROSSOVER_PRECISION`].
///
/// With `refine`, bisection evaluates `refine(ρ) ≈ C_B(ρ) − C_A(ρ)` (for
/// Monte Carlo, a paired re-simulation with a fixed seed, which is a smooth
/// function of `ρ`). Without it, the root of the log-ρ linear interpolant
/// is returned. Points where `|Δ|` is within `max(tol, 2·CI)` are ignored.
pub fn find_crossover(
    a: &CapacityCurve,
    b: &CapacityCurve,
    tol: f64,
    refine: Option<&(dyn Fn(f64) -> Result<f64> + Sync)>,
) -> Result<Vec<f64>> {
    if a.grid != b.grid {
        return Err(Error::Input("find_crossover needs curves on a shared grid".into()));
    }
    let delta: Vec<f64> = a.values.iter().zip(&b.values).map(|(x, y)| y - x).collect();
    let tols: Vec<f64> = a
        .ci_half_width
        .iter()
        .zip(&b.ci_half_width)
        .map(|(ca, cb)| tol.max(2.0 * ca.hypot(*cb)))
        .collect();
    let brackets: Vec<(usize, usize)> = {
        let signed: Vec<(usize, i8)> = delta
            .iter()
            .zip(&tols)
            .enumerate()
            .map(|(i, (&d, &t))| (i, evidence(d, t)))
            .filter(|(_, s)| *s != 0)
            .collect();
        signed
            .windows(2)
            .filter(|w| w[0].1 != w[1].1)
            .map(|w| (w[0].0, w[1].0))
            .collect()
    };
    let mut roots = Vec::with_capacity(brackets.len());
    for (i, j) in brackets {
        let Some(f) = refine else {
            roots.push(interpolate_root(&a.grid, &delta, i, j));
            continue;
        };
        let (mut lo, mut hi) = (a.grid[i], a.grid[j]);
        let lo_sign = delta[i] > 0.0;
        while lo == 0.0 || hi / lo - 1.0 > CROSSOVER_PRECISION {
            let mid = if lo == 0.0 { hi / 2.0 } else { (lo * hi).sqrt() };
            let d = f(mid)?;
            if !d.is_finite() {
                return Err(Error::nonconvergence("find_crossover", format!("non-finite difference at rho={mid}")));
            }
            if (d > 0.0) == lo_sign {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi < f64::MIN_POSITIVE {
                break;
            }
        }
        roots.push((lo * hi).sqrt());
    }
    Ok(roots)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nak(m: f64) -> FadingModel {
        FadingModel::nakagami(m).unwrap()
    }

    #[test]
    fn default_grid_has_zero_and_42_db_points() {
        let g = SnrGrid::default();
        assert_eq!(g.len(), 42);
        assert_eq!(g.linear()[0], 0.0);
        assert!((g.linear()[1] - 0.1).abs() < 1e-15);
        assert!((g.linear()[41] - 1000.0).abs() < 1e-9);
        assert_eq!(SnrGrid::range_db(-10.0, 0.5, 30.0, false).unwrap().len(), 81);
        assert!(SnrGrid::from_linear(vec![1.0, 1.0]).is_err());
        assert!(SnrGrid::parse_db("5:-1:0", false).is_err());
    }

    #[test]
    fn classify_sign_patterns() {
        let t = [1.0, 2.0, 3.0, 4.0];
        let tol = [0.1; 4];
        assert_eq!(classify(&t, &[0.0, 0.05, -0.05, 0.0], &tol).relation, Relation::Equal);
        assert_eq!(classify(&t, &[0.0, 0.5, 0.05, 0.2], &tol).relation, Relation::FirstDominated);
        assert_eq!(classify(&t, &[-0.5, -0.05, 0.0, -0.2], &tol).relation, Relation::FirstDominates);
        let v = classify(&t, &[0.5, 0.0, -0.5, -0.1], &tol);
        assert_eq!(v.relation, Relation::Crossover);
        assert_eq!(v.crossover_points.len(), 1);
        assert!(v.crossover_points[0] > 1.0 && v.crossover_points[0] < 3.0);
        assert_eq!(classify(&t, &[0.0, f64::NAN, 0.0, 0.0], &tol).relation, Relation::Indeterminate);
        assert_eq!(classify(&[], &[], &[]).relation, Relation::Indeterminate);
    }

    #[test]
    fn verdict_line_format() {
        let v = OrderVerdict {
            relation: Relation::Crossover,
            crossover_points: vec![10.0],
            margin: 0.25,
            tolerance: 1e-6,
            notes: vec![],
        };
        assert_eq!(v.to_string(), "verdict=Crossover margin=2.500000e-1 crossovers=[10] tol=1.000e-6");
    }

    #[test]
    fn nakagami_half_vs_two() {
        let g = SnrGrid::default();
        let v = capacity_order(&nak(0.5), &nak(2.0), &g, Engine::Laplace, DEFAULT_TOL, None).unwrap();
        assert_eq!(v.relation, Relation::FirstDominated);
        assert!(v.crossover_points.is_empty());
        let lt = lt_order(&nak(0.5), &nak(2.0), &default_u_grid(), DEFAULT_TOL).unwrap();
        assert_eq!(lt.relation, Relation::FirstDominated);
        assert_eq!(s3_status(lt.relation, v.relation), S3Status::Consistent);
        assert!(matches!(
            mean_necessary(&nak(0.5), &nak(2.0), v.relation, 1e-9),
            MeanCheck::Pass { .. }
        ));
    }

    #[test]
    fn reflexive_and_antisymmetric() {
        let g = SnrGrid::default();
        let r = FadingModel::rician(3.0).unwrap();
        let v = capacity_order(&r, &r, &g, Engine::Stieltjes, DEFAULT_TOL, None).unwrap();
        assert_eq!(v.relation, Relation::Equal);
        let ab = capacity_order(&nak(1.0), &nak(4.0), &g, Engine::Laplace, DEFAULT_TOL, None).unwrap();
        let ba = capacity_order(&nak(4.0), &nak(1.0), &g, Engine::Laplace, DEFAULT_TOL, None).unwrap();
        assert_eq!(ab.relation, ba.relation.flipped());
        assert_eq!(ab.crossover_points, ba.crossover_points);
        assert_eq!(ab.margin, ba.margin);
    }

    #[test]
    fn s3_table() {
        use Relation::*;
        assert_eq!(s3_status(FirstDominated, FirstDominated), S3Status::Consistent);
        assert_eq!(s3_status(FirstDominated, Crossover), S3Status::Violation);
        assert_eq!(s3_status(FirstDominated, FirstDominates), S3Status::Violation);
        assert_eq!(s3_status(FirstDominated, Indeterminate), S3Status::Consistent);
        assert_eq!(s3_status(FirstDominates, FirstDominated), S3Status::Violation);
        assert_eq!(s3_status(Crossover, FirstDominated), S3Status::CounterexamplePattern);
        assert_eq!(s3_status(Crossover, Crossover), S3Status::Consistent);
        assert_eq!(s3_status(Equal, Equal), S3Status::Consistent);
    }

    #[test]
    fn mean_check_cases() {
        let d1 = FadingModel::deterministic(1.0).unwrap();
        let d2 = FadingModel::deterministic(2.0).unwrap();
        assert!(matches!(
            mean_necessary(&d1, &d2, Relation::FirstDominated, 1e-12),
            MeanCheck::Pass { .. }
        ));
        assert!(matches!(
            mean_necessary(&d2, &d1, Relation::FirstDominated, 1e-12),
            MeanCheck::Fail { .. }
        ));
        let p1 = FadingModel::pareto(1.0).unwrap();
        let p3 = FadingModel::pareto(3.0).unwrap();
        assert!(matches!(mean_necessary(&p1, &p3, Relation::FirstDominated, 0.0), MeanCheck::Skipped(_)));
    }

    #[test]
    fn crossover_of_constructed_curves() {
        let g = SnrGrid::range_db(-10.0, 1.0, 30.0, false).unwrap();
        let rho = g.linear().to_vec();
        let a: Vec<f64> = rho.iter().map(|r| 0.9 * r.ln_1p()).collect();
        let b: Vec<f64> = rho.iter().map(|r| r.ln_1p() - 0.3).collect();
        let ca = CapacityCurve::deterministic(rho.clone(), a, Engine::PdfQuadrature);
        let cb = CapacityCurve::deterministic(rho, b, Engine::PdfQuadrature);
        let exact = 3f64.exp() - 1.0;
        let refine = |r: f64| Ok(r.ln_1p() - 0.3 - 0.9 * r.ln_1p());
        let roots = find_crossover(&ca, &cb, 1e-9, Some(&refine)).unwrap();
        assert_eq!(roots.len(), 1);
        assert!((roots[0] / exact - 1.0).abs() < CROSSOVER_PRECISION);
        let coarse = find_crossover(&ca, &cb, 1e-9, None).unwrap();
        assert!((coarse[0] / exact - 1.0).abs() < 0.05);
        assert!(find_crossover(&ca, &ca, 1e-9, None).unwrap().is_empty());
    }
}
