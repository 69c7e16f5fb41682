//! Shannon-transform engines for `C_X(ρ) = E[ln(1 + ρX)]`.
//!
//! Three deterministic routes and one stochastic route:
//!
//! | engine | integral |
//! |---|---|
//! | [`Engine::PdfQuadrature`] | `∫ ln(1+ρx) f(x) dx` |
//! | [`Engine::Stieltjes`] | `∫ (1 − F(u)) / (1/ρ + u) du` |
//! | [`Engine::Laplace`] | `∫ e^{-u/ρ} (1 − φ(u)) / u du` |
//! | [`Engine::MonteCarlo`] | sample mean of `ln(1 + ρXᵢ)` |
//!
//! The routes share no integrand, so agreement between them is a real check.

use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use rayon::prelude::*;

use crate::mc::{self, McConfig, Moments, Stream};
use crate::models::FadingModel;
use crate::quad::{self, Tolerance};
use crate::{Error, Result};

/// Absolute tolerance of the deterministic engines (nats).
pub const ENGINE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Engine {
    PdfQuadrature,
    Stieltjes,
    Laplace,
    MonteCarlo,
}

impl Engine {
    pub const DETERMINISTIC: [Engine; 3] = [Engine::PdfQuadrature, Engine::Stieltjes, Engine::Laplace];

    pub fn is_monte_carlo(self) -> bool {
        self == Engine::MonteCarlo
    }
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Engine::PdfQuadrature => "pdf",
            Engine::Stieltjes => "stieltjes",
            Engine::Laplace => "laplace",
            Engine::MonteCarlo => "mc",
        })
    }
}

impl FromStr for Engine {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "pdf" | "quad" | "quadrature" => Ok(Engine::PdfQuadrature),
            "stieltjes" | "ccdf" => Ok(Engine::Stieltjes),
            "laplace" | "lt" => Ok(Engine::Laplace),
            "mc" | "montecarlo" | "monte-carlo" => Ok(Engine::MonteCarlo),
            other => Err(Error::Parameter(format!("unknown engine `{other}`"))),
        }
    }
}

/// Shannon-transform estimates over an SNR grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CapacityCurve {
    /// Linear SNR values.
    pub grid: Vec<f64>,
    /// Capacity in nats per channel use.
    pub values: Vec<f64>,
    /// 95% half-widths; zero for deterministic engines.
    pub ci_half_width: Vec<f64>,
    pub method: Engine,
    /// Monte Carlo draw count; zero for deterministic engines.
    pub sample_count: usize,
}

impl CapacityCurve {
    pub fn deterministic(grid: Vec<f64>, values: Vec<f64>, method: Engine) -> Self {
        let n = grid.len();
        CapacityCurve {
            grid,
            values,
            ci_half_width: vec![0.0; n],
            method,
            sample_count: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn max_ci(&self) -> f64 {
        self.ci_half_width.iter().copied().fold(0.0, f64::max)
    }

    /// Multiply values and half-widths by `factor` (unit or time-sharing display).
    pub fn scaled(&self, factor: f64) -> Self {
        CapacityCurve {
            values: self.values.iter().map(|v| v * factor).collect(),
            ci_half_width: self.ci_half_width.iter().map(|v| v * factor).collect(),
            ..self.clone()
        }
    }

    /// CSV with header `rho_db,rho_lin,capacity_nats,ci_half_width,n`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "rho_db,rho_lin,capacity_nats,ci_half_width,n")?;
        for i in 0..self.len() {
            writeln!(
                out,
                "{},{},{},{},{}",
                fmt_db(self.grid[i]),
                self.grid[i],
                self.values[i],
                self.ci_half_width[i],
                self.sample_count
            )?;
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("CSV is ASCII")
    }
}

/// `ρ` in dB for reports; `ρ = 0` prints as `-inf`.
pub fn fmt_db(rho: f64) -> String {
    if rho == 0.0 {
        "-inf".to_string()
    } else {
        format!("{}", round_db(10.0 * rho.log10()))
    }
}

fn round_db(db: f64) -> f64 {
    // strip conversion noise such as 4.999999999999999
    (db * 1e9).round() / 1e9
}

/// Linear SNR from decibels.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Decibels from linear SNR.
pub fn linear_to_db(rho: f64) -> f64 {
    10.0 * rho.log10()
}

/// Capacity of the unfaded AWGN channel, `ln(1 + ρ)`.
pub fn awgn_capacity(rho: f64) -> f64 {
    rho.ln_1p()
}

fn check_rho(func: &'static str, rho: f64) -> Result<()> {
    if rho.is_finite() && rho >= 0.0 {
        Ok(())
    } else {
        Err(Error::domain(func, format!("rho = {rho} must be finite and nonnegative")))
    }
}

fn engine_tol() -> Tolerance {
    Tolerance::abs(ENGINE_TOL).with_rel(1e-12)
}

/// `∫ ln(1+ρx) f(x) dx` by adaptive quadrature over the density.
pub fn shannon_pdf_quadrature(model: &FadingModel, rho: f64) -> Result<f64> {
    model.validate()?;
    check_rho("shannon_pdf_quadrature", rho)?;
    if rho == 0.0 {
        return Ok(0.0);
    }
    match model {
        FadingModel::Deterministic { c } => Ok((rho * c).ln_1p()),
        FadingModel::Empirical(s) => Ok(s.average(|x| (rho * x).ln_1p())),
        _ => {
            let mut breaks = model.breakpoints();
            breaks.push(1.0 / rho);
            let est = quad::integrate_half_line_split(
                |x| {
                    let p = model.pdf_unchecked(x);
                    if p == 0.0 {
                        0.0
                    } else {
                        (rho * x).ln_1p() * p
                    }
                },
                &breaks,
                engine_tol(),
            )?;
            Ok(est.value)
        }
    }
}

/// Stieltjes form `∫ (1 − F(u)) / (1/ρ + u) du`.
pub fn shannon_ccdf_stieltjes(model: &FadingModel, rho: f64) -> Result<f64> {
    model.validate()?;
    check_rho("shannon_ccdf_stieltjes", rho)?;
    if rho == 0.0 {
        return Ok(0.0);
    }
    let inv = 1.0 / rho;
    match model {
        FadingModel::Deterministic { c } => {
            // ccdf is the indicator of [0, c)
            Ok((c / inv).ln_1p())
        }
        FadingModel::Empirical(s) => {
            // ccdf is a step function: integrate each flat piece exactly
            let v = s.values();
            let n = v.len() as f64;
            let mut total = 0.0;
            let mut lo = 0.0;
            for (i, &x) in v.iter().enumerate() {
                let tail = (n - i as f64) / n;
                if x > lo {
                    total += tail * ((x - lo) / (inv + lo)).ln_1p();
                    lo = x;
                }
            }
            Ok(total)
        }
        _ => {
            let mut breaks = model.breakpoints();
            breaks.push(inv);
            let mut failure = None;
            let est = quad::integrate_half_line_split(
                |u| match model.ccdf_unchecked(u) {
                    Ok(q) => q / (inv + u),
                    Err(e) => {
                        failure.get_or_insert(e);
                        f64::NAN
                    }
                },
                &breaks,
                engine_tol(),
            );
            if let Some(e) = failure {
                return Err(e);
            }
            Ok(est?.value)
        }
    }
}

/// Laplace form `∫ e^{-u/ρ} (1 − φ(u)) / u du`.
///
/// The bracket `(1 − φ(u))/u` tends to the mean as `u → 0`; for
/// infinite-mean models the integrand has an integrable log singularity.
pub fn shannon_laplace(model: &FadingModel, rho: f64) -> Result<f64> {
    model.validate()?;
    check_rho("shannon_laplace", rho)?;
    if rho == 0.0 {
        return Ok(0.0);
    }
    let mut failure = None;
    let est = quad::integrate_half_line_split(
        |u| {
            let w = (-u / rho).exp();
            if w == 0.0 {
                return 0.0;
            }
            match model.laplace_deficit_ratio(u) {
                Ok(d) => w * d,
                Err(e) => {
                    failure.get_or_insert(e);
                    f64::NAN
                }
            }
        },
        &[rho],
        engine_tol(),
    );
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(est?.value)
}

/// Monte Carlo estimate on a grid; the same `n` draws serve every `ρ`.
pub fn shannon_monte_carlo(model: &FadingModel, rho_grid: &[f64], cfg: McConfig) -> Result<CapacityCurve> {
    for &r in rho_grid {
        check_rho("shannon_monte_carlo", r)?;
    }
    let sampler = model.sampler()?;
    let moments = cfg.estimate(mc::purpose::SCALAR, rho_grid.len(), |rng, out| {
        let x = sampler.sample(rng);
        for (o, &r) in out.iter_mut().zip(rho_grid) {
            *o = (r * x).ln_1p();
        }
    });
    Ok(curve_from_moments(rho_grid, &moments, cfg.n))
}

pub(crate) fn curve_from_moments(grid: &[f64], moments: &[Moments], n: usize) -> CapacityCurve {
    CapacityCurve {
        grid: grid.to_vec(),
        values: moments.iter().map(|m| m.mean).collect(),
        ci_half_width: moments.iter().map(|m| m.ci95()).collect(),
        method: Engine::MonteCarlo,
        sample_count: n,
    }
}

/// Two Monte Carlo curves estimated from common random numbers, together
/// with the paired difference `Δ = C_Y − C_X` and its 95% half-width.
#[derive(Debug, Clone, PartialEq)]
pub struct PairedCurves {
    pub x: CapacityCurve,
    pub y: CapacityCurve,
    pub delta: Vec<f64>,
    pub delta_ci: Vec<f64>,
}

/// Run a paired estimator: every draw evaluates `eval_x` and `eval_y` on the
/// same stream position, each writing one value per grid point.
pub(crate) fn paired_estimate<FX, FY>(
    grid: &[f64],
    cfg: McConfig,
    purpose: u64,
    eval_x: FX,
    eval_y: FY,
) -> PairedCurves
where
    FX: Fn(&mut Stream, &mut [f64]) + Sync,
    FY: Fn(&mut Stream, &mut [f64]) + Sync,
{
    let g = grid.len();
    let moments = cfg.estimate(purpose, 3 * g, |rng, out| {
        let (xs, rest) = out.split_at_mut(g);
        let (ys, ds) = rest.split_at_mut(g);
        mc::paired(rng, |r| eval_x(r, xs), |r| eval_y(r, ys));
        for i in 0..g {
            ds[i] = ys[i] - xs[i];
        }
    });
    PairedCurves {
        x: curve_from_moments(grid, &moments[..g], cfg.n),
        y: curve_from_moments(grid, &moments[g..2 * g], cfg.n),
        delta: moments[2 * g..].iter().map(|m| m.mean).collect(),
        delta_ci: moments[2 * g..].iter().map(|m| m.ci95()).collect(),
    }
}

/// Paired Monte Carlo Shannon transforms of two scalar models.
pub fn paired_monte_carlo(
    x: &FadingModel,
    y: &FadingModel,
    rho_grid: &[f64],
    cfg: McConfig,
) -> Result<PairedCurves> {
    for &r in rho_grid {
        check_rho("paired_monte_carlo", r)?;
    }
    let sx = x.sampler()?;
    let sy = y.sampler()?;
    let fill = |s: &crate::models::Sampler, rng: &mut Stream, out: &mut [f64]| {
        let v = s.sample(rng);
        for (o, &r) in out.iter_mut().zip(rho_grid) {
            *o = (r * v).ln_1p();
        }
    };
    Ok(paired_estimate(
        rho_grid,
        cfg,
        mc::purpose::SCALAR,
        |rng, out| fill(&sx, rng, out),
        |rng, out| fill(&sy, rng, out),
    ))
}

/// Evaluate one deterministic engine at one point.
pub fn shannon(model: &FadingModel, rho: f64, engine: Engine) -> Result<f64> {
    match engine {
        Engine::PdfQuadrature => shannon_pdf_quadrature(model, rho),
        Engine::Stieltjes => shannon_ccdf_stieltjes(model, rho),
        Engine::Laplace => shannon_laplace(model, rho),
        Engine::MonteCarlo => Err(Error::Parameter(
            "Monte Carlo needs a draw count and seed; use `curve` with McConfig".into(),
        )),
    }
}

/// Apply an engine over a grid.
///
/// Deterministic engines evaluate grid points concurrently. Because a
/// Shannon transform that exists at one `ρ > 0` exists at all of them, a
/// grid where some points converge and others do not is reported as a
/// nonconvergence error naming the failing points.
pub fn curve(model: &FadingModel, rho_grid: &[f64], engine: Engine, mc: Option<McConfig>) -> Result<CapacityCurve> {
    if engine.is_monte_carlo() {
        let cfg = mc.ok_or_else(|| Error::Parameter("Monte Carlo engine requires n and seed".into()))?;
        return shannon_monte_carlo(model, rho_grid, cfg);
    }
    model.validate()?;
    let results: Vec<Result<f64>> = rho_grid.par_iter().map(|&r| shannon(model, r, engine)).collect();
    let converged = results.iter().filter(|r| r.is_ok()).count();
    let positive = rho_grid.iter().filter(|r| **r > 0.0).count();
    if converged < results.len() {
        let first_err = results.iter().find_map(|r| r.as_ref().err()).cloned().expect("one failed");
        if !first_err.is_nonconvergence() {
            return Err(first_err);
        }
        let converged_positive = results
            .iter()
            .zip(rho_grid)
            .filter(|(r, rho)| r.is_ok() && **rho > 0.0)
            .count();
        let failing: Vec<String> = results
            .iter()
            .zip(rho_grid)
            .filter(|(r, _)| r.is_err())
            .map(|(_, rho)| format!("{rho}"))
            .collect();
        let detail = if converged_positive > 0 && converged_positive < positive {
            format!(
                "{engine} converged at some grid points but not at rho = [{}] ({first_err})",
                failing.join(", ")
            )
        } else {
            format!("{engine} failed on the whole grid ({first_err})")
        };
        return Err(Error::nonconvergence("curve", detail));
    }
    let values = results.into_iter().map(|r| r.expect("checked")).collect();
    Ok(CapacityCurve::deterministic(rho_grid.to_vec(), values, engine))
}

/// Outcome of the numeric existence heuristic for `C_X`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Existence {
    /// `A(t) = ∫₀ᵗ (1 − F)` grows like `t^e` with `e ≤ 0.95`.
    Finite { growth_exponent: f64 },
    /// `A(t)/t` does not decay over the probed range.
    Infinite,
    Unknown { growth_exponent: f64 },
}

/// Largest growth exponent accepted as `O(t^{1−δ})` (margin 0.05 below 1).
pub const EXISTENCE_EXPONENT_LIMIT: f64 = 0.95;

/// Fit the growth of `A(t) = ∫₀ᵗ (1 − F(u)) du` on `t ∈ {10², …, 10⁶}`.
///
/// Sublinear growth `O(t^{1−δ})` for some `δ ∈ (0, 1]` guarantees a finite
/// Shannon transform. This is a heuristic: it cannot prove divergence, so
/// `Unknown` is a legitimate answer.
pub fn exists_shannon(model: &FadingModel) -> Existence {
    let ts: Vec<f64> = (2..=6).map(|k| 10f64.powi(k)).collect();
    let areas = match integrated_tail_areas(model, &ts) {
        Ok(a) => a,
        Err(_) => return Existence::Unknown { growth_exponent: f64::NAN },
    };
    if areas.iter().all(|&a| a <= 0.0) {
        return Existence::Finite { growth_exponent: 0.0 };
    }
    let xs: Vec<f64> = ts.iter().map(|t| t.ln()).collect();
    let ys: Vec<f64> = areas.iter().map(|a| a.max(f64::MIN_POSITIVE).ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    let first_ratio = areas[0] / ts[0];
    let last_ratio = areas[areas.len() - 1] / ts[ts.len() - 1];
    if slope <= EXISTENCE_EXPONENT_LIMIT {
        Existence::Finite { growth_exponent: slope }
    } else if last_ratio >= 0.999 * first_ratio {
        Existence::Infinite
    } else {
        Existence::Unknown { growth_exponent: slope }
    }
}

fn integrated_tail_areas(model: &FadingModel, ts: &[f64]) -> Result<Vec<f64>> {
    model.validate()?;
    match model {
        FadingModel::Deterministic { c } => Ok(ts.iter().map(|t| t.min(*c)).collect()),
        FadingModel::Empirical(s) => Ok(ts.iter().map(|&t| s.average(|x| x.min(t))).collect()),
        _ => {
            let tol = Tolerance::abs(1e-10).with_rel(1e-10);
            let mut area = quad::integrate(|u| model.ccdf_unchecked(u).unwrap_or(f64::NAN), 0.0, 1.0, tol)?.value;
            let mut lo = 1.0;
            let mut out = Vec::with_capacity(ts.len());
            for &t in ts {
                // decade-by-decade so each piece sees a single scale
                while lo < t {
                    let hi = (lo * 10.0).min(t);
                    area += quad::integrate(|u| model.ccdf_unchecked(u).unwrap_or(f64::NAN), lo, hi, tol)?.value;
                    lo = hi;
                }
                out.push(area);
            }
            Ok(out)
        }
    }
}
