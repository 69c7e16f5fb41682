//! Parametric fading-power distributions.
//!
//! Nakagami, Rician and Hoyt use the unit-mean parameterization, so the
//! average SNR enters only through `ρ`. The Pareto-type law has CDF
//! `x^β / (1 + x^β)` and an infinite mean for `β ≤ 1`.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::distr::{Distribution, Open01};
use rand::Rng;
use rand_distr::{Gamma, StandardNormal};

use crate::quad::{self, Tolerance};
use crate::specfun;
use crate::{Error, Result};

/// A nonnegative fading-power distribution.
#[derive(Debug, Clone, PartialEq)]
pub enum FadingModel {
    /// Gamma power with shape `m` and unit mean; `m = 1` is Rayleigh fading.
    Nakagami { m: f64 },
    /// Rician fading with LoS factor `K`; `K = 0` is Rayleigh fading.
    Rician { k: f64 },
    /// Nakagami-q (Hoyt) fading, `q ∈ (0, 1]`; `q = 1` is Rayleigh fading.
    Hoyt { q: f64 },
    /// Pareto-type power with CDF `x^β / (1 + x^β)`.
    ParetoType { beta: f64 },
    /// Constant power `c` (no fading).
    Deterministic { c: f64 },
    /// Equally weighted atoms, e.g. pooled eigenvalue draws.
    Empirical(EmpiricalSamples),
}

/// Sorted nonnegative sample values backing [`FadingModel::Empirical`].
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalSamples(Arc<[f64]>);

impl EmpiricalSamples {
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Parameter("empirical model needs at least one sample".into()));
        }
        if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::Parameter(
                "empirical samples must be finite and nonnegative".into(),
            ));
        }
        values.sort_by(f64::total_cmp);
        Ok(EmpiricalSamples(values.into()))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Fraction of samples `≤ x`.
    pub fn cdf(&self, x: f64) -> f64 {
        self.0.partition_point(|&v| v <= x) as f64 / self.0.len() as f64
    }

    /// Sample average of `f`.
    pub fn average(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.0.iter().map(|&v| f(v)).sum::<f64>() / self.0.len() as f64
    }
}

/// Mean of a fading model, which may be infinite for heavy tails.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Mean {
    Finite(f64),
    Infinite,
}

impl Mean {
    pub fn finite(self) -> Option<f64> {
        match self {
            Mean::Finite(v) => Some(v),
            Mean::Infinite => None,
        }
    }
}

const CDF_TOL: f64 = 1e-13;
const LAPLACE_TOL: f64 = 1e-11;

impl FadingModel {
    pub fn nakagami(m: f64) -> Result<Self> {
        FadingModel::Nakagami { m }.validated()
    }

    pub fn rician(k: f64) -> Result<Self> {
        FadingModel::Rician { k }.validated()
    }

    pub fn hoyt(q: f64) -> Result<Self> {
        FadingModel::Hoyt { q }.validated()
    }

    pub fn pareto(beta: f64) -> Result<Self> {
        FadingModel::ParetoType { beta }.validated()
    }

    pub fn deterministic(c: f64) -> Result<Self> {
        FadingModel::Deterministic { c }.validated()
    }

    /// Unit-mean exponential power (Rayleigh fading), i.e. Nakagami with `m = 1`.
    pub fn exponential() -> Self {
        FadingModel::Nakagami { m: 1.0 }
    }

    pub fn empirical(values: Vec<f64>) -> Result<Self> {
        Ok(FadingModel::Empirical(EmpiricalSamples::new(values)?))
    }

    fn validated(self) -> Result<Self> {
        self.validate()?;
        Ok(self)
    }

    /// Check parameter admissibility.
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            FadingModel::Nakagami { m } => m.is_finite() && m > 0.0,
            FadingModel::Rician { k } => k.is_finite() && k >= 0.0,
            FadingModel::Hoyt { q } => q.is_finite() && q > 0.0 && q <= 1.0,
            FadingModel::ParetoType { beta } => beta.is_finite() && beta > 0.0,
            FadingModel::Deterministic { c } => c.is_finite() && c >= 0.0,
            FadingModel::Empirical(ref s) => !s.is_empty(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Parameter(format!("inadmissible model parameters: {self:?}")))
        }
    }

    /// True when the model has a density (everything except point masses).
    pub fn has_density(&self) -> bool {
        !matches!(self, FadingModel::Deterministic { .. } | FadingModel::Empirical(_))
    }

    /// Points where the CDF jumps or the density has a kink worth splitting
    /// quadrature at.
    pub fn breakpoints(&self) -> Vec<f64> {
        match *self {
            FadingModel::Deterministic { c } if c > 0.0 => vec![c],
            _ => Vec::new(),
        }
    }

    fn check_x(func: &'static str, x: f64) -> Result<()> {
        if x.is_nan() || x < 0.0 {
            Err(Error::domain(func, format!("x = {x} must be nonnegative")))
        } else {
            Ok(())
        }
    }

    /// Probability density at `x ≥ 0`.
    ///
    /// Point-mass models (deterministic, empirical) have no density and
    /// return a parameter error.
    pub fn pdf(&self, x: f64) -> Result<f64> {
        self.validate()?;
        Self::check_x("pdf", x)?;
        if !self.has_density() {
            return Err(Error::Parameter(format!("{self} has no density")));
        }
        Ok(self.pdf_unchecked(x))
    }

    pub(crate) fn pdf_unchecked(&self, x: f64) -> f64 {
        match *self {
            FadingModel::Nakagami { m } => nakagami_pdf(m, x),
            FadingModel::Rician { k } => rician_pdf(k, x),
            FadingModel::Hoyt { q } => hoyt_pdf(q, x),
            FadingModel::ParetoType { beta } => pareto_pdf(beta, x),
            FadingModel::Deterministic { .. } | FadingModel::Empirical(_) => 0.0,
        }
    }

    /// `P(X ≤ x)`.
    pub fn cdf(&self, x: f64) -> Result<f64> {
        self.validate()?;
        Self::check_x("cdf", x)?;
        Ok(self.split_cdf(x)?.0)
    }

    /// `P(X > x)`.
    pub fn ccdf(&self, x: f64) -> Result<f64> {
        self.validate()?;
        Self::check_x("ccdf", x)?;
        Ok(self.split_cdf(x)?.1)
    }

    /// `(cdf, ccdf)`, each computed on the side where it is accurate and
    /// the other one as its complement.
    fn split_cdf(&self, x: f64) -> Result<(f64, f64)> {
        let from_ccdf = |q: f64| (1.0 - q, q);
        let from_cdf = |p: f64| (p, 1.0 - p);
        Ok(match *self {
            FadingModel::Nakagami { m } => {
                let p = specfun::gamma_p(m, m * x)?;
                if p < 0.5 {
                    from_cdf(p)
                } else {
                    from_ccdf(specfun::gamma_q(m, m * x)?)
                }
            }
            FadingModel::Rician { k } => {
                let q = specfun::marcum_q1((2.0 * k).sqrt(), (2.0 * (k + 1.0) * x).sqrt())?;
                from_ccdf(q)
            }
            FadingModel::Hoyt { q } => {
                if x <= 1.0 {
                    let p = quad::integrate(|t| hoyt_pdf(q, t), 0.0, x, Tolerance::abs(CDF_TOL))?;
                    from_cdf(p.value.clamp(0.0, 1.0))
                } else {
                    let tail = quad::integrate_tail(|t| hoyt_pdf(q, t), x, Tolerance::abs(CDF_TOL))?;
                    from_ccdf(tail.value.clamp(0.0, 1.0))
                }
            }
            FadingModel::ParetoType { beta } => from_ccdf(pareto_ccdf(beta, x)),
            FadingModel::Deterministic { c } => {
                if x < c {
                    (0.0, 1.0)
                } else {
                    (1.0, 0.0)
                }
            }
            FadingModel::Empirical(ref s) => from_cdf(s.cdf(x)),
        })
    }

    pub(crate) fn ccdf_unchecked(&self, x: f64) -> Result<f64> {
        Ok(self.split_cdf(x)?.1)
    }

    /// Laplace transform `φ(u) = E[e^{-uX}]` for `u > 0`.
    pub fn laplace(&self, u: f64) -> Result<f64> {
        self.validate()?;
        if !(u > 0.0) || !u.is_finite() {
            return Err(Error::domain("laplace", format!("u = {u} must be positive and finite")));
        }
        match *self {
            FadingModel::Hoyt { q } => {
                let est = quad::integrate_half_line_split(
                    |x| (-u * x).exp() * hoyt_pdf(q, x),
                    &[1.0 / u],
                    Tolerance::abs(LAPLACE_TOL),
                )?;
                Ok(est.value.clamp(0.0, 1.0))
            }
            FadingModel::ParetoType { beta } => {
                // φ(u) = 1 − u ∫ e^{-ux} ccdf(x) dx
                Ok((1.0 - u * pareto_laplace_ccdf_integral(beta, u)?).clamp(0.0, 1.0))
            }
            _ => Ok(self.ln_laplace_closed(u).expect("closed form").exp()),
        }
    }

    fn ln_laplace_closed(&self, u: f64) -> Option<f64> {
        match *self {
            FadingModel::Nakagami { m } => Some(-m * (u / m).ln_1p()),
            FadingModel::Rician { k } => Some(-(u / (k + 1.0)).ln_1p() - k * u / (k + 1.0 + u)),
            FadingModel::Deterministic { c } => Some(-u * c),
            FadingModel::Empirical(ref s) => Some(s.average(|v| (-u * v).exp()).ln()),
            _ => None,
        }
    }

    /// `(1 − φ(u)) / u` for `u ≥ 0`, computed without cancellation.
    ///
    /// Equals `∫ e^{-ux} ccdf(x) dx`; at `u = 0` it is the mean, which may be
    /// infinite.
    pub fn laplace_deficit_ratio(&self, u: f64) -> Result<f64> {
        if u == 0.0 {
            return Ok(match self.mean() {
                Mean::Finite(v) => v,
                Mean::Infinite => f64::INFINITY,
            });
        }
        match *self {
            FadingModel::Hoyt { q } => {
                let est = quad::integrate_half_line_split(
                    |x| hoyt_pdf(q, x) * (-(-u * x).exp_m1() / u),
                    &[1.0 / u],
                    Tolerance::abs(LAPLACE_TOL).with_rel(1e-11),
                )?;
                Ok(est.value)
            }
            FadingModel::ParetoType { beta } => pareto_laplace_ccdf_integral(beta, u),
            FadingModel::Empirical(ref s) => Ok(s.average(|v| -(-u * v).exp_m1()) / u),
            _ => {
                let ln_phi = self.ln_laplace_closed(u).expect("closed form");
                Ok(-ln_phi.exp_m1() / u)
            }
        }
    }

    /// Mean power.
    pub fn mean(&self) -> Mean {
        match *self {
            FadingModel::Nakagami { .. } | FadingModel::Rician { .. } | FadingModel::Hoyt { .. } => {
                Mean::Finite(1.0)
            }
            FadingModel::Deterministic { c } => Mean::Finite(c),
            FadingModel::Empirical(ref s) => Mean::Finite(s.average(|v| v)),
            FadingModel::ParetoType { beta } => {
                if beta <= 1.0 {
                    Mean::Infinite
                } else {
                    let est = quad::integrate_half_line(
                        |x| pareto_ccdf(beta, x),
                        Tolerance::abs(1e-10).with_rel(1e-12).with_max_segments(20_000),
                    );
                    Mean::Finite(match est {
                        Ok(e) => e.value,
                        // ∫ dx/(1+x^β) = (π/β)/sin(π/β) when the tail is too slow to integrate
                        Err(_) => {
                            let t = std::f64::consts::PI / beta;
                            t / t.sin()
                        }
                    })
                }
            }
        }
    }

    /// Precompute a sampler. Fails on inadmissible parameters.
    pub fn sampler(&self) -> Result<Sampler> {
        self.validate()?;
        Ok(match *self {
            FadingModel::Nakagami { m } => Sampler::Gamma(
                Gamma::new(m, 1.0 / m).map_err(|e| Error::Parameter(e.to_string()))?,
            ),
            FadingModel::Rician { k } => Sampler::Rician {
                los: (k / (k + 1.0)).sqrt(),
                sd: (0.5 / (k + 1.0)).sqrt(),
            },
            FadingModel::Hoyt { q } => {
                let q2 = q * q;
                Sampler::Hoyt {
                    var_i: 1.0 / (1.0 + q2),
                    var_q: q2 / (1.0 + q2),
                }
            }
            FadingModel::ParetoType { beta } => Sampler::Pareto { inv_beta: 1.0 / beta },
            FadingModel::Deterministic { c } => Sampler::Constant(c),
            FadingModel::Empirical(ref s) => Sampler::Resample(s.clone()),
        })
    }

    /// One draw from a seeded stream.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<f64> {
        Ok(self.sampler()?.sample(rng))
    }
}

/// Precomputed sampling state for a [`FadingModel`].
#[derive(Debug, Clone)]
pub enum Sampler {
    Gamma(Gamma<f64>),
    Rician { los: f64, sd: f64 },
    Hoyt { var_i: f64, var_q: f64 },
    Pareto { inv_beta: f64 },
    Constant(f64),
    Resample(EmpiricalSamples),
}

impl Sampler {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Sampler::Gamma(g) => g.sample(rng),
            Sampler::Rician { los, sd } => {
                let re: f64 = rng.sample::<f64, _>(StandardNormal) * sd + los;
                let im: f64 = rng.sample::<f64, _>(StandardNormal) * sd;
                re * re + im * im
            }
            Sampler::Hoyt { var_i, var_q } => {
                let a: f64 = rng.sample(StandardNormal);
                let b: f64 = rng.sample(StandardNormal);
                var_i * a * a + var_q * b * b
            }
            Sampler::Pareto { inv_beta } => {
                // inverse CDF: x = (p / (1 − p))^{1/β}
                let p: f64 = rng.sample(Open01);
                (p / (1.0 - p)).powf(*inv_beta)
            }
            Sampler::Constant(c) => *c,
            Sampler::Resample(s) => {
                let i = rng.random_range(0..s.len());
                s.values()[i]
            }
        }
    }
}

fn nakagami_pdf(m: f64, x: f64) -> f64 {
    if x == 0.0 {
        return if m < 1.0 {
            f64::INFINITY
        } else if m == 1.0 {
            1.0
        } else {
            0.0
        };
    }
    (m * m.ln() - statrs::function::gamma::ln_gamma(m) + (m - 1.0) * x.ln() - m * x).exp()
}

fn rician_pdf(k: f64, x: f64) -> f64 {
    // (K+1) exp(-(K+1)x - K) I0(2 sqrt(K(K+1)x)), regrouped around the scaled Bessel
    let z = 2.0 * (k * (k + 1.0) * x).sqrt();
    let d = ((k + 1.0) * x).sqrt() - k.sqrt();
    (k + 1.0) * (-d * d).exp() * specfun::bessel_i0_scaled(z).unwrap_or(0.0)
}

fn hoyt_coefficients(q: f64) -> (f64, f64) {
    let q2 = q * q;
    let a = (1.0 + q2) / (2.0 * q);
    let b = (1.0 - q2 * q2) / (4.0 * q2);
    (a, b)
}

fn hoyt_pdf(q: f64, x: f64) -> f64 {
    // a exp(-a² x) I0(b x) = a exp(-(a² - b) x) · e^{-bx} I0(bx)
    let (a, b) = hoyt_coefficients(q);
    a * (-(a * a - b) * x).exp() * specfun::bessel_i0_scaled(b * x).unwrap_or(0.0)
}

fn pareto_pdf(beta: f64, x: f64) -> f64 {
    if x == 0.0 {
        return if beta < 1.0 {
            f64::INFINITY
        } else if beta == 1.0 {
            1.0
        } else {
            0.0
        };
    }
    let t = x.powf(beta);
    if t <= 1.0 {
        beta * t / x / ((1.0 + t) * (1.0 + t))
    } else {
        let inv = 1.0 / t;
        beta * inv / x / ((1.0 + inv) * (1.0 + inv))
    }
}

fn pareto_ccdf(beta: f64, x: f64) -> f64 {
    1.0 / (1.0 + x.powf(beta))
}

fn pareto_laplace_ccdf_integral(beta: f64, u: f64) -> Result<f64> {
    let est = quad::integrate_half_line_split(
        |x| (-u * x).exp() * pareto_ccdf(beta, x),
        &[1.0 / u],
        Tolerance::abs(LAPLACE_TOL).with_rel(1e-11),
    )?;
    Ok(est.value)
}

impl fmt::Display for FadingModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FadingModel::Nakagami { m } if *m == 1.0 => write!(f, "exp"),
            FadingModel::Nakagami { m } => write!(f, "nakagami:m={m}"),
            FadingModel::Rician { k } => write!(f, "rician:K={k}"),
            FadingModel::Hoyt { q } => write!(f, "hoyt:q={q}"),
            FadingModel::ParetoType { beta } => write!(f, "pareto:beta={beta}"),
            FadingModel::Deterministic { c } => write!(f, "det:c={c}"),
            FadingModel::Empirical(s) => write!(f, "empirical:n={}", s.len()),
        }
    }
}

impl FromStr for FadingModel {
    type Err = Error;

    /// Parses `nakagami:m=2`, `rician:K=5`, `hoyt:q=0.5`, `pareto:beta=3`,
    /// `det:c=1` and `exp`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("exp") {
            return Ok(FadingModel::exponential());
        }
        let (family, param) = s
            .split_once(':')
            .ok_or_else(|| Error::Parameter(format!("model literal `{s}` lacks `family:param=value`")))?;
        let (key, value) = param
            .split_once('=')
            .ok_or_else(|| Error::Parameter(format!("model literal `{s}` lacks `param=value`")))?;
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| Error::Parameter(format!("bad number in model literal `{s}`")))?;
        let key = key.trim();
        let expect = |want: &str| {
            if key.eq_ignore_ascii_case(want) {
                Ok(())
            } else {
                Err(Error::Parameter(format!(
                    "model `{family}` takes parameter `{want}`, got `{key}`"
                )))
            }
        };
        match family.trim().to_ascii_lowercase().as_str() {
            "nakagami" => expect("m").and_then(|_| FadingModel::nakagami(value)),
            "rician" | "rice" => expect("k").and_then(|_| FadingModel::rician(value)),
            "hoyt" => expect("q").and_then(|_| FadingModel::hoyt(value)),
            "pareto" => expect("beta").and_then(|_| FadingModel::pareto(value)),
            "det" => expect("c").and_then(|_| FadingModel::deterministic(value)),
            other => Err(Error::Parameter(format!("unknown model family `{other}`"))),
        }
    }
}
