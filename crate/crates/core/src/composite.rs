//! Multi-link systems: receive combining (MRC, EGC), the multi-hop
//! amplify-and-forward relay, and multiple-access capacity regions.
//!
//! All capacities are Monte Carlo estimates. Comparisons between two link
//! sets use common random numbers: each draw of the `X` links and of the
//! `Y` links starts from the same stream position.

use std::fmt;
use std::str::FromStr;

use crate::mc::{self, McConfig, Stream};
use crate::models::{FadingModel, Sampler};
use crate::ordering::{self, CapacityComparison, SnrGrid};
use crate::transform::{self, CapacityCurve};
use crate::{Error, Result};

/// Largest user count accepted by [`mac_region`] (`2^M − 1` constraints).
pub const MAC_MAX_USERS: usize = 10;

/// `Σ x_m`.
pub fn mrc_power(x: &[f64]) -> f64 {
    x.iter().sum()
}

/// `(Σ √x_m)² / M`.
pub fn egc_power(x: &[f64]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    let s: f64 = x.iter().map(|v| v.sqrt()).sum();
    s * s / x.len() as f64
}

/// End-to-end SNR of a variable-gain amplify-and-forward chain,
/// `1 / (∏(1 + 1/(ρ x_m)) − 1)`, evaluated as `1 / expm1(Σ ln1p(1/(ρ x_m)))`.
///
/// The average SNR `ρ` enters inside the product; a dead hop gives 0.
pub fn mhaf_snr(x: &[f64], rho: f64) -> f64 {
    if rho <= 0.0 || x.is_empty() || x.iter().any(|&v| v <= 0.0) {
        return 0.0;
    }
    let s: f64 = x.iter().map(|&v| (1.0 / (rho * v)).ln_1p()).sum();
    1.0 / s.exp_m1()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    Mrc,
    Egc,
    /// Multi-hop amplify-and-forward.
    Mhaf,
}

impl Scheme {
    /// Capacity of one draw of link powers at SNR `rho`.
    pub fn capacity(self, x: &[f64], rho: f64) -> f64 {
        match self {
            Scheme::Mrc => (rho * mrc_power(x)).ln_1p(),
            Scheme::Egc => (rho * egc_power(x)).ln_1p(),
            Scheme::Mhaf => mhaf_snr(x, rho).ln_1p(),
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::Mrc => "mrc",
            Scheme::Egc => "egc",
            Scheme::Mhaf => "mhaf",
        })
    }
}

impl FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mrc" => Ok(Scheme::Mrc),
            "egc" => Ok(Scheme::Egc),
            "mhaf" | "af" | "relay" => Ok(Scheme::Mhaf),
            other => Err(Error::Parameter(format!("unknown scheme `{other}` (mrc, egc, mhaf)"))),
        }
    }
}

/// Independent links, drawn in order.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkSet {
    models: Vec<FadingModel>,
    pub labels: Vec<String>,
}

impl LinkSet {
    pub fn new(models: Vec<FadingModel>) -> Result<Self> {
        if models.is_empty() {
            return Err(Error::Parameter("a link set needs at least one link".into()));
        }
        for m in &models {
            m.validate()?;
        }
        let labels = models.iter().map(|m| m.to_string()).collect();
        Ok(LinkSet { models, labels })
    }

    /// `count` copies of one model.
    pub fn iid(model: FadingModel, count: usize) -> Result<Self> {
        Self::new(vec![model; count])
    }

    pub fn models(&self) -> &[FadingModel] {
        &self.models
    }

    pub fn len(&self) -> usize {
        self.models.len()
    }

    pub fn is_empty(&self) -> bool {
        self.models.is_empty()
    }

    fn samplers(&self) -> Result<Vec<Sampler>> {
        self.models.iter().map(|m| m.sampler()).collect()
    }
}

impl FromStr for LinkSet {
    type Err = Error;
    /// Comma-separated model literals, e.g. `nakagami:m=0.5,exp`.
    fn from_str(s: &str) -> Result<Self> {
        let models = s
            .split(',')
            .filter(|t| !t.trim().is_empty())
            .map(|t| t.trim().parse())
            .collect::<Result<Vec<FadingModel>>>()?;
        Self::new(models)
    }
}

impl fmt::Display for LinkSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.labels.join(","))
    }
}

fn draw(samplers: &[Sampler], rng: &mut Stream, buf: &mut [f64]) {
    for (b, s) in buf.iter_mut().zip(samplers) {
        *b = s.sample(rng);
    }
}

fn check_grid(rho_grid: &[f64]) -> Result<()> {
    if rho_grid.iter().any(|r| !(r.is_finite() && *r >= 0.0)) {
        return Err(Error::Parameter("SNR values must be finite and nonnegative".into()));
    }
    Ok(())
}

/// Monte Carlo capacity of a combining scheme; every grid point reuses the
/// same joint draws.
pub fn composite_capacity(scheme: Scheme, links: &LinkSet, rho_grid: &[f64], cfg: McConfig) -> Result<CapacityCurve> {
    check_grid(rho_grid)?;
    let samplers = links.samplers()?;
    let m = links.len();
    let moments = cfg.estimate(mc::purpose::COMPOSITE, rho_grid.len(), |rng, out| {
        let mut x = [0.0; 16];
        let mut heap;
        let buf: &mut [f64] = if m <= x.len() {
            &mut x[..m]
        } else {
            heap = vec![0.0; m];
            &mut heap
        };
        draw(&samplers, rng, buf);
        for (o, &r) in out.iter_mut().zip(rho_grid) {
            *o = scheme.capacity(buf, r);
        }
    });
    Ok(transform::curve_from_moments(rho_grid, &moments, cfg.n))
}

/// Paired Monte Carlo comparison of two link sets under one scheme.
///
/// The per-point dead band is `max(tol, 2·CI(Δ))`. Swapping the link sets
/// negates every difference exactly and flips the relation.
pub fn compare_composite(
    scheme: Scheme,
    links_x: &LinkSet,
    links_y: &LinkSet,
    grid: &SnrGrid,
    cfg: McConfig,
    tol: f64,
) -> Result<CapacityComparison> {
    if links_x.len() != links_y.len() {
        return Err(Error::Parameter(format!(
            "link sets differ in size ({} vs {})",
            links_x.len(),
            links_y.len()
        )));
    }
    let p = paired_composite(scheme, links_x, links_y, grid.linear(), cfg)?;
    Ok(ordering::compare_curves(p.x, p.y, p.delta, p.delta_ci, tol))
}

fn paired_composite(
    scheme: Scheme,
    links_x: &LinkSet,
    links_y: &LinkSet,
    rho_grid: &[f64],
    cfg: McConfig,
) -> Result<transform::PairedCurves> {
    check_grid(rho_grid)?;
    let sx = links_x.samplers()?;
    let sy = links_y.samplers()?;
    let eval = |samplers: &[Sampler], rng: &mut Stream, out: &mut [f64]| {
        let mut buf = vec![0.0; samplers.len()];
        draw(samplers, rng, &mut buf);
        for (o, &r) in out.iter_mut().zip(rho_grid) {
            *o = scheme.capacity(&buf, r);
        }
    };
    Ok(transform::paired_estimate(
        rho_grid,
        cfg,
        mc::purpose::COMPOSITE,
        |rng, out| eval(&sx, rng, out),
        |rng, out| eval(&sy, rng, out),
    ))
}

/// Multi-hop relay with Pareto-type hops, `β_X` against `β_Y`.
#[derive(Debug, Clone, PartialEq)]
pub struct RelayExperiment {
    pub hops: usize,
    pub comparison: CapacityComparison,
    /// Sign changes of `C_Y − C_X`, refined by paired re-simulation (linear `ρ`).
    pub crossovers: Vec<f64>,
}

impl RelayExperiment {
    pub fn curve_x(&self) -> &CapacityCurve {
        &self.comparison.x
    }

    pub fn curve_y(&self) -> &CapacityCurve {
        &self.comparison.y
    }
}

/// Run the paired relay comparison and locate its crossovers.
pub fn relay_crossover_experiment(
    beta_x: f64,
    beta_y: f64,
    hops: usize,
    grid: &SnrGrid,
    cfg: McConfig,
    tol: f64,
) -> Result<RelayExperiment> {
    if hops == 0 {
        return Err(Error::Parameter("relay needs at least one hop".into()));
    }
    let lx = LinkSet::iid(FadingModel::pareto(beta_x)?, hops)?;
    let ly = LinkSet::iid(FadingModel::pareto(beta_y)?, hops)?;
    let comparison = compare_composite(Scheme::Mhaf, &lx, &ly, grid, cfg, tol)?;
    // the crossover search uses the paired difference, so feed it curves
    // whose spread is the paired half-width
    let zero = CapacityCurve {
        values: vec![0.0; comparison.delta.len()],
        ci_half_width: vec![0.0; comparison.delta.len()],
        ..comparison.x.clone()
    };
    let diff = CapacityCurve {
        values: comparison.delta.clone(),
        ci_half_width: comparison.delta_ci.clone(),
        ..comparison.x.clone()
    };
    let refine = |rho: f64| -> Result<f64> { Ok(paired_composite(Scheme::Mhaf, &lx, &ly, &[rho], cfg)?.delta[0]) };
    let crossovers = ordering::find_crossover(&zero, &diff, tol, Some(&refine))?;
    Ok(RelayExperiment {
        hops,
        comparison,
        crossovers,
    })
}

/// One sum-rate constraint of a multiple-access region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubsetConstraint {
    /// Bit `m` set when user `m + 1` is in the subset.
    pub mask: u32,
    pub value: f64,
    pub ci_half_width: f64,
}

/// Per-subset bounds `E[ln(1 + ρ Σ_S X_m)]` for every nonempty subset `S`.
#[derive(Debug, Clone, PartialEq)]
pub struct MacRegion {
    pub users: usize,
    pub rho: f64,
    /// Indexed by `mask − 1`.
    pub constraints: Vec<SubsetConstraint>,
}

impl MacRegion {
    pub fn constraint(&self, mask: u32) -> Option<&SubsetConstraint> {
        self.constraints.get((mask as usize).checked_sub(1)?)
    }

    pub fn full_set(&self) -> &SubsetConstraint {
        self.constraints.last().expect("at least one user")
    }

    /// CSV `subset_mask,capacity_nats,ci_half_width`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("subset_mask,capacity_nats,ci_half_width\n");
        for c in &self.constraints {
            s.push_str(&format!("{},{},{}\n", c.mask, c.value, c.ci_half_width));
        }
        s
    }

    /// Largest violation of `value(S) ≤ value(T) + 2·CI(S)` over `S ⊆ T`.
    pub fn monotonicity_violation(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for s in &self.constraints {
            for t in &self.constraints {
                if s.mask & t.mask == s.mask {
                    worst = worst.max(s.value - t.value - 2.0 * s.ci_half_width);
                }
            }
        }
        worst
    }
}

/// Build a region from per-draw subset values already produced by `cfg`.
pub(crate) fn region_from_sums<F>(users: usize, rho: f64, cfg: McConfig, purpose: u64, per_draw: F) -> MacRegion
where
    F: Fn(&mut Stream, &mut [f64]) + Sync,
{
    let count = (1usize << users) - 1;
    let moments = cfg.estimate(purpose, count, per_draw);
    let constraints = moments
        .iter()
        .enumerate()
        .map(|(i, m)| SubsetConstraint {
            mask: (i + 1) as u32,
            value: m.mean,
            ci_half_width: m.ci95(),
        })
        .collect();
    MacRegion { users, rho, constraints }
}

/// Monte Carlo MAC region at one SNR; all subsets share each draw.
pub fn mac_region(links: &LinkSet, rho: f64, cfg: McConfig) -> Result<MacRegion> {
    let m = links.len();
    if m > MAC_MAX_USERS {
        return Err(Error::Size(format!("MAC region supports at most {MAC_MAX_USERS} users, got {m}")));
    }
    check_grid(&[rho])?;
    let samplers = links.samplers()?;
    Ok(region_from_sums(m, rho, cfg, mc::purpose::MAC, |rng, out| {
        let mut x = [0.0; MAC_MAX_USERS];
        draw(&samplers, rng, &mut x[..m]);
        for (i, o) in out.iter_mut().enumerate() {
            let mask = i + 1;
            let s: f64 = (0..m).filter(|b| mask >> b & 1 == 1).map(|b| x[b]).sum();
            *o = (rho * s).ln_1p();
        }
    }))
}

/// `A ⊆ B` certified by `value_A(S) ≤ value_B(S) + tol` for every subset.
pub fn mac_region_subset(a: &MacRegion, b: &MacRegion, tol: f64) -> Result<bool> {
    if a.users != b.users || a.rho != b.rho || a.constraints.len() != b.constraints.len() {
        return Err(Error::Input(format!(
            "regions differ in structure ({} users at rho={} vs {} users at rho={})",
            a.users, a.rho, b.users, b.rho
        )));
    }
    Ok(a.constraints
        .iter()
        .zip(&b.constraints)
        .all(|(ca, cb)| ca.value <= cb.value + tol))
}
