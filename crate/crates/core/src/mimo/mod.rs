//! MIMO capacity order over random positive semidefinite Gram matrices.
//!
//! `C(ρ) = E[ln det(I + ρX)] = E[Σ ln(1 + ρλ_i(X))]`. Ensembles are sampled
//! row by row from one stream, so a Rayleigh `n_r × n_t` draw and an
//! `n_r' × n_t` draw (`n_r' > n_r`) under the same stream share their first
//! `n_r` rows. That makes paired comparisons between them exact in the
//! Loewner sense.

pub mod linalg;

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

pub use linalg::CMatrix;

use crate::composite::{self, MacRegion};
use crate::mc::{self, McConfig, Stream};
use crate::models::{EmpiricalSamples, FadingModel, Sampler};
use crate::ordering::{self, CapacityComparison, OrderVerdict, Relation, SnrGrid};
use crate::transform::{self, CapacityCurve};
use crate::{Error, Result};

/// Largest user count of [`mimo_mac_region`].
pub const MIMO_MAC_MAX_USERS: usize = 6;

/// Minimum draw count for eigenvalue-mixture estimates.
pub const MIXTURE_MIN_DRAWS: usize = 1000;

/// KS distance below which two eigenvalue mixtures count as equal.
pub const MIXTURE_KS_TOL: f64 = 0.01;

/// Tolerance on `λ_min` before a matrix is rejected as not PSD.
pub const PSD_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub enum MatrixEnsemble {
    /// `X = HᴴH`, `H` is `nr × nt` with i.i.d. `CN(0, power)` entries.
    Rayleigh { nr: usize, nt: usize, power: f64 },
    Scaled { base: Box<MatrixEnsemble>, c: f64 },
    /// `X ↦ U X Uᴴ` for a fixed unitary `U`.
    UnitaryConjugate { base: Box<MatrixEnsemble>, u: CMatrix },
    DeterministicPsd(CMatrix),
    /// Independent scalar fading powers on the diagonal.
    Diagonal(Vec<FadingModel>),
}

impl MatrixEnsemble {
    pub fn rayleigh(nr: usize, nt: usize, power: f64) -> Result<Self> {
        if nr == 0 || nt == 0 || !(power.is_finite() && power > 0.0) {
            return Err(Error::Parameter(format!("rayleigh needs nr, nt >= 1 and power > 0 (got {nr}, {nt}, {power})")));
        }
        Ok(MatrixEnsemble::Rayleigh { nr, nt, power })
    }

    pub fn scaled(base: MatrixEnsemble, c: f64) -> Result<Self> {
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::Parameter(format!("scale must be positive, got {c}")));
        }
        Ok(MatrixEnsemble::Scaled { base: Box::new(base), c })
    }

    pub fn unitary_conjugate(base: MatrixEnsemble, u: CMatrix) -> Result<Self> {
        if u.size() != base.size() {
            return Err(Error::Size(format!("unitary is {}x{}, ensemble is {}", u.size(), u.size(), base.size())));
        }
        let defect = u.adjoint().mul(&u).add(&CMatrix::identity(u.size()).scale(-1.0)).frobenius_norm();
        if defect > 1e-10 {
            return Err(Error::Input(format!("matrix is not unitary (|UᴴU − I| = {defect:.2e})")));
        }
        Ok(MatrixEnsemble::UnitaryConjugate { base: Box::new(base), u })
    }

    pub fn deterministic(x: CMatrix) -> Result<Self> {
        eigvals_psd(&x)?;
        Ok(MatrixEnsemble::DeterministicPsd(x))
    }

    pub fn diagonal(models: Vec<FadingModel>) -> Result<Self> {
        if models.is_empty() {
            return Err(Error::Parameter("diagonal ensemble needs at least one entry".into()));
        }
        for m in &models {
            m.validate()?;
        }
        Ok(MatrixEnsemble::Diagonal(models))
    }

    /// Matrix dimension `n_t`.
    pub fn size(&self) -> usize {
        match self {
            MatrixEnsemble::Rayleigh { nt, .. } => *nt,
            MatrixEnsemble::Scaled { base, .. } | MatrixEnsemble::UnitaryConjugate { base, .. } => base.size(),
            MatrixEnsemble::DeterministicPsd(x) => x.size(),
            MatrixEnsemble::Diagonal(m) => m.len(),
        }
    }

    /// Read a deterministic PSD matrix: row-major `re,im` pairs separated by
    /// whitespace.
    pub fn from_matrix_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Input(format!("cannot read {}: {e}", path.display())))?;
        let entries = text
            .split_whitespace()
            .map(|tok| {
                let (re, im) = tok
                    .split_once(',')
                    .ok_or_else(|| Error::Input(format!("entry `{tok}` is not `re,im`")))?;
                let p = |s: &str| s.parse::<f64>().map_err(|_| Error::Input(format!("bad number `{s}` in `{tok}`")));
                Ok(Complex64::new(p(re)?, p(im)?))
            })
            .collect::<Result<Vec<_>>>()?;
        let n = (entries.len() as f64).sqrt().round() as usize;
        if n == 0 || n * n != entries.len() {
            return Err(Error::Input(format!("{} entries do not form a square matrix", entries.len())));
        }
        Self::deterministic(CMatrix::from_rows(n, entries)?)
    }

    fn prepare(&self) -> Result<Prepared> {
        Ok(match self {
            MatrixEnsemble::Diagonal(models) => {
                Prepared::Diagonal(models.iter().map(|m| m.sampler()).collect::<Result<Vec<Sampler>>>()?)
            }
            MatrixEnsemble::Scaled { base, c } => Prepared::Scaled(Box::new(base.prepare()?), *c),
            MatrixEnsemble::UnitaryConjugate { base, u } => {
                Prepared::Unitary(Box::new(base.prepare()?), u.clone(), u.adjoint())
            }
            MatrixEnsemble::Rayleigh { nr, nt, power } => Prepared::Rayleigh {
                nr: *nr,
                nt: *nt,
                sd: (power / 2.0).sqrt(),
            },
            MatrixEnsemble::DeterministicPsd(x) => Prepared::Fixed(x.clone()),
        })
    }

    /// One draw of the Gram matrix.
    pub fn sample_gram(&self, rng: &mut Stream) -> Result<CMatrix> {
        Ok(self.prepare()?.sample(rng))
    }
}

/// Sampling state with per-model samplers built once.
enum Prepared {
    Rayleigh { nr: usize, nt: usize, sd: f64 },
    Scaled(Box<Prepared>, f64),
    Unitary(Box<Prepared>, CMatrix, CMatrix),
    Fixed(CMatrix),
    Diagonal(Vec<Sampler>),
}

impl Prepared {
    fn sample(&self, rng: &mut Stream) -> CMatrix {
        match self {
            Prepared::Rayleigh { nr, nt, sd } => {
                let (nr, nt) = (*nr, *nt);
                let mut h = vec![Complex64::new(0.0, 0.0); nr * nt];
                for z in h.iter_mut() {
                    let re: f64 = rng.sample(StandardNormal);
                    let im: f64 = rng.sample(StandardNormal);
                    *z = Complex64::new(re * sd, im * sd);
                }
                let mut x = CMatrix::zeros(nt);
                for i in 0..nt {
                    for j in i..nt {
                        let mut acc = Complex64::new(0.0, 0.0);
                        for k in 0..nr {
                            acc += h[k * nt + i].conj() * h[k * nt + j];
                        }
                        x[(i, j)] = acc;
                        x[(j, i)] = acc.conj();
                    }
                    x[(i, i)] = Complex64::new(x[(i, i)].re, 0.0);
                }
                x
            }
            Prepared::Scaled(base, c) => base.sample(rng).scale(*c),
            Prepared::Unitary(base, u, uh) => u.mul(&base.sample(rng)).mul(uh),
            Prepared::Fixed(x) => x.clone(),
            Prepared::Diagonal(samplers) => {
                let v: Vec<f64> = samplers.iter().map(|s| s.sample(rng)).collect();
                CMatrix::diagonal(&v)
            }
        }
    }

    /// Ascending eigenvalues of one draw; `None` if the draw is rejected.
    fn sample_eigs(&self, rng: &mut Stream) -> Option<Vec<f64>> {
        if let Prepared::Diagonal(samplers) = self {
            let mut v: Vec<f64> = samplers.iter().map(|s| s.sample(rng)).collect();
            v.sort_by(f64::total_cmp);
            return Some(v);
        }
        eigvals_psd(&self.sample(rng)).ok()
    }
}

impl fmt::Display for MatrixEnsemble {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MatrixEnsemble::Rayleigh { nr, nt, power } => write!(f, "rayleigh:nr={nr},nt={nt},pow={power}"),
            MatrixEnsemble::Scaled { base, c } => write!(f, "scaled:c={c}({base})"),
            MatrixEnsemble::UnitaryConjugate { base, .. } => write!(f, "unitary({base})"),
            MatrixEnsemble::DeterministicPsd(x) => write!(f, "det:<{n}x{n} matrix>", n = x.size()),
            MatrixEnsemble::Diagonal(m) => {
                let parts: Vec<String> = m.iter().map(|x| x.to_string()).collect();
                write!(f, "diag({})", parts.join(";"))
            }
        }
    }
}

/// Split `head(inner)` into `head` and `inner`.
fn split_nested(s: &str) -> Option<(&str, &str)> {
    let open = s.find('(')?;
    let inner = s[open + 1..].strip_suffix(')')?;
    Some((&s[..open], inner))
}

fn key_values(s: &str) -> Result<Vec<(String, String)>> {
    s.split(',')
        .filter(|t| !t.is_empty())
        .map(|kv| {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::Parameter(format!("expected key=value, got `{kv}`")))?;
            Ok((k.trim().to_ascii_lowercase(), v.trim().to_string()))
        })
        .collect()
}

fn num<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::Parameter(format!("bad value `{v}` for `{key}`")))
}

impl FromStr for MatrixEnsemble {
    type Err = Error;
    /// `rayleigh:nr=2,nt=2,pow=1`, `scaled:c=2(<base>)`,
    /// `unitary:seed=7(<base>)` (Haar-distributed `U` from the seed),
    /// `diag(<model>;<model>;...)`, `det:<matrix file>`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(rest) = s.strip_prefix("rayleigh:") {
            let (mut nr, mut nt, mut pow) = (None, None, 1.0);
            for (k, v) in key_values(rest)? {
                match k.as_str() {
                    "nr" => nr = Some(num(&k, &v)?),
                    "nt" => nt = Some(num(&k, &v)?),
                    "pow" | "power" => pow = num(&k, &v)?,
                    other => return Err(Error::Parameter(format!("unknown rayleigh key `{other}`"))),
                }
            }
            let need = |x: Option<usize>, k: &str| x.ok_or_else(|| Error::Parameter(format!("rayleigh needs `{k}`")));
            return Self::rayleigh(need(nr, "nr")?, need(nt, "nt")?, pow);
        }
        if let Some(rest) = s.strip_prefix("det:") {
            return Self::from_matrix_file(Path::new(rest));
        }
        if let Some((head, inner)) = split_nested(s) {
            if head == "diag" {
                let models = inner
                    .split(';')
                    .map(|m| m.trim().parse())
                    .collect::<Result<Vec<FadingModel>>>()?;
                return Self::diagonal(models);
            }
            let (kind, args) = head.split_once(':').unwrap_or((head, ""));
            let kv = key_values(args)?;
            let get = |key: &str| kv.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str());
            let base: MatrixEnsemble = inner.parse()?;
            match kind {
                "scaled" => {
                    let c = get("c").ok_or_else(|| Error::Parameter("scaled needs `c`".into()))?;
                    return Self::scaled(base, num("c", c)?);
                }
                "unitary" => {
                    let seed = get("seed").map(|v| num("seed", v)).transpose()?.unwrap_or(0);
                    let u = haar_unitary(base.size(), seed);
                    return Self::unitary_conjugate(base, u);
                }
                _ => {}
            }
        }
        Err(Error::Parameter(format!(
            "unknown ensemble `{s}` (rayleigh:nr=..,nt=..,pow=.., scaled:c=..(<base>), unitary:seed=..(<base>), diag(<m>;<m>), det:<file>)"
        )))
    }
}

/// Haar-distributed unitary from a seed: Gram–Schmidt on a complex Gaussian
/// matrix.
pub fn haar_unitary(n: usize, seed: u64) -> CMatrix {
    let mut rng = mc::substream(seed, mc::purpose::ENSEMBLE_PARAM, 0);
    let mut cols: Vec<Vec<Complex64>> = (0..n)
        .map(|_| {
            (0..n)
                .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
                .collect()
        })
        .collect();
    for j in 0..n {
        for k in 0..j {
            let (done, rest) = cols.split_at_mut(j);
            let proj: Complex64 = done[k].iter().zip(&rest[0]).map(|(a, b)| a.conj() * b).sum();
            for (x, e) in rest[0].iter_mut().zip(&done[k]) {
                *x -= proj * e;
            }
        }
        let norm = cols[j].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        cols[j].iter_mut().for_each(|z| *z /= norm);
    }
    let mut u = CMatrix::zeros(n);
    for (j, col) in cols.iter().enumerate() {
        for (i, z) in col.iter().enumerate() {
            u[(i, j)] = *z;
        }
    }
    u
}

/// Ascending eigenvalues of a Hermitian PSD matrix.
///
/// Rejects inputs whose Hermitian defect exceeds `1e-10·max(1, ‖X‖)` or
/// whose smallest eigenvalue is below `−1e-10·max(1, ‖X‖)`; small negative
/// eigenvalues are clamped to zero. The residual `‖Xv − λv‖ ≤ 1e-9·‖X‖`
/// is verified for every pair.
pub fn eigvals_psd(x: &CMatrix) -> Result<Vec<f64>> {
    let norm = x.frobenius_norm();
    let scale = norm.max(1.0);
    if !norm.is_finite() {
        return Err(Error::Input("matrix has non-finite entries".into()));
    }
    let defect = x.hermitian_defect();
    if defect > PSD_TOL * scale {
        return Err(Error::Input(format!("matrix is not Hermitian (defect {defect:.2e})")));
    }
    let (mut vals, vecs) = linalg::hermitian_eigen(x)?;
    let residual = linalg::eigen_residual(x, &vals, &vecs);
    if residual > 1e-9 * norm.max(f64::MIN_POSITIVE) {
        return Err(Error::nonconvergence("eigvals_psd", format!("eigen residual {residual:.2e}")));
    }
    if vals.first().is_some_and(|&v| v < -PSD_TOL * scale) {
        return Err(Error::Input(format!("matrix is not PSD (eigenvalue {:.3e})", vals[0])));
    }
    vals.iter_mut().for_each(|v| *v = v.max(0.0));
    Ok(vals)
}

fn rejected(what: &'static str) -> Error {
    Error::nonconvergence(what, "a sampled matrix failed the Hermitian PSD eigen contract")
}

fn fill_logdet(eigs: Option<Vec<f64>>, rho_grid: &[f64], out: &mut [f64]) {
    match eigs {
        Some(l) => {
            for (o, &r) in out.iter_mut().zip(rho_grid) {
                *o = l.iter().map(|&v| (r * v).ln_1p()).sum();
            }
        }
        None => out.iter_mut().for_each(|o| *o = f64::NAN),
    }
}

fn check_rho_grid(rho_grid: &[f64]) -> Result<()> {
    if rho_grid.iter().any(|r| !(r.is_finite() && *r >= 0.0)) {
        return Err(Error::Parameter("SNR values must be finite and nonnegative".into()));
    }
    Ok(())
}

/// Monte Carlo `E[Σ ln(1 + ρλ_i)]`; eigenvalues are reused across the grid.
pub fn mimo_shannon(ens: &MatrixEnsemble, rho_grid: &[f64], cfg: McConfig) -> Result<CapacityCurve> {
    check_rho_grid(rho_grid)?;
    let prep = ens.prepare()?;
    let moments = cfg.estimate(mc::purpose::MIMO, rho_grid.len(), |rng, out| {
        fill_logdet(prep.sample_eigs(rng), rho_grid, out)
    });
    let curve = transform::curve_from_moments(rho_grid, &moments, cfg.n);
    if curve.values.iter().any(|v| !v.is_finite()) {
        return Err(rejected("mimo_shannon"));
    }
    Ok(curve)
}

/// Paired per-draw statistic of two ensembles on the same stream positions.
fn paired_mimo<F>(
    a: &MatrixEnsemble,
    b: &MatrixEnsemble,
    grid: &[f64],
    cfg: McConfig,
    stat: F,
) -> Result<transform::PairedCurves>
where
    F: Fn(Option<Vec<f64>>, &mut [f64]) + Sync,
{
    if a.size() != b.size() {
        return Err(Error::Size(format!("ensembles differ in size ({} vs {})", a.size(), b.size())));
    }
    check_rho_grid(grid)?;
    let (pa, pb) = (a.prepare()?, b.prepare()?);
    let p = transform::paired_estimate(
        grid,
        cfg,
        mc::purpose::MIMO,
        |rng, out| stat(pa.sample_eigs(rng), out),
        |rng, out| stat(pb.sample_eigs(rng), out),
    );
    if p.delta.iter().any(|v| !v.is_finite()) {
        return Err(rejected("paired_mimo"));
    }
    Ok(p)
}

/// How an `Equal` verdict was supported.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EqualityEvidence {
    /// Curves agree on the grid but the eigenvalue mixtures were not compared.
    CurvesOnly,
    /// Curves agree and the eigenvalue-mixture KS distance is within tolerance.
    CurvesAndMixture { ks: f64 },
    /// Curves agree but the mixtures differ by more than the tolerance.
    MixtureMismatch { ks: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct MimoOrder {
    pub comparison: CapacityComparison,
    /// Present when the curve verdict is `Equal`.
    pub equality: Option<EqualityEvidence>,
}

/// Paired log-det comparison of two ensembles. An `Equal` curve verdict is
/// followed by the eigenvalue-mixture KS test when `n ≥ 1000`.
pub fn mimo_capacity_order(
    a: &MatrixEnsemble,
    b: &MatrixEnsemble,
    grid: &SnrGrid,
    cfg: McConfig,
    tol: f64,
) -> Result<MimoOrder> {
    let p = paired_mimo(a, b, grid.linear(), cfg, |e, out| fill_logdet(e, grid.linear(), out))?;
    let mut comparison = ordering::compare_curves(p.x, p.y, p.delta, p.delta_ci, tol);
    let equality = if comparison.verdict.relation == Relation::Equal {
        let evidence = if cfg.n >= MIXTURE_MIN_DRAWS {
            let ks = ks_distance(&eig_cdf_mixture(a, cfg)?, &eig_cdf_mixture(b, cfg)?);
            if ks <= MIXTURE_KS_TOL {
                EqualityEvidence::CurvesAndMixture { ks }
            } else {
                EqualityEvidence::MixtureMismatch { ks }
            }
        } else {
            EqualityEvidence::CurvesOnly
        };
        comparison.verdict.notes.push(match evidence {
            EqualityEvidence::CurvesOnly => "Equal (curves only; eigenvalue mixtures not compared)".to_string(),
            EqualityEvidence::CurvesAndMixture { ks } => format!("Equal (curves and eigenvalue mixtures, KS={ks:.4})"),
            EqualityEvidence::MixtureMismatch { ks } => {
                format!("curves agree but eigenvalue mixtures differ (KS={ks:.4})")
            }
        });
        Some(evidence)
    } else {
        None
    };
    Ok(MimoOrder { comparison, equality })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceLtReport {
    /// `E[Tr e^{-ρX}]` and `E[Tr e^{-ρY}]` on the grid (paired draws).
    pub trace_a: Vec<f64>,
    pub trace_b: Vec<f64>,
    /// `E[Tr e^{-ρX}] − E[Tr e^{-ρY}]` and its 95% half-width.
    pub delta: Vec<f64>,
    pub delta_ci: Vec<f64>,
    /// The trace inequality holds at every grid point within `2·CI`.
    pub met: bool,
    pub capacity: OrderVerdict,
    /// `false` only if the sufficient condition is met but the capacity
    /// verdict contradicts it.
    pub consistent: bool,
}


/// Check the trace Laplace condition `E[Tr e^{-ρX}] ≥ E[Tr e^{-ρY}]` and
/// the capacity verdict it would imply.
pub fn trace_lt_check(
    a: &MatrixEnsemble,
    b: &MatrixEnsemble,
    grid: &SnrGrid,
    cfg: McConfig,
    tol: f64,
) -> Result<TraceLtReport> {
    let rho = grid.linear();
    let p = paired_mimo(a, b, rho, cfg, |e, out| match e {
        Some(l) => {
            for (o, &r) in out.iter_mut().zip(rho) {
                *o = l.iter().map(|&v| (-r * v).exp()).sum();
            }
        }
        None => out.iter_mut().for_each(|o| *o = f64::NAN),
    })?;
    // paired_estimate reports y − x; the condition is stated as x − y ≥ 0
    let delta: Vec<f64> = p.delta.iter().map(|d| -d).collect();
    let met = delta.iter().zip(&p.delta_ci).all(|(d, c)| *d >= -2.0 * c);
    let capacity = mimo_capacity_order(a, b, grid, cfg, tol)?.comparison.verdict;
    let consistent = !met || matches!(capacity.relation, Relation::FirstDominated | Relation::Equal);
    Ok(TraceLtReport {
        trace_a: p.x.values,
        trace_b: p.y.values,
        delta,
        delta_ci: p.delta_ci,
        met,
        capacity,
        consistent,
    })
}

/// Draw one uniformly chosen eigenvalue per matrix sample.
fn pooled_eigenvalues(ens: &MatrixEnsemble, cfg: McConfig) -> Result<Vec<f64>> {
    if cfg.n < MIXTURE_MIN_DRAWS {
        return Err(Error::Parameter(format!(
            "eigenvalue mixtures need at least {MIXTURE_MIN_DRAWS} draws, got {}",
            cfg.n
        )));
    }
    let prep = ens.prepare()?;
    let chunks = cfg.run_chunks(mc::purpose::MIMO, |rng, count| {
        (0..count)
            .map(|_| {
                let e = prep.sample_eigs(rng)?;
                let i = rng.random_range(0..e.len());
                Some(e[i])
            })
            .collect::<Option<Vec<f64>>>()
    });
    let mut all = Vec::with_capacity(cfg.n);
    for c in chunks {
        all.extend(c.ok_or_else(|| rejected("eig_cdf_mixture"))?);
    }
    Ok(all)
}

/// Empirical CDF of a uniformly picked eigenvalue, which estimates
/// `n_t⁻¹ Σ_i F_{λ_i}`.
pub fn eig_cdf_mixture(ens: &MatrixEnsemble, cfg: McConfig) -> Result<EmpiricalSamples> {
    EmpiricalSamples::new(pooled_eigenvalues(ens, cfg)?)
}

/// Two-sample Kolmogorov–Smirnov distance.
pub fn ks_distance(a: &EmpiricalSamples, b: &EmpiricalSamples) -> f64 {
    let (x, y) = (a.values(), b.values());
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < x.len() && j < y.len() {
        let t = x[i].min(y[j]);
        while i < x.len() && x[i] <= t {
            i += 1;
        }
        while j < y.len() && y[j] <= t {
            j += 1;
        }
        d = d.max((i as f64 / x.len() as f64 - j as f64 / y.len() as f64).abs());
    }
    d
}

/// Scalar model of a uniformly picked eigenvalue, so that
/// `n_t · C_scalar(ρ) = C_MIMO(ρ)` up to Monte Carlo error.
pub fn uniform_eig_model(ens: &MatrixEnsemble, cfg: McConfig) -> Result<FadingModel> {
    FadingModel::empirical(pooled_eigenvalues(ens, cfg)?)
}

/// Per-subset `E[ln det(I + ρ Σ_S X_i)]` with all subsets sharing each draw.
pub fn mimo_mac_region(users: &[MatrixEnsemble], rho: f64, cfg: McConfig) -> Result<MacRegion> {
    let m = users.len();
    if m == 0 || m > MIMO_MAC_MAX_USERS {
        return Err(Error::Size(format!("MIMO MAC supports 1..={MIMO_MAC_MAX_USERS} users, got {m}")));
    }
    let size = users[0].size();
    if users.iter().any(|u| u.size() != size) {
        return Err(Error::Size("MIMO MAC users must share one matrix size".into()));
    }
    check_rho_grid(&[rho])?;
    let preps = users.iter().map(|u| u.prepare()).collect::<Result<Vec<_>>>()?;
    let region = composite::region_from_sums(m, rho, cfg, mc::purpose::MAC, |rng, out| {
        let grams: Vec<CMatrix> = preps.iter().map(|p| p.sample(rng)).collect();
        for (i, o) in out.iter_mut().enumerate() {
            let mask = i + 1;
            let mut sum = CMatrix::zeros(size);
            for (b, g) in grams.iter().enumerate() {
                if mask >> b & 1 == 1 {
                    sum = sum.add(g);
                }
            }
            *o = linalg::cholesky_logdet(&sum.shifted_identity(rho)).unwrap_or(f64::NAN);
        }
    });
    if region.constraints.iter().any(|c| !c.value.is_finite()) {
        return Err(rejected("mimo_mac_region"));
    }
    Ok(region)
}

/// `|ln det(I + ρX) − Σ ln(1 + ρλ_i)|` with the determinant from LU.
pub fn logdet_identity_gap(x: &CMatrix, rho: f64) -> Result<f64> {
    let eig: f64 = eigvals_psd(x)?.iter().map(|&l| (rho * l).ln_1p()).sum();
    let det = linalg::lu_determinant(&x.shifted_identity(rho));
    Ok((det.re.ln() - eig).abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(n: usize) -> McConfig {
        McConfig::new(n, 3).unwrap()
    }

    #[test]
    fn parse_literals() {
        let e: MatrixEnsemble = "rayleigh:nr=2,nt=2".parse().unwrap();
        assert_eq!(e, MatrixEnsemble::rayleigh(2, 2, 1.0).unwrap());
        let s: MatrixEnsemble = "scaled:c=2(rayleigh:nr=4,nt=2,pow=0.5)".parse().unwrap();
        assert_eq!(s.size(), 2);
        assert!(matches!(s, MatrixEnsemble::Scaled { c, .. } if c == 2.0));
        let u: MatrixEnsemble = "unitary:seed=5(rayleigh:nr=3,nt=3)".parse().unwrap();
        assert_eq!(u.size(), 3);
        let d: MatrixEnsemble = "diag(pareto:beta=1;pareto:beta=1)".parse().unwrap();
        assert_eq!(d.size(), 2);
        assert!("rayleigh:nr=2".parse::<MatrixEnsemble>().is_err());
        assert!("wishart:n=2".parse::<MatrixEnsemble>().is_err());
    }

    #[test]
    fn deterministic_identity_curve() {
        let e = MatrixEnsemble::deterministic(CMatrix::identity(2)).unwrap();
        assert_eq!(e.sample_gram(&mut mc::substream(1, 0, 0)).unwrap(), CMatrix::identity(2));
        let grid = [0.0, 1.0, 10.0];
        let c = mimo_shannon(&e, &grid, cfg(100)).unwrap();
        for (r, v) in grid.iter().zip(&c.values) {
            assert!((v - 2.0 * r.ln_1p()).abs() < 1e-14);
        }
    }

    #[test]
    fn eigvals_contract() {
        assert_eq!(eigvals_psd(&CMatrix::diagonal(&[3.0, 1.0, 2.0])).unwrap(), vec![1.0, 2.0, 3.0]);
        assert_eq!(eigvals_psd(&CMatrix::diagonal(&[-1e-12, 1.0])).unwrap(), vec![0.0, 1.0]);
        assert!(eigvals_psd(&CMatrix::diagonal(&[-1e-3, 1.0])).is_err());
        let mut nh = CMatrix::identity(2);
        nh[(0, 1)] = Complex64::new(0.5, 0.0);
        assert!(eigvals_psd(&nh).is_err());
    }

    #[test]
    fn scaled_draw_is_twice_the_base_draw() {
        let base = MatrixEnsemble::rayleigh(3, 2, 1.0).unwrap();
        let scaled = MatrixEnsemble::scaled(base.clone(), 2.0).unwrap();
        let a = base.sample_gram(&mut mc::substream(9, 0, 0)).unwrap();
        let b = scaled.sample_gram(&mut mc::substream(9, 0, 0)).unwrap();
        assert_eq!(a.scale(2.0), b);
    }

    #[test]
    fn haar_unitary_is_unitary() {
        let u = haar_unitary(4, 17);
        let d = u.adjoint().mul(&u).add(&CMatrix::identity(4).scale(-1.0)).frobenius_norm();
        assert!(d < 1e-12);
    }

    #[test]
    fn ks_distance_basics() {
        let a = EmpiricalSamples::new(vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let b = EmpiricalSamples::new(vec![3.0, 4.0, 5.0, 6.0]).unwrap();
        assert_eq!(ks_distance(&a, &a), 0.0);
        assert_eq!(ks_distance(&a, &b), 0.5);
    }

    #[test]
    fn mixture_of_fixed_diag_is_two_steps() {
        let e = MatrixEnsemble::deterministic(CMatrix::diagonal(&[1.0, 2.0])).unwrap();
        let s = eig_cdf_mixture(&e, cfg(4000)).unwrap();
        assert_eq!(s.cdf(0.99), 0.0);
        assert!((s.cdf(1.0) - 0.5).abs() < 0.03);
        assert!((s.cdf(1.99) - 0.5).abs() < 0.03);
        assert_eq!(s.cdf(2.0), 1.0);
        assert!(eig_cdf_mixture(&e, cfg(999)).is_err());
    }

    #[test]
    fn mac_two_identity_users() {
        let i2 = MatrixEnsemble::deterministic(CMatrix::identity(2)).unwrap();
        let r = mimo_mac_region(&[i2.clone(), i2], 3.0, cfg(100)).unwrap();
        assert!((r.full_set().value - 2.0 * 7f64.ln()).abs() < 1e-12);
        assert!((r.constraints[0].value - 2.0 * 4f64.ln()).abs() < 1e-12);
    }
}
