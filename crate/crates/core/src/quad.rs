//! Adaptive Gauss–Kronrod (G10/K21) quadrature.
//!
//! Finite ranges are bisected globally, worst segment first. Half-infinite
//! ranges `[c, ∞)` are mapped onto `s ∈ (0, 1]` with `x = c / s`, which is
//! the `x = t/(1 − t)` substitution written around the tail endpoint so that
//! segments close to `s = 0` keep full floating-point resolution. This lets
//! power-law tails be bisected far enough to converge.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::{Error, Result};

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_7,
    0.973_906_528_517_171_720_1,
    0.930_157_491_355_708_226_0,
    0.865_063_366_688_984_510_7,
    0.780_817_726_586_416_897_1,
    0.679_409_568_299_024_406_2,
    0.562_757_134_668_604_683_3,
    0.433_395_394_129_247_190_8,
    0.294_392_862_701_460_198_1,
    0.148_874_338_981_631_210_9,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_28,
    0.032_558_162_307_964_727_48,
    0.054_755_896_574_351_996_03,
    0.075_039_674_810_919_952_77,
    0.093_125_454_583_697_605_54,
    0.109_387_158_802_297_641_9,
    0.123_491_976_262_065_851_1,
    0.134_709_217_311_473_325_9,
    0.142_775_938_577_060_080_8,
    0.147_739_104_901_338_491_4,
    0.149_445_554_002_916_905_7,
];

// Gauss weights for the odd-indexed Kronrod nodes.
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_59,
    0.149_451_349_150_580_593_1,
    0.219_086_362_515_982_044_0,
    0.269_266_719_309_996_355_1,
    0.295_524_224_714_752_870_2,
];

const GEOMETRIC_STEP: f64 = 16.0;

/// Convergence target: stop once the error estimate is below
/// `max(abs, rel·|I|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_segments: usize,
}

impl Tolerance {
    pub fn abs(abs: f64) -> Self {
        Tolerance {
            abs,
            rel: 0.0,
            max_segments: 4000,
        }
    }

    pub fn with_rel(mut self, rel: f64) -> Self {
        self.rel = rel;
        self
    }

    pub fn with_max_segments(mut self, n: usize) -> Self {
        self.max_segments = n;
        self
    }

    fn halve(self) -> Self {
        Tolerance {
            abs: 0.5 * self.abs,
            ..self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

impl std::ops::Add for Estimate {
    type Output = Estimate;
    fn add(self, o: Estimate) -> Estimate {
        Estimate {
            value: self.value + o.value,
            error: self.error + o.error,
            evaluations: self.evaluations + o.evaluations,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn rescale_error(err: f64, resabs: f64, resasc: f64) -> f64 {
    let mut err = err.abs();
    if resasc != 0.0 && err != 0.0 {
        let scale = (200.0 * err / resasc).powf(1.5);
        err = if scale < 1.0 { resasc * scale } else { resasc };
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * resabs);
    }
    err
}

fn kronrod21<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Result<(Segment, f64)> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];

    let fc = f(center);
    check_value(fc, center)?;
    let mut res_k = WGK[10] * fc;
    let mut res_g = 0.0;
    let mut resabs = res_k.abs();
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        check_value(f1, center - dx)?;
        check_value(f2, center + dx)?;
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        resabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut resasc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        resasc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let scale = half.abs();
    let err = rescale_error((res_k - res_g) * half, resabs * scale, resasc * scale);
    Ok((
        Segment {
            a,
            b,
            value: res_k * half,
            error: err,
        },
        resabs * scale,
    ))
}

fn check_value(v: f64, x: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::nonconvergence(
            "quadrature",
            format!("integrand is {v} at x = {x}"),
        ))
    }
}

/// Adaptive quadrature of `f` over the finite interval `[a, b]`.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: Tolerance) -> Result<Estimate> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Input(format!("finite bounds required, got [{a}, {b}]")));
    }
    if a == b {
        return Ok(Estimate {
            value: 0.0,
            error: 0.0,
            evaluations: 0,
        });
    }
    let (first, first_abs) = kronrod21(&mut f, a, b)?;
    let mut evaluations = 21;
    let mut total = first.value;
    let mut total_err = first.error;
    let mut total_abs = first_abs;
    let mut heap = BinaryHeap::new();
    heap.push(first);

    loop {
        if !(total.is_finite() && total_err.is_finite()) {
            return Err(Error::nonconvergence(
                "quadrature",
                format!("estimate on [{a}, {b}] overflowed ({total}, error {total_err})"),
            ));
        }
        let target = tol.abs.max(tol.rel * total.abs());
        let roundoff_floor = 100.0 * f64::EPSILON * total_abs;
        if total_err <= target || total_err <= roundoff_floor {
            break;
        }
        if heap.len() >= tol.max_segments {
            return Err(Error::nonconvergence(
                "quadrature",
                format!(
                    "{} segments on [{a}, {b}] left error {total_err:.3e} above target {target:.3e}",
                    heap.len()
                ),
            ));
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a.min(worst.b) || mid >= worst.a.max(worst.b) {
            return Err(Error::nonconvergence(
                "quadrature",
                format!("cannot bisect segment near x = {mid}; error {total_err:.3e}"),
            ));
        }
        let (left, left_abs) = kronrod21(&mut f, worst.a, mid)?;
        let (right, right_abs) = kronrod21(&mut f, mid, worst.b)?;
        evaluations += 42;
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        total_abs += left_abs + right_abs;
        heap.push(left);
        heap.push(right);
    }
    // re-sum to shed the drift of incremental updates
    let value: f64 = heap.iter().map(|s| s.value).sum();
    let error: f64 = heap.iter().map(|s| s.error).sum();
    Ok(Estimate {
        value,
        error,
        evaluations,
    })
}

/// `∫_c^∞ f(x) dx` for `c > 0` via `x = c/s`, `dx = c/s² ds`, `s ∈ (0, 1]`.
pub fn integrate_tail<F: FnMut(f64) -> f64>(mut f: F, c: f64, tol: Tolerance) -> Result<Estimate> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::Input(format!("tail start must be positive, got {c}")));
    }
    integrate(
        |s| {
            let x = c / s;
            let v = f(x);
            if v == 0.0 {
                0.0
            } else {
                v * (c / s) / s
            }
        },
        0.0,
        1.0,
        tol,
    )
}

/// `∫_0^∞ f(x) dx`, split at `x = 1`; half the absolute budget goes to each piece.
pub fn integrate_half_line<F: FnMut(f64) -> f64>(f: F, tol: Tolerance) -> Result<Estimate> {
    integrate_half_line_split(f, &[], tol)
}

/// `∫_0^∞ f(x) dx` with extra breakpoints (kinks, jumps, scale changes).
///
/// The finite part `[0, c]` runs up to `c = max(1, last breakpoint)` and is
/// cut at each breakpoint; the tail `[c, ∞)` is mapped.
pub fn integrate_half_line_split<F: FnMut(f64) -> f64>(
    mut f: F,
    breaks: &[f64],
    tol: Tolerance,
) -> Result<Estimate> {
    let mut cuts: Vec<f64> = breaks
        .iter()
        .copied()
        .filter(|b| b.is_finite() && *b > 0.0)
        .collect();
    cuts.push(1.0);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    // keep every finite piece within a factor GEOMETRIC_STEP in scale so that
    // a feature of width ~lo at its left end is seen by the first rule
    let mut refined = Vec::with_capacity(cuts.len());
    let mut prev: Option<f64> = None;
    for &cut in &cuts {
        if let Some(mut lo) = prev {
            while cut / lo > GEOMETRIC_STEP {
                lo *= GEOMETRIC_STEP;
                refined.push(lo);
            }
        }
        refined.push(cut);
        prev = Some(cut);
    }
    let cuts = refined;
    let c = *cuts.last().expect("contains 1.0");

    let half = tol.halve();
    let pieces = cuts.len();
    let piece_tol = Tolerance {
        abs: half.abs / pieces as f64,
        ..half
    };
    let mut acc = Estimate {
        value: 0.0,
        error: 0.0,
        evaluations: 0,
    };
    let mut lo = 0.0;
    for &hi in &cuts {
        acc = acc + integrate(&mut f, lo, hi, piece_tol)?;
        lo = hi;
    }
    Ok(acc + integrate_tail(&mut f, c, half)?)
}
