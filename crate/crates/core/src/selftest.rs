//! Fast invariant suites run by `capord selftest`.
//!
//! Each check returns a short detail string on success or a witness on
//! failure. The full set finishes in well under a minute on one core.

use std::fmt;
use std::time::{Duration, Instant};

use rand::Rng;

use crate::calculus::{self, Combiner};
use crate::composite::{self, LinkSet, Scheme};
use crate::mc::{self, McConfig};
use crate::mimo::{self, MatrixEnsemble};
use crate::models::FadingModel;
use crate::ordering::{self, Relation, SnrGrid, DEFAULT_TOL};
use crate::specfun;
use crate::transform::{self, Engine};
use crate::{Error, Result};

pub const SUITES: [&str; 6] = ["specfun", "transform", "ordering", "calculus", "composite", "mimo"];

type Outcome = std::result::Result<String, String>;

#[derive(Debug, Clone)]
pub struct CheckResult {
    pub suite: &'static str,
    pub name: &'static str,
    /// `Ok(detail)` or `Err(witness)`.
    pub outcome: Outcome,
    pub elapsed: Duration,
}

impl CheckResult {
    pub fn passed(&self) -> bool {
        self.outcome.is_ok()
    }
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (tag, text) = match &self.outcome {
            Ok(d) => ("PASS", d),
            Err(w) => ("FAIL", w),
        };
        write!(
            f,
            "{tag} {}::{} ({:.2}s) {text}",
            self.suite,
            self.name,
            self.elapsed.as_secs_f64()
        )
    }
}

fn fail<E: fmt::Display>(e: E) -> String {
    e.to_string()
}

fn ensure(cond: bool, ok: String, witness: impl FnOnce() -> String) -> Outcome {
    if cond {
        Ok(ok)
    } else {
        Err(witness())
    }
}

fn unit_mean_models() -> Vec<FadingModel> {
    let mut v: Vec<FadingModel> = [0.5, 1.0, 2.0, 4.0]
        .iter()
        .map(|&m| FadingModel::nakagami(m).expect("valid"))
        .collect();
    v.extend([1.0, 5.0].iter().map(|&k| FadingModel::rician(k).expect("valid")));
    v.extend([0.3, 0.7].iter().map(|&q| FadingModel::hoyt(q).expect("valid")));
    v
}

fn specfun_checks() -> Vec<(&'static str, fn() -> Outcome)> {
    vec![
        ("e1_at_one", || {
            let v = specfun::expint_e1(1.0).map_err(fail)?;
            let want = 0.219_383_934_395_520_3;
            ensure((v - want).abs() < 1e-14, format!("E1(1)={v:.15}"), || format!("E1(1)={v} want {want}"))
        }),
        ("gamma_p_shape_one", || {
            for x in [0.1, 1.0, 7.5] {
                let v = specfun::gamma_p(1.0, x).map_err(fail)?;
                if (v + (-x).exp_m1()).abs() > 1e-14 {
                    return Err(format!("P(1,{x})={v}"));
                }
            }
            Ok("P(1,x)=1-e^-x".into())
        }),
        ("marcum_zero_los", || {
            for b in [0.5, 1.0, 3.0] {
                let v = specfun::marcum_q1(0.0, b).map_err(fail)?;
                if (v - (-b * b / 2.0).exp()).abs() > 1e-13 {
                    return Err(format!("Q1(0,{b})={v}"));
                }
            }
            Ok("Q1(0,b)=exp(-b^2/2)".into())
        }),
        ("i0e_large_argument", || {
            let x = 50.0;
            let v = specfun::bessel_i0_scaled(x).map_err(fail)?;
            let s = 1.0 / (2.0 * std::f64::consts::PI * x).sqrt();
            let four = s * (1.0 + 1.0 / (8.0 * x) + 9.0 / (128.0 * x * x) + 225.0 / (3072.0 * x.powi(3)));
            ensure((v - four).abs() < 1e-7, format!("i0e(50)={v:.12}"), || format!("i0e(50)={v} vs {four}"))
        }),
    ]
}

fn transform_checks() -> Vec<(&'static str, fn() -> Outcome)> {
    vec![
        ("rayleigh_closed_form", || {
            let exp = FadingModel::exponential();
            for rho in [0.1, 1.0, 10.0, 100.0] {
                let want = specfun::expint_e1_scaled(1.0 / rho).map_err(fail)?;
                for e in Engine::DETERMINISTIC {
                    let got = transform::shannon(&exp, rho, e).map_err(fail)?;
                    if (got - want).abs() > 1e-6 {
                        return Err(format!("{e} at rho={rho}: {got} vs {want}"));
                    }
                }
            }
            Ok("three engines within 1e-6 of e^{1/rho}E1(1/rho)".into())
        }),
        ("cross_engine_agreement", || {
            let grid = SnrGrid::range_db(-10.0, 5.0, 30.0, false).map_err(fail)?;
            let mut models = unit_mean_models();
            models.push(FadingModel::pareto(3.0).map_err(fail)?);
            let mut worst: f64 = 0.0;
            for m in &models {
                let curves: Vec<_> = Engine::DETERMINISTIC
                    .iter()
                    .map(|&e| transform::curve(m, grid.linear(), e, None))
                    .collect::<Result<_>>()
                    .map_err(fail)?;
                for i in 0..grid.len() {
                    let vals: Vec<f64> = curves.iter().map(|c| c.values[i]).collect();
                    let spread = vals.iter().cloned().fold(f64::MIN, f64::max) - vals.iter().cloned().fold(f64::MAX, f64::min);
                    if spread > 1e-5 {
                        return Err(format!("{m} at rho={}: spread {spread:.3e}", grid.linear()[i]));
                    }
                    worst = worst.max(spread);
                }
            }
            Ok(format!("worst spread {worst:.2e}"))
        }),
        ("awgn_bound", || {
            for m in unit_mean_models() {
                let c = transform::shannon(&m, 10.0, Engine::Stieltjes).map_err(fail)?;
                let gap = 11f64.ln() - c;
                if gap < 1e-4 {
                    return Err(format!("{m}: gap {gap:.3e} at rho=10"));
                }
            }
            Ok("every unit-mean model below ln(1+rho) by >= 1e-4 at rho=10".into())
        }),
    ]
}

fn ordering_checks() -> Vec<(&'static str, fn() -> Outcome)> {
    vec![
        ("nakagami_pair", || {
            let (x, y) = (FadingModel::nakagami(0.5).map_err(fail)?, FadingModel::nakagami(2.0).map_err(fail)?);
            let r = ordering::check_s3(&x, &y, &SnrGrid::default(), &ordering::default_u_grid(), Engine::Laplace, DEFAULT_TOL, None)
                .map_err(fail)?;
            ensure(
                r.capacity.relation == Relation::FirstDominated && r.lt.relation == Relation::FirstDominated,
                format!("capacity {} / lt {} / s3 {}", r.capacity.relation, r.lt.relation, r.status),
                || format!("capacity {} lt {}", r.capacity, r.lt),
            )
        }),
        ("los_monotone_families", || {
            let g = SnrGrid::default();
            let fams: [(&str, &[f64], fn(f64) -> Result<FadingModel>); 3] = [
                ("nakagami", &[0.5, 1.0, 2.0, 4.0], FadingModel::nakagami),
                ("rician", &[0.0, 1.0, 5.0], FadingModel::rician),
                ("hoyt", &[0.3, 0.7, 1.0], FadingModel::hoyt),
            ];
            for (name, ps, make) in fams {
                for w in ps.windows(2) {
                    let v = ordering::capacity_order(&make(w[0]).map_err(fail)?, &make(w[1]).map_err(fail)?, &g, Engine::Laplace, DEFAULT_TOL, None)
                        .map_err(fail)?;
                    if v.relation != Relation::FirstDominated {
                        return Err(format!("{name} {} vs {}: {v}", w[0], w[1]));
                    }
                }
            }
            Ok("adjacent pairs FirstDominated".into())
        }),
        ("reflexive", || {
            let r = FadingModel::rician(3.0).map_err(fail)?;
            let v = ordering::capacity_order(&r, &r, &SnrGrid::default(), Engine::Stieltjes, DEFAULT_TOL, None).map_err(fail)?;
            ensure(v.relation == Relation::Equal, v.to_string(), || v.to_string())
        }),
    ]
}

fn calculus_checks() -> Vec<(&'static str, fn() -> Outcome)> {
    vec![
        ("frullani", || {
            let mut worst: f64 = 0.0;
            for i in 0..20 {
                let x = 10f64.powf(-2.0 + 5.0 * i as f64 / 19.0);
                let err = (calculus::frullani_capacity(x).map_err(fail)? - x.ln_1p()).abs();
                if err > 1e-8 {
                    return Err(format!("x={x}: error {err:.3e}"));
                }
                worst = worst.max(err);
            }
            Ok(format!("worst error {worst:.2e}"))
        }),
        ("cm_laplace_transforms", || {
            let mut models = unit_mean_models();
            models.extend([FadingModel::pareto(1.0).map_err(fail)?, FadingModel::pareto(3.0).map_err(fail)?]);
            let pts = [0.05, 0.5, 2.0, 10.0];
            for m in &models {
                let o = calculus::cm_check(|u| m.laplace(u), &pts, 4, None).map_err(fail)?;
                if !o.passed() {
                    return Err(format!("{m}: {o}"));
                }
            }
            Ok(format!("{} transforms completely monotone to order 4", models.len()))
        }),
        ("cm_rejects_sine", || {
            let o = calculus::cm_check(|x| Ok(x.sin() + 2.0), &[1.0, 2.0, 3.0], 2, None).map_err(fail)?;
            ensure(!o.passed(), o.to_string(), || "sin(x)+2 passed".into())
        }),
        ("combiner_ratios", || {
            for (c, k) in [(Combiner::Mrc, 0.0), (Combiner::Egc, 0.0), (Combiner::Mrc, 3.0), (Combiner::Egc, 4.0)] {
                let r = calculus::ctbf_ratio_check(c, k, &[0.5, 1.0, 2.0, 8.0]).map_err(fail)?;
                if !r.passed {
                    return Err(format!("{c} k={k}: {r:?}"));
                }
            }
            Ok("g'/g closed forms match".into())
        }),
    ]
}

fn composite_checks() -> Vec<(&'static str, fn() -> Outcome)> {
    vec![
        ("pointwise_bounds", || {
            let mut rng = mc::substream(1, mc::purpose::COMPOSITE, 99);
            for _ in 0..100_000 {
                let m = rng.random_range(1..6);
                let x: Vec<f64> = (0..m).map(|_| rng.random::<f64>() * 10.0).collect();
                let rho = 10f64.powf(rng.random_range(-2.0..3.0));
                let (mrc, egc) = (composite::mrc_power(&x), composite::egc_power(&x));
                if egc > mrc * (1.0 + 1e-12) {
                    return Err(format!("egc {egc} > mrc {mrc} for {x:?}"));
                }
                let min = x.iter().cloned().fold(f64::INFINITY, f64::min);
                let g = composite::mhaf_snr(&x, rho);
                if g > rho * min * (1.0 + 1e-12) {
                    return Err(format!("mhaf {g} > rho*min {} for {x:?}", rho * min));
                }
            }
            Ok("egc <= mrc and mhaf <= rho*min on 1e5 vectors".into())
        }),
        ("mrc_nakagami_order", || {
            let lx = LinkSet::iid(FadingModel::nakagami(0.5).map_err(fail)?, 2).map_err(fail)?;
            let ly = LinkSet::iid(FadingModel::nakagami(2.0).map_err(fail)?, 2).map_err(fail)?;
            let g = SnrGrid::range_db(-10.0, 5.0, 30.0, false).map_err(fail)?;
            let cfg = McConfig::new(20_000, 1).map_err(fail)?;
            let c = composite::compare_composite(Scheme::Mrc, &lx, &ly, &g, cfg, DEFAULT_TOL).map_err(fail)?;
            ensure(c.verdict.relation == Relation::FirstDominated, c.verdict.to_string(), || c.verdict.to_string())
        }),
        ("mac_monotone", || {
            let l = LinkSet::iid(FadingModel::nakagami(0.5).map_err(fail)?, 3).map_err(fail)?;
            let r = composite::mac_region(&l, 10.0, McConfig::new(20_000, 1).map_err(fail)?).map_err(fail)?;
            let v = r.monotonicity_violation();
            ensure(v <= 0.0, "subset constraints monotone".into(), || format!("violation {v:.3e}"))
        }),
    ]
}

fn mimo_checks() -> Vec<(&'static str, fn() -> Outcome)> {
    vec![
        ("logdet_identity", || {
            let ens = MatrixEnsemble::rayleigh(3, 3, 1.0).map_err(fail)?;
            let mut rng = mc::substream(2, mc::purpose::MIMO, 0);
            let mut worst: f64 = 0.0;
            for _ in 0..1000 {
                let x = ens.sample_gram(&mut rng).map_err(fail)?;
                for rho in [0.1, 1.0, 100.0] {
                    worst = worst.max(mimo::logdet_identity_gap(&x, rho).map_err(fail)?);
                }
            }
            ensure(worst <= 1e-8, format!("worst gap {worst:.2e}"), || format!("gap {worst:.3e}"))
        }),
        ("unitary_invariance", || {
            let base = MatrixEnsemble::rayleigh(2, 2, 1.0).map_err(fail)?;
            let u = MatrixEnsemble::unitary_conjugate(base.clone(), mimo::haar_unitary(2, 1)).map_err(fail)?;
            let cfg = McConfig::new(5_000, 1).map_err(fail)?;
            let o = mimo::mimo_capacity_order(&base, &u, &SnrGrid::default(), cfg, DEFAULT_TOL).map_err(fail)?;
            ensure(
                matches!(o.equality, Some(mimo::EqualityEvidence::CurvesAndMixture { .. })),
                o.comparison.verdict.notes.join("; "),
                || o.comparison.verdict.to_string(),
            )
        }),
        ("scaling_order", || {
            let base = MatrixEnsemble::rayleigh(2, 2, 1.0).map_err(fail)?;
            let s = MatrixEnsemble::scaled(base.clone(), 2.0).map_err(fail)?;
            let cfg = McConfig::new(5_000, 1).map_err(fail)?;
            let o = mimo::mimo_capacity_order(&base, &s, &SnrGrid::default(), cfg, DEFAULT_TOL).map_err(fail)?;
            let v = &o.comparison.verdict;
            ensure(v.relation == Relation::FirstDominated, v.to_string(), || v.to_string())
        }),
    ]
}

fn checks(suite: &str) -> Option<Vec<(&'static str, fn() -> Outcome)>> {
    Some(match suite {
        "specfun" => specfun_checks(),
        "transform" => transform_checks(),
        "ordering" => ordering_checks(),
        "calculus" => calculus_checks(),
        "composite" => composite_checks(),
        "mimo" => mimo_checks(),
        _ => return None,
    })
}

/// Run one suite, or all of them, reporting each check as it finishes.
pub fn run(suite: Option<&str>, mut report: impl FnMut(&CheckResult)) -> Result<Vec<CheckResult>> {
    let names: Vec<&'static str> = match suite {
        None => SUITES.to_vec(),
        Some(s) => vec![*SUITES.iter().find(|n| **n == s).ok_or_else(|| {
            Error::Parameter(format!("unknown selftest suite `{s}` (one of {})", SUITES.join(", ")))
        })?],
    };
    let mut results = Vec::new();
    for name in names {
        for (check, f) in checks(name).expect("listed suite") {
            let t = Instant::now();
            let outcome = f();
            let r = CheckResult {
                suite: name,
                name: check,
                outcome,
                elapsed: t.elapsed(),
            };
            report(&r);
            results.push(r);
        }
    }
    Ok(results)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_suite_is_a_parameter_error() {
        assert!(matches!(run(Some("nope"), |_| {}), Err(Error::Parameter(_))));
    }

    #[test]
    fn fast_suites_pass() {
        for s in ["specfun", "calculus"] {
            let r = run(Some(s), |_| {}).unwrap();
            assert!(r.iter().all(|c| c.passed()), "{:?}", r);
        }
    }
}
