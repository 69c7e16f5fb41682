//! Special functions and fading models against independently computed values.

use capord::mc::{purpose, substream};
use capord::models::Mean;
use capord::specfun;
use capord::transform::{exists_shannon, Existence};
use capord::FadingModel;

// Reference values from scipy.special / scipy.stats (ncx2 survival function
// for Marcum Q1(a, b) = sf(b², 2, a²)).
const E1_ONE: f64 = 0.219_383_934_395_520_5;
const Q1_ONE_ONE: f64 = 0.732_879_803_796_820_3;
const Q1_TWO_THREE: f64 = 0.214_362_088_162_649_43;
const I0E_THREE: f64 = 0.243_000_354_161_825_36;

#[test]
fn reference_values() {
    assert!((specfun::expint_e1(1.0).unwrap() - E1_ONE).abs() < 1e-14);
    assert!((specfun::marcum_q1(1.0, 1.0).unwrap() - Q1_ONE_ONE).abs() < 1e-12);
    assert!((specfun::marcum_q1(2.0, 3.0).unwrap() - Q1_TWO_THREE).abs() < 1e-12);
    assert!((specfun::bessel_i0_scaled(3.0).unwrap() - I0E_THREE).abs() < 1e-14);
}

#[test]
fn nakagami_two_cdf_closed_form() {
    let m = FadingModel::nakagami(2.0).unwrap();
    for x in [0.01f64, 0.3, 1.0, 2.5, 8.0] {
        let want = 1.0 - (-2.0 * x).exp() * (1.0 + 2.0 * x);
        assert!((m.cdf(x).unwrap() - want).abs() < 1e-13, "x={x}");
    }
}

#[test]
fn hoyt_laplace_product_form() {
    for q in [0.3f64, 0.5, 1.0] {
        let m = FadingModel::hoyt(q).unwrap();
        let (s1, s2) = (1.0 / (1.0 + q * q), q * q / (1.0 + q * q));
        for u in [0.1, 1.0, 10.0, 300.0] {
            let want = 1.0 / ((1.0 + 2.0 * u * s1) * (1.0 + 2.0 * u * s2)).sqrt();
            let got = m.laplace(u).unwrap();
            assert!((got - want).abs() < 1e-9 * want.max(1e-3), "q={q} u={u}: {got} vs {want}");
        }
    }
}

#[test]
fn unit_mean_families() {
    for m in [
        FadingModel::nakagami(0.5).unwrap(),
        FadingModel::rician(3.0).unwrap(),
        FadingModel::hoyt(0.4).unwrap(),
        FadingModel::exponential(),
    ] {
        assert!((m.mean().finite().unwrap() - 1.0).abs() < 1e-9, "{m}");
    }
    assert!(matches!(FadingModel::pareto(1.0).unwrap().mean(), Mean::Infinite));
}

#[test]
fn pareto_shannon_transform_exists() {
    for beta in [1.0, 3.0] {
        let e = exists_shannon(&FadingModel::pareto(beta).unwrap());
        assert!(matches!(e, Existence::Finite { .. }), "beta={beta}: {e:?}");
    }
}

fn ks_against_cdf(model: &FadingModel, n: usize, seed: u64) -> f64 {
    let mut rng = substream(seed, purpose::SCALAR, 0);
    let mut xs: Vec<f64> = (0..n).map(|_| model.sample(&mut rng).unwrap()).collect();
    xs.sort_by(f64::total_cmp);
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = model.cdf(x).unwrap();
            (f - i as f64 / n as f64).abs().max((f - (i + 1) as f64 / n as f64).abs())
        })
        .fold(0.0, f64::max)
}

#[test]
fn samplers_match_their_cdfs() {
    let n = 20_000;
    // 1% critical value of the one-sample KS statistic
    let critical = 1.63 / (n as f64).sqrt();
    for (i, m) in [
        FadingModel::nakagami(0.5).unwrap(),
        FadingModel::nakagami(2.7).unwrap(),
        FadingModel::rician(5.0).unwrap(),
        FadingModel::hoyt(0.3).unwrap(),
        FadingModel::pareto(1.0).unwrap(),
        FadingModel::pareto(3.0).unwrap(),
    ]
    .iter()
    .enumerate()
    {
        let d = ks_against_cdf(m, n, 100 + i as u64);
        assert!(d < critical, "{m}: KS {d:.4} >= {critical:.4}");
    }
}
