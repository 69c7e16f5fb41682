//! Acceptance criteria, one report line each.
//!
//! Plain `main` (no libtest harness) so the lines always reach stdout.
//! Criteria listed in `KNOWN_FAILURES` are reported as FAIL and explained in
//! the README; any other failure makes the target exit nonzero.

use std::process::Command;
use std::time::{Duration, Instant};

use capord::calculus::{self, CmOutcome};
use capord::composite::{self, LinkSet, Scheme};
use capord::mc::{McConfig, Z95};
use capord::mimo::{self, MatrixEnsemble};
use capord::ordering::{self, Relation, S3Status, SnrGrid, DEFAULT_TOL};
use capord::quad::{self, Tolerance};
use capord::specfun;
use capord::transform::{self, Engine};
use capord::FadingModel;

/// Criteria whose numeric outcome contradicts the stated expectation:
/// 5 (relay crossover sits near 1.5 dB), 6 and 12 (Pareto β=1 has the
/// larger capacity on the whole grid).
const KNOWN_FAILURES: [u32; 3] = [5, 6, 12];

struct Line {
    id: u32,
    pass: bool,
    detail: String,
    elapsed: Duration,
}

fn nak(m: f64) -> FadingModel {
    FadingModel::nakagami(m).unwrap()
}

fn db_grid() -> SnrGrid {
    SnrGrid::range_db(-10.0, 1.0, 30.0, false).unwrap()
}

fn unit_mean_models() -> Vec<FadingModel> {
    let mut v: Vec<FadingModel> = [0.5, 1.0, 2.0, 4.0].iter().map(|&m| nak(m)).collect();
    v.extend([0.0, 1.0, 5.0].iter().map(|&k| FadingModel::rician(k).unwrap()));
    v.extend([0.3, 0.7, 1.0].iter().map(|&q| FadingModel::hoyt(q).unwrap()));
    v
}

fn ten_models() -> Vec<FadingModel> {
    let mut v: Vec<FadingModel> = [0.5, 1.0, 2.0, 4.0].iter().map(|&m| nak(m)).collect();
    v.extend([1.0, 5.0].iter().map(|&k| FadingModel::rician(k).unwrap()));
    v.extend([0.3, 0.7].iter().map(|&q| FadingModel::hoyt(q).unwrap()));
    v.extend([1.0, 3.0].iter().map(|&b| FadingModel::pareto(b).unwrap()));
    v
}

fn c1_rayleigh() -> (bool, String) {
    let exp = FadingModel::exponential();
    let rhos = [0.1, 1.0, 10.0, 100.0];
    let mut worst: f64 = 0.0;
    for &r in &rhos {
        let want = specfun::expint_e1_scaled(1.0 / r).unwrap();
        for e in Engine::DETERMINISTIC {
            worst = worst.max((transform::shannon(&exp, r, e).unwrap() - want).abs());
        }
    }
    let mc = transform::shannon_monte_carlo(&exp, &rhos, McConfig::new(1_000_000, 2024).unwrap()).unwrap();
    let mut worst_z: f64 = 0.0;
    for (i, &r) in rhos.iter().enumerate() {
        let want = specfun::expint_e1_scaled(1.0 / r).unwrap();
        worst_z = worst_z.max((mc.values[i] - want).abs() / mc.ci_half_width[i]);
    }
    (
        worst <= 1e-6 && worst_z <= 4.0,
        format!("deterministic max error {worst:.2e}; Monte Carlo max |err|/CI {worst_z:.2}"),
    )
}

fn c2_cross_engine() -> (bool, String) {
    let g = db_grid();
    let mut worst: f64 = 0.0;
    let mut who = String::new();
    for m in ten_models() {
        let curves: Vec<_> = Engine::DETERMINISTIC
            .iter()
            .map(|&e| transform::curve(&m, g.linear(), e, None).unwrap())
            .collect();
        for i in 0..g.len() {
            let v: Vec<f64> = curves.iter().map(|c| c.values[i]).collect();
            let spread = v.iter().cloned().fold(f64::MIN, f64::max) - v.iter().cloned().fold(f64::MAX, f64::min);
            if spread > worst {
                worst = spread;
                who = m.to_string();
            }
        }
    }
    (worst <= 1e-5, format!("worst spread {worst:.2e} ({who})"))
}

fn c3_awgn() -> (bool, String) {
    let g = db_grid();
    let mut ok = true;
    let mut min_gap = f64::INFINITY;
    for m in unit_mean_models() {
        let c = transform::curve(&m, g.linear(), Engine::Stieltjes, None).unwrap();
        ok &= c.grid.iter().zip(&c.values).all(|(r, v)| *v <= r.ln_1p() + 1e-12);
        let gap = 11f64.ln() - transform::shannon(&m, 10.0, Engine::Stieltjes).unwrap();
        min_gap = min_gap.min(gap);
    }
    let det = FadingModel::deterministic(1.0).unwrap();
    let c = transform::curve(&det, g.linear(), Engine::PdfQuadrature, None).unwrap();
    ok &= c.grid.iter().zip(&c.values).all(|(r, v)| (*v - r.ln_1p()).abs() < 1e-12);
    (ok && min_gap >= 1e-4, format!("all curves <= ln(1+rho); smallest gap at rho=10: {min_gap:.3e}"))
}

fn los_pairs() -> Vec<(FadingModel, FadingModel)> {
    let mut pairs = Vec::new();
    for w in [0.5, 1.0, 2.0, 4.0].windows(2) {
        pairs.push((nak(w[0]), nak(w[1])));
    }
    for w in [0.0, 1.0, 5.0].windows(2) {
        pairs.push((FadingModel::rician(w[0]).unwrap(), FadingModel::rician(w[1]).unwrap()));
    }
    for w in [0.3, 0.7, 1.0].windows(2) {
        pairs.push((FadingModel::hoyt(w[0]).unwrap(), FadingModel::hoyt(w[1]).unwrap()));
    }
    pairs
}

fn c4_los() -> (bool, String) {
    let g = SnrGrid::default();
    let mut bad = Vec::new();
    for (x, y) in los_pairs() {
        for e in Engine::DETERMINISTIC {
            let v = ordering::capacity_order(&x, &y, &g, e, DEFAULT_TOL, None).unwrap();
            if v.relation != Relation::FirstDominated {
                bad.push(format!("{x} vs {y} ({e}): {}", v.relation));
            }
        }
    }
    (
        bad.is_empty(),
        if bad.is_empty() {
            "7 adjacent pairs x 3 engines FirstDominated".into()
        } else {
            bad.join("; ")
        },
    )
}

fn c5_relay() -> (bool, String) {
    let g = SnrGrid::range_db(-10.0, 0.5, 30.0, false).unwrap();
    let exp = composite::relay_crossover_experiment(1.0, 3.0, 3, &g, McConfig::new(1_000_000, 42).unwrap(), DEFAULT_TOL)
        .unwrap();
    let cmp = &exp.comparison;
    let at = |db: f64| {
        cmp.x
            .grid
            .iter()
            .position(|r| (10.0 * r.log10() - db).abs() < 1e-9)
            .unwrap()
    };
    let (lo, hi) = (at(-5.0), at(15.0));
    // Δ = C_Y − C_X, so "β=1 higher" means Δ < 0
    let below = -cmp.delta[lo] >= 2.0 * cmp.delta_ci[lo];
    let above = cmp.delta[hi] >= 2.0 * cmp.delta_ci[hi];
    let db: Vec<f64> = exp.crossovers.iter().map(|r| 10.0 * r.log10()).collect();
    let located = db.len() == 1 && (3.0..=7.0).contains(&db[0]);
    (
        located && below && above,
        format!(
            "crossovers {:?} dB (want one in [3,7]); -5 dB: C_X-C_Y={:.4} (2CI {:.1e}); 15 dB: C_Y-C_X={:.4} (2CI {:.1e})",
            db.iter().map(|d| format!("{d:.2}")).collect::<Vec<_>>(),
            -cmp.delta[lo],
            2.0 * cmp.delta_ci[lo],
            cmp.delta[hi],
            2.0 * cmp.delta_ci[hi]
        ),
    )
}

fn pareto_pair() -> (FadingModel, FadingModel) {
    (FadingModel::pareto(1.0).unwrap(), FadingModel::pareto(3.0).unwrap())
}

fn c6_pareto() -> (bool, String) {
    let (x, y) = pareto_pair();
    let cap = ordering::capacity_order(&x, &y, &SnrGrid::default(), Engine::Laplace, DEFAULT_TOL, None).unwrap();
    let u = ordering::default_u_grid();
    let lt = ordering::lt_order(&x, &y, &u, DEFAULT_TOL).unwrap();
    let d = ordering::laplace_difference(&x, &y, &u).unwrap();
    let reversal = d.iter().cloned().fold(f64::MIN, f64::max).min(-d.iter().cloned().fold(f64::MAX, f64::min));
    (
        cap.relation == Relation::FirstDominated && lt.relation == Relation::Crossover && reversal > 1e-6,
        format!("capacity {} (want FirstDominated); laplace {} with reversal {reversal:.3e}", cap.relation, lt),
    )
}

fn c7_s3() -> (bool, String) {
    let g = SnrGrid::default();
    let u = ordering::default_u_grid();
    let mut pairs = los_pairs();
    pairs.push(pareto_pair());
    let mut counts = [0usize; 3];
    for (x, y) in &pairs {
        let r = ordering::check_s3(x, y, &g, &u, Engine::Laplace, DEFAULT_TOL, None).unwrap();
        counts[match r.status {
            S3Status::Consistent => 0,
            S3Status::CounterexamplePattern => 1,
            S3Status::Violation => 2,
        }] += 1;
    }
    (
        counts[2] == 0,
        format!("{} pairs: {} consistent, {} counterexample pattern, {} violations", pairs.len(), counts[0], counts[1], counts[2]),
    )
}

fn c8_calculus() -> (bool, String) {
    let mut worst: f64 = 0.0;
    for i in 0..20 {
        let x = 10f64.powf(-2.0 + 5.0 * i as f64 / 19.0);
        worst = worst.max((calculus::frullani_capacity(x).unwrap() - x.ln_1p()).abs());
    }
    let pts = [0.05, 0.5, 1.0, 5.0, 20.0];
    let mut cm_ok = calculus::cm_check(|x| Ok((-x).exp()), &pts, 4, None).unwrap().passed()
        && calculus::cm_check(|x| Ok(1.0 / (1.0 + x)), &pts, 4, None).unwrap().passed();
    let mut models = ten_models();
    models.extend([FadingModel::rician(0.0).unwrap(), FadingModel::hoyt(1.0).unwrap(), FadingModel::deterministic(2.0).unwrap()]);
    for m in &models {
        cm_ok &= calculus::cm_check(|u| m.laplace(u), &pts, 4, None).unwrap().passed();
    }
    let exp = FadingModel::exponential();
    cm_ok &= calculus::cm_check(|s| transform::shannon(&exp, 1.0 / s, Engine::Stieltjes), &pts, 4, None)
        .unwrap()
        .passed();
    let sine = calculus::cm_check(|x| Ok(x.sin() + 2.0), &[1.0, 2.0, 3.0], 2, None).unwrap();
    let witnessed = matches!(sine, CmOutcome::Fail { .. });
    (
        worst <= 1e-8 && cm_ok && witnessed,
        format!("Frullani max error {worst:.2e}; {} Laplace transforms + C(1/s) c.m.; sin(x)+2: {sine}", models.len()),
    )
}

fn c9_combining() -> (bool, String) {
    let lx = LinkSet::iid(nak(0.5), 2).unwrap();
    let ly = LinkSet::iid(nak(2.0), 2).unwrap();
    let g = SnrGrid::range_db(-10.0, 2.0, 30.0, false).unwrap();
    let cfg = McConfig::new(100_000, 9).unwrap();
    let mrc = composite::compare_composite(Scheme::Mrc, &lx, &ly, &g, cfg, DEFAULT_TOL).unwrap();
    let egc = composite::compare_composite(Scheme::Egc, &lx, &ly, &g, cfg, DEFAULT_TOL).unwrap();
    let mut chain = true;
    for (links, m, e) in [(&lx, &mrc.x, &egc.x), (&ly, &mrc.y, &egc.y)] {
        let branch = transform::curve(&links.models()[0], g.linear(), Engine::Laplace, None).unwrap();
        for i in 0..g.len() {
            chain &= m.values[i] >= e.values[i] - 2.0 * m.ci_half_width[i].hypot(e.ci_half_width[i]);
            chain &= e.values[i] >= branch.values[i] - 2.0 * e.ci_half_width[i];
        }
    }
    (
        mrc.verdict.relation == Relation::FirstDominated && egc.verdict.relation == Relation::FirstDominated && chain,
        format!("MRC {}; EGC {}; MRC >= EGC >= branch: {chain}", mrc.verdict.relation, egc.verdict.relation),
    )
}

fn gamma2_capacity(rho: f64) -> f64 {
    let f = |x: f64| (rho * x).ln_1p() * x * (-x).exp();
    quad::integrate_half_line(f, Tolerance::abs(1e-12)).unwrap().value
}

fn c10_mac() -> (bool, String) {
    let lx = LinkSet::iid(nak(0.5), 3).unwrap();
    let ly = LinkSet::iid(nak(2.0), 3).unwrap();
    let cfg = McConfig::new(100_000, 10).unwrap();
    let mut subset = true;
    for rho in [1.0, 10.0] {
        let a = composite::mac_region(&lx, rho, cfg).unwrap();
        let b = composite::mac_region(&ly, rho, cfg).unwrap();
        let tol = 2.0 * a.constraints.iter().chain(&b.constraints).map(|c| c.ci_half_width).fold(0.0, f64::max);
        subset &= composite::mac_region_subset(&a, &b, tol).unwrap();
    }
    let two = LinkSet::iid(FadingModel::exponential(), 2).unwrap();
    let mut worst_z: f64 = 0.0;
    for rho in [1.0, 10.0] {
        let r = composite::mac_region(&two, rho, cfg).unwrap();
        let full = r.full_set();
        worst_z = worst_z.max((full.value - gamma2_capacity(rho)).abs() / full.ci_half_width);
    }
    (
        subset && worst_z <= 4.0,
        format!("M=3 Nakagami region inclusion at rho 1,10: {subset}; M=2 exponential full set |err|/CI {worst_z:.2}"),
    )
}

fn c11_mimo() -> (bool, String) {
    let ens = MatrixEnsemble::rayleigh(3, 3, 1.0).unwrap();
    let mut rng = capord::mc::substream(11, capord::mc::purpose::MIMO, 0);
    let mut gap: f64 = 0.0;
    for _ in 0..10_000 {
        let x = ens.sample_gram(&mut rng).unwrap();
        for rho in [0.1, 1.0, 10.0, 1000.0] {
            gap = gap.max(mimo::logdet_identity_gap(&x, rho).unwrap());
        }
    }
    let base = MatrixEnsemble::rayleigh(2, 2, 1.0).unwrap();
    let conj = MatrixEnsemble::unitary_conjugate(base.clone(), mimo::haar_unitary(2, 5)).unwrap();
    let cfg = McConfig::new(10_000, 11).unwrap();
    let order = mimo::mimo_capacity_order(&base, &conj, &SnrGrid::default(), cfg, DEFAULT_TOL).unwrap();
    let ks = match order.equality {
        Some(mimo::EqualityEvidence::CurvesAndMixture { ks }) => ks,
        Some(mimo::EqualityEvidence::MixtureMismatch { ks }) => ks,
        _ => f64::NAN,
    };
    let g = SnrGrid::range_db(-10.0, 5.0, 30.0, false).unwrap();
    let n = 100_000;
    let direct = mimo::mimo_shannon(&base, g.linear(), McConfig::new(n, 12).unwrap()).unwrap();
    let scalar = mimo::uniform_eig_model(&base, McConfig::new(n, 13).unwrap()).unwrap();
    let FadingModel::Empirical(samples) = &scalar else { unreachable!() };
    let mut worst_z: f64 = 0.0;
    for (i, &r) in g.linear().iter().enumerate() {
        let c = transform::shannon(&scalar, r, Engine::Stieltjes).unwrap();
        let var = samples.average(|l| ((r * l).ln_1p() - c).powi(2));
        let ci_scalar = 2.0 * Z95 * (var / n as f64).sqrt();
        let z = (2.0 * c - direct.values[i]).abs() / ci_scalar.hypot(direct.ci_half_width[i]);
        worst_z = worst_z.max(z);
    }
    (
        gap <= 1e-8 && order.comparison.verdict.relation == Relation::Equal && ks <= 0.01 && worst_z <= 4.0,
        format!(
            "log-det gap {gap:.2e}; unitary {} KS {ks:.4}; 2 x scalar vs MIMO |err|/CI {worst_z:.2}",
            order.comparison.verdict.relation
        ),
    )
}

fn c12_trace() -> (bool, String) {
    let g = SnrGrid::default();
    let cfg = McConfig::new(100_000, 12).unwrap();
    let base = MatrixEnsemble::rayleigh(2, 2, 1.0).unwrap();
    let scaled = MatrixEnsemble::scaled(base.clone(), 2.0).unwrap();
    let a = mimo::trace_lt_check(&base, &scaled, &g, cfg, DEFAULT_TOL).unwrap();
    let px = MatrixEnsemble::diagonal(vec![FadingModel::pareto(1.0).unwrap(); 2]).unwrap();
    let py = MatrixEnsemble::diagonal(vec![FadingModel::pareto(3.0).unwrap(); 2]).unwrap();
    let b = mimo::trace_lt_check(&px, &py, &g, cfg, DEFAULT_TOL).unwrap();
    (
        a.met && a.capacity.relation == Relation::FirstDominated && !b.met && b.capacity.relation == Relation::FirstDominated,
        format!(
            "scaled: met={} capacity {}; diagonal Pareto: met={} capacity {} (want FirstDominated)",
            a.met, a.capacity.relation, b.met, b.capacity.relation
        ),
    )
}

fn run_cli(args: &[&str], threads: &str) -> Vec<u8> {
    let mut full = vec!["--threads", threads];
    full.extend_from_slice(args);
    let out = Command::new(env!("CARGO_BIN_EXE_capord")).args(&full).output().unwrap();
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out.stdout
}

fn c13_determinism() -> (bool, String) {
    let dir = std::env::temp_dir().join(format!("capord-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let commands: Vec<(&str, Vec<String>)> = vec![
        ("capacity", vec!["capacity", "--model", "hoyt:q=0.5", "--engine", "mc", "--n", "300000", "--seed", "7"]),
        (
            "combine",
            vec!["combine", "--scheme", "egc", "--linksX", "nakagami:m=0.5,nakagami:m=0.5", "--linksY", "nakagami:m=2,nakagami:m=2", "--n", "100000", "--seed", "3"],
        ),
        ("relay", vec!["relay", "--n", "100000", "--seed", "42", "--grid", "-10:2:30"]),
        ("mac", vec!["mac", "--usersX", "exp,rician:K=1,pareto:beta=3", "--n", "100000", "--seed", "5"]),
        ("mimo", vec!["mimo", "capacity", "--ens", "rayleigh:nr=3,nt=2", "--n", "50000", "--seed", "8"]),
    ]
    .into_iter()
    .map(|(k, v)| (k, v.into_iter().map(String::from).collect()))
    .collect();
    let mut bad = Vec::new();
    for (name, args) in &commands {
        let mut outputs = Vec::new();
        for threads in ["1", "1", "8"] {
            let path = dir.join(format!("{name}-{}.csv", outputs.len()));
            let mut a: Vec<&str> = args.iter().map(String::as_str).collect();
            let p = path.to_str().unwrap().to_string();
            a.extend(["--out", &p]);
            let stdout = run_cli(&a, threads);
            let file = std::fs::read(&path).unwrap();
            outputs.push((file, stdout));
        }
        if outputs[0] != outputs[1] || outputs[0] != outputs[2] || outputs[0].0.is_empty() {
            bad.push(*name);
        }
    }
    std::fs::remove_dir_all(&dir).ok();
    (
        bad.is_empty(),
        if bad.is_empty() {
            format!("{} subcommands byte-identical across repeats and --threads 1/8", commands.len())
        } else {
            format!("differs: {bad:?}")
        },
    )
}

fn main() {
    let criteria: [(u32, &str, fn() -> (bool, String), Option<u64>); 13] = [
        (1, "Rayleigh closed form", c1_rayleigh, Some(10)),
        (2, "cross-engine agreement", c2_cross_engine, Some(60)),
        (3, "AWGN dominance", c3_awgn, None),
        (4, "LoS monotonicity", c4_los, None),
        (5, "MH-AF relay crossover", c5_relay, Some(120)),
        (6, "Pareto counterexample pattern", c6_pareto, None),
        (7, "S3 consistency", c7_s3, None),
        (8, "Frullani and complete monotonicity", c8_calculus, None),
        (9, "MRC/EGC dominance", c9_combining, None),
        (10, "MAC region", c10_mac, None),
        (11, "MIMO identities", c11_mimo, None),
        (12, "trace Laplace sufficiency", c12_trace, None),
        (13, "determinism and thread independence", c13_determinism, None),
    ];
    let mut lines = Vec::new();
    for (id, name, f, budget) in criteria {
        let t = Instant::now();
        let (mut pass, mut detail) = f();
        let elapsed = t.elapsed();
        if let Some(limit) = budget {
            if elapsed > Duration::from_secs(limit) {
                pass = false;
                detail.push_str(&format!("; over the {limit} s budget"));
            }
        }
        let line = Line {
            id,
            pass,
            detail: format!("{name}: {detail}"),
            elapsed,
        };
        println!(
            "criterion {:>2} {} ({:.1}s) {}",
            line.id,
            if line.pass { "PASS" } else { "FAIL" },
            line.elapsed.as_secs_f64(),
            line.detail
        );
        lines.push(line);
    }
    let failed: Vec<u32> = lines.iter().filter(|l| !l.pass).map(|l| l.id).collect();
    println!(
        "acceptance: {} passed, {} failed {:?} (known: {:?})",
        lines.len() - failed.len(),
        failed.len(),
        failed,
        KNOWN_FAILURES
    );
    let unexpected: Vec<u32> = failed.iter().copied().filter(|id| !KNOWN_FAILURES.contains(id)).collect();
    if !unexpected.is_empty() {
        eprintln!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
}
