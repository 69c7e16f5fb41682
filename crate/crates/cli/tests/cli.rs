//! End-to-end runs of the `capord` binary.

use std::process::{Command, Output};

fn capord(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_capord")).args(args).output().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn rows(csv: &str) -> Vec<Vec<f64>> {
    csv.lines()
        .skip(1)
        .map(|l| l.split(',').map(|v| if v == "-inf" { f64::NEG_INFINITY } else { v.parse().unwrap() }).collect())
        .collect()
}

#[test]
fn deterministic_channel_is_awgn() {
    let out = capord(&["capacity", "--model", "det:c=1", "--grid", "0:10:20", "--with-zero"]);
    assert!(out.status.success());
    let csv = stdout(&out);
    assert!(csv.starts_with("rho_db,rho_lin,capacity_nats,ci_half_width,n\n"));
    let r = rows(&csv);
    assert_eq!(r.len(), 4);
    assert_eq!(r[0][2], 0.0);
    for row in &r[1..] {
        assert!((row[2] - row[1].ln_1p()).abs() < 1e-12);
    }
}

#[test]
fn rayleigh_capacity_matches_closed_form() {
    // e^{1/ρ} E₁(1/ρ) at 0, 10, 20 dB (scipy.special.exp1)
    let want = [0.596_347_362_323_194_1, 2.014_642_544_708_451_5, 4.078_511_443_456_425];
    let out = capord(&["capacity", "--model", "exp", "--grid", "0:10:20", "--engine", "laplace"]);
    for (row, w) in rows(&stdout(&out)).iter().zip(want) {
        assert!((row[2] - w).abs() < 1e-9, "{row:?}");
    }
}

#[test]
fn monte_carlo_fills_the_ci_column() {
    let out = capord(&["capacity", "--model", "rician:K=2", "--engine", "mc", "--n", "20000", "--seed", "4", "--grid", "0:10:20"]);
    assert!(out.status.success());
    for row in rows(&stdout(&out)) {
        assert!(row[3] > 0.0 && row[4] == 20000.0, "{row:?}");
    }
}

#[test]
fn order_reports_all_checks() {
    let out = capord(&["order", "--modelX", "nakagami:m=1", "--modelY", "nakagami:m=2"]);
    assert!(out.status.success());
    let s = stdout(&out);
    assert!(s.contains("capacity: verdict=FirstDominated"), "{s}");
    assert!(s.contains("laplace: verdict=FirstDominated"), "{s}");
    assert!(s.contains("s3=consistent"), "{s}");
    assert!(s.contains("mean: pass"), "{s}");
}

#[test]
fn pareto_order_shows_laplace_crossover() {
    let s = stdout(&capord(&["order", "--modelX", "pareto:beta=1", "--modelY", "pareto:beta=3"]));
    assert!(s.contains("laplace: verdict=Crossover"), "{s}");
    assert!(s.contains("s3=counterexample-pattern"), "{s}");
    assert!(s.contains("mean: skipped"), "{s}");
}

#[test]
fn combining_and_mimo_orders() {
    let s = stdout(&capord(&[
        "combine", "--scheme", "mrc", "--linksX", "exp,exp", "--linksY", "nakagami:m=2,nakagami:m=2", "--n", "20000", "--seed", "1",
        "--grid", "0:10:20",
    ]));
    assert!(s.starts_with("verdict=FirstDominated"), "{s}");
    let s = stdout(&capord(&[
        "mimo", "order", "--ensA", "rayleigh:nr=2,nt=2", "--ensB", "scaled:c=2(rayleigh:nr=2,nt=2)", "--n", "5000", "--seed", "1",
        "--grid", "0:10:20",
    ]));
    assert!(s.starts_with("verdict=FirstDominated"), "{s}");
}

#[test]
fn exit_codes() {
    assert_eq!(capord(&["capacity", "--model", "bogus"]).status.code(), Some(2));
    assert_eq!(capord(&["capacity", "--model", "exp", "--engine", "mc"]).status.code(), Some(2));
    assert_eq!(capord(&["--threads", "0", "capacity", "--model", "exp"]).status.code(), Some(2));
    let out = capord(&["capacity", "--model", "pareto:beta=1", "--engine", "pdf", "--grid", "3000"]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
    let out = capord(&["selftest", "calculus"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).lines().any(|l| l.starts_with("PASS calculus::frullani")));
}

#[test]
fn output_file_matches_stdout() {
    let path = std::env::temp_dir().join(format!("capord-cli-{}.csv", std::process::id()));
    let args = ["capacity", "--model", "hoyt:q=0.5", "--grid", "-10:5:30"];
    let direct = stdout(&capord(&args));
    let mut with_out = args.to_vec();
    let p = path.to_str().unwrap();
    with_out.extend(["--out", p]);
    let out = capord(&with_out);
    assert!(out.status.success() && out.stdout.is_empty());
    assert_eq!(std::fs::read_to_string(&path).unwrap(), direct);
    std::fs::remove_file(&path).ok();
}
