//! `capord`: ergodic capacities and capacity-order verdicts from the command line.

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use capord::composite::{self, LinkSet, Scheme};
use capord::mc::McConfig;
use capord::mimo::{self, MatrixEnsemble};
use capord::ordering::{self, SnrGrid};
use capord::transform::{self, fmt_db};
use capord::{Engine, Error, FadingModel};

const AFTER_HELP: &str = "\
SNR grids are given in dB as start:step:stop (endpoints included) and evaluated \
in linear scale, rho_lin = 10^(rho_db/10). CSV output is always in nats; --unit \
only changes the summary lines. Monte Carlo results depend on --seed and --n only, \
never on --threads.

Exit codes: 0 success, 1 selftest failure, 2 usage or parameter error, \
3 numerical nonconvergence.";

#[derive(Parser, Debug)]
#[command(name = "capord", version, about = "Ergodic capacity of fading channels and capacity-order verdicts", after_help = AFTER_HELP)]
struct Cli {
    /// Cap on worker threads (results do not depend on it).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Unit of summary lines.
    #[arg(long, global = true, value_enum, default_value_t = Unit::Nats)]
    unit: Unit,
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Unit {
    Nats,
    Bits,
}

impl Unit {
    fn show(self, nats: f64) -> String {
        match self {
            Unit::Nats => format!("{nats:.6} nats"),
            Unit::Bits => format!("{:.6} bits", nats / std::f64::consts::LN_2),
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Shannon transform C(rho) = E[ln(1 + rho X)] of one fading model.
    Capacity(CapacityArgs),
    /// Capacity-order and Laplace-order verdicts for two models.
    Order(OrderArgs),
    /// Multi-hop amplify-and-forward relay with Pareto-type hops.
    Relay(RelayArgs),
    /// Compare two link sets under MRC, EGC or MH-AF combining.
    Combine(CombineArgs),
    /// Multiple-access capacity region constraints.
    Mac(MacArgs),
    /// MIMO log-det capacity and ordering.
    Mimo {
        #[command(subcommand)]
        command: MimoCommand,
    },
    /// Run invariant suites (all fast suites by default).
    Selftest {
        /// One of specfun, transform, ordering, calculus, composite, mimo.
        suite: Option<String>,
    },
}

#[derive(Args, Debug, Clone)]
struct GridArgs {
    /// dB grid start:step:stop.
    #[arg(long, allow_hyphen_values = true, default_value = "-10:1:30")]
    grid: String,
    /// Prepend rho = 0 to the grid.
    #[arg(long)]
    with_zero: bool,
}

impl GridArgs {
    fn resolve(&self) -> capord::Result<SnrGrid> {
        SnrGrid::parse_db(&self.grid, self.with_zero)
    }
}

#[derive(Args, Debug, Clone)]
struct McArgs {
    /// Monte Carlo draws.
    #[arg(long)]
    n: Option<usize>,
    /// Seed (required for every Monte Carlo run).
    #[arg(long)]
    seed: Option<u64>,
}

impl McArgs {
    fn resolve(&self, default_n: usize, threads: Option<usize>) -> capord::Result<McConfig> {
        let seed = self
            .seed
            .ok_or_else(|| Error::Parameter("Monte Carlo runs require --seed".into()))?;
        Ok(McConfig::new(self.n.unwrap_or(default_n), seed)?.with_threads(threads))
    }
}

#[derive(Args, Debug)]
struct CapacityArgs {
    /// Model literal: nakagami:m=2, rician:K=5, hoyt:q=0.5, pareto:beta=3, det:c=1, exp.
    #[arg(long)]
    model: String,
    #[command(flatten)]
    grid: GridArgs,
    /// pdf, stieltjes, laplace or mc.
    #[arg(long, default_value = "stieltjes")]
    engine: String,
    #[command(flatten)]
    mc: McArgs,
    /// Write the CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct OrderArgs {
    #[arg(long = "modelX", alias = "x")]
    model_x: String,
    #[arg(long = "modelY", alias = "y")]
    model_y: String,
    #[command(flatten)]
    grid: GridArgs,
    /// Laplace-order grid as log10 start:step:stop (default -2:0.0833..:3, 61 points).
    #[arg(long = "u-grid", allow_hyphen_values = true)]
    u_grid: Option<String>,
    #[arg(long, default_value = "laplace")]
    engine: String,
    #[command(flatten)]
    mc: McArgs,
    /// Dead band in nats (raised to 2 CI for Monte Carlo).
    #[arg(long, default_value_t = ordering::DEFAULT_TOL)]
    tol: f64,
    /// Write the difference curves as CSV.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct RelayArgs {
    #[arg(long = "betaX", default_value_t = 1.0)]
    beta_x: f64,
    #[arg(long = "betaY", default_value_t = 3.0)]
    beta_y: f64,
    #[arg(long, default_value_t = 3)]
    hops: usize,
    /// dB grid start:step:stop.
    #[arg(long, allow_hyphen_values = true, default_value = "-10:0.5:30")]
    grid: String,
    #[command(flatten)]
    mc: McArgs,
    #[arg(long, default_value_t = ordering::DEFAULT_TOL)]
    tol: f64,
    /// Divide capacities by the number of hops (display only).
    #[arg(long)]
    timeshare: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CombineArgs {
    /// mrc, egc or mhaf.
    #[arg(long)]
    scheme: String,
    /// Comma-separated model literals.
    #[arg(long = "linksX")]
    links_x: String,
    #[arg(long = "linksY")]
    links_y: String,
    #[command(flatten)]
    grid: GridArgs,
    #[command(flatten)]
    mc: McArgs,
    #[arg(long, default_value_t = ordering::DEFAULT_TOL)]
    tol: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct MacArgs {
    /// Comma-separated model literals, one per user.
    #[arg(long = "usersX")]
    users_x: String,
    /// Optional second user set; checks region inclusion X inside Y.
    #[arg(long = "usersY")]
    users_y: Option<String>,
    /// SNR in dB.
    #[arg(long = "snr-db", allow_hyphen_values = true, default_value_t = 10.0)]
    snr_db: f64,
    #[command(flatten)]
    mc: McArgs,
    /// Inclusion tolerance in nats (default: twice the largest half-width).
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum MimoCommand {
    /// E[ln det(I + rho X)] of one ensemble.
    Capacity {
        /// rayleigh:nr=2,nt=2,pow=1 | scaled:c=2(<ens>) | unitary:seed=7(<ens>) | diag(<m>;<m>) | det:<file>
        #[arg(long)]
        ens: String,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        mc: McArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// MIMO capacity order of two ensembles (paired draws).
    Order {
        #[arg(long = "ensA")]
        ens_a: String,
        #[arg(long = "ensB")]
        ens_b: String,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        mc: McArgs,
        #[arg(long, default_value_t = ordering::DEFAULT_TOL)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Trace Laplace condition E[Tr exp(-rho X)] >= E[Tr exp(-rho Y)].
    Trace {
        #[arg(long = "ensA")]
        ens_a: String,
        #[arg(long = "ensB")]
        ens_b: String,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        mc: McArgs,
        #[arg(long, default_value_t = ordering::DEFAULT_TOL)]
        tol: f64,
    },
    /// MIMO multiple-access region; users separated by `;`.
    Mac {
        #[arg(long)]
        users: String,
        #[arg(long = "snr-db", allow_hyphen_values = true, default_value_t = 10.0)]
        snr_db: f64,
        #[command(flatten)]
        mc: McArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

enum Failure {
    Lib(Error),
    Io(String),
    Selftest(usize),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

type Run = Result<(), Failure>;

/// Print the resolved configuration to stderr.
fn announce(subcommand: &str, fields: &[(&str, String)], cli: &Cli) {
    let mut line = format!("config: subcommand={subcommand}");
    for (k, v) in fields {
        line.push_str(&format!(" {k}={v}"));
    }
    let threads = cli.threads.map_or("auto".to_string(), |t| t.to_string());
    line.push_str(&format!(" unit={:?} threads={threads}", cli.unit).to_lowercase());
    eprintln!("{line}");
}

fn emit(out: &Option<PathBuf>, csv: &str) -> io::Result<()> {
    match out {
        Some(p) => fs::write(p, csv),
        None => io::stdout().lock().write_all(csv.as_bytes()),
    }
}

fn out_name(out: &Option<PathBuf>) -> String {
    out.as_ref().map_or("stdout".to_string(), |p| p.display().to_string())
}

fn mc_fields(cfg: &McConfig) -> [(&'static str, String); 2] {
    [("n", cfg.n.to_string()), ("seed", cfg.seed.to_string())]
}

fn capacity(a: &CapacityArgs, cli: &Cli) -> Run {
    let model: FadingModel = a.model.parse()?;
    let grid = a.grid.resolve()?;
    let engine: Engine = a.engine.parse()?;
    let cfg = if engine.is_monte_carlo() {
        Some(a.mc.resolve(100_000, cli.threads)?)
    } else {
        None
    };
    let mut fields = vec![
        ("model", model.to_string()),
        ("grid", a.grid.grid.clone()),
        ("engine", engine.to_string()),
        ("out", out_name(&a.out)),
    ];
    if let Some(c) = &cfg {
        fields.extend(mc_fields(c));
    }
    announce("capacity", &fields, cli);
    let curve = transform::curve(&model, grid.linear(), engine, cfg)?;
    emit(&a.out, &curve.to_csv())?;
    let last = curve.len() - 1;
    eprintln!(
        "summary: {} points, C({} dB) = {}, max CI = {}",
        curve.len(),
        fmt_db(curve.grid[last]),
        cli.unit.show(curve.values[last]),
        cli.unit.show(curve.max_ci())
    );
    Ok(())
}

fn parse_u_grid(spec: &str) -> capord::Result<Vec<f64>> {
    let parts: Vec<f64> = spec
        .split(':')
        .map(|s| s.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| Error::Parameter(format!("bad u grid `{spec}`")))?;
    let [a, step, b] = parts[..] else {
        return Err(Error::Parameter(format!("u grid `{spec}` must be log10 start:step:stop")));
    };
    if !(step > 0.0 && b >= a) {
        return Err(Error::Parameter(format!("bad u grid `{spec}`")));
    }
    let count = ((b - a) / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|i| 10f64.powf(a + i as f64 * step)).collect())
}

fn order(a: &OrderArgs, cli: &Cli) -> Run {
    let x: FadingModel = a.model_x.parse()?;
    let y: FadingModel = a.model_y.parse()?;
    let grid = a.grid.resolve()?;
    let engine: Engine = a.engine.parse()?;
    let u_grid = match &a.u_grid {
        Some(s) => parse_u_grid(s)?,
        None => ordering::default_u_grid(),
    };
    let cfg = if engine.is_monte_carlo() {
        Some(a.mc.resolve(100_000, cli.threads)?)
    } else {
        None
    };
    let mut fields = vec![
        ("modelX", x.to_string()),
        ("modelY", y.to_string()),
        ("grid", a.grid.grid.clone()),
        ("u_points", u_grid.len().to_string()),
        ("engine", engine.to_string()),
        ("tol", format!("{:e}", a.tol)),
    ];
    if let Some(c) = &cfg {
        fields.extend(mc_fields(c));
    }
    announce("order", &fields, cli);
    let cmp = ordering::capacity_comparison(&x, &y, &grid, engine, a.tol, cfg)?;
    let lt = ordering::lt_order(&x, &y, &u_grid, a.tol)?;
    let s3 = ordering::s3_status(lt.relation, cmp.verdict.relation);
    let mean = ordering::mean_necessary(&x, &y, cmp.verdict.relation, a.tol);
    for n in &cmp.verdict.notes {
        eprintln!("note: {n}");
    }
    println!("capacity: {}", cmp.verdict);
    println!("laplace: {}", lt);
    println!("s3={s3}");
    println!("mean: {mean}");
    if let Some(p) = &a.out {
        fs::write(p, cmp.to_csv())?;
    }
    Ok(())
}

fn relay(a: &RelayArgs, cli: &Cli) -> Run {
    let grid = SnrGrid::parse_db(&a.grid, false)?;
    let cfg = a.mc.resolve(1_000_000, cli.threads)?;
    let mut fields = vec![
        ("betaX", a.beta_x.to_string()),
        ("betaY", a.beta_y.to_string()),
        ("hops", a.hops.to_string()),
        ("grid", a.grid.clone()),
        ("tol", format!("{:e}", a.tol)),
        ("timeshare", a.timeshare.to_string()),
        ("out", out_name(&a.out)),
    ];
    fields.extend(mc_fields(&cfg));
    announce("relay", &fields, cli);
    let exp = composite::relay_crossover_experiment(a.beta_x, a.beta_y, a.hops, &grid, cfg, a.tol)?;
    let mut cmp = exp.comparison.clone();
    if a.timeshare {
        let f = 1.0 / a.hops as f64;
        cmp.x = cmp.x.scaled(f);
        cmp.y = cmp.y.scaled(f);
        cmp.delta.iter_mut().for_each(|d| *d *= f);
        cmp.delta_ci.iter_mut().for_each(|d| *d *= f);
    }
    emit(&a.out, &cmp.to_csv())?;
    let xs: Vec<String> = exp.crossovers.iter().map(|&r| format!("{:.3}", 10.0 * r.log10())).collect();
    eprintln!("relay: {}", exp.comparison.verdict);
    eprintln!("relay: crossovers_db=[{}] count={}", xs.join(","), exp.crossovers.len());
    Ok(())
}

fn combine(a: &CombineArgs, cli: &Cli) -> Run {
    let scheme: Scheme = a.scheme.parse()?;
    let lx: LinkSet = a.links_x.parse()?;
    let ly: LinkSet = a.links_y.parse()?;
    let grid = a.grid.resolve()?;
    let cfg = a.mc.resolve(100_000, cli.threads)?;
    let mut fields = vec![
        ("scheme", scheme.to_string()),
        ("linksX", lx.to_string()),
        ("linksY", ly.to_string()),
        ("grid", a.grid.grid.clone()),
        ("tol", format!("{:e}", a.tol)),
    ];
    fields.extend(mc_fields(&cfg));
    announce("combine", &fields, cli);
    let cmp = composite::compare_composite(scheme, &lx, &ly, &grid, cfg, a.tol)?;
    println!("{}", cmp.verdict);
    if let Some(p) = &a.out {
        fs::write(p, cmp.to_csv())?;
    }
    Ok(())
}

fn mac(a: &MacArgs, cli: &Cli) -> Run {
    let lx: LinkSet = a.users_x.parse()?;
    let ly: Option<LinkSet> = a.users_y.as_deref().map(str::parse).transpose()?;
    let rho = transform::db_to_linear(a.snr_db);
    let cfg = a.mc.resolve(100_000, cli.threads)?;
    let mut fields = vec![
        ("usersX", lx.to_string()),
        ("usersY", ly.as_ref().map_or("-".into(), |l| l.to_string())),
        ("snr_db", a.snr_db.to_string()),
        ("out", out_name(&a.out)),
    ];
    fields.extend(mc_fields(&cfg));
    announce("mac", &fields, cli);
    let rx = composite::mac_region(&lx, rho, cfg)?;
    let mut csv = rx.to_csv();
    if let Some(ly) = ly {
        let ry = composite::mac_region(&ly, rho, cfg)?;
        let ci = rx
            .constraints
            .iter()
            .chain(&ry.constraints)
            .map(|c| c.ci_half_width)
            .fold(0.0, f64::max);
        let tol = a.tol.unwrap_or(2.0 * ci);
        let inside = composite::mac_region_subset(&rx, &ry, tol)?;
        eprintln!("mac: region X inside Y: {} (tol={tol:.3e})", if inside { "pass" } else { "fail" });
        csv.push_str(&ry.to_csv());
    }
    emit(&a.out, &csv)?;
    eprintln!("mac: full-set constraint X = {}", cli.unit.show(rx.full_set().value));
    Ok(())
}

fn mimo_cmd(c: &MimoCommand, cli: &Cli) -> Run {
    match c {
        MimoCommand::Capacity { ens, grid, mc, out } => {
            let e: MatrixEnsemble = ens.parse()?;
            let g = grid.resolve()?;
            let cfg = mc.resolve(100_000, cli.threads)?;
            let mut fields = vec![("ens", e.to_string()), ("grid", grid.grid.clone()), ("out", out_name(out))];
            fields.extend(mc_fields(&cfg));
            announce("mimo capacity", &fields, cli);
            let curve = mimo::mimo_shannon(&e, g.linear(), cfg)?;
            emit(out, &curve.to_csv())?;
        }
        MimoCommand::Order {
            ens_a,
            ens_b,
            grid,
            mc,
            tol,
            out,
        } => {
            let (a, b): (MatrixEnsemble, MatrixEnsemble) = (ens_a.parse()?, ens_b.parse()?);
            let g = grid.resolve()?;
            let cfg = mc.resolve(100_000, cli.threads)?;
            let mut fields = vec![
                ("ensA", a.to_string()),
                ("ensB", b.to_string()),
                ("grid", grid.grid.clone()),
                ("tol", format!("{tol:e}")),
            ];
            fields.extend(mc_fields(&cfg));
            announce("mimo order", &fields, cli);
            let o = mimo::mimo_capacity_order(&a, &b, &g, cfg, *tol)?;
            for n in &o.comparison.verdict.notes {
                eprintln!("note: {n}");
            }
            println!("{}", o.comparison.verdict);
            if let Some(p) = out {
                fs::write(p, o.comparison.to_csv())?;
            }
        }
        MimoCommand::Trace {
            ens_a,
            ens_b,
            grid,
            mc,
            tol,
        } => {
            let (a, b): (MatrixEnsemble, MatrixEnsemble) = (ens_a.parse()?, ens_b.parse()?);
            let g = grid.resolve()?;
            let cfg = mc.resolve(100_000, cli.threads)?;
            let mut fields = vec![("ensA", a.to_string()), ("ensB", b.to_string()), ("grid", grid.grid.clone())];
            fields.extend(mc_fields(&cfg));
            announce("mimo trace", &fields, cli);
            let r = mimo::trace_lt_check(&a, &b, &g, cfg, *tol)?;
            println!("trace_condition={}", if r.met { "met" } else { "not-met" });
            println!("capacity: {}", r.capacity);
            println!("consistent={}", r.consistent);
        }
        MimoCommand::Mac { users, snr_db, mc, out } => {
            let ens = users
                .split(';')
                .map(|s| s.parse())
                .collect::<capord::Result<Vec<MatrixEnsemble>>>()?;
            let cfg = mc.resolve(100_000, cli.threads)?;
            let names: Vec<String> = ens.iter().map(|e| e.to_string()).collect();
            let mut fields = vec![("users", names.join(";")), ("snr_db", snr_db.to_string()), ("out", out_name(out))];
            fields.extend(mc_fields(&cfg));
            announce("mimo mac", &fields, cli);
            let r = mimo::mimo_mac_region(&ens, transform::db_to_linear(*snr_db), cfg)?;
            emit(out, &r.to_csv())?;
        }
    }
    Ok(())
}

fn selftest(suite: &Option<String>, cli: &Cli) -> Run {
    announce("selftest", &[("suite", suite.clone().unwrap_or_else(|| "all".into()))], cli);
    let results = capord::selftest::run(suite.as_deref(), |r| println!("{r}"))?;
    let failed = results.iter().filter(|r| !r.passed()).count();
    println!("selftest: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        return Err(Failure::Selftest(failed));
    }
    Ok(())
}

fn run(cli: &Cli) -> Run {
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(Error::Parameter("--threads must be at least 1".into()).into());
        }
        // ignore the error if a pool already exists; results are thread-count independent
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    match &cli.command {
        Command::Capacity(a) => capacity(a, cli),
        Command::Order(a) => order(a, cli),
        Command::Relay(a) => relay(a, cli),
        Command::Combine(a) => combine(a, cli),
        Command::Mac(a) => mac(a, cli),
        Command::Mimo { command } => mimo_cmd(command, cli),
        Command::Selftest { suite } => selftest(suite, cli),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Selftest(n)) => {
            eprintln!("error: {n} selftest check(s) failed");
            ExitCode::from(1)
        }
        Err(Failure::Io(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_nonconvergence() { 3 } else { 2 })
        }
    }
}
