use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use lvolterra::canonical::InteractionMatrix;
use lvolterra::classify::{classify, volterra_first_permutation, ClassKind};
use lvolterra::export::{export_ternary, export_trajectory};
use lvolterra::fixed_points::{enumerate_face_fixed_points, numeric_fixed_points, vertex_fixed_points, NumericOptions};
use lvolterra::format::OperatorDocument;
use lvolterra::gen::{named_operator, random_interior_point, random_operator, GenSpec, NamedOperator};
use lvolterra::lyapunov::{
    check_thm1, check_thm2, check_thm4, empirical_lyapunov_check, p_delta_witness, ExponentVector, LimitEstimate,
    LyapunovFamily,
};
use lvolterra::trajectory::{
    omega_upper_bound, partial_sum_check, simulate, simulate_ensemble, verify_omega_bound, Justification,
    SimulationOptions, TrajectoryError,
};
use lvolterra::{set_tolerances, tolerances, HeredityTensor, LVolterraOperator, OperatorError, SimplexPoint, Tolerances};

const ENV_HELP: &str = "Tolerances can be overridden through the environment:
  LVOLTERRA_TOL_SIMPLEX  (default 1e-12)  simplex membership
  LVOLTERRA_TOL_ROW      (default 1e-12)  heredity row sums
  LVOLTERRA_TOL_ZERO     (default 1e-14)  zero tests
  LVOLTERRA_TOL_FIXED    (default 1e-10)  fixed-point residuals
  LVOLTERRA_TOL_CYCLE    (default 1e-9)   cycle matching
  LVOLTERRA_TOL_CONV     (default 1e-12)  convergence steps

Exit codes: 0 success, 1 domain finding (invalid tensor, failed condition), 2 usage or parse error.";

#[derive(Parser)]
#[command(name = "lvolterra", version, about = "Analyze ℓ-Volterra quadratic stochastic operators", after_help = ENV_HELP)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check nonnegativity, symmetry and row sums of an operator file
    Validate { path: PathBuf },
    /// Report the Volterra coordinates and ℓ
    Classify { path: PathBuf },
    /// Print the interaction matrix A and residual terms
    Canonical { path: PathBuf },
    /// Iterate the operator from x0
    Simulate {
        path: PathBuf,
        /// `uniform`, a vertex such as `e2`, or comma-separated coordinates
        #[arg(long, default_value = "uniform")]
        x0: String,
        #[arg(long, default_value_t = 1000)]
        steps: usize,
        #[arg(long, default_value_t = 1)]
        stride: usize,
        /// CSV file for the recorded points
        #[arg(long)]
        out: Option<PathBuf>,
        /// CSV file for ternary-plot coordinates (m = 3 only)
        #[arg(long)]
        ternary: Option<PathBuf>,
        /// Iterate the canonical form instead of the tensor
        #[arg(long)]
        canonical: bool,
        #[arg(long)]
        no_cycles: bool,
        /// Run all steps: no convergence or cycle stop
        #[arg(long)]
        full: bool,
        #[arg(long)]
        stop_on_boundary: bool,
    },
    /// Track a Lyapunov function along an orbit
    Lyapunov {
        path: PathBuf,
        #[arg(long, value_enum, default_value_t = Family::Phi)]
        family: Family,
        /// phi/psi: exponents for x_1..x_ℓ; linear: r; ratio: p,q (1-based). Derived when omitted.
        #[arg(long)]
        params: Option<String>,
        #[arg(long, default_value = "uniform")]
        x0: String,
        #[arg(long, default_value_t = 1000)]
        steps: usize,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
    },
    /// List vertex, face-interior and (optionally) numeric fixed points
    FixedPoints {
        path: PathBuf,
        #[arg(long, default_value_t = 0)]
        numeric_seeds: usize,
        #[arg(long, default_value_t = 10_000)]
        max_iter: usize,
    },
    /// Upper bound for ω-limit sets, optionally audited along an orbit
    Omega {
        path: PathBuf,
        #[arg(long)]
        verify: bool,
        #[arg(long, default_value = "uniform")]
        x0: String,
        #[arg(long, default_value_t = 1000)]
        steps: usize,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// Write a named or seeded random operator
    Gen {
        #[arg(long, conflicts_with_all = ["m", "ell", "seed", "sparsity"])]
        named: Option<String>,
        #[arg(long, required_unless_present = "named")]
        m: Option<usize>,
        #[arg(long, required_unless_present = "named")]
        ell: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.0)]
        sparsity: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Simulate many random interior starts in parallel
    Ensemble {
        path: PathBuf,
        #[arg(long, default_value_t = 16)]
        starts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        steps: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Phi,
    Linear,
    Psi,
    Ratio,
}

/// Exit code 1 for domain findings; usage and parse errors use [`Usage`].
type Outcome = Result<bool, Usage>;

struct Usage(String);

impl<E: std::fmt::Display> From<E> for Usage {
    fn from(e: E) -> Self {
        Usage(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match Tolerances::from_env() {
        Ok(t) => set_tolerances(t),
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    // `gen` without --out writes the operator file itself to stdout
    let to_stdout = matches!(cli.command, Command::Gen { out: None, .. });
    if to_stdout {
        eprintln!("# {}", tolerances());
    } else {
        println!("# {}", tolerances());
    }
    match run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> Outcome {
    match command {
        Command::Validate { path } => cmd_validate(&path),
        Command::Classify { path } => cmd_classify(&path),
        Command::Canonical { path } => cmd_canonical(&path),
        Command::Simulate {
            path,
            x0,
            steps,
            stride,
            out,
            ternary,
            canonical,
            no_cycles,
            full,
            stop_on_boundary,
        } => {
            let Some(op) = load_operator(&path)? else {
                return Ok(false);
            };
            let x0 = parse_point(&x0, op.dim())?;
            let mut opts = SimulationOptions::new(steps);
            opts.stride = stride;
            opts.use_canonical = canonical;
            opts.detect_cycles = !(no_cycles || full);
            if full {
                opts.tol_conv = 0.0;
            }
            opts.stop_on_boundary = stop_on_boundary;
            let traj = simulate(&op, &x0, &opts)?;
            println!("steps: {}", traj.step_count);
            println!("recorded: {}", traj.points.len());
            println!("stop: {}", traj.stop);
            println!("final: {}", traj.points.last().unwrap());
            if let Some(out) = out {
                export_trajectory(&traj, &out)?;
                println!("csv: {}", out.display());
            }
            if let Some(t) = ternary {
                export_ternary(&traj, &t)?;
                println!("ternary: {}", t.display());
            }
            Ok(true)
        }
        Command::Lyapunov {
            path,
            family,
            params,
            x0,
            steps,
            tol,
        } => cmd_lyapunov(&path, family, params.as_deref(), &x0, steps, tol),
        Command::FixedPoints {
            path,
            numeric_seeds,
            max_iter,
        } => cmd_fixed_points(&path, numeric_seeds, max_iter),
        Command::Omega {
            path,
            verify,
            x0,
            steps,
            tol,
        } => cmd_omega(&path, verify, &x0, steps, tol),
        Command::Gen {
            named,
            m,
            ell,
            seed,
            sparsity,
            out,
        } => {
            let (tensor, meta): (HeredityTensor<f64>, _) = match named {
                Some(name) => {
                    let name: NamedOperator = name.parse()?;
                    let meta = BTreeMap::from([
                        ("name".to_string(), name.name().to_string()),
                        ("description".to_string(), name.description().to_string()),
                    ]);
                    (named_operator(name), meta)
                }
                None => {
                    let spec = GenSpec::new(m.unwrap(), ell.unwrap(), seed).with_sparsity(sparsity);
                    let meta = BTreeMap::from([(
                        "name".to_string(),
                        format!("random m={} ell={} seed={seed} sparsity={sparsity}", spec.m, spec.ell),
                    )]);
                    (random_operator(&spec)?, meta)
                }
            };
            let ell = classify(&tensor).ell();
            let doc = OperatorDocument::from_tensor(&tensor, ell, meta);
            match out {
                Some(out) => {
                    doc.write(&out)?;
                    println!("wrote: {}", out.display());
                }
                None => print!("{}", doc.to_text()),
            }
            Ok(true)
        }
        Command::Ensemble {
            path,
            starts,
            seed,
            steps,
        } => {
            let Some(op) = load_operator(&path)? else {
                return Ok(false);
            };
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x0s: Vec<SimplexPoint<f64>> = (0..starts)
                .map(|_| random_interior_point(op.dim(), 1e-6, &mut rng))
                .collect();
            let trajs = simulate_ensemble(&op, &x0s, &SimulationOptions::new(steps))?;
            for (n, (x0, t)) in x0s.iter().zip(&trajs).enumerate() {
                println!(
                    "start={n} x0={x0} steps={} stop={} final={}",
                    t.step_count,
                    t.stop,
                    t.points.last().unwrap()
                );
            }
            Ok(true)
        }
    }
}

fn read_tensor(path: &Path) -> Result<(OperatorDocument, HeredityTensor<f64>), Usage> {
    let doc = OperatorDocument::read(path)?;
    let tensor = doc.to_tensor()?;
    Ok((doc, tensor))
}

/// `Ok(None)` after printing the reason when the file is not a valid ℓ-Volterra operator.
fn load_operator(path: &Path) -> Result<Option<LVolterraOperator<f64>>, Usage> {
    let (doc, tensor) = read_tensor(path)?;
    match LVolterraOperator::new(tensor) {
        Ok(op) => {
            if let Some(ell) = doc.ell.filter(|&e| e != op.ell()) {
                println!("note: file declares ell={ell}, classification gives ell={}", op.ell());
            }
            Ok(Some(op))
        }
        Err(OperatorError::Invalid(report)) => {
            println!("valid: false");
            for v in &report.violations {
                println!("violation: {v}");
            }
            Ok(None)
        }
        Err(e) => {
            println!("error: {e}");
            Ok(None)
        }
    }
}

fn parse_point(text: &str, m: usize) -> Result<SimplexPoint<f64>, Usage> {
    let text = text.trim();
    if text.eq_ignore_ascii_case("uniform") {
        return Ok(SimplexPoint::uniform(m));
    }
    if let Some(i) = text.strip_prefix('e').and_then(|s| s.parse::<usize>().ok()) {
        if i == 0 || i > m {
            return Err(Usage(format!("vertex e{i} outside 1..={m}")));
        }
        return Ok(SimplexPoint::vertex(m, i - 1));
    }
    let coords = parse_list::<f64>(text, "x0")?;
    if coords.len() != m {
        return Err(Usage(format!("x0 has {} coordinates, expected {m}", coords.len())));
    }
    Ok(SimplexPoint::new(coords)?)
}

fn parse_list<V: std::str::FromStr>(text: &str, what: &str) -> Result<Vec<V>, Usage> {
    text.split(',')
        .map(|s| s.trim().parse::<V>().map_err(|_| Usage(format!("{what}: cannot parse {s:?}"))))
        .collect()
}

fn cmd_validate(path: &Path) -> Outcome {
    let (_, tensor) = read_tensor(path)?;
    let report = tensor.validate();
    println!("m: {}", tensor.dim());
    println!("valid: {}", report.is_valid());
    for v in &report.violations {
        println!("violation: {v}");
    }
    Ok(report.is_valid())
}

fn cmd_classify(path: &Path) -> Outcome {
    let (_, tensor) = read_tensor(path)?;
    let class = classify(&tensor);
    println!("class: {class}");
    let flags: Vec<_> = class
        .volterra_flags
        .iter()
        .enumerate()
        .filter(|(_, &f)| f)
        .map(|(k, _)| (k + 1).to_string())
        .collect();
    println!("volterra_coordinates: [{}]", flags.join(", "));
    for (k, w) in class.witnesses.iter().enumerate() {
        if let Some((i, j)) = w {
            println!("witness: k={} P[{},{},{}] > 0", k + 1, i + 1, j + 1, k + 1);
        }
    }
    if class.kind == ClassKind::NotEllVolterra {
        if let Some(perm) = volterra_first_permutation(&class) {
            let perm: Vec<_> = perm.iter().map(|i| (i + 1).to_string()).collect();
            println!("suggested_relabeling: [{}]", perm.join(", "));
        }
        return Ok(false);
    }
    Ok(true)
}

fn print_matrix(a: &InteractionMatrix<f64>) {
    for k in 0..a.dim() {
        let row: Vec<_> = a.row(k).iter().map(|v| format!("{v}")).collect();
        println!("A[{}]: [{}]", k + 1, row.join(", "));
    }
}

fn cmd_canonical(path: &Path) -> Outcome {
    let Some(op) = load_operator(path)? else {
        return Ok(false);
    };
    println!("m: {}", op.dim());
    println!("ell: {}", op.ell());
    print_matrix(op.matrix());
    let canon = op.canonical();
    for k in 0..op.dim() {
        for t in canon.residual_for(k) {
            println!("residual: k={} P[{},{},{}] = {}", k + 1, t.i + 1, t.j + 1, k + 1, t.value);
        }
    }
    Ok(true)
}

fn cmd_lyapunov(path: &Path, family: Family, params: Option<&str>, x0: &str, steps: usize, tol: f64) -> Outcome {
    let Some(op) = load_operator(path)? else {
        return Ok(false);
    };
    let (a, ell) = (op.matrix(), op.ell());
    let one_based = |v: usize, what: &str| {
        if v == 0 || v > op.dim() {
            Err(Usage(format!("{what} = {v} outside 1..={}", op.dim())))
        } else {
            Ok(v - 1)
        }
    };
    let fam = match family {
        Family::Phi | Family::Psi => {
            let p = match params {
                Some(text) => ExponentVector::new(parse_list(text, "params")?)?,
                None => {
                    let Some(k0) = check_thm1(a, ell) else {
                        println!("hypothesis: no row k <= ℓ of A is non-positive; pass --params");
                        return Ok(false);
                    };
                    p_delta_witness(a, ell, k0, 0.0)?.p
                }
            };
            if matches!(family, Family::Phi) {
                LyapunovFamily::Phi(p)
            } else {
                LyapunovFamily::Psi(p)
            }
        }
        Family::Linear => {
            let r = match params {
                Some(text) => text.trim().parse::<usize>().map_err(|_| Usage(format!("params: bad r {text:?}")))?,
                None => match check_thm2(a, ell) {
                    Some(w) => w.r,
                    None => {
                        println!("hypothesis: no r with a_ki < 0 for k <= r < i; pass --params");
                        return Ok(false);
                    }
                },
            };
            LyapunovFamily::Linear { r }
        }
        Family::Ratio => {
            let (p, q) = match params {
                Some(text) => match parse_list::<usize>(text, "params")?[..] {
                    [p, q] => (one_based(p, "p")?, one_based(q, "q")?),
                    _ => return Err(Usage("ratio params must be p,q".into())),
                },
                None => match check_thm4(a, ell).first() {
                    Some(pair) => (pair.p, pair.q),
                    None => {
                        println!("hypothesis: no dominated pair (p, q); pass --params");
                        return Ok(false);
                    }
                },
            };
            LyapunovFamily::Ratio { p, q }
        }
    };
    let x0 = parse_point(x0, op.dim())?;
    let report = empirical_lyapunov_check(&op, &fam, &x0, steps, tol)?;
    println!("family: {}", report.family);
    println!("monotone: {}", report.monotone);
    println!("violations: {}", report.violation_count);
    println!("worst_violation: {:e}", report.worst_violation);
    println!("first: {}", report.first);
    println!("last: {}", report.last);
    println!("samples: {}", report.samples);
    match report.limit {
        LimitEstimate::Converged(v) => println!("limit: {v}"),
        LimitEstimate::NotConverged { spread } => println!("limit: not-converged spread={spread:e}"),
        LimitEstimate::Diverged => println!("limit: diverged"),
    }
    if let Some(t) = report.truncated {
        println!("truncated: step={} coordinate={}", t.step, t.coordinate + 1);
    }
    Ok(report.monotone)
}

fn cmd_fixed_points(path: &Path, numeric_seeds: usize, max_iter: usize) -> Outcome {
    let Some(op) = load_operator(path)? else {
        return Ok(false);
    };
    for r in vertex_fixed_points(op.tensor()) {
        println!("{r}");
    }
    for r in enumerate_face_fixed_points(&op)? {
        println!("{r}");
    }
    if numeric_seeds > 0 {
        let mut opts = NumericOptions::new(numeric_seeds);
        opts.max_iter = max_iter;
        for r in numeric_fixed_points(&op, &opts) {
            println!("{r}");
        }
    }
    Ok(true)
}

fn cmd_omega(path: &Path, verify: bool, x0: &str, steps: usize, tol: f64) -> Outcome {
    let Some(op) = load_operator(path)? else {
        return Ok(false);
    };
    let est = omega_upper_bound(&op);
    let zeros: Vec<_> = est.zero_coordinates.iter().map(|c| format!("x_{}", c + 1)).collect();
    println!("zero_coordinates: [{}]", zeros.join(", "));
    match est.product_zero {
        Some(pb) => println!(
            "product_zero: x_1*...*x_{} = 0 (k0={} delta={})",
            op.ell(),
            pb.k0 + 1,
            pb.delta
        ),
        None => println!("product_zero: none"),
    }
    for j in &est.justification {
        println!("justification: {j}");
    }
    if !verify {
        return Ok(true);
    }
    let x0 = parse_point(x0, op.dim())?;
    let v = verify_omega_bound(&op, &est, &x0, steps, tol)?;
    println!("verify_steps: {}", v.steps);
    println!("final: {}", v.final_point);
    for c in &v.coordinates {
        print!("coordinate: x_{} final={:e} vanished={}", c.coordinate + 1, c.final_value, c.vanished);
        if let Some(d) = &c.decay {
            print!(" rho={} fitted_c={} bound_c={}", d.rho, d.fitted_c, d.bound_c);
        }
        println!();
    }
    if let Some(p) = &v.product {
        let exps: Vec<_> = p.exponents.iter().map(|e| e.to_string()).collect();
        println!(
            "product: k0={} delta={} exponents=[{}] certified_max_excess={:e}",
            p.k0 + 1,
            p.delta,
            exps.join(", "),
            p.certified_max_excess
        );
        println!(
            "plain_product: final={:e} exceedances={} max_excess={:e} below_tol_at={}",
            p.plain_product_final,
            p.plain_product_exceedances,
            p.plain_product_max_excess,
            p.plain_product_below_tol_at.map_or("never".to_string(), |s| s.to_string())
        );
    }
    let mut passed = v.passed();
    if let Some(r) = est.justification.iter().find_map(|j| match *j {
        Justification::GeometricDecay { r, .. } => Some(r),
        _ => None,
    }) {
        let mut opts = SimulationOptions::new(steps);
        opts.detect_cycles = false;
        let traj = simulate(&op, &x0, &opts)?;
        match partial_sum_check(&op, &traj, r) {
            Ok(sum) => println!("partial_sum: r={r} sum={sum} within_envelope=true"),
            Err(TrajectoryError::EnvelopeExceeded { sum, envelope }) => {
                println!("partial_sum: r={r} sum={sum} envelope={envelope} within_envelope=false");
                passed = false;
            }
            Err(e) => return Err(e.into()),
        }
    }
    for f in &v.failures {
        let coord = f.coordinate.map_or("product".to_string(), |c| format!("x_{}", c + 1));
        println!(
            "failure: step={} {coord} kind={:?} value={:e} bound={:e}",
            f.step, f.kind, f.value, f.bound
        );
    }
    println!("verified: {passed}");
    Ok(passed)
}
