use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use selfsim::boxoracle::{counts_csv, BoxCount, BoxOracle, GeometricSet, DEFAULT_BOX_BUDGET};
use selfsim::corpus::builtin;
use selfsim::entropy::{entropy_with, verify_theorem_with, word_counts, DEFAULT_SANDWICH_DEPTH};
use selfsim::ggdc::build_ggdc;
use selfsim::kernel::{compute_kernel_with, KernelJson, KernelOptions, KernelPresentation, DEFAULT_MAX_ELEMENTS};
use selfsim::render::{level_approximation_with, render_pgm, render_svg, SvgOptions, DEFAULT_CUBE_BUDGET};
use selfsim::saturate::saturate;
use selfsim::specdsl::load;
use selfsim::spectral::{spectral_radius_with, DimensionResult, SpectralOptions, DEFAULT_MAX_ITERATIONS};
use selfsim::{Error, ErrorKind};

#[derive(Parser)]
#[command(name = "selfsim", version, about = "Kernels, dimensions and entropy of k-self-similar sets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the k-kernel and subdivision matrix as JSON.
    Kernel(Common),
    /// Certified Hausdorff dimension log_k ρ(A).
    Dim(Common),
    /// Entropy enclosure with the word-count estimator table.
    Entropy(Common),
    /// Check dimension = entropy, the graph-directed construction and, for built-ins, the box oracle.
    Verify(Common),
    /// Build the graph-directed construction.
    Ggdc(Common),
    /// Draw a level-p approximation as SVG or PGM.
    Render(Common),
    /// Level-p cube counts N_p.
    Count(Common),
}

#[derive(Args)]
struct Common {
    /// A `.kss` file, a kernel JSON file, or `-` for standard input.
    input: Option<PathBuf>,
    /// Use a named built-in set instead of an input file.
    #[arg(long, conflicts_with = "input")]
    builtin: Option<String>,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    #[arg(short = 'p', long)]
    depth: Option<u32>,
    /// Cap on kernel elements, cubes and spectral iterations; overrides SELFSIM_BUDGET.
    #[arg(long)]
    budget: Option<usize>,
    /// Write the JSON result here instead of standard output.
    #[arg(long)]
    json: Option<PathBuf>,
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    dot: Option<PathBuf>,
    #[arg(long)]
    svg: Option<PathBuf>,
    #[arg(long)]
    pgm: Option<PathBuf>,
    /// PGM side length in pixels; a multiple of k^p.
    #[arg(long)]
    res: Option<u64>,
    /// Kernel element to render.
    #[arg(long, default_value_t = 0)]
    element: usize,
    /// Level-p positions fixing coordinates 3..d when rendering d ≥ 3.
    #[arg(long, value_delimiter = ',')]
    slice: Option<Vec<u64>>,
}

#[derive(Debug)]
enum Failure {
    Spec(String),
    Io(String),
    Lib(Error),
    /// The report has already been written.
    Verification,
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

type Outcome<T> = std::result::Result<T, Failure>;

struct Budget(Option<usize>);

impl Budget {
    fn resolve(flag: Option<usize>) -> Outcome<Self> {
        if flag.is_some() {
            return Ok(Budget(flag));
        }
        match std::env::var("SELFSIM_BUDGET") {
            Ok(v) => v
                .trim()
                .parse()
                .map(|b| Budget(Some(b)))
                .map_err(|_| Failure::Spec(format!("SELFSIM_BUDGET is not a count: `{v}`"))),
            Err(_) => Ok(Budget(None)),
        }
    }

    fn or(&self, default: usize) -> usize {
        self.0.unwrap_or(default)
    }
}

/// Where the kernel came from.
struct Loaded {
    name: String,
    kernel: KernelPresentation,
    geometric: Option<GeometricSet>,
    /// Present only for kernel JSON input.
    closure_violations: Option<Vec<String>>,
}

fn read_input(path: Option<&Path>) -> Outcome<(String, String)> {
    match path {
        None => read_stdin(),
        Some(p) if p.as_os_str() == "-" => read_stdin(),
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| Failure::Io(format!("{}: {e}", p.display())))?;
            Ok((p.display().to_string(), text))
        }
    }
}

fn read_stdin() -> Outcome<(String, String)> {
    let mut text = String::new();
    io::stdin().read_to_string(&mut text)?;
    Ok(("<stdin>".into(), text))
}

fn load_kernel(c: &Common, budget: &Budget) -> Outcome<Loaded> {
    let opts = KernelOptions {
        max_elements: budget.or(DEFAULT_MAX_ELEMENTS),
    };
    if let Some(name) = &c.builtin {
        let b = builtin(name)?;
        let kernel = compute_kernel_with(&saturate(&b.automaton()?), &opts)?;
        return Ok(Loaded {
            name: b.name.clone(),
            kernel,
            geometric: Some(GeometricSet::from(b)),
            closure_violations: None,
        });
    }
    let (name, text) = read_input(c.input.as_deref())?;
    if text.trim_start().starts_with('{') {
        let j: KernelJson = serde_json::from_str(&text).map_err(Error::from)?;
        let kernel = KernelPresentation::from_json(&j)?;
        if kernel.len() > opts.max_elements {
            return Err(Error::KernelOverflow { cap: opts.max_elements }.into());
        }
        let violations = kernel.closure_violations();
        return Ok(Loaded {
            name,
            kernel,
            geometric: None,
            closure_violations: Some(violations),
        });
    }
    let kernel = compute_kernel_with(&saturate(&load(&text)?), &opts)?;
    Ok(Loaded {
        name,
        kernel,
        geometric: None,
        closure_violations: None,
    })
}

/// Rejects hand-edited kernels outside `verify`.
fn trusted(l: &Loaded) -> Outcome<()> {
    match &l.closure_violations {
        Some(v) if !v.is_empty() => Err(Error::InvalidKernel(v.join("; ")).into()),
        _ => Ok(()),
    }
}

fn spectral_options(c: &Common, budget: &Budget) -> Outcome<SpectralOptions> {
    if !(c.tol.is_finite() && c.tol > 0.0 && c.tol < 1.0) {
        return Err(Failure::Spec(format!("tolerance must lie in (0, 1), got {}", c.tol)));
    }
    let mut opts = SpectralOptions::with_tol(c.tol);
    opts.max_iterations = budget.0.map_or(DEFAULT_MAX_ITERATIONS, |b| b as u64);
    Ok(opts)
}

/// Decimal places that resolve the tolerance with two digits to spare.
fn places(tol: f64) -> usize {
    ((-tol.log10()).ceil() as i64 + 2).clamp(6, 40) as usize
}

fn write_file(path: &Path, bytes: &[u8]) -> Outcome<()> {
    fs::write(path, bytes).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn emit(target: Option<&Path>, v: &Value) -> Outcome<()> {
    let mut text = serde_json::to_string_pretty(v).map_err(Error::from)?;
    text.push('\n');
    match target {
        Some(p) => write_file(p, text.as_bytes()),
        None => {
            io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn to_value<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("serializable")
}

fn cmd_kernel(c: &Common, budget: &Budget) -> Outcome<()> {
    let l = load_kernel(c, budget)?;
    trusted(&l)?;
    emit(c.json.as_deref(), &to_value(&l.kernel.to_json()))
}

fn cmd_dim(c: &Common, budget: &Budget) -> Outcome<()> {
    let opts = spectral_options(c, budget)?;
    let l = load_kernel(c, budget)?;
    trusted(&l)?;
    let rho = spectral_radius_with(l.kernel.matrix(), &opts)?;
    let dim = DimensionResult::new(rho, l.kernel.k(), l.kernel.d());
    let out = json!({
        "set": l.name,
        "elements": l.kernel.len(),
        "tolerance": format!("{:e}", c.tol),
        "dimension": to_value(&dim.to_json(places(c.tol))),
    });
    emit(c.json.as_deref(), &out)
}

fn cmd_entropy(c: &Common, budget: &Budget) -> Outcome<()> {
    let opts = spectral_options(c, budget)?;
    let l = load_kernel(c, budget)?;
    trusted(&l)?;
    let depth = c.depth.unwrap_or(10).max(1);
    let e = entropy_with(&l.kernel, &opts, depth)?;
    let counts = word_counts(&l.kernel, depth);
    let table: Vec<Value> = e
        .diagnostics
        .iter()
        .map(|d| {
            json!({
                "p": d.p,
                "words": counts[d.p as usize].to_string(),
                "direct": format!("{:.12}", d.direct),
                "ratio": format!("{:.12}", d.ratio),
            })
        })
        .collect();
    if let Some(path) = &c.csv {
        let mut s = String::from("p,words,direct,ratio\n");
        for d in &e.diagnostics {
            s.push_str(&format!("{},{},{:.12},{:.12}\n", d.p, counts[d.p as usize], d.direct, d.ratio));
        }
        write_file(path, s.as_bytes())?;
    }
    let ent = DimensionResult::new(e.rho, l.kernel.k(), l.kernel.d());
    let out = json!({
        "set": l.name,
        "counting_states": e.counting_states,
        "tolerance": format!("{:e}", c.tol),
        "entropy": to_value(&ent.to_json(places(c.tol))),
        "estimators": table,
    });
    emit(c.json.as_deref(), &out)
}

fn check(name: &str, ok: bool, detail: Value) -> Value {
    json!({ "check": name, "status": if ok { "PASS" } else { "FAIL" }, "detail": detail })
}

fn cmd_verify(c: &Common, budget: &Budget) -> Outcome<()> {
    let opts = spectral_options(c, budget)?;
    let l = load_kernel(c, budget)?;
    let kp = &l.kernel;
    let p = places(c.tol);
    let mut checks = Vec::new();

    if let Some(v) = &l.closure_violations {
        checks.push(check("kernel closure", v.is_empty(), json!(v)));
    }

    let depth = c.depth.unwrap_or(DEFAULT_SANDWICH_DEPTH);
    let (theorem, dimension) = match verify_theorem_with(kp, &opts, depth) {
        Ok(r) => (r, true),
        Err(Error::VerificationFailed(r)) => (*r, false),
        Err(e) => return Err(e.into()),
    };
    let entropy = DimensionResult::new(theorem.entropy.rho.clone(), kp.k(), kp.d());
    checks.push(check(
        "dimension equals entropy",
        dimension,
        json!({
            "dimension": to_value(&theorem.dimension.to_json(p)),
            "entropy": to_value(&entropy.to_json(p)),
            "sandwich_depth": theorem.sandwich_depth,
            "gelfand_gap": format!("{:e}", theorem.gelfand_gap),
            "violations": theorem.violations,
        }),
    ));

    let g = build_ggdc(kp);
    let v = g.validate();
    let rho_g = spectral_radius_with(&g.adjacency(), &opts)?;
    let transfer = rho_g.intersects(&theorem.dimension.rho);
    let mut issues = v.all();
    if !transfer {
        issues.push("rho of the graph adjacency misses rho(A)".into());
    }
    checks.push(check(
        "graph-directed construction",
        v.passed() && transfer,
        json!({
            "vertices": g.num_vertices(),
            "edges": g.num_edges(),
            "rho": to_value(&rho_g.to_json(p)),
            "violations": issues,
        }),
    ));

    if let Some(set) = &l.geometric {
        let mut oracle = BoxOracle::with_budget(set.clone(), budget.or(DEFAULT_BOX_BUDGET));
        let table = selfsim::entropy::cube_count_table(kp, 6);
        let mut rows = Vec::new();
        let mut agree = true;
        for q in 0..=6u32 {
            let n = oracle.cubes(q)?.len();
            let ours = &table[q as usize][0];
            agree &= ours == &n.into();
            rows.push(json!({ "p": q, "oracle": n.to_string(), "kernel": ours.to_string() }));
        }
        checks.push(check("box oracle", agree, json!(rows)));
    }

    let passed = checks.iter().all(|x| x["status"] == "PASS");
    let out = json!({
        "set": l.name,
        "status": if passed { "PASS" } else { "FAIL" },
        "checks": checks,
    });
    emit(c.json.as_deref(), &out)?;
    if passed {
        Ok(())
    } else {
        Err(Failure::Verification)
    }
}

fn cmd_ggdc(c: &Common, budget: &Budget) -> Outcome<()> {
    let opts = spectral_options(c, budget)?;
    let l = load_kernel(c, budget)?;
    trusted(&l)?;
    let g = build_ggdc(&l.kernel);
    if let Some(path) = &c.dot {
        write_file(path, g.to_dot().as_bytes())?;
    }
    let v = g.validate();
    let rho = spectral_radius_with(&g.adjacency(), &opts)?;
    let dim = DimensionResult::new(rho, g.k, g.d);
    let out = json!({
        "set": l.name,
        "graph": to_value(&g.to_json()),
        "validation": {
            "passed": v.passed(),
            "liveness": v.liveness,
            "seed_overlap": v.seed_overlap,
            "containment": v.containment,
            "cycle_ratio": v.cycle_ratio,
        },
        "dimension": to_value(&dim.to_json(places(c.tol))),
    });
    emit(c.json.as_deref(), &out)
}

fn cmd_render(c: &Common, budget: &Budget) -> Outcome<()> {
    let l = load_kernel(c, budget)?;
    trusted(&l)?;
    let depth = c.depth.unwrap_or(3);
    let cubes = level_approximation_with(&l.kernel, c.element, depth, budget.or(DEFAULT_CUBE_BUDGET))?;
    let svg_opts = SvgOptions { slice: c.slice.clone() };
    if let Some(path) = &c.pgm {
        let plane = match &c.slice {
            Some(fixed) if cubes.d > 2 => cubes.slice(fixed)?,
            _ => cubes.clone(),
        };
        let grid = plane.grid();
        let res = c.res.unwrap_or_else(|| grid * 256u64.div_ceil(grid).max(1));
        write_file(path, &render_pgm(&plane, res)?)?;
    }
    if let Some(path) = &c.svg {
        write_file(path, render_svg(&cubes, &svg_opts)?.as_bytes())?;
    }
    if c.svg.is_none() && c.pgm.is_none() {
        io::stdout().write_all(render_svg(&cubes, &svg_opts)?.as_bytes())?;
    }
    Ok(())
}

fn cmd_count(c: &Common, budget: &Budget) -> Outcome<()> {
    let l = load_kernel(c, budget)?;
    trusted(&l)?;
    let depth = c.depth.unwrap_or(6);
    let table = selfsim::entropy::cube_count_table(&l.kernel, depth);
    let counts: Vec<BoxCount> = table
        .iter()
        .zip(0..)
        .map(|(row, p)| BoxCount { p, count: row[0].clone() })
        .collect();
    if let Some(path) = &c.csv {
        write_file(path, counts_csv(&counts).as_bytes())?;
    }
    let rows: Vec<Value> = counts
        .iter()
        .map(|b| json!({ "p": b.p, "N_p": b.count.to_string() }))
        .collect();
    emit(c.json.as_deref(), &json!({ "set": l.name, "counts": rows }))
}

type Handler = fn(&Common, &Budget) -> Outcome<()>;

fn run(cli: Cli) -> Outcome<()> {
    let (c, f): (&Common, Handler) = match &cli.command {
        Command::Kernel(c) => (c, cmd_kernel),
        Command::Dim(c) => (c, cmd_dim),
        Command::Entropy(c) => (c, cmd_entropy),
        Command::Verify(c) => (c, cmd_verify),
        Command::Ggdc(c) => (c, cmd_ggdc),
        Command::Render(c) => (c, cmd_render),
        Command::Count(c) => (c, cmd_count),
    };
    let budget = Budget::resolve(c.budget)?;
    f(c, &budget)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verification) => {
            eprintln!("selfsim: verification failed");
            ExitCode::from(5)
        }
        Err(Failure::Spec(m)) | Err(Failure::Io(m)) => {
            eprintln!("selfsim: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Lib(e)) => {
            eprintln!("selfsim: {e}");
            ExitCode::from(match e.kind() {
                ErrorKind::Spec => 2,
                ErrorKind::Budget => 3,
                ErrorKind::Tolerance => 4,
                ErrorKind::Verification => 5,
            })
        }
    }
}
