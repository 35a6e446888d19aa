//! The `igakit` command line.
//!
//! Every subcommand writes its main result as CSV and a short summary on
//! stdout. Failures print one line `error: kind=<kind> message=<text>` on
//! stderr and exit with 2 (invalid input), 3 (solver failure) or 4 (I/O).

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::assembly::Coefficient;
use crate::error::{Error, Result};
use crate::geometry::{bundled, load_geometry, save_geometry, MultiPatch, Side};
use crate::optimize::objectives::{poisson_energy, tm_eigenvalue};
use crate::optimize::{
    minimize_bounded, worst_case_direct, worst_case_linear, write_trace, DesignVector, MinimizeOptions, Objective,
    ShapeObjective,
};
use crate::postprocess::{multipole_coeffs, quadrupole_gradient, write_csv, write_vtk, FieldSampler, Quantity};
use crate::solve::{
    maxwell_eigs_2d, maxwell_eigs_3d, solve_poisson, BoundaryCondition, EigenOptions, Formulation, PhysicalConstants,
    Solution,
};
use crate::spaces::couple_scalar_multipatch;
use crate::splines::KnotVector;

/// Parsed and validated command line.
#[derive(Debug, Parser)]
#[command(name = "igakit", version, about = "Isogeometric analysis for electromagnetics")]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
    /// Single-threaded, bitwise reproducible run.
    #[arg(long, global = true)]
    pub deterministic: bool,
    /// Tolerance override `key=value`; keys: kernel, step, grad.
    #[arg(long = "tol", global = true, value_name = "KEY=VALUE")]
    pub tol: Vec<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample a B-spline basis on a knot vector.
    Basis(BasisArgs),
    /// Maxwell cavity eigenvalues.
    Eigs(EigsArgs),
    /// Magnetostatic Poisson problem.
    Poisson(PoissonArgs),
    /// Normal multipole coefficients on a reference circle.
    Multipole(MultipoleArgs),
    /// Control-point shape optimization.
    Optimize(OptimizeArgs),
}

#[derive(Debug, Args)]
pub struct Discretization {
    /// Geometry JSON file or bundled name (square, disc, cube, ...).
    #[arg(long)]
    pub geometry: String,
    /// Degree per direction, `p` or `p1,p2[,p3]`.
    #[arg(long, value_delimiter = ',', default_value = "2")]
    pub degree: Vec<usize>,
    /// Element subdivisions per direction.
    #[arg(long, value_delimiter = ',', default_value = "4")]
    pub refine: Vec<usize>,
}

#[derive(Debug, Args)]
pub struct BasisArgs {
    #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
    pub knots: Vec<f64>,
    #[arg(long)]
    pub degree: usize,
    #[arg(long, default_value_t = 201)]
    pub samples: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EigsArgs {
    #[command(flatten)]
    pub disc: Discretization,
    /// te2d, tm2d or curl3d.
    #[arg(long)]
    pub formulation: String,
    #[arg(long, default_value_t = 6)]
    pub count: usize,
    /// Metres per geometry unit; adds frequencies in Hz.
    #[arg(long)]
    pub length_scale: Option<f64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct PoissonSetup {
    /// Reluctivity per patch (one value for all).
    #[arg(long, value_delimiter = ',', default_value = "1", allow_hyphen_values = true)]
    pub nu: Vec<f64>,
    /// Source density per patch (one value for all).
    #[arg(long, value_delimiter = ',', default_value = "1", allow_hyphen_values = true)]
    pub source: Vec<f64>,
    /// `all`, `none` or a list like `0:d1_min,2:d2_max`.
    #[arg(long, default_value = "all")]
    pub dirichlet: String,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub dirichlet_value: f64,
}

#[derive(Debug, Args)]
pub struct PoissonArgs {
    #[command(flatten)]
    pub disc: Discretization,
    #[command(flatten)]
    pub setup: PoissonSetup,
    /// Samples per parametric direction and patch in the CSV export.
    #[arg(long, default_value_t = 11)]
    pub samples: usize,
    /// Physical point whose value is printed.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub probe: Option<Vec<f64>>,
    /// Also write `<stem>_patch<k>.vtk`.
    #[arg(long)]
    pub vtk: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct MultipoleArgs {
    /// Analytic field instead of a solve: dipole, quadrupole or zero.
    #[arg(long)]
    pub analytic: Option<String>,
    /// Strength of the analytic field.
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub strength: f64,
    /// Geometry to solve the Poisson problem on when no analytic field is
    /// given.
    #[arg(long)]
    pub geometry: Option<String>,
    #[arg(long, value_delimiter = ',', default_value = "2")]
    pub degree: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "4")]
    pub refine: Vec<usize>,
    #[command(flatten)]
    pub setup: PoissonSetup,
    #[arg(long)]
    pub r0: f64,
    #[arg(long, default_value_t = 6)]
    pub order: usize,
    #[arg(long, value_delimiter = ',', default_value = "0,0", allow_hyphen_values = true)]
    pub center: Vec<f64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct OptimizeArgs {
    #[command(flatten)]
    pub disc: Discretization,
    /// Design file: `{"entries": [{"patch", "point", "axis", "lower", "upper"}]}`.
    #[arg(long)]
    pub design: PathBuf,
    /// quadratic, tm-eigenvalue or poisson-energy.
    #[arg(long)]
    pub objective: String,
    /// Trace CSV.
    #[arg(long)]
    pub out: PathBuf,
    /// Optimized geometry JSON (default: trace path with `.json`).
    #[arg(long)]
    pub geometry_out: Option<PathBuf>,
    /// Also estimate the worst case, `s=<magnitude>`.
    #[arg(long)]
    pub worst_case: Option<String>,
}

/// Tolerances adjustable with `--tol`.
#[derive(Clone, Debug, PartialEq)]
pub struct Tolerances {
    pub kernel: f64,
    pub step: f64,
    pub grad: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        let m = MinimizeOptions::default();
        Self { kernel: crate::solve::KERNEL_TOL, step: m.step_tol, grad: m.grad_tol }
    }
}

impl Tolerances {
    pub fn parse(items: &[String]) -> Result<Self> {
        let mut t = Self::default();
        for item in items {
            let (key, value) = parse_key_value(item)?;
            let slot = match key {
                "kernel" => &mut t.kernel,
                "step" => &mut t.step,
                "grad" => &mut t.grad,
                other => {
                    return Err(Error::validation(format!("unknown tolerance key {other:?} (kernel, step, grad)")))
                }
            };
            if !(value > 0.0) {
                return Err(Error::validation(format!("tolerance {key} must be positive")));
            }
            *slot = value;
        }
        Ok(t)
    }
}

fn parse_key_value(item: &str) -> Result<(&str, f64)> {
    let (k, v) = item.split_once('=').ok_or_else(|| Error::validation(format!("expected key=value, got {item:?}")))?;
    let v = v.trim().parse().map_err(|_| Error::validation(format!("{k}: {v:?} is not a number")))?;
    Ok((k.trim(), v))
}

/// A bundled geometry name or a path to a geometry JSON file.
pub fn resolve_geometry(name: &str) -> Result<MultiPatch> {
    if Path::new(name).exists() {
        return load_geometry(name);
    }
    bundled(name).map_or_else(|| load_geometry(name), Ok)
}

fn fmt_num(v: f64) -> String {
    format!("{v:.16e}")
}

fn parse_dirichlet(spec: &str, mp: &MultiPatch) -> Result<Vec<(usize, Side)>> {
    match spec.trim() {
        "all" => Ok(mp.boundary_sides()),
        "none" => Ok(Vec::new()),
        list => list
            .split(',')
            .map(|item| {
                let (p, s) = item
                    .split_once(':')
                    .ok_or_else(|| Error::validation(format!("boundary entry {item:?} is not patch:side")))?;
                let p: usize = p.trim().parse().map_err(|_| Error::validation(format!("bad patch index {p:?}")))?;
                let side: Side = s.trim().parse()?;
                if !mp.boundary_sides().contains(&(p, side)) {
                    return Err(Error::validation(format!("{p}:{side} is not an outer boundary side")));
                }
                Ok((p, side))
            })
            .collect(),
    }
}

fn poisson_solution(mp: &MultiPatch, degree: &[usize], refine: &[usize], setup: &PoissonSetup) -> Result<Solution> {
    let space = couple_scalar_multipatch(mp, degree, refine)?;
    let nu: Vec<Coefficient> = setup.nu.iter().map(|&v| v.into()).collect();
    let source: Vec<Coefficient> = setup.source.iter().map(|&v| v.into()).collect();
    if nu.iter().any(|c| matches!(c, Coefficient::Constant(v) if !(*v > 0.0))) {
        return Err(Error::validation("reluctivity must be positive"));
    }
    let bc = BoundaryCondition { sides: parse_dirichlet(&setup.dirichlet, mp)?, value: setup.dirichlet_value.into() };
    solve_poisson(mp, &space, &nu, &source, &bc)
}

fn cmd_basis(a: &BasisArgs) -> Result<String> {
    let kv = KnotVector::new(a.knots.clone(), a.degree)?;
    if a.samples < 2 {
        return Err(Error::validation("need at least 2 samples"));
    }
    let n = kv.num_basis();
    let mut rows = Vec::with_capacity(a.samples);
    for i in 0..a.samples {
        let xi = i as f64 / (a.samples - 1) as f64;
        let mut row = vec![xi];
        row.extend(kv.eval(xi, 0)?.dense_row(0, n));
        rows.push(row);
    }
    let mut header = vec!["xi".to_owned()];
    header.extend((1..=n).map(|i| format!("B{i}")));
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    write_csv(&a.out, &header, &rows)?;
    Ok(format!("basis functions={n} samples={}\n", a.samples))
}

fn cmd_eigs(a: &EigsArgs, tol: &Tolerances) -> Result<String> {
    let mp = resolve_geometry(&a.disc.geometry)?;
    let formulation: Formulation = a.formulation.parse()?;
    let opts = EigenOptions { kernel_tol: tol.kernel, ..EigenOptions::default() };
    let modes = match formulation {
        Formulation::Curl3d => maxwell_eigs_3d(&mp, &a.disc.degree, &a.disc.refine, a.count, &opts)?,
        f => maxwell_eigs_2d(&mp, f, &a.disc.degree, &a.disc.refine, a.count, &opts)?,
    };
    let mut result = modes.result;
    if let Some(l) = a.length_scale {
        result = result.with_frequencies(&PhysicalConstants::default(), l)?;
    }
    let mut header = vec!["mode", "lambda", "residual"];
    if result.frequencies.is_some() {
        header.push("frequency_hz");
    }
    let rows: Vec<Vec<f64>> = (0..result.eigenvalues.len())
        .map(|i| {
            let mut r = vec![(i + 1) as f64, result.eigenvalues[i], result.residuals[i]];
            if let Some(f) = &result.frequencies {
                r.push(f[i]);
            }
            r
        })
        .collect();
    write_csv(&a.out, &header, &rows)?;
    let mut s = format!("formulation={formulation} kernel_count={}\n", result.kernel_count);
    for (i, l) in result.eigenvalues.iter().enumerate() {
        let _ = writeln!(s, "lambda[{}]={}", i + 1, fmt_num(*l));
    }
    Ok(s)
}

fn cmd_poisson(a: &PoissonArgs) -> Result<String> {
    let mp = resolve_geometry(&a.disc.geometry)?;
    let sol = poisson_solution(&mp, &a.disc.degree, &a.disc.refine, &a.setup)?;
    let sampler = FieldSampler::new(&sol)?;
    if a.samples < 2 {
        return Err(Error::validation("need at least 2 samples per direction"));
    }
    let d = mp.param_dim();
    let m = mp.phys_dim();
    let planar = d == 2 && m == 2;
    let mut header: Vec<String> = vec!["patch".into()];
    header.extend((1..=d).map(|i| format!("xi{i}")));
    header.extend(["x", "y", "z"].iter().take(m).map(|s| s.to_string()));
    header.push("u".into());
    if planar {
        header.extend(["bx", "by"].map(String::from));
    }
    let n = a.samples;
    let mut rows = Vec::new();
    for (k, patch) in mp.patches().iter().enumerate() {
        for flat in 0..n.pow(d as u32) {
            let xi: Vec<f64> = (0..d).map(|j| (flat / n.pow(j as u32) % n) as f64 / (n - 1) as f64).collect();
            let mut row = vec![k as f64];
            row.extend(&xi);
            row.extend(patch.eval_map(&xi)?);
            row.extend(sampler.sample_reference(k, &xi, Quantity::Value)?);
            if planar {
                row.extend(sampler.sample_reference(k, &xi, Quantity::Curl)?);
            }
            rows.push(row);
        }
    }
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    write_csv(&a.out, &header, &rows)?;
    let mut s = format!("dofs={} samples={}\n", sol.coefficients().len(), rows.len());
    if let Some(stem) = &a.vtk {
        let mut q = vec![("u", Quantity::Value)];
        if planar {
            q.push(("B", Quantity::Curl));
        }
        for f in write_vtk(&sampler, stem, n, &q)? {
            let _ = writeln!(s, "vtk={}", f.display());
        }
    }
    if let Some(p) = &a.probe {
        let u = sampler.sample(p, Quantity::Value)?[0];
        let _ = writeln!(s, "probe u={}", fmt_num(u));
    }
    Ok(s)
}

fn cmd_multipole(a: &MultipoleArgs) -> Result<String> {
    let center: [f64; 2] =
        a.center.as_slice().try_into().map_err(|_| Error::validation("center needs two coordinates"))?;
    let set = match (&a.analytic, &a.geometry) {
        (Some(kind), None) => {
            let s = a.strength;
            let field = |x: [f64; 2]| -> Result<[f64; 2]> {
                let (dx, dy) = (x[0] - center[0], x[1] - center[1]);
                Ok(match kind.as_str() {
                    "dipole" => [0.0, s],
                    "quadrupole" => [s * dy, s * dx],
                    _ => [0.0, 0.0],
                })
            };
            if !matches!(kind.as_str(), "dipole" | "quadrupole" | "zero") {
                return Err(Error::validation(format!("unknown analytic field {kind:?} (dipole, quadrupole, zero)")));
            }
            multipole_coeffs(field, center, a.r0, a.order)?
        }
        (None, Some(g)) => {
            let mp = resolve_geometry(g)?;
            let sol = poisson_solution(&mp, &a.degree, &a.refine, &a.setup)?;
            let sampler = FieldSampler::new(&sol)?;
            let field = |x: [f64; 2]| -> Result<[f64; 2]> {
                let b = sampler.sample(&x, Quantity::Curl)?;
                Ok([b[0], b[1]])
            };
            multipole_coeffs(field, center, a.r0, a.order)?
        }
        _ => return Err(Error::Usage("give exactly one of --analytic and --geometry".into())),
    };
    let rows: Vec<Vec<f64>> = set.normal.iter().enumerate().map(|(i, b)| vec![(i + 1) as f64, *b]).collect();
    write_csv(&a.out, &["n", "b_n"], &rows)?;
    let mut s = String::new();
    if set.normal.len() >= 2 {
        let _ = writeln!(s, "g={}", fmt_num(quadrupole_gradient(&set)?));
    }
    Ok(s)
}

fn parse_worst_case(spec: &str) -> Result<f64> {
    match parse_key_value(spec)? {
        ("s", v) if v > 0.0 => Ok(v),
        _ => Err(Error::validation(format!("--worst-case expects s=<positive>, got {spec:?}"))),
    }
}

fn cmd_optimize(a: &OptimizeArgs, tol: &Tolerances) -> Result<String> {
    let mp = resolve_geometry(&a.disc.geometry)?;
    let text = std::fs::read_to_string(&a.design).map_err(|e| Error::io(&a.design, e))?;
    let design = DesignVector::from_json(&mp, &text)?;
    if design.is_empty() {
        return Err(Error::validation("design file has no entries"));
    }
    let bounds = design.bounds();
    let worst = a.worst_case.as_deref().map(parse_worst_case).transpose()?;
    let (deg, refine) = (a.disc.degree.clone(), a.disc.refine.clone());
    let probe_design = worst.map(|s| design.with_margin(s)).transpose()?;
    let shape = |d: &DesignVector| -> Result<Box<dyn Objective>> {
        Ok(match a.objective.as_str() {
            "tm-eigenvalue" => Box::new(ShapeObjective::new(d.clone(), tm_eigenvalue(deg.clone(), refine.clone()))),
            "poisson-energy" => Box::new(ShapeObjective::new(d.clone(), poisson_energy(deg.clone(), refine.clone()))),
            _ => unreachable!("objective names are checked before"),
        })
    };
    let run = |obj: &dyn Objective, probe: &dyn Objective| -> Result<(Vec<f64>, String)> {
        let opts = MinimizeOptions { step_tol: tol.step, grad_tol: tol.grad, ..MinimizeOptions::default() };
        let x0 = vec![0.0; bounds.len()];
        let m = minimize_bounded(obj, &x0, &bounds, &opts)?;
        write_trace(&a.out, &m.trace)?;
        let mut s = format!("iterations={} termination={:?} f={}\n", m.iterations, m.termination, fmt_num(m.f));
        if let Some(r) = worst {
            let lin = worst_case_linear(probe, &m.x, r)?;
            let direct = worst_case_direct(probe, &m.x, r, 0)?;
            let path = a.out.with_extension("worst_case.csv");
            write_csv(&path, &["s", "wcs_linear", "wcs_direct"], &[vec![r, lin, direct.value]])?;
            let _ = writeln!(s, "wcs_linear={} wcs_direct={}", fmt_num(lin), fmt_num(direct.value));
        }
        Ok((m.x, s))
    };
    let (x, mut summary) = match a.objective.as_str() {
        "quadratic" => {
            let target: Vec<f64> = bounds.iter().map(|b| 0.25 * b[1]).collect();
            let f = |x: &[f64]| -> Result<f64> { Ok(x.iter().zip(&target).map(|(v, t)| (v - t).powi(2)).sum()) };
            run(&f, &f)?
        }
        "tm-eigenvalue" | "poisson-energy" => {
            let obj = shape(&design)?;
            match &probe_design {
                Some(p) => run(obj.as_ref(), shape(p)?.as_ref())?,
                None => run(obj.as_ref(), obj.as_ref())?,
            }
        }
        other => {
            return Err(Error::validation(format!(
                "unknown objective {other:?} (quadratic, tm-eigenvalue, poisson-energy)"
            )))
        }
    };
    let geometry_out = a.geometry_out.clone().unwrap_or_else(|| a.out.with_extension("json"));
    save_geometry(&design.apply(&x)?, &geometry_out)?;
    let _ = writeln!(summary, "geometry={}", geometry_out.display());
    Ok(summary)
}

/// Runs a parsed command and returns the stdout summary.
pub fn execute(config: &RunConfig) -> Result<String> {
    let tol = Tolerances::parse(&config.tol)?;
    faer::set_global_parallelism(faer::Par::Seq);
    if config.deterministic {
        // later calls fail harmlessly if a pool already exists
        let _ = rayon::ThreadPoolBuilder::new().num_threads(1).build_global();
    }
    match &config.command {
        Command::Basis(a) => cmd_basis(a),
        Command::Eigs(a) => cmd_eigs(a, &tol),
        Command::Poisson(a) => cmd_poisson(a),
        Command::Multipole(a) => cmd_multipole(a),
        Command::Optimize(a) => cmd_optimize(a, &tol),
    }
}

fn error_line(kind: &str, message: &str) -> String {
    let flat: Vec<&str> = message.split_whitespace().collect();
    format!("error: kind={kind} message={}", flat.join(" "))
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let config = match RunConfig::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("invalid arguments").trim_start_matches("error: ");
            eprintln!("{}", error_line("usage", first));
            return 2;
        }
    };
    match execute(&config) {
        Ok(summary) => {
            print!("{summary}");
            0
        }
        Err(e) => {
            eprintln!("{}", error_line(e.kind(), &e.to_string()));
            e.exit_code()
        }
    }
}
