use std::path::Path;
use std::process::{Command, Output};

use igakit::postprocess::read_csv;

fn igakit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_igakit")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = igakit(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn path(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().unwrap().to_owned()
}

fn column(header: &[String], name: &str) -> usize {
    header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name} in {header:?}"))
}

#[test]
fn exit_codes_and_error_line() {
    let dir = tempfile::tempdir().unwrap();
    let out = path(dir.path(), "x.csv");
    let cases: [(&[&str], i32, &str); 6] = [
        (&["eigs", "--geometry", "disc", "--formulation", "nope", "--out", &out], 2, "validation"),
        (&["eigs", "--geometry", "disc", "--formulation", "tm2d", "--count", "x", "--out", &out], 2, "usage"),
        (&["frobnicate"], 2, "usage"),
        (&["--tol", "speed=1", "basis", "--knots", "0,0,1,1", "--degree", "1", "--out", &out], 2, "validation"),
        (&["eigs", "--geometry", "/no/such/file.json", "--formulation", "tm2d", "--out", &out], 4, "io"),
        (&["poisson", "--geometry", "square", "--dirichlet", "none", "--out", &out], 3, "solver"),
    ];
    for (args, code, kind) in cases {
        let o = igakit(args);
        assert_eq!(o.status.code(), Some(code), "{args:?}");
        let err = String::from_utf8(o.stderr).unwrap();
        assert_eq!(err.lines().count(), 1, "{err}");
        assert!(err.starts_with(&format!("error: kind={kind} message=")), "{err}");
    }
    assert_eq!(igakit(&["--help"]).status.code(), Some(0));
}

#[test]
fn basis_hat_functions() {
    let dir = tempfile::tempdir().unwrap();
    let out = path(dir.path(), "b.csv");
    ok(&[
        "basis",
        "--knots",
        "0,0,0.3333333333333333,0.6666666666666666,1,1",
        "--degree",
        "1",
        "--samples",
        "301",
        "--out",
        &out,
    ]);
    let (header, rows) = read_csv(&out).unwrap();
    assert_eq!(header.len(), 5);
    for j in 1..5 {
        let peak = rows.iter().map(|r| r[j]).fold(0.0, f64::max);
        assert!((peak - 1.0).abs() < 1e-12, "B{j} peaks at {peak}");
    }
    for r in &rows {
        assert!((r[1..].iter().sum::<f64>() - 1.0).abs() < 1e-14);
    }
}

#[test]
fn basis_kink_at_double_knot() {
    let dir = tempfile::tempdir().unwrap();
    let out = path(dir.path(), "b.csv");
    ok(&["basis", "--knots", "0,0,0,.2,.4,.4,.6,.8,1,1,1", "--degree", "2", "--samples", "501", "--out", &out]);
    let (_, rows) = read_csv(&out).unwrap();
    let i = rows.iter().position(|r| (r[0] - 0.4).abs() < 1e-12).unwrap();
    let slope = |a: usize, b: usize, j: usize| (rows[b][j] - rows[a][j]) / (rows[b][0] - rows[a][0]);
    // the function peaking at the double knot changes slope sign there
    let j = (1..rows[0].len()).max_by(|&a, &b| rows[i][a].total_cmp(&rows[i][b])).unwrap();
    assert!((rows[i][j] - 1.0).abs() < 1e-14);
    assert!(slope(i - 1, i, j) > 1.0 && slope(i, i + 1, j) < -1.0);
}

#[test]
fn disc_tm_eigenvalue() {
    let dir = tempfile::tempdir().unwrap();
    let out = path(dir.path(), "e.csv");
    let stdout = ok(&[
        "eigs",
        "--geometry",
        "disc",
        "--formulation",
        "tm2d",
        "--degree",
        "3",
        "--refine",
        "16",
        "--count",
        "2",
        "--length-scale",
        "0.1",
        "--out",
        &out,
    ]);
    assert!(stdout.contains("kernel_count=0"));
    let (header, rows) = read_csv(&out).unwrap();
    assert_eq!(header, ["mode", "lambda", "residual", "frequency_hz"]);
    assert!((rows[0][1] - 5.7832).abs() < 1e-4 && (rows[0][1] - 5.783185963).abs() < 1e-5);
    assert!(rows[0][2] < 1e-8);
    // c j01 / (2 pi 0.1 m)
    assert!((rows[0][3] / 1.1474e9 - 1.0).abs() < 1e-4, "{}", rows[0][3]);
}

#[test]
fn square_te_spectrum() {
    let dir = tempfile::tempdir().unwrap();
    let out = path(dir.path(), "e.csv");
    let stdout = ok(&[
        "eigs",
        "--geometry",
        "square",
        "--formulation",
        "te2d",
        "--degree",
        "2",
        "--refine",
        "8",
        "--count",
        "8",
        "--out",
        &out,
    ]);
    assert!(stdout.contains("kernel_count="));
    let (_, rows) = read_csv(&out).unwrap();
    let pi2 = std::f64::consts::PI.powi(2);
    for (r, m) in rows.iter().zip([1.0, 1.0, 2.0, 4.0, 4.0, 5.0, 5.0, 8.0]) {
        assert!((r[1] / (m * pi2) - 1.0).abs() < 1e-2, "{} vs {m} pi^2", r[1]);
    }
}

#[test]
fn cube_lowest_mode() {
    let dir = tempfile::tempdir().unwrap();
    let out = path(dir.path(), "e.csv");
    ok(&[
        "eigs",
        "--geometry",
        "cube",
        "--formulation",
        "curl3d",
        "--degree",
        "2",
        "--refine",
        "4",
        "--count",
        "3",
        "--out",
        &out,
    ]);
    let (_, rows) = read_csv(&out).unwrap();
    let two_pi2 = 2.0 * std::f64::consts::PI.powi(2);
    for r in &rows {
        assert!((r[1] / two_pi2 - 1.0).abs() < 1e-2);
    }
}

#[test]
fn poisson_probe_and_exports() {
    let dir = tempfile::tempdir().unwrap();
    let out = path(dir.path(), "p.csv");
    let stem = path(dir.path(), "field");
    let stdout = ok(&[
        "poisson",
        "--geometry",
        "disc",
        "--degree",
        "3",
        "--refine",
        "8",
        "--probe",
        "0,0",
        "--vtk",
        &stem,
        "--out",
        &out,
    ]);
    let u: f64 = stdout.lines().find_map(|l| l.strip_prefix("probe u=")).unwrap().parse().unwrap();
    assert!((u - 0.25).abs() < 1e-5, "{u}");
    let (header, rows) = read_csv(&out).unwrap();
    assert_eq!(header, ["patch", "xi1", "xi2", "x", "y", "u", "bx", "by"]);
    assert_eq!(rows.len(), 5 * 11 * 11);
    for k in 0..5 {
        let text = std::fs::read_to_string(format!("{stem}_patch{k}.vtk")).unwrap();
        igakit::postprocess::parse_vtk(&text).unwrap();
    }
}

#[test]
fn poisson_zero_source_gives_zero_field() {
    let dir = tempfile::tempdir().unwrap();
    let out = path(dir.path(), "p.csv");
    ok(&["poisson", "--geometry", "square", "--source", "0", "--out", &out]);
    let (header, rows) = read_csv(&out).unwrap();
    let (u, bx, by) = (column(&header, "u"), column(&header, "bx"), column(&header, "by"));
    assert!(rows.iter().all(|r| r[u] == 0.0 && r[bx] == 0.0 && r[by] == 0.0));
}

#[test]
fn two_material_flux_continuity() {
    let dir = tempfile::tempdir().unwrap();
    let out = path(dir.path(), "p.csv");
    ok(&[
        "poisson",
        "--geometry",
        "annulus-layered",
        "--degree",
        "2",
        "--refine",
        "4",
        "--nu",
        "1,1,1,1,5,5,5,5",
        "--samples",
        "9",
        "--out",
        &out,
    ]);
    let (header, rows) = read_csv(&out).unwrap();
    let [p, xi1, xi2, x, y, bx, by] = ["patch", "xi1", "xi2", "x", "y", "bx", "by"].map(|c| column(&header, c));
    let mut checked = 0;
    let mut worst = 0.0f64;
    // inner ring q at xi1 = 1 meets outer ring q + 4 at xi1 = 0
    for inner in rows.iter().filter(|r| r[p] < 4.0 && r[xi1] == 1.0) {
        let outer = rows.iter().find(|r| r[p] == inner[p] + 4.0 && r[xi1] == 0.0 && r[xi2] == inner[xi2]).unwrap();
        assert!((inner[x] - outer[x]).abs() < 1e-14 && (inner[y] - outer[y]).abs() < 1e-14);
        let r = inner[x].hypot(inner[y]);
        let bn = |row: &Vec<f64>| (row[bx] * row[x] + row[by] * row[y]) / r;
        worst = worst.max((bn(inner) - bn(outer)).abs());
        checked += 1;
    }
    assert_eq!(checked, 4 * 9);
    assert!(worst < 1e-6, "normal flux jumps by {worst}");
}

#[test]
fn multipole_quadrupole() {
    let dir = tempfile::tempdir().unwrap();
    let out = path(dir.path(), "m.csv");
    let stdout =
        ok(&["multipole", "--analytic", "quadrupole", "--strength", "2", "--r0", "0.5", "--order", "6", "--out", &out]);
    let g: f64 = stdout.lines().find_map(|l| l.strip_prefix("g=")).unwrap().parse().unwrap();
    assert!((g - 2.0 * 2.0 / 0.5).abs() < 1e-10);
    let (header, rows) = read_csv(&out).unwrap();
    assert_eq!(header, ["n", "b_n"]);
    for r in &rows {
        if r[0] == 2.0 {
            assert!((r[1] - 1.0).abs() < 1e-12);
        } else {
            assert!(r[1].abs() < 1e-10);
        }
    }
    ok(&["multipole", "--analytic", "zero", "--r0", "1", "--out", &out]);
    let (_, rows) = read_csv(&out).unwrap();
    assert!(rows.iter().all(|r| r[1] == 0.0));
    assert_eq!(igakit(&["multipole", "--r0", "1", "--out", &out]).status.code(), Some(2));
}

fn design_file(dir: &Path) -> String {
    let design = path(dir, "design.json");
    std::fs::write(&design, r#"{"entries":[{"patch":1,"point":3,"axis":"x","lower":-0.1,"upper":0.1}]}"#).unwrap();
    design
}

#[test]
fn optimize_disc_eigenvalue() {
    let dir = tempfile::tempdir().unwrap();
    let design = design_file(dir.path());
    let trace = path(dir.path(), "trace.csv");
    let geo = path(dir.path(), "best.json");
    let args = [
        "optimize",
        "--geometry",
        "disc",
        "--design",
        &design,
        "--objective",
        "tm-eigenvalue",
        "--degree",
        "2",
        "--refine",
        "4",
        "--out",
        &trace,
        "--geometry-out",
        &geo,
    ];
    ok(&args);
    let (header, rows) = read_csv(&trace).unwrap();
    assert_eq!(header, ["iteration", "x1", "f"]);
    assert!(rows.len() >= 2);
    assert!(rows.windows(2).all(|w| w[1][2] <= w[0][2]));
    // pushing the boundary outward lowers the eigenvalue
    assert!(rows.last().unwrap()[1] > 0.0);
    let reloaded = igakit::geometry::load_geometry(&geo).unwrap();
    let eig = path(dir.path(), "e.csv");
    ok(&[
        "eigs",
        "--geometry",
        &geo,
        "--formulation",
        "tm2d",
        "--degree",
        "2",
        "--refine",
        "4",
        "--count",
        "1",
        "--out",
        &eig,
    ]);
    let (_, e) = read_csv(&eig).unwrap();
    assert_eq!(e[0][1], rows.last().unwrap()[2]);
    assert_eq!(reloaded.patches().len(), 5);
}

#[test]
fn optimize_quadratic_and_worst_case() {
    let dir = tempfile::tempdir().unwrap();
    let design = design_file(dir.path());
    let trace = path(dir.path(), "q.csv");
    ok(&["optimize", "--geometry", "disc", "--design", &design, "--objective", "quadratic", "--out", &trace]);
    let (_, rows) = read_csv(&trace).unwrap();
    let last = rows.last().unwrap();
    assert!((last[1] - 0.025).abs() < 1e-6 && last[2] < 1e-10);

    let trace = path(dir.path(), "w.csv");
    let stdout = ok(&[
        "optimize",
        "--geometry",
        "disc",
        "--design",
        &design,
        "--objective",
        "poisson-energy",
        "--degree",
        "2",
        "--refine",
        "2",
        "--worst-case",
        "s=0.1",
        "--out",
        &trace,
    ]);
    assert!(stdout.contains("wcs_linear=") && stdout.contains("wcs_direct="));
    let (header, rows) = read_csv(dir.path().join("w.worst_case.csv")).unwrap();
    assert_eq!(header, ["s", "wcs_linear", "wcs_direct"]);
    assert!(rows[0][1] > 0.0 && rows[0][2] > 0.0);
    assert_eq!(
        igakit(&["optimize", "--geometry", "disc", "--design", &design, "--objective", "x", "--out", &trace])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn geometry_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    for name in igakit::geometry::bundled_names() {
        let mp = igakit::geometry::bundled(name).unwrap();
        let file = dir.path().join(format!("{name}.json"));
        igakit::geometry::save_geometry(&mp, &file).unwrap();
        assert_eq!(igakit::geometry::load_geometry(&file).unwrap(), mp, "{name}");
    }
}
