//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails. Criteria backed by a command run the `elastowave` binary
//! and read its CSV output; the propagator criteria call the library.

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use elastowave::oracle::{leapfrog_reference, plane_wave_exact, scalar_half_wave, PlaneWaveSpec};
use elastowave::propagator::{cosine_solution, Flavor, PropagationRequest, Propagator};
use elastowave::{LameParams, TorusGrid, VectorField};
use nalgebra::DVector;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 20240917;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn workspace() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn config(name: &str) -> PathBuf {
    workspace().join("configs").join(name)
}

struct CliRun {
    code: Option<i32>,
    elapsed: Duration,
    stdout: String,
    stderr: String,
}

fn cli(args: &[&str], out: &Path) -> CliRun {
    let start = Instant::now();
    let output = Command::new(env!("CARGO_BIN_EXE_elastowave"))
        .args(args)
        .arg("--out")
        .arg(out)
        .arg("--quiet")
        .output()
        .expect("binary runs");
    CliRun {
        code: output.status.code(),
        elapsed: start.elapsed(),
        stdout: String::from_utf8_lossy(&output.stdout).into_owned(),
        stderr: String::from_utf8_lossy(&output.stderr).into_owned(),
    }
}

/// Rows of a CSV file as header-keyed maps.
struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    fn read(path: &Path) -> Table {
        let mut r = csv::Reader::from_path(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        let header = r.headers().expect("header").iter().map(String::from).collect();
        let rows = r.records().map(|rec| rec.expect("record").iter().map(String::from).collect()).collect();
        Table { header, rows }
    }

    fn col(&self, name: &str) -> usize {
        self.header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"))
    }

    fn get(&self, row: &[String], name: &str) -> String {
        row[self.col(name)].clone()
    }

    fn f(&self, row: &[String], name: &str) -> f64 {
        self.get(row, name).parse().unwrap_or_else(|_| panic!("column {name} is not a number"))
    }
}

/// Ordinary least squares slope of `y` against `x`.
fn ols_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

fn rel_max(a: &VectorField, b: &VectorField) -> f64 {
    a.sub(b).max_abs() / b.max_abs()
}

fn unit() -> LameParams {
    LameParams::new(1.0, 1.0).unwrap()
}

// 1, 2 ------------------------------------------------------------------

struct SymbolRun {
    run: CliRun,
    table: Table,
}

fn symbol_run(out: &Path) -> SymbolRun {
    let run = cli(&["symbol-check", "--config", config("symbol_check.json").to_str().unwrap()], out);
    let table = Table::read(&out.join("report.csv"));
    SymbolRun { run, table }
}

fn symbol_criterion(s: &SymbolRun, check: &str, limit: Duration) -> Outcome {
    let t = &s.table;
    let rows: Vec<&Vec<String>> = t.rows.iter().filter(|r| t.get(r, "check") == check).collect();
    let dims: Vec<String> = rows.iter().map(|r| t.get(r, "n")).collect();
    let worst = rows.iter().map(|r| t.f(r, "max_error")).fold(0.0, f64::max);
    let samples_ok = rows.iter().all(|r| t.f(r, "samples") >= 1e4);
    let pass = dims == ["2", "3"] && samples_ok && worst <= 1e-10 && s.run.elapsed < limit;
    outcome(pass, format!("max error {worst:.2e} over n = {dims:?}, command took {:.2?}", s.run.elapsed))
}

// 3 ---------------------------------------------------------------------

fn energy_conservation() -> Outcome {
    let start = Instant::now();
    let grid = TorusGrid::new(2, 64, PI).unwrap();
    let prop = Propagator::new(unit(), grid);
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let f = VectorField::random_band_limited(grid, 24, false, &mut rng).unwrap();
        let t = rng.random_range(-20.0..20.0);
        let u = prop.run(&PropagationRequest::at_rest(unit(), &f, t, Flavor::HalfWavePlus)).unwrap();
        worst = worst.max((u.l2_norm() / f.l2_norm() - 1.0).abs());
    }
    let elapsed = start.elapsed();
    outcome(worst <= 1e-12 && elapsed < Duration::from_secs(30), format!("max |ratio - 1| = {worst:.2e} in {elapsed:.2?}"))
}

// 4 ---------------------------------------------------------------------

fn plane_wave_exactness() -> Outcome {
    let p = LameParams::new(2.0, 0.5).unwrap();
    let mut worst: f64 = 0.0;
    // (n, wavenumber, longitudinal polarization, transverse polarization)
    #[allow(clippy::type_complexity)]
    let cases: [(usize, Vec<f64>, Vec<f64>, Vec<f64>); 4] = [
        (2, vec![3.0, 4.0], vec![0.6, 0.8], vec![-0.8, 0.6]),
        (2, vec![-5.0, 1.0], vec![-5.0, 1.0], vec![1.0, 5.0]),
        (3, vec![1.0, 2.0, 2.0], vec![1.0, 2.0, 2.0], vec![2.0, -1.0, 0.0]),
        (3, vec![0.0, -3.0, 1.0], vec![0.0, -3.0, 1.0], vec![1.0, 0.0, 0.0]),
    ];
    for (dim, xi, along, across) in cases {
        let grid = TorusGrid::new(dim, if dim == 2 { 32 } else { 16 }, PI).unwrap();
        let prop = Propagator::new(p, grid);
        for pol in [along, across] {
            let pol = DVector::from_vec(pol).normalize().map(|x| Complex64::new(x, 0.0));
            let spec = PlaneWaveSpec::new(DVector::from_vec(xi.clone()), pol).unwrap();
            let f = plane_wave_exact(&spec, &grid, &p, 0.0, Flavor::Cosine).unwrap();
            for flavor in [Flavor::HalfWavePlus, Flavor::HalfWaveMinus, Flavor::Cosine] {
                for t in [0.37, 2.9, -11.3] {
                    let u = prop.run(&PropagationRequest::at_rest(p, &f, t, flavor)).unwrap();
                    let exact = plane_wave_exact(&spec, &grid, &p, t, flavor).unwrap();
                    worst = worst.max(u.sub(&exact).max_abs());
                }
            }
        }
    }
    outcome(worst <= 1e-11, format!("max pointwise error {worst:.2e}"))
}

// 5 ---------------------------------------------------------------------

fn classical_reduction() -> Outcome {
    let p = LameParams::new(-1.5, 1.5).unwrap();
    assert!(p.is_classical_wave());
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 5);
    let mut worst: f64 = 0.0;
    for (dim, points, kmax) in [(2, 64, 20), (3, 16, 5)] {
        let grid = TorusGrid::new(dim, points, PI).unwrap();
        let f = VectorField::random_band_limited(grid, kmax, false, &mut rng).unwrap();
        for t in [0.5, 3.7] {
            let u = Propagator::new(p, grid).run(&PropagationRequest::at_rest(p, &f, t, Flavor::HalfWavePlus)).unwrap();
            let comps: Vec<Vec<Complex64>> =
                (0..dim).map(|c| scalar_half_wave(&grid, &f.component(c), p.s_speed(), t)).collect();
            let reference = VectorField::from_components(grid, &comps).unwrap();
            worst = worst.max(rel_max(&u, &reference));
        }
    }
    outcome(worst <= 1e-12, format!("max relative componentwise error {worst:.2e}"))
}

// 6 ---------------------------------------------------------------------

fn leapfrog_cross_validation() -> Outcome {
    let p = unit();
    let grid = TorusGrid::new(2, 64, PI).unwrap();
    // smooth, spectrally truncated Gaussian pair
    let raw = VectorField::from_fn(grid, |x| {
        let g1 = (-(x[0] * x[0] + x[1] * x[1]) / (2.0 * 0.5 * 0.5)).exp();
        let g2 = (-((x[0] - 1.0).powi(2) + (x[1] + 0.5).powi(2)) / (2.0 * 0.6 * 0.6)).exp();
        DVector::from_vec(vec![Complex64::new(g1, 0.0), Complex64::new(0.5 * g2, 0.0)])
    });
    let prop = Propagator::new(p, grid);
    let mut fh = prop.transformer().forward(&raw);
    fh.truncate(0.9 * grid.nyquist());
    let f = prop.transformer().inverse(&fh);
    let xi_max = fh.band_limit(1e-13);
    let dt = 0.5 / (p.p_speed() * xi_max);
    let exact = cosine_solution(&p, &f, 1.0).unwrap();
    let err = |dt: f64| leapfrog_reference(&p, &f, 1.0, dt).unwrap().sub(&exact).l2_norm() / exact.l2_norm();
    let (e1, e2) = (err(dt), err(dt / 2.0));
    let ratio = e1 / e2;
    outcome(
        e1 <= 1e-2 && (3.5..=4.5).contains(&ratio),
        format!("xi_max {xi_max:.2}, dt {dt:.4}: relative error {e1:.2e}, Richardson ratio {ratio:.3}"),
    )
}

// 7 - 11 ----------------------------------------------------------------

struct SharpnessRun {
    run: CliRun,
    table: Table,
}

fn sharpness_run(out: &Path) -> SharpnessRun {
    let run = cli(&["sharpness", "--config", config("sharpness_2d.json").to_str().unwrap()], out);
    let table = Table::read(&out.join("report.csv"));
    SharpnessRun { run, table }
}

const SCALES: [f64; 7] = [64.0, 128.0, 256.0, 512.0, 1024.0, 2048.0, 4096.0];
const ORDERS: [f64; 4] = [0.0, 0.25, 0.4, 0.5];

fn rows_for_s(t: &Table, s: f64) -> Vec<&Vec<String>> {
    t.rows.iter().filter(|r| t.f(r, "s") == s).collect()
}

fn covers_sweep(t: &Table) -> bool {
    ORDERS.iter().all(|&s| {
        let ns: Vec<f64> = rows_for_s(t, s).iter().map(|r| t.f(r, "N")).collect();
        ns == SCALES
    }) && t.rows.iter().all(|r| t.get(r, "n") == "2")
}

fn phase_bound(s: &SharpnessRun) -> Outcome {
    let t = &s.table;
    let worst = t.rows.iter().map(|r| t.f(r, "phase_max")).fold(0.0, f64::max);
    outcome(covers_sweep(t) && worst <= 0.25, format!("max |Phi| = {worst:.6} over N = 2^6..2^12"))
}

fn block_bound(s: &SharpnessRun) -> Outcome {
    let t = &s.table;
    // the column is already scaled by (alpha N)^{1/2}
    let worst = t.rows.iter().map(|r| t.f(r, "block_max")).fold(0.0, f64::max);
    outcome(covers_sweep(t) && worst <= 0.25, format!("max |(A-1, B)| (alpha N)^(1/2) = {worst:.8}"))
}

fn lower_bound(s: &SharpnessRun) -> Outcome {
    let t = &s.table;
    let rows: Vec<&Vec<String>> = rows_for_s(t, 0.0).into_iter().filter(|r| t.f(r, "N") >= 256.0).collect();
    let worst = rows.iter().map(|r| t.f(r, "re_u1_min") / t.f(r, "f_measure")).fold(f64::INFINITY, f64::min);
    outcome(rows.len() == 5 && worst >= 0.5, format!("min Re u1(x, t(x)) / |F| = {worst:.6} for N >= 2^8"))
}

fn sharpness_scaling(s: &SharpnessRun) -> Outcome {
    let t = &s.table;
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for &order in &ORDERS {
        let pts: Vec<(f64, f64)> =
            rows_for_s(t, order).iter().map(|r| (t.f(r, "N").log2(), t.f(r, "ratio").log2())).collect();
        let slope = ols_slope(&pts);
        worst = worst.max((slope - (0.5 - order)).abs());
        parts.push(format!("s={order}: {slope:.4}"));
    }
    let converged = t.rows.iter().all(|r| t.get(r, "converged") == "true");
    outcome(
        covers_sweep(t) && converged && worst <= 0.1 && s.run.code == Some(0),
        format!("{} (max deviation {worst:.2e}, converged {converged}, sweep took {:.1?})", parts.join(", "), s.run.elapsed),
    )
}

fn measure_scaling(s: &SharpnessRun) -> Outcome {
    let t = &s.table;
    let rows = rows_for_s(t, 0.0);
    let fit = |col: &str| ols_slope(&rows.iter().map(|r| (t.f(r, "N").log2(), t.f(r, col).log2())).collect::<Vec<_>>());
    let (f, e) = (fit("f_measure"), fit("e_measure"));
    outcome(
        (f - 1.5).abs() <= 0.02 && (e + 0.5).abs() <= 0.02,
        format!("|F| exponent {f:.4} (1.5), |E| exponent {e:.4} (-0.5)"),
    )
}

// 12, 13 ----------------------------------------------------------------

struct ConvergeRun {
    run: CliRun,
    report: Table,
    space_time: Table,
}

fn converge_run(out: &Path, threads: &str) -> ConvergeRun {
    let run = cli(&["converge", "--config", config("converge.json").to_str().unwrap(), "--threads", threads], out);
    ConvergeRun { run, report: Table::read(&out.join("report.csv")), space_time: Table::read(&out.join("space_time.csv")) }
}

fn space_time(c: &ConvergeRun) -> Outcome {
    let t = &c.space_time;
    let r0: Vec<f64> = t.rows.iter().map(|r| t.f(r, "ratio0")).collect();
    let spread = r0.iter().cloned().fold(f64::NEG_INFINITY, f64::max) / r0.iter().cloned().fold(f64::INFINITY, f64::min) - 1.0;
    let cp = unit().p_speed();
    let margin = t
        .rows
        .iter()
        .map(|r| t.f(r, "v") + cp + 1.0 - t.f(r, "ratio1"))
        .fold(f64::INFINITY, f64::min);
    let v_max = t.rows.iter().map(|r| t.f(r, "v")).fold(0.0, f64::max);
    outcome(
        t.rows.len() == 100 && spread <= 0.01 && margin >= 0.0 && v_max <= 4.0,
        format!("ratio0 spread {spread:.2e}, min (v + c_p + 1 - ratio1) = {margin:.3} over {} draws", t.rows.len()),
    )
}

fn lines(c: &ConvergeRun) -> Outcome {
    let t = &c.report;
    let ratios: Vec<(f64, f64, f64)> = t
        .rows
        .iter()
        .filter(|r| !t.get(r, "halving_ratio").is_empty())
        .map(|r| (t.f(r, "v"), t.f(r, "t"), t.f(r, "halving_ratio")))
        .collect();
    let speeds_ok = [0.0, 1.0, 3.0].iter().all(|&v| {
        let dirs: std::collections::BTreeSet<String> =
            t.rows.iter().filter(|r| t.f(r, "v") == v).map(|r| t.get(r, "direction")).collect();
        dirs.len() == 8
    });
    let reaches = ratios.iter().filter(|r| r.1 == f64::powi(2.0, -10)).count() == 24;
    let worst = ratios.iter().map(|r| (r.2 - 0.5).abs() / 0.5).fold(0.0, f64::max);
    outcome(
        speeds_ok && reaches && ratios.len() == 24 * 5 && worst <= 0.2 && c.run.code == Some(0),
        format!("{} halving ratios down to t = 2^-10, max relative departure from 1/2 {worst:.2e}", ratios.len()),
    )
}

// 14 --------------------------------------------------------------------

fn determinism(dir: &Path, conv: &ConvergeRun) -> Outcome {
    let a = dir.join("det_sc1");
    let b = dir.join("det_sc2");
    let sc = config("symbol_check.json");
    let sc = sc.to_str().unwrap();
    cli(&["symbol-check", "--config", sc, "--threads", "1"], &a);
    cli(&["symbol-check", "--config", sc, "--threads", "3"], &b);
    let c = dir.join("det_cv3");
    let other = converge_run(&c, "3");
    let same = |x: &Path, y: &Path| std::fs::read(x).ok().is_some_and(|bx| std::fs::read(y).ok() == Some(bx));
    let conv_dir = dir.join("converge");
    let pass = same(&a.join("report.csv"), &b.join("report.csv"))
        && same(&conv_dir.join("report.csv"), &c.join("report.csv"))
        && same(&conv_dir.join("space_time.csv"), &c.join("space_time.csv"))
        && conv.run.code == other.run.code;
    outcome(pass, "symbol-check (1 vs 3 threads) and converge (1 vs 3 threads) CSVs compared byte for byte")
}

fn main() {
    let dir = tempfile::tempdir().expect("temp dir");
    let root = dir.path();
    let mut results: Vec<(u32, &str, Outcome)> = Vec::new();
    let mut record = |id: u32, name: &'static str, f: &mut dyn FnMut() -> Outcome| {
        let o = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        });
        println!("criterion {id:>2} [{}] {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        results.push((id, name, o));
    };

    let sym = symbol_run(&root.join("symbol"));
    if sym.run.code != Some(0) {
        eprintln!("symbol-check exited with {:?}\n{}{}", sym.run.code, sym.run.stdout, sym.run.stderr);
    }
    record(1, "diagonalization identity", &mut || symbol_criterion(&sym, "diagonalization", Duration::from_secs(5)));
    record(2, "oracle agreement", &mut || symbol_criterion(&sym, "oracle", Duration::from_secs(10)));
    record(3, "energy conservation", &mut energy_conservation);
    record(4, "plane-wave exactness", &mut plane_wave_exactness);
    record(5, "classical-wave reduction", &mut classical_reduction);
    record(6, "leapfrog cross-validation", &mut leapfrog_cross_validation);

    let sharp = sharpness_run(&root.join("sharpness"));
    if sharp.run.code != Some(0) {
        eprintln!("sharpness exited with {:?}\n{}{}", sharp.run.code, sharp.run.stdout, sharp.run.stderr);
    }
    record(7, "phase bound", &mut || phase_bound(&sharp));
    record(8, "block bound", &mut || block_bound(&sharp));
    record(9, "lower bound", &mut || lower_bound(&sharp));
    record(10, "sharpness scaling", &mut || sharpness_scaling(&sharp));
    record(11, "measure scalings", &mut || measure_scaling(&sharp));

    let conv = converge_run(&root.join("converge"), "1");
    if conv.run.code != Some(0) {
        eprintln!("converge exited with {:?}\n{}{}", conv.run.code, conv.run.stdout, conv.run.stderr);
    }
    record(12, "space-time boundedness", &mut || space_time(&conv));
    record(13, "convergence along lines", &mut || lines(&conv));
    record(14, "determinism", &mut || determinism(root, &conv));

    let failed: Vec<u32> = results.iter().filter(|r| !r.2.pass).map(|r| r.0).collect();
    println!("{} of {} criteria passed", results.len() - failed.len(), results.len());
    if !failed.is_empty() {
        println!("failed: {failed:?}");
        std::process::exit(1);
    }
}
