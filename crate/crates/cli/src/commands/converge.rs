//! Convergence to the initial data along lines `x + vtθ`, and the optional
//! space–time norm draws.

use std::f64::consts::PI;

use elastowave::maximal_lab::{convergence_along_line, halving_ratios, space_time_norm_check, LineDeviation};
use elastowave::oracle::PlaneWaveSpec;
use elastowave::{LameParams, VectorField};
use nalgebra::DVector;
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{out_dir, pass, require, rng, seed};
use crate::config::{self, ConvergeConfig, DataConfig, SpaceTimeConfig};
use crate::data;
use crate::output::{num, OutDir};
use crate::{Common, Failure};

const PLANE_WAVE_TOL: f64 = 1e-12;
/// Relative `L²` deviation allowed at `t = 0`.
const ZERO_TIME_TOL: f64 = 1e-14;
/// Deviations below this fraction of `‖f‖` count as zero in ratio checks.
const NEGLIGIBLE: f64 = 1e-13;

fn direction(dim: usize, j: usize, count: usize) -> DVector<f64> {
    let a = 2.0 * PI * j as f64 / count as f64;
    let mut theta = DVector::zeros(dim);
    theta[0] = a.cos();
    theta[1] = a.sin();
    theta
}

/// `max_x |u − f|` for a plane wave, from its P and S parts.
fn plane_wave_deviation(spec: &PlaneWaveSpec, params: &LameParams, v: f64, theta: &DVector<f64>, t: f64) -> f64 {
    let r = spec.xi0().norm();
    let shift = v * theta.dot(spec.xi0());
    let (p, s) = spec.split();
    let gap = |c: f64| (Complex64::cis(t * (c * r + shift)) - 1.0).norm();
    (gap(params.p_speed()).powi(2) * p.norm_squared() + gap(params.s_speed()).powi(2) * s.norm_squared()).sqrt()
}

fn echo(v: &DVector<f64>) -> String {
    v.iter().map(|x| num(*x)).collect::<Vec<_>>().join(" ")
}

fn data_kind(d: &DataConfig) -> &'static str {
    match d {
        DataConfig::PlaneWave { .. } => "plane_wave",
        DataConfig::Gaussian { .. } => "gaussian",
        DataConfig::Random { .. } => "random",
        DataConfig::File { .. } => "file",
    }
}

struct Line {
    v: f64,
    j: usize,
    theta: DVector<f64>,
    zero: LineDeviation,
    devs: Vec<LineDeviation>,
}

pub fn run(common: &Common) -> Result<(), Failure> {
    let cfg: ConvergeConfig = config::load(common.config.as_deref())?;
    let grid = data::grid(&cfg.grid)?;
    let dim = grid.dim();
    require(!cfg.speeds.is_empty() && cfg.speeds.iter().all(|v| *v >= 0.0 && v.is_finite()), || {
        "speeds must be a nonempty list of finite values >= 0".into()
    })?;
    require(cfg.directions > 0, || "directions must be positive".into())?;
    require(
        !cfg.times.is_empty() && cfg.times.iter().all(|t| *t > 0.0 && t.is_finite())
            && cfg.times.windows(2).all(|w| w[1] < w[0]),
        || "times must be positive and strictly decreasing".into(),
    )?;
    require(cfg.halving_tolerance > 0.0, || "halving_tolerance must be positive".into())?;

    let needs_seed = cfg.data.is_random() || cfg.space_time.is_some();
    let seed = if needs_seed { Some(seed(common, cfg.seed)?) } else { None };
    let mut rng = seed.map(rng);
    let initial = data::build(&cfg.data, grid, rng.as_mut())?;
    let f = initial.field;
    let f_norm = f.l2_norm();

    let combos: Vec<(f64, usize)> =
        cfg.speeds.iter().flat_map(|&v| (0..cfg.directions).map(move |j| (v, j))).collect();
    // every request is validated up front so a bad grid fails before output
    convergence_along_line(&cfg.lame, &f, cfg.speeds[0], &direction(dim, 0, cfg.directions), &cfg.times)?;
    let lines: Vec<Line> = combos
        .par_iter()
        .map(|&(v, j)| {
            let theta = direction(dim, j, cfg.directions);
            let mut devs = convergence_along_line(&cfg.lame, &f, v, &theta, &[0.0])?;
            let zero = devs.remove(0);
            let devs = convergence_along_line(&cfg.lame, &f, v, &theta, &cfg.times)?;
            Ok(Line { v, j, theta, zero, devs })
        })
        .collect::<Result<_, elastowave::Error>>()?;

    let out = out_dir(common, cfg.out_dir.clone(), "converge")?;
    let mut report = out.report()?;
    report.row([
        "n", "points", "half_period", "lambda", "mu", "data", "seed", "v", "direction", "theta", "t",
        "max_deviation", "l2_deviation", "relative_l2", "halving_ratio", "closed_form_error", "pass",
    ])?;

    let seed_echo = seed.map(|s| s.to_string()).unwrap_or_default();
    let lo = 0.5 * (1.0 - cfg.halving_tolerance);
    let hi = 0.5 * (1.0 + cfg.halving_tolerance);
    let mut failures = Vec::new();
    for line in &lines {
        let ratios = halving_ratios(&line.devs);
        let mut plot = Vec::new();
        for (i, d) in std::iter::once(&line.zero).chain(&line.devs).enumerate() {
            let mut ok = true;
            let mut ratio_cell = String::new();
            let mut closed_cell = String::new();
            if d.t == 0.0 {
                ok = d.relative_l2 <= ZERO_TIME_TOL;
            } else if let Some(spec) = &initial.plane_wave {
                let err = (d.max_deviation - plane_wave_deviation(spec, &cfg.lame, line.v, &line.theta, d.t)).abs();
                closed_cell = num(err);
                ok = err <= PLANE_WAVE_TOL;
            } else if i >= 2 {
                let prev = &line.devs[i - 2];
                let halved = (d.t / prev.t - 0.5).abs() <= 1e-12;
                let negligible = prev.l2_deviation <= NEGLIGIBLE * f_norm;
                if halved && !negligible {
                    let r = ratios[i - 2];
                    ratio_cell = num(r);
                    ok = (lo..=hi).contains(&r);
                }
            }
            if !ok {
                failures.push(format!("v = {}, direction {}, t = {}: check failed", line.v, line.j, d.t));
            }
            plot.push(vec![d.t, d.max_deviation, d.l2_deviation, d.relative_l2]);
            report.row([
                dim.to_string(),
                grid.points().to_string(),
                num(grid.half_period()),
                num(cfg.lame.lambda()),
                num(cfg.lame.mu()),
                data_kind(&cfg.data).to_string(),
                seed_echo.clone(),
                num(line.v),
                line.j.to_string(),
                echo(&line.theta),
                num(d.t),
                num(d.max_deviation),
                num(d.l2_deviation),
                num(d.relative_l2),
                ratio_cell,
                closed_cell,
                pass(ok).to_string(),
            ])?;
        }
        out.plotdata(
            &format!("deviation_v{}_dir{}.dat", line.v, line.j),
            &["t", "max_deviation", "l2_deviation", "relative_l2"],
            &plot,
        )?;
    }
    report.finish()?;

    if let Some(st) = &cfg.space_time {
        let rng = rng.as_mut().expect("seeded when space_time is set");
        failures.extend(space_time(&out, &cfg.lame, grid, st, rng, seed.unwrap_or_default())?);
    }

    if failures.is_empty() {
        Ok(())
    } else {
        Err(Failure::Tolerance(failures.join("; ")))
    }
}

fn random_unit(rng: &mut ChaCha8Rng, dim: usize) -> DVector<f64> {
    loop {
        let v = DVector::from_fn(dim, |_, _| rng.random_range(-1.0..=1.0f64));
        let r = v.norm();
        if r > 1e-3 && r <= 1.0 {
            return v / r;
        }
    }
}

/// Writes `space_time.csv` and returns the failed checks.
fn space_time(
    out: &OutDir,
    params: &LameParams,
    grid: elastowave::TorusGrid,
    st: &SpaceTimeConfig,
    rng: &mut ChaCha8Rng,
    seed: u64,
) -> Result<Vec<String>, Failure> {
    require(st.draws >= 2, || "space_time.draws must be at least 2".into())?;
    require(st.v_max >= 0.0 && st.v_max.is_finite(), || "space_time.v_max must be finite and >= 0".into())?;
    let draws: Vec<(f64, DVector<f64>, VectorField)> = (0..st.draws)
        .map(|_| {
            let v = rng.random_range(0.0..=st.v_max);
            let theta = random_unit(rng, grid.dim());
            let f = VectorField::random_band_limited(grid, st.max_wavenumber, true, rng)?;
            Ok((v, theta, f))
        })
        .collect::<Result<_, elastowave::Error>>()?;
    let norms = draws
        .par_iter()
        .map(|(v, theta, f)| space_time_norm_check(params, f, *v, theta, st.t_count))
        .collect::<Result<Vec<_>, _>>()?;

    let path = out.root().join("space_time.csv");
    let io = |e: csv::Error| Failure::Io(format!("{}: {e}", path.display()));
    let mut w = csv::Writer::from_path(&path).map_err(io)?;
    w.write_record([
        "n", "points", "half_period", "lambda", "mu", "seed", "draw", "max_wavenumber", "t_count", "v", "theta",
        "ratio0", "ratio1", "simple_bound", "rigorous_bound", "pass",
    ])
    .map_err(io)?;
    let mut failures = Vec::new();
    for (i, ((v, theta, _), nm)) in draws.iter().zip(&norms).enumerate() {
        let simple = v + params.p_speed() + 1.0;
        let ok = nm.ratio1 <= simple && nm.ratio1 <= nm.ratio1_bound;
        if !ok {
            failures.push(format!(
                "draw {i}: ratio1 = {} exceeds min(v + c_p + 1 = {simple}, {})",
                nm.ratio1, nm.ratio1_bound
            ));
        }
        w.write_record([
            grid.dim().to_string(),
            grid.points().to_string(),
            num(grid.half_period()),
            num(params.lambda()),
            num(params.mu()),
            seed.to_string(),
            i.to_string(),
            st.max_wavenumber.to_string(),
            st.t_count.to_string(),
            num(*v),
            echo(theta),
            num(nm.ratio0),
            num(nm.ratio1),
            num(simple),
            num(nm.ratio1_bound),
            pass(ok).to_string(),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;

    let max = norms.iter().map(|n| n.ratio0).fold(f64::NEG_INFINITY, f64::max);
    let min = norms.iter().map(|n| n.ratio0).fold(f64::INFINITY, f64::min);
    let spread = max / min - 1.0;
    log::info!("space-time: ratio0 in [{min:.6}, {max:.6}], spread {spread:.2e}");
    if !(spread <= st.spread_tolerance) {
        failures.push(format!("ratio0 spread {spread:e} > {}", st.spread_tolerance));
    }
    Ok(failures)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn directions_are_unit_and_distinct() {
        let a = direction(3, 1, 8);
        assert!((a.norm() - 1.0).abs() < 1e-15);
        assert_eq!(a[2], 0.0);
        assert!((direction(2, 2, 8)[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn plane_wave_deviation_vanishes_when_shift_cancels_speed() {
        // transverse wave moving at c_s = 1 against a line moving at v = 1
        let spec = PlaneWaveSpec::new(
            DVector::from_vec(vec![1.0, 0.0]),
            DVector::from_vec(vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)]),
        )
        .unwrap();
        let p = LameParams::new(1.0, 1.0).unwrap();
        let theta = DVector::from_vec(vec![-1.0, 0.0]);
        assert!(plane_wave_deviation(&spec, &p, 1.0, &theta, 0.7) < 1e-15);
        let e1 = DVector::from_vec(vec![1.0, 0.0]);
        assert!((plane_wave_deviation(&spec, &p, 0.0, &e1, PI) - 2.0).abs() < 1e-15);
    }
}
