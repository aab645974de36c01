//! Pointwise symbol checks on random frequencies.

use elastowave::lame_symbol::{
    conjugated_symbol, half_wave_multiplier, lame_symbol_matrix, partition_of_unity, rotation_field, Diagonalization,
};
use elastowave::oracle::multiplier_via_eigendecomposition;
use elastowave::{FrequencyPoint, LameParams, Sign};
use nalgebra::DVector;
use rand::Rng;
use rayon::prelude::*;

use super::{out_dir, pass, require, rng, seed};
use crate::config::{self, SymbolCheckConfig};
use crate::output::num;
use crate::{Common, Failure};

const CHECKS: [&str; 5] = ["diagonalization", "square_root", "oracle", "unitarity", "partition"];

struct Sample {
    xi: FrequencyPoint,
    t: f64,
    v: f64,
    theta: DVector<f64>,
}

/// Errors of one sample, in the order of [`CHECKS`].
fn errors(params: &LameParams, s: &Sample) -> [f64; 5] {
    let n = s.xi.dim();
    let l = lame_symbol_matrix(params, &s.xi);
    let lnorm = l.norm();

    let diagonalization = Sign::BOTH
        .into_iter()
        .filter(|&sign| rotation_field(sign, &s.xi).is_ok())
        .map(|sign| {
            let m = conjugated_symbol(params, sign, &s.xi).expect("sign admissible");
            (m - &l).norm() / lnorm
        })
        .fold(0.0, f64::max);

    let root = Diagonalization::new(&s.xi).square_root(params, n);
    let square_root = (&root * &root - &l).norm() / lnorm;

    let mut e1 = DVector::zeros(n);
    e1[0] = 1.0;
    let assembled = half_wave_multiplier(params, &s.xi, s.t, 0.0, &e1).matrix;
    let oracle = (assembled - multiplier_via_eigendecomposition(params, &s.xi, s.t)).norm();

    let unitarity = half_wave_multiplier(params, &s.xi, s.t, s.v, &s.theta).unitarity_defect();

    let omega = s.xi.direction().expect("nonzero sample");
    let (wp, wm) = partition_of_unity(&omega);
    let mut partition = (wp + wm - 1.0).abs();
    if !(0.0..=1.0).contains(&wp) || !(0.0..=1.0).contains(&wm) {
        partition = f64::INFINITY;
    }

    [diagonalization, square_root, oracle, unitarity, partition]
}

fn draw<R: Rng>(rng: &mut R, dim: usize, max_frequency: f64, max_time: f64) -> Sample {
    let xi = loop {
        let v = DVector::from_fn(dim, |_, _| rng.random_range(-max_frequency..=max_frequency));
        if v.norm() > 0.0 {
            break FrequencyPoint::new(v).expect("finite sample");
        }
    };
    let theta = loop {
        let v = DVector::from_fn(dim, |_, _| rng.random_range(-1.0..=1.0f64));
        let r = v.norm();
        if r > 1e-3 && r <= 1.0 {
            break v / r;
        }
    };
    Sample { xi, t: rng.random_range(-max_time..=max_time), v: rng.random_range(0.0..=4.0), theta }
}

pub fn run(common: &Common) -> Result<(), Failure> {
    let cfg: SymbolCheckConfig = config::load(common.config.as_deref())?;
    let seed = seed(common, cfg.seed)?;
    require(cfg.samples > 0, || "samples must be positive".into())?;
    require(cfg.max_frequency > 0.0 && cfg.max_frequency.is_finite(), || "max_frequency must be positive".into())?;
    require(cfg.max_time >= 0.0 && cfg.max_time.is_finite(), || "max_time must be finite and >= 0".into())?;
    require(cfg.tolerance > 0.0, || "tolerance must be positive".into())?;
    require(!cfg.dims.is_empty() && cfg.dims.iter().all(|&d| (2..=3).contains(&d)), || {
        format!("dims must be a nonempty subset of {{2, 3}}, got {:?}", cfg.dims)
    })?;

    let out = out_dir(common, cfg.out_dir.clone(), "symbol-check")?;
    let mut report = out.report()?;
    report.row([
        "n", "lambda", "mu", "check", "samples", "max_frequency", "max_time", "seed", "max_error", "tolerance", "pass",
    ])?;

    let mut rng = rng(seed);
    let mut failures = Vec::new();
    for &dim in &cfg.dims {
        let samples: Vec<Sample> =
            (0..cfg.samples).map(|_| draw(&mut rng, dim, cfg.max_frequency, cfg.max_time)).collect();
        let per_sample: Vec<[f64; 5]> = samples.par_iter().map(|s| errors(&cfg.lame, s)).collect();
        for (c, name) in CHECKS.iter().enumerate() {
            let max = per_sample.iter().map(|e| e[c]).fold(0.0, f64::max);
            let ok = max <= cfg.tolerance;
            log::info!("n={dim} {name:<16} max error {max:.3e} ({})", if ok { "ok" } else { "FAIL" });
            if !ok {
                failures.push(format!("n={dim} {name}: {max:e} > {:e}", cfg.tolerance));
            }
            report.row([
                dim.to_string(),
                num(cfg.lame.lambda()),
                num(cfg.lame.mu()),
                name.to_string(),
                cfg.samples.to_string(),
                num(cfg.max_frequency),
                num(cfg.max_time),
                seed.to_string(),
                num(max),
                num(cfg.tolerance),
                pass(ok).to_string(),
            ])?;
        }
    }
    report.finish()?;
    if failures.is_empty() {
        Ok(())
    } else {
        Err(Failure::Tolerance(failures.join("; ")))
    }
}
