//! Sharpness sweep over dyadic `N` and Sobolev orders `s`.

use elastowave::maximal_lab::{fit_slope, ratio_sweeps, ExperimentReport};
use elastowave::SharpnessConfig;

use super::{out_dir, pass, require};
use crate::config::{self, SharpnessRunConfig};
use crate::output::{num, tag};
use crate::{Common, Failure};

const PHASE_LIMIT: f64 = 0.25;
const BLOCK_LIMIT: f64 = 0.25;
const MEASURE_SLOPE_TOL: f64 = 0.02;

/// One config per `N`, all validated before any computation starts.
fn validated_configs(run: &SharpnessRunConfig) -> Result<Vec<SharpnessConfig>, Failure> {
    require(run.augment_critical_times, || {
        "augment_critical_times = false is not allowed: the sup must include each point's critical time".into()
    })?;
    require(!run.orders.is_empty() && run.orders.iter().all(|s| s.is_finite()), || {
        "orders must be a nonempty list of finite values".into()
    })?;
    require(run.slope_tolerance > 0.0, || "slope_tolerance must be positive".into())?;
    require(!run.scales.is_empty(), || "scales must not be empty".into())?;
    let mut scales = run.scales.clone();
    scales.sort_by(f64::total_cmp);
    scales.dedup();
    scales
        .iter()
        .map(|&n| {
            let mut cfg = SharpnessConfig::new(run.dim, run.lame, run.v, n, run.orders[0])?.with_counts(run.counts)?;
            if let Some(dt) = run.t_spacing {
                cfg = cfg.with_t_spacing(dt)?;
            }
            Ok(cfg)
        })
        .collect::<Result<_, elastowave::Error>>()
        .map_err(|e| Failure::Usage(format!("sharpness config: {e}")))
}

pub fn run(common: &Common) -> Result<(), Failure> {
    let run: SharpnessRunConfig = config::load(common.config.as_deref())?;
    let configs = validated_configs(&run)?;
    let out = out_dir(common, run.out_dir.clone(), "sharpness")?;

    let reports = ratio_sweeps(&configs[0], &run.scales, &run.orders)?;
    let n = run.dim as f64;
    let mut failures = Vec::new();

    let mut csv = out.report()?;
    csv.row([
        "n", "lambda", "mu", "v", "N", "s", "radial", "angular", "e_radial", "e_angular", "t_spacing",
        "maximal_norm", "single_time_norm", "hs_norm", "ratio", "lower_bound_min", "re_u1_min", "f_measure",
        "e_measure", "phase_max", "block_max", "converged",
    ])?;
    for report in &reports {
        for (row, cfg) in report.rows.iter().zip(&configs) {
            let c = cfg.counts();
            csv.row([
                run.dim.to_string(),
                num(run.lame.lambda()),
                num(run.lame.mu()),
                num(run.v),
                num(row.scale),
                num(row.s),
                c.radial.to_string(),
                c.angular.to_string(),
                c.e_radial.to_string(),
                c.e_angular.to_string(),
                num(cfg.t_grid().step),
                num(row.maximal_norm),
                num(row.single_time_norm),
                num(row.hs_norm),
                num(row.ratio),
                num(row.lower_bound_min),
                num(row.critical_re_min),
                num(row.f_measure),
                num(row.e_measure),
                num(row.phase_bound_max),
                num(row.block_bound_max),
                pass(row.converged).to_string(),
            ])?;
        }
    }
    csv.finish()?;

    let (n_lo, n_hi) = (reports[0].rows[0].scale, reports[0].rows.last().expect("nonempty sweep").scale);
    let mut slope_rows = Vec::new();
    for report in &reports {
        let range = format!("s{}_N{}-{}", tag(report.s), tag(n_lo), tag(n_hi));
        let ratio: Vec<Vec<f64>> =
            report.rows.iter().map(|r| vec![r.scale, r.ratio, r.maximal_norm, r.hs_norm]).collect();
        out.plotdata(&format!("ratio_{range}.dat"), &["N", "ratio", "maximal_norm", "hs_norm"], &ratio)?;
        let single: Vec<Vec<f64>> =
            report.rows.iter().map(|r| vec![r.scale, r.single_time_norm / r.hs_norm, r.single_time_norm]).collect();
        out.plotdata(&format!("single_time_{range}.dat"), &["N", "ratio", "single_time_norm"], &single)?;
        failures.extend(check_report(report, &run));
        if let Some(fit) = report.fit {
            slope_rows.push(vec![report.s, fit.slope, 0.5 - report.s, fit.residual]);
        }
    }
    out.plotdata("slopes.dat", &["s", "slope", "expected", "rms_residual"], &slope_rows)?;

    let rows = &reports[0].rows;
    let measures: Vec<Vec<f64>> = rows.iter().map(|r| vec![r.scale, r.f_measure, r.e_measure]).collect();
    out.plotdata(&format!("measures_N{}-{}.dat", tag(n_lo), tag(n_hi)), &["N", "F_measure", "E_measure"], &measures)?;
    for (name, values, expected) in [
        ("|F|", rows.iter().map(|r| r.f_measure).collect::<Vec<_>>(), (n + 1.0) / 2.0),
        ("|E|", rows.iter().map(|r| r.e_measure).collect(), -(n - 1.0) / 2.0),
    ] {
        let pts: Vec<(f64, f64)> = rows.iter().zip(&values).map(|(r, m)| (r.scale.log2(), m.log2())).collect();
        let slope = fit_slope(&pts).map_or(f64::NAN, |f| f.slope);
        println!("{name} exponent {slope:.4} (expected {expected})");
        if !((slope - expected).abs() <= MEASURE_SLOPE_TOL) {
            failures.push(format!("{name} exponent {slope} not within {MEASURE_SLOPE_TOL} of {expected}"));
        }
    }

    if failures.is_empty() {
        Ok(())
    } else {
        Err(Failure::Tolerance(failures.join("; ")))
    }
}

fn check_report(report: &ExperimentReport, run: &SharpnessRunConfig) -> Vec<String> {
    let mut failures = Vec::new();
    let expected = 0.5 - report.s;
    match report.fit {
        Some(fit) => {
            println!(
                "s = {}: slope {:.4} (expected {expected:.4}, rms residual {:.2e})",
                report.s, fit.slope, fit.residual
            );
            if !((fit.slope - expected).abs() <= run.slope_tolerance) {
                failures.push(format!("s = {}: slope {} outside {expected} ± {}", report.s, fit.slope, run.slope_tolerance));
            }
        }
        None => failures.push(format!("s = {}: no slope fit", report.s)),
    }
    for issue in &report.issues {
        let at = issue
            .point
            .as_ref()
            .map(|x| format!(" at x = {x:?}"))
            .unwrap_or_default();
        failures.push(format!(
            "s = {}: {} not converged for N = {}{at} (relative change {:e})",
            report.s, issue.quantity, issue.scale, issue.relative_change
        ));
    }
    // s-independent diagnostics are reported once
    if report.s != run.orders[0] {
        return failures;
    }
    for row in &report.rows {
        if !(row.phase_bound_max <= PHASE_LIMIT) {
            failures.push(format!("N = {}: phase {} > {PHASE_LIMIT}", row.scale, row.phase_bound_max));
        }
        if !(row.block_bound_max <= BLOCK_LIMIT) {
            failures.push(format!("N = {}: scaled block bound {} > {BLOCK_LIMIT}", row.scale, row.block_bound_max));
        }
        if row.scale >= run.lower_bound_from {
            let half = 0.5 * row.f_measure;
            if !(row.critical_re_min >= half && row.lower_bound_min >= half) {
                failures.push(format!(
                    "N = {}: lower bound min(Re u1) = {}, functional = {}, below |F|/2 = {half}",
                    row.scale, row.critical_re_min, row.lower_bound_min
                ));
            }
        }
    }
    failures
}
