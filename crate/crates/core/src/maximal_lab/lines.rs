//! Positive-direction checks on the torus: pointwise convergence along the
//! lines `x + vtθ` and the local space–time norms.

use nalgebra::DVector;
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::lame_symbol::LameParams;
use crate::propagator::{Flavor, PropagationRequest, Propagator};
use crate::smooth::{time_cutoff, time_cutoff_derivative};
use crate::spectral_grid::{sobolev_norm, VectorField};

/// Relative amplitude under which a coefficient is ignored when locating
/// the band limit.
const BAND_LIMIT_REL_TOL: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineDeviation {
    pub t: f64,
    /// `max_x |u(x + vtθ, t) − f(x)|` over grid points (Euclidean norm in
    /// the components).
    pub max_deviation: f64,
    /// `‖u(· + vtθ, t) − f‖₂`.
    pub l2_deviation: f64,
    /// `l2_deviation / ‖f‖₂`.
    pub relative_l2: f64,
}

/// Deviation of `e^{it√(−Δ*)}f(x + vtθ)` from `f` at each requested time.
pub fn convergence_along_line(
    params: &LameParams,
    f: &VectorField,
    v: f64,
    theta: &DVector<f64>,
    times: &[f64],
) -> Result<Vec<LineDeviation>> {
    for &t in times {
        PropagationRequest::new(*params, f, t, v, theta.clone(), Flavor::HalfWavePlus)?;
    }
    let prop = Propagator::new(*params, *f.grid());
    let fh = prop.forward(f)?;
    let norm = fh.l2_norm();
    times
        .iter()
        .map(|&t| {
            let out = prop.apply_spectrum(&fh, t, v, theta, Flavor::HalfWavePlus);
            let diff: Vec<Complex64> =
                out.coefficients().iter().zip(fh.coefficients()).map(|(a, b)| a - b).collect();
            let diff = crate::spectral_grid::SpectralVectorField::new(*f.grid(), diff)?;
            let l2 = diff.l2_norm();
            let pointwise = prop.transformer().inverse(&diff);
            let max = (0..f.grid().len())
                .map(|p| pointwise.at(p).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
                .fold(0.0, f64::max);
            Ok(LineDeviation {
                t,
                max_deviation: max,
                l2_deviation: l2,
                relative_l2: if norm > 0.0 { l2 / norm } else { 0.0 },
            })
        })
        .collect()
}

/// `L²` deviation ratios between consecutive entries; about `1/2` when each
/// time is half the previous one and the deviation is linear in `t`.
pub fn halving_ratios(devs: &[LineDeviation]) -> Vec<f64> {
    devs.windows(2).map(|w| w[1].l2_deviation / w[0].l2_deviation).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpaceTimeNorms {
    /// `‖φ(t) u(x + vtθ, t)‖_{L²_{x,t}} / ‖f‖₂`.
    pub ratio0: f64,
    /// `‖∂ₜ(φ u)‖_{L²_{x,t}} / ‖f‖_{H¹}`.
    pub ratio1: f64,
    /// `‖φ‖` on the time grid; `ratio0` equals it by conservation.
    pub cutoff_l2: f64,
    /// `‖φ'‖` on the time grid.
    pub cutoff_derivative_l2: f64,
    /// `‖φ'‖ + (v + c_p)‖φ‖`, which bounds `ratio1` for every datum.
    pub ratio1_bound: f64,
    pub t_step: f64,
}

/// Space–time norms of `φ(t)·e^{it√(−Δ*)}f(x + vtθ)` on the periodic time
/// grid `t_j = −2 + 4j/t_count`, with `∂ₜ` taken spectrally in `t`.
///
/// Rejects grids whose step exceeds `π/((v + c_p)ξ_max)`.
pub fn space_time_norm_check(
    params: &LameParams,
    f: &VectorField,
    v: f64,
    theta: &DVector<f64>,
    t_count: usize,
) -> Result<SpaceTimeNorms> {
    PropagationRequest::new(*params, f, 0.0, v, theta.clone(), Flavor::HalfWavePlus)?;
    if t_count < 8 {
        return Err(Error::Config(format!("time grid needs at least 8 points, got {t_count}")));
    }
    let grid = *f.grid();
    let prop = Propagator::new(*params, grid);
    let fh = prop.forward(f)?;
    let xi_max = fh.band_limit(BAND_LIMIT_REL_TOL);
    let dt = 4.0 / t_count as f64;
    let limit = std::f64::consts::PI / ((v + params.p_speed()) * xi_max);
    if dt > limit {
        return Err(Error::Config(format!(
            "time step {dt:e} does not resolve the band limit: need <= pi/((v + c_p) xi_max) = {limit:e}"
        )));
    }

    let times: Vec<f64> = (0..t_count).map(|j| -2.0 + j as f64 * dt).collect();
    let cutoff: Vec<f64> = times.iter().map(|&t| time_cutoff(t)).collect();
    // angular frequencies of the periodic t-grid; the Nyquist mode is dropped
    let tau: Vec<f64> = (0..t_count)
        .map(|m| {
            let signed = if m < t_count / 2 {
                m as f64
            } else if m == t_count / 2 {
                0.0
            } else {
                m as f64 - t_count as f64
            };
            2.0 * std::f64::consts::PI * signed / (t_count as f64 * dt)
        })
        .collect();
    let fft = FftPlanner::<f64>::new().plan_fft_forward(t_count);

    let n = grid.dim();
    let active: Vec<usize> = (0..grid.len()).filter(|&k| fh.at(k).iter().any(|z| z.norm_sqr() > 0.0)).collect();
    let sums: Vec<(f64, f64)> = active
        .par_iter()
        .map(|&k| {
            let c = DVector::from_column_slice(fh.at(k));
            let mut series = vec![vec![Complex64::new(0.0, 0.0); t_count]; n];
            for (j, &t) in times.iter().enumerate() {
                let w = prop.multiplier(k, t, v, theta, Flavor::HalfWavePlus) * &c;
                for (comp, s) in series.iter_mut().enumerate() {
                    s[j] = w[comp] * cutoff[j];
                }
            }
            let mut plain = 0.0;
            let mut derivative = 0.0;
            for s in series.iter_mut() {
                plain += s.iter().map(|z| z.norm_sqr()).sum::<f64>();
                fft.process(s);
                // discrete Parseval for the unnormalized transform
                derivative += s.iter().zip(&tau).map(|(z, w)| z.norm_sqr() * w * w).sum::<f64>() / t_count as f64;
            }
            (plain, derivative)
        })
        .collect();
    let weight = dt * grid.cell_volume();
    let plain: f64 = sums.iter().map(|s| s.0).sum();
    let derivative: f64 = sums.iter().map(|s| s.1).sum();
    let f_norm = fh.l2_norm();
    let h1 = sobolev_norm(&fh, 1.0);
    if f_norm == 0.0 {
        return Err(Error::Domain("zero initial datum".into()));
    }

    let cutoff_l2 = (dt * cutoff.iter().map(|p| p * p).sum::<f64>()).sqrt();
    let cutoff_derivative_l2 = (dt * times.iter().map(|&t| time_cutoff_derivative(t).powi(2)).sum::<f64>()).sqrt();
    Ok(SpaceTimeNorms {
        ratio0: (weight * plain).sqrt() / f_norm,
        ratio1: (weight * derivative).sqrt() / h1,
        cutoff_l2,
        cutoff_derivative_l2,
        ratio1_bound: cutoff_derivative_l2 + (v + params.p_speed()) * cutoff_l2,
        t_step: dt,
    })
}
