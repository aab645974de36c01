//! Sharpness experiment for the maximal estimate along lines, and the
//! positive-direction checks.
//!
//! The initial datum is `f̂_F = χ_F e₁` with
//!
//! ```text
//! F = {ξ : ∠(e₁,ξ) ≤ δ_N, N/2 ≤ |ξ| ≤ N},   E = {x : ∠(e₁,x) ≤ δ_N, |x| ≤ α},
//! α = c_p + v,   δ_N = ¼(αN)^{−1/2}.
//! ```
//!
//! Solutions are evaluated pointwise by quadrature of
//! `u(x,t) = ∫_F m(ξ,t) e^{ix·ξ} e₁ dξ` (Fourier convention without `2π`
//! factors), with exact oscillatory moments in `|ξ|`. The torus grid is
//! deliberately not used here: `f_F` is not spatially localized, so
//! periodization would pollute the norm on `E`.

mod lines;
mod quadrature;
mod sharpness;

pub use lines::{
    convergence_along_line, halving_ratios, space_time_norm_check, LineDeviation, SpaceTimeNorms,
};
pub use quadrature::{angle_to_e1, gauss, radial_moment, Sector, SectorRule};
pub use sharpness::{
    block_bound_check, check_grids, evaluate_solution_at, evaluate_solution_checked, fit_slope, hs_norm_f_f, lower_bound_functional,
    maximal_norm_on_e, phase_bound_max, ratio_sweep, ratio_sweeps, sample_e,
    sector_quadrature_f, Checked, ConvergenceIssue, ExperimentReport, MaximalNorm, PointSup, SlopeFit,
    SolutionQuadrature, SweepRow, CONVERGENCE_TOL,
};

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lame_symbol::LameParams;

/// Node counts. `angular` applies to every angular coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuadratureCounts {
    /// Gauss nodes in `|ξ|` over `F`.
    pub radial: usize,
    /// Angular nodes over `F`.
    pub angular: usize,
    /// Gauss nodes in `|x|` over `E`.
    pub e_radial: usize,
    /// Angular nodes over `E`.
    pub e_angular: usize,
}

impl Default for QuadratureCounts {
    fn default() -> Self {
        Self { radial: 16, angular: 8, e_radial: 8, e_angular: 8 }
    }
}

impl QuadratureCounts {
    pub const MIN: usize = 8;

    pub fn doubled(&self) -> Self {
        Self {
            radial: 2 * self.radial,
            angular: 2 * self.angular,
            e_radial: 2 * self.e_radial,
            e_angular: 2 * self.e_angular,
        }
    }

    fn validate(&self) -> Result<()> {
        let all = [self.radial, self.angular, self.e_radial, self.e_angular];
        if all.iter().any(|&c| c < Self::MIN) {
            return Err(Error::Config(format!(
                "quadrature counts must be >= {}, got {all:?}",
                Self::MIN
            )));
        }
        Ok(())
    }
}

/// One point of the sharpness experiment: dimension, medium, line speed,
/// frequency scale `N`, Sobolev order `s` and quadrature resolution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SharpnessConfig {
    dim: usize,
    params: LameParams,
    v: f64,
    scale: f64,
    s: f64,
    counts: QuadratureCounts,
    t_spacing: Option<f64>,
}

impl SharpnessConfig {
    pub fn new(dim: usize, params: LameParams, v: f64, scale: f64, s: f64) -> Result<Self> {
        let cfg = Self { dim, params, v, scale, s, counts: QuadratureCounts::default(), t_spacing: None };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_counts(mut self, counts: QuadratureCounts) -> Result<Self> {
        self.counts = counts;
        self.validate()?;
        Ok(self)
    }

    /// Fixes the sup-grid spacing; it may not exceed [`Self::max_t_spacing`].
    pub fn with_t_spacing(mut self, spacing: f64) -> Result<Self> {
        self.t_spacing = Some(spacing);
        self.validate()?;
        Ok(self)
    }

    pub fn with_scale(mut self, scale: f64) -> Result<Self> {
        self.scale = scale;
        self.validate()?;
        Ok(self)
    }

    pub fn with_s(mut self, s: f64) -> Result<Self> {
        self.s = s;
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        if !(2..=3).contains(&self.dim) {
            return Err(Error::Dimension(self.dim));
        }
        if !(self.v >= 0.0 && self.v.is_finite()) {
            return Err(Error::Config(format!("line speed must be finite and >= 0, got {}", self.v)));
        }
        if !self.s.is_finite() {
            return Err(Error::Config("Sobolev order must be finite".into()));
        }
        let alpha = self.alpha();
        if !(self.scale.is_finite() && self.scale * alpha >= 16.0) {
            return Err(Error::Config(format!(
                "need N >= 16/alpha = {:.6}, got N = {}",
                16.0 / alpha,
                self.scale
            )));
        }
        if self.half_width() >= std::f64::consts::FRAC_PI_4 {
            return Err(Error::Config("angular half-width must be below pi/4".into()));
        }
        self.counts.validate()?;
        if let Some(h) = self.t_spacing {
            let limit = self.max_t_spacing();
            if !(h > 0.0 && h <= limit) {
                return Err(Error::Config(format!(
                    "t spacing {h:e} exceeds the limit 1/(8 alpha N) = {limit:e}"
                )));
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn params(&self) -> &LameParams {
        &self.params
    }

    pub fn v(&self) -> f64 {
        self.v
    }

    /// The frequency scale `N`.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn counts(&self) -> &QuadratureCounts {
        &self.counts
    }

    /// `α = c_p + v`.
    pub fn alpha(&self) -> f64 {
        self.params.p_speed() + self.v
    }

    /// `δ_N = ¼ (αN)^{−1/2}`.
    pub fn half_width(&self) -> f64 {
        0.25 / (self.alpha() * self.scale).sqrt()
    }

    pub fn f_sector(&self) -> Sector {
        Sector::new(self.dim, self.half_width(), 0.5 * self.scale, self.scale)
            .expect("validated configuration")
    }

    pub fn e_sector(&self) -> Sector {
        Sector::new(self.dim, self.half_width(), 0.0, self.alpha()).expect("validated configuration")
    }

    /// `|F|`, closed form.
    pub fn f_measure(&self) -> f64 {
        self.f_sector().measure()
    }

    /// `|E|`, closed form.
    pub fn e_measure(&self) -> f64 {
        self.e_sector().measure()
    }

    /// `1/(8αN)`.
    pub fn max_t_spacing(&self) -> f64 {
        1.0 / (8.0 * self.alpha() * self.scale)
    }

    /// Interior points of a uniform partition of `(−1, 1)` with spacing at
    /// most [`Self::max_t_spacing`] (or the configured spacing).
    pub fn t_grid(&self) -> TimeGrid {
        let h = self.t_spacing.unwrap_or_else(|| self.max_t_spacing());
        let intervals = (2.0 / h).ceil() as usize;
        let step = 2.0 / intervals as f64;
        TimeGrid { start: -1.0 + step, step, count: intervals - 1 }
    }

    /// The same experiment with every quadrature count doubled.
    pub fn refined(&self) -> Self {
        Self { counts: self.counts.doubled(), ..*self }
    }
}

/// `t_m = start + m·step`, `m < count`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub start: f64,
    pub step: f64,
    pub count: usize,
}

impl TimeGrid {
    pub fn at(&self, m: usize) -> f64 {
        self.start + m as f64 * self.step
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.count).map(|m| self.at(m)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalTime {
    pub t: f64,
    /// `|x| = α` exactly: `t = −1` sits on the edge of the time interval.
    pub boundary: bool,
}

/// `t(x) = −|x|/α`.
pub fn critical_time(x: &DVector<f64>, alpha: f64) -> Result<CriticalTime> {
    if alpha.is_nan() || alpha <= 0.0 {
        return Err(Error::Domain(format!("alpha must be positive, got {alpha}")));
    }
    let r = x.norm();
    // a few ulps of slack so that points built on the sphere |x| = α count as on it
    if r > alpha * (1.0 + 4.0 * f64::EPSILON) {
        return Err(Error::Domain(format!("|x| = {r} exceeds alpha = {alpha}")));
    }
    if r >= alpha {
        return Ok(CriticalTime { t: -1.0, boundary: true });
    }
    Ok(CriticalTime { t: -r / alpha, boundary: false })
}

/// `(Φ, Ψ)` with `Φ = (x + vte₁)·ξ + t c_p|ξ|` and `Ψ` the same with `c_s`.
pub fn phases(x: &DVector<f64>, t: f64, xi: &DVector<f64>, cfg: &SharpnessConfig) -> (f64, f64) {
    phases_raw(x, t, xi, cfg.v, cfg.params.p_speed(), cfg.params.s_speed())
}

pub(crate) fn phases_raw(x: &DVector<f64>, t: f64, xi: &DVector<f64>, v: f64, cp: f64, cs: f64) -> (f64, f64) {
    let shift = x.dot(xi) + v * t * xi[0];
    let r = xi.norm();
    (shift + t * cp * r, shift + t * cs * r)
}
