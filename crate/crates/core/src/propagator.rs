//! Half-wave and cosine propagators on a [`TorusGrid`].
//!
//! Every frequency's eigenframe `{φ±, R±}` is computed once per
//! `(params, grid)`; evaluating at a new time only refreshes the diagonal
//! phases. The line shift `x ↦ x + vtθ` is the modulation `e^{ivtθ·ξ}`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lame_symbol::{Diagonalization, FrequencyPoint, LameParams};
use crate::spectral_grid::{SpectralVectorField, TorusGrid, Transformer, VectorField};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Flavor {
    /// `e^{+it√(−Δ*)}`
    HalfWavePlus,
    /// `e^{−it√(−Δ*)}`
    HalfWaveMinus,
    /// `cos(t√(−Δ*))`, the solution with zero initial velocity.
    Cosine,
}

#[derive(Debug, Clone)]
pub struct PropagationRequest<'a> {
    pub params: LameParams,
    pub field: &'a VectorField,
    pub t: f64,
    pub v: f64,
    pub theta: DVector<f64>,
    pub flavor: Flavor,
}

impl<'a> PropagationRequest<'a> {
    pub fn new(
        params: LameParams,
        field: &'a VectorField,
        t: f64,
        v: f64,
        theta: DVector<f64>,
        flavor: Flavor,
    ) -> Result<Self> {
        let dim = field.grid().dim();
        if theta.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, actual: theta.len() });
        }
        let norm = theta.norm();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::NotUnit { norm });
        }
        if !(v >= 0.0 && v.is_finite()) {
            return Err(Error::Config(format!("line speed must be finite and >= 0, got {v}")));
        }
        if !t.is_finite() {
            return Err(Error::Config("time must be finite".into()));
        }
        Ok(Self { params, field, t, v, theta, flavor })
    }

    /// Unshifted request (`v = 0`).
    pub fn at_rest(params: LameParams, field: &'a VectorField, t: f64, flavor: Flavor) -> Self {
        let mut theta = DVector::zeros(field.grid().dim());
        theta[0] = 1.0;
        Self { params, field, t, v: 0.0, theta, flavor }
    }
}

/// Precomputed multiplier table for one `(params, grid)` pair.
#[derive(Debug)]
pub struct Propagator {
    params: LameParams,
    transformer: Transformer,
    frames: Vec<Diagonalization>,
}

impl Propagator {
    pub fn new(params: LameParams, grid: TorusGrid) -> Self {
        let frames = (0..grid.len())
            .into_par_iter()
            .map(|k| {
                let xi = FrequencyPoint::new(grid.frequency(k)).expect("grid dimension >= 2");
                Diagonalization::new(&xi)
            })
            .collect();
        Self { params, transformer: Transformer::new(grid), frames }
    }

    pub fn params(&self) -> &LameParams {
        &self.params
    }

    pub fn grid(&self) -> &TorusGrid {
        self.transformer.grid()
    }

    pub fn transformer(&self) -> &Transformer {
        &self.transformer
    }

    /// Multiplier at storage index `k`.
    pub fn multiplier(&self, k: usize, t: f64, v: f64, theta: &DVector<f64>, flavor: Flavor) -> DMatrix<Complex64> {
        let grid = self.grid();
        let dim = grid.dim();
        let frame = &self.frames[k];
        let roots = self.params.root_eigenvalues(dim, frame.magnitude);
        let diag: Vec<Complex64> = match flavor {
            Flavor::HalfWavePlus => roots.iter().map(|&w| Complex64::cis(t * w)).collect(),
            Flavor::HalfWaveMinus => roots.iter().map(|&w| Complex64::cis(-t * w)).collect(),
            Flavor::Cosine => roots.iter().map(|&w| Complex64::new((t * w).cos(), 0.0)).collect(),
        };
        let core = frame
            .conjugate_diagonal(&diag)
            .unwrap_or_else(|| DMatrix::identity(dim, dim));
        if v == 0.0 {
            core
        } else {
            core * Complex64::cis(v * t * theta.dot(&grid.frequency(k)))
        }
    }

    /// Applies the propagator to a spectrum.
    pub fn apply_spectrum(
        &self,
        f: &SpectralVectorField,
        t: f64,
        v: f64,
        theta: &DVector<f64>,
        flavor: Flavor,
    ) -> SpectralVectorField {
        let grid = *self.grid();
        assert_eq!(f.grid(), &grid);
        let coefficients = (0..grid.len())
            .into_par_iter()
            .flat_map_iter(|k| {
                let c = DVector::from_column_slice(f.at(k));
                let out = self.multiplier(k, t, v, theta, flavor) * c;
                out.into_iter().copied().collect::<Vec<_>>()
            })
            .collect();
        SpectralVectorField::new(grid, coefficients).expect("same layout")
    }

    pub fn forward(&self, f: &VectorField) -> Result<SpectralVectorField> {
        if f.grid() != self.grid() {
            return Err(Error::InvalidGrid("field grid differs from propagator grid".into()));
        }
        let fh = self.transformer.forward(f);
        fh.ensure_band_limited()?;
        Ok(fh)
    }

    /// Grid samples of `x ↦ (P_t f)(x + vtθ)` for the requested flavor.
    pub fn run(&self, req: &PropagationRequest<'_>) -> Result<VectorField> {
        let fh = self.forward(req.field)?;
        if req.t == 0.0 {
            // every flavor is the identity at t = 0; skip the transforms so
            // the output is the input bit for bit
            return Ok(req.field.clone());
        }
        let out = self.apply_spectrum(&fh, req.t, req.v, &req.theta, req.flavor);
        let mut u = self.transformer.inverse(&out);
        if req.flavor == Flavor::Cosine && req.v == 0.0 && req.field.is_real() {
            let discarded = project_real(&mut u);
            log::debug!("cosine output at t = {}: discarded imaginary part {discarded:.3e}", req.t);
        }
        Ok(u)
    }

    /// Elastic energy `½(‖∂ₜu‖² + ‖√(−Δ*)u‖²)` of the cosine solution
    /// `u = cos(t√(−Δ*))f`, from the spectrum of `f`. Independent of `t`.
    pub fn cosine_energy(&self, fh: &SpectralVectorField, t: f64) -> f64 {
        let grid = *self.grid();
        let dim = grid.dim();
        let per_frequency: Vec<f64> = (0..grid.len())
            .into_par_iter()
            .map(|k| {
                let frame = &self.frames[k];
                let roots = self.params.root_eigenvalues(dim, frame.magnitude);
                let c = DVector::from_column_slice(fh.at(k));
                let apply = |g: &dyn Fn(f64) -> f64| {
                    let diag: Vec<Complex64> = roots.iter().map(|&w| Complex64::new(g(w), 0.0)).collect();
                    frame.conjugate_diagonal(&diag).map_or(0.0, |m| (m * &c).norm_squared())
                };
                // ∂ₜu = −√L sin(t√L) f,  √L u = √L cos(t√L) f
                apply(&|w| w * (t * w).sin()) + apply(&|w| w * (t * w).cos())
            })
            .collect();
        0.5 * grid.cell_volume() * per_frequency.iter().sum::<f64>()
    }
}

/// Drops imaginary parts in place, returning the largest one removed.
pub fn project_real(u: &mut VectorField) -> f64 {
    let mut values = std::mem::replace(u, VectorField::zeros(*u.grid())).into_values();
    let mut worst = 0.0f64;
    for z in values.iter_mut() {
        worst = worst.max(z.im.abs());
        z.im = 0.0;
    }
    *u = VectorField::new(*u.grid(), values).expect("same layout");
    worst
}

/// `e^{±it√(−Δ*)} f` evaluated on the line `x + vtθ`.
pub fn half_wave(req: &PropagationRequest<'_>) -> Result<VectorField> {
    if req.flavor == Flavor::Cosine {
        return Err(Error::Config("half_wave called with the cosine flavor".into()));
    }
    Propagator::new(req.params, *req.field.grid()).run(req)
}

/// `u(t) = ½(e^{it√(−Δ*)} + e^{−it√(−Δ*)}) f`. Real data give real output.
pub fn cosine_solution(params: &LameParams, f: &VectorField, t: f64) -> Result<VectorField> {
    let req = PropagationRequest::at_rest(*params, f, t, Flavor::Cosine);
    Propagator::new(*params, *f.grid()).run(&req)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResidualStatus {
    Ok,
    /// `dt²·|ξ|²max` below `1e-12`: the second difference is dominated by rounding.
    StepTooSmall,
}

#[derive(Debug, Clone, Copy)]
pub struct ResidualReport {
    pub value: f64,
    pub status: ResidualStatus,
}

/// `‖(u(t+dt) − 2u(t) + u(t−dt))/dt² − Δ*u(t)‖₂ / ‖f‖₂` for the cosine solution.
pub fn pde_residual(params: &LameParams, f: &VectorField, t: f64, dt: f64) -> Result<ResidualReport> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::Config(format!("dt must be positive, got {dt}")));
    }
    let prop = Propagator::new(*params, *f.grid());
    let fh = prop.forward(f)?;
    let theta = {
        let mut e = DVector::zeros(f.grid().dim());
        e[0] = 1.0;
        e
    };
    let at = |s: f64| prop.apply_spectrum(&fh, s, 0.0, &theta, Flavor::Cosine);
    let (up, u0, um) = (at(t + dt), at(t), at(t - dt));
    let grid = *f.grid();
    let dim = grid.dim();
    let lame = crate::lame_symbol::lame_symbol_matrix;
    let mut acc = 0.0;
    for k in 0..grid.len() {
        let xi = FrequencyPoint::new(grid.frequency(k)).expect("dim >= 2");
        let l = lame(params, &xi).map(|x| Complex64::new(x, 0.0));
        let c0 = DVector::from_column_slice(u0.at(k));
        let lu = l * &c0;
        for c in 0..dim {
            let second = (up.at(k)[c] - u0.at(k)[c] * 2.0 + um.at(k)[c]) / (dt * dt);
            // Δ*u = −L u
            acc += (second + lu[c]).norm_sqr();
        }
    }
    let value = (grid.cell_volume() * acc).sqrt() / fh.l2_norm();
    let xi_max = fh.band_limit(1e-13);
    let status = if dt * dt * xi_max * xi_max < 1e-12 {
        ResidualStatus::StepTooSmall
    } else {
        ResidualStatus::Ok
    };
    Ok(ResidualReport { value, status })
}

/// Energy `|u|²·hⁿ` binned by distance from the origin, bin width `width`.
pub fn radial_energy_histogram(u: &VectorField, width: f64) -> Vec<f64> {
    let grid = u.grid();
    let rmax = grid.half_period() * (grid.dim() as f64).sqrt();
    let mut bins = vec![0.0; (rmax / width).ceil() as usize + 1];
    let vol = grid.cell_volume();
    for p in 0..grid.len() {
        let r = grid.position(p).norm();
        let e: f64 = u.at(p).iter().map(|z| z.norm_sqr()).sum();
        bins[(r / width) as usize] += e * vol;
    }
    bins
}
