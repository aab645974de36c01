//! Reference computations that share no code path with the rotation-field
//! construction: closed-form plane waves, the functional calculus of `L(ξ)`
//! through a generic dense eigensolver, the scalar half-wave propagator, and
//! a leapfrog integrator for `∂ₜ²u = Δ*u`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lame_symbol::{lame_symbol_matrix, FrequencyPoint, LameParams};
use crate::propagator::Flavor;
use crate::spectral_grid::{SpectralVectorField, TorusGrid, Transformer, VectorField};

const CLASSIFY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlaneWaveKind {
    Longitudinal,
    Transverse,
    Mixed,
}

/// `f(x) = e^{iξ₀·x} a` with a unit polarization `a`.
#[derive(Debug, Clone)]
pub struct PlaneWaveSpec {
    xi0: DVector<f64>,
    polarization: DVector<Complex64>,
    kind: PlaneWaveKind,
}

impl PlaneWaveSpec {
    pub fn new(xi0: DVector<f64>, polarization: DVector<Complex64>) -> Result<Self> {
        if xi0.len() != polarization.len() {
            return Err(Error::DimensionMismatch { expected: xi0.len(), actual: polarization.len() });
        }
        let r = xi0.norm();
        if r == 0.0 {
            return Err(Error::Domain("plane wave needs a nonzero frequency".into()));
        }
        let norm = polarization.norm();
        if (norm - 1.0).abs() > CLASSIFY_TOL {
            return Err(Error::NotUnit { norm });
        }
        let along = longitudinal_amplitude(&xi0, &polarization).norm();
        let kind = if (along - 1.0).abs() <= CLASSIFY_TOL {
            PlaneWaveKind::Longitudinal
        } else if along <= CLASSIFY_TOL {
            PlaneWaveKind::Transverse
        } else {
            PlaneWaveKind::Mixed
        };
        Ok(Self { xi0, polarization, kind })
    }

    pub fn xi0(&self) -> &DVector<f64> {
        &self.xi0
    }

    pub fn polarization(&self) -> &DVector<Complex64> {
        &self.polarization
    }

    pub fn kind(&self) -> PlaneWaveKind {
        self.kind
    }

    /// `(ω ωᵗ a, a − ω ωᵗ a)` with `ω = ξ₀/|ξ₀|`.
    pub fn split(&self) -> (DVector<Complex64>, DVector<Complex64>) {
        let omega = &self.xi0 / self.xi0.norm();
        let along = longitudinal_amplitude(&self.xi0, &self.polarization);
        let p = omega.map(|w| along * w);
        let s = &self.polarization - &p;
        (p, s)
    }
}

fn longitudinal_amplitude(xi0: &DVector<f64>, a: &DVector<Complex64>) -> Complex64 {
    let omega = xi0 / xi0.norm();
    omega.iter().zip(a.iter()).map(|(w, z)| z * *w).sum()
}

fn time_factor(flavor: Flavor, t: f64, omega: f64) -> Complex64 {
    match flavor {
        Flavor::HalfWavePlus => Complex64::cis(t * omega),
        Flavor::HalfWaveMinus => Complex64::cis(-t * omega),
        Flavor::Cosine => Complex64::new((t * omega).cos(), 0.0),
    }
}

/// Closed-form propagated plane wave sampled on `grid`.
pub fn plane_wave_exact(
    spec: &PlaneWaveSpec,
    grid: &TorusGrid,
    params: &LameParams,
    t: f64,
    flavor: Flavor,
) -> Result<VectorField> {
    grid.lattice_index(spec.xi0.as_slice())?;
    let r = spec.xi0.norm();
    let (p, s) = spec.split();
    let amp = p * time_factor(flavor, t, params.p_speed() * r) + s * time_factor(flavor, t, params.s_speed() * r);
    let xi0 = spec.xi0.clone();
    Ok(VectorField::from_fn(*grid, move |x| {
        let ph = Complex64::cis(xi0.dot(x));
        amp.map(|a| a * ph)
    }))
}

/// `e^{it√L(ξ)}` from a dense symmetric eigendecomposition of `L(ξ)`.
pub fn multiplier_via_eigendecomposition(params: &LameParams, xi: &FrequencyPoint, t: f64) -> DMatrix<Complex64> {
    let n = xi.dim();
    let eig = SymmetricEigen::new(lame_symbol_matrix(params, xi));
    let mut out = DMatrix::<Complex64>::zeros(n, n);
    for k in 0..n {
        let root = eig.eigenvalues[k].max(0.0).sqrt();
        let phase = Complex64::cis(t * root);
        let v = eig.eigenvectors.column(k);
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] += phase * (v[i] * v[j]);
            }
        }
    }
    out
}

/// `e^{itc√(−Δ)}` applied to one scalar component sampled on `grid`.
pub fn scalar_half_wave(grid: &TorusGrid, component: &[Complex64], c: f64, t: f64) -> Vec<Complex64> {
    let tr = Transformer::new(*grid);
    let mut buf = component.to_vec();
    tr.transform_scalar(&mut buf, false);
    for (k, z) in buf.iter_mut().enumerate() {
        *z *= Complex64::cis(t * c * grid.frequency(k).norm());
    }
    tr.transform_scalar(&mut buf, true);
    buf
}

/// Largest stable step of the leapfrog scheme is `2/(c_p ξmax)`; this is the
/// admitted fraction of it.
pub const LEAPFROG_CFL: f64 = 1.9;

/// Leapfrog integration of `∂ₜ²u = Δ*u`, `u(0) = f`, `∂ₜu(0) = 0`, with the
/// spatial operator applied exactly in Fourier space.
///
/// Takes `K = ⌈|t|/dt⌉` equal steps of size `|t|/K`. The first step is the
/// Taylor start `u¹ = f + (dt²/2)Δ*f`.
pub fn leapfrog_reference(params: &LameParams, f: &VectorField, t: f64, dt: f64) -> Result<VectorField> {
    if !(dt > 0.0 && dt.is_finite() && t.is_finite()) {
        return Err(Error::Config(format!("need finite t and dt > 0 (t = {t}, dt = {dt})")));
    }
    let grid = *f.grid();
    let tr = Transformer::new(grid);
    let fh = tr.forward(f);
    fh.ensure_band_limited()?;
    let xi_max = fh.band_limit(1e-13);
    let limit = LEAPFROG_CFL / (params.p_speed() * xi_max);
    if dt > limit {
        return Err(Error::Unstable { dt, limit });
    }
    let span = t.abs();
    if span == 0.0 {
        return Ok(f.clone());
    }
    let steps = (span / dt - 1e-9).ceil().max(1.0) as usize;
    let h = span / steps as f64;

    let n = grid.dim();
    let mut out = vec![Complex64::new(0.0, 0.0); grid.len() * n];
    for k in 0..grid.len() {
        let xi = FrequencyPoint::new(grid.frequency(k)).expect("dim >= 2");
        let l = lame_symbol_matrix(params, &xi).map(|x| Complex64::new(x, 0.0));
        let u0 = DVector::from_column_slice(fh.at(k));
        let mut prev = u0.clone();
        let mut cur = &u0 - (&l * &u0) * Complex64::new(0.5 * h * h, 0.0);
        for _ in 1..steps {
            let next = &cur * Complex64::new(2.0, 0.0) - &prev - (&l * &cur) * Complex64::new(h * h, 0.0);
            prev = std::mem::replace(&mut cur, next);
        }
        out[k * n..(k + 1) * n].copy_from_slice(cur.as_slice());
    }
    Ok(tr.inverse(&SpectralVectorField::new(grid, out)?))
}
