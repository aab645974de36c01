//! Periodic sampling of vector fields on `[-L, L)ⁿ` and their discrete
//! Fourier coefficients.
//!
//! Transforms are unitary (`M^{-n/2}` on both sides) and use the physical
//! phase `e^{-iξ·x}` with `x` measured from the centre of the box, so a
//! translation in space is exactly a modulation of the coefficients.
//! Coefficients are stored in natural DFT order; [`TorusGrid::frequency`]
//! maps a storage index to the physical `ξ = (π/L)k`.
//!
//! Norms carry the spatial quadrature weight `hⁿ`, so `sobolev_norm(F, 0)`
//! equals `VectorField::l2_norm` and both approximate continuum integrals.

mod io;

pub use io::{read_field, write_field, write_field_csv, FIELD_MAGIC};

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Fraction of the energy allowed on the Nyquist planes before a field is
/// considered not band-limited on its grid.
pub const NYQUIST_ENERGY_TOL: f64 = 1e-24;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TorusGrid {
    dim: usize,
    points: usize,
    half_period: f64,
}

impl TorusGrid {
    pub fn new(dim: usize, points: usize, half_period: f64) -> Result<Self> {
        if !(2..=3).contains(&dim) {
            return Err(Error::InvalidGrid(format!("dimension must be 2 or 3, got {dim}")));
        }
        if points < 4 || !points.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "points per axis must be a power of two >= 4, got {points}"
            )));
        }
        if !(half_period.is_finite() && half_period > 0.0) {
            return Err(Error::InvalidGrid(format!("half period must be positive, got {half_period}")));
        }
        Ok(Self { dim, points, half_period })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Points per axis, `M`.
    pub fn points(&self) -> usize {
        self.points
    }

    pub fn half_period(&self) -> f64 {
        self.half_period
    }

    /// `Mⁿ`.
    pub fn len(&self) -> usize {
        self.points.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_period / self.points as f64
    }

    /// Spatial quadrature weight `hⁿ`.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    /// Lattice step `π/L` in frequency.
    pub fn frequency_step(&self) -> f64 {
        PI / self.half_period
    }

    pub fn nyquist(&self) -> f64 {
        PI * self.points as f64 / (2.0 * self.half_period)
    }

    /// Errors unless `band_limit` is strictly below the Nyquist frequency.
    pub fn check_band_limit(&self, band_limit: f64) -> Result<()> {
        if band_limit < self.nyquist() {
            Ok(())
        } else {
            Err(Error::BandLimit(format!(
                "band limit {band_limit} not below Nyquist frequency {}",
                self.nyquist()
            )))
        }
    }

    /// Row-major multi-index of a flat index (last axis fastest).
    pub fn multi_index(&self, flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dim];
        let mut rem = flat;
        for d in (0..self.dim).rev() {
            idx[d] = rem % self.points;
            rem /= self.points;
        }
        idx
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter().fold(0, |acc, &i| acc * self.points + i)
    }

    /// Signed lattice integer for a storage index along one axis.
    pub fn wavenumber(&self, j: usize) -> i64 {
        let m = self.points as i64;
        let j = j as i64;
        if j < m / 2 {
            j
        } else {
            j - m
        }
    }

    /// Storage index along one axis for a signed wavenumber, if representable.
    pub fn storage_index(&self, k: i64) -> Option<usize> {
        let m = self.points as i64;
        (-m / 2..m / 2).contains(&k).then(|| k.rem_euclid(m) as usize)
    }

    pub fn wavenumbers(&self, flat: usize) -> Vec<i64> {
        self.multi_index(flat).into_iter().map(|j| self.wavenumber(j)).collect()
    }

    /// Physical frequency `ξ = (π/L) k` at a storage index.
    pub fn frequency(&self, flat: usize) -> DVector<f64> {
        let step = self.frequency_step();
        DVector::from_iterator(self.dim, self.wavenumbers(flat).into_iter().map(|k| k as f64 * step))
    }

    /// True when any axis sits on the Nyquist index, where `±ξ` alias.
    pub fn is_nyquist(&self, flat: usize) -> bool {
        self.multi_index(flat).into_iter().any(|j| j == self.points / 2)
    }

    pub fn position(&self, flat: usize) -> DVector<f64> {
        let h = self.spacing();
        DVector::from_iterator(
            self.dim,
            self.multi_index(flat).into_iter().map(|j| -self.half_period + j as f64 * h),
        )
    }

    /// Flat storage index of a physical frequency if it lies on the lattice.
    pub fn lattice_index(&self, xi: &[f64]) -> Result<usize> {
        if xi.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, actual: xi.len() });
        }
        let step = self.frequency_step();
        let mut idx = Vec::with_capacity(self.dim);
        for &x in xi {
            let k = x / step;
            let kr = k.round();
            if (k - kr).abs() > 1e-9 {
                return Err(Error::OffLattice(xi.to_vec()));
            }
            match self.storage_index(kr as i64) {
                Some(j) => idx.push(j),
                None => return Err(Error::OffLattice(xi.to_vec())),
            }
        }
        Ok(self.flat_index(&idx))
    }
}

/// One `n`-dimensional transform plan (both directions) for a grid.
pub struct Transformer {
    grid: TorusGrid,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    /// `e^{iπk}` per axis index: the offset from storage origin `-L` to `x = 0`.
    parity: Vec<f64>,
}

impl std::fmt::Debug for Transformer {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Transformer").field("grid", &self.grid).finish()
    }
}

impl Transformer {
    pub fn new(grid: TorusGrid) -> Self {
        let mut planner = FftPlanner::new();
        let m = grid.points();
        let parity = (0..m)
            .map(|j| if grid.wavenumber(j).rem_euclid(2) == 0 { 1.0 } else { -1.0 })
            .collect();
        Self {
            grid,
            forward: planner.plan_fft_forward(m),
            inverse: planner.plan_fft_inverse(m),
            parity,
        }
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    /// In-place unitary transform of one scalar component laid out row-major.
    pub fn transform_scalar(&self, data: &mut [Complex64], inverse: bool) {
        let m = self.grid.points();
        let dim = self.grid.dim();
        assert_eq!(data.len(), self.grid.len());
        let fft = if inverse { &self.inverse } else { &self.forward };

        if inverse {
            self.apply_parity(data);
        }
        let mut line = vec![Complex64::new(0.0, 0.0); m];
        let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
        for axis in 0..dim {
            let stride = m.pow((dim - 1 - axis) as u32);
            let outer = self.grid.len() / m;
            for o in 0..outer {
                // base index with the current axis at zero
                let hi = o / stride;
                let lo = o % stride;
                let base = hi * stride * m + lo;
                for (j, slot) in line.iter_mut().enumerate() {
                    *slot = data[base + j * stride];
                }
                fft.process_with_scratch(&mut line, &mut scratch);
                for (j, v) in line.iter().enumerate() {
                    data[base + j * stride] = *v;
                }
            }
        }
        let scale = 1.0 / (self.grid.len() as f64).sqrt();
        data.iter_mut().for_each(|z| *z *= scale);
        if !inverse {
            self.apply_parity(data);
        }
    }

    fn apply_parity(&self, data: &mut [Complex64]) {
        for (flat, z) in data.iter_mut().enumerate() {
            let sign: f64 = self.grid.multi_index(flat).iter().map(|&j| self.parity[j]).product();
            if sign < 0.0 {
                *z = -*z;
            }
        }
    }

    fn transform_components(&self, values: &[Complex64], inverse: bool) -> Vec<Complex64> {
        let n = self.grid.dim();
        let len = self.grid.len();
        let comps: Vec<Vec<Complex64>> = (0..n)
            .into_par_iter()
            .map(|c| {
                let mut buf: Vec<Complex64> = (0..len).map(|p| values[p * n + c]).collect();
                self.transform_scalar(&mut buf, inverse);
                buf
            })
            .collect();
        let mut out = vec![Complex64::new(0.0, 0.0); len * n];
        for (c, comp) in comps.iter().enumerate() {
            for (p, v) in comp.iter().enumerate() {
                out[p * n + c] = *v;
            }
        }
        out
    }

    pub fn forward(&self, f: &VectorField) -> SpectralVectorField {
        assert_eq!(f.grid, self.grid);
        SpectralVectorField { grid: self.grid, coefficients: self.transform_components(&f.values, false) }
    }

    pub fn inverse(&self, f: &SpectralVectorField) -> VectorField {
        assert_eq!(f.grid, self.grid);
        VectorField { grid: self.grid, values: self.transform_components(&f.coefficients, true) }
    }
}

/// Unitary forward DFT, component by component.
pub fn forward_transform(f: &VectorField) -> SpectralVectorField {
    Transformer::new(f.grid).forward(f)
}

pub fn inverse_transform(f: &SpectralVectorField) -> VectorField {
    Transformer::new(f.grid).inverse(f)
}

fn weighted_norm(grid: &TorusGrid, values: &[Complex64]) -> f64 {
    (grid.cell_volume() * values.iter().map(|z| z.norm_sqr()).sum::<f64>()).sqrt()
}

/// Samples of a `ℂⁿ`-valued field, interleaved: entry `p·n + c` is component
/// `c` at grid point `p`.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    grid: TorusGrid,
    values: Vec<Complex64>,
}

impl VectorField {
    pub fn new(grid: TorusGrid, values: Vec<Complex64>) -> Result<Self> {
        let expected = grid.len() * grid.dim();
        if values.len() != expected {
            return Err(Error::DimensionMismatch { expected, actual: values.len() });
        }
        if values.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::Format("field contains non-finite values".into()));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: TorusGrid) -> Self {
        Self { grid, values: vec![Complex64::new(0.0, 0.0); grid.len() * grid.dim()] }
    }

    /// Samples `f(x)` at every grid point.
    pub fn from_fn<F>(grid: TorusGrid, f: F) -> Self
    where
        F: Fn(&DVector<f64>) -> DVector<Complex64> + Sync,
    {
        let n = grid.dim();
        let values = (0..grid.len())
            .into_par_iter()
            .flat_map_iter(|p| {
                let v = f(&grid.position(p));
                assert_eq!(v.len(), n);
                v.into_iter().copied().collect::<Vec<_>>()
            })
            .collect();
        Self { grid, values }
    }

    /// Random field with independent uniform complex coefficients on the
    /// lattice cube `|k|∞ ≤ max_wavenumber`. With `real = true` the real part
    /// is taken, which stays inside the same cube.
    pub fn random_band_limited<R: Rng + ?Sized>(
        grid: TorusGrid,
        max_wavenumber: usize,
        real: bool,
        rng: &mut R,
    ) -> Result<Self> {
        if max_wavenumber >= grid.points() / 2 {
            return Err(Error::BandLimit(format!(
                "max wavenumber {max_wavenumber} reaches the Nyquist index {}",
                grid.points() / 2
            )));
        }
        let n = grid.dim();
        let mut coefficients = vec![Complex64::new(0.0, 0.0); grid.len() * n];
        for p in 0..grid.len() {
            let inside = grid.wavenumbers(p).iter().all(|k| k.unsigned_abs() as usize <= max_wavenumber);
            if inside {
                for c in 0..n {
                    let (a, b): (f64, f64) = (rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
                    coefficients[p * n + c] = Complex64::new(a, b);
                }
            }
        }
        let mut f = inverse_transform(&SpectralVectorField { grid, coefficients });
        if real {
            f.values.iter_mut().for_each(|z| z.im = 0.0);
        }
        Ok(f)
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn at(&self, p: usize) -> &[Complex64] {
        let n = self.grid.dim();
        &self.values[p * n..(p + 1) * n]
    }

    /// Discrete `L²` norm with weight `hⁿ`.
    pub fn l2_norm(&self) -> f64 {
        weighted_norm(&self.grid, &self.values)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_real(&self) -> bool {
        self.values.iter().all(|z| z.im == 0.0)
    }

    /// `self − other`.
    pub fn sub(&self, other: &VectorField) -> VectorField {
        assert_eq!(self.grid, other.grid);
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect();
        VectorField { grid: self.grid, values }
    }

    pub fn scale(&self, s: Complex64) -> VectorField {
        VectorField { grid: self.grid, values: self.values.iter().map(|z| z * s).collect() }
    }

    /// Component `c` as a scalar array in grid order.
    pub fn component(&self, c: usize) -> Vec<Complex64> {
        let n = self.grid.dim();
        (0..self.grid.len()).map(|p| self.values[p * n + c]).collect()
    }

    pub fn from_components(grid: TorusGrid, comps: &[Vec<Complex64>]) -> Result<Self> {
        let n = grid.dim();
        if comps.len() != n {
            return Err(Error::DimensionMismatch { expected: n, actual: comps.len() });
        }
        let mut values = vec![Complex64::new(0.0, 0.0); grid.len() * n];
        for (c, comp) in comps.iter().enumerate() {
            if comp.len() != grid.len() {
                return Err(Error::DimensionMismatch { expected: grid.len(), actual: comp.len() });
            }
            for (p, v) in comp.iter().enumerate() {
                values[p * n + c] = *v;
            }
        }
        Self::new(grid, values)
    }
}

/// Discrete Fourier coefficients of a [`VectorField`], same interleaving.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralVectorField {
    grid: TorusGrid,
    coefficients: Vec<Complex64>,
}

impl SpectralVectorField {
    pub fn new(grid: TorusGrid, coefficients: Vec<Complex64>) -> Result<Self> {
        let expected = grid.len() * grid.dim();
        if coefficients.len() != expected {
            return Err(Error::DimensionMismatch { expected, actual: coefficients.len() });
        }
        Ok(Self { grid, coefficients })
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    pub fn coefficients_mut(&mut self) -> &mut [Complex64] {
        &mut self.coefficients
    }

    pub fn at(&self, k: usize) -> &[Complex64] {
        let n = self.grid.dim();
        &self.coefficients[k * n..(k + 1) * n]
    }

    pub fn l2_norm(&self) -> f64 {
        weighted_norm(&self.grid, &self.coefficients)
    }

    /// Share of the energy sitting on the Nyquist planes.
    pub fn nyquist_energy_fraction(&self) -> f64 {
        let n = self.grid.dim();
        let total: f64 = self.coefficients.iter().map(|z| z.norm_sqr()).sum();
        if total == 0.0 {
            return 0.0;
        }
        let nyq: f64 = (0..self.grid.len())
            .filter(|&k| self.grid.is_nyquist(k))
            .map(|k| self.coefficients[k * n..(k + 1) * n].iter().map(|z| z.norm_sqr()).sum::<f64>())
            .sum();
        nyq / total
    }

    /// Errors if the field carries energy on the Nyquist planes, where the
    /// sign of `ξ` (and hence any multiplier) is ambiguous.
    pub fn ensure_band_limited(&self) -> Result<()> {
        let frac = self.nyquist_energy_fraction();
        if frac > NYQUIST_ENERGY_TOL {
            return Err(Error::BandLimit(format!(
                "energy fraction {frac:.3e} on the Nyquist planes (allowed {NYQUIST_ENERGY_TOL:e})"
            )));
        }
        Ok(())
    }

    /// Largest `|ξ|` among coefficients above `rel_tol` times the largest one.
    pub fn band_limit(&self, rel_tol: f64) -> f64 {
        let n = self.grid.dim();
        let amp = |k: usize| {
            self.coefficients[k * n..(k + 1) * n].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
        };
        let peak = (0..self.grid.len()).map(amp).fold(0.0, f64::max);
        (0..self.grid.len())
            .filter(|&k| amp(k) > rel_tol * peak && peak > 0.0)
            .map(|k| self.grid.frequency(k).norm())
            .fold(0.0, f64::max)
    }

    /// Zeroes every coefficient with `|ξ| > radius` and the Nyquist planes.
    pub fn truncate(&mut self, radius: f64) {
        let n = self.grid.dim();
        for k in 0..self.grid.len() {
            if self.grid.is_nyquist(k) || self.grid.frequency(k).norm() > radius {
                self.coefficients[k * n..(k + 1) * n].fill(Complex64::new(0.0, 0.0));
            }
        }
    }
}

/// Multiplies the coefficient at every lattice frequency by `m(ξ)`.
pub fn apply_multiplier<M>(f: &SpectralVectorField, m: M) -> SpectralVectorField
where
    M: Fn(&DVector<f64>) -> DMatrix<Complex64> + Sync,
{
    let grid = f.grid;
    let coefficients = (0..grid.len())
        .into_par_iter()
        .flat_map_iter(|k| {
            let mat = m(&grid.frequency(k));
            let c = DVector::from_column_slice(f.at(k));
            (mat * c).into_iter().copied().collect::<Vec<_>>()
        })
        .collect();
    SpectralVectorField { grid, coefficients }
}

/// Discrete `Hˢ` norm `(hⁿ Σ_k (1+|ξ_k|²)^s |f̂_k|²)^{1/2}`.
pub fn sobolev_norm(f: &SpectralVectorField, s: f64) -> f64 {
    let n = f.grid.dim();
    let sum: f64 = (0..f.grid.len())
        .map(|k| {
            let w = (1.0 + f.grid.frequency(k).norm_squared()).powf(s);
            w * f.coefficients[k * n..(k + 1) * n].iter().map(|z| z.norm_sqr()).sum::<f64>()
        })
        .sum();
    (f.grid.cell_volume() * sum).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn grid_validation() {
        assert!(TorusGrid::new(2, 16, 1.0).is_ok());
        assert!(TorusGrid::new(1, 16, 1.0).is_err());
        assert!(TorusGrid::new(2, 12, 1.0).is_err());
        assert!(TorusGrid::new(2, 2, 1.0).is_err());
        assert!(TorusGrid::new(3, 8, 0.0).is_err());
        let g = TorusGrid::new(2, 16, 2.0).unwrap();
        assert!(g.check_band_limit(g.nyquist() * 0.99).is_ok());
        assert!(g.check_band_limit(g.nyquist()).is_err());
    }

    #[test]
    fn index_maps_round_trip() {
        let g = TorusGrid::new(3, 8, 1.0).unwrap();
        for flat in [0, 1, 77, g.len() - 1] {
            assert_eq!(g.flat_index(&g.multi_index(flat)), flat);
        }
        assert_eq!(g.wavenumber(3), 3);
        assert_eq!(g.wavenumber(4), -4);
        assert_eq!(g.wavenumber(7), -1);
        let xi = g.frequency(g.flat_index(&[1, 7, 4]));
        assert_eq!(xi.as_slice(), &[PI, -PI, -4.0 * PI]);
        assert_eq!(g.lattice_index(&[PI, -PI, 0.0]).unwrap(), g.flat_index(&[1, 7, 0]));
        assert!(g.lattice_index(&[0.5, 0.0, 0.0]).is_err());
        assert!(g.lattice_index(&[4.0 * PI, 0.0, 0.0]).is_err());
    }

    #[test]
    fn constant_field_has_only_the_zero_mode() {
        let g = TorusGrid::new(2, 8, 1.0).unwrap();
        let f = VectorField::from_fn(g, |_| DVector::from_vec(vec![c(2.0), c(-1.0)]));
        let fh = forward_transform(&f);
        let scale = (g.len() as f64).sqrt();
        assert!((fh.at(0)[0] - c(2.0 * scale)).norm() < 1e-12);
        assert!((fh.at(0)[1] - c(-scale)).norm() < 1e-12);
        for k in 1..g.len() {
            assert!(fh.at(k).iter().all(|z| z.norm() < 1e-12));
        }
    }

    #[test]
    fn plane_wave_has_a_single_coefficient() {
        let g = TorusGrid::new(2, 16, 3.0).unwrap();
        let k = g.flat_index(&[3, 14]);
        let xi = g.frequency(k);
        let a = [Complex64::new(0.3, 0.1), Complex64::new(-0.2, 0.5)];
        let f = VectorField::from_fn(g, |x| {
            let ph = Complex64::cis(xi.dot(x));
            DVector::from_vec(vec![a[0] * ph, a[1] * ph])
        });
        let fh = forward_transform(&f);
        let scale = (g.len() as f64).sqrt();
        for q in 0..g.len() {
            for (comp, &ac) in a.iter().enumerate() {
                let expect = if q == k { ac * scale } else { c(0.0) };
                assert!((fh.at(q)[comp] - expect).norm() < 1e-11, "q={q}");
            }
        }
    }

    #[test]
    fn zero_in_zero_out() {
        let g = TorusGrid::new(3, 4, 1.0).unwrap();
        let z = inverse_transform(&SpectralVectorField::new(g, vec![c(0.0); g.len() * 3]).unwrap());
        assert_eq!(z, VectorField::zeros(g));
    }

    #[test]
    fn sobolev_norm_examples() {
        let g = TorusGrid::new(2, 16, 2.0).unwrap();
        let zero = forward_transform(&VectorField::zeros(g));
        assert_eq!(sobolev_norm(&zero, 1.5), 0.0);

        let k = g.flat_index(&[2, 15]);
        let xi = g.frequency(k);
        let f = VectorField::from_fn(g, |x| {
            let ph = Complex64::cis(xi.dot(x));
            DVector::from_vec(vec![ph, c(0.0)])
        });
        let f = f.scale(c(1.0 / f.l2_norm()));
        let fh = forward_transform(&f);
        for s in [0.0, 0.5, 1.0, 2.0] {
            let expect = (1.0 + xi.norm_squared()).powf(s / 2.0);
            assert!((sobolev_norm(&fh, s) - expect).abs() < 1e-12 * expect);
        }
    }

    #[test]
    fn h1_norm_matches_gradient_multiplier() {
        let g = TorusGrid::new(2, 32, 3.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let f = VectorField::random_band_limited(g, 6, true, &mut rng).unwrap();
        let fh = forward_transform(&f);
        // ∂_j f = (i ξ_j) f̂ per component; sum the spatial L² norms.
        let mut grad_sq = 0.0;
        for axis in 0..2 {
            let d = apply_multiplier(&fh, |xi| {
                DMatrix::<Complex64>::identity(2, 2) * Complex64::new(0.0, xi[axis])
            });
            grad_sq += inverse_transform(&d).l2_norm().powi(2);
        }
        let oracle = (f.l2_norm().powi(2) + grad_sq).sqrt();
        assert!((sobolev_norm(&fh, 1.0) - oracle).abs() < 1e-12 * oracle);
    }

    #[test]
    fn partition_multipliers_sum_to_identity() {
        use crate::lame_symbol::partition_of_unity;
        let g = TorusGrid::new(2, 16, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let fh = forward_transform(&VectorField::random_band_limited(g, 5, false, &mut rng).unwrap());
        let weight = |xi: &DVector<f64>, plus: bool| {
            let r = xi.norm();
            let w = if r == 0.0 {
                if plus { 1.0 } else { 0.0 }
            } else {
                let (p, m) = partition_of_unity(&(xi / r));
                if plus { p } else { m }
            };
            DMatrix::<Complex64>::identity(2, 2) * c(w)
        };
        let a = apply_multiplier(&fh, |xi| weight(xi, true));
        let b = apply_multiplier(&fh, |xi| weight(xi, false));
        for k in 0..fh.coefficients().len() {
            assert!((a.coefficients()[k] + b.coefficients()[k] - fh.coefficients()[k]).norm() < 1e-14);
        }
    }

    #[test]
    fn symbol_multiplier_on_longitudinal_plane_wave() {
        use crate::lame_symbol::{lame_symbol_matrix, FrequencyPoint, LameParams};
        let params = LameParams::new(2.0, 0.5).unwrap();
        let g = TorusGrid::new(2, 16, PI).unwrap();
        let xi0 = DVector::from_vec(vec![3.0, -2.0]);
        let omega: DVector<f64> = &xi0 / xi0.norm();
        let f = VectorField::from_fn(g, |x| omega.map(|w| Complex64::cis(xi0.dot(x)) * w));
        let out = apply_multiplier(&forward_transform(&f), |xi| {
            lame_symbol_matrix(&params, &FrequencyPoint::new(xi.clone()).unwrap()).map(c)
        });
        let eig = (params.lambda() + 2.0 * params.mu()) * xi0.norm_squared();
        let diff = inverse_transform(&out).sub(&f.scale(c(eig)));
        assert!(diff.max_abs() < 1e-11 * eig);
    }

    #[test]
    fn nyquist_detection() {
        let g = TorusGrid::new(2, 8, 1.0).unwrap();
        let k = g.flat_index(&[4, 1]);
        let mut coeffs = vec![c(0.0); g.len() * 2];
        coeffs[k * 2] = c(1.0);
        coeffs[2] = c(1.0);
        let f = SpectralVectorField::new(g, coeffs).unwrap();
        assert!((f.nyquist_energy_fraction() - 0.5).abs() < 1e-15);
        assert!(f.ensure_band_limited().is_err());
        let mut t = f.clone();
        t.truncate(f64::INFINITY);
        assert!(t.ensure_band_limited().is_ok());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn plancherel_and_round_trip(seed in any::<u64>(), three_d in any::<bool>(), big in any::<bool>()) {
            let (dim, m) = match (three_d, big) {
                (false, false) => (2, 16),
                (false, true) => (2, 64),
                (true, false) => (3, 16),
                (true, true) => (3, 32),
            };
            let g = TorusGrid::new(dim, m, 1.7).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let values = (0..g.len() * dim)
                .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
                .collect();
            let f = VectorField::new(g, values).unwrap();
            let fh = forward_transform(&f);
            prop_assert!((fh.l2_norm() - f.l2_norm()).abs() <= 1e-12 * f.l2_norm());
            prop_assert!((sobolev_norm(&fh, 0.0) - f.l2_norm()).abs() <= 1e-12 * f.l2_norm());
            let back = inverse_transform(&fh);
            prop_assert!(back.sub(&f).max_abs() <= 1e-12 * f.max_abs());
        }
    }
}
