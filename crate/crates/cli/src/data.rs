//! Initial data synthesis and loading.

use std::fs::File;
use std::io::BufReader;

use elastowave::oracle::PlaneWaveSpec;
use elastowave::spectral_grid::{read_field, Transformer};
use elastowave::{TorusGrid, VectorField};
use nalgebra::DVector;
use num_complex::Complex64;
use rand_chacha::ChaCha8Rng;

use crate::config::{DataConfig, GridConfig};
use crate::Failure;

pub struct InitialData {
    pub field: VectorField,
    /// Set for plane-wave data, which has a closed-form evolution.
    pub plane_wave: Option<PlaneWaveSpec>,
}

pub fn grid(cfg: &GridConfig) -> Result<TorusGrid, Failure> {
    Ok(TorusGrid::new(cfg.dim, cfg.points, cfg.half_period)?)
}

fn unit_polarization(p: &[f64], dim: usize) -> Result<DVector<Complex64>, Failure> {
    if p.len() != dim {
        return Err(Failure::Usage(format!("polarization has {} entries, grid dimension is {dim}", p.len())));
    }
    let v = DVector::from_column_slice(p);
    let norm = v.norm();
    if !(norm > 0.0 && norm.is_finite()) {
        return Err(Failure::Usage("polarization must be a nonzero finite vector".into()));
    }
    Ok((v / norm).map(|x| Complex64::new(x, 0.0)))
}

/// `rng` is required exactly when the data is random.
pub fn build(cfg: &DataConfig, grid: TorusGrid, rng: Option<&mut ChaCha8Rng>) -> Result<InitialData, Failure> {
    let n = grid.dim();
    match cfg {
        DataConfig::PlaneWave { wavenumber, polarization } => {
            if wavenumber.len() != n {
                return Err(Failure::Usage(format!("wavenumber has {} entries, grid dimension is {n}", wavenumber.len())));
            }
            let xi0 = DVector::from_iterator(n, wavenumber.iter().map(|&k| k as f64 * grid.frequency_step()));
            grid.lattice_index(xi0.as_slice())?;
            let spec = PlaneWaveSpec::new(xi0.clone(), unit_polarization(polarization, n)?)?;
            let a = spec.polarization().clone();
            let field = VectorField::from_fn(grid, move |x| {
                let ph = Complex64::cis(xi0.dot(x));
                a.map(|z| z * ph)
            });
            Ok(InitialData { field, plane_wave: Some(spec) })
        }
        DataConfig::Gaussian { width, polarization, center, cutoff } => {
            if !(*width > 0.0) || !(*cutoff > 0.0 && *cutoff < 1.0) {
                return Err(Failure::Usage(format!("gaussian needs width > 0 and 0 < cutoff < 1, got {width}, {cutoff}")));
            }
            let a = unit_polarization(polarization, n)?;
            let c = match center {
                Some(c) if c.len() == n => DVector::from_column_slice(c),
                Some(c) => return Err(Failure::Usage(format!("center has {} entries, grid dimension is {n}", c.len()))),
                None => DVector::zeros(n),
            };
            let w = *width;
            let raw = VectorField::from_fn(grid, move |x| {
                let g = (-(x - &c).norm_squared() / (2.0 * w * w)).exp();
                a.map(|z| z * g)
            });
            let tr = Transformer::new(grid);
            let mut fh = tr.forward(&raw);
            fh.truncate(cutoff * grid.nyquist());
            Ok(InitialData { field: tr.inverse(&fh), plane_wave: None })
        }
        DataConfig::Random { max_wavenumber, real } => {
            let rng = rng.ok_or_else(|| Failure::Usage("random data needs a seed (config \"seed\" or --seed)".into()))?;
            let field = VectorField::random_band_limited(grid, *max_wavenumber, *real, rng)?;
            Ok(InitialData { field, plane_wave: None })
        }
        DataConfig::File { path } => {
            let file = File::open(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
            let field = read_field(BufReader::new(file))
                .map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
            if *field.grid() != grid {
                log::warn!("{}: file grid overrides the configured grid", path.display());
            }
            Ok(InitialData { field, plane_wave: None })
        }
    }
}
