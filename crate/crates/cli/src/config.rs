//! Run configuration files (UTF-8 JSON). Every record rejects unknown keys;
//! omitted keys take the defaults below.

use std::path::{Path, PathBuf};

use elastowave::maximal_lab::QuadratureCounts;
use elastowave::propagator::Flavor;
use elastowave::LameParams;
use serde::de::DeserializeOwned;
use serde::Deserialize;

use crate::Failure;

pub fn load<T: DeserializeOwned + Default>(path: Option<&Path>) -> Result<T, Failure> {
    let Some(path) = path else {
        return Ok(T::default());
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Io(format!("cannot read config {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("invalid config {}: {e}", path.display())))
}

fn default_lame() -> LameParams {
    LameParams::new(1.0, 1.0).expect("unit Lamé constants are elliptic")
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub dim: usize,
    pub points: usize,
    pub half_period: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { dim: 2, points: 64, half_period: std::f64::consts::PI }
    }
}

/// Initial data for the grid-based commands.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DataConfig {
    /// `a·e^{ik·x·π/L}` for an integer wavenumber vector `k`.
    PlaneWave { wavenumber: Vec<i64>, polarization: Vec<f64> },
    /// `a·exp(−|x−c|²/(2σ²))`, truncated spectrally to `cutoff` times the
    /// Nyquist frequency.
    Gaussian {
        width: f64,
        polarization: Vec<f64>,
        #[serde(default)]
        center: Option<Vec<f64>>,
        #[serde(default = "default_cutoff")]
        cutoff: f64,
    },
    /// Uniform random coefficients on the lattice cube `|k|∞ ≤ max_wavenumber`.
    Random {
        max_wavenumber: usize,
        #[serde(default = "yes")]
        real: bool,
    },
    /// A field file in the binary layout.
    File { path: PathBuf },
}

fn default_cutoff() -> f64 {
    0.9
}

fn yes() -> bool {
    true
}

impl DataConfig {
    pub fn is_random(&self) -> bool {
        matches!(self, DataConfig::Random { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlavorName {
    HalfWavePlus,
    HalfWaveMinus,
    Cosine,
}

impl FlavorName {
    pub fn flavor(self) -> Flavor {
        match self {
            FlavorName::HalfWavePlus => Flavor::HalfWavePlus,
            FlavorName::HalfWaveMinus => Flavor::HalfWaveMinus,
            FlavorName::Cosine => Flavor::Cosine,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            FlavorName::HalfWavePlus => "half_wave_plus",
            FlavorName::HalfWaveMinus => "half_wave_minus",
            FlavorName::Cosine => "cosine",
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SymbolCheckConfig {
    pub lame: LameParams,
    pub dims: Vec<usize>,
    pub samples: usize,
    /// Frequencies are drawn uniformly from the cube `[−max, max]ⁿ`.
    pub max_frequency: f64,
    pub max_time: f64,
    pub tolerance: f64,
    pub seed: Option<u64>,
    pub out_dir: Option<PathBuf>,
}

impl Default for SymbolCheckConfig {
    fn default() -> Self {
        Self {
            lame: default_lame(),
            dims: vec![2, 3],
            samples: 10_000,
            max_frequency: 100.0,
            max_time: 10.0,
            tolerance: 1e-10,
            seed: None,
            out_dir: None,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PropagateConfig {
    pub lame: LameParams,
    pub grid: GridConfig,
    pub data: DataConfig,
    pub flavor: FlavorName,
    pub times: Vec<f64>,
    pub v: f64,
    /// Line direction; `e₁` when omitted.
    pub theta: Option<Vec<f64>>,
    pub energy_tolerance: f64,
    pub write_fields: bool,
    pub seed: Option<u64>,
    pub out_dir: Option<PathBuf>,
}

impl Default for PropagateConfig {
    fn default() -> Self {
        Self {
            lame: default_lame(),
            grid: GridConfig::default(),
            data: DataConfig::PlaneWave { wavenumber: vec![3, 4], polarization: vec![0.6, 0.8] },
            flavor: FlavorName::HalfWavePlus,
            times: vec![0.0, 0.5, 1.0, 2.0],
            v: 0.0,
            theta: None,
            energy_tolerance: 1e-12,
            write_fields: true,
            seed: None,
            out_dir: None,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SharpnessRunConfig {
    pub dim: usize,
    pub lame: LameParams,
    pub v: f64,
    /// Dyadic frequency scales `N`.
    pub scales: Vec<f64>,
    /// Sobolev orders `s`.
    pub orders: Vec<f64>,
    pub counts: QuadratureCounts,
    /// Sup-grid spacing in `t`; at most `1/(8αN)` for every `N`.
    pub t_spacing: Option<f64>,
    /// Must stay on: the critical time `t(x)` is always part of the sup.
    pub augment_critical_times: bool,
    pub slope_tolerance: f64,
    /// Smallest `N` at which `lower_bound ≥ ½|F|` is required.
    pub lower_bound_from: f64,
    pub out_dir: Option<PathBuf>,
}

impl Default for SharpnessRunConfig {
    fn default() -> Self {
        Self {
            dim: 2,
            lame: default_lame(),
            v: 1.0,
            scales: (6..=12).map(|k| f64::powi(2.0, k)).collect(),
            orders: vec![0.0, 0.25, 0.4, 0.5],
            counts: QuadratureCounts::default(),
            t_spacing: None,
            augment_critical_times: true,
            slope_tolerance: 0.1,
            lower_bound_from: 256.0,
            out_dir: None,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpaceTimeConfig {
    pub draws: usize,
    pub v_max: f64,
    pub t_count: usize,
    pub max_wavenumber: usize,
    /// Allowed `max/min − 1` of `ratio0` across draws.
    pub spread_tolerance: f64,
}

impl Default for SpaceTimeConfig {
    fn default() -> Self {
        Self { draws: 100, v_max: 4.0, t_count: 256, max_wavenumber: 3, spread_tolerance: 0.01 }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConvergeConfig {
    pub lame: LameParams,
    pub grid: GridConfig,
    pub data: DataConfig,
    pub speeds: Vec<f64>,
    /// Number of equispaced directions in the `(e₁, e₂)` plane.
    pub directions: usize,
    pub times: Vec<f64>,
    /// Allowed relative departure of each halving ratio from `1/2`.
    pub halving_tolerance: f64,
    pub space_time: Option<SpaceTimeConfig>,
    pub seed: Option<u64>,
    pub out_dir: Option<PathBuf>,
}

impl Default for ConvergeConfig {
    fn default() -> Self {
        Self {
            lame: default_lame(),
            grid: GridConfig { dim: 2, points: 32, half_period: std::f64::consts::PI },
            data: DataConfig::Random { max_wavenumber: 3, real: true },
            speeds: vec![0.0, 1.0, 3.0],
            directions: 8,
            times: (5..=10).map(|k| f64::powi(2.0, -k)).collect(),
            halving_tolerance: 0.2,
            space_time: None,
            seed: None,
            out_dir: None,
        }
    }
}
