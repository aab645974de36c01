//! Cones around `e₁`, their product quadratures, and exact radial moments.

use std::f64::consts::PI;
use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;
use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// `{ξ : ∠(e₁, ξ) ≤ half_angle, r_min ≤ |ξ| ≤ r_max}` in dimension 2 or 3.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sector {
    dim: usize,
    half_angle: f64,
    r_min: f64,
    r_max: f64,
}

impl Sector {
    pub fn new(dim: usize, half_angle: f64, r_min: f64, r_max: f64) -> Result<Self> {
        if !(2..=3).contains(&dim) {
            return Err(Error::Dimension(dim));
        }
        if !(half_angle > 0.0 && half_angle < PI / 2.0) {
            return Err(Error::Domain(format!("sector half-angle {half_angle} outside (0, π/2)")));
        }
        if !(r_min >= 0.0 && r_max > r_min && r_max.is_finite()) {
            return Err(Error::Domain(format!("radial range [{r_min}, {r_max}] is empty")));
        }
        Ok(Self { dim, half_angle, r_min, r_max })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn half_angle(&self) -> f64 {
        self.half_angle
    }

    pub fn r_min(&self) -> f64 {
        self.r_min
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    /// Measure of the angular cap on the unit sphere.
    pub fn cap_measure(&self) -> f64 {
        match self.dim {
            2 => 2.0 * self.half_angle,
            _ => 2.0 * PI * (1.0 - self.half_angle.cos()),
        }
    }

    /// `∫_{r_min}^{r_max} r^{n−1} dr`.
    pub fn radial_moment(&self) -> f64 {
        let n = self.dim as i32;
        (self.r_max.powi(n) - self.r_min.powi(n)) / n as f64
    }

    /// Lebesgue measure, in closed form.
    pub fn measure(&self) -> f64 {
        self.cap_measure() * self.radial_moment()
    }

    pub fn contains(&self, p: &DVector<f64>) -> bool {
        let r = p.norm();
        if r < self.r_min || r > self.r_max {
            return false;
        }
        r == 0.0 || angle_to_e1(p) <= self.half_angle
    }

    /// Gauss product rule: `angular` nodes per angular coordinate, `radial`
    /// Gauss nodes in `r` with the Jacobian `r^{n−1}` folded into the weights.
    ///
    /// In 3D the polar angle gets Gauss nodes and the azimuth `angular`
    /// equispaced nodes.
    pub fn rule(&self, angular: usize, radial: usize) -> SectorRule {
        let directions = match self.dim {
            2 => gauss(-self.half_angle, self.half_angle, angular)
                .into_iter()
                .map(|(psi, w)| (DVector::from_vec(vec![psi.cos(), psi.sin()]), w))
                .collect(),
            _ => {
                let polar = gauss(0.0, self.half_angle, angular);
                let dphi = 2.0 * PI / angular as f64;
                let mut dirs = Vec::with_capacity(angular * angular);
                for &(gamma, w) in &polar {
                    for j in 0..angular {
                        let phi = j as f64 * dphi;
                        let (sg, cg) = gamma.sin_cos();
                        dirs.push((
                            DVector::from_vec(vec![cg, sg * phi.cos(), sg * phi.sin()]),
                            w * sg * dphi,
                        ));
                    }
                }
                dirs
            }
        };
        let k = self.dim as i32 - 1;
        let radii = gauss(self.r_min, self.r_max, radial)
            .into_iter()
            .map(|(r, w)| (r, w * r.powi(k)))
            .collect();
        SectorRule { sector: *self, directions, radii }
    }

    /// Equispaced closed grid with `per_axis` points in every polar
    /// coordinate, boundary included. Used for exhaustive inequality checks.
    pub fn closed_grid(&self, per_axis: usize) -> Vec<DVector<f64>> {
        let per_axis = per_axis.max(2);
        let lin = |a: f64, b: f64, i: usize| a + (b - a) * i as f64 / (per_axis - 1) as f64;
        let mut out = Vec::new();
        for ir in 0..per_axis {
            let r = lin(self.r_min, self.r_max, ir);
            match self.dim {
                2 => {
                    for ia in 0..per_axis {
                        let psi = lin(-self.half_angle, self.half_angle, ia);
                        out.push(DVector::from_vec(vec![r * psi.cos(), r * psi.sin()]));
                    }
                }
                _ => {
                    for ia in 0..per_axis {
                        let gamma = lin(0.0, self.half_angle, ia);
                        for iz in 0..per_axis {
                            let phi = 2.0 * PI * iz as f64 / per_axis as f64;
                            let (sg, cg) = gamma.sin_cos();
                            out.push(DVector::from_vec(vec![
                                r * cg,
                                r * sg * phi.cos(),
                                r * sg * phi.sin(),
                            ]));
                        }
                    }
                }
            }
        }
        out
    }
}

/// Product rule on a [`Sector`]: directions `ω` with cap weights, radii with
/// radial weights (Jacobian included).
#[derive(Debug, Clone)]
pub struct SectorRule {
    pub sector: Sector,
    pub directions: Vec<(DVector<f64>, f64)>,
    pub radii: Vec<(f64, f64)>,
}

impl SectorRule {
    pub fn len(&self) -> usize {
        self.directions.len() * self.radii.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// All nodes `(rω, w_ω·w_r)`, direction-major.
    pub fn nodes(&self) -> Vec<(DVector<f64>, f64)> {
        let mut out = Vec::with_capacity(self.len());
        for (omega, wa) in &self.directions {
            for &(r, wr) in &self.radii {
                out.push((omega * r, wa * wr));
            }
        }
        out
    }

    pub fn weight_sum(&self) -> f64 {
        let a: f64 = self.directions.iter().map(|d| d.1).sum();
        let r: f64 = self.radii.iter().map(|d| d.1).sum();
        a * r
    }
}

pub fn angle_to_e1(p: &DVector<f64>) -> f64 {
    let perp = p.rows(1, p.len() - 1).norm();
    perp.atan2(p[0])
}

/// Gauss–Legendre nodes and weights on `[a, b]`.
pub fn gauss(a: f64, b: f64, count: usize) -> Vec<(f64, f64)> {
    let rule = GaussLegendre::new(NonZeroUsize::new(count).expect("quadrature count is positive"));
    let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
    rule.as_node_weight_pairs()
        .iter()
        .map(|&(x, w)| (mid + half * x, half * w))
        .collect()
}

/// Below this value of `|κ|·b` the moment is summed as a power series.
const SERIES_SWITCH: f64 = 1.0;

/// `∫_a^b r^k e^{iκr} dr` for `k ∈ {0, 1, 2}`, exact up to rounding.
pub fn radial_moment(k: usize, a: f64, b: f64, kappa: f64) -> Complex64 {
    if kappa.abs() * b <= SERIES_SWITCH {
        return moment_series(k, a, b, kappa);
    }
    let coeffs = antiderivative_coefficients(k, kappa);
    antiderivative(&coeffs, k, b, Complex64::cis(kappa * b))
        - antiderivative(&coeffs, k, a, Complex64::cis(kappa * a))
}

fn moment_series(k: usize, a: f64, b: f64, kappa: f64) -> Complex64 {
    let mut sum = Complex64::new(0.0, 0.0);
    let mut factor = Complex64::new(1.0, 0.0); // (iκ)^m / m!
    let (mut pa, mut pb) = (a.powi(k as i32 + 1), b.powi(k as i32 + 1));
    for m in 0..40 {
        let p = (k + m + 1) as f64;
        let term = factor * ((pb - pa) / p);
        sum += term;
        if term.norm() <= 1e-18 * sum.norm() {
            break;
        }
        factor *= Complex64::new(0.0, kappa) / (m + 1) as f64;
        pa *= a;
        pb *= b;
    }
    sum
}

/// `c_j = (−1)^j k!/(k−j)! / (iκ)^{j+1}`, so that
/// `d/dr [e^{iκr} Σ_j c_j r^{k−j}] = r^k e^{iκr}`.
fn antiderivative_coefficients(k: usize, kappa: f64) -> [Complex64; 3] {
    let inv = Complex64::new(0.0, -1.0 / kappa); // 1/(iκ)
    let mut c = [Complex64::new(0.0, 0.0); 3];
    let mut falling = 1.0;
    let mut power = inv;
    for (j, cj) in c.iter_mut().enumerate().take(k + 1) {
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        *cj = power * (sign * falling);
        falling *= (k - j) as f64;
        power *= inv;
    }
    c
}

fn antiderivative(c: &[Complex64; 3], k: usize, r: f64, phase: Complex64) -> Complex64 {
    let poly = match k {
        0 => c[0],
        1 => c[0] * r + c[1],
        _ => (c[0] * r + c[1]) * r + c[2],
    };
    phase * poly
}

/// Radial moments along `κ_m = κ₀ + m·dκ`, stepping the endpoint phases by
/// multiplication and re-seeding them every [`RESEED`] steps.
#[derive(Debug, Clone)]
pub(crate) struct MomentSweep {
    k: usize,
    a: f64,
    b: f64,
    kappa0: f64,
    dkappa: f64,
    step_a: Complex64,
    step_b: Complex64,
    phase_a: Complex64,
    phase_b: Complex64,
    m: usize,
}

const RESEED: usize = 64;

impl MomentSweep {
    pub(crate) fn new(k: usize, a: f64, b: f64, kappa0: f64, dkappa: f64) -> Self {
        Self {
            k,
            a,
            b,
            kappa0,
            dkappa,
            step_a: Complex64::cis(dkappa * a),
            step_b: Complex64::cis(dkappa * b),
            phase_a: Complex64::cis(kappa0 * a),
            phase_b: Complex64::cis(kappa0 * b),
            m: 0,
        }
    }

    /// Moment at the current `κ`, then advances one step.
    pub(crate) fn next_moment(&mut self) -> Complex64 {
        let kappa = self.kappa0 + self.m as f64 * self.dkappa;
        let value = if kappa.abs() * self.b <= SERIES_SWITCH {
            moment_series(self.k, self.a, self.b, kappa)
        } else {
            let c = antiderivative_coefficients(self.k, kappa);
            antiderivative(&c, self.k, self.b, self.phase_b) - antiderivative(&c, self.k, self.a, self.phase_a)
        };
        self.m += 1;
        if self.m.is_multiple_of(RESEED) {
            let kappa = self.kappa0 + self.m as f64 * self.dkappa;
            self.phase_a = Complex64::cis(kappa * self.a);
            self.phase_b = Complex64::cis(kappa * self.b);
        } else {
            self.phase_a *= self.step_a;
            self.phase_b *= self.step_b;
        }
        value
    }
}
