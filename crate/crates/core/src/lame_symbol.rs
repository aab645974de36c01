//! Pointwise algebra of the Lamé symbol.
//!
//! The symbol of `-Δ*` at a frequency `ξ` is `L(ξ) = μ|ξ|² I + (λ+μ) ξξᵗ`.
//! It is diagonalized by rotating `ω = ξ/|ξ|` to `±e₁` along the great
//! circle through `e₁` and `ω`, with a smooth partition of unity on the
//! sphere selecting which of the two rotation fields is used. Everything
//! here acts on a single frequency; grids and quadratures live elsewhere.

use nalgebra::{DMatrix, DVector, RowDVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::smooth::bump_transition;

/// Half-width of the transition band of the partition of unity, measured in
/// `ω·e₁`. Must lie in `(0, 1/√2)` so each weight is supported inside the
/// interior of its cap.
pub const PARTITION_HALF_WIDTH: f64 = 0.5;

const UNIT_TOL: f64 = 1e-12;

/// Lamé constants with the ellipticity condition enforced.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawLame", into = "RawLame")]
pub struct LameParams {
    lambda: f64,
    mu: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLame {
    lambda: f64,
    mu: f64,
}

impl TryFrom<RawLame> for LameParams {
    type Error = Error;
    fn try_from(raw: RawLame) -> Result<Self> {
        LameParams::new(raw.lambda, raw.mu)
    }
}

impl From<LameParams> for RawLame {
    fn from(p: LameParams) -> Self {
        RawLame { lambda: p.lambda, mu: p.mu }
    }
}

impl LameParams {
    pub fn new(lambda: f64, mu: f64) -> Result<Self> {
        let ok = lambda.is_finite() && mu.is_finite() && mu > 0.0 && lambda + 2.0 * mu > 0.0;
        if !ok {
            return Err(Error::Ellipticity { lambda, mu });
        }
        Ok(Self { lambda, mu })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// Longitudinal (pressure) speed `√(λ+2μ)`.
    pub fn p_speed(&self) -> f64 {
        (self.lambda + 2.0 * self.mu).sqrt()
    }

    /// Transverse (shear) speed `√μ`.
    pub fn s_speed(&self) -> f64 {
        self.mu.sqrt()
    }

    /// `λ + μ = 0`: the system decouples into scalar wave equations.
    pub fn is_classical_wave(&self) -> bool {
        self.lambda + self.mu == 0.0
    }

    /// Diagonal of `√Λ(ξ)` for `|ξ| = magnitude`: `c_p|ξ|` then `c_s|ξ|` repeated.
    pub fn root_eigenvalues(&self, dim: usize, magnitude: f64) -> DVector<f64> {
        let mut d = DVector::from_element(dim, self.s_speed() * magnitude);
        d[0] = self.p_speed() * magnitude;
        d
    }
}

/// A frequency vector in `ℝⁿ`, `n ≥ 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyPoint {
    xi: DVector<f64>,
}

impl FrequencyPoint {
    pub fn new(xi: DVector<f64>) -> Result<Self> {
        if xi.len() < 2 {
            return Err(Error::Dimension(xi.len()));
        }
        Ok(Self { xi })
    }

    pub fn from_slice(xi: &[f64]) -> Result<Self> {
        Self::new(DVector::from_column_slice(xi))
    }

    pub fn dim(&self) -> usize {
        self.xi.len()
    }

    pub fn vector(&self) -> &DVector<f64> {
        &self.xi
    }

    pub fn magnitude(&self) -> f64 {
        self.xi.norm()
    }

    /// `ξ/|ξ|`, or `None` at the origin.
    pub fn direction(&self) -> Option<DVector<f64>> {
        let r = self.magnitude();
        (r > 0.0).then(|| &self.xi / r)
    }
}

/// Which rotation field: `ρ₊` takes `ω` to `e₁`, `ρ₋` takes it to `-e₁`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub const BOTH: [Sign; 2] = [Sign::Plus, Sign::Minus];

    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// `L(ξ) = μ|ξ|² Iₙ + (λ+μ) ξξᵗ`.
pub fn lame_symbol_matrix(params: &LameParams, xi: &FrequencyPoint) -> DMatrix<f64> {
    let v = xi.vector();
    let n = v.len();
    let r2 = v.norm_squared();
    let mut m = DMatrix::identity(n, n) * (params.mu * r2);
    m += (v * v.transpose()) * (params.lambda + params.mu);
    m
}

fn check_unit(omega: &DVector<f64>) -> Result<()> {
    if omega.len() < 2 {
        return Err(Error::Dimension(omega.len()));
    }
    let norm = omega.norm();
    if (norm - 1.0).abs() > UNIT_TOL {
        return Err(Error::NotUnit { norm });
    }
    Ok(())
}

/// The rotation `ρ±(ω)`: its transpose carries `ω` to `±e₁` along the arc of
/// the great circle through `e₁` and `ω`, fixing `span{e₁, ω}^⊥` pointwise.
///
/// Rejects non-unit `ω` and `ω` outside the cap `S± = {ω·(±e₁) ≥ -1/√2}`.
pub fn geodesic_rotation(sign: Sign, omega: &DVector<f64>) -> Result<DMatrix<f64>> {
    check_unit(omega)?;
    let n = omega.len();
    let cos = sign.value() * omega[0];
    if cos < -std::f64::consts::FRAC_1_SQRT_2 {
        return Err(Error::OutsideCap { dot: cos });
    }
    // Component of ω orthogonal to e₁; exact since it just drops the first entry.
    let mut perp = omega.clone();
    perp[0] = 0.0;
    let sin = perp.norm();
    if sin == 0.0 {
        return Ok(DMatrix::identity(n, n));
    }
    let u = perp / sin;
    let angle = sin.atan2(cos);
    let (s, c) = angle.sin_cos();

    let mut target = DVector::zeros(n);
    target[0] = sign.value();

    // ρᵗ = I + (cos θ − 1)(ttᵗ + uuᵗ) + sin θ (tuᵗ − utᵗ)
    let tt = &target * target.transpose();
    let uu = &u * u.transpose();
    let tu = &target * u.transpose();
    let ut = &u * target.transpose();
    let rho_t = DMatrix::identity(n, n) + (tt + uu) * (c - 1.0) + (tu - ut) * s;
    Ok(rho_t.transpose())
}

/// `R±(ξ) = ρ±(ξ/|ξ|)`. At `ξ = 0` the rotation is the identity.
pub fn rotation_field(sign: Sign, xi: &FrequencyPoint) -> Result<DMatrix<f64>> {
    match xi.direction() {
        Some(omega) => geodesic_rotation(sign, &omega),
        None => Ok(DMatrix::identity(xi.dim(), xi.dim())),
    }
}

/// Smooth partition of unity `(φ₊(ω), φ₋(ω))` depending only on `ω·e₁`.
pub fn partition_of_unity(omega: &DVector<f64>) -> (f64, f64) {
    let c = omega[0];
    let plus = bump_transition(c, PARTITION_HALF_WIDTH);
    let minus = bump_transition(-c, PARTITION_HALF_WIDTH);
    (plus, minus)
}

/// One active branch of the diagonalization at a frequency.
#[derive(Debug, Clone)]
pub struct Branch {
    pub sign: Sign,
    pub weight: f64,
    pub rotation: DMatrix<f64>,
}

/// The data `{φ±(ω), R±(ξ)}` at one frequency, for the branches with
/// nonzero weight. Independent of time, so it can be cached.
#[derive(Debug, Clone)]
pub struct Diagonalization {
    pub magnitude: f64,
    pub branches: Vec<Branch>,
}

impl Diagonalization {
    pub fn new(xi: &FrequencyPoint) -> Self {
        let magnitude = xi.magnitude();
        let branches = match xi.direction() {
            None => Vec::new(),
            Some(omega) => {
                let (wp, wm) = partition_of_unity(&omega);
                Sign::BOTH
                    .into_iter()
                    .zip([wp, wm])
                    .filter(|&(_, w)| w > 0.0)
                    .map(|(sign, weight)| Branch {
                        sign,
                        weight,
                        // weight > 0 keeps ω strictly inside the cap
                        rotation: geodesic_rotation(sign, &omega)
                            .expect("positive partition weight implies ω in the cap"),
                    })
                    .collect()
            }
        };
        Self { magnitude, branches }
    }

    /// `Σ± φ± R± diag(d) R±ᵗ` for a complex diagonal `d`.
    pub fn conjugate_diagonal(&self, diag: &[Complex64]) -> Option<DMatrix<Complex64>> {
        let n = diag.len();
        if self.branches.is_empty() {
            return None;
        }
        let mut out = DMatrix::<Complex64>::zeros(n, n);
        for b in &self.branches {
            add_conjugated(&mut out, &b.rotation, diag, b.weight);
        }
        Some(out)
    }

    /// `e^{it√L(ξ)}` assembled through the rotation fields; the identity at `ξ = 0`.
    pub fn propagator(&self, params: &LameParams, dim: usize, t: f64) -> DMatrix<Complex64> {
        let roots = params.root_eigenvalues(dim, self.magnitude);
        let diag: Vec<Complex64> = roots.iter().map(|&w| Complex64::cis(t * w)).collect();
        self.conjugate_diagonal(&diag)
            .unwrap_or_else(|| DMatrix::identity(dim, dim))
    }

    /// `√L(ξ) = Σ± φ± R± √Λ R±ᵗ`.
    pub fn square_root(&self, params: &LameParams, dim: usize) -> DMatrix<f64> {
        let roots = params.root_eigenvalues(dim, self.magnitude);
        let diag: Vec<Complex64> = roots.iter().map(|&w| Complex64::new(w, 0.0)).collect();
        self.conjugate_diagonal(&diag)
            .map(|m| m.map(|z| z.re))
            .unwrap_or_else(|| DMatrix::zeros(dim, dim))
    }
}

/// `out += w · R diag(d) Rᵗ` with `R` real.
pub(crate) fn add_conjugated(
    out: &mut DMatrix<Complex64>,
    rotation: &DMatrix<f64>,
    diag: &[Complex64],
    weight: f64,
) {
    let n = diag.len();
    for i in 0..n {
        for j in 0..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for (k, d) in diag.iter().enumerate() {
                acc += d * (rotation[(i, k)] * rotation[(j, k)]);
            }
            out[(i, j)] += acc * weight;
        }
    }
}

/// One branch of the diagonalization, `R±(ξ) Λ(ξ) R±ᵗ(ξ)`.
pub fn conjugated_symbol(params: &LameParams, sign: Sign, xi: &FrequencyPoint) -> Result<DMatrix<f64>> {
    let r = rotation_field(sign, xi)?;
    let lam = params.root_eigenvalues(xi.dim(), xi.magnitude()).map(|w| w * w);
    Ok(&r * DMatrix::from_diagonal(&lam) * r.transpose())
}

/// The multiplier `U(ξ, t)` acting on one Fourier coefficient.
#[derive(Debug, Clone)]
pub struct MultiplierSample {
    /// Full multiplier, shift modulation included.
    pub matrix: DMatrix<Complex64>,
    pub t: f64,
    /// `e^{i v t θ·ξ}`.
    pub shift_phase: Complex64,
}

impl MultiplierSample {
    /// Frobenius norm of `UᴴU − I`, an upper bound on the operator-norm defect.
    pub fn unitarity_defect(&self) -> f64 {
        let n = self.matrix.nrows();
        let g = self.matrix.adjoint() * &self.matrix - DMatrix::<Complex64>::identity(n, n);
        g.norm()
    }

    pub fn determinant_modulus(&self) -> f64 {
        self.matrix.determinant().norm()
    }
}

/// `e^{i v t θ·ξ} Σ± φ±(ω) R±(ξ) e^{it√Λ(ξ)} R±ᵗ(ξ)`; the identity at `ξ = 0`
/// (times the trivial phase).
pub fn half_wave_multiplier(
    params: &LameParams,
    xi: &FrequencyPoint,
    t: f64,
    v: f64,
    theta: &DVector<f64>,
) -> MultiplierSample {
    debug_assert_eq!(theta.len(), xi.dim());
    let dim = xi.dim();
    let shift_phase = Complex64::cis(v * t * theta.dot(xi.vector()));
    let core = Diagonalization::new(xi).propagator(params, dim, t);
    MultiplierSample { matrix: core * shift_phase, t, shift_phase }
}

/// `R = [[A, B], [C, D]]` with `A` scalar, `B` a row, `C` a column.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockDecomposition {
    pub a: f64,
    pub b: RowDVector<f64>,
    pub c: DVector<f64>,
    pub d: DMatrix<f64>,
}

impl BlockDecomposition {
    pub fn reassemble(&self) -> DMatrix<f64> {
        let n = self.c.len() + 1;
        let mut m = DMatrix::zeros(n, n);
        m[(0, 0)] = self.a;
        m.view_mut((0, 1), (1, n - 1)).copy_from(&self.b);
        m.view_mut((1, 0), (n - 1, 1)).copy_from(&self.c);
        m.view_mut((1, 1), (n - 1, n - 1)).copy_from(&self.d);
        m
    }

    /// `|(A − 1, B)|`.
    pub fn first_row_defect(&self) -> f64 {
        ((self.a - 1.0).powi(2) + self.b.norm_squared()).sqrt()
    }
}

pub fn block_decomposition(r: &DMatrix<f64>) -> BlockDecomposition {
    assert!(r.is_square() && r.nrows() >= 2, "block decomposition needs a square matrix, n >= 2");
    let n = r.nrows();
    BlockDecomposition {
        a: r[(0, 0)],
        b: r.view((0, 1), (1, n - 1)).row(0).into_owned(),
        c: r.view((1, 0), (n - 1, 1)).column(0).into_owned(),
        d: r.view((1, 1), (n - 1, n - 1)).into_owned(),
    }
}
