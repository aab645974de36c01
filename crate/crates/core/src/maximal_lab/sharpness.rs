use nalgebra::DVector;
use num_complex::Complex64;
use rayon::prelude::*;

use super::quadrature::{MomentSweep, Sector, SectorRule};
use super::{critical_time, phases_raw, SharpnessConfig, TimeGrid};
use crate::error::{Error, Result};
use crate::lame_symbol::{block_decomposition, geodesic_rotation, Diagonalization, FrequencyPoint, LameParams, Sign};

/// Relative change under node doubling above which a number is flagged.
pub const CONVERGENCE_TOL: f64 = 1e-3;

/// Tolerance for a single pointwise evaluation under node doubling.
const EVALUATION_TOL: f64 = 1e-4;

/// Per-direction data of the `F` quadrature.
#[derive(Debug, Clone)]
struct AngularNode {
    omega: DVector<f64>,
    weight: f64,
    /// `Σ± φ± A± R±e₁`: the P amplitude of `m(ξ)e₁` per unit `e^{iΦ}`.
    p_amp: DVector<f64>,
    /// `Σ± φ± R± (0, B±)ᵗ`: the S amplitude per unit `e^{iΨ}`.
    s_amp: DVector<f64>,
    /// `A₊²` and `B₊B₊ᵗ`.
    a_sq: f64,
    b_sq: f64,
}

impl AngularNode {
    fn new(omega: DVector<f64>, weight: f64) -> Self {
        let n = omega.len();
        let frame = Diagonalization::new(&FrequencyPoint::new(omega.clone()).expect("dimension >= 2"));
        let mut p_amp = DVector::zeros(n);
        let mut s_amp = DVector::zeros(n);
        for b in &frame.branches {
            let r = &b.rotation;
            p_amp += r.column(0) * (b.weight * r[(0, 0)]);
            for k in 1..n {
                s_amp += r.column(k) * (b.weight * r[(0, k)]);
            }
        }
        let plus = block_decomposition(&geodesic_rotation(Sign::Plus, &omega).expect("ω lies in the + cap"));
        Self { omega, weight, p_amp, s_amp, a_sq: plus.a * plus.a, b_sq: plus.b.norm_squared() }
    }
}

/// Pointwise evaluator of `u(x,t) = ∫_S m(ξ,t) e^{ix·ξ} e₁ dξ` over a
/// [`Sector`] `S`: Gauss nodes in direction, exact moments in `|ξ|`.
///
/// `m(ξ,t)` is the half-wave multiplier `e^{it√L(ξ)}` with the line shift
/// `e^{ivtξ₁}`.
#[derive(Debug, Clone)]
pub struct SolutionQuadrature {
    dim: usize,
    v: f64,
    cp: f64,
    cs: f64,
    r_min: f64,
    r_max: f64,
    nodes: Vec<AngularNode>,
}

impl SolutionQuadrature {
    pub fn new(params: &LameParams, v: f64, sector: &Sector, angular: usize) -> Self {
        let rule = sector.rule(angular, 1);
        let nodes = rule.directions.into_iter().map(|(omega, w)| AngularNode::new(omega, w)).collect();
        Self {
            dim: sector.dim(),
            v,
            cp: params.p_speed(),
            cs: params.s_speed(),
            r_min: sector.r_min(),
            r_max: sector.r_max(),
            nodes,
        }
    }

    pub fn for_config(cfg: &SharpnessConfig) -> Self {
        Self::new(cfg.params(), cfg.v(), &cfg.f_sector(), cfg.counts().angular)
    }

    fn rates(&self, node: &AngularNode) -> (f64, f64) {
        let drift = self.v * node.omega[0];
        (drift + self.cp, drift + self.cs)
    }

    pub fn evaluate(&self, x: &DVector<f64>, t: f64) -> DVector<Complex64> {
        let k = self.dim - 1;
        let mut u = DVector::<Complex64>::zeros(self.dim);
        for node in &self.nodes {
            let base = x.dot(&node.omega);
            let (rp, rs) = self.rates(node);
            let ip = super::radial_moment(k, self.r_min, self.r_max, base + t * rp) * node.weight;
            let is = super::radial_moment(k, self.r_min, self.r_max, base + t * rs) * node.weight;
            for c in 0..self.dim {
                u[c] += ip * node.p_amp[c] + is * node.s_amp[c];
            }
        }
        u
    }

    /// `max_m |u(x, t_m)|` over the grid, with the maximizing time.
    pub fn sup_over_grid(&self, x: &DVector<f64>, grid: &TimeGrid) -> (f64, f64) {
        let k = self.dim - 1;
        let mut sweeps: Vec<(MomentSweep, MomentSweep)> = self
            .nodes
            .iter()
            .map(|node| {
                let base = x.dot(&node.omega);
                let (rp, rs) = self.rates(node);
                (
                    MomentSweep::new(k, self.r_min, self.r_max, base + grid.start * rp, grid.step * rp),
                    MomentSweep::new(k, self.r_min, self.r_max, base + grid.start * rs, grid.step * rs),
                )
            })
            .collect();
        let mut best = (f64::NEG_INFINITY, grid.start);
        for m in 0..grid.count {
            let mut u = [Complex64::new(0.0, 0.0); 3];
            for (node, (sp, ss)) in self.nodes.iter().zip(sweeps.iter_mut()) {
                let ip = sp.next_moment() * node.weight;
                let is = ss.next_moment() * node.weight;
                for (c, uc) in u.iter_mut().enumerate().take(self.dim) {
                    *uc += ip * node.p_amp[c] + is * node.s_amp[c];
                }
            }
            let size = u.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if size > best.0 {
                best = (size, grid.at(m));
            }
        }
        best
    }
}

/// Product quadrature over `F`.
pub fn sector_quadrature_f(cfg: &SharpnessConfig) -> SectorRule {
    cfg.f_sector().rule(cfg.counts().angular, cfg.counts().radial)
}

/// Quadrature points and weights over `E`.
pub fn sample_e(cfg: &SharpnessConfig) -> Vec<(DVector<f64>, f64)> {
    cfg.e_sector().rule(cfg.counts().e_angular, cfg.counts().e_radial).nodes()
}

/// `u(x, t)` for the datum `f̂ = χ_F e₁`.
pub fn evaluate_solution_at(x: &DVector<f64>, t: f64, cfg: &SharpnessConfig) -> DVector<Complex64> {
    SolutionQuadrature::for_config(cfg).evaluate(x, t)
}

/// A value together with its relative change under node doubling.
#[derive(Debug, Clone)]
pub struct Checked<T> {
    pub value: T,
    pub relative_change: f64,
    pub converged: bool,
}

/// [`evaluate_solution_at`] recomputed with doubled angular nodes.
pub fn evaluate_solution_checked(x: &DVector<f64>, t: f64, cfg: &SharpnessConfig) -> Checked<DVector<Complex64>> {
    let value = evaluate_solution_at(x, t, cfg);
    let fine = evaluate_solution_at(x, t, &cfg.refined());
    let relative_change = (&fine - &value).norm() / fine.norm().max(f64::MIN_POSITIVE);
    Checked { value, relative_change, converged: relative_change <= EVALUATION_TOL }
}

/// `∫_F cos Φ(x,ξ) A₊(ξ)² − B₊(ξ)B₊(ξ)ᵗ dξ` at `t = t(x)`.
pub fn lower_bound_functional(x: &DVector<f64>, cfg: &SharpnessConfig) -> Result<f64> {
    let quad = SolutionQuadrature::for_config(cfg);
    let rule = sector_quadrature_f(cfg);
    lower_bound_with(&quad, &rule.radii, x, cfg)
}

fn lower_bound_with(
    quad: &SolutionQuadrature,
    radii: &[(f64, f64)],
    x: &DVector<f64>,
    cfg: &SharpnessConfig,
) -> Result<f64> {
    let t = critical_time(x, cfg.alpha())?.t;
    let mut acc = 0.0;
    for node in &quad.nodes {
        let (rp, _) = quad.rates(node);
        let kappa = x.dot(&node.omega) + t * rp;
        let radial: f64 = radii.iter().map(|&(r, w)| w * (kappa * r).cos()).sum::<f64>() * node.a_sq
            - radii.iter().map(|&(_, w)| w).sum::<f64>() * node.b_sq;
        acc += node.weight * radial;
    }
    Ok(acc)
}

/// Closed grids used for the exhaustive phase and block checks:
/// `(E points, F points)`.
pub fn check_grids(cfg: &SharpnessConfig) -> (Vec<DVector<f64>>, Vec<DVector<f64>>) {
    let (e_axis, f_axis) = match cfg.dim() {
        2 => (32, 100),
        _ => (10, 22),
    };
    (cfg.e_sector().closed_grid(e_axis), cfg.f_sector().closed_grid(f_axis))
}

/// `max |Φ(x, t(x), ξ)|` over the closed check grids of `E × F`.
pub fn phase_bound_max(cfg: &SharpnessConfig) -> f64 {
    let (e, f) = check_grids(cfg);
    let (v, cp, cs) = (cfg.v(), cfg.params().p_speed(), cfg.params().s_speed());
    let alpha = cfg.alpha();
    e.par_iter()
        .map(|x| {
            let t = critical_time(x, alpha).expect("grid lies in E").t;
            f.iter().map(|xi| phases_raw(x, t, xi, v, cp, cs).0.abs()).fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max)
}

/// `max_F |(A₊ − 1, B₊)| · (αN)^{1/2}` over the closed `F` grid and the `F`
/// quadrature directions.
pub fn block_bound_check(cfg: &SharpnessConfig) -> f64 {
    let (_, grid) = check_grids(cfg);
    let rule = sector_quadrature_f(cfg);
    let dirs = grid.iter().map(|p| p / p.norm()).chain(rule.directions.iter().map(|d| d.0.clone()));
    let worst = dirs
        .map(|omega| {
            let blocks = block_decomposition(&geodesic_rotation(Sign::Plus, &omega).expect("ω lies in the + cap"));
            (blocks.a - 1.0).hypot(blocks.b.norm())
        })
        .fold(0.0, f64::max);
    worst * (cfg.alpha() * cfg.scale()).sqrt()
}

/// Sup data at one sample point of `E`.
#[derive(Debug, Clone)]
pub struct PointSup {
    pub x: DVector<f64>,
    pub weight: f64,
    pub critical_time: f64,
    /// `u(x, t(x))`.
    pub critical_value: DVector<Complex64>,
    /// Sup over the uniform grid alone.
    pub grid_sup: f64,
    /// Sup over the grid together with `t(x)`.
    pub sup: f64,
}

#[derive(Debug, Clone)]
pub struct MaximalNorm {
    /// `(Σ w_x sup_t |u(x,t)|²)^{1/2}`, grid augmented by `t(x)`.
    pub sup_norm: f64,
    /// `(Σ w_x |u(x,t(x))|²)^{1/2}`.
    pub single_time_norm: f64,
    /// Same as `sup_norm` without the critical times.
    pub grid_only_norm: f64,
    pub points: Vec<PointSup>,
}

fn sups_at(quad: &SolutionQuadrature, samples: &[(DVector<f64>, f64)], cfg: &SharpnessConfig) -> Result<Vec<PointSup>> {
    let grid = cfg.t_grid();
    samples
        .par_iter()
        .map(|(x, w)| {
            let ct = critical_time(x, cfg.alpha())?;
            let critical_value = quad.evaluate(x, ct.t);
            let (grid_sup, _) = quad.sup_over_grid(x, &grid);
            let sup = grid_sup.max(critical_value.norm());
            Ok(PointSup { x: x.clone(), weight: *w, critical_time: ct.t, critical_value, grid_sup, sup })
        })
        .collect()
}

fn assemble(points: Vec<PointSup>) -> MaximalNorm {
    let norm = |f: &dyn Fn(&PointSup) -> f64| points.iter().map(|p| p.weight * f(p).powi(2)).sum::<f64>().sqrt();
    MaximalNorm {
        sup_norm: norm(&|p| p.sup),
        single_time_norm: norm(&|p| p.critical_value.norm()),
        grid_only_norm: norm(&|p| p.grid_sup),
        points,
    }
}

/// `‖sup_t |u(x + vte₁, t)|‖_{L²(E)}` by quadrature over `E`, the sup taken
/// over the uniform time grid augmented with each point's critical time.
pub fn maximal_norm_on_e(cfg: &SharpnessConfig) -> Result<MaximalNorm> {
    let quad = SolutionQuadrature::for_config(cfg);
    Ok(assemble(sups_at(&quad, &sample_e(cfg), cfg)?))
}

/// `‖f_F‖_{H^s} = (∫_F (1+|ξ|²)^s dξ)^{1/2}`.
pub fn hs_norm_f_f(cfg: &SharpnessConfig) -> f64 {
    hs_norm_with(&sector_quadrature_f(cfg), cfg.s())
}

fn hs_norm_with(rule: &SectorRule, s: f64) -> f64 {
    let cap: f64 = rule.directions.iter().map(|d| d.1).sum();
    let radial: f64 = rule.radii.iter().map(|&(r, w)| w * (1.0 + r * r).powf(s)).sum();
    (cap * radial).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual.
    pub residual: f64,
}

/// Ordinary least squares `y ≈ slope·x + intercept`; `None` below 3 points.
pub fn fit_slope(points: &[(f64, f64)]) -> Option<SlopeFit> {
    if points.len() < 3 {
        return None;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = (points.iter().map(|p| (p.1 - slope * p.0 - intercept).powi(2)).sum::<f64>() / n).sqrt();
    Some(SlopeFit { slope, intercept, residual })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub scale: f64,
    pub s: f64,
    pub maximal_norm: f64,
    pub single_time_norm: f64,
    pub hs_norm: f64,
    pub ratio: f64,
    /// Min over `E` samples of the lower-bound functional.
    pub lower_bound_min: f64,
    /// Min over `E` samples of `Re u₁(x, t(x))`.
    pub critical_re_min: f64,
    pub phase_bound_max: f64,
    pub block_bound_max: f64,
    pub f_measure: f64,
    pub e_measure: f64,
    pub converged: bool,
}

/// A quantity whose relative change under node doubling exceeded
/// [`CONVERGENCE_TOL`]; `point` names the offending sample when there is one.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceIssue {
    pub scale: f64,
    pub quantity: &'static str,
    pub point: Option<Vec<f64>>,
    pub relative_change: f64,
}

#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub config: SharpnessConfig,
    pub s: f64,
    /// Sorted by `N`.
    pub rows: Vec<SweepRow>,
    /// Fit of `log₂ ratio` against `log₂ N`.
    pub fit: Option<SlopeFit>,
    /// False when any row failed the convergence check.
    pub reliable: bool,
    pub issues: Vec<ConvergenceIssue>,
}

/// Everything about one `N` that does not depend on `s`.
#[derive(Debug, Clone)]
struct ScaleData {
    cfg: SharpnessConfig,
    maximal: MaximalNorm,
    lower_bound_min: f64,
    phase_bound_max: f64,
    block_bound_max: f64,
    issues: Vec<ConvergenceIssue>,
}

fn relative_change(base: f64, fine: f64) -> f64 {
    if fine == base {
        0.0
    } else {
        (fine - base).abs() / fine.abs().max(base.abs())
    }
}

fn scale_data(cfg: SharpnessConfig) -> Result<ScaleData> {
    let scale = cfg.scale();
    let quad = SolutionQuadrature::for_config(&cfg);
    let samples = sample_e(&cfg);
    let maximal = assemble(sups_at(&quad, &samples, &cfg)?);

    let fine_cfg = cfg.refined();
    let fine_quad = SolutionQuadrature::for_config(&fine_cfg);
    let rule = sector_quadrature_f(&cfg);
    let fine_rule = sector_quadrature_f(&fine_cfg);
    let mut issues = Vec::new();

    // pointwise: the same x with doubled F nodes
    let fine_points = sups_at(&fine_quad, &samples, &cfg)?;
    for (p, q) in maximal.points.iter().zip(&fine_points) {
        let change = relative_change(p.sup, q.sup);
        if change > CONVERGENCE_TOL {
            issues.push(ConvergenceIssue {
                scale,
                quantity: "sup",
                point: Some(p.x.iter().copied().collect()),
                relative_change: change,
            });
        }
    }

    // E quadrature: doubled E nodes
    let fine_e = assemble(sups_at(&quad, &sample_e(&fine_cfg), &cfg)?);
    for (quantity, base, fine) in [
        ("maximal_norm", maximal.sup_norm, fine_e.sup_norm),
        ("single_time_norm", maximal.single_time_norm, fine_e.single_time_norm),
    ] {
        let change = relative_change(base, fine);
        if change > CONVERGENCE_TOL {
            issues.push(ConvergenceIssue { scale, quantity, point: None, relative_change: change });
        }
    }

    let bounds: Vec<(f64, f64)> = samples
        .par_iter()
        .map(|(x, _)| {
            Ok((
                lower_bound_with(&quad, &rule.radii, x, &cfg)?,
                lower_bound_with(&fine_quad, &fine_rule.radii, x, &cfg)?,
            ))
        })
        .collect::<Result<_>>()?;
    let mut lower_bound_min = f64::INFINITY;
    for ((x, _), (base, fine)) in samples.iter().zip(&bounds) {
        lower_bound_min = lower_bound_min.min(*base);
        let change = relative_change(*base, *fine);
        if change > CONVERGENCE_TOL {
            issues.push(ConvergenceIssue {
                scale,
                quantity: "lower_bound",
                point: Some(x.iter().copied().collect()),
                relative_change: change,
            });
        }
    }

    Ok(ScaleData {
        phase_bound_max: phase_bound_max(&cfg),
        block_bound_max: block_bound_check(&cfg),
        cfg,
        maximal,
        lower_bound_min,
        issues,
    })
}

fn validate_scales(scales: &[f64]) -> Result<Vec<f64>> {
    let mut sorted = scales.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted.dedup();
    if sorted.len() < 3 {
        return Err(Error::Config(format!("a sweep needs at least 3 distinct N values, got {}", sorted.len())));
    }
    if let Some(bad) = sorted.iter().find(|&&n| !(n > 0.0 && n.log2().fract() == 0.0)) {
        return Err(Error::Config(format!("N = {bad} is not a power of two")));
    }
    Ok(sorted)
}

/// Runs the sweep over `scales` once and reports it for every order in
/// `orders`; the maximal norm does not depend on `s`, so it is shared.
pub fn ratio_sweeps(template: &SharpnessConfig, scales: &[f64], orders: &[f64]) -> Result<Vec<ExperimentReport>> {
    let scales = validate_scales(scales)?;
    let mut data = Vec::with_capacity(scales.len());
    for &n in &scales {
        let cfg = template.with_scale(n)?;
        log::info!("sharpness sweep: N = {n}");
        data.push(scale_data(cfg)?);
    }
    orders
        .iter()
        .map(|&s| {
            let mut issues = Vec::new();
            let mut rows = Vec::with_capacity(data.len());
            for d in &data {
                let cfg = d.cfg.with_s(s)?;
                let hs = hs_norm_f_f(&cfg);
                let hs_fine = hs_norm_f_f(&cfg.refined());
                let mut row_issues = d.issues.clone();
                let change = relative_change(hs, hs_fine);
                if change > CONVERGENCE_TOL {
                    row_issues.push(ConvergenceIssue { scale: cfg.scale(), quantity: "hs_norm", point: None, relative_change: change });
                }
                rows.push(SweepRow {
                    scale: cfg.scale(),
                    s,
                    maximal_norm: d.maximal.sup_norm,
                    single_time_norm: d.maximal.single_time_norm,
                    hs_norm: hs,
                    ratio: d.maximal.sup_norm / hs,
                    lower_bound_min: d.lower_bound_min,
                    critical_re_min: d
                        .maximal
                        .points
                        .iter()
                        .map(|p| p.critical_value[0].re)
                        .fold(f64::INFINITY, f64::min),
                    phase_bound_max: d.phase_bound_max,
                    block_bound_max: d.block_bound_max,
                    f_measure: cfg.f_measure(),
                    e_measure: cfg.e_measure(),
                    converged: row_issues.is_empty(),
                });
                issues.extend(row_issues);
            }
            let points: Vec<(f64, f64)> = rows.iter().map(|r| (r.scale.log2(), r.ratio.log2())).collect();
            Ok(ExperimentReport {
                config: template.with_s(s)?,
                s,
                fit: fit_slope(&points),
                reliable: issues.is_empty(),
                rows,
                issues,
            })
        })
        .collect()
}

/// [`ratio_sweeps`] for a single Sobolev order.
pub fn ratio_sweep(template: &SharpnessConfig, scales: &[f64], s: f64) -> Result<ExperimentReport> {
    Ok(ratio_sweeps(template, scales, &[s])?.remove(0))
}
