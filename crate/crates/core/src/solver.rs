//! The fixed point `λ = F(ω₁ + ω₂(λ))` and tools around it.
//!
//! `F_{e,n}^±(w) = -(1/2πi) (4/ε)^n ∮_{C(p_e^∓, c1 ρ)} (φ_e^± - p_e^±)^{n-1} w`
//! extracts the Laurent tails that `w` induces across each neck. Every
//! integral is a fixed-order trapezoid sum over one circle, so results do not
//! depend on how circles are distributed over threads.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::differential::{Differential, LambdaTable, SphereForm};
use crate::error::{Error, Result};
use crate::graph::{EdgeEnd, PeriodVector, Sign};
use crate::norms::WeightSpec;
use crate::poles::PrincipalParts;
use crate::quadrature::{self, circle_nodes};
use crate::surface::Surface;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const TWO_PI_I: Complex64 = Complex64::new(0.0, 2.0 * PI);

#[derive(Debug, Clone)]
pub struct SolveConfig {
    /// Truncation order `N`.
    pub order: usize,
    /// Quadrature points per circle.
    pub quad_points: usize,
    /// Stopping tolerance on `‖λ_{k+1} - λ_k‖_L`.
    pub tol: f64,
    pub max_iter: usize,
    /// Integration radius as a fraction of `c1 ρ`.
    pub radius_factor: f64,
    /// Norm used for `‖·‖_L`; `σ ≡ 1, p = ∞` when absent.
    pub weights: Option<WeightSpec>,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            order: 12,
            quad_points: 256,
            tol: 1e-13,
            max_iter: 200,
            radius_factor: 1.0,
            weights: None,
        }
    }
}

impl SolveConfig {
    pub fn validate(&self) -> Result<()> {
        if self.order < 2 {
            return Err(Error::InvalidConfig(format!("order must be at least 2, got {}", self.order)));
        }
        if self.quad_points < quadrature::MIN_POINTS || !self.quad_points.is_power_of_two() {
            return Err(Error::InvalidConfig(format!(
                "quadrature points must be a power of two >= {}, got {}",
                quadrature::MIN_POINTS,
                self.quad_points
            )));
        }
        if self.tol.is_nan() || self.tol <= 0.0 {
            return Err(Error::InvalidConfig(format!("tolerance must be positive, got {}", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidConfig("max_iter must be positive".into()));
        }
        if !(self.radius_factor > 0.0 && self.radius_factor <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "contour radius factor must lie in (0, 1], got {}",
                self.radius_factor
            )));
        }
        Ok(())
    }

    fn weights_for(&self, s: &Surface) -> Result<WeightSpec> {
        match &self.weights {
            Some(w) if w.sigma.len() == s.graph().vertex_count() => Ok(w.clone()),
            Some(_) => Err(Error::InvalidConfig("weights do not match the graph".into())),
            None => WeightSpec::uniform(s.graph(), f64::INFINITY),
        }
    }
}

/// One integration circle `C(p_e^∓, r)` feeding the row block `F_{e,·}^±`.
#[derive(Debug, Clone)]
struct NeckCircle {
    edge: usize,
    sign: Sign,
    vertex: usize,
    nodes: Vec<(Complex64, Complex64)>,
    /// `-(1/2πi) (4/ε)^n (φ - p)^{n-1} dz` at each node, for `n = 2..=N`.
    weights: Vec<Vec<Complex64>>,
}

/// Precomputed nodes and weights of every integral in `F`.
#[derive(Debug, Clone)]
pub struct NeckQuadrature {
    circles: Vec<NeckCircle>,
    order: usize,
    edges: usize,
    epsilon: f64,
}

impl NeckQuadrature {
    pub fn new(s: &Surface, order: usize, m: usize, radius_factor: f64) -> Result<Self> {
        let g = s.graph();
        let eps = s.epsilon();
        let radius = s.c1() * s.rho() * radius_factor;
        let mut circles = Vec::new();
        for e in 0..g.edge_count() {
            if s.t(e) == ZERO {
                continue;
            }
            for sign in Sign::BOTH {
                let source = sign.opposite();
                let vertex = g.edge_at(e).vertex(source);
                let center = s.point(e, source);
                for end in g.ends_at(vertex) {
                    if end == (EdgeEnd { edge: e, sign: source }) {
                        continue;
                    }
                    let d = (s.point(end.edge, end.sign) - center).norm();
                    if d < radius + eps * (1.0 - 1e-12) {
                        return Err(Error::InvalidSurface(format!(
                            "integration circle around {}{} meets the disk of {}{}",
                            g.edge_id(e),
                            source,
                            g.edge_id(end.edge),
                            end.sign
                        )));
                    }
                }
                let nodes = circle_nodes(center, radius, m);
                let p = s.point(e, sign);
                let scale = 4.0 / eps;
                let mut weights = vec![Vec::with_capacity(m); order - 1];
                for &(z, dz) in &nodes {
                    let u = (s.transition_map(e, sign, z)? - p) * scale;
                    let mut term = -scale * dz / TWO_PI_I * u;
                    for row in weights.iter_mut() {
                        row.push(term);
                        term *= u;
                    }
                }
                circles.push(NeckCircle {
                    edge: e,
                    sign,
                    vertex,
                    nodes,
                    weights,
                });
            }
        }
        Ok(NeckQuadrature {
            circles,
            order,
            edges: g.edge_count(),
            epsilon: eps,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// `F(w)` for any chart-wise evaluable differential.
    pub fn apply<W: SphereForm + Sync + ?Sized>(&self, w: &W) -> Result<LambdaTable> {
        let rows: Vec<Vec<Complex64>> = self
            .circles
            .par_iter()
            .map(|c| {
                let values = c
                    .nodes
                    .iter()
                    .enumerate()
                    .map(|(index, &(z, _))| {
                        let value = w.eval(c.vertex, z)?;
                        if value.is_finite() {
                            Ok(value)
                        } else {
                            Err(Error::NonFinite { index })
                        }
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(c.weights
                    .iter()
                    .map(|row| row.iter().zip(&values).map(|(a, b)| a * b).sum())
                    .collect())
            })
            .collect::<Result<_>>()?;
        let mut table = LambdaTable::zeros(self.edges, self.order);
        for (c, row) in self.circles.iter().zip(rows) {
            table.row_mut(c.edge, c.sign).copy_from_slice(&row);
        }
        Ok(table)
    }

    /// Tail operator `A` with `F(ω₂(λ)) = A λ` in the flat ordering of
    /// [`LambdaTable::to_flat`]. Unit tails are integrated only over circles
    /// lying on their own sphere, which is exact.
    pub fn tail_operator(&self, s: &Surface) -> DMatrix<Complex64> {
        let g = s.graph();
        let template = LambdaTable::zeros(self.edges, self.order);
        let k = template.len();
        let quarter = self.epsilon / 4.0;
        let blocks: Vec<Vec<(usize, usize, Complex64)>> = self
            .circles
            .par_iter()
            .map(|c| {
                let mut entries = Vec::new();
                for end in g.ends_at(c.vertex) {
                    let p = s.point(end.edge, end.sign);
                    let u: Vec<Complex64> = c.nodes.iter().map(|&(z, _)| quarter / (z - p)).collect();
                    let mut power = u.clone();
                    for m in 2..=self.order {
                        for (x, y) in power.iter_mut().zip(&u) {
                            *x *= y;
                        }
                        let col = template.flat_index(end.edge, end.sign, m);
                        for n in 2..=self.order {
                            let row = template.flat_index(c.edge, c.sign, n);
                            let value: Complex64 = c.weights[n - 2].iter().zip(&power).map(|(a, b)| a * b).sum();
                            entries.push((row, col, value));
                        }
                    }
                }
                entries
            })
            .collect();
        let mut a = DMatrix::from_element(k, k, ZERO);
        for (row, col, value) in blocks.into_iter().flatten() {
            a[(row, col)] += value;
        }
        a
    }
}

/// `F(w)` on the surface with the configured quadrature.
pub fn apply_f<W: SphereForm + Sync + ?Sized>(s: &Surface, w: &W, cfg: &SolveConfig) -> Result<LambdaTable> {
    cfg.validate()?;
    NeckQuadrature::new(s, cfg.order, cfg.quad_points, cfg.radius_factor)?.apply(w)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub iterations: usize,
    pub update_norms: Vec<f64>,
    pub final_update: f64,
    /// Asymptotic ratio of successive updates; 0 when the iteration stopped
    /// before a ratio could be measured.
    pub contraction_factor: f64,
    pub threshold: f64,
    pub t_sup: f64,
    pub below_threshold: bool,
    /// `q = 4 c2² ‖t‖∞ / (ε c1 ρ)`, the per-order decay bound of the tails.
    pub tail_ratio: f64,
    /// `q^N`, relative size of the dropped tail orders.
    pub tail_bound: f64,
    pub lambda_norm: f64,
    pub period_residuals: BTreeMap<String, f64>,
    pub max_period_residual: f64,
    pub order: usize,
    pub quad_points: usize,
    pub tol: f64,
    #[serde(default)]
    pub oracle_max_diff: Option<f64>,
    pub warnings: Vec<String>,
}

/// Tolerance for compatibility residuals, relative to the data scale.
fn compatibility_scale(alpha: &[Complex64], parts: &PrincipalParts) -> f64 {
    let a = alpha.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let r = parts
        .poles
        .iter()
        .flatten()
        .map(|p| 2.0 * PI * p.residue().norm())
        .fold(0.0, f64::max);
    1.0f64.max(a).max(r)
}

/// Rejects data violating the per-vertex balance of periods and residues.
pub fn check_compatibility(s: &Surface, alpha: &[Complex64], parts: &PrincipalParts) -> Result<()> {
    let g = s.graph();
    let residuals = g.residue_residuals(alpha, parts);
    let tol = 1e-12 * compatibility_scale(alpha, parts);
    let (worst, value) = residuals
        .iter()
        .enumerate()
        .map(|(v, r)| (v, r.norm()))
        .fold((0, 0.0), |best, cur| if cur.1 > best.1 { cur } else { best });
    if value > tol {
        return Err(Error::Incompatible {
            vertex: g.vertex_id(worst).to_string(),
            residual: value,
        });
    }
    Ok(())
}

fn prepare(s: &Surface, alpha: &PeriodVector, parts: &PrincipalParts, cfg: &SolveConfig) -> Result<Vec<Complex64>> {
    cfg.validate()?;
    let dense = alpha.to_dense(s.graph())?;
    s.check_poles(parts)?;
    check_compatibility(s, &dense, parts)?;
    let rho2 = s.rho() * s.rho();
    if s.t_sup() >= rho2 {
        return Err(Error::Precondition(format!(
            "|t|_inf = {} violates |t_e| < rho^2 = {rho2}",
            s.t_sup()
        )));
    }
    Ok(dense)
}

/// Ratio estimate from update norms above the rounding floor. With three
/// usable updates the two-step ratio `sqrt(d_j / d_{j-2})` is used, which is
/// insensitive to eigenvalue pairs of opposite sign.
fn estimate_factor(updates: &[f64], floor: f64) -> f64 {
    let valid: Vec<f64> = updates.iter().copied().take_while(|&d| d > floor).collect();
    match valid.len() {
        0 | 1 => 0.0,
        2 => valid[1] / valid[0],
        n => (valid[n - 1] / valid[n - 3]).sqrt(),
    }
}

fn period_residuals(d: &Differential, cfg: &SolveConfig) -> Result<BTreeMap<String, f64>> {
    let s = d.surface();
    let g = s.graph();
    let radius = s.c1() * s.rho() * cfg.radius_factor;
    (0..g.edge_count())
        .into_par_iter()
        .map(|e| {
            let v = g.edge_at(e).to;
            let integral = quadrature::contour_integral(
                |z| d.eval_omega(v, z),
                s.point(e, Sign::Plus),
                radius,
                cfg.quad_points,
            )?;
            Ok((g.edge_id(e).to_string(), (integral - d.alpha()[e]).norm()))
        })
        .collect()
}

/// Solves `λ = F(ω₁ + ω₂(λ))` by fixed-point iteration from `λ = 0`.
pub fn solve(
    s: &Surface,
    alpha: &PeriodVector,
    parts: &PrincipalParts,
    cfg: &SolveConfig,
) -> Result<(Differential, SolveReport)> {
    let dense = prepare(s, alpha, parts, cfg)?;
    let weights = cfg.weights_for(s)?;
    let mut warnings = Vec::new();
    let threshold = s.threshold();
    let t_sup = s.t_sup();
    if t_sup > threshold {
        warnings.push(format!(
            "|t|_inf = {t_sup:e} exceeds the contraction threshold c1*rho*eps/(4*c2^2) = {threshold:e}"
        ));
    }

    let quad = NeckQuadrature::new(s, cfg.order, cfg.quad_points, cfg.radius_factor)?;
    let base = Differential::omega1_only(s.clone(), dense, parts.clone(), cfg.order)?;
    let mut lambda = LambdaTable::zeros(s.graph().edge_count(), cfg.order);
    let mut current = base.clone();
    let mut updates = Vec::new();
    let mut growing = 0;
    let mut converged = false;
    for iteration in 1..=cfg.max_iter {
        let next = quad.apply(&current)?;
        if !next.is_finite() {
            return Err(Error::NoConvergence {
                iterations: iteration,
                update: f64::INFINITY,
            });
        }
        let delta = weights.norm_lambda(&next.sub(&lambda));
        let size = weights.norm_lambda(&next);
        let floor = 1e3 * f64::EPSILON * size;
        if let Some(&prev) = updates.last() {
            if delta > floor && prev > floor && delta >= prev {
                growing += 1;
                if growing >= 3 {
                    return Err(Error::NonContraction {
                        factor: delta / prev,
                        iteration,
                    });
                }
            } else {
                growing = 0;
            }
        }
        updates.push(delta);
        lambda = next;
        current = base.with_lambda(lambda.clone())?;
        if delta < cfg.tol {
            converged = true;
            break;
        }
        if delta <= 1e2 * f64::EPSILON * size {
            warnings.push(format!(
                "stopped at the rounding floor: update {delta:e} is below 100*eps*|lambda|_L but above tol"
            ));
            converged = true;
            break;
        }
    }
    let final_update = updates.last().copied().unwrap_or(0.0);
    if !converged {
        return Err(Error::NoConvergence {
            iterations: cfg.max_iter,
            update: final_update,
        });
    }
    let lambda_norm = weights.norm_lambda(&lambda);
    let contraction_factor = estimate_factor(&updates, 1e3 * f64::EPSILON * lambda_norm.max(f64::MIN_POSITIVE));
    let residuals = period_residuals(&current, cfg)?;
    let max_period_residual = residuals.values().copied().fold(0.0, f64::max);
    let tail_ratio = 4.0 * s.c2() * s.c2() * t_sup / (s.epsilon() * s.c1() * s.rho());
    let report = SolveReport {
        iterations: updates.len(),
        final_update,
        update_norms: updates,
        contraction_factor,
        threshold,
        t_sup,
        below_threshold: t_sup <= threshold,
        tail_ratio,
        tail_bound: tail_ratio.powi(cfg.order as i32),
        lambda_norm,
        period_residuals: residuals,
        max_period_residual,
        order: cfg.order,
        quad_points: cfg.quad_points,
        tol: cfg.tol,
        oracle_max_diff: None,
        warnings,
    };
    Ok((current, report))
}

#[derive(Debug, Clone)]
pub struct OracleSolution {
    pub lambda: LambdaTable,
    /// Power-iteration estimate of the spectral radius of `A`.
    pub spectral_radius: f64,
    /// Smallest singular value of `I - A`, computed for small systems.
    pub smallest_singular_value: Option<f64>,
}

pub const ORACLE_MAX_UNKNOWNS: usize = 2000;

/// Solves `(I - A) λ = F(ω₁)` directly.
pub fn solve_linear_oracle(
    s: &Surface,
    alpha: &PeriodVector,
    parts: &PrincipalParts,
    cfg: &SolveConfig,
) -> Result<OracleSolution> {
    let dense = prepare(s, alpha, parts, cfg)?;
    let edges = s.graph().edge_count();
    let unknowns = 2 * edges * (cfg.order - 1);
    if unknowns > ORACLE_MAX_UNKNOWNS {
        return Err(Error::InvalidConfig(format!(
            "dense oracle limited to {ORACLE_MAX_UNKNOWNS} unknowns, problem has {unknowns}"
        )));
    }
    let quad = NeckQuadrature::new(s, cfg.order, cfg.quad_points, cfg.radius_factor)?;
    let base = Differential::omega1_only(s.clone(), dense, parts.clone(), cfg.order)?;
    let b = nalgebra::DVector::from_vec(quad.apply(&base)?.to_flat());
    let a = quad.tail_operator(s);
    let spectral_radius = spectral_radius(&a);
    let system = DMatrix::<Complex64>::identity(unknowns, unknowns) - &a;
    let smallest = if unknowns <= 600 {
        let sv = system.clone().svd(false, false).singular_values;
        Some(sv.iter().copied().fold(f64::INFINITY, f64::min))
    } else {
        None
    };
    if let Some(sv) = smallest {
        if sv < 1e-12 {
            return Err(Error::SingularSystem(sv));
        }
    }
    let solution = system.clone().lu().solve(&b);
    let x = match solution {
        Some(x) if x.iter().all(|z| z.is_finite()) => x,
        _ => {
            let sv = system.svd(false, false).singular_values;
            return Err(Error::SingularSystem(sv.iter().copied().fold(f64::INFINITY, f64::min)));
        }
    };
    Ok(OracleSolution {
        lambda: LambdaTable::from_flat(edges, cfg.order, x.as_slice()),
        spectral_radius,
        smallest_singular_value: smallest,
    })
}

/// Geometric mean of the growth over the last half of 400 power steps.
pub fn spectral_radius(a: &DMatrix<Complex64>) -> f64 {
    let n = a.nrows();
    if n == 0 {
        return 0.0;
    }
    let mut x = nalgebra::DVector::from_iterator(
        n,
        (0..n).map(|i| Complex64::new(1.0, 0.37 * ((i * 7919) % 101) as f64 / 101.0)),
    );
    x /= Complex64::new(x.norm(), 0.0);
    let steps = 400;
    let mut log_sum = 0.0;
    let mut counted = 0;
    for k in 0..steps {
        let y = a * &x;
        let ny = y.norm();
        if ny == 0.0 || !ny.is_finite() {
            return if ny == 0.0 { 0.0 } else { f64::INFINITY };
        }
        if k >= steps / 2 {
            log_sum += ny.ln();
            counted += 1;
        }
        x = y / Complex64::new(ny, 0.0);
    }
    (log_sum / counted as f64).exp()
}

/// First-order response of `ω` to opening the node of one edge:
/// `∂ω/∂t_e · h = h (a^+ dz/(z - p_e^+)² + a^- dz/(z - p_e^-)²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NeckDerivative {
    pub edge: usize,
    pub plus: Complex64,
    pub minus: Complex64,
}

impl NeckDerivative {
    /// Predicted `∂ω/∂t_e / dz` at `z` on sphere `v` (zero away from the edge).
    pub fn eval(&self, s: &Surface, v: usize, z: Complex64) -> Complex64 {
        let edge = s.graph().edge_at(self.edge);
        let mut sum = ZERO;
        if edge.to == v {
            let d = z - s.point(self.edge, Sign::Plus);
            sum += self.plus / (d * d);
        }
        if edge.from == v {
            let d = z - s.point(self.edge, Sign::Minus);
            sum += self.minus / (d * d);
        }
        sum
    }
}

/// `a_e^+ = -1/(2πi z_e^+'(p_e^+)) ∮_{C(p_e^-)} ω/z_e^-` and
/// `a_e^- = -1/(2πi z_e^-'(p_e^-)) ∮_{C(p_e^+)} ω/z_e^+` at `t = 0`.
pub fn derivative_t0(
    s: &Surface,
    alpha: &PeriodVector,
    parts: &PrincipalParts,
    e: usize,
    cfg: &SolveConfig,
) -> Result<NeckDerivative> {
    if s.t_sup() != 0.0 {
        return Err(Error::Precondition(
            "the t-derivative formula needs every t_e = 0".into(),
        ));
    }
    if e >= s.graph().edge_count() {
        return Err(Error::UnknownEdge(format!("#{e}")));
    }
    let dense = prepare(s, alpha, parts, cfg)?;
    let omega = Differential::omega1_only(s.clone(), dense, parts.clone(), cfg.order)?;
    let radius = s.c1() * s.rho() * cfg.radius_factor;
    let edge = s.graph().edge_at(e).clone();
    let coefficient = |sign: Sign| -> Result<Complex64> {
        let source = sign.opposite();
        let v = edge.vertex(source);
        let chart = s.chart(e, source);
        let integral = quadrature::contour_integral(
            |z| Ok(omega.eval_omega(v, z)? / chart.forward(z)?),
            s.point(e, source),
            radius,
            cfg.quad_points,
        )?;
        Ok(-integral / (TWO_PI_I * s.chart(e, sign).derivative_at_center()))
    };
    Ok(NeckDerivative {
        edge: e,
        plus: coefficient(Sign::Plus)?,
        minus: coefficient(Sign::Minus)?,
    })
}
