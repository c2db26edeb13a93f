//! Runnable checks of a solved differential: periods, gluing across necks,
//! residues at nodes, neck estimates, decay along the graph and the
//! first-order response to opening a node.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::differential::{Differential, SphereForm};
use crate::error::{Error, Result};
use crate::graph::{PeriodVector, Sign};
use crate::norms::{domain_samples, sphere_sups};
use crate::quadrature::contour_integral;
use crate::solver::{derivative_t0, solve, SolveConfig};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const TWO_PI_I: Complex64 = Complex64::new(0.0, 2.0 * PI);
/// Relative floor, against the largest sampled `|ω|`, for gluing residuals.
const GLUE_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckStatus {
    Pass,
    Fail,
    Skipped,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckEntry {
    pub name: String,
    pub status: CheckStatus,
    pub worst_residual: f64,
    pub threshold: f64,
    /// Edge, vertex or point where the worst residual occurred.
    pub location: Option<String>,
    pub details: BTreeMap<String, f64>,
    pub notes: Vec<String>,
}

impl CheckEntry {
    fn new(name: &str, threshold: f64) -> Self {
        CheckEntry {
            name: name.to_string(),
            status: CheckStatus::Pass,
            worst_residual: 0.0,
            threshold,
            location: None,
            details: BTreeMap::new(),
            notes: Vec::new(),
        }
    }

    fn skipped(name: &str, threshold: f64, note: &str) -> Self {
        let mut entry = CheckEntry::new(name, threshold);
        entry.status = CheckStatus::Skipped;
        entry.notes.push(note.to_string());
        entry
    }

    fn record(&mut self, residual: f64, location: impl FnOnce() -> String) {
        if residual > self.worst_residual || self.location.is_none() {
            self.worst_residual = self.worst_residual.max(residual);
            if residual >= self.worst_residual {
                self.location = Some(location());
            }
        }
    }

    fn finish(mut self) -> Self {
        if self.status == CheckStatus::Pass && (self.worst_residual.is_nan() || self.worst_residual >= self.threshold) {
            self.status = CheckStatus::Fail;
        }
        self
    }

    pub fn passed(&self) -> bool {
        self.status == CheckStatus::Pass
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub entries: Vec<CheckEntry>,
}

impl VerificationReport {
    pub fn push(&mut self, entry: CheckEntry) {
        self.entries.push(entry);
        self.entries.sort_by(|a, b| a.name.cmp(&b.name));
    }

    /// No enabled check failed.
    pub fn passed(&self) -> bool {
        self.entries.iter().all(|e| e.status != CheckStatus::Fail)
    }

    pub fn get(&self, name: &str) -> Option<&CheckEntry> {
        self.entries.iter().find(|e| e.name == name)
    }
}

#[derive(Debug, Clone)]
pub struct CheckConfig {
    pub tol_periods: f64,
    pub tol_glue: f64,
    pub tol_node: f64,
    pub tol_derivative: f64,
    /// Radial and angular sample counts on each neck annulus.
    pub radial_samples: usize,
    pub angular_samples: usize,
    /// Points per circle when sampling `Ω_{v,ε}`.
    pub per_circle: usize,
    /// Used for quadrature and for any re-solve.
    pub solve: SolveConfig,
    /// Root vertex for the decay fit.
    pub root: Option<usize>,
    /// Required decay ratio per unit of graph distance.
    pub rate: f64,
    /// Finite-difference step for the derivative check; a tenth of the
    /// contraction threshold when absent.
    pub h: Option<f64>,
    /// Edges for the derivative check; all edges when empty.
    pub derivative_edges: Vec<usize>,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig {
            tol_periods: 1e-9,
            tol_glue: 1e-8,
            tol_node: 1e-10,
            tol_derivative: 1e-6,
            radial_samples: 8,
            angular_samples: 32,
            per_circle: 32,
            solve: SolveConfig::default(),
            root: None,
            rate: 2.0,
            h: None,
            derivative_edges: Vec::new(),
        }
    }
}

pub const CHECK_NAMES: [&str; 6] = [
    "decay",
    "derivative",
    "neck_estimate",
    "node_residues",
    "periods",
    "transitions",
];

fn period_integral(d: &Differential, e: usize, sign: Sign, cfg: &CheckConfig) -> Result<Complex64> {
    let s = d.surface();
    let v = s.graph().edge_at(e).vertex(sign);
    contour_integral(
        |z| d.eval_omega(v, z),
        s.point(e, sign),
        s.c1() * s.rho() * cfg.solve.radius_factor,
        cfg.solve.quad_points,
    )
}

/// `max_e |∮_{C(p_e^+, c1 ρ)} ω - α_e|`.
pub fn check_periods(d: &Differential, cfg: &CheckConfig) -> Result<CheckEntry> {
    let g = d.surface().graph();
    let residuals: Vec<f64> = (0..g.edge_count())
        .into_par_iter()
        .map(|e| Ok((period_integral(d, e, Sign::Plus, cfg)? - d.alpha()[e]).norm()))
        .collect::<Result<_>>()?;
    let mut entry = CheckEntry::new("periods", cfg.tol_periods);
    for (e, r) in residuals.into_iter().enumerate() {
        entry.record(r, || format!("edge {}", g.edge_id(e)));
    }
    Ok(entry.finish())
}

/// Points `z = (z_e^-)^{-1}(s e^{iθ})` with `s` log-spaced over `[lo, hi]`.
fn annulus_points(d: &Differential, e: usize, sign: Sign, lo: f64, hi: f64, cfg: &CheckConfig) -> Result<Vec<Complex64>> {
    let s = d.surface();
    let chart = s.chart(e, sign);
    let nr = cfg.radial_samples.max(2);
    let na = cfg.angular_samples.max(4);
    let mut out = Vec::with_capacity(nr * na);
    for i in 0..nr {
        let radius = lo * (hi / lo).powf(i as f64 / (nr - 1) as f64);
        for k in 0..na {
            // Offset the angles so samples avoid the real axis of symmetric data.
            let theta = 2.0 * PI * (k as f64 + 0.25) / na as f64;
            out.push(chart.inverse(Complex64::from_polar(radius, theta))?);
        }
    }
    Ok(out)
}

/// Relative mismatch `|ω(φ_e^+(z)) φ_e^+'(z) - ω(z)|` on each open neck.
pub fn check_transitions(d: &Differential, cfg: &CheckConfig) -> Result<CheckEntry> {
    let s = d.surface();
    let g = s.graph();
    let open: Vec<usize> = (0..g.edge_count()).filter(|&e| s.t(e) != ZERO).collect();
    if open.is_empty() {
        return Ok(CheckEntry::skipped(
            "transitions",
            cfg.tol_glue,
            "no open necks; nodes are covered by node_residues",
        ));
    }
    let samples: Vec<Vec<(Complex64, Complex64, Complex64)>> = open
        .par_iter()
        .map(|&e| {
            let edge = g.edge_at(e);
            let t = s.t(e).norm();
            annulus_points(d, e, Sign::Minus, t / s.rho(), s.rho(), cfg)?
                .into_iter()
                .map(|z| {
                    let here = d.eval_omega(edge.from, z)?;
                    let image = s.transition_map(e, Sign::Plus, z)?;
                    let there = d.eval_omega(edge.to, image)? * s.transition_derivative(e, Sign::Plus, z)?;
                    Ok((z, here, there))
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    // Values far below the overall size of ω carry only the solver's
    // absolute accuracy, so relative errors are floored at a global scale.
    let global = samples
        .iter()
        .flatten()
        .map(|(_, a, b)| a.norm().max(b.norm()))
        .fold(0.0, f64::max);
    let floor = GLUE_FLOOR * global;
    let mut entry = CheckEntry::new("transitions", cfg.tol_glue);
    let mut absolute: f64 = 0.0;
    let mut unfloored: f64 = 0.0;
    for (&e, pairs) in open.iter().zip(&samples) {
        for &(z, a, b) in pairs {
            let local = a.norm().max(b.norm());
            let diff = (a - b).norm();
            absolute = absolute.max(diff);
            if local > 0.0 {
                unfloored = unfloored.max(diff / local);
            }
            let rel = if local.max(floor) > 0.0 { diff / local.max(floor) } else { 0.0 };
            entry.record(rel, || format!("edge {} at z = {z}", g.edge_id(e)));
        }
    }
    entry.details.insert("max_unfloored_relative".into(), unfloored);
    entry.details.insert("max_absolute".into(), absolute);
    entry.details.insert("open_edges".into(), open.len() as f64);
    Ok(entry.finish())
}

/// `|∮_{C(p_e^-)} ω + ∮_{C(p_e^+)} ω|` for a node (`t_e = 0`).
pub fn node_residue(d: &Differential, e: usize, cfg: &CheckConfig) -> Result<f64> {
    if d.surface().t(e) != ZERO {
        return Err(Error::Precondition(format!(
            "edge `{}` is an open neck, not a node",
            d.surface().graph().edge_id(e)
        )));
    }
    Ok((period_integral(d, e, Sign::Minus, cfg)? + period_integral(d, e, Sign::Plus, cfg)?).norm())
}

pub fn check_node_residues(d: &Differential, cfg: &CheckConfig) -> Result<CheckEntry> {
    let s = d.surface();
    let g = s.graph();
    let nodes: Vec<usize> = (0..g.edge_count()).filter(|&e| s.t(e) == ZERO).collect();
    if nodes.is_empty() {
        return Ok(CheckEntry::skipped("node_residues", cfg.tol_node, "every neck is open"));
    }
    let mut entry = CheckEntry::new("node_residues", cfg.tol_node);
    for e in nodes {
        let r = node_residue(d, e, cfg)?;
        entry.record(r, || format!("edge {}", g.edge_id(e)));
    }
    Ok(entry.finish())
}

/// Neck constants of one differential: for each open edge, the sup of
/// `|ω/dz ∓ α_e/(2πi (z - p_e^±))| / ‖α‖∞` over the half annuli
/// `|t_e|^{1/2} ≤ |z_e^±| ≤ ρ`, and the minimum modulus of `ω/dz` there.
fn neck_constants(d: &Differential, cfg: &CheckConfig) -> Result<Vec<(usize, f64, f64)>> {
    let s = d.surface();
    let g = s.graph();
    let scale = {
        let a = d.alpha().iter().map(|z| z.norm()).fold(0.0, f64::max);
        let p = d
            .parts()
            .poles
            .iter()
            .flatten()
            .flat_map(|p| p.coefficients.iter().map(|c| c.norm()))
            .fold(0.0, f64::max);
        if a > 0.0 { a } else { p }
    };
    let open: Vec<usize> = (0..g.edge_count()).filter(|&e| s.t(e) != ZERO).collect();
    open.par_iter()
        .map(|&e| {
            let edge = g.edge_at(e);
            let inner = s.t(e).norm().sqrt();
            let mut sup: f64 = 0.0;
            let mut min = f64::INFINITY;
            for sign in Sign::BOTH {
                let v = edge.vertex(sign);
                let p = s.point(e, sign);
                let leading = match sign {
                    Sign::Plus => d.alpha()[e] / TWO_PI_I,
                    Sign::Minus => -d.alpha()[e] / TWO_PI_I,
                };
                for z in annulus_points(d, e, sign, inner, s.rho(), cfg)? {
                    let w = d.eval_omega(v, z)?;
                    sup = sup.max((w - leading / (z - p)).norm());
                    min = min.min(w.norm());
                }
            }
            let c = if scale > 0.0 { sup / scale } else { 0.0 };
            Ok((e, c, min))
        })
        .collect()
}

/// Measured neck constant, compared with a re-solve at `t/4`.
pub fn check_neck_estimate(d: &Differential, cfg: &CheckConfig) -> Result<CheckEntry> {
    let s = d.surface();
    let g = s.graph();
    let threshold = 2.0;
    if (0..g.edge_count()).all(|e| s.t(e) == ZERO) {
        return Ok(CheckEntry::skipped("neck_estimate", threshold, "no open necks"));
    }
    let here = neck_constants(d, cfg)?;
    let smaller = s.scaled_t(0.25);
    let alpha = PeriodVector::from_dense(g, d.alpha());
    let (d4, _) = solve(&smaller, &alpha, d.parts(), &cfg.solve)?;
    let there = neck_constants(&d4, cfg)?;

    let alpha_sup = d.alpha().iter().map(|z| z.norm()).fold(0.0, f64::max);
    let eps = s.epsilon();
    // The constant is uniform over edges, so stability is judged on the max.
    let (worst_edge, c_max) = here
        .iter()
        .map(|&(e, c, _)| (e, c))
        .fold((here[0].0, 0.0f64), |acc, x| if x.1 > acc.1 { x } else { acc });
    let c4_max = there.iter().map(|x| x.1).fold(0.0, f64::max);
    let ratio = if c_max == 0.0 && c4_max == 0.0 {
        1.0
    } else if c_max == 0.0 || c4_max == 0.0 {
        f64::INFINITY
    } else {
        (c_max / c4_max).max(c4_max / c_max)
    };
    let mut entry = CheckEntry::new("neck_estimate", threshold);
    entry.worst_residual = ratio;
    entry.location = Some(format!("edge {}", g.edge_id(worst_edge)));
    let mut zero_free_edges = 0;
    let mut min_modulus = f64::INFINITY;
    let mut violated = Vec::new();
    for &(e, _, min) in &here {
        // With the 1/(2πi) normalisation of the leading term, the neck is
        // zero-free once |α_e| > 2π C ε ‖α‖∞.
        if alpha_sup > 0.0 && d.alpha()[e].norm() > 2.0 * PI * c_max * eps * alpha_sup {
            zero_free_edges += 1;
            min_modulus = min_modulus.min(min);
            if min.is_nan() || min <= 0.0 {
                violated.push(g.edge_id(e).to_string());
            }
        }
    }
    entry.details.insert("measured_c".into(), c_max);
    entry.details.insert("measured_c_quarter_t".into(), c4_max);
    entry.details.insert("zero_free_edges".into(), zero_free_edges as f64);
    if min_modulus.is_finite() {
        entry.details.insert("zero_free_min_modulus".into(), min_modulus);
    }
    if !violated.is_empty() {
        entry.status = CheckStatus::Fail;
        entry.notes.push(format!("zero found on the necks of {}", violated.join(", ")));
    }
    Ok(entry.finish())
}

/// Per-distance maxima of the sampled sup of `|ω/dz|`.
pub fn decay_profile(d: &Differential, root: usize, cfg: &CheckConfig) -> Result<Vec<(usize, usize, f64)>> {
    let s = d.surface();
    let sups = sphere_sups(d, s, Some(d.parts()), d.epsilon(), cfg.per_circle)?;
    let dist = s.graph().distances_from(root);
    Ok(sups
        .into_iter()
        .enumerate()
        .map(|(v, sup)| (v, dist[v].unwrap_or(0), sup))
        .collect())
}

/// Least-squares slope, intercept of `y` against `x`.
pub fn fit_line(points: &[(f64, f64)]) -> Option<(f64, f64)> {
    let n = points.len() as f64;
    if points.len() < 2 {
        return None;
    }
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayFit {
    /// Largest distance reached by the support of α or by a pole.
    pub support_distance: usize,
    pub max_distance: usize,
    /// `max sup` per distance.
    pub sups: Vec<f64>,
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
    /// Largest `s_{k+1}/s_k` from the support distance on.
    pub max_step_ratio: Option<f64>,
    /// All sups beyond the support vanish.
    pub vanishes: bool,
}

pub fn fit_decay(d: &Differential, root: usize, cfg: &CheckConfig) -> Result<DecayFit> {
    let profile = decay_profile(d, root, cfg)?;
    let g = d.surface().graph();
    let dist = g.distances_from(root);
    let max_distance = profile.iter().map(|p| p.1).max().unwrap_or(0);
    let mut sups = vec![0.0f64; max_distance + 1];
    for &(_, k, sup) in &profile {
        sups[k] = sups[k].max(sup);
    }
    let mut support = 0;
    for (e, a) in d.alpha().iter().enumerate() {
        if *a != ZERO {
            let edge = g.edge_at(e);
            support = support.max(dist[edge.from].unwrap_or(0)).max(dist[edge.to].unwrap_or(0));
        }
    }
    for (v, poles) in d.parts().poles.iter().enumerate() {
        if !poles.is_empty() {
            support = support.max(dist[v].unwrap_or(0));
        }
    }
    let tail: Vec<(f64, f64)> = (support..=max_distance)
        .filter(|&k| sups[k] > 0.0)
        .map(|k| (k as f64, sups[k].ln()))
        .collect();
    let vanishes = support < max_distance && sups[support + 1..].iter().all(|&x| x == 0.0);
    let fit = fit_line(&tail);
    let max_step_ratio = (support..max_distance)
        .filter(|&k| sups[k] > 0.0)
        .map(|k| sups[k + 1] / sups[k])
        .reduce(f64::max);
    Ok(DecayFit {
        support_distance: support,
        max_distance,
        sups,
        slope: fit.map(|f| f.0),
        intercept: fit.map(|f| f.1),
        max_step_ratio,
        vanishes,
    })
}

/// Exponential decay away from the root: slope of `ln sup` against graph
/// distance must be at most `-ln(rate)`.
pub fn check_decay(d: &Differential, root: usize, rate: f64, cfg: &CheckConfig) -> Result<CheckEntry> {
    let threshold = -rate.ln();
    let fit = fit_decay(d, root, cfg)?;
    let mut entry = CheckEntry::new("decay", threshold);
    entry.details.insert("support_distance".into(), fit.support_distance as f64);
    entry.details.insert("max_distance".into(), fit.max_distance as f64);
    if let Some(r) = fit.max_step_ratio {
        entry.details.insert("max_step_ratio".into(), r);
    }
    entry.location = Some(format!("root {}", d.surface().graph().vertex_id(root)));
    if fit.max_distance < 3 {
        entry.status = CheckStatus::Inconclusive;
        entry.notes.push("graph too small: maximum distance below 3".into());
        return Ok(entry);
    }
    if fit.vanishes {
        entry.notes.push("differential vanishes beyond the support".into());
        // Stands in for a slope of -∞.
        entry.worst_residual = f64::MIN;
        return Ok(entry);
    }
    match fit.slope {
        Some(slope) => {
            entry.worst_residual = slope;
            entry.details.insert("slope".into(), slope);
            entry.details.insert("fitted_ratio".into(), (-slope).exp());
            if slope > threshold {
                entry.status = CheckStatus::Fail;
            }
        }
        None => {
            entry.status = CheckStatus::Inconclusive;
            entry.notes.push("fewer than two nonzero distances beyond the support".into());
        }
    }
    Ok(entry)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DerivativeComparison {
    pub edge: String,
    /// Max relative error of the central difference at `h` and `h/2`.
    pub error_h: f64,
    pub error_half: f64,
    pub ratio: f64,
    /// Max relative error of `(4 D(h/2) - D(h))/3`.
    pub extrapolated: f64,
}

/// Compares the `t = 0` derivative formula with central differences of full
/// solves at `t_e = ±h` and `±h/2` (all other `t` stay 0).
pub fn compare_derivative(d: &Differential, e: usize, h: f64, cfg: &CheckConfig) -> Result<DerivativeComparison> {
    let s = d.surface();
    let g = s.graph();
    if s.t_sup() != 0.0 {
        return Err(Error::Precondition("derivative check needs a solution at t = 0".into()));
    }
    if !(h > 0.0 && h <= s.threshold()) {
        return Err(Error::Precondition(format!(
            "step h = {h} must lie in (0, {}] (the contraction threshold)",
            s.threshold()
        )));
    }
    let alpha = PeriodVector::from_dense(g, d.alpha());
    let predicted = derivative_t0(s, &alpha, d.parts(), e, &cfg.solve)?;
    let edge = g.edge_at(e);
    let mut vertices = vec![edge.from];
    if edge.to != edge.from {
        vertices.push(edge.to);
    }
    let samples: Vec<(usize, Complex64)> = vertices
        .iter()
        .flat_map(|&v| {
            domain_samples(s, Some(d.parts()), v, s.epsilon(), 16)
                .into_iter()
                .map(move |z| (v, z))
        })
        .collect();
    let mut solve_cfg = cfg.solve.clone();
    solve_cfg.tol = solve_cfg.tol.min(1e-15);
    let at = |step: f64| -> Result<Differential> {
        let mut t = vec![ZERO; g.edge_count()];
        t[e] = Complex64::new(step, 0.0);
        Ok(solve(&s.with_t(t)?, &alpha, d.parts(), &solve_cfg)?.0)
    };
    let difference = |step: f64| -> Result<Vec<Complex64>> {
        let (plus, minus) = (at(step)?, at(-step)?);
        samples
            .iter()
            .map(|&(v, z)| Ok((plus.eval_omega(v, z)? - minus.eval_omega(v, z)?) / (2.0 * step)))
            .collect()
    };
    let expected: Vec<Complex64> = samples.iter().map(|&(v, z)| predicted.eval(s, v, z)).collect();
    let scale = expected.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let d1 = difference(h)?;
    let d2 = difference(h / 2.0)?;
    let error = |values: &[Complex64]| -> f64 {
        let worst = values
            .iter()
            .zip(&expected)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        if scale > 0.0 { worst / scale } else { worst }
    };
    let extrapolated: Vec<Complex64> = d1.iter().zip(&d2).map(|(a, b)| (4.0 * b - a) / 3.0).collect();
    let (error_h, error_half) = (error(&d1), error(&d2));
    Ok(DerivativeComparison {
        edge: g.edge_id(e).to_string(),
        error_h,
        error_half,
        ratio: if error_half > 0.0 { error_h / error_half } else { 0.0 },
        extrapolated: error(&extrapolated),
    })
}

pub fn check_derivative(d: &Differential, cfg: &CheckConfig) -> Result<CheckEntry> {
    let s = d.surface();
    let g = s.graph();
    if s.t_sup() != 0.0 {
        return Ok(CheckEntry::skipped(
            "derivative",
            cfg.tol_derivative,
            "the derivative formula applies to solutions at t = 0",
        ));
    }
    let edges: Vec<usize> = if cfg.derivative_edges.is_empty() {
        (0..g.edge_count()).collect()
    } else {
        cfg.derivative_edges.clone()
    };
    let mut entry = CheckEntry::new("derivative", cfg.tol_derivative);
    let h = cfg.h.unwrap_or(0.1 * s.threshold());
    let mut ratios = Vec::new();
    for e in edges {
        let cmp = compare_derivative(d, e, h, cfg)?;
        if cmp.error_half > 0.0 {
            ratios.push(cmp.ratio);
        }
        entry.record(cmp.extrapolated, || format!("edge {}", cmp.edge));
    }
    if let (Some(lo), Some(hi)) = (
        ratios.iter().copied().reduce(f64::min),
        ratios.iter().copied().reduce(f64::max),
    ) {
        entry.details.insert("min_error_ratio".into(), lo);
        entry.details.insert("max_error_ratio".into(), hi);
    }
    entry.details.insert("h".into(), h);
    Ok(entry.finish())
}

/// Runs the named checks (all of [`CHECK_NAMES`] when `names` is empty).
pub fn run_checks(d: &Differential, names: &[String], cfg: &CheckConfig) -> Result<VerificationReport> {
    let selected: Vec<&str> = if names.is_empty() {
        CHECK_NAMES.to_vec()
    } else {
        for n in names {
            if !CHECK_NAMES.contains(&n.as_str()) {
                return Err(Error::InvalidConfig(format!(
                    "unknown check `{n}`; expected one of {}",
                    CHECK_NAMES.join(", ")
                )));
            }
        }
        CHECK_NAMES.iter().copied().filter(|c| names.iter().any(|n| n == c)).collect()
    };
    let mut report = VerificationReport::default();
    for name in selected {
        let entry = match name {
            "periods" => check_periods(d, cfg)?,
            "transitions" => check_transitions(d, cfg)?,
            "node_residues" => check_node_residues(d, cfg)?,
            "neck_estimate" => check_neck_estimate(d, cfg)?,
            "decay" => match cfg.root {
                Some(root) => check_decay(d, root, cfg.rate, cfg)?,
                None => CheckEntry::skipped("decay", -cfg.rate.ln(), "no root vertex given"),
            },
            "derivative" => check_derivative(d, cfg)?,
            _ => unreachable!("names are validated above"),
        };
        report.push(entry);
    }
    Ok(report)
}

/// Evaluates `form` at every point, marking singular points with `None`.
pub fn sample_form<W: SphereForm + ?Sized>(form: &W, v: usize, points: &[Complex64]) -> Vec<Option<Complex64>> {
    points
        .iter()
        .map(|&z| match form.eval(v, z) {
            Ok(w) if w.is_finite() => Some(w),
            _ => None,
        })
        .collect()
}
