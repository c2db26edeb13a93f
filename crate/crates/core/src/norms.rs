//! Weighted `ℓ^{p,σ}` norms on vertex and edge sequences, the tail norm
//! `‖λ‖_L` and the sampled sup norm `‖ω‖_Ω`.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::differential::{LambdaTable, SphereForm};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::poles::{PoleLocation, PrincipalParts};
use crate::quadrature::circle_nodes;
use crate::surface::Surface;

#[derive(Debug, Clone, PartialEq)]
pub struct WeightSpec {
    /// Exponent in `[1, ∞]`; `f64::INFINITY` for the sup norm.
    pub p: f64,
    /// `σ(v)` in graph vertex order.
    pub sigma: Vec<f64>,
    edge_sigma: Vec<f64>,
}

impl WeightSpec {
    pub fn new(g: &Graph, p: f64, sigma: Vec<f64>) -> Result<Self> {
        if p.is_nan() || p < 1.0 {
            return Err(Error::InvalidConfig(format!("norm exponent must be in [1, inf], got {p}")));
        }
        if sigma.len() != g.vertex_count() {
            return Err(Error::InvalidConfig(format!(
                "expected {} vertex weights, got {}",
                g.vertex_count(),
                sigma.len()
            )));
        }
        if let Some(v) = sigma.iter().position(|s| !(s.is_finite() && *s > 0.0)) {
            return Err(Error::InvalidConfig(format!(
                "weight of vertex `{}` must be positive and finite",
                g.vertex_id(v)
            )));
        }
        let edge_sigma = g
            .edges()
            .iter()
            .map(|e| 0.5 * (sigma[e.from] + sigma[e.to]))
            .collect();
        Ok(WeightSpec { p, sigma, edge_sigma })
    }

    /// `σ ≡ 1`.
    pub fn uniform(g: &Graph, p: f64) -> Result<Self> {
        WeightSpec::new(g, p, vec![1.0; g.vertex_count()])
    }

    /// `σ(v) = ratio^{d(v, root)}`.
    pub fn geometric(g: &Graph, p: f64, root: usize, ratio: f64) -> Result<Self> {
        if !(ratio.is_finite() && ratio > 0.0) {
            return Err(Error::InvalidConfig(format!("weight ratio must be positive, got {ratio}")));
        }
        let sigma = g
            .distances_from(root)
            .into_iter()
            .map(|d| ratio.powi(d.unwrap_or(0) as i32))
            .collect();
        WeightSpec::new(g, p, sigma)
    }

    pub fn edge_weight(&self, e: usize) -> f64 {
        self.edge_sigma[e]
    }

    fn weighted(&self, weights: &[f64], magnitudes: &[f64]) -> f64 {
        assert_eq!(weights.len(), magnitudes.len(), "sequence does not cover the index set");
        if self.p.is_infinite() {
            weights
                .iter()
                .zip(magnitudes)
                .map(|(s, u)| s * u)
                .fold(0.0, f64::max)
        } else {
            weights
                .iter()
                .zip(magnitudes)
                .map(|(s, u)| (s * u).powf(self.p))
                .sum::<f64>()
                .powf(1.0 / self.p)
        }
    }

    /// `‖u‖_{p,σ}` of vertex magnitudes.
    pub fn norm_vertex(&self, magnitudes: &[f64]) -> f64 {
        self.weighted(&self.sigma, magnitudes)
    }

    /// `‖α‖_{p,σ}` of edge magnitudes with `σ(e) = (σ(v) + σ(v'))/2`.
    pub fn norm_edge(&self, magnitudes: &[f64]) -> f64 {
        self.weighted(&self.edge_sigma, magnitudes)
    }

    pub fn norm_vertex_complex(&self, u: &[Complex64]) -> f64 {
        self.norm_vertex(&u.iter().map(|z| z.norm()).collect::<Vec<_>>())
    }

    pub fn norm_edge_complex(&self, a: &[Complex64]) -> f64 {
        self.norm_edge(&a.iter().map(|z| z.norm()).collect::<Vec<_>>())
    }

    /// `‖(sup_n max(|λ_n^+|, |λ_n^-|))_e‖_E`.
    pub fn norm_lambda(&self, lambda: &LambdaTable) -> f64 {
        self.norm_edge(&lambda.edge_sups())
    }
}

/// Deterministic sample points of `Ω_{v,ε}`: circles of radius `ε` and `2ε`
/// around excluded disks, the circle `|z| = 1/ε` for a pole at infinity, and
/// a coarse grid.
pub fn domain_samples(
    surface: &Surface,
    parts: Option<&PrincipalParts>,
    v: usize,
    eps: f64,
    per_circle: usize,
) -> Vec<Complex64> {
    let g = surface.graph();
    let mut centers: Vec<Complex64> = g
        .ends_at(v)
        .iter()
        .map(|end| surface.point(end.edge, end.sign))
        .collect();
    let mut infinite = false;
    if let Some(parts) = parts {
        for pole in parts.at(v) {
            match pole.at {
                PoleLocation::Finite(q) => centers.push(q),
                PoleLocation::Infinity => infinite = true,
            }
        }
    }
    let mut points = Vec::new();
    for &c in &centers {
        for radius in [eps, 2.0 * eps] {
            points.extend(circle_nodes(c, radius, per_circle).into_iter().map(|(z, _)| z));
        }
    }
    let reach = centers.iter().map(|z| z.norm()).fold(1.0, f64::max) + 2.0 * eps;
    if infinite {
        for radius in [1.0 / eps, 0.5 / eps] {
            points.extend(circle_nodes(Complex64::new(0.0, 0.0), radius, per_circle).into_iter().map(|(z, _)| z));
        }
    }
    let grid = 16;
    for i in 0..=grid {
        for j in 0..=grid {
            let x = -reach + 2.0 * reach * i as f64 / grid as f64;
            let y = -reach + 2.0 * reach * j as f64 / grid as f64;
            points.push(Complex64::new(x, y));
        }
    }
    points.retain(|&z| surface.in_domain(v, z, eps * (1.0 - 1e-12), parts));
    points
}

/// Sampled `sup_{Ω_{v,ε}} |ω/dz|` per vertex.
pub fn sphere_sups<W: SphereForm + Sync + ?Sized>(
    form: &W,
    surface: &Surface,
    parts: Option<&PrincipalParts>,
    eps: f64,
    per_circle: usize,
) -> Result<Vec<f64>> {
    use rayon::prelude::*;
    (0..surface.graph().vertex_count())
        .into_par_iter()
        .map(|v| {
            let mut sup: f64 = 0.0;
            for z in domain_samples(surface, parts, v, eps, per_circle) {
                sup = sup.max(form.eval(v, z)?.norm());
            }
            Ok(sup)
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct OmegaNorm {
    /// Lower bound for the true sup norm.
    pub value: f64,
    pub per_vertex: BTreeMap<String, f64>,
    pub points_per_circle: usize,
}

/// `‖ω‖_Ω` from boundary-biased sampling.
pub fn norm_omega<W: SphereForm + Sync + ?Sized>(
    form: &W,
    surface: &Surface,
    parts: Option<&PrincipalParts>,
    eps: f64,
    weights: &WeightSpec,
    per_circle: usize,
) -> Result<OmegaNorm> {
    let sups = sphere_sups(form, surface, parts, eps, per_circle)?;
    Ok(OmegaNorm {
        value: weights.norm_vertex(&sups),
        per_vertex: surface
            .graph()
            .vertices()
            .iter()
            .cloned()
            .zip(sups)
            .collect(),
        points_per_circle: per_circle,
    })
}

/// `(Σ_{e ∈ E_v} |α_e|)_v`, loops counted on both sides.
pub fn edge_to_vertex(g: &Graph, alpha: &[f64]) -> Vec<f64> {
    (0..g.vertex_count())
        .map(|v| {
            g.incident(v, crate::graph::Sign::Minus)
                .iter()
                .chain(g.incident(v, crate::graph::Sign::Plus))
                .map(|&e| alpha[e].abs())
                .sum()
        })
        .collect()
}

/// `(|u_v| + |u_v'|)_e` for `e` from `v` to `v'`.
pub fn vertex_to_edge(g: &Graph, u: &[f64]) -> Vec<f64> {
    g.edges()
        .iter()
        .map(|e| u[e.from].abs() + u[e.to].abs())
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct NormAdmissibilityReport {
    pub k: usize,
    pub p: f64,
    pub max_degree: usize,
    pub degree_ok: bool,
    pub max_adjacent_ratio: f64,
    pub ratio_ok: bool,
    pub edge_to_vertex_bound: f64,
    pub vertex_to_edge_bound: f64,
    pub empirical_edge_to_vertex: f64,
    pub empirical_vertex_to_edge: f64,
    pub trials: usize,
}

impl NormAdmissibilityReport {
    pub fn admissible(&self) -> bool {
        self.degree_ok && self.ratio_ok
    }

    pub fn bounds_hold(&self) -> bool {
        self.empirical_edge_to_vertex <= self.edge_to_vertex_bound * (1.0 + 1e-12)
            && self.empirical_vertex_to_edge <= self.vertex_to_edge_bound * (1.0 + 1e-12)
    }
}

/// Degree and weight-ratio bounds with the operator bounds
/// `2 k^{(p-1)/p}` (edges to vertices) and `(k (1+k)^p / 2)^{1/p}`
/// (vertices to edges), compared with norms measured on random sequences.
pub fn check_norm_admissibility(g: &Graph, w: &WeightSpec, k: usize, trials: usize, seed: u64) -> NormAdmissibilityReport {
    let max_degree = g.max_degree();
    let mut max_ratio: f64 = 1.0;
    for e in g.edges() {
        let (a, b) = (w.sigma[e.from], w.sigma[e.to]);
        max_ratio = max_ratio.max(a / b).max(b / a);
    }
    let kf = k as f64;
    let (ev_bound, ve_bound) = if w.p.is_infinite() {
        (2.0 * kf, 1.0 + kf)
    } else {
        (
            2.0 * kf.powf((w.p - 1.0) / w.p),
            (kf * (1.0 + kf).powf(w.p) / 2.0).powf(1.0 / w.p),
        )
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut ev, mut ve): (f64, f64) = (0.0, 0.0);
    for trial in 0..trials {
        // Alternate dense and sparse sequences; sparse ones probe single columns.
        let alpha: Vec<f64> = (0..g.edge_count())
            .map(|_| if trial % 2 == 0 || rng.gen_bool(0.2) { rng.gen_range(0.0..1.0) } else { 0.0 })
            .collect();
        let n = w.norm_edge(&alpha);
        if n > 0.0 {
            ev = ev.max(w.norm_vertex(&edge_to_vertex(g, &alpha)) / n);
        }
        let u: Vec<f64> = (0..g.vertex_count())
            .map(|_| if trial % 2 == 0 || rng.gen_bool(0.2) { rng.gen_range(0.0..1.0) } else { 0.0 })
            .collect();
        let n = w.norm_vertex(&u);
        if n > 0.0 {
            ve = ve.max(w.norm_edge(&vertex_to_edge(g, &u)) / n);
        }
    }
    NormAdmissibilityReport {
        k,
        p: w.p,
        max_degree,
        degree_ok: max_degree <= k,
        max_adjacent_ratio: max_ratio,
        ratio_ok: max_ratio <= kf * (1.0 + 1e-12),
        edge_to_vertex_bound: ev_bound,
        vertex_to_edge_bound: ve_bound,
        empirical_edge_to_vertex: ev,
        empirical_vertex_to_edge: ve,
        trials,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(n: usize) -> Graph {
        let vertices: Vec<String> = (0..n).map(|i| format!("v{i}")).collect();
        let edges = (1..n)
            .map(|i| (format!("e{i}"), format!("v{}", i - 1), format!("v{i}")))
            .collect::<Vec<_>>();
        Graph::new(vertices, edges).unwrap()
    }

    #[test]
    fn vertex_norm_examples() {
        let g = path(3);
        let w = WeightSpec::uniform(&g, f64::INFINITY).unwrap();
        assert_eq!(w.norm_vertex(&[1.0, 2.0, 0.5]), 2.0);
        let w1 = WeightSpec::uniform(&g, 1.0).unwrap();
        assert_eq!(w1.norm_vertex(&[1.0, 2.0, 0.5]), 3.5);

        let g = path(4);
        let w = WeightSpec::geometric(&g, f64::INFINITY, 0, 2.0).unwrap();
        assert_eq!(w.norm_vertex(&[0.0, 0.0, 0.0, 1.0]), 8.0);
    }

    #[test]
    fn lambda_norm_examples() {
        let g = path(2);
        let w = WeightSpec::uniform(&g, f64::INFINITY).unwrap();
        let mut l = LambdaTable::zeros(1, 8);
        assert_eq!(w.norm_lambda(&l), 0.0);
        l.set(0, crate::graph::Sign::Minus, 5, Complex64::new(3.0, 0.0));
        assert_eq!(w.norm_lambda(&l), 3.0);
    }

    #[test]
    fn admissibility_examples() {
        // Path graphs have degree at most 2.
        let g = path(6);
        let w = WeightSpec::uniform(&g, 2.0).unwrap();
        let r = check_norm_admissibility(&g, &w, 3, 100, 7);
        assert!(r.admissible() && r.bounds_hold());
        let w = WeightSpec::geometric(&g, 2.0, 0, 2.0).unwrap();
        let r = check_norm_admissibility(&g, &w, 2, 100, 7);
        assert!(r.admissible() && r.bounds_hold());
        let w = WeightSpec::geometric(&g, 2.0, 0, 5.0).unwrap();
        assert!(!check_norm_admissibility(&g, &w, 2, 10, 7).ratio_ok);
    }
}
