//! Opened-node surfaces: gluing points, coordinate charts around them and the
//! neck parameters `t_e`.
//!
//! A point `z` near `p_e^-` on the sphere of `from(e)` is identified with the
//! point `z'` near `p_e^+` on the sphere of `to(e)` when
//! `z_e^-(z) * z_e^+(z') = t_e`.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{Graph, Sign};
use crate::poles::{PoleLocation, PrincipalParts};

const I: Complex64 = Complex64::new(0.0, 1.0);
/// Relative slack allowed on annulus boundaries.
const ANNULUS_SLACK: f64 = 1e-9;

/// Polynomial quotient `num(z)/den(z)`, coefficients in ascending powers.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalChart {
    pub num: Vec<Complex64>,
    pub den: Vec<Complex64>,
}

/// Value and first derivative of a polynomial by Horner's rule.
fn horner(coeffs: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let mut value = Complex64::new(0.0, 0.0);
    let mut deriv = Complex64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        deriv = deriv * z + value;
        value = value * z + c;
    }
    (value, deriv)
}

impl RationalChart {
    pub fn new(num: Vec<Complex64>, den: Vec<Complex64>) -> Self {
        RationalChart { num, den }
    }

    /// Value and derivative at `z`; fails where the denominator vanishes.
    pub fn eval_with_derivative(&self, z: Complex64) -> Result<(Complex64, Complex64)> {
        let (n, dn) = horner(&self.num, z);
        let (d, dd) = horner(&self.den, z);
        let scale: f64 = self.den.iter().map(|c| c.norm()).sum::<f64>() * (1.0 + z.norm()).powi(self.den.len() as i32);
        if d.norm() <= 1e-14 * scale || !d.is_finite() {
            return Err(Error::Singular {
                what: "denominator of rational chart vanishes".into(),
                z,
            });
        }
        Ok((n / d, (dn * d - n * dd) / (d * d)))
    }
}

/// Chart kinds offered for whole surfaces.
#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    /// `z - p`.
    Translation,
    /// `i (z - p)/(z + p)` with `p` on the unit circle.
    Moebius,
    /// Explicit rational charts per edge, `[minus, plus]`.
    CustomRational(Vec<[RationalChart; 2]>),
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Translation => "translation",
            Family::Moebius => "moebius",
            Family::CustomRational(_) => "custom_rational",
        }
    }
}

/// One coordinate chart centred at a gluing point.
#[derive(Debug, Clone, PartialEq)]
pub enum Chart {
    Translation { p: Complex64 },
    Moebius { p: Complex64 },
    Rational { p: Complex64, f: RationalChart, dp: Complex64 },
}

impl Chart {
    pub fn center(&self) -> Complex64 {
        match self {
            Chart::Translation { p } | Chart::Moebius { p } | Chart::Rational { p, .. } => *p,
        }
    }

    pub fn forward(&self, z: Complex64) -> Result<Complex64> {
        match self {
            Chart::Translation { p } => Ok(z - p),
            Chart::Moebius { p } => {
                let d = z + p;
                if d.norm() <= 1e-15 * p.norm() {
                    return Err(Error::Singular {
                        what: "Moebius chart pole at -p".into(),
                        z,
                    });
                }
                Ok(I * (z - p) / d)
            }
            Chart::Rational { f, .. } => f.eval_with_derivative(z).map(|(w, _)| w),
        }
    }

    pub fn derivative(&self, z: Complex64) -> Result<Complex64> {
        match self {
            Chart::Translation { .. } => Ok(Complex64::new(1.0, 0.0)),
            Chart::Moebius { p } => {
                let d = z + p;
                if d.norm() <= 1e-15 * p.norm() {
                    return Err(Error::Singular {
                        what: "Moebius chart pole at -p".into(),
                        z,
                    });
                }
                Ok(2.0 * I * p / (d * d))
            }
            Chart::Rational { f, .. } => f.eval_with_derivative(z).map(|(_, d)| d),
        }
    }

    /// Derivative at the centre.
    pub fn derivative_at_center(&self) -> Complex64 {
        match self {
            Chart::Translation { .. } => Complex64::new(1.0, 0.0),
            Chart::Moebius { p } => I / (2.0 * p),
            Chart::Rational { dp, .. } => *dp,
        }
    }

    pub fn inverse(&self, w: Complex64) -> Result<Complex64> {
        match self {
            Chart::Translation { p } => Ok(p + w),
            Chart::Moebius { p } => {
                let d = I - w;
                if d.norm() == 0.0 {
                    return Err(Error::Singular {
                        what: "Moebius inverse pole at w = i".into(),
                        z: w,
                    });
                }
                Ok(p * (I + w) / d)
            }
            Chart::Rational { p, dp, .. } => {
                if w == Complex64::new(0.0, 0.0) {
                    return Ok(*p);
                }
                self.newton(p + w / dp, w).or_else(|_| self.continuation(w))
            }
        }
    }

    fn newton(&self, start: Complex64, w: Complex64) -> Result<Complex64> {
        let Chart::Rational { f, .. } = self else {
            unreachable!("newton inversion is only used for rational charts")
        };
        let mut z = start;
        let mut residual = f64::INFINITY;
        for _ in 0..60 {
            let (value, deriv) = f.eval_with_derivative(z)?;
            let r = value - w;
            residual = r.norm();
            if deriv.norm() == 0.0 || !deriv.is_finite() {
                break;
            }
            let step = r / deriv;
            z -= step;
            if step.norm() <= 4.0 * f64::EPSILON * (1.0 + z.norm()) {
                let (value, _) = f.eval_with_derivative(z)?;
                let residual = (value - w).norm();
                if residual <= 1e-12 * (1.0 + w.norm()) {
                    return Ok(z);
                }
                return Err(Error::InversionFailed { residual });
            }
        }
        Err(Error::InversionFailed { residual })
    }

    /// Newton along the segment from 0 to `w`, used when the direct start fails.
    fn continuation(&self, w: Complex64) -> Result<Complex64> {
        let mut z = self.center();
        let steps = 32;
        for k in 1..=steps {
            let target = w * (k as f64 / steps as f64);
            z = self.newton(z, target)?;
        }
        Ok(z)
    }
}

/// Parameters of an opened-node surface, indexed by the graph's edge order.
#[derive(Debug, Clone)]
pub struct SurfaceParams {
    /// `[p_e^-, p_e^+]` per edge.
    pub points: Vec<[Complex64; 2]>,
    pub t: Vec<Complex64>,
    pub rho: f64,
    pub family: Family,
    pub c1: Option<f64>,
    pub c2: Option<f64>,
    pub epsilon: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct Surface {
    graph: Graph,
    charts: Vec<[Chart; 2]>,
    t: Vec<Complex64>,
    rho: f64,
    c1: f64,
    c2: f64,
    epsilon: f64,
    family: Family,
}

/// Samples used to measure chart constants when they are not given.
const DEFAULT_CONSTANT_SAMPLES: usize = 256;

impl Surface {
    pub fn new(graph: Graph, params: SurfaceParams) -> Result<Self> {
        let SurfaceParams {
            points,
            t,
            rho,
            family,
            c1,
            c2,
            epsilon,
        } = params;
        let m = graph.edge_count();
        if points.len() != m || t.len() != m {
            return Err(Error::InvalidSurface(format!(
                "expected {m} gluing point pairs and t values, got {} and {}",
                points.len(),
                t.len()
            )));
        }
        if !(rho.is_finite() && rho > 0.0) {
            return Err(Error::InvalidSurface(format!("rho must be positive, got {rho}")));
        }
        for (e, pair) in points.iter().enumerate() {
            for (sign, p) in Sign::BOTH.iter().zip(pair) {
                if !p.is_finite() {
                    return Err(Error::InvalidSurface(format!(
                        "gluing point p{sign} of edge `{}` is not finite",
                        graph.edge_id(e)
                    )));
                }
            }
            if !t[e].is_finite() {
                return Err(Error::InvalidSurface(format!(
                    "t of edge `{}` is not finite",
                    graph.edge_id(e)
                )));
            }
        }

        let charts: Vec<[Chart; 2]> = match &family {
            Family::Translation => points
                .iter()
                .map(|&[a, b]| [Chart::Translation { p: a }, Chart::Translation { p: b }])
                .collect(),
            Family::Moebius => {
                if rho >= 1.0 {
                    return Err(Error::InvalidSurface(format!(
                        "Moebius charts need rho < 1, got {rho}"
                    )));
                }
                for (e, pair) in points.iter().enumerate() {
                    if pair.iter().any(|p| (p.norm() - 1.0).abs() > 1e-12) {
                        return Err(Error::InvalidSurface(format!(
                            "Moebius gluing points of edge `{}` must lie on the unit circle",
                            graph.edge_id(e)
                        )));
                    }
                }
                points
                    .iter()
                    .map(|&[a, b]| [Chart::Moebius { p: a }, Chart::Moebius { p: b }])
                    .collect()
            }
            Family::CustomRational(list) => {
                if list.len() != m {
                    return Err(Error::InvalidSurface(format!(
                        "expected {m} custom chart pairs, got {}",
                        list.len()
                    )));
                }
                let mut charts = Vec::with_capacity(m);
                for (e, (pair, fs)) in points.iter().zip(list).enumerate() {
                    let make = |k: usize| -> Result<Chart> {
                        let p = pair[k];
                        let f = fs[k].clone();
                        let (value, dp) = f.eval_with_derivative(p)?;
                        let scale: f64 = f.num.iter().map(|c| c.norm()).sum::<f64>().max(1.0);
                        if value.norm() > 1e-12 * scale * (1.0 + p.norm()).powi(f.num.len() as i32) {
                            return Err(Error::InvalidSurface(format!(
                                "custom chart {} of edge `{}` does not vanish at its gluing point",
                                Sign::BOTH[k],
                                graph.edge_id(e)
                            )));
                        }
                        if dp.norm() < 1e-12 {
                            return Err(Error::InvalidSurface(format!(
                                "custom chart {} of edge `{}` has a critical point at its gluing point",
                                Sign::BOTH[k],
                                graph.edge_id(e)
                            )));
                        }
                        Ok(Chart::Rational { p, f, dp })
                    };
                    charts.push([make(0)?, make(1)?]);
                }
                charts
            }
        };

        let (c1, c2) = match (&family, c1, c2) {
            (_, Some(a), Some(b)) => (a, b),
            (Family::Translation, a, b) => (a.unwrap_or(1.0), b.unwrap_or(1.0)),
            (Family::Moebius, a, b) => (a.unwrap_or(2.0 / (1.0 + rho)), b.unwrap_or(2.0 / (1.0 - rho))),
            (Family::CustomRational(_), a, b) => {
                let (lo, hi) = measure_ratio_bounds(&charts, rho, DEFAULT_CONSTANT_SAMPLES)?;
                (a.unwrap_or(lo), b.unwrap_or(hi))
            }
        };
        if !(c1.is_finite() && c2.is_finite() && c1 > 0.0 && c1 <= c2) {
            return Err(Error::InvalidSurface(format!(
                "chart constants must satisfy 0 < c1 <= c2, got c1 = {c1}, c2 = {c2}"
            )));
        }
        let epsilon = epsilon.unwrap_or(rho * c1 / 2.0);
        if !(epsilon.is_finite() && epsilon > 0.0 && epsilon <= rho * c1 * (1.0 + 1e-12)) {
            return Err(Error::InvalidSurface(format!(
                "epsilon must lie in (0, rho*c1] = (0, {}], got {epsilon}",
                rho * c1
            )));
        }

        Ok(Surface {
            graph,
            charts,
            t,
            rho,
            c1,
            c2,
            epsilon,
            family,
        })
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn c1(&self) -> f64 {
        self.c1
    }

    pub fn c2(&self) -> f64 {
        self.c2
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn t(&self, e: usize) -> Complex64 {
        self.t[e]
    }

    pub fn t_values(&self) -> &[Complex64] {
        &self.t
    }

    pub fn t_sup(&self) -> f64 {
        self.t.iter().map(|t| t.norm()).fold(0.0, f64::max)
    }

    pub fn point(&self, e: usize, sign: Sign) -> Complex64 {
        self.charts[e][sign.index()].center()
    }

    pub fn chart(&self, e: usize, sign: Sign) -> &Chart {
        &self.charts[e][sign.index()]
    }

    /// Smallness bound `c1 ρ ε / (4 c2²)` on `‖t‖∞`.
    pub fn threshold(&self) -> f64 {
        self.c1 * self.rho * self.epsilon / (4.0 * self.c2 * self.c2)
    }

    /// Same surface with different neck parameters.
    pub fn with_t(&self, t: Vec<Complex64>) -> Result<Self> {
        if t.len() != self.t.len() || t.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidSurface(
                "replacement t must be finite and cover every edge".into(),
            ));
        }
        Ok(Surface { t, ..self.clone() })
    }

    /// Same surface with every `t_e` multiplied by `factor`.
    pub fn scaled_t(&self, factor: f64) -> Self {
        Surface {
            t: self.t.iter().map(|t| t * factor).collect(),
            ..self.clone()
        }
    }

    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon <= self.rho * self.c1 * (1.0 + 1e-12)) {
            return Err(Error::InvalidSurface(format!(
                "epsilon must lie in (0, rho*c1], got {epsilon}"
            )));
        }
        Ok(Surface {
            epsilon,
            ..self.clone()
        })
    }

    pub fn coord_forward(&self, e: usize, sign: Sign, z: Complex64) -> Result<Complex64> {
        self.chart(e, sign).forward(z)
    }

    pub fn coord_inverse(&self, e: usize, sign: Sign, w: Complex64) -> Result<Complex64> {
        if w.norm() >= self.rho * (1.0 + ANNULUS_SLACK) {
            return Err(Error::Domain(format!(
                "|w| = {} is not below rho = {}",
                w.norm(),
                self.rho
            )));
        }
        self.chart(e, sign).inverse(w)
    }

    pub fn coord_derivative(&self, e: usize, sign: Sign, z: Complex64) -> Result<Complex64> {
        self.chart(e, sign).derivative(z)
    }

    /// Chart value on the source side of `φ_e^sign` after checking the annulus.
    fn source_coordinate(&self, e: usize, sign: Sign, z: Complex64) -> Result<Complex64> {
        let t = self.t[e];
        if t == Complex64::new(0.0, 0.0) {
            return Err(Error::DegenerateNode(self.graph.edge_id(e).to_string()));
        }
        let w = self.chart(e, sign.opposite()).forward(z)?;
        let s = w.norm();
        let inner = t.norm() / self.rho;
        if s < inner * (1.0 - ANNULUS_SLACK) || s > self.rho * (1.0 + ANNULUS_SLACK) {
            return Err(Error::Domain(format!(
                "|z_{}{}(z)| = {s:e} outside the neck annulus [{inner:e}, {:e}]",
                self.graph.edge_id(e),
                sign.opposite(),
                self.rho
            )));
        }
        Ok(w)
    }

    /// `φ_e^+ = (z_e^+)^{-1}(t_e / z_e^-)` for `Plus`, `φ_e^-` for `Minus`.
    pub fn transition_map(&self, e: usize, sign: Sign, z: Complex64) -> Result<Complex64> {
        let w = self.source_coordinate(e, sign, z)?;
        self.chart(e, sign).inverse(self.t[e] / w)
    }

    pub fn transition_derivative(&self, e: usize, sign: Sign, z: Complex64) -> Result<Complex64> {
        let w = self.source_coordinate(e, sign, z)?;
        let target = self.chart(e, sign);
        let image = target.inverse(self.t[e] / w)?;
        let dw = self.chart(e, sign.opposite()).derivative(z)?;
        Ok(-self.t[e] * dw / (w * w * target.derivative(image)?))
    }

    /// Whether `z` lies in the truncated sphere `Ω_{v,eps}`.
    pub fn in_domain(&self, v: usize, z: Complex64, eps: f64, parts: Option<&PrincipalParts>) -> bool {
        let ends = self.graph.ends_at(v);
        if ends
            .iter()
            .any(|end| (z - self.point(end.edge, end.sign)).norm() < eps)
        {
            return false;
        }
        if let Some(parts) = parts {
            for pole in parts.at(v) {
                let outside = match pole.at {
                    PoleLocation::Finite(q) => (z - q).norm() >= eps,
                    PoleLocation::Infinity => z.norm() <= 1.0 / eps,
                };
                if !outside {
                    return false;
                }
            }
        }
        true
    }

    /// Checks principal parts against the gluing disks: every pole disk of
    /// radius `r` must avoid the disks `D(p, c1 ρ)`, and `ε ≤ r`.
    pub fn check_poles(&self, parts: &PrincipalParts) -> Result<()> {
        parts.check_shape(&self.graph)?;
        if parts.is_empty() {
            return Ok(());
        }
        let r = parts.radius;
        if self.epsilon > r * (1.0 + 1e-12) {
            return Err(Error::InvalidPoles(format!(
                "epsilon {} exceeds the pole exclusion radius {r}",
                self.epsilon
            )));
        }
        let disk = self.c1 * self.rho;
        for v in 0..self.graph.vertex_count() {
            let name = self.graph.vertex_id(v);
            let far = self
                .graph
                .ends_at(v)
                .iter()
                .map(|end| self.point(end.edge, end.sign).norm() + disk)
                .fold(0.0, f64::max);
            let has_inf = parts.has_infinity(v);
            for pole in parts.at(v) {
                match pole.at {
                    PoleLocation::Finite(q) => {
                        for end in self.graph.ends_at(v) {
                            let p = self.point(end.edge, end.sign);
                            if (q - p).norm() < r + disk {
                                return Err(Error::InvalidPoles(format!(
                                    "pole at {q} on `{name}` meets the gluing disk of edge `{}`",
                                    self.graph.edge_id(end.edge)
                                )));
                            }
                        }
                        if has_inf && q.norm() + r > 1.0 / r {
                            return Err(Error::InvalidPoles(format!(
                                "pole at {q} on `{name}` meets the disk around infinity"
                            )));
                        }
                    }
                    PoleLocation::Infinity => {
                        if far > 1.0 / r {
                            return Err(Error::InvalidPoles(format!(
                                "gluing disks on `{name}` meet the disk |z| >= 1/r around infinity"
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Measured chart constants, disk disjointness, injectivity of custom
    /// charts and the bounds on `‖t‖∞`.
    pub fn validate_admissibility(&self, samples: usize) -> AdmissibilityReport {
        let samples = samples.max(64);
        let (measured_min, measured_max, ratio_error) = match measure_ratio_bounds(&self.charts, self.rho, samples) {
            Ok((lo, hi)) => (lo, hi, None),
            Err(err) => (f64::NAN, f64::NAN, Some(err.to_string())),
        };
        let tol = 1e-9;
        let ratio_ok = ratio_error.is_none()
            && measured_min >= self.c1 * (1.0 - tol)
            && measured_max <= self.c2 * (1.0 + tol);

        let radius = self.rho * self.c1;
        let mut disjoint = BTreeMap::new();
        let mut overlaps = Vec::new();
        for v in 0..self.graph.vertex_count() {
            let ends = self.graph.ends_at(v);
            let mut ok = true;
            for (i, a) in ends.iter().enumerate() {
                for b in &ends[i + 1..] {
                    let d = (self.point(a.edge, a.sign) - self.point(b.edge, b.sign)).norm();
                    if d < 2.0 * radius {
                        ok = false;
                        overlaps.push(format!(
                            "{}: disks of {}{} and {}{} overlap (distance {d}, need {})",
                            self.graph.vertex_id(v),
                            self.graph.edge_id(a.edge),
                            a.sign,
                            self.graph.edge_id(b.edge),
                            b.sign,
                            2.0 * radius
                        ));
                    }
                }
            }
            disjoint.insert(self.graph.vertex_id(v).to_string(), ok);
        }

        let mut injectivity_failures = Vec::new();
        for (e, pair) in self.charts.iter().enumerate() {
            for (k, chart) in pair.iter().enumerate() {
                if let Chart::Rational { .. } = chart {
                    if let Err(reason) = check_injective(chart, self.rho, samples) {
                        injectivity_failures.push(format!(
                            "{}{}: {reason}",
                            self.graph.edge_id(e),
                            Sign::BOTH[k]
                        ));
                    }
                }
            }
        }

        let t_sup = self.t_sup();
        let rho_squared = self.rho * self.rho;
        let threshold = self.threshold();
        AdmissibilityReport {
            family: self.family.name().to_string(),
            samples,
            rho: self.rho,
            epsilon: self.epsilon,
            c1: self.c1,
            c2: self.c2,
            measured_min,
            measured_max,
            ratio_ok,
            ratio_error,
            disjoint,
            overlaps,
            injectivity_failures,
            t_sup,
            rho_squared,
            t_below_rho_squared: t_sup < rho_squared,
            threshold,
            t_below_threshold: t_sup <= threshold,
        }
    }
}

/// Min and max of `|z - p| / |z_e(z)|` over sampled disks `|z_e| ≤ ρ`,
/// including the limit `1/|z_e'(p)|` at the centre.
pub fn measure_ratio_bounds(charts: &[[Chart; 2]], rho: f64, samples: usize) -> Result<(f64, f64)> {
    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    for chart in charts.iter().flatten() {
        let p = chart.center();
        let at_center = 1.0 / chart.derivative_at_center().norm();
        lo = lo.min(at_center);
        hi = hi.max(at_center);
        for s in [0.25, 0.5, 0.75, 1.0] {
            for k in 0..samples {
                let theta = 2.0 * PI * k as f64 / samples as f64;
                let w = Complex64::from_polar(s * rho, theta);
                let z = chart.inverse(w)?;
                let ratio = (z - p).norm() / w.norm();
                lo = lo.min(ratio);
                hi = hi.max(ratio);
            }
        }
    }
    if lo.is_infinite() {
        lo = 1.0;
        hi = 1.0;
    }
    Ok((lo, hi))
}

/// Number of turns of a closed sampled curve around `center`.
fn winding_number(values: &[Complex64], center: Complex64) -> f64 {
    let mut total = 0.0;
    for k in 0..values.len() {
        let a = values[k] - center;
        let b = values[(k + 1) % values.len()] - center;
        total += (b / a).arg();
    }
    total / (2.0 * PI)
}

/// Argument-principle test: the preimage `γ` of `|w| = ρ` must wind once
/// around the centre, the round trip must close, and the denominator must
/// have no zero inside `γ` (so every `|w| < ρ` has exactly one preimage).
fn check_injective(chart: &Chart, rho: f64, samples: usize) -> std::result::Result<(), String> {
    let Chart::Rational { p, f, .. } = chart else {
        return Ok(());
    };
    let n = samples.max(256);
    let mut curve = Vec::with_capacity(n);
    for k in 0..n {
        let w = Complex64::from_polar(rho, 2.0 * PI * k as f64 / n as f64);
        let z = chart.inverse(w).map_err(|e| e.to_string())?;
        let back = chart.forward(z).map_err(|e| e.to_string())?;
        if (back - w).norm() > 1e-10 * rho {
            return Err(format!("round trip fails at w = {w}"));
        }
        curve.push(z);
    }
    let turns = winding_number(&curve, *p);
    if (turns - 1.0).abs() > 1e-6 {
        return Err(format!("boundary curve winds {turns:.3} times around the gluing point"));
    }
    let den: Vec<Complex64> = curve.iter().map(|&z| horner(&f.den, z).0).collect();
    let poles_inside = winding_number(&den, Complex64::new(0.0, 0.0));
    if poles_inside.abs() > 1e-6 {
        return Err(format!("chart has {poles_inside:.0} pole(s) inside its disk"));
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct AdmissibilityReport {
    pub family: String,
    pub samples: usize,
    pub rho: f64,
    pub epsilon: f64,
    pub c1: f64,
    pub c2: f64,
    pub measured_min: f64,
    pub measured_max: f64,
    pub ratio_ok: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ratio_error: Option<String>,
    pub disjoint: BTreeMap<String, bool>,
    pub overlaps: Vec<String>,
    pub injectivity_failures: Vec<String>,
    pub t_sup: f64,
    pub rho_squared: f64,
    pub t_below_rho_squared: bool,
    pub threshold: f64,
    pub t_below_threshold: bool,
}

impl AdmissibilityReport {
    /// Hard requirements; exceeding the smallness threshold is only a warning.
    pub fn passed(&self) -> bool {
        self.ratio_ok
            && self.disjoint.values().all(|&ok| ok)
            && self.injectivity_failures.is_empty()
            && self.t_below_rho_squared
    }

    pub fn failures(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !self.ratio_ok {
            out.push(match &self.ratio_error {
                Some(err) => format!("chart ratio could not be measured: {err}"),
                None => format!(
                    "measured |z-p|/|z_e(z)| in [{}, {}] is not within [c1, c2] = [{}, {}]",
                    self.measured_min, self.measured_max, self.c1, self.c2
                ),
            });
        }
        out.extend(self.overlaps.iter().cloned());
        out.extend(self.injectivity_failures.iter().cloned());
        if !self.t_below_rho_squared {
            out.push(format!(
                "|t|_inf = {} violates |t_e| < rho^2 = {}",
                self.t_sup, self.rho_squared
            ));
        }
        out
    }
}
