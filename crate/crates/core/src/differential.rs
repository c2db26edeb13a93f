//! Chart-wise representation `ω = ω₁(α, P) + ω₂(λ)`.
//!
//! `ω₁` is the explicit partial-fraction differential carrying the periods
//! and principal parts; `ω₂` is the truncated Laurent tail
//! `Σ λ_{e,n}^± (ε/4)^n dz/(z - p_e^±)^n`, `2 ≤ n ≤ N`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::graph::{EdgeEnd, Sign};
use crate::poles::{PoleLocation, PrincipalParts};
use crate::quadrature;
use crate::surface::Surface;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const TWO_PI_I: Complex64 = Complex64::new(0.0, 2.0 * PI);

/// A differential given sphere by sphere as `f(z) dz`.
pub trait SphereForm {
    /// `ω/dz` at `z` on sphere `v`.
    fn eval(&self, v: usize, z: Complex64) -> Result<Complex64>;

    /// `ω/dw` in the chart `w = 1/z` near infinity.
    fn eval_w(&self, v: usize, w: Complex64) -> Result<Complex64> {
        if w == ZERO {
            return Err(Error::Singular {
                what: "w = 0 needs a closed form near infinity".into(),
                z: w,
            });
        }
        Ok(-self.eval(v, 1.0 / w)? / (w * w))
    }
}

impl<F> SphereForm for F
where
    F: Fn(usize, Complex64) -> Result<Complex64>,
{
    fn eval(&self, v: usize, z: Complex64) -> Result<Complex64> {
        self(v, z)
    }
}

/// Tail coefficients `λ_{e,n}^±` for `2 ≤ n ≤ N`.
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaTable {
    order: usize,
    values: Vec<[Vec<Complex64>; 2]>,
}

impl LambdaTable {
    pub fn zeros(edges: usize, order: usize) -> Self {
        assert!(order >= 2, "truncation order must be at least 2");
        LambdaTable {
            order,
            values: vec![[vec![ZERO; order - 1], vec![ZERO; order - 1]]; edges],
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn edge_count(&self) -> usize {
        self.values.len()
    }

    pub fn get(&self, e: usize, sign: Sign, n: usize) -> Complex64 {
        self.values[e][sign.index()][n - 2]
    }

    pub fn set(&mut self, e: usize, sign: Sign, n: usize, value: Complex64) {
        self.values[e][sign.index()][n - 2] = value;
    }

    /// Coefficients for `n = 2..=N` at one edge end.
    pub fn row(&self, e: usize, sign: Sign) -> &[Complex64] {
        &self.values[e][sign.index()]
    }

    pub fn row_mut(&mut self, e: usize, sign: Sign) -> &mut [Complex64] {
        &mut self.values[e][sign.index()]
    }

    /// Number of unknowns `2 |E| (N - 1)`.
    pub fn len(&self) -> usize {
        2 * self.values.len() * (self.order - 1)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Flat position of `(e, sign, n)`, edge-major then sign then `n`.
    pub fn flat_index(&self, e: usize, sign: Sign, n: usize) -> usize {
        (e * 2 + sign.index()) * (self.order - 1) + (n - 2)
    }

    pub fn to_flat(&self) -> Vec<Complex64> {
        self.values
            .iter()
            .flat_map(|pair| pair.iter().flatten().copied())
            .collect()
    }

    pub fn from_flat(edges: usize, order: usize, flat: &[Complex64]) -> Self {
        let mut table = LambdaTable::zeros(edges, order);
        for e in 0..edges {
            for sign in Sign::BOTH {
                for n in 2..=order {
                    let i = table.flat_index(e, sign, n);
                    table.set(e, sign, n, flat[i]);
                }
            }
        }
        table
    }

    /// `sup_n max(|λ_n^+|, |λ_n^-|)` per edge.
    pub fn edge_sups(&self) -> Vec<f64> {
        self.values
            .iter()
            .map(|pair| pair.iter().flatten().map(|x| x.norm()).fold(0.0, f64::max))
            .collect()
    }

    pub fn max_abs_diff(&self, other: &LambdaTable) -> f64 {
        self.to_flat()
            .iter()
            .zip(other.to_flat())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn sub(&self, other: &LambdaTable) -> LambdaTable {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn add(&self, other: &LambdaTable) -> LambdaTable {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn scale(&self, factor: Complex64) -> LambdaTable {
        let mut out = self.clone();
        for x in out.values.iter_mut().flat_map(|p| p.iter_mut().flatten()) {
            *x *= factor;
        }
        out
    }

    fn zip_with(&self, other: &LambdaTable, f: impl Fn(Complex64, Complex64) -> Complex64) -> LambdaTable {
        assert_eq!(self.order, other.order, "truncation orders differ");
        assert_eq!(self.values.len(), other.values.len(), "edge counts differ");
        let mut out = self.clone();
        for (e, pair) in out.values.iter_mut().enumerate() {
            for (k, row) in pair.iter_mut().enumerate() {
                for (i, x) in row.iter_mut().enumerate() {
                    *x = f(*x, other.values[e][k][i]);
                }
            }
        }
        out
    }

    pub fn is_finite(&self) -> bool {
        self.to_flat().iter().all(|x| x.is_finite())
    }
}

/// One simple-pole or higher-order term of a sphere, in a form usable in
/// both charts.
#[derive(Debug, Clone, Copy)]
struct Term {
    at: Complex64,
    /// Coefficient of `dz/(z - at)^n`.
    coefficient: Complex64,
    n: usize,
    /// Part of the tail correction `ω₂` rather than of `ω₁`.
    tail: bool,
}

/// Everything that lives on one sphere, flattened for fast evaluation.
#[derive(Debug, Clone, Default)]
struct SphereData {
    terms: Vec<Term>,
    /// Coefficients `a_n` (n ≥ 2) of a pole at infinity.
    infinity: Vec<(usize, Complex64)>,
    /// Points where the form is singular.
    singular: Vec<Complex64>,
    /// Largest modulus among finite singular points.
    reach: f64,
    switch_radius: f64,
    residue_sum: Complex64,
}

/// A differential produced by the solver (or assembled by hand).
#[derive(Debug, Clone)]
pub struct Differential {
    surface: Surface,
    alpha: Vec<Complex64>,
    parts: PrincipalParts,
    lambda: LambdaTable,
    spheres: Vec<SphereData>,
}

impl Differential {
    pub fn new(
        surface: Surface,
        alpha: Vec<Complex64>,
        parts: PrincipalParts,
        lambda: LambdaTable,
    ) -> Result<Self> {
        let g = surface.graph();
        if alpha.len() != g.edge_count() || lambda.edge_count() != g.edge_count() {
            return Err(Error::InvalidConfig(
                "period and tail data must cover every edge".into(),
            ));
        }
        parts.check_shape(g)?;
        let mut d = Differential {
            surface,
            alpha,
            parts,
            lambda,
            spheres: Vec::new(),
        };
        d.rebuild();
        Ok(d)
    }

    /// Differential with no tail correction, i.e. `ω = ω₁`.
    pub fn omega1_only(surface: Surface, alpha: Vec<Complex64>, parts: PrincipalParts, order: usize) -> Result<Self> {
        let lambda = LambdaTable::zeros(surface.graph().edge_count(), order);
        Differential::new(surface, alpha, parts, lambda)
    }

    fn rebuild(&mut self) {
        let s = &self.surface;
        let g = s.graph();
        let quarter = s.epsilon() / 4.0;
        let mut spheres = vec![SphereData::default(); g.vertex_count()];
        for (v, data) in spheres.iter_mut().enumerate() {
            for EdgeEnd { edge, sign } in g.ends_at(v) {
                let p = s.point(edge, sign);
                let a = self.alpha[edge] / TWO_PI_I;
                let coefficient = match sign {
                    Sign::Plus => a,
                    Sign::Minus => -a,
                };
                data.terms.push(Term {
                    at: p,
                    coefficient,
                    n: 1,
                    tail: false,
                });
                let mut scale = quarter * quarter;
                for (i, &l) in self.lambda.row(edge, sign).iter().enumerate() {
                    if l != ZERO {
                        data.terms.push(Term {
                            at: p,
                            coefficient: l * scale,
                            n: i + 2,
                            tail: true,
                        });
                    }
                    scale *= quarter;
                }
                data.singular.push(p);
            }
            for pole in self.parts.at(v) {
                match pole.at {
                    PoleLocation::Finite(q) => {
                        for (i, &a) in pole.coefficients.iter().enumerate() {
                            data.terms.push(Term {
                                at: q,
                                coefficient: a,
                                n: i + 1,
                                tail: false,
                            });
                        }
                        data.singular.push(q);
                    }
                    PoleLocation::Infinity => {
                        data.infinity = pole
                            .coefficients
                            .iter()
                            .enumerate()
                            .skip(1)
                            .map(|(i, &a)| (i + 1, a))
                            .collect();
                    }
                }
            }
            data.residue_sum = data.terms.iter().filter(|t| t.n == 1).map(|t| t.coefficient).sum();
            data.reach = data.singular.iter().map(|z| z.norm()).fold(0.0, f64::max);
            let r = if self.parts.radius > 0.0 && !self.parts.is_empty() {
                1.0 / self.parts.radius
            } else {
                0.0
            };
            data.switch_radius = 2.0 * r.max(data.reach).max(1.0);
        }
        self.spheres = spheres;
    }

    pub fn surface(&self) -> &Surface {
        &self.surface
    }

    pub fn alpha(&self) -> &[Complex64] {
        &self.alpha
    }

    pub fn parts(&self) -> &PrincipalParts {
        &self.parts
    }

    pub fn lambda(&self) -> &LambdaTable {
        &self.lambda
    }

    pub fn order(&self) -> usize {
        self.lambda.order()
    }

    pub fn epsilon(&self) -> f64 {
        self.surface.epsilon()
    }

    /// Same data with a replaced tail table.
    pub fn with_lambda(&self, lambda: LambdaTable) -> Result<Self> {
        Differential::new(self.surface.clone(), self.alpha.clone(), self.parts.clone(), lambda)
    }

    /// `ω(cα, cλ)`: both parts scaled, principal parts scaled as well.
    pub fn scaled(&self, factor: Complex64) -> Result<Self> {
        let mut parts = self.parts.clone();
        for a in parts.poles.iter_mut().flatten().flat_map(|p| p.coefficients.iter_mut()) {
            *a *= factor;
        }
        Differential::new(
            self.surface.clone(),
            self.alpha.iter().map(|a| a * factor).collect(),
            parts,
            self.lambda.scale(factor),
        )
    }

    fn check_regular(&self, v: usize, z: Complex64) -> Result<()> {
        for &p in &self.spheres[v].singular {
            if (z - p).norm() <= 1e-14 * (1.0 + p.norm()) {
                return Err(Error::Singular {
                    what: format!("pole of the differential on `{}`", self.surface.graph().vertex_id(v)),
                    z,
                });
            }
        }
        if !z.is_finite() {
            return Err(Error::Singular {
                what: "non-finite point".into(),
                z,
            });
        }
        Ok(())
    }

    fn sphere(&self, v: usize) -> Result<&SphereData> {
        self.spheres.get(v).ok_or_else(|| Error::UnknownVertex(format!("#{v}")))
    }

    /// `ω₁/dz` at `z` on sphere `v`.
    pub fn eval_omega1(&self, v: usize, z: Complex64) -> Result<Complex64> {
        self.sphere(v)?;
        self.check_regular(v, z)?;
        if z.norm() > self.spheres[v].switch_radius {
            return Ok(-self.omega_w(v, 1.0 / z, true, false) / (z * z));
        }
        Ok(self.omega_z(v, z, true, false))
    }

    /// `ω₂/dz` at `z` on sphere `v`.
    pub fn eval_omega2(&self, v: usize, z: Complex64) -> Result<Complex64> {
        self.sphere(v)?;
        self.check_regular(v, z)?;
        if z.norm() > self.spheres[v].switch_radius {
            return Ok(-self.omega_w(v, 1.0 / z, false, true) / (z * z));
        }
        Ok(self.omega_z(v, z, false, true))
    }

    /// `ω/dz` at `z` on sphere `v`.
    pub fn eval_omega(&self, v: usize, z: Complex64) -> Result<Complex64> {
        self.sphere(v)?;
        self.check_regular(v, z)?;
        if z.norm() > self.spheres[v].switch_radius {
            return Ok(-self.omega_w(v, 1.0 / z, true, true) / (z * z));
        }
        Ok(self.omega_z(v, z, true, true))
    }

    fn omega_z(&self, v: usize, z: Complex64, first: bool, second: bool) -> Complex64 {
        let data = &self.spheres[v];
        let mut sum = ZERO;
        for term in &data.terms {
            if (term.tail && !second) || (!term.tail && !first) {
                continue;
            }
            sum += term.coefficient * (z - term.at).inv().powi(term.n as i32);
        }
        if first {
            let mut power = Complex64::new(1.0, 0.0);
            let mut last = 2;
            for &(n, a) in &data.infinity {
                while last < n {
                    power *= z;
                    last += 1;
                }
                sum -= a * power;
            }
        }
        sum
    }

    /// `ω/dw` with `w = 1/z`, written so that cancellations between
    /// simple poles are resolved analytically.
    fn omega_w(&self, v: usize, w: Complex64, first: bool, second: bool) -> Complex64 {
        let data = &self.spheres[v];
        let mut sum = ZERO;
        let mut simple = ZERO;
        for term in &data.terms {
            if (term.tail && !second) || (!term.tail && !first) {
                continue;
            }
            let denom = Complex64::new(1.0, 0.0) - term.at * w;
            if term.n == 1 {
                // c/(z-p) dz = -c/w dw - c p/(1 - p w) dw
                simple += term.coefficient;
                sum -= term.coefficient * term.at / denom;
            } else {
                sum -= term.coefficient * w.powi(term.n as i32 - 2) / denom.powi(term.n as i32);
            }
        }
        if first {
            if w != ZERO {
                sum -= simple / w;
            }
            for &(n, a) in &data.infinity {
                sum += a * w.inv().powi(n as i32);
            }
        }
        sum
    }

    /// Extracts `a_1..a_m` of the principal part at `q` with `m_quad`
    /// quadrature points, over `C(q, r/2)` or `|w| = r/2` at infinity.
    pub fn extract_principal_part(
        &self,
        v: usize,
        q: PoleLocation,
        m: usize,
        m_quad: usize,
    ) -> Result<Vec<Complex64>> {
        let r = if self.parts.is_empty() {
            self.surface.rho() * self.surface.c1()
        } else {
            self.parts.radius
        };
        extract_principal_part(self, &self.singular_points(v), v, q, r, m, m_quad)
    }

    /// Finite singular points of sphere `v` (gluing points and poles).
    pub fn singular_points(&self, v: usize) -> Vec<Complex64> {
        self.spheres.get(v).map(|d| d.singular.clone()).unwrap_or_default()
    }

    /// Total residue at the finite singularities of sphere `v`.
    pub fn residue_sum(&self, v: usize) -> Complex64 {
        self.spheres[v].residue_sum
    }
}

impl SphereForm for Differential {
    fn eval(&self, v: usize, z: Complex64) -> Result<Complex64> {
        self.eval_omega(v, z)
    }

    fn eval_w(&self, v: usize, w: Complex64) -> Result<Complex64> {
        self.sphere(v)?;
        if !w.is_finite() {
            return Err(Error::Singular {
                what: "non-finite point".into(),
                z: w,
            });
        }
        if w == ZERO && !self.spheres[v].infinity.is_empty() {
            return Err(Error::Singular {
                what: "pole at infinity".into(),
                z: w,
            });
        }
        if w.norm() * self.spheres[v].switch_radius < 1.0 {
            return Ok(self.omega_w(v, w, true, true));
        }
        Ok(-self.eval_omega(v, 1.0 / w)? / (w * w))
    }
}

/// `a_n = (1/2πi) ∮ (z - q)^{n-1} ω` for `1 ≤ n ≤ m` over `C(q, r/2)`, or in
/// the chart `w = 1/z` over `|w| = r/2` when `q` is infinity. `others` lists
/// the remaining singular points of the sphere, which must stay outside.
pub fn extract_principal_part<W: SphereForm + ?Sized>(
    form: &W,
    others: &[Complex64],
    v: usize,
    q: PoleLocation,
    r: f64,
    m: usize,
    m_quad: usize,
) -> Result<Vec<Complex64>> {
    let radius = r / 2.0;
    match q {
        PoleLocation::Finite(q) => {
            for &p in others {
                let d = (p - q).norm();
                if d > 1e-14 * (1.0 + q.norm()) && d <= radius * (1.0 + 1e-9) {
                    return Err(Error::Enclosure(format!(
                        "circle C({q}, {radius}) encloses the singular point {p}"
                    )));
                }
            }
            let nodes = quadrature::circle_nodes(q, radius, m_quad);
            let values = sample(form, v, &nodes, |z| z, false)?;
            Ok((1..=m)
                .map(|n| {
                    nodes
                        .iter()
                        .zip(&values)
                        .map(|(&(z, dz), &f)| (z - q).powi(n as i32 - 1) * f * dz)
                        .sum::<Complex64>()
                        / TWO_PI_I
                })
                .collect())
        }
        PoleLocation::Infinity => {
            for &p in others {
                if p.norm() >= 1.0 / radius * (1.0 - 1e-9) {
                    return Err(Error::Enclosure(format!(
                        "circle |w| = {radius} around infinity encloses the singular point {p}"
                    )));
                }
            }
            let nodes = quadrature::circle_nodes(ZERO, radius, m_quad);
            let values = sample(form, v, &nodes, |w| w, true)?;
            Ok((1..=m)
                .map(|n| {
                    nodes
                        .iter()
                        .zip(&values)
                        .map(|(&(w, dw), &f)| w.powi(n as i32 - 1) * f * dw)
                        .sum::<Complex64>()
                        / TWO_PI_I
                })
                .collect())
        }
    }
}

fn sample<W: SphereForm + ?Sized>(
    form: &W,
    v: usize,
    nodes: &[(Complex64, Complex64)],
    point: impl Fn(Complex64) -> Complex64,
    in_w: bool,
) -> Result<Vec<Complex64>> {
    nodes
        .iter()
        .enumerate()
        .map(|(index, &(x, _))| {
            let value = if in_w { form.eval_w(v, point(x))? } else { form.eval(v, point(x))? };
            if value.is_finite() {
                Ok(value)
            } else {
                Err(Error::NonFinite { index })
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;
    use crate::poles::Pole;
    use crate::surface::{Family, SurfaceParams};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn loop_surface(minus: Complex64, plus: Complex64) -> Surface {
        let g = Graph::new(["v"], vec![("e".into(), "v".into(), "v".into())]).unwrap();
        Surface::new(
            g,
            SurfaceParams {
                points: vec![[minus, plus]],
                t: vec![ZERO],
                rho: 0.25,
                family: Family::Translation,
                c1: None,
                c2: None,
                epsilon: None,
            },
        )
        .unwrap()
    }

    #[test]
    fn omega1_instantiation() {
        let s = loop_surface(c(2.0, 0.0), c(0.0, 0.0));
        let parts = PrincipalParts::empty(s.graph(), 0.1);
        let d = Differential::omega1_only(s, vec![c(1.0, 0.0)], parts, 12).unwrap();
        let value = d.eval_omega1(0, c(1.0, 0.0)).unwrap();
        let expected = 1.0 / Complex64::new(0.0, PI);
        assert!((value - expected).norm() < 1e-15);
        assert!(matches!(d.eval_omega(0, c(2.0, 0.0)), Err(Error::Singular { .. })));
    }

    #[test]
    fn single_tail_term() {
        let g = Graph::new(["a", "b"], vec![("e".into(), "a".into(), "b".into())]).unwrap();
        let s = Surface::new(
            g,
            SurfaceParams {
                points: vec![[c(1.0, 0.0), c(0.0, 0.0)]],
                t: vec![ZERO],
                rho: 0.8,
                family: Family::Translation,
                c1: None,
                c2: None,
                epsilon: Some(0.4),
            },
        )
        .unwrap();
        let mut lambda = LambdaTable::zeros(1, 12);
        lambda.set(0, Sign::Plus, 2, c(1.0, 0.0));
        let parts = PrincipalParts::empty(s.graph(), 0.1);
        let d = Differential::new(s, vec![ZERO], parts, lambda).unwrap();
        let value = d.eval_omega2(1, c(0.1, 0.0)).unwrap();
        assert!((value - 1.0).norm() < 1e-14);
        let integral = quadrature::contour_integral(|z| d.eval_omega2(1, z), ZERO, 0.8, 256).unwrap();
        assert!(integral.norm() < 1e-12);
    }

    #[test]
    fn residue_at_infinity_vanishes_for_compatible_periods() {
        let s = loop_surface(c(-1.0, 0.0), c(1.0, 0.0));
        let parts = PrincipalParts::empty(s.graph(), 0.1);
        let d = Differential::omega1_only(s, vec![c(1.0, 0.5)], parts, 12).unwrap();
        let integral = quadrature::contour_integral(|z| d.eval_omega(0, z), ZERO, 1e3, 256).unwrap();
        assert!(integral.norm() < 1e-10);
    }

    #[test]
    fn charts_agree_near_switch() {
        let s = loop_surface(c(-1.0, 0.0), c(1.0, 0.0));
        let mut parts = PrincipalParts::empty(s.graph(), 0.2);
        parts.poles[0].push(Pole::new(PoleLocation::Infinity, vec![c(0.0, 0.0), c(-1.0, 0.0), c(0.3, 0.1)]));
        parts.poles[0].push(Pole::new(PoleLocation::Finite(c(0.0, 1.5)), vec![c(0.0, 0.0), c(0.2, 0.0)]));
        let d = Differential::omega1_only(s, vec![c(0.7, 0.0)], parts, 12).unwrap();
        for z in [c(3.0, 1.0), c(-7.0, 2.0), c(0.0, 12.0)] {
            let direct = d.omega_z(0, z, true, true);
            let via_w = -d.omega_w(0, 1.0 / z, true, true) / (z * z);
            assert!((direct - via_w).norm() < 1e-12 * (1.0 + direct.norm()), "{z}");
        }
    }

    #[test]
    fn extraction_recovers_simple_and_infinite_poles() {
        let s = loop_surface(c(-1.0, 0.0), c(1.0, 0.0));
        let mut parts = PrincipalParts::empty(s.graph(), 0.2);
        parts.poles[0].push(Pole::new(PoleLocation::Infinity, vec![c(0.0, 0.0), c(-1.0, 0.0)]));
        let d = Differential::omega1_only(s, vec![ZERO], parts, 12).unwrap();
        // ω = dz: second-order pole at infinity with a_2 = -1 in dw/w^2.
        assert!((d.eval_omega(0, c(0.3, 0.2)).unwrap() - 1.0).norm() < 1e-15);
        let a = d.extract_principal_part(0, PoleLocation::Infinity, 3, 256).unwrap();
        assert!(a[0].norm() < 1e-12);
        assert!((a[1] + 1.0).norm() < 1e-12);
        assert!(a[2].norm() < 1e-12);

        let q = c(0.0, 1.7);
        let f = |_: usize, z: Complex64| -> Result<Complex64> { Ok(1.0 / (z - q)) };
        let a = extract_principal_part(&f, &[], 0, PoleLocation::Finite(q), 0.2, 2, 128).unwrap();
        assert!((a[0] - 1.0).norm() < 1e-13 && a[1].norm() < 1e-13);
        let err = extract_principal_part(&f, &[c(0.0, 1.72)], 0, PoleLocation::Finite(q), 0.2, 2, 128);
        assert!(matches!(err, Err(Error::Enclosure(_))));
    }

    #[test]
    fn lambda_flat_round_trip() {
        let mut l = LambdaTable::zeros(3, 5);
        l.set(2, Sign::Minus, 4, c(1.0, 2.0));
        l.set(0, Sign::Plus, 2, c(-3.0, 0.0));
        let back = LambdaTable::from_flat(3, 5, &l.to_flat());
        assert_eq!(back, l);
        assert_eq!(l.edge_sups(), vec![3.0, 0.0, 5f64.sqrt()]);
    }
}
