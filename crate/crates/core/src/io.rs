//! JSON problem specifications and solution files.

use std::collections::BTreeMap;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::differential::{Differential, LambdaTable};
use crate::error::{Error, Result};
use crate::graph::{cycle_periods, path_periods, CycleSpec, Graph, PeriodVector, Sign};
use crate::norms::WeightSpec;
use crate::poles::{Pole, PoleLocation, PrincipalParts};
use crate::solver::SolveReport;
use crate::surface::{Family, RationalChart, Surface, SurfaceParams};

pub type Pair = [f64; 2];

fn complex(p: Pair) -> Complex64 {
    Complex64::new(p[0], p[1])
}

fn pair(z: Complex64) -> Pair {
    [z.re, z.im]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum InfTag {
    #[serde(rename = "inf")]
    Inf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeEntry {
    pub id: String,
    pub from: String,
    pub to: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphSection {
    pub vertices: Vec<String>,
    pub edges: Vec<EdgeEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EndPoints {
    pub minus: Pair,
    pub plus: Pair,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RationalSpec {
    /// Ascending coefficients.
    pub num: Vec<Pair>,
    pub den: Vec<Pair>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChartPair {
    pub minus: RationalSpec,
    pub plus: RationalSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilySpec {
    Translation,
    Moebius,
    CustomRational(BTreeMap<String, ChartPair>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceSection {
    pub rho: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    pub family: FamilySpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c2: Option<f64>,
    pub points: BTreeMap<String, EndPoints>,
    /// Every `t_e` is zero when absent.
    #[serde(default)]
    pub t: BTreeMap<String, Pair>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Exponent {
    Finite(f64),
    Infinite(InfTag),
}

impl Exponent {
    pub fn value(self) -> f64 {
        match self {
            Exponent::Finite(p) => p,
            Exponent::Infinite(_) => f64::INFINITY,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometricSpec {
    pub root: String,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SigmaSpec {
    Uniform,
    Values(BTreeMap<String, f64>),
    Geometric(GeometricSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightsSection {
    pub p: Exponent,
    #[serde(default = "uniform_sigma")]
    pub sigma: SigmaSpec,
}

fn uniform_sigma() -> SigmaSpec {
    SigmaSpec::Uniform
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathEnds {
    pub from: String,
    pub to: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CycleShorthand {
    pub cycle: Vec<(String, i32)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathShorthand {
    pub path: PathEnds,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PeriodsSection {
    Cycle(CycleShorthand),
    Path(PathShorthand),
    Values(BTreeMap<String, Pair>),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PointSpec {
    Finite(Pair),
    Infinity(InfTag),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoleEntry {
    pub at: PointSpec,
    /// `a_1, …, a_m`.
    pub coefficients: Vec<Pair>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolesSection {
    pub radius: f64,
    pub vertices: BTreeMap<String, Vec<PoleEntry>>,
}

impl PolesSection {
    pub fn from_parts(g: &Graph, parts: &PrincipalParts) -> Self {
        let vertices = parts
            .poles
            .iter()
            .enumerate()
            .filter(|(_, poles)| !poles.is_empty())
            .map(|(v, poles)| {
                let entries = poles
                    .iter()
                    .map(|p| PoleEntry {
                        at: match p.at {
                            PoleLocation::Finite(q) => PointSpec::Finite(pair(q)),
                            PoleLocation::Infinity => PointSpec::Infinity(InfTag::Inf),
                        },
                        coefficients: p.coefficients.iter().copied().map(pair).collect(),
                    })
                    .collect();
                (g.vertex_id(v).to_string(), entries)
            })
            .collect();
        PolesSection {
            radius: parts.radius,
            vertices,
        }
    }

    pub fn to_parts(&self, g: &Graph) -> Result<PrincipalParts> {
        let mut parts = PrincipalParts::empty(g, self.radius);
        for (name, entries) in &self.vertices {
            let v = g.vertex(name)?;
            parts.poles[v] = entries
                .iter()
                .map(|entry| {
                    let at = match entry.at {
                        PointSpec::Finite(q) => PoleLocation::Finite(complex(q)),
                        PointSpec::Infinity(_) => PoleLocation::Infinity,
                    };
                    Pole::new(at, entry.coefficients.iter().copied().map(complex).collect())
                })
                .collect();
        }
        parts.check_shape(g)?;
        Ok(parts)
    }
}

/// A problem: graph, surface, optional norm weights, periods and poles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecFile {
    pub graph: GraphSection,
    pub surface: SurfaceSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<WeightsSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub periods: Option<PeriodsSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub poles: Option<PolesSection>,
}

/// Everything needed to solve, built from a [`SpecFile`].
#[derive(Debug, Clone)]
pub struct Problem {
    pub surface: Surface,
    pub alpha: PeriodVector,
    pub parts: PrincipalParts,
    pub weights: Option<WeightSpec>,
}

fn with_path(path: &Path, e: std::io::Error) -> Error {
    Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
}

fn finite(values: &[f64], what: &str) -> Result<()> {
    if values.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::Schema(format!("{what} must be finite")))
    }
}

fn per_edge<T: Clone>(g: &Graph, map: &BTreeMap<String, T>, what: &str) -> Result<Vec<T>> {
    for key in map.keys() {
        g.edge(key)?;
    }
    let missing: Vec<String> = g
        .edges()
        .iter()
        .filter(|e| !map.contains_key(&e.id))
        .map(|e| e.id.clone())
        .collect();
    if !missing.is_empty() {
        return Err(Error::Schema(format!("{what} missing for edges {}", missing.join(", "))));
    }
    Ok(g.edges().iter().map(|e| map[&e.id].clone()).collect())
}

fn rational(spec: &RationalSpec) -> Result<RationalChart> {
    for p in spec.num.iter().chain(&spec.den) {
        finite(p, "chart coefficients")?;
    }
    Ok(RationalChart::new(
        spec.num.iter().copied().map(complex).collect(),
        spec.den.iter().copied().map(complex).collect(),
    ))
}

impl SpecFile {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serialisation cannot fail")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| with_path(path, e))?;
        Self::from_json(&text)
    }

    pub fn graph(&self) -> Result<Graph> {
        Graph::new(
            self.graph.vertices.iter().cloned(),
            self.graph
                .edges
                .iter()
                .map(|e| (e.id.clone(), e.from.clone(), e.to.clone())),
        )
    }

    pub fn build(&self) -> Result<Problem> {
        let g = self.graph()?;
        let sec = &self.surface;
        let points: Vec<[Complex64; 2]> = per_edge(&g, &sec.points, "surface.points")?
            .into_iter()
            .map(|p| {
                finite(&[p.minus[0], p.minus[1], p.plus[0], p.plus[1]], "gluing points")?;
                Ok([complex(p.minus), complex(p.plus)])
            })
            .collect::<Result<_>>()?;
        let t: Vec<Complex64> = if sec.t.is_empty() {
            vec![Complex64::new(0.0, 0.0); g.edge_count()]
        } else {
            per_edge(&g, &sec.t, "surface.t")?
                .into_iter()
                .map(|p| finite(&p, "t").map(|_| complex(p)))
                .collect::<Result<_>>()?
        };
        let family = match &sec.family {
            FamilySpec::Translation => Family::Translation,
            FamilySpec::Moebius => Family::Moebius,
            FamilySpec::CustomRational(charts) => Family::CustomRational(
                per_edge(&g, charts, "custom charts")?
                    .iter()
                    .map(|c| Ok([rational(&c.minus)?, rational(&c.plus)?]))
                    .collect::<Result<_>>()?,
            ),
        };
        let weights = match &self.weights {
            None => None,
            Some(w) => Some(match &w.sigma {
                SigmaSpec::Uniform => WeightSpec::uniform(&g, w.p.value())?,
                SigmaSpec::Values(map) => {
                    for key in map.keys() {
                        g.vertex(key)?;
                    }
                    let sigma = g
                        .vertices()
                        .iter()
                        .map(|v| {
                            map.get(v)
                                .copied()
                                .ok_or_else(|| Error::Schema(format!("weight missing for vertex `{v}`")))
                        })
                        .collect::<Result<_>>()?;
                    WeightSpec::new(&g, w.p.value(), sigma)?
                }
                SigmaSpec::Geometric(spec) => WeightSpec::geometric(&g, w.p.value(), g.vertex(&spec.root)?, spec.ratio)?,
            }),
        };
        let alpha = match &self.periods {
            None => PeriodVector::zeros(&g),
            Some(PeriodsSection::Cycle(c)) => cycle_periods(&g, &CycleSpec(c.cycle.clone()))?,
            Some(PeriodsSection::Path(p)) => path_periods(&g, &p.path.from, &p.path.to)?,
            Some(PeriodsSection::Values(map)) => {
                let dense: Vec<Complex64> = per_edge(&g, map, "periods")?
                    .into_iter()
                    .map(|p| finite(&p, "periods").map(|_| complex(p)))
                    .collect::<Result<_>>()?;
                PeriodVector::from_dense(&g, &dense)
            }
        };
        let surface = Surface::new(
            g.clone(),
            SurfaceParams {
                points,
                t,
                rho: sec.rho,
                family,
                c1: sec.c1,
                c2: sec.c2,
                epsilon: sec.epsilon,
            },
        )?;
        let parts = match &self.poles {
            Some(p) => p.to_parts(&g)?,
            None => PrincipalParts::empty(&g, surface.epsilon()),
        };
        surface.check_poles(&parts)?;
        Ok(Problem {
            surface,
            alpha,
            parts,
            weights,
        })
    }
}

/// One nonzero `λ_{e,n}^±`.
pub type LambdaEntry = (String, Sign, usize, f64, f64);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolutionFile {
    pub order: usize,
    pub epsilon: f64,
    pub alpha: BTreeMap<String, Pair>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub poles: Option<PolesSection>,
    pub lambda: Vec<LambdaEntry>,
    pub report: SolveReport,
}

impl SolutionFile {
    pub fn from_differential(d: &Differential, report: SolveReport) -> Self {
        let g = d.surface().graph();
        let mut lambda = Vec::new();
        for e in 0..g.edge_count() {
            for sign in Sign::BOTH {
                for n in 2..=d.order() {
                    let value = d.lambda().get(e, sign, n);
                    if value != Complex64::new(0.0, 0.0) {
                        lambda.push((g.edge_id(e).to_string(), sign, n, value.re, value.im));
                    }
                }
            }
        }
        SolutionFile {
            order: d.order(),
            epsilon: d.epsilon(),
            alpha: g
                .edges()
                .iter()
                .zip(d.alpha())
                .map(|(e, a)| (e.id.clone(), pair(*a)))
                .collect(),
            poles: (!d.parts().is_empty()).then(|| PolesSection::from_parts(g, d.parts())),
            lambda,
            report,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("solution serialisation cannot fail")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| with_path(path, e))?;
        Self::from_json(&text)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json() + "\n").map_err(|e| with_path(path, e))
    }

    /// Rebuilds the differential on the surface of `problem`, which must be
    /// the problem the solution was computed for.
    pub fn differential(&self, problem: &Problem) -> Result<Differential> {
        let s = &problem.surface;
        let g = s.graph();
        if self.epsilon != s.epsilon() {
            return Err(Error::Schema(format!(
                "solution epsilon {} differs from the spec's {}",
                self.epsilon,
                s.epsilon()
            )));
        }
        if self.order < 2 {
            return Err(Error::Schema(format!("order must be at least 2, got {}", self.order)));
        }
        let alpha: Vec<Complex64> = per_edge(g, &self.alpha, "alpha")?.into_iter().map(complex).collect();
        let parts = match &self.poles {
            Some(p) => p.to_parts(g)?,
            None => PrincipalParts::empty(g, problem.parts.radius),
        };
        let mut lambda = LambdaTable::zeros(g.edge_count(), self.order);
        for (id, sign, n, re, im) in &self.lambda {
            let e = g.edge(id)?;
            if *n < 2 || *n > self.order {
                return Err(Error::Schema(format!("tail order {n} outside 2..={}", self.order)));
            }
            finite(&[*re, *im], "lambda")?;
            lambda.set(e, *sign, *n, Complex64::new(*re, *im));
        }
        Differential::new(s.clone(), alpha, parts, lambda)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const THETA: &str = r#"{
        "graph": {"vertices": ["a", "b"], "edges": [
            {"id": "e1", "from": "a", "to": "b"},
            {"id": "e2", "from": "a", "to": "b"}]},
        "surface": {"rho": 0.25, "family": "translation",
            "points": {"e1": {"minus": [-1, 0], "plus": [-1, 0]},
                       "e2": {"minus": [1, 0], "plus": [1, 0]}},
            "t": {"e1": [0.0001, 0], "e2": [0, 0.0001]}},
        "weights": {"p": "inf", "sigma": {"geometric": {"root": "a", "ratio": 2}}},
        "periods": {"cycle": [["e1", 1], ["e2", -1]]}
    }"#;

    #[test]
    fn theta_spec_builds() {
        let spec = SpecFile::from_json(THETA).unwrap();
        let p = spec.build().unwrap();
        assert_eq!(p.surface.graph().edge_count(), 2);
        assert_eq!(p.alpha.get("e1"), Some(Complex64::new(1.0, 0.0)));
        assert_eq!(p.alpha.get("e2"), Some(Complex64::new(-1.0, 0.0)));
        assert_eq!(p.weights.unwrap().p, f64::INFINITY);
        let again = SpecFile::from_json(&spec.to_json()).unwrap();
        assert_eq!(again, spec);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let bad = THETA.replace("\"rho\"", "\"radius_typo\": 1, \"rho\"");
        assert!(matches!(SpecFile::from_json(&bad), Err(Error::Schema(_))));
    }

    #[test]
    fn missing_points_are_named() {
        let bad = THETA.replace(r#""e2": {"minus": [1, 0], "plus": [1, 0]}"#, r#""zz": {"minus": [1, 0], "plus": [1, 0]}"#);
        let err = SpecFile::from_json(&bad).unwrap().build().unwrap_err();
        assert!(err.to_string().contains("zz"), "{err}");
    }

    #[test]
    fn poles_with_infinity_parse() {
        let text = r#"{"radius": 0.1, "vertices": {"a": [{"at": "inf", "coefficients": [[0, 0], [-1, 0]]}]}}"#;
        let poles: PolesSection = serde_json::from_str(text).unwrap();
        assert_eq!(poles.vertices["a"][0].at, PointSpec::Infinity(InfTag::Inf));
        let back = serde_json::to_string(&poles).unwrap();
        assert!(back.contains("\"inf\""));
    }
}
