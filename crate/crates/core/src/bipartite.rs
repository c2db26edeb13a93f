//! Meromorphic functions on surfaces glued from a bipartite graph.
//!
//! When every edge runs from a vertex of `V^-` to a vertex of `V^+`, the
//! charts are `z_e^- = f_v`, `z_e^+ = f_{v'}` for rational `f_v` vanishing
//! simply at the gluing points, and every `t_e = t²`, the function equal to
//! `f_v/t` on `V^+` and `t/f_v` on `V^-` is well defined on the surface.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::surface::{Family, RationalChart, Surface, SurfaceParams};

#[derive(Debug, Clone)]
pub struct BipartiteData {
    /// `true` for vertices of `V^+`.
    pub plus_part: Vec<bool>,
    /// `f_v` per vertex.
    pub functions: Vec<RationalChart>,
}

impl BipartiteData {
    pub fn check(&self, g: &Graph) -> Result<()> {
        if self.plus_part.len() != g.vertex_count() || self.functions.len() != g.vertex_count() {
            return Err(Error::InvalidGraph(
                "bipartite data must cover every vertex".into(),
            ));
        }
        if let Some(e) = g
            .edges()
            .iter()
            .find(|e| self.plus_part[e.from] || !self.plus_part[e.to])
        {
            return Err(Error::InvalidGraph(format!(
                "edge `{}` does not run from V^- to V^+",
                e.id
            )));
        }
        Ok(())
    }
}

/// Surface with charts taken from the `f_v` and `t_e = t²` on every edge.
pub fn bipartite_surface(
    g: Graph,
    data: &BipartiteData,
    points: Vec<[Complex64; 2]>,
    t: Complex64,
    rho: f64,
) -> Result<Surface> {
    data.check(&g)?;
    let charts = g
        .edges()
        .iter()
        .map(|e| [data.functions[e.from].clone(), data.functions[e.to].clone()])
        .collect();
    let t = vec![t * t; g.edge_count()];
    Surface::new(
        g,
        SurfaceParams {
            points,
            t,
            rho,
            family: Family::CustomRational(charts),
            c1: None,
            c2: None,
            epsilon: None,
        },
    )
}

/// `f(z) = f_v(z)/t` on `V^+`, `t/f_v(z)` on `V^-`.
pub fn bipartite_function_eval(
    s: &Surface,
    data: &BipartiteData,
    t: Complex64,
    v: usize,
    z: Complex64,
) -> Result<Complex64> {
    data.check(s.graph())?;
    if t == Complex64::new(0.0, 0.0) {
        return Err(Error::Precondition("the parameter t must be nonzero".into()));
    }
    let t2 = t * t;
    if let Some(e) = s.t_values().iter().position(|&te| (te - t2).norm() > 1e-14 * t2.norm()) {
        return Err(Error::Precondition(format!(
            "t of edge `{}` is not t^2",
            s.graph().edge_id(e)
        )));
    }
    let (value, _) = data.functions[v].eval_with_derivative(z)?;
    if data.plus_part[v] {
        Ok(value / t)
    } else if value == Complex64::new(0.0, 0.0) {
        Err(Error::Singular {
            what: "pole of t/f_v".into(),
            z,
        })
    } else {
        Ok(t / value)
    }
}
