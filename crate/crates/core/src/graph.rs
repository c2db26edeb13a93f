//! Oriented multigraphs with loops and parallel edges.
//!
//! Vertex and edge ids are opaque strings. Internally both are stored in
//! ascending id order and addressed by their position in that order, so every
//! sum over vertices or edges is performed in a reproducible order.

use std::collections::{BTreeMap, VecDeque};
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poles::PrincipalParts;

/// Which end of an oriented edge: `Minus` is the starting point, `Plus` the endpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "-")]
    Minus,
    #[serde(rename = "+")]
    Plus,
}

impl Sign {
    pub const BOTH: [Sign; 2] = [Sign::Minus, Sign::Plus];

    pub fn opposite(self) -> Sign {
        match self {
            Sign::Minus => Sign::Plus,
            Sign::Plus => Sign::Minus,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Sign::Minus => 0,
            Sign::Plus => 1,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Sign::Minus => "-",
            Sign::Plus => "+",
        }
    }
}

impl std::fmt::Display for Sign {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.symbol())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub id: String,
    pub from: usize,
    pub to: usize,
}

impl Edge {
    pub fn is_loop(&self) -> bool {
        self.from == self.to
    }

    /// Vertex carrying the given end of the edge.
    pub fn vertex(&self, sign: Sign) -> usize {
        match sign {
            Sign::Minus => self.from,
            Sign::Plus => self.to,
        }
    }
}

/// One end of an edge, i.e. one gluing point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgeEnd {
    pub edge: usize,
    pub sign: Sign,
}

#[derive(Debug, Clone)]
pub struct Graph {
    vertices: Vec<String>,
    vertex_index: BTreeMap<String, usize>,
    edges: Vec<Edge>,
    edge_index: BTreeMap<String, usize>,
    starting: Vec<Vec<usize>>,
    ending: Vec<Vec<usize>>,
}

impl Graph {
    /// Builds a connected multigraph from vertex ids and `(edge id, from, to)` triples.
    pub fn new<V, E>(vertices: V, edges: E) -> Result<Self>
    where
        V: IntoIterator,
        V::Item: Into<String>,
        E: IntoIterator<Item = (String, String, String)>,
    {
        let mut vertex_index = BTreeMap::new();
        for v in vertices {
            let v = v.into();
            if vertex_index.insert(v.clone(), 0).is_some() {
                return Err(Error::InvalidGraph(format!("duplicate vertex `{v}`")));
            }
        }
        if vertex_index.is_empty() {
            return Err(Error::InvalidGraph("graph has no vertices".into()));
        }
        let vertices: Vec<String> = vertex_index.keys().cloned().collect();
        for (i, v) in vertices.iter().enumerate() {
            vertex_index.insert(v.clone(), i);
        }

        let mut raw: BTreeMap<String, (usize, usize)> = BTreeMap::new();
        for (id, from, to) in edges {
            let f = *vertex_index
                .get(&from)
                .ok_or_else(|| Error::UnknownVertex(from.clone()))?;
            let t = *vertex_index
                .get(&to)
                .ok_or_else(|| Error::UnknownVertex(to.clone()))?;
            if raw.insert(id.clone(), (f, t)).is_some() {
                return Err(Error::InvalidGraph(format!("duplicate edge `{id}`")));
            }
        }

        let mut edges = Vec::with_capacity(raw.len());
        let mut edge_index = BTreeMap::new();
        for (i, (id, (from, to))) in raw.into_iter().enumerate() {
            edge_index.insert(id.clone(), i);
            edges.push(Edge { id, from, to });
        }

        let mut starting = vec![Vec::new(); vertices.len()];
        let mut ending = vec![Vec::new(); vertices.len()];
        for (i, e) in edges.iter().enumerate() {
            starting[e.from].push(i);
            ending[e.to].push(i);
        }

        let graph = Graph {
            vertices,
            vertex_index,
            edges,
            edge_index,
            starting,
            ending,
        };
        let dist = graph.distances_from(0);
        if let Some(v) = dist.iter().position(Option::is_none) {
            return Err(Error::Disconnected {
                from: graph.vertices[0].clone(),
                to: graph.vertices[v].clone(),
            });
        }
        Ok(graph)
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge_at(&self, e: usize) -> &Edge {
        &self.edges[e]
    }

    pub fn vertex_id(&self, v: usize) -> &str {
        &self.vertices[v]
    }

    pub fn edge_id(&self, e: usize) -> &str {
        &self.edges[e].id
    }

    pub fn vertex(&self, id: &str) -> Result<usize> {
        self.vertex_index
            .get(id)
            .copied()
            .ok_or_else(|| Error::UnknownVertex(id.to_string()))
    }

    pub fn edge(&self, id: &str) -> Result<usize> {
        self.edge_index
            .get(id)
            .copied()
            .ok_or_else(|| Error::UnknownEdge(id.to_string()))
    }

    /// Edges starting at `v` for `Minus`, ending at `v` for `Plus`.
    pub fn incident(&self, v: usize, sign: Sign) -> &[usize] {
        match sign {
            Sign::Minus => &self.starting[v],
            Sign::Plus => &self.ending[v],
        }
    }

    /// Edge ids incident to `v` on the given side; a loop appears on both sides.
    pub fn incident_edges(&self, v: &str, sign: Sign) -> Result<Vec<String>> {
        let v = self.vertex(v)?;
        Ok(self
            .incident(v, sign)
            .iter()
            .map(|&e| self.edges[e].id.clone())
            .collect())
    }

    /// All gluing points lying on sphere `v`, ordered by edge then sign.
    pub fn ends_at(&self, v: usize) -> Vec<EdgeEnd> {
        let mut ends: Vec<EdgeEnd> = self.starting[v]
            .iter()
            .map(|&edge| EdgeEnd {
                edge,
                sign: Sign::Minus,
            })
            .chain(self.ending[v].iter().map(|&edge| EdgeEnd {
                edge,
                sign: Sign::Plus,
            }))
            .collect();
        ends.sort();
        ends
    }

    pub fn degree(&self, v: usize) -> usize {
        self.starting[v].len() + self.ending[v].len()
    }

    pub fn max_degree(&self) -> usize {
        (0..self.vertex_count())
            .map(|v| self.degree(v))
            .max()
            .unwrap_or(0)
    }

    /// Breadth-first distances from `root`; `None` for unreachable vertices.
    pub fn distances_from(&self, root: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.vertex_count()];
        dist[root] = Some(0);
        let mut queue = VecDeque::from([root]);
        while let Some(v) = queue.pop_front() {
            let d = dist[v].unwrap_or(0);
            for (_, w) in self.neighbours(v) {
                if dist[w].is_none() {
                    dist[w] = Some(d + 1);
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// `(edge, other endpoint)` pairs in ascending edge order.
    fn neighbours(&self, v: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        let mut out: Vec<(usize, usize)> = self.starting[v]
            .iter()
            .map(|&e| (e, self.edges[e].to))
            .chain(self.ending[v].iter().map(|&e| (e, self.edges[e].from)))
            .collect();
        out.sort();
        out.into_iter()
    }

    pub fn graph_distance(&self, v: &str, v0: &str) -> Result<usize> {
        let (a, b) = (self.vertex(v)?, self.vertex(v0)?);
        self.distances_from(b)[a].ok_or_else(|| Error::Disconnected {
            from: v0.to_string(),
            to: v.to_string(),
        })
    }

    /// Whether every edge goes from a vertex in `minus_part` to one outside it.
    pub fn is_oriented_bipartite(&self, plus_part: &[bool]) -> bool {
        self.edges.iter().all(|e| !plus_part[e.from] && plus_part[e.to])
    }

    /// Shortest path as `(edge, direction)` steps, ties broken by ascending edge index.
    pub fn shortest_path(&self, from: usize, to: usize) -> Result<Vec<(usize, i32)>> {
        let mut parent: Vec<Option<(usize, usize)>> = vec![None; self.vertex_count()];
        let mut seen = vec![false; self.vertex_count()];
        seen[from] = true;
        let mut queue = VecDeque::from([from]);
        while let Some(v) = queue.pop_front() {
            if v == to {
                break;
            }
            for (e, w) in self.neighbours(v) {
                if !seen[w] {
                    seen[w] = true;
                    parent[w] = Some((e, v));
                    queue.push_back(w);
                }
            }
        }
        if !seen[to] {
            return Err(Error::Disconnected {
                from: self.vertices[from].clone(),
                to: self.vertices[to].clone(),
            });
        }
        let mut steps = Vec::new();
        let mut cur = to;
        while cur != from {
            let (e, prev) = parent[cur].expect("visited vertex has a parent");
            let dir = if self.edges[e].from == prev { 1 } else { -1 };
            steps.push((e, dir));
            cur = prev;
        }
        steps.reverse();
        Ok(steps)
    }

    /// Per-vertex residuals of a dense edge vector in the regular case:
    /// sum over starting edges minus sum over ending edges.
    pub fn period_residuals(&self, alpha: &[Complex64]) -> Vec<Complex64> {
        (0..self.vertex_count())
            .map(|v| {
                let out: Complex64 = self.starting[v].iter().map(|&e| alpha[e]).sum();
                let inc: Complex64 = self.ending[v].iter().map(|&e| alpha[e]).sum();
                out - inc
            })
            .collect()
    }

    /// Per-vertex residuals with principal parts: sum over ending edges minus
    /// sum over starting edges plus 2πi times the total residue on the sphere.
    pub fn residue_residuals(&self, alpha: &[Complex64], parts: &PrincipalParts) -> Vec<Complex64> {
        let two_pi_i = Complex64::new(0.0, 2.0 * PI);
        self.period_residuals(alpha)
            .into_iter()
            .enumerate()
            .map(|(v, r)| -r + two_pi_i * parts.residue_sum(v))
            .collect()
    }
}

/// Prescribed periods, keyed by edge id.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PeriodVector(pub BTreeMap<String, Complex64>);

impl PeriodVector {
    pub fn zeros(g: &Graph) -> Self {
        PeriodVector(
            g.edges()
                .iter()
                .map(|e| (e.id.clone(), Complex64::new(0.0, 0.0)))
                .collect(),
        )
    }

    pub fn from_dense(g: &Graph, values: &[Complex64]) -> Self {
        PeriodVector(
            g.edges()
                .iter()
                .zip(values)
                .map(|(e, &a)| (e.id.clone(), a))
                .collect(),
        )
    }

    /// Values in graph edge order; fails on missing, unknown or non-finite entries.
    pub fn to_dense(&self, g: &Graph) -> Result<Vec<Complex64>> {
        for (id, value) in &self.0 {
            g.edge(id)?;
            if !value.is_finite() {
                return Err(Error::Precondition(format!(
                    "period for edge `{id}` is not finite"
                )));
            }
        }
        let missing: Vec<String> = g
            .edges()
            .iter()
            .filter(|e| !self.0.contains_key(&e.id))
            .map(|e| e.id.clone())
            .collect();
        if !missing.is_empty() {
            return Err(Error::MissingEdges(missing));
        }
        Ok(g.edges().iter().map(|e| self.0[&e.id]).collect())
    }

    pub fn get(&self, id: &str) -> Option<Complex64> {
        self.0.get(id).copied()
    }
}

/// A closed walk given as `(edge id, ±1)` steps.
#[derive(Debug, Clone, PartialEq)]
pub struct CycleSpec(pub Vec<(String, i32)>);

fn residual_map(g: &Graph, residuals: Vec<Complex64>) -> BTreeMap<String, Complex64> {
    g.vertices().iter().cloned().zip(residuals).collect()
}

pub fn check_period_compatibility(
    g: &Graph,
    alpha: &PeriodVector,
) -> Result<BTreeMap<String, Complex64>> {
    let dense = alpha.to_dense(g)?;
    Ok(residual_map(g, g.period_residuals(&dense)))
}

pub fn check_residue_compatibility(
    g: &Graph,
    alpha: &PeriodVector,
    parts: &PrincipalParts,
) -> Result<BTreeMap<String, Complex64>> {
    let dense = alpha.to_dense(g)?;
    parts.check_shape(g)?;
    Ok(residual_map(g, g.residue_residuals(&dense, parts)))
}

/// Signed traversal counts of a closed walk.
pub fn cycle_periods(g: &Graph, cycle: &CycleSpec) -> Result<PeriodVector> {
    let mut alpha = vec![Complex64::new(0.0, 0.0); g.edge_count()];
    let Some((first, first_dir)) = cycle.0.first() else {
        return Ok(PeriodVector::zeros(g));
    };
    let first_edge = g.edge_at(g.edge(first)?);
    let start = if *first_dir > 0 {
        first_edge.from
    } else {
        first_edge.to
    };
    let mut at = start;
    for (k, (id, dir)) in cycle.0.iter().enumerate() {
        let e = g.edge(id)?;
        let edge = g.edge_at(e);
        let (tail, head) = match dir {
            1 => (edge.from, edge.to),
            -1 => (edge.to, edge.from),
            _ => {
                return Err(Error::OpenWalk(format!(
                    "step {k} on edge `{id}` has direction {dir}, expected ±1"
                )))
            }
        };
        if tail != at {
            return Err(Error::OpenWalk(format!(
                "step {k} on edge `{id}` does not start at `{}`",
                g.vertex_id(at)
            )));
        }
        alpha[e] += Complex64::new(f64::from(*dir), 0.0);
        at = head;
    }
    if at != start {
        return Err(Error::OpenWalk(format!(
            "walk ends at `{}` instead of `{}`",
            g.vertex_id(at),
            g.vertex_id(start)
        )));
    }
    Ok(PeriodVector::from_dense(g, &alpha))
}

/// 2πi on the edges of a shortest path from `v1` to `v2`, signed by traversal.
pub fn path_periods(g: &Graph, v1: &str, v2: &str) -> Result<PeriodVector> {
    let (a, b) = (g.vertex(v1)?, g.vertex(v2)?);
    let mut alpha = vec![Complex64::new(0.0, 0.0); g.edge_count()];
    for (e, dir) in g.shortest_path(a, b)? {
        alpha[e] += Complex64::new(0.0, 2.0 * PI * f64::from(dir));
    }
    Ok(PeriodVector::from_dense(g, &alpha))
}
