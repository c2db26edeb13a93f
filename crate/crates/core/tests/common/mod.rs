#![allow(dead_code)]

use node_opener::graph::{Graph, PeriodVector};
use node_opener::poles::PrincipalParts;
use node_opener::surface::{Family, Surface, SurfaceParams};
use node_opener::Complex64;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn edge(id: &str, from: &str, to: &str) -> (String, String, String) {
    (id.to_string(), from.to_string(), to.to_string())
}

pub struct Instance {
    pub name: &'static str,
    pub surface: Surface,
    pub alpha: PeriodVector,
    pub parts: PrincipalParts,
    pub root: String,
}

fn translation(g: Graph, points: Vec<[Complex64; 2]>, rho: f64, scale: f64) -> Surface {
    let m = g.edge_count();
    let zero = Surface::new(
        g,
        SurfaceParams {
            points,
            t: vec![c(0.0, 0.0); m],
            rho,
            family: Family::Translation,
            c1: None,
            c2: None,
            epsilon: None,
        },
    )
    .unwrap();
    let t = zero.threshold() * scale;
    // Spread phases so that no symmetry hides sign errors.
    let ts = (0..m)
        .map(|e| Complex64::from_polar(t, 0.3 + 0.7 * e as f64))
        .collect();
    zero.with_t(ts).unwrap()
}

/// One sphere with a loop edge: a torus.
pub fn loop_graph() -> Graph {
    Graph::new(["v"], vec![edge("e", "v", "v")]).unwrap()
}

pub fn loop_torus(scale: f64) -> Instance {
    let g = loop_graph();
    let surface = translation(g, vec![[c(-1.0, 0.0), c(1.0, 0.0)]], 0.25, scale);
    let alpha = PeriodVector::from_dense(surface.graph(), &[c(1.0, 0.0)]);
    let parts = PrincipalParts::empty(surface.graph(), 0.1);
    Instance { name: "loop torus", surface, alpha, parts, root: "v".into() }
}

pub fn theta_graph() -> Graph {
    Graph::new(["a", "b"], vec![edge("e1", "a", "b"), edge("e2", "a", "b")]).unwrap()
}

pub fn theta(scale: f64) -> Instance {
    let g = theta_graph();
    let points = vec![[c(-1.0, 0.0), c(-1.0, 0.0)], [c(1.0, 0.0), c(1.0, 0.0)]];
    let surface = translation(g, points, 0.25, scale);
    let alpha = PeriodVector::from_dense(surface.graph(), &[c(1.0, 0.0), c(-1.0, 0.0)]);
    let parts = PrincipalParts::empty(surface.graph(), 0.1);
    Instance { name: "theta graph", surface, alpha, parts, root: "a".into() }
}

/// `2 × len` ladder: rails `a_i → a_{i+1}`, `b_i → b_{i+1}`, rungs `a_i → b_i`.
pub fn strip_graph(len: usize) -> Graph {
    let mut vertices = Vec::new();
    for i in 0..len {
        vertices.push(format!("a{i}"));
        vertices.push(format!("b{i}"));
    }
    let mut edges = Vec::new();
    for i in 0..len {
        edges.push(edge(&format!("r{i:02}"), &format!("a{i}"), &format!("b{i}")));
        if i + 1 < len {
            edges.push(edge(&format!("ta{i:02}"), &format!("a{i}"), &format!("a{}", i + 1)));
            edges.push(edge(&format!("tb{i:02}"), &format!("b{i}"), &format!("b{}", i + 1)));
        }
    }
    Graph::new(vertices, edges).unwrap()
}

/// Distinct points on a sphere for each edge end, from `{-1, 1, -i, i}`.
pub fn ladder_points(g: &Graph) -> Vec<[Complex64; 2]> {
    let choices = [c(-1.0, 0.0), c(1.0, 0.0), c(0.0, -1.0), c(0.0, 1.0)];
    let mut used = vec![0usize; g.vertex_count()];
    g.edges()
        .iter()
        .map(|e| {
            let a = choices[used[e.from]];
            used[e.from] += 1;
            let b = choices[used[e.to]];
            used[e.to] += 1;
            [a, b]
        })
        .collect()
}

/// Period 1 around the cycle `a0 → a1 → b1 → b0 → a0`.
pub fn strip_cycle_alpha(g: &Graph) -> PeriodVector {
    let mut dense = vec![c(0.0, 0.0); g.edge_count()];
    for (id, sign) in [("ta00", 1.0), ("r01", 1.0), ("tb00", -1.0), ("r00", -1.0)] {
        dense[g.edge(id).unwrap()] = c(sign, 0.0);
    }
    PeriodVector::from_dense(g, &dense)
}

pub fn strip_with_len(len: usize, scale: f64) -> Instance {
    let g = strip_graph(len);
    let points = ladder_points(&g);
    let surface = translation(g, points, 0.2, scale);
    let alpha = strip_cycle_alpha(surface.graph());
    let parts = PrincipalParts::empty(surface.graph(), 0.1);
    Instance { name: "strip 2x6", surface, alpha, parts, root: "a0".into() }
}

pub fn strip(scale: f64) -> Instance {
    strip_with_len(6, scale)
}

pub fn trio(scale: f64) -> Vec<Instance> {
    vec![loop_torus(scale), theta(scale), strip(scale)]
}

/// Random connected multigraph: a random tree on `n` vertices plus `extra`
/// edges (loops allowed), gluing points spread on the unit circle, random
/// `t` below `scale · threshold` and random periods on the cycle space.
pub fn random_instance(seed: u64, n: usize, extra: usize, scale: f64) -> Instance {
    use node_opener::graph::{cycle_periods, CycleSpec};
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let name = |i: usize| format!("v{i:02}");
    let mut edges = Vec::new();
    for i in 1..n {
        let parent = rng.gen_range(0..i);
        let (a, b) = if rng.gen_bool(0.5) { (parent, i) } else { (i, parent) };
        edges.push(edge(&format!("e{:02}", edges.len()), &name(a), &name(b)));
    }
    let tree_edges = edges.len();
    for _ in 0..extra {
        let a = rng.gen_range(0..n);
        let b = rng.gen_range(0..n);
        edges.push(edge(&format!("e{:02}", edges.len()), &name(a), &name(b)));
    }
    let g = Graph::new((0..n).map(name), edges).unwrap();

    let mut degree = vec![0usize; n];
    for e in g.edges() {
        degree[e.from] += 1;
        degree[e.to] += 1;
    }
    let offsets: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1.0)).collect();
    let mut used = vec![0usize; n];
    let mut point = |v: usize| {
        let k = used[v];
        used[v] += 1;
        let angle = 2.0 * std::f64::consts::PI * (k as f64 + offsets[v]) / degree[v] as f64;
        Complex64::from_polar(1.0, angle)
    };
    let points: Vec<[Complex64; 2]> = g.edges().iter().map(|e| [point(e.from), point(e.to)]).collect();
    // Points on the unit circle are at least 2 sin(π/deg) apart.
    let max_degree = degree.iter().copied().max().unwrap_or(1).max(2) as f64;
    let rho = (0.2f64).min(0.4 * (std::f64::consts::PI / max_degree).sin());
    let m = g.edge_count();
    let zero = Surface::new(
        g,
        SurfaceParams {
            points,
            t: vec![c(0.0, 0.0); m],
            rho,
            family: Family::Translation,
            c1: None,
            c2: None,
            epsilon: None,
        },
    )
    .unwrap();
    let bound = zero.threshold() * scale;
    let t = (0..m)
        .map(|_| Complex64::from_polar(bound * rng.gen_range(0.2..1.0), rng.gen_range(0.0..6.3)))
        .collect();
    let surface = zero.with_t(t).unwrap();

    let g = surface.graph();
    let mut alpha = vec![c(0.0, 0.0); m];
    for e in tree_edges..m {
        let id = format!("e{e:02}");
        let idx = g.edge(&id).unwrap();
        let edge = g.edge_at(idx);
        let mut cycle = vec![(id.clone(), 1)];
        for (step, dir) in g.shortest_path(edge.to, edge.from).unwrap() {
            cycle.push((g.edge_id(step).to_string(), dir));
        }
        let periods = cycle_periods(g, &CycleSpec(cycle)).unwrap().to_dense(g).unwrap();
        let coefficient = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        for (a, p) in alpha.iter_mut().zip(periods) {
            *a += coefficient * p;
        }
    }
    let alpha = PeriodVector::from_dense(g, &alpha);
    let parts = PrincipalParts::empty(g, 0.1);
    let root = g.vertex_id(0).to_string();
    Instance { name: "random", surface, alpha, parts, root }
}
