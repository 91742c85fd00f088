//! Model spaces: weighted graphs, grid discretizations, node sets and
//! exhaustion schedules.
//!
//! A finite [`WeightedGraph`] stands in for a metric measure space: node
//! measures discretize the measure, edge conductances weight the discrete
//! p-energy, and node positions (when present) supply the metric used for
//! balls. Unboundedness is emulated: a finite graph together with an
//! [`ExhaustionSchedule`] replaces an unbounded space, and every limit
//! "as the radius grows" becomes a finite stage sequence with a stopping
//! rule applied by the callers.

use std::collections::HashSet;
use std::sync::Arc;

use crate::error::{reject, Error, Result};

/// An undirected conductance edge. Conductance has units of energy per
/// |Δu|^p and is strictly positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub conductance: f64,
}

/// Finite weighted graph with p baked in at build time (grid conductances
/// are p-dependent, so a graph is only meaningful for the exponent it was
/// built with).
///
/// Immutable after construction and safe to share across concurrent solves.
#[derive(Debug, Clone)]
pub struct WeightedGraph {
    measures: Vec<f64>,
    edges: Vec<Edge>,
    positions: Option<Vec<Vec<f64>>>,
    p: f64,
    adj_offsets: Vec<usize>,
    /// Flattened adjacency: (neighbor node, index into `edges`).
    adj: Vec<(usize, usize)>,
}

impl WeightedGraph {
    /// Validates and builds a graph. Rejects non-positive measures or
    /// conductances, self-loops, duplicate unordered pairs, out-of-range
    /// indices and disconnected graphs.
    pub fn new(
        measures: Vec<f64>,
        edge_list: Vec<(usize, usize, f64)>,
        positions: Option<Vec<Vec<f64>>>,
        p: f64,
    ) -> Result<Self> {
        let n = measures.len();
        if n == 0 {
            return reject("graph must have at least one node");
        }
        if !p.is_finite() || p <= 1.0 {
            return reject(format!("exponent p must be finite and > 1, got {p}"));
        }
        for (i, &m) in measures.iter().enumerate() {
            if !m.is_finite() || m <= 0.0 {
                return reject(format!("node measure must be positive, node {i} has {m}"));
            }
        }
        if let Some(pos) = &positions {
            if pos.len() != n {
                return reject("positions must cover every node");
            }
            let dim = pos[0].len();
            if pos.iter().any(|x| x.len() != dim) {
                return reject("all node positions must have the same dimension");
            }
        }
        let mut seen = HashSet::with_capacity(edge_list.len());
        let mut edges = Vec::with_capacity(edge_list.len());
        for &(a, b, c) in &edge_list {
            if a >= n || b >= n {
                return reject(format!("edge ({a},{b}) out of range for {n} nodes"));
            }
            if a == b {
                return reject(format!("self-loop at node {a}"));
            }
            if !c.is_finite() || c <= 0.0 {
                return reject(format!("edge ({a},{b}) has non-positive conductance {c}"));
            }
            let key = (a.min(b), a.max(b));
            if !seen.insert(key) {
                return reject(format!("duplicate edge between {} and {}", key.0, key.1));
            }
            edges.push(Edge { a, b, conductance: c });
        }

        let (adj_offsets, adj) = build_adjacency(n, &edges);
        if !is_connected(n, &adj_offsets, &adj) {
            return reject("graph is disconnected; the ambient space must be connected");
        }

        Ok(WeightedGraph {
            measures,
            edges,
            positions,
            p,
            adj_offsets,
            adj,
        })
    }

    pub fn node_count(&self) -> usize {
        self.measures.len()
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn measure(&self, i: usize) -> f64 {
        self.measures[i]
    }

    pub fn measures(&self) -> &[f64] {
        &self.measures
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn positions(&self) -> Option<&[Vec<f64>]> {
        self.positions.as_deref()
    }

    pub fn position(&self, i: usize) -> Result<&[f64]> {
        match &self.positions {
            Some(pos) => Ok(&pos[i]),
            None => reject("graph has no node positions"),
        }
    }

    /// Neighbors of `i` as (neighbor node, edge index) pairs.
    pub fn neighbors(&self, i: usize) -> &[(usize, usize)] {
        &self.adj[self.adj_offsets[i]..self.adj_offsets[i + 1]]
    }

    /// Euclidean distance between two nodes; rejects if positions are absent.
    pub fn distance(&self, i: usize, j: usize) -> Result<f64> {
        let pos = self
            .positions
            .as_ref()
            .ok_or_else(|| Error::Rejection("graph has no node positions".into()))?;
        Ok(euclid(&pos[i], &pos[j]))
    }

    pub fn total_measure(&self) -> f64 {
        self.measures.iter().sum()
    }

    /// The node closest to the given coordinates.
    pub fn nearest_node(&self, point: &[f64]) -> Result<usize> {
        let pos = self
            .positions
            .as_ref()
            .ok_or_else(|| Error::Rejection("graph has no node positions".into()))?;
        let mut best = 0usize;
        let mut best_d = f64::INFINITY;
        for (i, x) in pos.iter().enumerate() {
            let d = euclid(x, point);
            if d < best_d {
                best_d = d;
                best = i;
            }
        }
        Ok(best)
    }
}

fn build_adjacency(n: usize, edges: &[Edge]) -> (Vec<usize>, Vec<(usize, usize)>) {
    let mut degree = vec![0usize; n];
    for e in edges {
        degree[e.a] += 1;
        degree[e.b] += 1;
    }
    let mut offsets = vec![0usize; n + 1];
    for i in 0..n {
        offsets[i + 1] = offsets[i] + degree[i];
    }
    let mut adj = vec![(0usize, 0usize); offsets[n]];
    let mut cursor = offsets.clone();
    for (k, e) in edges.iter().enumerate() {
        adj[cursor[e.a]] = (e.b, k);
        cursor[e.a] += 1;
        adj[cursor[e.b]] = (e.a, k);
        cursor[e.b] += 1;
    }
    (offsets, adj)
}

fn is_connected(n: usize, offsets: &[usize], adj: &[(usize, usize)]) -> bool {
    let mut visited = vec![false; n];
    let mut stack = vec![0usize];
    visited[0] = true;
    let mut count = 1usize;
    while let Some(i) = stack.pop() {
        for &(j, _) in &adj[offsets[i]..offsets[i + 1]] {
            if !visited[j] {
                visited[j] = true;
                count += 1;
                stack.push(j);
            }
        }
    }
    count == n
}

fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Sorted, duplicate-free set of node indices.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct NodeSet {
    indices: Vec<usize>,
}

impl NodeSet {
    pub fn empty() -> Self {
        NodeSet { indices: Vec::new() }
    }

    /// Sorts and deduplicates the input.
    pub fn from_indices(mut indices: Vec<usize>) -> Self {
        indices.sort_unstable();
        indices.dedup();
        NodeSet { indices }
    }

    pub fn full(node_count: usize) -> Self {
        NodeSet {
            indices: (0..node_count).collect(),
        }
    }

    pub fn validate_for(&self, graph: &WeightedGraph) -> Result<()> {
        if let Some(&last) = self.indices.last() {
            if last >= graph.node_count() {
                return reject(format!(
                    "node index {last} out of range for {} nodes",
                    graph.node_count()
                ));
            }
        }
        Ok(())
    }

    pub fn contains(&self, i: usize) -> bool {
        self.indices.binary_search(&i).is_ok()
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.indices.iter().copied()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.indices
    }

    pub fn union(&self, other: &NodeSet) -> NodeSet {
        let mut v = self.indices.clone();
        v.extend_from_slice(&other.indices);
        NodeSet::from_indices(v)
    }

    pub fn intersection(&self, other: &NodeSet) -> NodeSet {
        let v = self
            .indices
            .iter()
            .copied()
            .filter(|&i| other.contains(i))
            .collect();
        NodeSet { indices: v }
    }

    pub fn difference(&self, other: &NodeSet) -> NodeSet {
        let v = self
            .indices
            .iter()
            .copied()
            .filter(|&i| !other.contains(i))
            .collect();
        NodeSet { indices: v }
    }

    pub fn complement(&self, node_count: usize) -> NodeSet {
        let v = (0..node_count).filter(|&i| !self.contains(i)).collect();
        NodeSet { indices: v }
    }

    pub fn is_subset_of(&self, other: &NodeSet) -> bool {
        self.indices.iter().all(|&i| other.contains(i))
    }
}

/// Connected component of `within` containing `seed`, following graph edges.
/// Returns the empty set when `seed` is not in `within`.
pub fn connected_component_within(
    graph: &WeightedGraph,
    within: &NodeSet,
    seed: usize,
) -> NodeSet {
    if !within.contains(seed) {
        return NodeSet::empty();
    }
    let mut in_comp = vec![false; graph.node_count()];
    in_comp[seed] = true;
    let mut stack = vec![seed];
    let mut out = vec![seed];
    while let Some(i) = stack.pop() {
        for &(j, _) in graph.neighbors(i) {
            if !in_comp[j] && within.contains(j) {
                in_comp[j] = true;
                out.push(j);
                stack.push(j);
            }
        }
    }
    NodeSet::from_indices(out)
}

/// Node weight profile for grids, the density w in dμ = w dx.
#[derive(Clone)]
pub enum Weight {
    Const(f64),
    Fn(Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>),
}

impl Weight {
    pub fn constant(v: f64) -> Self {
        Weight::Const(v)
    }

    pub fn of(f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Weight::Fn(Arc::new(f))
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Weight::Const(v) => *v,
            Weight::Fn(f) => f(x),
        }
    }
}

impl std::fmt::Debug for Weight {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Weight::Const(v) => write!(f, "Weight::Const({v})"),
            Weight::Fn(_) => write!(f, "Weight::Fn(..)"),
        }
    }
}

/// Radial weight profile w(ρ) for radial model spaces.
#[derive(Clone)]
pub enum RadialWeight {
    Const(f64),
    Fn(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl RadialWeight {
    pub fn constant(v: f64) -> Self {
        RadialWeight::Const(v)
    }

    pub fn of(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        RadialWeight::Fn(Arc::new(f))
    }

    pub fn eval(&self, rho: f64) -> f64 {
        match self {
            RadialWeight::Const(v) => *v,
            RadialWeight::Fn(f) => f(rho),
        }
    }
}

impl std::fmt::Debug for RadialWeight {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RadialWeight::Const(v) => write!(f, "RadialWeight::Const({v})"),
            RadialWeight::Fn(_) => write!(f, "RadialWeight::Fn(..)"),
        }
    }
}

/// Axis-aligned grid specification on index range `extent` with spacing `h`.
#[derive(Debug, Clone)]
pub struct GridSpec {
    pub dimension: usize,
    pub spacing: f64,
    /// Per-axis inclusive index range; node coordinates are index * spacing.
    pub extent: Vec<(i64, i64)>,
    pub weight: Weight,
    pub p: f64,
}

/// Builds the nearest-neighbor grid graph.
///
/// Edge conductance is the arithmetic mean of the endpoint weights times
/// h^(n-p); node measure is the node weight times h^n. This makes the
/// discrete p-energy of axis-aligned linear fields agree exactly with the
/// continuum energy (per-edge telescoping).
pub fn build_grid(spec: &GridSpec) -> Result<WeightedGraph> {
    let n = spec.dimension;
    if n == 0 {
        return reject("grid dimension must be at least 1");
    }
    if spec.extent.len() != n {
        return reject("extent must list one index range per axis");
    }
    if !spec.spacing.is_finite() || spec.spacing <= 0.0 {
        return reject("grid spacing must be positive");
    }
    if !(spec.p > 1.0) {
        return reject("exponent p must be > 1");
    }
    let mut sizes = Vec::with_capacity(n);
    for &(lo, hi) in &spec.extent {
        if lo > hi {
            return reject(format!("empty extent axis ({lo}, {hi})"));
        }
        sizes.push((hi - lo + 1) as usize);
    }
    let total: usize = sizes.iter().product();
    let h = spec.spacing;

    let mut coords = vec![vec![0.0; n]; total];
    let mut weights = vec![0.0; total];
    for (flat, c) in coords.iter_mut().enumerate() {
        let mut rem = flat;
        for ax in (0..n).rev() {
            let idx = (rem % sizes[ax]) as i64 + spec.extent[ax].0;
            rem /= sizes[ax];
            c[ax] = idx as f64 * h;
        }
        let w = spec.weight.eval(c);
        if !w.is_finite() || w <= 0.0 {
            return reject(format!("weight must be positive, got {w} at {c:?}"));
        }
        weights[flat] = w;
    }

    let hn = h.powi(n as i32);
    let cond_scale = h.powf(n as f64 - spec.p);
    let measures: Vec<f64> = weights.iter().map(|w| w * hn).collect();

    // Strides for flat indexing, last axis fastest.
    let mut strides = vec![1usize; n];
    for ax in (0..n.saturating_sub(1)).rev() {
        strides[ax] = strides[ax + 1] * sizes[ax + 1];
    }
    let mut edges = Vec::new();
    for flat in 0..total {
        let mut rem = flat;
        let mut idx = vec![0usize; n];
        for ax in (0..n).rev() {
            idx[ax] = rem % sizes[ax];
            rem /= sizes[ax];
        }
        for ax in 0..n {
            if idx[ax] + 1 < sizes[ax] {
                let other = flat + strides[ax];
                let c = 0.5 * (weights[flat] + weights[other]) * cond_scale;
                edges.push((flat, other, c));
            }
        }
    }

    WeightedGraph::new(measures, edges, Some(coords), spec.p)
}

/// Radial model of weighted R^n described by its dimension and a radial
/// weight; reduces to a one-dimensional grid for computations.
#[derive(Debug, Clone)]
pub struct RadialSpace {
    pub dimension: usize,
    pub weight: RadialWeight,
    pub p: f64,
}

impl RadialSpace {
    /// One-dimensional reduction grid on [r_inner, r_outer]: node weight
    /// ω_{n-1} ρ^{n-1} w(ρ), so the 1D p-energy matches the radial part of
    /// the n-dimensional energy.
    pub fn reduction_grid(&self, r_inner: f64, r_outer: f64, spacing: f64) -> Result<WeightedGraph> {
        if self.dimension < 2 {
            return reject("radial spaces need dimension >= 2");
        }
        if !(r_inner > 0.0) || !(r_outer > r_inner) {
            return reject("need 0 < r_inner < r_outer");
        }
        if !(spacing > 0.0) {
            return reject("spacing must be positive");
        }
        let steps_f = (r_outer - r_inner) / spacing;
        let steps = steps_f.round() as i64;
        if steps < 1 || (steps_f - steps as f64).abs() > 1e-9 * steps_f.max(1.0) {
            return reject("spacing must divide the radial interval");
        }
        let omega = crate::oracle::unit_sphere_area(self.dimension)?;
        let w = self.weight.clone();
        let offset = r_inner;
        let nm1 = (self.dimension - 1) as i32;
        let spec = GridSpec {
            dimension: 1,
            spacing,
            extent: vec![(0, steps)],
            weight: Weight::of(move |x: &[f64]| {
                let rho = x[0] + offset;
                omega * rho.powi(nm1) * w.eval(rho)
            }),
            p: self.p,
        };
        // Shift the coordinates so they carry the true radius.
        let g = build_grid(&spec)?;
        let positions = g
            .positions()
            .unwrap()
            .iter()
            .map(|x| vec![x[0] + offset])
            .collect();
        WeightedGraph::new(
            g.measures().to_vec(),
            g.edges()
                .iter()
                .map(|e| (e.a, e.b, e.conductance))
                .collect(),
            Some(positions),
            self.p,
        )
    }
}

/// Nodes strictly within (or within, when `closed`) distance `radius` of a
/// coordinate point.
pub fn nodes_within(
    graph: &WeightedGraph,
    center: &[f64],
    radius: f64,
    closed: bool,
) -> Result<NodeSet> {
    let pos = graph
        .positions()
        .ok_or_else(|| Error::Rejection("graph has no node positions".into()))?;
    let mut out = Vec::new();
    for (i, x) in pos.iter().enumerate() {
        let d = euclid(x, center);
        if (closed && d <= radius) || (!closed && d < radius) {
            out.push(i);
        }
    }
    Ok(NodeSet::from_indices(out))
}

/// Open ball around a node: all nodes at Euclidean distance < r.
/// `r = infinity` yields every node, `r = 0` the empty set.
pub fn ball_set(graph: &WeightedGraph, center: usize, r: f64) -> Result<NodeSet> {
    if r.is_infinite() && r > 0.0 {
        return Ok(NodeSet::full(graph.node_count()));
    }
    let c = graph.position(center)?.to_vec();
    nodes_within(graph, &c, r, false)
}

/// Total node measure of the open ball around `center`.
pub fn ball_measure(graph: &WeightedGraph, center: usize, r: f64) -> Result<f64> {
    let b = ball_set(graph, center, r)?;
    Ok(b.iter().map(|i| graph.measure(i)).sum())
}

/// Diagnostic doubling ratio μ(B(x,2r)) / μ(B(x,r)). Not enforced anywhere;
/// grids with bounded weights should stay near 2^n for r well inside the
/// extent.
pub fn doubling_ratio(graph: &WeightedGraph, center: usize, r: f64) -> Result<f64> {
    let small = ball_measure(graph, center, r)?;
    if small <= 0.0 {
        return reject("inner ball has no nodes");
    }
    Ok(ball_measure(graph, center, 2.0 * r)? / small)
}

/// Exhaustion schedule: base point, strictly increasing radii and the
/// stopping rule parameters used by stage-limit computations.
#[derive(Debug, Clone)]
pub struct ExhaustionSchedule {
    pub base: usize,
    pub radii: Vec<f64>,
    pub stop_tolerance: f64,
    pub max_stages: usize,
}

impl ExhaustionSchedule {
    pub fn new(base: usize, radii: Vec<f64>, stop_tolerance: f64, max_stages: usize) -> Result<Self> {
        if radii.is_empty() {
            return reject("schedule needs at least one radius");
        }
        for w in radii.windows(2) {
            if !(w[1] > w[0]) {
                return reject("schedule radii must be strictly increasing");
            }
        }
        if !(radii[0] > 0.0) {
            return reject("schedule radii must be positive");
        }
        if !(stop_tolerance > 0.0) {
            return reject("stop tolerance must be positive");
        }
        if max_stages == 0 {
            return reject("max_stages must be at least 1");
        }
        Ok(ExhaustionSchedule {
            base,
            radii,
            stop_tolerance,
            max_stages,
        })
    }

    /// A single-stage schedule covering the whole graph.
    pub fn whole_graph(base: usize) -> Self {
        ExhaustionSchedule {
            base,
            radii: vec![f64::INFINITY],
            stop_tolerance: 1e-3,
            max_stages: 1,
        }
    }

    pub fn stage_radii(&self) -> &[f64] {
        &self.radii[..self.radii.len().min(self.max_stages)]
    }
}

/// Ω ∩ B(x₀, r_j) for each scheduled radius: a nested nondecreasing
/// sequence whose union is Ω once the largest ball covers the graph.
pub fn exhaust(
    graph: &WeightedGraph,
    omega: &NodeSet,
    schedule: &ExhaustionSchedule,
) -> Result<Vec<NodeSet>> {
    omega.validate_for(graph)?;
    let mut stages = Vec::new();
    for &r in schedule.stage_radii() {
        let ball = ball_set(graph, schedule.base, r)?;
        stages.push(omega.intersection(&ball));
    }
    Ok(stages)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line_spec(h: f64, lo: i64, hi: i64, p: f64) -> GridSpec {
        GridSpec {
            dimension: 1,
            spacing: h,
            extent: vec![(lo, hi)],
            weight: Weight::constant(1.0),
            p,
        }
    }

    #[test]
    fn grid_1d_conductance_and_measure() {
        // 5 nodes, h = 0.5, w ≡ 1, p = 2: conductance 0.5^{-1} = 2, measure 0.5.
        let g = build_grid(&line_spec(0.5, 0, 4, 2.0)).unwrap();
        assert_eq!(g.node_count(), 5);
        assert_eq!(g.edges().len(), 4);
        for e in g.edges() {
            assert!((e.conductance - 2.0).abs() < 1e-15);
        }
        for i in 0..5 {
            assert!((g.measure(i) - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn grid_2d_unit_conductance_for_p_eq_n() {
        let spec = GridSpec {
            dimension: 2,
            spacing: 1.0,
            extent: vec![(0, 2), (0, 2)],
            weight: Weight::constant(1.0),
            p: 2.0,
        };
        let g = build_grid(&spec).unwrap();
        assert_eq!(g.node_count(), 9);
        assert_eq!(g.edges().len(), 12);
        for e in g.edges() {
            assert!((e.conductance - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn grid_exponential_weight_conductance() {
        // Edge (x, x+h) for w = e^x, p = 3: mean of endpoint weights times h^{-2}.
        let h = 0.25;
        let spec = GridSpec {
            dimension: 1,
            spacing: h,
            extent: vec![(0, 4)],
            weight: Weight::of(|x: &[f64]| x[0].exp()),
            p: 3.0,
        };
        let g = build_grid(&spec).unwrap();
        for e in g.edges() {
            let x = g.position(e.a).unwrap()[0].min(g.position(e.b).unwrap()[0]);
            let expect = 0.5 * (x.exp() + (x + h).exp()) * h.powi(-2);
            assert!((e.conductance - expect).abs() < 1e-12 * expect);
        }
    }

    #[test]
    fn grid_rejects_empty_extent_and_bad_weight() {
        assert!(build_grid(&line_spec(0.5, 3, 2, 2.0)).is_err());
        let spec = GridSpec {
            dimension: 1,
            spacing: 1.0,
            extent: vec![(-1, 1)],
            weight: Weight::of(|x: &[f64]| x[0]), // zero at the origin
            p: 2.0,
        };
        assert!(build_grid(&spec).is_err());
    }

    #[test]
    fn graph_rejects_duplicates_self_loops_disconnection() {
        let m = vec![1.0; 3];
        assert!(WeightedGraph::new(m.clone(), vec![(0, 0, 1.0)], None, 2.0).is_err());
        assert!(
            WeightedGraph::new(m.clone(), vec![(0, 1, 1.0), (1, 0, 2.0)], None, 2.0).is_err()
        );
        // 3 nodes, single edge: disconnected.
        assert!(WeightedGraph::new(m, vec![(0, 1, 1.0)], None, 2.0).is_err());
    }

    #[test]
    fn ball_conventions() {
        let g = build_grid(&line_spec(1.0, -2, 2, 2.0)).unwrap();
        let center = g.nearest_node(&[0.0]).unwrap();
        let b = ball_set(&g, center, 1.5).unwrap();
        let coords: Vec<f64> = b.iter().map(|i| g.position(i).unwrap()[0]).collect();
        assert_eq!(coords, vec![-1.0, 0.0, 1.0]);
        assert!(ball_set(&g, center, 0.0).unwrap().is_empty());
        assert_eq!(
            ball_set(&g, center, f64::INFINITY).unwrap().len(),
            g.node_count()
        );
        // Open convention: r = 1 excludes the nodes at distance exactly 1.
        assert_eq!(ball_set(&g, center, 1.0).unwrap().len(), 1);
    }

    #[test]
    fn ball_requires_positions() {
        let g = WeightedGraph::new(vec![1.0, 1.0], vec![(0, 1, 1.0)], None, 2.0).unwrap();
        assert!(ball_set(&g, 0, 1.0).is_err());
    }

    #[test]
    fn exhaust_is_nested_and_exhausts() {
        let g = build_grid(&line_spec(1.0, -4, 4, 2.0)).unwrap();
        let base = g.nearest_node(&[0.0]).unwrap();
        let omega = NodeSet::full(g.node_count());
        let sched = ExhaustionSchedule::new(base, vec![1.0, 2.0, 4.0, 100.0], 1e-3, 10).unwrap();
        let stages = exhaust(&g, &omega, &sched).unwrap();
        assert_eq!(stages.len(), 4);
        for w in stages.windows(2) {
            assert!(w[0].is_subset_of(&w[1]));
        }
        assert_eq!(stages.last().unwrap(), &omega);

        // Disjoint omega: all stages empty.
        let far = NodeSet::from_indices(vec![g.nearest_node(&[4.0]).unwrap()]);
        let sched2 = ExhaustionSchedule::new(base, vec![1.0, 2.0], 1e-3, 10).unwrap();
        for s in exhaust(&g, &far, &sched2).unwrap() {
            assert!(s.is_empty());
        }

        // One-sided omega.
        let right = NodeSet::from_indices(
            (0..g.node_count())
                .filter(|&i| g.position(i).unwrap()[0] > 0.0)
                .collect(),
        );
        let stages = exhaust(&g, &right, &sched2).unwrap();
        assert!(stages[0].is_subset_of(&stages[1]));
        assert!(stages[1].is_subset_of(&right));
    }

    #[test]
    fn doubling_ratio_near_power_of_two() {
        let spec = GridSpec {
            dimension: 2,
            spacing: 0.1,
            extent: vec![(-40, 40), (-40, 40)],
            weight: Weight::constant(1.0),
            p: 2.0,
        };
        let g = build_grid(&spec).unwrap();
        let c = g.nearest_node(&[0.0, 0.0]).unwrap();
        let ratio = doubling_ratio(&g, c, 1.0).unwrap();
        assert!(ratio < 4.0 * (1.0 + 3.0 * 0.1), "ratio {ratio}");
    }

    #[test]
    fn component_extraction() {
        let g = build_grid(&line_spec(1.0, -3, 3, 2.0)).unwrap();
        // Omega with a hole at the origin splits into two components.
        let origin = g.nearest_node(&[0.0]).unwrap();
        let omega = NodeSet::full(g.node_count()).difference(&NodeSet::from_indices(vec![origin]));
        let right_seed = g.nearest_node(&[1.0]).unwrap();
        let comp = connected_component_within(&g, &omega, right_seed);
        assert_eq!(comp.len(), 3);
        assert!(comp.iter().all(|i| g.position(i).unwrap()[0] > 0.0));
    }
}
