//! Constrained minimization of the discrete p-energy.
//!
//! One engine serves every capacity, potential and Dirichlet computation:
//! damped projected Newton on the ε-smoothed energy Σ c_e (|Δu|² + ε²)^{p/2},
//! with ε-continuation down a fixed schedule and a final polish stage at
//! ε = 0. The energy is non-smooth at Δu = 0 for p < 2 and degenerate for
//! p > 2, which is what the smoothing handles; the smoothed objective is
//! strictly convex, so the Newton direction (computed matrix-free with a
//! Jacobi-preconditioned conjugate gradient) always exists and descent is
//! guaranteed. Obstacle constraints are kept feasible by coordinate-wise
//! clipping inside the line search.
//!
//! Each solve is single-threaded and deterministic: identical inputs and
//! config produce bit-identical iterates.

use crate::error::{reject, Error, Result};
use crate::model::{NodeSet, WeightedGraph};

/// A real value per node.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    values: Vec<f64>,
}

impl ScalarField {
    pub fn from_vec(values: Vec<f64>) -> Self {
        ScalarField { values }
    }

    pub fn constant(node_count: usize, value: f64) -> Self {
        ScalarField {
            values: vec![value; node_count],
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, i: usize) -> f64 {
        self.values[i]
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Nodewise clamp into [lo, hi].
    pub fn clamped(&self, lo: f64, hi: f64) -> ScalarField {
        ScalarField {
            values: self.values.iter().map(|v| v.clamp(lo, hi)).collect(),
        }
    }

    pub fn scaled(&self, factor: f64) -> ScalarField {
        ScalarField {
            values: self.values.iter().map(|v| v * factor).collect(),
        }
    }
}

/// Partial node assignment used as Dirichlet data.
#[derive(Debug, Clone, PartialEq)]
pub struct PartialField {
    entries: Vec<Option<f64>>,
}

impl PartialField {
    pub fn new(node_count: usize) -> Self {
        PartialField {
            entries: vec![None; node_count],
        }
    }

    pub fn set(&mut self, i: usize, v: f64) {
        self.entries[i] = Some(v);
    }

    pub fn set_all(&mut self, set: &NodeSet, v: f64) {
        for i in set.iter() {
            self.entries[i] = Some(v);
        }
    }

    pub fn get(&self, i: usize) -> Option<f64> {
        self.entries[i]
    }

    pub fn entries(&self) -> &[Option<f64>] {
        &self.entries
    }

    pub fn fixed_count(&self) -> usize {
        self.entries.iter().filter(|e| e.is_some()).count()
    }
}

/// Solver configuration. The ε schedule must decrease strictly to a final
/// value ≤ 1e-12; a polish stage at ε = 0 is always appended internally.
#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub epsilons: Vec<f64>,
    pub gradient_tolerance: f64,
    pub energy_rel_tolerance: f64,
    pub max_iterations: usize,
    pub record_trace: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            epsilons: (1..=13).map(|k| 10f64.powi(-k)).collect(),
            gradient_tolerance: 1e-9,
            energy_rel_tolerance: 1e-12,
            max_iterations: 500,
            record_trace: false,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epsilons.is_empty() {
            return reject("epsilon schedule must be nonempty");
        }
        for w in self.epsilons.windows(2) {
            if !(w[1] < w[0]) {
                return reject("epsilon schedule must be strictly decreasing");
            }
        }
        if !(self.epsilons[0] > 0.0) {
            return reject("epsilons must be positive");
        }
        if *self.epsilons.last().unwrap() > 1e-12 {
            return reject("final epsilon must be at most 1e-12");
        }
        if !(self.gradient_tolerance > 0.0) || !(self.energy_rel_tolerance > 0.0) {
            return reject("tolerances must be positive");
        }
        if self.max_iterations == 0 {
            return reject("max_iterations must be positive");
        }
        Ok(())
    }
}

/// One line of the optional per-iteration trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub epsilon: f64,
    pub iteration: usize,
    pub energy: f64,
    pub residual: f64,
}

/// Result of a successful solve. `residual` is the un-smoothed first-order
/// residual (sup over free nodes of the discrete p-Laplacian, projected for
/// obstacle constraints).
#[derive(Debug, Clone)]
pub struct Solution {
    pub field: ScalarField,
    pub energy: f64,
    pub residual: f64,
    pub iterations: usize,
    pub trace: Vec<TraceRow>,
}

/// Discrete p-energy Σ_edges conductance · |u_a - u_b|^p.
pub fn p_energy(graph: &WeightedGraph, field: &ScalarField) -> f64 {
    let p = graph.p();
    let u = field.values();
    graph
        .edges()
        .iter()
        .map(|e| e.conductance * (u[e.a] - u[e.b]).abs().powf(p))
        .sum()
}

/// p-energy restricted to edges with at least one endpoint in `region`.
pub fn p_energy_within(graph: &WeightedGraph, field: &ScalarField, region: &NodeSet) -> f64 {
    let p = graph.p();
    let u = field.values();
    graph
        .edges()
        .iter()
        .filter(|e| region.contains(e.a) || region.contains(e.b))
        .map(|e| e.conductance * (u[e.a] - u[e.b]).abs().powf(p))
        .sum()
}

/// Per-node p-Laplacian residual Σ_e c_e φ_p(u_j - u_i) with
/// φ_p(d) = |d|^{p-1} sign(d); zero at a p-harmonic node.
pub fn p_laplacian_residual(graph: &WeightedGraph, field: &ScalarField) -> Vec<f64> {
    let p = graph.p();
    let u = field.values();
    let mut r = vec![0.0; graph.node_count()];
    for e in graph.edges() {
        let d = u[e.a] - u[e.b];
        let f = e.conductance * phi_p(d, p);
        r[e.a] -= f;
        r[e.b] += f;
    }
    r
}

fn phi_p(d: f64, p: f64) -> f64 {
    if d == 0.0 {
        0.0
    } else {
        d.signum() * d.abs().powf(p - 1.0)
    }
}

// Smoothed per-edge energy kernel ψ_ε(d) = (d² + ε²)^{p/2} and derivatives.
// ε = 0 reproduces the exact kernel; the second derivative is then clamped
// away from 0 and ∞ so the Newton system stays definite.
fn psi(d: f64, eps: f64, p: f64) -> f64 {
    (d * d + eps * eps).powf(0.5 * p)
}

fn psi1(d: f64, eps: f64, p: f64) -> f64 {
    if eps == 0.0 {
        p * phi_p(d, p)
    } else {
        p * d * (d * d + eps * eps).powf(0.5 * p - 1.0)
    }
}

fn psi2(d: f64, eps: f64, p: f64) -> f64 {
    let w = if eps == 0.0 {
        if d == 0.0 {
            // Kink (p < 2) or degeneracy (p > 2) at the origin.
            if p < 2.0 {
                1e18
            } else {
                1e-30
            }
        } else {
            p * (p - 1.0) * d.abs().powf(p - 2.0)
        }
    } else {
        let s = d * d + eps * eps;
        p * s.powf(0.5 * p - 2.0) * (eps * eps + (p - 1.0) * d * d)
    };
    w.clamp(1e-30, 1e18)
}

struct Problem<'a> {
    graph: &'a WeightedGraph,
    pins: Vec<Option<f64>>,
    lower: Option<Vec<f64>>,
    /// Include the Σ m_i |u_i|^p node-mass term (Sobolev-capacity objective).
    mass: bool,
}

impl Problem<'_> {
    fn objective(&self, u: &[f64], eps: f64) -> f64 {
        let p = self.graph.p();
        let mut f = 0.0;
        for e in self.graph.edges() {
            f += e.conductance * psi(u[e.a] - u[e.b], eps, p);
        }
        if self.mass {
            for (i, &m) in self.graph.measures().iter().enumerate() {
                f += m * psi(u[i], eps, p);
            }
        }
        f
    }

    /// Exact (un-smoothed) objective value reported to callers.
    fn reported_value(&self, u: &[f64]) -> f64 {
        let p = self.graph.p();
        let mut f = 0.0;
        for e in self.graph.edges() {
            f += e.conductance * (u[e.a] - u[e.b]).abs().powf(p);
        }
        if self.mass {
            for (i, &m) in self.graph.measures().iter().enumerate() {
                f += m * u[i].abs().powf(p);
            }
        }
        f
    }

    fn gradient(&self, u: &[f64], eps: f64, g: &mut [f64]) {
        let p = self.graph.p();
        g.fill(0.0);
        for e in self.graph.edges() {
            let f = e.conductance * psi1(u[e.a] - u[e.b], eps, p);
            g[e.a] += f;
            g[e.b] -= f;
        }
        if self.mass {
            for (i, &m) in self.graph.measures().iter().enumerate() {
                g[i] += m * psi1(u[i], eps, p);
            }
        }
        for (i, pin) in self.pins.iter().enumerate() {
            if pin.is_some() {
                g[i] = 0.0;
            }
        }
    }

    /// Projected gradient: at an active lower bound the downhill component
    /// into the bound is removed.
    fn project_gradient(&self, u: &[f64], g: &mut [f64], active: &mut [bool]) {
        active.fill(false);
        if let Some(lower) = &self.lower {
            for i in 0..u.len() {
                if self.pins[i].is_none() && u[i] <= lower[i] + 1e-14 && g[i] > 0.0 {
                    active[i] = true;
                    g[i] = 0.0;
                }
            }
        }
    }
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |acc, x| acc.max(x.abs()))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Jacobi-preconditioned conjugate gradient on the reduced Newton system.
/// `free` masks the unknowns; everything else is held at zero. Matrix-free:
/// the Hessian is diag + graph Laplacian with per-edge weights.
#[allow(clippy::too_many_arguments)]
fn pcg(
    graph: &WeightedGraph,
    edge_w: &[f64],
    diag: &[f64],
    free: &[bool],
    b: &[f64],
    x: &mut [f64],
    rel_tol: f64,
    max_iter: usize,
) -> bool {
    let n = b.len();
    x.fill(0.0);
    let mut r = b.to_vec();
    let norm_b = dot(&r, &r).sqrt();
    if norm_b == 0.0 {
        return true;
    }
    let tol = rel_tol * norm_b;
    let mut z = vec![0.0; n];
    for i in 0..n {
        z[i] = if free[i] { r[i] / diag[i] } else { 0.0 };
    }
    let mut d = z.clone();
    let mut rz = dot(&r, &z);
    let mut hd = vec![0.0; n];
    for _ in 0..max_iter {
        // hd = H d, restricted to free nodes.
        for i in 0..n {
            hd[i] = if free[i] { diag[i] * d[i] } else { 0.0 };
        }
        for (k, e) in graph.edges().iter().enumerate() {
            if free[e.a] && free[e.b] {
                let w = edge_w[k];
                hd[e.a] -= w * d[e.b];
                hd[e.b] -= w * d[e.a];
            }
        }
        let dhd = dot(&d, &hd);
        if dhd <= 0.0 || !dhd.is_finite() {
            return false;
        }
        let alpha = rz / dhd;
        for i in 0..n {
            if free[i] {
                x[i] += alpha * d[i];
                r[i] -= alpha * hd[i];
            }
        }
        if dot(&r, &r).sqrt() <= tol {
            return true;
        }
        for i in 0..n {
            z[i] = if free[i] { r[i] / diag[i] } else { 0.0 };
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            d[i] = if free[i] { z[i] + beta * d[i] } else { 0.0 };
        }
    }
    // Ran out of iterations: the partial solution is still a usable
    // descent direction for the damped outer loop.
    true
}

fn minimize(
    problem: &Problem<'_>,
    cfg: &SolverConfig,
    warm: Option<&ScalarField>,
) -> Result<Solution> {
    cfg.validate()?;
    let graph = problem.graph;
    let n = graph.node_count();
    let p = graph.p();

    // Initial iterate: warm start or the mean of the pinned values,
    // projected onto pins and bounds.
    let mut u = match warm {
        Some(w) => {
            if w.len() != n {
                return reject("warm start has wrong length");
            }
            w.values().to_vec()
        }
        None => {
            let pinned: Vec<f64> = problem.pins.iter().flatten().copied().collect();
            let guess = if pinned.is_empty() {
                0.0
            } else {
                pinned.iter().sum::<f64>() / pinned.len() as f64
            };
            vec![guess; n]
        }
    };
    for i in 0..n {
        if let Some(v) = problem.pins[i] {
            u[i] = v;
        } else if let Some(lower) = &problem.lower {
            u[i] = u[i].max(lower[i]);
        }
    }

    let mut trace = Vec::new();
    let mut g = vec![0.0; n];
    let mut active = vec![false; n];
    let mut free = vec![false; n];
    let mut edge_w = vec![0.0; graph.edges().len()];
    let mut diag = vec![0.0; n];
    let mut step = vec![0.0; n];
    let mut total_iterations = 0usize;

    let mut stages = cfg.epsilons.clone();
    stages.push(0.0);

    for &eps in &stages {
        let mut f_curr = problem.objective(&u, eps);
        let mut stagnation = 0usize;
        for it in 0..cfg.max_iterations {
            problem.gradient(&u, eps, &mut g);
            problem.project_gradient(&u, &mut g, &mut active);
            let res = inf_norm(&g);
            if cfg.record_trace {
                trace.push(TraceRow {
                    epsilon: eps,
                    iteration: it,
                    energy: problem.reported_value(&u),
                    residual: res,
                });
            }
            if res <= cfg.gradient_tolerance {
                break;
            }
            total_iterations += 1;

            // Assemble Hessian weights on the inactive free set.
            for i in 0..n {
                free[i] = problem.pins[i].is_none() && !active[i];
                diag[i] = 0.0;
            }
            for (k, e) in graph.edges().iter().enumerate() {
                let w = e.conductance * psi2(u[e.a] - u[e.b], eps, p);
                edge_w[k] = w;
                diag[e.a] += w;
                diag[e.b] += w;
            }
            if problem.mass {
                for (i, &m) in graph.measures().iter().enumerate() {
                    diag[i] += m * psi2(u[i], eps, p);
                }
            }
            for d in diag.iter_mut() {
                if *d <= 0.0 {
                    *d = 1e-30;
                }
            }

            let minus_g: Vec<f64> = g.iter().map(|x| -x).collect();
            let cg_iters = (4 * n + 200).min(20_000);
            let ok = pcg(graph, &edge_w, &diag, &free, &minus_g, &mut step, 1e-12, cg_iters);
            let mut descent = dot(&g, &step);
            if !ok || descent >= 0.0 || !descent.is_finite() {
                // Near-singular Hessian: preconditioned steepest descent.
                for i in 0..n {
                    step[i] = if free[i] { -g[i] / diag[i] } else { 0.0 };
                }
                descent = dot(&g, &step);
                if descent >= 0.0 {
                    break;
                }
            }

            // Backtracking line search with feasibility clipping.
            let mut theta = 1.0f64;
            let mut accepted = false;
            for _ in 0..60 {
                let mut changed = false;
                let mut pred = 0.0;
                let mut u_try = u.clone();
                for i in 0..n {
                    if free[i] || (!active[i] && problem.pins[i].is_none()) {
                        let mut v = u[i] + theta * step[i];
                        if let Some(lower) = &problem.lower {
                            if v < lower[i] {
                                v = lower[i];
                            }
                        }
                        if v != u[i] {
                            changed = true;
                        }
                        pred += g[i] * (v - u[i]);
                        u_try[i] = v;
                    }
                }
                if !changed {
                    break;
                }
                let f_try = problem.objective(&u_try, eps);
                if f_try <= f_curr + 1e-4 * pred {
                    let delta = (f_curr - f_try).abs();
                    u = u_try;
                    if delta <= cfg.energy_rel_tolerance * f_curr.abs().max(1e-300) {
                        stagnation += 1;
                    } else {
                        stagnation = 0;
                    }
                    f_curr = f_try;
                    accepted = true;
                    break;
                }
                theta *= 0.5;
            }
            if !accepted || stagnation >= 2 {
                break;
            }
            if it + 1 == cfg.max_iterations && eps == 0.0 {
                return Err(Error::NonConvergence {
                    residual: res,
                    iterations: total_iterations,
                    last: u,
                });
            }
        }
    }

    // Final audit with the exact kernel.
    problem.gradient(&u, 0.0, &mut g);
    problem.project_gradient(&u, &mut g, &mut active);
    let final_residual = inf_norm(&g);
    if final_residual > cfg.gradient_tolerance {
        return Err(Error::NonConvergence {
            residual: final_residual,
            iterations: total_iterations,
            last: u,
        });
    }

    Ok(Solution {
        energy: problem.reported_value(&u),
        field: ScalarField::from_vec(u),
        residual: final_residual,
        iterations: total_iterations,
        trace,
    })
}

/// Minimizes the p-energy over fields agreeing with `fixed` on its pinned
/// nodes. The result is p-harmonic at every free node.
pub fn solve_dirichlet(
    graph: &WeightedGraph,
    fixed: &PartialField,
    cfg: &SolverConfig,
) -> Result<Solution> {
    if fixed.entries().len() != graph.node_count() {
        return reject("fixed field has wrong length");
    }
    if fixed.fixed_count() == 0 {
        return reject("Dirichlet data must pin at least one node");
    }
    for v in fixed.entries().iter().flatten() {
        if !v.is_finite() {
            return reject("fixed values must be finite");
        }
    }
    let problem = Problem {
        graph,
        pins: fixed.entries().to_vec(),
        lower: None,
        mass: false,
    };
    minimize(&problem, cfg, None)
}

/// Warm-started pinned solve: u = 1 on `ones`, u = 0 on `zeros`, free and
/// p-harmonic elsewhere. This is the single condenser building block behind
/// every capacity stage.
pub fn solve_pinned(
    graph: &WeightedGraph,
    ones: &NodeSet,
    zeros: &NodeSet,
    cfg: &SolverConfig,
    warm: Option<&ScalarField>,
) -> Result<Solution> {
    if !ones.intersection(zeros).is_empty() {
        return reject("conflicting pins: a node is required to be both 1 and 0");
    }
    let mut pins = vec![None; graph.node_count()];
    for i in ones.iter() {
        pins[i] = Some(1.0);
    }
    for i in zeros.iter() {
        pins[i] = Some(0.0);
    }
    if ones.is_empty() && zeros.is_empty() {
        return reject("pinned solve needs at least one pinned node");
    }
    let problem = Problem {
        graph,
        pins,
        lower: None,
        mass: false,
    };
    minimize(&problem, cfg, warm)
}

/// Lower-obstacle problem: u = 0 on `zero_set`, u ≥ obstacle everywhere
/// else, p-energy minimal. Complementarity holds at the solution: where the
/// obstacle is inactive the field is p-harmonic.
pub fn solve_obstacle(
    graph: &WeightedGraph,
    obstacle: &ScalarField,
    zero_set: &NodeSet,
    cfg: &SolverConfig,
) -> Result<Solution> {
    if obstacle.len() != graph.node_count() {
        return reject("obstacle has wrong length");
    }
    if zero_set.is_empty() {
        return reject("zero set must be nonempty");
    }
    zero_set.validate_for(graph)?;
    if obstacle.values().iter().any(|v| *v > 1.0 + 1e-12) {
        return reject("obstacle must be at most 1 everywhere");
    }
    for i in zero_set.iter() {
        if obstacle.get(i) > 1e-12 {
            return reject(format!(
                "infeasible: obstacle is {} > 0 on zero-set node {i}",
                obstacle.get(i)
            ));
        }
    }
    let mut pins = vec![None; graph.node_count()];
    for i in zero_set.iter() {
        pins[i] = Some(0.0);
    }
    let problem = Problem {
        graph,
        pins,
        lower: Some(obstacle.values().to_vec()),
        mass: false,
    };
    minimize(&problem, cfg, None)
}

/// Minimizes the full Sobolev-type objective Σ m_i |u_i|^p + p-energy over
/// fields with u = 1 on `e`. Always feasible on a finite graph.
pub fn solve_sobolev(graph: &WeightedGraph, e: &NodeSet, cfg: &SolverConfig) -> Result<Solution> {
    if e.is_empty() {
        return reject("Sobolev capacity needs a nonempty set");
    }
    e.validate_for(graph)?;
    let mut pins = vec![None; graph.node_count()];
    for i in e.iter() {
        pins[i] = Some(1.0);
    }
    let problem = Problem {
        graph,
        pins,
        lower: None,
        mass: true,
    };
    minimize(&problem, cfg, None)
}

/// Central-difference check of the smoothed gradient; returns the largest
/// relative mismatch over free nodes. Test support, but kept here so the
/// kernels and the check cannot drift apart.
pub fn gradient_check(
    graph: &WeightedGraph,
    fixed: &PartialField,
    field: &ScalarField,
    eps: f64,
) -> f64 {
    let problem = Problem {
        graph,
        pins: fixed.entries().to_vec(),
        lower: None,
        mass: false,
    };
    let u = field.values().to_vec();
    let mut g = vec![0.0; u.len()];
    problem.gradient(&u, eps, &mut g);
    let h = 1e-6;
    let mut worst: f64 = 0.0;
    for i in 0..u.len() {
        if problem.pins[i].is_some() {
            continue;
        }
        let mut up = u.clone();
        let mut dn = u.clone();
        up[i] += h;
        dn[i] -= h;
        let fd = (problem.objective(&up, eps) - problem.objective(&dn, eps)) / (2.0 * h);
        let scale = g[i].abs().max(fd.abs()).max(1e-8);
        worst = worst.max((g[i] - fd).abs() / scale);
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_grid, GridSpec, Weight};

    pub(crate) fn unit_path(k: usize) -> WeightedGraph {
        let edges = (0..k - 1).map(|i| (i, i + 1, 1.0)).collect();
        let pos = (0..k).map(|i| vec![i as f64]).collect();
        WeightedGraph::new(vec![1.0; k], edges, Some(pos), 2.0).unwrap()
    }

    fn path_with_p(k: usize, p: f64) -> WeightedGraph {
        let edges = (0..k - 1).map(|i| (i, i + 1, 1.0)).collect();
        let pos = (0..k).map(|i| vec![i as f64]).collect();
        WeightedGraph::new(vec![1.0; k], edges, Some(pos), p).unwrap()
    }

    #[test]
    fn energy_of_constant_field_is_zero() {
        let g = unit_path(5);
        assert_eq!(p_energy(&g, &ScalarField::constant(5, 3.7)), 0.0);
    }

    #[test]
    fn energy_of_linear_field_on_unit_interval() {
        // u(x) = x on [0,1] with h = 1/4, w ≡ 1, p = 2: energy 1 exactly.
        let spec = GridSpec {
            dimension: 1,
            spacing: 0.25,
            extent: vec![(0, 4)],
            weight: Weight::constant(1.0),
            p: 2.0,
        };
        let g = build_grid(&spec).unwrap();
        let u = ScalarField::from_vec((0..5).map(|i| i as f64 * 0.25).collect());
        assert!((p_energy(&g, &u) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn energy_of_tent_on_path() {
        let g = unit_path(5);
        let u = ScalarField::from_vec(vec![0.0, 0.5, 1.0, 0.5, 0.0]);
        assert!((p_energy(&g, &u) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn dirichlet_linear_interpolation() {
        let g = unit_path(5);
        let mut fixed = PartialField::new(5);
        fixed.set(0, 0.0);
        fixed.set(4, 1.0);
        let sol = solve_dirichlet(&g, &fixed, &SolverConfig::default()).unwrap();
        let expect = [0.0, 0.25, 0.5, 0.75, 1.0];
        for (v, e) in sol.field.values().iter().zip(expect) {
            assert!((v - e).abs() < 1e-9, "{v} vs {e}");
        }
    }

    #[test]
    fn dirichlet_constant_data_gives_constant_field() {
        for p in [1.5, 2.0, 3.0] {
            let g = path_with_p(6, p);
            let mut fixed = PartialField::new(6);
            fixed.set(0, 0.7);
            fixed.set(5, 0.7);
            let sol = solve_dirichlet(&g, &fixed, &SolverConfig::default()).unwrap();
            for v in sol.field.values() {
                assert!((v - 0.7).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn dirichlet_p3_two_conductances() {
        // v0 -1- v1 -2- v2, p = 3, u(v0)=0, u(v2)=1: interior value 2 - sqrt(2).
        let g = WeightedGraph::new(
            vec![1.0; 3],
            vec![(0, 1, 1.0), (1, 2, 2.0)],
            None,
            3.0,
        )
        .unwrap();
        let mut fixed = PartialField::new(3);
        fixed.set(0, 0.0);
        fixed.set(2, 1.0);
        let sol = solve_dirichlet(&g, &fixed, &SolverConfig::default()).unwrap();
        let t = 2.0 - std::f64::consts::SQRT_2;
        assert!(
            (sol.field.get(1) - t).abs() < 1e-8,
            "{} vs {t}",
            sol.field.get(1)
        );
    }

    #[test]
    fn dirichlet_requires_pins() {
        let g = unit_path(3);
        let fixed = PartialField::new(3);
        assert!(solve_dirichlet(&g, &fixed, &SolverConfig::default()).is_err());
    }

    #[test]
    fn maximum_principle() {
        for p in [1.5, 2.0, 3.0] {
            let g = path_with_p(7, p);
            let mut fixed = PartialField::new(7);
            fixed.set(0, -0.3);
            fixed.set(3, 0.9);
            fixed.set(6, 0.2);
            let sol = solve_dirichlet(&g, &fixed, &SolverConfig::default()).unwrap();
            for v in sol.field.values() {
                assert!(*v >= -0.3 - 1e-9 && *v <= 0.9 + 1e-9);
            }
        }
    }

    #[test]
    fn comparison_principle() {
        for p in [1.5, 2.0, 3.0] {
            let g = path_with_p(6, p);
            let mut lo = PartialField::new(6);
            lo.set(0, 0.0);
            lo.set(5, 0.4);
            let mut hi = PartialField::new(6);
            hi.set(0, 0.1);
            hi.set(5, 0.9);
            let a = solve_dirichlet(&g, &lo, &SolverConfig::default()).unwrap();
            let b = solve_dirichlet(&g, &hi, &SolverConfig::default()).unwrap();
            for (x, y) in a.field.values().iter().zip(b.field.values()) {
                assert!(x <= &(y + 1e-8));
            }
        }
    }

    #[test]
    fn obstacle_tent() {
        let g = unit_path(5);
        let mut obstacle = ScalarField::constant(5, f64::NEG_INFINITY);
        obstacle = {
            let mut v = obstacle.values().to_vec();
            v[2] = 1.0;
            ScalarField::from_vec(v)
        };
        let zeros = NodeSet::from_indices(vec![0, 4]);
        let sol = solve_obstacle(&g, &obstacle, &zeros, &SolverConfig::default()).unwrap();
        let expect = [0.0, 0.5, 1.0, 0.5, 0.0];
        for (v, e) in sol.field.values().iter().zip(expect) {
            assert!((v - e).abs() < 1e-9);
        }
        assert!((sol.energy - 1.0).abs() < 1e-9);
    }

    #[test]
    fn obstacle_nonpositive_gives_zero_field() {
        let g = unit_path(5);
        let obstacle = ScalarField::constant(5, -0.25);
        let zeros = NodeSet::from_indices(vec![0]);
        let sol = solve_obstacle(&g, &obstacle, &zeros, &SolverConfig::default()).unwrap();
        for v in sol.field.values() {
            assert!(v.abs() < 1e-10);
        }
    }

    #[test]
    fn obstacle_infeasible_rejected() {
        let g = unit_path(3);
        let mut v = vec![0.0; 3];
        v[0] = 0.5;
        let obstacle = ScalarField::from_vec(v);
        let zeros = NodeSet::from_indices(vec![0]);
        assert!(solve_obstacle(&g, &obstacle, &zeros, &SolverConfig::default()).is_err());
    }

    #[test]
    fn obstacle_two_pins_matches_dirichlet() {
        // Obstacle 1 at two separated nodes equals the Dirichlet solve with
        // both pinned at 1.
        for p in [1.5, 2.0, 3.0] {
            let g = path_with_p(8, p);
            let mut v = vec![f64::NEG_INFINITY; 8];
            v[2] = 1.0;
            v[5] = 1.0;
            let obstacle = ScalarField::from_vec(v);
            let zeros = NodeSet::from_indices(vec![0, 7]);
            let sol = solve_obstacle(&g, &obstacle, &zeros, &SolverConfig::default()).unwrap();

            let mut fixed = PartialField::new(8);
            fixed.set(0, 0.0);
            fixed.set(7, 0.0);
            fixed.set(2, 1.0);
            fixed.set(5, 1.0);
            let dir = solve_dirichlet(&g, &fixed, &SolverConfig::default()).unwrap();
            for (a, b) in sol.field.values().iter().zip(dir.field.values()) {
                assert!((a - b).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn single_node_graph() {
        let g = WeightedGraph::new(vec![2.0], vec![], None, 2.5).unwrap();
        let mut fixed = PartialField::new(1);
        fixed.set(0, 0.8);
        let sol = solve_dirichlet(&g, &fixed, &SolverConfig::default()).unwrap();
        assert_eq!(sol.field.get(0), 0.8);
        assert_eq!(sol.energy, 0.0);
    }

    #[test]
    fn energy_optimality_under_point_perturbation() {
        for p in [1.5, 2.0, 3.0] {
            let g = path_with_p(7, p);
            let mut fixed = PartialField::new(7);
            fixed.set(0, 0.0);
            fixed.set(6, 1.0);
            let sol = solve_dirichlet(&g, &fixed, &SolverConfig::default()).unwrap();
            let base = p_energy(&g, &sol.field);
            for i in 1..6 {
                for delta in [1e-4, -1e-4] {
                    let mut v = sol.field.values().to_vec();
                    v[i] += delta;
                    let perturbed = p_energy(&g, &ScalarField::from_vec(v));
                    assert!(perturbed >= base - 1e-10);
                }
            }
        }
    }

    #[test]
    fn smoothed_gradient_matches_finite_differences() {
        for p in [1.5, 2.0, 3.0] {
            let g = path_with_p(6, p);
            let mut fixed = PartialField::new(6);
            fixed.set(0, 0.0);
            let field = ScalarField::from_vec(vec![0.0, 0.3, -0.2, 0.7, 0.1, -0.5]);
            for eps in [1e-1, 1e-4] {
                let worst = gradient_check(&g, &fixed, &field, eps);
                assert!(worst < 1e-6, "p={p} eps={eps}: mismatch {worst}");
            }
        }
    }

    #[test]
    fn truncation_energy_identity() {
        // Energy of min(u, c) equals the clipped per-edge sum: edges fully
        // above c contribute nothing, crossing edges contribute |u_i - c|^p.
        let g = path_with_p(6, 2.5);
        let u = ScalarField::from_vec(vec![0.0, 0.4, 0.9, 1.3, 0.6, 0.2]);
        let c = 0.7;
        let truncated = ScalarField::from_vec(u.values().iter().map(|v| v.min(c)).collect());
        let direct = p_energy(&g, &truncated);
        let mut clipped = 0.0;
        for e in g.edges() {
            let a = u.get(e.a).min(c);
            let b = u.get(e.b).min(c);
            clipped += e.conductance * (a - b).abs().powf(2.5);
        }
        assert!((direct - clipped).abs() < 1e-15);
    }

    #[test]
    fn determinism_bitwise() {
        let g = path_with_p(9, 2.7);
        let mut fixed = PartialField::new(9);
        fixed.set(0, 0.0);
        fixed.set(8, 1.0);
        fixed.set(4, 0.3);
        let a = solve_dirichlet(&g, &fixed, &SolverConfig::default()).unwrap();
        let b = solve_dirichlet(&g, &fixed, &SolverConfig::default()).unwrap();
        assert_eq!(a.field.values(), b.field.values());
        assert_eq!(a.energy.to_bits(), b.energy.to_bits());
    }

    #[test]
    fn trace_is_recorded_when_requested() {
        let g = path_with_p(5, 3.0);
        let mut fixed = PartialField::new(5);
        fixed.set(0, 0.0);
        fixed.set(4, 1.0);
        let cfg = SolverConfig {
            record_trace: true,
            ..SolverConfig::default()
        };
        let sol = solve_dirichlet(&g, &fixed, &cfg).unwrap();
        assert!(!sol.trace.is_empty());
        assert!(sol.trace[0].epsilon >= sol.trace.last().unwrap().epsilon);
    }
}
