//! Capacitary potentials via exhaustion limits, superlevel-set capacity
//! identities, and normalized Green functions.
//!
//! The capacitary potential of (E, Ω) is the minimizer with u = 1 on E and
//! u = 0 off Ω; stages over E ∩ B_j, Ω ∩ B_j increase nodewise toward it,
//! and its energy is the condenser capacity. A singular function with
//! singularity x₀ is cap({x₀}, Ω)^{1/(1-p)} times the potential of {x₀};
//! Green normalization rescales a singular function so the superlevel
//! capacity identity cap({u ≥ b}, Ω) = b^{1-p} holds at the peak.

use crate::capacity::{cap_direct, extrapolate_tail, CondenserProblem, VANISHING_CAPACITY};
use crate::error::{reject, Error, Result};
use crate::model::{
    ball_set, connected_component_within, ExhaustionSchedule, NodeSet, WeightedGraph,
};
use crate::solver::{p_energy, ScalarField, SolverConfig};

/// A capacitary potential together with its exhaustion history.
#[derive(Debug, Clone)]
pub struct Potential {
    pub field: ScalarField,
    pub e: NodeSet,
    pub omega: NodeSet,
    /// p-energy of the field; equals the condenser capacity.
    pub energy: f64,
    pub stage_fields: Vec<ScalarField>,
    pub stage_energies: Vec<f64>,
}

/// Builds the capacitary potential by the increasing exhaustion
/// construction: stage j solves the condenser of E ∩ B_j in Ω ∩ B_j.
/// Stage fields must increase nodewise; a violation beyond solver
/// tolerance is an internal-consistency error.
pub fn capacitary_potential(
    graph: &WeightedGraph,
    problem: &CondenserProblem,
    schedule: &ExhaustionSchedule,
    cfg: &SolverConfig,
) -> Result<Potential> {
    let mut stage_fields: Vec<ScalarField> = Vec::new();
    let mut stage_energies: Vec<f64> = Vec::new();
    let mut prev_sets: Option<(NodeSet, NodeSet)> = None;
    for &r in schedule.stage_radii() {
        let ball = ball_set(graph, schedule.base, r)?;
        let e_j = problem.e.intersection(&ball);
        let domain = problem.omega.intersection(&ball);
        if e_j.is_empty() {
            continue;
        }
        let zeros = domain.complement(graph.node_count());
        let sets = (e_j, zeros);
        if prev_sets.as_ref() == Some(&sets) {
            continue;
        }
        let (energy, field) = cap_direct(graph, &sets.0, &sets.1, cfg, stage_fields.last())?;
        if let Some(prev) = stage_fields.last() {
            let drop = prev
                .values()
                .iter()
                .zip(field.values())
                .map(|(a, b)| a - b)
                .fold(0.0f64, f64::max);
            if drop > 1e-9 {
                return Err(Error::InternalConsistency(format!(
                    "potential stages must increase nodewise; dropped by {drop:.3e}"
                )));
            }
        }
        prev_sets = Some(sets);
        stage_fields.push(field);
        stage_energies.push(energy);
    }
    if stage_fields.is_empty() {
        return reject("no schedule stage contained any of E");
    }
    let field = stage_fields.last().unwrap().clone();
    let energy = *stage_energies.last().unwrap();
    Ok(Potential {
        field,
        e: problem.e.clone(),
        omega: problem.omega.clone(),
        energy,
        stage_fields,
        stage_energies,
    })
}

/// Superlevel set of a potential inside Ω: {u > a} (strict) or {u ≥ a}.
/// Comparisons are exact on the stored values.
pub fn superlevel(field: &ScalarField, omega: &NodeSet, a: f64, strict: bool) -> NodeSet {
    NodeSet::from_indices(
        omega
            .iter()
            .filter(|&i| {
                let v = field.get(i);
                if strict {
                    v > a
                } else {
                    v >= a
                }
            })
            .collect(),
    )
}

/// Audit of the superlevel capacity identity
/// cap(Ω^b, Ω_a) (b-a)^{p-1} = cap(E, Ω).
#[derive(Debug, Clone)]
pub struct LevelIdentityReport {
    /// cap(Ω^b, Ω_a) (b-a)^{p-1} / cap(E, Ω); 1 when the identity is exact.
    pub ratio: f64,
    pub cap_ab: f64,
    /// Sup distance between the sub-condenser potential and the truncation
    /// formula clamp((u-a)/(b-a), 0, 1).
    pub truncation_residual: f64,
    /// Whether every E node lies in the interior of Ω^b; only then is the
    /// discrete identity expected to be exact.
    pub solid: bool,
}

/// Computes cap(Ω^b, Ω_a) for the superlevel sets of a potential and
/// reports the identity ratio and the truncation-formula residual.
/// Levels aligned with attained node values give exact identities; other
/// levels carry discretization error, which the `solid` flag signals.
pub fn verify_level_identity(
    graph: &WeightedGraph,
    potential: &Potential,
    a: f64,
    b: f64,
    cfg: &SolverConfig,
) -> Result<LevelIdentityReport> {
    if !(0.0..=1.0).contains(&a) || !(0.0..=1.0).contains(&b) || a >= b {
        return reject(format!("need 0 <= a < b <= 1, got a={a}, b={b}"));
    }
    let upper = superlevel(&potential.field, &potential.omega, b, false);
    if upper.is_empty() {
        return reject("superlevel set at b is empty");
    }
    let lower_domain = superlevel(&potential.field, &potential.omega, a, true);
    let zeros = lower_domain.complement(graph.node_count());
    let (cap_ab, sub_field) = cap_direct(graph, &upper, &zeros, cfg, None)?;
    if potential.energy <= 0.0 {
        return reject("base condenser has zero capacity; the ratio is undefined");
    }
    let p = graph.p();
    let ratio = cap_ab * (b - a).powf(p - 1.0) / potential.energy;

    let mut truncation_residual = 0.0f64;
    for i in 0..graph.node_count() {
        let formula = if lower_domain.contains(i) {
            ((potential.field.get(i) - a) / (b - a)).clamp(0.0, 1.0)
        } else {
            0.0
        };
        truncation_residual = truncation_residual.max((sub_field.get(i) - formula).abs());
    }

    let solid = potential.e.iter().all(|i| {
        upper.contains(i) && graph.neighbors(i).iter().all(|&(j, _)| upper.contains(j))
    });

    Ok(LevelIdentityReport {
        ratio,
        cap_ab,
        truncation_residual,
        solid,
    })
}

/// One row of the Green level audit: cap({u ≥ b}, Ω) b^{p-1} should be 1.
#[derive(Debug, Clone, Copy)]
pub struct LevelAuditRow {
    pub b: f64,
    pub capacity: f64,
    pub product: f64,
}

/// A (possibly unnormalized) Green function on a domain.
#[derive(Debug, Clone)]
pub struct GreenFunction {
    pub field: ScalarField,
    pub x0: usize,
    /// Peak value u(x₀) = sup over Ω.
    pub peak: f64,
    /// Normalization constant applied by [`green_normalize`]; `None` for
    /// the raw singular function.
    pub alpha: Option<f64>,
    /// cap({x₀}, Ω) on the final exhaustion stage.
    pub node_capacity: f64,
    /// The connected domain the construction ran in.
    pub omega: NodeSet,
    pub level_audit: Vec<LevelAuditRow>,
}

/// Result of the singular-function construction: either the function or an
/// explicit non-existence report (the emulated parabolic whole-space case,
/// where the exhaustion capacities vanish).
#[derive(Debug, Clone)]
pub enum SingularOutcome {
    Exists(GreenFunction),
    NonExistent {
        stage_capacities: Vec<f64>,
        extrapolated: Option<f64>,
    },
}

/// Builds the singular function in Ω with singularity x₀ by exhaustion:
/// stage j takes the component of Ω ∩ B_j containing x₀, computes
/// cap({x₀}, Ω_j) and scales the stage potential by cap^{1/(1-p)}. Stage
/// peaks increase; if the capacities vanish in the limit (below 1e-10,
/// extrapolated) there is no singular function and that is reported as a
/// result, not an error.
pub fn singular_function(
    graph: &WeightedGraph,
    omega: &NodeSet,
    x0: usize,
    schedule: &ExhaustionSchedule,
    cfg: &SolverConfig,
) -> Result<SingularOutcome> {
    omega.validate_for(graph)?;
    if !omega.contains(x0) {
        return reject("the singularity must lie in Omega");
    }
    let p = graph.p();
    let singleton = NodeSet::from_indices(vec![x0]);
    let mut stage_caps: Vec<f64> = Vec::new();
    let mut last_field: Option<ScalarField> = None;
    let mut last_domain: Option<NodeSet> = None;
    let mut prev_peak = 0.0f64;
    for &r in schedule.stage_radii() {
        let ball = ball_set(graph, schedule.base, r)?;
        let stage_omega = connected_component_within(graph, &omega.intersection(&ball), x0);
        if stage_omega.is_empty() {
            continue;
        }
        if last_domain.as_ref() == Some(&stage_omega) {
            stage_caps.push(*stage_caps.last().unwrap());
            continue;
        }
        let zeros = stage_omega.complement(graph.node_count());
        let (cap_j, field) = cap_direct(graph, &singleton, &zeros, cfg, last_field.as_ref())?;
        stage_caps.push(cap_j);
        if cap_j > VANISHING_CAPACITY {
            let peak = cap_j.powf(1.0 / (1.0 - p));
            if peak < prev_peak - 1e-9 * prev_peak.max(1.0) {
                return Err(Error::InternalConsistency(format!(
                    "singular stage peaks must increase: {peak} after {prev_peak}"
                )));
            }
            prev_peak = peak;
        }
        last_field = Some(field);
        last_domain = Some(stage_omega);
    }
    if stage_caps.is_empty() {
        return reject("no schedule stage contained the singularity");
    }
    let extrapolated = extrapolate_tail(&stage_caps);
    let limit_cap = extrapolated.unwrap_or(*stage_caps.last().unwrap());
    if limit_cap < VANISHING_CAPACITY {
        return Ok(SingularOutcome::NonExistent {
            stage_capacities: stage_caps,
            extrapolated,
        });
    }
    let cap_final = *stage_caps.last().unwrap();
    let peak = cap_final.powf(1.0 / (1.0 - p));
    let field = last_field.unwrap().scaled(peak);
    Ok(SingularOutcome::Exists(GreenFunction {
        field,
        x0,
        peak,
        alpha: None,
        node_capacity: cap_final,
        omega: last_domain.unwrap(),
        level_audit: Vec::new(),
    }))
}

/// Rescales a singular function to the Green normalization: the constant c
/// in cap(Ω^b, Ω_a) = c (b-a)^{1-p} is measured at the level pair
/// (a, b) = (0, peak) and the field is multiplied by α = c^{1/(1-p)}.
/// After normalization cap({u ≥ b}, Ω) b^{p-1} = 1 at b = u(x₀) exactly,
/// and approximately at other attained levels (audited).
pub fn green_normalize(
    graph: &WeightedGraph,
    green: &GreenFunction,
    cfg: &SolverConfig,
) -> Result<GreenFunction> {
    let peak = green.peak;
    let spread = green.field.max() - green.field.min();
    if !(spread > 1e-14) {
        return reject("cannot normalize a constant field");
    }
    if !(peak > 0.0) {
        return reject("singular function must have a positive peak");
    }
    let p = graph.p();
    // Peak set {u ≥ peak} within Ω; an exact comparison is fine because the
    // peak is an attained stored value.
    let peak_set = superlevel(&green.field, &green.omega, peak, false);
    let zeros = green.omega.complement(graph.node_count());
    let (cap_peak, _) = cap_direct(graph, &peak_set, &zeros, cfg, None)?;
    if cap_peak <= 0.0 {
        return reject("peak level set has zero capacity; nothing to normalize");
    }
    let c = cap_peak * peak.powf(p - 1.0);
    let alpha = c.powf(1.0 / (1.0 - p));
    let field = green.field.scaled(alpha);
    let new_peak = alpha * peak;

    // Audit the normalization at the peak and a few attained levels.
    let mut audit = Vec::new();
    let mut levels: Vec<f64> = green
        .omega
        .iter()
        .map(|i| field.get(i))
        .filter(|v| *v > 0.0)
        .collect();
    levels.sort_by(|a, b| a.partial_cmp(b).unwrap());
    levels.dedup();
    let mut picks: Vec<f64> = vec![new_peak];
    for q in [0.25, 0.5, 0.75] {
        if !levels.is_empty() {
            let idx = ((levels.len() - 1) as f64 * q) as usize;
            picks.push(levels[idx]);
        }
    }
    picks.sort_by(|a, b| a.partial_cmp(b).unwrap());
    picks.dedup();
    for b in picks {
        let set = superlevel(&field, &green.omega, b, false);
        if set.is_empty() {
            continue;
        }
        let (cap_b, _) = cap_direct(graph, &set, &zeros, cfg, None)?;
        audit.push(LevelAuditRow {
            b,
            capacity: cap_b,
            product: cap_b * b.powf(p - 1.0),
        });
    }

    Ok(GreenFunction {
        field,
        x0: green.x0,
        peak: new_peak,
        alpha: Some(alpha * green.alpha.unwrap_or(1.0)),
        node_capacity: green.node_capacity,
        omega: green.omega.clone(),
        level_audit: audit,
    })
}

/// Energy of the Green function between levels a < b: the p-energy of
/// clamp(u, a, b). Edges inside the slab contribute fully, crossing edges
/// contribute their clipped difference, everything else vanishes. For a
/// normalized Green function this equals b - a (exactly at a = 0,
/// b = u(x₀) on any graph).
pub fn green_energy_slab(graph: &WeightedGraph, green: &GreenFunction, a: f64, b: f64) -> Result<f64> {
    if !(b > a) {
        return reject("need a < b");
    }
    if a < 0.0 || b > green.peak * (1.0 + 1e-12) {
        return reject(format!(
            "slab [{a}, {b}] must lie inside [0, peak = {}]",
            green.peak
        ));
    }
    let clamped = green.field.clamped(a, b);
    Ok(p_energy(graph, &clamped))
}
