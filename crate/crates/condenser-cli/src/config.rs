//! Run configuration: a single TOML file with sections for the space, the
//! condenser problem, the exhaustion schedule, solver tolerances, boundary
//! data and output. The grammar is documented in the README; every parsed
//! config serializes back to an equivalent structure.

use serde::{Deserialize, Serialize};

use condenser::capacity::CondenserProblem;
use condenser::model::{
    build_grid, nodes_within, ExhaustionSchedule, GridSpec, NodeSet, RadialSpace, RadialWeight,
    Weight, WeightedGraph,
};
use condenser::solver::SolverConfig;
use condenser::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub space: SpaceConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub problem: Option<ProblemConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<ScheduleConfig>,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub green: Option<GreenConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perron: Option<PerronConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub capacity: Option<CapacitySection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SpaceConfig {
    /// Axis-aligned grid: coordinates are index * spacing.
    Grid {
        dimension: usize,
        spacing: f64,
        extent: Vec<(i64, i64)>,
        weight: WeightSpec,
        p: f64,
    },
    /// Radial reduction of weighted R^n on [r_inner, r_outer].
    Radial {
        dimension: usize,
        spacing: f64,
        r_inner: f64,
        r_outer: f64,
        weight: WeightSpec,
        p: f64,
    },
}

/// Weight profiles expressible in config files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum WeightSpec {
    Const { value: f64 },
    /// exp(rate * x_axis)
    Exp { rate: f64, #[serde(default)] axis: usize },
    /// exp(rate * max(x_axis, 0)): one-sided exponential (the weighted
    /// half-line model).
    ExpPlus { rate: f64, #[serde(default)] axis: usize },
    /// coeff * |x|^exponent
    RadialPower { coeff: f64, exponent: f64 },
}

impl WeightSpec {
    fn to_weight(&self) -> Weight {
        match *self {
            WeightSpec::Const { value } => Weight::constant(value),
            WeightSpec::Exp { rate, axis } => Weight::of(move |x: &[f64]| (rate * x[axis]).exp()),
            WeightSpec::ExpPlus { rate, axis } => {
                Weight::of(move |x: &[f64]| (rate * x[axis].max(0.0)).exp())
            }
            WeightSpec::RadialPower { coeff, exponent } => Weight::of(move |x: &[f64]| {
                let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                coeff * r.powf(exponent)
            }),
        }
    }

    fn to_radial_weight(&self) -> RadialWeight {
        match *self {
            WeightSpec::Const { value } => RadialWeight::constant(value),
            WeightSpec::Exp { rate, .. } => RadialWeight::of(move |t: f64| (rate * t).exp()),
            WeightSpec::ExpPlus { rate, .. } => {
                RadialWeight::of(move |t: f64| (rate * t.max(0.0)).exp())
            }
            WeightSpec::RadialPower { coeff, exponent } => {
                RadialWeight::of(move |t: f64| coeff * t.powf(exponent))
            }
        }
    }
}

/// Geometric or explicit node-set predicates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SetSpec {
    Indices { indices: Vec<usize> },
    Ball {
        center: Vec<f64>,
        radius: f64,
        #[serde(default)]
        closed: bool,
    },
    /// Nodes with x · normal > offset.
    HalfSpace { normal: Vec<f64>, offset: f64 },
    /// Closed annulus inner <= |x - center| <= outer.
    Annulus {
        center: Vec<f64>,
        inner: f64,
        outer: f64,
    },
    All {},
}

impl SetSpec {
    pub fn resolve(&self, graph: &WeightedGraph) -> Result<NodeSet> {
        match self {
            SetSpec::Indices { indices } => {
                let set = NodeSet::from_indices(indices.clone());
                set.validate_for(graph)?;
                Ok(set)
            }
            SetSpec::Ball {
                center,
                radius,
                closed,
            } => nodes_within(graph, center, *radius, *closed),
            SetSpec::HalfSpace { normal, offset } => {
                let mut out = Vec::new();
                for i in 0..graph.node_count() {
                    let x = graph.position(i)?;
                    let dot: f64 = x.iter().zip(normal).map(|(a, b)| a * b).sum();
                    if dot > *offset {
                        out.push(i);
                    }
                }
                Ok(NodeSet::from_indices(out))
            }
            SetSpec::Annulus {
                center,
                inner,
                outer,
            } => {
                let outer_set = nodes_within(graph, center, *outer, true)?;
                let hole = nodes_within(graph, center, *inner, false)?;
                Ok(outer_set.difference(&hole))
            }
            SetSpec::All {} => Ok(NodeSet::full(graph.node_count())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub e: SetSpec,
    pub omega: SetSpec,
    #[serde(default)]
    pub unbounded_e: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleConfig {
    /// Coordinates of the base point; the nearest node is used.
    pub base_point: Vec<f64>,
    pub radii: Vec<f64>,
    #[serde(default = "default_stop_tolerance")]
    pub stop_tolerance: f64,
    #[serde(default = "default_max_stages")]
    pub max_stages: usize,
}

fn default_stop_tolerance() -> f64 {
    1e-3
}

fn default_max_stages() -> usize {
    32
}

impl ScheduleConfig {
    pub fn resolve(&self, graph: &WeightedGraph) -> Result<ExhaustionSchedule> {
        let base = graph.nearest_node(&self.base_point)?;
        ExhaustionSchedule::new(base, self.radii.clone(), self.stop_tolerance, self.max_stages)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    #[serde(default = "default_gradient_tolerance")]
    pub gradient_tolerance: f64,
    #[serde(default = "default_energy_rel_tolerance")]
    pub energy_rel_tolerance: f64,
    #[serde(default = "default_max_iterations")]
    pub max_iterations: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilons: Option<Vec<f64>>,
    #[serde(default)]
    pub trace: bool,
}

fn default_gradient_tolerance() -> f64 {
    1e-9
}

fn default_energy_rel_tolerance() -> f64 {
    1e-12
}

fn default_max_iterations() -> usize {
    500
}

impl Default for SolverSection {
    fn default() -> Self {
        SolverSection {
            gradient_tolerance: default_gradient_tolerance(),
            energy_rel_tolerance: default_energy_rel_tolerance(),
            max_iterations: default_max_iterations(),
            epsilons: None,
            trace: false,
        }
    }
}

impl SolverSection {
    pub fn resolve(&self) -> SolverConfig {
        let mut cfg = SolverConfig {
            gradient_tolerance: self.gradient_tolerance,
            energy_rel_tolerance: self.energy_rel_tolerance,
            max_iterations: self.max_iterations,
            record_trace: self.trace,
            ..SolverConfig::default()
        };
        if let Some(eps) = &self.epsilons {
            cfg.epsilons = eps.clone();
        }
        cfg
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// Output directory; falls back to CONDENSER_OUT_DIR, then ".".
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub directory: Option<String>,
    /// Artifact formats; only "csv" is implemented.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub formats: Vec<String>,
}

impl OutputConfig {
    pub fn directory(&self) -> std::path::PathBuf {
        if let Some(d) = &self.directory {
            return d.into();
        }
        if let Ok(d) = std::env::var("CONDENSER_OUT_DIR") {
            if !d.is_empty() {
                return d.into();
            }
        }
        ".".into()
    }

    pub fn validate(&self) -> Result<()> {
        for f in &self.formats {
            if f != "csv" {
                return Err(Error::Rejection(format!("unsupported output format {f:?}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GreenConfig {
    /// Coordinates of the singularity; the nearest node is used.
    pub x0: Vec<f64>,
    pub omega: SetSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerronConfig {
    pub omega: SetSpec,
    /// Region-to-value boundary rules, applied in order.
    pub rules: Vec<BoundaryRule>,
    pub infinity: f64,
    /// "pinned" or "free" outer shell.
    pub mode: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundaryRule {
    pub region: SetSpec,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CapacitySection {
    /// "two_step" (default), "naive", "dp" or "sobolev".
    #[serde(default = "default_capacity_mode")]
    pub mode: String,
    /// Zero set F for the dp mode.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f: Option<SetSpec>,
}

fn default_capacity_mode() -> String {
    "two_step".into()
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Rejection(format!("config parse error: {e}")))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialization cannot fail")
    }

    pub fn build_graph(&self) -> Result<WeightedGraph> {
        match &self.space {
            SpaceConfig::Grid {
                dimension,
                spacing,
                extent,
                weight,
                p,
            } => build_grid(&GridSpec {
                dimension: *dimension,
                spacing: *spacing,
                extent: extent.clone(),
                weight: weight.to_weight(),
                p: *p,
            }),
            SpaceConfig::Radial {
                dimension,
                spacing,
                r_inner,
                r_outer,
                weight,
                p,
            } => RadialSpace {
                dimension: *dimension,
                weight: weight.to_radial_weight(),
                p: *p,
            }
            .reduction_grid(*r_inner, *r_outer, *spacing),
        }
    }

    pub fn build_problem(&self, graph: &WeightedGraph) -> Result<CondenserProblem> {
        let pc = self
            .problem
            .as_ref()
            .ok_or_else(|| Error::Rejection("config needs a [problem] section".into()))?;
        CondenserProblem::new(
            graph,
            pc.e.resolve(graph)?,
            pc.omega.resolve(graph)?,
            pc.unbounded_e,
        )
    }

    pub fn build_schedule(&self, graph: &WeightedGraph) -> Result<ExhaustionSchedule> {
        let sc = self
            .schedule
            .as_ref()
            .ok_or_else(|| Error::Rejection("config needs a [schedule] section".into()))?;
        sc.resolve(graph)
    }
}
