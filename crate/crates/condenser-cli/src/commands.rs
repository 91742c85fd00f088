//! Subcommand implementations. Each run writes a key=value summary plus
//! CSV artifacts into the configured output directory and prints the
//! summary to stdout.

use std::path::PathBuf;

use condenser::capacity::{
    cap_dp, check_capacity_axioms, condenser_capacity, condenser_capacity_naive,
    build_warning_ring, sobolev_capacity, CapValue,
};
use condenser::model::NodeSet;
use condenser::oracle::{classify_hyperbolicity, VolumeGrowthProfile};
use condenser::perron::{
    bracket_upper_lower, boundary_nodes, hf_solution, perron_solution, BoundaryData,
    OuterShellMode,
};
use condenser::potential::{capacitary_potential, green_normalize, singular_function, SingularOutcome};
use condenser::sampling;
use condenser::solver::{p_energy, solve_dirichlet, PartialField, SolverConfig};
use condenser::{Error, Result};

use crate::config::RunConfig;
use crate::output;

fn load(config_path: &PathBuf) -> Result<RunConfig> {
    let text = std::fs::read_to_string(config_path)
        .map_err(|e| Error::Rejection(format!("cannot read config {config_path:?}: {e}")))?;
    let cfg = RunConfig::parse(&text)?;
    cfg.output.validate()?;
    Ok(cfg)
}

pub fn capacity(config_path: &PathBuf) -> Result<()> {
    let cfg = load(config_path)?;
    let graph = cfg.build_graph()?;
    let problem = cfg.build_problem(&graph)?;
    let schedule = cfg.build_schedule(&graph)?;
    let solver = cfg.solver.resolve();
    let dir = cfg.output.directory();
    let mode = cfg
        .capacity
        .as_ref()
        .map(|c| c.mode.clone())
        .unwrap_or_else(|| "two_step".into());

    match mode.as_str() {
        "two_step" => {
            let report = condenser_capacity(&graph, &problem, &schedule, &solver)?;
            let summary = output::summary(&[
                ("cap", format!("{}", report.value)),
                ("converged", report.converged.to_string()),
                ("stopping_reason", report.stopping_reason.to_string()),
                ("stages", report.stage_values.len().to_string()),
                (
                    "extrapolated",
                    report
                        .extrapolated
                        .map(output::fmt_g17)
                        .unwrap_or_else(|| "none".into()),
                ),
                ("p", output::fmt_g17(graph.p())),
            ]);
            print!("{summary}");
            output::write_file(&dir, "summary.txt", &summary)?;
            output::write_file(
                &dir,
                "stages.csv",
                &output::stages_csv(&report.stage_radii, &report.stage_values),
            )?;
            output::write_file(
                &dir,
                "potential.csv",
                &output::field_csv(&graph, &report.potential),
            )?;
        }
        "naive" => {
            let report = condenser_capacity_naive(&graph, &problem, &schedule, &solver)?;
            let summary = output::summary(&[
                ("cap", format!("{}", report.value)),
                ("mode", "naive".into()),
                ("mass_stages", report.mass_stages.len().to_string()),
                ("p", output::fmt_g17(graph.p())),
            ]);
            print!("{summary}");
            output::write_file(&dir, "summary.txt", &summary)?;
            let radii: Vec<f64> = schedule.stage_radii()[..report.mass_stages.len().min(schedule.stage_radii().len())].to_vec();
            output::write_file(
                &dir,
                "stages.csv",
                &output::stages_csv(&radii, &report.mass_stages),
            )?;
            if let Some(f) = &report.potential {
                output::write_file(&dir, "potential.csv", &output::field_csv(&graph, f))?;
            }
        }
        "dp" => {
            let f_spec = cfg
                .capacity
                .as_ref()
                .and_then(|c| c.f.as_ref())
                .ok_or_else(|| Error::Rejection("dp mode needs capacity.f".into()))?;
            let f_set = f_spec.resolve(&graph)?;
            let (value, field) = cap_dp(&graph, &problem.e, &f_set, &solver)?;
            let summary = output::summary(&[
                ("cap_dp", output::fmt_g17(value)),
                ("mode", "dp".into()),
                ("p", output::fmt_g17(graph.p())),
            ]);
            print!("{summary}");
            output::write_file(&dir, "summary.txt", &summary)?;
            output::write_file(&dir, "potential.csv", &output::field_csv(&graph, &field))?;
        }
        "sobolev" => {
            let (value, field) = sobolev_capacity(&graph, &problem.e, &solver)?;
            let summary = output::summary(&[
                ("sobolev_cap", output::fmt_g17(value)),
                ("mode", "sobolev".into()),
                ("p", output::fmt_g17(graph.p())),
            ]);
            print!("{summary}");
            output::write_file(&dir, "summary.txt", &summary)?;
            output::write_file(&dir, "potential.csv", &output::field_csv(&graph, &field))?;
        }
        other => return Err(Error::Rejection(format!("unknown capacity mode {other:?}"))),
    }
    Ok(())
}

pub fn potential(config_path: &PathBuf) -> Result<()> {
    let cfg = load(config_path)?;
    let graph = cfg.build_graph()?;
    let problem = cfg.build_problem(&graph)?;
    let schedule = cfg.build_schedule(&graph)?;
    let solver = cfg.solver.resolve();
    let dir = cfg.output.directory();
    let pot = capacitary_potential(&graph, &problem, &schedule, &solver)?;
    let summary = output::summary(&[
        ("energy", output::fmt_g17(pot.energy)),
        ("stages", pot.stage_fields.len().to_string()),
        ("p", output::fmt_g17(graph.p())),
    ]);
    print!("{summary}");
    output::write_file(&dir, "summary.txt", &summary)?;
    output::write_file(&dir, "potential.csv", &output::field_csv(&graph, &pot.field))?;
    let radii: Vec<f64> = (0..pot.stage_energies.len()).map(|j| j as f64).collect();
    output::write_file(
        &dir,
        "stages.csv",
        &output::stages_csv(&radii, &pot.stage_energies),
    )?;
    Ok(())
}

pub fn green(config_path: &PathBuf) -> Result<()> {
    let cfg = load(config_path)?;
    let graph = cfg.build_graph()?;
    let gc = cfg
        .green
        .as_ref()
        .ok_or_else(|| Error::Rejection("config needs a [green] section".into()))?;
    let schedule = cfg.build_schedule(&graph)?;
    let solver = cfg.solver.resolve();
    let dir = cfg.output.directory();
    let x0 = graph.nearest_node(&gc.x0)?;
    let omega = gc.omega.resolve(&graph)?;
    match singular_function(&graph, &omega, x0, &schedule, &solver)? {
        SingularOutcome::NonExistent {
            stage_capacities,
            extrapolated,
        } => {
            let summary = output::summary(&[
                ("exists", "false".into()),
                ("reason", "vanishing exhaustion capacity".into()),
                (
                    "extrapolated_cap",
                    extrapolated
                        .map(output::fmt_g17)
                        .unwrap_or_else(|| "none".into()),
                ),
                ("p", output::fmt_g17(graph.p())),
            ]);
            print!("{summary}");
            output::write_file(&dir, "summary.txt", &summary)?;
            let radii: Vec<f64> = (0..stage_capacities.len()).map(|j| j as f64).collect();
            output::write_file(
                &dir,
                "stages.csv",
                &output::stages_csv(&radii, &stage_capacities),
            )?;
        }
        SingularOutcome::Exists(raw) => {
            let green = green_normalize(&graph, &raw, &solver)?;
            let summary = output::summary(&[
                ("exists", "true".into()),
                ("x0", green.x0.to_string()),
                ("peak", output::fmt_g17(green.peak)),
                ("alpha", output::fmt_g17(green.alpha.unwrap_or(1.0))),
                ("cap_x0", output::fmt_g17(green.node_capacity)),
                ("p", output::fmt_g17(graph.p())),
            ]);
            print!("{summary}");
            output::write_file(&dir, "summary.txt", &summary)?;
            output::write_file(&dir, "green.csv", &output::field_csv(&graph, &green.field))?;
            let rows: Vec<Vec<String>> = green
                .level_audit
                .iter()
                .map(|row| {
                    vec![
                        output::fmt_g17(row.b),
                        output::fmt_g17(row.capacity),
                        output::fmt_g17(row.product),
                    ]
                })
                .collect();
            output::write_file(
                &dir,
                "green_levels.csv",
                &output::csv(&["b", "cap", "rho"], &rows),
            )?;
            output::write_file(
                &dir,
                "green_profile.csv",
                &output::radial_profile_csv(&graph, &green.field, green.x0, profile_bin(&graph))?,
            )?;
        }
    }
    Ok(())
}

fn profile_bin(graph: &condenser::WeightedGraph) -> f64 {
    // Bin by the smallest inter-node spacing along the first edge, if any.
    graph
        .edges()
        .first()
        .and_then(|e| graph.distance(e.a, e.b).ok())
        .unwrap_or(1.0)
}

pub fn perron(config_path: &PathBuf) -> Result<()> {
    let cfg = load(config_path)?;
    let graph = cfg.build_graph()?;
    let pc = cfg
        .perron
        .as_ref()
        .ok_or_else(|| Error::Rejection("config needs a [perron] section".into()))?;
    let solver = cfg.solver.resolve();
    let dir = cfg.output.directory();
    let omega = pc.omega.resolve(&graph)?;
    let mode = match pc.mode.as_str() {
        "pinned" => OuterShellMode::Pinned,
        "free" => OuterShellMode::Free,
        other => return Err(Error::Rejection(format!("unknown perron mode {other:?}"))),
    };
    // Boundary rules applied in order over the finite boundary nodes.
    let boundary = boundary_nodes(&graph, &omega);
    let mut finite = Vec::new();
    for i in boundary.iter() {
        let mut value = None;
        for rule in &pc.rules {
            if rule.region.resolve(&graph)?.contains(i) {
                value = Some(rule.value);
                break;
            }
        }
        match value {
            Some(v) => finite.push((i, v)),
            None => {
                return Err(Error::Rejection(format!(
                    "boundary node {i} is not covered by any rule"
                )))
            }
        }
    }
    let data = BoundaryData {
        finite,
        at_infinity: pc.infinity,
        mode,
    };
    let field = match mode {
        OuterShellMode::Pinned => {
            let schedule = cfg.build_schedule(&graph)?;
            let report = perron_solution(&graph, &omega, &data, &schedule, &solver)?;
            let (lower, upper, width) =
                bracket_upper_lower(&graph, &omega, &data, &schedule, &solver)?;
            output::write_file(&dir, "bracket_lower.csv", &output::field_csv(&graph, &lower))?;
            output::write_file(&dir, "bracket_upper.csv", &output::field_csv(&graph, &upper))?;
            let summary = output::summary(&[
                ("mode", "pinned".into()),
                ("converged", report.converged.to_string()),
                ("bracket_width", output::fmt_g17(width)),
                ("p", output::fmt_g17(graph.p())),
            ]);
            print!("{summary}");
            output::write_file(&dir, "summary.txt", &summary)?;
            report.field
        }
        OuterShellMode::Free => {
            let field = hf_solution(&graph, &omega, &data, &solver)?;
            let summary = output::summary(&[
                ("mode", "free".into()),
                ("energy", output::fmt_g17(p_energy(&graph, &field))),
                ("p", output::fmt_g17(graph.p())),
            ]);
            print!("{summary}");
            output::write_file(&dir, "summary.txt", &summary)?;
            field
        }
    };
    output::write_file(&dir, "field.csv", &output::field_csv(&graph, &field))?;
    if graph.positions().is_some() {
        let base = cfg
            .schedule
            .as_ref()
            .map(|s| graph.nearest_node(&s.base_point))
            .transpose()?
            .unwrap_or(0);
        output::write_file(
            &dir,
            "radial_profile.csv",
            &output::radial_profile_csv(&graph, &field, base, profile_bin(&graph))?,
        )?;
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct ClassifyArgs {
    pub profile: String,
    pub n: Option<usize>,
    pub p: f64,
    pub c: Option<f64>,
    pub q: Option<f64>,
    pub file: Option<PathBuf>,
    pub out: Option<PathBuf>,
}

pub fn classify(args: &ClassifyArgs) -> Result<()> {
    let profile = match args.profile.as_str() {
        "rn" => {
            let n = args
                .n
                .ok_or_else(|| Error::Rejection("profile rn needs --n".into()))?;
            VolumeGrowthProfile::lebesgue(n)?
        }
        "powerlaw" => VolumeGrowthProfile::PowerLaw {
            c: args
                .c
                .ok_or_else(|| Error::Rejection("profile powerlaw needs --c".into()))?,
            q: args
                .q
                .ok_or_else(|| Error::Rejection("profile powerlaw needs --q".into()))?,
        },
        "csv" => {
            let path = args
                .file
                .as_ref()
                .ok_or_else(|| Error::Rejection("profile csv needs --file".into()))?;
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Rejection(format!("cannot read profile: {e}")))?;
            let mut samples = Vec::new();
            for (ln, line) in text.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') || ln == 0 && line.contains("rho") {
                    continue;
                }
                let mut parts = line.split(',');
                let rho: f64 = parts
                    .next()
                    .and_then(|s| s.trim().parse().ok())
                    .ok_or_else(|| Error::Rejection(format!("bad profile line {}", ln + 1)))?;
                let mu: f64 = parts
                    .next()
                    .and_then(|s| s.trim().parse().ok())
                    .ok_or_else(|| Error::Rejection(format!("bad profile line {}", ln + 1)))?;
                samples.push((rho, mu));
            }
            VolumeGrowthProfile::Tabulated(samples)
        }
        other => return Err(Error::Rejection(format!("unknown profile kind {other:?}"))),
    };
    let out = classify_hyperbolicity(&profile, args.p)?;
    let mut pairs = vec![
        ("verdict", out.verdict.to_string()),
        ("p", output::fmt_g17(args.p)),
    ];
    if let Some((cap_p, value)) = out.integral_estimate {
        pairs.push(("integral_to", output::fmt_g17(cap_p)));
        pairs.push(("integral_value", output::fmt_g17(value)));
    }
    if let Some(q) = out.growth_exponent {
        pairs.push(("growth_exponent", output::fmt_g17(q)));
    }
    let summary = output::summary(&pairs);
    print!("{summary}");
    if let Some(dir) = &args.out {
        output::write_file(dir, "summary.txt", &summary)?;
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct WarnringArgs {
    pub n: usize,
    pub p: f64,
    pub c0: f64,
    pub targets: Vec<f64>,
    pub out: Option<PathBuf>,
}

pub fn warnring(args: &WarnringArgs) -> Result<()> {
    let ring = build_warning_ring(args.n, args.p, args.c0, &args.targets)?;
    let caps = ring.stage_capacities()?;
    let rows: Vec<Vec<String>> = ring
        .pairs
        .iter()
        .zip(&caps)
        .zip(&args.targets)
        .enumerate()
        .map(|(j, (((r, s), c), t))| {
            vec![
                (j + 1).to_string(),
                output::fmt_g17(*r),
                output::fmt_g17(*s),
                output::fmt_g17(*t),
                output::fmt_g17(*c),
            ]
        })
        .collect();
    let table = output::csv(&["stage", "r", "s", "target", "capacity"], &rows);
    let worst = caps
        .iter()
        .zip(&args.targets)
        .map(|(c, t)| (c - t).abs())
        .fold(0.0f64, f64::max);
    let summary = output::summary(&[
        ("stages", ring.pairs.len().to_string()),
        ("s1", output::fmt_g17(ring.pairs[0].1)),
        ("c0", output::fmt_g17(args.c0)),
        ("max_target_error", output::fmt_g17(worst)),
    ]);
    print!("{summary}");
    print!("{table}");
    if let Some(dir) = &args.out {
        output::write_file(dir, "summary.txt", &summary)?;
        output::write_file(dir, "ring.csv", &table)?;
    }
    Ok(())
}

/// Built-in property suite over deterministic random instances; one PASS
/// line per check, error on the first failure.
pub fn selftest() -> Result<()> {
    let solver = SolverConfig::default();

    // Capacity axioms on random small graphs.
    let mut rng = sampling::rng(20240);
    let mut checked = 0usize;
    for seed in 0..6u64 {
        let mut graph_rng = sampling::rng(100 + seed);
        let graph = sampling::random_connected_graph(&mut graph_rng, 10 + (seed as usize % 4), 1.5 + 0.5 * (seed % 3) as f64);
        let triples = sampling::random_condenser_triples(&mut rng, &graph, 5);
        let report = check_capacity_axioms(&graph, &triples, &solver, 1e-7)?;
        if !report.passed() {
            return Err(Error::InternalConsistency(format!(
                "capacity axiom violation: {:?}",
                report.violations[0].axiom
            )));
        }
        checked += report.samples;
    }
    println!("selftest capacity_axioms: PASS ({checked} samples)");

    // Comparison and maximum principles.
    let mut rng = sampling::rng(555);
    for case in 0..10 {
        let graph = sampling::random_connected_graph(&mut rng, 12, 2.0 + 0.1 * case as f64);
        let n = graph.node_count();
        let mut lo = PartialField::new(n);
        let mut hi = PartialField::new(n);
        lo.set(0, 0.0);
        hi.set(0, 0.2);
        lo.set(n - 1, 0.5);
        hi.set(n - 1, 0.9);
        let a = solve_dirichlet(&graph, &lo, &solver)?;
        let b = solve_dirichlet(&graph, &hi, &solver)?;
        for (x, y) in a.field.values().iter().zip(b.field.values()) {
            if *x > y + 1e-8 {
                return Err(Error::InternalConsistency("comparison principle failed".into()));
            }
        }
        if a.field.min() < -1e-9 || a.field.max() > 0.5 + 1e-9 {
            return Err(Error::InternalConsistency("maximum principle failed".into()));
        }
    }
    println!("selftest comparison_maximum: PASS (10 cases)");

    // Oracle self-consistency: closed form vs quadrature.
    let w = condenser::RadialWeight::constant(1.0);
    for &(n, p, r, s) in &[(3usize, 2.0, 1.0, 2.0), (4, 2.5, 0.5, 3.0), (2, 2.0, 1.0, 5.0)] {
        let closed = condenser::oracle::radial_condenser_capacity(n, p, r, s, None)?;
        let quad = condenser::oracle::radial_condenser_capacity(n, p, r, s, Some(&w))?;
        if (closed - quad).abs() > 1e-10 * closed.max(1.0) {
            return Err(Error::InternalConsistency(
                "radial oracle self-consistency failed".into(),
            ));
        }
    }
    println!("selftest oracle_consistency: PASS (3 cases)");

    // Green normalization identities on random graphs.
    let mut rng = sampling::rng(777);
    for case in 0..8u64 {
        let p = [1.5, 2.0, 3.0][(case % 3) as usize];
        let graph = sampling::random_connected_graph(&mut rng, 14, p);
        let x0 = (case as usize) % graph.node_count();
        let omega = sampling::random_domain_around(&mut rng, &graph, x0);
        let schedule = condenser::ExhaustionSchedule::whole_graph(x0);
        match singular_function(&graph, &omega, x0, &schedule, &solver)? {
            SingularOutcome::Exists(raw) => {
                let green = green_normalize(&graph, &raw, &solver)?;
                let product = green.node_capacity * green.peak.powf(p - 1.0);
                if (product - 1.0).abs() > 1e-7 {
                    return Err(Error::InternalConsistency(format!(
                        "green normalization failed: {product}"
                    )));
                }
            }
            SingularOutcome::NonExistent { .. } => {}
        }
    }
    println!("selftest green_normalization: PASS (8 cases)");

    // Level-set identity on the aligned 1D condenser.
    let graph = condenser::build_grid(&condenser::GridSpec {
        dimension: 1,
        spacing: 1.0 / 16.0,
        extent: vec![(-48, 48)],
        weight: condenser::Weight::constant(1.0),
        p: 2.0,
    })?;
    let e = NodeSet::from_indices(
        (0..graph.node_count())
            .filter(|&i| graph.position(i).unwrap()[0].abs() <= 1.0 + 1e-12)
            .collect(),
    );
    let omega = NodeSet::from_indices(
        (0..graph.node_count())
            .filter(|&i| graph.position(i).unwrap()[0].abs() < 3.0 - 1e-12)
            .collect(),
    );
    let problem = condenser::capacity::CondenserProblem::new(&graph, e, omega, false)?;
    let base = graph.nearest_node(&[0.0])?;
    let schedule = condenser::ExhaustionSchedule::new(base, vec![10.0], 1e-6, 2)?;
    let pot = capacitary_potential(&graph, &problem, &schedule, &solver)?;
    let report =
        condenser::potential::verify_level_identity(&graph, &pot, 0.25, 0.75, &solver)?;
    if (report.ratio - 1.0).abs() > 1e-6 {
        return Err(Error::InternalConsistency(format!(
            "level identity ratio {} != 1",
            report.ratio
        )));
    }
    println!("selftest level_identity: PASS (ratio {:.9})", report.ratio);

    // Naive capacity +inf flag on the parabolic line surrogate.
    let all = NodeSet::full(graph.node_count());
    let problem = condenser::capacity::CondenserProblem::new(&graph, all.clone(), all, true)?;
    let schedule = condenser::ExhaustionSchedule::new(base, vec![0.5, 1.0, 2.0, 2.9], 1e-6, 8)?;
    let naive = condenser_capacity_naive(&graph, &problem, &schedule, &solver)?;
    if naive.value != CapValue::Infinite {
        return Err(Error::InternalConsistency(
            "naive whole-space capacity must diverge".into(),
        ));
    }
    println!("selftest naive_divergence: PASS");

    println!("selftest: all checks passed");
    Ok(())
}
