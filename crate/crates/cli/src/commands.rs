use std::fmt::Write;
use std::path::PathBuf;

use graphtv::minimality::{search_phi_witness, verify_universal_minimality, PhiCatalog, TvModel, WitnessSearch};
use graphtv::random::uniform_field;
use graphtv::{
    counterexample_harness, equivalence_report_with, flow_solve, jump_set, rof_path, rof_solve, OrientedGraph,
    Tolerances, VertexField,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::args::{Command, CompareArgs, FlowArgs, InstanceArgs, RofArgs, ToleranceArgs, VerifyArgs, VerifyMode};
use crate::error::CliError;
use crate::problem::{self, Problem, ProblemFile};
use crate::trajectory::{fmt_f64, TrajectoryFile};

/// Rendered command output and where it goes.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub text: String,
    pub destination: Option<PathBuf>,
    /// False when a verification ran to completion but found a violation.
    pub success: bool,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.success {
            crate::error::EXIT_OK
        } else {
            crate::error::EXIT_CHECK_FAILED
        }
    }
}

pub fn execute(command: &Command) -> Result<Outcome, CliError> {
    match command {
        Command::Rof(a) => cmd_rof(a),
        Command::Flow(a) => cmd_flow(a),
        Command::Compare(a) => cmd_compare(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Instance(a) => cmd_instance(a),
    }
}

fn tolerances(args: &ToleranceArgs) -> Result<Tolerances<f64>, CliError> {
    let mut tol = Tolerances::default();
    if let Some(v) = args.flat_tol {
        tol.flat_tol = v;
    }
    if let Some(v) = args.solve_tol {
        tol.solve_tol = v;
    }
    if let Some(v) = args.event_tol {
        tol.event_tol = v;
    }
    tol.validate().map_err(|e| CliError::Flags(e.to_string()))?;
    Ok(tol)
}

fn check_parameters(name: &str, values: &[f64], allow_zero: bool) -> Result<(), CliError> {
    for &v in values {
        let ok = v.is_finite() && (v > 0.0 || (allow_zero && v == 0.0));
        if !ok {
            let need = if allow_zero { "nonnegative" } else { "positive" };
            return Err(CliError::Flags(format!("--{name} {v}: must be finite and {need}")));
        }
    }
    Ok(())
}

fn column_names(g: &OrientedGraph) -> Vec<String> {
    (0..g.vertex_count()).map(|v| g.vertex_name(v)).collect()
}

fn edge_label(g: &OrientedGraph, e: usize) -> String {
    let (t, h) = g.edges()[e];
    format!("{}->{}", g.vertex_name(t), g.vertex_name(h))
}

/// Sorted rows, keeping the first row given for a repeated parameter.
fn sorted_rows(mut rows: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    rows.sort_by(|a, b| a[0].total_cmp(&b[0]));
    rows.dedup_by(|later, earlier| later[0] == earlier[0]);
    rows
}

fn row(parameter: f64, u: &VertexField<f64>) -> Vec<f64> {
    std::iter::once(parameter).chain(u.iter().copied()).collect()
}

pub fn cmd_rof(args: &RofArgs) -> Result<Outcome, CliError> {
    if args.alpha.is_empty() && !args.path {
        return Err(CliError::Flags("rof needs --alpha or --path".into()));
    }
    check_parameters("alpha", &args.alpha, true)?;
    let tol = tolerances(&args.tolerances)?;
    let Problem { graph, datum } = problem::load(&args.input)?;

    let mut rows = Vec::new();
    for &alpha in &args.alpha {
        rows.push(row(alpha, &rof_solve(&graph, &datum, alpha, &tol)?.u));
    }
    let mut breakpoints = Vec::new();
    if args.path {
        let path = rof_path(&graph, &datum, &tol)?;
        for &knot in path.knots() {
            rows.push(row(knot, &path.evaluate(knot)));
        }
        breakpoints = path.breakpoints().to_vec();
    }
    let file = TrajectoryFile {
        kind: "rof".into(),
        parameter: "alpha".into(),
        vertex_names: column_names(&graph),
        rows: sorted_rows(rows),
        breakpoints,
    };
    Ok(Outcome {
        text: file.render(),
        destination: args.output.output.clone(),
        success: true,
    })
}

pub fn cmd_flow(args: &FlowArgs) -> Result<Outcome, CliError> {
    if args.t_end.is_empty() && !args.full {
        return Err(CliError::Flags("flow needs --t-end or --full".into()));
    }
    check_parameters("t-end", &args.t_end, true)?;
    let tol = tolerances(&args.tolerances)?;
    let Problem { graph, datum } = problem::load(&args.input)?;
    let trajectory = flow_solve(&graph, &datum, &tol)?;
    for note in trajectory.diagnostics() {
        eprintln!("graphtv: {note}");
    }

    let mut times = args.t_end.clone();
    if args.full {
        times.push(0.0);
        times.extend_from_slice(trajectory.breakpoints());
    }
    let rows = times.iter().map(|&t| row(t, &trajectory.value_at(t))).collect();
    let file = TrajectoryFile {
        kind: "flow".into(),
        parameter: "t".into(),
        vertex_names: column_names(&graph),
        rows: sorted_rows(rows),
        breakpoints: trajectory.breakpoints().to_vec(),
    };
    Ok(Outcome {
        text: file.render(),
        destination: args.output.output.clone(),
        success: true,
    })
}

pub fn cmd_compare(args: &CompareArgs) -> Result<Outcome, CliError> {
    check_parameters("grid", &args.grid, false)?;
    let tol = tolerances(&args.tolerances)?;
    let Problem { graph, datum } = problem::load(&args.input)?;
    let trajectory = flow_solve(&graph, &datum, &tol)?;
    let path = rof_path(&graph, &datum, &tol)?;
    let equal_limit = 10.0 * tol.solve_tol * datum.norm_inf().max(1.0);
    let slack = 1e-8 * datum.norm2().max(1.0);

    let mut out = String::new();
    let stationary_ok = path.stationary_from() <= trajectory.stationary_time() + tol.event_tol.max(1e-4);
    writeln!(out, "kind compare").unwrap();
    writeln!(out, "rof_stationary_alpha {}", fmt_f64(path.stationary_from())).unwrap();
    writeln!(out, "flow_stationary_time {}", fmt_f64(trajectory.stationary_time())).unwrap();
    writeln!(out, "stationarity_ordering {}", holds(stationary_ok)).unwrap();
    let mut all_ordered = stationary_ok;

    let mut grid = args.grid.clone();
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    for alpha in grid {
        let report = equivalence_report_with(&graph, &datum, &trajectory, alpha, &tol)?;
        let norms = [datum.mean_field().norm2(), report.rof.norm2(), report.flow.norm2(), datum.norm2()];
        let ordered = norms.windows(2).all(|w| w[0] <= w[1] + slack);
        all_ordered &= ordered;
        let edges = |u: &VertexField<f64>| -> Result<String, CliError> {
            let set = jump_set(&graph, u, &tol)?;
            Ok(set.edges().iter().map(|&e| edge_label(&graph, e)).collect::<Vec<_>>().join(" "))
        };
        writeln!(out, "alpha {}", fmt_f64(alpha)).unwrap();
        writeln!(out, "  distance_inf {}", fmt_f64(report.distance_inf)).unwrap();
        writeln!(out, "  distance_2 {}", fmt_f64(report.distance_2)).unwrap();
        writeln!(out, "  equal {}", report.distance_inf <= equal_limit).unwrap();
        writeln!(out, "  averaged_derivative_member {}", report.averaged_derivative_member).unwrap();
        writeln!(out, "  membership_residual {}", fmt_f64(report.membership_residual)).unwrap();
        writeln!(out, "  sufficient_condition {}", report.sufficient_condition).unwrap();
        writeln!(out, "  first_segment {}", report.first_segment).unwrap();
        writeln!(out, "  rof {}", fields(&report.rof)).unwrap();
        writeln!(out, "  flow {}", fields(&report.flow)).unwrap();
        writeln!(out, "  jump_set_rof {}", edges(&report.rof)?).unwrap();
        writeln!(out, "  jump_set_flow {}", edges(&report.flow)?).unwrap();
        let rendered: Vec<String> = norms.iter().map(|&x| fmt_f64(x)).collect();
        writeln!(out, "  norms_mean_rof_flow_datum {}", rendered.join(" ")).unwrap();
        writeln!(out, "  norm_ordering {}", holds(ordered)).unwrap();
    }
    Ok(Outcome {
        text: out,
        destination: args.output.output.clone(),
        success: all_ordered,
    })
}

fn holds(ok: bool) -> &'static str {
    if ok {
        "holds"
    } else {
        "fails"
    }
}

fn fields(u: &VertexField<f64>) -> String {
    u.iter().map(|&x| fmt_f64(x)).collect::<Vec<_>>().join(" ")
}

pub fn cmd_verify(args: &VerifyArgs) -> Result<Outcome, CliError> {
    check_parameters("alpha", &args.alpha, false)?;
    if !(args.gap_limit >= 0.0 && args.min_margin >= 0.0) {
        return Err(CliError::Flags("--gap-limit and --min-margin must be nonnegative".into()));
    }
    let tol = tolerances(&args.tolerances)?;
    let (text, success) = match args.mode {
        VerifyMode::Counterexample => verify_counterexample(&tol)?,
        VerifyMode::Phimin => verify_phimin(args, &tol)?,
        VerifyMode::Isotropic => verify_isotropic(args, &tol)?,
    };
    Ok(Outcome {
        text,
        destination: args.output.output.clone(),
        success,
    })
}

fn verify_counterexample(tol: &Tolerances<f64>) -> Result<(String, bool), CliError> {
    let report = counterexample_harness(tol)?;
    let mut out = String::new();
    writeln!(out, "kind verify-counterexample").unwrap();
    let list = |v: &[f64]| v.iter().map(|&x| fmt_f64(x)).collect::<Vec<_>>().join(" ");
    writeln!(out, "rof_breakpoints {}", list(&report.rof_breakpoints)).unwrap();
    writeln!(out, "flow_breakpoints {}", list(&report.flow_breakpoints)).unwrap();
    for c in &report.checks {
        writeln!(
            out,
            "{} {} | expected {} | actual {} | tolerance {}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            fmt_f64(c.expected),
            fmt_f64(c.actual),
            fmt_f64(c.tolerance)
        )
        .unwrap();
    }
    let passed = report.checks.iter().filter(|c| c.passed).count();
    writeln!(out, "summary {passed}/{} checks passed", report.checks.len()).unwrap();
    Ok((out, report.passed()))
}

fn catalog_for(lo: f64, hi: f64, args: &VerifyArgs) -> PhiCatalog<f64> {
    let (lo, hi) = if hi > lo { (lo, hi) } else { (lo - 1.0, hi + 1.0) };
    PhiCatalog::standard(lo, hi).with_random_piecewise_linear(args.seed, args.piecewise_linear, lo, hi)
}

fn data_range<'a>(fields: impl IntoIterator<Item = &'a VertexField<f64>>) -> (f64, f64) {
    fields.into_iter().flat_map(|f| f.iter().copied()).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| {
        (lo.min(x), hi.max(x))
    })
}

fn alphas(args: &VerifyArgs) -> Vec<f64> {
    if args.alpha.is_empty() {
        vec![1.0]
    } else {
        args.alpha.clone()
    }
}

fn verify_phimin(args: &VerifyArgs, tol: &Tolerances<f64>) -> Result<(String, bool), CliError> {
    if args.inputs.is_empty() {
        return Err(CliError::Flags("phimin mode needs at least one input".into()));
    }
    let mut out = String::new();
    let mut success = true;
    writeln!(out, "kind verify-phimin").unwrap();
    writeln!(out, "gap_limit {}", fmt_f64(args.gap_limit)).unwrap();
    for input in &args.inputs {
        let Problem { graph, datum } = problem::load(input)?;
        let (lo, hi) = data_range([&datum]);
        let catalog = catalog_for(lo, hi, args);
        writeln!(out, "input {input}").unwrap();
        for alpha in alphas(args) {
            let report = verify_universal_minimality(&graph, &datum, alpha, &catalog, tol)?;
            let ok = report.all_within(args.gap_limit);
            success &= ok;
            writeln!(out, "  alpha {} {}", fmt_f64(alpha), if ok { "PASS" } else { "FAIL" }).unwrap();
            for outcome in &report.outcomes {
                match &outcome.result {
                    Ok(gap) => writeln!(
                        out,
                        "    {} | relative_gap {} | gap {} | minimum {} | converged {}",
                        outcome.phi,
                        fmt_f64(gap.relative_gap),
                        fmt_f64(gap.gap),
                        fmt_f64(gap.minimum),
                        gap.report.converged
                    )
                    .unwrap(),
                    Err(e) => writeln!(out, "    {} | error {e}", outcome.phi).unwrap(),
                }
            }
        }
    }
    Ok((out, success))
}

fn verify_isotropic(args: &VerifyArgs, tol: &Tolerances<f64>) -> Result<(String, bool), CliError> {
    let mut graph = None;
    let mut fields = Vec::new();
    for input in &args.inputs {
        let problem = problem::load(input)?;
        if problem.graph.cartesian_layout().is_none() {
            return Err(CliError::parse(input, "isotropic mode needs a Cartesian graph"));
        }
        match &graph {
            None => graph = Some(problem.graph),
            Some(g) if g.edges() != problem.graph.edges() => {
                return Err(CliError::parse(input, "all inputs must share one graph"));
            }
            Some(_) => {}
        }
        fields.push(problem.datum);
    }
    let graph = match graph {
        Some(g) => g,
        None => OrientedGraph::cartesian(3, 3)?,
    };
    let (lo, hi) = if fields.is_empty() { (0.0, 10.0) } else { data_range(&fields) };
    let (lo, hi) = if hi > lo { (lo, hi) } else { (lo - 1.0, hi + 1.0) };
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    for _ in 0..args.random_fields {
        fields.push(uniform_field(&mut rng, graph.vertex_count(), lo, hi));
    }
    if fields.is_empty() {
        return Err(CliError::Flags("isotropic mode needs inputs or --random-fields".into()));
    }
    let catalog = catalog_for(lo, hi, args);

    let mut out = String::new();
    let mut control_clean = true;
    writeln!(out, "kind verify-isotropic").unwrap();
    writeln!(out, "fields {}", fields.len()).unwrap();
    writeln!(out, "min_margin {}", fmt_f64(args.min_margin)).unwrap();
    for alpha in alphas(args) {
        writeln!(out, "alpha {}", fmt_f64(alpha)).unwrap();
        for (label, model) in [("isotropic", TvModel::Isotropic), ("anisotropic", TvModel::Anisotropic)] {
            let search = search_phi_witness(&graph, &fields, alpha, &catalog, model, args.min_margin, tol)?;
            if model == TvModel::Anisotropic {
                control_clean &= search.witness.is_none();
            }
            writeln!(out, "  {label} {}", describe(&search)).unwrap();
        }
    }
    Ok((out, control_clean))
}

fn describe(search: &WitnessSearch<f64>) -> String {
    match &search.witness {
        Some(w) => format!(
            "witness field {} | {} | margin {} | relative_margin {}",
            w.field_index,
            w.phi,
            fmt_f64(w.margin),
            fmt_f64(w.relative_margin)
        ),
        None => format!(
            "no witness in catalog | fields_tried {} | largest_margin {}",
            search.fields_tried,
            fmt_f64(search.largest_margin)
        ),
    }
}

pub fn cmd_instance(args: &InstanceArgs) -> Result<Outcome, CliError> {
    let problem = problem::builtin(&args.name).ok_or_else(|| {
        CliError::Flags(format!("unknown instance {:?}; available: {}", args.name, problem::BUILTIN_NAMES.join(", ")))
    })?;
    Ok(Outcome {
        text: ProblemFile::from_problem(&problem).to_json(),
        destination: args.output.output.clone(),
        success: true,
    })
}
