//! Command dispatch.

use bioeco_core::bifurcation::{self, HopfResult};
use bioeco_core::econ::{self, BionomicCase};
use bioeco_core::equilibria::{self, Equilibrium, EquilibriumKind, StabilityReport};
use bioeco_core::simulate::{self, CycleVerdict};
use bioeco_core::verify::{self, SuiteSizes};
use bioeco_core::{Error, Exec, ModelParams, State};
use serde_json::{json, Value};

use crate::config::{Command, RunConfig};
use crate::emit::{Cell, Table};
use crate::CliError;

const NULLCLINE_NOTE: &str = "interior equilibrium solved with the predator nullcline \
     e*p*(1-m*y)*x/(1+a*x*(1-m*y)) = d+q2*E2 taken directly from the model equations";
const CASE_ONE_NOTE: &str = "case I prey level set to the prey break-even biomass c1/(p1*q1)";

#[derive(Debug, Clone, PartialEq)]
pub struct ResultEnvelope {
    pub command: Command,
    pub inputs_echo: Value,
    pub results: Value,
    pub diagnostics: Vec<String>,
    /// Row view of `results` used for CSV output.
    pub table: Table,
    /// False when the command ran but reported a failed check.
    pub ok: bool,
}

/// Runs `command` (or the command named in the config) with the default
/// execution strategy.
pub fn run(config: &RunConfig, command: Option<Command>) -> Result<ResultEnvelope, CliError> {
    run_with(config, command, Exec::default())
}

pub fn run_with(
    config: &RunConfig,
    command: Option<Command>,
    exec: Exec,
) -> Result<ResultEnvelope, CliError> {
    let command = command.or(config.command).ok_or_else(|| {
        CliError::Parse("no command given on the command line or in the config".into())
    })?;
    config.require(command)?;
    let mut resolved = config.clone();
    resolved.command = Some(command);
    let inputs_echo = serde_json::to_value(&resolved).expect("config serializes to JSON");

    let mut out = Outcome::default();
    match command {
        Command::Equilibria => equilibria_cmd(&resolved, exec, &mut out, false)?,
        Command::Stability => equilibria_cmd(&resolved, exec, &mut out, true)?,
        Command::Simulate => simulate_cmd(&resolved, &mut out)?,
        Command::Hopf => hopf_cmd(&resolved, exec, &mut out)?,
        Command::Bionomic => bionomic_cmd(&resolved, &mut out)?,
        Command::Optimal => optimal_cmd(&resolved, exec, &mut out)?,
        Command::Sweep => sweep_cmd(&resolved, &mut out)?,
        Command::Check => check_cmd(&resolved, exec, &mut out),
    }
    Ok(ResultEnvelope {
        command,
        inputs_echo,
        results: out.results,
        diagnostics: out.diagnostics,
        table: out.table,
        ok: out.ok,
    })
}

struct Outcome {
    results: Value,
    diagnostics: Vec<String>,
    table: Table,
    ok: bool,
}

impl Default for Outcome {
    fn default() -> Self {
        Self {
            results: Value::Null,
            diagnostics: Vec::new(),
            table: Table::default(),
            ok: true,
        }
    }
}

fn to_json<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("result serializes to JSON")
}

fn kind_name(kind: EquilibriumKind) -> &'static str {
    match kind {
        EquilibriumKind::Trivial => "trivial",
        EquilibriumKind::Axial => "axial",
        EquilibriumKind::Interior => "interior",
    }
}

fn solve_interior(
    params: &ModelParams,
    exec: Exec,
    diagnostics: &mut Vec<String>,
) -> Result<Option<Equilibrium>, CliError> {
    diagnostics.push(NULLCLINE_NOTE.into());
    match equilibria::interior_equilibrium_with(params, None, exec) {
        Ok(eq) => {
            if eq.roots.len() > 1 {
                diagnostics.push(format!(
                    "{} interior roots found; reporting the one with smallest x",
                    eq.roots.len()
                ));
            }
            Ok(Some(eq))
        }
        Err(err @ (Error::NoPositiveRoot | Error::NoConvergence(_))) => {
            diagnostics.push(format!("no interior equilibrium: {err}"));
            Ok(None)
        }
        Err(err) => Err(err.into()),
    }
}

fn equilibria_cmd(
    config: &RunConfig,
    exec: Exec,
    out: &mut Outcome,
    with_stability: bool,
) -> Result<(), CliError> {
    let params = config.model_params()?;
    let mut found: Vec<(Equilibrium, StabilityReport)> =
        vec![equilibria::trivial_equilibrium(&params)?];
    match equilibria::axial_equilibrium(&params) {
        Ok(pair) => found.push(pair),
        Err(err @ Error::Infeasible { .. }) => out.diagnostics.push(err.to_string()),
        Err(err) => return Err(err.into()),
    }
    if let Some(eq) = solve_interior(&params, exec, &mut out.diagnostics)? {
        let report = equilibria::classify(&params, &eq)?;
        found.push((eq, report));
    }

    let mut items = Vec::new();
    let mut table = if with_stability {
        Table::new(&[
            "kind",
            "x",
            "y",
            "trace",
            "determinant",
            "eig1_re",
            "eig1_im",
            "eig2_re",
            "eig2_im",
            "classification",
        ])
    } else {
        Table::new(&["kind", "x", "y", "feasible"])
    };
    for (eq, report) in &found {
        let mut item = json!({
            "kind": kind_name(eq.kind),
            "x": eq.point.x,
            "y": eq.point.y,
            "feasible": eq.feasible,
            "conditions": to_json(&eq.feasibility_notes),
        });
        if with_stability {
            item["stability"] = to_json(report);
            if eq.kind == EquilibriumKind::Interior {
                let gas = equilibria::gas_condition(&params, eq, None)?;
                item["global_condition"] = to_json(&gas);
            }
            let [l1, l2] = report.eigenvalues;
            table.push(vec![
                Cell::text(kind_name(eq.kind)),
                Cell::Num(eq.point.x),
                Cell::Num(eq.point.y),
                Cell::Num(report.trace),
                Cell::Num(report.determinant),
                Cell::Num(l1.re),
                Cell::Num(l1.im),
                Cell::Num(l2.re),
                Cell::Num(l2.im),
                Cell::text(report.classification.as_str()),
            ]);
        } else {
            table.push(vec![
                Cell::text(kind_name(eq.kind)),
                Cell::Num(eq.point.x),
                Cell::Num(eq.point.y),
                Cell::Bool(eq.feasible),
            ]);
        }
        items.push(item);
    }
    out.results = json!({ "equilibria": items });
    out.table = table;
    Ok(())
}

fn simulate_cmd(config: &RunConfig, out: &mut Outcome) -> Result<(), CliError> {
    let params = config.model_params()?;
    let sim = config.sim_config()?;
    let traj = simulate::integrate(&params, config.initial_state(), &sim)?;

    let invalid = traj.validity.iter().filter(|v| !v.holds()).count();
    if invalid > 0 {
        out.diagnostics.push(format!(
            "{invalid} of {} samples leave the region where the model is defined",
            traj.len()
        ));
    }
    let cycle = match simulate::detect_limit_cycle(&traj, &sim) {
        Ok(report) => Some(report),
        Err(err @ Error::TooShort { .. }) => {
            out.diagnostics
                .push(format!("cycle detection skipped: {err}"));
            None
        }
        Err(err) => return Err(err.into()),
    };
    if let Some(c) = &cycle {
        if c.verdict == CycleVerdict::Diverged {
            out.diagnostics
                .push("trajectory left the ultimate bound".into());
        }
    }

    let mut table = Table::new(&["t", "x", "y", "valid"]);
    for ((t, s), v) in traj.times.iter().zip(&traj.states).zip(&traj.validity) {
        table.push(vec![
            Cell::Num(*t),
            Cell::Num(s.x),
            Cell::Num(s.y),
            Cell::Bool(v.holds()),
        ]);
    }
    out.results = json!({
        "samples": traj.len(),
        "final_state": to_json(&traj.last()),
        "within_bound": simulate::verify_bound(&traj),
        "cycle": to_json(&cycle),
        "trajectory": {
            "t": traj.times,
            "x": traj.states.iter().map(|s| s.x).collect::<Vec<_>>(),
            "y": traj.states.iter().map(|s| s.y).collect::<Vec<_>>(),
            "valid": traj.validity.iter().map(|v| v.holds()).collect::<Vec<_>>(),
        },
    });
    out.table = table;
    Ok(())
}

fn hopf_cmd(config: &RunConfig, exec: Exec, out: &mut Outcome) -> Result<(), CliError> {
    let params = config.model_params()?;
    let range = config.hopf.as_ref().expect("checked by require");
    let scan =
        bifurcation::hopf_scan_with(&params, range.m_lo, range.m_hi, range.grid_points, exec)?;
    for m in &scan.discarded {
        out.diagnostics.push(format!(
            "trace sign change near m = {m} discarded: determinant is not positive there"
        ));
    }
    if scan.roots.is_empty() {
        out.diagnostics
            .push("no Hopf point in the scanned range".into());
    }
    let mut table = Table::new(&[
        "m_h",
        "x",
        "y",
        "trace",
        "determinant",
        "transversality",
        "sigma",
        "verdict",
    ]);
    for h in &scan.roots {
        table.push(hopf_row(h));
    }
    out.results = json!({ "roots": to_json(&scan.roots), "discarded": scan.discarded });
    out.table = table;
    Ok(())
}

fn hopf_row(h: &HopfResult) -> Vec<Cell> {
    vec![
        Cell::Num(h.m_h),
        Cell::Num(h.equilibrium_at_mh.x),
        Cell::Num(h.equilibrium_at_mh.y),
        Cell::Num(h.trace_at_mh),
        Cell::Num(h.det_at_mh),
        Cell::Num(h.transversality),
        Cell::Num(h.sigma),
        Cell::text(format!("{:?}", h.verdict).to_lowercase()),
    ]
}

fn case_name(case: BionomicCase) -> &'static str {
    match case {
        BionomicCase::I => "I",
        BionomicCase::II => "II",
        BionomicCase::III => "III",
        BionomicCase::IV => "IV",
    }
}

fn bionomic_cmd(config: &RunConfig, out: &mut Outcome) -> Result<(), CliError> {
    let params = config.model_params()?;
    let econ = config.econ_params()?;
    let cases = econ::bionomic_equilibrium(&params, &econ)?;
    out.diagnostics.push(CASE_ONE_NOTE.into());
    out.diagnostics
        .push("case III reported at the unharvested interior equilibrium; it never exists as an open-access state".into());

    let mut table = Table::new(&["case", "exists", "x_inf", "y_inf", "e1_inf", "e2_inf"]);
    for c in &cases {
        table.push(vec![
            Cell::text(case_name(c.case_id)),
            Cell::Bool(c.exists),
            Cell::opt(c.x_inf),
            Cell::opt(c.y_inf),
            Cell::Num(c.e1_inf),
            Cell::Num(c.e2_inf),
        ]);
    }
    out.results = json!({ "cases": to_json(&cases) });
    out.table = table;
    Ok(())
}

fn optimal_cmd(config: &RunConfig, exec: Exec, out: &mut Outcome) -> Result<(), CliError> {
    let params = config.model_params()?;
    let econ = config.econ_params()?;
    let policy = match econ::solve_optimal_with(&params, &econ, None, exec) {
        Ok(p) => p,
        Err(err @ Error::NegativeEffort { .. }) => {
            out.diagnostics
                .push("every singular steady state found needs a negative effort".into());
            return Err(err.into());
        }
        Err(err) => return Err(err.into()),
    };
    let revenue = econ::revenue(&econ, &params, State::new(policy.x_opt, policy.y_opt));
    let prices = econ::shadow_prices(&econ, &params, State::new(policy.x_opt, policy.y_opt))?;
    if policy.relative_residual > 1e-9 {
        out.diagnostics.push(format!(
            "singular-path residual {:e} relative to its terms",
            policy.relative_residual
        ));
    }
    let mut table = Table::new(&[
        "x_opt",
        "y_opt",
        "e1_opt",
        "e2_opt",
        "residual_9",
        "residual_11",
    ]);
    table.push(vec![
        Cell::Num(policy.x_opt),
        Cell::Num(policy.y_opt),
        Cell::Num(policy.e1_opt),
        Cell::Num(policy.e2_opt),
        Cell::Num(policy.residual_9),
        Cell::Num(policy.residual_11),
    ]);
    out.results = json!({
        "policy": to_json(&policy),
        "revenue": to_json(&revenue),
        "shadow_prices": to_json(&prices),
    });
    out.table = table;
    Ok(())
}

fn sweep_cmd(config: &RunConfig, out: &mut Outcome) -> Result<(), CliError> {
    let params = config.model_params()?;
    let values = &config.sweep.as_ref().expect("checked by require").m;
    out.diagnostics.push(NULLCLINE_NOTE.into());
    let rows = simulate::sweep_refuge(&params, values);

    let mut table = Table::new(&["m", "x_star", "y_star", "classification"]);
    for row in &rows {
        if let Some(note) = &row.note {
            out.diagnostics.push(format!("m = {}: {note}", row.m));
        }
        table.push(vec![
            Cell::Num(row.m),
            Cell::opt(row.equilibrium.map(|s| s.x)),
            Cell::opt(row.equilibrium.map(|s| s.y)),
            Cell::text(row.classification.map_or("Absent", |c| c.as_str())),
        ]);
    }
    out.results = json!({ "rows": to_json(&rows) });
    out.table = table;
    Ok(())
}

fn check_cmd(config: &RunConfig, exec: Exec, out: &mut Outcome) {
    let reports = verify::run_property_suites(config.check.seed, SuiteSizes::default(), exec);
    let mut table = Table::new(&["suite", "cases", "failures", "worst_ratio", "passed"]);
    for r in &reports {
        if !r.passed {
            out.diagnostics.push(format!(
                "suite {} failed {} of {} cases",
                r.name, r.failures, r.cases
            ));
        }
        table.push(vec![
            Cell::text(r.name.clone()),
            Cell::Int(r.cases as u64),
            Cell::Int(r.failures as u64),
            Cell::Num(r.worst_ratio),
            Cell::Bool(r.passed),
        ]);
    }
    out.ok = reports.iter().all(|r| r.passed);
    out.results = json!({ "suites": to_json(&reports), "passed": out.ok });
    out.table = table;
}
