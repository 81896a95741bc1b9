//! One function per subcommand. Each reads what it needs from the config,
//! validates it, computes, and writes `<command>-<seed>.csv/json`.

use std::path::Path;

use clap::ValueEnum;
use rayon::prelude::*;
use serde_json::json;

use diskdyn::action::action;
use diskdyn::calabi::{calabi_report, radial_calabi};
use diskdyn::ergodic::{asymptotic_action, asymptotic_winding, asymptotic_winding_integral, verify_main_theorem_batch};
use diskdyn::flow::Flow;
use diskdyn::intersection::intersection_number;
use diskdyn::winding::{boundary_winding_between, winding_iterate};

use crate::config::ExperimentConfig;
use crate::report::{num, point, Artifacts, Table};
use crate::suite::{self, SuiteOptions};
use crate::{CliError, Context};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Flow,
    Action,
    Winding,
    Intersect,
    Asymptotic,
    Calabi,
    VerifyTheorem,
    VerifyAll,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Flow => "flow",
            Command::Action => "action",
            Command::Winding => "winding",
            Command::Intersect => "intersect",
            Command::Asymptotic => "asymptotic",
            Command::Calabi => "calabi",
            Command::VerifyTheorem => "verify-theorem",
            Command::VerifyAll => "verify-all",
        }
    }
}

/// Runs `command`; `Ok(false)` means the run completed but a check failed.
pub fn run(command: Command, cfg: &ExperimentConfig, out: &Path) -> Result<bool, CliError> {
    let artifacts = Artifacts::new(out, command.name(), cfg.seed);
    match command {
        Command::Flow => flow(cfg, &artifacts),
        Command::Action => action_cmd(cfg, &artifacts),
        Command::Winding => winding_cmd(cfg, &artifacts),
        Command::Intersect => intersect(cfg, &artifacts),
        Command::Asymptotic => asymptotic(cfg, &artifacts),
        Command::Calabi => calabi(cfg, &artifacts),
        Command::VerifyTheorem => verify_theorem(cfg, &artifacts),
        Command::VerifyAll => verify_all(cfg, &artifacts),
    }
}

fn flow(cfg: &ExperimentConfig, out: &Artifacts) -> Result<bool, CliError> {
    let (spec, fc, x, n) = (cfg.hamiltonian_spec()?, cfg.flow()?, cfg.x()?, cfg.n()?);
    let flow = Flow::new(&spec, &fc).context("flow")?;
    let traj = flow.advance_steps(x, 0, n * flow.steps_per_unit_time()).context("flow")?;
    let mut t = Table::new(&["t", "x", "y", "vx", "vy"]);
    for j in 0..traj.len() {
        let [px, py] = point(traj.point(j));
        let [vx, vy] = point(traj.velocity(j));
        t.push(vec![num(traj.time(j)), px, py, vx, vy]);
    }
    out.write(
        &t,
        &json!({"command": "flow", "seed": cfg.seed, "n": n, "steps": traj.n_steps(),
                "start": point(x), "end": point(traj.end())}),
    )?;
    Ok(true)
}

fn action_cmd(cfg: &ExperimentConfig, out: &Artifacts) -> Result<bool, CliError> {
    let (spec, fc, form, points) = (cfg.hamiltonian_spec()?, cfg.flow()?, cfg.primitive()?, cfg.points()?);
    let values = points
        .par_iter()
        .map(|&z| action(&spec, &form, z, &fc))
        .collect::<diskdyn::Result<Vec<_>>>()
        .context("action")?;
    let mut t = Table::new(&["x", "y", "value", "path_term", "hamiltonian_term"]);
    for (z, a) in points.iter().zip(&values) {
        let [x, y] = point(*z);
        t.push(vec![x, y, num(a.value), num(a.path_term), num(a.hamiltonian_term)]);
    }
    out.write(&t, &json!({"command": "action", "seed": cfg.seed, "points": points.len(),
                          "primitive": form.base.name()}))?;
    Ok(true)
}

fn winding_cmd(cfg: &ExperimentConfig, out: &Artifacts) -> Result<bool, CliError> {
    let (spec, fc, n) = (cfg.hamiltonian_spec()?, cfg.flow()?, cfg.n()?);
    let (x, y) = cfg.pair()?;
    let w = winding_iterate(&spec, x, y, n, &fc).context("winding")?;
    let flow = Flow::new(&spec, &fc).context("winding")?;
    let steps = n * flow.steps_per_unit_time();
    let tx = flow.advance_steps(x, 0, steps).context("winding")?;
    let ty = flow.advance_steps(y, 0, steps).context("winding")?;
    let b = boundary_winding_between(&tx, &ty).context("winding")?;
    let mut t = Table::new(&["x1", "y1", "x2", "y2", "n", "W", "w_boundary", "min_separation", "substeps"]);
    let ([x1, y1], [x2, y2]) = (point(x), point(y));
    t.push(vec![x1, y1, x2, y2, n.to_string(), num(w.value), num(b.value), num(w.min_separation), w.substeps_used.to_string()]);
    out.write(&t, &json!({"command": "winding", "seed": cfg.seed, "n": n, "W": w.value, "w_boundary": b.value}))?;
    Ok(true)
}

fn intersect(cfg: &ExperimentConfig, out: &Artifacts) -> Result<bool, CliError> {
    let (spec, fc, n, e) = (cfg.hamiltonian_spec()?, cfg.flow()?, cfg.n()?, cfg.anchor()?);
    let (x, y) = cfg.pair()?;
    let r = intersection_number(&spec, x, y, e, n, &fc).context("intersection")?;
    let w = winding_iterate(&spec, x, y, n, &fc).context("winding")?;
    let mut t = Table::new(&["time", "sign", "angle_rate", "radial_fraction"]);
    for c in &r.crossings {
        t.push(vec![num(c.time), c.sign.to_string(), num(c.angle_rate), num(c.radial_fraction)]);
    }
    let gap = (w.value - r.value as f64).abs();
    out.write(
        &t,
        &json!({"command": "intersect", "seed": cfg.seed, "n": n, "I": r.value, "crossings": r.crossings.len(),
                "min_angle_rate": r.min_angle_rate, "W": w.value, "gap": gap, "bound": 1.5}),
    )?;
    Ok(gap <= 1.5)
}

fn asymptotic(cfg: &ExperimentConfig, out: &Artifacts) -> Result<bool, CliError> {
    let (spec, fc, form, x, n) = (cfg.hamiltonian_spec()?, cfg.flow()?, cfg.primitive()?, cfg.x()?, cfg.n()?);
    if n < 4 {
        return Err(CliError::Config("asymptotic needs n >= 4".into()));
    }
    let mut t = Table::new(&["quantity", "x", "y", "estimate", "error", "n", "cauchy_gap"]);
    let [px, py] = point(x);
    let a = asymptotic_action(&spec, &form, x, n, &fc).context("ergodic")?;
    let mut summary = json!({"command": "asymptotic", "seed": cfg.seed, "n": n, "action": a.value});
    t.push(vec!["action".into(), px.clone(), py.clone(), num(a.value), String::new(), n.to_string(), num(a.cauchy_gap)]);
    if cfg.y.is_some() {
        let (x, y) = cfg.pair()?;
        let w = asymptotic_winding(&spec, x, y, n, &fc).context("ergodic")?;
        let [qx, qy] = point(y);
        summary["winding"] = json!(w.value);
        t.push(vec!["winding".into(), format!("{px} {py}"), format!("{qx} {qy}"), num(w.value), String::new(), n.to_string(), num(w.cauchy_gap)]);
    }
    if cfg.quadrature.is_some() {
        let i = asymptotic_winding_integral(&spec, x, n, &cfg.quadrature()?, &fc).context("ergodic")?;
        summary["winding_integral"] = json!(i.value);
        t.push(vec!["winding-integral".into(), px, py, num(i.value), num(i.error), n.to_string(), String::new()]);
    }
    out.write(&t, &summary)?;
    Ok(true)
}

fn calabi(cfg: &ExperimentConfig, out: &Artifacts) -> Result<bool, CliError> {
    let (spec, fc, form) = (cfg.hamiltonian_spec()?, cfg.flow()?, cfg.primitive()?);
    let (quad, pairs) = (cfg.quadrature()?, cfg.pair_quadrature()?);
    let r = calabi_report(&spec, &form, &quad, &pairs, &fc).context("calabi")?;
    let symbolic = radial_calabi(&spec);
    let mut t = Table::new(&["route", "value", "error"]);
    for (route, e) in [("action", r.via_action), ("hamiltonian", r.via_hamiltonian), ("winding", r.via_winding)] {
        t.push(vec![route.into(), num(e.value), num(e.error)]);
    }
    if let Some(s) = symbolic {
        t.push(vec!["symbolic".into(), num(s), num(0.0)]);
    }
    let tolerance = 3.0 * r.error_sum() + 1e-12;
    let pass = r.max_pairwise_gap <= tolerance;
    out.write(
        &t,
        &json!({"command": "calabi", "seed": cfg.seed, "via_action": r.via_action.value,
                "via_hamiltonian": r.via_hamiltonian.value, "via_winding": r.via_winding.value,
                "max_pairwise_gap": r.max_pairwise_gap, "tolerance": tolerance,
                "provenance": "3 x (sum of route errors) + 1e-12", "symbolic": symbolic, "pass": pass}),
    )?;
    Ok(pass)
}

fn verify_theorem(cfg: &ExperimentConfig, out: &Artifacts) -> Result<bool, CliError> {
    let (spec, fc, form, n) = (cfg.hamiltonian_spec()?, cfg.flow()?, cfg.primitive()?, cfg.n()?);
    let (points, e, quad) = (cfg.points()?, cfg.anchor()?, cfg.quadrature()?);
    if n < 4 {
        return Err(CliError::Config("verify-theorem needs n >= 4".into()));
    }
    let reports = verify_main_theorem_batch(&spec, &points, &form, e, n, &quad, &fc).context("ergodic")?;
    let mut t = Table::new(&[
        "x", "y", "n", "action", "winding_integral", "standard_error", "residual", "segment_bound", "budget", "pass",
        "provenance",
    ]);
    for r in &reports {
        let [x, y] = point(r.x);
        t.push(vec![
            x,
            y,
            n.to_string(),
            num(r.action.value),
            num(r.winding_integral.value),
            num(r.winding_integral.error),
            num(r.residual),
            num(r.segment_bound),
            num(r.budget),
            r.pass.to_string(),
            "budget (3/2)pi/n + segment_bound/n + 3 SE".into(),
        ]);
    }
    let pass = reports.iter().all(|r| r.pass);
    out.write(&t, &json!({"command": "verify-theorem", "seed": cfg.seed, "n": n, "points": reports.len(), "pass": pass}))?;
    Ok(pass)
}

fn verify_all(cfg: &ExperimentConfig, out: &Artifacts) -> Result<bool, CliError> {
    let opts = SuiteOptions {
        seed: cfg.seed,
        scale: cfg.scale()?,
        flow: cfg.flow()?,
    };
    let mut runs = Vec::new();
    for id in suite::CRITERIA {
        let run = suite::run_criterion(id, &opts);
        println!(
            "{id}: {} ({:.1} s)",
            if run.pass() && run.runtime_ok() { "PASS" } else { "FAIL" },
            run.seconds
        );
        runs.push(run);
    }
    let pass = runs.iter().all(|r| r.pass() && r.runtime_ok());
    let criteria: Vec<_> = runs
        .iter()
        .map(|r| {
            json!({"id": r.id, "pass": r.pass(), "checks": r.checks.len(),
                   "failed": r.checks.iter().filter(|c| !c.pass).count(), "error": r.error,
                   "seconds": r.seconds, "runtime_limit": r.runtime_limit, "runtime_ok": r.runtime_ok()})
        })
        .collect();
    out.write(
        &suite::table(&runs),
        &json!({"command": "verify-all", "seed": opts.seed, "scale": opts.scale,
                "threads": rayon::current_num_threads(), "pass": pass, "criteria": criteria}),
    )?;
    Ok(pass)
}
