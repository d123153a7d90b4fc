//! Scenario runs: advance the tracer grid (and, for patch models, the
//! boundary polygon) to each checkpoint, assemble certificate frames, and
//! write the records and trajectory tables. Output is buffered in memory
//! and written only after the whole run succeeds, so neither a config
//! error nor a mid-run numerical abort leaves partial files behind.

use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use patchlab::diagnostics::{
    matrix_a, regularity_certificate, CertificateFrame, CertificateSummary, CorrectorInput,
};
use patchlab::fields::{grad_velocity, polygon_grad_velocity, velocity, VorticityModel, YField};
use patchlab::geometry::{Mat2, Vec2};
use patchlab::holder::ClosedCurve;
use patchlab::transport::{advance, evolve_patch_contour, separation_bounds, FlowState, Marker};

use crate::errors::{CliError, CliResult};
use crate::scenario::{RunMode, Scenario};

/// Everything a run produces, still unwritten.
struct RunOutput {
    records_csv: String,
    trajectories_csv: String,
    notes: Vec<String>,
}

pub fn run(scenario_path: &Path, out_dir: &Path, seed_override: Option<u64>) -> CliResult<()> {
    let mut scenario = Scenario::load(scenario_path)?;
    if let Some(seed) = seed_override {
        scenario.seed = seed;
    }
    let output = execute(&scenario)?;

    std::fs::create_dir_all(out_dir).map_err(|e| {
        CliError::Usage(format!("cannot create output directory {}: {e}", out_dir.display()))
    })?;
    let records_path = out_dir.join(&scenario.records_name);
    let trajectories_path = out_dir.join(&scenario.trajectories_name);
    std::fs::write(&records_path, &output.records_csv).map_err(|e| {
        CliError::Usage(format!("cannot write {}: {e}", records_path.display()))
    })?;
    std::fs::write(&trajectories_path, &output.trajectories_csv).map_err(|e| {
        CliError::Usage(format!("cannot write {}: {e}", trajectories_path.display()))
    })?;

    for note in &output.notes {
        println!("{note}");
    }
    println!(
        "wrote {} and {}",
        records_path.display(),
        trajectories_path.display()
    );
    Ok(())
}

fn fmt(x: f64) -> String {
    format!("{x:.12e}")
}

const RECORDS_HEADER: &str = "\
# per-checkpoint diagnostics of a scenario run; all quantities are dimensionless
# (unit vorticity amplitude; lengths in domain units)
# grad_u_sup: sup over tracer probes of the max-entry norm of the velocity gradient
# y_sup / y_seminorm: sup norm and discrete Holder seminorm (exponent alpha) of the transported field Y
# gamma_sup / gamma_seminorm: the same estimates for the corrected gradient Gamma = grad_u - omega*A
# ygradu_sup / ygradu_seminorm: the same estimates for the directional derivative (grad_u) Y
# area: area of the advected boundary polygon (0 when the run carries none)
# omega_l1 / omega_l2 / omega_linf: discrete L^p norms of vorticity on the fixed cell grid
time,grad_u_sup,y_sup,y_seminorm,gamma_sup,gamma_seminorm,ygradu_sup,ygradu_seminorm,area,omega_l1,omega_l2,omega_linf
";

const TRAJECTORIES_HEADER: &str = "\
# tracer trajectories at each checkpoint; positions in domain length units
# x0_1, x0_2: seed position; x_1, x_2: current position
# det_jacobian: determinant of the carried flow-map Jacobian (incompressible flows keep it at 1)
time,tracer,x0_1,x0_2,x_1,x_2,det_jacobian
";

fn execute(scenario: &Scenario) -> CliResult<RunOutput> {
    let model = scenario.build_model()?;
    let chi0 = scenario.chi0();
    let probes = scenario.grid_points();
    let mut notes = vec![format!(
        "scenario {}: model {}, mode {}, {} probes, {} steps of dt = {:e}",
        scenario.path,
        scenario.model.kind_name(),
        match scenario.mode {
            RunMode::Frozen => "frozen",
            RunMode::SelfConsistent => "self-consistent",
        },
        probes.len(),
        scenario.total_steps(),
        scenario.dt,
    )];

    if probes.is_empty() {
        notes.push("no tracer probes: records and trajectories stay header-only".into());
        return Ok(RunOutput {
            records_csv: RECORDS_HEADER.to_string(),
            trajectories_csv: TRAJECTORIES_HEADER.to_string(),
            notes,
        });
    }

    let floor = y_floor(scenario, chi0.as_ref(), &probes)?;
    let (cell_centers, cell_areas) = scenario.cell_grid();
    let blocks = scenario.checkpoint_blocks();

    let mut frames: Vec<CertificateFrame> = Vec::with_capacity(blocks.len() + 1);
    let mut trajectory_rows: Vec<String> = Vec::new();
    let mut collect = |time: f64, tracers: &[Marker], boundary: &[Vec2]| -> CliResult<()> {
        frames.push(build_frame(
            scenario,
            &model,
            chi0.as_ref(),
            floor,
            &cell_centers,
            &cell_areas,
            time,
            tracers,
            boundary,
        )?);
        for (i, m) in tracers.iter().enumerate() {
            trajectory_rows.push(format!(
                "{},{},{},{},{},{},{}",
                fmt(time),
                i,
                fmt(m.x0.x1),
                fmt(m.x0.x2),
                fmt(m.position.x1),
                fmt(m.position.x2),
                fmt(m.jacobian.det()),
            ));
        }
        Ok(())
    };

    // The final marker set, for the separation-sandwich report.
    let final_markers: Vec<Marker>;
    let final_time: f64;

    match scenario.mode {
        RunMode::Frozen => {
            let vel_model = model.clone();
            let grad_model = model.clone();
            let vel = move |_t: f64, p: Vec2| velocity(&vel_model, p);
            let grad = move |_t: f64, p: Vec2| grad_velocity(&grad_model, p);
            let mut tracer_state = FlowState::new(probes.clone(), scenario.dt);
            let mut boundary_state = scenario
                .initial_contour()
                .map(|nodes| FlowState::new(nodes, scenario.dt));
            let boundary_of = |state: &Option<FlowState>| -> Vec<Vec2> {
                state.as_ref().map(|s| s.positions()).unwrap_or_default()
            };
            collect(0.0, &tracer_state.markers, &boundary_of(&boundary_state))?;
            for (k, &block) in blocks.iter().enumerate() {
                tracer_state = advance(tracer_state, &vel, Some(&grad), block)
                    .map_err(|e| checkpoint_abort(k + 1, e.to_string()))?;
                boundary_state = match boundary_state {
                    Some(state) => Some(
                        advance(state, &vel, None, block)
                            .map_err(|e| checkpoint_abort(k + 1, e.to_string()))?,
                    ),
                    None => None,
                };
                collect(
                    tracer_state.time,
                    &tracer_state.markers,
                    &boundary_of(&boundary_state),
                )?;
            }
            final_time = tracer_state.time;
            final_markers = tracer_state.markers;
        }
        RunMode::SelfConsistent => {
            let amplitude = scenario.amplitude();
            let mut nodes = scenario
                .initial_contour()
                .expect("mode validation admits only patch kinds");
            let mut tracers: Vec<Marker> = probes
                .iter()
                .map(|&p| Marker { x0: p, position: p, jacobian: Mat2::IDENTITY })
                .collect();
            let mut steps_done = 0usize;
            collect(0.0, &tracers, &nodes)?;
            for &block in &blocks {
                nodes = evolve_patch_contour(nodes, amplitude, scenario.dt, block, &mut tracers);
                steps_done += block;
                collect(steps_done as f64 * scenario.dt, &tracers, &nodes)?;
            }
            final_time = steps_done as f64 * scenario.dt;
            final_markers = tracers;
        }
    }

    let summary = regularity_certificate(&frames, scenario.alpha)
        .map_err(|e| CliError::Check(format!("certificate evaluation failed: {e}")))?;

    let mut records_csv = String::from(RECORDS_HEADER);
    for r in &summary.records {
        records_csv.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}\n",
            fmt(r.time),
            fmt(r.grad_u_sup),
            fmt(r.y_holder.sup_norm),
            fmt(r.y_holder.seminorm),
            fmt(r.gamma_holder.sup_norm),
            fmt(r.gamma_holder.seminorm),
            fmt(r.ygradu_holder.sup_norm),
            fmt(r.ygradu_holder.seminorm),
            fmt(r.area),
            fmt(r.lp_norms.l1),
            fmt(r.lp_norms.l2),
            fmt(r.lp_norms.linf),
        ));
    }
    let mut trajectories_csv = String::from(TRAJECTORIES_HEADER);
    for row in &trajectory_rows {
        trajectories_csv.push_str(row);
        trajectories_csv.push('\n');
    }

    for (k, r) in summary.records.iter().enumerate() {
        notes.push(format!(
            "checkpoint {k}: t = {:.6}, sup|grad_u| = {:.6e}, area = {:.6e}, |omega|_1 = {:.6e}",
            r.time, r.grad_u_sup, r.area, r.lp_norms.l1
        ));
    }
    notes.push(envelope_note(&summary));
    if let Some(line) = sandwich_note(scenario, &summary, &final_markers, final_time) {
        notes.push(line);
    }

    Ok(RunOutput { records_csv, trajectories_csv, notes })
}

fn checkpoint_abort(checkpoint: usize, detail: String) -> CliError {
    CliError::Check(format!("run aborted before checkpoint {checkpoint}: {detail}"))
}

/// Floor for |Y| on the probes the cutoff activates, with up-front
/// rejection of Y0 choices that degenerate there. Inactive probes are the
/// corrector's business to shield, not ours to reject.
fn y_floor(scenario: &Scenario, chi0: &dyn Fn(Vec2) -> f64, probes: &[Vec2]) -> CliResult<f64> {
    let mut min_norm = f64::INFINITY;
    for &p in probes {
        if chi0(p) == 0.0 {
            continue;
        }
        let y = scenario.y0_value(p).ok_or_else(|| {
            scenario.config_err(
                "y0.kind",
                format!(
                    "Y0 is undefined at the active marker ({}, {}); move the window or pick another Y0",
                    p.x1, p.x2
                ),
            )
        })?;
        let norm = y.norm();
        if norm == 0.0 {
            return Err(scenario.config_err(
                "y0.kind",
                format!(
                    "Y0 vanishes at the active marker ({}, {}); the corrector needs |Y| > 0 inside the cutoff",
                    p.x1, p.x2
                ),
            ));
        }
        min_norm = min_norm.min(norm);
    }
    // No active probes: the corrector is identically zero and the floor is
    // never consulted; any positive value satisfies its precondition.
    Ok(if min_norm.is_finite() { 0.5 * min_norm } else { 1.0 })
}

#[allow(clippy::too_many_arguments)]
fn build_frame(
    scenario: &Scenario,
    frozen_model: &VorticityModel,
    chi0: &dyn Fn(Vec2) -> f64,
    floor: f64,
    cell_centers: &[Vec2],
    cell_areas: &[f64],
    time: f64,
    tracers: &[Marker],
    boundary: &[Vec2],
) -> CliResult<CertificateFrame> {
    let amplitude = scenario.amplitude();
    let model_now = match scenario.mode {
        RunMode::Frozen => frozen_model.clone(),
        RunMode::SelfConsistent => {
            let curve = ClosedCurve::new(boundary.to_vec()).map_err(|e| {
                CliError::Check(format!(
                    "checkpoint at t = {time:.6}: advected boundary degenerated: {e}"
                ))
            })?;
            VorticityModel::patch(curve, amplitude)
        }
    };

    let mut grad_u = Vec::with_capacity(tracers.len());
    let mut y_values = Vec::with_capacity(tracers.len());
    let mut gamma = Vec::with_capacity(tracers.len());
    for (i, m) in tracers.iter().enumerate() {
        let p = m.position;
        let grad = match scenario.mode {
            RunMode::SelfConsistent => polygon_grad_velocity(boundary, amplitude, p),
            RunMode::Frozen => grad_velocity(&model_now, p).map_err(|e| {
                CliError::Check(format!(
                    "checkpoint at t = {time:.6}: velocity gradient failed at probe {i} ({}, {}): {e}",
                    p.x1, p.x2
                ))
            })?,
        };
        // Lagrangian labels: the cutoff rides the marker, Y rides its
        // Jacobian. Where Y0 is undefined the cutoff vanishes (checked at
        // launch), so a zero placeholder never reaches the corrector.
        let chi = chi0(m.x0);
        let y = match scenario.y0_value(m.x0) {
            Some(y0) => m.jacobian.apply(y0),
            None => Vec2::ZERO,
        };
        let omega = model_now.vorticity(p);
        let gamma_here = if chi == 0.0 {
            grad
        } else {
            let input = CorrectorInput::new(
                YField::constant(y),
                move |_| chi,
                move |_| omega,
                floor,
            );
            let a = matrix_a(&input, p).map_err(|e| {
                CliError::Check(format!(
                    "checkpoint at t = {time:.6}: corrector failed at probe {i} ({}, {}): {e}",
                    p.x1, p.x2
                ))
            })?;
            grad.sub(a.scale(omega))
        };
        grad_u.push(grad);
        y_values.push(y);
        gamma.push(gamma_here);
    }

    let omega_cells: Vec<f64> = cell_centers.iter().map(|&c| model_now.vorticity(c)).collect();

    Ok(CertificateFrame {
        time,
        points: tracers.iter().map(|m| m.position).collect(),
        spacing: scenario.grid_spacing(),
        grad_u,
        y_values,
        gamma,
        boundary: boundary.to_vec(),
        omega_cells,
        cell_areas: cell_areas.to_vec(),
    })
}

fn envelope_note(summary: &CertificateSummary) -> String {
    format!(
        "envelope fits of sup|grad_u|: exponential rate {:.3e} (residual {:.3e}), doubly-exponential rate {:.3e} (residual {:.3e})",
        summary.exponential.rate,
        summary.exponential.residual,
        summary.doubly_exponential.rate,
        summary.doubly_exponential.residual,
    )
}

/// Two-sided separation bounds on seeded random marker pairs, using the
/// checkpointed sup|grad_u| envelope as the gradient bound V. Reported as
/// a note; a violation here flags the envelope, not the run, since the
/// true sup between checkpoints may exceed the checkpointed one.
fn sandwich_note(
    scenario: &Scenario,
    summary: &CertificateSummary,
    markers: &[Marker],
    time: f64,
) -> Option<String> {
    let steps = scenario.total_steps();
    if markers.len() < 2 || steps == 0 {
        return None;
    }
    let v_max = summary
        .records
        .iter()
        .map(|r| r.grad_u_sup)
        .fold(0.0_f64, f64::max);
    let v_history = vec![v_max; steps + 1];
    let mut rng = ChaCha8Rng::seed_from_u64(scenario.seed);
    let mut pairs = Vec::with_capacity(100);
    while pairs.len() < 100 {
        let i = rng.gen_range(0..markers.len());
        let j = rng.gen_range(0..markers.len());
        if i != j {
            pairs.push((i, j));
        }
    }
    let state = FlowState {
        markers: markers.to_vec(),
        carried_scalars: None,
        carried_vectors: None,
        time,
        dt: scenario.dt,
    };
    let report = separation_bounds(&state, &pairs, &v_history);
    Some(format!(
        "separation sandwich (seed {}, {} pairs, V = {:.3e}): {} violations",
        scenario.seed,
        report.checked,
        v_max,
        report.violations.len()
    ))
}
