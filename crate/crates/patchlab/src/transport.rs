//! Flow-map integration: marker advection with the variational Jacobian
//! equation, inverse maps by backward integration, pushforward of
//! tangential fields, scalar transport, and Gronwall-type envelope
//! checks.

use crate::error::{Error, Result};
use crate::fields::{polygon_grad_velocity, polygon_velocity};
use crate::geometry::{Mat2, Vec2};
use rayon::prelude::*;

/// One Lagrangian marker: label x0, current position η(t, x0), and the
/// flow-map Jacobian ∇η(t, x0).
#[derive(Debug, Clone, Copy)]
pub struct Marker {
    pub x0: Vec2,
    pub position: Vec2,
    pub jacobian: Mat2,
}

/// Velocity evaluator u(t, x) supplied to the integrator.
pub type VelocityEval<'a> = &'a (dyn Fn(f64, Vec2) -> Result<Vec2> + Sync);
/// Velocity-gradient evaluator ∇u(t, x) for the variational equation.
pub type GradientEval<'a> = &'a (dyn Fn(f64, Vec2) -> Result<Mat2> + Sync);

/// Marker ensemble with optional Lagrangian labels carried along.
#[derive(Debug, Clone)]
pub struct FlowState {
    pub markers: Vec<Marker>,
    /// Per-marker scalar labels (initial vorticity or level-set values).
    pub carried_scalars: Option<Vec<f64>>,
    /// Per-marker vector labels (initial tangential field values).
    pub carried_vectors: Option<Vec<Vec2>>,
    pub time: f64,
    pub dt: f64,
}

impl FlowState {
    /// Fresh state at time 0: position = x0, jacobian = identity.
    pub fn new(points: Vec<Vec2>, dt: f64) -> Self {
        assert!(dt > 0.0, "time step must be positive");
        let markers = points
            .into_iter()
            .map(|x0| Marker { x0, position: x0, jacobian: Mat2::IDENTITY })
            .collect();
        FlowState { markers, carried_scalars: None, carried_vectors: None, time: 0.0, dt }
    }

    pub fn with_scalars(mut self, values: Vec<f64>) -> Self {
        assert!(values.len() == self.markers.len(), "one scalar per marker");
        self.carried_scalars = Some(values);
        self
    }

    pub fn with_vectors(mut self, values: Vec<Vec2>) -> Self {
        assert!(values.len() == self.markers.len(), "one vector per marker");
        self.carried_vectors = Some(values);
        self
    }

    pub fn positions(&self) -> Vec<Vec2> {
        self.markers.iter().map(|m| m.position).collect()
    }
}

/// Advances every marker by one classical 4-stage step of ∂ₜη = u(t, η),
/// with the Jacobian advanced through the same stages by the variational
/// equation ∂ₜ∇η = ∇u(t, η)·∇η. Passing `None` for the gradient leaves
/// jacobians untouched (positions-only mode, e.g. contour nodes).
/// Carried labels are copied unchanged.
pub fn step_flow(
    state: &FlowState,
    velocity: VelocityEval,
    grad_velocity: Option<GradientEval>,
) -> Result<FlowState> {
    let dt = state.dt;
    let t = state.time;
    let markers: Vec<Marker> = state
        .markers
        .par_iter()
        .enumerate()
        .map(|(index, marker)| {
            step_marker(*marker, t, dt, velocity, grad_velocity)
                .map_err(|e| e.at_marker(index))
        })
        .collect::<Result<_>>()?;
    Ok(FlowState {
        markers,
        carried_scalars: state.carried_scalars.clone(),
        carried_vectors: state.carried_vectors.clone(),
        time: t + dt,
        dt,
    })
}

fn step_marker(
    marker: Marker,
    t: f64,
    dt: f64,
    velocity: VelocityEval,
    grad_velocity: Option<GradientEval>,
) -> Result<Marker> {
    let p = marker.position;
    let m = marker.jacobian;
    // Stage phase offsets and combination weights of the classical rule.
    let stage = |tau: f64, pos: Vec2, mat: Mat2| -> Result<(Vec2, Mat2)> {
        let v = velocity(tau, pos)?;
        let dm = match grad_velocity {
            Some(grad) => grad(tau, pos)?.mul(mat),
            None => Mat2::ZERO,
        };
        Ok((v, dm))
    };
    let (k1p, k1m) = stage(t, p, m)?;
    let (k2p, k2m) = stage(t + 0.5 * dt, p + k1p.scale(0.5 * dt), m.add(k1m.scale(0.5 * dt)))?;
    let (k3p, k3m) = stage(t + 0.5 * dt, p + k2p.scale(0.5 * dt), m.add(k2m.scale(0.5 * dt)))?;
    let (k4p, k4m) = stage(t + dt, p + k3p.scale(dt), m.add(k3m.scale(dt)))?;
    let position = p + (k1p + (k2p + k3p).scale(2.0) + k4p).scale(dt / 6.0);
    let jacobian = m.add(
        k1m.add(k2m.add(k3m).scale(2.0))
            .add(k4m)
            .scale(dt / 6.0),
    );
    Ok(Marker { x0: marker.x0, position, jacobian })
}

/// Runs `steps` consecutive steps.
pub fn advance(
    state: FlowState,
    velocity: VelocityEval,
    grad_velocity: Option<GradientEval>,
    steps: usize,
) -> Result<FlowState> {
    let mut current = state;
    for _ in 0..steps {
        current = step_flow(&current, velocity, grad_velocity)?;
    }
    Ok(current)
}

/// η⁻¹(t, x) by integrating the same velocity backward from (t, x) to
/// time 0 with uniform steps of −dt. `t` must be an integer multiple of
/// `dt` within roundoff.
pub fn inverse_map(velocity: VelocityEval, x: Vec2, t: f64, dt: f64) -> Result<Vec2> {
    assert!(dt > 0.0 && t >= 0.0);
    let steps = (t / dt).round();
    assert!(
        (steps * dt - t).abs() <= 1e-9 * t.max(1.0),
        "horizon must be an integer number of steps"
    );
    let mut pos = x;
    let mut tau = t;
    for _ in 0..steps as usize {
        let marker = Marker { x0: pos, position: pos, jacobian: Mat2::IDENTITY };
        // One backward stage: reuse the forward stepper with negated dt.
        let back = step_marker(
            marker,
            tau,
            -dt,
            &|s, q| velocity(s, q),
            None,
        )?;
        pos = back.position;
        tau -= dt;
    }
    Ok(pos)
}

/// Y(t, η(t, x0)) = ∇η(t, x0)·Y₀(x0) per marker; returns
/// (position, pushforward value) pairs.
pub fn pushforward_y(state: &FlowState) -> Result<Vec<(Vec2, Vec2)>> {
    let y0 = state
        .carried_vectors
        .as_ref()
        .ok_or(Error::MissingCarriedData("carried_vectors"))?;
    Ok(state
        .markers
        .iter()
        .zip(y0)
        .map(|(m, y)| (m.position, m.jacobian.apply(*y)))
        .collect())
}

/// Transported scalar ω(t, x) = ω₀(η⁻¹(t, x)).
pub fn transport_scalar(
    initial: &dyn Fn(Vec2) -> f64,
    velocity: VelocityEval,
    x: Vec2,
    t: f64,
    dt: f64,
) -> Result<f64> {
    Ok(initial(inverse_map(velocity, x, t, dt)?))
}

/// Velocities induced by the polygon on a set of points (batch parallel).
fn polygon_velocities(nodes: &[Vec2], amplitude: f64, points: &[Vec2]) -> Vec<Vec2> {
    points
        .par_iter()
        .map(|&x| polygon_velocity(nodes, amplitude, x))
        .collect()
}

/// One self-consistent contour-dynamics step: all polygon nodes advance
/// together by the classical 4-stage rule, each stage recomputing the
/// velocity from the stage's own polygon.
pub fn step_patch_contour(nodes: &[Vec2], amplitude: f64, dt: f64) -> Vec<Vec2> {
    let combine = |base: &[Vec2], dir: &[Vec2], h: f64| -> Vec<Vec2> {
        base.iter().zip(dir).map(|(b, d)| *b + d.scale(h)).collect()
    };
    let k1 = polygon_velocities(nodes, amplitude, nodes);
    let n2 = combine(nodes, &k1, 0.5 * dt);
    let k2 = polygon_velocities(&n2, amplitude, &n2);
    let n3 = combine(nodes, &k2, 0.5 * dt);
    let k3 = polygon_velocities(&n3, amplitude, &n3);
    let n4 = combine(nodes, &k3, dt);
    let k4 = polygon_velocities(&n4, amplitude, &n4);
    nodes
        .iter()
        .enumerate()
        .map(|(i, b)| *b + (k1[i] + (k2[i] + k3[i]).scale(2.0) + k4[i]).scale(dt / 6.0))
        .collect()
}

/// Evolves the patch boundary for `steps` self-consistent steps,
/// optionally carrying passive tracer markers (with jacobians) in the
/// same coupled stages so their accuracy matches the boundary's.
pub fn evolve_patch_contour(
    nodes: Vec<Vec2>,
    amplitude: f64,
    dt: f64,
    steps: usize,
    tracers: &mut [Marker],
) -> Vec<Vec2> {
    let mut nodes = nodes;
    for _ in 0..steps {
        if tracers.is_empty() {
            nodes = step_patch_contour(&nodes, amplitude, dt);
        } else {
            let (new_nodes, new_tracers) = step_patch_with_tracers(&nodes, tracers, amplitude, dt);
            nodes = new_nodes;
            tracers.copy_from_slice(&new_tracers);
        }
    }
    nodes
}

/// Coupled step: polygon nodes plus passive tracers, each stage seeing
/// the same stage polygon; tracers also advance their jacobians with the
/// contour velocity gradient.
fn step_patch_with_tracers(
    nodes: &[Vec2],
    tracers: &[Marker],
    amplitude: f64,
    dt: f64,
) -> (Vec<Vec2>, Vec<Marker>) {
    struct Stage {
        node_vel: Vec<Vec2>,
        tracer_vel: Vec<Vec2>,
        tracer_dm: Vec<Mat2>,
    }
    let eval = |stage_nodes: &[Vec2], tracer_pos: &[Vec2], tracer_jac: &[Mat2]| -> Stage {
        let node_vel = polygon_velocities(stage_nodes, amplitude, stage_nodes);
        let tracer_vel = polygon_velocities(stage_nodes, amplitude, tracer_pos);
        let tracer_dm = tracer_pos
            .par_iter()
            .zip(tracer_jac)
            .map(|(&x, m)| polygon_grad_velocity(stage_nodes, amplitude, x).mul(*m))
            .collect();
        Stage { node_vel, tracer_vel, tracer_dm }
    };
    let shift_nodes = |dir: &[Vec2], h: f64| -> Vec<Vec2> {
        nodes.iter().zip(dir).map(|(b, d)| *b + d.scale(h)).collect()
    };
    let pos0: Vec<Vec2> = tracers.iter().map(|m| m.position).collect();
    let jac0: Vec<Mat2> = tracers.iter().map(|m| m.jacobian).collect();
    let shift_tracers = |sv: &[Vec2], sm: &[Mat2], h: f64| -> (Vec<Vec2>, Vec<Mat2>) {
        (
            pos0.iter().zip(sv).map(|(p, v)| *p + v.scale(h)).collect(),
            jac0.iter().zip(sm).map(|(m, d)| m.add(d.scale(h))).collect(),
        )
    };

    let s1 = eval(nodes, &pos0, &jac0);
    let (p2, j2) = shift_tracers(&s1.tracer_vel, &s1.tracer_dm, 0.5 * dt);
    let s2 = eval(&shift_nodes(&s1.node_vel, 0.5 * dt), &p2, &j2);
    let (p3, j3) = shift_tracers(&s2.tracer_vel, &s2.tracer_dm, 0.5 * dt);
    let s3 = eval(&shift_nodes(&s2.node_vel, 0.5 * dt), &p3, &j3);
    let (p4, j4) = shift_tracers(&s3.tracer_vel, &s3.tracer_dm, dt);
    let s4 = eval(&shift_nodes(&s3.node_vel, dt), &p4, &j4);

    let new_nodes = nodes
        .iter()
        .enumerate()
        .map(|(i, b)| {
            *b + (s1.node_vel[i] + (s2.node_vel[i] + s3.node_vel[i]).scale(2.0) + s4.node_vel[i])
                .scale(dt / 6.0)
        })
        .collect();
    let new_tracers = tracers
        .iter()
        .enumerate()
        .map(|(i, m)| Marker {
            x0: m.x0,
            position: m.position
                + (s1.tracer_vel[i]
                    + (s2.tracer_vel[i] + s3.tracer_vel[i]).scale(2.0)
                    + s4.tracer_vel[i])
                    .scale(dt / 6.0),
            jacobian: m.jacobian.add(
                s1.tracer_dm[i]
                    .add(s2.tracer_dm[i].add(s3.tracer_dm[i]).scale(2.0))
                    .add(s4.tracer_dm[i])
                    .scale(dt / 6.0),
            ),
        })
        .collect::<Vec<_>>();
    (new_nodes, new_tracers)
}

/// Time series for an envelope check: f against h·exp(±∫g).
#[derive(Debug, Clone)]
pub struct GronwallSample {
    pub times: Vec<f64>,
    pub f: Vec<f64>,
    pub g: Vec<f64>,
    pub h: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GronwallDirection {
    /// f(t) ≤ h(t)·exp(+∫₀ᵗ g).
    Forward,
    /// f(t) ≥ h(t)·exp(−∫₀ᵗ g).
    Reverse,
}

#[derive(Debug, Clone, Copy)]
pub struct GronwallCertificate {
    pub holds: bool,
    /// Worst signed margin (envelope minus f, oriented so ≥ 0 passes).
    pub worst_margin: f64,
    pub worst_time: f64,
}

/// Verifies the envelope inequality at every sample time with a
/// trapezoidal cumulative integral of g.
pub fn check_gronwall(
    sample: &GronwallSample,
    direction: GronwallDirection,
) -> Result<GronwallCertificate> {
    let n = sample.times.len();
    if n == 0 || sample.f.len() != n || sample.g.len() != n || sample.h.len() != n {
        return Err(Error::InvalidInput(
            "times, f, g, h must be nonempty and aligned".into(),
        ));
    }
    if sample.times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput("times must be strictly increasing".into()));
    }
    if sample.g.iter().any(|&g| g < 0.0) {
        return Err(Error::InvalidInput("g must be nonnegative".into()));
    }
    let nondecreasing = sample.h.windows(2).all(|w| w[1] >= w[0]);
    let nonincreasing = sample.h.windows(2).all(|w| w[1] <= w[0]);
    if !(nondecreasing || nonincreasing) {
        return Err(Error::NonMonotoneEnvelope);
    }
    let mut integral = 0.0;
    let mut worst_margin = f64::INFINITY;
    let mut worst_time = sample.times[0];
    for i in 0..n {
        if i > 0 {
            let dt = sample.times[i] - sample.times[i - 1];
            integral += 0.5 * dt * (sample.g[i] + sample.g[i - 1]);
        }
        let margin = match direction {
            GronwallDirection::Forward => sample.h[i] * integral.exp() - sample.f[i],
            GronwallDirection::Reverse => sample.f[i] - sample.h[i] * (-integral).exp(),
        };
        if margin < worst_margin {
            worst_margin = margin;
            worst_time = sample.times[i];
        }
    }
    // Equality cases sit at margin 0 up to roundoff of the exponentials.
    let scale = sample.f.iter().fold(1.0f64, |a, &v| a.max(v.abs()));
    Ok(GronwallCertificate {
        holds: worst_margin >= -1e-9 * scale,
        worst_margin,
        worst_time,
    })
}

#[derive(Debug, Clone, Copy)]
pub struct SeparationViolation {
    pub first: usize,
    pub second: usize,
    pub initial: f64,
    pub current: f64,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone)]
pub struct SeparationReport {
    pub checked: usize,
    pub violations: Vec<SeparationViolation>,
    /// e^{−∫V} and e^{+∫V} actually used.
    pub lower_factor: f64,
    pub upper_factor: f64,
}

/// Checks |x−y|·e^{−∫V} ≤ |η(t,x) − η(t,y)| ≤ |x−y|·e^{+∫V} for the
/// given marker pairs. `v_history` samples ‖∇u(s)‖ on the uniform step
/// grid covering [0, time], one value per grid time.
pub fn separation_bounds(
    state: &FlowState,
    pairs: &[(usize, usize)],
    v_history: &[f64],
) -> SeparationReport {
    let steps = (state.time / state.dt).round() as usize;
    assert!(
        v_history.len() == steps + 1,
        "need one V sample per time-grid point"
    );
    let mut integral = 0.0;
    for w in v_history.windows(2) {
        integral += 0.5 * state.dt * (w[0] + w[1]);
    }
    let lower_factor = (-integral).exp();
    let upper_factor = integral.exp();
    let mut violations = Vec::new();
    for &(i, j) in pairs {
        let initial = state.markers[i].x0.distance(state.markers[j].x0);
        let current = state.markers[i].position.distance(state.markers[j].position);
        let lower = initial * lower_factor;
        let upper = initial * upper_factor;
        // Equality cases (frozen flow, zero V) pass within roundoff slack.
        let slack = 1e-12 * initial.max(1.0);
        if current < lower - slack || current > upper + slack {
            violations.push(SeparationViolation { first: i, second: j, initial, current, lower, upper });
        }
    }
    SeparationReport { checked: pairs.len(), violations, lower_factor, upper_factor }
}

/// Shoelace areas of the nx × ny quadrilateral cells of a deformed
/// corner grid stored row-major with (nx+1) × (ny+1) corners.
pub fn deformed_cell_areas(corners: &[Vec2], nx: usize, ny: usize) -> Vec<f64> {
    assert!(corners.len() == (nx + 1) * (ny + 1), "corner grid size mismatch");
    let at = |i: usize, j: usize| corners[j * (nx + 1) + i];
    let mut areas = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let quad = [at(i, j), at(i + 1, j), at(i + 1, j + 1), at(i, j + 1)];
            let mut twice = 0.0;
            for k in 0..4 {
                twice += quad[k].cross(quad[(k + 1) % 4]);
            }
            areas.push(0.5 * twice);
        }
    }
    areas
}

/// Discrete L^p norm (Σ |v|^p · area)^{1/p} over quadrature cells.
pub fn lp_norm_on_cells(values: &[f64], areas: &[f64], p: f64) -> f64 {
    assert!(values.len() == areas.len() && p >= 1.0);
    values
        .iter()
        .zip(areas)
        .map(|(v, a)| v.abs().powf(p) * a)
        .sum::<f64>()
        .powf(1.0 / p)
}
