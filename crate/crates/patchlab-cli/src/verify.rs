//! Named check suites against a scenario's model.
//!
//! `stationary` needs a radial model and compares every quadrature route
//! against the closed forms: velocity, interior gradient, the corrector
//! matrix, and the corrected gradient through both of its routes.
//! `identities` needs a smooth vorticity (gaussian or shear-sine) and
//! checks the directional-derivative identity for two tangential fields.

use std::f64::consts::PI;
use std::path::Path;

use patchlab::diagnostics::{corrected_gradient, corrected_gradient_quadrature, CorrectorInput};
use patchlab::fields::{
    directional_gradient_identity, pv_symmetric_part, reference_solution, velocity,
    velocity_biot_savart, VorticityModel, YField,
};
use patchlab::geometry::{Vec2, J};

use crate::errors::{CliError, CliResult};
use crate::scenario::{ModelSpec, Scenario};
use crate::table::CheckTable;

pub fn run(scenario_path: &Path, suite: &str) -> CliResult<()> {
    let scenario = Scenario::load(scenario_path)?;
    match suite {
        "stationary" => stationary(&scenario),
        "identities" => identities(&scenario),
        other => Err(CliError::Usage(format!(
            "unknown suite `{other}` (expected stationary or identities)"
        ))),
    }
}

const BAND_ANGLES: [f64; 2] = [0.7, 2.9];

fn stationary(scenario: &Scenario) -> CliResult<()> {
    if !matches!(scenario.model, ModelSpec::CircularPatch | ModelSpec::Radial { .. }) {
        return Err(scenario.config_err(
            "model.kind",
            format!(
                "suite stationary needs a radial model (circular-patch or radial), got {}",
                scenario.model.kind_name()
            ),
        ));
    }
    let model = scenario.build_model()?;
    let r_jump = scenario.interface_radius().expect("radial kinds carry a jump radius");
    let fail = |what: &str, e: patchlab::error::Error| {
        CliError::Check(format!("stationary suite, {what}: {e}"))
    };

    let mut table = CheckTable::new(format!(
        "suite stationary on {} ({})",
        scenario.path,
        scenario.model.kind_name()
    ));

    // Velocity: direct singular quadrature against the closed swirl.
    let mut worst = 0.0_f64;
    for &scale in &[0.3, 0.5, 2.0, 3.0] {
        for &th in &[0.4_f64, 1.9, 3.7, 5.3] {
            let x = Vec2::new(th.cos(), th.sin()).scale(scale * r_jump);
            let closed = velocity(&model, x).map_err(|e| fail("closed velocity", e))?;
            let quad = velocity_biot_savart(&model, x).map_err(|e| fail("velocity quadrature", e))?;
            worst = worst.max((quad - closed).norm() / closed.norm());
        }
    }
    table.push("velocity quadrature vs closed form (relative)", worst, 1e-5);

    // Interior gradient: principal-value symmetric part plus the local
    // spin must reassemble the closed-form gradient.
    let mut worst = 0.0_f64;
    for &scale in &[0.2, 0.5, 0.7] {
        for &th in &[0.9_f64, 4.1] {
            let x = Vec2::new(th.cos(), th.sin()).scale(scale * r_jump);
            let reference = reference_solution(&model, x).map_err(|e| fail("closed gradient", e))?;
            let sym = pv_symmetric_part(&model, x).map_err(|e| fail("gradient quadrature", e))?;
            let quad = sym.add(J.scale(0.5 * model.vorticity(x)));
            worst = worst.max(quad.sub(reference.grad_u).max_norm());
        }
    }
    table.push("interior gradient quadrature vs closed form", worst, 1e-4);

    // The corrector for the azimuthal direction field, against its closed
    // radial expression, on both sides of the jump.
    let corrector = azimuthal_corrector(&model);
    let mut worst_a = 0.0_f64;
    let mut worst_gamma = 0.0_f64;
    for &scale in &[0.85, 1.15] {
        for &th in &BAND_ANGLES {
            let x = Vec2::new(th.cos(), th.sin()).scale(scale * r_jump);
            let reference = reference_solution(&model, x).map_err(|e| fail("closed corrector", e))?;
            let a = patchlab::diagnostics::matrix_a(&corrector, x)
                .map_err(|e| fail("corrector matrix", e))?;
            worst_a = worst_a.max(a.sub(reference.a_matrix).max_norm());
            let gamma = corrected_gradient(&model, &corrector, x)
                .map_err(|e| fail("corrected gradient", e))?;
            worst_gamma = worst_gamma.max(gamma.sub(reference.gamma).max_norm());
        }
    }
    table.push("corrector matrix vs closed form", worst_a, 1e-12);
    table.push("corrected gradient (closed route) vs closed form", worst_gamma, 1e-9);

    // The quadrature route for the corrected gradient straddling the jump,
    // where the uncorrected gradient is discontinuous.
    let mut worst = 0.0_f64;
    for &scale in &[0.9, 1.1, 0.998, 1.002] {
        for &th in &BAND_ANGLES {
            let x = Vec2::new(th.cos(), th.sin()).scale(scale * r_jump);
            let reference = reference_solution(&model, x).map_err(|e| fail("closed corrector", e))?;
            let gamma = corrected_gradient_quadrature(&model, &corrector, x)
                .map_err(|e| fail("corrected gradient quadrature", e))?;
            worst = worst.max(gamma.sub(reference.gamma).max_norm());
        }
    }
    table.push("corrected gradient (quadrature route) vs closed form", worst, 1e-3);

    table.finish()
}

/// Azimuthal-Y corrector with a cutoff that is exactly 1 on every point
/// the suite touches: the checks stay clear of the origin by a fixed
/// fraction of the jump radius, so a constant cutoff is legitimate there.
fn azimuthal_corrector(model: &VorticityModel) -> CorrectorInput {
    let m = model.clone();
    CorrectorInput::new(
        YField::azimuthal_unit(),
        |_| 1.0,
        move |x| m.vorticity(x),
        // |Y| = 1 identically; half of it is the conventional floor.
        0.5,
    )
}

fn identities(scenario: &Scenario) -> CliResult<()> {
    let points = match &scenario.model {
        ModelSpec::Gaussian { support, .. } => golden_ring_points(12, 0.1 * support, 0.4 * support),
        ModelSpec::ShearSine { width } => {
            let mut pts = Vec::new();
            for &x1 in &[-0.9_f64, -0.3, 0.4, 1.0] {
                for &frac in &[-0.6_f64, 0.1, 0.5] {
                    pts.push(Vec2::new(x1, frac * width));
                }
            }
            pts
        }
        other => {
            return Err(scenario.config_err(
                "model.kind",
                format!(
                    "suite identities needs a smooth vorticity (gaussian or shear-sine), got {}",
                    other.kind_name()
                ),
            ))
        }
    };
    let model = scenario.build_model()?;
    let mut table = CheckTable::new(format!(
        "suite identities on {} ({})",
        scenario.path,
        scenario.model.kind_name()
    ));

    for (label, y_field) in [
        ("constant Y", YField::constant(Vec2::new(0.8, -0.6))),
        ("rotational Y", YField::rotational()),
    ] {
        let mut worst = 0.0_f64;
        for &x in &points {
            let identity = directional_gradient_identity(&model, &y_field, x)
                .map_err(|e| CliError::Check(format!("identities suite, {label}: {e}")))?;
            worst = worst.max(identity.residual);
        }
        table.push(
            format!("directional gradient identity residual, {label}"),
            worst,
            1e-6,
        );
    }

    table.finish()
}

fn golden_ring_points(count: usize, r_min: f64, r_max: f64) -> Vec<Vec2> {
    let golden = PI * (3.0 - 5.0_f64.sqrt());
    (0..count)
        .map(|k| {
            let r = r_min + (r_max - r_min) * k as f64 / (count - 1) as f64;
            let th = golden * k as f64;
            Vec2::new(r * th.cos(), r * th.sin())
        })
        .collect()
}
