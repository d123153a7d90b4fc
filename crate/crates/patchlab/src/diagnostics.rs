//! Serfati's corrector matrix A and the corrected gradient Γ = ∇u − ωA,
//! plus the estimators that certify its regularity: ∇u genuinely jumps
//! across a vorticity discontinuity, yet subtracting ω·A removes the jump,
//! and the discreteC^α seminorm of Γ stays bounded under refinement while
//! that of ∇u grows like h^{−α}. Certificates aggregate norm series over
//! checkpointed runs; envelope fits are attached for qualitative comparison
//! and are never asserted.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fields::{grad_velocity, pv_symmetric_part, VorticityModel, YField};
use crate::geometry::{Mat2, Vec2, J};
use crate::holder::{
    curve_c1alpha_norm, holder_estimate, seminorm_refinement_rate, ClosedCurve, FieldValues,
    HolderEstimate, SampledField,
};
use crate::kernels::CutoffProfile;
use crate::transport::lp_norm_on_cells;

/// Inputs of the corrector: the tangential field Y, a scalar cutoff χ
/// supported where Y is available, the vorticity evaluator for the same
/// time slice, and the floor below which |Y| is considered degenerate.
///
/// In a transported setting both χ and ω are compositions with the inverse
/// flow map (Lagrangian scalars); this type only consumes the evaluators,
/// so stationary closures and transported ones plug in identically.
pub struct CorrectorInput {
    pub y_field: YField,
    pub chi: Box<dyn Fn(Vec2) -> f64 + Send + Sync>,
    pub omega: Box<dyn Fn(Vec2) -> f64 + Send + Sync>,
    pub c_floor: f64,
}

impl CorrectorInput {
    pub fn new(
        y_field: YField,
        chi: impl Fn(Vec2) -> f64 + Send + Sync + 'static,
        omega: impl Fn(Vec2) -> f64 + Send + Sync + 'static,
        c_floor: f64,
    ) -> Self {
        assert!(c_floor > 0.0, "the vector floor must be strictly positive");
        CorrectorInput { y_field, chi: Box::new(chi), omega: Box::new(omega), c_floor }
    }
}

/// Default floor: half the smallest |Y| over the sample of the region
/// where the cutoff is active.
pub fn floor_from_samples(y_field: &YField, samples: &[Vec2]) -> f64 {
    assert!(!samples.is_empty(), "floor calibration needs at least one sample");
    let min = samples.iter().map(|&p| y_field.eval(p).norm()).fold(f64::INFINITY, f64::min);
    assert!(min > 0.0, "Y vanishes on the sampled region; no positive floor exists");
    0.5 * min
}

/// Smooth radial cutoff around the circle |x| = radius: identically 1
/// within delta/4 of it, identically 0 beyond delta/2, C^∞ in between.
/// Requires delta ≤ 2·radius so the cutoff vanishes at the origin (where
/// azimuthal direction fields are undefined).
pub fn boundary_cutoff(radius: f64, delta: f64) -> impl Fn(Vec2) -> f64 + Send + Sync + Clone {
    assert!(radius > 0.0 && delta > 0.0);
    assert!(delta <= 2.0 * radius, "cutoff must vanish at the origin");
    let profile = CutoffProfile::standard();
    move |x: Vec2| profile.shape((x.norm() - radius).abs() / (0.25 * delta))
}

/// A(x) = (χ/|Y|²)·[[Y¹Y², −(Y¹)²],[(Y²)², −Y¹Y²]].
///
/// Wherever χ vanishes the matrix is zero and Y is not evaluated at all —
/// the cutoff shields regions where the direction field is undefined (for
/// example, the azimuthal field at the origin).
pub fn matrix_a(input: &CorrectorInput, x: Vec2) -> Result<Mat2> {
    let chi = (input.chi)(x);
    if chi == 0.0 {
        return Ok(Mat2::ZERO);
    }
    let y = input.y_field.eval(x);
    let norm = y.norm();
    if norm < input.c_floor {
        return Err(Error::VectorFloorViolation { norm, floor: input.c_floor });
    }
    let scale = chi / y.norm_sq();
    let a = Mat2::new(
        scale * y.x1 * y.x2,
        -scale * y.x1 * y.x1,
        scale * y.x2 * y.x2,
        -scale * y.x1 * y.x2,
    );
    // Diagonal entries are the same product with opposite signs.
    assert!(a.trace() == 0.0);
    // |YᵢYⱼ| ≤ |Y|², so every entry is at most χ up to rounding.
    for entry in a.entries() {
        assert!(entry.abs() <= chi * (1.0 + 1e-12));
    }
    Ok(a)
}

/// Γ(x) = ∇u(x) − ω(x)·A(x), gradients by the model's preferred route
/// (closed forms where they exist).
pub fn corrected_gradient(
    model: &VorticityModel,
    input: &CorrectorInput,
    x: Vec2,
) -> Result<Mat2> {
    let grad = grad_velocity(model, x)?;
    let a = matrix_a(input, x)?;
    Ok(grad.sub(a.scale((input.omega)(x))))
}

/// Γ by the quadrature route: the principal-value symmetric part plus the
/// rotation part (ω/2)·J reassemble ∇u without touching the closed forms,
/// so comparing this against `corrected_gradient` (or a closed-form Γ)
/// cross-validates the singular quadrature. The rotation part uses the
/// model's own vorticity; the corrector term uses the input's evaluator —
/// the two coincide on a consistent time slice.
pub fn corrected_gradient_quadrature(
    model: &VorticityModel,
    input: &CorrectorInput,
    x: Vec2,
) -> Result<Mat2> {
    let sym = pv_symmetric_part(model, x)?;
    let grad = sym.add(J.scale(0.5 * model.vorticity(x)));
    let a = matrix_a(input, x)?;
    Ok(grad.sub(a.scale((input.omega)(x))))
}

/// Discrete L¹, L², and L^∞ norms of a scalar over quadrature cells.
#[derive(Debug, Clone, Copy)]
pub struct LpNorms {
    pub l1: f64,
    pub l2: f64,
    pub linf: f64,
}

/// One checkpoint's worth of sampled data: probe points with field values
/// for the norm estimators, the current material boundary polygon, and a
/// cell decomposition carrying vorticity values for the L^p norms.
#[derive(Debug, Clone)]
pub struct CertificateFrame {
    pub time: f64,
    /// Probe positions for the sup/Hölder estimates.
    pub points: Vec<Vec2>,
    /// Characteristic distance between neighboring probes.
    pub spacing: f64,
    /// ∇u at each probe.
    pub grad_u: Vec<Mat2>,
    /// Y at each probe.
    pub y_values: Vec<Vec2>,
    /// Γ = ∇u − ωA at each probe.
    pub gamma: Vec<Mat2>,
    /// Advected boundary polygon (empty when the run carries none).
    pub boundary: Vec<Vec2>,
    /// Vorticity per quadrature cell.
    pub omega_cells: Vec<f64>,
    /// Cell areas matching `omega_cells`.
    pub cell_areas: Vec<f64>,
}

/// Norm series entry at one checkpoint.
#[derive(Debug, Clone)]
pub struct DiagnosticsRecord {
    pub time: f64,
    pub grad_u_sup: f64,
    pub y_holder: HolderEstimate,
    pub gamma_holder: HolderEstimate,
    pub ygradu_holder: HolderEstimate,
    pub area: f64,
    pub lp_norms: LpNorms,
}

/// Least-squares fit of a growth envelope to the sup-gradient series,
/// reported for qualitative inspection only.
#[derive(Debug, Clone, Copy)]
pub struct EnvelopeFit {
    pub rate: f64,
    pub amplitude: f64,
    pub residual: f64,
}

/// Certificate over a run: per-checkpoint records plus fitted exponential
/// and doubly-exponential envelopes of sup |∇u|.
#[derive(Debug, Clone)]
pub struct CertificateSummary {
    pub records: Vec<DiagnosticsRecord>,
    pub exponential: EnvelopeFit,
    pub doubly_exponential: EnvelopeFit,
}

fn polygon_area(nodes: &[Vec2]) -> f64 {
    if nodes.len() < 3 {
        return 0.0;
    }
    let n = nodes.len();
    let twice: f64 = (0..n).map(|i| nodes[i].cross(nodes[(i + 1) % n])).sum();
    0.5 * twice.abs()
}

/// Slope, intercept, and root-mean-square residual of the least-squares
/// line through (x, y) pairs.
fn line_fit(points: &[(f64, f64)]) -> (f64, f64, f64) {
    let n = points.len() as f64;
    let sx: f64 = points.iter().map(|p| p.0).sum();
    let sy: f64 = points.iter().map(|p| p.1).sum();
    let sxx: f64 = points.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = points.iter().map(|p| p.0 * p.1).sum();
    let denom = n * sxx - sx * sx;
    assert!(denom > 0.0, "line fit needs at least two distinct abscissae");
    let slope = (n * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / n;
    let mse: f64 = points
        .iter()
        .map(|&(x, y)| {
            let r = y - slope * x - intercept;
            r * r
        })
        .sum::<f64>()
        / n;
    (slope, intercept, mse.sqrt())
}

/// Fits f(t) ≈ amplitude·exp(rate·t) by least squares on log f; series
/// values ≤ 0 are excluded, and fewer than two usable points yield the
/// all-zero fit.
pub fn exponential_envelope(times: &[f64], values: &[f64]) -> EnvelopeFit {
    assert!(times.len() == values.len());
    let pts: Vec<(f64, f64)> =
        times.iter().zip(values).filter(|&(_, &v)| v > 0.0).map(|(&t, &v)| (t, v.ln())).collect();
    if pts.len() < 2 {
        return EnvelopeFit { rate: 0.0, amplitude: 0.0, residual: 0.0 };
    }
    let (rate, intercept, residual) = line_fit(&pts);
    EnvelopeFit { rate, amplitude: intercept.exp(), residual }
}

/// Fits f(t) ≈ exp(amplitude·exp(rate·t)) by least squares on
/// log log f, over the samples where log f is positive. Any additive
/// normalization inside the outer logarithm would bias the rate, so only
/// super-unit samples participate; series never exceeding 1 (no
/// double-exponential growth to speak of) yield the all-zero fit.
pub fn doubly_exponential_envelope(times: &[f64], values: &[f64]) -> EnvelopeFit {
    assert!(times.len() == values.len());
    let pts: Vec<(f64, f64)> = times
        .iter()
        .zip(values)
        .filter(|&(_, &v)| v > 1.0)
        .map(|(&t, &v)| (t, v.ln().ln()))
        .collect();
    if pts.len() < 2 {
        return EnvelopeFit { rate: 0.0, amplitude: 0.0, residual: 0.0 };
    }
    let (rate, intercept, residual) = line_fit(&pts);
    EnvelopeFit { rate, amplitude: intercept.exp(), residual }
}

fn frame_record(frame: &CertificateFrame, alpha: f64) -> Result<DiagnosticsRecord> {
    assert!(frame.points.len() == frame.grad_u.len());
    assert!(frame.points.len() == frame.y_values.len());
    assert!(frame.points.len() == frame.gamma.len());
    assert!(frame.omega_cells.len() == frame.cell_areas.len());

    let grad_u_sup = frame.grad_u.iter().map(|m| m.max_norm()).fold(0.0, f64::max);
    let y_holder = holder_estimate(
        &SampledField::new(
            frame.points.clone(),
            FieldValues::Vector(frame.y_values.clone()),
            frame.spacing,
        ),
        alpha,
    )?;
    let gamma_holder = holder_estimate(
        &SampledField::new(
            frame.points.clone(),
            FieldValues::Matrix(frame.gamma.clone()),
            frame.spacing,
        ),
        alpha,
    )?;
    let ygradu: Vec<Vec2> =
        frame.grad_u.iter().zip(&frame.y_values).map(|(m, &y)| m.apply(y)).collect();
    let ygradu_holder = holder_estimate(
        &SampledField::new(frame.points.clone(), FieldValues::Vector(ygradu), frame.spacing),
        alpha,
    )?;
    let area = polygon_area(&frame.boundary);
    let lp_norms = LpNorms {
        l1: lp_norm_on_cells(&frame.omega_cells, &frame.cell_areas, 1.0),
        l2: lp_norm_on_cells(&frame.omega_cells, &frame.cell_areas, 2.0),
        linf: frame.omega_cells.iter().map(|v| v.abs()).fold(0.0, f64::max),
    };

    let record = DiagnosticsRecord {
        time: frame.time,
        grad_u_sup,
        y_holder,
        gamma_holder,
        ygradu_holder,
        area,
        lp_norms,
    };
    assert!(record.grad_u_sup.is_finite());
    assert!(record.y_holder.seminorm.is_finite() && record.y_holder.sup_norm.is_finite());
    assert!(record.gamma_holder.seminorm.is_finite() && record.gamma_holder.sup_norm.is_finite());
    assert!(record.ygradu_holder.seminorm.is_finite() && record.ygradu_holder.sup_norm.is_finite());
    assert!(record.area.is_finite());
    assert!(
        record.lp_norms.l1.is_finite()
            && record.lp_norms.l2.is_finite()
            && record.lp_norms.linf.is_finite()
    );
    Ok(record)
}

/// Per-checkpoint norm estimates over a run, with growth-envelope fits of
/// the sup-gradient series attached. Checkpoints are independent snapshots
/// and are processed in parallel.
pub fn regularity_certificate(
    frames: &[CertificateFrame],
    alpha: f64,
) -> Result<CertificateSummary> {
    assert!(!frames.is_empty(), "certificate needs at least one checkpoint");
    for pair in frames.windows(2) {
        assert!(pair[0].time < pair[1].time, "checkpoint times must be strictly increasing");
    }
    let records = frames
        .par_iter()
        .map(|frame| frame_record(frame, alpha))
        .collect::<Result<Vec<_>>>()?;
    let times: Vec<f64> = records.iter().map(|r| r.time).collect();
    let sups: Vec<f64> = records.iter().map(|r| r.grad_u_sup).collect();
    Ok(CertificateSummary {
        records,
        exponential: exponential_envelope(&times, &sups),
        doubly_exponential: doubly_exponential_envelope(&times, &sups),
    })
}

/// Refinement rates of the discrete Ċ^α seminorm on a band straddling the
/// vorticity interface: `rate_raw` for ∇u (≈ α when the gradient jumps —
/// one straddling pair at distance h contributes h^{−α}) and
/// `rate_corrected` for Γ (≈ 0 when the corrector removes the jump).
#[derive(Debug, Clone, Copy)]
pub struct RefinementDichotomy {
    pub rate_raw: f64,
    pub rate_corrected: f64,
}

/// Half-width of the sampling band around the interface. Model geometries
/// here are O(1) (unit patches, unit strips); spacings must resolve the
/// band several times over.
const BAND_HALF_WIDTH: f64 = 0.1;

/// Offsets closer to the interface than this are dropped: the gradient
/// genuinely jumps there and evaluation inside the snap band is refused.
const BAND_SKIP: f64 = 1e-5;

/// The line along which the band is sampled: a point on the interface and
/// the crossing direction.
fn band_line(model: &VorticityModel) -> (Vec2, Vec2) {
    // A direction away from the coordinate axes, so that no matrix entry
    // of the jump degenerates by symmetry.
    let direction = Vec2::new(0.3f64.cos(), 0.3f64.sin());
    match model {
        VorticityModel::Radial { jumps, support_radius, .. } => {
            let radius = jumps
                .iter()
                .copied()
                .max_by(f64::total_cmp)
                .unwrap_or(0.5 * support_radius);
            (direction.scale(radius), direction)
        }
        VorticityModel::Smooth { support_radius, .. } => {
            (direction.scale(0.5 * support_radius), direction)
        }
        VorticityModel::Patch { .. } => {
            // Bisect along the ray from the (interior) origin to the first
            // point where the indicator switches off.
            assert!(
                model.vorticity(Vec2::ZERO) != 0.0,
                "patch band sampling expects the origin inside the patch"
            );
            let mut lo = 0.0f64;
            let mut hi = 2.0 * model.support_radius();
            assert!(model.vorticity(direction.scale(hi)) == 0.0);
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                if model.vorticity(direction.scale(mid)) != 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            (direction.scale(0.5 * (lo + hi)), direction)
        }
        VorticityModel::Shear { jumps, upper, .. } => {
            let level = jumps.iter().copied().max_by(f64::total_cmp).unwrap_or(*upper);
            (Vec2::new(0.3, level), Vec2::new(0.0, 1.0))
        }
    }
}

/// Samples ∇u and Γ on a line crossing the interface at each spacing and
/// fits the seminorm refinement rates of both fields.
pub fn boundary_refinement_study(
    model: &VorticityModel,
    input: &CorrectorInput,
    alpha: f64,
    spacings: &[f64],
) -> Result<RefinementDichotomy> {
    assert!(spacings.iter().all(|&h| h > 0.0 && h < 0.5 * BAND_HALF_WIDTH));
    let (center, direction) = band_line(model);

    let mut raw_fields = Vec::with_capacity(spacings.len());
    let mut corrected_fields = Vec::with_capacity(spacings.len());
    for &h in spacings {
        let mut points = Vec::new();
        let mut offset = -BAND_HALF_WIDTH + 0.5 * h;
        while offset < BAND_HALF_WIDTH {
            if offset.abs() > BAND_SKIP {
                points.push(center + direction.scale(offset));
            }
            offset += h;
        }
        let raw = points
            .iter()
            .map(|&p| grad_velocity(model, p))
            .collect::<Result<Vec<_>>>()?;
        let corrected = points
            .iter()
            .map(|&p| corrected_gradient(model, input, p))
            .collect::<Result<Vec<_>>>()?;
        raw_fields.push(SampledField::new(points.clone(), FieldValues::Matrix(raw), h));
        corrected_fields.push(SampledField::new(points, FieldValues::Matrix(corrected), h));
    }

    let index_of = |h: f64| -> usize {
        spacings.iter().position(|&s| s == h).expect("rate fit queries only the given spacings")
    };
    let raw_lookup = |h: f64| raw_fields[index_of(h)].clone();
    let corrected_lookup = |h: f64| corrected_fields[index_of(h)].clone();
    let rate_raw = seminorm_refinement_rate(&raw_lookup, alpha, spacings)?.rate;
    let rate_corrected = seminorm_refinement_rate(&corrected_lookup, alpha, spacings)?.rate;
    Ok(RefinementDichotomy { rate_raw, rate_corrected })
}

/// C^{1+α} norm of an advected level curve at each checkpoint. Fails with
/// a degenerate-curve error if the markers have collapsed or the polygon
/// self-intersects.
pub fn level_set_regularity(
    checkpoints: &[(f64, Vec<Vec2>)],
    alpha: f64,
) -> Result<Vec<(f64, f64)>> {
    let mut series = Vec::with_capacity(checkpoints.len());
    for (time, nodes) in checkpoints {
        let curve = ClosedCurve::new(nodes.clone())?;
        let norm = curve_c1alpha_norm(&curve, alpha)?;
        assert!(norm.is_finite());
        series.push((*time, norm));
    }
    Ok(series)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{polygon_grad_velocity, reference_solution, velocity};
    use crate::transport::evolve_patch_contour;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn assert_mat_close(a: Mat2, b: Mat2, tol: f64) {
        assert!(
            a.sub(b).max_norm() <= tol,
            "matrices differ by {:.3e} > {:.1e}",
            a.sub(b).max_norm(),
            tol
        );
    }

    fn top_hat() -> VorticityModel {
        VorticityModel::circular_patch()
    }

    /// χ ≡ 1 with the azimuthal direction field and unit vorticity floor
    /// margin: the stationary radial setup.
    fn radial_input(model_vorticity: impl Fn(Vec2) -> f64 + Send + Sync + 'static) -> CorrectorInput {
        CorrectorInput::new(YField::azimuthal_unit(), |_| 1.0, model_vorticity, 0.5)
    }

    #[test]
    fn matrix_a_shear_direction() {
        let input = CorrectorInput::new(YField::constant(Vec2::new(1.0, 0.0)), |_| 1.0, |_| 1.0, 0.5);
        let a = matrix_a(&input, Vec2::new(0.7, -0.3)).unwrap();
        assert_mat_close(a, Mat2::new(0.0, -1.0, 0.0, 0.0), 1e-15);
    }

    #[test]
    fn matrix_a_azimuthal_direction_matches_radial_reference() {
        let model = top_hat();
        let input = radial_input(|_| 0.0);
        let a = matrix_a(&input, Vec2::new(2.0, 0.0)).unwrap();
        assert_mat_close(a, Mat2::new(0.0, 0.0, 1.0, 0.0), 1e-15);
        for &x in &[Vec2::new(0.5, -0.8), Vec2::new(-1.3, 0.4), Vec2::new(0.2, 0.5)] {
            let expected = reference_solution(&model, x).unwrap().a_matrix;
            assert_mat_close(matrix_a(&input, x).unwrap(), expected, 1e-14);
        }
    }

    #[test]
    fn vanishing_cutoff_yields_zero_without_probing_y() {
        // The azimuthal field asserts r > 0; a cutoff vanishing at the
        // origin must shield it there.
        let chi = boundary_cutoff(1.0, 0.8);
        let input = CorrectorInput::new(YField::azimuthal_unit(), chi, |_| 1.0, 0.5);
        assert_mat_close(matrix_a(&input, Vec2::ZERO).unwrap(), Mat2::ZERO, 0.0);

        let poisoned = YField {
            evaluator: Box::new(|_| panic!("Y must not be evaluated where the cutoff vanishes")),
            label: "poisoned".into(),
        };
        let shielded = CorrectorInput::new(poisoned, |_| 0.0, |_| 1.0, 0.5);
        assert_mat_close(matrix_a(&shielded, Vec2::new(3.0, 4.0)).unwrap(), Mat2::ZERO, 0.0);
    }

    #[test]
    fn floor_violation_is_reported() {
        let input =
            CorrectorInput::new(YField::constant(Vec2::new(1e-3, 0.0)), |_| 1.0, |_| 1.0, 0.5);
        let err = matrix_a(&input, Vec2::new(1.0, 1.0)).unwrap_err();
        match err {
            Error::VectorFloorViolation { norm, floor } => {
                assert_abs_diff_eq!(norm, 1e-3, epsilon = 1e-12);
                assert_abs_diff_eq!(floor, 0.5, epsilon = 1e-12);
            }
            other => panic!("expected a floor violation, got {other:?}"),
        }
    }

    #[test]
    fn boundary_cutoff_plateaus() {
        let chi = boundary_cutoff(1.0, 0.8);
        // 1 within delta/4 = 0.2 of the circle, 0 beyond delta/2 = 0.4.
        assert_eq!(chi(Vec2::new(1.0, 0.0)), 1.0);
        assert_eq!(chi(Vec2::new(1.19, 0.0)), 1.0);
        assert_eq!(chi(Vec2::new(0.81, 0.0)), 1.0);
        assert_eq!(chi(Vec2::new(1.41, 0.0)), 0.0);
        assert_eq!(chi(Vec2::new(0.0, 0.0)), 0.0);
        let mid = chi(Vec2::new(1.3, 0.0));
        assert!(0.0 < mid && mid < 1.0);
    }

    #[test]
    fn floor_from_samples_halves_the_minimum() {
        let y = YField::rotational();
        let samples = vec![Vec2::new(2.0, 0.0), Vec2::new(0.0, -3.0), Vec2::new(1.0, 1.0)];
        assert_abs_diff_eq!(floor_from_samples(&y, &samples), 0.5 * 2.0f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn corrected_gradient_vanishes_for_shear() {
        let model =
            VorticityModel::shear(|s| (PI * s).sin(), -1.0, 1.0, vec![]).unwrap();
        let input = CorrectorInput::new(
            YField::constant(Vec2::new(1.0, 0.0)),
            |_| 1.0,
            move |x: Vec2| {
                if (-1.0..=1.0).contains(&x.x2) {
                    (PI * x.x2).sin()
                } else {
                    0.0
                }
            },
            0.5,
        );
        for &x in &[Vec2::new(0.0, 0.25), Vec2::new(-2.0, -0.6), Vec2::new(5.0, 0.9)] {
            let gamma = corrected_gradient(&model, &input, x).unwrap();
            assert_mat_close(gamma, Mat2::ZERO, 1e-15);
        }
    }

    #[test]
    fn corrected_gradient_matches_radial_closed_form_near_the_jump() {
        let model = top_hat();
        let vorticity = move |x: Vec2| if x.norm() < 1.0 { 1.0 } else { 0.0 };
        let input = CorrectorInput::new(
            YField::azimuthal_unit(),
            boundary_cutoff(1.0, 0.8),
            vorticity,
            0.5,
        );
        for &r in &[0.85, 0.93, 1.07, 1.15] {
            for &th in &[0.3f64, 2.1, 4.4] {
                let x = Vec2::new(r * th.cos(), r * th.sin());
                let expected = reference_solution(&model, x).unwrap().gamma;
                // Closed-form route: identical algebra, so the match is tight.
                assert_mat_close(corrected_gradient(&model, &input, x).unwrap(), expected, 1e-12);
                // Quadrature route: principal value + rotation part.
                assert_mat_close(
                    corrected_gradient_quadrature(&model, &input, x).unwrap(),
                    expected,
                    1e-3,
                );
            }
        }
    }

    #[test]
    fn correction_removes_the_gradient_jump() {
        let model = top_hat();
        let input = radial_input(|x: Vec2| if x.norm() < 1.0 { 1.0 } else { 0.0 });
        let inside = Vec2::new(0.99, 0.0);
        let outside = Vec2::new(1.01, 0.0);
        let raw_jump = grad_velocity(&model, inside)
            .unwrap()
            .sub(grad_velocity(&model, outside).unwrap())
            .max_norm();
        let corrected_jump = corrected_gradient(&model, &input, inside)
            .unwrap()
            .sub(corrected_gradient(&model, &input, outside).unwrap())
            .max_norm();
        assert!(raw_jump > 0.9, "raw gradient jump {raw_jump:.3} should be near 1");
        assert!(corrected_jump < 0.02, "corrected jump {corrected_jump:.3e} should be tiny");
    }

    #[test]
    fn zero_cutoff_returns_the_gradient_itself() {
        let model = VorticityModel::smooth(|x: Vec2| (-x.norm_sq()).exp(), 6.0);
        let input = CorrectorInput::new(
            YField::azimuthal_unit(),
            |_| 0.0,
            |x: Vec2| (-x.norm_sq()).exp(),
            0.5,
        );
        let x = Vec2::new(0.7, -0.4);
        let gamma = corrected_gradient(&model, &input, x).unwrap();
        let grad = grad_velocity(&model, x).unwrap();
        assert_mat_close(gamma, grad, 0.0);
    }

    #[test]
    fn antisymmetric_part_recovers_the_vorticity() {
        // Closed forms only: these are independent of the quadrature route
        // that reconstructs ∇u from (ω/2)·J in the first place.
        let smooth_radial = VorticityModel::radial(
            |r| if r < 1.0 { (1.0 - r * r) * (1.0 - r * r) } else { 0.0 },
            vec![],
            1.0,
        );
        for &x in &[Vec2::new(0.3, 0.2), Vec2::new(-0.5, 0.6), Vec2::new(1.5, -0.2)] {
            let grad = grad_velocity(&smooth_radial, x).unwrap();
            let spin = grad.antisymmetric_part();
            assert_mat_close(spin, J.scale(0.5 * smooth_radial.vorticity(x)), 1e-12);
        }
        let shear = VorticityModel::shear(|s| (PI * s).sin(), -1.0, 1.0, vec![]).unwrap();
        for &x in &[Vec2::new(0.4, 0.25), Vec2::new(-1.0, -0.75)] {
            let grad = grad_velocity(&shear, x).unwrap();
            assert_mat_close(grad.antisymmetric_part(), J.scale(0.5 * shear.vorticity(x)), 1e-15);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn matrix_a_is_traceless_with_entries_bounded_by_chi(
            y1 in -5.0f64..5.0,
            y2 in -5.0f64..5.0,
            chi in 0.0f64..1.0,
            x1 in -2.0f64..2.0,
            x2 in -2.0f64..2.0,
        ) {
            prop_assume!(y1 * y1 + y2 * y2 >= 0.25);
            let input = CorrectorInput::new(
                YField::constant(Vec2::new(y1, y2)),
                move |_| chi,
                |_| 1.0,
                0.5,
            );
            let a = matrix_a(&input, Vec2::new(x1, x2)).unwrap();
            prop_assert_eq!(a.trace(), 0.0);
            for entry in a.entries() {
                prop_assert!(entry.abs() <= chi * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn refinement_dichotomy_for_the_circular_patch() {
        let model = top_hat();
        let input = radial_input(|x: Vec2| if x.norm() < 1.0 { 1.0 } else { 0.0 });
        let spacings = [1.0 / 64.0, 1.0 / 128.0, 1.0 / 256.0, 1.0 / 512.0];
        let rates = boundary_refinement_study(&model, &input, 0.5, &spacings).unwrap();
        assert!(
            (0.4..=0.6).contains(&rates.rate_raw),
            "raw seminorm should grow at the Hölder rate: {:.3}",
            rates.rate_raw
        );
        assert!(
            (-0.2..=0.2).contains(&rates.rate_corrected),
            "corrected seminorm should stay bounded: {:.3}",
            rates.rate_corrected
        );
    }

    #[test]
    fn refinement_rates_stay_flat_without_a_jump() {
        let model = VorticityModel::radial(
            |r| if r < 1.0 { (1.0 - r * r) * (1.0 - r * r) } else { 0.0 },
            vec![],
            1.0,
        );
        let g = |x: Vec2| {
            let r2 = x.norm_sq();
            if r2 < 1.0 {
                (1.0 - r2) * (1.0 - r2)
            } else {
                0.0
            }
        };
        let input = radial_input(g);
        let spacings = [1.0 / 64.0, 1.0 / 128.0, 1.0 / 256.0, 1.0 / 512.0];
        let rates = boundary_refinement_study(&model, &input, 0.5, &spacings).unwrap();
        assert!(rates.rate_raw.abs() <= 0.1, "no jump, no growth: {:.3}", rates.rate_raw);
        assert!(rates.rate_corrected.abs() <= 0.1, "{:.3}", rates.rate_corrected);
    }

    /// Probe ring, rotated boundary, and cell data for the stationary
    /// top-hat run at time t; every sampled quantity is a rotation of the
    /// t = 0 data, so the certificate series must be constant.
    fn stationary_frame(model: &VorticityModel, input: &CorrectorInput, t: f64) -> CertificateFrame {
        let probe_radius = 1.15;
        // Angular speed G(r)/r² of the stationary radial flow.
        let spin = |r: f64| 0.5_f64.min(0.5 * r * r) / (r * r);
        // Matrix entries vary like cos/sin(2θ) along the ring; sampling a
        // rotating maximum on n probes wobbles by 1 − cos(2π/n), so n must
        // be large enough to keep that under the 1% drift budget.
        let n_probes = 96;
        let probes: Vec<Vec2> = (0..n_probes)
            .map(|i| {
                let th = 2.0 * PI * i as f64 / n_probes as f64 + t * spin(probe_radius);
                Vec2::new(probe_radius * th.cos(), probe_radius * th.sin())
            })
            .collect();
        let spacing = 2.0 * probe_radius * (PI / n_probes as f64).sin();
        let grad_u: Vec<Mat2> =
            probes.iter().map(|&p| grad_velocity(model, p).unwrap()).collect();
        let y_values: Vec<Vec2> = probes.iter().map(|&p| input.y_field.eval(p)).collect();
        let gamma: Vec<Mat2> =
            probes.iter().map(|&p| corrected_gradient(model, input, p).unwrap()).collect();
        let boundary: Vec<Vec2> = (0..128)
            .map(|i| {
                let th = 2.0 * PI * i as f64 / 128.0 + t * spin(1.0);
                Vec2::new(th.cos(), th.sin())
            })
            .collect();
        let cells = 10usize;
        let width = 4.0 / cells as f64;
        let mut omega_cells = Vec::new();
        let mut cell_areas = Vec::new();
        for j in 0..cells {
            for i in 0..cells {
                let center = Vec2::new(
                    -2.0 + width * (i as f64 + 0.5),
                    -2.0 + width * (j as f64 + 0.5),
                );
                omega_cells.push(model.vorticity(center));
                cell_areas.push(width * width);
            }
        }
        CertificateFrame {
            time: t,
            points: probes,
            spacing,
            grad_u,
            y_values,
            gamma,
            boundary,
            omega_cells,
            cell_areas,
        }
    }

    #[test]
    fn certificate_series_is_constant_for_the_stationary_patch() {
        let model = top_hat();
        let input = CorrectorInput::new(
            YField::azimuthal_unit(),
            boundary_cutoff(1.0, 0.8),
            |x: Vec2| if x.norm() < 1.0 { 1.0 } else { 0.0 },
            0.5,
        );
        let frames: Vec<CertificateFrame> =
            [0.0, 0.5, 1.0].iter().map(|&t| stationary_frame(&model, &input, t)).collect();
        let summary = regularity_certificate(&frames, 0.5).unwrap();
        assert_eq!(summary.records.len(), 3);
        let base = &summary.records[0];
        assert!(base.grad_u_sup > 0.0 && base.area > 0.0);
        for record in &summary.records[1..] {
            let drift = |current: f64, start: f64| (current - start).abs() <= 0.01 * start.abs();
            assert!(drift(record.grad_u_sup, base.grad_u_sup));
            assert!(drift(record.y_holder.sup_norm, base.y_holder.sup_norm));
            assert!(drift(record.y_holder.seminorm, base.y_holder.seminorm));
            assert!(drift(record.gamma_holder.seminorm, base.gamma_holder.seminorm));
            assert!(drift(record.ygradu_holder.seminorm, base.ygradu_holder.seminorm));
            assert!(drift(record.area, base.area));
            assert!(drift(record.lp_norms.l1, base.lp_norms.l1));
            assert!(drift(record.lp_norms.l2, base.lp_norms.l2));
            assert!(drift(record.lp_norms.linf, base.lp_norms.linf));
        }
        // A stationary series fits a flat envelope.
        assert!(summary.exponential.rate.abs() < 0.02);
        assert!(summary.exponential.residual < 0.02);
    }

    #[test]
    fn certificate_reports_zero_sup_for_the_rest_state() {
        let ring: Vec<Vec2> = (0..16)
            .map(|i| {
                let th = 2.0 * PI * i as f64 / 16.0;
                Vec2::new(th.cos(), th.sin())
            })
            .collect();
        let frames: Vec<CertificateFrame> = [0.0, 1.0]
            .iter()
            .map(|&t| CertificateFrame {
                time: t,
                points: ring.clone(),
                spacing: 2.0 * (PI / 16.0).sin(),
                grad_u: vec![Mat2::ZERO; ring.len()],
                y_values: ring.iter().map(|&p| p.perp()).collect(),
                gamma: vec![Mat2::ZERO; ring.len()],
                boundary: vec![],
                omega_cells: vec![0.0; 4],
                cell_areas: vec![1.0; 4],
            })
            .collect();
        let summary = regularity_certificate(&frames, 0.5).unwrap();
        for record in &summary.records {
            assert_eq!(record.grad_u_sup, 0.0);
            assert_eq!(record.area, 0.0);
            assert_eq!(record.lp_norms.linf, 0.0);
        }
        // No positive values to fit: the envelope degenerates to zero.
        assert_eq!(summary.exponential.rate, 0.0);
        assert_eq!(summary.doubly_exponential.rate, 0.0);
    }

    #[test]
    #[should_panic(expected = "strictly increasing")]
    fn certificate_rejects_time_regressions() {
        let model = top_hat();
        let input = radial_input(|x: Vec2| if x.norm() < 1.0 { 1.0 } else { 0.0 });
        let frame = stationary_frame(&model, &input, 0.5);
        let _ = regularity_certificate(&[frame.clone(), frame], 0.5);
    }

    #[test]
    fn certificate_for_an_advected_ellipse_stays_finite() {
        let nodes: Vec<Vec2> = (0..64)
            .map(|i| {
                let th = 2.0 * PI * i as f64 / 64.0;
                Vec2::new(1.2 * th.cos(), 0.8 * th.sin())
            })
            .collect();
        let dt = 5e-3;
        let mut current = nodes;
        let mut frames = Vec::new();
        for step_block in 0..3 {
            let t = 0.5 * step_block as f64;
            if step_block > 0 {
                current = evolve_patch_contour(current, 1.0, dt, 100, &mut []);
            }
            let probes: Vec<Vec2> = (0..16)
                .map(|i| {
                    let th = 2.0 * PI * i as f64 / 16.0;
                    Vec2::new(2.0 * th.cos(), 2.0 * th.sin())
                })
                .collect();
            let grad_u: Vec<Mat2> =
                probes.iter().map(|&p| polygon_grad_velocity(&current, 1.0, p)).collect();
            let y_values: Vec<Vec2> = probes.iter().map(|&p| YField::azimuthal_unit().eval(p)).collect();
            // The probes sit outside the patch where ω = 0, so Γ = ∇u there.
            let gamma = grad_u.clone();
            let patch_now =
                VorticityModel::patch(ClosedCurve::new(current.clone()).unwrap(), 1.0);
            let cells = 10usize;
            let width = 4.0 / cells as f64;
            let mut omega_cells = Vec::new();
            let mut cell_areas = Vec::new();
            for j in 0..cells {
                for i in 0..cells {
                    let center = Vec2::new(
                        -2.0 + width * (i as f64 + 0.5),
                        -2.0 + width * (j as f64 + 0.5),
                    );
                    omega_cells.push(patch_now.vorticity(center));
                    cell_areas.push(width * width);
                }
            }
            frames.push(CertificateFrame {
                time: t,
                points: probes,
                spacing: 2.0 * 2.0 * (PI / 16.0).sin(),
                grad_u,
                y_values,
                gamma,
                boundary: current.clone(),
                omega_cells,
                cell_areas,
            });
        }
        let summary = regularity_certificate(&frames, 0.5).unwrap();
        let base_area = summary.records[0].area;
        assert_abs_diff_eq!(base_area, 1.2 * 0.8 * PI, epsilon = 0.01);
        for record in &summary.records {
            // frame_record already asserts finiteness; spot-check scale.
            assert!(record.grad_u_sup > 0.0 && record.grad_u_sup < 10.0);
            assert!(
                (record.area - base_area).abs() <= 1e-3 * base_area,
                "area drifted by {:.3e}",
                (record.area - base_area).abs() / base_area
            );
        }
    }

    #[test]
    fn envelope_fit_recovers_a_pure_exponential() {
        let times: Vec<f64> = (0..9).map(|i| 0.25 * i as f64).collect();
        let values: Vec<f64> = times.iter().map(|&t| 2.0 * (0.3 * t).exp()).collect();
        let fit = exponential_envelope(&times, &values);
        assert_abs_diff_eq!(fit.rate, 0.3, epsilon = 1e-10);
        assert_abs_diff_eq!(fit.amplitude, 2.0, epsilon = 1e-10);
        assert!(fit.residual < 1e-10);
    }

    #[test]
    fn doubly_exponential_fit_beats_the_single_fit_on_doubly_exponential_data() {
        let times: Vec<f64> = (0..9).map(|i| 1.0 + 0.25 * i as f64).collect();
        let values: Vec<f64> = times.iter().map(|&t| t.exp().exp()).collect();
        let single = exponential_envelope(&times, &values);
        let double = doubly_exponential_envelope(&times, &values);
        assert_abs_diff_eq!(double.rate, 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(double.amplitude, 1.0, epsilon = 1e-10);
        assert!(double.residual < 1e-10);
        assert!(
            double.residual < single.residual,
            "doubly-exponential data should prefer the doubly-exponential fit \
             ({:.3e} vs {:.3e})",
            double.residual,
            single.residual
        );
    }

    #[test]
    fn level_curve_norm_is_preserved_by_rotation() {
        let circle = |phase: f64| -> Vec<Vec2> {
            (0..128)
                .map(|i| {
                    let th = 2.0 * PI * i as f64 / 128.0 + phase;
                    Vec2::new(th.cos(), th.sin())
                })
                .collect()
        };
        // Stationary circular patch boundary: the advected curve at t = 1
        // is the initial circle rotated by the boundary angular speed 1/2.
        let series =
            level_set_regularity(&[(0.0, circle(0.0)), (1.0, circle(0.5))], 0.5).unwrap();
        let (.., base) = series[0];
        let (.., later) = series[1];
        assert!((later - base).abs() <= 0.02 * base);

        // Rest state: the very same nodes, hence the very same norm.
        let frozen =
            level_set_regularity(&[(0.0, circle(0.3)), (2.0, circle(0.3))], 0.5).unwrap();
        assert_eq!(frozen[0].1, frozen[1].1);
    }

    #[test]
    fn level_curve_norm_is_stable_under_node_refinement() {
        let advected = |n: usize| -> Vec<Vec2> {
            let nodes: Vec<Vec2> = (0..n)
                .map(|i| {
                    let th = 2.0 * PI * i as f64 / n as f64;
                    Vec2::new(1.2 * th.cos(), 0.8 * th.sin())
                })
                .collect();
            evolve_patch_contour(nodes, 1.0, 5e-3, 200, &mut [])
        };
        let coarse = level_set_regularity(&[(1.0, advected(128))], 0.5).unwrap()[0].1;
        let fine = level_set_regularity(&[(1.0, advected(512))], 0.5).unwrap()[0].1;
        assert!(coarse.is_finite() && fine.is_finite());
        let ratio = (fine / coarse).max(coarse / fine);
        assert!(ratio <= 1.5, "norm ratio across refinement: {ratio:.3}");
    }

    #[test]
    fn collapsed_markers_report_a_degenerate_curve() {
        let collapsed = vec![Vec2::new(0.3, 0.3); 12];
        let err = level_set_regularity(&[(0.0, collapsed)], 0.5).unwrap_err();
        assert!(matches!(err, Error::DegenerateCurve(_)));
    }
}
