//! Vorticity models with velocity and velocity-gradient evaluation:
//! closed forms for radial and shear vorticity, contour reduction for
//! uniform patches, Biot-Savart quadrature for smooth data, and the
//! directional-derivative identity connecting them.

use crate::error::{Error, Result};
use crate::geometry::{Mat2, Vec2, J};
use crate::holder::ClosedCurve;
use crate::kernels::{
    biot_savart_kernel, default_exclusion_radii, extrapolate_sweep, grad_biot_savart,
    pv_transform, KernelSample,
};
use crate::quadrature::{gauss_legendre, geomspace, integrate_panels, linspace};
use crate::tolerances::{PV_DEFAULT_EXCLUSION, SNAP_TOLERANCE_FACTOR};
use std::sync::Arc;

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// How far the truncated shear strip extends in y₁ before Richardson
/// extrapolation; the tail decays like 1/L because the profile has zero
/// mean.
const SHEAR_TRUNCATION: f64 = 10.0;

/// Compactly supported (or strip-type) vorticity with enough structure
/// to evaluate velocities both in closed form and by quadrature.
#[derive(Clone)]
pub enum VorticityModel {
    /// ω(x) = g(|x|); `jumps` lists radii where g is discontinuous.
    Radial {
        g: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
        jumps: Vec<f64>,
        support_radius: f64,
    },
    /// ω = amplitude inside the region, 0 outside (counterclockwise).
    Patch { region: ClosedCurve, amplitude: f64 },
    /// ω(x) = W(x₂) on the strip lower ≤ x₂ ≤ upper, 0 outside;
    /// ∫W = 0 so the velocity vanishes outside the strip.
    Shear {
        w: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
        lower: f64,
        upper: f64,
        jumps: Vec<f64>,
    },
    /// Smooth ω, numerically negligible beyond support_radius.
    Smooth {
        omega: Arc<dyn Fn(Vec2) -> f64 + Send + Sync>,
        support_radius: f64,
    },
}

impl std::fmt::Debug for VorticityModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            VorticityModel::Radial { jumps, support_radius, .. } => f
                .debug_struct("Radial")
                .field("jumps", jumps)
                .field("support_radius", support_radius)
                .finish_non_exhaustive(),
            VorticityModel::Patch { region, amplitude } => f
                .debug_struct("Patch")
                .field("nodes", &region.nodes.len())
                .field("amplitude", amplitude)
                .finish(),
            VorticityModel::Shear { lower, upper, .. } => f
                .debug_struct("Shear")
                .field("lower", lower)
                .field("upper", upper)
                .finish_non_exhaustive(),
            VorticityModel::Smooth { support_radius, .. } => f
                .debug_struct("Smooth")
                .field("support_radius", support_radius)
                .finish_non_exhaustive(),
        }
    }
}

impl VorticityModel {
    /// The unit circular patch: g = 1 on [0, 1].
    pub fn circular_patch() -> Self {
        VorticityModel::Radial {
            g: Arc::new(|r| if r <= 1.0 { 1.0 } else { 0.0 }),
            jumps: vec![1.0],
            support_radius: 1.0,
        }
    }

    pub fn radial(
        g: impl Fn(f64) -> f64 + Send + Sync + 'static,
        jumps: Vec<f64>,
        support_radius: f64,
    ) -> Self {
        assert!(support_radius > 0.0);
        VorticityModel::Radial { g: Arc::new(g), jumps, support_radius }
    }

    /// Validates the zero-mean normalization ∫ W = 0 over [lower, upper].
    pub fn shear(
        w: impl Fn(f64) -> f64 + Send + Sync + 'static,
        lower: f64,
        upper: f64,
        jumps: Vec<f64>,
    ) -> Result<Self> {
        assert!(upper > lower);
        let mut breaks: Vec<f64> = jumps.iter().copied().filter(|j| (lower..upper).contains(j)).collect();
        breaks.push(lower);
        breaks.push(upper);
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
        let mean = integrate_panels(&w, &breaks, 32);
        if mean.abs() > 1e-10 {
            return Err(Error::InvalidInput(format!(
                "shear profile must have zero mean over the strip; got integral {mean:.3e}"
            )));
        }
        Ok(VorticityModel::Shear { w: Arc::new(w), lower, upper, jumps })
    }

    /// Orientation is normalized to counterclockwise.
    pub fn patch(region: ClosedCurve, amplitude: f64) -> Self {
        let region = if region.signed_area() < 0.0 {
            let mut nodes = region.nodes;
            nodes.reverse();
            ClosedCurve::new(nodes).expect("reversal preserves simplicity")
        } else {
            region
        };
        VorticityModel::Patch { region, amplitude }
    }

    pub fn smooth(
        omega: impl Fn(Vec2) -> f64 + Send + Sync + 'static,
        support_radius: f64,
    ) -> Self {
        assert!(support_radius > 0.0);
        VorticityModel::Smooth { omega: Arc::new(omega), support_radius }
    }

    pub fn zero() -> Self {
        VorticityModel::smooth(|_| 0.0, 1.0)
    }

    /// Pointwise vorticity.
    pub fn vorticity(&self, x: Vec2) -> f64 {
        match self {
            VorticityModel::Radial { g, .. } => g(x.norm()),
            VorticityModel::Patch { region, amplitude } => {
                if point_in_polygon(&region.nodes, x) {
                    *amplitude
                } else {
                    0.0
                }
            }
            VorticityModel::Shear { w, lower, upper, .. } => {
                if (*lower..=*upper).contains(&x.x2) {
                    w(x.x2)
                } else {
                    0.0
                }
            }
            VorticityModel::Smooth { omega, .. } => omega(x),
        }
    }

    /// Radius of a disk around the origin containing the support
    /// (infinite for shear strips).
    pub fn support_radius(&self) -> f64 {
        match self {
            VorticityModel::Radial { support_radius, .. } => *support_radius,
            VorticityModel::Patch { region, .. } => region
                .nodes
                .iter()
                .map(|p| p.norm())
                .fold(0.0, f64::max),
            VorticityModel::Shear { .. } => f64::INFINITY,
            VorticityModel::Smooth { support_radius, .. } => *support_radius,
        }
    }

    /// Characteristic diameter used to scale the boundary snap band.
    fn snap_diameter(&self) -> f64 {
        match self {
            VorticityModel::Shear { lower, upper, .. } => upper - lower,
            _ => 2.0 * self.support_radius(),
        }
    }

    /// Distance from x to the nearest vorticity jump, if the model has one.
    fn jump_distance(&self, x: Vec2) -> Option<f64> {
        match self {
            VorticityModel::Radial { jumps, .. } => {
                let r = x.norm();
                jumps.iter().map(|j| (r - j).abs()).min_by(f64::total_cmp)
            }
            VorticityModel::Patch { region, .. } => Some(distance_to_polygon(&region.nodes, x)),
            VorticityModel::Shear { jumps, .. } => {
                jumps.iter().map(|j| (x.x2 - j).abs()).min_by(f64::total_cmp)
            }
            VorticityModel::Smooth { .. } => None,
        }
    }

    /// Errs when x sits inside the snap band around a vorticity jump,
    /// where the velocity gradient genuinely jumps.
    fn check_snap(&self, x: Vec2) -> Result<()> {
        if let Some(distance) = self.jump_distance(x) {
            let snap = SNAP_TOLERANCE_FACTOR * self.snap_diameter();
            if distance < snap {
                return Err(Error::BoundaryProximity { distance, snap });
            }
        }
        Ok(())
    }
}

fn point_in_polygon(nodes: &[Vec2], x: Vec2) -> bool {
    // Even-odd rule on a horizontal ray toward +x1.
    let n = nodes.len();
    let mut inside = false;
    for i in 0..n {
        let p = nodes[i];
        let q = nodes[(i + 1) % n];
        if (p.x2 > x.x2) != (q.x2 > x.x2) {
            let cross_x = p.x1 + (x.x2 - p.x2) / (q.x2 - p.x2) * (q.x1 - p.x1);
            if cross_x > x.x1 {
                inside = !inside;
            }
        }
    }
    inside
}

fn distance_to_polygon(nodes: &[Vec2], x: Vec2) -> f64 {
    let n = nodes.len();
    let mut best = f64::INFINITY;
    for i in 0..n {
        let p = nodes[i];
        let q = nodes[(i + 1) % n];
        let seg = q - p;
        let t = ((x - p).dot(seg) / seg.norm_sq()).clamp(0.0, 1.0);
        best = best.min(x.distance(p + seg.scale(t)));
    }
    best
}

/// G(r) = ∫₀^r ρ g(ρ) dρ with quadrature panels split at profile jumps.
fn radial_mass(g: &dyn Fn(f64) -> f64, jumps: &[f64], r: f64) -> f64 {
    if r <= 0.0 {
        return 0.0;
    }
    let mut breaks: Vec<f64> = jumps.iter().copied().filter(|&j| j > 0.0 && j < r).collect();
    breaks.push(0.0);
    breaks.push(r);
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    integrate_panels(|rho| rho * g(rho), &breaks, 32)
}

/// ∫_lower^t W with panels split at profile jumps.
fn shear_mass(w: &dyn Fn(f64) -> f64, jumps: &[f64], lower: f64, t: f64) -> f64 {
    if t <= lower {
        return 0.0;
    }
    let mut breaks: Vec<f64> = jumps.iter().copied().filter(|&j| j > lower && j < t).collect();
    breaks.push(lower);
    breaks.push(t);
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    integrate_panels(w, &breaks, 32)
}

const SYM_BASIS: fn(Vec2) -> Mat2 = |x: Vec2| {
    let off = x.x2 * x.x2 - x.x1 * x.x1;
    Mat2::new(2.0 * x.x1 * x.x2, off, off, -2.0 * x.x1 * x.x2)
};

/// u = K ∗ ω by the model's preferred route: closed form for radial and
/// shear, contour reduction for patches, 2D quadrature for smooth data.
pub fn velocity(model: &VorticityModel, x: Vec2) -> Result<Vec2> {
    match model {
        VorticityModel::Radial { g, jumps, .. } => {
            let r2 = x.norm_sq();
            if r2 == 0.0 {
                return Ok(Vec2::ZERO);
            }
            Ok(x.perp().scale(radial_mass(g.as_ref(), jumps, r2.sqrt()) / r2))
        }
        VorticityModel::Shear { w, lower, upper, jumps } => {
            let t = x.x2.min(*upper);
            Ok(Vec2::new(-shear_mass(w.as_ref(), jumps, *lower, t), 0.0))
        }
        VorticityModel::Patch { region, amplitude } => {
            Ok(contour_velocity(region, *amplitude, x))
        }
        VorticityModel::Smooth { omega, support_radius } => {
            let rmax = x.norm() + support_radius;
            let mut acc = Vec2::ZERO;
            polar_quadrature(x, &linspace(0.0, rmax, 48), &|_| Vec::new(), &mut |z, y, w| {
                // K(x − y) = K(−z) = −K(z); K(z)·ρ stays bounded at 0.
                if z.norm_sq() > 0.0 {
                    let k = biot_savart_kernel(z).expect("nonzero radius");
                    acc = acc + k.scale(-w * omega(y));
                }
            });
            Ok(acc)
        }
    }
}

/// ∇u by the model's preferred route; refuses evaluation inside the snap
/// band around vorticity jumps, where ∇u genuinely jumps.
pub fn grad_velocity(model: &VorticityModel, x: Vec2) -> Result<Mat2> {
    model.check_snap(x)?;
    match model {
        VorticityModel::Radial { g, jumps, .. } => {
            let r2 = x.norm_sq();
            if r2 == 0.0 {
                // Smooth at the center: ∇u = (g(0)/2)·J.
                return Ok(J.scale(0.5 * g(0.0)));
            }
            let mass = radial_mass(g.as_ref(), jumps, r2.sqrt());
            let gr = g(r2.sqrt());
            let swirl = Mat2::new(
                -x.x1 * x.x2,
                -x.x2 * x.x2,
                x.x1 * x.x1,
                x.x1 * x.x2,
            );
            Ok(SYM_BASIS(x).scale(mass / (r2 * r2)).add(swirl.scale(gr / r2)))
        }
        VorticityModel::Shear { w, lower, upper, .. } => {
            let wval = if (*lower..=*upper).contains(&x.x2) { w(x.x2) } else { 0.0 };
            Ok(Mat2::new(0.0, -wval, 0.0, 0.0))
        }
        VorticityModel::Patch { region, amplitude } => {
            Ok(contour_grad_velocity(region, *amplitude, x))
        }
        VorticityModel::Smooth { .. } => {
            let sym = pv_symmetric_part(model, x)?;
            Ok(sym.add(J.scale(0.5 * model.vorticity(x))))
        }
    }
}

/// The symmetric (principal-value) part of ∇u: grad_velocity equals
/// (ω(x)/2)·J plus this matrix.
pub fn pv_symmetric_part(model: &VorticityModel, x: Vec2) -> Result<Mat2> {
    model.check_snap(x)?;
    match model {
        VorticityModel::Radial { g, jumps, support_radius } => {
            pv_symmetric_radial(g.as_ref(), jumps, *support_radius, x)
        }
        VorticityModel::Shear { .. } => Ok(grad_velocity(model, x)?.symmetric_part()),
        VorticityModel::Patch { region, amplitude } => {
            Ok(contour_grad_velocity(region, *amplitude, x).symmetric_part())
        }
        VorticityModel::Smooth { omega, support_radius } => {
            let omega = Arc::clone(omega);
            let rmax = x.norm() + support_radius;
            let radii = default_exclusion_radii();
            let mut entries = [0.0f64; 4];
            for (idx, (row, col)) in [(0, 0), (0, 1), (1, 0), (1, 1)].into_iter().enumerate() {
                let om = Arc::clone(&omega);
                let kernel = KernelSample {
                    evaluator: Box::new(move |xx: Vec2, yy: Vec2, _| {
                        let z = xx - yy;
                        if z.norm_sq() == 0.0 {
                            return 0.0;
                        }
                        grad_biot_savart(z).expect("nonzero radius").entries()[2 * row + col]
                            * om(yy)
                    }),
                    singular_order: 2,
                    domain_radius: rmax,
                    radial_breaks: Vec::new(),
                };
                entries[idx] = pv_transform(&kernel, |_| 1.0, x, &radii)?.value;
            }
            let m = Mat2::new(entries[0], entries[1], entries[2], entries[3]);
            // ∇K is symmetric and traceless off the origin, so the limit
            // must be too; symmetrize away quadrature roundoff.
            assert!((m.m12 - m.m21).abs() <= 1e-8 * (1.0 + m.max_norm()));
            assert!(m.trace().abs() <= 1e-8 * (1.0 + m.max_norm()));
            let off = 0.5 * (m.m12 + m.m21);
            let diag = 0.5 * (m.m11 - m.m22);
            Ok(Mat2::new(diag, off, off, -diag))
        }
    }
}

/// Arc-aware principal-value quadrature of ∫ ∇K(x−y) g(|y|) dy: angular
/// panels split where rings around x cross the jump circles of g, so the
/// indicator never lands inside a quadrature panel. Exclusion radii are
/// kept below the distance to the nearest jump — once the excluded ball
/// sees only locally radial data the sweep is converged by ring parity —
/// and the sweep is Richardson-extrapolated per entry for smooth
/// profiles, whose parity defect is quadratic in the exclusion radius.
fn pv_symmetric_radial(
    g: &dyn Fn(f64) -> f64,
    jumps: &[f64],
    support_radius: f64,
    x: Vec2,
) -> Result<Mat2> {
    let r0 = x.norm();
    let rmax = r0 + support_radius;
    let jump_distance = jumps
        .iter()
        .map(|j| (r0 - j).abs())
        .fold(f64::INFINITY, f64::min);
    let base = PV_DEFAULT_EXCLUSION.min(0.5 * jump_distance);
    let radii: Vec<f64> = (0..4).map(|k| base / (1u64 << k) as f64).collect();
    let mut feature: Vec<f64> = Vec::new();
    for &j in jumps {
        feature.push((j - r0).abs());
        feature.push(j + r0);
    }
    let mut per_radius: Vec<(f64, [f64; 4])> = Vec::with_capacity(radii.len());
    for &h in &radii {
        let breaks = refined_breaks(h, rmax, &feature);
        let mut acc = Mat2::ZERO;
        polar_quadrature(x, &breaks, &circle_cuts(x, jumps), &mut |z, y, w| {
            if z.norm_sq() > 0.0 {
                // ∇K(x − y) = ∇K(−z) = ∇K(z): degree −2 homogeneous, even.
                let gk = grad_biot_savart(z).expect("nonzero radius");
                acc = acc.add(gk.scale(w * g(y.norm())));
            }
        });
        per_radius.push((h, acc.entries()));
    }
    let mut entries = [0.0f64; 4];
    for idx in 0..4 {
        let sweep: Vec<(f64, f64)> = per_radius.iter().map(|(h, e)| (*h, e[idx])).collect();
        entries[idx] = extrapolate_sweep(&sweep, "radial principal-value sweep")?.0;
    }
    let m = Mat2::new(entries[0], entries[1], entries[2], entries[3]);
    assert!((m.m12 - m.m21).abs() <= 1e-6 * (1.0 + m.max_norm()));
    assert!(m.trace().abs() <= 1e-6 * (1.0 + m.max_norm()));
    let off = 0.5 * (m.m12 + m.m21);
    let diag = 0.5 * (m.m11 - m.m22);
    Ok(Mat2::new(diag, off, off, -diag))
}

/// Radial panel boundaries from `start` to `rmax` with geometric
/// clustering toward each feature radius (square-root kinks live there).
fn refined_breaks(start: f64, rmax: f64, feature_radii: &[f64]) -> Vec<f64> {
    let mut majors: Vec<f64> = feature_radii
        .iter()
        .copied()
        .filter(|&b| b > start * (1.0 + 1e-9) && b < rmax * (1.0 - 1e-9))
        .collect();
    majors.push(rmax);
    majors.sort_by(f64::total_cmp);
    majors.dedup_by(|a, b| (*a - *b).abs() < 1e-12 * rmax);
    let mut breaks = vec![start];
    let mut lo = start;
    for hi in majors {
        // Geometric refinement toward both endpoints of [lo, hi].
        let mid = 0.5 * (lo + hi);
        let len = hi - lo;
        let levels = 14;
        for k in (1..=levels).rev() {
            breaks.push(lo + 0.5 * len * 0.5f64.powi(k));
        }
        breaks.push(mid);
        for k in 1..=levels {
            breaks.push(hi - 0.5 * len * 0.5f64.powi(k));
        }
        breaks.push(hi);
        lo = hi;
    }
    breaks
}

/// Cut-angle generator for rings around x crossing the circles |y| = j.
fn circle_cuts(x: Vec2, jumps: &[f64]) -> impl Fn(f64) -> Vec<f64> + '_ {
    let r0 = x.norm();
    let beta = x.x2.atan2(x.x1);
    move |rho: f64| {
        let mut cuts = Vec::new();
        for &j in jumps {
            if r0 == 0.0 || rho == 0.0 {
                continue;
            }
            // |x + ρ e^{iθ}| = j ⟺ cos(θ − β) = (j² − r0² − ρ²)/(2 r0 ρ).
            let c = (j * j - r0 * r0 - rho * rho) / (2.0 * r0 * rho);
            if c.abs() < 1.0 {
                let dth = c.acos();
                cuts.push((beta + dth).rem_euclid(TWO_PI));
                cuts.push((beta - dth).rem_euclid(TWO_PI));
            }
        }
        cuts
    }
}

/// Cut-angle generator for rings around x crossing polygon edges.
fn polygon_cuts(x: Vec2, nodes: Vec<Vec2>) -> impl Fn(f64) -> Vec<f64> {
    move |rho: f64| {
        let mut cuts = Vec::new();
        let n = nodes.len();
        for i in 0..n {
            let p = nodes[i];
            let q = nodes[(i + 1) % n];
            let d = p - x;
            let e = q - p;
            // |d + t e| = ρ for t ∈ [0, 1].
            let a = e.norm_sq();
            let b = 2.0 * d.dot(e);
            let c = d.norm_sq() - rho * rho;
            let disc = b * b - 4.0 * a * c;
            if disc <= 0.0 {
                continue;
            }
            let sq = disc.sqrt();
            for t in [(-b - sq) / (2.0 * a), (-b + sq) / (2.0 * a)] {
                if (0.0..=1.0).contains(&t) {
                    let y = p + e.scale(t);
                    cuts.push((y.x2 - x.x2).atan2(y.x1 - x.x1).rem_euclid(TWO_PI));
                }
            }
        }
        cuts
    }
}

/// Cut-angle generator for rings crossing the horizontal lines x₂ = level.
fn line_cuts(x: Vec2, levels: Vec<f64>) -> impl Fn(f64) -> Vec<f64> {
    move |rho: f64| {
        let mut cuts = Vec::new();
        for &level in &levels {
            let s = (level - x.x2) / rho;
            if s.abs() < 1.0 {
                let a = s.asin();
                cuts.push(a.rem_euclid(TWO_PI));
                cuts.push((std::f64::consts::PI - a).rem_euclid(TWO_PI));
            }
        }
        cuts
    }
}

/// Polar quadrature around x: Gauss-Legendre in radius over the given
/// panel breaks, Gauss-Legendre in angle over panels split at the ring's
/// cut angles (and capped at π/4 width). Calls `visit(z, y, weight)` with
/// y = x + z and weight already including the ρ dρ dθ factor.
fn polar_quadrature(
    x: Vec2,
    radial_breaks: &[f64],
    cuts: &dyn Fn(f64) -> Vec<f64>,
    visit: &mut dyn FnMut(Vec2, Vec2, f64),
) {
    let (nodes, weights) = gauss_legendre(12);
    for seg in radial_breaks.windows(2) {
        if seg[1] <= seg[0] {
            continue;
        }
        let rmid = 0.5 * (seg[0] + seg[1]);
        let rrad = 0.5 * (seg[1] - seg[0]);
        for (tn, tw) in nodes.iter().zip(&weights) {
            let rho = rmid + rrad * tn;
            let wr = tw * rrad * rho;
            let mut cut_angles = cuts(rho);
            cut_angles.retain(|a| a.is_finite());
            cut_angles.push(0.0);
            cut_angles.push(TWO_PI);
            cut_angles.sort_by(f64::total_cmp);
            for apanel in cut_angles.windows(2) {
                let width = apanel[1] - apanel[0];
                if width <= 1e-14 {
                    continue;
                }
                let sub = (width / (std::f64::consts::PI / 4.0)).ceil() as usize;
                for s in 0..sub {
                    let lo = apanel[0] + width * s as f64 / sub as f64;
                    let hi = apanel[0] + width * (s + 1) as f64 / sub as f64;
                    let amid = 0.5 * (lo + hi);
                    let arad = 0.5 * (hi - lo);
                    for (an, aw) in nodes.iter().zip(&weights) {
                        let th = amid + arad * an;
                        let z = Vec2::new(rho * th.cos(), rho * th.sin());
                        visit(z, x + z, wr * aw * arad);
                    }
                }
            }
        }
    }
}

/// Independent Biot-Savart quadrature of the velocity, used to
/// cross-validate the closed forms and the contour reduction.
pub fn velocity_biot_savart(model: &VorticityModel, x: Vec2) -> Result<Vec2> {
    match model {
        VorticityModel::Radial { g, jumps, support_radius } => {
            let r0 = x.norm();
            let rmax = r0 + support_radius;
            let mut feature: Vec<f64> = Vec::new();
            for &j in jumps {
                feature.push((j - r0).abs());
                feature.push(j + r0);
            }
            feature.push((support_radius - r0).abs());
            feature.push(support_radius + r0);
            let breaks = refined_breaks(0.0, rmax, &feature);
            let mut acc = Vec2::ZERO;
            polar_quadrature(x, &breaks, &circle_cuts(x, jumps), &mut |z, y, w| {
                if z.norm_sq() > 0.0 {
                    let k = biot_savart_kernel(z).expect("nonzero radius");
                    acc = acc + k.scale(-w * g(y.norm()));
                }
            });
            Ok(acc)
        }
        VorticityModel::Shear { w, lower, upper, jumps } => {
            // Truncated strips at L, 2L, 4L, then two Richardson stages for
            // the 1/L tail.
            let evals: Vec<Vec2> = [1.0, 2.0, 4.0]
                .iter()
                .map(|scale| shear_strip_velocity(w.as_ref(), *lower, *upper, jumps, x, scale * SHEAR_TRUNCATION))
                .collect();
            let r1a = evals[1].scale(2.0) - evals[0];
            let r1b = evals[2].scale(2.0) - evals[1];
            Ok(r1b.scale(4.0 / 3.0) - r1a.scale(1.0 / 3.0))
        }
        VorticityModel::Patch { region, amplitude } => {
            // 2D area quadrature with angular panels split at the exact
            // circle/edge intersections; validates the contour reduction.
            let r0 = x.norm();
            let rmax = r0 + model.support_radius();
            let breaks = linspace(0.0, rmax, 300);
            let mut acc = Vec2::ZERO;
            let nodes = region.nodes.clone();
            let cuts = polygon_cuts(x, region.nodes.clone());
            polar_quadrature(x, &breaks, &cuts, &mut |z, y, w| {
                if z.norm_sq() > 0.0 && point_in_polygon(&nodes, y) {
                    let k = biot_savart_kernel(z).expect("nonzero radius");
                    acc = acc + k.scale(-w * amplitude);
                }
            });
            Ok(acc)
        }
        VorticityModel::Smooth { .. } => velocity(model, x),
    }
}

/// One truncated-strip quadrature for the shear velocity.
fn shear_strip_velocity(
    w: &dyn Fn(f64) -> f64,
    lower: f64,
    upper: f64,
    jumps: &[f64],
    x: Vec2,
    truncation: f64,
) -> Vec2 {
    let rmax = truncation;
    let mut levels = vec![lower, upper];
    levels.extend_from_slice(jumps);
    let mut feature: Vec<f64> = levels.iter().map(|&l| (l - x.x2).abs()).collect();
    feature.retain(|f| *f > 0.0);
    let breaks = refined_breaks(0.0, rmax, &feature);
    let mut acc = Vec2::ZERO;
    polar_quadrature(x, &breaks, &line_cuts(x, levels), &mut |z, y, wq| {
        if z.norm_sq() > 0.0 && (lower..=upper).contains(&y.x2) {
            let k = biot_savart_kernel(z).expect("nonzero radius");
            acc = acc + k.scale(-wq * w(y.x2));
        }
    });
    acc
}

/// Exact per-segment antiderivative of ∫ log|x−y(s)| ds along p→q.
fn segment_log_integral(p: Vec2, q: Vec2, x: Vec2) -> f64 {
    let seg = q - p;
    let len = seg.norm();
    let tau = seg.scale(1.0 / len);
    let rel = x - p;
    let a = rel.dot(tau);
    let b = rel.dot(tau.perp());
    let f = |s: f64| {
        let d2 = (s - a) * (s - a) + b * b;
        if d2 == 0.0 {
            return 0.0;
        }
        let mut val = 0.5 * ((s - a) * d2.ln()) - (s - a);
        if b != 0.0 {
            val += b * ((s - a) / b).atan();
        }
        val
    };
    f(len) - f(0.0)
}

/// u(x) = −(amplitude/2π) ∮ log|x−y| t(y) ds(y): the area integral of K
/// collapsed to the boundary by Green's theorem, summed exactly per
/// segment. Finite for every x, including points on the contour.
pub fn contour_velocity(region: &ClosedCurve, amplitude: f64, x: Vec2) -> Vec2 {
    polygon_velocity(&region.nodes, amplitude, x)
}

/// The contour-reduction velocity on a raw node list (no simplicity
/// revalidation); the self-consistent stepper calls this every stage.
pub fn polygon_velocity(nodes: &[Vec2], amplitude: f64, x: Vec2) -> Vec2 {
    let n = nodes.len();
    let mut acc = Vec2::ZERO;
    for i in 0..n {
        let p = nodes[i];
        let q = nodes[(i + 1) % n];
        let tau = (q - p).scale(1.0 / p.distance(q));
        acc = acc + tau.scale(segment_log_integral(p, q, x));
    }
    acc.scale(-amplitude / TWO_PI)
}

/// ∇u(x) = −(amplitude/2π) ∮ t(y) ⊗ (x−y)/|x−y|² ds(y), exact per
/// segment; diverges logarithmically as x approaches the contour.
pub fn contour_grad_velocity(region: &ClosedCurve, amplitude: f64, x: Vec2) -> Mat2 {
    polygon_grad_velocity(&region.nodes, amplitude, x)
}

/// The contour-reduction velocity gradient on a raw node list.
pub fn polygon_grad_velocity(nodes: &[Vec2], amplitude: f64, x: Vec2) -> Mat2 {
    let n = nodes.len();
    let mut acc = Mat2::ZERO;
    for i in 0..n {
        let p = nodes[i];
        let q = nodes[(i + 1) % n];
        let seg = q - p;
        let len = seg.norm();
        let tau = seg.scale(1.0 / len);
        let rel = x - p;
        let a = rel.dot(tau);
        let b = rel.dot(tau.perp());
        let d0 = a * a + b * b;
        let d1 = (len - a) * (len - a) + b * b;
        let tau_part = -0.5 * (d1 / d0).ln();
        let normal_part = if b == 0.0 {
            0.0
        } else {
            ((len - a) / b).atan() - (-a / b).atan()
        };
        let integral = tau.scale(tau_part) + tau.perp().scale(normal_part);
        acc = acc.add(Mat2::outer(tau, integral));
    }
    acc.scale(-amplitude / TWO_PI)
}

/// A tangential direction field along which regularity is tracked.
pub struct YField {
    pub evaluator: Box<dyn Fn(Vec2) -> Vec2 + Send + Sync>,
    pub label: String,
}

impl YField {
    pub fn constant(v: Vec2) -> Self {
        YField { evaluator: Box::new(move |_| v), label: format!("constant({},{})", v.x1, v.x2) }
    }

    /// Y(x) = x⊥: rotational, Lipschitz, tangential to every circle.
    pub fn rotational() -> Self {
        YField { evaluator: Box::new(|x| x.perp()), label: "rotational".into() }
    }

    /// Y(x) = x⊥/|x|: the unit azimuthal field (singular at the origin).
    pub fn azimuthal_unit() -> Self {
        YField {
            evaluator: Box::new(|x| {
                let r = x.norm();
                assert!(r > 0.0, "azimuthal field undefined at the origin");
                x.perp().scale(1.0 / r)
            }),
            label: "azimuthal-unit".into(),
        }
    }

    pub fn eval(&self, x: Vec2) -> Vec2 {
        (self.evaluator)(x)
    }
}

/// Both sides of the directional-derivative identity
/// (Y·∇)u = PV∫ ∇K(x−y)[Y(x)−Y(y)] ω(y) dy + K ∗ div(ωY)
/// with their residual.
#[derive(Debug, Clone, Copy)]
pub struct DirectionalIdentity {
    pub lhs: Vec2,
    pub rhs: Vec2,
    pub residual: f64,
}

/// Evaluates the identity for smooth vorticity (or a shear strip, where
/// the strip truncation plays the role of the compact support).
pub fn directional_gradient_identity(
    model: &VorticityModel,
    y_field: &YField,
    x: Vec2,
) -> Result<DirectionalIdentity> {
    let rmax = match model {
        VorticityModel::Smooth { support_radius, .. } => x.norm() + support_radius,
        VorticityModel::Shear { .. } => x.norm() + 2.0 * SHEAR_TRUNCATION,
        _ => return Err(Error::ModelKindMismatch),
    };
    let lhs = grad_velocity(model, x)?.apply(y_field.eval(x));

    // First term: the difference Y(x) − Y(y) vanishes at y = x, taming
    // ∇K to an integrable kernel whose angular means are smooth in the
    // radius, so plain panels starting at 0 converge cleanly.
    let yx = y_field.eval(x);
    let mut term1 = Vec2::ZERO;
    let mut breaks = vec![0.0];
    breaks.extend(geomspace(1e-3 * rmax, rmax, 48));
    polar_quadrature(x, &breaks, &|_| Vec::new(), &mut |z, yy, w| {
        if z.norm_sq() > 0.0 {
            // ∇K(x − y) = ∇K(−z) = ∇K(z): even under reflection.
            let gk = grad_biot_savart(z).expect("nonzero radius");
            term1 = term1 + gk.apply(yx - y_field.eval(yy)).scale(w * model.vorticity(yy));
        }
    });

    // Second term: K ∗ div(ωY) with a centered finite-difference divergence.
    let step = 1e-5;
    let div = |p: Vec2| {
        let f1 = |q: Vec2| model.vorticity(q) * y_field.eval(q).x1;
        let f2 = |q: Vec2| model.vorticity(q) * y_field.eval(q).x2;
        (f1(Vec2::new(p.x1 + step, p.x2)) - f1(Vec2::new(p.x1 - step, p.x2))) / (2.0 * step)
            + (f2(Vec2::new(p.x1, p.x2 + step)) - f2(Vec2::new(p.x1, p.x2 - step))) / (2.0 * step)
    };
    let mut term2 = Vec2::ZERO;
    polar_quadrature(x, &linspace(0.0, rmax, 48), &|_| Vec::new(), &mut |z, yy, w| {
        if z.norm_sq() > 0.0 {
            let k = biot_savart_kernel(z).expect("nonzero radius");
            term2 = term2 + k.scale(-w * div(yy));
        }
    });

    let rhs = term1 + term2;
    Ok(DirectionalIdentity { lhs, rhs, residual: (lhs - rhs).norm() })
}

/// Closed-form reference data for the stationary examples.
#[derive(Debug, Clone, Copy)]
pub struct ReferenceSolution {
    pub u: Vec2,
    pub grad_u: Mat2,
    pub a_matrix: Mat2,
    pub gamma: Mat2,
}

/// Closed forms for radial and shear models: velocity, gradient, the
/// corrector matrix A, and Γ = ∇u − ω·A.
///
/// Radial (Y the unit azimuthal field): A = (1/r²)·[[−x₁x₂, −x₂²],
/// [x₁², x₁x₂]] and Γ = G(r)/r⁴·[[2x₁x₂, x₂²−x₁²],[x₂²−x₁², −2x₁x₂]]
/// with G(r) = ∫₀^r ρ g dρ — the g-dependent part of ∇u is exactly ω·A,
/// so Γ carries no jump across vorticity discontinuities.
///
/// Shear (Y = e₁): A = [[0, −1],[0, 0]] and Γ = 0 identically.
pub fn reference_solution(model: &VorticityModel, x: Vec2) -> Result<ReferenceSolution> {
    match model {
        VorticityModel::Radial { g, jumps, .. } => {
            let r2 = x.norm_sq();
            assert!(r2 > 0.0, "radial corrector is undefined at the origin");
            let u = velocity(model, x)?;
            let grad_u = grad_velocity(model, x)?;
            let a_matrix = Mat2::new(
                -x.x1 * x.x2 / r2,
                -x.x2 * x.x2 / r2,
                x.x1 * x.x1 / r2,
                x.x1 * x.x2 / r2,
            );
            let mass = radial_mass(g.as_ref(), jumps, r2.sqrt());
            let gamma = SYM_BASIS(x).scale(mass / (r2 * r2));
            Ok(ReferenceSolution { u, grad_u, a_matrix, gamma })
        }
        VorticityModel::Shear { .. } => {
            let u = velocity(model, x)?;
            let grad_u = grad_velocity(model, x)?;
            Ok(ReferenceSolution {
                u,
                grad_u,
                a_matrix: Mat2::new(0.0, -1.0, 0.0, 0.0),
                gamma: Mat2::ZERO,
            })
        }
        _ => Err(Error::ModelKindMismatch),
    }
}
