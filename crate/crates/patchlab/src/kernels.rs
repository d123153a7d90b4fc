//! The Biot-Savart kernel and its gradient, smooth cutoff and mollifier
//! profiles, principal-value transforms with exclusion-radius
//! extrapolation, and the weighted kernel-norm estimator.

use crate::error::{Error, Result};
use crate::geometry::{Mat2, Vec2};
use crate::quadrature::{gauss_legendre, geomspace, integrate};
use crate::tolerances::{
    PV_ANGULAR_SAMPLES, PV_CAUCHY_FLOOR, PV_DEFAULT_EXCLUSION, PV_EXCLUSION_LEVELS,
    PV_PANELS_PER_DECADE, PV_RADIAL_ORDER, STAR_NORM_FD_STEP,
};

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// K(x) = (1/2π) x⊥ / |x|², the velocity kernel of a point vortex.
pub fn biot_savart_kernel(x: Vec2) -> Result<Vec2> {
    let r2 = x.norm_sq();
    if r2 == 0.0 {
        return Err(Error::KernelSingularity);
    }
    Ok(x.perp().scale(1.0 / (TWO_PI * r2)))
}

/// F(x) = (1/2π) log|x|, whose Laplacian is the unit point mass; K = ∇⊥F.
pub fn fundamental_solution(x: Vec2) -> Result<f64> {
    let r = x.norm();
    if r == 0.0 {
        return Err(Error::KernelSingularity);
    }
    Ok(r.ln() / TWO_PI)
}

/// Jacobian of K at x ≠ 0:
///
///   ∇K(x) = 1/(2π|x|⁴) · [[2x₁x₂, x₂²−x₁²], [x₂²−x₁², −2x₁x₂]],
///
/// symmetric and traceless because F is harmonic off the origin.
pub fn grad_biot_savart(x: Vec2) -> Result<Mat2> {
    let r2 = x.norm_sq();
    if r2 == 0.0 {
        return Err(Error::KernelSingularity);
    }
    let c = 1.0 / (TWO_PI * r2 * r2);
    let off = c * (x.x2 * x.x2 - x.x1 * x.x1);
    let diag = c * 2.0 * x.x1 * x.x2;
    Ok(Mat2 { m11: diag, m12: off, m21: off, m22: -diag })
}

fn bump_tail(u: f64) -> f64 {
    if u <= 0.0 {
        0.0
    } else {
        (-1.0 / u).exp()
    }
}

fn bump_tail_derivative(u: f64) -> f64 {
    if u <= 0.0 {
        0.0
    } else {
        (-1.0 / u).exp() / (u * u)
    }
}

/// Radially symmetric C^∞ cutoff: 1 on the ball of `inner_radius`, 0
/// outside twice that radius, bridged by the exponential partition
/// g(2−s)/(g(2−s)+g(s−1)) with g(u) = exp(−1/u) — smooth at both ends
/// because every derivative of g vanishes at 0.
#[derive(Debug, Clone, Copy)]
pub struct CutoffProfile {
    pub inner_radius: f64,
}

impl CutoffProfile {
    pub fn standard() -> Self {
        CutoffProfile { inner_radius: 1.0 }
    }

    /// Profile value at normalized radius s = |x| / scale.
    pub fn shape(&self, s: f64) -> f64 {
        if s <= 1.0 {
            1.0
        } else if s >= 2.0 {
            0.0
        } else {
            let g = bump_tail(2.0 - s);
            let h = bump_tail(s - 1.0);
            g / (g + h)
        }
    }

    /// d(shape)/ds, analytic; ≤ 0 everywhere, with sup |shape′| = 2 at
    /// the bridge midpoint for this profile.
    pub fn shape_derivative(&self, s: f64) -> f64 {
        if s <= 1.0 || s >= 2.0 {
            0.0
        } else {
            let g = bump_tail(2.0 - s);
            let h = bump_tail(s - 1.0);
            let dg = -bump_tail_derivative(2.0 - s);
            let dh = bump_tail_derivative(s - 1.0);
            (dg * h - g * dh) / ((g + h) * (g + h))
        }
    }

    /// a(x) at the profile's own scale.
    pub fn value(&self, x: Vec2) -> f64 {
        assert!(self.inner_radius > 0.0);
        self.shape(x.norm() / self.inner_radius)
    }
}

/// a_r(x): 1 on |x| ≤ r, 0 on |x| ≥ 2r, smooth monotone in between.
pub fn radial_cutoff(profile: &CutoffProfile, r: f64, x: Vec2) -> f64 {
    assert!(r > 0.0, "cutoff radius must be positive");
    profile.shape(x.norm() / r)
}

/// μ_{r,h}(x) = a_r(x)·(1 − a_h(x)): 0 inside |x| ≤ h and outside
/// |x| ≥ 2r, identically 1 on 2h ≤ |x| ≤ r.
pub fn annular_cutoff(profile: &CutoffProfile, r: f64, h: f64, x: Vec2) -> Result<f64> {
    if !(h > 0.0 && 2.0 * h < r) {
        return Err(Error::InvalidCutoffRadii { r, h });
    }
    let s = x.norm();
    Ok(profile.shape(s / r) * (1.0 - profile.shape(s / h)))
}

/// ∇(μ_{r,h} K)(z) for h > 0, or ∇(a_r K)(z) when h ≤ 0. Zero outside
/// |z| < 2r and (for h > 0) inside |z| ≤ h. The product rule gives
/// μ∇K + K ⊗ ∇μ with ∇μ radial.
pub fn grad_cutoff_kernel(profile: &CutoffProfile, r: f64, h: f64, z: Vec2) -> Mat2 {
    assert!(r > 0.0);
    let s = z.norm();
    if s == 0.0 || s >= 2.0 * r || (h > 0.0 && s <= h) {
        return Mat2::ZERO;
    }
    let ar = profile.shape(s / r);
    let dar = profile.shape_derivative(s / r) / r;
    let (mu, dmu) = if h > 0.0 {
        let ah = profile.shape(s / h);
        let dah = profile.shape_derivative(s / h) / h;
        (ar * (1.0 - ah), dar * (1.0 - ah) - ar * dah)
    } else {
        (ar, dar)
    };
    if mu == 0.0 && dmu == 0.0 {
        return Mat2::ZERO;
    }
    // s > 0 here, so neither kernel call can hit the singular point.
    let k = biot_savart_kernel(z).expect("nonzero radius");
    let gk = grad_biot_savart(z).expect("nonzero radius");
    gk.scale(mu).add(Mat2::outer(k, z.scale(dmu / s)))
}

/// Smooth radial bump c·exp(−1/(1 − |x|²)) on the unit disk, scaled to
/// `support_radius` with total mass 1; `normalization` is c, fixed by
/// numerical quadrature at construction.
#[derive(Debug, Clone, Copy)]
pub struct MollifierProfile {
    pub support_radius: f64,
    pub normalization: f64,
}

impl MollifierProfile {
    pub fn standard() -> Self {
        // ∫ρ = 2π·c·∫₀¹ exp(−1/(1−t²)) t dt = 1; the integrand is smooth
        // with all derivatives vanishing at t = 1, so plain Gauss-Legendre
        // converges past double precision.
        let radial = integrate(
            |t| if t >= 1.0 { 0.0 } else { (-1.0 / (1.0 - t * t)).exp() * t },
            0.0,
            1.0,
            200,
        );
        MollifierProfile { support_radius: 1.0, normalization: 1.0 / (TWO_PI * radial) }
    }

    /// ρ(z) at the profile's own support radius R: R^{−2}·ρ_unit(z/R).
    pub fn value(&self, z: Vec2) -> f64 {
        let rr = self.support_radius * self.support_radius;
        let t2 = z.norm_sq() / rr;
        if t2 >= 1.0 {
            0.0
        } else {
            self.normalization / rr * (-1.0 / (1.0 - t2)).exp()
        }
    }
}

/// (ρ_ε ∗ f)(x) with ρ_ε(z) = ε^{−2} ρ(z/ε), by polar quadrature over the
/// support disk. Preserves constants to quadrature tolerance and affine
/// functions exactly up to the symmetric angular rule (even profile).
pub fn mollify(
    field: &dyn Fn(Vec2) -> Result<f64>,
    profile: &MollifierProfile,
    eps: f64,
    x: Vec2,
) -> Result<f64> {
    assert!(eps > 0.0, "mollification scale must be positive");
    let support = eps * profile.support_radius;
    let (nodes, weights) = gauss_legendre(16);
    let n_ang = 64usize;
    let dth = TWO_PI / n_ang as f64;
    let panels = 8usize;
    let mut acc = 0.0;
    for p in 0..panels {
        let lo = support * p as f64 / panels as f64;
        let hi = support * (p + 1) as f64 / panels as f64;
        let mid = 0.5 * (lo + hi);
        let rad = 0.5 * (hi - lo);
        for (t, wq) in nodes.iter().zip(&weights) {
            let rho = mid + rad * t;
            let weight = wq * rad * rho * dth
                * profile.value(Vec2::new(rho / eps, 0.0)) / (eps * eps);
            for j in 0..n_ang {
                let th = (j as f64 + 0.5) * dth;
                let y = x + Vec2::new(th.cos(), th.sin()).scale(rho);
                acc += weight * field(y)?;
            }
        }
    }
    Ok(acc)
}

/// A kernel L(x, y) sampled pointwise, with the metadata the transform
/// and norm estimators need.
///
/// The evaluator's third argument is the active regularization scale: a
/// principal-value sweep passes its current exclusion radius h, and
/// scale-aware kernels (the cutoff-gradient family) taper smoothly to
/// zero across (h, 2h) instead of jumping at the exclusion circle, so the
/// sweep extrapolates to the annular-limit value. Kernels without an
/// inner scale ignore the argument; pass 0 for the unregularized kernel.
pub struct KernelSample {
    pub evaluator: Box<dyn Fn(Vec2, Vec2, f64) -> f64 + Send + Sync>,
    /// Power s making |x−y|^s·|L| bounded near the diagonal (2 for
    /// gradient-type kernels, 1 for the velocity kernel, 0 if bounded).
    pub singular_order: i32,
    /// The evaluator vanishes whenever |x−y| ≥ this radius.
    pub domain_radius: f64,
    /// Radii (in |x−y|) where the kernel has localized features; the
    /// quadrature places panel boundaries there.
    pub radial_breaks: Vec<f64>,
}

impl KernelSample {
    /// One component (row, col) of the cutoff-gradient kernel
    /// ∇(a_r K)(x−y), regularized to ∇(μ_{r,h} K) inside the active
    /// exclusion scale.
    pub fn grad_cutoff_biot_savart(profile: &CutoffProfile, r: f64, row: usize, col: usize) -> Self {
        assert!(row < 2 && col < 2);
        assert!(r > 0.0);
        let p = *profile;
        KernelSample {
            evaluator: Box::new(move |x, y, h| {
                grad_cutoff_kernel(&p, r, h, x - y).entries()[2 * row + col]
            }),
            singular_order: 2,
            domain_radius: 2.0 * r,
            radial_breaks: vec![r, 2.0 * r],
        }
    }

    /// The mollification kernel ρ_ε(x−y).
    pub fn mollifier(profile: &MollifierProfile, eps: f64) -> Self {
        assert!(eps > 0.0);
        let p = *profile;
        KernelSample {
            evaluator: Box::new(move |x, y, _| p.value((x - y).scale(1.0 / eps)) / (eps * eps)),
            singular_order: 0,
            domain_radius: eps * profile.support_radius,
            radial_breaks: Vec::new(),
        }
    }
}

/// Exclusion radii h₀·2^{−k}, k = 0..=levels, for the default sweep.
pub fn default_exclusion_radii() -> Vec<f64> {
    (0..=PV_EXCLUSION_LEVELS)
        .map(|k| PV_DEFAULT_EXCLUSION / (1u64 << k) as f64)
        .collect()
}

/// Radial panel boundaries from h out to the kernel support edge: uniform
/// panels across the regularization bridge [h, 2h], then geometric panels
/// split at the kernel's own feature radii.
fn radial_panel_breaks(h: f64, domain_radius: f64, feature_radii: &[f64]) -> Vec<f64> {
    assert!(h > 0.0 && h < domain_radius, "exclusion must sit inside the support");
    let inner_top = (2.0 * h).min(domain_radius);
    let inner_panels = 4usize;
    let mut breaks: Vec<f64> = (0..=inner_panels)
        .map(|i| h + (inner_top - h) * i as f64 / inner_panels as f64)
        .collect();
    if inner_top >= domain_radius {
        return breaks;
    }
    let mut majors: Vec<f64> = feature_radii
        .iter()
        .copied()
        .filter(|&b| b > inner_top * (1.0 + 1e-12) && b < domain_radius * (1.0 - 1e-12))
        .collect();
    majors.push(domain_radius);
    majors.sort_by(f64::total_cmp);
    let mut lo = inner_top;
    for hi in majors {
        let panels = ((hi / lo).log10() * PV_PANELS_PER_DECADE as f64).ceil().max(1.0) as usize;
        breaks.extend_from_slice(&geomspace(lo, hi, panels)[1..]);
        lo = hi;
    }
    breaks
}

fn annulus_scalar_quadrature<F: Fn(Vec2) -> f64>(
    kernel: &KernelSample,
    f: &F,
    x: Vec2,
    h: f64,
) -> f64 {
    let breaks = radial_panel_breaks(h, kernel.domain_radius, &kernel.radial_breaks);
    let (nodes, weights) = gauss_legendre(PV_RADIAL_ORDER);
    let dth = TWO_PI / PV_ANGULAR_SAMPLES as f64;
    let dirs: Vec<Vec2> = (0..PV_ANGULAR_SAMPLES)
        .map(|j| {
            let th = (j as f64 + 0.5) * dth;
            Vec2::new(th.cos(), th.sin())
        })
        .collect();
    let mut acc = 0.0;
    for seg in breaks.windows(2) {
        let mid = 0.5 * (seg[0] + seg[1]);
        let rad = 0.5 * (seg[1] - seg[0]);
        for (t, wq) in nodes.iter().zip(&weights) {
            let rho = mid + rad * t;
            let wr = wq * rad * rho * dth;
            for d in &dirs {
                let y = x + d.scale(rho);
                acc += wr * (kernel.evaluator)(x, y, h) * f(y);
            }
        }
    }
    acc
}

/// Checks the Cauchy trend of an exclusion sweep and Richardson-
/// extrapolates to h → 0. Returns (limit, last gap).
///
/// The convergence order is read off the last two gap ratios when the
/// radii shrink geometrically (the kernels here range from O(h^α) for
/// Hölder data to O(h²) after angular cancellation), falling back to the
/// linear model otherwise. Sweeps whose gaps sit below the noise floor
/// return the last value unchanged.
pub(crate) fn extrapolate_sweep(values: &[(f64, f64)], context: &'static str) -> Result<(f64, f64)> {
    assert!(values.len() >= 2, "extrapolation needs at least two exclusion radii");
    let gaps: Vec<f64> = values.windows(2).map(|w| (w[1].1 - w[0].1).abs()).collect();
    let last_gap = *gaps.last().unwrap();
    let (h1, v1) = values[values.len() - 2];
    let (h2, v2) = values[values.len() - 1];
    if last_gap <= PV_CAUCHY_FLOOR {
        return Ok((v2, last_gap));
    }
    let mut order = 1.0;
    if gaps.len() >= 2 {
        let prev_gap = gaps[gaps.len() - 2];
        if last_gap > 0.9 * prev_gap {
            return Err(Error::QuadratureNonConvergence { context, gap: last_gap });
        }
        let h0 = values[values.len() - 3].0;
        let ratio = h1 / h2;
        // Gap ratios expose h^p only when the radius ratio is steady.
        if prev_gap > PV_CAUCHY_FLOOR && (h0 / h1 - ratio).abs() < 0.01 * ratio {
            order = (prev_gap / last_gap).ln() / ratio.ln();
            order = order.clamp(0.4, 3.0);
        }
    }
    let ratio = h1 / h2;
    let limit = v2 + (v2 - v1) / (ratio.powf(order) - 1.0);
    Ok((limit, last_gap))
}

/// Result of a principal-value sweep: the extrapolated limit, the raw
/// value at each exclusion radius, and the final Cauchy gap.
#[derive(Debug, Clone)]
pub struct PvResult {
    pub value: f64,
    pub per_radius: Vec<(f64, f64)>,
    pub cauchy_gap: f64,
}

/// PV ∫ L(x, y) f(y) dy: polar quadrature outside each exclusion radius
/// in the (decreasing) list, then linear-in-h extrapolation of the last
/// two values. Errs when the sweep fails its Cauchy criterion.
pub fn pv_transform<F: Fn(Vec2) -> f64>(
    kernel: &KernelSample,
    f: F,
    x: Vec2,
    exclusion_radii: &[f64],
) -> Result<PvResult> {
    assert!(exclusion_radii.len() >= 2, "need at least two exclusion radii");
    for pair in exclusion_radii.windows(2) {
        assert!(pair[0] > pair[1] && pair[1] > 0.0, "radii must decrease and stay positive");
    }
    assert!(exclusion_radii[0] < kernel.domain_radius);
    let per_radius: Vec<(f64, f64)> = exclusion_radii
        .iter()
        .map(|&h| (h, annulus_scalar_quadrature(kernel, &f, x, h)))
        .collect();
    let (value, cauchy_gap) = extrapolate_sweep(&per_radius, "principal-value exclusion sweep")?;
    Ok(PvResult { value, per_radius, cauchy_gap })
}

/// Matrix analogue of [`PvResult`] for the full cutoff-gradient kernel.
#[derive(Debug, Clone)]
pub struct PvMatrixResult {
    pub value: Mat2,
    pub per_radius: Vec<(f64, Mat2)>,
    pub cauchy_gap: f64,
}

/// PV ∫ ∇(a_r K)(x−y) f(y) dy, all four components in one quadrature
/// pass. Must agree with four per-component [`pv_transform`] calls; the
/// shared pass just avoids recomputing the profile four times.
pub fn pv_grad_cutoff_transform<F: Fn(Vec2) -> f64>(
    profile: &CutoffProfile,
    r: f64,
    f: F,
    x: Vec2,
    exclusion_radii: &[f64],
) -> Result<PvMatrixResult> {
    assert!(exclusion_radii.len() >= 2, "need at least two exclusion radii");
    for pair in exclusion_radii.windows(2) {
        assert!(pair[0] > pair[1] && pair[1] > 0.0, "radii must decrease and stay positive");
    }
    assert!(exclusion_radii[0] < 2.0 * r);
    let feature_radii = [r, 2.0 * r];
    let (nodes, weights) = gauss_legendre(PV_RADIAL_ORDER);
    let dth = TWO_PI / PV_ANGULAR_SAMPLES as f64;
    let dirs: Vec<Vec2> = (0..PV_ANGULAR_SAMPLES)
        .map(|j| {
            let th = (j as f64 + 0.5) * dth;
            Vec2::new(th.cos(), th.sin())
        })
        .collect();
    let mut per_radius = Vec::with_capacity(exclusion_radii.len());
    for &h in exclusion_radii {
        let breaks = radial_panel_breaks(h, 2.0 * r, &feature_radii);
        let mut acc = Mat2::ZERO;
        for seg in breaks.windows(2) {
            let mid = 0.5 * (seg[0] + seg[1]);
            let rad = 0.5 * (seg[1] - seg[0]);
            for (t, wq) in nodes.iter().zip(&weights) {
                let rho = mid + rad * t;
                let wr = wq * rad * rho * dth;
                for d in &dirs {
                    let z = d.scale(rho);
                    let y = x + z;
                    // Kernel argument is x − y = −z.
                    acc = acc.add(grad_cutoff_kernel(profile, r, h, -z).scale(wr * f(y)));
                }
            }
        }
        per_radius.push((h, acc));
    }
    let mut limits = [0.0f64; 4];
    let mut cauchy_gap = 0.0f64;
    for idx in 0..4 {
        let component: Vec<(f64, f64)> =
            per_radius.iter().map(|&(h, m)| (h, m.entries()[idx])).collect();
        let (value, gap) = extrapolate_sweep(&component, "principal-value exclusion sweep")?;
        limits[idx] = value;
        cauchy_gap = cauchy_gap.max(gap);
    }
    Ok(PvMatrixResult {
        value: Mat2::new(limits[0], limits[1], limits[2], limits[3]),
        per_radius,
        cauchy_gap,
    })
}

/// Discrete estimate of ‖L‖* = sup over pairs of
/// |x−y|²·|L(x,y)| + |x−y|³·|∇ₓL(x,y)|, the x-gradient by centered
/// differences with a step proportional to |x−y|. Monotone nondecreasing
/// in the sample set.
pub fn kernel_star_norm(kernel: &KernelSample, sample_pairs: &[(Vec2, Vec2)]) -> f64 {
    let mut sup = 0.0f64;
    for &(x, y) in sample_pairs {
        let d = x.distance(y);
        assert!(d > 0.0, "star-norm pairs must avoid the diagonal");
        let value = (kernel.evaluator)(x, y, 0.0).abs();
        let step = STAR_NORM_FD_STEP * d;
        let d1 = ((kernel.evaluator)(Vec2::new(x.x1 + step, x.x2), y, 0.0)
            - (kernel.evaluator)(Vec2::new(x.x1 - step, x.x2), y, 0.0))
            / (2.0 * step);
        let d2 = ((kernel.evaluator)(Vec2::new(x.x1, x.x2 + step), y, 0.0)
            - (kernel.evaluator)(Vec2::new(x.x1, x.x2 - step), y, 0.0))
            / (2.0 * step);
        sup = sup.max(d * d * value + d * d * d * Vec2::new(d1, d2).norm());
    }
    sup
}

/// Deterministic pair sample for the star-norm estimator: separations
/// log-spaced over four decades up to the support edge, directions on the
/// golden-angle sequence, base points cycling through fixed offsets.
pub fn star_norm_sample_pairs(domain_radius: f64, count: usize) -> Vec<(Vec2, Vec2)> {
    assert!(count >= 2 && domain_radius > 0.0);
    let golden = std::f64::consts::PI * (3.0 - 5.0f64.sqrt());
    let offsets = [
        Vec2::ZERO,
        Vec2::new(0.31 * domain_radius, -0.12 * domain_radius),
        Vec2::new(-0.22 * domain_radius, 0.27 * domain_radius),
        Vec2::new(0.08 * domain_radius, 0.41 * domain_radius),
    ];
    (0..count)
        .map(|i| {
            let frac = i as f64 / (count - 1) as f64;
            let sep = domain_radius * 0.98 * 10f64.powf(-4.0 * (1.0 - frac));
            let th = i as f64 * golden;
            let x = offsets[i % offsets.len()];
            (x, x - Vec2::new(th.cos(), th.sin()).scale(sep))
        })
        .collect()
}
