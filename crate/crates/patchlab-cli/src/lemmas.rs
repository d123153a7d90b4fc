//! Standalone numerical lemmas, checked at a sampling budget: the
//! symmetric-matrix reconstruction and its calibrated bound, kernel
//! homogeneity and scale-free star norms for the cutoff-gradient kernels,
//! and the Holder bound of the associated singular transform. A zero
//! budget asks for nothing and succeeds with an empty table.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use patchlab::geometry::{serfati_bound, serfati_reconstruct, Mat2, Vec2};
use patchlab::kernels::{
    default_exclusion_radii, kernel_star_norm, pv_grad_cutoff_transform, star_norm_sample_pairs,
    CutoffProfile, KernelSample,
};
use patchlab::tolerances::{HOLDER_TRANSFORM_CALIBRATION, SERFATI_CALIBRATION};

use crate::errors::{CliError, CliResult};
use crate::table::CheckTable;

const RADII: [f64; 3] = [0.5, 1.0, 2.0];

pub fn run(budget: usize, seed: u64) -> CliResult<()> {
    let mut table = CheckTable::new(format!("lemma sweeps (budget {budget}, seed {seed})"));
    if budget == 0 {
        return table.finish();
    }

    // Reconstruction: recover a symmetric B from its frame products.
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0_f64;
    for _ in 0..budget {
        let b = random_symmetric(&mut rng);
        let m = random_frame(&mut rng, false);
        let rec = serfati_reconstruct(b, m)
            .map_err(|e| CliError::Check(format!("reconstruction sweep: {e}")))?;
        worst = worst.max(rec.sub(b).max_norm() / b.max_norm());
    }
    table.push(
        format!("serfati reconstruction, max relative error ({budget} draws)"),
        worst,
        1e-10,
    );

    // Coverage of the calibrated bound on a fresh, larger ensemble of
    // positively oriented frames.
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let ensemble = 10 * budget;
    let mut worst = 0.0_f64;
    for _ in 0..ensemble {
        let b = random_symmetric(&mut rng);
        let m = random_frame(&mut rng, true);
        let bound = serfati_bound(b, m)
            .map_err(|e| CliError::Check(format!("bound sweep: {e}")))?;
        worst = worst.max(b.max_norm() / (SERFATI_CALIBRATION * bound));
    }
    table.push(
        format!("serfati bound coverage, max |B| / (C * bound) ({ensemble} draws)"),
        worst,
        1.0,
    );

    // Homogeneity: the principal value of the cutoff-gradient kernel over
    // the whole plane must cancel, at every cutoff scale.
    let profile = CutoffProfile::standard();
    let exclusions = default_exclusion_radii();
    for &r in &RADII {
        let pv = pv_grad_cutoff_transform(&profile, r, |_| 1.0, Vec2::ZERO, &exclusions)
            .map_err(|e| CliError::Check(format!("homogeneity check at r = {r}: {e}")))?;
        let worst = pv
            .value
            .entries()
            .into_iter()
            .fold(0.0_f64, |acc, e| acc.max(e.abs()));
        table.push(format!("kernel homogeneity |PV| at cutoff scale r = {r}"), worst, 1e-8);
    }

    // Star norms of the same kernels must not drift with the scale.
    let star_norm_at = |r: f64| -> f64 {
        let pairs = star_norm_sample_pairs(2.0 * r, 400);
        let mut worst = 0.0_f64;
        for row in 0..2 {
            for col in 0..2 {
                let kernel = KernelSample::grad_cutoff_biot_savart(&profile, r, row, col);
                worst = worst.max(kernel_star_norm(&kernel, &pairs));
            }
        }
        worst
    };
    let norms: Vec<f64> = RADII.iter().map(|&r| star_norm_at(r)).collect();
    let spread = norms.iter().fold(0.0_f64, |a, &n| a.max(n))
        / norms.iter().fold(f64::INFINITY, |a, &n| a.min(n));
    table.push("kernel star-norm spread across cutoff scales", spread, 2.0);

    // Holder bound of the cutoff-gradient transform with the frozen
    // calibration, on the fixed grid the calibration was frozen against.
    table.push(
        "holder bound of the cutoff-gradient transform (ratio)",
        holder_transform_ratio(&profile)?,
        1.0,
    );

    table.finish()
}

fn random_symmetric(rng: &mut ChaCha8Rng) -> Mat2 {
    let b11 = rng.gen_range(-2.0..2.0);
    let b12 = rng.gen_range(-2.0..2.0);
    let b22 = rng.gen_range(-2.0..2.0);
    Mat2::new(b11, b12, b12, b22)
}

/// Frame with entries in [-1, 1] and determinant bounded away from zero;
/// `positive` additionally fixes the orientation.
fn random_frame(rng: &mut ChaCha8Rng, positive: bool) -> Mat2 {
    loop {
        let m = Mat2::new(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        );
        let det = m.det();
        if (positive && det > 0.1) || (!positive && det.abs() > 0.1) {
            return m;
        }
    }
}

/// f(x) = min(|x|, 1)^alpha with alpha = 1/2 on a 13x13 grid over
/// [-1.5, 1.5]^2: the per-component discrete seminorm of the transform,
/// divided by the calibrated multiple of [f]'s seminorm.
fn holder_transform_ratio(profile: &CutoffProfile) -> CliResult<f64> {
    let alpha = 0.5;
    let f = |y: Vec2| y.norm().min(1.0).powf(alpha);
    let grid: Vec<Vec2> = (0..13)
        .flat_map(|i| {
            (0..13).map(move |j| Vec2::new(-1.5 + 0.25 * i as f64, -1.5 + 0.25 * j as f64))
        })
        .collect();
    let exclusions = default_exclusion_radii();
    let transform: Vec<Mat2> = grid
        .par_iter()
        .map(|&x| {
            let fx = f(x);
            pv_grad_cutoff_transform(profile, 1.0, |y| f(y) - fx, x, &exclusions).map(|pv| pv.value)
        })
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::Check(format!("holder transform sweep: {e}")))?;
    let mut semi_f = 0.0_f64;
    let mut semi_t = 0.0_f64;
    for i in 0..grid.len() {
        for j in (i + 1)..grid.len() {
            let dist = grid[i].distance(grid[j]).powf(alpha);
            semi_f = semi_f.max((f(grid[i]) - f(grid[j])).abs() / dist);
            let diff = transform[i].sub(transform[j]);
            for e in diff.entries() {
                semi_t = semi_t.max(e.abs() / dist);
            }
        }
    }
    let allowed = HOLDER_TRANSFORM_CALIBRATION / (alpha * (1.0 - alpha)) * semi_f;
    assert!(allowed > 0.0);
    Ok(semi_t / allowed)
}
