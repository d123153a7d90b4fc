//! One-dimensional Gauss-Legendre quadrature and grid helpers used by the
//! kernel and velocity integrators.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

/// Nodes and weights for `n`-point Gauss-Legendre quadrature on [−1, 1].
///
/// Nodes are the roots of the Legendre polynomial Pₙ, found by Newton
/// iteration from the Chebyshev-like initial guess; weights are
/// 2 / ((1 − x²) Pₙ′(x)²). Exact for polynomials of degree ≤ 2n − 1.
/// Rules are memoized per order: the flow integrators reuse small orders
/// millions of times.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<(Vec<f64>, Vec<f64>)>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let rule = {
        let mut map = cache.lock().expect("quadrature cache poisoned");
        Arc::clone(
            map.entry(n)
                .or_insert_with(|| Arc::new(gauss_legendre_uncached(n))),
        )
    };
    (rule.0.clone(), rule.1.clone())
}

fn gauss_legendre_uncached(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "quadrature order must be positive");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    // Roots come in ± pairs; compute the upper half and mirror.
    let half = n.div_ceil(2);
    for i in 0..half {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        // Newton iteration on Pₙ(x) with the three-term recurrence.
        for _ in 0..100 {
            let (p, dp) = legendre_and_derivative(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_and_derivative(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
        let (_, dp) = legendre_and_derivative(n, 0.0);
        weights[n / 2] = 2.0 / (dp * dp);
    }
    (nodes, weights)
}

fn legendre_and_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// ∫ₐᵇ f with `n`-point Gauss-Legendre on the single interval [a, b].
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let (nodes, weights) = gauss_legendre(n);
    let mid = 0.5 * (a + b);
    let rad = 0.5 * (b - a);
    let mut acc = 0.0;
    for (x, w) in nodes.iter().zip(&weights) {
        acc += w * f(mid + rad * x);
    }
    acc * rad
}

/// ∫ over consecutive panels whose endpoints are given by `breaks`
/// (strictly increasing), with `n` Gauss-Legendre points per panel.
pub fn integrate_panels<F: Fn(f64) -> f64>(f: F, breaks: &[f64], n: usize) -> f64 {
    assert!(breaks.len() >= 2, "need at least one panel");
    let (nodes, weights) = gauss_legendre(n);
    let mut acc = 0.0;
    for pair in breaks.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        assert!(b > a, "panel breaks must increase");
        let mid = 0.5 * (a + b);
        let rad = 0.5 * (b - a);
        let mut panel = 0.0;
        for (x, w) in nodes.iter().zip(&weights) {
            panel += w * f(mid + rad * x);
        }
        acc += panel * rad;
    }
    acc
}

/// `count + 1` points from `a` to `b` inclusive, evenly spaced.
pub fn linspace(a: f64, b: f64, count: usize) -> Vec<f64> {
    assert!(count >= 1);
    (0..=count)
        .map(|i| a + (b - a) * (i as f64) / (count as f64))
        .collect()
}

/// `count + 1` points from `a` to `b` inclusive, evenly spaced in log —
/// panel breaks for integrands with power-law behavior near `a`.
pub fn geomspace(a: f64, b: f64, count: usize) -> Vec<f64> {
    assert!(count >= 1);
    assert!(a > 0.0 && b > a, "geometric spacing needs 0 < a < b");
    let la = a.ln();
    let lb = b.ln();
    (0..=count)
        .map(|i| (la + (lb - la) * (i as f64) / (count as f64)).exp())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn polynomials_integrate_exactly() {
        // 5-point rule is exact through degree 9.
        let val = integrate(|x| x.powi(9) + 3.0 * x.powi(4) - x, -1.0, 2.0, 5);
        let exact = (2.0f64.powi(10) - 1.0) / 10.0 + 3.0 * (2.0f64.powi(5) + 1.0) / 5.0
            - (4.0 - 1.0) / 2.0;
        assert_abs_diff_eq!(val, exact, epsilon = 1e-12);
    }

    #[test]
    fn weights_sum_to_interval_length() {
        for n in [1, 2, 3, 8, 16, 33, 64] {
            let (_, w) = gauss_legendre(n);
            assert_abs_diff_eq!(w.iter().sum::<f64>(), 2.0, epsilon = 1e-13);
        }
    }

    #[test]
    fn nodes_are_symmetric_and_sorted() {
        let (nodes, _) = gauss_legendre(16);
        for i in 0..16 {
            assert_abs_diff_eq!(nodes[i], -nodes[15 - i], epsilon = 1e-15);
            if i > 0 {
                assert!(nodes[i] > nodes[i - 1]);
            }
        }
    }

    #[test]
    fn smooth_transcendental_converges() {
        let val = integrate(f64::sin, 0.0, std::f64::consts::PI, 24);
        assert_abs_diff_eq!(val, 2.0, epsilon = 1e-14);
    }

    #[test]
    fn panels_match_single_interval_for_smooth_functions() {
        let breaks = linspace(0.0, 3.0, 7);
        let panel = integrate_panels(|x| (x * x).cos(), &breaks, 16);
        let single = integrate(|x| (x * x).cos(), 0.0, 3.0, 64);
        assert_abs_diff_eq!(panel, single, epsilon = 1e-12);
    }

    #[test]
    fn geometric_panels_capture_log_singularity() {
        // ∫₀¹ ln x dx = −1 with the lower endpoint cropped at 1e−12.
        let breaks = geomspace(1e-12, 1.0, 48);
        let val = integrate_panels(f64::ln, &breaks, 12);
        assert_abs_diff_eq!(val, -1.0, epsilon = 1e-9);
    }

    #[test]
    fn grids_hit_endpoints() {
        let lin = linspace(-2.0, 5.0, 10);
        assert_eq!(lin.len(), 11);
        assert_abs_diff_eq!(lin[0], -2.0);
        assert_abs_diff_eq!(lin[10], 5.0);
        let geo = geomspace(0.1, 10.0, 4);
        assert_abs_diff_eq!(geo[0], 0.1, epsilon = 1e-15);
        assert_abs_diff_eq!(geo[4], 10.0, epsilon = 1e-14);
        assert_abs_diff_eq!(geo[2], 1.0, epsilon = 1e-14);
    }
}
