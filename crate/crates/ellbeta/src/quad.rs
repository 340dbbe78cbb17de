//! Trapezoidal quadrature on circles around the origin.
//!
//! For a periodic analytic integrand the trapezoidal rule converges
//! geometrically in the node count; nodes are doubled (reusing previous
//! evaluations) until two consecutive levels agree to tolerance.

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

#[derive(Copy, Clone, Debug)]
pub struct QuadOptions {
    pub nodes_init: usize,
    pub nodes_max: usize,
    pub tol: f64,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions {
            nodes_init: 64,
            nodes_max: 1 << 15,
            tol: 1e-11,
        }
    }
}

#[derive(Clone, Debug)]
pub struct QuadResult {
    pub value: C64,
    pub nodes: usize,
    /// Successive (node count, value) pairs, one per doubling level.
    pub history: Vec<(usize, C64)>,
    pub converged: bool,
}

/// Computes the contour mean `\oint f(z) dz / (2 pi i z)` over the circle
/// `|z| = radius`, which equals the average of `f` over equispaced nodes.
pub fn circle_integral<F>(f: F, radius: f64, opts: &QuadOptions) -> Result<QuadResult>
where
    F: Fn(C64) -> Result<C64>,
{
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(Error::ContourInvalid(format!("radius {radius}")));
    }
    let mut n = opts.nodes_init.max(4).next_power_of_two();
    let mut sum = pairwise_eval(&f, radius, n, 0, 1)?;
    let mut max_sample = sum.1;
    let mut value = sum.0 / n as f64;
    let mut history = vec![(n, value)];
    while 2 * n <= opts.nodes_max {
        // the odd nodes of the doubled grid
        let odd = pairwise_eval(&f, radius, 2 * n, 1, 2)?;
        max_sample = max_sample.max(odd.1);
        let next = (sum.0 + odd.0) / (2 * n) as f64;
        sum.0 += odd.0;
        n *= 2;
        let delta = (next - value).norm();
        value = next;
        history.push((n, value));
        if delta <= opts.tol * value.norm() + 1e-14 * max_sample {
            return Ok(QuadResult {
                value,
                nodes: n,
                history,
                converged: true,
            });
        }
    }
    Err(Error::QuadratureNotConverged {
        max_nodes: opts.nodes_max,
        last_delta: history
            .last()
            .and_then(|last| {
                history
                    .len()
                    .checked_sub(2)
                    .map(|i| (last.1 - history[i].1).norm())
            })
            .unwrap_or(f64::NAN),
    })
}

/// Sums `f` over nodes `k = offset, offset + step, ...` of an `n`-point grid
/// with a pairwise reduction tree (deterministic, cancellation-friendly).
/// Returns the sum and the largest sample magnitude.
fn pairwise_eval<F>(f: &F, radius: f64, n: usize, offset: usize, step: usize) -> Result<(C64, f64)>
where
    F: Fn(C64) -> Result<C64>,
{
    let mut samples = Vec::with_capacity(n / step);
    let mut max_abs: f64 = 0.0;
    let mut k = offset;
    while k < n {
        let angle = std::f64::consts::TAU * k as f64 / n as f64;
        let z = C64::from_polar(radius, angle);
        let v = f(z)?;
        max_abs = max_abs.max(v.norm());
        samples.push(v);
        k += step;
    }
    Ok((pairwise_sum(&samples), max_abs))
}

pub fn pairwise_sum(xs: &[C64]) -> C64 {
    match xs.len() {
        0 => C64::new(0.0, 0.0),
        1 => xs[0],
        2 => xs[0] + xs[1],
        n => pairwise_sum(&xs[..n / 2]) + pairwise_sum(&xs[n / 2..]),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn laurent_coefficients_are_picked_out() {
        // f(z) = z^3 + 2 + 5 z^{-2}: the contour mean is the constant term
        let f = |z: C64| Ok(z.powu(3) + C64::new(2.0, 0.0) + C64::new(5.0, 0.0) / (z * z));
        let r = circle_integral(f, 1.0, &QuadOptions::default()).unwrap();
        assert!((r.value - C64::new(2.0, 0.0)).norm() < 1e-13);
        assert!(r.converged);
    }

    #[test]
    fn geometric_convergence_until_floor() {
        // poles at 0.6 and 1/0.6: annulus ratio 0.6 gives geometric decay
        let f = |z: C64| {
            Ok(C64::new(1.0, 0.0)
                / ((C64::new(1.0, 0.0) - C64::new(0.6, 0.0) / z)
                    * (C64::new(1.0, 0.0) - C64::new(0.6, 0.0) * z)))
        };
        let opts = QuadOptions {
            nodes_init: 8,
            nodes_max: 1 << 14,
            tol: 1e-13,
        };
        let r = circle_integral(f, 1.0, &opts).unwrap();
        // exact value: sum_k 0.6^{2k} = 1/(1-0.36)
        let exact = C64::new(1.0 / 0.64, 0.0);
        assert!((r.value - exact).norm() < 1e-12);
        // error shrinks by at least 10x per doubling until the floor
        let errors: Vec<f64> = r.history.iter().map(|(_, v)| (v - exact).norm()).collect();
        for pair in errors.windows(2) {
            if pair[0] > 1e-13 {
                assert!(
                    pair[1] < pair[0] / 10.0,
                    "doubling did not square the error: {errors:?}"
                );
            }
        }
    }

    #[test]
    fn integrand_errors_propagate() {
        let f = |_z: C64| -> Result<C64> { Err(Error::PoleProximity("test".into())) };
        assert!(circle_integral(f, 1.0, &QuadOptions::default()).is_err());
        let g = |z: C64| Ok(z);
        assert!(circle_integral(g, f64::NAN, &QuadOptions::default()).is_err());
    }

    #[test]
    fn nonconvergence_is_reported() {
        // a pole sitting essentially on the contour stalls convergence
        let f = |z: C64| Ok(C64::new(1.0, 0.0) / (z - C64::new(1.0, 1e-9)));
        let opts = QuadOptions {
            nodes_init: 8,
            nodes_max: 64,
            tol: 1e-14,
        };
        assert!(matches!(
            circle_integral(f, 1.0, &opts),
            Err(Error::QuadratureNotConverged { .. })
        ));
    }
}
