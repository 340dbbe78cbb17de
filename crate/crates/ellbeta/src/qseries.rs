//! Single-base building blocks: q-shifted factorials, theta functions, and
//! the modified basic hypergeometric series.
//!
//! The series carry a confluence index `n`: an extra factor
//! `((-1)^k q^binom(k,2))^(n+s+1-r)` on the k-th term. Positive exponents
//! give entire, superexponentially convergent sums; exponent zero is an
//! ordinary power series in `z`.

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

const ONE: C64 = C64::new(1.0, 0.0);

/// Truncation control shared by products and series.
pub const PROD_EPS: f64 = 1e-18;
pub const TAIL_EPS: f64 = 1e-16;
pub const SERIES_CAP: usize = 100_000;

/// Infinite q-shifted factorial `(x;q) = prod_{j>=0} (1 - x q^j)`.
///
/// Leading factors are multiplied out until the argument is small, then the
/// logarithmic tail `log(y;q) = -sum_k y^k / (k(1-q^k))` is summed; the
/// geometric decay makes the truncation bound rigorous.
pub fn qpoch_inf(x: C64, q: C64) -> Result<C64> {
    if q.norm() >= 1.0 {
        return Err(Error::InvalidBase(format!("|q| = {} >= 1", q.norm())));
    }
    let mut prefix = ONE;
    let mut y = x;
    let mut guard = 0;
    while y.norm() > 0.5 {
        prefix *= ONE - y;
        if prefix.norm() == 0.0 {
            return Ok(C64::new(0.0, 0.0));
        }
        y *= q;
        guard += 1;
        if guard > 10_000 {
            return Err(Error::SeriesDiverged);
        }
    }
    let mut log_tail = C64::new(0.0, 0.0);
    let mut yk = y;
    let mut qk = q;
    for k in 1..=1_000 {
        let term = yk / ((ONE - qk) * k as f64);
        log_tail -= term;
        if term.norm() < PROD_EPS {
            break;
        }
        yk *= y;
        qk *= q;
    }
    Ok(prefix * log_tail.exp())
}

/// Finite q-shifted factorial `(x;q)_k`, for any integer `k`.
///
/// Negative orders use `(x;q)_{-n} = 1 / prod_{j=1..n} (1 - x q^{-j})` and
/// fail on an exact pole.
pub fn qpoch_k(x: C64, q: C64, k: i64) -> Result<C64> {
    if q.norm() >= 1.0 {
        return Err(Error::InvalidBase(format!("|q| = {} >= 1", q.norm())));
    }
    if k >= 0 {
        let mut out = ONE;
        let mut xq = x;
        for _ in 0..k {
            out *= ONE - xq;
            xq *= q;
        }
        Ok(out)
    } else {
        let mut out = ONE;
        let mut xq = x;
        for _ in 0..(-k) {
            xq /= q;
            let factor = ONE - xq;
            if factor.norm() == 0.0 {
                return Err(Error::PoleProximity(format!(
                    "(x;q)_k pole at x = {x}, k = {k}"
                )));
            }
            out *= factor;
        }
        Ok(ONE / out)
    }
}

/// Theta function `theta(x;q) = (x;q) (q/x;q)`.
pub fn theta(x: C64, q: C64) -> Result<C64> {
    if x.norm() == 0.0 {
        return Err(Error::PoleProximity("theta at x = 0".into()));
    }
    Ok(qpoch_inf(x, q)? * qpoch_inf(q / x, q)?)
}

/// `theta(a b^{+-1};q) = theta(ab;q) theta(a/b;q)`.
pub fn theta_pm(a: C64, b: C64, q: C64) -> Result<C64> {
    Ok(theta(a * b, q)? * theta(a / b, q)?)
}

/// Parameters of the modified series
/// `phi^{(n)}[a_1..a_r; b_1..b_s; q, z]
///  = sum_k (a_1..a_r;q)_k / ((q, b_1..b_s;q)_k) z^k ((-1)^k q^C(k,2))^(n+s+1-r)`.
#[derive(Clone, Debug)]
pub struct SeriesParams {
    pub upper: Vec<C64>,
    pub lower: Vec<C64>,
    pub n: i64,
    pub q: C64,
    pub z: C64,
}

impl SeriesParams {
    /// The confluence exponent `n + s + 1 - r`.
    pub fn exponent(&self) -> i64 {
        self.n + self.lower.len() as i64 + 1 - self.upper.len() as i64
    }
}

/// Evaluates the modified basic hypergeometric series by term recursion.
///
/// Stops when three consecutive terms fall below `TAIL_EPS` relative to the
/// partial sum, or exactly when an upper parameter terminates the series.
pub fn phi_series(p: &SeriesParams) -> Result<C64> {
    if p.q.norm() >= 1.0 {
        return Err(Error::InvalidBase(format!("|q| = {} >= 1", p.q.norm())));
    }
    let e = p.exponent();
    if p.z.norm() == 0.0 {
        return Ok(ONE);
    }
    if e < 0 && !has_terminating_upper(p) {
        return Err(Error::SeriesDiverged);
    }
    if e == 0 && p.z.norm() >= 1.0 && !has_terminating_upper(p) {
        return Err(Error::SeriesDiverged);
    }

    let mut sum = C64::new(0.0, 0.0);
    let mut term = ONE;
    let mut qk = ONE; // q^k
    let mut small_run = 0;
    for _k in 0..SERIES_CAP {
        sum += term;
        // an upper factor at zero terminates the series before any pole
        if p.upper.iter().any(|a| (ONE - a * qk).norm() <= ZERO_EPS) {
            return Ok(sum);
        }
        // ratio term_{k+1} / term_k
        let mut ratio = p.z;
        if e != 0 {
            ratio *= powi(-qk, e);
        }
        for a in &p.upper {
            ratio *= ONE - a * qk;
        }
        let mut denom = ONE - p.q * qk;
        for b in &p.lower {
            let factor = ONE - b * qk;
            if factor.norm() <= ZERO_EPS {
                return Err(Error::SeriesPole);
            }
            denom *= factor;
        }
        ratio /= denom;
        term *= ratio;
        if !term.norm().is_finite() || term.norm() > 1e120 {
            return Err(Error::SeriesDiverged);
        }
        if term.norm() < TAIL_EPS * (sum.norm() + f64::MIN_POSITIVE) {
            small_run += 1;
            if small_run >= 3 {
                return Ok(sum + term);
            }
        } else {
            small_run = 0;
        }
        qk *= p.q;
    }
    Err(Error::SeriesDiverged)
}

/// Factors within this distance of zero count as exact zeros/poles; the
/// parameters producing them are q-power products that floating point does
/// not always land on the nose.
const ZERO_EPS: f64 = 1e-13;

fn has_terminating_upper(p: &SeriesParams) -> bool {
    // termination: some upper parameter is q^{-N}, so 1 - a q^N = 0
    let mut qk = ONE;
    for _ in 0..10_000 {
        if p.upper.iter().any(|a| (ONE - a * qk).norm() <= ZERO_EPS) {
            return true;
        }
        qk *= p.q;
        if qk.norm() < 1e-200 {
            return false;
        }
    }
    false
}

pub(crate) fn powi(base: C64, e: i64) -> C64 {
    if e >= 0 {
        base.powu(e as u32)
    } else {
        ONE / base.powu((-e) as u32)
    }
}

/// Parameters of the modified very-well-poised series
/// `W^{(n)}(a; b_1..b_k; q, z)`.
#[derive(Clone, Debug)]
pub struct VWPParams {
    pub a: C64,
    pub b: Vec<C64>,
    pub n: i64,
    pub q: C64,
    pub z: C64,
}

/// Expands the very-well-poised pattern `a, +-q sqrt(a), b_i` over
/// `+-sqrt(a), aq/b_i` and delegates to [`phi_series`]. The principal square
/// root is used; the expanded series only sees the branch-symmetric pair.
pub fn vwp_series(p: &VWPParams) -> Result<C64> {
    if p.a.norm() == 0.0 {
        return Err(Error::ConstraintViolated("very-well-poised a = 0".into()));
    }
    let sa = p.a.sqrt();
    let mut upper = vec![p.a, p.q * sa, -(p.q * sa)];
    let mut lower = vec![sa, -sa];
    for b in &p.b {
        if b.norm() == 0.0 {
            return Err(Error::ConstraintViolated(
                "very-well-poised parameter b = 0".into(),
            ));
        }
        upper.push(*b);
        lower.push(p.a * p.q / b);
    }
    phi_series(&SeriesParams {
        upper,
        lower,
        n: p.n,
        q: p.q,
        z: p.z,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha12Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    // Reference values computed with 40-digit arithmetic from the defining
    // products and sums.
    #[test]
    fn qpoch_inf_matches_reference_values() {
        let v = qpoch_inf(c(0.5, 0.0), c(0.5, 0.0)).unwrap();
        assert!((v.re - 0.2887880950866024212788997219292307800889).abs() < 1e-14);
        assert!(v.im.abs() < 1e-15);
        let v = qpoch_inf(c(0.3, 0.1), c(0.45, 0.15)).unwrap();
        let expected = c(
            0.5616269239967431816000877107869795022445,
            -0.2140702766371597759709299247238402643032,
        );
        assert!((v - expected).norm() < 1e-14);
    }

    #[test]
    fn qpoch_inf_against_direct_product() {
        // oracle: direct product with 200 factors
        let mut rng = ChaCha12Rng::seed_from_u64(2);
        for _ in 0..50 {
            let x = C64::from_polar(2.5 * rng.gen::<f64>(), 6.28 * rng.gen::<f64>());
            let q = C64::from_polar(0.1 + 0.6 * rng.gen::<f64>(), 6.28 * rng.gen::<f64>());
            let mut direct = ONE;
            let mut xq = x;
            for _ in 0..200 {
                direct *= ONE - xq;
                xq *= q;
            }
            let fast = qpoch_inf(x, q).unwrap();
            assert!(
                (fast - direct).norm() <= 1e-12 * (1.0 + direct.norm()),
                "x={x} q={q}: {fast} vs {direct}"
            );
        }
    }

    #[test]
    fn qpoch_edge_cases() {
        let q = c(0.4, 0.0);
        assert_eq!(qpoch_inf(c(0.0, 0.0), q).unwrap(), ONE);
        assert_eq!(qpoch_inf(ONE, q).unwrap(), c(0.0, 0.0));
        assert!(qpoch_inf(c(0.3, 0.0), c(1.1, 0.0)).is_err());
    }

    #[test]
    fn qpoch_k_small_orders_and_recurrence() {
        let x = c(0.35, 0.2);
        let q = c(0.3, -0.1);
        assert_eq!(qpoch_k(x, q, 0).unwrap(), ONE);
        assert!((qpoch_k(x, q, 1).unwrap() - (ONE - x)).norm() < 1e-16);
        let expected = ONE / (ONE - x / q);
        assert!((qpoch_k(x, q, -1).unwrap() - expected).norm() < 1e-15);
        // ratio definition cross-check against infinite products
        let via_inf = qpoch_inf(x, q).unwrap() / qpoch_inf(x / q, q).unwrap();
        assert!((qpoch_k(x, q, -1).unwrap() - via_inf).norm() < 1e-13);
        // recurrence (x;q)_{k+1} = (x;q)_k (1 - x q^k)
        for k in -5..=20i64 {
            let lhs = qpoch_k(x, q, k + 1).unwrap();
            let rhs = qpoch_k(x, q, k).unwrap() * (ONE - x * powi(q, k));
            assert!((lhs - rhs).norm() < 1e-12 * (1.0 + rhs.norm()), "k = {k}");
        }
    }

    #[test]
    fn theta_reference_and_symmetries() {
        let v = theta(c(1.7, -0.4), c(0.35, 0.1)).unwrap();
        let expected = c(
            -0.0866680906592782825402423554401598210923,
            0.1372957880532215408969915086292080510483,
        );
        assert!((v - expected).norm() < 1e-14);
        let q = c(0.45, 0.0);
        // theta(q;q) = 0
        assert!(theta(q, q).unwrap().norm() < 1e-16);
        // theta(x;q) = theta(q/x;q)
        let x = c(0.6, 0.3);
        let a = theta(x, q).unwrap();
        let b = theta(q / x, q).unwrap();
        assert!((a - b).norm() < 1e-14);
        // quasi-periodicity theta(qx;q) = -theta(x;q)/x
        let lhs = theta(q * x, q).unwrap();
        let rhs = -a / x;
        assert!((lhs - rhs).norm() < 1e-14);
        assert!(theta(c(0.0, 0.0), q).is_err());
    }

    #[test]
    fn fundamental_theta_relation() {
        // (1/y) theta(w x^{+-1}, y z^{+-1}) + (1/z) theta(w y^{+-1}, z x^{+-1})
        //   + (1/x) theta(w z^{+-1}, x y^{+-1}) = 0
        let mut rng = ChaCha12Rng::seed_from_u64(41);
        let q = c(0.3, 0.05);
        for _ in 0..25 {
            let mut draw =
                || C64::from_polar(0.4 + 1.2 * rng.gen::<f64>(), 6.28 * rng.gen::<f64>());
            let (w, x, y, z) = (draw(), draw(), draw(), draw());
            let t1 = theta_pm(w, x, q).unwrap() * theta_pm(y, z, q).unwrap() / y;
            let t2 = theta_pm(w, y, q).unwrap() * theta_pm(z, x, q).unwrap() / z;
            let t3 = theta_pm(w, z, q).unwrap() * theta_pm(x, y, q).unwrap() / x;
            let max = t1.norm().max(t2.norm()).max(t3.norm());
            assert!(
                (t1 + t2 + t3).norm() < 1e-12 * max,
                "relation violated at w={w} x={x} y={y} z={z}"
            );
        }
    }

    #[test]
    fn phi_series_basics() {
        let q = c(0.4, 0.0);
        // z = 0 gives 1
        let p = SeriesParams {
            upper: vec![c(0.3, 0.0)],
            lower: vec![c(0.7, 0.0)],
            n: 0,
            q,
            z: c(0.0, 0.0),
        };
        assert_eq!(phi_series(&p).unwrap(), ONE);
        // 2phi1 against a 40-digit direct sum
        let p = SeriesParams {
            upper: vec![c(0.3, 0.0), c(0.5, 0.0)],
            lower: vec![c(0.7, 0.0)],
            n: 0,
            q,
            z: c(0.2, 0.0),
        };
        let v = phi_series(&p).unwrap();
        assert!((v.re - 1.503378020960114608793257718723040989295).abs() < 1e-14);
        assert!(v.im.abs() < 1e-16);
    }

    #[test]
    fn phi_series_terminates_exactly() {
        let q = c(0.35, 0.0);
        // upper parameter q^{-2}: exactly 3 nonzero terms
        let a = ONE / (q * q);
        let p = SeriesParams {
            upper: vec![a, c(0.4, 0.0)],
            lower: vec![c(0.6, 0.0)],
            n: 0,
            q,
            z: c(3.7, 0.0), // termination beats |z| > 1
        };
        let v = phi_series(&p).unwrap();
        let mut direct = C64::new(0.0, 0.0);
        for k in 0..3i64 {
            let t = qpoch_k(a, q, k).unwrap() * qpoch_k(c(0.4, 0.0), q, k).unwrap()
                / (qpoch_k(q, q, k).unwrap() * qpoch_k(c(0.6, 0.0), q, k).unwrap())
                * powi(c(3.7, 0.0), k);
            direct += t;
        }
        assert!((v - direct).norm() < 1e-12 * direct.norm());
    }

    #[test]
    fn modified_series_matches_padded_zeros() {
        // the (n) superscript equals padding with zero parameters:
        // n > 0: n zeros appended to the lower row; n < 0: -n zeros to the upper
        let q = c(0.35, 0.0);
        let z = c(0.45, 0.0);
        let upper = vec![c(0.25, 0.0), c(0.6, 0.0)];
        let lower = vec![c(0.75, 0.0)];
        for n in [-1i64, 0, 1, 2] {
            let modified = phi_series(&SeriesParams {
                upper: upper.clone(),
                lower: lower.clone(),
                n,
                q,
                z,
            });
            let (mut pu, mut pl) = (upper.clone(), lower.clone());
            if n > 0 {
                pl.extend(std::iter::repeat(C64::new(0.0, 0.0)).take(n as usize));
            } else {
                pu.extend(std::iter::repeat(C64::new(0.0, 0.0)).take((-n) as usize));
            }
            let padded = phi_series(&SeriesParams {
                upper: pu,
                lower: pl,
                n: 0,
                q,
                z,
            });
            match (modified, padded) {
                (Ok(a), Ok(b)) => {
                    assert!((a - b).norm() < 1e-13 * (1.0 + b.norm()), "n = {n}");
                }
                (Err(_), Err(_)) => {
                    // both reject the same divergent regime
                    assert!(n < 0);
                }
                (a, b) => panic!("n = {n}: one side failed: {a:?} vs {b:?}"),
            }
        }
    }

    #[test]
    fn series_invariant_under_parameter_permutation() {
        let q = c(0.3, 0.1);
        let base = SeriesParams {
            upper: vec![c(0.3, 0.2), c(-0.4, 0.1), c(0.2, 0.0)],
            lower: vec![c(0.55, -0.2), c(0.8, 0.1)],
            n: 1,
            q,
            z: c(0.9, 0.3),
        };
        let v = phi_series(&base).unwrap();
        let mut permuted = base.clone();
        permuted.upper.rotate_left(1);
        permuted.lower.swap(0, 1);
        let w = phi_series(&permuted).unwrap();
        assert!((v - w).norm() < 1e-13 * v.norm());
    }

    #[test]
    fn divergent_regimes_are_rejected() {
        let q = c(0.4, 0.0);
        // exponent 0 and |z| >= 1, non-terminating
        let p = SeriesParams {
            upper: vec![c(0.3, 0.0), c(0.5, 0.0)],
            lower: vec![c(0.7, 0.0)],
            n: 0,
            q,
            z: c(1.2, 0.0),
        };
        assert!(matches!(phi_series(&p), Err(Error::SeriesDiverged)));
        // negative exponent, non-terminating
        let p = SeriesParams {
            upper: vec![c(0.3, 0.0)],
            lower: vec![],
            n: -1,
            q,
            z: c(0.2, 0.0),
        };
        assert!(matches!(phi_series(&p), Err(Error::SeriesDiverged)));
        // lower-parameter pole before termination
        let p = SeriesParams {
            upper: vec![c(0.3, 0.0)],
            lower: vec![ONE / q],
            n: 1,
            q,
            z: c(0.2, 0.0),
        };
        assert!(matches!(phi_series(&p), Err(Error::SeriesPole)));
    }

    #[test]
    fn vwp_series_basics() {
        let q = c(0.3, 0.0);
        let p = VWPParams {
            a: c(0.2, 0.1),
            b: vec![c(0.4, 0.0), c(0.3, -0.2)],
            n: 0,
            q,
            z: c(0.0, 0.0),
        };
        assert_eq!(vwp_series(&p).unwrap(), ONE);

        // k = 1 term of the expansion: the +-q sqrt(a) over +-sqrt(a) pair
        // contributes (1 - a q^2)/(1 - a), the b_i pair (1-b_i)/(1-aq/b_i),
        // and the confluence factor at exponent n is (-1)^n
        let a = c(0.2, 0.1);
        let b = vec![c(0.4, 0.0), c(0.3, -0.2)];
        let z = c(0.05, 0.02);
        let p = VWPParams {
            a,
            b: b.clone(),
            n: 1,
            q,
            z,
        };
        let v = vwp_series(&p).unwrap();
        let mut k1 = (ONE - a * q * q) / (ONE - a) * (ONE - a) * z / (ONE - q);
        for bi in &b {
            k1 *= (ONE - bi) / (ONE - a * q / bi);
        }
        k1 = -k1;
        let tail_scale = v - ONE - k1;
        assert!(
            tail_scale.norm() < 0.1 * k1.norm(),
            "k=1 structure mismatch: remainder {tail_scale}"
        );

        // zero parameters are rejected
        assert!(vwp_series(&VWPParams {
            a: c(0.0, 0.0),
            b: vec![],
            n: 0,
            q,
            z
        })
        .is_err());
    }
}
