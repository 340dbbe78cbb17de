//! Two-base objects: `(z;p,q)`, the elliptic gamma function, and the
//! renormalized elliptic beta integral `E^m`.
//!
//! The gamma function is evaluated through the logarithmic series
//! `log Gamma(z) = sum_k (z^k - (pq/z)^k) / (k (1-p^k)(1-q^k))` after the
//! argument is shifted into the annulus around `sqrt|pq|` with the
//! difference equation `Gamma(qz) = theta(z;p) Gamma(z)`; the reduction
//! factors detect pole proximity naturally.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::params::{cpow_rat, monomial_with_rho, BALANCE_TOL};
use crate::qseries::{qpoch_inf, theta};
use crate::quad::{circle_integral, QuadOptions, QuadResult};
use crate::rat::{rat, RatVec};
use crate::rootsys::{enumerate_roots, RootSystemKind, WeylWord};

pub type C64 = Complex64;

const ONE: C64 = C64::new(1.0, 0.0);

/// The pair of bases, both inside the unit disk.
#[derive(Copy, Clone, Debug)]
pub struct EllipticBase {
    pub p: C64,
    pub q: C64,
}

impl EllipticBase {
    pub fn new(p: C64, q: C64) -> Result<Self> {
        if p.norm() >= 1.0 || q.norm() >= 1.0 {
            return Err(Error::InvalidBase(format!(
                "|p| = {}, |q| = {}",
                p.norm(),
                q.norm()
            )));
        }
        Ok(EllipticBase { p, q })
    }

    pub fn real(p: f64, q: f64) -> Result<Self> {
        Self::new(C64::new(p, 0.0), C64::new(q, 0.0))
    }

    pub fn pq(&self) -> C64 {
        self.p * self.q
    }

    /// Balancing target `(pq)^{m+1}`.
    pub fn balancing_target(&self, m: usize) -> C64 {
        self.pq().powu(m as u32 + 1)
    }
}

/// Double product `(z;p,q) = prod_{j,k>=0} (1 - p^j q^k z)`, computed as a
/// product of single-base factorials with a geometric tail bound.
pub fn pq_poch(z: C64, base: &EllipticBase) -> Result<C64> {
    let mut out = ONE;
    let mut x = z;
    for _ in 0..100_000 {
        if x.norm() < crate::qseries::PROD_EPS {
            return Ok(out);
        }
        out *= qpoch_inf(x, base.q)?;
        if out.norm() == 0.0 {
            return Ok(out);
        }
        x *= base.p;
    }
    Ok(out)
}

/// Elliptic gamma function `Gamma(z;p,q) = (pq/z;p,q) / (z;p,q)`.
pub fn elliptic_gamma(z: C64, base: &EllipticBase) -> Result<C64> {
    if z.norm() == 0.0 {
        return Err(Error::PoleProximity("elliptic gamma at z = 0".into()));
    }
    let (p, q) = (base.p, base.q);
    let hi = p.norm().sqrt();
    let lo = hi * q.norm();
    let mut acc = ONE;
    let mut w = z;
    let mut guard = 0;
    while w.norm() >= hi {
        // Gamma(w) = Gamma(qw) / theta(w;p)
        let th = theta(w, p)?;
        if th.norm() < 1e-12 {
            return Err(Error::PoleProximity(format!("elliptic gamma near z = {z}")));
        }
        acc /= th;
        w *= q;
        guard += 1;
        if guard > 10_000 {
            return Err(Error::PoleProximity("argument reduction stalled".into()));
        }
    }
    while w.norm() < lo {
        // Gamma(qw') = theta(w';p) Gamma(w') with w' = w/q
        w /= q;
        acc *= theta(w, p)?;
        guard += 1;
        if guard > 10_000 {
            return Err(Error::PoleProximity("argument reduction stalled".into()));
        }
    }
    // log series on the annulus lo <= |w| < hi
    let pq = base.pq();
    let mut log_gamma = C64::new(0.0, 0.0);
    let mut zk = w;
    let mut wk = pq / w;
    let mut pk = p;
    let mut qk = q;
    for k in 1..=2_000 {
        let term = (zk - wk) / ((ONE - pk) * (ONE - qk) * k as f64);
        log_gamma += term;
        if zk.norm().max(wk.norm()) < crate::qseries::PROD_EPS {
            break;
        }
        zk *= w;
        wk *= pq / w;
        pk *= p;
        qk *= q;
        let _ = k;
    }
    Ok(acc * log_gamma.exp())
}

/// `Gamma(a z) Gamma(a / z)`.
pub fn elliptic_gamma_pm(a: C64, z: C64, base: &EllipticBase) -> Result<C64> {
    Ok(elliptic_gamma(a * z, base)? * elliptic_gamma(a / z, base)?)
}

/// Checks the balancing condition `prod t_r = (pq)^{m+1}` to tolerance.
pub fn check_elliptic_balancing(m: usize, t: &[C64], base: &EllipticBase) -> Result<()> {
    let mut prod = ONE;
    for v in t {
        prod *= v;
    }
    let target = base.balancing_target(m);
    let deviation = (prod - target).norm() / target.norm().max(f64::MIN_POSITIVE);
    if deviation > BALANCE_TOL {
        return Err(Error::BalancingViolated { deviation });
    }
    Ok(())
}

fn check_unit_moduli(t: &[C64]) -> Result<()> {
    for (r, v) in t.iter().enumerate() {
        if v.norm() >= 1.0 {
            return Err(Error::ContourInvalid(format!(
                "|t_{r}| = {} >= 1; the unit circle no longer separates the poles",
                v.norm()
            )));
        }
        if v.norm() == 0.0 {
            return Err(Error::ContourInvalid(format!("t_{r} = 0")));
        }
    }
    Ok(())
}

/// The renormalized elliptic beta integral
/// `E^m(t) = prod_{r<s}(t_r t_s;p,q) (p;p)(q;q)/2 * oint prod_r
/// Gamma(t_r z^{+-1}) / Gamma(z^{+-2}) dz/(2 pi i z)` over the unit circle.
///
/// The kernel `1/Gamma(z^{+-2})` is evaluated in closed form as
/// `theta(z^2;q) theta(p z^2;p)`, which is entire; the only integrand poles
/// come from the gamma factors, so the unit circle is admissible exactly
/// when all `|t_r| < 1`.
pub fn elliptic_beta_integral(
    m: usize,
    t: &[C64],
    base: &EllipticBase,
    quad: &QuadOptions,
) -> Result<C64> {
    Ok(elliptic_beta_integral_quad(m, t, base, quad)?.value)
}

/// Same as [`elliptic_beta_integral`], returning quadrature diagnostics.
pub fn elliptic_beta_integral_quad(
    m: usize,
    t: &[C64],
    base: &EllipticBase,
    quad: &QuadOptions,
) -> Result<QuadResult> {
    let n = 2 * m + 6;
    if t.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: t.len(),
        });
    }
    check_unit_moduli(t)?;
    check_elliptic_balancing(m, t, base)?;

    let mut prefactor = qpoch_inf(base.p, base.p)? * qpoch_inf(base.q, base.q)? / 2.0;
    for r in 0..n {
        for s in r + 1..n {
            prefactor *= pq_poch(t[r] * t[s], base)?;
        }
    }
    let integrand = |z: C64| -> Result<C64> {
        let mut val = theta(z * z, base.q)? * theta(base.p * z * z, base.p)?;
        for v in t {
            val *= elliptic_gamma_pm(*v, z, base)?;
        }
        Ok(val)
    };
    let mut result = circle_integral(integrand, 1.0, quad)?;
    result.value *= prefactor;
    for h in &mut result.history {
        h.1 *= prefactor;
    }
    Ok(result)
}

/// Closed form of the `m = 0` evaluation: `prod_{r<s} (pq/t_r t_s; p,q)`.
pub fn e0_evaluation_rhs(t: &[C64], base: &EllipticBase) -> Result<C64> {
    if t.len() != 6 {
        return Err(Error::DimensionMismatch {
            expected: 6,
            got: t.len(),
        });
    }
    let pq = base.pq();
    let mut out = ONE;
    for r in 0..6 {
        for s in r + 1..6 {
            out *= pq_poch(pq / (t[r] * t[s]), base)?;
        }
    }
    Ok(out)
}

/// `|E^1(t) - E^1(wt)| / |E^1(t)|` for a Weyl word acting multiplicatively.
pub fn w_e7_invariance_residual(
    t: &[C64],
    w: &WeylWord,
    base: &EllipticBase,
    quad: &QuadOptions,
) -> Result<f64> {
    let image = w.act_multiplicative(t, base.pq())?;
    check_unit_moduli(&image)?;
    let lhs = elliptic_beta_integral(1, t, base, quad)?;
    let rhs = elliptic_beta_integral(1, &image, base, quad)?;
    Ok((lhs - rhs).norm() / lhs.norm())
}

/// An equilateral triangle of E7 roots: pairwise inner products are all one.
#[derive(Clone, Debug)]
pub struct TriangleShift {
    pub alpha: RatVec,
    pub beta: RatVec,
    pub gamma: RatVec,
}

impl TriangleShift {
    pub fn new(alpha: RatVec, beta: RatVec, gamma: RatVec) -> Result<Self> {
        let rho = RatVec::rho(8);
        for v in [&alpha, &beta, &gamma] {
            if v.norm2() != rat(2, 1) || !crate::rootsys::is_lattice_vector(v) {
                return Err(Error::BadTriangle(format!("{v} is not a root")));
            }
            if !num_traits::Zero::is_zero(&v.dot(&rho)) {
                return Err(Error::BadTriangle(format!("{v} is not an E7 root")));
            }
        }
        for (a, b) in [(&alpha, &beta), (&alpha, &gamma), (&beta, &gamma)] {
            if a.dot(b) != rat(1, 1) {
                return Err(Error::BadTriangle(format!(
                    "inner product {} . {} = {}, expected 1",
                    a,
                    b,
                    a.dot(b)
                )));
            }
        }
        Ok(TriangleShift {
            alpha,
            beta,
            gamma,
        })
    }

    fn cyclic(&self) -> [(&RatVec, &RatVec, &RatVec); 3] {
        [
            (&self.alpha, &self.beta, &self.gamma),
            (&self.beta, &self.gamma, &self.alpha),
            (&self.gamma, &self.alpha, &self.beta),
        ]
    }
}

/// Shifted parameters `t . p^x` with principal powers of `p`.
pub fn shift_by_p(t: &[C64], x: &RatVec, p: C64) -> Vec<C64> {
    t.iter()
        .zip(x.coords())
        .map(|(v, e)| v * cpow_rat(p, *e))
        .collect()
}

/// Residual of the three-term contiguous relation for `E^1` along an
/// equilateral triangle of E7 roots: the cyclic sum
/// `prod_{delta in S: delta.(A-B) = delta.(A-C) = 1} (t^delta p^(delta.B);q)
///  * t^C theta(t^{B-C};q) E^1(t . p^A)`
/// normalized by the largest term. Lattice monomials `t^x` use the
/// representative with `t^rho = pq`, which the balancing condition fixes.
pub fn p_contiguous_residual(
    t: &[C64],
    tri: &TriangleShift,
    base: &EllipticBase,
    quad: &QuadOptions,
) -> Result<C64> {
    if t.len() != 8 {
        return Err(Error::DimensionMismatch {
            expected: 8,
            got: t.len(),
        });
    }
    check_elliptic_balancing(1, t, base)?;
    let orbit_s = enumerate_roots(RootSystemKind::OrbitS);
    let mut terms = Vec::new();
    for (a, b, c) in tri.cyclic() {
        let shifted = shift_by_p(t, a, base.p);
        check_unit_moduli(&shifted).map_err(|_| {
            Error::ContourInvalid(format!("shift along {a} leaves the unit disk"))
        })?;
        let e1 = elliptic_beta_integral(1, &shifted, base, quad)?;
        let mut coefficient = monomial_with_rho(t, c, base.pq())?
            * theta(monomial_with_rho(t, &(b - c), base.pq())?, base.q)?;
        let ab = a - b;
        let ac = a - c;
        for delta in &orbit_s {
            if delta.dot(&ab) == rat(1, 1) && delta.dot(&ac) == rat(1, 1) {
                let db = delta.dot(b);
                debug_assert!(db.is_integer());
                let x = monomial_with_rho(t, delta, base.pq())?
                    * crate::qseries::powi(base.p, *db.numer());
                coefficient *= qpoch_inf(x, base.q)?;
            }
        }
        terms.push(coefficient * e1);
    }
    let max = terms.iter().map(|v| v.norm()).fold(0.0f64, f64::max);
    let sum: C64 = terms.iter().sum();
    Ok(sum / max)
}

/// The base equilateral triangle `(e1 - e0, e2 - e0, e3 - e0)`.
pub fn base_triangle() -> TriangleShift {
    let e = |i: usize| RatVec::basis(8, i);
    TriangleShift::new(
        &e(1) - &e(0),
        &e(2) - &e(0),
        &e(3) - &e(0),
    )
    .expect("the base triangle is equilateral")
}
