//! Complex parameter points with the balancing condition.
//!
//! A `ParamPoint` is a vector `u` of `2m+6` nonzero complex numbers with
//! `prod u_r = q^{m+1}`, taken modulo the global sign flip `u ~ -u`. The
//! canonical representative is the one whose first coordinate has argument in
//! `[0, pi)` (ties broken toward nonnegative real part).

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::rat::{Rat, RatVec};

pub type C64 = Complex64;

/// Complex parameter vector of length `2m+6` satisfying `prod u_r = q^{m+1}`.
#[derive(Clone, Debug)]
pub struct ParamPoint {
    pub m: usize,
    pub u: Vec<C64>,
    pub q: C64,
}

/// Tolerance used when *checking* balancing. Draws solve the last coordinate
/// exactly at the arithmetic level, so deviations here are pure round-off.
pub const BALANCE_TOL: f64 = 1e-9;

impl ParamPoint {
    /// Builds a canonical-sign point, verifying the balancing condition.
    pub fn new(m: usize, u: Vec<C64>, q: C64) -> Result<Self> {
        let expected = 2 * m + 6;
        if u.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                got: u.len(),
            });
        }
        if q.norm() >= 1.0 {
            return Err(Error::InvalidBase(format!("|q| = {} >= 1", q.norm())));
        }
        let point = ParamPoint { m, u, q }.canonical_sign();
        point.check_balancing()?;
        Ok(point)
    }

    /// Builds a point from the first `2m+5` coordinates, solving the last one
    /// so that `prod u_r = q^{m+1}` holds exactly at the arithmetic level.
    pub fn solve_last(m: usize, head: &[C64], q: C64) -> Result<Self> {
        let expected = 2 * m + 6;
        if head.len() != expected - 1 {
            return Err(Error::DimensionMismatch {
                expected: expected - 1,
                got: head.len(),
            });
        }
        let mut prod = C64::new(1.0, 0.0);
        for v in head {
            prod *= v;
        }
        if prod.norm() == 0.0 {
            return Err(Error::ConstraintViolated("zero parameter".into()));
        }
        let mut u = head.to_vec();
        u.push(q.powu(m as u32 + 1) / prod);
        Ok(ParamPoint { m, u, q }.canonical_sign())
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    pub fn balancing_target(&self) -> C64 {
        self.q.powu(self.m as u32 + 1)
    }

    pub fn check_balancing(&self) -> Result<()> {
        let mut prod = C64::new(1.0, 0.0);
        for v in &self.u {
            prod *= v;
        }
        let target = self.balancing_target();
        let deviation = (prod - target).norm() / target.norm().max(f64::MIN_POSITIVE);
        if deviation > BALANCE_TOL {
            return Err(Error::BalancingViolated { deviation });
        }
        Ok(())
    }

    /// Canonical representative of the `u ~ -u` class: first coordinate
    /// argument in `[0, pi)`, ties toward nonnegative real part.
    pub fn canonical_sign(mut self) -> Self {
        if !keeps_canonical_sign(self.u[0]) {
            for v in &mut self.u {
                *v = -*v;
            }
        }
        self
    }

    /// The monomial `u^x` for an exponent vector in the E8 lattice.
    ///
    /// Integer exponent vectors multiply out directly. Half-integral vectors
    /// are reduced through `u^rho = q` (the balancing condition fixes the
    /// square root up to sign; the representative with `u^rho = +q` is used
    /// throughout), so every power computed here is branch-free.
    pub fn monomial(&self, x: &RatVec) -> Result<C64> {
        monomial_with_rho(&self.u, x, self.q)
    }

    /// Coordinate-wise product `u .* s^x` with principal powers of `s`.
    pub fn scale_by_powers(&self, s: C64, x: &RatVec) -> Vec<C64> {
        self.u
            .iter()
            .zip(x.coords())
            .map(|(u, e)| u * cpow_rat(s, *e))
            .collect()
    }
}

fn keeps_canonical_sign(z: C64) -> bool {
    let arg = z.arg();
    if arg == 0.0 || (arg > 0.0 && arg < std::f64::consts::PI) {
        true
    } else if arg == std::f64::consts::PI || arg < 0.0 {
        false
    } else {
        z.re >= 0.0
    }
}

/// `u^x` with half-integral vectors reduced via `u^rho = rho_value`.
pub fn monomial_with_rho(u: &[C64], x: &RatVec, rho_value: C64) -> Result<C64> {
    if x.is_integral() {
        return Ok(integer_monomial(u, x));
    }
    if x.is_half_integral() {
        let shifted = x - &RatVec::rho(x.len());
        return Ok(rho_value * integer_monomial(u, &shifted));
    }
    Err(Error::Unsupported(format!(
        "monomial exponent {x} is neither integral nor half-integral"
    )))
}

fn integer_monomial(u: &[C64], x: &RatVec) -> C64 {
    let mut out = C64::new(1.0, 0.0);
    for (v, e) in u.iter().zip(x.coords()) {
        let k = *e.numer();
        debug_assert!(e.is_integer());
        if k >= 0 {
            out *= v.powu(k as u32);
        } else {
            out /= v.powu((-k) as u32);
        }
    }
    out
}

/// Principal power `z^e` for a rational exponent.
pub fn cpow_rat(z: C64, e: Rat) -> C64 {
    if e.is_integer() {
        let k = *e.numer();
        if k >= 0 {
            z.powu(k as u32)
        } else {
            C64::new(1.0, 0.0) / z.powu((-k) as u32)
        }
    } else {
        z.powf(*e.numer() as f64 / *e.denom() as f64)
    }
}
