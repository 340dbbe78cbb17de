//! Face-to-formula dispatch for the basic limits `B^m_alpha` and numerical
//! limit verification.
//!
//! Every face of the polytope carries one explicit limit: a Nassrallah-
//! Rahman-type integral on the `P_I` side, a symmetry-broken integral on the
//! `P_III` side, a (possibly paired) series on the `P_II` side, or a plain
//! product / the constant one on the special faces. The dispatch reads the
//! exact tight-inequality pattern at the face centroid, so two points of one
//! open face always evaluate through the same plan.

use num_complex::Complex64;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::params::{cpow_rat, ParamPoint};
use crate::polytope::{classify_inside, decompose, FaceDescriptor, PolytopeId, SubPolytope};
use crate::qseries::{phi_series, qpoch_inf, theta, vwp_series, SeriesParams, VWPParams};
use crate::quad::{circle_integral, QuadOptions};
use crate::rat::{rat, Rat, RatVec};

pub type C64 = Complex64;

const ONE: C64 = C64::new(1.0, 0.0);

/// Margin kept between parameter moduli and the unit contour.
pub const DEFAULT_MARGIN: f64 = 0.05;

/// A monomial `q^qpow * prod_r u_r^{upow[r]}` in the parameters.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Monomial {
    pub qpow: i64,
    pub upow: Vec<i64>,
}

impl Monomial {
    pub fn unit(n: usize) -> Self {
        Monomial {
            qpow: 0,
            upow: vec![0; n],
        }
    }

    pub fn coord(n: usize, r: usize) -> Self {
        let mut m = Self::unit(n);
        m.upow[r] = 1;
        m
    }

    pub fn pair(n: usize, r: usize, s: usize) -> Self {
        let mut m = Self::unit(n);
        m.upow[r] += 1;
        m.upow[s] += 1;
        m
    }

    /// `q u_a / u_b`
    pub fn q_ratio(n: usize, a: usize, b: usize) -> Self {
        let mut m = Self::unit(n);
        m.qpow = 1;
        m.upow[a] += 1;
        m.upow[b] -= 1;
        m
    }

    pub fn eval(&self, u: &ParamPoint) -> C64 {
        let mut out = crate::qseries::powi(u.q, self.qpow);
        for (r, &e) in self.upow.iter().enumerate() {
            out *= crate::qseries::powi(u.u[r], e);
        }
        out
    }

    /// Reduces modulo the balancing relation `prod u_r = q^{m+1}`: returns
    /// `Some(c)` when the monomial is identically `q^c`.
    pub fn as_q_power(&self, m: usize) -> Option<i64> {
        let lambda = self.upow[0];
        if self.upow.iter().all(|&e| e == lambda) {
            Some(self.qpow + lambda * (m as i64 + 1))
        } else {
            None
        }
    }
}

/// Runtime admissibility conditions attached to a formula.
#[derive(Clone, Debug)]
pub enum Constraint {
    /// `|monomial| < bound` (series convergence, contour separation).
    ModulusLt(Monomial, f64),
}

impl Constraint {
    pub fn check(&self, u: &ParamPoint, margin: f64) -> Result<()> {
        match self {
            Constraint::ModulusLt(mono, bound) => {
                let v = mono.eval(u).norm();
                if v >= bound * (1.0 - margin) {
                    return Err(Error::ConstraintViolated(format!(
                        "|{mono:?}| = {v:.4} exceeds {bound} (margin {margin})"
                    )));
                }
                Ok(())
            }
        }
    }
}

/// Which explicit limit applies to a face.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LimitVariant {
    One,
    ProductOnly,
    TrivialIntegral,
    SymBroken1,
    SymBroken2,
    SymBroken3,
    SumIntegralW,
    PairedVWP,
    SingleVWP,
    PairedPhi,
    SinglePhi,
}

/// Concrete parameter roles for each variant, in original coordinates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LimitPlan {
    /// The interior: the limit is identically one.
    One,
    /// Quadruple-zero facet: `(u_i u_j u_k u_l; q)`.
    ProductQuad { quad: Vec<usize> },
    /// Series bullet with empty series: `prod (q u_lo / u_r; q)`.
    ProductQ { lo: usize, oneplus: Vec<usize> },
    /// `P_I` integral with denominator (`alpha_r = 0`) and numerator
    /// (`alpha_r = 1`) parameter sets.
    TrivialIntegral { zeros: Vec<usize>, ones: Vec<usize> },
    /// Symmetry-broken integrals; `triple` holds the sorted roles 0,1,2.
    SymBroken {
        bullet: u8,
        triple: [usize; 3],
        minus: Vec<usize>,
        oneplus: Vec<usize>,
        half: bool,
    },
    /// The `w`-dependent integral representation on the
    /// `alpha_0 = alpha_1 < 0` facet.
    SumIntegralW {
        lo: [usize; 2],
        minus: Vec<usize>,
        oneplus: Vec<usize>,
        half: bool,
    },
    /// Paired very-well-poised sum at `alpha_0 = alpha_1 = -1/2`.
    PairedVWP { lo: [usize; 2], others: Vec<usize> },
    /// Single very-well-poised sum at `alpha_0 = -1/2`.
    SingleVWP {
        lo: usize,
        half_set: Vec<usize>,
        small: Vec<usize>,
        pair: Option<[usize; 2]>,
        n: i64,
    },
    /// Paired series at `-1/2 < alpha_0 = alpha_1 < 0`, argument `q`.
    PairedPhi {
        lo: [usize; 2],
        minus: Vec<usize>,
        oneplus: Vec<usize>,
        n: i64,
    },
    /// Single series on the `2 alpha_0 = sum of negative gaps` stratum.
    SinglePhi {
        lo: usize,
        minus: Vec<usize>,
        oneplus: Vec<usize>,
        small: Vec<usize>,
        pair: Option<[usize; 2]>,
        n: i64,
    },
}

impl LimitPlan {
    pub fn variant(&self) -> LimitVariant {
        match self {
            LimitPlan::One => LimitVariant::One,
            LimitPlan::ProductQuad { .. } | LimitPlan::ProductQ { .. } => LimitVariant::ProductOnly,
            LimitPlan::TrivialIntegral { .. } => LimitVariant::TrivialIntegral,
            LimitPlan::SymBroken { bullet, .. } => match bullet {
                1 => LimitVariant::SymBroken1,
                2 => LimitVariant::SymBroken2,
                _ => LimitVariant::SymBroken3,
            },
            LimitPlan::SumIntegralW { .. } => LimitVariant::SumIntegralW,
            LimitPlan::PairedVWP { .. } => LimitVariant::PairedVWP,
            LimitPlan::SingleVWP { .. } => LimitVariant::SingleVWP,
            LimitPlan::PairedPhi { .. } => LimitVariant::PairedPhi,
            LimitPlan::SinglePhi { .. } => LimitVariant::SinglePhi,
        }
    }
}

/// A limit formula: the variant, its exact roles, and runtime constraints.
#[derive(Clone, Debug)]
pub struct LimitFormula {
    pub variant: LimitVariant,
    pub plan: LimitPlan,
    pub constraints: Vec<Constraint>,
}

fn constraints_of_plan(plan: &LimitPlan, n: usize, m: usize) -> Vec<Constraint> {
    let mut out = Vec::new();
    let coord_lt_one = |out: &mut Vec<Constraint>, r: usize| {
        out.push(Constraint::ModulusLt(Monomial::coord(n, r), 1.0));
    };
    match plan {
        LimitPlan::One | LimitPlan::ProductQuad { .. } | LimitPlan::ProductQ { .. } => {}
        LimitPlan::TrivialIntegral { zeros, .. } => {
            for &r in zeros {
                coord_lt_one(&mut out, r);
            }
        }
        LimitPlan::SymBroken {
            bullet,
            triple,
            minus,
            ..
        } => {
            // downward pole sequences must stay inside the unit circle
            if *bullet == 1 {
                coord_lt_one(&mut out, triple[0]);
                coord_lt_one(&mut out, triple[1]);
            }
            if *bullet == 2 {
                coord_lt_one(&mut out, triple[0]);
            }
            for &r in minus {
                coord_lt_one(&mut out, r);
            }
        }
        LimitPlan::SumIntegralW { lo, minus, .. } => {
            coord_lt_one(&mut out, lo[0]);
            coord_lt_one(&mut out, lo[1]);
            for &r in minus {
                coord_lt_one(&mut out, r);
            }
        }
        LimitPlan::PairedVWP { .. } | LimitPlan::PairedPhi { .. } => {
            // argument is q itself; always inside the disk
        }
        LimitPlan::SingleVWP {
            lo, small, pair, n: nn, ..
        } => {
            if *nn == 0 {
                out.push(Constraint::ModulusLt(
                    argument_monomial(n, *lo, *nn, small),
                    1.0,
                ));
            }
            let _ = pair;
        }
        LimitPlan::SinglePhi {
            lo,
            minus,
            oneplus,
            small,
            ..
        } => {
            let e = small.len() as i64 + 1 - 2; // exponent of the series
            let _ = (minus, oneplus);
            if e == 0 {
                let npow = small.len() as i64 - 1; // u_lo^{#small>0 - 2} with lo included below
                out.push(Constraint::ModulusLt(
                    argument_monomial(n, *lo, npow - 1, small),
                    1.0,
                ));
            }
        }
    }
    let _ = m;
    out
}

/// `u_lo^{npow} prod_{r in small} u_r` as a monomial.
fn argument_monomial(n: usize, lo: usize, npow: i64, small: &[usize]) -> Monomial {
    let mut m = Monomial::unit(n);
    m.upow[lo] = npow;
    for &r in small {
        m.upow[r] += 1;
    }
    m
}

/// Selects the explicit limit for a face of `P^(m)`, `m` in {0, 1}.
///
/// Dispatch order: the interior and the quadruple-zero facet come first;
/// otherwise the centroid's decomposition picks the series forms whenever the
/// sorted minimum is strictly negative and the `P_II` system holds, then the
/// symmetry-broken integrals on `P_III`, and the plain integral on `P_I`.
pub fn formula_for_face(face: &FaceDescriptor) -> Result<LimitFormula> {
    if face.polytope != PolytopeId::P || face.m > 1 {
        return Err(Error::Unsupported(
            "limit formulas are defined on P with m in {0,1}".into(),
        ));
    }
    let plan = plan_for_face(face)?;
    let n = 2 * face.m + 6;
    Ok(LimitFormula {
        variant: plan.variant(),
        constraints: constraints_of_plan(&plan, n, face.m),
        plan,
    })
}

fn plan_for_face(face: &FaceDescriptor) -> Result<LimitPlan> {
    let c = face.centroid();
    let m = face.m;
    let n = c.len();
    if face.is_interior() {
        return Ok(LimitPlan::One);
    }
    // open quadruple-zero facet: exactly one tight inequality, of the form
    // sum of four coordinates >= 0
    if face.tight.len() == 1 {
        let ineqs = crate::polytope::inequalities_cached(PolytopeId::P, m)?;
        let ineq = &ineqs[face.tight[0]];
        if ineq.c.is_zero() {
            let negs: Vec<usize> = ineq
                .mu
                .coords()
                .iter()
                .enumerate()
                .filter(|(_, v)| **v == rat(-1, 1))
                .map(|(i, _)| i)
                .collect();
            if negs.len() == 4 && ineq.mu.coords().iter().all(|v| v.is_zero() || *v == rat(-1, 1))
            {
                return Ok(LimitPlan::ProductQuad { quad: negs });
            }
        }
    }
    let memberships = decompose(&c, m)?;
    let sorted_sigma = memberships
        .iter()
        .find(|mem| mem.part != SubPolytope::PI)
        .map(|mem| mem.sigma.clone());
    // inverse permutation: role -> original index
    let inverse = |sigma: &[usize]| {
        let mut inv = vec![0usize; n];
        for (orig, &role) in sigma.iter().enumerate() {
            inv[role] = orig;
        }
        inv
    };

    // P_II series forms take precedence whenever the minimum is negative
    if let Some(mem) = memberships
        .iter()
        .find(|mem| mem.part == SubPolytope::PII)
    {
        let inv = inverse(&mem.sigma);
        let sorted = c.permute(&mem.sigma);
        let a0 = sorted.get(0);
        if a0.is_negative() {
            return plan_for_pii(&c, &sorted, &inv, m);
        }
    }
    if let Some(mem) = memberships
        .iter()
        .find(|mem| mem.part == SubPolytope::PIII)
    {
        let inv = inverse(&mem.sigma);
        let sorted = c.permute(&mem.sigma);
        return plan_for_piii(&c, &sorted, &inv);
    }
    if memberships.iter().any(|mem| mem.part == SubPolytope::PI) {
        let zeros: Vec<usize> = index_where(&c, |v| v.is_zero());
        let ones: Vec<usize> = index_where(&c, |v| *v == rat(1, 1));
        return Ok(LimitPlan::TrivialIntegral { zeros, ones });
    }
    let _ = sorted_sigma;
    Err(Error::Unsupported(format!(
        "no limit formula matched the face with centroid {c}"
    )))
}

fn index_where(c: &RatVec, pred: impl Fn(&Rat) -> bool) -> Vec<usize> {
    c.coords()
        .iter()
        .enumerate()
        .filter(|(_, v)| pred(v))
        .map(|(i, _)| i)
        .collect()
}

fn plan_for_pii(c: &RatVec, sorted: &RatVec, inv: &[usize], m: usize) -> Result<LimitPlan> {
    let n = c.len();
    let a0 = sorted.get(0);
    let half = rat(-1, 2);
    let lo = inv[0];
    let minus_set = |exclude: usize| -> Vec<usize> {
        index_where(c, |v| *v == -a0)
            .into_iter()
            .filter(|&r| r != exclude)
            .collect()
    };
    let oneplus_set: Vec<usize> = index_where(c, |v| *v == rat(1, 1) + a0);
    // tight pair in sorted positions 1, 2
    let pair_tight = sorted.get(1) + sorted.get(2) == Rat::zero();
    let pair = if pair_tight {
        Some([inv[1], inv[2]])
    } else {
        None
    };

    if a0 == half && sorted.get(1) == half {
        // all remaining coordinates are 1/2
        return Ok(LimitPlan::PairedVWP {
            lo: [inv[0], inv[1]],
            others: (0..n).filter(|&r| r != inv[0] && r != inv[1]).collect(),
        });
    }
    if a0 == half {
        let half_set = index_where(c, |v| *v == rat(1, 2));
        let small: Vec<usize> = index_where(c, |v| *v < rat(1, 2))
            .into_iter()
            .filter(|&r| r != lo)
            .collect();
        let n_exp = (small.len() as i64 + 1) - 3;
        return Ok(LimitPlan::SingleVWP {
            lo,
            half_set,
            small,
            pair,
            n: n_exp,
        });
    }
    if sorted.get(1) == a0 {
        let minus = minus_set(usize::MAX);
        let n_exp = minus.len() as i64 - oneplus_set.len() as i64 - 2;
        return Ok(LimitPlan::PairedPhi {
            lo: [inv[0], inv[1]],
            minus,
            oneplus: oneplus_set,
            n: n_exp,
        });
    }
    // gap sum over negative deviations
    let neg_sum: Rat = sorted
        .coords()
        .iter()
        .skip(1)
        .filter(|v| **v + a0 < Rat::zero())
        .map(|v| v + a0)
        .sum();
    let two_a0 = a0 * rat(2, 1);
    if two_a0 == neg_sum {
        let minus = minus_set(lo);
        let small: Vec<usize> = index_where(c, |v| *v < -a0)
            .into_iter()
            .filter(|&r| r != lo)
            .collect();
        let n_exp =
            (small.len() as i64 + 1) - 4 - oneplus_set.len() as i64 + minus.len() as i64;
        return Ok(LimitPlan::SinglePhi {
            lo,
            minus,
            oneplus: oneplus_set,
            small,
            pair,
            n: n_exp,
        });
    }
    if two_a0 < neg_sum {
        return Ok(LimitPlan::ProductQ {
            lo,
            oneplus: oneplus_set,
        });
    }
    Err(Error::Unsupported(format!(
        "P_II point {c} matches no series stratum"
    )))
}

fn plan_for_piii(c: &RatVec, sorted: &RatVec, inv: &[usize]) -> Result<LimitPlan> {
    let beta = sorted.get(0) + sorted.get(1) + sorted.get(2);
    let triple = [inv[0], inv[1], inv[2]];
    let minus: Vec<usize> = index_where(c, |v| *v == -beta)
        .into_iter()
        .filter(|r| !triple.contains(r))
        .collect();
    let oneplus: Vec<usize> = index_where(c, |v| *v == rat(1, 1) + beta)
        .into_iter()
        .filter(|r| !triple.contains(r))
        .collect();
    let half = beta == rat(-1, 2);
    let bullet = if sorted.get(0) == sorted.get(1) && sorted.get(1) == -sorted.get(2) {
        1
    } else if sorted.get(1) == -sorted.get(2) {
        2
    } else {
        3
    };
    Ok(LimitPlan::SymBroken {
        bullet,
        triple,
        minus,
        oneplus,
        half,
    })
}

/// All other representations valid on the same face (used by the
/// branch-agreement checks): the symmetry-broken integral when the face also
/// lies in a permuted `P_III`, the plain integral when it lies in `P_I`, and
/// the `w`-integral on its stratum.
pub fn alternate_formulas(face: &FaceDescriptor) -> Result<Vec<LimitFormula>> {
    let c = face.centroid();
    let m = face.m;
    let n = c.len();
    let mut out = Vec::new();
    if face.is_interior() {
        return Ok(out);
    }
    let memberships = decompose(&c, m)?;
    let primary = formula_for_face(face)?;
    for mem in &memberships {
        let mut inv = vec![0usize; n];
        for (orig, &role) in mem.sigma.iter().enumerate() {
            inv[role] = orig;
        }
        let sorted = c.permute(&mem.sigma);
        let plan = match mem.part {
            SubPolytope::PI => Some(LimitPlan::TrivialIntegral {
                zeros: index_where(&c, |v| v.is_zero()),
                ones: index_where(&c, |v| *v == rat(1, 1)),
            }),
            SubPolytope::PIII => Some(plan_for_piii(&c, &sorted, &inv)?),
            SubPolytope::PII => None,
        };
        if let Some(plan) = plan {
            if plan != primary.plan {
                out.push(LimitFormula {
                    variant: plan.variant(),
                    constraints: constraints_of_plan(&plan, n, m),
                    plan,
                });
            }
        }
        // the w-integral stratum: sorted alpha_0 = alpha_1 < 0 <= -alpha_0
        // <= alpha_2 and alpha_max <= 1 + alpha_0
        if mem.part == SubPolytope::PII {
            let a0 = sorted.get(0);
            if a0.is_negative()
                && sorted.get(1) == a0
                && sorted.get(2) >= -a0
                && sorted.get(n - 1) <= rat(1, 1) + a0
                && a0 >= rat(-1, 2)
            {
                let lo = [inv[0], inv[1]];
                let minus: Vec<usize> = index_where(&c, |v| *v == -a0)
                    .into_iter()
                    .filter(|r| !lo.contains(r))
                    .collect();
                let oneplus = index_where(&c, |v| *v == rat(1, 1) + a0);
                let plan = LimitPlan::SumIntegralW {
                    lo,
                    minus,
                    oneplus,
                    half: a0 == rat(-1, 2),
                };
                out.push(LimitFormula {
                    variant: plan.variant(),
                    constraints: constraints_of_plan(&plan, n, m),
                    plan,
                });
            }
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// evaluation engines
// ---------------------------------------------------------------------------

fn qp(x: C64, q: C64) -> Result<C64> {
    qpoch_inf(x, q)
}

/// `(x z; q)(x / z; q)`
fn qp_pm(x: C64, z: C64, q: C64) -> Result<C64> {
    Ok(qpoch_inf(x * z, q)? * qpoch_inf(x / z, q)?)
}

/// Evaluates a limit plan at a parameter point.
pub fn eval_plan(plan: &LimitPlan, u: &ParamPoint, quad: &QuadOptions) -> Result<C64> {
    let q = u.q;
    match plan {
        LimitPlan::One => Ok(ONE),
        LimitPlan::ProductQuad { quad: idx } => {
            let mut x = ONE;
            for &r in idx {
                x *= u.u[r];
            }
            qp(x, q)
        }
        LimitPlan::ProductQ { lo, oneplus } => {
            let mut out = ONE;
            for &r in oneplus {
                out *= qp(q * u.u[*lo] / u.u[r], q)?;
            }
            Ok(out)
        }
        LimitPlan::TrivialIntegral { zeros, ones } => {
            eval_trivial_integral(zeros, ones, u, quad)
        }
        LimitPlan::SymBroken {
            bullet,
            triple,
            minus,
            oneplus,
            half,
        } => eval_symbroken(*bullet, triple, minus, oneplus, *half, u, quad),
        LimitPlan::SumIntegralW {
            lo,
            minus,
            oneplus,
            half,
        } => {
            // default witness w: the first minus parameter if present, else
            // a generic point off the theta zeros
            let w = minus
                .first()
                .map(|&r| u.u[r])
                .unwrap_or(C64::new(0.637, 0.331));
            eval_sum_integral_w(lo, minus, oneplus, *half, u, w, quad)
        }
        LimitPlan::PairedVWP { lo, others } => {
            let f = |a: usize, b: usize| -> Result<C64> {
                let (ua, ub) = (u.u[a], u.u[b]);
                let mut pref = ONE;
                let mut bs = vec![ua * ub];
                for &r in others {
                    pref *= qp(u.u[r] * ub, q)? * qp(q * ua / u.u[r], q)?;
                    bs.push(ua * u.u[r]);
                }
                pref /= qp(q * ua * ua, q)? * qp(ub / ua, q)?;
                let w = vwp_series(&VWPParams {
                    a: ua * ua,
                    b: bs,
                    n: 0,
                    q,
                    z: q,
                })?;
                Ok(pref * w)
            };
            Ok(f(lo[0], lo[1])? + f(lo[1], lo[0])?)
        }
        LimitPlan::SingleVWP {
            lo,
            half_set,
            small,
            pair,
            n,
        } => {
            let ua = u.u[*lo];
            let mut pref = ONE;
            if let Some([r, s]) = pair {
                pref *= qp(u.u[*r] * u.u[*s], q)?;
            }
            let mut bs = Vec::new();
            for &r in half_set {
                pref *= qp(q * ua / u.u[r], q)?;
                bs.push(ua * u.u[r]);
            }
            pref /= qp(q * ua * ua, q)?;
            let mut z = crate::qseries::powi(ua, *n);
            for &r in small {
                z *= u.u[r];
            }
            let w = vwp_series(&VWPParams {
                a: ua * ua,
                b: bs,
                n: *n,
                q,
                z,
            })?;
            Ok(pref * w)
        }
        LimitPlan::PairedPhi {
            lo,
            minus,
            oneplus,
            n,
        } => {
            let g = |a: usize, b: usize| -> Result<C64> {
                let (ua, ub) = (u.u[a], u.u[b]);
                let mut pref = ONE;
                let mut upper = Vec::new();
                let mut lower = vec![q * ua / ub];
                for &r in minus {
                    pref *= qp(ub * u.u[r], q)?;
                    upper.push(ua * u.u[r]);
                }
                for &r in oneplus {
                    pref *= qp(q * ua / u.u[r], q)?;
                    lower.push(q * ua / u.u[r]);
                }
                pref /= qp(ub / ua, q)?;
                let s = phi_series(&SeriesParams {
                    upper,
                    lower,
                    n: *n,
                    q,
                    z: q,
                })?;
                Ok(pref * s)
            };
            Ok(g(lo[0], lo[1])? + g(lo[1], lo[0])?)
        }
        LimitPlan::SinglePhi {
            lo,
            minus,
            oneplus,
            small,
            pair,
            n,
        } => {
            let ua = u.u[*lo];
            let mut pref = ONE;
            if let Some([r, s]) = pair {
                pref *= qp(u.u[*r] * u.u[*s], q)?;
            }
            let mut upper = Vec::new();
            let mut lower = Vec::new();
            for &r in minus {
                upper.push(ua * u.u[r]);
            }
            for &r in oneplus {
                pref *= qp(q * ua / u.u[r], q)?;
                lower.push(q * ua / u.u[r]);
            }
            let mut z = crate::qseries::powi(ua, small.len() as i64 - 2);
            for &r in small {
                z *= u.u[r];
            }
            let s = phi_series(&SeriesParams {
                upper,
                lower,
                n: *n,
                q,
                z,
            })?;
            Ok(pref * s)
        }
    }
}

fn eval_trivial_integral(
    zeros: &[usize],
    ones: &[usize],
    u: &ParamPoint,
    quad: &QuadOptions,
) -> Result<C64> {
    let q = u.q;
    for &r in zeros {
        if u.u[r].norm() >= 1.0 {
            return Err(Error::ContourInvalid(format!(
                "|u_{r}| = {} >= 1 in the plain integral",
                u.u[r].norm()
            )));
        }
    }
    let mut pref = qp(q, q)? / 2.0;
    for (i, &r) in zeros.iter().enumerate() {
        for &s in &zeros[i + 1..] {
            pref *= qp(u.u[r] * u.u[s], q)?;
        }
    }
    let integrand = |z: C64| -> Result<C64> {
        let mut val = qpoch_inf(z * z, q)? * qpoch_inf(ONE / (z * z), q)?;
        for &r in ones {
            val *= qp_pm(q / u.u[r], z, q)?;
        }
        for &r in zeros {
            val /= qp_pm(u.u[r], z, q)?;
        }
        Ok(val)
    };
    Ok(pref * circle_integral(integrand, 1.0, quad)?.value)
}

fn eval_symbroken(
    bullet: u8,
    triple: &[usize; 3],
    minus: &[usize],
    oneplus: &[usize],
    half: bool,
    u: &ParamPoint,
    quad: &QuadOptions,
) -> Result<C64> {
    let q = u.q;
    let [t0, t1, t2] = *triple;
    let (u0, u1, u2) = (u.u[t0], u.u[t1], u.u[t2]);
    let theta_arg = u0 * u1 * u2;
    match bullet {
        1 => {
            let mut pref = qp(q, q)?;
            for &r in minus {
                pref *= qp(u.u[r] * u0, q)? * qp(u.u[r] * u1, q)?;
            }
            pref /= qp(q / (u0 * u2), q)? * qp(q / (u1 * u2), q)?;
            if half {
                pref *= qp(u0 * u1, q)?;
            }
            let integrand = |z: C64| -> Result<C64> {
                let mut val = theta(theta_arg / z, q)?;
                val *= qpoch_inf(q / (u2 * z), q)?
                    / (qpoch_inf(u0 / z, q)? * qpoch_inf(u1 / z, q)?);
                for &r in oneplus {
                    val *= qpoch_inf(q * z / u.u[r], q)?;
                }
                for &r in minus {
                    val /= qpoch_inf(u.u[r] * z, q)?;
                }
                if half {
                    val *= (ONE - z * z) * qpoch_inf(q * z / u2, q)?
                        / (qpoch_inf(u0 * z, q)? * qpoch_inf(u1 * z, q)?);
                }
                Ok(val)
            };
            Ok(pref * circle_integral(integrand, 1.0, quad)?.value)
        }
        2 => {
            let mut pref = qp(q, q)? / qp(q / (u1 * u2), q)?;
            for &r in minus {
                pref *= qp(u.u[r] * u0, q)?;
            }
            let integrand = |z: C64| -> Result<C64> {
                let mut val = theta(theta_arg / z, q)? / qpoch_inf(u0 / z, q)?;
                for &r in oneplus {
                    val *= qpoch_inf(q * z / u.u[r], q)?;
                }
                for &r in minus {
                    val /= qpoch_inf(u.u[r] * z, q)?;
                }
                if half {
                    val *= (ONE - z * z) / qpoch_inf(u0 * z, q)?;
                }
                Ok(val)
            };
            Ok(pref * circle_integral(integrand, 1.0, quad)?.value)
        }
        3 => {
            let pref = qp(q, q)?;
            // the contour excludes the upward poles but circles the
            // essential singularity: half the smallest pole modulus
            let radius = minus
                .iter()
                .map(|&r| 1.0 / u.u[r].norm())
                .fold(f64::INFINITY, f64::min);
            let radius = if radius.is_finite() {
                0.5 * radius.min(2.0)
            } else {
                1.0
            };
            let integrand = |z: C64| -> Result<C64> {
                let mut val = theta(theta_arg / z, q)?;
                for &r in oneplus {
                    val *= qpoch_inf(q * z / u.u[r], q)?;
                }
                for &r in minus {
                    val /= qpoch_inf(u.u[r] * z, q)?;
                }
                if half {
                    val *= ONE - z * z;
                }
                Ok(val)
            };
            Ok(pref * circle_integral(integrand, radius, quad)?.value)
        }
        _ => Err(Error::Unsupported("unknown bullet".into())),
    }
}

fn eval_sum_integral_w(
    lo: &[usize; 2],
    minus: &[usize],
    oneplus: &[usize],
    half: bool,
    u: &ParamPoint,
    w: C64,
    quad: &QuadOptions,
) -> Result<C64> {
    let q = u.q;
    let (u0, u1) = (u.u[lo[0]], u.u[lo[1]]);
    if w.norm() == 0.0 {
        return Err(Error::ConstraintViolated("w = 0".into()));
    }
    let th0 = theta(u0 * w, q)?;
    let th1 = theta(u1 * w, q)?;
    if th0.norm() < 1e-12 || th1.norm() < 1e-12 {
        return Err(Error::PoleProximity("w hits a theta zero".into()));
    }
    let mut pref = qp(q, q)? / (th0 * th1);
    for &r in minus {
        pref *= qp(u0 * u.u[r], q)? * qp(u1 * u.u[r], q)?;
    }
    let integrand = |z: C64| -> Result<C64> {
        let mut val = theta(u0 * u1 * w / z, q)? * theta(w * z, q)?;
        val /= qpoch_inf(u0 / z, q)? * qpoch_inf(u1 / z, q)?;
        for &r in oneplus {
            val *= qpoch_inf(q * z / u.u[r], q)?;
        }
        for &r in minus {
            val /= qpoch_inf(u.u[r] * z, q)?;
        }
        if half {
            val *= (ONE - z * z) / (qpoch_inf(u0 * z, q)? * qpoch_inf(u1 * z, q)?);
        }
        Ok(val)
    };
    Ok(pref * circle_integral(integrand, 1.0, quad)?.value)
}

/// Evaluates `B^m_alpha(u)` by classifying `alpha`, selecting the formula,
/// and running the appropriate engine.
pub fn eval_b(alpha: &RatVec, u: &ParamPoint, quad: &QuadOptions) -> Result<C64> {
    let face = classify_inside(alpha, PolytopeId::P, u.m)?;
    let formula = formula_for_face(&face)?;
    for c in &formula.constraints {
        c.check(u, 0.0)?;
    }
    eval_plan(&formula.plan, u, quad)
}

/// The `w`-dependent contour-integral representation on the
/// `alpha_0 = alpha_1 < 0` stratum; the value is independent of `w`.
pub fn eval_b_sum_integral(
    alpha: &RatVec,
    u: &ParamPoint,
    w: C64,
    quad: &QuadOptions,
) -> Result<C64> {
    let face = classify_inside(alpha, PolytopeId::P, u.m)?;
    let alt = alternate_formulas(&face)?;
    for f in alt {
        if let LimitPlan::SumIntegralW {
            lo,
            minus,
            oneplus,
            half,
        } = f.plan
        {
            for c in &f.constraints {
                c.check(u, 0.0)?;
            }
            return eval_sum_integral_w(&lo, &minus, &oneplus, half, u, w, quad);
        }
    }
    Err(Error::Unsupported(
        "alpha is not in the w-integral stratum".into(),
    ))
}

/// Closed form of every `m = 0` limit on the extended polytope:
/// `prod over tight pairs (alpha_r + alpha_s = 1) of (q/(u_r u_s); q)`.
pub fn evaluation_limit_m0(alpha: &RatVec, u: &ParamPoint) -> Result<C64> {
    classify_inside(alpha, PolytopeId::Pext, 0)?;
    if u.len() != 6 {
        return Err(Error::DimensionMismatch {
            expected: 6,
            got: u.len(),
        });
    }
    let mut out = ONE;
    for r in 0..6 {
        for s in r + 1..6 {
            if alpha.get(r) + alpha.get(s) == rat(1, 1) {
                out *= qp(u.q / (u.u[r] * u.u[s]), u.q)?;
            }
        }
    }
    Ok(out)
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, serde::Serialize)]
pub enum Verdict {
    Converging,
    Inconclusive,
    Failed,
}

/// Errors of `E^m(u p^alpha)` against the limit target over a decreasing
/// p-schedule.
#[derive(Clone, Debug)]
pub struct ConvergenceReport {
    pub p_values: Vec<f64>,
    pub errors: Vec<f64>,
    pub target: C64,
    pub verdict: Verdict,
}

/// Runs the limit experiment `E^m(u . p^alpha) -> B^m_alpha(u)` over a
/// strictly decreasing positive schedule of `p` values.
pub fn verify_limit(
    alpha: &RatVec,
    u: &ParamPoint,
    p_schedule: &[f64],
    tol_limit: f64,
    quad: &QuadOptions,
) -> Result<ConvergenceReport> {
    if p_schedule.is_empty()
        || !p_schedule.windows(2).all(|w| w[0] > w[1])
        || p_schedule.iter().any(|&p| p <= 0.0)
    {
        return Err(Error::ConstraintViolated(
            "p schedule must be strictly decreasing and positive".into(),
        ));
    }
    let target = eval_b(alpha, u, quad)?;
    let mut errors = Vec::new();
    for &p in p_schedule {
        let base = crate::elliptic::EllipticBase::new(C64::new(p, 0.0), u.q)?;
        let t = crate::elliptic::shift_by_p(&u.u, alpha, base.p);
        for (r, v) in t.iter().enumerate() {
            if v.norm() >= 1.0 {
                return Err(Error::ContourInvalid(format!(
                    "|u_{r} p^alpha_{r}| = {} >= 1 at p = {p}",
                    v.norm()
                )));
            }
        }
        let e = crate::elliptic::elliptic_beta_integral(u.m, &t, &base, quad)?;
        errors.push((e - target).norm());
    }
    let decreasing = errors.windows(2).all(|w| w[1] < w[0]);
    let small = errors.last().is_some_and(|&e| e < tol_limit);
    let verdict = if decreasing && small {
        Verdict::Converging
    } else if decreasing {
        Verdict::Inconclusive
    } else {
        Verdict::Failed
    };
    Ok(ConvergenceReport {
        p_values: p_schedule.to_vec(),
        errors,
        target,
        verdict,
    })
}

/// `|B(alpha, u) - B(beta, u)|` for two points of one open face.
pub fn face_constancy_check(
    alpha: &RatVec,
    beta: &RatVec,
    u: &ParamPoint,
    quad: &QuadOptions,
) -> Result<f64> {
    let fa = classify_inside(alpha, PolytopeId::P, u.m)?;
    let fb = classify_inside(beta, PolytopeId::P, u.m)?;
    if fa.vertices != fb.vertices {
        return Err(Error::ConstraintViolated(
            "points lie on different faces".into(),
        ));
    }
    let a = eval_b(alpha, u, quad)?;
    let b = eval_b(beta, u, quad)?;
    Ok((a - b).norm())
}

/// `|B(alpha, u) - B(alpha, u . x^{alpha - beta})|`: dependence only on the
/// space orthogonal to the face.
pub fn orthogonal_dependence_check(
    alpha: &RatVec,
    beta: &RatVec,
    u: &ParamPoint,
    x: C64,
    quad: &QuadOptions,
) -> Result<f64> {
    let fa = classify_inside(alpha, PolytopeId::P, u.m)?;
    let fb = classify_inside(beta, PolytopeId::P, u.m)?;
    if fa.vertices != fb.vertices {
        return Err(Error::ConstraintViolated(
            "points lie on different faces".into(),
        ));
    }
    if x.norm() == 0.0 {
        return Err(Error::ConstraintViolated("x = 0".into()));
    }
    let a = eval_b(alpha, u, quad)?;
    let direction = alpha - beta;
    let shifted = ParamPoint::new(u.m, u.scale_by_powers(x, &direction), u.q)?;
    let b = eval_b(alpha, &shifted, quad)?;
    Ok((a - b).norm())
}

/// Scaled parameter draw admissible for a set of formulas: moduli are drawn
/// from a profile, one unconstrained coordinate absorbs the balancing
/// condition, and constraint violations trigger a redraw.
pub fn draw_admissible(
    face: &FaceDescriptor,
    q: C64,
    rng: &mut impl rand::Rng,
    attempts: usize,
) -> Result<ParamPoint> {
    let formula = formula_for_face(face)?;
    let m = face.m;
    let n = 2 * m + 6;
    // coordinates appearing in |.| < 1 constraints
    let mut bounded = vec![false; n];
    for c in &formula.constraints {
        let Constraint::ModulusLt(mono, _) = c;
        for (r, &e) in mono.upow.iter().enumerate() {
            if e != 0 {
                bounded[r] = true;
            }
        }
    }
    let solve_idx = (0..n).rev().max_by_key(|&r| !bounded[r] as u8).unwrap();
    for _ in 0..attempts {
        let mut u: Vec<C64> = (0..n)
            .map(|_| {
                C64::from_polar(
                    0.45 + 0.4 * rng.gen::<f64>(),
                    std::f64::consts::TAU * rng.gen::<f64>(),
                )
            })
            .collect();
        let mut prod = ONE;
        for (r, v) in u.iter().enumerate() {
            if r != solve_idx {
                prod *= v;
            }
        }
        u[solve_idx] = crate::qseries::powi(q, m as i64 + 1) / prod;
        if u[solve_idx].norm() > 3.0 || u[solve_idx].norm() < 0.05 {
            continue;
        }
        let point = ParamPoint::new(m, u, q)?;
        let ok = formula
            .constraints
            .iter()
            .all(|c| c.check(&point, DEFAULT_MARGIN).is_ok());
        if ok {
            return Ok(point);
        }
    }
    Err(Error::DrawExhausted(attempts))
}
