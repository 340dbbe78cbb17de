//! Root systems R(E8), R(E7), the 56-point orbit S, and Weyl actions.
//!
//! Everything here is exact: roots are rational vectors in the even coordinate
//! system of the E8 lattice (integer vectors, or half-integer vectors with an
//! even coordinate sum). R(E7) consists of the norm-2 lattice vectors
//! orthogonal to `rho = (1/2,...,1/2)`, and S of those with `v . rho = 1`.
//!
//! The Weyl group W(E7) acts in two ways: exactly on rational vectors by
//! reflections, and multiplicatively on complex parameter points through
//! `w(u) = exp(w(log u))`. The latter is only defined up to a global sign,
//! which [`ParamPoint::canonical_sign`] resolves.

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::params::{C64, ParamPoint};
use crate::rat::{rat, RatVec};

pub const DIM: usize = 8;

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum RootSystemKind {
    E7,
    E8,
    OrbitS,
}

/// A norm-2 vector of the E8 lattice.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Root(RatVec);

impl Root {
    pub fn new(v: RatVec) -> Result<Self> {
        if !is_lattice_vector(&v) || v.norm2() != rat(2, 1) {
            return Err(Error::NotARoot(v.to_string()));
        }
        Ok(Root(v))
    }

    pub fn vec(&self) -> &RatVec {
        &self.0
    }

    pub fn is_e7(&self) -> bool {
        self.0.dot(&RatVec::rho(DIM)).is_zero()
    }
}

/// Integer vector, or half-integer vector with even coordinate sum.
pub fn is_lattice_vector(v: &RatVec) -> bool {
    if v.len() != DIM {
        return false;
    }
    if v.is_integral() {
        v.sum().is_integer() && (*v.sum().numer() % 2 == 0)
    } else {
        v.is_half_integral() && v.sum().is_integer() && (*v.sum().numer() % 2 == 0)
    }
}

/// Complete, duplicate-free, sorted enumeration of the requested system.
///
/// Integer roots are the 112 vectors `+-e_i +- e_j`; half-integer roots are
/// the 128 sign patterns of `(+-1/2, ..., +-1/2)` with an even number of
/// minus signs. E7 and S are cut out by the `rho`-inner-product conditions.
pub fn enumerate_roots(kind: RootSystemKind) -> Vec<RatVec> {
    let mut roots = Vec::new();
    for i in 0..DIM {
        for j in (i + 1)..DIM {
            for (si, sj) in [(1i64, 1i64), (1, -1), (-1, 1), (-1, -1)] {
                let mut c = [0i64; DIM];
                c[i] = si;
                c[j] = sj;
                roots.push(RatVec::from_ints(&c));
            }
        }
    }
    for pattern in 0u32..256 {
        if pattern.count_ones() % 2 != 0 {
            continue;
        }
        let halves: Vec<i64> = (0..DIM)
            .map(|i| if pattern >> i & 1 == 1 { -1 } else { 1 })
            .collect();
        roots.push(RatVec::from_halves(&halves));
    }
    let rho = RatVec::rho(DIM);
    let mut out: Vec<RatVec> = roots
        .into_iter()
        .filter(|v| match kind {
            RootSystemKind::E8 => true,
            RootSystemKind::E7 => v.dot(&rho).is_zero(),
            RootSystemKind::OrbitS => v.dot(&rho) == rat(1, 1),
        })
        .collect();
    out.sort();
    out.dedup();
    out
}

/// The reflection `s_root(v) = v - (root . v) root`, exact.
pub fn reflect(root: &RatVec, v: &RatVec) -> Result<RatVec> {
    if root.norm2() != rat(2, 1) {
        return Err(Error::NotARoot(root.to_string()));
    }
    let c = root.dot(v);
    Ok(v - &root.scale(c))
}

/// Ordered product of reflections in roots of R(E7), applied left to right.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeylWord {
    reflections: Vec<RatVec>,
}

impl WeylWord {
    pub fn identity() -> Self {
        WeylWord {
            reflections: Vec::new(),
        }
    }

    pub fn new(reflections: Vec<RatVec>) -> Result<Self> {
        let rho = RatVec::rho(DIM);
        for r in &reflections {
            if !is_lattice_vector(r) || r.norm2() != rat(2, 1) {
                return Err(Error::NotARoot(r.to_string()));
            }
            if !r.dot(&rho).is_zero() {
                return Err(Error::NotAnE7Root(r.to_string()));
            }
        }
        Ok(WeylWord { reflections })
    }

    pub fn single(root: RatVec) -> Result<Self> {
        Self::new(vec![root])
    }

    pub fn reflections(&self) -> &[RatVec] {
        &self.reflections
    }

    pub fn len(&self) -> usize {
        self.reflections.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reflections.is_empty()
    }

    /// Concatenation: acting by `self * other` means acting by `self`, then
    /// by `other`.
    pub fn then(&self, other: &WeylWord) -> WeylWord {
        let mut reflections = self.reflections.clone();
        reflections.extend(other.reflections.iter().cloned());
        WeylWord { reflections }
    }

    /// Exact action on a rational vector.
    pub fn act_vec(&self, v: &RatVec) -> RatVec {
        let mut out = v.clone();
        for r in &self.reflections {
            let c = r.dot(&out);
            out = &out - &r.scale(c);
        }
        out
    }

    /// Multiplicative action on a parameter point (m = 1 only).
    ///
    /// A reflection in `e_i - e_j` swaps `u_i` and `u_j` exactly. A
    /// reflection in a half-integer root divides the four coordinates where
    /// the root is `-1/2` by `s = sqrt(u_i u_j u_k u_l / q)` and multiplies
    /// the rest by `s` (principal square root); the balancing condition is
    /// preserved for either sign of `s` and the result is canonicalized
    /// modulo the global sign.
    pub fn act_param(&self, t: &ParamPoint) -> Result<ParamPoint> {
        if t.m != 1 {
            return Err(Error::Unsupported(
                "the Weyl action on parameters is defined for m = 1".into(),
            ));
        }
        t.check_balancing()?;
        let u = self.act_multiplicative(&t.u, t.q)?;
        ParamPoint::new(1, u, t.q)
    }

    /// Raw multiplicative action on a balanced 8-vector. `unit` is the
    /// square of the balancing square root: `q` on the basic level
    /// (`prod u = q^2`), `pq` on the elliptic level (`prod t = (pq)^2`).
    /// The result is not sign-canonicalized.
    pub fn act_multiplicative(&self, u: &[C64], unit: C64) -> Result<Vec<C64>> {
        let mut out = u.to_vec();
        for root in &self.reflections {
            apply_reflection_multiplicative(&mut out, root, unit)?;
        }
        Ok(out)
    }
}

fn apply_reflection_multiplicative(u: &mut [C64], root: &RatVec, q: C64) -> Result<()> {
    if root.is_integral() {
        let mut hit = Vec::new();
        for (idx, c) in root.coords().iter().enumerate() {
            if !c.is_zero() {
                hit.push(idx);
            }
        }
        debug_assert_eq!(hit.len(), 2);
        u.swap(hit[0], hit[1]);
        return Ok(());
    }
    let minus: Vec<usize> = root
        .coords()
        .iter()
        .enumerate()
        .filter(|(_, c)| **c == rat(-1, 2))
        .map(|(i, _)| i)
        .collect();
    debug_assert_eq!(minus.len(), 4);
    let mut prod = C64::new(1.0, 0.0);
    for &i in &minus {
        prod *= u[i];
    }
    let s = (prod / q).sqrt();
    if s.norm() == 0.0 {
        return Err(Error::ConstraintViolated("zero parameter in Weyl action".into()));
    }
    for (i, v) in u.iter_mut().enumerate() {
        if minus.contains(&i) {
            *v /= s;
        } else {
            *v *= s;
        }
    }
    Ok(())
}

/// All roots of R(E7) orthogonal to every vector in `fix`; these generate the
/// pointwise stabilizer of the set.
pub fn stabilizer_roots(fix: &[RatVec]) -> Vec<RatVec> {
    enumerate_roots(RootSystemKind::E7)
        .into_iter()
        .filter(|delta| fix.iter().all(|v| delta.dot(v).is_zero()))
        .collect()
}

/// Roots of R(E7) whose inner product with every vector in `fix` is one and
/// the same integer. For a face's vertex set these are exactly the roots
/// whose reflections stabilize the shifted lattice `alpha + Lambda(E7)` at a
/// generic point `alpha` of the face.
pub fn affine_stabilizer_roots(fix: &[RatVec]) -> Vec<RatVec> {
    enumerate_roots(RootSystemKind::E7)
        .into_iter()
        .filter(|delta| {
            let mut values = fix.iter().map(|v| delta.dot(v));
            match values.next() {
                None => true,
                Some(first) => first.is_integer() && values.all(|c| c == first),
            }
        })
        .collect()
}

/// Convenience constructors for the standard root shapes.
pub fn root_eij(i: usize, j: usize) -> RatVec {
    let mut c = [0i64; DIM];
    c[i] = 1;
    c[j] = -1;
    RatVec::from_ints(&c)
}

/// `rho - e_i - e_j - e_k - e_l`.
pub fn root_rho4(quad: [usize; 4]) -> RatVec {
    let mut halves = [1i64; DIM];
    for i in quad {
        halves[i] = -1;
    }
    RatVec::from_halves(&halves)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha12Rng;

    /// Brute-force oracle: search all integer vectors with coordinates in
    /// {-2..2} and all half-integer vectors with coordinates in
    /// {-3/2..3/2}, keep the norm-2 lattice vectors. The bound is sufficient
    /// because any coordinate of magnitude > 2 (or > 3/2 on the half-integer
    /// side) already exceeds squared norm 2.
    fn brute_force(kind: RootSystemKind) -> Vec<RatVec> {
        let rho = RatVec::rho(DIM);
        let mut out = Vec::new();
        let mut idx = [0usize; DIM];
        let int_range = [-2i64, -1, 0, 1, 2];
        loop {
            let v = RatVec::from_ints(&idx.map(|i| int_range[i]));
            if v.norm2() == rat(2, 1) && is_lattice_vector(&v) {
                out.push(v);
            }
            if !advance(&mut idx, int_range.len()) {
                break;
            }
        }
        let mut idx = [0usize; DIM];
        let half_range = [-3i64, -1, 1, 3];
        loop {
            let v = RatVec::from_halves(&idx.map(|i| half_range[i]));
            if v.norm2() == rat(2, 1) && is_lattice_vector(&v) {
                out.push(v);
            }
            if !advance(&mut idx, half_range.len()) {
                break;
            }
        }
        let mut out: Vec<RatVec> = out
            .into_iter()
            .filter(|v| match kind {
                RootSystemKind::E8 => true,
                RootSystemKind::E7 => v.dot(&rho).is_zero(),
                RootSystemKind::OrbitS => v.dot(&rho) == rat(1, 1),
            })
            .collect();
        out.sort();
        out.dedup();
        out
    }

    fn advance(idx: &mut [usize; DIM], base: usize) -> bool {
        for slot in idx.iter_mut() {
            *slot += 1;
            if *slot < base {
                return true;
            }
            *slot = 0;
        }
        false
    }

    #[test]
    fn counts_match_brute_force() {
        for (kind, expected) in [
            (RootSystemKind::E8, 240),
            (RootSystemKind::E7, 126),
            (RootSystemKind::OrbitS, 56),
        ] {
            let fast = enumerate_roots(kind);
            assert_eq!(fast.len(), expected);
            assert_eq!(fast, brute_force(kind));
        }
    }

    #[test]
    fn reflect_transposition_and_fixed_vector() {
        let e0 = RatVec::basis(DIM, 0);
        let e1 = RatVec::basis(DIM, 1);
        let r = root_eij(0, 1);
        assert_eq!(reflect(&r, &e0).unwrap(), e1);
        // alpha . v = 0 leaves v fixed
        let v = RatVec::from_ints(&[0, 0, 3, -1, 0, 2, 5, 7]);
        assert_eq!(reflect(&r, &v).unwrap(), v);
        // non-root rejected
        assert!(reflect(&e0, &v).is_err());
    }

    #[test]
    fn reflect_half_integer_root_preserves_inner_products() {
        let root = root_rho4([0, 1, 2, 3]);
        let e0 = RatVec::basis(DIM, 0);
        // direct formula evaluation
        let img = reflect(&root, &e0).unwrap();
        let expected = &e0 - &root.scale(root.dot(&e0));
        assert_eq!(img, expected);
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        let e7 = enumerate_roots(RootSystemKind::E7);
        for _ in 0..50 {
            let alpha = &e7[rng.gen_range(0..e7.len())];
            let u = RatVec::from_ints(&std::array::from_fn::<i64, DIM, _>(|_| {
                rng.gen_range(-4..=4)
            }));
            let v = RatVec::from_ints(&std::array::from_fn::<i64, DIM, _>(|_| {
                rng.gen_range(-4..=4)
            }));
            let su = reflect(alpha, &u).unwrap();
            let sv = reflect(alpha, &v).unwrap();
            assert_eq!(su.dot(&sv), u.dot(&v));
            // involutive
            assert_eq!(reflect(alpha, &su).unwrap(), u);
        }
    }

    fn random_point(rng: &mut ChaCha12Rng, q: C64) -> ParamPoint {
        let head: Vec<C64> = (0..7)
            .map(|_| {
                C64::from_polar(
                    0.55 + 0.2 * rng.gen::<f64>(),
                    std::f64::consts::TAU * rng.gen::<f64>(),
                )
            })
            .collect();
        ParamPoint::solve_last(1, &head, q).unwrap()
    }

    #[test]
    fn weyl_param_action_matches_worked_example() {
        // reflection in rho - e0 - e3 - e4 - e7 sends u to
        // (u0/s, u1 s, u2 s, u3/s, u4/s, u5 s, u6 s, u7/s), s = sqrt(u0 u3 u4 u7 / q)
        let q = C64::new(0.2, 0.0);
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        let t = random_point(&mut rng, q);
        let w = WeylWord::single(root_rho4([0, 3, 4, 7])).unwrap();
        let img = w.act_param(&t).unwrap();
        let s = (t.u[0] * t.u[3] * t.u[4] * t.u[7] / q).sqrt();
        let expected = [
            t.u[0] / s,
            t.u[1] * s,
            t.u[2] * s,
            t.u[3] / s,
            t.u[4] / s,
            t.u[5] * s,
            t.u[6] * s,
            t.u[7] / s,
        ];
        let canon = ParamPoint::new(1, expected.to_vec(), q).unwrap();
        for (a, b) in img.u.iter().zip(&canon.u) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn weyl_param_action_transposition_and_involution() {
        let q = C64::new(0.2, 0.0);
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        let t = random_point(&mut rng, q);
        let swap = WeylWord::single(root_eij(3, 4)).unwrap();
        let img = swap.act_param(&t).unwrap();
        assert!((img.u[3] - t.u[4]).norm() < 1e-15 || (img.u[3] + t.u[4]).norm() < 1e-15);
        // applying a half-integer reflection twice gives the identity modulo sign
        let w = WeylWord::single(root_rho4([1, 2, 5, 6])).unwrap();
        let twice = w.then(&w).act_param(&t).unwrap();
        let t_canon = t.clone().canonical_sign();
        for (a, b) in twice.u.iter().zip(&t_canon.u) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn weyl_param_action_preserves_balancing_and_composes() {
        let q = C64::new(0.25, 0.05);
        let mut rng = ChaCha12Rng::seed_from_u64(99);
        let e7 = enumerate_roots(RootSystemKind::E7);
        for _ in 0..20 {
            let t = random_point(&mut rng, q);
            let roots: Vec<RatVec> = (0..rng.gen_range(1..=6))
                .map(|_| e7[rng.gen_range(0..e7.len())].clone())
                .collect();
            let w = WeylWord::new(roots.clone()).unwrap();
            let img = w.act_param(&t).unwrap();
            img.check_balancing().unwrap();
            // composition equals concatenation modulo global sign
            let split = roots.len() / 2;
            let w1 = WeylWord::new(roots[..split].to_vec()).unwrap();
            let w2 = WeylWord::new(roots[split..].to_vec()).unwrap();
            let step = w2.act_param(&w1.act_param(&t).unwrap()).unwrap();
            for (a, b) in img.u.iter().zip(&step.u) {
                assert!((a - b).norm() < 1e-9, "composition mismatch");
            }
        }
    }

    #[test]
    fn stabilizer_of_everything_is_trivial() {
        let all = enumerate_roots(RootSystemKind::OrbitS);
        assert!(stabilizer_roots(&all).is_empty());
    }

    #[test]
    fn stabilizer_matches_worked_example() {
        // face with vertices w01, w02, v67, v57
        let verts = vec![
            root_rho4_like(&[0, 1]),
            root_rho4_like(&[0, 2]),
            vij(6, 7),
            vij(5, 7),
        ];
        let stab = stabilizer_roots(&verts);
        let mut expected = vec![
            root_eij(3, 4),
            root_eij(4, 3),
            root_rho4([0, 3, 4, 7]),
            root_rho4([1, 2, 5, 6]),
            root_rho4([0, 3, 5, 6]),
            root_rho4([1, 2, 4, 7]),
            root_rho4([0, 4, 5, 6]),
            root_rho4([1, 2, 3, 7]),
        ];
        expected.sort();
        let mut got = stab.clone();
        got.sort();
        assert_eq!(got, expected);
    }

    fn vij(i: usize, j: usize) -> RatVec {
        let mut c = [0i64; DIM];
        c[i] = 1;
        c[j] = 1;
        RatVec::from_ints(&c)
    }

    fn root_rho4_like(pair: &[usize]) -> RatVec {
        // w_ij = rho - e_i - e_j
        let mut halves = [1i64; DIM];
        for &i in pair {
            halves[i] = -1;
        }
        RatVec::from_halves(&halves)
    }

    #[test]
    fn single_vertex_stabilizer_matches_brute_force() {
        let v = vij(6, 7);
        let stab = stabilizer_roots(std::slice::from_ref(&v));
        let brute: Vec<RatVec> = enumerate_roots(RootSystemKind::E7)
            .into_iter()
            .filter(|d| d.dot(&v).is_zero())
            .collect();
        assert_eq!(stab.len(), brute.len());
    }
}
