//! The limit polytopes and exact point classification.
//!
//! `P^(m)` is the convex hull in the hyperplane `sum alpha = m+1` of the
//! vectors `v_S = sum_{j in S} e_j` (`|S| = m+1`) and
//! `w_ij = rho^(m) - e_i - e_j`; for `m = 1` this is the Hesse polytope with
//! 56 vertices. `P_I`, `P_II`, `P_III` are the sub-polytopes whose union
//! (over coordinate permutations) covers `P`, and `P_ext` is the larger
//! polytope of valid evaluation directions for `m = 0`.
//!
//! All predicates are exact; a point either lies on a bounding hyperplane or
//! it does not.

use std::collections::BTreeSet;
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rat::{affine_dim, primitive_integer_form, rat, Rat, RatVec};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PolytopeId {
    P,
    PI,
    PII,
    PIII,
    Pext,
}

impl std::fmt::Display for PolytopeId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            PolytopeId::P => "P",
            PolytopeId::PI => "PI",
            PolytopeId::PII => "PII",
            PolytopeId::PIII => "PIII",
            PolytopeId::Pext => "Pext",
        };
        write!(f, "{name}")
    }
}

/// Bounding inequality `mu . alpha <= c`, with `mu` in primitive integer
/// form. Inequalities arriving as `>=` are negated into this shape; the
/// direction is part of the data, so no further sign normalization is
/// applied to `mu`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Inequality {
    pub mu: RatVec,
    pub c: Rat,
}

impl Inequality {
    /// `mu . alpha <= c`
    fn le(mu: RatVec, c: Rat) -> Self {
        let prim = primitive_integer_form(&mu);
        // rescale c by the same factor mu was scaled with
        let scale = scale_factor(&mu, &prim);
        Inequality {
            mu: RatVec::new(prim.iter().map(|&x| Rat::from_integer(x)).collect()),
            c: c * scale,
        }
    }

    /// `mu . alpha >= c`
    fn ge(mu: RatVec, c: Rat) -> Self {
        Self::le(-&mu, -c)
    }

    pub fn holds(&self, alpha: &RatVec) -> bool {
        self.mu.dot(alpha) <= self.c
    }

    pub fn tight(&self, alpha: &RatVec) -> bool {
        self.mu.dot(alpha) == self.c
    }

    pub fn slack(&self, alpha: &RatVec) -> Rat {
        self.c - self.mu.dot(alpha)
    }
}

fn scale_factor(original: &RatVec, prim: &[i64]) -> Rat {
    for (o, p) in original.coords().iter().zip(prim) {
        if !o.is_zero() {
            return Rat::from_integer(*p) / o;
        }
    }
    Rat::one()
}

/// Ambient vector length for the given polytope and `m`.
pub fn ambient_len(id: PolytopeId, m: usize) -> usize {
    match id {
        PolytopeId::Pext => 6,
        _ => 2 * m + 6,
    }
}

/// Right-hand side of the hyperplane condition `sum alpha = ...`.
pub fn hyperplane_sum(id: PolytopeId, m: usize) -> Rat {
    match id {
        PolytopeId::Pext => Rat::one(),
        _ => Rat::from_integer(m as i64 + 1),
    }
}

/// `v_S` for a subset `S` of coordinates.
pub fn vertex_v(n: usize, s: &[usize]) -> RatVec {
    let mut v = RatVec::zeros(n);
    for &j in s {
        v.set(j, Rat::one());
    }
    v
}

/// `w_ij = rho^(m) - e_i - e_j`.
pub fn vertex_w(n: usize, i: usize, j: usize) -> RatVec {
    let mut v = RatVec::rho(n);
    v.set(i, rat(-1, 2));
    v.set(j, rat(-1, 2));
    v
}

pub fn subsets(pool: &[usize], size: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if size > pool.len() {
        return out;
    }
    if size == 0 {
        out.push(Vec::new());
        return out;
    }
    let mut idx: Vec<usize> = (0..size).collect();
    loop {
        out.push(idx.iter().map(|&i| pool[i]).collect());
        // advance combination
        let mut i = size;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if idx[i] != i + pool.len() - size {
                idx[i] += 1;
                for j in i + 1..size {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Exact vertex list, sorted and duplicate-free.
pub fn vertices(id: PolytopeId, m: usize) -> Result<Vec<RatVec>> {
    let n = ambient_len(id, m);
    let all: Vec<usize> = (0..n).collect();
    let mut verts = Vec::new();
    match id {
        PolytopeId::P => {
            for s in subsets(&all, m + 1) {
                verts.push(vertex_v(n, &s));
            }
            for i in 0..n {
                for j in i + 1..n {
                    verts.push(vertex_w(n, i, j));
                }
            }
        }
        PolytopeId::PI => {
            for s in subsets(&all, m + 1) {
                verts.push(vertex_v(n, &s));
            }
        }
        PolytopeId::PII => {
            for s in subsets(&all[1..], m + 1) {
                verts.push(vertex_v(n, &s));
            }
            for j in 1..n {
                verts.push(vertex_w(n, 0, j));
            }
        }
        PolytopeId::PIII => {
            for s in subsets(&all[3..], m + 1) {
                verts.push(vertex_v(n, &s));
            }
            for i in 0..3 {
                for j in i + 1..3 {
                    verts.push(vertex_w(n, i, j));
                }
            }
        }
        PolytopeId::Pext => {
            if m != 0 {
                return Err(Error::UnsupportedPolytope(
                    format!("m = {m}"),
                    "Pext".into(),
                ));
            }
            for j in 0..6 {
                verts.push(RatVec::basis(6, j));
            }
            for j in 0..6 {
                let mut f = RatVec::rho(6);
                f.set(j, rat(-3, 2));
                verts.push(f);
            }
        }
    }
    verts.sort();
    verts.dedup();
    Ok(verts)
}

/// The exact bounding-inequality list of the polytope inside its hyperplane.
///
/// Inequalities that are valid but not bounding for `m = 0` are excluded
/// there, so tight sets always describe proper faces.
pub fn bounding_inequalities(id: PolytopeId, m: usize) -> Result<Vec<Inequality>> {
    let n = ambient_len(id, m);
    let mut out: BTreeSet<Inequality> = BTreeSet::new();
    let all: Vec<usize> = (0..n).collect();
    match id {
        PolytopeId::P => {
            for i in 0..n {
                // -1/2 <= alpha_i
                out.insert(Inequality::ge(RatVec::basis(n, i), rat(-1, 2)));
                if m > 0 {
                    out.insert(Inequality::le(RatVec::basis(n, i), Rat::one()));
                }
            }
            for i in 0..n {
                for j in 0..n {
                    if i != j {
                        // alpha_i - alpha_j <= 1
                        let mu = &RatVec::basis(n, i) - &RatVec::basis(n, j);
                        out.insert(Inequality::le(mu, Rat::one()));
                    }
                }
            }
            if m > 0 {
                for i in 0..n {
                    let rest: Vec<usize> = all.iter().copied().filter(|&j| j != i).collect();
                    for s in subsets(&rest, 3) {
                        // alpha_i <= 1 + alpha_j + alpha_k + alpha_l
                        let mut mu = RatVec::basis(n, i);
                        for &j in &s {
                            mu.set(j, -Rat::one());
                        }
                        out.insert(Inequality::le(mu, Rat::one()));
                    }
                }
            }
            for size in 3..=(m + 3) {
                for i in 0..n {
                    let rest: Vec<usize> = all.iter().copied().filter(|&j| j != i).collect();
                    for s in subsets(&rest, size) {
                        // (|S|-2) alpha_i + sum_S alpha_j >= 0
                        let mut mu = RatVec::basis(n, i).scale(Rat::from_integer(size as i64 - 2));
                        for &j in &s {
                            mu.set(j, Rat::one());
                        }
                        out.insert(Inequality::ge(mu, Rat::zero()));
                    }
                }
            }
        }
        PolytopeId::PI => {
            for i in 0..n {
                out.insert(Inequality::ge(RatVec::basis(n, i), Rat::zero()));
                if m > 0 {
                    out.insert(Inequality::le(RatVec::basis(n, i), Rat::one()));
                }
            }
        }
        PolytopeId::PII => {
            out.insert(Inequality::ge(RatVec::basis(n, 0), rat(-1, 2)));
            for r in 1..n {
                let mu = &RatVec::basis(n, r) - &RatVec::basis(n, 0);
                out.insert(Inequality::le(mu, Rat::one()));
            }
            for size in 0..=(m + 3) {
                for s in subsets(&all[1..], size) {
                    let mut mu = RatVec::basis(n, 0).scale(Rat::from_integer(size as i64 - 2));
                    for &j in &s {
                        mu.set(j, Rat::one());
                    }
                    out.insert(Inequality::ge(mu, Rat::zero()));
                }
            }
        }
        PolytopeId::PIII => {
            for i in 0..3 {
                for j in i + 1..3 {
                    let mu = &RatVec::basis(n, i) + &RatVec::basis(n, j);
                    out.insert(Inequality::le(mu, Rat::zero()));
                }
            }
            let triple = &(&RatVec::basis(n, 0) + &RatVec::basis(n, 1)) + &RatVec::basis(n, 2);
            for i in 3..n {
                // -alpha_i <= alpha_0 + alpha_1 + alpha_2
                out.insert(Inequality::ge(&triple + &RatVec::basis(n, i), Rat::zero()));
                if m > 0 {
                    // alpha_i - 1 <= alpha_0 + alpha_1 + alpha_2
                    out.insert(Inequality::le(&RatVec::basis(n, i) - &triple, Rat::one()));
                }
            }
        }
        PolytopeId::Pext => {
            if m != 0 {
                return Err(Error::UnsupportedPolytope(
                    format!("m = {m}"),
                    "Pext".into(),
                ));
            }
            for r in 0..6 {
                for s in r + 1..6 {
                    let mu = &RatVec::basis(6, r) + &RatVec::basis(6, s);
                    out.insert(Inequality::le(mu, Rat::one()));
                }
            }
        }
    }
    Ok(out.into_iter().collect())
}

/// Cached copy of [`bounding_inequalities`]; classification calls this.
pub fn inequalities_cached(id: PolytopeId, m: usize) -> Result<Arc<Vec<Inequality>>> {
    static CACHE: OnceLock<Mutex<HashMap<(PolytopeId, usize), Arc<Vec<Inequality>>>>> =
        OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().unwrap();
    if let Some(v) = guard.get(&(id, m)) {
        return Ok(v.clone());
    }
    let fresh = Arc::new(bounding_inequalities(id, m)?);
    guard.insert((id, m), fresh.clone());
    Ok(fresh)
}

/// Cached copy of [`vertices`].
pub fn vertices_cached(id: PolytopeId, m: usize) -> Result<Arc<Vec<RatVec>>> {
    static CACHE: OnceLock<Mutex<HashMap<(PolytopeId, usize), Arc<Vec<RatVec>>>>> =
        OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().unwrap();
    if let Some(v) = guard.get(&(id, m)) {
        return Ok(v.clone());
    }
    let fresh = Arc::new(vertices(id, m)?);
    guard.insert((id, m), fresh.clone());
    Ok(fresh)
}

/// The W(E7)-invariant description of `P^(1)`: `alpha . delta <= 1` over
/// R(E7) together with `alpha . mu <= 2` over the norm-4 lattice vectors
/// with `mu . rho = 1`. Available as an alternate to [`bounding_inequalities`].
pub fn e7_invariant_inequalities() -> Vec<Inequality> {
    use crate::rootsys::{enumerate_roots, RootSystemKind};
    let mut out = BTreeSet::new();
    for delta in enumerate_roots(RootSystemKind::E7) {
        out.insert(Inequality::le(delta, Rat::one()));
    }
    // norm-4 lattice vectors with mu . rho = 1: 2e_i, e_i+e_j+e_k-e_l,
    // rho-2e_i, rho+e_i-e_j-e_k-e_l
    let n = 8;
    let all: Vec<usize> = (0..n).collect();
    for i in 0..n {
        out.insert(Inequality::le(
            RatVec::basis(n, i).scale(rat(2, 1)),
            rat(2, 1),
        ));
        let mut f = RatVec::rho(n);
        f.set(i, rat(-3, 2));
        out.insert(Inequality::le(f, rat(2, 1)));
    }
    for s in subsets(&all, 3) {
        for &l in all.iter().filter(|&&l| !s.contains(&l)) {
            let mut mu = RatVec::zeros(n);
            for &j in &s {
                mu.set(j, Rat::one());
            }
            mu.set(l, -Rat::one());
            out.insert(Inequality::le(mu.clone(), rat(2, 1)));
            // rho + e_l - e_{s1} - e_{s2} - e_{s3}
            let mut g = RatVec::rho(n);
            g.set(l, rat(3, 2));
            for &j in &s {
                g.set(j, rat(-1, 2));
            }
            out.insert(Inequality::le(g, rat(2, 1)));
        }
    }
    out.into_iter().collect()
}

/// Canonical description of the face of a polytope containing a given point.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FaceDescriptor {
    pub polytope: PolytopeId,
    pub m: usize,
    /// Indices into `bounding_inequalities(polytope, m)` of every inequality
    /// tight on the whole face (the maximal tight set).
    pub tight: Vec<usize>,
    /// Vertices of the polytope lying on the face, sorted.
    #[serde(with = "ratvec_list_serde")]
    pub vertices: Vec<RatVec>,
    pub dim: usize,
}

impl FaceDescriptor {
    pub fn centroid(&self) -> RatVec {
        let n = self.vertices[0].len();
        let mut sum = RatVec::zeros(n);
        for v in &self.vertices {
            sum = &sum + v;
        }
        sum.scale(Rat::new(1, self.vertices.len() as i64))
    }

    pub fn is_simplicial(&self) -> bool {
        self.vertices.len() == self.dim + 1
    }

    /// True when the tight set is empty, i.e. the face is the interior.
    pub fn is_interior(&self) -> bool {
        self.tight.is_empty()
    }
}

mod ratvec_list_serde {
    use super::RatVec;
    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[RatVec], ser: S) -> Result<S::Ok, S::Error> {
        ser.collect_seq(v.iter().map(|x| {
            x.coords()
                .iter()
                .map(|c| c.to_string())
                .collect::<Vec<_>>()
        }))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<Vec<RatVec>, D::Error> {
        let raw: Vec<Vec<String>> = Vec::deserialize(de)?;
        raw.into_iter()
            .map(|coords| {
                coords
                    .iter()
                    .map(|c| crate::rat::parse_rat(c).map_err(D::Error::custom))
                    .collect::<Result<Vec<_>, _>>()
                    .map(RatVec::new)
            })
            .collect()
    }
}

/// Result of classifying a point against a polytope.
#[derive(Clone, Debug)]
pub enum Classification {
    Face(FaceDescriptor),
    Outside { violated: Vec<Inequality> },
}

/// Finds the unique open face containing `alpha`, or reports the violated
/// inequalities. The hyperplane condition `sum alpha = m+1` must hold
/// exactly.
pub fn classify_point(alpha: &RatVec, id: PolytopeId, m: usize) -> Result<Classification> {
    let n = ambient_len(id, m);
    if alpha.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: alpha.len(),
        });
    }
    let target = hyperplane_sum(id, m);
    if alpha.sum() != target {
        return Err(Error::HyperplaneViolated {
            expected: target.to_string(),
            got: alpha.sum().to_string(),
        });
    }
    let inequalities = inequalities_cached(id, m)?;
    let violated: Vec<Inequality> = inequalities
        .iter()
        .filter(|ineq| !ineq.holds(alpha))
        .cloned()
        .collect();
    if !violated.is_empty() {
        return Ok(Classification::Outside { violated });
    }
    let tight_at_alpha: Vec<usize> = inequalities
        .iter()
        .enumerate()
        .filter(|(_, ineq)| ineq.tight(alpha))
        .map(|(i, _)| i)
        .collect();
    let verts = vertices_cached(id, m)?;
    let face_verts: Vec<RatVec> = verts
        .iter()
        .cloned()
        .filter(|v| tight_at_alpha.iter().all(|&i| inequalities[i].tight(v)))
        .collect();
    let tight: Vec<usize> = inequalities
        .iter()
        .enumerate()
        .filter(|(_, ineq)| face_verts.iter().all(|v| ineq.tight(v)))
        .map(|(i, _)| i)
        .collect();
    let dim = affine_dim(&face_verts);
    Ok(Classification::Face(FaceDescriptor {
        polytope: id,
        m,
        tight,
        vertices: face_verts,
        dim,
    }))
}

/// Classifies and errors out when the point is not inside.
pub fn classify_inside(alpha: &RatVec, id: PolytopeId, m: usize) -> Result<FaceDescriptor> {
    match classify_point(alpha, id, m)? {
        Classification::Face(f) => Ok(f),
        Classification::Outside { violated } => Err(Error::OutsidePolytope(violated.len())),
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SubPolytope {
    PI,
    PII,
    PIII,
}

impl From<SubPolytope> for PolytopeId {
    fn from(s: SubPolytope) -> Self {
        match s {
            SubPolytope::PI => PolytopeId::PI,
            SubPolytope::PII => PolytopeId::PII,
            SubPolytope::PIII => PolytopeId::PIII,
        }
    }
}

/// One decomposition membership: `alpha` lies in `sigma(part)`, i.e.
/// `alpha.permute(sigma)` lies in `part` with its standard coordinate roles.
/// `sigma[i]` is the role slot of original index `i`.
#[derive(Clone, Debug)]
pub struct Membership {
    pub part: SubPolytope,
    pub sigma: Vec<usize>,
}

/// Decomposes a point of `P^(m)` into the covering sub-polytopes.
///
/// The permutation is found by stable-sorting the coordinates (ties keep the
/// lexicographically smallest permutation); memberships are tested on the
/// sorted point against each sub-polytope's inequality system.
pub fn decompose(alpha: &RatVec, m: usize) -> Result<Vec<Membership>> {
    classify_inside(alpha, PolytopeId::P, m)?;
    let n = alpha.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| (alpha.get(i), i));
    // sigma[original index] = sorted position
    let mut sigma = vec![0usize; n];
    for (pos, &orig) in order.iter().enumerate() {
        sigma[orig] = pos;
    }
    let sorted = alpha.permute(&sigma);
    let identity: Vec<usize> = (0..n).collect();

    let mut memberships = Vec::new();
    for (part, id) in [
        (SubPolytope::PI, PolytopeId::PI),
        (SubPolytope::PII, PolytopeId::PII),
        (SubPolytope::PIII, PolytopeId::PIII),
    ] {
        let (probe, sig) = if part == SubPolytope::PI {
            (alpha.clone(), identity.clone())
        } else {
            (sorted.clone(), sigma.clone())
        };
        let inside = inequalities_cached(id, m)?
            .iter()
            .all(|ineq| ineq.holds(&probe));
        if inside {
            memberships.push(Membership { part, sigma: sig });
        }
    }
    if memberships.is_empty() {
        return Err(Error::OutsidePolytope(0));
    }
    Ok(memberships)
}
