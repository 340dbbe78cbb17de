//! Exact face lattices, orbits and stabilizers.
//!
//! Faces are represented by bitmasks over the sorted vertex list (every
//! polytope here has at most 56 vertices). The lattice is the closure of the
//! facet incidence masks under intersection; dimensions come from exact
//! integer rank computations.

use std::collections::HashMap;
use std::hash::{BuildHasherDefault, Hasher};
use std::sync::{Arc, Mutex, OnceLock};

use crate::coxeter::{coxeter_type, CoxeterType};
use crate::error::{Error, Result};
use crate::polytope::{
    inequalities_cached, vertices_cached, FaceDescriptor, Inequality, PolytopeId,
};
use crate::rat::RatVec;
use crate::rootsys::{
    affine_stabilizer_roots, enumerate_roots, reflect, stabilizer_roots, RootSystemKind, WeylWord,
};

pub type Mask = u64;

/// Cheap hasher for small integer keys.
#[derive(Default)]
pub struct MixHasher(u64);

impl Hasher for MixHasher {
    fn finish(&self) -> u64 {
        self.0
    }
    fn write(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.0 = (self.0 ^ b as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
        }
    }
    fn write_u64(&mut self, v: u64) {
        self.0 = (self.0 ^ v).wrapping_mul(0x9E37_79B9_7F4A_7C15);
        self.0 ^= self.0 >> 29;
    }
}

type MaskMap<V> = HashMap<Mask, V, BuildHasherDefault<MixHasher>>;

#[derive(Clone, Debug)]
pub struct FaceData {
    pub mask: Mask,
    pub dim: usize,
}

/// The full face lattice of one polytope (excluding the empty face; the
/// improper face, the polytope itself, is index 0).
pub struct FaceLattice {
    pub polytope: PolytopeId,
    pub m: usize,
    pub vertices: Vec<RatVec>,
    pub inequalities: Arc<Vec<Inequality>>,
    pub facet_masks: Vec<Mask>,
    pub faces: Vec<FaceData>,
    index: MaskMap<usize>,
    /// S_n orbit class representative (root face index) per face.
    sn_class: Vec<usize>,
}

impl FaceLattice {
    pub fn build(id: PolytopeId, m: usize) -> Result<FaceLattice> {
        let vertices = vertices_cached(id, m)?.as_ref().clone();
        if vertices.len() > 64 {
            return Err(Error::Unsupported("more than 64 vertices".into()));
        }
        let inequalities = inequalities_cached(id, m)?;
        let facet_masks: Vec<Mask> = inequalities
            .iter()
            .map(|ineq| {
                let mut mask = 0u64;
                for (i, v) in vertices.iter().enumerate() {
                    if ineq.tight(v) {
                        mask |= 1 << i;
                    }
                }
                mask
            })
            .collect();

        let full: Mask = if vertices.len() == 64 {
            !0
        } else {
            (1u64 << vertices.len()) - 1
        };
        let mut index: MaskMap<usize> = MaskMap::default();
        let mut masks: Vec<Mask> = Vec::new();
        let push = |mask: Mask, index: &mut MaskMap<usize>, masks: &mut Vec<Mask>| {
            if mask != 0 && !index.contains_key(&mask) {
                index.insert(mask, masks.len());
                masks.push(mask);
            }
        };
        push(full, &mut index, &mut masks);
        let mut head = 0;
        while head < masks.len() {
            let f = masks[head];
            head += 1;
            for &g in &facet_masks {
                push(f & g, &mut index, &mut masks);
            }
        }

        let faces: Vec<FaceData> = masks
            .iter()
            .map(|&mask| FaceData {
                mask,
                dim: mask_dim(&vertices, mask),
            })
            .collect();

        let mut lattice = FaceLattice {
            polytope: id,
            m,
            vertices,
            inequalities,
            facet_masks,
            faces,
            index,
            sn_class: Vec::new(),
        };
        lattice.sn_class = lattice.compute_sn_classes();
        Ok(lattice)
    }

    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    pub fn face_index(&self, mask: Mask) -> Option<usize> {
        self.index.get(&mask).copied()
    }

    pub fn mask_of_vertices(&self, verts: &[RatVec]) -> Option<Mask> {
        let mut mask = 0u64;
        for v in verts {
            let i = self.vertices.binary_search(v).ok()?;
            mask |= 1 << i;
        }
        Some(mask)
    }

    pub fn vertices_of_mask(&self, mask: Mask) -> Vec<RatVec> {
        self.vertices
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, v)| v.clone())
            .collect()
    }

    /// Canonical descriptor (maximal tight set) for a face of the lattice.
    pub fn descriptor(&self, face: usize) -> FaceDescriptor {
        let mask = self.faces[face].mask;
        let tight: Vec<usize> = self
            .facet_masks
            .iter()
            .enumerate()
            .filter(|(_, &g)| g & mask == mask)
            .map(|(i, _)| i)
            .collect();
        FaceDescriptor {
            polytope: self.polytope,
            m: self.m,
            tight,
            vertices: self.vertices_of_mask(mask),
            dim: self.faces[face].dim,
        }
    }

    pub fn index_of_descriptor(&self, face: &FaceDescriptor) -> Result<usize> {
        let mask = self
            .mask_of_vertices(&face.vertices)
            .ok_or_else(|| Error::Unsupported("unknown vertex in face".into()))?;
        self.face_index(mask)
            .ok_or_else(|| Error::Unsupported("vertex set is not a face".into()))
    }

    /// Vertex-index permutation induced by a coordinate permutation
    /// (`perm[i]` = new slot of coordinate `i`).
    fn vertex_perm_of_coordinate_perm(&self, perm: &[usize]) -> Vec<usize> {
        self.vertices
            .iter()
            .map(|v| {
                let image = v.permute(perm);
                self.vertices
                    .binary_search(&image)
                    .expect("coordinate permutation must map vertices to vertices")
            })
            .collect()
    }

    fn apply_vertex_perm(mask: Mask, perm: &[usize]) -> Mask {
        let mut out = 0u64;
        let mut rest = mask;
        while rest != 0 {
            let i = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            out |= 1 << perm[i];
        }
        out
    }

    fn compute_sn_classes(&self) -> Vec<usize> {
        let n = self.vertices[0].len();
        let mut parent: Vec<usize> = (0..self.faces.len()).collect();
        fn find(parent: &mut Vec<usize>, mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for k in 0..n - 1 {
            let mut perm: Vec<usize> = (0..n).collect();
            perm.swap(k, k + 1);
            let vperm = self.vertex_perm_of_coordinate_perm(&perm);
            for f in 0..self.faces.len() {
                let image = Self::apply_vertex_perm(self.faces[f].mask, &vperm);
                let g = self
                    .face_index(image)
                    .expect("coordinate permutation must map faces to faces");
                let (a, b) = (find(&mut parent, f), find(&mut parent, g));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
        (0..self.faces.len())
            .map(|f| find(&mut parent, f))
            .collect()
    }

    /// Representative face index of the coordinate-permutation class.
    pub fn sn_class_of(&self, face: usize) -> usize {
        self.sn_class[face]
    }

    /// All class representatives, sorted by (dim, representative index).
    pub fn sn_class_representatives(&self) -> Vec<usize> {
        let mut reps: Vec<usize> = self
            .sn_class
            .iter()
            .copied()
            .collect::<std::collections::BTreeSet<_>>()
            .into_iter()
            .collect();
        reps.sort_by_key(|&r| (self.faces[r].dim, r));
        reps
    }

    pub fn class_size(&self, rep: usize) -> usize {
        self.sn_class.iter().filter(|&&c| c == rep).count()
    }
}

fn mask_dim(vertices: &[RatVec], mask: Mask) -> usize {
    let verts: Vec<&RatVec> = vertices
        .iter()
        .enumerate()
        .filter(|(i, _)| mask >> i & 1 == 1)
        .map(|(_, v)| v)
        .collect();
    if verts.len() <= 1 {
        return 0;
    }
    // doubled coordinates are small integers; exact integer rank
    let ncols = verts[0].len();
    let base: Vec<i64> = doubled(verts[0]);
    let rows: Vec<Vec<i64>> = verts[1..]
        .iter()
        .map(|v| {
            doubled(v)
                .iter()
                .zip(&base)
                .map(|(a, b)| a - b)
                .collect::<Vec<i64>>()
        })
        .collect();
    rank_int(rows, ncols)
}

fn doubled(v: &RatVec) -> Vec<i64> {
    v.coords()
        .iter()
        .map(|c| {
            let d = c * crate::rat::rat(2, 1);
            debug_assert!(d.is_integer());
            *d.numer()
        })
        .collect()
}

/// Rank by fraction-free (Bareiss) elimination; entries stay bounded by the
/// Hadamard bound of the tiny input coefficients.
fn rank_int(mut rows: Vec<Vec<i64>>, ncols: usize) -> usize {
    let mut rank = 0;
    let mut prev_pivot = 1i64;
    for col in 0..ncols {
        let Some(pivot_row) = (rank..rows.len()).find(|&r| rows[r][col] != 0) else {
            continue;
        };
        rows.swap(rank, pivot_row);
        let pivot = rows[rank][col];
        for r in rank + 1..rows.len() {
            for c in col + 1..ncols {
                rows[r][c] = (rows[r][c] * pivot - rows[r][col] * rows[rank][c]) / prev_pivot;
            }
            rows[r][col] = 0;
        }
        prev_pivot = pivot;
        rank += 1;
        if rank == rows.len() {
            break;
        }
    }
    rank
}

/// Cached face lattice.
pub fn lattice_cached(id: PolytopeId, m: usize) -> Result<Arc<FaceLattice>> {
    static CACHE: OnceLock<Mutex<HashMap<(PolytopeId, usize), Arc<FaceLattice>>>> =
        OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    {
        let guard = cache.lock().unwrap();
        if let Some(v) = guard.get(&(id, m)) {
            return Ok(v.clone());
        }
    }
    let fresh = Arc::new(FaceLattice::build(id, m)?);
    cache.lock().unwrap().insert((id, m), fresh.clone());
    Ok(fresh)
}

/// Vertex-index permutations of the 56 vertices of `P^(1)` induced by the
/// 126 reflections of R(E7), paired with their roots.
fn reflection_vertex_perms(lat: &FaceLattice) -> Result<Vec<(RatVec, Vec<usize>)>> {
    if lat.polytope != PolytopeId::P || lat.m != 1 {
        return Err(Error::Unsupported(
            "Weyl orbits are defined on P with m = 1".into(),
        ));
    }
    let mut out = Vec::new();
    for root in enumerate_roots(RootSystemKind::E7) {
        let perm: Vec<usize> = lat
            .vertices
            .iter()
            .map(|v| {
                let image = reflect(&root, v).expect("roots have norm 2");
                lat.vertices
                    .binary_search(&image)
                    .expect("reflections permute the vertices")
            })
            .collect();
        out.push((root, perm));
    }
    Ok(out)
}

/// A W(E7) orbit of faces, each member carrying a Weyl word mapping the
/// base face onto it.
pub struct FaceOrbit {
    pub faces: Vec<FaceDescriptor>,
    pub words: Vec<WeylWord>,
    /// Number of distinct classes in the orbit up to coordinate permutations.
    pub class_count_mod_sn: usize,
}

/// Orbit of a face of `(P, m=1)` under the full reflection set, with words.
pub fn face_orbit(face: &FaceDescriptor) -> Result<FaceOrbit> {
    if face.polytope != PolytopeId::P || face.m != 1 {
        return Err(Error::Unsupported(
            "face orbits are defined on P with m = 1".into(),
        ));
    }
    let lat = lattice_cached(PolytopeId::P, 1)?;
    let base = lat.index_of_descriptor(face)?;
    let perms = reflection_vertex_perms(&lat)?;

    let mut words: MaskMap<Vec<RatVec>> = MaskMap::default();
    let base_mask = lat.faces[base].mask;
    words.insert(base_mask, Vec::new());
    let mut queue = vec![base_mask];
    let mut head = 0;
    while head < queue.len() {
        let mask = queue[head];
        head += 1;
        let path = words[&mask].clone();
        for (root, perm) in &perms {
            let image = FaceLattice::apply_vertex_perm(mask, perm);
            if !words.contains_key(&image) {
                let mut next = path.clone();
                next.push(root.clone());
                words.insert(image, next);
                queue.push(image);
            }
        }
    }

    let mut faces = Vec::new();
    let mut word_list = Vec::new();
    let mut classes = std::collections::BTreeSet::new();
    for mask in &queue {
        let idx = lat
            .face_index(*mask)
            .expect("Weyl images of faces are faces");
        classes.insert(lat.sn_class_of(idx));
        faces.push(lat.descriptor(idx));
        word_list.push(WeylWord::new(words[mask].clone())?);
    }
    Ok(FaceOrbit {
        faces,
        words: word_list,
        class_count_mod_sn: classes.len(),
    })
}

/// Pointwise stabilizer of the face's vertices inside W(E7), with its type.
///
/// The interior face is stabilized by everything: its orthogonal space is
/// zero, so every reflection acts trivially on the associated limit.
pub fn face_stabilizer(face: &FaceDescriptor) -> Result<(Vec<RatVec>, CoxeterType)> {
    require_p1(face)?;
    let roots = if face.is_interior() {
        enumerate_roots(RootSystemKind::E7)
    } else {
        stabilizer_roots(&face.vertices)
    };
    let ty = coxeter_type(&roots)?;
    Ok((roots, ty))
}

/// Type of the stabilizer of the shifted lattice `alpha + Lambda(E7)` for
/// generic `alpha` in the face: roots whose inner product is one and the
/// same integer on every vertex of the face.
pub fn affine_stabilizer_type(face: &FaceDescriptor) -> Result<CoxeterType> {
    require_p1(face)?;
    let roots = if face.is_interior() {
        enumerate_roots(RootSystemKind::E7)
    } else {
        affine_stabilizer_roots(&face.vertices)
    };
    coxeter_type(&roots)
}

fn require_p1(face: &FaceDescriptor) -> Result<()> {
    if face.polytope != PolytopeId::P || face.m != 1 {
        return Err(Error::Unsupported(
            "stabilizers are defined on P with m = 1".into(),
        ));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polytope::{classify_inside, vertex_v, vertex_w};
    use rand::prelude::*;
    use rand_chacha::ChaCha12Rng;

    #[test]
    fn hesse_lattice_counts() {
        let lat = lattice_cached(PolytopeId::P, 1).unwrap();
        assert_eq!(lat.vertices.len(), 56);
        // 702 facets: 576 simplices and 126 cross-polytopes
        let facets: Vec<&FaceData> = lat.faces.iter().filter(|f| f.dim == 6).collect();
        assert_eq!(facets.len(), 702);
        let simplicial = facets.iter().filter(|f| f.mask.count_ones() == 7).count();
        assert_eq!(simplicial, 576);
        assert_eq!(facets.len() - simplicial, 126);
        // vertices and edges
        assert_eq!(lat.faces.iter().filter(|f| f.dim == 0).count(), 56);
        assert_eq!(lat.faces.iter().filter(|f| f.dim == 1).count(), 756);
    }

    #[test]
    fn descriptor_agrees_with_point_classification() {
        let lat = lattice_cached(PolytopeId::P, 1).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        for _ in 0..40 {
            let f = rng.gen_range(0..lat.face_count());
            let desc = lat.descriptor(f);
            let centroid = desc.centroid();
            let direct = classify_inside(&centroid, PolytopeId::P, 1).unwrap();
            assert_eq!(direct.vertices, desc.vertices);
            assert_eq!(direct.dim, desc.dim);
            assert_eq!(direct.tight, desc.tight);
        }
    }

    #[test]
    fn worked_example_face_orbit_and_stabilizers() {
        let alpha = RatVec::parse("-1/4,0,0,1/4,1/4,1/2,1/2,3/4").unwrap();
        let face = classify_inside(&alpha, PolytopeId::P, 1).unwrap();
        let (roots, ty) = face_stabilizer(&face).unwrap();
        assert_eq!(roots.len(), 8);
        assert_eq!(ty.to_string(), "A2xA1");
        assert_eq!(ty.order(), 12);
        let affine = affine_stabilizer_type(&face).unwrap();
        assert_eq!(affine.to_string(), "A3xA1");
        assert_eq!(affine.order() / ty.order(), 4);
        let orbit = face_orbit(&face).unwrap();
        assert_eq!(orbit.class_count_mod_sn, 7);
        // every orbit member's word maps the base face onto it exactly
        for (desc, word) in orbit.faces.iter().zip(&orbit.words).take(25) {
            let mut image: Vec<RatVec> = face.vertices.iter().map(|v| word.act_vec(v)).collect();
            image.sort();
            assert_eq!(&image, &desc.vertices);
        }
    }

    #[test]
    fn vertex_orbit_is_all_56() {
        let v = vertex_v(8, &[0, 1]);
        let face = classify_inside(&v, PolytopeId::P, 1).unwrap();
        let orbit = face_orbit(&face).unwrap();
        assert_eq!(orbit.faces.len(), 56);
        assert_eq!(orbit.class_count_mod_sn, 2);
    }

    #[test]
    fn five_faces_split_in_two_orbits() {
        let lat = lattice_cached(PolytopeId::P, 1).unwrap();
        // one representative per S8 class of 5-dimensional simplicial faces
        let reps: Vec<usize> = lat
            .sn_class_representatives()
            .into_iter()
            .filter(|&r| lat.faces[r].dim == 5 && lat.faces[r].mask.count_ones() == 6)
            .collect();
        let mut orbit_ids = std::collections::BTreeSet::new();
        for r in reps {
            let orbit = face_orbit(&lat.descriptor(r)).unwrap();
            let mut members: Vec<Mask> = orbit
                .faces
                .iter()
                .map(|d| lat.mask_of_vertices(&d.vertices).unwrap())
                .collect();
            members.sort_unstable();
            orbit_ids.insert(members[0]);
        }
        assert_eq!(orbit_ids.len(), 2, "dimension 5 splits into two orbits");
    }

    #[test]
    fn interior_stabilizer_is_e7() {
        let alpha = RatVec::new(vec![crate::rat::rat(1, 4); 8]);
        let face = classify_inside(&alpha, PolytopeId::P, 1).unwrap();
        let (_, ty) = face_stabilizer(&face).unwrap();
        assert_eq!(ty.to_string(), "E7");
        assert_eq!(affine_stabilizer_type(&face).unwrap().to_string(), "E7");
    }

    #[test]
    fn weyl_images_of_faces_are_faces() {
        let lat = lattice_cached(PolytopeId::P, 1).unwrap();
        let e7 = enumerate_roots(RootSystemKind::E7);
        let mut rng = ChaCha12Rng::seed_from_u64(23);
        for _ in 0..30 {
            let f = rng.gen_range(0..lat.face_count());
            let desc = lat.descriptor(f);
            let word = WeylWord::new(
                (0..rng.gen_range(1..=4))
                    .map(|_| e7[rng.gen_range(0..e7.len())].clone())
                    .collect(),
            )
            .unwrap();
            let image: Vec<RatVec> = desc.vertices.iter().map(|v| word.act_vec(v)).collect();
            let mask = lat
                .mask_of_vertices(&image)
                .expect("vertices map to vertices");
            assert!(lat.face_index(mask).is_some(), "image is again a face");
        }
    }

    #[test]
    fn vertex_face_has_e6_stabilizer_and_e7_affine() {
        let v = vertex_w(8, 2, 5);
        let face = classify_inside(&v, PolytopeId::P, 1).unwrap();
        let (_, ty) = face_stabilizer(&face).unwrap();
        assert_eq!(ty.to_string(), "E6");
        assert_eq!(affine_stabilizer_type(&face).unwrap().to_string(), "E7");
    }
}
