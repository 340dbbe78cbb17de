//! Cartan-type identification of simply-laced root subsystems.
//!
//! Input is a finite set of norm-2 rational vectors closed under its own
//! reflections. A simple system is extracted with a generic linear
//! functional, and each connected component of the Dynkin diagram is matched
//! against the simply-laced shapes A/D/E.

use std::collections::HashSet;
use std::fmt;

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::rat::{rat, Rat, RatVec};
use crate::rootsys::reflect;

/// A product of irreducible simply-laced types, e.g. `A2xA1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CoxeterType {
    /// Sorted component list: (family letter, rank).
    pub components: Vec<(char, usize)>,
}

impl CoxeterType {
    pub fn trivial() -> Self {
        CoxeterType {
            components: Vec::new(),
        }
    }

    pub fn is_trivial(&self) -> bool {
        self.components.is_empty()
    }

    /// Order of the corresponding Weyl group.
    pub fn order(&self) -> u128 {
        self.components
            .iter()
            .map(|&(family, rank)| component_order(family, rank))
            .product()
    }
}

fn component_order(family: char, rank: usize) -> u128 {
    match (family, rank) {
        ('A', n) => factorial(n as u128 + 1),
        ('D', n) => (1u128 << (n - 1)) * factorial(n as u128),
        ('E', 6) => 51_840,
        ('E', 7) => 2_903_040,
        ('E', 8) => 696_729_600,
        _ => panic!("unsupported component {family}{rank}"),
    }
}

fn factorial(n: u128) -> u128 {
    (1..=n).product::<u128>().max(1)
}

impl fmt::Display for CoxeterType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.components.is_empty() {
            return write!(f, "1");
        }
        for (i, (family, rank)) in self.components.iter().enumerate() {
            if i > 0 {
                write!(f, "x")?;
            }
            write!(f, "{family}{rank}")?;
        }
        Ok(())
    }
}

/// Identifies the Cartan type of a closed root subsystem.
///
/// Fails with [`Error::NotClosedSubsystem`] when the set is not closed under
/// its own reflections or contains vectors of the wrong norm.
pub fn coxeter_type(roots: &[RatVec]) -> Result<CoxeterType> {
    if roots.is_empty() {
        return Ok(CoxeterType::trivial());
    }
    let dim = roots[0].len();
    let set: HashSet<&RatVec> = roots.iter().collect();
    for r in roots {
        if r.norm2() != rat(2, 1) {
            return Err(Error::NotClosedSubsystem);
        }
        if !set.contains(&-r) {
            return Err(Error::NotClosedSubsystem);
        }
        for s in roots {
            let image = reflect(r, s)?;
            if !set.contains(&image) {
                return Err(Error::NotClosedSubsystem);
            }
        }
    }

    let simple = simple_system(roots, dim);
    let comps = connected_components(&simple);
    let mut components = Vec::new();
    for comp in comps {
        components.push(identify_component(&simple, &comp)?);
    }
    components.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    Ok(CoxeterType { components })
}

/// Positive roots under a generic functional; simple = not a sum of two
/// positive roots. Balanced base-13 weights keep the functional injective on
/// differences of roots (half-integer entries stay below 13/2).
fn simple_system(roots: &[RatVec], dim: usize) -> Vec<RatVec> {
    let weights = RatVec::new((0..dim).map(|i| Rat::from_integer(13i64.pow((dim - 1 - i) as u32))).collect());
    let positive: Vec<RatVec> = roots
        .iter()
        .filter(|r| weights.dot(r).is_positive())
        .cloned()
        .collect();
    let pos_set: HashSet<&RatVec> = positive.iter().collect();
    positive
        .iter()
        .filter(|v| {
            !positive
                .iter()
                .any(|a| pos_set.contains(&(*v - a)) && !(*v - a).coords().iter().all(Zero::is_zero))
        })
        .cloned()
        .collect()
}

fn connected_components(simple: &[RatVec]) -> Vec<Vec<usize>> {
    let n = simple.len();
    let mut seen = vec![false; n];
    let mut comps = Vec::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        let mut comp = vec![start];
        seen[start] = true;
        let mut stack = vec![start];
        while let Some(i) = stack.pop() {
            for j in 0..n {
                if !seen[j] && !simple[i].dot(&simple[j]).is_zero() {
                    seen[j] = true;
                    comp.push(j);
                    stack.push(j);
                }
            }
        }
        comps.push(comp);
    }
    comps
}

fn identify_component(simple: &[RatVec], comp: &[usize]) -> Result<(char, usize)> {
    let n = comp.len();
    let degree = |i: usize| {
        comp.iter()
            .filter(|&&j| j != i && !simple[i].dot(&simple[j]).is_zero())
            .count()
    };
    let degrees: Vec<usize> = comp.iter().map(|&i| degree(i)).collect();
    if degrees.iter().any(|&d| d > 3) {
        return Err(Error::NotClosedSubsystem);
    }
    let branch_nodes = degrees.iter().filter(|&&d| d == 3).count();
    match branch_nodes {
        0 => Ok(('A', n)),
        1 => {
            let center = comp[degrees.iter().position(|&d| d == 3).unwrap()];
            let mut arms: Vec<usize> = Vec::new();
            for &start in comp {
                if start == center || simple[center].dot(&simple[start]).is_zero() {
                    continue;
                }
                // walk away from the center
                let mut len = 1;
                let mut prev = center;
                let mut cur = start;
                loop {
                    let next = comp.iter().copied().find(|&j| {
                        j != prev && j != cur && !simple[cur].dot(&simple[j]).is_zero()
                    });
                    match next {
                        Some(j) => {
                            prev = cur;
                            cur = j;
                            len += 1;
                        }
                        None => break,
                    }
                }
                arms.push(len);
            }
            arms.sort_unstable();
            match arms.as_slice() {
                [1, 1, k] => Ok(('D', k + 3)),
                [1, 2, 2] => Ok(('E', 6)),
                [1, 2, 3] => Ok(('E', 7)),
                [1, 2, 4] => Ok(('E', 8)),
                _ => Err(Error::NotClosedSubsystem),
            }
        }
        _ => Err(Error::NotClosedSubsystem),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rootsys::{enumerate_roots, root_eij, root_rho4, RootSystemKind};

    #[test]
    fn trivial_type_for_empty_set() {
        let t = coxeter_type(&[]).unwrap();
        assert!(t.is_trivial());
        assert_eq!(t.to_string(), "1");
        assert_eq!(t.order(), 1);
    }

    #[test]
    fn full_e7_is_identified() {
        let roots = enumerate_roots(RootSystemKind::E7);
        let t = coxeter_type(&roots).unwrap();
        assert_eq!(t.to_string(), "E7");
        assert_eq!(t.order(), 2_903_040);
    }

    #[test]
    fn worked_example_stabilizer_is_a2xa1() {
        let mut roots = vec![
            root_eij(3, 4),
            root_eij(4, 3),
            root_rho4([0, 3, 4, 7]),
            root_rho4([1, 2, 5, 6]),
            root_rho4([0, 3, 5, 6]),
            root_rho4([1, 2, 4, 7]),
            root_rho4([0, 4, 5, 6]),
            root_rho4([1, 2, 3, 7]),
        ];
        roots.sort();
        let t = coxeter_type(&roots).unwrap();
        assert_eq!(t.to_string(), "A2xA1");
        assert_eq!(t.order(), 12);
    }

    #[test]
    fn d_type_is_identified() {
        // {±e_i ± e_j : i<j<=3} is D4
        let mut roots = Vec::new();
        for i in 0..4 {
            for j in (i + 1)..4 {
                for (si, sj) in [(1i64, 1i64), (1, -1), (-1, 1), (-1, -1)] {
                    let mut c = [0i64; 8];
                    c[i] = si;
                    c[j] = sj;
                    roots.push(RatVec::from_ints(&c));
                }
            }
        }
        let t = coxeter_type(&roots).unwrap();
        assert_eq!(t.to_string(), "D4");
        assert_eq!(t.order(), 192);
    }

    #[test]
    fn a_products_sort_by_rank() {
        // A1 x A2 presented in mixed order
        let roots = vec![
            root_eij(0, 1),
            root_eij(1, 0),
            root_eij(2, 3),
            root_eij(3, 2),
            root_eij(3, 4),
            root_eij(4, 3),
            root_eij(2, 4),
            root_eij(4, 2),
        ];
        let t = coxeter_type(&roots).unwrap();
        assert_eq!(t.to_string(), "A2xA1");
    }

    #[test]
    fn open_set_is_rejected() {
        let roots = vec![root_eij(0, 1), root_eij(1, 0), root_eij(1, 2), root_eij(2, 1)];
        // missing the reflection image e0 - e2
        assert!(matches!(
            coxeter_type(&roots),
            Err(Error::NotClosedSubsystem)
        ));
    }
}
