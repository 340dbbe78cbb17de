//! Exact rational scalars and vectors.
//!
//! All lattice and polytope computations in this crate run on exact rational
//! arithmetic; floating point never enters coordinates. Magnitudes stay tiny
//! (coordinates are quarters and halves, Gaussian elimination on 8-wide
//! integer matrices), so 64-bit rationals are ample.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_rational::Rational64;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

pub type Rat = Rational64;

pub fn rat(num: i64, den: i64) -> Rat {
    Rational64::new(num, den)
}

/// Exact rational vector; houses polytope points, roots and vertices.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RatVec {
    coords: Vec<Rat>,
}

impl RatVec {
    pub fn new(coords: Vec<Rat>) -> Self {
        RatVec { coords }
    }

    pub fn from_ints(coords: &[i64]) -> Self {
        RatVec {
            coords: coords.iter().map(|&c| Rat::from_integer(c)).collect(),
        }
    }

    /// Vector with `2n` in every slot interpreted as halves: `coords[i] = h[i]/2`.
    pub fn from_halves(halves: &[i64]) -> Self {
        RatVec {
            coords: halves.iter().map(|&h| rat(h, 2)).collect(),
        }
    }

    pub fn zeros(len: usize) -> Self {
        RatVec {
            coords: vec![Rat::zero(); len],
        }
    }

    /// Standard basis vector `e_i`.
    pub fn basis(len: usize, i: usize) -> Self {
        let mut v = Self::zeros(len);
        v.coords[i] = Rat::one();
        v
    }

    /// The half-sum vector `(1/2, ..., 1/2)`.
    pub fn rho(len: usize) -> Self {
        RatVec {
            coords: vec![rat(1, 2); len],
        }
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn coords(&self) -> &[Rat] {
        &self.coords
    }

    pub fn get(&self, i: usize) -> Rat {
        self.coords[i]
    }

    pub fn set(&mut self, i: usize, v: Rat) {
        self.coords[i] = v;
    }

    pub fn dot(&self, other: &RatVec) -> Rat {
        debug_assert_eq!(self.len(), other.len());
        self.coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| a * b)
            .sum()
    }

    pub fn norm2(&self) -> Rat {
        self.dot(self)
    }

    pub fn sum(&self) -> Rat {
        self.coords.iter().copied().sum()
    }

    pub fn scale(&self, s: Rat) -> RatVec {
        RatVec {
            coords: self.coords.iter().map(|c| c * s).collect(),
        }
    }

    /// Applies a coordinate permutation: `result[perm[i]] = self[i]`.
    pub fn permute(&self, perm: &[usize]) -> RatVec {
        let mut out = vec![Rat::zero(); self.len()];
        for (i, &p) in perm.iter().enumerate() {
            out[p] = self.coords[i];
        }
        RatVec { coords: out }
    }

    /// True when every coordinate is an integer.
    pub fn is_integral(&self) -> bool {
        self.coords.iter().all(|c| c.is_integer())
    }

    /// True when every coordinate lies in `Z + 1/2`.
    pub fn is_half_integral(&self) -> bool {
        self.coords.iter().all(|c| (c * rat(2, 1)).is_integer() && !c.is_integer())
    }

    /// Parses a comma-separated list of exact rationals such as `-1/4,0,1/2`.
    pub fn parse(text: &str) -> Result<RatVec> {
        let mut coords = Vec::new();
        for part in text.split(',') {
            let part = part.trim();
            if part.is_empty() {
                return Err(Error::Parse(format!("empty coordinate in {text:?}")));
            }
            coords.push(parse_rat(part)?);
        }
        Ok(RatVec { coords })
    }
}

pub fn parse_rat(text: &str) -> Result<Rat> {
    let (num, den) = match text.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (text, "1"),
    };
    let n: i64 = num
        .parse()
        .map_err(|_| Error::Parse(format!("bad numerator in {text:?}")))?;
    let d: i64 = den
        .parse()
        .map_err(|_| Error::Parse(format!("bad denominator in {text:?}")))?;
    if d == 0 {
        return Err(Error::Parse(format!("zero denominator in {text:?}")));
    }
    Ok(rat(n, d))
}

impl fmt::Debug for RatVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for RatVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl Add for &RatVec {
    type Output = RatVec;
    fn add(self, other: &RatVec) -> RatVec {
        debug_assert_eq!(self.len(), other.len());
        RatVec {
            coords: self
                .coords
                .iter()
                .zip(&other.coords)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Sub for &RatVec {
    type Output = RatVec;
    fn sub(self, other: &RatVec) -> RatVec {
        debug_assert_eq!(self.len(), other.len());
        RatVec {
            coords: self
                .coords
                .iter()
                .zip(&other.coords)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl Neg for &RatVec {
    type Output = RatVec;
    fn neg(self) -> RatVec {
        RatVec {
            coords: self.coords.iter().map(|c| -c).collect(),
        }
    }
}

impl Mul<Rat> for &RatVec {
    type Output = RatVec;
    fn mul(self, s: Rat) -> RatVec {
        self.scale(s)
    }
}

/// Affine dimension of a set of rational points (dimension of the spanned
/// affine subspace), computed by exact Gaussian elimination on differences.
pub fn affine_dim(points: &[RatVec]) -> usize {
    if points.len() <= 1 {
        return 0;
    }
    let base = &points[0];
    let rows: Vec<RatVec> = points[1..].iter().map(|p| p - base).collect();
    rank(&rows)
}

/// Rank of a set of rational vectors by fraction-free elimination.
pub fn rank(rows: &[RatVec]) -> usize {
    if rows.is_empty() {
        return 0;
    }
    let ncols = rows[0].len();
    let mut mat: Vec<Vec<Rat>> = rows.iter().map(|r| r.coords.clone()).collect();
    let mut rank = 0;
    for col in 0..ncols {
        let pivot = (rank..mat.len()).find(|&r| !mat[r][col].is_zero());
        let Some(pivot) = pivot else { continue };
        mat.swap(rank, pivot);
        let inv = mat[rank][col].recip();
        for r in rank + 1..mat.len() {
            if !mat[r][col].is_zero() {
                let factor = mat[r][col] * inv;
                for c in col..ncols {
                    let sub = factor * mat[rank][c];
                    mat[r][c] = mat[r][c] - sub;
                }
            }
        }
        rank += 1;
        if rank == mat.len() {
            break;
        }
    }
    rank
}

/// Clears denominators and divides by the gcd, preserving the sign.
pub fn primitive_integer_form(v: &RatVec) -> Vec<i64> {
    let mut lcm: i64 = 1;
    for c in v.coords() {
        lcm = lcm * c.denom() / gcd(lcm, *c.denom());
    }
    let ints: Vec<i64> = v
        .coords()
        .iter()
        .map(|c| c.numer() * (lcm / c.denom()))
        .collect();
    let mut g = 0i64;
    for &x in &ints {
        g = gcd(g, x.abs());
    }
    if g <= 1 {
        ints
    } else {
        ints.iter().map(|&x| x / g).collect()
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dot_and_norm_are_exact() {
        let rho = RatVec::rho(8);
        assert_eq!(rho.norm2(), rat(2, 1));
        let v = RatVec::from_ints(&[1, 1, 0, 0, 0, 0, 0, 0]);
        assert_eq!(v.dot(&rho), Rat::one());
    }

    #[test]
    fn parse_round_trips() {
        let v = RatVec::parse("-1/4,0,0,1/4,1/4,1/2,1/2,3/4").unwrap();
        assert_eq!(v.sum(), rat(2, 1));
        assert_eq!(v.get(0), rat(-1, 4));
        assert!(RatVec::parse("1,,2").is_err());
        assert!(RatVec::parse("1/0").is_err());
    }

    #[test]
    fn affine_dim_of_simplex() {
        let pts = vec![
            RatVec::from_ints(&[0, 0, 0]),
            RatVec::from_ints(&[1, 0, 0]),
            RatVec::from_ints(&[0, 1, 0]),
        ];
        assert_eq!(affine_dim(&pts), 2);
        assert_eq!(affine_dim(&pts[..1]), 0);
    }

    #[test]
    fn permute_moves_coordinates() {
        let v = RatVec::from_ints(&[10, 20, 30]);
        // entry i goes to slot perm[i]
        let w = v.permute(&[2, 0, 1]);
        assert_eq!(w.coords(), &[rat(20, 1), rat(30, 1), rat(10, 1)]);
    }

    #[test]
    fn primitive_form_clears_denominators() {
        let v = RatVec::parse("1/2,-1/2,1/2,0").unwrap();
        assert_eq!(primitive_integer_form(&v), vec![1, -1, 1, 0]);
        let w = RatVec::parse("2/3,4/3").unwrap();
        assert_eq!(primitive_integer_form(&w), vec![1, 2]);
    }
}
