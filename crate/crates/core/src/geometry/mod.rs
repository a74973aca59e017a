//! Points, lines and hyperplanes of PG(n-1, 2).
//!
//! A point is a nonzero n-bit vector and its label is that vector read as a
//! binary integer, so labels run over `1..=2^n - 1`. Homogeneous coordinates
//! `(z_0, ..., z_{n-1})` are written most-significant bit first: `z_{n-1}` is
//! the least significant bit, which makes `(0, ..., 0, 1)` the point with
//! label 1.
//!
//! Three distinct points are collinear iff their XOR vanishes. The hyperplane
//! with normal `v` is the set of points orthogonal to `v` under the GF(2) dot
//! product.

mod collineation;
mod export;
pub mod fixtures;

pub use collineation::{
    find_collineation, find_collineation_with, find_hyperplane_collineation,
    find_hyperplane_collineation_with, is_canonical_automorphism, paper_labelling, Collineation,
    MAX_SEARCH_N,
};
pub use export::{to_dot, GeometryDump, HyperplaneDump};

use serde::Serialize;

use crate::error::{Error, Result};

/// Smallest supported n (PG(1, 2) has three points).
pub const MIN_N: u32 = 2;
/// Largest n accepted by [`enumerate_points`].
pub const MAX_N: u32 = 16;
/// Largest n for which lines, hyperplanes and top systems are materialised.
/// The line count grows like 4^n / 6.
pub const MAX_STRUCTURE_N: u32 = 10;

pub(crate) fn check_n(n: u32) -> Result<()> {
    if (MIN_N..=MAX_N).contains(&n) {
        Ok(())
    } else {
        Err(Error::invalid(format!("n must lie in {MIN_N}..={MAX_N}, got {n}")))
    }
}

pub(crate) fn check_structure_n(n: u32) -> Result<()> {
    check_n(n)?;
    if n > MAX_STRUCTURE_N {
        return Err(Error::invalid(format!(
            "n = {n} is too large to materialise lines/hyperplanes (max {MAX_STRUCTURE_N})"
        )));
    }
    Ok(())
}

/// Number of points `2^n - 1`.
pub fn point_count(n: u32) -> usize {
    (1usize << n) - 1
}

/// Number of points on a hyperplane, and of lines through a point: `2^(n-1) - 1`.
pub fn hyperplane_size(n: u32) -> usize {
    (1usize << (n - 1)) - 1
}

/// Number of lines `(2^n - 1)(2^(n-1) - 1) / 3`.
pub fn line_count(n: u32) -> usize {
    point_count(n) * hyperplane_size(n) / 3
}

/// Recovers n from a dimension `d = 2^n - 1`.
pub fn n_from_dimension(d: usize) -> Result<u32> {
    let m = d + 1;
    if d >= 3 && m.is_power_of_two() {
        Ok(m.trailing_zeros())
    } else {
        Err(Error::invalid(format!("dimension {d} is not of the form 2^n - 1 with n >= 2")))
    }
}

/// GF(2) dot product of two bit vectors.
#[inline]
pub fn dot(u: usize, v: usize) -> bool {
    (u & v).count_ones() % 2 == 1
}

/// A point of PG(n-1, 2).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Gf2Point {
    n: u32,
    bits: usize,
}

impl Gf2Point {
    pub fn new(n: u32, index: usize) -> Result<Self> {
        check_n(n)?;
        if index == 0 || index > point_count(n) {
            return Err(Error::invalid(format!(
                "point index {index} outside 1..={} for n = {n}",
                point_count(n)
            )));
        }
        Ok(Gf2Point { n, bits: index })
    }

    pub fn n(self) -> u32 {
        self.n
    }

    /// Label in `1..=2^n - 1`; equal to the bits read as a binary number.
    pub fn index(self) -> usize {
        self.bits
    }

    pub fn bits(self) -> usize {
        self.bits
    }

    /// Homogeneous coordinates `(z_0, ..., z_{n-1})`.
    pub fn coords(self) -> Vec<u8> {
        (0..self.n).rev().map(|b| ((self.bits >> b) & 1) as u8).collect()
    }

    /// Coordinates as a string of `0`/`1`, `z_0` first.
    pub fn bit_string(self) -> String {
        self.coords().iter().map(|&c| if c == 1 { '1' } else { '0' }).collect()
    }

    pub fn from_coords(coords: &[u8]) -> Result<Self> {
        let n = coords.len() as u32;
        let mut bits = 0usize;
        for &c in coords {
            if c > 1 {
                return Err(Error::invalid(format!("coordinate {c} is not in GF(2)")));
            }
            bits = (bits << 1) | c as usize;
        }
        Gf2Point::new(n, bits)
    }

    /// Sum of two points; `None` when they coincide (the sum is the zero vector).
    pub fn add(self, other: Gf2Point) -> Option<Gf2Point> {
        let bits = self.bits ^ other.bits;
        (bits != 0).then_some(Gf2Point { n: self.n, bits })
    }
}

/// Three collinear points, stored sorted by label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct Line([usize; 3]);

impl Line {
    /// An unordered triple of distinct labels. Collinearity is not checked.
    pub fn new(p: usize, q: usize, r: usize) -> Result<Self> {
        let mut pts = [p, q, r];
        pts.sort_unstable();
        if pts[0] == 0 || pts[0] == pts[1] || pts[1] == pts[2] {
            return Err(Error::invalid(format!("line needs three distinct nonzero labels, got {p}, {q}, {r}")));
        }
        Ok(Line(pts))
    }

    pub fn points(&self) -> [usize; 3] {
        self.0
    }

    pub fn contains(&self, p: usize) -> bool {
        self.0.contains(&p)
    }

    /// The two other points when `p` is on the line, in increasing order.
    pub fn others(&self, p: usize) -> Option<(usize, usize)> {
        match self.0 {
            [a, b, c] if a == p => Some((b, c)),
            [a, b, c] if b == p => Some((a, c)),
            [a, b, c] if c == p => Some((a, b)),
            _ => None,
        }
    }

    /// `p xor q xor r == 0` under the canonical labelling.
    pub fn is_xor_closed(&self) -> bool {
        self.0[0] ^ self.0[1] ^ self.0[2] == 0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Hyperplane {
    pub normal: usize,
    /// Sorted labels of the points orthogonal to `normal`.
    pub points: Vec<usize>,
}

impl Hyperplane {
    pub fn contains(&self, p: usize) -> bool {
        self.points.binary_search(&p).is_ok()
    }
}

/// All `2^n - 1` points, sorted by label.
pub fn enumerate_points(n: u32) -> Result<Vec<Gf2Point>> {
    check_n(n)?;
    Ok((1..=point_count(n)).map(|bits| Gf2Point { n, bits }).collect())
}

/// All lines `{p, q, p ^ q}`, each sorted, in lexicographic order.
pub fn lines(n: u32) -> Result<Vec<Line>> {
    check_structure_n(n)?;
    let d = point_count(n);
    let mut out = Vec::with_capacity(line_count(n));
    for p in 1..=d {
        for q in p + 1..=d {
            let r = p ^ q;
            if r > q {
                out.push(Line([p, q, r]));
            }
        }
    }
    Ok(out)
}

/// For each label `i` (index `i - 1`), the `2^(n-1) - 1` pairs `(j, k)`,
/// `j < k`, such that `{i, j, k}` is a line. Pairs are sorted by `j`.
pub fn line_partners(n: u32) -> Result<Vec<Vec<(usize, usize)>>> {
    check_structure_n(n)?;
    let d = point_count(n);
    Ok((1..=d)
        .map(|i| {
            (1..=d)
                .filter_map(|j| {
                    let k = i ^ j;
                    (j != i && j < k).then_some((j, k))
                })
                .collect()
        })
        .collect())
}

/// One hyperplane per nonzero normal, ordered by normal.
pub fn hyperplanes(n: u32) -> Result<Vec<Hyperplane>> {
    check_structure_n(n)?;
    let d = point_count(n);
    Ok((1..=d)
        .map(|v| Hyperplane { normal: v, points: (1..=d).filter(|&p| !dot(v, p)).collect() })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn n2_points_match_homogeneous_coordinates() {
        let pts = enumerate_points(2).unwrap();
        let coords: Vec<_> = pts.iter().map(|p| p.coords()).collect();
        assert_eq!(coords, vec![vec![0, 1], vec![1, 0], vec![1, 1]]);
    }

    #[test]
    fn n3_first_point_is_001() {
        let pts = enumerate_points(3).unwrap();
        assert_eq!(pts.len(), 7);
        assert_eq!(pts[0].bit_string(), "001");
        assert_eq!(enumerate_points(4).unwrap().len(), 15);
    }

    #[test]
    fn rejects_out_of_range_n() {
        assert!(matches!(enumerate_points(1), Err(Error::InvalidParameter(_))));
        assert!(matches!(enumerate_points(17), Err(Error::InvalidParameter(_))));
        assert!(enumerate_points(16).is_ok());
        assert!(matches!(lines(11), Err(Error::InvalidParameter(_))));
        assert!(Gf2Point::new(2, 0).is_err());
        assert!(Gf2Point::new(2, 4).is_err());
    }

    #[test]
    fn coords_round_trip() {
        for p in enumerate_points(5).unwrap() {
            assert_eq!(Gf2Point::from_coords(&p.coords()).unwrap(), p);
        }
        assert!(Gf2Point::from_coords(&[0, 0, 0]).is_err());
    }

    #[test]
    fn n2_has_a_single_line() {
        assert_eq!(lines(2).unwrap(), vec![Line([1, 2, 3])]);
    }

    #[test]
    fn n3_lines_match_brute_force() {
        // Brute force over all triples, independent of the generator above.
        let mut brute = Vec::new();
        for p in 1..=7usize {
            for q in p + 1..=7 {
                for r in q + 1..=7 {
                    if p ^ q ^ r == 0 {
                        brute.push([p, q, r]);
                    }
                }
            }
        }
        let expected = vec![[1, 2, 3], [1, 4, 5], [1, 6, 7], [2, 4, 6], [2, 5, 7], [3, 4, 7], [3, 5, 6]];
        assert_eq!(brute, expected);
        let got: Vec<_> = lines(3).unwrap().iter().map(Line::points).collect();
        assert_eq!(got, expected);
    }

    #[test]
    fn each_pair_on_exactly_one_line() {
        for n in 2..=5 {
            let ls = lines(n).unwrap();
            assert_eq!(ls.len(), line_count(n));
            let d = point_count(n);
            for p in 1..=d {
                for q in p + 1..=d {
                    let c = ls.iter().filter(|l| l.contains(p) && l.contains(q)).count();
                    assert_eq!(c, 1, "n={n} pair ({p},{q})");
                }
            }
            assert!(ls.iter().all(Line::is_xor_closed));
        }
    }

    #[test]
    fn partners_partition_the_other_points() {
        for n in 2..=5 {
            let d = point_count(n);
            for (i0, pairs) in line_partners(n).unwrap().iter().enumerate() {
                let i = i0 + 1;
                assert_eq!(pairs.len(), hyperplane_size(n));
                let seen: HashSet<usize> = pairs.iter().flat_map(|&(j, k)| [j, k]).collect();
                assert_eq!(seen.len(), d - 1);
                assert!(!seen.contains(&i));
                assert!(pairs.iter().all(|&(j, k)| j < k && i ^ j ^ k == 0));
            }
        }
    }

    #[test]
    fn hyperplane_counts() {
        let h2 = hyperplanes(2).unwrap();
        assert_eq!(h2.len(), 3);
        assert!(h2.iter().all(|h| h.points.len() == 1));

        // n = 3: hyperplanes are exactly the Fano lines.
        let h3: HashSet<Vec<usize>> = hyperplanes(3).unwrap().into_iter().map(|h| h.points).collect();
        let l3: HashSet<Vec<usize>> = lines(3).unwrap().iter().map(|l| l.points().to_vec()).collect();
        assert_eq!(h3, l3);

        let h4 = hyperplanes(4).unwrap();
        assert_eq!(h4.len(), 15);
        assert!(h4.iter().all(|h| h.points.len() == 7));
    }

    #[test]
    fn line_others() {
        let l = Line::new(7, 1, 6).unwrap();
        assert_eq!(l.points(), [1, 6, 7]);
        assert_eq!(l.others(6), Some((1, 7)));
        assert_eq!(l.others(2), None);
        assert!(Line::new(1, 1, 2).is_err());
    }

    #[test]
    fn dimension_round_trip() {
        assert_eq!(n_from_dimension(3).unwrap(), 2);
        assert_eq!(n_from_dimension(15).unwrap(), 4);
        assert!(n_from_dimension(4).is_err());
        assert!(n_from_dimension(1).is_err());
    }
}
