use std::collections::HashSet;

use rand::Rng;
use serde::Serialize;

use super::{check_n, check_structure_n, fixtures, hyperplane_size, hyperplanes, line_count, lines, point_count, Line};
use crate::error::{Error, Result};
use crate::exec::Execution;

/// Largest n for which [`find_collineation`] runs its exhaustive search.
pub const MAX_SEARCH_N: u32 = 4;

/// An incidence-preserving relabelling of PG(n-1, 2).
///
/// `perm[p - 1]` is the label that canonical point `p` receives. When the
/// target labelling is the canonical one, the permutation is induced by an
/// invertible GF(2) matrix; in general it is such a matrix followed by a fixed
/// renaming of the points.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Collineation {
    n: u32,
    perm: Vec<usize>,
}

impl Collineation {
    pub fn identity(n: u32) -> Result<Self> {
        check_n(n)?;
        Ok(Collineation { n, perm: (1..=point_count(n)).collect() })
    }

    /// The permutation induced by the matrix whose `b`-th column is the image
    /// of the basis vector `1 << b`.
    pub fn from_matrix(n: u32, columns: &[usize]) -> Result<Self> {
        check_n(n)?;
        Error::check_len(n as usize, columns.len())?;
        let d = point_count(n);
        let perm: Vec<usize> = (1..=d)
            .map(|p| {
                (0..n as usize).filter(|&b| p >> b & 1 == 1).fold(0, |acc, b| acc ^ columns[b])
            })
            .collect();
        let mut seen = vec![false; d + 1];
        for &q in &perm {
            if q == 0 || q > d || std::mem::replace(&mut seen[q], true) {
                return Err(Error::invalid("matrix is not invertible over GF(2)"));
            }
        }
        Ok(Collineation { n, perm })
    }

    /// A uniformly random element of GL(n, 2), drawn by rejection.
    pub fn random_linear<R: Rng + ?Sized>(n: u32, rng: &mut R) -> Result<Self> {
        check_n(n)?;
        let d = point_count(n);
        loop {
            let cols: Vec<usize> = (0..n).map(|_| rng.gen_range(1..=d)).collect();
            if let Ok(c) = Collineation::from_matrix(n, &cols) {
                return Ok(c);
            }
        }
    }

    /// Wraps an arbitrary bijection of `1..=2^n - 1`. Incidence is not checked.
    pub fn from_permutation(n: u32, perm: Vec<usize>) -> Result<Self> {
        check_n(n)?;
        let d = point_count(n);
        Error::check_len(d, perm.len())?;
        let mut seen = vec![false; d + 1];
        for &q in &perm {
            if q == 0 || q > d || std::mem::replace(&mut seen[q], true) {
                return Err(Error::invalid("not a permutation of the point labels"));
            }
        }
        Ok(Collineation { n, perm })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    pub fn apply(&self, p: usize) -> usize {
        self.perm[p - 1]
    }

    /// Images of the basis points `1, 2, 4, ...`.
    pub fn frame(&self) -> Vec<usize> {
        (0..self.n).map(|b| self.apply(1 << b)).collect()
    }

    pub fn map_line(&self, line: &Line) -> Line {
        let [p, q, r] = line.points();
        Line::new(self.apply(p), self.apply(q), self.apply(r)).expect("bijection keeps points distinct")
    }

    /// Image of a point set, sorted.
    pub fn map_points(&self, points: &[usize]) -> Vec<usize> {
        let mut out: Vec<usize> = points.iter().map(|&p| self.apply(p)).collect();
        out.sort_unstable();
        out
    }

    pub fn inverse(&self) -> Collineation {
        let mut inv = vec![0; self.perm.len()];
        for (i, &q) in self.perm.iter().enumerate() {
            inv[q - 1] = i + 1;
        }
        Collineation { n: self.n, perm: inv }
    }

    /// `self` followed by `other`.
    pub fn then(&self, other: &Collineation) -> Collineation {
        Collineation { n: self.n, perm: self.perm.iter().map(|&p| other.apply(p)).collect() }
    }

    /// Reorders a vector indexed by canonical labels into the target labelling:
    /// `out[apply(p) - 1] = x[p - 1]`.
    pub fn relabel_vector(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; x.len()];
        for (i, &v) in x.iter().enumerate() {
            out[self.perm[i] - 1] = v;
        }
        out
    }
}

/// Extends a frame (images of the basis points) through a "third point on the
/// line" table. Returns `None` when the table has a gap or the map is not
/// injective.
fn extend_frame(n: u32, frame: &[usize], third: &[usize]) -> Option<Vec<usize>> {
    let d = point_count(n);
    let mut perm = vec![0usize; d];
    let mut used = vec![false; d + 1];
    for p in 1..=d {
        let low = p & p.wrapping_neg();
        let rest = p ^ low;
        let image = if rest == 0 {
            frame[low.trailing_zeros() as usize]
        } else {
            let (x, y) = (perm[low - 1], perm[rest - 1]);
            third[(x - 1) * d + (y - 1)]
        };
        if image == 0 || std::mem::replace(&mut used[image], true) {
            return None;
        }
        perm[p - 1] = image;
    }
    Some(perm)
}

/// Exhaustive search over ordered frames. A frame together with the target's
/// line structure fixes the whole map, and frames of a genuine PG(n-1, 2) are
/// in bijection with GL(n, 2).
fn search_frames<F>(n: u32, third: &[usize], accept: F, exec: Execution) -> Option<Collineation>
where
    F: Fn(&[usize]) -> bool + Sync + Send,
{
    let d = point_count(n);
    let k = n as usize;

    fn dfs<F: Fn(&[usize]) -> bool>(
        n: u32,
        d: usize,
        k: usize,
        frame: &mut Vec<usize>,
        third: &[usize],
        accept: &F,
    ) -> Option<Vec<usize>> {
        if frame.len() == k {
            return extend_frame(n, frame, third).filter(|perm| accept(perm));
        }
        for cand in 1..=d {
            if frame.contains(&cand) {
                continue;
            }
            frame.push(cand);
            if let Some(found) = dfs(n, d, k, frame, third, accept) {
                return Some(found);
            }
            frame.pop();
        }
        None
    }

    exec.find_map_first(d, |first| {
        let mut frame = Vec::with_capacity(k);
        frame.push(first + 1);
        dfs(n, d, k, &mut frame, third, &accept)
    })
    .map(|perm| Collineation { n, perm })
}

fn check_search_n(n: u32) -> Result<()> {
    check_structure_n(n)?;
    if n > MAX_SEARCH_N {
        return Err(Error::Unsupported(format!(
            "collineation search is limited to n <= {MAX_SEARCH_N} (got n = {n})"
        )));
    }
    Ok(())
}

fn check_labels(d: usize, labels: impl IntoIterator<Item = usize>) -> Result<()> {
    for p in labels {
        if p == 0 || p > d {
            return Err(Error::invalid(format!("label {p} outside 1..={d}")));
        }
    }
    Ok(())
}

/// Finds a relabelling that carries the canonical line set onto `target`.
///
/// `Ok(None)` means no incidence-preserving bijection exists, which includes
/// targets that are not the line set of a projective space at all.
pub fn find_collineation(n: u32, target: &[Line]) -> Result<Option<Collineation>> {
    find_collineation_with(n, target, Execution::default())
}

pub fn find_collineation_with(n: u32, target: &[Line], exec: Execution) -> Result<Option<Collineation>> {
    check_search_n(n)?;
    let expected = line_count(n);
    if target.len() != expected {
        return Err(Error::invalid(format!(
            "PG({}, 2) has {expected} lines, target has {}",
            n - 1,
            target.len()
        )));
    }
    let d = point_count(n);
    check_labels(d, target.iter().flat_map(|l| l.points()))?;

    let mut third = vec![0usize; d * d];
    for line in target {
        let [a, b, c] = line.points();
        for (x, y, z) in [(a, b, c), (a, c, b), (b, c, a)] {
            for (u, v) in [(x, y), (y, x)] {
                let slot = &mut third[(u - 1) * d + (v - 1)];
                if *slot != 0 && *slot != z {
                    // Two target lines share a pair of points.
                    return Ok(None);
                }
                *slot = z;
            }
        }
    }

    let target_set: HashSet<[usize; 3]> = target.iter().map(Line::points).collect();
    let canonical = lines(n)?;
    let accept = |perm: &[usize]| {
        canonical.iter().all(|l| {
            let [p, q, r] = l.points();
            let mut img = [perm[p - 1], perm[q - 1], perm[r - 1]];
            img.sort_unstable();
            target_set.contains(&img)
        })
    };
    Ok(search_frames(n, &third, accept, exec))
}

/// Finds a relabelling that carries the canonical hyperplanes onto `target`,
/// each target block read as an unordered point set.
pub fn find_hyperplane_collineation(n: u32, target: &[Vec<usize>]) -> Result<Option<Collineation>> {
    find_hyperplane_collineation_with(n, target, Execution::default())
}

pub fn find_hyperplane_collineation_with(
    n: u32,
    target: &[Vec<usize>],
    exec: Execution,
) -> Result<Option<Collineation>> {
    check_search_n(n)?;
    let d = point_count(n);
    if target.len() != d {
        return Err(Error::invalid(format!("PG({}, 2) has {d} hyperplanes, target has {}", n - 1, target.len())));
    }
    let size = hyperplane_size(n);
    if let Some(bad) = target.iter().find(|h| h.len() != size) {
        return Err(Error::invalid(format!("hyperplane {bad:?} should have {size} points")));
    }
    check_labels(d, target.iter().flatten().copied())?;

    // d <= 15 here, so a u32 mask holds a point set.
    let masks: Vec<u32> = target.iter().map(|h| h.iter().fold(0, |m, &p| m | 1 << (p - 1))).collect();
    let all = (1u32 << d) - 1;
    let mut third = vec![0usize; d * d];
    for x in 1..=d {
        for y in 1..=d {
            if x == y {
                continue;
            }
            let pair = 1 << (x - 1) | 1 << (y - 1);
            let span = masks.iter().filter(|&&m| m & pair == pair).fold(all, |acc, &m| acc & m) & !pair;
            if span.count_ones() == 1 {
                third[(x - 1) * d + (y - 1)] = span.trailing_zeros() as usize + 1;
            }
        }
    }

    let target_set: HashSet<u32> = masks.into_iter().collect();
    let canonical: Vec<Vec<usize>> = hyperplanes(n)?.into_iter().map(|h| h.points).collect();
    let accept = |perm: &[usize]| {
        canonical
            .iter()
            .all(|h| target_set.contains(&h.iter().fold(0u32, |m, &p| m | 1 << (perm[p - 1] - 1))))
    };
    Ok(search_frames(n, &third, accept, exec))
}

/// The relabelling from canonical labels to the labels used in the printed
/// equations: identity for n = 2, the seven-point plane's lines for n = 3 and
/// the fifteen seven-point planes for n = 4.
pub fn paper_labelling(n: u32) -> Result<Collineation> {
    let found = match n {
        2 => Some(Collineation::identity(2)?),
        3 => {
            let target: Vec<Line> = fixtures::FANO_LINES
                .iter()
                .map(|&[p, q, r]| Line::new(p, q, r))
                .collect::<Result<_>>()?;
            find_collineation(3, &target)?
        }
        4 => find_hyperplane_collineation(4, &fixtures::paper_fixture_15())?,
        _ => return Err(Error::Unsupported(format!("no reference labelling for n = {n}"))),
    };
    found.ok_or_else(|| Error::Unsupported(format!("reference labelling for n = {n} is not a projective labelling")))
}

/// True when every canonical line is carried onto an XOR-closed triple, i.e.
/// the relabelling is an automorphism of the canonical structure.
pub fn is_canonical_automorphism(c: &Collineation) -> Result<bool> {
    Ok(lines(c.n())?.iter().all(|l| c.map_line(l).is_xor_closed()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn canonical(n: u32) -> Vec<Line> {
        lines(n).unwrap()
    }

    #[test]
    fn identity_for_canonical_target() {
        for exec in [Execution::Sequential, Execution::Parallel] {
            let c = find_collineation_with(3, &canonical(3), exec).unwrap().unwrap();
            assert_eq!(c, Collineation::identity(3).unwrap());
        }
    }

    #[test]
    fn fano_lines_are_reachable() {
        let c = paper_labelling(3).unwrap();
        let mapped: HashSet<[usize; 3]> = canonical(3).iter().map(|l| c.map_line(l).points()).collect();
        let target: HashSet<[usize; 3]> = fixtures::FANO_LINES.iter().copied().collect();
        assert_eq!(mapped, target);
    }

    #[test]
    fn non_projective_target_is_not_found() {
        let bogus: Vec<Line> = [[1, 2, 3], [1, 2, 4], [1, 2, 5], [1, 2, 6], [1, 2, 7], [3, 4, 5], [5, 6, 7]]
            .iter()
            .map(|&[a, b, c]| Line::new(a, b, c).unwrap())
            .collect();
        assert_eq!(find_collineation(3, &bogus).unwrap(), None);

        // Well-formed pairwise but not a Fano plane: repeat one line.
        let mut dup = canonical(3);
        dup[6] = dup[0];
        assert_eq!(find_collineation(3, &dup).unwrap(), None);
    }

    #[test]
    fn wrong_line_count_is_rejected() {
        let short = &canonical(3)[..6];
        assert!(matches!(find_collineation(3, short), Err(Error::InvalidParameter(_))));
        let bad_label = vec![Line::new(1, 2, 9).unwrap(); 7];
        assert!(matches!(find_collineation(3, &bad_label), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn large_n_is_unsupported() {
        assert!(matches!(find_collineation(5, &canonical(5)), Err(Error::Unsupported(_))));
    }

    #[test]
    fn linear_maps_preserve_lines() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in 2..=6 {
            for _ in 0..20 {
                let g = Collineation::random_linear(n, &mut rng).unwrap();
                assert!(is_canonical_automorphism(&g).unwrap());
                let h = Collineation::random_linear(n, &mut rng).unwrap();
                assert!(is_canonical_automorphism(&g.then(&h)).unwrap());
                assert_eq!(g.then(&g.inverse()), Collineation::identity(n).unwrap());
            }
        }
    }

    #[test]
    fn singular_matrix_rejected() {
        assert!(Collineation::from_matrix(3, &[1, 2, 3]).is_err());
        assert!(Collineation::from_matrix(3, &[1, 2, 4]).is_ok());
    }

    #[test]
    fn search_recovers_a_random_relabelling() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let g = Collineation::random_linear(4, &mut rng).unwrap();
        let target: Vec<Line> = canonical(4).iter().map(|l| g.map_line(l)).collect();
        let found = find_collineation(4, &target).unwrap().unwrap();
        let got: HashSet<_> = canonical(4).iter().map(|l| found.map_line(l)).collect();
        let want: HashSet<_> = target.into_iter().collect();
        assert_eq!(got, want);
    }

    #[test]
    fn hyperplane_search_handles_canonical_target() {
        let target: Vec<Vec<usize>> = hyperplanes(4).unwrap().into_iter().map(|h| h.points).collect();
        let c = find_hyperplane_collineation(4, &target).unwrap().unwrap();
        assert_eq!(c, Collineation::identity(4).unwrap());
        assert!(matches!(
            find_hyperplane_collineation(4, &target[..14]),
            Err(Error::InvalidParameter(_))
        ));
    }
}
