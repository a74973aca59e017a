//! Reference labellings transcribed from the published equations.
//!
//! These are inputs for certification tests only; nothing in the crate uses
//! them as its internal convention. Labels are 1-based.

use super::Hyperplane;

/// Homogeneous coordinates `(z_0, z_1, z_2)` of the seven points `e_1..e_7`.
pub const FANO_COORDS: [[u8; 3]; 7] =
    [[0, 0, 1], [0, 1, 0], [1, 0, 0], [1, 1, 1], [1, 1, 0], [1, 0, 1], [0, 1, 1]];

/// Lines of the seven-point plane, one per nonzero octonion structure
/// constant `c_127, c_631, c_541, c_532, c_246, c_734, c_567`.
pub const FANO_LINES: [[usize; 3]; 7] =
    [[1, 2, 7], [1, 3, 6], [1, 4, 5], [2, 3, 5], [2, 4, 6], [3, 4, 7], [5, 6, 7]];

/// The printed seven-dimensional equations: `FANO_EQUATIONS[i - 1]` lists the
/// products in `d(omega_i)/dt`, in printed order.
pub const FANO_EQUATIONS: [[(usize, usize); 3]; 7] = [
    [(2, 7), (6, 3), (5, 4)],
    [(7, 1), (5, 3), (4, 6)],
    [(1, 6), (2, 5), (4, 7)],
    [(1, 5), (6, 2), (7, 3)],
    [(4, 1), (3, 2), (6, 7)],
    [(3, 1), (2, 4), (7, 5)],
    [(1, 2), (3, 4), (5, 6)],
];

/// The printed seven-dimensional `a` variables: `a_i` is the sum of the four
/// listed `omega`s.
pub const FANO_A_SETS: [[usize; 4]; 7] = [
    [3, 4, 5, 6],
    [1, 2, 5, 6],
    [1, 3, 5, 7],
    [2, 4, 5, 7],
    [2, 3, 6, 7],
    [1, 4, 6, 7],
    [1, 2, 3, 4],
];

/// The fifteen seven-point planes of PG(3, 2), in printed bracket order.
pub const PG3_PLANES: [[usize; 7]; 15] = [
    [1, 2, 3, 4, 5, 6, 7],
    [1, 2, 8, 11, 10, 9, 7],
    [1, 3, 8, 13, 12, 9, 6],
    [2, 3, 8, 14, 12, 10, 5],
    [1, 2, 13, 14, 15, 12, 7],
    [1, 3, 14, 11, 10, 15, 6],
    [1, 4, 8, 14, 15, 9, 5],
    [1, 4, 13, 11, 10, 12, 5],
    [2, 3, 11, 13, 15, 9, 5],
    [2, 4, 8, 13, 15, 10, 6],
    [2, 4, 11, 14, 12, 9, 6],
    [3, 4, 8, 11, 15, 12, 7],
    [3, 4, 9, 10, 14, 13, 7],
    [5, 6, 8, 11, 13, 14, 7],
    [5, 6, 9, 10, 12, 15, 7],
];

/// The printed fifteen-dimensional equations, one row per `d(omega_i)/dt`.
pub const PG3_EQUATIONS: [[(usize, usize); 7]; 15] = [
    [(2, 7), (3, 6), (5, 4), (8, 9), (10, 11), (12, 13), (14, 15)],
    [(1, 7), (3, 5), (4, 6), (8, 10), (11, 9), (12, 14), (15, 13)],
    [(1, 6), (2, 5), (7, 4), (8, 12), (9, 13), (10, 14), (11, 15)],
    [(5, 1), (2, 6), (7, 3), (8, 15), (9, 14), (10, 13), (11, 12)],
    [(1, 4), (2, 3), (7, 6), (8, 14), (9, 15), (10, 12), (11, 13)],
    [(1, 3), (2, 4), (7, 5), (8, 13), (9, 12), (10, 15), (11, 14)],
    [(1, 2), (3, 4), (6, 5), (8, 11), (9, 10), (12, 15), (13, 14)],
    [(1, 9), (2, 10), (3, 12), (4, 15), (5, 14), (6, 13), (7, 11)],
    [(1, 8), (2, 11), (3, 13), (4, 14), (5, 15), (6, 12), (7, 10)],
    [(1, 11), (2, 8), (3, 14), (4, 13), (5, 12), (6, 15), (7, 9)],
    [(1, 10), (2, 9), (3, 15), (4, 12), (5, 13), (6, 14), (7, 8)],
    [(1, 13), (2, 14), (3, 8), (4, 11), (5, 10), (6, 9), (7, 15)],
    [(1, 12), (2, 15), (3, 9), (4, 10), (5, 11), (6, 8), (7, 14)],
    [(1, 15), (2, 12), (3, 10), (4, 9), (5, 8), (6, 11), (7, 13)],
    [(1, 14), (2, 13), (3, 11), (4, 8), (5, 9), (6, 10), (7, 12)],
];

/// The fifteen planes as point lists, bracket order preserved. Only the
/// unordered content is meaningful to the rest of the crate.
pub fn paper_fixture_15() -> Vec<Vec<usize>> {
    PG3_PLANES.iter().map(|p| p.to_vec()).collect()
}

/// The same planes as [`Hyperplane`] values with sorted points. The fixture
/// carries no normals, so `normal` holds the 1-based bracket position.
pub fn paper_fixture_15_hyperplanes() -> Vec<Hyperplane> {
    PG3_PLANES
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let mut points = p.to_vec();
            points.sort_unstable();
            Hyperplane { normal: i + 1, points }
        })
        .collect()
}
