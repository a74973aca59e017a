//! The (2^n - 1)-dimensional top and its `a`-coordinates.
//!
//! In `omega` coordinates every component evolves as
//!
//! ```text
//! d(omega_i)/dt = sum over lines {i, j, k} of omega_j * omega_k
//! ```
//!
//! with `2^(n-1) - 1` terms, one per line through `i`. The linear change
//! `a = A omega`, where row `v` of `A` sums the `2^(n-1)` components lying off
//! one hyperplane, turns the flow into `da_i/dt = a_i (S - a_i)` with
//! `S = sum(a) / 2^(n-1)`.
//!
//! Row `v` of the canonical `A` pairs with the hyperplane whose normal is `v`
//! with its coordinates reversed. That pairing keeps `A` symmetric and for
//! n = 2 gives `a_1 = omega_2 + omega_3`, `a_2 = omega_3 + omega_1`,
//! `a_3 = omega_1 + omega_2`.

mod integrator;
mod trajectory;

pub use integrator::{solve, IntegratorOptions, DEFAULT_BLOW_UP_THRESHOLD};
pub use trajectory::{Coordinates, IntegrationStats, Sample, Termination, Trajectory};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{self, check_structure_n, dot, paper_labelling, point_count, Collineation, Line};

/// Which form of the flow to integrate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RhsKind {
    Omega,
    A,
}

/// Reverses the low `n` bits of `v`.
fn reverse_bits(v: usize, n: u32) -> usize {
    (0..n).fold(0, |acc, b| acc | ((v >> b) & 1) << (n - 1 - b))
}

#[derive(Debug, Clone)]
pub struct TopSystem {
    n: u32,
    d: usize,
    /// Lines in `omega` labels.
    lines: Vec<Line>,
    /// Canonical lines, used on `a` indices.
    a_lines: Vec<Line>,
    /// Row-major `d x d` 0/1 matrix; row = `a` index, column = `omega` label.
    a_matrix: Vec<u8>,
    labelling: Option<Collineation>,
}

impl TopSystem {
    /// The system under the canonical (binary) labelling.
    pub fn new(n: u32) -> Result<Self> {
        check_structure_n(n)?;
        let d = point_count(n);
        let lines = geometry::lines(n)?;
        let mut a_matrix = vec![0u8; d * d];
        for v in 1..=d {
            let normal = reverse_bits(v, n);
            for p in 1..=d {
                a_matrix[(v - 1) * d + (p - 1)] = dot(normal, p) as u8;
            }
        }
        Ok(TopSystem { n, d, a_lines: lines.clone(), lines, a_matrix, labelling: None })
    }

    /// The same system with `omega` labels moved by `relabel`: canonical point
    /// `p` becomes label `relabel.apply(p)`. `a` indices are untouched.
    pub fn with_labelling(n: u32, relabel: &Collineation) -> Result<Self> {
        if relabel.n() != n {
            return Err(Error::invalid(format!("collineation is for n = {}, system for n = {n}", relabel.n())));
        }
        let base = TopSystem::new(n)?;
        let d = base.d;
        let lines = base.lines.iter().map(|l| relabel.map_line(l)).collect();
        let mut a_matrix = vec![0u8; d * d];
        for v in 0..d {
            for p in 1..=d {
                a_matrix[v * d + relabel.apply(p) - 1] = base.a_matrix[v * d + p - 1];
            }
        }
        Ok(TopSystem { lines, a_matrix, labelling: Some(relabel.clone()), ..base })
    }

    /// The system in the labelling of the printed equations (n <= 4).
    pub fn paper(n: u32) -> Result<Self> {
        TopSystem::with_labelling(n, &paper_labelling(n)?)
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn dimension(&self) -> usize {
        self.d
    }

    pub fn lines(&self) -> &[Line] {
        &self.lines
    }

    pub fn a_lines(&self) -> &[Line] {
        &self.a_lines
    }

    pub fn labelling(&self) -> Option<&Collineation> {
        self.labelling.as_ref()
    }

    /// `A[v][p]` for 1-based `a` index `v` and `omega` label `p`.
    pub fn a_entry(&self, v: usize, p: usize) -> u8 {
        self.a_matrix[(v - 1) * self.d + (p - 1)]
    }

    /// Row-major `A`.
    pub fn a_matrix(&self) -> &[u8] {
        &self.a_matrix
    }

    /// The `omega` labels summed into `a_v`.
    pub fn a_support(&self, v: usize) -> Vec<usize> {
        (1..=self.d).filter(|&p| self.a_entry(v, p) == 1).collect()
    }

    /// Products in `d(omega_i)/dt` as `(j, k)` label pairs with `j < k`.
    pub fn terms(&self, i: usize) -> Vec<(usize, usize)> {
        let mut out: Vec<_> = self.lines.iter().filter_map(|l| l.others(i)).collect();
        out.sort_unstable();
        out
    }

    /// Half the coefficient scale in `S`: `2^(n-1)`.
    pub fn half_weight(&self) -> f64 {
        (1u64 << (self.n - 1)) as f64
    }

    pub fn omega_rhs(&self, omega: &[f64]) -> Result<Vec<f64>> {
        Error::check_len(self.d, omega.len())?;
        let mut out = vec![0.0; self.d];
        self.omega_rhs_into(omega, &mut out);
        Ok(out)
    }

    /// Allocation-free form of [`TopSystem::omega_rhs`]; lengths are not checked.
    pub fn omega_rhs_into(&self, omega: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        for line in &self.lines {
            let [p, q, r] = line.points();
            let (x, y, z) = (omega[p - 1], omega[q - 1], omega[r - 1]);
            out[p - 1] += y * z;
            out[q - 1] += x * z;
            out[r - 1] += x * y;
        }
    }

    /// `a = A omega`.
    pub fn a_transform(&self, omega: &[f64]) -> Result<Vec<f64>> {
        Error::check_len(self.d, omega.len())?;
        Ok(self
            .a_matrix
            .chunks_exact(self.d)
            .map(|row| row.iter().zip(omega).filter(|(&m, _)| m == 1).map(|(_, &w)| w).sum())
            .collect())
    }

    /// Solves `A omega = a` using `A^T A = 2^(n-2) (I + J)`, which gives
    /// `omega = 2^-(n-2) (A^T a - sum(a) / 2)`.
    pub fn a_inverse(&self, a: &[f64]) -> Result<Vec<f64>> {
        Error::check_len(self.d, a.len())?;
        let d = self.d;
        let half_sum = a.iter().sum::<f64>() / 2.0;
        let scale = 1.0 / (1u64 << (self.n - 2)) as f64;
        Ok((0..d)
            .map(|p| {
                let at_a: f64 = (0..d).filter(|&v| self.a_matrix[v * d + p] == 1).map(|v| a[v]).sum();
                scale * (at_a - half_sum)
            })
            .collect())
    }

    pub fn a_rhs(&self, a: &[f64]) -> Result<Vec<f64>> {
        Error::check_len(self.d, a.len())?;
        let mut out = vec![0.0; self.d];
        self.a_rhs_into(a, &mut out);
        Ok(out)
    }

    pub fn a_rhs_into(&self, a: &[f64], out: &mut [f64]) {
        let s = a.iter().sum::<f64>() / self.half_weight();
        for (o, &x) in out.iter_mut().zip(a) {
            *o = x * (s - x);
        }
    }

    /// `S = sum(a) / 2^(n-1)`.
    pub fn s_value(&self, a: &[f64]) -> f64 {
        a.iter().sum::<f64>() / self.half_weight()
    }

    /// Integrates from `t = 0` to `t_end`.
    pub fn integrate(&self, kind: RhsKind, x0: &[f64], t_end: f64, opts: &IntegratorOptions) -> Result<Trajectory> {
        Error::check_len(self.d, x0.len())?;
        let (coords, traj) = match kind {
            RhsKind::Omega => (
                Coordinates::Omega,
                solve(|x: &[f64], out: &mut [f64]| {
                    self.omega_rhs_into(x, out);
                    Ok(())
                }, x0, t_end, opts)?,
            ),
            RhsKind::A => (
                Coordinates::A,
                solve(|x: &[f64], out: &mut [f64]| {
                    self.a_rhs_into(x, out);
                    Ok(())
                }, x0, t_end, opts)?,
            ),
        };
        Ok(Trajectory { coords, ..traj })
    }
}

/// Integration horizon that stays clear of the first pole for the given
/// initial data: `0.4 / ((2^(n-1) - 1) * max|omega_0|)`.
///
/// Every component obeys `|d(omega_i)/dt| <= (2^(n-1) - 1) max|omega|^2`, so the
/// sup-norm stays below `max|omega_0| / 0.6` up to this time.
pub fn guarded_horizon(n: u32, omega0: &[f64]) -> f64 {
    let max = omega0.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if max == 0.0 {
        return 1.0;
    }
    0.4 / (((1u64 << (n - 1)) - 1) as f64 * max)
}
