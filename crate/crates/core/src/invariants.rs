//! Conserved quantities of the `a`-flow.
//!
//! For strictly positive `a`,
//!
//! ```text
//! T    = (prod_k a_k)^(1 / (2^(n-1) - 1))
//! N_ij = T (a_i - a_j) / (a_i a_j)
//! ```
//!
//! are constant along the flow, and `N_ij = N_1j - N_1i`, so the `2^n - 2`
//! quantities `N_1j` carry everything. Multiplying the `N_jk` over the lines
//! through `i` gives the polynomial invariant
//! `gamma_i = a_i * prod (a_j - a_k)`, which needs no positivity and is
//! used wherever the state leaves the positive orthant.
//!
//! Indices into slices and matrices are 0-based; names in reports are 1-based.

use std::fmt::Write;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::dynamics::{Coordinates, TopSystem, Trajectory};
use crate::error::{Error, Result};
use crate::geometry::n_from_dimension;
use crate::SCHEMA_VERSION;

/// Initial values below this magnitude are tracked by absolute drift.
pub const ABSOLUTE_DRIFT_FLOOR: f64 = 1e-12;

fn check_positive(a: &[f64]) -> Result<()> {
    match a.iter().position(|&x| !(x > 0.0 && x.is_finite())) {
        Some(i) => Err(Error::Domain(format!("a_{} = {} is not strictly positive", i + 1, a[i]))),
        None => Ok(()),
    }
}

/// `2^(n-1) - 1` for a state of dimension `2^n - 1`.
fn root_order(d: usize) -> Result<f64> {
    let n = n_from_dimension(d)?;
    Ok(((1u64 << (n - 1)) - 1) as f64)
}

/// `T = (prod a_k)^(1 / (2^(n-1) - 1))` on the positive real branch.
pub fn big_t(a: &[f64]) -> Result<f64> {
    let m = root_order(a.len())?;
    check_positive(a)?;
    let prod: f64 = a.iter().product();
    if prod.is_normal() {
        Ok(if m == 1.0 { prod } else { prod.powf(1.0 / m) })
    } else {
        Ok((a.iter().map(|x| x.ln()).sum::<f64>() / m).exp())
    }
}

/// Dense antisymmetric `d x d` matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NMatrix {
    d: usize,
    data: Vec<f64>,
}

impl NMatrix {
    pub fn dimension(&self) -> usize {
        self.d
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.d + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.d..(i + 1) * self.d]
    }

    /// Column sums divided by `d`: `M_j = sum_i N_ij / d`.
    pub fn column_means(&self) -> Vec<f64> {
        (0..self.d).map(|j| (0..self.d).map(|i| self.get(i, j)).sum::<f64>() / self.d as f64).collect()
    }
}

pub fn n_matrix(a: &[f64]) -> Result<NMatrix> {
    let t = big_t(a)?;
    let d = a.len();
    let mut data = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..d {
            if i != j {
                data[i * d + j] = t * (a[i] - a[j]) / (a[i] * a[j]);
            }
        }
    }
    Ok(NMatrix { d, data })
}

/// `N_1j` for `j = 2..=d`: the `2^n - 2` independent integrals.
pub fn n_first_row(a: &[f64]) -> Result<Vec<f64>> {
    let t = big_t(a)?;
    Ok(a[1..].iter().map(|&aj| t * (a[0] - aj) / (a[0] * aj)).collect())
}

/// Pairs `(j, k)`, 0-based with `j < k`, on the lines through each `a` index.
fn gamma_pairs(system: &TopSystem) -> Vec<Vec<(usize, usize)>> {
    (1..=system.dimension())
        .map(|i| system.a_lines().iter().filter_map(|l| l.others(i)).map(|(j, k)| (j - 1, k - 1)).collect())
        .collect()
}

/// `gamma_i = a_i * prod over lines {i, j, k} of (a_j - a_k)`, `j < k`.
pub fn gamma(system: &TopSystem, a: &[f64]) -> Result<Vec<f64>> {
    Error::check_len(system.dimension(), a.len())?;
    Ok(gamma_pairs(system)
        .iter()
        .enumerate()
        .map(|(i, pairs)| pairs.iter().fold(a[i], |acc, &(j, k)| acc * (a[j] - a[k])))
        .collect())
}

/// `prod over lines {i, j, k} of N_jk`, which equals `gamma_i` when `a > 0`.
pub fn gamma_from_n(system: &TopSystem, a: &[f64]) -> Result<Vec<f64>> {
    Error::check_len(system.dimension(), a.len())?;
    let n = n_matrix(a)?;
    Ok(gamma_pairs(system).iter().map(|pairs| pairs.iter().map(|&(j, k)| n.get(j, k)).product()).collect())
}

/// All invariants at one state. `T` and `N` are present only when `a > 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvariantSet {
    pub t: Option<f64>,
    pub n: Option<NMatrix>,
    pub gamma: Vec<f64>,
}

impl InvariantSet {
    pub fn evaluate(system: &TopSystem, a: &[f64]) -> Result<Self> {
        let gamma = gamma(system, a)?;
        let (t, n) = match (big_t(a), n_matrix(a)) {
            (Ok(t), Ok(n)) => (Some(t), Some(n)),
            _ => (None, None),
        };
        Ok(InvariantSet { t, n, gamma })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftEntry {
    pub name: String,
    pub initial: f64,
    pub max_drift: f64,
    pub time_of_max: f64,
    /// `false` when the initial value is below [`ABSOLUTE_DRIFT_FLOOR`].
    pub relative: bool,
}

impl DriftEntry {
    pub(crate) fn new(name: String, initial: f64) -> Self {
        DriftEntry { name, initial, max_drift: 0.0, time_of_max: 0.0, relative: initial.abs() >= ABSOLUTE_DRIFT_FLOOR }
    }

    pub(crate) fn observe(&mut self, t: f64, value: f64) {
        let diff = (value - self.initial).abs();
        let drift = if self.relative { diff / self.initial.abs() } else { diff };
        // NaN compares false, so force it through.
        if drift > self.max_drift || drift.is_nan() && !self.max_drift.is_nan() {
            self.max_drift = drift;
            self.time_of_max = t;
        }
    }
}

/// Worst drift of every tracked invariant along a trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftReport {
    pub schema_version: u32,
    pub samples: usize,
    pub entries: Vec<DriftEntry>,
    /// Sample times at which `N` could not be evaluated (state left `a > 0`).
    pub domain_failures: Vec<f64>,
}

impl DriftReport {
    /// Largest drift over all entries (NaN if any entry is NaN).
    pub fn max_drift(&self) -> f64 {
        self.max_drift_where(|_| true)
    }

    pub fn max_drift_where(&self, keep: impl Fn(&DriftEntry) -> bool) -> f64 {
        self.entries.iter().filter(|e| keep(e)).fold(0.0, |m, e| if e.max_drift.is_nan() { f64::NAN } else { m.max(e.max_drift) })
    }

    /// Fixed-width table: name, initial value, max drift, time of max.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{:<12} {:>24} {:>12} {:>12}", "invariant", "initial", "max drift", "t(max)").unwrap();
        for e in &self.entries {
            let kind = if e.relative { "" } else { " (abs)" };
            writeln!(out, "{:<12} {:>24.16e} {:>12.3e} {:>12.6}{kind}", e.name, e.initial, e.max_drift, e.time_of_max)
                .unwrap();
        }
        if !self.domain_failures.is_empty() {
            writeln!(out, "N undefined at {} sample(s)", self.domain_failures.len()).unwrap();
        }
        out
    }
}

/// Drift of every `N_1j` and every `gamma_i` against their values at the
/// first sample. `N` entries are included only when the initial `a` is
/// positive; samples where positivity later fails are listed, not fatal.
pub fn drift_report(system: &TopSystem, trajectory: &Trajectory) -> Result<DriftReport> {
    let to_a = |x: &[f64]| -> Result<Vec<f64>> {
        match trajectory.coords {
            Coordinates::Omega => system.a_transform(x),
            Coordinates::A => {
                Error::check_len(system.dimension(), x.len())?;
                Ok(x.to_vec())
            }
            other => Err(Error::invalid(format!("cannot take top invariants of a {other:?} trajectory"))),
        }
    };
    let first = trajectory.samples.first().ok_or_else(|| Error::invalid("empty trajectory"))?;
    let a0 = to_a(&first.x)?;
    let n0 = n_first_row(&a0).ok();
    let g0 = gamma(system, &a0)?;

    let mut n_entries: Vec<DriftEntry> = n0
        .iter()
        .flatten()
        .enumerate()
        .map(|(j, &v)| DriftEntry::new(format!("N[1,{}]", j + 2), v))
        .collect();
    let mut g_entries: Vec<DriftEntry> =
        g0.iter().enumerate().map(|(i, &v)| DriftEntry::new(format!("gamma[{}]", i + 1), v)).collect();
    let mut domain_failures = Vec::new();

    for s in &trajectory.samples {
        let a = to_a(&s.x)?;
        if !n_entries.is_empty() {
            match n_first_row(&a) {
                Ok(row) => n_entries.iter_mut().zip(row).for_each(|(e, v)| e.observe(s.t, v)),
                Err(_) => domain_failures.push(s.t),
            }
        }
        gamma(system, &a)?.into_iter().zip(g_entries.iter_mut()).for_each(|(v, e)| e.observe(s.t, v));
    }

    n_entries.append(&mut g_entries);
    Ok(DriftReport { schema_version: SCHEMA_VERSION, samples: trajectory.samples.len(), entries: n_entries, domain_failures })
}

/// Central-difference Jacobian of `f` at `x`; rows are outputs.
pub fn finite_difference_jacobian<F>(f: F, x: &[f64]) -> Result<DMatrix<f64>>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let rows = f(x)?.len();
    let mut jac = DMatrix::zeros(rows, x.len());
    let mut probe = x.to_vec();
    for c in 0..x.len() {
        let h = 1e-6 * x[c].abs().max(1.0);
        probe[c] = x[c] + h;
        let plus = f(&probe)?;
        probe[c] = x[c] - h;
        let minus = f(&probe)?;
        probe[c] = x[c];
        for r in 0..rows {
            jac[(r, c)] = (plus[r] - minus[r]) / (2.0 * h);
        }
    }
    Ok(jac)
}

/// Number of singular values above `rel_cutoff * sigma_max`.
pub fn numerical_rank(m: &DMatrix<f64>, rel_cutoff: f64) -> usize {
    let sv = m.clone().svd(false, false).singular_values;
    let smax = sv.iter().fold(0.0f64, |a, &b| a.max(b));
    if smax == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel_cutoff * smax).count()
}

/// Ranks of the finite-difference Jacobians of the three invariant families
/// at a positive point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RankReport {
    /// The `2^n - 2` functions `N_1j`.
    pub n_first_row: usize,
    /// All `N_ij` with `i < j`.
    pub n_all: usize,
    /// The `2^n - 1` polynomials `gamma_i`.
    pub gamma: usize,
}

pub const RANK_CUTOFF: f64 = 1e-8;

pub fn independence_ranks(system: &TopSystem, a: &[f64]) -> Result<RankReport> {
    Error::check_len(system.dimension(), a.len())?;
    check_positive(a)?;
    let d = a.len();
    let first = finite_difference_jacobian(n_first_row, a)?;
    let all = finite_difference_jacobian(
        |x| {
            let n = n_matrix(x)?;
            Ok((0..d).flat_map(|i| (i + 1..d).map(move |j| (i, j))).map(|(i, j)| n.get(i, j)).collect())
        },
        a,
    )?;
    let g = finite_difference_jacobian(|x| gamma(system, x), a)?;
    Ok(RankReport {
        n_first_row: numerical_rank(&first, RANK_CUTOFF),
        n_all: numerical_rank(&all, RANK_CUTOFF),
        gamma: numerical_rank(&g, RANK_CUTOFF),
    })
}
