//! Reduction of the `a`-flow to one scalar quadrature.
//!
//! With `U = mean(1 / a_i)` and constants `M_j = sum_i N_ij / d`, every
//! component satisfies `1 / a_j = M_j / T + U`. The product `R = T U` then
//! obeys
//!
//! ```text
//! dR/dt = (prod_j (R + M_j))^(1 / 2^(n-1))
//! ```
//!
//! and the full state is recovered as `a_j = T / (R + M_j)` with `T` given by
//! the same root. Everything here lives on the positive real branch: the
//! initial `a` must be strictly positive with pairwise distinct entries.
//!
//! The reduced integrand is single-valued on a surface built from
//! `2^(n-1)` sheets (the order of the root), each cut `2^(n-1)` times because
//! the product under the root has degree `2^n - 1` in `R`. Its genus is
//! `(2^(n-1) - 1)^2`; no curve machinery is built, only the count.

use serde::{Deserialize, Serialize};

use crate::dynamics::{solve, Coordinates, IntegratorOptions, RhsKind, Termination, TopSystem, Trajectory};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::geometry::n_from_dimension;
use crate::invariants::{big_t, n_matrix};
use crate::SCHEMA_VERSION;

/// Residual bound for `1 / a_j = M_j / T + U` at construction.
pub const RECONSTRUCTION_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReductionData {
    pub n: u32,
    pub m: Vec<f64>,
    pub t0: f64,
    pub u0: f64,
    pub r0: f64,
}

fn root_index(n: u32) -> f64 {
    (1u64 << (n - 1)) as f64
}

/// Relative separation below which two entries count as coincident.
const COINCIDENCE: f64 = 1e-12;

/// Builds the reduction constants from a positive, generic initial state.
pub fn compute_reduction(a0: &[f64]) -> Result<ReductionData> {
    let n = n_from_dimension(a0.len())?;
    if let Some(i) = a0.iter().position(|&x| !(x > 0.0 && x.is_finite())) {
        return Err(Error::DegenerateOrbit(format!("a_{} = {} is not strictly positive", i + 1, a0[i])));
    }
    for i in 0..a0.len() {
        for j in i + 1..a0.len() {
            if (a0[i] - a0[j]).abs() <= COINCIDENCE * a0[i].max(a0[j]) {
                return Err(Error::DegenerateOrbit(format!("a_{} and a_{} coincide", i + 1, j + 1)));
            }
        }
    }

    let d = a0.len() as f64;
    let t0 = big_t(a0)?;
    let u0 = a0.iter().map(|x| 1.0 / x).sum::<f64>() / d;
    let m = n_matrix(a0)?.column_means();
    let data = ReductionData { n, m, t0, u0, r0: t0 * u0 };

    for (j, (&aj, &mj)) in a0.iter().zip(&data.m).enumerate() {
        let resid = (1.0 / aj - (mj / t0 + u0)).abs() * aj;
        if resid >= RECONSTRUCTION_TOLERANCE {
            return Err(Error::DegenerateOrbit(format!("1/a_{} residual {resid:e} too large", j + 1)));
        }
    }
    let rel = data.tu_relation_residual(t0, u0);
    if !(rel < RECONSTRUCTION_TOLERANCE) {
        return Err(Error::DegenerateOrbit(format!("T-U relation residual {rel:e} too large")));
    }
    Ok(data)
}

impl ReductionData {
    pub fn dimension(&self) -> usize {
        self.m.len()
    }

    pub fn sum_m(&self) -> f64 {
        self.m.iter().sum()
    }

    /// `|T^(2^(n-1)) - prod(T U + M_j)| / T^(2^(n-1))`, computed in logs
    /// when the product is positive.
    pub fn tu_relation_residual(&self, t: f64, u: f64) -> f64 {
        let lhs_log = root_index(self.n) * t.ln();
        let r = t * u;
        if self.m.iter().any(|&mj| r + mj <= 0.0) {
            return f64::INFINITY;
        }
        let rhs_log: f64 = self.m.iter().map(|&mj| (r + mj).ln()).sum();
        (rhs_log - lhs_log).exp_m1().abs()
    }

    pub fn scalar_rhs(&self, r: f64) -> Result<f64> {
        scalar_rhs(r, &self.m, self.n)
    }

    pub fn reconstruct_a(&self, r: f64) -> Result<Vec<f64>> {
        reconstruct_a(r, &self.m, self.n)
    }

    /// Integrates `dR/dt` from `R(0) = r0`. Leaving the positive branch ends
    /// the run with [`Termination::BranchFailure`].
    pub fn integrate_r(&self, t_end: f64, opts: &IntegratorOptions) -> Result<Trajectory> {
        let traj = solve(
            |x: &[f64], out: &mut [f64]| {
                out[0] = self.scalar_rhs(x[0])?;
                Ok(())
            },
            &[self.r0],
            t_end,
            opts,
        )?;
        Ok(Trajectory { coords: Coordinates::R, ..traj })
    }
}

/// `(prod_j (R + M_j))^(1 / 2^(n-1))`, real principal root.
pub fn scalar_rhs(r: f64, m: &[f64], n: u32) -> Result<f64> {
    Error::check_len((1usize << n) - 1, m.len())?;
    if m.iter().all(|&mj| r + mj > 0.0) {
        let log: f64 = m.iter().map(|&mj| (r + mj).ln()).sum();
        return Ok((log / root_index(n)).exp());
    }
    let prod: f64 = m.iter().map(|&mj| r + mj).product();
    if prod > 0.0 && prod.is_finite() {
        Ok(prod.powf(1.0 / root_index(n)))
    } else {
        Err(Error::Branch(format!("product of R + M_j is {prod} at R = {r}")))
    }
}

/// `a_j = T / (R + M_j)`; needs every `R + M_j > 0`.
pub fn reconstruct_a(r: f64, m: &[f64], n: u32) -> Result<Vec<f64>> {
    if let Some(j) = m.iter().position(|&mj| !(r + mj > 0.0)) {
        return Err(Error::Branch(format!("R + M_{} = {} is not positive", j + 1, r + m[j])));
    }
    let t = scalar_rhs(r, m, n)?;
    Ok(m.iter().map(|&mj| t / (r + mj)).collect())
}

/// Counting data behind the genus: sheets, cuts per sheet, degree under the root.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurveCounting {
    pub sheets: u64,
    pub cuts_per_sheet: u64,
    pub degree: u64,
    pub genus: u64,
}

/// `(2^(n-1) - 1)^2`, exact.
pub fn genus(n: u32) -> Result<u64> {
    Ok(curve_counting(n)?.genus)
}

pub fn curve_counting(n: u32) -> Result<CurveCounting> {
    if !(2..=33).contains(&n) {
        return Err(Error::invalid(format!("genus needs 2 <= n <= 33, got {n}")));
    }
    let sheets = 1u64 << (n - 1);
    let g = sheets - 1;
    Ok(CurveCounting { sheets, cuts_per_sheet: sheets, degree: 2 * sheets - 1, genus: g * g })
}

/// Result of integrating the full flow and the scalar reduction side by side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RouteComparison {
    pub schema_version: u32,
    pub n: u32,
    pub genus: u64,
    pub t_grid: Vec<f64>,
    /// Max over the grid and components of `|a_flow - a_reduced| / |a_flow|`.
    pub max_rel_err: f64,
    /// Per-component maximum over the grid.
    pub per_component_err: Vec<f64>,
    /// Max over the grid of the T-U relation residual from the flow.
    pub max_tu_residual: f64,
    /// Max relative change of the `M_j` recomputed along the flow.
    pub max_m_drift: f64,
    pub sum_m: f64,
    pub flow_termination: Termination,
    pub reduced_termination: Termination,
}

/// Integrates `omega0` with the full flow and with the scalar `R` equation and
/// compares the two `a(t)` on the shared output grid.
pub fn compare_routes(
    system: &TopSystem,
    omega0: &[f64],
    t_end: f64,
    opts: &IntegratorOptions,
    exec: Execution,
) -> Result<RouteComparison> {
    let a0 = system.a_transform(omega0)?;
    let data = compute_reduction(&a0)?;
    let (flow, reduced) = exec.join(
        || system.integrate(RhsKind::Omega, omega0, t_end, opts),
        || data.integrate_r(t_end, opts),
    );
    let (flow, reduced) = (flow?, reduced?);

    let common = flow.samples.len().min(reduced.samples.len());
    let d = system.dimension();
    let mut per_component_err = vec![0.0f64; d];
    let mut max_tu_residual = 0.0f64;
    let mut max_m_drift = 0.0f64;
    let mut t_grid = Vec::with_capacity(common);

    for (fs, rs) in flow.samples.iter().zip(&reduced.samples).take(common) {
        debug_assert_eq!(fs.t, rs.t);
        t_grid.push(fs.t);
        let a_flow = system.a_transform(&fs.x)?;
        let a_red = data.reconstruct_a(rs.x[0])?;
        for (e, (x, y)) in per_component_err.iter_mut().zip(a_flow.iter().zip(&a_red)) {
            *e = e.max((x - y).abs() / x.abs());
        }
        let t = big_t(&a_flow)?;
        let u = a_flow.iter().map(|x| 1.0 / x).sum::<f64>() / d as f64;
        max_tu_residual = max_tu_residual.max(data.tu_relation_residual(t, u));
        let m_now = n_matrix(&a_flow)?.column_means();
        let scale = data.m.iter().fold(0.0f64, |s, x| s.max(x.abs()));
        for (x, y) in m_now.iter().zip(&data.m) {
            max_m_drift = max_m_drift.max((x - y).abs() / scale);
        }
    }

    Ok(RouteComparison {
        schema_version: SCHEMA_VERSION,
        n: system.n(),
        genus: genus(system.n())?,
        t_grid,
        max_rel_err: per_component_err.iter().fold(0.0, |m, &x| m.max(x)),
        per_component_err,
        max_tu_residual,
        max_m_drift,
        sum_m: data.sum_m(),
        flow_termination: flow.termination,
        reduced_termination: reduced.termination,
    })
}
