//! Seeded batches of independent runs.
//!
//! Each state is drawn from its own ChaCha8 stream keyed by `(seed, index)`,
//! so results do not depend on the execution policy or thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::{guarded_horizon, IntegratorOptions, RhsKind, Termination, TopSystem};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::invariants::drift_report;
use crate::reduction::{compare_routes, RouteComparison};

/// The `index`-th state of a seeded batch, uniform in `[lo, hi)^d`.
pub fn random_state(seed: u64, index: u64, d: usize, lo: f64, hi: f64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    (0..d).map(|_| rng.gen_range(lo..hi)).collect()
}

pub fn random_states(seed: u64, count: usize, d: usize, lo: f64, hi: f64) -> Result<Vec<Vec<f64>>> {
    if !(lo < hi && lo.is_finite() && hi.is_finite()) {
        return Err(Error::invalid(format!("empty sampling range [{lo}, {hi})")));
    }
    Ok((0..count as u64).map(|i| random_state(seed, i, d, lo, hi)).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConservationRun {
    pub omega0: Vec<f64>,
    pub t_end: f64,
    pub termination: Termination,
    pub max_drift: f64,
}

/// Integrates each state up to its guarded horizon and records the worst
/// invariant drift.
pub fn conservation_sweep(
    system: &TopSystem,
    states: &[Vec<f64>],
    opts: &IntegratorOptions,
    exec: Execution,
) -> Result<Vec<ConservationRun>> {
    exec.map(states, |w0| {
        let t_end = guarded_horizon(system.n(), w0);
        let traj = system.integrate(RhsKind::Omega, w0, t_end, opts)?;
        let report = drift_report(system, &traj)?;
        Ok(ConservationRun { omega0: w0.clone(), t_end, termination: traj.termination, max_drift: report.max_drift() })
    })
    .into_iter()
    .collect()
}

/// Worst `|A f(omega) - g(A omega)|` over the given states.
pub fn commutation_sweep(system: &TopSystem, states: &[Vec<f64>], exec: Execution) -> Result<f64> {
    let errs: Result<Vec<f64>> = exec
        .map(states, |w| {
            let lhs = system.a_transform(&system.omega_rhs(w)?)?;
            let rhs = system.a_rhs(&system.a_transform(w)?)?;
            Ok(lhs.iter().zip(&rhs).fold(0.0f64, |m, (x, y)| m.max((x - y).abs())))
        })
        .into_iter()
        .collect();
    Ok(errs?.into_iter().fold(0.0, f64::max))
}

/// Runs [`compare_routes`] for each state up to its guarded horizon.
pub fn route_sweep(
    system: &TopSystem,
    states: &[Vec<f64>],
    opts: &IntegratorOptions,
    exec: Execution,
) -> Result<Vec<RouteComparison>> {
    exec.map(states, |w0| {
        let t_end = guarded_horizon(system.n(), w0);
        // The two routes are already split across states; run each pair inline.
        compare_routes(system, w0, t_end, opts, Execution::Sequential)
    })
    .into_iter()
    .collect()
}
