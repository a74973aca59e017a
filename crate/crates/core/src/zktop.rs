//! The `k + 1` variable product flow `d(omega_i)/dt = prod_{j != i} omega_j`.
//!
//! Since `d(omega_i^2)/dt = 2 prod_j omega_j` for every `i`, all differences
//! `omega_i^2 - omega_j^2` are conserved. For `k = 2` this is the three
//! dimensional top. The reduced quadrature lives on a hyperelliptic curve of
//! genus `k - 1`; only that count is provided here.

use serde::{Deserialize, Serialize};

use crate::dynamics::{solve, Coordinates, IntegratorOptions, Trajectory};
use crate::error::{Error, Result};
use crate::invariants::{DriftEntry, DriftReport};
use crate::SCHEMA_VERSION;

/// Largest supported `k`.
pub const MAX_K: u32 = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ZkSystem {
    k: u32,
}

impl ZkSystem {
    pub fn new(k: u32) -> Result<Self> {
        if !(2..=MAX_K).contains(&k) {
            return Err(Error::invalid(format!("k must lie in 2..={MAX_K}, got {k}")));
        }
        Ok(ZkSystem { k })
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn dimension(&self) -> usize {
        self.k as usize + 1
    }

    pub fn rhs(&self, omega: &[f64]) -> Result<Vec<f64>> {
        Error::check_len(self.dimension(), omega.len())?;
        let mut out = vec![0.0; omega.len()];
        zk_rhs_into(omega, &mut out);
        Ok(out)
    }

    /// `omega_i^2 - omega_{i+1}^2` for `i = 1..k`.
    pub fn invariants(&self, omega: &[f64]) -> Result<Vec<f64>> {
        Error::check_len(self.dimension(), omega.len())?;
        Ok(omega.windows(2).map(|w| w[0] * w[0] - w[1] * w[1]).collect())
    }

    pub fn genus(&self) -> u64 {
        zk_genus(self.k)
    }

    pub fn integrate(&self, omega0: &[f64], t_end: f64, opts: &IntegratorOptions) -> Result<Trajectory> {
        Error::check_len(self.dimension(), omega0.len())?;
        let traj = solve(
            |x: &[f64], out: &mut [f64]| {
                zk_rhs_into(x, out);
                Ok(())
            },
            omega0,
            t_end,
            opts,
        )?;
        Ok(Trajectory { coords: Coordinates::Zk, ..traj })
    }

    /// Pole-free horizon `0.4 / ((k - 1) max|omega_0|^(k-1))`.
    ///
    /// The sup-norm obeys `y' <= y^k`, whose solution reaches the pole at
    /// `1 / ((k - 1) y_0^(k-1))`.
    pub fn guarded_horizon(&self, omega0: &[f64]) -> f64 {
        let max = omega0.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if max == 0.0 {
            return 1.0;
        }
        0.4 / ((self.k - 1) as f64 * max.powi(self.k as i32 - 1))
    }

    /// Drift of every `omega_i^2 - omega_{i+1}^2` against the first sample.
    pub fn drift_report(&self, trajectory: &Trajectory) -> Result<DriftReport> {
        let first = trajectory.samples.first().ok_or_else(|| Error::invalid("empty trajectory"))?;
        let mut entries: Vec<DriftEntry> = self
            .invariants(&first.x)?
            .into_iter()
            .enumerate()
            .map(|(i, v)| DriftEntry::new(format!("w{}^2-w{}^2", i + 1, i + 2), v))
            .collect();
        for s in &trajectory.samples {
            for (e, v) in entries.iter_mut().zip(self.invariants(&s.x)?) {
                e.observe(s.t, v);
            }
        }
        Ok(DriftReport { schema_version: SCHEMA_VERSION, samples: trajectory.samples.len(), entries, domain_failures: Vec::new() })
    }
}

/// `prod_{j != i} omega_j` via prefix and suffix products.
pub fn zk_rhs(omega: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; omega.len()];
    zk_rhs_into(omega, &mut out);
    out
}

fn zk_rhs_into(omega: &[f64], out: &mut [f64]) {
    let mut prefix = 1.0;
    for (o, &w) in out.iter_mut().zip(omega) {
        *o = prefix;
        prefix *= w;
    }
    let mut suffix = 1.0;
    for (o, &w) in out.iter_mut().zip(omega).rev() {
        *o *= suffix;
        suffix *= w;
    }
}

pub fn zk_genus(k: u32) -> u64 {
    u64::from(k.saturating_sub(1))
}
