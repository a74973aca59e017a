use std::fmt::Write;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Completed,
    /// The sup-norm crossed the blow-up threshold.
    BlowUp,
    /// The step size underflowed or the step budget ran out.
    StepFailure,
    /// The right-hand side left its real branch.
    BranchFailure,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coordinates {
    Omega,
    A,
    /// The scalar reduced variable `R`.
    R,
    /// The (k+1)-variable product flow.
    Zk,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub x: Vec<f64>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntegrationStats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
}

/// Time-ordered samples plus how the run ended.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub coords: Coordinates,
    pub termination: Termination,
    pub stats: IntegrationStats,
    pub samples: Vec<Sample>,
}

impl Trajectory {
    pub fn dimension(&self) -> usize {
        self.samples.first().map_or(0, |s| s.x.len())
    }

    pub fn last(&self) -> &Sample {
        self.samples.last().expect("a trajectory always holds its initial sample")
    }

    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }

    /// CSV with header `t,x_1,...,x_d`. Floats use the shortest round-trip form.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t");
        for i in 1..=self.dimension() {
            write!(out, ",x_{i}").unwrap();
        }
        out.push('\n');
        for s in &self.samples {
            write!(out, "{}", s.t).unwrap();
            for x in &s.x {
                write!(out, ",{x}").unwrap();
            }
            out.push('\n');
        }
        out
    }
}
