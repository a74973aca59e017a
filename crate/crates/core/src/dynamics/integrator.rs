//! Dormand-Prince 5(4) with PI step-size control.
//!
//! Samples on the output grid come from the method's fourth-order dense
//! output, so the step size is governed by the tolerances alone; only the
//! final step is clipped to land on `t_end`. The solver never panics on a misbehaving right-hand
//! side: a stage that fails its domain check shrinks the step, and repeated
//! failure ends the run with [`Termination::BranchFailure`].

use super::trajectory::{Coordinates, IntegrationStats, Sample, Termination, Trajectory};
use crate::error::{Error, Result};

pub const DEFAULT_BLOW_UP_THRESHOLD: f64 = 1e9;

// The systems here are autonomous, so the stage times c_i are not needed.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// Fifth-order weights minus the embedded fourth-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

// Dense output weights for the fourth-order continuous extension.
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;
const BETA: f64 = 0.04;
const ALPHA: f64 = 0.2 - 0.75 * BETA;

#[derive(Debug, Clone, PartialEq)]
pub struct IntegratorOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Spacing of recorded samples; `None` records 100 evenly spaced samples.
    pub output_interval: Option<f64>,
    pub blow_up_threshold: f64,
    pub max_steps: usize,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        IntegratorOptions {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            output_interval: None,
            blow_up_threshold: DEFAULT_BLOW_UP_THRESHOLD,
            max_steps: 2_000_000,
        }
    }
}

impl IntegratorOptions {
    pub fn with_tolerances(rel_tol: f64, abs_tol: f64) -> Self {
        IntegratorOptions { rel_tol, abs_tol, ..Default::default() }
    }

    pub fn validate(&self, t_end: f64) -> Result<()> {
        if !(t_end.is_finite() && t_end > 0.0) {
            return Err(Error::invalid(format!("t_end must be positive and finite, got {t_end}")));
        }
        for (name, tol) in [("rel_tol", self.rel_tol), ("abs_tol", self.abs_tol)] {
            if !(tol > 0.0 && tol <= 1e-2) {
                return Err(Error::invalid(format!("{name} must lie in (0, 1e-2], got {tol}")));
            }
        }
        if let Some(dt) = self.output_interval {
            if !(dt.is_finite() && dt > 0.0) {
                return Err(Error::invalid(format!("output interval must be positive, got {dt}")));
            }
        }
        if !(self.blow_up_threshold > 0.0) {
            return Err(Error::invalid("blow-up threshold must be positive"));
        }
        Ok(())
    }

    fn output_times(&self, t_end: f64) -> Vec<f64> {
        let dt = self.output_interval.unwrap_or(t_end / 100.0);
        let mut out = Vec::new();
        let mut k = 1u64;
        loop {
            let t = k as f64 * dt;
            if t >= t_end * (1.0 - 1e-12) {
                out.push(t_end);
                return out;
            }
            out.push(t);
            k += 1;
        }
    }
}

struct Workspace {
    k: [Vec<f64>; 7],
    stage: Vec<f64>,
    y_new: Vec<f64>,
    scaled: Vec<f64>,
    /// Interpolation coefficients of the last accepted step.
    cont: [Vec<f64>; 4],
}

impl Workspace {
    /// Prepares the interpolant over `[t, t + h]` from the old state `y`,
    /// the new state in `y_new` and the stages of the step.
    fn build_dense(&mut self, y: &[f64], h: f64) {
        let Workspace { k, y_new, cont, .. } = self;
        for i in 0..y.len() {
            let diff = y_new[i] - y[i];
            let bspl = h * k[0][i] - diff;
            cont[0][i] = diff;
            cont[1][i] = bspl;
            cont[2][i] = diff - h * k[6][i] - bspl;
            cont[3][i] = h * (D1 * k[0][i] + D3 * k[2][i] + D4 * k[3][i] + D5 * k[4][i] + D6 * k[5][i] + D7 * k[6][i]);
        }
    }

    fn interpolate(&self, y: &[f64], theta: f64) -> Vec<f64> {
        let th1 = 1.0 - theta;
        let c = &self.cont;
        (0..y.len())
            .map(|i| y[i] + theta * (c[0][i] + th1 * (c[1][i] + theta * (c[2][i] + th1 * c[3][i]))))
            .collect()
    }
}

fn sup_norm(x: &[f64]) -> f64 {
    x.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

fn rms(v: impl Iterator<Item = f64>, len: usize) -> f64 {
    (v.map(|x| x * x).sum::<f64>() / len as f64).sqrt()
}

/// Integrates the autonomous system `x' = rhs(x)` from `t = 0` to `t_end`.
///
/// `rhs` writes the derivative into its second argument and may reject a
/// state with an error (for fractional powers off the positive branch).
/// The returned trajectory is tagged [`Coordinates::Omega`]; callers retag it.
pub fn solve<F>(mut rhs: F, x0: &[f64], t_end: f64, opts: &IntegratorOptions) -> Result<Trajectory>
where
    F: FnMut(&[f64], &mut [f64]) -> Result<()>,
{
    opts.validate(t_end)?;
    if x0.is_empty() || x0.iter().any(|x| !x.is_finite()) {
        return Err(Error::invalid("initial state must be non-empty and finite"));
    }
    let dim = x0.len();
    let mut stats = IntegrationStats::default();
    let mut samples = vec![Sample { t: 0.0, x: x0.to_vec() }];
    let finish = |samples, termination, stats| Ok(Trajectory { coords: Coordinates::Omega, termination, stats, samples });

    if sup_norm(x0) >= opts.blow_up_threshold {
        return finish(samples, Termination::BlowUp, stats);
    }

    let mut ws = Workspace {
        k: std::array::from_fn(|_| vec![0.0; dim]),
        stage: vec![0.0; dim],
        y_new: vec![0.0; dim],
        scaled: vec![0.0; dim],
        cont: std::array::from_fn(|_| vec![0.0; dim]),
    };
    let mut y = x0.to_vec();
    stats.rhs_evals += 1;
    if rhs(&y, &mut ws.k[0]).is_err() {
        return finish(samples, Termination::BranchFailure, stats);
    }

    let mut h = initial_step(&mut rhs, &y, &mut ws, t_end, opts, &mut stats);
    let outputs = opts.output_times(t_end);
    let mut next_out = 0usize;
    let mut t = 0.0f64;
    let mut err_old = 1e-4f64;
    let mut last_rejected = false;
    let mut last_failure_was_branch = false;

    loop {
        if stats.accepted + stats.rejected >= opts.max_steps {
            return finish(samples, Termination::StepFailure, stats);
        }
        let mut hits_end = false;
        if t + h >= t_end || t_end - (t + h) <= 1e-12 * t_end {
            h = t_end - t;
            hits_end = true;
        }
        if h <= 16.0 * f64::EPSILON * t.abs().max(1e-3) {
            let term = if last_failure_was_branch { Termination::BranchFailure } else { Termination::StepFailure };
            return finish(samples, term, stats);
        }

        match attempt_step(&mut rhs, &y, h, &mut ws, opts, &mut stats) {
            Err(_) => {
                stats.rejected += 1;
                last_rejected = true;
                last_failure_was_branch = true;
                h *= 0.25;
                continue;
            }
            Ok(err) if !(err <= 1.0) => {
                stats.rejected += 1;
                last_rejected = true;
                last_failure_was_branch = false;
                let fac = if err.is_finite() { (SAFETY * err.powf(-0.2)).max(FAC_MIN) } else { FAC_MIN };
                h *= fac;
                continue;
            }
            Ok(err) => {
                stats.accepted += 1;
                last_failure_was_branch = false;
                let t_old = t;
                t = if hits_end { t_end } else { t + h };
                ws.build_dense(&y, h);
                while next_out < outputs.len() && outputs[next_out] < t {
                    let x = ws.interpolate(&y, (outputs[next_out] - t_old) / h);
                    samples.push(Sample { t: outputs[next_out], x });
                    next_out += 1;
                }
                std::mem::swap(&mut y, &mut ws.y_new);
                // First same as last: stage 7 is the derivative at the new point.
                ws.k.swap(0, 6);

                let mut fac = if err == 0.0 {
                    FAC_MAX
                } else {
                    (SAFETY * err.powf(-ALPHA) * err_old.powf(BETA)).clamp(FAC_MIN, FAC_MAX)
                };
                if last_rejected {
                    fac = fac.min(1.0);
                }
                err_old = err.max(1e-4);
                last_rejected = false;
                let h_next = h * fac;

                let on_grid = next_out < outputs.len() && outputs[next_out] == t;
                let blown = sup_norm(&y) >= opts.blow_up_threshold;
                if on_grid || blown {
                    samples.push(Sample { t, x: y.clone() });
                }
                if blown {
                    return finish(samples, Termination::BlowUp, stats);
                }
                if on_grid {
                    next_out += 1;
                }
                if next_out == outputs.len() {
                    return finish(samples, Termination::Completed, stats);
                }
                h = h_next;
            }
        }
    }
}

/// One trial step of size `h` from `y` with `k[0] = f(y)`. Leaves the
/// candidate in `ws.y_new`, its derivative in `ws.k[6]`, and returns the
/// scaled RMS error estimate.
fn attempt_step<F>(
    rhs: &mut F,
    y: &[f64],
    h: f64,
    ws: &mut Workspace,
    opts: &IntegratorOptions,
    stats: &mut IntegrationStats,
) -> Result<f64>
where
    F: FnMut(&[f64], &mut [f64]) -> Result<()>,
{
    let dim = y.len();
    let Workspace { k, stage, y_new, scaled, .. } = ws;

    macro_rules! stage {
        ($dst:expr, $($coef:expr => $src:expr),+) => {{
            for i in 0..dim {
                stage[i] = y[i] + h * (0.0 $(+ $coef * k[$src][i])+);
            }
            stats.rhs_evals += 1;
            rhs(&stage[..], &mut k[$dst])?;
        }};
    }

    stage!(1, A21 => 0);
    stage!(2, A31 => 0, A32 => 1);
    stage!(3, A41 => 0, A42 => 1, A43 => 2);
    stage!(4, A51 => 0, A52 => 1, A53 => 2, A54 => 3);
    stage!(5, A61 => 0, A62 => 1, A63 => 2, A64 => 3, A65 => 4);
    for i in 0..dim {
        y_new[i] = y[i] + h * (A71 * k[0][i] + A73 * k[2][i] + A74 * k[3][i] + A75 * k[4][i] + A76 * k[5][i]);
    }
    if y_new.iter().any(|v| !v.is_finite()) {
        return Ok(f64::INFINITY);
    }
    stats.rhs_evals += 1;
    rhs(&y_new[..], &mut k[6])?;

    for i in 0..dim {
        let e = h * (E1 * k[0][i] + E3 * k[2][i] + E4 * k[3][i] + E5 * k[4][i] + E6 * k[5][i] + E7 * k[6][i]);
        let sc = opts.abs_tol + opts.rel_tol * y[i].abs().max(y_new[i].abs());
        scaled[i] = e / sc;
    }
    Ok(rms(scaled.iter().copied(), dim))
}

fn initial_step<F>(
    rhs: &mut F,
    y: &[f64],
    ws: &mut Workspace,
    t_end: f64,
    opts: &IntegratorOptions,
    stats: &mut IntegrationStats,
) -> f64
where
    F: FnMut(&[f64], &mut [f64]) -> Result<()>,
{
    let dim = y.len();
    let sc = |v: f64| opts.abs_tol + opts.rel_tol * v.abs();
    let d0 = rms(y.iter().map(|&v| v / sc(v)), dim);
    let d1 = rms(ws.k[0].iter().zip(y).map(|(&f, &v)| f / sc(v)), dim);
    let mut h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    h0 = h0.min(t_end);

    for i in 0..dim {
        ws.stage[i] = y[i] + h0 * ws.k[0][i];
    }
    stats.rhs_evals += 1;
    if rhs(&ws.stage, &mut ws.k[1]).is_err() {
        return h0 * 0.1;
    }
    let d2 = rms(ws.k[1].iter().zip(&ws.k[0]).zip(y).map(|((&f1, &f0), &v)| (f1 - f0) / sc(v)), dim) / h0;
    let dmax = d1.max(d2);
    let h1 = if dmax <= 1e-15 { (h0 * 1e-3).max(1e-6) } else { (0.01 / dmax).powf(0.2) };
    (100.0 * h0).min(h1).min(t_end)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts(tol: f64) -> IntegratorOptions {
        IntegratorOptions { output_interval: Some(0.1), ..IntegratorOptions::with_tolerances(tol, tol) }
    }

    #[test]
    fn exponential_decay() {
        let traj = solve(|x, out| {
            out[0] = -x[0];
            Ok(())
        }, &[1.0], 2.0, &opts(1e-10))
        .unwrap();
        assert_eq!(traj.termination, Termination::Completed);
        assert_eq!(traj.samples.len(), 21);
        for s in &traj.samples {
            assert!((s.x[0] - (-s.t).exp()).abs() < 1e-9, "t={}", s.t);
        }
        assert_eq!(traj.last().t, 2.0);
    }

    #[test]
    fn harmonic_oscillator_energy() {
        let traj = solve(|x, out| {
            out[0] = x[1];
            out[1] = -x[0];
            Ok(())
        }, &[1.0, 0.0], 10.0, &opts(1e-11))
        .unwrap();
        for s in &traj.samples {
            assert!((s.x[0] - s.t.cos()).abs() < 1e-8);
            assert!((s.x[0].powi(2) + s.x[1].powi(2) - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn riccati_blows_up() {
        // x' = x^2, x(0) = 1 has its pole at t = 1.
        let traj = solve(|x, out| {
            out[0] = x[0] * x[0];
            Ok(())
        }, &[1.0], 2.0, &opts(1e-10))
        .unwrap();
        assert_eq!(traj.termination, Termination::BlowUp);
        let last = traj.last();
        assert!(last.x[0] >= DEFAULT_BLOW_UP_THRESHOLD);
        assert!((last.t - 1.0).abs() < 1e-6);
        assert!(traj.samples.windows(2).all(|w| w[0].t < w[1].t));
    }

    #[test]
    fn branch_failure_is_reported() {
        // x' = -sqrt(x) reaches zero at t = 2; beyond that the root is undefined.
        let traj = solve(|x, out| {
            if x[0] < 0.0 {
                return Err(Error::Branch("negative".into()));
            }
            out[0] = -x[0].sqrt();
            Ok(())
        }, &[1.0], 3.0, &opts(1e-8))
        .unwrap();
        assert!(matches!(traj.termination, Termination::BranchFailure | Termination::StepFailure));
        assert!(traj.last().t < 3.0);
    }

    #[test]
    fn step_budget_exhaustion_is_a_step_failure() {
        let o = IntegratorOptions { max_steps: 3, ..opts(1e-10) };
        let traj = solve(|x, out| {
            out[0] = x[0].cos();
            Ok(())
        }, &[0.0], 100.0, &o)
        .unwrap();
        assert_eq!(traj.termination, Termination::StepFailure);
    }

    #[test]
    fn invalid_options() {
        let f = |_: &[f64], out: &mut [f64]| {
            out[0] = 0.0;
            Ok(())
        };
        assert!(solve(f, &[1.0], 0.0, &opts(1e-8)).is_err());
        assert!(solve(f, &[1.0], 1.0, &opts(0.0)).is_err());
        assert!(solve(f, &[1.0], 1.0, &opts(0.1)).is_err());
        assert!(solve(f, &[f64::NAN], 1.0, &opts(1e-8)).is_err());
    }

    #[test]
    fn output_grid_is_exact() {
        let o = IntegratorOptions { output_interval: Some(0.3), ..Default::default() };
        assert_eq!(o.output_times(1.0), vec![0.3, 0.6, 0.8999999999999999, 1.0]);
        let o = IntegratorOptions { output_interval: Some(0.25), ..Default::default() };
        assert_eq!(o.output_times(1.0), vec![0.25, 0.5, 0.75, 1.0]);
    }

    #[test]
    fn dense_output_local_error_is_fifth_order() {
        // One step of x' = x from 1, interpolated at the midpoint.
        let mid_err = |h: f64| {
            let o = IntegratorOptions::default();
            let mut ws = Workspace {
                k: std::array::from_fn(|_| vec![0.0; 1]),
                stage: vec![0.0],
                y_new: vec![0.0],
                scaled: vec![0.0],
                cont: std::array::from_fn(|_| vec![0.0]),
            };
            let mut stats = IntegrationStats::default();
            let mut f = |x: &[f64], out: &mut [f64]| {
                out[0] = x[0];
                Ok(())
            };
            f(&[1.0], &mut ws.k[0]).unwrap();
            attempt_step(&mut f, &[1.0], h, &mut ws, &o, &mut stats).unwrap();
            ws.build_dense(&[1.0], h);
            (ws.interpolate(&[1.0], 0.5)[0] - (h / 2.0).exp()).abs()
        };
        let ratio = mid_err(0.2) / mid_err(0.1);
        assert!((24.0..40.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn samples_do_not_limit_the_step() {
        let o = IntegratorOptions { output_interval: Some(1e-3), ..IntegratorOptions::with_tolerances(1e-8, 1e-8) };
        let traj = solve(|x, out| {
            out[0] = -x[0];
            Ok(())
        }, &[1.0], 1.0, &o).unwrap();
        assert_eq!(traj.samples.len(), 1001);
        assert!(traj.stats.accepted < 200, "{}", traj.stats.accepted);
        for s in &traj.samples {
            assert!((s.x[0] - (-s.t).exp()).abs() < 1e-7);
        }
    }

    #[test]
    fn convergence_order_is_about_five() {
        // Fixed-step error at t = 1 for x' = x: halving h cuts the error ~32x.
        let step_err = |h: f64| {
            let o = IntegratorOptions { output_interval: Some(h), ..IntegratorOptions::with_tolerances(1e-2, 1e-2) };
            let mut ws = Workspace {
                k: std::array::from_fn(|_| vec![0.0; 1]),
                stage: vec![0.0],
                y_new: vec![0.0],
                scaled: vec![0.0],
                cont: std::array::from_fn(|_| vec![0.0]),
            };
            let mut stats = IntegrationStats::default();
            let mut f = |x: &[f64], out: &mut [f64]| {
                out[0] = x[0];
                Ok(())
            };
            let mut y = vec![1.0];
            let steps = (1.0 / h).round() as usize;
            for _ in 0..steps {
                f(&y.clone(), &mut ws.k[0]).unwrap();
                attempt_step(&mut f, &y, h, &mut ws, &o, &mut stats).unwrap();
                y = ws.y_new.clone();
            }
            (y[0] - 1f64.exp()).abs()
        };
        let ratio = step_err(0.1) / step_err(0.05);
        assert!(ratio > 25.0 && ratio < 40.0, "ratio {ratio}");
    }
}
