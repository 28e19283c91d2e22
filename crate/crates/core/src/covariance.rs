//! Frame comparisons: a trajectory computed in the rest frame of the wells,
//! boosted record by record, against the trajectory computed directly in
//! the boosted frame from the boosted wave function and initial point.
//!
//! Records are aligned by step index, i.e. by accumulated proper time.

use thiserror::Error;

use crate::error::PhysicsError;
use crate::integrator::{integrate, Scheme, Termination, Trajectory};
use crate::minkowski::{boost, velocity_addition, Rapidity};
use crate::wavefield::{boosted, ConfigPoint, Particle, WaveModel};

/// Deviations below this are rounding noise; no order is fitted to them.
pub const DEVIATION_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CovarianceError {
    #[error("invalid step list: {0}")]
    InvalidEpsilons(&'static str),
    #[error("integration failed at epsilon = {epsilon}: {source}")]
    Physics {
        epsilon: f64,
        #[source]
        source: PhysicsError,
    },
    #[error("frames disagree at epsilon = {epsilon}: {rest} vs {moved} records")]
    Mismatch {
        epsilon: f64,
        rest: usize,
        moved: usize,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct FrameComparison {
    pub alpha: Rapidity,
    pub epsilon: f64,
    pub max_deviation: f64,
    /// Per step, the larger of the two particles' deviations.
    pub per_step_deviation: Vec<f64>,
    /// Per step and particle, Euclidean deviation in boosted-frame coordinates.
    pub per_particle_deviation: Vec<[f64; 2]>,
    /// Integrated in the rest frame (unboosted coordinates).
    pub rest: Trajectory,
    /// Integrated directly in the boosted frame.
    pub moved: Trajectory,
}

impl FrameComparison {
    /// Both integrations ran equally far and ended the same way.
    pub fn is_consistent(&self) -> bool {
        self.rest.records.len() == self.moved.records.len()
            && self.rest.termination == self.moved.termination
    }

    pub fn compared_steps(&self) -> usize {
        self.per_step_deviation.len()
    }

    /// Largest difference between the velocities seen in the boosted frame
    /// and the relativistic sum of rest-frame velocities with `−tanh α`.
    pub fn velocity_addition_error(&self) -> f64 {
        let u = -self.alpha.velocity();
        self.rest
            .records
            .iter()
            .zip(&self.moved.records)
            .flat_map(|(r, m)| {
                Particle::BOTH.map(|p| (m.velocity(p) - velocity_addition(r.velocity(p), u)).abs())
            })
            .fold(0.0, f64::max)
    }
}

/// Integrates in both frames and measures how far the boosted rest-frame
/// trajectory is from the directly computed one.
pub fn compare_frames<M: WaveModel>(
    model: &M,
    q0: &ConfigPoint,
    alpha: Rapidity,
    epsilon: f64,
    n_steps: usize,
    scheme: Scheme,
) -> Result<FrameComparison, PhysicsError> {
    let rest = integrate(model, q0, epsilon, n_steps, scheme)?;
    let moved_model = boosted(model, alpha);
    let moved = integrate(&moved_model, &q0.boosted(alpha), epsilon, n_steps, scheme)?;
    let per_particle_deviation: Vec<[f64; 2]> = rest
        .records
        .iter()
        .zip(&moved.records)
        .map(|(r, m)| {
            Particle::BOTH.map(|p| {
                let d = boost(r.q.event(p), alpha) - m.q.event(p);
                d.t.hypot(d.z)
            })
        })
        .collect();
    let per_step_deviation: Vec<f64> = per_particle_deviation.iter().map(|d| d[0].max(d[1])).collect();
    let max_deviation = per_step_deviation.iter().copied().fold(0.0, f64::max);
    Ok(FrameComparison {
        alpha,
        epsilon,
        max_deviation,
        per_step_deviation,
        per_particle_deviation,
        rest,
        moved,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceReport {
    pub epsilons: Vec<f64>,
    pub deviations: Vec<f64>,
    /// Log-log slope of deviation against `ε`; `None` when every deviation
    /// is below [`DEVIATION_FLOOR`].
    pub fitted_order: Option<f64>,
}

impl ConvergenceReport {
    /// Deviations shrink along the (decreasing) step list, allowing `slack`
    /// relative growth between neighbours.
    pub fn is_monotone(&self, slack: f64) -> bool {
        self.deviations.windows(2).all(|w| w[1] <= w[0] * (1.0 + slack))
    }
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

/// Runs [`compare_frames`] over a decreasing list of steps covering the
/// same total proper time and fits the convergence order.
pub fn convergence_study<M: WaveModel>(
    model: &M,
    q0: &ConfigPoint,
    alpha: Rapidity,
    epsilons: &[f64],
    total_proper_time: f64,
    scheme: Scheme,
) -> Result<ConvergenceReport, CovarianceError> {
    if epsilons.len() < 3 {
        return Err(CovarianceError::InvalidEpsilons("need at least three steps"));
    }
    if epsilons.iter().any(|e| !(*e > 0.0 && e.is_finite())) {
        return Err(CovarianceError::InvalidEpsilons("steps must be positive"));
    }
    if epsilons.windows(2).any(|w| w[1] >= w[0]) {
        return Err(CovarianceError::InvalidEpsilons("steps must be strictly decreasing"));
    }
    if !(total_proper_time > 0.0 && total_proper_time.is_finite()) {
        return Err(CovarianceError::InvalidEpsilons("total proper time must be positive"));
    }
    let mut deviations = Vec::with_capacity(epsilons.len());
    for &epsilon in epsilons {
        let ratio = total_proper_time / epsilon;
        let n_steps = ratio.round();
        if (ratio - n_steps).abs() > 1e-6 * ratio || n_steps < 1.0 {
            return Err(CovarianceError::InvalidEpsilons("steps must divide the total proper time"));
        }
        let cmp = compare_frames(model, q0, alpha, epsilon, n_steps as usize, scheme)
            .map_err(|source| CovarianceError::Physics { epsilon, source })?;
        if !cmp.is_consistent() || cmp.rest.termination != Termination::Completed {
            return Err(CovarianceError::Mismatch {
                epsilon,
                rest: cmp.rest.records.len(),
                moved: cmp.moved.records.len(),
            });
        }
        deviations.push(cmp.max_deviation);
    }
    let fitted_order = if deviations.iter().all(|d| *d >= DEVIATION_FLOOR) {
        Some(log_log_slope(epsilons, &deviations))
    } else {
        None
    };
    Ok(ConvergenceReport {
        epsilons: epsilons.to_vec(),
        deviations,
        fitted_order,
    })
}

/// `t1 − t2` at every record.
pub fn coordination_profile(traj: &Trajectory) -> Vec<f64> {
    traj.records.iter().map(|r| r.q.t1 - r.q.t2).collect()
}

/// Sample standard deviation (zero for fewer than two values).
pub fn sample_std(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
}
