//! Equal proper-time stepping of both particles along their local light
//! cones.
//!
//! At every step each particle is displaced by `(ε cosh α_i, ε sinh α_i)`
//! where `tanh α_i` is its current three-velocity, i.e. by `dv = ε e^{α_i}`,
//! `du = ε e^{−α_i}` in null coordinates. Both particles share the same `ε`,
//! which is what coordinates the points on the two world lines without
//! reference to any frame's simultaneity.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::fmt;
use std::str::FromStr;

use crate::error::PhysicsError;
use crate::minkowski::proper_step;
use crate::stress_energy::{flows_at, TimelikeFlow};
use crate::wavefield::{ConfigPoint, Particle, WaveModel};

/// Two records closer than this (max norm) count as the same configuration point.
pub const COINCIDENCE_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Scheme {
    Euler,
    #[default]
    Midpoint,
}

impl Scheme {
    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::Euler => "euler",
            Scheme::Midpoint => "midpoint",
        }
    }

    /// Global order of accuracy in `ε`.
    pub fn order(self) -> f64 {
        match self {
            Scheme::Euler => 1.0,
            Scheme::Midpoint => 2.0,
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scheme {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "euler" => Ok(Scheme::Euler),
            "midpoint" => Ok(Scheme::Midpoint),
            other => Err(format!("unknown scheme `{other}` (expected euler or midpoint)")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Termination {
    Completed,
    NodeAbort,
    DegenerateAbort,
    BoundaryAbort,
}

impl Termination {
    pub fn from_error(e: &PhysicsError) -> Self {
        match e {
            PhysicsError::NearNode { .. } => Termination::NodeAbort,
            PhysicsError::OutsideWell { .. } => Termination::BoundaryAbort,
            _ => Termination::DegenerateAbort,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Termination::Completed => "completed",
            Termination::NodeAbort => "node_abort",
            Termination::DegenerateAbort => "degenerate_abort",
            Termination::BoundaryAbort => "boundary_abort",
        }
    }
}

impl fmt::Display for Termination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Termination {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        [
            Termination::Completed,
            Termination::NodeAbort,
            Termination::DegenerateAbort,
            Termination::BoundaryAbort,
        ]
        .into_iter()
        .find(|t| t.as_str() == s)
        .ok_or_else(|| format!("unknown termination `{s}`"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepRecord {
    /// Accumulated proper time `j·ε`.
    pub sigma: f64,
    pub q: ConfigPoint,
    pub v1: f64,
    pub v2: f64,
    pub lambda1: f64,
    pub lambda2: f64,
}

impl StepRecord {
    fn new(sigma: f64, q: ConfigPoint, flows: &[TimelikeFlow; 2]) -> Self {
        Self {
            sigma,
            q,
            v1: flows[0].v,
            v2: flows[1].v,
            lambda1: flows[0].lambda_time,
            lambda2: flows[1].lambda_time,
        }
    }

    pub fn velocity(&self, p: Particle) -> f64 {
        match p {
            Particle::First => self.v1,
            Particle::Second => self.v2,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub epsilon: f64,
    pub scheme: Scheme,
    pub records: Vec<StepRecord>,
    pub termination: Termination,
}

impl Trajectory {
    pub fn first(&self) -> &StepRecord {
        &self.records[0]
    }

    pub fn last(&self) -> &StepRecord {
        self.records.last().expect("trajectories are never empty")
    }

    /// Number of completed steps.
    pub fn steps(&self) -> usize {
        self.records.len() - 1
    }

    /// Worst relative violation of `Δt_i² − Δz_i² = ε²` over all steps.
    pub fn proper_time_violation(&self) -> f64 {
        let e2 = self.epsilon * self.epsilon;
        self.records
            .windows(2)
            .flat_map(|w| {
                Particle::BOTH.map(|p| {
                    let d = w[1].q.event(p) - w[0].q.event(p);
                    ((d.t * d.t - d.z * d.z) - e2).abs() / e2
                })
            })
            .fold(0.0, f64::max)
    }
}

fn displace(
    q: &ConfigPoint,
    flows: &[TimelikeFlow; 2],
    epsilon: f64,
    sign: f64,
) -> Result<ConfigPoint, PhysicsError> {
    let mut out = *q;
    for p in Particle::BOTH {
        let s = proper_step(flows[p.index()].v, epsilon)?;
        out = out.displaced(p, s.displacement().scale(sign));
    }
    Ok(out)
}

/// One step from `q`, given the flows already evaluated there. `sign = −1`
/// runs the same scheme backwards in proper time.
fn advance<M: WaveModel + ?Sized>(
    model: &M,
    q: &ConfigPoint,
    flows: &[TimelikeFlow; 2],
    epsilon: f64,
    sign: f64,
    scheme: Scheme,
) -> Result<ConfigPoint, PhysicsError> {
    let next = match scheme {
        Scheme::Euler => displace(q, flows, epsilon, sign)?,
        Scheme::Midpoint => {
            let half = displace(q, flows, 0.5 * epsilon, sign)?;
            model.check_domain(&half)?;
            let mid_flows = flows_at(model, &half)?;
            displace(q, &mid_flows, epsilon, sign)?
        }
    };
    model.check_domain(&next)?;
    Ok(next)
}

fn check_step(epsilon: f64) -> Result<(), PhysicsError> {
    if epsilon > 0.0 && epsilon.is_finite() {
        Ok(())
    } else {
        Err(PhysicsError::InvalidArgument("proper-time step must be positive"))
    }
}

/// Advances both particles by the proper time `epsilon`.
pub fn step<M: WaveModel + ?Sized>(
    model: &M,
    q: &ConfigPoint,
    epsilon: f64,
    scheme: Scheme,
) -> Result<ConfigPoint, PhysicsError> {
    check_step(epsilon)?;
    model.check_domain(q)?;
    let flows = flows_at(model, q)?;
    advance(model, q, &flows, epsilon, 1.0, scheme)
}

/// Integrates `n_steps` equal proper-time steps from `q0`.
///
/// Fails only if `q0` itself is unusable; a failure later on truncates the
/// trajectory and is reported through [`Trajectory::termination`].
pub fn integrate<M: WaveModel + ?Sized>(
    model: &M,
    q0: &ConfigPoint,
    epsilon: f64,
    n_steps: usize,
    scheme: Scheme,
) -> Result<Trajectory, PhysicsError> {
    check_step(epsilon)?;
    if n_steps == 0 {
        return Err(PhysicsError::InvalidArgument("at least one step is required"));
    }
    if !q0.is_finite() {
        return Err(PhysicsError::InvalidArgument("initial point is not finite"));
    }
    model.check_domain(q0)?;
    let mut flows = flows_at(model, q0)?;
    let mut records = Vec::with_capacity(n_steps + 1);
    records.push(StepRecord::new(0.0, *q0, &flows));
    let mut q = *q0;
    let mut termination = Termination::Completed;
    for j in 1..=n_steps {
        let next = advance(model, &q, &flows, epsilon, 1.0, scheme)
            .and_then(|next| flows_at(model, &next).map(|f| (next, f)));
        match next {
            Ok((next, f)) => {
                q = next;
                flows = f;
                records.push(StepRecord::new(j as f64 * epsilon, q, &flows));
            }
            Err(e) => {
                termination = Termination::from_error(&e);
                break;
            }
        }
    }
    Ok(Trajectory {
        epsilon,
        scheme,
        records,
        termination,
    })
}

/// Retraces a completed trajectory backwards from its final point with the
/// same scheme and step, returning the largest max-norm deviation from the
/// forward records.
pub fn reverse_check<M: WaveModel + ?Sized>(model: &M, traj: &Trajectory) -> Result<f64, PhysicsError> {
    if traj.termination != Termination::Completed {
        return Err(PhysicsError::InvalidArgument("reverse check needs a completed trajectory"));
    }
    let n = traj.steps();
    let mut q = traj.last().q;
    let mut deviation: f64 = 0.0;
    for k in 1..=n {
        let flows = flows_at(model, &q)?;
        q = advance(model, &q, &flows, traj.epsilon, -1.0, traj.scheme)?;
        deviation = deviation.max(q.max_abs_diff(&traj.records[n - k].q));
    }
    Ok(deviation)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Weighting {
    #[default]
    Uniform,
    /// Density proportional to the product of the particles' timelike eigenvalues.
    Eigenvalue,
}

impl Weighting {
    pub fn as_str(self) -> &'static str {
        match self {
            Weighting::Uniform => "uniform",
            Weighting::Eigenvalue => "eigenvalue",
        }
    }
}

impl fmt::Display for Weighting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Weighting {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "uniform" => Ok(Weighting::Uniform),
            "eigenvalue" => Ok(Weighting::Eigenvalue),
            other => Err(format!("unknown weighting `{other}` (expected uniform or eigenvalue)")),
        }
    }
}

/// `λ₁ λ₂` on the hyperplane, or zero where the flow is undefined.
pub fn eigenvalue_weight<M: WaveModel + ?Sized>(model: &M, q: &ConfigPoint) -> f64 {
    match flows_at(model, q) {
        Ok([a, b]) => (a.lambda_time * b.lambda_time).max(0.0),
        Err(_) => 0.0,
    }
}

const BOUND_GRID: usize = 128;
const BOUND_MARGIN: f64 = 1.5;

fn weight_bound<M: WaveModel + ?Sized>(model: &M, width: f64) -> f64 {
    let cell = width / BOUND_GRID as f64;
    (0..BOUND_GRID)
        .flat_map(|a| (0..BOUND_GRID).map(move |b| (a, b)))
        .map(|(a, b)| {
            let q = ConfigPoint::new((a as f64 + 0.5) * cell, 0.0, (b as f64 + 0.5) * cell, 0.0);
            eigenvalue_weight(model, &q)
        })
        .fold(0.0, f64::max)
        * BOUND_MARGIN
}

fn open_uniform(rng: &mut ChaCha8Rng, width: f64) -> f64 {
    loop {
        let z = rng.gen_range(0.0..width);
        if z > 0.0 {
            return z;
        }
    }
}

/// Draws `count` points `(z1, 0, z2, 0)` with `z_i ∈ (0, width)`.
///
/// The eigenvalue weighting uses rejection sampling against a bound taken
/// from a grid scan of `λ₁ λ₂` (times a safety margin); points where the
/// flow is undefined are never accepted.
pub fn sample_hyperplane<M: WaveModel + ?Sized>(
    model: &M,
    width: f64,
    count: usize,
    weighting: Weighting,
    seed: u64,
) -> Result<Vec<ConfigPoint>, PhysicsError> {
    if count == 0 {
        return Err(PhysicsError::InvalidArgument("sample count must be at least 1"));
    }
    if !(width > 0.0 && width.is_finite()) {
        return Err(PhysicsError::InvalidArgument("well width must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw = |rng: &mut ChaCha8Rng| {
        ConfigPoint::new(open_uniform(rng, width), 0.0, open_uniform(rng, width), 0.0)
    };
    match weighting {
        Weighting::Uniform => Ok((0..count).map(|_| draw(&mut rng)).collect()),
        Weighting::Eigenvalue => {
            let bound = weight_bound(model, width);
            if !(bound > 0.0) {
                return Err(PhysicsError::SamplingExhausted { attempts: 0 });
            }
            let budget = 1000 * count + 10_000;
            let mut out = Vec::with_capacity(count);
            for _ in 0..budget {
                let q = draw(&mut rng);
                let u: f64 = rng.gen();
                if u * bound < eigenvalue_weight(model, &q) {
                    out.push(q);
                    if out.len() == count {
                        return Ok(out);
                    }
                }
            }
            Err(PhysicsError::SamplingExhausted { attempts: budget })
        }
    }
}

/// Integrates every member independently (in parallel), preserving order.
pub fn integrate_ensemble<M: WaveModel + ?Sized>(
    model: &M,
    points: &[ConfigPoint],
    epsilon: f64,
    n_steps: usize,
    scheme: Scheme,
) -> Vec<Result<Trajectory, PhysicsError>> {
    points
        .par_iter()
        .map(|q| integrate(model, q, epsilon, n_steps, scheme))
        .collect()
}

/// First pair of trajectories that share a configuration record at equal
/// proper time, as `(a, b, step)`.
pub fn first_shared_record(trajectories: &[Trajectory]) -> Option<(usize, usize, usize)> {
    for a in 0..trajectories.len() {
        for b in a + 1..trajectories.len() {
            let (ra, rb) = (&trajectories[a].records, &trajectories[b].records);
            for (j, (x, y)) in ra.iter().zip(rb).enumerate() {
                if x.q.max_abs_diff(&y.q) <= COINCIDENCE_TOLERANCE {
                    return Some((a, b, j));
                }
            }
        }
    }
    None
}
