//! Per-particle stress-energy-momentum tensors and their timelike flows.
//!
//! For `Ψ = exp(P + iS)` the mixed tensor of particle `i` is
//!
//! ```text
//! T^μ_ν = |Ψ|² [m² − (P·P + S·S)] δ^μ_ν + 2 |Ψ|² (P^μ P_ν + S^μ S_ν)
//! ```
//!
//! built from the gradients with respect to that particle's coordinates
//! only. The future-pointing timelike eigenvector is the particle's
//! four-velocity; its eigenvalue is the flow density.

use crate::error::PhysicsError;
use crate::minkowski::{check_velocity, minkowski_dot, FourVector};
use crate::wavefield::{log_derivatives, shifted, ConfigPoint, LogDerivatives, Particle, WaveModel};

/// Relative floor on the characteristic discriminant, `· (tr T)²`.
pub const DISCRIMINANT_FLOOR: f64 = 1e-12;

/// Relative floor for `|2 P·S|` in the closed-form velocity.
pub const THETA_FLOOR: f64 = 1e-10;

/// Minimum `|w·w|` (for a Euclidean-unit eigenvector) to count as non-null.
const NULL_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    Time,
    Space,
}

impl Axis {
    pub const BOTH: [Axis; 2] = [Axis::Time, Axis::Space];
}

/// Mixed components `T^μ_ν` in 1+1 dimensions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StressTensor {
    /// `T^t_t`
    pub tt: f64,
    /// `T^t_z`
    pub tz: f64,
    /// `T^z_t`
    pub zt: f64,
    /// `T^z_z`
    pub zz: f64,
    /// `|Ψ|²` at the evaluation point.
    pub amplitude2: f64,
}

impl StressTensor {
    pub fn component(&self, upper: Axis, lower: Axis) -> f64 {
        match (upper, lower) {
            (Axis::Time, Axis::Time) => self.tt,
            (Axis::Time, Axis::Space) => self.tz,
            (Axis::Space, Axis::Time) => self.zt,
            (Axis::Space, Axis::Space) => self.zz,
        }
    }

    /// Fully covariant `T_{μν}` as `[[T_tt, T_tz], [T_zt, T_zz]]`.
    pub fn lowered(&self) -> [[f64; 2]; 2] {
        [[self.tt, self.tz], [-self.zt, -self.zz]]
    }

    pub fn trace(&self) -> f64 {
        self.tt + self.zz
    }

    pub fn determinant(&self) -> f64 {
        self.tt * self.zz - self.tz * self.zt
    }

    pub fn discriminant(&self) -> f64 {
        let d = self.tt - self.zz;
        d * d + 4.0 * self.tz * self.zt
    }

    pub fn apply(&self, w: FourVector) -> FourVector {
        FourVector::new(self.tt * w.t + self.tz * w.z, self.zt * w.t + self.zz * w.z)
    }

    /// Frobenius norm of the mixed components.
    pub fn norm(&self) -> f64 {
        (self.tt * self.tt + self.tz * self.tz + self.zt * self.zt + self.zz * self.zz).sqrt()
    }

    pub fn scaled(&self, c: f64) -> StressTensor {
        StressTensor {
            tt: c * self.tt,
            tz: c * self.tz,
            zt: c * self.zt,
            zz: c * self.zz,
            amplitude2: c * self.amplitude2,
        }
    }

    pub fn is_finite(&self) -> bool {
        [self.tt, self.tz, self.zt, self.zz].iter().all(|x| x.is_finite())
    }
}

/// Timelike eigenvector of a [`StressTensor`] and the derived velocity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimelikeFlow {
    /// Unit (`w·w = 1`), future-pointing four-velocity.
    pub w: FourVector,
    pub lambda_time: f64,
    pub lambda_space: f64,
    /// Three-velocity `w.z / w.t`.
    pub v: f64,
}

pub fn assemble(ld: &LogDerivatives, i: Particle, m: f64) -> StressTensor {
    let p = ld.p_grad(i);
    let s = ld.s_grad(i);
    let a2 = ld.amplitude2();
    let diag = a2 * (m * m - (p.dot(&p) + s.dot(&s)));
    let (pu, su) = (p.raise(), s.raise());
    let outer = |up_p: f64, up_s: f64, lo_p: f64, lo_s: f64| 2.0 * a2 * (up_p * lo_p + up_s * lo_s);
    StressTensor {
        tt: diag + outer(pu.t, su.t, p.t, s.t),
        tz: outer(pu.t, su.t, p.z, s.z),
        zt: outer(pu.z, su.z, p.t, s.t),
        zz: diag + outer(pu.z, su.z, p.z, s.z),
        amplitude2: a2,
    }
}

fn eigenvector(t: &StressTensor, lambda: f64) -> FourVector {
    let a = FourVector::new(t.tz, lambda - t.tt);
    let b = FourVector::new(lambda - t.zz, t.zt);
    let (na, nb) = (a.t.hypot(a.z), b.t.hypot(b.z));
    if na >= nb {
        a.scale(1.0 / na)
    } else {
        b.scale(1.0 / nb)
    }
}

/// Solves `T^μ_ν W^ν = λ W^μ` and returns the timelike branch.
pub fn eigenflows(t: &StressTensor) -> Result<TimelikeFlow, PhysicsError> {
    if !t.is_finite() {
        return Err(PhysicsError::InvalidArgument("stress tensor is not finite"));
    }
    let trace = t.trace();
    let disc = t.discriminant();
    let floor = DISCRIMINANT_FLOOR * trace * trace;
    if disc < 0.0 && -disc > floor {
        return Err(PhysicsError::NoTimelikeFlow(disc));
    }
    if disc <= floor {
        return Err(PhysicsError::DegenerateFlow {
            discriminant: disc,
            floor,
        });
    }
    let root = disc.sqrt();
    // Larger-magnitude root first; the other from the determinant.
    let big = 0.5 * (trace + root.copysign(trace));
    let small = if big != 0.0 { t.determinant() / big } else { -big };
    let (mut timelike, mut spacelike) = ((big, eigenvector(t, big)), (small, eigenvector(t, small)));
    if timelike.1.norm2() < spacelike.1.norm2() {
        std::mem::swap(&mut timelike, &mut spacelike);
    }
    let n_time = timelike.1.norm2();
    let n_space = spacelike.1.norm2();
    if !(n_time > NULL_TOLERANCE && n_space < -NULL_TOLERANCE) {
        return Err(PhysicsError::DegenerateFlow {
            discriminant: disc,
            floor,
        });
    }
    let mut w = timelike.1.scale(1.0 / n_time.sqrt());
    if w.t < 0.0 {
        w = w.scale(-1.0);
    }
    let v = w.z / w.t;
    check_velocity(v)?;
    Ok(TimelikeFlow {
        w,
        lambda_time: timelike.0,
        lambda_space: spacelike.0,
        v,
    })
}

/// Velocity from the closed form `v = (∂_z S + κ ∂_z P) / (−(∂_t S + κ ∂_t P))`
/// with `κ ∈ {e^θ, −e^{−θ}}` and `sinh θ = (P·P − S·S) / (2 P·S)`; the branch
/// whose flow is timelike is returned. Independent of [`eigenflows`].
pub fn velocity_closed_form(ld: &LogDerivatives, i: Particle) -> Result<f64, PhysicsError> {
    let p = ld.p_grad(i);
    let s = ld.s_grad(i);
    let (pp, ss, ps) = (p.dot(&p), s.dot(&s), p.dot(&s));
    if !((2.0 * ps).abs() >= THETA_FLOOR * (pp.abs() + ss.abs() + f64::MIN_POSITIVE)) {
        return Err(PhysicsError::DegenerateTheta(ps));
    }
    let sinh_theta = (pp - ss) / (2.0 * ps);
    let root = sinh_theta.hypot(1.0);
    let exp_theta = if sinh_theta >= 0.0 {
        sinh_theta + root
    } else {
        1.0 / (root - sinh_theta)
    };
    let mut found = None;
    for kappa in [exp_theta, -1.0 / exp_theta] {
        let flow_t = s.t + kappa * p.t;
        let flow_z = s.z + kappa * p.z;
        if flow_t * flow_t - flow_z * flow_z > 0.0 {
            found = Some(flow_z / -flow_t);
        }
    }
    let v = found.ok_or(PhysicsError::DegenerateTheta(ps))?;
    check_velocity(v)?;
    Ok(v)
}

/// The timelike flow of particle `i` at `q`.
pub fn flow_at<M: WaveModel + ?Sized>(
    model: &M,
    q: &ConfigPoint,
    i: Particle,
) -> Result<TimelikeFlow, PhysicsError> {
    let ld = log_derivatives(model, q)?;
    eigenflows(&assemble(&ld, i, model.mass()))
}

/// Flows of both particles from a single evaluation of `Ψ`.
pub fn flows_at<M: WaveModel + ?Sized>(
    model: &M,
    q: &ConfigPoint,
) -> Result<[TimelikeFlow; 2], PhysicsError> {
    let ld = log_derivatives(model, q)?;
    let m = model.mass();
    Ok([
        eigenflows(&assemble(&ld, Particle::First, m))?,
        eigenflows(&assemble(&ld, Particle::Second, m))?,
    ])
}

fn tensor_at<M: WaveModel + ?Sized>(
    model: &M,
    q: &ConfigPoint,
    i: Particle,
) -> Result<StressTensor, PhysicsError> {
    Ok(assemble(&log_derivatives(model, q)?, i, model.mass()))
}

/// Central-difference estimate of `∂_μ T^μ_ν` for particle `i`.
pub fn conservation_residual<M: WaveModel + ?Sized>(
    model: &M,
    q: &ConfigPoint,
    i: Particle,
    nu: Axis,
    h: f64,
) -> Result<f64, PhysicsError> {
    if !(h > 0.0) {
        return Err(PhysicsError::InvalidArgument("difference step must be positive"));
    }
    tensor_at(model, q, i)?;
    let tp = tensor_at(model, &shifted(q, i, h, 0.0), i)?;
    let tm = tensor_at(model, &shifted(q, i, -h, 0.0), i)?;
    let zp = tensor_at(model, &shifted(q, i, 0.0, h), i)?;
    let zm = tensor_at(model, &shifted(q, i, 0.0, -h), i)?;
    let d_t = (tp.component(Axis::Time, nu) - tm.component(Axis::Time, nu)) / (2.0 * h);
    let d_z = (zp.component(Axis::Space, nu) - zm.component(Axis::Space, nu)) / (2.0 * h);
    Ok(d_t + d_z)
}

/// `‖T w − λ w‖ / (‖T‖ ‖w‖)` for the timelike pair.
pub fn eigen_residual(t: &StressTensor, flow: &TimelikeFlow) -> f64 {
    let tw = t.apply(flow.w);
    let r = tw - flow.w.scale(flow.lambda_time);
    r.t.hypot(r.z) / (t.norm() * flow.w.t.hypot(flow.w.z))
}

/// Minkowski norms of the two (Euclidean-unit) eigenvectors, timelike first.
pub fn eigenvector_norms(t: &StressTensor, flow: &TimelikeFlow) -> (f64, f64) {
    let w = flow.w.scale(1.0 / flow.w.t.hypot(flow.w.z));
    let s = eigenvector(t, flow.lambda_space);
    (minkowski_dot(w, w), minkowski_dot(s, s))
}
