//! 1+1 Minkowski geometry with signature (+, −).
//!
//! Contravariant vectors are [`FourVector`]s, coordinate gradients are
//! [`Covector`]s. Light-cone coordinates follow `v = t + z`, `u = t − z`.
//!
//! Boosts are passive: [`boost`] with a positive rapidity re-coordinatizes
//! space-time so that a particle at rest in the old frame moves with
//! velocity `−tanh α` in the new one.

use crate::error::PhysicsError;

/// Velocities with `|v| >= 1 - VELOCITY_GUARD` are rejected as lightlike.
pub const VELOCITY_GUARD: f64 = 1e-9;

/// Contravariant 2-vector `(t, z)` in natural units.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct FourVector {
    pub t: f64,
    pub z: f64,
}

impl FourVector {
    pub const fn new(t: f64, z: f64) -> Self {
        Self { t, z }
    }

    /// Minkowski norm `t² − z²`.
    pub fn norm2(&self) -> f64 {
        minkowski_dot(*self, *self)
    }

    pub fn lower(&self) -> Covector {
        Covector::new(self.t, -self.z)
    }

    pub fn scale(&self, c: f64) -> Self {
        Self::new(c * self.t, c * self.z)
    }

    /// Light-cone components `(u, v) = (t − z, t + z)`.
    pub fn light_cone(&self) -> (f64, f64) {
        (self.t - self.z, self.t + self.z)
    }

    pub fn is_finite(&self) -> bool {
        self.t.is_finite() && self.z.is_finite()
    }
}

impl std::ops::Add for FourVector {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::new(self.t + rhs.t, self.z + rhs.z)
    }
}

impl std::ops::Sub for FourVector {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.t - rhs.t, self.z - rhs.z)
    }
}

/// Covariant components `(∂_t, ∂_z)` of a gradient.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Covector {
    pub t: f64,
    pub z: f64,
}

impl Covector {
    pub const fn new(t: f64, z: f64) -> Self {
        Self { t, z }
    }

    pub fn raise(&self) -> FourVector {
        FourVector::new(self.t, -self.z)
    }

    /// `g^{μν} a_μ b_ν`.
    pub fn dot(&self, other: &Covector) -> f64 {
        self.t * other.t - self.z * other.z
    }
}

/// `g_{μν} a^μ b^ν` with `g = diag(+1, −1)`.
pub fn minkowski_dot(a: FourVector, b: FourVector) -> f64 {
    a.t * b.t - a.z * b.z
}

/// Hyperbolic boost angle; `v = tanh α`.
#[derive(Clone, Copy, Debug, Default, PartialEq, PartialOrd)]
pub struct Rapidity(pub f64);

impl Rapidity {
    pub const ZERO: Rapidity = Rapidity(0.0);

    pub fn velocity(self) -> f64 {
        self.0.tanh()
    }

    pub fn inverse(self) -> Rapidity {
        Rapidity(-self.0)
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl std::ops::Add for Rapidity {
    type Output = Rapidity;
    fn add(self, rhs: Rapidity) -> Rapidity {
        Rapidity(self.0 + rhs.0)
    }
}

pub(crate) fn check_velocity(v: f64) -> Result<(), PhysicsError> {
    if !v.is_finite() || v.abs() >= 1.0 - VELOCITY_GUARD {
        return Err(PhysicsError::LightlikeVelocity(v));
    }
    Ok(())
}

/// `α = ½ ln((1+v)/(1−v))`, so that `e^α = √((1+v)/(1−v))`.
pub fn rapidity_from_velocity(v: f64) -> Result<Rapidity, PhysicsError> {
    check_velocity(v)?;
    Ok(Rapidity(0.5 * ((1.0 + v) / (1.0 - v)).ln()))
}

/// Passive boost `(t, z) ↦ (t cosh α − z sinh α, −t sinh α + z cosh α)`.
pub fn boost(p: FourVector, alpha: Rapidity) -> FourVector {
    let (sh, ch) = (alpha.0.sinh(), alpha.0.cosh());
    FourVector::new(p.t * ch - p.z * sh, -p.t * sh + p.z * ch)
}

/// Relativistic addition `(v + u) / (1 + v u)`.
pub fn velocity_addition(v: f64, u: f64) -> f64 {
    (v + u) / (1.0 + v * u)
}

/// Light-cone increments of a proper-time step `ε` taken in the rest frame
/// of a particle: `dv = ε e^α`, `du = ε e^{−α}`, so `du·dv = ε²`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NullStep {
    pub du: f64,
    pub dv: f64,
    pub epsilon: f64,
}

/// A [`NullStep`] together with its frame-coordinate increments.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProperStep {
    pub null: NullStep,
    pub dt: f64,
    pub dz: f64,
}

impl ProperStep {
    pub fn displacement(&self) -> FourVector {
        FourVector::new(self.dt, self.dz)
    }
}

/// Proper-time step `ε` for a particle moving with velocity `v`.
pub fn proper_step(v: f64, epsilon: f64) -> Result<ProperStep, PhysicsError> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(PhysicsError::InvalidArgument("proper-time step must be positive"));
    }
    let alpha = rapidity_from_velocity(v)?.0;
    Ok(ProperStep {
        null: NullStep {
            du: epsilon * (-alpha).exp(),
            dv: epsilon * alpha.exp(),
            epsilon,
        },
        dt: epsilon * alpha.cosh(),
        dz: epsilon * alpha.sinh(),
    })
}
