use thiserror::Error;

/// Failures of the guidance law and its geometric primitives.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum PhysicsError {
    #[error("velocity {0} is lightlike or faster")]
    LightlikeVelocity(f64),

    #[error("|psi|^2 = {amplitude2:e} is below the node floor {floor:e}")]
    NearNode { amplitude2: f64, floor: f64 },

    #[error("stress tensor has complex eigenvalues (discriminant {0:e})")]
    NoTimelikeFlow(f64),

    #[error("stress tensor eigenvectors are degenerate (discriminant {discriminant:e}, floor {floor:e})")]
    DegenerateFlow { discriminant: f64, floor: f64 },

    #[error("closed-form velocity is singular: P.S = {0:e}")]
    DegenerateTheta(f64),

    #[error("particle {particle} left the well at z = {z}")]
    OutsideWell { particle: usize, z: f64 },

    #[error("rejection sampling gave up after {attempts} attempts")]
    SamplingExhausted { attempts: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(&'static str),
}
