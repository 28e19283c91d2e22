//! Multi-time two-particle wave functions on configuration space-time.
//!
//! A [`WaveModel`] evaluates `Ψ(z1, t1, z2, t2)` together with its analytic
//! first derivatives. The built-in family is made of stationary
//! Klein-Gordon modes of a box of width `L`; each particle sits in its own
//! well (the wells are separated along an axis that never enters the wave
//! function, so it is not represented here).

use num_complex::Complex64;
use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::PhysicsError;
use crate::minkowski::{boost, Covector, FourVector, Rapidity};

/// `|Ψ|²` below `NODE_FLOOR_RELATIVE · (2/L)²` is treated as a node.
pub const NODE_FLOOR_RELATIVE: f64 = 1e-12;

pub type ComplexAmplitude = Complex64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Particle {
    First,
    Second,
}

impl Particle {
    pub const BOTH: [Particle; 2] = [Particle::First, Particle::Second];

    pub fn index(self) -> usize {
        match self {
            Particle::First => 0,
            Particle::Second => 1,
        }
    }

    pub fn number(self) -> usize {
        self.index() + 1
    }

    pub fn other(self) -> Particle {
        match self {
            Particle::First => Particle::Second,
            Particle::Second => Particle::First,
        }
    }
}

/// A point `(z1, t1, z2, t2)` of the two-particle configuration space-time.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ConfigPoint {
    pub z1: f64,
    pub t1: f64,
    pub z2: f64,
    pub t2: f64,
}

impl ConfigPoint {
    pub const fn new(z1: f64, t1: f64, z2: f64, t2: f64) -> Self {
        Self { z1, t1, z2, t2 }
    }

    /// The space-time event `(t, z)` of one particle.
    pub fn event(&self, p: Particle) -> FourVector {
        match p {
            Particle::First => FourVector::new(self.t1, self.z1),
            Particle::Second => FourVector::new(self.t2, self.z2),
        }
    }

    pub fn with_event(mut self, p: Particle, e: FourVector) -> Self {
        match p {
            Particle::First => {
                self.t1 = e.t;
                self.z1 = e.z;
            }
            Particle::Second => {
                self.t2 = e.t;
                self.z2 = e.z;
            }
        }
        self
    }

    pub fn displaced(self, p: Particle, d: FourVector) -> Self {
        let e = self.event(p) + d;
        self.with_event(p, e)
    }

    /// Applies the same passive boost to both particles' events.
    pub fn boosted(self, alpha: Rapidity) -> Self {
        Particle::BOTH
            .iter()
            .fold(self, |q, &p| q.with_event(p, boost(self.event(p), alpha)))
    }

    /// Swaps the two particles' coordinates.
    pub fn exchanged(self) -> Self {
        Self::new(self.z2, self.t2, self.z1, self.t1)
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.z1, self.t1, self.z2, self.t2]
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|x| x.is_finite())
    }

    /// Max-norm distance.
    pub fn max_abs_diff(&self, other: &ConfigPoint) -> f64 {
        self.to_array()
            .iter()
            .zip(other.to_array())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Value and analytic first derivatives of `Ψ` at one point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet {
    pub value: Complex64,
    /// `∂Ψ/∂t_i`, indexed by particle.
    pub d_t: [Complex64; 2],
    /// `∂Ψ/∂z_i`, indexed by particle.
    pub d_z: [Complex64; 2],
}

impl Jet {
    pub fn scale(&self, c: Complex64) -> Jet {
        Jet {
            value: c * self.value,
            d_t: [c * self.d_t[0], c * self.d_t[1]],
            d_z: [c * self.d_z[0], c * self.d_z[1]],
        }
    }
}

/// A multi-time two-particle wave function with analytic first derivatives.
pub trait WaveModel: Send + Sync {
    fn jet(&self, q: &ConfigPoint) -> Jet;

    fn amplitude(&self, q: &ConfigPoint) -> ComplexAmplitude {
        self.jet(q).value
    }

    /// Particle mass (both particles share it).
    fn mass(&self) -> f64;

    /// Threshold on `|Ψ|²` below which the guidance law is undefined.
    fn node_floor(&self) -> f64;

    /// Hard walls of the support region, if any.
    fn check_domain(&self, _q: &ConfigPoint) -> Result<(), PhysicsError> {
        Ok(())
    }
}

impl<M: WaveModel + ?Sized> WaveModel for &M {
    fn jet(&self, q: &ConfigPoint) -> Jet {
        (**self).jet(q)
    }
    fn mass(&self) -> f64 {
        (**self).mass()
    }
    fn node_floor(&self) -> f64 {
        (**self).node_floor()
    }
    fn check_domain(&self, q: &ConfigPoint) -> Result<(), PhysicsError> {
        (**self).check_domain(q)
    }
}

impl<M: WaveModel + ?Sized> WaveModel for Box<M> {
    fn jet(&self, q: &ConfigPoint) -> Jet {
        (**self).jet(q)
    }
    fn mass(&self) -> f64 {
        (**self).mass()
    }
    fn node_floor(&self) -> f64 {
        (**self).node_floor()
    }
    fn check_domain(&self, q: &ConfigPoint) -> Result<(), PhysicsError> {
        (**self).check_domain(q)
    }
}

impl<M: WaveModel + ?Sized> WaveModel for Arc<M> {
    fn jet(&self, q: &ConfigPoint) -> Jet {
        (**self).jet(q)
    }
    fn mass(&self) -> f64 {
        (**self).mass()
    }
    fn node_floor(&self) -> f64 {
        (**self).node_floor()
    }
    fn check_domain(&self, q: &ConfigPoint) -> Result<(), PhysicsError> {
        (**self).check_domain(q)
    }
}

/// Stationary box mode `√(2/L) sin(nπz/L) e^{iωt}`, `ω = √((nπ/L)² + m²)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoxMode {
    n: u32,
    width: f64,
    mass: f64,
    omega: f64,
}

impl BoxMode {
    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn wavenumber(&self) -> f64 {
        f64::from(self.n) * PI / self.width
    }

    /// Same spatial profile with a different frequency. The result no longer
    /// solves the Klein-Gordon equation unless `omega` is the dispersion value;
    /// it exists as a negative control for residual checks.
    pub fn with_omega(mut self, omega: f64) -> Self {
        self.omega = omega;
        self
    }

    /// `(φ, ∂_t φ, ∂_z φ)` at the event `(t, z)`.
    pub fn eval(&self, z: f64, t: f64) -> (Complex64, Complex64, Complex64) {
        let k = self.wavenumber();
        let norm = (2.0 / self.width).sqrt();
        let phase = Complex64::cis(self.omega * t);
        let value = phase * (norm * (k * z).sin());
        let d_z = phase * (norm * k * (k * z).cos());
        let d_t = Complex64::new(0.0, self.omega) * value;
        (value, d_t, d_z)
    }

    fn node_floor(&self) -> f64 {
        NODE_FLOOR_RELATIVE * (2.0 / self.width).powi(2)
    }
}

pub fn box_mode(n: u32, width: f64, mass: f64) -> Result<BoxMode, PhysicsError> {
    if n == 0 {
        return Err(PhysicsError::InvalidArgument("mode index must be at least 1"));
    }
    if !(width > 0.0 && width.is_finite()) {
        return Err(PhysicsError::InvalidArgument("well width must be positive"));
    }
    if !(mass >= 0.0 && mass.is_finite()) {
        return Err(PhysicsError::InvalidArgument("mass must be non-negative"));
    }
    let k = f64::from(n) * PI / width;
    Ok(BoxMode {
        n,
        width,
        mass,
        omega: (k * k + mass * mass).sqrt(),
    })
}

fn check_well(width: f64, q: &ConfigPoint) -> Result<(), PhysicsError> {
    for p in Particle::BOTH {
        let z = q.event(p).z;
        if !(z > 0.0 && z < width) {
            return Err(PhysicsError::OutsideWell {
                particle: p.number(),
                z,
            });
        }
    }
    Ok(())
}

/// Symmetrized pair `Ψ = a(1) b(2) + b(1) a(2)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EntangledPair {
    a: BoxMode,
    b: BoxMode,
}

impl EntangledPair {
    pub fn states(&self) -> (BoxMode, BoxMode) {
        (self.a, self.b)
    }
}

pub fn entangled_pair(a: BoxMode, b: BoxMode) -> Result<EntangledPair, PhysicsError> {
    if a.width != b.width || a.mass != b.mass {
        return Err(PhysicsError::InvalidArgument(
            "entangled states must share well width and mass",
        ));
    }
    Ok(EntangledPair { a, b })
}

/// The two-particle model of two equal-mass bosons sharing one ground and
/// one first-excited box state.
pub fn ground_excited_pair(width: f64, mass: f64) -> Result<EntangledPair, PhysicsError> {
    entangled_pair(box_mode(1, width, mass)?, box_mode(2, width, mass)?)
}

impl WaveModel for EntangledPair {
    fn jet(&self, q: &ConfigPoint) -> Jet {
        let (a1, a1t, a1z) = self.a.eval(q.z1, q.t1);
        let (b1, b1t, b1z) = self.b.eval(q.z1, q.t1);
        let (a2, a2t, a2z) = self.a.eval(q.z2, q.t2);
        let (b2, b2t, b2z) = self.b.eval(q.z2, q.t2);
        Jet {
            value: a1 * b2 + b1 * a2,
            d_t: [a1t * b2 + b1t * a2, a1 * b2t + b1 * a2t],
            d_z: [a1z * b2 + b1z * a2, a1 * b2z + b1 * a2z],
        }
    }

    fn mass(&self) -> f64 {
        self.a.mass
    }

    fn node_floor(&self) -> f64 {
        self.a.node_floor()
    }

    fn check_domain(&self, q: &ConfigPoint) -> Result<(), PhysicsError> {
        check_well(self.a.width, q)
    }
}

/// Unentangled `a(1) b(2)`, or a single-particle mode `a(1)` when `second`
/// is absent (particle 2 then carries no amplitude or gradient).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProductState {
    pub first: BoxMode,
    pub second: Option<BoxMode>,
}

impl ProductState {
    pub fn single(mode: BoxMode) -> Self {
        Self {
            first: mode,
            second: None,
        }
    }

    pub fn pair(first: BoxMode, second: BoxMode) -> Self {
        Self {
            first,
            second: Some(second),
        }
    }
}

impl WaveModel for ProductState {
    fn jet(&self, q: &ConfigPoint) -> Jet {
        let (a, at, az) = self.first.eval(q.z1, q.t1);
        let zero = Complex64::new(0.0, 0.0);
        let (b, bt, bz) = match self.second {
            Some(m) => m.eval(q.z2, q.t2),
            None => (Complex64::new(1.0, 0.0), zero, zero),
        };
        Jet {
            value: a * b,
            d_t: [at * b, a * bt],
            d_z: [az * b, a * bz],
        }
    }

    fn mass(&self) -> f64 {
        self.first.mass
    }

    fn node_floor(&self) -> f64 {
        match self.second {
            Some(_) => self.first.node_floor(),
            None => NODE_FLOOR_RELATIVE * 2.0 / self.first.width,
        }
    }

    fn check_domain(&self, q: &ConfigPoint) -> Result<(), PhysicsError> {
        match self.second {
            Some(_) => check_well(self.first.width, q),
            None if q.z1 > 0.0 && q.z1 < self.first.width => Ok(()),
            None => Err(PhysicsError::OutsideWell {
                particle: 1,
                z: q.z1,
            }),
        }
    }
}

/// `c · Ψ` for a constant complex `c`.
#[derive(Clone, Debug)]
pub struct Scaled<M> {
    pub inner: M,
    pub factor: Complex64,
}

impl<M: WaveModel> WaveModel for Scaled<M> {
    fn jet(&self, q: &ConfigPoint) -> Jet {
        self.inner.jet(q).scale(self.factor)
    }

    fn mass(&self) -> f64 {
        self.inner.mass()
    }

    fn node_floor(&self) -> f64 {
        self.inner.node_floor() * self.factor.norm_sqr()
    }

    fn check_domain(&self, q: &ConfigPoint) -> Result<(), PhysicsError> {
        self.inner.check_domain(q)
    }
}

/// The scalar field seen from a boosted frame: `Ψ′(q′) = Ψ(Λ⁻¹ q′)`.
#[derive(Clone, Debug)]
pub struct Boosted<M> {
    pub inner: M,
    pub alpha: Rapidity,
}

pub fn boosted<M: WaveModel>(model: M, alpha: Rapidity) -> Boosted<M> {
    Boosted {
        inner: model,
        alpha,
    }
}

impl<M: WaveModel> WaveModel for Boosted<M> {
    fn jet(&self, q: &ConfigPoint) -> Jet {
        let rest = q.boosted(self.alpha.inverse());
        let j = self.inner.jet(&rest);
        // Chain rule with the constant Jacobian of Λ⁻¹.
        let (sh, ch) = (self.alpha.0.sinh(), self.alpha.0.cosh());
        let mut out = j;
        for i in 0..2 {
            out.d_t[i] = j.d_t[i] * ch + j.d_z[i] * sh;
            out.d_z[i] = j.d_t[i] * sh + j.d_z[i] * ch;
        }
        out
    }

    fn mass(&self) -> f64 {
        self.inner.mass()
    }

    fn node_floor(&self) -> f64 {
        self.inner.node_floor()
    }

    fn check_domain(&self, q: &ConfigPoint) -> Result<(), PhysicsError> {
        self.inner.check_domain(&q.boosted(self.alpha.inverse()))
    }
}

/// Log-polar decomposition `Ψ = exp(P + iS)` and its per-particle gradients.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogDerivatives {
    pub p: f64,
    pub s: f64,
    /// `∂_μ P` for each particle, lower index.
    pub p_grad: [Covector; 2],
    /// `∂_μ S` for each particle, lower index.
    pub s_grad: [Covector; 2],
}

impl LogDerivatives {
    pub fn amplitude2(&self) -> f64 {
        (2.0 * self.p).exp()
    }

    pub fn p_grad(&self, i: Particle) -> Covector {
        self.p_grad[i.index()]
    }

    pub fn s_grad(&self, i: Particle) -> Covector {
        self.s_grad[i.index()]
    }

    pub fn is_finite(&self) -> bool {
        self.p.is_finite()
            && self.s.is_finite()
            && self
                .p_grad
                .iter()
                .chain(&self.s_grad)
                .all(|g| g.t.is_finite() && g.z.is_finite())
    }
}

/// Evaluates the jet and rejects points inside the node floor.
pub fn node_free_jet<M: WaveModel + ?Sized>(model: &M, q: &ConfigPoint) -> Result<Jet, PhysicsError> {
    let jet = model.jet(q);
    let amplitude2 = jet.value.norm_sqr();
    let floor = model.node_floor();
    if !(amplitude2 >= floor) || !amplitude2.is_finite() {
        return Err(PhysicsError::NearNode { amplitude2, floor });
    }
    Ok(jet)
}

pub fn log_derivatives<M: WaveModel + ?Sized>(
    model: &M,
    q: &ConfigPoint,
) -> Result<LogDerivatives, PhysicsError> {
    let jet = node_free_jet(model, q)?;
    let split = |d: Complex64| d / jet.value;
    let mut p_grad = [Covector::default(); 2];
    let mut s_grad = [Covector::default(); 2];
    for i in 0..2 {
        let rt = split(jet.d_t[i]);
        let rz = split(jet.d_z[i]);
        p_grad[i] = Covector::new(rt.re, rz.re);
        s_grad[i] = Covector::new(rt.im, rz.im);
    }
    Ok(LogDerivatives {
        p: jet.value.norm().ln(),
        s: jet.value.arg(),
        p_grad,
        s_grad,
    })
}

pub(crate) fn shifted(q: &ConfigPoint, i: Particle, dt: f64, dz: f64) -> ConfigPoint {
    q.displaced(i, FourVector::new(dt, dz))
}

/// Finite-difference estimate of `(∂²_{t_i} − ∂²_{z_i} + m²) Ψ` built by
/// central-differencing the analytic first derivatives with step `h`.
pub fn kg_residual<M: WaveModel + ?Sized>(
    model: &M,
    q: &ConfigPoint,
    i: Particle,
    h: f64,
) -> Result<Complex64, PhysicsError> {
    if !(h > 0.0) {
        return Err(PhysicsError::InvalidArgument("difference step must be positive"));
    }
    let centre = node_free_jet(model, q)?;
    let k = i.index();
    let tp = node_free_jet(model, &shifted(q, i, h, 0.0))?;
    let tm = node_free_jet(model, &shifted(q, i, -h, 0.0))?;
    let zp = node_free_jet(model, &shifted(q, i, 0.0, h))?;
    let zm = node_free_jet(model, &shifted(q, i, 0.0, -h))?;
    let d2t = (tp.d_t[k] - tm.d_t[k]) / (2.0 * h);
    let d2z = (zp.d_z[k] - zm.d_z[k]) / (2.0 * h);
    let m = model.mass();
    Ok(d2t - d2z + centre.value * (m * m))
}

/// Declarative description of a built-in model.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelSpec {
    pub width: f64,
    pub mass: f64,
    pub modes: (u32, u32),
    pub rapidity: Option<Rapidity>,
}

impl Default for ModelSpec {
    fn default() -> Self {
        Self {
            width: PI,
            mass: 1.0,
            modes: (1, 2),
            rapidity: None,
        }
    }
}

impl ModelSpec {
    /// The symmetrized pair in the rest frame of the wells.
    pub fn rest_frame(&self) -> Result<EntangledPair, PhysicsError> {
        entangled_pair(
            box_mode(self.modes.0, self.width, self.mass)?,
            box_mode(self.modes.1, self.width, self.mass)?,
        )
    }

    /// The model as seen from the configured frame.
    pub fn build(&self) -> Result<Arc<dyn WaveModel>, PhysicsError> {
        let pair = self.rest_frame()?;
        Ok(match self.rapidity {
            Some(a) if a.0 != 0.0 => Arc::new(boosted(pair, a)),
            _ => Arc::new(pair),
        })
    }
}
