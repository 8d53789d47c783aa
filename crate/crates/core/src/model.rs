//! Physical parameters and the unit frames used by every solver.
//!
//! A frame with scale exponent `tau` and base `rho` rescales lengths by
//! `rho^tau`, boson momenta by `rho^(-2 tau)` and energies by `rho^(-2 tau)`.

use serde::Serialize;
use std::f64::consts::PI;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelParams {
    pub e: f64,
    pub z: f64,
    pub m: f64,
    pub kappa: f64,
    pub lambda: f64,
    pub alpha: f64,
}

impl ModelParams {
    pub fn new(e: f64, z: f64, m: f64, kappa: f64, lambda: f64) -> Result<Self> {
        if !e.is_finite() {
            return Err(Error::InvalidParameter(format!("charge e = {e} is not finite")));
        }
        if !(z > 0.0) || !z.is_finite() {
            return Err(Error::InvalidParameter(format!("Z = {z} must be positive")));
        }
        if !(m > 0.0) || !m.is_finite() {
            return Err(Error::InvalidParameter(format!("m = {m} must be positive")));
        }
        if !(kappa > 0.0) {
            return Err(Error::InvalidParameter(format!("kappa = {kappa} must be positive")));
        }
        if !(kappa < lambda) || !lambda.is_finite() {
            return Err(Error::CutoffOrder { kappa, lambda });
        }
        Ok(Self { e, z, m, kappa, lambda, alpha: e * e / (4.0 * PI) })
    }

    /// Coulomb strength `alpha Z = e^2 Z / 4 pi`.
    pub fn alpha_z(&self) -> f64 {
        self.alpha * self.z
    }

    /// Analytic hydrogen ground energy `-(alpha Z)^2 / 2` in relativistic units.
    pub fn atomic_energy(&self) -> f64 {
        -0.5 * self.alpha_z() * self.alpha_z()
    }
}

/// Validated constructor with the argument order used on the command line.
pub fn make_params(e: f64, z: f64, m: f64, kappa: f64, lambda: f64) -> Result<ModelParams> {
    ModelParams::new(e, z, m, kappa, lambda)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FrameMode {
    /// `rho = alpha Z lambda1`.
    Atomic,
    /// `rho = e^2`, with `lambda1 = 4 pi / Z`.
    ChargeSquared,
    /// Unscaled relativistic units, `rho = 1`.
    Identity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScaleFrame {
    pub tau: f64,
    pub lambda1: f64,
    pub rho: f64,
    pub mode: FrameMode,
}

impl ScaleFrame {
    pub fn identity() -> Self {
        Self { tau: 0.0, lambda1: 1.0, rho: 1.0, mode: FrameMode::Identity }
    }

    pub fn atomic(params: &ModelParams, tau: f64, lambda1: f64) -> Result<Self> {
        if !(lambda1 > 0.0) {
            return Err(Error::InvalidParameter(format!("lambda1 = {lambda1} must be positive")));
        }
        let rho = params.alpha_z() * lambda1;
        if !(rho > 0.0) {
            return Err(Error::OutOfDomain(
                "rho = alpha Z lambda1 vanishes; the atomic frame needs e != 0".into(),
            ));
        }
        Ok(Self { tau, lambda1, rho, mode: FrameMode::Atomic })
    }

    pub fn charge_squared(params: &ModelParams, tau: f64) -> Result<Self> {
        let rho = params.e * params.e;
        if !(rho > 0.0) {
            return Err(Error::OutOfDomain("rho = e^2 vanishes at e = 0".into()));
        }
        Ok(Self { tau, lambda1: 4.0 * PI / params.z, rho, mode: FrameMode::ChargeSquared })
    }

    /// Frame used by the ground-state solvers: atomic units (`tau = 1`,
    /// `lambda1 = 1`, Bohr radius 1) when the Coulomb strength is nonzero,
    /// relativistic units otherwise.
    pub fn solver(params: &ModelParams) -> Self {
        Self::atomic(params, 1.0, 1.0).unwrap_or_else(|_| Self::identity())
    }

    /// `r(s) = rho^s`.
    pub fn r_of(&self, s: f64) -> f64 {
        if s == 0.0 {
            1.0
        } else {
            self.rho.powf(s)
        }
    }

    pub fn scale_energy(&self, energy: f64, direction: Direction) -> f64 {
        match direction {
            Direction::Forward => energy * self.r_of(-2.0 * self.tau),
            Direction::Inverse => energy * self.r_of(2.0 * self.tau),
        }
    }

    pub fn scale_length(&self, x: f64, direction: Direction) -> f64 {
        match direction {
            Direction::Forward => x * self.r_of(self.tau),
            Direction::Inverse => x * self.r_of(-self.tau),
        }
    }

    pub fn scale_momentum(&self, k: f64, direction: Direction) -> f64 {
        match direction {
            Direction::Forward => k * self.r_of(-2.0 * self.tau),
            Direction::Inverse => k * self.r_of(2.0 * self.tau),
        }
    }

    /// Coulomb coefficient in this frame: the potential is `-coulomb / |x|`.
    pub fn coulomb(&self, params: &ModelParams) -> f64 {
        params.alpha_z() * self.r_of(-self.tau)
    }
}

/// Energy conversion between relativistic units and `frame`.
pub fn scale_energy(frame: &ScaleFrame, energy: f64, direction: Direction) -> f64 {
    frame.scale_energy(energy, direction)
}
