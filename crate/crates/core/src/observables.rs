//! Ground-state expectations: photon numbers, spatial moments and overlaps
//! with the decoupled atom-times-vacuum state.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{dot, C64};
use crate::model::Direction;
use crate::particle::{AtomicState, PositionFunction};
use crate::spectral::assemble::AssembledModel;
use crate::spectral::solve::GroundState;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhotonNumbers {
    pub total: f64,
    pub soft: f64,
    pub hard: f64,
}

/// `<N_f>`, `<N_f1>` (soft, `|k| < 1`) and `<N_f2>` (hard) of a unit vector.
pub fn photon_number(model: &AssembledModel, psi: &[C64]) -> PhotonNumbers {
    let (_, soft, hard) = model.basis.number_diagonals(&model.modes);
    let np = model.np;
    let (mut s, mut h) = (0.0, 0.0);
    for (f, block) in psi.chunks(np).enumerate() {
        let w: f64 = block.iter().map(|v| v.norm_sqr()).sum();
        s += soft[f] * w;
        h += hard[f] * w;
    }
    PhotonNumbers { total: s + h, soft: s, hard: h }
}

/// `<psi, f(x) (x) 1 psi>` with `f` evaluated at `scale * x` for grid point `x`.
///
/// `scale` converts grid coordinates to the units in which `f` is meant; use
/// [`relativistic_length_scale`] for the relativistic frame.
pub fn spatial_moment(model: &AssembledModel, psi: &[C64], f: PositionFunction, scale: f64) -> Result<f64> {
    let grid = model.grid.as_ref().ok_or_else(|| Error::InvalidParameter("model has no particle grid".into()))?;
    let np = model.np;
    let diag: Vec<f64> = (0..np)
        .map(|s| {
            let x = grid.point(s);
            f.eval([scale * x[0], scale * x[1], scale * x[2]]).re
        })
        .collect();
    if diag.iter().any(|v| !v.is_finite()) {
        return Err(Error::OutOfDomain(format!("{f:?} overflows on the grid")));
    }
    Ok(psi.iter().enumerate().map(|(i, v)| diag[i % np] * v.norm_sqr()).sum())
}

/// Factor taking working-frame lengths to relativistic units.
pub fn relativistic_length_scale(model: &AssembledModel) -> f64 {
    model.frame.scale_length(1.0, Direction::Inverse)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Overlaps {
    /// `|<psi_at (x) Omega, psi>|^2`.
    pub overlap_p: f64,
    /// `<psi, (1 - P_at) (x) P_Omega psi>`.
    pub overlap_q: f64,
    /// `<psi, 1 (x) P_Omega psi>`.
    pub vacuum_weight: f64,
}

/// Projections onto the atomic reference state and the Fock vacuum.
pub fn overlap_with_decoupled(model: &AssembledModel, psi: &[C64], atomic: &[C64]) -> Result<Overlaps> {
    let np = model.np;
    if atomic.len() != np {
        return Err(Error::InvalidParameter(format!("atomic state has {} points, grid has {np}", atomic.len())));
    }
    let vac = model
        .basis
        .index_of(&vec![0u8; model.modes.len()])
        .ok_or_else(|| Error::InvalidParameter("basis lacks the vacuum".into()))?;
    let block = &psi[vac * np..(vac + 1) * np];
    let vacuum_weight: f64 = block.iter().map(|v| v.norm_sqr()).sum();
    let overlap_p = dot(atomic, block).norm_sqr();
    Ok(Overlaps { overlap_p, overlap_q: vacuum_weight - overlap_p, vacuum_weight })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Moments {
    pub radius: f64,
    pub radius_squared: f64,
    pub log_three_plus: f64,
    /// `<exp(beta |x|)>` with `beta` recorded alongside.
    pub exp_beta: f64,
    pub beta: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct GroundStateReport {
    /// Energy in relativistic units.
    pub energy: f64,
    /// Energy in the solver frame.
    pub energy_frame: f64,
    pub residual: f64,
    pub n_f_total: f64,
    pub n_f_soft: f64,
    pub n_f_hard: f64,
    /// Relativistic-unit moments.
    pub moments: Moments,
    pub overlap_p: f64,
    pub overlap_q: f64,
    pub vacuum_weight: f64,
    /// `<1 (x) P_Omega> - (1 - <N_f>)`, nonnegative for every unit vector.
    pub markov_margin: f64,
    pub dimension: usize,
}

/// Exponential-moment rate `beta = beta_tilde e^2 Z / 4 pi` for a given decay
/// rate in atomic units.
pub fn beta_from_atomic(model: &AssembledModel, beta_tilde: f64) -> f64 {
    beta_tilde * model.params.alpha_z()
}

impl GroundStateReport {
    /// `beta_tilde` is the exponential rate in atomic units.
    pub fn new(model: &AssembledModel, gs: &GroundState, atomic: &AtomicState, beta_tilde: f64) -> Result<Self> {
        let psi = &gs.vector;
        let n = photon_number(model, psi);
        let scale = relativistic_length_scale(model);
        let beta = beta_from_atomic(model, beta_tilde);
        let moments = Moments {
            radius: spatial_moment(model, psi, PositionFunction::Radius, scale)?,
            radius_squared: spatial_moment(model, psi, PositionFunction::RadiusSquared, scale)?,
            log_three_plus: spatial_moment(model, psi, PositionFunction::LogThreePlus, scale)?,
            exp_beta: spatial_moment(model, psi, PositionFunction::Exp { beta }, scale)?,
            beta,
        };
        let o = overlap_with_decoupled(model, psi, &atomic.psi)?;
        Ok(Self {
            energy: gs.energy_relativistic,
            energy_frame: gs.energy,
            residual: gs.residual,
            n_f_total: n.total,
            n_f_soft: n.soft,
            n_f_hard: n.hard,
            moments,
            overlap_p: o.overlap_p,
            overlap_q: o.overlap_q,
            vacuum_weight: o.vacuum_weight,
            markov_margin: o.vacuum_weight - (1.0 - n.total),
            dimension: model.dim(),
        })
    }
}
