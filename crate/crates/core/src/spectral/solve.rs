//! Ground-state drivers: plain Lanczos, and a Feshbach reduction onto the
//! photon vacuum for models whose boson energies dwarf the particle scale.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{axpy, conjugate_gradient, dot, norm, normalize, C64, ZERO};
use crate::model::Direction;
use crate::particle::{atomic_ground, AtomicState};
use crate::spectral::assemble::{AssembledModel, Variant};
use crate::spectral::lanczos::{lanczos_ground, LanczosOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Auto,
    Lanczos,
    Schur,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolveOptions {
    pub tol: f64,
    pub maxit: usize,
    pub method: Method,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { tol: 1e-10, maxit: 20_000, method: Method::Auto }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GroundState {
    /// Energy in the model's working frame.
    pub energy: f64,
    /// Energy converted to relativistic units.
    pub energy_relativistic: f64,
    #[serde(skip)]
    pub vector: Vec<C64>,
    /// `||H psi - E psi||` for the unit vector.
    pub residual: f64,
    /// Residual target actually applied (see [`solve_ground`]).
    pub residual_target: f64,
    pub iterations: usize,
    pub method: Method,
    pub ritz_history: Vec<f64>,
}

/// Atomic reference state on the model grid: the discrete `H_at` ground state,
/// or the constant mode when the model has no Coulomb term.
pub fn reference_state(model: &AssembledModel, tol: f64) -> Result<AtomicState> {
    let grid = model.grid.as_ref().ok_or_else(|| Error::InvalidParameter("model has no particle grid".into()))?;
    let strength = match model.variant {
        Variant::Gross if model.params.e != 0.0 => model.frame.coulomb(&model.params),
        _ => 0.0,
    };
    atomic_ground(grid, strength, 0.5 * grid.h, tol)
}

fn particle_width(model: &AssembledModel) -> f64 {
    match &model.grid {
        Some(g) => {
            let kmax = std::f64::consts::PI / g.h;
            1.5 * kmax * kmax + model.potential.iter().fold(0.0f64, |m, v| m.max(v.abs()))
        }
        None => f64::INFINITY,
    }
}

/// Method picked by [`Method::Auto`]: the Feshbach reduction when every boson
/// energy exceeds the width of the particle spectrum, Lanczos otherwise.
pub fn auto_method(model: &AssembledModel) -> Method {
    let wmin = model.omega_frame.iter().cloned().fold(f64::INFINITY, f64::min);
    if model.grid.is_some() && model.params.e != 0.0 && wmin > particle_width(model) {
        Method::Schur
    } else {
        Method::Lanczos
    }
}

/// Ground state seeded with the reference state times the vacuum.
///
/// The Lanczos route stops at `||H psi - E psi|| <= tol`. The Feshbach route
/// stops at `tol * max(1, ||H_f psi||)`: its residual is dominated by the
/// boson block, whose entries are larger than the particle scale by the ratio
/// of the two energy scales.
pub fn solve_ground(model: &AssembledModel, opts: &SolveOptions) -> Result<GroundState> {
    let seed = match &model.grid {
        Some(_) => model.embed_vacuum(&reference_state(model, 1e-11)?.psi),
        None => model.embed_vacuum(&[C64::new(1.0, 0.0)]),
    };
    let method = match opts.method {
        Method::Auto => auto_method(model),
        m => m,
    };
    match method {
        Method::Schur => schur_ground(model, &seed[..model.np], opts),
        _ => {
            let out = lanczos_ground(
                |x, y| model.apply(x, y),
                &seed,
                &LanczosOptions { tol: opts.tol, maxit: opts.maxit, basis: 60 },
            )?;
            Ok(GroundState {
                energy: out.energy,
                energy_relativistic: model.frame.scale_energy(out.energy, Direction::Inverse),
                vector: out.vector,
                residual: out.residual,
                residual_target: opts.tol,
                iterations: out.iterations,
                method: Method::Lanczos,
                ritz_history: out.ritz_history,
            })
        }
    }
}

fn apply_pp(model: &AssembledModel, x: &[C64], y: &mut [C64]) {
    for (s, v) in y.iter_mut().enumerate() {
        *v = x[s] * model.potential[s];
    }
    if let Some(g) = &model.grid {
        g.add_kinetic(x, y);
    }
}

fn field_energy_norm(model: &AssembledModel, psi: &[C64]) -> f64 {
    let np = model.np;
    psi.iter().enumerate().map(|(i, v)| (model.field_energy[i / np] * v.norm()).powi(2)).sum::<f64>().sqrt()
}

/// Feshbach reduction onto the vacuum sector with a self-consistent energy.
///
/// Each sweep applies `H_eff(E) = H_PP - H_PQ (H_QQ - E)^(-1) H_QP` through a
/// Jacobi-preconditioned CG solve in the boson sector, then corrects the
/// vacuum component with a projected CG solve against `H_PP - E`.
pub fn schur_ground(model: &AssembledModel, seed_p: &[C64], opts: &SolveOptions) -> Result<GroundState> {
    let np = model.np;
    let n = model.dim();
    let mut psi_p = seed_p.to_vec();
    if normalize(&mut psi_p) == 0.0 {
        return Err(Error::InvalidParameter("zero seed".into()));
    }
    let mut hp = vec![ZERO; np];
    apply_pp(model, &psi_p, &mut hp);
    let mut energy = dot(&psi_p, &hp).re;
    let diag = model.diagonal_estimate();
    let wmin = model.omega_frame.iter().cloned().fold(f64::INFINITY, f64::min);
    let project_q = |v: &mut [C64]| v[..np].iter_mut().for_each(|c| *c = ZERO);
    let mut history = vec![energy];
    let mut matvecs = 0usize;
    let mut full = vec![ZERO; n];
    let mut hfull = vec![ZERO; n];
    for _sweep in 0..60 {
        // z = (H_QQ - E)^(-1) H_QP psi_P
        full.iter_mut().for_each(|v| *v = ZERO);
        full[..np].copy_from_slice(&psi_p);
        model.apply(&full, &mut hfull);
        matvecs += 1;
        let mut b = hfull.clone();
        project_q(&mut b);
        let pre: Vec<f64> = diag.iter().map(|d| (d - energy).max(0.5 * wmin)).collect();
        let cg = conjugate_gradient(
            |x, y| {
                model.apply(x, y);
                axpy(C64::new(-energy, 0.0), x, y);
            },
            &b,
            Some(&pre),
            project_q,
            1e-14,
            opts.maxit,
        )?;
        matvecs += cg.iterations + 1;
        let z = cg.x;
        // Assemble psi = psi_P - z and test the full residual.
        let mut psi = z.iter().map(|v| -v).collect::<Vec<_>>();
        psi[..np].copy_from_slice(&psi_p);
        let mut hpsi = vec![ZERO; n];
        model.apply(&psi, &mut hpsi);
        matvecs += 1;
        let nrm2 = dot(&psi, &psi).re;
        let rq = dot(&psi, &hpsi).re / nrm2;
        // H_eff psi_P is the P block of H psi.
        let heff: Vec<C64> = hpsi[..np].to_vec();
        let theta = dot(&psi_p, &heff).re;
        let mut resid = hpsi.clone();
        axpy(C64::new(-rq, 0.0), &psi, &mut resid);
        let residual = norm(&resid) / nrm2.sqrt();
        let target = opts.tol * field_energy_norm(model, &psi).max(nrm2.sqrt()) / nrm2.sqrt();
        history.push(theta);
        if residual <= target && (theta - energy).abs() <= opts.tol {
            let scale = 1.0 / nrm2.sqrt();
            psi.iter_mut().for_each(|v| *v *= scale);
            return Ok(GroundState {
                energy: rq,
                energy_relativistic: model.frame.scale_energy(rq, Direction::Inverse),
                vector: psi,
                residual,
                residual_target: target,
                iterations: matvecs,
                method: Method::Schur,
                ritz_history: history,
            });
        }
        // Correction (1 - PP*)(H_PP - theta)(1 - PP*) t = -(H_eff - theta) psi_P.
        let mut r: Vec<C64> = heff.clone();
        axpy(C64::new(-theta, 0.0), &psi_p, &mut r);
        r.iter_mut().for_each(|v| *v = -*v);
        let pp = psi_p.clone();
        let perp = |v: &mut [C64]| {
            let c = dot(&pp, v);
            axpy(-c, &pp, v);
        };
        let corr = conjugate_gradient(
            |x, y| {
                apply_pp(model, x, y);
                axpy(C64::new(-theta, 0.0), x, y);
            },
            &r,
            None,
            perp,
            1e-12,
            10 * np.max(100),
        );
        let t = match corr {
            Ok(c) => c.x,
            Err(Error::NoConvergence { .. }) | Err(Error::LinearSolve(_)) => r.clone(),
            Err(e) => return Err(e),
        };
        axpy(C64::new(1.0, 0.0), &t, &mut psi_p);
        normalize(&mut psi_p);
        energy = theta;
    }
    Err(Error::NoConvergence { what: "Feshbach ground state".into(), residual: f64::NAN })
}
