//! Hamiltonian variants on the particle-times-Fock basis.
//!
//! Vectors are Fock-major: component `(f, s)` sits at `f * n_p + s` where `f`
//! indexes the occupation basis and `s` the particle grid. The Hamiltonian is
//! applied matrix-free; [`AssembledModel::to_sparse`] builds the same operator
//! literally from triplet products for small models.
//!
//! Masses are scaled out (`m = 1`), so the dressed profile is `beta0`.

use serde::Serialize;

use crate::closedform::c_uv;
use crate::error::{Error, Result};
use crate::fockspace::{FockBasis, ModeGrid, MAX_DIMENSION};
use crate::linalg::{axpy, SparseOperator, C64, ONE, ZERO};
use crate::model::{ModelParams, ScaleFrame};
use crate::particle::PositionGrid;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// Gross-transformed Hamiltonian with the Coulomb term.
    Gross,
    /// Undressed Nelson Hamiltonian with linear coupling to the smeared field.
    Nelson,
    /// Gross-transformed Hamiltonian without the external potential.
    V0,
    /// Fock-space Hamiltonian at fixed total momentum `P`, relativistic units.
    Fiber { p: [f64; 3] },
}

/// Gross-type Hamiltonian applied without forming the matrix.
#[derive(Debug, Clone)]
pub struct AssembledModel {
    pub variant: Variant,
    pub params: ModelParams,
    pub frame: ScaleFrame,
    pub grid: Option<PositionGrid>,
    pub modes: ModeGrid,
    pub basis: FockBasis,
    /// Particle dimension (`n^3`, or 1 for the fiber).
    pub np: usize,
    /// Mode momenta in the working frame.
    pub k_frame: Vec<[f64; 3]>,
    /// Mode energies in the working frame.
    pub omega_frame: Vec<f64>,
    /// Frame-invariant vector-potential amplitudes `sqrt(w) beta0 / sqrt(2 omega)`.
    pub coupling: Vec<f64>,
    /// Linear field amplitudes `sqrt(w) / sqrt(2 omega)`.
    pub field_amp: Vec<f64>,
    /// `exp(i k_j . x)` on the grid, one row per mode.
    pub phases: Vec<Vec<C64>>,
    /// Coulomb potential on the grid (zero where absent).
    pub potential: Vec<f64>,
    /// Field energy per Fock state in the working frame.
    pub field_energy: Vec<f64>,
    /// Kinetic diagonal per Fock state for the fiber, `|P - P_f|^2 / 2`.
    fiber_kinetic: Vec<f64>,
    /// `P - P_f` per Fock state for the fiber.
    fiber_momentum: Vec<[f64; 3]>,
    /// Linear coupling in front of `p.A + A*.p`: `e rho^tau`.
    pub g_lin: f64,
    /// Quadratic coupling `e^2 rho^(2 tau) / 2`.
    pub g_quad: f64,
    pub warnings: Vec<String>,
}

impl AssembledModel {
    /// Builds the model. `grid` is ignored (and may be `None`) for the fiber.
    pub fn new(
        params: &ModelParams,
        frame: ScaleFrame,
        grid: Option<PositionGrid>,
        modes: ModeGrid,
        basis: FockBasis,
        variant: Variant,
    ) -> Result<Self> {
        if basis.modes != modes.len() {
            return Err(Error::InvalidParameter(format!(
                "Fock basis has {} modes, mode grid {}",
                basis.modes,
                modes.len()
            )));
        }
        let mut warnings = Vec::new();
        let (grid, frame) = match variant {
            Variant::Fiber { .. } => (None, ScaleFrame::identity()),
            _ => {
                let g = grid.ok_or_else(|| Error::InvalidParameter("particle grid required".into()))?;
                (Some(g), frame)
            }
        };
        let np = grid.as_ref().map_or(1, PositionGrid::points);
        let dim = np.saturating_mul(basis.dim());
        if dim > MAX_DIMENSION {
            return Err(Error::DimensionOverflow { dim, limit: MAX_DIMENSION });
        }
        if variant == Variant::Gross && params.e != 0.0 && c_uv(params.e, params.z) >= 1.0 {
            warnings.push(format!("C_UV(e) = {} >= 1: outside the admissible coupling window", c_uv(params.e, params.z)));
        }
        let k_scale = frame.r_of(-2.0 * frame.tau);
        let phase_scale = frame.r_of(-frame.tau);
        let k_frame: Vec<[f64; 3]> =
            modes.modes.iter().map(|m| [m.k[0] * k_scale, m.k[1] * k_scale, m.k[2] * k_scale]).collect();
        let omega_frame: Vec<f64> = modes.modes.iter().map(|m| m.omega() * k_scale).collect();
        let coupling: Vec<f64> = modes.modes.iter().map(|m| m.coupling(1.0)).collect();
        let field_amp: Vec<f64> = modes.modes.iter().map(|m| m.field_amplitude()).collect();
        let phases: Vec<Vec<C64>> = modes
            .modes
            .iter()
            .map(|m| match &grid {
                Some(g) => (0..np)
                    .map(|s| {
                        let x = g.point(s);
                        C64::from_polar(1.0, phase_scale * (m.k[0] * x[0] + m.k[1] * x[1] + m.k[2] * x[2]))
                    })
                    .collect(),
                None => vec![ONE],
            })
            .collect();
        let potential = match (&grid, variant) {
            (Some(g), Variant::Gross) if params.e != 0.0 => g.coulomb(frame.coulomb(params), 0.5 * g.h),
            _ => vec![0.0; np],
        };
        let field_energy: Vec<f64> = basis
            .states
            .iter()
            .map(|s| s.iter().zip(&omega_frame).map(|(&n, w)| n as f64 * w).sum())
            .collect();
        let (fiber_kinetic, fiber_momentum) = match variant {
            Variant::Fiber { p } => {
                let mom: Vec<[f64; 3]> = basis
                    .states
                    .iter()
                    .map(|s| {
                        let mut q = p;
                        for (j, &n) in s.iter().enumerate() {
                            for (i, qi) in q.iter_mut().enumerate() {
                                *qi -= n as f64 * k_frame[j][i];
                            }
                        }
                        q
                    })
                    .collect();
                (mom.iter().map(|q| 0.5 * (q[0] * q[0] + q[1] * q[1] + q[2] * q[2])).collect(), mom)
            }
            _ => (Vec::new(), Vec::new()),
        };
        let g_lin = params.e * frame.r_of(frame.tau);
        Ok(Self {
            variant,
            params: *params,
            frame,
            grid,
            modes,
            basis,
            np,
            k_frame,
            omega_frame,
            coupling,
            field_amp,
            phases,
            potential,
            field_energy,
            fiber_kinetic,
            fiber_momentum,
            g_lin,
            g_quad: 0.5 * g_lin * g_lin,
            warnings,
        })
    }

    pub fn dim(&self) -> usize {
        self.np * self.basis.dim()
    }

    pub fn is_fiber(&self) -> bool {
        matches!(self.variant, Variant::Fiber { .. })
    }

    /// `psi (x) vacuum`.
    pub fn embed_vacuum(&self, psi: &[C64]) -> Vec<C64> {
        let mut out = vec![ZERO; self.dim()];
        out[..self.np].copy_from_slice(psi);
        out
    }

    /// `y += coef * A_i x` (annihilation part) or `y += coef * A_i^* x`.
    pub fn add_vector_potential(&self, i: usize, adjoint: bool, coef: C64, x: &[C64], y: &mut [C64]) {
        let np = self.np;
        for l in &self.basis.lowerings {
            let kji = self.k_frame[l.mode][i];
            if kji == 0.0 {
                continue;
            }
            let amp = coef * (self.coupling[l.mode] * kji * l.amp);
            let ph = &self.phases[l.mode];
            if adjoint {
                let src = &x[l.to * np..(l.to + 1) * np];
                let dst = &mut y[l.from * np..(l.from + 1) * np];
                if np == 1 {
                    dst[0] += amp * src[0];
                } else {
                    for s in 0..np {
                        dst[s] += amp * ph[s].conj() * src[s];
                    }
                }
            } else {
                let src = &x[l.from * np..(l.from + 1) * np];
                let dst = &mut y[l.to * np..(l.to + 1) * np];
                if np == 1 {
                    dst[0] += amp * src[0];
                } else {
                    for s in 0..np {
                        dst[s] += amp * ph[s] * src[s];
                    }
                }
            }
        }
    }

    /// `y += coef * p_i x`, with `p` replaced by `P - P_f` for the fiber.
    pub fn add_momentum(&self, i: usize, coef: C64, x: &[C64], y: &mut [C64]) {
        match &self.grid {
            Some(g) => {
                let np = self.np;
                let mut tmp = vec![ZERO; np];
                for f in 0..self.basis.dim() {
                    tmp.iter_mut().for_each(|v| *v = ZERO);
                    g.add_momentum(i, &x[f * np..(f + 1) * np], &mut tmp);
                    axpy(coef, &tmp, &mut y[f * np..(f + 1) * np]);
                }
            }
            None => {
                for f in 0..self.basis.dim() {
                    y[f] += coef * self.fiber_momentum[f][i] * x[f];
                }
            }
        }
    }

    /// `y += coef * D_i x` with `D = p + e rho^tau (A + A^*)`.
    pub fn add_velocity(&self, i: usize, coef: C64, x: &[C64], y: &mut [C64]) {
        self.add_momentum(i, coef, x, y);
        if self.g_lin != 0.0 {
            self.add_vector_potential(i, false, coef * self.g_lin, x, y);
            self.add_vector_potential(i, true, coef * self.g_lin, x, y);
        }
    }

    /// Free part: kinetic, potential and field energy.
    fn apply_free(&self, x: &[C64], y: &mut [C64]) {
        let np = self.np;
        for f in 0..self.basis.dim() {
            let hf = self.field_energy[f] + if self.is_fiber() { self.fiber_kinetic[f] } else { 0.0 };
            let (xs, ys) = (&x[f * np..(f + 1) * np], &mut y[f * np..(f + 1) * np]);
            for s in 0..np {
                ys[s] = xs[s] * (self.potential[s] + hf);
            }
            if let Some(g) = &self.grid {
                g.add_kinetic(xs, ys);
            }
        }
    }

    /// Linear coupling of the undressed field, `e sum_j g_j ((Z + E_j) a_j + h.c.)`.
    fn add_nelson_coupling(&self, x: &[C64], y: &mut [C64]) {
        let np = self.np;
        let lin = self.params.e * self.frame.r_of(-2.0 * self.frame.tau);
        let z = self.params.z;
        for l in &self.basis.lowerings {
            let amp = lin * self.field_amp[l.mode] * l.amp;
            let ph = &self.phases[l.mode];
            for s in 0..np {
                let w = amp * (z + ph[s]);
                let v_from = x[l.from * np + s];
                let v_to = x[l.to * np + s];
                y[l.to * np + s] += w * v_from;
                y[l.from * np + s] += w.conj() * v_to;
            }
        }
    }

    /// `y = H x`.
    pub fn apply(&self, x: &[C64], y: &mut [C64]) {
        self.apply_free(x, y);
        if self.params.e == 0.0 {
            return;
        }
        if self.variant == Variant::Nelson {
            self.add_nelson_coupling(x, y);
            return;
        }
        let n = self.dim();
        let g = C64::new(self.g_lin, 0.0);
        let q = C64::new(self.g_quad, 0.0);
        let mut t = vec![ZERO; n];
        let mut u = vec![ZERO; n];
        for i in 0..3 {
            t.iter_mut().for_each(|v| *v = ZERO);
            self.add_vector_potential(i, false, ONE, x, &mut t);
            self.add_momentum(i, g, &t, y);
            self.add_vector_potential(i, false, q, &t, y);
            self.add_vector_potential(i, true, q * 2.0, &t, y);
            u.iter_mut().for_each(|v| *v = ZERO);
            self.add_momentum(i, ONE, x, &mut u);
            self.add_vector_potential(i, true, g, &u, y);
            t.iter_mut().for_each(|v| *v = ZERO);
            self.add_vector_potential(i, true, ONE, x, &mut t);
            self.add_vector_potential(i, true, q, &t, y);
        }
    }

    pub fn apply_vec(&self, x: &[C64]) -> Vec<C64> {
        let mut y = vec![ZERO; self.dim()];
        self.apply(x, &mut y);
        y
    }

    /// `(a_j (x) 1) x`.
    pub fn lower(&self, j: usize, x: &[C64]) -> Vec<C64> {
        let np = self.np;
        let mut y = vec![ZERO; self.dim()];
        for l in self.basis.lowerings.iter().filter(|l| l.mode == j) {
            for s in 0..np {
                y[l.to * np + s] += l.amp * x[l.from * np + s];
            }
        }
        y
    }

    /// `(a_j^* (x) 1) x`.
    pub fn raise(&self, j: usize, x: &[C64]) -> Vec<C64> {
        let np = self.np;
        let mut y = vec![ZERO; self.dim()];
        for l in self.basis.lowerings.iter().filter(|l| l.mode == j) {
            for s in 0..np {
                y[l.from * np + s] += l.amp * x[l.to * np + s];
            }
        }
        y
    }

    /// Multiplies every Fock block by a particle-space diagonal.
    pub fn multiply_particle(&self, diag: &[C64], x: &[C64]) -> Vec<C64> {
        let np = self.np;
        x.iter().enumerate().map(|(idx, v)| diag[idx % np] * v).collect()
    }

    /// Diagonal of the operator on the full space, used for preconditioning.
    pub fn diagonal_estimate(&self) -> Vec<f64> {
        let np = self.np;
        let kin = self.grid.as_ref().map_or(0.0, PositionGrid::kinetic_diagonal);
        let mut d = Vec::with_capacity(self.dim());
        for f in 0..self.basis.dim() {
            let extra = if self.is_fiber() { self.fiber_kinetic[f] } else { 0.0 };
            for s in 0..np {
                d.push(kin + self.potential[s] + self.field_energy[f] + extra);
            }
        }
        d
    }

    /// Literal triplet form: every interaction term as a product of sparse factors.
    pub fn to_sparse(&self) -> Result<SparseOperator> {
        const LIMIT: usize = 20_000;
        let n = self.dim();
        if n > LIMIT {
            return Err(Error::DimensionOverflow { dim: n, limit: LIMIT });
        }
        let np = self.np;
        let nf = self.basis.dim();
        let mut h = SparseOperator::zeros(n);
        // Free part.
        for f in 0..nf {
            let extra = if self.is_fiber() { self.fiber_kinetic[f] } else { 0.0 };
            for s in 0..np {
                h.push(f * np + s, f * np + s, C64::new(self.potential[s] + self.field_energy[f] + extra, 0.0));
            }
        }
        let mut momentum: Vec<SparseOperator> = Vec::new();
        if let Some(g) = &self.grid {
            let n1 = g.n;
            for i in 0..3 {
                let mut p = SparseOperator::zeros(n);
                let stride = match i {
                    0 => n1 * n1,
                    1 => n1,
                    _ => 1,
                };
                for f in 0..nf {
                    for s in 0..np {
                        let a = (s / stride) % n1;
                        let base = s - a * stride;
                        for b in 0..n1 {
                            let col = f * np + base + b * stride;
                            p.push(f * np + s, col, g.p1[(a, b)]);
                            h.push(f * np + s, col, C64::new(g.k1[(a, b)], 0.0));
                        }
                    }
                }
                momentum.push(p);
            }
        } else {
            for i in 0..3 {
                momentum.push(SparseOperator::diagonal(
                    &self.fiber_momentum.iter().map(|q| q[i]).collect::<Vec<_>>(),
                ));
            }
        }
        if self.params.e == 0.0 {
            return Ok(h);
        }
        if self.variant == Variant::Nelson {
            let lin = self.params.e * self.frame.r_of(-2.0 * self.frame.tau);
            for l in &self.basis.lowerings {
                for s in 0..np {
                    let w = lin * self.field_amp[l.mode] * l.amp * (self.params.z + self.phases[l.mode][s]);
                    h.push(l.to * np + s, l.from * np + s, w);
                    h.push(l.from * np + s, l.to * np + s, w.conj());
                }
            }
            return Ok(h);
        }
        let g = C64::new(self.g_lin, 0.0);
        let q = C64::new(self.g_quad, 0.0);
        for i in 0..3 {
            let mut a = SparseOperator::zeros(n);
            for l in &self.basis.lowerings {
                let kji = self.k_frame[l.mode][i];
                for s in 0..np {
                    let ph = if np == 1 { ONE } else { self.phases[l.mode][s] };
                    a.push(l.to * np + s, l.from * np + s, ph * (self.coupling[l.mode] * kji * l.amp));
                }
            }
            let ad = a.adjoint();
            h.add_scaled(g, &momentum[i].compose(&a));
            h.add_scaled(g, &ad.compose(&momentum[i]));
            h.add_scaled(q, &a.compose(&a));
            h.add_scaled(q * 2.0, &ad.compose(&a));
            h.add_scaled(q, &ad.compose(&ad));
        }
        Ok(h)
    }
}
