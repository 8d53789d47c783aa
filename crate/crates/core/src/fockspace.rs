//! Truncated boson sector: discretized modes, occupation basis, ladder operators.

use nalgebra::DMatrix;
use serde::Serialize;
use std::collections::HashMap;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::{SparseOperator, C64};
use crate::quadrature::gauss_legendre;

/// Largest particle-times-Fock dimension any assembly accepts.
pub const MAX_DIMENSION: usize = 500_000;

/// Dressed coupling profile `(|k| + |k|^2 / 2m)^(-1)`.
pub fn beta0(r: f64, m: f64) -> f64 {
    1.0 / (r + r * r / (2.0 * m))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Mode {
    /// Momentum in relativistic units.
    pub k: [f64; 3],
    /// Quadrature weight including the `r^2` Jacobian and the `(2 pi)^(-3)` factor.
    pub weight: f64,
}

impl Mode {
    pub fn omega(&self) -> f64 {
        (self.k[0] * self.k[0] + self.k[1] * self.k[1] + self.k[2] * self.k[2]).sqrt()
    }

    pub fn is_soft(&self) -> bool {
        self.omega() < 1.0
    }

    /// `sqrt(w) beta0(|k|) / sqrt(2 omega)`; multiplies `k` in the vector potential.
    pub fn coupling(&self, m: f64) -> f64 {
        let w = self.omega();
        self.weight.sqrt() * beta0(w, m) / (2.0 * w).sqrt()
    }

    /// `sqrt(w) / sqrt(2 omega)`; the linear coupling of the undressed field.
    pub fn field_amplitude(&self) -> f64 {
        (self.weight / (2.0 * self.omega())).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModeGrid {
    pub kappa: f64,
    pub lambda: f64,
    pub modes: Vec<Mode>,
    pub n_soft: usize,
    pub n_hard: usize,
}

fn angular_rule(n_angular: usize) -> Result<Vec<([f64; 3], f64)>> {
    match n_angular {
        1 => Ok(vec![([0.0, 0.0, 1.0], 4.0 * PI)]),
        6 => {
            let w = 4.0 * PI / 6.0;
            Ok(vec![
                ([1.0, 0.0, 0.0], w),
                ([-1.0, 0.0, 0.0], w),
                ([0.0, 1.0, 0.0], w),
                ([0.0, -1.0, 0.0], w),
                ([0.0, 0.0, 1.0], w),
                ([0.0, 0.0, -1.0], w),
            ])
        }
        n => {
            let t = ((n / 2) as f64).sqrt().round() as usize;
            if t == 0 || 2 * t * t != n {
                return Err(Error::InvalidParameter(format!(
                    "n_angular = {n}: use 1, 6 or a product rule size 2 t^2"
                )));
            }
            let (x, w) = gauss_legendre(t);
            let nphi = 2 * t;
            let mut out = Vec::with_capacity(n);
            for (ct, wt) in x.iter().zip(&w) {
                let st = (1.0 - ct * ct).sqrt();
                for p in 0..nphi {
                    let phi = 2.0 * PI * (p as f64 + 0.5) / nphi as f64;
                    out.push(([st * phi.cos(), st * phi.sin(), *ct], wt * 2.0 * PI / nphi as f64));
                }
            }
            Ok(out)
        }
    }
}

impl ModeGrid {
    /// Product rule: Gauss-Legendre radii on `[kappa, lambda]` times an angular rule.
    ///
    /// A single radial node sits at the shell midpoint and carries the exact shell volume.
    pub fn build(kappa: f64, lambda: f64, n_radial: usize, n_angular: usize) -> Result<Self> {
        if !(kappa >= 0.0 && kappa < lambda && lambda.is_finite()) {
            return Err(Error::CutoffOrder { kappa, lambda });
        }
        if n_radial == 0 || n_angular == 0 {
            return Err(Error::InvalidParameter("n_radial and n_angular must be at least 1".into()));
        }
        let radial: Vec<(f64, f64)> = if n_radial == 1 {
            vec![(0.5 * (kappa + lambda), (lambda.powi(3) - kappa.powi(3)) / 3.0)]
        } else {
            let (x, w) = gauss_legendre(n_radial);
            let (c, h) = (0.5 * (lambda + kappa), 0.5 * (lambda - kappa));
            x.iter().zip(&w).map(|(x, w)| (c + h * x, h * w * (c + h * x).powi(2))).collect()
        };
        let norm = (2.0 * PI).powi(-3);
        let mut modes = Vec::with_capacity(n_radial * n_angular);
        for &(r, wr) in &radial {
            for &(u, wa) in &angular_rule(n_angular)? {
                modes.push(Mode { k: [r * u[0], r * u[1], r * u[2]], weight: wr * wa * norm });
            }
        }
        Self::custom(kappa, lambda, modes)
    }

    /// Mode list given explicitly; every `|k|` must lie in `[kappa, lambda]`.
    pub fn custom(kappa: f64, lambda: f64, modes: Vec<Mode>) -> Result<Self> {
        for m in &modes {
            let w = m.omega();
            if !(w >= kappa && w <= lambda) || !(m.weight > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "mode |k| = {w}, weight {} outside the shell [{kappa}, {lambda}]",
                    m.weight
                )));
            }
        }
        let n_soft = modes.iter().filter(|m| m.is_soft()).count();
        Ok(Self { kappa, lambda, n_hard: modes.len() - n_soft, n_soft, modes })
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.modes.iter().map(|m| m.weight).sum()
    }
}

/// One annihilation step `a_j |from> = amp |to>`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lowering {
    pub from: usize,
    pub to: usize,
    pub mode: usize,
    pub amp: f64,
}

/// Occupation-number basis with total-number cap; the vacuum has index 0.
#[derive(Debug, Clone)]
pub struct FockBasis {
    pub modes: usize,
    pub n_max: usize,
    pub states: Vec<Vec<u8>>,
    index: HashMap<Vec<u8>, usize>,
    /// All nonzero annihilation matrix elements, ordered by `from` then `mode`.
    pub lowerings: Vec<Lowering>,
}

fn binomial(n: usize, k: usize) -> Option<usize> {
    let mut acc: usize = 1;
    for i in 0..k {
        acc = acc.checked_mul(n - i)? / (i + 1);
    }
    Some(acc)
}

impl FockBasis {
    pub fn new(modes: usize, n_max: usize) -> Result<Self> {
        if n_max > u8::MAX as usize {
            return Err(Error::InvalidParameter(format!("N_max = {n_max} too large")));
        }
        let dim = binomial(modes + n_max, n_max).unwrap_or(usize::MAX);
        if dim > MAX_DIMENSION {
            return Err(Error::DimensionOverflow { dim, limit: MAX_DIMENSION });
        }
        let mut states: Vec<Vec<u8>> = vec![vec![0; modes]];
        let mut shell = states.clone();
        for _ in 0..n_max {
            // Raise the last occupied mode or any later one: each multiset appears once.
            let mut next = Vec::new();
            for s in &shell {
                let start = s.iter().rposition(|&n| n > 0).unwrap_or(0);
                for j in start..modes {
                    let mut t = s.clone();
                    t[j] += 1;
                    next.push(t);
                }
            }
            states.extend(next.iter().cloned());
            shell = next;
        }
        let index: HashMap<Vec<u8>, usize> = states.iter().cloned().enumerate().map(|(i, s)| (s, i)).collect();
        let mut lowerings = Vec::new();
        for (from, s) in states.iter().enumerate() {
            for j in 0..modes {
                if s[j] > 0 {
                    let mut t = s.clone();
                    t[j] -= 1;
                    lowerings.push(Lowering { from, to: index[&t], mode: j, amp: (s[j] as f64).sqrt() });
                }
            }
        }
        Ok(Self { modes, n_max, states, index, lowerings })
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn index_of(&self, occupation: &[u8]) -> Option<usize> {
        self.index.get(occupation).copied()
    }

    pub fn total_number(&self, idx: usize) -> usize {
        self.states[idx].iter().map(|&n| n as usize).sum()
    }

    /// `(a_j, a_j^*, n_j)` on the truncated space.
    pub fn ladder_ops(&self, j: usize) -> (SparseOperator, SparseOperator, SparseOperator) {
        assert!(j < self.modes, "mode index {j} out of range");
        let mut a = SparseOperator::zeros(self.dim());
        for l in self.lowerings.iter().filter(|l| l.mode == j) {
            a.push(l.to, l.from, C64::new(l.amp, 0.0));
        }
        let adag = a.adjoint();
        let n = SparseOperator::diagonal(&self.states.iter().map(|s| s[j] as f64).collect::<Vec<_>>());
        (a, adag, n)
    }

    /// Diagonal of `sum_j omega_j n_j`.
    pub fn field_energy(&self, grid: &ModeGrid) -> Vec<f64> {
        let w: Vec<f64> = grid.modes.iter().map(Mode::omega).collect();
        self.states.iter().map(|s| s.iter().zip(&w).map(|(&n, w)| n as f64 * w).sum()).collect()
    }

    /// Diagonals of the total, soft and hard number operators.
    pub fn number_diagonals(&self, grid: &ModeGrid) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let soft: Vec<bool> = grid.modes.iter().map(Mode::is_soft).collect();
        let mut total = Vec::with_capacity(self.dim());
        let mut nsoft = Vec::with_capacity(self.dim());
        let mut nhard = Vec::with_capacity(self.dim());
        for s in &self.states {
            let (mut a, mut b) = (0usize, 0usize);
            for (j, &n) in s.iter().enumerate() {
                if soft[j] {
                    a += n as usize;
                } else {
                    b += n as usize;
                }
            }
            total.push((a + b) as f64);
            nsoft.push(a as f64);
            nhard.push(b as f64);
        }
        (total, nsoft, nhard)
    }

    /// Truncated single-mode displacement `exp(eta a_j^* - conj(eta) a_j)`.
    pub fn displacement(&self, j: usize, eta: C64) -> Result<SparseOperator> {
        if !(eta.re.is_finite() && eta.im.is_finite()) {
            return Err(Error::InvalidParameter("displacement amplitude must be finite".into()));
        }
        let (a, adag, _) = self.ladder_ops(j);
        let mut g = adag.scaled(eta);
        g.add_scaled(-eta.conj(), &a);
        let dense: DMatrix<C64> = g.to_dense().exp();
        Ok(SparseOperator::from_dense(&dense, 1e-14))
    }
}
