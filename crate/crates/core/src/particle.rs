//! Periodic-box electron sector: spectral kinetic energy, softened Coulomb
//! potential, atomic ground state and position-space multiplication operators.

use nalgebra::DMatrix;
use serde::Serialize;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::{LinearOperator, SparseOperator, C64, ZERO};
use crate::spectral::lanczos::{lanczos_ground, LanczosOptions};

/// `n^3` periodic grid on `[-L, L)^3` with points `x_a = -L + a h`.
#[derive(Debug, Clone)]
pub struct PositionGrid {
    pub n: usize,
    pub l: f64,
    pub h: f64,
    /// One-axis coordinates.
    pub coords: Vec<f64>,
    /// One-axis reciprocal lattice in FFT order, Nyquist value `-pi/h`.
    pub momenta: Vec<f64>,
    /// One-axis spectral `p = -i d/dx`.
    pub p1: DMatrix<C64>,
    /// One-axis spectral `p^2 / 2`, real symmetric.
    pub k1: DMatrix<f64>,
}

impl PositionGrid {
    pub fn new(n: usize, l: f64) -> Result<Self> {
        if n < 2 || !n.is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!("grid size n = {n} must be even and at least 2")));
        }
        if !(l > 0.0 && l.is_finite()) {
            return Err(Error::InvalidParameter(format!("box half-width L = {l} must be positive")));
        }
        let h = 2.0 * l / n as f64;
        let coords: Vec<f64> = (0..n).map(|a| -l + a as f64 * h).collect();
        let dk = PI / l;
        let momenta: Vec<f64> = (0..n)
            .map(|m| if m < n / 2 { m as f64 * dk } else { (m as f64 - n as f64) * dk })
            .collect();
        let mut p1 = DMatrix::from_element(n, n, ZERO);
        let mut k1 = DMatrix::zeros(n, n);
        for a in 0..n {
            for b in 0..n {
                let mut p = ZERO;
                let mut k = 0.0;
                for &q in &momenta {
                    let phase = C64::from_polar(1.0, q * (a as f64 - b as f64) * h);
                    p += q * phase;
                    k += 0.5 * q * q * phase.re;
                }
                p1[(a, b)] = p / n as f64;
                k1[(a, b)] = k / n as f64;
            }
        }
        Ok(Self { n, l, h, coords, momenta, p1, k1 })
    }

    pub fn points(&self) -> usize {
        self.n * self.n * self.n
    }

    /// Cartesian point of flat index `s = (a n + b) n + c`.
    pub fn point(&self, s: usize) -> [f64; 3] {
        let n = self.n;
        [self.coords[s / (n * n)], self.coords[(s / n) % n], self.coords[s % n]]
    }

    pub fn radius(&self, s: usize) -> f64 {
        let x = self.point(s);
        (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt()
    }

    fn strides(&self, axis: usize) -> (usize, usize) {
        let n = self.n;
        match axis {
            0 => (n * n, 1),
            1 => (n, 1),
            _ => (1, n),
        }
    }

    /// Applies a one-axis matrix along `axis`, accumulating `y += M_axis x`.
    fn apply_axis<T>(&self, m: &DMatrix<T>, axis: usize, x: &[C64], y: &mut [C64])
    where
        T: Copy + std::ops::Mul<C64, Output = C64> + nalgebra::Scalar,
    {
        let n = self.n;
        let (stride, _) = self.strides(axis);
        let mut line = vec![ZERO; n];
        for base in 0..self.points() {
            if (base / stride) % n != 0 {
                continue;
            }
            for (a, v) in line.iter_mut().enumerate() {
                *v = x[base + a * stride];
            }
            for a in 0..n {
                let mut acc = ZERO;
                for b in 0..n {
                    acc += m[(a, b)] * line[b];
                }
                y[base + a * stride] += acc;
            }
        }
    }

    /// `y += p_axis x`.
    pub fn add_momentum(&self, axis: usize, x: &[C64], y: &mut [C64]) {
        self.apply_axis(&self.p1, axis, x, y);
    }

    /// `y += (p^2 / 2) x`.
    pub fn add_kinetic(&self, x: &[C64], y: &mut [C64]) {
        for axis in 0..3 {
            self.apply_axis(&self.k1, axis, x, y);
        }
    }

    /// Diagonal of `p^2 / 2`, identical at every point.
    pub fn kinetic_diagonal(&self) -> f64 {
        3.0 * self.k1[(0, 0)]
    }

    /// Softened Coulomb values `-strength / max(|x|, softening)`.
    pub fn coulomb(&self, strength: f64, softening: f64) -> Vec<f64> {
        (0..self.points()).map(|s| -strength / self.radius(s).max(softening)).collect()
    }

    /// Wraps a real coordinate onto the nearest reciprocal-lattice value `j pi / L`.
    pub fn round_to_lattice(&self, k: f64) -> f64 {
        (k * self.l / PI).round() * PI / self.l
    }

    pub fn is_lattice_momentum(&self, k: f64) -> bool {
        let t = k * self.l / PI;
        (t - t.round()).abs() < 1e-12
    }
}

/// `H_at = p^2/2 - strength / max(|x|, softening)` on a grid.
pub struct AtomicHamiltonian<'a> {
    pub grid: &'a PositionGrid,
    pub potential: Vec<f64>,
}

impl LinearOperator for AtomicHamiltonian<'_> {
    fn dim(&self) -> usize {
        self.grid.points()
    }

    fn apply(&self, x: &[C64], y: &mut [C64]) {
        for (s, v) in y.iter_mut().enumerate() {
            *v = x[s] * self.potential[s];
        }
        self.grid.add_kinetic(x, y);
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AtomicState {
    pub energy: f64,
    /// Grid values, unit norm in the `h^3`-weighted product.
    #[serde(skip)]
    pub psi: Vec<C64>,
    pub energy_analytic: f64,
    pub discretization_error: f64,
    pub residual: f64,
    pub warning: Option<String>,
}

/// Hydrogen-like ground state `pi^(-1/2) a^(3/2) exp(-a |x|)` sampled on the grid.
pub fn sampled_hydrogen(grid: &PositionGrid, a: f64) -> Vec<C64> {
    let w = grid.h.powf(1.5);
    (0..grid.points())
        .map(|s| C64::new(w * PI.powf(-0.5) * a.powf(1.5) * (-a * grid.radius(s)).exp(), 0.0))
        .collect()
}

/// Atomic ground state by Lanczos seeded with the sampled analytic state.
///
/// Vectors hold `h^(3/2)` times grid values, so the plain Euclidean norm is the
/// `h^3`-weighted one.
pub fn atomic_ground(grid: &PositionGrid, alpha_z: f64, softening: f64, tol: f64) -> Result<AtomicState> {
    if !(alpha_z >= 0.0) {
        return Err(Error::InvalidParameter(format!("alpha Z = {alpha_z} must be nonnegative")));
    }
    let e_an = -0.5 * alpha_z * alpha_z;
    if alpha_z == 0.0 {
        let c = C64::new(1.0 / (grid.points() as f64).sqrt(), 0.0);
        return Ok(AtomicState {
            energy: 0.0,
            psi: vec![c; grid.points()],
            energy_analytic: 0.0,
            discretization_error: 0.0,
            residual: 0.0,
            warning: None,
        });
    }
    let warning = (1.0 / (alpha_z * grid.h) < 4.0).then(|| {
        format!("Bohr radius {:.3e} resolved by fewer than 4 grid spacings (h = {:.3e})", 1.0 / alpha_z, grid.h)
    });
    let h_at = AtomicHamiltonian { grid, potential: grid.coulomb(alpha_z, softening) };
    let seed = sampled_hydrogen(grid, alpha_z);
    let out = lanczos_ground(|x, y| h_at.apply(x, y), &seed, &LanczosOptions { tol, ..Default::default() })?;
    let mut psi = out.vector;
    // Fix the global phase so the largest component is real and positive.
    let big = psi.iter().cloned().fold(ZERO, |m, v| if v.norm() > m.norm() { v } else { m });
    let phase = big.conj() / big.norm();
    psi.iter_mut().for_each(|v| *v *= phase);
    Ok(AtomicState {
        energy: out.energy,
        psi,
        energy_analytic: e_an,
        discretization_error: (out.energy - e_an).abs(),
        residual: out.residual,
        warning,
    })
}

/// Named multiplication operators on the particle grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "name")]
pub enum PositionFunction {
    Radius,
    RadiusSquared,
    /// `log(3 + |x|)`.
    LogThreePlus,
    /// `exp(beta |x|)`.
    Exp { beta: f64 },
    /// `exp(i k . x)`.
    PlaneWave { k: [f64; 3] },
    /// `chi_R(|x|) sqrt(log(3 + c |x|))`.
    Localization { r: f64, c: f64 },
}

/// `chi_R`: 0 below `R/2`, 1 above `R`, linear in between.
pub fn cutoff_ramp(r: f64, big_r: f64) -> f64 {
    ((r - 0.5 * big_r) / (0.5 * big_r)).clamp(0.0, 1.0)
}

impl PositionFunction {
    pub fn eval(&self, x: [f64; 3]) -> C64 {
        let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
        match *self {
            Self::Radius => C64::new(r, 0.0),
            Self::RadiusSquared => C64::new(r * r, 0.0),
            Self::LogThreePlus => C64::new((3.0 + r).ln(), 0.0),
            Self::Exp { beta } => C64::new((beta * r).exp(), 0.0),
            Self::PlaneWave { k } => C64::from_polar(1.0, k[0] * x[0] + k[1] * x[1] + k[2] * x[2]),
            Self::Localization { r: big_r, c } => C64::new(cutoff_ramp(r, big_r) * (3.0 + c * r).ln().sqrt(), 0.0),
        }
    }

    /// `|grad f|^2` for the localization weight, `None` for the others.
    pub fn gradient_sq(&self, r: f64) -> Option<f64> {
        match *self {
            Self::Localization { r: big_r, c } => {
                let g = (3.0 + c * r).ln().sqrt();
                let dg = c / (2.0 * (3.0 + c * r) * g);
                let dchi = if r > 0.5 * big_r && r < big_r { 2.0 / big_r } else { 0.0 };
                Some((dchi * g + cutoff_ramp(r, big_r) * dg).powi(2))
            }
            _ => None,
        }
    }
}

/// Diagonal of a position function over the grid.
pub fn position_diagonal(grid: &PositionGrid, f: PositionFunction) -> Result<Vec<C64>> {
    if let PositionFunction::Exp { beta } = f {
        if !(beta * grid.l < 700.0) {
            return Err(Error::OutOfDomain(format!("exp(beta |x|) overflows: beta L = {}", beta * grid.l)));
        }
    }
    Ok((0..grid.points()).map(|s| f.eval(grid.point(s))).collect())
}

/// Multiplication operator of a position function, as a sparse diagonal.
pub fn position_operator(grid: &PositionGrid, f: PositionFunction) -> Result<SparseOperator> {
    let d = position_diagonal(grid, f)?;
    let mut op = SparseOperator::zeros(d.len());
    for (s, v) in d.into_iter().enumerate() {
        op.push(s, s, v);
    }
    Ok(op)
}

fn thomas(lower: f64, diag: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut denom = diag[0];
    c[0] = lower / denom;
    d[0] = rhs[0] / denom;
    for i in 1..n {
        denom = diag[i] - lower * c[i - 1];
        if !(denom.abs() > 0.0) || !denom.is_finite() {
            return Err(Error::LinearSolve(format!("singular tridiagonal pivot at row {i}")));
        }
        c[i] = lower / denom;
        d[i] = (rhs[i] - lower * d[i - 1]) / denom;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    Ok(x)
}

fn radial_resolvent_fd(a: f64, shift: f64, points: usize) -> Result<f64> {
    let r_max = 60.0 / a;
    let h = r_max / (points + 1) as f64;
    let norm = PI.powf(-0.5) * a.powf(1.5);
    let r: Vec<f64> = (1..=points).map(|i| i as f64 * h).collect();
    let u: Vec<f64> = r.iter().map(|&r| r * a * norm * (-a * r).exp()).collect();
    let diag: Vec<f64> = r.iter().map(|&r| 1.0 / (h * h) + 1.0 / (r * r) - a / r + 0.5 * a * a + shift).collect();
    let y = thomas(-0.5 / (h * h), &diag, &u)?;
    Ok(4.0 * PI * h * u.iter().zip(&y).map(|(u, y)| u * y).sum::<f64>())
}

/// `<p psi_at, (H_at - E_at + shift)^(-1) p psi_at>` in the `l = 1` radial sector.
///
/// Second-order finite differences on `(0, 60/a]` with one Richardson step.
pub fn radial_resolvent_l1(alpha_z: f64, shift: f64) -> Result<f64> {
    if !(shift > 0.0) {
        return Err(Error::InvalidParameter(format!("resolvent shift {shift} must be positive")));
    }
    if !(alpha_z > 0.0) {
        return Ok(0.0);
    }
    let coarse = radial_resolvent_fd(alpha_z, shift, 8_000)?;
    let fine = radial_resolvent_fd(alpha_z, shift, 16_001)?;
    Ok((4.0 * fine - coarse) / 3.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{dot, norm};

    #[test]
    fn plane_waves_are_eigenvectors() {
        let g = PositionGrid::new(8, 3.0).unwrap();
        let k = [g.momenta[1], g.momenta[3], g.momenta[6]];
        let psi = position_diagonal(&g, PositionFunction::PlaneWave { k }).unwrap();
        let mut y = vec![ZERO; g.points()];
        g.add_kinetic(&psi, &mut y);
        let k2 = 0.5 * (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]);
        for s in 0..g.points() {
            assert!((y[s] - k2 * psi[s]).norm() < 1e-12);
        }
        for axis in 0..3 {
            let mut y = vec![ZERO; g.points()];
            g.add_momentum(axis, &psi, &mut y);
            for s in 0..g.points() {
                assert!((y[s] - k[axis] * psi[s]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn momentum_is_hermitian_and_squares_to_kinetic() {
        let g = PositionGrid::new(6, 2.0).unwrap();
        assert!((g.p1.adjoint() - &g.p1).norm() < 1e-13);
        let p2 = (&g.p1 * &g.p1).map(|v| v.re * 0.5);
        assert!((p2 - &g.k1).norm() < 1e-12);
    }

    #[test]
    fn free_particle_ground_state() {
        let g = PositionGrid::new(8, 4.0).unwrap();
        let s = atomic_ground(&g, 0.0, g.h / 2.0, 1e-10).unwrap();
        assert_eq!(s.energy, 0.0);
        assert!((norm(&s.psi) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn hydrogen_on_a_grid() {
        let g = PositionGrid::new(16, 6.0).unwrap();
        let s = atomic_ground(&g, 1.0, g.h / 2.0, 1e-9).unwrap();
        assert!(s.warning.is_some());
        assert!((s.energy + 0.5).abs() < 0.1, "E = {}", s.energy);
        let mut reference = sampled_hydrogen(&g, 1.0);
        crate::linalg::normalize(&mut reference);
        assert!(dot(&reference, &s.psi).norm() > 0.98);
    }

    #[test]
    fn localization_gradient_below_ceiling() {
        let (big_r, c) = (2.0, 1.0);
        let f = PositionFunction::Localization { r: big_r, c };
        let sup = (0..=4000).map(|i| f.gradient_sq(i as f64 * 1e-3 * 3.0 * big_r).unwrap()).fold(0.0, f64::max);
        let ceiling = 4.0 / (big_r * big_r) * (3.0 + c * big_r).ln() + 5.0 / (big_r * big_r);
        assert!(sup < ceiling);
    }

    #[test]
    fn exp_overflow_guard() {
        let g = PositionGrid::new(4, 10.0).unwrap();
        assert!(position_operator(&g, PositionFunction::Exp { beta: 71.0 }).is_err());
        assert!(position_operator(&g, PositionFunction::Exp { beta: 1.0 }).is_ok());
    }

    #[test]
    fn radial_resolvent_limits() {
        let a = 1.0;
        let shifts = [0.01, 0.1, 1.0, 10.0, 100.0];
        let vals: Vec<f64> = shifts.iter().map(|&s| radial_resolvent_l1(a, s).unwrap()).collect();
        for (s, v) in shifts.iter().zip(&vals) {
            assert!(*v > 0.0 && *v <= a * a / s);
        }
        assert!(vals.windows(2).all(|w| w[1] < w[0]));
        let big = 1e4;
        assert!((radial_resolvent_l1(a, big).unwrap() * big / (a * a) - 1.0).abs() < 1e-3);
    }
}
