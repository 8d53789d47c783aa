//! Closed-form constants, coupling thresholds and bound expressions.
//!
//! Everything here is a pure function of the charge `e`, the nuclear charge
//! `Z` and, where relevant, a scale exponent `tau`.

use serde::Serialize;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::roots::brent;

/// Bracket and tolerance shared by every threshold search.
pub const ROOT_BRACKET: (f64, f64) = (1e-12, 10.0);
pub const ROOT_XTOL: f64 = 1e-15;

/// Default `epsilon` for the second overlap constant.
pub const THETA_EPS: f64 = 0.2;
/// Scale exponent of the soft-photon iteration and its companion `delta`.
pub const SOFT_EPS: f64 = 0.75;
pub const SOFT_DELTA: f64 = 0.25;

fn alpha_of(e: f64) -> f64 {
    e * e / (4.0 * PI)
}

/// `C_UV(e) = (2e/pi) sqrt(1 + (e^2 Z / 4 pi)^2 / 2) + (14 + sqrt(6) pi) e^2 / (4 pi^2)`.
pub fn c_uv(e: f64, z: f64) -> f64 {
    let az = alpha_of(e) * z;
    2.0 * e / PI * (1.0 + 0.5 * az * az).sqrt() + (14.0 + 6f64.sqrt() * PI) * e * e / (4.0 * PI * PI)
}

fn e_uv_raw(z: f64) -> Result<f64> {
    let (a, b) = ROOT_BRACKET;
    Ok(brent(|e| c_uv(e, z) - 1.0, a, b, ROOT_XTOL, 400)?.x)
}

/// Positive root of `C_UV(e, Z) = 1`.
pub fn e_uv(z: f64) -> Result<f64> {
    if !(z > 0.0) {
        return Err(Error::InvalidParameter(format!("Z = {z} must be positive")));
    }
    e_uv_raw(z)
}

/// The `Z -> 0+` limit of [`e_uv`]: root of `(2/pi) e + c e^2 = 1`.
pub fn e_uv_limit() -> f64 {
    e_uv_raw(0.0).expect("C_UV(e, 0) - 1 changes sign on the bracket")
}

/// `C_*(e, tau)` in a frame with base `rho`.
pub fn c_star(e: f64, z: f64, tau: f64, rho: f64) -> f64 {
    let alpha = alpha_of(e);
    let r = |s: f64| if s == 0.0 { 1.0 } else { rho.powf(s) };
    let az = alpha * z;
    let e_at = -0.5 * az * az * r(-2.0 * tau);
    6f64.sqrt() * alpha * r(-tau)
        + 4.0 * alpha.sqrt() * ((1.0 - e_at) / PI).sqrt()
        + 2.0 / PI * alpha * (r(2.0 * tau) + 3.0 * r(tau) + 3.0)
}

/// `(C_*, C_1)` with `C_1 = (1 - C_*)^(-1/2)`; out of domain when `C_* >= 1`.
pub fn c_star_c1(e: f64, z: f64, tau: f64, rho: f64) -> Result<(f64, f64)> {
    if !(rho > 0.0) {
        return Err(Error::InvalidParameter(format!("rho = {rho} must be positive")));
    }
    let cs = c_star(e, z, tau, rho);
    if cs >= 1.0 {
        return Err(Error::CStarNotBelowOne { c_star: cs });
    }
    Ok((cs, (1.0 - cs).powf(-0.5)))
}

/// `C_1` in relativistic units, `(1 - C_UV)^(-1/2)`.
pub fn c1_relativistic(e: f64, z: f64) -> Result<f64> {
    let cu = c_uv(e, z);
    if cu >= 1.0 {
        return Err(Error::CStarNotBelowOne { c_star: cu });
    }
    Ok((1.0 - cu).powf(-0.5))
}

/// `C_D = C_1 (sqrt(2 + (alpha Z)^2) + 2 sqrt(2 alpha / pi))`.
pub fn c_d(e: f64, z: f64) -> Result<f64> {
    let c1 = c1_relativistic(e, z)?;
    let alpha = alpha_of(e);
    Ok(c1 * ((2.0 + (alpha * z).powi(2)).sqrt() + 2.0 * (2.0 * alpha / PI).sqrt()))
}

/// Same constant written as `C_1 (sqrt(2 + (e^2 Z/4 pi)^2) + sqrt(2) |e| / pi)`.
pub fn c_d_restated(e: f64, z: f64) -> Result<f64> {
    let c1 = c1_relativistic(e, z)?;
    let q = e * e * z / (4.0 * PI);
    Ok(c1 * ((2.0 + q * q).sqrt() + 2f64.sqrt() * e.abs() / PI))
}

/// `C_tau(e) = |e|^(2 - 2 tau) + |e| sqrt(1 + Z^2) + e^2`.
pub fn c_tau(e: f64, z: f64, tau: f64) -> f64 {
    e.abs().powf(2.0 - 2.0 * tau) + e.abs() * (1.0 + z * z).sqrt() + e * e
}

/// `F_IR(e) = sqrt(1 + Z^2)(|e|^(4 tau - 3) + 3 |e|^(1/2)) + e^2`.
pub fn f_ir(e: f64, z: f64, tau: f64) -> f64 {
    (1.0 + z * z).sqrt() * (e.abs().powf(4.0 * tau - 3.0) + 3.0 * e.abs().sqrt()) + e * e
}

/// `L(e, Z) = log(3 + 400 pi / (e^2 Z))`; infinite at `e = 0`.
pub fn log_factor(e: f64, z: f64) -> f64 {
    if e == 0.0 {
        f64::INFINITY
    } else {
        (3.0 + 400.0 * PI / (e * e * z)).ln()
    }
}

/// Which coefficient multiplies the single power of `L` in the photon bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LinearLogCoefficient {
    /// `9 x 10^2`, the larger and therefore safer reading.
    Large,
    /// `9 x 10^-2`.
    Small,
}

impl LinearLogCoefficient {
    pub fn value(self) -> f64 {
        match self {
            Self::Large => 9e2,
            Self::Small => 9e-2,
        }
    }
}

fn log_polynomial(l: f64, coef: LinearLogCoefficient) -> f64 {
    9.0 + 2.0 * l * l + coef.value() * l
}

/// Bracketed constant `K` of the total photon bound `<N_f> <= K e^2 / 4 pi`.
pub fn photon_constant(e: f64, z: f64, coef: LinearLogCoefficient) -> Result<f64> {
    let cd = c_d(e, z)?;
    let c1 = c1_relativistic(e, z)?;
    let l = log_factor(e, z);
    Ok((28.0 * cd + 39.0).powi(2) + 6.0 * c1 * c1 * (cd + 2.0).powi(2) * log_polynomial(l, coef))
}

/// `K e^2 / 4 pi`, continued by its limit 0 at `e = 0`.
pub fn total_photon_bound(e: f64, z: f64, coef: LinearLogCoefficient) -> Result<f64> {
    if e == 0.0 {
        return Ok(0.0);
    }
    Ok(photon_constant(e, z, coef)? * alpha_of(e))
}

/// Hard-photon bound `4 alpha C_D^2 / (3 pi)`.
pub fn hard_photon_bound(e: f64, z: f64) -> Result<f64> {
    let cd = c_d(e, z)?;
    Ok(4.0 * alpha_of(e) * cd * cd / (3.0 * PI))
}

/// `M = 18 C_1^2 (C_D + 2)^2 / (eps pi^2)` with the soft iteration exponent.
pub fn soft_m(e: f64, z: f64) -> Result<f64> {
    let cd = c_d(e, z)?;
    let c1 = c1_relativistic(e, z)?;
    Ok(18.0 * c1 * c1 * (cd + 2.0).powi(2) / (SOFT_EPS * PI * PI))
}

/// Soft-photon bound `9 alpha/(pi delta) (8 C_D + 21/2)^2 + 2 M alpha (9 + 2 L^2 + c L)`.
pub fn soft_photon_bound(e: f64, z: f64, coef: LinearLogCoefficient) -> Result<f64> {
    if e == 0.0 {
        return Ok(0.0);
    }
    let alpha = alpha_of(e);
    let cd = c_d(e, z)?;
    let m = soft_m(e, z)?;
    let l = log_factor(e, z);
    Ok(9.0 * alpha / (PI * SOFT_DELTA) * (8.0 * cd + 10.5).powi(2)
        + 2.0 * m * alpha * log_polynomial(l, coef))
}

/// Bound on the excited-atom vacuum weight, `8 (4 pi / Z)^2 F_IR(e)`.
pub fn q_bound(e: f64, z: f64, tau: f64) -> f64 {
    8.0 * (4.0 * PI / z).powi(2) * f_ir(e, z, tau)
}

fn check_tau(tau: f64) -> Result<()> {
    if !(tau > 0.75 && tau <= 1.0) {
        return Err(Error::OutOfDomain(format!("tau = {tau} must lie in (3/4, 1]")));
    }
    Ok(())
}

/// `G_IR(e) = 1 - K e^2/4 pi - 8 (4 pi/Z)^2 F_IR(e)`.
pub fn g_ir(e: f64, z: f64, tau: f64) -> Result<f64> {
    check_tau(tau)?;
    Ok(1.0 - total_photon_bound(e, z, LinearLogCoefficient::Large)? - q_bound(e, z, tau))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OverlapConstants {
    pub theta1: f64,
    pub theta2: f64,
    pub c_tau: f64,
    pub f_ir: f64,
    pub g_ir: f64,
    /// Bracketed constant of the total photon bound (infinite at `e = 0`).
    pub photon_k: f64,
    /// The same constant with the small linear-log coefficient.
    pub photon_k_small: f64,
    /// `photon_k * e^2 / 4 pi`, continued by 0 at `e = 0`.
    pub photon_bound: f64,
    pub l: f64,
    pub m: f64,
    pub c1: f64,
    pub c_d: f64,
    pub e_at_tau: f64,
}

/// All constants of the overlap argument in the `rho = e^2` frame.
pub fn overlap_constants(e: f64, z: f64, tau: f64, eps: f64) -> Result<OverlapConstants> {
    check_tau(tau)?;
    if !(eps > 0.0 && eps < 0.25) {
        return Err(Error::OutOfDomain(format!("eps = {eps} must lie in (0, 1/4)")));
    }
    let ae = e.abs();
    let alpha = alpha_of(e);
    // Powers of rho = e^2 are folded into single powers of |e| so that
    // e = 0 never produces 0 * inf.
    let alpha_r2t = ae.powf(2.0 + 4.0 * tau) / (4.0 * PI);
    let alpha_rt = ae.powf(2.0 + 2.0 * tau) / (4.0 * PI);
    let sqrt_alpha_rt = ae.powf(1.0 + 2.0 * tau) / (4.0 * PI).sqrt();
    let alpha3_rm2t = ae.powf(6.0 - 4.0 * tau) / (4.0 * PI).powi(3);
    let alpha4_rm2t = ae.powf(8.0 - 4.0 * tau) / (4.0 * PI).powi(4);
    let e_at_tau = -0.5 * (z / (4.0 * PI)).powi(2) * ae.powf(4.0 - 4.0 * tau);

    let theta1 = alpha.sqrt() * (2.0 * (1.0 - e_at_tau)).sqrt();
    let inner = (2.0 * (1.0 - e_at_tau)).sqrt() + (2.0 / PI).sqrt() * sqrt_alpha_rt;
    let brace = inner * inner * alpha3_rm2t / (eps * (1.0 - 2.0 * eps))
        + alpha4_rm2t / ((1.0 - 16.0 * eps * eps) * PI);
    let theta2 = 0.5 * alpha_r2t + 2f64.sqrt() * alpha_rt + 6f64.sqrt() / (eps * (1.0 - eps)) * brace.sqrt();

    let c1 = c1_relativistic(e, z)?;
    let cd = c_d(e, z)?;
    let photon_k = photon_constant(e, z, LinearLogCoefficient::Large)?;
    let photon_k_small = photon_constant(e, z, LinearLogCoefficient::Small)?;
    let photon_bound = total_photon_bound(e, z, LinearLogCoefficient::Large)?;
    let fir = f_ir(e, z, tau);
    Ok(OverlapConstants {
        theta1,
        theta2,
        c_tau: c_tau(e, z, tau),
        f_ir: fir,
        g_ir: 1.0 - photon_bound - q_bound(e, z, tau),
        photon_k,
        photon_k_small,
        photon_bound,
        l: log_factor(e, z),
        m: soft_m(e, z)?,
        c1,
        c_d: cd,
        e_at_tau,
    })
}

/// Root of `C_tau(e) = 1/2`; `None` at `tau = 1` where `C_tau >= 1`.
pub fn a_ir1(z: f64, tau: f64) -> Result<Option<f64>> {
    check_tau(tau)?;
    let (a, b) = ROOT_BRACKET;
    let f = |e: f64| c_tau(e, z, tau) - 0.5;
    if f(a) >= 0.0 {
        return Ok(None);
    }
    Ok(Some(brent(f, a, b, ROOT_XTOL * 1e-6, 600)?.x))
}

/// Root of `F_IR(e) = (Z / 4 pi)^2 / 16`.
pub fn a_ir2(z: f64, tau: f64) -> Result<f64> {
    check_tau(tau)?;
    let target = (z / (4.0 * PI)).powi(2) / 16.0;
    let (a, b) = ROOT_BRACKET;
    let a = a.min(1e-30);
    Ok(brent(|e| f_ir(e, z, tau) - target, a, b, 1e-30, 2000)?.x)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum IrMode {
    /// Largest admissible charge with `G_IR > 0`, found by bisection.
    Bisection,
    /// `min{sqrt(pi)/K(e), 1, a_ir1, a_ir2}` with `K` solved self-consistently.
    Literal,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CouplingWindow {
    pub z: f64,
    pub tau: f64,
    pub e_uv: f64,
    pub a_ir1: Option<f64>,
    pub a_ir2: f64,
    pub one: f64,
    pub mode: IrMode,
    /// `None` when `G_IR <= 0` throughout the admissible range.
    pub e_ir: Option<f64>,
    pub notes: Vec<String>,
}

fn ir_cap(z: f64, tau: f64) -> Result<(f64, Option<f64>, f64, f64)> {
    let euv = e_uv(z)?;
    let a1 = a_ir1(z, tau)?;
    let a2 = a_ir2(z, tau)?;
    let mut cap = 1f64.min(a2);
    if let Some(a1) = a1 {
        cap = cap.min(a1);
    }
    // Stay strictly inside the ultraviolet window so C_1 is defined.
    cap = cap.min(euv * (1.0 - 1e-12));
    Ok((euv, a1, a2, cap))
}

/// Infrared threshold for a given `Z` and `tau`.
pub fn e_ir(z: f64, tau: f64, mode: IrMode) -> Result<CouplingWindow> {
    check_tau(tau)?;
    let (euv, a1, a2, cap) = ir_cap(z, tau)?;
    let mut notes = Vec::new();
    if a1.is_none() {
        notes.push(format!("C_tau(e) >= 1/2 for every e at tau = {tau}: no a_ir1 root"));
    }
    let g = |e: f64| g_ir(e, z, tau).unwrap_or(f64::NEG_INFINITY);
    let e_ir = match mode {
        IrMode::Bisection => {
            if g(cap) > 0.0 {
                Some(cap)
            } else {
                // Scan downward on a geometric grid for the largest sample with
                // G_IR > 0, then bisect the crossing above it.
                let mut hi = cap;
                let mut lo = None;
                let mut x = cap;
                while x > 1e-300 {
                    x *= 0.5;
                    if g(x) > 0.0 {
                        lo = Some(x);
                        break;
                    }
                    hi = x;
                }
                lo.map(|mut lo| {
                    for _ in 0..200 {
                        let mid = 0.5 * (lo + hi);
                        if mid <= lo || mid >= hi {
                            break;
                        }
                        if g(mid) > 0.0 {
                            lo = mid;
                        } else {
                            hi = mid;
                        }
                    }
                    lo
                })
            }
        }
        IrMode::Literal => {
            let h = |e: f64| e * photon_constant(e, z, LinearLogCoefficient::Large).unwrap_or(f64::INFINITY) - PI.sqrt();
            let hi = euv * (1.0 - 1e-9);
            let root = brent(h, ROOT_BRACKET.0, hi, ROOT_XTOL, 600).map(|r| r.x);
            match root {
                Ok(r) => Some(r.min(cap)),
                Err(_) => {
                    notes.push("e K(e) = sqrt(pi) has no root below e_uv".into());
                    Some(cap)
                }
            }
        }
    };
    if e_ir.is_none() {
        notes.push("G_IR <= 0 on the whole admissible range: empty window".into());
    }
    Ok(CouplingWindow { z, tau, e_uv: euv, a_ir1: a1, a_ir2: a2, one: 1.0, mode, e_ir, notes })
}

/// The four `L^2` norms of a coupling function split at `|k| = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormBundle {
    pub f_ir_l2: f64,
    pub f_ir_over_sqrt_omega: f64,
    pub f_uv_over_sqrt_omega: f64,
    pub f_uv_over_quarter_omega: f64,
}

/// Bound on `(H_f + 1)^(-1/2) a(f) a(g) (H_f + 1)^(-1/2)` in terms of split norms.
pub fn xi_bound(f: &NormBundle, g: &NormBundle) -> f64 {
    (g.f_ir_over_sqrt_omega + g.f_ir_l2) * f.f_uv_over_sqrt_omega
        + (f.f_ir_over_sqrt_omega + f.f_ir_l2) * g.f_uv_over_sqrt_omega
        + f.f_ir_over_sqrt_omega * g.f_ir_over_sqrt_omega
        + 3f64.sqrt() * f.f_uv_over_quarter_omega * g.f_uv_over_quarter_omega
        + 0.5 * (g.f_ir_over_sqrt_omega * f.f_ir_l2 + f.f_ir_over_sqrt_omega * g.f_ir_l2)
}

/// Ceiling for `Xi(f, f)` obtained from the closed-form norm ceilings.
pub fn xi_ceiling(rho: f64, tau: f64) -> f64 {
    let r = |s: f64| if s == 0.0 { 1.0 } else { rho.powf(s) };
    1.0 / (2.0 * PI * PI)
        + 2f64.sqrt() / (PI * PI) * r(-tau)
        + 3f64.sqrt() / (2.0 * PI * PI) * r(-2.0 * tau)
        + 3f64.sqrt() / (2.0 * 2f64.sqrt() * PI) * r(-3.0 * tau)
}

/// Right-hand side of the logarithmic moment bound at radius `r`.
pub fn moment_log_bound(e: f64, z: f64, r: f64) -> f64 {
    let l = (3.0 + 4.0 * PI * r / (e * e * z)).ln();
    l * l + 4.0 * (r.powi(-2) + 1.0 / r) * l + 5.0 * r.powi(-2)
}

/// Right-hand side of the first-moment bound `40 pi / (e^2 Z)`.
pub fn moment_first_bound(e: f64, z: f64) -> f64 {
    40.0 * PI / (e * e * z)
}

/// Right-hand side of the second-moment bound at radius `r > 4`.
pub fn moment_second_bound(e: f64, z: f64, r: f64) -> Result<f64> {
    if !(r > 4.0) {
        return Err(Error::OutOfDomain(format!("R = {r} must exceed 4")));
    }
    Ok((4.0 * PI / (e * e * z)).powi(2) * (r * r + 5.0 / (0.5 - 2.0 / r)))
}

/// Right-hand side of the exponential moment bound for `<exp(beta |x|)>`.
///
/// `beta_tilde = 4 pi beta / (e^2 Z)` is the decay rate in atomic units.
/// The window `1/2 - 2/R - beta_tilde^2/4 > 0` is enforced; the bracket
/// inside the bound uses `2/R^2` as displayed in the statement.
pub fn exp_moment_bound(beta_tilde: f64, r: f64) -> Result<f64> {
    if !(r > 4.0) {
        return Err(Error::OutOfDomain(format!("R = {r} must exceed 4")));
    }
    let window = 0.5 - 2.0 / r - beta_tilde * beta_tilde / 4.0;
    if !(window > 0.0) {
        return Err(Error::OutOfDomain(format!(
            "1/2 - 2/R - beta^2/4 = {window} is not positive for R = {r}, beta = {beta_tilde}"
        )));
    }
    let denom = 0.5 - 2.0 / (r * r) - beta_tilde * beta_tilde / 4.0;
    Ok((1.0 + (4.0 / (r * r) + 2.0 * beta_tilde / r) / denom) * (beta_tilde * r).exp())
}

/// Ceiling for `sup |grad G_R|^2` with `g = sqrt(log(3 + c|x|))`.
pub fn localization_gradient_ceiling(c: f64, r: f64) -> f64 {
    4.0 * r.powi(-2) * (3.0 + c * r).ln() + 5.0 * r.powi(-2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::roots::bisect;

    #[test]
    fn c_uv_examples() {
        assert_eq!(c_uv(0.0, 1.0), 0.0);
        // Independent term-by-term arithmetic.
        let e = 0.5f64;
        let q = e * e / (4.0 * PI);
        let first = 2.0 * e / PI * (1.0 + q * q / 2.0).sqrt();
        let second = (14.0 + 6f64.sqrt() * PI) / (4.0 * PI * PI) * e * e;
        assert!((c_uv(0.5, 1.0) - (first + second)).abs() < 1e-15);
        assert!((c_uv(0.5, 1.0) - 0.45573).abs() < 1e-5);
    }

    #[test]
    fn e_uv_root_and_limit() {
        let r = e_uv(1.0).unwrap();
        assert!((c_uv(r, 1.0) - 1.0).abs() < 1e-12);
        let lim = e_uv_limit();
        let oracle = bisect(|e| 2.0 / PI * e + 0.549_55 * e * e - 1.0, 0.0, 2.0, 200);
        assert!((lim - 0.8888).abs() < 5e-4);
        assert!((lim - oracle).abs() < 1e-4);
        assert!(e_uv(1.0).unwrap() > e_uv(10.0).unwrap());
    }

    #[test]
    fn c_star_reduces_to_c_uv() {
        for &e in &[0.1, 0.3, 0.5] {
            for &z in &[1.0, 5.0] {
                assert!((c_star(e, z, 0.0, 1.0) - c_uv(e, z)).abs() < 1e-13);
            }
        }
        assert_eq!(c_star_c1(0.0, 1.0, 0.4, 0.3).unwrap(), (0.0, 1.0));
        assert!(matches!(c_star_c1(0.9, 1.0, 0.0, 1.0), Err(Error::CStarNotBelowOne { .. })));
    }

    #[test]
    fn c_d_forms_agree() {
        assert!((c_d(0.0, 1.0).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        let a = c_d(0.4, 2.0).unwrap();
        let b = c_d_restated(0.4, 2.0).unwrap();
        assert!((a - b).abs() < 1e-13);
        let near = e_uv(1.0).unwrap() * (1.0 - 1e-9);
        let big = c_d(near, 1.0).unwrap();
        assert!(big.is_finite() && big > 1e3);
        assert!(c_d(1.2, 1.0).is_err());
    }

    #[test]
    fn vanishing_set_at_zero_charge() {
        let oc = overlap_constants(0.0, 1.0, 0.9, THETA_EPS).unwrap();
        assert_eq!(oc.theta1, 0.0);
        assert_eq!(oc.theta2, 0.0);
        assert_eq!(oc.f_ir, 0.0);
        assert_eq!(oc.c_tau, 0.0);
        assert_eq!(oc.photon_bound, 0.0);
        assert_eq!(oc.g_ir, 1.0);
        assert!(oc.photon_k.is_infinite());
        let oc1 = overlap_constants(0.0, 1.0, 1.0, THETA_EPS).unwrap();
        assert_eq!(oc1.c_tau, 1.0);
    }

    #[test]
    fn log_factor_example() {
        assert!((log_factor(1.0, 1.0) - (3.0 + 400.0 * PI).ln()).abs() < 1e-15);
        assert!((log_factor(1.0, 1.0) - 7.138).abs() < 1e-3);
    }

    #[test]
    fn no_a_ir1_root_at_tau_one() {
        assert_eq!(a_ir1(1.0, 1.0).unwrap(), None);
        let a = a_ir1(1.0, 0.9).unwrap().unwrap();
        assert!((c_tau(a, 1.0, 0.9) - 0.5).abs() < 1e-12);
        assert!(a_ir1(1.0, 0.5).is_err());
    }

    #[test]
    fn e_ir_bisection_boundary() {
        let w = e_ir(1.0, 0.9, IrMode::Bisection).unwrap();
        let e = w.e_ir.expect("window at Z = 1, tau = 0.9");
        assert!(g_ir(e, 1.0, 0.9).unwrap() >= 0.0);
        let cap = w.a_ir2.min(w.a_ir1.unwrap()).min(1.0);
        assert!(e == cap || g_ir(1.01 * e, 1.0, 0.9).unwrap() < 0.0);
        let w10 = e_ir(10.0, 0.9, IrMode::Bisection).unwrap();
        assert!(w10.e_ir.unwrap() > e);
    }

    #[test]
    fn xi_symmetry_and_zero() {
        let z = NormBundle { f_ir_l2: 0.0, f_ir_over_sqrt_omega: 0.0, f_uv_over_sqrt_omega: 0.0, f_uv_over_quarter_omega: 0.0 };
        assert_eq!(xi_bound(&z, &z), 0.0);
        let f = NormBundle { f_ir_l2: 0.1, f_ir_over_sqrt_omega: 0.2, f_uv_over_sqrt_omega: 0.3, f_uv_over_quarter_omega: 0.4 };
        let g = NormBundle { f_ir_l2: 0.5, f_ir_over_sqrt_omega: 0.15, f_uv_over_sqrt_omega: 0.25, f_uv_over_quarter_omega: 0.35 };
        assert!((xi_bound(&f, &g) - xi_bound(&g, &f)).abs() < 1e-16);
        assert!((xi_ceiling(1.0, 0.0) - 0.4766).abs() < 1e-4);
    }

    #[test]
    fn exp_bound_window() {
        assert!(exp_moment_bound(0.5, 8.0).is_ok());
        assert!(exp_moment_bound(1.0, 8.0).is_err());
        assert!(exp_moment_bound(0.5, 4.0).is_err());
    }
}
