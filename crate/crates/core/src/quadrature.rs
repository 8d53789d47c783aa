//! Adaptive quadrature and the radial momentum-space integrals of the model.
//!
//! The integrator is a 7/15-point Gauss-Kronrod rule with global adaptive
//! bisection of the interval carrying the largest error estimate. Ties are
//! broken by position so results are fully deterministic.

use serde::Serialize;
use std::cell::RefCell;
use std::f64::consts::{FRAC_PI_2, PI};

use crate::closedform::NormBundle;
use crate::error::{Error, Result};
use crate::model::ModelParams;

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
pub const DEFAULT_RTOL: f64 = 1e-10;
pub const MAX_INTERVALS: usize = 2000;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadResult {
    pub value: f64,
    pub abs_error_estimate: f64,
    pub nodes_used: usize,
    pub converged: bool,
}

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        kron += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

/// Adaptive integral of `f` over the finite interval `[a, b]`.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, rtol: f64, atol: f64) -> QuadResult {
    if a == b {
        return QuadResult { value: 0.0, abs_error_estimate: 0.0, nodes_used: 0, converged: true };
    }
    let mut parts: Vec<(f64, f64, f64, f64)> = Vec::with_capacity(64);
    let (v, e) = gk15(&mut f, a, b);
    parts.push((a, b, v, e));
    let mut nodes = 15;
    loop {
        let total: f64 = parts.iter().map(|p| p.2).sum();
        let err: f64 = parts.iter().map(|p| p.3).sum();
        let done = err <= rtol * total.abs() + atol;
        if done || parts.len() >= MAX_INTERVALS {
            return QuadResult { value: total, abs_error_estimate: err, nodes_used: nodes, converged: done };
        }
        let mut worst = 0;
        for (i, p) in parts.iter().enumerate() {
            if p.3 > parts[worst].3 {
                worst = i;
            }
        }
        let (lo, hi, _, _) = parts[worst];
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return QuadResult { value: total, abs_error_estimate: err, nodes_used: nodes, converged: false };
        }
        let (v1, e1) = gk15(&mut f, lo, mid);
        let (v2, e2) = gk15(&mut f, mid, hi);
        nodes += 30;
        parts[worst] = (lo, mid, v1, e1);
        parts.insert(worst + 1, (mid, hi, v2, e2));
    }
}

/// Adaptive integral of `f` over `[a, inf)` through `r = a + t/(1 - t)`.
pub fn integrate_to_infinity<F: FnMut(f64) -> f64>(mut f: F, a: f64, rtol: f64, atol: f64) -> QuadResult {
    integrate(
        |t| {
            if t >= 1.0 {
                return 0.0;
            }
            let s = 1.0 - t;
            let v = f(a + t / s) / (s * s);
            if v.is_finite() {
                v
            } else {
                0.0
            }
        },
        0.0,
        1.0,
        rtol,
        atol,
    )
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, 0.0);
            for j in 0..n {
                let p2 = p1;
                p1 = p0;
                p0 = ((2 * j + 1) as f64 * z * p1 - j as f64 * p2) / (j + 1) as f64;
            }
            dp = n as f64 * (z * p0 - p1) / (z * z - 1.0);
            let dz = p0 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    Full,
    /// `|k| < 1`.
    Infrared,
    /// `|k| >= 1`.
    Ultraviolet,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShellSpec {
    pub kappa: f64,
    /// Upper radius; may be `f64::INFINITY`.
    pub lambda: f64,
    pub region: Region,
}

impl ShellSpec {
    pub fn new(kappa: f64, lambda: f64, region: Region) -> Self {
        Self { kappa, lambda, region }
    }

    /// Radial interval after intersecting with the region; `None` when empty.
    pub fn interval(&self) -> Option<(f64, f64)> {
        let (lo, hi) = match self.region {
            Region::Full => (self.kappa, self.lambda),
            Region::Infrared => (self.kappa, self.lambda.min(1.0)),
            Region::Ultraviolet => (self.kappa.max(1.0), self.lambda),
        };
        (lo < hi).then_some((lo, hi))
    }
}

fn radial<F: FnMut(f64) -> f64>(f: F, lo: f64, hi: f64, rtol: f64) -> QuadResult {
    if hi.is_infinite() {
        integrate_to_infinity(f, lo, rtol, 0.0)
    } else {
        integrate(f, lo, hi, rtol, 0.0)
    }
}

/// `4 pi int r^(a+2) (r + c r^2 / 2)^(-b) dr` over the shell, `c = rho^(2 tau)`.
pub fn shell_moment(a: f64, b: f64, c: f64, spec: &ShellSpec) -> Result<QuadResult> {
    let Some((lo, hi)) = spec.interval() else {
        return Ok(QuadResult { value: 0.0, abs_error_estimate: 0.0, nodes_used: 0, converged: true });
    };
    if hi.is_infinite() {
        let decay = if c > 0.0 { a + 2.0 - 2.0 * b } else { a + 2.0 - b };
        if decay >= -1.0 {
            return Err(Error::Divergent { endpoint: "infinite" });
        }
    }
    if lo == 0.0 && a + 2.0 - b <= -1.0 {
        return Err(Error::Divergent { endpoint: "zero" });
    }
    let p = a + 2.0 - b;
    let q = radial(|r| 4.0 * PI * r.powf(p) * (1.0 + 0.5 * c * r).powf(-b), lo, hi, DEFAULT_RTOL * 1e-2);
    Ok(q)
}


fn norm_from(a: f64, c: f64, spec: ShellSpec) -> Result<f64> {
    Ok(shell_moment(a, 2.0, c, &spec)?.value.sqrt() / (2f64.sqrt() * (2.0 * PI).powf(1.5)))
}

/// Split norms of the scaled coupling function on an arbitrary shell.
pub fn f_tau_norms_shell(kappa: f64, lambda: f64, tau: f64, rho: f64) -> Result<NormBundle> {
    let c = if tau == 0.0 { 1.0 } else { rho.powf(2.0 * tau) };
    let ir = ShellSpec::new(kappa, lambda, Region::Infrared);
    let uv = ShellSpec::new(kappa, lambda, Region::Ultraviolet);
    Ok(NormBundle {
        f_ir_l2: norm_from(1.0, c, ir)?,
        f_ir_over_sqrt_omega: norm_from(0.0, c, ir)?,
        f_uv_over_sqrt_omega: norm_from(0.0, c, uv)?,
        f_uv_over_quarter_omega: norm_from(0.5, c, uv)?,
    })
}

/// Split norms of the scaled coupling function on the shell `[kappa, Lambda]`.
pub fn f_tau_norms(params: &ModelParams, tau: f64, rho: f64) -> Result<NormBundle> {
    f_tau_norms_shell(params.kappa, params.lambda, tau, rho)
}

/// Closed-form ceilings of the four split norms and of the full-shell norm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormCeilings {
    pub f_ir_l2: f64,
    pub f_ir_over_sqrt_omega: f64,
    pub f_uv_over_sqrt_omega: f64,
    pub f_uv_over_quarter_omega: f64,
    pub full_over_sqrt_omega: f64,
}

pub fn norm_ceilings(tau: f64, rho: f64) -> NormCeilings {
    let r = |s: f64| if s == 0.0 { 1.0 } else { rho.powf(s) };
    NormCeilings {
        f_ir_l2: 1.0 / (2.0 * PI),
        f_ir_over_sqrt_omega: 1.0 / (2.0 * PI),
        f_uv_over_sqrt_omega: r(-tau) / (2f64.sqrt() * PI),
        f_uv_over_quarter_omega: r(-1.5 * tau) * (1.0 / (2.0 * 2f64.sqrt() * PI) + r(tau) / (2.0 * PI * PI)).sqrt(),
        full_over_sqrt_omega: r(-tau) / (2f64.sqrt() * PI),
    }
}

/// Norm of `omega^(-1/2) f` over the whole shell.
pub fn full_norm_over_sqrt_omega(kappa: f64, lambda: f64, tau: f64, rho: f64) -> Result<f64> {
    let c = if tau == 0.0 { 1.0 } else { rho.powf(2.0 * tau) };
    norm_from(0.0, c, ShellSpec::new(kappa, lambda, Region::Full))
}

/// Self-energy constant subtracted by the dressing transformation.
pub fn energy_renormalization(params: &ModelParams) -> Result<QuadResult> {
    if !(params.kappa > 0.0) {
        return Err(Error::InvalidParameter("kappa = 0: the Z^2 term is not integrable".into()));
    }
    let (e, z, m) = (params.e, params.z, params.m);
    let pref = e * e * (2.0 * PI).powi(-3) * 2.0 * PI;
    let mut q = integrate(
        |r| 1.0 / (1.0 + r / (2.0 * m)) + z * z,
        params.kappa,
        params.lambda,
        DEFAULT_RTOL * 1e-2,
        0.0,
    );
    q.value *= pref;
    q.abs_error_estimate *= pref.abs();
    Ok(q)
}

/// Closed form of [`energy_renormalization`], used as an oracle.
pub fn energy_renormalization_exact(params: &ModelParams) -> f64 {
    let (e, z, m, k, l) = (params.e, params.z, params.m, params.kappa, params.lambda);
    e * e * (2.0 * PI).powi(-3) * 2.0 * PI
        * (2.0 * m * ((1.0 + l / (2.0 * m)) / (1.0 + k / (2.0 * m))).ln() + z * z * (l - k))
}

/// Sine and cosine integrals `(Si(x), Ci(x))` for `x > 0`.
pub fn si_ci(x: f64) -> (f64, f64) {
    assert!(x > 0.0, "si_ci needs x > 0");
    if x <= 4.0 {
        let x2 = x * x;
        let (mut si, mut ci) = (0.0, 0.0);
        let mut term = x; // x^(2k+1) / (2k+1)!, signed
        let mut k = 0usize;
        loop {
            let s = term / (2 * k + 1) as f64;
            si += s;
            let next = -term * x / ((2 * k + 2) as f64);
            let c = next / (2 * k + 2) as f64;
            ci += c;
            term = next * x / ((2 * k + 3) as f64);
            k += 1;
            if s.abs() < 1e-18 * si.abs() && c.abs() < 1e-18 * ci.abs().max(1e-300) && k > 3 {
                break;
            }
            if k > 200 {
                break;
            }
        }
        let _ = x2;
        (si, EULER_GAMMA + x.ln() + ci)
    } else {
        // Continued fraction for E1(ix) with the modified Lentz method.
        use num_complex::Complex64 as C;
        let tiny = 1e-300;
        let mut b = C::new(1.0, x);
        let mut c = C::new(1.0 / tiny, 0.0);
        let mut d = C::new(1.0, 0.0) / b;
        let mut h = d;
        for i in 1..1000 {
            let a = -((i * i) as f64);
            b += 2.0;
            d = C::new(1.0, 0.0) / (a * d + b);
            c = b + a / c;
            let del = c * d;
            h *= del;
            if (del.re - 1.0).abs() + del.im.abs() < 1e-16 {
                break;
            }
        }
        h *= C::new(x.cos(), -x.sin());
        (FRAC_PI_2 + h.im, -h.re)
    }
}

pub fn sine_integral(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else if x < 0.0 {
        -si_ci(-x).0
    } else {
        si_ci(x).0
    }
}

/// `Cin(x) = int_0^x (1 - cos s) / s ds`.
pub fn cin(x: f64) -> f64 {
    let x = x.abs();
    if x == 0.0 {
        return 0.0;
    }
    if x <= 1.0 {
        let x2 = x * x;
        let mut term = x2 / 2.0; // x^(2k) / (2k)!
        let mut sum = 0.0;
        let mut k = 1usize;
        loop {
            let t = term / (2 * k) as f64;
            if k % 2 == 1 {
                sum += t;
            } else {
                sum -= t;
            }
            if t < 1e-18 * sum.abs() {
                break;
            }
            term *= x2 / ((2 * k + 1) * (2 * k + 2)) as f64;
            k += 1;
        }
        return sum;
    }
    let mut total = cin(1.0);
    let mut lo = 1.0;
    let step = 2.0 * PI;
    while lo < x {
        let hi = (lo + step).min(x);
        total += integrate(|s| (1.0 - s.cos()) / s, lo, hi, 1e-14, 1e-16).value;
        lo = hi;
    }
    total
}

/// Ceiling `gamma_E + log 15 + 91/30` on `Cin`, plus `2 log|x|` beyond `|x| = 1`.
pub fn cin_ceiling(x: f64) -> f64 {
    let base = EULER_GAMMA + 15f64.ln() + 91.0 / 30.0;
    if x.abs() <= 1.0 {
        base
    } else {
        base + 2.0 * x.abs().ln()
    }
}

/// Correction potential generated by the dressing transformation at radius `x`.
pub fn correction_potential(params: &ModelParams, x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::InvalidParameter(format!("radius {x} must be positive")));
    }
    let s = x / params.m;
    let bracket = sine_integral(params.kappa * s) + FRAC_PI_2 - sine_integral(params.lambda * s);
    Ok(params.e * params.e * params.z / params.m * (2.0 * PI).powi(-3) * 4.0 * PI * bracket / s)
}

/// `(2/3)(2 pi)^(-3) int (2 omega)^(-1) k^2 beta^3 d^3k` for the massless dispersion.
pub fn effective_mass_coefficient() -> Result<QuadResult> {
    let mut q = shell_moment(1.0, 3.0, 1.0, &ShellSpec::new(0.0, f64::INFINITY, Region::Full))?;
    let pref = 2.0 / 3.0 * (2.0 * PI).powi(-3) * 0.5;
    q.value *= pref;
    q.abs_error_estimate *= pref;
    Ok(q)
}

/// The same coefficient with `omega = sqrt(k^2 + mb^2)`.
pub fn effective_mass_coefficient_massive(mb: f64) -> QuadResult {
    let pref = 2.0 / 3.0 * (2.0 * PI).powi(-3) * 4.0 * PI;
    let mut q = integrate_to_infinity(
        |r| {
            let w = (r * r + mb * mb).sqrt();
            let beta = 1.0 / (w + 0.5 * r * r);
            r * r * r * r * beta.powi(3) / (2.0 * w)
        },
        0.0,
        1e-12,
        0.0,
    );
    q.value *= pref;
    q.abs_error_estimate *= pref;
    q
}

/// Second-order binding correction over all boson momenta, relativistic units.
///
/// `element(s)` returns `<p psi_at, (h - E_at + s)^(-1) p psi_at>` at shift
/// `s = omega + k^2/2`. Every node is checked against the resolvent envelope
/// `(alpha Z)^2 / omega`.
pub fn binding_second_order<F>(e: f64, z: f64, element: F) -> Result<QuadResult>
where
    F: Fn(f64) -> Result<f64>,
{
    if e == 0.0 {
        return Ok(QuadResult { value: 0.0, abs_error_estimate: 0.0, nodes_used: 0, converged: true });
    }
    let a = e * e * z / (4.0 * PI);
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let q = integrate_to_infinity(
        |r| {
            if r == 0.0 || failure.borrow().is_some() {
                return 0.0;
            }
            let s = r + 0.5 * r * r;
            let beta = 1.0 / s;
            let m = match element(s) {
                Ok(m) => m,
                Err(err) => {
                    *failure.borrow_mut() = Some(err);
                    return 0.0;
                }
            };
            if m.abs() > a * a / r * (1.0 + 1e-9) {
                *failure.borrow_mut() = Some(Error::OutOfDomain(format!(
                    "matrix element {m} exceeds the envelope {} at |k| = {r}",
                    a * a / r
                )));
                return 0.0;
            }
            4.0 * PI * r * r * beta * beta * r * r * m / (2.0 * r)
        },
        0.0,
        1e-9,
        0.0,
    );
    if let Some(err) = failure.into_inner() {
        return Err(err);
    }
    let pref = -e * e / 3.0 * (2.0 * PI).powi(-3);
    Ok(QuadResult { value: pref * q.value, abs_error_estimate: pref.abs() * q.abs_error_estimate, ..q })
}

/// Magnitude bound on [`binding_second_order`] with the matrix element at its envelope.
pub fn binding_envelope(e: f64, z: f64) -> QuadResult {
    let a = e * e * z / (4.0 * PI);
    let pref = e * e / 3.0 * (2.0 * PI).powi(-3) * 4.0 * PI * a * a;
    let q = integrate_to_infinity(
        |r| {
            if r == 0.0 {
                return 0.5;
            }
            let beta = 1.0 / (r + 0.5 * r * r);
            r * r * beta * beta * r * r / (2.0 * r * r)
        },
        0.0,
        1e-10,
        0.0,
    );
    QuadResult { value: pref * q.value, abs_error_estimate: pref * q.abs_error_estimate, ..q }
}

/// Mass-recalibrated matrix element with the operator ratio set to one: `-(alpha Z)^2 / s`.
pub fn ratio_one_element(alpha_z: f64) -> impl Fn(f64) -> Result<f64> {
    move |s| Ok(-alpha_z * alpha_z / s)
}

/// Mass-recalibrated matrix element with the full resolvent,
/// `-<p psi_at, (h - E_at + s)^(-1) (h - E_at) p psi_at> / s`, from the `l = 1`
/// radial solve.
pub fn resolvent_element(alpha_z: f64) -> impl Fn(f64) -> Result<f64> {
    move |s| Ok(-alpha_z * alpha_z / s + crate::particle::radial_resolvent_l1(alpha_z, s)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exactness() {
        let q = integrate(|x| x.powi(5) - 3.0 * x * x, -1.0, 2.0, 1e-14, 0.0);
        assert!((q.value - (64.0 / 6.0 - 1.0 / 6.0 - 9.0)).abs() < 1e-13);
        let (x, w) = gauss_legendre(8);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(14)).sum();
        assert!((s - 2.0 / 15.0).abs() < 1e-14);
        let (x, w) = gauss_legendre(7);
        assert_eq!(x[3], 0.0);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn b_two_family_matches_antiderivative() {
        for &c in &[0.25, 1.0, 4.0] {
            let q = shell_moment(0.0, 2.0, c, &ShellSpec::new(0.0, f64::INFINITY, Region::Full)).unwrap();
            assert!((q.value / (8.0 * PI / c) - 1.0).abs() < 1e-9, "c = {c}");
        }
    }

    #[test]
    fn divergent_configurations_are_named() {
        let inf = ShellSpec::new(0.0, f64::INFINITY, Region::Full);
        assert_eq!(shell_moment(1.0, 1.0, 1.0, &inf).unwrap_err(), Error::Divergent { endpoint: "infinite" });
        assert_eq!(shell_moment(-2.0, 2.0, 1.0, &inf).unwrap_err(), Error::Divergent { endpoint: "zero" });
    }

    #[test]
    fn region_additivity() {
        for &(a, b) in &[(0.0, 2.0), (1.0, 2.0), (0.5, 2.0), (1.0, 3.0)] {
            let full = shell_moment(a, b, 1.0, &ShellSpec::new(0.1, 10.0, Region::Full)).unwrap().value;
            let ir = shell_moment(a, b, 1.0, &ShellSpec::new(0.1, 10.0, Region::Infrared)).unwrap().value;
            let uv = shell_moment(a, b, 1.0, &ShellSpec::new(0.1, 10.0, Region::Ultraviolet)).unwrap().value;
            assert!(((ir + uv) / full - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn effective_mass_coefficient_value() {
        let q = effective_mass_coefficient().unwrap();
        assert!((q.value / (1.0 / (6.0 * PI * PI)) - 1.0).abs() < 1e-9);
        let heavy = effective_mass_coefficient_massive(1.0);
        assert!(heavy.value.is_finite() && heavy.value > 0.0 && heavy.value < q.value);
    }

    #[test]
    fn sine_cosine_integrals() {
        let cases = [
            (0.5, 0.493_107_418_043_066_74, -0.177_784_078_806_612_87),
            (1.0, 0.946_083_070_367_183_1, 0.337_403_922_900_968_16),
            (3.9, 1.776_501_360_447_805_5, -0.123_499_349_207_815_36),
            (4.1, 1.738_743_626_491_768_8, -0.156_165_391_828_121),
            (10.0, 1.658_347_594_218_874, -0.045_456_433_004_455_4),
            (100.0, 1.562_225_466_889_056, -0.005_148_825_142_610_5),
        ];
        for (x, si, ci) in cases {
            let (s, c) = si_ci(x);
            assert!((s - si).abs() < 1e-12, "Si({x}) = {s}");
            assert!((c - ci).abs() < 1e-12, "Ci({x}) = {c}");
        }
    }

    #[test]
    fn sine_integral_against_quadrature() {
        for &x in &[2.0, 4.0, 7.5, 30.0] {
            let q = integrate(|t| if t == 0.0 { 1.0 } else { t.sin() / t }, 0.0, x, 1e-14, 1e-15).value;
            assert!((sine_integral(x) - q).abs() < 1e-12);
        }
    }

    #[test]
    fn cin_values() {
        assert_eq!(cin(0.0), 0.0);
        let c100 = cin(100.0);
        let oracle = EULER_GAMMA + 100f64.ln() - si_ci(100.0).1;
        assert!((c100 - oracle).abs() < 1e-11);
        assert!((c100 - 5.1875).abs() < 1e-4);
        assert!(c100 <= cin_ceiling(1.0));
        assert!((cin_ceiling(1.0) - 6.3186).abs() < 1e-4);
        assert!(cin(1e4) <= cin_ceiling(1e4));
        let small = 0.3f64;
        let q = integrate(|s| if s == 0.0 { 0.0 } else { (1.0 - s.cos()) / s }, 0.0, small, 1e-14, 1e-18).value;
        assert!((cin(small) - q).abs() < 1e-15);
    }

    #[test]
    fn correction_potential_limits() {
        let p = ModelParams::new(1.0, 1.0, 1.0, 1e-6, 1e6).unwrap();
        assert!(correction_potential(&p, 1.0).unwrap().abs() < 1e-4);
        let p0 = ModelParams::new(0.0, 1.0, 1.0, 0.1, 10.0).unwrap();
        assert_eq!(correction_potential(&p0, 1.0).unwrap(), 0.0);
        let p = ModelParams::new(0.3, 1.0, 1.0, 0.1, 10.0).unwrap();
        let bound = (0..200)
            .map(|i| 0.1 * (1000f64).powf(i as f64 / 199.0))
            .map(|x| (x * correction_potential(&p, x).unwrap()).abs())
            .fold(0.0, f64::max);
        assert!(bound < p.e * p.e * p.z * (2.0 * PI).powi(-3) * 4.0 * PI * 4.0);
    }

    #[test]
    fn energy_renormalization_growth() {
        let p = |k: f64, l: f64| ModelParams::new(0.3, 1.0, 1.0, k, l).unwrap();
        let q = energy_renormalization(&p(0.1, 10.0)).unwrap().value;
        assert!((q / energy_renormalization_exact(&p(0.1, 10.0)) - 1.0).abs() < 1e-10);
        let q100 = energy_renormalization(&p(0.1, 100.0)).unwrap().value;
        assert!(q100 > q && q > 0.0);
        let zero = ModelParams::new(0.0, 1.0, 1.0, 0.1, 10.0).unwrap();
        assert_eq!(energy_renormalization(&zero).unwrap().value, 0.0);
    }

    #[test]
    fn norm_ceilings_hold() {
        let n = f_tau_norms_shell(0.0, f64::INFINITY, 0.0, 1.0).unwrap();
        let c = norm_ceilings(0.0, 1.0);
        assert!(n.f_ir_l2 < c.f_ir_l2);
        assert!(n.f_ir_over_sqrt_omega < c.f_ir_over_sqrt_omega);
        assert!(n.f_uv_over_sqrt_omega <= c.f_uv_over_sqrt_omega);
        assert!(n.f_uv_over_quarter_omega <= c.f_uv_over_quarter_omega);
        let empty = f_tau_norms_shell(1.0, 10.0, 0.0, 1.0).unwrap();
        assert_eq!(empty.f_ir_l2, 0.0);
        assert_eq!(empty.f_ir_over_sqrt_omega, 0.0);
    }

    #[test]
    fn binding_ratio_one_reproduces_closed_form() {
        let (e, z) = (0.3, 1.0);
        let a = e * e * z / (4.0 * PI);
        let q = binding_second_order(e, z, ratio_one_element(a)).unwrap();
        let target = 0.5 * a * a * e * e / (6.0 * PI * PI);
        assert!((q.value / target - 1.0).abs() < 1e-6);
        assert_eq!(binding_second_order(0.0, z, ratio_one_element(0.0)).unwrap().value, 0.0);
        let env = binding_envelope(e, z).value;
        assert!(q.value.abs() < env);
    }

    #[test]
    fn binding_full_resolvent_is_finite_and_below_ratio_one() {
        let (e, z) = (0.3, 1.0);
        let a = e * e * z / (4.0 * PI);
        let full = binding_second_order(e, z, resolvent_element(a)).unwrap();
        let one = binding_second_order(e, z, ratio_one_element(a)).unwrap();
        assert!(full.value.is_finite() && full.value > 0.0);
        assert!(full.value < one.value);
        assert!(full.value < binding_envelope(e, z).value);
    }
}
