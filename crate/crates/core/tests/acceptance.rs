//! Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::f64::consts::PI;
use std::process::{Command, ExitCode};
use std::time::Instant;

use nelson_core::closedform::{c_star, c_uv, e_ir, e_uv, e_uv_limit, g_ir, IrMode};
use nelson_core::fockspace::{FockBasis, ModeGrid};
use nelson_core::model::{make_params, ModelParams, ScaleFrame};
use nelson_core::observables::{overlap_with_decoupled, photon_number};
use nelson_core::particle::PositionGrid;
use nelson_core::quadrature::{
    binding_envelope, binding_second_order, cin, effective_mass_coefficient, f_tau_norms_shell, norm_ceilings,
    ratio_one_element, resolvent_element, shell_moment, Region, ShellSpec, EULER_GAMMA,
};
use nelson_core::spectral::assemble::{AssembledModel, Variant};
use nelson_core::spectral::dense::dense_spectrum;
use nelson_core::spectral::identities::{
    effective_mass_numeric, effective_mass_riemann, pull_through_residual, soft_decomposition_residual,
};
use nelson_core::spectral::solve::{reference_state, solve_ground, Method, SolveOptions};
use nelson_core::verify::{build_model, run_suite, Resolution, Status, SuiteConfig};

/// Slacks of the inequality suite at the default model, frozen from a reviewed run.
const SUITE_GOLDENS: [(&str, f64); 12] = [
    ("energy.upper", 5.425997886832976e-6),
    ("energy.lower", 0.24044230567267488),
    ("binding", 3.956912976639592e-6),
    ("localization", 4.972856545384089),
    ("moment.log", 64.1011899687889),
    ("moment.first", 1160.5167355809483),
    ("moment.second", 1562966.2831395334),
    ("moment.exp", 77.09354130783177),
    ("photons.hard", 0.00960461412583029),
    ("photons.soft", 5796.791362895769),
    ("photons.total", 7146.0694062950415),
    ("markov", 1.1845879380745217e-6),
];
const GOLDEN_RTOL: f64 = 1e-8;
const E_IR_GOLDEN: f64 = 7.869806336742208e-9;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn params(e: f64, z: f64) -> ModelParams {
    make_params(e, z, 1.0, 0.1, 10.0).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn criterion_1() -> Outcome {
    let mut worst: f64 = 0.0;
    for z in [1.0, 2.0, 5.0, 10.0] {
        for i in 1..=12 {
            let e = 0.05 * i as f64;
            worst = worst.max((c_star(e, z, 0.0, 1.0) - c_uv(e, z)).abs());
        }
    }
    outcome(worst < 1e-13, format!("max |C_*(e,0,1) - C_UV(e)| = {worst:.3e}"))
}

/// Root of `(2/pi) e + (14 + sqrt(6) pi) e^2 / (4 pi^2) = 1` by bisection.
fn small_z_root_oracle() -> f64 {
    let f = |e: f64| 2.0 / PI * e + (14.0 + 6f64.sqrt() * PI) / (4.0 * PI * PI) * e * e - 1.0;
    let (mut lo, mut hi) = (0.0, 2.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

fn criterion_2() -> Outcome {
    let mut worst: f64 = 0.0;
    for z in [1e-12, 1.0, 10.0, 1e3] {
        let r = e_uv(z).unwrap();
        worst = worst.max((c_uv(r, z) - 1.0).abs());
    }
    let oracle = small_z_root_oracle();
    let limit_err = (e_uv_limit() - oracle).abs().max((e_uv(1e-12).unwrap() - oracle).abs());
    let scaled: Vec<f64> = [1e4, 1e5, 1e6].iter().map(|&z: &f64| e_uv(z).unwrap() * z.cbrt()).collect();
    let mean = scaled.iter().sum::<f64>() / 3.0;
    let drift = scaled.iter().map(|s| (s - mean).abs() / mean).fold(0.0, f64::max);
    outcome(
        worst < 1e-12 && limit_err < 1e-9 && (oracle - 0.8888).abs() < 1e-3 && drift < 0.05,
        format!("max residual {worst:.2e}, Z->0 root {oracle:.10} (err {limit_err:.1e}), Z^(1/3) drift {drift:.2e}"),
    )
}

/// Composite Simpson rule for `int_0^x (1 - cos t)/t dt`.
fn cin_simpson(x: f64, n: usize) -> f64 {
    let f = |t: f64| if t == 0.0 { 0.0 } else { (1.0 - t.cos()) / t };
    let h = x / n as f64;
    let mut s = f(0.0) + f(x);
    for i in 1..n {
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(i as f64 * h);
    }
    s * h / 3.0
}

fn criterion_3() -> Outcome {
    let mut shell_err: f64 = 0.0;
    for c in [0.25, 1.0, 2.0, 7.5] {
        let q = shell_moment(0.0, 2.0, c, &ShellSpec::new(0.0, f64::INFINITY, Region::Full)).unwrap();
        shell_err = shell_err.max(rel(q.value, 8.0 * PI / c));
    }
    let mass_err = rel(effective_mass_coefficient().unwrap().value, 1.0 / (6.0 * PI * PI));
    let mut norms_ok = true;
    for &(kappa, lambda) in &[(0.1, 10.0), (1e-3, 1e3), (0.5, 2.0)] {
        for &(tau, rho) in &[(0.0, 1.0), (0.9, 0.3), (1.0, 0.0716), (0.8, 2.0)] {
            let n = f_tau_norms_shell(kappa, lambda, tau, rho).unwrap();
            let c = norm_ceilings(tau, rho);
            norms_ok &= n.f_ir_l2 < c.f_ir_l2
                && n.f_ir_over_sqrt_omega < c.f_ir_over_sqrt_omega
                && n.f_uv_over_sqrt_omega < c.f_uv_over_sqrt_omega
                && n.f_uv_over_quarter_omega < c.f_uv_over_quarter_omega;
        }
    }
    let ceiling = EULER_GAMMA + 15f64.ln() + 91.0 / 30.0;
    let c100 = cin(100.0);
    let oracle = cin_simpson(100.0, 2_000_000);
    let cin_ok = c100 <= ceiling && (c100 - oracle).abs() < 1e-9 && (c100 - 5.1875).abs() < 1e-3;
    outcome(
        shell_err < 1e-9 && mass_err < 1e-9 && norms_ok && cin_ok,
        format!(
            "shell rel err {shell_err:.1e}, mass coefficient rel err {mass_err:.1e}, norms below ceilings {norms_ok}, \
             cin(100) = {c100:.10} (oracle {oracle:.10}, ceiling {ceiling:.6})"
        ),
    )
}

/// Relativistic-unit Gross model on an `L = 8` box with `M` modes and cap `N`.
fn identity_model(m: usize, n_max: usize, n: usize) -> AssembledModel {
    let p = params(0.3, 1.0);
    let grid = PositionGrid::new(n, 8.0).unwrap();
    let modes = ModeGrid::build(p.kappa, p.lambda, m, 1).unwrap();
    let basis = FockBasis::new(m, n_max).unwrap();
    AssembledModel::new(&p, ScaleFrame::identity(), Some(grid), modes, basis, Variant::Gross).unwrap()
}

const IDENTITY_MODELS: [(usize, usize, usize); 2] = [(2, 3, 8), (3, 2, 16)];

fn criterion_4a() -> Outcome {
    let mut worst: f64 = 0.0;
    for &(m, n_max, n) in &IDENTITY_MODELS {
        let model = identity_model(m, n_max, n);
        for j in 0..m {
            worst = worst.max(pull_through_residual(&model, j, 7 + j as u64).unwrap());
        }
    }
    outcome(worst < 1e-10, format!("max pull-through residual {worst:.2e} over (M,N,n) = {IDENTITY_MODELS:?}"))
}

fn criterion_4b() -> Outcome {
    let (mut r1, mut r2, mut c1, mut c2): (f64, f64, f64, f64) = (0.0, 0.0, 0.0, 0.0);
    for &(m, n_max, n) in &IDENTITY_MODELS {
        let model = identity_model(m, n_max, n);
        let gs = solve_ground(&model, &SolveOptions { tol: 1e-12, ..Default::default() }).unwrap();
        let u = PI / 8.0;
        let s = soft_decomposition_residual(&model, &gs.vector, gs.energy, [u, u, u], 0.75).unwrap();
        r1 = r1.max(s.res1);
        r2 = r2.max(s.res2);
        c1 = c1.max(s.res1_wrap_corrected);
        c2 = c2.max(s.res2_wrap_corrected);
    }
    outcome(
        r1 < 1e-10 && r2 < 1e-10,
        format!("res1 {r1:.2e}, res2 {r2:.2e} (after removing lattice wraparound and eigen-residual: {c1:.1e}, {c2:.1e})"),
    )
}

fn criterion_5() -> Outcome {
    let p = params(0.3, 100.0);
    let mut worst: f64 = 0.0;
    let mut dims = Vec::new();
    for &(m, n_max) in &[(1, 2), (2, 1), (2, 2)] {
        let res = Resolution { grid_n: 8, box_l: 6.0, modes_radial: m, modes_angular: 1, n_max };
        let model = build_model(&p, &res, Variant::Gross).unwrap();
        let dense = dense_spectrum(&model.to_sparse().unwrap()).unwrap()[0];
        for method in [Method::Lanczos, Method::Schur] {
            let gs = solve_ground(&model, &SolveOptions { tol: 1e-10, maxit: 20_000, method }).unwrap();
            worst = worst.max((gs.energy - dense).abs());
        }
        dims.push(model.dim());
    }
    outcome(worst < 1e-10, format!("max |E_iterative - E_dense| = {worst:.2e} at Z = 100, dimensions {dims:?}"))
}

fn criterion_6() -> Outcome {
    let start = Instant::now();
    let cfg = SuiteConfig { params: params(0.3, 1.0), tau: 0.9, resolution: Resolution::default(), tol: 1e-10 };
    let reports = run_suite(&cfg, &[]);
    let secs = start.elapsed().as_secs_f64();
    let mut bad = Vec::new();
    for (id, golden) in SUITE_GOLDENS {
        match reports.iter().find(|r| r.id == id) {
            Some(r) if r.status == Status::Pass && r.slack.is_some_and(|s| rel(s, golden) < GOLDEN_RTOL) => {}
            Some(r) => bad.push(format!("{id}: {:?} slack {:?}", r.status, r.slack)),
            None => bad.push(format!("{id}: missing")),
        }
    }
    let detail = if bad.is_empty() {
        format!("{} goldens reproduced to {GOLDEN_RTOL:e} in {secs:.1} s", SUITE_GOLDENS.len())
    } else {
        format!("{} in {secs:.1} s", bad.join("; "))
    };
    outcome(bad.is_empty() && secs < 300.0, detail)
}

fn criterion_7() -> Outcome {
    let w = e_ir(1.0, 0.9, IrMode::Bisection).unwrap();
    let Some(top) = w.e_ir else {
        return outcome(false, "G_IR window empty at Z = 1, tau = 0.9".into());
    };
    let mut ok = rel(top, E_IR_GOLDEN) < 1e-8;
    let mut parts = vec![format!("e_IR = {top:.6e}")];
    for frac in [0.25, 0.5, 1.0] {
        let e = top * frac;
        let model = build_model(&params(e, 1.0), &Resolution::default(), Variant::Gross).unwrap();
        let atomic = reference_state(&model, 1e-12).unwrap();
        let gs = solve_ground(&model, &SolveOptions::default()).unwrap();
        let o = overlap_with_decoupled(&model, &gs.vector, &atomic.psi).unwrap();
        let n = photon_number(&model, &gs.vector);
        let g = g_ir(e, 1.0, 0.9).unwrap();
        let markov = o.vacuum_weight - (1.0 - n.total);
        ok &= g > 0.0 && o.overlap_p >= g && markov >= -1e-12;
        parts.push(format!("e/e_IR = {frac}: overlap_P {:.6} >= G_IR {g:.6}, Markov margin {markov:.1e}", o.overlap_p));
    }
    outcome(ok, parts.join(", "))
}

fn criterion_8() -> Outcome {
    let basis = FockBasis::new(72, 2).unwrap();
    let modes = ModeGrid::build(0.1, 10.0, 12, 6).unwrap();
    let free = effective_mass_numeric(&params(0.0, 1.0), &modes, &basis, 1e-11).unwrap();
    let e = 0.1;
    let m = effective_mass_numeric(&params(e, 1.0), &modes, &basis, 1e-11).unwrap();
    let predicted = e * e * m.riemann_sum;
    let mismatch = rel(m.m_eff_over_m - 1.0, predicted);
    let continuum = 1.0 / (6.0 * PI * PI);
    let trend: Vec<f64> =
        [2, 4, 8, 12].iter().map(|&nr| effective_mass_riemann(&ModeGrid::build(0.1, 10.0, nr, 6).unwrap())).collect();
    let monotone = trend.windows(2).all(|w| w[1] > w[0]);
    let ratio = trend[3] / continuum;
    outcome(
        free.m_eff_over_m == 1.0 && mismatch < 1e-3 && monotone && ratio > 0.5 && ratio < 2.0,
        format!(
            "e = 0 gives {}, e = 0.1 correction mismatch {mismatch:.2e}, Riemann sum / continuum over radial nodes \
             {{2,4,8,12}} = {:?}",
            free.m_eff_over_m,
            trend.iter().map(|t| format!("{:.5}", t / continuum)).collect::<Vec<_>>()
        ),
    )
}

fn criterion_9() -> Outcome {
    let (e, z) = (0.3, 1.0);
    let az = params(e, z).alpha_z();
    let expected = 0.5 * az * az * e * e / (6.0 * PI * PI);
    let ratio_one = binding_second_order(e, z, ratio_one_element(az)).unwrap().value;
    let full = binding_second_order(e, z, resolvent_element(az)).unwrap().value;
    let envelope = binding_envelope(e, z).value;
    let err = rel(ratio_one, expected);
    outcome(
        err < 1e-6 && full.is_finite() && full > 0.0 && full < envelope,
        format!("ratio-one rel err {err:.1e}, full resolvent {full:.6e} < envelope {envelope:.6e}"),
    )
}

fn criterion_10() -> Outcome {
    let dir = std::env::temp_dir().join(format!("nelson-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("verify.cfg");
    std::fs::write(&cfg, "# determinism run\ne = 0.3\nZ = 1\nkappa = 0.1\nlambda = 10\nformat = json\n").unwrap();
    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_nelson"))
            .args(["verify", "--config"])
            .arg(&cfg)
            .env("RAYON_NUM_THREADS", threads)
            .env("OMP_NUM_THREADS", threads)
            .output()
            .unwrap()
    };
    let a = run("1");
    let b = run("4");
    let _ = std::fs::remove_dir_all(&dir);
    let parsed = serde_json::from_slice::<serde_json::Value>(&a.stdout).is_ok();
    outcome(
        parsed && !a.stdout.is_empty() && a.stdout == b.stdout && a.status.code() == b.status.code(),
        format!("{} bytes of JSON, identical across thread counts: {}", a.stdout.len(), a.stdout == b.stdout),
    )
}

type Criterion = (&'static str, &'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("1", "C_*(e, 0, 1) equals C_UV(e)", criterion_1),
        ("2", "e_UV root, small-Z limit and Z^(-1/3) scaling", criterion_2),
        ("3", "quadrature oracles and norm ceilings", criterion_3),
        ("4a", "pull-through residual below 1e-10", criterion_4a),
        ("4b", "telescoping residuals below 1e-10", criterion_4b),
        ("5", "Lanczos matches dense diagonalization", criterion_5),
        ("6", "inequality suite passes with pinned slacks", criterion_6),
        ("7", "overlap chain in the G_IR window", criterion_7),
        ("8", "effective mass against the Riemann sum", criterion_8),
        ("9", "binding expansion", criterion_9),
        ("10", "verify output is deterministic", criterion_10),
    ];
    let mut failed = 0;
    for (id, desc, run) in criteria {
        let start = Instant::now();
        let o = run();
        let verdict = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {id}: {verdict} {desc}: {} [{:.1} s]", o.detail, start.elapsed().as_secs_f64());
        failed += usize::from(!o.pass);
    }
    println!("acceptance: {failed} of {} criteria failed", criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
