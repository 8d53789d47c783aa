//! Assembly, solvers and operator identities on small models.

use approx::assert_relative_eq;
use nelson_core::fockspace::{FockBasis, ModeGrid};
use nelson_core::linalg::{dot, norm, normalize, sub, LinearOperator, C64};
use nelson_core::model::{make_params, ModelParams, ScaleFrame};
use nelson_core::particle::{atomic_ground, AtomicHamiltonian, PositionGrid};
use nelson_core::spectral::assemble::{AssembledModel, Variant};
use nelson_core::spectral::identities::{
    effective_mass_numeric, lattice_modes, pull_through_residual, soft_decomposition_residual, translation_commutator,
};
use nelson_core::spectral::solve::{solve_ground, Method, SolveOptions};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn params(e: f64) -> ModelParams {
    make_params(e, 1.0, 1.0, 0.1, 10.0).unwrap()
}

fn model(p: &ModelParams, frame: ScaleFrame, n: usize, l: f64, m: usize, n_max: usize, variant: Variant) -> AssembledModel {
    let grid = PositionGrid::new(n, l).unwrap();
    let modes = ModeGrid::build(p.kappa, p.lambda, m, 1).unwrap();
    let basis = FockBasis::new(modes.len(), n_max).unwrap();
    AssembledModel::new(p, frame, Some(grid), modes, basis, variant).unwrap()
}

fn random_unit(n: usize, seed: u64) -> Vec<C64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<C64> = (0..n).map(|_| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)).collect();
    normalize(&mut v);
    v
}

fn all_variants(p: &ModelParams) -> Vec<AssembledModel> {
    let frame = ScaleFrame::solver(p);
    let mut out: Vec<AssembledModel> = [Variant::Gross, Variant::Nelson, Variant::V0]
        .into_iter()
        .map(|v| model(p, frame, 4, 3.0, 2, 2, v))
        .collect();
    let modes = ModeGrid::build(p.kappa, p.lambda, 2, 6).unwrap();
    let basis = FockBasis::new(modes.len(), 2).unwrap();
    out.push(AssembledModel::new(p, frame, None, modes, basis, Variant::Fiber { p: [0.1, -0.2, 0.3] }).unwrap());
    out
}

#[test]
fn literal_matrix_is_hermitian_and_matches_matvec() {
    for e in [0.0, 0.3, 1.2] {
        for m in all_variants(&params(e)) {
            let h = m.to_sparse().unwrap();
            assert!(h.hermiticity_defect() < 1e-12, "{:?} at e = {e}", m.variant);
            let v = random_unit(m.dim(), 3);
            let d = norm(&sub(&h.apply_vec(&v), &m.apply_vec(&v)));
            assert!(d < 1e-11 * norm(&m.apply_vec(&v)).max(1.0), "{:?} at e = {e}: {d}", m.variant);
        }
    }
}

#[test]
fn zero_charge_decouples_particle_and_field() {
    let p = params(0.0);
    let m = model(&p, ScaleFrame::solver(&p), 8, 4.0, 2, 2, Variant::Gross);
    let gs = solve_ground(&m, &SolveOptions { tol: 1e-12, ..Default::default() }).unwrap();
    assert!(gs.energy.abs() < 1e-12);
    let vacuum: f64 = gs.vector[..m.np].iter().map(|v| v.norm_sqr()).sum();
    assert_relative_eq!(vacuum, 1.0, epsilon = 1e-12);
}

#[test]
fn vacuum_expectation_of_bare_nelson_is_kinetic_energy() {
    // The undressed coupling, including the attraction to the fixed source, is
    // linear in the field and so has no vacuum expectation.
    let p = params(0.3);
    let frame = ScaleFrame::solver(&p);
    let m = model(&p, frame, 8, 6.0, 2, 2, Variant::Nelson);
    let grid = m.grid.clone().unwrap();
    let at = atomic_ground(&grid, frame.coulomb(&p), 0.5 * grid.h, 1e-12).unwrap();
    let big = m.embed_vacuum(&at.psi);
    let kinetic = AtomicHamiltonian { grid: &grid, potential: vec![0.0; grid.points()] };
    let lhs = dot(&big, &m.apply_vec(&big)).re;
    let rhs = dot(&at.psi, &kinetic.apply_vec(&at.psi)).re;
    assert_relative_eq!(lhs, rhs, max_relative = 1e-12);
}

#[test]
fn energies_are_covariant_under_the_unit_frame() {
    // The same lattice expressed in relativistic and atomic units.
    let p = params(0.3);
    let atomic = ScaleFrame::solver(&p);
    let l_atomic = 6.0;
    let l_rel = l_atomic / atomic.rho;
    let opts = SolveOptions { tol: 1e-8, maxit: 20_000, method: Method::Lanczos };
    let a = solve_ground(&model(&p, atomic, 8, l_atomic, 2, 1, Variant::Gross), &opts).unwrap();
    let r = solve_ground(&model(&p, ScaleFrame::identity(), 8, l_rel, 2, 1, Variant::Gross), &opts).unwrap();
    assert_relative_eq!(a.energy_relativistic, r.energy_relativistic, max_relative = 1e-8);
    assert_relative_eq!(a.energy * atomic.rho * atomic.rho, r.energy, max_relative = 1e-8);
}

#[test]
fn lanczos_and_schur_agree() {
    let p = make_params(0.3, 100.0, 1.0, 0.1, 10.0).unwrap();
    let m = model(&p, ScaleFrame::solver(&p), 8, 6.0, 1, 2, Variant::Gross);
    let run = |method| solve_ground(&m, &SolveOptions { tol: 1e-10, maxit: 20_000, method }).unwrap().energy;
    assert!((run(Method::Lanczos) - run(Method::Schur)).abs() < 1e-10);
}

#[test]
fn pull_through_holds_per_mode() {
    let p = params(0.3);
    for variant in [Variant::Gross, Variant::V0] {
        let m = model(&p, ScaleFrame::identity(), 4, 8.0, 2, 3, variant);
        for j in 0..2 {
            assert!(pull_through_residual(&m, j, 11).unwrap() < 1e-10);
        }
    }
}

#[test]
fn lattice_translations_commute_with_the_translation_invariant_model() {
    let p = params(0.3);
    let frame = ScaleFrame::identity();
    let grid = PositionGrid::new(8, 8.0).unwrap();
    let modes = lattice_modes(&grid, &frame, p.kappa, p.lambda, &[[1, 0, 0], [0, 2, 1], [-3, 1, 2]], 1e-3).unwrap();
    let basis = FockBasis::new(3, 2).unwrap();
    let v0 = AssembledModel::new(&p, frame, Some(grid.clone()), modes.clone(), basis.clone(), Variant::V0).unwrap();
    assert!(translation_commutator(&v0, [1, 0, 2], 5).unwrap() < 1e-12);
    // The Coulomb centre breaks the symmetry.
    let gross = AssembledModel::new(&p, frame, Some(grid), modes, basis, Variant::Gross).unwrap();
    assert!(translation_commutator(&gross, [1, 0, 2], 5).unwrap() > 1e-6);
}

fn telescoping(e: f64) -> nelson_core::spectral::identities::SoftDecomposition {
    let p = params(e);
    let m = model(&p, ScaleFrame::identity(), 8, 8.0, 2, 2, Variant::Gross);
    let gs = solve_ground(&m, &SolveOptions { tol: 1e-12, ..Default::default() }).unwrap();
    let u = std::f64::consts::PI / 8.0;
    soft_decomposition_residual(&m, &gs.vector, gs.energy, [u, u, u], 0.75).unwrap()
}

#[test]
fn telescoping_algebra_is_exact_once_lattice_defects_are_removed() {
    let s = telescoping(0.3);
    assert!(s.res1_wrap_corrected < 1e-12 && s.res2_wrap_corrected < 1e-12);
    // The raw residuals carry the wraparound of the plane-wave shift.
    assert!(s.res1 > 1e-6);
    assert_eq!(s.f2, -s.f1);
    assert!((s.f1 - s.f1_continuum).abs() <= 0.1 * s.f1_continuum);
}

#[test]
fn telescoping_is_exact_on_the_decoupled_ground_state() {
    let s = telescoping(0.0);
    assert!(s.res1 < 1e-12 && s.res2 < 1e-12);
}

#[test]
fn telescoping_rejects_off_lattice_momenta() {
    let p = params(0.3);
    let m = model(&p, ScaleFrame::identity(), 8, 8.0, 1, 1, Variant::Gross);
    let v = random_unit(m.dim(), 1);
    assert!(soft_decomposition_residual(&m, &v, 0.0, [0.3, 0.0, 0.0], 0.75).is_err());
    assert!(soft_decomposition_residual(&m, &v, 0.0, [0.0; 3], 0.75).is_err());
    let u = std::f64::consts::PI / 8.0;
    assert!(soft_decomposition_residual(&m, &v, 0.0, [u, 0.0, 0.0], 0.4).is_err());
}

#[test]
fn effective_mass_is_bare_at_zero_charge_and_grows_with_coupling() {
    let modes = ModeGrid::build(0.1, 10.0, 4, 6).unwrap();
    let basis = FockBasis::new(modes.len(), 2).unwrap();
    let free = effective_mass_numeric(&params(0.0), &modes, &basis, 1e-11).unwrap();
    assert_eq!(free.m_eff_over_m, 1.0);
    let m = effective_mass_numeric(&params(0.2), &modes, &basis, 1e-11).unwrap();
    assert!(m.m_eff_over_m > 1.0);
    assert!(m.drift < 1e-8);
    let predicted = 0.04 * m.riemann_sum;
    assert_relative_eq!(m.m_eff_over_m - 1.0, predicted, max_relative = 5e-3);
}
