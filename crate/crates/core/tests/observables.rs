//! Photon numbers, moments and overlaps on states with known answers.

use approx::assert_relative_eq;
use nelson_core::fockspace::{FockBasis, Mode, ModeGrid};
use nelson_core::linalg::{dot, normalize, C64, ZERO};
use nelson_core::model::{make_params, ScaleFrame};
use nelson_core::observables::{overlap_with_decoupled, photon_number, relativistic_length_scale, spatial_moment};
use nelson_core::particle::{atomic_ground, sampled_hydrogen, PositionFunction, PositionGrid};
use nelson_core::spectral::assemble::{AssembledModel, Variant};
use nelson_core::verify::{build_model, Resolution};

fn soft_and_hard_model() -> AssembledModel {
    let p = make_params(0.3, 1.0, 1.0, 0.1, 10.0).unwrap();
    let modes = ModeGrid::custom(
        0.1,
        10.0,
        vec![Mode { k: [0.5, 0.0, 0.0], weight: 1e-3 }, Mode { k: [0.0, 3.0, 0.0], weight: 1e-3 }],
    )
    .unwrap();
    let basis = FockBasis::new(2, 2).unwrap();
    let grid = PositionGrid::new(4, 4.0).unwrap();
    AssembledModel::new(&p, ScaleFrame::solver(&p), Some(grid), modes, basis, Variant::Gross).unwrap()
}

fn occupation_state(m: &AssembledModel, occ: &[u8], s: usize) -> Vec<C64> {
    let mut v = vec![ZERO; m.dim()];
    v[m.basis.index_of(occ).unwrap() * m.np + s] = C64::new(1.0, 0.0);
    v
}

#[test]
fn photon_numbers_of_occupation_states() {
    let m = soft_and_hard_model();
    let soft = photon_number(&m, &occupation_state(&m, &[1, 0], 3));
    assert_eq!((soft.total, soft.soft, soft.hard), (1.0, 1.0, 0.0));
    let hard = photon_number(&m, &occupation_state(&m, &[0, 2], 0));
    assert_eq!((hard.total, hard.soft, hard.hard), (2.0, 0.0, 2.0));
    let mixed = photon_number(&m, &occupation_state(&m, &[1, 1], 5));
    assert_eq!((mixed.soft, mixed.hard), (1.0, 1.0));
}

#[test]
fn overlaps_split_the_vacuum_sector() {
    let p = make_params(0.3, 1.0, 1.0, 0.1, 10.0).unwrap();
    let m = build_model(&p, &Resolution { grid_n: 8, ..Resolution::default() }, Variant::Gross).unwrap();
    let grid = m.grid.clone().unwrap();
    let at = atomic_ground(&grid, 1.0, 0.5 * grid.h, 1e-12).unwrap();
    let o = overlap_with_decoupled(&m, &m.embed_vacuum(&at.psi), &at.psi).unwrap();
    assert_relative_eq!(o.overlap_p, 1.0, epsilon = 1e-12);
    assert!(o.overlap_q.abs() < 1e-12);
    // A particle state orthogonal to the atomic one lies entirely in Q.
    let mut other: Vec<C64> = (0..grid.points()).map(|s| C64::new(grid.point(s)[0], 0.0)).collect();
    let c = dot(&at.psi, &other);
    other.iter_mut().zip(&at.psi).for_each(|(v, a)| *v -= c * a);
    normalize(&mut other);
    let o = overlap_with_decoupled(&m, &m.embed_vacuum(&other), &at.psi).unwrap();
    assert!(o.overlap_p < 1e-24);
    assert_relative_eq!(o.overlap_q, 1.0, epsilon = 1e-12);
    assert!(overlap_with_decoupled(&m, &other, &at.psi[..10]).is_err());
}

#[test]
fn mean_radius_of_the_atomic_state_is_three_halves_bohr() {
    let p = make_params(0.3, 1.0, 1.0, 0.1, 10.0).unwrap();
    let m = build_model(&p, &Resolution { grid_n: 48, box_l: 8.0, modes_radial: 1, modes_angular: 1, n_max: 1 }, Variant::Gross).unwrap();
    let grid = m.grid.clone().unwrap();
    let psi = m.embed_vacuum(&sampled_hydrogen(&grid, 1.0));
    let norm2: f64 = psi.iter().map(|v| v.norm_sqr()).sum();
    let scale = relativistic_length_scale(&m);
    let r = spatial_moment(&m, &psi, PositionFunction::Radius, scale).unwrap() / norm2;
    assert_relative_eq!(r, 1.5 / p.alpha_z(), max_relative = 0.01);
    let r2 = spatial_moment(&m, &psi, PositionFunction::RadiusSquared, scale).unwrap() / norm2;
    assert!(r2 >= r * r);
}

#[test]
fn exponential_moment_overflow_is_reported() {
    let p = make_params(0.3, 1.0, 1.0, 0.1, 10.0).unwrap();
    let m = build_model(&p, &Resolution { grid_n: 8, ..Resolution::default() }, Variant::Gross).unwrap();
    let psi = occupation_state(&m, &vec![0; m.modes.len()], 0);
    assert!(spatial_moment(&m, &psi, PositionFunction::Exp { beta: 1e3 }, 1.0).is_err());
}

#[test]
fn hydrogen_energy_improves_under_refinement() {
    let states: Vec<(PositionGrid, _)> = [32, 48, 64]
        .iter()
        .map(|&n| {
            let grid = PositionGrid::new(n, 20.0).unwrap();
            let at = atomic_ground(&grid, 1.0, 0.5 * grid.h, 1e-10).unwrap();
            (grid, at)
        })
        .collect();
    let errors: Vec<f64> = states.iter().map(|(_, at)| at.discretization_error).collect();
    assert!(errors.windows(2).all(|w| w[1] < w[0]), "{errors:?}");
    let (grid, at) = &states[2];
    let mut exact = sampled_hydrogen(grid, 1.0);
    normalize(&mut exact);
    assert!(dot(&exact, &at.psi).norm() > 0.99);
    assert!((at.energy + 0.5).abs() < 0.05);
}
