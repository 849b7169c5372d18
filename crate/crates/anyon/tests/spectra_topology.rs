//! Spectrum, gap and Zak-phase behaviour of the doublon bands.
//!
//! The N=45 runs use the corner shift, which suppresses Tamm-like corner
//! states; without it the topological edge state is not in the gap.

use anyon::model::{sector_hamiltonian, ModelParams};
use anyon::spectra::{
    doublon_gap, eigendecompose, find_transition, physical_metrics, sweep_point, theta_sweep,
    SpectraError, StateClass, Thresholds,
};
use anyon::topology::{effective_ssh_couplings, zak_phase, ZakOptions, ZakSetup};
use std::f64::consts::PI;

fn fig2(theta: f64) -> ModelParams {
    ModelParams { n_sites: 45, theta, corner_shift: true, ..Default::default() }
}

fn t() -> Thresholds {
    Thresholds::default()
}

#[test]
fn single_in_gap_edge_state_at_both_ends_of_the_range() {
    for (theta, class) in [(0.0, StateClass::DoublonEdgeLeft), (PI, StateClass::DoublonEdgeRight)] {
        let states = physical_metrics(&fig2(theta), &t()).unwrap();
        let gap = doublon_gap(&states, 45).unwrap();
        assert!(gap.gap > 0.0);
        assert_eq!(gap.in_gap.len(), 1, "θ={theta}");
        assert_eq!(states[gap.in_gap[0]].class, class);
    }
}

#[test]
fn edge_state_is_more_localized_than_scattering_states() {
    let states = physical_metrics(&fig2(0.0), &t()).unwrap();
    let gap = doublon_gap(&states, 45).unwrap();
    let edge = states[gap.in_gap[0]].ipr;
    let worst = states.iter().filter(|s| s.class == StateClass::Scattering).map(|s| s.ipr).fold(0.0, f64::max);
    assert!(edge > worst, "{edge} vs {worst}");
}

#[test]
fn states_next_to_the_gap_at_theta_one_are_not_edge_states() {
    let states = physical_metrics(&fig2(1.0), &t()).unwrap();
    let gap = doublon_gap(&states, 45).unwrap();
    let mid = 0.5 * (gap.lower_band_top + gap.upper_band_bottom);
    let nearest = states
        .iter()
        .filter(|s| s.class != StateClass::Scattering)
        .min_by(|a, b| (a.energy - mid).abs().total_cmp(&(b.energy - mid).abs()))
        .unwrap();
    assert!(matches!(nearest.class, StateClass::DoublonBulk | StateClass::Unclassified));
}

#[test]
fn gap_nearly_closes_at_predicted_angle() {
    let theta_c = effective_ssh_couplings(&fig2(0.0)).unwrap().theta_c_predicted.unwrap();
    let gap = doublon_gap(&physical_metrics(&fig2(theta_c), &t()).unwrap(), 45).unwrap();
    assert!(gap.gap <= 0.05, "gap at θ={theta_c:.4} is {:.4}", gap.gap);
}

#[test]
fn transition_angle_matches_strong_coupling_formula() {
    let tr = find_transition(&fig2(0.0), (0.6, 1.5), 1e-3, &t()).unwrap();
    let predicted = (0.75f64 * 1.5 / 2.0).acos();
    assert!((tr.theta_c - predicted).abs() <= 0.03, "θ_c = {:.4}, predicted {predicted:.4}", tr.theta_c);
}

#[test]
fn topology_transition_within_loose_tolerance() {
    let tr = find_transition(&fig2(0.0), (0.6, 1.5), 1e-3, &t()).unwrap();
    let predicted = effective_ssh_couplings(&fig2(0.0)).unwrap().theta_c_predicted.unwrap();
    assert!((tr.theta_c - predicted).abs() <= 0.05, "θ_c = {:.4}, predicted {predicted:.4}", tr.theta_c);
}

#[test]
fn transition_is_near_one_and_refinement_stable() {
    let a = find_transition(&fig2(0.0), (0.6, 1.5), 1e-3, &t()).unwrap();
    let b = find_transition(&fig2(0.0), (0.7, 1.4), 1e-4, &t()).unwrap();
    assert!((a.theta_c - 1.0).abs() < 0.15);
    assert!((a.theta_c - b.theta_c).abs() < 2e-3);
}

#[test]
fn no_transition_without_pair_hopping() {
    let p = ModelParams { n_sites: 15, p: 0.0, ..Default::default() };
    match find_transition(&p, (0.3, 2.8), 1e-3, &t()) {
        Err(SpectraError::NoMinimum(..)) => {}
        Ok(tr) => assert!(tr.gap_min < 1e-3, "unexpected minimum {tr:?}"),
        Err(e) => panic!("{e}"),
    }
}

#[test]
fn edge_state_flips_corner_across_transition() {
    let grid: Vec<f64> = (0..=8).map(|k| k as f64 * PI / 8.0).collect();
    let sweep = theta_sweep(&fig2(0.0), &grid, &t()).unwrap();
    let sides: Vec<Option<StateClass>> = sweep.points.iter().map(|p| p.edge_state_class).collect();
    assert_eq!(sides[0], Some(StateClass::DoublonEdgeLeft));
    assert_eq!(sides[8], Some(StateClass::DoublonEdgeRight));
    // Left states only before right ones.
    let last_left = sides.iter().rposition(|c| *c == Some(StateClass::DoublonEdgeLeft)).unwrap();
    let first_right = sides.iter().position(|c| *c == Some(StateClass::DoublonEdgeRight)).unwrap();
    assert!(last_left < first_right);
}

#[test]
fn one_point_sweep_matches_spectrum() {
    let p = ModelParams { n_sites: 9, ..Default::default() };
    let sweep = theta_sweep(&p, &[0.0], &t()).unwrap();
    let direct = physical_metrics(&p, &t()).unwrap();
    assert_eq!(sweep.points[0].states, direct);
    let single = sweep_point(&p, 0.0, &t()).unwrap();
    assert_eq!(sweep.points[0].states, single.states);
    assert_eq!(sweep.points[0].gap, single.gap);
    assert_eq!(sweep.points[0].edge_state_class, single.edge_state_class);
}

#[test]
fn spectrum_invariant_under_conjugation_and_sum_rule() {
    let p = ModelParams { n_sites: 8, theta: 0.9, u: 1.2, p: -0.4, ..Default::default() };
    let (_, h) = sector_hamiltonian(&p).unwrap();
    let conj = h.scale(anyon::C64::new(1.0, 0.0));
    let conj = anyon::matrix::CMatrix::from_fn(conj.dim(), conj.dim(), |i, j| conj[(i, j)].conj());
    let a = eigendecompose(&h).unwrap().values;
    let b = eigendecompose(&conj).unwrap().values;
    for (x, y) in a.iter().zip(&b) {
        assert!((x - y).abs() <= 1e-10);
    }
    let sum: f64 = a.iter().sum();
    assert!((sum - h.trace().re).abs() <= 1e-8 * h.trace().re.abs().max(1.0));
}

/// At N=15 every θ shows scattering and bulk doublon states; the
/// in-gap state is a left-edge doublon at θ=0, a right-edge one at θ=π, and
/// absent at θ=1. The odd-N band edge may itself lean to one corner.
#[test]
fn fifteen_site_panels() {
    for (theta, edge) in [(0.0, Some(StateClass::DoublonEdgeLeft)), (1.0, None), (PI, Some(StateClass::DoublonEdgeRight))] {
        let p = ModelParams { n_sites: 15, theta, corner_shift: true, ..Default::default() };
        let states = physical_metrics(&p, &t()).unwrap();
        assert!(states.iter().any(|s| s.class == StateClass::Scattering));
        assert!(states.iter().any(|s| s.class == StateClass::DoublonBulk));
        let gap = doublon_gap(&states, 15).unwrap();
        let in_gap: Vec<StateClass> = gap.in_gap.iter().map(|&i| states[i].class).collect();
        assert_eq!(in_gap, edge.into_iter().collect::<Vec<_>>(), "θ={theta}");
    }
}

fn base() -> ModelParams {
    ModelParams::default()
}

#[test]
fn zak_phase_bosonic_and_fermionic_limits() {
    let z0 = zak_phase(0.0, &base(), ZakSetup::SMALL_THETA, &ZakOptions::default()).unwrap();
    assert_eq!(z0.gamma, PI);
    let zpi = zak_phase(PI, &base(), ZakSetup::LARGE_THETA, &ZakOptions::default()).unwrap();
    assert_eq!(zpi.gamma, 0.0);
    for z in [&z0, &zpi] {
        assert!(z.overlaps.iter().all(|o| o.abs() >= 0.9));
        assert_eq!((z.alpha0 - z.alpha_pi).rem_euclid(2.0 * PI), z.gamma);
    }
}

#[test]
fn zak_phase_away_from_symmetric_points() {
    let opts = ZakOptions::default();
    let z = zak_phase(2.5, &base(), ZakSetup::for_theta(2.5, &base()), &opts).unwrap();
    assert_eq!(z.gamma, 0.0);
    let z = zak_phase(0.3, &base(), ZakSetup::for_theta(0.3, &base()), &opts).unwrap();
    assert_eq!(z.gamma, PI);
}

#[test]
fn zak_phase_constant_on_each_side_of_transition() {
    let theta_c = effective_ssh_couplings(&base()).unwrap().theta_c_predicted.unwrap();
    let opts = ZakOptions::default();
    let mut gammas = Vec::new();
    for k in 0..=20 {
        let theta = k as f64 * PI / 20.0;
        if (theta - theta_c).abs() < 0.1 {
            continue;
        }
        let z = zak_phase(theta, &base(), ZakSetup::for_theta(theta, &base()), &opts)
            .unwrap_or_else(|e| panic!("θ={theta:.3}: {e}"));
        gammas.push(z.gamma);
    }
    let flips = gammas.windows(2).filter(|w| w[0] != w[1]).count();
    assert_eq!(flips, 1);
}

#[test]
fn zak_phase_agrees_with_edge_side() {
    for theta in [0.0, 2.5, 2.8, PI] {
        let z = zak_phase(theta, &base(), ZakSetup::for_theta(theta, &base()), &ZakOptions::default()).unwrap();
        let point = sweep_point(&fig2(0.0), theta, &t()).unwrap();
        let expected = if z.gamma == PI { StateClass::DoublonEdgeLeft } else { StateClass::DoublonEdgeRight };
        assert_eq!(point.edge_state_class, Some(expected), "θ={theta}");
    }
}
