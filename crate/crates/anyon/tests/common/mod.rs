//! Oracles and property checks shared by the test targets.
#![allow(dead_code)]

use anyon::acsim::{assemble_admittance, power_balance};
use anyon::circuit::{epsilon_of_f, f0, synthesize_netlist, CircuitConfig, SynthesisMode};
use anyon::matrix::CMatrix;
use anyon::model::{build_hamiltonian, exchange_operator, symmetry_projector, ModelParams, Pairing, Site};
use anyon::spectra::{physical_spectrum, Thresholds};
use anyon::C64;
use faer::complex_native::c64;
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;
use std::f64::consts::PI;

/// Matrix of the reduced equations on unknowns x_mn = β_mn, m ≥ n.
///
/// Amplitudes with m < n are eliminated through β_mn = e^{iθ} β_nm; indices
/// outside 1..N vanish. Diagonal rows carry 2U and the P-link to the pair
/// partner (n+1 for odd n, n−1 for even n).
pub fn triangular_matrix(p: &ModelParams) -> Vec<Vec<C64>> {
    let size = p.n_sites;
    let mut index = vec![vec![usize::MAX; size + 2]; size + 2];
    let mut count = 0;
    for m in 1..=size {
        for n in 1..=m {
            index[m][n] = count;
            count += 1;
        }
    }
    let mut a = vec![vec![C64::new(0.0, 0.0); count]; count];
    let e = C64::from_polar(1.0, p.theta);
    let e_minus = C64::from_polar(1.0, -p.theta);
    // Adds coeff·β_{mm,nn} to row `row`.
    let mut add = |row: usize, mm: usize, nn: usize, coeff: C64| {
        if mm == 0 || nn == 0 || mm > size || nn > size {
            return;
        }
        if mm >= nn {
            a[row][index[mm][nn]] += coeff;
        } else {
            a[row][index[nn][mm]] += coeff * e;
        }
    };
    let j = C64::new(-p.j, 0.0);
    for m in 1..=size {
        for n in 1..=m {
            let row = index[m][n];
            if m - n >= 2 {
                add(row, m - 1, n, j);
                add(row, m + 1, n, j);
                add(row, m, n - 1, j);
                add(row, m, n + 1, j);
            } else if m == n + 1 {
                add(row, n, n, j);
                add(row, n + 2, n, j);
                add(row, n + 1, n - 1, j);
                add(row, n + 1, n + 1, j * e_minus);
            } else {
                add(row, n - 1, n, j);
                add(row, n + 1, n, j);
                add(row, n, n - 1, j * e);
                add(row, n, n + 1, j * e_minus);
                add(row, n, n, C64::new(2.0 * p.u, 0.0));
                let partner = if n % 2 == 1 { n + 1 } else { n - 1 };
                add(row, partner, partner, C64::new(p.p, 0.0));
            }
        }
    }
    a
}

pub fn general_eigenvalues(a: &[Vec<C64>]) -> Vec<C64> {
    let n = a.len();
    let m = faer::Mat::<c64>::from_fn(n, n, |i, j| c64::new(a[i][j].re, a[i][j].im));
    let mut ev: Vec<C64> = m.complex_eigenvalues().into_iter().map(|z| C64::new(z.re, z.im)).collect();
    ev.sort_by(|x, y| x.re.total_cmp(&y.re));
    ev
}

/// All pair sums of the open-chain single-particle energies, k ≤ k'.
pub fn free_pair_energies(size: usize, j: f64) -> Vec<f64> {
    let single: Vec<f64> = (1..=size).map(|k| -2.0 * j * (k as f64 * PI / (size + 1) as f64).cos()).collect();
    let mut pairs = Vec::new();
    for a in 0..size {
        for b in a..size {
            pairs.push(single[a] + single[b]);
        }
    }
    pairs.sort_by(f64::total_cmp);
    pairs
}

pub fn pairing() -> impl Strategy<Value = Pairing> {
    prop_oneof![Just(Pairing::OddFirst), Just(Pairing::EvenFirst)]
}

prop_compose! {
    pub fn model(max_n: usize)(
        n_sites in 2..=max_n,
        theta in 0.0..=PI,
        u in -3.0..3.0f64,
        p in -3.0..3.0f64,
        corner_shift in any::<bool>(),
        pairing in pairing(),
    ) -> ModelParams {
        // The corner shift divides by U.
        let corner_shift = corner_shift && u.abs() > 1e-3;
        ModelParams { n_sites, j: 1.0, u, p, theta, corner_shift, pairing }
    }
}

prop_compose! {
    pub fn circuit_model(max_n: usize)(
        n_sites in 2..=max_n,
        theta in prop_oneof![Just(0.0), Just(PI), 0.1..3.0f64],
        u in 0.5..3.0f64,
        p in -1.0..=0.0f64,
        corner_shift in any::<bool>(),
    ) -> ModelParams {
        ModelParams { n_sites, j: 1.0, u, p, theta, corner_shift, pairing: Pairing::OddFirst }
    }
}

pub type Check = Result<(), TestCaseError>;

pub fn hamiltonian_is_hermitian(p: &ModelParams) -> Check {
    let h = build_hamiltonian(p).unwrap();
    prop_assert_eq!(h.hermiticity_defect(), 0.0);
    Ok(())
}

pub fn exchange_commutes_with_h(p: &ModelParams) -> Check {
    let h = build_hamiltonian(p).unwrap();
    let s = exchange_operator(p);
    let c = h.matmul(&s).sub(&s.matmul(&h)).max_abs();
    prop_assert!(c <= 1e-12 * h.max_abs(), "commutator {}", c);
    Ok(())
}

pub fn exchange_squares_to_identity(p: &ModelParams) -> Check {
    let s = exchange_operator(p);
    let d = s.matmul(&s).sub(&CMatrix::identity(s.dim())).max_abs();
    prop_assert!(d <= 1e-14);
    Ok(())
}

pub fn projector_is_idempotent(p: &ModelParams) -> Check {
    let pi = symmetry_projector(&exchange_operator(p));
    prop_assert!(pi.matmul(&pi).sub(&pi).max_abs() <= 1e-14);
    prop_assert!(pi.hermiticity_defect() <= 1e-14);
    prop_assert!((pi.trace().re - p.sector_dim() as f64).abs() <= 1e-10);
    Ok(())
}

pub fn ipr_and_weights_in_bounds(p: &ModelParams) -> Check {
    let size = p.n_sites as f64;
    for s in physical_spectrum(p, &Thresholds::default()).unwrap() {
        let norm: f64 = s.amplitudes.iter().map(|a| a.norm_sqr()).sum();
        prop_assert!((norm - 1.0).abs() <= 1e-10);
        let m = &s.metrics;
        prop_assert!(m.ipr >= 1.0 / (size * size) - 1e-12 && m.ipr <= 1.0 + 1e-12);
        for w in [m.diag_weight, m.edge_weight_left, m.edge_weight_right] {
            prop_assert!((-1e-12..=1.0 + 1e-12).contains(&w));
        }
    }
    Ok(())
}

pub fn epsilon_decreases_with_frequency(a: f64, b: f64) -> Check {
    prop_assume!((a - b).abs() > 1e-6 * a.max(b));
    let f0 = f0(23.21e-6, 1e-6);
    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
    prop_assert!(epsilon_of_f(lo, f0) > epsilon_of_f(hi, f0));
    Ok(())
}

pub fn nic_power_balances_at_f_ref(p: &ModelParams, f_ref: f64, node: (usize, usize)) -> Check {
    let cfg = CircuitConfig { mode: SynthesisMode::Physical, f_ref: Some(f_ref), q: None, ..Default::default() };
    let net = synthesize_netlist(p, &cfg).unwrap();
    let site = Site::new(node.0.min(p.n_sites), node.1.min(p.n_sites));
    let pb = power_balance(&net, f_ref, site).unwrap();
    let scale = pb.dissipated.max(pb.generated).max(1e-300);
    // Lossless Hermitian network: the source delivers no real power, so
    // NIC generation and resistive dissipation cancel.
    prop_assert!(
        (pb.dissipated - pb.generated).abs() <= 1e-8 * scale + 1e-12,
        "dissipated {} generated {}",
        pb.dissipated,
        pb.generated
    );
    // Away from f_ref the balance is off, but energy is still conserved.
    let q = power_balance(&net.with_quality(Some(200.0)), 0.93 * f_ref, site).unwrap();
    let total = q.dissipated - q.generated + q.other;
    prop_assert!((q.source - total).abs() <= 1e-8 * (q.source.abs() + q.dissipated + q.generated + 1e-12));
    Ok(())
}

pub fn reciprocal_iff_no_nic(p: &ModelParams, physical: bool, f: f64) -> Check {
    let mode = if physical { SynthesisMode::Physical } else { SynthesisMode::Ideal };
    let cfg = CircuitConfig { mode, f_ref: Some(11.5e3), ..Default::default() };
    let net = synthesize_netlist(p, &cfg).unwrap();
    let y = assemble_admittance(&net, f).unwrap().y;
    let symmetric = y.symmetry_defect() <= 1e-12 * y.max_abs();
    prop_assert_eq!(symmetric, net.is_reciprocal());
    let crossing = p.theta.sin().abs() > 1e-12;
    prop_assert_eq!(net.is_reciprocal(), !crossing);
    Ok(())
}

pub fn ideal_admittance_is_hermitian_surrogate(p: &ModelParams, f: f64) -> Check {
    let net = synthesize_netlist(p, &CircuitConfig { q: None, ..Default::default() }).unwrap();
    let y = assemble_admittance(&net, f).unwrap().y;
    let k = y.scale(C64::new(0.0, 1.0 / (2.0 * PI * f * net.c_j)));
    prop_assert!(k.hermiticity_defect() <= 1e-12 * k.max_abs());
    Ok(())
}
