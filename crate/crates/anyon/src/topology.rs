//! Effective SSH description of the doublon bands and the Zak phase from
//! parities at the band edges.

use crate::matrix::CMatrix;
use crate::model::{build_hamiltonian, ModelError, ModelParams, Pairing, Site};
use crate::spectra::{doublon_gap, physical_spectrum, EigenState, SpectraError, StateClass, Thresholds};
use crate::C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TopologyError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Spectra(#[from] SpectraError),
    #[error("U = 0: effective couplings diverge")]
    DivisionByZero,
    #[error("inversion needs an even chain length, got N = {0}")]
    OddSize(usize),
    #[error("parity is ambiguous: {0}")]
    AmbiguousParity(String),
    #[error("doublon gap is closed: {0}")]
    GapClosed(String),
}

/// Strong-coupling couplings of the doublon chain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SshEffective {
    /// |J² e^{iθ}/U + P|, the P-bond.
    pub j1_eff: f64,
    /// J²/|U|, the bond between P-dimers.
    pub j2_eff: f64,
    pub ratio: f64,
    /// θ where j1_eff = j2_eff, if it exists.
    pub theta_c_predicted: Option<f64>,
}

pub fn effective_ssh_couplings(params: &ModelParams) -> Result<SshEffective, TopologyError> {
    if params.u == 0.0 {
        return Err(TopologyError::DivisionByZero);
    }
    let (j, u, p) = (params.j, params.u, params.p);
    let j1_eff = (C64::from_polar(j * j / u, params.theta) + p).norm();
    let j2_eff = j * j / u.abs();
    let arg = -p * u / (2.0 * j * j);
    let theta_c_predicted = (-1.0..=1.0).contains(&arg).then(|| arg.acos());
    Ok(SshEffective { j1_eff, j2_eff, ratio: j1_eff / j2_eff, theta_c_predicted })
}

/// Image of a site under inversion through the centre of the plane.
pub fn inversion_site(site: Site, size: usize) -> Site {
    Site::new(size + 1 - site.m, size + 1 - site.n)
}

/// Permutation (m,n) → (N+1−m, N+1−n) on the full plane.
pub fn inversion_operator(size: usize) -> Result<CMatrix, TopologyError> {
    if size % 2 == 1 {
        return Err(TopologyError::OddSize(size));
    }
    let dim = size * size;
    let mut p = CMatrix::zeros(dim, dim);
    for k in 0..dim {
        let s = Site::from_linear(k, size);
        p[(inversion_site(s, size).linear(size), k)] = C64::new(1.0, 0.0);
    }
    Ok(p)
}

/// Chain length and pairing used for a Zak calculation.
///
/// The inversion centre must sit on a P-bond: N=16 with pairing from site 2,
/// or N=18 with pairing from site 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ZakSetup {
    pub n_sites: usize,
    pub pairing: Pairing,
}

impl ZakSetup {
    pub const SMALL_THETA: ZakSetup = ZakSetup { n_sites: 16, pairing: Pairing::EvenFirst };
    pub const LARGE_THETA: ZakSetup = ZakSetup { n_sites: 18, pairing: Pairing::OddFirst };

    /// N=16 below the predicted transition, N=18 above.
    pub fn for_theta(theta: f64, params: &ModelParams) -> Self {
        let split = effective_ssh_couplings(params).ok().and_then(|s| s.theta_c_predicted).unwrap_or(PI / 2.0);
        if theta < split {
            Self::SMALL_THETA
        } else {
            Self::LARGE_THETA
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParityMethod {
    /// ⟨ψ|P̂ψ⟩ on the full plane; used when [H, P̂] = 0.
    FullPlane,
    /// Parity of the diagonal profile after gauging away the phases of the
    /// effective doublon hoppings; used for generic θ.
    GaugedDiagonal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZakResult {
    pub theta: f64,
    pub gamma: f64,
    pub alpha0: f64,
    pub alpha_pi: f64,
    /// Signed parity overlaps for the k=0 and k=π representatives.
    pub overlaps: [f64; 2],
    pub selected_energies: [f64; 2],
    pub n_sites: usize,
    pub pairing: Pairing,
    pub method: ParityMethod,
    pub gap: f64,
}

/// Knobs of the Zak procedure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ZakOptions {
    /// Minimum accepted |⟨ψ|P̂ψ⟩|.
    pub min_overlap: f64,
    /// Gaps below this (units of J) count as closed.
    pub min_gap: f64,
    pub thresholds: Thresholds,
}

impl Default for ZakOptions {
    fn default() -> Self {
        Self { min_overlap: 0.9, min_gap: 0.02, thresholds: Thresholds::default() }
    }
}

/// ‖[H, P̂]‖_max without forming P̂.
pub fn inversion_commutator(h: &CMatrix, size: usize) -> f64 {
    let dim = size * size;
    let inv: Vec<usize> = (0..dim).map(|k| inversion_site(Site::from_linear(k, size), size).linear(size)).collect();
    let mut worst: f64 = 0.0;
    for r in 0..dim {
        for c in 0..dim {
            worst = worst.max((h[(inv[r], inv[c])] - h[(r, c)]).norm());
        }
    }
    worst
}

/// Cumulative gauge phases Φ_j of the diagonal sites (j = 1..N).
///
/// The bond phase is the argument of the second-order doublon hopping
/// H_{j+1,j} + Σ_x H_{j+1,x} H_{x,j} / (2U), with x the two co-diagonal
/// sites between (j,j) and (j+1,j+1).
fn diagonal_gauge(h: &CMatrix, params: &ModelParams) -> Vec<f64> {
    let size = params.n_sites;
    let d = |j: usize| Site::new(j, j).linear(size);
    let mut phi = vec![0.0; size];
    for j in 1..size {
        let (a, b) = (d(j), d(j + 1));
        let mut t = h[(b, a)];
        for x in [Site::new(j, j + 1).linear(size), Site::new(j + 1, j).linear(size)] {
            t += h[(b, x)] * h[(x, a)] / (2.0 * params.u);
        }
        let step = if t.norm() > 1e-14 { t.arg() } else { 0.0 };
        phi[j] = phi[j - 1] + step;
    }
    phi
}

fn diagonal_profile(state: &EigenState, size: usize, gauge: Option<&[f64]>) -> Vec<C64> {
    (1..=size)
        .map(|j| {
            let z = state.amplitude(Site::new(j, j), size);
            match gauge {
                Some(phi) => z * C64::from_polar(1.0, -phi[j - 1]),
                None => z,
            }
        })
        .collect()
}

/// Unit-cell oscillation Re Σ d_j* d_{j+2} / Σ|d|²: positive for k=0,
/// negative for k=π.
fn cell_oscillation(profile: &[C64]) -> f64 {
    let norm: f64 = profile.iter().map(|z| z.norm_sqr()).sum();
    let corr: f64 = profile.windows(3).map(|w| (w[0].conj() * w[2]).re).sum();
    corr / norm
}

fn full_plane_parity(state: &EigenState, size: usize) -> f64 {
    let mut acc = C64::new(0.0, 0.0);
    for (k, z) in state.amplitudes.iter().enumerate() {
        let img = inversion_site(Site::from_linear(k, size), size).linear(size);
        acc += z.conj() * state.amplitudes[img];
    }
    acc.re
}

fn profile_parity(profile: &[C64]) -> f64 {
    let norm: f64 = profile.iter().map(|z| z.norm_sqr()).sum();
    let acc: C64 = profile.iter().zip(profile.iter().rev()).map(|(a, b)| a.conj() * b).sum();
    acc.re / norm
}

/// Zak phase of the upper doublon band.
pub fn zak_phase(theta: f64, base: &ModelParams, setup: ZakSetup, opts: &ZakOptions) -> Result<ZakResult, TopologyError> {
    if setup.n_sites % 2 == 1 {
        return Err(TopologyError::OddSize(setup.n_sites));
    }
    if base.u == 0.0 {
        return Err(TopologyError::DivisionByZero);
    }
    let params = ModelParams { n_sites: setup.n_sites, pairing: setup.pairing, theta, ..base.clone() };
    let size = params.n_sites;
    let states = physical_spectrum(&params, &opts.thresholds)?;
    let metrics: Vec<_> = states.iter().map(|s| s.metrics).collect();
    let band = doublon_gap(&metrics, size).map_err(|e| TopologyError::GapClosed(e.to_string()))?;
    // On short chains the lower doublon band dissolves into the scattering
    // continuum, so also require the upper band to be isolated from every
    // non-edge state below it.
    let below = (0..metrics.len())
        .filter(|i| metrics[*i].energy < band.upper_band_bottom - 1e-12 && !band.in_gap.contains(i))
        .map(|i| metrics[i].energy)
        .fold(f64::NEG_INFINITY, f64::max);
    let gap = band.gap.min(band.upper_band_bottom - below);
    if gap < opts.min_gap {
        return Err(TopologyError::GapClosed(format!("gap {gap:.4} below {:.4}", opts.min_gap)));
    }

    let mut upper: Vec<usize> = (0..states.len()).filter(|&i| metrics[i].class != StateClass::Scattering).collect();
    upper.sort_by(|&a, &b| metrics[b].energy.total_cmp(&metrics[a].energy));
    upper.truncate(band.band_size);
    upper.retain(|&i| metrics[i].class == StateClass::DoublonBulk);
    if upper.len() < 2 {
        return Err(TopologyError::GapClosed("upper band has fewer than two bulk states".into()));
    }
    let top = upper[0];
    let bottom = *upper.last().unwrap();

    let h = build_hamiltonian(&params)?;
    let exact = inversion_commutator(&h, size) <= 1e-10 * h.max_abs();
    let method = if exact { ParityMethod::FullPlane } else { ParityMethod::GaugedDiagonal };
    let gauge = diagonal_gauge(&h, &params);

    let mut k0 = None;
    let mut kpi = None;
    for idx in [top, bottom] {
        let s = &states[idx];
        let profile = diagonal_profile(s, size, Some(&gauge));
        let parity = match method {
            ParityMethod::FullPlane => full_plane_parity(s, size),
            ParityMethod::GaugedDiagonal => profile_parity(&profile),
        };
        if cell_oscillation(&profile) > 0.0 {
            k0 = Some((s.energy(), parity));
        } else {
            kpi = Some((s.energy(), parity));
        }
    }
    let (Some((e0, p0)), Some((epi, ppi))) = (k0, kpi) else {
        return Err(TopologyError::AmbiguousParity("both band edges show the same momentum".into()));
    };
    for (label, p) in [("k=0", p0), ("k=pi", ppi)] {
        if p.abs() < opts.min_overlap {
            return Err(TopologyError::AmbiguousParity(format!(
                "{label} overlap {p:.3} below {:.2} (theta={theta:.3}, N={size}, {method:?})",
                opts.min_overlap
            )));
        }
    }
    let alpha = |p: f64| if p > 0.0 { 0.0 } else { PI };
    let (alpha0, alpha_pi) = (alpha(p0), alpha(ppi));
    let gamma = (alpha0 - alpha_pi).rem_euclid(2.0 * PI);
    Ok(ZakResult {
        theta,
        gamma,
        alpha0,
        alpha_pi,
        overlaps: [p0, ppi],
        selected_energies: [e0, epi],
        n_sites: size,
        pairing: setup.pairing,
        method,
        gap,
    })
}
