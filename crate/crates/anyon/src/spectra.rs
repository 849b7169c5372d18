//! Physical-sector diagonalization, localization metrics, doublon
//! classification and θ sweeps.

use crate::matrix::CMatrix;
use crate::model::{sector_hamiltonian, ModelError, ModelParams, Site};
use crate::C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::{self, Write};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SpectraError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("eigensolver did not converge")]
    ConvergenceFailure,
    #[error("state is not normalized (norm² = {0})")]
    NotNormalized(f64),
    #[error("only {0} doublon states found, need at least 4")]
    NoDoublonBand(usize),
    #[error("doublon gap is monotone on [{0}, {1}]")]
    NoMinimum(f64, f64),
    #[error("invalid θ grid: {0}")]
    InvalidGrid(String),
}

/// Eigenvalues ascending, eigenvectors as columns.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

/// Dense Hermitian eigendecomposition. Only the lower triangle is read.
pub fn eigendecompose(h: &CMatrix) -> Result<Eigen, SpectraError> {
    use faer::complex_native::c64;
    let n = h.dim();
    let m = faer::Mat::<c64>::from_fn(n, n, |i, j| {
        let z = h[(i, j)];
        c64::new(z.re, z.im)
    });
    let evd = m.selfadjoint_eigendecomposition(faer::Side::Lower);
    let s = evd.s().column_vector();
    let u = evd.u();
    let values: Vec<f64> = (0..n).map(|i| s.read(i).re).collect();
    let vectors = CMatrix::from_fn(n, n, |i, j| {
        let z = u.read(i, j);
        C64::new(z.re, z.im)
    });
    if values.iter().any(|v| !v.is_finite()) || vectors.as_slice().iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(SpectraError::ConvergenceFailure);
    }
    // faer returns ascending order already; keep the contract explicit.
    if values.windows(2).any(|w| w[0] > w[1]) {
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        let sorted_vals = order.iter().map(|&k| values[k]).collect();
        let sorted_vecs = CMatrix::from_fn(n, n, |i, j| vectors[(i, order[j])]);
        return Ok(Eigen { values: sorted_vals, vectors: sorted_vecs });
    }
    Ok(Eigen { values, vectors })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StateClass {
    Scattering,
    DoublonBulk,
    DoublonEdgeLeft,
    DoublonEdgeRight,
    Unclassified,
}

impl StateClass {
    pub fn as_str(self) -> &'static str {
        match self {
            StateClass::Scattering => "scattering",
            StateClass::DoublonBulk => "doublon_bulk",
            StateClass::DoublonEdgeLeft => "doublon_edge_left",
            StateClass::DoublonEdgeRight => "doublon_edge_right",
            StateClass::Unclassified => "unclassified",
        }
    }

    pub fn is_edge(self) -> bool {
        matches!(self, StateClass::DoublonEdgeLeft | StateClass::DoublonEdgeRight)
    }
}

impl std::str::FromStr for StateClass {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "scattering" => StateClass::Scattering,
            "doublon_bulk" => StateClass::DoublonBulk,
            "doublon_edge_left" => StateClass::DoublonEdgeLeft,
            "doublon_edge_right" => StateClass::DoublonEdgeRight,
            "unclassified" => StateClass::Unclassified,
            other => return Err(format!("unknown class `{other}`")),
        })
    }
}

/// Classification knobs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Thresholds {
    /// Minimum weight on |m−n| ≤ 1 for a doublon.
    pub diag_weight: f64,
    /// Minimum weight in a 2×2 corner block for an edge doublon.
    pub edge_weight: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self { diag_weight: 0.8, edge_weight: 0.5 }
    }
}

/// Everything about a state except its amplitudes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateMetrics {
    pub energy: f64,
    pub ipr: f64,
    pub diag_weight: f64,
    pub edge_weight_left: f64,
    pub edge_weight_right: f64,
    pub class: StateClass,
}

#[derive(Debug, Clone)]
pub struct EigenState {
    pub metrics: StateMetrics,
    /// Full-plane amplitudes, row-major over (m,n).
    pub amplitudes: Vec<C64>,
}

impl EigenState {
    pub fn energy(&self) -> f64 {
        self.metrics.energy
    }

    pub fn class(&self) -> StateClass {
        self.metrics.class
    }

    pub fn amplitude(&self, site: Site, size: usize) -> C64 {
        self.amplitudes[site.linear(size)]
    }

    /// |β_mn|² as an N×N grid, row m−1.
    pub fn probability_grid(&self, size: usize) -> Vec<Vec<f64>> {
        (0..size).map(|i| (0..size).map(|j| self.amplitudes[i * size + j].norm_sqr()).collect()).collect()
    }
}

/// Σ|β|⁴ of a normalized amplitude map.
pub fn ipr(amplitudes: &[C64]) -> Result<f64, SpectraError> {
    let norm: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum();
    if (norm - 1.0).abs() > 1e-8 {
        return Err(SpectraError::NotNormalized(norm));
    }
    Ok(amplitudes.iter().map(|z| z.norm_sqr().powi(2)).sum())
}

fn weights(amplitudes: &[C64], size: usize) -> (f64, f64, f64) {
    let mut diag = 0.0;
    let mut left = 0.0;
    let mut right = 0.0;
    for (k, z) in amplitudes.iter().enumerate() {
        let w = z.norm_sqr();
        let s = Site::from_linear(k, size);
        if s.m.abs_diff(s.n) <= 1 {
            diag += w;
        }
        if s.m <= 2 && s.n <= 2 {
            left += w;
        }
        if s.m + 1 >= size && s.n + 1 >= size {
            right += w;
        }
    }
    (diag, left, right)
}

pub fn classify_state(diag_weight: f64, edge_left: f64, edge_right: f64, t: &Thresholds) -> StateClass {
    if diag_weight < t.diag_weight {
        return StateClass::Scattering;
    }
    let l = edge_left >= t.edge_weight;
    let r = edge_right >= t.edge_weight;
    match (l, r) {
        (true, false) => StateClass::DoublonEdgeLeft,
        (false, true) => StateClass::DoublonEdgeRight,
        (true, true) => StateClass::Unclassified,
        // Edge weight split over both corners: a hybridized pair, not a bulk state.
        (false, false) if edge_left + edge_right >= t.edge_weight => StateClass::Unclassified,
        (false, false) => StateClass::DoublonBulk,
    }
}

pub fn state_metrics(energy: f64, amplitudes: &[C64], size: usize, t: &Thresholds) -> Result<StateMetrics, SpectraError> {
    let ipr = ipr(amplitudes)?;
    let (diag_weight, edge_weight_left, edge_weight_right) = weights(amplitudes, size);
    let class = classify_state(diag_weight, edge_weight_left, edge_weight_right, t);
    Ok(StateMetrics { energy, ipr, diag_weight, edge_weight_left, edge_weight_right, class })
}

/// All N(N+1)/2 physical eigenstates, energies ascending.
pub fn physical_spectrum(params: &ModelParams, t: &Thresholds) -> Result<Vec<EigenState>, SpectraError> {
    let (basis, hc) = sector_hamiltonian(params)?;
    let eig = eigendecompose(&hc)?;
    let size = params.n_sites;
    (0..eig.values.len())
        .map(|k| {
            let amplitudes = basis.expand(&eig.vectors.column(k));
            let metrics = state_metrics(eig.values[k], &amplitudes, size, t)?;
            Ok(EigenState { metrics, amplitudes })
        })
        .collect()
}

/// Like [`physical_spectrum`] but drops the amplitudes.
pub fn physical_metrics(params: &ModelParams, t: &Thresholds) -> Result<Vec<StateMetrics>, SpectraError> {
    Ok(physical_spectrum(params, t)?.into_iter().map(|s| s.metrics).collect())
}

/// Result of locating the gap between the two doublon bands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DoublonGap {
    pub gap: f64,
    pub lower_band_top: f64,
    pub upper_band_bottom: f64,
    /// Number of states counted into the upper band.
    pub band_size: usize,
    /// Indices (into the input slice) of doublon states strictly inside the gap.
    pub in_gap: Vec<usize>,
}

/// Gap between the upper doublon band and the lower one.
///
/// The upper band is the top K doublon states, with K the number of dimers of
/// the effective doublon chain: (N−1)/2 for odd N; for even N either N/2 or
/// N/2−1, whichever leaves the upper band better isolated from the rest of
/// the spectrum. The lower band top is the next `doublon_bulk` state below;
/// edge and unclassified doublons in between are in-gap states.
pub fn doublon_gap(states: &[StateMetrics], size: usize) -> Result<DoublonGap, SpectraError> {
    let mut doublons: Vec<usize> = (0..states.len()).filter(|&i| states[i].class != StateClass::Scattering).collect();
    if doublons.len() < 4 {
        return Err(SpectraError::NoDoublonBand(doublons.len()));
    }
    doublons.sort_by(|&a, &b| states[b].energy.total_cmp(&states[a].energy));
    let candidates: Vec<usize> = if size % 2 == 1 { vec![(size - 1) / 2] } else { vec![size / 2, size / 2 - 1] };
    let mut best: Option<(f64, DoublonGap)> = None;
    for k in candidates {
        if k == 0 || k >= doublons.len() {
            continue;
        }
        let upper_band_bottom = states[doublons[k - 1]].energy;
        let pos = doublons[k..].iter().position(|&i| states[i].class == StateClass::DoublonBulk);
        let in_gap: Vec<usize> = doublons[k..k + pos.unwrap_or(doublons.len() - k)].to_vec();
        let below = (0..states.len())
            .filter(|i| states[*i].energy < upper_band_bottom - 1e-12 && !in_gap.contains(i))
            .map(|i| states[i].energy)
            .fold(f64::NEG_INFINITY, f64::max);
        if !below.is_finite() {
            continue;
        }
        let isolation = upper_band_bottom - below;
        // Without a bulk doublon below, the lower band has merged into the
        // continuum; the nearest state below stands in for its top.
        let lower_band_top = pos.map_or(below, |p| states[doublons[k + p]].energy);
        let mut gap = (upper_band_bottom - lower_band_top).max(0.0);
        if gap < 1e-6 {
            gap = 0.0;
        }
        let cand = DoublonGap { gap, lower_band_top, upper_band_bottom, band_size: k, in_gap };
        if best.as_ref().map_or(true, |(iso, _)| isolation > *iso) {
            best = Some((isolation, cand));
        }
    }
    best.map(|(_, g)| g).ok_or(SpectraError::NoDoublonBand(doublons.len()))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepPoint {
    pub theta: f64,
    pub states: Vec<StateMetrics>,
    /// Doublon gap; 0 when no band could be identified.
    pub gap: f64,
    pub band: Option<DoublonGap>,
    /// Most localized in-gap doublon, if any.
    pub edge_state_energy: Option<f64>,
    pub edge_state_class: Option<StateClass>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepResult {
    pub theta_grid: Vec<f64>,
    pub points: Vec<SweepPoint>,
}

impl SweepResult {
    pub fn gaps(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.gap).collect()
    }

    /// θ of the smallest gap on the grid.
    pub fn gap_minimum(&self) -> Option<(f64, f64)> {
        self.points.iter().map(|p| (p.theta, p.gap)).min_by(|a, b| a.1.total_cmp(&b.1))
    }

    /// CSV: theta, energy, ipr, class, edge_weight_left, edge_weight_right.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "theta,energy,ipr,class,edge_weight_left,edge_weight_right")?;
        for p in &self.points {
            for s in &p.states {
                writeln!(
                    w,
                    "{:.6},{:.10},{:.10},{},{:.10},{:.10}",
                    p.theta,
                    s.energy,
                    s.ipr,
                    s.class.as_str(),
                    s.edge_weight_left,
                    s.edge_weight_right
                )?;
            }
        }
        Ok(())
    }

    /// CSV: theta, gap, lower_band_top, upper_band_bottom, edge_state_energy, edge_state_class.
    pub fn write_gap_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "theta,gap,lower_band_top,upper_band_bottom,edge_state_energy,edge_state_class")?;
        for p in &self.points {
            let (lo, hi) = p.band.as_ref().map_or((f64::NAN, f64::NAN), |b| (b.lower_band_top, b.upper_band_bottom));
            let e = p.edge_state_energy.map_or(String::new(), |e| format!("{e:.10}"));
            let c = p.edge_state_class.map_or("", |c| c.as_str());
            writeln!(w, "{:.6},{:.10},{:.10},{:.10},{},{}", p.theta, p.gap, lo, hi, e, c)?;
        }
        Ok(())
    }
}

/// Evenly spaced grid over [start, stop] with `count` points.
pub fn linspace(start: f64, stop: f64, count: usize) -> Vec<f64> {
    match count {
        0 => vec![],
        1 => vec![start],
        _ => (0..count).map(|i| start + (stop - start) * i as f64 / (count - 1) as f64).collect(),
    }
}

pub fn sweep_point(params: &ModelParams, theta: f64, t: &Thresholds) -> Result<SweepPoint, SpectraError> {
    let states = physical_metrics(&params.with_theta(theta), t)?;
    let band = doublon_gap(&states, params.n_sites).ok();
    let edge = band.as_ref().and_then(|b| {
        b.in_gap.iter().copied().max_by(|&a, &c| states[a].ipr.total_cmp(&states[c].ipr))
    });
    Ok(SweepPoint {
        theta,
        gap: band.as_ref().map_or(0.0, |b| b.gap),
        edge_state_energy: edge.map(|i| states[i].energy),
        edge_state_class: edge.map(|i| states[i].class),
        band,
        states,
    })
}

/// Physical spectrum at each θ of the grid; points are computed in parallel
/// and returned in grid order.
pub fn theta_sweep(params: &ModelParams, grid: &[f64], t: &Thresholds) -> Result<SweepResult, SpectraError> {
    if grid.is_empty() {
        return Err(SpectraError::InvalidGrid("empty".into()));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(SpectraError::InvalidGrid("not strictly increasing".into()));
    }
    if grid.iter().any(|&th| !(0.0..=std::f64::consts::PI).contains(&th)) {
        return Err(SpectraError::InvalidGrid("values outside [0, pi]".into()));
    }
    let points = grid.par_iter().map(|&th| sweep_point(params, th, t)).collect::<Result<Vec<_>, _>>()?;
    Ok(SweepResult { theta_grid: grid.to_vec(), points })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub theta_c: f64,
    pub gap_min: f64,
    pub evaluations: usize,
}

/// Golden-section search for the doublon-gap minimum on `bracket`.
pub fn find_transition(params: &ModelParams, bracket: (f64, f64), tol: f64, t: &Thresholds) -> Result<Transition, SpectraError> {
    let (a0, b0) = bracket;
    if !(0.0..=std::f64::consts::PI).contains(&a0) || !(0.0..=std::f64::consts::PI).contains(&b0) || a0 >= b0 {
        return Err(SpectraError::InvalidGrid(format!("bad bracket [{a0}, {b0}]")));
    }
    let mut evals = 0usize;
    let mut gap = |th: f64| -> Result<f64, SpectraError> {
        evals += 1;
        Ok(sweep_point(params, th, t)?.gap)
    };
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (a0, b0);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = gap(c)?;
    let mut fd = gap(d)?;
    while b - a > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = gap(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = gap(d)?;
        }
    }
    let (theta_c, gap_min) = if fc <= fd { (c, fc) } else { (d, fd) };
    // A minimum pinned to the bracket edge means the gap is monotone there.
    if theta_c - a0 < 2.0 * tol || b0 - theta_c < 2.0 * tol {
        return Err(SpectraError::NoMinimum(a0, b0));
    }
    Ok(Transition { theta_c, gap_min, evaluations: evals })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn two_by_two() {
        let h = CMatrix::from_fn(2, 2, |i, j| if i == j { C64::new(0.0, 0.0) } else { C64::new(-1.0, 0.0) });
        let e = eigendecompose(&h).unwrap();
        assert_abs_diff_eq!(e.values[0], -1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(e.values[1], 1.0, epsilon = 1e-14);
    }

    #[test]
    fn ipr_limits() {
        let mut delta = vec![C64::new(0.0, 0.0); 225];
        delta[17] = C64::new(0.0, 1.0);
        assert_eq!(ipr(&delta).unwrap(), 1.0);
        let uniform = vec![C64::new(1.0 / 15.0, 0.0); 225];
        assert_abs_diff_eq!(ipr(&uniform).unwrap(), 1.0 / 225.0, epsilon = 1e-15);
        assert!(matches!(ipr(&[C64::new(2.0, 0.0)]), Err(SpectraError::NotNormalized(_))));
    }

    #[test]
    fn classify_delta_and_uniform() {
        let t = Thresholds::default();
        let mut delta = vec![C64::new(0.0, 0.0); 225];
        delta[0] = C64::new(1.0, 0.0);
        assert_eq!(state_metrics(0.0, &delta, 15, &t).unwrap().class, StateClass::DoublonEdgeLeft);
        let uniform = vec![C64::new(1.0 / 15.0, 0.0); 225];
        assert_eq!(state_metrics(0.0, &uniform, 15, &t).unwrap().class, StateClass::Scattering);
        assert_eq!(classify_state(0.9, 0.3, 0.3, &t), StateClass::Unclassified);
        assert_eq!(classify_state(0.9, 0.1, 0.6, &t), StateClass::DoublonEdgeRight);
        assert_eq!(classify_state(0.9, 0.1, 0.1, &t), StateClass::DoublonBulk);
    }

    #[test]
    fn three_site_free_pairs() {
        let p = ModelParams { n_sites: 3, u: 0.0, p: 0.0, ..Default::default() };
        let states = physical_spectrum(&p, &Thresholds::default()).unwrap();
        let single: Vec<f64> = (1..=3).map(|k| -2.0 * (k as f64 * std::f64::consts::PI / 4.0).cos()).collect();
        let mut pairs = vec![];
        for i in 0..3 {
            for j in i..3 {
                pairs.push(single[i] + single[j]);
            }
        }
        pairs.sort_by(f64::total_cmp);
        assert_eq!(states.len(), 6);
        for (s, e) in states.iter().zip(&pairs) {
            assert_abs_diff_eq!(s.energy(), *e, epsilon = 1e-12);
        }
    }

    #[test]
    fn two_sites_give_three_states() {
        let p = ModelParams { n_sites: 2, ..Default::default() };
        assert_eq!(physical_spectrum(&p, &Thresholds::default()).unwrap().len(), 3);
    }

    #[test]
    fn reconstruction_identity() {
        let p = ModelParams { n_sites: 6, theta: 0.8, ..Default::default() };
        let (_, hc) = sector_hamiltonian(&p).unwrap();
        let e = eigendecompose(&hc).unwrap();
        let n = hc.dim();
        let d = CMatrix::from_fn(n, n, |i, j| if i == j { C64::new(e.values[i], 0.0) } else { C64::new(0.0, 0.0) });
        let back = e.vectors.matmul(&d).matmul(&e.vectors.adjoint());
        assert!(back.sub(&hc).max_abs() <= 1e-9 * hc.max_abs());
        let gram = e.vectors.adjoint().matmul(&e.vectors);
        assert!(gram.sub(&CMatrix::identity(n)).max_abs() <= 1e-9);
    }

    #[test]
    fn linspace_endpoints() {
        let g = linspace(0.0, std::f64::consts::PI, 91);
        assert_eq!(g.len(), 91);
        assert_eq!(g[0], 0.0);
        assert_abs_diff_eq!(g[90], std::f64::consts::PI, epsilon = 1e-15);
        assert_eq!(linspace(0.3, 1.0, 1), vec![0.3]);
    }

    #[test]
    fn sweep_rejects_bad_grids() {
        let p = ModelParams { n_sites: 3, ..Default::default() };
        let t = Thresholds::default();
        assert!(theta_sweep(&p, &[], &t).is_err());
        assert!(theta_sweep(&p, &[0.5, 0.2], &t).is_err());
        assert!(theta_sweep(&p, &[0.5, 4.0], &t).is_err());
    }
}
