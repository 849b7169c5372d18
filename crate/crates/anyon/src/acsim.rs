//! Frequency-domain nodal analysis of a synthesized netlist.

use crate::circuit::{CircuitError, ElementKind, Netlist, Node};
use crate::matrix::CMatrix;
use crate::model::{build_hamiltonian, ModelError, ModelParams, Site};
use crate::C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::io::{self, Write};

/// |Z| is clipped here at lossless poles.
pub const Z_CLIP: f64 = 1e9;
/// Pivots below this are singular.
pub const PIVOT_FLOOR: f64 = 1e-30;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AcError {
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("frequency must be positive, got {0}")]
    ZeroFrequency(f64),
    #[error("admittance matrix is singular at node {node} (pivot {pivot:e})")]
    SingularMatrix { node: usize, pivot: f64 },
    #[error("netlist does not match the model: {0}")]
    ModeMismatch(String),
    #[error("node {0} is not in the circuit")]
    InvalidNode(String),
    #[error("invalid frequency grid: {0}")]
    InvalidGrid(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdmittanceMatrix {
    pub frequency: f64,
    pub y: CMatrix,
    /// Nodes no element touches; they make Y singular at every frequency.
    pub floating: Vec<usize>,
}

impl AdmittanceMatrix {
    pub fn dim(&self) -> usize {
        self.y.dim()
    }
}

/// Kirchhoff assembly over all nodes, internal ones included.
pub fn assemble_admittance(netlist: &Netlist, f: f64) -> Result<AdmittanceMatrix, AcError> {
    if !(f > 0.0 && f.is_finite()) {
        return Err(AcError::ZeroFrequency(f));
    }
    let dim = netlist.node_count();
    let mut y = CMatrix::zeros(dim, dim);
    let mut touched = vec![false; dim];
    for e in &netlist.elements {
        let (ya, yb) = e.admittances(f);
        let a = netlist.node_index(e.a);
        let b = netlist.node_index(e.b);
        for (node, other, yv) in [(a, b, ya), (b, a, yb)] {
            if let Some(i) = node {
                touched[i] = true;
                y[(i, i)] += yv;
                if let Some(k) = other {
                    y[(i, k)] -= yv;
                }
            }
        }
    }
    let floating = (0..dim).filter(|&i| !touched[i]).collect();
    Ok(AdmittanceMatrix { frequency: f, y, floating })
}

/// LU factorization with partial pivoting, PA = LU.
#[derive(Debug, Clone)]
pub struct Lu {
    lu: CMatrix,
    perm: Vec<usize>,
    /// Smallest |pivot| met, and its column.
    pub min_pivot: (f64, usize),
}

impl Lu {
    pub fn factor(a: &CMatrix) -> Lu {
        let n = a.dim();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut min_pivot = (f64::INFINITY, 0);
        for k in 0..n {
            let (p, mag) = (k..n).map(|i| (i, lu[(i, k)].norm())).fold((k, -1.0), |b, c| if c.1 > b.1 { c } else { b });
            if mag < min_pivot.0 {
                min_pivot = (mag, k);
            }
            if mag == 0.0 {
                continue;
            }
            if p != k {
                perm.swap(p, k);
                for j in 0..n {
                    let t = lu[(k, j)];
                    lu[(k, j)] = lu[(p, j)];
                    lu[(p, j)] = t;
                }
            }
            let pivot = lu[(k, k)];
            for i in k + 1..n {
                let l = lu[(i, k)] / pivot;
                lu[(i, k)] = l;
                if l == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in k + 1..n {
                    let u = lu[(k, j)];
                    lu[(i, j)] -= l * u;
                }
            }
        }
        Lu { lu, perm, min_pivot }
    }

    pub fn is_singular(&self) -> bool {
        self.min_pivot.0 < PIVOT_FLOOR
    }

    pub fn solve(&self, b: &[C64]) -> Vec<C64> {
        let n = self.perm.len();
        let mut x: Vec<C64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut s = x[i];
            for j in 0..i {
                s -= self.lu[(i, j)] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..n {
                s -= self.lu[(i, j)] * x[j];
            }
            x[i] = s / self.lu[(i, i)];
        }
        x
    }
}

fn unit(dim: usize, k: usize) -> Vec<C64> {
    let mut e = vec![C64::new(0.0, 0.0); dim];
    e[k] = C64::new(1.0, 0.0);
    e
}

/// Y_ss − Y_sx Y_xx⁻¹ Y_xs: the admittance seen at the first `keep` nodes.
pub fn reduce_admittance(y: &CMatrix, keep: usize) -> Result<CMatrix, AcError> {
    let dim = y.dim();
    if keep >= dim {
        return Ok(y.clone());
    }
    let inner = dim - keep;
    let yxx = CMatrix::from_fn(inner, inner, |i, j| y[(keep + i, keep + j)]);
    let lu = Lu::factor(&yxx);
    if lu.is_singular() {
        return Err(AcError::SingularMatrix { node: keep + lu.min_pivot.1, pivot: lu.min_pivot.0 });
    }
    let mut out = CMatrix::from_fn(keep, keep, |i, j| y[(i, j)]);
    for s in 0..keep {
        let col: Vec<C64> = (0..inner).map(|i| y[(keep + i, s)]).collect();
        let z = lu.solve(&col);
        for r in 0..keep {
            let mut acc = C64::new(0.0, 0.0);
            for i in 0..inner {
                acc += y[(r, keep + i)] * z[i];
            }
            out[(r, s)] -= acc;
        }
    }
    Ok(out)
}

/// Outcome of comparing Y(f) with σ_J(H/J − ε(f)).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MappingCheck {
    pub frequency: f64,
    pub residual: f64,
    /// max|Y| over the lattice nodes.
    pub scale: f64,
}

impl MappingCheck {
    pub fn relative(&self) -> f64 {
        self.residual / self.scale
    }
}

/// Entrywise check of Y(f) = σ_J (H/J − ε(f) I) on the lattice nodes.
///
/// Internal nodes of physical netlists are eliminated first; physical
/// netlists are exact only at f_ref. Inductors are taken lossless.
pub fn verify_mapping(netlist: &Netlist, params: &ModelParams, f: f64) -> Result<MappingCheck, AcError> {
    let p = &netlist.provenance;
    if netlist.n != params.n_sites
        || p.n_sites != params.n_sites
        || p.corner_shift != params.corner_shift
        || p.pairing != params.pairing
        || [p.j - params.j, p.u - params.u, p.p - params.p, p.theta - params.theta].iter().any(|d| d.abs() > 1e-12)
    {
        return Err(AcError::ModeMismatch(format!(
            "netlist was built for {:?}, checked against {:?}",
            netlist.provenance, params
        )));
    }
    let lossless = netlist.with_quality(None);
    let full = assemble_admittance(&lossless, f)?;
    let sites = params.full_dim();
    let y = reduce_admittance(&full.y, sites)?;
    let h = build_hamiltonian(params)?;
    let sigma = C64::new(0.0, -2.0 * PI * f * netlist.c_j);
    let eps = crate::circuit::epsilon_of_f(f, crate::circuit::f0(netlist.l, netlist.c_j));
    let mut residual: f64 = 0.0;
    for r in 0..sites {
        for c in 0..sites {
            let mut target = h[(r, c)] / params.j;
            if r == c {
                target -= eps;
            }
            residual = residual.max((y[(r, c)] - sigma * target).norm());
        }
    }
    Ok(MappingCheck { frequency: f, residual, scale: y.max_abs() })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriveResult {
    pub z: C64,
    /// |Z| hit a lossless pole and was clipped to [`Z_CLIP`].
    pub clipped: bool,
}

fn clip(z: C64) -> DriveResult {
    if z.is_finite() && z.norm() <= Z_CLIP {
        DriveResult { z, clipped: false }
    } else if z.is_finite() && z.norm() > 0.0 {
        DriveResult { z: z / z.norm() * Z_CLIP, clipped: true }
    } else {
        DriveResult { z: C64::new(Z_CLIP, 0.0), clipped: true }
    }
}

/// A floating node makes Y singular for a reason that is not a resonance.
fn check_connected(y: &AdmittanceMatrix) -> Result<(), AcError> {
    match y.floating.first() {
        Some(&node) => Err(AcError::SingularMatrix { node, pivot: 0.0 }),
        None => Ok(()),
    }
}

/// Voltages for unit current injected at `node`; `None` at a lossless pole.
pub fn solve_drive(y: &AdmittanceMatrix, node: usize) -> Result<Option<Vec<C64>>, AcError> {
    let dim = y.dim();
    if node >= dim {
        return Err(AcError::InvalidNode(node.to_string()));
    }
    check_connected(y)?;
    let lu = Lu::factor(&y.y);
    if lu.is_singular() {
        return Ok(None);
    }
    Ok(Some(lu.solve(&unit(dim, node))))
}

/// Input impedance at `node` under unit current drive, Z = (Y⁻¹)_nn.
pub fn drive_node_impedance(y: &AdmittanceMatrix, node: usize) -> Result<DriveResult, AcError> {
    Ok(match solve_drive(y, node)? {
        Some(v) => clip(v[node]),
        None => clip(C64::new(f64::INFINITY, 0.0)),
    })
}

/// Drive-point impedances of several nodes from one factorization.
pub fn drive_impedances(y: &AdmittanceMatrix, nodes: &[usize]) -> Result<Vec<DriveResult>, AcError> {
    let dim = y.dim();
    if let Some(&bad) = nodes.iter().find(|&&k| k >= dim) {
        return Err(AcError::InvalidNode(bad.to_string()));
    }
    check_connected(y)?;
    let lu = Lu::factor(&y.y);
    if lu.is_singular() {
        return Ok(nodes.iter().map(|_| clip(C64::new(f64::INFINITY, 0.0))).collect());
    }
    Ok(nodes.iter().map(|&k| clip(lu.solve(&unit(dim, k))[k])).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    pub frequency: f64,
    pub magnitude: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PeakOptions {
    /// Minimum prominence as a fraction of the spectrum's maximum.
    pub prominence: f64,
    /// Peaks closer than this many grid steps are merged.
    pub merge_steps: usize,
}

impl Default for PeakOptions {
    fn default() -> Self {
        Self { prominence: 0.1, merge_steps: 3 }
    }
}

/// Local maxima with prominence ≥ `opts.prominence`·max, merged when close.
///
/// Prominence is the height above the higher of the two lowest points
/// reached before meeting a taller sample on either side.
pub fn detect_peaks(frequencies: &[f64], magnitudes: &[f64], opts: &PeakOptions) -> Vec<Peak> {
    let n = magnitudes.len().min(frequencies.len());
    if n < 3 {
        return Vec::new();
    }
    let global = magnitudes[..n].iter().cloned().fold(0.0, f64::max);
    if !(global > 0.0) {
        return Vec::new();
    }
    let mut found: Vec<usize> = Vec::new();
    let mut i = 1;
    while i + 1 < n {
        let h = magnitudes[i];
        if h > magnitudes[i - 1] {
            // Walk over a plateau.
            let mut k = i;
            while k + 1 < n && magnitudes[k + 1] == h {
                k += 1;
            }
            if k + 1 < n && magnitudes[k + 1] < h {
                let mut left_min = h;
                for j in (0..i).rev() {
                    if magnitudes[j] > h {
                        break;
                    }
                    left_min = left_min.min(magnitudes[j]);
                }
                let mut right_min = h;
                for &m in &magnitudes[k + 1..n] {
                    if m > h {
                        break;
                    }
                    right_min = right_min.min(m);
                }
                let prominence = h - left_min.max(right_min);
                if prominence >= opts.prominence * global {
                    found.push((i + k) / 2);
                }
            }
            i = k + 1;
        } else {
            i += 1;
        }
    }
    let mut merged: Vec<usize> = Vec::new();
    for idx in found {
        match merged.last_mut() {
            Some(last) if idx - *last <= opts.merge_steps => {
                if magnitudes[idx] > magnitudes[*last] {
                    *last = idx;
                }
            }
            _ => merged.push(idx),
        }
    }
    merged.into_iter().map(|k| Peak { frequency: frequencies[k], magnitude: magnitudes[k] }).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImpedanceSpectrum {
    pub node: Site,
    pub frequencies: Vec<f64>,
    pub magnitude: Vec<f64>,
    pub clipped: Vec<bool>,
    pub peaks: Vec<Peak>,
}

impl ImpedanceSpectrum {
    pub fn any_clipped(&self) -> bool {
        self.clipped.iter().any(|&c| c)
    }
}

pub fn validate_grid(grid: &[f64]) -> Result<(), AcError> {
    if grid.is_empty() {
        return Err(AcError::InvalidGrid("empty".into()));
    }
    if grid.iter().any(|f| !(*f > 0.0 && f.is_finite())) {
        return Err(AcError::InvalidGrid("frequencies must be positive".into()));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(AcError::InvalidGrid("frequencies must be strictly increasing".into()));
    }
    Ok(())
}

/// `start`, `start+step`, … up to `stop` inclusive (within step/1000).
pub fn frequency_grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>, AcError> {
    if !(step > 0.0) || !(stop >= start) {
        return Err(AcError::InvalidGrid(format!("bad range {start}..{stop} step {step}")));
    }
    let count = ((stop - start) / step + 1e-3).floor() as usize + 1;
    Ok((0..count).map(|k| start + k as f64 * step).collect())
}

fn site_index(netlist: &Netlist, site: Site) -> Result<usize, AcError> {
    if site.m == 0 || site.n == 0 || site.m > netlist.n || site.n > netlist.n {
        return Err(AcError::InvalidNode(Node::Site(site).to_string()));
    }
    Ok(site.linear(netlist.n))
}

/// Spectra of several lattice nodes; inductors at quality factor `q`.
///
/// Frequencies are solved in parallel, one factorization each.
pub fn impedance_spectra(
    netlist: &Netlist,
    nodes: &[Site],
    grid: &[f64],
    q: Option<f64>,
    opts: &PeakOptions,
) -> Result<Vec<ImpedanceSpectrum>, AcError> {
    validate_grid(grid)?;
    let idx: Vec<usize> = nodes.iter().map(|&s| site_index(netlist, s)).collect::<Result<_, _>>()?;
    let lossy = netlist.with_quality(q);
    let rows: Vec<Vec<DriveResult>> = grid
        .par_iter()
        .map(|&f| assemble_admittance(&lossy, f).and_then(|y| drive_impedances(&y, &idx)))
        .collect::<Result<_, _>>()?;
    Ok(nodes
        .iter()
        .enumerate()
        .map(|(k, &node)| {
            let magnitude: Vec<f64> = rows.iter().map(|r| r[k].z.norm()).collect();
            let clipped = rows.iter().map(|r| r[k].clipped).collect();
            let peaks = detect_peaks(grid, &magnitude, opts);
            ImpedanceSpectrum { node, frequencies: grid.to_vec(), magnitude, clipped, peaks }
        })
        .collect())
}

pub fn impedance_spectrum(
    netlist: &Netlist,
    node: Site,
    grid: &[f64],
    q: Option<f64>,
    opts: &PeakOptions,
) -> Result<ImpedanceSpectrum, AcError> {
    Ok(impedance_spectra(netlist, &[node], grid, q, opts)?.remove(0))
}

/// Golden-section maximum of |Z(f)| at `node` within `center ± half_width`.
///
/// Locates a resonance between grid points; `tol` is in Hz.
pub fn refine_peak(
    netlist: &Netlist,
    node: Site,
    center: f64,
    half_width: f64,
    q: Option<f64>,
    tol: f64,
) -> Result<Peak, AcError> {
    let k = site_index(netlist, node)?;
    let lossy = netlist.with_quality(q);
    let z = |f: f64| -> Result<f64, AcError> { Ok(drive_node_impedance(&assemble_admittance(&lossy, f)?, k)?.z.norm()) };
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (center - half_width, center + half_width);
    let mut x1 = b - r * (b - a);
    let mut x2 = a + r * (b - a);
    let (mut z1, mut z2) = (z(x1)?, z(x2)?);
    while b - a > tol {
        if z1 > z2 {
            b = x2;
            x2 = x1;
            z2 = z1;
            x1 = b - r * (b - a);
            z1 = z(x1)?;
        } else {
            a = x1;
            x1 = x2;
            z1 = z2;
            x2 = a + r * (b - a);
            z2 = z(x2)?;
        }
    }
    let f = 0.5 * (a + b);
    Ok(Peak { frequency: f, magnitude: z(f)? })
}

/// |Z| at every lattice node, as grid[m−1][n−1].
pub fn impedance_map(netlist: &Netlist, f: f64, q: Option<f64>) -> Result<Vec<Vec<f64>>, AcError> {
    let y = assemble_admittance(&netlist.with_quality(q), f)?;
    let idx: Vec<usize> = (0..netlist.n * netlist.n).collect();
    let z = drive_impedances(&y, &idx)?;
    Ok(z.chunks(netlist.n).map(|row| row.iter().map(|d| d.z.norm()).collect()).collect())
}

/// Rows node_m,node_n,f_hz,z_ohm.
pub fn write_spectra_csv<W: Write>(spectra: &[ImpedanceSpectrum], mut w: W) -> io::Result<()> {
    writeln!(w, "node_m,node_n,f_hz,z_ohm")?;
    for s in spectra {
        for (f, z) in s.frequencies.iter().zip(&s.magnitude) {
            writeln!(w, "{},{},{},{:e}", s.node.m, s.node.n, f, z)?;
        }
    }
    Ok(())
}

/// Real power bookkeeping of one steady-state solve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerBalance {
    /// Delivered by the unit current source, Re(V_node).
    pub source: f64,
    /// Absorbed by resistors and NIC elements with net positive absorption.
    pub dissipated: f64,
    /// Delivered by NIC elements with net negative absorption.
    pub generated: f64,
    /// Absorbed by reactive elements (inductor series loss) and complex branches.
    pub other: f64,
}

/// Real power Re Σ conj(v)·i absorbed by each element.
pub fn element_powers(netlist: &Netlist, f: f64, v: &[C64]) -> Vec<f64> {
    let volt = |node: Node| netlist.node_index(node).map_or(C64::new(0.0, 0.0), |i| v[i]);
    netlist
        .elements
        .iter()
        .map(|e| {
            let (ya, yb) = e.admittances(f);
            let (va, vb) = (volt(e.a), volt(e.b));
            let ia = ya * (va - vb);
            let ib = yb * (vb - va);
            (va.conj() * ia + vb.conj() * ib).re
        })
        .collect()
}

/// Power balance for unit current drive at lattice node `node`.
pub fn power_balance(netlist: &Netlist, f: f64, node: Site) -> Result<PowerBalance, AcError> {
    let k = site_index(netlist, node)?;
    let y = assemble_admittance(netlist, f)?;
    let v = solve_drive(&y, k)?.ok_or(AcError::SingularMatrix { node: k, pivot: 0.0 })?;
    let mut out = PowerBalance { source: v[k].re, dissipated: 0.0, generated: 0.0, other: 0.0 };
    for (e, p) in netlist.elements.iter().zip(element_powers(netlist, f, &v)) {
        match e.kind {
            ElementKind::Resistor | ElementKind::NicLink if p >= 0.0 => out.dissipated += p,
            ElementKind::Resistor | ElementKind::NicLink => out.generated -= p,
            _ => out.other += p,
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{CircuitElement, SynthesisMode};
    use crate::model::Pairing;
    use approx::assert_relative_eq;

    fn one_node(elements: Vec<CircuitElement>) -> Netlist {
        Netlist {
            n: 1,
            mode: SynthesisMode::Ideal,
            f_ref: None,
            c_j: 1e-6,
            l: 1e-3,
            paper_replica: false,
            aux_nodes: 0,
            elements,
            provenance: ModelParams { n_sites: 1, pairing: Pairing::OddFirst, ..Default::default() },
        }
    }

    fn to_ground(kind: ElementKind, value: f64) -> CircuitElement {
        CircuitElement {
            kind,
            a: Node::Site(Site::new(1, 1)),
            b: Node::Ground,
            value,
            direction: None,
            q: None,
            coeff: None,
            label: String::new(),
        }
    }

    #[test]
    fn single_inductor() {
        let f = 1e4;
        let net = one_node(vec![to_ground(ElementKind::Inductor, 1e-3)]);
        let y = assemble_admittance(&net, f).unwrap();
        let w = 2.0 * PI * f;
        assert_relative_eq!(y.y[(0, 0)].im, 1.0 / (w * 1e-3), max_relative = 1e-14);
        let z = drive_node_impedance(&y, 0).unwrap();
        assert_relative_eq!(z.z.im, -w * 1e-3, max_relative = 1e-14);
        assert!(z.z.re.abs() < 1e-12 && !z.clipped);
    }

    #[test]
    fn parallel_groundings_halve() {
        let single = one_node(vec![to_ground(ElementKind::Resistor, 50.0)]);
        let double = one_node(vec![to_ground(ElementKind::Resistor, 50.0), to_ground(ElementKind::Resistor, 50.0)]);
        let z1 = drive_node_impedance(&assemble_admittance(&single, 1e3).unwrap(), 0).unwrap().z;
        let z2 = drive_node_impedance(&assemble_admittance(&double, 1e3).unwrap(), 0).unwrap().z;
        assert_relative_eq!(z2.re, z1.re / 2.0, max_relative = 1e-14);
    }

    #[test]
    fn lc_pole_is_clipped() {
        let (l, c) = (1e-3, 1e-6);
        let f = 1.0 / (2.0 * PI * (l * c as f64).sqrt());
        let net = one_node(vec![to_ground(ElementKind::Inductor, l), to_ground(ElementKind::Capacitor, c)]);
        let y = assemble_admittance(&net, f).unwrap();
        let z = drive_node_impedance(&y, 0).unwrap();
        assert!(z.clipped);
        assert_eq!(z.z.norm(), Z_CLIP);
    }

    #[test]
    fn zero_frequency_and_disconnected() {
        let net = one_node(vec![]);
        assert!(matches!(assemble_admittance(&net, 0.0), Err(AcError::ZeroFrequency(_))));
        let y = assemble_admittance(&net, 1.0).unwrap();
        assert!(matches!(drive_node_impedance(&y, 0), Err(AcError::SingularMatrix { .. })));
    }

    #[test]
    fn lu_solves_random_system() {
        let a = CMatrix::from_fn(5, 5, |i, j| C64::new(((i * 7 + j * 3) % 5) as f64 - 2.0, (i as f64 - j as f64) * 0.3));
        let x: Vec<C64> = (0..5).map(|k| C64::new(k as f64, 1.0)).collect();
        let b = a.matvec(&x);
        let got = Lu::factor(&a).solve(&b);
        for (g, e) in got.iter().zip(&x) {
            assert!((g - e).norm() < 1e-10);
        }
    }

    #[test]
    fn peaks_of_lorentzian() {
        let f: Vec<f64> = (0..801).map(|k| 8000.0 + 10.0 * k as f64).collect();
        let z: Vec<f64> = f.iter().map(|x| 1.0 / (1.0 + ((x - 11503.0) / 40.0).powi(2))).collect();
        let p = detect_peaks(&f, &z, &PeakOptions::default());
        assert_eq!(p.len(), 1);
        assert!((p[0].frequency - 11503.0).abs() <= 10.0);
        assert!(detect_peaks(&f, &vec![3.0; f.len()], &PeakOptions::default()).is_empty());
        // Ripple below the prominence threshold is ignored.
        let z2: Vec<f64> = z.iter().enumerate().map(|(k, v)| v + 0.01 * ((k % 2) as f64)).collect();
        assert_eq!(detect_peaks(&f, &z2, &PeakOptions::default()).len(), 1);
    }

    #[test]
    fn grid_checks() {
        assert_eq!(frequency_grid(8000.0, 16000.0, 10.0).unwrap().len(), 801);
        assert!(validate_grid(&[1.0, 1.0]).is_err());
        assert!(validate_grid(&[]).is_err());
    }
}
