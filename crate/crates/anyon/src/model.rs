//! Full-plane two-anyon Hamiltonian, exchange symmetry and physical sector.
//!
//! Two anyons on an open chain of N cavities map onto one particle on an N×N
//! square lattice with amplitudes β_mn. Hops along m are real; hops along n
//! pick up e^{∓iθ} when they cross the diagonal. Physical states obey
//! β_mn = e^{−iθ sgn(m−n)} β_nm.

use crate::matrix::CMatrix;
use crate::C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_1_SQRT_2;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParam { field: &'static str, reason: String },
}

/// Which bonds of the chain carry the pair hopping P.
///
/// `OddFirst` couples (1,2), (3,4), …; `EvenFirst` couples (2,3), (4,5), …
/// A site whose partner would fall outside the chain has no P-link.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pairing {
    #[default]
    OddFirst,
    EvenFirst,
}

impl Pairing {
    fn first_site(self) -> usize {
        match self {
            Pairing::OddFirst => 1,
            Pairing::EvenFirst => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelParams {
    pub n_sites: usize,
    pub j: f64,
    pub u: f64,
    pub p: f64,
    pub theta: f64,
    /// U → U + J²/(2U) at (1,1) and (N,N).
    pub corner_shift: bool,
    pub pairing: Pairing,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self { n_sites: 45, j: 1.0, u: 1.5, p: -0.75, theta: 0.0, corner_shift: false, pairing: Pairing::OddFirst }
    }
}

impl ModelParams {
    pub fn with_theta(&self, theta: f64) -> Self {
        Self { theta, ..self.clone() }
    }

    /// Dimension of the full plane, N².
    pub fn full_dim(&self) -> usize {
        self.n_sites * self.n_sites
    }

    /// Dimension of the physical sector, N(N+1)/2.
    pub fn sector_dim(&self) -> usize {
        self.n_sites * (self.n_sites + 1) / 2
    }

    /// Interaction U_mm on diagonal site (m,m), including the corner shift.
    pub fn onsite_u(&self, m: usize) -> f64 {
        if self.corner_shift && (m == 1 || m == self.n_sites) {
            self.u + self.j * self.j / (2.0 * self.u)
        } else {
            self.u
        }
    }

    /// P-link partner of chain site m, if any.
    pub fn pair_partner(&self, m: usize) -> Option<usize> {
        let first = self.pairing.first_site();
        if m < first || m > self.n_sites {
            return None;
        }
        let partner = if (m - first) % 2 == 0 { m + 1 } else { m - 1 };
        (partner >= first && partner <= self.n_sites).then_some(partner)
    }
}

pub fn validate_params(params: &ModelParams) -> Result<(), ModelError> {
    let bad = |field, reason: &str| Err(ModelError::InvalidParam { field, reason: reason.to_string() });
    if params.n_sites < 2 {
        return bad("n_sites", "must be at least 2");
    }
    for (field, v) in [("j", params.j), ("u", params.u), ("p", params.p), ("theta", params.theta)] {
        if !v.is_finite() {
            return bad(field, "must be finite");
        }
    }
    if params.j == 0.0 {
        return bad("j", "must be nonzero");
    }
    if params.corner_shift && params.u == 0.0 {
        return bad("u", "must be nonzero when corner_shift is set");
    }
    if !(0.0..=std::f64::consts::PI).contains(&params.theta) {
        return bad("theta", "must lie in [0, pi]");
    }
    Ok(())
}

/// Lattice coordinate, 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Site {
    pub m: usize,
    pub n: usize,
}

impl Site {
    pub fn new(m: usize, n: usize) -> Self {
        Self { m, n }
    }

    /// Row-major index (m−1)·N + (n−1).
    pub fn linear(self, size: usize) -> usize {
        (self.m - 1) * size + (self.n - 1)
    }

    pub fn from_linear(index: usize, size: usize) -> Self {
        Self { m: index / size + 1, n: index % size + 1 }
    }
}

pub(crate) fn sgn(x: i64) -> f64 {
    match x.cmp(&0) {
        std::cmp::Ordering::Greater => 1.0,
        std::cmp::Ordering::Less => -1.0,
        std::cmp::Ordering::Equal => 0.0,
    }
}

/// φ for the hop (m,n) → (m,n+dn), dn = ±1.
pub fn hop_phase(theta: f64, m: usize, n: usize, dn: i64) -> C64 {
    let (m, n) = (m as i64, n as i64);
    let arg = -theta * (sgn(n + dn - m) - sgn(n - m));
    C64::from_polar(1.0, arg)
}

/// e^{−iθ sgn(m−n)}: β_mn = exchange_phase · β_nm in the physical sector.
pub fn exchange_phase(theta: f64, m: usize, n: usize) -> C64 {
    C64::from_polar(1.0, -theta * sgn(m as i64 - n as i64))
}

/// Nonzero entries (row, col, value) of the full-plane H, both triangles.
///
/// Only entries with row ≤ col are computed; the lower triangle is their
/// conjugate, so Hermiticity is exact.
pub fn hamiltonian_entries(params: &ModelParams) -> Result<Vec<(usize, usize, C64)>, ModelError> {
    validate_params(params)?;
    let size = params.n_sites;
    let j = params.j;
    let mut upper = Vec::with_capacity(3 * size * size);
    for m in 1..=size {
        for n in 1..=size {
            let row = Site::new(m, n).linear(size);
            if m == n {
                upper.push((row, row, C64::new(2.0 * params.onsite_u(m), 0.0)));
                if let Some(q) = params.pair_partner(m) {
                    if q > m && params.p != 0.0 {
                        upper.push((row, Site::new(q, q).linear(size), C64::new(params.p, 0.0)));
                    }
                }
            }
            if m < size {
                upper.push((row, Site::new(m + 1, n).linear(size), C64::new(-j, 0.0)));
            }
            if n < size {
                upper.push((row, Site::new(m, n + 1).linear(size), -j * hop_phase(params.theta, m, n, 1)));
            }
        }
    }
    let mut all = Vec::with_capacity(2 * upper.len());
    for &(r, c, v) in &upper {
        all.push((r, c, v));
        if r != c {
            all.push((c, r, v.conj()));
        }
    }
    Ok(all)
}

pub fn build_hamiltonian(params: &ModelParams) -> Result<CMatrix, ModelError> {
    let dim = params.full_dim();
    let mut h = CMatrix::zeros(dim, dim);
    for (r, c, v) in hamiltonian_entries(params)? {
        h[(r, c)] += v;
    }
    Ok(h)
}

/// Unitary S with (Sβ)_mn = e^{−iθ sgn(m−n)} β_nm; S² = I.
pub fn exchange_operator(params: &ModelParams) -> CMatrix {
    let size = params.n_sites;
    let mut s = CMatrix::zeros(size * size, size * size);
    for m in 1..=size {
        for n in 1..=size {
            s[(Site::new(m, n).linear(size), Site::new(n, m).linear(size))] = exchange_phase(params.theta, m, n);
        }
    }
    s
}

/// Π = (I + S)/2.
pub fn symmetry_projector(s: &CMatrix) -> CMatrix {
    CMatrix::identity(s.dim()).add(s).scale(C64::new(0.5, 0.0))
}

/// Orthonormal basis of the physical sector (range of Π).
///
/// Column k is either a diagonal site e_mm or the pair
/// (e_mn + e^{iθ} e_nm)/√2 for m > n. Columns are ordered by m, then n ≤ m.
#[derive(Debug, Clone)]
pub struct SectorBasis {
    size: usize,
    columns: Vec<Vec<(usize, C64)>>,
}

impl SectorBasis {
    pub fn new(params: &ModelParams) -> Self {
        let size = params.n_sites;
        let mut columns = Vec::with_capacity(params.sector_dim());
        for m in 1..=size {
            for n in 1..=m {
                let a = Site::new(m, n).linear(size);
                if m == n {
                    columns.push(vec![(a, C64::new(1.0, 0.0))]);
                } else {
                    let b = Site::new(n, m).linear(size);
                    let partner = exchange_phase(params.theta, n, m);
                    columns.push(vec![(a, C64::new(FRAC_1_SQRT_2, 0.0)), (b, partner * FRAC_1_SQRT_2)]);
                }
            }
        }
        Self { size, columns }
    }

    pub fn dim(&self) -> usize {
        self.columns.len()
    }

    /// B†·H·B for H given by sparse entries.
    pub fn compress(&self, entries: &[(usize, usize, C64)]) -> CMatrix {
        let full = self.size * self.size;
        let mut owner: Vec<(usize, C64)> = vec![(usize::MAX, C64::new(0.0, 0.0)); full];
        for (k, col) in self.columns.iter().enumerate() {
            for &(site, coeff) in col {
                owner[site] = (k, coeff);
            }
        }
        let mut out = CMatrix::zeros(self.dim(), self.dim());
        for &(r, c, v) in entries {
            let (a, ca) = owner[r];
            let (b, cb) = owner[c];
            out[(a, b)] += ca.conj() * v * cb;
        }
        // Round-off can leave the diagonal with a tiny imaginary part.
        for i in 0..out.dim() {
            out[(i, i)].im = 0.0;
        }
        out
    }

    /// Full-plane amplitudes B·c.
    pub fn expand(&self, coeffs: &[C64]) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); self.size * self.size];
        for (col, &c) in self.columns.iter().zip(coeffs) {
            for &(site, coeff) in col {
                out[site] += coeff * c;
            }
        }
        out
    }

    /// Dense N²×dim matrix B.
    pub fn to_matrix(&self) -> CMatrix {
        let mut b = CMatrix::zeros(self.size * self.size, self.dim());
        for (k, col) in self.columns.iter().enumerate() {
            for &(site, coeff) in col {
                b[(site, k)] = coeff;
            }
        }
        b
    }
}

/// Physical-sector Hamiltonian B†HB.
pub fn sector_hamiltonian(params: &ModelParams) -> Result<(SectorBasis, CMatrix), ModelError> {
    let entries = hamiltonian_entries(params)?;
    let basis = SectorBasis::new(params);
    let hc = basis.compress(&entries);
    Ok((basis, hc))
}
