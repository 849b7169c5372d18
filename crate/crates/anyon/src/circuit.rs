//! Electric-circuit emulation of the full-plane Hamiltonian.
//!
//! Every lattice site becomes a node grounded through an inductor L. Bonds
//! become capacitors C_J, P-links capacitors C_P, and the bonds that cross the
//! diagonal become direction-dependent elements Z(θ). With σ_J = −i2πfC_J the
//! node equations read Y(f) = σ_J (H/J − ε(f)), ε = f0²/f² − 4.
//!
//! Time convention is e^{−iωt}: a capacitor has admittance −iωC, an inductor
//! i/(ωL).

use crate::model::{hop_phase, validate_params, ModelError, ModelParams, Site};
use crate::spectra::{doublon_gap, physical_metrics, SpectraError, Thresholds};
use crate::C64;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::f64::consts::PI;
use std::fmt::{self, Write as _};
use std::str::FromStr;

/// Coefficients below this are treated as absent.
const TINY: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CircuitError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Spectra(#[from] SpectraError),
    #[error("P = {0} > 0 cannot be realized with a capacitor")]
    UnsupportedSign(f64),
    #[error("singular synthesis: {0}")]
    SingularSynthesis(String),
    #[error("invalid circuit config `{field}`: {reason}")]
    InvalidConfig { field: &'static str, reason: String },
    #[error("netlist parse error on line {line}: {reason}")]
    Parse { line: usize, reason: String },
}

/// Node class 1..=11 of a lattice site, by its neighbourhood.
///
/// Sites in the upper triangle not listed separately share the class of their
/// mirror image, e.g. (1,5) is class 9 like (5,1) and (1,N) is class 10.
pub fn node_class(m: usize, n: usize, size: usize) -> u8 {
    let on_edge = m == 1 || n == 1 || m == size || n == size;
    if m == n {
        return if m == 1 {
            1
        } else if m == size {
            8
        } else if m % 2 == 0 {
            4
        } else {
            7
        };
    }
    if m == n + 1 {
        return if (m, n) == (2, 1) { 2 } else { 5 };
    }
    if n == m + 1 {
        return if (m, n) == (1, 2) { 3 } else { 6 };
    }
    if (m, n) == (size, 1) || (m, n) == (1, size) {
        10
    } else if on_edge {
        9
    } else {
        11
    }
}

/// Element values of the circuit for given model parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ElementValues {
    pub c_j: f64,
    pub c_p: f64,
    pub c_u: f64,
    /// C_U at a corner carrying the corner shift (and a P-link).
    pub c_u_corner: f64,
    pub c_g: f64,
    /// σ_J e^{−iθ}/σ_J, the Z(θ) link in its forward direction.
    pub link: C64,
    /// σ_g^(1)/σ_J = 1 − e^{iθ}.
    pub g1: C64,
    /// σ_g^(2)/σ_J = 1 − e^{−iθ}.
    pub g2: C64,
}

pub fn element_values(params: &ModelParams, c_j: f64) -> Result<ElementValues, CircuitError> {
    validate_params(params)?;
    if params.p > 0.0 {
        return Err(CircuitError::UnsupportedSign(params.p));
    }
    let (j, u, theta) = (params.j, params.u, params.theta);
    let c_p = -params.p / j * c_j;
    let c_u = 2.0 * u / j * c_j - c_p;
    let u_corner = if u != 0.0 { u + j * j / (2.0 * u) } else { u };
    let c_u_corner = 2.0 * u_corner / j * c_j - c_p;
    let one = C64::new(1.0, 0.0);
    Ok(ElementValues {
        c_j,
        c_p,
        c_u,
        c_u_corner,
        c_g: 2.0 * c_j * (1.0 - theta.cos()),
        link: C64::from_polar(1.0, -theta),
        g1: one - C64::from_polar(1.0, theta),
        g2: one - C64::from_polar(1.0, -theta),
    })
}

/// Resonance frequency 1/(2π√(L C_J)) of a grounding inductor with C_J.
pub fn f0(l: f64, c_j: f64) -> f64 {
    1.0 / (2.0 * PI * (l * c_j).sqrt())
}

/// ε(f) = f0²/f² − 4.
pub fn epsilon_of_f(f: f64, f0: f64) -> f64 {
    f0 * f0 / (f * f) - 4.0
}

/// Inverse of [`epsilon_of_f`]; `None` for ε ≤ −4.
pub fn f_of_epsilon(eps: f64, f0: f64) -> Option<f64> {
    (eps > -4.0).then(|| f0 / (eps + 4.0).sqrt())
}

/// Input impedances of an INIC with series resistor R and gain resistors R1, R2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NicImpedance {
    /// Seen from the inverting port: −R·R1/R2.
    pub inverting: f64,
    /// Seen from the opposite port: +R.
    pub opposite: f64,
}

pub fn nic_input_impedance(r: f64, r1: f64, r2: f64) -> NicImpedance {
    NicImpedance { inverting: -r * r1 / r2, opposite: r }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SynthesisMode {
    /// Frequency-independent complex links, exact at every frequency.
    #[default]
    Ideal,
    /// R/L/C/NIC realization, exact at f_ref.
    Physical,
}

impl fmt::Display for SynthesisMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SynthesisMode::Ideal => "ideal",
            SynthesisMode::Physical => "physical",
        })
    }
}

impl FromStr for SynthesisMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ideal" => Ok(SynthesisMode::Ideal),
            "physical" => Ok(SynthesisMode::Physical),
            other => Err(format!("unknown synthesis mode `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CircuitConfig {
    pub mode: SynthesisMode,
    /// Reference frequency in Hz for physical mode; `None` picks the
    /// doublon-gap centre.
    pub f_ref: Option<f64>,
    pub c_j: f64,
    pub l: f64,
    /// Inductor quality factor; `None` is lossless.
    pub q: Option<f64>,
    /// Use the published θ=1 and θ=π component values where they apply.
    pub paper_replica: bool,
}

impl Default for CircuitConfig {
    fn default() -> Self {
        Self { mode: SynthesisMode::Ideal, f_ref: None, c_j: 1e-6, l: 23.21e-6, q: Some(200.0), paper_replica: false }
    }
}

impl CircuitConfig {
    fn validate(&self) -> Result<(), CircuitError> {
        let bad = |field, reason: &str| Err(CircuitError::InvalidConfig { field, reason: reason.to_string() });
        if !(self.c_j > 0.0 && self.c_j.is_finite()) {
            return bad("c_j", "must be positive");
        }
        if !(self.l > 0.0 && self.l.is_finite()) {
            return bad("l", "must be positive");
        }
        if let Some(q) = self.q {
            if !(q > 0.0) {
                return bad("q", "must be positive");
            }
        }
        Ok(())
    }
}

/// A circuit node: ground, a lattice site, or an internal node of a series
/// grounding branch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum Node {
    Ground,
    Site(Site),
    Aux(usize),
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Node::Ground => f.write_str("0"),
            Node::Site(s) => write!(f, "n_{}_{}", s.m, s.n),
            Node::Aux(k) => write!(f, "x_{k}"),
        }
    }
}

impl FromStr for Node {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "0" {
            return Ok(Node::Ground);
        }
        let bad = || format!("bad node name `{s}`");
        if let Some(rest) = s.strip_prefix("n_") {
            let (m, n) = rest.split_once('_').ok_or_else(bad)?;
            let m = m.parse().map_err(|_| bad())?;
            let n = n.parse().map_err(|_| bad())?;
            if m == 0 || n == 0 {
                return Err(bad());
            }
            return Ok(Node::Site(Site::new(m, n)));
        }
        if let Some(k) = s.strip_prefix("x_") {
            return k.parse().map(Node::Aux).map_err(|_| bad());
        }
        Err(bad())
    }
}

impl From<Node> for String {
    fn from(n: Node) -> String {
        n.to_string()
    }
}

impl TryFrom<String> for Node {
    type Error = String;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ElementKind {
    Capacitor,
    Inductor,
    Resistor,
    NicLink,
    ComplexLink,
    GroundBranch,
}

/// One two-terminal element.
///
/// `value` is in SI units. For `nic_link` it is |R| and `direction` is the
/// sign of the resistance seen from `a`. For `complex_link` and
/// `ground_branch` it is the capacitance scale C_J and `coeff` the complex
/// multiplier of σ_J; a complex link has σ_J·coeff seen from `a` and
/// σ_J·conj(coeff) seen from `b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircuitElement {
    pub kind: ElementKind,
    pub a: Node,
    pub b: Node,
    pub value: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direction: Option<i8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coeff: Option<C64>,
    /// Role in the circuit, e.g. "C_J", "C_U", "Z_g".
    #[serde(default)]
    pub label: String,
}

impl CircuitElement {
    fn new(kind: ElementKind, a: Node, b: Node, value: f64, label: &str) -> Self {
        Self { kind, a, b, value, direction: None, q: None, coeff: None, label: label.to_string() }
    }

    /// Admittances (y_a, y_b) seen from each terminal at frequency f.
    ///
    /// The element stamps Y_aa += y_a, Y_ab −= y_a, Y_bb += y_b, Y_ba −= y_b.
    pub fn admittances(&self, f: f64) -> (C64, C64) {
        let w = 2.0 * PI * f;
        let i = C64::new(0.0, 1.0);
        match self.kind {
            ElementKind::Capacitor => {
                let y = -i * w * self.value;
                (y, y)
            }
            ElementKind::Inductor => {
                let z = match self.q {
                    Some(q) => C64::new(w * self.value / q, -w * self.value),
                    None => C64::new(0.0, -w * self.value),
                };
                let y = z.inv();
                (y, y)
            }
            ElementKind::Resistor => {
                let y = C64::new(1.0 / self.value, 0.0);
                (y, y)
            }
            ElementKind::NicLink => {
                let g = f64::from(self.direction.unwrap_or(1)) / self.value;
                (C64::new(g, 0.0), C64::new(-g, 0.0))
            }
            ElementKind::ComplexLink | ElementKind::GroundBranch => {
                let c = self.coeff.unwrap_or(C64::new(1.0, 0.0));
                let sigma = -i * w * self.value;
                (sigma * c, sigma * c.conj())
            }
        }
    }

    /// Whether y_a = y_b for every frequency.
    pub fn is_reciprocal(&self) -> bool {
        match self.kind {
            ElementKind::NicLink => self.b == Node::Ground,
            ElementKind::ComplexLink => self.coeff.map_or(true, |c| c.im == 0.0),
            _ => true,
        }
    }

    fn sort_key(&self) -> (ElementKind, Node, Node) {
        (self.kind, self.a, self.b)
    }
}

fn element_order(x: &CircuitElement, y: &CircuitElement) -> Ordering {
    x.sort_key()
        .cmp(&y.sort_key())
        .then_with(|| x.label.cmp(&y.label))
        .then_with(|| x.value.total_cmp(&y.value))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Netlist {
    pub n: usize,
    pub mode: SynthesisMode,
    pub f_ref: Option<f64>,
    pub c_j: f64,
    pub l: f64,
    pub paper_replica: bool,
    /// Number of internal nodes x_0..x_{k−1}.
    pub aux_nodes: usize,
    pub elements: Vec<CircuitElement>,
    pub provenance: ModelParams,
}

impl Netlist {
    /// Lattice nodes first (row-major), then internal nodes.
    pub fn node_count(&self) -> usize {
        self.n * self.n + self.aux_nodes
    }

    pub fn node_index(&self, node: Node) -> Option<usize> {
        match node {
            Node::Ground => None,
            Node::Site(s) => Some(s.linear(self.n)),
            Node::Aux(k) => Some(self.n * self.n + k),
        }
    }

    pub fn is_reciprocal(&self) -> bool {
        self.elements.iter().all(CircuitElement::is_reciprocal)
    }

    /// Copy with every inductor at quality factor `q` (`None`: lossless).
    pub fn with_quality(&self, q: Option<f64>) -> Netlist {
        let mut out = self.clone();
        for e in out.elements.iter_mut().filter(|e| e.kind == ElementKind::Inductor) {
            e.q = q;
        }
        out
    }

    pub fn count(&self, kind: ElementKind) -> usize {
        self.elements.iter().filter(|e| e.kind == kind).count()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("netlist serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

/// Centre of the doublon gap mapped to frequency, f0/√(ε_mid + 4).
pub fn gap_center_frequency(params: &ModelParams, c_j: f64, l: f64) -> Result<f64, CircuitError> {
    let states = physical_metrics(params, &Thresholds::default())?;
    let gap = doublon_gap(&states, params.n_sites)?;
    let eps = 0.5 * (gap.lower_band_top + gap.upper_band_bottom) / params.j;
    f_of_epsilon(eps, f0(l, c_j))
        .ok_or_else(|| CircuitError::SingularSynthesis(format!("gap centre ε = {eps} maps to no frequency")))
}

/// Published component values that replace formulas in replica mode.
mod replica {
    pub const LINK_C_THETA1: f64 = 0.48e-6;
    pub const LINK_R_THETA1: f64 = 15.8;
    pub const GROUND_R_THETA1: f64 = 11.77;
    pub const C_G_THETA1: f64 = 1e-6;
    pub const L_J_THETA_PI: f64 = 190.21e-6;
}

struct Builder<'a> {
    cfg: &'a CircuitConfig,
    omega: f64,
    theta: f64,
    elements: Vec<CircuitElement>,
    aux: usize,
}

impl Builder<'_> {
    fn replica_at(&self, theta: f64) -> bool {
        self.cfg.paper_replica && self.cfg.mode == SynthesisMode::Physical && (self.theta - theta).abs() < 1e-9
    }

    fn push(&mut self, e: CircuitElement) {
        self.elements.push(e);
    }

    fn inductor(&mut self, a: Node, b: Node, l: f64, label: &str) {
        let mut e = CircuitElement::new(ElementKind::Inductor, a, b, l, label);
        e.q = self.cfg.q;
        self.push(e);
    }

    /// Link a–b with σ_J·t seen from a and σ_J·conj(t) from b.
    fn link(&mut self, a: Node, b: Node, t: C64, label: &str) {
        let c_j = self.cfg.c_j;
        if t.im.abs() < TINY {
            if t.re > 0.0 {
                self.push(CircuitElement::new(ElementKind::Capacitor, a, b, t.re * c_j, label));
            } else {
                self.reactive_negative(a, b, t.re, label);
            }
            return;
        }
        if self.cfg.mode == SynthesisMode::Ideal {
            let mut e = CircuitElement::new(ElementKind::ComplexLink, a, b, c_j, label);
            e.coeff = Some(t);
            self.push(e);
            return;
        }
        // σ_J t = ωC_J sinφ − iωC_J cosφ: a capacitor (or inductor) in
        // parallel with a signed conductance ±ωC_J sinφ.
        let w = self.omega;
        if t.re > TINY {
            let c = if self.replica_at(1.0) { replica::LINK_C_THETA1 } else { t.re * c_j };
            self.push(CircuitElement::new(ElementKind::Capacitor, a, b, c, label));
        } else if t.re < -TINY {
            self.reactive_negative(a, b, t.re, label);
        }
        let g = w * c_j * t.im;
        let r = if self.replica_at(1.0) { replica::LINK_R_THETA1 } else { 1.0 / g.abs() };
        let mut e = CircuitElement::new(ElementKind::NicLink, a, b, r, label);
        e.direction = Some(if g > 0.0 { 1 } else { -1 });
        self.push(e);
    }

    /// Realizes admittance σ_J·x with x < 0 (a negative capacitance).
    fn reactive_negative(&mut self, a: Node, b: Node, x: f64, label: &str) {
        match self.cfg.mode {
            SynthesisMode::Ideal => {
                let kind = if b == Node::Ground { ElementKind::GroundBranch } else { ElementKind::ComplexLink };
                let mut e = CircuitElement::new(kind, a, b, self.cfg.c_j, label);
                e.coeff = Some(C64::new(x, 0.0));
                self.push(e);
            }
            SynthesisMode::Physical => {
                let l = if self.replica_at(PI) && label == "Z" {
                    replica::L_J_THETA_PI
                } else {
                    1.0 / (self.omega * self.omega * self.cfg.c_j * x.abs())
                };
                self.inductor(a, b, l, label);
            }
        }
    }

    /// Grounding of `node` with admittance σ_J·c.
    fn ground(&mut self, node: Node, c: C64, label: &str) {
        if c.norm() < TINY {
            return;
        }
        let c_j = self.cfg.c_j;
        if c.im.abs() < TINY {
            if c.re > 0.0 {
                let value = if label == "C_g" && self.replica_at(1.0) { replica::C_G_THETA1 } else { c.re * c_j };
                self.push(CircuitElement::new(ElementKind::Capacitor, node, Node::Ground, value, label));
            } else {
                self.reactive_negative(node, Node::Ground, c.re, label);
            }
            return;
        }
        if self.cfg.mode == SynthesisMode::Ideal {
            let mut e = CircuitElement::new(ElementKind::GroundBranch, node, Node::Ground, c_j, label);
            e.coeff = Some(c);
            self.push(e);
            return;
        }
        // Series branch node–x–ground with impedance 1/(σ_J c) at f_ref:
        // Z = (b + ia)/(ωC_J|c|²) for c = a + ib.
        let w = self.omega;
        let norm2 = c.norm_sqr();
        let r = c.im / (w * c_j * norm2);
        let x = Node::Aux(self.aux);
        self.aux += 1;
        if c.re > 0.0 {
            self.push(CircuitElement::new(ElementKind::Capacitor, node, x, c_j * norm2 / c.re, label));
        } else {
            self.inductor(node, x, -c.re / (w * w * c_j * norm2), label);
        }
        let r_abs = if self.replica_at(1.0) { replica::GROUND_R_THETA1 } else { r.abs() };
        if r > 0.0 {
            self.push(CircuitElement::new(ElementKind::Resistor, x, Node::Ground, r_abs, label));
        } else {
            let mut e = CircuitElement::new(ElementKind::NicLink, x, Node::Ground, r_abs, label);
            e.direction = Some(-1);
            self.push(e);
        }
    }
}

/// Builds the circuit whose node equations reproduce H.
///
/// Groundings are derived per node as target diagonal minus what the links
/// already stamp, split into the C_U part (diagonal nodes), the missing
/// neighbour part (edges) and the part left over by complex links (C_g on the
/// diagonal, Z_g on co-diagonal nodes and corners).
pub fn synthesize_netlist(params: &ModelParams, cfg: &CircuitConfig) -> Result<Netlist, CircuitError> {
    cfg.validate()?;
    let values = element_values(params, cfg.c_j)?;
    let f_ref = match cfg.mode {
        SynthesisMode::Ideal => None,
        SynthesisMode::Physical => {
            let f = match cfg.f_ref {
                Some(f) => f,
                None => gap_center_frequency(params, cfg.c_j, cfg.l)?,
            };
            if !(f > 0.0 && f.is_finite()) {
                return Err(CircuitError::SingularSynthesis(format!("physical synthesis needs f_ref > 0, got {f}")));
            }
            Some(f)
        }
    };
    let size = params.n_sites;
    let j = params.j;
    let theta = params.theta;
    let mut b = Builder { cfg, omega: 2.0 * PI * f_ref.unwrap_or(0.0), theta, elements: Vec::new(), aux: 0 };

    for m in 1..=size {
        for n in 1..=size {
            let here = Node::Site(Site::new(m, n));
            b.inductor(here, Node::Ground, cfg.l, "L");
            if m < size {
                b.link(here, Node::Site(Site::new(m + 1, n)), C64::new(1.0, 0.0), "C_J");
            }
            if n < size {
                let t = hop_phase(theta, m, n, 1);
                let label = if t.im.abs() < TINY && t.re > 0.0 { "C_J" } else { "Z" };
                b.link(here, Node::Site(Site::new(m, n + 1)), t, label);
            }
            if m == n {
                if let Some(q) = params.pair_partner(m).filter(|&q| q > m && values.c_p > 0.0) {
                    b.push(CircuitElement::new(
                        ElementKind::Capacitor,
                        here,
                        Node::Site(Site::new(q, q)),
                        values.c_p,
                        "C_P",
                    ));
                }
            }
        }
    }

    for m in 1..=size {
        for n in 1..=size {
            let here = Node::Site(Site::new(m, n));
            if m == n {
                let p_links = if params.pair_partner(m).is_some() { values.c_p / cfg.c_j } else { 0.0 };
                b.ground(here, C64::new(2.0 * params.onsite_u(m) / j - p_links, 0.0), "C_U");
            }
            let neighbours = [m > 1, m < size, n > 1, n < size].iter().filter(|&&x| x).count();
            b.ground(here, C64::new(4.0 - neighbours as f64, 0.0), "C_edge");
            let mut stat = C64::new(0.0, 0.0);
            if n < size {
                stat += 1.0 - hop_phase(theta, m, n, 1);
            }
            if n > 1 {
                stat += 1.0 - hop_phase(theta, m, n, -1);
            }
            let label = if m == n && !(m == 1 || m == size) || stat.im.abs() < TINY { "C_g" } else { "Z_g" };
            b.ground(here, stat, label);
        }
    }

    let mut elements = b.elements;
    elements.sort_by(element_order);
    Ok(Netlist {
        n: size,
        mode: cfg.mode,
        f_ref,
        c_j: cfg.c_j,
        l: cfg.l,
        paper_replica: cfg.paper_replica,
        aux_nodes: b.aux,
        elements,
        provenance: params.clone(),
    })
}

fn kind_prefix(kind: ElementKind) -> &'static str {
    match kind {
        ElementKind::Capacitor => "C",
        ElementKind::Inductor => "L",
        ElementKind::Resistor => "R",
        ElementKind::NicLink => "RN",
        ElementKind::ComplexLink => "YC",
        ElementKind::GroundBranch => "YG",
    }
}

/// Flat SPICE-style card deck.
///
/// NIC links are written as a signed resistance (the value seen from the
/// first node) with a comment describing the op-amp realization. Complex
/// links and complex groundings of ideal netlists are behavioural `Y` cards.
/// Extra attributes go after `;` as key=value pairs and are read back by
/// [`parse_spice`].
pub fn export_spice(netlist: &Netlist) -> String {
    let p = &netlist.provenance;
    let mut out = String::new();
    let _ = writeln!(out, "* anyon lattice circuit, {}x{} nodes", netlist.n, netlist.n);
    let _ = writeln!(
        out,
        "* mode={} f_ref={} paper_replica={} c_j={:e} l={:e} aux_nodes={}",
        netlist.mode,
        netlist.f_ref.map_or("none".to_string(), |f| format!("{f:.3}")),
        netlist.paper_replica,
        netlist.c_j,
        netlist.l,
        netlist.aux_nodes
    );
    let _ = writeln!(
        out,
        "* params: n_sites={} j={:.3} u={:.3} p={:.3} theta={:.3} corner_shift={} pairing={}",
        p.n_sites,
        p.j,
        p.u,
        p.p,
        p.theta,
        p.corner_shift,
        serde_json::to_value(p.pairing).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default()
    );
    let _ = writeln!(out, "* params_json: {}", serde_json::to_string(p).expect("params serialize"));
    let mut elements = netlist.elements.clone();
    elements.sort_by(element_order);
    for (k, e) in elements.iter().enumerate() {
        let name = format!("{}{}", kind_prefix(e.kind), k + 1);
        let mut attrs = format!("label={}", e.label);
        let value = match e.kind {
            ElementKind::NicLink => {
                let d = e.direction.unwrap_or(1);
                let r = f64::from(d) * e.value;
                if e.b == Node::Ground {
                    let _ = writeln!(out, "* NIC one-port: {} sees {r:e} ohm to ground", e.a);
                } else {
                    let _ = writeln!(out, "* NIC: {} sees {r:e} ohm, {} sees {:e} ohm", e.a, e.b, -r);
                }
                let _ = writeln!(out, "*   INIC with R1 = R2 and series R = {:e} ohm (Z_in = -R*R1/R2)", e.value);
                r
            }
            _ => e.value,
        };
        if let Some(q) = e.q {
            let _ = write!(attrs, " q={q:e}");
        }
        if let Some(c) = e.coeff {
            let _ = write!(attrs, " re={:e} im={:e}", c.re, c.im);
        }
        let _ = writeln!(out, "{name} {} {} {value:e} ; {attrs}", e.a, e.b);
    }
    out.push_str(".end\n");
    out
}

/// Reads back the element cards written by [`export_spice`].
pub fn parse_spice(text: &str) -> Result<Vec<CircuitElement>, CircuitError> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('*') || line.starts_with('.') {
            continue;
        }
        let err = |reason: String| CircuitError::Parse { line: idx + 1, reason };
        let (card, attrs) = line.split_once(';').unwrap_or((line, ""));
        let fields: Vec<&str> = card.split_whitespace().collect();
        if fields.len() != 4 {
            return Err(err(format!("expected 4 fields, got {}", fields.len())));
        }
        let name = fields[0].to_ascii_uppercase();
        let kind = if name.starts_with("RN") {
            ElementKind::NicLink
        } else if name.starts_with("YC") {
            ElementKind::ComplexLink
        } else if name.starts_with("YG") {
            ElementKind::GroundBranch
        } else if name.starts_with('R') {
            ElementKind::Resistor
        } else if name.starts_with('C') {
            ElementKind::Capacitor
        } else if name.starts_with('L') {
            ElementKind::Inductor
        } else {
            return Err(err(format!("unknown card `{}`", fields[0])));
        };
        let a: Node = fields[1].parse().map_err(err)?;
        let b: Node = fields[2].parse().map_err(err)?;
        let value: f64 = fields[3].parse().map_err(|_| err(format!("bad value `{}`", fields[3])))?;
        let mut e = CircuitElement::new(kind, a, b, value, "");
        if kind == ElementKind::NicLink {
            e.direction = Some(if value < 0.0 { -1 } else { 1 });
            e.value = value.abs();
        }
        let (mut re, mut im) = (None, None);
        for kv in attrs.split_whitespace() {
            let (k, v) = kv.split_once('=').ok_or_else(|| err(format!("bad attribute `{kv}`")))?;
            let num = || v.parse::<f64>().map_err(|_| err(format!("bad number in `{kv}`")));
            match k {
                "label" => e.label = v.to_string(),
                "q" => e.q = Some(num()?),
                "re" => re = Some(num()?),
                "im" => im = Some(num()?),
                _ => return Err(err(format!("unknown attribute `{k}`"))),
            }
        }
        if let (Some(re), Some(im)) = (re, im) {
            e.coeff = Some(C64::new(re, im));
        }
        out.push(e);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn params(n: usize, theta: f64) -> ModelParams {
        ModelParams { n_sites: n, theta, corner_shift: true, ..Default::default() }
    }

    #[test]
    fn node_classes() {
        assert_eq!(node_class(1, 1, 15), 1);
        assert_eq!(node_class(2, 1, 15), 2);
        assert_eq!(node_class(1, 2, 15), 3);
        assert_eq!(node_class(4, 4, 15), 4);
        assert_eq!(node_class(5, 4, 15), 5);
        assert_eq!(node_class(4, 5, 15), 6);
        assert_eq!(node_class(7, 7, 15), 7);
        assert_eq!(node_class(15, 15, 15), 8);
        assert_eq!(node_class(6, 1, 15), 9);
        assert_eq!(node_class(15, 1, 15), 10);
        assert_eq!(node_class(1, 15, 15), 10);
        assert_eq!(node_class(5, 2, 15), 11);
        assert_eq!(node_class(1, 6, 15), 9);
    }

    #[test]
    fn published_element_values() {
        let v = element_values(&params(15, PI), 1e-6).unwrap();
        assert_relative_eq!(v.c_p, 0.75e-6, max_relative = 1e-12);
        assert_relative_eq!(v.c_u, 2.25e-6, max_relative = 1e-12);
        assert_relative_eq!(v.c_u_corner, 2.9166666666666665e-6, max_relative = 1e-12);
        assert_relative_eq!(v.c_g, 4e-6, max_relative = 1e-12);
        let e = element_values(&ModelParams { p: 0.5, ..Default::default() }, 1e-6).unwrap_err();
        assert_eq!(e, CircuitError::UnsupportedSign(0.5));
    }

    #[test]
    fn nic_formula() {
        assert_eq!(nic_input_impedance(15.8, 1.0, 1.0).inverting, -15.8);
        assert_eq!(nic_input_impedance(10.0, 2.0, 1.0).inverting, -20.0);
        assert_eq!(nic_input_impedance(10.0, 2.0, 1.0).opposite, 10.0);
    }

    #[test]
    fn theta_zero_has_only_capacitors_and_inductors() {
        let net = synthesize_netlist(&params(4, 0.0), &CircuitConfig::default()).unwrap();
        assert_eq!(net.count(ElementKind::Inductor), 16);
        assert_eq!(net.count(ElementKind::Resistor) + net.count(ElementKind::NicLink), 0);
        assert!(net.elements.iter().all(|e| e.label != "C_g" && e.label != "Z_g"));
        assert!(net.is_reciprocal());
    }

    #[test]
    fn physical_link_values() {
        let cfg = CircuitConfig { mode: SynthesisMode::Physical, f_ref: Some(11.54e3), ..Default::default() };
        let net = synthesize_netlist(&params(4, PI), &cfg).unwrap();
        let lj = net.elements.iter().find(|e| e.label == "Z").unwrap();
        assert_eq!(lj.kind, ElementKind::Inductor);
        assert_relative_eq!(lj.value, 190.2e-6, max_relative = 1e-3);

        let cfg = CircuitConfig { f_ref: Some(11.97e3), ..cfg };
        let net = synthesize_netlist(&params(4, 1.0), &cfg).unwrap();
        let r = net.elements.iter().find(|e| e.kind == ElementKind::NicLink && e.label == "Z").unwrap();
        assert_relative_eq!(r.value, 15.8, max_relative = 1e-3);
        let c = net.elements.iter().find(|e| e.kind == ElementKind::Capacitor && e.label == "Z").unwrap();
        assert_relative_eq!(c.value, 1.0f64.cos() * 1e-6, max_relative = 1e-12);
    }

    #[test]
    fn replica_substitutes_published_values() {
        let cfg = CircuitConfig {
            mode: SynthesisMode::Physical,
            f_ref: Some(11.5e3),
            paper_replica: true,
            ..Default::default()
        };
        let net = synthesize_netlist(&params(5, 1.0), &cfg).unwrap();
        let has = |label: &str, kind, v: f64| {
            net.elements.iter().any(|e| e.label == label && e.kind == kind && (e.value - v).abs() < 1e-15)
        };
        assert!(has("Z", ElementKind::Capacitor, 0.48e-6));
        assert!(has("Z", ElementKind::NicLink, 15.8));
        assert!(has("C_g", ElementKind::Capacitor, 1e-6));
        assert!(has("Z_g", ElementKind::Resistor, 11.77));
        assert!(has("Z_g", ElementKind::NicLink, 11.77));
        assert!(net.elements.iter().any(|e| e.label == "Z_g" && (e.value - 2e-6).abs() < 1e-15));
    }

    #[test]
    fn spice_round_trip_and_header() {
        let cfg = CircuitConfig { mode: SynthesisMode::Physical, f_ref: Some(11.5e3), ..Default::default() };
        for net in [
            synthesize_netlist(&params(4, 1.0), &cfg).unwrap(),
            synthesize_netlist(&params(4, 1.0), &CircuitConfig::default()).unwrap(),
        ] {
            let text = export_spice(&net);
            assert!(text.contains("theta=1.000"));
            let mut back = parse_spice(&text).unwrap();
            back.sort_by(element_order);
            assert_eq!(back, net.elements);
        }
    }

    #[test]
    fn spice_two_site_counts() {
        let net = synthesize_netlist(&params(2, 0.0), &CircuitConfig::default()).unwrap();
        let text = export_spice(&net);
        let l_lines = text.lines().filter(|l| l.starts_with('L') && l.contains(" 0 ")).count();
        assert_eq!(l_lines, 4);
        assert!(!text.lines().any(|l| l.starts_with('R')));
    }

    #[test]
    fn node_names() {
        for n in [Node::Ground, Node::Site(Site::new(3, 12)), Node::Aux(7)] {
            assert_eq!(n.to_string().parse::<Node>().unwrap(), n);
        }
        assert!("n_0_1".parse::<Node>().is_err());
        assert!("q".parse::<Node>().is_err());
    }

    #[test]
    fn netlist_json_round_trip() {
        let net = synthesize_netlist(&params(3, 0.5), &CircuitConfig::default()).unwrap();
        assert_eq!(Netlist::from_json(&net.to_json()).unwrap(), net);
    }

    #[test]
    fn epsilon_frequency_map() {
        let f0 = f0(23.21e-6, 1e-6);
        assert_relative_eq!(f0, 33035.0, max_relative = 1e-4);
        let f = f_of_epsilon(4.2, f0).unwrap();
        assert_relative_eq!(epsilon_of_f(f, f0), 4.2, max_relative = 1e-12);
        assert!(f_of_epsilon(-4.5, f0).is_none());
    }
}
