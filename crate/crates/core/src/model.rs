//! The system specification: transition matrix `P` on the lifted alphabet,
//! initial vector `χ`, contraction ratios, optional geometry and the order `r`.
//! Also the assumption checks and the built-in example systems.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::geometry::{self, GeometrySpec};
use crate::symbolic::{OverlapCell, Side, TransitionGraph};

pub type Q = BigRational;

pub const DEFAULT_RATIO: f64 = 0.25;
pub const DEFAULT_R: f64 = 2.0;
const TOL: f64 = 1e-12;

pub const FIXTURE_NAMES: [&str; 7] = ["eg1-default", "eg1-balanced", "eg2-P1", "eg2-P2", "eg3", "eg5", "g1-cyclic"];

/// Parse `"a/b"`, `"a"` or a decimal literal such as `"0.125"` into an exact rational.
pub fn parse_rational(s: &str) -> Result<Q> {
    let s = s.trim();
    let bad = || Error::Config(format!("cannot parse {s:?} as a rational"));
    if let Some((a, b)) = s.split_once('/') {
        let a: BigInt = a.trim().parse().map_err(|_| bad())?;
        let b: BigInt = b.trim().parse().map_err(|_| bad())?;
        if b.is_zero() {
            return Err(bad());
        }
        return Ok(Q::new(a, b));
    }
    if let Some((int, frac)) = s.split_once('.') {
        let neg = int.starts_with('-');
        let digits = format!("{}{}", int.trim_start_matches('-'), frac);
        let mut num: BigInt = digits.parse().map_err(|_| bad())?;
        if neg {
            num = -num;
        }
        let den = num_traits::pow(BigInt::from(10), frac.len());
        return Ok(Q::new(num, den));
    }
    let a: BigInt = s.parse().map_err(|_| bad())?;
    Ok(Q::from_integer(a))
}

pub fn q_to_f64(x: &Q) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

fn qs(entries: &[&str]) -> Vec<Q> {
    entries.iter().map(|s| parse_rational(s).expect("fixture literal")).collect()
}

/// Full model of a graph-directed system with complete overlaps.
#[derive(Debug, Clone)]
pub struct SystemSpec {
    n_base: usize,
    p: Vec<f64>,
    p_exact: Option<Vec<Q>>,
    chi: Vec<f64>,
    chi_exact: Option<Vec<Q>>,
    ratios: Vec<f64>,
    geometry: Option<GeometrySpec>,
    r: f64,
    graph: TransitionGraph,
}

/// Probability entries, either exact or floating point.
#[derive(Debug, Clone)]
pub enum Probs {
    Exact(Vec<Q>),
    Float(Vec<f64>),
}

impl Probs {
    fn into_parts(self) -> (Vec<f64>, Option<Vec<Q>>) {
        match self {
            Probs::Exact(v) => (v.iter().map(q_to_f64).collect(), Some(v)),
            Probs::Float(v) => (v, None),
        }
    }
}

impl SystemSpec {
    /// `ratios` is row-major `N x N`; entries of cells with empty `M_{i,j}` must be 0.
    pub fn new(n_base: usize, p: Probs, chi: Probs, ratios: Vec<f64>, r: f64) -> Result<Self> {
        let size = 2 * n_base;
        let (p, p_exact) = p.into_parts();
        let (chi, chi_exact) = chi.into_parts();
        if p.len() != size * size {
            return Err(Error::InvalidSpec(format!("P must be {size}x{size}")));
        }
        if chi.len() != size {
            return Err(Error::InvalidSpec(format!("chi must have length {size}")));
        }
        if ratios.len() != n_base * n_base {
            return Err(Error::InvalidSpec(format!("ratios must cover {n_base}x{n_base} cells")));
        }
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::InvalidSpec(format!("order r must be positive, got {r}")));
        }
        if let Some(x) = p.iter().find(|x| !(x.is_finite() && **x >= 0.0)) {
            return Err(Error::InvalidSpec(format!("P has invalid entry {x}")));
        }
        for a in 0..size {
            let row_ok = match &p_exact {
                Some(pe) => pe[a * size..(a + 1) * size].iter().sum::<Q>() == Q::one(),
                None => (p[a * size..(a + 1) * size].iter().sum::<f64>() - 1.0).abs() <= TOL,
            };
            if !row_ok {
                return Err(Error::InvalidSpec(format!("row {} of P does not sum to 1", a + 1)));
            }
        }
        if let Some(i) = chi.iter().position(|&x| !(x > 0.0)) {
            return Err(Error::InvalidSpec(format!("chi_{} must be positive", i + 1)));
        }
        let chi_ok = match &chi_exact {
            Some(ce) => ce.iter().sum::<Q>() == Q::one(),
            None => (chi.iter().sum::<f64>() - 1.0).abs() <= TOL,
        };
        if !chi_ok {
            return Err(Error::InvalidSpec("chi does not sum to 1".into()));
        }
        let graph = TransitionGraph::from_weights(n_base, &p)?;
        for i in 0..n_base {
            for j in 0..n_base {
                let s = ratios[i * n_base + j];
                if graph.cell_nonempty(i, j) {
                    if !(s > 0.0 && s < 1.0) {
                        return Err(Error::InvalidSpec(format!(
                            "ratio of cell ({},{}) must lie in (0,1), got {s}",
                            i + 1,
                            j + 1
                        )));
                    }
                } else if s != 0.0 {
                    return Err(Error::InvalidSpec(format!(
                        "cell ({},{}) has no realized edge but a ratio was given",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        Ok(Self { n_base, p, p_exact, chi, chi_exact, ratios, geometry: None, r, graph })
    }

    pub fn n_base(&self) -> usize {
        self.n_base
    }

    pub fn size(&self) -> usize {
        2 * self.n_base
    }

    pub fn graph(&self) -> &TransitionGraph {
        &self.graph
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    #[inline]
    pub fn p(&self, a: usize, b: usize) -> f64 {
        self.p[a * self.size() + b]
    }

    pub fn p_exact(&self, a: usize, b: usize) -> Option<&Q> {
        self.p_exact.as_ref().map(|v| &v[a * self.size() + b])
    }

    pub fn is_exact(&self) -> bool {
        self.p_exact.is_some() && self.chi_exact.is_some()
    }

    pub fn p_matrix(&self) -> &[f64] {
        &self.p
    }

    #[inline]
    pub fn chi(&self, a: usize) -> f64 {
        self.chi[a]
    }

    pub fn chi_vec(&self) -> &[f64] {
        &self.chi
    }

    pub fn chi_exact(&self, a: usize) -> Option<&Q> {
        self.chi_exact.as_ref().map(|v| &v[a])
    }

    /// Ratio `s_{i,j}` of the cell containing the base pair `(i, j)`; 0 if the cell is empty.
    #[inline]
    pub fn ratio(&self, i: usize, j: usize) -> f64 {
        self.ratios[i * self.n_base + j]
    }

    /// Ratio of a lifted edge.
    #[inline]
    pub fn lifted_ratio(&self, a: usize, b: usize) -> f64 {
        self.ratio(a % self.n_base, b % self.n_base)
    }

    pub fn ratios(&self) -> &[f64] {
        &self.ratios
    }

    pub fn geometry(&self) -> Option<&GeometrySpec> {
        self.geometry.as_ref()
    }

    pub fn cell(&self, i: usize, j: usize) -> OverlapCell {
        self.graph.cell(i, j)
    }

    /// Base pairs of `S_2`, row-major.
    pub fn s2_cells(&self) -> Vec<(usize, usize)> {
        let n = self.n_base;
        (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .filter(|&(i, j)| self.graph.cell_nonempty(i, j))
            .collect()
    }

    pub fn with_r(mut self, r: f64) -> Result<Self> {
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::InvalidSpec(format!("order r must be positive, got {r}")));
        }
        self.r = r;
        Ok(self)
    }

    pub fn with_chi(self, chi: Probs) -> Result<Self> {
        let ratios = self.ratios.clone();
        let p = match self.p_exact {
            Some(ref pe) => Probs::Exact(pe.clone()),
            None => Probs::Float(self.p.clone()),
        };
        let mut out = Self::new(self.n_base, p, chi, ratios, self.r)?;
        out.geometry = self.geometry;
        Ok(out)
    }

    /// Same ratio on every cell of `S_2`; replaces any geometry by the default layout.
    pub fn with_uniform_ratio(mut self, c: f64) -> Result<Self> {
        if !(c > 0.0 && c < 1.0) {
            return Err(Error::InvalidSpec(format!("ratio must lie in (0,1), got {c}")));
        }
        for (i, j) in self.s2_cells() {
            self.ratios[i * self.n_base + j] = c;
        }
        self.geometry = None;
        self.attach_default_geometry()
    }

    pub fn with_geometry(mut self, g: GeometrySpec) -> Result<Self> {
        g.check_against(&self)?;
        self.geometry = Some(g);
        Ok(self)
    }

    /// Attach the 1-dimensional corner layout if it satisfies strong separation.
    /// Systems whose ratios are too large for it are left without geometry.
    pub fn attach_default_geometry(mut self) -> Result<Self> {
        if let Ok(g) = geometry::corner_layout(&self, 1) {
            if geometry::validate_geometry(&g).is_ok() {
                self.geometry = Some(g);
            }
        }
        Ok(self)
    }

    /// Exact equality of two sums of `P` entries; floating comparison with
    /// tolerance 1e-12 when the matrix was not given exactly.
    pub fn sums_equal(&self, lhs: &[(usize, usize)], rhs: &[(usize, usize)]) -> bool {
        match &self.p_exact {
            Some(_) => {
                let s = |v: &[(usize, usize)]| -> Q {
                    v.iter().map(|&(a, b)| self.p_exact(a, b).unwrap().clone()).sum()
                };
                s(lhs) == s(rhs)
            }
            None => {
                let s = |v: &[(usize, usize)]| -> f64 { v.iter().map(|&(a, b)| self.p(a, b)).sum() };
                (s(lhs) - s(rhs)).abs() <= TOL
            }
        }
    }

    pub fn chi_equal(&self, a: usize, b: usize) -> bool {
        match &self.chi_exact {
            Some(c) => c[a] == c[b],
            None => (self.chi[a] - self.chi[b]).abs() <= TOL,
        }
    }

    /// `N x N` sub-block of `P`: rows from the `row_side` copy, columns from the `col_side` copy.
    pub fn block(&self, row_side: Side, col_side: Side) -> Vec<f64> {
        let n = self.n_base;
        let mut out = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                out.push(self.p(self.graph.lift(i, row_side), self.graph.lift(j, col_side)));
            }
        }
        out
    }
}

/// A concrete violation of an assumption, in 1-based notation when displayed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Witness {
    /// Base cell `(i, j)`.
    Cell(usize, usize),
    /// Lifted pair `(a, b)` of `Ω`.
    Lifted(usize, usize),
    /// Base letter `i`.
    Letter(usize),
    /// Row of the lower (`P_1`) or upper (`P_2`) block with too small support.
    Row(Side, usize),
    /// `to` is unreachable from `from` in the named block.
    Unreachable { block: &'static str, from: usize, to: usize },
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Witness::Cell(i, j) => write!(f, "cell ({},{})", i + 1, j + 1),
            Witness::Lifted(a, b) => write!(f, "edge ({},{})", a + 1, b + 1),
            Witness::Letter(i) => write!(f, "i={}", i + 1),
            Witness::Row(Side::Lower, i) => write!(f, "row {} of P1", i + 1),
            Witness::Row(Side::Upper, i) => write!(f, "row {} of P2", i + 1),
            Witness::Unreachable { block, from, to } => {
                write!(f, "{block}: {} does not reach {}", from + 1, to + 1)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Flag {
    pub name: &'static str,
    pub pass: bool,
    /// All violations found, in row-major order; empty iff `pass`.
    pub witnesses: Vec<Witness>,
}

impl Flag {
    fn from_witnesses(name: &'static str, witnesses: Vec<Witness>) -> Self {
        Self { name, pass: witnesses.is_empty(), witnesses }
    }

    pub fn first_witness(&self) -> Option<&Witness> {
        self.witnesses.first()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Case {
    /// `P` reducible: (A1), (A2), (A3).
    CaseI,
    /// `P` irreducible: (A2), (A4), (A5).
    CaseII,
    Other,
}

impl fmt::Display for Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Case::CaseI => "CaseI",
            Case::CaseII => "CaseII",
            Case::Other => "Other",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegimeReport {
    pub a1: Flag,
    pub a2: Flag,
    pub a3: Flag,
    pub a4: Flag,
    pub a5: Flag,
    pub g1: Flag,
    pub g2: Flag,
    pub b1: Flag,
    pub b2: Flag,
    pub p_irreducible: Flag,
    pub case: Case,
    pub complete_overlaps: bool,
}

impl RegimeReport {
    pub fn flags(&self) -> [&Flag; 10] {
        [
            &self.a1,
            &self.a2,
            &self.a3,
            &self.a4,
            &self.a5,
            &self.g1,
            &self.g2,
            &self.b1,
            &self.b2,
            &self.p_irreducible,
        ]
    }
}

/// First unreachable pair of a square 0/1 pattern, by transitive closure.
pub fn unreachable_pair(n: usize, edge: impl Fn(usize, usize) -> bool) -> Option<(usize, usize)> {
    let mut reach = vec![false; n * n];
    for a in 0..n {
        for b in 0..n {
            reach[a * n + b] = a == b || edge(a, b);
        }
    }
    for k in 0..n {
        for a in 0..n {
            if reach[a * n + k] {
                for b in 0..n {
                    if reach[k * n + b] {
                        reach[a * n + b] = true;
                    }
                }
            }
        }
    }
    (0..n)
        .flat_map(|a| (0..n).map(move |b| (a, b)))
        .find(|&(a, b)| !reach[a * n + b])
}

/// Decide every assumption flag by finite exact checks.
pub fn validate(spec: &SystemSpec) -> RegimeReport {
    let n = spec.n_base();
    let g = spec.graph();
    let up = |i: usize| i + n;

    let irreducible = |block: &'static str, off_r: usize, off_c: usize| -> Vec<Witness> {
        unreachable_pair(n, |a, b| g.has_edge(a + off_r, b + off_c))
            .map(|(from, to)| vec![Witness::Unreachable { block, from, to }])
            .unwrap_or_default()
    };

    let p1_irr = irreducible("P1", 0, 0);
    let p2_irr = irreducible("P2", n, n);
    let mut a1 = p1_irr.clone();
    a1.extend(p2_irr);
    for i in 0..n {
        for j in 0..n {
            if g.has_edge(up(i), j) {
                a1.push(Witness::Lifted(up(i), j));
            }
        }
    }

    let mut a2 = Vec::new();
    for i in 0..n {
        if (0..n).filter(|&j| g.has_edge(i, j)).count() < 2 {
            a2.push(Witness::Row(Side::Lower, i));
        }
        if (0..n).filter(|&j| g.has_edge(up(i), up(j))).count() < 2 {
            a2.push(Witness::Row(Side::Upper, i));
        }
    }

    let triple = [(Side::Lower, Side::Lower), (Side::Lower, Side::Upper), (Side::Upper, Side::Upper)];
    let mut a3 = Vec::new();
    let mut a4 = Vec::new();
    for cell in crate::symbolic::overlap_cells(g) {
        if cell.is_empty() {
            continue;
        }
        let (i, j) = cell.pair;
        if cell.members.as_slice() != triple {
            a3.push(Witness::Cell(i, j));
        }
        if cell.members.len() != 4 {
            a4.push(Witness::Cell(i, j));
        }
    }

    let pn = 2 * n;
    let p_irr = unreachable_pair(pn, |a, b| g.has_edge(a, b))
        .map(|(from, to)| vec![Witness::Unreachable { block: "P", from, to }])
        .unwrap_or_default();

    let mut g1 = Vec::new();
    let mut g2 = Vec::new();
    for (i, j) in spec.s2_cells() {
        if !spec.sums_equal(&[(i, j), (i, up(j))], &[(up(i), j), (up(i), up(j))]) {
            g1.push(Witness::Cell(i, j));
        }
        if !spec.sums_equal(&[(i, j), (up(i), j)], &[(i, up(j)), (up(i), up(j))]) {
            g2.push(Witness::Cell(i, j));
        }
    }

    let b1 = (0..n).filter(|&i| !spec.chi_equal(i, up(i))).map(Witness::Letter).collect();
    let b2 = (0..n)
        .filter(|&i| {
            !(0..n).any(|l| !spec.sums_equal(&[(l, i), (up(l), i)], &[(l, up(i)), (up(l), up(i))]))
        })
        .map(Witness::Letter)
        .collect();

    let a1 = Flag::from_witnesses("A1", a1);
    let a2 = Flag::from_witnesses("A2", a2);
    let a3 = Flag::from_witnesses("A3", a3);
    let a4 = Flag::from_witnesses("A4", a4);
    let a5 = Flag::from_witnesses("A5", p1_irr);
    let p_irreducible = Flag::from_witnesses("P-irreducible", p_irr);
    let case = if a1.pass && a2.pass && a3.pass {
        Case::CaseI
    } else if a2.pass && a4.pass && a5.pass && p_irreducible.pass {
        Case::CaseII
    } else {
        Case::Other
    };
    RegimeReport {
        a1,
        a2,
        a3,
        a4,
        a5,
        g1: Flag::from_witnesses("g1", g1),
        g2: Flag::from_witnesses("g2", g2),
        b1: Flag::from_witnesses("b1", b1),
        b2: Flag::from_witnesses("b2", b2),
        p_irreducible,
        case,
        complete_overlaps: crate::symbolic::has_complete_overlaps(g),
    }
}

fn condensation_entries<T: Clone + Zero + std::ops::Mul<Output = T>>(q: &[T], t: &[T]) -> (Vec<T>, Vec<T>) {
    let n = t.len();
    let size = 2 * n;
    let mut p = vec![T::zero(); size * size];
    for i in 0..n {
        for j in 0..n {
            p[i * size + j] = q[j + 1].clone();
            p[i * size + n + j] = q[0].clone() * t[j].clone();
            p[(n + i) * size + n + j] = t[j].clone();
        }
    }
    let mut chi: Vec<T> = q[1..].to_vec();
    chi.extend(t.iter().map(|x| q[0].clone() * x.clone()));
    (p, chi)
}

fn check_condensation_input(q_len: usize, t_len: usize, f_len: usize) -> Result<()> {
    if t_len < 2 || q_len != t_len + 1 || f_len != t_len {
        return Err(Error::InvalidSpec(format!(
            "need q of length N+1, t and ratios of length N (N >= 2); got {q_len}, {t_len}, {f_len}"
        )));
    }
    Ok(())
}

/// The reducible system whose projected measure is the in-homogeneous
/// self-similar measure `μ = q_0 ν_0 + Σ q_i μ∘f_i⁻¹`. `f_ratios[i]` is the
/// ratio of `f_i`; every cell of row `i` uses it.
pub fn build_condensation(q: &[f64], t: &[f64], f_ratios: &[f64], r: f64) -> Result<SystemSpec> {
    check_condensation_input(q.len(), t.len(), f_ratios.len())?;
    if q.iter().chain(t).any(|&x| !(x > 0.0)) {
        return Err(Error::InvalidSpec("q and t must be positive".into()));
    }
    let (p, chi) = condensation_entries(q, t);
    finish_condensation(t.len(), Probs::Float(p), Probs::Float(chi), f_ratios, r)
}

pub fn build_condensation_exact(q: &[Q], t: &[Q], f_ratios: &[f64], r: f64) -> Result<SystemSpec> {
    check_condensation_input(q.len(), t.len(), f_ratios.len())?;
    if q.iter().chain(t).any(|x| *x <= Q::zero()) {
        return Err(Error::InvalidSpec("q and t must be positive".into()));
    }
    let (p, chi) = condensation_entries(q, t);
    finish_condensation(t.len(), Probs::Exact(p), Probs::Exact(chi), f_ratios, r)
}

fn finish_condensation(n: usize, p: Probs, chi: Probs, f_ratios: &[f64], r: f64) -> Result<SystemSpec> {
    let ratios = (0..n).flat_map(|i| std::iter::repeat_n(f_ratios[i], n)).collect();
    SystemSpec::new(n, p, chi, ratios, r)?.attach_default_geometry()
}

fn fixture_matrix(name: &str) -> Option<(usize, Vec<Q>, Option<Vec<Q>>)> {
    let sixth = "1/6";
    let uniform6 = || qs(&[sixth; 6]);
    match name {
        "eg2-P1" => Some((
            3,
            qs(&[
                "1/3", "1/3", "0", "1/3", "0", "0", //
                "0", "1/3", "1/3", "0", "0", "1/3", //
                "1/3", "0", "2/3", "0", "0", "0", //
                "0", "0", "0", "1/3", "0", "2/3", //
                "0", "0", "0", "0", "1/3", "2/3", //
                "0", "0", "0", "1/3", "1/3", "1/3",
            ]),
            Some(uniform6()),
        )),
        "eg2-P2" => Some((
            3,
            qs(&[
                "1/3", "1/3", "0", "1/3", "0", "0", //
                "0", "1/3", "1/3", "0", "0", "1/3", //
                "1/3", "0", "2/3", "0", "0", "0", //
                "0", "0", "0", "1/3", "0", "2/3", //
                "1/3", "0", "0", "0", "1/3", "1/3", //
                "0", "0", "0", "1/3", "1/3", "1/3",
            ]),
            Some(uniform6()),
        )),
        "eg3" => Some((
            3,
            qs(&[
                "1/6", "1/3", "0", "1/6", "1/3", "0", //
                "0", "1/6", "1/3", "0", "1/6", "1/3", //
                "1/3", "0", "1/6", "1/3", "0", "1/6", //
                "1/3", "1/6", "0", "1/3", "1/6", "0", //
                "0", "1/3", "1/6", "0", "1/3", "1/6", //
                "1/3", "0", "1/6", "1/3", "0", "1/6",
            ]),
            Some(qs(&["1/6", "1/9", "1/6", "1/6", "2/9", "1/6"])),
        )),
        "g1-cyclic" => Some((
            3,
            qs(&[
                "1/6", "1/4", "0", "1/3", "1/4", "0", //
                "0", "1/6", "1/4", "0", "1/3", "1/4", //
                "1/4", "0", "1/6", "1/4", "0", "1/3", //
                "1/4", "1/3", "0", "1/4", "1/6", "0", //
                "0", "1/4", "1/3", "0", "1/4", "1/6", //
                "1/3", "0", "1/4", "1/6", "0", "1/4",
            ]),
            Some(qs(&["1/6", "1/9", "1/6", "1/6", "2/9", "1/6"])),
        )),
        "eg5" => Some((
            3,
            qs(&[
                "1/6", "1/6", "0", "1/3", "1/3", "0", //
                "0", "1/6", "1/6", "0", "1/3", "1/3", //
                "1/6", "0", "1/6", "1/3", "0", "1/3", //
                "1/4", "1/4", "0", "1/8", "3/8", "0", //
                "0", "1/4", "1/4", "0", "1/4", "1/4", //
                "1/4", "0", "1/4", "1/4", "0", "1/4",
            ]),
            None,
        )),
        _ => None,
    }
}

/// Parameters of `eg1-default`: `q = (q_0, q_1, q_2)` and `t = (t_1, t_2)`.
pub fn eg1_default_params() -> (Vec<Q>, Vec<Q>) {
    (qs(&["1/5", "2/5", "2/5"]), qs(&["9/10", "1/10"]))
}

/// Condensation system with `t` as given and `q_1 = … = q_N` chosen so that
/// both diagonal blocks have the same dimension root: with `u` solving
/// `Σ_j (t_j c^r)^u = 1`, `q_j` is the power mean `(Σ_j t_j^u / N)^{1/u}`.
pub fn balanced_condensation(t: &[f64], ratio: f64, r: f64) -> Result<SystemSpec> {
    let n = t.len();
    let cr = ratio.powf(r);
    let f = |u: f64| t.iter().map(|&x| (x * cr).powf(u)).sum::<f64>() - 1.0;
    let (mut lo, mut hi) = (0.0, 1.0);
    if !(f(hi) < 0.0) {
        return Err(Error::InvalidSpec("t must sum to 1 with positive entries".into()));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let u = 0.5 * (lo + hi);
    let qj = (t.iter().map(|&x| x.powf(u)).sum::<f64>() / n as f64).powf(1.0 / u);
    let q0 = 1.0 - n as f64 * qj;
    if !(q0 > 0.0) {
        return Err(Error::InvalidSpec("uniform t leaves no mass for q_0".into()));
    }
    let mut q = vec![q0];
    q.extend(std::iter::repeat_n(qj, n));
    build_condensation(&q, t, &vec![ratio; n], r)
}

/// Default `χ` for `eg5`: uniform, so `χ_i = χ_{i⁺}` for every `i`.
pub fn eg5_default_chi() -> Vec<Q> {
    qs(&["1/6"; 6])
}

/// Built-in example system with every cell ratio equal to `ratio`.
pub fn load_fixture_with(name: &str, ratio: f64, r: f64) -> Result<SystemSpec> {
    if name == "eg1-balanced" {
        return balanced_condensation(&[0.9, 0.1], ratio, r);
    }
    if name == "eg1-default" {
        let (q, t) = eg1_default_params();
        return build_condensation_exact(&q, &t, &vec![ratio; t.len()], r);
    }
    let (n, p, chi) = fixture_matrix(name).ok_or_else(|| Error::UnknownFixture(name.into()))?;
    let chi = chi.unwrap_or_else(eg5_default_chi);
    let graph = TransitionGraph::from_weights(n, &p.iter().map(q_to_f64).collect::<Vec<_>>())?;
    let ratios = (0..n * n)
        .map(|k| if graph.cell_nonempty(k / n, k % n) { ratio } else { 0.0 })
        .collect();
    SystemSpec::new(n, Probs::Exact(p), Probs::Exact(chi), ratios, r)?.attach_default_geometry()
}

pub fn load_fixture(name: &str) -> Result<SystemSpec> {
    load_fixture_with(name, DEFAULT_RATIO, DEFAULT_R)
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum NumOrStr {
    Num(serde_json::Number),
    Str(String),
}

impl NumOrStr {
    fn to_q(&self) -> Option<Q> {
        match self {
            NumOrStr::Str(s) => parse_rational(s).ok(),
            NumOrStr::Num(n) => n.as_i64().map(|v| Q::from_integer(v.into())),
        }
    }

    fn to_f64(&self) -> Result<f64> {
        match self {
            NumOrStr::Str(s) => Ok(q_to_f64(&parse_rational(s)?)),
            NumOrStr::Num(n) => n.as_f64().ok_or_else(|| Error::Config(format!("bad number {n}"))),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigDoc {
    #[serde(rename = "N")]
    n: usize,
    #[serde(rename = "P")]
    p: Vec<Vec<NumOrStr>>,
    chi: Vec<NumOrStr>,
    #[serde(default)]
    ratios: Option<BTreeMap<String, f64>>,
    #[serde(default)]
    geometry: Option<serde_json::Value>,
    #[serde(default)]
    r: Option<f64>,
}

fn to_probs(entries: &[&NumOrStr]) -> Result<Probs> {
    let exact: Option<Vec<Q>> = entries.iter().map(|e| e.to_q()).collect();
    Ok(match exact {
        Some(v) => Probs::Exact(v),
        None => Probs::Float(entries.iter().map(|e| e.to_f64()).collect::<Result<_>>()?),
    })
}

/// Parse a `"i,j"` key (1-based) into a 0-based base cell.
pub fn parse_cell_key(key: &str, n: usize) -> Result<(usize, usize)> {
    let bad = || Error::Config(format!("bad cell key {key:?} (expected \"i,j\" with 1 <= i,j <= {n})"));
    let (a, b) = key.split_once(',').ok_or_else(bad)?;
    let i: usize = a.trim().parse().map_err(|_| bad())?;
    let j: usize = b.trim().parse().map_err(|_| bad())?;
    if i == 0 || j == 0 || i > n || j > n {
        return Err(bad());
    }
    Ok((i - 1, j - 1))
}

/// Load a JSON configuration document.
pub fn from_json_str(text: &str) -> Result<SystemSpec> {
    let doc: ConfigDoc = serde_json::from_str(text)?;
    let n = doc.n;
    let size = 2 * n;
    if n == 0 || doc.p.len() != size || doc.p.iter().any(|row| row.len() != size) {
        return Err(Error::Config(format!("P must be a {size}x{size} array")));
    }
    let p_entries: Vec<&NumOrStr> = doc.p.iter().flatten().collect();
    let chi_entries: Vec<&NumOrStr> = doc.chi.iter().collect();
    let p = to_probs(&p_entries)?;
    let chi = to_probs(&chi_entries)?;
    let pf: Vec<f64> = p_entries.iter().map(|e| e.to_f64()).collect::<Result<_>>()?;
    let graph = TransitionGraph::from_weights(n, &pf)?;

    let geometry = match &doc.geometry {
        Some(v) => Some(geometry::parse_geometry_json(v, n)?),
        None => None,
    };
    let mut ratios = vec![0.0; n * n];
    match (&doc.ratios, &geometry) {
        (Some(map), _) => {
            for (key, &s) in map {
                let (i, j) = parse_cell_key(key, n)?;
                ratios[i * n + j] = s;
            }
        }
        (None, Some(g)) => {
            for i in 0..n {
                for j in 0..n {
                    if let Some(m) = g.map(i, j) {
                        ratios[i * n + j] = m.ratio();
                    }
                }
            }
        }
        (None, None) => return Err(Error::Config("either `ratios` or `geometry` is required".into())),
    }
    for i in 0..n {
        for j in 0..n {
            if graph.cell_nonempty(i, j) && ratios[i * n + j] == 0.0 {
                return Err(Error::Config(format!("missing ratio for cell \"{},{}\"", i + 1, j + 1)));
            }
        }
    }
    let spec = SystemSpec::new(n, p, chi, ratios, doc.r.unwrap_or(DEFAULT_R))?;
    match geometry {
        Some(g) => spec.with_geometry(g),
        None => spec.attach_default_geometry(),
    }
}

pub fn from_json_file(path: &Path) -> Result<SystemSpec> {
    let text = std::fs::read_to_string(path)?;
    from_json_str(&text)
}
