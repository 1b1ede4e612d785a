//! Words over the base alphabet `Ψ = {1..N}` and the lifted alphabet
//! `Ω = {1..2N}`, admissibility under the transition graph, lift sets and
//! enumeration of the admissible projected words `S_n`.
//!
//! Letters are stored 0-based: base letter `i` is `0..N`, its upper lift
//! `i⁺` is `i + N`. `Display` renders the 1-based notation.

use std::fmt;

use crate::error::{Error, Result};

/// Default cap on the number of words produced by one enumeration call.
pub const DEFAULT_WORD_CAP: usize = 10_000_000;

/// Directed graph on `Ω` with at most one edge per ordered pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransitionGraph {
    n_base: usize,
    adj: Vec<bool>,
}

impl TransitionGraph {
    pub fn new(n_base: usize, adj: Vec<bool>) -> Result<Self> {
        let size = 2 * n_base;
        if n_base == 0 || adj.len() != size * size {
            return Err(Error::InvalidSpec(format!(
                "adjacency must be {size}x{size} for N = {n_base}"
            )));
        }
        for a in 0..size {
            if !adj[a * size..(a + 1) * size].iter().any(|&e| e) {
                return Err(Error::InvalidSpec(format!(
                    "vertex {} has no outgoing edge",
                    a + 1
                )));
            }
        }
        Ok(Self { n_base, adj })
    }

    /// Graph of the positive entries of a row-major `2N x 2N` matrix.
    pub fn from_weights(n_base: usize, weights: &[f64]) -> Result<Self> {
        Self::new(n_base, weights.iter().map(|&w| w > 0.0).collect())
    }

    pub fn n_base(&self) -> usize {
        self.n_base
    }

    pub fn size(&self) -> usize {
        2 * self.n_base
    }

    #[inline]
    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adj[a * self.size() + b]
    }

    #[inline]
    pub fn lift(&self, letter: usize, side: Side) -> usize {
        match side {
            Side::Lower => letter,
            Side::Upper => letter + self.n_base,
        }
    }

    /// Set of realized lifted pairs `M_{i,j}` of the cell `(i, j)`.
    pub fn cell(&self, i: usize, j: usize) -> OverlapCell {
        let mut members = Vec::with_capacity(4);
        for su in [Side::Lower, Side::Upper] {
            for sv in [Side::Lower, Side::Upper] {
                if self.has_edge(self.lift(i, su), self.lift(j, sv)) {
                    members.push((su, sv));
                }
            }
        }
        OverlapCell { pair: (i, j), members }
    }

    /// `(i, j) ∈ S_2`, i.e. the cell has at least one realized lift.
    #[inline]
    pub fn cell_nonempty(&self, i: usize, j: usize) -> bool {
        let n = self.n_base;
        self.has_edge(i, j)
            || self.has_edge(i, j + n)
            || self.has_edge(i + n, j)
            || self.has_edge(i + n, j + n)
    }

    /// Lift endpoints reachable after appending `next` to a word whose
    /// admissible lifts end in `state` at letter `last`.
    #[inline]
    pub fn step(&self, state: EndState, last: usize, next: usize) -> EndState {
        let n = self.n_base;
        let mut bits = 0u8;
        for (bit, from) in [(EndState::LOWER, last), (EndState::UPPER, last + n)] {
            if state.0 & bit == 0 {
                continue;
            }
            if self.has_edge(from, next) {
                bits |= EndState::LOWER;
            }
            if self.has_edge(from, next + n) {
                bits |= EndState::UPPER;
            }
        }
        EndState(bits)
    }
}

/// Which copy of a base letter a lifted letter is.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Side {
    Lower,
    Upper,
}

/// Subset of `{lower, upper}` of lift endpoints reachable by admissible lifts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct EndState(pub u8);

impl EndState {
    pub const LOWER: u8 = 1;
    pub const UPPER: u8 = 2;
    pub const BOTH: EndState = EndState(3);

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn has(self, side: Side) -> bool {
        match side {
            Side::Lower => self.0 & Self::LOWER != 0,
            Side::Upper => self.0 & Self::UPPER != 0,
        }
    }
}

/// Word over `Ψ`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ProjectedWord(Vec<usize>);

/// Word over `Ω`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LiftedWord(Vec<usize>);

macro_rules! word_common {
    ($ty:ident) => {
        impl $ty {
            pub fn new(letters: Vec<usize>) -> Self {
                Self(letters)
            }

            /// Build from the 1-based notation used in documentation.
            pub fn from_one_based(letters: &[usize]) -> Self {
                Self(letters.iter().map(|&l| l - 1).collect())
            }

            pub fn letters(&self) -> &[usize] {
                &self.0
            }

            pub fn len(&self) -> usize {
                self.0.len()
            }

            pub fn is_empty(&self) -> bool {
                self.0.is_empty()
            }

            pub fn last(&self) -> usize {
                *self.0.last().expect("non-empty word")
            }

            pub fn first(&self) -> usize {
                self.0[0]
            }

            pub fn prefix(&self, h: usize) -> Self {
                Self(self.0[..h].to_vec())
            }

            /// `σ♭`: the word with its last letter removed.
            pub fn parent(&self) -> Option<Self> {
                (self.0.len() > 1).then(|| self.prefix(self.0.len() - 1))
            }

            pub fn push(&self, letter: usize) -> Self {
                let mut v = self.0.clone();
                v.push(letter);
                Self(v)
            }

            pub fn concat(&self, other: &Self) -> Self {
                let mut v = self.0.clone();
                v.extend_from_slice(&other.0);
                Self(v)
            }

            pub fn is_prefix_of(&self, other: &Self) -> bool {
                other.0.len() >= self.0.len() && other.0[..self.0.len()] == self.0[..]
            }
        }

        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "(")?;
                for (k, l) in self.0.iter().enumerate() {
                    if k > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{}", l + 1)?;
                }
                write!(f, ")")
            }
        }
    };
}

word_common!(ProjectedWord);
word_common!(LiftedWord);

impl LiftedWord {
    pub fn is_admissible(&self, g: &TransitionGraph) -> bool {
        self.0.iter().all(|&l| l < g.size()) && self.0.windows(2).all(|w| g.has_edge(w[0], w[1]))
    }
}

/// Per-position choice of lower or upper copy.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LiftMask(pub Vec<Side>);

impl LiftMask {
    pub fn apply(&self, sigma: &ProjectedWord, g: &TransitionGraph) -> LiftedWord {
        LiftedWord(
            sigma
                .letters()
                .iter()
                .zip(&self.0)
                .map(|(&l, &side)| g.lift(l, side))
                .collect(),
        )
    }
}

/// The realized members of `N_{i,j}` in `G_2`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OverlapCell {
    pub pair: (usize, usize),
    pub members: Vec<(Side, Side)>,
}

impl OverlapCell {
    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, su: Side, sv: Side) -> bool {
        self.members.contains(&(su, sv))
    }

    /// Members as lifted index pairs.
    pub fn lifted_pairs(&self, n_base: usize) -> Vec<(usize, usize)> {
        let lift = |l: usize, s: Side| if s == Side::Upper { l + n_base } else { l };
        self.members
            .iter()
            .map(|&(su, sv)| (lift(self.pair.0, su), lift(self.pair.1, sv)))
            .collect()
    }
}

pub fn project(w: &LiftedWord, n_base: usize) -> ProjectedWord {
    ProjectedWord(w.letters().iter().map(|&l| l % n_base).collect())
}

/// End state of `σ`: which of `σ_n`, `σ_n⁺` terminate some admissible lift.
/// Empty iff `σ ∉ S_n`.
pub fn end_state(sigma: &ProjectedWord, g: &TransitionGraph) -> EndState {
    let letters = sigma.letters();
    if letters.is_empty() || letters.iter().any(|&l| l >= g.n_base()) {
        return EndState(0);
    }
    let mut state = EndState::BOTH;
    for w in letters.windows(2) {
        state = g.step(state, w[0], w[1]);
        if state.is_empty() {
            break;
        }
    }
    state
}

pub fn in_sn(sigma: &ProjectedWord, g: &TransitionGraph) -> bool {
    !end_state(sigma, g).is_empty()
}

/// `Γ(σ) = G_n ∩ T(σ)`, in lexicographic order of lift masks (lower first).
pub fn gamma(sigma: &ProjectedWord, g: &TransitionGraph) -> Vec<LiftedWord> {
    let letters = sigma.letters();
    let mut out = Vec::new();
    if letters.is_empty() || letters.iter().any(|&l| l >= g.n_base()) {
        return out;
    }
    let mut current = Vec::with_capacity(letters.len());
    gamma_dfs(letters, g, &mut current, &mut out);
    out
}

fn gamma_dfs(
    letters: &[usize],
    g: &TransitionGraph,
    current: &mut Vec<usize>,
    out: &mut Vec<LiftedWord>,
) {
    let pos = current.len();
    if pos == letters.len() {
        out.push(LiftedWord(current.clone()));
        return;
    }
    for side in [Side::Lower, Side::Upper] {
        let l = g.lift(letters[pos], side);
        if pos > 0 && !g.has_edge(current[pos - 1], l) {
            continue;
        }
        current.push(l);
        gamma_dfs(letters, g, current, out);
        current.pop();
    }
}

/// Letters `j` with `σ∗j ∈ S_{|σ|+1}`.
pub fn children(sigma: &ProjectedWord, g: &TransitionGraph) -> Vec<usize> {
    let state = end_state(sigma, g);
    if state.is_empty() {
        return Vec::new();
    }
    let last = sigma.last();
    (0..g.n_base())
        .filter(|&j| !g.step(state, last, j).is_empty())
        .collect()
}

/// All words of `S_n`, in lexicographic order.
pub fn enumerate_sn(g: &TransitionGraph, n: usize) -> Result<Vec<ProjectedWord>> {
    enumerate_sn_capped(g, n, DEFAULT_WORD_CAP)
}

pub fn enumerate_sn_capped(g: &TransitionGraph, n: usize, cap: usize) -> Result<Vec<ProjectedWord>> {
    if n == 0 {
        return Err(Error::InvalidSpec("word length must be at least 1".into()));
    }
    let mut out = Vec::new();
    let mut stack = Vec::with_capacity(n);
    for first in 0..g.n_base() {
        stack.push(first);
        sn_dfs(g, n, EndState::BOTH, &mut stack, &mut out, cap)?;
        stack.pop();
    }
    Ok(out)
}

fn sn_dfs(
    g: &TransitionGraph,
    n: usize,
    state: EndState,
    stack: &mut Vec<usize>,
    out: &mut Vec<ProjectedWord>,
    cap: usize,
) -> Result<()> {
    if stack.len() == n {
        if out.len() >= cap {
            return Err(Error::CapExceeded { cap });
        }
        out.push(ProjectedWord(stack.clone()));
        return Ok(());
    }
    let last = *stack.last().unwrap();
    for j in 0..g.n_base() {
        let next = g.step(state, last, j);
        if next.is_empty() {
            continue;
        }
        stack.push(j);
        sn_dfs(g, n, next, stack, out, cap)?;
        stack.pop();
    }
    Ok(())
}

/// All `N²` cells with their realized members, row-major.
pub fn overlap_cells(g: &TransitionGraph) -> Vec<OverlapCell> {
    let n = g.n_base();
    (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| g.cell(i, j))
        .collect()
}

pub fn has_complete_overlaps(g: &TransitionGraph) -> bool {
    overlap_cells(g).iter().any(|c| c.members.len() >= 2)
}

/// All lifted words of `G_n` (brute force; used as an oracle).
pub fn enumerate_gn(g: &TransitionGraph, n: usize, cap: usize) -> Result<Vec<LiftedWord>> {
    let mut level: Vec<Vec<usize>> = (0..g.size()).map(|a| vec![a]).collect();
    for _ in 1..n {
        let mut next = Vec::new();
        for w in &level {
            let last = *w.last().unwrap();
            for b in 0..g.size() {
                if g.has_edge(last, b) {
                    if next.len() >= cap {
                        return Err(Error::CapExceeded { cap });
                    }
                    let mut v = w.clone();
                    v.push(b);
                    next.push(v);
                }
            }
        }
        level = next;
    }
    Ok(level.into_iter().map(LiftedWord).collect())
}
