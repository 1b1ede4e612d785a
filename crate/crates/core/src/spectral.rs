//! Parameter matrices `A_i(s)`, `A(s)`, `B(s)`, spectral radii, Perron
//! vectors, the dimension roots `s_{i,r}`, `s_r`, `a_r`, the pressure
//! function with its quasi-multiplicative bracket, and the root `t_r`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::measure::{Constants, LiftTransfer, Mat2, vec_mat};
use crate::model::{unreachable_pair, validate, Case, SystemSpec};
use crate::symbolic::{Side, DEFAULT_WORD_CAP};

pub const POWER_TOL: f64 = 1e-12;
pub const POWER_MAX_ITER: usize = 100_000;
pub const ROOT_TOL: f64 = 1e-10;
pub const DEFAULT_NMAX: usize = 12;

/// Closed form for a nonnegative 2x2 matrix (its eigenvalues are real).
pub fn spectral_radius_2x2(m: &Mat2) -> f64 {
    let half_tr = 0.5 * (m[0][0] + m[1][1]);
    let half_diff = 0.5 * (m[0][0] - m[1][1]);
    half_tr + (half_diff * half_diff + m[0][1] * m[1][0]).sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerronVectors {
    pub radius: f64,
    /// `M ξ = ρ ξ`, positive, summing to 1.
    pub right: Vec<f64>,
    /// `η M = ρ η`, positive, summing to 1.
    pub left: Vec<f64>,
}

fn is_nonnegative(m: &DMatrix<f64>) -> bool {
    m.iter().all(|&x| x >= 0.0 && x.is_finite())
}

/// Power iteration on `M + I` with Collatz–Wielandt bounds. `M` must be
/// irreducible; the shift makes it primitive.
fn power_iterate(m: &DMatrix<f64>) -> Result<(f64, DVector<f64>)> {
    let n = m.nrows();
    let shifted = m + DMatrix::<f64>::identity(n, n);
    let mut x = DVector::from_element(n, 1.0 / n as f64);
    let mut history = Vec::new();
    for it in 0..POWER_MAX_ITER {
        let y = &shifted * &x;
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for k in 0..n {
            let q = y[k] / x[k];
            lo = lo.min(q);
            hi = hi.max(q);
        }
        if history.len() == 8 {
            history.remove(0);
        }
        history.push((lo - 1.0, hi - 1.0));
        let s = y.sum();
        x = y / s;
        if hi - lo <= POWER_TOL * hi {
            return Ok((0.5 * (lo + hi) - 1.0, x));
        }
        if it + 1 == POWER_MAX_ITER {
            break;
        }
    }
    Err(Error::NonConvergence { iterations: POWER_MAX_ITER, history })
}

fn reachability(m: &DMatrix<f64>) -> Vec<Vec<bool>> {
    let n = m.nrows();
    let mut reach = vec![vec![false; n]; n];
    for a in 0..n {
        reach[a][a] = true;
        let mut stack = vec![a];
        while let Some(v) = stack.pop() {
            for b in 0..n {
                if m[(v, b)] > 0.0 && !reach[a][b] {
                    reach[a][b] = true;
                    stack.push(b);
                }
            }
        }
    }
    reach
}

/// Spectral radius of a nonnegative square matrix: the maximum over its
/// strongly connected blocks.
pub fn spectral_radius(m: &DMatrix<f64>) -> Result<f64> {
    let n = m.nrows();
    if n != m.ncols() || !is_nonnegative(m) {
        return Err(Error::InvalidSpec("spectral radius needs a nonnegative square matrix".into()));
    }
    match n {
        0 => return Ok(0.0),
        1 => return Ok(m[(0, 0)]),
        2 => return Ok(spectral_radius_2x2(&[[m[(0, 0)], m[(0, 1)]], [m[(1, 0)], m[(1, 1)]]])),
        _ => {}
    }
    let reach = reachability(m);
    let mut seen = vec![false; n];
    let mut best = 0.0f64;
    for a in 0..n {
        if seen[a] {
            continue;
        }
        let comp: Vec<usize> = (0..n).filter(|&b| reach[a][b] && reach[b][a]).collect();
        for &b in &comp {
            seen[b] = true;
        }
        let sub = DMatrix::from_fn(comp.len(), comp.len(), |i, j| m[(comp[i], comp[j])]);
        let rho = match comp.len() {
            1 => sub[(0, 0)],
            2 => spectral_radius_2x2(&[[sub[(0, 0)], sub[(0, 1)]], [sub[(1, 0)], sub[(1, 1)]]]),
            _ => power_iterate(&sub)?.0,
        };
        best = best.max(rho);
    }
    Ok(best)
}

/// Perron root with normalized positive right and left vectors.
pub fn perron_vectors(m: &DMatrix<f64>) -> Result<PerronVectors> {
    let n = m.nrows();
    if n != m.ncols() || n == 0 || !is_nonnegative(m) {
        return Err(Error::InvalidSpec("Perron vectors need a nonnegative square matrix".into()));
    }
    if let Some((from, to)) = unreachable_pair(n, |a, b| m[(a, b)] > 0.0) {
        return Err(Error::Reducible { from: from + 1, to: to + 1 });
    }
    let (radius, right) = power_iterate(m)?;
    let (radius_t, left) = power_iterate(&m.transpose())?;
    let residual = (m * &right - &right * radius).amax();
    if residual > 1e-10 * radius.max(1.0) || (radius - radius_t).abs() > 1e-10 * radius.max(1.0) {
        return Err(Error::NonConvergence { iterations: POWER_MAX_ITER, history: vec![(radius, radius_t)] });
    }
    Ok(PerronVectors { radius, right: right.iter().copied().collect(), left: left.iter().copied().collect() })
}

#[inline]
fn weight(p: f64, ratio: f64, r: f64, u: f64) -> f64 {
    if p > 0.0 {
        (p * ratio.powf(r)).powf(u)
    } else {
        0.0
    }
}

/// `((p_{a,b} s_{a,b}^r)^u)` over one block of the lifted matrix:
/// `(Lower, Lower)` is `A₁`, `(Upper, Upper)` is `A₂`, `(Lower, Upper)` is
/// `A₃` and `(Upper, Lower)` is `A₄`.
pub fn block_matrix(spec: &SystemSpec, row: Side, col: Side, u: f64) -> DMatrix<f64> {
    let n = spec.n_base();
    let off = |s: Side| if s == Side::Lower { 0 } else { n };
    DMatrix::from_fn(n, n, |i, j| weight(spec.p(i + off(row), j + off(col)), spec.ratio(i, j), spec.r(), u))
}

/// `A(u) = [[A₁, A₃], [A₄, A₂]]`.
pub fn full_matrix(spec: &SystemSpec, u: f64) -> DMatrix<f64> {
    let n = spec.n_base();
    DMatrix::from_fn(2 * n, 2 * n, |a, b| weight(spec.p(a, b), spec.ratio(a % n, b % n), spec.r(), u))
}

/// Which identity the `p̂` kernel follows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HatRegime {
    G1,
    G2,
}

impl HatRegime {
    /// `G1` when it holds, else `G2` when it holds.
    pub fn of(spec: &SystemSpec) -> Option<Self> {
        let rep = validate(spec);
        if rep.g1.pass {
            Some(Self::G1)
        } else if rep.g2.pass {
            Some(Self::G2)
        } else {
            None
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::G1 => "g1",
            Self::G2 => "g2",
        }
    }
}

pub fn phat(spec: &SystemSpec, hat: HatRegime, i: usize, j: usize) -> f64 {
    let n = spec.n_base();
    match hat {
        HatRegime::G1 => spec.p(i, j) + spec.p(i, j + n),
        HatRegime::G2 => spec.p(i, j) + spec.p(i + n, j),
    }
}

/// `B(u) = ((p̂_{i,j} s_{i,j}^r)^u)`.
pub fn hat_matrix(spec: &SystemSpec, hat: HatRegime, u: f64) -> DMatrix<f64> {
    let n = spec.n_base();
    DMatrix::from_fn(n, n, |i, j| weight(phat(spec, hat, i, j), spec.ratio(i, j), spec.r(), u))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RootKind {
    /// `ρ₁(s) = 1`.
    Lower,
    /// `ρ₂(s) = 1`.
    Upper,
    /// `ρ(s) = 1`.
    Full,
    /// `ξ(s/(s+r)) = 1`.
    Hat(HatRegime),
}

pub fn param_matrix(spec: &SystemSpec, kind: RootKind, u: f64) -> DMatrix<f64> {
    match kind {
        RootKind::Lower => block_matrix(spec, Side::Lower, Side::Lower, u),
        RootKind::Upper => block_matrix(spec, Side::Upper, Side::Upper, u),
        RootKind::Full => full_matrix(spec, u),
        RootKind::Hat(h) => hat_matrix(spec, h, u),
    }
}

/// Spectral radius of the kind's matrix at `u = s/(s+r)`.
pub fn rho(spec: &SystemSpec, kind: RootKind, s: f64) -> Result<f64> {
    spectral_radius(&param_matrix(spec, kind, s / (s + spec.r())))
}

/// Bisection for the unique root of a strictly decreasing `f` crossing 0,
/// starting from `[1e-9, 1]` and doubling the upper end.
pub fn bisect_decreasing(mut f: impl FnMut(f64) -> Result<f64>, tol: f64) -> Result<f64> {
    let mut lo = 1e-9;
    if f(lo)? <= 0.0 {
        return Err(Error::Bracket(format!("function is not positive at s = {lo}")));
    }
    let mut hi = 1.0;
    let mut grow = 0;
    while f(hi)? >= 0.0 {
        lo = hi;
        hi *= 2.0;
        grow += 1;
        if grow > 60 {
            return Err(Error::Bracket("no sign change below s = 2^60".into()));
        }
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if f(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn check_root_regime(spec: &SystemSpec, kind: RootKind) -> Result<()> {
    let n = spec.n_base();
    let irreducible = |row: Side, col: Side| {
        let b = spec.block(row, col);
        unreachable_pair(n, |i, j| b[i * n + j] > 0.0).is_none()
    };
    match kind {
        RootKind::Lower if !irreducible(Side::Lower, Side::Lower) => {
            Err(Error::Regime("the lower block P1 is reducible".into()))
        }
        RootKind::Upper if !irreducible(Side::Upper, Side::Upper) => {
            Err(Error::Regime("the upper block P2 is reducible".into()))
        }
        RootKind::Hat(h) => {
            let rep = validate(spec);
            let holds = match h {
                HatRegime::G1 => rep.g1.pass,
                HatRegime::G2 => rep.g2.pass,
            };
            if !holds || !irreducible(Side::Lower, Side::Lower) {
                Err(Error::Regime(format!("{} does not hold or P1 is reducible", h.name())))
            } else {
                Ok(())
            }
        }
        _ => Ok(()),
    }
}

/// Root `s` of `ρ_kind(s) = 1`, to absolute tolerance `tol`.
pub fn solve_dimension_root(spec: &SystemSpec, kind: RootKind, tol: f64) -> Result<f64> {
    check_root_regime(spec, kind)?;
    bisect_decreasing(|s| Ok(rho(spec, kind, s)? - 1.0), tol)
}

/// `log E_r(σ)` for every `σ ∈ S_n`, `n = 1..=n_max`, grouped by length.
#[derive(Debug, Clone)]
pub struct EnergyLevels {
    pub levels: Vec<Vec<f64>>,
}

impl EnergyLevels {
    pub fn new(spec: &SystemSpec, n_max: usize, cap: usize) -> Result<Self> {
        let n = spec.n_base();
        let t = LiftTransfer::new(spec);
        let mut levels: Vec<Vec<f64>> = vec![Vec::new(); n_max];
        let mut count = 0usize;
        fn dfs(
            spec: &SystemSpec,
            t: &LiftTransfer,
            a: usize,
            v: [f64; 2],
            depth: usize,
            levels: &mut [Vec<f64>],
            count: &mut usize,
            cap: usize,
        ) -> Result<()> {
            *count += 1;
            if *count > cap {
                return Err(Error::CapExceeded { cap });
            }
            levels[depth - 1].push((v[0] + v[1]).ln());
            if depth == levels.len() {
                return Ok(());
            }
            for b in 0..spec.n_base() {
                if !spec.graph().cell_nonempty(a, b) {
                    continue;
                }
                let w = vec_mat(v, t.energy_matrix(a, b));
                if w[0] + w[1] > 0.0 {
                    dfs(spec, t, b, w, depth + 1, levels, count, cap)?;
                }
            }
            Ok(())
        }
        if n_max > 0 {
            for a in 0..n {
                dfs(spec, &t, a, [spec.chi(a), spec.chi(a + n)], 1, &mut levels, &mut count, cap)?;
            }
        }
        Ok(Self { levels })
    }

    pub fn n_max(&self) -> usize {
        self.levels.len()
    }

    /// `log T_n(u)`.
    pub fn log_t(&self, n: usize, u: f64) -> f64 {
        log_sum_exp(self.levels[n - 1].iter().map(|&le| u * le))
    }
}

pub fn log_sum_exp(xs: impl Iterator<Item = f64> + Clone) -> f64 {
    let m = xs.clone().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + xs.map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// `log h(u)`, `log g₁(u)` and `log g₂(u)` of the quasi-multiplicativity bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuasiConstants {
    pub log_h: f64,
    pub log_g1: f64,
    pub log_g2: f64,
}

impl QuasiConstants {
    pub fn new(c: &Constants, n_base: usize, u: f64) -> Self {
        let n = n_base as f64;
        let lo = c.concat_lo().ln();
        let hi = c.concat_hi().ln();
        let log_h = -n * (n.ln() + u * c.c2.ln()) - u * hi + n * u * c.c1.ln() + u * lo;
        let log_g1 = -n.ln() + log_h + u * lo;
        let log_g2 = u * hi;
        Self { log_h, log_g1, log_g2 }
    }

    /// `log b = log g₂ − log g₁`.
    pub fn log_b(&self) -> f64 {
        self.log_g2 - self.log_g1
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PressureEstimate {
    /// The exponent `u` in `T_n(u) = Σ E_r(σ)^u`.
    pub s: f64,
    /// `log T_n(u)` for `n = 1..=n_max`.
    pub log_tn: Vec<f64>,
    /// `(1/n) log T_n(u)` clamped into `[Φ_lo, Φ_hi]`, which always contains `Φ(u)`.
    pub phi_hat: f64,
    /// `(1/n) log T_n(u)` before clamping; it exceeds `Φ_hi` whenever `g₂(u) < 1`.
    pub phi_raw: f64,
    pub phi_lo: f64,
    pub phi_hi: f64,
    pub constants: QuasiConstants,
}

fn require_case_ii(spec: &SystemSpec) -> Result<()> {
    let rep = validate(spec);
    if rep.case != Case::CaseII {
        return Err(Error::Regime("the pressure function needs (A2), (A4), (A5) and an irreducible P".into()));
    }
    Ok(())
}

/// Pressure function evaluator over a fixed enumeration depth.
#[derive(Debug, Clone)]
pub struct Pressure {
    levels: EnergyLevels,
    constants: Constants,
    n_base: usize,
    r: f64,
}

impl Pressure {
    pub fn new(spec: &SystemSpec, n_max: usize) -> Result<Self> {
        require_case_ii(spec)?;
        Self::new_unchecked(spec, n_max)
    }

    /// Skips the regime check; the bracket is then only a heuristic.
    pub fn new_unchecked(spec: &SystemSpec, n_max: usize) -> Result<Self> {
        if n_max == 0 {
            return Err(Error::InvalidSpec("n_max must be at least 1".into()));
        }
        Ok(Self {
            levels: EnergyLevels::new(spec, n_max, DEFAULT_WORD_CAP)?,
            constants: Constants::new(spec),
            n_base: spec.n_base(),
            r: spec.r(),
        })
    }

    pub fn n_max(&self) -> usize {
        self.levels.n_max()
    }

    pub fn levels(&self) -> &EnergyLevels {
        &self.levels
    }

    pub fn constants(&self) -> &Constants {
        &self.constants
    }

    pub fn quasi(&self, u: f64) -> QuasiConstants {
        QuasiConstants::new(&self.constants, self.n_base, u)
    }

    pub fn evaluate(&self, u: f64) -> PressureEstimate {
        let log_tn: Vec<f64> = (1..=self.n_max()).map(|n| self.levels.log_t(n, u)).collect();
        let q = self.quasi(u);
        let n = self.n_max() as f64;
        let last = *log_tn.last().unwrap();
        let phi_lo = (q.log_g1 + last) / n;
        let phi_hi = (q.log_g2 + last) / n;
        PressureEstimate {
            s: u,
            phi_hat: (last / n).clamp(phi_lo, phi_hi),
            phi_raw: last / n,
            phi_lo,
            phi_hi,
            log_tn,
            constants: q,
        }
    }

    /// `Φ̂(t/(t+r))` and its bracket as functions of the dimension variable `t`.
    pub fn at_dimension(&self, t: f64) -> PressureEstimate {
        self.evaluate(t / (t + self.r))
    }
}

pub fn pressure(spec: &SystemSpec, s: f64, n_max: usize) -> Result<PressureEstimate> {
    Ok(Pressure::new(spec, n_max)?.evaluate(s))
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrEstimate {
    pub tr: f64,
    pub tr_lo: f64,
    pub tr_hi: f64,
    pub n_max: usize,
}

impl TrEstimate {
    pub fn width(&self) -> f64 {
        self.tr_hi - self.tr_lo
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.tr_lo + self.tr_hi)
    }
}

/// Root `t_r` of `Φ(t/(t+r)) = 0` with the interval enclosed by the roots of
/// the lower and upper pressure bounds.
pub fn solve_tr(spec: &SystemSpec, n_max: usize) -> Result<TrEstimate> {
    solve_tr_with(&Pressure::new(spec, n_max)?)
}

pub fn solve_tr_with(p: &Pressure) -> Result<TrEstimate> {
    let mut trace: Vec<(f64, f64)> = Vec::new();
    let tr = bisect_decreasing(
        |t| {
            let v = p.at_dimension(t).phi_hat;
            trace.push((t, v));
            Ok(v)
        },
        ROOT_TOL,
    )?;
    trace.sort_by(|a, b| a.0.total_cmp(&b.0));
    if let Some(w) = trace.windows(2).find(|w| w[1].1 > w[0].1) {
        return Err(Error::Bracket(format!("pressure estimate not decreasing between t = {} and {}", w[0].0, w[1].0)));
    }
    let bound = |f: fn(&PressureEstimate) -> f64, which: &str| {
        bisect_decreasing(|t| Ok(f(&p.at_dimension(t))), ROOT_TOL).map_err(|e| {
            Error::Bracket(format!("{which} pressure bound does not change sign at n_max = {}: {e}", p.n_max()))
        })
    };
    let tr_lo = bound(|e| e.phi_lo, "lower")?;
    let tr_hi = bound(|e| e.phi_hi, "upper")?;
    Ok(TrEstimate { tr, tr_lo, tr_hi, n_max: p.n_max() })
}

#[derive(Debug, Clone, PartialEq)]
pub struct StrictnessResult {
    pub hat: HatRegime,
    /// `min_k ((A ṽ)_k − ṽ_k)/ṽ_k` (row form) or the column analogue.
    pub margin: f64,
    /// Component attaining the margin.
    pub index: usize,
    /// `true` certifies `ρ(a_r) > 1`, hence `s_r > a_r`.
    pub certified: bool,
}

/// Margins below this are treated as numerically zero.
pub const STRICT_MARGIN: f64 = 1e-9;

/// Double the Perron vector of `B(a_r/(a_r+r))` and check `A ṽ > ṽ` (g1) or
/// `w̃ A > w̃` (g2) componentwise.
pub fn strictness_test(spec: &SystemSpec, a_r: f64) -> Result<StrictnessResult> {
    let hat = HatRegime::of(spec).ok_or_else(|| Error::Regime("neither g1 nor g2 holds".into()))?;
    let u = a_r / (a_r + spec.r());
    let b = hat_matrix(spec, hat, u);
    let pv = perron_vectors(&b)?;
    let n = spec.n_base();
    let a = full_matrix(spec, u);
    let base = match hat {
        HatRegime::G1 => &pv.right,
        HatRegime::G2 => &pv.left,
    };
    let doubled = DVector::from_fn(2 * n, |k, _| base[k % n]);
    let image = match hat {
        HatRegime::G1 => &a * &doubled,
        HatRegime::G2 => (doubled.transpose() * &a).transpose(),
    };
    let (mut margin, mut index) = (f64::INFINITY, 0);
    for k in 0..2 * n {
        // compare against ξ ṽ so an inexact root does not bias the margin
        let m = (image[k] - pv.radius * doubled[k]) / doubled[k];
        if m < margin {
            margin = m;
            index = k;
        }
    }
    Ok(StrictnessResult { hat, margin, index, certified: margin > STRICT_MARGIN })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DimensionReport {
    pub r: f64,
    pub s1r: Option<f64>,
    pub s2r: Option<f64>,
    pub sr: f64,
    pub ar: Option<(HatRegime, f64)>,
    pub tr: Option<TrEstimate>,
    pub root_tol: f64,
    pub n_max: usize,
}

/// Every root the regime supports. `t_r` is attempted only in Case II.
pub fn dimension_report(spec: &SystemSpec, n_max: usize) -> Result<DimensionReport> {
    let rep = validate(spec);
    let s1r = solve_dimension_root(spec, RootKind::Lower, ROOT_TOL).ok();
    let s2r = solve_dimension_root(spec, RootKind::Upper, ROOT_TOL).ok();
    let sr = solve_dimension_root(spec, RootKind::Full, ROOT_TOL)?;
    let ar = match HatRegime::of(spec) {
        Some(h) => solve_dimension_root(spec, RootKind::Hat(h), ROOT_TOL).ok().map(|a| (h, a)),
        None => None,
    };
    let tr = if rep.case == Case::CaseII { Some(solve_tr(spec, n_max)?) } else { None };
    Ok(DimensionReport { r: spec.r(), s1r, s2r, sr, ar, tr, root_tol: ROOT_TOL, n_max })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanRow {
    pub r: f64,
    pub s1r: f64,
    pub s2r: f64,
    /// Sign of `s_{2,r} − s_{1,r}`.
    pub sign: i8,
}

/// Block roots over a grid of `r`; the second value is the length of the
/// leading run of grid points (in the given order) with `s_{2,r} > s_{1,r}`.
pub fn small_r_scan(spec: &SystemSpec, r_grid: &[f64]) -> Result<(Vec<ScanRow>, usize)> {
    let rep = validate(spec);
    if rep.case != Case::CaseI {
        return Err(Error::Regime("the small-r scan needs (A1)-(A3)".into()));
    }
    let mut rows = Vec::with_capacity(r_grid.len());
    for &r in r_grid {
        let s = spec.clone().with_r(r)?;
        let s1r = solve_dimension_root(&s, RootKind::Lower, ROOT_TOL)?;
        let s2r = solve_dimension_root(&s, RootKind::Upper, ROOT_TOL)?;
        let d = s2r - s1r;
        let sign = if d.abs() <= 2.0 * ROOT_TOL { 0 } else if d > 0.0 { 1 } else { -1 };
        rows.push(ScanRow { r, s1r, s2r, sign });
    }
    let prefix = rows.iter().take_while(|row| row.sign > 0).count();
    Ok((rows, prefix))
}
