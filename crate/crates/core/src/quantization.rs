//! Anti-chains `Λ_{k,r}`, the error surrogate `Σ_{Λ_{k,r}} E_r(σ)`, the
//! functional `F^s_{k,r}`, dimension regressions, sampling from `μ` and
//! Lloyd's algorithm in the `L_r` distortion.

use std::collections::BTreeMap;

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::measure::{vec_mat, Constants, LiftTransfer};
use crate::model::SystemSpec;
use crate::symbolic::ProjectedWord;

/// Default bound on stored anti-chain members.
pub const DEFAULT_PHI_CAP: usize = 1_000_000;
/// Log-space bucket width under which energy vectors count as equal.
pub const EXACT_RESOLUTION: f64 = 1e-11;
/// Default bound on merged states for streamed curves.
pub const DEFAULT_STATE_CAP: u64 = 200_000_000;

/// A member of `Λ_{k,r}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Member {
    pub word: ProjectedWord,
    pub log_energy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AntiChain {
    pub k: usize,
    /// `k log c_{1,r}`.
    pub log_threshold: f64,
    pub log_c1: f64,
    pub members: Vec<Member>,
    pub l1: usize,
    pub l2: usize,
}

impl AntiChain {
    /// `φ_{k,r}`.
    pub fn phi(&self) -> usize {
        self.members.len()
    }

    /// `log Σ_{Λ_{k,r}} E_r(σ)`.
    pub fn log_surrogate(&self) -> f64 {
        log_sum_exp(self.members.iter().map(|m| m.log_energy))
    }

    /// `Σ_{Λ_{k,r}} E_r(σ)`.
    pub fn surrogate(&self) -> f64 {
        self.log_surrogate().exp()
    }

    /// `log F^s_{k,r} = log Σ E_r(σ)^{s/(s+r)}`.
    pub fn log_f(&self, s: f64, r: f64) -> f64 {
        let u = s / (s + r);
        log_sum_exp(self.members.iter().map(|m| u * m.log_energy))
    }
}

fn log_sum_exp(xs: impl Iterator<Item = f64> + Clone) -> f64 {
    crate::spectral::log_sum_exp(xs)
}

/// Walk the tree of `S*` from `S_1`, reporting each node that belongs to some
/// `Λ_{k,r}` with `k ≤ k_max` together with that `k`. A node `σ` belongs to
/// `Λ_{k,r}` exactly when `log E(σ♭)/log c₁ ≤ k < log E(σ)/log c₁`, so every node
/// is in at most one anti-chain and one walk serves all `k ≤ k_max`.
/// `E(∅) = 1`. Returns the number of visited nodes.
fn walk(
    spec: &SystemSpec,
    k_max: usize,
    node_cap: u64,
    emit: &mut dyn FnMut(&[usize], usize, f64),
) -> Result<u64> {
    let c = Constants::new(spec);
    if !(c.c1 > 0.0 && c.c1 < 1.0) {
        return Err(Error::InvalidSpec(format!("c1 = {} is not in (0,1)", c.c1)));
    }
    let log_c1 = c.c1.ln();
    let t = LiftTransfer::new(spec);
    let n = spec.n_base();
    let mut nodes = 0u64;
    let mut path = Vec::with_capacity(64);

    struct Ctx<'a> {
        spec: &'a SystemSpec,
        t: &'a LiftTransfer,
        log_c1: f64,
        k_max: usize,
        node_cap: u64,
    }

    fn rec(
        ctx: &Ctx,
        path: &mut Vec<usize>,
        v: [f64; 2],
        parent_x: f64,
        nodes: &mut u64,
        emit: &mut dyn FnMut(&[usize], usize, f64),
    ) -> Result<()> {
        *nodes += 1;
        if *nodes > ctx.node_cap {
            return Err(Error::CapExceeded { cap: ctx.node_cap as usize });
        }
        let le = (v[0] + v[1]).ln();
        let x = le / ctx.log_c1;
        let k = parent_x.ceil().max(0.0) as usize;
        if (k as f64) < x && k <= ctx.k_max {
            emit(path, k, le);
        }
        if x > ctx.k_max as f64 {
            return Ok(());
        }
        let a = *path.last().unwrap();
        for b in 0..ctx.spec.n_base() {
            if !ctx.spec.graph().cell_nonempty(a, b) {
                continue;
            }
            let w = vec_mat(v, ctx.t.energy_matrix(a, b));
            if w[0] + w[1] > 0.0 {
                path.push(b);
                rec(ctx, path, w, x, nodes, emit)?;
                path.pop();
            }
        }
        Ok(())
    }

    let ctx = Ctx { spec, t: &t, log_c1, k_max, node_cap };
    for a in 0..n {
        let v = [spec.chi(a), spec.chi(a + n)];
        if v[0] + v[1] == 0.0 {
            continue;
        }
        path.clear();
        path.push(a);
        rec(&ctx, &mut path, v, 0.0, &mut nodes, emit)?;
    }
    Ok(nodes)
}

/// `Λ_{k,r}` with its members stored.
pub fn build_antichain(spec: &SystemSpec, k: usize, phi_cap: usize) -> Result<AntiChain> {
    if k == 0 {
        return Err(Error::InvalidSpec("k must be at least 1".into()));
    }
    let log_c1 = Constants::new(spec).c1.ln();
    let mut members = Vec::new();
    let mut overflow = false;
    walk(spec, k, u64::MAX, &mut |path, kk, le| {
        if kk == k {
            if members.len() >= phi_cap {
                overflow = true;
            } else {
                members.push(Member { word: ProjectedWord::new(path.to_vec()), log_energy: le });
            }
        }
    })?;
    if overflow {
        return Err(Error::CapExceeded { cap: phi_cap });
    }
    let l1 = members.iter().map(|m| m.word.len()).min().unwrap_or(0);
    let l2 = members.iter().map(|m| m.word.len()).max().unwrap_or(0);
    Ok(AntiChain { k, log_threshold: k as f64 * log_c1, log_c1, members, l1, l2 })
}

/// `F^s_{k,r}` on a stored anti-chain, in log form.
pub fn f_value(spec: &SystemSpec, antichain: &AntiChain, s: f64) -> Result<f64> {
    if !(s > 0.0) {
        return Err(Error::InvalidSpec("s must be positive".into()));
    }
    Ok(antichain.log_f(s, spec.r()))
}

/// `Σ_{Λ_{k,r}} E_r(σ)`.
pub fn surrogate_error(antichain: &AntiChain) -> f64 {
    antichain.surrogate()
}

/// Sweep states keyed by last letter and bucketed log energy vector, with a
/// representative vector and a multiplicity.
type Level = BTreeMap<(usize, i64, i64), (usize, [f64; 2], u128)>;

/// One row of a streamed error curve.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveRow {
    pub k: usize,
    pub phi: u128,
    pub log_surrogate: f64,
    /// `log F^s_{k,r}` for each requested `s`, in order.
    pub log_f: Vec<f64>,
    pub l1: usize,
    pub l2: usize,
}

impl CurveRow {
    pub fn surrogate(&self) -> f64 {
        self.log_surrogate.exp()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorCurve {
    pub s_values: Vec<f64>,
    pub rows: Vec<CurveRow>,
    /// Words visited, counted with multiplicity.
    pub nodes: u128,
    /// Distinct states actually expanded.
    pub states: u64,
}

/// Breadth-first version of [`walk`] that merges nodes with equal state. The
/// subtree below `σ` depends only on its last letter and its energy vector
/// `(I_{1,σ}, I_{2,σ})·s_σ^r`, so nodes agreeing on both are expanded once with
/// a multiplicity. Vectors are merged when both log components fall in the
/// same bucket of width `resolution`; with [`EXACT_RESOLUTION`] only vectors
/// equal up to rounding merge. `emit(depth, k, log_energy, count)` is called
/// per merged member. Returns `(tree nodes, merged states)`.
fn sweep(
    spec: &SystemSpec,
    k_max: usize,
    state_cap: u64,
    resolution: f64,
    emit: &mut dyn FnMut(usize, usize, f64, u128),
) -> Result<(u128, u64)> {
    let c = Constants::new(spec);
    if !(c.c1 > 0.0 && c.c1 < 1.0) {
        return Err(Error::InvalidSpec(format!("c1 = {} is not in (0,1)", c.c1)));
    }
    let log_c1 = c.c1.ln();
    let t = LiftTransfer::new(spec);
    let n = spec.n_base();
    let bucket = |x: f64| if x > 0.0 { (x.ln() / resolution).round() as i64 } else { i64::MIN };
    let key = |b: usize, w: [f64; 2]| (b, bucket(w[0]), bucket(w[1]));

    let mut level: Level = BTreeMap::new();
    for a in 0..n {
        let v = [spec.chi(a), spec.chi(a + n)];
        if v[0] + v[1] > 0.0 {
            level.insert(key(a, v), (a, v, 1));
        }
    }
    let (mut nodes, mut states) = (0u128, 0u64);
    let mut depth = 1;
    // level-1 nodes have parent x = 0, so they only ever join Λ_0
    while !level.is_empty() {
        let mut next: Level = BTreeMap::new();
        for &(a, v, count) in level.values() {
            nodes += count;
            states += 1;
            if states > state_cap {
                return Err(Error::CapExceeded { cap: state_cap as usize });
            }
            let x = (v[0] + v[1]).ln() / log_c1;
            if x > k_max as f64 {
                continue;
            }
            let k = x.ceil().max(0.0) as usize;
            for b in 0..n {
                if !spec.graph().cell_nonempty(a, b) {
                    continue;
                }
                let w = vec_mat(v, t.energy_matrix(a, b));
                let total = w[0] + w[1];
                if !(total > 0.0) {
                    continue;
                }
                let le = total.ln();
                if (k as f64) < le / log_c1 && k <= k_max {
                    emit(depth + 1, k, le, count);
                }
                next.entry(key(b, w)).and_modify(|e| e.2 += count).or_insert((b, w, count));
            }
        }
        level = next;
        depth += 1;
    }
    Ok((nodes, states))
}

/// `φ_{k,r}`, the surrogate and `F^s_{k,r}` for all `k` in `k_lo..=k_hi` from a
/// single merged sweep of the word tree, without storing members. Members of
/// `Λ_{k,r}` have `E_r(σ)/c₁^k ∈ [c₁, 1)`, so sums are accumulated in that
/// scale. `state_cap` bounds the number of merged states.
pub fn error_curve(spec: &SystemSpec, k_lo: usize, k_hi: usize, s_values: &[f64], state_cap: u64) -> Result<ErrorCurve> {
    error_curve_with(spec, k_lo, k_hi, s_values, state_cap, EXACT_RESOLUTION)
}

/// [`error_curve`] with coarser merging: energy vectors whose log components
/// agree to within about `resolution` share one representative. Counts near a
/// threshold `c₁^k` may shift by one anti-chain, so `φ_{k,r}` becomes
/// approximate; this trades accuracy for reach on systems whose energies
/// rarely coincide.
pub fn error_curve_with(
    spec: &SystemSpec,
    k_lo: usize,
    k_hi: usize,
    s_values: &[f64],
    state_cap: u64,
    resolution: f64,
) -> Result<ErrorCurve> {
    if !(resolution > 0.0) {
        return Err(Error::InvalidSpec("resolution must be positive".into()));
    }
    if k_lo == 0 || k_hi < k_lo {
        return Err(Error::InvalidSpec(format!("bad k range {k_lo}..{k_hi}")));
    }
    let log_c1 = Constants::new(spec).c1.ln();
    let us: Vec<f64> = s_values.iter().map(|&s| s / (s + spec.r())).collect();
    let m = k_hi - k_lo + 1;
    let mut phi = vec![0u128; m];
    let mut sur = vec![0.0f64; m];
    let mut fsum = vec![vec![0.0f64; us.len()]; m];
    let mut l1 = vec![usize::MAX; m];
    let mut l2 = vec![0usize; m];
    let (nodes, states) = sweep(spec, k_hi, state_cap, resolution, &mut |depth, k, le, count| {
        if k < k_lo {
            return;
        }
        let idx = k - k_lo;
        let scaled = le - k as f64 * log_c1;
        let cf = count as f64;
        phi[idx] += count;
        sur[idx] += cf * scaled.exp();
        for (f, &u) in fsum[idx].iter_mut().zip(&us) {
            *f += cf * (u * scaled).exp();
        }
        l1[idx] = l1[idx].min(depth);
        l2[idx] = l2[idx].max(depth);
    })?;
    let rows = (0..m)
        .map(|idx| {
            let k = (k_lo + idx) as f64;
            CurveRow {
                k: k_lo + idx,
                phi: phi[idx],
                log_surrogate: sur[idx].ln() + k * log_c1,
                log_f: fsum[idx].iter().zip(&us).map(|(f, &u)| f.ln() + u * k * log_c1).collect(),
                l1: if phi[idx] == 0 { 0 } else { l1[idx] },
                l2: l2[idx],
            }
        })
        .collect();
    Ok(ErrorCurve { s_values: s_values.to_vec(), rows, nodes, states })
}

/// Ordinary least squares `y = slope·x + intercept`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    /// Standard error of the slope.
    pub stderr: f64,
}

impl LinearFit {
    /// 95% normal-approximation interval for the slope.
    pub fn interval(&self) -> (f64, f64) {
        (self.slope - 1.96 * self.stderr, self.slope + 1.96 * self.stderr)
    }
}

pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<LinearFit> {
    let n = x.len();
    if n < 2 || y.len() != n {
        return Err(Error::InvalidSpec("a fit needs at least two points".into()));
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|b| (b - my) * (b - my)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidSpec("degenerate fit: all x equal".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let r2 = if syy == 0.0 { 1.0 } else { 1.0 - sse / syy };
    let stderr = if n > 2 { (sse / (nf - 2.0) / sxx).sqrt() } else { 0.0 };
    Ok(LinearFit { slope, intercept, r2, stderr })
}

/// Dimension read off an error curve: the slope of `log φ_{k,r}` against
/// `−(1/r) log Σ_{Λ_{k,r}} E_r`, since the surrogate tracks the `r`-th power of
/// the quantization error at `φ_{k,r}` points.
pub fn curve_dimension(curve: &ErrorCurve, r: f64, k_lo: usize, k_hi: usize) -> Result<LinearFit> {
    let rows: Vec<&CurveRow> = curve.rows.iter().filter(|row| row.k >= k_lo && row.k <= k_hi && row.phi > 0).collect();
    let x: Vec<f64> = rows.iter().map(|row| -row.log_surrogate / r).collect();
    let y: Vec<f64> = rows.iter().map(|row| (row.phi as f64).ln()).collect();
    linear_fit(&x, &y)
}

/// Points in `ℝ^q` (unused coordinates are zero).
pub type Point = [f64; 2];

/// Depth at which the largest cylinder is below `1e-9`.
pub fn sampling_depth(spec: &SystemSpec) -> usize {
    let s_hi = Constants::new(spec).s_hi;
    ((1e-9f64).ln() / s_hi.ln()).ceil().max(1.0) as usize
}

/// Draw `count` points from `μ`: a lifted path of length `depth` from `(χ, P)`
/// is projected and its cylinder map applied to the centroid of the terminal seed.
pub fn sample_mu(spec: &SystemSpec, count: usize, depth: usize, seed: u64) -> Result<Vec<Point>> {
    let g = spec.geometry().ok_or(Error::MissingGeometry)?;
    if depth == 0 {
        return Err(Error::InvalidSpec("depth must be at least 1".into()));
    }
    let n = spec.n_base();
    let size = spec.size();
    let init = WeightedIndex::new(spec.chi_vec()).map_err(|e| Error::InvalidSpec(e.to_string()))?;
    let rows: Vec<WeightedIndex<f64>> = (0..size)
        .map(|a| WeightedIndex::new(&spec.p_matrix()[a * size..(a + 1) * size]))
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::InvalidSpec(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    let mut word = vec![0usize; depth];
    for _ in 0..count {
        let mut a = init.sample(&mut rng);
        word[0] = a % n;
        for slot in word.iter_mut().skip(1) {
            a = rows[a].sample(&mut rng);
            *slot = a % n;
        }
        let mut x = g.seed(word[depth - 1]).centroid();
        for h in (0..depth - 1).rev() {
            x = g.cell_affine(word[h], word[h + 1]).apply(x);
        }
        if g.q() == 1 {
            x[1] = 0.0;
        }
        out.push(x);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    pub q: usize,
    pub points: Vec<Point>,
    /// `(1/n) Σ d(x, α)^r`.
    pub distortion: f64,
    pub iterations: usize,
    /// Distortion after each iteration of the winning run.
    pub history: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LloydOptions {
    pub restarts: usize,
    pub max_iter: usize,
    pub rel_tol: f64,
}

impl Default for LloydOptions {
    fn default() -> Self {
        Self { restarts: 2, max_iter: 500, rel_tol: 1e-9 }
    }
}

#[inline]
fn dist(q: usize, a: &Point, b: &Point) -> f64 {
    if q == 1 {
        (a[0] - b[0]).abs()
    } else {
        ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
    }
}

#[inline]
fn cost(d: f64, r: f64) -> f64 {
    if r == 2.0 {
        d * d
    } else if r == 1.0 {
        d
    } else {
        d.powf(r)
    }
}

fn cell_cost(q: usize, pts: &[&Point], c: &Point, r: f64) -> f64 {
    pts.iter().map(|p| cost(dist(q, p, c), r)).sum()
}

/// Minimizer (or an improvement) of `Σ d(x, c)^r` over one cell.
fn update_center(q: usize, pts: &[&Point], old: &Point, r: f64) -> Point {
    let nf = pts.len() as f64;
    let mean = || {
        let mut m = [0.0, 0.0];
        for p in pts {
            m[0] += p[0];
            m[1] += p[1];
        }
        [m[0] / nf, m[1] / nf]
    };
    if r == 2.0 {
        return mean();
    }
    let before = cell_cost(q, pts, old, r);
    let mut c = *old;
    if r <= 2.0 {
        // iteratively reweighted means (Weiszfeld for r = 1)
        for _ in 0..20 {
            let (mut wx, mut wy, mut ws) = (0.0, 0.0, 0.0);
            for p in pts {
                let w = dist(q, p, &c).max(1e-12).powf(r - 2.0);
                wx += w * p[0];
                wy += w * p[1];
                ws += w;
            }
            c = [wx / ws, wy / ws];
        }
    } else {
        // damped gradient steps with step halving
        let mut step = 1.0;
        for _ in 0..50 {
            let (mut gx, mut gy, mut h) = (0.0, 0.0, 0.0);
            for p in pts {
                let d = dist(q, p, &c);
                let w = r * d.powf(r - 2.0);
                gx += w * (c[0] - p[0]);
                gy += w * (c[1] - p[1]);
                h += r * (r - 1.0) * d.powf(r - 2.0);
            }
            if h == 0.0 {
                break;
            }
            let cur = cell_cost(q, pts, &c, r);
            let mut next = [c[0] - step * gx / h, c[1] - step * gy / h];
            while cell_cost(q, pts, &next, r) > cur && step > 1e-6 {
                step *= 0.5;
                next = [c[0] - step * gx / h, c[1] - step * gy / h];
            }
            if (next[0] - c[0]).abs() + (next[1] - c[1]).abs() < 1e-15 {
                break;
            }
            c = next;
        }
    }
    if cell_cost(q, pts, &c, r) <= before {
        c
    } else {
        *old
    }
}

/// `k`-means++ style seeding with `D^r` weights.
fn init_centers(q: usize, points: &[Point], k: usize, r: f64, rng: &mut ChaCha8Rng) -> Vec<Point> {
    let mut centers = vec![points[rng.gen_range(0..points.len())]];
    let mut d: Vec<f64> = points.iter().map(|p| cost(dist(q, p, &centers[0]), r)).collect();
    while centers.len() < k {
        let total: f64 = d.iter().sum();
        let next = if total > 0.0 {
            let mut target = rng.gen::<f64>() * total;
            let mut idx = points.len() - 1;
            for (i, &w) in d.iter().enumerate() {
                if target < w {
                    idx = i;
                    break;
                }
                target -= w;
            }
            idx
        } else {
            rng.gen_range(0..points.len())
        };
        let c = points[next];
        for (di, p) in d.iter_mut().zip(points) {
            *di = di.min(cost(dist(q, p, &c), r));
        }
        centers.push(c);
    }
    centers
}

/// Nearest center per point. For `q = 1`, `points` must be sorted and the
/// centers are sorted in place so a single sweep over midpoints suffices.
fn assign(q: usize, points: &[Point], centers: &mut [Point], labels: &mut [usize]) {
    if q == 1 {
        centers.sort_by(|a, b| a[0].total_cmp(&b[0]));
        let mut j = 0;
        for (p, l) in points.iter().zip(labels.iter_mut()) {
            while j + 1 < centers.len() && p[0] > 0.5 * (centers[j][0] + centers[j + 1][0]) {
                j += 1;
            }
            *l = j;
        }
    } else {
        for (p, l) in points.iter().zip(labels.iter_mut()) {
            let mut best = (f64::INFINITY, 0);
            for (j, c) in centers.iter().enumerate() {
                let d = dist(q, p, c);
                if d < best.0 {
                    best = (d, j);
                }
            }
            *l = best.1;
        }
    }
}

fn total_cost(q: usize, points: &[Point], centers: &[Point], labels: &[usize], r: f64) -> f64 {
    points.iter().zip(labels).map(|(p, &l)| cost(dist(q, p, &centers[l]), r)).sum::<f64>() / points.len() as f64
}

fn lloyd_run(q: usize, points: &[Point], k: usize, r: f64, opts: &LloydOptions, rng: &mut ChaCha8Rng) -> Codebook {
    let mut centers = init_centers(q, points, k, r, rng);
    let mut labels = vec![0usize; points.len()];
    assign(q, points, &mut centers, &mut labels);
    let mut current = total_cost(q, points, &centers, &labels, r);
    let mut history = vec![current];
    let mut iterations = 0;
    for _ in 0..opts.max_iter {
        iterations += 1;
        let mut cells: Vec<Vec<&Point>> = vec![Vec::new(); k];
        for (p, &l) in points.iter().zip(&labels) {
            cells[l].push(p);
        }
        for j in 0..k {
            if cells[j].is_empty() {
                // reseed an empty cell at the point farthest from its center
                let far = points
                    .iter()
                    .zip(&labels)
                    .max_by(|a, b| dist(q, a.0, &centers[*a.1]).total_cmp(&dist(q, b.0, &centers[*b.1])))
                    .map(|(p, _)| *p)
                    .unwrap();
                centers[j] = far;
            } else {
                centers[j] = update_center(q, &cells[j], &centers[j], r);
            }
        }
        assign(q, points, &mut centers, &mut labels);
        let next = total_cost(q, points, &centers, &labels, r);
        debug_assert!(next <= current * (1.0 + 1e-12) + 1e-300, "distortion increased: {current} -> {next}");
        history.push(next);
        let improved = (current - next) / current.max(f64::MIN_POSITIVE);
        current = next;
        if improved < opts.rel_tol {
            break;
        }
    }
    Codebook { q, points: centers, distortion: current, iterations, history }
}

/// Best of `opts.restarts` Lloyd runs in the `L_r` distortion.
pub fn lloyd(points: &[Point], q: usize, k: usize, r: f64, seed: u64, opts: LloydOptions) -> Result<Codebook> {
    if k == 0 || points.is_empty() {
        return Err(Error::InvalidSpec("lloyd needs k >= 1 and at least one point".into()));
    }
    if !(q == 1 || q == 2) {
        return Err(Error::InvalidSpec(format!("dimension q = {q} is not supported")));
    }
    if !(r >= 1.0) {
        return Err(Error::InvalidSpec("lloyd needs r >= 1".into()));
    }
    let mut pts = points.to_vec();
    if q == 1 {
        pts.sort_by(|a, b| a[0].total_cmp(&b[0]));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<Codebook> = None;
    for _ in 0..opts.restarts.max(1) {
        let cb = lloyd_run(q, &pts, k.min(pts.len()), r, &opts, &mut rng);
        if best.as_ref().is_none_or(|b| cb.distortion < b.distortion) {
            best = Some(cb);
        }
    }
    Ok(best.unwrap())
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalDimension {
    /// `(k, e_{k,r}^r)` with the empirical distortion.
    pub rows: Vec<(usize, f64)>,
    /// Fit of `log k` against `−log e_{k,r}`.
    pub fit: LinearFit,
    pub samples: usize,
    pub depth: usize,
    pub seed: u64,
}

/// Sample `μ`, quantize for every `k` and regress `log k` on `−log e_{k,r}`.
/// The values are "≍ up to constants": only the slope is meaningful.
pub fn empirical_dimension(
    spec: &SystemSpec,
    k_list: &[usize],
    samples: usize,
    seed: u64,
    opts: LloydOptions,
) -> Result<EmpiricalDimension> {
    let g = spec.geometry().ok_or(Error::MissingGeometry)?;
    let depth = sampling_depth(spec);
    let points = sample_mu(spec, samples, depth, seed)?;
    let r = spec.r();
    let mut rows = Vec::with_capacity(k_list.len());
    for (idx, &k) in k_list.iter().enumerate() {
        let cb = lloyd(&points, g.q(), k, r, seed.wrapping_add(1 + idx as u64), opts)?;
        rows.push((k, cb.distortion));
    }
    let x: Vec<f64> = rows.iter().map(|&(_, d)| -d.ln() / r).collect();
    let y: Vec<f64> = rows.iter().map(|&(k, _)| (k as f64).ln()).collect();
    let fit = linear_fit(&x, &y)?;
    Ok(EmpiricalDimension { rows, fit, samples, depth, seed })
}
