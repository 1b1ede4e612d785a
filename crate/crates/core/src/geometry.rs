//! Similitudes, seed sets and cylinder realizations in dimension 1 or 2,
//! strong separation checks and the truncated coding map used for sampling.
//!
//! Seeds are closed intervals (`q = 1`) or axis-aligned boxes (`q = 2`).
//! Orthogonal parts are restricted to reflections and quarter turns so that
//! images of boxes stay axis aligned and containment can be checked exactly.

use serde_json::Value;

use crate::error::{Error, Result};
use crate::model::{parse_cell_key, SystemSpec};
use crate::symbolic::{LiftedWord, ProjectedWord};

const DIAM_TOL: f64 = 1e-12;

/// Closed axis-aligned box; in `q = 1` only the first coordinate is used.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Region {
    pub q: usize,
    pub lo: [f64; 2],
    pub hi: [f64; 2],
}

impl Region {
    pub fn interval(a: f64, b: f64) -> Self {
        Self { q: 1, lo: [a, 0.0], hi: [b, 0.0] }
    }

    pub fn rect(x: (f64, f64), y: (f64, f64)) -> Self {
        Self { q: 2, lo: [x.0, y.0], hi: [x.1, y.1] }
    }

    pub fn diameter(&self) -> f64 {
        (0..self.q).map(|k| (self.hi[k] - self.lo[k]).powi(2)).sum::<f64>().sqrt()
    }

    pub fn centroid(&self) -> [f64; 2] {
        [0.5 * (self.lo[0] + self.hi[0]), 0.5 * (self.lo[1] + self.hi[1])]
    }

    pub fn distance(&self, other: &Region) -> f64 {
        (0..self.q)
            .map(|k| {
                let gap = (other.lo[k] - self.hi[k]).max(self.lo[k] - other.hi[k]).max(0.0);
                gap * gap
            })
            .sum::<f64>()
            .sqrt()
    }

    pub fn contains_region(&self, other: &Region, tol: f64) -> bool {
        (0..self.q).all(|k| other.lo[k] >= self.lo[k] - tol && other.hi[k] <= self.hi[k] + tol)
    }

    pub fn contains_point(&self, x: &[f64], tol: f64) -> bool {
        (0..self.q).all(|k| x[k] >= self.lo[k] - tol && x[k] <= self.hi[k] + tol)
    }

    /// Interiors intersect.
    pub fn overlaps(&self, other: &Region) -> bool {
        (0..self.q).all(|k| self.lo[k] < other.hi[k] && other.lo[k] < self.hi[k])
    }
}

/// Affine map `x ↦ M x + t` on `ℝ^q`, `q ≤ 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Affine {
    pub m: [[f64; 2]; 2],
    pub t: [f64; 2],
}

impl Affine {
    pub const IDENTITY: Affine = Affine { m: [[1.0, 0.0], [0.0, 1.0]], t: [0.0, 0.0] };

    #[inline]
    pub fn apply(&self, x: [f64; 2]) -> [f64; 2] {
        [
            self.m[0][0] * x[0] + self.m[0][1] * x[1] + self.t[0],
            self.m[1][0] * x[0] + self.m[1][1] * x[1] + self.t[1],
        ]
    }

    /// `self ∘ other`.
    #[inline]
    pub fn compose(&self, other: &Affine) -> Affine {
        let a = &self.m;
        let b = &other.m;
        Affine {
            m: [
                [a[0][0] * b[0][0] + a[0][1] * b[1][0], a[0][0] * b[0][1] + a[0][1] * b[1][1]],
                [a[1][0] * b[0][0] + a[1][1] * b[1][0], a[1][0] * b[0][1] + a[1][1] * b[1][1]],
            ],
            t: self.apply(other.t),
        }
    }

    pub fn apply_region(&self, r: &Region) -> Region {
        let a = self.apply(r.lo);
        let b = self.apply(r.hi);
        let mut lo = [0.0; 2];
        let mut hi = [0.0; 2];
        for k in 0..2 {
            lo[k] = a[k].min(b[k]);
            hi[k] = a[k].max(b[k]);
        }
        if r.q == 1 {
            lo[1] = 0.0;
            hi[1] = 0.0;
        }
        Region { q: r.q, lo, hi }
    }
}

/// Contracting similitude `x ↦ ratio·O x + translate` with `O` a reflection
/// and/or a quarter turn.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Similitude {
    ratio: f64,
    q: usize,
    reflect: bool,
    quarter_turns: u8,
    translate: [f64; 2],
}

impl Similitude {
    pub fn new(q: usize, ratio: f64, translate: &[f64], reflect: bool, quarter_turns: u8) -> Result<Self> {
        if !(ratio > 0.0 && ratio < 1.0) {
            return Err(Error::Config(format!("similitude ratio must lie in (0,1), got {ratio}")));
        }
        if !(q == 1 || q == 2) || translate.len() != q {
            return Err(Error::Config(format!("translation must have {q} components")));
        }
        if q == 1 && !quarter_turns.is_multiple_of(4) {
            return Err(Error::Config("rotations need q = 2".into()));
        }
        let mut t = [0.0; 2];
        t[..q].copy_from_slice(translate);
        Ok(Self { ratio, q, reflect, quarter_turns: quarter_turns % 4, translate: t })
    }

    pub fn ratio(&self) -> f64 {
        self.ratio
    }

    pub fn affine(&self) -> Affine {
        let s = self.ratio;
        let m = if self.q == 1 {
            [[if self.reflect { -s } else { s }, 0.0], [0.0, 0.0]]
        } else {
            // reflection across the x-axis, then the rotation
            let f = if self.reflect { -1.0 } else { 1.0 };
            let (c, sn) = match self.quarter_turns {
                0 => (1.0, 0.0),
                1 => (0.0, 1.0),
                2 => (-1.0, 0.0),
                _ => (0.0, -1.0),
            };
            [[s * c, -s * sn * f], [s * sn, s * c * f]]
        };
        Affine { m, t: self.translate }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut p = [0.0; 2];
        p[..self.q].copy_from_slice(&x[..self.q]);
        self.affine().apply(p)[..self.q].to_vec()
    }
}

/// Seeds `J_i` and one similitude per cell of `S_2`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeometrySpec {
    q: usize,
    seeds: Vec<Region>,
    maps: Vec<Option<Similitude>>,
    affines: Vec<Affine>,
}

impl GeometrySpec {
    pub fn new(q: usize, seeds: Vec<Region>, maps: Vec<Option<Similitude>>) -> Result<Self> {
        let n = seeds.len();
        if !(q == 1 || q == 2) {
            return Err(Error::Config(format!("geometry dimension must be 1 or 2, got {q}")));
        }
        if maps.len() != n * n {
            return Err(Error::Config(format!("geometry needs {n}x{n} map slots")));
        }
        if seeds.iter().any(|s| s.q != q) || maps.iter().flatten().any(|m| m.q != q) {
            return Err(Error::Config("mixed dimensions in geometry".into()));
        }
        let affines = maps.iter().map(|m| m.map(|m| m.affine()).unwrap_or(Affine::IDENTITY)).collect();
        Ok(Self { q, seeds, maps, affines })
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn n_base(&self) -> usize {
        self.seeds.len()
    }

    pub fn seed(&self, i: usize) -> &Region {
        &self.seeds[i]
    }

    pub fn map(&self, i: usize, j: usize) -> Option<&Similitude> {
        self.maps[i * self.n_base() + j].as_ref()
    }

    #[inline]
    pub fn cell_affine(&self, i: usize, j: usize) -> &Affine {
        &self.affines[i * self.n_base() + j]
    }

    /// Maps exist exactly on the nonempty cells and carry the system's ratios.
    pub fn check_against(&self, spec: &SystemSpec) -> Result<()> {
        let n = spec.n_base();
        if self.n_base() != n {
            return Err(Error::Config(format!("geometry has {} seeds, system has N = {n}", self.n_base())));
        }
        for i in 0..n {
            for j in 0..n {
                let want = spec.graph().cell_nonempty(i, j);
                match (self.map(i, j), want) {
                    (Some(m), true) => {
                        if (m.ratio() - spec.ratio(i, j)).abs() > 1e-12 {
                            return Err(Error::Config(format!(
                                "map ({},{}) has ratio {} but the cell ratio is {}",
                                i + 1,
                                j + 1,
                                m.ratio(),
                                spec.ratio(i, j)
                            )));
                        }
                    }
                    (None, true) => {
                        return Err(Error::Config(format!("missing map for cell ({},{})", i + 1, j + 1)))
                    }
                    (Some(_), false) => {
                        return Err(Error::Config(format!(
                            "map given for cell ({},{}) with no realized edge",
                            i + 1,
                            j + 1
                        )))
                    }
                    (None, false) => {}
                }
            }
        }
        Ok(())
    }

    /// `T_σ` as an affine map.
    pub fn word_map(&self, sigma: &[usize]) -> Affine {
        let mut acc = Affine::IDENTITY;
        for w in sigma.windows(2) {
            acc = acc.compose(self.cell_affine(w[0], w[1]));
        }
        acc
    }
}

/// `J_σ = T_σ(J_{σ_n})` and its diameter.
pub fn cylinder_set(sigma: &ProjectedWord, spec: &SystemSpec) -> Result<(Region, f64)> {
    let g = spec.geometry().ok_or(Error::MissingGeometry)?;
    if !crate::symbolic::in_sn(sigma, spec.graph()) {
        return Err(Error::Inadmissible { word: sigma.to_string(), reason: "not in S_n".into() });
    }
    let region = g.word_map(sigma.letters()).apply_region(g.seed(sigma.last()));
    let d = region.diameter();
    Ok((region, d))
}

/// Truncated coding map: `T_{project(w)}` applied to the centroid of the terminal seed.
pub fn realize_point(w: &LiftedWord, spec: &SystemSpec) -> Result<Vec<f64>> {
    let g = spec.geometry().ok_or(Error::MissingGeometry)?;
    if !w.is_admissible(spec.graph()) || w.is_empty() {
        return Err(Error::Inadmissible { word: w.to_string(), reason: "not a path of the graph".into() });
    }
    let n = spec.n_base();
    let base: Vec<usize> = w.letters().iter().map(|&l| l % n).collect();
    let x = g.word_map(&base).apply(g.seed(*base.last().unwrap()).centroid());
    Ok(x[..g.q()].to_vec())
}

/// Check strong separation and return the separation constant `δ`: the largest
/// value with `d(J_i,J_j) ≥ δ max(|J_i|,|J_j|)` and
/// `d(J_{i,j},J_{i,l}) ≥ δ max(|J_{i,j}|,|J_{i,l}|)`.
pub fn validate_geometry(g: &GeometrySpec) -> Result<f64> {
    let n = g.n_base();
    for (i, s) in g.seeds.iter().enumerate() {
        if (s.diameter() - 1.0).abs() > DIAM_TOL {
            return Err(Error::Separation(format!("seed J_{} has diameter {} (expected 1)", i + 1, s.diameter())));
        }
    }
    let mut delta = f64::INFINITY;
    for i in 0..n {
        for j in i + 1..n {
            let (a, b) = (&g.seeds[i], &g.seeds[j]);
            let d = a.distance(b);
            if d <= 0.0 {
                return Err(Error::Separation(format!("seeds J_{} and J_{} intersect", i + 1, j + 1)));
            }
            delta = delta.min(d / a.diameter().max(b.diameter()));
        }
    }
    for i in 0..n {
        let images: Vec<(usize, Region)> = (0..n)
            .filter(|&j| g.map(i, j).is_some())
            .map(|j| (j, g.cell_affine(i, j).apply_region(&g.seeds[j])))
            .collect();
        for (j, img) in &images {
            if !g.seeds[i].contains_region(img, DIAM_TOL) {
                return Err(Error::Separation(format!(
                    "image T_{{{},{}}}(J_{}) is not contained in J_{}",
                    i + 1,
                    j + 1,
                    j + 1,
                    i + 1
                )));
            }
        }
        for (x, (j, a)) in images.iter().enumerate() {
            for (l, b) in &images[x + 1..] {
                let d = a.distance(b);
                if d <= 0.0 {
                    return Err(Error::Separation(format!(
                        "cylinders J_({},{}) and J_({},{}) intersect",
                        i + 1,
                        j + 1,
                        i + 1,
                        l + 1
                    )));
                }
                delta = delta.min(d / a.diameter().max(b.diameter()));
            }
        }
    }
    Ok(delta)
}

/// Default layout: unit seeds spaced by gaps of 1; the children of row `i`
/// are placed inside `J_i` in increasing `j`, the first at the left edge and
/// the last at the right edge with equal gaps in between. In the plane the
/// seeds are squares of unit diameter and children sit along the diagonal.
pub fn corner_layout(spec: &SystemSpec, q: usize) -> Result<GeometrySpec> {
    let n = spec.n_base();
    let side = if q == 2 { std::f64::consts::FRAC_1_SQRT_2 } else { 1.0 };
    let origin = |i: usize| 2.0 * i as f64;
    let seeds: Vec<Region> = (0..n)
        .map(|i| {
            if q == 1 {
                Region::interval(origin(i), origin(i) + 1.0)
            } else {
                Region::rect((origin(i), origin(i) + side), (0.0, side))
            }
        })
        .collect();
    let mut maps = vec![None; n * n];
    for i in 0..n {
        let kids: Vec<usize> = (0..n).filter(|&j| spec.graph().cell_nonempty(i, j)).collect();
        let total: f64 = kids.iter().map(|&j| spec.ratio(i, j)).sum();
        if total >= 1.0 {
            return Err(Error::Separation(format!(
                "ratios of row {} sum to {total}; children cannot be disjoint",
                i + 1
            )));
        }
        let gap = if kids.len() > 1 { (1.0 - total) / (kids.len() - 1) as f64 } else { 0.0 };
        let mut pos = 0.0;
        for &j in &kids {
            let s = spec.ratio(i, j);
            // child seed lower corner goes to the lower corner of its slot
            let tx = origin(i) + pos * side - s * origin(j);
            let translate: Vec<f64> = if q == 1 { vec![tx] } else { vec![tx, pos * side] };
            maps[i * n + j] = Some(Similitude::new(q, s, &translate, false, 0)?);
            pos += s + gap;
        }
    }
    GeometrySpec::new(q, seeds, maps)
}

fn as_f64(v: &Value, what: &str) -> Result<f64> {
    v.as_f64().ok_or_else(|| Error::Config(format!("{what} must be a number")))
}

fn as_pair(v: &Value, what: &str) -> Result<(f64, f64)> {
    match v.as_array().map(|a| a.as_slice()) {
        Some([a, b]) => Ok((as_f64(a, what)?, as_f64(b, what)?)),
        _ => Err(Error::Config(format!("{what} must be a pair [lo, hi]"))),
    }
}

/// Parse the `geometry` block of a configuration document.
///
/// `{"q":1, "seeds":[[a,b],...], "maps":{"i,j":{"ratio":s,"translate":[..],"reflect":false}}}`;
/// with `q = 2` each seed is `[[x0,x1],[y0,y1]]` and maps accept `"rotate"` in quarter turns.
pub fn parse_geometry_json(v: &Value, n: usize) -> Result<GeometrySpec> {
    let obj = v.as_object().ok_or_else(|| Error::Config("geometry must be an object".into()))?;
    for key in obj.keys() {
        if !["q", "seeds", "maps"].contains(&key.as_str()) {
            return Err(Error::Config(format!("unknown geometry field {key:?}")));
        }
    }
    let q = obj.get("q").and_then(Value::as_u64).ok_or_else(|| Error::Config("geometry.q missing".into()))? as usize;
    let seeds_v = obj
        .get("seeds")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::Config("geometry.seeds missing".into()))?;
    if seeds_v.len() != n {
        return Err(Error::Config(format!("geometry.seeds must have {n} entries")));
    }
    let seeds = seeds_v
        .iter()
        .map(|s| match q {
            1 => as_pair(s, "seed").map(|(a, b)| Region::interval(a, b)),
            2 => match s.as_array().map(|a| a.as_slice()) {
                Some([x, y]) => Ok(Region::rect(as_pair(x, "seed x")?, as_pair(y, "seed y")?)),
                _ => Err(Error::Config("2D seed must be [[x0,x1],[y0,y1]]".into())),
            },
            _ => Err(Error::Config(format!("geometry dimension must be 1 or 2, got {q}"))),
        })
        .collect::<Result<Vec<_>>>()?;
    let maps_v = obj
        .get("maps")
        .and_then(Value::as_object)
        .ok_or_else(|| Error::Config("geometry.maps missing".into()))?;
    let mut maps = vec![None; n * n];
    for (key, m) in maps_v {
        let (i, j) = parse_cell_key(key, n)?;
        let mo = m.as_object().ok_or_else(|| Error::Config(format!("map {key} must be an object")))?;
        for k in mo.keys() {
            if !["ratio", "translate", "reflect", "rotate"].contains(&k.as_str()) {
                return Err(Error::Config(format!("unknown map field {k:?}")));
            }
        }
        let ratio = as_f64(mo.get("ratio").unwrap_or(&Value::Null), "ratio")?;
        let translate = mo
            .get("translate")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Config(format!("map {key} needs translate")))?
            .iter()
            .map(|x| as_f64(x, "translate"))
            .collect::<Result<Vec<_>>>()?;
        let reflect = mo.get("reflect").and_then(Value::as_bool).unwrap_or(false);
        let rotate = mo.get("rotate").and_then(Value::as_u64).unwrap_or(0) as u8;
        maps[i * n + j] = Some(Similitude::new(q, ratio, &translate, reflect, rotate)?);
    }
    GeometrySpec::new(q, seeds, maps)
}
