//! Command-line front end. Each command produces one CSV (with a `#`
//! manifest header) and a short human summary.

use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};
use crate::measure::{
    classify_reducibility, equivalence_probe, q_display, EquivalenceVerdict, NotReducibleSource,
    ReducibilityOptions, ReducibilityStatus, SurrogateKind,
};
use crate::model::{
    from_json_file, load_fixture_with, parse_rational, validate, Case, Probs, SystemSpec, DEFAULT_R, DEFAULT_RATIO,
};
use crate::quantization::{
    curve_dimension, empirical_dimension, error_curve_with, LloydOptions, DEFAULT_STATE_CAP, EXACT_RESOLUTION,
};
use crate::report::{num, opt_num, RunManifest, Table};
use crate::spectral::{
    dimension_report, small_r_scan, solve_dimension_root, strictness_test, Pressure, RootKind, DEFAULT_NMAX, ROOT_TOL,
};

#[derive(Debug, Parser)]
#[command(name = "overlap-quant", version, about = "Quantization dimensions of Markov-type measures with complete overlaps")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Source {
    /// JSON system description.
    #[arg(long, conflicts_with = "fixture", required_unless_present = "fixture")]
    pub config: Option<PathBuf>,
    /// Built-in example system.
    #[arg(long)]
    pub fixture: Option<String>,
    /// Quantization order.
    #[arg(long)]
    pub r: Option<f64>,
    /// Uniform cell ratio for fixtures.
    #[arg(long)]
    pub ratio: Option<f64>,
    /// Write the CSV here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the standing assumptions and report the regime.
    Validate {
        #[command(flatten)]
        source: Source,
    },
    /// Dimension roots s_{1,r}, s_{2,r}, s_r, a_r and the bracketed t_r.
    Dims {
        #[command(flatten)]
        source: Source,
        /// Enumeration depth for the pressure function.
        #[arg(long, default_value_t = DEFAULT_NMAX)]
        nmax: usize,
        /// Bisection tolerance for the spectral roots.
        #[arg(long, default_value_t = ROOT_TOL)]
        tol: f64,
        /// Also write a pressure table (t, u, log T_n, Φ̂, Φ_lo, Φ_hi) here.
        #[arg(long)]
        pressure_out: Option<PathBuf>,
    },
    /// Decide whether μ is a Markov measure on the base alphabet.
    Reducibility {
        #[command(flatten)]
        source: Source,
        /// `uniform-pair` or a comma list of 2N rationals.
        #[arg(long)]
        chi: Option<String>,
        /// Search depth for counterexamples.
        #[arg(long, default_value_t = 12)]
        depth: usize,
        /// Skip the exact span-closure certificate (may answer UNKNOWN).
        #[arg(long)]
        no_closure: bool,
    },
    /// Anti-chain sizes, error surrogates and F-values over a range of k.
    Antichain {
        #[command(flatten)]
        source: Source,
        /// Range `A..B`.
        #[arg(long, default_value = "1..12")]
        k: String,
        /// Exponent for F: a number, `sr` or `tr`.
        #[arg(long)]
        s: Option<String>,
        #[arg(long, default_value_t = DEFAULT_NMAX)]
        nmax: usize,
        /// Bound on distinct states expanded in the word tree.
        #[arg(long, default_value_t = DEFAULT_STATE_CAP)]
        states: u64,
        /// Merge energy vectors whose logs agree to this width (approximate φ).
        #[arg(long)]
        resolution: Option<f64>,
    },
    /// Sample μ, run Lloyd for several k and fit the dimension.
    Quantize {
        #[command(flatten)]
        source: Source,
        /// `A..B` (powers of two from A to B) or a comma list.
        #[arg(long, default_value = "8..128")]
        k: String,
        #[arg(long, default_value_t = 200_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 2)]
        restarts: usize,
        /// Relative improvement at which Lloyd stops.
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Decay rates of μ along simple cycles and the surrogate comparison.
    Rates {
        #[command(flatten)]
        source: Source,
        /// Longest cycle considered.
        #[arg(long, default_value_t = 3)]
        cycles: usize,
        /// `ptilde`, `phat-g1` or `phat-g2`.
        #[arg(long, default_value = "ptilde")]
        surrogate: String,
    },
    /// Block roots s_{1,r}, s_{2,r} over a grid of r.
    ScanR {
        #[command(flatten)]
        source: Source,
        /// Comma list of r values; default is 13 points from 0.001 to 10.
        #[arg(long)]
        grid: Option<String>,
    },
}

impl Command {
    pub fn source(&self) -> &Source {
        match self {
            Command::Validate { source }
            | Command::Dims { source, .. }
            | Command::Reducibility { source, .. }
            | Command::Antichain { source, .. }
            | Command::Quantize { source, .. }
            | Command::Rates { source, .. }
            | Command::ScanR { source, .. } => source,
        }
    }
}

/// Result of a command: the CSV (manifest included), a summary and the exit code.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub csv: String,
    pub summary: String,
    pub exit_code: u8,
}

pub fn load_source(src: &Source) -> Result<(SystemSpec, String)> {
    match (&src.config, &src.fixture) {
        (Some(path), _) => {
            let mut spec = from_json_file(path)?;
            if let Some(r) = src.r {
                spec = spec.with_r(r)?;
            }
            if src.ratio.is_some() {
                return Err(Error::Config("--ratio applies to fixtures only".into()));
            }
            Ok((spec, path.display().to_string()))
        }
        (None, Some(name)) => {
            let spec = load_fixture_with(name, src.ratio.unwrap_or(DEFAULT_RATIO), src.r.unwrap_or(DEFAULT_R))?;
            Ok((spec, name.clone()))
        }
        (None, None) => Err(Error::Config("one of --config or --fixture is required".into())),
    }
}

/// `A..B` as an inclusive range.
pub fn parse_range(s: &str) -> Result<(usize, usize)> {
    let bad = || Error::Config(format!("bad range {s:?} (expected A..B)"));
    let (a, b) = s.split_once("..").ok_or_else(bad)?;
    let a: usize = a.trim().parse().map_err(|_| bad())?;
    let b: usize = b.trim().parse().map_err(|_| bad())?;
    if a == 0 || b < a {
        return Err(bad());
    }
    Ok((a, b))
}

/// `A..B` as the powers of two in `[A, B]` starting at `A`, or a comma list.
pub fn parse_k_list(s: &str) -> Result<Vec<usize>> {
    if s.contains("..") {
        let (a, b) = parse_range(s)?;
        let mut out = Vec::new();
        let mut k = a;
        while k <= b {
            out.push(k);
            k *= 2;
        }
        return Ok(out);
    }
    s.split(',')
        .map(|x| x.trim().parse::<usize>().map_err(|_| Error::Config(format!("bad k value {x:?}"))))
        .collect()
}

fn parse_f64_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|_| Error::Config(format!("bad number {x:?}"))))
        .collect()
}

fn apply_chi(spec: SystemSpec, chi: &str) -> Result<SystemSpec> {
    let size = spec.size();
    if chi == "uniform-pair" {
        let q = parse_rational(&format!("1/{size}"))?;
        return spec.with_chi(Probs::Exact(vec![q; size]));
    }
    let exact: Result<Vec<_>> = chi.split(',').map(|x| parse_rational(x.trim())).collect();
    spec.with_chi(Probs::Exact(exact?))
}

pub fn run(cli: &Cli) -> Result<Outcome> {
    let started = Instant::now();
    let (mut spec, source) = load_source(cli.command.source())?;
    let mut manifest;
    let mut table;
    let mut summary = String::new();
    let mut exit_code = 0;
    match &cli.command {
        Command::Validate { .. } => {
            manifest = RunManifest::new("validate", &source);
            let rep = validate(&spec);
            table = Table::new(&["flag", "pass", "witnesses"]);
            for f in rep.flags() {
                let w: Vec<String> = f.witnesses.iter().map(|w| w.to_string()).collect();
                table.push(vec![f.name.to_string(), f.pass.to_string(), w.join(" ")]);
            }
            let case = match rep.case {
                Case::CaseI => "Case I (A1-A3)",
                Case::CaseII => "Case II (A2, A4, A5, P irreducible)",
                Case::Other => "none",
            };
            summary.push_str(&format!("regime: {case}\n"));
            for f in rep.flags() {
                let first = f.first_witness().map(|w| format!(" first witness {w}")).unwrap_or_default();
                summary.push_str(&format!("  {:<16} {}{}\n", f.name, if f.pass { "pass" } else { "FAIL" }, first));
            }
            if rep.case == Case::Other {
                exit_code = 2;
            }
        }
        Command::Dims { nmax, tol, pressure_out, .. } => {
            manifest = RunManifest::new("dims", &source).param("r", spec.r()).param("nmax", nmax).param("tol", tol);
            let mut rep = dimension_report(&spec, *nmax)?;
            if *tol != ROOT_TOL {
                rep.sr = solve_dimension_root(&spec, RootKind::Full, *tol)?;
            }
            table = Table::new(&["r", "s1r", "s2r", "sr", "ar", "hat", "tr_lo", "tr", "tr_hi", "nmax"]);
            table.push(vec![
                num(rep.r),
                opt_num(rep.s1r),
                opt_num(rep.s2r),
                num(rep.sr),
                opt_num(rep.ar.map(|a| a.1)),
                rep.ar.map(|a| a.0.name().to_string()).unwrap_or_default(),
                opt_num(rep.tr.as_ref().map(|t| t.tr_lo)),
                opt_num(rep.tr.as_ref().map(|t| t.tr)),
                opt_num(rep.tr.as_ref().map(|t| t.tr_hi)),
                nmax.to_string(),
            ]);
            summary.push_str(&format!("s_r = {:.10}\n", rep.sr));
            if let (Some(a), Some(b)) = (rep.s1r, rep.s2r) {
                summary.push_str(&format!("s_1r = {a:.10}, s_2r = {b:.10}\n"));
            }
            if let Some((h, a)) = rep.ar {
                summary.push_str(&format!("a_r = {a:.10} ({} regime)\n", h.name()));
                if let Ok(st) = strictness_test(&spec, a) {
                    summary.push_str(&format!(
                        "strictness: {} (margin {:.3e} at component {})\n",
                        if st.certified { "ρ(a_r) > 1 certified" } else { "inconclusive" },
                        st.margin,
                        st.index + 1
                    ));
                }
            }
            if let Some(t) = &rep.tr {
                summary.push_str(&format!(
                    "t_r = {:.6} in [{:.6}, {:.6}] at n_max = {} (bracket from the quasi-multiplicativity constants)\n",
                    t.tr, t.tr_lo, t.tr_hi, t.n_max
                ));
                if let Some(path) = pressure_out {
                    let p = Pressure::new(&spec, *nmax)?;
                    let mut pt = Table::new(&["t", "s", "log_T_n", "phi_hat", "phi_lo", "phi_hi"]);
                    let top = 1.5 * rep.sr;
                    for i in 1..=30 {
                        let t = top * i as f64 / 30.0;
                        let e = p.at_dimension(t);
                        pt.push(vec![
                            num(t),
                            num(e.s),
                            num(*e.log_tn.last().unwrap()),
                            num(e.phi_hat),
                            num(e.phi_lo),
                            num(e.phi_hi),
                        ]);
                    }
                    let mut f = std::fs::File::create(path)?;
                    pt.write(&RunManifest::new("dims/pressure", &source).param("nmax", nmax), &mut f)?;
                }
            }
        }
        Command::Reducibility { chi, depth, no_closure, .. } => {
            if let Some(c) = chi {
                spec = apply_chi(spec, c)?;
            }
            manifest = RunManifest::new("reducibility", &source)
                .param("chi", chi.as_deref().unwrap_or("default"))
                .param("depth", depth)
                .param("closure", !no_closure);
            let v = classify_reducibility(&spec, ReducibilityOptions { depth_max: *depth, span_closure: !no_closure })?;
            table = Table::new(&["sigma", "j", "delta", "delta_exact"]);
            match &v.status {
                ReducibilityStatus::Reducible(cert) => {
                    summary.push_str(&format!("REDUCIBLE ({cert:?})\n"));
                }
                ReducibilityStatus::NotReducible { witnesses, source: src } => {
                    summary.push_str("NOT_REDUCIBLE\n");
                    if let NotReducibleSource::CaseICells(cells) = src {
                        let c: Vec<String> = cells.iter().map(|(i, j)| format!("({},{})", i + 1, j + 1)).collect();
                        summary.push_str(&format!("  identity fails at {}\n", c.join(" ")));
                    }
                    for c in witnesses {
                        for (j, d) in c.letters.iter().zip(&c.deltas) {
                            table.push(vec![
                                c.sigma.to_string(),
                                (j + 1).to_string(),
                                num(d.value),
                                d.exact.as_ref().map(q_display).unwrap_or_default(),
                            ]);
                        }
                        summary.push_str(&format!("  witness {c}\n"));
                    }
                }
                ReducibilityStatus::Unknown { depth } => {
                    summary.push_str(&format!("UNKNOWN (no counterexample up to length {depth})\n"));
                }
            }
        }
        Command::Antichain { k, s, nmax, states, resolution, .. } => {
            let (k_lo, k_hi) = parse_range(k)?;
            let s_val = match s.as_deref() {
                None => None,
                Some("sr") => Some(solve_dimension_root(&spec, RootKind::Full, ROOT_TOL)?),
                Some("tr") => {
                    if validate(&spec).case == Case::CaseII {
                        Some(crate::spectral::solve_tr(&spec, *nmax)?.tr)
                    } else {
                        Some(solve_dimension_root(&spec, RootKind::Full, ROOT_TOL)?)
                    }
                }
                Some(v) => Some(v.parse::<f64>().map_err(|_| Error::Config(format!("bad --s value {v:?}")))?),
            };
            manifest = RunManifest::new("antichain", &source)
                .param("r", spec.r())
                .param("k", format!("{k_lo}..{k_hi}"))
                .param("s", opt_num(s_val))
                .param("states", states)
                .param("resolution", num(resolution.unwrap_or(EXACT_RESOLUTION)));
            let s_list: Vec<f64> = s_val.into_iter().collect();
            let curve = error_curve_with(&spec, k_lo, k_hi, &s_list, *states, resolution.unwrap_or(EXACT_RESOLUTION))?;
            table = Table::new(&["k", "phi", "surrogate", "log_surrogate", "l1", "l2", "log_F"]);
            for row in &curve.rows {
                table.push(vec![
                    row.k.to_string(),
                    row.phi.to_string(),
                    num(row.surrogate()),
                    num(row.log_surrogate),
                    row.l1.to_string(),
                    row.l2.to_string(),
                    row.log_f.first().map(|&x| num(x)).unwrap_or_default(),
                ]);
            }
            summary.push_str(&format!("visited {} words ({} distinct states)\n", curve.nodes, curve.states));
            if let Ok(fit) = curve_dimension(&curve, spec.r(), k_lo, k_hi) {
                summary.push_str(&format!(
                    "slope of log φ against -(1/r) log surrogate: {:.6} (R² {:.6})\n",
                    fit.slope, fit.r2
                ));
            }
            if let Some(sv) = s_val {
                let fs: Vec<f64> = curve.rows.iter().filter(|r| r.phi > 0).map(|r| r.log_f[0]).collect();
                let spread = fs.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
                    - fs.iter().cloned().fold(f64::INFINITY, f64::min);
                summary.push_str(&format!("F at s = {sv:.6}: max/min = {:.4}\n", spread.exp()));
            }
        }
        Command::Quantize { k, samples, seed, restarts, tol, .. } => {
            let ks = parse_k_list(k)?;
            manifest = RunManifest::new("quantize", &source)
                .param("r", spec.r())
                .param("k", ks.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" "))
                .param("samples", samples)
                .param("seed", seed)
                .param("restarts", restarts)
                .param("tol", tol);
            let opts = LloydOptions { restarts: *restarts, rel_tol: *tol, ..Default::default() };
            let est = empirical_dimension(&spec, &ks, *samples, *seed, opts)?;
            table = Table::new(&["k", "distortion", "error"]);
            for &(kk, d) in &est.rows {
                table.push(vec![kk.to_string(), num(d), num(d.powf(1.0 / spec.r()))]);
            }
            let (lo, hi) = est.fit.interval();
            summary.push_str(&format!("seed {seed}, {samples} samples at depth {}\n", est.depth));
            summary.push_str(&format!(
                "fitted dimension {:.4} (95% interval [{lo:.4}, {hi:.4}], R² {:.5}); errors are ≍ up to constants\n",
                est.fit.slope, est.fit.r2
            ));
        }
        Command::Rates { cycles, surrogate, .. } => {
            let kind: SurrogateKind = surrogate.parse()?;
            manifest = RunManifest::new("rates", &source).param("cycles", cycles).param("surrogate", surrogate);
            let rep = equivalence_probe(&spec, kind, *cycles)?;
            table = Table::new(&["cycle", "rate", "surrogate_rate", "free_letters", "implied_weight"]);
            for row in &rep.rows {
                let free: Vec<String> = row.free_letters.iter().map(|i| (i + 1).to_string()).collect();
                table.push(vec![
                    row.cycle.to_string(),
                    num(row.rate),
                    opt_num(row.surrogate_rate),
                    free.join(" "),
                    row.implied_weight.map(|(i, z)| format!("{}:{}", i + 1, num(z))).unwrap_or_default(),
                ]);
            }
            for row in rep.rows.iter().take(6) {
                summary.push_str(&format!("rate {} = {:.10}\n", row.cycle, row.rate));
            }
            match &rep.verdict {
                EquivalenceVerdict::NonEquivalent { reason } => {
                    summary.push_str(&format!("NON-EQUIVALENT to the {surrogate} Markov measure: {reason}\n"))
                }
                EquivalenceVerdict::Consistent => {
                    summary.push_str(&format!("cycle rates are consistent with the {surrogate} Markov measure\n"))
                }
            }
        }
        Command::ScanR { grid, .. } => {
            let r_grid = match grid {
                Some(g) => parse_f64_list(g)?,
                None => (0..13).map(|i| 10f64.powf(-3.0 + 4.0 * i as f64 / 12.0)).collect(),
            };
            manifest = RunManifest::new("scan-r", &source)
                .param("grid", r_grid.iter().map(|x| num(*x)).collect::<Vec<_>>().join(" "));
            let (rows, prefix) = small_r_scan(&spec, &r_grid)?;
            table = Table::new(&["r", "s1r", "s2r", "sign"]);
            for row in &rows {
                table.push(vec![num(row.r), num(row.s1r), num(row.s2r), row.sign.to_string()]);
            }
            if rows.len() > 1 {
                summary.push_str(&format!("s_2r > s_1r on the first {prefix} of {} grid points\n", rows.len()));
            } else if let Some(row) = rows.first() {
                summary.push_str(&format!("r = {}: s_1r = {:.10}, s_2r = {:.10}\n", row.r, row.s1r, row.s2r));
            }
        }
    }
    manifest.wall_clock_s = Some(started.elapsed().as_secs_f64());
    let mut buf = Vec::new();
    table.write(&manifest, &mut buf)?;
    Ok(Outcome { csv: String::from_utf8(buf).expect("utf-8"), summary, exit_code })
}
