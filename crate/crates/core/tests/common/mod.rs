#![allow(dead_code)]

use overlap_quant::model::{Probs, SystemSpec};
use overlap_quant::symbolic::TransitionGraph;
use proptest::prelude::*;

/// Fixtures named in the acceptance suite that carry exact data.
pub const NAMED_FIXTURES: [&str; 5] = ["eg1-default", "eg2-P1", "eg2-P2", "eg3", "eg5"];

/// Random system on `2n` letters: each entry is zero with probability ~0.3,
/// rows are normalized, and ratios are drawn for every realized cell.
pub fn random_spec(n: usize, weights: &[f64], chi: &[f64], ratios: &[f64], r: f64) -> Option<SystemSpec> {
    let size = 2 * n;
    let mut p = vec![0.0; size * size];
    for a in 0..size {
        let row = &weights[a * size..(a + 1) * size];
        let kept: Vec<f64> = row.iter().map(|&w| if w < 0.3 { 0.0 } else { w }).collect();
        let total: f64 = kept.iter().sum();
        if total == 0.0 {
            return None;
        }
        for b in 0..size {
            p[a * size + b] = kept[b] / total;
        }
    }
    let total: f64 = chi.iter().sum();
    let chi: Vec<f64> = chi.iter().map(|c| c / total).collect();
    let g = TransitionGraph::from_weights(n, &p).ok()?;
    let ratios: Vec<f64> =
        (0..n * n).map(|k| if g.cell_nonempty(k / n, k % n) { ratios[k] } else { 0.0 }).collect();
    SystemSpec::new(n, Probs::Float(p), Probs::Float(chi), ratios, r).ok()
}

pub fn arb_spec() -> impl Strategy<Value = SystemSpec> {
    (2usize..=3)
        .prop_flat_map(|n| {
            let size = 2 * n;
            (
                Just(n),
                prop::collection::vec(0.0f64..1.0, size * size),
                prop::collection::vec(0.05f64..1.0, size),
                prop::collection::vec(0.05f64..0.3, n * n),
                0.5f64..3.0,
            )
        })
        .prop_filter_map("rows must keep an edge", |(n, w, chi, ratios, r)| random_spec(n, &w, &chi, &ratios, r))
}

/// Support pattern on `n` letters: the cycle `i -> i+1` and the loop `i -> i`
/// are always present (irreducible, two successors per row); other cells are
/// kept where `extra` is at least 0.5.
fn support(n: usize, extra: &[f64]) -> Vec<bool> {
    (0..n * n).map(|k| {
        let (i, j) = (k / n, k % n);
        j == i || j == (i + 1) % n || extra[k] >= 0.5
    }).collect()
}

fn ratios_on(n: usize, s: &[bool], ratios: &[f64]) -> Vec<f64> {
    (0..n * n).map(|k| if s[k] { ratios[k] } else { 0.0 }).collect()
}

fn normalized(v: &[f64]) -> Vec<f64> {
    let t: f64 = v.iter().sum();
    v.iter().map(|x| x / t).collect()
}

/// Case II system: every realized cell carries all four lifted edges.
pub fn case_ii_spec(n: usize, extra: &[f64], w: &[f64], chi: &[f64], ratios: &[f64], r: f64) -> SystemSpec {
    let s = support(n, extra);
    let size = 2 * n;
    let mut p = vec![0.0; size * size];
    for a in 0..size {
        let i = a % n;
        let row: Vec<f64> = (0..size).map(|b| if s[i * n + b % n] { w[a * size + b] } else { 0.0 }).collect();
        p[a * size..(a + 1) * size].copy_from_slice(&normalized(&row));
    }
    SystemSpec::new(n, Probs::Float(p), Probs::Float(normalized(chi)), ratios_on(n, &s, ratios), r).unwrap()
}

/// Case I system: no edges from upper to lower letters, and each realized
/// cell carries exactly the lifted edges `(i,j)`, `(i,j⁺)`, `(i⁺,j⁺)`.
pub fn case_i_spec(n: usize, extra: &[f64], w: &[f64], chi: &[f64], ratios: &[f64], r: f64) -> SystemSpec {
    let s = support(n, extra);
    let size = 2 * n;
    let mut p = vec![0.0; size * size];
    for a in 0..size {
        let i = a % n;
        let row: Vec<f64> = (0..size)
            .map(|b| if s[i * n + b % n] && !(a >= n && b < n) { w[a * size + b] } else { 0.0 })
            .collect();
        p[a * size..(a + 1) * size].copy_from_slice(&normalized(&row));
    }
    SystemSpec::new(n, Probs::Float(p), Probs::Float(normalized(chi)), ratios_on(n, &s, ratios), r).unwrap()
}

fn regime_parts() -> impl Strategy<Value = (usize, Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>, f64)> {
    (2usize..=3).prop_flat_map(|n| {
        let size = 2 * n;
        (
            Just(n),
            prop::collection::vec(0.0f64..1.0, n * n),
            prop::collection::vec(0.05f64..1.0, size * size),
            prop::collection::vec(0.05f64..1.0, size),
            prop::collection::vec(0.05f64..0.3, n * n),
            0.5f64..3.0,
        )
    })
}

pub fn arb_case_i() -> impl Strategy<Value = SystemSpec> {
    regime_parts().prop_map(|(n, e, w, c, s, r)| case_i_spec(n, &e, &w, &c, &s, r))
}

pub fn arb_case_ii() -> impl Strategy<Value = SystemSpec> {
    regime_parts().prop_map(|(n, e, w, c, s, r)| case_ii_spec(n, &e, &w, &c, &s, r))
}

pub fn arb_regime() -> impl Strategy<Value = SystemSpec> {
    prop_oneof![arb_case_i(), arb_case_ii()]
}
