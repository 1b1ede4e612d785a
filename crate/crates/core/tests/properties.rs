mod common;

use std::collections::BTreeSet;

use common::{arb_case_i, arb_case_ii, arb_regime, arb_spec, NAMED_FIXTURES};
use overlap_quant::measure::{
    classify_reducibility, delta, log_energy, Constants, mu_cylinder, Method, ReducibilityOptions, ReducibilityStatus,
};
use overlap_quant::model::{load_fixture, validate, Case};
use overlap_quant::quantization::{build_antichain, lloyd, LloydOptions, Point, DEFAULT_PHI_CAP};
use overlap_quant::spectral::{
    full_matrix, rho, solve_dimension_root, spectral_radius, RootKind, ROOT_TOL,
};
use overlap_quant::symbolic::{children, enumerate_gn, enumerate_sn, gamma, in_sn, project, ProjectedWord};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn lift_fibers_partition_gn(spec in arb_spec(), n in 1usize..=5) {
        let g = spec.graph();
        let gn = enumerate_gn(g, n, 1_000_000).unwrap();
        let sn = enumerate_sn(g, n).unwrap();
        let projected: BTreeSet<ProjectedWord> = gn.iter().map(|w| project(w, g.n_base())).collect();
        prop_assert_eq!(projected, sn.iter().cloned().collect::<BTreeSet<_>>());
        let fibers: usize = sn.iter().map(|s| gamma(s, g).len()).sum();
        prop_assert_eq!(fibers, gn.len());
        for s in &sn {
            for w in gamma(s, g) {
                prop_assert_eq!(&project(&w, g.n_base()), s);
            }
        }
    }

    #[test]
    fn children_extend_sn(spec in arb_spec(), n in 1usize..=4) {
        let g = spec.graph();
        for s in enumerate_sn(g, n).unwrap() {
            let kids: BTreeSet<usize> = children(&s, g).into_iter().collect();
            for j in 0..g.n_base() {
                let t = s.push(j);
                prop_assert_eq!(in_sn(&t, g), kids.contains(&j));
            }
        }
    }

    #[test]
    fn transfer_matches_enumeration_and_mass_is_conserved(spec in arb_spec(), n in 1usize..=5) {
        let g = spec.graph();
        let mut total = 0.0;
        for s in enumerate_sn(g, n).unwrap() {
            let a = mu_cylinder(&s, &spec, Method::Transfer).unwrap().mu;
            let b = mu_cylinder(&s, &spec, Method::Enumerate).unwrap().mu;
            prop_assert!((a - b).abs() <= 1e-12 * b.abs().max(1e-300), "{s}: {a} vs {b}");
            let kids: f64 = children(&s, g)
                .into_iter()
                .map(|j| {
                    mu_cylinder(&s.push(j), &spec, Method::Transfer).unwrap().mu
                })
                .sum();
            prop_assert!((kids - a).abs() <= 1e-12 * a.max(1e-300), "{s}: children sum {kids} vs {a}");
            total += a;
        }
        prop_assert!((total - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn witnesses_recompute_to_the_same_sign(spec in arb_case_ii()) {
        let Ok(v) = classify_reducibility(&spec, ReducibilityOptions { depth_max: 6, span_closure: true }) else {
            return Ok(());
        };
        if let ReducibilityStatus::NotReducible { witnesses, .. } = v.status {
            for c in witnesses {
                for (&j, d) in c.letters.iter().zip(&c.deltas) {
                    let again = delta(&c.sigma, j, &spec).unwrap();
                    prop_assert!(!again.is_zero(1.0));
                    prop_assert_eq!(again.sign(), d.sign());
                }
            }
        }
    }

    #[test]
    fn energy_steps_stay_between_c1_and_c2(spec in arb_regime()) {
        let c = Constants::new(&spec);
        for n in 2..=5 {
            for s in enumerate_sn(spec.graph(), n).unwrap() {
                let e = log_energy(&s, &spec).unwrap();
                let ep = log_energy(&s.parent().unwrap(), &spec).unwrap();
                prop_assert!(e >= c.c1.ln() + ep - 1e-12 && e <= c.c2.ln() + ep + 1e-12, "{s}");
            }
        }
    }

    #[test]
    fn concatenation_sandwich_in_case_ii(spec in arb_case_ii()) {
        let c = Constants::new(&spec);
        for s in enumerate_sn(spec.graph(), 6).unwrap() {
            let e = log_energy(&s, &spec).unwrap();
            let l = s.letters();
            for h in 1..l.len() {
                let a = log_energy(&ProjectedWord::new(l[..h].to_vec()), &spec).unwrap();
                let b = log_energy(&ProjectedWord::new(l[h..].to_vec()), &spec).unwrap();
                prop_assert!(e >= c.concat_lo().ln() + a + b - 1e-12, "{s} at {h}");
                prop_assert!(e <= c.concat_hi().ln() + a + b + 1e-12, "{s} at {h}");
            }
        }
    }

    #[test]
    fn case_i_root_is_the_larger_block_root(spec in arb_case_i()) {
        let s1 = solve_dimension_root(&spec, RootKind::Lower, ROOT_TOL).unwrap();
        let s2 = solve_dimension_root(&spec, RootKind::Upper, ROOT_TOL).unwrap();
        let s = solve_dimension_root(&spec, RootKind::Full, ROOT_TOL).unwrap();
        prop_assert!((s - s1.max(s2)).abs() <= 2e-10);
    }

    #[test]
    fn generated_systems_land_in_their_regime(a in arb_case_i(), b in arb_case_ii()) {
        prop_assert_eq!(validate(&a).case, Case::CaseI);
        prop_assert_eq!(validate(&b).case, Case::CaseII);
    }

    #[test]
    fn spectral_radius_of_the_full_matrix_decreases(spec in arb_spec()) {
        let grid: Vec<f64> = (1..=50).map(|i| i as f64 / 50.0).collect();
        let vals: Vec<f64> = grid.iter().map(|&u| spectral_radius(&full_matrix(&spec, u)).unwrap()).collect();
        for w in vals.windows(2) {
            prop_assert!(w[1] < w[0], "{:?}", w);
        }
    }

    #[test]
    fn full_root_has_unit_radius(spec in arb_regime()) {
        let s = solve_dimension_root(&spec, RootKind::Full, ROOT_TOL).unwrap();
        prop_assert!((rho(&spec, RootKind::Full, s).unwrap() - 1.0).abs() <= 1e-8);
    }

    #[test]
    fn antichain_members_are_sandwiched_and_incomparable(spec in arb_regime(), k in 1usize..=4) {
        let ac = build_antichain(&spec, k, DEFAULT_PHI_CAP).unwrap();
        let kc = k as f64 * ac.log_c1;
        let words: BTreeSet<Vec<usize>> = ac.members.iter().map(|m| m.word.letters().to_vec()).collect();
        for m in &ac.members {
            prop_assert!(m.log_energy < kc && m.log_energy >= kc + ac.log_c1);
            let l = m.word.letters();
            for h in 1..l.len() {
                prop_assert!(!words.contains(&l[..h]), "{} has a member prefix", m.word);
            }
        }
    }

    #[test]
    fn lloyd_is_monotone_and_beats_its_start(seed in 0u64..1000, k in 1usize..12, r in 1.0f64..3.0, planar in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pts: Vec<Point> = (0..400).map(|_| [rng.gen::<f64>(), if planar { rng.gen::<f64>() } else { 0.0 }]).collect();
        let q = if planar { 2 } else { 1 };
        let cb = lloyd(&pts, q, k, r, seed, LloydOptions { restarts: 1, ..Default::default() }).unwrap();
        for w in cb.history.windows(2) {
            prop_assert!(w[1] <= w[0] * (1.0 + 1e-12));
        }
        prop_assert!(cb.distortion <= cb.history[0]);
    }
}

#[test]
fn lift_counts_follow_the_regime() {
    for name in NAMED_FIXTURES {
        let spec = load_fixture(name).unwrap();
        let rep = validate(&spec);
        let g = spec.graph();
        for n in 1..=6 {
            for s in enumerate_sn(g, n).unwrap() {
                let c = gamma(&s, g).len();
                match rep.case {
                    Case::CaseI => assert_eq!(c, n + 1, "{name} {s}"),
                    _ if rep.a2.pass && rep.a4.pass => assert_eq!(c, 1 << n, "{name} {s}"),
                    _ => {}
                }
            }
        }
    }
}
