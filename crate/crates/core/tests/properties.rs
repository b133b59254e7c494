mod common;

use proptest::prelude::*;

use plne::decide;
use plne::formula::{parse, Formula};
use plne::generate::{self, Corpus, GenConfig};
use plne::modelcheck::{model_check, run_fixpoint};
use plne::oracle::{self, Oracle};
use plne::team::{parse_team_file, Team, TeamOrNull};

const VARS: [&str; 3] = ["p", "q", "r"];

fn literal() -> impl Strategy<Value = Formula> {
    prop_oneof![
        4 => (0..VARS.len()).prop_map(|i| Formula::var(VARS[i])),
        4 => (0..VARS.len()).prop_map(|i| Formula::neg_var(VARS[i])),
        1 => Just(Formula::Top),
        1 => Just(Formula::Bot),
        3 => Just(Formula::Ne),
    ]
}

fn formula() -> impl Strategy<Value = Formula> {
    literal().prop_recursive(5, 40, 2, |inner| {
        (inner.clone(), inner, any::<bool>()).prop_map(|(l, r, conj)| {
            if conj {
                Formula::and(l, r)
            } else {
                Formula::or(l, r)
            }
        })
    })
}

fn ne_free() -> impl Strategy<Value = Formula> {
    formula().prop_map(|f| f.flatten())
}

/// A team over (p, q, r) selected by an 8-bit membership mask.
fn team() -> impl Strategy<Value = Team> {
    any::<u8>()
        .prop_map(|mask| common::teams_by_mask(&common::domain(&VARS))[mask as usize].clone())
}

fn small_team() -> impl Strategy<Value = Team> {
    team().prop_filter("at most 6 members", |t| t.len() <= 6)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn render_then_parse_is_identity(f in formula()) {
        prop_assert_eq!(parse(&f.to_string()).unwrap(), f);
    }

    #[test]
    fn flatten_removes_ne_and_is_idempotent(f in formula()) {
        let flat = f.flatten();
        prop_assert!(!flat.contains_ne());
        prop_assert_eq!(flat.size(), f.size());
        prop_assert_eq!(flat.flatten(), flat);
    }

    #[test]
    fn occurrences_are_preorder_and_addressable(f in formula()) {
        let occ = f.occurrences();
        prop_assert_eq!(occ.len(), f.size());
        prop_assert!(occ.windows(2).all(|w| w[0].0 < w[1].0));
        for (path, sub) in &occ {
            prop_assert_eq!(f.at(path), Some(*sub));
        }
    }

    #[test]
    fn classical_negation_flips_every_singleton(f in ne_free()) {
        let neg = f.negate_classical().unwrap();
        let domain = common::domain(&VARS);
        for t in common::teams_by_mask(&domain).into_iter().filter(|t| t.len() == 1) {
            prop_assert_ne!(
                oracle::satisfies(&t, &f).unwrap(),
                oracle::satisfies(&t, &neg).unwrap()
            );
        }
        prop_assert_eq!(neg.negate_classical().unwrap(), f);
    }

    #[test]
    fn covers_number_three_to_the_size(t in small_team()) {
        let covers: Vec<(Team, Team)> = t.covers().collect();
        prop_assert_eq!(covers.len(), 3usize.pow(t.len() as u32));
        for (s, u) in covers {
            prop_assert_eq!(s.union(&u), t.clone());
        }
    }

    #[test]
    fn restriction_is_idempotent(t in team(), keep in proptest::sample::subsequence(VARS.to_vec(), 0..=3)) {
        let once = t.restrict(&keep).unwrap();
        prop_assert!(once.len() <= t.len());
        prop_assert_eq!(once.restrict(&keep).unwrap(), once);
    }

    #[test]
    fn null_team_algebra(a in team(), b in team()) {
        let (a, b) = (TeamOrNull::from(a), TeamOrNull::from(b));
        let null = TeamOrNull::Null;
        prop_assert!(a.union(&null).is_null() && null.intersection(&a).is_null());
        prop_assert!(null.is_below(&a) && !a.is_below(&null));
        prop_assert_eq!(a.union(&b), b.union(&a));
        prop_assert_eq!(a.intersection(&b), b.intersection(&a));
        prop_assert!(a.intersection(&b).is_below(&a) && a.is_below(&a.union(&b)));
    }

    #[test]
    fn team_file_round_trip(t in team()) {
        prop_assert_eq!(parse_team_file(&t.to_file_string()).unwrap(), t);
    }

    #[test]
    fn model_checker_matches_oracle(f in formula(), t in team()) {
        let report = run_fixpoint(&t, &f).unwrap();
        prop_assert_eq!(report.accepted, oracle::satisfies(&t, &f).unwrap());
        prop_assert!(report.within_bound());
        prop_assert!(report.labelling.root().is_below(&TeamOrNull::from(t)));
    }

    #[test]
    fn locality(f in formula(), t in team()) {
        let vars: Vec<String> = f.vars().into_iter().collect();
        let restricted = t.restrict(&vars).unwrap();
        prop_assert_eq!(
            oracle::satisfies(&t, &f).unwrap(),
            oracle::satisfies(&restricted, &f).unwrap()
        );
    }

    #[test]
    fn empty_team_property_iff_ne_free(f in formula()) {
        let empty = Team::empty(common::domain(&VARS));
        prop_assert_eq!(oracle::satisfies(&empty, &f).unwrap(), !f.contains_ne());
    }

    #[test]
    fn union_closure_and_ne_free_downward_closure(f in formula(), a in team(), b in team()) {
        let sa = oracle::satisfies(&a, &f).unwrap();
        let sb = oracle::satisfies(&b, &f).unwrap();
        if sa && sb {
            prop_assert!(oracle::satisfies(&a.union(&b), &f).unwrap());
        }
        if sa && !f.contains_ne() {
            prop_assert!(oracle::satisfies(&a.intersection(&b), &f).unwrap());
        }
    }

    #[test]
    fn satisfaction_entails_flattening(f in formula(), t in team()) {
        if oracle::satisfies(&t, &f).unwrap() {
            prop_assert!(oracle::satisfies(&t, &f.flatten()).unwrap());
        }
    }

    #[test]
    fn sat_witnesses_are_small_and_verified(f in formula()) {
        let verdict = decide::sat(&f);
        prop_assert_eq!(verdict.answer, Oracle::new().brute_sat(&f).unwrap().is_some());
        if let Some(w) = verdict.witness {
            let w = w.to_team();
            prop_assert!(!w.is_empty() && w.len() <= f.ne_count().max(1));
            prop_assert_eq!(model_check(&w, &f), Ok(true));
        }
    }

    #[test]
    fn valid_matches_brute_force(f in formula()) {
        let verdict = decide::valid(&f);
        prop_assert_eq!(verdict.answer, Oracle::new().brute_valid(&f).unwrap());
        if let Some(cx) = verdict.counterexample {
            prop_assert_eq!(model_check(&cx, &f), Ok(false));
        }
    }

    #[test]
    fn generator_is_deterministic(seed in any::<u64>(), vars in 1usize..6, depth in 0usize..6) {
        let config = GenConfig { seed, count: 8, depth, vars, ne_prob: 0.3, max_team: 8 };
        let a = generate::generate(&config).unwrap();
        prop_assert_eq!(a.to_text(), generate::generate(&config).unwrap().to_text());
        prop_assert_eq!(Corpus::parse(&a.to_text()).unwrap(), a);
    }
}
