use proptest::prelude::*;
use sma_core::metrics::{accuracy, confusion, macro_f1};
use sma_core::risk::{assess, band, RiskLevel, RiskMatrix};

fn labels(classes: usize) -> impl Strategy<Value = (Vec<usize>, Vec<usize>)> {
    (1usize..60).prop_flat_map(move |n| {
        (
            prop::collection::vec(0..classes, n),
            prop::collection::vec(0..classes, n),
        )
    })
}

proptest! {
    #[test]
    fn accuracy_equals_match_fraction((t, p) in labels(5)) {
        let cm = confusion(&t, &p, 5).unwrap();
        let brute = t.iter().zip(&p).filter(|(a, b)| a == b).count() as f64 / t.len() as f64;
        prop_assert_eq!(accuracy(&cm).unwrap(), brute);
        let f1 = macro_f1(&cm);
        prop_assert!((0.0..=1.0).contains(&f1));
    }

    #[test]
    fn scores_invariant_under_relabelling((t, p) in labels(4), perm in Just([0usize, 1, 2, 3]).prop_shuffle()) {
        let cm = confusion(&t, &p, 4).unwrap();
        let pt: Vec<usize> = t.iter().map(|&c| perm[c]).collect();
        let pp: Vec<usize> = p.iter().map(|&c| perm[c]).collect();
        let pcm = confusion(&pt, &pp, 4).unwrap();
        for a in 0..4 {
            for b in 0..4 {
                prop_assert_eq!(cm.get(a, b), pcm.get(perm[a], perm[b]));
            }
        }
        prop_assert_eq!(accuracy(&cm).unwrap(), accuracy(&pcm).unwrap());
        prop_assert!((macro_f1(&cm) - macro_f1(&pcm)).abs() < 1e-12);
    }

    #[test]
    fn perfect_scores_iff_diagonal((t, p) in labels(3)) {
        let cm = confusion(&t, &p, 3).unwrap();
        let diagonal = t == p;
        prop_assert_eq!(accuracy(&cm).unwrap() == 1.0, diagonal);
    }

    #[test]
    fn band_is_a_step_function(p in 0.0f64..=1.0) {
        let m = RiskMatrix::default();
        let expected = if p < 0.7 { 2 } else if p < 0.9 { 1 } else { 0 };
        prop_assert_eq!(band(p, &m).unwrap(), expected);
    }
}

#[test]
fn assess_is_monotone_on_grid() {
    let m = RiskMatrix::default();
    for impact in RiskLevel::ALL {
        let mut prev = RiskLevel::High;
        for step in 0..=100 {
            let level = assess(impact, step as f64 / 100.0, &m).unwrap();
            assert!(level <= prev, "raising accuracy raised risk at {impact}, {step}");
            prev = level;
        }
    }
}
