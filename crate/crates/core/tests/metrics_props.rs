use proptest::prelude::*;
use strkern_core::metrics::evaluate;

fn classes() -> Vec<String> {
    ["EGY", "GLF", "LAV", "MSA", "NOR"].iter().map(|s| s.to_string()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn accuracy_is_confusion_trace(pairs in proptest::collection::vec((0usize..5, 0usize..5), 1..200)) {
        let cl = classes();
        let truth: Vec<&str> = pairs.iter().map(|(t, _)| cl[*t].as_str()).collect();
        let pred: Vec<&str> = pairs.iter().map(|(_, p)| cl[*p].as_str()).collect();
        let r = evaluate(&truth, &pred, &cl).unwrap();
        let trace: usize = (0..5).map(|i| r.confusion[i][i]).sum();
        let total: usize = r.confusion.iter().flatten().sum();
        prop_assert_eq!(total, pairs.len());
        prop_assert_eq!(r.accuracy, trace as f64 / pairs.len() as f64);
        prop_assert!((0.0..=1.0).contains(&r.macro_f1));
        let mean_f1 = r.per_class.iter().map(|m| m.f1).sum::<f64>() / 5.0;
        prop_assert_eq!(r.macro_f1, mean_f1);
    }

    #[test]
    fn joint_permutation_leaves_report_unchanged(pairs in proptest::collection::vec((0usize..5, 0usize..5), 1..100), seed in any::<u64>()) {
        let cl = classes();
        let mut shuffled = pairs.clone();
        let mut s = seed;
        for i in (1..shuffled.len()).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1);
            shuffled.swap(i, (s >> 33) as usize % (i + 1));
        }
        let eval = |ps: &[(usize, usize)]| {
            let t: Vec<&str> = ps.iter().map(|(a, _)| cl[*a].as_str()).collect();
            let p: Vec<&str> = ps.iter().map(|(_, b)| cl[*b].as_str()).collect();
            evaluate(&t, &p, &cl).unwrap()
        };
        prop_assert_eq!(eval(&pairs), eval(&shuffled));
    }

    #[test]
    fn macro_equals_weighted_for_balanced_support(preds in proptest::collection::vec(0usize..5, 25)) {
        let cl = classes();
        let truth: Vec<&str> = (0..25).map(|i| cl[i % 5].as_str()).collect();
        let pred: Vec<&str> = preds.iter().map(|p| cl[*p].as_str()).collect();
        let r = evaluate(&truth, &pred, &cl).unwrap();
        prop_assert!((r.macro_f1 - r.weighted_f1).abs() < 1e-12);
    }
}
