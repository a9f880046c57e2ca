//! String kernels against an explicit feature-space oracle.

use proptest::prelude::*;
use strkern_core::exec::Sequential;
use strkern_core::string_kernels::{blended_kernel, blended_self_matrix, kernel, raw_self_matrix, PgramRange, StringKernelKind};
use strkern_core::text::{extract_pgrams, Sample};

const KINDS: [StringKernelKind; 3] = [StringKernelKind::Spectrum, StringKernelKind::Presence, StringKernelKind::Intersection];

/// Dense count vector over every string of length `p` over `alphabet`.
fn feature_vector(text: &[char], alphabet: &[char], p: usize) -> Vec<u64> {
    let dim = alphabet.len().pow(p as u32);
    let mut v = vec![0u64; dim];
    for w in text.windows(p) {
        let idx = w.iter().fold(0usize, |acc, c| acc * alphabet.len() + alphabet.iter().position(|a| a == c).unwrap());
        v[idx] += 1;
    }
    v
}

fn oracle(kind: StringKernelKind, s: &[char], t: &[char], alphabet: &[char], p: usize) -> u64 {
    let a = feature_vector(s, alphabet, p);
    let b = feature_vector(t, alphabet, p);
    a.iter()
        .zip(&b)
        .map(|(&x, &y)| match kind {
            StringKernelKind::Spectrum => x * y,
            StringKernelKind::Presence => u64::from(x > 0) * u64::from(y > 0),
            StringKernelKind::Intersection => x.min(y),
        })
        .sum()
}

fn text_strategy() -> impl Strategy<Value = (Vec<char>, Vec<char>, Vec<char>, usize)> {
    (1usize..=8)
        .prop_flat_map(|k| {
            let alphabet: Vec<char> = "abcdefgh".chars().take(k).collect();
            let pick = proptest::sample::select(alphabet.clone());
            (Just(alphabet), proptest::collection::vec(pick.clone(), 0..=60), proptest::collection::vec(pick, 0..=60), 1usize..=6)
        })
        .prop_map(|(alphabet, s, t, p)| (alphabet, s, t, p))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn kernels_match_feature_space_oracle((alphabet, s, t, p) in text_strategy()) {
        let s_str: String = s.iter().collect();
        let t_str: String = t.iter().collect();
        let ps = extract_pgrams(&s_str, p).unwrap();
        let pt = extract_pgrams(&t_str, p).unwrap();
        for kind in KINDS {
            let want = oracle(kind, &s, &t, &alphabet, p);
            prop_assert_eq!(kernel(kind, &ps, &pt).unwrap(), want);
            prop_assert_eq!(kernel(kind, &pt, &ps).unwrap(), want);
            let single = PgramRange::single(p).unwrap();
            prop_assert_eq!(blended_kernel(kind, &s_str, &t_str, single).unwrap(), want);
        }
    }

    #[test]
    fn presence_le_intersection_le_spectrum(s in "[ab c]{0,40}", t in "[ab c]{0,40}", p in 1usize..5) {
        let ps = extract_pgrams(&s, p).unwrap();
        let pt = extract_pgrams(&t, p).unwrap();
        let pres = kernel(StringKernelKind::Presence, &ps, &pt).unwrap();
        let inter = kernel(StringKernelKind::Intersection, &ps, &pt).unwrap();
        let spec = kernel(StringKernelKind::Spectrum, &ps, &pt).unwrap();
        prop_assert!(pres <= inter && inter <= spec);
    }

    #[test]
    fn window_count_invariant(s in "\\PC{0,50}", p in 1usize..8) {
        let n = s.chars().count();
        prop_assert_eq!(extract_pgrams(&s, p).unwrap().total() as usize, (n + 1).saturating_sub(p));
    }

    #[test]
    fn blending_is_sum_of_per_p_matrices(texts in proptest::collection::vec("[abcd ]{0,30}", 1..6), a in 1usize..4, extra in 0usize..3) {
        let range = PgramRange::new(a, a + extra).unwrap();
        let samples: Vec<Sample> = texts.iter().enumerate().map(|(i, t)| Sample::new(format!("s{i}"), None).with_text("c", t)).collect();
        let normalized: Vec<String> = samples.iter().map(|s| s.text("c").unwrap().to_string()).collect();
        for kind in KINDS {
            let blended = blended_self_matrix(&Sequential, &samples, "c", kind, range).unwrap();
            let mut sum = vec![0.0; samples.len() * samples.len()];
            for p in range.iter() {
                for (acc, v) in sum.iter_mut().zip(raw_self_matrix(&Sequential, &normalized, kind, p).as_slice()) {
                    *acc += v;
                }
            }
            prop_assert_eq!(blended.values.as_slice(), sum.as_slice());
            prop_assert_eq!(blended.values.max_asymmetry(), 0.0);
        }
    }
}

#[test]
fn normalize_whitespace_is_idempotent_on_samples() {
    use strkern_core::text::normalize_whitespace;
    for t in ["", "  a\t\tb  ", "\n\n", "x y", " \r\n z"] {
        let once = normalize_whitespace(t);
        assert_eq!(normalize_whitespace(&once), once);
    }
}

proptest! {
    #[test]
    fn normalize_whitespace_idempotent(t in "[ \t\r\na-c]{0,40}") {
        use strkern_core::text::normalize_whitespace;
        let once = normalize_whitespace(&t);
        prop_assert_eq!(normalize_whitespace(&once), once.clone());
        prop_assert!(!once.contains("  ") && !once.starts_with(' ') && !once.ends_with(' '));
    }
}
