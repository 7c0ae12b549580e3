use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;
use vocadapt::corpus::{
    classifier_eval, curate, dedup, default_patterns, filter, heuristic_signals, mask_pii,
    mask_text, preset, read_input_file, read_shards, shard, CurateConfig, DocRecord, MANIFEST,
};
use vocadapt::Error;
use vocadapt_testkit::cases::{
    dedup_params, minhash_trial, plant_scores, planted_dedup, records, CONFUSIONS,
    JACCARD_CONSTRUCTIONS,
};
use vocadapt_testkit::fixtures;
use vocadapt_testkit::oracle::confusion;

#[test]
fn signals_match_hand_computation() {
    let fx: Value = serde_json::from_str(&fixtures::read("corpus/signals.json")).unwrap();
    let doc = DocRecord::new(fx["text"].as_str().unwrap(), "fixture");
    let got = heuristic_signals(&doc);
    for (name, want) in fx["signals"].as_object().unwrap() {
        assert_eq!(got[name], want.as_f64().unwrap(), "{name}");
    }
    assert_eq!(
        heuristic_signals(&DocRecord::new("abc.", "t"))["symbol_ratio"],
        0.25
    );
    let ten = "same line\n".repeat(10);
    assert_eq!(
        heuristic_signals(&DocRecord::new(ten.trim_end(), "t"))["boilerplate_line_frac"],
        1.0
    );
}

#[test]
fn low_quality_preset_drops_the_labelled_seven() {
    let path = fixtures::path("corpus/filter.jsonl");
    let raw = read_input_file(&path, "filter").unwrap();
    let labels: Vec<bool> = fixtures::read("corpus/filter.jsonl")
        .lines()
        .map(|l| serde_json::from_str::<Value>(l).unwrap()["label"] == "keep")
        .collect();
    assert_eq!(labels.iter().filter(|k| !**k).count(), 7);

    let thresholds = preset("low-quality-removal").unwrap();
    for (r, &want) in raw.iter().zip(&labels) {
        let mut doc = vocadapt::corpus::normalize(&r.bytes, &r.source).unwrap();
        doc.quality_score = r.quality_score;
        doc.signals = heuristic_signals(&doc);
        let v = filter(&doc, &thresholds).unwrap();
        assert_eq!(v.keep, want, "{}: {:?}", r.source, v.reasons);
        assert_eq!(v.keep, v.reasons.is_empty());
    }

    let cfg = CurateConfig {
        preset: "low-quality-removal".into(),
        dedup: false,
        ..CurateConfig::default()
    };
    let (kept, stats) = curate(&raw, &cfg).unwrap();
    assert_eq!((stats.filtered, stats.kept), (7, 13));
    let expected: Vec<&str> = raw
        .iter()
        .zip(&labels)
        .filter(|(_, k)| **k)
        .map(|(r, _)| r.source.as_str())
        .collect();
    assert_eq!(
        kept.iter().map(|d| d.source.as_str()).collect::<Vec<_>>(),
        expected
    );
}

#[test]
fn unknown_threshold_is_config_error() {
    let mut t = preset("default").unwrap();
    t.insert("sparkle".into(), vocadapt::corpus::Range::at_most(1.0));
    assert!(matches!(
        filter(&DocRecord::new("text", "t"), &t),
        Err(Error::Config(_))
    ));
}

const PLANTED: [(&str, &str); 12] = [
    ("EMAIL", "jiwoo.kim@example.co.kr"),
    ("EMAIL", "ops+alerts@mail.example.com"),
    ("EMAIL", "a_b@test.org"),
    ("PHONE", "+82 10-1234-5678"),
    ("PHONE", "+1 (415) 555-0199"),
    ("PHONE", "010-9876-5432"),
    ("RRN", "900101-1234567"),
    ("RRN", "851231-2345678"),
    ("RRN", "020304-3456789"),
    ("IPV4", "192.168.0.1"),
    ("IPV4", "10.0.0.254"),
    ("IPV4", "8.8.8.8"),
];

const CONTROL: &str = "버전 1.2.3 출시일은 2024-05-01 입니다. Room 404 has 12 seats, score 3.5/5, \
order #20240501, temperature -3.5 degrees, ratio 1:2, time 10:30, \
at-sign in prose like me@home is fine, 900101-5234567 is not a registration number.";

#[test]
fn twelve_planted_spans_are_masked() {
    let mut text = String::new();
    let mut expected = String::new();
    for (i, (name, value)) in PLANTED.iter().enumerate() {
        text.push_str(&format!("항목 {i}: {value} 확인.\n"));
        expected.push_str(&format!("항목 {i}: [{name}] 확인.\n"));
    }
    let (masked, n) = mask_text(&text, &default_patterns());
    assert_eq!(n, 12);
    assert_eq!(masked, expected);

    let (control, n) = mask_text(CONTROL, &default_patterns());
    assert_eq!(n, 0, "{control}");
    assert_eq!(control, CONTROL);

    let doc = mask_pii(
        &DocRecord::new("mail me: a@b.com", "t"),
        &default_patterns(),
    );
    assert_eq!(doc.text, "mail me: [EMAIL]");
    assert!(doc.pii_masked);
    assert!(!mask_pii(&DocRecord::new("nothing here", "t"), &default_patterns()).pii_masked);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn masking_touches_only_matched_spans(
        pre in "[a-z가-힣 ]{0,20}",
        post in "[a-z가-힣 ]{0,20}",
        which in 0usize..12,
    ) {
        let (name, value) = PLANTED[which];
        let text = format!("{pre} {value} {post}");
        let (masked, n) = mask_text(&text, &default_patterns());
        prop_assert_eq!(n, 1);
        prop_assert_eq!(masked, format!("{pre} [{name}] {post}"));
    }

    #[test]
    fn safe_text_is_untouched(s in "[a-zA-Z가-힣 .,!?]{0,80}") {
        prop_assert_eq!(mask_text(&s, &default_patterns()), (s.clone(), 0));
    }
}

#[test]
fn constructed_pairs_have_exact_jaccard() {
    for (s, d, j) in JACCARD_CONSTRUCTIONS {
        let (exact, _) = minhash_trial(s, d, 1);
        assert_eq!(exact, j);
    }
}

#[test]
fn minhash_estimates_within_tolerance() {
    for (s, d, j) in JACCARD_CONSTRUCTIONS {
        let close = (0..500)
            .filter(|&t| (minhash_trial(s, d, t).1 - j).abs() <= 0.1)
            .count();
        assert!(close >= 475, "J={j}: {close}/500 within 0.1");
        let mean = (0..1000).map(|t| minhash_trial(s, d, t).1).sum::<f64>() / 1000.0;
        assert!((mean - j).abs() <= 0.02, "J={j}: mean {mean}");
    }
}

#[test]
fn planted_near_duplicates_collapse() {
    for seed in [8, 9, 10] {
        let r = planted_dedup(seed);
        assert!(r.min_pair_jaccard >= 0.9 && r.max_decoy_jaccard <= 0.3);
        assert!(
            r.collapsed >= 19,
            "seed {seed}: {}/20 planted pairs collapsed",
            r.collapsed
        );
        assert_eq!(r.decoys_collapsed, 0, "seed {seed}");
        assert_eq!(r.survivors, 100 - r.collapsed);
        assert!(r.idempotent);
    }
}

#[test]
fn exact_duplicates_always_collapse() {
    let texts: Vec<String> = [
        "short",
        "a longer document body here",
        "short",
        "x",
        "a longer document body here",
        "x",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    let out = dedup(records(&texts), &dedup_params()).unwrap();
    let kept: Vec<&str> = out.iter().map(|d| d.source.as_str()).collect();
    assert_eq!(kept, ["doc-0", "doc-1", "doc-3"]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    #[test]
    fn dedup_is_idempotent_and_order_preserving(seed in any::<u64>(), copies in proptest::collection::vec(0usize..10, 0..8)) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut texts: Vec<String> = (0..10)
            .map(|_| (0..rng.gen_range(3..60)).map(|_| char::from(rng.gen_range(b'a'..=b'f'))).collect())
            .collect();
        for c in copies {
            texts.push(texts[c].clone());
        }
        let once = dedup(records(&texts), &dedup_params()).unwrap();
        prop_assert_eq!(dedup(once.clone(), &dedup_params()).unwrap(), once.clone());
        let idx: Vec<usize> = once.iter().map(|d| d.source[4..].parse().unwrap()).collect();
        prop_assert!(idx.windows(2).all(|w| w[0] < w[1]));
    }
}

#[test]
fn confusion_fixtures() {
    for (tp, fp, tn, fn_, acc, recall) in CONFUSIONS {
        let (p, l) = plant_scores(tp, fp, tn, fn_);
        assert_eq!(confusion(&p, &l), (tp, fp, tn, fn_));
        let r = classifier_eval(&p, &l).unwrap();
        assert_eq!(
            (r.counts.tp, r.counts.fp, r.counts.tn, r.counts.fn_),
            (tp, fp, tn, fn_)
        );
        assert_eq!(r.accuracy, acc);
        assert_eq!(r.low_quality_recall, recall);
        assert!((0.0..=1.0).contains(&r.accuracy));
    }
    let r = classifier_eval(&[1.0, 4.0], &[1.0, 4.0]).unwrap();
    assert_eq!((r.accuracy, r.low_quality_recall), (1.0, Some(1.0)));
    assert!(matches!(
        classifier_eval(&[1.0], &[1.0, 2.0]),
        Err(Error::InvalidArgument(_))
    ));
}

#[test]
fn thousand_doc_shard_round_trip() {
    let docs: Vec<DocRecord> = (0..1000)
        .map(|i| {
            let mut d = DocRecord::new(
                format!("문서 {i}: line one\nline two {}", "x".repeat(i % 17)),
                format!("src-{i}"),
            );
            d.signals = heuristic_signals(&d);
            d.quality_score = Some((i % 6) as f64 * 0.9);
            d
        })
        .collect();
    let dir = tempfile::tempdir().unwrap();
    let paths = shard(&docs, 128, dir.path()).unwrap();
    assert_eq!(paths.len(), 8);
    assert!(dir.path().join(MANIFEST).exists());
    let back = read_shards(dir.path()).unwrap();
    assert_eq!(back, docs);
    let mut lines = Vec::new();
    for p in &paths {
        lines.extend(
            std::fs::read_to_string(p)
                .unwrap()
                .lines()
                .map(String::from),
        );
    }
    let want: Vec<String> = docs
        .iter()
        .map(|d| serde_json::to_string(d).unwrap())
        .collect();
    assert_eq!(lines, want);
}
