use std::io::{Cursor, Write};

use flate2::write::GzEncoder;
use flate2::Compression;
use proptest::prelude::*;

use travesty_core::ingest::{
    decompress_if_gzip, estimate_model, parse_records, TrafficSchema, TrafficSummary,
};

fn record(login: bool, label: &str) -> String {
    let mut fields = vec!["0"; 42];
    fields[11] = if login { "1" } else { "0" };
    fields[41] = label;
    fields.join(",")
}

fn stream(counts: [u64; 4]) -> Vec<String> {
    let [attack_ok, attack_fail, normal_ok, normal_fail] = counts;
    let mut lines = Vec::new();
    lines.extend((0..attack_ok).map(|_| record(true, "neptune.")));
    lines.extend((0..attack_fail).map(|_| record(false, "smurf.")));
    lines.extend((0..normal_ok).map(|_| record(true, "normal.")));
    lines.extend((0..normal_fail).map(|_| record(false, "normal.")));
    lines
}

fn summarize(lines: &[String]) -> TrafficSummary {
    parse_records(Cursor::new(lines.join("\n")), &TrafficSchema::default()).unwrap()
}

proptest! {
    #[test]
    fn counts_round_trip(counts in prop::array::uniform4(0u64..40)) {
        prop_assume!(counts.iter().sum::<u64>() > 0);
        let s = summarize(&stream(counts));
        prop_assert_eq!(s.attack_login_success, counts[0]);
        prop_assert_eq!(s.attack_records, counts[0] + counts[1]);
        prop_assert_eq!(s.normal_login_success, counts[2]);
        prop_assert_eq!(s.normal_records, counts[2] + counts[3]);
        prop_assert_eq!(s.total_records, counts.iter().sum::<u64>());
    }

    #[test]
    fn order_independent(counts in prop::array::uniform4(1u64..20), seed in any::<u64>()) {
        let lines = stream(counts);
        let mut shuffled = lines.clone();
        // deterministic Fisher–Yates driven by an LCG
        let mut state = seed | 1;
        for i in (1..shuffled.len()).rev() {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            shuffled.swap(i, (state >> 33) as usize % (i + 1));
        }
        prop_assert_eq!(summarize(&lines), summarize(&shuffled));
    }

    #[test]
    fn shards_merge_to_whole(counts in prop::array::uniform4(1u64..20), cut in 0usize..80) {
        let lines = stream(counts);
        let cut = cut.min(lines.len() - 1).max(1);
        let (left, right) = lines.split_at(cut);
        prop_assert_eq!(summarize(left).merge(summarize(right)), summarize(&lines));
    }

    #[test]
    fn estimates_are_valid_models(counts in prop::array::uniform4(1u64..50)) {
        let (belief, model) = estimate_model(&summarize(&stream(counts))).unwrap();
        prop_assert!(model.validate().is_ok());
        prop_assert!((belief.p_h1() + belief.p_h0() - 1.0).abs() <= 1e-12);
    }
}

#[test]
fn gzip_and_plain_agree() {
    let text = stream([3, 5, 7, 11]).join("\n");
    let mut enc = GzEncoder::new(Vec::new(), Compression::default());
    enc.write_all(text.as_bytes()).unwrap();
    let gz = enc.finish().unwrap();
    let schema = TrafficSchema::default();
    let from_gz = parse_records(decompress_if_gzip(Cursor::new(gz)).unwrap(), &schema).unwrap();
    let plain = parse_records(
        decompress_if_gzip(Cursor::new(text.into_bytes())).unwrap(),
        &schema,
    )
    .unwrap();
    assert_eq!(from_gz, plain);
    assert_eq!(plain.total_records, 26);
}
