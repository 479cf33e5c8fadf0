//! An excerpt of WordNet 3.0 `index.sense` (every sense of six synsets).

use std::fs::File;
use std::io::BufReader;

use ipf_synsets::inventory::Pos;
use ipf_synsets::{load_index_sense, load_json_inventory, SynsetId};

fn excerpt() -> ipf_synsets::SynsetInventory {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/wn30_excerpt.index.sense");
    load_index_sense(BufReader::new(File::open(path).unwrap())).unwrap()
}

#[test]
fn resolves_flower_synsets() {
    let inv = excerpt();
    assert_eq!(inv.len(), 6);
    assert_eq!(inv.sense_count(), 31);
    let flower_n02: SynsetId = "11669335-n".parse().unwrap();
    for key in ["flower%1:20:02::", "bloom%1:20:00::", "blossom%1:20:00::"] {
        assert_eq!(inv.synset_of(key), Some(flower_n02));
    }
    let order: Vec<_> = inv.senses_of(flower_n02).unwrap().iter().map(|k| k.raw()).collect();
    assert_eq!(order, ["blossom%1:20:00::", "bloom%1:20:00::", "flower%1:20:02::"]);
    assert_eq!(inv.synset_of("flower%1:20:00::"), Some("11669921-n".parse().unwrap()));
}

#[test]
fn satellites_keep_their_pos() {
    let inv = excerpt();
    let id = inv.synset_of("prominent%5:00:02:conspicuous:00").unwrap();
    assert_eq!(id.pos(), Pos::AdjectiveSatellite);
    assert_eq!(id.to_string(), "00579622-s");
    let run = inv.synset_of("run%2:38:04::").unwrap();
    assert_eq!(run.to_string(), "02075049-v");
    assert_eq!(inv.senses_of(run).unwrap().len(), 13);
}

#[test]
fn json_round_trip_keeps_order() {
    let inv = excerpt();
    let mut buf = Vec::new();
    inv.write_json(&mut buf).unwrap();
    let back = load_json_inventory(buf.as_slice()).unwrap();
    assert_eq!(back, inv);
    assert_eq!(back.fingerprint(), inv.fingerprint());
}
