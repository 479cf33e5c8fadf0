use ipf_synsets::{
    load_json_inventory, CategoryId, SynsetInventory, UnknownSensePolicy, WsfAccumulator, WsfTable,
};

pub fn sense_key(synset: usize, j: usize) -> String {
    format!("s{synset}_{j}%1:00:00::")
}

pub fn categories(n: usize) -> Vec<CategoryId> {
    (0..n)
        .map(|k| CategoryId::new(format!("c{k}")).unwrap())
        .collect()
}

/// One synset per instance; `instances[i][k][j]` counts sense `j` of synset
/// `i` in category `k`. Synset `i` gets offset `i + 1`.
pub fn build(instances: &[Vec<Vec<u64>>], n: usize) -> (SynsetInventory, WsfTable) {
    let doc: Vec<serde_json::Value> = instances
        .iter()
        .enumerate()
        .map(|(i, counts)| {
            let size = counts[0].len();
            serde_json::json!({
                "synset_id": format!("{:08}-n", i + 1),
                "senses": (0..size).map(|j| sense_key(i, j)).collect::<Vec<_>>(),
            })
        })
        .collect();
    let inv = load_json_inventory(serde_json::to_vec(&doc).unwrap().as_slice()).unwrap();
    let mut acc = WsfAccumulator::new(&inv, categories(n), UnknownSensePolicy::Fail).unwrap();
    for (i, counts) in instances.iter().enumerate() {
        for (k, row) in counts.iter().enumerate() {
            for (j, &c) in row.iter().enumerate() {
                acc.add_key(k, &sense_key(i, j), c).unwrap();
            }
        }
    }
    let wsf = acc.finish().table;
    (inv, wsf)
}

/// Decodes `code` as base-`radix` digits into an `n x size` count block.
pub fn decode(mut code: u64, n: usize, size: usize, radix: u64) -> Vec<Vec<u64>> {
    let mut block = vec![vec![0; size]; n];
    for row in block.iter_mut() {
        for cell in row.iter_mut() {
            *cell = code % radix;
            code /= radix;
        }
    }
    block
}
