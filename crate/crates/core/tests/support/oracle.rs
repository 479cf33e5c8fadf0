//! Literal, loop-by-loop re-evaluation of the IPF construction for one
//! synset. Kept independent of the library: NaN stands for missing data,
//! the category ranking is a selection sort, and footprints are found by
//! summing every prefix from scratch.

#![allow(clippy::needless_range_loop)]

/// Expected outcome for one sense; `None` when the sense never occurs.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleSense {
    pub footprint: Vec<usize>,
    pub low_1983: f64,
    pub up_1983: f64,
    pub low_1993: f64,
    pub up_1993: f64,
}

/// `counts[k][j]`: occurrences of sense `j` in category `k`.
pub fn oracle_synset(counts: &[Vec<u64>], alpha: f64, inclusive: bool) -> Vec<Option<OracleSense>> {
    let n = counts.len();
    let size = counts[0].len();

    let mut pmv = vec![vec![f64::NAN; size]; n];
    for k in 0..n {
        let mut total = 0u64;
        for j in 0..size {
            total += counts[k][j];
        }
        for j in 0..size {
            if total != 0 {
                pmv[k][j] = counts[k][j] as f64 / total as f64;
            }
        }
    }

    let mut out = Vec::with_capacity(size);
    for j in 0..size {
        let mut total = 0u64;
        for k in 0..n {
            total += counts[k][j];
        }
        if total == 0 {
            out.push(None);
            continue;
        }
        let mut wsp = vec![0.0; n];
        for k in 0..n {
            wsp[k] = counts[k][j] as f64 / total as f64;
        }

        // selection sort, largest first, lowest index on ties
        let mut used = vec![false; n];
        let mut sorted = Vec::new();
        for _ in 0..n {
            let mut best: Option<usize> = None;
            for k in 0..n {
                if used[k] {
                    continue;
                }
                match best {
                    None => best = Some(k),
                    Some(b) if wsp[k] > wsp[b] => best = Some(k),
                    _ => {}
                }
            }
            let b = best.unwrap();
            used[b] = true;
            if wsp[b] > 0.0 {
                sorted.push(b);
            }
        }

        let prefix_sum = |len: usize| {
            let mut s = 0.0;
            for &k in &sorted[..len] {
                s += wsp[k];
            }
            s
        };
        let len = if inclusive {
            (1..=sorted.len())
                .find(|&l| prefix_sum(l) > alpha)
                .unwrap_or(sorted.len())
        } else {
            (1..=sorted.len())
                .filter(|&l| prefix_sum(l) <= alpha)
                .max()
                .unwrap_or(1)
        };
        let footprint = sorted[..len].to_vec();

        let mut sense = OracleSense {
            footprint: footprint.clone(),
            low_1983: f64::INFINITY,
            up_1983: f64::NEG_INFINITY,
            low_1993: f64::INFINITY,
            up_1993: f64::NEG_INFINITY,
        };
        for &k in &footprint {
            let pj = pmv[k][j];
            let mut p83 = 0.0;
            let mut p93 = 0.0;
            for m in 0..size {
                let pm = pmv[k][m];
                p83 += if pj < pm { pj } else { pm };
                if pm <= pj {
                    p93 += pm;
                }
            }
            assert!(!p83.is_nan(), "footprint category without synset data");
            sense.low_1983 = sense.low_1983.min(p83);
            sense.up_1983 = sense.up_1983.max(p83);
            sense.low_1993 = sense.low_1993.min(p93);
            sense.up_1993 = sense.up_1993.max(p93);
        }
        out.push(Some(sense));
    }
    out
}
