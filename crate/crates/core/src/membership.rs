//! Numeric core: probability normalizations, probability-to-possibility
//! transformations, alpha-percent footprints and interval memberships.
//!
//! Every function here is pure. Sums run in ascending index order so results
//! are bit-reproducible.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum IpfError {
    #[error("alpha must be in (0,1]")]
    InvalidAlpha(f64),
    #[error("probability row has no data")]
    NoDataRow,
    #[error("sense never occurs in any category")]
    AllNoData,
    #[error("footprint is empty")]
    EmptyFootprint,
    #[error("no possibility value for footprint category {0}")]
    MissingPossibility(usize),
    #[error("interval [{0}, {0}] is degenerate")]
    DegenerateInterval(f64),
}

/// Probability-to-possibility transformation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Variant {
    /// `pi(j) = sum_m min(p_j, p_m)`
    #[serde(rename = "1983")]
    V1983,
    /// `pi(j) = sum_{m : p_m <= p_j} p_m`
    #[serde(rename = "1993")]
    V1993,
}

impl Variant {
    pub const ALL: [Variant; 2] = [Variant::V1983, Variant::V1993];

    pub fn as_str(self) -> &'static str {
        match self {
            Variant::V1983 => "1983",
            Variant::V1993 => "1993",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Which boundary rule selects the footprint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FootprintMode {
    /// Shortest prefix whose cumulative probability exceeds alpha.
    #[default]
    Inclusive,
    /// Longest prefix whose cumulative probability stays at or below alpha,
    /// never shorter than one category.
    Exclusive,
}

impl FootprintMode {
    pub fn as_str(self) -> &'static str {
        match self {
            FootprintMode::Inclusive => "inclusive",
            FootprintMode::Exclusive => "exclusive",
        }
    }
}

impl fmt::Display for FootprintMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FootprintMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "inclusive" => Ok(FootprintMode::Inclusive),
            "exclusive" => Ok(FootprintMode::Exclusive),
            other => Err(format!("unknown footprint mode {other:?}")),
        }
    }
}

pub fn validate_alpha(alpha: f64) -> Result<f64, IpfError> {
    if alpha > 0.0 && alpha <= 1.0 {
        Ok(alpha)
    } else {
        Err(IpfError::InvalidAlpha(alpha))
    }
}

/// A normalized count row. `NoData` stands for a zero total and carries the
/// row length; it is never folded into zeros.
#[derive(Debug, Clone, PartialEq)]
pub enum ProbRow {
    NoData(usize),
    Values(Vec<f64>),
}

/// Per-category distribution over the senses of one synset.
pub type PmvRow = ProbRow;
/// Distribution of one sense over the categories.
pub type WspRow = ProbRow;

impl ProbRow {
    pub fn len(&self) -> usize {
        match self {
            ProbRow::NoData(n) => *n,
            ProbRow::Values(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn values(&self) -> Option<&[f64]> {
        match self {
            ProbRow::NoData(_) => None,
            ProbRow::Values(v) => Some(v),
        }
    }

    pub fn get(&self, i: usize) -> Option<f64> {
        self.values().map(|v| v[i])
    }
}

fn normalize(counts: &[u64]) -> ProbRow {
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return ProbRow::NoData(counts.len());
    }
    let total = total as f64;
    ProbRow::Values(counts.iter().map(|&c| c as f64 / total).collect())
}

/// Sense counts of one synset in one category, normalized.
pub fn compute_pmv(counts: &[u64]) -> PmvRow {
    normalize(counts)
}

/// Counts of one sense across categories, normalized.
pub fn compute_wsp(counts: &[u64]) -> WspRow {
    normalize(counts)
}

/// Possibility of sense `j` under `variant`, given the PMV values.
pub fn possibility_of(probs: &[f64], j: usize, variant: Variant) -> f64 {
    let pj = probs[j];
    let mut sum = 0.0;
    match variant {
        Variant::V1983 => {
            for &pm in probs {
                sum += pj.min(pm);
            }
        }
        Variant::V1993 => {
            for &pm in probs {
                if pm <= pj {
                    sum += pm;
                }
            }
        }
    }
    sum.min(1.0)
}

pub fn possibility_profile(pmv: &PmvRow, variant: Variant) -> Result<Vec<f64>, IpfError> {
    let probs = pmv.values().ok_or(IpfError::NoDataRow)?;
    Ok((0..probs.len())
        .map(|j| possibility_of(probs, j, variant))
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlphaFootprint {
    /// Selected category indices in selection order.
    pub categories: Vec<usize>,
    pub cumulative_prob: f64,
    pub mode: FootprintMode,
}

impl AlphaFootprint {
    pub fn len(&self) -> usize {
        self.categories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.categories.is_empty()
    }
}

/// Category indices by descending probability, ties by ascending index.
pub fn rank_categories(probs: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..probs.len()).collect();
    order.sort_by(|&a, &b| match probs[b].total_cmp(&probs[a]) {
        Ordering::Equal => a.cmp(&b),
        o => o,
    });
    order
}

/// Selects the alpha-percent footprint of a WSP row.
///
/// Only categories where the sense occurs are eligible. In inclusive mode,
/// when no prefix of the eligible categories exceeds alpha (only possible at
/// alpha = 1 or through rounding just below it) the whole support is taken.
pub fn alpha_footprint(
    wsp: &WspRow,
    alpha: f64,
    mode: FootprintMode,
) -> Result<AlphaFootprint, IpfError> {
    let alpha = validate_alpha(alpha)?;
    let probs = wsp.values().ok_or(IpfError::AllNoData)?;
    let ranked: Vec<usize> = rank_categories(probs)
        .into_iter()
        .filter(|&k| probs[k] > 0.0)
        .collect();
    if ranked.is_empty() {
        return Err(IpfError::AllNoData);
    }

    let mut cumulative = 0.0;
    let mut taken = 0;
    for &k in &ranked {
        let next = cumulative + probs[k];
        match mode {
            FootprintMode::Inclusive => {
                cumulative = next;
                taken += 1;
                if cumulative > alpha {
                    break;
                }
            }
            FootprintMode::Exclusive => {
                if next <= alpha || taken == 0 {
                    cumulative = next;
                    taken += 1;
                }
                if next > alpha {
                    break;
                }
            }
        }
    }
    let mut categories = ranked;
    categories.truncate(taken);
    Ok(AlphaFootprint {
        categories,
        cumulative_prob: cumulative,
        mode,
    })
}

/// Possibility of one sense in every category; `None` where the synset does
/// not occur in that category.
#[derive(Debug, Clone, PartialEq)]
pub struct PossibilityProfile {
    pub variant: Variant,
    pub values: Vec<Option<f64>>,
}

impl PossibilityProfile {
    /// Profile of sense `j` over per-category PMV rows.
    pub fn of_sense(pmv_rows: &[PmvRow], j: usize, variant: Variant) -> PossibilityProfile {
        PossibilityProfile {
            variant,
            values: pmv_rows
                .iter()
                .map(|row| row.values().map(|p| possibility_of(p, j, variant)))
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntervalMembership {
    pub low: f64,
    pub up: f64,
    pub variant: Variant,
    pub footprint_size: usize,
}

impl IntervalMembership {
    /// Min/max span of possibility values over a footprint.
    pub fn span<I>(values: I, variant: Variant) -> Result<IntervalMembership, IpfError>
    where
        I: IntoIterator<Item = f64>,
    {
        let mut low = f64::INFINITY;
        let mut up = f64::NEG_INFINITY;
        let mut footprint_size = 0;
        for v in values {
            low = low.min(v);
            up = up.max(v);
            footprint_size += 1;
        }
        if footprint_size == 0 {
            return Err(IpfError::EmptyFootprint);
        }
        Ok(IntervalMembership {
            low,
            up,
            variant,
            footprint_size,
        })
    }

    pub fn width(&self) -> f64 {
        self.up - self.low
    }

    pub fn contains(&self, other: &IntervalMembership) -> bool {
        self.low <= other.low && other.up <= self.up
    }
}

pub fn interval_from_footprint(
    profile: &PossibilityProfile,
    fp: &AlphaFootprint,
) -> Result<IntervalMembership, IpfError> {
    let values = fp
        .categories
        .iter()
        .map(|&k| {
            profile
                .values
                .get(k)
                .copied()
                .flatten()
                .ok_or(IpfError::MissingPossibility(k))
        })
        .collect::<Result<Vec<_>, _>>()?;
    IntervalMembership::span(values, profile.variant)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MembershipPair {
    pub category: usize,
    pub membership: f64,
    pub probability: f64,
}

/// A word-sense's membership as a discrete random variable: one
/// `<membership, probability>` pair per category with data.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilisticFuzzyMembership {
    pub variant: Variant,
    pub pairs: Vec<MembershipPair>,
}

pub fn pfs_membership(
    profile: &PossibilityProfile,
    wsp: &WspRow,
) -> Result<ProbabilisticFuzzyMembership, IpfError> {
    let probs = wsp.values().ok_or(IpfError::AllNoData)?;
    let pairs: Vec<MembershipPair> = profile
        .values
        .iter()
        .zip(probs)
        .enumerate()
        .filter_map(|(category, (m, &p))| {
            m.map(|membership| MembershipPair {
                category,
                membership,
                probability: p,
            })
        })
        .collect();
    if pairs.is_empty() {
        return Err(IpfError::AllNoData);
    }
    Ok(ProbabilisticFuzzyMembership {
        variant: profile.variant,
        pairs,
    })
}

/// Uniform density over an interval membership: `1/|I|` inside, 0 outside.
///
/// The height is kept as the reciprocal of the stored width, so the mass
/// `width / width` is exactly 1. `height()` returns the float nearest to
/// `1 / width` whose product with the width rounds to 1, when one exists;
/// for some widths no such float exists.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformIntervalDensity {
    low: f64,
    up: f64,
    width: f64,
}

impl UniformIntervalDensity {
    pub fn low(&self) -> f64 {
        self.low
    }

    pub fn up(&self) -> f64 {
        self.up
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn height(&self) -> f64 {
        let h = 1.0 / self.width;
        if h * self.width == 1.0 {
            return h;
        }
        let bits = h.to_bits();
        for step in 1..=2u64 {
            for c in [f64::from_bits(bits - step), f64::from_bits(bits + step)] {
                if c * self.width == 1.0 {
                    return c;
                }
            }
        }
        h
    }

    pub fn density_at(&self, x: f64) -> f64 {
        if (self.low..=self.up).contains(&x) {
            self.height()
        } else {
            0.0
        }
    }

    /// Probability mass on `[a, b]`.
    pub fn mass_between(&self, a: f64, b: f64) -> f64 {
        let overlap = (b.min(self.up) - a.max(self.low)).max(0.0);
        overlap / self.width
    }

    /// Integral over the membership domain `[0, 1]`.
    pub fn total_mass(&self) -> f64 {
        self.mass_between(0.0, 1.0)
    }
}

pub fn footprint_density(iv: &IntervalMembership) -> Result<UniformIntervalDensity, IpfError> {
    if iv.up <= iv.low {
        return Err(IpfError::DegenerateInterval(iv.low));
    }
    Ok(UniformIntervalDensity {
        low: iv.low,
        up: iv.up,
        width: iv.up - iv.low,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: &[f64], b: &[f64]) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-12)
    }

    // Straight evaluation of the defining sums, no shared code.
    fn hand_1983(p: &[f64]) -> Vec<f64> {
        p.iter()
            .map(|&pj| p.iter().map(|&pm| if pm < pj { pm } else { pj }).sum())
            .collect()
    }

    fn hand_1993(p: &[f64]) -> Vec<f64> {
        p.iter()
            .map(|&pj| p.iter().filter(|&&pm| pm <= pj).sum())
            .collect()
    }

    #[test]
    fn pmv_examples() {
        assert_eq!(compute_pmv(&[4, 1]), ProbRow::Values(vec![0.8, 0.2]));
        assert_eq!(compute_pmv(&[0, 0]), ProbRow::NoData(2));
        assert_eq!(compute_pmv(&[7]), ProbRow::Values(vec![1.0]));
    }

    #[test]
    fn wsp_examples() {
        assert_eq!(compute_wsp(&[4, 1]), ProbRow::Values(vec![0.8, 0.2]));
        assert_eq!(compute_wsp(&[0, 0, 0]), ProbRow::NoData(3));
        assert_eq!(compute_wsp(&[5]), ProbRow::Values(vec![1.0]));
    }

    #[test]
    fn possibility_two_senses() {
        let pmv = ProbRow::Values(vec![0.8, 0.2]);
        let v83 = possibility_profile(&pmv, Variant::V1983).unwrap();
        let v93 = possibility_profile(&pmv, Variant::V1993).unwrap();
        assert!(close(&v83, &hand_1983(&[0.8, 0.2])));
        assert!(close(&v93, &hand_1993(&[0.8, 0.2])));
        assert!(close(&v83, &[1.0, 0.4]));
        assert!(close(&v93, &[1.0, 0.2]));
    }

    #[test]
    fn possibility_three_senses() {
        let p = [0.5, 0.3, 0.2];
        let pmv = ProbRow::Values(p.to_vec());
        assert!(close(&hand_1983(&p), &[1.0, 0.8, 0.6]));
        assert!(close(&hand_1993(&p), &[1.0, 0.5, 0.2]));
        assert!(close(&possibility_profile(&pmv, Variant::V1983).unwrap(), &[1.0, 0.8, 0.6]));
        assert!(close(&possibility_profile(&pmv, Variant::V1993).unwrap(), &[1.0, 0.5, 0.2]));
    }

    #[test]
    fn possibility_uniform() {
        let pmv = compute_pmv(&[2, 2, 2]);
        for v in Variant::ALL {
            assert!(close(&possibility_profile(&pmv, v).unwrap(), &[1.0, 1.0, 1.0]));
        }
        assert_eq!(
            possibility_profile(&ProbRow::NoData(2), Variant::V1983),
            Err(IpfError::NoDataRow)
        );
    }

    #[test]
    fn footprint_modes() {
        let wsp = ProbRow::Values(vec![0.5, 0.3, 0.2]);
        let inc = alpha_footprint(&wsp, 0.7, FootprintMode::Inclusive).unwrap();
        assert_eq!(inc.categories, [0, 1]);
        assert!((inc.cumulative_prob - 0.8).abs() < 1e-12);
        let exc = alpha_footprint(&wsp, 0.7, FootprintMode::Exclusive).unwrap();
        assert_eq!(exc.categories, [0]);
        assert_eq!(exc.cumulative_prob, 0.5);
    }

    #[test]
    fn footprint_single_dominant_category() {
        let wsp = ProbRow::Values(vec![1.0, 0.0, 0.0]);
        for mode in [FootprintMode::Inclusive, FootprintMode::Exclusive] {
            let fp = alpha_footprint(&wsp, 0.8, mode).unwrap();
            assert_eq!(fp.categories, [0]);
            assert_eq!(fp.cumulative_prob, 1.0);
        }
    }

    #[test]
    fn footprint_ties_break_by_index() {
        let wsp = ProbRow::Values(vec![0.25, 0.5, 0.25]);
        let fp = alpha_footprint(&wsp, 0.6, FootprintMode::Inclusive).unwrap();
        assert_eq!(fp.categories, [1, 0]);
    }

    #[test]
    fn footprint_alpha_one_takes_support() {
        let wsp = compute_wsp(&[3, 0, 1, 6]);
        let inc = alpha_footprint(&wsp, 1.0, FootprintMode::Inclusive).unwrap();
        assert_eq!(inc.categories, [3, 0, 2]);
        let exc = alpha_footprint(&wsp, 1.0, FootprintMode::Exclusive).unwrap();
        assert_eq!(exc.categories, [3, 0, 2]);
    }

    #[test]
    fn footprint_errors() {
        assert_eq!(
            alpha_footprint(&ProbRow::NoData(3), 0.8, FootprintMode::Inclusive),
            Err(IpfError::AllNoData)
        );
        let wsp = ProbRow::Values(vec![1.0]);
        for bad in [0.0, -0.1, 1.5, f64::NAN] {
            assert!(matches!(
                alpha_footprint(&wsp, bad, FootprintMode::Inclusive),
                Err(IpfError::InvalidAlpha(_))
            ));
        }
        assert_eq!(IpfError::InvalidAlpha(1.5).to_string(), "alpha must be in (0,1]");
    }

    fn fp(categories: Vec<usize>) -> AlphaFootprint {
        AlphaFootprint {
            categories,
            cumulative_prob: 1.0,
            mode: FootprintMode::Inclusive,
        }
    }

    #[test]
    fn interval_examples() {
        let profile = PossibilityProfile {
            variant: Variant::V1983,
            values: vec![Some(0.6), Some(0.9)],
        };
        let iv = interval_from_footprint(&profile, &fp(vec![0, 1])).unwrap();
        assert_eq!((iv.low, iv.up, iv.footprint_size), (0.6, 0.9, 2));
        let iv = interval_from_footprint(&profile, &fp(vec![1])).unwrap();
        assert_eq!((iv.low, iv.up), (0.9, 0.9));
        let profile = PossibilityProfile {
            variant: Variant::V1983,
            values: vec![Some(0.4), Some(1.0)],
        };
        let iv = interval_from_footprint(&profile, &fp(vec![1, 0])).unwrap();
        assert_eq!((iv.low, iv.up), (0.4, 1.0));
        assert_eq!(
            interval_from_footprint(&profile, &fp(vec![])),
            Err(IpfError::EmptyFootprint)
        );
        let gap = PossibilityProfile {
            variant: Variant::V1993,
            values: vec![None, Some(1.0)],
        };
        assert_eq!(
            interval_from_footprint(&gap, &fp(vec![0])),
            Err(IpfError::MissingPossibility(0))
        );
    }

    #[test]
    fn pfs_pairs() {
        let profile = PossibilityProfile {
            variant: Variant::V1983,
            values: vec![Some(1.0), Some(0.4)],
        };
        let wsp = ProbRow::Values(vec![0.8, 0.2]);
        let pfs = pfs_membership(&profile, &wsp).unwrap();
        let pairs: Vec<_> = pfs.pairs.iter().map(|p| (p.membership, p.probability)).collect();
        assert_eq!(pairs, [(1.0, 0.8), (0.4, 0.2)]);

        let profile = PossibilityProfile {
            variant: Variant::V1983,
            values: vec![Some(1.0), None, Some(0.5)],
        };
        let wsp = ProbRow::Values(vec![0.75, 0.0, 0.25]);
        let pfs = pfs_membership(&profile, &wsp).unwrap();
        let pairs: Vec<_> = pfs.pairs.iter().map(|p| (p.category, p.probability)).collect();
        assert_eq!(pairs, [(0, 0.75), (2, 0.25)]);

        let none = PossibilityProfile {
            variant: Variant::V1983,
            values: vec![None, None],
        };
        assert_eq!(pfs_membership(&none, &wsp), Err(IpfError::AllNoData));
        assert_eq!(
            pfs_membership(&profile, &ProbRow::NoData(3)),
            Err(IpfError::AllNoData)
        );
    }

    fn interval(low: f64, up: f64) -> IntervalMembership {
        IntervalMembership {
            low,
            up,
            variant: Variant::V1983,
            footprint_size: 2,
        }
    }

    #[test]
    fn density_examples() {
        let d = footprint_density(&interval(0.2, 0.7)).unwrap();
        assert!((d.height() - 2.0).abs() < 1e-12);
        assert_eq!(d.density_at(0.1), 0.0);
        assert_eq!(d.density_at(0.9), 0.0);
        assert!(d.density_at(0.5) > 0.0);
        assert_eq!(d.total_mass(), 1.0);

        let d = footprint_density(&interval(0.0, 1.0)).unwrap();
        assert_eq!(d.height(), 1.0);
        assert_eq!(d.density_at(0.0), 1.0);
        assert_eq!(d.density_at(1.0), 1.0);

        assert_eq!(
            footprint_density(&interval(0.4, 0.4)),
            Err(IpfError::DegenerateInterval(0.4))
        );
    }

    fn arb_counts() -> impl Strategy<Value = Vec<u64>> {
        prop::collection::vec(0u64..50, 1..12).prop_filter("nonzero total", |c| c.iter().any(|&x| x > 0))
    }

    proptest! {
        #[test]
        fn possibility_properties(counts in arb_counts()) {
            let pmv = compute_pmv(&counts);
            let p = pmv.values().unwrap().to_vec();
            prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            let v83 = possibility_profile(&pmv, Variant::V1983).unwrap();
            let v93 = possibility_profile(&pmv, Variant::V1993).unwrap();
            prop_assert!(close(&v83, &hand_1983(&p)));
            prop_assert!(close(&v93, &hand_1993(&p)));
            let max = v83.iter().cloned().fold(f64::MIN, f64::max);
            prop_assert!((max - 1.0).abs() < 1e-9);
            for j in 0..p.len() {
                prop_assert!(p[j] <= v93[j] && v93[j] <= v83[j] && v83[j] <= 1.0);
                for m in 0..p.len() {
                    if p[j] >= p[m] {
                        prop_assert!(v83[j] >= v83[m] && v93[j] >= v93[m]);
                    }
                }
            }
        }

        #[test]
        fn footprint_minimality(counts in arb_counts(), alpha in 0.01f64..0.99) {
            let wsp = compute_wsp(&counts);
            let p = wsp.values().unwrap();
            let fp = alpha_footprint(&wsp, alpha, FootprintMode::Inclusive).unwrap();
            prop_assert!(fp.cumulative_prob > alpha);
            let without_last: f64 = fp.categories[..fp.len() - 1].iter().map(|&k| p[k]).sum();
            prop_assert!(without_last <= alpha);
            let exc = alpha_footprint(&wsp, alpha, FootprintMode::Exclusive).unwrap();
            prop_assert!(!exc.is_empty());
            prop_assert!(exc.len() <= fp.len());
            prop_assert_eq!(&exc.categories[..], &fp.categories[..exc.len()]);
        }

        #[test]
        fn density_mass_is_one(a in 0.0f64..1.0, b in 0.0f64..1.0) {
            prop_assume!(a != b);
            let d = footprint_density(&interval(a.min(b), a.max(b))).unwrap();
            prop_assert_eq!(d.total_mass(), 1.0);
            prop_assert_eq!(d.width() / d.width(), 1.0);
        }
    }
}
