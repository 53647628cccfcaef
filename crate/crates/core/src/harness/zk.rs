//! Two-sample comparison of verifier-view distributions.
//!
//! Views are flattened to their canonical element sequence
//! ([`Transcript::flatten`]).  When the view space is small relative to the
//! sample the comparison is the total-variation distance between the
//! empirical distributions of 64-bit view digests.  Otherwise exact
//! fingerprints almost never repeat and that estimate saturates at 1, so the
//! comparison becomes the largest total-variation distance over the
//! projections of the view onto single coordinates and onto pairs of
//! coordinates.  Every projection distance is a lower bound on the distance
//! between the view distributions, and each is 0 for identically distributed
//! views.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::Result;
use crate::sumcheck::Transcript;

/// Pairs of coordinates whose joint support exceeds this many cells are
/// skipped; their empirical distributions at desk-scale sample sizes are
/// dominated by noise.
const MAX_PAIR_CELLS: usize = 256;

/// Average sample count per distinct view below which digests are too sparse.
const MIN_DIGEST_MULTIPLICITY: usize = 20;

/// How view distributions were compared.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Statistic {
    /// Exact distribution of full-view digests.
    Digest,
    /// Largest distance over one- and two-coordinate projections.
    Projections,
}

/// Result of a real-versus-simulated comparison.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZkReport {
    pub samples: usize,
    pub statistic: Statistic,
    /// Distinct full views among the first real sample.
    pub distinct_views: usize,
    /// Distance between the first real sample and the simulated sample.
    pub tv: f64,
    /// Distance between two independent real samples.
    pub noise_floor: f64,
    pub tolerance: f64,
    pub within_floor: bool,
    /// Distance between the first real sample and a deliberately broken simulator.
    pub negative_control: Option<f64>,
    /// Whether the negative control exceeds five times the noise floor.
    pub negative_separated: Option<bool>,
}

/// 64-bit digest of the canonical serialization of a view.
pub fn fingerprint(view: &Transcript) -> u64 {
    let mut h = Sha256::new();
    for x in view.flatten() {
        h.update(x.to_le_bytes());
    }
    let digest = h.finalize();
    let mut b = [0u8; 8];
    b.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(b)
}

/// Column dictionaries shared by all samples of one test.
#[derive(Default)]
struct Encoder {
    columns: Vec<HashMap<u64, u16>>,
}

impl Encoder {
    /// Id 0 marks a coordinate absent from a shorter view; ids saturate at `u16::MAX`.
    fn encode(&mut self, flat: &[u64]) -> Vec<u16> {
        if self.columns.len() < flat.len() {
            self.columns.resize_with(flat.len(), HashMap::new);
        }
        flat.iter()
            .zip(self.columns.iter_mut())
            .map(|(&x, dict)| {
                let next = (dict.len() + 1).min(u16::MAX as usize) as u16;
                *dict.entry(x).or_insert(next)
            })
            .collect()
    }

    fn cardinality(&self, col: usize) -> usize {
        (self.columns[col].len() + 1).min(u16::MAX as usize + 1)
    }
}

struct Sample {
    rows: Vec<Vec<u16>>,
    digests: Vec<u64>,
}

impl Sample {
    fn draw(enc: &mut Encoder, seeds: std::ops::Range<u64>, gen: &mut dyn FnMut(u64) -> Result<Transcript>) -> Result<Sample> {
        let mut rows = Vec::with_capacity((seeds.end - seeds.start) as usize);
        let mut digests = Vec::with_capacity(rows.capacity());
        for s in seeds {
            let view = gen(s)?;
            digests.push(fingerprint(&view));
            rows.push(enc.encode(&view.flatten()));
        }
        Ok(Sample { rows, digests })
    }

    fn column(&self, col: usize) -> Vec<u16> {
        self.rows.iter().map(|r| r.get(col).copied().unwrap_or(0)).collect()
    }
}

fn tv_counts(a: &[u32], b: &[u32], na: usize, nb: usize) -> f64 {
    let (na, nb) = (na as f64, nb as f64);
    0.5 * a.iter().zip(b).map(|(&x, &y)| (f64::from(x) / na - f64::from(y) / nb).abs()).sum::<f64>()
}

/// Total-variation distance between two empirical distributions of digests.
pub fn digest_tv(a: &[u64], b: &[u64]) -> f64 {
    let mut counts: HashMap<u64, (u32, u32)> = HashMap::new();
    for &x in a {
        counts.entry(x).or_default().0 += 1;
    }
    for &x in b {
        counts.entry(x).or_default().1 += 1;
    }
    let (xs, ys): (Vec<u32>, Vec<u32>) = counts.into_values().unzip();
    tv_counts(&xs, &ys, a.len(), b.len())
}

/// Largest projection distance between `reference` and each of `others`.
fn projection_tvs(enc: &Encoder, reference: &Sample, others: &[&Sample]) -> Vec<f64> {
    let width = enc.columns.len();
    let samples: Vec<&Sample> = std::iter::once(reference).chain(others.iter().copied()).collect();
    let columns: Vec<Vec<Vec<u16>>> = samples.iter().map(|s| (0..width).map(|c| s.column(c)).collect()).collect();
    let cards: Vec<usize> = (0..width).map(|c| enc.cardinality(c)).collect();
    let live: Vec<usize> = (0..width).filter(|&c| cards[c] > 2).collect();
    let mut best = vec![0.0f64; others.len()];
    let mut compare = |cells: usize, key: &dyn Fn(&[Vec<u16>], usize) -> usize| {
        let counts: Vec<Vec<u32>> = columns
            .iter()
            .zip(&samples)
            .map(|(cols, s)| {
                let mut cnt = vec![0u32; cells];
                for r in 0..s.rows.len() {
                    cnt[key(cols, r)] += 1;
                }
                cnt
            })
            .collect();
        for (t, b) in best.iter_mut().enumerate() {
            let d = tv_counts(&counts[0], &counts[t + 1], samples[0].rows.len(), samples[t + 1].rows.len());
            *b = b.max(d);
        }
    };
    for (i, &a) in live.iter().enumerate() {
        compare(cards[a], &|cols, r| cols[a][r] as usize);
        for &b in &live[i + 1..] {
            if cards[a] * cards[b] <= MAX_PAIR_CELLS {
                let cb = cards[b];
                compare(cards[a] * cb, &|cols, r| cols[a][r] as usize * cb + cols[b][r] as usize);
            }
        }
    }
    best
}

/// Compares `n` real views with `n` simulated ones.
///
/// `real` is called with seeds `0..2n` (the second half forms the
/// real-versus-real split that sets the noise floor), `sim` with `2n..3n`, and
/// the optional `broken` simulator with `3n..4n`.  Each generator must derive
/// all of its coins from the seed it is given.
pub fn zk_test(
    n: usize,
    real: &mut dyn FnMut(u64) -> Result<Transcript>,
    sim: &mut dyn FnMut(u64) -> Result<Transcript>,
    broken: Option<&mut dyn FnMut(u64) -> Result<Transcript>>,
    tolerance: f64,
) -> Result<ZkReport> {
    let n64 = n as u64;
    let mut enc = Encoder::default();
    let real_a = Sample::draw(&mut enc, 0..n64, real)?;
    let real_b = Sample::draw(&mut enc, n64..2 * n64, real)?;
    let simulated = Sample::draw(&mut enc, 2 * n64..3 * n64, sim)?;
    let negative = match broken {
        Some(g) => Some(Sample::draw(&mut enc, 3 * n64..4 * n64, g)?),
        None => None,
    };
    let mut distinct = real_a.digests.clone();
    distinct.sort_unstable();
    distinct.dedup();
    let distinct_views = distinct.len();
    let statistic = if distinct_views * MIN_DIGEST_MULTIPLICITY <= n { Statistic::Digest } else { Statistic::Projections };
    let mut others = vec![&real_b, &simulated];
    others.extend(negative.as_ref());
    let tvs = match statistic {
        Statistic::Digest => others.iter().map(|s| digest_tv(&real_a.digests, &s.digests)).collect(),
        Statistic::Projections => projection_tvs(&enc, &real_a, &others),
    };
    let (noise_floor, tv) = (tvs[0], tvs[1]);
    let negative_control = tvs.get(2).copied();
    Ok(ZkReport {
        samples: n,
        statistic,
        distinct_views,
        tv,
        noise_floor,
        tolerance,
        within_floor: tv <= noise_floor + tolerance,
        negative_control,
        negative_separated: negative_control.map(|d| d >= 5.0 * noise_floor),
    })
}
