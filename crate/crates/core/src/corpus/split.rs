//! Deterministic, pair-preserving train/validation/test splitting.
//!
//! A class-0 sample and its class-1 rewrite always land in the same split;
//! otherwise shared proper nouns would leak across the split boundary and
//! inflate test accuracy. Split sizes follow the largest-remainder rule
//! with ties resolved in train, validation, test order.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{DatasetSplit, Sample};
use crate::error::{Error, Result};

/// Split samples into train/validation/test. Deterministic for a fixed
/// seed; every class-1 sample must have its class-0 source present.
pub fn split_dataset(samples: &[Sample], ratios: [f64; 3], seed: u64) -> Result<DatasetSplit> {
    let sum: f64 = ratios.iter().sum();
    if (sum - 1.0).abs() > 1e-9 || ratios.iter().any(|r| *r < 0.0) {
        return Err(Error::BadRatios(ratios));
    }

    // Group each class-0 sample with its rewrites, keyed by class-0 id.
    // BTreeMap gives a deterministic base order before the shuffle.
    let mut groups: BTreeMap<&str, Vec<&Sample>> = BTreeMap::new();
    for s in samples.iter().filter(|s| s.label == 0) {
        groups.insert(&s.id, vec![s]);
    }
    for s in samples.iter().filter(|s| s.label != 0) {
        let source_id = s.rewrite_source_id().unwrap_or("");
        match groups.get_mut(source_id) {
            Some(group) => group.push(s),
            None => {
                return Err(Error::OrphanRewrite {
                    id: s.id.clone(),
                    source_id: source_id.to_string(),
                })
            }
        }
    }

    let mut ordered: Vec<&Vec<&Sample>> = groups.values().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ordered.shuffle(&mut rng);

    let counts = largest_remainder_counts(ordered.len(), ratios);
    let mut split = DatasetSplit {
        train: Vec::new(),
        validation: Vec::new(),
        test: Vec::new(),
        seed,
        ratios,
    };
    for (i, group) in ordered.into_iter().enumerate() {
        let bucket = if i < counts[0] {
            &mut split.train
        } else if i < counts[0] + counts[1] {
            &mut split.validation
        } else {
            &mut split.test
        };
        bucket.extend(group.iter().map(|s| (*s).clone()));
    }
    Ok(split)
}

/// Floor each split's share, then hand the leftover groups to the splits
/// with the largest fractional remainders (ties in train, validation, test
/// order).
pub(crate) fn largest_remainder_counts(n: usize, ratios: [f64; 3]) -> [usize; 3] {
    let raw: Vec<f64> = ratios.iter().map(|r| r * n as f64).collect();
    let mut counts = [0usize; 3];
    let mut remainders = [(0.0f64, 0usize); 3];
    for i in 0..3 {
        counts[i] = raw[i].floor() as usize;
        remainders[i] = (raw[i] - raw[i].floor(), i);
    }
    let mut leftover = n - counts.iter().sum::<usize>();
    let mut order = remainders;
    order.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
    for (_, idx) in order {
        if leftover == 0 {
            break;
        }
        counts[idx] += 1;
        leftover -= 1;
    }
    counts
}
