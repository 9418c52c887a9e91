//! Synthetic ordinal datasets with known latent depths, item/pair splits,
//! and the JSON-Lines interchange format.
//!
//! Generated items carry a latent depth drawn uniformly from [1, 10]. The
//! observable features are a fixed map of the depth -- the first three
//! dimensions are `[d, d^2/10, ln d]`, any further dimensions are
//! distractors with no depth signal -- plus Gaussian noise on every
//! dimension whose scale is [`BASE_NOISE_SCALE`] for clean items and the
//! configured larger scale for ambiguous ones. Pair relations come from
//! the latent depths and are then flipped independently with the
//! configured probability, so the flip probability is the Bayes error
//! floor of any predictor evaluated against the stored labels.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::OrdinalPair;

/// Feature-noise scale of clean items.
pub const BASE_NOISE_SCALE: f64 = 0.12;
/// Latent depths are drawn uniformly from this range.
pub const DEPTH_RANGE: (f64, f64) = (1.0, 10.0);
/// Number of informative feature dimensions (depth, depth^2/10, ln depth).
pub const INFORMATIVE_DIMS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseClass {
    Clean,
    Ambiguous,
}

/// A dataset item: observable features, plus the latent depth and noise
/// class when the item came from the generator (file-loaded items may
/// carry only features).
#[derive(Debug, Clone, PartialEq)]
pub struct Item {
    pub features: Vec<f64>,
    pub depth: Option<f64>,
    pub noise_class: Option<NoiseClass>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitTag {
    Train,
    Test,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankingDataset {
    pub items: Vec<Item>,
    pub pairs: Vec<OrdinalPair>,
    pub split_tag: SplitTag,
}

impl RankingDataset {
    /// Builds a dataset, checking pair indices and feature-dimension
    /// consistency.
    pub fn from_parts(items: Vec<Item>, pairs: Vec<OrdinalPair>) -> Result<Self> {
        if let Some(dim) = items.first().map(|it| it.features.len()) {
            if let Some(bad) = items.iter().find(|it| it.features.len() != dim) {
                return Err(Error::InvalidArgument(format!(
                    "inconsistent feature dimensions: {} vs {}",
                    dim,
                    bad.features.len()
                )));
            }
        }
        for pair in &pairs {
            for index in [pair.i, pair.j] {
                if index >= items.len() {
                    return Err(Error::IndexOutOfRange {
                        index,
                        len: items.len(),
                    });
                }
            }
        }
        Ok(Self {
            items,
            pairs,
            split_tag: SplitTag::Train,
        })
    }

    pub fn feature_dim(&self) -> Option<usize> {
        self.items.first().map(|it| it.features.len())
    }

    /// Borrowed feature views, aligned with item indices.
    pub fn feature_views(&self) -> Vec<&[f64]> {
        self.items.iter().map(|it| it.features.as_slice()).collect()
    }
}

/// Generator settings. `ambiguous_noise_scale` is an absolute feature
/// noise scale; the conventional "times base" setting is this value over
/// [`BASE_NOISE_SCALE`].
#[derive(Debug, Clone, PartialEq)]
pub struct GenConfig {
    pub item_count: usize,
    pub feature_dim: usize,
    pub pairs_per_item: f64,
    pub label_flip_prob: f64,
    pub ambiguous_fraction: f64,
    pub ambiguous_noise_scale: f64,
    pub seed: u64,
}

impl Default for GenConfig {
    fn default() -> Self {
        Self {
            item_count: 2000,
            feature_dim: 8,
            pairs_per_item: 5.0,
            label_flip_prob: 0.0,
            ambiguous_fraction: 0.0,
            ambiguous_noise_scale: 5.0 * BASE_NOISE_SCALE,
            seed: 7,
        }
    }
}

impl GenConfig {
    pub fn validate(&self) -> Result<()> {
        if self.item_count == 0 {
            return Err(Error::InvalidArgument("item count must be positive".into()));
        }
        if self.feature_dim == 0 {
            return Err(Error::InvalidArgument(
                "feature dimension must be positive".into(),
            ));
        }
        if !self.pairs_per_item.is_finite() || self.pairs_per_item < 0.0 {
            return Err(Error::InvalidArgument(
                "pairs per item must be finite and nonnegative".into(),
            ));
        }
        if !(0.0..0.5).contains(&self.label_flip_prob) {
            return Err(Error::InvalidArgument(format!(
                "label flip probability must be in [0, 0.5), got {}",
                self.label_flip_prob
            )));
        }
        if !(0.0..=1.0).contains(&self.ambiguous_fraction) {
            return Err(Error::InvalidArgument(format!(
                "ambiguous fraction must be in [0, 1], got {}",
                self.ambiguous_fraction
            )));
        }
        if !self.ambiguous_noise_scale.is_finite() || self.ambiguous_noise_scale <= 0.0 {
            return Err(Error::InvalidArgument(
                "ambiguous noise scale must be positive".into(),
            ));
        }
        let pair_target = self.item_count as f64 * self.pairs_per_item;
        if pair_target >= 1.0 && self.item_count < 2 {
            return Err(Error::InvalidArgument(
                "sampling pairs requires at least two items".into(),
            ));
        }
        Ok(())
    }
}

fn informative_features(depth: f64, dim: usize) -> Vec<f64> {
    let mut out = vec![0.0; dim];
    let map = [depth, depth * depth / 10.0, depth.ln()];
    for (slot, value) in out.iter_mut().zip(map.iter()) {
        *slot = *value;
    }
    out
}

/// Draws a synthetic dataset. Fully deterministic for a given config.
pub fn generate(config: &GenConfig) -> Result<RankingDataset> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let n = config.item_count;

    let mut items = Vec::with_capacity(n);
    for _ in 0..n {
        let depth = rng.gen_range(DEPTH_RANGE.0..=DEPTH_RANGE.1);
        let ambiguous = config.ambiguous_fraction > 0.0 && rng.gen_bool(config.ambiguous_fraction);
        let scale = if ambiguous {
            config.ambiguous_noise_scale
        } else {
            BASE_NOISE_SCALE
        };
        let mut features = informative_features(depth, config.feature_dim);
        for slot in features.iter_mut() {
            let noise: f64 = rng.sample(StandardNormal);
            *slot += scale * noise;
        }
        items.push(Item {
            features,
            depth: Some(depth),
            noise_class: Some(if ambiguous {
                NoiseClass::Ambiguous
            } else {
                NoiseClass::Clean
            }),
        });
    }

    let pair_count = (config.item_count as f64 * config.pairs_per_item).round() as usize;
    let mut pairs = Vec::with_capacity(pair_count);
    for _ in 0..pair_count {
        // Re-draw until the endpoints are distinct items with distinct
        // depths (exact depth ties are measure zero but guarded anyway).
        let (i, j) = loop {
            let i = rng.gen_range(0..n);
            let j = rng.gen_range(0..n);
            if i != j && items[i].depth != items[j].depth {
                break (i, j);
            }
        };
        let mut relation: i8 = if items[i].depth > items[j].depth { 1 } else { -1 };
        if config.label_flip_prob > 0.0 && rng.gen_bool(config.label_flip_prob) {
            relation = -relation;
        }
        pairs.push(OrdinalPair::new(i, j, relation, 1.0)?);
    }

    RankingDataset::from_parts(items, pairs)
}

/// Fraction of stored relations that disagree with the latent-depth
/// ordering. `None` when any endpoint lacks a depth or there are no pairs.
pub fn realized_flip_fraction(dataset: &RankingDataset) -> Option<f64> {
    if dataset.pairs.is_empty() {
        return None;
    }
    let mut flipped = 0usize;
    for pair in &dataset.pairs {
        let di = dataset.items[pair.i].depth?;
        let dj = dataset.items[pair.j].depth?;
        let clean: i8 = if di > dj { 1 } else { -1 };
        if pair.relation != clean {
            flipped += 1;
        }
    }
    Some(flipped as f64 / dataset.pairs.len() as f64)
}

/// Splits items disjointly into train/test; only pairs with both
/// endpoints on one side survive into that side.
pub fn split(
    dataset: &RankingDataset,
    test_fraction: f64,
    seed: u64,
) -> Result<(RankingDataset, RankingDataset)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "test fraction must be in (0, 1), got {test_fraction}"
        )));
    }
    let n = dataset.items.len();
    if n < 2 {
        return Err(Error::DegenerateSplit(
            "cannot split fewer than two items".into(),
        ));
    }
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rand::seq::SliceRandom::shuffle(order.as_mut_slice(), &mut rng);
    let n_test = ((n as f64 * test_fraction).round() as usize).clamp(1, n - 1);

    let mut is_test = vec![false; n];
    for &idx in order.iter().take(n_test) {
        is_test[idx] = true;
    }

    // Items keep their original relative order inside each side.
    let mut remap = vec![usize::MAX; n];
    let mut train_items = Vec::with_capacity(n - n_test);
    let mut test_items = Vec::with_capacity(n_test);
    for (idx, item) in dataset.items.iter().enumerate() {
        if is_test[idx] {
            remap[idx] = test_items.len();
            test_items.push(item.clone());
        } else {
            remap[idx] = train_items.len();
            train_items.push(item.clone());
        }
    }

    let mut train_pairs = Vec::new();
    let mut test_pairs = Vec::new();
    for pair in &dataset.pairs {
        match (is_test[pair.i], is_test[pair.j]) {
            (false, false) => train_pairs.push(OrdinalPair {
                i: remap[pair.i],
                j: remap[pair.j],
                ..*pair
            }),
            (true, true) => test_pairs.push(OrdinalPair {
                i: remap[pair.i],
                j: remap[pair.j],
                ..*pair
            }),
            _ => {}
        }
    }
    if train_pairs.is_empty() || test_pairs.is_empty() {
        return Err(Error::DegenerateSplit(format!(
            "split left {} train and {} test pairs",
            train_pairs.len(),
            test_pairs.len()
        )));
    }

    let mut train = RankingDataset::from_parts(train_items, train_pairs)?;
    train.split_tag = SplitTag::Train;
    let mut test = RankingDataset::from_parts(test_items, test_pairs)?;
    test.split_tag = SplitTag::Test;
    Ok((train, test))
}

// JSON-Lines records. Items must precede the pairs that reference them.

fn unit_weight() -> f64 {
    1.0
}

fn is_unit_weight(w: &f64) -> bool {
    *w == 1.0
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
enum Record {
    Item {
        id: u64,
        features: Vec<f64>,
        #[serde(skip_serializing_if = "Option::is_none", default)]
        depth: Option<f64>,
        #[serde(skip_serializing_if = "Option::is_none", default)]
        noise_class: Option<NoiseClass>,
    },
    Pair {
        i: u64,
        j: u64,
        r: i64,
        #[serde(skip_serializing_if = "is_unit_weight", default = "unit_weight")]
        w: f64,
    },
}

/// Writes the dataset as JSON Lines (UTF-8, LF): one item record per item
/// in index order, then one pair record per pair.
pub fn save_jsonl<P: AsRef<Path>>(dataset: &RankingDataset, path: P) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    for (id, item) in dataset.items.iter().enumerate() {
        let record = Record::Item {
            id: id as u64,
            features: item.features.clone(),
            depth: item.depth,
            noise_class: item.noise_class,
        };
        let line = serde_json::to_string(&record)
            .map_err(|e| Error::InvalidArgument(format!("serialization failed: {e}")))?;
        out.write_all(line.as_bytes())?;
        out.write_all(b"\n")?;
    }
    for pair in &dataset.pairs {
        let record = Record::Pair {
            i: pair.i as u64,
            j: pair.j as u64,
            r: pair.relation as i64,
            w: pair.weight,
        };
        let line = serde_json::to_string(&record)
            .map_err(|e| Error::InvalidArgument(format!("serialization failed: {e}")))?;
        out.write_all(line.as_bytes())?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

/// Reads a JSON-Lines dataset. Errors carry 1-based line numbers;
/// equality relations (r = 0) are rejected, other out-of-range relations
/// are schema errors, and a missing weight defaults to 1.
pub fn load_jsonl<P: AsRef<Path>>(path: P) -> Result<RankingDataset> {
    let reader = BufReader::new(File::open(path)?);
    let mut items: Vec<Item> = Vec::new();
    let mut pairs: Vec<OrdinalPair> = Vec::new();
    let mut id_to_index: HashMap<u64, usize> = HashMap::new();
    let mut feature_dim: Option<usize> = None;

    for (lineno, line) in reader.lines().enumerate() {
        let lineno = lineno + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: Record = serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: lineno,
            message: e.to_string(),
        })?;
        match record {
            Record::Item {
                id,
                features,
                depth,
                noise_class,
            } => {
                if id_to_index.contains_key(&id) {
                    return Err(Error::Parse {
                        line: lineno,
                        message: format!("duplicate item id {id}"),
                    });
                }
                if features.is_empty() || features.iter().any(|f| !f.is_finite()) {
                    return Err(Error::Parse {
                        line: lineno,
                        message: "item features must be a nonempty list of finite reals".into(),
                    });
                }
                match feature_dim {
                    None => feature_dim = Some(features.len()),
                    Some(dim) if dim != features.len() => {
                        return Err(Error::Parse {
                            line: lineno,
                            message: format!(
                                "feature dimension {} differs from {}",
                                features.len(),
                                dim
                            ),
                        })
                    }
                    _ => {}
                }
                if let Some(d) = depth {
                    if !d.is_finite() || d <= 0.0 {
                        return Err(Error::Parse {
                            line: lineno,
                            message: format!("depth must be finite and positive, got {d}"),
                        });
                    }
                }
                id_to_index.insert(id, items.len());
                items.push(Item {
                    features,
                    depth,
                    noise_class,
                });
            }
            Record::Pair { i, j, r, w } => {
                if r == 0 {
                    return Err(Error::UnsupportedRelation {
                        value: 0,
                        line: Some(lineno),
                    });
                }
                if r != 1 && r != -1 {
                    return Err(Error::Parse {
                        line: lineno,
                        message: format!("relation must be -1 or 1, got {r}"),
                    });
                }
                let resolve = |id: u64| {
                    id_to_index.get(&id).copied().ok_or(Error::Parse {
                        line: lineno,
                        message: format!("pair references unknown item id {id}"),
                    })
                };
                let pair = OrdinalPair::new(resolve(i)?, resolve(j)?, r as i8, w).map_err(|e| {
                    Error::Parse {
                        line: lineno,
                        message: e.to_string(),
                    }
                })?;
                pairs.push(pair);
            }
        }
    }
    RankingDataset::from_parts(items, pairs)
}
