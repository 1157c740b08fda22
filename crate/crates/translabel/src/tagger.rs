//! A multi-task averaged-perceptron tagger over the two label tasks.
//!
//! One shared feature extraction feeds two independent perceptrons: one
//! predicts transition parts, the other deprels. Training shuffles sentences
//! with a seeded generator and averages weights over all updates, so the
//! same corpus, epoch count and seed always produce byte-identical models
//! and predictions. There is no feature hashing; the saved model is a plain
//! sorted text table.

use std::collections::{BTreeMap, HashMap};
use std::io::{self, BufRead, Write};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::labeling::{LabelSequence, TokenLabel};
use crate::parallel::map_ordered;
use crate::systems::SystemId;
use crate::treebank::DepTree;

/// Sparse binary features for one token: sorted, deduplicated string keys.
///
/// The window spans two tokens on each side. Per position: the form, its
/// lowercase, prefixes and suffixes of length 1..=3, and the UPOS when one
/// is present. Out-of-range positions contribute a boundary marker, and the
/// first and last tokens carry a flag.
pub fn token_features(tree: &DepTree, index: usize) -> Vec<String> {
    let tokens = tree.tokens();
    let n = tokens.len();
    let mut features = Vec::with_capacity(40);
    for offset in -2i32..=2 {
        let j = index as i32 + offset;
        if j < 0 {
            features.push(format!("f[{offset}]=<s>"));
            continue;
        }
        if j >= n as i32 {
            features.push(format!("f[{offset}]=</s>"));
            continue;
        }
        let token = &tokens[j as usize];
        let form = token.form.as_str();
        features.push(format!("f[{offset}]={form}"));
        features.push(format!("l[{offset}]={}", form.to_lowercase()));
        let chars: Vec<char> = form.chars().collect();
        for len in 1..=3usize.min(chars.len()) {
            let prefix: String = chars[..len].iter().collect();
            let suffix: String = chars[chars.len() - len..].iter().collect();
            features.push(format!("p{len}[{offset}]={prefix}"));
            features.push(format!("s{len}[{offset}]={suffix}"));
        }
        if token.upos != "_" {
            features.push(format!("u[{offset}]={}", token.upos));
        }
    }
    if index == 0 {
        features.push("first".to_string());
    }
    if index == n - 1 {
        features.push("last".to_string());
    }
    features.sort_unstable();
    features.dedup();
    features
}

/// One task's averaged weights.
#[derive(Debug, Clone, PartialEq)]
struct TaskModel {
    /// Sorted label strings; weight rows index into this.
    labels: Vec<String>,
    /// Most frequent training label, used when no feature is known.
    fallback: String,
    /// feature -> label index -> averaged weight.
    weights: HashMap<String, HashMap<usize, f64>>,
}

impl TaskModel {
    fn predict(&self, features: &[String]) -> &str {
        let mut scores = vec![0.0f64; self.labels.len()];
        let mut any_known = false;
        for feature in features {
            if let Some(row) = self.weights.get(feature) {
                any_known = true;
                for (&label, &weight) in row {
                    scores[label] += weight;
                }
            }
        }
        if !any_known {
            return &self.fallback;
        }
        &self.labels[argmax(&scores)]
    }
}

/// First maximum; labels are sorted, so ties pick the lexicographically
/// smallest label.
fn argmax(scores: &[f64]) -> usize {
    let mut best = 0usize;
    for (i, &s) in scores.iter().enumerate().skip(1) {
        if s > scores[best] {
            best = i;
        }
    }
    best
}

/// Perceptron state while training one task.
struct TaskTrainer {
    labels: Vec<String>,
    label_ids: HashMap<String, usize>,
    fallback: String,
    weights: HashMap<String, HashMap<usize, f64>>,
    totals: HashMap<String, HashMap<usize, f64>>,
    stamps: HashMap<String, HashMap<usize, u64>>,
    ticks: u64,
}

impl TaskTrainer {
    fn new(frequencies: &BTreeMap<&str, usize>) -> Self {
        let labels: Vec<String> = frequencies.keys().map(|s| s.to_string()).collect();
        let label_ids = labels.iter().enumerate().map(|(i, l)| (l.clone(), i)).collect();
        let fallback = frequencies
            .iter()
            .max_by_key(|&(_, &count)| count) // iteration order breaks ties low
            .map(|(label, _)| label.to_string())
            .expect("at least one label");
        TaskTrainer {
            labels,
            label_ids,
            fallback,
            weights: HashMap::new(),
            totals: HashMap::new(),
            stamps: HashMap::new(),
            ticks: 0,
        }
    }

    fn raw_predict(&self, features: &[String]) -> usize {
        let mut scores = vec![0.0f64; self.labels.len()];
        for feature in features {
            if let Some(row) = self.weights.get(feature) {
                for (&label, &weight) in row {
                    scores[label] += weight;
                }
            }
        }
        argmax(&scores)
    }

    fn bump(&mut self, feature: &str, label: usize, delta: f64) {
        let ticks = self.ticks;
        let weight =
            self.weights.entry(feature.to_string()).or_default().entry(label).or_insert(0.0);
        let total =
            self.totals.entry(feature.to_string()).or_default().entry(label).or_insert(0.0);
        let stamp = self.stamps.entry(feature.to_string()).or_default().entry(label).or_insert(0);
        *total += *weight * (ticks - *stamp) as f64;
        *stamp = ticks;
        *weight += delta;
    }

    fn observe(&mut self, features: &[String], gold: usize) {
        self.ticks += 1;
        let guess = self.raw_predict(features);
        if guess != gold {
            for feature in features {
                self.bump(feature, gold, 1.0);
                self.bump(feature, guess, -1.0);
            }
        }
    }

    fn finish(self) -> TaskModel {
        let ticks = self.ticks.max(1) as f64;
        let mut averaged: HashMap<String, HashMap<usize, f64>> = HashMap::new();
        for (feature, row) in self.weights {
            let totals = &self.totals[&feature];
            let stamps = &self.stamps[&feature];
            let mut averaged_row = HashMap::new();
            for (label, weight) in row {
                let total = totals[&label] + weight * (self.ticks - stamps[&label]) as f64;
                let mean = total / ticks;
                if mean != 0.0 {
                    averaged_row.insert(label, mean);
                }
            }
            if !averaged_row.is_empty() {
                averaged.insert(feature, averaged_row);
            }
        }
        TaskModel { labels: self.labels, fallback: self.fallback, weights: averaged }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TrainError {
    #[error("training corpus is empty")]
    EmptyCorpus,
    #[error("epochs must be at least 1")]
    ZeroEpochs,
    #[error("mixed systems in corpus: {expected} and {found}")]
    MixedSystems { expected: SystemId, found: SystemId },
    #[error("sentence {index}: {labels} labels for {tokens} tokens")]
    Misaligned { index: usize, labels: usize, tokens: usize },
}

/// The trained two-task tagger.
#[derive(Debug, Clone, PartialEq)]
pub struct TaggerModel {
    system: SystemId,
    epochs: u32,
    seed: u64,
    transition_task: TaskModel,
    deprel_task: TaskModel,
}

/// Trains on (tree, labels) pairs, as produced by encoding a treebank.
pub fn train(
    pairs: &[(&DepTree, &LabelSequence)],
    epochs: u32,
    seed: u64,
) -> Result<TaggerModel, TrainError> {
    if pairs.is_empty() {
        return Err(TrainError::EmptyCorpus);
    }
    if epochs == 0 {
        return Err(TrainError::ZeroEpochs);
    }
    let system = pairs[0].1.system;
    let mut transition_parts: Vec<Vec<String>> = Vec::with_capacity(pairs.len());
    for (index, (tree, sequence)) in pairs.iter().enumerate() {
        if sequence.system != system {
            return Err(TrainError::MixedSystems { expected: system, found: sequence.system });
        }
        if sequence.labels.len() != tree.len() {
            return Err(TrainError::Misaligned {
                index: index + 1,
                labels: sequence.labels.len(),
                tokens: tree.len(),
            });
        }
        transition_parts.push(sequence.labels.iter().map(|l| l.transition_part()).collect());
    }
    let mut transition_freq: BTreeMap<&str, usize> = BTreeMap::new();
    let mut deprel_freq: BTreeMap<&str, usize> = BTreeMap::new();
    for ((_, sequence), parts) in pairs.iter().zip(&transition_parts) {
        for (label, part) in sequence.labels.iter().zip(parts) {
            *transition_freq.entry(part.as_str()).or_insert(0) += 1;
            *deprel_freq.entry(label.deprel.as_str()).or_insert(0) += 1;
        }
    }

    let features: Vec<Vec<Vec<String>>> = map_ordered(pairs, |(tree, _)| {
        (0..tree.len()).map(|i| token_features(tree, i)).collect()
    });

    let mut transition_trainer = TaskTrainer::new(&transition_freq);
    let mut deprel_trainer = TaskTrainer::new(&deprel_freq);
    let mut order: Vec<usize> = (0..pairs.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..epochs {
        order.shuffle(&mut rng);
        for &si in &order {
            let (_, sequence) = pairs[si];
            for (ti, label) in sequence.labels.iter().enumerate() {
                let feats = &features[si][ti];
                let transition_gold = transition_trainer.label_ids[&transition_parts[si][ti]];
                transition_trainer.observe(feats, transition_gold);
                let deprel_gold = deprel_trainer.label_ids[&label.deprel];
                deprel_trainer.observe(feats, deprel_gold);
            }
        }
    }
    Ok(TaggerModel {
        system,
        epochs,
        seed,
        transition_task: transition_trainer.finish(),
        deprel_task: deprel_trainer.finish(),
    })
}

impl TaggerModel {
    pub fn system(&self) -> SystemId {
        self.system
    }

    /// Predicts both label tasks for one sentence. Heads in the input are
    /// ignored; only forms and UPOS feed the features.
    pub fn predict(&self, tree: &DepTree) -> LabelSequence {
        let labels = (0..tree.len())
            .map(|i| {
                let features = token_features(tree, i);
                let part = self.transition_task.predict(&features);
                let deprel = self.deprel_task.predict(&features);
                TokenLabel::new(TokenLabel::parse_transition_part(part), deprel)
            })
            .collect();
        LabelSequence { system: self.system, labels }
    }

    /// Predicts a whole corpus, sentence-parallel.
    pub fn predict_corpus(&self, trees: &[DepTree]) -> Vec<LabelSequence> {
        map_ordered(trees, |tree| self.predict(tree))
    }

    /// Writes the model as sorted text: a header, the label inventories, and
    /// one `w` line per nonzero weight. Identical models serialize to
    /// identical bytes.
    pub fn save<W: Write>(&self, mut writer: W) -> io::Result<()> {
        writeln!(writer, "translabel model 1")?;
        writeln!(writer, "system\t{}", self.system)?;
        writeln!(writer, "epochs\t{}", self.epochs)?;
        writeln!(writer, "seed\t{}", self.seed)?;
        for (name, task) in [("transition", &self.transition_task), ("deprel", &self.deprel_task)] {
            writeln!(writer, "labels\t{name}\t{}", task.labels.len())?;
            for label in &task.labels {
                writeln!(writer, "label\t{name}\t{label}")?;
            }
            writeln!(writer, "fallback\t{name}\t{}", task.fallback)?;
        }
        for (name, task) in [("transition", &self.transition_task), ("deprel", &self.deprel_task)] {
            let sorted: BTreeMap<&String, &HashMap<usize, f64>> = task.weights.iter().collect();
            for (feature, row) in sorted {
                let by_label: BTreeMap<usize, f64> = row.iter().map(|(&l, &w)| (l, w)).collect();
                for (label, weight) in by_label {
                    writeln!(writer, "w\t{name}\t{feature}\t{}\t{weight}", task.labels[label])?;
                }
            }
        }
        Ok(())
    }

    /// Reads a model written by [`TaggerModel::save`].
    pub fn load<R: BufRead>(reader: R) -> Result<TaggerModel, ModelError> {
        let malformed = |line: usize, message: String| ModelError::Malformed { line, message };
        let mut system: Option<SystemId> = None;
        let mut epochs = 0u32;
        let mut seed = 0u64;
        let mut tasks: HashMap<String, TaskModel> = HashMap::new();
        let mut saw_header = false;
        for (idx, line) in reader.lines().enumerate() {
            let line_no = idx + 1;
            let line = line?;
            if line.is_empty() {
                continue;
            }
            if !saw_header {
                if line != "translabel model 1" {
                    return Err(malformed(line_no, format!("unrecognized header {line:?}")));
                }
                saw_header = true;
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            match fields.as_slice() {
                ["system", name] => {
                    system =
                        Some(name.parse().map_err(|e| malformed(line_no, format!("{e}")))?);
                }
                ["epochs", value] => {
                    epochs =
                        value.parse().map_err(|_| malformed(line_no, "bad epochs".into()))?;
                }
                ["seed", value] => {
                    seed = value.parse().map_err(|_| malformed(line_no, "bad seed".into()))?;
                }
                ["labels", task, _count] => {
                    tasks.insert(
                        task.to_string(),
                        TaskModel {
                            labels: Vec::new(),
                            fallback: String::new(),
                            weights: HashMap::new(),
                        },
                    );
                }
                ["label", task, label] => {
                    tasks
                        .get_mut(*task)
                        .ok_or_else(|| malformed(line_no, format!("unknown task {task:?}")))?
                        .labels
                        .push(label.to_string());
                }
                ["fallback", task, label] => {
                    tasks
                        .get_mut(*task)
                        .ok_or_else(|| malformed(line_no, format!("unknown task {task:?}")))?
                        .fallback = label.to_string();
                }
                ["w", task, feature, label, weight] => {
                    let model = tasks
                        .get_mut(*task)
                        .ok_or_else(|| malformed(line_no, format!("unknown task {task:?}")))?;
                    let id = model
                        .labels
                        .iter()
                        .position(|l| l == label)
                        .ok_or_else(|| malformed(line_no, format!("unknown label {label:?}")))?;
                    let weight: f64 =
                        weight.parse().map_err(|_| malformed(line_no, "bad weight".into()))?;
                    model.weights.entry(feature.to_string()).or_default().insert(id, weight);
                }
                _ => return Err(malformed(line_no, format!("unrecognized line {line:?}"))),
            }
        }
        if !saw_header {
            return Err(malformed(0, "empty model file".into()));
        }
        let system = system.ok_or_else(|| malformed(0, "missing system line".into()))?;
        let transition_task = tasks
            .remove("transition")
            .ok_or_else(|| malformed(0, "missing transition task".into()))?;
        let deprel_task =
            tasks.remove("deprel").ok_or_else(|| malformed(0, "missing deprel task".into()))?;
        Ok(TaggerModel { system, epochs, seed, transition_task, deprel_task })
    }
}

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("model line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}
