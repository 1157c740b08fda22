//! The acceptance gate. Each test covers one release criterion and prints a
//! single verdict line (visible with `--nocapture`):
//!
//! ```text
//! cargo test -p translabel --test acceptance -- --nocapture
//! ```

mod common;

use std::collections::BTreeSet;
use std::env;
use std::fs::File;
use std::io::BufReader;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use common::{
    all_trees, figure_tree, single_rooted, synthetic_treebank, tree_from_heads, FIGURE_DEPRELS,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use translabel::eval::{baseline_attach_previous, score};
use translabel::labeling::{
    decode, decode_with_stats, encode, encode_corpus, flatten, label_vocabulary, DecodeStats,
    LabelSequence, OnNonProjective, TokenLabel,
};
use translabel::systems::SystemId;
use translabel::tagger::train;
use translabel::transition::{verify_left_to_right, TransitionKind};
use translabel::treebank::{read_conllu, DepTree};

const STACK_SYSTEMS: [SystemId; 3] =
    [SystemId::ArcStandard, SystemId::ArcEager, SystemId::ArcHybrid];

/// Collects failures for one criterion and prints the verdict line.
struct Gate {
    label: &'static str,
    started: Instant,
    budget: Option<Duration>,
    failures: Vec<String>,
}

impl Gate {
    fn open(label: &'static str, budget: Option<Duration>) -> Self {
        Gate { label, started: Instant::now(), budget, failures: Vec::new() }
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        if !ok {
            self.failures.push(what());
        }
    }

    fn close(mut self) {
        if let Some(budget) = self.budget {
            let elapsed = self.started.elapsed();
            if elapsed > budget {
                self.failures.push(format!("took {elapsed:?}, budget {budget:?}"));
            }
        }
        if self.failures.is_empty() {
            println!("[PASS] {}", self.label);
        } else {
            let detail = self.failures.join("; ");
            println!("[FAIL] {}: {detail}", self.label);
            panic!("{} failed: {detail}", self.label);
        }
    }

    fn skip(label: &str, why: &str) {
        println!("[SKIP] {label}: {why}");
    }
}

fn forms(tree: &DepTree) -> Vec<String> {
    tree.tokens().iter().map(|t| t.form.clone()).collect()
}

fn deprels(tree: &DepTree) -> Vec<String> {
    tree.tokens().iter().map(|t| t.deprel.clone()).collect()
}

/// The criterion 2/3 enumeration: single-rooted projective trees up to six
/// tokens for a projective system, all single-rooted trees up to five for
/// the non-projective one.
fn enumeration_for(system: SystemId) -> Vec<DepTree> {
    let max = if system.is_projective_only() { 6 } else { 5 };
    let mut trees = Vec::new();
    for n in 1..=max {
        for tree in all_trees(n) {
            if single_rooted(&tree) && (!system.is_projective_only() || tree.is_projective()) {
                trees.push(tree);
            }
        }
    }
    trees
}

#[test]
fn criterion_1_running_example_labels_match_the_frozen_rows() {
    let mut gate =
        Gate::open("criterion 1: running-example label rows", Some(Duration::from_secs(1)));
    let tree = figure_tree();
    let expected: [(SystemId, [&str; 10]); 4] = [
        (
            SystemId::ArcStandard,
            [
                "SH",
                "SH-LA",
                "SH",
                "SH",
                "SH-LA-LA-RA",
                "SH",
                "SH",
                "SH-LA-LA",
                "SH",
                "SH-LA-RA-RA-RA",
            ],
        ),
        (
            SystemId::ArcEager,
            [
                "SH-LA",
                "RA",
                "SH",
                "SH-LA-LA",
                "RA",
                "SH",
                "SH-LA-LA-RE",
                "RA",
                "SH-LA",
                "RA-RE-RE-RE",
            ],
        ),
        (
            SystemId::ArcHybrid,
            [
                "SH-LA",
                "SH",
                "SH",
                "SH-LA-LA",
                "SH-RA",
                "SH",
                "SH-LA-LA",
                "SH",
                "SH-LA",
                "SH-RA-RA-RA",
            ],
        ),
        (
            SystemId::Covington,
            [
                "SH",
                "SH-LA-RA",
                "SH",
                "SH",
                "SH-LA-LA-RA",
                "SH",
                "SH",
                "SH-LA-LA-NA-NA-NA-RA",
                "SH",
                "SH-LA-RA",
            ],
        ),
    ];
    for (system, rows) in expected {
        let sequence = encode(system, &tree).unwrap();
        let got: Vec<String> = sequence.labels.iter().map(|l| l.transition_part()).collect();
        gate.check(got == rows, || format!("{system}: got {got:?}"));
        let got_deprels: Vec<String> =
            sequence.labels.iter().map(|l| l.deprel.clone()).collect();
        gate.check(got_deprels == FIGURE_DEPRELS, || format!("{system} deprels: {got_deprels:?}"));
    }
    gate.close();
}

#[test]
fn criterion_2_round_trips_are_identities_over_small_trees() {
    let mut gate = Gate::open(
        "criterion 2: decode(encode(t)) = t over the small-tree enumerations",
        Some(Duration::from_secs(120)),
    );
    for system in SystemId::ALL {
        let trees = enumeration_for(system);
        let expected_count = if system.is_projective_only() { 911 } else { 701 };
        gate.check(trees.len() == expected_count, || {
            format!("{system}: enumerated {} trees, expected {expected_count}", trees.len())
        });
        let mut decoded_corpus = Vec::with_capacity(trees.len());
        let mut mismatches = 0usize;
        let mut example = String::new();
        for tree in &trees {
            let sequence = encode(system, tree).unwrap();
            let decoded = decode(system, &sequence.labels, &forms(tree));
            if decoded.heads() != tree.heads() || deprels(&decoded) != deprels(tree) {
                mismatches += 1;
                if example.is_empty() {
                    example = format!(
                        "heads {:?} decoded to {:?}",
                        tree.heads(),
                        decoded.heads()
                    );
                }
            }
            decoded_corpus.push(decoded);
        }
        gate.check(mismatches == 0, || format!("{system}: {mismatches} mismatches, e.g. {example}"));
        let report = score(&trees, &decoded_corpus).unwrap();
        gate.check(report.uas == 100.0 && report.las == 100.0, || {
            format!("{system}: UAS {} LAS {}", report.uas, report.las)
        });
    }
    gate.close();
}

#[test]
fn criterion_3_left_to_right_conditions_hold_with_the_documented_lookahead() {
    let mut gate = Gate::open(
        "criterion 3: one read per token and minimal lookahead 0/1/1/0",
        Some(Duration::from_secs(120)),
    );
    for system in SystemId::ALL {
        let mut max_k = 0usize;
        let mut condition1_violations = 0usize;
        for tree in enumeration_for(system) {
            let sequence = encode(system, &tree).unwrap();
            let report =
                verify_left_to_right(system, tree.len(), &flatten(&sequence), system.lookahead())
                    .unwrap();
            if !report.condition1 || !report.condition2 {
                condition1_violations += 1;
            }
            max_k = max_k.max(report.minimal_k);
        }
        gate.check(condition1_violations == 0, || {
            format!("{system}: {condition1_violations} sequences failed verification")
        });
        gate.check(max_k == system.lookahead(), || {
            format!("{system}: max minimal k {max_k}, documented {}", system.lookahead())
        });
    }
    gate.close();
}

#[test]
fn criterion_4_decoder_is_total_and_every_repair_fires() {
    let mut gate = Gate::open(
        "criterion 4: 20,000 fuzzed label sequences per system decode to single-rooted trees",
        Some(Duration::from_secs(60)),
    );
    let mut rng = ChaCha8Rng::seed_from_u64(0xF0DD);
    let deprel_pool = ["root", "dep", "aa", "bb", "cc"];
    for system in SystemId::ALL {
        let mut vocabulary: BTreeSet<String> = BTreeSet::new();
        for n in 1..=4 {
            for tree in all_trees(n) {
                if !single_rooted(&tree)
                    || (system.is_projective_only() && !tree.is_projective())
                {
                    continue;
                }
                for label in encode(system, &tree).unwrap().labels {
                    vocabulary.insert(label.transition_part());
                }
            }
        }
        let vocabulary: Vec<String> = vocabulary.into_iter().collect();
        let mut aggregate = DecodeStats::default();
        let mut malformed_outputs = 0usize;
        let mut decode_one = |labels: Vec<TokenLabel>, aggregate: &mut DecodeStats| {
            let names: Vec<String> = (1..=labels.len()).map(|i| format!("w{i}")).collect();
            let (tree, stats) = decode_with_stats(system, &labels, &names);
            if tree.len() != labels.len() || tree.root_ids().len() != 1 {
                malformed_outputs += 1;
            }
            aggregate.absorb(&stats);
        };
        for _ in 0..10_000 {
            let n = rng.random_range(1..=8);
            let labels: Vec<TokenLabel> = (0..n)
                .map(|_| {
                    let part = &vocabulary[rng.random_range(0..vocabulary.len())];
                    TokenLabel::new(
                        TokenLabel::parse_transition_part(part),
                        deprel_pool[rng.random_range(0..deprel_pool.len())],
                    )
                })
                .collect();
            decode_one(labels, &mut aggregate);
        }
        for _ in 0..10_000 {
            let n = rng.random_range(1..=8);
            let labels: Vec<TokenLabel> = (0..n)
                .map(|_| {
                    let length = rng.random_range(0..=3);
                    let transitions =
                        (0..length).map(|_| TransitionKind::ALL[rng.random_range(0..5)]).collect();
                    TokenLabel::new(
                        transitions,
                        deprel_pool[rng.random_range(0..deprel_pool.len())],
                    )
                })
                .collect();
            decode_one(labels, &mut aggregate);
        }
        gate.check(malformed_outputs == 0, || {
            format!("{system}: {malformed_outputs} malformed outputs")
        });
        let counters = [
            ("skipped transitions", aggregate.skipped_transitions),
            ("forced reads", aggregate.forced_reads),
            ("deprel root promotions", aggregate.deprel_roots_promoted),
            ("first-token promotions", aggregate.first_token_promoted),
            ("extra-root reattachments", aggregate.extra_roots_reattached),
            ("headless attachments", aggregate.headless_attached),
        ];
        for (name, value) in counters {
            gate.check(value >= 1, || format!("{system}: repair `{name}` never fired"));
        }
        if system == SystemId::Covington {
            gate.check(aggregate.terminal_shift_appended, || {
                "covington: terminal shift never appended".to_string()
            });
        }
    }
    gate.close();
}

fn ewt_file(dir: &std::ffi::OsStr, name: &str) -> Option<Vec<DepTree>> {
    let path = PathBuf::from(dir).join(name);
    let file = File::open(&path).ok()?;
    read_conllu(BufReader::new(file)).ok()
}

#[test]
fn criterion_5_treebank_vocabulary_magnitudes() {
    let label = "criterion 5: train-split label-vocabulary magnitudes";
    let Some(dir) = env::var_os("UD_ENGLISH_EWT_DIR") else {
        Gate::skip(label, "UD_ENGLISH_EWT_DIR not set");
        return;
    };
    let Some(trees) = ewt_file(&dir, "en_ewt-ud-train.conllu") else {
        Gate::skip(label, "en_ewt-ud-train.conllu not readable");
        return;
    };
    let mut gate = Gate::open(label, None);
    let expected = [
        (SystemId::ArcStandard, 90usize),
        (SystemId::ArcEager, 509),
        (SystemId::ArcHybrid, 52),
        (SystemId::Covington, 2804),
    ];
    let mut counts = Vec::new();
    for (system, reference) in expected {
        let report = label_vocabulary(system, &trees);
        let count = report.transition_label_count();
        let low = reference * 3 / 4;
        let high = reference * 5 / 4;
        gate.check((low..=high).contains(&count), || {
            format!("{system}: {count} transition labels outside [{low}, {high}]")
        });
        if system == SystemId::Covington {
            gate.check(report.deprel_count() == 51, || {
                format!("deprel vocabulary {} instead of 51", report.deprel_count())
            });
            gate.check(report.sentences_skipped == 0, || {
                format!("covington skipped {}", report.sentences_skipped)
            });
        }
        counts.push((system, count));
    }
    let by_system = |wanted: SystemId| counts.iter().find(|(s, _)| *s == wanted).unwrap().1;
    let ordered = by_system(SystemId::ArcHybrid) < by_system(SystemId::ArcStandard)
        && by_system(SystemId::ArcStandard) < by_system(SystemId::ArcEager)
        && by_system(SystemId::ArcEager) < by_system(SystemId::Covington);
    gate.check(ordered, || format!("vocabulary ordering violated: {counts:?}"));
    gate.close();
}

#[test]
fn criterion_6_tagger_pipeline_beats_the_positional_baseline() {
    let mut gate = Gate::open(
        "criterion 6: 5-epoch tagger beats attach-to-previous by 15+ UAS",
        Some(Duration::from_secs(600)),
    );
    let train_trees = synthetic_treebank(1200, 11);
    let dev_trees = synthetic_treebank(200, 12);
    let lengths: Vec<usize> = dev_trees.iter().map(|t| t.len()).collect();
    let baseline = score(&dev_trees, &baseline_attach_previous(&lengths)).unwrap();
    for system in SystemId::ALL {
        let encoding = encode_corpus(system, &train_trees, OnNonProjective::Skip).unwrap();
        gate.check(encoding.skipped.is_empty(), || {
            format!("{system}: synthetic treebank lost {} sentences", encoding.skipped.len())
        });
        let pairs: Vec<(&DepTree, &LabelSequence)> = encoding
            .kept
            .iter()
            .zip(&encoding.sequences)
            .map(|(&i, sequence)| (&train_trees[i], sequence))
            .collect();
        let model = train(&pairs, 5, 1).unwrap();
        let decoded: Vec<DepTree> = model
            .predict_corpus(&dev_trees)
            .iter()
            .zip(&dev_trees)
            .map(|(sequence, tree)| decode(system, &sequence.labels, &forms(tree)))
            .collect();
        let result = score(&dev_trees, &decoded).unwrap();
        gate.check(result.uas >= baseline.uas + 15.0, || {
            format!("{system}: UAS {:.2} vs baseline {:.2}", result.uas, baseline.uas)
        });
    }
    match env::var_os("UD_ENGLISH_EWT_DIR") {
        Some(dir) => {
            let loaded = ewt_file(&dir, "en_ewt-ud-train.conllu")
                .zip(ewt_file(&dir, "en_ewt-ud-dev.conllu"));
            match loaded {
                Some((ewt_train, ewt_dev)) => {
                    let system = SystemId::ArcHybrid;
                    let encoding =
                        encode_corpus(system, &ewt_train, OnNonProjective::Skip).unwrap();
                    let pairs: Vec<(&DepTree, &LabelSequence)> = encoding
                        .kept
                        .iter()
                        .zip(&encoding.sequences)
                        .map(|(&i, sequence)| (&ewt_train[i], sequence))
                        .collect();
                    let model = train(&pairs, 5, 1).unwrap();
                    let decoded: Vec<DepTree> = model
                        .predict_corpus(&ewt_dev)
                        .iter()
                        .zip(&ewt_dev)
                        .map(|(sequence, tree)| decode(system, &sequence.labels, &forms(tree)))
                        .collect();
                    let result = score(&ewt_dev, &decoded).unwrap();
                    gate.check(result.uas > 50.0, || {
                        format!("dev UAS {:.2} not above 50", result.uas)
                    });
                }
                None => Gate::skip("criterion 6 (dev split)", "treebank files not readable"),
            }
        }
        None => Gate::skip("criterion 6 (dev split)", "UD_ENGLISH_EWT_DIR not set"),
    }
    gate.close();
}

#[test]
fn criterion_7_scoring_identities_and_single_error_deltas() {
    let mut gate = Gate::open("criterion 7: scoring identities", None);
    let gold = figure_tree();
    let gold_slice = std::slice::from_ref(&gold);
    let perfect = score(gold_slice, gold_slice).unwrap();
    gate.check(perfect.uas == 100.0 && perfect.las == 100.0, || {
        format!("self-score {:?} {:?}", perfect.uas, perfect.las)
    });

    let mut wrong_head = gold.heads();
    wrong_head[2] = 2; // the token 3 -> 5 arc becomes 3 -> 2
    let gold_deprels: Vec<String> = deprels(&gold);
    let refs: Vec<&str> = gold_deprels.iter().map(String::as_str).collect();
    let head_error = DepTree::from_heads(&wrong_head, &refs).unwrap();
    let report = score(gold_slice, &[head_error]).unwrap();
    gate.check(report.uas == 90.0 && report.las == 90.0, || {
        format!("one wrong head scored {} / {}", report.uas, report.las)
    });

    let mut wrong_label = refs.clone();
    wrong_label[2] = "amod";
    let label_error = DepTree::from_heads(&gold.heads(), &wrong_label).unwrap();
    let report = score(gold_slice, &[label_error]).unwrap();
    gate.check(report.uas == 100.0 && report.las == 90.0, || {
        format!("one wrong deprel scored {} / {}", report.uas, report.las)
    });
    gate.close();
}

#[test]
fn criterion_8_non_projective_sentences_are_skipped_exactly() {
    let mut gate = Gate::open(
        "criterion 8: full coverage for covington, exact skips elsewhere",
        None,
    );
    let crossing = tree_from_heads(&[3, 4, 0, 3]).unwrap();
    let root_crossing = tree_from_heads(&[2, 0, 1]).unwrap();
    gate.check(!crossing.is_projective(), || "crossing fixture is projective".into());
    gate.check(!root_crossing.is_projective(), || "root-crossing fixture is projective".into());
    let corpus = vec![
        figure_tree(),
        crossing.clone(),
        tree_from_heads(&[0, 1, 2]).unwrap(),
        root_crossing.clone(),
        tree_from_heads(&[2, 0]).unwrap(),
    ];
    for system in STACK_SYSTEMS {
        let encoding = encode_corpus(system, &corpus, OnNonProjective::Skip).unwrap();
        gate.check(encoding.skipped == vec![1, 3], || {
            format!("{system}: skipped {:?}", encoding.skipped)
        });
        gate.check(encoding.kept == vec![0, 2, 4], || {
            format!("{system}: kept {:?}", encoding.kept)
        });
        let error = encode_corpus(system, &corpus, OnNonProjective::Fail).unwrap_err();
        gate.check(error.sentence == 2, || {
            format!("{system}: fail policy reported sentence {}", error.sentence)
        });
    }
    let encoding = encode_corpus(SystemId::Covington, &corpus, OnNonProjective::Skip).unwrap();
    gate.check(encoding.skipped.is_empty(), || {
        format!("covington skipped {:?}", encoding.skipped)
    });
    gate.check(encoding.kept.len() == corpus.len(), || {
        format!("covington kept {} of {}", encoding.kept.len(), corpus.len())
    });
    for tree in [&crossing, &root_crossing] {
        let sequence = encode(SystemId::Covington, tree).unwrap();
        let decoded = decode(SystemId::Covington, &sequence.labels, &forms(tree));
        gate.check(decoded.heads() == tree.heads(), || {
            format!("covington round trip changed {:?}", tree.heads())
        });
    }
    gate.close();
}
