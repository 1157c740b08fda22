//! Attachment scoring and trivial baselines.

use thiserror::Error;

use crate::labeling::LabeledSentence;
use crate::treebank::DepTree;

/// Attachment scores over a corpus. Percentages are 100 when no tokens were
/// counted, so scoring a corpus against itself is always (100, 100).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoreReport {
    pub sentences: usize,
    /// Tokens counted (after any punctuation filtering).
    pub tokens: usize,
    pub correct_heads: usize,
    pub correct_labeled: usize,
    /// Percentage of counted tokens with the correct head.
    pub uas: f64,
    /// Percentage with the correct head and deprel.
    pub las: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum ScoreError {
    #[error("corpus size mismatch: {gold} gold sentences vs {predicted} predicted")]
    SentenceCount { gold: usize, predicted: usize },
    #[error("sentence {index}: token count mismatch ({gold} gold vs {predicted} predicted)")]
    TokenCount { index: usize, gold: usize, predicted: usize },
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ScoreOptions {
    /// Skip tokens whose gold UPOS is PUNCT.
    pub ignore_punct: bool,
}

fn percentage(part: usize, total: usize) -> f64 {
    if total == 0 {
        100.0
    } else {
        100.0 * part as f64 / total as f64
    }
}

/// Unlabeled and labeled attachment scores with default options.
pub fn score(gold: &[DepTree], predicted: &[DepTree]) -> Result<ScoreReport, ScoreError> {
    score_with(gold, predicted, ScoreOptions::default())
}

/// Attachment scores; `options.ignore_punct` drops punctuation tokens from
/// the counts.
pub fn score_with(
    gold: &[DepTree],
    predicted: &[DepTree],
    options: ScoreOptions,
) -> Result<ScoreReport, ScoreError> {
    if gold.len() != predicted.len() {
        return Err(ScoreError::SentenceCount { gold: gold.len(), predicted: predicted.len() });
    }
    let mut tokens = 0usize;
    let mut correct_heads = 0usize;
    let mut correct_labeled = 0usize;
    for (index, (g, p)) in gold.iter().zip(predicted).enumerate() {
        if g.len() != p.len() {
            return Err(ScoreError::TokenCount {
                index: index + 1,
                gold: g.len(),
                predicted: p.len(),
            });
        }
        for (gt, pt) in g.tokens().iter().zip(p.tokens()) {
            if options.ignore_punct && gt.upos == "PUNCT" {
                continue;
            }
            tokens += 1;
            if gt.head == pt.head {
                correct_heads += 1;
                if gt.deprel == pt.deprel {
                    correct_labeled += 1;
                }
            }
        }
    }
    Ok(ScoreReport {
        sentences: gold.len(),
        tokens,
        correct_heads,
        correct_labeled,
        uas: percentage(correct_heads, tokens),
        las: percentage(correct_labeled, tokens),
    })
}

/// Token-level accuracies of the two label tasks, for comparing label files
/// directly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabelAccuracy {
    pub tokens: usize,
    pub transition_correct: usize,
    pub deprel_correct: usize,
    pub transition_accuracy: f64,
    pub deprel_accuracy: f64,
}

/// Compares two label files token by token.
pub fn label_accuracy(
    gold: &[LabeledSentence],
    predicted: &[LabeledSentence],
) -> Result<LabelAccuracy, ScoreError> {
    if gold.len() != predicted.len() {
        return Err(ScoreError::SentenceCount { gold: gold.len(), predicted: predicted.len() });
    }
    let mut tokens = 0usize;
    let mut transition_correct = 0usize;
    let mut deprel_correct = 0usize;
    for (index, (g, p)) in gold.iter().zip(predicted).enumerate() {
        if g.labels.len() != p.labels.len() {
            return Err(ScoreError::TokenCount {
                index: index + 1,
                gold: g.labels.len(),
                predicted: p.labels.len(),
            });
        }
        for (gl, pl) in g.labels.iter().zip(&p.labels) {
            tokens += 1;
            if gl.transitions == pl.transitions {
                transition_correct += 1;
            }
            if gl.deprel == pl.deprel {
                deprel_correct += 1;
            }
        }
    }
    Ok(LabelAccuracy {
        tokens,
        transition_correct,
        deprel_correct,
        transition_accuracy: percentage(transition_correct, tokens),
        deprel_accuracy: percentage(deprel_correct, tokens),
    })
}

/// The attach-to-previous baseline: token 1 is the root, every other token
/// hangs off its left neighbor.
pub fn baseline_attach_previous(tokens_per_sentence: &[usize]) -> Vec<DepTree> {
    tokens_per_sentence
        .iter()
        .map(|&n| {
            assert!(n >= 1, "sentences have at least one token");
            let heads: Vec<usize> = (0..n).collect();
            let deprels: Vec<&str> = (0..n).map(|i| if i == 0 { "root" } else { "dep" }).collect();
            DepTree::from_heads(&heads, &deprels).unwrap()
        })
        .collect()
}
