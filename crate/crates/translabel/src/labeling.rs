//! Token labels and the maps between trees and label sequences.
//!
//! Encoding runs the oracle and splits its transition sequence at the read
//! transitions: one chunk per word, each chunk starting with the read that
//! consumed the word. The non-projective system's terminating shift belongs
//! to no word and is dropped; decoding appends it again.
//!
//! Decoding is total. Predicted actions that are illegal in the current
//! configuration are skipped, a label that never manages to read a word gets
//! a shift forced in, and the root repair guarantees a single-rooted tree:
//! if no token is attached to the root, tokens whose deprel part is `root`
//! are promoted, failing that the first token; extra roots are demoted to
//! dependents of the first; leftover headless tokens attach to the root.

use std::collections::BTreeMap;
use std::io::{self, BufRead, Write};

use thiserror::Error;

use crate::parallel::map_ordered;
use crate::systems::{oracle, OracleError, SystemId};
use crate::transition::{apply, Configuration, TransitionKind};
use crate::treebank::{DepTree, Token, ROOT};

/// One token's label: the transition chunk and the dependency relation.
///
/// Encoder output always starts the chunk with a read transition; decoder
/// input may hold anything, including an empty chunk.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenLabel {
    pub transitions: Vec<TransitionKind>,
    pub deprel: String,
}

impl TokenLabel {
    pub fn new(transitions: Vec<TransitionKind>, deprel: impl Into<String>) -> Self {
        TokenLabel { transitions, deprel: deprel.into() }
    }

    /// The chunk as mnemonics joined by `-`, e.g. `SH-LA-LA`.
    pub fn transition_part(&self) -> String {
        let parts: Vec<&str> = self.transitions.iter().map(|t| t.mnemonic()).collect();
        parts.join("-")
    }

    /// Parses a transition part, silently dropping unknown mnemonics so that
    /// corrupted labels still decode.
    pub fn parse_transition_part(s: &str) -> Vec<TransitionKind> {
        s.split('-').filter_map(TransitionKind::from_mnemonic).collect()
    }
}

/// The labels of one sentence under one system.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelSequence {
    pub system: SystemId,
    pub labels: Vec<TokenLabel>,
}

/// Encodes a gold tree as one label per token.
pub fn encode(system: SystemId, tree: &DepTree) -> Result<LabelSequence, OracleError> {
    let trace = oracle(system, tree)?;
    let mut transitions = trace.computation.transitions.as_slice();
    if system == SystemId::Covington {
        let (&last, rest) = transitions.split_last().expect("complete computations are non-empty");
        assert_eq!(last, TransitionKind::Shift, "the terminating transition is a shift");
        transitions = rest;
    }
    let mut groups: Vec<Vec<TransitionKind>> = Vec::with_capacity(tree.len());
    for &t in transitions {
        if system.is_read(t) {
            groups.push(vec![t]);
        } else {
            groups
                .last_mut()
                .expect("complete computations open with a read transition")
                .push(t);
        }
    }
    assert_eq!(groups.len(), tree.len(), "one label per token");
    let labels = groups
        .into_iter()
        .zip(tree.tokens())
        .map(|(transitions, token)| TokenLabel::new(transitions, token.deprel.clone()))
        .collect();
    Ok(LabelSequence { system, labels })
}

/// What the decoder had to repair. Summed over a corpus these show how far
/// predictions strayed from well-formed computations.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DecodeStats {
    /// Predicted actions skipped as illegal.
    pub skipped_transitions: usize,
    /// Labels that executed no read, fixed by forcing a shift.
    pub forced_reads: usize,
    /// The terminating shift appended for the non-projective system.
    pub terminal_shift_appended: bool,
    /// Tokens promoted to root because their deprel part said `root`.
    pub deprel_roots_promoted: usize,
    /// Fallback promotions of the first token to root.
    pub first_token_promoted: usize,
    /// Extra roots re-attached under the first root.
    pub extra_roots_reattached: usize,
    /// Headless tokens attached to the root at the end.
    pub headless_attached: usize,
}

impl DecodeStats {
    /// Total number of repair actions.
    pub fn repairs(&self) -> usize {
        self.skipped_transitions
            + self.forced_reads
            + self.deprel_roots_promoted
            + self.first_token_promoted
            + self.extra_roots_reattached
            + self.headless_attached
    }

    pub fn absorb(&mut self, other: &DecodeStats) {
        self.skipped_transitions += other.skipped_transitions;
        self.forced_reads += other.forced_reads;
        self.terminal_shift_appended |= other.terminal_shift_appended;
        self.deprel_roots_promoted += other.deprel_roots_promoted;
        self.first_token_promoted += other.first_token_promoted;
        self.extra_roots_reattached += other.extra_roots_reattached;
        self.headless_attached += other.headless_attached;
    }
}

/// Decodes labels into a tree. Total: any label sequence yields a valid
/// single-rooted tree. See [`decode_with_stats`] for the repair counters.
///
/// Panics if `labels` and `forms` differ in length or are empty.
pub fn decode<S: AsRef<str>>(system: SystemId, labels: &[TokenLabel], forms: &[S]) -> DepTree {
    decode_with_stats(system, labels, forms).0
}

/// [`decode`] plus counters describing every repair that was applied.
pub fn decode_with_stats<S: AsRef<str>>(
    system: SystemId,
    labels: &[TokenLabel],
    forms: &[S],
) -> (DepTree, DecodeStats) {
    assert_eq!(labels.len(), forms.len(), "one label per token");
    assert!(!labels.is_empty(), "sentences have at least one token");
    let n = labels.len();
    let mut stats = DecodeStats::default();
    let mut cfg = Configuration::initial(system, n);

    for label in labels {
        let mut read_executed = false;
        for &t in &label.transitions {
            match apply(system, &cfg, t) {
                Ok(next) => {
                    cfg = next;
                    read_executed |= system.is_read(t);
                }
                Err(_) => stats.skipped_transitions += 1,
            }
        }
        if !read_executed {
            if let Ok(next) = apply(system, &cfg, TransitionKind::Shift) {
                cfg = next;
                stats.forced_reads += 1;
            }
        }
    }
    if system == SystemId::Covington {
        if let Ok(next) = apply(system, &cfg, TransitionKind::Shift) {
            cfg = next;
            stats.terminal_shift_appended = true;
        }
    }

    let mut heads: Vec<Option<usize>> = (1..=n).map(|id| cfg.head_of(id)).collect();

    // Root repair, in order: every predicted "root" deprel becomes a root
    // candidate, the first token is the fallback candidate, the first root
    // stays, leftovers attach to it.
    for (i, label) in labels.iter().enumerate() {
        if label.deprel == "root" && heads[i] != Some(ROOT) {
            heads[i] = Some(ROOT);
            stats.deprel_roots_promoted += 1;
        }
    }
    if !heads.contains(&Some(ROOT)) {
        heads[0] = Some(ROOT);
        stats.first_token_promoted += 1;
    }
    let root = heads.iter().position(|&h| h == Some(ROOT)).expect("a root exists by now") + 1;
    for (i, head) in heads.iter_mut().enumerate() {
        if i + 1 != root && *head == Some(ROOT) {
            *head = Some(root);
            stats.extra_roots_reattached += 1;
        }
    }
    for head in heads.iter_mut() {
        if head.is_none() {
            *head = Some(root);
            stats.headless_attached += 1;
        }
    }

    let tokens = labels
        .iter()
        .zip(forms)
        .enumerate()
        .map(|(i, (label, form))| {
            Token::new(i + 1, form.as_ref(), heads[i].unwrap(), label.deprel.clone())
        })
        .collect();
    let tree = DepTree::new(tokens).expect("decoder repairs always yield a valid tree");
    if stats.repairs() > 0 {
        log::debug!("decoded with {} repairs: {:?}", stats.repairs(), stats);
    }
    (tree, stats)
}

/// Label-vocabulary summary for one system over a corpus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VocabReport {
    pub system: SystemId,
    /// Distinct transition parts with frequencies.
    pub transition_labels: BTreeMap<String, usize>,
    /// Distinct deprel parts with frequencies.
    pub deprels: BTreeMap<String, usize>,
    pub sentences_encoded: usize,
    pub sentences_skipped: usize,
}

impl VocabReport {
    pub fn transition_label_count(&self) -> usize {
        self.transition_labels.len()
    }

    pub fn deprel_count(&self) -> usize {
        self.deprels.len()
    }
}

/// Tallies both label vocabularies over a corpus, skipping sentences the
/// system cannot derive.
pub fn label_vocabulary(system: SystemId, trees: &[DepTree]) -> VocabReport {
    let encoded = map_ordered(trees, |tree| encode(system, tree));
    let mut report = VocabReport {
        system,
        transition_labels: BTreeMap::new(),
        deprels: BTreeMap::new(),
        sentences_encoded: 0,
        sentences_skipped: 0,
    };
    for result in encoded {
        match result {
            Ok(sequence) => {
                report.sentences_encoded += 1;
                for label in &sequence.labels {
                    *report.transition_labels.entry(label.transition_part()).or_insert(0) += 1;
                    *report.deprels.entry(label.deprel.clone()).or_insert(0) += 1;
                }
            }
            Err(OracleError::NonProjective { .. }) => report.sentences_skipped += 1,
        }
    }
    report
}

/// What to do when a projective-only system meets a non-projective tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OnNonProjective {
    Skip,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("sentence {sentence}")]
pub struct CorpusEncodeError {
    /// 1-based sentence index within the corpus.
    pub sentence: usize,
    pub source: OracleError,
}

/// A corpus encoding with bookkeeping about what was kept.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusEncoding {
    pub sequences: Vec<LabelSequence>,
    /// Indices of the encoded sentences within the input corpus.
    pub kept: Vec<usize>,
    /// Indices of the sentences skipped as non-projective.
    pub skipped: Vec<usize>,
}

/// Encodes a corpus, sentence-parallel. Non-projective sentences are skipped
/// or abort the run, per `policy`.
pub fn encode_corpus(
    system: SystemId,
    trees: &[DepTree],
    policy: OnNonProjective,
) -> Result<CorpusEncoding, CorpusEncodeError> {
    let encoded = map_ordered(trees, |tree| encode(system, tree));
    let mut out = CorpusEncoding { sequences: Vec::new(), kept: Vec::new(), skipped: Vec::new() };
    for (index, result) in encoded.into_iter().enumerate() {
        match result {
            Ok(sequence) => {
                out.sequences.push(sequence);
                out.kept.push(index);
            }
            Err(source) => {
                if policy == OnNonProjective::Fail {
                    return Err(CorpusEncodeError { sentence: index + 1, source });
                }
                out.skipped.push(index);
            }
        }
    }
    if !out.skipped.is_empty() {
        log::info!("skipped {} non-projective sentences for {}", out.skipped.len(), system);
    }
    Ok(out)
}

/// One sentence of a label file: surface forms next to their labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledSentence {
    pub forms: Vec<String>,
    pub labels: Vec<TokenLabel>,
}

/// Decodes a label-file corpus, sentence-parallel, returning the trees and
/// the summed repair counters.
pub fn decode_corpus(system: SystemId, sentences: &[LabeledSentence]) -> (Vec<DepTree>, DecodeStats) {
    let decoded = map_ordered(sentences, |s| decode_with_stats(system, &s.labels, &s.forms));
    let mut stats = DecodeStats::default();
    let mut trees = Vec::with_capacity(decoded.len());
    for (tree, s) in decoded {
        stats.absorb(&s);
        trees.push(tree);
    }
    (trees, stats)
}

/// Why a label file could not be read.
#[derive(Debug, Error)]
pub enum LabelFileError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("missing '# system = <name>' header")]
    MissingHeader,
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Writes a label file: a `# system = <name>` header, then one
/// `FORM<TAB>TRANSITIONS<TAB>DEPREL` row per token with blank lines between
/// sentences.
pub fn write_label_file<W: Write>(
    mut writer: W,
    system: SystemId,
    sentences: &[LabeledSentence],
) -> io::Result<()> {
    writeln!(writer, "# system = {system}")?;
    for sentence in sentences {
        debug_assert_eq!(sentence.forms.len(), sentence.labels.len());
        for (form, label) in sentence.forms.iter().zip(&sentence.labels) {
            writeln!(writer, "{form}\t{}\t{}", label.transition_part(), label.deprel)?;
        }
        writeln!(writer)?;
    }
    Ok(())
}

/// Renders a label file to a string. See [`write_label_file`].
pub fn write_label_file_string(system: SystemId, sentences: &[LabeledSentence]) -> String {
    let mut out = Vec::new();
    write_label_file(&mut out, system, sentences).expect("writing to a Vec cannot fail");
    String::from_utf8(out).expect("labels hold valid UTF-8")
}

/// Reads a label file. The header names the system; transition parts are
/// parsed leniently (unknown mnemonics are dropped), everything else
/// strictly.
pub fn read_label_file<R: BufRead>(
    reader: R,
) -> Result<(SystemId, Vec<LabeledSentence>), LabelFileError> {
    let mut system: Option<SystemId> = None;
    let mut sentences = Vec::new();
    let mut forms: Vec<String> = Vec::new();
    let mut labels: Vec<TokenLabel> = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let mut line = line?;
        if line.ends_with('\r') {
            line.pop();
        }
        if line.is_empty() {
            if !forms.is_empty() {
                sentences.push(LabeledSentence {
                    forms: std::mem::take(&mut forms),
                    labels: std::mem::take(&mut labels),
                });
            }
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            if system.is_none() {
                if let Some(value) = rest.trim().strip_prefix("system =") {
                    let name = value.trim();
                    system = Some(name.parse::<SystemId>().map_err(|e| {
                        LabelFileError::Malformed { line: line_no, message: e.to_string() }
                    })?);
                }
            }
            continue;
        }
        if system.is_none() {
            return Err(LabelFileError::MissingHeader);
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 3 {
            return Err(LabelFileError::Malformed {
                line: line_no,
                message: format!("expected FORM, TRANSITIONS, DEPREL, found {} columns", cols.len()),
            });
        }
        forms.push(cols[0].to_string());
        labels.push(TokenLabel::new(
            TokenLabel::parse_transition_part(cols[1]),
            cols[2].to_string(),
        ));
    }
    if !forms.is_empty() {
        sentences.push(LabeledSentence { forms, labels });
    }
    let system = system.ok_or(LabelFileError::MissingHeader)?;
    Ok((system, sentences))
}

/// Reads a label file from a string. See [`read_label_file`].
pub fn read_label_file_str(input: &str) -> Result<(SystemId, Vec<LabeledSentence>), LabelFileError> {
    read_label_file(input.as_bytes())
}

/// Couples decoded forms with encoder output for writing.
pub fn labeled_sentence(tree: &DepTree, sequence: &LabelSequence) -> LabeledSentence {
    LabeledSentence {
        forms: tree.tokens().iter().map(|t| t.form.clone()).collect(),
        labels: sequence.labels.clone(),
    }
}

/// Flattens a label sequence back into one transition stream, the view the
/// left-to-right verifier checks.
pub fn flatten(sequence: &LabelSequence) -> Vec<TransitionKind> {
    sequence.labels.iter().flat_map(|l| l.transitions.iter().copied()).collect()
}
