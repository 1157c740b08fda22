//! One label per token: encodings that cast left-to-right transition-based
//! dependency parsing as sequence labeling.
//!
//! A transition parser reads a sentence word by word; between reads it may
//! build arcs. Splitting its canonical transition sequence at the reads
//! yields exactly one chunk per word, and that chunk, paired with the word's
//! dependency relation, is the word's label. [`labeling::encode`] performs
//! the split for four systems (arc-standard, arc-eager, arc-hybrid, and the
//! non-projective list-based system); [`labeling::decode`] replays predicted
//! labels back into a tree, skipping illegal actions and repairing the root
//! so that any label sequence produces a valid parse.
//!
//! ```
//! use translabel::labeling::{decode, encode};
//! use translabel::systems::SystemId;
//! use translabel::treebank::DepTree;
//!
//! let tree = DepTree::from_heads(&[2, 0], &["nsubj", "root"]).unwrap();
//! let labels = encode(SystemId::ArcEager, &tree).unwrap();
//! assert_eq!(labels.labels[0].transition_part(), "SH-LA");
//! assert_eq!(labels.labels[1].transition_part(), "RA-RE");
//!
//! let decoded = decode(SystemId::ArcEager, &labels.labels, &["He", "left"]);
//! assert_eq!(decoded.heads(), tree.heads());
//! ```

pub mod eval;
pub mod labeling;
pub mod parallel;
pub mod systems;
pub mod tagger;
pub mod transition;
pub mod treebank;

pub use systems::SystemId;
pub use treebank::DepTree;
