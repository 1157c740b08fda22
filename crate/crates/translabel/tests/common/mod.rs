//! Fixtures and enumeration helpers shared by the integration suites.
#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use translabel::treebank::{DepTree, Token};

/// The ten-token running example used across the golden tests.
pub const FIGURE_HEADS: [usize; 10] = [2, 0, 5, 5, 2, 8, 8, 2, 10, 8];
pub const FIGURE_DEPRELS: [&str; 10] =
    ["nsubj", "root", "det", "compound", "obj", "case", "det", "obl", "case", "nmod"];

pub fn figure_tree() -> DepTree {
    DepTree::from_heads(&FIGURE_HEADS, &FIGURE_DEPRELS).unwrap()
}

/// Builds a tree from a head vector: deprel `root` under the root, `d<id>`
/// elsewhere. None when the vector does not form a tree.
pub fn tree_from_heads(heads: &[usize]) -> Option<DepTree> {
    let deprels: Vec<String> = heads
        .iter()
        .enumerate()
        .map(|(i, &h)| if h == 0 { "root".to_string() } else { format!("d{}", i + 1) })
        .collect();
    let refs: Vec<&str> = deprels.iter().map(String::as_str).collect();
    DepTree::from_heads(heads, &refs).ok()
}

/// Every valid tree over n tokens, by exhausting all head vectors.
pub fn all_trees(n: usize) -> Vec<DepTree> {
    assert!(n >= 1);
    let mut trees = Vec::new();
    let mut heads = vec![0usize; n];
    'vectors: loop {
        if let Some(tree) = tree_from_heads(&heads) {
            trees.push(tree);
        }
        for digit in heads.iter_mut() {
            *digit += 1;
            if *digit <= n {
                continue 'vectors;
            }
            *digit = 0;
        }
        return trees;
    }
}

pub fn single_rooted(tree: &DepTree) -> bool {
    tree.root_ids().len() == 1
}

/// Projectivity by the descendant-span definition: every node strictly
/// inside an arc's span must descend from the arc's head. This is an
/// independent route from the library's crossing check.
pub fn projective_by_spans(tree: &DepTree) -> bool {
    let descends = |mut node: usize, ancestor: usize| loop {
        if node == ancestor {
            return true;
        }
        if node == 0 {
            return false;
        }
        node = tree.head_of(node);
    };
    for dependent in 1..=tree.len() {
        let head = tree.head_of(dependent);
        let (lo, hi) = if head < dependent { (head, dependent) } else { (dependent, head) };
        if (lo + 1..hi).any(|inside| !descends(inside, head)) {
            return false;
        }
    }
    true
}

struct Template {
    heads: &'static [usize],
    deprels: &'static [&'static str],
    pos: &'static [&'static str],
}

const TEMPLATES: [Template; 8] = [
    Template {
        heads: &[2, 3, 0],
        deprels: &["det", "nsubj", "root"],
        pos: &["DET", "NOUN", "VERB"],
    },
    Template {
        heads: &[2, 3, 0, 5, 3],
        deprels: &["det", "nsubj", "root", "det", "obj"],
        pos: &["DET", "NOUN", "VERB", "DET", "NOUN"],
    },
    Template {
        heads: &[2, 0, 2],
        deprels: &["nsubj", "root", "advmod"],
        pos: &["PRON", "VERB", "ADV"],
    },
    Template {
        heads: &[3, 3, 4, 0],
        deprels: &["det", "amod", "nsubj", "root"],
        pos: &["DET", "ADJ", "NOUN", "VERB"],
    },
    Template {
        heads: &[2, 3, 0, 6, 6, 3],
        deprels: &["det", "nsubj", "root", "case", "det", "obl"],
        pos: &["DET", "NOUN", "VERB", "ADP", "DET", "NOUN"],
    },
    Template {
        heads: &[2, 0, 5, 5, 2],
        deprels: &["nsubj", "root", "det", "amod", "obj"],
        pos: &["NOUN", "VERB", "DET", "ADJ", "NOUN"],
    },
    Template {
        heads: &[2, 4, 4, 0],
        deprels: &["det", "nsubj", "advmod", "root"],
        pos: &["DET", "NOUN", "ADV", "VERB"],
    },
    Template {
        heads: &[2, 0, 2, 5, 3],
        deprels: &["nsubj", "root", "xcomp", "det", "obj"],
        pos: &["PRON", "VERB", "VERB", "DET", "NOUN"],
    },
];

fn lexicon(pos: &str) -> &'static [&'static str] {
    match pos {
        "DET" => &["the", "a", "this", "that", "each", "every", "some", "no"],
        "NOUN" => {
            &["cat", "dog", "bird", "tree", "house", "river", "stone", "cloud", "road", "garden"]
        }
        "VERB" => &["sees", "likes", "finds", "builds", "paints", "moves", "takes", "keeps"],
        "ADJ" => &["old", "new", "tall", "small", "green", "quiet", "bright", "heavy"],
        "ADV" => &["quickly", "slowly", "often", "rarely", "gently", "loudly"],
        "ADP" => &["in", "on", "under", "near", "behind", "beside"],
        "PRON" => &["he", "she", "it", "they", "we", "you"],
        other => panic!("no lexicon for {other}"),
    }
}

/// A seeded treebank of projective template sentences with UPOS tags.
/// Structure is a deterministic function of the word sequence, so a tagger
/// can learn it while a positional baseline stays poor.
pub fn synthetic_treebank(count: usize, seed: u64) -> Vec<DepTree> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let template = &TEMPLATES[rng.random_range(0..TEMPLATES.len())];
            let tokens = template
                .pos
                .iter()
                .enumerate()
                .map(|(i, &pos)| {
                    let forms = lexicon(pos);
                    let form = forms[rng.random_range(0..forms.len())];
                    Token::new(i + 1, form, template.heads[i], template.deprels[i]).with_upos(pos)
                })
                .collect();
            DepTree::new(tokens).unwrap()
        })
        .collect()
}

/// A random projective single-rooted tree on n tokens, by recursive
/// interval splitting: every subtree occupies a contiguous span.
pub fn random_projective_tree(n: usize, seed: u64) -> DepTree {
    assert!(n >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut heads = vec![0usize; n];
    let root = rng.random_range(1..=n);
    fill_span(&mut heads, &mut rng, 1, root.wrapping_sub(1), root);
    fill_span(&mut heads, &mut rng, root + 1, n, root);
    tree_from_heads(&heads).expect("interval construction yields a tree")
}

fn fill_span(heads: &mut [usize], rng: &mut ChaCha8Rng, lo: usize, hi: usize, head: usize) {
    let mut start = lo;
    while start <= hi && start >= 1 {
        let end = rng.random_range(start..=hi);
        let root = rng.random_range(start..=end);
        heads[root - 1] = head;
        fill_span(heads, rng, start, root.wrapping_sub(1), root);
        fill_span(heads, rng, root + 1, end, root);
        start = end + 1;
    }
}

/// A random single-rooted tree on n tokens, projective or not: tokens are
/// attached in shuffled order, each under some already-placed node.
pub fn random_single_rooted_tree(n: usize, seed: u64) -> DepTree {
    assert!(n >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (1..=n).collect();
    order.shuffle(&mut rng);
    let mut heads = vec![0usize; n];
    for (placed, &node) in order.iter().enumerate().skip(1) {
        heads[node - 1] = order[rng.random_range(0..placed)];
    }
    tree_from_heads(&heads).expect("attachment order yields a tree")
}
