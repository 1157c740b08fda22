//! CoNLL-U reading and writing, plus the dependency tree type used by the
//! rest of the crate.
//!
//! Trees are validated at construction: token ids run 1..=n, heads stay in
//! range, and the head relation is acyclic. Node 0 is the artificial root and
//! never appears as a token.

use std::io::{self, BufRead, Write};

use thiserror::Error;

/// Node id of the artificial root.
pub const ROOT: usize = 0;

/// One token row. Fields mirror the ten CoNLL-U columns; columns that play no
/// role here (LEMMA, XPOS, FEATS, DEPS, MISC) are carried verbatim so that
/// reading and writing a file is a fixed point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub id: usize,
    pub form: String,
    pub lemma: String,
    pub upos: String,
    pub xpos: String,
    pub feats: String,
    pub head: usize,
    pub deprel: String,
    pub deps: String,
    pub misc: String,
}

impl Token {
    /// Token with the given id, form, head and deprel; every other column is `_`.
    pub fn new(id: usize, form: impl Into<String>, head: usize, deprel: impl Into<String>) -> Self {
        Token {
            id,
            form: form.into(),
            lemma: "_".into(),
            upos: "_".into(),
            xpos: "_".into(),
            feats: "_".into(),
            head,
            deprel: deprel.into(),
            deps: "_".into(),
            misc: "_".into(),
        }
    }

    pub fn with_upos(mut self, upos: impl Into<String>) -> Self {
        self.upos = upos.into();
        self
    }
}

/// Why a token list does not form a valid dependency tree.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TreeError {
    #[error("empty sentence")]
    Empty,
    #[error("token at position {position} has id {id}, expected {expected}")]
    IdOutOfOrder { position: usize, id: usize, expected: usize },
    #[error("token {id}: head {head} out of range 0..={n}")]
    HeadOutOfRange { id: usize, head: usize, n: usize },
    #[error("token {id} is its own head")]
    SelfHead { id: usize },
    #[error("head cycle: {0}")]
    Cycle(String),
}

/// A validated dependency tree over one sentence.
///
/// "Tree" is used loosely: several tokens may attach directly to the root
/// (some treebanks do this); [`DepTree::root_ids`] exposes them. What is
/// guaranteed is id order, head range and acyclicity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DepTree {
    tokens: Vec<Token>,
    comments: Vec<String>,
}

impl DepTree {
    pub fn new(tokens: Vec<Token>) -> Result<Self, TreeError> {
        if tokens.is_empty() {
            return Err(TreeError::Empty);
        }
        let n = tokens.len();
        for (position, token) in tokens.iter().enumerate() {
            if token.id != position + 1 {
                return Err(TreeError::IdOutOfOrder { position, id: token.id, expected: position + 1 });
            }
            if token.head > n {
                return Err(TreeError::HeadOutOfRange { id: token.id, head: token.head, n });
            }
            if token.head == token.id {
                return Err(TreeError::SelfHead { id: token.id });
            }
        }
        // Walk up from every node; a walk that revisits its own path found a cycle.
        let mut state = vec![0u8; n + 1]; // 0 unseen, 1 on current path, 2 done
        state[ROOT] = 2;
        for start in 1..=n {
            if state[start] != 0 {
                continue;
            }
            let mut path = Vec::new();
            let mut cur = start;
            while state[cur] == 0 {
                state[cur] = 1;
                path.push(cur);
                cur = tokens[cur - 1].head;
            }
            if state[cur] == 1 {
                let from = path.iter().position(|&x| x == cur).unwrap();
                let mut cycle: Vec<String> = path[from..].iter().map(|x| x.to_string()).collect();
                cycle.push(cur.to_string());
                return Err(TreeError::Cycle(cycle.join(" -> ")));
            }
            for x in path {
                state[x] = 2;
            }
        }
        Ok(DepTree { tokens, comments: Vec::new() })
    }

    /// Convenience constructor for tests and small fixtures: bare tokens
    /// `w1..wn` with the given heads and deprels.
    pub fn from_heads(heads: &[usize], deprels: &[&str]) -> Result<Self, TreeError> {
        assert_eq!(heads.len(), deprels.len(), "heads and deprels must align");
        let tokens = heads
            .iter()
            .zip(deprels)
            .enumerate()
            .map(|(i, (&head, &deprel))| Token::new(i + 1, format!("w{}", i + 1), head, deprel))
            .collect();
        DepTree::new(tokens)
    }

    pub fn with_comments(mut self, comments: Vec<String>) -> Self {
        self.comments = comments;
        self
    }

    /// Number of tokens (the root is not counted).
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        false // construction rejects empty sentences
    }

    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    /// Token by 1-based id.
    pub fn token(&self, id: usize) -> &Token {
        &self.tokens[id - 1]
    }

    pub fn comments(&self) -> &[String] {
        &self.comments
    }

    pub fn head_of(&self, id: usize) -> usize {
        self.tokens[id - 1].head
    }

    pub fn heads(&self) -> Vec<usize> {
        self.tokens.iter().map(|t| t.head).collect()
    }

    /// Tokens attached directly to the root, in sentence order.
    pub fn root_ids(&self) -> Vec<usize> {
        self.tokens.iter().filter(|t| t.head == ROOT).map(|t| t.id).collect()
    }

    /// True when no two arcs cross. Arcs from the root are included, so a
    /// tree whose root arc is crossed counts as non-projective.
    pub fn is_projective(&self) -> bool {
        let arcs: Vec<(usize, usize)> = self
            .tokens
            .iter()
            .map(|t| (t.head.min(t.id), t.head.max(t.id)))
            .collect();
        for (i, &(a1, b1)) in arcs.iter().enumerate() {
            for &(a2, b2) in &arcs[i + 1..] {
                if (a1 < a2 && a2 < b1 && b1 < b2) || (a2 < a1 && a1 < b2 && b2 < b1) {
                    return false;
                }
            }
        }
        true
    }
}

/// Why a CoNLL-U input could not be read.
#[derive(Debug, Error)]
pub enum ParseError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("sentence starting at line {line}: {source}")]
    InvalidTree { line: usize, source: TreeError },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Reads a CoNLL-U file into trees.
///
/// Comment lines are kept with their sentence. Multiword-token ranges
/// (`1-2`) and empty nodes (`1.1`) are skipped, as they carry no head. A HEAD
/// column of `_` is read as 0 so that unannotated input can flow through
/// prediction.
pub fn read_conllu<R: BufRead>(reader: R) -> Result<Vec<DepTree>, ParseError> {
    let mut trees = Vec::new();
    let mut comments: Vec<String> = Vec::new();
    let mut tokens: Vec<Token> = Vec::new();
    let mut first_line = 0usize;

    let mut flush = |tokens: &mut Vec<Token>,
                     comments: &mut Vec<String>,
                     first_line: usize|
     -> Result<(), ParseError> {
        if tokens.is_empty() {
            comments.clear();
            return Ok(());
        }
        let tree = DepTree::new(std::mem::take(tokens))
            .map_err(|source| ParseError::InvalidTree { line: first_line, source })?
            .with_comments(std::mem::take(comments));
        trees.push(tree);
        Ok(())
    };

    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let mut line = line?;
        if line.ends_with('\r') {
            line.pop();
        }
        if line.is_empty() {
            flush(&mut tokens, &mut comments, first_line)?;
            continue;
        }
        if line.starts_with('#') {
            comments.push(line);
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 10 {
            return Err(ParseError::Malformed {
                line: line_no,
                message: format!("expected 10 tab-separated columns, found {}", cols.len()),
            });
        }
        if cols[0].contains('-') || cols[0].contains('.') {
            continue; // multiword range or empty node
        }
        let id: usize = cols[0].parse().map_err(|_| ParseError::Malformed {
            line: line_no,
            message: format!("bad ID field {:?}", cols[0]),
        })?;
        if tokens.is_empty() {
            first_line = line_no;
        }
        if id != tokens.len() + 1 {
            return Err(ParseError::Malformed {
                line: line_no,
                message: format!("token id {} out of sequence, expected {}", id, tokens.len() + 1),
            });
        }
        let head: usize = if cols[6] == "_" {
            ROOT
        } else {
            cols[6].parse().map_err(|_| ParseError::Malformed {
                line: line_no,
                message: format!("bad HEAD field {:?}", cols[6]),
            })?
        };
        tokens.push(Token {
            id,
            form: cols[1].to_string(),
            lemma: cols[2].to_string(),
            upos: cols[3].to_string(),
            xpos: cols[4].to_string(),
            feats: cols[5].to_string(),
            head,
            deprel: cols[7].to_string(),
            deps: cols[8].to_string(),
            misc: cols[9].to_string(),
        });
    }
    flush(&mut tokens, &mut comments, first_line)?;
    Ok(trees)
}

/// Parses CoNLL-U from a string. See [`read_conllu`].
pub fn read_conllu_str(input: &str) -> Result<Vec<DepTree>, ParseError> {
    read_conllu(input.as_bytes())
}

/// Writes trees back out as CoNLL-U, one blank line after each sentence.
pub fn write_conllu<W: Write>(mut writer: W, trees: &[DepTree]) -> io::Result<()> {
    for tree in trees {
        for comment in tree.comments() {
            writeln!(writer, "{comment}")?;
        }
        for t in tree.tokens() {
            writeln!(
                writer,
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
                t.id, t.form, t.lemma, t.upos, t.xpos, t.feats, t.head, t.deprel, t.deps, t.misc
            )?;
        }
        writeln!(writer)?;
    }
    Ok(())
}

/// Renders trees to a CoNLL-U string. See [`write_conllu`].
pub fn write_conllu_string(trees: &[DepTree]) -> String {
    let mut out = Vec::new();
    write_conllu(&mut out, trees).expect("writing to a Vec cannot fail");
    String::from_utf8(out).expect("trees hold valid UTF-8")
}
