//! Transition kinds, parser configurations, and the left-to-right verifier.
//!
//! A configuration is shared by all four systems: the stack doubles as the
//! active left-context list of the non-projective system, whose deferred
//! nodes live in `inactive`. The buffer is the id range `front..=n`; node 0
//! is the artificial root and starts on the stack (stack systems) or in the
//! buffer (non-projective system).

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::systems::{self, SystemId};
use crate::treebank::ROOT;

/// The five transition mnemonics used across the four systems.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TransitionKind {
    Shift,
    LeftArc,
    RightArc,
    Reduce,
    NoArc,
}

impl TransitionKind {
    pub const ALL: [TransitionKind; 5] = [
        TransitionKind::Shift,
        TransitionKind::LeftArc,
        TransitionKind::RightArc,
        TransitionKind::Reduce,
        TransitionKind::NoArc,
    ];

    pub fn mnemonic(self) -> &'static str {
        match self {
            TransitionKind::Shift => "SH",
            TransitionKind::LeftArc => "LA",
            TransitionKind::RightArc => "RA",
            TransitionKind::Reduce => "RE",
            TransitionKind::NoArc => "NA",
        }
    }

    pub fn from_mnemonic(s: &str) -> Option<Self> {
        match s {
            "SH" => Some(TransitionKind::Shift),
            "LA" => Some(TransitionKind::LeftArc),
            "RA" => Some(TransitionKind::RightArc),
            "RE" => Some(TransitionKind::Reduce),
            "NA" => Some(TransitionKind::NoArc),
            _ => None,
        }
    }
}

impl fmt::Display for TransitionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.mnemonic())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown transition mnemonic {0:?}")]
pub struct UnknownMnemonic(pub String);

impl FromStr for TransitionKind {
    type Err = UnknownMnemonic;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        TransitionKind::from_mnemonic(s).ok_or_else(|| UnknownMnemonic(s.to_string()))
    }
}

/// The precondition a rejected transition would have violated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum Violation {
    #[error("transition not in system inventory")]
    NotInInventory,
    #[error("empty buffer")]
    EmptyBuffer,
    #[error("empty stack")]
    EmptyStack,
    #[error("stack too small")]
    StackTooSmall,
    #[error("root may not take a head")]
    RootAsDependent,
    #[error("single head")]
    SingleHead,
    #[error("acyclicity")]
    Acyclicity,
    #[error("reduce requires a headed stack top")]
    TopNotHeaded,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{transition} is illegal for {system}: {violation}")]
pub struct IllegalTransition {
    pub system: SystemId,
    pub transition: TransitionKind,
    pub violation: Violation,
}

/// A parser state: left context, buffer front, and the partial parse built
/// so far. Values are immutable; [`apply`] returns a fresh configuration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Configuration {
    n: usize,
    stack: Vec<usize>,
    inactive: Vec<usize>,
    front: usize,
    heads: Vec<Option<usize>>,
    arcs: Vec<(usize, usize)>,
}

impl Configuration {
    /// The initial configuration for a sentence of `n` tokens. Stack systems
    /// start with the root on the stack and token 1 up front; the
    /// non-projective system starts with everything, root included, in the
    /// buffer.
    pub fn initial(system: SystemId, n: usize) -> Self {
        let (stack, front) = if system == SystemId::Covington {
            (Vec::new(), ROOT)
        } else {
            (vec![ROOT], 1)
        };
        Configuration {
            n,
            stack,
            inactive: Vec::new(),
            front,
            heads: vec![None; n + 1],
            arcs: Vec::new(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// The stack (active left list for the non-projective system); the last
    /// element is the top.
    pub fn stack(&self) -> &[usize] {
        &self.stack
    }

    /// Deferred left nodes of the non-projective system, in sentence order.
    pub fn inactive(&self) -> &[usize] {
        &self.inactive
    }

    pub fn buffer_front(&self) -> Option<usize> {
        (self.front <= self.n).then_some(self.front)
    }

    pub fn buffer_is_empty(&self) -> bool {
        self.front > self.n
    }

    pub fn buffer_len(&self) -> usize {
        self.n + 1 - self.front.min(self.n + 1)
    }

    pub fn head_of(&self, id: usize) -> Option<usize> {
        self.heads[id]
    }

    pub fn has_head(&self, id: usize) -> bool {
        self.heads[id].is_some()
    }

    /// Arcs as (head, dependent), in creation order.
    pub fn arcs(&self) -> &[(usize, usize)] {
        &self.arcs
    }

    /// True when `ancestor` lies on the head path above `node`.
    pub fn is_ancestor(&self, ancestor: usize, node: usize) -> bool {
        let mut cur = node;
        while let Some(h) = self.heads[cur] {
            if h == ancestor {
                return true;
            }
            cur = h;
        }
        false
    }

    fn add_arc(&mut self, head: usize, dependent: usize) {
        debug_assert!(self.heads[dependent].is_none(), "second head for {dependent}");
        self.heads[dependent] = Some(head);
        self.arcs.push((head, dependent));
    }
}

/// Applies one transition, returning the successor configuration.
///
/// Every precondition is checked first; an illegal transition reports the
/// violated condition and leaves the input untouched.
pub fn apply(
    system: SystemId,
    config: &Configuration,
    transition: TransitionKind,
) -> Result<Configuration, IllegalTransition> {
    if let Some(violation) = systems::precondition_violation(system, config, transition) {
        return Err(IllegalTransition { system, transition, violation });
    }
    let mut next = config.clone();
    match (system, transition) {
        (SystemId::Covington, TransitionKind::Shift) => {
            let deferred = std::mem::take(&mut next.inactive);
            next.stack.extend(deferred);
            next.stack.push(next.front);
            next.front += 1;
        }
        (_, TransitionKind::Shift) => {
            next.stack.push(next.front);
            next.front += 1;
        }
        (SystemId::ArcStandard, TransitionKind::LeftArc) => {
            let s0 = next.stack.pop().unwrap();
            let s1 = next.stack.pop().unwrap();
            next.stack.push(s0);
            next.add_arc(s0, s1);
        }
        (SystemId::ArcStandard | SystemId::ArcHybrid, TransitionKind::RightArc) => {
            let s0 = next.stack.pop().unwrap();
            let s1 = *next.stack.last().unwrap();
            next.add_arc(s1, s0);
        }
        (SystemId::ArcEager | SystemId::ArcHybrid, TransitionKind::LeftArc) => {
            let s = next.stack.pop().unwrap();
            next.add_arc(next.front, s);
        }
        (SystemId::ArcEager, TransitionKind::RightArc) => {
            let s = *next.stack.last().unwrap();
            next.add_arc(s, next.front);
            next.stack.push(next.front);
            next.front += 1;
        }
        (SystemId::ArcEager, TransitionKind::Reduce) => {
            next.stack.pop();
        }
        (SystemId::Covington, TransitionKind::LeftArc) => {
            let s = next.stack.pop().unwrap();
            next.add_arc(next.front, s);
            next.inactive.insert(0, s);
        }
        (SystemId::Covington, TransitionKind::RightArc) => {
            let s = next.stack.pop().unwrap();
            next.add_arc(s, next.front);
            next.inactive.insert(0, s);
        }
        (SystemId::Covington, TransitionKind::NoArc) => {
            let s = next.stack.pop().unwrap();
            next.inactive.insert(0, s);
        }
        _ => unreachable!("inventory mismatch passed the precondition check"),
    }
    Ok(next)
}

/// Terminal test. Stack systems are done when the buffer is empty and only
/// the root remains on the stack; the non-projective system when the buffer
/// is empty.
pub fn is_terminal(system: SystemId, config: &Configuration) -> bool {
    match system {
        SystemId::Covington => config.buffer_is_empty(),
        _ => config.buffer_is_empty() && config.stack == [ROOT],
    }
}

/// A transition sequence together with its endpoints.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Computation {
    pub start: Configuration,
    pub transitions: Vec<TransitionKind>,
    pub end: Configuration,
}

impl Computation {
    /// Replays the transitions from the start configuration.
    pub fn replay(&self, system: SystemId) -> Result<Configuration, IllegalTransition> {
        let mut cfg = self.start.clone();
        for &t in &self.transitions {
            cfg = apply(system, &cfg, t)?;
        }
        Ok(cfg)
    }
}

/// What the left-to-right check found for one transition sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VerificationReport {
    pub n: usize,
    pub read_count: usize,
    pub starts_with_read: bool,
    /// Exactly n reads and the sequence opens with one.
    pub condition1: bool,
    /// Smallest lookahead bound that holds for this sequence.
    pub minimal_k: usize,
    pub supplied_k: usize,
    /// Whether the supplied lookahead bound suffices.
    pub condition2: bool,
}

/// Replays a transition sequence and checks the two left-to-right
/// conditions: one read per token starting with a read, and every arc built
/// after the i-th read touching only words up to `i + k`.
///
/// The minimal such `k` is reported alongside pass/fail for the supplied
/// bound. Replay failures surface as [`IllegalTransition`].
pub fn verify_left_to_right(
    system: SystemId,
    n: usize,
    transitions: &[TransitionKind],
    supplied_k: usize,
) -> Result<VerificationReport, IllegalTransition> {
    let mut cfg = Configuration::initial(system, n);
    let mut reads = 0usize;
    let mut minimal_k = 0usize;
    let mut starts_with_read = false;
    let mut seen_arcs = 0usize;
    for (i, &t) in transitions.iter().enumerate() {
        cfg = apply(system, &cfg, t)?;
        if system.is_read(t) {
            reads += 1;
            if i == 0 {
                starts_with_read = true;
            }
        }
        for &(head, dependent) in &cfg.arcs()[seen_arcs..] {
            let reach = head.max(dependent);
            debug_assert!(reads > 0, "arc created before any read");
            minimal_k = minimal_k.max(reach.saturating_sub(reads));
        }
        seen_arcs = cfg.arcs().len();
    }
    let condition1 = reads == n && starts_with_read;
    Ok(VerificationReport {
        n,
        read_count: reads,
        starts_with_read,
        condition1,
        minimal_k,
        supplied_k,
        condition2: minimal_k <= supplied_k,
    })
}
