//! The four transition systems: inventories, preconditions, and the static
//! oracles that turn a gold tree into its canonical computation.
//!
//! Oracle rules, applied in order at each step:
//!
//! * arc-standard: LA if the node below the top is headed by the top; else RA
//!   if the top is headed by the node below it and all of the top's
//!   dependents are attached; else SH.
//! * arc-eager: LA if the stack top is headed by the buffer front; else RA if
//!   the front is headed by the top; else RE if the top is headed and some
//!   gold arc links the front to a node strictly left of the top; else SH.
//!   Once the buffer empties, RE until only the root remains.
//! * arc-hybrid: LA if the stack top is headed by the buffer front; else RA
//!   as in arc-standard; else SH.
//! * non-projective list-based: scanning the active list top-down with front
//!   b: LA if the top is headed by b, RA if b is headed by the top, NA if a
//!   deeper node shares a gold arc with b, else SH.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::transition::{apply, is_terminal, Computation, Configuration, TransitionKind, Violation};
use crate::treebank::{DepTree, ROOT};

/// Which transition system is in play.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SystemId {
    ArcStandard,
    ArcEager,
    ArcHybrid,
    Covington,
}

impl SystemId {
    pub const ALL: [SystemId; 4] =
        [SystemId::ArcStandard, SystemId::ArcEager, SystemId::ArcHybrid, SystemId::Covington];

    pub fn name(self) -> &'static str {
        match self {
            SystemId::ArcStandard => "arc-standard",
            SystemId::ArcEager => "arc-eager",
            SystemId::ArcHybrid => "arc-hybrid",
            SystemId::Covington => "covington",
        }
    }

    /// The transitions this system uses.
    pub fn inventory(self) -> &'static [TransitionKind] {
        use TransitionKind::*;
        match self {
            SystemId::ArcStandard | SystemId::ArcHybrid => &[Shift, LeftArc, RightArc],
            SystemId::ArcEager => &[Shift, LeftArc, RightArc, Reduce],
            SystemId::Covington => &[Shift, LeftArc, RightArc, NoArc],
        }
    }

    /// The transitions that consume a buffer word. One of these starts every
    /// token label.
    pub fn reads(self) -> &'static [TransitionKind] {
        use TransitionKind::*;
        match self {
            SystemId::ArcEager => &[Shift, RightArc],
            _ => &[Shift],
        }
    }

    pub fn is_read(self, t: TransitionKind) -> bool {
        self.reads().contains(&t)
    }

    /// How far past the last read word an arc may reach: the lookahead bound
    /// of the left-to-right condition.
    pub fn lookahead(self) -> usize {
        match self {
            SystemId::ArcStandard | SystemId::Covington => 0,
            SystemId::ArcEager | SystemId::ArcHybrid => 1,
        }
    }

    /// Whether the system only derives projective trees.
    pub fn is_projective_only(self) -> bool {
        self != SystemId::Covington
    }
}

impl fmt::Display for SystemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown system {0:?}, expected arc-standard, arc-eager, arc-hybrid or covington")]
pub struct UnknownSystem(pub String);

impl FromStr for SystemId {
    type Err = UnknownSystem;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "arc-standard" => Ok(SystemId::ArcStandard),
            "arc-eager" => Ok(SystemId::ArcEager),
            "arc-hybrid" => Ok(SystemId::ArcHybrid),
            "covington" => Ok(SystemId::Covington),
            _ => Err(UnknownSystem(s.to_string())),
        }
    }
}

/// The first precondition `transition` would violate in `config`, or `None`
/// when it is legal.
pub fn precondition_violation(
    system: SystemId,
    config: &Configuration,
    transition: TransitionKind,
) -> Option<Violation> {
    use TransitionKind::*;
    if !system.inventory().contains(&transition) {
        return Some(Violation::NotInInventory);
    }
    let stack = config.stack();
    match (system, transition) {
        (_, Shift) => config.buffer_is_empty().then_some(Violation::EmptyBuffer),
        (SystemId::ArcStandard, LeftArc | RightArc) => {
            let [.., s1, s0] = stack else {
                return Some(Violation::StackTooSmall);
            };
            let dependent = if transition == LeftArc { *s1 } else { *s0 };
            if dependent == ROOT {
                Some(Violation::RootAsDependent)
            } else if config.has_head(dependent) {
                Some(Violation::SingleHead)
            } else {
                None
            }
        }
        (SystemId::ArcEager | SystemId::ArcHybrid, LeftArc) => {
            if config.buffer_is_empty() {
                Some(Violation::EmptyBuffer)
            } else {
                match stack.last() {
                    None => Some(Violation::EmptyStack),
                    Some(&s) if s == ROOT => Some(Violation::RootAsDependent),
                    Some(&s) if config.has_head(s) => Some(Violation::SingleHead),
                    Some(_) => None,
                }
            }
        }
        (SystemId::ArcEager, RightArc) => {
            let Some(front) = config.buffer_front() else {
                return Some(Violation::EmptyBuffer);
            };
            if stack.is_empty() {
                Some(Violation::EmptyStack)
            } else if config.has_head(front) {
                Some(Violation::SingleHead)
            } else {
                None
            }
        }
        (SystemId::ArcEager, Reduce) => match stack.last() {
            None => Some(Violation::EmptyStack),
            Some(&s) if !config.has_head(s) => Some(Violation::TopNotHeaded),
            Some(_) => None,
        },
        (SystemId::ArcHybrid, RightArc) => {
            let [.., _, s0] = stack else {
                return Some(Violation::StackTooSmall);
            };
            if *s0 == ROOT {
                Some(Violation::RootAsDependent)
            } else if config.has_head(*s0) {
                Some(Violation::SingleHead)
            } else {
                None
            }
        }
        (SystemId::Covington, LeftArc | RightArc) => {
            let Some(front) = config.buffer_front() else {
                return Some(Violation::EmptyBuffer);
            };
            let Some(&top) = stack.last() else {
                return Some(Violation::EmptyStack);
            };
            if transition == LeftArc {
                if top == ROOT {
                    Some(Violation::RootAsDependent)
                } else if config.has_head(top) {
                    Some(Violation::SingleHead)
                } else if config.is_ancestor(top, front) {
                    Some(Violation::Acyclicity)
                } else {
                    None
                }
            } else if config.has_head(front) {
                Some(Violation::SingleHead)
            } else if config.is_ancestor(front, top) {
                Some(Violation::Acyclicity)
            } else {
                None
            }
        }
        (SystemId::Covington, NoArc) => stack.is_empty().then_some(Violation::EmptyStack),
        _ => unreachable!("inventory check covers the remaining pairs"),
    }
}

/// True when `transition` may be applied in `config`.
pub fn preconditions(system: SystemId, config: &Configuration, transition: TransitionKind) -> bool {
    precondition_violation(system, config, transition).is_none()
}

/// Why the oracle refused a tree.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("{system} requires a projective tree")]
    NonProjective { system: SystemId },
}

/// The canonical computation for one gold tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleTrace {
    pub computation: Computation,
    /// Gold arcs in the order the computation created them.
    pub arcs_in_order: Vec<(usize, usize)>,
}

struct Gold {
    heads: Vec<usize>,
    children: Vec<usize>,
}

impl Gold {
    fn new(tree: &DepTree) -> Self {
        let n = tree.len();
        let mut heads = vec![usize::MAX; n + 1];
        let mut children = vec![0usize; n + 1];
        for t in tree.tokens() {
            heads[t.id] = t.head;
            children[t.head] += 1;
        }
        Gold { heads, children }
    }

    /// Gold head of a token; never called with the root.
    fn head(&self, id: usize) -> usize {
        debug_assert_ne!(id, ROOT);
        self.heads[id]
    }
}

/// Runs the static oracle, producing the canonical complete computation for
/// `tree` under `system`. Projective-only systems reject non-projective
/// input.
pub fn oracle(system: SystemId, tree: &DepTree) -> Result<OracleTrace, OracleError> {
    if system.is_projective_only() && !tree.is_projective() {
        return Err(OracleError::NonProjective { system });
    }
    let gold = Gold::new(tree);
    let start = Configuration::initial(system, tree.len());
    let mut cfg = start.clone();
    let mut transitions = Vec::new();
    let mut attached = vec![0usize; tree.len() + 1];
    while !is_terminal(system, &cfg) {
        let t = choose(system, &cfg, &gold, &attached);
        let arcs_before = cfg.arcs().len();
        cfg = apply(system, &cfg, t)
            .unwrap_or_else(|e| unreachable!("oracle picked an illegal transition: {e}"));
        if let Some(&(head, _)) = cfg.arcs().get(arcs_before) {
            attached[head] += 1;
        }
        transitions.push(t);
    }
    let arcs_in_order = cfg.arcs().to_vec();
    Ok(OracleTrace { computation: Computation { start, transitions, end: cfg }, arcs_in_order })
}

fn choose(system: SystemId, cfg: &Configuration, gold: &Gold, attached: &[usize]) -> TransitionKind {
    use TransitionKind::*;
    match system {
        SystemId::ArcStandard => {
            if let [.., s1, s0] = cfg.stack() {
                if *s1 != ROOT && gold.head(*s1) == *s0 {
                    return LeftArc;
                }
                if gold.head(*s0) == *s1 && attached[*s0] == gold.children[*s0] {
                    return RightArc;
                }
            }
            Shift
        }
        SystemId::ArcEager => {
            let Some(b) = cfg.buffer_front() else {
                return Reduce;
            };
            let &s = cfg.stack().last().expect("arc-eager never empties its stack");
            if s != ROOT && gold.head(s) == b {
                return LeftArc;
            }
            if gold.head(b) == s {
                return RightArc;
            }
            let links_left = gold.head(b) < s
                || (1..s).any(|d| gold.head(d) == b && !cfg.has_head(d));
            if cfg.has_head(s) && links_left {
                return Reduce;
            }
            Shift
        }
        SystemId::ArcHybrid => {
            if let (Some(b), Some(&s)) = (cfg.buffer_front(), cfg.stack().last()) {
                if s != ROOT && gold.head(s) == b {
                    return LeftArc;
                }
            }
            if let [.., s1, s0] = cfg.stack() {
                if gold.head(*s0) == *s1 && attached[*s0] == gold.children[*s0] {
                    return RightArc;
                }
            }
            Shift
        }
        SystemId::Covington => {
            if let (Some(b), [deeper @ .., top]) = (cfg.buffer_front(), cfg.stack()) {
                if *top != ROOT && gold.head(*top) == b {
                    return LeftArc;
                }
                if gold.head(b) == *top {
                    return RightArc;
                }
                if deeper.iter().any(|&x| gold.head(b) == x || (x != ROOT && gold.head(x) == b)) {
                    return NoArc;
                }
            }
            Shift
        }
    }
}
