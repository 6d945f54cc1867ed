//! The two-tier instruction alphabet and the string-to-DAG machine.

use std::fmt;

use thiserror::Error;

use crate::dag::{DagError, EdgeOutcome, LabeledDag, NodeId, NodeType, OperationSet};

/// Payload given to constants created by the machine.
pub const DEFAULT_CONST_VALUE: f64 = 1.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Token {
    MovePrimaryNext,
    MovePrimaryPrev,
    MoveSecondaryNext,
    MoveSecondaryPrev,
    EdgePtoQ,
    EdgeQtoP,
    Noop,
    InsertPrimary(NodeType),
    InsertSecondary(NodeType),
}

impl Token {
    pub const SIMPLE: [Token; 7] = [
        Token::MovePrimaryNext,
        Token::MovePrimaryPrev,
        Token::MoveSecondaryNext,
        Token::MoveSecondaryPrev,
        Token::EdgePtoQ,
        Token::EdgeQtoP,
        Token::Noop,
    ];

    /// Every token usable with `opset`: 7 single-character tokens followed by
    /// one primary and one secondary insert per label.
    pub fn vocabulary(opset: &OperationSet) -> Vec<Token> {
        let mut vocab = Token::SIMPLE.to_vec();
        vocab.extend(opset.types().iter().map(|&t| Token::InsertPrimary(t)));
        vocab.extend(opset.types().iter().map(|&t| Token::InsertSecondary(t)));
        vocab
    }

    fn simple_char(self) -> Option<char> {
        Some(match self {
            Token::MovePrimaryNext => 'N',
            Token::MovePrimaryPrev => 'P',
            Token::MoveSecondaryNext => 'n',
            Token::MoveSecondaryPrev => 'p',
            Token::EdgePtoQ => 'C',
            Token::EdgeQtoP => 'c',
            Token::Noop => 'W',
            _ => return None,
        })
    }

    pub fn write_to(self, out: &mut String) {
        match self {
            Token::InsertPrimary(t) => {
                out.push('V');
                out.push(t.label().expect("insert tokens carry labeled types"));
            }
            Token::InsertSecondary(t) => {
                out.push('v');
                out.push(t.label().expect("insert tokens carry labeled types"));
            }
            simple => out.push(simple.simple_char().unwrap()),
        }
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        self.write_to(&mut s);
        f.write_str(&s)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TokenizeError {
    #[error("unknown instruction {found:?} at position {position}")]
    UnknownChar { position: usize, found: char },
    #[error("insert token at position {position} has no label")]
    MissingLabel { position: usize },
    #[error("label {found:?} at position {position} is not in the operation set")]
    BadLabel { position: usize, found: char },
}

impl TokenizeError {
    pub fn position(&self) -> usize {
        match *self {
            TokenizeError::UnknownChar { position, .. }
            | TokenizeError::MissingLabel { position }
            | TokenizeError::BadLabel { position, .. } => position,
        }
    }
}

/// Positions are character offsets into `text`.
pub fn tokenize(text: &str, opset: &OperationSet) -> Result<Vec<Token>, TokenizeError> {
    let chars: Vec<char> = text.chars().collect();
    let mut tokens = Vec::with_capacity(chars.len());
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let token = match c {
            'N' => Token::MovePrimaryNext,
            'P' => Token::MovePrimaryPrev,
            'n' => Token::MoveSecondaryNext,
            'p' => Token::MoveSecondaryPrev,
            'C' => Token::EdgePtoQ,
            'c' => Token::EdgeQtoP,
            'W' => Token::Noop,
            'V' | 'v' => {
                let label = *chars.get(i + 1).ok_or(TokenizeError::MissingLabel { position: i })?;
                let kind = opset.type_for_label(label).ok_or(TokenizeError::BadLabel {
                    position: i + 1,
                    found: label,
                })?;
                i += 1;
                if c == 'V' {
                    Token::InsertPrimary(kind)
                } else {
                    Token::InsertSecondary(kind)
                }
            }
            other => {
                return Err(TokenizeError::UnknownChar {
                    position: i,
                    found: other,
                })
            }
        };
        tokens.push(token);
        i += 1;
    }
    Ok(tokens)
}

pub fn detokenize(tokens: &[Token]) -> String {
    let mut out = String::with_capacity(tokens.len() * 2);
    for t in tokens {
        t.write_to(&mut out);
    }
    out
}

/// Stable position in a [`Cdll`]; never invalidated by later insertions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Handle(usize);

impl Handle {
    pub fn index(self) -> usize {
        self.0
    }
}

/// Arena-backed circular doubly-linked list of node ids.
#[derive(Clone, Debug, Default)]
pub struct Cdll {
    next: Vec<usize>,
    prev: Vec<usize>,
    value: Vec<NodeId>,
}

impl Cdll {
    /// A ring holding `values` in order. Handles are assigned `0..len`.
    pub fn from_values(values: impl IntoIterator<Item = NodeId>) -> Cdll {
        let value: Vec<NodeId> = values.into_iter().collect();
        let n = value.len();
        Cdll {
            next: (0..n).map(|i| (i + 1) % n).collect(),
            prev: (0..n).map(|i| (i + n - 1) % n).collect(),
            value,
        }
    }

    pub fn len(&self) -> usize {
        self.value.len()
    }

    pub fn is_empty(&self) -> bool {
        self.value.is_empty()
    }

    pub fn head(&self) -> Handle {
        Handle(0)
    }

    pub fn next(&self, h: Handle) -> Handle {
        Handle(self.next[h.0])
    }

    pub fn prev(&self, h: Handle) -> Handle {
        Handle(self.prev[h.0])
    }

    pub fn value(&self, h: Handle) -> NodeId {
        self.value[h.0]
    }

    /// Moves `steps` forward (positive) or backward (negative).
    pub fn walk(&self, mut h: Handle, steps: isize) -> Handle {
        if steps >= 0 {
            for _ in 0..steps {
                h = self.next(h);
            }
        } else {
            for _ in 0..steps.unsigned_abs() {
                h = self.prev(h);
            }
        }
        h
    }

    pub fn insert_after(&mut self, h: Handle, value: NodeId) -> Handle {
        let slot = self.value.len();
        let after = self.next[h.0];
        self.value.push(value);
        self.prev.push(h.0);
        self.next.push(after);
        self.next[h.0] = slot;
        self.prev[after] = slot;
        Handle(slot)
    }

    /// Unlinks the most recently inserted element, undoing `insert_after`.
    pub fn remove_last(&mut self) {
        let slot = self.value.len() - 1;
        let (p, n) = (self.prev[slot], self.next[slot]);
        self.next[p] = n;
        self.prev[n] = p;
        self.value.pop();
        self.prev.pop();
        self.next.pop();
    }

    /// Values in ring order starting from `from`.
    pub fn values_from(&self, from: Handle) -> Vec<NodeId> {
        let mut out = Vec::with_capacity(self.len());
        let mut h = from;
        for _ in 0..self.len() {
            out.push(self.value(h));
            h = self.next(h);
        }
        out
    }
}

/// The machine state `(D, L, p, q)`.
#[derive(Clone, Debug)]
pub struct MachineState {
    pub dag: LabeledDag,
    pub list: Cdll,
    pub primary: Handle,
    pub secondary: Handle,
}

impl MachineState {
    pub fn new(m: usize) -> Result<Self, DagError> {
        let dag = LabeledDag::new(m)?;
        let list = Cdll::from_values(0..m);
        let head = list.head();
        Ok(MachineState {
            dag,
            list,
            primary: head,
            secondary: head,
        })
    }

    pub fn step(&mut self, token: Token) {
        match token {
            Token::MovePrimaryNext => self.primary = self.list.next(self.primary),
            Token::MovePrimaryPrev => self.primary = self.list.prev(self.primary),
            Token::MoveSecondaryNext => self.secondary = self.list.next(self.secondary),
            Token::MoveSecondaryPrev => self.secondary = self.list.prev(self.secondary),
            Token::EdgePtoQ => {
                let (u, v) = (self.list.value(self.primary), self.list.value(self.secondary));
                self.try_edge(u, v);
            }
            Token::EdgeQtoP => {
                let (u, v) = (self.list.value(self.secondary), self.list.value(self.primary));
                self.try_edge(u, v);
            }
            Token::Noop => {}
            Token::InsertPrimary(kind) => self.insert(kind, self.primary),
            Token::InsertSecondary(kind) => self.insert(kind, self.secondary),
        }
        debug_assert_eq!(self.list.len(), self.dag.len());
    }

    fn try_edge(&mut self, u: NodeId, v: NodeId) -> EdgeOutcome {
        self.dag.add_edge(u, v).expect("list values are valid node ids")
    }

    fn insert(&mut self, kind: NodeType, at: Handle) {
        let from = self.list.value(at);
        let payload = if kind == NodeType::Const { DEFAULT_CONST_VALUE } else { 0.0 };
        let id = self
            .dag
            .add_node_from(kind, payload, from)
            .expect("list values are valid node ids");
        self.list.insert_after(at, id);
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DecodeError {
    #[error(transparent)]
    Tokenize(#[from] TokenizeError),
    #[error(transparent)]
    Dag(#[from] DagError),
}

/// Runs `tokens` from the initial state with `m` variables.
pub fn execute(tokens: &[Token], m: usize) -> Result<LabeledDag, DagError> {
    let mut state = MachineState::new(m)?;
    for &t in tokens {
        state.step(t);
    }
    Ok(state.dag)
}

/// Decodes an instruction string into a labeled DAG. Every tokenizable
/// string yields an acyclic DAG.
pub fn s2d(text: &str, m: usize, opset: &OperationSet) -> Result<LabeledDag, DecodeError> {
    let tokens = tokenize(text, opset)?;
    Ok(execute(&tokens, m)?)
}
