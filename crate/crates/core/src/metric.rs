//! Edit distance between instruction strings and distance-1 neighbourhoods.

use std::collections::BTreeSet;
use std::fmt;
use std::time::Duration;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::canonical::{canonical, CanonError, CanonicalRequest, SearchMode};
use crate::dag::OperationSet;
use crate::isa::s2d;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EditOp {
    Keep,
    /// Positions refer to the source string.
    Substitute { pos: usize, from: char, to: char },
    /// Insert before source position `pos`.
    Insert { pos: usize, ch: char },
    Delete { pos: usize, ch: char },
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EditScript(pub Vec<EditOp>);

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
#[error("edit script does not fit the source at position {0}")]
pub struct ScriptMismatch(pub usize);

impl EditScript {
    pub fn cost(&self) -> usize {
        self.0.iter().filter(|op| !matches!(op, EditOp::Keep)).count()
    }

    pub fn apply(&self, source: &str) -> Result<String, ScriptMismatch> {
        let src: Vec<char> = source.chars().collect();
        let mut out = String::new();
        let mut i = 0;
        for op in &self.0 {
            match *op {
                EditOp::Keep => {
                    out.push(*src.get(i).ok_or(ScriptMismatch(i))?);
                    i += 1;
                }
                EditOp::Substitute { pos, from, to } => {
                    if pos != i || src.get(i) != Some(&from) {
                        return Err(ScriptMismatch(i));
                    }
                    out.push(to);
                    i += 1;
                }
                EditOp::Insert { pos, ch } => {
                    if pos != i {
                        return Err(ScriptMismatch(i));
                    }
                    out.push(ch);
                }
                EditOp::Delete { pos, ch } => {
                    if pos != i || src.get(i) != Some(&ch) {
                        return Err(ScriptMismatch(i));
                    }
                    i += 1;
                }
            }
        }
        if i != src.len() {
            return Err(ScriptMismatch(i));
        }
        Ok(out)
    }
}

impl fmt::Display for EditScript {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for op in &self.0 {
            let text = match op {
                EditOp::Keep => continue,
                EditOp::Substitute { pos, from, to } => format!("sub@{pos} {from}->{to}"),
                EditOp::Insert { pos, ch } => format!("ins@{pos} {ch}"),
                EditOp::Delete { pos, ch } => format!("del@{pos} {ch}"),
            };
            if !first {
                f.write_str("; ")?;
            }
            f.write_str(&text)?;
            first = false;
        }
        Ok(())
    }
}

/// Wagner-Fischer distance with one optimal script. Ties in the backtrace
/// prefer substitution, then insertion, then deletion.
pub fn levenshtein(a: &str, b: &str) -> (usize, EditScript) {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let (n, m) = (a.len(), b.len());
    let mut dp = vec![vec![0usize; m + 1]; n + 1];
    for (i, row) in dp.iter_mut().enumerate() {
        row[0] = i;
    }
    for j in 0..=m {
        dp[0][j] = j;
    }
    for i in 1..=n {
        for j in 1..=m {
            let sub = dp[i - 1][j - 1] + usize::from(a[i - 1] != b[j - 1]);
            dp[i][j] = sub.min(dp[i - 1][j] + 1).min(dp[i][j - 1] + 1);
        }
    }
    let mut ops = Vec::with_capacity(n.max(m));
    let (mut i, mut j) = (n, m);
    while i > 0 || j > 0 {
        let d = dp[i][j];
        if i > 0 && j > 0 && a[i - 1] == b[j - 1] && d == dp[i - 1][j - 1] {
            ops.push(EditOp::Keep);
            i -= 1;
            j -= 1;
        } else if i > 0 && j > 0 && d == dp[i - 1][j - 1] + 1 {
            ops.push(EditOp::Substitute {
                pos: i - 1,
                from: a[i - 1],
                to: b[j - 1],
            });
            i -= 1;
            j -= 1;
        } else if j > 0 && d == dp[i][j - 1] + 1 {
            ops.push(EditOp::Insert { pos: i, ch: b[j - 1] });
            j -= 1;
        } else {
            ops.push(EditOp::Delete { pos: i - 1, ch: a[i - 1] });
            i -= 1;
        }
    }
    ops.reverse();
    (dp[n][m], EditScript(ops))
}

pub fn distance(a: &str, b: &str) -> usize {
    levenshtein(a, b).0
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EditAlphabet(pub Vec<char>);

impl EditAlphabet {
    /// The seven instruction characters followed by the ten commutative
    /// labels. `c` appears twice, as instruction and as the cosine label.
    pub fn default17() -> Self {
        EditAlphabet("NPnpCcW+*giscelra".chars().collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Entries offered when substituting `current`: the alphabet minus one
    /// occurrence of it, or minus the last entry when `current` is absent.
    fn substitutes(&self, current: char) -> Vec<char> {
        let mut out = self.0.clone();
        match out.iter().position(|&c| c == current) {
            Some(i) => {
                out.remove(i);
            }
            None => {
                out.pop();
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EditKind {
    Deletion,
    Substitution,
    Insertion,
}

impl EditKind {
    pub const ALL: [EditKind; 3] = [EditKind::Deletion, EditKind::Substitution, EditKind::Insertion];

    pub fn name(self) -> &'static str {
        match self {
            EditKind::Deletion => "Deletion",
            EditKind::Substitution => "Substitution",
            EditKind::Insertion => "Insertion",
        }
    }
}

/// All single-edit variants of `w`, duplicates included.
pub fn neighbourhood1(w: &str, alphabet: &EditAlphabet) -> Vec<(EditKind, String)> {
    let chars: Vec<char> = w.chars().collect();
    let build = |prefix: &[char], mid: Option<char>, suffix: &[char]| -> String {
        prefix.iter().copied().chain(mid).chain(suffix.iter().copied()).collect()
    };
    let mut out = Vec::new();
    for i in 0..chars.len() {
        out.push((EditKind::Deletion, build(&chars[..i], None, &chars[i + 1..])));
    }
    for i in 0..chars.len() {
        for c in alphabet.substitutes(chars[i]) {
            out.push((EditKind::Substitution, build(&chars[..i], Some(c), &chars[i + 1..])));
        }
    }
    for i in 0..=chars.len() {
        for &c in &alphabet.0 {
            out.push((EditKind::Insertion, build(&chars[..i], Some(c), &chars[i..])));
        }
    }
    out
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct NeighbourhoodRow {
    pub total: usize,
    pub valid: usize,
    pub unique: usize,
    pub back_to_original: usize,
    pub timeouts: usize,
}

impl NeighbourhoodRow {
    /// `1 - unique/valid`, or 0 with no valid neighbours.
    pub fn redundancy(&self) -> f64 {
        if self.valid == 0 {
            0.0
        } else {
            1.0 - self.unique as f64 / self.valid as f64
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NeighbourhoodReport {
    pub string: String,
    pub rows: Vec<(EditKind, NeighbourhoodRow)>,
    pub all: NeighbourhoodRow,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Outcome {
    Invalid,
    Timeout,
    Canonical(String),
}

fn classify_one(text: &str, m: usize, opset: &OperationSet, timeout: Duration) -> Outcome {
    let Ok(dag) = s2d(text, m, opset) else {
        return Outcome::Invalid;
    };
    if dag.internal_count() == 0 {
        return Outcome::Invalid;
    }
    let req = CanonicalRequest::new(&dag, SearchMode::Pruned).deadline(timeout);
    match canonical(&req) {
        Ok(r) => Outcome::Canonical(r.string),
        Err(CanonError::Timeout { .. }) => Outcome::Timeout,
        Err(CanonError::Unencodable(_)) => Outcome::Invalid,
    }
}

fn tally<'a>(w: &str, items: impl Iterator<Item = &'a Outcome>) -> NeighbourhoodRow {
    let mut row = NeighbourhoodRow::default();
    let mut distinct = BTreeSet::new();
    for outcome in items {
        row.total += 1;
        match outcome {
            Outcome::Invalid => {}
            Outcome::Timeout => row.timeouts += 1,
            Outcome::Canonical(s) => {
                row.valid += 1;
                if s == w {
                    row.back_to_original += 1;
                } else {
                    distinct.insert(s.as_str());
                }
            }
        }
    }
    row.unique = distinct.len();
    row
}

/// Decodes and canonicalizes every distance-1 neighbour of `w`. Undecodable
/// strings, variable-only graphs and timeouts count as invalid.
pub fn classify_neighbourhood(
    w: &str,
    m: usize,
    opset: &OperationSet,
    alphabet: &EditAlphabet,
    timeout: Duration,
) -> NeighbourhoodReport {
    let candidates = neighbourhood1(w, alphabet);
    let outcomes: Vec<Outcome> = candidates
        .par_iter()
        .map(|(_, text)| classify_one(text, m, opset, timeout))
        .collect();
    let rows = EditKind::ALL
        .iter()
        .map(|&kind| {
            let items = candidates.iter().zip(&outcomes).filter(|((k, _), _)| *k == kind).map(|(_, o)| o);
            (kind, tally(w, items))
        })
        .collect();
    NeighbourhoodReport {
        string: w.to_string(),
        rows,
        all: tally(w, outcomes.iter()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distances() {
        assert_eq!(distance("VcVspv+Ppc", "VcVspv*Ppc"), 1);
        assert_eq!(distance("abc", "abc"), 0);
        assert_eq!(distance("", "abc"), 3);
        assert_eq!(distance("kitten", "sitting"), 3);
    }

    #[test]
    fn scripts_apply_and_prefer_substitution() {
        let (d, s) = levenshtein("ab", "ba");
        assert_eq!(d, 2);
        assert_eq!(s.0[0], EditOp::Substitute { pos: 0, from: 'a', to: 'b' });
        for (a, b) in [("kitten", "sitting"), ("", "xy"), ("xy", ""), ("VsVc", "VcNVs")] {
            let (d, s) = levenshtein(a, b);
            assert_eq!(s.cost(), d);
            assert_eq!(s.apply(a).unwrap(), b);
        }
        assert!(levenshtein("ab", "b").1.apply("zz").is_err());
    }

    #[test]
    fn neighbourhood_counts() {
        let a = EditAlphabet::default17();
        assert_eq!(a.len(), 17);
        let n = neighbourhood1("VcVspv+Ppc", &a);
        assert_eq!(n.len(), 357);
        let count = |k| n.iter().filter(|(kind, _)| *kind == k).count();
        assert_eq!(count(EditKind::Deletion), 10);
        assert_eq!(count(EditKind::Substitution), 160);
        assert_eq!(count(EditKind::Insertion), 187);
        assert!(n.iter().all(|(_, s)| distance(s, "VcVspv+Ppc") <= 1));
        assert_eq!(neighbourhood1("", &a).len(), 17);
        assert_eq!(neighbourhood1("W", &EditAlphabet(vec!['W'])).len(), 3);
    }

    #[test]
    fn substitution_never_repeats_the_current_occurrence() {
        let a = EditAlphabet::default17();
        let subs = a.substitutes('c');
        assert_eq!(subs.len(), 16);
        assert_eq!(subs.iter().filter(|&&c| c == 'c').count(), 1);
        assert_eq!(a.substitutes('V').len(), 16);
    }
}
