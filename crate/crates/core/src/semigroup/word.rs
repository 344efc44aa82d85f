use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::SemigroupError;

/// A word in the generators. `indices[0]` is the outermost factor, so the
/// word `[i, j]` names `φ_i ∘ φ_j` and a prefix of a word is an outer factor
/// of its composition.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Word(pub Vec<usize>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn repeat(index: usize, n: usize) -> Self {
        Word(vec![index; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn concat(&self, inner: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&inner.0);
        Word(v)
    }

    pub fn starts_with(&self, prefix: &Word) -> bool {
        self.0.starts_with(&prefix.0)
    }

    /// First `n` letters (the outer factor of length `n`).
    pub fn prefix(&self, n: usize) -> Word {
        Word(self.0[..n.min(self.0.len())].to_vec())
    }

    pub fn max_index(&self) -> Option<usize> {
        self.0.iter().copied().max()
    }
}

impl From<Vec<usize>> for Word {
    fn from(v: Vec<usize>) -> Self {
        Word(v)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (k, i) in self.0.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{i}")?;
        }
        f.write_str("]")
    }
}

impl FromStr for Word {
    type Err = SemigroupError;

    /// Accepts `[0,0,1,0]`, `g = [0,0,1,0]`, `0,0,1,0`, `[]` and the empty
    /// string.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut body = s.trim();
        if let Some(eq) = body.find('=') {
            let name = body[..eq].trim();
            if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                return Err(SemigroupError::Parse(format!("word {s:?}: bad name before '='")));
            }
            body = body[eq + 1..].trim();
        }
        if let Some(inner) = body.strip_prefix('[') {
            body = inner
                .strip_suffix(']')
                .ok_or_else(|| SemigroupError::Parse(format!("word {s:?}: missing ']'")))?
                .trim();
        }
        if body.is_empty() {
            return Ok(Word::empty());
        }
        body.split(',')
            .map(|t| {
                t.trim()
                    .parse::<usize>()
                    .map_err(|_| SemigroupError::Parse(format!("word {s:?}: bad index {t:?}")))
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Word)
    }
}

/// All nonempty words over `r` letters of length at most `max_len`, shortest
/// first and lexicographic within a length.
#[derive(Debug, Clone)]
pub struct WordIter {
    r: usize,
    max_len: usize,
    current: Vec<usize>,
    done: bool,
}

impl WordIter {
    pub fn new(r: usize, max_len: usize) -> Self {
        WordIter {
            r,
            max_len,
            current: Vec::new(),
            done: r == 0 || max_len == 0,
        }
    }
}

impl Iterator for WordIter {
    type Item = Word;

    fn next(&mut self) -> Option<Word> {
        if self.done {
            return None;
        }
        // odometer step; rolling over every digit moves to the next length
        let mut k = self.current.len();
        loop {
            if k == 0 {
                let len = self.current.len() + 1;
                if len > self.max_len {
                    self.done = true;
                    return None;
                }
                self.current = vec![0; len];
                break;
            }
            k -= 1;
            if self.current[k] + 1 < self.r {
                self.current[k] += 1;
                for d in &mut self.current[k + 1..] {
                    *d = 0;
                }
                break;
            }
        }
        Some(Word(self.current.clone()))
    }
}

/// `r + r^2 + ... + r^max_len`, or `None` on overflow.
pub fn count_words(r: usize, max_len: usize) -> Option<u128> {
    let mut total: u128 = 0;
    let mut pow: u128 = 1;
    for _ in 0..max_len {
        pow = pow.checked_mul(r as u128)?;
        total = total.checked_add(pow)?;
    }
    Some(total)
}
