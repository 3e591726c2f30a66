//! Text-only baselines: Flesch reading ease and static word embeddings.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

/// Weights of the English Flesch reading-ease formula.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FleschWeights {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

pub const ENGLISH: FleschWeights = FleschWeights {
    x: 206.835,
    y: 1.015,
    z: 84.6,
};

fn is_vowel(c: char) -> bool {
    matches!(c, 'a' | 'e' | 'i' | 'o' | 'u' | 'y')
}

/// Vowel groups (a, e, i, o, u, y), minus a silent final "e" unless the
/// word ends in "le"; at least 1.
pub fn count_syllables(word: &str) -> usize {
    let w: Vec<char> = word.to_lowercase().chars().filter(|c| c.is_alphabetic()).collect();
    let mut groups = 0usize;
    let mut prev = false;
    for &c in &w {
        let v = is_vowel(c);
        if v && !prev {
            groups += 1;
        }
        prev = v;
    }
    let n = w.len();
    if n >= 1 && w[n - 1] == 'e' && !(n >= 2 && w[n - 2] == 'l') {
        groups = groups.saturating_sub(1);
    }
    groups.max(1)
}

/// FRE for one sentence of `words` words and `syllables` syllables.
pub fn flesch_from_counts(words: usize, syllables: usize, weights: &FleschWeights) -> f64 {
    let w = words as f64;
    weights.x - weights.y * w - weights.z * (syllables as f64 / w)
}

/// FRE of a single sentence given as tokens.
pub fn flesch_score<S: AsRef<str>>(tokens: &[S]) -> Result<f64> {
    if tokens.is_empty() {
        return Err(Error::Empty("flesch_score needs at least one token".into()));
    }
    let syllables = tokens.iter().map(|t| count_syllables(t.as_ref())).sum();
    Ok(flesch_from_counts(tokens.len(), syllables, &ENGLISH))
}

/// Token → vector table with a fallback for unknown tokens.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    dim: usize,
    vectors: HashMap<String, Vec<f64>>,
    fallback: Vec<f64>,
}

pub const UNKNOWN_TOKEN: &str = "<unk>";

impl EmbeddingTable {
    /// Reads `token<TAB>v1 v2 … vd` lines. A `<unk>` entry, if present,
    /// becomes the fallback; otherwise unknown tokens map to zeros.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    pub fn parse(text: &str, source: impl Into<PathBuf>) -> Result<Self> {
        let source = source.into();
        let err = |line: usize, message: String| Error::Parse {
            file: source.clone(),
            line,
            message,
        };
        let mut vectors = HashMap::new();
        let mut dim = None;
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let (token, rest) = line
                .split_once('\t')
                .ok_or_else(|| err(i + 1, "expected token<TAB>values".into()))?;
            let v = rest
                .split_whitespace()
                .map(|x| x.parse::<f64>().map_err(|e| err(i + 1, format!("bad value '{x}': {e}"))))
                .collect::<Result<Vec<f64>>>()?;
            if v.is_empty() {
                return Err(err(i + 1, "empty vector".into()));
            }
            match dim {
                None => dim = Some(v.len()),
                Some(d) if d != v.len() => {
                    return Err(err(i + 1, format!("dimension {} differs from {d}", v.len())));
                }
                _ => {}
            }
            vectors.insert(token.to_string(), v);
        }
        let dim = dim.ok_or_else(|| Error::Empty(format!("embedding file {}", source.display())))?;
        let fallback = vectors.get(UNKNOWN_TOKEN).cloned().unwrap_or_else(|| vec![0.0; dim]);
        Ok(EmbeddingTable { dim, vectors, fallback })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// Exact token, then lowercased token, then the fallback.
    pub fn lookup(&self, token: &str) -> &[f64] {
        self.vectors
            .get(token)
            .or_else(|| self.vectors.get(&token.to_lowercase()))
            .unwrap_or(&self.fallback)
    }

    /// One vector per token.
    pub fn embed<S: AsRef<str>>(&self, tokens: &[S]) -> Vec<Vec<f64>> {
        tokens.iter().map(|t| self.lookup(t.as_ref()).to_vec()).collect()
    }
}
