//! Generator words: signed letters, run-length syllables, parsing and printing.

use super::{Group, GroupError};

/// A signed generator index: `+(i+1)` is generator `i`, `-(i+1)` its inverse.
pub type Letter = i32;

/// A word in the generators, read left to right.
pub type Word = Vec<Letter>;

/// One run `gen^exp` of a word.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Syllable {
    pub gen: usize,
    pub exp: i64,
}

impl Syllable {
    pub fn new(gen: usize, exp: i64) -> Self {
        Syllable { gen, exp }
    }
}

pub fn letter(gen: usize, inverse: bool) -> Letter {
    let l = gen as Letter + 1;
    if inverse {
        -l
    } else {
        l
    }
}

/// Expands syllables into letters. Zero exponents vanish.
pub fn expand(syllables: &[Syllable]) -> Word {
    let mut out = Vec::new();
    for s in syllables {
        let l = letter(s.gen, s.exp < 0);
        for _ in 0..s.exp.unsigned_abs() {
            out.push(l);
        }
    }
    out
}

/// Groups adjacent equal generators; does not perform free reduction.
pub fn compress(word: &[Letter]) -> Vec<Syllable> {
    let mut out: Vec<Syllable> = Vec::new();
    for &l in word {
        let gen = (l.unsigned_abs() - 1) as usize;
        let step = if l > 0 { 1 } else { -1 };
        match out.last_mut() {
            Some(last) if last.gen == gen => {
                last.exp += step;
                if last.exp == 0 {
                    out.pop();
                }
            }
            _ => out.push(Syllable::new(gen, step)),
        }
    }
    out
}

pub fn format_syllables(group: &Group, syllables: &[Syllable]) -> String {
    let parts: Vec<String> = syllables
        .iter()
        .filter(|s| s.exp != 0)
        .map(|s| {
            let name = group.generator_name(s.gen);
            if s.exp == 1 {
                name.to_string()
            } else {
                format!("{name}^{}", s.exp)
            }
        })
        .collect();
    if parts.is_empty() {
        "1".to_string()
    } else {
        parts.join(" ")
    }
}

/// Parses whitespace-separated tokens `name` or `name^k`. `1` and the empty
/// string denote the identity.
pub fn parse_word(group: &Group, input: &str) -> Result<Word, GroupError> {
    let bad = |reason: String| GroupError::BadWord {
        input: input.to_string(),
        reason,
    };
    let mut syllables = Vec::new();
    for token in input.split_whitespace() {
        if token == "1" {
            continue;
        }
        let (name, exp) = match token.split_once('^') {
            Some((n, e)) => {
                let e: i64 = e
                    .parse()
                    .map_err(|_| bad(format!("bad exponent in {token:?}")))?;
                (n, e)
            }
            None => (token, 1),
        };
        let gen = group
            .generator_index(name)
            .ok_or_else(|| bad(format!("unknown generator {name:?}")))?;
        syllables.push(Syllable::new(gen, exp));
    }
    Ok(expand(&syllables))
}
