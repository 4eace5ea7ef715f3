//! Words over the generator alphabet of a presentation.
//!
//! A word is a sequence of `(generator, exponent)` tokens in canonical token
//! form: adjacent tokens with the same generator are merged and zero
//! exponents removed. No other rewriting happens here; relation-aware
//! canonicalization lives in the word-problem engine and uses only
//! engine-verified relations.

use crate::presentation::GroupPresentation;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Word {
    tokens: Vec<(usize, i64)>,
}

impl Word {
    pub fn identity() -> Self {
        Word { tokens: Vec::new() }
    }

    pub fn generator(gen: usize) -> Self {
        Word { tokens: vec![(gen, 1)] }
    }

    pub fn from_tokens(tokens: Vec<(usize, i64)>) -> Self {
        let mut w = Word { tokens: Vec::with_capacity(tokens.len()) };
        for (g, e) in tokens {
            w.push_token(g, e);
        }
        w
    }

    pub fn tokens(&self) -> &[(usize, i64)] {
        &self.tokens
    }

    pub fn is_identity_word(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Number of tokens.
    pub fn token_len(&self) -> usize {
        self.tokens.len()
    }

    /// Total letter count `Σ |exponent|`.
    pub fn letter_len(&self) -> u64 {
        self.tokens.iter().map(|&(_, e)| e.unsigned_abs()).sum()
    }

    fn push_token(&mut self, gen: usize, exp: i64) {
        if exp == 0 {
            return;
        }
        if let Some(last) = self.tokens.last_mut() {
            if last.0 == gen {
                last.1 += exp;
                if last.1 == 0 {
                    self.tokens.pop();
                }
                return;
            }
        }
        self.tokens.push((gen, exp));
    }

    /// Concatenation in canonical token form; the identity is neutral.
    pub fn multiply(w1: &Word, w2: &Word) -> Word {
        let mut out = w1.clone();
        for &(g, e) in &w2.tokens {
            out.push_token(g, e);
        }
        out
    }

    /// Tokens reversed with negated exponents.
    pub fn inverse(&self) -> Word {
        Word {
            tokens: self.tokens.iter().rev().map(|&(g, e)| (g, -e)).collect(),
        }
    }

    /// `self` raised to an integer power (word-level repetition).
    pub fn power(&self, e: i64) -> Word {
        let base = if e < 0 { self.inverse() } else { self.clone() };
        let mut out = Word::identity();
        for _ in 0..e.unsigned_abs() {
            out = Word::multiply(&out, &base);
        }
        out
    }

    /// The conjugate `v' · self · v`.
    pub fn conjugate(&self, v: &Word) -> Word {
        Word::multiply(&Word::multiply(&v.inverse(), self), v)
    }

    /// The commutator `[u, v] = u' v' u v`.
    pub fn commutator(u: &Word, v: &Word) -> Word {
        Word::multiply(&Word::multiply(&u.inverse(), &v.inverse()), &Word::multiply(u, v))
    }

    /// Render using the presentation's generator names; the identity prints
    /// as `1`.
    pub fn display(&self, g: &GroupPresentation) -> String {
        if self.tokens.is_empty() {
            return "1".to_string();
        }
        self.tokens
            .iter()
            .map(|&(gen, e)| {
                let name = g.generator_name(gen);
                match e {
                    1 => name.to_string(),
                    -1 => format!("{name}'"),
                    _ => format!("{name}^{e}"),
                }
            })
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// Parse a word over the presentation's generators.
///
/// Grammar: tokens separated by whitespace or `*`; a token is a generator
/// name, `name'` (inverse) or `name^k` with an integer exponent; parentheses
/// group subwords; `[u,v]` is the commutator `u' v' u v`; `u^v` with a word
/// operand is the conjugate `v' u v`. Postfix operators bind to the
/// immediately preceding item. The empty text is the identity.
pub fn parse_word(text: &str, g: &GroupPresentation) -> Result<Word> {
    let mut p = Parser { chars: text.char_indices().peekable(), text, g };
    let w = p.parse_sequence(&[])?;
    p.skip_ws();
    if let Some(&(i, c)) = p.chars.peek() {
        return Err(p.err(i, format!("unexpected `{c}`")));
    }
    Ok(w)
}

struct Parser<'a> {
    chars: std::iter::Peekable<std::str::CharIndices<'a>>,
    text: &'a str,
    g: &'a GroupPresentation,
}

impl<'a> Parser<'a> {
    fn err(&self, offset: usize, msg: String) -> Error {
        let line = self.text[..offset].chars().filter(|&c| c == '\n').count() + 1;
        let col = self.text[..offset]
            .rsplit('\n')
            .next()
            .map(|s| s.chars().count())
            .unwrap_or(0)
            + 1;
        Error::Parse { line, col, msg }
    }

    fn skip_ws(&mut self) {
        while let Some(&(_, c)) = self.chars.peek() {
            if c.is_whitespace() || c == '*' {
                self.chars.next();
            } else {
                break;
            }
        }
    }

    fn parse_sequence(&mut self, stop: &[char]) -> Result<Word> {
        let mut out = Word::identity();
        loop {
            self.skip_ws();
            match self.chars.peek() {
                None => break,
                Some(&(_, c)) if stop.contains(&c) => break,
                _ => {}
            }
            let item = self.parse_item(stop)?;
            out = Word::multiply(&out, &item);
        }
        Ok(out)
    }

    fn parse_item(&mut self, stop: &[char]) -> Result<Word> {
        let mut w = self.parse_primary(stop)?;
        loop {
            match self.chars.peek() {
                Some(&(_, '\'')) => {
                    self.chars.next();
                    w = w.inverse();
                }
                Some(&(_, '^')) => {
                    self.chars.next();
                    w = self.parse_superscript(w, stop)?;
                }
                _ => break,
            }
        }
        Ok(w)
    }

    fn parse_superscript(&mut self, base: Word, stop: &[char]) -> Result<Word> {
        match self.chars.peek() {
            Some(&(_, c)) if c == '-' || c.is_ascii_digit() => {
                let mut s = String::new();
                if c == '-' {
                    s.push('-');
                    self.chars.next();
                }
                while let Some(&(_, d)) = self.chars.peek() {
                    if d.is_ascii_digit() {
                        s.push(d);
                        self.chars.next();
                    } else {
                        break;
                    }
                }
                let (i, _) = self.chars.peek().copied().unwrap_or((self.text.len(), ' '));
                let e: i64 = s
                    .parse()
                    .map_err(|_| self.err(i, format!("malformed exponent `{s}`")))?;
                Ok(base.power(e))
            }
            Some(&(_, _)) => {
                let v = self.parse_primary(stop)?;
                Ok(base.conjugate(&v))
            }
            None => {
                Err(self.err(self.text.len(), "expected exponent or conjugator after `^`".into()))
            }
        }
    }

    fn parse_primary(&mut self, _stop: &[char]) -> Result<Word> {
        self.skip_ws();
        match self.chars.peek().copied() {
            Some((_, '(')) => {
                self.chars.next();
                let w = self.parse_sequence(&[')'])?;
                match self.chars.next() {
                    Some((_, ')')) => Ok(w),
                    _ => Err(self.err(self.text.len(), "unbalanced `(`".into())),
                }
            }
            Some((_, '[')) => {
                self.chars.next();
                let u = self.parse_sequence(&[','])?;
                match self.chars.next() {
                    Some((_, ',')) => {}
                    _ => return Err(self.err(self.text.len(), "expected `,` in commutator".into())),
                }
                let v = self.parse_sequence(&[']'])?;
                match self.chars.next() {
                    Some((_, ']')) => Ok(Word::commutator(&u, &v)),
                    _ => Err(self.err(self.text.len(), "unbalanced `[`".into())),
                }
            }
            Some((i, c)) if c.is_alphabetic() || c == '_' => {
                let mut name = String::new();
                while let Some(&(_, d)) = self.chars.peek() {
                    if d.is_alphanumeric() || d == '_' {
                        name.push(d);
                        self.chars.next();
                    } else {
                        break;
                    }
                }
                match self.g.generator_index(&name) {
                    Some(gen) => Ok(Word::generator(gen)),
                    None => Err(self.err(i, format!("unknown generator name `{name}`"))),
                }
            }
            Some((i, c)) => Err(self.err(i, format!("unexpected `{c}`"))),
            None => Ok(Word::identity()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets::grigorchuk;

    #[test]
    fn tokenization_and_merge() {
        let g = grigorchuk();
        let w = parse_word("a b a", &g).unwrap();
        assert_eq!(w.tokens(), &[(0, 1), (1, 1), (0, 1)]);
        let merged = parse_word("a a", &g).unwrap();
        assert_eq!(merged.tokens(), &[(0, 2)]);
        assert_eq!(parse_word("", &g).unwrap(), Word::identity());
    }

    #[test]
    fn inverse_and_cancellation() {
        let g = grigorchuk();
        let w = parse_word("a b", &g).unwrap();
        assert_eq!(w.inverse().tokens(), &[(1, -1), (0, -1)]);
        let e = Word::multiply(&parse_word("b", &g).unwrap(), &parse_word("b'", &g).unwrap());
        assert!(e.is_identity_word());
        assert_eq!(parse_word("b^2", &g).unwrap().inverse().tokens(), &[(1, -2)]);
        assert!(Word::identity().inverse().is_identity_word());
    }

    #[test]
    fn grammar_operators() {
        let g = grigorchuk();
        // Conjugation u^v = v' u v.
        let w = parse_word("d^a", &g).unwrap();
        assert_eq!(w, parse_word("a' d a", &g).unwrap());
        // Commutator [u,v] = u' v' u v.
        let c = parse_word("[a, b]", &g).unwrap();
        assert_eq!(c, parse_word("a' b' a b", &g).unwrap());
        // Grouping, repetition, stars.
        assert_eq!(parse_word("(a b)^2", &g).unwrap(), parse_word("a*b*a*b", &g).unwrap());
        assert_eq!(parse_word("(a b)^-1", &g).unwrap(), parse_word("b' a'", &g).unwrap());
        assert_eq!(
            parse_word("b^(a c a)", &g).unwrap(),
            parse_word("a' c' a' b a c a", &g).unwrap()
        );
    }

    #[test]
    fn parse_errors() {
        let g = grigorchuk();
        assert!(matches!(parse_word("q", &g), Err(Error::UnknownGenerator(_)) | Err(Error::Parse { .. })));
        assert!(parse_word("a^x2", &g).is_err());
        assert!(parse_word("(a b", &g).is_err());
    }

    #[test]
    fn multiply_identity_neutral() {
        let g = grigorchuk();
        let w = parse_word("a b'", &g).unwrap();
        assert_eq!(Word::multiply(&Word::identity(), &w), w);
        assert_eq!(Word::multiply(&w, &Word::identity()), w);
    }
}
