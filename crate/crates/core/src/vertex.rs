//! Vertices of the d-regular rooted tree and eventually periodic rays.
//!
//! A vertex is a finite word over `{0, …, d-1}`, little-endian by level: the
//! first letter is the level-1 choice. The empty word is the root.

use crate::{Error, Result};
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Vertex {
    letters: Vec<u8>,
}

impl Vertex {
    pub fn root() -> Self {
        Vertex { letters: Vec::new() }
    }

    pub fn new(letters: Vec<u8>, degree: usize) -> Result<Self> {
        if letters.iter().any(|&x| (x as usize) >= degree) {
            return Err(Error::Precondition(format!(
                "vertex letters {letters:?} out of range for degree {degree}"
            )));
        }
        Ok(Vertex { letters })
    }

    /// Parse a string of digit letters, e.g. `"010"`. The empty string is the
    /// root. Degrees above ten are not representable in this notation.
    pub fn parse(s: &str, degree: usize) -> Result<Self> {
        let mut letters = Vec::with_capacity(s.len());
        for ch in s.chars() {
            let x = ch.to_digit(10).ok_or_else(|| Error::Precondition(format!(
                "bad vertex letter `{ch}` in `{s}`"
            )))? as u8;
            letters.push(x);
        }
        Vertex::new(letters, degree)
    }

    pub fn letters(&self) -> &[u8] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn is_root(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn child(&self, x: u8) -> Vertex {
        let mut letters = self.letters.clone();
        letters.push(x);
        Vertex { letters }
    }

    pub fn parent(&self) -> Option<Vertex> {
        if self.is_root() {
            return None;
        }
        Vertex { letters: self.letters[..self.letters.len() - 1].to_vec() }.into()
    }

    pub fn concat(&self, other: &Vertex) -> Vertex {
        let mut letters = self.letters.clone();
        letters.extend_from_slice(&other.letters);
        Vertex { letters }
    }

    pub fn is_prefix_of(&self, other: &Vertex) -> bool {
        other.letters.len() >= self.letters.len()
            && other.letters[..self.letters.len()] == self.letters[..]
    }

    /// Two vertices are orthogonal when neither subtree contains the other.
    pub fn orthogonal(&self, other: &Vertex) -> bool {
        !self.is_prefix_of(other) && !other.is_prefix_of(self)
    }

    /// The repeated-letter vertex `x^n`.
    pub fn repeated(letter: u8, n: usize) -> Vertex {
        Vertex { letters: vec![letter; n] }
    }

    /// Encoding of a level-n vertex as `Σ letters[i]·d^(n-1-i)`, big-endian
    /// by level. This order coincides with lexicographic vertex order.
    pub fn encode(&self, degree: usize) -> usize {
        self.letters.iter().fold(0usize, |acc, &x| acc * degree + x as usize)
    }

    pub fn decode(mut code: usize, level: usize, degree: usize) -> Vertex {
        let mut letters = vec![0u8; level];
        for i in (0..level).rev() {
            letters[i] = (code % degree) as u8;
            code /= degree;
        }
        Vertex { letters }
    }

    /// All vertices of the given level, in lexicographic order.
    pub fn level(level: usize, degree: usize) -> Vec<Vertex> {
        (0..degree.pow(level as u32)).map(|c| Vertex::decode(c, level, degree)).collect()
    }
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_root() {
            return write!(f, "ε");
        }
        for &x in &self.letters {
            write!(f, "{x}")?;
        }
        Ok(())
    }
}

/// An eventually periodic ray `preperiod · period^∞`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RaySpec {
    pub preperiod: Vertex,
    pub period: Vertex,
}

impl RaySpec {
    pub fn new(preperiod: Vertex, period: Vertex) -> Result<Self> {
        if period.is_empty() {
            return Err(Error::Precondition("ray period must be nonempty".into()));
        }
        Ok(RaySpec { preperiod, period })
    }

    /// The vertex of the given level lying on the ray.
    pub fn vertex_at_level(&self, level: usize) -> Vertex {
        let mut letters = Vec::with_capacity(level);
        letters.extend_from_slice(self.preperiod.letters());
        let mut i = 0usize;
        while letters.len() < level {
            letters.push(self.period.letters()[i % self.period.len()]);
            i += 1;
        }
        letters.truncate(level);
        Vertex { letters }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn encode_is_lexicographic() {
        let vs = Vertex::level(3, 2);
        for (i, v) in vs.iter().enumerate() {
            assert_eq!(v.encode(2), i);
            assert_eq!(Vertex::decode(i, 3, 2), *v);
        }
        assert_eq!(Vertex::parse("10", 2).unwrap().encode(2), 2);
    }

    #[test]
    fn orthogonality() {
        let a = Vertex::parse("01", 2).unwrap();
        let b = Vertex::parse("010", 2).unwrap();
        let c = Vertex::parse("10", 2).unwrap();
        assert!(!a.orthogonal(&b));
        assert!(a.orthogonal(&c));
    }

    #[test]
    fn ray_truncation() {
        let r = RaySpec::new(Vertex::parse("0", 2).unwrap(), Vertex::parse("10", 2).unwrap())
            .unwrap();
        assert_eq!(r.vertex_at_level(5), Vertex::parse("01010", 2).unwrap());
        assert!(RaySpec::new(Vertex::root(), Vertex::root()).is_err());
    }
}
