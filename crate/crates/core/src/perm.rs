//! Permutations of the first level `{0, …, d-1}`.

use crate::{Error, Result};

/// A permutation of `{0, …, d-1}`, stored as its image list.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    images: Vec<usize>,
}

/// The composition convention for group products.
///
/// The engine fixes `(g·h)(x) = g(h(x))`: the right factor acts first, with
/// wreath rule `g = (g|_0, …, g|_{d-1})σ` and `g(xu) = σ(x)·g|_x(u)`. The
/// opposite order is kept available so the convention validation suite can
/// demonstrate which identities are orientation-sensitive.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Convention {
    /// `(g·h)(x) = g(h(x))`.
    RightActsFirst,
    /// `(g·h)(x) = h(g(x))`.
    LeftActsFirst,
}

/// The convention used by every public operation of this crate.
pub const CONVENTION: Convention = Convention::RightActsFirst;

impl Permutation {
    pub fn identity(degree: usize) -> Self {
        Permutation { images: (0..degree).collect() }
    }

    /// Build from an image list; every value must appear exactly once.
    pub fn from_images(images: Vec<usize>) -> Result<Self> {
        let d = images.len();
        let mut seen = vec![false; d];
        for &x in &images {
            if x >= d || seen[x] {
                return Err(Error::InvalidPresentation(format!(
                    "invalid permutation image list {images:?}"
                )));
            }
            seen[x] = true;
        }
        Ok(Permutation { images })
    }

    /// The transposition `(i j)` on `{0, …, d-1}`.
    pub fn transposition(degree: usize, i: usize, j: usize) -> Self {
        let mut images: Vec<usize> = (0..degree).collect();
        images.swap(i, j);
        Permutation { images }
    }

    /// The cycle `0 → 1 → … → d-1 → 0`.
    pub fn forward_cycle(degree: usize) -> Self {
        Permutation { images: (0..degree).map(|x| (x + 1) % degree).collect() }
    }

    pub fn degree(&self) -> usize {
        self.images.len()
    }

    pub fn apply(&self, x: usize) -> usize {
        self.images[x]
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &x)| i == x)
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.images.len()];
        for (i, &x) in self.images.iter().enumerate() {
            inv[x] = i;
        }
        Permutation { images: inv }
    }

    /// The permutation of the group product `left·right` under `conv`.
    pub fn product(left: &Permutation, right: &Permutation, conv: Convention) -> Permutation {
        debug_assert_eq!(left.degree(), right.degree());
        let images = match conv {
            Convention::RightActsFirst => {
                (0..right.degree()).map(|x| left.apply(right.apply(x))).collect()
            }
            Convention::LeftActsFirst => {
                (0..right.degree()).map(|x| right.apply(left.apply(x))).collect()
            }
        };
        Permutation { images }
    }

    /// `self` raised to an integer power.
    pub fn power(&self, e: i64) -> Permutation {
        let base = if e < 0 { self.inverse() } else { self.clone() };
        let mut out = Permutation::identity(self.degree());
        for _ in 0..e.unsigned_abs() {
            out = Permutation::product(&base, &out, Convention::RightActsFirst);
        }
        out
    }

    /// Cycle notation, e.g. `(0 1)`; the identity prints as `()`.
    pub fn cycle_string(&self) -> String {
        let d = self.degree();
        let mut seen = vec![false; d];
        let mut out = String::new();
        for start in 0..d {
            if seen[start] || self.images[start] == start {
                seen[start] = true;
                continue;
            }
            let mut cycle = vec![start];
            seen[start] = true;
            let mut x = self.images[start];
            while x != start {
                seen[x] = true;
                cycle.push(x);
                x = self.images[x];
            }
            out.push('(');
            out.push_str(
                &cycle.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" "),
            );
            out.push(')');
        }
        if out.is_empty() {
            out.push_str("()");
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_follows_convention() {
        // f = (0 1 2), g = (0 1): (f·g)(0) = f(g(0)) = f(1) = 2 under
        // right-acts-first.
        let f = Permutation::forward_cycle(3);
        let g = Permutation::transposition(3, 0, 1);
        let fg = Permutation::product(&f, &g, Convention::RightActsFirst);
        assert_eq!(fg.apply(0), 2);
        let fg_flip = Permutation::product(&f, &g, Convention::LeftActsFirst);
        assert_eq!(fg_flip.apply(0), 0);
    }

    #[test]
    fn inverse_and_power() {
        let c = Permutation::forward_cycle(5);
        assert!(Permutation::product(&c, &c.inverse(), CONVENTION).is_identity());
        assert!(c.power(5).is_identity());
        assert_eq!(c.power(-1), c.inverse());
    }

    #[test]
    fn rejects_non_bijection() {
        assert!(Permutation::from_images(vec![0, 0]).is_err());
        assert!(Permutation::from_images(vec![0, 2]).is_err());
    }
}
