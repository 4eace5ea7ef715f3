//! Self-similar group presentations and the section/portrait calculus.
//!
//! A presentation is a finite list of generator rules, each a root
//! permutation together with `d` section words over the same alphabet. The
//! composition convention is fixed once in [`crate::perm::CONVENTION`]:
//! `(g·h)(x) = g(h(x))` with `g(xu) = σ(x)·g|_x(u)`. The convention is
//! validated against known identities by the verification suite.

use crate::perm::{Convention, Permutation, CONVENTION};
use crate::vertex::Vertex;
use crate::word::Word;
use crate::{Error, Result};
use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

/// One generator: a root permutation plus `d` section words.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratorRule {
    pub name: String,
    pub root_perm: Permutation,
    pub sections: Vec<Word>,
}

/// Outcome of checking one declared relation.
#[derive(Debug, Clone)]
pub struct RelationCheck {
    pub relation: Word,
    pub holds: bool,
}

/// Report produced by relation verification; failing relations are disabled
/// for canonicalization.
#[derive(Debug, Clone, Default)]
pub struct RelationReport {
    pub checks: Vec<RelationCheck>,
}

impl RelationReport {
    pub fn all_hold(&self) -> bool {
        self.checks.iter().all(|c| c.holds)
    }
}

/// Engine-verified rewriting data: exact generator orders and a table of
/// generator pairs whose product is the identity or a single generator.
/// Every entry is certified by the raw triviality engine before use.
#[derive(Debug, Clone, Default)]
pub(crate) struct CanonTable {
    pub orders: Vec<Option<u64>>,
    pub pair: HashMap<(usize, usize), Option<usize>>,
}

#[derive(Debug)]
pub struct GroupPresentation {
    degree: usize,
    rules: Vec<GeneratorRule>,
    name_index: HashMap<String, usize>,
    relations: Vec<Word>,
    bounded: bool,
    torsion_prime: Option<u64>,
    pub(crate) canon: OnceLock<CanonTable>,
    pub(crate) relation_report: OnceLock<RelationReport>,
    pub(crate) triviality_cache: Mutex<HashMap<Word, bool>>,
}

impl PartialEq for GroupPresentation {
    fn eq(&self, other: &Self) -> bool {
        self.degree == other.degree
            && self.rules == other.rules
            && self.relations == other.relations
    }
}

impl GroupPresentation {
    pub fn new(degree: usize, rules: Vec<GeneratorRule>, relations: Vec<Word>) -> Result<Self> {
        if degree < 2 {
            return Err(Error::InvalidPresentation(format!("degree {degree} < 2")));
        }
        let mut name_index = HashMap::new();
        for (i, r) in rules.iter().enumerate() {
            if r.root_perm.degree() != degree {
                return Err(Error::InvalidPresentation(format!(
                    "generator `{}` has a root permutation of degree {}",
                    r.name,
                    r.root_perm.degree()
                )));
            }
            if r.sections.len() != degree {
                return Err(Error::InvalidPresentation(format!(
                    "generator `{}` has {} sections, expected {degree}",
                    r.name,
                    r.sections.len()
                )));
            }
            if name_index.insert(r.name.clone(), i).is_some() {
                return Err(Error::InvalidPresentation(format!(
                    "duplicate generator name `{}`",
                    r.name
                )));
            }
        }
        let gen_count = rules.len();
        for r in &rules {
            for s in &r.sections {
                for &(g, _) in s.tokens() {
                    if g >= gen_count {
                        return Err(Error::InvalidPresentation(format!(
                            "section of `{}` references undeclared generator #{g}",
                            r.name
                        )));
                    }
                }
            }
        }
        for rel in &relations {
            for &(g, _) in rel.tokens() {
                if g >= gen_count {
                    return Err(Error::InvalidPresentation(
                        "relation references undeclared generator".into(),
                    ));
                }
            }
        }
        let bounded =
            rules.iter().all(|r| r.sections.iter().all(|s| s.token_len() <= 1));
        Ok(GroupPresentation {
            degree,
            rules,
            name_index,
            relations,
            bounded,
            torsion_prime: None,
            canon: OnceLock::new(),
            relation_report: OnceLock::new(),
            triviality_cache: Mutex::new(HashMap::new()),
        })
    }

    /// Declare the group a torsion `p`-group so order searches only test
    /// prime-power exponents. Used by the built-in presets.
    pub fn with_torsion_prime(mut self, p: u64) -> Self {
        self.torsion_prime = Some(p);
        self
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn generator_count(&self) -> usize {
        self.rules.len()
    }

    pub fn generator_name(&self, i: usize) -> &str {
        &self.rules[i].name
    }

    pub fn generator_index(&self, name: &str) -> Option<usize> {
        self.name_index.get(name).copied()
    }

    pub fn rule(&self, i: usize) -> &GeneratorRule {
        &self.rules[i]
    }

    pub fn rules(&self) -> &[GeneratorRule] {
        &self.rules
    }

    pub fn relations(&self) -> &[Word] {
        &self.relations
    }

    pub fn is_bounded(&self) -> bool {
        self.bounded
    }

    pub fn torsion_prime(&self) -> Option<u64> {
        self.torsion_prime
    }

    /// The generator words, in declaration order.
    pub fn generator_words(&self) -> Vec<Word> {
        (0..self.rules.len()).map(Word::generator).collect()
    }

    pub(crate) fn canon_table(&self) -> Option<&CanonTable> {
        self.canon.get()
    }
}

/// The level-1 permutation of the automorphism represented by `w`.
pub fn root_permutation(w: &Word, g: &GroupPresentation) -> Permutation {
    root_permutation_with(w, g, CONVENTION)
}

pub(crate) fn root_permutation_with(
    w: &Word,
    g: &GroupPresentation,
    conv: Convention,
) -> Permutation {
    let mut acc = Permutation::identity(g.degree());
    for &(gen, e) in w.tokens() {
        let p = g.rule(gen).root_perm.power(e);
        acc = Permutation::product(&acc, &p, conv);
    }
    acc
}

/// Section of a single generator power `gen^±1` at letter `x`.
fn generator_section(g: &GroupPresentation, gen: usize, x: usize) -> &Word {
    &g.rule(gen).sections[x]
}

/// Section of `w` at a first-level letter, under the stated convention.
pub(crate) fn section_letter_with(
    w: &Word,
    x: usize,
    g: &GroupPresentation,
    conv: Convention,
) -> Word {
    match conv {
        Convention::RightActsFirst => {
            // (g·h)|_x = g|_{σ_h(x)} · h|_x: scan tokens right to left.
            let mut acc = Word::identity();
            let mut y = x;
            for &(gen, e) in w.tokens().iter().rev() {
                let sigma = &g.rule(gen).root_perm;
                if e >= 0 {
                    for _ in 0..e {
                        acc = Word::multiply(generator_section(g, gen, y), &acc);
                        y = sigma.apply(y);
                    }
                } else {
                    let sigma_inv = sigma.inverse();
                    for _ in 0..(-e) {
                        y = sigma_inv.apply(y);
                        acc = Word::multiply(&generator_section(g, gen, y).inverse(), &acc);
                    }
                }
            }
            acc
        }
        Convention::LeftActsFirst => {
            // (g·h)|_x = g|_x · h|_{σ_g(x)}: scan tokens left to right.
            let mut acc = Word::identity();
            let mut y = x;
            for &(gen, e) in w.tokens() {
                let sigma = &g.rule(gen).root_perm;
                if e >= 0 {
                    for _ in 0..e {
                        acc = Word::multiply(&acc, generator_section(g, gen, y));
                        y = sigma.apply(y);
                    }
                } else {
                    let sigma_inv = sigma.inverse();
                    for _ in 0..(-e) {
                        y = sigma_inv.apply(y);
                        acc = Word::multiply(&acc, &generator_section(g, gen, y).inverse());
                    }
                }
            }
            acc
        }
    }
}

/// The section of `w` at a vertex, by recursive application of the cocycle
/// rule. The result is in canonical token form (no relation rewriting).
pub fn section(w: &Word, v: &Vertex, g: &GroupPresentation) -> Word {
    let mut cur = w.clone();
    for &x in v.letters() {
        cur = section_letter_with(&cur, x as usize, g, CONVENTION);
    }
    cur
}

/// Image of a vertex under the automorphism represented by `w`.
pub fn act_vertex(w: &Word, v: &Vertex, g: &GroupPresentation) -> Vertex {
    let mut out = Vec::with_capacity(v.len());
    let mut cur = w.clone();
    for &x in v.letters() {
        let sigma = root_permutation(&cur, g);
        out.push(sigma.apply(x as usize) as u8);
        cur = section_letter_with(&cur, x as usize, g, CONVENTION);
    }
    Vertex::new(out, g.degree()).expect("image letters in range")
}

/// A depth-`n` portrait: root permutations of the sections at every vertex
/// of length `< n`, stored level by level in vertex-encoding order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Portrait {
    degree: usize,
    levels: Vec<Vec<Permutation>>,
}

impl Portrait {
    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// The label at a vertex of length `< depth`.
    pub fn label(&self, v: &Vertex) -> &Permutation {
        &self.levels[v.len()][v.encode(self.degree)]
    }

    pub fn level_labels(&self, level: usize) -> &[Permutation] {
        &self.levels[level]
    }

    /// Number of labelled vertices: `(d^n - 1)/(d - 1)`.
    pub fn label_count(&self) -> usize {
        self.levels.iter().map(|l| l.len()).sum()
    }

    /// Direct construction from per-level labels; `levels[k]` must hold
    /// `d^k` permutations in vertex-encoding order.
    pub fn from_levels(degree: usize, levels: Vec<Vec<Permutation>>) -> Result<Self> {
        for (k, l) in levels.iter().enumerate() {
            if l.len() != degree.pow(k as u32) {
                return Err(Error::Precondition(format!(
                    "portrait level {k} has {} labels, expected {}",
                    l.len(),
                    degree.pow(k as u32)
                )));
            }
            if l.iter().any(|p| p.degree() != degree) {
                return Err(Error::Precondition("portrait label of wrong degree".into()));
            }
        }
        Ok(Portrait { degree, levels })
    }

    pub fn all_trivial(&self) -> bool {
        self.levels.iter().all(|l| l.iter().all(|p| p.is_identity()))
    }
}

/// The depth-`n` portrait of `w`: `labels(v) = root_permutation(section(w, v))`
/// for all `|v| < n`.
pub fn portrait_of(w: &Word, n: usize, g: &GroupPresentation) -> Portrait {
    let d = g.degree();
    let mut levels: Vec<Vec<Permutation>> = Vec::with_capacity(n);
    let mut frontier = vec![w.clone()];
    for _ in 0..n {
        let labels: Vec<Permutation> =
            frontier.iter().map(|s| root_permutation(s, g)).collect();
        let mut next = Vec::with_capacity(frontier.len() * d);
        for s in &frontier {
            for x in 0..d {
                next.push(section_letter_with(s, x, g, CONVENTION));
            }
        }
        levels.push(labels);
        frontier = next;
    }
    Portrait { degree: d, levels }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets::{ggs, grigorchuk, GgsVector};
    use crate::word::parse_word;

    fn w(text: &str, g: &GroupPresentation) -> Word {
        parse_word(text, g).unwrap()
    }

    #[test]
    fn grigorchuk_root_permutations() {
        let g = grigorchuk();
        assert_eq!(
            root_permutation(&w("a", &g), &g),
            Permutation::transposition(2, 0, 1)
        );
        assert!(root_permutation(&w("b", &g), &g).is_identity());
        assert!(root_permutation(&w("b a c a", &g), &g).is_identity());
    }

    #[test]
    fn ggs_root_permutation() {
        let g = ggs(&GgsVector::new(3, &[1, -1]).unwrap()).unwrap();
        let sigma = root_permutation(&w("a", &g), &g);
        assert_eq!(sigma.images(), &[1, 2, 0]);
        assert!(root_permutation(&w("b", &g), &g).is_identity());
    }

    #[test]
    fn grigorchuk_sections() {
        let g = grigorchuk();
        let v0 = Vertex::parse("0", 2).unwrap();
        let v1 = Vertex::parse("1", 2).unwrap();
        assert_eq!(section(&w("b", &g), &v0, &g), w("a", &g));
        assert_eq!(section(&w("b", &g), &v1, &g), w("c", &g));
        assert_eq!(section(&w("d", &g), &v0, &g), Word::identity());
        assert_eq!(section(&w("d", &g), &v1, &g), w("b", &g));
        // d^a = (b, 1): conjugation by a swaps the coordinates.
        assert_eq!(section(&w("d^a", &g), &v0, &g), w("b", &g));
        assert_eq!(section(&w("d^a", &g), &v1, &g), Word::identity());
    }

    #[test]
    fn ggs_sections() {
        let g = ggs(&GgsVector::new(5, &[1, 1, 1, 1]).unwrap()).unwrap();
        let last = Vertex::parse("4", 5).unwrap();
        assert_eq!(section(&w("b", &g), &last, &g), w("b", &g));
        assert_eq!(section(&w("b", &g), &Vertex::parse("0", 5).unwrap(), &g), w("a", &g));
    }

    #[test]
    fn vertex_action() {
        let g = grigorchuk();
        let act = |t: &str, v: &str| {
            act_vertex(&w(t, &g), &Vertex::parse(v, 2).unwrap(), &g).to_string()
        };
        assert_eq!(act("a", "00"), "10");
        assert_eq!(act("d", "0"), "0");
        assert_eq!(act("d", "1"), "1");
        // b|_0 = a swaps below 0.
        assert_eq!(act("b", "00"), "01");
    }

    #[test]
    fn action_compatible_with_sections() {
        let g = grigorchuk();
        let word = w("a b a c d", &g);
        for v in Vertex::level(3, 2) {
            let first = v.letters()[0] as usize;
            let rest = Vertex::new(v.letters()[1..].to_vec(), 2).unwrap();
            let sigma = root_permutation(&word, &g);
            let sect = section(&word, &Vertex::new(vec![first as u8], 2).unwrap(), &g);
            let expect = Vertex::new(vec![sigma.apply(first) as u8], 2)
                .unwrap()
                .concat(&act_vertex(&sect, &rest, &g));
            assert_eq!(act_vertex(&word, &v, &g), expect);
        }
    }

    #[test]
    fn portraits() {
        let g = grigorchuk();
        let p = portrait_of(&Word::identity(), 3, &g);
        assert!(p.all_trivial());
        assert_eq!(p.label_count(), 7);

        let pa = portrait_of(&w("a", &g), 2, &g);
        assert_eq!(pa.label(&Vertex::root()), &Permutation::transposition(2, 0, 1));
        assert!(pa.level_labels(1).iter().all(|q| q.is_identity()));

        // d = (1, b), b = (a, c): the nontrivial labels of d to depth 4 sit
        // at 1 (none: d|_1 = b has trivial root? b is level-1-trivial), at 10
        // (b|_0 = a) and nowhere on the 0 side.
        let pd = portrait_of(&w("d", &g), 4, &g);
        assert!(pd.label(&Vertex::root()).is_identity());
        assert!(pd.label(&Vertex::parse("0", 2).unwrap()).is_identity());
        assert!(pd.label(&Vertex::parse("1", 2).unwrap()).is_identity());
        assert!(!pd.label(&Vertex::parse("10", 2).unwrap()).is_identity());
        assert!(pd.label(&Vertex::parse("11", 2).unwrap()).is_identity());
        assert!(pd.label(&Vertex::parse("00", 2).unwrap()).is_identity());
    }
}
