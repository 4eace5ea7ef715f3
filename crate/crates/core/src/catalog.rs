//! Named subgroups of the first Grigorchuk group.
//!
//! Generator lists follow the standard lattice of subgroups containing
//! `B = ⟨b⟩^G`, plus the two explicit weakly maximal examples: the level
//! transitive `W_L = ⟨a, bab, cadab⟩` and the block-structured
//! `W_P = ⟨a, diag(J_{1,5} × J_{1,5}), {1}×K×{1}×K⟩`.
//!
//! Note on `B`: the three conjugates `b, b^a, b^{ada}` generate a proper
//! subgroup whose level indices grow without bound; the normal closure needs
//! the fourth conjugate `b^{adada}`. The four-generator list used here
//! matches the level images of `⟨b⟩^G` (cross-checked in the tests).

use crate::presentation::GroupPresentation;
use crate::registry::{rist_embed, RistEmbeddingRegistry};
use crate::subgroups::SubgroupSpec;
use crate::vertex::Vertex;
use crate::word::{parse_word, Word};
use crate::Result;

fn spec(name: &str, texts: &[&str], g: &GroupPresentation) -> SubgroupSpec {
    SubgroupSpec::new(
        name,
        texts.iter().map(|t| parse_word(t, g).expect("catalog word parses")).collect(),
    )
}

/// `B = ⟨b⟩^G`, index 8.
pub fn b_subgroup(g: &GroupPresentation) -> SubgroupSpec {
    spec("B", &["b", "b^a", "b^(a d a)", "b^(a d a d a)"], g)
}

/// `K = ⟨(ab)²⟩^G`, the branching subgroup, index 16.
pub fn k_subgroup(g: &GroupPresentation) -> SubgroupSpec {
    spec("K", &["(a b)^2", "(b d^a)^2", "(b^a d)^2"], g)
}

/// `H = Stab(level 1)`, index 2.
pub fn h_stabilizer(g: &GroupPresentation) -> SubgroupSpec {
    spec("H", &["c", "c^a", "d", "d^a"], g)
}

/// `J_{0,2} = ⟨b, a, a^c⟩`, index 2.
pub fn j02(g: &GroupPresentation) -> SubgroupSpec {
    spec("J_{0,2}", &["b", "a", "a^c"], g)
}

/// `J_{0,5} = ⟨b, ac⟩`, index 2.
pub fn j05(g: &GroupPresentation) -> SubgroupSpec {
    spec("J_{0,5}", &["b", "a c"], g)
}

/// `J_{1,5} = ⟨b, b^a, dd^a⟩`, the normal subgroup of index 4.
pub fn j15(g: &GroupPresentation) -> SubgroupSpec {
    spec("J_{1,5}", &["b", "b^a", "d d^a"], g)
}

/// Alternative generators `⟨b, aba, dada⟩` for `J_{1,5}`; their level
/// images are compared against [`j15`] by the verification suite rather
/// than assumed equal.
pub fn j15_alt(g: &GroupPresentation) -> SubgroupSpec {
    spec("J_{1,5}'", &["b", "a b a", "d a d a"], g)
}

/// `S_{2,3,0,0}`, index 4.
pub fn s230(g: &GroupPresentation) -> SubgroupSpec {
    spec("S_{2,3,0,0}", &["b", "c", "b^a", "b^(a c a)", "c^(a c a)"], g)
}

/// `S_{2,4,0,0}` generators as listed in the lattice table; only the image
/// modulo `B` is a complete description (the subgroup itself contains `B`).
pub fn s240(g: &GroupPresentation) -> SubgroupSpec {
    spec("S_{2,4,0,0}", &["a", "b", "b^(d a)", "a^(d a d)"], g)
}

/// The level transitive weakly maximal subgroup `W_L = ⟨a, bab, cadab⟩`.
pub fn wl(g: &GroupPresentation) -> SubgroupSpec {
    spec("W_L", &["a", "b a b", "c a d a b"], g)
}

/// The alternative generating set `⟨a, bab, cac⟩` of `W_L`.
pub fn wl_alt(g: &GroupPresentation) -> SubgroupSpec {
    spec("W_L'", &["a", "b a b", "c a c"], g)
}

/// Pervova's block-structured weakly maximal subgroup
/// `W_P = ⟨a, diag(J_{1,5}×J_{1,5}), {1}×K×{1}×K⟩`: diagonal generators
/// `dd^a = (b,b)`, `d^{ac}d^{aca} = (aba,aba)`, `(ac)^4 = (dada,dada)`,
/// plus the registry embeddings of the three `K` generators at the vertices
/// 01 and 11.
pub fn wp(g: &GroupPresentation, registry: &RistEmbeddingRegistry) -> Result<SubgroupSpec> {
    let mut gens = vec![
        parse_word("a", g)?,
        parse_word("d d^a", g)?,
        parse_word("d^(a c) d^(a c a)", g)?,
        parse_word("(a c)^4", g)?,
    ];
    for v in ["01", "11"] {
        let vertex = Vertex::parse(v, 2)?;
        for name in ["k0", "k1", "k2"] {
            let letter = registry.alphabet_index(name).ok_or_else(|| {
                crate::Error::Precondition(format!("registry lacks letter {name}"))
            })?;
            gens.push(rist_embed(&vertex, &Word::generator(letter), registry)?);
        }
    }
    Ok(SubgroupSpec::new("W_P", gens))
}

/// One row of the lattice table of subgroups containing `B`.
pub struct LatticeRow {
    pub name: &'static str,
    pub spec: SubgroupSpec,
    /// Word conjugating the row to its partner, when the subgroup is not
    /// normal in the quotient.
    pub conjugate_by: Option<&'static str>,
}

/// The table rows for the lattice of subgroups containing `B`: the full
/// group, three subgroups of index 2, five of index 4 (two conjugate
/// pairs), and `B` itself.
pub fn lattice_rows(g: &GroupPresentation) -> Vec<LatticeRow> {
    vec![
        LatticeRow { name: "G", spec: spec("G", &["a", "b", "c"], g), conjugate_by: None },
        LatticeRow { name: "J_{0,2}", spec: j02(g), conjugate_by: None },
        LatticeRow { name: "J_{0,5}", spec: j05(g), conjugate_by: None },
        LatticeRow { name: "H", spec: h_stabilizer(g), conjugate_by: None },
        LatticeRow { name: "J_{1,5}", spec: j15(g), conjugate_by: None },
        LatticeRow { name: "S_{2,3,0,0}", spec: s230(g), conjugate_by: Some("a") },
        LatticeRow { name: "S_{2,4,0,0}", spec: s240(g), conjugate_by: Some("d") },
        LatticeRow { name: "B", spec: b_subgroup(g), conjugate_by: None },
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets::grigorchuk;
    use crate::quotient::{index_at_level, quotient_group};
    use num_bigint::BigUint;

    #[test]
    fn b_matches_its_normal_closure_images() {
        let g = grigorchuk();
        let b = b_subgroup(&g);
        // Normal closure of b at the permutation level, per level.
        for n in 1..=5usize {
            let ambient: Vec<_> = g
                .generator_words()
                .iter()
                .map(|w| crate::quotient::level_permutation(w, n, &g))
                .collect();
            let mut gens =
                vec![crate::quotient::level_permutation(&parse_word("b", &g).unwrap(), n, &g)];
            loop {
                let q = crate::quotient::LevelQuotient::from_perm_generators(
                    n,
                    2,
                    gens.iter().map(|p| (None, p.clone())).collect(),
                );
                let mut added = false;
                'outer: for w in gens.clone() {
                    for c in &ambient {
                        let conj = crate::quotient::LevelPermutation::product(
                            &c.inverse(),
                            &crate::quotient::LevelPermutation::product(&w, c),
                        );
                        if !q.contains(&conj) {
                            gens.push(conj);
                            added = true;
                            break 'outer;
                        }
                    }
                }
                if !added {
                    assert_eq!(
                        q.order(),
                        quotient_group(&b.generators, n, &g).order(),
                        "level {n}"
                    );
                    break;
                }
            }
        }
    }

    #[test]
    fn table_indices() {
        let g = grigorchuk();
        let ambient = g.generator_words();
        let idx = |s: &SubgroupSpec| index_at_level(&ambient, &s.generators, 5, &g).unwrap();
        assert_eq!(idx(&b_subgroup(&g)), BigUint::from(8u32));
        assert_eq!(idx(&k_subgroup(&g)), BigUint::from(16u32));
        assert_eq!(idx(&h_stabilizer(&g)), BigUint::from(2u32));
        assert_eq!(idx(&j02(&g)), BigUint::from(2u32));
        assert_eq!(idx(&j05(&g)), BigUint::from(2u32));
        assert_eq!(idx(&j15(&g)), BigUint::from(4u32));
        assert_eq!(idx(&s230(&g)), BigUint::from(4u32));
    }

    #[test]
    fn j15_generating_sets_agree() {
        let g = grigorchuk();
        let one = j15(&g);
        let two = j15_alt(&g);
        for n in 1..=6 {
            let qa = quotient_group(&one.generators, n, &g);
            let qb = quotient_group(&two.generators, n, &g);
            assert_eq!(qa.order(), qb.order(), "level {n}");
            for (_, p) in qb.generators() {
                assert!(qa.contains(p), "level {n}");
            }
        }
    }
}
