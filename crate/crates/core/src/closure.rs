//! Forbidden-pattern membership testing for the closure of the Grigorchuk
//! group, witness verifications for the level-4 stabilizer surgery, and the
//! lattice of subgroups containing `B`.
//!
//! A depth-3 pattern is a labelling of the 15 vertices of levels 0–3 of the
//! binary tree by elements of `Sym(2)`, encoded as a 15-bit mask in
//! breadth-first, left-to-right vertex order (bit = 1 for the
//! transposition). A pattern is allowed when it occurs as the top of the
//! portrait of a group element, i.e. the table is exactly the image of the
//! group in the depth-4 truncation. An automorphism lies in the closure of
//! the group iff its portrait contains no forbidden pattern; truncated to
//! depth `n`, the test checks the depth-3 window at every vertex of depth
//! `≤ n-4`.


use crate::presentation::{section, GroupPresentation, Portrait};
use crate::quotient::{
    enumerate_subgroups_small, exhaustive_elements, level_permutation, quotient_group,
    LevelPermutation, LevelQuotient,
};
use crate::registry::GrigEmbedder;
use crate::vertex::Vertex;
use crate::word::{parse_word, Word};
use crate::wordproblem::{equal, is_trivial};
use crate::{Error, Result};
use num_bigint::BigUint;
use sha2::{Digest, Sha256};
use std::collections::HashMap;

/// The set of allowed depth-3 patterns, as sorted 15-bit masks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternTable {
    masks: Vec<u16>,
}

/// Number of labelled vertices in a depth-3 window.
const WINDOW_VERTICES: usize = 15;

/// The serialized pattern table shipped with the crate; regeneration must
/// reproduce these bytes (see `PATTERN_SHA256`).
pub const PATTERN_FILE_BYTES: &[u8] = include_bytes!("../data/grig_patterns.pat");

/// SHA-256 of the serialized pattern table.
pub const PATTERN_SHA256: &str =
    include_str!("../data/grig_patterns.sha256");

impl PatternTable {
    pub fn len(&self) -> usize {
        self.masks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masks.is_empty()
    }

    pub fn contains(&self, mask: u16) -> bool {
        self.masks.binary_search(&mask).is_ok()
    }

    pub fn masks(&self) -> &[u16] {
        &self.masks
    }

    /// Binary layout: magic `GPAT`, version byte 1, little-endian u32
    /// count, then the sorted masks as little-endian u16.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(9 + 2 * self.masks.len());
        out.extend_from_slice(b"GPAT");
        out.push(1);
        out.extend_from_slice(&(self.masks.len() as u32).to_le_bytes());
        for &m in &self.masks {
            out.extend_from_slice(&m.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<PatternTable> {
        if bytes.len() < 9 || &bytes[..4] != b"GPAT" || bytes[4] != 1 {
            return Err(Error::Precondition("bad pattern table header".into()));
        }
        let count = u32::from_le_bytes(bytes[5..9].try_into().unwrap()) as usize;
        if bytes.len() != 9 + 2 * count {
            return Err(Error::Precondition("pattern table length mismatch".into()));
        }
        let masks: Vec<u16> = (0..count)
            .map(|i| u16::from_le_bytes(bytes[9 + 2 * i..11 + 2 * i].try_into().unwrap()))
            .collect();
        if masks.windows(2).any(|p| p[0] >= p[1]) {
            return Err(Error::Precondition("pattern table is not sorted".into()));
        }
        Ok(PatternTable { masks })
    }

    pub fn sha256_hex(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.to_bytes());
        hex_string(&h.finalize())
    }
}

fn hex_string(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// The 15-bit mask of the depth-3 window of a portrait rooted at `at`. The
/// portrait must label every vertex of the window.
pub fn window_mask(p: &Portrait, at: &Vertex) -> Result<u16> {
    if at.len() + 4 > p.depth() {
        return Err(Error::Precondition(format!(
            "portrait of depth {} has no full window at {at}",
            p.depth()
        )));
    }
    let mut mask = 0u16;
    let mut bit = 0;
    for level in 0..4 {
        for w in Vertex::level(level, 2) {
            let v = at.concat(&w);
            if !p.label(&v).is_identity() {
                mask |= 1 << bit;
            }
            bit += 1;
        }
    }
    debug_assert_eq!(bit, WINDOW_VERTICES);
    Ok(mask)
}

/// The depth-3 pattern of a level-4 permutation: a tree-consistent level-4
/// image determines the labels on all 15 interior vertices.
pub fn mask_of_level4(p: &LevelPermutation) -> u16 {
    assert_eq!(p.point_count(), 16);
    let image_vertex = |v: &Vertex| -> usize {
        // Image of a vertex of length k is the length-k prefix of the image
        // of any level-4 descendant.
        let stride = 1usize << (4 - v.len());
        p.apply(v.encode(2) * stride) / stride
    };
    let mut mask = 0u16;
    let mut bit = 0;
    for level in 0..4 {
        for v in Vertex::level(level, 2) {
            let img0 = image_vertex(&v.child(0));
            let img_v = image_vertex(&v);
            // Nontrivial label: the 0-child maps to the 1-child of the image.
            if img0 != 2 * img_v {
                mask |= 1 << bit;
            }
            bit += 1;
        }
    }
    mask
}

/// Compute the allowed patterns by exhaustively closing the level-4
/// quotient and collecting each element's depth-3 mask. The element count
/// is cross-checked against the stabilizer chain order (two independent
/// oracles) and the mask map is verified injective.
pub fn allowed_patterns(g: &GroupPresentation) -> Result<PatternTable> {
    if g.degree() != 2 {
        return Err(Error::Precondition("pattern tables require degree 2".into()));
    }
    let gens: Vec<LevelPermutation> =
        g.generator_words().iter().map(|w| level_permutation(w, 4, g)).collect();
    let elements = exhaustive_elements(&gens, 4, 2, 1 << 16)?;
    let chain_order = quotient_group(&g.generator_words(), 4, g).order();
    if BigUint::from(elements.len()) != chain_order {
        return Err(Error::Certification(format!(
            "oracle disagreement: closure found {} elements, chain order {chain_order}",
            elements.len()
        )));
    }
    let mut masks: Vec<u16> = elements.iter().map(mask_of_level4).collect();
    masks.sort_unstable();
    masks.dedup();
    if masks.len() != elements.len() {
        return Err(Error::Certification(
            "level-4 elements and depth-3 patterns are not in bijection".into(),
        ));
    }
    Ok(PatternTable { masks })
}

/// Depth-bounded closure membership: true iff every depth-3 window of the
/// portrait (rooted at each vertex of depth `≤ n-4`) is in the table.
pub fn closure_member_up_to(p: &Portrait, table: &PatternTable) -> Result<bool> {
    if p.depth() < 4 {
        return Err(Error::Precondition(format!(
            "need a portrait of depth at least 4, got {}",
            p.depth()
        )));
    }
    for level in 0..=p.depth() - 4 {
        for at in Vertex::level(level, 2) {
            if !table.contains(window_mask(p, &at)?) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// One witness check of the level-4 stabilizer surgery.
#[derive(Debug, Clone)]
pub struct Stab14Witness {
    pub name: String,
    /// The depth-3 portrait window of the modified element agrees with the
    /// original's.
    pub portrait_match: bool,
    /// The modified element fixes the subtree at 1111 pointwise.
    pub fixes_tail: bool,
}

#[derive(Debug, Clone)]
pub struct Stab14Report {
    pub witnesses: Vec<Stab14Witness>,
    /// The section of c at 1111 is d (so c alone does not fix the tail).
    pub sanity_negative: bool,
    /// The section values along the spine match the expected table.
    pub section_table: bool,
}

impl Stab14Report {
    pub fn all_pass(&self) -> bool {
        self.witnesses.iter().all(|w| w.portrait_match && w.fixes_tail)
            && self.sanity_negative
            && self.section_table
    }
}

/// Verify the corrected elements `ψ(c) = c·(ac)⁴_{@1}·(ac)⁴_{@11}`,
/// `ψ(b_{@1}) = d·(ac)⁴_{@11}` and `ψ((ac)⁴) = (ac)⁴·(ac)⁴_{@1}·(ac)⁴_{@11}`:
/// each agrees with the original on the depth-3 truncation while fixing the
/// subtree at 1111 pointwise.
pub fn verify_stab14_witnesses(g: &GroupPresentation) -> Result<Stab14Report> {
    let embedder = GrigEmbedder::new(g)?;
    let ac4 = parse_word("(a c)^4", g)?;
    let r1 = embedder.embed(&Vertex::parse("1", 2)?, &ac4)?;
    let r11 = embedder.embed(&Vertex::parse("11", 2)?, &ac4)?;
    crate::registry::certify_embedding(&r1, &Vertex::parse("1", 2)?, &ac4, g)?;
    crate::registry::certify_embedding(&r11, &Vertex::parse("11", 2)?, &ac4, g)?;

    let tail = Vertex::parse("1111", 2)?;
    let cases: Vec<(&str, Word, Word)> = vec![
        ("c", parse_word("c", g)?, Word::multiply(&parse_word("c", g)?, &Word::multiply(&r1, &r11))),
        ("b@1", parse_word("d", g)?, Word::multiply(&parse_word("d", g)?, &r11)),
        ("(ac)^4", ac4.clone(), Word::multiply(&ac4, &Word::multiply(&r1, &r11))),
    ];
    let mut witnesses = Vec::new();
    for (name, original, modified) in &cases {
        let p_orig = crate::presentation::portrait_of(original, 4, g);
        let p_mod = crate::presentation::portrait_of(modified, 4, g);
        let portrait_match =
            window_mask(&p_orig, &Vertex::root())? == window_mask(&p_mod, &Vertex::root())?;
        let fixes_tail = is_trivial(&section(modified, &tail, g), g)?;
        witnesses.push(Stab14Witness { name: name.to_string(), portrait_match, fixes_tail });
    }

    let c_tail = section(&parse_word("c", g)?, &tail, g);
    let sanity_negative =
        equal(&c_tail, &parse_word("d", g)?, g)? && !is_trivial(&c_tail, g)?;
    let section_table = equal(&section(&ac4, &tail, g), &parse_word("d", g)?, g)?
        && equal(&section(&r1, &tail, g), &parse_word("c", g)?, g)?
        && equal(&section(&r11, &tail, g), &parse_word("b", g)?, g)?;

    Ok(Stab14Report { witnesses, sanity_negative, section_table })
}

// ---------------------------------------------------------------------------
// The lattice of subgroups over B
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct LatticeReport {
    /// Number of subgroups of the coset quotient.
    pub subgroup_count: usize,
    /// Sorted indices of the enumerated subgroups inside the quotient.
    pub index_multiset: Vec<u64>,
    /// The quotient has order 8, is non-abelian and has five involutions.
    pub quotient_dihedral8: bool,
    /// Table rows matched to distinct enumerated subgroups, by name.
    pub row_matches: Vec<(String, usize)>,
    /// Conjugate pairs detected among the rows (row name, partner subgroup
    /// index distinct from the row's).
    pub conjugate_pairs: Vec<(String, usize, usize)>,
    /// The index over B stabilized: same value at levels 4 and 5.
    pub index_stabilized: bool,
}

/// Realize the quotient by `B` as a degree-8 permutation group at level 4,
/// enumerate its subgroups and match the table rows and their conjugates
/// onto the enumeration. The element enumeration respects the setwise
/// brute-force budget.
pub fn subgroup_lattice_over_b_with_budget(
    g: &GroupPresentation,
    budget: u64,
) -> Result<LatticeReport> {
    let b = crate::catalog::b_subgroup(g);
    let ambient = g.generator_words();
    let b4 = quotient_group(&b.generators, 4, g);
    let g4 = quotient_group(&ambient, 4, g);
    let index4 = g4.order() / b4.order();
    let index5 = quotient_group(&ambient, 5, g).order()
        / quotient_group(&b.generators, 5, g).order();
    let index_stabilized = index4 == BigUint::from(8u32) && index4 == index5;

    // Coset transversal of B at level 4, greedily over the deterministic
    // element enumeration.
    let elements = g4.chain().elements(budget)?;
    let mut reps: Vec<LevelPermutation> = Vec::new();
    for e in &elements {
        if !reps
            .iter()
            .any(|r| b4.contains(&LevelPermutation::product(e, &r.inverse())))
        {
            reps.push(e.clone());
            if reps.len() == 8 {
                break;
            }
        }
    }
    if reps.len() != 8 {
        return Err(Error::Certification("expected 8 cosets over B at level 4".into()));
    }
    let coset_of = |p: &LevelPermutation| -> Result<usize> {
        for (j, r) in reps.iter().enumerate() {
            if b4.contains(&LevelPermutation::product(p, &r.inverse())) {
                return Ok(j);
            }
        }
        Err(Error::Certification("element escaped the coset table".into()))
    };
    // Right-multiplication action on the cosets {B·r_i}.
    let coset_perm = |w: &Word| -> Result<LevelPermutation> {
        let pw = level_permutation(w, 4, g);
        let images = reps
            .iter()
            .map(|r| coset_of(&LevelPermutation::product(r, &pw)).map(|j| j as u32))
            .collect::<Result<Vec<u32>>>()?;
        Ok(LevelPermutation::from_images(1, images))
    };

    let quotient_gens = ambient
        .iter()
        .map(|w| coset_perm(w).map(|p| (Some(w.clone()), p)))
        .collect::<Result<Vec<_>>>()?;
    let q = LevelQuotient::from_perm_generators(1, 8, quotient_gens);
    let q_elements = q.chain().elements(64)?;
    let quotient_dihedral8 = q_elements.len() == 8
        && {
            let involutions = q_elements
                .iter()
                .filter(|p| !p.is_identity() && LevelPermutation::product(p, p).is_identity())
                .count();
            involutions == 5
        }
        && q_elements.iter().any(|x| {
            q_elements.iter().any(|y| {
                LevelPermutation::product(x, y) != LevelPermutation::product(y, x)
            })
        });

    let subgroups = enumerate_subgroups_small(&q, 64)?;
    let subgroup_count = subgroups.len();
    let mut index_multiset: Vec<u64> =
        subgroups.iter().map(|s| 8 / s.len() as u64).collect();
    index_multiset.sort_unstable();

    let find_subgroup = |perms: &[LevelPermutation]| -> Result<usize> {
        let sub = LevelQuotient::from_perm_generators(
            1,
            8,
            perms.iter().map(|p| (None, p.clone())).collect(),
        );
        let elems = sub.chain().elements(64)?;
        subgroups
            .iter()
            .position(|s| s == &elems)
            .ok_or_else(|| Error::Certification("row image missing from enumeration".into()))
    };

    let mut row_matches = Vec::new();
    let mut conjugate_pairs = Vec::new();
    let mut matched: HashMap<usize, String> = HashMap::new();
    for row in crate::catalog::lattice_rows(g) {
        let perms = row
            .spec
            .generators
            .iter()
            .map(|w| coset_perm(w))
            .collect::<Result<Vec<_>>>()?;
        let idx = find_subgroup(&perms)?;
        if let Some(previous) = matched.insert(idx, row.name.to_string()) {
            return Err(Error::Certification(format!(
                "rows {previous} and {} map onto the same lattice member",
                row.name
            )));
        }
        row_matches.push((row.name.to_string(), idx));
        if let Some(by) = row.conjugate_by {
            let c = coset_perm(&parse_word(by, g)?)?;
            let conj: Vec<LevelPermutation> = perms
                .iter()
                .map(|p| {
                    LevelPermutation::product(
                        &c.inverse(),
                        &LevelPermutation::product(p, &c),
                    )
                })
                .collect();
            let cidx = find_subgroup(&conj)?;
            if cidx == idx {
                return Err(Error::Certification(format!(
                    "row {} is its own conjugate; expected a proper pair",
                    row.name
                )));
            }
            matched.insert(cidx, format!("{}^{by}", row.name));
            conjugate_pairs.push((row.name.to_string(), idx, cidx));
        }
    }

    Ok(LatticeReport {
        subgroup_count,
        index_multiset,
        quotient_dihedral8,
        row_matches,
        conjugate_pairs,
        index_stabilized,
    })
}

/// [`subgroup_lattice_over_b_with_budget`] with the default budget.
pub fn subgroup_lattice_over_b(g: &GroupPresentation) -> Result<LatticeReport> {
    subgroup_lattice_over_b_with_budget(g, crate::Budget::default().setwise)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perm::Permutation;
    use crate::presentation::portrait_of;
    use crate::presets::grigorchuk;

    #[test]
    fn table_from_quotient() {
        let g = grigorchuk();
        let table = allowed_patterns(&g).unwrap();
        assert_eq!(table.len(), 4096);
        // Identity pattern and the pattern of a are allowed.
        let pid = portrait_of(&Word::identity(), 4, &g);
        assert!(table.contains(window_mask(&pid, &Vertex::root()).unwrap()));
        let pa = portrait_of(&parse_word("a", &g).unwrap(), 4, &g);
        let mask_a = window_mask(&pa, &Vertex::root()).unwrap();
        assert_eq!(mask_a, 1); // only the root label is nontrivial
        assert!(table.contains(mask_a));
    }

    #[test]
    fn serialized_table_matches_shipped_bytes() {
        let g = grigorchuk();
        let table = allowed_patterns(&g).unwrap();
        assert_eq!(table.to_bytes(), PATTERN_FILE_BYTES, "regeneration drifted");
        assert_eq!(table.sha256_hex(), PATTERN_SHA256.trim());
        let reloaded = PatternTable::from_bytes(PATTERN_FILE_BYTES).unwrap();
        assert_eq!(&reloaded, &table);
    }

    #[test]
    fn pattern_table_closed_under_ops() {
        // The table is the image of the group in the depth-4 truncation, so
        // it is closed under composition and inverse there.
        let g = grigorchuk();
        let gens: Vec<LevelPermutation> = g
            .generator_words()
            .iter()
            .map(|w| level_permutation(w, 4, &g))
            .collect();
        let elements = exhaustive_elements(&gens, 4, 2, 1 << 13).unwrap();
        let table = allowed_patterns(&g).unwrap();
        for (i, x) in elements.iter().enumerate().step_by(97) {
            assert!(table.contains(mask_of_level4(&x.inverse())));
            for y in elements.iter().skip(i % 31).step_by(211) {
                assert!(table.contains(mask_of_level4(&LevelPermutation::product(x, y))));
            }
        }
    }

    #[test]
    fn membership_test() {
        let g = grigorchuk();
        let table = allowed_patterns(&g).unwrap();
        for text in ["a b a c", "d a c a b", "(a b)^3 c"] {
            let p = portrait_of(&parse_word(text, &g).unwrap(), 6, &g);
            assert!(closure_member_up_to(&p, &table).unwrap(), "{text}");
        }
        // All-trivial portrait passes.
        let pid = portrait_of(&Word::identity(), 5, &g);
        assert!(closure_member_up_to(&pid, &table).unwrap());
        // A forbidden top window fails.
        let bad_mask = (0..1u16 << 15).find(|m| !table.contains(*m)).unwrap();
        let mut levels = Vec::new();
        let mut bit = 0;
        for level in 0..4 {
            let labels: Vec<Permutation> = (0..1usize << level)
                .map(|_| {
                    let p = if bad_mask >> bit & 1 == 1 {
                        Permutation::transposition(2, 0, 1)
                    } else {
                        Permutation::identity(2)
                    };
                    bit += 1;
                    p
                })
                .collect();
            levels.push(labels);
        }
        let bad = Portrait::from_levels(2, levels).unwrap();
        assert!(!closure_member_up_to(&bad, &table).unwrap());
        // Depth below 4 is rejected.
        let shallow = portrait_of(&Word::identity(), 3, &g);
        assert!(closure_member_up_to(&shallow, &table).is_err());
    }

    #[test]
    fn stab14() {
        let g = grigorchuk();
        let report = verify_stab14_witnesses(&g).unwrap();
        assert!(report.all_pass(), "{report:?}");
        assert_eq!(report.witnesses.len(), 3);
    }

    #[test]
    fn lattice() {
        let g = grigorchuk();
        let report = subgroup_lattice_over_b(&g).unwrap();
        assert_eq!(report.subgroup_count, 10);
        assert_eq!(report.index_multiset, vec![1, 2, 2, 2, 4, 4, 4, 4, 4, 8]);
        assert!(report.quotient_dihedral8);
        assert!(report.index_stabilized);
        assert_eq!(report.row_matches.len(), 8);
        assert_eq!(report.conjugate_pairs.len(), 2);
        // The 8 rows plus the 2 conjugate partners cover all 10 members.
        let mut seen: Vec<usize> = report.row_matches.iter().map(|(_, i)| *i).collect();
        seen.extend(report.conjugate_pairs.iter().map(|(_, _, j)| *j));
        seen.sort_unstable();
        seen.dedup();
        assert_eq!(seen.len(), 10);
    }
}
