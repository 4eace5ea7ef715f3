//! Subgroup specifications and the Schreier/section calculus: stabilizer
//! generators, section subgroups, diagonal and block constructors,
//! non-rigidity-tree estimation, classification, tree equivalence of
//! truncations, and quotient-level lifts.

use crate::presentation::{act_vertex, root_permutation, section, GroupPresentation};
use crate::quotient::{
    index_at_level, level_permutation, orbits_on_level, quotient_group,
    rigid_stabilizer_at_level, LevelPermutation, LevelQuotient,
};
use crate::registry::RistEmbeddingRegistry;
use crate::vertex::Vertex;
use crate::word::{parse_word, Word};
use crate::wordproblem::equal;
use crate::{Error, Result};
use num_bigint::BigUint;
use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt::Write as _;

/// A named finite set of generating words inside a presentation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubgroupSpec {
    pub name: String,
    pub generators: Vec<Word>,
}

impl SubgroupSpec {
    pub fn new(name: impl Into<String>, generators: Vec<Word>) -> Self {
        SubgroupSpec { name: name.into(), generators }
    }

    /// Serialize as a spec file: a `subgroup <name>` header followed by one
    /// generator word per line.
    pub fn to_spec_file(&self, g: &GroupPresentation) -> String {
        let mut out = format!("subgroup {}\n", self.name);
        for w in &self.generators {
            let _ = writeln!(out, "{}", w.display(g));
        }
        out
    }

    /// Parse a spec file.
    pub fn parse_spec_file(text: &str, g: &GroupPresentation) -> Result<SubgroupSpec> {
        let mut name = None;
        let mut generators = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix("subgroup") {
                if rest.starts_with(char::is_whitespace) || rest.is_empty() {
                    name = Some(rest.trim().to_string());
                    continue;
                }
            }
            if name.is_none() {
                return Err(Error::Parse {
                    line: i + 1,
                    col: 1,
                    msg: "expected `subgroup <name>` header".into(),
                });
            }
            generators.push(parse_word(line, g)?);
        }
        let name = name.ok_or(Error::Parse {
            line: 1,
            col: 1,
            msg: "missing `subgroup <name>` header".into(),
        })?;
        if generators.is_empty() {
            generators.push(Word::identity());
        }
        Ok(SubgroupSpec { name, generators })
    }
}

/// Generators together with their inverses, deduplicated, in a
/// deterministic order.
fn symmetrized(gens: &[Word]) -> Vec<Word> {
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for w in gens {
        for c in [w.clone(), w.inverse()] {
            if !c.is_identity_word() && seen.insert(c.clone()) {
                out.push(c);
            }
        }
    }
    out
}

/// Schreier generators of the stabilizer of `v` in `⟨H⟩`, as words: a
/// deterministic orbit BFS yields transversal words, and each (transversal,
/// generator) pair contributes `t_{s(u)}⁻¹ · s · t_u`.
pub fn stabilizer_schreier_generators(
    h: &SubgroupSpec,
    v: &Vertex,
    g: &GroupPresentation,
) -> SubgroupSpec {
    if v.is_root() {
        return SubgroupSpec::new(format!("{}_stab_root", h.name), h.generators.clone());
    }
    let gens = symmetrized(&h.generators);
    let mut transversal: BTreeMap<Vertex, Word> = BTreeMap::new();
    let mut orbit: Vec<Vertex> = vec![v.clone()];
    transversal.insert(v.clone(), Word::identity());
    let mut head = 0;
    while head < orbit.len() {
        let u = orbit[head].clone();
        head += 1;
        let tu = transversal[&u].clone();
        for s in &gens {
            let su = act_vertex(s, &u, g);
            if !transversal.contains_key(&su) {
                transversal.insert(su.clone(), Word::multiply(s, &tu));
                orbit.push(su);
            }
        }
    }
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for u in &orbit {
        let tu = &transversal[u];
        for s in &gens {
            let su = act_vertex(s, u, g);
            let schreier =
                Word::multiply(&transversal[&su].inverse(), &Word::multiply(s, tu));
            if !schreier.is_identity_word() && seen.insert(schreier.clone()) {
                out.push(schreier);
            }
        }
    }
    if out.is_empty() {
        out.push(Word::identity());
    }
    SubgroupSpec::new(format!("{}_stab_{}", h.name, v), out)
}

/// Sections at `v` of the Schreier generators of `Stab_H(v)`.
pub fn section_subgroup(h: &SubgroupSpec, v: &Vertex, g: &GroupPresentation) -> SubgroupSpec {
    let stab = stabilizer_schreier_generators(h, v, g);
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for w in &stab.generators {
        let s = section(w, v, g);
        if !s.is_identity_word() && seen.insert(s.clone()) {
            out.push(s);
        }
    }
    if out.is_empty() {
        out.push(Word::identity());
    }
    SubgroupSpec::new(format!("{}_section_{}", h.name, v), out)
}

/// BFS over products of the generators, returning the first word (by
/// breadth, then discovery order) whose root permutation matches and whose
/// sections at the first level are exactly equal to the targets. Not
/// finding a word within the length bound is an explicit failure, never a
/// nonexistence proof.
pub fn find_word_by_sections(
    targets: &[Word],
    root: &crate::perm::Permutation,
    gens: &SubgroupSpec,
    max_len: usize,
    g: &GroupPresentation,
) -> Result<Word> {
    if max_len < 1 {
        return Err(Error::Precondition("max_len must be at least 1".into()));
    }
    if targets.len() != g.degree() {
        return Err(Error::Precondition(format!(
            "expected {} section targets",
            g.degree()
        )));
    }
    let sym = symmetrized(&gens.generators);
    // Dedupe states by their action at a fixed comparison level; candidates
    // are certified exactly before being returned.
    let cmp_level = 6;
    let matches = |w: &Word| -> Result<bool> {
        if root_permutation(w, g) != *root {
            return Ok(false);
        }
        for (x, t) in targets.iter().enumerate() {
            let v = Vertex::new(vec![x as u8], g.degree()).unwrap();
            if !equal(&section(w, &v, g), t, g)? {
                return Ok(false);
            }
        }
        Ok(true)
    };
    let id = Word::identity();
    if matches(&id)? {
        return Ok(id);
    }
    let mut seen: HashSet<LevelPermutation> = HashSet::new();
    seen.insert(level_permutation(&Word::identity(), cmp_level, g));
    let mut frontier: Vec<Word> = vec![Word::identity()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for w in &frontier {
            for s in &sym {
                let cand = Word::multiply(w, s);
                let key = level_permutation(&cand, cmp_level, g);
                if seen.insert(key) {
                    if matches(&cand)? {
                        return Ok(cand);
                    }
                    next.push(cand);
                }
            }
        }
        frontier = next;
        if frontier.is_empty() {
            break;
        }
    }
    Err(Error::SearchExhausted(format!(
        "no word of length ≤ {max_len} has the requested sections"
    )))
}

/// A diagonal subgroup: an ordered orthogonal support `U`, abstract
/// generators `Lgens` (words over the registry alphabet), and per-vertex
/// conjugator words `psi` in the ambient group. The generators are
/// `Π_j rist_embed(u_j, l)^{lift(ψ_j at u_j)}`, one per `l`, so each acts on
/// the subtree at `u_j` as `ψ_j' l ψ_j` and trivially off the support.
pub fn diagonal_subgroup(
    name: &str,
    support: &[Vertex],
    l_gens: &[Word],
    psi: &[Word],
    registry: &RistEmbeddingRegistry,
    lift: &dyn Fn(&Vertex, &Word) -> Word,
    g: &GroupPresentation,
) -> Result<SubgroupSpec> {
    for (i, u) in support.iter().enumerate() {
        for v in &support[i + 1..] {
            if !u.orthogonal(v) {
                return Err(Error::Precondition(format!(
                    "support vertices {u} and {v} are not orthogonal"
                )));
            }
        }
    }
    if psi.len() != support.len() {
        return Err(Error::Precondition("one conjugator per support vertex".into()));
    }
    let mut generators = Vec::new();
    for l in l_gens {
        let mut word = Word::identity();
        for (u, conj) in support.iter().zip(psi) {
            let mut factor = crate::registry::rist_embed(u, l, registry)?;
            if !conj.is_identity_word() {
                factor = factor.conjugate(&lift(u, conj));
            }
            word = Word::multiply(&word, &factor);
        }
        generators.push(word);
    }
    let _ = g;
    Ok(SubgroupSpec::new(name, generators))
}

/// A block subgroup: the union of the generator sets of diagonal subgroups
/// with pairwise orthogonal supports.
pub fn block_subgroup(
    name: &str,
    diagonals: &[(SubgroupSpec, Vec<Vertex>)],
) -> Result<SubgroupSpec> {
    for (i, (_, s1)) in diagonals.iter().enumerate() {
        for (_, s2) in &diagonals[i + 1..] {
            for u in s1 {
                for v in s2 {
                    if !u.orthogonal(v) {
                        return Err(Error::Precondition(format!(
                            "supports overlap at {u} / {v}"
                        )));
                    }
                }
            }
        }
    }
    let generators = diagonals.iter().flat_map(|(d, _)| d.generators.clone()).collect();
    Ok(SubgroupSpec::new(name, generators))
}

// ---------------------------------------------------------------------------
// Non-rigidity tree estimation
// ---------------------------------------------------------------------------

/// Evidence status of one vertex in a non-rigidity-tree report. The tool
/// never claims infinite index as a fact from finite data; the report
/// carries the raw index sequences.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NrStatus {
    /// The registry generators at this vertex all pass level membership,
    /// and each was matched exactly against a bounded product of the
    /// subgroup's generators — the subgroup contains the standard rigid
    /// piece here, so the vertex is outside the non-rigidity tree.
    RistCertified,
    /// The rigid-stabilizer index sequence grows strictly across the
    /// configured window.
    InfiniteIndexEvidence,
    Unknown,
}

#[derive(Debug, Clone)]
pub struct NrVertexReport {
    pub vertex: Vertex,
    pub status: NrStatus,
    /// `[Rist_G(v) : Rist_H(v)]` at successive levels.
    pub index_sequence: Vec<BigUint>,
    /// Whether each registry generator was matched exactly by a bounded
    /// product of the subgroup's generators.
    pub exact_witness: bool,
}

#[derive(Debug, Clone)]
pub struct NrReport {
    pub depth: usize,
    pub max_level: usize,
    pub growth_window: usize,
    pub per_vertex: Vec<NrVertexReport>,
}

impl NrReport {
    pub fn status(&self, v: &Vertex) -> Option<NrStatus> {
        self.per_vertex.iter().find(|r| &r.vertex == v).map(|r| r.status)
    }

    /// The estimated non-rigidity subtree: vertices not rist-certified.
    pub fn nr_vertices(&self) -> Vec<Vertex> {
        self.per_vertex
            .iter()
            .filter(|r| r.status != NrStatus::RistCertified)
            .map(|r| r.vertex.clone())
            .collect()
    }
}

fn strictly_increasing_tail(seq: &[BigUint], window: usize) -> bool {
    if seq.len() < window + 1 {
        return false;
    }
    let tail = &seq[seq.len() - window - 1..];
    tail.windows(2).all(|p| p[0] < p[1])
}

/// Exact-membership side check: `w` equals some product of at most
/// `max_factors` subgroup generators (or their inverses). Candidates are
/// filtered by their level-6 permutation before the exact comparison.
fn exact_member_bounded(
    w: &Word,
    h: &SubgroupSpec,
    max_factors: usize,
    g: &GroupPresentation,
) -> Result<bool> {
    let filter_level = 6;
    let sym = symmetrized(&h.generators);
    let sym_perms: Vec<LevelPermutation> =
        sym.iter().map(|s| level_permutation(s, filter_level, g)).collect();
    let target = level_permutation(w, filter_level, g);
    let mut seen: HashSet<LevelPermutation> = HashSet::new();
    let mut frontier: Vec<(Vec<usize>, LevelPermutation)> =
        vec![(Vec::new(), LevelPermutation::identity(filter_level, g.degree()))];
    seen.insert(frontier[0].1.clone());
    for _ in 0..max_factors {
        let mut next = Vec::new();
        for (path, perm) in &frontier {
            for (i, sp) in sym_perms.iter().enumerate() {
                let cand = LevelPermutation::product(perm, sp);
                if !seen.insert(cand.clone()) {
                    continue;
                }
                let mut cand_path = path.clone();
                cand_path.push(i);
                if cand == target {
                    let word = cand_path
                        .iter()
                        .fold(Word::identity(), |acc, &j| Word::multiply(&acc, &sym[j]));
                    if equal(&word, w, g)? {
                        return Ok(true);
                    }
                }
                next.push((cand_path, cand));
            }
        }
        frontier = next;
        if seen.len() > 200_000 {
            break;
        }
    }
    Ok(false)
}

/// Estimate the non-rigidity tree of `⟨H⟩` down to `depth`.
///
/// A vertex is rist-certified when every registry generator at it passes
/// level membership in the subgroup's level-`max_level` image and is matched
/// exactly by a bounded product of the subgroup generators; certification
/// propagates to descendants (the complement of the non-rigidity tree is
/// closed downward). Index growth across `growth_window` consecutive levels
/// is reported as infinite-index evidence, never as proof.
pub fn nr_tree_estimate(
    h: &SubgroupSpec,
    registry: &RistEmbeddingRegistry,
    depth: usize,
    max_level: usize,
    growth_window: usize,
    g: &GroupPresentation,
) -> Result<NrReport> {
    if depth > max_level {
        return Err(Error::Precondition("depth must be at most max_level".into()));
    }
    let h_top = quotient_group(&h.generators, max_level, g);
    let ambient = g.generator_words();
    let mut quot_g: HashMap<usize, LevelQuotient> = HashMap::new();
    let mut quot_h: HashMap<usize, LevelQuotient> = HashMap::new();
    for n in 1..=max_level {
        quot_g.insert(n, quotient_group(&ambient, n, g));
        quot_h.insert(n, quotient_group(&h.generators, n, g));
    }

    let mut statuses: HashMap<Vertex, (NrStatus, Vec<BigUint>, bool)> = HashMap::new();
    for level in 0..=depth {
        for v in Vertex::level(level, g.degree()) {
            // Index sequence [Rist_G(v)_n : Rist_H(v)_n] for n above |v|.
            let mut seq = Vec::new();
            for n in (level.max(1))..=max_level {
                let rg = rigid_stabilizer_at_level(&quot_g[&n], &v)?.order();
                let rh = rigid_stabilizer_at_level(&quot_h[&n], &v)?.order();
                seq.push(rg / rh);
            }
            // Rist certification via the registry at this vertex.
            let mut covered = false;
            let mut level_member = false;
            let mut exact = false;
            let names: Vec<&String> = registry.alphabet().iter().collect();
            let entries: Vec<_> = names
                .iter()
                .filter_map(|n| registry.entry(&v, n))
                .collect();
            if !entries.is_empty() {
                covered = true;
                level_member = entries
                    .iter()
                    .all(|e| h_top.contains(&level_permutation(&e.word, max_level, g)));
                if level_member {
                    exact = true;
                    for e in &entries {
                        if !exact_member_bounded(&e.word, h, 4, g)? {
                            exact = false;
                            break;
                        }
                    }
                }
            }
            let parent_certified = v
                .parent()
                .map(|p| statuses.get(&p).map(|s| s.0 == NrStatus::RistCertified).unwrap_or(false))
                .unwrap_or(false);
            let status = if (covered && level_member && exact) || parent_certified {
                NrStatus::RistCertified
            } else if strictly_increasing_tail(&seq, growth_window) {
                NrStatus::InfiniteIndexEvidence
            } else {
                NrStatus::Unknown
            };
            statuses.insert(v.clone(), (status, seq, exact || parent_certified));
        }
    }

    let mut per_vertex = Vec::new();
    for level in 0..=depth {
        for v in Vertex::level(level, g.degree()) {
            let (status, seq, exact) = statuses[&v].clone();
            per_vertex.push(NrVertexReport {
                vertex: v,
                status,
                index_sequence: seq,
                exact_witness: exact,
            });
        }
    }
    Ok(NrReport { depth, max_level, growth_window, per_vertex })
}

// ---------------------------------------------------------------------------
// Classification
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    GeneralizedParabolicSide,
    BlockStructureSide,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::GeneralizedParabolicSide => "generalized-parabolic-side",
            Verdict::BlockStructureSide => "block-structure-side",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone)]
pub struct SectionIndexEvidence {
    pub vertex: Vertex,
    /// Section-subgroup index against the ambient section group at
    /// successive levels of the subtree.
    pub indices: Vec<BigUint>,
    /// Stabilized (finite-evidence) rather than growing.
    pub finite_evidence: bool,
}

#[derive(Debug, Clone)]
pub struct ClassificationReport {
    pub name: String,
    /// Orbit counts of the level action for levels `1..=max_level`.
    pub orbit_counts: Vec<usize>,
    /// `[G_n : H_n]` for levels `1..=max_level`.
    pub index_sequence: Vec<BigUint>,
    /// Finite-index evidence: the index sequence has stabilized.
    pub finite_index_evidence: bool,
    /// First full level at which every section index shows finite
    /// evidence, with the per-vertex data.
    pub transversal_level: Option<usize>,
    pub section_evidence: Vec<SectionIndexEvidence>,
    /// A vertex whose rigid stabilizer in the subgroup image is trivial at
    /// every tested level above it.
    pub trivial_rist_vertex: Option<Vertex>,
    /// Whether the subgroup image acts transitively on the non-certified
    /// vertices of each tested level (minimality on the estimated
    /// non-rigidity boundary; reported, never asserted as a theorem).
    pub nr_action_transitive: Vec<bool>,
    /// Consistency flag: whenever the action on the estimated non-rigidity
    /// vertices of a level is intransitive, every section at that level
    /// shows finite-index evidence.
    pub projection_consistency: bool,
    pub verdict: Verdict,
}

fn stabilized_tail<T: PartialEq>(seq: &[T], window: usize) -> bool {
    if seq.len() < window {
        return false;
    }
    let tail = &seq[seq.len() - window..];
    tail.windows(2).all(|p| p[0] == p[1])
}

/// Classify a subgroup per the two-sided dichotomy: orbit-count growth
/// against bounded orbit counts with finite section indices. Evidence only;
/// the raw sequences ride along in the report.
pub fn classify(
    h: &SubgroupSpec,
    max_level: usize,
    registry: &RistEmbeddingRegistry,
    g: &GroupPresentation,
) -> Result<ClassificationReport> {
    let window = 3usize;
    let ambient = g.generator_words();
    let orbit_counts: Vec<usize> =
        (1..=max_level).map(|n| orbits_on_level(&h.generators, n, g).len()).collect();
    let index_sequence: Vec<BigUint> = (1..=max_level)
        .map(|n| index_at_level(&ambient, &h.generators, n, g))
        .collect::<Result<_>>()?;
    let finite_index_evidence = stabilized_tail(&index_sequence, window + 1);

    // Section-index evidence at the first full level where all sections
    // stabilize.
    let section_levels = 3usize.min(max_level.saturating_sub(1));
    let mut transversal_level = None;
    let mut section_evidence = Vec::new();
    for n in 1..=section_levels {
        let mut all_finite = true;
        let mut evidence_here = Vec::new();
        for v in Vertex::level(n, g.degree()) {
            let sect = section_subgroup(h, &v, g);
            let ambient_sect = section_subgroup(
                &SubgroupSpec::new("ambient", ambient.clone()),
                &v,
                g,
            );
            let depths = (max_level - n).min(5);
            let indices: Vec<BigUint> = (1..=depths)
                .map(|m| index_at_level(&ambient_sect.generators, &sect.generators, m, g))
                .collect::<Result<_>>()?;
            let finite = stabilized_tail(&indices, window.min(depths));
            if !finite {
                all_finite = false;
            }
            evidence_here.push(SectionIndexEvidence { vertex: v, indices, finite_evidence: finite });
        }
        if all_finite {
            transversal_level = Some(n);
            section_evidence = evidence_here;
            break;
        }
        if n == section_levels {
            section_evidence = evidence_here;
        }
    }

    // Trivial-rist evidence: a vertex of small level whose rigid stabilizer
    // in the image is trivial at every tested level.
    let mut trivial_rist_vertex = None;
    'search: for level in 1..=2usize.min(max_level) {
        for v in Vertex::level(level, g.degree()) {
            let trivial_at_all = (level + 1..=max_level).all(|n| {
                let q = quotient_group(&h.generators, n, g);
                rigid_stabilizer_at_level(&q, &v)
                    .map(|r| r.order() == BigUint::from(1u32))
                    .unwrap_or(false)
            });
            if trivial_at_all {
                trivial_rist_vertex = Some(v);
                break 'search;
            }
        }
    }

    // Action on the estimated non-rigidity vertices per level.
    let nr = nr_tree_estimate(h, registry, 2.min(max_level), max_level.min(6), window, g)?;
    let nr_set: HashSet<Vertex> = nr.nr_vertices().into_iter().collect();
    let mut nr_action_transitive = Vec::new();
    let mut projection_consistency = true;
    for n in 1..=2usize.min(max_level) {
        let in_nr: Vec<usize> = Vertex::level(n, g.degree())
            .into_iter()
            .filter(|v| nr_set.contains(v))
            .map(|v| v.encode(g.degree()))
            .collect();
        if in_nr.is_empty() {
            nr_action_transitive.push(true);
            continue;
        }
        let orbits = orbits_on_level(&h.generators, n, g);
        let transitive = orbits.iter().any(|o| in_nr.iter().all(|p| o.contains(p)));
        nr_action_transitive.push(transitive);
        if !transitive {
            // Intransitive action on the estimated tree forces finite
            // section indices at this level (consistency assertion).
            for v in Vertex::level(n, g.degree()) {
                let sect = section_subgroup(h, &v, g);
                let ambient_sect =
                    section_subgroup(&SubgroupSpec::new("ambient", ambient.clone()), &v, g);
                let depths = (max_level - n).min(4).max(1);
                let indices: Vec<BigUint> = (1..=depths)
                    .map(|m| index_at_level(&ambient_sect.generators, &sect.generators, m, g))
                    .collect::<Result<_>>()?;
                if !stabilized_tail(&indices, window.min(depths)) {
                    projection_consistency = false;
                }
            }
        }
    }

    let orbits_bounded = stabilized_tail(&orbit_counts, window + 1);
    let orbits_growing = {
        let tail = &orbit_counts[orbit_counts.len().saturating_sub(window + 1)..];
        tail.len() > window && tail.windows(2).all(|p| p[0] < p[1])
    };
    let verdict = if finite_index_evidence {
        Verdict::Inconclusive
    } else if orbits_bounded && transversal_level.is_some() {
        Verdict::BlockStructureSide
    } else if orbits_growing {
        Verdict::GeneralizedParabolicSide
    } else {
        Verdict::Inconclusive
    };

    Ok(ClassificationReport {
        name: h.name.clone(),
        orbit_counts,
        index_sequence,
        finite_index_evidence,
        transversal_level,
        section_evidence,
        trivial_rist_vertex,
        nr_action_transitive,
        projection_consistency,
        verdict,
    })
}

// ---------------------------------------------------------------------------
// Tree equivalence of truncations
// ---------------------------------------------------------------------------

/// A finite rooted subtree of the d-regular tree: a prefix-closed vertex
/// set, truncated at a fixed depth.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteSubtree {
    pub depth: usize,
    pub vertices: BTreeSet<Vertex>,
}

impl FiniteSubtree {
    /// The subtree spanned by the given vertices and all their descendants
    /// down to `depth` (plus all ancestors).
    pub fn spanned_by(seeds: &[Vertex], depth: usize, degree: usize) -> FiniteSubtree {
        let mut vertices = BTreeSet::new();
        vertices.insert(Vertex::root());
        let mut frontier = Vec::new();
        for s in seeds {
            if s.len() > depth {
                continue;
            }
            let mut p = s.clone();
            loop {
                vertices.insert(p.clone());
                match p.parent() {
                    Some(q) => p = q,
                    None => break,
                }
            }
            frontier.push(s.clone());
        }
        while let Some(v) = frontier.pop() {
            if v.len() >= depth {
                continue;
            }
            for x in 0..degree as u8 {
                let c = v.child(x);
                if vertices.insert(c.clone()) {
                    frontier.push(c.clone());
                }
                frontier.push(c);
            }
        }
        FiniteSubtree { depth, vertices }
    }

    fn canonical_code(&self, v: &Vertex, degree: usize) -> String {
        let mut children: Vec<String> = (0..degree as u8)
            .filter_map(|x| {
                let c = v.child(x);
                self.vertices.contains(&c).then(|| self.canonical_code(&c, degree))
            })
            .collect();
        children.sort();
        format!("({})", children.join(""))
    }
}

/// Equality of canonical rooted-tree codes (children multisets sorted
/// recursively) on equal-depth truncations: both subtrees sit inside the
/// same regular tree, so code equality is exactly the existence of an
/// ambient tree automorphism carrying one onto the other.
pub fn tree_equivalent_truncation(
    s1: &FiniteSubtree,
    s2: &FiniteSubtree,
    degree: usize,
) -> Result<bool> {
    if s1.depth != s2.depth {
        return Err(Error::Precondition(format!(
            "truncation depths differ: {} vs {}",
            s1.depth, s2.depth
        )));
    }
    Ok(s1.canonical_code(&Vertex::root(), degree) == s2.canonical_code(&Vertex::root(), degree))
}

// ---------------------------------------------------------------------------
// Lifting at the quotient level
// ---------------------------------------------------------------------------

/// The subgroup of the ambient level-n quotient consisting of elements that
/// stabilize `v` and whose section action on the subtree at `v`, truncated
/// to level `m`, lies in `h_quot`. Brute-force enumeration guarded by the
/// budget.
pub fn lift_at_level(
    h_quot: &LevelQuotient,
    v: &Vertex,
    n: usize,
    g: &GroupPresentation,
    budget: u64,
) -> Result<LevelQuotient> {
    let m = h_quot.level();
    if v.len() + m > n {
        return Err(Error::Precondition(format!(
            "need |v| + m ≤ n, got {} + {m} > {n}",
            v.len()
        )));
    }
    let ambient = quotient_group(&g.generator_words(), n, g);
    let elements = ambient.chain().elements(budget)?;
    let d = g.degree();
    let block = d.pow((n - v.len()) as u32);
    let lo = v.encode(d) * block;
    let section_stride = d.pow((n - v.len() - m) as u32);
    let mut kept = Vec::new();
    for p in elements {
        // Stabilizes v: the block of level-n points below v maps to itself.
        if p.apply(lo) < lo || p.apply(lo) >= lo + block {
            continue;
        }
        // Section permutation at v, truncated to level m of the subtree.
        let images: Vec<u32> = (0..d.pow(m as u32))
            .map(|u| ((p.apply(lo + u as usize * section_stride) - lo) / section_stride) as u32)
            .collect();
        let sect = LevelPermutation::from_images(m, images);
        if h_quot.contains(&sect) {
            kept.push(p);
        }
    }
    Ok(LevelQuotient::from_perm_generators(
        n,
        d,
        kept.into_iter().map(|p| (None, p)).collect(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets::grigorchuk;
    use crate::registry::grig_registry;

    fn w(text: &str, g: &GroupPresentation) -> Word {
        parse_word(text, g).unwrap()
    }

    fn full_group(g: &GroupPresentation) -> SubgroupSpec {
        SubgroupSpec::new("G", g.generator_words())
    }

    #[test]
    fn schreier_at_first_level() {
        let g = grigorchuk();
        let v1 = Vertex::parse("1", 2).unwrap();
        let stab = stabilizer_schreier_generators(&full_group(&g), &v1, &g);
        // The stabilizer of level one is ⟨b, c, d, aba, aca, ada⟩: same
        // level images up to level 6.
        let known = vec![
            w("b", &g),
            w("c", &g),
            w("d", &g),
            w("a b a", &g),
            w("a c a", &g),
            w("a d a", &g),
        ];
        for n in 1..=6 {
            let qa = quotient_group(&stab.generators, n, &g);
            let qb = quotient_group(&known, n, &g);
            assert_eq!(qa.order(), qb.order(), "level {n}");
            for (_, p) in qb.generators() {
                assert!(qa.contains(p));
            }
        }
    }

    #[test]
    fn schreier_trivial_cases() {
        let g = grigorchuk();
        let root = Vertex::root();
        let hg = full_group(&g);
        assert_eq!(stabilizer_schreier_generators(&hg, &root, &g).generators, hg.generators);
        // ⟨b⟩ already fixes 0.
        let hb = SubgroupSpec::new("b", vec![w("b", &g)]);
        let stab = stabilizer_schreier_generators(&hb, &Vertex::parse("0", 2).unwrap(), &g);
        let q = quotient_group(&stab.generators, 4, &g);
        assert_eq!(q.order(), quotient_group(&hb.generators, 4, &g).order());
    }

    #[test]
    fn section_subgroup_self_replicating() {
        let g = grigorchuk();
        // π_0(Stab_G(level 1)) generates the whole group's images at
        // levels ≤ 6.
        let sect = section_subgroup(&full_group(&g), &Vertex::parse("0", 2).unwrap(), &g);
        for n in 1..=6 {
            assert_eq!(
                quotient_group(&sect.generators, n, &g).order(),
                quotient_group(&g.generator_words(), n, &g).order(),
                "level {n}"
            );
        }
        // Sections of the trivial subgroup are trivial.
        let trivial = SubgroupSpec::new("e", vec![Word::identity()]);
        let s = section_subgroup(&trivial, &Vertex::parse("0", 2).unwrap(), &g);
        assert!(s.generators.iter().all(|x| x.is_identity_word()));
    }

    #[test]
    fn word_search_finds_known_identities() {
        let g = grigorchuk();
        let id = crate::perm::Permutation::identity(2);
        let gens = full_group(&g);
        // (1, b) → d.
        let found = find_word_by_sections(
            &[Word::identity(), w("b", &g)],
            &id,
            &gens,
            3,
            &g,
        )
        .unwrap();
        assert!(equal(&found, &w("d", &g), &g).unwrap());
        // (a, c) → b.
        let found =
            find_word_by_sections(&[w("a", &g), w("c", &g)], &id, &gens, 3, &g).unwrap();
        assert!(equal(&found, &w("b", &g), &g).unwrap());
        // (ca, ac) with trivial root: reachable within length 4 (abab).
        let found =
            find_word_by_sections(&[w("c a", &g), w("a c", &g)], &id, &gens, 4, &g).unwrap();
        assert!(equal(&found, &w("a b a b", &g), &g).unwrap());
        // Explicit failure when out of reach.
        assert!(find_word_by_sections(&[w("b", &g), w("b", &g)], &id, &gens, 1, &g).is_err());
    }

    #[test]
    fn spec_file_round_trip() {
        let g = grigorchuk();
        let spec = SubgroupSpec::new("wl", vec![w("a", &g), w("b a b", &g), w("c a d a b", &g)]);
        let text = spec.to_spec_file(&g);
        let parsed = SubgroupSpec::parse_spec_file(&text, &g).unwrap();
        assert_eq!(spec, parsed);
        assert!(SubgroupSpec::parse_spec_file("b\n", &g).is_err());
    }

    #[test]
    fn subtree_codes() {
        // Two single rays are equivalent; a ray is not a full tree.
        let ray0 = FiniteSubtree::spanned_by(&[Vertex::parse("000", 2).unwrap()], 3, 2);
        let ray1 = FiniteSubtree::spanned_by(&[Vertex::parse("111", 2).unwrap()], 3, 2);
        let full = FiniteSubtree::spanned_by(&[Vertex::root()], 3, 2);
        assert!(tree_equivalent_truncation(&ray0, &ray1, 2).unwrap());
        assert!(!tree_equivalent_truncation(&ray0, &full, 2).unwrap());
        let shallow = FiniteSubtree::spanned_by(&[Vertex::root()], 2, 2);
        assert!(tree_equivalent_truncation(&shallow, &full, 2).is_err());
        // Mirror images are equivalent.
        let left = FiniteSubtree::spanned_by(
            &[Vertex::parse("00", 2).unwrap(), Vertex::parse("10", 2).unwrap()],
            4,
            2,
        );
        let right = FiniteSubtree::spanned_by(
            &[Vertex::parse("01", 2).unwrap(), Vertex::parse("11", 2).unwrap()],
            4,
            2,
        );
        assert!(tree_equivalent_truncation(&left, &right, 2).unwrap());
    }

    #[test]
    fn lift_at_level_examples() {
        let g = grigorchuk();
        let v = Vertex::parse("0", 2).unwrap();
        // Full section group at level 2 lifts to the whole stabilizer of v.
        let full2 = quotient_group(&g.generator_words(), 2, &g);
        let lifted = lift_at_level(&full2, &v, 3, &g, 1 << 12).unwrap();
        let ambient3 = quotient_group(&g.generator_words(), 3, &g);
        let stab_v = crate::quotient::pointwise_stabilizer(&ambient3, &[]);
        // Stab of v at level 3: index 2 (the orbit of v has size 2).
        assert_eq!(lifted.order() * 2u32, stab_v.order());
        // Trivial section group: the lift fixes the subtree at v to level 2.
        let trivial = LevelQuotient::from_perm_generators(2, 2, vec![]);
        let lifted_trivial = lift_at_level(&trivial, &v, 3, &g, 1 << 12).unwrap();
        assert!(lifted_trivial.order() < lifted.order());
        // Index relation: [ambient section : H] ≤ [G_n : lift].
        let idx_top = ambient3.order() / lifted.order();
        assert!(idx_top >= BigUint::from(2u32));
    }

    #[test]
    fn nr_estimate_for_stabilizer() {
        let g = grigorchuk();
        let registry = grig_registry(&g, 2).unwrap();
        let stab = stabilizer_schreier_generators(
            &full_group(&g),
            &Vertex::parse("0", 2).unwrap(),
            &g,
        );
        let report = nr_tree_estimate(&stab, &registry, 1, 5, 3, &g).unwrap();
        // The root is rist-certified (a finite-index subgroup contains K),
        // and its index sequence stays flat.
        let root = report.per_vertex.iter().find(|r| r.vertex.is_root()).unwrap();
        assert_eq!(root.status, NrStatus::RistCertified);
        assert!(!strictly_increasing_tail(&root.index_sequence, 3));
    }

    #[test]
    fn certified_vertices_closed_downward() {
        let g = grigorchuk();
        let registry = grig_registry(&g, 2).unwrap();
        let stab = stabilizer_schreier_generators(
            &full_group(&g),
            &Vertex::parse("1", 2).unwrap(),
            &g,
        );
        let report = nr_tree_estimate(&stab, &registry, 2, 5, 3, &g).unwrap();
        for r in &report.per_vertex {
            if let Some(parent) = r.vertex.parent() {
                if report.status(&parent) == Some(NrStatus::RistCertified) {
                    assert_eq!(r.status, NrStatus::RistCertified, "at {}", r.vertex);
                }
            }
        }
    }
}
