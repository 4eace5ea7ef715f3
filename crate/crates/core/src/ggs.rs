//! GGS-specific linear algebra and the normal form of first-level
//! stabilizer elements.
//!
//! Writing `b_i = a^i b a^{-i}`, every `g` in the first-level stabilizer
//! factors as `b_0^{n_0} ··· b_{p-1}^{n_{p-1}} · c` with `c` in the derived
//! subgroup of the stabilizer, and its sections satisfy
//! `g = (a^{α_0} b^{β_0} d_0, …, a^{α_{p-1}} b^{β_{p-1}} d_{p-1})` with
//! `α = n·Circ(e,0)`, `β = n·P` (`P` the cyclic shift matrix) and every
//! `d_i` in the derived subgroup. The matrix conventions are pinned by the
//! `g = b` calibration (`n = δ_0`, `β = (0,…,0,1)`) which is validated when
//! a context is created; every record is certified coordinate by coordinate
//! through the exact engine.

use crate::presentation::{section, GroupPresentation};
use crate::vertex::Vertex;
use crate::word::Word;
use crate::wordproblem::equal;
use crate::{Error, Result};

/// A vector of residues mod a prime.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResidueVector {
    p: u64,
    entries: Vec<u64>,
}

impl ResidueVector {
    pub fn new(p: u64, entries: &[i64]) -> Self {
        ResidueVector {
            p,
            entries: entries.iter().map(|&x| x.rem_euclid(p as i64) as u64).collect(),
        }
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn entries(&self) -> &[u64] {
        &self.entries
    }
}

/// The p×p circulant with first row `(e_0, …, e_{p-2}, 0)`; each row is the
/// cyclic right shift of the previous one.
pub fn circulant(e_padded: &ResidueVector) -> Vec<Vec<u64>> {
    let p = e_padded.entries.len();
    let row0 = &e_padded.entries;
    (0..p).map(|i| (0..p).map(|j| row0[(j + p - i) % p]).collect()).collect()
}

/// Exact rank computation mod p: true iff the circulant of `row` has full
/// rank. For circulants over F_p this coincides with `Σ row_i ≠ 0`; the
/// verification suite cross-checks the two routes exhaustively for small p.
pub fn circulant_invertible(row: &ResidueVector) -> bool {
    let p = row.p;
    let n = row.entries.len();
    let mut m = circulant(row);
    let inv = |x: u64| -> u64 {
        // Fermat inverse; p is prime and x ≠ 0 mod p.
        let mut acc = 1u64;
        let mut base = x % p;
        let mut e = p - 2;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base % p;
            }
            base = base * base % p;
            e >>= 1;
        }
        acc
    };
    let mut rank = 0;
    for col in 0..n {
        let Some(pivot) = (rank..n).find(|&r| m[r][col] % p != 0) else {
            continue;
        };
        m.swap(rank, pivot);
        let scale = inv(m[rank][col]);
        for j in 0..n {
            m[rank][j] = m[rank][j] * scale % p;
        }
        for r in 0..n {
            if r != rank && m[r][col] % p != 0 {
                let f = m[r][col] % p;
                for j in 0..n {
                    m[r][j] = (m[r][j] + (p - f) * m[rank][j]) % p;
                }
            }
        }
        rank += 1;
    }
    rank == n
}

/// A validated view of a GGS-shaped presentation: degree an odd prime,
/// generator `a` the forward cycle with trivial sections, generator `b`
/// stabilizing the first level with sections `(a^{e_0}, …, a^{e_{p-2}}, b)`.
pub struct GgsContext<'g> {
    g: &'g GroupPresentation,
    p: u64,
    e: Vec<u64>,
    a: usize,
    b: usize,
}

impl<'g> GgsContext<'g> {
    pub fn new(g: &'g GroupPresentation) -> Result<Self> {
        let p = g.degree() as u64;
        let a = g
            .generator_index("a")
            .ok_or_else(|| Error::Precondition("GGS context needs generator `a`".into()))?;
        let b = g
            .generator_index("b")
            .ok_or_else(|| Error::Precondition("GGS context needs generator `b`".into()))?;
        let ra = g.rule(a);
        let rb = g.rule(b);
        if ra.root_perm != crate::perm::Permutation::forward_cycle(p as usize)
            || ra.sections.iter().any(|s| !s.is_identity_word())
        {
            return Err(Error::Precondition("generator `a` is not the rooted cycle".into()));
        }
        if !rb.root_perm.is_identity() || rb.sections[p as usize - 1] != Word::generator(b) {
            return Err(Error::Precondition(
                "generator `b` does not have the spinal section shape".into(),
            ));
        }
        let mut e = Vec::with_capacity(p as usize - 1);
        for s in &rb.sections[..p as usize - 1] {
            match s.tokens() {
                [] => e.push(0),
                [(gen, exp)] if *gen == a => e.push(exp.rem_euclid(p as i64) as u64),
                _ => {
                    return Err(Error::Precondition(
                        "sections of `b` must be powers of `a`".into(),
                    ))
                }
            }
        }
        let ctx = GgsContext { g, p, e, a, b };
        ctx.validate_conventions()?;
        Ok(ctx)
    }

    /// The `g = b` calibration pinning the matrix conventions: the
    /// rewriting of `b` must give `n = δ_0`, and the derived `β` must place
    /// the `b` in the last coordinate.
    fn validate_conventions(&self) -> Result<()> {
        let b = Word::generator(self.b);
        let n = self.exponent_vector(&rewrite_in_bi(&b, self)?);
        let mut expected = vec![0u64; self.p as usize];
        expected[0] = 1;
        if n != expected {
            return Err(Error::Certification("rewriting convention drifted: n(b) ≠ δ_0".into()));
        }
        let beta = self.shift(&n);
        let mut last = vec![0u64; self.p as usize];
        *last.last_mut().unwrap() = 1;
        if beta != last {
            return Err(Error::Certification(
                "matrix convention drifted: β(b) ≠ (0,…,0,1)".into(),
            ));
        }
        Ok(())
    }

    pub fn presentation(&self) -> &GroupPresentation {
        self.g
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn defining_vector(&self) -> &[u64] {
        &self.e
    }

    pub fn is_torsion(&self) -> bool {
        self.e.iter().sum::<u64>() % self.p == 0
    }

    fn exponent_vector(&self, bword: &[(usize, i64)]) -> Vec<u64> {
        let mut n = vec![0u64; self.p as usize];
        for &(i, e) in bword {
            n[i] = (n[i] as i64 + e).rem_euclid(self.p as i64) as u64;
        }
        n
    }

    /// `β = n·P` for the cyclic shift matrix: `β_j = n_{(j+1) mod p}`.
    fn shift(&self, n: &[u64]) -> Vec<u64> {
        let p = self.p as usize;
        (0..p).map(|j| n[(j + 1) % p]).collect()
    }

    /// The word `a^i b^e a^{-i}` for the conjugate generator `b_i^e`.
    pub fn bi_word(&self, i: usize, e: i64) -> Word {
        Word::from_tokens(vec![(self.a, i as i64), (self.b, e), (self.a, -(i as i64))])
    }
}

/// Exponent sums of `a` and `b` mod p: the image in the abelianization
/// `C_p × C_p`. An element lies in the derived subgroup exactly when both
/// sums vanish.
pub fn abelianization(w: &Word, ctx: &GgsContext) -> (u64, u64) {
    let p = ctx.p as i64;
    let mut ea = 0i64;
    let mut eb = 0i64;
    for &(gen, e) in w.tokens() {
        if gen == ctx.a {
            ea += e;
        } else if gen == ctx.b {
            eb += e;
        }
    }
    (ea.rem_euclid(p) as u64, eb.rem_euclid(p) as u64)
}

/// Schreier rewriting over the transversal `{a^i}` of the first-level
/// stabilizer: a word with zero `a`-exponent sum becomes a product of
/// conjugate generators `b_i = a^i b a^{-i}`; the output is certified by a
/// round trip through the exact engine.
pub fn rewrite_in_bi(w: &Word, ctx: &GgsContext) -> Result<Vec<(usize, i64)>> {
    let p = ctx.p as i64;
    let (ea, _) = abelianization(w, ctx);
    if ea != 0 {
        return Err(Error::Precondition(format!(
            "word has a-exponent {ea} mod {}; it does not stabilize the first level",
            ctx.p
        )));
    }
    let mut t = 0i64;
    let mut out: Vec<(usize, i64)> = Vec::new();
    for &(gen, e) in w.tokens() {
        if gen == ctx.a {
            t = (t + e).rem_euclid(p);
        } else if gen == ctx.b {
            out.push((t as usize, e));
        } else {
            return Err(Error::Precondition("word uses a non-GGS generator".into()));
        }
    }
    // Round-trip certificate.
    let mut product = Word::identity();
    for &(i, e) in &out {
        product = Word::multiply(&product, &ctx.bi_word(i, e));
    }
    if !equal(w, &product, ctx.g)? {
        return Err(Error::Certification("b_i rewriting failed its round trip".into()));
    }
    Ok(out)
}

/// The normal form data of a first-level stabilizer element of a torsion
/// GGS group.
#[derive(Debug, Clone)]
pub struct GgsNormalFormRecord {
    pub n: Vec<u64>,
    pub alpha: Vec<u64>,
    pub beta: Vec<u64>,
    /// Per-coordinate derived-subgroup corrections, each certified to have
    /// trivial abelianization.
    pub d_words: Vec<Word>,
}

/// Compute and certify the normal form of `w ∈ Stab(level 1)`: `n` from the
/// `b_i` rewriting, `α = n·Circ(e,0)`, `β = n·P`, and per-coordinate
/// `d_i = (a^{α_i} b^{β_i})⁻¹ · section_i` certified inside the derived
/// subgroup, with the record certified by exact equality per coordinate.
/// Certification failure signals a convention bug and aborts.
pub fn ggs_normal_form(w: &Word, ctx: &GgsContext) -> Result<GgsNormalFormRecord> {
    if !ctx.is_torsion() {
        return Err(Error::Precondition(
            "the normal form requires a torsion defining vector (Σe = 0)".into(),
        ));
    }
    let p = ctx.p as usize;
    let n = ctx.exponent_vector(&rewrite_in_bi(w, ctx)?);
    let mut padded: Vec<i64> = ctx.e.iter().map(|&x| x as i64).collect();
    padded.push(0);
    let c = circulant(&ResidueVector::new(ctx.p, &padded));
    let alpha: Vec<u64> =
        (0..p).map(|j| (0..p).map(|i| n[i] * c[i][j]).sum::<u64>() % ctx.p).collect();
    let beta = ctx.shift(&n);

    let mut d_words = Vec::with_capacity(p);
    for x in 0..p {
        let v = Vertex::new(vec![x as u8], p)?;
        let s = section(w, &v, ctx.g);
        let head = Word::multiply(
            &Word::from_tokens(vec![(ctx.a, alpha[x] as i64)]),
            &Word::from_tokens(vec![(ctx.b, beta[x] as i64)]),
        );
        let d = Word::multiply(&head.inverse(), &s);
        if abelianization(&d, ctx) != (0, 0) {
            return Err(Error::Certification(format!(
                "coordinate {x}: correction is not in the derived subgroup"
            )));
        }
        if !equal(&s, &Word::multiply(&head, &d), ctx.g)? {
            return Err(Error::Certification(format!(
                "coordinate {x}: normal form does not reproduce the section"
            )));
        }
        d_words.push(d);
    }
    Ok(GgsNormalFormRecord { n, alpha, beta, d_words })
}

/// Full record round trip: the element assembled from the per-coordinate
/// normal forms equals the input (trivial root permutation and exact
/// section equality in every coordinate).
pub fn certify_normal_form(
    w: &Word,
    record: &GgsNormalFormRecord,
    ctx: &GgsContext,
) -> Result<bool> {
    if !crate::presentation::root_permutation(w, ctx.g).is_identity() {
        return Ok(false);
    }
    let p = ctx.p as usize;
    for x in 0..p {
        let v = Vertex::new(vec![x as u8], p)?;
        let rebuilt = Word::multiply(
            &Word::multiply(
                &Word::from_tokens(vec![(ctx.a, record.alpha[x] as i64)]),
                &Word::from_tokens(vec![(ctx.b, record.beta[x] as i64)]),
            ),
            &record.d_words[x],
        );
        if !equal(&section(w, &v, ctx.g), &rebuilt, ctx.g)? {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets::{ggs, GgsVector};
    use crate::wordproblem::is_trivial;
    use crate::word::parse_word;

    fn gs3() -> GroupPresentation {
        ggs(&GgsVector::new(3, &[1, -1]).unwrap()).unwrap()
    }

    #[test]
    fn circulant_shape() {
        let c = circulant(&ResidueVector::new(3, &[1, 2, 0]));
        assert_eq!(c, vec![vec![1, 2, 0], vec![0, 1, 2], vec![2, 0, 1]]);
        for row in &c {
            assert_eq!(row.iter().sum::<u64>() % 3, 0);
        }
    }

    #[test]
    fn invertibility() {
        assert!(circulant_invertible(&ResidueVector::new(3, &[1, 0, 0])));
        assert!(!circulant_invertible(&ResidueVector::new(3, &[1, 1, 1])));
        for mask in 0..27u64 {
            let row = [(mask % 3) as i64, ((mask / 3) % 3) as i64, ((mask / 9) % 3) as i64];
            let rv = ResidueVector::new(3, &row);
            if row.iter().sum::<i64>() % 3 != 0 {
                assert!(circulant_invertible(&rv), "{row:?}");
            }
        }
    }

    #[test]
    fn abelianization_examples() {
        let g = gs3();
        let ctx = GgsContext::new(&g).unwrap();
        assert_eq!(abelianization(&parse_word("a b", &g).unwrap(), &ctx), (1, 1));
        assert_eq!(abelianization(&parse_word("[a, b]", &g).unwrap(), &ctx), (0, 0));
        assert_eq!(abelianization(&parse_word("b^a", &g).unwrap(), &ctx), (0, 1));
    }

    #[test]
    fn rewriting() {
        let g = gs3();
        let ctx = GgsContext::new(&g).unwrap();
        assert_eq!(rewrite_in_bi(&parse_word("b", &g).unwrap(), &ctx).unwrap(), vec![(0, 1)]);
        // a' b a rewrites to the conjugate generator indexed per the fixed
        // transversal convention b_i = a^i b a^{-i}: here i = p - 1.
        assert_eq!(
            rewrite_in_bi(&parse_word("a' b a", &g).unwrap(), &ctx).unwrap(),
            vec![(2, 1)]
        );
        assert!(rewrite_in_bi(&parse_word("a", &g).unwrap(), &ctx).is_err());
    }

    #[test]
    fn normal_form_of_b() {
        let g = gs3();
        let ctx = GgsContext::new(&g).unwrap();
        let record = ggs_normal_form(&parse_word("b", &g).unwrap(), &ctx).unwrap();
        assert_eq!(record.n, vec![1, 0, 0]);
        assert_eq!(record.beta, vec![0, 0, 1]);
        assert_eq!(record.alpha, vec![1, 2, 0]); // e = (1, -1) ≡ (1, 2)
        for d in &record.d_words {
            assert!(is_trivial(d, &g).unwrap());
        }
        assert!(certify_normal_form(&parse_word("b", &g).unwrap(), &record, &ctx).unwrap());
    }

    #[test]
    fn normal_form_of_identity() {
        let g = gs3();
        let ctx = GgsContext::new(&g).unwrap();
        let record = ggs_normal_form(&Word::identity(), &ctx).unwrap();
        assert_eq!(record.n, vec![0, 0, 0]);
        assert!(record.alpha.iter().all(|&x| x == 0));
        assert!(record.beta.iter().all(|&x| x == 0));
    }

    #[test]
    fn normal_form_round_trip() {
        let g = gs3();
        let ctx = GgsContext::new(&g).unwrap();
        let w = parse_word("b b^a", &g).unwrap();
        let record = ggs_normal_form(&w, &ctx).unwrap();
        assert!(certify_normal_form(&w, &record, &ctx).unwrap());
    }

    #[test]
    fn non_torsion_rejected() {
        let g = ggs(&GgsVector::new(3, &[1, 1]).unwrap()).unwrap();
        let ctx = GgsContext::new(&g).unwrap();
        assert!(ggs_normal_form(&Word::generator(1), &ctx).is_err());
    }

    #[test]
    fn uniqueness_probe() {
        // Distinct n vectors induce distinct (α, β) pairs: β = n·P alone
        // separates them.
        let g = gs3();
        let ctx = GgsContext::new(&g).unwrap();
        let mut seen = std::collections::HashSet::new();
        for n0 in 0..3u64 {
            for n1 in 0..3u64 {
                for n2 in 0..3u64 {
                    let beta = ctx.shift(&[n0, n1, n2]);
                    assert!(seen.insert(beta));
                }
            }
        }
    }
}
