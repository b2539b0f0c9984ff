//! Isometric embeddings of positive-definite lattices into cubic lattices
//! `Zⁿ`, the envelope of each embedding, and the rigidity classification
//! that feeds the bounding obstruction.
//!
//! Embeddings are enumerated up to signed permutations of the ambient
//! coordinates. Fresh coordinates are always introduced with positive,
//! non-increasing entries, and existing coordinates whose columns agree on
//! every placed generator are filled in non-increasing order.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive};
use serde::Serialize;

use crate::arith::{self, is_square};
use crate::error::{Error, Result};
use crate::form::{Definiteness, QuadraticForm};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Embedding {
    pub ambient_dim: usize,
    /// Image of each source generator, in source order.
    pub images: Vec<Vec<i64>>,
}

impl Embedding {
    pub fn verify(&self, g: &QuadraticForm) -> bool {
        let m = g.rank();
        self.images.len() == m
            && self.images.iter().all(|v| v.len() == self.ambient_dim)
            && (0..m).all(|i| {
                (0..m).all(|j| {
                    let ip: i64 = self.images[i].iter().zip(&self.images[j]).map(|(a, b)| a * b).sum();
                    ip == g.entry(i, j)
                })
            })
    }

    /// The embedding restricted to coordinates some image uses.
    pub fn support(&self) -> Embedding {
        let used: Vec<usize> = (0..self.ambient_dim).filter(|&c| self.images.iter().any(|row| row[c] != 0)).collect();
        let images = self.images.iter().map(|row| used.iter().map(|&c| row[c]).collect()).collect();
        Embedding { ambient_dim: used.len(), images }
    }

    /// Canonical representative under signed coordinate permutations, with
    /// unused coordinates dropped.
    pub fn canonical(&self) -> Embedding {
        let m = self.images.len();
        let mut cols: Vec<Vec<i64>> = (0..self.ambient_dim)
            .map(|c| self.images.iter().map(|row| row[c]).collect::<Vec<i64>>())
            .filter(|col| col.iter().any(|&v| v != 0))
            .map(|mut col| {
                if col.iter().find(|&&v| v != 0).is_some_and(|&v| v < 0) {
                    col.iter_mut().for_each(|v| *v = -*v);
                }
                col
            })
            .collect();
        cols.sort_by(|a, b| b.cmp(a));
        let images = (0..m).map(|i| cols.iter().map(|c| c[i]).collect()).collect();
        Embedding { ambient_dim: cols.len(), images }
    }
}

/// `trace(G)`: no embedding ever needs more coordinates than this.
pub fn trace_cap(g: &QuadraticForm) -> usize {
    (0..g.rank()).map(|i| g.entry(i, i).max(0) as usize).sum()
}

struct Search<'a> {
    g: &'a QuadraticForm,
    order: Vec<usize>,
    n_max: usize,
    images: Vec<Vec<i64>>,
    placed: Vec<usize>,
    used: usize,
    found: BTreeSet<Embedding>,
}

impl Search<'_> {
    fn run(&mut self, depth: usize) {
        if depth == self.order.len() {
            let m = self.g.rank();
            let images = (0..m).map(|j| self.images[j][..self.used].to_vec()).collect();
            let e = Embedding { ambient_dim: self.used, images }.canonical();
            debug_assert!(e.verify(self.g));
            self.found.insert(e);
            return;
        }
        let j = self.order[depth];
        let norm = self.g.entry(j, j);
        let targets: Vec<i64> = self.placed.iter().map(|&i| self.g.entry(i, j)).collect();
        // suffix sums of squares of placed images, for Cauchy–Schwarz cuts
        let suffix: Vec<Vec<i64>> = self
            .placed
            .iter()
            .map(|&i| {
                let mut s = vec![0i64; self.used + 1];
                for c in (0..self.used).rev() {
                    s[c] = s[c + 1] + self.images[i][c] * self.images[i][c];
                }
                s
            })
            .collect();
        let mut tie = vec![false; self.used];
        for c in 1..self.used {
            tie[c] = self.placed.iter().all(|&i| self.images[i][c] == self.images[i][c - 1]);
        }
        let mut partial = vec![0i64; self.placed.len()];
        let mut vec = vec![0i64; self.n_max];
        self.existing(depth, j, 0, norm, &targets, &suffix, &tie, &mut partial, &mut vec);
    }

    #[allow(clippy::too_many_arguments)]
    fn existing(
        &mut self,
        depth: usize,
        j: usize,
        c: usize,
        budget: i64,
        targets: &[i64],
        suffix: &[Vec<i64>],
        tie: &[bool],
        partial: &mut [i64],
        vec: &mut Vec<i64>,
    ) {
        for (k, &t) in targets.iter().enumerate() {
            let gap = t - partial[k];
            if gap * gap > budget * suffix[k][c] {
                return;
            }
        }
        if c == self.used {
            self.fresh(depth, j, budget, vec);
            return;
        }
        let r = arith::isqrt(budget as i128) as i64;
        let hi = if tie[c] { vec[c - 1].min(r) } else { r };
        for x in (-r..=hi).rev() {
            vec[c] = x;
            for (k, &i) in self.placed.iter().enumerate() {
                partial[k] += x * self.images[i][c];
            }
            self.existing(depth, j, c + 1, budget - x * x, targets, suffix, tie, partial, vec);
            for (k, &i) in self.placed.iter().enumerate() {
                partial[k] -= x * self.images[i][c];
            }
        }
        vec[c] = 0;
    }

    /// Spend the remaining norm on new coordinates: positive, non-increasing.
    fn fresh(&mut self, depth: usize, j: usize, budget: i64, vec: &mut [i64]) {
        let mut parts = Vec::new();
        square_partitions(budget, arith::isqrt(budget as i128) as i64, self.n_max - self.used, &mut Vec::new(), &mut parts);
        for p in parts {
            let old_used = self.used;
            for (k, &v) in p.iter().enumerate() {
                vec[old_used + k] = v;
            }
            self.used += p.len();
            self.images[j] = vec.to_vec();
            self.placed.push(j);
            self.run(depth + 1);
            self.placed.pop();
            self.images[j] = vec![0; self.n_max];
            self.used = old_used;
            for k in 0..p.len() {
                vec[old_used + k] = 0;
            }
        }
    }
}

fn square_partitions(r: i64, max_part: i64, slots: usize, cur: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
    if r == 0 {
        out.push(cur.clone());
        return;
    }
    if slots == 0 {
        return;
    }
    let mut p = max_part.min(arith::isqrt(r as i128) as i64);
    while p >= 1 {
        cur.push(p);
        square_partitions(r - p * p, p, slots - 1, cur, out);
        cur.pop();
        p -= 1;
    }
}

fn bfs_order(g: &QuadraticForm) -> Vec<usize> {
    let m = g.rank();
    let degree = |i: usize| (0..m).filter(|&j| j != i && g.entry(i, j) != 0).count();
    let mut seen = vec![false; m];
    let mut order = Vec::with_capacity(m);
    while order.len() < m {
        let start = (0..m).filter(|&i| !seen[i]).max_by_key(|&i| (degree(i), std::cmp::Reverse(i))).unwrap();
        let mut queue = VecDeque::from([start]);
        seen[start] = true;
        while let Some(v) = queue.pop_front() {
            order.push(v);
            for w in 0..m {
                if !seen[w] && w != v && g.entry(v, w) != 0 {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
    }
    order
}

/// All embeddings of `g` into `Zⁿ` for `n <= n_max` (default `trace(g)`),
/// up to signed coordinate permutations.
pub fn find_embeddings(g: &QuadraticForm, n_max: Option<usize>) -> Result<Vec<Embedding>> {
    g.require(Definiteness::Positive)?;
    let n_max = n_max.unwrap_or_else(|| trace_cap(g));
    let m = g.rank();
    let mut s = Search {
        g,
        order: bfs_order(g),
        n_max,
        images: vec![vec![0; n_max]; m],
        placed: Vec::new(),
        used: 0,
        found: BTreeSet::new(),
    };
    s.run(0);
    let out: Vec<Embedding> = s.found.into_iter().collect();
    assert!(out.iter().all(|e| e.verify(g)));
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EnvelopeKind {
    /// Image spans the same coordinates as its rank: inside a `Z^m`.
    UnimodularEnvelope,
    /// Inside `Z^{m+1}` with complement generated by a vector of this square.
    Corank1Envelope { square: i64 },
    Other { support: usize, discriminant: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EnvelopeInfo {
    pub support_dim: usize,
    pub saturation_rank: usize,
    pub saturation_discriminant: String,
    pub complement_vector: Option<Vec<i64>>,
    pub complement_square: Option<i64>,
    pub kind: EnvelopeKind,
}

/// Envelope of an embedding, computed on its coordinate support (unused
/// coordinates dropped, order and signs kept).
pub fn envelope(e: &Embedding) -> Result<EnvelopeInfo> {
    let canon = e.support();
    let m = canon.images.len();
    let u = canon.ambient_dim;
    let flat: Vec<i128> = canon.images.iter().flatten().map(|&v| v as i128).collect();
    let snf = arith::smith_normal_form(m, u, &flat)?;
    let rank = snf.rank();
    let gram: Vec<BigInt> = (0..m)
        .flat_map(|i| {
            let images = &canon.images;
            (0..m).map(move |j| BigInt::from(images[i].iter().zip(&images[j]).map(|(a, b)| a * b).sum::<i64>()))
        })
        .collect();
    let det = arith::bareiss_det(m, &gram);
    let index: BigInt = snf.invariants.iter().map(|&d| BigInt::from(d)).product();
    let disc = if rank == m { det / (&index * &index) } else { BigInt::from(0) };

    let (complement_vector, complement_square) = if rank == m && u == m + 1 {
        let mut v: Vec<i64> = (0..u).map(|r| snf.v[r * u + m] as i64).collect();
        if v.iter().find(|&&x| x != 0).is_some_and(|&x| x < 0) {
            v.iter_mut().for_each(|x| *x = -*x);
        }
        let sq = v.iter().map(|x| x * x).sum();
        (Some(v), Some(sq))
    } else {
        (None, None)
    };
    let kind = if rank == m && u == m && disc.is_one() {
        EnvelopeKind::UnimodularEnvelope
    } else if let Some(sq) = complement_square {
        EnvelopeKind::Corank1Envelope { square: sq }
    } else {
        EnvelopeKind::Other { support: u, discriminant: disc.to_string() }
    };
    Ok(EnvelopeInfo {
        support_dim: u,
        saturation_rank: rank,
        saturation_discriminant: disc.to_string(),
        complement_vector,
        complement_square,
        kind,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Rigidity {
    NonEmbeddable,
    Rigid,
    AlmostRigid,
    Neither,
}

#[derive(Debug, Clone, Serialize)]
pub struct RigidityVerdict {
    pub kind: Rigidity,
    pub determinant: String,
    pub embedding_count: usize,
    pub realized_envelopes: BTreeSet<EnvelopeKind>,
    /// One representative embedding per realized envelope kind.
    pub certificates: BTreeMap<String, Embedding>,
}

impl RigidityVerdict {
    pub fn realizes_unimodular(&self) -> bool {
        self.realized_envelopes.contains(&EnvelopeKind::UnimodularEnvelope)
    }
}

fn envelope_label(k: &EnvelopeKind) -> String {
    match k {
        EnvelopeKind::UnimodularEnvelope => "unimodular_envelope".into(),
        EnvelopeKind::Corank1Envelope { square } => format!("corank1_envelope({square})"),
        EnvelopeKind::Other { support, discriminant } => format!("other(support={support},disc={discriminant})"),
    }
}

pub fn classify_rigidity(g: &QuadraticForm) -> Result<RigidityVerdict> {
    classify_rigidity_with(g, None)
}

pub fn classify_rigidity_with(g: &QuadraticForm, n_max: Option<usize>) -> Result<RigidityVerdict> {
    let embeddings = find_embeddings(g, n_max)?;
    let delta = g.delta().to_i64().ok_or(Error::Overflow)?;
    let mut realized = BTreeSet::new();
    let mut certificates = BTreeMap::new();
    for e in &embeddings {
        let kind = envelope(e)?.kind;
        certificates.entry(envelope_label(&kind)).or_insert_with(|| e.clone());
        realized.insert(kind);
    }
    let allowed = |k: &EnvelopeKind| {
        matches!(k, EnvelopeKind::UnimodularEnvelope)
            || matches!(k, EnvelopeKind::Corank1Envelope { square } if *square == delta)
    };
    let kind = if embeddings.is_empty() {
        Rigidity::NonEmbeddable
    } else if realized.iter().all(|k| matches!(k, EnvelopeKind::UnimodularEnvelope)) {
        Rigidity::Rigid
    } else if realized.iter().all(allowed) {
        Rigidity::AlmostRigid
    } else {
        Rigidity::Neither
    };
    Ok(RigidityVerdict {
        kind,
        determinant: g.determinant().to_string(),
        embedding_count: embeddings.len(),
        realized_envelopes: realized,
        certificates,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundingConclusion {
    /// No negative-definite four-manifold is bounded.
    NoNegativeDefinite,
    /// Only `Δ_1`, with `h` a square and torsion needed when `h > 1`.
    OnlyDelta1WithTorsion,
    OnlyDeltaH,
    /// `Δ_h`, or `Δ_1` with torsion.
    DeltaHOrDelta1WithTorsion,
    NoConclusion,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundingVerdict {
    pub h: i64,
    pub h_is_square: bool,
    pub rigidity: RigidityVerdict,
    pub conclusion: BoundingConclusion,
    pub text: String,
}

/// Conclusions about negative-definite fillings of a manifold bounding the
/// positive-definite pairing `g` (with `H_1` of the filling zero) and `|H_1| = h`.
pub fn bounding_verdict(g: &QuadraticForm, h: i64) -> Result<BoundingVerdict> {
    if g.delta() != BigInt::from(h) {
        return Err(Error::Precondition(format!("h = {h} but |det G| = {}", g.delta())));
    }
    let rigidity = classify_rigidity(g)?;
    let h_sq = is_square(&BigInt::from(h));
    let torsion = if h > 1 { "; H_1 of the filling must have torsion" } else { "" };
    let (conclusion, text) = match rigidity.kind {
        Rigidity::NonEmbeddable => (
            BoundingConclusion::NoNegativeDefinite,
            "no negative-definite bounding: the pairing embeds in no cubic lattice".to_string(),
        ),
        Rigidity::Rigid if h_sq => (
            BoundingConclusion::OnlyDelta1WithTorsion,
            format!("rigid: only Δ_1 can be bounded; h = {h} is a square{torsion}"),
        ),
        Rigidity::Rigid => (
            BoundingConclusion::NoNegativeDefinite,
            format!("rigid but h = {h} is not a square: no negative-definite bounding"),
        ),
        Rigidity::AlmostRigid if rigidity.realizes_unimodular() && h_sq => (
            BoundingConclusion::DeltaHOrDelta1WithTorsion,
            format!("almost-rigid: only Δ_{h}, or Δ_1{torsion}"),
        ),
        Rigidity::AlmostRigid => (
            BoundingConclusion::OnlyDeltaH,
            format!("almost-rigid: only Δ_{h} can be bounded"),
        ),
        Rigidity::Neither => (BoundingConclusion::NoConclusion, "no conclusion".to_string()),
    };
    Ok(BoundingVerdict { h, h_is_square: h_sq, rigidity, conclusion, text })
}

/// Gram matrix of the path `A_k` with squares 2 and adjacency `+1`.
pub fn a_chain(k: usize) -> QuadraticForm {
    let mut g = vec![0i64; k * k];
    for i in 0..k {
        g[i * k + i] = 2;
        if i + 1 < k {
            g[i * k + i + 1] = 1;
            g[(i + 1) * k + i] = 1;
        }
    }
    QuadraticForm::from_flat(k, g).expect("A_k is positive definite")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(rows: &[&[i64]]) -> QuadraticForm {
        QuadraticForm::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn a2_embeds() {
        let g = q(&[&[2, 1], &[1, 2]]);
        let es = find_embeddings(&g, None).unwrap();
        assert!(!es.is_empty());
        let witness = Embedding { ambient_dim: 3, images: vec![vec![1, 1, 0], vec![0, 1, -1]] };
        assert!(witness.verify(&g));
        assert!(es.contains(&witness.canonical()));
    }

    #[test]
    fn a3_has_a_three_dimensional_embedding() {
        let g = a_chain(3);
        let w = Embedding { ambient_dim: 3, images: vec![vec![1, 1, 0], vec![0, 1, -1], vec![-1, 1, 0]] };
        assert!(w.verify(&g));
        let es = find_embeddings(&g, None).unwrap();
        assert!(es.contains(&w.canonical()));
    }

    #[test]
    fn envelope_examples() {
        let e = Embedding { ambient_dim: 1, images: vec![vec![1]] };
        let info = envelope(&e).unwrap();
        assert_eq!((info.saturation_rank, info.saturation_discriminant.as_str()), (1, "1"));
        let e = Embedding { ambient_dim: 2, images: vec![vec![1, 1]] };
        let info = envelope(&e).unwrap();
        assert_eq!((info.saturation_rank, info.saturation_discriminant.as_str()), (1, "2"));
        let e = Embedding { ambient_dim: 3, images: vec![vec![1, -1, 0], vec![0, 1, -1]] };
        let info = envelope(&e).unwrap();
        assert_eq!(info.saturation_discriminant, "3");
        assert_eq!(info.complement_vector, Some(vec![1, 1, 1]));
        assert_eq!(info.kind, EnvelopeKind::Corank1Envelope { square: 3 });
    }

    #[test]
    fn unit_diagonal_is_rigid() {
        let v = classify_rigidity(&QuadraticForm::diagonal(&[1, 1, 1]).unwrap()).unwrap();
        assert_eq!(v.kind, Rigidity::Rigid);
    }

    #[test]
    fn a4_almost_rigid_only_corank1() {
        let v = classify_rigidity(&a_chain(4)).unwrap();
        assert_eq!(v.kind, Rigidity::AlmostRigid);
        assert_eq!(v.realized_envelopes, BTreeSet::from([EnvelopeKind::Corank1Envelope { square: 5 }]));
        let b = bounding_verdict(&a_chain(4), 5).unwrap();
        assert_eq!(b.conclusion, BoundingConclusion::OnlyDeltaH);
    }

    #[test]
    fn a3_realizes_both() {
        let v = classify_rigidity(&a_chain(3)).unwrap();
        assert_eq!(v.kind, Rigidity::AlmostRigid);
        assert!(v.realizes_unimodular());
        assert!(v.realized_envelopes.contains(&EnvelopeKind::Corank1Envelope { square: 4 }));
        assert_eq!(bounding_verdict(&a_chain(3), 4).unwrap().conclusion, BoundingConclusion::DeltaHOrDelta1WithTorsion);
    }

    #[test]
    fn bounding_verdict_checks_h() {
        assert!(bounding_verdict(&a_chain(2), 4).is_err());
    }

    #[test]
    fn canonical_is_invariant_under_signed_permutation() {
        let e = Embedding { ambient_dim: 3, images: vec![vec![1, 1, 0], vec![0, 1, -1]] };
        let f = Embedding { ambient_dim: 4, images: vec![vec![0, -1, 0, 1], vec![1, -1, 0, 0]] };
        assert_eq!(e.canonical(), f.canonical());
    }
}
