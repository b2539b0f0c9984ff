//! Seifert fibred rational homology spheres: the invariant `k(Y)`, definite
//! star-shaped plumbings, Spin^c classes as cosets of characteristic
//! covectors, correction terms, and the bounding verdicts they imply.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Zero;

use serde::Serialize;

use crate::arith::{self, rat, Rational};
use crate::char_search::{coset_minimize, CosetProblem, Modulus};
use crate::error::{Error, Result};
use crate::form::{Definiteness, QuadraticForm, Sign};
use crate::par::{self, Execution};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct SeifertData {
    pub e: i64,
    /// `(α_i, β_i)` with `α_i >= 2`, `1 <= β_i < α_i`, coprime.
    pub fibers: Vec<(i64, i64)>,
}

impl SeifertData {
    pub fn new(e: i64, fibers: Vec<(i64, i64)>) -> Result<Self> {
        if fibers.is_empty() {
            return Err(Error::Precondition("at least one exceptional fibre is required".into()));
        }
        for &(a, b) in &fibers {
            if a < 2 || b < 1 || b >= a || a.gcd(&b) != 1 {
                return Err(Error::Precondition(format!("invalid fibre ({a},{b}): need coprime 1 <= β < α, α >= 2")));
            }
        }
        Ok(Self { e, fibers })
    }

    /// Brings each `β` into `[1, α)` and folds `α = 1` fibres into `e`, leaving
/// the manifold unchanged.
    pub fn normalized(e: i64, fibers: &[(i64, i64)]) -> Result<Self> {
        let mut e = e;
        let mut out = Vec::with_capacity(fibers.len());
        for &(a, b) in fibers {
            if a < 1 {
                return Err(Error::Precondition(format!("invalid fibre ({a},{b}): α must be positive")));
            }
            if a == 1 {
                e += b;
                continue;
            }
            let r = b.rem_euclid(a);
            e += (b - r) / a;
            out.push((a, r));
        }
        Self::new(e, out)
    }

    /// Parses `e;(a,b),(a,b),...`, optionally wrapped as `Y(...)`.
    pub fn parse(s: &str) -> Result<Self> {
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let t = t.strip_prefix("Y(").and_then(|r| r.strip_suffix(')')).unwrap_or(&t);
        let (e, rest) = t.split_once(';').ok_or_else(|| Error::Parse(format!("expected 'e;(a,b),...', got '{s}'")))?;
        let e: i64 = e.parse().map_err(|_| Error::Parse(format!("bad e '{e}'")))?;
        let mut fibers = Vec::new();
        for chunk in rest.split("),") {
            let c = chunk.trim_start_matches('(').trim_end_matches(')');
            let (a, b) = c.split_once(',').ok_or_else(|| Error::Parse(format!("bad fibre '{chunk}'")))?;
            let a = a.parse().map_err(|_| Error::Parse(format!("bad α '{a}'")))?;
            let b = b.parse().map_err(|_| Error::Parse(format!("bad β '{b}'")))?;
            fibers.push((a, b));
        }
        Self::new(e, fibers)
    }

    /// `-Y(e; (α_i, β_i)) = Y(-e - r; (α_i, α_i - β_i))`.
    pub fn reversed(&self) -> Self {
        Self {
            e: -self.e - self.fibers.len() as i64,
            fibers: self.fibers.iter().map(|&(a, b)| (a, a - b)).collect(),
        }
    }
}

impl fmt::Display for SeifertData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let fibers: Vec<String> = self.fibers.iter().map(|(a, b)| format!("({a},{b})")).collect();
        write!(f, "Y({};{})", self.e, fibers.join(","))
    }
}

/// `k(Y) = e Πα_i + Σ_i β_i Π_{j≠i} α_j`; `|k|` is `|H_1(Y)|` when nonzero.
pub fn k_invariant(s: &SeifertData) -> Result<i128> {
    let mut total: i128 = s.fibers.iter().try_fold(s.e as i128, |acc, &(a, _)| acc.checked_mul(a as i128)).ok_or(Error::Overflow)?;
    for (i, &(_, b)) in s.fibers.iter().enumerate() {
        let mut term = b as i128;
        for (j, &(a, _)) in s.fibers.iter().enumerate() {
            if j != i {
                term = term.checked_mul(a as i128).ok_or(Error::Overflow)?;
            }
        }
        total = total.checked_add(term).ok_or(Error::Overflow)?;
    }
    Ok(total)
}

/// `α/β = a_1 - 1/(a_2 - 1/(... - 1/a_s))` with every `a_i >= 2`.
pub fn neg_cont_frac(alpha: i64, beta: i64) -> Result<Vec<i64>> {
    if beta <= 0 || beta >= alpha || alpha.gcd(&beta) != 1 {
        return Err(Error::Precondition(format!("invalid pair ({alpha},{beta})")));
    }
    let (mut a, mut b) = (alpha, beta);
    let mut out = Vec::new();
    while b > 0 {
        let c = (a + b - 1) / b;
        out.push(c);
        (a, b) = (b, c * b - a);
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct PlumbingGraph {
    pub sign: Sign,
    pub weights: Vec<i64>,
    pub labels: Vec<String>,
    pub edges: Vec<(usize, usize)>,
    /// Vertex indices of each leg, starting next to the centre (vertex 0).
    pub legs: Vec<Vec<usize>>,
    pub gram: QuadraticForm,
}

impl PlumbingGraph {
    pub fn degree(&self, v: usize) -> usize {
        self.edges.iter().filter(|&&(a, b)| a == v || b == v).count()
    }

    /// Vertices with `weight + degree > 0` (of the negative-definite graph).
    pub fn bad_vertices(&self) -> Vec<usize> {
        (0..self.weights.len()).filter(|&v| self.weights[v] + self.degree(v) as i64 > 0).collect()
    }

    pub fn is_tree(&self) -> bool {
        let n = self.weights.len();
        if self.edges.len() + 1 != n {
            return false;
        }
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            p[x] = r;
            r
        }
        for &(a, b) in &self.edges {
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            if ra == rb {
                return false;
            }
            parent[ra] = rb;
        }
        true
    }

    fn negated(&self) -> Result<Self> {
        Ok(Self {
            sign: match self.sign {
                Sign::Positive => Sign::Negative,
                Sign::Negative => Sign::Positive,
            },
            weights: self.weights.iter().map(|w| -w).collect(),
            labels: self.labels.clone(),
            edges: self.edges.clone(),
            legs: self.legs.clone(),
            gram: self.gram.negated(),
        })
    }
}

fn leg_label(i: usize, j: usize) -> String {
    match i {
        0 => format!("v{}", j + 1),
        1 => format!("w{}", j + 1),
        2 => format!("x{}", j + 1),
        _ => format!("l{}_{}", i + 1, j + 1),
    }
}

/// Positive star plumbing: centre `-e`, legs from the continued fractions,
/// adjacent vertices pairing to `-1`.
fn positive_star(s: &SeifertData) -> Result<PlumbingGraph> {
    let mut weights = vec![-s.e];
    let mut labels = vec!["u".to_string()];
    let mut edges = Vec::new();
    let mut legs = Vec::new();
    for (i, &(a, b)) in s.fibers.iter().enumerate() {
        let mut leg = Vec::new();
        let mut prev = 0;
        for (j, w) in neg_cont_frac(a, b)?.into_iter().enumerate() {
            let v = weights.len();
            weights.push(w);
            labels.push(leg_label(i, j));
            edges.push((prev, v));
            leg.push(v);
            prev = v;
        }
        legs.push(leg);
    }
    let n = weights.len();
    let mut g = vec![0i64; n * n];
    for (v, &w) in weights.iter().enumerate() {
        g[v * n + v] = w;
    }
    for &(a, b) in &edges {
        g[a * n + b] = -1;
        g[b * n + a] = -1;
    }
    let gram = QuadraticForm::from_flat(n, g)?;
    Ok(PlumbingGraph { sign: Sign::Positive, weights, labels, edges, legs, gram })
}

/// The definite plumbing bounded by `Y`: positive when `k < 0`, otherwise the
/// negation of the positive plumbing of `-Y`.
pub fn definite_plumbing(s: &SeifertData) -> Result<PlumbingGraph> {
    let k = k_invariant(s)?;
    let graph = match k.signum() {
        0 => return Err(Error::Precondition("k(Y) = 0: not a rational homology sphere".into())),
        -1 => positive_star(s)?,
        _ => positive_star(&s.reversed())?.negated()?,
    };
    if graph.gram.definiteness() != graph.sign.definiteness() {
        return Err(Error::Precondition(format!("plumbing of {s} is not definite")));
    }
    assert_eq!(graph.gram.delta(), BigInt::from(k.abs()), "|det| must equal |k(Y)|");
    Ok(graph)
}

/// A coset of characteristic covectors modulo `2Q Zⁿ`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SpincClass {
    /// Residues in the cyclic factors of `coker Q` with order > 1.
    pub label: Vec<i64>,
    pub representative: Vec<i64>,
    pub spin: bool,
    pub conjugate: Vec<i64>,
}

impl SpincClass {
    pub fn label_string(&self) -> String {
        let parts: Vec<String> = self.label.iter().map(|v| v.to_string()).collect();
        format!("[{}]", parts.join(","))
    }
}

struct Cokernel {
    n: usize,
    smith: arith::Smith,
    base: Vec<i64>,
}

impl Cokernel {
    fn new(q: &QuadraticForm) -> Result<Self> {
        let n = q.rank();
        let m: Vec<i128> = q.flat().iter().map(|&v| v as i128).collect();
        let smith = arith::smith_normal_form(n, n, &m)?;
        let base = q.diag().iter().map(|v| v.rem_euclid(2)).collect();
        Ok(Self { n, smith, base })
    }

    fn factors(&self) -> impl Iterator<Item = (usize, i128)> + '_ {
        self.smith.invariants.iter().copied().enumerate().filter(|&(_, d)| d > 1)
    }

    /// Residue tuple of `U x` in the nontrivial factors.
    fn residues(&self, x: &[i128]) -> Vec<i64> {
        let n = self.n;
        self.factors()
            .map(|(i, d)| {
                let s: i128 = (0..n).map(|j| self.smith.u[i * n + j] * x[j]).sum();
                s.rem_euclid(d) as i64
            })
            .collect()
    }

    /// `c ∈ Q Zⁿ`, i.e. the class of `c` is self-conjugate.
    fn in_image(&self, c: &[i128]) -> bool {
        self.residues(c).iter().all(|&r| r == 0)
    }

    fn label_of(&self, c: &[i64]) -> Vec<i64> {
        let half: Vec<i128> = c.iter().zip(&self.base).map(|(&a, &b)| (a as i128 - b as i128).div_euclid(2)).collect();
        self.residues(&half)
    }

    fn representative(&self, label: &[i64]) -> Result<Vec<i64>> {
        let n = self.n;
        let mut s = vec![0i128; n];
        for ((i, _), &r) in self.factors().zip(label) {
            s[i] = r as i128;
        }
        (0..n)
            .map(|i| {
                let t: i128 = (0..n).map(|j| self.smith.u_inv[i * n + j] * s[j]).sum();
                i64::try_from(self.base[i] as i128 + 2 * t).map_err(|_| Error::Overflow)
            })
            .collect()
    }
}

/// One class per element of `coker Q`, in lexicographic label order.
pub fn spinc_classes(q: &QuadraticForm) -> Result<Vec<SpincClass>> {
    if !q.is_definite() {
        return Err(Error::Definiteness("definite"));
    }
    let ck = Cokernel::new(q)?;
    let orders: Vec<i128> = ck.factors().map(|(_, d)| d).collect();
    let mut labels: Vec<Vec<i64>> = vec![Vec::new()];
    for &d in &orders {
        labels = labels
            .into_iter()
            .flat_map(|l| (0..d as i64).map(move |r| {
                let mut l = l.clone();
                l.push(r);
                l
            }))
            .collect();
    }
    labels
        .into_iter()
        .map(|label| {
            let representative = ck.representative(&label)?;
            let neg: Vec<i64> = representative.iter().map(|v| -v).collect();
            let conjugate = ck.label_of(&neg);
            let c: Vec<i128> = representative.iter().map(|&v| v as i128).collect();
            let spin = ck.in_image(&c);
            Ok(SpincClass { label, representative, spin, conjugate })
        })
        .collect()
}


/// Number of elements of order at most 2 in `coker Q`.
pub fn two_torsion_count(q: &QuadraticForm) -> Result<usize> {
    let ck = Cokernel::new(q)?;
    Ok(ck.factors().filter(|&(_, d)| d % 2 == 0).fold(1, |acc, _| acc * 2))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DEntry {
    pub class: SpincClass,
    /// Characteristic covector attaining the maximum.
    pub maximizer: Vec<i64>,
    #[serde(with = "arith::serde_rational")]
    pub d: Rational,
}

#[derive(Debug, Clone, Serialize)]
pub struct DInvariantTable {
    pub rank: usize,
    pub h: i64,
    pub entries: Vec<DEntry>,
    /// Values were computed on `-Y` and negated.
    pub orientation_reversed: bool,
}

impl DInvariantTable {
    pub fn spin_entries(&self) -> impl Iterator<Item = &DEntry> {
        self.entries.iter().filter(|e| e.class.spin)
    }

    pub fn spin_min(&self) -> Option<Rational> {
        self.spin_entries().map(|e| e.d.clone()).min()
    }

    pub fn max(&self) -> Option<Rational> {
        self.entries.iter().map(|e| e.d.clone()).max()
    }

    pub fn is_conjugation_symmetric(&self) -> bool {
        let by_label: BTreeMap<&[i64], &Rational> = self.entries.iter().map(|e| (e.class.label.as_slice(), &e.d)).collect();
        self.entries.iter().all(|e| by_label.get(e.class.conjugate.as_slice()) == Some(&&e.d))
    }

    /// Table of the orientation-reversed manifold: `d(-Y, t) = -d(Y, t)`.
    pub fn reversed(&self) -> Self {
        let entries = self
            .entries
            .iter()
            .map(|e| DEntry { class: e.class.clone(), maximizer: e.maximizer.clone(), d: -e.d.clone() })
            .collect();
        Self { rank: self.rank, h: self.h, entries, orientation_reversed: !self.orientation_reversed }
    }

    /// The values as a sorted multiset.
    pub fn multiset(&self) -> Vec<Rational> {
        let mut v: Vec<Rational> = self.entries.iter().map(|e| e.d.clone()).collect();
        v.sort();
        v
    }
}

/// Correction terms of a negative-definite form's boundary, one per class:
/// `max (Q'(c,c) + n)/4` over the class.
pub fn d_invariants_of_form(q: &QuadraticForm, exec: Execution) -> Result<DInvariantTable> {
    q.require(Definiteness::Negative)?;
    let n = q.rank();
    let delta = q.delta_i64()?;
    let objective = q.scaled_dual_objective()?;
    let classes = spinc_classes(q)?;
    let entries = par::map(exec, &classes, |class| {
        let p = CosetProblem {
            objective: objective.clone(),
            offset: class.representative.clone(),
            modulus: Modulus::TwoImage(q.clone()),
        };
        let ext = coset_minimize(&p)?;
        // Q'(c,c) = -value/δ
        let d = (rat(n as i64, 1) - Rational::new(BigInt::from(ext.value), BigInt::from(delta))) / BigInt::from(4);
        Ok(DEntry { class: class.clone(), maximizer: ext.witness, d })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    Ok(DInvariantTable { rank: n, h: delta, entries, orientation_reversed: false })
}

pub fn d_invariants(g: &PlumbingGraph) -> Result<DInvariantTable> {
    d_invariants_with(g, Execution::default())
}

pub fn d_invariants_with(g: &PlumbingGraph, exec: Execution) -> Result<DInvariantTable> {
    if g.sign != Sign::Negative {
        return Err(Error::Definiteness("negative definite"));
    }
    if !g.is_tree() {
        return Err(Error::FormulaNotApplicable("plumbing graph is not a tree".into()));
    }
    let bad = g.bad_vertices();
    if bad.len() > 1 {
        let names: Vec<&str> = bad.iter().map(|&v| g.labels[v].as_str()).collect();
        return Err(Error::FormulaNotApplicable(format!(
            "{} bad vertices ({}); formula not known to apply",
            bad.len(),
            names.join(", ")
        )));
    }
    d_invariants_of_form(&g.gram, exec)
}

/// Correction terms of `Y` from whichever orientation bounds a negative-definite plumbing.
pub fn d_invariants_of_seifert(s: &SeifertData, exec: Execution) -> Result<DInvariantTable> {
    if k_invariant(s)? > 0 {
        d_invariants_with(&definite_plumbing(s)?, exec)
    } else {
        Ok(d_invariants_with(&definite_plumbing(&s.reversed())?, exec)?.reversed())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Conclusion {
    /// No negative-definite filling (of the kind the verdict covers).
    Obstructed,
    /// Every such filling has diagonal intersection form.
    DiagonalOnly,
    NoConclusion,
}

#[derive(Debug, Clone, Serialize)]
pub struct Verdict {
    pub conclusion: Conclusion,
    pub conditional: bool,
    pub text: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ObstructionReport {
    pub h: i64,
    #[serde(with = "arith::serde_rational")]
    pub spin_min: Rational,
    #[serde(with = "arith::serde_rational")]
    pub max_d: Rational,
    #[serde(with = "arith::serde_rational")]
    pub spin_bound: Rational,
    #[serde(with = "arith::serde_rational")]
    pub max_bound: Rational,
    pub unconditional: Option<Verdict>,
    pub conditional: Verdict,
}

impl ObstructionReport {
    pub fn status(&self) -> &'static str {
        match &self.unconditional {
            Some(v) if v.conclusion != Conclusion::NoConclusion => "unconditional",
            _ if self.conditional.conclusion != Conclusion::NoConclusion => "conditional",
            _ => "holds",
        }
    }

    pub fn is_obstructed(&self) -> bool {
        self.unconditional.as_ref().is_some_and(|v| v.conclusion == Conclusion::Obstructed)
    }
}

fn verdict(conclusion: Conclusion, conditional: bool, text: impl Into<String>) -> Verdict {
    Verdict { conclusion, conditional, text: text.into() }
}

pub fn obstruction_report(h: i64, t: &DInvariantTable) -> Result<ObstructionReport> {
    if h <= 0 || t.entries.len() as i64 != h || t.h != h {
        return Err(Error::Precondition(format!("table has {} classes but h = {h}", t.entries.len())));
    }
    let spin_min = t.spin_min().ok_or_else(|| Error::Precondition("no spin class".into()))?;
    let max_d = t.max().expect("nonempty table");
    let spin_bound = rat(1 - h, 4);
    let max_bound = if h % 2 == 1 { rat(h - 1, 4 * h) } else { rat(1, 4) };
    let fmt = arith::fmt_rational;

    let unconditional = match h {
        1 => Some(match spin_min.cmp(&Rational::zero()) {
            std::cmp::Ordering::Less => verdict(
                Conclusion::Obstructed,
                false,
                format!("d = {} < 0: cannot bound a negative-definite four-manifold", fmt(&spin_min)),
            ),
            std::cmp::Ordering::Equal => verdict(
                Conclusion::DiagonalOnly,
                false,
                "d = 0: the only definite pairing it may bound is diagonal",
            ),
            std::cmp::Ordering::Greater => verdict(Conclusion::NoConclusion, false, "d > 0: no conclusion"),
        }),
        3 => {
            let lo = rat(-1, 2);
            let hi = rat(1, 6);
            Some(if spin_min < lo && max_d < hi {
                verdict(
                    Conclusion::Obstructed,
                    false,
                    format!(
                        "d(t0) = {} < -1/2 and max d = {} < 1/6: cannot bound a negative-definite four-manifold",
                        fmt(&spin_min),
                        fmt(&max_d)
                    ),
                )
            } else if spin_min == lo && max_d == hi {
                verdict(
                    Conclusion::DiagonalOnly,
                    false,
                    "both determinant-three inequalities are equalities: any negative-definite filling has diagonal form",
                )
            } else {
                verdict(Conclusion::NoConclusion, false, "determinant-three inequalities hold: no conclusion")
            })
        }
        _ => None,
    };

    let hyp = "for negative-definite fillings with torsion-free H_1, if the conjectured bounds hold";
    let conditional = if spin_min < spin_bound || max_d < max_bound {
        verdict(Conclusion::Obstructed, true, format!("no such filling exists ({hyp})"))
    } else if spin_min == spin_bound || max_d == max_bound {
        verdict(Conclusion::DiagonalOnly, true, format!("Δ_{h} only ({hyp})"))
    } else {
        verdict(Conclusion::NoConclusion, true, format!("bounds hold strictly: no conclusion ({hyp})"))
    };
    Ok(ObstructionReport { h, spin_min, max_d, spin_bound, max_bound, unconditional, conditional })
}

/// `Y(-2; (2,1), (3,2), (a, a-1))`.
pub fn y_a(a: i64) -> Result<SeifertData> {
    SeifertData::new(-2, vec![(2, 1), (3, 2), (a, a - 1)])
}

/// The displayed negative-definite matrix bounded by `Y_a`.
pub fn y_a_displayed_gram(a: i64) -> QuadraticForm {
    QuadraticForm::from_rows(&[vec![-1, 1, 1, 1], vec![1, -2, 0, 0], vec![1, 0, -3, 0], vec![1, 0, 0, -a]])
        .expect("definite for a >= 7")
}

/// Negative-definite chain `-A_{k}` with weights `-2` and unit adjacency.
pub fn negative_chain(k: usize) -> PlumbingGraph {
    let weights = vec![-2; k];
    let edges: Vec<(usize, usize)> = (1..k).map(|i| (i - 1, i)).collect();
    let mut g = vec![0i64; k * k];
    for i in 0..k {
        g[i * k + i] = -2;
    }
    for &(a, b) in &edges {
        g[a * k + b] = 1;
        g[b * k + a] = 1;
    }
    PlumbingGraph {
        sign: Sign::Negative,
        weights,
        labels: (0..k).map(|i| format!("v{}", i + 1)).collect(),
        edges,
        legs: vec![(0..k).collect()],
        gram: QuadraticForm::from_flat(k, g).expect("-A_k is negative definite"),
    }
}
