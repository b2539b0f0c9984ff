//! Truncated theta series of positive-definite lattices and their duals,
//! with numerical checks of the Poisson transformation rules.
//!
//! A series over `w/2 + L` is enumerated as the coset `w + 2Zⁿ` of the Gram
//! matrix, with exponent `G(y)/4`. The dual-side series use the integer
//! objective `δ G⁻¹` and exponent `/(4δ)`, so every exponent is an exact
//! rational until evaluation.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{Signed, ToPrimitive};
use serde::ser::{SerializeMap, Serializer};
use serde::Serialize;

use crate::arith::{self, Rational};
use crate::char_search::{char_vector_cosets, CosetProblem, CosetSearch};
use crate::error::{Error, Result};
use crate::form::{is_char_vector, Definiteness, QuadraticForm};

/// Smallest imaginary part at which series are evaluated.
pub const SAFE_IM: f64 = 0.005;

/// Which lattice the series runs over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Lattice,
    Dual,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QSeries {
    pub side: Side,
    pub shift: Vec<i64>,
    /// Exponents are `norm/denominator` with `norm` an integer.
    pub denominator: i64,
    /// Truncation bound on exponents.
    pub bound: u64,
    pub counts: BTreeMap<Rational, u64>,
}

impl Serialize for QSeries {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        struct Counts<'a>(&'a BTreeMap<Rational, u64>);
        impl Serialize for Counts<'_> {
            fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
                let mut m = s.serialize_map(Some(self.0.len()))?;
                for (k, v) in self.0 {
                    m.serialize_entry(&arith::fmt_rational(k), v)?;
                }
                m.end()
            }
        }
        let mut m = s.serialize_map(Some(5))?;
        m.serialize_entry("side", &self.side)?;
        m.serialize_entry("shift", &self.shift)?;
        m.serialize_entry("denominator", &self.denominator)?;
        m.serialize_entry("bound", &self.bound)?;
        m.serialize_entry("counts", &Counts(&self.counts))?;
        m.end()
    }
}

impl QSeries {
    pub fn count(&self, exponent: &Rational) -> u64 {
        self.counts.get(exponent).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    /// Partial sum `Σ count · e^{iπ q z}`.
    pub fn evaluate(&self, z: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (q, &c) in &self.counts {
            let qn = q.numer().to_f64().unwrap_or(f64::INFINITY);
            let qd = q.denom().to_f64().unwrap_or(1.0);
            let qf = qn / qd;
            // reduce the phase exactly-ish: q·re(z) mod 2
            let phase = std::f64::consts::PI * (qf * z.re).rem_euclid(2.0);
            let mag = (-std::f64::consts::PI * qf * z.im).exp();
            acc += Complex64::from_polar(mag * c as f64, phase);
        }
        acc
    }
}

/// The integer coset problem behind a series.
#[derive(Debug, Clone)]
struct SeriesSpec {
    side: Side,
    shift: Vec<i64>,
    objective: QuadraticForm,
    offset: Vec<i64>,
    denominator: i64,
    /// `(A⁻¹)_ii · denominator / 4`, the coordinate radii squared per unit exponent.
    radii_sq: Vec<f64>,
}

impl SeriesSpec {
    fn new(g: &QuadraticForm, side: Side, w: Option<&[i64]>) -> Result<Self> {
        g.require(Definiteness::Positive)?;
        let n = g.rank();
        let shift = match w {
            Some(w) => {
                g.check_len(w)?;
                if w.iter().any(|&v| v != 0) && !is_char_vector(g, w)? {
                    return Err(Error::Precondition("shift is not a characteristic vector".into()));
                }
                w.to_vec()
            }
            None => vec![0; n],
        };
        let delta = g.delta_i64()?;
        let (objective, offset, denominator) = match side {
            Side::Lattice => (g.clone(), shift.clone(), 4),
            Side::Dual => {
                let gw = g.apply(&shift).into_iter().map(|v| i64::try_from(v).map_err(|_| Error::Overflow));
                (g.scaled_dual_objective()?, gw.collect::<Result<Vec<_>>>()?, 4 * delta)
            }
        };
        let adj = objective.adjugate();
        let det = objective.determinant().to_f64().ok_or(Error::Overflow)?;
        let radii_sq = (0..n)
            .map(|i| adj[i * n + i].to_f64().unwrap_or(f64::INFINITY) / det * denominator as f64 / 4.0)
            .collect();
        Ok(Self { side, shift, objective, offset, denominator, radii_sq })
    }

    fn series(&self, bound: u64) -> Result<QSeries> {
        let search = CosetSearch::new(&CosetProblem::mod2(self.objective.clone(), self.offset.clone()))?;
        let limit = (bound as i128).checked_mul(self.denominator as i128).ok_or(Error::Overflow)?;
        let mut counts = BTreeMap::new();
        for (_, v) in search.points_within(limit)? {
            let q = Rational::new(BigInt::from(v), BigInt::from(self.denominator));
            *counts.entry(q).or_insert(0u64) += 1;
        }
        Ok(QSeries { side: self.side, shift: self.shift.clone(), denominator: self.denominator, bound, counts })
    }

    /// Upper bound on the number of series points with exponent `<= s`.
    fn count_bound(&self, s: f64) -> f64 {
        self.radii_sq.iter().map(|r| 2.0 * (s * r).sqrt() + 1.0).product()
    }

    /// Upper bound on `Σ e^{-π t q}` over points with exponent `> bound`.
    fn tail_bound(&self, bound: u64, t: f64) -> f64 {
        let pt = std::f64::consts::PI * t;
        let b = bound as f64;
        let mut total = 0.0;
        let mut k = 0.0f64;
        loop {
            // shell (b + k, b + k + 1]
            let term = self.count_bound(b + k + 1.0) * (-pt * (b + k)).exp();
            total += term;
            let next = self.count_bound(b + k + 2.0) * (-pt * (b + k + 1.0)).exp();
            let ratio = next / term;
            if term == 0.0 {
                break;
            }
            if ratio < 1.0 && next < 1e-30 * total.max(1e-300) {
                // count growth ratios decrease, so the remainder is geometric
                total += next / (1.0 - ratio);
                break;
            }
            if ratio < 1.0 && term < 1e-300 {
                break;
            }
            k += 1.0;
        }
        total
    }

    /// Smallest power-of-two bound whose tail at `im = t` is below `tol`.
    fn auto_bound(&self, t: f64, tol: f64, floor: u64) -> u64 {
        let mut b = floor.max(4);
        while self.tail_bound(b, t) > tol && b < (1 << 40) {
            b *= 2;
        }
        b
    }
}

/// Series of `w/2 + L` up to exponent `bound`.
pub fn rep_series(g: &QuadraticForm, w: Option<&[i64]>, bound: u64) -> Result<QSeries> {
    SeriesSpec::new(g, Side::Lattice, w)?.series(bound)
}

/// Series of `w/2 + L'` (dual lattice, `w` a characteristic vector of `L`).
pub fn dual_rep_series(g: &QuadraticForm, w: Option<&[i64]>, bound: u64) -> Result<QSeries> {
    SeriesSpec::new(g, Side::Dual, w)?.series(bound)
}

/// A characteristic vector of `g` with entries in `{0, 1}`.
pub fn canonical_char_vector(g: &QuadraticForm) -> Result<Vec<i64>> {
    char_vector_cosets(g)
        .into_iter()
        .next()
        .ok_or_else(|| Error::Precondition("no characteristic vector".into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UpperHalfPoint {
    pub re: f64,
    pub im: f64,
}

impl UpperHalfPoint {
    pub fn new(re: f64, im: f64) -> Result<Self> {
        if im.is_finite() && re.is_finite() && im > 0.0 {
            Ok(Self { re, im })
        } else {
            Err(Error::UnsafePoint(im))
        }
    }

    pub fn z(self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }

    fn from_complex(z: Complex64) -> Result<Self> {
        Self::new(z.re, z.im)
    }

    pub fn require_safe(self) -> Result<Self> {
        if self.im >= SAFE_IM {
            Ok(self)
        } else {
            Err(Error::UnsafePoint(self.im))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Generator {
    S,
    T,
    TInv,
}

/// Product of generators; acts on the upper half-plane right to left.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ModularWord(pub Vec<Generator>);

impl Serialize for ModularWord {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl ModularWord {
    pub fn s() -> Self {
        Self(vec![Generator::S])
    }

    pub fn t_pow(k: i64) -> Self {
        let g = if k >= 0 { Generator::T } else { Generator::TInv };
        Self(vec![g; k.unsigned_abs() as usize])
    }

    pub fn then(mut self, other: &ModularWord) -> Self {
        self.0.extend_from_slice(&other.0);
        self
    }

    pub fn pow(&self, k: usize) -> Self {
        Self(self.0.iter().copied().cycle().take(self.0.len() * k).collect())
    }

    /// Parses words such as `ST^6S`, `(T^2S)^3`, `T^-1S`.
    pub fn parse(s: &str) -> Result<Self> {
        let chars: Vec<char> = s.chars().filter(|c| !c.is_whitespace()).collect();
        if chars == ['I'] {
            return Ok(Self(Vec::new()));
        }
        let mut pos = 0;
        let w = parse_seq(&chars, &mut pos)?;
        if pos != chars.len() {
            return Err(Error::Parse(format!("unexpected '{}' in word", chars[pos])));
        }
        Ok(w)
    }

    /// `SL_2(Z)` matrix `[a, b, c, d]`.
    pub fn matrix(&self) -> [i128; 4] {
        let mut m = [1i128, 0, 0, 1];
        for g in &self.0 {
            let h = match g {
                Generator::S => [0, -1, 1, 0],
                Generator::T => [1, 1, 0, 1],
                Generator::TInv => [1, -1, 0, 1],
            };
            m = [
                m[0] * h[0] + m[1] * h[2],
                m[0] * h[1] + m[1] * h[3],
                m[2] * h[0] + m[3] * h[2],
                m[2] * h[1] + m[3] * h[3],
            ];
        }
        m
    }

    pub fn apply(&self, z: UpperHalfPoint) -> Result<UpperHalfPoint> {
        let [a, b, c, d] = self.matrix().map(|v| v as f64);
        let z = z.z();
        UpperHalfPoint::from_complex((z * a + b) / (z * c + d))
    }
}

fn parse_int(chars: &[char], pos: &mut usize) -> Result<i64> {
    let start = *pos;
    if *pos < chars.len() && (chars[*pos] == '-' || chars[*pos] == '+') {
        *pos += 1;
    }
    while *pos < chars.len() && chars[*pos].is_ascii_digit() {
        *pos += 1;
    }
    let text: String = chars[start..*pos].iter().collect();
    text.parse().map_err(|_| Error::Parse(format!("bad exponent '{text}'")))
}

fn parse_seq(chars: &[char], pos: &mut usize) -> Result<ModularWord> {
    let mut out = ModularWord::default();
    while *pos < chars.len() && chars[*pos] != ')' {
        let atom = match chars[*pos] {
            'S' => {
                *pos += 1;
                ModularWord::s()
            }
            'T' => {
                *pos += 1;
                ModularWord::t_pow(1)
            }
            '(' => {
                *pos += 1;
                let inner = parse_seq(chars, pos)?;
                if chars.get(*pos) != Some(&')') {
                    return Err(Error::Parse("unbalanced parenthesis in word".into()));
                }
                *pos += 1;
                inner
            }
            c => return Err(Error::Parse(format!("unexpected '{c}' in word"))),
        };
        let atom = if chars.get(*pos) == Some(&'^') {
            *pos += 1;
            let k = parse_int(chars, pos)?;
            if atom.0 == [Generator::T] {
                ModularWord::t_pow(k)
            } else if k >= 0 {
                atom.pow(k as usize)
            } else {
                return Err(Error::Parse("negative powers only supported on T".into()));
            }
        } else {
            atom
        };
        out = out.then(&atom);
    }
    Ok(out)
}

impl fmt::Display for ModularWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "I");
        }
        let mut i = 0;
        while i < self.0.len() {
            let g = self.0[i];
            let mut j = i;
            while j < self.0.len() && self.0[j] == g {
                j += 1;
            }
            let run = j - i;
            match g {
                Generator::S => (0..run).try_for_each(|_| write!(f, "S"))?,
                Generator::T if run == 1 => write!(f, "T")?,
                Generator::T => write!(f, "T^{run}")?,
                Generator::TInv => write!(f, "T^-{run}")?,
            }
            i = j;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThetaValue {
    pub re: f64,
    pub im: f64,
    pub tail: f64,
    pub bound: u64,
}

impl ThetaValue {
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

fn eval_spec(spec: &SeriesSpec, z: UpperHalfPoint, bound: u64, tol: f64) -> Result<ThetaValue> {
    let z = z.require_safe()?;
    let tail = spec.tail_bound(bound, z.im);
    if tail > tol {
        return Err(Error::Tolerance { tail, tol, bound });
    }
    let v = spec.series(bound)?.evaluate(z.z());
    Ok(ThetaValue { re: v.re, im: v.im, tail, bound })
}

/// `θ^w` of the lattice (or its dual) at `z`, truncated at `bound`.
pub fn eval_theta(g: &QuadraticForm, side: Side, w: Option<&[i64]>, z: UpperHalfPoint, bound: u64, tol: f64) -> Result<ThetaValue> {
    eval_spec(&SeriesSpec::new(g, side, w)?, z, bound, tol)
}

/// As [`eval_theta`], raising the bound until the tail is below `tol`.
pub fn eval_theta_auto(g: &QuadraticForm, side: Side, w: Option<&[i64]>, z: UpperHalfPoint, min_bound: u64, tol: f64) -> Result<ThetaValue> {
    let spec = SeriesSpec::new(g, side, w)?;
    let z = z.require_safe()?;
    let b = spec.auto_bound(z.im, tol, min_bound);
    eval_spec(&spec, z, b, tol)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Identity {
    /// `θ_L(Sz) = (z/i)^{n/2} δ^{-1/2} θ_{L'}(z)`
    #[serde(rename = "p1")]
    P1,
    /// `θ_L(TSz) = (z/i)^{n/2} δ^{-1/2} θ^w_{L'}(z)`
    #[serde(rename = "p2")]
    P2,
    /// `θ_{L'}(T^δ S z) = (z/i)^{n/2} δ^{1/2} θ^w_L(z)`, `δ` odd
    #[serde(rename = "p2p")]
    P2Prime,
}

impl Identity {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "p1" => Ok(Self::P1),
            "p2" => Ok(Self::P2),
            "p2p" | "p2'" => Ok(Self::P2Prime),
            _ => Err(Error::Parse(format!("unknown identity '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct IdentityCheck {
    pub identity: Identity,
    pub word: ModularWord,
    pub z: UpperHalfPoint,
    pub lhs: ThetaValue,
    pub rhs: ThetaValue,
    pub residual: f64,
    /// Tail budget of both sides, scaled by the prefactor on the right.
    pub tail: f64,
    pub verified: bool,
}

fn prefactor(z: Complex64, n: usize, delta_pow: f64) -> Complex64 {
    let zi = z / Complex64::i();
    (zi.ln() * (n as f64 / 2.0)).exp() * delta_pow
}

pub fn check_identity(id: Identity, g: &QuadraticForm, z: UpperHalfPoint, bound: u64, tol: f64) -> Result<IdentityCheck> {
    g.require(Definiteness::Positive)?;
    let n = g.rank();
    let delta = g.delta_i64()?;
    let w = canonical_char_vector(g)?;
    let d = delta as f64;
    let (word, lhs_side, rhs_side, rhs_w, pow) = match id {
        Identity::P1 => (ModularWord::s(), Side::Lattice, Side::Dual, None, d.powf(-0.5)),
        Identity::P2 => (ModularWord::parse("TS")?, Side::Lattice, Side::Dual, Some(w.as_slice()), d.powf(-0.5)),
        Identity::P2Prime => {
            if delta % 2 == 0 {
                return Err(Error::Precondition("identity p2' needs odd determinant".into()));
            }
            (ModularWord::t_pow(delta).then(&ModularWord::s()), Side::Dual, Side::Lattice, Some(w.as_slice()), d.sqrt())
        }
    };
    let wz = word.apply(z)?;
    let lhs = eval_theta(g, lhs_side, None, wz, bound, tol)?;
    let rhs_raw = eval_theta(g, rhs_side, rhs_w, z, bound, tol)?;
    let p = prefactor(z.z(), n, pow);
    let r = rhs_raw.value() * p;
    let rhs = ThetaValue { re: r.re, im: r.im, tail: rhs_raw.tail * p.norm(), bound };
    let residual = (lhs.value() - rhs.value()).norm();
    let tail = lhs.tail + rhs.tail;
    Ok(IdentityCheck { identity: id, word, z, lhs, rhs, residual, tail, verified: residual + tail < tol })
}

#[derive(Debug, Clone, Serialize)]
pub struct RatioResidual {
    pub word: ModularWord,
    /// 1 for `R`, 8 for `R^8`.
    pub power: u32,
    pub image: UpperHalfPoint,
    pub residual: f64,
    /// `R^power(Wz) / R^power(z)`; 1 when invariant.
    pub scalar_re: f64,
    pub scalar_im: f64,
    pub error_bound: f64,
    pub within_tol: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct RatioTable {
    pub z: UpperHalfPoint,
    pub delta: i64,
    pub rows: Vec<RatioResidual>,
}

impl RatioTable {
    pub fn all_within_tol(&self) -> bool {
        self.rows.iter().all(|r| r.within_tol)
    }
}

/// The four words under which `R` (first two) and `R^8` (last two) should be invariant.
pub fn ratio_words(delta: i64) -> Vec<(ModularWord, u32)> {
    let s = ModularWord::s();
    let t2s = ModularWord::t_pow(2).then(&s);
    vec![
        (ModularWord::t_pow(2), 1),
        (s.clone().then(&ModularWord::t_pow(2 * delta)).then(&s), 1),
        (t2s.pow(delta as usize), 8),
        (s.clone()
            .then(&ModularWord::t_pow(delta - 1))
            .then(&s)
            .then(&ModularWord::t_pow(delta - 1))
            .then(&s), 8),
    ]
}

fn ratio_at(g1: &SeriesSpec, g2: &SeriesSpec, z: UpperHalfPoint, min_bound: u64, tol: f64) -> Result<(Complex64, f64)> {
    let a = eval_spec(g1, z, g1.auto_bound(z.require_safe()?.im, tol, min_bound), tol)?;
    let b = eval_spec(g2, z, g2.auto_bound(z.im, tol, min_bound), tol)?;
    let bv = b.value();
    if bv.norm() < 1e-8 {
        return Err(Error::Precondition(format!("denominator theta too small at {:?}", z)));
    }
    let r = a.value() / bv;
    // first-order error of the quotient
    let err = a.tail / bv.norm() + r.norm() * b.tail / bv.norm();
    Ok((r, err))
}

/// Residuals of `R = θ_{G1}/θ_{G2}` on the invariance words for `δ`.
pub fn check_ratio_symmetries(g1: &QuadraticForm, g2: &QuadraticForm, z: UpperHalfPoint, min_bound: u64, tol: f64) -> Result<RatioTable> {
    g1.require(Definiteness::Positive)?;
    g2.require(Definiteness::Positive)?;
    if g1.rank() != g2.rank() {
        return Err(Error::Dimension { expected: g1.rank(), found: g2.rank() });
    }
    let delta = g1.delta_i64()?;
    if g2.delta_i64()? != delta || delta % 2 == 0 {
        return Err(Error::Precondition("forms need the same odd determinant".into()));
    }
    let s1 = SeriesSpec::new(g1, Side::Lattice, None)?;
    let s2 = SeriesSpec::new(g2, Side::Lattice, None)?;
    // budget per evaluation, well under the residual tolerance
    let eval_tol = tol * 1e-4;
    let (r0, e0) = ratio_at(&s1, &s2, z.require_safe()?, min_bound, eval_tol)?;
    let mut rows = Vec::new();
    for (word, power) in ratio_words(delta) {
        let image = word.apply(z)?.require_safe()?;
        let (r1, e1) = ratio_at(&s1, &s2, image, min_bound, eval_tol)?;
        let (a, b, ea, eb) = if power == 1 {
            (r1, r0, e1, e0)
        } else {
            (r1.powu(8), r0.powu(8), 8.0 * e1 * r1.norm().powi(7), 8.0 * e0 * r0.norm().powi(7))
        };
        let residual = (a - b).norm();
        let scalar = a / b;
        let error_bound = ea + eb;
        rows.push(RatioResidual {
            word,
            power,
            image,
            residual,
            scalar_re: scalar.re,
            scalar_im: scalar.im,
            error_bound,
            within_tol: residual + error_bound < tol,
        });
    }
    Ok(RatioTable { z, delta, rows })
}

impl fmt::Display for QSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<String> = self.counts.iter().map(|(k, v)| format!("{}:{}", arith::fmt_rational(k), v)).collect();
        write!(f, "{{{}}}", terms.join(", "))
    }
}

/// `true` if every positive exponent has an even count, as `x ↦ -x` (or
/// `x ↦ -x - w`) forces.
pub fn has_even_symmetry(s: &QSeries) -> bool {
    s.counts.iter().all(|(q, &c)| !q.is_positive() || c % 2 == 0)
}
