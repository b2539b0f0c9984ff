//! Four-ball genus certificates for two families of Montesinos knots, built
//! from genus-one Seifert matrices, double branched covers, and the
//! definite-bounding obstructions of the plumbing and embedding modules.

use num_integer::{Integer, Roots};
use serde::Serialize;

use crate::embedding;
use crate::error::{Error, Result};
use crate::plumbing::{definite_plumbing, k_invariant, SeifertData};

/// `K(p, -q, -r)` with odd `q, r > p > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PretzelKnot {
    pub p: i64,
    pub q: i64,
    pub r: i64,
}

impl PretzelKnot {
    pub fn new(p: i64, q: i64, r: i64) -> Result<Self> {
        if [p, q, r].iter().any(|v| v.rem_euclid(2) != 1) {
            return Err(Error::Precondition(format!("K({p},-{q},-{r}): p, q, r must be odd")));
        }
        if p <= 0 {
            return Err(Error::Precondition(format!("K({p},-{q},-{r}): need p > 0")));
        }
        if q <= p || r <= p {
            return Err(Error::Precondition(format!("K({p},-{q},-{r}): need q, r > p")));
        }
        Ok(Self { p, q, r })
    }

    /// `pq + pr - qr`
    pub fn l_squared(&self) -> i64 {
        self.p * self.q + self.p * self.r - self.q * self.r
    }

    pub fn montesinos(&self) -> Montesinos {
        Montesinos { e: 2, pairs: vec![(self.p, 1), (self.q, self.q - 1), (self.r, self.r - 1)] }
    }

    pub fn name(&self) -> String {
        format!("K({},-{},-{})", self.p, self.q, self.r)
    }
}

/// `K_{q,r} = M(2; (qr-1, q), (r+1, r), (r+1, r))`, odd `q >= 3`, even `r >= 2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct KqrKnot {
    pub q: i64,
    pub r: i64,
}

impl KqrKnot {
    pub fn new(q: i64, r: i64) -> Result<Self> {
        if q < 3 || q % 2 == 0 {
            return Err(Error::Precondition(format!("K_{{{q},{r}}}: q must be odd and at least 3")));
        }
        if r < 2 || r % 2 != 0 {
            return Err(Error::Precondition(format!("K_{{{q},{r}}}: r must be even and at least 2")));
        }
        Ok(Self { q, r })
    }

    pub fn montesinos(&self) -> Montesinos {
        let (q, r) = (self.q, self.r);
        Montesinos { e: 2, pairs: vec![(q * r - 1, q), (r + 1, r), (r + 1, r)] }
    }

    pub fn signature(&self) -> i64 {
        1 - self.q
    }

    /// `(r+1)(2 + q(1-r))`, the `k` of the double branched cover.
    pub fn cover_k(&self) -> i64 {
        (self.r + 1) * (2 + self.q * (1 - self.r))
    }

    pub fn name(&self) -> String {
        format!("K_{{{},{}}}", self.q, self.r)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Montesinos {
    pub e: i64,
    /// `(α_i, β_i)`; `β_i` may be any integer coprime to `α_i`.
    pub pairs: Vec<(i64, i64)>,
}

/// `M(e; pairs)` is covered by `Y(-e; pairs)`, normalized.
pub fn double_branched_cover(m: &Montesinos) -> Result<SeifertData> {
    SeifertData::normalized(-m.e, &m.pairs)
}

/// Rejects links: the cover's `|H_1|` is the determinant, odd exactly for knots.
pub fn require_knot(m: &Montesinos) -> Result<SeifertData> {
    let y = double_branched_cover(m)?;
    let k = k_invariant(&y)?;
    if k % 2 == 0 {
        return Err(Error::Precondition(format!("determinant {} is even: a link, not a knot", k.abs())));
    }
    Ok(y)
}

pub type Matrix2 = [[i64; 2]; 2];

/// Genus-one Seifert pairing: `M - Mᵀ = [[0, 1], [-1, 0]]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SeifertMatrix2(pub Matrix2);

impl SeifertMatrix2 {
    pub fn new(m: Matrix2) -> Result<Self> {
        if m[0][1] - m[1][0] != 1 {
            return Err(Error::Precondition("M - Mᵀ must be [[0,1],[-1,0]]".into()));
        }
        Ok(Self(m))
    }
}

pub fn pretzel_seifert_matrix(k: &PretzelKnot) -> SeifertMatrix2 {
    let (p, q, r) = (k.p, k.q, k.r);
    SeifertMatrix2::new([[(p - r) / 2, (p + 1) / 2], [(p - 1) / 2, (p - q) / 2]]).expect("pretzel matrix is a Seifert pairing")
}

/// Signature of `M + Mᵀ`.
pub fn signature_from_seifert(m: &Matrix2) -> Result<i64> {
    let (a, b, d) = (2 * m[0][0], m[0][1] + m[1][0], 2 * m[1][1]);
    let det = a as i128 * d as i128 - b as i128 * b as i128;
    match det.signum() {
        0 => Err(Error::Degenerate),
        -1 => Ok(0),
        _ => Ok(if a > 0 { 2 } else { -2 }),
    }
}

fn normalize2(x: i64, y: i64) -> Option<[i64; 2]> {
    let g = x.gcd(&y);
    if g == 0 {
        return None;
    }
    let (x, y) = (x / g, y / g);
    Some(if x < 0 || (x == 0 && y < 0) { [-x, -y] } else { [x, y] })
}

/// Primitive nonzero `x` with `xᵀ M x = 0`, if any. Of the (at most two)
/// isotropic lines, the lexicographically larger normalized generator.
pub fn algebraically_slice_genus1(m: &Matrix2) -> Option<[i64; 2]> {
    let (a, b, c) = (m[0][0] as i128, (m[0][1] + m[1][0]) as i128, m[1][1] as i128);
    let disc = b * b - 4 * a * c;
    if disc < 0 {
        return None;
    }
    let s = disc.sqrt();
    if s * s != disc {
        return None;
    }
    let conv = |v: i128| i64::try_from(v).ok();
    let candidates: Vec<(i128, i128)> = if a != 0 {
        vec![(-b + s, 2 * a), (-b - s, 2 * a)]
    } else {
        vec![(1, 0), (-c, b)]
    };
    candidates
        .into_iter()
        .filter_map(|(x, y)| normalize2(conv(x)?, conv(y)?))
        .inspect(|v| debug_assert_eq!(quad(m, v), 0))
        .max()
}

fn quad(m: &Matrix2, x: &[i64; 2]) -> i128 {
    let (a, b, c) = (m[0][0] as i128, (m[0][1] + m[1][0]) as i128, m[1][1] as i128);
    let (x, y) = (x[0] as i128, x[1] as i128);
    a * x * x + b * x * y + c * y * y
}

/// The obstruction for covers `Y(-2; (α1, β1), (α2, α2-1), (α3, α3-1))`:
/// with `α2, α3 >= α1/β1`, `α3 >= 3` and `k < 0`, no negative-definite
/// filling exists unless `β1 = 1` and `min(α2, α3) = α1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LegCriterion {
    pub cover: SeifertData,
    /// Index of the fibre playing `(α1, β1)`.
    pub first: usize,
    pub alpha_ratio_ok: bool,
    pub alpha3_at_least_3: bool,
    pub k_negative: bool,
    pub exception: bool,
    pub obstructed: bool,
}

pub fn leg_criterion(y: &SeifertData) -> Result<LegCriterion> {
    if y.e != -2 || y.fibers.len() != 3 {
        return Err(Error::Precondition(format!("{y} is not of the form Y(-2; three fibres)")));
    }
    let k = k_invariant(y)?;
    let mut best: Option<LegCriterion> = None;
    for first in 0..3 {
        let others: Vec<(i64, i64)> = (0..3).filter(|&i| i != first).map(|i| y.fibers[i]).collect();
        if others.iter().any(|&(a, b)| b != a - 1) {
            continue;
        }
        let (a1, b1) = y.fibers[first];
        let alpha_ratio_ok = others.iter().all(|&(a, _)| a * b1 >= a1);
        let alpha3_at_least_3 = others.iter().any(|&(a, _)| a >= 3);
        let exception = b1 == 1 && others.iter().map(|&(a, _)| a).min() == Some(a1);
        let k_negative = k < 0;
        let obstructed = alpha_ratio_ok && alpha3_at_least_3 && k_negative && !exception;
        let c = LegCriterion { cover: y.clone(), first, alpha_ratio_ok, alpha3_at_least_3, k_negative, exception, obstructed };
        if best.as_ref().is_none_or(|b| !b.obstructed && c.obstructed) {
            best = Some(c);
        }
    }
    best.ok_or_else(|| Error::Precondition(format!("{y} needs two fibres of the form (α, α-1)")))
}

/// One named, replayable step of a genus argument.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "step", rename_all = "snake_case")]
pub enum Certificate {
    Signature { seifert: Matrix2, value: i64, holds: bool },
    /// Signature imported as a known fact, not computed here.
    SignatureInput { value: i64, given: bool },
    SliceWitness { seifert: Matrix2, witness: [i64; 2], holds: bool },
    CoverK { knot: Montesinos, cover: SeifertData, k: i128, holds: bool },
    CoverObstruction { criterion: LegCriterion, holds: bool },
    /// The cover's positive-definite plumbing embeds in no cubic lattice.
    CoverNonEmbeddable { cover: SeifertData, embeddings: usize, holds: bool },
    MurasugiBound { sigma: i64, lower: i64, holds: bool },
    SurfaceUpperBound { genus: i64, surface: String, given: bool },
}

impl Certificate {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Signature { .. } => "signature",
            Self::SignatureInput { .. } => "signature_input",
            Self::SliceWitness { .. } => "slice_witness",
            Self::CoverK { .. } => "cover_k",
            Self::CoverObstruction { .. } => "cover_obstruction",
            Self::CoverNonEmbeddable { .. } => "cover_non_embeddable",
            Self::MurasugiBound { .. } => "murasugi_bound",
            Self::SurfaceUpperBound { .. } => "surface_upper_bound",
        }
    }

    pub fn holds(&self) -> bool {
        match self {
            Self::Signature { holds, .. }
            | Self::SliceWitness { holds, .. }
            | Self::CoverK { holds, .. }
            | Self::CoverObstruction { holds, .. }
            | Self::CoverNonEmbeddable { holds, .. }
            | Self::MurasugiBound { holds, .. } => *holds,
            Self::SignatureInput { .. } | Self::SurfaceUpperBound { .. } => true,
        }
    }

    /// Recomputes the step from its recorded inputs.
    pub fn replay(&self) -> Result<bool> {
        Ok(match self {
            Self::Signature { seifert, value, .. } => signature_from_seifert(seifert)? == *value,
            Self::SignatureInput { .. } | Self::SurfaceUpperBound { .. } => true,
            Self::SliceWitness { seifert, witness, .. } => *witness != [0, 0] && quad(seifert, witness) == 0,
            Self::CoverK { knot, cover, k, .. } => double_branched_cover(knot)? == *cover && k_invariant(cover)? == *k,
            Self::CoverObstruction { criterion, .. } => leg_criterion(&criterion.cover)?.obstructed,
            Self::CoverNonEmbeddable { cover, .. } => {
                let g = definite_plumbing(cover)?;
                g.gram.is_definite() && embedding::find_embeddings(&g.gram, None)?.is_empty()
            }
            Self::MurasugiBound { sigma, lower, .. } => *lower == (sigma.abs() + 1) / 2,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GenusReport {
    pub knot: String,
    pub lower: i64,
    pub upper: i64,
    /// `g*` when the bounds meet.
    pub genus: Option<i64>,
    pub certificates: Vec<Certificate>,
}

impl GenusReport {
    pub fn chain_valid(&self) -> bool {
        self.certificates.iter().all(Certificate::holds)
    }

    pub fn certificate(&self, name: &str) -> Option<&Certificate> {
        self.certificates.iter().find(|c| c.name() == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct GenusOptions {
    /// Also certify non-embeddability of the cover's plumbing by exhaustive search.
    pub embedding_check: bool,
}

fn cover_certificates(m: &Montesinos, opts: GenusOptions) -> Result<(SeifertData, i128, Vec<Certificate>)> {
    let cover = require_knot(m)?;
    let k = k_invariant(&cover)?;
    let mut certs = vec![Certificate::CoverK { knot: m.clone(), cover: cover.clone(), k, holds: true }];
    if k != 0 {
        let criterion = leg_criterion(&cover)?;
        let holds = criterion.obstructed;
        certs.push(Certificate::CoverObstruction { criterion, holds });
        if opts.embedding_check && k < 0 {
            let g = definite_plumbing(&cover)?;
            let n = embedding::find_embeddings(&g.gram, None)?.len();
            certs.push(Certificate::CoverNonEmbeddable { cover: cover.clone(), embeddings: n, holds: n == 0 });
        }
    }
    Ok((cover, k, certs))
}

pub fn pretzel_genus_report(knot: &PretzelKnot, opts: GenusOptions) -> Result<GenusReport> {
    let l2 = knot.l_squared();
    let l = if l2 >= 0 { l2.sqrt() } else { -1 };
    if l < 0 || l * l != l2 {
        return Err(Error::Precondition(format!("{}: pq + pr - qr = {l2} is not a square", knot.name())));
    }
    let m = pretzel_seifert_matrix(knot).0;
    let sigma = signature_from_seifert(&m)?;
    let mut certs = vec![Certificate::Signature { seifert: m, value: sigma, holds: sigma == 0 }];
    let surface_witness = normalize2(knot.p - l, knot.r - knot.p);
    let witness = algebraically_slice_genus1(&m);
    if let Some(w) = witness {
        certs.push(Certificate::SliceWitness { seifert: m, witness: w, holds: quad(&m, &w) == 0 });
    }
    debug_assert!(surface_witness.is_some_and(|w| quad(&m, &w) == 0));
    certs.push(Certificate::MurasugiBound { sigma, lower: (sigma.abs() + 1) / 2, holds: true });
    let (_, k, cover_certs) = cover_certificates(&knot.montesinos(), opts)?;
    certs.extend(cover_certs);
    certs.push(Certificate::SurfaceUpperBound { genus: 1, surface: "genus-one Seifert surface".into(), given: true });
    let obstructed = k != 0 && certs.iter().all(Certificate::holds);
    if k != 0 && k != -(l2 as i128) {
        return Err(Error::Precondition(format!("cover k = {k} disagrees with -(pq+pr-qr) = {}", -l2)));
    }
    let lower = if obstructed { 1 } else { 0 };
    Ok(GenusReport { knot: knot.name(), lower, upper: 1, genus: (lower == 1).then_some(1), certificates: certs })
}

pub fn kqr_genus_report(knot: &KqrKnot, opts: GenusOptions) -> Result<GenusReport> {
    let sigma = knot.signature();
    let murasugi = (sigma.abs() + 1) / 2;
    let mut certs = vec![
        Certificate::SignatureInput { value: sigma, given: true },
        Certificate::MurasugiBound { sigma, lower: murasugi, holds: true },
    ];
    let (_, k, cover_certs) = cover_certificates(&knot.montesinos(), opts)?;
    if k != knot.cover_k() as i128 {
        return Err(Error::Precondition(format!("cover k = {k} disagrees with (r+1)(2+q(1-r)) = {}", knot.cover_k())));
    }
    certs.extend(cover_certs);
    let upper = (knot.q + 1) / 2;
    certs.push(Certificate::SurfaceUpperBound { genus: upper, surface: "spanning surface of genus (q+1)/2".into(), given: true });
    // equality in |σ|/2 would make the cover bound a negative-definite manifold
    let lower = if certs.iter().all(Certificate::holds) { murasugi + 1 } else { murasugi };
    Ok(GenusReport {
        knot: knot.name(),
        lower,
        upper,
        genus: (lower == upper).then_some(upper),
        certificates: certs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seifert_matrices() {
        assert_eq!(pretzel_seifert_matrix(&PretzelKnot::new(3, 5, 7).unwrap()).0, [[-2, 2], [1, -1]]);
        assert_eq!(pretzel_seifert_matrix(&PretzelKnot::new(1, 3, 3).unwrap()).0, [[-1, 1], [0, -1]]);
        assert!(SeifertMatrix2::new([[0, 0], [0, 0]]).is_err());
    }

    #[test]
    fn signatures() {
        assert_eq!(signature_from_seifert(&[[-2, 2], [1, -1]]).unwrap(), 0);
        assert_eq!(signature_from_seifert(&[[-1, 0], [0, -1]]).unwrap(), -2);
        assert_eq!(signature_from_seifert(&[[1, 1], [0, 1]]).unwrap(), 2);
        assert!(signature_from_seifert(&[[0, 1], [-1, 0]]).is_err());
    }

    #[test]
    fn slice_witnesses() {
        assert_eq!(algebraically_slice_genus1(&[[-2, 2], [1, -1]]), Some([1, 2]));
        assert_eq!(algebraically_slice_genus1(&[[-1, 1], [0, -1]]), None);
        assert_eq!(algebraically_slice_genus1(&[[-1, 0], [0, 1]]), Some([1, 1]));
        assert_eq!(algebraically_slice_genus1(&[[0, 1], [0, 3]]), Some([3, -1]));
    }

    #[test]
    fn covers() {
        let y = double_branched_cover(&Montesinos { e: 2, pairs: vec![(3, 1), (5, 4), (7, 6)] }).unwrap();
        assert_eq!(y, SeifertData::new(-2, vec![(3, 1), (5, 4), (7, 6)]).unwrap());
        let y = double_branched_cover(&Montesinos { e: 0, pairs: vec![(3, 1), (5, 4), (7, 6)] }).unwrap();
        assert_eq!(y.e, 0);
        let y = double_branched_cover(&KqrKnot::new(3, 2).unwrap().montesinos()).unwrap();
        assert_eq!(y, SeifertData::new(-2, vec![(5, 3), (3, 2), (3, 2)]).unwrap());
    }

    #[test]
    fn alternative_kqr_presentation_has_same_cover() {
        let k = KqrKnot::new(3, 4).unwrap();
        let (q, r) = (k.q, k.r);
        let other = Montesinos { e: 0, pairs: vec![(q * r - 1, q), (r + 1, -1), (r + 1, -1)] };
        assert_eq!(double_branched_cover(&other).unwrap(), double_branched_cover(&k.montesinos()).unwrap());
    }

    #[test]
    fn links_rejected() {
        assert!(require_knot(&Montesinos { e: 0, pairs: vec![(2, 1), (2, 1), (2, 1)] }).is_err());
    }

    #[test]
    fn pretzel_report() {
        let r = pretzel_genus_report(&PretzelKnot::new(3, 5, 7).unwrap(), GenusOptions::default()).unwrap();
        assert_eq!(r.genus, Some(1));
        assert!(r.chain_valid());
        assert!(matches!(r.certificate("cover_k"), Some(Certificate::CoverK { k: -1, .. })));
        assert!(matches!(r.certificate("slice_witness"), Some(Certificate::SliceWitness { witness: [1, 2], .. })));
        for c in &r.certificates {
            assert_eq!(c.replay().unwrap(), c.holds(), "{}", c.name());
        }
    }

    #[test]
    fn kqr_report() {
        let r = kqr_genus_report(&KqrKnot::new(3, 2).unwrap(), GenusOptions::default()).unwrap();
        assert_eq!(r.genus, Some(2));
        assert!(r.chain_valid());
    }

    #[test]
    fn family_rejections() {
        assert!(PretzelKnot::new(1, 1, 1).is_err());
        assert!(PretzelKnot::new(2, 5, 7).is_err());
        assert!(KqrKnot::new(4, 2).is_err());
        assert!(KqrKnot::new(3, 3).is_err());
        // 5·7 + 5·9 - 63 = 17 is not a square
        assert!(pretzel_genus_report(&PretzelKnot::new(5, 7, 9).unwrap(), GenusOptions::default()).is_err());
    }

    #[test]
    fn l_squared_never_vanishes_for_odd_parameters() {
        // pq + pr = qr would force r = pq/(q - p), odd over even
        for p in (1..30).step_by(2) {
            for q in (p + 2..60).step_by(2) {
                for r in (p + 2..60).step_by(2) {
                    assert_ne!(PretzelKnot::new(p, q, r).unwrap().l_squared(), 0);
                }
            }
        }
    }
}
