use std::io::{self, Read, Write};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use quadform::campaign::{check_form, run_campaign, CampaignSpec, Check};
use quadform::embedding::{bounding_verdict, classify_rigidity_with, trace_cap};
use quadform::equivalence::equivalence;
use quadform::knots::{kqr_genus_report, pretzel_genus_report, GenusOptions, GenusReport, KqrKnot, PretzelKnot};
use quadform::par::{self, Execution};
use quadform::plumbing::{d_invariants_of_form, d_invariants_of_seifert, definite_plumbing, k_invariant, obstruction_report, SeifertData};
use quadform::reduction::{enumerate_forms_with, reduce_rank2, MAX_ENUM_RANK};
use quadform::report::{Status, Subject, VerdictRecord};
use quadform::theta::{check_identity, check_ratio_symmetries, dual_rep_series, rep_series, Identity, UpperHalfPoint};
use quadform::{Error, QuadraticForm, Sign};

#[derive(Parser, Debug)]
#[command(name = "quadform", version, about = "Exact tools for definite integral quadratic forms")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Exit with status 1 if any verdict is "violated".
    #[arg(long, global = true)]
    assert: bool,

    /// Worker threads for data-parallel steps.
    #[arg(long, global = true, value_name = "N")]
    jobs: Option<usize>,
}

#[derive(Args, Debug, Clone)]
struct GramArg {
    /// Gram matrix: a file, `-` for stdin, or an inline JSON array of rows.
    #[arg(long, value_name = "FILE|-")]
    gram: String,
}

#[derive(Args, Debug, Clone)]
struct DataArg {
    /// Seifert data `e;(a,b),(a,b),...`.
    #[arg(long, value_name = "DATA", allow_hyphen_values = true)]
    data: String,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SignArg {
    Positive,
    Negative,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SideArg {
    Lattice,
    Dual,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Reduced representative of a form and the change of basis reaching it.
    Reduce(GramArg),
    /// Every equivalence class of a given rank and determinant.
    Enumerate {
        #[arg(long)]
        rank: usize,
        #[arg(long)]
        det: i64,
        #[arg(long, value_enum, default_value = "negative")]
        sign: SignArg,
    },
    /// Characteristic vector inequality on a negative definite form.
    CheckConjectureVec(GramArg),
    /// Characteristic covector inequality on a negative definite form.
    CheckConjectureCovec(GramArg),
    /// Strong inequality on all four cosets of a negative rank-2 form.
    CheckRank2(GramArg),
    /// Vector/covector dichotomy on a positive determinant-3 form.
    CheckDet3(GramArg),
    /// Cubic-lattice embeddings and rigidity of a positive definite form.
    Embed {
        #[command(flatten)]
        gram: GramArg,
        /// Largest ambient dimension searched (defaults to the trace).
        #[arg(long)]
        max_dim: Option<usize>,
    },
    /// Truncated theta series.
    Theta {
        #[command(flatten)]
        gram: GramArg,
        #[arg(long, value_enum, default_value = "lattice")]
        side: SideArg,
        /// Shift vector `w`, comma separated; the series runs over `w/2 + L`.
        #[arg(long, allow_hyphen_values = true)]
        shift: Option<String>,
        #[arg(long, default_value_t = 20)]
        bound: u64,
    },
    /// Numerical check of a theta transformation identity.
    ThetaCheck {
        #[command(flatten)]
        gram: GramArg,
        /// p1, p2 or p2p; ignored with --pair.
        #[arg(long, default_value = "p1")]
        identity: String,
        /// Second form; checks the ratio symmetries of the pair instead.
        #[arg(long, value_name = "FILE|-")]
        pair: Option<String>,
        /// Evaluation point `re,im`.
        #[arg(long, default_value = "0,2", allow_hyphen_values = true)]
        z: String,
        #[arg(long, default_value_t = 200)]
        bound: u64,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
    /// Invariant k(Y) and the definite plumbing of a Seifert space.
    Seifert(DataArg),
    /// Correction terms from Seifert data or a negative definite Gram matrix.
    DInvariants {
        #[arg(long, value_name = "DATA", allow_hyphen_values = true, conflicts_with = "gram")]
        data: Option<String>,
        #[arg(long, value_name = "FILE|-")]
        gram: Option<String>,
    },
    /// Definite-bounding verdicts.
    Obstruct {
        /// Seifert data: verdict from correction terms.
        #[arg(long, value_name = "DATA", allow_hyphen_values = true, conflicts_with = "gram")]
        data: Option<String>,
        /// Positive definite Gram of a plumbing: verdict from embeddings.
        #[arg(long, value_name = "FILE|-", requires = "h")]
        gram: Option<String>,
        /// Order of the boundary's first homology.
        #[arg(long)]
        h: Option<i64>,
    },
    /// Four-ball genus report with certificates.
    Knot {
        #[command(subcommand)]
        family: KnotFamily,
        /// Also certify non-embeddability of the cover plumbing.
        #[arg(long)]
        embedding_check: bool,
    },
    /// Sweep a checker over every enumerated form of a family.
    Campaign {
        /// vec, covec, rank2 or det3.
        #[arg(long, alias = "conjecture")]
        check: String,
        /// Only this rank.
        #[arg(long, conflicts_with = "max_rank")]
        rank: Option<usize>,
        /// Every rank from 1 up to this one.
        #[arg(long, default_value_t = 3)]
        max_rank: usize,
        #[arg(long, default_value_t = 20)]
        det_max: i64,
        /// Run in sequence on one thread.
        #[arg(long)]
        sequential: bool,
    },
}

#[derive(Subcommand, Debug)]
enum KnotFamily {
    /// Pretzel knot K(p,-q,-r), all odd, 0 < p < q, r.
    Pretzel { p: i64, q: i64, r: i64 },
    /// Montesinos family K_{q,r}, q odd >= 3, r even >= 2.
    Kqr { q: i64, r: i64 },
}

enum Failure {
    Invalid(String),
    Precondition(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_invalid_input() {
            Failure::Invalid(e.to_string())
        } else {
            Failure::Precondition(e.to_string())
        }
    }
}

struct Output {
    records: Vec<VerdictRecord>,
    summary: String,
}

impl Output {
    fn one(record: VerdictRecord, summary: String) -> Self {
        Self { records: vec![record], summary }
    }
}

fn read_source(src: &str) -> Result<String, Failure> {
    if src == "-" {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s).map_err(|e| Failure::Invalid(format!("stdin: {e}")))?;
        Ok(s)
    } else if src.trim_start().starts_with('[') {
        Ok(src.to_string())
    } else {
        std::fs::read_to_string(src).map_err(|e| Failure::Invalid(format!("{src}: {e}")))
    }
}

fn load_form(src: &str) -> Result<QuadraticForm, Failure> {
    Ok(QuadraticForm::parse(&read_source(src)?)?)
}

fn parse_ints(s: &str) -> Result<Vec<i64>, Failure> {
    s.split(',')
        .map(|t| t.trim().parse::<i64>().map_err(|_| Failure::Invalid(format!("bad integer {t:?}"))))
        .collect()
}

fn parse_point(s: &str) -> Result<UpperHalfPoint, Failure> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let [re, im] = parts[..] else {
        return Err(Failure::Invalid(format!("point {s:?}: expected re,im")));
    };
    let num = |t: &str| t.parse::<f64>().map_err(|_| Failure::Invalid(format!("bad number {t:?}")));
    Ok(UpperHalfPoint::new(num(re)?, num(im)?)?)
}

fn exec() -> Execution {
    if cfg!(feature = "parallel") {
        Execution::Parallel
    } else {
        Execution::Sequential
    }
}

fn reduce(q: &QuadraticForm) -> Result<Output, Failure> {
    let subject = Subject::form(q);
    if q.rank() == 2 {
        let (r, p) = reduce_rank2(q)?;
        let reduced = r.to_form();
        let payload = json!({ "reduced": reduced, "transform": p.rows(), "abc": [r.a, r.b, r.c] });
        return Ok(Output::one(VerdictRecord::new(subject, "reduce", Status::Holds, payload), format!("reduced to {:?}", reduced.rows())));
    }
    if q.rank() > MAX_ENUM_RANK {
        return Err(Error::Unsupported(format!("reduction supports ranks 1..={MAX_ENUM_RANK}")).into());
    }
    let sign = if q.definiteness() == quadform::Definiteness::Negative { Sign::Negative } else { Sign::Positive };
    if !q.is_definite() {
        return Err(Error::Definiteness("definite").into());
    }
    let fam = enumerate_forms_with(q.rank(), q.delta_i64()?, sign, exec())?;
    for m in &fam.members {
        if let Some(p) = equivalence(m, q)? {
            let payload = json!({ "reduced": m, "transform": p.rows() });
            return Ok(Output::one(VerdictRecord::new(subject, "reduce", Status::Holds, payload), format!("reduced to {:?}", m.rows())));
        }
    }
    unreachable!("enumeration is complete")
}

fn enumerate(rank: usize, det: i64, sign: SignArg) -> Result<Output, Failure> {
    let sign = match sign {
        SignArg::Positive => Sign::Positive,
        SignArg::Negative => Sign::Negative,
    };
    let fam = enumerate_forms_with(rank, det, sign, exec())?;
    let count = fam.members.len();
    let records = fam
        .members
        .iter()
        .enumerate()
        .map(|(i, m)| VerdictRecord::new(Subject::form(m), "enumerate", Status::Holds, json!({ "rank": rank, "delta": det, "sign": sign, "index": i, "count": count })))
        .collect();
    Ok(Output { records, summary: format!("{count} classes of rank {rank}, determinant {det}") })
}

fn check(c: Check, q: &QuadraticForm) -> Result<Output, Failure> {
    let r = check_form(c, q)?;
    let summary = format!("{}: {}", c.operation(), serde_json::to_value(r.status).unwrap().as_str().unwrap());
    Ok(Output::one(r, summary))
}

fn embed(q: &QuadraticForm, max_dim: Option<usize>) -> Result<Output, Failure> {
    let v = classify_rigidity_with(q, max_dim)?;
    let summary = format!("{:?}: {} embeddings up to dimension {}", v.kind, v.embedding_count, max_dim.unwrap_or_else(|| trace_cap(q)));
    Ok(Output::one(VerdictRecord::new(Subject::form(q), "embed", Status::Holds, &v), summary))
}

fn theta(q: &QuadraticForm, side: SideArg, shift: Option<&str>, bound: u64) -> Result<Output, Failure> {
    let w = shift.map(parse_ints).transpose()?;
    let s = match side {
        SideArg::Lattice => rep_series(q, w.as_deref(), bound)?,
        SideArg::Dual => dual_rep_series(q, w.as_deref(), bound)?,
    };
    let summary = format!("{} vectors in {} shells", s.total(), s.counts.len());
    Ok(Output::one(VerdictRecord::new(Subject::form(q), "theta", Status::Holds, &s), summary))
}

fn verdict(ok: bool) -> Status {
    if ok {
        Status::Holds
    } else {
        Status::Violated
    }
}

fn status_name(s: Status) -> String {
    serde_json::to_value(s).unwrap().as_str().unwrap().to_string()
}

fn theta_check(q: &QuadraticForm, identity: &str, pair: Option<&QuadraticForm>, z: UpperHalfPoint, bound: u64, tol: f64) -> Result<Output, Failure> {
    if let Some(q2) = pair {
        let t = check_ratio_symmetries(q, q2, z, bound, tol)?;
        let worst = t.rows.iter().map(|r| r.residual).fold(0.0, f64::max);
        let subject = Subject::Pair { first: q.rows(), second: q2.rows() };
        let status = verdict(t.all_within_tol());
        let summary = format!("{} ratio words, worst residual {worst:.3e}: {}", t.rows.len(), status_name(status));
        return Ok(Output::one(VerdictRecord::new(subject, "theta-check", status, &t), summary));
    }
    let c = check_identity(Identity::parse(identity)?, q, z, bound, tol)?;
    let status = verdict(c.verified);
    let summary = format!("{identity}: residual {:.3e}, tail {:.3e}: {}", c.residual, c.tail, status_name(status));
    Ok(Output::one(VerdictRecord::new(Subject::form(q), "theta-check", status, &c), summary))
}

fn seifert(s: &SeifertData) -> Result<Output, Failure> {
    let k = k_invariant(s)?;
    let g = definite_plumbing(s)?;
    let payload = json!({ "data": s.to_string(), "k": k, "plumbing": g, "reversed": s.reversed().to_string() });
    let summary = format!("{s}: k = {k}, {} vertices, {:?} definite", g.weights.len(), g.sign);
    Ok(Output::one(VerdictRecord::new(Subject::Seifert { data: s.to_string() }, "seifert", Status::Holds, payload), summary))
}

fn d_invariants(data: Option<&str>, gram: Option<&str>) -> Result<Output, Failure> {
    let (subject, table) = match (data, gram) {
        (Some(d), _) => {
            let s = SeifertData::parse(d)?;
            (Subject::Seifert { data: s.to_string() }, d_invariants_of_seifert(&s, exec())?)
        }
        (None, Some(g)) => {
            let q = load_form(g)?;
            (Subject::form(&q), d_invariants_of_form(&q, exec())?)
        }
        (None, None) => return Err(Failure::Invalid("one of --data or --gram is required".into())),
    };
    let fmt = |r: Option<quadform::Rational>| r.map_or("-".into(), |v| quadform::arith::fmt_rational(&v));
    let summary = format!("{} classes, spin minimum {}, maximum {}", table.entries.len(), fmt(table.spin_min()), fmt(table.max()));
    Ok(Output::one(VerdictRecord::new(subject, "d-invariants", Status::Holds, &table), summary))
}

fn obstruct(data: Option<&str>, gram: Option<&str>, h: Option<i64>) -> Result<Output, Failure> {
    if let Some(g) = gram {
        let q = load_form(g)?;
        let v = bounding_verdict(&q, h.expect("clap enforces --h"))?;
        let summary = v.text.clone();
        return Ok(Output::one(VerdictRecord::new(Subject::form(&q), "obstruct", Status::Holds, &v), summary));
    }
    let Some(d) = data else {
        return Err(Failure::Invalid("one of --data or --gram is required".into()));
    };
    let s = SeifertData::parse(d)?;
    let table = d_invariants_of_seifert(&s, exec())?;
    let r = obstruction_report(h.unwrap_or(table.h), &table)?;
    let status = if r.is_obstructed() { Status::Obstructed } else { Status::parse(r.status()).unwrap_or(Status::Error) };
    let summary = match &r.unconditional {
        Some(v) => format!("{s}: {}", v.text),
        None => format!("{s}: {}", r.conditional.text),
    };
    Ok(Output::one(VerdictRecord::new(Subject::Seifert { data: s.to_string() }, "obstruct", status, &r), summary))
}

fn knot(family: &KnotFamily, opts: GenusOptions) -> Result<Output, Failure> {
    let rep: GenusReport = match *family {
        KnotFamily::Pretzel { p, q, r } => pretzel_genus_report(&PretzelKnot::new(p, q, r)?, opts)?,
        KnotFamily::Kqr { q, r } => kqr_genus_report(&KqrKnot::new(q, r)?, opts)?,
    };
    let status = verdict(rep.chain_valid());
    let summary = match rep.genus {
        Some(g) => format!("{}: g* = {g}", rep.knot),
        None => format!("{}: {} <= g* <= {}", rep.knot, rep.lower, rep.upper),
    };
    Ok(Output::one(VerdictRecord::new(Subject::Knot { name: rep.knot.clone() }, "knot", status, &rep), summary))
}

fn campaign(check: &str, rank: Option<usize>, max_rank: usize, det_max: i64, sequential: bool) -> Result<Output, Failure> {
    let c = Check::parse(check)?;
    let mut spec = CampaignSpec::up_to(c, max_rank, det_max);
    if let Some(r) = rank {
        spec.ranks = vec![r];
    }
    let mode = if sequential { Execution::Sequential } else { exec() };
    let (records, s) = run_campaign(&spec, mode)?;
    let summary = format!("{}: {} forms, {} violations, {} equalities", c.operation(), s.forms, s.violations, s.equalities);
    Ok(Output { records, summary })
}

fn dispatch(cmd: &Command) -> Result<Output, Failure> {
    match cmd {
        Command::Reduce(g) => reduce(&load_form(&g.gram)?),
        Command::Enumerate { rank, det, sign } => enumerate(*rank, *det, *sign),
        Command::CheckConjectureVec(g) => check(Check::Vec, &load_form(&g.gram)?),
        Command::CheckConjectureCovec(g) => check(Check::Covec, &load_form(&g.gram)?),
        Command::CheckRank2(g) => check(Check::Rank2, &load_form(&g.gram)?),
        Command::CheckDet3(g) => check(Check::Det3, &load_form(&g.gram)?),
        Command::Embed { gram, max_dim } => embed(&load_form(&gram.gram)?, *max_dim),
        Command::Theta { gram, side, shift, bound } => theta(&load_form(&gram.gram)?, *side, shift.as_deref(), *bound),
        Command::ThetaCheck { gram, identity, pair, z, bound, tol } => {
            let q2 = pair.as_deref().map(load_form).transpose()?;
            theta_check(&load_form(&gram.gram)?, identity, q2.as_ref(), parse_point(z)?, *bound, *tol)
        }
        Command::Seifert(d) => seifert(&SeifertData::parse(&d.data)?),
        Command::DInvariants { data, gram } => d_invariants(data.as_deref(), gram.as_deref()),
        Command::Obstruct { data, gram, h } => obstruct(data.as_deref(), gram.as_deref(), *h),
        Command::Knot { family, embedding_check } => knot(family, GenusOptions { embedding_check: *embedding_check }),
        Command::Campaign { check, rank, max_rank, det_max, sequential } => campaign(check, *rank, *max_rank, *det_max, *sequential),
    }
}

fn main() -> ExitCode {
    let cli = Cli::try_parse().unwrap_or_else(|e| e.exit());
    let result = par::with_jobs(cli.jobs, || dispatch(&cli.command));
    match result {
        Ok(out) => {
            let stdout = io::stdout();
            let mut w = io::BufWriter::new(stdout.lock());
            for r in &out.records {
                if writeln!(w, "{}", r.to_line()).is_err() {
                    return ExitCode::from(1);
                }
            }
            if w.flush().is_err() {
                return ExitCode::from(1);
            }
            eprintln!("{}", out.summary);
            if cli.assert && out.records.iter().any(VerdictRecord::is_violation) {
                eprintln!("assertion failed: violated verdict");
                return ExitCode::from(1);
            }
            ExitCode::SUCCESS
        }
        Err(Failure::Invalid(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Precondition(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(3)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use quadform::equivalence::are_equivalent;

    #[test]
    fn parses_points_and_shifts() {
        assert!(parse_point("0,2").is_ok());
        assert!(matches!(parse_point("0"), Err(Failure::Invalid(_))));
        assert_eq!(parse_ints("1,-1, 0").ok(), Some(vec![1, -1, 0]));
    }

    #[test]
    fn reduce_rank3_lands_on_family_member() {
        let q = QuadraticForm::from_rows(&[vec![3, 1, 0], vec![1, 2, 0], vec![0, 0, 1]]).unwrap();
        let out = reduce(&q).ok().unwrap();
        let payload = &out.records[0].payload;
        let m: QuadraticForm = serde_json::from_value(payload["reduced"].clone()).unwrap();
        assert!(are_equivalent(&q, &m).unwrap());
        let rows: Vec<Vec<i64>> = serde_json::from_value(payload["transform"].clone()).unwrap();
        let p = quadform::UnimodularMap::new(3, rows.concat()).unwrap();
        assert_eq!(q.transform(&p).unwrap(), m);
    }
}
