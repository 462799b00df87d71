//! JSON and CSV encodings.
//!
//! Half-integers are stored doubled (`*_times_2`), radicals as lists of
//! `[radicand, numerator, denominator]` string triples so that arbitrarily
//! large integers survive a round trip unchanged.

use std::collections::BTreeMap;
use std::str::FromStr;

use aecode_core::channels::{KrausOperator, OpLabel};
use aecode_core::kl::{KlReport, ReductionReport, Value};
use aecode_core::search::scan::{ScanRow, ScanTable};
use aecode_core::search::{Certificate, Solution, Vertex, Warning};
use aecode_core::{Code, Codeword, Family, HalfInt, Radical};
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value as Json};

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid number `{0}`")]
    Number(String),
    #[error("{0}")]
    Content(String),
    #[error(transparent)]
    Core(#[from] aecode_core::Error),
}

pub type Triple = [String; 3];

pub fn radical_to_terms(r: &Radical) -> Vec<Triple> {
    r.terms().map(|(radicand, c)| [radicand.to_string(), c.numer().to_string(), c.denom().to_string()]).collect()
}

pub fn radical_from_terms(terms: &[Triple]) -> Result<Radical, FormatError> {
    let mut out = Radical::zero();
    for [radicand, num, den] in terms {
        let radicand = BigUint::from_str(radicand).map_err(|_| FormatError::Number(radicand.clone()))?;
        let num = BigInt::from_str(num).map_err(|_| FormatError::Number(num.clone()))?;
        let den = BigInt::from_str(den).map_err(|_| FormatError::Number(den.clone()))?;
        if den == BigInt::from(0) {
            return Err(FormatError::Content(String::from("zero denominator in a radical term")));
        }
        out += &Radical::term(BigRational::new(num, den), &radicand);
    }
    Ok(out)
}

pub fn rational_string(q: &BigRational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AmplitudeJson {
    pub m_times_2: i64,
    pub amplitude: Vec<Triple>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParameterJson {
    pub name: String,
    pub value_times_2: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeJson {
    pub ell0_times_2: i64,
    pub family: String,
    #[serde(default)]
    pub parameters: Vec<ParameterJson>,
    pub codewords: [Vec<AmplitudeJson>; 2],
}

impl From<&Code> for CodeJson {
    fn from(code: &Code) -> Self {
        let word = |cw: &Codeword| {
            cw.amplitudes()
                .iter()
                .map(|(m, a)| AmplitudeJson { m_times_2: m.twice(), amplitude: radical_to_terms(a) })
                .collect()
        };
        CodeJson {
            ell0_times_2: code.ell0().twice(),
            family: code.family.name().to_owned(),
            parameters: code
                .parameters
                .iter()
                .map(|(name, v)| ParameterJson { name: name.clone(), value_times_2: v.twice() })
                .collect(),
            codewords: [word(&code.zero), word(&code.one)],
        }
    }
}

impl TryFrom<CodeJson> for Code {
    type Error = FormatError;

    fn try_from(doc: CodeJson) -> Result<Code, FormatError> {
        if doc.ell0_times_2 < 0 {
            return Err(FormatError::Content(format!("negative ℓ₀ (ell0_times_2 = {})", doc.ell0_times_2)));
        }
        let ell0 = HalfInt::from_twice(doc.ell0_times_2);
        let family = Family::from_name(&doc.family)
            .ok_or_else(|| FormatError::Content(format!("unknown code family `{}`", doc.family)))?;
        let mut words = Vec::with_capacity(2);
        for entries in &doc.codewords {
            let mut amps = Vec::with_capacity(entries.len());
            for e in entries {
                amps.push((HalfInt::from_twice(e.m_times_2), radical_from_terms(&e.amplitude)?));
            }
            words.push(Codeword::new(ell0, amps));
        }
        let one = words.pop().expect("two codewords");
        let zero = words.pop().expect("two codewords");
        let parameters = doc.parameters.into_iter().map(|p| (p.name, HalfInt::from_twice(p.value_times_2))).collect();
        Ok(Code::new(zero, one, family, parameters)?)
    }
}

pub fn code_to_json(code: &Code) -> String {
    serde_json::to_string_pretty(&CodeJson::from(code)).expect("code JSON is serializable")
}

pub fn code_from_json(text: &str) -> Result<Code, FormatError> {
    let doc: CodeJson = serde_json::from_str(text)?;
    Code::try_from(doc)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KrausJson {
    pub source_ell_times_2: i64,
    pub delta_ell: i64,
    pub delta_m: i64,
    pub rank: i64,
    pub label: String,
    /// `[m_times_2, terms]` per nonzero entry.
    pub entries: Vec<(i64, Vec<Triple>)>,
}

impl From<&KrausOperator> for KrausJson {
    fn from(op: &KrausOperator) -> Self {
        KrausJson {
            source_ell_times_2: op.source_ell.twice(),
            delta_ell: op.delta_ell,
            delta_m: op.delta_m,
            rank: op.rank,
            label: op.label.to_string(),
            entries: op.entries().map(|(m, v)| (m.twice(), radical_to_terms(v))).collect(),
        }
    }
}

/// Labels do not round-trip structurally; parsed operators carry a
/// `General` label built from their shape.
pub fn kraus_from_json(doc: &KrausJson) -> Result<KrausOperator, FormatError> {
    let mut entries = Vec::with_capacity(doc.entries.len());
    for (m, terms) in &doc.entries {
        entries.push((HalfInt::from_twice(*m), radical_from_terms(terms)?));
    }
    let label = OpLabel::General { r: doc.rank, dl: doc.delta_ell, dm: doc.delta_m };
    Ok(KrausOperator::from_entries(
        HalfInt::from_twice(doc.source_ell_times_2),
        doc.delta_ell,
        doc.delta_m,
        doc.rank,
        label,
        entries,
    ))
}

fn value_json(v: &Value) -> Json {
    match v {
        Value::Exact(r) => json!({ "exact": radical_to_terms(r), "text": r.to_string(), "approx": r.to_f64() }),
        Value::Float(x) => json!({ "approx": x }),
    }
}

pub fn kl_report_json(report: &KlReport) -> Json {
    let pairs: Vec<Json> = report
        .pairs
        .iter()
        .map(|p| {
            json!({
                "a": p.op_a.to_string(),
                "b": p.op_b.as_ref().map(ToString::to_string),
                "c00": value_json(&p.c00),
                "c11": value_json(&p.c11),
                "c01": value_json(&p.c01),
                "c10": value_json(&p.c10),
            })
        })
        .collect();
    let violations: Vec<Json> = report
        .violations
        .iter()
        .map(|v| {
            json!({
                "pair": v.pair,
                "condition": v.condition.name(),
                "residual": value_json(&v.residual),
                "description": aecode_core::kl::describe_violation(report, v),
            })
        })
        .collect();
    let structural: Vec<Json> = report
        .structurally_satisfied
        .iter()
        .map(|(a, b)| json!([a.to_string(), b.as_ref().map(ToString::to_string)]))
        .collect();
    let mut engine = json!({ "name": report.engine.name() });
    if let aecode_core::kl::Engine::Float { tolerance } = report.engine {
        engine["tolerance"] = json!(tolerance);
    }
    json!({
        "kind": if report.correction { "correction" } else { "detection" },
        "engine": engine,
        "passed": report.passed(),
        "pairs": pairs,
        "structurally_satisfied": structural,
        "violations": violations,
    })
}

pub fn reduction_report_json(r: &ReductionReport) -> Json {
    let table = |t: &aecode_core::kl::MomentTable| -> Vec<Json> { t.values.iter().map(|v| json!(v.to_string())).collect() };
    json!({
        "kind": "reduction",
        "n": r.n,
        "mode": format!("{:?}", r.mode).to_lowercase(),
        "spacing_times_2": r.spacing.map(HalfInt::twice),
        "required_spacing": r.required_spacing,
        "spacing_ok": r.spacing_ok,
        "moments": [table(&r.moments[0]), table(&r.moments[1])],
        "mismatched_powers": r.mismatched,
        "passed": r.passed(),
    })
}

fn vertex_json(v: &Vertex) -> Json {
    json!({
        "p": v.p.iter().map(rational_string).collect::<Vec<_>>(),
        "q": v.q.iter().map(rational_string).collect::<Vec<_>>(),
    })
}

fn certificate_json(c: &Certificate) -> Json {
    json!({
        "equalities_inconsistent": c.equalities_inconsistent,
        "unmatched_moment": c.unmatched_moment(),
        "multipliers": c.multipliers.iter().map(|(row, y)| json!([row.to_string(), rational_string(y)])).collect::<Vec<_>>(),
        "text": c.to_string(),
    })
}

pub fn solution_json(problem: &aecode_core::search::SearchProblem, solution: &Solution) -> Json {
    let support = |s: &[HalfInt]| s.iter().map(|m| m.twice()).collect::<Vec<_>>();
    let mut doc = json!({
        "ell0_times_2": problem.ell0.twice(),
        "n": problem.order_n,
        "mode": format!("{:?}", problem.mode).to_lowercase(),
        "support0_times_2": support(&problem.support0),
        "support1_times_2": support(&problem.support1),
    });
    match solution {
        Solution::Feasible(f) => {
            doc["feasible"] = json!(true);
            doc["free_dimension"] = json!(f.free_dimension);
            doc["particular"] = vertex_json(&f.particular);
            doc["vertices"] = match &f.vertices {
                Some(vs) => Json::Array(vs.iter().map(vertex_json).collect()),
                None => Json::Null,
            };
            doc["null_basis"] = Json::Array(
                f.null_basis.iter().map(|v| Json::Array(v.iter().map(|x| json!(rational_string(x))).collect())).collect(),
            );
            doc["warnings"] = Json::Array(
                f.warnings
                    .iter()
                    .map(|w| match w {
                        Warning::SpacingBelowRequirement { spacing, required } => json!({
                            "spacing_below_requirement": { "spacing_times_2": spacing.map(HalfInt::twice), "required": required }
                        }),
                    })
                    .collect(),
            );
        }
        Solution::Infeasible(c) => {
            doc["feasible"] = json!(false);
            doc["certificate"] = certificate_json(c);
        }
    }
    doc
}

fn join_halfints(v: &[HalfInt]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join(";")
}

fn join_rationals(v: &[BigRational]) -> String {
    v.iter().map(rational_string).collect::<Vec<_>>().join(";")
}

/// One CSV record per row.
#[derive(Debug, Serialize)]
struct ScanRecord {
    ell0_times_2: i64,
    n: i64,
    ansatz: &'static str,
    support0: String,
    support1: String,
    probs0: String,
    probs1: String,
    kl_verified: bool,
}

impl From<&ScanRow> for ScanRecord {
    fn from(r: &ScanRow) -> Self {
        ScanRecord {
            ell0_times_2: r.ell0.twice(),
            n: r.n,
            ansatz: r.ansatz.name(),
            support0: join_halfints(&r.support0),
            support1: join_halfints(&r.support1),
            probs0: join_rationals(&r.probs.p),
            probs1: join_rationals(&r.probs.q),
            kl_verified: r.kl_verified,
        }
    }
}

pub const SCAN_CSV_HEADER: [&str; 8] = ["ell0_times_2", "n", "ansatz", "support0", "support1", "probs0", "probs1", "kl_verified"];

pub fn scan_csv(table: &ScanTable) -> String {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(SCAN_CSV_HEADER).expect("in-memory write");
    for row in &table.rows {
        w.serialize(ScanRecord::from(row)).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("CSV is UTF-8")
}

pub fn scan_json(table: &ScanTable) -> Json {
    let rows: Vec<Json> = table
        .rows
        .iter()
        .map(|r| serde_json::to_value(ScanRecord::from(r)).expect("record serializes"))
        .collect();
    json!({
        "n": table.config.n,
        "ansatz": table.config.ansatz.name(),
        "mode": format!("{:?}", table.config.mode).to_lowercase(),
        "min_ell0_times_2": table.config.min_ell0.twice(),
        "max_ell0_times_2": table.config.max_ell0.twice(),
        "max_points": table.config.max_points,
        "configurations": table.configurations,
        "feasible": table.rows.len(),
        "minimal_ell0_times_2": table.minimal_ell0().map(HalfInt::twice),
        "rows": rows,
    })
}

/// Parses a scan CSV back into string records keyed by column.
pub fn read_scan_csv(text: &str) -> Result<Vec<BTreeMap<String, String>>, FormatError> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let headers = rdr.headers().map_err(|e| FormatError::Content(e.to_string()))?.clone();
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| FormatError::Content(e.to_string()))?;
        out.push(headers.iter().map(String::from).zip(rec.iter().map(String::from)).collect());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use aecode_core::codes::{binomial_ae_code, symmetric_code};
    use aecode_core::Mode;

    #[test]
    fn code_round_trip_is_exact() {
        let codes = [
            symmetric_code(HalfInt::from_int(6), HalfInt::from_int(3), HalfInt::from_int(6)).unwrap(),
            binomial_ae_code(2, HalfInt::from_twice(25), HalfInt::from_twice(25), Mode::Correction).unwrap(),
        ];
        for code in codes {
            let text = code_to_json(&code);
            let back = code_from_json(&text).unwrap();
            assert_eq!(back, code);
            assert_eq!(code_to_json(&back), text);
        }
    }

    #[test]
    fn huge_numbers_survive() {
        let big = BigInt::from(7u8).pow(60u32);
        let r = Radical::term(BigRational::new(big, BigInt::from(3)), &BigUint::from(30u8));
        assert_eq!(radical_from_terms(&radical_to_terms(&r)).unwrap(), r);
    }

    #[test]
    fn malformed_documents_rejected() {
        assert!(code_from_json("{").is_err());
        assert!(code_from_json(r#"{"ell0_times_2": 4, "family": "nope", "codewords": [[], []]}"#).is_err());
        let bad = r#"{"ell0_times_2": 4, "family": "custom", "codewords": [[{"m_times_2": 0, "amplitude": [["1", "x", "1"]]}], []]}"#;
        assert!(code_from_json(bad).is_err());
    }

    #[test]
    fn kraus_round_trip() {
        let ch = aecode_core::first_order_channel(HalfInt::from_int(3)).unwrap();
        for op in &ch.operators {
            let doc = KrausJson::from(op);
            let text = serde_json::to_string(&doc).unwrap();
            let back = kraus_from_json(&serde_json::from_str(&text).unwrap()).unwrap();
            assert!(back.same_action(op));
        }
    }
}
