//! Output schemas for the command line interface, the class file format
//! and the hashing helpers. Every map is ordered and every struct has a
//! fixed field order, so a given input always renders to the same bytes.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::bitset::BitSet;
use crate::gf::Field;
use crate::pencil::{LineLabel, Pencil, PlaneCategory, PointLabel};
use crate::{Error, Result};

pub const SCHEMA: u32 = 1;
pub const CLASS_MAGIC: &str = "clq-lineclass";

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(bytes);
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

pub fn point_label_key(f: &Field, lab: PointLabel) -> String {
    match lab {
        PointLabel::Vertex => "vertex".into(),
        PointLabel::Conic => "conic".into(),
        PointLabel::Internal => "internal".into(),
        PointLabel::External => "external".into(),
        PointLabel::ConeSmooth => "cone-smooth".into(),
        PointLabel::Quadric(lam) => format!("quadric({})", f.fe_string(lam)),
    }
}

pub fn line_label_key(f: &Field, lab: LineLabel) -> String {
    match lab {
        LineLabel::PiTangent => "pi-tangent".into(),
        LineLabel::PiExternal => "pi-external".into(),
        LineLabel::PiSecant => "pi-secant".into(),
        LineLabel::ConeGenerator => "cone-generator".into(),
        LineLabel::VertexInternal => "vertex-internal".into(),
        LineLabel::VertexExternal => "vertex-external".into(),
        LineLabel::ConeTangent => "cone-tangent".into(),
        LineLabel::FullSecant => "full-secant".into(),
        LineLabel::Regulus(lam) => format!("regulus({})", f.fe_string(lam)),
        LineLabel::TangentInternal(lam) => {
            format!("tangent-internal({})", f.fe_string(lam))
        }
        LineLabel::TangentExternal(lam) => {
            format!("tangent-external({})", f.fe_string(lam))
        }
    }
}

pub fn plane_category_key(cat: PlaneCategory) -> String {
    match cat {
        PlaneCategory::Base => "base".into(),
        PlaneCategory::OnVertex { conic_hits } => format!("on-vertex({conic_hits})"),
        PlaneCategory::OffVertex { conic_hits } => format!("off-vertex({conic_hits})"),
    }
}

/// Hash of a class: sha256 over the sorted member indices, one per line.
pub fn class_body_hash(class: &BitSet) -> String {
    sha256_hex(class_body(class).as_bytes())
}

fn class_body(class: &BitSet) -> String {
    let mut body = String::new();
    for i in class.iter_ones() {
        let _ = writeln!(body, "{i}");
    }
    body
}

/// Renders a class file: one header line
/// `clq-lineclass,v=1,q=..,x=..,name=..,universe=..,hash=..` followed by
/// the body the hash covers, the sorted member indices one per line.
/// `universe` is the line-table hash of the geometry the indices refer
/// to, so an import into a differently enumerated universe fails loudly.
pub fn class_file_text(q: u64, name: &str, universe: &str, class: &BitSet) -> String {
    let body = class_body(class);
    let x = class.count() as u64 / (q * q + q + 1);
    let hash = sha256_hex(body.as_bytes());
    format!("{CLASS_MAGIC},v=1,q={q},x={x},name={name},universe={universe},hash={hash}\n{body}")
}

#[derive(Debug, Clone)]
pub struct ClassFile {
    pub q: u64,
    pub x: u64,
    pub name: String,
    pub universe: String,
    pub hash: String,
    pub indices: Vec<u32>,
}

pub fn parse_class_file(text: &str) -> Result<ClassFile> {
    let (header, body) = text
        .split_once('\n')
        .ok_or_else(|| Error::BadInput("class file has no body".into()))?;
    let fields: Vec<&str> = header.split(',').collect();
    if fields.len() != 7 || fields[0] != CLASS_MAGIC || fields[1] != "v=1" {
        return Err(Error::BadInput(format!(
            "not a {CLASS_MAGIC},v=1 header: {header:?}"
        )));
    }
    fn tagged<'a>(field: &'a str, key: &str) -> Result<&'a str> {
        field
            .strip_prefix(key)
            .and_then(|s| s.strip_prefix('='))
            .ok_or_else(|| Error::BadInput(format!("expected {key}=..., got {field:?}")))
    }
    let q: u64 = tagged(fields[2], "q")?
        .parse()
        .map_err(|_| Error::BadInput("q is not a number".into()))?;
    let x: u64 = tagged(fields[3], "x")?
        .parse()
        .map_err(|_| Error::BadInput("x is not a number".into()))?;
    let name = tagged(fields[4], "name")?.to_string();
    let universe = tagged(fields[5], "universe")?.to_string();
    let hash = tagged(fields[6], "hash")?.to_string();
    if sha256_hex(body.as_bytes()) != hash {
        return Err(Error::BadInput(
            "class file hash does not match its body".into(),
        ));
    }
    let mut indices = Vec::new();
    for line in body.lines() {
        let i: u32 = line
            .trim()
            .parse()
            .map_err(|_| Error::BadInput(format!("bad line index {line:?}")))?;
        if let Some(&last) = indices.last() {
            if i <= last {
                return Err(Error::BadInput("line indices must be strictly increasing".into()));
            }
        }
        indices.push(i);
    }
    if indices.len() as u64 != x * (q * q + q + 1) {
        return Err(Error::BadInput(format!(
            "{} indices do not match x = {x} at q = {q}",
            indices.len()
        )));
    }
    Ok(ClassFile {
        q,
        x,
        name,
        universe,
        hash,
        indices,
    })
}

/// Common wrapper of every JSON output. runtime_ms stays null unless
/// timings were requested, keeping the default output byte-identical
/// across runs.
#[derive(Serialize)]
pub struct Envelope<T: Serialize> {
    pub schema: u32,
    pub command: String,
    pub q: u64,
    pub p: u32,
    pub k: u32,
    pub runtime_ms: Option<u64>,
    pub data: T,
}

pub fn render_json<T: Serialize>(env: &Envelope<T>) -> Result<String> {
    Ok(serde_json::to_string_pretty(env)? + "\n")
}

#[derive(Serialize)]
pub struct LabelsData {
    pub points: BTreeMap<String, u64>,
    pub lines: BTreeMap<String, u64>,
    pub planes: BTreeMap<String, u64>,
}

pub fn labels_data(pc: &Pencil) -> LabelsData {
    let f = pc.field();
    let mut points = BTreeMap::new();
    for &lab in pc.point_labels() {
        *points.entry(point_label_key(f, lab)).or_insert(0) += 1;
    }
    let mut lines = BTreeMap::new();
    for &lab in pc.line_labels() {
        *lines.entry(line_label_key(f, lab)).or_insert(0) += 1;
    }
    let mut planes = BTreeMap::new();
    for pl in 0..pc.geometry().n_planes() as u32 {
        *planes
            .entry(plane_category_key(pc.plane_category(pl)))
            .or_insert(0) += 1;
    }
    LabelsData {
        points,
        lines,
        planes,
    }
}

#[derive(Serialize)]
pub struct OrbitData {
    pub count: usize,
    pub sizes: Vec<usize>,
}

#[derive(Serialize)]
pub struct OrbitsData {
    pub group_order: usize,
    pub points: OrbitData,
    pub lines: OrbitData,
    pub planes: OrbitData,
    pub point_orbits_are_label_classes: bool,
    pub line_orbits_refine_labels: bool,
}

#[derive(Serialize)]
pub struct VerifyData {
    pub source: String,
    pub name: String,
    pub size: usize,
    pub expected_x: u64,
    pub parameter: Option<u64>,
    pub member_value: u64,
    pub outside_value: u64,
    pub is_tight: bool,
    pub violations: Vec<(u32, u64, u64)>,
    pub passed: bool,
}

#[derive(Serialize)]
pub struct CharactersData {
    pub class: String,
    pub kind: String,
    pub histogram: BTreeMap<u64, u64>,
    pub values: Vec<u64>,
}

#[derive(Serialize)]
pub struct FamilyData {
    pub family: String,
    pub verdict: String,
    pub note: String,
}

#[derive(Serialize)]
pub struct CompareData {
    pub lambda_bar: String,
    pub star_values: Vec<u64>,
    pub plane_values: Vec<u64>,
    pub families: Vec<FamilyData>,
    pub overall: String,
}

#[derive(Serialize)]
pub struct SpreadData {
    pub class: String,
    pub samples: u32,
    pub expected: u64,
    pub histogram: BTreeMap<u64, u32>,
    pub all_match: bool,
    pub seed: u64,
}

/// Character breakdown of the Bruen-Drudge class with a worked rejection
/// of the plausible but inconsistent far side value (q^2+q)/2 + q: its
/// weighted star sum misses (q+1)|L|.
#[derive(Serialize)]
pub struct BreakdownData {
    pub side: String,
    pub star_member: u64,
    pub star_same_side: u64,
    pub star_other_side: u64,
    pub plane_pole_member: u64,
    pub plane_pole_same_side: u64,
    pub plane_pole_other_side: u64,
    pub star_weighted_sum: u64,
    pub star_weighted_sum_expected: u64,
    pub rejected_other_side_value: u64,
    pub rejected_value_weighted_sum: u64,
}

#[derive(Serialize)]
pub struct ClassSummary {
    pub name: String,
    pub size: usize,
    pub x: u64,
    pub is_tight: bool,
    pub invariant: bool,
    pub star_values: Vec<u64>,
    pub plane_values: Vec<u64>,
    pub hash: String,
}

/// Full report. The leading fields are the stable summary for the
/// derived class; the rest is the supporting evidence.
#[derive(Serialize)]
pub struct ReportData {
    pub class: String,
    pub x: u64,
    pub size: usize,
    pub tight_pass: bool,
    pub precondition_pass: bool,
    pub star_values: Vec<u64>,
    pub plane_values: Vec<u64>,
    pub verdicts: BTreeMap<String, String>,
    pub lambda_bar: String,
    pub line_table_hash: String,
    pub group_order: usize,
    pub point_orbits: usize,
    pub line_orbits: usize,
    pub plane_orbits: usize,
    pub invariant: bool,
    pub swap_size: usize,
    pub classes: Vec<ClassSummary>,
    pub breakdown: BreakdownData,
    pub derived_star_histogram: BTreeMap<u64, u64>,
    pub derived_plane_histogram: BTreeMap<u64, u64>,
    pub comparison: CompareData,
    pub spread: SpreadData,
}

fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn csv_row(out: &mut String, section: &str, key: &str, value: &str) {
    let _ = writeln!(
        out,
        "{},{},{}",
        csv_field(section),
        csv_field(key),
        csv_field(value)
    );
}

fn csv_values(out: &mut String, section: &str, key: &str, values: &[u64]) {
    let joined = values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(" ");
    csv_row(out, section, key, &joined);
}

/// Flat csv rendering of the full report: section,key,value rows.
pub fn report_csv(env: &Envelope<ReportData>) -> String {
    let mut out = String::from("section,key,value\n");
    csv_row(&mut out, "meta", "schema", &env.schema.to_string());
    csv_row(&mut out, "meta", "command", &env.command);
    csv_row(&mut out, "meta", "q", &env.q.to_string());
    csv_row(&mut out, "meta", "p", &env.p.to_string());
    csv_row(&mut out, "meta", "k", &env.k.to_string());
    let runtime = match env.runtime_ms {
        Some(ms) => ms.to_string(),
        None => "null".into(),
    };
    csv_row(&mut out, "meta", "runtime_ms", &runtime);
    let d = &env.data;
    csv_row(&mut out, "summary", "class", &d.class);
    csv_row(&mut out, "summary", "x", &d.x.to_string());
    csv_row(&mut out, "summary", "size", &d.size.to_string());
    csv_row(&mut out, "summary", "tight_pass", &d.tight_pass.to_string());
    csv_row(
        &mut out,
        "summary",
        "precondition_pass",
        &d.precondition_pass.to_string(),
    );
    csv_values(&mut out, "summary", "star_values", &d.star_values);
    csv_values(&mut out, "summary", "plane_values", &d.plane_values);
    for (family, verdict) in &d.verdicts {
        csv_row(&mut out, "verdicts", family, verdict);
    }
    csv_row(&mut out, "summary", "invariant", &d.invariant.to_string());
    csv_row(&mut out, "pencil", "lambda_bar", &d.lambda_bar);
    csv_row(&mut out, "pencil", "line_table_hash", &d.line_table_hash);
    csv_row(&mut out, "group", "order", &d.group_order.to_string());
    csv_row(&mut out, "orbits", "points", &d.point_orbits.to_string());
    csv_row(&mut out, "orbits", "lines", &d.line_orbits.to_string());
    csv_row(&mut out, "orbits", "planes", &d.plane_orbits.to_string());
    csv_row(&mut out, "swap", "size", &d.swap_size.to_string());
    for c in &d.classes {
        let section = format!("class.{}", c.name);
        csv_row(&mut out, &section, "size", &c.size.to_string());
        csv_row(&mut out, &section, "x", &c.x.to_string());
        csv_row(&mut out, &section, "is_tight", &c.is_tight.to_string());
        csv_row(&mut out, &section, "invariant", &c.invariant.to_string());
        csv_values(&mut out, &section, "star_values", &c.star_values);
        csv_values(&mut out, &section, "plane_values", &c.plane_values);
        csv_row(&mut out, &section, "hash", &c.hash);
    }
    let b = &d.breakdown;
    csv_row(&mut out, "breakdown", "side", &b.side);
    csv_row(&mut out, "breakdown", "star_member", &b.star_member.to_string());
    csv_row(
        &mut out,
        "breakdown",
        "star_same_side",
        &b.star_same_side.to_string(),
    );
    csv_row(
        &mut out,
        "breakdown",
        "star_other_side",
        &b.star_other_side.to_string(),
    );
    csv_row(
        &mut out,
        "breakdown",
        "plane_pole_member",
        &b.plane_pole_member.to_string(),
    );
    csv_row(
        &mut out,
        "breakdown",
        "plane_pole_same_side",
        &b.plane_pole_same_side.to_string(),
    );
    csv_row(
        &mut out,
        "breakdown",
        "plane_pole_other_side",
        &b.plane_pole_other_side.to_string(),
    );
    csv_row(
        &mut out,
        "breakdown",
        "star_weighted_sum",
        &b.star_weighted_sum.to_string(),
    );
    csv_row(
        &mut out,
        "breakdown",
        "star_weighted_sum_expected",
        &b.star_weighted_sum_expected.to_string(),
    );
    csv_row(
        &mut out,
        "breakdown",
        "rejected_other_side_value",
        &b.rejected_other_side_value.to_string(),
    );
    csv_row(
        &mut out,
        "breakdown",
        "rejected_value_weighted_sum",
        &b.rejected_value_weighted_sum.to_string(),
    );
    for (v, c) in &d.derived_star_histogram {
        csv_row(&mut out, "derived_star_histogram", &v.to_string(), &c.to_string());
    }
    for (v, c) in &d.derived_plane_histogram {
        csv_row(
            &mut out,
            "derived_plane_histogram",
            &v.to_string(),
            &c.to_string(),
        );
    }
    csv_values(
        &mut out,
        "comparison",
        "star_values",
        &d.comparison.star_values,
    );
    csv_values(
        &mut out,
        "comparison",
        "plane_values",
        &d.comparison.plane_values,
    );
    for fam in &d.comparison.families {
        csv_row(
            &mut out,
            &format!("comparison.{}", fam.family),
            "verdict",
            &fam.verdict,
        );
        csv_row(
            &mut out,
            &format!("comparison.{}", fam.family),
            "note",
            &fam.note,
        );
    }
    csv_row(&mut out, "comparison", "overall", &d.comparison.overall);
    csv_row(&mut out, "spread", "class", &d.spread.class);
    csv_row(&mut out, "spread", "samples", &d.spread.samples.to_string());
    csv_row(&mut out, "spread", "expected", &d.spread.expected.to_string());
    for (v, c) in &d.spread.histogram {
        csv_row(&mut out, "spread.histogram", &v.to_string(), &c.to_string());
    }
    csv_row(&mut out, "spread", "all_match", &d.spread.all_match.to_string());
    csv_row(&mut out, "spread", "seed", &d.spread.seed.to_string());
    out
}
