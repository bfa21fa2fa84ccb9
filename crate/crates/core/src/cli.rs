//! Command line front end. Every subcommand builds the field, the
//! geometry and the pencil from the shared flags, runs one pipeline and
//! emits a JSON envelope (or csv / class-file text where noted) to
//! stdout or --out. Exit status is 0 exactly when every assertion the
//! subcommand makes holds.
//!
//! Determinism: identical flags give byte-identical output. The only
//! wall-clock field, runtime_ms, stays null unless --timings is passed,
//! and all sampling flows from the seeded generator.

use std::fs;
use std::io::Write as _;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand};

use crate::bitset::BitSet;
use crate::geometry::Geometry;
use crate::gf::{Fe, Field};
use crate::group_action::{partitions_equal, PglAction};
use crate::klein;
use crate::lineclass::{self, CharKind, Side};
use crate::pencil::Pencil;
use crate::report::{self, Envelope};
use crate::{Error, Result};

#[derive(Parser)]
#[command(
    name = "clq",
    version,
    about = "Exact pencil-of-quadrics and Cameron-Liebler line class computations in PG(3,q)"
)]
pub struct Cli {
    /// Field order q = p^k, odd. Uses the built-in modulus for prime powers.
    #[arg(long, global = true)]
    q: Option<u64>,

    /// Field characteristic, an odd prime. Alternative to --q.
    #[arg(long, global = true)]
    p: Option<u32>,

    /// Extension degree over the prime field (with --p, default 1).
    #[arg(long, global = true)]
    k: Option<u32>,

    /// Monic modulus polynomial c0,c1,...,1 of degree k over GF(p).
    #[arg(long, global = true, value_delimiter = ',', num_args = 1..)]
    modulus: Option<Vec<u32>>,

    /// Pencil parameter as coefficients c0,c1,... over GF(p); must make
    /// the member quadric elliptic (a non-square). Default: the
    /// distinguished non-square of the field.
    #[arg(long = "lambda-bar", global = true, value_delimiter = ',', num_args = 1..)]
    lambda_bar: Option<Vec<u32>>,

    /// Seed for all sampling.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,

    /// Worker threads for the verification scans. Default: all cores,
    /// or the RAYON_NUM_THREADS environment variable.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Write the output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Record the wall-clock runtime in the output. Off by default so
    /// repeated runs stay byte-identical.
    #[arg(long, global = true)]
    timings: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Count points, lines and planes of PG(3,q) by pencil label.
    Labels,
    /// Enumerate the stabiliser orbits and compare them with the labels.
    Orbits,
    /// Build a line class and print it in the class file format.
    Build {
        /// bruen-drudge, first-derived or derived.
        #[arg(long)]
        class: String,
        /// Tangent side for bruen-drudge and first-derived: os (square)
        /// or on (non-square). Default os. The derived class fixes its
        /// own side and rejects this flag.
        #[arg(long)]
        side: Option<String>,
    },
    /// Verify tightness of a built-in class or an imported class file.
    Verify {
        /// Built-in class name, as in build.
        #[arg(long)]
        class: Option<String>,
        /// Tangent side, as in build.
        #[arg(long)]
        side: Option<String>,
        /// Class file to import instead of --class.
        #[arg(long)]
        file: Option<PathBuf>,
        /// Expected parameter. Default: (q^2+1)/2 for built-ins, the
        /// header value for files.
        #[arg(long)]
        x: Option<u64>,
    },
    /// Histogram of member counts through points or in planes.
    Characters {
        /// star (through-point) or plane (in-plane).
        #[arg(long, default_value = "star")]
        kind: String,
        /// Class to profile, as in build.
        #[arg(long, default_value = "derived")]
        class: String,
        #[arg(long)]
        side: Option<String>,
    },
    /// Compare the derived class against the known families by their
    /// character value sets.
    CompareKnown,
    /// Count class members in seeded random images of a regular spread.
    SpreadTest {
        #[arg(long, default_value_t = 100)]
        samples: u32,
        /// Class to test, as in build.
        #[arg(long, default_value = "derived")]
        class: String,
        #[arg(long)]
        side: Option<String>,
    },
    /// Run the whole pipeline and emit one bundled report.
    Report {
        /// json or csv.
        #[arg(long, default_value = "json")]
        format: String,
    },
    /// Dump the line table (index, Plucker coordinates, span) as csv.
    ExportLines,
}

pub fn run() -> i32 {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn resolve_field(cli: &Cli) -> Result<Field> {
    match (cli.q, cli.p) {
        (Some(_), Some(_)) => Err(Error::BadInput(
            "give either --q or --p/--k, not both".into(),
        )),
        (Some(q), None) => {
            if cli.k.is_some() || cli.modulus.is_some() {
                return Err(Error::BadInput("--k and --modulus go with --p".into()));
            }
            Field::from_order(q)
        }
        (None, Some(p)) => Field::new(p, cli.k.unwrap_or(1), cli.modulus.as_deref()),
        (None, None) => Err(Error::BadInput(
            "a field is required: --q Q, or --p P with optional --k K".into(),
        )),
    }
}

fn resolve_lambda(cli: &Cli, f: &Field) -> Result<Fe> {
    match &cli.lambda_bar {
        Some(coeffs) => f.from_coeffs(coeffs),
        None => Ok(f.distinguished_nonsquare()),
    }
}

fn resolve_side(side: Option<&str>) -> Result<Side> {
    side.map(Side::parse).unwrap_or(Ok(Side::Square))
}

/// Builds one of the three named classes, returning the display name
/// with the side suffix baked in.
fn class_by_name(pc: &Pencil, lam: Fe, name: &str, side: Option<&str>) -> Result<(String, BitSet)> {
    match name {
        "bruen-drudge" => {
            let s = resolve_side(side)?;
            let set = lineclass::build_bruen_drudge(pc, lam, s)?;
            Ok((format!("bruen-drudge-{}", s.as_str()), set))
        }
        "first-derived" => {
            let s = resolve_side(side)?;
            let set = lineclass::build_first_derived(pc, lam, s)?;
            Ok((format!("first-derived-{}", s.as_str()), set))
        }
        "derived" => {
            if side.is_some() {
                return Err(Error::BadInput(
                    "the derived class fixes its own side; drop --side".into(),
                ));
            }
            Ok(("derived".into(), lineclass::build_derived(pc, lam)?))
        }
        other => Err(Error::BadInput(format!(
            "unknown class {other:?}; expected bruen-drudge, first-derived or derived"
        ))),
    }
}

fn emit(cli: &Cli, text: &str) -> Result<()> {
    match &cli.out {
        Some(path) => fs::write(path, text)?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
        }
    }
    Ok(())
}

fn execute(cli: &Cli) -> Result<i32> {
    if let Some(n) = cli.threads {
        // A second build_global in the same process is harmless here;
        // the pool keeps its first configuration.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    let start = Instant::now();
    let field = resolve_field(cli)?;
    let pc = Pencil::new(Geometry::new(field)?);
    let lam = resolve_lambda(cli, pc.field())?;
    let f = pc.field();
    let q = f.q() as u64;
    let envelope = |command: &str, runtime_ms: Option<u64>| Envelope {
        schema: report::SCHEMA,
        command: command.to_string(),
        q,
        p: f.p(),
        k: f.k(),
        runtime_ms,
        data: (),
    };
    // Fills in data and the runtime at the end so the clock covers the
    // whole pipeline.
    fn seal<T: serde::Serialize>(
        env: Envelope<()>,
        cli: &Cli,
        start: Instant,
        data: T,
    ) -> Envelope<T> {
        Envelope {
            schema: env.schema,
            command: env.command,
            q: env.q,
            p: env.p,
            k: env.k,
            runtime_ms: cli.timings.then(|| start.elapsed().as_millis() as u64),
            data,
        }
    }

    match &cli.command {
        Command::Labels => {
            let data = report::labels_data(&pc);
            let env = seal(envelope("labels", None), cli, start, data);
            emit(cli, &report::render_json(&env)?)?;
            Ok(0)
        }
        Command::Orbits => {
            let action = PglAction::new(pc.geometry())?;
            let po = action.point_orbits();
            let lo = action.line_orbits();
            let plo = action.plane_orbits();
            let data = report::OrbitsData {
                group_order: action.order(),
                points: report::OrbitData {
                    count: po.count(),
                    sizes: PglAction::sorted_sizes(&po),
                },
                lines: report::OrbitData {
                    count: lo.count(),
                    sizes: PglAction::sorted_sizes(&lo),
                },
                planes: report::OrbitData {
                    count: plo.count(),
                    sizes: PglAction::sorted_sizes(&plo),
                },
                point_orbits_are_label_classes: partitions_equal(&po, pc.point_labels()),
                line_orbits_refine_labels: lo.refines(pc.line_labels()),
            };
            let ok = data.point_orbits_are_label_classes && data.line_orbits_refine_labels;
            let env = seal(envelope("orbits", None), cli, start, data);
            emit(cli, &report::render_json(&env)?)?;
            Ok(if ok { 0 } else { 1 })
        }
        Command::Build { class, side } => {
            let (name, set) = class_by_name(&pc, lam, class, side.as_deref())?;
            let text =
                report::class_file_text(q, &name, pc.geometry().line_table_hash(), &set);
            emit(cli, &text)?;
            Ok(0)
        }
        Command::Verify {
            class,
            side,
            file,
            x,
        } => {
            let (source, name, set, header_x) = match (class, file) {
                (Some(_), Some(_)) | (None, None) => {
                    return Err(Error::BadInput(
                        "give exactly one of --class or --file".into(),
                    ))
                }
                (Some(c), None) => {
                    let (name, set) = class_by_name(&pc, lam, c, side.as_deref())?;
                    (format!("class:{name}"), name, set, None)
                }
                (None, Some(path)) => {
                    let text = fs::read_to_string(path)?;
                    let cf = report::parse_class_file(&text)?;
                    if cf.q != q {
                        return Err(Error::BadInput(format!(
                            "class file is for q = {}, not q = {q}",
                            cf.q
                        )));
                    }
                    if cf.universe != pc.geometry().line_table_hash() {
                        return Err(Error::UniverseMismatch(format!(
                            "class file universe {} differs from this line table {}",
                            cf.universe,
                            pc.geometry().line_table_hash()
                        )));
                    }
                    let n = pc.geometry().n_lines();
                    let mut set = BitSet::new(n);
                    for &i in &cf.indices {
                        if i as usize >= n {
                            return Err(Error::BadInput(format!(
                                "line index {i} out of range, the table has {n} lines"
                            )));
                        }
                        set.insert(i as usize);
                    }
                    (
                        format!("file:{}", path.display()),
                        cf.name,
                        set,
                        Some(cf.x),
                    )
                }
            };
            let expected_x = x
                .or(header_x)
                .unwrap_or_else(|| lineclass::bruen_drudge_x(q));
            let tr = klein::verify_tight(pc.geometry(), &set);
            let passed = tr.is_tight && tr.parameter == Some(expected_x);
            let data = report::VerifyData {
                source,
                name,
                size: tr.size,
                expected_x,
                parameter: tr.parameter,
                member_value: tr.member_value,
                outside_value: tr.outside_value,
                is_tight: tr.is_tight,
                violations: tr.violations,
                passed,
            };
            let env = seal(envelope("verify", None), cli, start, data);
            emit(cli, &report::render_json(&env)?)?;
            Ok(if passed { 0 } else { 1 })
        }
        Command::Characters { kind, class, side } => {
            let kind = CharKind::parse(kind)?;
            let (name, set) = class_by_name(&pc, lam, class, side.as_deref())?;
            let histogram = lineclass::character_histogram(pc.geometry(), &set, kind);
            let values = histogram.keys().copied().collect();
            let data = report::CharactersData {
                class: name,
                kind: kind.as_str().to_string(),
                histogram,
                values,
            };
            let env = seal(envelope("characters", None), cli, start, data);
            emit(cli, &report::render_json(&env)?)?;
            Ok(0)
        }
        Command::CompareKnown => {
            let derived = lineclass::build_derived(&pc, lam)?;
            let cmp = lineclass::compare_known(&pc, lam, &derived)?;
            let data = compare_data(f, lam, &cmp);
            let env = seal(envelope("compare-known", None), cli, start, data);
            emit(cli, &report::render_json(&env)?)?;
            Ok(0)
        }
        Command::SpreadTest {
            samples,
            class,
            side,
        } => {
            let (name, set) = class_by_name(&pc, lam, class, side.as_deref())?;
            let x = set.count() as u64 / (q * q + q + 1);
            let sr = lineclass::spread_sample_check(pc.geometry(), &set, x, *samples, cli.seed)?;
            let all_match = sr.all_match;
            let data = spread_data(name, cli.seed, &sr);
            let env = seal(envelope("spread-test", None), cli, start, data);
            emit(cli, &report::render_json(&env)?)?;
            Ok(if all_match { 0 } else { 1 })
        }
        Command::Report { format } => {
            let (data, ok) = build_report(&pc, lam, cli.seed)?;
            let env = seal(envelope("report", None), cli, start, data);
            let text = match format.as_str() {
                "json" => report::render_json(&env)?,
                "csv" => report::report_csv(&env),
                other => {
                    return Err(Error::BadInput(format!(
                        "unknown format {other:?}; expected json or csv"
                    )))
                }
            };
            emit(cli, &text)?;
            Ok(if ok { 0 } else { 1 })
        }
        Command::ExportLines => {
            let mut buf = Vec::new();
            pc.geometry().write_csv_line_table(&mut buf)?;
            let text = String::from_utf8(buf).expect("csv is ascii");
            emit(cli, &text)?;
            Ok(0)
        }
    }
}

fn compare_data(f: &Field, lam: Fe, cmp: &lineclass::KnownComparison) -> report::CompareData {
    report::CompareData {
        lambda_bar: f.fe_string(lam),
        star_values: cmp.star_values.clone(),
        plane_values: cmp.plane_values.clone(),
        families: cmp
            .families
            .iter()
            .map(|fc| report::FamilyData {
                family: fc.family.to_string(),
                verdict: fc.verdict.as_str().to_string(),
                note: fc.note.clone(),
            })
            .collect(),
        overall: cmp.overall.as_str().to_string(),
    }
}

fn spread_data(class: String, seed: u64, sr: &lineclass::SpreadSampleReport) -> report::SpreadData {
    report::SpreadData {
        class,
        samples: sr.samples,
        expected: sr.expected,
        histogram: sr.histogram.clone(),
        all_match: sr.all_match,
        seed,
    }
}

fn class_summary(
    pc: &Pencil,
    action: &PglAction,
    name: &str,
    set: &BitSet,
) -> (report::ClassSummary, bool) {
    let geo = pc.geometry();
    let q = geo.field().q() as u64;
    let tr = klein::verify_tight(geo, set);
    let x = set.count() as u64 / (q * q + q + 1);
    let tight = tr.is_tight && tr.parameter == Some(x);
    let summary = report::ClassSummary {
        name: name.to_string(),
        size: set.count(),
        x,
        is_tight: tight,
        invariant: action.is_invariant_line_set(set),
        star_values: lineclass::value_set(geo, set, CharKind::Star)
            .into_iter()
            .collect(),
        plane_values: lineclass::value_set(geo, set, CharKind::Plane)
            .into_iter()
            .collect(),
        hash: report::class_body_hash(set),
    };
    (summary, tight)
}

/// The full pipeline: derived class, its pedigree (the side the
/// derivation starts from and the first-derived cousin), orbits, the
/// swap precondition check, spectra, family comparison and spread
/// sampling. Returns the data and whether every assertion held.
fn build_report(pc: &Pencil, lam: Fe, seed: u64) -> Result<(report::ReportData, bool)> {
    let geo = pc.geometry();
    let f = geo.field();
    let q = f.q() as u64;

    let derived = lineclass::build_derived(pc, lam)?;
    let base = lineclass::build_bruen_drudge(pc, lam, Side::NonSquare)?;
    let cousin = lineclass::build_first_derived(pc, lam, Side::Square)?;
    let (a, b) = pc.swap_sets();
    let precondition_pass = lineclass::check_swap_preconditions(pc, &base, &a, &b).is_ok();

    let action = PglAction::new(geo)?;
    let po = action.point_orbits();
    let lo = action.line_orbits();
    let plo = action.plane_orbits();

    let (base_summary, base_tight) = class_summary(pc, &action, "bruen-drudge-on", &base);
    let (cousin_summary, cousin_tight) = class_summary(pc, &action, "first-derived-os", &cousin);
    let (derived_summary, derived_tight) = class_summary(pc, &action, "derived", &derived);
    let invariant = derived_summary.invariant;
    let x = derived_summary.x;

    let bd = lineclass::bruen_drudge_breakdown(pc, lam, Side::NonSquare)?;
    let h = (q * q + q) / 2;
    let expected_sum = (q + 1) * base.count() as u64;
    let breakdown = report::BreakdownData {
        side: bd.side.as_str().to_string(),
        star_member: bd.star_member,
        star_same_side: bd.star_same_side,
        star_other_side: bd.star_other_side,
        plane_pole_member: bd.plane_pole_member,
        plane_pole_same_side: bd.plane_pole_same_side,
        plane_pole_other_side: bd.plane_pole_other_side,
        star_weighted_sum: lineclass::SideBreakdown::star_double_count(
            q,
            bd.star_member,
            bd.star_same_side,
            bd.star_other_side,
        ),
        star_weighted_sum_expected: expected_sum,
        rejected_other_side_value: h + q,
        rejected_value_weighted_sum: lineclass::SideBreakdown::star_double_count(
            q,
            bd.star_member,
            bd.star_same_side,
            h + q,
        ),
    };
    let breakdown_ok = breakdown.star_weighted_sum == expected_sum
        && breakdown.rejected_value_weighted_sum != expected_sum;

    let cmp = lineclass::compare_known(pc, lam, &derived)?;
    let mut verdicts: std::collections::BTreeMap<String, String> = cmp
        .families
        .iter()
        .map(|fc| (fc.family.to_string(), fc.verdict.as_str().to_string()))
        .collect();
    verdicts.insert("overall".into(), cmp.overall.as_str().to_string());

    let sr = lineclass::spread_sample_check(geo, &derived, x, 100, seed)?;
    let spread_ok = sr.all_match;

    let ok = derived_tight
        && base_tight
        && cousin_tight
        && precondition_pass
        && invariant
        && breakdown_ok
        && spread_ok
        && partitions_equal(&po, pc.point_labels())
        && lo.refines(pc.line_labels());

    let data = report::ReportData {
        class: derived_summary.name.clone(),
        x,
        size: derived_summary.size,
        tight_pass: derived_tight,
        precondition_pass,
        star_values: derived_summary.star_values.clone(),
        plane_values: derived_summary.plane_values.clone(),
        verdicts,
        lambda_bar: f.fe_string(lam),
        line_table_hash: geo.line_table_hash().to_string(),
        group_order: action.order(),
        point_orbits: po.count(),
        line_orbits: lo.count(),
        plane_orbits: plo.count(),
        invariant,
        swap_size: a.count(),
        classes: vec![base_summary, cousin_summary, derived_summary],
        breakdown,
        derived_star_histogram: lineclass::character_histogram(geo, &derived, CharKind::Star),
        derived_plane_histogram: lineclass::character_histogram(geo, &derived, CharKind::Plane),
        comparison: compare_data(f, lam, &cmp),
        spread: spread_data("derived".into(), seed, &sr),
    };
    Ok((data, ok))
}
