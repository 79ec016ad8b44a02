use std::fmt::Write as _;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::Serialize;

use diffinv::catalog::{catalog, match_reference_expansions, verify_relations, ExpansionMatch, RelationRecord, SetDescriptor};
use diffinv::experiments::{
    build_synth_db, database_features, default_base_image, load_db, mre_features, nn_classify_features,
    pair_verify_features, write_db, Boundary, ClassAccuracy, PatchDatabase, SynthDbSpec, Transform, PATCH_SIZE,
};
use diffinv::independence::{set_size_report, RankRow};
use diffinv::invariance::{invariance_sweep, InvarianceRow, MapKind};
use diffinv::numeric::{default_size, feature_map, read_pgm_unit, FeatureExtractor, Image, Padding, Pgm, PgmFormat};
use diffinv::report::discrepancy_report;

use crate::args::{CheckArgs, ClassifyArgs, Common, EvalArgs, FeatmapArgs, FeatureArgs, Format, GenArgs, SynthdbArgs, VerifyArgs};
use crate::output::{input_record, InputRecord, OutDir};

/// Relations that must verify exactly, out of 134.
const MIN_EXACT_RELATIONS: usize = 108;
/// Printed expansions that must match up to a scalar, out of 34.
const MIN_MATCHED_EXPANSIONS: usize = 30;

pub struct Outcome {
    pub body: String,
    pub passed: bool,
    pub inputs: Vec<InputRecord>,
}

impl Outcome {
    fn ok(body: String) -> Self {
        Outcome { body, passed: true, inputs: Vec::new() }
    }

    fn with_inputs(mut self, inputs: Vec<InputRecord>) -> Self {
        self.inputs = inputs;
        self
    }
}

fn json<T: Serialize>(v: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

fn render<T: Serialize>(format: Format, v: &T, text: impl FnOnce() -> String) -> Result<String> {
    match format {
        Format::Json => json(v),
        Format::Text => Ok(text()),
    }
}

fn parse_set(s: &str) -> Result<SetDescriptor> {
    SetDescriptor::parse_request(s).with_context(|| format!("--set {s}"))
}

fn require_out<'a>(out: Option<&'a mut OutDir>, verb: &str) -> Result<&'a mut OutDir> {
    out.with_context(|| format!("{verb} needs --out <dir>"))
}

fn check_sigmas(sigmas: &[f64]) -> Result<()> {
    if sigmas.is_empty() || sigmas.iter().any(|s| !s.is_finite() || *s <= 0.0) {
        bail!("--sigma needs positive scales, got {sigmas:?}");
    }
    Ok(())
}

#[derive(Serialize)]
struct GenRow<'a> {
    id: u32,
    chain: String,
    order: usize,
    degree: usize,
    f_count: usize,
    g_count: usize,
    polynomial: &'a str,
}

pub fn gen(a: &GenArgs, c: &Common) -> Result<Outcome> {
    let cat = catalog();
    let (label, ids): (Option<String>, Vec<u32>) = match &a.set {
        Some(s) => {
            let set = parse_set(s)?;
            (Some(set.label()), set.members)
        }
        None => (None, cat.entries().iter().map(|e| e.id).collect()),
    };
    let polys: Vec<String> = ids.iter().map(|id| cat.polynomial(*id).map(|p| p.to_string())).collect::<Result<_, _>>()?;
    let rows: Vec<GenRow> = ids
        .iter()
        .zip(&polys)
        .map(|(id, p)| {
            let e = cat.get(*id).expect("catalog id");
            GenRow {
                id: e.id,
                chain: e.chain.to_string(),
                order: e.order,
                degree: e.degree,
                f_count: e.p,
                g_count: e.q,
                polynomial: p,
            }
        })
        .collect();
    #[derive(Serialize)]
    struct Listing<'a> {
        set: Option<String>,
        count: usize,
        invariants: &'a [GenRow<'a>],
    }
    let body = render(c.format, &Listing { set: label, count: rows.len(), invariants: &rows }, || {
        rows.iter().map(|r| format!("DI{}\t{}\t{}\n", r.id, r.chain, r.polynomial)).collect()
    })?;
    Ok(Outcome::ok(body))
}

#[derive(Serialize)]
struct Section<T: Serialize> {
    passed: bool,
    summary: String,
    rows: Vec<T>,
}

#[derive(Serialize, Default)]
struct CheckReport {
    passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    invariance: Option<Section<InvarianceRow>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    relations: Option<Section<RelationRecord>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sets: Option<Section<RankRow>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    expansions: Option<Section<ExpansionMatch>>,
}

pub fn check(a: &CheckArgs, c: &Common) -> Result<Outcome> {
    let cat = catalog();
    let all = !(a.invariance || a.relations || a.sets || a.expansions);
    let mut rep = CheckReport::default();
    let mut text = String::new();

    if all || a.invariance {
        let entries: Vec<_> = cat.entries().iter().map(|e| (e.id, e.chain.clone(), e.polynomial.clone())).collect();
        let mut rows = Vec::new();
        let mut summary = Vec::new();
        for g in [MapKind::Euclidean, MapKind::Similarity, MapKind::Affine] {
            let r = invariance_sweep(&entries, g, a.trials, c.seed);
            let count = |s: &str| r.iter().filter(|x| x.status == s).count();
            summary.push(format!("{g:?}: {} pass, {} fail, {} no claim", count("pass"), count("fail"), count("no_claim")));
            rows.extend(r);
        }
        let passed = rows.iter().all(|r| r.status != "fail");
        let summary = summary.join("; ");
        writeln!(text, "invariance: {} ({summary})", verdict(passed)).unwrap();
        for r in rows.iter().filter(|r| r.status == "fail") {
            writeln!(text, "  DI{} {:?} residual {}", r.id, r.group, r.max_residual).unwrap();
        }
        rep.invariance = Some(Section { passed, summary, rows });
    }

    if all || a.relations {
        let rows = verify_relations(cat);
        let exact = rows.iter().filter(|r| r.residual.is_empty()).count();
        let passed = if a.strict { exact == rows.len() } else { exact >= MIN_EXACT_RELATIONS };
        let summary = format!("{exact}/{} exact", rows.len());
        writeln!(text, "relations: {} ({summary})", verdict(passed)).unwrap();
        for r in rows.iter().filter(|r| !r.residual.is_empty()) {
            writeln!(text, "  DI{} = {}\n    residual: {}", r.lhs, r.rhs, r.residual).unwrap();
        }
        rep.relations = Some(Section { passed, summary, rows });
    }

    if all || a.sets {
        let rows = set_size_report(cat);
        let ok = rows.iter().filter(|r| r.status == "pass").count();
        let passed = ok == rows.len();
        let summary = format!("{ok}/{} sets match", rows.len());
        writeln!(text, "sets: {} ({summary})", verdict(passed)).unwrap();
        for r in &rows {
            writeln!(text, "  {} expected {} computed {} [{}] {}", r.set, r.expected, r.computed, r.method, r.status)
                .unwrap();
        }
        rep.sets = Some(Section { passed, summary, rows });
    }

    if all || a.expansions {
        let rows = match_reference_expansions(cat);
        let matched = rows.iter().filter(|r| r.matched_id.is_some()).count();
        let passed = if a.strict { matched == rows.len() } else { matched >= MIN_MATCHED_EXPANSIONS };
        let summary = format!("{matched}/{} match up to a scalar", rows.len());
        writeln!(text, "expansions: {} ({summary})", verdict(passed)).unwrap();
        for r in rows.iter().filter(|r| r.matched_id.is_none()) {
            writeln!(
                text,
                "  DI{} nearest {:?} overlap {:.3}\n    residual: {}",
                r.label,
                r.nearest_id,
                r.nearest_overlap.unwrap_or(0.0),
                r.residual.as_deref().unwrap_or("")
            )
            .unwrap();
        }
        rep.expansions = Some(Section { passed, summary, rows });
    }

    rep.passed = [
        rep.invariance.as_ref().map(|s| s.passed),
        rep.relations.as_ref().map(|s| s.passed),
        rep.sets.as_ref().map(|s| s.passed),
        rep.expansions.as_ref().map(|s| s.passed),
    ]
    .into_iter()
    .flatten()
    .all(|p| p);
    let passed = rep.passed;
    let body = render(c.format, &rep, || text)?;
    Ok(Outcome { body, passed, inputs: Vec::new() })
}

fn verdict(passed: bool) -> &'static str {
    if passed {
        "PASS"
    } else {
        "FAIL"
    }
}

/// Largest odd width that fits the image, used when a default kernel would not.
fn fitting_size(f: &FeatureArgs, img: &Image) -> Option<usize> {
    if f.size.is_some() {
        return f.size;
    }
    let limit = img.width().min(img.height());
    let fit = if limit % 2 == 1 { limit } else { limit - 1 };
    f.sigma.iter().any(|s| default_size(*s) > fit).then_some(fit)
}

pub fn eval(a: &EvalArgs, c: &Common) -> Result<Outcome> {
    check_sigmas(&a.features.sigma)?;
    let set = parse_set(&a.features.set)?;
    let img = read_pgm_unit(&a.patch).with_context(|| format!("reading {}", a.patch.display()))?;
    let (size, padding) = if a.reflect {
        (a.features.size, Padding::Reflect)
    } else {
        (fitting_size(&a.features, &img), Padding::None)
    };
    let fv = FeatureExtractor::new(catalog(), &set.members, &a.features.sigma, size, padding)?.feature_vector(&img)?;
    #[derive(Serialize)]
    struct Eval<'a> {
        set: String,
        kernel_size: Option<usize>,
        #[serde(flatten)]
        features: &'a diffinv::numeric::FeatureVector,
    }
    let body = render(c.format, &Eval { set: set.label(), kernel_size: size, features: &fv }, || {
        let mut s = String::new();
        let n = fv.ids.len();
        for (k, v) in fv.values.iter().enumerate() {
            writeln!(s, "sigma={} DI{} {v:e}", fv.sigmas[k / n], fv.ids[k % n]).unwrap();
        }
        if fv.degenerate {
            s.push_str("degenerate patch: zero variance\n");
        }
        s
    })?;
    Ok(Outcome::ok(body).with_inputs(vec![input_record(&a.patch)?]))
}

fn base_image(path: Option<&Path>, seed: u64) -> Result<(Image, String, Vec<InputRecord>)> {
    match path {
        Some(p) => {
            let img = read_pgm_unit(p).with_context(|| format!("reading {}", p.display()))?;
            let rec = input_record(p)?;
            let desc = format!("{} (sha256 {})", rec.path, rec.sha256);
            Ok((img, desc, vec![rec]))
        }
        None => Ok((default_base_image(seed)?, format!("generated smooth noise, seed {seed}"), Vec::new())),
    }
}

#[derive(Serialize)]
struct MapFile {
    id: u32,
    sigma: f64,
    file: String,
    min: f64,
    max: f64,
}

pub fn featmap(a: &FeatmapArgs, c: &Common, out: Option<&mut OutDir>) -> Result<Outcome> {
    let out = require_out(out, "featmap")?;
    check_sigmas(&a.features.sigma)?;
    let set = parse_set(&a.features.set)?;
    let (img, desc, inputs) = base_image(a.base.as_deref(), c.seed)?;
    let mut files = Vec::new();
    for &sigma in &a.features.sigma {
        let fm = feature_map(catalog(), &img, &set.members, sigma, a.features.size)?;
        for (id, map) in fm.ids.iter().zip(&fm.maps) {
            let (min, max) = map.min_max();
            let file = format!("DI{id}_sigma{sigma}.pgm");
            out.write(&file, &Pgm::quantize(map, min, max, 255).encode(PgmFormat::Binary))?;
            files.push(MapFile { id: *id, sigma, file, min, max });
        }
    }
    #[derive(Serialize)]
    struct Sidecar<'a> {
        set: String,
        image: String,
        width: usize,
        height: usize,
        scaling: &'static str,
        maps: &'a [MapFile],
    }
    let sidecar = Sidecar {
        set: set.label(),
        image: desc,
        width: img.width(),
        height: img.height(),
        scaling: "8-bit, linear from min to max",
        maps: &files,
    };
    out.write("featmap.json", json(&sidecar)?.as_bytes())?;
    let body = render(c.format, &sidecar, || {
        files.iter().map(|f| format!("{} min {:e} max {:e}\n", f.file, f.min, f.max)).collect()
    })?;
    Ok(Outcome::ok(body).with_inputs(inputs))
}

fn parse_transform(s: &str) -> Result<Transform> {
    serde_json::from_value(serde_json::Value::String(s.trim().to_string()))
        .with_context(|| format!("unknown transform {s:?}"))
}

pub fn synthdb(a: &SynthdbArgs, c: &Common, out: Option<&mut OutDir>) -> Result<Outcome> {
    let out = require_out(out, "synthdb")?;
    let mut spec = match a.preset {
        Some(n) => SynthDbSpec::preset(n, a.instances, c.seed)?,
        None => {
            let t = a.transforms.iter().filter(|s| !s.is_empty()).map(|s| parse_transform(s)).collect::<Result<Vec<_>>>()?;
            SynthDbSpec::new(&t, a.instances, c.seed)
        }
    };
    if a.instances == 0 {
        bail!("--instances must be at least 1");
    }
    if !(1..=8).contains(&a.grid) {
        bail!("--grid must be in 1..=8, got {}", a.grid);
    }
    spec.grid = a.grid;
    spec.quarter_turns = a.quarter_turns;
    spec.boundary = if a.reject_boundary { Boundary::Reject } else { Boundary::Reflect };
    let (base, desc, inputs) = base_image(a.base.as_deref(), c.seed)?;
    let db = build_synth_db(&spec, &base)?;
    write_db(&db, &out.path(""), &desc)?;
    out.note("meta.json");
    for (k1, k2) in spec.classes() {
        out.note(&format!("c{k1}_{k2}/"));
    }
    #[derive(Serialize)]
    struct Summary<'a> {
        classes: usize,
        instances: usize,
        patches: usize,
        transforms: &'a [Transform],
        seed: u64,
        base: &'a str,
    }
    let s = Summary {
        classes: db.class_count(),
        instances: spec.instances,
        patches: db.records.len(),
        transforms: &spec.transforms,
        seed: spec.seed,
        base: &desc,
    };
    let body = render(c.format, &s, || {
        format!("{} patches: {} classes x {} instances, transforms {:?}\n", s.patches, s.classes, s.instances, s.transforms)
    })?;
    Ok(Outcome::ok(body).with_inputs(inputs))
}

fn db_features(db: &PatchDatabase, set: &SetDescriptor, f: &FeatureArgs, sigma: f64) -> Result<Vec<Vec<f64>>> {
    let ex = FeatureExtractor::new(catalog(), &set.members, &[sigma], Some(f.size.unwrap_or(PATCH_SIZE)), Padding::None)?;
    Ok(database_features(db, &ex)?)
}

fn open_db(dir: &Path) -> Result<(PatchDatabase, Vec<InputRecord>)> {
    let db = load_db(dir).with_context(|| format!("loading database {}", dir.display()))?;
    Ok((db, vec![input_record(&dir.join("meta.json"))?]))
}

#[derive(Serialize)]
struct MreRow {
    id: u32,
    mre_percent: f64,
}

#[derive(Serialize)]
struct ClassifyRun {
    set: String,
    sigma: f64,
    accuracy: f64,
    correct: usize,
    total: usize,
    per_class: Vec<ClassAccuracy>,
    #[serde(skip_serializing_if = "Option::is_none")]
    mre: Option<Vec<MreRow>>,
}

pub fn classify(a: &ClassifyArgs, c: &Common, out: Option<&mut OutDir>) -> Result<Outcome> {
    check_sigmas(&a.features.sigma)?;
    let set = parse_set(&a.features.set)?;
    let (db, inputs) = open_db(&a.db)?;
    let mut runs = Vec::new();
    for &sigma in &a.features.sigma {
        let f = db_features(&db, &set, &a.features, sigma)?;
        let r = nn_classify_features(&db, &f)?;
        let mre = a.mre.then(|| {
            set.members.iter().zip(mre_features(&db, &f)).map(|(id, m)| MreRow { id: *id, mre_percent: m }).collect()
        });
        runs.push(ClassifyRun {
            set: set.label(),
            sigma,
            accuracy: r.accuracy,
            correct: r.correct,
            total: r.total,
            per_class: r.per_class,
            mre,
        });
    }
    if let Some(out) = out {
        let mut csv = String::from("sigma,accuracy\n");
        for r in &runs {
            writeln!(csv, "{},{}", r.sigma, r.accuracy).unwrap();
        }
        out.write("classify_curve.csv", csv.as_bytes())?;
    }
    let body = render(c.format, &runs, || {
        runs.iter().map(|r| format!("{} sigma={} accuracy={} ({}/{})\n", r.set, r.sigma, r.accuracy, r.correct, r.total)).collect()
    })?;
    Ok(Outcome::ok(body).with_inputs(inputs))
}

#[derive(Serialize)]
struct VerifyRun {
    set: String,
    sigma: f64,
    average_precision: f64,
    positives: usize,
    negatives: usize,
    #[serde(skip)]
    curve: Vec<(f64, f64)>,
}

pub fn verify(a: &VerifyArgs, c: &Common, out: Option<&mut OutDir>) -> Result<Outcome> {
    check_sigmas(&a.features.sigma)?;
    let set = parse_set(&a.features.set)?;
    let (db, inputs) = open_db(&a.db)?;
    let mut runs = Vec::new();
    for &sigma in &a.features.sigma {
        let f = db_features(&db, &set, &a.features, sigma)?;
        let r = pair_verify_features(&db, &f, a.negatives, c.seed)?;
        runs.push(VerifyRun {
            set: set.label(),
            sigma,
            average_precision: r.average_precision,
            positives: r.positives,
            negatives: r.negatives,
            curve: r.curve,
        });
    }
    if let Some(out) = out {
        let mut csv = String::from("sigma,recall,precision\n");
        for r in &runs {
            for (rec, prec) in &r.curve {
                writeln!(csv, "{},{rec},{prec}", r.sigma).unwrap();
            }
        }
        out.write("verify_curve.csv", csv.as_bytes())?;
    }
    let body = render(c.format, &runs, || {
        runs.iter()
            .map(|r| format!("{} sigma={} AP={} ({} positives, {} negatives)\n", r.set, r.sigma, r.average_precision, r.positives, r.negatives))
            .collect()
    })?;
    Ok(Outcome::ok(body).with_inputs(inputs))
}

pub fn report(c: &Common) -> Result<Outcome> {
    let rep = discrepancy_report(catalog());
    Ok(Outcome::ok(render(c.format, &rep, || rep.to_text())?))
}
