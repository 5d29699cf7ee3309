//! Command layer shared by the binary: one config document in, a set of
//! named documents out. Nothing is written here; the caller persists the
//! documents only after the whole command succeeded.

mod config;

use std::fs;
use std::path::Path;

use serde::Serialize;

pub use config::{
    apply_override, load_config, AppConfig, BracketSection, ConstantsSection, EnvelopeKindName, EnvelopeSection,
    FieldSection, LemmaSection,
};

use crate::certify::{make_certificate, t_upper, Envelope, SearchConfig, TimeBracket};
use crate::constants::{ConstantsContext, CutoffSpec, LebesgueExponent as Exp};
use crate::error::{Error, Result};
use crate::fields::io::{read_field, write_field};
use crate::fields::{sample_analytic, BoxGrid, GridField};
use crate::heatflow::{verify_lemma, LemmaId, LemmaReport, SweepSpec};
use crate::mildsolve::{
    dichotomy_verdict, norm_discrepancy, picard_solve, spectral_run, spectral_run_with_state, DichotomyReport,
    RunManifest, SolverConfig,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Constants,
    Certify,
    Simulate,
    Picard,
    VerifyLemmas,
    Envelope,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Constants => "constants",
            Command::Certify => "certify",
            Command::Simulate => "simulate",
            Command::Picard => "picard",
            Command::VerifyLemmas => "verify-lemmas",
            Command::Envelope => "envelope",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Document {
    pub name: String,
    pub bytes: Vec<u8>,
}

impl Document {
    fn text(name: &str, s: String) -> Self {
        Self {
            name: name.to_string(),
            bytes: s.into_bytes(),
        }
    }

    fn json<S: Serialize>(name: &str, value: &S) -> Self {
        let mut s = serde_json::to_string_pretty(value).expect("serializable");
        s.push('\n');
        Self::text(name, s)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub documents: Vec<Document>,
    /// Index of the document printed when no output directory is given.
    pub primary: usize,
    /// False when a verification ran but some check failed.
    pub passed: bool,
}

impl Outcome {
    fn single(doc: Document) -> Self {
        Self {
            documents: vec![doc],
            primary: 0,
            passed: true,
        }
    }
}

/// Wraps a document with the tool version and constants hash.
#[derive(Serialize)]
struct Stamped<'a, B: Serialize> {
    tool_version: &'a str,
    constants_hash: String,
    #[serde(flatten)]
    body: B,
}

fn stamp<B: Serialize>(ctx: &ConstantsContext<f64>, body: B) -> Stamped<'static, B> {
    Stamped {
        tool_version: crate::TOOL_VERSION,
        constants_hash: ctx.hash(),
        body,
    }
}

fn need<'a, T>(section: &'a Option<T>, name: &str, cmd: Command) -> Result<&'a T> {
    section
        .as_ref()
        .ok_or_else(|| Error::Config(format!("`{}` needs a [{name}] section", cmd.name())))
}

/// Runs one command to completion.
pub fn run(cmd: Command, cfg: &AppConfig, format: Format) -> Result<Outcome> {
    if let Some(name) = &cfg.command {
        if name != cmd.name() {
            return Err(Error::Config(format!(
                "config is for `{name}` but `{}` was requested",
                cmd.name()
            )));
        }
    }
    let csv_ok = matches!(cmd, Command::Simulate | Command::Picard | Command::Envelope);
    if format == Format::Csv && !csv_ok {
        return Err(Error::Config(format!("`{}` has no csv output", cmd.name())));
    }
    validate(cmd, cfg)?;
    let ctx = load_constants(&cfg.constants)?;
    match cmd {
        Command::Constants => constants(cfg, &ctx),
        Command::Certify => certify(cfg, &ctx),
        Command::Simulate => simulate(cfg, &ctx, format),
        Command::Picard => picard(cfg, &ctx, format),
        Command::VerifyLemmas => lemmas(cfg, &ctx),
        Command::Envelope => envelope(cfg, &ctx, format),
    }
}

/// Checks the sections a command needs, before any computation.
fn validate(cmd: Command, cfg: &AppConfig) -> Result<()> {
    let field = || -> Result<()> {
        let f = need(&cfg.field, "field", cmd)?;
        match (&f.recipe, &f.file) {
            (Some(_), None) | (None, Some(_)) => Ok(()),
            _ => Err(Error::Config("[field] needs exactly one of `recipe` and `file`".into())),
        }
    };
    match cmd {
        Command::Constants => Ok(()),
        Command::Certify => {
            field()?;
            search(cfg).validate().map_err(|e| Error::Config(e.to_string()))
        }
        Command::Simulate => {
            field()?;
            need(&cfg.solver, "solver", cmd)?;
            if let Some(b) = &cfg.bracket {
                b.p.check_p_role().map_err(|e| Error::Config(e.to_string()))?;
                b.q.check_q_role().map_err(|e| Error::Config(e.to_string()))?;
            }
            Ok(())
        }
        Command::Picard => {
            field()?;
            need(&cfg.picard, "picard", cmd)?.validate()
        }
        Command::VerifyLemmas => lemma_ids(&cfg.lemmas).map(|_| ()),
        Command::Envelope => {
            let e = need(&cfg.envelope, "envelope", cmd)?;
            e.p.check_p_role().map_err(|e| Error::Config(e.to_string()))?;
            match e.kind {
                EnvelopeKindName::Decay => {
                    let q = e.q.ok_or_else(|| Error::Config("a decay envelope needs `q`".into()))?;
                    q.check_q_role().map_err(|e| Error::Config(e.to_string()))?;
                    if e.norm_q.is_none() {
                        field()?;
                    }
                }
                EnvelopeKindName::Blowup => {
                    if !e.t_max.is_some_and(|t| t > 0.0) {
                        return Err(Error::Config("a blow-up envelope needs a positive `t_max`".into()));
                    }
                }
            }
            if e.times.is_none() && e.count == 0 {
                return Err(Error::Config("`count` must be positive".into()));
            }
            Ok(())
        }
    }
}

fn search(cfg: &AppConfig) -> SearchConfig<f64> {
    cfg.search.clone().unwrap_or_default()
}

fn load_constants(sec: &ConstantsSection) -> Result<ConstantsContext<f64>> {
    match (&sec.file, sec.compute) {
        (Some(_), true) => Err(Error::Config("[constants] takes `file` or `compute`, not both".into())),
        (Some(path), false) => ConstantsContext::from_json(&fs::read_to_string(path)?),
        (None, true) => ConstantsContext::compute(sec.cutoff.clone().unwrap_or_else(CutoffSpec::default)),
        (None, false) => {
            if sec.cutoff.is_some() {
                return Err(Error::Config("[constants] `cutoff` needs `compute = true`".into()));
            }
            Ok(ConstantsContext::golden())
        }
    }
}

/// The initial field and its time stamp.
fn load_field(sec: &FieldSection) -> Result<(GridField<f64>, f64)> {
    if let Some(path) = &sec.file {
        return read_field(fs::File::open(path)?);
    }
    let recipe = sec.recipe.as_ref().expect("validated");
    let length = sec.length.unwrap_or_else(|| recipe.natural_length());
    let grid = BoxGrid::new(sec.n, length).map_err(|e| Error::Config(e.to_string()))?;
    Ok((sample_analytic(recipe, grid)?, 0.0))
}

#[derive(Serialize)]
struct ConstantRow {
    p: Exp<f64>,
    nonlinear_factor: f64,
    /// Absent at `p = ∞`, where the smallness threshold is undefined.
    l3_threshold: Option<f64>,
    blowup_constant: f64,
}

#[derive(Serialize)]
struct PairRow {
    p: Exp<f64>,
    q: Exp<f64>,
    k0: f64,
}

#[derive(Serialize)]
struct ConstantsBody {
    #[serde(flatten)]
    document: crate::constants::ConstantsDocument,
    table: Vec<ConstantRow>,
    pairs: Vec<PairRow>,
}

fn constants(cfg: &AppConfig, ctx: &ConstantsContext<f64>) -> Result<Outcome> {
    let defaults = SearchConfig::<f64>::default();
    let sc = SearchConfig {
        p_grid: cfg.constants.p_grid.clone().unwrap_or(defaults.p_grid),
        q_grid: cfg.constants.q_grid.clone().unwrap_or(defaults.q_grid),
    };
    sc.validate()?;
    let mut ps = sc.p_grid.clone();
    ps.sort_by(|a, b| a.to_f64().total_cmp(&b.to_f64()));
    ps.dedup();
    let table = ps
        .iter()
        .map(|&p| {
            Ok(ConstantRow {
                p,
                nonlinear_factor: ctx.nonlinear_factor(p)?,
                l3_threshold: if p.is_infinite() { None } else { Some(ctx.idc3p_threshold(p)?) },
                blowup_constant: crate::certify::blowup_constant(p, ctx)?,
            })
        })
        .collect::<Result<_>>()?;
    let pairs = sc
        .pairs()
        .into_iter()
        .map(|(p, q)| Ok(PairRow { p, q, k0: ctx.k0(p, q)? }))
        .collect::<Result<_>>()?;
    let body = ConstantsBody {
        document: ctx.document(),
        table,
        pairs,
    };
    Ok(Outcome::single(Document::json("constants.json", &stamp(ctx, body))))
}

fn certify(cfg: &AppConfig, ctx: &ConstantsContext<f64>) -> Result<Outcome> {
    let (field, _) = load_field(cfg.field.as_ref().expect("validated"))?;
    let cert = make_certificate(&field, &search(cfg), ctx)?;
    Ok(Outcome::single(Document::text("certificate.json", cert.to_json())))
}

fn solver_config(cfg: &AppConfig, field: &GridField<f64>, t_start: f64) -> Result<(SolverConfig, bool)> {
    let mut table = cfg.solver.clone().expect("validated");
    let save = match table.remove("save_state") {
        None => false,
        Some(toml::Value::Boolean(b)) => b,
        Some(v) => return Err(Error::Config(format!("save_state must be a boolean, got {v}"))),
    };
    if table.contains_key("grid") {
        return Err(Error::Config("[solver] takes its grid from [field]".into()));
    }
    let grid = toml::Table::from_iter([
        ("n".to_string(), toml::Value::Integer(field.grid.n as i64)),
        ("length".to_string(), toml::Value::Float(field.grid.length)),
    ]);
    table.insert("grid".into(), toml::Value::Table(grid));
    table.entry("t_start").or_insert(toml::Value::Float(t_start));
    let sc = SolverConfig::deserialize_table(table)?;
    sc.validate()?;
    Ok((sc, save))
}

impl SolverConfig {
    fn deserialize_table(table: toml::Table) -> Result<Self> {
        serde::Deserialize::deserialize(toml::Value::Table(table)).map_err(|e: toml::de::Error| Error::Config(e.to_string()))
    }
}

#[derive(Serialize)]
struct SimulateBody {
    #[serde(flatten)]
    manifest: RunManifest,
    #[serde(skip_serializing_if = "Option::is_none")]
    dichotomy: Option<DichotomyReport>,
}

fn simulate(cfg: &AppConfig, ctx: &ConstantsContext<f64>, format: Format) -> Result<Outcome> {
    let fsec = cfg.field.as_ref().expect("validated");
    let (field, t0) = load_field(fsec)?;
    let (sc, save) = solver_config(cfg, &field, t0)?;
    let bracket = match &cfg.bracket {
        Some(b) => {
            for &len in &b.box_lengths {
                if fsec.recipe.is_none() || !(len > 0.0) {
                    return Err(Error::Config(
                        "box_lengths needs a recipe field and positive lengths".into(),
                    ));
                }
                BoxGrid::new(field.grid.n, len).map_err(|e| Error::Config(e.to_string()))?;
            }
            let t = TimeBracket::new(b.p, b.q, field.norm(b.p), field.norm(b.q), ctx)?;
            Some(t.ok_or_else(|| Error::Config("zero data has no bracket".into()))?)
        }
        None => None,
    };
    let (run, last) = spectral_run_with_state(&field, &sc, ctx)?;
    let dichotomy = match (&bracket, &cfg.bracket) {
        (Some(b), Some(sec)) => {
            let mut report = dichotomy_verdict(&run, b, ctx)?;
            let mut spread = None::<f64>;
            for &len in &sec.box_lengths {
                let mut other = fsec.clone();
                other.length = Some(len);
                let (f, _) = load_field(&other)?;
                let mut c = sc.clone();
                c.grid = BoxGrid::new(field.grid.n, len)?;
                c.refinement.clear();
                c.measure_n = None;
                let r = spectral_run(&f, &c, ctx)?;
                spread = Some(spread.unwrap_or(0.0).max(norm_discrepancy(&run, &r)));
            }
            report.box_sensitivity = spread;
            Some(report)
        }
        _ => None,
    };
    let csv = Document::text("run.csv", run.to_csv());
    let manifest = Document::json(
        "manifest.json",
        &SimulateBody {
            manifest: run.manifest(),
            dichotomy,
        },
    );
    let mut documents = vec![csv, manifest];
    if save {
        let mut bytes = Vec::new();
        write_field(&last, run.t_reached, &mut bytes)?;
        documents.push(Document {
            name: "state.bin".into(),
            bytes,
        });
    }
    Ok(Outcome {
        documents,
        primary: if format == Format::Csv { 0 } else { 1 },
        passed: true,
    })
}

fn picard(cfg: &AppConfig, ctx: &ConstantsContext<f64>, format: Format) -> Result<Outcome> {
    let (field, _) = load_field(cfg.field.as_ref().expect("validated"))?;
    let r = picard_solve(&field, cfg.picard.as_ref().expect("validated"), ctx)?;
    let mut csv = String::from("t,norm\n");
    for (t, v) in r.times.iter().zip(&r.norms) {
        csv.push_str(&format!("{t:e},{v:e}\n"));
    }
    Ok(Outcome {
        documents: vec![Document::json("picard.json", &r), Document::text("picard.csv", csv)],
        primary: if format == Format::Csv { 1 } else { 0 },
        passed: true,
    })
}

fn lemma_ids(sec: &LemmaSection) -> Result<Vec<LemmaId>> {
    let all = [LemmaId::Riesz, LemmaId::Heat, LemmaId::Gradient, LemmaId::RieszGradient];
    match sec.lemma.as_deref().unwrap_or("all") {
        "all" => Ok(all.to_vec()),
        "riesz" => Ok(vec![LemmaId::Riesz]),
        "heat" => Ok(vec![LemmaId::Heat]),
        "gradient" => Ok(vec![LemmaId::Gradient]),
        "riesz_gradient" | "riesz-gradient" => Ok(vec![LemmaId::RieszGradient]),
        other => Err(Error::Config(format!(
            "unknown lemma `{other}`; expected riesz, heat, gradient, riesz_gradient or all"
        ))),
    }
}

#[derive(Serialize)]
struct LemmaBody {
    pass: bool,
    reports: Vec<LemmaReport>,
}

fn lemmas(cfg: &AppConfig, ctx: &ConstantsContext<f64>) -> Result<Outcome> {
    let sec = &cfg.lemmas;
    let reports = lemma_ids(sec)?
        .into_iter()
        .map(|id| {
            let mut sweep = if id == LemmaId::Riesz {
                SweepSpec::riesz(sec.riesz_fields.unwrap_or(50))
            } else {
                SweepSpec::standard()
            };
            if let Some(t) = sec.tolerance {
                sweep.tolerance = t;
            }
            verify_lemma(id, &sweep, ctx)
        })
        .collect::<Result<Vec<_>>>()?;
    let pass = reports.iter().all(|r| r.pass);
    let mut out = Outcome::single(Document::json("lemmas.json", &stamp(ctx, LemmaBody { pass, reports })));
    out.passed = pass;
    Ok(out)
}

fn envelope(cfg: &AppConfig, ctx: &ConstantsContext<f64>, format: Format) -> Result<Outcome> {
    let e = cfg.envelope.as_ref().expect("validated");
    let spread = |a: f64, b: f64, log: bool| -> Vec<f64> {
        let m = e.count.max(1);
        (0..m)
            .map(|k| {
                let s = k as f64 / (m.max(2) - 1) as f64;
                if log {
                    a * (b / a).powf(s)
                } else {
                    a + (b - a) * s
                }
            })
            .collect()
    };
    let env = match e.kind {
        EnvelopeKindName::Decay => {
            let q = e.q.expect("validated");
            let norm_q = match e.norm_q {
                Some(v) => v,
                None => load_field(cfg.field.as_ref().expect("validated"))?.0.norm(q),
            };
            let times = match &e.times {
                Some(t) => t.clone(),
                None => match t_upper(e.p, q, norm_q, ctx)?.time() {
                    Some(t_r) => spread(1.01 * t_r, 100.0 * t_r, true),
                    None => vec![1.0],
                },
            };
            Envelope::decay(e.p, q, norm_q, &times, ctx)?
        }
        EnvelopeKindName::Blowup => {
            let t_max = e.t_max.expect("validated");
            let times = e.times.clone().unwrap_or_else(|| {
                let mut t = spread(0.0, t_max, false);
                t.pop();
                t
            });
            Envelope::blowup(e.p, t_max, &times, ctx)?
        }
    };
    let mut csv = String::from("t,bound\n");
    for (t, b) in &env.samples {
        csv.push_str(&format!("{t:e},{b:e}\n"));
    }
    Ok(Outcome {
        documents: vec![
            Document::json("envelope.json", &stamp(ctx, &env)),
            Document::text("envelope.csv", csv),
        ],
        primary: if format == Format::Csv { 1 } else { 0 },
        passed: true,
    })
}

/// Writes every document into `dir`, or none of them: each goes to a
/// temporary name first and is renamed once all writes succeeded.
pub fn write_all(dir: &Path, docs: &[Document]) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut staged = Vec::new();
    let result = (|| -> Result<()> {
        for d in docs {
            let tmp = dir.join(format!(".{}.partial", d.name));
            staged.push(tmp.clone());
            fs::write(&tmp, &d.bytes)?;
        }
        for (d, tmp) in docs.iter().zip(&staged) {
            fs::rename(tmp, dir.join(&d.name))?;
        }
        Ok(())
    })();
    if result.is_err() {
        for tmp in &staged {
            let _ = fs::remove_file(tmp);
        }
    }
    result
}
