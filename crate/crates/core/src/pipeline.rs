//! End-to-end analysis of one (algebra, metric) pair, the geodesic probe front end, and
//! regeneration of the tables from the embedded expectations.

use nalgebra::{Matrix3, Vector3};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use crate::bianchi::{classify, family, BianchiClass, BianchiTag};
use crate::curvature::curvature_report;
use crate::geodesic::{self, Outcome, ProbeVerdict, Sample, SweepReport};
use crate::isotropy::{classify_type, skew_derivations, Causal};
use crate::lie::{LieAlgebra3, Structure};
use crate::linalg::{mat_from_rows, mat_to_rows};
use crate::metric::{MetricForm, Signature};
use crate::normal_form::forms::{CanonicalForm, FormId, Params};
use crate::normal_form::tables::{atlas, match_tables, sign_label, Completeness, KillingReport, SCHEMA_VERSION};
use crate::normal_form::{reduce, NormalFormMatch};
use crate::{Error, Result, Tolerances};

pub const DEFAULT_HORIZON: f64 = 1e3;
pub const DEFAULT_PROBE_TOL: f64 = 1e-9;

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgebraSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<BianchiTag>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub param: Option<f64>,
    /// `structure[i][j][k]` is the e_k coefficient of `[e_i, e_j]`
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub structure: Option<Structure>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RequestOptions {
    pub tolerances: Option<Tolerances>,
    pub seed: Option<u64>,
    /// when set, `analyze` also runs the geodesic probe
    pub probe_horizon: Option<f64>,
    pub probe_tol: Option<f64>,
    /// single initial velocity; without it the probe sweeps a fixed set of directions
    pub v0: Option<[f64; 3]>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisRequest {
    pub algebra: AlgebraSpec,
    pub metric: [[f64; 3]; 3],
    #[serde(default)]
    pub options: RequestOptions,
}

impl AnalysisRequest {
    pub fn new(tag: BianchiTag, param: Option<f64>, metric: Matrix3<f64>) -> Self {
        AnalysisRequest {
            algebra: AlgebraSpec { family: Some(tag), param, structure: None },
            metric: mat_to_rows(&metric),
            options: RequestOptions::default(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidInput(e.to_string()))
    }

    /// Builds the algebra, validating structure constants against `tol`.
    pub fn algebra(&self, tol: &Tolerances) -> Result<LieAlgebra3> {
        match (&self.algebra.family, &self.algebra.structure) {
            (Some(tag), None) => {
                if !tag.has_param() && self.algebra.param.is_some() {
                    return Err(Error::InvalidInput(format!("family {tag} takes no param")));
                }
                family::preferred(*tag, self.algebra.param)
            }
            (None, Some(c)) => {
                if self.algebra.param.is_some() {
                    return Err(Error::InvalidInput("param given without a family".into()));
                }
                if !c.iter().flatten().flatten().all(|x| x.is_finite()) {
                    return Err(Error::InvalidInput("non-finite structure constant".into()));
                }
                LieAlgebra3::new(*c, tol)
            }
            (Some(_), Some(_)) => Err(Error::InvalidInput("give either family or structure, not both".into())),
            (None, None) => Err(Error::InvalidInput("algebra needs a family or a structure".into())),
        }
    }
}

/// Command-line overrides, applied on top of the request options.
#[derive(Clone, Copy, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub eps_jac: Option<f64>,
    pub eps_rank: Option<f64>,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct Settings {
    pub tolerances: Tolerances,
    pub seed: u64,
}

impl Settings {
    pub fn resolve(opts: &RequestOptions, ov: &Overrides) -> Result<Self> {
        let mut tolerances = opts.tolerances.unwrap_or_default();
        if let Some(e) = ov.eps_jac {
            tolerances.eps_jac = e;
        }
        if let Some(e) = ov.eps_rank {
            tolerances.eps_rank = e;
        }
        let t = &tolerances;
        for (name, v) in [("eps_jac", t.eps_jac), ("eps_rank", t.eps_rank), ("eps_eig", t.eps_eig), ("eps_param", t.eps_param)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::InvalidInput(format!("{name} = {v} must lie in (0, 1)")));
            }
        }
        Ok(Settings { tolerances, seed: ov.seed.or(opts.seed).unwrap_or(0) })
    }
}

impl Default for Settings {
    fn default() -> Self {
        Settings { tolerances: Tolerances::default(), seed: 0 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BianchiSummary {
    pub tag: BianchiTag,
    pub param: Option<f64>,
    /// columns are the preferred basis written in the input basis
    pub basis_change: [[f64; 3]; 3],
    pub boundary_flags: Vec<String>,
}

impl From<&BianchiClass> for BianchiSummary {
    fn from(c: &BianchiClass) -> Self {
        BianchiSummary {
            tag: c.tag,
            param: c.param,
            basis_change: mat_to_rows(&c.basis_change),
            boundary_flags: c.boundary_flags.clone(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CurvatureSummary {
    pub signature: Signature,
    pub constant_k: Option<f64>,
    pub scalar: f64,
    pub ricci: [[f64; 3]; 3],
    pub ricci_residual: f64,
    pub sectional_min: Option<f64>,
    pub sectional_max: Option<f64>,
    pub sectional_spread: f64,
    pub planes_sampled: usize,
    pub skipped_planes: usize,
    pub tests_disagree: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SkewElement {
    pub matrix: [[f64; 3]; 3],
    #[serde(rename = "type")]
    pub kind: &'static str,
    pub invariant_line: [f64; 3],
    pub line_causal: Causal,
    pub trace: f64,
    pub rank: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct SkewSummary {
    pub dim: usize,
    pub types: Vec<&'static str>,
    pub elements: Vec<SkewElement>,
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum ProbeResult {
    Single { verdict: ProbeVerdict },
    Sweep { report: SweepReport },
}

impl ProbeResult {
    pub fn outcome(&self) -> Outcome {
        match self {
            ProbeResult::Single { verdict } => verdict.outcome,
            ProbeResult::Sweep { report } => report.overall,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct AnalysisReport {
    pub schema_version: u32,
    pub settings: Settings,
    pub bianchi: BianchiSummary,
    pub curvature: CurvatureSummary,
    pub skew_derivations: SkewSummary,
    pub normal_form: NormalFormMatch,
    pub killing: KillingReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub probe: Option<ProbeResult>,
    /// disagreements between independent computations that do not abort the run
    pub warnings: Vec<String>,
}

fn summarize_curvature(c: &crate::curvature::CurvatureReport, sig: Signature) -> CurvatureSummary {
    let ks: Vec<f64> = c.sectional_samples.iter().filter_map(|s| s.k).collect();
    CurvatureSummary {
        signature: sig,
        constant_k: c.constant_k,
        scalar: c.scalar,
        ricci: mat_to_rows(&c.ricci),
        ricci_residual: c.ricci_residual,
        sectional_min: ks.iter().cloned().reduce(f64::min),
        sectional_max: ks.iter().cloned().reduce(f64::max),
        sectional_spread: c.sectional_spread,
        planes_sampled: c.sectional_samples.len(),
        skipped_planes: c.skipped_planes,
        tests_disagree: c.tests_disagree,
    }
}

/// Skew derivations must generate exactly the isotropy the tables predict.
fn cross_check(k: &KillingReport, s: &SkewSummary) -> Vec<String> {
    let mut w = Vec::new();
    match k.killing_dim {
        3 if s.dim != 0 => w.push(format!("killing dim 3 but {} skew derivations", s.dim)),
        4 => match k.g_ideal_in_l {
            Some(true) => {
                if s.dim != 1 {
                    w.push(format!("isotropy acts by automorphisms but found {} skew derivations", s.dim));
                } else if Some(s.types[0]) != k.isotropy_type.as_deref() {
                    w.push(format!("skew derivation is {} but the table says {:?}", s.types[0], k.isotropy_type));
                }
            }
            Some(false) if s.dim != 0 => w.push(format!("group not an ideal yet {} skew derivations", s.dim)),
            _ => {}
        },
        _ => {}
    }
    w
}

/// Runs the full pipeline on an algebra already built in the input basis.
pub fn analyze_algebra(a: &LieAlgebra3, metric: &Matrix3<f64>, settings: &Settings) -> Result<AnalysisReport> {
    let tol = &settings.tolerances;
    let g = MetricForm::new(*metric, tol)?;
    let class = classify(a, tol)?;
    let curv = curvature_report(a, &g, tol.eps_rank, settings.seed);
    let space = skew_derivations(a, &g, tol);
    let mut elements = Vec::new();
    for u in &space.basis {
        let e = classify_type(u, &g, tol)?;
        elements.push(SkewElement {
            matrix: mat_to_rows(&e.matrix),
            kind: e.kind.table_name(),
            invariant_line: e.invariant_line.into(),
            line_causal: e.causal_character_of_line,
            trace: e.trace,
            rank: e.rank,
        });
    }
    let skew = SkewSummary { dim: space.dim, types: elements.iter().map(|e| e.kind).collect(), elements };
    let nf = reduce(a, &g, &class, tol)?;
    let killing = match_tables(&nf, g.signature, &curv, tol)?;
    let warnings = cross_check(&killing, &skew);
    Ok(AnalysisReport {
        schema_version: SCHEMA_VERSION,
        settings: *settings,
        bianchi: (&class).into(),
        curvature: summarize_curvature(&curv, g.signature),
        skew_derivations: skew,
        normal_form: nf,
        killing,
        probe: None,
        warnings,
    })
}

pub fn analyze(req: &AnalysisRequest, ov: &Overrides) -> Result<AnalysisReport> {
    let settings = Settings::resolve(&req.options, ov)?;
    let a = req.algebra(&settings.tolerances)?;
    let metric = mat_from_rows(req.metric);
    let mut report = analyze_algebra(&a, &metric, &settings)?;
    if let Some(h) = req.options.probe_horizon {
        let g = MetricForm::new(metric, &settings.tolerances)?;
        let tol = req.options.probe_tol.unwrap_or(DEFAULT_PROBE_TOL);
        report.probe = Some(run_probe(&a, &g, req.options.v0, h, tol)?.0);
    }
    Ok(report)
}

fn run_probe(a: &LieAlgebra3, g: &MetricForm, v0: Option<[f64; 3]>, horizon: f64, tol: f64) -> Result<(ProbeResult, Vec<Sample>)> {
    geodesic::check_tolerance(tol)?;
    match v0 {
        Some(v) => {
            let (verdict, samples) = geodesic::integrate(a, g, &Vector3::from(v), horizon, tol)?;
            Ok((ProbeResult::Single { verdict }, samples))
        }
        None => {
            let report = geodesic::sweep(a, g, horizon, tol)?;
            // trajectory for the CSV: the first escaping direction, else the fastest one
            let pick = report
                .verdicts
                .iter()
                .find(|v| v.outcome == Outcome::BlowupDetected)
                .or_else(|| report.verdicts.iter().max_by(|x, y| x.max_abs_v.total_cmp(&y.max_abs_v)))
                .map(|v| v.v0)
                .unwrap_or([0.0; 3]);
            let (_, samples) = geodesic::integrate(a, g, &Vector3::from(pick), horizon, tol)?;
            Ok((ProbeResult::Sweep { report }, samples))
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ProbeRun {
    pub schema_version: u32,
    pub family: BianchiTag,
    pub family_param: Option<f64>,
    pub signature: Signature,
    pub horizon: f64,
    pub tol: f64,
    pub result: ProbeResult,
    #[serde(skip)]
    pub samples: Vec<Sample>,
}

/// Geodesic probe on the request's metric; `horizon` and `tol` override the request options.
pub fn probe(req: &AnalysisRequest, ov: &Overrides, horizon: Option<f64>, tol: Option<f64>) -> Result<ProbeRun> {
    let settings = Settings::resolve(&req.options, ov)?;
    let horizon = horizon.or(req.options.probe_horizon).unwrap_or(DEFAULT_HORIZON);
    let tol = tol.or(req.options.probe_tol).unwrap_or(DEFAULT_PROBE_TOL);
    geodesic::check_tolerance(tol)?;
    let a = req.algebra(&settings.tolerances)?;
    let g = MetricForm::new(mat_from_rows(req.metric), &settings.tolerances)?;
    let class = classify(&a, &settings.tolerances)?;
    let (result, samples) = run_probe(&a, &g, req.options.v0, horizon, tol)?;
    Ok(ProbeRun {
        schema_version: SCHEMA_VERSION,
        family: class.tag,
        family_param: class.param,
        signature: g.signature,
        horizon,
        tol,
        result,
        samples,
    })
}

// ---------------------------------------------------------------------------------------
// atlas regeneration

/// One concrete (family parameter, form parameters) instance of a table row.
#[derive(Clone, Debug, Serialize)]
pub struct Instance {
    pub family_param: Option<f64>,
    pub params: Params,
    pub metric: [[f64; 3]; 3],
    /// true when the form has signature (1,2) and its negative was analyzed
    pub negated: bool,
    pub killing_dim: Option<u8>,
    pub matched_row: Option<String>,
    pub reduced_form: Option<String>,
    pub constant_k: Option<f64>,
    pub curvature_sign: Option<String>,
    pub ricci_residual: Option<f64>,
    pub completeness: Option<Completeness>,
    pub isotropy_type: Option<String>,
    pub g_ideal_in_l: Option<bool>,
    pub derived_killing: Option<String>,
    pub skew_dim: Option<usize>,
    pub skew_types: Vec<&'static str>,
    pub error: Option<String>,
    pub problems: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Table2Out {
    pub key: String,
    pub family: BianchiTag,
    pub metric: String,
    pub curvature: String,
    pub instances: Vec<Instance>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Table3Out {
    pub key: String,
    pub family: BianchiTag,
    pub metric: String,
    pub isotropy: String,
    pub ideal: bool,
    pub derived: String,
    pub instances: Vec<Instance>,
    /// parameter values outside the row, which must not give a 4-dimensional Killing algebra
    pub excluded: Vec<Instance>,
}

#[derive(Clone, Debug, Serialize)]
pub struct NormalFormsOut {
    pub family: BianchiTag,
    pub form: FormId,
    pub template: &'static str,
    pub instances: Vec<Instance>,
    pub killing_dims: Vec<u8>,
}

#[derive(Clone, Debug, Serialize)]
pub struct AtlasFile<T> {
    pub schema_version: u32,
    pub rows: Vec<T>,
}

#[derive(Clone, Debug)]
pub struct AtlasOutput {
    pub table2: AtlasFile<Table2Out>,
    pub table3: AtlasFile<Table3Out>,
    pub normal_forms: AtlasFile<NormalFormsOut>,
    pub mismatches: Vec<String>,
}

impl AtlasOutput {
    /// Writes the three files into `dir`.
    pub fn write(&self, dir: &std::path::Path) -> std::io::Result<()> {
        std::fs::create_dir_all(dir)?;
        let put = |name: &str, v: serde_json::Value| {
            let mut s = serde_json::to_string_pretty(&v).expect("atlas serializes");
            s.push('\n');
            std::fs::write(dir.join(name), s)
        };
        put("table2.json", serde_json::to_value(&self.table2).expect("serializes"))?;
        put("table3.json", serde_json::to_value(&self.table3).expect("serializes"))?;
        put("normal_forms.json", serde_json::to_value(&self.normal_forms).expect("serializes"))
    }

    pub fn check(&self) -> Result<()> {
        if self.mismatches.is_empty() {
            Ok(())
        } else {
            Err(Error::AtlasMismatch(self.mismatches.clone()))
        }
    }
}

fn family_values(tag: BianchiTag) -> Vec<Option<f64>> {
    match atlas().family_params.get(&tag) {
        Some(v) if tag.has_param() => v.iter().map(|x| Some(*x)).collect(),
        _ => vec![None],
    }
}

/// Cartesian product of named value lists, in the form's parameter order.
fn grid(id: FormId, values: &BTreeMap<String, Vec<f64>>) -> Vec<Params> {
    let mut out = vec![Params::new()];
    for name in id.param_names() {
        let vs = values.get(*name).unwrap_or_else(|| panic!("{id:?}: no values for {name}"));
        out = out
            .into_iter()
            .flat_map(|p| {
                vs.iter().map(move |v| {
                    let mut q = p.clone();
                    q.insert(name.to_string(), *v);
                    q
                })
            })
            .collect();
    }
    out
}

fn run_instance(tag: BianchiTag, fp: Option<f64>, id: FormId, params: &Params, settings: &Settings) -> Instance {
    let m = CanonicalForm { id, params: params.clone() }.matrix();
    let negated = MetricForm::new(m, &settings.tolerances).is_err() && MetricForm::new(-m, &settings.tolerances).is_ok();
    let metric = if negated { -m } else { m };
    let mut inst = Instance {
        family_param: fp,
        params: params.clone(),
        metric: mat_to_rows(&metric),
        negated,
        killing_dim: None,
        matched_row: None,
        reduced_form: None,
        constant_k: None,
        curvature_sign: None,
        ricci_residual: None,
        completeness: None,
        isotropy_type: None,
        g_ideal_in_l: None,
        derived_killing: None,
        skew_dim: None,
        skew_types: vec![],
        error: None,
        problems: vec![],
    };
    let run = family::preferred(tag, fp).and_then(|a| analyze_algebra(&a, &metric, settings));
    match run {
        Ok(r) => {
            let k = &r.killing;
            inst.killing_dim = Some(k.killing_dim);
            inst.matched_row = k.matched_row.clone();
            inst.reduced_form = Some(r.normal_form.rendered.clone());
            inst.constant_k = k.constant_k_canonical;
            inst.curvature_sign = k.constant_k_canonical.map(|x| sign_label(x).to_string());
            inst.ricci_residual = Some(r.curvature.ricci_residual);
            inst.completeness = Some(k.completeness);
            inst.isotropy_type = k.isotropy_type.clone();
            inst.g_ideal_in_l = k.g_ideal_in_l;
            inst.derived_killing = k.derived_killing.clone();
            inst.skew_dim = Some(r.skew_derivations.dim);
            inst.skew_types = r.skew_derivations.types.clone();
            inst.problems.extend(r.warnings);
        }
        Err(e) => inst.error = Some(format!("{}: {e}", e.kind())),
    }
    inst
}

fn label(key: &str, inst: &Instance) -> String {
    let mut s = key.to_string();
    if let Some(p) = inst.family_param {
        s.push_str(&format!(" [param {p}]"));
    }
    for (n, v) in &inst.params {
        s.push_str(&format!(" {n}={v}"));
    }
    s
}

fn expect_table2(row_key: &str, sign: &str, inst: &mut Instance) {
    if let Some(e) = &inst.error {
        inst.problems.push(e.clone());
        return;
    }
    if inst.killing_dim != Some(6) {
        inst.problems.push(format!("killing dim {:?}, expected 6", inst.killing_dim));
    }
    if inst.matched_row.as_deref() != Some(row_key) {
        inst.problems.push(format!("matched {:?}", inst.matched_row));
    }
    if inst.curvature_sign.as_deref() != Some(sign) {
        inst.problems.push(format!("curvature sign {:?}, expected {sign}", inst.curvature_sign));
    }
    if inst.ricci_residual.map_or(true, |r| r > 1e-8) {
        inst.problems.push(format!("Ricci residual {:?}", inst.ricci_residual));
    }
    if inst.completeness != Some(Completeness::Complete) {
        inst.problems.push(format!("completeness {:?}", inst.completeness));
    }
}

fn expect_table3(row: &crate::normal_form::tables::Table3Row, inst: &mut Instance) {
    if let Some(e) = &inst.error {
        inst.problems.push(e.clone());
        return;
    }
    if inst.killing_dim != Some(4) {
        inst.problems.push(format!("killing dim {:?}, expected 4", inst.killing_dim));
    }
    if inst.matched_row.as_deref() != Some(row.key.as_str()) {
        inst.problems.push(format!("matched {:?}", inst.matched_row));
    }
    if inst.isotropy_type.as_deref() != Some(row.isotropy.as_str()) {
        inst.problems.push(format!("isotropy {:?}, expected {}", inst.isotropy_type, row.isotropy));
    }
    if inst.g_ideal_in_l != Some(row.ideal) {
        inst.problems.push(format!("ideal {:?}, expected {}", inst.g_ideal_in_l, row.ideal));
    }
    if inst.derived_killing.as_deref() != Some(row.derived.as_str()) {
        inst.problems.push(format!("derived {:?}, expected {}", inst.derived_killing, row.derived));
    }
}

fn expect_excluded(inst: &mut Instance) {
    if inst.killing_dim == Some(4) {
        inst.problems.push("excluded value reports killing dim 4".into());
    }
}

fn expect_sweep(tag: BianchiTag, inst: &mut Instance) {
    if let Some(e) = &inst.error {
        inst.problems.push(e.clone());
        return;
    }
    if tag == BianchiTag::Euc2 && inst.killing_dim == Some(4) {
        inst.problems.push("euc2 metric with one-dimensional isotropy".into());
    }
}

enum Job {
    T2(usize, Option<f64>),
    T3(usize, Option<f64>, Params),
    T3Excluded(usize, Option<f64>, Params),
    Sweep(BianchiTag, usize, Option<f64>, Params),
}

/// Re-derives every table row by running the pipeline on its canonical metrics.
pub fn build_atlas(settings: &Settings) -> AtlasOutput {
    let at = atlas();
    let mut jobs = Vec::new();
    for (i, row) in at.table2.iter().enumerate() {
        for fp in family_values(row.family) {
            jobs.push(Job::T2(i, fp));
        }
    }
    for (i, row) in at.table3.iter().enumerate() {
        let mut vals = row.fixed.clone();
        let mut excl = row.fixed.clone();
        if let Some(free) = &row.free {
            vals.insert(free.name.clone(), row.samples.clone());
            excl.insert(free.name.clone(), row.excluded.clone());
        }
        for fp in family_values(row.family) {
            for p in grid(row.form, &vals) {
                jobs.push(Job::T3(i, fp, p));
            }
            if row.free.is_some() && !row.excluded.is_empty() {
                for p in grid(row.form, &excl) {
                    jobs.push(Job::T3Excluded(i, fp, p));
                }
            }
        }
    }
    for (tag, entries) in &at.normal_forms {
        for (j, entry) in entries.iter().enumerate() {
            for fp in family_values(*tag) {
                for p in grid(entry.form, &entry.grid) {
                    jobs.push(Job::Sweep(*tag, j, fp, p));
                }
            }
        }
    }

    let results: Vec<Instance> = jobs
        .par_iter()
        .map(|job| match job {
            Job::T2(i, fp) => {
                let r = &at.table2[*i];
                let mut inst = run_instance(r.family, *fp, r.form, &r.params, settings);
                expect_table2(&r.key, &r.curvature, &mut inst);
                inst
            }
            Job::T3(i, fp, p) => {
                let r = &at.table3[*i];
                let mut inst = run_instance(r.family, *fp, r.form, p, settings);
                expect_table3(r, &mut inst);
                inst
            }
            Job::T3Excluded(i, fp, p) => {
                let r = &at.table3[*i];
                let mut inst = run_instance(r.family, *fp, r.form, p, settings);
                expect_excluded(&mut inst);
                inst
            }
            Job::Sweep(tag, j, fp, p) => {
                let form = at.normal_forms[tag][*j].form;
                let mut inst = run_instance(*tag, *fp, form, p, settings);
                expect_sweep(*tag, &mut inst);
                inst
            }
        })
        .collect();

    let mut t2: BTreeMap<String, Table2Out> = BTreeMap::new();
    let mut t3: BTreeMap<String, Table3Out> = BTreeMap::new();
    let mut nf: BTreeMap<String, NormalFormsOut> = BTreeMap::new();
    let mut mismatches = Vec::new();
    for (job, inst) in jobs.iter().zip(results) {
        match job {
            Job::T2(i, _) => {
                let r = &at.table2[*i];
                for p in &inst.problems {
                    mismatches.push(format!("table2 {}: {p}", label(&r.key, &inst)));
                }
                t2.entry(r.key.clone())
                    .or_insert_with(|| Table2Out {
                        key: r.key.clone(),
                        family: r.family,
                        metric: r.metric.clone(),
                        curvature: r.curvature.clone(),
                        instances: vec![],
                    })
                    .instances
                    .push(inst);
            }
            Job::T3(i, ..) | Job::T3Excluded(i, ..) => {
                let r = &at.table3[*i];
                for p in &inst.problems {
                    mismatches.push(format!("table3 {}: {p}", label(&r.key, &inst)));
                }
                let out = t3.entry(r.key.clone()).or_insert_with(|| Table3Out {
                    key: r.key.clone(),
                    family: r.family,
                    metric: r.metric.clone(),
                    isotropy: r.isotropy.clone(),
                    ideal: r.ideal,
                    derived: r.derived.clone(),
                    instances: vec![],
                    excluded: vec![],
                });
                if matches!(job, Job::T3(..)) {
                    out.instances.push(inst);
                } else {
                    out.excluded.push(inst);
                }
            }
            Job::Sweep(tag, j, ..) => {
                let form = at.normal_forms[tag][*j].form;
                let key = format!("{}/{}", tag.name(), serde_json::to_value(form).unwrap().as_str().unwrap());
                for p in &inst.problems {
                    mismatches.push(format!("normal_forms {}: {p}", label(&key, &inst)));
                }
                let out = nf.entry(key).or_insert_with(|| NormalFormsOut {
                    family: *tag,
                    form,
                    template: form.template(),
                    instances: vec![],
                    killing_dims: vec![],
                });
                if let Some(d) = inst.killing_dim {
                    if !out.killing_dims.contains(&d) {
                        out.killing_dims.push(d);
                        out.killing_dims.sort();
                    }
                }
                out.instances.push(inst);
            }
        }
    }
    AtlasOutput {
        table2: AtlasFile { schema_version: SCHEMA_VERSION, rows: t2.into_values().collect() },
        table3: AtlasFile { schema_version: SCHEMA_VERSION, rows: t3.into_values().collect() },
        normal_forms: AtlasFile { schema_version: SCHEMA_VERSION, rows: nf.into_values().collect() },
        mismatches,
    }
}
