//! Embedded table data and matching of a reduced metric against it.

use once_cell::sync::Lazy;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use super::forms::{FormId, Params};
use super::NormalFormMatch;
use crate::bianchi::BianchiTag;
use crate::curvature::CurvatureReport;
use crate::metric::Signature;
use crate::{Error, Result, Tolerances};

pub const ATLAS_JSON: &str = include_str!("../../data/atlas.json");
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, Deserialize, Serialize)]
pub struct SweepEntry {
    pub form: FormId,
    #[serde(default)]
    pub grid: BTreeMap<String, Vec<f64>>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
pub struct Table2Row {
    pub key: String,
    pub family: BianchiTag,
    pub metric: String,
    pub form: FormId,
    pub params: Params,
    /// "0", "+" or "-"
    pub curvature: String,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
pub struct FreeParam {
    pub name: String,
    /// open intervals, `None` for an infinite end
    pub intervals: Vec<[Option<f64>; 2]>,
    pub exclude: Vec<f64>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
pub struct Table3Row {
    pub key: String,
    pub family: BianchiTag,
    pub metric: String,
    pub form: FormId,
    #[serde(default)]
    pub fixed: BTreeMap<String, Vec<f64>>,
    #[serde(default)]
    pub free: Option<FreeParam>,
    #[serde(default)]
    pub samples: Vec<f64>,
    #[serde(default)]
    pub excluded: Vec<f64>,
    pub isotropy: String,
    pub derived: String,
    pub ideal: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Completeness {
    Complete,
    Incomplete,
    Unknown,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
pub struct CompletenessFact {
    #[serde(default)]
    pub family: Option<BianchiTag>,
    #[serde(default)]
    pub signature: Option<String>,
    #[serde(default)]
    pub form: Option<FormId>,
    #[serde(default)]
    pub params: Option<Params>,
    pub verdict: Completeness,
    pub reason: String,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
pub struct Atlas {
    pub schema_version: u32,
    pub normal_forms: BTreeMap<BianchiTag, Vec<SweepEntry>>,
    pub family_params: BTreeMap<BianchiTag, Vec<f64>>,
    pub table2: Vec<Table2Row>,
    pub table3: Vec<Table3Row>,
    pub completeness: Vec<CompletenessFact>,
}

pub static ATLAS: Lazy<Atlas> = Lazy::new(|| {
    let a: Atlas = serde_json::from_str(ATLAS_JSON).expect("embedded atlas parses");
    assert_eq!(a.schema_version, SCHEMA_VERSION);
    a
});

pub fn atlas() -> &'static Atlas {
    &ATLAS
}

#[derive(Clone, Debug, Serialize)]
pub struct KillingReport {
    pub killing_dim: u8,
    pub isotropy_type: Option<String>,
    pub g_ideal_in_l: Option<bool>,
    pub derived_killing: Option<String>,
    pub completeness: Completeness,
    pub completeness_reason: Option<String>,
    /// sectional curvature of the input metric, when constant
    pub constant_k: Option<f64>,
    /// the same for the canonical representative
    pub constant_k_canonical: Option<f64>,
    pub matched_row: Option<String>,
    pub normal_form: String,
    pub boundary_flags: Vec<String>,
}

fn close(a: f64, b: f64, eps: f64) -> bool {
    (a - b).abs() <= eps
}

fn params_equal(a: &Params, b: &Params, eps: f64) -> bool {
    a.len() == b.len() && a.iter().all(|(k, v)| b.get(k).is_some_and(|w| close(*v, *w, eps)))
}

/// Whether `params` satisfies the row's constraints; near misses are pushed to `flags`.
fn row_accepts(row: &Table3Row, params: &Params, eps: f64, flags: &mut Vec<String>) -> bool {
    for (name, v) in params {
        if let Some(allowed) = row.fixed.get(name) {
            if !allowed.iter().any(|a| close(*v, *a, eps)) {
                return false;
            }
            continue;
        }
        let Some(free) = row.free.as_ref().filter(|f| &f.name == name) else { return false };
        if let Some(x) = free.exclude.iter().find(|x| close(*v, **x, eps)) {
            flags.push(format!("{}: {name} = {v} sits on the excluded value {x}", row.key));
            return false;
        }
        let mut inside = false;
        for [lo, hi] in &free.intervals {
            let above = lo.is_none_or(|l| *v > l + eps);
            let below = hi.is_none_or(|h| *v < h - eps);
            if above && below {
                inside = true;
            } else if lo.is_some_and(|l| close(*v, l, eps)) || hi.is_some_and(|h| close(*v, h, eps)) {
                flags.push(format!("{}: {name} = {v} is within tolerance of an interval end", row.key));
            }
        }
        if !inside {
            return false;
        }
    }
    // every constrained name must be present
    row.fixed.keys().all(|k| params.contains_key(k)) && row.free.as_ref().is_none_or(|f| params.contains_key(&f.name))
}

pub fn completeness_of(tag: BianchiTag, signature: Signature, form: FormId, params: &Params, eps: f64) -> (Completeness, Option<String>) {
    let sig = match signature {
        Signature::Riemannian => "riemannian",
        Signature::Lorentzian => "lorentzian",
    };
    for f in &atlas().completeness {
        let ok = f.family.is_none_or(|t| t == tag)
            && f.signature.as_deref().is_none_or(|s| s == sig)
            && f.form.is_none_or(|x| x == form)
            && f.params.as_ref().is_none_or(|p| params_equal(p, params, eps));
        if ok {
            return (f.verdict, Some(f.reason.clone()));
        }
    }
    (Completeness::Unknown, None)
}

pub fn sign_label(k: f64) -> &'static str {
    if k.abs() <= 1e-7 {
        "0"
    } else if k > 0.0 {
        "+"
    } else {
        "-"
    }
}

/// Matches a reduced metric against the tables.
pub fn match_tables(nf: &NormalFormMatch, signature: Signature, curv: &CurvatureReport, tol: &Tolerances) -> Result<KillingReport> {
    let eps = tol.eps_param;
    let tag = nf.family;
    let params = &nf.form.params;
    let mut flags = Vec::new();
    let (completeness, reason) = completeness_of(tag, signature, nf.form.id, params, eps);
    let k_can = curv.constant_k.map(|k| k / nf.scale);
    let mut report = KillingReport {
        killing_dim: 3,
        isotropy_type: None,
        g_ideal_in_l: None,
        derived_killing: None,
        completeness,
        completeness_reason: reason,
        constant_k: curv.constant_k,
        constant_k_canonical: k_can,
        matched_row: None,
        normal_form: nf.rendered.clone(),
        boundary_flags: Vec::new(),
    };
    let a = atlas();
    if let Some(row) = a.table2.iter().find(|r| r.family == tag && r.form == nf.form.id && params_equal(&r.params, params, eps)) {
        let Some(k) = k_can else {
            return Err(Error::InconsistentCurvature(format!(
                "{} is a space form but the Ricci test found non-constant curvature (residual {:e})",
                row.key, curv.ricci_residual
            )));
        };
        if sign_label(k) != row.curvature {
            return Err(Error::InconsistentCurvature(format!("{}: table sign {} but K = {k:e}", row.key, row.curvature)));
        }
        if completeness != Completeness::Complete {
            return Err(Error::InconsistentCurvature(format!("{}: space form without a completeness fact", row.key)));
        }
        report.killing_dim = 6;
        report.matched_row = Some(row.key.clone());
        return Ok(report);
    }
    for row in a.table3.iter().filter(|r| r.family == tag && r.form == nf.form.id) {
        if row_accepts(row, params, eps, &mut flags) {
            report.killing_dim = 4;
            report.isotropy_type = Some(row.isotropy.clone());
            report.g_ideal_in_l = Some(row.ideal);
            report.derived_killing = Some(row.derived.clone());
            report.matched_row = Some(row.key.clone());
            break;
        }
    }
    report.boundary_flags = flags;
    if k_can.is_some() && completeness == Completeness::Complete {
        return Err(Error::InconsistentCurvature(format!(
            "{} has constant curvature and is complete but is not listed as a space form",
            nf.rendered
        )));
    }
    Ok(report)
}
