//! Catalogue of canonical metric shapes.

use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use crate::bianchi::BianchiTag;
use crate::linalg::mat_from_rows;
use crate::metric::render_quadratic;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FormId {
    DiagEps,
    DiagSplit,
    TimeE1,
    NullPair,
    NZeroEps,
    NPlus,
    NMinus,
    DegenGeneric,
    #[serde(rename = "e2_e1e3")]
    E2E1E3,
    #[serde(rename = "e3_e1e2")]
    E3E1E2,
    So3Diag,
    Sl2Elliptic,
    Sl2Hyperbolic,
    Sl2Diag,
    Sl2Complex,
    Sl2Jordan2,
    Sl2Jordan3,
    PshPlus,
    PshMinus,
    PshNull,
    EDiagPlus,
    EDiagTime,
}

impl FormId {
    pub fn param_names(&self) -> &'static [&'static str] {
        use FormId::*;
        match self {
            DiagEps | NZeroEps | PshNull => &["eps"],
            NPlus | NMinus | Sl2Elliptic | Sl2Hyperbolic | PshPlus | PshMinus => &["alpha"],
            So3Diag | Sl2Diag | Sl2Complex => &["alpha1", "alpha2"],
            Sl2Jordan2 => &["alpha", "eps"],
            EDiagPlus => &["alpha1"],
            EDiagTime => &["alpha2"],
            DiagSplit | TimeE1 | NullPair | DegenGeneric | E2E1E3 | E3E1E2 | Sl2Jordan3 => &[],
        }
    }

    /// Symbolic text of the quadratic form, in the notation of the tables.
    pub fn template(&self) -> &'static str {
        use FormId::*;
        match self {
            DiagEps => "(e1)^2+(e2)^2+eps(e3)^2",
            DiagSplit => "(e1)^2-(e2)^2+(e3)^2",
            TimeE1 => "(e3)^2+(e2)^2-(e1)^2",
            NullPair => "(e1)^2+2(e2e3)",
            NZeroEps => "(e1)^2+eps(e3)^2+2(e2e3)",
            NPlus => "(e1)^2+(e2)^2+2(e2e3)+alpha(e3)^2",
            NMinus => "(e1)^2-(e2)^2+2(e2e3)+alpha(e3)^2",
            DegenGeneric => "(e2)^2+(e3)^2+2(e1e3)+2(e2e3)",
            E2E1E3 => "(e2)^2+2(e1e3)",
            E3E1E2 => "(e3)^2+2(e1e2)",
            So3Diag => "(e1)^2+alpha1(e2)^2+alpha2(e3)^2",
            Sl2Elliptic => "(e1)^2+2(e2e3)+alpha(e2-e3)^2",
            Sl2Hyperbolic => "(e1)^2+2alpha(e2e3)",
            Sl2Diag => "(e1)^2+(alpha1+alpha2)/2((e2)^2+(e3)^2)+(alpha1-alpha2)(e2e3)",
            Sl2Complex => "(e1)^2+alpha1((e2)^2-(e3)^2)+2alpha2(e2e3)",
            Sl2Jordan2 => "(e1)^2+2alpha(e2e3)+eps(e2)^2",
            Sl2Jordan3 => "(e1)^2+2sqrt2(e1e3)+2(e2e3)",
            PshPlus => "(e1)^2+(e2)^2+alpha(e3)^2",
            PshMinus => "(e1)^2-(e2)^2+alpha(e3)^2",
            PshNull => "(e1)^2+2eps(e2e3)",
            EDiagPlus => "(e1)^2+(e2)^2+alpha1(e3)^2",
            EDiagTime => "(e2)^2-(e1)^2+alpha2(e3)^2",
        }
    }

    /// Forms listed for each family in the normal-form classification.
    pub fn admissible(tag: BianchiTag) -> &'static [FormId] {
        use FormId::*;
        match tag {
            BianchiTag::R3 => &[DiagEps],
            BianchiTag::So3 => &[So3Diag],
            BianchiTag::Sl2 => &[NullPair, Sl2Elliptic, Sl2Hyperbolic, Sl2Diag, Sl2Complex, Sl2Jordan2, Sl2Jordan3],
            BianchiTag::Heis => &[DiagEps, DiagSplit, NullPair],
            BianchiTag::Sol => &[NPlus, NMinus, NullPair, DiagEps, TimeE1, DegenGeneric, E2E1E3],
            BianchiTag::H1 => &[DiagEps, TimeE1, E3E1E2],
            BianchiTag::AffRPlusR | BianchiTag::HLambda => {
                &[NPlus, NMinus, NZeroEps, NullPair, DiagEps, DiagSplit, TimeE1, DegenGeneric, E2E1E3, E3E1E2]
            }
            BianchiTag::Psh => &[PshPlus, PshMinus, PshNull, E2E1E3, E3E1E2],
            BianchiTag::Euc2 | BianchiTag::EMu => &[EDiagPlus, EDiagTime, E3E1E2],
        }
    }
}

pub type Params = BTreeMap<String, f64>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CanonicalForm {
    pub id: FormId,
    #[serde(default)]
    pub params: Params,
}

impl CanonicalForm {
    pub fn new(id: FormId, values: &[f64]) -> Self {
        let names = id.param_names();
        assert_eq!(names.len(), values.len(), "{id:?}");
        let params = names.iter().zip(values).map(|(n, v)| (n.to_string(), *v)).collect();
        CanonicalForm { id, params }
    }

    pub fn get(&self, name: &str) -> f64 {
        *self.params.get(name).unwrap_or_else(|| panic!("{:?} has no parameter {name}", self.id))
    }

    pub fn matrix(&self) -> Matrix3<f64> {
        use FormId::*;
        let p = |n: &str| self.get(n);
        let r = match self.id {
            DiagEps => [[1., 0., 0.], [0., 1., 0.], [0., 0., p("eps")]],
            DiagSplit => [[1., 0., 0.], [0., -1., 0.], [0., 0., 1.]],
            TimeE1 => [[-1., 0., 0.], [0., 1., 0.], [0., 0., 1.]],
            NullPair => [[1., 0., 0.], [0., 0., 1.], [0., 1., 0.]],
            NZeroEps => [[1., 0., 0.], [0., 0., 1.], [0., 1., p("eps")]],
            NPlus => [[1., 0., 0.], [0., 1., 1.], [0., 1., p("alpha")]],
            NMinus => [[1., 0., 0.], [0., -1., 1.], [0., 1., p("alpha")]],
            DegenGeneric => [[0., 0., 1.], [0., 1., 1.], [1., 1., 1.]],
            E2E1E3 => [[0., 0., 1.], [0., 1., 0.], [1., 0., 0.]],
            E3E1E2 => [[0., 1., 0.], [1., 0., 0.], [0., 0., 1.]],
            So3Diag => [[1., 0., 0.], [0., p("alpha1"), 0.], [0., 0., p("alpha2")]],
            Sl2Elliptic => {
                let a = p("alpha");
                [[1., 0., 0.], [0., a, 1. - a], [0., 1. - a, a]]
            }
            Sl2Hyperbolic => [[1., 0., 0.], [0., 0., p("alpha")], [0., p("alpha"), 0.]],
            Sl2Diag => {
                let (a1, a2) = (p("alpha1"), p("alpha2"));
                let (s, d) = ((a1 + a2) / 2.0, (a1 - a2) / 2.0);
                [[1., 0., 0.], [0., s, d], [0., d, s]]
            }
            Sl2Complex => {
                let (a1, a2) = (p("alpha1"), p("alpha2"));
                [[1., 0., 0.], [0., a1, a2], [0., a2, -a1]]
            }
            Sl2Jordan2 => [[1., 0., 0.], [0., p("eps"), p("alpha")], [0., p("alpha"), 0.]],
            Sl2Jordan3 => {
                let r2 = std::f64::consts::SQRT_2;
                [[1., 0., r2], [0., 0., 1.], [r2, 1., 0.]]
            }
            PshPlus => [[1., 0., 0.], [0., 1., 0.], [0., 0., p("alpha")]],
            PshMinus => [[1., 0., 0.], [0., -1., 0.], [0., 0., p("alpha")]],
            PshNull => [[1., 0., 0.], [0., 0., p("eps")], [0., p("eps"), 0.]],
            EDiagPlus => [[1., 0., 0.], [0., 1., 0.], [0., 0., p("alpha1")]],
            EDiagTime => [[-1., 0., 0.], [0., 1., 0.], [0., 0., p("alpha2")]],
        };
        mat_from_rows(r)
    }

    /// The form with its parameters substituted, e.g. `(e1)^2+(e2)^2-(e3)^2`.
    pub fn rendered(&self) -> String {
        render_quadratic(&self.matrix())
    }
}
