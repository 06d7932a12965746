use lie3::bianchi::family;
use lie3::curvature::{
    curvature_report, gamma_vv, levi_civita, metric_compatibility_residual, riemann, ricci, riemann_symmetry_residuals,
    torsion_residual,
};
use lie3::geodesic::euler_arnold_rhs;
use lie3::isotropy::{classify_type, skew_derivations, IsotropyType};
use lie3::linalg::rank3;
use lie3::normal_form::tables::atlas;
use lie3::normal_form::CanonicalForm;
use lie3::{classify, BianchiTag, LieAlgebra3, MetricForm, Tolerances};
use nalgebra::{Matrix3, Vector3};
use proptest::prelude::*;

fn param_for(tag: BianchiTag, u: f64) -> Option<f64> {
    match tag {
        // keep away from the family boundaries lambda = 0, +-1
        BianchiTag::HLambda => Some(if u < 0.5 { -0.1 - 1.6 * u } else { 0.1 + 1.6 * (u - 0.5) }),
        BianchiTag::EMu => Some(0.1 + 3.0 * u),
        _ => None,
    }
}

fn well_conditioned(m: &Matrix3<f64>) -> bool {
    let s = m.singular_values();
    s.min() > 0.05 * s.max()
}

prop_compose! {
    fn matrix()(v in prop::array::uniform9(-2.0f64..2.0)) -> Matrix3<f64> {
        Matrix3::from_row_slice(&v)
    }
}

prop_compose! {
    fn basis()(m in matrix().prop_filter("ill-conditioned", well_conditioned)) -> Matrix3<f64> { m }
}

#[derive(Debug, Clone)]
struct Case {
    tag: BianchiTag,
    a: LieAlgebra3,
    g: MetricForm,
}

prop_compose! {
    /// A family algebra in a random basis with a random Riemannian or Lorentzian metric.
    fn case()(fam in 0usize..11, u in 0.0f64..1.0, p in basis(), m in basis(), lorentz in any::<bool>()) -> Case {
        let tag = BianchiTag::ALL[fam];
        let param = param_for(tag, u);
        let a = family::preferred(tag, param).unwrap().transport(&p).unwrap();
        let d = Matrix3::from_diagonal(&Vector3::new(1.0, 1.0, if lorentz { -1.0 } else { 1.0 }));
        let g = MetricForm::new(m.transpose() * d * m, &Tolerances::default()).unwrap();
        Case { tag, a, g }
    }
}

fn fuzz() -> ProptestConfig {
    ProptestConfig { cases: 500, ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(fuzz())]

    #[test]
    fn curvature_identities(c in case()) {
        let conn = levi_civita(&c.a, &c.g);
        let scale = c.a.scale().max(1.0) * c.g.g.amax().max(1.0);
        prop_assert!(metric_compatibility_residual(&c.g, &conn) <= 1e-9 * scale);
        prop_assert!(torsion_residual(&c.a, &conn) <= 1e-9 * scale);
        let rm = riemann(&c.a, &c.g, &conn);
        let (sym, bianchi) = riemann_symmetry_residuals(&rm);
        let rs = rm.low.iter().flatten().flatten().flatten().fold(1.0f64, |m, x| m.max(x.abs()));
        prop_assert!(sym <= 1e-9 * rs, "{}: pair symmetries {sym:e}", c.tag);
        prop_assert!(bianchi <= 1e-9 * rs, "{}: first Bianchi {bianchi:e}", c.tag);
        let report = curvature_report(&c.a, &c.g, 1e-8, 0);
        let trace = (c.g.inverse() * ricci(&rm)).trace();
        prop_assert!((report.scalar - trace).abs() <= 1e-9 * rs.max(1.0));
    }

    #[test]
    fn euler_arnold_is_minus_gamma(c in case(), v in prop::array::uniform3(-3.0f64..3.0)) {
        let v = Vector3::from(v);
        let conn = levi_civita(&c.a, &c.g);
        let lhs = euler_arnold_rhs(&c.a, &c.g, &v);
        let rhs = -gamma_vv(&conn, &v);
        prop_assert!((lhs - rhs).amax() <= 1e-9 * lhs.amax().max(1.0), "{lhs} vs {rhs}");
    }

    #[test]
    fn skew_endomorphisms_have_rank_two_and_no_trace(c in case(), s in prop::array::uniform3(-2.0f64..2.0)) {
        let tol = Tolerances::default();
        let sk = Matrix3::new(0.0, s[0], s[1], -s[0], 0.0, s[2], -s[1], -s[2], 0.0);
        prop_assume!(sk.norm() > 1e-3);
        let u = c.g.inverse() * sk;
        let u = u / u.norm();
        let mut produced = vec![u];
        produced.extend(skew_derivations(&c.a, &c.g, &tol).basis);
        for u in produced {
            let e = classify_type(&u, &c.g, &tol).unwrap();
            prop_assert_eq!(rank3(&u, tol.eps_rank), 2);
            prop_assert!(e.trace.abs() <= 1e-9, "trace {:e}", e.trace);
            if !c.g.is_lorentzian() {
                prop_assert_eq!(e.kind, IsotropyType::Elliptic);
                // spectrum {0, +-ib}: the sum of principal 2-minors is positive
                let m = (u.trace().powi(2) - (u * u).trace()) / 2.0;
                prop_assert!(m > 0.0);
            }
        }
    }

    /// Table 3 metrics carried to a random basis keep their isotropy.
    #[test]
    fn transported_table3_isotropy(row in 0usize..21, u in 0.0f64..1.0, p in basis()) {
        let tol = Tolerances::default();
        let r = &atlas().table3[row];
        let mut params = lie3::normal_form::forms::Params::new();
        for (k, v) in &r.fixed {
            params.insert(k.clone(), v[0]);
        }
        if let Some(f) = &r.free {
            params.insert(f.name.clone(), r.samples[(u * r.samples.len() as f64) as usize % r.samples.len()]);
        }
        let g0 = CanonicalForm { id: r.form, params }.matrix();
        let fp = atlas().family_params.get(&r.family).map(|v| v[0]);
        let a = family::preferred(r.family, fp).unwrap().transport(&p).unwrap();
        let g = MetricForm::new(p.transpose() * g0 * p, &tol).unwrap();
        let space = skew_derivations(&a, &g, &tol);
        if r.ideal {
            prop_assert_eq!(space.dim, 1, "{}", r.key);
            let e = classify_type(&space.basis[0], &g, &tol).unwrap();
            prop_assert_eq!(e.kind.table_name(), r.isotropy.as_str());
            prop_assert_eq!(rank3(&space.basis[0], tol.eps_rank), 2);
        } else {
            prop_assert_eq!(space.dim, 0, "{}", r.key);
        }
    }
}

/// Brute-force oracle for the classifier: random basis transports recover tag and parameter.
#[test]
fn classifier_round_trip() {
    use rand::{Rng, SeedableRng};
    let tol = Tolerances::default();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    for tag in BianchiTag::ALL {
        let mut done = 0;
        while done < 100 {
            let p = Matrix3::from_fn(|_, _| rng.gen_range(-2.0..2.0));
            if !well_conditioned(&p) {
                continue;
            }
            done += 1;
            let param = param_for(tag, rng.gen_range(0.0..1.0));
            let a = family::preferred(tag, param).unwrap().transport(&p).unwrap();
            let class = classify(&a, &tol).unwrap_or_else(|e| panic!("{tag}: {e}"));
            assert_eq!(class.tag, tag);
            if let (Some(x), Some(y)) = (param, class.param) {
                assert!((x - y).abs() <= 1e-6 * x.abs(), "{tag}: {x} vs {y}");
            } else {
                assert_eq!(param.is_some(), class.param.is_some());
            }
            // the reported basis change carries the input onto the preferred brackets
            let back = a.transport(&class.basis_change).unwrap();
            assert!(back.max_difference(&class.preferred_algebra()) <= 1e-8 * a.scale().max(1.0), "{tag}");
        }
    }
}
