use proptest::prelude::*;

use diffinv::catalog::catalog;
use diffinv::experiments::csd;
use diffinv::independence::polys_rank;
use diffinv::invariance::{jet_transform, Jet, LinearMap2};
use diffinv::symbolic::{apply_operator, canonicalize, qr, OpKind, Operator, OperatorChain, PointPolynomial};
use diffinv::{InvariantPolynomial, Q};

fn small_q() -> impl Strategy<Value = Q> {
    (-9i64..=9, 1i64..=4).prop_map(|(n, d)| qr(n, d))
}

fn rational_jet() -> impl Strategy<Value = Jet<Q>> {
    prop::collection::vec(small_q(), 14).prop_map(|v| Jet::from_values(4, v).unwrap())
}

fn affine_map() -> impl Strategy<Value = LinearMap2> {
    (small_q(), small_q(), small_q(), small_q())
        .prop_filter_map("singular", |(a, b, c, d)| LinearMap2::affine(a, b, c, d).ok())
}

/// Raw operators over points 1..=3, G(p,p) excluded, with accumulated orientation sign.
fn chain() -> impl Strategy<Value = OperatorChain> {
    prop::collection::vec((any::<bool>(), 1u8..=3, 1u8..=3), 1..=4).prop_filter_map("unused point", |raw| {
        let mut sign = 1i8;
        let mut ops = Vec::new();
        for (is_f, p, q) in raw {
            let kind = if is_f { OpKind::F } else { OpKind::G };
            let (op, s) = Operator::new(kind, p, q).ok()?;
            sign *= s;
            ops.push(op);
        }
        OperatorChain::from_ops(ops).ok().map(|c| c.with_sign(sign))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn f_is_symmetric_and_g_antisymmetric(p in 1u8..=3, q in 1u8..=3) {
        let (f1, s1) = Operator::new(OpKind::F, p, q).unwrap();
        let (f2, s2) = Operator::new(OpKind::F, q, p).unwrap();
        prop_assert_eq!((f1, s1), (f2, s2));
        if p != q {
            let (g1, t1) = Operator::new(OpKind::G, p, q).unwrap();
            let (g2, t2) = Operator::new(OpKind::G, q, p).unwrap();
            prop_assert_eq!(g1, g2);
            prop_assert_eq!(t1, -t2);
        } else {
            prop_assert!(Operator::new(OpKind::G, p, q).is_err());
        }
    }

    #[test]
    fn operators_commute(a in chain(), b in chain()) {
        let mut ab: Vec<Operator> = a.ops().to_vec();
        ab.extend(b.ops());
        let mut ba: Vec<Operator> = b.ops().to_vec();
        ba.extend(a.ops());
        let x = OperatorChain::from_ops(ab).unwrap();
        let y = OperatorChain::from_ops(ba).unwrap();
        prop_assert_eq!(x.polynomial(), y.polynomial());
    }

    #[test]
    fn operator_application_is_linear(c in chain(), k in small_q()) {
        let base = c.apply().unwrap();
        let n = base.points();
        let unit = PointPolynomial::unit(n);
        let sum = base.add(&unit.scale(&k));
        for op in c.ops() {
            let lhs = apply_operator(*op, &sum).unwrap();
            let rhs = apply_operator(*op, &base).unwrap().add(&apply_operator(*op, &unit).unwrap().scale(&k));
            prop_assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn canonical_form_is_idempotent_and_value_preserving(c in chain()) {
        let once = canonicalize(c.ops(), c.sign());
        let twice = canonicalize(once.chain.ops(), once.sign);
        prop_assert_eq!(&once.chain, &twice.chain);
        prop_assert_eq!(once.sign, twice.sign);
        prop_assert_eq!(once.chain.polynomial(), c.polynomial());
        if once.vanishes {
            prop_assert!(c.polynomial().is_zero());
        }
    }

    #[test]
    fn jet_transforms_compose(j in rational_jet(), a in affine_map(), b in affine_map()) {
        let stepwise = jet_transform(&jet_transform(&j, &a).unwrap(), &b).unwrap();
        let direct = jet_transform(&j, &b.compose(&a)).unwrap();
        prop_assert_eq!(stepwise.values(), direct.values());
        let back = jet_transform(&jet_transform(&j, &a).unwrap(), &a.inverse().unwrap()).unwrap();
        prop_assert_eq!(back.values(), j.values());
    }

    #[test]
    fn csd_is_symmetric_and_bounded(
        v in prop::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 1..20)
    ) {
        let (x, y): (Vec<f64>, Vec<f64>) = v.into_iter().unzip();
        let d = csd(&x, &y).unwrap();
        prop_assert_eq!(d, csd(&y, &x).unwrap());
        prop_assert_eq!(csd(&x, &x).unwrap(), 0.0);
        prop_assert!((0.0..=x.len() as f64).contains(&d));
    }

    #[test]
    fn rank_is_monotone_under_inclusion(ids in prop::collection::btree_set(1u32..=60, 1..12), extra in 1u32..=60) {
        let cat = catalog();
        let polys: Vec<&InvariantPolynomial> = ids.iter().map(|i| cat.polynomial(*i).unwrap()).collect();
        let r = polys_rank(&polys).rank;
        let mut more = polys.clone();
        more.push(cat.polynomial(extra).unwrap());
        let r2 = polys_rank(&more).rank;
        prop_assert!(r2 == r || r2 == r + 1);
        prop_assert!(r <= polys.len());
    }
}

