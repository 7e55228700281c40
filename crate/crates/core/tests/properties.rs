use diffinv::actions::{act_affine, reinterpret, AffineMap, DerivationSpec};
use diffinv::algebra::{eq_rational, q, DiffPolynomial, DiffRational, Monomial, VarKey, Q};
use diffinv::eval::{evaluate, verify_identity, Assignment, Options};
use diffinv::expr::{parse, Expr, Var};
use proptest::prelude::*;

fn coeff() -> impl Strategy<Value = Q> {
    (-6i64..=6, 1i64..=4).prop_map(|(n, d)| q(n, d))
}

fn jet() -> impl Strategy<Value = VarKey> {
    (1usize..=2, 0u32..=3).prop_map(|(i, k)| VarKey::x(i, k))
}

fn poly() -> impl Strategy<Value = DiffPolynomial> {
    let mono = prop::collection::vec((jet(), 1u32..=2), 0..=3).prop_map(Monomial::from_pairs);
    prop::collection::vec((mono, coeff()), 1..=5).prop_map(DiffPolynomial::from_terms)
}

fn nonzero_poly() -> impl Strategy<Value = DiffPolynomial> {
    poly().prop_filter("nonzero", |p| !p.is_zero())
}

fn rational() -> impl Strategy<Value = DiffRational> {
    (poly(), nonzero_poly()).prop_map(|(a, b)| DiffRational::new(&a, &b).unwrap())
}

fn affine() -> impl Strategy<Value = AffineMap> {
    (prop::collection::vec(-3i64..=3, 4), coeff(), coeff())
        .prop_filter_map("invertible", |(h, a, b)| {
            let rows = vec![vec![q(h[0], 1), q(h[1], 1)], vec![q(h[2], 1), q(h[3], 1)]];
            AffineMap::new(rows, vec![a, b]).ok()
        })
}

fn assignment() -> impl Strategy<Value = Assignment> {
    prop::collection::vec(coeff(), 16).prop_map(|vals| {
        let mut a = Assignment::new();
        let mut it = vals.into_iter();
        for i in 1..=2 {
            for k in 0..=3 {
                a.insert(VarKey::x(i, k), it.next().unwrap());
            }
        }
        for k in 0..=3 {
            a.insert(VarKey::g(k), it.next().unwrap());
        }
        a
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn derivation_is_additive(a in poly(), b in poly()) {
        prop_assert_eq!(a.add_poly(&b).derive(), a.derive().add_poly(&b.derive()));
    }

    #[test]
    fn derivation_is_leibniz(a in poly(), b in poly()) {
        let lhs = a.mul_poly(&b).derive();
        let rhs = a.derive().mul_poly(&b).add_poly(&a.mul_poly(&b.derive()));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn derivation_raises_order(f in rational(), i in 1usize..=2) {
        let k = f.order_in(i);
        prop_assume!(k.is_some());
        prop_assert_eq!(f.derive().order_in(i), k.map(|k| k + 1));
    }

    #[test]
    fn quotient_rule(a in poly(), b in nonzero_poly()) {
        let f = DiffRational::new(&a, &b).unwrap();
        let expected = DiffRational::new(
            &a.derive().mul_poly(&b).sub_poly(&a.mul_poly(&b.derive())),
            &b.mul_poly(&b),
        ).unwrap();
        prop_assert!(eq_rational(&f.derive(), &expected));
    }

    #[test]
    fn canonical_form_is_idempotent(f in rational()) {
        let c = f.canonical();
        prop_assert_eq!(c.canonical(), c.clone());
        prop_assert!(eq_rational(&c, &f));
    }

    #[test]
    fn equality_is_an_equivalence(a in rational(), h in nonzero_poly(), k in nonzero_poly()) {
        // b and c are a written with extra common factors
        let hh = DiffRational::from_poly(&h);
        let kk = DiffRational::from_poly(&k);
        let b = (&a * &hh).checked_div(&hh).unwrap();
        let c = (&b * &kk).checked_div(&kk).unwrap();
        prop_assert!(eq_rational(&a, &a));
        prop_assert_eq!(eq_rational(&a, &b), eq_rational(&b, &a));
        prop_assert!(eq_rational(&a, &b) && eq_rational(&b, &c) && eq_rational(&a, &c));
        let other = &a + &DiffRational::one();
        prop_assert!(!eq_rational(&a, &other) && !eq_rational(&other, &a));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn action_is_a_group_action(f in rational(), m1 in affine(), m2 in affine()) {
        // substitution: f(m2 x) followed by x -> m1 x gives f(m2 m1 x)
        let lhs = act_affine(&act_affine(&f, &m2).unwrap(), &m1).unwrap();
        let rhs = act_affine(&f, &m2.compose(&m1)).unwrap();
        prop_assert!(eq_rational(&lhs, &rhs));
        prop_assert!(eq_rational(&act_affine(&f, &AffineMap::identity(2)).unwrap(), &f));
        let back = act_affine(&act_affine(&f, &m1).unwrap(), &m1.inverse()).unwrap();
        prop_assert!(eq_rational(&back, &f));
    }

    #[test]
    fn action_commutes_with_derivation(f in rational(), m in affine()) {
        prop_assert!(eq_rational(&act_affine(&f.derive(), &m).unwrap(), &act_affine(&f, &m).unwrap().derive()));
    }

    #[test]
    fn reinterpretation_is_a_homomorphism(a in rational(), b in rational()) {
        let r = |f: &DiffRational| reinterpret(f, &DerivationSpec::G);
        prop_assert!(eq_rational(&r(&(&a * &b)), &(&r(&a) * &r(&b))));
        prop_assert!(eq_rational(&r(&(&a + &b)), &(&r(&a) + &r(&b))));
    }

    #[test]
    fn evaluation_is_a_homomorphism(a in rational(), b in rational(), c in rational(), pt in assignment()) {
        let (va, vb, vc) = (evaluate(&a, &pt), evaluate(&b, &pt), evaluate(&c, &pt));
        prop_assume!(va.is_ok() && vb.is_ok() && vc.is_ok());
        let (va, vb, vc) = (va.unwrap(), vb.unwrap(), vc.unwrap());
        let prod = evaluate(&(&(&a * &b) * &c), &pt);
        let sum = evaluate(&(&(&a + &b) + &c), &pt);
        prop_assume!(prod.is_ok() && sum.is_ok());
        prop_assert_eq!(prod.unwrap(), &(&va * &vb) * &vc);
        prop_assert_eq!(sum.unwrap(), &(&va + &vb) + &vc);
    }

    #[test]
    fn reports_are_deterministic(a in rational(), b in rational(), seed in 0u64..1000) {
        let opts = Options::eval(4, seed);
        prop_assert_eq!(verify_identity(a.clone(), b.clone(), &opts), verify_identity(a, b, &opts));
    }
}

fn var() -> impl Strategy<Value = Var> {
    prop_oneof![
        (1u16..=3).prop_map(Var::X),
        Just(Var::XVec),
        (1u16..=4).prop_map(Var::Z),
        (1u16..=3, 1u16..=3).prop_map(|(k, i)| Var::ZComp(k, i)),
        (1u16..=3).prop_map(Var::A),
        (1u16..=2).prop_map(Var::B),
        Just(Var::G),
        Just(Var::S),
        Just(Var::T),
        Just(Var::Y),
    ]
}

fn ast() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        (0i64..=20, 1i64..=7).prop_map(|(n, d)| Expr::Num(q(n, d))),
        var().prop_map(Expr::Var),
    ];
    leaf.prop_recursive(5, 40, 3, |inner| {
        let b = |e| Box::new(e);
        prop_oneof![
            inner.clone().prop_map(move |e| Expr::Neg(b(e))),
            (inner.clone(), inner.clone()).prop_map(move |(x, y)| Expr::Add(b(x), b(y))),
            (inner.clone(), inner.clone()).prop_map(move |(x, y)| Expr::Sub(b(x), b(y))),
            (inner.clone(), inner.clone()).prop_map(move |(x, y)| Expr::Mul(b(x), b(y))),
            (inner.clone(), inner.clone()).prop_map(move |(x, y)| Expr::Div(b(x), b(y))),
            (inner.clone(), 0u32..=4).prop_map(move |(x, k)| Expr::Pow(b(x), k)),
            (inner.clone(), 1u32..=3).prop_map(move |(x, k)| Expr::D(b(x), k)),
            (inner.clone(), inner.clone()).prop_map(move |(x, y)| Expr::Dot(b(x), b(y))),
            prop::collection::vec(inner, 1..=3).prop_map(Expr::Det),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn grammar_round_trip(e in ast()) {
        let text = e.to_string();
        prop_assert_eq!(parse(&text).unwrap(), e, "{}", text);
    }
}

#[test]
fn phi_corners() {
    use diffinv::actions::phi_coefficient;
    for k in 1..=6u32 {
        let first = DiffRational::from_poly(&phi_coefficient(k, 1).unwrap());
        let last = DiffRational::from_poly(&phi_coefficient(k, k).unwrap());
        assert_eq!(first, DiffRational::g(k - 1), "k = {k}");
        assert_eq!(last, DiffRational::g(0).pow(k as i32), "k = {k}");
    }
}

proptest! {
    #[test]
    fn orthogonal_samples(seed in any::<u64>()) {
        use diffinv::groups::Sampler;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        for s in [Sampler::O2, Sampler::O2Affine] {
            let m = s.sample(2, &mut rng);
            prop_assert!(m.is_orthogonal());
            prop_assert!(s.contains(&m));
        }
    }
}
