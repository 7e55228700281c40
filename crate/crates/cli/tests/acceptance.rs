//! The acceptance criteria, one test each. Every test prints a single
//! `criterion N: PASS|FAIL ...` line; run with `--nocapture` to see them.

use std::process::Command;
use std::time::{Duration, Instant};

use diffinv::actions::{check_phi_expansion, phi_coefficient, reinterpret, AffineMap, DerivationSpec};
use diffinv::algebra::{eq_rational, q, DiffPolynomial, DiffRational, Monomial, VarKey, Q};
use diffinv::eval::{equivalence_check, jets_of_curve, evaluate, CurveSpec, Mode, Options, Report, UniRational};
use diffinv::expr::{parse, Expr, Var};
use diffinv::groups::{gl_affine, o2_affine, o2_element};
use diffinv::identities::{catalog_invariance, group_invariance, normalization, run, weight_law, Identity, invariant};
use diffinv::wronskian::{ratio, wronskian};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

fn conclude(k: usize, failures: Vec<String>, detail: &str) {
    if failures.is_empty() {
        println!("criterion {k}: PASS ({detail})");
    } else {
        println!("criterion {k}: FAIL ({detail}): {}", failures.join("; "));
        panic!("criterion {k} failed: {failures:?}");
    }
}

fn expect_pass(failures: &mut Vec<String>, reports: &[Report]) {
    for r in reports {
        if !r.passed() {
            failures.push(format!("{} [{}]", r.identity, r.status.as_str()));
        }
    }
}

fn expect_eval(failures: &mut Vec<String>, reports: &[Report], min_trials: usize) {
    expect_pass(failures, reports);
    for r in reports {
        if r.mode != Mode::Eval || r.trials < min_trials {
            failures.push(format!("{} ran in {} mode with {} trials", r.identity, r.mode.as_str(), r.trials));
        }
    }
}

fn random_poly(rng: &mut ChaCha8Rng) -> DiffPolynomial {
    let terms = (0..rng.gen_range(1..=5)).map(|_| {
        let mono = Monomial::from_pairs(
            (0..rng.gen_range(0..=3))
                .map(|_| (VarKey::x(rng.gen_range(1..=3), rng.gen_range(0..=3)), rng.gen_range(1..=3)))
                .collect::<Vec<_>>(),
        );
        (mono, q(rng.gen_range(-9..=9), rng.gen_range(1..=5)))
    });
    DiffPolynomial::from_terms(terms.collect::<Vec<_>>())
}

#[test]
fn criterion_01_derivation_axioms() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut failures = Vec::new();
    for case in 0..200 {
        let (a, b) = (random_poly(&mut rng), random_poly(&mut rng));
        if a.add_poly(&b).derive() != a.derive().add_poly(&b.derive()) {
            failures.push(format!("additivity, case {case}"));
        }
        if a.mul_poly(&b).derive() != a.derive().mul_poly(&b).add_poly(&a.mul_poly(&b.derive())) {
            failures.push(format!("Leibniz, case {case}"));
        }
    }
    conclude(1, failures, "200 additivity and 200 Leibniz cases, exact");
}

#[test]
fn criterion_02_phi_expansion() {
    let mut failures = Vec::new();
    for k in 1..=5 {
        if !check_phi_expansion(k) {
            failures.push(format!("expansion k = {k}"));
        }
    }
    for k in 1..=6u32 {
        let first = DiffRational::from_poly(&phi_coefficient(k, 1).unwrap());
        let last = DiffRational::from_poly(&phi_coefficient(k, k).unwrap());
        if first != DiffRational::g(k - 1) || last != DiffRational::g(0).pow(k as i32) {
            failures.push(format!("corners k = {k}"));
        }
    }
    conclude(2, failures, "expansion k = 1..5, corners k <= 6");
}

#[test]
fn criterion_03_wronskian_laws() {
    let mut failures = Vec::new();
    let w = DiffRational::from_poly(&wronskian(2).unwrap());
    if !eq_rational(&reinterpret(&w, &DerivationSpec::G), &(&DiffRational::g(0).pow(-3) * &w)) {
        failures.push("W^delta at n = 2".into());
    }
    let opts = Options::eval(8, 3);
    for n in 2..=3 {
        let mut ids = vec![Identity::Eq2, Identity::Eq3, Identity::Eq4];
        ids.extend((1..=n + 1).map(Identity::MinorLaw));
        for id in ids {
            expect_eval(&mut failures, &run(&id, n, &opts).unwrap(), 5);
        }
    }
    conclude(3, failures, "W^delta symbolic at n = 2; eq2, eq3, eq4, minor law at n = 2, 3 over 8 points");
}

#[test]
fn criterion_04_weight_laws() {
    let mut failures = Vec::new();
    let opts = Options::eval(20, 4);
    for (name, n, weight) in [("p1", 2, 2), ("p1", 3, 2), ("p2", 3, 3), ("p", 2, 1), ("p", 3, 1), ("p-ratio", 3, 1)] {
        let f = invariant(name, n).unwrap();
        if f.weight() != weight {
            failures.push(format!("{name} has weight {}", f.weight()));
        }
        expect_eval(&mut failures, &[weight_law(&f, &opts).unwrap()], 20);
    }
    conclude(4, failures, "p1 (n = 2, 3), p2 (n = 3), p and p-ratio over 20 draws");
}

#[test]
fn criterion_05_normalization() {
    let mut failures = Vec::new();
    let opts = Options::eval(20, 5);
    for (name, n) in [("p", 2), ("p", 3), ("p-ratio", 3)] {
        expect_pass(&mut failures, &[normalization(&invariant(name, n).unwrap(), &opts).unwrap()]);
    }
    let ex3 = run(&Identity::Example3, 2, &Options::symbolic()).unwrap();
    if ex3[0].mode != Mode::Symbolic {
        failures.push("example 3 normalization not symbolic".into());
    }
    expect_pass(&mut failures, &ex3[..1]);
    conclude(5, failures, "p^delta = 1 for p (n = 2, 3) and p-ratio (n = 3); example 3 symbolically");
}

#[test]
fn criterion_06_example4() {
    let mut failures = Vec::new();
    let reports = run(&Identity::Example4, 2, &Options::eval(20, 6)).unwrap();
    if reports[0].mode != Mode::Symbolic {
        failures.push("determinant identity not symbolic".into());
    }
    expect_pass(&mut failures, &reports[..1]);
    expect_eval(&mut failures, &reports[1..2], 5);
    conclude(6, failures, "det identity symbolically, pbar relation over 20 points");
}

#[test]
fn criterion_07_theorem2() {
    let mut failures = Vec::new();
    for n in 2..=3 {
        expect_pass(&mut failures, &run(&Identity::Theorem2, n, &Options::symbolic()).unwrap());
    }
    conclude(7, failures, "residual vanishes for y = x_j and y = 1 at n = 2, 3");
}

#[test]
fn criterion_08_group_invariance() {
    let mut failures = Vec::new();
    let reports = catalog_invariance(2, 8).unwrap();
    expect_pass(&mut failures, &reports);
    let more = group_invariance(&gl_affine(3).unwrap(), 50, 20, 8).unwrap();
    expect_pass(&mut failures, &more);
    for r in reports.iter().chain(&more) {
        let want = if r.identity.starts_with("(F*,H)") { 20 } else { 50 };
        if r.trials != want {
            failures.push(format!("{} ran {} trials", r.identity, r.trials));
        }
    }
    conclude(8, failures, "gl-affine (n = 2, 3), o2, o2-affine: 50 H-trials, 20 (F*, H)-trials");
}

#[test]
fn criterion_09_end_to_end() {
    let mut failures = Vec::new();
    let cusp = CurveSpec::parse_coords(&["t^2", "t^3"]).unwrap();
    let bent = CurveSpec::parse_coords(&["t^2", "t^3 + 1/10*t^4"]).unwrap();
    // phi(2) = 1 and phi' > 0
    let phi = UniRational::new(
        diffinv::eval::UniPoly::new(vec![q(1, 1), q(2, 1)]),
        diffinv::eval::UniPoly::new(vec![q(3, 1), q(1, 1)]),
    )
    .unwrap();
    let (t0, s0) = (q(1, 1), q(2, 1));
    let cases = [
        (gl_affine(2).unwrap(), AffineMap::new(vec![vec![q(2, 1), q(1, 1)], vec![q(0, 1), q(3, 1)]], vec![q(1, 1), q(-2, 1)]).unwrap()),
        (o2_affine().unwrap(), o2_element(&q(1, 2), false).compose(&AffineMap::new(vec![vec![q(1, 1), q(0, 1)], vec![q(0, 1), q(1, 1)]], vec![q(5, 1), q(7, 3)]).unwrap())),
    ];
    for (g, m) in &cases {
        let moved = cusp.reparametrize(&phi).unwrap().act(m).unwrap();
        let v = equivalence_check(&cusp, &t0, &moved, &s0, g).unwrap();
        if !v.equal() {
            failures.push(format!("{}: constructed pair differs: {v}", g.name()));
        }
        let moved_bent = bent.reparametrize(&phi).unwrap().act(m).unwrap();
        let v = equivalence_check(&cusp, &t0, &moved_bent, &s0, g).unwrap();
        if v.equal() {
            failures.push(format!("{}: perturbed pair has equal signatures", g.name()));
        }
    }

    let point = jets_of_curve(&cusp, &t0, 8).unwrap();
    let value = |f: &DiffRational| evaluate(f, &point).unwrap();
    let expected: [(&str, Q, Q); 5] = [
        ("W", value(&DiffRational::from_poly(&wronskian(2).unwrap())), q(6, 1)),
        ("W1/W", value(&ratio(2, 1).unwrap()), q(2, 1)),
        ("W2/W", value(&ratio(2, 2).unwrap()), q(2, 1)),
        ("p1", value(&invariant("p1", 2).unwrap().expr().unwrap()), q(4, 9)),
        ("p", value(&invariant("p", 2).unwrap().expr().unwrap()), q(-10, 1)),
    ];
    for (name, got, want) in expected {
        if got != want {
            failures.push(format!("{name} = {got}, expected {want}"));
        }
    }
    conclude(9, failures, "constructed pairs equal, perturbed pairs differ, cusp values at t = 1");
}

fn random_ast(rng: &mut ChaCha8Rng, depth: u32) -> Expr {
    let b = Box::new;
    if depth == 0 || rng.gen_bool(0.25) {
        return if rng.gen_bool(0.4) {
            Expr::Num(q(rng.gen_range(0..=30), rng.gen_range(1..=9)))
        } else {
            let i = rng.gen_range(1..=4);
            Expr::Var(match rng.gen_range(0..10) {
                0 => Var::X(i),
                1 => Var::XVec,
                2 => Var::Z(i),
                3 => Var::ZComp(i, rng.gen_range(1..=3)),
                4 => Var::A(i),
                5 => Var::B(i),
                6 => Var::G,
                7 => Var::S,
                8 => Var::T,
                _ => Var::Y,
            })
        };
    }
    let sub = |rng: &mut ChaCha8Rng| b(random_ast(rng, depth - 1));
    match rng.gen_range(0..9) {
        0 => Expr::Neg(sub(rng)),
        1 => Expr::Add(sub(rng), sub(rng)),
        2 => Expr::Sub(sub(rng), sub(rng)),
        3 => Expr::Mul(sub(rng), sub(rng)),
        4 => Expr::Div(sub(rng), sub(rng)),
        5 => Expr::Pow(sub(rng), rng.gen_range(0..=5)),
        6 => Expr::D(sub(rng), rng.gen_range(1..=3)),
        7 => Expr::Dot(sub(rng), sub(rng)),
        _ => {
            let len = rng.gen_range(1..=3);
            Expr::Det((0..len).map(|_| random_ast(rng, depth - 1)).collect())
        }
    }
}

fn diffinv(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_diffinv")).args(args).output().expect("binary runs")
}

fn schema_ok(line: &str) -> bool {
    const KEYS: [&str; 7] = ["command", "identity", "n", "mode", "trials", "seed", "status"];
    let Ok(Value::Object(obj)) = serde_json::from_str::<Value>(line) else { return false };
    KEYS.iter().all(|k| obj.contains_key(*k))
        && obj.keys().all(|k| KEYS.contains(&k.as_str()) || k == "witness")
        && obj.get("witness").is_none_or(|w| {
            ["trial", "assignment", "lhs", "rhs", "labels"].iter().all(|k| w.get(*k).is_some())
        })
}

#[test]
fn criterion_10_cli() {
    let mut failures = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for case in 0..500 {
        let e = random_ast(&mut rng, 5);
        let text = e.to_string();
        if parse(&text).ok().as_ref() != Some(&e) {
            failures.push(format!("round trip {case}: {text}"));
        }
    }

    let dir = std::env::temp_dir().join(format!("diffinv-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cat = dir.join("bad.toml");
    std::fs::write(&cat, "[[group]]\nname = \"bad\"\nn = 2\nsampler = \"o2\"\nphi = [\"x1\"]\np = \"dot(x, D(x))\"\n").unwrap();
    let exits = [
        (diffinv(&["verify", "eq3", "--n", "2", "--mode", "eval", "--json"]), 0),
        (diffinv(&["--catalog", cat.to_str().unwrap(), "verify", "group", "bad", "--n", "2", "--json"]), 1),
        (diffinv(&["verify", "nonsense", "--n", "2", "--json"]), 2),
    ];
    for (i, (out, code)) in exits.iter().enumerate() {
        if out.status.code() != Some(*code) {
            failures.push(format!("exit check {i}: {:?}, expected {code}", out.status.code()));
        }
        if *code != 2 && !String::from_utf8_lossy(&out.stdout).lines().all(schema_ok) {
            failures.push(format!("exit check {i}: JSON schema"));
        }
    }

    let start = Instant::now();
    let out = diffinv(&["verify", "all", "--n", "2", "--json"]);
    let elapsed = start.elapsed();
    let stdout = String::from_utf8_lossy(&out.stdout);
    if out.status.code() != Some(0) {
        failures.push(format!("campaign exited with {:?}", out.status.code()));
    }
    if stdout.lines().count() == 0 || !stdout.lines().all(schema_ok) {
        failures.push("campaign JSON schema".into());
    }
    if elapsed > Duration::from_secs(300) {
        failures.push(format!("campaign took {elapsed:?}"));
    }
    let detail = format!(
        "500 round trips, exit codes 0/1/2, campaign of {} checks in {:.1} s",
        stdout.lines().count(),
        elapsed.as_secs_f64()
    );
    conclude(10, failures, &detail);
}
