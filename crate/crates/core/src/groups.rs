//! A catalog of subgroups of the affine group: samplers, algebraic
//! generators, normalizers, and invariance checks.
//!
//! Generators `phi_j` are written in the jet blocks `z1 = x, z2 = dx, ...`
//! and lower to rational functions of the jets of `x`. A group also carries
//! the normalizer `p` defining `delta = p^{-1} d` and, when known, the
//! relation `pbar` that `delta`-generators satisfy, written in the slots
//! `a_i` (the reinterpreted `W_i/W`) and `b_j` (the reinterpreted `phi_j`).

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use crate::actions::AffineMap;
use crate::algebra::{q, qi, DiffRational, Indet, Q};
use crate::error::{Error, Result};
use crate::eval::{
    evaluate_term, verify_with, Assignment, Case, Options, Report, Term, TermSpec,
};
use crate::expr::parse_rational;
use crate::invariants::{p1, p_weight1, PVariant, WeightedInvariant};
use crate::wronskian::{ratio, wronskian, JetMatrix};

/// How elements of a group are drawn.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum Sampler {
    /// `GL(n, Q) x| Q^n`.
    GlAffine,
    /// `GL(n, Q)`.
    Gl,
    /// `O(2, Q)`.
    O2,
    /// `O(2, Q) x| Q^2`.
    O2Affine,
}

impl Sampler {
    pub fn parse(name: &str) -> Result<Self> {
        Ok(match name {
            "gl-affine" => Sampler::GlAffine,
            "gl" => Sampler::Gl,
            "o2" => Sampler::O2,
            "o2-affine" => Sampler::O2Affine,
            _ => return Err(Error::Catalog(format!("unknown sampler `{name}`"))),
        })
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Sampler::GlAffine => "gl-affine",
            Sampler::Gl => "gl",
            Sampler::O2 => "o2",
            Sampler::O2Affine => "o2-affine",
        }
    }

    fn is_orthogonal(self) -> bool {
        matches!(self, Sampler::O2 | Sampler::O2Affine)
    }

    fn is_affine(self) -> bool {
        matches!(self, Sampler::GlAffine | Sampler::O2Affine)
    }

    /// Draw an element of the group in dimension `n`.
    pub fn sample(self, n: usize, rng: &mut impl Rng) -> AffineMap {
        let h = if self.is_orthogonal() {
            let t = q(rng.gen_range(-9..=9), rng.gen_range(1..=9));
            o2_element(&t, rng.gen_bool(0.5)).h().to_vec()
        } else {
            loop {
                let h: Vec<Vec<Q>> = (0..n).map(|_| (0..n).map(|_| qi(rng.gen_range(-5..=5))).collect()).collect();
                if AffineMap::linear(h.clone()).is_ok() {
                    break h;
                }
            }
        };
        let h0 = if self.is_affine() {
            (0..h.len()).map(|_| q(rng.gen_range(-9..=9), rng.gen_range(1..=6))).collect()
        } else {
            vec![qi(0); h.len()]
        };
        AffineMap::new(h, h0).expect("sampled matrix is invertible")
    }

    /// The defining predicate of the group.
    pub fn contains(self, m: &AffineMap) -> bool {
        let linear_ok = !self.is_orthogonal() || (m.dim() == 2 && m.is_orthogonal());
        let translation_ok = self.is_affine() || m.h0().iter().all(|c| *c == qi(0));
        linear_ok && translation_ok
    }
}

/// The element of `O(2)` with first column `((1-t^2)/(1+t^2), 2t/(1+t^2))`:
/// a rotation, or with `reflect` the reflection `[[c, s], [s, -c]]`.
pub fn o2_element(t: &Q, reflect: bool) -> AffineMap {
    let one = qi(1);
    let d = &one + t * t;
    let c = (&one - t * t) / &d;
    let s = (qi(2) * t) / &d;
    let h = if reflect { vec![vec![c.clone(), s.clone()], vec![s, -c]] } else { vec![vec![c.clone(), -s.clone()], vec![s, c]] };
    AffineMap::linear(h).expect("orthogonal matrices are invertible")
}

/// A catalogued group.
#[derive(Clone, Debug)]
pub struct GroupSpec {
    name: String,
    n: usize,
    sampler: Sampler,
    phi: Vec<DiffRational>,
    p: WeightedInvariant,
    pbar: Option<DiffRational>,
    guard_p1: bool,
}

impl GroupSpec {
    pub fn new(
        name: impl Into<String>,
        n: usize,
        sampler: Sampler,
        phi: Vec<DiffRational>,
        p: WeightedInvariant,
        pbar: Option<DiffRational>,
    ) -> Result<Self> {
        let name = name.into();
        if sampler.is_orthogonal() && n != 2 {
            return Err(Error::Catalog(format!("{name}: orthogonal samplers need n = 2")));
        }
        if n < 2 {
            return Err(Error::InvalidDimension { what: "group", n, min: 2 });
        }
        if p.n() != n {
            return Err(Error::Catalog(format!("{name}: p is declared for n = {}", p.n())));
        }
        Ok(GroupSpec { name, n, sampler, phi, p, pbar, guard_p1: false })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn sampler(&self) -> Sampler {
        self.sampler
    }

    pub fn phi(&self) -> &[DiffRational] {
        &self.phi
    }

    pub fn p(&self) -> &WeightedInvariant {
        &self.p
    }

    pub fn pbar(&self) -> Option<&DiffRational> {
        self.pbar.as_ref()
    }

    /// A group element, deterministic in `seed`.
    pub fn sample_element(&self, seed: u64) -> AffineMap {
        self.sampler.sample(self.n, &mut ChaCha8Rng::seed_from_u64(seed))
    }

    /// `W_1/W, ..., W_n/W` followed by the algebraic generators.
    pub fn h_generators(&self) -> Result<Vec<DiffRational>> {
        let mut out = (1..=self.n).map(|i| ratio(self.n, i)).collect::<Result<Vec<_>>>()?;
        out.extend(self.phi.iter().cloned());
        Ok(out)
    }

    /// The generators read under `delta = p^{-1} d`, as lazy terms.
    pub fn delta_generators(&self) -> Result<Vec<Term>> {
        let spec = self.delta_spec()?;
        Ok(self.h_generators()?.into_iter().map(|f| Term::from(f).reinterpret(spec.clone())).collect())
    }

    pub fn delta_spec(&self) -> Result<TermSpec> {
        Ok(TermSpec::P(Box::new(self.p.term()?)))
    }

    /// `W`, then `p1` for the normalizers built from it, then `p`.
    pub fn guards(&self) -> Result<Vec<(&'static str, Term)>> {
        let mut out = vec![("W", Term::from(DiffRational::from_poly(&wronskian(self.n)?)))];
        if self.guard_p1 {
            out.push(("p1", p1(self.n)?.term()?));
        }
        out.push(("p", self.p.term()?));
        Ok(out)
    }

    /// Fail with [`Error::Degenerate`] when a guard vanishes at the point.
    pub fn check_guards(&self, point: &Assignment) -> Result<()> {
        for (name, t) in self.guards()? {
            match evaluate_term(&t, point) {
                Ok(v) if v != qi(0) => {}
                Ok(_) | Err(Error::ZeroDenominator) => {
                    return Err(Error::Degenerate(format!("{name} vanishes at the evaluation point")))
                }
                Err(e) => return Err(e),
            }
        }
        Ok(())
    }
}

impl fmt::Display for GroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "group {} (n = {}, sampler {})", self.name, self.n, self.sampler.as_str())?;
        for (j, phi) in self.phi.iter().enumerate() {
            writeln!(f, "  phi{} = {phi}", j + 1)?;
        }
        write!(f, "  p = {}", self.p.slots())?;
        if let Some(pbar) = &self.pbar {
            write!(f, "\n  pbar = {pbar}")?;
        }
        Ok(())
    }
}

/// `(x, dx)`.
pub fn example3_p(n: usize) -> Result<DiffRational> {
    need_plane(n)?;
    parse_rational("dot(x, D(x))", 2)
}

/// `d(det[dx, d^2x]^2 / (dx, dx)^3)`.
pub fn example4_p(n: usize) -> Result<DiffRational> {
    need_plane(n)?;
    parse_rational("D(det(D(x), D(x,2))^2 / dot(D(x), D(x))^3)", 2)
}

fn need_plane(n: usize) -> Result<()> {
    if n != 2 {
        return Err(Error::DimensionMismatch { expected: 2, found: n });
    }
    Ok(())
}

fn gl_normalizer(n: usize) -> Result<(WeightedInvariant, DiffRational)> {
    let p = p_weight1(n, PVariant::LogDerivative)?;
    let pbar = p.slots().clone();
    Ok((p, pbar))
}

/// `GL(n) x| C^n`: the Wronskian ratios generate, no algebraic generators.
pub fn gl_affine(n: usize) -> Result<GroupSpec> {
    let (p, pbar) = gl_normalizer(n)?;
    let mut g = GroupSpec::new("gl-affine", n, Sampler::GlAffine, Vec::new(), p, Some(pbar))?;
    g.guard_p1 = true;
    Ok(g)
}

/// `GL(n)`: additionally the coordinates of `x` in the frame
/// `dx, ..., d^n x`, by Cramer's rule.
pub fn gl_linear(n: usize) -> Result<GroupSpec> {
    let (p, pbar) = gl_normalizer(n)?;
    let w = DiffRational::from_poly(&wronskian(n)?);
    let mut phi = Vec::with_capacity(n);
    for j in 1..=n {
        let rows = (1..=n)
            .map(|i| (1..=n).map(|k| DiffRational::x(i, if k == j { 0 } else { k as u32 })).collect())
            .collect();
        phi.push(JetMatrix::new(rows)?.det().checked_div(&w)?);
    }
    let mut g = GroupSpec::new("gl", n, Sampler::Gl, phi, p, Some(pbar))?;
    g.guard_p1 = true;
    Ok(g)
}

/// `O(2)` with `phi = (x, x), (dx, dx)` and `p = (x, dx)`.
pub fn o2() -> Result<GroupSpec> {
    let phi = vec![parse_rational("dot(z1, z1)", 2)?, parse_rational("dot(z2, z2)", 2)?];
    let p = WeightedInvariant::new("p", 2, 1, example3_p(2)?);
    GroupSpec::new("o2", 2, Sampler::O2, phi, p, Some(parse_rational("1/2*D(b1)", 2)?))
}

/// `O(2) x| R^2` with `phi = (dx, dx), (d^2x, d^2x)`.
pub fn o2_affine() -> Result<GroupSpec> {
    let phi = vec![parse_rational("dot(z2, z2)", 2)?, parse_rational("dot(z3, z3)", 2)?];
    let p = WeightedInvariant::new("p", 2, 1, example4_p(2)?);
    let pbar = parse_rational("D((b1*b2 - 1/4*D(b1)^2) / b1^3)", 2)?;
    GroupSpec::new("o2-affine", 2, Sampler::O2Affine, phi, p, Some(pbar))
}

pub const BUILTIN: [&str; 4] = ["gl-affine", "gl", "o2", "o2-affine"];

/// A built-in group by name.
pub fn builtin(name: &str, n: usize) -> Result<GroupSpec> {
    match name {
        "gl-affine" => gl_affine(n),
        "gl" => gl_linear(n),
        "o2" | "o2-affine" => {
            need_plane(n)?;
            if name == "o2" {
                o2()
            } else {
                o2_affine()
            }
        }
        _ => Err(Error::UnknownGroup(name.to_string())),
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CatalogFile {
    #[serde(default)]
    group: Vec<CatalogEntry>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CatalogEntry {
    name: String,
    n: usize,
    sampler: String,
    #[serde(default)]
    phi: Vec<String>,
    p: String,
    pbar: Option<String>,
}

/// Read `[[group]]` tables with keys `name`, `n`, `sampler`, `phi` (list of
/// expressions), `p` and optionally `pbar`.
pub fn load_catalog(text: &str) -> Result<Vec<GroupSpec>> {
    let file: CatalogFile = toml::from_str(text).map_err(|e| Error::Catalog(e.to_string()))?;
    file.group
        .into_iter()
        .map(|e| {
            let ctx = |what: &str, err: Error| Error::Catalog(format!("{}: {what}: {err}", e.name));
            let phi = e
                .phi
                .iter()
                .map(|s| parse_rational(s, e.n).map_err(|err| ctx("phi", err)))
                .collect::<Result<Vec<_>>>()?;
            let p = parse_rational(&e.p, e.n).map_err(|err| ctx("p", err))?;
            if p.is_zero() {
                return Err(ctx("p", Error::DivisionByZero));
            }
            let pbar = e.pbar.as_deref().map(|s| parse_rational(s, e.n).map_err(|err| ctx("pbar", err))).transpose()?;
            let sampler = Sampler::parse(&e.sampler)?;
            GroupSpec::new(e.name.clone(), e.n, sampler, phi, WeightedInvariant::new("p", e.n, 1, p), pbar)
        })
        .collect()
}

/// Look a group up in a user catalog first, then among the built-ins.
pub fn resolve(name: &str, n: usize, catalog: &[GroupSpec]) -> Result<GroupSpec> {
    match catalog.iter().find(|g| g.name == name) {
        Some(g) if g.n == n => Ok(g.clone()),
        Some(g) => Err(Error::DimensionMismatch { expected: g.n, found: n }),
        None => builtin(name, n),
    }
}

/// `f(h x + h0) = f(x)` for sampled elements `(h, h0)`.
pub fn check_h_invariance(f: impl Into<Term>, group: &GroupSpec, trials: usize, seed: u64) -> Report {
    let f = f.into();
    let build = |rng: &mut ChaCha8Rng| {
        let m = group.sampler.sample(group.n, rng);
        Ok(Case::new(f.clone().act(m.clone()), f.clone()).label("element", m))
    };
    verify_with(&format!("H-invariance under {}", group.name), &Options::eval(trials, seed), &build)
}

/// `f^{g^{-1} d}(h x + h0) = f^d(x)` for sampled elements and a symbolic `g`.
pub fn check_fh_invariance(f: impl Into<Term>, group: &GroupSpec, trials: usize, seed: u64) -> Report {
    let f = f.into();
    let build = |rng: &mut ChaCha8Rng| {
        let m = group.sampler.sample(group.n, rng);
        Ok(Case::new(f.clone().act(m.clone()).reinterpret(TermSpec::G), f.clone()).label("element", m))
    };
    verify_with(&format!("(F*,H)-invariance under {}", group.name), &Options::eval(trials, seed), &build)
}

/// `pbar` evaluated on the `delta`-generators: `pbar^delta(a^delta, b^delta)`.
pub fn pbar_term(group: &GroupSpec) -> Result<Option<Term>> {
    let Some(pbar) = &group.pbar else { return Ok(None) };
    let n = group.n;
    let mut bindings = Vec::new();
    for i in 1..=n {
        bindings.push((Indet::A(i as u16), Term::from(ratio(n, i)?)));
    }
    for (j, phi) in group.phi.iter().enumerate() {
        bindings.push((Indet::B(j as u16 + 1), Term::from(phi)));
    }
    Ok(Some(Term::from(pbar).bind(bindings).reinterpret(group.delta_spec()?)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::{evaluate, jets_of_curve, CurveSpec};

    #[test]
    fn pythagorean_sample() {
        let m = o2_element(&q(1, 2), false);
        assert_eq!((m.h()[0][0].clone(), m.h()[1][0].clone()), (q(3, 5), q(4, 5)));
        let r = o2_element(&q(1, 2), true);
        assert_eq!(r.det(), qi(-1));
        assert!(r.is_orthogonal());
        for seed in 0..20 {
            for s in [Sampler::O2, Sampler::O2Affine, Sampler::Gl, Sampler::GlAffine] {
                let m = s.sample(2, &mut ChaCha8Rng::seed_from_u64(seed));
                assert!(s.contains(&m));
                assert_ne!(m.det(), qi(0));
            }
        }
        let g = o2().unwrap();
        assert_eq!(g.sample_element(3), g.sample_element(3));
    }

    #[test]
    fn example_normalizers() {
        assert_eq!(example3_p(2).unwrap().to_string(), "x1*D(x1) + x2*D(x2)");
        assert!(example3_p(3).is_err());
        let c = CurveSpec::parse_coords(&["t", "t^2"]).unwrap();
        let a = jets_of_curve(&c, &qi(1), 4).unwrap();
        assert_eq!(evaluate(&example4_p(2).unwrap(), &a).unwrap(), q(-96, 625));
    }

    #[test]
    fn catalog_generators() {
        assert!(gl_affine(2).unwrap().h_generators().unwrap().len() == 2);
        assert_eq!(o2().unwrap().h_generators().unwrap().len(), 4);
        assert!(matches!(builtin("sl", 2), Err(Error::UnknownGroup(_))));
        assert!(builtin("o2", 3).is_err());
        let g = gl_linear(2).unwrap();
        for phi in g.phi() {
            assert!(check_h_invariance(phi, &g, 10, 1).passed());
            assert!(!check_h_invariance(phi, &gl_affine(2).unwrap(), 10, 1).passed());
        }
    }

    #[test]
    fn toml_catalog() {
        let text = r#"
            [[group]]
            name = "plane-rotations"
            n = 2
            sampler = "o2"
            phi = ["dot(z1, z1)", "dot(z2, z2)"]
            p = "dot(x, D(x))"
            pbar = "1/2*D(b1)"
        "#;
        let cat = load_catalog(text).unwrap();
        assert_eq!(cat.len(), 1);
        let g = resolve("plane-rotations", 2, &cat).unwrap();
        assert_eq!(g.phi().len(), 2);
        assert!(resolve("gl", 3, &cat).is_ok());
        assert!(matches!(load_catalog("[[group]]\nname = 1"), Err(Error::Catalog(_))));
        let bad = text.replace("dot(x, D(x))", "dot(x, ");
        assert!(matches!(load_catalog(&bad), Err(Error::Catalog(_))));
    }
}
