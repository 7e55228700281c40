//! Named checks of the transformation laws and invariance identities.

use std::fmt;
use std::str::FromStr;

use crate::actions::{check_phi_expansion, phi_coefficient, reinterpret, DerivationSpec};
use crate::algebra::{eq_rational, DiffRational, Indet, VarKey};
use crate::error::{Error, Result};
use crate::eval::{verify_with, Case, Mode, Options, Report, Status, Term, TermSpec};
use crate::groups::{
    check_fh_invariance, check_h_invariance, example3_p, gl_affine, o2, o2_affine, pbar_term, GroupSpec, Sampler,
};
use crate::invariants::{p1, p2, p_weight1, theorem2_residual, PVariant, WeightedInvariant};
use crate::wronskian::{
    alternating_sum, eq2_rhs, eq3_rhs, eq4_delta_rhs, eq4_square_rhs, extended_wronskian, predicted_minor_transform,
    ratio, wronskian_minor,
};
use crate::expr::parse_rational;

/// A checkable identity.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Identity {
    Eq2,
    Eq3,
    Eq4,
    MinorLaw(usize),
    Weight(String),
    Normalization(String),
    Phi(u32),
    Theorem2,
    Example3,
    Example4,
}

/// Invariants accepted by [`Identity::Weight`] and [`Identity::Normalization`].
pub const INVARIANT_NAMES: [&str; 4] = ["p1", "p2", "p", "p-ratio"];

impl fmt::Display for Identity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Identity::Eq2 => f.write_str("eq2"),
            Identity::Eq3 => f.write_str("eq3"),
            Identity::Eq4 => f.write_str("eq4"),
            Identity::MinorLaw(j) => write!(f, "minor-law {j}"),
            Identity::Weight(name) => write!(f, "weight {name}"),
            Identity::Normalization(name) => write!(f, "normalization {name}"),
            Identity::Phi(k) => write!(f, "phi {k}"),
            Identity::Theorem2 => f.write_str("theorem2"),
            Identity::Example3 => f.write_str("example3"),
            Identity::Example4 => f.write_str("example4"),
        }
    }
}

impl FromStr for Identity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut words = s.split_whitespace();
        let head = words.next().unwrap_or("");
        let arg = words.next();
        if words.next().is_some() {
            return Err(Error::Type(format!("unexpected input in identity `{s}`")));
        }
        let need = || arg.ok_or_else(|| Error::Type(format!("`{head}` needs an argument")));
        let int = |a: &str| a.parse::<u32>().map_err(|_| Error::Type(format!("expected an integer, found `{a}`")));
        let id = match head {
            "eq2" => Identity::Eq2,
            "eq3" => Identity::Eq3,
            "eq4" => Identity::Eq4,
            "minor-law" => Identity::MinorLaw(int(need()?)? as usize),
            "weight" => Identity::Weight(need()?.to_string()),
            "normalization" => Identity::Normalization(need()?.to_string()),
            "phi" => Identity::Phi(int(need()?)?),
            "theorem2" => Identity::Theorem2,
            "example3" => Identity::Example3,
            "example4" => Identity::Example4,
            _ => return Err(Error::Type(format!("unknown identity `{s}`"))),
        };
        if arg.is_some() && !matches!(id, Identity::MinorLaw(_) | Identity::Weight(_) | Identity::Normalization(_) | Identity::Phi(_)) {
            return Err(Error::Type(format!("`{head}` takes no argument")));
        }
        Ok(id)
    }
}

/// A weighted invariant by name: `p1`, `p2`, `p` (log-derivative) or
/// `p-ratio`.
pub fn invariant(name: &str, n: usize) -> Result<WeightedInvariant> {
    match name {
        "p1" => p1(n),
        "p2" => p2(n),
        "p" | "p-log" => p_weight1(n, PVariant::LogDerivative),
        "p-ratio" => p_weight1(n, PVariant::Ratio),
        _ => Err(Error::Type(format!("unknown invariant `{name}`"))),
    }
}

fn g_law(identity: &str, lhs: impl Into<Term>, rhs: DiffRational, opts: &Options) -> Report {
    let lhs = lhs.into().reinterpret(TermSpec::G);
    let case = Case::new(lhs, rhs);
    verify_with(identity, opts, &|_| Ok(case.clone()))
}

fn symbolic_report(identity: &str, ok: Result<bool>) -> Report {
    Report {
        identity: identity.to_string(),
        mode: Mode::Symbolic,
        trials: 0,
        seed: None,
        status: match ok {
            Ok(true) => Status::Pass,
            Ok(false) => Status::Fail,
            Err(e) => Status::Error(e.to_string()),
        },
        witness: None,
    }
}

fn g_inverse_power(w: u32) -> DiffRational {
    DiffRational::g(0).pow(-(w as i32))
}

/// `f^{g^{-1} d}(h x + h0) = g^{-w} f^d(x)` over sampled elements of
/// `GL(n) x| Q^n`.
pub fn weight_law(f: &WeightedInvariant, opts: &Options) -> Result<Report> {
    let t = f.term()?;
    let n = f.n();
    let scale = Term::from(g_inverse_power(f.weight()));
    let build = |rng: &mut rand_chacha::ChaCha8Rng| {
        let m = Sampler::GlAffine.sample(n, rng);
        let lhs = t.clone().act(m.clone()).reinterpret(TermSpec::G);
        Ok(Case::new(lhs, scale.clone().mul(t.clone())).label("element", m))
    };
    Ok(verify_with(&format!("weight {} (w = {})", f.name(), f.weight()), opts, &build))
}

/// `p^delta = 1` for `delta = p^{-1} d`.
pub fn normalization(p: &WeightedInvariant, opts: &Options) -> Result<Report> {
    let t = p.term()?;
    let lhs = t.clone().reinterpret(TermSpec::P(Box::new(t)));
    let case = Case::new(lhs, DiffRational::one());
    Ok(verify_with(&format!("normalization {}", p.name()), opts, &|_| Ok(case.clone())))
}

/// The generator checks of a catalogued group: every `H`-generator is
/// `H`-invariant, every `delta`-generator is `(F*, H)`-invariant.
pub fn group_invariance(group: &GroupSpec, h_trials: usize, fh_trials: usize, seed: u64) -> Result<Vec<Report>> {
    let mut out = Vec::new();
    for (i, f) in group.h_generators()?.iter().enumerate() {
        let mut r = check_h_invariance(f, group, h_trials, seed);
        r.identity = format!("{} generator {}", r.identity, i + 1);
        out.push(r);
    }
    for (i, f) in group.delta_generators()?.into_iter().enumerate() {
        let mut r = check_fh_invariance(f, group, fh_trials, seed);
        r.identity = format!("{} of delta-generator {}", r.identity, i + 1);
        out.push(r);
    }
    Ok(out)
}

/// `pbar^delta = 1` on the `delta`-generators of the group.
pub fn pbar_relation(group: &GroupSpec, opts: &Options) -> Result<Option<Report>> {
    let Some(t) = pbar_term(group)? else { return Ok(None) };
    let case = Case::new(t, DiffRational::one());
    Ok(Some(verify_with(&format!("pbar relation of {}", group.name()), opts, &|_| Ok(case.clone()))))
}

fn need_plane(n: usize) -> Result<()> {
    if n != 2 {
        return Err(Error::DimensionMismatch { expected: 2, found: n });
    }
    Ok(())
}

/// Run the checks behind `id` in dimension `n`.
pub fn run(id: &Identity, n: usize, opts: &Options) -> Result<Vec<Report>> {
    let name = id.to_string();
    Ok(match id {
        Identity::Eq2 => vec![g_law(&name, ratio(n, n)?, eq2_rhs(n)?, opts)],
        Identity::Eq3 => {
            if n < 2 {
                return Err(Error::InvalidDimension { what: "eq3", n, min: 2 });
            }
            vec![g_law(&name, ratio(n, n - 1)?, eq3_rhs(n)?, opts)]
        }
        Identity::Eq4 => {
            let a = ratio(n, n)?;
            let square = g_law("eq4 square", a.pow(2), eq4_square_rhs(n)?, opts);
            let lhs = Term::from(g_inverse_power(1)).mul(Term::from(&a).reinterpret(TermSpec::G).derive());
            let case = Case::new(lhs, eq4_delta_rhs(n)?);
            vec![square, verify_with("eq4 delta", opts, &|_| Ok(case.clone()))]
        }
        Identity::MinorLaw(j) => {
            let w = DiffRational::from_poly(&wronskian_minor(n, *j)?);
            vec![g_law(&name, w, predicted_minor_transform(n, *j)?, opts)]
        }
        Identity::Weight(f) => vec![weight_law(&invariant(f, n)?, opts)?],
        Identity::Normalization(f) => vec![normalization(&invariant(f, n)?, opts)?],
        Identity::Phi(k) => {
            let k = *k;
            if k == 0 {
                return Err(Error::IndexOutOfRange { index: 0, min: 1, max: u32::MAX as usize });
            }
            let corners = (|| -> Result<bool> {
                let first = DiffRational::from_poly(&phi_coefficient(k, 1)?);
                let last = DiffRational::from_poly(&phi_coefficient(k, k)?);
                Ok(first == DiffRational::g(k - 1) && last == DiffRational::g(0).pow(k as i32))
            })();
            vec![
                symbolic_report(&format!("phi {k} expansion"), Ok(check_phi_expansion(k))),
                symbolic_report(&format!("phi {k} corners"), corners),
            ]
        }
        Identity::Theorem2 => {
            let mut ys: Vec<DiffRational> = (1..=n).map(|j| DiffRational::x(j, 0)).collect();
            ys.push(DiffRational::one());
            let residuals = (|| -> Result<bool> {
                for spec in [DerivationSpec::Base, DerivationSpec::G] {
                    for y in &ys {
                        if !theorem2_residual(n, y, &spec)?.is_zero() {
                            return Ok(false);
                        }
                    }
                }
                Ok(true)
            })();
            let y = DiffRational::var(VarKey::new(Indet::Y, 0));
            let bordered = (|| -> Result<bool> {
                Ok((alternating_sum(n, &y)? - DiffRational::from_poly(&extended_wronskian(n)?)).is_zero())
            })();
            vec![
                symbolic_report("theorem2 residual at y = x_j and y = 1", residuals),
                symbolic_report("theorem2 bordered expansion", bordered),
            ]
        }
        Identity::Example3 => {
            need_plane(n)?;
            let p = example3_p(2)?;
            let spec = DerivationSpec::p(p)?;
            let half = parse_rational("1/2*D(dot(x, x))", 2)?;
            let ok = Ok(eq_rational(&reinterpret(&half, &spec), &DiffRational::one()));
            let g = o2()?;
            let mut out = vec![symbolic_report("example3 normalization 1/2 delta(x, x) = 1", ok)];
            out.extend(pbar_relation(&g, opts)?);
            out.extend(group_invariance(&g, 50, 20, opts.seed)?);
            out
        }
        Identity::Example4 => {
            need_plane(n)?;
            let lhs = parse_rational("det(D(x), D(x,2))^2", 2)?;
            let rhs = parse_rational("dot(z2, z2)*dot(z3, z3) - 1/4*D(dot(z2, z2))^2", 2)?;
            let g = o2_affine()?;
            let mut out = vec![symbolic_report("example4 det[dx, d^2x]^2 = phi1 phi2 - 1/4 (d phi1)^2", Ok((lhs - rhs).is_zero()))];
            out.extend(pbar_relation(&g, &Options { mode: Mode::Eval, ..*opts })?);
            out.extend(group_invariance(&g, 50, 20, opts.seed)?);
            out
        }
    })
}

/// The identities that apply in dimension `n`.
pub fn all(n: usize) -> Vec<Identity> {
    let mut out = vec![Identity::Eq2];
    if n >= 2 {
        out.extend([Identity::Eq3, Identity::Eq4]);
    }
    out.extend((1..=n + 1).map(Identity::MinorLaw));
    for name in INVARIANT_NAMES {
        let valid = match name {
            "p2" | "p-ratio" => n >= 3,
            _ => n >= 2,
        };
        if valid {
            out.push(Identity::Weight(name.to_string()));
            if name == "p" || name == "p-ratio" {
                out.push(Identity::Normalization(name.to_string()));
            }
        }
    }
    out.extend((1..=5).map(Identity::Phi));
    out.push(Identity::Theorem2);
    if n == 2 {
        out.extend([Identity::Example3, Identity::Example4]);
    }
    out
}

/// The generator checks for the built-in groups in dimension `n`.
pub fn catalog_invariance(n: usize, seed: u64) -> Result<Vec<Report>> {
    let mut groups = vec![gl_affine(n)?];
    if n == 2 {
        groups.extend([o2()?, o2_affine()?]);
    }
    let mut out = Vec::new();
    for g in &groups {
        out.extend(group_invariance(g, 50, 20, seed)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_names_round_trip() {
        for id in all(3).into_iter().chain(all(2)) {
            assert_eq!(id.to_string().parse::<Identity>().unwrap(), id);
        }
        assert!("minor-law".parse::<Identity>().is_err());
        assert!("eq2 3".parse::<Identity>().is_err());
        assert!("bogus".parse::<Identity>().is_err());
    }

    #[test]
    fn perturbed_law_fails_with_witness() {
        let n = 2;
        let wrong = (ratio(n, n).unwrap() - DiffRational::int(4) * crate::wronskian::log_dg()) * DiffRational::g(0).pow(-1);
        let r = g_law("eq2 perturbed", ratio(n, n).unwrap(), wrong, &Options::eval(5, 3));
        assert_eq!(r.status, Status::Fail);
        assert!(r.witness.is_some());
        let r = run(&Identity::Eq2, 2, &Options::eval(5, 3)).unwrap();
        assert!(r[0].passed());
    }

    #[test]
    fn small_identities() {
        let opts = Options::default();
        for id in [Identity::Eq2, Identity::MinorLaw(3), Identity::Phi(3), Identity::Theorem2] {
            for r in run(&id, 2, &opts).unwrap() {
                assert!(r.passed(), "{r}");
            }
        }
        assert!(run(&Identity::MinorLaw(4), 2, &opts).is_err());
        assert!(run(&Identity::Example3, 3, &opts).is_err());
    }
}
