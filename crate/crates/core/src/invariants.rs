//! Semi-invariants of the affine group with a reparametrization weight, the
//! normalizer `p` of weight one, and the residuals of the associated
//! differential equations.
//!
//! Invariants built from Wronskian ratios are stored in slot form: a
//! rational function of the slots `a_i` (standing for `W_i / W`) and their
//! derivatives. [`WeightedInvariant::expr`] expands the slots;
//! [`WeightedInvariant::term`] keeps them bound lazily for evaluation.

use std::fmt;

use crate::actions::{delta_apply, reinterpret_where, DerivationSpec};
use crate::algebra::{q, DiffRational, Indet, Q};
use crate::error::{Error, Result};
use crate::eval::{evaluate_term, jets_of_curve, required_order, series_of_term, CurveSpec, Term, TermSpec, UniRational};
use crate::groups::GroupSpec;
use crate::wronskian::{bind_ratios, bind_s, bracket_n1, bracket_n2, ratio, slot_a, JetMatrix};

/// A function `f` with `f^{g^{-1} d}<h x + h0> = g^{-w} f^d<x>` for the
/// group it belongs to.
#[derive(Clone, PartialEq, Debug)]
pub struct WeightedInvariant {
    name: String,
    n: usize,
    weight: u32,
    slots: DiffRational,
}

impl WeightedInvariant {
    /// `slots` may use the `a_i` slots, bound to `W_i / W`.
    pub fn new(name: impl Into<String>, n: usize, weight: u32, slots: DiffRational) -> Self {
        WeightedInvariant { name: name.into(), n, weight, slots }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn weight(&self) -> u32 {
        self.weight
    }

    pub fn slots(&self) -> &DiffRational {
        &self.slots
    }

    fn uses_slots(&self) -> bool {
        self.slots.orders().keys().any(|i| matches!(i, Indet::A(_)))
    }

    /// The function of the jets of `x`.
    pub fn expr(&self) -> Result<DiffRational> {
        if !self.uses_slots() {
            return Ok(self.slots.clone());
        }
        bind_ratios(&self.slots, self.n)
    }

    /// A lazily bound term for evaluation.
    pub fn term(&self) -> Result<Term> {
        let t = Term::from(&self.slots);
        if !self.uses_slots() {
            return Ok(t);
        }
        let bindings =
            (1..=self.n).map(|i| Ok((Indet::A(i as u16), Term::from(ratio(self.n, i)?)))).collect::<Result<_>>()?;
        Ok(t.bind(bindings))
    }
}

impl fmt::Display for WeightedInvariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (weight {}) = {}", self.name, self.weight, self.slots)
    }
}

fn check_n(n: usize, min: usize, what: &'static str) -> Result<()> {
    if n < min {
        return Err(Error::InvalidDimension { what, n, min });
    }
    Ok(())
}

/// The coefficients `(n-1)/3` and `(n-1)(3n+2)/(6n(n+1))` of `p1`.
pub fn p1_coefficients(n: usize) -> (Q, Q) {
    let m = n as i64;
    (q(m - 1, 3), q((m - 1) * (3 * m + 2), 6 * m * (m + 1)))
}

/// `s := 2/(n(n+1)) a_n`, the value substituted for `dg/g`.
pub fn sigma(n: usize) -> DiffRational {
    let m = n as i64;
    slot_a(n, 0).scale(&q(2, m * (m + 1)))
}

/// `p1 = a_{n-1} + (n-1)/3 D(a_n) - (n-1)(3n+2)/(6n(n+1)) a_n^2`, weight 2.
pub fn p1(n: usize) -> Result<WeightedInvariant> {
    check_n(n, 2, "p1")?;
    let (c1, c2) = p1_coefficients(n);
    let slots = DiffRational::sum([slot_a(n - 1, 0), slot_a(n, 1).scale(&c1), slot_a(n, 0).pow(2).scale(&-c2)]);
    Ok(WeightedInvariant::new("p1", n, 2, slots))
}

/// The `W_{n-1}` bracket with `s := 2/(n(n+1)) a_n`; equals `p1`.
pub fn p1_by_substitution(n: usize) -> Result<DiffRational> {
    bind_s(&bracket_n1(n)?, &sigma(n))
}

/// `p2`: the `W_{n-2}` bracket with `s := 2/(n(n+1)) a_n`, weight 3.
pub fn p2(n: usize) -> Result<WeightedInvariant> {
    check_n(n, 3, "p2")?;
    Ok(WeightedInvariant::new("p2", n, 3, bind_s(&bracket_n2(n)?, &sigma(n))?))
}

/// Which weight-one normalizer to build.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum PVariant {
    /// `n(n+1)/2 D(p1)/p1 - 2 a_n`.
    LogDerivative,
    /// `p2 / p1`.
    Ratio,
}

impl PVariant {
    pub fn as_str(self) -> &'static str {
        match self {
            PVariant::LogDerivative => "log",
            PVariant::Ratio => "ratio",
        }
    }
}

/// The weight-one normalizer `p` in slot form.
pub fn p_weight1(n: usize, variant: PVariant) -> Result<WeightedInvariant> {
    let slots = match variant {
        PVariant::LogDerivative => {
            check_n(n, 2, "p (log-derivative)")?;
            let p1 = p1(n)?.slots;
            let t = q((n * (n + 1)) as i64, 2);
            (p1.derive().checked_div(&p1)?).scale(&t) - slot_a(n, 0).scale(&q(2, 1))
        }
        PVariant::Ratio => {
            check_n(n, 3, "p (ratio)")?;
            p2(n)?.slots.checked_div(&p1(n)?.slots)?
        }
    };
    let name = match variant {
        PVariant::LogDerivative => "p",
        PVariant::Ratio => "p-ratio",
    };
    Ok(WeightedInvariant::new(name, n, 1, slots))
}

/// `delta = p^{-1} d` for the chosen normalizer.
pub fn normalized_derivation(n: usize, variant: PVariant) -> Result<DerivationSpec> {
    DerivationSpec::p(p_weight1(n, variant)?.expr()?)
}

/// The generators `W_1/W, ..., W_n/W` of the invariants of `GL(n) x| C^n`.
pub fn gl_generators(n: usize) -> Result<Vec<DiffRational>> {
    check_n(n, 2, "GL generators")?;
    (1..=n).map(|i| ratio(n, i)).collect()
}

/// `sum_{i=1}^{n+1} (-1)^{n+1-i} (W^delta_i / W^delta) delta^i y`, with the
/// minors taken from the matrix of `delta`-jets of `x`.
pub fn theorem2_residual(n: usize, y: &DiffRational, spec: &DerivationSpec) -> Result<DiffRational> {
    check_n(n, 1, "residual")?;
    let mut xj: Vec<Vec<DiffRational>> = (1..=n).map(|i| vec![DiffRational::x(i, 0)]).collect();
    for row in xj.iter_mut() {
        for k in 0..=n {
            let next = delta_apply(&row[k], spec);
            row.push(next);
        }
    }
    let mut yj = vec![y.clone()];
    for k in 0..=n {
        yj.push(delta_apply(&yj[k], spec));
    }
    let minor = |skip: usize| {
        let rows = xj.iter().map(|r| (1..=n + 1).filter(|&k| k != skip).map(|k| r[k].clone()).collect()).collect();
        JetMatrix::new(rows).map(|m| m.det())
    };
    let w = minor(n + 1)?;
    let mut terms = Vec::with_capacity(n + 1);
    for i in 1..=n + 1 {
        let t = minor(i)? * &yj[i];
        terms.push(if (n + 1 - i) % 2 == 0 { t } else { -t });
    }
    DiffRational::sum(terms).checked_div(&w)
}

/// Prescribed values for the realization residuals, as functions of the
/// curve parameter or as jets at the evaluation point.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Target {
    Function(UniRational),
    Jets(Vec<Q>),
}

/// The residual system at `t0`, in order: for each coordinate the equation
/// `delta^{n+1} x_i + sum_k (-1)^{n+1-k} a_k delta^k x_i`, then `phi_j - b_j`
/// for each catalog generator, then `pbar - 1` if the group has a `pbar`.
/// Here `delta = p^{-1} d` with the group's `p`, and `a`, `b` are read
/// under `delta` as well.
pub fn realization_residuals(
    curve: &CurveSpec,
    t0: &Q,
    a: &[Target],
    b: &[Target],
    group: &GroupSpec,
) -> Result<Vec<Q>> {
    let n = group.n();
    if curve.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, found: curve.dim() });
    }
    if a.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: a.len() });
    }
    if b.len() != group.phi().len() {
        return Err(Error::DimensionMismatch { expected: group.phi().len(), found: b.len() });
    }
    let spec = TermSpec::P(Box::new(group.p().term()?));
    let mut residuals: Vec<DiffRational> = Vec::new();
    for i in 1..=n {
        let mut terms = vec![DiffRational::x(i, n as u32 + 1)];
        for k in 1..=n {
            let t = slot_a(k, 0) * DiffRational::x(i, k as u32);
            terms.push(if (n + 1 - k) % 2 == 0 { t } else { -t });
        }
        residuals.push(DiffRational::sum(terms));
    }
    for (j, phi) in group.phi().iter().enumerate() {
        residuals.push(phi - DiffRational::var(Indet::B(j as u16 + 1).jet(0)));
    }
    if let Some(pbar) = group.pbar() {
        residuals.push(pbar - DiffRational::one());
    }
    let terms: Vec<Term> = residuals.into_iter().map(|r| Term::from(r).reinterpret(spec.clone())).collect();
    let mut order = 0;
    for t in &terms {
        order = order.max(required_order(t)?);
    }
    let mut point = jets_of_curve(curve, t0, order)?;
    for (slot, targets) in [(Indet::A as fn(u16) -> Indet, a), (Indet::B as fn(u16) -> Indet, b)] {
        for (j, target) in targets.iter().enumerate() {
            let jets = match target {
                Target::Function(f) => {
                    let s = f.series_at(t0, order as usize + 1)?;
                    (0..=order as usize).map(|k| s.jet(k).expect("enough coefficients")).collect()
                }
                Target::Jets(js) => js.clone(),
            };
            for (k, v) in jets.into_iter().enumerate() {
                point.insert(slot(j as u16 + 1).jet(k as u32), v);
            }
        }
    }
    group.check_guards(&point)?;
    terms.iter().map(|t| evaluate_term(t, &point)).collect()
}

/// Targets read off the curve itself: `a_i = W^delta_i / W^delta` and
/// `b_j = phi_j^delta`, as jets at `t0` of the given depth.
pub fn curve_targets(curve: &CurveSpec, t0: &Q, group: &GroupSpec, depth: u32) -> Result<(Vec<Target>, Vec<Target>)> {
    let spec = TermSpec::P(Box::new(group.p().term()?));
    let guards = group.guards()?;
    let mut order = 0;
    for (_, t) in &guards {
        order = order.max(required_order(t)?);
    }
    group.check_guards(&jets_of_curve(curve, t0, order)?)?;
    let to_jets = |f: &DiffRational| -> Result<Target> {
        let t = Term::from(f).reinterpret(spec.clone());
        let point = jets_of_curve(curve, t0, required_order(&t)? + depth)?;
        let s = series_of_term(&t, &point, depth)?;
        Ok(Target::Jets((0..=depth as usize).map(|k| s.jet(k).expect("enough coefficients")).collect()))
    };
    let a = (1..=group.n()).map(|i| to_jets(&ratio(group.n(), i)?)).collect::<Result<Vec<_>>>()?;
    let b = group.phi().iter().map(to_jets).collect::<Result<Vec<_>>>()?;
    Ok((a, b))
}

/// Symbolic reinterpretation of a slot-form invariant, reading both the
/// jets of `x` and the slots under `spec`.
pub fn reinterpret_slots(f: &DiffRational, spec: &DerivationSpec) -> DiffRational {
    reinterpret_where(f, spec, &|i| matches!(i, Indet::X(_) | Indet::A(_) | Indet::B(_)))
}
