use std::cell::RefCell;
use std::collections::{BTreeSet, HashMap};

use num_traits::Zero;

use super::series::{rational_on_series, Series};
use super::Assignment;
use crate::actions::{act_affine, delta_apply, reinterpret_where, AffineMap, DerivationSpec};
use crate::algebra::{DiffRational, Indet, VarKey, Q};
use crate::error::{Error, Result};

/// A lazily composed element of the differential field.
///
/// Terms describe how a value is built (sums, products, affine actions,
/// reinterpretation under a new derivation, binding slot variables) without
/// expanding it. A term can be evaluated exactly at a point or, when small
/// enough, materialized as a [`DiffRational`].
#[derive(Clone, PartialEq, Debug)]
pub enum Term {
    Rational(DiffRational),
    Sum(Vec<Term>),
    Product(Vec<Term>),
    Quotient(Box<Term>, Box<Term>),
    Power(Box<Term>, i32),
    /// The derivation in force.
    Derive(Box<Term>),
    /// The affine substitution `x -> h x + h0`.
    Act(Box<Term>, AffineMap),
    /// Every jet of `x` and of the slot variables read under a new
    /// derivation.
    Reinterpret(Box<Term>, TermSpec),
    /// Slot variables replaced by values; `d^k v` becomes the `k`-th
    /// derivative of the value.
    Bind(Box<Term>, Vec<(Indet, Term)>),
}

/// The derivation a [`Term::Reinterpret`] switches to.
#[derive(Clone, PartialEq, Debug)]
pub enum TermSpec {
    Base,
    G,
    /// `p^{-1} d` with `p` itself a term.
    P(Box<Term>),
}

impl From<DiffRational> for Term {
    fn from(f: DiffRational) -> Self {
        Term::Rational(f)
    }
}

impl From<&DiffRational> for Term {
    fn from(f: &DiffRational) -> Self {
        Term::Rational(f.clone())
    }
}

impl From<&DerivationSpec> for TermSpec {
    fn from(s: &DerivationSpec) -> Self {
        match s {
            DerivationSpec::Base => TermSpec::Base,
            DerivationSpec::G => TermSpec::G,
            DerivationSpec::P(p) => TermSpec::P(Box::new(p.get().into())),
        }
    }
}

fn reinterpreted(v: Indet) -> bool {
    matches!(v, Indet::X(_) | Indet::A(_) | Indet::B(_))
}

impl Term {
    pub fn constant(c: Q) -> Term {
        Term::Rational(DiffRational::constant(c))
    }

    pub fn sub(self, other: Term) -> Term {
        Term::Sum(vec![self, Term::Product(vec![Term::constant(Q::from_integer((-1).into())), other])])
    }

    pub fn mul(self, other: Term) -> Term {
        Term::Product(vec![self, other])
    }

    pub fn div(self, other: Term) -> Term {
        Term::Quotient(Box::new(self), Box::new(other))
    }

    pub fn pow(self, e: i32) -> Term {
        Term::Power(Box::new(self), e)
    }

    pub fn derive(self) -> Term {
        Term::Derive(Box::new(self))
    }

    pub fn act(self, m: AffineMap) -> Term {
        Term::Act(Box::new(self), m)
    }

    pub fn reinterpret(self, spec: TermSpec) -> Term {
        Term::Reinterpret(Box::new(self), spec)
    }

    pub fn bind(self, bindings: Vec<(Indet, Term)>) -> Term {
        Term::Bind(Box::new(self), bindings)
    }

    /// Indeterminates whose jets must be supplied by an assignment.
    pub fn indets(&self) -> BTreeSet<Indet> {
        let mut out = BTreeSet::new();
        self.collect_indets(&mut out);
        out
    }

    fn collect_indets(&self, out: &mut BTreeSet<Indet>) {
        match self {
            Term::Rational(f) => out.extend(f.orders().into_keys()),
            Term::Sum(ts) | Term::Product(ts) => ts.iter().for_each(|t| t.collect_indets(out)),
            Term::Quotient(a, b) => {
                a.collect_indets(out);
                b.collect_indets(out);
            }
            Term::Power(t, _) | Term::Derive(t) => t.collect_indets(out),
            Term::Act(t, m) => {
                t.collect_indets(out);
                out.extend((1..=m.dim()).map(|i| Indet::X(i as u16)));
            }
            Term::Reinterpret(t, spec) => {
                t.collect_indets(out);
                match spec {
                    TermSpec::Base => {}
                    TermSpec::G => {
                        out.insert(Indet::G);
                    }
                    TermSpec::P(p) => p.collect_indets(out),
                }
            }
            Term::Bind(t, bs) => {
                let mut inner = BTreeSet::new();
                t.collect_indets(&mut inner);
                for (v, _) in bs {
                    inner.remove(v);
                }
                out.extend(inner);
                bs.iter().for_each(|(_, b)| b.collect_indets(out));
            }
        }
    }
}

enum Kind<'a> {
    Root(Option<&'a Assignment>),
    Deriv(Series),
    Act(&'a AffineMap),
    Bind(Vec<(Indet, Series)>),
}

struct Ctx<'a> {
    parent: Option<&'a Ctx<'a>>,
    kind: Kind<'a>,
    prec: i64,
    jets: RefCell<HashMap<Indet, Vec<Series>>>,
}

impl<'a> Ctx<'a> {
    fn root(a: Option<&'a Assignment>, prec: i64) -> Self {
        Ctx { parent: None, kind: Kind::Root(a), prec, jets: Default::default() }
    }

    fn child(&'a self, kind: Kind<'a>) -> Ctx<'a> {
        Ctx { parent: Some(self), kind, prec: self.prec, jets: Default::default() }
    }

    fn parent(&self) -> &Ctx<'a> {
        self.parent.expect("non-root context")
    }

    fn base(&self, v: Indet) -> Result<Series> {
        match &self.kind {
            Kind::Root(None) => Ok(Series::new(Vec::new(), self.prec)),
            Kind::Root(Some(a)) => {
                let jets = a.jets_of(v);
                if jets.is_empty() {
                    return Err(Error::Unassigned(v.jet(0)));
                }
                Ok(Series::from_jets(&jets, self.prec))
            }
            Kind::Deriv(_) => self.parent().base(v),
            Kind::Act(m) => match v {
                Indet::X(i) => {
                    let row = &m.h()[i as usize - 1];
                    let mut acc = Series::constant(m.h0()[i as usize - 1].clone(), self.prec);
                    for (j, h) in row.iter().enumerate().filter(|(_, h)| !h.is_zero()) {
                        acc = acc.add(&self.parent().base(Indet::X(j as u16 + 1))?.scale(h));
                    }
                    Ok(acc)
                }
                _ => self.parent().base(v),
            },
            Kind::Bind(bs) => match bs.iter().find(|(w, _)| *w == v) {
                Some((_, s)) => Ok(s.clone()),
                None => self.parent().base(v),
            },
        }
    }

    fn derive(&self, s: &Series) -> Result<Series> {
        match &self.kind {
            Kind::Root(_) => Ok(s.derive()),
            Kind::Deriv(qinv) => Ok(qinv.mul(&self.parent().derive(s)?)),
            Kind::Act(_) | Kind::Bind(_) => self.parent().derive(s),
        }
    }

    fn jet(&self, v: VarKey) -> Result<Series> {
        let own = matches!(self.kind, Kind::Root(_)) || reinterpreted(v.indet);
        if !own {
            return self.parent().jet(v);
        }
        let k = v.order as usize;
        if let Some(s) = self.jets.borrow().get(&v.indet).and_then(|js| js.get(k)) {
            return Ok(s.clone());
        }
        let mut js = self.jets.borrow_mut().remove(&v.indet).unwrap_or_default();
        if js.is_empty() {
            js.push(self.base(v.indet)?);
        }
        while js.len() <= k {
            let next = self.derive(js.last().expect("nonempty"))?;
            js.push(next);
        }
        let out = js[k].clone();
        self.jets.borrow_mut().insert(v.indet, js);
        Ok(out)
    }
}

fn eval_in(t: &Term, ctx: &Ctx<'_>) -> Result<Series> {
    match t {
        Term::Rational(f) => rational_on_series(f, ctx.prec, &mut |v| ctx.jet(v)),
        Term::Sum(ts) => {
            let mut acc = Series::constant(Q::zero(), ctx.prec);
            for t in ts {
                acc = acc.add(&eval_in(t, ctx)?);
            }
            Ok(acc)
        }
        Term::Product(ts) => {
            let mut acc = Series::constant(Q::from_integer(1.into()), ctx.prec);
            for t in ts {
                acc = acc.mul(&eval_in(t, ctx)?);
            }
            Ok(acc)
        }
        Term::Quotient(a, b) => {
            let den = eval_in(b, ctx)?.inv()?;
            Ok(eval_in(a, ctx)?.mul(&den))
        }
        Term::Power(t, e) => eval_in(t, ctx)?.pow(*e),
        Term::Derive(t) => ctx.derive(&eval_in(t, ctx)?),
        Term::Act(t, m) => {
            if let Some(i) = t.indets().iter().filter_map(|v| if let Indet::X(i) = v { Some(*i as usize) } else { None }).max() {
                if i > m.dim() {
                    return Err(Error::DimensionMismatch { expected: m.dim(), found: i });
                }
            }
            eval_in(t, &ctx.child(Kind::Act(m)))
        }
        Term::Reinterpret(t, spec) => {
            let q = match spec {
                TermSpec::Base => return eval_in(t, ctx),
                TermSpec::G => ctx.jet(Indet::G.jet(0))?,
                TermSpec::P(p) => eval_in(p, ctx)?,
            };
            eval_in(t, &ctx.child(Kind::Deriv(q.inv()?)))
        }
        Term::Bind(t, bs) => {
            let values = bs.iter().map(|(v, b)| Ok((*v, eval_in(b, ctx)?))).collect::<Result<Vec<_>>>()?;
            eval_in(t, &ctx.child(Kind::Bind(values)))
        }
    }
}

/// The largest jet order of the assigned indeterminates that evaluating `t`
/// at a point can consume.
pub fn required_order(t: &Term) -> Result<u32> {
    let s = eval_in(t, &Ctx::root(None, 0))?;
    Ok((-s.prec()).max(0) as u32)
}

/// The Taylor series of `t` at the point described by `a`, with `extra`
/// coefficients beyond the constant term.
pub fn series_of_term(t: &Term, a: &Assignment, extra: u32) -> Result<Series> {
    let need = required_order(t)? + extra;
    let s = eval_in(t, &Ctx::root(Some(a), need as i64 + 1))?;
    if s.prec() < extra as i64 + 1 {
        let v = t.indets().into_iter().next().unwrap_or(Indet::X(1));
        return Err(Error::InsufficientOrder(v.jet(need)));
    }
    Ok(s)
}

/// The exact value of `t` at the point `a`.
pub fn evaluate_term(t: &Term, a: &Assignment) -> Result<Q> {
    Ok(series_of_term(t, a, 0)?.coeff(0))
}

fn check_budget(f: DiffRational, budget: usize) -> Result<DiffRational> {
    if f.size() > budget {
        return Err(Error::BudgetExceeded(budget));
    }
    Ok(f)
}

// An upper bound for the number of terms after substituting, for each
// variable, a polynomial of `width(v)` terms (0 for unchanged).
fn substitution_estimate(f: &DiffRational, width: &dyn Fn(VarKey) -> usize) -> usize {
    let mut total = 0usize;
    for (poly, _) in f.factored().1 {
        for (m, _) in poly.terms() {
            let mut count = 1usize;
            for (v, e) in m.iter() {
                let w = width(v).max(1);
                count = count.saturating_mul(w.saturating_pow(e));
            }
            total = total.saturating_add(count);
        }
    }
    total
}

fn act_within(f: &DiffRational, m: &AffineMap, budget: usize) -> Result<DiffRational> {
    let width = |v: VarKey| match v.indet {
        Indet::X(i) => {
            let row = &m.h()[i as usize - 1];
            let nonzero = row.iter().filter(|c| !c.is_zero()).count();
            nonzero + usize::from(v.order == 0 && !m.h0()[i as usize - 1].is_zero())
        }
        _ => 1,
    };
    if f.x_order().is_some() && substitution_estimate(f, &width) > budget {
        return Err(Error::BudgetExceeded(budget));
    }
    act_affine(f, m)
}

// Symbolic reinterpretation with the budget applied to every jet `delta^k v`
// and to the size of the substitution.
fn reinterpret_within(f: &DiffRational, spec: &DerivationSpec, budget: usize) -> Result<DiffRational> {
    let mut widths: HashMap<VarKey, usize> = HashMap::new();
    for (v, k) in f.orders() {
        if !reinterpreted(v) {
            continue;
        }
        let mut jet = DiffRational::var(v.jet(0));
        for j in 1..=k {
            jet = check_budget(delta_apply(&jet, spec), budget)?;
            widths.insert(v.jet(j), jet.size());
        }
    }
    if substitution_estimate(f, &|v| widths.get(&v).copied().unwrap_or(1)) > budget {
        return Err(Error::BudgetExceeded(budget));
    }
    Ok(reinterpret_where(f, spec, &reinterpreted))
}

/// Expand `t` into a single rational function, failing once any
/// intermediate result exceeds `budget` terms.
pub fn materialize(t: &Term, budget: usize) -> Result<DiffRational> {
    let f = match t {
        Term::Rational(f) => f.clone(),
        Term::Sum(ts) => {
            DiffRational::sum(ts.iter().map(|t| materialize(t, budget)).collect::<Result<Vec<_>>>()?)
        }
        Term::Product(ts) => {
            let mut acc = DiffRational::one();
            for t in ts {
                acc = check_budget(acc * materialize(t, budget)?, budget)?;
            }
            acc
        }
        Term::Quotient(a, b) => materialize(a, budget)?.checked_div(&materialize(b, budget)?)?,
        Term::Power(t, e) => {
            let b = materialize(t, budget)?;
            if *e < 0 && b.is_zero() {
                return Err(Error::DivisionByZero);
            }
            b.pow(*e)
        }
        Term::Derive(t) => materialize(t, budget)?.derive(),
        Term::Act(t, m) => act_within(&materialize(t, budget)?, m, budget)?,
        Term::Reinterpret(t, spec) => {
            let inner = materialize(t, budget)?;
            let spec = match spec {
                TermSpec::Base => return Ok(inner),
                TermSpec::G => DerivationSpec::G,
                TermSpec::P(p) => DerivationSpec::p(materialize(p, budget)?)?,
            };
            reinterpret_within(&inner, &spec, budget)?
        }
        Term::Bind(t, bs) => {
            let values =
                bs.iter().map(|(v, b)| Ok((*v, materialize(b, budget)?))).collect::<Result<Vec<_>>>()?;
            materialize(t, budget)?.bind_jets(&values)?
        }
    };
    check_budget(f, budget)
}
