use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::Arc;

use num_traits::{One, Signed, Zero};

use super::poly::sum_polys;
use super::{DiffPolynomial, Indet, Monomial, VarKey, Q};
use crate::error::{Error, Result};

type Factor = (Arc<DiffPolynomial>, i32);

/// An element of the field of differential rational functions.
///
/// Stored as `coeff * prod f_i^{e_i}` with nonzero integer exponents. Every
/// factor is a nonconstant polynomial whose leading coefficient is one and
/// which is either a single variable or has no monomial content, so the
/// expanded denominator always has leading coefficient one. Identical
/// factors are merged, which performs all cancellation that does not need a
/// gcd. Two values are equal as field elements iff [`eq_rational`] holds;
/// the derived `PartialEq` compares representations.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct DiffRational {
    coeff: Q,
    factors: Vec<Factor>,
}

impl Default for DiffRational {
    fn default() -> Self {
        Self::zero()
    }
}

/// Split a polynomial into a constant and monic factors.
fn normalize_poly(p: &DiffPolynomial) -> (Q, Vec<(DiffPolynomial, i32)>) {
    if p.is_zero() {
        return (Q::zero(), Vec::new());
    }
    if let Some(c) = p.constant_value() {
        return (c, Vec::new());
    }
    let mut out = Vec::new();
    let content = p.monomial_content();
    for (v, e) in content.iter() {
        out.push((DiffPolynomial::var(v), e as i32));
    }
    let rest = p.div_monomial(&content);
    let (_, lc) = rest.leading().expect("nonzero");
    let lc = lc.clone();
    if !rest.is_constant() {
        let monic = if lc.is_one() { rest } else { rest.scale(&lc.recip()) };
        out.push((monic, 1));
    }
    (lc, out)
}

impl DiffRational {
    pub fn zero() -> Self {
        DiffRational { coeff: Q::zero(), factors: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(Q::one())
    }

    pub fn constant(c: Q) -> Self {
        DiffRational { coeff: c, factors: Vec::new() }
    }

    pub fn int(n: i64) -> Self {
        Self::constant(Q::from_integer(n.into()))
    }

    pub fn var(v: VarKey) -> Self {
        DiffRational { coeff: Q::one(), factors: vec![(Arc::new(DiffPolynomial::var(v)), 1)] }
    }

    pub fn x(i: usize, order: u32) -> Self {
        Self::var(VarKey::x(i, order))
    }

    pub fn g(order: u32) -> Self {
        Self::var(VarKey::g(order))
    }

    pub fn from_poly(p: &DiffPolynomial) -> Self {
        let (c, fs) = normalize_poly(p);
        if c.is_zero() {
            return Self::zero();
        }
        let mut map = BTreeMap::new();
        for (f, e) in fs {
            *map.entry(Arc::new(f)).or_insert(0) += e;
        }
        Self::build(c, map)
    }

    /// `num / den`; fails when the denominator is the zero polynomial.
    pub fn new(num: &DiffPolynomial, den: &DiffPolynomial) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(&Self::from_poly(num) / &Self::from_poly(den))
    }

    fn build(coeff: Q, map: BTreeMap<Arc<DiffPolynomial>, i32>) -> Self {
        if coeff.is_zero() {
            return Self::zero();
        }
        DiffRational { coeff, factors: map.into_iter().filter(|(_, e)| *e != 0).collect() }
    }

    pub fn is_zero(&self) -> bool {
        self.coeff.is_zero()
    }

    pub fn is_constant(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn constant_value(&self) -> Option<&Q> {
        self.factors.is_empty().then_some(&self.coeff)
    }

    pub fn is_one(&self) -> bool {
        self.factors.is_empty() && self.coeff.is_one()
    }

    /// The leading constant and the factor list.
    pub fn factored(&self) -> (&Q, &[(Arc<DiffPolynomial>, i32)]) {
        (&self.coeff, &self.factors)
    }

    /// True if the value is a polynomial, i.e. has no denominator factors.
    pub fn is_polynomial(&self) -> bool {
        self.factors.iter().all(|(_, e)| *e > 0)
    }

    /// Total number of stored polynomial terms, a size measure.
    pub fn size(&self) -> usize {
        self.factors.iter().map(|(f, _)| f.len()).sum::<usize>() + 1
    }

    pub fn numerator(&self) -> DiffPolynomial {
        let pos: Vec<(Arc<DiffPolynomial>, u32)> =
            self.factors.iter().filter(|f| f.1 > 0).map(|(f, e)| (f.clone(), *e as u32)).collect();
        expand(&self.coeff, &pos, &mut PowCache::default())
    }

    pub fn denominator(&self) -> DiffPolynomial {
        let neg: Vec<(Arc<DiffPolynomial>, u32)> =
            self.factors.iter().filter(|f| f.1 < 0).map(|(f, e)| (f.clone(), (-*e) as u32)).collect();
        expand(&Q::one(), &neg, &mut PowCache::default())
    }

    /// Rebuild from the expanded numerator and denominator.
    pub fn canonical(&self) -> Self {
        Self::new(&self.numerator(), &self.denominator()).expect("denominator is nonzero")
    }

    fn exponent_of(&self, f: &DiffPolynomial) -> i32 {
        self.factors
            .binary_search_by(|(g, _)| g.as_ref().cmp(f))
            .map(|i| self.factors[i].1)
            .unwrap_or(0)
    }

    pub fn mul_rat(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let (a, b) = (&self.factors, &other.factors);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                std::cmp::Ordering::Less => {
                    out.push(a[i].clone());
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(b[j].clone());
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    let e = a[i].1 + b[j].1;
                    if e != 0 {
                        out.push((a[i].0.clone(), e));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend(a[i..].iter().cloned());
        out.extend(b[j..].iter().cloned());
        DiffRational { coeff: &self.coeff * &other.coeff, factors: out }
    }

    pub fn scale(&self, c: &Q) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        DiffRational { coeff: &self.coeff * c, factors: self.factors.clone() }
    }

    pub fn inv(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(DiffRational {
            coeff: self.coeff.recip(),
            factors: self.factors.iter().map(|(f, e)| (f.clone(), -e)).collect(),
        })
    }

    pub fn checked_div(&self, other: &Self) -> Result<Self> {
        Ok(self.mul_rat(&other.inv()?))
    }

    pub fn pow(&self, e: i32) -> Self {
        if e == 0 {
            return Self::one();
        }
        if self.is_zero() {
            assert!(e > 0, "zero raised to a negative power");
            return Self::zero();
        }
        DiffRational {
            coeff: num_traits::pow(if e > 0 { self.coeff.clone() } else { self.coeff.recip() }, e.unsigned_abs() as usize),
            factors: self.factors.iter().map(|(f, k)| (f.clone(), k * e)).collect(),
        }
    }

    pub fn add_rat(&self, other: &Self) -> Self {
        Self::sum([self.clone(), other.clone()])
    }

    pub fn sub_rat(&self, other: &Self) -> Self {
        Self::sum([self.clone(), -other])
    }

    /// Sum over a common denominator built from the largest denominator
    /// power of each factor; numerator factors shared by every summand stay
    /// factored.
    pub fn sum(items: impl IntoIterator<Item = DiffRational>) -> Self {
        let items: Vec<DiffRational> = items.into_iter().filter(|r| !r.is_zero()).collect();
        match items.len() {
            0 => return Self::zero(),
            1 => return items.into_iter().next().unwrap(),
            _ => {}
        }
        let mut common: BTreeMap<Arc<DiffPolynomial>, (i32, usize)> = BTreeMap::new();
        for it in &items {
            for (f, e) in &it.factors {
                let ent = common.entry(f.clone()).or_insert((*e, 0));
                ent.0 = ent.0.min(*e);
                ent.1 += 1;
            }
        }
        let keys: Vec<(Arc<DiffPolynomial>, i32)> = common
            .into_iter()
            .map(|(f, (m, cnt))| (f, if cnt < items.len() { m.min(0) } else { m }))
            .collect();
        let mut cache = PowCache::default();
        let mut parts = Vec::with_capacity(items.len());
        let mut total = DiffPolynomial::zero();
        for it in &items {
            let rel: Vec<(Arc<DiffPolynomial>, u32)> = keys
                .iter()
                .filter_map(|(f, c)| {
                    let e = it.exponent_of(f) - c;
                    (e > 0).then(|| (f.clone(), e as u32))
                })
                .collect();
            parts.push(expand(&it.coeff, &rel, &mut cache));
            if parts.len() >= 64 {
                total = total.add_poly(&sum_polys(std::mem::take(&mut parts)));
            }
        }
        let total = total.add_poly(&sum_polys(parts));
        let shared = DiffRational {
            coeff: Q::one(),
            factors: keys.into_iter().filter(|(_, c)| *c != 0).collect(),
        };
        Self::from_poly(&total).mul_rat(&shared)
    }

    /// The derivation, by the logarithmic-derivative form of the Leibniz
    /// rule: `d(c prod f^e) = c prod f^e * sum e f'/f`.
    pub fn derive(&self) -> Self {
        if self.factors.is_empty() {
            return Self::zero();
        }
        let terms = self.factors.iter().map(|(f, e)| {
            let df = Self::from_poly(&f.derive());
            let inv = DiffRational { coeff: Q::from_integer((*e).into()), factors: vec![(f.clone(), -1)] };
            df.mul_rat(&inv)
        });
        self.mul_rat(&Self::sum(terms))
    }

    /// Evaluate with a value lookup. Denominator factors are checked first so
    /// a vanishing denominator is always reported.
    pub fn evaluate_with(&self, value: &mut dyn FnMut(VarKey) -> Result<Q>) -> Result<Q> {
        if self.is_zero() {
            return Ok(Q::zero());
        }
        let mut cache: HashMap<VarKey, Q> = HashMap::new();
        let mut lookup = |v: VarKey| -> Result<Q> {
            if let Some(x) = cache.get(&v) {
                return Ok(x.clone());
            }
            let x = value(v)?;
            cache.insert(v, x.clone());
            Ok(x)
        };
        let mut den = Q::one();
        for (f, e) in self.factors.iter().filter(|f| f.1 < 0) {
            let val = f.evaluate_with(&mut lookup)?;
            if val.is_zero() {
                return Err(Error::ZeroDenominator);
            }
            den *= num_traits::pow(val, (-*e) as usize);
        }
        let mut num = self.coeff.clone();
        for (f, e) in self.factors.iter().filter(|f| f.1 > 0) {
            let val = f.evaluate_with(&mut lookup)?;
            num *= num_traits::pow(val, *e as usize);
        }
        Ok(num / den)
    }

    /// Substitute rational functions for some variables (`None` keeps the
    /// variable). Fails if a denominator factor becomes zero.
    pub fn substitute(&self, image: &dyn Fn(VarKey) -> Option<DiffRational>) -> Result<Self> {
        let mut images: HashMap<VarKey, Option<DiffRational>> = HashMap::new();
        let mut result = Self::constant(self.coeff.clone());
        for (f, e) in &self.factors {
            let mut terms = Vec::with_capacity(f.len());
            let mut powers: HashMap<(VarKey, u32), DiffRational> = HashMap::new();
            for (m, c) in f.terms() {
                let mut kept = Monomial::one();
                let mut t = Self::constant(c.clone());
                for (v, k) in m.iter() {
                    let img = images.entry(v).or_insert_with(|| image(v));
                    match img {
                        None => kept = kept.mul(&Monomial::power(v, k)),
                        Some(r) => {
                            let pw = powers.entry((v, k)).or_insert_with(|| r.pow(k as i32));
                            t = t.mul_rat(pw);
                        }
                    }
                }
                if !kept.is_one() {
                    t = t.mul_rat(&Self::from_poly(&DiffPolynomial::term(kept, Q::one())));
                }
                terms.push(t);
            }
            let s = Self::sum(terms);
            if *e < 0 && s.is_zero() {
                return Err(Error::DivisionByZero);
            }
            result = result.mul_rat(&s.pow(*e));
        }
        Ok(result)
    }

    /// Substitute polynomials for some variables, factor by factor.
    pub fn substitute_poly(&self, image: &dyn Fn(VarKey) -> Option<DiffPolynomial>) -> Result<Self> {
        let mut result = Self::constant(self.coeff.clone());
        for (f, e) in &self.factors {
            let s = Self::from_poly(&f.substitute_poly(image));
            if *e < 0 && s.is_zero() {
                return Err(Error::DivisionByZero);
            }
            result = result.mul_rat(&s.pow(*e));
        }
        Ok(result)
    }

    /// Replace each bound indeterminate `v` by a value `f`, sending the jet
    /// `d^k v` to the `k`-th derivative of `f`.
    pub fn bind_jets(&self, bindings: &[(Indet, DiffRational)]) -> Result<Self> {
        let orders = self.orders();
        let mut jets: HashMap<Indet, Vec<DiffRational>> = HashMap::new();
        for (v, f) in bindings {
            let Some(&k) = orders.get(v) else { continue };
            let mut js = vec![f.clone()];
            for j in 0..k as usize {
                js.push(js[j].derive());
            }
            jets.insert(*v, js);
        }
        if jets.is_empty() {
            return Ok(self.clone());
        }
        self.substitute(&|v: VarKey| jets.get(&v.indet).map(|js| js[v.order as usize].clone()))
    }

    /// Highest derivative order of each indeterminate present.
    pub fn orders(&self) -> BTreeMap<Indet, u32> {
        let mut out = BTreeMap::new();
        for (f, _) in &self.factors {
            for (i, k) in f.orders() {
                let e = out.entry(i).or_insert(k);
                *e = (*e).max(k);
            }
        }
        out
    }

    /// The maximal `k` such that `d^k x_i` occurs, or `None` if `x_i` is
    /// absent.
    pub fn order_in(&self, i: usize) -> Option<u32> {
        self.orders().get(&Indet::X(i as u16)).copied()
    }

    /// Largest order over all `x` coordinates.
    pub fn x_order(&self) -> Option<u32> {
        self.orders().into_iter().filter(|(i, _)| i.is_x()).map(|(_, k)| k).max()
    }

    pub fn variables(&self) -> Vec<VarKey> {
        let mut vs: Vec<VarKey> = self.factors.iter().flat_map(|(f, _)| f.variables()).collect();
        vs.sort();
        vs.dedup();
        vs
    }
}

/// Memoized powers of factor polynomials, keyed by allocation.
#[derive(Default)]
struct PowCache(HashMap<(usize, u32), DiffPolynomial>);

impl PowCache {
    fn get(&mut self, f: &Arc<DiffPolynomial>, e: u32) -> DiffPolynomial {
        let key = (Arc::as_ptr(f) as usize, e);
        self.0.entry(key).or_insert_with(|| f.pow(e)).clone()
    }
}

fn expand(coeff: &Q, factors: &[(Arc<DiffPolynomial>, u32)], cache: &mut PowCache) -> DiffPolynomial {
    let mut mono = Monomial::one();
    let mut polys: Vec<DiffPolynomial> = Vec::new();
    for (f, e) in factors {
        match f.as_monomial() {
            Some(m) => mono = mono.mul(&m.pow(*e)),
            None => polys.push(cache.get(f, *e)),
        }
    }
    polys.sort_by_key(|p| p.len());
    let mut acc = DiffPolynomial::term(mono, coeff.clone());
    for p in &polys {
        acc = acc.mul_poly(p);
    }
    acc
}

/// Field equality by cross-multiplication over the common denominator.
pub fn eq_rational(a: &DiffRational, b: &DiffRational) -> bool {
    a == b || a.sub_rat(b).is_zero()
}

impl fmt::Display for DiffRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let num = self.numerator();
        let den = self.denominator();
        let wrap_num = |p: &DiffPolynomial| {
            if p.len() > 1 || p.terms().first().is_some_and(|(m, c)| !m.is_one() && c.is_negative()) {
                format!("({p})")
            } else {
                p.to_string()
            }
        };
        // a single-term denominator is printed bare only when it is one power
        let wrap_den = |p: &DiffPolynomial| match p.terms() {
            [(m, c)] if c.is_one() && m.len() <= 1 => p.to_string(),
            _ => format!("({p})"),
        };
        if den.constant_value().is_some_and(|c| c.is_one()) {
            write!(f, "{num}")
        } else {
            write!(f, "{}/{}", wrap_num(&num), wrap_den(&den))
        }
    }
}

impl From<DiffPolynomial> for DiffRational {
    fn from(p: DiffPolynomial) -> Self {
        DiffRational::from_poly(&p)
    }
}

impl From<&DiffPolynomial> for DiffRational {
    fn from(p: &DiffPolynomial) -> Self {
        DiffRational::from_poly(p)
    }
}

impl From<Q> for DiffRational {
    fn from(c: Q) -> Self {
        DiffRational::constant(c)
    }
}

impl From<VarKey> for DiffRational {
    fn from(v: VarKey) -> Self {
        DiffRational::var(v)
    }
}

fn div_or_panic(a: &DiffRational, b: &DiffRational) -> DiffRational {
    a.checked_div(b).expect("division by the zero rational function")
}

macro_rules! rat_binop {
    ($tr:ident, $m:ident, $f:path) => {
        impl $tr<&DiffRational> for &DiffRational {
            type Output = DiffRational;
            fn $m(self, rhs: &DiffRational) -> DiffRational {
                $f(self, rhs)
            }
        }
        impl $tr<DiffRational> for DiffRational {
            type Output = DiffRational;
            fn $m(self, rhs: DiffRational) -> DiffRational {
                $f(&self, &rhs)
            }
        }
        impl $tr<&DiffRational> for DiffRational {
            type Output = DiffRational;
            fn $m(self, rhs: &DiffRational) -> DiffRational {
                $f(&self, rhs)
            }
        }
        impl $tr<DiffRational> for &DiffRational {
            type Output = DiffRational;
            fn $m(self, rhs: DiffRational) -> DiffRational {
                $f(self, &rhs)
            }
        }
    };
}

rat_binop!(Add, add, DiffRational::add_rat);
rat_binop!(Sub, sub, DiffRational::sub_rat);
rat_binop!(Mul, mul, DiffRational::mul_rat);
rat_binop!(Div, div, div_or_panic);

impl Neg for &DiffRational {
    type Output = DiffRational;
    fn neg(self) -> DiffRational {
        DiffRational { coeff: -&self.coeff, factors: self.factors.clone() }
    }
}

impl Neg for DiffRational {
    type Output = DiffRational;
    fn neg(self) -> DiffRational {
        -&self
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{q, qi};

    fn x(i: usize, k: u32) -> DiffRational {
        DiffRational::x(i, k)
    }

    #[test]
    fn quotient_rule() {
        let f = &x(1, 0) / &x(2, 0);
        let expected = &(&(&x(1, 1) * &x(2, 0)) - &(&x(1, 0) * &x(2, 1))) / &x(2, 0).pow(2);
        assert!(eq_rational(&f.derive(), &expected));
        assert!(DiffRational::constant(q(5, 2)).derive().is_zero());
        assert!((&x(1, 1) / &x(1, 1)).derive().is_zero());
    }

    #[test]
    fn equality_by_cross_multiplication() {
        let a = &x(1, 1) / &x(1, 0);
        let b = &(&x(1, 1) * &x(2, 0)) / &(&x(1, 0) * &x(2, 0));
        assert!(eq_rational(&a, &b));
        assert!(!eq_rational(&(&x(1, 0) / &x(2, 0)), &(&x(2, 0) / &x(1, 0))));
    }

    #[test]
    fn denominator_is_monic() {
        let den = DiffPolynomial::x(1, 0).scale(&qi(-3)) + DiffPolynomial::constant(q(1, 2));
        let r = DiffRational::new(&DiffPolynomial::x(2, 0), &den).unwrap();
        let d = r.denominator();
        assert!(d.leading().unwrap().1.is_one());
        assert!(eq_rational(&r, &DiffRational::new(&DiffPolynomial::x(2, 0), &den).unwrap()));
        assert!(DiffRational::new(&DiffPolynomial::one(), &DiffPolynomial::zero()).is_err());
    }

    #[test]
    fn order_in_examples() {
        let f = &(&x(1, 0) * &x(2, 3)) + &x(1, 1);
        assert_eq!(f.order_in(2), Some(3));
        assert_eq!(x(1, 0).order_in(2), None);
        let g = (&x(1, 2) / &x(2, 0)).derive();
        assert_eq!(g.order_in(1), Some(3));
    }

    #[test]
    fn evaluation_reports_zero_denominator() {
        let f = &x(1, 1) / &DiffRational::g(0);
        let mut vals = |v: VarKey| Ok(if v.indet == Indet::G { qi(0) } else { qi(3) });
        assert_eq!(f.evaluate_with(&mut vals), Err(Error::ZeroDenominator));
    }
}
