use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};

use super::{fmt_q, Indet, Monomial, VarKey, Q};
use crate::error::{Error, Result};

/// An element of the differential polynomial ring over the rationals.
///
/// Terms are kept sorted ascending in the monomial order with no zero
/// coefficients; the zero polynomial has no terms.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct DiffPolynomial {
    terms: Vec<(Monomial, Q)>,
}

impl DiffPolynomial {
    pub fn zero() -> Self {
        DiffPolynomial { terms: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(Q::one())
    }

    pub fn constant(c: Q) -> Self {
        Self::term(Monomial::one(), c)
    }

    pub fn var(v: VarKey) -> Self {
        Self::term(Monomial::var(v), Q::one())
    }

    pub fn x(i: usize, order: u32) -> Self {
        Self::var(VarKey::x(i, order))
    }

    pub fn term(m: Monomial, c: Q) -> Self {
        if c.is_zero() {
            Self::zero()
        } else {
            DiffPolynomial { terms: vec![(m, c)] }
        }
    }

    /// Collect arbitrary terms, combining like monomials.
    pub fn from_terms(terms: impl IntoIterator<Item = (Monomial, Q)>) -> Self {
        let mut acc: HashMap<Monomial, Q> = HashMap::new();
        for (m, c) in terms {
            accumulate(&mut acc, m, c);
        }
        Self::from_map(acc)
    }

    fn from_map(acc: HashMap<Monomial, Q>) -> Self {
        let mut terms: Vec<(Monomial, Q)> = acc.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        terms.sort_unstable_by(|a, b| a.0.cmp(&b.0));
        DiffPolynomial { terms }
    }

    /// Terms in ascending monomial order.
    pub fn terms(&self) -> &[(Monomial, Q)] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.iter().all(|(m, _)| m.is_one())
    }

    /// The value if this polynomial is a constant.
    pub fn constant_value(&self) -> Option<Q> {
        match self.terms.as_slice() {
            [] => Some(Q::zero()),
            [(m, c)] if m.is_one() => Some(c.clone()),
            _ => None,
        }
    }

    /// The greatest term.
    pub fn leading(&self) -> Option<(&Monomial, &Q)> {
        self.terms.last().map(|(m, c)| (m, c))
    }

    pub fn degree(&self) -> u32 {
        self.terms.iter().map(|(m, _)| m.degree()).max().unwrap_or(0)
    }

    /// If the polynomial is a single monomial with coefficient one.
    pub fn as_monomial(&self) -> Option<&Monomial> {
        match self.terms.as_slice() {
            [(m, c)] if c.is_one() => Some(m),
            _ => None,
        }
    }

    pub fn scale(&self, c: &Q) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        DiffPolynomial { terms: self.terms.iter().map(|(m, k)| (m.clone(), k * c)).collect() }
    }

    /// Multiply by `c * m`; ordering is preserved because the monomial order
    /// is multiplicative.
    pub fn mul_term(&self, m: &Monomial, c: &Q) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        DiffPolynomial { terms: self.terms.iter().map(|(n, k)| (n.mul(m), k * c)).collect() }
    }

    pub fn add_poly(&self, other: &Self) -> Self {
        self.merge(other, false)
    }

    pub fn sub_poly(&self, other: &Self) -> Self {
        self.merge(other, true)
    }

    fn merge(&self, other: &Self, negate: bool) -> Self {
        let (a, b) = (&self.terms, &other.terms);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                std::cmp::Ordering::Less => {
                    out.push(a[i].clone());
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    let c = if negate { -&b[j].1 } else { b[j].1.clone() };
                    out.push((b[j].0.clone(), c));
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    let c = if negate { &a[i].1 - &b[j].1 } else { &a[i].1 + &b[j].1 };
                    if !c.is_zero() {
                        out.push((a[i].0.clone(), c));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend(a[i..].iter().cloned());
        out.extend(b[j..].iter().map(|(m, c)| (m.clone(), if negate { -c } else { c.clone() })));
        DiffPolynomial { terms: out }
    }

    pub fn mul_poly(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        if self.terms.len() == 1 {
            let (m, c) = &self.terms[0];
            return other.mul_term(m, c);
        }
        if other.terms.len() == 1 {
            let (m, c) = &other.terms[0];
            return self.mul_term(m, c);
        }
        let mut acc: HashMap<Monomial, Q> = HashMap::with_capacity(self.len() * other.len());
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                accumulate(&mut acc, ma.mul(mb), ca * cb);
            }
        }
        Self::from_map(acc)
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut result = Self::one();
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul_poly(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul_poly(&base);
            }
        }
        result
    }

    /// Apply the derivation: `d(d^k v) = d^{k+1} v`, constants go to zero,
    /// extended by additivity and the Leibniz rule.
    pub fn derive(&self) -> Self {
        let mut acc: HashMap<Monomial, Q> = HashMap::new();
        for (m, c) in &self.terms {
            for (v, e) in m.iter() {
                let rest = m.without_one(v);
                let mono = rest.mul(&Monomial::var(v.derived()));
                accumulate(&mut acc, mono, c * Q::from_integer(e.into()));
            }
        }
        Self::from_map(acc)
    }

    /// Greatest monomial dividing every term.
    pub fn monomial_content(&self) -> Monomial {
        let mut it = self.terms.iter();
        let Some((first, _)) = it.next() else {
            return Monomial::one();
        };
        let mut g = first.clone();
        for (m, _) in it {
            if g.is_one() {
                break;
            }
            g = g.gcd(m);
        }
        g
    }

    /// Divide every term by a monomial known to divide it.
    pub fn div_monomial(&self, m: &Monomial) -> Self {
        if m.is_one() {
            return self.clone();
        }
        DiffPolynomial {
            terms: self
                .terms
                .iter()
                .map(|(n, c)| (n.div(m).expect("monomial divides every term"), c.clone()))
                .collect(),
        }
    }

    /// Exact quotient `self / d`, or `None` if `d` does not divide `self`.
    pub fn div_exact(&self, d: &Self) -> Option<Self> {
        let (lm, lc) = d.leading()?;
        let mut rem = self.clone();
        let mut quot: Vec<(Monomial, Q)> = Vec::new();
        while let Some((rm, rc)) = rem.leading() {
            let m = rm.div(lm)?;
            let c = rc / lc;
            rem = rem.sub_poly(&d.mul_term(&m, &c));
            quot.push((m, c));
        }
        quot.reverse();
        Some(DiffPolynomial { terms: quot })
    }

    /// Evaluate with a value lookup for each variable.
    pub fn evaluate_with(&self, value: &mut dyn FnMut(VarKey) -> Result<Q>) -> Result<Q> {
        let mut cache: HashMap<VarKey, Q> = HashMap::new();
        let mut total = Q::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (v, e) in m.iter() {
                let val = match cache.get(&v) {
                    Some(x) => x.clone(),
                    None => {
                        let x = value(v)?;
                        cache.insert(v, x.clone());
                        x
                    }
                };
                if val.is_zero() {
                    t = Q::zero();
                    break;
                }
                t *= num_traits::pow(val, e as usize);
            }
            total += t;
        }
        Ok(total)
    }

    /// Substitute polynomials for some variables; `None` keeps the variable.
    pub fn substitute_poly(&self, image: &dyn Fn(VarKey) -> Option<DiffPolynomial>) -> Self {
        let mut images: HashMap<VarKey, Option<DiffPolynomial>> = HashMap::new();
        let mut powers: HashMap<(VarKey, u32), DiffPolynomial> = HashMap::new();
        let mut total = Self::zero();
        let mut parts: Vec<DiffPolynomial> = Vec::new();
        for (m, c) in &self.terms {
            let mut kept = Monomial::one();
            let mut prod = DiffPolynomial::constant(c.clone());
            for (v, e) in m.iter() {
                let img = images.entry(v).or_insert_with(|| image(v));
                match img {
                    None => kept = kept.mul(&Monomial::power(v, e)),
                    Some(p) => {
                        let pw = powers.entry((v, e)).or_insert_with(|| p.pow(e)).clone();
                        prod = prod.mul_poly(&pw);
                    }
                }
            }
            parts.push(prod.mul_term(&kept, &Q::one()));
            if parts.len() >= 64 {
                total = total.add_poly(&sum_polys(std::mem::take(&mut parts)));
            }
        }
        total.add_poly(&sum_polys(parts))
    }

    /// Highest derivative order of each indeterminate present.
    pub fn orders(&self) -> BTreeMap<Indet, u32> {
        let mut out = BTreeMap::new();
        for (m, _) in &self.terms {
            for (v, _) in m.iter() {
                let e = out.entry(v.indet).or_insert(v.order);
                *e = (*e).max(v.order);
            }
        }
        out
    }

    pub fn variables(&self) -> Vec<VarKey> {
        let mut vs: Vec<VarKey> = self.terms.iter().flat_map(|(m, _)| m.iter().map(|p| p.0)).collect();
        vs.sort();
        vs.dedup();
        vs
    }
}

/// Sum a batch of polynomials with one hash accumulation.
pub(crate) fn sum_polys(parts: Vec<DiffPolynomial>) -> DiffPolynomial {
    match parts.len() {
        0 => DiffPolynomial::zero(),
        1 => parts.into_iter().next().unwrap(),
        2 => parts[0].add_poly(&parts[1]),
        _ => {
            let mut acc: HashMap<Monomial, Q> = HashMap::new();
            for p in parts {
                for (m, c) in p.terms {
                    accumulate(&mut acc, m, c);
                }
            }
            DiffPolynomial::from_map(acc)
        }
    }
}

fn accumulate(acc: &mut HashMap<Monomial, Q>, m: Monomial, c: Q) {
    match acc.entry(m) {
        std::collections::hash_map::Entry::Occupied(mut o) => {
            *o.get_mut() += c;
        }
        std::collections::hash_map::Entry::Vacant(v) => {
            v.insert(c);
        }
    }
}

impl fmt::Display for DiffPolynomial {
    /// Terms in ascending monomial order, coefficients as reduced fractions.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (k, (m, c)) in self.terms.iter().enumerate() {
            let neg = c < &Q::zero();
            let abs = if neg { -c } else { c.clone() };
            if k == 0 {
                if neg {
                    f.write_str("-")?;
                }
            } else {
                f.write_str(if neg { " - " } else { " + " })?;
            }
            if m.is_one() {
                f.write_str(&fmt_q(&abs))?;
            } else if abs.is_one() {
                write!(f, "{m}")?;
            } else {
                write!(f, "{}*{m}", fmt_q(&abs))?;
            }
        }
        Ok(())
    }
}

impl From<VarKey> for DiffPolynomial {
    fn from(v: VarKey) -> Self {
        DiffPolynomial::var(v)
    }
}

impl From<Q> for DiffPolynomial {
    fn from(c: Q) -> Self {
        DiffPolynomial::constant(c)
    }
}

macro_rules! poly_binop {
    ($tr:ident, $m:ident, $f:ident) => {
        impl $tr<&DiffPolynomial> for &DiffPolynomial {
            type Output = DiffPolynomial;
            fn $m(self, rhs: &DiffPolynomial) -> DiffPolynomial {
                self.$f(rhs)
            }
        }
        impl $tr<DiffPolynomial> for DiffPolynomial {
            type Output = DiffPolynomial;
            fn $m(self, rhs: DiffPolynomial) -> DiffPolynomial {
                self.$f(&rhs)
            }
        }
        impl $tr<&DiffPolynomial> for DiffPolynomial {
            type Output = DiffPolynomial;
            fn $m(self, rhs: &DiffPolynomial) -> DiffPolynomial {
                self.$f(rhs)
            }
        }
    };
}

poly_binop!(Add, add, add_poly);
poly_binop!(Sub, sub, sub_poly);
poly_binop!(Mul, mul, mul_poly);

impl Neg for &DiffPolynomial {
    type Output = DiffPolynomial;
    fn neg(self) -> DiffPolynomial {
        self.scale(&-Q::one())
    }
}

impl Neg for DiffPolynomial {
    type Output = DiffPolynomial;
    fn neg(self) -> DiffPolynomial {
        -&self
    }
}

impl DiffPolynomial {
    /// Evaluate against a plain map; missing variables are an error.
    pub fn evaluate(&self, values: &HashMap<VarKey, Q>) -> Result<Q> {
        self.evaluate_with(&mut |v| values.get(&v).cloned().ok_or(Error::Unassigned(v)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{q, qi};

    fn x(i: usize, k: u32) -> DiffPolynomial {
        DiffPolynomial::x(i, k)
    }

    #[test]
    fn ring_examples() {
        assert!((&x(1, 0) - &x(1, 0)).is_zero());
        let lhs = (&x(1, 0) + &x(1, 1)) * (&x(1, 0) - &x(1, 1));
        let rhs = &x(1, 0).pow(2) - &x(1, 1).pow(2);
        assert_eq!(lhs, rhs);
        assert_eq!(x(2, 1).pow(3).to_string(), "D(x2)^3");
    }

    #[test]
    fn derivation_examples() {
        assert_eq!(x(1, 0).pow(2).derive(), (&x(1, 0) * &x(1, 1)).scale(&qi(2)));
        let p = &x(1, 0) * &x(2, 1);
        assert_eq!(p.derive(), &(&x(1, 1) * &x(2, 1)) + &(&x(1, 0) * &x(2, 2)));
        assert!(DiffPolynomial::constant(q(7, 3)).derive().is_zero());
    }

    #[test]
    fn exact_division() {
        let a = &x(1, 0) + &x(2, 1);
        let b = &x(1, 2) - &DiffPolynomial::constant(q(1, 2));
        let prod = &a * &b;
        assert_eq!(prod.div_exact(&a), Some(b.clone()));
        assert_eq!(prod.div_exact(&b), Some(a.clone()));
        assert_eq!((&prod + &DiffPolynomial::one()).div_exact(&a), None);
    }

    #[test]
    fn printing_is_ascending() {
        let p = &(&x(1, 2) * &x(2, 0)) + &DiffPolynomial::constant(q(3, 4));
        assert_eq!(p.to_string(), "3/4 + x2*D(x1,2)");
    }
}
