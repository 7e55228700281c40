use std::cmp::Ordering;
use std::fmt;

use smallvec::SmallVec;

use super::VarKey;

/// A power product of jet variables, stored sorted by variable with
/// positive exponents.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct Monomial(SmallVec<[(VarKey, u32); 4]>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(SmallVec::new())
    }

    pub fn var(v: VarKey) -> Self {
        Monomial::power(v, 1)
    }

    pub fn power(v: VarKey, e: u32) -> Self {
        let mut m = SmallVec::new();
        if e > 0 {
            m.push((v, e));
        }
        Monomial(m)
    }

    /// Build from arbitrary `(var, exponent)` pairs, merging repeats.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (VarKey, u32)>) -> Self {
        let mut v: SmallVec<[(VarKey, u32); 4]> = pairs.into_iter().filter(|p| p.1 > 0).collect();
        v.sort_by_key(|p| p.0);
        let mut out: SmallVec<[(VarKey, u32); 4]> = SmallVec::with_capacity(v.len());
        for (k, e) in v {
            match out.last_mut() {
                Some(last) if last.0 == k => last.1 += e,
                _ => out.push((k, e)),
            }
        }
        Monomial(out)
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|p| p.1).sum()
    }

    pub fn exponent(&self, v: VarKey) -> u32 {
        self.0
            .binary_search_by_key(&v, |p| p.0)
            .map(|i| self.0[i].1)
            .unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (VarKey, u32)> + '_ {
        self.0.iter().copied()
    }

    /// The single variable if this monomial is `v^1`.
    pub fn as_var(&self) -> Option<VarKey> {
        match self.0.as_slice() {
            [(v, 1)] => Some(*v),
            _ => None,
        }
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        if self.is_one() {
            return other.clone();
        }
        if other.is_one() {
            return self.clone();
        }
        let (a, b) = (&self.0, &other.0);
        let mut out = SmallVec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(b[j]);
                    j += 1;
                }
                Ordering::Equal => {
                    out.push((a[i].0, a[i].1 + b[j].1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Monomial(out)
    }

    pub fn pow(&self, e: u32) -> Monomial {
        if e == 0 {
            return Monomial::one();
        }
        Monomial(self.0.iter().map(|&(v, k)| (v, k * e)).collect())
    }

    /// Exact quotient, if `other` divides `self`.
    pub fn div(&self, other: &Monomial) -> Option<Monomial> {
        let mut out = self.0.clone();
        for &(v, e) in other.0.iter() {
            let i = out.binary_search_by_key(&v, |p| p.0).ok()?;
            if out[i].1 < e {
                return None;
            }
            out[i].1 -= e;
        }
        out.retain(|p| p.1 > 0);
        Some(Monomial(out))
    }

    /// Componentwise minimum of exponents.
    pub fn gcd(&self, other: &Monomial) -> Monomial {
        Monomial(
            self.0
                .iter()
                .filter_map(|&(v, e)| {
                    let f = other.exponent(v);
                    (f > 0).then(|| (v, e.min(f)))
                })
                .collect(),
        )
    }

    /// Remove one power of `v`, returning the cofactor.
    pub(crate) fn without_one(&self, v: VarKey) -> Monomial {
        let mut out = self.0.clone();
        if let Ok(i) = out.binary_search_by_key(&v, |p| p.0) {
            if out[i].1 == 1 {
                out.remove(i);
            } else {
                out[i].1 -= 1;
            }
        }
        Monomial(out)
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        let (a, b) = (&self.0, &other.0);
        let (mut i, mut j) = (a.len(), b.len());
        loop {
            match (i, j) {
                (0, 0) => return Ordering::Equal,
                (0, _) => return Ordering::Less,
                (_, 0) => return Ordering::Greater,
                _ => {
                    let (va, ea) = a[i - 1];
                    let (vb, eb) = b[j - 1];
                    if va != vb {
                        return va.cmp(&vb);
                    }
                    if ea != eb {
                        return ea.cmp(&eb);
                    }
                    i -= 1;
                    j -= 1;
                }
            }
        }
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Monomial {
    /// Factors are printed base variables first: by derivative order, then
    /// by indeterminate.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_one() {
            return f.write_str("1");
        }
        let mut vars: SmallVec<[(VarKey, u32); 4]> = self.0.clone();
        vars.sort_by_key(|(v, _)| (v.order, v.indet));
        for (k, (v, e)) in vars.iter().enumerate() {
            if k > 0 {
                f.write_str("*")?;
            }
            if *e == 1 {
                write!(f, "{v}")?;
            } else {
                write!(f, "{v}^{e}")?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Indet;

    fn x(i: usize, k: u32) -> Monomial {
        Monomial::var(VarKey::x(i, k))
    }

    #[test]
    fn order_is_multiplicative() {
        let u = x(2, 0);
        let v = x(1, 0).mul(&x(3, 0));
        let w = x(1, 0);
        assert_eq!(u.cmp(&v), u.mul(&w).cmp(&v.mul(&w)));
        assert!(Monomial::one() < u);
    }

    #[test]
    fn div_and_gcd() {
        let a = Monomial::from_pairs([(VarKey::x(1, 0), 2), (VarKey::g(0), 1)]);
        let b = Monomial::from_pairs([(VarKey::x(1, 0), 1)]);
        assert_eq!(a.div(&b), Some(Monomial::from_pairs([(VarKey::x(1, 0), 1), (VarKey::g(0), 1)])));
        assert_eq!(b.div(&a), None);
        assert_eq!(a.gcd(&b), b);
        assert_eq!(Monomial::var(VarKey::new(Indet::G, 2)).to_string(), "D(g,2)");
    }
}
