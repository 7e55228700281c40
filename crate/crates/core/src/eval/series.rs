use num_traits::{One, Zero};

use crate::algebra::{DiffPolynomial, DiffRational, VarKey, Q};
use crate::error::{Error, Result};

/// A truncated power series `sum c_k t^k`, known modulo `t^prec`.
///
/// `prec` may be zero or negative; such a series carries no coefficients but
/// still records how much precision was lost, which lets a cheap dry run
/// measure the truncation order an evaluation needs.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Series {
    coeffs: Vec<Q>,
    prec: i64,
}

impl Series {
    pub fn new(mut coeffs: Vec<Q>, prec: i64) -> Self {
        coeffs.truncate(prec.max(0) as usize);
        Series { coeffs, prec }
    }

    pub fn constant(c: Q, prec: i64) -> Self {
        Series::new(vec![c], prec)
    }

    /// The series with the given derivatives at the origin.
    pub fn from_jets(jets: &[Q], prec: i64) -> Self {
        let mut fact = Q::one();
        let coeffs = jets
            .iter()
            .enumerate()
            .map(|(k, v)| {
                if k > 0 {
                    fact *= Q::from_integer(k.into());
                }
                v / &fact
            })
            .collect();
        Series::new(coeffs, prec.min(jets.len() as i64))
    }

    pub fn prec(&self) -> i64 {
        self.prec
    }

    pub fn coeff(&self, k: usize) -> Q {
        self.coeffs.get(k).cloned().unwrap_or_else(Q::zero)
    }

    /// The value at the origin, if known.
    pub fn value(&self) -> Option<Q> {
        (self.prec >= 1).then(|| self.coeff(0))
    }

    /// The `k`-th derivative at the origin, if known.
    pub fn jet(&self, k: usize) -> Option<Q> {
        ((k as i64) < self.prec).then(|| self.coeff(k) * factorial(k))
    }

    pub fn add(&self, other: &Series) -> Series {
        let prec = self.prec.min(other.prec);
        let len = prec.max(0) as usize;
        let coeffs = (0..len.min(self.coeffs.len().max(other.coeffs.len())))
            .map(|k| self.coeff(k) + other.coeff(k))
            .collect();
        Series::new(coeffs, prec)
    }

    pub fn neg(&self) -> Series {
        Series { coeffs: self.coeffs.iter().map(|c| -c).collect(), prec: self.prec }
    }

    pub fn scale(&self, c: &Q) -> Series {
        Series { coeffs: self.coeffs.iter().map(|x| x * c).collect(), prec: self.prec }
    }

    pub fn mul(&self, other: &Series) -> Series {
        let prec = self.prec.min(other.prec);
        let len = (prec.max(0) as usize).min((self.coeffs.len() + other.coeffs.len()).saturating_sub(1));
        let mut coeffs = vec![Q::zero(); len];
        for (i, a) in self.coeffs.iter().enumerate().filter(|(_, a)| !a.is_zero()) {
            for (j, b) in other.coeffs.iter().enumerate().take(len.saturating_sub(i)) {
                coeffs[i + j] += a * b;
            }
        }
        Series::new(coeffs, prec)
    }

    /// Multiplicative inverse. A known zero constant term is a vanishing
    /// denominator.
    pub fn inv(&self) -> Result<Series> {
        if self.prec <= 0 {
            return Ok(Series::new(Vec::new(), self.prec));
        }
        let c0 = self.coeff(0);
        if c0.is_zero() {
            return Err(Error::ZeroDenominator);
        }
        let len = self.prec as usize;
        let inv0 = c0.recip();
        let mut out: Vec<Q> = Vec::with_capacity(len);
        out.push(inv0.clone());
        for k in 1..len {
            let mut s = Q::zero();
            for j in 1..=k.min(self.coeffs.len().saturating_sub(1)) {
                s += &self.coeffs[j] * &out[k - j];
            }
            out.push(-s * &inv0);
        }
        Ok(Series::new(out, self.prec))
    }

    pub fn pow(&self, e: i32) -> Result<Series> {
        let base = if e < 0 { self.inv()? } else { self.clone() };
        let mut acc = Series::constant(Q::one(), base.prec);
        for _ in 0..e.unsigned_abs() {
            acc = acc.mul(&base);
        }
        Ok(acc)
    }

    pub fn derive(&self) -> Series {
        let coeffs = self.coeffs.iter().enumerate().skip(1).map(|(k, c)| c * Q::from_integer(k.into())).collect();
        Series::new(coeffs, self.prec - 1)
    }
}

pub(crate) fn factorial(k: usize) -> Q {
    (1..=k).fold(Q::one(), |acc, j| acc * Q::from_integer(j.into()))
}

/// Evaluate a polynomial on series values of its variables.
pub fn poly_on_series(
    p: &DiffPolynomial,
    prec: i64,
    jet: &mut dyn FnMut(VarKey) -> Result<Series>,
) -> Result<Series> {
    let mut powers: std::collections::HashMap<(VarKey, u32), Series> = Default::default();
    let mut acc = Series::constant(Q::zero(), prec);
    for (m, c) in p.terms() {
        let mut t = Series::constant(c.clone(), prec);
        for (v, e) in m.iter() {
            let s = match powers.entry((v, e)) {
                std::collections::hash_map::Entry::Occupied(o) => o.into_mut(),
                std::collections::hash_map::Entry::Vacant(slot) => slot.insert(jet(v)?.pow(e as i32)?),
            };
            t = t.mul(s);
        }
        acc = acc.add(&t);
    }
    Ok(acc)
}

/// Evaluate a rational function on series values. Denominators are
/// evaluated before numerators.
pub fn rational_on_series(
    f: &DiffRational,
    prec: i64,
    jet: &mut dyn FnMut(VarKey) -> Result<Series>,
) -> Result<Series> {
    let (c, factors) = f.factored();
    let mut acc = Series::constant(c.clone(), prec);
    if c.is_zero() {
        return Ok(acc);
    }
    for (p, e) in factors.iter().filter(|f| f.1 < 0).chain(factors.iter().filter(|f| f.1 > 0)) {
        acc = acc.mul(&poly_on_series(p, prec, jet)?.pow(*e)?);
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{q, qi};

    #[test]
    fn arithmetic() {
        // 1/(1 - t) = 1 + t + t^2 + ...
        let s = Series::new(vec![qi(1), qi(-1)], 5);
        let i = s.inv().unwrap();
        assert_eq!((0..5).map(|k| i.coeff(k)).collect::<Vec<_>>(), vec![qi(1); 5]);
        assert_eq!(s.mul(&i).coeff(0), qi(1));
        assert!(s.mul(&i).coeff(3).is_zero());
        let d = i.derive();
        assert_eq!(d.prec(), 4);
        assert_eq!(d.jet(1), Some(qi(2)));
        assert!(Series::new(vec![qi(0), qi(1)], 3).inv().is_err());
    }

    #[test]
    fn jets_round_trip() {
        let jets = vec![qi(1), q(1, 2), qi(3), qi(-4)];
        let s = Series::from_jets(&jets, 10);
        assert_eq!(s.prec(), 4);
        assert_eq!((0..4).map(|k| s.jet(k).unwrap()).collect::<Vec<_>>(), jets);
        assert_eq!(s.jet(4), None);
    }

    #[test]
    fn precision_is_tracked_without_coefficients() {
        let s = Series::new(Vec::new(), 0);
        assert_eq!(s.derive().derive().mul(&s).prec(), -2);
        assert_eq!(s.inv().unwrap().prec(), 0);
    }
}
