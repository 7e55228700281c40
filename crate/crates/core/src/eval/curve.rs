use std::fmt;

use num_traits::{One, Zero};

use super::series::{factorial, Series};
use super::Assignment;
use crate::actions::AffineMap;
use crate::algebra::{fmt_q, VarKey, Q};
use crate::error::{Error, Result};

/// A univariate polynomial in `t`, coefficients in ascending degree with no
/// trailing zeros.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct UniPoly(Vec<Q>);

impl UniPoly {
    pub fn new(mut coeffs: Vec<Q>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        UniPoly(coeffs)
    }

    pub fn zero() -> Self {
        UniPoly(Vec::new())
    }

    pub fn constant(c: Q) -> Self {
        UniPoly::new(vec![c])
    }

    /// The polynomial `t`.
    pub fn t() -> Self {
        UniPoly::new(vec![Q::zero(), Q::one()])
    }

    pub fn coeffs(&self) -> &[Q] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.0.len().checked_sub(1)
    }

    fn lead(&self) -> Option<&Q> {
        self.0.last()
    }

    pub fn add(&self, o: &UniPoly) -> UniPoly {
        let n = self.0.len().max(o.0.len());
        UniPoly::new((0..n).map(|k| self.coeff(k) + o.coeff(k)).collect())
    }

    pub fn neg(&self) -> UniPoly {
        UniPoly(self.0.iter().map(|c| -c).collect())
    }

    pub fn sub(&self, o: &UniPoly) -> UniPoly {
        self.add(&o.neg())
    }

    pub fn scale(&self, c: &Q) -> UniPoly {
        UniPoly::new(self.0.iter().map(|x| x * c).collect())
    }

    pub fn mul(&self, o: &UniPoly) -> UniPoly {
        if self.is_zero() || o.is_zero() {
            return UniPoly::zero();
        }
        let mut out = vec![Q::zero(); self.0.len() + o.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in o.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        UniPoly::new(out)
    }

    pub fn pow(&self, e: u32) -> UniPoly {
        (0..e).fold(UniPoly::constant(Q::one()), |acc, _| acc.mul(self))
    }

    pub fn coeff(&self, k: usize) -> Q {
        self.0.get(k).cloned().unwrap_or_else(Q::zero)
    }

    pub fn derive(&self) -> UniPoly {
        UniPoly::new(self.0.iter().enumerate().skip(1).map(|(k, c)| c * Q::from_integer(k.into())).collect())
    }

    pub fn eval(&self, t: &Q) -> Q {
        self.0.iter().rev().fold(Q::zero(), |acc, c| acc * t + c)
    }

    /// Quotient and remainder. Panics on a zero divisor.
    pub fn divrem(&self, d: &UniPoly) -> (UniPoly, UniPoly) {
        let dl = d.lead().expect("nonzero divisor").clone();
        let dd = d.0.len() - 1;
        let mut r = self.0.clone();
        let mut q = vec![Q::zero(); r.len().saturating_sub(dd)];
        while r.len() > dd && !r.is_empty() {
            let k = r.len() - 1 - dd;
            let c = r.last().expect("nonempty") / &dl;
            for (j, dj) in d.0.iter().enumerate() {
                r[k + j] -= &c * dj;
            }
            q[k] = c;
            r.pop();
            while r.last().is_some_and(|c| c.is_zero()) {
                r.pop();
            }
        }
        (UniPoly::new(q), UniPoly::new(r))
    }

    pub fn monic(&self) -> UniPoly {
        match self.lead() {
            Some(l) => self.scale(&l.recip()),
            None => UniPoly::zero(),
        }
    }

    pub fn gcd(&self, o: &UniPoly) -> UniPoly {
        let (mut a, mut b) = (self.clone(), o.clone());
        while !b.is_zero() {
            let r = a.divrem(&b).1;
            a = b;
            b = r;
        }
        a.monic()
    }

    /// Taylor coefficients at `t0`: `p(t0 + e) = sum c_k e^k`.
    pub fn shifted(&self, t0: &Q) -> Vec<Q> {
        let mut p = self.clone();
        let mut out = Vec::with_capacity(self.0.len());
        let mut k = 0;
        while !p.is_zero() {
            out.push(p.eval(t0) / factorial(k));
            p = p.derive();
            k += 1;
        }
        out
    }
}

impl fmt::Display for UniPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut first = true;
        for (k, c) in self.0.iter().enumerate().filter(|(_, c)| !c.is_zero()) {
            let neg = c < &Q::zero();
            let a = if neg { -c } else { c.clone() };
            match (first, neg) {
                (true, true) => f.write_str("-")?,
                (false, true) => f.write_str(" - ")?,
                (false, false) => f.write_str(" + ")?,
                (true, false) => {}
            }
            first = false;
            let mono = match k {
                0 => String::new(),
                1 => "t".to_string(),
                _ => format!("t^{k}"),
            };
            if mono.is_empty() {
                f.write_str(&fmt_q(&a))?;
            } else if a.is_one() {
                f.write_str(&mono)?;
            } else {
                write!(f, "{}*{mono}", fmt_q(&a))?;
            }
        }
        Ok(())
    }
}

/// A univariate rational function in lowest terms with monic denominator.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct UniRational {
    num: UniPoly,
    den: UniPoly,
}

impl UniRational {
    pub fn new(num: UniPoly, den: UniPoly) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        if num.is_zero() {
            return Ok(UniRational::from(UniPoly::zero()));
        }
        let g = num.gcd(&den);
        let (num, den) = (num.divrem(&g).0, den.divrem(&g).0);
        let l = den.lead().expect("nonzero").recip();
        Ok(UniRational { num: num.scale(&l), den: den.scale(&l) })
    }

    pub fn constant(c: Q) -> Self {
        UniPoly::constant(c).into()
    }

    pub fn t() -> Self {
        UniPoly::t().into()
    }

    pub fn num(&self) -> &UniPoly {
        &self.num
    }

    pub fn den(&self) -> &UniPoly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn add(&self, o: &Self) -> Self {
        Self::new(self.num.mul(&o.den).add(&o.num.mul(&self.den)), self.den.mul(&o.den)).expect("nonzero")
    }

    pub fn neg(&self) -> Self {
        UniRational { num: self.num.neg(), den: self.den.clone() }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Self) -> Self {
        Self::new(self.num.mul(&o.num), self.den.mul(&o.den)).expect("nonzero")
    }

    pub fn div(&self, o: &Self) -> Result<Self> {
        Self::new(self.num.mul(&o.den), self.den.mul(&o.num))
    }

    pub fn pow(&self, e: i32) -> Result<Self> {
        let p = UniRational { num: self.num.pow(e.unsigned_abs()), den: self.den.pow(e.unsigned_abs()) };
        if e < 0 {
            UniRational::constant(Q::one()).div(&p)
        } else {
            Ok(p)
        }
    }

    pub fn scale(&self, c: &Q) -> Self {
        self.mul(&Self::constant(c.clone()))
    }

    pub fn derive(&self) -> Self {
        let num = self.num.derive().mul(&self.den).sub(&self.num.mul(&self.den.derive()));
        Self::new(num, self.den.mul(&self.den)).expect("nonzero")
    }

    pub fn eval(&self, t: &Q) -> Result<Q> {
        let d = self.den.eval(t);
        if d.is_zero() {
            return Err(Error::Degenerate(format!("pole at t = {}", fmt_q(t))));
        }
        Ok(self.num.eval(t) / d)
    }

    /// `self(inner(s))`.
    pub fn compose(&self, inner: &UniRational) -> Result<Self> {
        let deg = self.num.0.len().max(self.den.0.len()).saturating_sub(1) as u32;
        let hom = |p: &UniPoly| {
            p.0.iter().enumerate().fold(UniPoly::zero(), |acc, (k, c)| {
                acc.add(&inner.num.pow(k as u32).mul(&inner.den.pow(deg - k as u32)).scale(c))
            })
        };
        Self::new(hom(&self.num), hom(&self.den))
    }

    /// Taylor series at `t0` with `len` coefficients.
    pub fn series_at(&self, t0: &Q, len: usize) -> Result<Series> {
        if self.den.eval(t0).is_zero() {
            return Err(Error::Degenerate(format!("pole at t = {}", fmt_q(t0))));
        }
        let n = Series::new(self.num.shifted(t0), len as i64);
        let d = Series::new(self.den.shifted(t0), len as i64);
        Ok(n.mul(&d.inv()?))
    }
}

impl From<UniPoly> for UniRational {
    fn from(p: UniPoly) -> Self {
        UniRational { num: p, den: UniPoly::constant(Q::one()) }
    }
}

impl fmt::Display for UniRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.degree() == Some(0) {
            return write!(f, "{}", self.num);
        }
        write!(f, "({})/({})", self.num, self.den)
    }
}

/// A rational curve `t -> (c_1(t), ..., c_n(t))`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CurveSpec {
    coords: Vec<UniRational>,
}

impl CurveSpec {
    pub fn new(coords: Vec<UniRational>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidDimension { what: "curve", n: 0, min: 1 });
        }
        Ok(CurveSpec { coords })
    }

    /// Parse one coordinate per string in the expression grammar, with
    /// parameter `t`.
    pub fn parse_coords(coords: &[&str]) -> Result<Self> {
        Self::new(coords.iter().map(|s| crate::expr::parse_univariate(s)).collect::<Result<Vec<_>>>()?)
    }

    /// Parse a curve file: one coordinate per nonblank line, `#` starts a
    /// comment.
    pub fn parse(text: &str) -> Result<Self> {
        let lines: Vec<&str> =
            text.lines().map(|l| l.split('#').next().unwrap_or("").trim()).filter(|l| !l.is_empty()).collect();
        Self::parse_coords(&lines)
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[UniRational] {
        &self.coords
    }

    /// `h c + h0`.
    pub fn act(&self, m: &AffineMap) -> Result<Self> {
        if m.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: m.dim() });
        }
        let coords = m
            .h()
            .iter()
            .zip(m.h0())
            .map(|(row, h0)| {
                row.iter().zip(&self.coords).fold(UniRational::constant(h0.clone()), |acc, (h, c)| acc.add(&c.scale(h)))
            })
            .collect();
        Self::new(coords)
    }

    /// `s -> c(phi(s))`.
    pub fn reparametrize(&self, phi: &UniRational) -> Result<Self> {
        Self::new(self.coords.iter().map(|c| c.compose(phi)).collect::<Result<Vec<_>>>()?)
    }
}

impl fmt::Display for CurveSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.coords {
            writeln!(f, "{c}")?;
        }
        Ok(())
    }
}

/// All jets `d^k x_i` with `k <= max_order` of the curve at `t0`.
pub fn jets_of_curve(c: &CurveSpec, t0: &Q, max_order: u32) -> Result<Assignment> {
    let mut a = Assignment::new();
    for (i, coord) in c.coords.iter().enumerate() {
        let s = coord.series_at(t0, max_order as usize + 1)?;
        for k in 0..=max_order {
            a.insert(VarKey::x(i + 1, k), s.jet(k as usize).expect("enough coefficients"));
        }
    }
    Ok(a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{q, qi};

    #[test]
    fn curve_jets() {
        let c = CurveSpec::parse_coords(&["t", "t^2"]).unwrap();
        let a = jets_of_curve(&c, &qi(1), 2).unwrap();
        let get = |i, k| a.get(VarKey::x(i, k)).cloned().unwrap();
        assert_eq!([get(1, 0), get(2, 0), get(1, 1), get(2, 1), get(1, 2), get(2, 2)], [1, 1, 1, 2, 0, 2].map(qi));

        let c = CurveSpec::parse_coords(&["t^2", "t^3"]).unwrap();
        let a = jets_of_curve(&c, &qi(1), 3).unwrap();
        let get = |i, k| a.get(VarKey::x(i, k)).cloned().unwrap();
        assert_eq!([get(1, 1), get(2, 1), get(1, 2), get(2, 2), get(1, 3), get(2, 3)], [2, 3, 2, 6, 0, 6].map(qi));

        let c = CurveSpec::parse_coords(&["1/t", "t"]).unwrap();
        assert!(matches!(jets_of_curve(&c, &qi(0), 2), Err(Error::Degenerate(_))));
    }

    #[test]
    fn rational_jets_match_hand_derivatives() {
        // 1/(1 + t^2) at t = 1: value 1/2, derivative -1/2, second 1/2
        let c = CurveSpec::parse_coords(&["1/(1 + t^2)"]).unwrap();
        let a = jets_of_curve(&c, &qi(1), 2).unwrap();
        assert_eq!(a.jets_of(crate::algebra::Indet::X(1)), vec![q(1, 2), q(-1, 2), q(1, 2)]);
    }

    #[test]
    fn reduction_and_composition() {
        let t = UniRational::t();
        let r = t.pow(2).unwrap().sub(&UniRational::constant(qi(1))).div(&t.sub(&UniRational::constant(qi(1)))).unwrap();
        assert_eq!(r, t.add(&UniRational::constant(qi(1))));
        let phi = t.mul(&t).add(&UniRational::constant(qi(1)));
        let c = t.pow(-1).unwrap();
        let composed = c.compose(&phi).unwrap();
        assert_eq!(composed.eval(&qi(2)).unwrap(), q(1, 5));
        assert_eq!(composed.derive().eval(&qi(2)).unwrap(), q(-4, 25));
        assert_eq!(r.to_string(), "1 + t");
    }
}
