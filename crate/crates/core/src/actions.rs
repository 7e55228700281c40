//! Affine substitutions of the jet variables and reparametrized derivations.
//!
//! An affine map `(h, h0)` acts by `x -> h x + h0`. Because its entries are
//! constants the induced action on jets is `d^k x -> h d^k x` for `k >= 1`.
//! A [`DerivationSpec`] names the derivation in force: the base `d`, the
//! reparametrized `g^{-1} d` with `g` a differential indeterminate, or
//! `p^{-1} d` for a nonzero rational function `p`.

use std::collections::HashMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::algebra::{eq_rational, fmt_q, DiffPolynomial, DiffRational, Indet, Monomial, VarKey, Q};
use crate::error::{Error, Result};

/// An element `(h, h0)` of `GL(n) x| Q^n` with exact rational entries.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct AffineMap {
    h: Vec<Vec<Q>>,
    h0: Vec<Q>,
}

impl AffineMap {
    pub fn new(h: Vec<Vec<Q>>, h0: Vec<Q>) -> Result<Self> {
        let n = h.len();
        if let Some(row) = h.iter().find(|r| r.len() != n) {
            return Err(Error::DimensionMismatch { expected: n, found: row.len() });
        }
        if h0.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: h0.len() });
        }
        if det_q(&h).is_zero() {
            return Err(Error::Singular);
        }
        Ok(AffineMap { h, h0 })
    }

    pub fn linear(h: Vec<Vec<Q>>) -> Result<Self> {
        let n = h.len();
        Self::new(h, vec![Q::zero(); n])
    }

    pub fn identity(n: usize) -> Self {
        let h = (0..n).map(|i| (0..n).map(|j| if i == j { Q::one() } else { Q::zero() }).collect()).collect();
        AffineMap { h, h0: vec![Q::zero(); n] }
    }

    pub fn dim(&self) -> usize {
        self.h0.len()
    }

    pub fn h(&self) -> &[Vec<Q>] {
        &self.h
    }

    pub fn h0(&self) -> &[Q] {
        &self.h0
    }

    pub fn det(&self) -> Q {
        det_q(&self.h)
    }

    /// `self . other`, i.e. `(h, h0) . (h', h0') = (h h', h h0' + h0)`.
    pub fn compose(&self, other: &AffineMap) -> AffineMap {
        let n = self.dim();
        let h = (0..n)
            .map(|i| (0..n).map(|j| (0..n).map(|k| &self.h[i][k] * &other.h[k][j]).sum()).collect())
            .collect();
        let h0 = self.apply(&other.h0);
        AffineMap { h, h0 }
    }

    pub fn inverse(&self) -> AffineMap {
        let hinv = inverse_q(&self.h).expect("element of GL(n)");
        let n = self.dim();
        let h0 = (0..n).map(|i| -(0..n).map(|k| &hinv[i][k] * &self.h0[k]).sum::<Q>()).collect();
        AffineMap { h: hinv, h0 }
    }

    /// `h v + h0`.
    pub fn apply(&self, v: &[Q]) -> Vec<Q> {
        self.apply_linear(v).into_iter().zip(&self.h0).map(|(a, b)| a + b).collect()
    }

    /// `h v`.
    pub fn apply_linear(&self, v: &[Q]) -> Vec<Q> {
        self.h.iter().map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum()).collect()
    }

    pub fn is_orthogonal(&self) -> bool {
        let n = self.dim();
        (0..n).all(|i| {
            (0..n).all(|j| {
                let dot: Q = (0..n).map(|k| &self.h[k][i] * &self.h[k][j]).sum();
                dot == if i == j { Q::one() } else { Q::zero() }
            })
        })
    }
}

impl fmt::Display for AffineMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let row = |r: &[Q]| format!("[{}]", r.iter().map(fmt_q).collect::<Vec<_>>().join(", "));
        let h: Vec<String> = self.h.iter().map(|r| row(r)).collect();
        write!(f, "h = [{}], h0 = {}", h.join(", "), row(&self.h0))
    }
}

pub(crate) fn det_q(m: &[Vec<Q>]) -> Q {
    let n = m.len();
    let mut a: Vec<Vec<Q>> = m.to_vec();
    let mut det = Q::one();
    for col in 0..n {
        let Some(piv) = (col..n).find(|&r| !a[r][col].is_zero()) else {
            return Q::zero();
        };
        if piv != col {
            a.swap(piv, col);
            det = -det;
        }
        let p = a[col][col].clone();
        det *= &p;
        for r in col + 1..n {
            if a[r][col].is_zero() {
                continue;
            }
            let f = &a[r][col] / &p;
            for c in col..n {
                let t = &f * &a[col][c];
                a[r][c] -= t;
            }
        }
    }
    det
}

fn inverse_q(m: &[Vec<Q>]) -> Option<Vec<Vec<Q>>> {
    let n = m.len();
    let mut a: Vec<Vec<Q>> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { Q::one() } else { Q::zero() }));
            r
        })
        .collect();
    for col in 0..n {
        let piv = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(piv, col);
        let p = a[col][col].clone();
        for c in 0..2 * n {
            a[col][c] = &a[col][c] / &p;
        }
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                for c in 0..2 * n {
                    let t = &f * &a[col][c];
                    a[r][c] -= t;
                }
            }
        }
    }
    Some(a.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// A rational function known to be nonzero.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Normalizer(DiffRational);

impl Normalizer {
    pub fn get(&self) -> &DiffRational {
        &self.0
    }
}

/// The derivation in force.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum DerivationSpec {
    /// The base derivation `d`.
    Base,
    /// `g^{-1} d` with `g` the differential indeterminate [`Indet::G`].
    G,
    /// `p^{-1} d`.
    P(Normalizer),
}

impl DerivationSpec {
    pub fn p(p: DiffRational) -> Result<Self> {
        if p.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(DerivationSpec::P(Normalizer(p)))
    }

    /// The factor `q` with `delta = q^{-1} d`.
    pub fn scale(&self) -> DiffRational {
        match self {
            DerivationSpec::Base => DiffRational::one(),
            DerivationSpec::G => DiffRational::g(0),
            DerivationSpec::P(p) => p.0.clone(),
        }
    }
}

/// Apply `x -> h x + h0` to every jet of `x`.
pub fn act_affine(f: &DiffRational, m: &AffineMap) -> Result<DiffRational> {
    let n = m.dim();
    if let Some(i) = f.orders().keys().filter_map(|i| if let Indet::X(i) = i { Some(*i as usize) } else { None }).max() {
        if i > n {
            return Err(Error::DimensionMismatch { expected: n, found: i });
        }
    }
    f.substitute_poly(&|v: VarKey| affine_image(v, m))
}

fn affine_image(v: VarKey, m: &AffineMap) -> Option<DiffPolynomial> {
    let Indet::X(i) = v.indet else { return None };
    let row = &m.h[i as usize - 1];
    let mut terms: Vec<(Monomial, Q)> = row
        .iter()
        .enumerate()
        .filter(|(_, c)| !c.is_zero())
        .map(|(j, c)| (Monomial::var(VarKey::x(j + 1, v.order)), c.clone()))
        .collect();
    if v.order == 0 {
        terms.push((Monomial::one(), m.h0[i as usize - 1].clone()));
    }
    Some(DiffPolynomial::from_terms(terms))
}

/// One application of the derivation `q^{-1} d`.
pub fn delta_apply(f: &DiffRational, spec: &DerivationSpec) -> DiffRational {
    let df = f.derive();
    match spec {
        DerivationSpec::Base => df,
        _ => df.checked_div(&spec.scale()).expect("nonzero scale"),
    }
}

/// `[v, delta v, ..., delta^k v]` for the indeterminate `v`.
pub fn delta_jets(v: Indet, k: u32, spec: &DerivationSpec) -> Vec<DiffRational> {
    let mut out = Vec::with_capacity(k as usize + 1);
    out.push(DiffRational::var(v.jet(0)));
    for j in 1..=k {
        let next = match spec {
            DerivationSpec::Base => DiffRational::var(v.jet(j)),
            _ => delta_apply(&out[j as usize - 1], spec),
        };
        out.push(next);
    }
    out
}

/// `f^delta`: every jet `d^k x_i` in `f` replaced by `delta^k x_i`.
pub fn reinterpret(f: &DiffRational, spec: &DerivationSpec) -> DiffRational {
    reinterpret_where(f, spec, &|i: Indet| i.is_x())
}

/// Like [`reinterpret`] but for the indeterminates selected by `which`.
pub fn reinterpret_where(f: &DiffRational, spec: &DerivationSpec, which: &dyn Fn(Indet) -> bool) -> DiffRational {
    if matches!(spec, DerivationSpec::Base) {
        return f.clone();
    }
    let jets: HashMap<Indet, Vec<DiffRational>> = f
        .orders()
        .into_iter()
        .filter(|(i, _)| which(*i))
        .map(|(i, k)| (i, delta_jets(i, k, spec)))
        .collect();
    f.substitute(&|v: VarKey| jets.get(&v.indet).map(|js| js[v.order as usize].clone()))
        .expect("delta jets are algebraically independent")
}

/// Exponent vectors `alpha` with `|alpha| = i` and `sum j alpha_j = k`, in a
/// deterministic order (parts listed in nonincreasing order).
pub fn phi_compositions(k: u32, i: u32) -> Vec<Vec<u32>> {
    fn rec(remaining: u32, parts_left: u32, max_part: u32, alpha: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if parts_left == 0 {
            if remaining == 0 {
                out.push(alpha.clone());
            }
            return;
        }
        // each remaining part is at least 1
        let hi = max_part.min(remaining.saturating_sub(parts_left - 1));
        for part in (1..=hi).rev() {
            alpha[part as usize - 1] += 1;
            rec(remaining - part, parts_left - 1, part, alpha, out);
            alpha[part as usize - 1] -= 1;
        }
    }
    let mut out = Vec::new();
    if i >= 1 && i <= k {
        rec(k, i, k, &mut vec![0; k as usize], &mut out);
    }
    out
}

fn factorial(n: u32) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, j| acc * BigInt::from(j))
}

/// The coefficient `Phi_{k,i}{g}` in `d^k = sum_i Phi_{k,i}{g} delta^i` for
/// `delta = g^{-1} d`:
/// `sum_alpha k! / (prod alpha_j! (j!)^alpha_j) * g^alpha_1 (dg)^alpha_2 ...`.
pub fn phi_coefficient(k: u32, i: u32) -> Result<DiffPolynomial> {
    if k == 0 || i == 0 || i > k {
        return Err(Error::IndexOutOfRange { index: i as usize, min: 1, max: k as usize });
    }
    let kf = factorial(k);
    let terms = phi_compositions(k, i).into_iter().map(|alpha| {
        let mut den = BigInt::one();
        for (j, &a) in alpha.iter().enumerate() {
            den *= factorial(a) * num_traits::pow(factorial(j as u32 + 1), a as usize);
        }
        let mono = Monomial::from_pairs(alpha.iter().enumerate().map(|(j, &a)| (VarKey::g(j as u32), a)));
        (mono, Q::new(kf.clone(), den))
    });
    Ok(DiffPolynomial::from_terms(terms))
}

/// `sum_{i=1}^k Phi_{k,i}{g} delta^i x_1`, with the delta jets computed by
/// recursion.
pub fn phi_expansion(k: u32) -> Result<DiffRational> {
    let jets = delta_jets(Indet::X(1), k, &DerivationSpec::G);
    let mut terms = Vec::new();
    for i in 1..=k {
        terms.push(DiffRational::from_poly(&phi_coefficient(k, i)?) * &jets[i as usize]);
    }
    Ok(DiffRational::sum(terms))
}

/// Whether `d^k x_1 = sum_i Phi_{k,i}{g} delta^i x_1` holds identically.
pub fn check_phi_expansion(k: u32) -> bool {
    phi_expansion(k).is_ok_and(|rhs| eq_rational(&DiffRational::x(1, k), &rhs))
}
