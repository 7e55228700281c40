//! Wronskian determinants of the jet columns and their behaviour under
//! `d -> g^{-1} d`.
//!
//! Matrices have one row per coordinate `x_i` and one column per jet order,
//! so `W = det[dx, d^2 x, ..., d^n x]`. The minor `W_i` deletes the column
//! `d^i x` from `[dx, ..., d^{n+1} x]`; `W_{n+1} = W`. With this convention
//! the Laplace expansion of the bordered determinant along a last row of
//! `y`-jets is `sum_i (-1)^{n+1-i} W_i d^i y`.

use std::sync::Arc;

use crate::actions::phi_coefficient;
use crate::algebra::{qi, DiffPolynomial, DiffRational, Indet, VarKey, Q};
use crate::error::{Error, Result};

/// A square matrix of differential rational functions.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct JetMatrix {
    rows: Vec<Vec<DiffRational>>,
}

impl JetMatrix {
    pub fn new(rows: Vec<Vec<DiffRational>>) -> Result<Self> {
        let m = rows.len();
        if let Some(r) = rows.iter().find(|r| r.len() != m) {
            return Err(Error::DimensionMismatch { expected: m, found: r.len() });
        }
        Ok(JetMatrix { rows })
    }

    /// Rows `x_1..x_n`, columns the jets of the given orders.
    pub fn jets(n: usize, orders: &[u32]) -> Result<Self> {
        Self::new((1..=n).map(|i| orders.iter().map(|&k| DiffRational::x(i, k)).collect()).collect())
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Vec<DiffRational>] {
        &self.rows
    }

    /// Exact determinant. Each row is first scaled to polynomial entries by
    /// its common denominator.
    pub fn det(&self) -> DiffRational {
        let mut scale = DiffRational::one();
        let mut polys = Vec::with_capacity(self.dim());
        for row in &self.rows {
            let mult = row_multiplier(row);
            polys.push(
                row.iter()
                    .map(|e| {
                        let p = e * &mult;
                        debug_assert!(p.is_polynomial());
                        p.numerator()
                    })
                    .collect::<Vec<_>>(),
            );
            scale = scale * mult;
        }
        DiffRational::from_poly(&det_poly(&polys)).checked_div(&scale).expect("nonzero row multipliers")
    }
}

/// The product of the denominator factors of a row, each to the largest
/// power with which it occurs.
fn row_multiplier(row: &[DiffRational]) -> DiffRational {
    let mut factors: Vec<(Arc<DiffPolynomial>, i32)> = Vec::new();
    for e in row {
        for (f, k) in e.factored().1.iter().filter(|f| f.1 < 0) {
            match factors.iter_mut().find(|(g, _)| g == f) {
                Some(slot) => slot.1 = slot.1.max(-k),
                None => factors.push((f.clone(), -k)),
            }
        }
    }
    factors.iter().fold(DiffRational::one(), |acc, (f, k)| acc * DiffRational::from_poly(f).pow(*k))
}

/// Determinant of a polynomial matrix: cofactor expansion up to 4x4,
/// fraction-free elimination beyond.
pub fn det_poly(m: &[Vec<DiffPolynomial>]) -> DiffPolynomial {
    if m.len() <= 4 {
        cofactor(m)
    } else {
        bareiss(m)
    }
}

fn cofactor(m: &[Vec<DiffPolynomial>]) -> DiffPolynomial {
    match m.len() {
        0 => DiffPolynomial::one(),
        1 => m[0][0].clone(),
        2 => &(&m[0][0] * &m[1][1]) - &(&m[0][1] * &m[1][0]),
        n => {
            let mut acc = DiffPolynomial::zero();
            for j in 0..n {
                if m[0][j].is_zero() {
                    continue;
                }
                let minor: Vec<Vec<DiffPolynomial>> = m[1..]
                    .iter()
                    .map(|r| r.iter().enumerate().filter(|(c, _)| *c != j).map(|(_, e)| e.clone()).collect())
                    .collect();
                let t = &m[0][j] * &cofactor(&minor);
                acc = if j % 2 == 0 { &acc + &t } else { &acc - &t };
            }
            acc
        }
    }
}

fn bareiss(m: &[Vec<DiffPolynomial>]) -> DiffPolynomial {
    let n = m.len();
    let mut a = m.to_vec();
    let mut sign = false;
    let mut prev = DiffPolynomial::one();
    for k in 0..n - 1 {
        let Some(piv) = (k..n).find(|&r| !a[r][k].is_zero()) else {
            return DiffPolynomial::zero();
        };
        if piv != k {
            a.swap(piv, k);
            sign = !sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = &(&a[i][j] * &a[k][k]) - &(&a[i][k] * &a[k][j]);
                a[i][j] = num.div_exact(&prev).expect("Bareiss quotients are exact");
            }
            a[i][k] = DiffPolynomial::zero();
        }
        prev = a[k][k].clone();
    }
    let d = a[n - 1][n - 1].clone();
    if sign {
        -d
    } else {
        d
    }
}

fn jet_det(n: usize, orders: &[u32]) -> DiffPolynomial {
    let m: Vec<Vec<DiffPolynomial>> =
        (1..=n).map(|i| orders.iter().map(|&k| DiffPolynomial::x(i, k)).collect()).collect();
    det_poly(&m)
}

fn check_n(n: usize, min: usize) -> Result<()> {
    if n < min {
        return Err(Error::InvalidDimension { what: "dimension", n, min });
    }
    Ok(())
}

/// `W = det[dx, ..., d^n x]`.
pub fn wronskian(n: usize) -> Result<DiffPolynomial> {
    check_n(n, 1)?;
    Ok(jet_det(n, &(1..=n as u32).collect::<Vec<_>>()))
}

/// `W_i`: delete `d^i x` from `[dx, ..., d^{n+1} x]`.
pub fn wronskian_minor(n: usize, i: usize) -> Result<DiffPolynomial> {
    check_n(n, 1)?;
    if i == 0 || i > n + 1 {
        return Err(Error::IndexOutOfRange { index: i, min: 1, max: n + 1 });
    }
    let orders: Vec<u32> = (1..=n as u32 + 1).filter(|&k| k != i as u32).collect();
    Ok(jet_det(n, &orders))
}

/// `W_i / W`.
pub fn ratio(n: usize, i: usize) -> Result<DiffRational> {
    let num = wronskian_minor(n, i)?;
    DiffRational::from_poly(&num).checked_div(&DiffRational::from_poly(&wronskian(n)?))
}

/// The bordered determinant with rows `x_1..x_n, y` and columns
/// `d, ..., d^{n+1}`.
pub fn extended_wronskian(n: usize) -> Result<DiffPolynomial> {
    check_n(n, 1)?;
    let mut m: Vec<Vec<DiffPolynomial>> =
        (1..=n).map(|i| (1..=n as u32 + 1).map(|k| DiffPolynomial::x(i, k)).collect()).collect();
    m.push((1..=n as u32 + 1).map(|k| DiffPolynomial::var(VarKey::new(Indet::Y, k))).collect());
    Ok(det_poly(&m))
}

/// `sum_{i=1}^{n+1} (-1)^{n+1-i} W_i d^i y` for a given `y`.
pub fn alternating_sum(n: usize, y: &DiffRational) -> Result<DiffRational> {
    let mut jets = vec![y.clone()];
    for k in 0..=n {
        jets.push(jets[k].derive());
    }
    let mut terms = Vec::with_capacity(n + 1);
    for i in 1..=n + 1 {
        let t = DiffRational::from_poly(&wronskian_minor(n, i)?) * &jets[i];
        terms.push(if (n + 1 - i) % 2 == 0 { t } else { -t });
    }
    Ok(DiffRational::sum(terms))
}

/// The right-hand side of the general minor law,
/// `g^{-(n+1)(n+2)/2} sum_{i=j}^{n+1} (-1)^{i-j} Phi_{i,j}{g} W_i`.
pub fn predicted_minor_transform(n: usize, j: usize) -> Result<DiffRational> {
    check_n(n, 1)?;
    if j == 0 || j > n + 1 {
        return Err(Error::IndexOutOfRange { index: j, min: 1, max: n + 1 });
    }
    let mut terms = Vec::new();
    for i in j..=n + 1 {
        let phi = phi_coefficient(i as u32, j as u32)?;
        let t = DiffRational::from_poly(&(&phi * &wronskian_minor(n, i)?));
        terms.push(if (i - j) % 2 == 0 { t } else { -t });
    }
    let e = ((n + 1) * (n + 2) / 2) as i32;
    Ok(DiffRational::sum(terms) * DiffRational::g(0).pow(-e))
}

/// `dg / g`.
pub fn log_dg() -> DiffRational {
    &DiffRational::g(1) / &DiffRational::g(0)
}

/// Slot variable `d^k a_i` standing for the jets of `W_i / W`.
pub fn slot_a(i: usize, k: u32) -> DiffRational {
    DiffRational::var(VarKey::new(Indet::A(i as u16), k))
}

/// Placeholder `d^k s` for the jets of `dg/g`.
pub fn slot_s(k: u32) -> DiffRational {
    DiffRational::var(VarKey::new(Indet::S, k))
}

fn c(n: i64, d: i64) -> DiffRational {
    DiffRational::constant(crate::algebra::q(n, d))
}

/// The bracket of the `W_{n-1}` law written in slots:
/// `a_{n-1} - n(n-1)/2 a_n s + (n-1)n(n+1)/6 ds + (n-1)n(n+1)(3n-2)/24 s^2`.
pub fn bracket_n1(n: usize) -> Result<DiffRational> {
    check_n(n, 2)?;
    let m = n as i64;
    Ok(DiffRational::sum([
        slot_a(n - 1, 0),
        c(-m * (m - 1), 2) * slot_a(n, 0) * slot_s(0),
        c((m - 1) * m * (m + 1), 6) * slot_s(1),
        c((m - 1) * m * (m + 1) * (3 * m - 2), 24) * slot_s(0).pow(2),
    ]))
}

/// The bracket of the `W_{n-2}` law written in slots, with
/// `F = (n+1)n(n-1)(n-2)` standing for `(n+1)!/(n-3)!`.
pub fn bracket_n2(n: usize) -> Result<DiffRational> {
    check_n(n, 3)?;
    let m = n as i64;
    let f = (m + 1) * m * (m - 1) * (m - 2);
    let s = slot_s(0);
    Ok(DiffRational::sum([
        slot_a(n - 2, 0),
        c(-(m - 1) * (m - 2), 2) * slot_a(n - 1, 0) * &s,
        (c((m - 2) * (m - 1) * m, 6) * slot_s(1) + c((m - 2) * (m - 1) * m * (3 * m - 5), 24) * s.pow(2))
            * slot_a(n, 0),
        -DiffRational::sum([
            c(f, 24) * slot_s(2),
            c((2 * m - 3) * f, 24) * &s * slot_s(1),
            c((m - 1) * (m - 2) * f, 48) * s.pow(3),
        ]),
    ]))
}

/// Bind the slots `a_i := W_i / W` for `i = 1..n`.
pub fn bind_ratios(f: &DiffRational, n: usize) -> Result<DiffRational> {
    let bindings = (1..=n).map(|i| Ok((Indet::A(i as u16), ratio(n, i)?))).collect::<Result<Vec<_>>>()?;
    f.bind_jets(&bindings)
}

/// Bind the placeholder `s` to a value (its jets to the derivatives).
pub fn bind_s(f: &DiffRational, s: &DiffRational) -> Result<DiffRational> {
    f.bind_jets(&[(Indet::S, s.clone())])
}

/// Right-hand side of the `W_n / W` law: `g^{-1}(W_n/W - n(n+1)/2 dg/g)`.
pub fn eq2_rhs(n: usize) -> Result<DiffRational> {
    check_n(n, 1)?;
    let k = (n * (n + 1) / 2) as i64;
    Ok((ratio(n, n)? - DiffRational::int(k) * log_dg()) * DiffRational::g(0).pow(-1))
}

/// Right-hand side of the `W_{n-1} / W` law: `g^{-2}` times the bracket with
/// `s = dg/g`.
pub fn eq3_rhs(n: usize) -> Result<DiffRational> {
    let b = bind_ratios(&bind_s(&bracket_n1(n)?, &log_dg())?, n)?;
    Ok(b * DiffRational::g(0).pow(-2))
}

/// `g^{-2}(A^2 - n(n+1)(A s - n(n+1)/4 s^2))` with `A = W_n/W`, `s = dg/g`:
/// the law for `(W_n/W)^2`.
pub fn eq4_square_rhs(n: usize) -> Result<DiffRational> {
    check_n(n, 1)?;
    let m = (n * (n + 1)) as i64;
    let a = ratio(n, n)?;
    let s = log_dg();
    let inner = &a * &s - c(m, 4) * s.pow(2);
    Ok((a.pow(2) - DiffRational::int(m) * inner) * DiffRational::g(0).pow(-2))
}

/// `g^{-2}(dA - A s - n(n+1)/2 d^2g/g + n(n+1) s^2)`: the law for
/// `delta(W_n/W)`.
pub fn eq4_delta_rhs(n: usize) -> Result<DiffRational> {
    check_n(n, 1)?;
    let m = (n * (n + 1)) as i64;
    let a = ratio(n, n)?;
    let s = log_dg();
    let d2g = &DiffRational::g(2) / &DiffRational::g(0);
    let inner = DiffRational::sum([a.derive(), -(&a * &s), c(-m, 2) * d2g, DiffRational::int(m) * s.pow(2)]);
    Ok(inner * DiffRational::g(0).pow(-2))
}

/// `n(n+1)/2` as a rational, the weight of `dg/g` in the `W_n/W` law.
pub fn triangular(n: usize) -> Q {
    qi((n * (n + 1) / 2) as i64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::actions::{act_affine, reinterpret, AffineMap, DerivationSpec};
    use crate::algebra::eq_rational;

    fn x(i: usize, k: u32) -> DiffPolynomial {
        DiffPolynomial::x(i, k)
    }

    #[test]
    fn small_determinants() {
        let id = JetMatrix::new(vec![
            vec![DiffRational::one(), DiffRational::zero()],
            vec![DiffRational::zero(), DiffRational::one()],
        ])
        .unwrap();
        assert!(id.det().is_one());
        let w = JetMatrix::jets(2, &[1, 2]).unwrap().det();
        let hand = &(&x(1, 1) * &x(2, 2)) - &(&x(1, 2) * &x(2, 1));
        assert!(eq_rational(&w, &(&hand).into()));
        assert!(JetMatrix::jets(2, &[1, 1]).unwrap().det().is_zero());
        assert_eq!(wronskian(2).unwrap(), hand);
        assert_eq!(wronskian_minor(2, 2).unwrap(), &(&x(1, 1) * &x(2, 3)) - &(&x(2, 1) * &x(1, 3)));
        assert!(wronskian_minor(2, 4).is_err());
    }

    #[test]
    fn bareiss_matches_cofactor() {
        let m: Vec<Vec<DiffPolynomial>> =
            (1..=5).map(|i| (1..=5u32).map(|k| &x(i, k) + &x(i % 5 + 1, k - 1)).collect()).collect();
        assert_eq!(bareiss(&m[..4].iter().map(|r| r[..4].to_vec()).collect::<Vec<_>>()), cofactor(
            &m[..4].iter().map(|r| r[..4].to_vec()).collect::<Vec<_>>()
        ));
        let mut twice = m.clone();
        twice[4] = twice[0].clone();
        assert!(det_poly(&twice).is_zero());
    }

    #[test]
    fn rational_entries() {
        let a = &DiffRational::x(1, 0) / &DiffRational::x(2, 0);
        let m = JetMatrix::new(vec![vec![a.clone(), DiffRational::one()], vec![DiffRational::one(), a.pow(-1)]])
            .unwrap();
        assert!(m.det().is_zero());
    }

    #[test]
    fn covariance_under_linear_maps() {
        let m = AffineMap::linear(vec![vec![qi(2), qi(0)], vec![qi(0), qi(3)]]).unwrap();
        let w: DiffRational = wronskian(2).unwrap().into();
        assert!(eq_rational(&act_affine(&w, &m).unwrap(), &(DiffRational::int(6) * &w)));
    }

    #[test]
    fn top_minor_law_symbolic() {
        let w: DiffRational = wronskian(2).unwrap().into();
        let lhs = reinterpret(&w, &DerivationSpec::G);
        assert!(eq_rational(&lhs, &predicted_minor_transform(2, 3).unwrap()));
        assert!(eq_rational(&lhs, &(&w * &DiffRational::g(0).pow(-3))));
    }

    #[test]
    fn second_minor_prediction_at_n2() {
        // g^{-4}(W_2 - 3 (dg/g) W)
        let w: DiffRational = wronskian(2).unwrap().into();
        let w2: DiffRational = wronskian_minor(2, 2).unwrap().into();
        let hand = (w2 - DiffRational::int(3) * log_dg() * w) * DiffRational::g(0).pow(-4);
        assert!(eq_rational(&predicted_minor_transform(2, 2).unwrap(), &hand));
    }

    #[test]
    fn bordered_expansion() {
        for n in 2..=3 {
            let y = DiffRational::var(VarKey::new(Indet::Y, 0));
            let lhs = alternating_sum(n, &y).unwrap();
            assert!(eq_rational(&lhs, &extended_wronskian(n).unwrap().into()));
        }
    }
}
