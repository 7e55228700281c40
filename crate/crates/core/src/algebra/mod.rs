//! Exact arithmetic on differential polynomials and differential rational
//! functions over the rationals.
//!
//! A jet variable is an indeterminate together with a derivative order
//! ([`VarKey`]). Polynomials are sparse maps from [`Monomial`]s to exact
//! rational coefficients. Rational functions keep their numerator and
//! denominator as products of polynomial factors, which lets the
//! derivation and the field operations avoid most of the expression swell
//! that comes from never computing multivariate gcds.
//!
//! # Monomial order
//!
//! Monomials are compared lexicographically with the *greatest* variable most
//! significant: scan both monomials from their largest variable downwards and
//! the first difference decides (a monomial containing a larger variable is
//! larger; for the same variable the larger exponent wins). Variables are
//! ordered by `(indeterminate, order)`, indeterminates as declared in
//! [`Indet`]. This is a true monomial order (compatible with
//! multiplication), so leading terms of products are products of leading
//! terms. The leading term of a polynomial is its greatest monomial and
//! polynomials store their terms in ascending order.

mod monomial;
mod poly;
mod rational;

use std::fmt;

pub use monomial::Monomial;
pub use poly::DiffPolynomial;
pub use rational::{eq_rational, DiffRational};

/// Exact rational coefficients.
pub type Q = num_rational::BigRational;

/// Build a rational from an integer pair. Panics on a zero denominator.
pub fn q(num: i64, den: i64) -> Q {
    Q::new(num.into(), den.into())
}

pub fn qi(n: i64) -> Q {
    Q::from_integer(n.into())
}

/// A differential indeterminate.
///
/// `X(i)` are the curve coordinates `x_1..x_n`. `A(i)` and `B(j)` are slot
/// variables standing for the Wronskian ratios and the algebraic generators
/// when a function is written in terms of a generator system. `G` is the
/// reparametrization multiplier, `S` the placeholder for `dg/g`, `T` and `Y`
/// further auxiliary indeterminates.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Indet {
    X(u16),
    A(u16),
    B(u16),
    G,
    S,
    T,
    Y,
}

impl Indet {
    pub fn is_x(self) -> bool {
        matches!(self, Indet::X(_))
    }

    pub fn jet(self, order: u32) -> VarKey {
        VarKey { indet: self, order }
    }
}

impl fmt::Display for Indet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Indet::X(i) => write!(f, "x{i}"),
            Indet::A(i) => write!(f, "a{i}"),
            Indet::B(i) => write!(f, "b{i}"),
            Indet::G => f.write_str("g"),
            Indet::S => f.write_str("s"),
            Indet::T => f.write_str("t"),
            Indet::Y => f.write_str("y"),
        }
    }
}

/// The jet symbol `d^order` applied to an indeterminate.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct VarKey {
    pub indet: Indet,
    pub order: u32,
}

impl VarKey {
    pub fn new(indet: Indet, order: u32) -> Self {
        VarKey { indet, order }
    }

    /// `d^k x_i` with `i` one-based.
    pub fn x(i: usize, order: u32) -> Self {
        VarKey::new(Indet::X(i as u16), order)
    }

    pub fn g(order: u32) -> Self {
        VarKey::new(Indet::G, order)
    }

    /// The jet one derivative higher.
    pub fn derived(self) -> Self {
        VarKey::new(self.indet, self.order + 1)
    }
}

impl fmt::Display for VarKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.order {
            0 => write!(f, "{}", self.indet),
            1 => write!(f, "D({})", self.indet),
            k => write!(f, "D({},{})", self.indet, k),
        }
    }
}

/// `p/q`, or `p` for an integer.
pub fn fmt_q(c: &Q) -> String {
    if c.is_integer() {
        c.numer().to_string()
    } else {
        format!("{}/{}", c.numer(), c.denom())
    }
}
