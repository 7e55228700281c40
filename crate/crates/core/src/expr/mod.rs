//! The surface expression language.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := atom ('^' exponent)*
//! atom    := number | ident | '(' expr ')' | D(expr [, k]) | dot(expr, expr)
//!          | det(expr, ...)
//! ```
//!
//! Numbers are nonnegative rationals written without spaces (`3`, `3/4`).
//! Exponents must be nonnegative integer literals. Identifiers are `x1..xn`,
//! the vector `x`, jet blocks `z1, z2, ...` (`zk` stands for `d^{k-1} x`)
//! and their components `zk_i`, the slots `a1..`, `b1..`, and `g`, `s`,
//! `t`, `y`. `D` is the derivation in force.

mod lower;
mod parse;

use std::fmt;

use crate::algebra::{fmt_q, Q};

pub use lower::{lower, lower_in, parse_rational, parse_univariate, Scope};
pub use parse::parse;

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum Var {
    /// `x_i`, one-based.
    X(u16),
    /// The whole vector `x`.
    XVec,
    /// The jet block `z_k`.
    Z(u16),
    /// Component `i` of `z_k`.
    ZComp(u16, u16),
    A(u16),
    B(u16),
    G,
    S,
    T,
    Y,
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Var::X(i) => write!(f, "x{i}"),
            Var::XVec => f.write_str("x"),
            Var::Z(k) => write!(f, "z{k}"),
            Var::ZComp(k, i) => write!(f, "z{k}_{i}"),
            Var::A(i) => write!(f, "a{i}"),
            Var::B(j) => write!(f, "b{j}"),
            Var::G => f.write_str("g"),
            Var::S => f.write_str("s"),
            Var::T => f.write_str("t"),
            Var::Y => f.write_str("y"),
        }
    }
}

/// Surface syntax tree.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Expr {
    /// A nonnegative rational literal.
    Num(Q),
    Var(Var),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, u32),
    /// `D(e, k)`; printed as `D(e)` when `k = 1`.
    D(Box<Expr>, u32),
    Dot(Box<Expr>, Box<Expr>),
    Det(Vec<Expr>),
}

impl Expr {
    fn prec(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) | Expr::Div(..) => 2,
            Expr::Neg(_) => 3,
            Expr::Pow(..) => 4,
            _ => 5,
        }
    }
}

fn wrap(f: &mut fmt::Formatter<'_>, e: &Expr, parens: bool) -> fmt::Result {
    if parens {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = self.prec();
        let binary = |f: &mut fmt::Formatter<'_>, a: &Expr, op: &str, b: &Expr| {
            wrap(f, a, a.prec() < p)?;
            f.write_str(op)?;
            wrap(f, b, b.prec() <= p)
        };
        match self {
            Expr::Num(q) => f.write_str(&fmt_q(q)),
            Expr::Var(v) => write!(f, "{v}"),
            Expr::Neg(e) => {
                f.write_str("-")?;
                wrap(f, e, e.prec() < p)
            }
            Expr::Add(a, b) => binary(f, a, " + ", b),
            Expr::Sub(a, b) => binary(f, a, " - ", b),
            Expr::Mul(a, b) => binary(f, a, "*", b),
            // spaced so that `1 / 2` does not read back as the literal 1/2
            Expr::Div(a, b) => binary(f, a, " / ", b),
            Expr::Pow(a, e) => {
                wrap(f, a, a.prec() < 5)?;
                write!(f, "^{e}")
            }
            Expr::D(e, 1) => write!(f, "D({e})"),
            Expr::D(e, k) => write!(f, "D({e},{k})"),
            Expr::Dot(a, b) => write!(f, "dot({a}, {b})"),
            Expr::Det(cols) => {
                f.write_str("det(")?;
                for (i, c) in cols.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{c}")?;
                }
                f.write_str(")")
            }
        }
    }
}
