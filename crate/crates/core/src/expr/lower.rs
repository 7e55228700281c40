use super::{parse, Expr, Var};
use crate::algebra::{DiffRational, Indet, VarKey};
use crate::error::{Error, Result};
use crate::eval::UniRational;
use crate::wronskian::JetMatrix;

/// What the variables of an expression may refer to.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub struct Scope {
    /// The dimension; vectors (`x`, `zk`) need it and `x_i` must have
    /// `i <= n` when it is set.
    pub n: Option<usize>,
}

impl Scope {
    pub fn dim(n: usize) -> Self {
        Scope { n: Some(n) }
    }
}

enum Value {
    Scalar(DiffRational),
    Vector(Vec<DiffRational>),
}

fn type_err(msg: &str) -> Error {
    Error::Type(msg.to_string())
}

impl Value {
    fn scalar(self) -> Result<DiffRational> {
        match self {
            Value::Scalar(f) => Ok(f),
            Value::Vector(_) => Err(type_err("expected a scalar, found a vector")),
        }
    }

    fn vector(self) -> Result<Vec<DiffRational>> {
        match self {
            Value::Vector(v) => Ok(v),
            Value::Scalar(_) => Err(type_err("expected a vector, found a scalar")),
        }
    }

    fn map(self, f: impl Fn(DiffRational) -> Result<DiffRational>) -> Result<Value> {
        Ok(match self {
            Value::Scalar(s) => Value::Scalar(f(s)?),
            Value::Vector(v) => Value::Vector(v.into_iter().map(f).collect::<Result<_>>()?),
        })
    }
}

fn coordinate(scope: Scope, i: u16, order: u32) -> Result<DiffRational> {
    if let Some(n) = scope.n {
        if i as usize > n {
            return Err(Error::UnknownVariable(format!("x{i}")));
        }
    }
    Ok(DiffRational::x(i as usize, order))
}

fn block(scope: Scope, order: u32) -> Result<Value> {
    let n = scope.n.ok_or_else(|| type_err("vector variables need a dimension"))?;
    Ok(Value::Vector((1..=n).map(|i| DiffRational::x(i, order)).collect()))
}

fn var(scope: Scope, v: Var) -> Result<Value> {
    let other = |i: Indet| Ok(Value::Scalar(DiffRational::var(VarKey::new(i, 0))));
    match v {
        Var::X(i) => Ok(Value::Scalar(coordinate(scope, i, 0)?)),
        Var::XVec => block(scope, 0),
        Var::Z(k) => block(scope, k as u32 - 1),
        Var::ZComp(k, i) => Ok(Value::Scalar(coordinate(scope, i, k as u32 - 1)?)),
        Var::A(i) => other(Indet::A(i)),
        Var::B(j) => other(Indet::B(j)),
        Var::G => other(Indet::G),
        Var::S => other(Indet::S),
        Var::T => other(Indet::T),
        Var::Y => other(Indet::Y),
    }
}

fn zip(a: Value, b: Value, f: impl Fn(&DiffRational, &DiffRational) -> DiffRational) -> Result<Value> {
    match (a, b) {
        (Value::Scalar(a), Value::Scalar(b)) => Ok(Value::Scalar(f(&a, &b))),
        (Value::Vector(a), Value::Vector(b)) if a.len() == b.len() => {
            Ok(Value::Vector(a.iter().zip(&b).map(|(x, y)| f(x, y)).collect()))
        }
        _ => Err(type_err("mismatched operands")),
    }
}

fn value(e: &Expr, scope: Scope) -> Result<Value> {
    Ok(match e {
        Expr::Num(q) => Value::Scalar(DiffRational::constant(q.clone())),
        Expr::Var(v) => var(scope, *v)?,
        Expr::Neg(a) => value(a, scope)?.map(|x| Ok(-x))?,
        Expr::Add(a, b) => zip(value(a, scope)?, value(b, scope)?, |x, y| x + y)?,
        Expr::Sub(a, b) => zip(value(a, scope)?, value(b, scope)?, |x, y| x - y)?,
        Expr::Mul(a, b) => match (value(a, scope)?, value(b, scope)?) {
            (Value::Scalar(a), Value::Scalar(b)) => Value::Scalar(a * b),
            (Value::Scalar(s), v @ Value::Vector(_)) | (v @ Value::Vector(_), Value::Scalar(s)) => {
                v.map(|x| Ok(&x * &s))?
            }
            _ => return Err(type_err("use dot(a, b) to multiply vectors")),
        },
        Expr::Div(a, b) => {
            let d = value(b, scope)?.scalar()?;
            if d.is_zero() {
                return Err(Error::DivisionByZero);
            }
            value(a, scope)?.map(|x| x.checked_div(&d))?
        }
        Expr::Pow(a, k) => Value::Scalar(value(a, scope)?.scalar()?.pow(*k as i32)),
        Expr::D(a, k) => value(a, scope)?.map(|mut x| {
            for _ in 0..*k {
                x = x.derive();
            }
            Ok(x)
        })?,
        Expr::Dot(a, b) => {
            let (a, b) = (value(a, scope)?.vector()?, value(b, scope)?.vector()?);
            if a.len() != b.len() {
                return Err(Error::DimensionMismatch { expected: a.len(), found: b.len() });
            }
            Value::Scalar(DiffRational::sum(a.iter().zip(&b).map(|(x, y)| x * y)))
        }
        Expr::Det(cols) => {
            let cols = cols.iter().map(|c| value(c, scope)?.vector()).collect::<Result<Vec<_>>>()?;
            let m = cols.len();
            if let Some(c) = cols.iter().find(|c| c.len() != m) {
                return Err(Error::DimensionMismatch { expected: m, found: c.len() });
            }
            let rows = (0..m).map(|i| cols.iter().map(|c| c[i].clone()).collect()).collect();
            Value::Scalar(JetMatrix::new(rows)?.det())
        }
    })
}

/// Lower a scalar expression to a rational function.
pub fn lower_in(e: &Expr, scope: Scope) -> Result<DiffRational> {
    value(e, scope)?.scalar()
}

/// Lower a scalar expression in dimension `n`.
pub fn lower(e: &Expr, n: usize) -> Result<DiffRational> {
    lower_in(e, Scope::dim(n))
}

/// Parse and lower in dimension `n`.
pub fn parse_rational(text: &str, n: usize) -> Result<DiffRational> {
    lower(&parse(text)?, n)
}

fn univariate(e: &Expr) -> Result<UniRational> {
    Ok(match e {
        Expr::Num(q) => UniRational::constant(q.clone()),
        Expr::Var(Var::T) => UniRational::t(),
        Expr::Var(v) => return Err(Error::UnknownVariable(v.to_string())),
        Expr::Neg(a) => univariate(a)?.neg(),
        Expr::Add(a, b) => univariate(a)?.add(&univariate(b)?),
        Expr::Sub(a, b) => univariate(a)?.sub(&univariate(b)?),
        Expr::Mul(a, b) => univariate(a)?.mul(&univariate(b)?),
        Expr::Div(a, b) => univariate(a)?.div(&univariate(b)?)?,
        Expr::Pow(a, k) => univariate(a)?.pow(*k as i32)?,
        Expr::D(a, k) => (0..*k).fold(univariate(a)?, |acc, _| acc.derive()),
        Expr::Dot(..) | Expr::Det(..) => return Err(type_err("curve coordinates are scalar functions of t")),
    })
}

/// Parse a rational function of the parameter `t`.
pub fn parse_univariate(text: &str) -> Result<UniRational> {
    univariate(&parse(text)?)
}
