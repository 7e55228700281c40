//! Exact evaluation at points of jet space.
//!
//! Identities too large to expand are checked by evaluating both sides at
//! random rational points. Reinterpretation under `q^{-1} d` is evaluated
//! through truncated Taylor series: the jets at a point determine a series,
//! and `delta^k` of a series is computed by repeated differentiation and
//! division by the series of `q`.

mod curve;
mod series;
mod signature;
mod term;
mod verify;

use std::collections::BTreeMap;
use std::fmt;

use rand::Rng;

use crate::algebra::{fmt_q, DiffRational, Indet, VarKey, Q};
use crate::error::{Error, Result};

pub use curve::{jets_of_curve, CurveSpec, UniPoly, UniRational};
pub use series::{poly_on_series, rational_on_series, Series};
pub use signature::{equivalence_check, invariant_signature, Verdict};
pub use term::{evaluate_term, materialize, required_order, series_of_term, Term, TermSpec};
pub use verify::{verify_identity, verify_with, Case, Mode, Options, Report, Status, Witness};

/// Values for jet variables.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct Assignment(BTreeMap<VarKey, Q>);

impl Assignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, v: VarKey, value: Q) {
        self.0.insert(v, value);
    }

    pub fn get(&self, v: VarKey) -> Option<&Q> {
        self.0.get(&v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (VarKey, &Q)> {
        self.0.iter().map(|(k, v)| (*k, v))
    }

    /// The values `v, dv, d^2 v, ...` up to the first missing order.
    pub fn jets_of(&self, v: Indet) -> Vec<Q> {
        (0..).map_while(|k| self.0.get(&v.jet(k)).cloned()).collect()
    }

    /// Assign all jets `d^k v` with `k <= order` for the listed
    /// indeterminates, numerators in `-9..=9` and denominators in `1..=6`.
    pub fn random(rng: &mut impl Rng, indets: impl IntoIterator<Item = Indet>, order: u32) -> Self {
        let mut a = Assignment::new();
        for v in indets {
            for k in 0..=order {
                a.insert(v.jet(k), Q::new(rng.gen_range(-9i64..=9).into(), rng.gen_range(1i64..=6).into()));
            }
        }
        a
    }
}

impl FromIterator<(VarKey, Q)> for Assignment {
    fn from_iter<I: IntoIterator<Item = (VarKey, Q)>>(iter: I) -> Self {
        Assignment(iter.into_iter().collect())
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (k, v)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{k}: {}", fmt_q(v))?;
        }
        f.write_str("}")
    }
}

/// The value of `f` at a point.
pub fn evaluate(f: &DiffRational, a: &Assignment) -> Result<Q> {
    f.evaluate_with(&mut |v| a.get(v).cloned().ok_or(Error::Unassigned(v)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{q, qi};
    use crate::wronskian::wronskian;

    #[test]
    fn evaluate_examples() {
        let f = &DiffRational::x(1, 1) / &DiffRational::g(0);
        let a: Assignment = [(VarKey::x(1, 1), qi(3)), (VarKey::g(0), qi(2))].into_iter().collect();
        assert_eq!(evaluate(&f, &a).unwrap(), q(3, 2));

        let curve = CurveSpec::parse_coords(&["t", "t^2"]).unwrap();
        let w: DiffRational = wronskian(2).unwrap().into();
        for t0 in [qi(0), q(5, 3), qi(-2)] {
            assert_eq!(evaluate(&w, &jets_of_curve(&curve, &t0, 2).unwrap()).unwrap(), qi(2));
        }

        let zero: Assignment = [(VarKey::x(1, 1), qi(3)), (VarKey::g(0), qi(0))].into_iter().collect();
        assert_eq!(evaluate(&f, &zero), Err(Error::ZeroDenominator));
        assert!(matches!(evaluate(&f, &Assignment::new()), Err(Error::Unassigned(_))));
    }
}
