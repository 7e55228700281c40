use std::fmt;

use super::{evaluate_term, jets_of_curve, required_order, CurveSpec};
use crate::algebra::{fmt_q, Q};
use crate::error::{Error, Result};
use crate::groups::GroupSpec;

/// The values at `t0` of the group's generators read under
/// `delta = p^{-1} d`: first `W^delta_i / W^delta`, then `phi_j^delta`.
pub fn invariant_signature(c: &CurveSpec, t0: &Q, group: &GroupSpec) -> Result<Vec<Q>> {
    if c.dim() != group.n() {
        return Err(Error::DimensionMismatch { expected: group.n(), found: c.dim() });
    }
    let gens = group.delta_generators()?;
    let mut order = 0;
    for t in gens.iter().chain(group.guards()?.iter().map(|(_, t)| t)) {
        order = order.max(required_order(t)?);
    }
    let point = jets_of_curve(c, t0, order)?;
    group.check_guards(&point)?;
    gens.iter()
        .map(|t| {
            evaluate_term(t, &point).map_err(|e| match e {
                Error::ZeroDenominator => Error::Degenerate("a generator has a pole at the evaluation point".into()),
                e => e,
            })
        })
        .collect()
}

/// The outcome of comparing two signatures.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Verdict {
    pub first: Vec<Q>,
    pub second: Vec<Q>,
    /// Zero-based positions where the signatures differ.
    pub differing: Vec<usize>,
}

impl Verdict {
    pub fn equal(&self) -> bool {
        self.differing.is_empty()
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |v: &[Q]| v.iter().map(fmt_q).collect::<Vec<_>>().join(", ");
        if self.equal() {
            write!(f, "signatures-equal\n  [{}]", list(&self.first))
        } else {
            let idx: Vec<String> = self.differing.iter().map(|i| i.to_string()).collect();
            write!(
                f,
                "signatures-differ at indices [{}]\n  first:  [{}]\n  second: [{}]",
                idx.join(", "),
                list(&self.first),
                list(&self.second)
            )
        }
    }
}

/// Compare the signatures of `c1` at `t01` and `c2` at `t02`.
pub fn equivalence_check(c1: &CurveSpec, t01: &Q, c2: &CurveSpec, t02: &Q, group: &GroupSpec) -> Result<Verdict> {
    let first = invariant_signature(c1, t01, group)?;
    let second = invariant_signature(c2, t02, group)?;
    let differing = first.iter().zip(&second).enumerate().filter(|(_, (a, b))| a != b).map(|(i, _)| i).collect();
    Ok(Verdict { first, second, differing })
}
