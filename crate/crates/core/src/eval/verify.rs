use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::term::{evaluate_term, materialize, required_order, Term};
use super::Assignment;
use crate::algebra::{eq_rational, Q};
use crate::error::{Error, Result};

/// How an identity is checked.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum Mode {
    /// Expand both sides and compare exactly.
    Symbolic,
    /// Compare exact values at random points.
    Eval,
    /// Symbolic while the expansion stays within budget, evaluation after.
    Auto,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Symbolic => "symbolic",
            Mode::Eval => "eval",
            Mode::Auto => "auto",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Options {
    pub mode: Mode,
    pub trials: usize,
    pub seed: u64,
    /// Largest expansion, in polynomial terms, symbolic mode may build.
    pub budget: usize,
}

impl Default for Options {
    fn default() -> Self {
        Options { mode: Mode::Auto, trials: 5, seed: 0, budget: 4_000 }
    }
}

impl Options {
    pub fn eval(trials: usize, seed: u64) -> Self {
        Options { mode: Mode::Eval, trials, seed, ..Default::default() }
    }

    pub fn symbolic() -> Self {
        Options { mode: Mode::Symbolic, ..Default::default() }
    }
}

/// One instance of an identity: both sides plus labels describing any
/// random choices (such as a group element) made to build it.
#[derive(Clone, Debug)]
pub struct Case {
    pub lhs: Term,
    pub rhs: Term,
    pub labels: Vec<(String, String)>,
}

impl Case {
    pub fn new(lhs: impl Into<Term>, rhs: impl Into<Term>) -> Self {
        Case { lhs: lhs.into(), rhs: rhs.into(), labels: Vec::new() }
    }

    pub fn label(mut self, key: &str, value: impl fmt::Display) -> Self {
        self.labels.push((key.to_string(), value.to_string()));
        self
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Status {
    Pass,
    Fail,
    Error(String),
}

impl Status {
    pub fn as_str(&self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Error(_) => "error",
        }
    }
}

/// The point at which an evaluation-mode check failed.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Witness {
    pub trial: usize,
    pub assignment: Assignment,
    pub lhs: Q,
    pub rhs: Q,
    pub labels: Vec<(String, String)>,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Report {
    pub identity: String,
    /// The mode that produced the verdict (never [`Mode::Auto`]).
    pub mode: Mode,
    pub trials: usize,
    pub seed: Option<u64>,
    pub status: Status,
    pub witness: Option<Witness>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    pub fn evidence(&self) -> String {
        match (&self.status, self.mode) {
            (Status::Pass, Mode::Symbolic) => "identity holds symbolically".to_string(),
            (Status::Pass, _) => format!("identity holds with evaluation-level evidence ({} trials)", self.trials),
            (Status::Fail, _) => "identity fails".to_string(),
            (Status::Error(e), _) => format!("check aborted: {e}"),
        }
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {} [{}", self.identity, self.status.as_str(), self.mode)?;
        if let Some(seed) = self.seed {
            write!(f, ", trials {}, seed {seed}", self.trials)?;
        }
        write!(f, "] {}", self.evidence())?;
        if let Some(w) = &self.witness {
            write!(f, "\n  trial {}: lhs = {}, rhs = {}", w.trial, w.lhs, w.rhs)?;
            for (k, v) in &w.labels {
                write!(f, "\n  {k} = {v}")?;
            }
            write!(f, "\n  at {}", w.assignment)?;
        }
        Ok(())
    }
}

const RETRIES: usize = 100;

fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

enum Outcome {
    Pass,
    Fail(Box<Witness>),
}

fn run_trial(build: &(dyn Fn(&mut ChaCha8Rng) -> Result<Case> + Sync), seed: u64, trial: usize) -> Result<Outcome> {
    let mut rng = trial_rng(seed, trial);
    let case = build(&mut rng)?;
    let order = required_order(&case.lhs)?.max(required_order(&case.rhs)?);
    let mut indets = case.lhs.indets();
    indets.extend(case.rhs.indets());
    for _ in 0..RETRIES {
        let a = Assignment::random(&mut rng, indets.iter().copied(), order);
        let (l, r) = match (evaluate_term(&case.lhs, &a), evaluate_term(&case.rhs, &a)) {
            (Ok(l), Ok(r)) => (l, r),
            (Err(Error::ZeroDenominator), _) | (_, Err(Error::ZeroDenominator)) => continue,
            (Err(e), _) | (_, Err(e)) => return Err(e),
        };
        if l == r {
            return Ok(Outcome::Pass);
        }
        return Ok(Outcome::Fail(Box::new(Witness { trial, assignment: a, lhs: l, rhs: r, labels: case.labels })));
    }
    Err(Error::RetriesExhausted(RETRIES))
}

fn evaluation_report(
    identity: &str,
    opts: &Options,
    build: &(dyn Fn(&mut ChaCha8Rng) -> Result<Case> + Sync),
) -> Report {
    let outcomes: Vec<Result<Outcome>> =
        (0..opts.trials).into_par_iter().map(|i| run_trial(build, opts.seed, i)).collect();
    let mut report = Report {
        identity: identity.to_string(),
        mode: Mode::Eval,
        trials: opts.trials,
        seed: Some(opts.seed),
        status: Status::Pass,
        witness: None,
    };
    for o in outcomes {
        match o {
            Ok(Outcome::Pass) => {}
            Ok(Outcome::Fail(w)) => {
                report.status = Status::Fail;
                report.witness = Some(*w);
                break;
            }
            Err(e) => {
                report.status = Status::Error(e.to_string());
                break;
            }
        }
    }
    report
}

fn symbolic_check(opts: &Options, build: &(dyn Fn(&mut ChaCha8Rng) -> Result<Case> + Sync)) -> Result<bool> {
    let case = build(&mut trial_rng(opts.seed, 0))?;
    let l = materialize(&case.lhs, opts.budget)?;
    let r = materialize(&case.rhs, opts.budget)?;
    Ok(eq_rational(&l, &r))
}

/// Check an identity whose sides may depend on random choices. `build` is
/// called once per trial with a generator derived from the seed and the
/// trial index, so reports are reproducible and independent of scheduling.
pub fn verify_with(
    identity: &str,
    opts: &Options,
    build: &(dyn Fn(&mut ChaCha8Rng) -> Result<Case> + Sync),
) -> Report {
    let symbolic = |status| Report {
        identity: identity.to_string(),
        mode: Mode::Symbolic,
        trials: 0,
        seed: None,
        status,
        witness: None,
    };
    match opts.mode {
        Mode::Eval => evaluation_report(identity, opts, build),
        Mode::Symbolic => match symbolic_check(opts, build) {
            Ok(true) => symbolic(Status::Pass),
            Ok(false) => symbolic(Status::Fail),
            Err(e) => symbolic(Status::Error(e.to_string())),
        },
        Mode::Auto => match symbolic_check(opts, build) {
            Ok(true) => symbolic(Status::Pass),
            Ok(false) => symbolic(Status::Fail),
            Err(Error::BudgetExceeded(_)) => evaluation_report(identity, opts, build),
            Err(e) => symbolic(Status::Error(e.to_string())),
        },
    }
}

/// Check `lhs = rhs`. Syntactically equal sides pass without any trials.
pub fn verify_identity(lhs: impl Into<Term>, rhs: impl Into<Term>, opts: &Options) -> Report {
    let (lhs, rhs) = (lhs.into(), rhs.into());
    if lhs == rhs {
        return Report {
            identity: "lhs = rhs".to_string(),
            mode: if opts.mode == Mode::Eval { Mode::Eval } else { Mode::Symbolic },
            trials: 0,
            seed: (opts.mode == Mode::Eval).then_some(opts.seed),
            status: Status::Pass,
            witness: None,
        };
    }
    verify_with("lhs = rhs", opts, &|_| Ok(Case::new(lhs.clone(), rhs.clone())))
}
