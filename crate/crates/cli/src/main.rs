mod report;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use diffinv::actions::{act_affine, reinterpret, AffineMap, DerivationSpec};
use diffinv::algebra::{fmt_q, DiffRational, Q};
use diffinv::eval::{equivalence_check, invariant_signature, CurveSpec, Mode, Options, Report};
use diffinv::expr::{lower_in, parse, Scope};
use diffinv::groups::{load_catalog, resolve, GroupSpec};
use diffinv::identities::{self, Identity};
use diffinv::invariants::gl_generators;
use diffinv::Error;

/// Differential rational invariants of affine subgroups under
/// reparametrization.
#[derive(Parser)]
#[command(name = "diffinv", version)]
struct Cli {
    /// TOML file with additional `[[group]]` definitions.
    #[arg(long, global = true)]
    catalog: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Apply the derivation `k` times.
    Derive {
        expr: String,
        #[arg(long, default_value_t = 1)]
        k: u32,
        #[arg(long)]
        n: Option<usize>,
    },
    /// Substitute `x -> h x + h0`.
    Act {
        expr: String,
        /// Rows separated by `;`, entries by `,`, e.g. `2,0;0,3`.
        #[arg(long)]
        h: String,
        /// Entries separated by `,`; zero when omitted.
        #[arg(long)]
        h0: Option<String>,
    },
    /// Read an expression under `g^{-1} d` or `p^{-1} d`.
    Reparam {
        expr: String,
        #[arg(long, conflicts_with = "g", required_unless_present = "g")]
        p: Option<String>,
        #[arg(long)]
        g: bool,
        #[arg(long)]
        n: Option<usize>,
    },
    /// Print a constructed invariant.
    Invariant {
        which: InvariantKind,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        group: Option<String>,
        /// Print the function of the jets of `x` instead of the slot form.
        #[arg(long)]
        expand: bool,
    },
    /// Check an identity: eq2, eq3, eq4, minor-law J, weight NAME,
    /// normalization NAME, phi K, theorem2, example3, example4, group NAME
    /// (generator invariance and the pbar relation of a group) or all.
    Verify {
        #[arg(required = true, num_args = 1..=2)]
        identity: Vec<String>,
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value_t = ModeArg::Auto)]
        mode: ModeArg,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        json: bool,
    },
    /// Values of the normalized generators of a group on a curve.
    Signature {
        curve: PathBuf,
        #[arg(long)]
        t0: String,
        #[arg(long)]
        group: String,
        #[arg(long)]
        json: bool,
    },
    /// Compare the signatures of two curves.
    Equiv {
        curve1: PathBuf,
        curve2: PathBuf,
        #[arg(long)]
        t01: String,
        #[arg(long)]
        t02: String,
        #[arg(long)]
        group: String,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum InvariantKind {
    P1,
    P2,
    P,
    PRatio,
    GlGens,
    GroupGens,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Symbolic,
    Eval,
    Auto,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Symbolic => Mode::Symbolic,
            ModeArg::Eval => Mode::Eval,
            ModeArg::Auto => Mode::Auto,
        }
    }
}

/// Failures that map to exit code 1 rather than a usage error.
enum Failure {
    Usage(String),
    Check(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Degenerate(_) => Failure::Check(e.to_string()),
            e => Failure::Usage(e.to_string()),
        }
    }
}

type Outcome = std::result::Result<bool, Failure>;

fn rational(s: &str) -> Result<Q, Failure> {
    s.trim().parse::<Q>().map_err(|_| Failure::Usage(format!("`{s}` is not a rational number")))
}

fn vector(s: &str) -> Result<Vec<Q>, Failure> {
    s.split(',').map(rational).collect()
}

fn expression(text: &str, n: Option<usize>) -> Result<DiffRational, Failure> {
    Ok(lower_in(&parse(text)?, Scope { n })?)
}

fn read(path: &PathBuf) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn curve(path: &PathBuf) -> Result<CurveSpec, Failure> {
    Ok(CurveSpec::parse(&read(path)?)?)
}

fn catalog(path: &Option<PathBuf>) -> Result<Vec<GroupSpec>, Failure> {
    match path {
        Some(p) => Ok(load_catalog(&read(p)?)?),
        None => Ok(Vec::new()),
    }
}

fn group_for(name: &str, n: usize, cat: &[GroupSpec]) -> Result<GroupSpec, Failure> {
    Ok(resolve(name, n, cat)?)
}

fn verify(words: &[String], n: usize, opts: &Options, json: bool, cat: &[GroupSpec]) -> Outcome {
    let text = words.join(" ");
    let reports: Vec<Report> = if words[0] == "group" {
        let name = words.get(1).ok_or_else(|| Failure::Usage("`group` needs a group name".into()))?;
        let g = group_for(name, n, cat)?;
        let mut out: Vec<Report> = identities::pbar_relation(&g, opts)?.into_iter().collect();
        out.extend(identities::group_invariance(&g, 50, 20, opts.seed)?);
        out
    } else if text == "all" {
        let mut out = Vec::new();
        for id in identities::all(n) {
            out.extend(identities::run(&id, n, opts)?);
        }
        out.extend(identities::catalog_invariance(n, opts.seed)?);
        out
    } else {
        let id: Identity = text.parse()?;
        identities::run(&id, n, opts)?
    };
    for r in &reports {
        if json {
            println!("{}", report::verify_json(r, n));
        } else {
            println!("{r}");
        }
    }
    Ok(reports.iter().all(Report::passed))
}

fn signature_names(group: &GroupSpec) -> Vec<String> {
    let mut names: Vec<String> = (1..=group.n()).map(|i| format!("W{i}/W")).collect();
    names.extend((1..=group.phi().len()).map(|j| format!("phi{j}")));
    names
}

fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Derive { expr, k, n } => {
            let mut f = expression(&expr, n)?;
            for _ in 0..k {
                f = f.derive();
            }
            println!("{f}");
        }
        Command::Act { expr, h, h0 } => {
            let rows = h.split(';').map(vector).collect::<Result<Vec<_>, _>>()?;
            let n = rows.len();
            let h0 = match h0 {
                Some(v) => vector(&v)?,
                None => vec![Q::from_integer(0.into()); n],
            };
            let m = AffineMap::new(rows, h0)?;
            println!("{}", act_affine(&expression(&expr, Some(n))?, &m)?);
        }
        Command::Reparam { expr, p, g: _, n } => {
            let spec = match p {
                Some(p) => DerivationSpec::p(expression(&p, n)?)?,
                None => DerivationSpec::G,
            };
            println!("{}", reinterpret(&expression(&expr, n)?, &spec));
        }
        Command::Invariant { which, n, group, expand } => {
            let show = |name: &str, f: &DiffRational| println!("{name} = {f}");
            let name = match which {
                InvariantKind::P1 => Some("p1"),
                InvariantKind::P2 => Some("p2"),
                InvariantKind::P => Some("p"),
                InvariantKind::PRatio => Some("p-ratio"),
                _ => None,
            };
            if let Some(name) = name {
                let f = identities::invariant(name, n)?;
                if expand {
                    show(name, &f.expr()?);
                } else {
                    show(name, f.slots());
                    println!("  weight {}, with a_i = W_i/W", f.weight());
                }
            } else if let InvariantKind::GlGens = which {
                for (i, f) in gl_generators(n)?.iter().enumerate() {
                    show(&format!("W{}/W", i + 1), f);
                }
            } else {
                let name = group.ok_or_else(|| Failure::Usage("group-gens needs --group".into()))?;
                let g = group_for(&name, n, &catalog(&cli.catalog)?)?;
                for (label, f) in signature_names(&g).iter().zip(g.h_generators()?) {
                    show(label, &f);
                }
                println!("p = {}", g.p().slots());
                if let Some(pbar) = g.pbar() {
                    println!("pbar = {pbar}");
                }
            }
        }
        Command::Verify { identity, n, mode, trials, seed, json } => {
            let opts = Options { mode: mode.into(), trials, seed, ..Options::default() };
            return verify(&identity, n, &opts, json, &catalog(&cli.catalog)?);
        }
        Command::Signature { curve: path, t0, group, json } => {
            let c = curve(&path)?;
            let t0 = rational(&t0)?;
            let g = group_for(&group, c.dim(), &catalog(&cli.catalog)?)?;
            let values = invariant_signature(&c, &t0, &g)?;
            if json {
                println!("{}", report::signature_json(&g, &t0, &signature_names(&g), &values));
            } else {
                for (name, v) in signature_names(&g).iter().zip(&values) {
                    println!("{name}^delta = {}", fmt_q(v));
                }
            }
        }
        Command::Equiv { curve1, curve2, t01, t02, group, json } => {
            let (c1, c2) = (curve(&curve1)?, curve(&curve2)?);
            let g = group_for(&group, c1.dim(), &catalog(&cli.catalog)?)?;
            let v = equivalence_check(&c1, &rational(&t01)?, &c2, &rational(&t02)?, &g)?;
            if json {
                println!("{}", report::verdict_json(&g, &v));
            } else {
                println!("{v}");
            }
            return Ok(v.equal());
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Check(msg)) => {
            eprintln!("diffinv: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("diffinv: {msg}");
            ExitCode::from(2)
        }
    }
}
