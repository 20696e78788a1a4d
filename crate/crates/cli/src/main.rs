use std::collections::BTreeSet;
use std::io::Read;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use placeq::acceptance::{run_suite, DEFAULT_SEED};
use placeq::ast::{Formula, Place};
use placeq::combine::{decide, eliminate, witness, Signature, DEFAULT_MAX_BLOCK};
use placeq::gadgets::{self, GadgetKind};
use placeq::interpret::{to_one_sorted, translate, TranslationDirection};
use placeq::oracle::{eval_bounded, eval_qf, Assignment, GridConfig};
use placeq::parser::parse;
use placeq::{Error, Result};

#[derive(Parser)]
#[command(name = "placeq", version, about = "Decide and eliminate quantifiers over the rationals with p-adic and real absolute values")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    #[command(flatten)]
    opts: Opts,
}

#[derive(Args)]
struct Opts {
    /// Places with L, e.g. "2,3,inf". Defaults to the places of the input.
    #[arg(long, global = true)]
    places: Option<String>,
    /// Finite places that also have M and Q. Defaults to every finite place.
    #[arg(long = "m-places", global = true)]
    m_places: Option<String>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[arg(long, global = true, env = "PLACEQ_SEED", default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long, global = true, default_value_t = 1000)]
    samples: usize,
    /// Search bound for the grid oracle.
    #[arg(long, global = true, default_value_t = 50)]
    bound: u64,
    #[arg(long = "max-block", global = true, default_value_t = DEFAULT_MAX_BLOCK)]
    max_block: usize,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

/// Formula text; `-` or nothing reads stdin, `@path` reads a file.
#[derive(Args)]
struct Input {
    input: Option<String>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Decide a sentence.
    Decide(Input),
    /// Print a quantifier-free equivalent.
    Eliminate(Input),
    /// Evaluate under an assignment.
    Eval {
        #[arg(long)]
        assign: String,
        #[command(flatten)]
        input: Input,
    },
    /// Values for the leading existential variables of a true sentence.
    Witness(Input),
    Translate {
        #[arg(long, value_parser = ["two-sorted", "one-sorted", "order", "L"])]
        to: String,
        #[command(flatten)]
        input: Input,
    },
    /// Print a definability formula.
    Gadget {
        #[arg(value_parser = ["order", "nonneg", "mult"])]
        kind: String,
        #[arg(long)]
        verify: bool,
    },
    /// Run the acceptance suite.
    Selftest,
}

fn read_input(input: &Input) -> Result<String> {
    let io = |e: std::io::Error| Error::Precondition(format!("cannot read input: {}", e));
    match input.input.as_deref() {
        None | Some("-") => {
            let mut s = String::new();
            std::io::stdin().read_to_string(&mut s).map_err(io)?;
            Ok(s)
        }
        Some(arg) => match arg.strip_prefix('@') {
            Some(path) => std::fs::read_to_string(path).map_err(io),
            None => Ok(arg.to_string()),
        },
    }
}

fn place_list(text: &str) -> Result<BTreeSet<Place>> {
    text.split(',').map(str::trim).filter(|s| !s.is_empty()).map(str::parse).collect()
}

fn m_place_list(text: &str) -> Result<BTreeSet<u64>> {
    let mut out = BTreeSet::new();
    for p in place_list(text)? {
        match p.prime() {
            Some(q) => out.insert(q),
            None => return Err(Error::Signature("M and Q places must be finite".into())),
        };
    }
    Ok(out)
}

impl Opts {
    fn declared_places(&self) -> Result<Option<BTreeSet<Place>>> {
        self.places.as_deref().map(place_list).transpose()
    }

    fn signature(&self, f: &Formula) -> Result<Signature> {
        let s0 = self.declared_places()?.unwrap_or_else(|| f.places());
        match &self.m_places {
            Some(m) => Signature::new(s0, m_place_list(m)?),
            None => Ok(Signature::full(s0)),
        }
    }

    fn parse(&self, input: &Input) -> Result<Formula> {
        let text = read_input(input)?;
        parse(&text, self.declared_places()?.as_ref())
    }

    fn emit_formula(&self, f: &Formula) -> String {
        match self.format {
            Format::Text => f.to_string(),
            Format::Json => json!({ "formula": f.to_string() }).to_string(),
        }
    }

    fn emit_verdict(&self, b: bool) -> String {
        match self.format {
            Format::Text => b.to_string(),
            Format::Json => json!({ "verdict": b }).to_string(),
        }
    }
}

fn run(cli: &Cli) -> Result<(String, bool)> {
    let o = &cli.opts;
    let out = match &cli.cmd {
        Cmd::Decide(input) => {
            let f = o.parse(input)?;
            o.emit_verdict(decide(&f, &o.signature(&f)?, o.max_block)?)
        }
        Cmd::Eliminate(input) => {
            let f = o.parse(input)?;
            let sig = o.signature(&f)?;
            let g = eliminate(&f, &sig, o.max_block)?;
            let g = to_one_sorted(&g, Some(&sig.s1)).unwrap_or(g);
            o.emit_formula(&g)
        }
        Cmd::Eval { assign, input } => {
            let f = o.parse(input)?;
            let a = Assignment::parse(assign, &f.free_vars())?;
            let b = if f.is_quantifier_free() {
                eval_qf(&f, &a)?
            } else {
                eval_bounded(&f, &a, &GridConfig::with_bound(o.bound))?
            };
            o.emit_verdict(b)
        }
        Cmd::Witness(input) => {
            let f = o.parse(input)?;
            let w = witness(&f, &o.signature(&f)?, o.max_block)?.to_json();
            match o.format {
                Format::Text => w.to_string(),
                Format::Json => json!({ "witness": w }).to_string(),
            }
        }
        Cmd::Translate { to, input } => {
            let f = o.parse(input)?;
            let dir: TranslationDirection = to.parse()?;
            let m = o.m_places.as_deref().map(m_place_list).transpose()?;
            o.emit_formula(&translate(&f, dir, m.as_ref())?)
        }
        Cmd::Gadget { kind, verify } => {
            let kind: GadgetKind = kind.parse()?;
            let f = gadgets::emit(kind);
            if *verify {
                let rep = gadgets::verify(kind, o.samples, o.seed)?;
                let text = match &rep.counterexample {
                    None => format!("{}\nverified on {} samples", f, rep.samples),
                    Some(a) => format!("{}\ncounterexample at {}", f, a.to_json()),
                };
                let text = match o.format {
                    Format::Text => text,
                    Format::Json => json!({
                        "formula": f.to_string(),
                        "samples": rep.samples,
                        "counterexample": rep.counterexample.as_ref().map(Assignment::to_json),
                    })
                    .to_string(),
                };
                return Ok((text, rep.passed()));
            }
            o.emit_formula(&f)
        }
        Cmd::Selftest => {
            let reports = run_suite(o.seed, &mut |t| println!("{}", t.line()));
            let passed = reports.iter().filter(|t| t.passed()).count();
            return Ok((format!("{}/{} criteria passed", passed, reports.len()), passed == reports.len()));
        }
    };
    Ok((out, true))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok((out, ok)) => {
            println!("{}", out);
            ExitCode::from(if ok { 0 } else { 1 })
        }
        Err(e) => {
            eprintln!("error: {}", e);
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
