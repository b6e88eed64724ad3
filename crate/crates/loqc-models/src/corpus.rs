use std::fmt;
use std::str::FromStr;

use cqp_lang::{parse, Expr, Process, Program, Ratio, Unitary};

macro_rules! corpus {
    ($($id:ident => $file:literal),* $(,)?) => {
        /// The processes of the LOQC CNOT study, each shipped as a
        /// self-contained source file whose `Main` instantiates it.
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub enum ModelId {
            $($id),*
        }

        impl ModelId {
            pub const ALL: &'static [ModelId] = &[$(ModelId::$id),*];

            pub fn name(self) -> &'static str {
                match self {
                    $(ModelId::$id => stringify!($id)),*
                }
            }

            pub fn file_name(self) -> &'static str {
                match self {
                    $(ModelId::$id => concat!($file, ".cqp")),*
                }
            }

            pub fn source(self) -> &'static str {
                match self {
                    $(ModelId::$id => include_str!(concat!("../../../models/", $file, ".cqp"))),*
                }
            }
        }
    };
}

corpus! {
    PolSe => "polse",
    BS => "bs",
    Det => "det",
    PDet => "pdet",
    Counter => "counter",
    PolSeCT => "polse_ct",
    CNOT => "cnot",
    MMT => "mmt",
    PSM => "psm",
    OP => "op",
    OPCNOT => "opcnot",
    Output => "output",
    Model1 => "model1",
    Specification1 => "specification1",
    Model2 => "model2",
    Specification2 => "specification2",
}

impl fmt::Display for ModelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let key = s.to_ascii_lowercase().replace(['_', '-'], "");
        ModelId::ALL
            .iter()
            .copied()
            .find(|m| m.name().to_ascii_lowercase() == key || m.file_name().trim_end_matches(".cqp").replace('_', "") == key)
            .ok_or_else(|| format!("unknown model {s}"))
    }
}

/// Parses the shipped source of `model`.
pub fn build(model: ModelId) -> Program {
    parse(model.source()).unwrap_or_else(|e| panic!("corpus file {} does not parse: {e}", model.file_name()))
}

/// Deliberately broken variants of Model1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Mutant {
    /// BS2 reflectivity raised from 1/3 to 1/2.
    Bs2Reflectivity,
    /// BS5 built from the sign-free rotation instead of the beam splitter.
    Bs5SignDropped,
    /// Counter reports coincidence exactly when there is none.
    CounterInverted,
}

impl Mutant {
    pub const ALL: &'static [Mutant] = &[Mutant::Bs2Reflectivity, Mutant::Bs5SignDropped, Mutant::CounterInverted];

    pub fn name(self) -> &'static str {
        match self {
            Mutant::Bs2Reflectivity => "bs2-reflectivity",
            Mutant::Bs5SignDropped => "bs5-sign-dropped",
            Mutant::CounterInverted => "counter-inverted",
        }
    }
}

fn map_process(p: &Process, f: &mut impl FnMut(&Process) -> Option<Process>) -> Process {
    if let Some(q) = f(p) {
        return q;
    }
    let mut go = |q: &Process| Box::new(map_process(q, f));
    match p {
        Process::Nil | Process::Call(..) => p.clone(),
        Process::Par(a, b) => {
            let a = go(a);
            Process::Par(a, go(b))
        }
        Process::Sum(a, b) => {
            let a = go(a);
            Process::Sum(a, go(b))
        }
        Process::Input { chan, binders, cont } => {
            Process::Input { chan: chan.clone(), binders: binders.clone(), cont: go(cont) }
        }
        Process::Output { chan, payload, cont } => {
            Process::Output { chan: chan.clone(), payload: payload.clone(), cont: go(cont) }
        }
        Process::Action(e, cont) => Process::Action(e.clone(), go(cont)),
        Process::QbitDecl(x, cont) => Process::QbitDecl(x.clone(), go(cont)),
        Process::NsDecl(x, cont) => Process::NsDecl(x.clone(), go(cont)),
        Process::New(x, t, cont) => Process::New(x.clone(), t.clone(), go(cont)),
    }
}

/// Replaces the unitary argument of the BS instance whose first input is `first_in`.
fn retune_bs(p: &Process, first_in: &str, u: Unitary) -> Process {
    map_process(p, &mut |q| match q {
        Process::Call(name, args) if name == "BS" && args.first() == Some(&Expr::Var(first_in.into())) => {
            let mut args = args.clone();
            args[4] = Expr::Unitary(u);
            Some(Process::Call(name.clone(), args))
        }
        _ => None,
    })
}

/// Model1 with the given defect.
pub fn mutant(m: Mutant) -> Program {
    let mut prog = build(ModelId::Model1);
    for d in &mut prog.definitions {
        d.body = match (m, d.name.as_str()) {
            (Mutant::Bs2Reflectivity, "CNOT") => retune_bs(&d.body, "c", Unitary::Beam(Ratio { num: 1, den: 2 })),
            (Mutant::Bs5SignDropped, "CNOT") => retune_bs(&d.body, "m", Unitary::Rotation(Ratio { num: 1, den: 2 })),
            (Mutant::CounterInverted, "Counter") => map_process(&d.body, &mut |q| match q {
                Process::Output { chan: Expr::Var(c), payload, cont } if c == "cnt" => {
                    let payload = payload
                        .iter()
                        .map(|e| match e {
                            Expr::If(cond, a, b) => Expr::If(cond.clone(), b.clone(), a.clone()),
                            other => other.clone(),
                        })
                        .collect();
                    Some(Process::Output { chan: Expr::Var(c.clone()), payload, cont: cont.clone() })
                }
                _ => None,
            }),
            _ => continue,
        };
    }
    prog
}
