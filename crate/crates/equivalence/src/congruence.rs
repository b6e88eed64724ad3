use cqp_lang::{check_ownership, Diagnostic, Process, Program};
use semantics::{explore, EnvironmentSchedule, Limits};

use crate::bisim::{check_pbb, Verdict};
use crate::EquivalenceError;

/// Name of the placeholder call marking the hole of a context.
pub const HOLE: &str = "Hole";

pub fn hole() -> Process {
    Process::Call(HOLE.to_string(), Vec::new())
}

fn is_hole(p: &Process) -> bool {
    matches!(p, Process::Call(n, args) if n == HOLE && args.is_empty())
}

/// Replaces every hole in `context` by `filler`. Holes under an input prefix
/// or a qubit/number-state declaration are rejected.
pub fn plug(context: &Process, filler: &Process) -> Result<Process, EquivalenceError> {
    fn go(p: &Process, filler: &Process, found: &mut bool) -> Result<Process, EquivalenceError> {
        if is_hole(p) {
            *found = true;
            return Ok(filler.clone());
        }
        let mut inner = |q: &Process| go(q, filler, found).map(Box::new);
        Ok(match p {
            Process::Nil | Process::Call(..) => p.clone(),
            Process::Par(a, b) => Process::Par(inner(a)?, inner(b)?),
            Process::Sum(a, b) => Process::Sum(inner(a)?, inner(b)?),
            Process::Output { chan, payload, cont } => {
                Process::Output { chan: chan.clone(), payload: payload.clone(), cont: inner(cont)? }
            }
            Process::Action(e, cont) => Process::Action(e.clone(), inner(cont)?),
            Process::New(c, t, cont) => Process::New(c.clone(), t.clone(), inner(cont)?),
            Process::Input { cont, .. } => {
                if contains_hole(cont) {
                    return Err(EquivalenceError::InputContext);
                }
                p.clone()
            }
            Process::QbitDecl(_, cont) | Process::NsDecl(_, cont) => {
                if contains_hole(cont) {
                    return Err(EquivalenceError::DeclarationContext);
                }
                p.clone()
            }
        })
    }
    let mut found = false;
    let out = go(context, filler, &mut found)?;
    if found {
        Ok(out)
    } else {
        Err(EquivalenceError::NoHole)
    }
}

fn contains_hole(p: &Process) -> bool {
    match p {
        _ if is_hole(p) => true,
        Process::Nil | Process::Call(..) => false,
        Process::Par(a, b) | Process::Sum(a, b) => contains_hole(a) || contains_hole(b),
        Process::Input { cont, .. }
        | Process::Output { cont, .. }
        | Process::Action(_, cont)
        | Process::QbitDecl(_, cont)
        | Process::NsDecl(_, cont)
        | Process::New(_, _, cont) => contains_hole(cont),
    }
}

fn in_context(program: &Program, context: &Process) -> Result<Program, EquivalenceError> {
    let plugged = Program { definitions: program.definitions.clone(), entry: plug(context, &program.entry)? };
    let diags: Vec<Diagnostic> = check_ownership(&plugged);
    if !diags.is_empty() {
        return Err(EquivalenceError::Untypable(diags));
    }
    Ok(plugged)
}

/// Checks C[P] against C[Q] for each context. The environment additionally
/// reads every free channel of the context.
pub fn congruence_spot_check(
    p: &Program,
    q: &Program,
    contexts: &[Process],
    env: &EnvironmentSchedule,
    limits: Limits,
    tol: f64,
) -> Result<Vec<Verdict>, EquivalenceError> {
    contexts
        .iter()
        .map(|c| {
            let (cp, cq) = (in_context(p, c)?, in_context(q, c)?);
            let mut env = env.clone();
            env.reads.extend(c.free_vars());
            let ga = explore(&cp, &env, limits)?;
            let gb = explore(&cq, &env, limits)?;
            Ok(check_pbb(&ga, &gb, tol))
        })
        .collect()
}
