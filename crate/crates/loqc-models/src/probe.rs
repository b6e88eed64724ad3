use std::collections::BTreeMap;

use cqp_lang::{expand, Expr, Process, Program, Unitary};
use quantum_state::{Complex64, JointState};
use semantics::{explore_process, Limits};

use crate::input::{environment_for, InputStateSpec};
use crate::ModelError;

/// Runtime names of the six modes of the CNOT block: control pair, target
/// pair and the two vacuum ancillas.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CnotRoles {
    pub c1: String,
    pub c2: String,
    pub t1: String,
    pub t2: String,
    pub x1: String,
    pub x2: String,
}

impl CnotRoles {
    pub fn in_order(&self) -> [&str; 6] {
        [&self.c1, &self.c2, &self.t1, &self.t2, &self.x1, &self.x2]
    }
}

fn walk_actions(p: &Process, f: &mut impl FnMut(&Process)) {
    f(p);
    match p {
        Process::Nil | Process::Call(..) => {}
        Process::Par(a, b) | Process::Sum(a, b) => {
            walk_actions(a, f);
            walk_actions(b, f);
        }
        Process::Input { cont, .. }
        | Process::Output { cont, .. }
        | Process::Action(_, cont)
        | Process::QbitDecl(_, cont)
        | Process::NsDecl(_, cont)
        | Process::New(_, _, cont) => walk_actions(cont, f),
    }
}

/// Reads the mode roles off an expanded Model1-style term: the first
/// polarisation conversion yields the control pair, the second the target
/// pair, and the two number-state declarations the ancillas.
pub fn cnot_roles(term: &Process) -> Option<CnotRoles> {
    let mut pairs = Vec::new();
    let mut vacua = Vec::new();
    walk_actions(term, &mut |p| match p {
        Process::Action(Expr::PsApply { x, y, .. }, _) => pairs.push((x.clone(), y.clone())),
        Process::NsDecl(x, _) => vacua.push(x.clone()),
        _ => {}
    });
    match (pairs.as_slice(), vacua.as_slice()) {
        ([(c1, c2), (t1, t2)], [x1, x2]) => Some(CnotRoles {
            c1: c1.clone(),
            c2: c2.clone(),
            t1: t1.clone(),
            t2: t2.clone(),
            x1: x1.clone(),
            x2: x2.clone(),
        }),
        _ => None,
    }
}

/// Beam-splitter actions and polarisation conversions still ahead in `term`.
fn pending_optics(term: &Process) -> usize {
    let mut n = 0;
    walk_actions(term, &mut |p| {
        if let Process::Action(e, _) = p {
            match e {
                Expr::ApplyUnitary(_, u) if matches!(**u, Expr::Unitary(Unitary::Beam(_) | Unitary::Rotation(_))) => n += 1,
                Expr::PsApply { .. } => n += 1,
                _ => {}
            }
        }
    });
    n
}

#[derive(Debug, Clone)]
pub struct ProbeResult {
    pub state: JointState,
    pub roles: CnotRoles,
    pub node: String,
    pub term: Process,
}

/// The joint state right after the CNOT block: the first configuration in
/// breadth-first order where every conversion and beam splitter has fired
/// and no measurement has happened yet.
pub fn cnot_output(program: &Program, input: &InputStateSpec, limits: Limits) -> Result<ProbeResult, ModelError> {
    let env = environment_for(input);
    let reserved: Vec<&str> = env.env_names.iter().map(String::as_str).collect();
    let term = expand(program, &reserved).map_err(semantics::SemanticsError::from)?;
    let roles = cnot_roles(&term).ok_or(ModelError::ProbeNotFound)?;
    let measurements = term.measurement_count();
    let g = explore_process(&term, &env, limits)?;
    g.nodes
        .iter()
        .find_map(|n| {
            let m = n.config.as_mixed()?;
            let ready = m.is_pure() && pending_optics(&m.term) == 0 && m.term.measurement_count() == measurements;
            ready.then(|| ProbeResult {
                state: m.components[0].state.clone(),
                roles: roles.clone(),
                node: n.id.clone(),
                term: m.term.clone(),
            })
        })
        .ok_or(ModelError::ProbeNotFound)
}

/// Amplitudes of `state` keyed as `c1c2t1t2|x1x2` occupation strings.
pub fn role_amplitudes(state: &JointState, roles: &CnotRoles) -> Result<BTreeMap<String, Complex64>, ModelError> {
    let idx = roles
        .in_order()
        .iter()
        .map(|r| state.layout().require(r))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| ModelError::Semantics(e.into()))?;
    let mut out = BTreeMap::new();
    for (b, a) in state.amplitudes() {
        let d: Vec<String> = idx.iter().map(|&i| b.0[i].to_string()).collect();
        let key = format!("{}|{}", d[..4].concat(), d[4..].concat());
        *out.entry(key).or_insert(Complex64::new(0.0, 0.0)) += a;
    }
    Ok(out)
}
