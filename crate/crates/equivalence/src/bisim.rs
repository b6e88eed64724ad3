use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};

use quantum_state::DensityMatrix;
use semantics::{Label, LtsGraph};
use serde::Serialize;

/// Which of the two compared systems a node belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Side {
    A,
    B,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceStep {
    pub side: Side,
    pub node: String,
    pub term: String,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub equivalent: bool,
    /// Shortest run after which one side can do something the other cannot
    /// match. Present exactly when the systems are not equivalent.
    pub counterexample: Option<Vec<TraceStep>>,
    pub classes: usize,
    pub iterations: usize,
    pub tolerance: f64,
}

/// Final classes over the disjoint union of both graphs: nodes of A first,
/// then nodes of B.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    pub class_of: Vec<usize>,
    pub offset: usize,
}

impl Partition {
    pub fn class_a(&self, n: usize) -> usize {
        self.class_of[n]
    }

    pub fn class_b(&self, n: usize) -> usize {
        self.class_of[self.offset + n]
    }

    pub fn len(&self) -> usize {
        self.class_of.iter().collect::<BTreeSet<_>>().len()
    }

    pub fn is_empty(&self) -> bool {
        self.class_of.is_empty()
    }

    pub fn classes(&self) -> BTreeMap<usize, Vec<usize>> {
        let mut m: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (n, &c) in self.class_of.iter().enumerate() {
            m.entry(c).or_default().push(n);
        }
        m
    }
}

/// Probability of moving from `t` to `u` in one step: the branch weight for a
/// probabilistic step, 1 for staying put in a τ-stable node, otherwise 0.
pub fn mu(g: &LtsGraph, t: usize, u: usize) -> f64 {
    let direct: f64 = g
        .outgoing(t)
        .filter(|e| e.dst == u)
        .filter_map(|e| match e.label {
            Label::ProbStep { p, .. } => Some(p),
            _ => None,
        })
        .sum();
    if direct > 0.0 {
        direct
    } else if t == u && !g.is_prob(t) && g.is_tau_stable(t) {
        1.0
    } else {
        0.0
    }
}

#[derive(Debug, Clone)]
enum Key {
    Tau,
    Visible(String),
    Prob(String, f64),
}

struct Union<'a> {
    graphs: [&'a LtsGraph; 2],
    offset: usize,
    prob: Vec<bool>,
    edges: Vec<Vec<(Key, usize, Label)>>,
    rho: Vec<usize>,
}

fn side_of(u: &Union<'_>, n: usize) -> (Side, usize) {
    if n < u.offset {
        (Side::A, n)
    } else {
        (Side::B, n - u.offset)
    }
}

fn visible_key(l: &Label) -> Key {
    let text = |vs: &[semantics::Value]| vs.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",");
    match l {
        Label::Tau => Key::Tau,
        Label::ProbStep { p, values } => Key::Prob(text(values), *p),
        Label::Input { chan, values, names } => Key::Visible(format!("{chan}?[{}|{}]", text(values), names.len())),
        Label::Output { chan, values, names } => {
            let set: Vec<String> = values.iter().map(|t| format!("({})", text(t))).collect();
            Key::Visible(format!("{chan}!{{{}}}|{}", set.join(","), names.len()))
        }
    }
}

/// Groups environment density matrices that agree within `tol`; the first
/// matrix of each group is its representative.
fn rho_ids(mats: &[Option<DensityMatrix>], tol: f64) -> Vec<usize> {
    let mut reps: Vec<DensityMatrix> = Vec::new();
    mats.iter()
        .map(|m| match m {
            None => usize::MAX,
            Some(m) => {
                let found = reps.iter().position(|r| {
                    let b = r.layout().photon_budget().max(m.layout().photon_budget());
                    r.with_budget(b).approx_eq(&m.with_budget(b), tol)
                });
                found.unwrap_or_else(|| {
                    reps.push(m.clone());
                    reps.len() - 1
                })
            }
        })
        .collect()
}

/// Maps reals to cluster ids: sorted values start a new cluster once they are
/// more than `tol` above the current cluster's first value.
struct FloatClasses {
    sorted: Vec<f64>,
    ids: Vec<usize>,
}

impl FloatClasses {
    fn new(mut vs: Vec<f64>, tol: f64) -> Self {
        vs.sort_by(f64::total_cmp);
        vs.dedup();
        let mut ids = Vec::with_capacity(vs.len());
        let (mut start, mut id) = (f64::NEG_INFINITY, 0usize);
        for &v in &vs {
            if v - start > tol {
                if start != f64::NEG_INFINITY {
                    id += 1;
                }
                start = v;
            }
            ids.push(id);
        }
        FloatClasses { sorted: vs, ids }
    }

    fn id(&self, v: f64) -> usize {
        match self.sorted.binary_search_by(|x| x.total_cmp(&v)) {
            Ok(i) => self.ids[i],
            Err(_) => usize::MAX,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum Signature {
    Mixed(BTreeSet<(String, usize, usize)>),
    Prob(BTreeSet<(String, usize, usize, usize)>, BTreeMap<usize, usize>),
}

fn build_union<'a>(a: &'a LtsGraph, b: &'a LtsGraph, tol: f64) -> Union<'a> {
    let offset = a.len();
    let mut prob = Vec::new();
    let mut edges = Vec::new();
    let mut mats = Vec::new();
    for (g, base) in [(a, 0), (b, offset)] {
        for n in 0..g.len() {
            prob.push(g.is_prob(n));
            edges.push(g.outgoing(n).map(|e| (visible_key(&e.label), base + e.dst, e.label.clone())).collect());
            mats.push(g.nodes[n].config.as_mixed().and_then(|m| m.env_density().ok()));
        }
    }
    Union { graphs: [a, b], offset, prob, edges, rho: rho_ids(&mats, tol) }
}

/// Nodes reachable from `n` by τ steps that stay inside `n`'s class.
fn inert_closure(u: &Union<'_>, class: &[usize], n: usize) -> Vec<usize> {
    let mut seen = vec![n];
    let mut stack = vec![n];
    while let Some(x) = stack.pop() {
        for (k, d, _) in &u.edges[x] {
            if matches!(k, Key::Tau) && class[*d] == class[n] && !seen.contains(d) {
                seen.push(*d);
                stack.push(*d);
            }
        }
    }
    seen
}

fn signature(u: &Union<'_>, class: &[usize], probs: &FloatClasses, n: usize) -> Signature {
    if u.prob[n] {
        let mut items = BTreeSet::new();
        let mut mu_by_class: BTreeMap<usize, f64> = BTreeMap::new();
        for (k, d, _) in &u.edges[n] {
            if let Key::Prob(values, p) = k {
                items.insert((values.clone(), probs.id(*p), class[*d], u.rho[*d]));
                *mu_by_class.entry(class[*d]).or_insert(0.0) += p;
            }
        }
        let mu = mu_by_class.into_iter().map(|(c, p)| (c, probs.id(p))).collect();
        return Signature::Prob(items, mu);
    }
    let mut items = BTreeSet::new();
    for x in inert_closure(u, class, n) {
        for (k, d, _) in &u.edges[x] {
            match k {
                Key::Tau if class[*d] == class[n] => {}
                Key::Tau => {
                    items.insert(("τ".to_string(), class[*d], usize::MAX));
                }
                Key::Visible(s) => {
                    let rho = if u.prob[*d] { usize::MAX } else { u.rho[*d] };
                    items.insert((s.clone(), class[*d], rho));
                }
                Key::Prob(..) => {}
            }
        }
    }
    Signature::Mixed(items)
}

fn probability_classes(u: &Union<'_>, class: &[usize], tol: f64) -> FloatClasses {
    let mut vs = Vec::new();
    for n in 0..u.prob.len() {
        if !u.prob[n] {
            continue;
        }
        let mut per_class: BTreeMap<usize, f64> = BTreeMap::new();
        for (k, d, _) in &u.edges[n] {
            if let Key::Prob(_, p) = k {
                vs.push(*p);
                *per_class.entry(class[*d]).or_insert(0.0) += p;
            }
        }
        vs.extend(per_class.into_values());
    }
    FloatClasses::new(vs, tol)
}

/// Coarsest probabilistic branching bisimulation on the disjoint union of `a`
/// and `b`, computed by signature refinement, and the verdict for the two
/// initial configurations.
pub fn check_pbb_with_partition(a: &LtsGraph, b: &LtsGraph, tol: f64) -> (Verdict, Partition) {
    let u = build_union(a, b, tol);
    let total = u.prob.len();
    let mut class: Vec<usize> = u.prob.iter().map(|&p| usize::from(p)).collect();
    let mut count = class.iter().collect::<BTreeSet<_>>().len();
    let mut iterations = 0;
    loop {
        iterations += 1;
        let probs = probability_classes(&u, &class, tol);
        let sigs: Vec<(usize, Signature)> =
            (0..total).map(|n| (class[n], signature(&u, &class, &probs, n))).collect();
        let ids: BTreeMap<&(usize, Signature), usize> =
            sigs.iter().collect::<BTreeSet<_>>().into_iter().enumerate().map(|(i, s)| (s, i)).collect();
        let next: Vec<usize> = sigs.iter().map(|s| ids[s]).collect();
        let next_count = ids.len();
        class = next;
        if next_count == count {
            break;
        }
        count = next_count;
    }
    let (ia, ib) = (a.initial, u.offset + b.initial);
    let equivalent = class[ia] == class[ib];
    let counterexample = (!equivalent).then(|| counterexample(&u, &class, tol, ia, ib));
    let verdict = Verdict { equivalent, counterexample, classes: count, iterations, tolerance: tol };
    (verdict, Partition { class_of: class, offset: u.offset })
}

pub fn check_pbb(a: &LtsGraph, b: &LtsGraph, tol: f64) -> Verdict {
    check_pbb_with_partition(a, b, tol).0
}

/// Observable moves of a node under the final partition: the non-inert
/// transitions out of its inert τ closure, keyed by what an observer sees.
fn moves(u: &Union<'_>, class: &[usize], probs: &FloatClasses, n: usize) -> Vec<(String, usize, usize, Label)> {
    let mut out = Vec::new();
    if u.prob[n] {
        for (k, d, l) in &u.edges[n] {
            if let Key::Prob(values, p) = k {
                out.push((format!("prob {values} p#{} rho#{}", probs.id(*p), u.rho[*d]), n, *d, l.clone()));
            }
        }
        return out;
    }
    for x in inert_closure(u, class, n) {
        for (k, d, l) in &u.edges[x] {
            match k {
                Key::Tau if class[*d] == class[n] => {}
                Key::Tau => out.push(("τ".to_string(), x, *d, l.clone())),
                Key::Visible(s) => {
                    let rho = if u.prob[*d] { usize::MAX } else { u.rho[*d] };
                    out.push((format!("{s} rho#{rho}"), x, *d, l.clone()));
                }
                Key::Prob(..) => {}
            }
        }
    }
    out
}

fn step_of(u: &Union<'_>, n: usize, label: String) -> TraceStep {
    let (side, local) = side_of(u, n);
    let g = u.graphs[if side == Side::A { 0 } else { 1 }];
    TraceStep { side, node: g.nodes[local].id.clone(), term: g.nodes[local].config.term_text(), label }
}

/// For each visited pair, the pair it was reached from and the matched moves.
type Parents = BTreeMap<(usize, usize), ((usize, usize), [TraceStep; 2])>;

/// Breadth-first search over pairs of inequivalent nodes for the first
/// transition that the other side cannot match.
fn counterexample(u: &Union<'_>, class: &[usize], tol: f64, ia: usize, ib: usize) -> Vec<TraceStep> {
    let probs = probability_classes(u, class, tol);
    let mut parent: Parents = BTreeMap::new();
    let mut seen: HashSet<(usize, usize)> = HashSet::from([(ia, ib)]);
    let mut queue = VecDeque::from([(ia, ib)]);
    let trace_to = |parent: &Parents, mut at: (usize, usize)| {
        let mut steps = Vec::new();
        while let Some((prev, pair)) = parent.get(&at) {
            steps.push(pair.clone());
            at = *prev;
        }
        steps.reverse();
        steps.into_iter().flatten().collect::<Vec<_>>()
    };
    let mut last = (ia, ib);
    while let Some((x, y)) = queue.pop_front() {
        last = (x, y);
        if u.prob[x] != u.prob[y] {
            let mut t = trace_to(&parent, (x, y));
            t.push(step_of(u, x, "probabilistic configuration".into()));
            t.push(step_of(u, y, "non-probabilistic configuration".into()));
            return t;
        }
        let (mx, my) = (moves(u, class, &probs, x), moves(u, class, &probs, y));
        for (this, other, flip) in [(&mx, &my, false), (&my, &mx, true)] {
            for (key, from, dst, label) in this {
                let matching: Vec<_> = other.iter().filter(|m| &m.0 == key).collect();
                if matching.is_empty() {
                    let mut t = trace_to(&parent, (x, y));
                    t.push(step_of(u, *from, label.to_string()));
                    t.push(step_of(u, if flip { x } else { y }, format!("cannot match {label}")));
                    return t;
                }
                if matching.iter().any(|m| class[m.2] == class[*dst]) {
                    continue;
                }
                let m = matching[0];
                let next = if flip { (m.2, *dst) } else { (*dst, m.2) };
                if seen.insert(next) {
                    let (lx, ly) = if flip { (&m.3, label) } else { (label, &m.3) };
                    let (fx, fy) = if flip { (m.1, *from) } else { (*from, m.1) };
                    parent.insert(next, ((x, y), [step_of(u, fx, lx.to_string()), step_of(u, fy, ly.to_string())]));
                    queue.push_back(next);
                }
            }
        }
    }
    // every observable move is matched label-wise; the difference lies in branching structure
    let mut t = trace_to(&parent, last);
    t.push(step_of(u, last.0, "inequivalent branching".into()));
    t.push(step_of(u, last.1, "inequivalent branching".into()));
    t
}
