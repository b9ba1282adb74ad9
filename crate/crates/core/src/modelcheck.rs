//! Exhaustive exploration of every sequential schedule on small instances.
//!
//! States are configurations up to translation with particle ids erased.
//! From each state the explorer branches over every activable particle, so
//! a report covers all unfair adversaries at once.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt::{self, Write as _};

use rayon::prelude::*;
use serde::Serialize;

use crate::algorithm::apply_move;
use crate::configuration::{Body, Configuration};
use crate::engine::{activable, StepEvent};
use crate::grid::NodeCoord;
use crate::verify::{self, Invariant, Violation};

pub const DEFAULT_BUDGET: usize = 5_000_000;
/// Largest single instance `mc --config` accepts.
pub const MAX_SINGLE_INSTANCE: usize = 6;
/// Largest particle count for full instance enumeration.
pub const MAX_ENUMERATION: usize = 4;

/// A configuration translated so its smallest node (row-major) is the origin,
/// with bodies sorted and ids dropped.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CanonicalConfig(Vec<Body>);

impl CanonicalConfig {
    pub fn bodies(&self) -> &[Body] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Rebuilds a configuration with pids in canonical order.
    pub fn to_config(&self) -> Configuration {
        Configuration::from_bodies(self.0.iter().copied()).expect("canonical bodies are disjoint")
    }

    /// 64-bit FNV-1a over the node coordinates. Stable across runs and platforms.
    pub fn stable_hash(&self) -> u64 {
        const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
        const PRIME: u64 = 0x0000_0100_0000_01b3;
        let mut h = OFFSET;
        let mut feed = |x: i64| {
            for byte in x.to_le_bytes() {
                h ^= u64::from(byte);
                h = h.wrapping_mul(PRIME);
            }
        };
        for body in &self.0 {
            let nodes = body.sorted_nodes();
            feed(nodes.len() as i64);
            for n in nodes {
                feed(n.q);
                feed(n.r);
            }
        }
        h
    }

    pub fn to_json(&self) -> String {
        self.to_config().to_json()
    }
}

impl fmt::Display for CanonicalConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_json())
    }
}

pub fn canonicalize(config: &Configuration) -> CanonicalConfig {
    canonical_from_bodies(config.particles().map(|p| p.body))
}

fn canonical_from_bodies(bodies: impl Iterator<Item = Body>) -> CanonicalConfig {
    let bodies: Vec<Body> = bodies.map(|b| b.normalized()).collect();
    let Some(min) = bodies.iter().map(|b| b.anchor()).min_by_key(|n| n.row_major()) else {
        return CanonicalConfig(Vec::new());
    };
    let shift = NodeCoord::ORIGIN - min;
    let mut out: Vec<Body> = bodies.iter().map(|b| b.translate(shift)).collect();
    out.sort_by_key(|b| {
        let v = b.sorted_nodes();
        (v[0].row_major(), v.get(1).map(|n| n.row_major()))
    });
    CanonicalConfig(out)
}

/// Connected node sets of exactly `size` nodes, up to translation, each
/// sorted row-major with its first node at the origin.
pub fn polyhexes(size: usize) -> Vec<Vec<NodeCoord>> {
    if size == 0 {
        return Vec::new();
    }
    let normalize = |mut v: Vec<NodeCoord>| {
        v.sort_by_key(|n| n.row_major());
        let shift = NodeCoord::ORIGIN - v[0];
        v.iter().map(|&n| n + shift).collect::<Vec<_>>()
    };
    let mut level: BTreeSet<Vec<NodeCoord>> = BTreeSet::from([vec![NodeCoord::ORIGIN]]);
    for _ in 1..size {
        let mut next = BTreeSet::new();
        for shape in &level {
            let members: HashSet<NodeCoord> = shape.iter().copied().collect();
            for n in shape {
                for m in n.neighbors() {
                    if !members.contains(&m) {
                        let mut grown = shape.clone();
                        grown.push(m);
                        next.insert(normalize(grown));
                    }
                }
            }
        }
        level = next;
    }
    let mut out: Vec<_> = level.into_iter().collect();
    out.sort_by_key(|v| v.iter().map(|n| n.row_major()).collect::<Vec<_>>());
    out
}

/// Every way to cover `nodes` with `expanded` adjacent pairs and contracted singletons.
fn partitions(nodes: &[NodeCoord], expanded: usize, out: &mut Vec<CanonicalConfig>) {
    fn go(
        nodes: &[NodeCoord],
        used: &mut Vec<bool>,
        pairs_left: usize,
        singles_left: usize,
        acc: &mut Vec<Body>,
        out: &mut Vec<CanonicalConfig>,
    ) {
        let Some(i) = used.iter().position(|u| !u) else {
            out.push(canonical_from_bodies(acc.iter().copied()));
            return;
        };
        used[i] = true;
        if singles_left > 0 {
            acc.push(Body::Contracted(nodes[i]));
            go(nodes, used, pairs_left, singles_left - 1, acc, out);
            acc.pop();
        }
        if pairs_left > 0 {
            for j in i + 1..nodes.len() {
                if !used[j] && nodes[i].is_adjacent(nodes[j]) {
                    used[j] = true;
                    acc.push(Body::Expanded(nodes[i], nodes[j]));
                    go(nodes, used, pairs_left - 1, singles_left, acc, out);
                    acc.pop();
                    used[j] = false;
                }
            }
        }
        used[i] = false;
    }
    let singles = nodes.len() - 2 * expanded;
    go(nodes, &mut vec![false; nodes.len()], expanded, singles, &mut Vec::new(), out);
}

/// Every connected configuration of exactly `n` particles, once up to translation.
pub fn enumerate_connected(n: usize, allow_expanded: bool) -> Vec<CanonicalConfig> {
    let mut out = Vec::new();
    if n == 0 {
        return out;
    }
    let max_expanded = if allow_expanded { n } else { 0 };
    for expanded in 0..=max_expanded {
        for shape in polyhexes(n + expanded) {
            partitions(&shape, expanded, &mut out);
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExploreOptions {
    pub budget: usize,
    /// When false, every schedule is walked as a tree. Only sensible for
    /// tiny instances; used to cross-check memoisation.
    pub memoize: bool,
}

impl Default for ExploreOptions {
    fn default() -> Self {
        Self {
            budget: DEFAULT_BUDGET,
            memoize: true,
        }
    }
}

/// A failed check on one edge or terminal of the state graph.
#[derive(Clone, Debug, Serialize)]
pub struct Finding {
    pub state: String,
    pub violations: Vec<Violation>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExploreReport {
    pub root: String,
    pub root_hash: String,
    pub states: usize,
    pub transitions: usize,
    pub terminals: usize,
    #[serde(skip)]
    pub terminal_set: BTreeSet<CanonicalConfig>,
    pub unique_leader_everywhere: bool,
    pub final_shape_everywhere: bool,
    pub transitions_ok: bool,
    /// Longest schedule from the root; a lower bound when the graph is cyclic.
    pub max_depth: usize,
    pub acyclic: bool,
    /// False when the state budget ran out before the graph was closed.
    pub complete: bool,
    /// States along one cycle, when one was found.
    pub cycle: Option<Vec<String>>,
    pub findings: Vec<Finding>,
}

impl ExploreReport {
    /// All checked properties hold on a fully explored graph.
    pub fn passed(&self) -> bool {
        self.complete && self.acyclic && self.unique_leader_everywhere && self.final_shape_everywhere && self.transitions_ok
    }
}

const MAX_FINDINGS: usize = 8;

struct Explorer {
    options: ExploreOptions,
    // 1 = on the DFS stack, 2 = finished; value is the longest path below.
    memo: HashMap<CanonicalConfig, (u8, usize)>,
    visited: usize,
    transitions: usize,
    terminal_set: BTreeSet<CanonicalConfig>,
    unique_leader: bool,
    final_shape: bool,
    transitions_ok: bool,
    cycle: Option<Vec<String>>,
    findings: Vec<Finding>,
    max_depth: usize,
    complete: bool,
}

struct Frame {
    state: CanonicalConfig,
    succ: Vec<CanonicalConfig>,
    next: usize,
    longest: usize,
}

impl Explorer {
    fn new(options: ExploreOptions) -> Self {
        Explorer {
            options,
            memo: HashMap::new(),
            visited: 0,
            transitions: 0,
            terminal_set: BTreeSet::new(),
            unique_leader: true,
            final_shape: true,
            transitions_ok: true,
            cycle: None,
            findings: Vec::new(),
            max_depth: 0,
            complete: true,
        }
    }

    fn record(&mut self, state: &CanonicalConfig, violations: Vec<Violation>) {
        if self.findings.len() < MAX_FINDINGS {
            self.findings.push(Finding {
                state: state.to_json(),
                violations,
            });
        }
    }

    /// Successors of a state, checking each transition and, for a terminal,
    /// the final properties.
    fn expand(&mut self, state: &CanonicalConfig) -> Vec<CanonicalConfig> {
        let config = state.to_config();
        let moves = activable(&config);
        if moves.is_empty() {
            self.terminal_set.insert(state.clone());
            let report = verify::check_final_properties(&config).expect("no activable particle");
            if !report.passed {
                for v in &report.violations {
                    match v.invariant {
                        Invariant::UniqueLeader => self.unique_leader = false,
                        _ => self.final_shape = false,
                    }
                }
                self.record(state, report.violations);
            }
            return Vec::new();
        }
        let mut out = Vec::with_capacity(moves.len());
        for m in moves {
            let next = apply_move(&config, m.pid, &m.decision).expect("fresh decision");
            let event = StepEvent {
                step: 0,
                pid: m.pid,
                condition: m.decision.condition,
                before: config.body(m.pid).unwrap().sorted_nodes(),
                after: next.body(m.pid).unwrap().sorted_nodes(),
                progress: None,
            };
            let report = verify::check_transition_local(&config, &next, &event);
            if !report.passed {
                self.transitions_ok = false;
                self.record(state, report.violations);
            }
            self.transitions += 1;
            out.push(canonicalize(&next));
        }
        out
    }

    fn over_budget(&mut self) -> bool {
        if self.visited >= self.options.budget {
            self.complete = false;
        }
        !self.complete
    }

    fn run_memoized(&mut self, root: CanonicalConfig) {
        self.visited = 1;
        let succ = self.expand(&root);
        self.memo.insert(root.clone(), (1, 0));
        let mut stack = vec![Frame {
            state: root,
            succ,
            next: 0,
            longest: 0,
        }];
        while let Some(top) = stack.last_mut() {
            if top.next == top.succ.len() {
                let done = stack.pop().unwrap();
                self.memo.insert(done.state, (2, done.longest));
                if let Some(parent) = stack.last_mut() {
                    parent.longest = parent.longest.max(done.longest + 1);
                } else {
                    self.max_depth = self.max_depth.max(done.longest);
                }
                continue;
            }
            let child = top.succ[top.next].clone();
            top.next += 1;
            match self.memo.get(&child).copied() {
                Some((2, below)) => {
                    top.longest = top.longest.max(below + 1);
                }
                Some(_) => {
                    if self.cycle.is_none() {
                        let from = stack.iter().position(|f| f.state == child).unwrap();
                        self.cycle = Some(stack[from..].iter().map(|f| f.state.to_json()).collect());
                    }
                    self.max_depth = self.max_depth.max(stack.len());
                }
                None => {
                    if self.over_budget() {
                        return;
                    }
                    self.visited += 1;
                    let succ = self.expand(&child);
                    self.memo.insert(child.clone(), (1, 0));
                    stack.push(Frame {
                        state: child,
                        succ,
                        next: 0,
                        longest: 0,
                    });
                }
            }
        }
    }

    /// Walks every schedule separately. A path revisiting a state on itself
    /// is a cycle and is cut there.
    fn run_tree(&mut self, root: CanonicalConfig) {
        let mut seen: HashSet<CanonicalConfig> = HashSet::new();
        let mut path: Vec<CanonicalConfig> = Vec::new();
        let mut on_path: HashSet<CanonicalConfig> = HashSet::new();
        self.tree(root, 0, &mut path, &mut on_path, &mut seen);
        self.visited = seen.len();
    }

    fn tree(
        &mut self,
        state: CanonicalConfig,
        depth: usize,
        path: &mut Vec<CanonicalConfig>,
        on_path: &mut HashSet<CanonicalConfig>,
        seen: &mut HashSet<CanonicalConfig>,
    ) {
        if self.transitions >= self.options.budget {
            self.complete = false;
            return;
        }
        if on_path.contains(&state) {
            if self.cycle.is_none() {
                let from = path.iter().position(|s| *s == state).unwrap();
                self.cycle = Some(path[from..].iter().map(|s| s.to_json()).collect());
            }
            return;
        }
        self.max_depth = self.max_depth.max(depth);
        seen.insert(state.clone());
        let succ = self.expand(&state);
        path.push(state.clone());
        on_path.insert(state.clone());
        for s in succ {
            self.tree(s, depth + 1, path, on_path, seen);
        }
        on_path.remove(&state);
        path.pop();
    }
}

/// Explores every schedule from `config`.
pub fn explore(config: &Configuration, options: ExploreOptions) -> ExploreReport {
    explore_canonical(canonicalize(config), options)
}

pub fn explore_canonical(root: CanonicalConfig, options: ExploreOptions) -> ExploreReport {
    let mut ex = Explorer::new(options);
    let root_json = root.to_json();
    let root_hash = format!("{:016x}", root.stable_hash());
    if options.memoize {
        ex.run_memoized(root);
    } else {
        ex.run_tree(root);
    }
    ExploreReport {
        root: root_json,
        root_hash,
        states: ex.visited,
        transitions: ex.transitions,
        terminals: ex.terminal_set.len(),
        terminal_set: ex.terminal_set,
        unique_leader_everywhere: ex.unique_leader,
        final_shape_everywhere: ex.final_shape,
        transitions_ok: ex.transitions_ok,
        max_depth: ex.max_depth,
        acyclic: ex.cycle.is_none(),
        complete: ex.complete,
        cycle: ex.cycle,
        findings: ex.findings,
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Summary {
    pub instances: usize,
    pub passed: usize,
    pub failed: usize,
    pub incomplete: usize,
    pub cyclic: usize,
    pub leader_failures: usize,
    pub final_shape_failures: usize,
    pub transition_failures: usize,
    pub total_states: usize,
    pub max_depth: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct McReport {
    pub n: Option<usize>,
    pub summary: Summary,
    pub instances: Vec<ExploreReport>,
}

impl McReport {
    pub fn from_reports(n: Option<usize>, instances: Vec<ExploreReport>) -> Self {
        let mut s = Summary {
            instances: instances.len(),
            ..Summary::default()
        };
        for r in &instances {
            if r.passed() {
                s.passed += 1;
            } else {
                s.failed += 1;
            }
            s.incomplete += usize::from(!r.complete);
            s.cyclic += usize::from(!r.acyclic);
            s.leader_failures += usize::from(!r.unique_leader_everywhere);
            s.final_shape_failures += usize::from(!r.final_shape_everywhere);
            s.transition_failures += usize::from(!r.transitions_ok);
            s.total_states += r.states;
            s.max_depth = s.max_depth.max(r.max_depth);
        }
        Self {
            n,
            summary: s,
            instances,
        }
    }

    pub fn passed(&self) -> bool {
        self.summary.failed == 0
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// One line per instance, then the summary. With `failures_only`, passing
    /// instances are omitted.
    pub fn to_text(&self, failures_only: bool) -> String {
        let mut out = String::new();
        for r in &self.instances {
            if failures_only && r.passed() {
                continue;
            }
            let _ = writeln!(
                out,
                "{} states={} terminals={} depth={} {}{}",
                r.root_hash,
                r.states,
                r.terminals,
                r.max_depth,
                if r.passed() { "pass" } else { "FAIL" },
                failure_tags(r),
            );
            if !r.passed() {
                let _ = writeln!(out, "  root {}", r.root);
                if let Some(cycle) = &r.cycle {
                    let _ = writeln!(out, "  cycle of {} states through {}", cycle.len(), cycle[0]);
                }
                for f in &r.findings {
                    for v in &f.violations {
                        let _ = writeln!(out, "  at {}: {}", f.state, v);
                    }
                }
            }
        }
        let s = &self.summary;
        let _ = writeln!(
            out,
            "summary: {} instances, {} passed, {} failed (cyclic {}, incomplete {}, leader {}, final_shape {}, transition {}), {} states, max depth {}",
            s.instances,
            s.passed,
            s.failed,
            s.cyclic,
            s.incomplete,
            s.leader_failures,
            s.final_shape_failures,
            s.transition_failures,
            s.total_states,
            s.max_depth
        );
        out
    }
}

fn failure_tags(r: &ExploreReport) -> String {
    let mut tags = Vec::new();
    if !r.complete {
        tags.push("incomplete");
    }
    if !r.acyclic {
        tags.push("cycle");
    }
    if !r.unique_leader_everywhere {
        tags.push("leader");
    }
    if !r.final_shape_everywhere {
        tags.push("final_shape");
    }
    if !r.transitions_ok {
        tags.push("transition");
    }
    if tags.is_empty() {
        String::new()
    } else {
        format!(" [{}]", tags.join(","))
    }
}

/// Unique-leader, final-shape and transition flags with the violations behind them.
type StateFindings = (bool, bool, bool, Vec<Violation>);

/// The union of every root's state graph, built once and analysed by
/// strongly connected components.
struct SharedGraph {
    states: Vec<CanonicalConfig>,
    succ: Vec<Vec<u32>>,
    /// Violations found on a state's terminal check or outgoing edges.
    findings: Vec<Option<StateFindings>>,
    terminal: Vec<bool>,
    complete: bool,
}

fn build_shared(roots: &[CanonicalConfig], budget: usize) -> SharedGraph {
    let mut index: HashMap<CanonicalConfig, u32> = HashMap::new();
    let mut g = SharedGraph {
        states: Vec::new(),
        succ: Vec::new(),
        findings: Vec::new(),
        terminal: Vec::new(),
        complete: true,
    };
    for r in roots {
        if !index.contains_key(r) {
            index.insert(r.clone(), g.states.len() as u32);
            g.states.push(r.clone());
        }
    }
    let mut next = 0;
    while next < g.states.len() {
        if next >= budget {
            g.complete = false;
            break;
        }
        // Each state is expanded by a throwaway explorer to reuse its checks.
        let mut ex = Explorer::new(ExploreOptions { budget, memoize: true });
        let state = g.states[next].clone();
        let children = ex.expand(&state);
        g.terminal.push(children.is_empty());
        let flags = (ex.unique_leader, ex.final_shape, ex.transitions_ok);
        g.findings.push(if flags == (true, true, true) {
            None
        } else {
            let violations = ex.findings.into_iter().flat_map(|f| f.violations).collect();
            Some((flags.0, flags.1, flags.2, violations))
        });
        let mut ids = Vec::with_capacity(children.len());
        for child in children {
            let id = *index.entry(child.clone()).or_insert_with(|| {
                g.states.push(child);
                (g.states.len() - 1) as u32
            });
            ids.push(id);
        }
        g.succ.push(ids);
        next += 1;
    }
    g
}

/// Iterative Tarjan. Component ids come out in reverse topological order:
/// every edge leads to a component with a smaller or equal id.
fn tarjan(succ: &[Vec<u32>]) -> (Vec<u32>, usize) {
    const UNSEEN: u32 = u32::MAX;
    let n = succ.len();
    let mut order = vec![UNSEEN; n];
    let mut low = vec![0u32; n];
    let mut comp = vec![UNSEEN; n];
    let mut stack: Vec<u32> = Vec::new();
    let mut on_stack = vec![false; n];
    let mut counter = 0u32;
    let mut comps = 0usize;
    for start in 0..n {
        if order[start] != UNSEEN {
            continue;
        }
        let mut call: Vec<(u32, usize)> = vec![(start as u32, 0)];
        order[start] = counter;
        low[start] = counter;
        counter += 1;
        stack.push(start as u32);
        on_stack[start] = true;
        while let Some(&mut (v, ref mut i)) = call.last_mut() {
            let v = v as usize;
            if let Some(&w) = succ[v].get(*i) {
                *i += 1;
                let w = w as usize;
                if w >= n {
                    continue;
                }
                if order[w] == UNSEEN {
                    order[w] = counter;
                    low[w] = counter;
                    counter += 1;
                    stack.push(w as u32);
                    on_stack[w] = true;
                    call.push((w as u32, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(order[w]);
                }
                continue;
            }
            call.pop();
            if let Some(&(parent, _)) = call.last() {
                let parent = parent as usize;
                low[parent] = low[parent].min(low[v]);
            }
            if low[v] == order[v] {
                loop {
                    let w = stack.pop().unwrap() as usize;
                    on_stack[w] = false;
                    comp[w] = comps as u32;
                    if w == v {
                        break;
                    }
                }
                comps += 1;
            }
        }
    }
    (comp, comps)
}

/// A cycle through `start` inside its component, as state indices.
fn cycle_in_component(succ: &[Vec<u32>], comp: &[u32], start: usize) -> Vec<usize> {
    let mut parent: HashMap<usize, usize> = HashMap::new();
    let mut queue = std::collections::VecDeque::from([start]);
    while let Some(v) = queue.pop_front() {
        for &w in &succ[v] {
            let w = w as usize;
            if w >= comp.len() || comp[w] != comp[start] {
                continue;
            }
            if w == start {
                let mut path = vec![v];
                let mut at = v;
                while at != start {
                    at = parent[&at];
                    path.push(at);
                }
                path.reverse();
                return path;
            }
            if let std::collections::hash_map::Entry::Vacant(e) = parent.entry(w) {
                e.insert(v);
                queue.push_back(w);
            }
        }
    }
    vec![start]
}

/// Explores every connected instance of `n` particles. All roots share one
/// state graph, so each state's moves are computed once; per-root results
/// are then read off the component graph.
pub fn check_all(n: usize, allow_expanded: bool, options: ExploreOptions) -> McReport {
    let roots = enumerate_connected(n, allow_expanded);
    if !options.memoize {
        let instances = roots
            .into_par_iter()
            .map(|root| explore_canonical(root, options))
            .collect();
        return McReport::from_reports(Some(n), instances);
    }
    let g = build_shared(&roots, options.budget);
    let expanded = g.succ.len();
    let (comp, comps) = tarjan(&g.succ);

    // Per-component facts, filled in reverse topological order.
    let mut cyclic = vec![false; comps];
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); comps];
    for (v, &c) in comp.iter().enumerate() {
        members[c as usize].push(v);
    }
    for (c, vs) in members.iter().enumerate() {
        cyclic[c] = vs.len() > 1 || g.succ[vs[0]].iter().any(|&w| w as usize == vs[0]);
    }
    let mut depth = vec![0usize; comps];
    let mut any_cycle = vec![false; comps];
    let mut unexpanded = vec![false; comps];
    for c in 0..comps {
        let mut d = 0;
        let mut cyc = cyclic[c];
        let mut open = false;
        for &v in &members[c] {
            if v >= expanded {
                open = true;
                continue;
            }
            for &w in &g.succ[v] {
                let wc = comp[w as usize] as usize;
                if wc != c {
                    d = d.max(depth[wc] + 1);
                    cyc |= any_cycle[wc];
                    open |= unexpanded[wc];
                }
            }
        }
        depth[c] = d;
        any_cycle[c] = cyc;
        unexpanded[c] = open;
    }

    // Roots are distinct and were indexed first, in order.
    let instances = (0..roots.len())
        .into_par_iter()
        .map(|start| {
            shared_report(&g, &comp, &cyclic, &depth, &any_cycle, &unexpanded, expanded, start)
        })
        .collect();
    McReport::from_reports(Some(n), instances)
}

#[allow(clippy::too_many_arguments)]
fn shared_report(
    g: &SharedGraph,
    comp: &[u32],
    cyclic: &[bool],
    depth: &[usize],
    any_cycle: &[bool],
    unexpanded: &[bool],
    expanded: usize,
    start: usize,
) -> ExploreReport {
    let mut seen = vec![false; g.states.len()];
    let mut stack = vec![start];
    seen[start] = true;
    let mut states = 0;
    let mut transitions = 0;
    let mut terminal_set = BTreeSet::new();
    let (mut leader, mut final_shape, mut trans) = (true, true, true);
    let mut findings = Vec::new();
    let mut cycle = None;
    while let Some(v) = stack.pop() {
        states += 1;
        if v >= expanded {
            continue;
        }
        if g.terminal[v] {
            terminal_set.insert(g.states[v].clone());
        }
        if let Some((l, p, t, violations)) = &g.findings[v] {
            leader &= l;
            final_shape &= p;
            trans &= t;
            if findings.len() < MAX_FINDINGS {
                findings.push(Finding {
                    state: g.states[v].to_json(),
                    violations: violations.clone(),
                });
            }
        }
        if cycle.is_none() && cyclic[comp[v] as usize] {
            let path = cycle_in_component(&g.succ, comp, v);
            cycle = Some(path.iter().map(|&i| g.states[i].to_json()).collect());
        }
        transitions += g.succ[v].len();
        for &w in &g.succ[v] {
            let w = w as usize;
            if !seen[w] {
                seen[w] = true;
                stack.push(w);
            }
        }
    }
    let root = &g.states[start];
    let c = match comp.get(start) {
        Some(&c) => c as usize,
        None => {
            return ExploreReport {
                root: root.to_json(),
                root_hash: format!("{:016x}", root.stable_hash()),
                states,
                transitions,
                terminals: 0,
                terminal_set,
                unique_leader_everywhere: true,
                final_shape_everywhere: true,
                transitions_ok: true,
                max_depth: 0,
                acyclic: true,
                complete: false,
                cycle: None,
                findings,
            }
        }
    };
    ExploreReport {
        root: root.to_json(),
        root_hash: format!("{:016x}", root.stable_hash()),
        states,
        transitions,
        terminals: terminal_set.len(),
        terminal_set,
        unique_leader_everywhere: leader,
        final_shape_everywhere: final_shape,
        transitions_ok: trans,
        max_depth: depth[c],
        acyclic: !any_cycle[c],
        complete: !unexpanded[c],
        cycle,
        findings,
    }
}
