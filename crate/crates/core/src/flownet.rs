//! Capacitated flow networks with virtual source/sink, an augmenting-tree
//! (Boykov-Kolmogorov) max-flow solver, a plain BFS augmenting-path solver for
//! differential testing, and canonical min-cut labeling.

use std::collections::VecDeque;
use std::fmt::{self, Write as _};

use crate::error::{Error, Result};

/// An arc endpoint: one of the two virtual terminals or a regular node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Vertex {
    Source,
    Sink,
    Node(usize),
}

impl Vertex {
    /// Integer id used by the text dump: `SOURCE = -1`, `SINK = -2`.
    pub fn dump_id(self) -> i64 {
        match self {
            Vertex::Source => -1,
            Vertex::Sink => -2,
            Vertex::Node(i) => i as i64,
        }
    }

    fn from_dump_id(id: i64) -> Option<Self> {
        match id {
            -1 => Some(Vertex::Source),
            -2 => Some(Vertex::Sink),
            i if i >= 0 => Some(Vertex::Node(i as usize)),
            _ => None,
        }
    }
}

/// A non-negative arc capacity, finite or infinite.
///
/// The infinite value is IEEE `+inf`, which is absorbing under the only
/// arithmetic the solvers perform (`inf - x`, `inf + x`, `min`), so an infinite
/// arc can never be saturated.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Capacity(f64);

impl Capacity {
    pub const INFINITE: Capacity = Capacity(f64::INFINITY);
    pub const ZERO: Capacity = Capacity(0.0);

    pub fn finite(v: f64) -> Result<Self> {
        if v >= 0.0 && v.is_finite() {
            Ok(Capacity(v))
        } else {
            Err(Error::validation(format!(
                "capacity must be finite and non-negative, got {v}"
            )))
        }
    }

    pub fn is_infinite(self) -> bool {
        self.0.is_infinite()
    }

    /// The finite value, or `None` for the infinite capacity.
    pub fn value(self) -> Option<f64> {
        (!self.is_infinite()).then_some(self.0)
    }

    fn raw(self) -> f64 {
        self.0
    }
}

impl fmt::Display for Capacity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.value() {
            Some(v) => write!(f, "{v}"),
            None => f.write_str("inf"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arc {
    pub from: Vertex,
    pub to: Vertex,
    pub cap: Capacity,
}

/// A directed network over `node_count` regular nodes plus SOURCE and SINK.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FlowNetwork {
    node_count: usize,
    arcs: Vec<Arc>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Source,
    Sink,
}

/// Result of a max-flow solve: the canonical minimal source set and the flow.
#[derive(Debug, Clone, PartialEq)]
pub struct CutLabels {
    sides: Vec<Side>,
    flow_value: f64,
}

impl CutLabels {
    pub fn sides(&self) -> &[Side] {
        &self.sides
    }

    pub fn side(&self, node: usize) -> Side {
        self.sides[node]
    }

    pub fn is_source_side(&self, node: usize) -> bool {
        self.sides[node] == Side::Source
    }

    pub fn flow_value(&self) -> f64 {
        self.flow_value
    }
}

/// Max-flow algorithm selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Solver {
    /// Two search trees grown from the terminals, reused across augmentations.
    #[default]
    BoykovKolmogorov,
    /// Shortest augmenting paths found by BFS; slow, used as a cross-check.
    Bfs,
}

impl FlowNetwork {
    pub fn new(node_count: usize) -> Self {
        Self {
            node_count,
            arcs: Vec::new(),
        }
    }

    pub fn with_capacity(node_count: usize, arcs: usize) -> Self {
        Self {
            node_count,
            arcs: Vec::with_capacity(arcs),
        }
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    fn check_arc(&self, arc: &Arc) -> Result<()> {
        if arc.to == Vertex::Source {
            return Err(Error::validation("arcs may not enter SOURCE"));
        }
        if arc.from == Vertex::Sink {
            return Err(Error::validation("arcs may not leave SINK"));
        }
        if arc.from == arc.to {
            return Err(Error::validation("self-loop arcs are not allowed"));
        }
        for v in [arc.from, arc.to] {
            if let Vertex::Node(i) = v {
                if i >= self.node_count {
                    return Err(Error::validation(format!(
                        "node {i} out of range (network has {} nodes)",
                        self.node_count
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn add_arc(&mut self, from: Vertex, to: Vertex, cap: Capacity) -> Result<()> {
        let arc = Arc { from, to, cap };
        self.check_arc(&arc)?;
        self.arcs.push(arc);
        Ok(())
    }

    /// Total capacity of arcs leaving the source side of a partition.
    /// `sides` covers the regular nodes; SOURCE/SINK sit on their own sides.
    pub fn cut_capacity(&self, sides: &[Side]) -> Capacity {
        let side = |v: Vertex| match v {
            Vertex::Source => Side::Source,
            Vertex::Sink => Side::Sink,
            Vertex::Node(i) => sides[i],
        };
        let mut total = 0.0;
        for a in &self.arcs {
            if side(a.from) == Side::Source && side(a.to) == Side::Sink {
                total += a.cap.raw();
            }
        }
        Capacity(total)
    }

    /// Text dump: a `nodes N` line, then one `arc FROM TO CAP` line per arc
    /// with SOURCE = -1, SINK = -2 and `inf` for infinite capacity.
    pub fn to_dump(&self) -> String {
        let mut out = format!("nodes {}\n", self.node_count);
        for a in &self.arcs {
            let _ = writeln!(out, "arc {} {} {}", a.from.dump_id(), a.to.dump_id(), a.cap);
        }
        out
    }

    pub fn from_dump(text: &str) -> Result<Self> {
        let mut net: Option<FlowNetwork> = None;
        let mut offset = 0;
        for line in text.split_inclusive('\n') {
            let at = offset;
            offset += line.len();
            let fields: Vec<&str> = line.split_whitespace().collect();
            match fields.as_slice() {
                [] => {}
                ["nodes", n] => {
                    let n = n
                        .parse()
                        .map_err(|_| Error::format(at, format!("bad node count '{n}'")))?;
                    net = Some(FlowNetwork::new(n));
                }
                ["arc", from, to, cap] => {
                    let net = net
                        .as_mut()
                        .ok_or_else(|| Error::format(at, "arc before 'nodes' line"))?;
                    let vertex = |s: &str| {
                        s.parse::<i64>()
                            .ok()
                            .and_then(Vertex::from_dump_id)
                            .ok_or_else(|| Error::format(at, format!("bad vertex '{s}'")))
                    };
                    let cap = if *cap == "inf" {
                        Capacity::INFINITE
                    } else {
                        cap.parse::<f64>()
                            .map_err(|_| Error::format(at, format!("bad capacity '{cap}'")))
                            .and_then(Capacity::finite)?
                    };
                    net.add_arc(vertex(from)?, vertex(to)?, cap)
                        .map_err(|e| Error::format(at, e.to_string()))?;
                }
                _ => return Err(Error::format(at, format!("unrecognized line '{}'", line.trim()))),
            }
        }
        net.ok_or_else(|| Error::format(0, "missing 'nodes' line"))
    }
}

/// Returns a copy of `net` with `removed` arcs (matched by endpoints, first
/// match per entry) deleted and `extra` arcs appended.
pub fn rebuild_with(net: &FlowNetwork, extra: &[Arc], removed: &[(Vertex, Vertex)]) -> Result<FlowNetwork> {
    let mut keep = vec![true; net.arcs.len()];
    for &(from, to) in removed {
        let idx = net
            .arcs
            .iter()
            .enumerate()
            .position(|(i, a)| keep[i] && a.from == from && a.to == to)
            .ok_or_else(|| Error::validation(format!("no arc {from:?} -> {to:?} to remove")))?;
        keep[idx] = false;
    }
    let mut out = FlowNetwork::with_capacity(net.node_count, net.arcs.len() + extra.len());
    out.arcs
        .extend(net.arcs.iter().zip(&keep).filter(|(_, &k)| k).map(|(a, _)| *a));
    for a in extra {
        out.add_arc(a.from, a.to, a.cap)?;
    }
    Ok(out)
}

pub fn max_flow(net: &FlowNetwork) -> Result<CutLabels> {
    max_flow_with(net, Solver::BoykovKolmogorov)
}

/// Solves max-flow and returns the canonical min cut: SOURCE_SIDE is exactly
/// the set of nodes reachable from SOURCE in the final residual graph.
///
/// Fails with [`Error::InfeasibleCut`] when some s-t path consists only of
/// infinite arcs.
pub fn max_flow_with(net: &FlowNetwork, solver: Solver) -> Result<CutLabels> {
    if net.node_count == 0 {
        return Err(Error::validation("network has no nodes"));
    }
    let mut g = Residual::build(net)?;
    match solver {
        Solver::BoykovKolmogorov => Bk::new(&mut g).run()?,
        Solver::Bfs => g.run_bfs()?,
    }
    Ok(CutLabels {
        sides: g.source_reachable(),
        flow_value: g.flow,
    })
}

const NONE: u32 = u32::MAX;
const TERMINAL: u32 = u32::MAX - 1;
const ORPHAN: u32 = u32::MAX - 2;

/// Residual graph in CSR layout. Every network arc becomes a pair of
/// residual arcs (forward and reverse) linked through `sister`. Terminal
/// arcs are folded into `tr`: positive = residual from SOURCE, negative =
/// residual to SINK.
struct Residual {
    first: Vec<u32>,
    head: Vec<u32>,
    rcap: Vec<f64>,
    sister: Vec<u32>,
    tr: Vec<f64>,
    flow: f64,
}

impl Residual {
    fn build(net: &FlowNetwork) -> Result<Self> {
        let n = net.node_count;
        let mut degree = vec![0u32; n + 1];
        let mut src = vec![0.0f64; n];
        let mut snk = vec![0.0f64; n];
        let mut flow = 0.0;
        for a in &net.arcs {
            match (a.from, a.to) {
                (Vertex::Node(u), Vertex::Node(v)) => {
                    degree[u] += 1;
                    degree[v] += 1;
                }
                (Vertex::Source, Vertex::Node(v)) => src[v] += a.cap.raw(),
                (Vertex::Node(u), Vertex::Sink) => snk[u] += a.cap.raw(),
                (Vertex::Source, Vertex::Sink) => {
                    if a.cap.is_infinite() {
                        return Err(Error::InfeasibleCut);
                    }
                    flow += a.cap.raw();
                }
                _ => unreachable!("validated on insertion"),
            }
        }
        let mut first = vec![0u32; n + 1];
        for i in 0..n {
            first[i + 1] = first[i] + degree[i];
        }
        let m = first[n] as usize;
        let mut fill: Vec<u32> = first[..n].to_vec();
        let mut head = vec![0u32; m];
        let mut rcap = vec![0.0f64; m];
        let mut sister = vec![0u32; m];
        for a in &net.arcs {
            if let (Vertex::Node(u), Vertex::Node(v)) = (a.from, a.to) {
                let fa = fill[u];
                fill[u] += 1;
                let ra = fill[v];
                fill[v] += 1;
                head[fa as usize] = v as u32;
                rcap[fa as usize] = a.cap.raw();
                sister[fa as usize] = ra;
                head[ra as usize] = u as u32;
                rcap[ra as usize] = 0.0;
                sister[ra as usize] = fa;
            }
        }
        let mut tr = vec![0.0; n];
        for i in 0..n {
            let (s, t) = (src[i], snk[i]);
            if s.is_infinite() && t.is_infinite() {
                return Err(Error::InfeasibleCut);
            }
            // route min(s, t) straight through the node
            flow += s.min(t);
            tr[i] = if s.is_infinite() {
                f64::INFINITY
            } else if t.is_infinite() {
                f64::NEG_INFINITY
            } else {
                s - t
            };
        }
        Ok(Self {
            first,
            head,
            rcap,
            sister,
            tr,
            flow,
        })
    }

    fn node_count(&self) -> usize {
        self.tr.len()
    }

    fn arcs_of(&self, i: usize) -> std::ops::Range<usize> {
        self.first[i] as usize..self.first[i + 1] as usize
    }

    fn source_reachable(&self) -> Vec<Side> {
        let n = self.node_count();
        let mut sides = vec![Side::Sink; n];
        let mut queue: VecDeque<usize> = VecDeque::new();
        for i in 0..n {
            if self.tr[i] > 0.0 {
                sides[i] = Side::Source;
                queue.push_back(i);
            }
        }
        while let Some(i) = queue.pop_front() {
            for a in self.arcs_of(i) {
                let j = self.head[a] as usize;
                if self.rcap[a] > 0.0 && sides[j] == Side::Sink {
                    sides[j] = Side::Source;
                    queue.push_back(j);
                }
            }
        }
        sides
    }

    fn run_bfs(&mut self) -> Result<()> {
        let n = self.node_count();
        let mut pred = vec![NONE; n];
        let mut queue = VecDeque::new();
        loop {
            pred.iter_mut().for_each(|p| *p = NONE);
            queue.clear();
            for i in 0..n {
                if self.tr[i] > 0.0 {
                    pred[i] = TERMINAL;
                    queue.push_back(i);
                }
            }
            let mut end = None;
            'search: while let Some(i) = queue.pop_front() {
                if self.tr[i] < 0.0 {
                    end = Some(i);
                    break;
                }
                for a in self.arcs_of(i) {
                    let j = self.head[a] as usize;
                    if self.rcap[a] > 0.0 && pred[j] == NONE {
                        pred[j] = a as u32;
                        if self.tr[j] < 0.0 {
                            end = Some(j);
                            break 'search;
                        }
                        queue.push_back(j);
                    }
                }
            }
            let Some(end) = end else { return Ok(()) };
            let mut b = -self.tr[end];
            let mut v = end;
            while pred[v] != TERMINAL {
                let a = pred[v] as usize;
                b = b.min(self.rcap[a]);
                v = self.head[self.sister[a] as usize] as usize;
            }
            b = b.min(self.tr[v]);
            if b.is_infinite() {
                return Err(Error::InfeasibleCut);
            }
            self.tr[end] += b;
            let mut v = end;
            while pred[v] != TERMINAL {
                let a = pred[v] as usize;
                self.rcap[a] -= b;
                self.rcap[self.sister[a] as usize] += b;
                v = self.head[self.sister[a] as usize] as usize;
            }
            self.tr[v] -= b;
            self.flow += b;
        }
    }
}

/// Boykov-Kolmogorov search-tree state. `parent[i]` is the residual arc from
/// `i` to its tree parent.
struct Bk<'a> {
    g: &'a mut Residual,
    parent: Vec<u32>,
    is_sink: Vec<bool>,
    ts: Vec<u32>,
    dist: Vec<u32>,
    active: VecDeque<u32>,
    in_active: Vec<bool>,
    orphans: VecDeque<u32>,
    time: u32,
}

impl<'a> Bk<'a> {
    fn new(g: &'a mut Residual) -> Self {
        let n = g.node_count();
        Self {
            g,
            parent: vec![NONE; n],
            is_sink: vec![false; n],
            ts: vec![0; n],
            dist: vec![0; n],
            active: VecDeque::new(),
            in_active: vec![false; n],
            orphans: VecDeque::new(),
            time: 0,
        }
    }

    fn activate(&mut self, i: usize) {
        if !self.in_active[i] {
            self.in_active[i] = true;
            self.active.push_back(i as u32);
        }
    }

    fn next_active(&mut self) -> Option<usize> {
        while let Some(i) = self.active.pop_front() {
            let i = i as usize;
            self.in_active[i] = false;
            if self.parent[i] != NONE {
                return Some(i);
            }
        }
        None
    }

    fn run(mut self) -> Result<()> {
        for i in 0..self.g.node_count() {
            let tr = self.g.tr[i];
            if tr != 0.0 {
                self.is_sink[i] = tr < 0.0;
                self.parent[i] = TERMINAL;
                self.dist[i] = 1;
                self.activate(i);
            }
        }
        while let Some(i) = self.next_active() {
            let meet = self.grow(i);
            if meet != NONE {
                // rescan i first: it may still touch the other tree
                if !self.in_active[i] {
                    self.in_active[i] = true;
                    self.active.push_front(i as u32);
                }
                self.time += 1;
                self.augment(meet as usize)?;
                self.adopt();
            }
        }
        Ok(())
    }

    /// Expands node `i`; returns a residual arc from the source tree into the
    /// sink tree if the trees touch, else `NONE`.
    fn grow(&mut self, i: usize) -> u32 {
        let g = &*self.g;
        if !self.is_sink[i] {
            for a in g.arcs_of(i) {
                if g.rcap[a] <= 0.0 {
                    continue;
                }
                let j = g.head[a] as usize;
                if self.parent[j] == NONE {
                    self.is_sink[j] = false;
                    self.parent[j] = g.sister[a];
                    self.ts[j] = self.ts[i];
                    self.dist[j] = self.dist[i] + 1;
                    if !self.in_active[j] {
                        self.in_active[j] = true;
                        self.active.push_back(j as u32);
                    }
                } else if self.is_sink[j] {
                    return a as u32;
                } else if self.ts[j] <= self.ts[i] && self.dist[j] > self.dist[i] {
                    self.parent[j] = g.sister[a];
                    self.ts[j] = self.ts[i];
                    self.dist[j] = self.dist[i] + 1;
                }
            }
        } else {
            for a in g.arcs_of(i) {
                let sa = g.sister[a] as usize;
                if g.rcap[sa] <= 0.0 {
                    continue;
                }
                let j = g.head[a] as usize;
                if self.parent[j] == NONE {
                    self.is_sink[j] = true;
                    self.parent[j] = sa as u32;
                    self.ts[j] = self.ts[i];
                    self.dist[j] = self.dist[i] + 1;
                    if !self.in_active[j] {
                        self.in_active[j] = true;
                        self.active.push_back(j as u32);
                    }
                } else if !self.is_sink[j] {
                    return sa as u32;
                } else if self.ts[j] <= self.ts[i] && self.dist[j] > self.dist[i] {
                    self.parent[j] = sa as u32;
                    self.ts[j] = self.ts[i];
                    self.dist[j] = self.dist[i] + 1;
                }
            }
        }
        NONE
    }

    fn orphan(&mut self, v: usize) {
        self.parent[v] = ORPHAN;
        self.orphans.push_back(v as u32);
    }

    /// Pushes the bottleneck along source root -> middle arc -> sink root.
    fn augment(&mut self, middle: usize) -> Result<()> {
        let g = &mut *self.g;
        let mut b = g.rcap[middle];
        let start = g.head[g.sister[middle] as usize] as usize;
        let mut v = start;
        while self.parent[v] != TERMINAL {
            let pa = self.parent[v] as usize;
            b = b.min(g.rcap[g.sister[pa] as usize]);
            v = g.head[pa] as usize;
        }
        b = b.min(g.tr[v]);
        let end = g.head[middle] as usize;
        let mut v = end;
        while self.parent[v] != TERMINAL {
            let pa = self.parent[v] as usize;
            b = b.min(g.rcap[pa]);
            v = g.head[pa] as usize;
        }
        b = b.min(-g.tr[v]);
        if b.is_infinite() {
            return Err(Error::InfeasibleCut);
        }

        let sm = g.sister[middle] as usize;
        g.rcap[sm] += b;
        g.rcap[middle] -= b;

        let mut v = start;
        while self.parent[v] != TERMINAL {
            let pa = self.parent[v] as usize;
            let down = self.g.sister[pa] as usize;
            self.g.rcap[pa] += b;
            self.g.rcap[down] -= b;
            let next = self.g.head[pa] as usize;
            if self.g.rcap[down] == 0.0 {
                self.orphan(v);
            }
            v = next;
        }
        self.g.tr[v] -= b;
        if self.g.tr[v] == 0.0 {
            self.orphan(v);
        }

        let mut v = end;
        while self.parent[v] != TERMINAL {
            let pa = self.parent[v] as usize;
            let up = self.g.sister[pa] as usize;
            self.g.rcap[up] += b;
            self.g.rcap[pa] -= b;
            let next = self.g.head[pa] as usize;
            if self.g.rcap[pa] == 0.0 {
                self.orphan(v);
            }
            v = next;
        }
        self.g.tr[v] += b;
        if self.g.tr[v] == 0.0 {
            self.orphan(v);
        }
        self.g.flow += b;
        Ok(())
    }

    fn adopt(&mut self) {
        while let Some(i) = self.orphans.pop_front() {
            self.process_orphan(i as usize);
        }
    }

    /// Distance of `j` from its tree root, or `None` when its chain passes
    /// through an orphan. Stamps the chain with the current time.
    fn origin_distance(&mut self, j: usize) -> Option<u32> {
        let mut d = 0u32;
        let mut k = j;
        loop {
            if self.ts[k] == self.time {
                d += self.dist[k];
                break;
            }
            let pa = self.parent[k];
            d += 1;
            if pa == TERMINAL {
                self.ts[k] = self.time;
                self.dist[k] = 1;
                break;
            }
            if pa == ORPHAN || pa == NONE {
                return None;
            }
            k = self.g.head[pa as usize] as usize;
        }
        let mut k = j;
        let mut dd = d;
        while self.ts[k] != self.time {
            self.ts[k] = self.time;
            self.dist[k] = dd;
            dd -= 1;
            k = self.g.head[self.parent[k] as usize] as usize;
        }
        Some(d)
    }

    fn process_orphan(&mut self, i: usize) {
        let sink_tree = self.is_sink[i];
        let mut best_arc = NONE;
        let mut best_d = u32::MAX;
        for a in self.g.arcs_of(i) {
            // residual capacity in the direction of tree flow
            let cap = if sink_tree {
                self.g.rcap[a]
            } else {
                self.g.rcap[self.g.sister[a] as usize]
            };
            if cap <= 0.0 {
                continue;
            }
            let j = self.g.head[a] as usize;
            if self.is_sink[j] != sink_tree || self.parent[j] == NONE {
                continue;
            }
            if let Some(d) = self.origin_distance(j) {
                if d < best_d {
                    best_d = d;
                    best_arc = a as u32;
                }
            }
        }
        if best_arc != NONE {
            self.parent[i] = best_arc;
            self.ts[i] = self.time;
            self.dist[i] = best_d + 1;
            return;
        }
        self.parent[i] = NONE;
        self.ts[i] = 0;
        for a in self.g.arcs_of(i) {
            let j = self.g.head[a] as usize;
            let pj = self.parent[j];
            if self.is_sink[j] != sink_tree || pj == NONE {
                continue;
            }
            let cap = if sink_tree {
                self.g.rcap[a]
            } else {
                self.g.rcap[self.g.sister[a] as usize]
            };
            if cap > 0.0 {
                self.activate(j);
            }
            if pj != TERMINAL && pj != ORPHAN && self.g.head[pj as usize] as usize == i {
                self.orphan(j);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use Vertex::{Node, Sink, Source};

    fn cap(v: f64) -> Capacity {
        Capacity::finite(v).unwrap()
    }

    fn diamond() -> FlowNetwork {
        let (a, b) = (Node(0), Node(1));
        let mut net = FlowNetwork::new(2);
        net.add_arc(Source, a, cap(3.0)).unwrap();
        net.add_arc(Source, b, cap(2.0)).unwrap();
        net.add_arc(a, Sink, cap(2.0)).unwrap();
        net.add_arc(b, Sink, cap(3.0)).unwrap();
        net.add_arc(a, b, cap(1.0)).unwrap();
        net
    }

    #[test]
    fn single_node_bottleneck() {
        let mut net = FlowNetwork::new(1);
        net.add_arc(Source, Node(0), cap(3.0)).unwrap();
        net.add_arc(Node(0), Sink, cap(5.0)).unwrap();
        for s in [Solver::BoykovKolmogorov, Solver::Bfs] {
            let cut = max_flow_with(&net, s).unwrap();
            assert_eq!(cut.flow_value(), 3.0);
            assert_eq!(cut.side(0), Side::Sink);
        }
    }

    #[test]
    fn diamond_flow_is_five() {
        // partitions of {a,b} by hand: {} -> 5, {a} -> 2+2+1 = 5, {b} -> 3+3 = 6, {a,b} -> 5
        for s in [Solver::BoykovKolmogorov, Solver::Bfs] {
            let cut = max_flow_with(&diamond(), s).unwrap();
            assert_eq!(cut.flow_value(), 5.0);
            // canonical minimal source set: nothing reachable once both source arcs saturate
            assert_eq!(cut.sides(), &[Side::Sink, Side::Sink]);
            assert_eq!(diamond().cut_capacity(cut.sides()), cap(5.0));
        }
    }

    #[test]
    fn all_infinite_path_is_infeasible() {
        let mut net = FlowNetwork::new(1);
        net.add_arc(Source, Node(0), Capacity::INFINITE).unwrap();
        net.add_arc(Node(0), Sink, Capacity::INFINITE).unwrap();
        assert!(matches!(max_flow(&net), Err(Error::InfeasibleCut)));
        let mut net = FlowNetwork::new(3);
        net.add_arc(Source, Node(0), Capacity::INFINITE).unwrap();
        net.add_arc(Node(0), Node(1), Capacity::INFINITE).unwrap();
        net.add_arc(Node(1), Node(2), Capacity::INFINITE).unwrap();
        net.add_arc(Node(2), Sink, Capacity::INFINITE).unwrap();
        net.add_arc(Node(0), Sink, cap(4.0)).unwrap();
        for s in [Solver::BoykovKolmogorov, Solver::Bfs] {
            assert!(matches!(max_flow_with(&net, s), Err(Error::InfeasibleCut)));
        }
    }

    #[test]
    fn infinite_arcs_never_cut() {
        let mut net = FlowNetwork::new(2);
        net.add_arc(Source, Node(0), cap(4.0)).unwrap();
        net.add_arc(Node(0), Node(1), Capacity::INFINITE).unwrap();
        net.add_arc(Node(1), Sink, cap(2.0)).unwrap();
        let cut = max_flow(&net).unwrap();
        assert_eq!(cut.flow_value(), 2.0);
        assert_eq!(cut.sides(), &[Side::Source, Side::Source]);
    }

    #[test]
    fn invalid_arcs_rejected() {
        let mut net = FlowNetwork::new(2);
        assert!(net.add_arc(Node(0), Source, cap(1.0)).is_err());
        assert!(net.add_arc(Sink, Node(0), cap(1.0)).is_err());
        assert!(net.add_arc(Node(0), Node(5), cap(1.0)).is_err());
        assert!(net.add_arc(Node(1), Node(1), cap(1.0)).is_err());
        assert!(Capacity::finite(-1.0).is_err());
        assert!(Capacity::finite(f64::NAN).is_err());
        assert!(max_flow(&FlowNetwork::new(0)).is_err());
    }

    #[test]
    fn rebuild_edits() {
        let net = diamond();
        assert_eq!(rebuild_with(&net, &[], &[]).unwrap(), net);
        let edited = rebuild_with(&net, &[], &[(Node(0), Node(1))]).unwrap();
        assert_eq!(edited.arcs().len(), 4);
        assert_eq!(net.arcs().len(), 5);
        assert!(rebuild_with(&net, &[], &[(Node(1), Node(0))]).is_err());
        let forced = rebuild_with(
            &net,
            &[Arc {
                from: Source,
                to: Node(1),
                cap: Capacity::INFINITE,
            }],
            &[],
        )
        .unwrap();
        assert!(max_flow(&forced).unwrap().is_source_side(1));
    }

    #[test]
    fn dump_roundtrip() {
        let mut net = diamond();
        net.add_arc(Source, Node(1), Capacity::INFINITE).unwrap();
        let text = net.to_dump();
        assert!(text.contains("arc -1 0 3\n"));
        assert!(text.contains("arc -1 1 inf\n"));
        assert_eq!(FlowNetwork::from_dump(&text).unwrap(), net);
        assert!(matches!(
            FlowNetwork::from_dump("nodes 1\narc -3 0 1\n"),
            Err(Error::Format { offset: 8, .. })
        ));
    }

    #[test]
    fn source_to_sink_arc_adds_flow() {
        let mut net = FlowNetwork::new(1);
        net.add_arc(Source, Sink, cap(2.5)).unwrap();
        assert_eq!(max_flow(&net).unwrap().flow_value(), 2.5);
    }
}
