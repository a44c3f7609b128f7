//! Left-right planarity test (de Fraysseix, Ossona de Mendez and
//! Rosenstiehl, in Brandes' formulation), without embedding extraction.

use crate::graph::{VertexId, WeightedGraph};

type EdgeId = usize;

#[derive(Clone, Copy, Default, PartialEq)]
struct Interval {
    low: Option<EdgeId>,
    high: Option<EdgeId>,
}

impl Interval {
    fn is_empty(&self) -> bool {
        self.low.is_none() && self.high.is_none()
    }
}

#[derive(Clone, Copy)]
struct ConflictPair {
    /// Stands in for object identity when comparing against stack bottoms.
    id: usize,
    left: Interval,
    right: Interval,
}

impl ConflictPair {
    fn swap(&mut self) {
        std::mem::swap(&mut self.left, &mut self.right);
    }
}

struct State {
    height: Vec<Option<usize>>,
    parent_edge: Vec<Option<EdgeId>>,
    /// Directed edges `(tail, head)` in orientation order.
    dedges: Vec<(VertexId, VertexId)>,
    out: Vec<Vec<EdgeId>>,
    lowpt: Vec<usize>,
    lowpt2: Vec<usize>,
    nesting: Vec<usize>,
    lowpt_edge: Vec<Option<EdgeId>>,
    reference: Vec<Option<EdgeId>>,
    stack_bottom: Vec<Option<usize>>,
    stack: Vec<ConflictPair>,
    next_id: usize,
}

impl State {
    fn conflicting(&self, i: &Interval, b: EdgeId) -> bool {
        !i.is_empty() && i.high.is_some_and(|h| self.lowpt[h] > self.lowpt[b])
    }

    fn lowest(&self, p: &ConflictPair) -> usize {
        match (p.left.low, p.right.low) {
            (None, Some(r)) => self.lowpt[r],
            (Some(l), None) => self.lowpt[l],
            (Some(l), Some(r)) => self.lowpt[l].min(self.lowpt[r]),
            (None, None) => usize::MAX,
        }
    }

    fn top_id(&self) -> Option<usize> {
        self.stack.last().map(|p| p.id)
    }

    fn new_pair(&mut self) -> ConflictPair {
        self.next_id += 1;
        ConflictPair {
            id: self.next_id,
            left: Interval::default(),
            right: Interval::default(),
        }
    }

    fn orient(&mut self, adj: &[Vec<(VertexId, usize)>], seen: &mut [bool], v: VertexId) {
        let e = self.parent_edge[v];
        for &(w, uid) in &adj[v] {
            if seen[uid] {
                continue;
            }
            seen[uid] = true;
            let vw = self.dedges.len();
            self.dedges.push((v, w));
            self.out[v].push(vw);
            let hv = self.height[v].expect("visited");
            self.lowpt.push(hv);
            self.lowpt2.push(hv);
            self.nesting.push(0);
            match self.height[w] {
                None => {
                    self.parent_edge[w] = Some(vw);
                    self.height[w] = Some(hv + 1);
                    self.orient(adj, seen, w);
                }
                Some(hw) => self.lowpt[vw] = hw,
            }
            self.nesting[vw] = 2 * self.lowpt[vw] + usize::from(self.lowpt2[vw] < hv);
            if let Some(e) = e {
                if self.lowpt[vw] < self.lowpt[e] {
                    self.lowpt2[e] = self.lowpt[e].min(self.lowpt2[vw]);
                    self.lowpt[e] = self.lowpt[vw];
                } else if self.lowpt[vw] > self.lowpt[e] {
                    self.lowpt2[e] = self.lowpt2[e].min(self.lowpt[vw]);
                } else {
                    self.lowpt2[e] = self.lowpt2[e].min(self.lowpt2[vw]);
                }
            }
        }
    }

    fn test(&mut self, v: VertexId) -> bool {
        let e = self.parent_edge[v];
        let hv = self.height[v].expect("visited");
        let out = self.out[v].clone();
        for (idx, &ei) in out.iter().enumerate() {
            let w = self.dedges[ei].1;
            self.stack_bottom[ei] = self.top_id();
            if Some(ei) == self.parent_edge[w] {
                if !self.test(w) {
                    return false;
                }
            } else {
                self.lowpt_edge[ei] = Some(ei);
                let mut p = self.new_pair();
                p.right = Interval {
                    low: Some(ei),
                    high: Some(ei),
                };
                self.stack.push(p);
            }
            if self.lowpt[ei] < hv {
                let e = e.expect("only the root has no parent edge, and nothing returns below it");
                if idx == 0 {
                    self.lowpt_edge[e] = self.lowpt_edge[ei];
                } else if !self.add_constraints(ei, e) {
                    return false;
                }
            }
        }
        if let Some(e) = e {
            self.remove_back_edges(e);
        }
        true
    }

    fn add_constraints(&mut self, ei: EdgeId, e: EdgeId) -> bool {
        let mut p = self.new_pair();
        loop {
            let mut q = self.stack.pop().expect("return edges of ei are on the stack");
            if !q.left.is_empty() {
                q.swap();
            }
            if !q.left.is_empty() {
                return false;
            }
            let qlow = q.right.low.expect("nonempty right interval");
            if self.lowpt[qlow] > self.lowpt[e] {
                if p.right.is_empty() {
                    p.right = q.right;
                } else if let Some(pl) = p.right.low {
                    self.reference[pl] = q.right.high;
                }
                p.right.low = q.right.low;
            } else {
                self.reference[qlow] = self.lowpt_edge[e];
            }
            if self.top_id() == self.stack_bottom[ei] {
                break;
            }
        }
        while let Some(top) = self.stack.last() {
            if !(self.conflicting(&top.left, ei) || self.conflicting(&top.right, ei)) {
                break;
            }
            let mut q = self.stack.pop().expect("checked");
            if self.conflicting(&q.right, ei) {
                q.swap();
            }
            if self.conflicting(&q.right, ei) {
                return false;
            }
            if let Some(pl) = p.right.low {
                self.reference[pl] = q.right.high;
            }
            if q.right.low.is_some() {
                p.right.low = q.right.low;
            }
            if p.left.is_empty() {
                p.left.high = q.left.high;
            } else if let Some(pl) = p.left.low {
                self.reference[pl] = q.left.high;
            }
            p.left.low = q.left.low;
        }
        if !(p.left.is_empty() && p.right.is_empty()) {
            self.stack.push(p);
        }
        true
    }

    fn remove_back_edges(&mut self, e: EdgeId) {
        let u = self.dedges[e].0;
        let hu = self.height[u].expect("visited");
        while let Some(top) = self.stack.last() {
            if self.lowest(top) != hu {
                break;
            }
            self.stack.pop();
        }
        if let Some(mut p) = self.stack.pop() {
            while let Some(h) = p.left.high.filter(|&h| self.dedges[h].1 == u) {
                p.left.high = self.reference[h];
            }
            if p.left.high.is_none() {
                if let Some(low) = p.left.low {
                    self.reference[low] = p.right.low;
                    p.left.low = None;
                }
            }
            while let Some(h) = p.right.high.filter(|&h| self.dedges[h].1 == u) {
                p.right.high = self.reference[h];
            }
            if p.right.high.is_none() {
                if let Some(low) = p.right.low {
                    self.reference[low] = p.left.low;
                    p.right.low = None;
                }
            }
            self.stack.push(p);
        }
        if self.lowpt[e] < hu {
            if let Some(top) = self.stack.last() {
                let (hl, hr) = (top.left.high, top.right.high);
                self.reference[e] = match (hl, hr) {
                    (Some(l), None) => Some(l),
                    (Some(l), Some(r)) if self.lowpt[l] > self.lowpt[r] => Some(l),
                    _ => hr,
                };
            }
        }
    }
}

fn lr_planar(g: &WeightedGraph) -> bool {
    let n = g.vertex_count();
    let mut adj: Vec<Vec<(VertexId, usize)>> = vec![Vec::new(); n];
    for (uid, e) in g.edges().iter().enumerate() {
        adj[e.u].push((e.v, uid));
        adj[e.v].push((e.u, uid));
    }
    let m = g.edge_count();
    let mut s = State {
        height: vec![None; n],
        parent_edge: vec![None; n],
        dedges: Vec::with_capacity(m),
        out: vec![Vec::new(); n],
        lowpt: Vec::with_capacity(m),
        lowpt2: Vec::with_capacity(m),
        nesting: Vec::with_capacity(m),
        lowpt_edge: vec![None; m],
        reference: vec![None; m],
        stack_bottom: vec![None; m],
        stack: Vec::new(),
        next_id: 0,
    };
    let mut seen = vec![false; m];
    let mut roots = Vec::new();
    for v in 0..n {
        if s.height[v].is_none() {
            s.height[v] = Some(0);
            roots.push(v);
            s.orient(&adj, &mut seen, v);
        }
    }
    for v in 0..n {
        let mut out = std::mem::take(&mut s.out[v]);
        out.sort_by_key(|&e| s.nesting[e]);
        s.out[v] = out;
    }
    roots.into_iter().all(|r| s.test(r))
}

/// Whether `g` has a planar embedding.
pub fn is_planar(g: &WeightedGraph) -> bool {
    let n = g.vertex_count();
    if n >= 3 && g.edge_count() > 3 * n - 6 {
        return false;
    }
    // Both passes recurse once per tree edge.
    let stack = (64 << 20) + n * 1024;
    std::thread::scope(|scope| {
        std::thread::Builder::new()
            .stack_size(stack)
            .spawn_scoped(scope, || lr_planar(g))
            .expect("spawn planarity worker")
            .join()
            .expect("planarity worker panicked")
    })
}
