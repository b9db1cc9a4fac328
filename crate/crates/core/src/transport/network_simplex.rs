//! Primal network simplex for uncapacitated transportation problems.
//!
//! The tree bookkeeping (parent/thread/successor lists, block-search pricing,
//! strongly feasible leaving-arc rule) follows the classical formulation used
//! by LEMON. Artificial arcs between every node and an extra root carry the
//! initial flow; they occupy the first arc slots so that real arcs can be
//! appended between solves without disturbing the current basis.

const TREE: i8 = 0;
const LOWER: i8 = 1;
const UP: i8 = 1;
const DOWN: i8 = -1;

pub(crate) struct NetworkSimplex {
    node_num: usize,
    root: usize,
    supply: Vec<f64>,
    source: Vec<usize>,
    target: Vec<usize>,
    cost: Vec<f64>,
    flow: Vec<f64>,
    state: Vec<i8>,
    pi: Vec<f64>,
    parent: Vec<usize>,
    pred: Vec<usize>,
    thread: Vec<usize>,
    rev_thread: Vec<usize>,
    succ_num: Vec<usize>,
    last_succ: Vec<usize>,
    pred_dir: Vec<i8>,
    dirty_revs: Vec<usize>,
    art_cost: f64,
    max_cost: f64,
    next_arc: usize,
    pub(crate) pivots: usize,
    // pivot scratch
    in_arc: usize,
    join: usize,
    u_in: usize,
    v_in: usize,
    u_out: usize,
    delta: f64,
}

const NONE: usize = usize::MAX;

impl NetworkSimplex {
    /// `supply[u] > 0` for sources, `< 0` for sinks; must sum to zero.
    /// `cost_bound` must dominate every real arc cost that will ever be added.
    pub(crate) fn new(supply: Vec<f64>, cost_bound: f64) -> Self {
        let node_num = supply.len();
        let root = node_num;
        let art_cost = (cost_bound.max(1.0) + 1.0) * (node_num as f64 + 1.0);
        let mut s = Self {
            node_num,
            root,
            source: Vec::with_capacity(node_num),
            target: Vec::with_capacity(node_num),
            cost: Vec::with_capacity(node_num),
            flow: Vec::with_capacity(node_num),
            state: Vec::with_capacity(node_num),
            pi: vec![0.0; node_num + 1],
            parent: vec![NONE; node_num + 1],
            pred: vec![NONE; node_num + 1],
            thread: vec![0; node_num + 1],
            rev_thread: vec![0; node_num + 1],
            succ_num: vec![1; node_num + 1],
            last_succ: vec![0; node_num + 1],
            pred_dir: vec![UP; node_num + 1],
            dirty_revs: Vec::new(),
            art_cost,
            max_cost: 0.0,
            next_arc: 0,
            pivots: 0,
            supply,
            in_arc: 0,
            join: 0,
            u_in: 0,
            v_in: 0,
            u_out: 0,
            delta: 0.0,
        };
        s.thread[root] = 0;
        s.rev_thread[0] = root;
        s.succ_num[root] = node_num + 1;
        s.last_succ[root] = root - 1;
        for u in 0..node_num {
            s.parent[u] = root;
            s.pred[u] = u;
            s.thread[u] = u + 1;
            s.rev_thread[u + 1] = u;
            s.last_succ[u] = u;
            let b = s.supply[u];
            if b >= 0.0 {
                s.pred_dir[u] = UP;
                s.pi[u] = -art_cost;
                s.source.push(u);
                s.target.push(root);
                s.flow.push(b);
            } else {
                s.pred_dir[u] = DOWN;
                s.pi[u] = art_cost;
                s.source.push(root);
                s.target.push(u);
                s.flow.push(-b);
            }
            s.cost.push(art_cost);
            s.state.push(TREE);
        }
        s
    }

    pub(crate) fn add_arc(&mut self, from: usize, to: usize, cost: f64) {
        self.source.push(from);
        self.target.push(to);
        self.cost.push(cost);
        self.flow.push(0.0);
        self.state.push(LOWER);
        self.max_cost = self.max_cost.max(cost.abs());
    }

    pub(crate) fn potentials(&self) -> &[f64] {
        &self.pi[..self.node_num]
    }

    /// Flow on real arcs as `(from, to, flow)`, skipping zero entries.
    pub(crate) fn flows(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (self.node_num..self.source.len())
            .filter(move |&e| self.flow[e] != 0.0)
            .map(move |e| (self.source[e], self.target[e], self.flow[e]))
    }

    /// Total flow still routed through artificial arcs.
    pub(crate) fn artificial_flow(&self) -> f64 {
        self.flow[..self.node_num].iter().sum()
    }

    fn reduced_cost(&self, e: usize) -> f64 {
        self.cost[e] + self.pi[self.source[e]] - self.pi[self.target[e]]
    }

    /// Entering threshold: reduced costs are differences of potentials of
    /// size up to the artificial cost, so rounding noise scales with it.
    fn tolerance(&self) -> f64 {
        (1e-12 * self.max_cost).max(8.0 * f64::EPSILON * self.art_cost)
    }

    /// Recompute all potentials from the tree arcs, removing accumulated drift.
    pub(crate) fn refresh_potentials(&mut self) {
        self.pi[self.root] = 0.0;
        let mut u = self.thread[self.root];
        while u != self.root {
            let p = self.parent[u];
            let c = self.cost[self.pred[u]];
            self.pi[u] = if self.pred_dir[u] == UP {
                self.pi[p] - c
            } else {
                self.pi[p] + c
            };
            u = self.thread[u];
        }
    }

    /// Block-search pricing over the real arcs.
    fn find_entering_arc(&mut self) -> bool {
        let first = self.node_num;
        let end = self.source.len();
        let total = end - first;
        if total == 0 {
            return false;
        }
        let block = ((total as f64).sqrt() as usize).max(10);
        let tol = -self.tolerance();
        let mut min = tol;
        let mut found = NONE;
        let mut cnt = block;
        let start = self.next_arc.clamp(first, end);
        let mut e = start;
        for _ in 0..total {
            if self.state[e] == LOWER {
                let c = self.reduced_cost(e);
                if c < min {
                    min = c;
                    found = e;
                }
            }
            e += 1;
            if e == end {
                e = first;
            }
            cnt -= 1;
            if cnt == 0 {
                if found != NONE {
                    break;
                }
                cnt = block;
            }
        }
        if found == NONE {
            return false;
        }
        self.in_arc = found;
        self.next_arc = e;
        true
    }

    fn find_join_node(&mut self) {
        let mut u = self.source[self.in_arc];
        let mut v = self.target[self.in_arc];
        while u != v {
            if self.succ_num[u] < self.succ_num[v] {
                u = self.parent[u];
            } else {
                v = self.parent[v];
            }
        }
        self.join = u;
    }

    /// Strongly feasible leaving-arc selection. Returns false if the cycle is unbounded.
    fn find_leaving_arc(&mut self) -> bool {
        let first = self.source[self.in_arc];
        let second = self.target[self.in_arc];
        let mut delta = f64::INFINITY;
        let mut result = 0;
        let mut u = first;
        while u != self.join {
            let e = self.pred[u];
            if self.pred_dir[u] == UP {
                let d = self.flow[e];
                if d < delta {
                    delta = d;
                    self.u_out = u;
                    result = 1;
                }
            }
            u = self.parent[u];
        }
        let mut u = second;
        while u != self.join {
            let e = self.pred[u];
            if self.pred_dir[u] == DOWN {
                let d = self.flow[e];
                if d <= delta {
                    delta = d;
                    self.u_out = u;
                    result = 2;
                }
            }
            u = self.parent[u];
        }
        if result == 1 {
            self.u_in = first;
            self.v_in = second;
        } else if result == 2 {
            self.u_in = second;
            self.v_in = first;
        } else {
            return false;
        }
        self.delta = delta;
        true
    }

    fn change_flow(&mut self) {
        let val = self.delta;
        if val > 0.0 {
            let e_in = self.in_arc;
            self.flow[e_in] += val;
            let mut u = self.source[e_in];
            while u != self.join {
                let e = self.pred[u];
                self.flow[e] -= self.pred_dir[u] as f64 * val;
                u = self.parent[u];
            }
            let mut u = self.target[e_in];
            while u != self.join {
                let e = self.pred[u];
                self.flow[e] += self.pred_dir[u] as f64 * val;
                u = self.parent[u];
            }
        }
        self.state[self.in_arc] = TREE;
        let out = self.pred[self.u_out];
        self.state[out] = LOWER;
        // Exact zero on the leaving arc; guards against rounding residue.
        self.flow[out] = 0.0;
    }

    fn update_tree_structure(&mut self) {
        let u_in = self.u_in;
        let v_in = self.v_in;
        let u_out = self.u_out;
        let join = self.join;
        let old_rev_thread = self.rev_thread[u_out];
        let old_succ_num = self.succ_num[u_out];
        let old_last_succ = self.last_succ[u_out];
        let v_out = self.parent[u_out];

        if u_in == u_out {
            self.parent[u_in] = v_in;
            self.pred[u_in] = self.in_arc;
            self.pred_dir[u_in] = if u_in == self.source[self.in_arc] { UP } else { DOWN };
            if self.thread[v_in] != u_out {
                let mut after = self.thread[old_last_succ];
                self.thread[old_rev_thread] = after;
                self.rev_thread[after] = old_rev_thread;
                after = self.thread[v_in];
                self.thread[v_in] = u_out;
                self.rev_thread[u_out] = v_in;
                self.thread[old_last_succ] = after;
                self.rev_thread[after] = old_last_succ;
            }
        } else {
            let thread_continue = if old_rev_thread == v_in {
                self.thread[old_last_succ]
            } else {
                self.thread[v_in]
            };
            let mut stem = u_in;
            let mut par_stem = v_in;
            let mut last = self.last_succ[u_in];
            let mut after = self.thread[last];
            self.thread[v_in] = u_in;
            self.dirty_revs.clear();
            self.dirty_revs.push(v_in);
            while stem != u_out {
                let next_stem = self.parent[stem];
                self.thread[last] = next_stem;
                self.dirty_revs.push(last);

                let before = self.rev_thread[stem];
                self.thread[before] = after;
                self.rev_thread[after] = before;

                self.parent[stem] = par_stem;
                par_stem = stem;
                stem = next_stem;

                last = if self.last_succ[stem] == self.last_succ[par_stem] {
                    self.rev_thread[par_stem]
                } else {
                    self.last_succ[stem]
                };
                after = self.thread[last];
            }
            self.parent[u_out] = par_stem;
            self.thread[last] = thread_continue;
            self.rev_thread[thread_continue] = last;
            self.last_succ[u_out] = last;

            if old_rev_thread != v_in {
                self.thread[old_rev_thread] = after;
                self.rev_thread[after] = old_rev_thread;
            }

            for k in 0..self.dirty_revs.len() {
                let u = self.dirty_revs[k];
                let t = self.thread[u];
                self.rev_thread[t] = u;
            }

            let mut tmp_sc = 0usize;
            let tmp_ls = self.last_succ[u_out];
            let mut u = u_out;
            while u != u_in {
                let p = self.parent[u];
                self.pred[u] = self.pred[p];
                self.pred_dir[u] = -self.pred_dir[p];
                tmp_sc = tmp_sc + self.succ_num[u] - self.succ_num[p];
                self.succ_num[u] = tmp_sc;
                self.last_succ[p] = tmp_ls;
                u = p;
            }
            self.pred[u_in] = self.in_arc;
            self.pred_dir[u_in] = if u_in == self.source[self.in_arc] { UP } else { DOWN };
            self.succ_num[u_in] = old_succ_num;
        }

        let up_limit_out = if self.last_succ[join] == v_in { join } else { NONE };
        let last_succ_out = self.last_succ[u_out];
        let mut u = v_in;
        while u != NONE && self.last_succ[u] == v_in {
            self.last_succ[u] = last_succ_out;
            u = self.parent[u];
        }

        if join != old_rev_thread && v_in != old_rev_thread {
            let mut u = v_out;
            while u != up_limit_out && self.last_succ[u] == old_last_succ {
                self.last_succ[u] = old_rev_thread;
                u = self.parent[u];
            }
        } else if last_succ_out != old_last_succ {
            let mut u = v_out;
            while u != up_limit_out && self.last_succ[u] == old_last_succ {
                self.last_succ[u] = last_succ_out;
                u = self.parent[u];
            }
        }

        let mut u = v_in;
        while u != join {
            self.succ_num[u] += old_succ_num;
            u = self.parent[u];
        }
        let mut u = v_out;
        while u != join {
            self.succ_num[u] -= old_succ_num;
            u = self.parent[u];
        }
    }

    fn update_potential(&mut self) {
        let u_in = self.u_in;
        let dir = self.pred_dir[u_in] as f64;
        let sigma = self.pi[self.v_in] - self.pi[u_in] - dir * self.cost[self.in_arc];
        let end = self.thread[self.last_succ[u_in]];
        let mut u = u_in;
        while u != end {
            self.pi[u] += sigma;
            u = self.thread[u];
        }
    }

    /// Pivot until no real arc has negative reduced cost. Returns false if the
    /// pivot budget runs out.
    pub(crate) fn run(&mut self, max_pivots: usize) -> bool {
        let mut budget = max_pivots;
        while self.find_entering_arc() {
            if budget == 0 {
                return false;
            }
            budget -= 1;
            self.find_join_node();
            if !self.find_leaving_arc() {
                return false;
            }
            self.change_flow();
            self.update_tree_structure();
            self.update_potential();
            self.pivots += 1;
        }
        true
    }

    /// Reduced cost `c + π_u − π_v` of a prospective arc.
    pub(crate) fn reduced_cost_of(&self, from: usize, to: usize, cost: f64) -> f64 {
        cost + self.pi[from] - self.pi[to]
    }

    pub(crate) fn entering_tolerance(&self) -> f64 {
        self.tolerance()
    }
}
