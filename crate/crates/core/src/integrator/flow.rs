//! Dense output of a piecewise-smooth solution: one cubic Hermite piece per step.

/// Which one-sided value to take when a query lands on a step boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Side {
    Left,
    Right,
}

/// Absolute tolerance for deciding that a time coincides with a node.
pub(crate) fn snap_tol(t: f64) -> f64 {
    1e-11 * (1.0 + t.abs())
}

#[derive(Debug, Clone)]
pub(crate) struct JumpRecord {
    pub time: f64,
    pub left: Vec<f64>,
    pub right: Vec<f64>,
}

/// Solution of an `n x p` linear state (column-major), stored step by step.
///
/// Step `k` covers `[nodes[k], nodes[k+1]]` and stores `x0, d0, x1, d1`;
/// at a jump the step ending there holds the left limit and the next step
/// starts from the right value.
#[derive(Debug, Clone)]
pub(crate) struct Flow {
    pub n: usize,
    pub p: usize,
    pub start: f64,
    pub init: Vec<f64>,
    pub nodes: Vec<f64>,
    data: Vec<f64>,
    pub jumps: Vec<JumpRecord>,
}

impl Flow {
    pub fn new(n: usize, p: usize, start: f64, init: Vec<f64>) -> Self {
        debug_assert_eq!(init.len(), n * p);
        Self {
            n,
            p,
            start,
            init,
            nodes: vec![start],
            data: Vec::new(),
            jumps: Vec::new(),
        }
    }

    pub fn width(&self) -> usize {
        self.n * self.p
    }

    pub fn steps(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn push_step(&mut self, t1: f64, x0: &[f64], d0: &[f64], x1: &[f64], d1: &[f64]) {
        self.data.extend_from_slice(x0);
        self.data.extend_from_slice(d0);
        self.data.extend_from_slice(x1);
        self.data.extend_from_slice(d1);
        self.nodes.push(t1);
    }

    pub fn push_jump(&mut self, time: f64, left: Vec<f64>, right: Vec<f64>) {
        self.jumps.push(JumpRecord { time, left, right });
    }

    fn block(&self, k: usize, slot: usize) -> &[f64] {
        let w = self.width();
        let base = (4 * k + slot) * w;
        &self.data[base..base + w]
    }

    fn locate(&self, xi: f64, side: Side) -> usize {
        let steps = self.steps();
        let k = self.nodes[..steps]
            .partition_point(|&a| a <= xi)
            .saturating_sub(1);
        let tol = snap_tol(xi);
        match side {
            Side::Left if k > 0 && (xi - self.nodes[k]).abs() <= tol => k - 1,
            Side::Right if k + 1 < steps && (self.nodes[k + 1] - xi).abs() <= tol => k + 1,
            _ => k,
        }
    }

    fn hermite_into(&self, k: usize, xi: f64, out: &mut [f64]) {
        let t0 = self.nodes[k];
        let h = self.nodes[k + 1] - t0;
        let s = (xi - t0) / h;
        let s2 = s * s;
        let om = 1.0 - s;
        let h00 = (1.0 + 2.0 * s) * om * om;
        let h10 = s * om * om * h;
        let h01 = s2 * (3.0 - 2.0 * s);
        let h11 = s2 * (s - 1.0) * h;
        let (x0, d0, x1, d1) = (
            self.block(k, 0),
            self.block(k, 1),
            self.block(k, 2),
            self.block(k, 3),
        );
        for i in 0..out.len() {
            out[i] = h00 * x0[i] + h10 * d0[i] + h01 * x1[i] + h11 * d1[i];
        }
    }

    /// Dense-output value with an explicit side at step boundaries.
    pub fn value_into(&self, xi: f64, side: Side, out: &mut [f64]) {
        if self.steps() == 0 {
            out.copy_from_slice(&self.init);
            return;
        }
        let k = self.locate(xi, side);
        self.hermite_into(k, xi, out);
    }

    fn jump_at(&self, t: f64) -> Option<&JumpRecord> {
        let idx = self.jumps.partition_point(|j| j.time < t - snap_tol(t));
        self.jumps
            .get(idx)
            .filter(|j| (j.time - t).abs() <= snap_tol(t))
    }

    /// Right-continuous value at `t`; jumps are returned exactly.
    pub fn value(&self, t: f64, out: &mut [f64]) {
        match self.jump_at(t) {
            Some(j) => out.copy_from_slice(&j.right),
            None => self.value_into(t, Side::Right, out),
        }
    }

    /// Left limit at `t`.
    pub fn value_left(&self, t: f64, out: &mut [f64]) {
        match self.jump_at(t) {
            Some(j) => out.copy_from_slice(&j.left),
            None => self.value_into(t, Side::Left, out),
        }
    }

    /// Restrict a matrix-valued flow to one column.
    pub fn column(&self, c: usize) -> Flow {
        let n = self.n;
        let pick = |v: &[f64]| v[c * n..(c + 1) * n].to_vec();
        let mut out = Flow::new(n, 1, self.start, pick(&self.init));
        out.nodes = self.nodes.clone();
        out.data.reserve(self.steps() * 4 * n);
        for k in 0..self.steps() {
            for slot in 0..4 {
                out.data
                    .extend_from_slice(&self.block(k, slot)[c * n..(c + 1) * n]);
            }
        }
        out.jumps = self
            .jumps
            .iter()
            .map(|j| JumpRecord {
                time: j.time,
                left: pick(&j.left),
                right: pick(&j.right),
            })
            .collect();
        out
    }
}
