//! Transportation simplex: northwest-corner start, MODI pricing, Bland's rule.
//!
//! Supplies are perturbed (`a_i + eps`, last demand `+ n eps`) so every basis
//! visited is nondegenerate. Once optimal, the flows of the final spanning tree
//! are recomputed from the unperturbed marginals; reduced costs do not depend
//! on the marginals, so the basis stays optimal.

use alloc::vec;
use alloc::vec::Vec;

use super::{check_marginals, check_shape, CostMatrix, Coupling, Direction, TransportResult};
use crate::matrix::Matrix;
use crate::{Error, Result};

/// Supply perturbation per row.
const PERTURBATION: f64 = 1e-12;

/// Flows this negative after recomputation are rounding noise.
const FLOW_CLAMP: f64 = 1e-9;

/// Solve `min` (or `max`) `sum_ij C_ij P_ij` over plans with row sums `a` and
/// column sums `b`.
pub fn solve_exact(a: &[f64], b: &[f64], cost: &CostMatrix, direction: Direction) -> Result<TransportResult> {
    check_marginals(a, b)?;
    check_shape(cost, a.len(), b.len())?;
    let (n, m) = (a.len(), b.len());
    let sign = direction.sign();
    let c: Vec<f64> = cost.matrix().as_slice().iter().map(|v| sign * v).collect();

    // Absorb the (tolerated) total-mass gap into b.
    let scale = a.iter().sum::<f64>() / b.iter().sum::<f64>();
    let b_scaled: Vec<f64> = b.iter().map(|v| v * scale).collect();

    let mut supply: Vec<f64> = a.iter().map(|v| v + PERTURBATION).collect();
    let mut demand = b_scaled.clone();
    demand[m - 1] += n as f64 * PERTURBATION;

    let mut basis = Basis::northwest_corner(n, m, &mut supply, &mut demand);
    basis.optimize(&c)?;
    basis.recompute_flows(a, &b_scaled);

    let mut plan = Matrix::zeros(n, m);
    for (idx, &on) in basis.basic.iter().enumerate() {
        if on {
            let f = basis.flow[idx];
            plan.as_mut_slice()[idx] = if f < 0.0 && f > -FLOW_CLAMP { 0.0 } else { f };
        }
    }
    let value = plan.inner(cost.matrix());
    basis.compute_potentials(&c);
    let dual_row = basis.u.iter().map(|u| sign * u).collect();
    let dual_col = basis.v.iter().map(|v| sign * v).collect();
    Ok(TransportResult {
        value,
        plan: Coupling::from_parts(plan, a.to_vec(), b.to_vec()),
        dual_row,
        dual_col,
    })
}

/// Spanning-tree basis over `n + m` nodes: rows are nodes `0..n`, columns
/// `n..n + m`.
struct Basis {
    n: usize,
    m: usize,
    flow: Vec<f64>,
    basic: Vec<bool>,
    row_adj: Vec<Vec<usize>>,
    col_adj: Vec<Vec<usize>>,
    u: Vec<f64>,
    v: Vec<f64>,
    parent: Vec<usize>,
    depth: Vec<usize>,
}

impl Basis {
    fn northwest_corner(n: usize, m: usize, supply: &mut [f64], demand: &mut [f64]) -> Self {
        let mut basis = Basis {
            n,
            m,
            flow: vec![0.0; n * m],
            basic: vec![false; n * m],
            row_adj: vec![Vec::new(); n],
            col_adj: vec![Vec::new(); m],
            u: vec![0.0; n],
            v: vec![0.0; m],
            parent: vec![usize::MAX; n + m],
            depth: vec![0; n + m],
        };
        let (mut i, mut j) = (0, 0);
        loop {
            let x = supply[i].min(demand[j]).max(0.0);
            basis.insert(i, j, x);
            supply[i] -= x;
            demand[j] -= x;
            if i == n - 1 && j == m - 1 {
                break;
            }
            // Exactly one index advances per step, giving n + m - 1 cells.
            if j == m - 1 || (i < n - 1 && supply[i] <= demand[j]) {
                i += 1;
            } else {
                j += 1;
            }
        }
        basis
    }

    fn insert(&mut self, i: usize, j: usize, x: f64) {
        let idx = i * self.m + j;
        self.flow[idx] = x;
        self.basic[idx] = true;
        self.row_adj[i].push(j);
        self.col_adj[j].push(i);
    }

    fn remove(&mut self, i: usize, j: usize) {
        let idx = i * self.m + j;
        self.flow[idx] = 0.0;
        self.basic[idx] = false;
        if let Some(p) = self.row_adj[i].iter().position(|&c| c == j) {
            self.row_adj[i].swap_remove(p);
        }
        if let Some(p) = self.col_adj[j].iter().position(|&r| r == i) {
            self.col_adj[j].swap_remove(p);
        }
    }

    /// Solve `u_i + v_j = c_ij` on the tree with `u_0 = 0`, recording parents.
    fn compute_potentials(&mut self, c: &[f64]) {
        let (n, m) = (self.n, self.m);
        let mut visited = vec![false; n + m];
        let mut stack = vec![0usize];
        visited[0] = true;
        self.u[0] = 0.0;
        self.parent[0] = usize::MAX;
        self.depth[0] = 0;
        while let Some(node) = stack.pop() {
            if node < n {
                let i = node;
                for &j in &self.row_adj[i] {
                    if !visited[n + j] {
                        visited[n + j] = true;
                        self.v[j] = c[i * m + j] - self.u[i];
                        self.parent[n + j] = i;
                        self.depth[n + j] = self.depth[i] + 1;
                        stack.push(n + j);
                    }
                }
            } else {
                let j = node - n;
                for &i in &self.col_adj[j] {
                    if !visited[i] {
                        visited[i] = true;
                        self.u[i] = c[i * m + j] - self.v[j];
                        self.parent[i] = node;
                        self.depth[i] = self.depth[node] + 1;
                        stack.push(i);
                    }
                }
            }
        }
        debug_assert!(visited.iter().all(|&v| v), "basis is not a spanning tree");
    }

    /// First nonbasic cell (row-major) with negative reduced cost.
    fn entering(&self, c: &[f64], tol: f64) -> Option<(usize, usize)> {
        let m = self.m;
        for i in 0..self.n {
            let ui = self.u[i];
            let row = &c[i * m..(i + 1) * m];
            for (j, &cij) in row.iter().enumerate() {
                if cij - ui - self.v[j] < -tol && !self.basic[i * m + j] {
                    return Some((i, j));
                }
            }
        }
        None
    }

    /// Tree path from column `j` to row `i`, as a node sequence.
    fn tree_path(&self, i: usize, j: usize) -> Vec<usize> {
        let mut from_col = vec![self.n + j];
        let mut from_row = vec![i];
        let (mut x, mut y) = (self.n + j, i);
        while x != y {
            if self.depth[x] >= self.depth[y] {
                x = self.parent[x];
                from_col.push(x);
            } else {
                y = self.parent[y];
                from_row.push(y);
            }
        }
        // Both sequences end at the common ancestor; drop one copy.
        from_row.pop();
        from_col.extend(from_row.into_iter().rev());
        from_col
    }

    fn cell(&self, p: usize, q: usize) -> (usize, usize) {
        if p < self.n {
            (p, q - self.n)
        } else {
            (q, p - self.n)
        }
    }

    fn optimize(&mut self, c: &[f64]) -> Result<()> {
        let scale = c.iter().fold(1.0f64, |s, v| s.max(v.abs()));
        let tol = 1e-11 * scale;
        let limit = 50 * self.n * self.m + 10_000;
        for _ in 0..limit {
            self.compute_potentials(c);
            let Some((ei, ej)) = self.entering(c, tol) else {
                return Ok(());
            };
            let path = self.tree_path(ei, ej);
            // Edges along the path alternate -, +, -, ... starting at column ej.
            let mut theta = f64::INFINITY;
            let mut leaving = usize::MAX;
            for (k, w) in path.windows(2).enumerate() {
                if k % 2 == 0 {
                    let (r, s) = self.cell(w[0], w[1]);
                    let idx = r * self.m + s;
                    let f = self.flow[idx];
                    if f < theta || (f == theta && idx < leaving) {
                        theta = f;
                        leaving = idx;
                    }
                }
            }
            let theta = theta.max(0.0);
            for (k, w) in path.windows(2).enumerate() {
                let (r, s) = self.cell(w[0], w[1]);
                let idx = r * self.m + s;
                if k % 2 == 0 {
                    self.flow[idx] -= theta;
                } else {
                    self.flow[idx] += theta;
                }
            }
            self.remove(leaving / self.m, leaving % self.m);
            self.insert(ei, ej, theta);
        }
        Err(Error::PivotLimit(limit))
    }

    /// Basic flows for the given marginals, by repeatedly peeling tree leaves.
    fn recompute_flows(&mut self, a: &[f64], b: &[f64]) {
        let (n, m) = (self.n, self.m);
        let mut residual: Vec<f64> = a.iter().chain(b).copied().collect();
        let mut degree: Vec<usize> = self
            .row_adj
            .iter()
            .chain(&self.col_adj)
            .map(Vec::len)
            .collect();
        let mut done = vec![false; n + m];
        let mut queue: Vec<usize> = (0..n + m).filter(|&k| degree[k] == 1).collect();
        while let Some(leaf) = queue.pop() {
            if done[leaf] || degree[leaf] != 1 {
                continue;
            }
            done[leaf] = true;
            let other = if leaf < n {
                self.row_adj[leaf].iter().map(|&j| n + j).find(|&k| !done[k])
            } else {
                self.col_adj[leaf - n].iter().copied().find(|&k| !done[k])
            };
            let Some(other) = other else { continue };
            let (r, s) = self.cell(leaf, other);
            let x = residual[leaf];
            self.flow[r * m + s] = x;
            residual[other] -= x;
            degree[other] -= 1;
            if degree[other] == 1 {
                queue.push(other);
            }
        }
    }
}
