//! Exact discrete transport by the transportation simplex (MODI pivoting on a
//! spanning-tree basis).

use std::collections::VecDeque;

use super::{BaselineError, W1_MAX_SUPPORT};

/// Mass tolerance for marginal agreement.
const MASS_TOL: f64 = 1e-10;

/// Coupling between the supports of two discrete measures.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportPlan {
    /// `coupling[i][j]` is the mass moved from source `i` to target `j`.
    pub coupling: Vec<Vec<f64>>,
}

impl TransportPlan {
    pub fn cost(&self, cost: &[Vec<f64>]) -> f64 {
        self.coupling
            .iter()
            .zip(cost)
            .map(|(row, c)| row.iter().zip(c).map(|(x, y)| x * y).sum::<f64>())
            .sum()
    }

    pub fn row_sums(&self) -> Vec<f64> {
        self.coupling.iter().map(|r| r.iter().sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<f64> {
        let n = self.coupling.first().map_or(0, Vec::len);
        (0..n)
            .map(|j| self.coupling.iter().map(|r| r[j]).sum())
            .collect()
    }
}

pub(crate) fn check_problem(
    cost: &[Vec<f64>],
    mu: &[f64],
    nu: &[f64],
    limit: usize,
) -> Result<(), BaselineError> {
    for &len in &[mu.len(), nu.len()] {
        if len > limit {
            return Err(BaselineError::TooLarge { got: len, limit });
        }
    }
    let cols = cost.first().map_or(0, Vec::len);
    if cost.len() != mu.len() || cost.iter().any(|r| r.len() != nu.len()) {
        return Err(BaselineError::ShapeMismatch {
            rows: cost.len(),
            cols,
            sources: mu.len(),
            targets: nu.len(),
        });
    }
    if let Some(&c) = cost.iter().flatten().find(|c| !(c.is_finite() && **c >= 0.0)) {
        return Err(BaselineError::InvalidCost(c));
    }
    if let Some(&m) = mu.iter().chain(nu).find(|m| !(m.is_finite() && **m >= 0.0)) {
        return Err(BaselineError::InvalidMass(m));
    }
    let (sm, sn): (f64, f64) = (mu.iter().sum(), nu.iter().sum());
    if (sm - sn).abs() > MASS_TOL || mu.is_empty() || nu.is_empty() {
        return Err(BaselineError::Infeasible {
            source_mass: sm,
            target_mass: sn,
        });
    }
    Ok(())
}

/// Minimum of `Σ π_ij c_ij` over couplings of `mu` and `nu`, with an optimal
/// plan. Supports are limited to 256 points per side.
pub fn w1_oracle(
    cost: &[Vec<f64>],
    mu: &[f64],
    nu: &[f64],
) -> Result<(f64, TransportPlan), BaselineError> {
    check_problem(cost, mu, nu, W1_MAX_SUPPORT)?;
    solve(cost, mu, nu)
}

/// Transportation simplex without the size limit.
pub(crate) fn solve(
    cost: &[Vec<f64>],
    mu: &[f64],
    nu: &[f64],
) -> Result<(f64, TransportPlan), BaselineError> {
    // zero-mass rows and columns never carry flow
    let rows: Vec<usize> = (0..mu.len()).filter(|&i| mu[i] > 0.0).collect();
    let cols: Vec<usize> = (0..nu.len()).filter(|&j| nu[j] > 0.0).collect();
    let mut coupling = vec![vec![0.0; nu.len()]; mu.len()];
    if rows.is_empty() || cols.is_empty() {
        return Ok((0.0, TransportPlan { coupling }));
    }
    let supply: Vec<f64> = rows.iter().map(|&i| mu[i]).collect();
    let ratio = supply.iter().sum::<f64>() / cols.iter().map(|&j| nu[j]).sum::<f64>();
    let demand: Vec<f64> = cols.iter().map(|&j| nu[j] * ratio).collect();
    let c: Vec<Vec<f64>> = rows
        .iter()
        .map(|&i| cols.iter().map(|&j| cost[i][j]).collect())
        .collect();

    let mut basis = Simplex::northwest(&supply, &demand);
    basis.optimize(&c)?;
    for &(i, j, x) in &basis.cells {
        coupling[rows[i]][cols[j]] += x;
    }
    let plan = TransportPlan { coupling };
    Ok((plan.cost(cost), plan))
}

struct Simplex {
    m: usize,
    n: usize,
    /// Basic cells `(row, col, flow)`; always `m + n − 1` of them, forming a
    /// spanning tree of the bipartite row/column graph.
    cells: Vec<(usize, usize, f64)>,
}

impl Simplex {
    fn northwest(supply: &[f64], demand: &[f64]) -> Self {
        let (m, n) = (supply.len(), demand.len());
        let mut a = supply.to_vec();
        let mut b = demand.to_vec();
        let mut cells = Vec::with_capacity(m + n - 1);
        let (mut i, mut j) = (0, 0);
        loop {
            let x = a[i].min(b[j]).max(0.0);
            cells.push((i, j, x));
            a[i] -= x;
            b[j] -= x;
            if i == m - 1 && j == n - 1 {
                break;
            }
            // advance exactly one index so the basis stays a tree
            if (a[i] <= b[j] && i < m - 1) || j == n - 1 {
                i += 1;
            } else {
                j += 1;
            }
        }
        Self { m, n, cells }
    }

    fn optimize(&mut self, c: &[Vec<f64>]) -> Result<(), BaselineError> {
        let scale = c.iter().flatten().fold(1.0f64, |acc, &x| acc.max(x));
        let eps = 1e-12 * scale;
        let limit = 50 * (self.m + self.n) * (self.m + self.n) + 1000;
        for _ in 0..limit {
            let adj = self.adjacency();
            let (u, v) = self.potentials(c, &adj);
            let mut entering = None;
            let mut most = -eps;
            for (i, row) in c.iter().enumerate() {
                for (j, &cij) in row.iter().enumerate() {
                    let r = cij - u[i] - v[j];
                    if r < most {
                        most = r;
                        entering = Some((i, j));
                    }
                }
            }
            let Some((p, q)) = entering else {
                return Ok(());
            };
            self.pivot(p, q, &adj);
        }
        Err(BaselineError::PivotLimit(limit))
    }

    /// Node ids: rows `0..m`, columns `m..m+n`; each entry lists
    /// `(neighbor, basic cell index)`.
    fn adjacency(&self) -> Vec<Vec<(usize, usize)>> {
        let mut adj = vec![Vec::new(); self.m + self.n];
        for (k, &(i, j, _)) in self.cells.iter().enumerate() {
            adj[i].push((self.m + j, k));
            adj[self.m + j].push((i, k));
        }
        adj
    }

    fn potentials(&self, c: &[Vec<f64>], adj: &[Vec<(usize, usize)>]) -> (Vec<f64>, Vec<f64>) {
        let mut pot = vec![f64::NAN; self.m + self.n];
        pot[0] = 0.0;
        let mut queue = VecDeque::from([0usize]);
        while let Some(x) = queue.pop_front() {
            for &(y, k) in &adj[x] {
                if pot[y].is_nan() {
                    let (i, j, _) = self.cells[k];
                    // u_i + v_j = c_ij on basic cells
                    pot[y] = c[i][j] - pot[x];
                    queue.push_back(y);
                }
            }
        }
        let v = pot.split_off(self.m);
        (pot, v)
    }

    fn pivot(&mut self, p: usize, q: usize, adj: &[Vec<(usize, usize)>]) {
        // tree path from column q back to row p
        let target = self.m + q;
        let mut via: Vec<Option<(usize, usize)>> = vec![None; self.m + self.n];
        let mut seen = vec![false; self.m + self.n];
        seen[p] = true;
        let mut queue = VecDeque::from([p]);
        while let Some(x) = queue.pop_front() {
            if x == target {
                break;
            }
            for &(y, k) in &adj[x] {
                if !seen[y] {
                    seen[y] = true;
                    via[y] = Some((x, k));
                    queue.push_back(y);
                }
            }
        }
        let mut path = Vec::new();
        let mut x = target;
        while let Some((prev, k)) = via[x] {
            path.push(k);
            x = prev;
        }
        // path[0] touches column q: it loses flow, then signs alternate
        let mut theta = f64::INFINITY;
        let mut leave = usize::MAX;
        for (pos, &k) in path.iter().enumerate() {
            if pos % 2 == 0 && self.cells[k].2 < theta {
                theta = self.cells[k].2;
                leave = k;
            }
        }
        for (pos, &k) in path.iter().enumerate() {
            if pos % 2 == 0 {
                self.cells[k].2 -= theta;
            } else {
                self.cells[k].2 += theta;
            }
        }
        self.cells[leave] = (p, q, theta);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forced_coupling() {
        let (v, plan) = w1_oracle(&[vec![3.5]], &[1.0], &[1.0]).unwrap();
        assert_eq!(v, 3.5);
        assert_eq!(plan.coupling, vec![vec![1.0]]);
    }

    #[test]
    fn identical_measures_use_diagonal() {
        let cost = vec![
            vec![0.0, 1.0, 2.0],
            vec![1.0, 0.0, 1.0],
            vec![2.0, 1.0, 0.0],
        ];
        let m = [0.2, 0.5, 0.3];
        let (v, plan) = w1_oracle(&cost, &m, &m).unwrap();
        assert_eq!(v, 0.0);
        for i in 0..3 {
            assert!((plan.coupling[i][i] - m[i]).abs() < 1e-15);
        }
    }

    #[test]
    fn split_to_middle() {
        let (v, _) = w1_oracle(&[vec![1.0], vec![1.0]], &[0.5, 0.5], &[1.0]).unwrap();
        assert!((v - 1.0).abs() < 1e-15);
    }

    #[test]
    fn assignment_problem() {
        // optimal assignment 0→1, 1→2, 2→0 with cost 1 + 2 + 3 = 6
        let cost = vec![
            vec![9.0, 1.0, 9.0],
            vec![9.0, 9.0, 2.0],
            vec![3.0, 9.0, 9.0],
        ];
        let m = [1.0 / 3.0; 3];
        let (v, plan) = w1_oracle(&cost, &m, &m).unwrap();
        assert!((v - 2.0).abs() < 1e-14);
        for s in plan.row_sums().iter().chain(&plan.col_sums()) {
            assert!((s - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn mass_mismatch() {
        assert!(matches!(
            w1_oracle(&[vec![1.0]], &[1.0], &[0.9]),
            Err(BaselineError::Infeasible { .. })
        ));
    }
}
