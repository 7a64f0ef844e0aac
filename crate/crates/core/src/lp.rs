//! Dense two-phase simplex for the small feasibility problems behind part
//! enumeration. Bland's rule throughout, so it terminates on degenerate
//! problems.

const PIVOT_EPS: f64 = 1e-9;
const MAX_PIVOTS: usize = 20_000;

/// Outcome of `minimize`.
#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal { x: Vec<f64>, objective: f64 },
    Infeasible,
    Unbounded,
}

struct Tableau {
    rows: Vec<Vec<f64>>,
    basis: Vec<usize>,
    ncols: usize,
}

impl Tableau {
    fn rhs(&self, i: usize) -> f64 {
        self.rows[i][self.ncols]
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c];
        for v in self.rows[r].iter_mut() {
            *v /= p;
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c];
            if f != 0.0 {
                for (v, pv) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
            }
        }
        self.basis[r] = c;
    }

    fn objective(&self, cost: &[f64]) -> f64 {
        self.basis.iter().enumerate().map(|(i, &b)| cost[b] * self.rhs(i)).sum()
    }

    /// Bland-rule simplex over columns `< allowed`. Returns false when unbounded.
    fn run(&mut self, cost: &[f64], allowed: usize) -> bool {
        for _ in 0..MAX_PIVOTS {
            let mut entering = None;
            for j in 0..allowed {
                if self.basis.contains(&j) {
                    continue;
                }
                let reduced = cost[j]
                    - self.basis.iter().enumerate().map(|(i, &b)| cost[b] * self.rows[i][j]).sum::<f64>();
                if reduced < -PIVOT_EPS {
                    entering = Some(j);
                    break;
                }
            }
            let Some(c) = entering else { return true };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.rows.len() {
                let a = self.rows[i][c];
                if a > PIVOT_EPS {
                    let ratio = self.rhs(i) / a;
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((li, lr)) => {
                            if ratio < lr - 1e-12 || (ratio <= lr + 1e-12 && self.basis[i] < self.basis[li]) {
                                Some((i, ratio))
                            } else {
                                Some((li, lr))
                            }
                        }
                    };
                }
            }
            let Some((r, _)) = leave else { return false };
            self.pivot(r, c);
        }
        true
    }
}

/// Minimize `cost . x` subject to `a x = b`, `x >= 0`.
pub fn minimize(a: &[Vec<f64>], b: &[f64], cost: &[f64], feas_tol: f64) -> LpOutcome {
    let m = a.len();
    let n = cost.len();
    let ncols = n + m;
    let mut rows = Vec::with_capacity(m);
    for (ai, &bi) in a.iter().zip(b) {
        let sign = if bi < 0.0 { -1.0 } else { 1.0 };
        let mut row = vec![0.0; ncols + 1];
        for (j, v) in ai.iter().enumerate() {
            row[j] = sign * v;
        }
        row[ncols] = sign * bi;
        rows.push(row);
    }
    for (i, row) in rows.iter_mut().enumerate() {
        row[n + i] = 1.0;
    }
    let mut t = Tableau { rows, basis: (n..n + m).collect(), ncols };

    let mut phase1 = vec![0.0; ncols];
    for c in phase1.iter_mut().skip(n) {
        *c = 1.0;
    }
    t.run(&phase1, ncols);
    let scale = 1.0 + b.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    if t.objective(&phase1) > feas_tol * scale {
        return LpOutcome::Infeasible;
    }
    // drive zero-level artificials out of the basis where possible
    for r in 0..m {
        if t.basis[r] >= n {
            if let Some(c) = (0..n).find(|&j| t.rows[r][j].abs() > PIVOT_EPS && !t.basis.contains(&j)) {
                t.pivot(r, c);
            }
        }
    }
    let mut phase2 = cost.to_vec();
    phase2.extend(std::iter::repeat(0.0).take(m));
    if !t.run(&phase2, n) {
        return LpOutcome::Unbounded;
    }
    let mut x = vec![0.0; n];
    for (i, &bcol) in t.basis.iter().enumerate() {
        if bcol < n {
            x[bcol] = t.rhs(i).max(0.0);
        }
    }
    let objective = cost.iter().zip(&x).map(|(c, v)| c * v).sum();
    LpOutcome::Optimal { x, objective }
}

/// Find `c` with `g_i . c = 0` off `support` and `1 <= g_i . c <= big` on it,
/// minimizing the sum of `g_i . c` over the support. `None` when infeasible.
pub fn signature_witness(rows: &[Vec<f64>], support: &[bool], big: f64) -> Option<Vec<f64>> {
    let d = rows.first().map_or(0, |r| r.len());
    let k = support.iter().filter(|s| **s).count();
    let n = 2 * d + 2 * k;
    let mut a = Vec::new();
    let mut b = Vec::new();
    let mut slack = 2 * d;
    let mut cost = vec![0.0; n];
    for (g, &on) in rows.iter().zip(support) {
        let mut base = vec![0.0; n];
        for j in 0..d {
            base[j] = g[j];
            base[d + j] = -g[j];
        }
        if on {
            for j in 0..d {
                cost[j] += g[j];
                cost[d + j] -= g[j];
            }
            let mut lo = base.clone();
            lo[slack] = -1.0;
            a.push(lo);
            b.push(1.0);
            let mut hi = base;
            hi[slack + 1] = 1.0;
            a.push(hi);
            b.push(big);
            slack += 2;
        } else {
            a.push(base);
            b.push(0.0);
        }
    }
    match minimize(&a, &b, &cost, 1e-9) {
        LpOutcome::Optimal { x, .. } => Some((0..d).map(|j| x[j] - x[d + j]).collect()),
        _ => None,
    }
}
