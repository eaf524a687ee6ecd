//! Dense two-phase tableau simplex with Bland's rule for
//! `min c'x  s.t.  A x = b, x >= 0` with `b >= 0`.

use crate::error::{Error, Result};

pub(crate) const PIVOT_TOL: f64 = 1e-9;

#[derive(Debug)]
pub(crate) enum SimplexResult {
    Optimal {
        x: Vec<f64>,
        /// Simplex multipliers `c_B B^{-1}`.
        duals: Vec<f64>,
    },
    /// Phase one ended with positive infeasibility. `farkas` satisfies
    /// `A^T y <= 0` and `b^T y > 0`.
    Infeasible { farkas: Vec<f64> },
    Unbounded,
}

struct Tableau {
    m: usize,
    n: usize,
    // m rows of n structural + m artificial + 1 rhs columns
    t: Vec<Vec<f64>>,
    basis: Vec<usize>,
    pivots: usize,
    cap: usize,
}

impl Tableau {
    fn rhs(&self, r: usize) -> f64 {
        self.t[r][self.n + self.m]
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let width = self.n + self.m + 1;
        let p = self.t[row][col];
        for k in 0..width {
            self.t[row][k] /= p;
        }
        let prow = self.t[row].clone();
        for r in 0..self.m {
            if r != row {
                let factor = self.t[r][col];
                if factor != 0.0 {
                    for k in 0..width {
                        self.t[r][k] -= factor * prow[k];
                    }
                }
            }
        }
        self.basis[row] = col;
        self.pivots += 1;
    }

    fn duals(&self, cost: &[f64]) -> Vec<f64> {
        (0..self.m)
            .map(|k| (0..self.m).map(|r| cost[self.basis[r]] * self.t[r][self.n + k]).sum())
            .collect()
    }

    /// Runs Bland-rule pivots minimising `cost`; columns `>= allowed` never enter.
    fn optimise(&mut self, cost: &[f64], allowed: usize) -> Result<bool> {
        loop {
            if self.pivots > self.cap {
                return Err(Error::Degenerate { iterations: self.pivots });
            }
            let entering = (0..allowed).find(|&j| {
                if self.basis.contains(&j) {
                    return false;
                }
                let reduced = cost[j] - (0..self.m).map(|r| cost[self.basis[r]] * self.t[r][j]).sum::<f64>();
                reduced < -PIVOT_TOL
            });
            let Some(col) = entering else { return Ok(true) };
            let mut leave: Option<(usize, f64)> = None;
            for r in 0..self.m {
                let a = self.t[r][col];
                if a > PIVOT_TOL {
                    let ratio = self.rhs(r) / a;
                    leave = match leave {
                        None => Some((r, ratio)),
                        Some((lr, lratio)) => {
                            if ratio < lratio - 1e-12 || (ratio <= lratio + 1e-12 && self.basis[r] < self.basis[lr]) {
                                Some((r, ratio))
                            } else {
                                Some((lr, lratio))
                            }
                        }
                    };
                }
            }
            match leave {
                Some((row, _)) => self.pivot(row, col),
                None => return Ok(false),
            }
        }
    }
}

pub(crate) fn solve(a: &[Vec<f64>], b: &[f64], c: &[f64]) -> Result<SimplexResult> {
    let m = a.len();
    let n = c.len();
    debug_assert!(b.iter().all(|x| *x >= 0.0));
    let mut t = vec![vec![0.0; n + m + 1]; m];
    for r in 0..m {
        t[r][..n].copy_from_slice(&a[r]);
        t[r][n + r] = 1.0;
        t[r][n + m] = b[r];
    }
    let mut tab = Tableau { m, n, t, basis: (n..n + m).collect(), pivots: 0, cap: 50 * (n + m) + 1000 };

    let mut phase1 = vec![0.0; n + m];
    phase1[n..].iter_mut().for_each(|x| *x = 1.0);
    tab.optimise(&phase1, n)?;
    let infeasibility: f64 = (0..m).filter(|&r| tab.basis[r] >= n).map(|r| tab.rhs(r)).sum();
    let scale = 1.0 + b.iter().map(|x| x.abs()).fold(0.0, f64::max);
    if infeasibility > 1e-9 * scale {
        return Ok(SimplexResult::Infeasible { farkas: tab.duals(&phase1) });
    }

    // Drive zero-level artificials out of the basis where possible.
    for r in 0..m {
        if tab.basis[r] >= n {
            if let Some(col) = (0..n).find(|&j| !tab.basis.contains(&j) && tab.t[r][j].abs() > PIVOT_TOL) {
                tab.pivot(r, col);
            }
        }
    }

    let mut phase2 = c.to_vec();
    phase2.extend(std::iter::repeat_n(0.0, m));
    if !tab.optimise(&phase2, n)? {
        return Ok(SimplexResult::Unbounded);
    }
    let mut x = vec![0.0; n];
    for r in 0..m {
        if tab.basis[r] < n {
            x[tab.basis[r]] = tab.rhs(r).max(0.0);
        }
    }
    Ok(SimplexResult::Optimal { x, duals: tab.duals(&phase2) })
}
