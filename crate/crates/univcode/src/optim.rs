//! Small optimizers: one-dimensional maximization on `[0, 1]`, Nelder–Mead, and a
//! dense two-phase simplex method for the linear programs behind the MAC regions.

use crate::error::{Error, Result};

const GRID_POINTS: usize = 64;
const GOLDEN_TOL: f64 = 1e-6;

/// Maximizes `f` on `[0, 1]`: a 64-point grid locates the best cell, then a
/// golden-section search refines inside the neighbouring cells.
pub fn maximize_unit_interval(f: impl Fn(f64) -> f64) -> (f64, f64) {
    let step = 1.0 / (GRID_POINTS - 1) as f64;
    let mut best = (0.0, f(0.0));
    for i in 1..GRID_POINTS {
        let s = i as f64 * step;
        let v = f(s);
        if v > best.1 {
            best = (s, v);
        }
    }
    let lo = (best.0 - step).max(0.0);
    let hi = (best.0 + step).min(1.0);
    let refined = golden_max(&f, lo, hi, GOLDEN_TOL);
    if refined.1 > best.1 {
        refined
    } else {
        best
    }
}

/// Golden-section search for a maximum of `f` on `[lo, hi]`.
pub fn golden_max(f: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64) {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > tol {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
        }
    }
    if f1 > f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Nelder–Mead minimization with the usual reflection/expansion/contraction/shrink
/// coefficients (1, 2, 1/2, 1/2).
pub fn nelder_mead(f: impl Fn(&[f64]) -> f64, x0: &[f64], step: f64, iterations: usize) -> (Vec<f64>, f64) {
    let n = x0.len();
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((x0.to_vec(), f(x0)));
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += step;
        let v = f(&x);
        simplex.push((x, v));
    }
    for _ in 0..iterations {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let centroid: Vec<f64> =
            (0..n).map(|j| simplex[..n].iter().map(|(x, _)| x[j]).sum::<f64>() / n as f64).collect();
        let worst = simplex[n].clone();
        let along = |t: f64| -> Vec<f64> { (0..n).map(|j| centroid[j] + t * (worst.0[j] - centroid[j])).collect() };
        let xr = along(-1.0);
        let fr = f(&xr);
        if fr < simplex[0].1 {
            let xe = along(-2.0);
            let fe = f(&xe);
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
        } else {
            let xc = if fr < worst.1 { along(-0.5) } else { along(0.5) };
            let fc = f(&xc);
            if fc < worst.1.min(fr) {
                simplex[n] = (xc, fc);
            } else {
                let best = simplex[0].0.clone();
                for item in simplex.iter_mut().skip(1) {
                    let x: Vec<f64> = (0..n).map(|j| best[j] + 0.5 * (item.0[j] - best[j])).collect();
                    let v = f(&x);
                    *item = (x, v);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    simplex.swap_remove(0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

/// `maximize c.x` subject to linear rows and `x >= 0`.
#[derive(Clone, Debug)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub rows: Vec<(Vec<f64>, Relation, f64)>,
}

#[derive(Clone, Debug)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub value: f64,
}

const LP_EPS: f64 = 1e-11;

impl LinearProgram {
    pub fn new(objective: Vec<f64>) -> Self {
        LinearProgram { objective, rows: Vec::new() }
    }

    pub fn push(&mut self, coeffs: Vec<f64>, rel: Relation, rhs: f64) {
        self.rows.push((coeffs, rel, rhs));
    }

    pub fn solve(&self) -> Result<LpSolution> {
        let n = self.objective.len();
        let m = self.rows.len();
        // Column layout: structural | slack or surplus per inequality | artificials.
        let mut rows: Vec<(Vec<f64>, Relation, f64)> = self
            .rows
            .iter()
            .map(|(a, rel, b)| {
                if *b < 0.0 {
                    let flipped = match rel {
                        Relation::Le => Relation::Ge,
                        Relation::Ge => Relation::Le,
                        Relation::Eq => Relation::Eq,
                    };
                    (a.iter().map(|v| -v).collect(), flipped, -b)
                } else {
                    (a.clone(), *rel, *b)
                }
            })
            .collect();
        let n_slack = rows.iter().filter(|r| r.1 != Relation::Eq).count();
        let n_art = rows.iter().filter(|r| r.1 != Relation::Le).count();
        let width = n + n_slack + n_art;
        let mut tab = vec![vec![0.0; width + 1]; m];
        let mut basis = vec![0usize; m];
        let (mut s_col, mut a_col) = (n, n + n_slack);
        for (i, (a, rel, b)) in rows.iter_mut().enumerate() {
            if a.len() != n {
                return Err(Error::InvalidParameter("LP row length mismatch".into()));
            }
            tab[i][..n].copy_from_slice(a);
            tab[i][width] = *b;
            match rel {
                Relation::Le => {
                    tab[i][s_col] = 1.0;
                    basis[i] = s_col;
                    s_col += 1;
                }
                Relation::Ge => {
                    tab[i][s_col] = -1.0;
                    s_col += 1;
                    tab[i][a_col] = 1.0;
                    basis[i] = a_col;
                    a_col += 1;
                }
                Relation::Eq => {
                    tab[i][a_col] = 1.0;
                    basis[i] = a_col;
                    a_col += 1;
                }
            }
        }
        let art_start = n + n_slack;
        if n_art > 0 {
            let mut cost = vec![0.0; width];
            for c in cost.iter_mut().skip(art_start) {
                *c = -1.0;
            }
            run_simplex(&mut tab, &mut basis, &cost, width)?;
            let infeas: f64 = basis.iter().enumerate().filter(|(_, &b)| b >= art_start).map(|(i, _)| tab[i][width]).sum();
            if infeas > 1e-9 {
                return Err(Error::Numerical("linear program is infeasible".into()));
            }
            // Drive remaining (zero-valued) artificials out of the basis where possible.
            for i in 0..m {
                if basis[i] >= art_start {
                    if let Some(j) = (0..art_start).find(|&j| tab[i][j].abs() > 1e-9) {
                        pivot(&mut tab, &mut basis, i, j, width);
                    }
                }
            }
            for row in tab.iter_mut() {
                for v in row.iter_mut().take(width).skip(art_start) {
                    *v = 0.0;
                }
            }
        }
        let mut cost = vec![0.0; width];
        cost[..n].copy_from_slice(&self.objective);
        run_simplex(&mut tab, &mut basis, &cost, art_start)?;
        let mut x = vec![0.0; n];
        for (i, &b) in basis.iter().enumerate() {
            if b < n {
                x[b] = tab[i][width];
            }
        }
        let value = x.iter().zip(&self.objective).map(|(a, b)| a * b).sum();
        Ok(LpSolution { x, value })
    }
}

fn pivot(tab: &mut [Vec<f64>], basis: &mut [usize], r: usize, c: usize, width: usize) {
    let p = tab[r][c];
    for v in tab[r].iter_mut() {
        *v /= p;
    }
    let prow = tab[r].clone();
    for (i, row) in tab.iter_mut().enumerate() {
        if i != r {
            let f = row[c];
            if f != 0.0 {
                for j in 0..=width {
                    row[j] -= f * prow[j];
                }
            }
        }
    }
    basis[r] = c;
}

/// Primal simplex maximizing `cost` over columns `< active`; Dantzig pricing with a
/// switch to Bland's rule after many degenerate steps.
fn run_simplex(tab: &mut [Vec<f64>], basis: &mut [usize], cost: &[f64], active: usize) -> Result<()> {
    let m = tab.len();
    let width = cost.len();
    let max_iter = 50_000 + 50 * (active + m);
    let mut degenerate = 0usize;
    for _ in 0..max_iter {
        let reduced: Vec<f64> = (0..active)
            .map(|j| cost[j] - (0..m).map(|i| cost[basis[i]] * tab[i][j]).sum::<f64>())
            .collect();
        let bland = degenerate > 50;
        let entering = if bland {
            (0..active).find(|&j| reduced[j] > LP_EPS)
        } else {
            (0..active).filter(|&j| reduced[j] > LP_EPS).max_by(|&a, &b| reduced[a].total_cmp(&reduced[b]))
        };
        let Some(c) = entering else { return Ok(()) };
        let mut leave: Option<(usize, f64)> = None;
        for i in 0..m {
            let a = tab[i][c];
            if a > LP_EPS {
                let ratio = tab[i][width] / a;
                let better = match leave {
                    None => true,
                    Some((li, lr)) => ratio < lr - 1e-13 || (ratio <= lr + 1e-13 && basis[i] < basis[li]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        let Some((r, ratio)) = leave else {
            return Err(Error::Numerical("linear program is unbounded".into()));
        };
        degenerate = if ratio.abs() < 1e-13 { degenerate + 1 } else { 0 };
        pivot(tab, basis, r, c, width);
    }
    Err(Error::Numerical("simplex iteration limit reached".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_interval_max_of_concave() {
        let (s, v) = maximize_unit_interval(|s| -(s - 0.3137).powi(2));
        assert!((s - 0.3137).abs() < 1e-5 && v.abs() < 1e-9);
        let (s, _) = maximize_unit_interval(|s| s);
        assert_eq!(s, 1.0);
    }

    #[test]
    fn nelder_mead_rosenbrock() {
        let f = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let (x, v) = nelder_mead(f, &[-1.2, 1.0], 0.5, 2000);
        assert!(v < 1e-8, "{x:?} {v}");
    }

    #[test]
    fn lp_textbook() {
        // max 3x + 5y, x <= 4, 2y <= 12, 3x + 2y <= 18 -> (2, 6), 36
        let mut lp = LinearProgram::new(vec![3.0, 5.0]);
        lp.push(vec![1.0, 0.0], Relation::Le, 4.0);
        lp.push(vec![0.0, 2.0], Relation::Le, 12.0);
        lp.push(vec![3.0, 2.0], Relation::Le, 18.0);
        let s = lp.solve().unwrap();
        assert!((s.value - 36.0).abs() < 1e-9);
        assert!((s.x[0] - 2.0).abs() < 1e-9 && (s.x[1] - 6.0).abs() < 1e-9);
    }

    #[test]
    fn lp_with_equality_and_ge() {
        // max x1 + 2 x2 s.t. x1 + x2 = 1, x2 <= 0.25, x1 >= 0.1
        let mut lp = LinearProgram::new(vec![1.0, 2.0]);
        lp.push(vec![1.0, 1.0], Relation::Eq, 1.0);
        lp.push(vec![0.0, 1.0], Relation::Le, 0.25);
        lp.push(vec![1.0, 0.0], Relation::Ge, 0.1);
        let s = lp.solve().unwrap();
        assert!((s.value - 1.25).abs() < 1e-9);
    }

    #[test]
    fn lp_infeasible() {
        let mut lp = LinearProgram::new(vec![1.0]);
        lp.push(vec![1.0], Relation::Ge, 2.0);
        lp.push(vec![1.0], Relation::Le, 1.0);
        assert!(lp.solve().is_err());
    }
}
