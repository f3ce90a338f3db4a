//! MAC-type regions as linear programs over time-sharing weights.
//!
//! Every `T`-conditional quantity is the `P_T`-average of the same quantity
//! evaluated at a single letter `t`, i.e. at a product input `P_{A|t} x P_{B|t}`.
//! Fixing a pool of such product inputs ("columns"), the best rate pair in a
//! direction `w` is a small LP in the weights `P_T` and the two rates.

use crate::channels::MACChannel;
use crate::error::Result;
use crate::infomeasure::{mac_cond_mi, Dist, MacTerm, MarkovTriple};
use crate::optim::{nelder_mead, LinearProgram, Relation};

use super::OptGrid;

pub(crate) const A_GIVEN_B: usize = 0;
pub(crate) const B_GIVEN_A: usize = 1;
pub(crate) const SUM: usize = 2;
pub(crate) const A_ONLY: usize = 3;
pub(crate) const B_ONLY: usize = 4;

/// One letter of `T`: a product input and its five information quantities per member.
#[derive(Clone, Debug)]
pub(crate) struct Column {
    pub pa: Vec<f64>,
    pub pb: Vec<f64>,
    pub q: Vec<[f64; 5]>,
}

impl Column {
    pub fn new(members: &[MACChannel], pa: Vec<f64>, pb: Vec<f64>) -> Result<Self> {
        let triple = MarkovTriple::product(Dist::new(pa.clone())?, Dist::new(pb.clone())?);
        let q = members
            .iter()
            .map(|m| {
                let f = |t| mac_cond_mi(&triple, m, t).map(|v| v.value.max(0.0));
                Ok([
                    f(MacTerm::AGivenBT)?,
                    f(MacTerm::BGivenAT)?,
                    f(MacTerm::ABGivenT)?,
                    f(MacTerm::AGivenT)?,
                    f(MacTerm::BGivenT)?,
                ])
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Column { pa, pb, q })
    }
}

/// Which pentagon-like constraint set a region uses: rows `ca R_A + cb R_B <= quantity`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Shape {
    /// `R_A <= I(A;Y|BT)`, `R_B <= I(B;Y|AT)`, `R_A + R_B <= I(AB;Y|T)`
    Pentagon,
    /// `R_A <= I(A;Y|T)`, `R_B <= I(B;Y|AT)`
    CornerA,
    /// `R_A <= I(A;Y|BT)`, `R_B <= I(B;Y|T)`
    CornerB,
    /// `R_A + R_B <= I(AB;Y|T)` only
    SumOnly,
}

impl Shape {
    fn rows(self) -> &'static [(f64, f64, usize)] {
        match self {
            Shape::Pentagon => &[(1.0, 0.0, A_GIVEN_B), (0.0, 1.0, B_GIVEN_A), (1.0, 1.0, SUM)],
            Shape::CornerA => &[(1.0, 0.0, A_ONLY), (0.0, 1.0, B_GIVEN_A)],
            Shape::CornerB => &[(1.0, 0.0, A_GIVEN_B), (0.0, 1.0, B_ONLY)],
            Shape::SumOnly => &[(1.0, 1.0, SUM)],
        }
    }
}

#[derive(Clone, Debug)]
pub(crate) struct Support {
    pub point: [f64; 2],
    pub value: f64,
    /// `(column index, weight)` pairs with positive weight.
    pub mix: Vec<(usize, f64)>,
}

pub(crate) fn simplex_grid(k: usize, step: f64) -> Vec<Vec<f64>> {
    let m = (1.0 / step).round().max(1.0) as usize;
    let mut out = Vec::new();
    let mut cur = vec![0usize; k];
    fn rec(i: usize, left: usize, cur: &mut Vec<usize>, m: usize, out: &mut Vec<Vec<f64>>) {
        let k = cur.len();
        if i == k - 1 {
            cur[i] = left;
            out.push(cur.iter().map(|&c| c as f64 / m as f64).collect());
            return;
        }
        for c in 0..=left {
            cur[i] = c;
            rec(i + 1, left - c, cur, m, out);
        }
    }
    rec(0, m, &mut cur, m, &mut out);
    out
}

pub(crate) struct Pool<'a> {
    pub members: &'a [MACChannel],
    pub cols: Vec<Column>,
}

impl<'a> Pool<'a> {
    pub fn grid(members: &'a [MACChannel], step: f64) -> Result<Self> {
        let ga = simplex_grid(members[0].a_size(), step);
        let gb = simplex_grid(members[0].b_size(), step);
        let mut cols = Vec::with_capacity(ga.len() * gb.len());
        for pa in &ga {
            for pb in &gb {
                cols.push(Column::new(members, pa.clone(), pb.clone())?);
            }
        }
        Ok(Pool { members, cols })
    }

    /// LP over the columns in `subset` (all columns if `None`).
    fn lp(&self, shape: Shape, w: [f64; 2], subset: &[usize], extra: Option<&Column>) -> Result<Support> {
        let cols: Vec<&Column> = subset.iter().map(|&i| &self.cols[i]).chain(extra).collect();
        let n = cols.len();
        let mut obj = vec![0.0; n + 2];
        obj[n] = w[0];
        obj[n + 1] = w[1];
        let mut lp = LinearProgram::new(obj);
        for theta in 0..self.members.len() {
            for &(ca, cb, idx) in shape.rows() {
                let mut row: Vec<f64> = cols.iter().map(|c| -c.q[theta][idx]).collect();
                row.push(ca);
                row.push(cb);
                lp.push(row, Relation::Le, 0.0);
            }
        }
        let mut norm = vec![1.0; n];
        norm.extend([0.0, 0.0]);
        lp.push(norm, Relation::Eq, 1.0);
        let sol = lp.solve()?;
        let mix = (0..n)
            .filter(|&i| sol.x[i] > 1e-12)
            .map(|i| (if i < subset.len() { subset[i] } else { usize::MAX }, sol.x[i]))
            .collect();
        Ok(Support { point: [sol.x[n], sol.x[n + 1]], value: sol.value, mix })
    }

    /// Best point in direction `w` using at most `t_card` columns.
    pub fn support(&self, shape: Shape, w: [f64; 2], t_card: usize) -> Result<Support> {
        let all: Vec<usize> = (0..self.cols.len()).collect();
        let best = self.lp(shape, w, &all, None)?;
        if best.mix.len() <= t_card {
            return Ok(best);
        }
        let idx: Vec<usize> = best.mix.iter().map(|(i, _)| *i).collect();
        let mut winner: Option<Support> = None;
        for subset in combinations(&idx, t_card) {
            let s = self.lp(shape, w, &subset, None)?;
            if winner.as_ref().map_or(true, |b| s.value > b.value + 1e-15) {
                winner = Some(s);
            }
        }
        Ok(winner.expect("at least one subset"))
    }

    fn column_from_params(&self, y: &[f64]) -> Option<Column> {
        let ka = self.members[0].a_size();
        let norm = |v: &[f64]| -> Option<Vec<f64>> {
            let s: f64 = v.iter().map(|x| x.abs()).sum();
            (s > 0.0).then(|| v.iter().map(|x| x.abs() / s).collect())
        };
        let pa = norm(&y[..ka])?;
        let pb = norm(&y[ka..])?;
        Column::new(self.members, pa, pb).ok()
    }

    /// Nelder–Mead search for one new column that improves the support in direction
    /// `w`, started from up to eight promising columns. Improving columns are added to
    /// the pool.
    pub fn refine(&mut self, shape: Shape, w: [f64; 2], t_card: usize, iterations: usize) -> Result<()> {
        if iterations == 0 {
            return Ok(());
        }
        let current = self.support(shape, w, t_card)?;
        let keep: Vec<usize> = current.mix.iter().map(|(i, _)| *i).collect();
        let mut starts: Vec<usize> = keep.clone();
        let mut singles: Vec<(usize, f64)> = Vec::new();
        for i in 0..self.cols.len() {
            if !starts.contains(&i) {
                singles.push((i, self.lp(shape, w, &[i], None)?.value));
            }
        }
        singles.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        starts.extend(singles.iter().map(|s| s.0).take(8usize.saturating_sub(starts.len())));
        starts.truncate(8);
        let mut found: Vec<Column> = Vec::new();
        for &s in &starts {
            let c = &self.cols[s];
            let x0: Vec<f64> = c.pa.iter().chain(&c.pb).map(|v| v + 0.02).collect();
            let objective = |y: &[f64]| -> f64 {
                match self.column_from_params(y) {
                    Some(col) => self.lp(shape, w, &keep, Some(&col)).map(|s| -s.value).unwrap_or(0.0),
                    None => 0.0,
                }
            };
            let (y, v) = nelder_mead(objective, &x0, 0.1, iterations);
            if -v > current.value + 1e-12 {
                if let Some(col) = self.column_from_params(&y) {
                    found.push(col);
                }
            }
        }
        self.cols.extend(found);
        Ok(())
    }
}

fn combinations(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(items: &[usize], k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..items.len() {
            cur.push(items[i]);
            rec(items, k, i + 1, cur, out);
            cur.pop();
        }
    }
    rec(items, k, 0, &mut cur, &mut out);
    out
}

/// Unit directions in the nonnegative quadrant, both axes included.
pub(crate) fn directions(count: usize) -> Vec<[f64; 2]> {
    (0..count)
        .map(|k| {
            let a = std::f64::consts::FRAC_PI_2 * k as f64 / (count - 1) as f64;
            [a.cos(), a.sin()]
        })
        .collect()
}

/// Support points of one shape over all sampled directions, with local refinement on
/// every fourth direction.
pub(crate) fn trace_region(pool: &mut Pool<'_>, shape: Shape, grid: &OptGrid, dirs: &[[f64; 2]]) -> Result<Vec<[f64; 2]>> {
    for (k, &w) in dirs.iter().enumerate() {
        if k % 4 == 0 {
            pool.refine(shape, w, grid.t_card, grid.refine_rounds)?;
        }
    }
    dirs.iter().map(|&w| pool.support(shape, w, grid.t_card).map(|s| s.point)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_counts() {
        assert_eq!(simplex_grid(2, 0.25).len(), 5);
        assert_eq!(simplex_grid(3, 0.5).len(), 6);
        assert!(simplex_grid(3, 0.25).iter().all(|p| (p.iter().sum::<f64>() - 1.0).abs() < 1e-12));
    }

    #[test]
    fn combinations_count() {
        assert_eq!(combinations(&[1, 2, 3, 4, 5], 2).len(), 10);
    }
}
