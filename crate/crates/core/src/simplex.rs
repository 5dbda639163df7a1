//! Dense two-phase simplex over exact rationals with Bland's rule.
//!
//! Solves `maximize c.x subject to a x <= b, x >= 0`. Rows with negative
//! right-hand sides are turned into equalities with artificial variables in
//! phase 1. Bland's smallest-index rule makes every run terminate and makes
//! the visited sequence of bases deterministic.

use crate::error::Result;
use crate::rational::Rational;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum SimplexOutcome {
    Optimal {
        value: Rational,
        x: Vec<Rational>,
        /// One multiplier per input row, read off the reduced costs of the
        /// slack columns; nonnegative at optimality.
        dual: Vec<Rational>,
    },
    Unbounded,
    Infeasible,
}

struct Tableau {
    /// Variable columns per row, with the right-hand side appended last.
    rows: Vec<Vec<Rational>>,
    basis: Vec<usize>,
    ncols: usize,
    obj: Vec<Rational>,
    objval: Rational,
}

enum Step {
    Optimal,
    Unbounded,
}

impl Tableau {
    fn rhs(&self, r: usize) -> &Rational {
        &self.rows[r][self.ncols]
    }

    fn price_out(&mut self, cost: &[Rational]) {
        self.obj = cost.to_vec();
        self.objval = Rational::zero();
        for r in 0..self.rows.len() {
            let cb = cost[self.basis[r]].clone();
            if cb.is_zero() {
                continue;
            }
            for j in 0..self.ncols {
                self.obj[j] = self.obj[j].clone() - cb.clone() * self.rows[r][j].clone();
            }
            self.objval = self.objval.clone() + cb * self.rhs(r).clone();
        }
    }

    fn pivot(&mut self, pr: usize, pc: usize) {
        let inv = self.rows[pr][pc].inv().expect("pivot entry is nonzero");
        for v in &mut self.rows[pr] {
            *v = v.clone() * inv.clone();
        }
        for r in 0..self.rows.len() {
            if r == pr || self.rows[r][pc].is_zero() {
                continue;
            }
            let factor = self.rows[r][pc].clone();
            for j in 0..=self.ncols {
                let delta = factor.clone() * self.rows[pr][j].clone();
                self.rows[r][j] = self.rows[r][j].clone() - delta;
            }
        }
        if !self.obj[pc].is_zero() {
            let factor = self.obj[pc].clone();
            for j in 0..self.ncols {
                let delta = factor.clone() * self.rows[pr][j].clone();
                self.obj[j] = self.obj[j].clone() - delta;
            }
            self.objval = self.objval.clone() + factor * self.rhs(pr).clone();
        }
        self.basis[pr] = pc;
    }

    /// Run Bland pivots until optimal or unbounded: the entering column is
    /// the smallest-index improving one, the leaving row breaks ratio ties
    /// by smallest basis variable.
    fn bland(&mut self) -> Step {
        loop {
            let entering = (0..self.ncols).find(|&j| self.obj[j].is_positive());
            let Some(pc) = entering else {
                return Step::Optimal;
            };
            let mut leaving: Option<(usize, Rational)> = None;
            for r in 0..self.rows.len() {
                let coef = &self.rows[r][pc];
                if !coef.is_positive() {
                    continue;
                }
                let ratio = self.rhs(r).try_div(coef).expect("positive pivot entry");
                let better = match &leaving {
                    None => true,
                    Some((best_r, best)) => {
                        ratio < *best || (ratio == *best && self.basis[r] < self.basis[*best_r])
                    }
                };
                if better {
                    leaving = Some((r, ratio));
                }
            }
            let Some((pr, _)) = leaving else {
                return Step::Unbounded;
            };
            self.pivot(pr, pc);
        }
    }
}

/// maximize `c.x` subject to `a x <= b`, `x >= 0`, all exact rationals.
pub(crate) fn maximize(
    a: &[Vec<Rational>],
    b: &[Rational],
    c: &[Rational],
) -> Result<SimplexOutcome> {
    let m = a.len();
    let n = c.len();
    debug_assert_eq!(b.len(), m);
    debug_assert!(a.iter().all(|row| row.len() == n));

    let slack_start = n;
    let art_start = n + m;
    let flipped: Vec<bool> = b.iter().map(Rational::is_negative).collect();
    let n_art = flipped.iter().filter(|&&f| f).count();
    let ncols = art_start + n_art;

    let mut rows = Vec::with_capacity(m);
    let mut basis = Vec::with_capacity(m);
    let mut art = 0;
    for i in 0..m {
        let mut row = vec![Rational::zero(); ncols + 1];
        row[..n].clone_from_slice(&a[i]);
        row[slack_start + i] = Rational::one();
        row[ncols] = b[i].clone();
        if flipped[i] {
            for v in &mut row {
                *v = -v.clone();
            }
            row[art_start + art] = Rational::one();
            basis.push(art_start + art);
            art += 1;
        } else {
            basis.push(slack_start + i);
        }
        rows.push(row);
    }

    let mut tab = Tableau {
        rows,
        basis,
        ncols,
        obj: vec![],
        objval: Rational::zero(),
    };

    if n_art > 0 {
        // Phase 1: maximize minus the sum of artificials, targeting zero.
        let mut cost = vec![Rational::zero(); ncols];
        for item in cost.iter_mut().skip(art_start) {
            *item = -Rational::one();
        }
        tab.price_out(&cost);
        match tab.bland() {
            Step::Unbounded => unreachable!("phase 1 objective is bounded above by zero"),
            Step::Optimal => {}
        }
        if !tab.objval.is_zero() {
            return Ok(SimplexOutcome::Infeasible);
        }
        // Drive artificials out of the basis; a row that offers no real
        // pivot is a redundant combination of the others and is dropped.
        let mut r = 0;
        while r < tab.rows.len() {
            if tab.basis[r] >= art_start {
                match (0..art_start).find(|&j| !tab.rows[r][j].is_zero()) {
                    Some(pc) => tab.pivot(r, pc),
                    None => {
                        tab.rows.remove(r);
                        tab.basis.remove(r);
                        continue;
                    }
                }
            }
            r += 1;
        }
        // Discard the artificial columns; the right-hand side slides left.
        for row in &mut tab.rows {
            row.drain(art_start..ncols);
        }
        tab.ncols = art_start;
    }

    // Phase 2 on the real objective.
    let mut cost = vec![Rational::zero(); tab.ncols];
    cost[..n].clone_from_slice(c);
    tab.price_out(&cost);
    match tab.bland() {
        Step::Unbounded => return Ok(SimplexOutcome::Unbounded),
        Step::Optimal => {}
    }

    let mut x = vec![Rational::zero(); n];
    for (r, &bv) in tab.basis.iter().enumerate() {
        if bv < n {
            x[bv] = tab.rhs(r).clone();
        }
    }
    let dual = (0..m).map(|i| -tab.obj[slack_start + i].clone()).collect();
    Ok(SimplexOutcome::Optimal {
        value: tab.objval.clone(),
        x,
        dual,
    })
}
