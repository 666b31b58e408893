//! Fourier–Motzkin elimination for small rational systems with strict inequalities.

use std::collections::HashSet;

use num_traits::{One, Signed, Zero};

use crate::exactnum::Rat;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Rel {
    /// a·x > b
    Gt,
    /// a·x ≥ b
    Ge,
    /// a·x = b
    Eq,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Constraint {
    pub a: Vec<Rat>,
    pub rel: Rel,
    pub b: Rat,
}

impl Constraint {
    pub fn new(a: Vec<Rat>, rel: Rel, b: Rat) -> Self {
        Constraint { a, rel, b }
    }

    fn eval(&self, x: &[Rat]) -> Rat {
        self.a.iter().zip(x).map(|(a, x)| a * x).sum()
    }

    pub fn holds(&self, x: &[Rat]) -> bool {
        let v = self.eval(x);
        match self.rel {
            Rel::Gt => v > self.b,
            Rel::Ge => v >= self.b,
            Rel::Eq => v == self.b,
        }
    }

    // scale so the first nonzero coefficient is ±1 (keeps direction)
    fn normalized(mut self) -> Self {
        if let Some(p) = self.a.iter().find(|c| !c.is_zero()).cloned() {
            let s = p.abs().recip();
            for c in self.a.iter_mut() {
                *c = &*c * &s;
            }
            self.b = &self.b * &s;
        }
        self
    }
}

/// Returns a rational point satisfying every constraint, or None if infeasible.
pub fn solve(n: usize, cons: &[Constraint]) -> Option<Vec<Rat>> {
    // stages[k] holds the system after eliminating variables 0..k
    let mut stages: Vec<Vec<Constraint>> = vec![cons.to_vec()];
    let mut eq_subst: Vec<Option<Constraint>> = vec![None; n];
    for var in 0..n {
        let cur = stages.last().unwrap();
        let next = eliminate(var, cur, &mut eq_subst[var]);
        // constant constraints can be checked right away
        for c in &next {
            if c.a.iter().all(|x| x.is_zero()) && !c.holds(&vec![Rat::zero(); n]) {
                return None;
            }
        }
        stages.push(next);
    }
    let mut x = vec![Rat::zero(); n];
    for var in (0..n).rev() {
        if let Some(eq) = &eq_subst[var] {
            let rest: Rat = eq
                .a
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != var)
                .map(|(i, a)| a * &x[i])
                .sum();
            x[var] = (&eq.b - rest) / &eq.a[var];
            continue;
        }
        let mut lo: Option<(Rat, bool)> = None;
        let mut hi: Option<(Rat, bool)> = None;
        for c in &stages[var] {
            let a = &c.a[var];
            if a.is_zero() {
                continue;
            }
            let rest: Rat = c
                .a
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != var)
                .map(|(i, a)| a * &x[i])
                .sum();
            let bound = (&c.b - rest) / a;
            let strict = c.rel == Rel::Gt;
            if a.is_positive() {
                if lo.as_ref().map_or(true, |(v, s)| bound > *v || (bound == *v && strict && !s)) {
                    lo = Some((bound, strict));
                }
            } else if hi.as_ref().map_or(true, |(v, s)| bound < *v || (bound == *v && strict && !s)) {
                hi = Some((bound, strict));
            }
        }
        x[var] = match (lo, hi) {
            (None, None) => Rat::zero(),
            (Some((l, _)), None) => l + Rat::one(),
            (None, Some((h, _))) => h - Rat::one(),
            (Some((l, _)), Some((h, _))) => (l + h) / Rat::from_integer(2.into()),
        };
    }
    if cons.iter().all(|c| c.holds(&x)) {
        Some(x)
    } else {
        None
    }
}

fn eliminate(var: usize, cons: &[Constraint], subst: &mut Option<Constraint>) -> Vec<Constraint> {
    if let Some(eq) = cons.iter().find(|c| c.rel == Rel::Eq && !c.a[var].is_zero()) {
        *subst = Some(eq.clone());
        let mut out = Vec::new();
        for c in cons {
            if std::ptr::eq(c, eq) {
                continue;
            }
            if c.a[var].is_zero() {
                out.push(c.clone());
                continue;
            }
            let k = &c.a[var] / &eq.a[var];
            let a = c.a.iter().zip(&eq.a).map(|(x, y)| x - &k * y).collect();
            out.push(Constraint::new(a, c.rel, &c.b - &k * &eq.b).normalized());
        }
        return dedup(out);
    }
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    let mut out = Vec::new();
    for c in cons {
        let a = &c.a[var];
        if a.is_zero() {
            out.push(c.clone());
        } else if c.rel == Rel::Eq {
            unreachable!("equalities are substituted first");
        } else if a.is_positive() {
            pos.push(c);
        } else {
            neg.push(c);
        }
    }
    for p in &pos {
        for q in &neg {
            // p: a·x ≥ b with a_var > 0, q: c·x ≥ d with c_var < 0
            let sp = -&q.a[var];
            let sq = p.a[var].clone();
            let a = p.a.iter().zip(&q.a).map(|(x, y)| x * &sp + y * &sq).collect();
            let b = &p.b * &sp + &q.b * &sq;
            let rel = if p.rel == Rel::Gt || q.rel == Rel::Gt { Rel::Gt } else { Rel::Ge };
            out.push(Constraint::new(a, rel, b).normalized());
        }
    }
    dedup(out)
}

fn dedup(cons: Vec<Constraint>) -> Vec<Constraint> {
    let mut seen = HashSet::new();
    cons.into_iter().filter(|c| seen.insert(c.clone())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::rat_int;

    fn c(a: &[i64], rel: Rel, b: i64) -> Constraint {
        Constraint::new(a.iter().map(|&x| rat_int(x)).collect(), rel, rat_int(b))
    }

    #[test]
    fn strict_interval() {
        let x = solve(1, &[c(&[1], Rel::Gt, 0), c(&[-1], Rel::Gt, -1)]).unwrap();
        assert!(x[0] > rat_int(0) && x[0] < rat_int(1));
        assert!(solve(1, &[c(&[1], Rel::Gt, 0), c(&[-1], Rel::Ge, 0)]).is_none());
        assert!(solve(1, &[c(&[1], Rel::Ge, 0), c(&[-1], Rel::Ge, 0)]).is_some());
    }

    #[test]
    fn with_equality() {
        // x > 0, y < 0, x = y  → infeasible
        let cons = [c(&[1, 0], Rel::Gt, 0), c(&[0, -1], Rel::Gt, 0), c(&[1, -1], Rel::Eq, 0)];
        assert!(solve(2, &cons).is_none());
        // x > 0, y > 0, x + y = 3
        let cons = [c(&[1, 0], Rel::Gt, 0), c(&[0, 1], Rel::Gt, 0), c(&[1, 1], Rel::Eq, 3)];
        let x = solve(2, &cons).unwrap();
        assert!(cons.iter().all(|k| k.holds(&x)));
    }
}
