//! Edge-cycles, intersection numbers, periods and the cup-product integrals.

use std::collections::VecDeque;

use num_traits::{One, Zero};
use serde::Serialize;

use super::{sub, FlatSurface};
use crate::exactnum::{rat, KNum, KiNum, Rat};
use crate::{Error, Result};

/// A straight path across polygon `poly`, entering through one edge and leaving through another.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Chord {
    pub poly: usize,
    pub entry: usize,
    pub exit: usize,
}

impl Chord {
    pub fn new(poly: usize, entry: usize, exit: usize) -> Self {
        Chord { poly, entry, exit }
    }
}

/// Closed curves made of chords; the exit of each chord is glued to the entry of the next.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Cycle {
    pub loops: Vec<Vec<Chord>>,
}

impl Cycle {
    pub fn single(chords: Vec<Chord>) -> Self {
        Cycle { loops: vec![chords] }
    }

    pub fn from_triples(loops: &[&[(usize, usize, usize)]]) -> Self {
        Cycle { loops: loops.iter().map(|l| l.iter().map(|&(p, a, b)| Chord::new(p, a, b)).collect()).collect() }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct HomologyBasis {
    pub cycles: Vec<Cycle>,
    pub intersection: Vec<Vec<i64>>,
}

/// Boundary position of a polygon point: edge index, then parameter along the edge.
type BPos = (usize, Rat);

fn in_open_arc(x: &BPos, y: &BPos, p: &BPos) -> bool {
    if x < y {
        x < p && p < y
    } else {
        p > x || p < y
    }
}

impl FlatSurface {
    pub fn check_cycle(&self, c: &Cycle) -> Result<()> {
        for l in &c.loops {
            if l.is_empty() {
                return Err(Error::Invalid("empty loop".into()));
            }
            for (k, ch) in l.iter().enumerate() {
                let next = &l[(k + 1) % l.len()];
                let (to, _, _) = self.partner((ch.poly, ch.exit));
                if to != (next.poly, next.entry) {
                    return Err(Error::Invalid(format!(
                        "chord {k} leaves through ({}, {}) which is not glued to ({}, {})",
                        ch.poly, ch.exit, next.poly, next.entry
                    )));
                }
            }
        }
        Ok(())
    }

    /// ω(c) as x + iy; for translation surfaces only.
    pub fn period(&self, c: &Cycle) -> Result<KiNum> {
        if !self.is_abelian() {
            return Err(Error::Domain("periods need a translation surface".into()));
        }
        self.check_cycle(c)?;
        let h = rat(1, 2);
        let mut re = KNum::zero();
        let mut im = KNum::zero();
        for ch in c.loops.iter().flatten() {
            let a = self.point_on((ch.poly, ch.entry), &KNum::from_rat(h.clone()));
            let b = self.point_on((ch.poly, ch.exit), &KNum::from_rat(h.clone()));
            let v = sub(&b, &a);
            re += &v[0];
            im += &v[1];
        }
        Ok(KiNum::new(re, im))
    }

    /// Algebraic intersection number c1·c2 (horizontal·vertical = +1 on the torus).
    pub fn intersection(&self, c1: &Cycle, c2: &Cycle) -> Result<i64> {
        self.check_cycle(c1)?;
        self.check_cycle(c2)?;
        // give every gluing crossing its own offset in (0, ½) so the curves meet only inside polygons
        let n1: usize = c1.loops.iter().map(Vec::len).sum();
        let n2: usize = c2.loops.iter().map(Vec::len).sum();
        let denom = 2 * (n1 + n2 + 1) as i64;
        let mut next = 0i64;
        let mut segs = |c: &Cycle| -> Vec<(usize, BPos, BPos)> {
            let mut out = Vec::new();
            for l in &c.loops {
                let offs: Vec<Rat> = l
                    .iter()
                    .map(|_| {
                        next += 1;
                        rat(next, denom)
                    })
                    .collect();
                for (k, ch) in l.iter().enumerate() {
                    let prev = &offs[(k + l.len() - 1) % l.len()];
                    out.push((ch.poly, (ch.entry, Rat::one() - prev), (ch.exit, offs[k].clone())));
                }
            }
            out
        };
        let s1 = segs(c1);
        let s2 = segs(c2);
        let mut total = 0;
        for (p1, a1, b1) in &s1 {
            for (p2, a2, b2) in &s2 {
                if p1 != p2 {
                    continue;
                }
                let ia = in_open_arc(a1, b1, a2);
                let ib = in_open_arc(a1, b1, b2);
                if ia != ib {
                    total += if ia { 1 } else { -1 };
                }
            }
        }
        Ok(total)
    }

    pub fn intersection_matrix(&self, cycles: &[Cycle]) -> Result<Vec<Vec<i64>>> {
        let n = cycles.len();
        let mut m = vec![vec![0; n]; n];
        for i in 0..n {
            for j in i + 1..n {
                let x = self.intersection(&cycles[i], &cycles[j])?;
                m[i][j] = x;
                m[j][i] = -x;
            }
        }
        Ok(m)
    }

    /// One cycle per gluing outside a spanning tree of the polygon adjacency graph.
    pub fn fundamental_cycles(&self) -> Vec<Cycle> {
        let np = self.polygons().len();
        // parent crossing: (gluing used, edge in the parent, edge in the child)
        let mut parent: Vec<Option<(usize, usize, usize, usize)>> = vec![None; np];
        let mut seen = vec![false; np];
        let mut tree = vec![false; self.gluings().len()];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        while let Some(q) = queue.pop_front() {
            for e in 0..self.polygons()[q].len() {
                let ((q2, e2), _, gi) = self.partner((q, e));
                if !seen[q2] {
                    seen[q2] = true;
                    tree[gi] = true;
                    parent[q2] = Some((q, e, e2, gi));
                    queue.push_back(q2);
                }
            }
        }
        // crossings (from polygon, from edge, to polygon, to edge) leading from the root to q
        let path_down = |mut q: usize| -> Vec<(usize, usize, usize, usize)> {
            let mut out = Vec::new();
            while let Some((p, e, e2, _)) = parent[q] {
                out.push((p, e, q, e2));
                q = p;
            }
            out.reverse();
            out
        };
        let mut cycles = Vec::new();
        for (gi, g) in self.gluings().iter().enumerate() {
            if tree[gi] {
                continue;
            }
            let mut xs = path_down(g.a.0);
            xs.push((g.a.0, g.a.1, g.b.0, g.b.1));
            for (p, e, q, e2) in path_down(g.b.0).into_iter().rev() {
                xs.push((q, e2, p, e));
            }
            let m = xs.len();
            let chords = (0..m)
                .map(|k| {
                    let (_, _, q, entry) = xs[k];
                    let (q_next, exit, _, _) = xs[(k + 1) % m];
                    debug_assert_eq!(q, q_next);
                    Chord::new(q, entry, exit)
                })
                .collect();
            cycles.push(Cycle::single(chords));
        }
        cycles
    }

    /// 2g cycles whose intersection matrix is invertible.
    pub fn homology_basis(&self) -> Result<HomologyBasis> {
        let all = self.fundamental_cycles();
        let g = self.intersection_matrix(&all)?;
        let rows: Vec<Vec<Rat>> = g.iter().map(|r| r.iter().map(|x| Rat::from_integer((*x).into())).collect()).collect();
        let pick = independent_rows(&rows);
        if pick.len() != 2 * self.genus() {
            return Err(Error::Check(format!("intersection form has rank {}, expected {}", pick.len(), 2 * self.genus())));
        }
        let cycles: Vec<Cycle> = pick.iter().map(|&i| all[i].clone()).collect();
        let intersection = pick.iter().map(|&i| pick.iter().map(|&j| g[i][j]).collect()).collect();
        Ok(HomologyBasis { cycles, intersection })
    }

    pub fn periods(&self, cycles: &[Cycle]) -> Result<Vec<KiNum>> {
        cycles.iter().map(|c| self.period(c)).collect()
    }

    /// −∫ω∧ω̄' after checking ∫ω∧ω' = 0.
    pub fn complex_flux(&self, basis: &HomologyBasis) -> Result<KiNum> {
        let p = self.periods(&basis.cycles)?;
        let pc: Vec<KiNum> = p.iter().map(KiNum::conj).collect();
        let pre = integrate(&basis.intersection, &p, &pc)?;
        if !pre.is_zero() {
            return Err(Error::Check(format!("∫ω∧ω' = {pre}, not zero")));
        }
        let pbc: Vec<KiNum> = p.iter().map(|z| z.bar().conj()).collect();
        Ok(-&integrate(&basis.intersection, &p, &pbc)?)
    }

    /// −∫ρ∧ρ' for ρ = Re ω, or Im ω when `imaginary` is set.
    pub fn flux_form(&self, basis: &HomologyBasis, imaginary: bool) -> Result<KNum> {
        let p = self.periods(&basis.cycles)?;
        let rho: Vec<KiNum> =
            p.iter().map(|z| KiNum::real(if imaginary { z.im.clone() } else { z.re.clone() })).collect();
        let rc: Vec<KiNum> = rho.iter().map(KiNum::conj).collect();
        Ok((-&integrate(&basis.intersection, &rho, &rc)?).re)
    }

    /// ∫ω∧ω' for the Galois conjugate form.
    pub fn galois_pairing(&self, basis: &HomologyBasis) -> Result<KiNum> {
        let p = self.periods(&basis.cycles)?;
        let pc: Vec<KiNum> = p.iter().map(KiNum::conj).collect();
        integrate(&basis.intersection, &p, &pc)
    }

    /// ½ Im ∫ ω̄∧ω / … computed from the periods; equals the polygon area.
    pub fn area_from_periods(&self, basis: &HomologyBasis) -> Result<KNum> {
        let p = self.periods(&basis.cycles)?;
        let pb: Vec<KiNum> = p.iter().map(KiNum::bar).collect();
        // ∫ω∧ω̄ = −2i·Area
        Ok(integrate(&basis.intersection, &p, &pb)?.im.scale(&rat(-1, 2)))
    }
}

/// ∫a∧b = −A Q⁻¹ Bᵀ for closed forms given by their periods on a basis with intersection matrix Q.
pub fn integrate(q: &[Vec<i64>], a: &[KiNum], b: &[KiNum]) -> Result<KiNum> {
    let n = q.len();
    let qr: Vec<Vec<Rat>> = q.iter().map(|r| r.iter().map(|x| Rat::from_integer((*x).into())).collect()).collect();
    let inv = invert(&qr).ok_or_else(|| Error::Check("intersection matrix is singular".into()))?;
    let mut total = KiNum::zero();
    for i in 0..n {
        for j in 0..n {
            if inv[i][j].is_zero() {
                continue;
            }
            total = &total + &(&a[i] * &b[j]).scale(&inv[i][j]);
        }
    }
    Ok(-&total)
}

pub(crate) fn invert(m: &[Vec<Rat>]) -> Option<Vec<Vec<Rat>>> {
    let n = m.len();
    let mut a: Vec<Vec<Rat>> = m
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut row = r.clone();
            row.extend((0..n).map(|j| if i == j { Rat::one() } else { Rat::zero() }));
            row
        })
        .collect();
    for col in 0..n {
        let piv = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, piv);
        let p = a[col][col].clone();
        for x in a[col].iter_mut() {
            *x = &*x / &p;
        }
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                for c in 0..2 * n {
                    let v = &a[col][c] * &f;
                    a[r][c] -= v;
                }
            }
        }
    }
    Some(a.into_iter().map(|r| r[n..].to_vec()).collect())
}

pub(crate) fn rank(m: &[Vec<Rat>]) -> usize {
    independent_rows(m).len()
}

/// Indices of a maximal set of linearly independent rows, chosen greedily in order.
pub(crate) fn independent_rows(m: &[Vec<Rat>]) -> Vec<usize> {
    let mut basis: Vec<(usize, Vec<Rat>)> = Vec::new();
    let mut out = Vec::new();
    for (i, row) in m.iter().enumerate() {
        let mut r = row.clone();
        for (p, b) in &basis {
            if !r[*p].is_zero() {
                let f = &r[*p] / &b[*p];
                for (x, y) in r.iter_mut().zip(b) {
                    *x -= &f * y;
                }
            }
        }
        if let Some(p) = r.iter().position(|x| !x.is_zero()) {
            basis.push((p, r));
            out.push(i);
        }
    }
    out
}
