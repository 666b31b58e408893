//! First return of the vertical flow to a horizontal transversal.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{add, cross, in_sector, mul, neg, sub, v2, EdgeRef, FlatSurface, Sign};
use crate::exactnum::{rat, KNum, KVec2};
use crate::involutions::{GenPerm, LinearInvolution};
use crate::{Error, Result};

/// Sub-segment [from, to] (distances from the edge start) of a horizontal edge oriented in +x.
/// A reversed piece is run through from `to` back to `from`, so its left side looks down.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransversalPiece {
    pub polygon: usize,
    pub edge: usize,
    pub from: KNum,
    pub to: KNum,
    #[serde(default)]
    pub reversed: bool,
}

impl TransversalPiece {
    pub fn new(polygon: usize, edge: usize, from: KNum, to: KNum) -> Self {
        TransversalPiece { polygon, edge, from, to, reversed: false }
    }

    // position on the transversal of parameter v along the piece's edge
    fn position(&self, offset: &KNum, len: &KNum, v: &KNum) -> KNum {
        if self.reversed {
            offset + &(&self.to - &(v * len))
        } else {
            offset + &(&(v * len) - &self.from)
        }
    }

    // (edge parameter of the start, edge parameter of the end) along the transversal
    fn ends(&self, len: &KNum) -> (KNum, KNum) {
        let (a, b) = (&self.from / len, &self.to / len);
        if self.reversed {
            (b, a)
        } else {
            (a, b)
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CrossSection {
    pub involution: LinearInvolution,
    /// area swept by the vertical leaves started from both sides of the transversal
    pub swept: KNum,
}

// leaves crossing the segment lo..hi of edge `at` into polygon at.0, moving along `dir`;
// x_lo, x_hi are the departure positions on the transversal
struct Strip {
    at: EdgeRef,
    u_lo: KNum,
    u_hi: KNum,
    x_lo: KNum,
    x_hi: KNum,
    dir: KVec2,
}

struct Record {
    side: usize,
    lo: KNum,
    hi: KNum,
    arrival: usize,
    sigma: i8,
    c: KNum,
}

impl FlatSurface {
    /// First return to the transversal; intervals separated only by regular marked points are merged.
    pub fn cross_section(&self, pieces: &[TransversalPiece], budget: usize) -> Result<CrossSection> {
        self.cross_section_with(pieces, budget, false)
    }

    /// As cross_section, but every vertex of the polygons cuts, marked points included.
    pub fn cross_section_with(&self, pieces: &[TransversalPiece], budget: usize, keep_marked: bool) -> Result<CrossSection> {
        if pieces.is_empty() {
            return Err(Error::Domain("empty transversal".into()));
        }
        let mut offsets = Vec::new();
        let mut total = KNum::zero();
        for p in pieces {
            let e = self.edge((p.polygon, p.edge));
            if !e[1].is_zero() || e[0].sign() <= 0 {
                return Err(Error::Domain(format!("edge ({}, {}) is not horizontal in +x", p.polygon, p.edge)));
            }
            if p.from.sign() < 0 || p.to <= p.from || p.to > e[0] {
                return Err(Error::Domain(format!("bad range on edge ({}, {})", p.polygon, p.edge)));
            }
            offsets.push(total.clone());
            total += &(&p.to - &p.from);
        }
        for (i, p) in pieces.iter().enumerate() {
            for q in &pieces[i + 1..] {
                let same = (p.polygon, p.edge) == (q.polygon, q.edge);
                let twin = self.partner((p.polygon, p.edge)).0 == (q.polygon, q.edge);
                if (same && p.from < q.to && q.from < p.to) || twin {
                    return Err(Error::Domain("transversal pieces overlap".into()));
                }
            }
        }
        // consecutive pieces meeting at a regular point form one straight segment
        let mut soft: BTreeSet<KNum> = BTreeSet::new();
        for k in 1..pieces.len() {
            let (p, q) = (&pieces[k - 1], &pieces[k]);
            let corner = |p: &TransversalPiece, end: bool| -> Option<usize> {
                let len = self.edge((p.polygon, p.edge))[0].clone();
                let (s0, s1) = p.ends(&len);
                let u = if end { s1 } else { s0 };
                let n = self.polygons()[p.polygon].len();
                if u.is_zero() {
                    Some(self.vertex_class((p.polygon, p.edge)))
                } else if u == KNum::one() {
                    Some(self.vertex_class((p.polygon, (p.edge + 1) % n)))
                } else {
                    None
                }
            };
            if let (Some(x), Some(y)) = (corner(p, true), corner(q, false)) {
                if x == y && self.order(x) == 0 {
                    soft.insert(offsets[k].clone());
                }
            }
        }
        let up = v2(KNum::zero(), KNum::one());
        let mut strips = Vec::new();
        for (k, p) in pieces.iter().enumerate() {
            let at = (p.polygon, p.edge);
            let len = self.edge(at)[0].clone();
            let (u0, u1) = (&p.from / &len, &p.to / &len);
            let (x0, x1) = (p.position(&offsets[k], &len, &u0), p.position(&offsets[k], &len, &u1));
            let (own, other) = if p.reversed { (1usize, 0usize) } else { (0, 1) };
            strips.push((own, Strip { at, u_lo: u0.clone(), u_hi: u1.clone(), x_lo: x0.clone(), x_hi: x1.clone(), dir: up.clone() }));
            let (to, sign, _) = self.partner(at);
            let down = if sign == Sign::Plus { neg(&up) } else { up.clone() };
            let one = KNum::one();
            strips.push((
                other,
                Strip { at: to, u_lo: &one - &u1, u_hi: &one - &u0, x_lo: x1, x_hi: x0, dir: down },
            ));
        }
        let mut records = Vec::new();
        // departure positions where the return map may jump: singular leaves and transversal ends
        let mut hard: BTreeSet<(usize, KNum)> = BTreeSet::new();
        for (side, s) in &strips {
            for x in [&s.x_lo, &s.x_hi] {
                if !soft.contains(x) {
                    hard.insert((*side, x.clone()));
                }
            }
        }
        let mut swept = KNum::zero();
        let mut steps = 0usize;
        while let Some((side, s)) = strips.pop() {
            steps += 1;
            if steps > budget {
                return Err(Error::Budget(budget));
            }
            let (parts, cuts) = self.split_at_vertices(&s);
            hard.extend(cuts.into_iter().filter(|(_, h)| *h || keep_marked).map(|(x, _)| (side, x)));
            for sub_strip in parts {
                let (exit, e_lo, e_hi, area) = self.push_strip(&sub_strip)?;
                swept += &area;
                // pieces of the exit edge that belong to the transversal, on either side
                let mut bounds = vec![e_lo.clone(), e_hi.clone()];
                // (lo, hi, piece, arriving through the piece's own edge)
                let mut hits: Vec<(KNum, KNum, usize, bool)> = Vec::new();
                for (k, p) in pieces.iter().enumerate() {
                    let at = (p.polygon, p.edge);
                    let len = self.edge(at)[0].clone();
                    let (a, b) = (&p.from / &len, &p.to / &len);
                    if at == exit {
                        hits.push((a, b, k, true));
                    } else if self.partner(at).0 == exit {
                        hits.push((KNum::one() - &b, KNum::one() - &a, k, false));
                    }
                }
                let arrival_x = |u: &KNum, k: usize, own: bool| -> KNum {
                    let p = &pieces[k];
                    let len = self.edge((p.polygon, p.edge))[0].clone();
                    let v = if own { u.clone() } else { KNum::one() - u };
                    p.position(&offsets[k], &len, &v)
                };
                let (lo, hi) = if e_lo <= e_hi { (e_lo.clone(), e_hi.clone()) } else { (e_hi.clone(), e_lo.clone()) };
                for (a, b, _, _) in &hits {
                    for c in [a, b] {
                        if lo < *c && *c < hi {
                            bounds.push(c.clone());
                        }
                    }
                }
                bounds.sort();
                bounds.dedup();
                // departure positions by the affine map e ↦ x
                let xmap = |u: &KNum| -> KNum {
                    &sub_strip.x_lo + &(&(u - &e_lo) / &(&e_hi - &e_lo) * (&sub_strip.x_hi - &sub_strip.x_lo))
                };
                for c in &bounds[1..bounds.len() - 1] {
                    let at_soft = hits
                        .iter()
                        .any(|(a, b, k, own)| (c == a || c == b) && soft.contains(&arrival_x(c, *k, *own)));
                    if !at_soft {
                        hard.insert((side, xmap(c)));
                    }
                }
                for w in bounds.windows(2) {
                    let (a, b) = (&w[0], &w[1]);
                    let mid = (a + b).scale(&rat(1, 2));
                    let hit = hits.iter().find(|(ha, hb, _, _)| *ha <= mid && mid <= *hb);
                    match hit {
                        Some((_, _, k, own)) => {
                            let arr = if *own != pieces[*k].reversed { 0 } else { 1 };
                            let (xa, xb) = (xmap(a), xmap(b));
                            let (ya, yb) = (arrival_x(a, *k, *own), arrival_x(b, *k, *own));
                            let slope = &(&yb - &ya) / &(&xb - &xa);
                            let sigma = if slope == KNum::one() {
                                1
                            } else if slope == -KNum::one() {
                                -1
                            } else {
                                return Err(Error::Check(format!("first return has slope {slope}")));
                            };
                            let c = &ya - &(&KNum::int(sigma as i64) * &xa);
                            let (lo, hi) = if xa <= xb { (xa, xb) } else { (xb, xa) };
                            records.push(Record { side, lo, hi, arrival: arr, sigma, c });
                        }
                        None => {
                            let (to, sign, _) = self.partner(exit);
                            let one = KNum::one();
                            let dir = if sign == Sign::Plus { sub_strip.dir.clone() } else { neg(&sub_strip.dir) };
                            strips.push((
                                side,
                                Strip { at: to, u_lo: &one - a, u_hi: &one - b, x_lo: xmap(a), x_hi: xmap(b), dir },
                            ));
                        }
                    }
                }
            }
        }
        if swept != self.area().scale(&rat(2, 1)) {
            return Err(Error::Check(format!(
                "leaves sweep {swept}, expected twice the area {}; the transversal misses some leaves",
                self.area()
            )));
        }
        let involution = assemble(records, &hard)?;
        Ok(CrossSection { involution, swept })
    }

    /// Cuts the surface along the horizontal segment of the given length that leaves `corner`
    /// in the +x direction, and returns the cut surface with the segment as a transversal.
    pub fn horizontal_transversal(&self, corner: EdgeRef, length: &KNum) -> Result<(FlatSurface, Vec<TransversalPiece>)> {
        let east = v2(KNum::one(), KNum::zero());
        let (out, back) = self.corner_dirs(corner);
        if !in_sector(&out, &back, &east) {
            return Err(Error::Domain(format!("corner {corner:?} does not face +x")));
        }
        if length.sign() <= 0 {
            return Err(Error::Domain("transversal length must be positive".into()));
        }
        // (polygon, chord start, chord end, length used from the start)
        let mut chords: Vec<(usize, KVec2, KVec2, KNum)> = Vec::new();
        let (mut q, mut p, mut d) = (corner.0, self.vertex(corner.0, corner.1).clone(), east);
        let mut left = length.clone();
        loop {
            let hit = self.ray_exit(q, &p, &d).ok_or_else(|| Error::Check("ray leaves polygon without exit".into()))?;
            let end = self.point_on((q, hit.edge), &hit.u);
            let run = hit.s.clone();
            if run >= left {
                chords.push((q, p, end, left));
                break;
            }
            if hit.u.is_zero() || hit.u == KNum::one() {
                return Err(Error::Domain("horizontal ray meets a vertex before its end".into()));
            }
            left -= &run;
            chords.push((q, p, end, run));
            let (q2, p2, d2, _) = self.cross_edge((q, hit.edge), &hit.u, &d);
            (q, p, d) = (q2, p2, d2);
        }
        // descendants of each original polygon, by index in the cut surface
        let mut family: Vec<Vec<usize>> = (0..self.polygons().len()).map(|i| vec![i]).collect();
        let mut cut = self.clone();
        for (q, a, b, _) in &chords {
            let mid = mul(&add(a, b), &KNum::frac(1, 2));
            let at = *family[*q]
                .iter()
                .find(|&&c| contains(&cut.polygons()[c], &mid))
                .ok_or_else(|| Error::Check("chord midpoint lies in no piece".into()))?;
            cut = cut.cut_chord(at, a, b)?.0;
            family[*q].push(cut.polygons().len() - 1);
        }
        let mut pieces = Vec::new();
        for (q, a, b, used) in &chords {
            let reversed = a[0] > b[0];
            let (l, r) = if reversed { (b, a) } else { (a, b) };
            let at = family[*q]
                .iter()
                .find_map(|&c| {
                    let poly = &cut.polygons()[c];
                    (0..poly.len()).find(|&i| &poly[i] == l && &poly[(i + 1) % poly.len()] == r).map(|i| (c, i))
                })
                .ok_or_else(|| Error::Check("cut edge not found".into()))?;
            let len = &r[0] - &l[0];
            let (from, to) = if reversed { (&len - used, len) } else { (KNum::zero(), used.clone()) };
            pieces.push(TransversalPiece { polygon: at.0, edge: at.1, from, to, reversed });
        }
        Ok((cut, pieces))
    }

    // cuts a strip at the leaves that run into a vertex; returns the parts and the cut
    // positions, flagged when the vertex is a singularity
    fn split_at_vertices(&self, s: &Strip) -> (Vec<Strip>, Vec<(KNum, bool)>) {
        let (q, e) = s.at;
        let a = self.vertex(q, e).clone();
        let ev = self.edge(s.at);
        let (lo, hi) = if s.u_lo <= s.u_hi { (&s.u_lo, &s.u_hi) } else { (&s.u_hi, &s.u_lo) };
        let c = cross(&ev, &s.dir);
        let mut cuts: Vec<(KNum, bool)> = Vec::new();
        for v in &self.polygons()[q] {
            let av = sub(v, &a);
            if (&cross(&av, &ev) / &(-&c)).sign() <= 0 {
                continue;
            }
            let u = &cross(&av, &s.dir) / &c;
            if !(*lo < u && u < *hi) || cuts.iter().any(|(x, _)| *x == u) {
                continue;
            }
            // only vertices the leaf actually reaches inside this polygon
            let p = self.point_on(s.at, &u);
            if let Some(hit) = self.ray_exit(q, &p, &s.dir) {
                let n = self.polygons()[q].len();
                let vi = if hit.u.is_zero() {
                    Some(hit.edge)
                } else if hit.u == KNum::one() {
                    Some((hit.edge + 1) % n)
                } else {
                    None
                };
                if let Some(vi) = vi {
                    cuts.push((u, self.order(self.vertex_class((q, vi))) != 0));
                }
            }
        }
        cuts.sort();
        if s.u_lo > s.u_hi {
            cuts.reverse();
        }
        let xmap = |u: &KNum| &s.x_lo + &(&(u - &s.u_lo) / &(&s.u_hi - &s.u_lo) * (&s.x_hi - &s.x_lo));
        let mut us = vec![s.u_lo.clone()];
        us.extend(cuts.iter().map(|(u, _)| u.clone()));
        us.push(s.u_hi.clone());
        let parts = us
            .windows(2)
            .map(|w| Strip {
                at: s.at,
                u_lo: w[0].clone(),
                u_hi: w[1].clone(),
                x_lo: xmap(&w[0]),
                x_hi: xmap(&w[1]),
                dir: s.dir.clone(),
            })
            .collect();
        (parts, cuts.iter().map(|(u, h)| (xmap(u), *h)).collect())
    }

    // carries a vertex-free strip to its exit edge: (exit edge, exit params of lo and hi, swept area)
    fn push_strip(&self, s: &Strip) -> Result<(EdgeRef, KNum, KNum, KNum)> {
        let q = s.at.0;
        let mid = (&s.u_lo + &s.u_hi).scale(&rat(1, 2));
        let pm = self.point_on(s.at, &mid);
        let hit = self
            .ray_exit(q, &pm, &s.dir)
            .ok_or_else(|| Error::Check(format!("strip leaves polygon {q} without exit")))?;
        let exit = (q, hit.edge);
        let b = self.vertex(q, hit.edge).clone();
        let ev = self.edge(exit);
        let c = cross(&s.dir, &ev);
        let land = |u: &KNum| -> (KNum, KVec2) {
            let p = self.point_on(s.at, u);
            let bp = sub(&b, &p);
            let t = &cross(&bp, &ev) / &c;
            let w = &cross(&bp, &s.dir) / &c;
            (w, add(&p, &mul(&s.dir, &t)))
        };
        let (w_lo, p_lo2) = land(&s.u_lo);
        let (w_hi, p_hi2) = land(&s.u_hi);
        for w in [&w_lo, &w_hi] {
            if w.sign() < 0 || *w > KNum::one() {
                return Err(Error::Check("strip is not carried by a single edge".into()));
            }
        }
        let p_lo = self.point_on(s.at, &s.u_lo);
        let p_hi = self.point_on(s.at, &s.u_hi);
        let quad = [p_lo, p_hi, p_hi2, p_lo2];
        let twice: KNum = (0..4).map(|i| cross(&quad[i], &quad[(i + 1) % 4])).sum();
        Ok((exit, w_lo, w_hi, twice.abs().scale(&rat(1, 2))))
    }
}

fn assemble(mut records: Vec<Record>, hard: &BTreeSet<(usize, KNum)>) -> Result<LinearInvolution> {
    records.sort_by(|a, b| (a.side, &a.lo).cmp(&(b.side, &b.lo)));
    let mut merged: Vec<Record> = Vec::new();
    for r in records {
        if let Some(last) = merged.last_mut() {
            // two halves of a band folded through a pole must stay separate letters
            let folds = r.arrival == r.side && r.sigma == -1 && &r.c - &r.hi < r.hi && last.lo < &r.c - &last.lo;
            if last.side == r.side
                && last.hi == r.lo
                && last.arrival == r.arrival
                && last.sigma == r.sigma
                && last.c == r.c
                && !folds
                && !hard.contains(&(r.side, r.lo.clone()))
            {
                last.hi = r.hi;
                continue;
            }
        }
        merged.push(r);
    }
    for w in merged.windows(2) {
        if w[0].side == w[1].side && w[0].hi != w[1].lo {
            return Err(Error::Check(format!("gap or overlap at {} on side {}", w[0].hi, w[0].side)));
        }
    }
    let index: BTreeMap<(usize, KNum), usize> =
        merged.iter().enumerate().map(|(i, r)| ((r.side, r.lo.clone()), i)).collect();
    let mut names: Vec<Option<String>> = vec![None; merged.len()];
    let mut next = 0;
    for i in 0..merged.len() {
        let r = &merged[i];
        let sg = KNum::int(r.sigma as i64);
        let (a, b) = (&(&sg * &r.lo) + &r.c, &(&sg * &r.hi) + &r.c);
        let (ilo, ihi) = if a <= b { (a, b) } else { (b, a) };
        let j = *index
            .get(&(r.arrival, ilo.clone()))
            .ok_or_else(|| Error::Check(format!("image of [{}, {}] is not a piece", r.lo, r.hi)))?;
        if merged[j].hi != ihi {
            return Err(Error::Check(format!("image of [{}, {}] is not a piece", r.lo, r.hi)));
        }
        let cross_row = r.side != r.arrival;
        if cross_row != (r.sigma == 1) {
            return Err(Error::Check("orientation of a return does not match its rows".into()));
        }
        if names[i].is_none() {
            let n = next.to_string();
            next += 1;
            names[i] = Some(n.clone());
            if j != i {
                names[j] = Some(n);
            } else {
                return Err(Error::Check("a piece returns onto itself".into()));
            }
        }
    }
    let row = |side: usize| -> Vec<String> {
        merged.iter().zip(&names).filter(|(r, _)| r.side == side).map(|(_, n)| n.clone().expect("named")).collect()
    };
    let g = GenPerm::new(row(0), row(1))?;
    let mut lengths = BTreeMap::new();
    for (r, n) in merged.iter().zip(&names) {
        lengths.insert(n.clone().expect("named"), &r.hi - &r.lo);
    }
    LinearInvolution::validate(g, lengths)
}

// strict interior test by crossing number; p must not lie on the boundary
fn contains(poly: &[KVec2], p: &KVec2) -> bool {
    let n = poly.len();
    let mut inside = false;
    for i in 0..n {
        let (a, b) = (&poly[i], &poly[(i + 1) % n]);
        if (a[1] > p[1]) != (b[1] > p[1]) {
            // x of the edge at height p.y, compared without dividing
            let lhs = &(&p[0] - &a[0]) * &(&b[1] - &a[1]);
            let rhs = &(&b[0] - &a[0]) * &(&p[1] - &a[1]);
            let right = if b[1] > a[1] { lhs < rhs } else { lhs > rhs };
            if right {
                inside = !inside;
            }
        }
    }
    inside
}

#[cfg(test)]
mod tests {
    use super::super::unit_torus;
    use super::*;

    #[test]
    fn torus_vertical_return_is_identity() {
        let t = unit_torus();
        let p = TransversalPiece::new(0, 0, KNum::zero(), KNum::one());
        let cs = t.cross_section(&[p], 100).unwrap();
        assert_eq!(cs.involution.d(), 1);
        assert_eq!(cs.swept, KNum::int(2));
    }

    #[test]
    fn sheared_torus_gives_rotation() {
        // parallelogram with top shifted by 1/3
        let s = FlatSurface::new(
            vec![vec![
                v2(KNum::zero(), KNum::zero()),
                v2(KNum::one(), KNum::zero()),
                v2(KNum::frac(4, 3), KNum::one()),
                v2(KNum::frac(1, 3), KNum::one()),
            ]],
            vec![
                super::super::Gluing::new((0, 0), (0, 2), Sign::Plus),
                super::super::Gluing::new((0, 1), (0, 3), Sign::Plus),
            ],
        )
        .unwrap();
        let p = TransversalPiece::new(0, 0, KNum::zero(), KNum::one());
        let t = s.cross_section(&[p], 100).unwrap().involution;
        assert_eq!(t.d(), 2);
        assert!(t.perm.is_true_permutation());
        assert!(t.saf().is_zero());
    }

    #[test]
    fn partial_transversal_is_rejected_when_it_misses_leaves() {
        let t = unit_torus();
        let p = TransversalPiece::new(0, 0, KNum::zero(), KNum::frac(1, 2));
        assert!(matches!(t.cross_section(&[p], 100), Err(Error::Check(_))));
    }
}
