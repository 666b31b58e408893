//! Straight-line flow across gluings: separatrices, saddle connections, cylinders.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::{add, cross, dot, in_sector, mul, neg, sub, EdgeRef, FlatSurface, Sign};
use crate::exactnum::{rat, KNum, KVec2};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Segment {
    pub poly: usize,
    pub start: KVec2,
    pub end: KVec2,
}

#[derive(Clone, Debug, Serialize)]
pub struct SaddleConnection {
    pub from: usize,
    pub to: usize,
    pub start_corner: EdgeRef,
    pub end_corner: EdgeRef,
    /// holonomy in the chart of the starting corner
    pub holonomy: KVec2,
    pub segments: Vec<Segment>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Cylinder {
    /// circumference measured in units of |d|
    pub width: KNum,
    /// transverse height multiplied by |d|
    pub height: KNum,
    pub area: KNum,
    /// h/w = height / (width·|d|²)
    pub modulus: KNum,
    /// (gluing, piece) crossings of the core curve, in flow order
    pub crossings: Vec<(usize, usize)>,
    /// saddle connections met at the ends of the crossing pieces
    pub boundary: Vec<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CylinderDecomposition {
    pub direction: KVec2,
    pub cylinders: Vec<Cylinder>,
    pub saddle_connections: Vec<SaddleConnection>,
    pub stable: bool,
}

pub(crate) struct Hit {
    pub edge: usize,
    pub s: KNum,
    pub u: KNum,
}

impl FlatSurface {
    /// First edge hit by p + sδ, s > 0, inside polygon q.
    pub(crate) fn ray_exit(&self, q: usize, p: &KVec2, d: &KVec2) -> Option<Hit> {
        let poly = &self.polygons()[q];
        let n = poly.len();
        let mut best: Option<Hit> = None;
        for e in 0..n {
            let a = &poly[e];
            let ev = sub(&poly[(e + 1) % n], a);
            let c = cross(d, &ev);
            if c.is_zero() {
                continue;
            }
            let ap = sub(a, p);
            let s = &cross(&ap, &ev) / &c;
            if s.sign() <= 0 {
                continue;
            }
            let u = &cross(&ap, d) / &c;
            if u.sign() < 0 || u > KNum::one() {
                continue;
            }
            if best.as_ref().map_or(true, |b| s < b.s) {
                best = Some(Hit { edge: e, s, u });
            }
        }
        best
    }

    pub(crate) fn point_on(&self, (q, e): EdgeRef, u: &KNum) -> KVec2 {
        let a = self.vertex(q, e);
        add(a, &mul(&self.edge((q, e)), u))
    }

    /// Continue through edge (q,e) at parameter u; returns the new polygon, point and direction.
    pub(crate) fn cross_edge(&self, at: EdgeRef, u: &KNum, d: &KVec2) -> (usize, KVec2, KVec2, usize) {
        let (to, sign, gi) = self.partner(at);
        let p = self.point_on(to, &(KNum::one() - u));
        let d2 = match sign {
            Sign::Plus => d.clone(),
            Sign::Minus => neg(d),
        };
        (to.0, p, d2, gi)
    }

    /// Corners whose half-open sector contains d.
    pub fn corners_facing(&self, d: &KVec2) -> Vec<EdgeRef> {
        let mut out = Vec::new();
        for q in 0..self.polygons().len() {
            for i in 0..self.polygons()[q].len() {
                let (o, b) = self.corner_dirs((q, i));
                if in_sector(&o, &b, d) {
                    out.push((q, i));
                }
            }
        }
        out
    }

    pub fn trace_separatrix(&self, corner: EdgeRef, d: &KVec2, budget: usize) -> Result<SaddleConnection> {
        let (o, b) = self.corner_dirs(corner);
        if !in_sector(&o, &b, d) {
            return Err(Error::Domain(format!("direction does not leave corner {corner:?} into its polygon")));
        }
        let mut q = corner.0;
        let mut p = self.vertex(corner.0, corner.1).clone();
        let mut dir = d.clone();
        let mut flip = false;
        let mut hol = [KNum::zero(), KNum::zero()];
        let mut segments = Vec::new();
        for _ in 0..budget {
            let hit = self
                .ray_exit(q, &p, &dir)
                .ok_or_else(|| Error::Check(format!("ray leaves polygon {q} without exit")))?;
            let end = add(&p, &mul(&dir, &hit.s));
            let step = sub(&end, &p);
            hol = if flip { sub(&hol, &step) } else { add(&hol, &step) };
            segments.push(Segment { poly: q, start: p.clone(), end: end.clone() });
            let vertex = if hit.u.is_zero() {
                Some(hit.edge)
            } else if hit.u == KNum::one() {
                Some((hit.edge + 1) % self.polygons()[q].len())
            } else {
                None
            };
            if let Some(v) = vertex {
                return Ok(SaddleConnection {
                    from: self.vertex_class(corner),
                    to: self.vertex_class((q, v)),
                    start_corner: corner,
                    end_corner: (q, v),
                    holonomy: hol,
                    segments,
                });
            }
            let (q2, p2, d2, _) = self.cross_edge((q, hit.edge), &hit.u, &dir);
            if d2 != dir {
                flip = !flip;
            }
            q = q2;
            p = p2;
            dir = d2;
        }
        Err(Error::Budget(budget))
    }

    /// All saddle connections in direction ±d, each listed once.
    pub fn saddle_connections(&self, d: &KVec2, budget: usize) -> Result<Vec<SaddleConnection>> {
        let mut dirs = vec![d.clone()];
        if !self.is_abelian() {
            dirs.push(neg(d));
        }
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for dir in &dirs {
            for c in self.corners_facing(dir) {
                let sc = self.trace_separatrix(c, dir, budget)?;
                let mut key: Vec<(usize, KVec2, KVec2)> = sc
                    .segments
                    .iter()
                    .map(|s| {
                        let (a, b) = if s.start <= s.end { (&s.start, &s.end) } else { (&s.end, &s.start) };
                        (s.poly, a.clone(), b.clone())
                    })
                    .collect();
                key.sort();
                if seen.insert(key) {
                    out.push(sc);
                }
            }
        }
        Ok(out)
    }

    fn canonical_param(&self, at: EdgeRef, u: &KNum) -> (usize, KNum) {
        let (_, _, gi) = self.partner(at);
        if self.gluings()[gi].a == at {
            (gi, u.clone())
        } else {
            (gi, KNum::one() - u)
        }
    }

    pub fn cylinder_decomposition(&self, d: &KVec2, budget: usize) -> Result<CylinderDecomposition> {
        if d.iter().all(|x| x.is_zero()) {
            return Err(Error::Domain("zero direction".into()));
        }
        let scs = self.saddle_connections(d, budget)?;
        let ng = self.gluings().len();
        // cut points on every gluing, canonical parameters, with the saddle connection they belong to
        let mut cuts: Vec<BTreeMap<KNum, Option<usize>>> = vec![BTreeMap::new(); ng];
        for c in cuts.iter_mut() {
            c.insert(KNum::zero(), None);
            c.insert(KNum::one(), None);
        }
        for (k, sc) in scs.iter().enumerate() {
            for seg in &sc.segments {
                for pt in [&seg.start, &seg.end] {
                    if let Some((at, u)) = self.locate_on_boundary(seg.poly, pt) {
                        let (gi, c) = self.canonical_param(at, &u);
                        cuts[gi].entry(c).or_insert(Some(k));
                    }
                }
            }
        }
        let cut_list: Vec<Vec<(KNum, Option<usize>)>> =
            cuts.into_iter().map(|m| m.into_iter().collect()).collect();
        let transverse: Vec<bool> =
            self.gluings().iter().map(|g| !cross(&self.edge(g.a), d).is_zero()).collect();
        let piece_of = |gi: usize, c: &KNum| -> usize {
            let cl = &cut_list[gi];
            cl.partition_point(|(x, _)| x <= c) - 1
        };
        let mut visited: BTreeSet<(usize, usize)> = BTreeSet::new();
        let mut cylinders = Vec::new();
        let half = rat(1, 2);
        for gi in 0..ng {
            if !transverse[gi] {
                continue;
            }
            for j in 0..cut_list[gi].len() - 1 {
                if visited.contains(&(gi, j)) {
                    continue;
                }
                let (lo, hi) = (&cut_list[gi][j].0, &cut_list[gi][j + 1].0);
                let m = (lo + hi).scale(&half);
                let g = &self.gluings()[gi];
                let ea = self.edge(g.a);
                let (mut q, mut p, mut dir) = if cross(&ea, d).sign() > 0 {
                    (g.a.0, self.point_on(g.a, &m), d.clone())
                } else {
                    let dd = if g.sign == Sign::Plus { d.clone() } else { neg(d) };
                    (g.b.0, self.point_on(g.b, &(KNum::one() - &m)), dd)
                };
                let mut width = KNum::zero();
                let mut crossings = Vec::new();
                let mut closed = false;
                for _ in 0..budget {
                    let hit = self
                        .ray_exit(q, &p, &dir)
                        .ok_or_else(|| Error::Check(format!("ray leaves polygon {q} without exit")))?;
                    if hit.u.is_zero() || hit.u == KNum::one() {
                        return Err(Error::Check("regular leaf hit a vertex".into()));
                    }
                    width += &hit.s;
                    let (g2, c) = self.canonical_param((q, hit.edge), &hit.u);
                    let piece = piece_of(g2, &c);
                    crossings.push((g2, piece));
                    if g2 == gi && c == m {
                        closed = true;
                        break;
                    }
                    let (q2, p2, d2, _) = self.cross_edge((q, hit.edge), &hit.u, &dir);
                    q = q2;
                    p = p2;
                    dir = d2;
                }
                if !closed {
                    return Err(Error::Budget(budget));
                }
                visited.extend(crossings.iter().cloned());
                let height = (cross(d, &ea) * (hi - lo)).abs();
                let area = &width * &height;
                let modulus = &height / &(&width * &dot(d, d));
                let mut boundary = BTreeSet::new();
                for &(g2, pc) in &crossings {
                    for idx in [pc, pc + 1] {
                        if let Some(k) = cut_list[g2][idx].1 {
                            boundary.insert(k);
                        }
                    }
                }
                cylinders.push(Cylinder {
                    width,
                    height,
                    area,
                    modulus,
                    crossings,
                    boundary: boundary.into_iter().collect(),
                });
            }
        }
        let total: KNum = cylinders.iter().map(|c| c.area.clone()).sum();
        if total != self.area() {
            return Err(Error::Check(format!("cylinder areas sum to {total}, surface area is {}", self.area())));
        }
        if self.is_abelian() && cylinders.len() > self.max_cylinders() {
            return Err(Error::Check(format!(
                "{} cylinders exceed the bound {}",
                cylinders.len(),
                self.max_cylinders()
            )));
        }
        let stable = scs
            .iter()
            .all(|s| s.from == s.to || self.order(s.from) == 0 || self.order(s.to) == 0);
        Ok(CylinderDecomposition { direction: d.clone(), cylinders, saddle_connections: scs, stable })
    }

    /// g + n − 1 with n the number of zeros (at least one).
    pub fn max_cylinders(&self) -> usize {
        let n = self.orders().iter().filter(|o| **o != 0).count().max(1);
        self.genus() + n - 1
    }

    /// Edge and parameter of a boundary point of polygon q, if it lies inside an edge.
    fn locate_on_boundary(&self, q: usize, p: &KVec2) -> Option<(EdgeRef, KNum)> {
        let poly = &self.polygons()[q];
        let n = poly.len();
        for e in 0..n {
            let a = &poly[e];
            let ev = sub(&poly[(e + 1) % n], a);
            let ap = sub(p, a);
            if !cross(&ev, &ap).is_zero() {
                continue;
            }
            let u = &dot(&ap, &ev) / &dot(&ev, &ev);
            if u.sign() > 0 && u < KNum::one() {
                return Some(((q, e), u));
            }
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::super::{kv, unit_torus};
    use super::*;

    #[test]
    fn torus_diagonal_closes() {
        let t = unit_torus();
        let sc = t.trace_separatrix((0, 0), &kv(1, 1), 10).unwrap();
        assert_eq!(sc.holonomy, kv(1, 1));
        assert_eq!(sc.segments.len(), 1);
        let sc = t.trace_separatrix((0, 0), &kv(2, 1), 10).unwrap();
        assert_eq!(sc.holonomy, kv(2, 1));
    }

    #[test]
    fn irrational_slope_runs_out() {
        let t = unit_torus();
        let d = [KNum::one(), KNum::sqrt_int(5).unwrap()];
        assert_eq!(t.trace_separatrix((0, 0), &d, 200).unwrap_err(), Error::Budget(200));
    }

    #[test]
    fn torus_single_cylinder() {
        let t = unit_torus();
        let cd = t.cylinder_decomposition(&kv(1, 0), 10).unwrap();
        assert_eq!(cd.cylinders.len(), 1);
        assert_eq!(cd.cylinders[0].modulus, KNum::one());
        let cd = t.cylinder_decomposition(&kv(1, 2), 10).unwrap();
        assert_eq!(cd.cylinders.len(), 1);
        // circumference √5, height 1/√5
        assert_eq!(cd.cylinders[0].modulus, KNum::frac(1, 5));
    }

    #[test]
    fn pillowcase_directions() {
        let p = super::super::pillowcase();
        let cd = p.cylinder_decomposition(&kv(0, 1), 10).unwrap();
        assert_eq!(cd.cylinders.len(), 1);
        assert_eq!(cd.cylinders[0].area, KNum::one());
    }
}
