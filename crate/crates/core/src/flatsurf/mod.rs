//! Polygonal translation and half-translation surfaces with vertices in K².

mod homology;
mod prym;
mod section;
mod trace;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::exactnum::{j_wedge, jxx, rat, JNum, KMat2, KNum, KVec2, QuadField, WedgeNum};
use crate::{Error, Result};

pub use homology::{Chord, Cycle, HomologyBasis};
pub use prym::{
    check_eigenform, commensurability, cylinder_identities, kernel_move, strata_lookup, strata_table, cover_stratum, prym_orders,
    tune_kernel_parameter, Commensurability, EigenformReport, EndoMatrix, IdentityReport,
    KernelTemplate, PolyMap, PrototypeParams, PrymStructure, StrataRow, Tuning,
};
pub use section::{CrossSection, TransversalPiece};
pub use trace::{Cylinder, CylinderDecomposition, SaddleConnection, Segment};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

/// (polygon, edge); edge i runs from vertex i to vertex i+1.
pub type EdgeRef = (usize, usize);

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Gluing {
    pub a: EdgeRef,
    pub b: EdgeRef,
    pub sign: Sign,
}

impl Gluing {
    pub fn new(a: EdgeRef, b: EdgeRef, sign: Sign) -> Self {
        Gluing { a, b, sign }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct VertexClass {
    pub corners: Vec<EdgeRef>,
    /// cone angle in multiples of π
    pub angle: usize,
}

#[derive(Clone, Debug)]
pub struct FlatSurface {
    field: QuadField,
    polygons: Vec<Vec<KVec2>>,
    gluings: Vec<Gluing>,
    partner: Vec<Vec<(EdgeRef, Sign, usize)>>,
    vertices: Vec<VertexClass>,
    vertex_of: Vec<Vec<usize>>,
}

pub(crate) fn v2(x: KNum, y: KNum) -> KVec2 {
    [x, y]
}

pub(crate) fn sub(a: &KVec2, b: &KVec2) -> KVec2 {
    [&a[0] - &b[0], &a[1] - &b[1]]
}

pub(crate) fn add(a: &KVec2, b: &KVec2) -> KVec2 {
    [&a[0] + &b[0], &a[1] + &b[1]]
}

pub(crate) fn neg(a: &KVec2) -> KVec2 {
    [-&a[0], -&a[1]]
}

pub(crate) fn mul(a: &KVec2, k: &KNum) -> KVec2 {
    [&a[0] * k, &a[1] * k]
}

pub(crate) fn cross(a: &KVec2, b: &KVec2) -> KNum {
    &a[0] * &b[1] - &a[1] * &b[0]
}

pub(crate) fn dot(a: &KVec2, b: &KVec2) -> KNum {
    &a[0] * &b[0] + &a[1] * &b[1]
}

// 0 if the angle from a to v is in [0, π), else 1
fn half(a: &KVec2, v: &KVec2) -> u8 {
    let c = cross(a, v).sign();
    if c > 0 || (c == 0 && dot(a, v).sign() > 0) {
        0
    } else {
        1
    }
}

/// Angle from a to u is smaller than angle from a to v, both measured CCW in [0, 2π).
pub(crate) fn angle_lt(a: &KVec2, u: &KVec2, v: &KVec2) -> bool {
    let (hu, hv) = (half(a, u), half(a, v));
    if hu != hv {
        return hu < hv;
    }
    cross(u, v).sign() > 0
}

/// u lies in the half-open sector [out, back) swept counterclockwise.
pub(crate) fn in_sector(out: &KVec2, back: &KVec2, u: &KVec2) -> bool {
    angle_lt(out, u, back)
}

fn segments_meet(p1: &KVec2, p2: &KVec2, q1: &KVec2, q2: &KVec2) -> bool {
    let o = |a: &KVec2, b: &KVec2, c: &KVec2| cross(&sub(b, a), &sub(c, a)).sign();
    let on = |a: &KVec2, b: &KVec2, c: &KVec2| {
        o(a, b, c) == 0
            && a[0].clone().min(b[0].clone()) <= c[0]
            && c[0] <= a[0].clone().max(b[0].clone())
            && a[1].clone().min(b[1].clone()) <= c[1]
            && c[1] <= a[1].clone().max(b[1].clone())
    };
    let (d1, d2, d3, d4) = (o(q1, q2, p1), o(q1, q2, p2), o(p1, p2, q1), o(p1, p2, q2));
    if d1 * d2 < 0 && d3 * d4 < 0 {
        return true;
    }
    on(q1, q2, p1) || on(q1, q2, p2) || on(p1, p2, q1) || on(p1, p2, q2)
}

fn check_polygon(p: &[KVec2]) -> Result<()> {
    let n = p.len();
    if n < 3 {
        return Err(Error::Invalid("polygon needs at least 3 vertices".into()));
    }
    let area2: KNum = (0..n).map(|i| cross(&p[i], &p[(i + 1) % n])).sum();
    if area2.sign() <= 0 {
        return Err(Error::Invalid("polygon is not counterclockwise".into()));
    }
    for i in 0..n {
        if sub(&p[(i + 1) % n], &p[i]).iter().all(|x| x.is_zero()) {
            return Err(Error::Invalid(format!("edge {i} has zero length")));
        }
    }
    for i in 0..n {
        for j in i + 2..n {
            if i == 0 && j == n - 1 {
                continue;
            }
            if segments_meet(&p[i], &p[(i + 1) % n], &p[j], &p[(j + 1) % n]) {
                return Err(Error::Invalid(format!("edges {i} and {j} intersect")));
            }
        }
    }
    Ok(())
}

impl FlatSurface {
    pub fn new(polygons: Vec<Vec<KVec2>>, gluings: Vec<Gluing>) -> Result<Self> {
        let mut field = QuadField::Q;
        for p in &polygons {
            check_polygon(p)?;
            for v in p {
                field = field.join(v[0].field())?.join(v[1].field())?;
            }
        }
        let mut partner: Vec<Vec<Option<(EdgeRef, Sign, usize)>>> =
            polygons.iter().map(|p| vec![None; p.len()]).collect();
        for (gi, g) in gluings.iter().enumerate() {
            for (x, y) in [(g.a, g.b), (g.b, g.a)] {
                let slot = partner
                    .get_mut(x.0)
                    .and_then(|p| p.get_mut(x.1))
                    .ok_or_else(|| Error::Invalid(format!("no edge {x:?}")))?;
                if slot.is_some() || (x == y) {
                    return Err(Error::Invalid(format!("edge {x:?} glued more than once")));
                }
                *slot = Some((y, g.sign, gi));
            }
            let ea = edge_vec(&polygons, g.a);
            let eb = edge_vec(&polygons, g.b);
            let ok = match g.sign {
                Sign::Plus => ea == neg(&eb),
                Sign::Minus => ea == eb,
            };
            if !ok {
                return Err(Error::Invalid(format!("gluing {:?} ~ {:?} has mismatched vectors", g.a, g.b)));
            }
        }
        let partner: Vec<Vec<(EdgeRef, Sign, usize)>> = partner
            .into_iter()
            .enumerate()
            .map(|(q, p)| {
                p.into_iter()
                    .enumerate()
                    .map(|(e, x)| x.ok_or_else(|| Error::Invalid(format!("edge ({q}, {e}) is unmatched"))))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<_>>()?;
        let mut s = FlatSurface {
            field,
            polygons,
            gluings,
            partner,
            vertices: vec![],
            vertex_of: vec![],
        };
        s.check_connected()?;
        s.build_vertices();
        Ok(s)
    }

    fn check_connected(&self) -> Result<()> {
        let mut seen = vec![false; self.polygons.len()];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(q) = stack.pop() {
            for &((q2, _), _, _) in &self.partner[q] {
                if !seen[q2] {
                    seen[q2] = true;
                    stack.push(q2);
                }
            }
        }
        if seen.iter().all(|x| *x) {
            Ok(())
        } else {
            Err(Error::Invalid("surface is disconnected".into()))
        }
    }

    fn build_vertices(&mut self) {
        let mut vertex_of: Vec<Vec<usize>> = self.polygons.iter().map(|p| vec![usize::MAX; p.len()]).collect();
        let mut classes = Vec::new();
        let ex = v2(KNum::one(), KNum::zero());
        let mex = neg(&ex);
        for q in 0..self.polygons.len() {
            for i in 0..self.polygons[q].len() {
                if vertex_of[q][i] != usize::MAX {
                    continue;
                }
                let id = classes.len();
                let mut corners = Vec::new();
                let mut angle = 0;
                let mut cur = (q, i);
                while vertex_of[cur.0][cur.1] == usize::MAX {
                    vertex_of[cur.0][cur.1] = id;
                    corners.push(cur);
                    let (out, back) = self.corner_dirs(cur);
                    angle += in_sector(&out, &back, &ex) as usize + in_sector(&out, &back, &mex) as usize;
                    let ((q2, e2), _, _) = self.partner[cur.0][cur.1];
                    cur = (q2, (e2 + 1) % self.polygons[q2].len());
                }
                classes.push(VertexClass { corners, angle });
            }
        }
        self.vertices = classes;
        self.vertex_of = vertex_of;
    }

    pub fn field(&self) -> QuadField {
        self.field
    }

    pub fn polygons(&self) -> &[Vec<KVec2>] {
        &self.polygons
    }

    pub fn gluings(&self) -> &[Gluing] {
        &self.gluings
    }

    pub fn vertices(&self) -> &[VertexClass] {
        &self.vertices
    }

    pub fn vertex_class(&self, corner: EdgeRef) -> usize {
        self.vertex_of[corner.0][corner.1]
    }

    /// Partner edge, gluing sign, gluing index.
    pub fn partner(&self, e: EdgeRef) -> (EdgeRef, Sign, usize) {
        self.partner[e.0][e.1]
    }

    pub fn vertex(&self, q: usize, i: usize) -> &KVec2 {
        let p = &self.polygons[q];
        &p[i % p.len()]
    }

    pub fn edge(&self, e: EdgeRef) -> KVec2 {
        edge_vec(&self.polygons, e)
    }

    /// Outgoing edge direction and the reversed incoming edge at a corner.
    pub fn corner_dirs(&self, (q, i): EdgeRef) -> (KVec2, KVec2) {
        let n = self.polygons[q].len();
        let v = &self.polygons[q][i];
        (sub(&self.polygons[q][(i + 1) % n], v), sub(&self.polygons[q][(i + n - 1) % n], v))
    }

    pub fn is_abelian(&self) -> bool {
        self.gluings.iter().all(|g| g.sign == Sign::Plus)
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.vertices.len() as i64 - self.gluings.len() as i64 + self.polygons.len() as i64
    }

    pub fn genus(&self) -> usize {
        ((2 - self.euler_characteristic()) / 2) as usize
    }

    /// Order of the zero at a vertex class: of ω for translation surfaces, of q otherwise.
    pub fn order(&self, class: usize) -> i64 {
        let a = self.vertices[class].angle as i64;
        if self.is_abelian() {
            a / 2 - 1
        } else {
            a - 2
        }
    }

    pub fn orders(&self) -> Vec<i64> {
        (0..self.vertices.len()).map(|c| self.order(c)).collect()
    }

    /// Stratum label such as H(1,1,2) or Q(-1^3,1,2); marked points are dropped unless nothing else is left.
    pub fn stratum(&self) -> String {
        let mut o: Vec<i64> = self.orders().into_iter().filter(|x| *x != 0).collect();
        if o.is_empty() {
            o.push(0);
        }
        format_stratum(if self.is_abelian() { 'H' } else { 'Q' }, &o)
    }

    pub fn area(&self) -> KNum {
        let twice: KNum = self
            .polygons
            .iter()
            .flat_map(|p| (0..p.len()).map(move |i| cross(&p[i], &p[(i + 1) % p.len()])))
            .sum();
        twice.scale(&rat(1, 2))
    }

    fn require_abelian(&self, what: &str) -> Result<()> {
        if self.is_abelian() {
            Ok(())
        } else {
            Err(Error::Domain(format!("{what} needs a translation surface; take the orientation double cover first")))
        }
    }

    pub fn j_invariant(&self) -> Result<JNum> {
        self.require_abelian("the J-invariant")?;
        let mut j = JNum::zero();
        for p in &self.polygons {
            for i in 0..p.len() {
                j = &j + &j_wedge(&p[i], &p[(i + 1) % p.len()])?;
            }
        }
        Ok(j)
    }

    pub fn saf_vertical(&self) -> Result<WedgeNum> {
        Ok(jxx(&self.j_invariant()?))
    }

    /// Vertical SAF after the shear sending slope k (None = ∞) to the vertical.
    pub fn saf_direction(&self, slope: Option<&KNum>) -> Result<WedgeNum> {
        self.require_abelian("the directional SAF")?;
        let m = match slope {
            None => KMat2::identity(),
            Some(k) if k.is_zero() => KMat2::new(KNum::zero(), -KNum::one(), KNum::one(), KNum::zero()),
            Some(k) => KMat2::new(KNum::one(), -&k.inv(), KNum::zero(), KNum::one()),
        };
        self.transform(&m)?.saf_vertical()
    }

    pub fn transform(&self, m: &KMat2) -> Result<FlatSurface> {
        if m.det().sign() <= 0 {
            return Err(Error::Domain("matrix must have positive determinant".into()));
        }
        let polys = self.polygons.iter().map(|p| p.iter().map(|v| m.apply(v)).collect()).collect();
        FlatSurface::new(polys, self.gluings.clone())
    }

    pub fn translate_polygons(&self, shifts: &[KVec2]) -> Result<FlatSurface> {
        let polys = self
            .polygons
            .iter()
            .zip(shifts)
            .map(|(p, s)| p.iter().map(|v| add(v, s)).collect())
            .collect();
        FlatSurface::new(polys, self.gluings.clone())
    }

    /// Splits polygon q along the diagonal from vertex i to vertex j; the new piece is appended.
    pub fn split_polygon(&self, q: usize, i: usize, j: usize) -> Result<FlatSurface> {
        let p = &self.polygons[q];
        let n = p.len();
        let (i, j) = if i < j { (i, j) } else { (j, i) };
        if j - i < 2 || (i == 0 && j == n - 1) {
            return Err(Error::Domain("diagonal joins adjacent vertices".into()));
        }
        // part A keeps vertices i..=j, part B keeps j..n and 0..=i
        let a: Vec<KVec2> = p[i..=j].to_vec();
        let b: Vec<KVec2> = p[j..].iter().chain(&p[..=i]).cloned().collect();
        let new_q = self.polygons.len();
        let remap = |e: EdgeRef| -> EdgeRef {
            if e.0 != q {
                return e;
            }
            if e.1 >= i && e.1 < j {
                (q, e.1 - i)
            } else if e.1 >= j {
                (new_q, e.1 - j)
            } else {
                (new_q, e.1 + (n - j))
            }
        };
        let mut polys = self.polygons.clone();
        polys[q] = a;
        polys.push(b);
        let mut gl: Vec<Gluing> =
            self.gluings.iter().map(|g| Gluing::new(remap(g.a), remap(g.b), g.sign)).collect();
        gl.push(Gluing::new((q, j - i), (new_q, n - j + i), Sign::Plus));
        FlatSurface::new(polys, gl)
    }

    /// Marks the point at parameter u ∈ (0,1) of edge e, and its image on the partner edge.
    pub fn subdivide_edge(&self, e: EdgeRef, u: &KNum) -> Result<FlatSurface> {
        if u.sign() <= 0 || *u >= KNum::one() {
            return Err(Error::Domain("subdivision parameter must lie in (0, 1)".into()));
        }
        let (f, _, _) = self.partner(e);
        // both gluings identify parameter u on one side with 1 − u on the other
        let mut cuts = vec![(e, u.clone()), (f, KNum::one() - u)];
        cuts.sort_by(|x, y| y.0.cmp(&x.0));
        let mut polys = self.polygons.clone();
        for ((q, i), s) in &cuts {
            let p = &polys[*q];
            let v = add(&p[*i], &mul(&sub(&p[(*i + 1) % p.len()], &p[*i]), s));
            polys[*q].insert(*i + 1, v);
        }
        // edge (q, i) becomes (q, i) and (q, i + 1); later edges of q shift by one
        let shift = |x: EdgeRef| -> EdgeRef {
            let mut out = x;
            for ((q, i), _) in &cuts {
                if out.0 == *q && out.1 > *i {
                    out.1 += 1;
                }
            }
            out
        };
        let mut gl = Vec::new();
        for g in &self.gluings {
            if (g.a == e && g.b == f) || (g.a == f && g.b == e) {
                let (a, b) = (shift(g.a), shift(g.b));
                gl.push(Gluing::new(a, (b.0, b.1 + 1), g.sign));
                gl.push(Gluing::new((a.0, a.1 + 1), b, g.sign));
            } else {
                gl.push(Gluing::new(shift(g.a), shift(g.b), g.sign));
            }
        }
        FlatSurface::new(polys, gl)
    }

    /// Cuts polygon q along the segment between two boundary points, marking them first
    /// if needed. Returns the new surface and the edge running from a to b.
    pub fn cut_chord(&self, q: usize, a: &KVec2, b: &KVec2) -> Result<(FlatSurface, EdgeRef)> {
        let mut s = self.clone();
        for pt in [a, b] {
            let p = &s.polygons[q];
            let n = p.len();
            let hit = (0..n).find_map(|i| {
                let (v, w) = (&p[i], &p[(i + 1) % n]);
                let d = sub(w, v);
                let r = sub(pt, v);
                if !cross(&d, &r).is_zero() {
                    return None;
                }
                let u = &dot(&r, &d) / &dot(&d, &d);
                (u.sign() >= 0 && u < KNum::one()).then_some((i, u))
            });
            let (i, u) = hit.ok_or_else(|| Error::Domain("chord end is not on the polygon boundary".into()))?;
            if !u.is_zero() {
                s = s.subdivide_edge((q, i), &u)?;
            }
        }
        let find = |s: &FlatSurface, pt: &KVec2| s.polygons[q].iter().position(|v| v == pt).expect("marked");
        let (i, j) = (find(&s, a), find(&s, b));
        let cut = s.split_polygon(q, i, j)?;
        let want = sub(b, a);
        let new_q = cut.polygons.len() - 1;
        let (lo, hi) = (i.min(j), i.max(j));
        let e = [(q, hi - lo), (new_q, s.polygons[q].len() - hi + lo)]
            .into_iter()
            .find(|&e| cut.edge(e) == want)
            .expect("one side of the cut runs from a to b");
        Ok((cut, e))
    }

    /// Two copies of each polygon, the second rotated by π; returns the cover and its deck map.
    pub fn orientation_double_cover(&self) -> (FlatSurface, PolyMap) {
        let n = self.polygons.len();
        if self.is_abelian() {
            return (self.clone(), PolyMap { poly: (0..n).collect(), shift: vec![0; n] });
        }
        let mut polys = self.polygons.clone();
        polys.extend(self.polygons.iter().map(|p| p.iter().map(neg).collect::<Vec<_>>()));
        let mut gl = Vec::new();
        for g in &self.gluings {
            for c in 0..2 {
                let other = match g.sign {
                    Sign::Plus => c,
                    Sign::Minus => 1 - c,
                };
                gl.push(Gluing::new((g.a.0 + c * n, g.a.1), (g.b.0 + other * n, g.b.1), Sign::Plus));
            }
        }
        let cover = FlatSurface::new(polys, gl).expect("double cover of a valid surface is valid");
        let deck = PolyMap { poly: (0..2 * n).map(|q| (q + n) % (2 * n)).collect(), shift: vec![0; 2 * n] };
        (cover, deck)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let file = SurfaceFile {
            field: self.field.f(),
            polygons: self.polygons.clone(),
            gluings: self.gluings.iter().map(|g| (g.a, g.b, g.sign)).collect(),
            involution: None,
        };
        serde_json::to_value(file).expect("surface serializes")
    }

    pub fn from_json(v: &serde_json::Value) -> Result<FlatSurface> {
        let file: SurfaceFile =
            serde_json::from_value(v.clone()).map_err(|e| Error::Parse(format!("surface file: {e}")))?;
        let s = FlatSurface::new(
            file.polygons,
            file.gluings.into_iter().map(|(a, b, s)| Gluing::new(a, b, s)).collect(),
        )?;
        if file.field != s.field.f() && !s.field.is_rational() {
            return Err(Error::FieldMismatch(file.field, s.field.f()));
        }
        Ok(s)
    }
}

fn edge_vec(polygons: &[Vec<KVec2>], (q, e): EdgeRef) -> KVec2 {
    let p = &polygons[q];
    sub(&p[(e + 1) % p.len()], &p[e])
}

#[derive(Serialize, Deserialize)]
struct SurfaceFile {
    field: u64,
    polygons: Vec<Vec<KVec2>>,
    gluings: Vec<(EdgeRef, EdgeRef, Sign)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    involution: Option<serde_json::Value>,
}

pub fn format_stratum(letter: char, orders: &[i64]) -> String {
    let mut counts: BTreeMap<i64, usize> = BTreeMap::new();
    for o in orders {
        *counts.entry(*o).or_default() += 1;
    }
    let parts: Vec<String> = counts
        .iter()
        .flat_map(|(o, n)| {
            // poles and multiplicity-3+ entries use exponent notation, as in Q(-1^3,1,2)
            if *n > 1 && (*o < 0 || *n > 2) {
                vec![format!("{o}^{n}")]
            } else {
                vec![o.to_string(); *n]
            }
        })
        .collect();
    format!("{letter}({})", parts.join(","))
}

pub(crate) fn k(x: i64) -> KNum {
    KNum::int(x)
}

pub(crate) fn kv(x: i64, y: i64) -> KVec2 {
    v2(k(x), k(y))
}

/// Unit square with opposite sides glued.
pub fn unit_torus() -> FlatSurface {
    FlatSurface::new(
        vec![vec![kv(0, 0), kv(1, 0), kv(1, 1), kv(0, 1)]],
        vec![Gluing::new((0, 0), (0, 2), Sign::Plus), Gluing::new((0, 1), (0, 3), Sign::Plus)],
    )
    .expect("torus")
}

/// Unit square, each side glued to itself by a half-turn.
pub fn pillowcase() -> FlatSurface {
    // a self-glued side needs two edges; cut each side at its midpoint
    let h = KNum::frac(1, 2);
    let p = vec![
        kv(0, 0),
        v2(h.clone(), k(0)),
        kv(1, 0),
        v2(k(1), h.clone()),
        kv(1, 1),
        v2(h.clone(), k(1)),
        kv(0, 1),
        v2(k(0), h),
    ];
    let gl = (0..4).map(|s| Gluing::new((0, 2 * s), (0, 2 * s + 1), Sign::Minus)).collect();
    FlatSurface::new(vec![p], gl).expect("pillowcase")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn torus_basics() {
        let t = unit_torus();
        assert_eq!(t.genus(), 1);
        assert_eq!(t.vertices().len(), 1);
        assert_eq!(t.order(0), 0);
        let j = t.j_invariant().unwrap();
        assert_eq!(j.c[1], crate::exactnum::rat_int(2));
        assert!(t.saf_vertical().unwrap().is_zero());
    }

    #[test]
    fn pillowcase_has_four_poles() {
        let p = pillowcase();
        assert_eq!(p.genus(), 0);
        let mut o = p.orders();
        o.sort();
        // corners are poles, side midpoints are regular
        assert_eq!(o, vec![-1, -1, -1, -1, 0]);
        assert_eq!(p.stratum(), "Q(-1^4)");
        assert!(p.j_invariant().is_err());
        let (cover, _) = p.orientation_double_cover();
        assert_eq!(cover.genus(), 1);
        assert!(cover.is_abelian());
    }

    #[test]
    fn rejects_bad_input() {
        let sq = vec![kv(0, 0), kv(1, 0), kv(1, 1), kv(0, 1)];
        let bad = FlatSurface::new(
            vec![sq.clone()],
            vec![Gluing::new((0, 0), (0, 1), Sign::Plus), Gluing::new((0, 2), (0, 3), Sign::Plus)],
        );
        assert!(bad.is_err());
        let unmatched = FlatSurface::new(vec![sq.clone()], vec![Gluing::new((0, 0), (0, 2), Sign::Plus)]);
        assert!(unmatched.is_err());
        let cw: Vec<KVec2> = sq.iter().rev().cloned().collect();
        assert!(FlatSurface::new(
            vec![cw],
            vec![Gluing::new((0, 0), (0, 2), Sign::Plus), Gluing::new((0, 1), (0, 3), Sign::Plus)]
        )
        .is_err());
    }

    #[test]
    fn json_round_trip() {
        let t = unit_torus();
        let back = FlatSurface::from_json(&t.to_json()).unwrap();
        assert_eq!(back.polygons(), t.polygons());
        assert_eq!(back.gluings(), t.gluings());
    }

    #[test]
    fn j_is_translation_invariant() {
        let s = prym::PrototypeParams::new(2, 1, -1, None).unwrap().surface().unwrap();
        let shifts: Vec<KVec2> = (0..3).map(|i| kv(i * 3 - 1, 7 - i)).collect();
        assert_eq!(s.translate_polygons(&shifts).unwrap().j_invariant().unwrap(), s.j_invariant().unwrap());
    }

    #[test]
    fn j_is_invariant_under_splitting() {
        let s = prym::PrototypeParams::new(2, 1, -1, None).unwrap().surface().unwrap();
        let cut = s.split_polygon(0, 0, 4).unwrap();
        assert_eq!(cut.j_invariant().unwrap(), s.j_invariant().unwrap());
        assert_eq!(cut.genus(), s.genus());
    }

    #[test]
    fn directional_saf_any_sign() {
        let r5 = KNum::sqrt_int(5).unwrap();
        let t = unit_torus().transform(&KMat2::new(KNum::one(), r5.clone(), KNum::zero(), KNum::one())).unwrap();
        assert!(!t.saf_vertical().unwrap().is_zero());
        // the old vertical now has slope 1/√5
        assert!(t.saf_direction(Some(&r5.inv())).unwrap().is_zero());
        assert!(!t.saf_direction(Some(&-r5.inv())).unwrap().is_zero());
        assert!(unit_torus().saf_direction(Some(&KNum::int(-3))).unwrap().is_zero());
    }

    #[test]
    fn stratum_labels() {
        assert_eq!(format_stratum('Q', &[-1, -1, -1, 1, 2]), "Q(-1^3,1,2)");
        assert_eq!(format_stratum('H', &[1, 1, 2]), "H(1,1,2)");
        assert_eq!(format_stratum('Q', &[8]), "Q(8)");
    }
}
