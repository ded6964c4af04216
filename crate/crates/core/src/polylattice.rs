//! Newton polyhedra, their faces, the support function, Newton order and
//! normalized volume. Everything is exact; no floating point.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{dot_i64, primitive_from_q, q, qr, Q};
use crate::error::{Error, Result};
use crate::linalg::{self, det_i64, rank_i64};
use crate::poly::{Exponent, SparsePoly};

/// A facet inequality `normal(m) >= offset`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Facet {
    pub normal: Vec<i64>,
    pub offset: i64,
}

impl Facet {
    pub fn eval(&self, m: &[i64]) -> i64 {
        dot_i64(&self.normal, m)
    }

    /// Bounded facet of a Newton polyhedron: no coordinate direction is parallel to it.
    pub fn is_compact(&self) -> bool {
        self.normal.iter().all(|&x| x > 0)
    }
}

/// Facets of `conv(points) + cone(directions)`, which must be full-dimensional.
///
/// Every facet hyperplane passes through some point and contains `n - 1`
/// independent vectors among the point differences and the directions, so
/// enumerating those choices and keeping the valid supporting hyperplanes
/// gives all facets.
fn hull_facets(points: &[Vec<i64>], directions: &[Vec<i64>], n: usize) -> Vec<Facet> {
    let mut found: BTreeSet<Facet> = BTreeSet::new();
    if n == 1 {
        let min = points.iter().map(|p| p[0]).min().expect("nonempty");
        found.insert(Facet { normal: vec![1], offset: min });
        if directions.is_empty() {
            let max = points.iter().map(|p| p[0]).max().expect("nonempty");
            found.insert(Facet { normal: vec![-1], offset: -max });
        }
        return found.into_iter().collect();
    }
    for (k, v0) in points.iter().enumerate() {
        let mut gens: Vec<Vec<i64>> = points
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != k)
            .map(|(_, p)| p.iter().zip(v0).map(|(a, b)| a - b).collect())
            .collect();
        gens.extend(directions.iter().cloned());
        for combo in combinations(gens.len(), n - 1) {
            let rows: Vec<Vec<i64>> = combo.iter().map(|&i| gens[i].clone()).collect();
            let m = linalg::from_i64_rows(&rows);
            let ns = linalg::nullspace(&m, n);
            if ns.len() != 1 {
                continue;
            }
            let l = primitive_from_q(&ns[0]);
            for sign in [1i64, -1] {
                let l: Vec<i64> = l.iter().map(|x| x * sign).collect();
                if directions.iter().any(|d| dot_i64(&l, d) < 0) {
                    continue;
                }
                let s = dot_i64(&l, v0);
                if points.iter().any(|p| dot_i64(&l, p) < s) {
                    continue;
                }
                let facet = Facet { normal: l, offset: s };
                if found.contains(&facet) {
                    continue;
                }
                if face_dimension(points, directions, &facet) == n - 1 {
                    found.insert(facet);
                }
            }
        }
    }
    found.into_iter().collect()
}

fn face_dimension(points: &[Vec<i64>], directions: &[Vec<i64>], facet: &Facet) -> usize {
    let tight: Vec<&Vec<i64>> = points.iter().filter(|p| facet.eval(p) == facet.offset).collect();
    let mut rows: Vec<Vec<i64>> = tight
        .iter()
        .skip(1)
        .map(|p| p.iter().zip(tight[0].iter()).map(|(a, b)| a - b).collect())
        .collect();
    rows.extend(directions.iter().filter(|d| dot_i64(&facet.normal, d) == 0).cloned());
    if rows.is_empty() {
        0
    } else {
        rank_i64(&rows)
    }
}

/// All `k`-subsets of `0..n` in lexicographic order.
pub fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.clone());
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if idx[i] != i + n - k {
                break;
            }
            if i == 0 {
                return out;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

fn unit_directions(n: usize) -> Vec<Vec<i64>> {
    (0..n).map(|i| Exponent::unit(n, i).0).collect()
}

/// A face of a polyhedron, described by the vertices it contains and the
/// coordinate directions it recedes along.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FaceDescriptor {
    pub vertex_subset: Vec<usize>,
    pub directions: Vec<usize>,
    pub facets: Vec<usize>,
    pub dim: usize,
    pub compact: bool,
    pub in_coordinate_hyperplane: bool,
    /// `a` with face = `{x in Δ : a(x) = s_Δ(a)}`.
    pub normal_certificate: Vec<i64>,
}

impl FaceDescriptor {
    /// Codimension datum `r = n - 1 - dim`.
    pub fn r(&self, n: usize) -> usize {
        n - 1 - self.dim
    }
}

/// Newton order: `sup { a : supp(g) ⊆ aΔ }`, infinite for `g = 0`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum NewtonOrder {
    Finite(Q),
    Infinite,
}

impl NewtonOrder {
    pub fn finite(&self) -> Option<&Q> {
        match self {
            NewtonOrder::Finite(x) => Some(x),
            NewtonOrder::Infinite => None,
        }
    }
}

impl PartialOrd for NewtonOrder {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for NewtonOrder {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (NewtonOrder::Finite(a), NewtonOrder::Finite(b)) => a.cmp(b),
            (NewtonOrder::Finite(_), NewtonOrder::Infinite) => Ordering::Less,
            (NewtonOrder::Infinite, NewtonOrder::Finite(_)) => Ordering::Greater,
            (NewtonOrder::Infinite, NewtonOrder::Infinite) => Ordering::Equal,
        }
    }
}

impl fmt::Display for NewtonOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NewtonOrder::Finite(x) => write!(f, "{}", crate::arith::fmt_q(x)),
            NewtonOrder::Infinite => write!(f, "inf"),
        }
    }
}

impl Serialize for NewtonOrder {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for NewtonOrder {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        if s == "inf" {
            Ok(NewtonOrder::Infinite)
        } else {
            crate::arith::parse_q(&s)
                .map(NewtonOrder::Finite)
                .map_err(serde::de::Error::custom)
        }
    }
}

/// `Γ₊(f)`: the convex hull of `supp(f) + ℝ₊ⁿ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NewtonPolyhedron {
    nvars: usize,
    vertices: Vec<Exponent>,
    facets: Vec<Facet>,
}

impl NewtonPolyhedron {
    pub fn of(f: &SparsePoly) -> Result<Self> {
        if f.is_zero() {
            return Err(Error::EmptySupport);
        }
        let pts: Vec<Exponent> = f.support().cloned().collect();
        Self::from_points(f.nvars(), &pts)
    }

    pub fn from_points(nvars: usize, pts: &[Exponent]) -> Result<Self> {
        if pts.is_empty() {
            return Err(Error::EmptySupport);
        }
        let minimal: Vec<Vec<i64>> = pts
            .iter()
            .filter(|p| !pts.iter().any(|q| q != *p && q.divides(p)))
            .map(|p| p.0.clone())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let facets = hull_facets(&minimal, &unit_directions(nvars), nvars);
        let vertices: Vec<Exponent> = minimal
            .iter()
            .filter(|p| {
                let tight: Vec<Vec<i64>> = facets
                    .iter()
                    .filter(|f| f.eval(p) == f.offset)
                    .map(|f| f.normal.clone())
                    .collect();
                !tight.is_empty() && rank_i64(&tight) == nvars
            })
            .map(|p| Exponent(p.clone()))
            .collect();
        Ok(NewtonPolyhedron { nvars, vertices, facets })
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn vertices(&self) -> &[Exponent] {
        &self.vertices
    }

    pub fn facets(&self) -> &[Facet] {
        &self.facets
    }

    pub fn compact_facet_flags(&self) -> Vec<bool> {
        self.facets.iter().map(Facet::is_compact).collect()
    }

    /// `s_Δ(a) = min a(Δ)` for a covector with nonnegative entries.
    pub fn support_function(&self, a: &[i64]) -> Result<i64> {
        if a.iter().any(|&x| x < 0) {
            return Err(Error::UnboundedBelow);
        }
        Ok(self.support_min(a))
    }

    fn support_min(&self, a: &[i64]) -> i64 {
        self.vertices.iter().map(|v| dot_i64(a, v)).min().expect("nonempty polyhedron")
    }

    /// Rational-covector variant of the support function.
    pub fn support_function_q(&self, a: &[Q]) -> Result<Q> {
        if a.iter().any(|x| x < &Q::zero()) {
            return Err(Error::UnboundedBelow);
        }
        Ok(self
            .vertices
            .iter()
            .map(|v| crate::arith::dot_q_i64(a, v))
            .min()
            .expect("nonempty polyhedron"))
    }

    pub fn contains(&self, m: &[i64]) -> bool {
        self.facets.iter().all(|f| f.eval(m) >= f.offset)
    }

    /// `m ∈ tΔ` (with `0Δ = ℝ₊ⁿ`).
    pub fn dilate_contains(&self, m: &[i64], t: &Q) -> bool {
        m.iter().all(|&x| x >= 0) && self.facets.iter().all(|f| q(f.eval(m)) >= t * q(f.offset))
    }

    /// `m` in the interior of `tΔ`.
    pub fn dilate_interior_contains(&self, m: &[i64], t: &Q) -> bool {
        self.facets.iter().all(|f| q(f.eval(m)) > t * q(f.offset))
    }

    /// Axis condition: `Δ` meets every coordinate axis, i.e. `ℝ₊ⁿ \ Δ` is bounded.
    pub fn check_axis_condition(&self) -> Result<()> {
        for i in 0..self.nvars {
            let on_axis = self
                .vertices
                .iter()
                .any(|v| v.iter().enumerate().all(|(j, &x)| j == i || x == 0));
            if !on_axis {
                return Err(Error::AxisCondition(i + 1));
            }
        }
        Ok(())
    }

    fn face_from_parts(&self, verts: BTreeSet<usize>, dirs: BTreeSet<usize>) -> FaceDescriptor {
        let n = self.nvars;
        let facets: Vec<usize> = (0..self.facets.len())
            .filter(|&j| {
                let f = &self.facets[j];
                verts.iter().all(|&v| f.eval(&self.vertices[v]) == f.offset)
                    && dirs.iter().all(|&i| f.normal[i] == 0)
            })
            .collect();
        let vlist: Vec<usize> = verts.into_iter().collect();
        let dlist: Vec<usize> = dirs.into_iter().collect();
        let base = &self.vertices[vlist[0]];
        let mut rows: Vec<Vec<i64>> = vlist[1..]
            .iter()
            .map(|&v| self.vertices[v].sub(base).0)
            .collect();
        rows.extend(dlist.iter().map(|&i| Exponent::unit(n, i).0));
        let dim = if rows.is_empty() { 0 } else { rank_i64(&rows) };
        let mut cert = vec![0i64; n];
        for &j in &facets {
            for (c, x) in cert.iter_mut().zip(&self.facets[j].normal) {
                *c += x;
            }
        }
        let in_coordinate_hyperplane = (0..n)
            .any(|i| !dlist.contains(&i) && vlist.iter().all(|&v| self.vertices[v][i] == 0));
        FaceDescriptor {
            compact: dlist.is_empty(),
            vertex_subset: vlist,
            directions: dlist,
            facets,
            dim,
            in_coordinate_hyperplane,
            normal_certificate: cert,
        }
    }

    /// All nonempty faces, including `Δ` itself.
    pub fn faces(&self) -> Vec<FaceDescriptor> {
        let n = self.nvars;
        let top = self.face_from_parts((0..self.vertices.len()).collect(), (0..n).collect());
        let mut seen: BTreeMap<(Vec<usize>, Vec<usize>), FaceDescriptor> = BTreeMap::new();
        let mut queue = VecDeque::from([top]);
        while let Some(face) = queue.pop_front() {
            let key = (face.vertex_subset.clone(), face.directions.clone());
            if seen.contains_key(&key) {
                continue;
            }
            for (j, f) in self.facets.iter().enumerate() {
                if face.facets.contains(&j) {
                    continue;
                }
                let verts: BTreeSet<usize> = face
                    .vertex_subset
                    .iter()
                    .copied()
                    .filter(|&v| f.eval(&self.vertices[v]) == f.offset)
                    .collect();
                if verts.is_empty() {
                    continue;
                }
                let dirs: BTreeSet<usize> =
                    face.directions.iter().copied().filter(|&i| f.normal[i] == 0).collect();
                queue.push_back(self.face_from_parts(verts, dirs));
            }
            seen.insert(key, face);
        }
        let mut faces: Vec<FaceDescriptor> = seen.into_values().collect();
        faces.sort_by(|a, b| {
            a.dim
                .cmp(&b.dim)
                .then_with(|| a.vertex_subset.cmp(&b.vertex_subset))
                .then_with(|| a.directions.cmp(&b.directions))
        });
        faces
    }

    /// Compact faces not contained in a coordinate hyperplane.
    pub fn interior_compact_faces(&self) -> Vec<FaceDescriptor> {
        self.faces()
            .into_iter()
            .filter(|f| f.compact && !f.in_coordinate_hyperplane)
            .collect()
    }

    pub fn on_face(&self, face: &FaceDescriptor, m: &[i64]) -> bool {
        self.contains(m) && face.facets.iter().all(|&j| self.facets[j].eval(m) == self.facets[j].offset)
    }

    /// `m` in the relative interior of `t·δ`.
    pub fn in_dilated_face_interior(&self, face: &FaceDescriptor, m: &[i64], t: &Q) -> bool {
        self.facets.iter().enumerate().all(|(j, f)| {
            let lhs = q(f.eval(m));
            let rhs = t * q(f.offset);
            if face.facets.contains(&j) {
                lhs == rhs
            } else {
                lhs > rhs
            }
        }) && face.directions.is_empty()
    }

    /// `g_δ`: the terms of `g` whose exponents lie on the face.
    pub fn face_part(&self, g: &SparsePoly, face: &FaceDescriptor) -> SparsePoly {
        g.filter(|e| self.on_face(face, e))
    }

    /// Newton order of a single lattice point.
    pub fn nu_point(&self, m: &[i64]) -> NewtonOrder {
        self.facets
            .iter()
            .filter(|f| f.offset > 0)
            .map(|f| qr(f.eval(m), f.offset))
            .min()
            .map_or(NewtonOrder::Infinite, NewtonOrder::Finite)
    }

    /// `ν(g) = min_{m ∈ supp g} min_{l(x) ≥ s, s > 0} l(m)/s`.
    pub fn nu(&self, g: &SparsePoly) -> NewtonOrder {
        g.support().map(|m| self.nu_point(m)).min().unwrap_or(NewtonOrder::Infinite)
    }

    pub fn to_json(&self) -> PolyhedronJson {
        PolyhedronJson {
            vertices: self.vertices.iter().map(|v| v.0.clone()).collect(),
            facets: self
                .facets
                .iter()
                .map(|f| FacetJson { l: f.normal.clone(), s: f.offset })
                .collect(),
        }
    }

    /// Rebuilds from JSON and checks the stored data against the hull of the vertices.
    pub fn from_json(j: &PolyhedronJson) -> Result<Self> {
        let n = j
            .vertices
            .first()
            .map(Vec::len)
            .ok_or(Error::EmptySupport)?;
        let pts: Vec<Exponent> = j.vertices.iter().map(|v| Exponent(v.clone())).collect();
        if pts.iter().any(|p| p.len() != n) {
            return Err(Error::Dimension("vertices of different lengths".into()));
        }
        let p = Self::from_points(n, &pts)?;
        let given: BTreeSet<Facet> = j
            .facets
            .iter()
            .map(|f| Facet { normal: f.l.clone(), offset: f.s })
            .collect();
        if !given.is_empty() && given != p.facets.iter().cloned().collect() {
            return Err(Error::Parse("facets do not match the vertex hull".into()));
        }
        Ok(p)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FacetJson {
    pub l: Vec<i64>,
    pub s: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolyhedronJson {
    pub vertices: Vec<Vec<i64>>,
    pub facets: Vec<FacetJson>,
}

impl Serialize for NewtonPolyhedron {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

/// A full-dimensional lattice polytope.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Polytope {
    nvars: usize,
    vertices: Vec<Vec<i64>>,
    facets: Vec<Facet>,
}

impl Polytope {
    pub fn from_points(points: &[Vec<i64>]) -> Result<Self> {
        let n = points.first().map(Vec::len).ok_or(Error::NotFullDimensional)?;
        if points.iter().any(|p| p.len() != n) {
            return Err(Error::Dimension("points of different lengths".into()));
        }
        let pts: Vec<Vec<i64>> = points.iter().cloned().collect::<BTreeSet<_>>().into_iter().collect();
        let diffs: Vec<Vec<i64>> = pts[1..]
            .iter()
            .map(|p| p.iter().zip(&pts[0]).map(|(a, b)| a - b).collect())
            .collect();
        if diffs.is_empty() || rank_i64(&diffs) < n {
            return Err(Error::NotFullDimensional);
        }
        let facets = hull_facets(&pts, &[], n);
        let vertices: Vec<Vec<i64>> = pts
            .into_iter()
            .filter(|p| {
                let tight: Vec<Vec<i64>> = facets
                    .iter()
                    .filter(|f| f.eval(p) == f.offset)
                    .map(|f| f.normal.clone())
                    .collect();
                !tight.is_empty() && rank_i64(&tight) == n
            })
            .collect();
        Ok(Polytope { nvars: n, vertices, facets })
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn vertices(&self) -> &[Vec<i64>] {
        &self.vertices
    }

    pub fn facets(&self) -> &[Facet] {
        &self.facets
    }

    pub fn dilate_contains(&self, m: &[i64], t: i64, interior: bool) -> bool {
        self.facets.iter().all(|f| {
            let (lhs, rhs) = (f.eval(m), t * f.offset);
            if interior {
                lhs > rhs
            } else {
                lhs >= rhs
            }
        })
    }

    /// Lattice points of `tP` (or of its interior), in lexicographic order.
    pub fn lattice_points(&self, t: i64, interior: bool) -> Vec<Vec<i64>> {
        let n = self.nvars;
        let lo: Vec<i64> = (0..n).map(|i| self.vertices.iter().map(|v| v[i] * t).min().unwrap()).collect();
        let hi: Vec<i64> = (0..n).map(|i| self.vertices.iter().map(|v| v[i] * t).max().unwrap()).collect();
        box_points(&lo, &hi)
            .into_iter()
            .filter(|m| self.dilate_contains(m, t, interior))
            .collect()
    }

    /// Vertex-index sets of all faces, with dimensions.
    fn faces(&self) -> Vec<(BTreeSet<usize>, usize)> {
        let all: BTreeSet<usize> = (0..self.vertices.len()).collect();
        let mut seen: BTreeSet<BTreeSet<usize>> = BTreeSet::new();
        let mut queue = VecDeque::from([all]);
        while let Some(face) = queue.pop_front() {
            if !seen.insert(face.clone()) {
                continue;
            }
            for f in &self.facets {
                let sub: BTreeSet<usize> = face
                    .iter()
                    .copied()
                    .filter(|&v| f.eval(&self.vertices[v]) == f.offset)
                    .collect();
                if !sub.is_empty() && sub != face {
                    queue.push_back(sub);
                }
            }
        }
        seen.into_iter()
            .map(|vs| {
                let dim = self.affine_dim(&vs);
                (vs, dim)
            })
            .collect()
    }

    fn affine_dim(&self, vs: &BTreeSet<usize>) -> usize {
        let list: Vec<usize> = vs.iter().copied().collect();
        let rows: Vec<Vec<i64>> = list[1..]
            .iter()
            .map(|&v| self.vertices[v].iter().zip(&self.vertices[list[0]]).map(|(a, b)| a - b).collect())
            .collect();
        if rows.is_empty() {
            0
        } else {
            rank_i64(&rows)
        }
    }

    /// Pulling triangulation: simplices as vertex-index lists.
    pub fn triangulation(&self) -> Vec<Vec<usize>> {
        let faces = self.faces();
        let full: BTreeSet<usize> = (0..self.vertices.len()).collect();
        let mut memo: BTreeMap<BTreeSet<usize>, Vec<Vec<usize>>> = BTreeMap::new();
        pull(&full, self.nvars, &faces, &mut memo)
    }

    /// `n!·Vol(P)` from the triangulation.
    pub fn normalized_volume(&self) -> i64 {
        self.triangulation()
            .iter()
            .map(|s| {
                let rows: Vec<Vec<i64>> = s[1..]
                    .iter()
                    .map(|&v| self.vertices[v].iter().zip(&self.vertices[s[0]]).map(|(a, b)| a - b).collect())
                    .collect();
                det_i64(&rows).abs()
            })
            .sum()
    }

    /// `n!·Vol(P)` as the `n`-th finite difference of the lattice-point
    /// counts `#(tP ∩ ℤⁿ)`, `t = 0..n` (the Ehrhart leading coefficient).
    pub fn normalized_volume_by_counting(&self) -> i64 {
        let n = self.nvars as i64;
        let mut total = 0i64;
        let mut binom = 1i64;
        for k in 0..=n {
            let count = self.lattice_points(k, false).len() as i64;
            let sign = if (n - k) % 2 == 0 { 1 } else { -1 };
            total += sign * binom * count;
            binom = binom * (n - k) / (k + 1);
        }
        total
    }
}

fn pull(
    face: &BTreeSet<usize>,
    dim: usize,
    faces: &[(BTreeSet<usize>, usize)],
    memo: &mut BTreeMap<BTreeSet<usize>, Vec<Vec<usize>>>,
) -> Vec<Vec<usize>> {
    if let Some(t) = memo.get(face) {
        return t.clone();
    }
    let out = if dim == 0 {
        vec![face.iter().copied().collect()]
    } else {
        let apex = *face.iter().next().expect("nonempty face");
        let mut out = Vec::new();
        for (sub, d) in faces {
            if *d + 1 == dim && sub.is_subset(face) && !sub.contains(&apex) {
                for mut s in pull(sub, *d, faces, memo) {
                    s.insert(0, apex);
                    out.push(s);
                }
            }
        }
        out
    };
    memo.insert(face.clone(), out.clone());
    out
}

/// All integer points of the box `[lo, hi]`.
pub fn box_points(lo: &[i64], hi: &[i64]) -> Vec<Vec<i64>> {
    let mut out = vec![Vec::with_capacity(lo.len())];
    for (&a, &b) in lo.iter().zip(hi) {
        let mut next = Vec::new();
        for p in &out {
            for x in a..=b {
                let mut p = p.clone();
                p.push(x);
                next.push(p);
            }
        }
        out = next;
    }
    out
}

/// Lattice points `Σ a_i r_i` with every `0 <= a_i < 1`, for linearly
/// independent rows `r_i`, together with their coefficients `a`.
pub fn parallelepiped_points(rows: &[Vec<i64>]) -> Vec<(Vec<i64>, Vec<Q>)> {
    let Some(n) = rows.first().map(Vec::len) else {
        return vec![(Vec::new(), Vec::new())];
    };
    if rows.len() == n {
        return parallelepiped_points_square(rows);
    }
    let lo: Vec<i64> = (0..n).map(|c| rows.iter().map(|r| r[c].min(0)).sum()).collect();
    let hi: Vec<i64> = (0..n).map(|c| rows.iter().map(|r| r[c].max(0)).sum()).collect();
    let g = linalg::transpose(&linalg::from_i64_rows(rows), n);
    let one = q(1);
    box_points(&lo, &hi)
        .into_iter()
        .filter_map(|p| {
            let a = linalg::solve(&g, &crate::arith::to_q_vec(&p), rows.len())?;
            a.iter().all(|x| !x.is_negative() && x < &one).then_some((p, a))
        })
        .collect()
}

/// Full-rank case: the points are the classes of `ℤⁿ / ℤ⟨rows⟩`, generated
/// from the unit vectors by closing the fractional coordinates under addition.
fn parallelepiped_points_square(rows: &[Vec<i64>]) -> Vec<(Vec<i64>, Vec<Q>)> {
    let n = rows.len();
    let g = linalg::transpose(&linalg::from_i64_rows(rows), n);
    let frac = |v: Vec<Q>| -> Vec<Q> { v.into_iter().map(|x| &x - x.floor()).collect() };
    let gens: Vec<Vec<Q>> = (0..n)
        .map(|j| {
            let e: Vec<Q> = (0..n).map(|i| q((i == j) as i64)).collect();
            frac(linalg::solve(&g, &e, n).expect("independent rows"))
        })
        .collect();
    let mut seen: BTreeSet<Vec<Q>> = BTreeSet::new();
    let zero = vec![Q::zero(); n];
    seen.insert(zero.clone());
    let mut queue = vec![zero];
    while let Some(a) = queue.pop() {
        for e in &gens {
            let b = frac(a.iter().zip(e).map(|(x, y)| x + y).collect());
            if seen.insert(b.clone()) {
                queue.push(b);
            }
        }
    }
    let mut out: Vec<(Vec<i64>, Vec<Q>)> = seen
        .into_iter()
        .map(|a| {
            let p: Vec<i64> = (0..n)
                .map(|c| {
                    let x: Q = a.iter().zip(rows).map(|(ai, r)| ai * q(r[c])).sum();
                    x.to_integer().try_into().expect("small lattice point")
                })
                .collect();
            (p, a)
        })
        .collect();
    out.sort();
    out
}

/// `n!·Vol(conv(points))` for points spanning dimension `n`.
pub fn normalized_volume(points: &[Vec<i64>]) -> Result<i64> {
    Ok(Polytope::from_points(points)?.normalized_volume())
}
