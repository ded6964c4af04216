//! Rational polyhedral cones and fans in `ℝ₊ⁿ`: dual cones, face lattices,
//! the dual fan `Σ_Δ` of a Newton polyhedron, regular subdivisions, ray
//! multiplicities and the pole-component predicate.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{dot_i64, ext_gcd, is_primitive, primitive, primitive_from_q, q, qr, Q};
use crate::error::{Error, Result};
use crate::linalg::{self, det_i64, rank_i64};
use crate::poly::{Exponent, SparsePoly};
use crate::polylattice::{combinations, FaceDescriptor, NewtonOrder, NewtonPolyhedron};

const REGULARIZATION_CAP: usize = 10_000;

/// A cone `cone(rays) + span(lineality)`, also stored as
/// `{a : x(a) >= 0 for facet normals x, e(a) = 0 for equations e}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cone {
    pub nvars: usize,
    pub rays: Vec<Vec<i64>>,
    pub lineality: Vec<Vec<i64>>,
    pub facet_normals: Vec<Vec<i64>>,
    pub equations: Vec<Vec<i64>>,
    pub dim: usize,
}

fn independent_subset(rows: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let mut out: Vec<Vec<i64>> = Vec::new();
    for r in rows {
        let mut trial = out.clone();
        trial.push(r.clone());
        if rank_i64(&trial) == trial.len() {
            out = trial;
        }
    }
    out
}

fn rank_or_zero(rows: &[Vec<i64>]) -> usize {
    if rows.is_empty() {
        0
    } else {
        rank_i64(rows)
    }
}

impl Cone {
    /// The pointed cone generated by `gens`.
    pub fn new(nvars: usize, gens: &[Vec<i64>]) -> Cone {
        Cone::with_lineality(nvars, gens, &[])
    }

    pub fn with_lineality(nvars: usize, gens: &[Vec<i64>], lin: &[Vec<i64>]) -> Cone {
        let gens: Vec<Vec<i64>> = gens.iter().filter(|g| g.iter().any(|&x| x != 0)).cloned().collect();
        let lin = independent_subset(lin);
        let mut all = gens.clone();
        all.extend(lin.iter().cloned());
        let dim = rank_or_zero(&all);
        let equations: Vec<Vec<i64>> = if all.is_empty() {
            (0..nvars).map(|i| Exponent::unit(nvars, i).0).collect()
        } else {
            linalg::nullspace(&linalg::from_i64_rows(&all), nvars)
                .iter()
                .map(|v| primitive_from_q(v))
                .collect()
        };
        let basis = independent_subset(&all);
        let l = lin.len();
        let mut facets: BTreeSet<Vec<i64>> = BTreeSet::new();
        if dim > l {
            let bq = linalg::from_i64_rows(&basis);
            for combo in combinations(gens.len(), dim - 1 - l) {
                let mut tight: Vec<Vec<i64>> = combo.iter().map(|&i| gens[i].clone()).collect();
                tight.extend(lin.iter().cloned());
                // x = Bᵀy with y in the kernel of (tight · Bᵀ)
                let m: linalg::Matrix = tight
                    .iter()
                    .map(|t| bq.iter().map(|b| crate::arith::dot_q_i64(b, t)).collect())
                    .collect();
                let ns = if m.is_empty() {
                    if dim == 1 {
                        vec![vec![q(1)]]
                    } else {
                        continue;
                    }
                } else {
                    linalg::nullspace(&m, dim)
                };
                if ns.len() != 1 {
                    continue;
                }
                let x: Vec<Q> = (0..nvars)
                    .map(|c| bq.iter().zip(&ns[0]).fold(Q::zero(), |acc, (b, y)| acc + &b[c] * y))
                    .collect();
                let x = primitive_from_q(&x);
                for sign in [1i64, -1] {
                    let x: Vec<i64> = x.iter().map(|v| v * sign).collect();
                    if gens.iter().any(|g| dot_i64(&x, g) < 0) || facets.contains(&x) {
                        continue;
                    }
                    let mut t: Vec<Vec<i64>> = gens.iter().filter(|g| dot_i64(&x, g) == 0).cloned().collect();
                    t.extend(lin.iter().cloned());
                    if rank_or_zero(&t) == dim - 1 {
                        facets.insert(x);
                    }
                }
            }
        }
        let facet_normals: Vec<Vec<i64>> = facets.into_iter().collect();
        let mut rays: BTreeSet<Vec<i64>> = BTreeSet::new();
        for g in &gens {
            let mut probe = lin.clone();
            probe.push(g.clone());
            if rank_or_zero(&probe) == l {
                continue;
            }
            let tight: Vec<Vec<i64>> = facet_normals.iter().filter(|x| dot_i64(x, g) == 0).cloned().collect();
            if rank_or_zero(&tight) == dim - l - 1 {
                rays.insert(canonical_mod(g, &lin));
            }
        }
        Cone {
            nvars,
            rays: rays.into_iter().collect(),
            lineality: lin,
            facet_normals,
            equations,
            dim,
        }
    }

    pub fn zero(nvars: usize) -> Cone {
        Cone::new(nvars, &[])
    }

    pub fn orthant(nvars: usize) -> Cone {
        let units: Vec<Vec<i64>> = (0..nvars).map(|i| Exponent::unit(nvars, i).0).collect();
        Cone::new(nvars, &units)
    }

    pub fn contains(&self, a: &[i64]) -> bool {
        self.facet_normals.iter().all(|x| dot_i64(x, a) >= 0)
            && self.equations.iter().all(|e| dot_i64(e, a) == 0)
    }

    pub fn contains_q(&self, a: &[Q]) -> bool {
        self.facet_normals
            .iter()
            .all(|x| crate::arith::dot_q_i64(a, x) >= Q::zero())
            && self.equations.iter().all(|e| crate::arith::dot_q_i64(a, e).is_zero())
    }

    pub fn is_simplicial(&self) -> bool {
        self.lineality.is_empty() && self.rays.len() == self.dim
    }

    /// `σ̌ = {x : x(a) >= 0 for all a in σ}`.
    pub fn dual(&self) -> Cone {
        Cone::with_lineality(self.nvars, &self.facet_normals, &self.equations)
    }

    /// Faces as subsets of ray indices (the lineality space is in every face).
    pub fn faces(&self) -> Vec<BTreeSet<usize>> {
        let full: BTreeSet<usize> = (0..self.rays.len()).collect();
        let mut seen: BTreeSet<BTreeSet<usize>> = BTreeSet::new();
        let mut queue = VecDeque::from([full]);
        while let Some(face) = queue.pop_front() {
            if !seen.insert(face.clone()) {
                continue;
            }
            for x in &self.facet_normals {
                let sub: BTreeSet<usize> =
                    face.iter().copied().filter(|&i| dot_i64(x, &self.rays[i]) == 0).collect();
                if sub != face {
                    queue.push_back(sub);
                }
            }
        }
        seen.into_iter().collect()
    }

    pub fn face_dim(&self, face: &BTreeSet<usize>) -> usize {
        let mut rows: Vec<Vec<i64>> = face.iter().map(|&i| self.rays[i].clone()).collect();
        rows.extend(self.lineality.iter().cloned());
        rank_or_zero(&rows)
    }

    /// Checks that `τ ↦ τ^⊥ ∩ σ̌` is a dimension-reversing bijection between
    /// the faces of the cone and the faces of its dual.
    pub fn face_bijection_check(&self) -> FaceBijectionReport {
        let dual = self.dual();
        let faces = self.faces();
        let dual_faces = dual.faces();
        let n = self.nvars;
        let mut pairs = Vec::new();
        let mut images: BTreeSet<BTreeSet<usize>> = BTreeSet::new();
        let mut ok = true;
        for f in &faces {
            let gens: Vec<&Vec<i64>> = f.iter().map(|&i| &self.rays[i]).chain(self.lineality.iter()).collect();
            let image: BTreeSet<usize> = (0..dual.rays.len())
                .filter(|&j| gens.iter().all(|g| dot_i64(&dual.rays[j], g) == 0))
                .collect();
            let (d, dd) = (self.face_dim(f), dual.face_dim(&image));
            if !dual_faces.contains(&image) || d + dd != n {
                ok = false;
            }
            // τ^⊥ ∩ σ̌ mapped back must return τ
            let back_gens: Vec<&Vec<i64>> =
                image.iter().map(|&j| &dual.rays[j]).chain(dual.lineality.iter()).collect();
            let back: BTreeSet<usize> = (0..self.rays.len())
                .filter(|&i| back_gens.iter().all(|g| dot_i64(g, &self.rays[i]) == 0))
                .collect();
            if &back != f {
                ok = false;
            }
            images.insert(image);
            pairs.push((d, dd));
        }
        ok &= images.len() == faces.len() && faces.len() == dual_faces.len();
        FaceBijectionReport { faces: faces.len(), dual_faces: dual_faces.len(), dimension_pairs: pairs, ok }
    }
}

fn canonical_mod(g: &[i64], lin: &[Vec<i64>]) -> Vec<i64> {
    if lin.is_empty() {
        return primitive(g);
    }
    // orthogonal projection onto lin^⊥
    let lq = linalg::from_i64_rows(lin);
    let gram: linalg::Matrix = lin
        .iter()
        .map(|a| lin.iter().map(|b| q(dot_i64(a, b))).collect())
        .collect();
    let rhs: Vec<Q> = lin.iter().map(|a| q(dot_i64(a, g))).collect();
    let coef = linalg::solve_unique(&gram, &rhs).expect("independent lineality basis");
    let proj: Vec<Q> = (0..g.len())
        .map(|c| lq.iter().zip(&coef).fold(q(g[c]), |acc, (row, y)| acc - &row[c] * y))
        .collect();
    primitive_from_q(&proj)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FaceBijectionReport {
    pub faces: usize,
    pub dual_faces: usize,
    pub dimension_pairs: Vec<(usize, usize)>,
    pub ok: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
struct FanJson {
    rays: Vec<Vec<i64>>,
    cones: Vec<Vec<usize>>,
}

/// A fan with support `ℝ₊ⁿ`, stored as primitive rays and maximal cones
/// given by ray indices.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "FanJson")]
pub struct Fan {
    rays: Vec<Vec<i64>>,
    cones: Vec<Vec<usize>>,
}

impl TryFrom<FanJson> for Fan {
    type Error = Error;
    fn try_from(j: FanJson) -> Result<Fan> {
        Fan::new(j.rays, j.cones)
    }
}

impl Fan {
    pub fn new(rays: Vec<Vec<i64>>, cones: Vec<Vec<usize>>) -> Result<Fan> {
        let n = rays.first().map(Vec::len).ok_or_else(|| Error::Parse("fan without rays".into()))?;
        for r in &rays {
            if r.len() != n {
                return Err(Error::Dimension("rays of different lengths".into()));
            }
            if r.iter().any(|&x| x < 0) || !is_primitive(r) {
                return Err(Error::Parse(format!("ray {r:?} is not a primitive vector in ℝ₊ⁿ")));
            }
        }
        if rays.iter().collect::<BTreeSet<_>>().len() != rays.len() {
            return Err(Error::Parse("duplicate rays".into()));
        }
        let mut cs = Vec::new();
        for c in cones {
            if c.iter().any(|&i| i >= rays.len()) {
                return Err(Error::Parse("cone refers to a missing ray".into()));
            }
            let set: BTreeSet<usize> = c.into_iter().collect();
            cs.push(set.into_iter().collect());
        }
        Ok(Fan { rays, cones: cs }.canonical())
    }

    /// `Σ₀`: the orthant and its faces.
    pub fn standard(n: usize) -> Fan {
        let rays = (0..n).map(|i| Exponent::unit(n, i).0).collect();
        Fan { rays, cones: vec![(0..n).collect()] }.canonical()
    }

    /// Sorts rays lexicographically and cones by their sorted ray lists.
    fn canonical(self) -> Fan {
        let mut order: Vec<usize> = (0..self.rays.len()).collect();
        order.sort_by(|&a, &b| self.rays[a].cmp(&self.rays[b]));
        let mut remap = vec![0; self.rays.len()];
        for (new, &old) in order.iter().enumerate() {
            remap[old] = new;
        }
        let rays = order.iter().map(|&i| self.rays[i].clone()).collect();
        let mut cones: Vec<Vec<usize>> = self
            .cones
            .iter()
            .map(|c| {
                let mut c: Vec<usize> = c.iter().map(|&i| remap[i]).collect();
                c.sort_unstable();
                c
            })
            .collect();
        cones.sort();
        cones.dedup();
        Fan { rays, cones }
    }

    pub fn nvars(&self) -> usize {
        self.rays[0].len()
    }

    pub fn rays(&self) -> &[Vec<i64>] {
        &self.rays
    }

    /// Maximal cones as ray-index lists.
    pub fn cones(&self) -> &[Vec<usize>] {
        &self.cones
    }

    pub fn cone(&self, idx: &[usize]) -> Cone {
        let gens: Vec<Vec<i64>> = idx.iter().map(|&i| self.rays[i].clone()).collect();
        Cone::new(self.nvars(), &gens)
    }

    pub fn ray_index(&self, r: &[i64]) -> Option<usize> {
        self.rays.iter().position(|x| x == r)
    }

    /// All cones of the fan (faces of maximal cones) as ray-index sets.
    pub fn all_cones(&self) -> BTreeSet<Vec<usize>> {
        let mut out = BTreeSet::new();
        for c in &self.cones {
            let cone = self.cone(c);
            for f in cone.faces() {
                let idx: Vec<usize> = f
                    .iter()
                    .map(|&k| self.ray_index(&cone.rays[k]).expect("ray of a fan cone"))
                    .collect::<BTreeSet<_>>()
                    .into_iter()
                    .collect();
                out.insert(idx);
            }
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({ "rays": self.rays, "cones": self.cones })
    }

    /// Regular: every maximal cone is simplicial with unimodular rays.
    pub fn is_regular(&self) -> Result<bool> {
        let n = self.nvars();
        for (k, c) in self.cones.iter().enumerate() {
            if c.len() != n {
                return Err(Error::NonSimplicial(k));
            }
            let rows: Vec<Vec<i64>> = c.iter().map(|&i| self.rays[i].clone()).collect();
            let d = det_i64(&rows);
            if d == 0 {
                return Err(Error::NonSimplicial(k));
            }
            if d.abs() != 1 {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Every cone of `self` lies inside some maximal cone of `coarse`.
    pub fn refines(&self, coarse: &Fan) -> bool {
        let big: Vec<Cone> = coarse.cones.iter().map(|c| coarse.cone(c)).collect();
        self.cones
            .iter()
            .all(|c| big.iter().any(|b| c.iter().all(|&i| b.contains(&self.rays[i]))))
    }

    pub fn has_coordinate_rays(&self) -> bool {
        let n = self.nvars();
        (0..n).all(|i| self.ray_index(&Exponent::unit(n, i).0).is_some())
    }

    /// Every proper face of the orthant is a cone of the fan.
    pub fn contains_orthant_boundary(&self) -> bool {
        let n = self.nvars();
        let all = self.all_cones();
        let Some(units) = (0..n)
            .map(|i| self.ray_index(&Exponent::unit(n, i).0))
            .collect::<Option<Vec<usize>>>()
        else {
            return false;
        };
        (0..n).all(|k| {
            combinations(n, k).iter().all(|s| {
                let mut idx: Vec<usize> = s.iter().map(|&i| units[i]).collect();
                idx.sort_unstable();
                all.contains(&idx)
            })
        })
    }

    /// Simplicial maximal cones refining each maximal cone by pulling rays in index order.
    fn triangulated_cones(&self) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        for c in &self.cones {
            out.extend(pull_cone(self, c));
        }
        out.sort();
        out
    }

    /// Checks that the maximal cones cover `ℝ₊ⁿ` exactly once: the normalized
    /// cross-section volumes sum to one and every interior wall is shared by
    /// exactly two cones on opposite sides.
    pub fn covers_orthant(&self) -> bool {
        let n = self.nvars();
        let simplices = self.triangulated_cones();
        let mut total = Q::zero();
        for s in &simplices {
            if s.len() != n {
                return false;
            }
            let rows: Vec<Vec<i64>> = s.iter().map(|&i| self.rays[i].clone()).collect();
            let d = det_i64(&rows).abs();
            if d == 0 {
                return false;
            }
            let norms: i64 = rows.iter().map(|r| r.iter().sum::<i64>()).product();
            total += qr(d, norms);
        }
        if total != q(1) {
            return false;
        }
        let mut walls: BTreeMap<Vec<usize>, Vec<i64>> = BTreeMap::new();
        for s in &simplices {
            for drop in 0..n {
                let wall: Vec<usize> = s.iter().enumerate().filter(|&(k, _)| k != drop).map(|(_, &i)| i).collect();
                let on_boundary = (0..n).any(|c| wall.iter().all(|&i| self.rays[i][c] == 0));
                if on_boundary {
                    continue;
                }
                let rows: Vec<Vec<i64>> = wall.iter().map(|&i| self.rays[i].clone()).collect();
                let normal = primitive_from_q(&linalg::nullspace(&linalg::from_i64_rows(&rows), n)[0]);
                let side = dot_i64(&normal, &self.rays[s[drop]]).signum();
                walls.entry(wall).or_default().push(side);
            }
        }
        walls.values().all(|sides| sides.len() == 2 && sides[0] == -sides[1])
    }
}

fn pull_cone(fan: &Fan, idx: &[usize]) -> Vec<Vec<usize>> {
    let cone = fan.cone(idx);
    if cone.rays.len() == cone.dim {
        let mut v: Vec<usize> = idx.to_vec();
        v.sort_unstable();
        return vec![v];
    }
    let apex = *idx.iter().min().expect("nonempty cone");
    let mut out = Vec::new();
    for x in &cone.facet_normals {
        let facet: Vec<usize> = idx.iter().copied().filter(|&i| dot_i64(x, &fan.rays[i]) == 0).collect();
        if facet.contains(&apex) {
            continue;
        }
        for mut s in pull_cone(fan, &facet) {
            s.push(apex);
            s.sort_unstable();
            out.push(s);
        }
    }
    out
}

/// `σ(δ)`: the cone of covectors whose minimum on `Δ` is attained on all of `δ`.
pub fn sigma_of_face(delta: &NewtonPolyhedron, face: &FaceDescriptor) -> Cone {
    let gens: Vec<Vec<i64>> = face.facets.iter().map(|&j| delta.facets()[j].normal.clone()).collect();
    Cone::new(delta.nvars(), &gens)
}

/// The coarsest fan on which `s_Δ` is linear: `Σ_Δ = {σ(δ)}`, with maximal
/// cones `σ(v)` for the vertices `v`.
pub fn sigma_delta_fan(delta: &NewtonPolyhedron) -> Result<Fan> {
    delta.check_axis_condition()?;
    let rays: Vec<Vec<i64>> = delta.facets().iter().map(|f| f.normal.clone()).collect();
    let cones: Vec<Vec<usize>> = delta
        .vertices()
        .iter()
        .map(|v| {
            (0..rays.len())
                .filter(|&j| delta.facets()[j].eval(v) == delta.facets()[j].offset)
                .collect()
        })
        .collect();
    Fan::new(rays, cones)
}

/// A regular refinement of `fan` that keeps all proper faces of the orthant.
pub fn regularize(fan: &Fan) -> Result<Fan> {
    let n = fan.nvars();
    let out = match n {
        1 => fan.clone(),
        2 => regularize_2d(fan)?,
        3 => regularize_3d(fan)?,
        _ => return Err(Error::RegularizationUnsupported(n)),
    };
    if !out.contains_orthant_boundary() {
        return Err(Error::Precondition("regularization lost a boundary cone of the orthant".into()));
    }
    Ok(out)
}

fn det2(a: &[i64], b: &[i64]) -> i64 {
    a[0] * b[1] - a[1] * b[0]
}

/// Hirzebruch–Jung chain between `u` and `v` (with `det(u, v) > 0`):
/// the rays strictly between them.
fn hj_chain(u: &[i64], v: &[i64]) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    let mut u = u.to_vec();
    loop {
        // det(u, p) = u0 p1 - u1 p0 = 1
        let (g, a, b) = ext_gcd(u[0], -u[1]);
        debug_assert_eq!(g, 1);
        let p0 = vec![b, a];
        let duv = det2(&u, v);
        let dp = det2(&p0, v);
        // det(p0 + t u, v) = dp + t duv >= 0, minimal t
        let t = (-dp).div_euclid(duv) + if (-dp).rem_euclid(duv) == 0 { 0 } else { 1 };
        let p: Vec<i64> = vec![p0[0] + t * u[0], p0[1] + t * u[1]];
        if p == v {
            return out;
        }
        out.push(p.clone());
        u = p;
    }
}

fn regularize_2d(fan: &Fan) -> Result<Fan> {
    let mut rays: Vec<Vec<i64>> = fan.rays.clone();
    let mut cones = Vec::new();
    for c in &fan.cones {
        if c.len() != 2 {
            return Err(Error::NonSimplicial(0));
        }
        let (mut a, mut b) = (c[0], c[1]);
        if det2(&rays[a], &rays[b]) < 0 {
            std::mem::swap(&mut a, &mut b);
        }
        let mut prev = a;
        for p in hj_chain(&fan.rays[a], &fan.rays[b]) {
            let idx = match rays.iter().position(|r| *r == p) {
                Some(i) => i,
                None => {
                    rays.push(p);
                    rays.len() - 1
                }
            };
            cones.push(vec![prev, idx]);
            prev = idx;
        }
        cones.push(vec![prev, b]);
    }
    Fan::new(rays, cones)
}

/// Shortest nonzero lattice point `Σ a_i r_i` with `0 <= a_i < 1` (ties broken
/// lexicographically), with its coordinates `a`.
fn parallelepiped_point(rows: &[Vec<i64>]) -> Option<(Vec<i64>, Vec<Q>)> {
    crate::polylattice::parallelepiped_points(rows)
        .into_iter()
        .filter(|(p, _)| p.iter().any(|&x| x != 0))
        .min_by(|(p, _), (r, _)| dot_i64(p, p).cmp(&dot_i64(r, r)).then_with(|| p.cmp(r)))
}

fn regularize_3d(fan: &Fan) -> Result<Fan> {
    let mut rays = fan.rays.clone();
    let mut cones: Vec<Vec<usize>> = fan.triangulated_cones();
    for iter in 0..REGULARIZATION_CAP {
        let bad = cones.iter().find(|c| {
            let rows: Vec<Vec<i64>> = c.iter().map(|&i| rays[i].clone()).collect();
            det_i64(&rows).abs() > 1
        });
        let Some(bad) = bad.cloned() else {
            return Fan::new(rays, cones);
        };
        let rows: Vec<Vec<i64>> = bad.iter().map(|&i| rays[i].clone()).collect();
        let (p, a) = parallelepiped_point(&rows).ok_or(Error::RegularizationCap {
            iterations: iter,
            rays: rays.len() - fan.rays.len(),
        })?;
        let tau: Vec<usize> = bad
            .iter()
            .zip(&a)
            .filter(|(_, x)| x.is_positive())
            .map(|(&i, _)| i)
            .collect();
        rays.push(p);
        let new = rays.len() - 1;
        let mut next = Vec::new();
        for c in cones {
            if tau.iter().all(|t| c.contains(t)) {
                for t in &tau {
                    let mut d: Vec<usize> = c.iter().map(|&i| if i == *t { new } else { i }).collect();
                    d.sort_unstable();
                    next.push(d);
                }
            } else {
                next.push(c);
            }
        }
        cones = next;
    }
    Err(Error::RegularizationCap { iterations: REGULARIZATION_CAP, rays: rays.len() - fan.rays.len() })
}

/// `v_λ(h) = min l_λ(supp h)`.
pub fn multiplicity(l: &[i64], h: &SparsePoly) -> Result<i64> {
    h.support()
        .map(|m| dot_i64(l, m))
        .min()
        .ok_or(Error::ZeroPolynomial)
}

/// A non-coordinate ray with its multiplicity for a reference polynomial.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ray {
    pub l: Vec<i64>,
    pub v: i64,
    /// `l / v`, absent when `v = 0`.
    #[serde(with = "crate::arith::serde_q::vec_opt")]
    pub l_tilde: Option<Vec<Q>>,
}

/// The set `L`: every ray except the coordinate rays, with `v_λ(f)` and `l̃_λ`.
pub fn edges_l(fan: &Fan, f: &SparsePoly) -> Result<Vec<Ray>> {
    let n = fan.nvars();
    for i in 0..n {
        if fan.ray_index(&Exponent::unit(n, i).0).is_none() {
            return Err(Error::MissingCoordinateRay(i + 1));
        }
    }
    fan.rays
        .iter()
        .filter(|r| r.iter().filter(|&&x| x != 0).count() > 1 || r.iter().any(|&x| x > 1))
        .map(|r| {
            let v = multiplicity(r, f)?;
            let l_tilde = (v > 0).then(|| r.iter().map(|&x| qr(x, v)).collect());
            Ok(Ray { l: r.clone(), v, l_tilde })
        })
        .collect()
}

/// Rays `λ ∈ L` with `v_λ(g) = (n - r)·v_λ(f)`.
///
/// When `supp g` lies in the relative interior of `(n - r)δ` for a single
/// compact face `δ`, every returned ray is also checked to lie in `σ(δ)`.
pub fn pole_components(g: &SparsePoly, f: &SparsePoly, r: usize, fan: &Fan) -> Result<Vec<Ray>> {
    let delta = NewtonPolyhedron::of(f)?;
    let n = f.nvars();
    if r >= n {
        return Err(Error::Precondition(format!("r = {r} must be below n = {n}")));
    }
    let level = q((n - r) as i64);
    let nu = delta.nu(g);
    if nu < NewtonOrder::Finite(level.clone()) {
        return Err(Error::Precondition(format!("ν(g) = {nu} < n - r = {level}")));
    }
    let out: Vec<Ray> = edges_l(fan, f)?
        .into_iter()
        .filter(|ray| multiplicity(&ray.l, g).is_ok_and(|vg| vg == (n - r) as i64 * ray.v))
        .collect();
    let home = delta
        .interior_compact_faces()
        .into_iter()
        .find(|face| g.support().all(|m| delta.in_dilated_face_interior(face, m, &level)));
    if let Some(face) = home {
        let sigma = sigma_of_face(&delta, &face);
        if let Some(bad) = out.iter().find(|ray| !sigma.contains(&ray.l)) {
            return Err(Error::TheoremViolation(format!("pole ray {:?} outside σ(δ)", bad.l)));
        }
    }
    Ok(out)
}

/// `F_{σ₁} ∩ F_{σ₂}`: the smallest cone of the fan containing both cones, if any.
pub fn orbit_closure_intersection(fan: &Fan, s1: &[Vec<i64>], s2: &[Vec<i64>]) -> Result<Option<Vec<Vec<i64>>>> {
    let all = fan.all_cones();
    let to_idx = |s: &[Vec<i64>]| -> Result<Vec<usize>> {
        let mut idx: Vec<usize> = s.iter().map(|r| fan.ray_index(r).ok_or(Error::NotInFan)).collect::<Result<_>>()?;
        idx.sort_unstable();
        idx.dedup();
        if all.contains(&idx) {
            Ok(idx)
        } else {
            Err(Error::NotInFan)
        }
    };
    let (a, b) = (to_idx(s1)?, to_idx(s2)?);
    let union: BTreeSet<usize> = a.iter().chain(&b).copied().collect();
    let best = all
        .iter()
        .filter(|c| union.iter().all(|i| c.contains(i)))
        .min_by_key(|c| c.len());
    Ok(best.map(|c| c.iter().map(|&i| fan.rays[i].clone()).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(s: &str, n: usize) -> SparsePoly {
        SparsePoly::parse_any(s, Some(n)).unwrap()
    }

    fn fan_of(s: &str, n: usize) -> Fan {
        sigma_delta_fan(&NewtonPolyhedron::of(&poly(s, n)).unwrap()).unwrap()
    }

    fn ray_set(f: &Fan) -> BTreeSet<Vec<i64>> {
        f.rays().iter().cloned().collect()
    }

    #[test]
    fn dual_of_orthant_and_edge_cone() {
        assert_eq!(Cone::orthant(2).dual().rays, vec![vec![0, 1], vec![1, 0]]);
        let c = Cone::new(2, &[vec![1, 0], vec![3, 2]]);
        assert_eq!(c.dual().rays, vec![vec![0, 1], vec![2, -3]]);
        assert_eq!(c.dual().dual().rays, c.rays);
    }

    #[test]
    fn dual_of_ray_is_halfplane() {
        let c = Cone::new(2, &[vec![3, 2]]);
        let d = c.dual();
        assert_eq!(d.dim, 2);
        assert_eq!(d.facet_normals, vec![vec![3, 2]]);
        assert_eq!(d.lineality.len(), 1);
        assert!(d.contains(&[2, -3]) && d.contains(&[-2, 3]) && !d.contains(&[-1, 0]));
    }

    #[test]
    fn face_bijections() {
        let r = Cone::orthant(2).face_bijection_check();
        assert!(r.ok);
        assert_eq!((r.faces, r.dual_faces), (4, 4));
        let z = Cone::zero(2).face_bijection_check();
        assert!(z.ok);
        assert_eq!(z.dimension_pairs, vec![(0, 2)]);
        assert!(Cone::new(2, &[vec![1, 0], vec![3, 2]]).face_bijection_check().ok);
        assert!(Cone::new(3, &[vec![1, 0, 0], vec![0, 1, 0], vec![1, 1, 1], vec![1, 0, 1]])
            .face_bijection_check()
            .ok);
    }

    #[test]
    fn sigma_delta_examples() {
        let f = fan_of("x1^2 + x2^3", 2);
        assert_eq!(ray_set(&f), [vec![0, 1], vec![1, 0], vec![3, 2]].into());
        assert_eq!(f.cones().len(), 2);
        let g = fan_of("x1^2 + x1*x2 + x2^3", 2);
        assert_eq!(ray_set(&g), [vec![0, 1], vec![1, 0], vec![1, 1], vec![2, 1]].into());
        let h = fan_of("x1*x2*x3 + x1^3 + x2^3 + x3^3", 3);
        assert!(h.covers_orthant());
        let k = fan_of("x1^3 + x2^3 + x3^3 + x1*x2 + x1*x3 + x2*x3", 3);
        let r = regularize(&k).unwrap();
        assert!(r.is_regular().unwrap() && r.refines(&k) && r.covers_orthant());
    }

    #[test]
    fn axis_condition_enforced() {
        let d = NewtonPolyhedron::of(&poly("x1^2", 2)).unwrap();
        assert_eq!(sigma_delta_fan(&d), Err(Error::AxisCondition(2)));
    }

    #[test]
    fn hj_examples() {
        let f = Fan::new(vec![vec![1, 0], vec![1, 2], vec![0, 1]], vec![vec![0, 1], vec![1, 2]]).unwrap();
        assert!(!f.is_regular().unwrap());
        let r = regularize(&f).unwrap();
        assert!(r.is_regular().unwrap());
        assert_eq!(ray_set(&r), [vec![0, 1], vec![1, 0], vec![1, 1], vec![1, 2]].into());
        let s = regularize(&fan_of("x1^2 + x2^3", 2)).unwrap();
        assert_eq!(ray_set(&s), [vec![0, 1], vec![1, 0], vec![1, 1], vec![2, 1], vec![3, 2]].into());
        assert!(s.is_regular().unwrap());
        assert_eq!(regularize(&Fan::standard(2)).unwrap(), Fan::standard(2));
    }

    #[test]
    fn regularize_3d_example() {
        let f = fan_of("x1^2 + x2^3 + x3^5 + x1*x2*x3", 3);
        let r = regularize(&f).unwrap();
        assert!(r.is_regular().unwrap());
        assert!(r.refines(&f));
        assert!(r.covers_orthant());
        assert!(r.contains_orthant_boundary());
    }

    #[test]
    fn regularize_4d_unsupported() {
        assert_eq!(regularize(&Fan::standard(4)), Err(Error::RegularizationUnsupported(4)));
    }

    #[test]
    fn non_simplicial_is_reported() {
        let f = fan_of("x1^3 + x2^3 + x3^3 + x1*x2 + x1*x3 + x2*x3", 3);
        assert!(f.covers_orthant());
        assert!(f.cones().iter().any(|c| c.len() > 3));
        assert!(matches!(f.is_regular(), Err(Error::NonSimplicial(_))));
    }

    #[test]
    fn multiplicities() {
        let f = poly("x1^2 + x2^3", 2);
        assert_eq!(multiplicity(&[3, 2], &f).unwrap(), 6);
        assert_eq!(multiplicity(&[1, 0], &f).unwrap(), 0);
        assert_eq!(multiplicity(&[2, 5], &poly("x1^3*x2", 2)).unwrap(), 11);
        assert_eq!(multiplicity(&[1, 1], &SparsePoly::zero(2)), Err(Error::ZeroPolynomial));
    }

    #[test]
    fn edges_l_sets() {
        let f = poly("x1^2 + x2^3", 2);
        let reg = regularize(&fan_of("x1^2 + x2^3", 2)).unwrap();
        let ls: BTreeSet<Vec<i64>> = edges_l(&reg, &f).unwrap().into_iter().map(|r| r.l).collect();
        assert_eq!(ls, [vec![1, 1], vec![2, 1], vec![3, 2]].into());
        assert!(edges_l(&Fan::standard(2), &f).unwrap().is_empty());
        let g = poly("x1^2 + x1*x2 + x2^3", 2);
        let rays = edges_l(&fan_of("x1^2 + x1*x2 + x2^3", 2), &g).unwrap();
        assert_eq!(rays.iter().map(|r| r.l.clone()).collect::<BTreeSet<_>>(), [vec![1, 1], vec![2, 1]].into());
        assert_eq!(rays[0].l_tilde, Some(vec![qr(1, 2), qr(1, 2)]));
        let missing = Fan::new(vec![vec![1, 1], vec![0, 1]], vec![vec![0, 1]]).unwrap();
        assert_eq!(edges_l(&missing, &f), Err(Error::MissingCoordinateRay(1)));
    }

    #[test]
    fn pole_component_examples() {
        let f = poly("x1^2 + x2^3", 2);
        let reg = regularize(&fan_of("x1^2 + x2^3", 2)).unwrap();
        let poles = pole_components(&poly("x1^2*x2^3", 2), &f, 0, &reg).unwrap();
        assert_eq!(poles.iter().map(|r| r.l.clone()).collect::<Vec<_>>(), vec![vec![3, 2]]);
        assert!(pole_components(&poly("x1^5*x2^5", 2), &f, 0, &reg).unwrap().is_empty());
        assert!(pole_components(&poly("x1*x2", 2), &f, 0, &reg).is_err());

        let g = poly("x1^2 + x1*x2 + x2^3", 2);
        let fan = fan_of("x1^2 + x1*x2 + x2^3", 2);
        let poles = pole_components(&poly("x1*x2", 2), &g, 1, &fan).unwrap();
        assert_eq!(poles.iter().map(|r| r.l.clone()).collect::<BTreeSet<_>>(), [vec![1, 1], vec![2, 1]].into());
    }

    #[test]
    fn orbit_closures() {
        let reg = regularize(&fan_of("x1^2 + x2^3", 2)).unwrap();
        let c = orbit_closure_intersection(&reg, &[vec![1, 0]], &[vec![2, 1]]).unwrap();
        assert_eq!(c, Some(vec![vec![1, 0], vec![2, 1]]));
        let same = orbit_closure_intersection(&reg, &[vec![1, 1]], &[vec![1, 1]]).unwrap();
        assert_eq!(same, Some(vec![vec![1, 1]]));
        assert_eq!(orbit_closure_intersection(&reg, &[vec![1, 0]], &[vec![0, 1]]).unwrap(), None);
        assert_eq!(orbit_closure_intersection(&reg, &[vec![5, 1]], &[vec![0, 1]]), Err(Error::NotInFan));
    }

    #[test]
    fn fan_json_round_trip() {
        let f = fan_of("x1^2 + x2^3", 2);
        let s = serde_json::to_string(&f).unwrap();
        assert_eq!(s, r#"{"rays":[[0,1],[1,0],[3,2]],"cones":[[0,2],[1,2]]}"#);
        let back: Fan = serde_json::from_str(&s).unwrap();
        assert_eq!(back, f);
        assert!(serde_json::from_str::<Fan>(r#"{"rays":[[2,0]],"cones":[[0]]}"#).is_err());
    }
}
