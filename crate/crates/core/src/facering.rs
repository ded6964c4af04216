//! Graded semigroup rings `A_σ = ℚ[σ ∩ ℤⁿ]` of cones over compact faces,
//! their canonical modules `K_σ = ℚ[σ° ∩ ℤⁿ]`, the quotients `K̄_σ` by a
//! system of parameters, socle degrees and Poincaré series.

use std::collections::{BTreeMap, BTreeSet};

use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{dot_q_i64, fmt_q, q, serde_q, Q};
use crate::error::{Error, Result};
use crate::fan::Cone;
use crate::linalg::{self, Echelon, SparseVec};
use crate::poly::{Exponent, SparsePoly};
use crate::polylattice::{box_points, combinations, parallelepiped_points, FaceDescriptor, NewtonPolyhedron};

/// A rational linear form on `span(σ)`, positive on `σ \ {0}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GradingForm {
    #[serde(with = "serde_q::vec")]
    pub l_tilde: Vec<Q>,
    /// Smallest `d > 0` with `d·l̃` integral on `span(σ) ∩ ℤⁿ`.
    pub denominator: i64,
}

impl GradingForm {
    pub fn degree(&self, m: &[i64]) -> Q {
        dot_q_i64(&self.l_tilde, m)
    }

    /// The form in `span(rows)` taking the value `values[i]` on `rows[i]`;
    /// the rows must be linearly independent.
    fn solve_on_basis(rows: &[Vec<i64>], values: &[Q]) -> Option<Vec<Q>> {
        let gram: linalg::Matrix = rows
            .iter()
            .map(|a| rows.iter().map(|b| q(crate::arith::dot_i64(a, b))).collect())
            .collect();
        let y = linalg::solve_unique(&gram, values)?;
        let n = rows[0].len();
        Some(
            (0..n)
                .map(|c| rows.iter().zip(&y).fold(Q::zero(), |acc, (r, yi)| acc + q(r[c]) * yi))
                .collect(),
        )
    }

    fn with_denominator(l_tilde: Vec<Q>, basis: &[Vec<i64>]) -> GradingForm {
        let mut d = num_bigint::BigInt::one();
        let mut probe: Vec<Vec<i64>> = basis.to_vec();
        probe.extend(parallelepiped_points(basis).into_iter().map(|p| p.0));
        for p in probe {
            d = d.lcm(dot_q_i64(&l_tilde, &p).denom());
        }
        GradingForm { l_tilde, denominator: i64::try_from(d).expect("small denominator") }
    }
}

/// A cone with a positive grading.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GradedCone {
    pub sigma: Cone,
    pub grading: GradingForm,
}

impl GradedCone {
    /// A simplicial cone graded by prescribing positive values on its generators.
    pub fn simplicial(nvars: usize, gens: &[Vec<i64>], alphas: &[Q]) -> Result<GradedCone> {
        let sigma = Cone::new(nvars, gens);
        if !sigma.is_simplicial() || gens.len() != sigma.dim {
            return Err(Error::Precondition("generators are not linearly independent".into()));
        }
        if alphas.iter().any(|a| !a.is_positive()) {
            return Err(Error::NonPositiveGrading);
        }
        let l = GradingForm::solve_on_basis(gens, alphas).ok_or(Error::NonPositiveGrading)?;
        Ok(GradedCone { grading: GradingForm::with_denominator(l, gens), sigma })
    }

    pub fn nvars(&self) -> usize {
        self.sigma.nvars
    }

    pub fn check_positive(&self) -> Result<()> {
        if !self.sigma.lineality.is_empty() || self.sigma.rays.iter().any(|r| !self.grading.degree(r).is_positive()) {
            return Err(Error::NonPositiveGrading);
        }
        Ok(())
    }

    /// `m` lies in the relative interior of `σ`.
    pub fn in_interior(&self, m: &[i64]) -> bool {
        self.sigma.equations.iter().all(|e| crate::arith::dot_i64(e, m) == 0)
            && self.sigma.facet_normals.iter().all(|x| crate::arith::dot_i64(x, m) > 0)
    }

    /// Lattice points of `σ` (or `σ°`) of degree at most `top`, bucketed by degree.
    pub fn points_by_degree(&self, top: &Q, interior: bool) -> Result<BTreeMap<Q, Vec<Exponent>>> {
        self.check_positive()?;
        let n = self.nvars();
        let mut corners: Vec<Vec<Q>> = vec![vec![Q::zero(); n]];
        for r in &self.sigma.rays {
            let scale = top / self.grading.degree(r);
            corners.push(r.iter().map(|&x| q(x) * &scale).collect());
        }
        let lo: Vec<i64> = (0..n)
            .map(|c| corners.iter().map(|p| p[c].floor().to_integer()).min().unwrap())
            .map(|b| i64::try_from(b).expect("small bound"))
            .collect();
        let hi: Vec<i64> = (0..n)
            .map(|c| corners.iter().map(|p| p[c].ceil().to_integer()).max().unwrap())
            .map(|b| i64::try_from(b).expect("small bound"))
            .collect();
        let mut out: BTreeMap<Q, Vec<Exponent>> = BTreeMap::new();
        for m in box_points(&lo, &hi) {
            let inside = if interior { self.in_interior(&m) } else { self.sigma.contains(&m) };
            if !inside {
                continue;
            }
            let d = self.grading.degree(&m);
            if &d <= top {
                out.entry(d).or_default().push(Exponent(m));
            }
        }
        Ok(out)
    }

    /// The monomial basis of `A_σ` (or `K_σ`) in degree `t`.
    pub fn graded_piece(&self, t: &Q, interior: bool) -> Result<GradedPiece> {
        let monomials = self.points_by_degree(t, interior)?.remove(t).unwrap_or_default();
        Ok(GradedPiece { degree: t.clone(), monomials })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GradedPiece {
    #[serde(with = "serde_q")]
    pub degree: Q,
    pub monomials: Vec<Exponent>,
}

/// `σ = ℝ₊δ` for a compact face `δ` not in a coordinate hyperplane.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FaceCone {
    pub delta: FaceDescriptor,
    pub vertices: Vec<Exponent>,
    pub sigma: Cone,
    pub r: usize,
}

impl FaceCone {
    pub fn new(poly: &NewtonPolyhedron, delta: &FaceDescriptor) -> Result<FaceCone> {
        if !delta.compact || delta.in_coordinate_hyperplane {
            return Err(Error::Precondition("face must be compact and not in a coordinate hyperplane".into()));
        }
        let n = poly.nvars();
        let vertices: Vec<Exponent> = delta.vertex_subset.iter().map(|&i| poly.vertices()[i].clone()).collect();
        let gens: Vec<Vec<i64>> = vertices.iter().map(|v| v.0.clone()).collect();
        let sigma = Cone::new(n, &gens);
        Ok(FaceCone { r: delta.r(n), delta: delta.clone(), vertices, sigma })
    }

    /// `l̃`: the linear form on `span(σ)` equal to one on `δ`.
    pub fn grading_form(&self) -> Result<GradingForm> {
        let gens: Vec<Vec<i64>> = self.vertices.iter().map(|v| v.0.clone()).collect();
        let basis = independent_rows(&gens);
        let ones = vec![q(1); basis.len()];
        let l = GradingForm::solve_on_basis(&basis, &ones).ok_or(Error::NoGradingForm)?;
        if gens.iter().any(|v| dot_q_i64(&l, v) != q(1)) || self.sigma.dim != self.delta.dim + 1 {
            return Err(Error::NoGradingForm);
        }
        Ok(GradingForm::with_denominator(l, &basis))
    }

    pub fn graded(&self) -> Result<GradedCone> {
        Ok(GradedCone { sigma: self.sigma.clone(), grading: self.grading_form()? })
    }
}

fn independent_rows(rows: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let mut out: Vec<Vec<i64>> = Vec::new();
    for r in rows {
        let mut trial = out.clone();
        trial.push(r.clone());
        if linalg::rank_i64(&trial) == trial.len() {
            out = trial;
        }
    }
    out
}

/// `f_{iδ} = (x_i ∂f/∂x_i)_δ` for `i = 1..n`.
pub fn face_derivatives(f: &SparsePoly, poly: &NewtonPolyhedron, delta: &FaceDescriptor) -> Vec<SparsePoly> {
    let fd = poly.face_part(f, delta);
    (0..f.nvars()).map(|i| fd.log_derivative(i)).collect()
}

/// Linearly independent subset (lexicographically first) of size `k`
/// spanning the same space; returns indices.
fn independent_subset_of(polys: &[SparsePoly], k: usize) -> Option<Vec<usize>> {
    let index: BTreeMap<&Exponent, usize> = polys
        .iter()
        .flat_map(|p| p.support())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .enumerate()
        .map(|(i, e)| (e, i))
        .collect();
    let mut ech = Echelon::new();
    let mut chosen = Vec::new();
    for (i, p) in polys.iter().enumerate() {
        let v: SparseVec = p.terms().map(|(e, c)| (index[e], c.clone())).collect();
        if ech.insert(v) {
            chosen.push(i);
        }
    }
    (chosen.len() == k).then_some(chosen)
}

/// Chooses `n - r` of the face derivatives spanning their span and checks
/// they act as a regular sequence on `K_σ` (graded dimensions match the
/// Poincaré prediction through the socle degree).
pub fn select_parameters(derivs: &[SparsePoly], fc: &FaceCone) -> Result<Vec<SparsePoly>> {
    let k = fc.sigma.dim;
    let idx = independent_subset_of(derivs, k).ok_or_else(|| {
        Error::DegenerateFaceData(format!("face derivatives do not span a space of dimension {k}"))
    })?;
    let params: Vec<SparsePoly> = idx.iter().map(|&i| derivs[i].clone()).collect();
    let gc = fc.graded()?;
    let top = q(k as i64 + 1);
    let kbar = kbar_quotient(&gc, &params, &top)?;
    if !kbar.matches_prediction() {
        return Err(Error::DegenerateFaceData("selected derivatives are not a regular sequence".into()));
    }
    Ok(params)
}

/// `K̄_σ` of a face, presented by the selected face derivatives, through
/// one degree past the expected socle.
pub fn face_kbar(f: &SparsePoly, poly: &NewtonPolyhedron, delta: &FaceDescriptor) -> Result<KbarPresentation> {
    let fc = FaceCone::new(poly, delta)?;
    let params = select_parameters(&face_derivatives(f, poly, delta), &fc)?;
    let top = q(fc.sigma.dim as i64 + 1);
    kbar_quotient(&fc.graded()?, &params, &top)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GradedDim {
    #[serde(with = "serde_q")]
    pub degree: Q,
    pub dim: i64,
}

/// `K̄_σ = K_σ / (p_1, …, p_k) K_σ`, computed degree by degree.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KbarPresentation {
    pub parameters: Vec<SparsePoly>,
    #[serde(with = "serde_q::vec")]
    pub parameter_degrees: Vec<Q>,
    pub graded_dims: Vec<GradedDim>,
    /// Coefficients of `P(K_σ)(t)·Π(1 - t^{α_i})`.
    pub predicted_dims: Vec<GradedDim>,
    #[serde(with = "serde_q")]
    pub socle_degree: Q,
    pub socle_basis: Vec<Exponent>,
    /// Standard monomials of every degree.
    pub basis: Vec<Exponent>,
    pub total_dim: i64,
    #[serde(skip)]
    cone: Option<GradedCone>,
}

impl KbarPresentation {
    pub fn dim_at(&self, t: &Q) -> i64 {
        self.graded_dims.iter().find(|g| &g.degree == t).map_or(0, |g| g.dim)
    }

    pub fn matches_prediction(&self) -> bool {
        let a: BTreeMap<&Q, i64> = self.graded_dims.iter().filter(|g| g.dim != 0).map(|g| (&g.degree, g.dim)).collect();
        let b: BTreeMap<&Q, i64> =
            self.predicted_dims.iter().filter(|g| g.dim != 0 && g.degree <= self.socle_degree).map(|g| (&g.degree, g.dim)).collect();
        a == b
    }

    /// Expected socle degree `Σ α_i`.
    pub fn expected_socle_degree(&self) -> Q {
        self.parameter_degrees.iter().sum()
    }
}

fn homogeneous_degree(p: &SparsePoly, gc: &GradedCone) -> Result<Q> {
    let mut degs = p.support().map(|m| gc.grading.degree(m));
    let d = degs.next().ok_or(Error::ZeroPolynomial)?;
    if degs.any(|e| e != d) {
        return Err(Error::NotHomogeneous);
    }
    if p.support().any(|m| !gc.sigma.contains(m)) {
        return Err(Error::Precondition("parameter not supported in σ".into()));
    }
    Ok(d)
}

struct PieceImage {
    monomials: Vec<Exponent>,
    echelon: Echelon,
}

fn piece_image(gc: &GradedCone, params: &[SparsePoly], degs: &[Q], t: &Q, pieces: &BTreeMap<Q, Vec<Exponent>>) -> PieceImage {
    let monomials = pieces.get(t).cloned().unwrap_or_default();
    let index: BTreeMap<&Exponent, usize> = monomials.iter().enumerate().map(|(i, m)| (m, i)).collect();
    let mut echelon = Echelon::new();
    for (p, a) in params.iter().zip(degs) {
        let src = t - a;
        let Some(lower) = pieces.get(&src) else {
            continue;
        };
        for u in lower {
            let img = p.mul_monomial(u);
            let v: SparseVec = img
                .terms()
                .map(|(e, c)| (*index.get(e).expect("product stays in σ°"), c.clone()))
                .collect();
            echelon.insert(v);
        }
    }
    let _ = gc;
    PieceImage { monomials, echelon }
}

/// Graded dimensions, socle degree and socle basis of `K̄_σ` up to `max_degree`.
pub fn kbar_quotient(gc: &GradedCone, params: &[SparsePoly], max_degree: &Q) -> Result<KbarPresentation> {
    let k = gc.sigma.dim;
    if params.len() != k {
        return Err(Error::NotSystemOfParameters(format!("{} parameters for a cone of dimension {k}", params.len())));
    }
    let degs: Vec<Q> = params.iter().map(|p| homogeneous_degree(p, gc)).collect::<Result<_>>()?;
    let expected: Q = degs.iter().sum();
    let pieces = gc.points_by_degree(max_degree, true)?;
    let mut graded_dims = Vec::new();
    let mut basis = Vec::new();
    let mut by_degree: BTreeMap<Q, Vec<Exponent>> = BTreeMap::new();
    for t in pieces.keys() {
        let img = piece_image(gc, params, &degs, t, &pieces);
        let std: Vec<Exponent> = img
            .monomials
            .iter()
            .enumerate()
            .filter(|(i, _)| !img.echelon.is_pivot(*i))
            .map(|(_, m)| m.clone())
            .collect();
        graded_dims.push(GradedDim { degree: t.clone(), dim: std.len() as i64 });
        if !std.is_empty() {
            basis.extend(std.iter().cloned());
            by_degree.insert(t.clone(), std);
        }
    }
    if let Some((t, _)) = by_degree.iter().find(|(t, _)| **t > expected) {
        return Err(Error::NotSystemOfParameters(format!(
            "K̄ does not vanish in degree {} beyond {}",
            fmt_q(t),
            fmt_q(&expected)
        )));
    }
    let (socle_degree, socle_basis) = by_degree
        .iter()
        .next_back()
        .map(|(t, b)| (t.clone(), b.clone()))
        .unwrap_or((Q::zero(), Vec::new()));

    // P(K_σ)(t) · Π(1 - t^{α_i})
    let kdims: BTreeMap<&Q, i64> = pieces.iter().map(|(t, v)| (t, v.len() as i64)).collect();
    let mut predicted: BTreeMap<Q, i64> = BTreeMap::new();
    for size in 0..=k {
        for s in combinations(k, size) {
            let shift: Q = s.iter().map(|&i| &degs[i]).sum();
            let sign = if size % 2 == 0 { 1 } else { -1 };
            for (t, d) in &kdims {
                let target = *t + &shift;
                if &target <= max_degree {
                    *predicted.entry(target).or_insert(0) += sign * d;
                }
            }
        }
    }
    let predicted_dims = predicted.into_iter().map(|(degree, dim)| GradedDim { degree, dim }).collect();
    Ok(KbarPresentation {
        total_dim: basis.len() as i64,
        parameters: params.to_vec(),
        parameter_degrees: degs,
        graded_dims,
        predicted_dims,
        socle_degree,
        socle_basis,
        basis,
        cone: Some(gc.clone()),
    })
}

/// Whether `[g] ≠ 0` in `K̄_σ`; `g` must be homogeneous and supported in `σ°`.
pub fn class_nonzero(g: &SparsePoly, kbar: &KbarPresentation) -> Result<bool> {
    if g.is_zero() {
        return Ok(false);
    }
    let gc = kbar.cone.as_ref().ok_or_else(|| Error::Precondition("presentation without cone data".into()))?;
    let mut degs = g.support().map(|m| gc.grading.degree(m));
    let t = degs.next().expect("nonzero");
    if degs.any(|d| d != t) {
        return Err(Error::NotHomogeneous);
    }
    if g.support().any(|m| !gc.in_interior(m)) {
        return Err(Error::Precondition("g is not supported in σ°".into()));
    }
    let pieces = gc.points_by_degree(&t, true)?;
    let img = piece_image(gc, &kbar.parameters, &kbar.parameter_degrees, &t, &pieces);
    let index: BTreeMap<&Exponent, usize> = img.monomials.iter().enumerate().map(|(i, m)| (m, i)).collect();
    let v: SparseVec = g.terms().map(|(e, c)| (index[e], c.clone())).collect();
    Ok(!img.echelon.contains(&v))
}

/// Truncated Poincaré series of `A_σ` and `K_σ`, with the closed form for
/// simplicial cones.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PoincareSeries {
    pub a_sigma: Vec<GradedDim>,
    pub k_sigma: Vec<GradedDim>,
    pub closed_form: Option<ClosedForm>,
}

/// `P(t) = N(t) / Π(1 - t^{α_i})`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClosedForm {
    #[serde(with = "serde_q::vec")]
    pub alphas: Vec<Q>,
    pub numerator_a: Vec<GradedDim>,
    pub numerator_k: Vec<GradedDim>,
    /// `lim_{t→∞} P(K_σ)(t)`, when finite.
    pub k_at_infinity: Option<i64>,
}

impl ClosedForm {
    /// Coefficients of `N(t) / Π(1 - t^{α_i})` through degree `top`.
    pub fn expand(numerator: &[GradedDim], alphas: &[Q], top: &Q) -> BTreeMap<Q, i64> {
        let mut series: BTreeMap<Q, i64> = numerator.iter().filter(|g| &g.degree <= top).map(|g| (g.degree.clone(), g.dim)).collect();
        for a in alphas {
            // multiply by 1/(1 - t^a) = Σ t^{ja}
            let mut next: BTreeMap<Q, i64> = BTreeMap::new();
            for (d, c) in &series {
                let mut e = d.clone();
                while &e <= top {
                    *next.entry(e.clone()).or_insert(0) += c;
                    e += a;
                }
            }
            series = next;
        }
        series.retain(|_, c| *c != 0);
        series
    }
}

fn to_dims(m: BTreeMap<Q, i64>) -> Vec<GradedDim> {
    m.into_iter().map(|(degree, dim)| GradedDim { degree, dim }).collect()
}

pub fn poincare_series(gc: &GradedCone, truncation: &Q) -> Result<PoincareSeries> {
    gc.check_positive()?;
    let count = |interior| -> Result<Vec<GradedDim>> {
        Ok(to_dims(
            gc.points_by_degree(truncation, interior)?
                .into_iter()
                .map(|(t, v)| (t, v.len() as i64))
                .collect(),
        ))
    };
    let a_sigma = count(false)?;
    let k_sigma = count(true)?;
    let closed_form = gc.sigma.is_simplicial().then(|| {
        let gens = &gc.sigma.rays;
        let alphas: Vec<Q> = gens.iter().map(|r| gc.grading.degree(r)).collect();
        let top: Vec<i64> = (0..gc.nvars()).map(|c| gens.iter().map(|r| r[c]).sum()).collect();
        let mut na: BTreeMap<Q, i64> = BTreeMap::new();
        let mut nk: BTreeMap<Q, i64> = BTreeMap::new();
        for (p, _) in parallelepiped_points(gens) {
            *na.entry(gc.grading.degree(&p)).or_insert(0) += 1;
            // a ↦ 1 - a swaps [0,1) and (0,1]
            let dual: Vec<i64> = top.iter().zip(&p).map(|(a, b)| a - b).collect();
            *nk.entry(gc.grading.degree(&dual)).or_insert(0) += 1;
        }
        let total: Q = alphas.iter().sum();
        let (lead_deg, lead) = nk.iter().next_back().map(|(d, c)| (d.clone(), *c)).expect("nonempty");
        let sign = if alphas.len().is_multiple_of(2) { 1 } else { -1 };
        let k_at_infinity = match lead_deg.cmp(&total) {
            std::cmp::Ordering::Less => Some(0),
            std::cmp::Ordering::Equal => Some(sign * lead),
            std::cmp::Ordering::Greater => None,
        };
        ClosedForm { alphas, numerator_a: to_dims(na), numerator_k: to_dims(nk), k_at_infinity }
    });
    Ok(PoincareSeries { a_sigma, k_sigma, closed_form })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::qr;

    fn poly(s: &str, n: usize) -> SparsePoly {
        SparsePoly::parse_any(s, Some(n)).unwrap()
    }

    fn setup(s: &str, n: usize, face: usize) -> (SparsePoly, NewtonPolyhedron, FaceCone) {
        let f = poly(s, n);
        let d = NewtonPolyhedron::of(&f).unwrap();
        let delta = d.interior_compact_faces()[face].clone();
        let fc = FaceCone::new(&d, &delta).unwrap();
        (f, d, fc)
    }

    fn exps(v: &[Exponent]) -> Vec<Vec<i64>> {
        v.iter().map(|e| e.0.clone()).collect()
    }

    #[test]
    fn grading_forms() {
        let (_, _, fc) = setup("x1^2 + x2^3", 2, 0);
        let g = fc.grading_form().unwrap();
        assert_eq!(g.l_tilde, vec![qr(1, 2), qr(1, 3)]);
        assert_eq!(g.denominator, 6);
        let (_, _, fv) = setup("x1^2 + x1*x2 + x2^3", 2, 0);
        let gv = fv.grading_form().unwrap();
        assert_eq!(gv.degree(&[3, 3]), q(3));
        assert_eq!(gv.denominator, 1);
        let (_, _, fd) = setup("x1*x2*x3", 3, 0);
        assert_eq!(fd.grading_form().unwrap().l_tilde, vec![qr(1, 3); 3]);
    }

    #[test]
    fn face_cone_rejects_coordinate_faces() {
        let f = poly("x1^2 + x2^3", 2);
        let d = NewtonPolyhedron::of(&f).unwrap();
        let vertex = d.faces().into_iter().find(|f| f.dim == 0).unwrap();
        assert!(FaceCone::new(&d, &vertex).is_err());
    }

    #[test]
    fn face_derivative_examples() {
        let (f, d, fc) = setup("x1^2 + x2^3", 2, 0);
        assert_eq!(face_derivatives(&f, &d, &fc.delta), vec![poly("2*x1^2", 2), poly("3*x2^3", 2)]);
        let (g, dg, fv) = setup("x1^2 + x1*x2 + x2^3", 2, 0);
        assert_eq!(face_derivatives(&g, &dg, &fv.delta), vec![poly("x1*x2", 2), poly("x1*x2", 2)]);
    }

    #[test]
    fn parameter_selection() {
        let (f, d, fc) = setup("x1^2 + x2^3", 2, 0);
        assert_eq!(select_parameters(&face_derivatives(&f, &d, &fc.delta), &fc).unwrap().len(), 2);
        let (g, dg, fv) = setup("x1^2 + x1*x2 + x2^3", 2, 0);
        assert_eq!(select_parameters(&face_derivatives(&g, &dg, &fv.delta), &fv).unwrap(), vec![poly("x1*x2", 2)]);
        let zeros = vec![SparsePoly::zero(2), SparsePoly::zero(2)];
        assert!(matches!(select_parameters(&zeros, &fc), Err(Error::DegenerateFaceData(_))));
    }

    #[test]
    fn kbar_edge_case() {
        let (f, d, fc) = setup("x1^2 + x2^3", 2, 0);
        let params = select_parameters(&face_derivatives(&f, &d, &fc.delta), &fc).unwrap();
        let k = kbar_quotient(&fc.graded().unwrap(), &params, &q(4)).unwrap();
        assert_eq!(k.total_dim, 6);
        let mut b = exps(&k.basis);
        b.sort();
        assert_eq!(b, vec![vec![1, 1], vec![1, 2], vec![1, 3], vec![2, 1], vec![2, 2], vec![2, 3]]);
        assert_eq!(k.socle_degree, q(2));
        assert_eq!(exps(&k.socle_basis), vec![vec![2, 3]]);
        assert!(k.matches_prediction());
        assert!(class_nonzero(&poly("x1^2*x2^3", 2), &k).unwrap());
        assert!(!class_nonzero(&poly("x1^3*x2", 2), &k).unwrap());
        assert!(!class_nonzero(&SparsePoly::zero(2), &k).unwrap());
        assert!(class_nonzero(&poly("5*x1^2*x2^3", 2), &k).unwrap());
        assert_eq!(class_nonzero(&poly("x1^2*x2^3 + x1*x2", 2), &k), Err(Error::NotHomogeneous));
    }

    #[test]
    fn kbar_vertex_case() {
        let (_, _, fv) = setup("x1^2 + x1*x2 + x2^3", 2, 0);
        let k = kbar_quotient(&fv.graded().unwrap(), &[poly("x1*x2", 2)], &q(3)).unwrap();
        assert_eq!(k.total_dim, 1);
        assert_eq!(k.socle_degree, q(1));
        assert_eq!(exps(&k.socle_basis), vec![vec![1, 1]]);
    }

    #[test]
    fn non_parameters_rejected() {
        let (_, _, fc) = setup("x1^2 + x2^3", 2, 0);
        let gc = fc.graded().unwrap();
        // x²·K_σ twice never kills the y-direction
        let r = kbar_quotient(&gc, &[poly("x1^2", 2), poly("x1^2", 2)], &q(4));
        assert!(matches!(r, Err(Error::NotSystemOfParameters(_))));
        assert!(matches!(kbar_quotient(&gc, &[poly("x1^2", 2)], &q(4)), Err(Error::NotSystemOfParameters(_))));
    }

    #[test]
    fn poincare_examples() {
        let unit = GradedCone::simplicial(2, &[vec![1, 0], vec![0, 1]], &[q(1), q(1)]).unwrap();
        let p = poincare_series(&unit, &q(5)).unwrap();
        // t²/(1-t)²: dim K(d) = d - 1
        assert!(p.k_sigma.iter().all(|g| g.dim == g.degree.to_integer().try_into().map_or(0, |d: i64| d - 1)));
        assert_eq!(p.closed_form.as_ref().unwrap().k_at_infinity, Some(1));
        let ray = GradedCone::simplicial(2, &[vec![1, 1]], &[q(1)]).unwrap();
        assert_eq!(poincare_series(&ray, &q(3)).unwrap().closed_form.unwrap().k_at_infinity, Some(-1));
        let bad = GradedCone::simplicial(2, &[vec![1, 0]], &[q(-1)]);
        assert_eq!(bad, Err(Error::NonPositiveGrading));
    }

    #[test]
    fn closed_form_expands_to_counts() {
        let gc = GradedCone::simplicial(2, &[vec![1, 0], vec![1, 3]], &[q(2), q(1)]).unwrap();
        let top = q(6);
        let p = poincare_series(&gc, &top).unwrap();
        let cf = p.closed_form.unwrap();
        let dims = |v: &[GradedDim]| -> BTreeMap<Q, i64> { v.iter().map(|g| (g.degree.clone(), g.dim)).collect() };
        assert_eq!(ClosedForm::expand(&cf.numerator_a, &cf.alphas, &top), dims(&p.a_sigma));
        assert_eq!(ClosedForm::expand(&cf.numerator_k, &cf.alphas, &top), dims(&p.k_sigma));
        assert_eq!(cf.k_at_infinity, Some(1));
    }

    #[test]
    fn simplicial_monomial_basis_is_parallelepiped() {
        let gens = vec![vec![1, 0], vec![1, 3]];
        let gc = GradedCone::simplicial(2, &gens, &[q(1), q(1)]).unwrap();
        let params: Vec<SparsePoly> = gens.iter().map(|g| SparsePoly::monomial(Exponent(g.clone()), q(1))).collect();
        let k = kbar_quotient(&gc, &params, &q(3)).unwrap();
        let top = [2, 3];
        let mut expect: Vec<Vec<i64>> = parallelepiped_points(&gens)
            .into_iter()
            .map(|(p, _)| top.iter().zip(&p).map(|(a, b)| a - b).collect())
            .collect();
        expect.sort();
        let mut got = exps(&k.basis);
        got.sort();
        assert_eq!(got, expect);
        assert_eq!(k.socle_degree, q(2));
    }
}
