//! Grothendieck residues at the origin: the monomial case, the general case
//! through the transformation law, and the lattice-point model of the
//! top-degree Koszul quotient on a toric variety.

use std::collections::HashMap;

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::arith::{q, serde_q, Q};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::facering::{class_nonzero, face_kbar};
use crate::linalg::{Echelon, SparseVec};
use crate::localalg::{self, log_jacobian_generators};
use crate::poly::{Exponent, SparsePoly};
use crate::polylattice::{FaceDescriptor, NewtonPolyhedron, Polytope};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResidueResult {
    #[serde(with = "serde_q")]
    pub value: Q,
    pub truncation_used: usize,
    pub stable: bool,
}

/// `Res₀[g dx / x₁^{a₁}, …, x_n^{a_n}]`: the coefficient of `x^{a-1}` in `g`.
pub fn monomial_residue(g: &SparsePoly, a: &[i64]) -> Result<Q> {
    if a.len() != g.nvars() {
        return Err(Error::Dimension("exponent length differs from the number of variables".into()));
    }
    if a.iter().any(|&x| x < 1) {
        return Err(Error::Precondition("exponents must be positive".into()));
    }
    Ok(g.coeff(&Exponent(a.iter().map(|x| x - 1).collect())))
}

fn permutations(n: usize) -> Vec<(Vec<usize>, i64)> {
    fn rec(rest: &mut Vec<usize>, cur: &mut Vec<usize>, out: &mut Vec<(Vec<usize>, i64)>) {
        if rest.is_empty() {
            let inversions = (0..cur.len())
                .flat_map(|i| (i + 1..cur.len()).map(move |j| (i, j)))
                .filter(|&(i, j)| cur[i] > cur[j])
                .count();
            out.push((cur.clone(), if inversions % 2 == 0 { 1 } else { -1 }));
            return;
        }
        for k in 0..rest.len() {
            let x = rest.remove(k);
            cur.push(x);
            rec(rest, cur, out);
            cur.pop();
            rest.insert(k, x);
        }
    }
    let mut out = Vec::new();
    rec(&mut (0..n).collect(), &mut Vec::new(), &mut out);
    out
}

fn truncated_det(a: &[Vec<SparsePoly>], n: usize, cap: i64) -> SparsePoly {
    let mut det = SparsePoly::zero(n);
    for (perm, sign) in permutations(a.len()) {
        let mut term = SparsePoly::constant(n, q(sign));
        for (i, &j) in perm.iter().enumerate() {
            term = term.mul_truncated(&a[i][j], cap);
            if term.is_zero() {
                break;
            }
        }
        det = &det + &term;
    }
    det
}

fn residue_at(g: &SparsePoly, system: &[SparsePoly], n_pow: usize, d: usize) -> Result<Q> {
    let n = g.nvars();
    let span = localalg::certified_with_provenance(system, Some(d))?;
    let mut a = Vec::with_capacity(n);
    for i in 0..n {
        let mut e = vec![0; n];
        e[i] = n_pow as i64;
        let target = SparsePoly::monomial(Exponent(e), q(1));
        let row = localalg::express(&span, &target)?
            .ok_or_else(|| Error::IncreaseTruncation(format!("x_{}^{n_pow} not reached at D = {d}", i + 1)))?;
        a.push(row);
    }
    let cap = (n * (n_pow - 1)) as i64;
    let det = truncated_det(&a, n, cap);
    monomial_residue(&g.mul_truncated(&det, cap), &vec![n_pow as i64; n])
}

/// `Res₀[g dx / F₁, …, F_n]` for a system of finite colength.
///
/// With `N = D₀` every `x_i^N` lies in `(F)`; the matrix `a` with
/// `x^N = a·F` is solved for in the truncation, where its error lies in
/// `𝔪^{D+1-D₀}`. Requiring `D ≥ (n+1)·N` keeps that error above the degree
/// `n(N-1)` that the monomial residue reads.
pub fn grothendieck_residue(g: &SparsePoly, system: &[SparsePoly], d: Option<usize>, exec: Execution) -> Result<ResidueResult> {
    let n = g.nvars();
    if system.len() != n || system.iter().any(|f| f.nvars() != n) {
        return Err(Error::Dimension(format!("need {n} denominators in {n} variables")));
    }
    let base = localalg::certified_ideal(system, None).map_err(|e| match e {
        Error::IncreaseTruncation(_) => Error::InfiniteColength,
        other => other,
    })?;
    let n_pow = base.d0()?;
    let need = (n + 1) * n_pow;
    let d = d.unwrap_or(need).max(need);
    let values = exec.map(&[d, d + 2], |&dd| residue_at(g, system, n_pow, dd));
    let mut values = values.into_iter();
    let v1 = values.next().expect("two runs")?;
    let v2 = values.next().expect("two runs")?;
    if v1 != v2 {
        return Err(Error::Unstable(d));
    }
    Ok(ResidueResult { value: v1, truncation_used: d, stable: true })
}

/// `Res₀[f^r h dx / x₁f_{x₁}, …, x_nf_{x_n}]` under the hypotheses
/// `supp(x₁⋯x_n h) ⊆ (n-r)δ°` and `[x₁⋯x_n h] ≠ 0` in `K̄_σ`; the value
/// must be nonzero.
pub fn verify_theorem_0_1_part2(
    f: &SparsePoly,
    face: &FaceDescriptor,
    h: &SparsePoly,
    r: usize,
    d: Option<usize>,
    exec: Execution,
) -> Result<ResidueResult> {
    let n = f.nvars();
    let delta = NewtonPolyhedron::of(f)?;
    if face.r(n) != r {
        return Err(Error::Precondition(format!("face has r = {}, not {r}", face.r(n))));
    }
    if h.is_zero() {
        return Err(Error::Precondition("h must be nonzero".into()));
    }
    let g = h.mul_monomial(&Exponent::ones(n));
    let t = q((n - r) as i64);
    if let Some(m) = g.support().find(|m| !delta.in_dilated_face_interior(face, m, &t)) {
        return Err(Error::Precondition(format!("g not in (n-r)δ°: monomial {:?}", m.0)));
    }
    let kbar = face_kbar(f, &delta, face)?;
    if !class_nonzero(&g, &kbar)? {
        return Err(Error::Precondition("[g] vanishes in K̄_σ".into()));
    }
    let numerator = &f.pow(r as u32) * h;
    let res = grothendieck_residue(&numerator, &log_jacobian_generators(f), d, exec)?;
    if res.value.is_zero() {
        return Err(Error::TheoremViolation(format!("residue vanishes for h = {h}")));
    }
    Ok(res)
}

/// Lattice points of `lΔ` or of its interior.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeSpace {
    pub l: i64,
    pub interior: bool,
    pub points: Vec<Vec<i64>>,
}

pub fn lattice_space(delta: &Polytope, l: i64, interior: bool) -> LatticeSpace {
    LatticeSpace { l, interior, points: delta.lattice_points(l, interior) }
}

/// `dim L((n+1)Δ°) / Σ_i g_i·L(nΔ°)` by exact rank.
pub fn koszul_top_dimension(delta: &Polytope, gs: &[SparsePoly]) -> Result<usize> {
    let n = delta.nvars();
    if gs.len() != n + 1 || gs.iter().any(|g| g.nvars() != n) {
        return Err(Error::Dimension(format!("need {} polynomials in {n} variables", n + 1)));
    }
    for g in gs {
        if g.support().any(|m| !delta.dilate_contains(m, 1, false)) {
            return Err(Error::Precondition("support leaves Δ".into()));
        }
        if delta.vertices().iter().any(|v| g.coeff(&Exponent(v.clone())).is_zero()) {
            return Err(Error::Precondition("Newton polytope differs from Δ".into()));
        }
    }
    let top = delta.lattice_points(n as i64 + 1, true);
    let index: HashMap<&[i64], usize> = top.iter().enumerate().map(|(i, m)| (m.as_slice(), i)).collect();
    let mut ech = Echelon::new();
    for m in delta.lattice_points(n as i64, true) {
        for g in gs {
            let img = g.mul_monomial(&Exponent(m.clone()));
            let v: SparseVec = img
                .terms()
                .map(|(e, c)| (*index.get(e.0.as_slice()).expect("Δ + nΔ° ⊆ (n+1)Δ°"), c.clone()))
                .collect();
            ech.insert(v);
        }
    }
    Ok(top.len() - ech.rank())
}

/// Random polynomials with every lattice point of `Δ` in the support and
/// nonzero integer coefficients in `[-50, 50]`.
pub fn random_tuple<R: Rng>(delta: &Polytope, rng: &mut R) -> Vec<SparsePoly> {
    let n = delta.nvars();
    let pts = delta.lattice_points(1, false);
    (0..=n)
        .map(|_| {
            SparsePoly::from_terms(
                n,
                pts.iter().map(|p| {
                    let mut c = 0;
                    while c == 0 {
                        c = rng.gen_range(-50..=50);
                    }
                    (Exponent(p.clone()), q(c))
                }),
            )
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KoszulReport {
    pub dimension: usize,
    pub attempts: usize,
}

/// Random generic tuple with up to 5 resamples when the quotient is not
/// one-dimensional.
pub fn koszul_random(delta: &Polytope, seed: u64) -> Result<KoszulReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut last = 0;
    for attempt in 1..=6 {
        let gs = random_tuple(delta, &mut rng);
        last = koszul_top_dimension(delta, &gs)?;
        if last == 1 {
            return Ok(KoszulReport { dimension: 1, attempts: attempt });
        }
    }
    Err(Error::NotGeneric(format!("quotient dimension {last} after 5 resamples")))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceReport {
    /// The value the trace of the top form must take, `n!·Vol(Δ)`.
    pub trace: i64,
    pub normalized_volume: i64,
    pub by_counting: i64,
    pub agree: bool,
}

pub fn trace_volume_check(delta: &Polytope) -> TraceReport {
    let v = delta.normalized_volume();
    let c = delta.normalized_volume_by_counting();
    TraceReport { trace: v, normalized_volume: v, by_counting: c, agree: v == c }
}
