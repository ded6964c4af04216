//! Truncated model of the local ring `P/𝔪^(D+1)`, the ideals
//! `i = (x_i f_{x_i})` and `j = (f_{x_i})`, membership, socle, and the
//! Newton order of the socle of `P/i`.
//!
//! Answers are exact in the local ring once some `D₀ ≤ D` is found with every
//! monomial of degree `D₀` inside the truncated span: by Nakayama this gives
//! `𝔪^D₀ ⊆ I`, and everything of degree above `D` is then irrelevant.

use std::collections::{BTreeMap, HashMap};

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::arith::{q, serde_q, Q};
use crate::error::{Error, Result};
use crate::linalg::{self, Echelon, SparseVec};
use crate::poly::{degrevlex_cmp, Exponent, SparsePoly};
use crate::polylattice::{NewtonOrder, NewtonPolyhedron};

/// Above this many monomials the escalation loop gives up.
const MONOMIAL_CAP: usize = 4000;

fn monomials_of_degree(n: usize, d: i64) -> Vec<Exponent> {
    fn rec(n: usize, d: i64, prefix: &mut Vec<i64>, out: &mut Vec<Exponent>) {
        if prefix.len() + 1 == n {
            prefix.push(d);
            out.push(Exponent(prefix.clone()));
            prefix.pop();
            return;
        }
        for a in 0..=d {
            prefix.push(a);
            rec(n, d - a, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if n == 0 {
        if d == 0 {
            out.push(Exponent(vec![]));
        }
        return out;
    }
    rec(n, d, &mut Vec::with_capacity(n), &mut out);
    out.sort_by(|a, b| degrevlex_cmp(a, b));
    out
}

fn monomial_count(n: usize, d: usize) -> usize {
    // C(d + n, n)
    (1..=n).fold(1usize, |acc, i| acc * (d + i) / i)
}

/// All monomials of degree `≤ D`, indexed by degree and then degrevlex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TruncatedLocalAlgebra {
    nvars: usize,
    d: usize,
    monomials: Vec<Exponent>,
    index: HashMap<Exponent, usize>,
}

impl TruncatedLocalAlgebra {
    pub fn new(nvars: usize, d: usize) -> Self {
        let monomials: Vec<Exponent> = (0..=d as i64).flat_map(|k| monomials_of_degree(nvars, k)).collect();
        let index = monomials.iter().enumerate().map(|(i, m)| (m.clone(), i)).collect();
        TruncatedLocalAlgebra { nvars, d, monomials, index }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn truncation(&self) -> usize {
        self.d
    }

    pub fn monomials(&self) -> &[Exponent] {
        &self.monomials
    }

    pub fn index_of(&self, m: &Exponent) -> Option<usize> {
        self.index.get(m).copied()
    }

    /// Coordinates of `p` mod `𝔪^(D+1)`.
    pub fn to_vec(&self, p: &SparsePoly) -> SparseVec {
        p.terms().filter_map(|(e, c)| self.index_of(e).map(|i| (i, c.clone()))).collect()
    }

    pub fn from_vec(&self, v: &SparseVec) -> SparsePoly {
        SparsePoly::from_terms(self.nvars, v.iter().map(|(&i, c)| (self.monomials[i].clone(), c.clone())))
    }
}

/// The image of an ideal in `P/𝔪^(D+1)`.
#[derive(Clone, Debug)]
pub struct IdealSpan {
    pub algebra: TruncatedLocalAlgebra,
    pub generators: Vec<SparsePoly>,
    echelon: Echelon,
    /// `(generator index, multiplier exponent)` for every inserted row.
    provenance: Vec<(usize, Exponent)>,
    /// Smallest `D₀` with all degree-`D₀` monomials in the span.
    pub m_power_bound: Option<usize>,
}

fn common_nvars(gens: &[SparsePoly]) -> Result<usize> {
    let n = gens.first().map(SparsePoly::nvars).ok_or_else(|| Error::Precondition("no generators".into()))?;
    if gens.iter().any(|g| g.nvars() != n) {
        return Err(Error::Dimension("generators in different rings".into()));
    }
    Ok(n)
}

pub fn build_ideal(gens: &[SparsePoly], d: usize) -> Result<IdealSpan> {
    build(gens, d, false)
}

fn build(gens: &[SparsePoly], d: usize, track: bool) -> Result<IdealSpan> {
    let n = common_nvars(gens)?;
    if gens.iter().any(|g| !g.coeff(&Exponent::zeros(n)).is_zero()) {
        return Err(Error::Precondition("generators must vanish at the origin".into()));
    }
    let algebra = TruncatedLocalAlgebra::new(n, d);
    let mut echelon = if track { Echelon::with_provenance() } else { Echelon::new() };
    let mut provenance = Vec::new();
    for (j, g) in gens.iter().enumerate() {
        let Some(ord) = g.order() else { continue };
        for k in 0..=(d as i64 - ord) {
            for alpha in monomials_of_degree(n, k) {
                let v = algebra.to_vec(&g.mul_monomial(&alpha));
                echelon.insert(v);
                provenance.push((j, alpha));
            }
        }
    }
    let m_power_bound = (1..=d).find(|&d0| {
        monomials_of_degree(n, d0 as i64)
            .iter()
            .all(|m| echelon.contains(&SparseVec::from([(algebra.index_of(m).expect("in range"), q(1))])))
    });
    Ok(IdealSpan { algebra, generators: gens.to_vec(), echelon, provenance, m_power_bound })
}

/// Builds the span with `D` escalating from `2·deg` until `D₀` is certified,
/// then settles on `D = D₀ + 4`. An explicit `d` is used as is.
pub fn certified_ideal(gens: &[SparsePoly], d: Option<usize>) -> Result<IdealSpan> {
    certified(gens, d, false)
}

fn certified(gens: &[SparsePoly], d: Option<usize>, track: bool) -> Result<IdealSpan> {
    let n = common_nvars(gens)?;
    if let Some(d) = d {
        let span = build(gens, d, track)?;
        span.d0()?;
        return Ok(span);
    }
    let maxdeg = gens.iter().filter_map(SparsePoly::total_degree).max().unwrap_or(1).max(1) as usize;
    let mut d = 2 * maxdeg;
    loop {
        let span = build(gens, d, track)?;
        if let Some(d0) = span.m_power_bound {
            return if d0 + 4 == d { Ok(span) } else { build(gens, d0 + 4, track) };
        }
        d += maxdeg;
        if monomial_count(n, d) > MONOMIAL_CAP {
            return Err(Error::InfiniteColength);
        }
    }
}

impl IdealSpan {
    pub fn truncation(&self) -> usize {
        self.algebra.truncation()
    }

    pub fn d0(&self) -> Result<usize> {
        self.m_power_bound.ok_or_else(|| {
            Error::IncreaseTruncation(format!("no power of 𝔪 certified inside the ideal at D = {}", self.truncation()))
        })
    }

    pub fn span_rank(&self) -> usize {
        self.echelon.rank()
    }

    fn check_ring(&self, h: &SparsePoly) -> Result<()> {
        if h.nvars() != self.algebra.nvars() {
            return Err(Error::Dimension("polynomial in a different ring".into()));
        }
        Ok(())
    }

    /// Reduced coordinates of `h` on the standard monomials.
    pub fn normal_form(&self, h: &SparsePoly) -> Result<SparsePoly> {
        self.d0()?;
        self.check_ring(h)?;
        Ok(self.algebra.from_vec(&self.echelon.reduce(&self.algebra.to_vec(h))))
    }

    pub fn member(&self, h: &SparsePoly) -> Result<bool> {
        Ok(self.normal_form(h)?.is_zero())
    }

    /// Monomials not in the leading-term span; a basis of `P/I`.
    pub fn standard_monomials(&self) -> Result<Vec<Exponent>> {
        let d0 = self.d0()?;
        Ok(self
            .algebra
            .monomials()
            .iter()
            .enumerate()
            .filter(|(i, m)| m.degree() < d0 as i64 && !self.echelon.is_pivot(*i))
            .map(|(_, m)| m.clone())
            .collect())
    }

    pub fn colength(&self) -> Result<usize> {
        Ok(self.standard_monomials()?.len())
    }

    fn coordinates(&self, basis: &[Exponent], h: &SparsePoly) -> Result<Vec<Q>> {
        let nf = self.normal_form(h)?;
        Ok(basis.iter().map(|b| nf.coeff(b)).collect())
    }

    /// Writes `h ≡ Σ_j a_j·g_j (mod 𝔪^(D+1))`; `None` if `h` is not in the span.
    fn express(&self, h: &SparsePoly) -> Result<Option<Vec<SparsePoly>>> {
        self.check_ring(h)?;
        let (rest, combo) = self.echelon.reduce_with_combo(&self.algebra.to_vec(h));
        if !rest.is_empty() {
            return Ok(None);
        }
        let n = self.algebra.nvars();
        let mut out = vec![SparsePoly::zero(n); self.generators.len()];
        for (id, c) in combo {
            let (j, alpha) = &self.provenance[id];
            out[*j].add_term(alpha.clone(), c);
        }
        Ok(Some(out))
    }
}

pub fn member(h: &SparsePoly, ideal: &IdealSpan) -> Result<bool> {
    ideal.member(h)
}

/// A basis of `{[h] ∈ P/I : x_i·h ∈ I for all i}`.
pub fn socle(ideal: &IdealSpan) -> Result<Vec<SparsePoly>> {
    let basis = ideal.standard_monomials()?;
    let n = ideal.algebra.nvars();
    let mut rows: linalg::Matrix = Vec::new();
    for i in 0..n {
        let cols: Vec<Vec<Q>> = basis
            .iter()
            .map(|b| ideal.coordinates(&basis, &SparsePoly::monomial(b.add(&Exponent::unit(n, i)), q(1))))
            .collect::<Result<_>>()?;
        for r in 0..basis.len() {
            rows.push(cols.iter().map(|c| c[r].clone()).collect());
        }
    }
    let kernel = if rows.is_empty() {
        (0..basis.len()).map(|i| (0..basis.len()).map(|j| q((i == j) as i64)).collect()).collect()
    } else {
        linalg::nullspace(&rows, basis.len())
    };
    Ok(kernel
        .into_iter()
        .map(|v| SparsePoly::from_terms(n, basis.iter().cloned().zip(v).filter(|(_, c)| !c.is_zero())))
        .collect())
}

/// The ideal `i = (x_1 f_{x_1}, …, x_n f_{x_n})`.
pub fn log_jacobian_generators(f: &SparsePoly) -> Vec<SparsePoly> {
    (0..f.nvars()).map(|i| f.log_derivative(i)).collect()
}

/// The Jacobian ideal `j = (f_{x_1}, …, f_{x_n})`.
pub fn jacobian_generators(f: &SparsePoly) -> Vec<SparsePoly> {
    (0..f.nvars()).map(|i| f.derivative(i)).collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SocleOrderReport {
    pub socle_basis: Vec<SparsePoly>,
    #[serde(with = "serde_q")]
    pub nu_socle: Q,
    #[serde(with = "serde_q")]
    pub n_minus_nu_x: Q,
    #[serde(rename = "match")]
    pub matches: bool,
    pub colength: usize,
    pub truncation: usize,
}

fn finite_nu(delta: &NewtonPolyhedron, m: &[i64]) -> Result<Q> {
    match delta.nu_point(m) {
        NewtonOrder::Finite(v) => Ok(v),
        NewtonOrder::Infinite => Err(Error::AxisCondition(0)),
    }
}

/// The induced Newton order of the socle of `P/i`: the largest `t` for
/// which some nonzero socle coset has a representative with `ν ≥ t`.
///
/// For each threshold `t` (the finitely many values `ν(m)`, `|m| ≤ D`) the
/// image `U_t` of `span{x^m : ν(m) ≥ t}` in `P/i` is formed exactly, and
/// `S ∩ U_t ≠ 0` is tested by ranks.
pub fn socle_newton_order(f: &SparsePoly, d: Option<usize>) -> Result<SocleOrderReport> {
    let n = f.nvars();
    if f.order().unwrap_or(0) < 2 {
        return Err(Error::OrderTooSmall);
    }
    let delta = NewtonPolyhedron::of(f)?;
    delta.check_axis_condition()?;
    let ideal = certified_ideal(&log_jacobian_generators(f), d)?;
    let basis = ideal.standard_monomials()?;
    let socle_polys = socle(&ideal)?;
    let index: BTreeMap<&Exponent, usize> = basis.iter().enumerate().map(|(i, b)| (b, i)).collect();
    let as_vec = |p: &SparsePoly| -> SparseVec { p.terms().map(|(e, c)| (index[e], c.clone())).collect() };

    let mut by_level: BTreeMap<Q, Vec<&Exponent>> = BTreeMap::new();
    for m in ideal.algebra.monomials() {
        by_level.entry(finite_nu(&delta, m)?).or_default().push(m);
    }
    let mut u = Echelon::new();
    let mut su = Echelon::new();
    for s in &socle_polys {
        su.insert(as_vec(s));
    }
    let dim_s = socle_polys.len();
    let mut nu_socle = None;
    for (t, ms) in by_level.iter().rev() {
        for m in ms {
            let nf = ideal.normal_form(&SparsePoly::monomial((*m).clone(), q(1)))?;
            let v = as_vec(&nf);
            u.insert(v.clone());
            su.insert(v);
        }
        if dim_s + u.rank() > su.rank() {
            nu_socle = Some(t.clone());
            break;
        }
    }
    let nu_socle = nu_socle.ok_or_else(|| Error::TheoremViolation("socle meets no ν-level".into()))?;
    let n_minus_nu_x = q(n as i64) - finite_nu(&delta, &Exponent::ones(n))?;
    Ok(SocleOrderReport {
        matches: nu_socle == n_minus_nu_x,
        socle_basis: socle_polys,
        nu_socle,
        n_minus_nu_x,
        colength: basis.len(),
        truncation: ideal.truncation(),
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct JacobianReport {
    /// `x₁⋯x_n·f_{x_i} ∈ i` for every `i`.
    pub well_defined: bool,
    /// The images of a basis of `P/j` are independent mod `i`.
    pub injective: bool,
    pub jacobian_basis: Vec<Exponent>,
    pub image_rank: usize,
    pub colength_i: usize,
    pub colength_j: usize,
}

/// Checks that multiplication by `x₁⋯x_n` maps `P/j` into `P/i` and is
/// injective there.
pub fn jacobian_multiplication_check(f: &SparsePoly, d: Option<usize>) -> Result<JacobianReport> {
    if f.order().unwrap_or(0) < 2 {
        return Err(Error::OrderTooSmall);
    }
    let n = f.nvars();
    let i_ideal = certified_ideal(&log_jacobian_generators(f), d)?;
    let j_ideal = certified_ideal(&jacobian_generators(f), d)?;
    let x = Exponent::ones(n);
    let mut well_defined = true;
    for fx in jacobian_generators(f) {
        well_defined &= i_ideal.member(&fx.mul_monomial(&x))?;
    }
    let jb = j_ideal.standard_monomials()?;
    let ib = i_ideal.standard_monomials()?;
    let index: BTreeMap<&Exponent, usize> = ib.iter().enumerate().map(|(k, b)| (b, k)).collect();
    let mut ech = Echelon::new();
    for b in &jb {
        let nf = i_ideal.normal_form(&SparsePoly::monomial(b.add(&x), q(1)))?;
        ech.insert(nf.terms().map(|(e, c)| (index[e], c.clone())).collect());
    }
    Ok(JacobianReport {
        well_defined,
        injective: ech.rank() == jb.len(),
        image_rank: ech.rank(),
        colength_i: ib.len(),
        colength_j: jb.len(),
        jacobian_basis: jb,
    })
}

/// Membership `h ∈ i` under the hypothesis `supp(x₁⋯x_n·h) ⊆ nΔ°`.
pub fn verify_theorem_0_1_part1(f: &SparsePoly, h: &SparsePoly, d: Option<usize>) -> Result<bool> {
    if h.is_zero() {
        return Ok(true);
    }
    let n = f.nvars();
    let delta = NewtonPolyhedron::of(f)?;
    let g = h.mul_monomial(&Exponent::ones(n));
    let nn = q(n as i64);
    if let Some(m) = g.support().find(|m| !delta.dilate_interior_contains(m, &nn)) {
        return Err(Error::Precondition(format!("g not in nΔ°: monomial {:?}", m.0)));
    }
    let ideal = certified_ideal(&log_jacobian_generators(f), d)?;
    ideal.member(h)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Part1Report {
    /// Monomials `x^m` with `m ∈ nΔ°`, `m ≥ 1`, below the certified degree.
    pub candidates: usize,
    pub samples: usize,
    pub members: usize,
    /// Exponents of `h` that were not found in `i`.
    pub failures: Vec<Exponent>,
}

/// Samples monomials `h` with `x₁⋯x_n·h` strictly inside `nΔ` and tests
/// `h ∈ i`. Above degree `D₀` membership is automatic, so candidates are
/// drawn from `|m| ≤ D₀ + n`.
pub fn part1_suite(f: &SparsePoly, samples: usize, seed: u64, d: Option<usize>) -> Result<Part1Report> {
    use rand::{Rng, SeedableRng};
    let n = f.nvars();
    let delta = NewtonPolyhedron::of(f)?;
    let ideal = certified_ideal(&log_jacobian_generators(f), d)?;
    let bound = (ideal.d0()? + n) as i64;
    let nn = q(n as i64);
    let candidates: Vec<Vec<i64>> = crate::polylattice::box_points(&vec![1; n], &vec![bound; n])
        .into_iter()
        .filter(|m| m.iter().sum::<i64>() <= bound && delta.dilate_interior_contains(m, &nn))
        .collect();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut report = Part1Report { candidates: candidates.len(), samples: 0, members: 0, failures: vec![] };
    if candidates.is_empty() {
        return Ok(report);
    }
    for _ in 0..samples {
        let m = &candidates[rng.gen_range(0..candidates.len())];
        let h = Exponent(m.iter().map(|x| x - 1).collect());
        report.samples += 1;
        if ideal.member(&SparsePoly::monomial(h.clone(), q(1)))? {
            report.members += 1;
        } else {
            report.failures.push(h);
        }
    }
    Ok(report)
}

pub(crate) fn certified_with_provenance(gens: &[SparsePoly], d: Option<usize>) -> Result<IdealSpan> {
    certified(gens, d, true)
}

pub(crate) fn express(ideal: &IdealSpan, h: &SparsePoly) -> Result<Option<Vec<SparsePoly>>> {
    ideal.express(h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::qr;

    fn poly(s: &str, n: usize) -> SparsePoly {
        SparsePoly::parse_any(s, Some(n)).unwrap()
    }

    fn mono(e: &[i64]) -> SparsePoly {
        SparsePoly::monomial(Exponent(e.to_vec()), q(1))
    }

    #[test]
    fn algebra_indexing() {
        let a = TruncatedLocalAlgebra::new(2, 3);
        assert_eq!(a.monomials().len(), 10);
        assert_eq!(a.monomials()[0], Exponent(vec![0, 0]));
        for (i, m) in a.monomials().iter().enumerate() {
            assert_eq!(a.index_of(m), Some(i));
        }
        assert_eq!(monomial_count(3, 4), 35);
    }

    #[test]
    fn d0_examples() {
        let i = build_ideal(&[poly("2*x1^2", 2), poly("3*x2^3", 2)], 8).unwrap();
        assert_eq!(i.m_power_bound, Some(4));
        let m = build_ideal(&[poly("x1", 2), poly("x2", 2)], 3).unwrap();
        assert_eq!(m.m_power_bound, Some(1));
        let j = build_ideal(&jacobian_generators(&poly("x1^2 + x2^2", 2)), 4).unwrap();
        assert_eq!(j.m_power_bound, Some(1));
        let none = build_ideal(&[poly("x1^2", 2)], 6).unwrap();
        assert_eq!(none.m_power_bound, None);
        assert!(matches!(none.member(&poly("x1^2", 2)), Err(Error::IncreaseTruncation(_))));
    }

    #[test]
    fn membership_examples() {
        let i = certified_ideal(&[poly("2*x1^2", 2), poly("3*x2^3", 2)], None).unwrap();
        assert!(i.member(&poly("x1^2*x2^2", 2)).unwrap());
        assert!(!i.member(&poly("x1*x2^2", 2)).unwrap());
        assert!(i.member(&SparsePoly::zero(2)).unwrap());
        assert_eq!(i.colength().unwrap(), 6);
    }

    #[test]
    fn socle_examples() {
        let i = certified_ideal(&[poly("2*x1^2", 2), poly("3*x2^3", 2)], None).unwrap();
        assert_eq!(socle(&i).unwrap(), vec![mono(&[1, 2])]);
        let i = certified_ideal(&[poly("2*x1^2", 2), poly("2*x2^2", 2)], None).unwrap();
        assert_eq!(socle(&i).unwrap(), vec![mono(&[1, 1])]);
        let m = certified_ideal(&[poly("x1", 2), poly("x2", 2)], None).unwrap();
        assert_eq!(socle(&m).unwrap(), vec![SparsePoly::one(2)]);
    }

    #[test]
    fn socle_order_examples() {
        let r = socle_newton_order(&poly("x1^2 + x2^3", 2), None).unwrap();
        assert_eq!(r.nu_socle, qr(7, 6));
        assert!(r.matches);
        let r = socle_newton_order(&poly("x1^2 + x2^2", 2), None).unwrap();
        assert_eq!(r.nu_socle, q(1));
        let r = socle_newton_order(&poly("x1^2 + x2^2 + x3^2", 3), None).unwrap();
        assert_eq!(r.nu_socle, qr(3, 2));
        assert_eq!(r.socle_basis.len(), 1);
    }

    #[test]
    fn socle_order_is_truncation_stable() {
        let f = poly("x1^2 + x1*x2 + x2^3", 2);
        let a = socle_newton_order(&f, None).unwrap();
        let b = socle_newton_order(&f, Some(a.truncation + 2)).unwrap();
        assert_eq!(a.nu_socle, b.nu_socle);
        assert!(a.matches);
    }

    #[test]
    fn jacobian_examples() {
        let r = jacobian_multiplication_check(&poly("x1^2 + x2^3", 2), None).unwrap();
        assert_eq!(r.jacobian_basis, vec![Exponent(vec![0, 0]), Exponent(vec![0, 1])]);
        assert!(r.well_defined && r.injective);
        let r = jacobian_multiplication_check(&poly("x1^2 + x2^2", 2), None).unwrap();
        assert_eq!(r.colength_j, 1);
        assert!(r.injective);
        let r = jacobian_multiplication_check(&poly("x1^2 + x1*x2 + x2^2", 2), None).unwrap();
        assert_eq!(r.colength_j, 1);
        assert!(r.well_defined && r.injective);
    }

    #[test]
    fn part1_examples() {
        let f = poly("x1^2 + x2^3", 2);
        assert!(verify_theorem_0_1_part1(&f, &poly("x1^2*x2^2", 2), None).unwrap());
        assert!(matches!(verify_theorem_0_1_part1(&f, &poly("x1*x2^2", 2), None), Err(Error::Precondition(_))));
        assert!(verify_theorem_0_1_part1(&f, &SparsePoly::zero(2), None).unwrap());
    }

    #[test]
    fn part1_suite_has_no_failures() {
        let r = part1_suite(&poly("x1^2 + x1*x2 + x2^3", 2), 40, 9, None).unwrap();
        assert!(r.candidates > 0);
        assert_eq!(r.members, 40);
    }

    #[test]
    fn express_reconstructs() {
        let gens = [poly("2*x1^2 + x1*x2", 2), poly("x1*x2 + 3*x2^3", 2)];
        let i = certified_with_provenance(&gens, None).unwrap();
        let h = poly("x1^5", 2);
        let a = express(&i, &h).unwrap().unwrap();
        let back = a.iter().zip(&gens).fold(SparsePoly::zero(2), |acc, (x, g)| &acc + &(x * g));
        assert_eq!(back.truncate(i.truncation() as i64), h);
    }
}
