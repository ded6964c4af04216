//! Buchberger's algorithm in degree-reverse-lexicographic order over `ℚ`
//! and prime fields, used to decide whether face systems have a common zero
//! in the torus.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt::Debug;

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::arith::{q, Q};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::poly::{degrevlex_cmp, Exponent, SparsePoly};
use crate::polylattice::NewtonPolyhedron;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FieldSpec {
    Rational,
    Prime(u64),
}

trait Coeffs: Sync {
    type E: Clone + PartialEq + Debug + Send + Sync;
    fn zero(&self) -> Self::E;
    fn one(&self) -> Self::E;
    fn is_zero(&self, a: &Self::E) -> bool;
    fn sub(&self, a: &Self::E, b: &Self::E) -> Self::E;
    fn mul(&self, a: &Self::E, b: &Self::E) -> Self::E;
    fn inv(&self, a: &Self::E) -> Self::E;
    fn from_q(&self, a: &Q) -> Result<Self::E>;
    fn to_q(&self, a: &Self::E) -> Q;
}

struct Rationals;

impl Coeffs for Rationals {
    type E = Q;
    fn zero(&self) -> Q {
        Q::zero()
    }
    fn one(&self) -> Q {
        Q::one()
    }
    fn is_zero(&self, a: &Q) -> bool {
        a.is_zero()
    }
    fn sub(&self, a: &Q, b: &Q) -> Q {
        a - b
    }
    fn mul(&self, a: &Q, b: &Q) -> Q {
        a * b
    }
    fn inv(&self, a: &Q) -> Q {
        a.recip()
    }
    fn from_q(&self, a: &Q) -> Result<Q> {
        Ok(a.clone())
    }
    fn to_q(&self, a: &Q) -> Q {
        a.clone()
    }
}

struct PrimeField(u64);

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1u64 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = ((r as u128 * b as u128) % m as u128) as u64;
        }
        b = ((b as u128 * b as u128) % m as u128) as u64;
        e >>= 1;
    }
    r
}

fn bigint_mod(x: &BigInt, p: u64) -> u64 {
    let m = BigInt::from(p);
    let r = ((x % &m) + &m) % &m;
    r.to_u64().expect("residue fits")
}

impl Coeffs for PrimeField {
    type E = u64;
    fn zero(&self) -> u64 {
        0
    }
    fn one(&self) -> u64 {
        1
    }
    fn is_zero(&self, a: &u64) -> bool {
        *a == 0
    }
    fn sub(&self, a: &u64, b: &u64) -> u64 {
        (a + self.0 - b) % self.0
    }
    fn mul(&self, a: &u64, b: &u64) -> u64 {
        ((*a as u128 * *b as u128) % self.0 as u128) as u64
    }
    fn inv(&self, a: &u64) -> u64 {
        pow_mod(*a, self.0 - 2, self.0)
    }
    fn from_q(&self, a: &Q) -> Result<u64> {
        let d = bigint_mod(a.denom(), self.0);
        if d == 0 {
            return Err(Error::FieldMismatch(format!("{} divides a denominator", self.0)));
        }
        Ok(self.mul(&bigint_mod(a.numer(), self.0), &self.inv(&d)))
    }
    fn to_q(&self, a: &u64) -> Q {
        q(*a as i64)
    }
}

/// Terms sorted by decreasing degrevlex order.
#[derive(Clone, Debug, PartialEq)]
struct Poly<E> {
    terms: Vec<(Vec<i64>, E)>,
}

fn desc(a: &[i64], b: &[i64]) -> Ordering {
    degrevlex_cmp(b, a)
}

fn divides(a: &[i64], b: &[i64]) -> bool {
    a.iter().zip(b).all(|(x, y)| x <= y)
}

fn lcm_mon(a: &[i64], b: &[i64]) -> Vec<i64> {
    a.iter().zip(b).map(|(x, y)| *x.max(y)).collect()
}

fn coprime(a: &[i64], b: &[i64]) -> bool {
    a.iter().zip(b).all(|(x, y)| *x == 0 || *y == 0)
}

impl<E: Clone + PartialEq + Debug> Poly<E> {
    fn lm(&self) -> &[i64] {
        &self.terms[0].0
    }
    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

/// `a - c·x^m·b`.
fn sub_mul<K: Coeffs>(k: &K, a: &Poly<K::E>, c: &K::E, m: &[i64], b: &Poly<K::E>) -> Poly<K::E> {
    let mut out = Vec::with_capacity(a.terms.len() + b.terms.len());
    let shifted: Vec<(Vec<i64>, K::E)> = b
        .terms
        .iter()
        .map(|(e, v)| (e.iter().zip(m).map(|(x, y)| x + y).collect(), k.mul(c, v)))
        .collect();
    let (mut i, mut j) = (0, 0);
    while i < a.terms.len() || j < shifted.len() {
        let ord = if i == a.terms.len() {
            Ordering::Greater
        } else if j == shifted.len() {
            Ordering::Less
        } else {
            desc(&a.terms[i].0, &shifted[j].0)
        };
        match ord {
            Ordering::Less => {
                out.push(a.terms[i].clone());
                i += 1;
            }
            Ordering::Greater => {
                out.push((shifted[j].0.clone(), k.sub(&k.zero(), &shifted[j].1)));
                j += 1;
            }
            Ordering::Equal => {
                let v = k.sub(&a.terms[i].1, &shifted[j].1);
                if !k.is_zero(&v) {
                    out.push((a.terms[i].0.clone(), v));
                }
                i += 1;
                j += 1;
            }
        }
    }
    Poly { terms: out }
}

fn monic<K: Coeffs>(k: &K, p: Poly<K::E>) -> Poly<K::E> {
    if p.is_zero() {
        return p;
    }
    let inv = k.inv(&p.terms[0].1);
    Poly { terms: p.terms.into_iter().map(|(e, v)| (e, k.mul(&v, &inv))).collect() }
}

fn normal_form<K: Coeffs>(k: &K, f: &Poly<K::E>, g: &[Poly<K::E>]) -> Poly<K::E> {
    let mut f = f.clone();
    let mut rem: Vec<(Vec<i64>, K::E)> = Vec::new();
    while !f.is_zero() {
        let (lm, lc) = f.terms[0].clone();
        if let Some(d) = g.iter().find(|d| divides(d.lm(), &lm)) {
            let m: Vec<i64> = lm.iter().zip(d.lm()).map(|(x, y)| x - y).collect();
            let c = k.mul(&lc, &k.inv(&d.terms[0].1));
            f = sub_mul(k, &f, &c, &m, d);
        } else {
            rem.push(f.terms.remove(0));
        }
    }
    Poly { terms: rem }
}

fn s_poly<K: Coeffs>(k: &K, a: &Poly<K::E>, b: &Poly<K::E>) -> Poly<K::E> {
    let l = lcm_mon(a.lm(), b.lm());
    let ma: Vec<i64> = l.iter().zip(a.lm()).map(|(x, y)| x - y).collect();
    let mb: Vec<i64> = l.iter().zip(b.lm()).map(|(x, y)| x - y).collect();
    let zero = Poly { terms: Vec::new() };
    let left = sub_mul(k, &zero, &k.sub(&k.zero(), &k.inv(&a.terms[0].1)), &ma, a);
    sub_mul(k, &left, &k.inv(&b.terms[0].1), &mb, b)
}

fn buchberger_generic<K: Coeffs>(k: &K, gens: Vec<Poly<K::E>>) -> Vec<Poly<K::E>> {
    let mut g: Vec<Poly<K::E>> = gens.into_iter().filter(|p| !p.is_zero()).map(|p| monic(k, p)).collect();
    if g.iter().any(|p| p.lm().iter().all(|&x| x == 0)) {
        let n = g[0].lm().len();
        return vec![Poly { terms: vec![(vec![0; n], k.one())] }];
    }
    let mut pending: BTreeSet<(usize, usize)> = BTreeSet::new();
    for j in 0..g.len() {
        for i in 0..j {
            pending.insert((i, j));
        }
    }
    while !pending.is_empty() {
        // normal selection strategy: smallest lcm first
        let &(i, j) = pending
            .iter()
            .min_by(|a, b| {
                let la = lcm_mon(g[a.0].lm(), g[a.1].lm());
                let lb = lcm_mon(g[b.0].lm(), g[b.1].lm());
                degrevlex_cmp(&la, &lb).then(a.cmp(b))
            })
            .expect("nonempty");
        pending.remove(&(i, j));
        if coprime(g[i].lm(), g[j].lm()) {
            continue;
        }
        let l = lcm_mon(g[i].lm(), g[j].lm());
        let key = |a: usize, b: usize| (a.min(b), a.max(b));
        let chain = (0..g.len()).any(|t| {
            t != i
                && t != j
                && divides(g[t].lm(), &l)
                && !pending.contains(&key(i, t))
                && !pending.contains(&key(j, t))
        });
        if chain {
            continue;
        }
        let h = monic(k, normal_form(k, &s_poly(k, &g[i], &g[j]), &g));
        if h.is_zero() {
            continue;
        }
        if h.lm().iter().all(|&x| x == 0) {
            return vec![h];
        }
        let new = g.len();
        g.push(h);
        for t in 0..new {
            pending.insert((t, new));
        }
    }
    // reduced basis
    let mut minimal: Vec<Poly<K::E>> = Vec::new();
    for (idx, p) in g.iter().enumerate() {
        let redundant = g.iter().enumerate().any(|(o, r)| {
            o != idx && divides(r.lm(), p.lm()) && (r.lm() != p.lm() || o < idx)
        });
        if !redundant {
            minimal.push(p.clone());
        }
    }
    let mut reduced: Vec<Poly<K::E>> = (0..minimal.len())
        .map(|i| {
            let others: Vec<Poly<K::E>> =
                minimal.iter().enumerate().filter(|&(o, _)| o != i).map(|(_, p)| p.clone()).collect();
            let head = Poly { terms: vec![minimal[i].terms[0].clone()] };
            let tail = Poly { terms: minimal[i].terms[1..].to_vec() };
            let mut t = normal_form(k, &tail, &others).terms;
            let mut terms = head.terms;
            terms.append(&mut t);
            Poly { terms }
        })
        .collect();
    reduced.sort_by(|a, b| desc(a.lm(), b.lm()));
    reduced
}

fn to_internal<K: Coeffs>(k: &K, p: &SparsePoly) -> Result<Poly<K::E>> {
    let mut terms: Vec<(Vec<i64>, K::E)> = Vec::new();
    for (e, c) in p.terms() {
        let v = k.from_q(c)?;
        if !k.is_zero(&v) {
            terms.push((e.0.clone(), v));
        }
    }
    terms.sort_by(|a, b| desc(&a.0, &b.0));
    Ok(Poly { terms })
}

fn to_sparse<K: Coeffs>(k: &K, p: &Poly<K::E>, n: usize) -> SparsePoly {
    SparsePoly::from_terms(n, p.terms.iter().map(|(e, v)| (Exponent(e.clone()), k.to_q(v))))
}

/// A reduced Gröbner basis in degrevlex order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GB {
    pub generators: Vec<SparsePoly>,
    pub field: FieldSpec,
    #[serde(skip)]
    nvars: usize,
}

fn check_vars(gens: &[SparsePoly]) -> Result<usize> {
    let n = gens.first().map(SparsePoly::nvars).ok_or_else(|| Error::Precondition("empty generator list".into()))?;
    if gens.iter().any(|g| g.nvars() != n) {
        return Err(Error::Dimension("generators in different rings".into()));
    }
    Ok(n)
}

pub fn buchberger(gens: &[SparsePoly], field: FieldSpec) -> Result<GB> {
    let n = check_vars(gens)?;
    let generators = match field {
        FieldSpec::Rational => run(&Rationals, gens, n)?,
        FieldSpec::Prime(p) => {
            if !is_prime(p) {
                return Err(Error::FieldMismatch(format!("{p} is not prime")));
            }
            run(&PrimeField(p), gens, n)?
        }
    };
    Ok(GB { generators, field, nvars: n })
}

fn run<K: Coeffs>(k: &K, gens: &[SparsePoly], n: usize) -> Result<Vec<SparsePoly>> {
    let internal: Vec<Poly<K::E>> = gens.iter().map(|g| to_internal(k, g)).collect::<Result<_>>()?;
    Ok(buchberger_generic(k, internal).iter().map(|p| to_sparse(k, p, n)).collect())
}

impl GB {
    pub fn is_unit(&self) -> bool {
        self.generators.len() == 1 && self.generators[0].support().all(|e| e.degree() == 0)
    }

    pub fn reduce(&self, f: &SparsePoly) -> Result<SparsePoly> {
        match self.field {
            FieldSpec::Rational => self.reduce_in(&Rationals, f),
            FieldSpec::Prime(p) => self.reduce_in(&PrimeField(p), f),
        }
    }

    fn reduce_in<K: Coeffs>(&self, k: &K, f: &SparsePoly) -> Result<SparsePoly> {
        if f.nvars() != self.nvars {
            return Err(Error::Dimension("polynomial in a different ring".into()));
        }
        let g: Vec<Poly<K::E>> = self.generators.iter().map(|p| to_internal(k, p)).collect::<Result<_>>()?;
        Ok(to_sparse(k, &normal_form(k, &to_internal(k, f)?, &g), self.nvars))
    }

    pub fn contains(&self, f: &SparsePoly) -> Result<bool> {
        Ok(self.reduce(f)?.is_zero())
    }
}

/// Deterministic Miller–Rabin for 64-bit integers.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let (mut d, mut s) = (n - 1, 0);
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = ((x as u128 * x as u128) % n as u128) as u64;
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// A uniformly random prime in `[2^30, 2^31)`.
pub fn random_prime<R: Rng>(rng: &mut R) -> u64 {
    loop {
        let c = rng.gen_range((1u64 << 30)..(1u64 << 31)) | 1;
        if is_prime(c) {
            return c;
        }
    }
}

/// Over `F̄_p`: do the polynomials have a common zero with all `x_i ≠ 0`?
/// Decided by adjoining `t·x₁⋯x_n - 1` and testing for the unit ideal.
pub fn torus_has_zero(polys: &[SparsePoly], p: u64) -> Result<bool> {
    let n = check_vars(polys)?;
    let mut gens: Vec<SparsePoly> = polys
        .iter()
        .map(|f| SparsePoly::from_terms(n + 1, f.terms().map(|(e, c)| {
            let mut e = e.0.clone();
            e.push(0);
            (Exponent(e), c.clone())
        })))
        .collect();
    let mut rab = SparsePoly::monomial(Exponent(vec![1; n + 1]), q(1));
    rab.add_term(Exponent::zeros(n + 1), q(-1));
    gens.push(rab);
    Ok(!buchberger(&gens, FieldSpec::Prime(p))?.is_unit())
}

/// Settings for the random-prime decision procedure.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonteCarlo {
    pub primes: usize,
    pub seed: u64,
}

impl Default for MonteCarlo {
    fn default() -> Self {
        MonteCarlo { primes: 3, seed: 0 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TorusVerdict {
    pub has_zero: bool,
    pub method: String,
    pub primes: Vec<u64>,
    pub per_prime: Vec<bool>,
}

fn trivially_decided(polys: &[SparsePoly]) -> Option<bool> {
    if polys.iter().any(|p| !p.is_zero() && p.is_monomial()) {
        return Some(false);
    }
    if polys.iter().all(SparsePoly::is_zero) {
        return Some(true);
    }
    None
}

/// Torus-zero test aggregated over several random primes; a disagreement is
/// retried once with fresh primes and otherwise reported as an error.
pub fn torus_has_zero_mc(polys: &[SparsePoly], mc: &MonteCarlo, exec: Execution) -> Result<TorusVerdict> {
    if let Some(v) = trivially_decided(polys) {
        return Ok(TorusVerdict { has_zero: v, method: "monomial".into(), primes: vec![], per_prime: vec![] });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(mc.seed);
    let mut last = String::new();
    for _attempt in 0..2 {
        let primes: Vec<u64> = (0..mc.primes.max(1)).map(|_| random_prime(&mut rng)).collect();
        let results = exec.map(&primes, |&p| torus_has_zero(polys, p));
        let mut used = Vec::new();
        let mut verdicts = Vec::new();
        for (p, r) in primes.iter().zip(results) {
            match r {
                Ok(v) => {
                    used.push(*p);
                    verdicts.push(v);
                }
                Err(Error::FieldMismatch(_)) => {}
                Err(e) => return Err(e),
            }
        }
        if verdicts.is_empty() {
            last = "every sampled prime divides a denominator".into();
            continue;
        }
        if verdicts.iter().all(|v| *v == verdicts[0]) {
            return Ok(TorusVerdict { has_zero: verdicts[0], method: "groebner".into(), primes: used, per_prime: verdicts });
        }
        last = format!("primes {used:?} gave {verdicts:?}");
    }
    Err(Error::MonteCarloDisagreement(last))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FaceVerdict {
    pub vertices: Vec<Exponent>,
    pub dim: usize,
    pub verdict: TorusVerdict,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NondegReport {
    pub nondegenerate: bool,
    pub axis_condition: bool,
    pub faces: Vec<FaceVerdict>,
}

/// Kouchnirenko nondegeneracy plus the coordinate-axis condition.
pub fn nondegenerate(f: &SparsePoly, mc: &MonteCarlo, exec: Execution) -> Result<NondegReport> {
    if f.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    if f.order().unwrap_or(0) < 2 {
        return Err(Error::OrderTooSmall);
    }
    let delta = NewtonPolyhedron::of(f)?;
    let axis_condition = delta.check_axis_condition().is_ok();
    let faces: Vec<_> = delta.faces().into_iter().filter(|d| d.compact).collect();
    let verdicts = exec.map(&faces, |face| -> Result<FaceVerdict> {
        let fd = delta.face_part(f, face);
        let system: Vec<SparsePoly> = (0..f.nvars()).map(|i| fd.log_derivative(i)).collect();
        let seed = mc.seed ^ (face.vertex_subset.iter().fold(0u64, |h, &v| h.wrapping_mul(31).wrapping_add(v as u64 + 1)));
        let verdict = torus_has_zero_mc(&system, &MonteCarlo { seed, ..*mc }, Execution::Sequential)?;
        Ok(FaceVerdict {
            vertices: face.vertex_subset.iter().map(|&i| delta.vertices()[i].clone()).collect(),
            dim: face.dim,
            verdict,
        })
    });
    let faces: Vec<FaceVerdict> = verdicts.into_iter().collect::<Result<_>>()?;
    let nondegenerate = axis_condition && faces.iter().all(|v| !v.verdict.has_zero);
    Ok(NondegReport { nondegenerate, axis_condition, faces })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(s: &str, n: usize) -> SparsePoly {
        SparsePoly::parse_any(s, Some(n)).unwrap()
    }

    const P: u64 = 2_147_483_647;

    #[test]
    fn trivial_bases() {
        let gb = buchberger(&[poly("x1", 2), poly("x2", 2)], FieldSpec::Rational).unwrap();
        assert_eq!(gb.generators, vec![poly("x1", 2), poly("x2", 2)]);
        let one = buchberger(&[SparsePoly::one(2)], FieldSpec::Rational).unwrap();
        assert!(one.is_unit());
    }

    #[test]
    fn membership() {
        let gens = [poly("x1^2 - x2", 2), poly("x2^2 - x1", 2)];
        for field in [FieldSpec::Rational, FieldSpec::Prime(P)] {
            let gb = buchberger(&gens, field).unwrap();
            assert!(gb.contains(&poly("x1^4 - x1", 2)).unwrap());
            assert!(!gb.contains(&poly("x1", 2)).unwrap());
            for g in &gens {
                assert!(gb.contains(g).unwrap());
            }
        }
    }

    #[test]
    fn nontrivial_basis_is_reduced_and_complete() {
        let gens = [poly("x1^2*x2 - 1", 2), poly("x1*x2^2 - x1", 2)];
        let gb = buchberger(&gens, FieldSpec::Rational).unwrap();
        // x2·(x1²x2 - 1) - x1·(x1x2² - x1) = x1² - x2
        assert!(gb.contains(&poly("x1^2 - x2", 2)).unwrap());
        assert!(!gb.contains(&poly("x1 - 1", 2)).unwrap());
        for g in &gens {
            assert!(gb.contains(g).unwrap());
        }
    }

    #[test]
    fn prime_field_rejects_bad_denominators() {
        assert!(matches!(buchberger(&[poly("1/7*x1", 1)], FieldSpec::Prime(7)), Err(Error::FieldMismatch(_))));
        assert!(matches!(buchberger(&[poly("x1", 1)], FieldSpec::Prime(8)), Err(Error::FieldMismatch(_))));
    }

    #[test]
    fn torus_zero_examples() {
        assert!(!torus_has_zero(&[poly("x1^2", 2), poly("x2^3", 2)], P).unwrap());
        assert!(torus_has_zero(&[poly("x1 + x2", 2)], P).unwrap());
        assert!(!torus_has_zero(&[SparsePoly::one(2)], P).unwrap());
    }

    #[test]
    fn primes() {
        assert!(is_prime(P));
        assert!(!is_prime(P - 2 * 3));
        assert!(!is_prime(1) && is_prime(2) && is_prime(97));
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = random_prime(&mut rng);
        assert!(is_prime(p) && (1 << 30..1 << 31).contains(&p));
    }

    #[test]
    fn nondegeneracy_examples() {
        let mc = MonteCarlo::default();
        let r = nondegenerate(&poly("x1^2 + x2^3", 2), &mc, Execution::Sequential).unwrap();
        assert!(r.nondegenerate);
        assert!(r.faces.iter().all(|f| f.verdict.method == "monomial" || f.dim == 1));
        let bad = nondegenerate(&poly("x1^2 + 2*x1*x2 + x2^2", 2), &mc, Execution::Sequential).unwrap();
        assert!(!bad.nondegenerate);
        let edge = bad.faces.iter().find(|f| f.dim == 1).unwrap();
        assert!(edge.verdict.has_zero);
        assert_eq!(edge.verdict.per_prime, vec![true; 3]);
        let noaxis = nondegenerate(&poly("x1^2", 2), &mc, Execution::Sequential).unwrap();
        assert!(!noaxis.nondegenerate && !noaxis.axis_condition);
        assert_eq!(nondegenerate(&poly("x1 + x2^2", 2), &mc, Execution::Sequential), Err(Error::OrderTooSmall));
    }
}
