//! Weight systems adapted to a face, the affine coefficient systems `c^J`,
//! the signed-permutation determinant identities, and checks of the
//! combinatorial hypotheses of the residue formula on a regular fan.

use std::collections::BTreeSet;

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::arith::{dot_q_i64, fmt_q, q, qr, serde_q, to_q_vec, Q};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::fan::{multiplicity, sigma_of_face, Fan};
use crate::grobner::{torus_has_zero_mc, MonteCarlo};
use crate::linalg::{self, Matrix};
use crate::poly::SparsePoly;
use crate::polylattice::{combinations, FaceDescriptor, NewtonPolyhedron};

const RESAMPLE_CAP: usize = 100;

fn dot(a: &[Q], b: &[Q]) -> Q {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `E_J = ∩_{i∈J} l_i⁻¹(1)` as a point plus a basis of its direction space.
fn affine_subspace(ls: &[Vec<Q>], n: usize) -> Option<(Vec<Q>, Vec<Vec<Q>>)> {
    let ones = vec![Q::one(); ls.len()];
    let x0 = linalg::solve(&ls.to_vec(), &ones, n)?;
    let dirs = if ls.is_empty() {
        (0..n).map(|i| (0..n).map(|j| q((i == j) as i64)).collect()).collect()
    } else {
        linalg::nullspace(&ls.to_vec(), n)
    };
    Some((x0, dirs))
}

/// Row of the restriction of a linear form to an affine subspace, in the
/// coordinates (constant term, values on the direction basis).
fn restrict(w: &[Q], x0: &[Q], dirs: &[Vec<Q>]) -> Vec<Q> {
    let mut row = vec![dot(w, x0)];
    row.extend(dirs.iter().map(|d| dot(w, d)));
    row
}

/// Weights `w_1, …, w_n` adapted to a compact face `δ`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeightSystem {
    #[serde(with = "serde_q::mat")]
    pub w: Vec<Vec<Q>>,
    /// Basis of `V = span σ(δ)`.
    pub v_basis: Vec<Vec<i64>>,
    pub r: usize,
    pub face: FaceDescriptor,
    /// The rays of the regular fan lying in `σ(δ)`, with `l̃ = l / s_Δ(l)`.
    pub l0: Vec<Vec<i64>>,
    #[serde(with = "serde_q::mat")]
    pub l_tilde: Vec<Vec<Q>>,
    /// Ray sets `I_s` of the `(r+1)`-dimensional fan cones inside `σ(δ)`.
    pub cones: Vec<Vec<usize>>,
    /// Nonempty subsets of some `I_s`.
    pub admissible: Vec<Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeightConditions {
    pub newton_polyhedron: bool,
    pub basis: bool,
    pub in_v: bool,
    pub restriction_basis: bool,
    pub normalized: bool,
}

impl WeightConditions {
    pub fn all(&self) -> bool {
        self.newton_polyhedron && self.basis && self.in_v && self.restriction_basis && self.normalized
    }

    fn first_failure(&self) -> &'static str {
        if !self.newton_polyhedron {
            "(i) Newton polyhedron of w_j(f)"
        } else if !self.basis {
            "(ii) basis"
        } else if !self.in_v {
            "(iii) w_i ∈ V"
        } else if !self.restriction_basis {
            "(iv) restriction basis on E_J"
        } else {
            "(v) normalization on δ"
        }
    }
}

/// `w(f) = Σ_i w_i x_i ∂f/∂x_i`.
pub fn weighted(f: &SparsePoly, w: &[Q]) -> SparsePoly {
    f.weighted(w)
}

/// `Γ₊(w(f)) = Δ`: no vertex coefficient is killed, and the support
/// functions agree on every facet normal.
pub fn same_newton_polyhedron(f: &SparsePoly, delta: &NewtonPolyhedron, w: &[Q]) -> bool {
    let g = weighted(f, w);
    if delta.vertices().iter().any(|v| g.coeff(v).is_zero()) {
        return false;
    }
    delta
        .facets()
        .iter()
        .all(|fa| multiplicity(&fa.normal, &g) == Ok(fa.offset))
}

fn face_rays(delta: &NewtonPolyhedron, face: &FaceDescriptor, fan: &Fan) -> Result<(Vec<Vec<i64>>, Vec<Vec<usize>>)> {
    let sigma = sigma_of_face(delta, face);
    let k = sigma.dim;
    let inside: Vec<usize> = (0..fan.rays().len()).filter(|&i| sigma.contains(&fan.rays()[i])).collect();
    let l0: Vec<Vec<i64>> = inside.iter().map(|&i| fan.rays()[i].clone()).collect();
    let cones: Vec<Vec<usize>> = fan
        .all_cones()
        .into_iter()
        .filter(|c| c.len() == k && c.iter().all(|i| inside.contains(i)))
        .map(|c| c.iter().map(|i| inside.iter().position(|x| x == i).expect("inside")).collect())
        .collect();
    if cones.is_empty() {
        return Err(Error::Precondition("no fan cone of full dimension inside σ(δ)".into()));
    }
    Ok((l0, cones))
}

impl WeightSystem {
    pub fn nvars(&self) -> usize {
        self.w.len()
    }

    /// Re-verifies conditions (i)–(v).
    pub fn conditions(&self, f: &SparsePoly, delta: &NewtonPolyhedron) -> WeightConditions {
        let n = self.nvars();
        let r1 = self.r + 1;
        let newton_polyhedron = self.w.iter().all(|w| same_newton_polyhedron(f, delta, w));
        let basis = linalg::rank(&self.w) == n;
        let v_rows: Matrix = self.v_basis.iter().map(|v| to_q_vec(v)).collect();
        let in_v = self.w[..r1].iter().all(|w| {
            let mut m = v_rows.clone();
            m.push(w.clone());
            linalg::rank(&m) == v_rows.len()
        });
        let restriction_basis = self.admissible.iter().all(|j| self.restriction_matrix(j).is_some_and(|m| !linalg::det(&m).is_zero()));
        let vertices: Vec<&[i64]> = self.face.vertex_subset.iter().map(|&i| delta.vertices()[i].0.as_slice()).collect();
        let normalized = self.w[..r1].iter().all(|w| vertices.iter().all(|v| dot_q_i64(w, v).is_one()));
        WeightConditions { newton_polyhedron, basis, in_v, restriction_basis, normalized }
    }

    /// Rows: `w_k, …, w_n` restricted to `E_J`, `k = |J|`.
    fn restriction_matrix(&self, j: &[usize]) -> Option<Matrix> {
        let n = self.nvars();
        let k = j.len();
        let ls: Vec<Vec<Q>> = j.iter().map(|&i| self.l_tilde[i].clone()).collect();
        let (x0, dirs) = affine_subspace(&ls, n)?;
        if dirs.len() != n - k {
            return None;
        }
        Some(self.w[k - 1..].iter().map(|w| restrict(w, &x0, &dirs)).collect())
    }
}

/// Samples weights satisfying (i)–(v) for the face `δ`, with `L₀` and the
/// cones `I_s` read off the regular fan.
pub fn choose_weights(
    f: &SparsePoly,
    delta: &NewtonPolyhedron,
    face: &FaceDescriptor,
    fan: &Fan,
    seed: u64,
) -> Result<WeightSystem> {
    if !face.compact || face.in_coordinate_hyperplane {
        return Err(Error::Precondition("face must be compact and not in a coordinate hyperplane".into()));
    }
    let n = delta.nvars();
    let sigma = sigma_of_face(delta, face);
    let r1 = sigma.dim;
    let (l0, cones) = face_rays(delta, face, fan)?;
    let anchor = &delta.vertices()[face.vertex_subset[0]];
    let l_tilde: Vec<Vec<Q>> = l0
        .iter()
        .map(|l| {
            let s = crate::arith::dot_i64(l, anchor);
            l.iter().map(|&x| qr(x, s)).collect()
        })
        .collect();
    let mut admissible: BTreeSet<Vec<usize>> = BTreeSet::new();
    for c in &cones {
        for size in 1..=c.len() {
            for sub in combinations(c.len(), size) {
                admissible.insert(sub.iter().map(|&i| c[i]).collect());
            }
        }
    }
    let mut v_basis: Vec<Vec<i64>> = Vec::new();
    for ray in &sigma.rays {
        let mut trial = v_basis.clone();
        trial.push(ray.clone());
        if linalg::rank_i64(&trial) == trial.len() {
            v_basis = trial;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failure = "";
    for _ in 0..RESAMPLE_CAP {
        let mut w: Vec<Vec<Q>> = Vec::with_capacity(n);
        let mut degenerate = false;
        for _ in 0..r1 {
            let mut v = vec![0i64; n];
            for b in &v_basis {
                let c = rng.gen_range(1..=6);
                for (x, y) in v.iter_mut().zip(b) {
                    *x += c * y;
                }
            }
            let s = crate::arith::dot_i64(&v, anchor);
            if s == 0 {
                degenerate = true;
                break;
            }
            w.push(v.iter().map(|&x| qr(x, s)).collect());
        }
        if degenerate {
            failure = "(v) normalization on δ";
            continue;
        }
        for _ in r1..n {
            w.push((0..n).map(|_| q(rng.gen_range(-6..=6))).collect());
        }
        let ws = WeightSystem {
            w,
            v_basis: v_basis.clone(),
            r: r1 - 1,
            face: face.clone(),
            l0: l0.clone(),
            l_tilde: l_tilde.clone(),
            cones: cones.clone(),
            admissible: admissible.iter().cloned().collect(),
        };
        let cond = ws.conditions(f, delta);
        if cond.all() {
            return Ok(ws);
        }
        failure = cond.first_failure();
    }
    Err(Error::ResampleCap(format!("{RESAMPLE_CAP} samples, last failing condition {failure}")))
}

/// Coefficients `c_k, …, c_n` with `Σ_{j≥k} c_j w_j ≡ 1` on `E_J`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CSystem {
    pub j: Vec<usize>,
    pub k: usize,
    #[serde(with = "serde_q::vec")]
    pub c: Vec<Q>,
}

impl CSystem {
    /// `c_i` for `k ≤ i ≤ n` (1-based).
    pub fn get(&self, i: usize) -> &Q {
        &self.c[i - self.k]
    }
}

/// Direct solve of the affine system, cross-checked against the Cramer
/// formulas for `c^J` in terms of the coordinates of `l̃_J` in the `w` basis.
pub fn solve_c(ws: &WeightSystem, j: &[usize]) -> Result<CSystem> {
    let k = j.len();
    if k == 0 || k > ws.nvars() {
        return Err(Error::Precondition("J must be nonempty and at most n".into()));
    }
    let m = ws.restriction_matrix(j).ok_or_else(|| Error::ConditionIv(format!("E_J degenerate for J = {j:?}")))?;
    let rhs: Vec<Q> = std::iter::once(Q::one()).chain(std::iter::repeat_n(Q::zero(), m.len() - 1)).collect();
    // Σ_j c_j row_j = (1, 0, …, 0)
    let cols = m.len();
    let system = linalg::transpose(&m, cols);
    let c = linalg::solve_unique(&system, &rhs).ok_or_else(|| Error::ConditionIv(format!("singular system for J = {j:?}")))?;
    // coordinates a_{ij}: l̃_i = Σ_j a_ij w_j
    let wt = linalg::transpose(&ws.w, ws.nvars());
    let a: Matrix = j
        .iter()
        .map(|&i| linalg::solve_unique(&wt, &ws.l_tilde[i]).ok_or_else(|| Error::ConditionIv("w is not a basis".into())))
        .collect::<Result<_>>()?;
    let table = MinorTable::new_unchecked(a);
    let all: Vec<usize> = (0..k).collect();
    match table.c_cramer(&all)? {
        Some(cc) if cc == c => Ok(CSystem { j: j.to_vec(), k, c }),
        Some(cc) => Err(Error::ConditionIv(format!(
            "direct solve {:?} differs from Cramer {:?}",
            c.iter().map(fmt_q).collect::<Vec<_>>(),
            cc.iter().map(fmt_q).collect::<Vec<_>>()
        ))),
        None => Err(Error::ConditionIv(format!("Cramer system singular for J = {j:?}"))),
    }
}

/// An `(r+1) × n` matrix `A` of coordinates `v_i = Σ_j a_ij w_j`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MinorTable {
    #[serde(with = "serde_q::mat")]
    pub a: Vec<Vec<Q>>,
}

fn sign_of(p: &[usize]) -> i64 {
    let inv = (0..p.len()).flat_map(|i| (i + 1..p.len()).map(move |j| (i, j))).filter(|&(i, j)| p[i] > p[j]).count();
    if inv % 2 == 0 {
        1
    } else {
        -1
    }
}

fn permutations_of(items: &[usize]) -> Vec<Vec<usize>> {
    if items.is_empty() {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for (i, &x) in items.iter().enumerate() {
        let mut rest = items.to_vec();
        rest.remove(i);
        for mut p in permutations_of(&rest) {
            p.insert(0, x);
            out.push(p);
        }
    }
    out
}

impl MinorTable {
    pub fn new(a: Vec<Vec<Q>>) -> Result<Self> {
        let cols = a.first().map_or(0, Vec::len);
        if a.is_empty() || a.iter().any(|r| r.len() != cols) || a.len() > cols {
            return Err(Error::Dimension("need an (r+1) × n matrix with r+1 ≤ n".into()));
        }
        if linalg::rank(&a) != a.len() {
            return Err(Error::Precondition("rows must be linearly independent".into()));
        }
        Ok(MinorTable { a })
    }

    fn new_unchecked(a: Vec<Vec<Q>>) -> Self {
        MinorTable { a }
    }

    pub fn rows(&self) -> usize {
        self.a.len()
    }

    pub fn cols(&self) -> usize {
        self.a.first().map_or(0, Vec::len)
    }

    /// `D(I, J)`, 0-based sorted index sets of equal size.
    pub fn minor(&self, rows: &[usize], cols: &[usize]) -> Q {
        if rows.is_empty() {
            return Q::one();
        }
        let m: Matrix = rows.iter().map(|&i| cols.iter().map(|&j| self.a[i][j].clone()).collect()).collect();
        linalg::det(&m)
    }

    /// `c_l^I` for `l = k..n` (`k = |I|`) via the Cramer formulas; `None`
    /// when the system for `b^I` is singular.
    pub fn c_cramer(&self, set: &[usize]) -> Result<Option<Vec<Q>>> {
        let k = set.len();
        let n = self.cols();
        if k == 0 || k > n {
            return Err(Error::Precondition("need 1 ≤ |I| ≤ n".into()));
        }
        let first: Vec<usize> = (0..k - 1).collect();
        let without = |j: usize| -> Vec<usize> { set.iter().copied().filter(|&x| x != j).collect() };
        let sgn = |pos: usize| if pos.is_multiple_of(2) { q(1) } else { q(-1) };
        // (-1)^{1+s(i)} with s 1-based is +1 at even 0-based positions
        let denom: Q = set.iter().enumerate().map(|(pos, &i)| sgn(pos) * self.minor(&without(i), &first)).sum();
        if denom.is_zero() {
            return Ok(None);
        }
        Ok(Some(
            (k - 1..n)
                .map(|l| {
                    let num: Q = set
                        .iter()
                        .enumerate()
                        .map(|(pos, &j)| sgn(pos) * &self.a[j][l] * self.minor(&without(j), &first))
                        .sum();
                    num / &denom
                })
                .collect(),
        ))
    }

    /// `c_l^I` for `l = k..n` by solving `Σ_{l≥k} c_l w_l ≡ 1` on `E_I` in
    /// coordinates where the `w_l` are the coordinate functions.
    pub fn c_direct(&self, set: &[usize]) -> Option<Vec<Q>> {
        let k = set.len();
        let n = self.cols();
        let ls: Vec<Vec<Q>> = set.iter().map(|&i| self.a[i].clone()).collect();
        let (x0, dirs) = affine_subspace(&ls, n)?;
        let rows: Matrix = (k - 1..n)
            .map(|l| {
                let mut e = vec![Q::zero(); n];
                e[l] = Q::one();
                restrict(&e, &x0, &dirs)
            })
            .collect();
        let m = rows.len();
        let rhs: Vec<Q> = std::iter::once(Q::one()).chain(std::iter::repeat_n(Q::zero(), m - 1)).collect();
        linalg::solve_unique(&linalg::transpose(&rows, m), &rhs)
    }

    /// `Σ_{p ∈ P(I)} sign(p) c_1^{{i_1}} ⋯ c_m^{{i_1..i_m}}` with `m` factors.
    fn signed_sum(&self, set: &[usize], factors: usize, cache: &mut std::collections::BTreeMap<Vec<usize>, Option<Vec<Q>>>) -> Result<Option<Q>> {
        let mut total = Q::zero();
        for p in permutations_of(set) {
            let rank: Vec<usize> = p.iter().map(|x| set.iter().position(|y| y == x).expect("member")).collect();
            let mut term = q(sign_of(&rank));
            for m in 1..=factors {
                let mut prefix: Vec<usize> = p[..m].to_vec();
                prefix.sort_unstable();
                if !cache.contains_key(&prefix) {
                    let direct = self.c_direct(&prefix);
                    if direct != self.c_cramer(&prefix)? {
                        return Err(Error::TheoremViolation(format!("Cramer formula disagrees with direct solve at {prefix:?}")));
                    }
                    cache.insert(prefix.clone(), direct);
                }
                // c_m^{prefix} is the first entry, since |prefix| = m
                match &cache[&prefix] {
                    Some(c) => term *= &c[0],
                    None => return Ok(None),
                }
            }
            total += term;
        }
        Ok(Some(total))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdentityFailure {
    pub set: Vec<usize>,
    #[serde(with = "serde_q")]
    pub lhs: Q,
    #[serde(with = "serde_q")]
    pub rhs: Q,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LemmaReport {
    pub checked: usize,
    /// Index sets skipped because some `c` system is singular.
    pub skipped: Vec<Vec<usize>>,
    pub failures: Vec<IdentityFailure>,
}

impl LemmaReport {
    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }
}

/// For every `I ⊆ [1, r+1]` with `|I| ≤ k_max`, compares the signed
/// permutation sum with `D(I, [1, |I|])`. The `c` values come from a direct
/// affine solve and must agree with the Cramer formulas, including on which
/// systems are singular; sets needing a singular system are skipped.
pub fn lemma_3_1_check(table: &MinorTable, k_max: usize) -> Result<LemmaReport> {
    let rows = table.rows();
    let mut cache = std::collections::BTreeMap::new();
    let mut report = LemmaReport { checked: 0, skipped: vec![], failures: vec![] };
    for k in 1..=k_max.min(rows).min(table.cols()) {
        for set in combinations(rows, k) {
            match table.signed_sum(&set, k, &mut cache)? {
                Some(lhs) => {
                    let rhs = table.minor(&set, &(0..k).collect::<Vec<_>>());
                    report.checked += 1;
                    if lhs != rhs {
                        report.failures.push(IdentityFailure { set, lhs, rhs });
                    }
                }
                None => report.skipped.push(set),
            }
        }
    }
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorollaryReport {
    #[serde(with = "serde_q::opt")]
    pub signed_sum: Option<Q>,
    #[serde(with = "serde_q")]
    pub minor_sum: Q,
    #[serde(with = "serde_q")]
    pub ones_column_det: Q,
    pub row_stochastic: bool,
    #[serde(with = "serde_q::opt")]
    pub det_a: Option<Q>,
    pub ok: bool,
}

/// For `I = [1, r+1]`: the signed sum with `r` factors, the alternating sum
/// of `D(I∖{i}, [1, r])`, and `det(A_{·,1..r} | 1)` must agree; for a
/// row-stochastic square `A` they also equal `det A`.
pub fn corollary_3_2_check(table: &MinorTable) -> Result<CorollaryReport> {
    let rows = table.rows();
    let r = rows - 1;
    let set: Vec<usize> = (0..rows).collect();
    let first: Vec<usize> = (0..r).collect();
    let mut cache = std::collections::BTreeMap::new();
    let signed_sum = if r == 0 { Some(Q::one()) } else { table.signed_sum(&set, r, &mut cache)? };
    let minor_sum: Q = set
        .iter()
        .map(|&i| {
            let without: Vec<usize> = set.iter().copied().filter(|&x| x != i).collect();
            let sign = if (r + 1 + i + 1).is_multiple_of(2) { q(1) } else { q(-1) };
            sign * table.minor(&without, &first)
        })
        .sum();
    let ones: Matrix = table
        .a
        .iter()
        .map(|row| row[..r].iter().cloned().chain(std::iter::once(Q::one())).collect())
        .collect();
    let ones_column_det = linalg::det(&ones);
    let square = table.cols() == rows;
    let row_stochastic = square && table.a.iter().all(|row| row.iter().sum::<Q>().is_one());
    let det_a = square.then(|| linalg::det(&table.a));
    let mut ok = minor_sum == ones_column_det && signed_sum.as_ref().is_none_or(|s| *s == minor_sum);
    if row_stochastic {
        ok &= det_a.as_ref() == Some(&ones_column_det);
    }
    Ok(CorollaryReport { signed_sum, minor_sum, ones_column_det, row_stochastic, det_a, ok })
}

/// Entries `p/q` with `p ∈ [-9, 9]`, `q ∈ [1, 5]`.
pub fn random_rational_matrix<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> Vec<Vec<Q>> {
    (0..rows)
        .map(|_| (0..cols).map(|_| qr(rng.gen_range(-9..=9), rng.gen_range(1..=5))).collect())
        .collect()
}

/// A random square matrix whose rows sum to one.
pub fn random_row_stochastic<R: Rng>(size: usize, rng: &mut R) -> Vec<Vec<Q>> {
    let mut a = random_rational_matrix(size, size, rng);
    for row in &mut a {
        let head: Q = row[..size - 1].iter().sum();
        row[size - 1] = Q::one() - head;
    }
    a
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counterexample {
    pub trial: usize,
    #[serde(with = "serde_q::mat")]
    pub matrix: Vec<Vec<Q>>,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DetLemmaReport {
    pub rows: usize,
    pub cols: usize,
    pub trials: usize,
    pub seed: u64,
    pub identities_checked: usize,
    pub skipped_sets: usize,
    pub rank_deficient: usize,
    pub failures: usize,
    pub first_counterexample: Option<Counterexample>,
    pub pass: bool,
}

/// Seeded random trials of both identities; trial `t` uses the stream
/// `seed + t`, so results do not depend on scheduling.
pub fn detlemma_trials(rows: usize, cols: usize, trials: usize, seed: u64, exec: Execution) -> Result<DetLemmaReport> {
    if rows == 0 || rows > cols {
        return Err(Error::Dimension("need 1 ≤ rows ≤ cols".into()));
    }
    let results = exec.map_range(trials, |t| -> Result<(usize, usize, bool, Option<Counterexample>)> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(t as u64));
        let a = random_rational_matrix(rows, cols, &mut rng);
        let Ok(table) = MinorTable::new(a.clone()) else {
            return Ok((0, 0, true, None));
        };
        let lemma = lemma_3_1_check(&table, rows)?;
        let cor = corollary_3_2_check(&table)?;
        let detail = if let Some(f) = lemma.failures.first() {
            Some(format!("lemma at I = {:?}: {} ≠ {}", f.set, fmt_q(&f.lhs), fmt_q(&f.rhs)))
        } else if !cor.ok {
            Some(format!("corollary: {:?}", cor))
        } else {
            None
        };
        let ce = detail.map(|detail| Counterexample { trial: t, matrix: a, detail });
        Ok((lemma.checked + 1, lemma.skipped.len(), false, ce))
    });
    let mut report = DetLemmaReport {
        rows,
        cols,
        trials,
        seed,
        identities_checked: 0,
        skipped_sets: 0,
        rank_deficient: 0,
        failures: 0,
        first_counterexample: None,
        pass: true,
    };
    for r in results {
        let (checked, skipped, deficient, ce) = r?;
        report.identities_checked += checked;
        report.skipped_sets += skipped;
        report.rank_deficient += deficient as usize;
        if let Some(ce) = ce {
            report.failures += 1;
            report.first_counterexample.get_or_insert(ce);
        }
    }
    report.pass = report.failures == 0;
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StratumCheck {
    pub cone: Vec<Vec<i64>>,
    pub k: usize,
    pub torus_zero: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssumptionReport {
    /// `v_λ(f) = v_λ(g_j)` on every ray.
    pub valuations: bool,
    pub valuation_failures: Vec<(Vec<i64>, usize)>,
    /// Face systems `g_{kδ}, …, g_{nδ}` have no torus zero on each stratum.
    pub strata: bool,
    pub stratum_checks: Vec<StratumCheck>,
    /// Every admissible `c^J` system solves and matches its Cramer form.
    pub c_systems: bool,
    pub c_failures: Vec<String>,
    /// The square coordinate matrix of `l̃_{I_s}` in `w_1..w_{r+1}` has
    /// signed sum equal to `det A` on every cone `I_s`.
    pub det_identity: bool,
}

impl AssumptionReport {
    pub fn all(&self) -> bool {
        self.valuations && self.strata && self.c_systems && self.det_identity
    }
}

/// Checks the computable hypotheses of the residue formula for `g_j = w_j(f)`
/// on a regular fan refining `Σ_Δ`.
pub fn thm_1_3_assumptions(fan: &Fan, f: &SparsePoly, ws: &WeightSystem, mc: &MonteCarlo) -> Result<AssumptionReport> {
    let n = f.nvars();
    let gs: Vec<SparsePoly> = ws.w.iter().map(|w| weighted(f, w)).collect();
    let mut valuation_failures = Vec::new();
    for ray in fan.rays() {
        let vf = multiplicity(ray, f)?;
        for (j, g) in gs.iter().enumerate() {
            if multiplicity(ray, g).ok() != Some(vf) {
                valuation_failures.push((ray.clone(), j + 1));
            }
        }
    }
    let mut stratum_checks = Vec::new();
    for cone in fan.all_cones() {
        let k = cone.len();
        if k == 0 {
            continue;
        }
        let rays: Vec<Vec<i64>> = cone.iter().map(|&i| fan.rays()[i].clone()).collect();
        let lambda: Vec<i64> = (0..n).map(|c| rays.iter().map(|r| r[c]).sum()).collect();
        if lambda.iter().any(|&x| x <= 0) {
            continue;
        }
        let s = multiplicity(&lambda, f)?;
        let system: Vec<SparsePoly> = gs[k - 1..]
            .iter()
            .map(|g| g.filter(|m| crate::arith::dot_i64(&lambda, m) == s))
            .collect();
        let verdict = torus_has_zero_mc(&system, mc, Execution::Sequential)?;
        stratum_checks.push(StratumCheck { cone: rays, k, torus_zero: verdict.has_zero });
    }
    let mut c_failures = Vec::new();
    for j in &ws.admissible {
        if let Err(e) = solve_c(ws, j) {
            c_failures.push(format!("J = {j:?}: {e}"));
        }
    }
    let r1 = ws.r + 1;
    let basis_t = linalg::transpose(&ws.w[..r1].to_vec(), n);
    let mut det_identity = true;
    for cone in &ws.cones {
        let a: Option<Matrix> = cone.iter().map(|&i| linalg::solve(&basis_t, &ws.l_tilde[i], r1)).collect();
        match a.and_then(|a| MinorTable::new(a).ok()) {
            Some(t) => det_identity &= corollary_3_2_check(&t)?.ok,
            None => det_identity = false,
        }
    }
    Ok(AssumptionReport {
        valuations: valuation_failures.is_empty(),
        valuation_failures,
        strata: stratum_checks.iter().all(|s| !s.torus_zero),
        stratum_checks,
        c_systems: c_failures.is_empty(),
        c_failures,
        det_identity,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fan::{regularize, sigma_delta_fan};

    fn poly(s: &str, n: usize) -> SparsePoly {
        SparsePoly::parse_any(s, Some(n)).unwrap()
    }

    fn mat(rows: &[&[(i64, i64)]]) -> Vec<Vec<Q>> {
        rows.iter().map(|r| r.iter().map(|&(a, b)| qr(a, b)).collect()).collect()
    }

    fn setup(f: &SparsePoly, dim: usize, vertex: Option<&[i64]>) -> (NewtonPolyhedron, FaceDescriptor, Fan) {
        let delta = NewtonPolyhedron::of(f).unwrap();
        let face = delta
            .interior_compact_faces()
            .into_iter()
            .find(|d| d.dim == dim && vertex.is_none_or(|v| delta.vertices()[d.vertex_subset[0]].0 == v))
            .unwrap();
        let fan = regularize(&sigma_delta_fan(&delta).unwrap()).unwrap();
        (delta, face, fan)
    }

    #[test]
    fn k1_base_case() {
        let t = MinorTable::new(mat(&[&[(2, 1), (1, 3), (5, 1)], &[(-1, 2), (4, 1), (0, 1)]])).unwrap();
        assert_eq!(t.c_cramer(&[0]).unwrap().unwrap()[0], qr(2, 1));
        assert_eq!(t.c_cramer(&[1]).unwrap().unwrap()[0], qr(-1, 2));
        assert_eq!(t.c_direct(&[0]).unwrap(), t.c_cramer(&[0]).unwrap().unwrap());
        assert_eq!(t.c_direct(&[0, 1]).unwrap(), t.c_cramer(&[0, 1]).unwrap().unwrap());
    }

    #[test]
    fn two_row_corollary() {
        let t = MinorTable::new(mat(&[&[(3, 1), (1, 1)], &[(1, 2), (2, 1)]])).unwrap();
        let r = corollary_3_2_check(&t).unwrap();
        assert_eq!(r.minor_sum, qr(3, 1) - qr(1, 2));
        assert!(r.ok);
        let single = MinorTable::new(mat(&[&[(7, 3), (1, 1)]])).unwrap();
        assert!(corollary_3_2_check(&single).unwrap().ok);
    }

    #[test]
    fn random_three_by_five() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let t = MinorTable::new(random_rational_matrix(3, 5, &mut rng)).unwrap();
        let r = lemma_3_1_check(&t, 3).unwrap();
        assert!(r.ok());
        assert_eq!(r.checked + r.skipped.len(), 7);
    }

    #[test]
    fn row_stochastic_gives_det() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for size in 1..=4 {
            let t = MinorTable::new(random_row_stochastic(size, &mut rng)).unwrap();
            let r = corollary_3_2_check(&t).unwrap();
            assert!(r.row_stochastic && r.ok);
            assert_eq!(r.det_a.unwrap(), r.ones_column_det);
        }
    }

    #[test]
    fn trials_pass() {
        let r = detlemma_trials(3, 4, 50, 1, Execution::Sequential).unwrap();
        assert!(r.pass, "{:?}", r.first_counterexample);
    }

    #[test]
    fn weights_for_edge() {
        let f = poly("x1^2 + x2^3", 2);
        let (delta, face, fan) = setup(&f, 1, None);
        let ws = choose_weights(&f, &delta, &face, &fan, 0).unwrap();
        assert_eq!(ws.w[0], vec![qr(1, 2), qr(1, 3)]);
        assert!(ws.conditions(&f, &delta).all());
        let c = solve_c(&ws, &[0]).unwrap();
        assert_eq!(c.c, vec![q(1), q(0)]);
        let rep = thm_1_3_assumptions(&fan, &f, &ws, &MonteCarlo::default()).unwrap();
        assert!(rep.all(), "{rep:?}");
    }

    #[test]
    fn weights_for_vertex() {
        let f = poly("x1^2 + x1*x2 + x2^3", 2);
        let (delta, face, fan) = setup(&f, 0, Some(&[1, 1]));
        let ws = choose_weights(&f, &delta, &face, &fan, 3).unwrap();
        assert_eq!(ws.r, 1);
        assert!(ws.conditions(&f, &delta).all());
        for j in &ws.admissible {
            solve_c(&ws, j).unwrap();
        }
        assert!(thm_1_3_assumptions(&fan, &f, &ws, &MonteCarlo::default()).unwrap().all());
    }

    #[test]
    fn condition_i_rejects_kernel_hits() {
        let f = poly("x1^2 + x2^3", 2);
        let delta = NewtonPolyhedron::of(&f).unwrap();
        assert!(!same_newton_polyhedron(&f, &delta, &[q(0), q(1)]));
        assert!(same_newton_polyhedron(&f, &delta, &[q(1), q(1)]));
        let (delta, face, fan) = setup(&f, 1, None);
        let mut ws = choose_weights(&f, &delta, &face, &fan, 0).unwrap();
        ws.w[1] = vec![q(0), q(1)];
        let rep = thm_1_3_assumptions(&fan, &f, &ws, &MonteCarlo::default()).unwrap();
        assert!(!rep.valuations);
    }

    #[test]
    fn degenerate_edge_has_torus_zero() {
        let f = poly("x1^2 + 2*x1*x2 + x2^2", 2);
        let (delta, face, fan) = setup(&f, 1, None);
        let ws = choose_weights(&f, &delta, &face, &fan, 0).unwrap();
        let rep = thm_1_3_assumptions(&fan, &f, &ws, &MonteCarlo::default()).unwrap();
        assert!(!rep.strata);
        assert!(rep.stratum_checks.iter().any(|s| s.torus_zero && s.cone == vec![vec![1, 1]]));
    }
}
