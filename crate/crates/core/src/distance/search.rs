//! Exact minimum-weight searches over affine spaces of GF(2) vectors.
//!
//! Two strategies are available and picked by estimated cost:
//! Gray-code enumeration of the whole affine space when its dimension is
//! small, and a weight-ordered meet-in-the-middle over column subsets
//! otherwise. Both are exhaustive, and both report `Exact(w)` only for
//! `w <= cap`, so the answer does not depend on which one ran.

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf2::{BitMatrix, BitVec};
use crate::par::{self, Execution};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "weight")]
pub enum Distance {
    Exact(usize),
    /// No solution of weight `<= cap` exists, but some solution does.
    AboveCap,
    /// The constraints are inconsistent.
    Infinite,
}

impl Distance {
    /// Largest weight this result certifies as a lower bound, given the cap
    /// it was computed with. `None` means unbounded.
    pub fn lower_bound(&self, cap: usize) -> Option<usize> {
        match *self {
            Distance::Exact(w) => Some(w),
            Distance::AboveCap => Some(cap + 1),
            Distance::Infinite => None,
        }
    }

    pub fn exact(&self) -> Option<usize> {
        match *self {
            Distance::Exact(w) => Some(w),
            _ => None,
        }
    }

    fn capped(w: usize, cap: usize) -> Distance {
        if w <= cap {
            Distance::Exact(w)
        } else {
            Distance::AboveCap
        }
    }
}

/// Work limits for the exhaustive searches.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchBudget {
    /// Upper bound on enumerated candidates.
    pub max_candidates: u128,
    /// Upper bound on entries held in a meet-in-the-middle table.
    pub max_table: u128,
}

impl Default for SearchBudget {
    fn default() -> Self {
        Self {
            max_candidates: 1 << 34,
            max_table: 1 << 24,
        }
    }
}

pub(crate) fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul((n - i) as u128) / (i as u128 + 1);
    }
    acc
}

fn mitm_cost(cols: usize, cap: usize) -> (u128, u128) {
    let mut ops: u128 = 0;
    for w in 1..=cap {
        ops = ops.saturating_add(binomial(cols, w - w / 2));
        ops = ops.saturating_add(binomial(cols, w / 2));
    }
    (ops, binomial(cols, cap / 2))
}

fn gray_cost(dim: usize) -> u128 {
    if dim >= 127 {
        u128::MAX
    } else {
        1u128 << dim
    }
}

/// Minimum `|e|` with `m · eᵀ = t`.
pub fn min_weight_solution(
    m: &BitMatrix,
    t: &BitVec,
    cap: usize,
    budget: SearchBudget,
    exec: Execution,
) -> Result<Distance> {
    let e0 = match m.solve_vec(t) {
        Ok(e) => e,
        Err(Error::NoSolution) => return Ok(Distance::Infinite),
        Err(e) => return Err(e),
    };
    if t.is_zero() {
        return Ok(Distance::Exact(0));
    }
    let kernel = m.kernel_basis();
    let gray = gray_cost(kernel.rows());
    let (mitm, table) = mitm_cost(m.cols(), cap);
    if gray <= mitm && gray <= budget.max_candidates {
        let w = gray_min(&e0, &kernel, None, exec);
        return Ok(Distance::capped(w.expect("coset is nonempty"), cap));
    }
    check_mitm_budget(mitm, table, budget)?;
    Ok(mitm_exact(m, t, cap, exec))
}

/// Minimum weight over the affine space `offset + rowspan(basis)`.
pub fn min_weight_coset(
    offset: &BitVec,
    basis: &BitMatrix,
    cap: usize,
    budget: SearchBudget,
    exec: Execution,
) -> Result<Distance> {
    let gray = gray_cost(basis.rows());
    let (mitm, table) = mitm_cost(offset.len(), cap);
    if gray <= mitm && gray <= budget.max_candidates {
        let w = gray_min(offset, basis, None, exec);
        return Ok(Distance::capped(w.expect("coset is nonempty"), cap));
    }
    check_mitm_budget(mitm, table, budget)?;
    // rowspan(basis) is exactly the kernel of its orthogonal complement.
    let parity = basis.kernel_basis();
    let t = parity.mul_vec(offset);
    if t.is_zero() {
        return Ok(Distance::Exact(0));
    }
    Ok(mitm_exact(&parity, &t, cap, exec))
}

/// Minimum `|e|` with `h · eᵀ = 0` and `j · eᵀ ≠ 0`: the distance of the
/// logical class detected by `j`. `Infinite` when no such `e` exists.
pub fn min_weight_nontrivial(
    h: &BitMatrix,
    j: &BitMatrix,
    cap: usize,
    budget: SearchBudget,
    exec: Execution,
) -> Result<Distance> {
    assert_eq!(h.cols(), j.cols());
    let kernel = h.kernel_basis();
    let tags: Vec<BitVec> = kernel.row_iter().map(|b| j.mul_vec(&b)).collect();
    if tags.iter().all(BitVec::is_zero) {
        return Ok(Distance::Infinite);
    }
    let gray = gray_cost(kernel.rows());
    let (mitm, table) = mitm_cost(h.cols(), cap);
    if gray <= mitm && gray <= budget.max_candidates {
        let w = gray_min(&BitVec::zeros(h.cols()), &kernel, Some(&tags), exec);
        return Ok(Distance::capped(w.expect("some kernel element is nontrivial"), cap));
    }
    check_mitm_budget(mitm, table, budget)?;
    Ok(mitm_nontrivial(h, j, cap, exec))
}

fn check_mitm_budget(ops: u128, table: u128, budget: SearchBudget) -> Result<()> {
    if ops > budget.max_candidates {
        return Err(Error::ExplosionGuard {
            candidates: ops,
            budget: budget.max_candidates,
        });
    }
    if table > budget.max_table {
        return Err(Error::ExplosionGuard {
            candidates: table,
            budget: budget.max_table,
        });
    }
    Ok(())
}

/// Splits the low `dim - HIGH_BITS` Gray-code sweep across chunks indexed by
/// the high basis vectors.
const HIGH_BITS: usize = 6;

/// Minimum weight over `offset + span(basis)`, restricted to elements whose
/// tag (XOR of the basis tags used) is nonzero when `tags` is given.
fn gray_min(
    offset: &BitVec,
    basis: &BitMatrix,
    tags: Option<&[BitVec]>,
    exec: Execution,
) -> Option<usize> {
    let dim = basis.rows();
    let high = dim.min(HIGH_BITS);
    let low = dim - high;
    let rows: Vec<BitVec> = basis.row_iter().collect();
    let tag_len = tags.map_or(0, |t| t.first().map_or(0, BitVec::len));
    let zero_tag = BitVec::zeros(tag_len);

    let chunk = |c: usize| -> Option<usize> {
        let mut v = offset.clone();
        let mut tag = zero_tag.clone();
        for i in 0..high {
            if c >> i & 1 == 1 {
                v.xor_assign(&rows[low + i]);
                if let Some(t) = tags {
                    tag.xor_assign(&t[low + i]);
                }
            }
        }
        let accept = |tag: &BitVec| tags.is_none() || !tag.is_zero();
        let mut best = if accept(&tag) { Some(v.weight()) } else { None };
        for step in 1u64..(1u64 << low) {
            let j = step.trailing_zeros() as usize;
            v.xor_assign(&rows[j]);
            if let Some(t) = tags {
                tag.xor_assign(&t[j]);
            }
            if accept(&tag) {
                let w = v.weight();
                if best.is_none_or(|b| w < b) {
                    best = Some(w);
                }
            }
        }
        best
    };
    par::map_range(exec, 1 << high, chunk).into_iter().flatten().min()
}

type Syndrome = Box<[u64]>;

fn column_syndromes(m: &BitMatrix) -> Vec<BitVec> {
    let t = m.transpose();
    t.row_iter().collect()
}

/// Calls `f` with the XOR of every `size`-subset of `cols` whose smallest
/// index is `first` (or every subset when `first` is `None`).
fn for_each_subset_sum(cols: &[BitVec], size: usize, first: Option<usize>, f: &mut dyn FnMut(&BitVec) -> bool) -> bool {
    fn rec(cols: &[BitVec], start: usize, left: usize, acc: &BitVec, f: &mut dyn FnMut(&BitVec) -> bool) -> bool {
        if left == 0 {
            return f(acc);
        }
        for i in start..=cols.len() - left {
            let next = acc.xor(&cols[i]);
            if rec(cols, i + 1, left - 1, &next, f) {
                return true;
            }
        }
        false
    }
    let len = cols.first().map_or(0, BitVec::len);
    let zero = BitVec::zeros(len);
    match (size, first) {
        (0, None) => f(&zero),
        (0, Some(_)) => false,
        (_, None) => {
            if size > cols.len() {
                return false;
            }
            rec(cols, 0, size, &zero, f)
        }
        (_, Some(i)) => {
            if i + size > cols.len() {
                return false;
            }
            rec(cols, i + 1, size - 1, &cols[i], f)
        }
    }
}

fn key(v: &BitVec) -> Syndrome {
    v.words().to_vec().into_boxed_slice()
}

/// Weight-ordered meet in the middle for `m · eᵀ = t`, `t ≠ 0`.
///
/// A match between a `w1`-subset and a `w2`-subset yields a solution of
/// weight at most `w1 + w2`; any overlap would give a lighter solution that
/// an earlier weight would already have found, so the first hit is exact.
fn mitm_exact(m: &BitMatrix, t: &BitVec, cap: usize, exec: Execution) -> Distance {
    let cols = column_syndromes(m);
    let n = cols.len();
    let mut tables: Vec<HashSet<Syndrome>> = Vec::new();
    for w in 1..=cap.min(n) {
        let w2 = w / 2;
        let w1 = w - w2;
        while tables.len() <= w2 {
            let mut set = HashSet::new();
            for_each_subset_sum(&cols, tables.len(), None, &mut |s| {
                set.insert(key(s));
                false
            });
            tables.push(set);
        }
        let table = &tables[w2];
        let hits = par::map_range(exec, n.max(1), |first| {
            let mut found = false;
            for_each_subset_sum(&cols, w1, Some(first), &mut |s| {
                found = table.contains(&key(&s.xor(t)));
                found
            });
            found
        });
        if hits.into_iter().any(|h| h) {
            return Distance::Exact(w);
        }
    }
    Distance::AboveCap
}

/// Meet in the middle for `h · eᵀ = 0`, `j · eᵀ ≠ 0`.
fn mitm_nontrivial(h: &BitMatrix, j: &BitMatrix, cap: usize, exec: Execution) -> Distance {
    let hcols = column_syndromes(h);
    let jcols = column_syndromes(j);
    let n = h.cols();
    // Pair the two syndromes into one vector so subsets are enumerated once.
    let hlen = h.rows();
    let cols: Vec<BitVec> = hcols.iter().zip(&jcols).map(|(a, b)| a.concat(b)).collect();
    let split = |s: &BitVec| (key(&s.slice(0, hlen)), s.slice(hlen, s.len() - hlen));

    // Per H-syndrome: one J-syndrome seen, and whether a second distinct one was.
    let mut tables: Vec<HashMap<Syndrome, (BitVec, bool)>> = Vec::new();
    for w in 1..=cap.min(n) {
        let w2 = w / 2;
        let w1 = w - w2;
        while tables.len() <= w2 {
            let mut map: HashMap<Syndrome, (BitVec, bool)> = HashMap::new();
            for_each_subset_sum(&cols, tables.len(), None, &mut |s| {
                let (hk, js) = split(s);
                map.entry(hk)
                    .and_modify(|(first, multi)| {
                        if *first != js {
                            *multi = true;
                        }
                    })
                    .or_insert((js, false));
                false
            });
            tables.push(map);
        }
        let table = &tables[w2];
        let hits = par::map_range(exec, n, |first| {
            let mut found = false;
            for_each_subset_sum(&cols, w1, Some(first), &mut |s| {
                let (hk, js) = split(s);
                found = table.get(&hk).is_some_and(|(seen, multi)| *multi || *seen != js);
                found
            });
            found
        });
        if hits.into_iter().any(|h| h) {
            return Distance::Exact(w);
        }
    }
    Distance::AboveCap
}
