use serde::{Deserialize, Serialize};

use crate::circuit::CheckOrders;
use crate::codes::{bb18, bb90, composite, surface, CssCode};
use crate::error::{invalid, Result};
use crate::gf2::{BitMatrix, BitVec, SpanBuilder};
use crate::surgery::{deform, DeformedCode, GraphPolicy, SurgeryTargets};

/// A named code family member: `bb18`, `bb90` or `surface:<d>`.
pub fn named_code(name: &str) -> Result<(CssCode, CheckOrders)> {
    match name {
        "bb18" => {
            let c = bb18();
            let o = CheckOrders::free(&c);
            Ok((c, o))
        }
        "bb90" => {
            let c = bb90();
            let o = CheckOrders::free(&c);
            Ok((c, o))
        }
        _ => {
            let d: usize = name
                .strip_prefix("surface:")
                .and_then(|d| d.parse().ok())
                .ok_or_else(|| invalid(format!("unknown code '{name}'")))?;
            Ok((surface(d)?, CheckOrders::surface(d)))
        }
    }
}

/// Largest kernel dimension enumerated when choosing logicals.
const MAX_ENUM_DIM: usize = 22;

/// Rechooses the Z logicals so that the first `q` are pairwise disjoint and
/// as light as the greedy choice allows. The X logicals follow by pairing.
pub fn with_disjoint_z_logicals(code: &CssCode, q: usize) -> Result<CssCode> {
    let k = code.k();
    if q > k {
        return Err(invalid(format!("cannot pick {q} logicals from k = {k}")));
    }
    let n = code.n();
    let ker = code.h_x.kernel_basis();
    let mut candidates: Vec<BitVec> = Vec::new();
    if ker.rows() <= MAX_ENUM_DIM {
        let stab = SpanBuilder::from_matrix(&code.h_z);
        let mut v = BitVec::zeros(n);
        for i in 1u64..(1 << ker.rows()) {
            v.xor_assign(&ker.row(i.trailing_zeros() as usize));
            if !stab.contains(&v) {
                candidates.push(v.clone());
            }
        }
        candidates.sort_by(|a, b| a.weight().cmp(&b.weight()).then_with(|| a.to_bits().cmp(&b.to_bits())));
    }
    let mut span = SpanBuilder::from_matrix(&code.h_z);
    let mut chosen: Vec<BitVec> = Vec::new();
    let mut used = BitVec::zeros(n);
    for c in candidates.iter().chain(code.j_z.row_iter().collect::<Vec<_>>().iter()) {
        if chosen.len() == q {
            break;
        }
        if c.iter_ones().any(|i| used.get(i)) {
            continue;
        }
        if span.insert(c.clone()) {
            used.xor_assign(c);
            chosen.push(c.clone());
        }
    }
    if chosen.len() < q {
        return Err(invalid(format!("no {q} pairwise disjoint Z logicals found")));
    }
    for c in code.j_z.row_iter().chain(candidates.into_iter()) {
        if chosen.len() == k {
            break;
        }
        if span.insert(c.clone()) {
            chosen.push(c);
        }
    }
    code.with_z_logicals(BitMatrix::from_rows(n, &chosen))
}

/// Everything needed to build injection circuits for one configuration.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InjectionSetup {
    pub register: CssCode,
    pub noisy: CssCode,
    /// Register logical measured jointly with noisy block `j`.
    pub targets: Vec<usize>,
    pub code: CssCode,
    pub orders: CheckOrders,
    pub deformed: DeformedCode,
}

impl InjectionSetup {
    /// Register qubits hold logicals `0..k_reg`; the noisy block `j` holds
    /// logical `k_reg + j`.
    pub fn k_register(&self) -> usize {
        self.register.k()
    }

    pub fn q(&self) -> usize {
        self.targets.len()
    }

    /// Register logicals not involved in the measurement.
    pub fn idle_logicals(&self) -> Vec<usize> {
        (0..self.k_register()).filter(|i| !self.targets.contains(i)).collect()
    }
}

fn check_targets(k_register: usize, targets: &[usize]) -> Result<()> {
    if targets.is_empty() {
        return Err(invalid("at least one target logical is required"));
    }
    for (j, &t) in targets.iter().enumerate() {
        if t >= k_register || targets[..j].contains(&t) {
            return Err(invalid(format!("targets must be distinct register logicals below {k_register}")));
        }
    }
    Ok(())
}

/// Measurement targets `Z_t ⊗ z_j` for `t = targets[j]`. Complement rows
/// follow the register order: `X_t ⊗ x_j` for targets, `X_i` otherwise.
pub fn injection_targets(k_register: usize, targets: &[usize]) -> Result<SurgeryTargets> {
    check_targets(k_register, targets)?;
    let q = targets.len();
    let k = k_register + q;
    let alpha = BitMatrix::from_entries(q, k, targets.iter().enumerate().flat_map(|(j, &t)| [(j, t), (j, k_register + j)]));
    let alpha_perp = BitMatrix::from_entries(
        k_register,
        k,
        (0..k_register).flat_map(|i| match targets.iter().position(|&t| t == i) {
            Some(j) => vec![(i, i), (i, k_register + j)],
            None => vec![(i, i)],
        }),
    );
    let alpha_perp_r = BitMatrix::from_entries(k, k_register, (0..k_register).map(|i| (i, i)));
    SurgeryTargets::with_complement(alpha, alpha_perp, alpha_perp_r)
}

/// Builds register, noisy blocks, composite and deformed code. The register
/// logicals are rechosen so that the targets have pairwise disjoint Z
/// supports. Each noisy code must encode one qubit.
pub fn injection_setup(register: &str, noisy: &str, targets: &[usize], d_r: usize, policy: GraphPolicy) -> Result<InjectionSetup> {
    let (reg, reg_orders) = named_code(register)?;
    let (noi, noi_orders) = named_code(noisy)?;
    if noi.k() != 1 {
        return Err(invalid("noisy code must encode exactly one qubit"));
    }
    check_targets(reg.k(), targets)?;
    let q = targets.len();
    let reg = with_disjoint_z_logicals(&reg, q)?;
    // Move the disjoint logicals to the target positions.
    let mut perm = vec![usize::MAX; reg.k()];
    for (j, &t) in targets.iter().enumerate() {
        perm[t] = j;
    }
    let mut rest = q..reg.k();
    for slot in perm.iter_mut().filter(|s| **s == usize::MAX) {
        *slot = rest.next().expect("one row per free slot");
    }
    let reg = reg.with_z_logicals(reg.j_z.select_rows(&perm))?;
    let code = composite(&reg, &noi, q)?;
    let orders = CheckOrders::composite(&reg_orders, reg.n(), &noi_orders, noi.n(), q);
    let deformed = deform(&code, &injection_targets(reg.k(), targets)?, policy, d_r)?;
    Ok(InjectionSetup {
        register: reg,
        noisy: noi,
        targets: targets.to_vec(),
        code,
        orders,
        deformed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surgery::verify_surgery_conditions;

    #[test]
    fn bb18_has_two_disjoint_weight_four_logicals() {
        let c = with_disjoint_z_logicals(&bb18(), 2).unwrap();
        let (a, b) = (c.j_z.row(0), c.j_z.row(1));
        assert_eq!((a.weight(), b.weight()), (4, 4));
        assert!(a.iter_ones().all(|i| !b.get(i)));
        c.validate().unwrap();
    }

    #[test]
    fn ci_setup_satisfies_surgery_conditions() {
        for targets in [vec![0, 1], vec![3, 1]] {
            let s = injection_setup("bb18", "surface:2", &targets, 2, GraphPolicy::Path).unwrap();
            let rep = verify_surgery_conditions(&s.deformed);
            assert!(rep.all_pass(), "{:?}", rep.failures());
            assert_eq!(s.deformed.bar_j_z.rows(), 4);
            let (a, b) = (s.register.j_z.row(targets[0]), s.register.j_z.row(targets[1]));
            assert!(a.iter_ones().all(|i| !b.get(i)));
            assert_eq!(s.idle_logicals().len(), 2);
        }
    }
}
