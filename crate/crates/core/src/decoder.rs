//! Min-sum belief propagation with ordered-statistics post-processing
//! (combination sweep) on a detector error model.

use serde::{Deserialize, Serialize};

use crate::circuit::DetectorModel;
use crate::error::{invalid, Error, Result};
use crate::gf2::{BitMatrix, BitVec};
use crate::par::{map_slice, Execution};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DecoderConfig {
    pub max_iter: usize,
    /// Min-sum normalization factor.
    pub scale: f64,
    /// Number of leading non-pivot columns used for weight-2 flips.
    pub osd_order: usize,
}

impl Default for DecoderConfig {
    fn default() -> Self {
        Self {
            max_iter: 1000,
            scale: 0.9,
            osd_order: 5,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Decoded {
    /// Fault indices of the correction.
    pub correction: Vec<usize>,
    pub observables: BitVec,
    pub bp_converged: bool,
    pub bp_iterations: usize,
}

/// Decoder state for one detector model: Tanner graph, priors, and the
/// dense check matrix used by the ordered-statistics stage.
#[derive(Clone, Debug)]
pub struct BpOsd {
    config: DecoderConfig,
    num_checks: usize,
    num_vars: usize,
    /// Edge ranges per check; `edge_var[e]` is the variable of edge `e`.
    check_start: Vec<usize>,
    edge_var: Vec<u32>,
    /// Edges of variable `v` are `var_edge_list[var_start[v]..var_start[v + 1]]`.
    var_start: Vec<usize>,
    var_edge_list: Vec<u32>,
    /// Position of check-major edge `e` in the variable-major order.
    edge_slot: Vec<u32>,
    prior_llr: Vec<f64>,
    /// `ln((1−p)/p)` per fault, the cost of including it.
    cost: Vec<f64>,
    var_checks: Vec<Vec<u32>>,
    var_obs: Vec<Vec<u32>>,
    num_obs: usize,
    rank: usize,
}

/// Message buffers of one BP run. `parity[c]` is whether check `c` is
/// unsatisfied by the current hard decision.
struct BpState {
    syn: Vec<bool>,
    q: Vec<f64>,
    r: Vec<f64>,
    post: Vec<f64>,
    hard: Vec<bool>,
    parity: Vec<bool>,
    unsatisfied: usize,
}

/// Clamp keeping priors finite for p ∈ {0, 1}.
const P_CLAMP: f64 = 1e-15;

impl BpOsd {
    pub fn new(model: &DetectorModel, config: DecoderConfig) -> Result<Self> {
        if !(config.scale > 0.0 && config.scale <= 1.0) || config.max_iter == 0 {
            return Err(invalid("decoder needs 0 < scale <= 1 and max_iter >= 1"));
        }
        let m = model.num_detectors;
        let n = model.faults.len();
        let mut per_check: Vec<Vec<u32>> = vec![Vec::new(); m];
        for (v, f) in model.faults.iter().enumerate() {
            for &d in &f.dets {
                if d as usize >= m {
                    return Err(invalid("fault references a missing detector"));
                }
                per_check[d as usize].push(v as u32);
            }
        }
        let mut check_start = Vec::with_capacity(m + 1);
        let mut edge_var = Vec::new();
        let mut var_edges = vec![Vec::new(); n];
        check_start.push(0);
        for vars in &per_check {
            for &v in vars {
                var_edges[v as usize].push(edge_var.len() as u32);
                edge_var.push(v);
            }
            check_start.push(edge_var.len());
        }
        let mut var_start = Vec::with_capacity(n + 1);
        var_start.push(0);
        for es in &var_edges {
            var_start.push(var_start.last().unwrap() + es.len());
        }
        let var_edge_list: Vec<u32> = var_edges.into_iter().flatten().collect();
        let mut edge_slot = vec![0u32; var_edge_list.len()];
        for (k, &e) in var_edge_list.iter().enumerate() {
            edge_slot[e as usize] = k as u32;
        }
        let prior_llr: Vec<f64> = model
            .faults
            .iter()
            .map(|f| {
                let p = f.p.clamp(P_CLAMP, 1.0 - P_CLAMP);
                ((1.0 - p) / p).ln()
            })
            .collect();
        let h = BitMatrix::from_entries(m, n, model.faults.iter().enumerate().flat_map(|(v, f)| f.dets.iter().map(move |&d| (d as usize, v))));
        Ok(Self {
            config,
            num_checks: m,
            num_vars: n,
            check_start,
            edge_var,
            var_start,
            var_edge_list,
            edge_slot,
            cost: prior_llr.clone(),
            prior_llr,
            var_checks: model.faults.iter().map(|f| f.dets.clone()).collect(),
            var_obs: model.faults.iter().map(|f| f.obs.clone()).collect(),
            num_obs: model.num_observables,
            rank: h.rank(),
        })
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn observables_of(&self, correction: &[usize]) -> BitVec {
        let mut o = BitVec::zeros(self.num_obs);
        for &v in correction {
            for &k in &self.var_obs[v] {
                o.flip(k as usize);
            }
        }
        o
    }

    pub fn correction_cost(&self, correction: &[usize]) -> f64 {
        correction.iter().map(|&v| self.cost[v]).sum()
    }

    /// Min-sum BP with a flooding schedule. Returns the posterior LLRs,
    /// the hard decision if it satisfied the syndrome, and the iterations
    /// used.
    ///
    /// The update is a deterministic map on the variable-to-check
    /// messages, so once they repeat exactly the remaining iterations are
    /// reduced modulo the period (Brent's cycle detection). The output is
    /// identical to running all `max_iter` iterations.
    pub fn bp_min_sum(&self, syndrome: &BitVec) -> (Vec<f64>, Option<Vec<bool>>, usize) {
        let mut st = BpState {
            syn: (0..self.num_checks).map(|c| syndrome.get(c)).collect(),
            q: self.edge_var.iter().map(|&v| self.prior_llr[v as usize]).collect(),
            r: vec![0.0; self.edge_var.len()],
            post: self.prior_llr.clone(),
            hard: vec![false; self.num_vars],
            parity: Vec::new(),
            unsatisfied: 0,
        };
        st.parity = st.syn.clone();
        st.unsatisfied = st.syn.iter().filter(|&&b| b).count();
        let max = self.config.max_iter;
        let mut snapshot = st.q.clone();
        let (mut power, mut lam) = (1usize, 0usize);
        let same = |a: &[f64], b: &[f64]| a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits());
        let mut it = 1;
        while it <= max {
            if self.bp_step(&mut st) {
                return (st.post, Some(st.hard), it);
            }
            lam += 1;
            if same(&st.q, &snapshot) {
                // Every state on the cycle has already failed the syndrome.
                for _ in 0..(max - it) % lam {
                    self.bp_step(&mut st);
                }
                return (st.post, None, max);
            }
            if lam == power {
                snapshot.copy_from_slice(&st.q);
                power *= 2;
                lam = 0;
            }
            it += 1;
        }
        (st.post, None, max)
    }

    /// One flooding iteration; returns whether the hard decision matches
    /// the syndrome.
    fn bp_step(&self, st: &mut BpState) -> bool {
        let scale = self.config.scale;
        for c in 0..self.num_checks {
            let (s, e) = (self.check_start[c], self.check_start[c + 1]);
            let q = &st.q[s..e];
            let mut sign = st.syn[c];
            let (mut min1, mut min2, mut arg) = (f64::INFINITY, f64::INFINITY, usize::MAX);
            for (i, &m) in q.iter().enumerate() {
                let a = m.abs();
                sign ^= m < 0.0;
                let lower = a < min1;
                min2 = if lower { min1 } else { min2.min(a) };
                arg = if lower { i } else { arg };
                min1 = if lower { a } else { min1 };
            }
            let min1 = if min1.is_finite() { scale * min1 } else { 0.0 };
            let min2 = if min2.is_finite() { scale * min2 } else { 0.0 };
            for (i, (&m, &slot)) in q.iter().zip(&self.edge_slot[s..e]).enumerate() {
                let mag = if i == arg { min2 } else { min1 };
                st.r[slot as usize] = if sign ^ (m < 0.0) { -mag } else { mag };
            }
        }
        for v in 0..self.num_vars {
            let (s, e) = (self.var_start[v], self.var_start[v + 1]);
            let r = &st.r[s..e];
            let total = self.prior_llr[v] + r.iter().sum::<f64>();
            st.post[v] = total;
            for (&rv, &edge) in r.iter().zip(&self.var_edge_list[s..e]) {
                st.q[edge as usize] = total - rv;
            }
            let h = total < 0.0;
            if h != st.hard[v] {
                st.hard[v] = h;
                for &c in &self.var_checks[v] {
                    let p = &mut st.parity[c as usize];
                    *p = !*p;
                    if *p {
                        st.unsatisfied += 1;
                    } else {
                        st.unsatisfied -= 1;
                    }
                }
            }
        }
        st.unsatisfied == 0
    }

    /// Ordered-statistics decoding with the combination sweep: order
    /// columns by posterior reliability, solve on the first information
    /// set, then try every single non-pivot flip and every pair among the
    /// first `osd_order` non-pivots, keeping the cheapest.
    pub fn osd_cs(&self, syndrome: &BitVec, posterior: &[f64]) -> Result<Vec<usize>> {
        let m = self.num_checks;
        let n = self.num_vars;
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| posterior[a].total_cmp(&posterior[b]));
        // Row-major matrix with permuted columns.
        let words = n.div_ceil(64);
        let mut a = vec![0u64; m * words];
        for (j, &v) in order.iter().enumerate() {
            for &c in &self.var_checks[v] {
                a[c as usize * words + j / 64] ^= 1 << (j % 64);
            }
        }
        let mut s: Vec<bool> = (0..m).map(|c| syndrome.get(c)).collect();
        let mut rows: Vec<usize> = (0..m).collect();
        let mut pivots: Vec<usize> = Vec::with_capacity(self.rank);
        let mut is_pivot = vec![false; n];
        let bit = |a: &[u64], r: usize, j: usize| a[r * words + j / 64] >> (j % 64) & 1 == 1;
        for j in 0..n {
            if pivots.len() == self.rank {
                break;
            }
            let k = pivots.len();
            let Some(pos) = (k..m).find(|&i| bit(&a, rows[i], j)) else { continue };
            rows.swap(k, pos);
            let pr = rows[k];
            for i in 0..m {
                let ri = rows[i];
                if i != k && bit(&a, ri, j) {
                    for w in 0..words {
                        let val = a[pr * words + w];
                        a[ri * words + w] ^= val;
                    }
                    s[ri] ^= s[pr];
                }
            }
            pivots.push(j);
            is_pivot[j] = true;
        }
        let r = pivots.len();
        if rows[r..].iter().any(|&ri| s[ri]) {
            return Err(Error::SingularSelection);
        }
        // OSD-0 over the pivot columns.
        let x0: Vec<bool> = (0..r).map(|i| s[rows[i]]).collect();
        let cost_of = |j: usize| self.cost[order[j]];
        let base: f64 = (0..r).filter(|&i| x0[i]).map(|i| cost_of(pivots[i])).sum();
        let delta_row: Vec<f64> = (0..r).map(|i| if x0[i] { -cost_of(pivots[i]) } else { cost_of(pivots[i]) }).collect();
        // Cost change of flipping each non-pivot column.
        let mut delta = vec![0.0f64; n];
        for i in 0..r {
            let ri = rows[i];
            for w in 0..words {
                let mut bits = a[ri * words + w];
                while bits != 0 {
                    let j = w * 64 + bits.trailing_zeros() as usize;
                    bits &= bits - 1;
                    if !is_pivot[j] {
                        delta[j] += delta_row[i];
                    }
                }
            }
        }
        let non_pivots: Vec<usize> = (0..n).filter(|&j| !is_pivot[j]).collect();
        let mut best_cost = base;
        let mut best: Vec<usize> = Vec::new();
        for &j in &non_pivots {
            let c = base + cost_of(j) + delta[j];
            if c < best_cost - 1e-12 {
                best_cost = c;
                best = vec![j];
            }
        }
        let lead: Vec<usize> = non_pivots.iter().copied().take(self.config.osd_order).collect();
        for x in 0..lead.len() {
            for y in x + 1..lead.len() {
                let (j, k) = (lead[x], lead[y]);
                let mut c = base + cost_of(j) + cost_of(k);
                for i in 0..r {
                    if bit(&a, rows[i], j) ^ bit(&a, rows[i], k) {
                        c += delta_row[i];
                    }
                }
                if c < best_cost - 1e-12 {
                    best_cost = c;
                    best = vec![j, k];
                }
            }
        }
        let mut x: Vec<bool> = vec![false; n];
        for i in 0..r {
            x[pivots[i]] = x0[i];
        }
        for &j in &best {
            x[j] ^= true;
            for i in 0..r {
                if bit(&a, rows[i], j) {
                    x[pivots[i]] ^= true;
                }
            }
        }
        let mut out: Vec<usize> = (0..n).filter(|&j| x[j]).map(|j| order[j]).collect();
        out.sort_unstable();
        Ok(out)
    }

    pub fn decode(&self, syndrome: &BitVec) -> Result<Decoded> {
        if syndrome.len() != self.num_checks {
            return Err(invalid("syndrome length differs from detector count"));
        }
        if syndrome.is_zero() {
            return Ok(Decoded {
                correction: Vec::new(),
                observables: BitVec::zeros(self.num_obs),
                bp_converged: true,
                bp_iterations: 0,
            });
        }
        let (post, hard, iters) = self.bp_min_sum(syndrome);
        let (correction, converged) = match hard {
            Some(h) => ((0..self.num_vars).filter(|&v| h[v]).collect(), true),
            None => (self.osd_cs(syndrome, &post)?, false),
        };
        Ok(Decoded {
            observables: self.observables_of(&correction),
            correction,
            bp_converged: converged,
            bp_iterations: iters,
        })
    }
}

/// Decodes many syndromes, preserving order.
pub fn decode_shots(decoder: &BpOsd, syndromes: &[BitVec], exec: Execution) -> Result<Vec<Decoded>> {
    map_slice(exec, syndromes, |s| decoder.decode(s)).into_iter().collect()
}

/// Maximum-likelihood observable class by exhaustive enumeration; for
/// models with at most 20 faults.
pub fn ml_decode(model: &DetectorModel, syndrome: &BitVec) -> Result<BitVec> {
    let n = model.faults.len();
    if n > 20 {
        return Err(invalid("ml_decode enumerates at most 20 faults"));
    }
    let mut mass: std::collections::BTreeMap<Vec<u8>, f64> = std::collections::BTreeMap::new();
    for mask in 0u32..(1 << n) {
        let mut s = BitVec::zeros(model.num_detectors);
        let mut o = BitVec::zeros(model.num_observables);
        let mut pr = 1.0;
        for (v, f) in model.faults.iter().enumerate() {
            if mask >> v & 1 == 1 {
                pr *= f.p;
                f.dets.iter().for_each(|&d| s.flip(d as usize));
                f.obs.iter().for_each(|&k| o.flip(k as usize));
            } else {
                pr *= 1.0 - f.p;
            }
        }
        if s == *syndrome {
            *mass.entry(o.to_bits()).or_insert(0.0) += pr;
        }
    }
    let best = mass
        .into_iter()
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .ok_or(Error::SingularSelection)?;
    Ok(BitVec::from_bits(&best.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::Fault;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn repetition_model(n: usize, p: f64) -> DetectorModel {
        // Bit flips on a length-n repetition code; observable on bit 0.
        let faults = (0..n)
            .map(|i| Fault {
                dets: [i.checked_sub(1), (i + 1 < n).then_some(i)].into_iter().flatten().map(|d| d as u32).collect(),
                obs: if i == 0 { vec![0] } else { vec![] },
                p,
            })
            .collect();
        DetectorModel {
            num_detectors: n - 1,
            num_observables: 1,
            faults,
        }
    }

    fn random_model(rng: &mut ChaCha8Rng, m: usize, n: usize) -> DetectorModel {
        let faults = (0..n)
            .map(|_| {
                let mut dets: Vec<u32> = (0..m as u32).filter(|_| rng.gen_bool(0.3)).collect();
                if dets.is_empty() {
                    dets.push(rng.gen_range(0..m as u32));
                }
                Fault {
                    dets,
                    obs: if rng.gen_bool(0.4) { vec![0] } else { vec![] },
                    p: rng.gen_range(0.01..0.2),
                }
            })
            .collect();
        DetectorModel {
            num_detectors: m,
            num_observables: 1,
            faults,
        }
    }

    #[test]
    fn single_faults_on_repetition_are_corrected() {
        let model = repetition_model(7, 0.05);
        let dec = BpOsd::new(&model, DecoderConfig::default()).unwrap();
        for i in 0..7 {
            let mut s = BitVec::zeros(6);
            model.faults[i].dets.iter().for_each(|&d| s.flip(d as usize));
            let d = dec.decode(&s).unwrap();
            assert_eq!(d.correction, vec![i]);
        }
    }

    #[test]
    fn osd_solutions_satisfy_the_syndrome() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..40 {
            let model = random_model(&mut rng, 6, 14);
            let dec = BpOsd::new(&model, DecoderConfig::default()).unwrap();
            let truth: Vec<usize> = (0..14).filter(|_| rng.gen_bool(0.2)).collect();
            let mut s = BitVec::zeros(6);
            for &v in &truth {
                model.faults[v].dets.iter().for_each(|&d| s.flip(d as usize));
            }
            let post: Vec<f64> = (0..14).map(|_| rng.gen_range(-2.0..5.0)).collect();
            let corr = dec.osd_cs(&s, &post).unwrap();
            let mut got = BitVec::zeros(6);
            for &v in &corr {
                model.faults[v].dets.iter().for_each(|&d| got.flip(d as usize));
            }
            assert_eq!(got, s);
            // The sweep includes the OSD-0 solution, so it never costs more.
            assert!(dec.correction_cost(&corr) <= dec.correction_cost(&osd0(&dec, &s, &post)) + 1e-9);
        }
    }

    #[test]
    fn bp_matches_plain_loop_bitwise() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for trial in 0..60 {
            let model = random_model(&mut rng, 8, 20);
            let max_iter = [1, 2, 7, 64, 1000][trial % 5];
            let dec = BpOsd::new(&model, DecoderConfig { max_iter, ..Default::default() }).unwrap();
            let s = BitVec::from_indices(8, (0..8).filter(|_| rng.gen_bool(0.4)));
            let (pa, ha, ia) = dec.bp_min_sum(&s);
            let (pb, hb, ib) = reference_bp(&dec, &s);
            assert_eq!((ha, ia), (hb, ib));
            assert!(pa.iter().zip(&pb).all(|(x, y)| x.to_bits() == y.to_bits()));
        }
    }

    /// Straightforward min-sum loop without cycle skipping.
    fn reference_bp(dec: &BpOsd, syndrome: &BitVec) -> (Vec<f64>, Option<Vec<bool>>, usize) {
        let ne = dec.edge_var.len();
        let mut q: Vec<f64> = dec.edge_var.iter().map(|&v| dec.prior_llr[v as usize]).collect();
        let mut r = vec![0.0f64; ne];
        let mut post = dec.prior_llr.clone();
        for it in 1..=dec.config.max_iter {
            for c in 0..dec.num_checks {
                let (s, e) = (dec.check_start[c], dec.check_start[c + 1]);
                if s == e {
                    continue;
                }
                let mut sign = syndrome.get(c);
                let (mut min1, mut min2, mut arg) = (f64::INFINITY, f64::INFINITY, usize::MAX);
                for i in s..e {
                    let a = q[i].abs();
                    sign ^= q[i] < 0.0;
                    if a < min1 {
                        min2 = min1;
                        min1 = a;
                        arg = i;
                    } else if a < min2 {
                        min2 = a;
                    }
                }
                for i in s..e {
                    let mag = if i == arg { min2 } else { min1 };
                    let neg = sign ^ (q[i] < 0.0);
                    let val = dec.config.scale * if mag.is_finite() { mag } else { 0.0 };
                    r[i] = if neg { -val } else { val };
                }
            }
            let mut hard = vec![false; dec.num_vars];
            for v in 0..dec.num_vars {
                let total = dec.prior_llr[v] + dec.var_edge_list[dec.var_start[v]..dec.var_start[v + 1]].iter().map(|&e| r[e as usize]).sum::<f64>();
                post[v] = total;
                hard[v] = total < 0.0;
                for &e in &dec.var_edge_list[dec.var_start[v]..dec.var_start[v + 1]] {
                    q[e as usize] = total - r[e as usize];
                }
            }
            if syndrome_of(dec, &hard) == *syndrome {
                return (post, Some(hard), it);
            }
        }
        (post, None, dec.config.max_iter)
    }

    fn syndrome_of(dec: &BpOsd, x: &[bool]) -> BitVec {
        let mut s = BitVec::zeros(dec.num_checks);
        for v in (0..dec.num_vars).filter(|&v| x[v]) {
            for &c in &dec.var_checks[v] {
                s.flip(c as usize);
            }
        }
        s
    }

    /// Plain RREF solution on the first information set.
    fn osd0(dec: &BpOsd, s: &BitVec, post: &[f64]) -> Vec<usize> {
        let order: Vec<usize> = {
            let mut o: Vec<usize> = (0..dec.num_vars).collect();
            o.sort_by(|&a, &b| post[a].total_cmp(&post[b]));
            o
        };
        let h = BitMatrix::from_entries(
            dec.num_checks,
            dec.num_vars,
            order.iter().enumerate().flat_map(|(j, &v)| dec.var_checks[v].iter().map(move |&c| (c as usize, j))),
        );
        let ech = h.echelon();
        let pivots = ech.pivots.clone();
        let hp = h.select_cols(&pivots);
        let x = hp.solve_vec(s).unwrap();
        x.iter_ones().map(|i| order[pivots[i]]).collect()
    }

    #[test]
    fn unreachable_syndrome_is_singular() {
        let model = DetectorModel {
            num_detectors: 2,
            num_observables: 0,
            faults: vec![Fault { dets: vec![0], obs: vec![], p: 0.1 }],
        };
        let dec = BpOsd::new(&model, DecoderConfig::default()).unwrap();
        let s = BitVec::from_indices(2, [1]);
        assert!(matches!(dec.osd_cs(&s, &[0.0]), Err(Error::SingularSelection)));
    }

    #[test]
    fn close_to_maximum_likelihood_on_small_models() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let (mut agree, mut total) = (0, 0);
        for _ in 0..20 {
            let model = random_model(&mut rng, 6, 12);
            let dec = BpOsd::new(&model, DecoderConfig::default()).unwrap();
            for _ in 0..20 {
                let mut s = BitVec::zeros(6);
                for f in &model.faults {
                    if rng.gen_bool(f.p) {
                        f.dets.iter().for_each(|&d| s.flip(d as usize));
                    }
                }
                let ml = ml_decode(&model, &s).unwrap();
                let d = dec.decode(&s).unwrap();
                agree += (ml == d.observables) as usize;
                total += 1;
            }
        }
        assert!(agree as f64 >= 0.85 * total as f64, "{agree}/{total}");
    }
    #[test]
    fn zero_syndrome_converges_immediately() {
        let dec = BpOsd::new(&repetition_model(5, 0.1), DecoderConfig::default()).unwrap();
        let d = dec.decode(&BitVec::zeros(4)).unwrap();
        assert!(d.correction.is_empty() && d.bp_converged && d.bp_iterations == 0);
    }

    #[test]
    fn symmetric_four_cycle_does_not_converge() {
        // Two identical faults on a pair of checks: min-sum flips both or
        // neither on every iteration, so BP never satisfies the syndrome.
        let f = Fault { dets: vec![0, 1], obs: vec![], p: 0.1 };
        let model = DetectorModel {
            num_detectors: 2,
            num_observables: 0,
            faults: vec![f.clone(), f],
        };
        let dec = BpOsd::new(&model, DecoderConfig::default()).unwrap();
        let s = BitVec::from_indices(2, [0, 1]);
        let (post, hard, iters) = dec.bp_min_sum(&s);
        assert!(hard.is_none());
        assert_eq!(iters, 1000);
        assert_eq!(post.len(), 2);
        let d = dec.decode(&s).unwrap();
        assert!(!d.bp_converged);
        assert_eq!(d.correction.len(), 1);
    }

    fn min_cost(dec: &BpOsd, model: &DetectorModel, s: &BitVec) -> f64 {
        let n = model.faults.len();
        (0u32..1 << n)
            .filter_map(|mask| {
                let corr: Vec<usize> = (0..n).filter(|&v| mask >> v & 1 == 1).collect();
                let mut got = BitVec::zeros(model.num_detectors);
                for &v in &corr {
                    model.faults[v].dets.iter().for_each(|&d| got.flip(d as usize));
                }
                (got == *s).then(|| dec.correction_cost(&corr))
            })
            .fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn osd_cost_matches_exhaustive_minimum() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let (mut equal, mut total) = (0, 0);
        for _ in 0..25 {
            let model = random_model(&mut rng, 7, 16);
            let dec = BpOsd::new(&model, DecoderConfig::default()).unwrap();
            for _ in 0..8 {
                let mut s = BitVec::zeros(7);
                for f in &model.faults {
                    if rng.gen_bool(0.25) {
                        f.dets.iter().for_each(|&d| s.flip(d as usize));
                    }
                }
                let (post, _, _) = dec.bp_min_sum(&s);
                let corr = dec.osd_cs(&s, &post).unwrap();
                let (got, best) = (dec.correction_cost(&corr), min_cost(&dec, &model, &s));
                assert!(got >= best - 1e-9);
                equal += ((got - best).abs() < 1e-9) as usize;
                total += 1;
            }
        }
        assert!(equal as f64 >= 0.95 * total as f64, "{equal}/{total}");
    }
}
