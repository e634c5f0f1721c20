use rand::Rng;

use super::ir::{Channel, Circuit, Gate, Op, PauliKind};

/// Aaronson–Gottesman stabilizer tableau with destabilizers.
///
/// Rows `0..n` are destabilizers, `n..2n` stabilizers, row `2n` is scratch.
#[derive(Clone, Debug)]
pub struct Tableau {
    n: usize,
    words: usize,
    x: Vec<u64>,
    z: Vec<u64>,
    r: Vec<bool>,
}

impl Tableau {
    /// The all-`|0⟩` state.
    pub fn new(n: usize) -> Self {
        let words = n.div_ceil(64).max(1);
        let rows = 2 * n + 1;
        let mut t = Self {
            n,
            words,
            x: vec![0; rows * words],
            z: vec![0; rows * words],
            r: vec![false; rows],
        };
        for i in 0..n {
            t.x[i * words + i / 64] |= 1 << (i % 64);
            t.z[(n + i) * words + i / 64] |= 1 << (i % 64);
        }
        t
    }

    fn bit(v: &[u64], row: usize, words: usize, q: usize) -> bool {
        v[row * words + q / 64] >> (q % 64) & 1 == 1
    }

    fn xb(&self, row: usize, q: usize) -> bool {
        Self::bit(&self.x, row, self.words, q)
    }

    fn toggle(v: &mut [u64], row: usize, words: usize, q: usize) {
        v[row * words + q / 64] ^= 1 << (q % 64);
    }

    pub fn h(&mut self, a: usize) {
        let (w, m) = (a / 64, 1u64 << (a % 64));
        for i in 0..2 * self.n {
            let idx = i * self.words + w;
            let (xa, za) = (self.x[idx] & m, self.z[idx] & m);
            if xa != 0 && za != 0 {
                self.r[i] ^= true;
            }
            self.x[idx] = (self.x[idx] & !m) | za;
            self.z[idx] = (self.z[idx] & !m) | xa;
        }
    }

    pub fn cx(&mut self, a: usize, b: usize) {
        let words = self.words;
        for i in 0..2 * self.n {
            let xa = Self::bit(&self.x, i, words, a);
            let zb = Self::bit(&self.z, i, words, b);
            let xb = Self::bit(&self.x, i, words, b);
            let za = Self::bit(&self.z, i, words, a);
            if xa && zb && (xb == za) {
                self.r[i] ^= true;
            }
            if xa {
                Self::toggle(&mut self.x, i, words, b);
            }
            if zb {
                Self::toggle(&mut self.z, i, words, a);
            }
        }
    }

    pub fn pauli(&mut self, a: usize, p: PauliKind) {
        let (px, pz) = p.bits();
        for i in 0..2 * self.n {
            // Conjugation flips the sign of rows that anticommute with p.
            let anti = (px && Self::bit(&self.z, i, self.words, a)) ^ (pz && self.xb(i, a));
            self.r[i] ^= anti;
        }
    }

    /// Row `h` ← row `h` · row `i`, tracking the sign.
    fn rowsum(&mut self, h: usize, i: usize) {
        let w = self.words;
        let mut sum: i64 = 2 * (self.r[h] as i64 + self.r[i] as i64);
        for k in 0..w {
            let (x1, z1) = (self.x[i * w + k], self.z[i * w + k]);
            let (x2, z2) = (self.x[h * w + k], self.z[h * w + k]);
            let y1 = x1 & z1;
            let xo = x1 & !z1;
            let zo = !x1 & z1;
            let plus = (y1 & z2 & !x2) | (xo & z2 & x2) | (zo & x2 & !z2);
            let minus = (y1 & x2 & !z2) | (xo & z2 & !x2) | (zo & x2 & z2);
            sum += plus.count_ones() as i64 - minus.count_ones() as i64;
            self.x[h * w + k] ^= x1;
            self.z[h * w + k] ^= z1;
        }
        self.r[h] = sum.rem_euclid(4) == 2;
    }

    fn copy_row(&mut self, dst: usize, src: usize) {
        let w = self.words;
        self.x.copy_within(src * w..(src + 1) * w, dst * w);
        self.z.copy_within(src * w..(src + 1) * w, dst * w);
        self.r[dst] = self.r[src];
    }

    fn clear_row(&mut self, row: usize) {
        let w = self.words;
        self.x[row * w..(row + 1) * w].iter_mut().for_each(|v| *v = 0);
        self.z[row * w..(row + 1) * w].iter_mut().for_each(|v| *v = 0);
        self.r[row] = false;
    }

    /// Z measurement; returns `(outcome, was_random)`.
    pub fn measure_z(&mut self, a: usize, rng: &mut impl Rng) -> (bool, bool) {
        let n = self.n;
        if let Some(p) = (n..2 * n).find(|&p| self.xb(p, a)) {
            for i in 0..2 * n {
                if i != p && self.xb(i, a) {
                    self.rowsum(i, p);
                }
            }
            self.copy_row(p - n, p);
            self.clear_row(p);
            Self::toggle(&mut self.z, p, self.words, a);
            let out: bool = rng.gen();
            self.r[p] = out;
            (out, true)
        } else {
            let s = 2 * n;
            self.clear_row(s);
            for i in 0..n {
                if self.xb(i, a) {
                    self.rowsum(s, i + n);
                }
            }
            (self.r[s], false)
        }
    }

    pub fn reset_z(&mut self, a: usize, rng: &mut impl Rng) {
        if self.measure_z(a, rng).0 {
            self.pauli(a, PauliKind::X);
        }
    }
}

/// Runs `c` on a tableau, sampling noise channels with `rng`. Returns the
/// measurement record.
pub fn run_tableau(c: &Circuit, rng: &mut impl Rng) -> Vec<bool> {
    let mut t = Tableau::new(c.num_qubits);
    let mut rec = Vec::with_capacity(c.num_records);
    for op in c.ops() {
        match *op {
            Op::Gate(g) => match g {
                Gate::ResetZ(q) => t.reset_z(q as usize, rng),
                Gate::ResetX(q) => {
                    t.reset_z(q as usize, rng);
                    t.h(q as usize);
                }
                Gate::Cx(a, b) => t.cx(a as usize, b as usize),
                Gate::MeasureZ(q) => rec.push(t.measure_z(q as usize, rng).0),
                Gate::MeasureX(q) => {
                    t.h(q as usize);
                    rec.push(t.measure_z(q as usize, rng).0);
                    t.h(q as usize);
                }
                Gate::Idle(_) => {}
                Gate::X(q) => t.pauli(q as usize, PauliKind::X),
                Gate::Z(q) => t.pauli(q as usize, PauliKind::Z),
            },
            Op::Noise(ch) => {
                if rng.gen::<f64>() >= ch.probability() {
                    continue;
                }
                if let Channel::RecordFlip { record, .. } = ch {
                    rec[record as usize] ^= true;
                    continue;
                }
                let k = rng.gen_range(0..ch.outcome_count());
                for (q, p) in ch.outcome(k) {
                    t.pauli(q as usize, p);
                }
            }
        }
    }
    rec
}

/// Parities of detector and observable records.
pub fn annotate(c: &Circuit, rec: &[bool]) -> (Vec<bool>, Vec<bool>) {
    let par = |rs: &[u32]| rs.iter().fold(false, |a, &r| a ^ rec[r as usize]);
    (
        c.detectors.iter().map(|d| par(&d.records)).collect(),
        c.observables.iter().map(|o| par(&o.records)).collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn bell_pair_outcomes_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut ones = 0;
        for _ in 0..64 {
            let mut t = Tableau::new(2);
            t.h(0);
            t.cx(0, 1);
            let (a, ra) = t.measure_z(0, &mut rng);
            let (b, rb) = t.measure_z(1, &mut rng);
            assert!(ra && !rb);
            assert_eq!(a, b);
            ones += a as usize;
        }
        assert!(ones > 10 && ones < 54);
    }

    #[test]
    fn x_flips_z_measurement() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut t = Tableau::new(3);
        t.pauli(1, PauliKind::X);
        t.cx(1, 2);
        assert_eq!(t.measure_z(0, &mut rng), (false, false));
        assert_eq!(t.measure_z(1, &mut rng), (true, false));
        assert_eq!(t.measure_z(2, &mut rng), (true, false));
    }

    #[test]
    fn plus_state_x_parity_is_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut t = Tableau::new(3);
        t.h(0);
        t.h(1);
        // X⊗X parity onto ancilla 2 prepared in |+⟩.
        t.h(2);
        t.cx(2, 0);
        t.cx(2, 1);
        t.h(2);
        assert_eq!(t.measure_z(2, &mut rng), (false, false));
        t.pauli(0, PauliKind::Z);
        t.reset_z(2, &mut rng);
        t.h(2);
        t.cx(2, 0);
        t.cx(2, 1);
        t.h(2);
        assert_eq!(t.measure_z(2, &mut rng), (true, false));
    }
}
