use super::{BitMatrix, BitVec};

/// Incrementally built row space, kept in a form where each stored row has a
/// distinct leading bit that no later row contains.
#[derive(Clone, Debug)]
pub struct SpanBuilder {
    len: usize,
    rows: Vec<(usize, BitVec)>,
}

impl SpanBuilder {
    pub fn new(len: usize) -> Self {
        Self { len, rows: Vec::new() }
    }

    pub fn from_matrix(m: &BitMatrix) -> Self {
        let mut s = Self::new(m.cols());
        for r in m.row_iter() {
            s.insert(r);
        }
        s
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn reduce(&self, v: &BitVec) -> BitVec {
        let mut v = v.clone();
        for (p, row) in &self.rows {
            if v.get(*p) {
                v.xor_assign(row);
            }
        }
        v
    }

    pub fn contains(&self, v: &BitVec) -> bool {
        self.reduce(v).is_zero()
    }

    /// Adds `v` to the span; returns whether it was independent.
    pub fn insert(&mut self, v: BitVec) -> bool {
        assert_eq!(v.len(), self.len);
        let r = self.reduce(&v);
        let lead = r.iter_ones().next();
        match lead {
            Some(p) => {
                self.rows.push((p, r));
                true
            }
            None => false,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn detects_dependence() {
        let mut s = SpanBuilder::new(4);
        assert!(s.insert(BitVec::from_bits(&[1, 1, 0, 0])));
        assert!(s.insert(BitVec::from_bits(&[0, 1, 1, 0])));
        assert!(!s.insert(BitVec::from_bits(&[1, 0, 1, 0])));
        assert!(s.contains(&BitVec::zeros(4)));
        assert!(!s.contains(&BitVec::from_bits(&[0, 0, 0, 1])));
        assert_eq!(s.dim(), 2);
    }
}
