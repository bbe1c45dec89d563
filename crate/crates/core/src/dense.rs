//! Growable storage indexed by a signed integer.
//!
//! Walks on ℤ and on graphs with small integer node ids touch a contiguous
//! window of indices. [`SignedVec`] stores that window densely and reports the
//! default value for anything never written, which gives the sparse "absent
//! means zero" semantics without hashing on the hot path.

#[derive(Debug, Clone, PartialEq)]
pub struct SignedVec<T> {
    nonneg: Vec<T>,
    neg: Vec<T>,
    default: T,
}

impl<T: Clone> SignedVec<T> {
    pub fn new(default: T) -> Self {
        Self { nonneg: Vec::new(), neg: Vec::new(), default }
    }

    #[inline]
    pub fn get(&self, i: i64) -> &T {
        let slot = if i >= 0 { self.nonneg.get(i as usize) } else { self.neg.get((-1 - i) as usize) };
        slot.unwrap_or(&self.default)
    }

    #[inline]
    pub fn get_mut(&mut self, i: i64) -> &mut T {
        let (v, idx) = if i >= 0 { (&mut self.nonneg, i as usize) } else { (&mut self.neg, (-1 - i) as usize) };
        if idx >= v.len() {
            let new_len = (idx + 1).max(v.len() * 2).max(16);
            v.resize(new_len, self.default.clone());
        }
        &mut v[idx]
    }

    /// Indices whose slot has been allocated, in increasing order.
    pub fn allocated_range(&self) -> std::ops::Range<i64> {
        -(self.neg.len() as i64)..self.nonneg.len() as i64
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, &T)> {
        self.allocated_range().map(move |i| (i, self.get(i)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn absent_reads_default_and_writes_grow_both_sides() {
        let mut v = SignedVec::new(0u64);
        assert_eq!(*v.get(-5), 0);
        *v.get_mut(-5) += 2;
        *v.get_mut(40) += 1;
        assert_eq!(*v.get(-5), 2);
        assert_eq!(*v.get(40), 1);
        assert_eq!(*v.get(41), 0);
        let total: u64 = v.iter().map(|(_, x)| *x).sum();
        assert_eq!(total, 3);
    }
}
