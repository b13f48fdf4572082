use super::{Field, FieldError};

/// Cap on the number of items a single enumeration may produce.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget(pub u64);

pub const DEFAULT_BUDGET: Budget = Budget(4_000_000_000);

impl Default for Budget {
    fn default() -> Self {
        DEFAULT_BUDGET
    }
}

impl Budget {
    pub fn check(&self, requested: u128) -> Result<(), FieldError> {
        if requested > self.0 as u128 {
            Err(FieldError::BudgetExceeded { requested, budget: self.0 })
        } else {
            Ok(())
        }
    }
}

/// Lexicographic stream over F_p^dim, optionally pinned to one first coordinate.
#[derive(Debug, Clone)]
pub struct Vectors {
    field: Field,
    dim: usize,
    first: Option<u32>,
    next: Option<Vec<u32>>,
}

impl Vectors {
    pub(super) fn new(field: Field, dim: usize, budget: Budget) -> Result<Self, FieldError> {
        budget.check((field.p() as u128).pow(dim as u32))?;
        Ok(Vectors { field, dim, first: None, next: Some(vec![0; dim]) })
    }

    /// The part of the stream whose first coordinate equals `first`.
    /// Partitions for distinct `first` are disjoint and cover the stream.
    pub fn partition(&self, first: u32) -> Vectors {
        assert!(self.dim > 0 && first < self.field.p());
        let mut start = vec![0; self.dim];
        start[0] = first;
        Vectors { field: self.field, dim: self.dim, first: Some(first), next: Some(start) }
    }

    pub fn restart(&self) -> Vectors {
        match self.first {
            Some(f) => self.partition(f),
            None => Vectors { field: self.field, dim: self.dim, first: None, next: Some(vec![0; self.dim]) },
        }
    }

    pub fn len_total(&self) -> u128 {
        let full = (self.field.p() as u128).pow(self.dim as u32);
        match self.first {
            Some(_) => full / self.field.p() as u128,
            None => full,
        }
    }
}

impl Iterator for Vectors {
    type Item = Vec<u32>;

    fn next(&mut self) -> Option<Vec<u32>> {
        let cur = self.next.take()?;
        let p = self.field.p();
        let lo = if self.first.is_some() { 1 } else { 0 };
        let mut succ = cur.clone();
        let mut k = self.dim;
        let mut done = true;
        while k > lo {
            k -= 1;
            succ[k] += 1;
            if succ[k] < p {
                done = false;
                break;
            }
            succ[k] = 0;
        }
        if !done {
            self.next = Some(succ);
        }
        Some(cur)
    }
}

/// Advance `v` to the next vector of F_p^len in lexicographic order; false on wraparound.
#[inline]
pub fn odometer(v: &mut [u32], p: u32) -> bool {
    let mut k = v.len();
    while k > 0 {
        k -= 1;
        v[k] += 1;
        if v[k] < p {
            return true;
        }
        v[k] = 0;
    }
    false
}
