//! Steinhaus-Johnson-Trotter enumeration of permutations.

use super::OrderingError;

/// Largest `n` the exact enumeration accepts.
pub const MAX_ENUMERATION: usize = 7;

/// Iterator over all `n!` permutations of `0..n`, each reached from the previous
/// one by a single adjacent transposition.
///
/// Yields the permutation together with the left position of the swap that
/// produced it (`None` for the initial identity).
#[derive(Clone, Debug)]
pub struct Sjt {
    perm: Vec<usize>,
    /// `true` when the element at that position points left.
    left: Vec<bool>,
    started: bool,
    steps: u64,
}

impl Sjt {
    pub fn new(n: usize) -> Result<Self, OrderingError> {
        if n == 0 || n > MAX_ENUMERATION {
            return Err(OrderingError::FanoutOutOfRange(n));
        }
        Ok(Self::unchecked(n))
    }

    pub(crate) fn unchecked(n: usize) -> Self {
        Sjt {
            perm: (0..n).collect(),
            left: vec![true; n],
            started: false,
            steps: 0,
        }
    }

    /// Current permutation.
    pub fn current(&self) -> &[usize] {
        &self.perm
    }

    /// Number of permutations emitted so far.
    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// Move to the next permutation. Returns `None` once exhausted, otherwise
    /// the left position of the swap (`Some(None)` for the initial identity).
    fn step(&mut self) -> Option<Option<usize>> {
        if !self.started {
            self.started = true;
            self.steps = 1;
            return Some(None);
        }
        let n = self.perm.len();
        let mut mobile: Option<usize> = None;
        for pos in 0..n {
            let value = self.perm[pos];
            let target = if self.left[pos] {
                pos.checked_sub(1)
            } else {
                (pos + 1 < n).then_some(pos + 1)
            };
            if let Some(t) = target {
                if self.perm[t] < value && mobile.is_none_or(|m| self.perm[m] < value) {
                    mobile = Some(pos);
                }
            }
        }
        let pos = mobile?;
        let value = self.perm[pos];
        let target = if self.left[pos] { pos - 1 } else { pos + 1 };
        self.perm.swap(pos, target);
        self.left.swap(pos, target);
        for p in 0..n {
            if self.perm[p] > value {
                self.left[p] = !self.left[p];
            }
        }
        self.steps += 1;
        Some(Some(pos.min(target)))
    }
}

impl Iterator for Sjt {
    type Item = (Vec<usize>, Option<usize>);

    fn next(&mut self) -> Option<Self::Item> {
        let swap = self.step()?;
        Some((self.perm.clone(), swap))
    }
}

/// Walk every permutation of `0..n` in SJT order, calling `visit(perm, swap)`.
pub fn walk(n: usize, mut visit: impl FnMut(&[usize], Option<usize>)) {
    let mut sjt = Sjt::unchecked(n);
    while let Some(swap) = sjt.step() {
        visit(&sjt.perm, swap);
    }
}

pub fn factorial(n: usize) -> u64 {
    (1..=n as u64).product()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn n1_is_identity_only() {
        let all: Vec<_> = Sjt::new(1).unwrap().collect();
        assert_eq!(all, vec![(vec![0], None)]);
    }

    #[test]
    fn n3_standard_order() {
        let perms: Vec<Vec<usize>> = Sjt::new(3).unwrap().map(|(p, _)| p).collect();
        let expected = [
            [0, 1, 2],
            [0, 2, 1],
            [2, 0, 1],
            [2, 1, 0],
            [1, 2, 0],
            [1, 0, 2],
        ];
        assert_eq!(
            perms,
            expected.iter().map(|p| p.to_vec()).collect::<Vec<_>>()
        );
        let swaps: Vec<Option<usize>> = Sjt::new(3).unwrap().map(|(_, s)| s).collect();
        assert_eq!(
            swaps,
            vec![None, Some(1), Some(0), Some(1), Some(0), Some(1)]
        );
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(Sjt::new(0).is_err());
        assert!(Sjt::new(8).is_err());
    }

    #[test]
    fn walk_matches_iterator() {
        let mut walked = Vec::new();
        walk(4, |p, s| walked.push((p.to_vec(), s)));
        let iterated: Vec<_> = Sjt::new(4).unwrap().collect();
        assert_eq!(walked, iterated);
        assert_eq!(factorial(7), 5040);
    }
}
