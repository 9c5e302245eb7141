//! Linear systems over GF(2), solved by Gauss-Jordan elimination on packed
//! 64-bit words.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, LabError, Result};

/// A fixed-length bit vector packed into 64-bit words.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BitRow {
    words: Vec<u64>,
    len: usize,
}

impl BitRow {
    pub fn zeros(len: usize) -> Self {
        Self { words: vec![0; len.div_ceil(64)], len }
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut row = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            row.set(i, b);
        }
        row
    }

    pub fn from_indices(len: usize, indices: &[usize]) -> Result<Self> {
        let mut row = Self::zeros(len);
        for &i in indices {
            if i >= len {
                return Err(LabError::OutOfRange(format!("bit index {i} >= {len}")));
            }
            row.set(i, true);
        }
        Ok(row)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> bool {
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    pub fn set(&mut self, i: usize, v: bool) {
        let mask = 1u64 << (i % 64);
        if v {
            self.words[i / 64] |= mask;
        } else {
            self.words[i / 64] &= !mask;
        }
    }

    fn xor_assign(&mut self, other: &BitRow) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    /// Inner product mod 2.
    pub fn dot(&self, other: &BitRow) -> bool {
        let ones: u32 = self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones())
            .sum();
        ones % 2 == 1
    }

    pub fn ones(&self) -> Vec<usize> {
        (0..self.len).filter(|&i| self.get(i)).collect()
    }

    pub fn to_bools(&self) -> Vec<bool> {
        (0..self.len).map(|i| self.get(i)).collect()
    }
}

/// Inner product of two bit vectors mod 2.
pub fn parity_dot(s: &[bool], bits: &[bool]) -> Result<bool> {
    if s.len() != bits.len() {
        return Err(LabError::DimensionMismatch { expected: s.len(), got: bits.len() });
    }
    Ok(s.iter().zip(bits).filter(|(a, b)| **a && **b).count() % 2 == 1)
}

/// Equations `row . x = target` over n unknowns.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Gf2System {
    rows: Vec<(BitRow, bool)>,
    n: usize,
}

impl Gf2System {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(invalid("a GF(2) system needs at least one unknown"));
        }
        Ok(Self { rows: Vec::new(), n })
    }

    pub fn push(&mut self, row: BitRow, target: bool) -> Result<()> {
        if row.len() != self.n {
            return Err(LabError::DimensionMismatch { expected: self.n, got: row.len() });
        }
        self.rows.push((row, target));
        Ok(())
    }

    pub fn from_rows(n: usize, rows: Vec<(BitRow, bool)>) -> Result<Self> {
        let mut sys = Self::new(n)?;
        for (row, t) in rows {
            sys.push(row, t)?;
        }
        Ok(sys)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rows(&self) -> &[(BitRow, bool)] {
        &self.rows
    }

    pub fn is_satisfied_by(&self, x: &BitRow) -> bool {
        self.rows.iter().all(|(row, t)| row.dot(x) == *t)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Gf2Solution {
    pub x: BitRow,
    /// Unknowns left unconstrained; they are set to 0 in `x`.
    pub free_vars: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Gf2Outcome {
    Solved(Gf2Solution),
    Inconsistent,
}

impl Gf2Outcome {
    pub fn solution(self) -> Option<Gf2Solution> {
        match self {
            Gf2Outcome::Solved(s) => Some(s),
            Gf2Outcome::Inconsistent => None,
        }
    }
}

/// Gauss-Jordan elimination. For each column the pivot is the lowest-index
/// remaining row with that bit set; free variables are zero-filled.
pub fn gf2_solve(sys: &Gf2System) -> Gf2Outcome {
    let n = sys.n;
    let mut rows: Vec<(BitRow, bool)> = sys.rows.clone();
    let mut pivot_cols = Vec::new();
    let mut rank = 0;

    for col in 0..n {
        let Some(p) = (rank..rows.len()).find(|&r| rows[r].0.get(col)) else {
            continue;
        };
        // Rotate instead of swap so non-pivot rows keep their relative order.
        rows[rank..=p].rotate_right(1);
        let (pivot_row, pivot_t) = rows[rank].clone();
        for (r, (row, t)) in rows.iter_mut().enumerate() {
            if r != rank && row.get(col) {
                row.xor_assign(&pivot_row);
                *t ^= pivot_t;
            }
        }
        pivot_cols.push(col);
        rank += 1;
        if rank == rows.len() {
            break;
        }
    }

    // Any remaining row is all-zero; a set target means 0 = 1.
    if rows[rank..].iter().any(|(_, t)| *t) {
        return Gf2Outcome::Inconsistent;
    }

    let mut x = BitRow::zeros(n);
    for (r, &col) in pivot_cols.iter().enumerate() {
        // Reduced form: the pivot row has no other pivot columns, and free
        // columns are zero, so the pivot value is the target.
        x.set(col, rows[r].1);
    }
    let free_vars = (0..n).filter(|c| !pivot_cols.contains(c)).collect();
    debug_assert!(sys.is_satisfied_by(&x));
    Gf2Outcome::Solved(Gf2Solution { x, free_vars })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn row(bits: &[u8]) -> BitRow {
        BitRow::from_bools(&bits.iter().map(|&b| b == 1).collect::<Vec<_>>())
    }

    fn brute_force(sys: &Gf2System) -> Vec<u64> {
        let n = sys.n();
        (0..1u64 << n)
            .filter(|&a| {
                let x = BitRow::from_bools(&(0..n).map(|i| (a >> i) & 1 == 1).collect::<Vec<_>>());
                sys.is_satisfied_by(&x)
            })
            .collect()
    }

    fn as_int(x: &BitRow) -> u64 {
        (0..x.len()).filter(|&i| x.get(i)).map(|i| 1u64 << i).sum()
    }

    #[test]
    fn identity_system() {
        let sys = Gf2System::from_rows(
            3,
            vec![(row(&[1, 0, 0]), true), (row(&[0, 1, 0]), false), (row(&[0, 0, 1]), true)],
        )
        .unwrap();
        let sol = gf2_solve(&sys).solution().unwrap();
        assert_eq!(sol.x.to_bools(), vec![true, false, true]);
        assert!(sol.free_vars.is_empty());
    }

    #[test]
    fn two_by_two_matches_enumeration() {
        // Of the four assignments only (0,1) satisfies x0+x1=1, x1=1.
        let sys = Gf2System::from_rows(2, vec![(row(&[1, 1]), true), (row(&[0, 1]), true)]).unwrap();
        assert_eq!(brute_force(&sys), vec![0b10]);
        let sol = gf2_solve(&sys).solution().unwrap();
        assert_eq!(sol.x.to_bools(), vec![false, true]);
    }

    #[test]
    fn contradiction_is_inconsistent() {
        let sys = Gf2System::from_rows(1, vec![(row(&[1]), false), (row(&[1]), true)]).unwrap();
        assert_eq!(gf2_solve(&sys), Gf2Outcome::Inconsistent);
    }

    #[test]
    fn underdetermined_zero_fills() {
        let sys = Gf2System::from_rows(3, vec![(row(&[0, 1, 1]), true)]).unwrap();
        let sol = gf2_solve(&sys).solution().unwrap();
        assert_eq!(sol.x.to_bools(), vec![false, true, false]);
        assert_eq!(sol.free_vars, vec![0, 2]);
    }

    #[test]
    fn empty_system_all_free() {
        let sys = Gf2System::new(4).unwrap();
        let sol = gf2_solve(&sys).solution().unwrap();
        assert_eq!(sol.free_vars, vec![0, 1, 2, 3]);
        assert!(Gf2System::new(0).is_err());
    }

    #[test]
    fn row_length_checked() {
        let mut sys = Gf2System::new(3).unwrap();
        assert!(sys.push(row(&[1, 0]), true).is_err());
    }

    #[test]
    fn parity_dot_examples() {
        assert!(parity_dot(&[true, false, true], &[true, true, false]).unwrap());
        assert!(!parity_dot(&[false; 5], &[true, false, true, true, false]).unwrap());
        assert!(!parity_dot(&[true, true], &[true, true]).unwrap());
        assert!(parity_dot(&[true], &[true, false]).is_err());
    }

    #[test]
    fn wide_rows_span_words() {
        let n = 130;
        let mut sys = Gf2System::new(n).unwrap();
        for i in 0..n {
            let mut r = BitRow::zeros(n);
            r.set(i, true);
            if i + 1 < n {
                r.set(i + 1, true);
            }
            sys.push(r, i % 3 == 0).unwrap();
        }
        let sol = gf2_solve(&sys).solution().unwrap();
        assert!(sys.is_satisfied_by(&sol.x));
        assert!(sol.free_vars.is_empty());
    }

    #[test]
    fn agrees_with_brute_force_on_random_systems() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..300 {
            let n = rng.random_range(1..=8);
            let m = rng.random_range(0..=10);
            let rows = (0..m)
                .map(|_| {
                    let bits: Vec<bool> = (0..n).map(|_| rng.random::<bool>()).collect();
                    (BitRow::from_bools(&bits), rng.random::<bool>())
                })
                .collect();
            let sys = Gf2System::from_rows(n, rows).unwrap();
            let all = brute_force(&sys);
            match gf2_solve(&sys) {
                Gf2Outcome::Inconsistent => assert!(all.is_empty()),
                Gf2Outcome::Solved(sol) => {
                    assert!(all.contains(&as_int(&sol.x)));
                    assert_eq!(all.len(), 1 << sol.free_vars.len());
                }
            }
        }
    }

    proptest! {
        #[test]
        fn solutions_satisfy_every_row(
            n in 1usize..20,
            raw in proptest::collection::vec((any::<u32>(), any::<bool>()), 0..25),
        ) {
            let rows = raw.iter().map(|&(bits, t)| {
                (BitRow::from_bools(&(0..n).map(|i| (bits >> (i % 32)) & 1 == 1).collect::<Vec<_>>()), t)
            }).collect();
            let sys = Gf2System::from_rows(n, rows).unwrap();
            let a = gf2_solve(&sys);
            prop_assert_eq!(a.clone(), gf2_solve(&sys));
            if let Gf2Outcome::Solved(sol) = a {
                prop_assert!(sys.is_satisfied_by(&sol.x));
                for &f in &sol.free_vars {
                    prop_assert!(!sol.x.get(f));
                }
            }
        }
    }
}
