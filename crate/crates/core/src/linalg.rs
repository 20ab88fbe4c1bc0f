//! Incremental Gaussian elimination over a small finite field.
//!
//! Equations are added one at a time in a caller-chosen canonical order, so
//! an inconsistency is reported at the first equation that cannot be
//! satisfied together with all earlier ones.

use crate::field::FiniteField;

#[derive(Clone, Debug)]
struct Pivot {
    col: usize,
    row: Vec<u32>,
    rhs: u32,
}

#[derive(Clone, Debug)]
pub struct LinearSystem {
    field: FiniteField,
    nvars: usize,
    pivots: Vec<Pivot>,
    equations: usize,
    inconsistent: Option<usize>,
}

impl LinearSystem {
    pub fn new(field: FiniteField, nvars: usize) -> Self {
        LinearSystem {
            field,
            nvars,
            pivots: Vec::new(),
            equations: 0,
            inconsistent: None,
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    /// Index (in insertion order) of the first equation found inconsistent.
    pub fn inconsistency(&self) -> Option<usize> {
        self.inconsistent
    }

    /// Adds `sum_j coeffs[j] * x_j = rhs`. Returns `false` if this equation is
    /// inconsistent with the earlier ones.
    pub fn push(&mut self, coeffs: &[u32], rhs: u32) -> bool {
        assert_eq!(coeffs.len(), self.nvars, "equation width");
        let index = self.equations;
        self.equations += 1;
        let f = &self.field;
        let mut row = coeffs.to_vec();
        let mut rhs = rhs;
        for p in &self.pivots {
            let c = row[p.col];
            if c != 0 {
                for (r, &x) in row.iter_mut().zip(p.row.iter()) {
                    *r = f.sub(*r, f.mul(c, x));
                }
                rhs = f.sub(rhs, f.mul(c, p.rhs));
            }
        }
        match row.iter().position(|&x| x != 0) {
            Some(col) => {
                let inv = f.inv(row[col]).expect("nonzero pivot");
                for r in row.iter_mut() {
                    *r = f.mul(*r, inv);
                }
                rhs = f.mul(rhs, inv);
                self.pivots.push(Pivot { col, row, rhs });
                true
            }
            None if rhs == 0 => true,
            None => {
                if self.inconsistent.is_none() {
                    self.inconsistent = Some(index);
                }
                false
            }
        }
    }

    /// A solution with every free variable set to zero, or `None` if the
    /// system is inconsistent.
    pub fn solve(&self) -> Option<Vec<u32>> {
        if self.inconsistent.is_some() {
            return None;
        }
        let f = &self.field;
        let mut x = vec![0u32; self.nvars];
        // Later pivot rows vanish on earlier pivot columns, so back-substitute
        // in reverse insertion order.
        for p in self.pivots.iter().rev() {
            let mut v = p.rhs;
            for (j, &a) in p.row.iter().enumerate() {
                if j != p.col && a != 0 {
                    v = f.sub(v, f.mul(a, x[j]));
                }
            }
            x[p.col] = v;
        }
        Some(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_and_checks() {
        let f = FiniteField::f4();
        let w = f.gen();
        // x + w y = 1 ; y + z = w ; x + z = 0
        let rows = [(vec![1, w, 0], 1), (vec![0, 1, 1], w), (vec![1, 0, 1], 0)];
        let mut sys = LinearSystem::new(f.clone(), 3);
        for (r, b) in &rows {
            assert!(sys.push(r, *b));
        }
        let x = sys.solve().unwrap();
        for (r, b) in &rows {
            let lhs = r
                .iter()
                .zip(&x)
                .fold(0, |acc, (&a, &v)| f.add(acc, f.mul(a, v)));
            assert_eq!(lhs, *b);
        }
    }

    #[test]
    fn reports_first_inconsistent_equation() {
        let f = FiniteField::f2();
        let mut sys = LinearSystem::new(f, 2);
        assert!(sys.push(&[1, 1], 1));
        assert!(sys.push(&[0, 0], 0));
        assert!(sys.push(&[1, 0], 0));
        assert!(!sys.push(&[0, 1], 0));
        assert_eq!(sys.inconsistency(), Some(3));
        assert!(sys.solve().is_none());
    }

    #[test]
    fn free_variables_default_to_zero() {
        let f = FiniteField::f3();
        let mut sys = LinearSystem::new(f, 3);
        sys.push(&[0, 1, 2], 1);
        assert_eq!(sys.solve().unwrap(), vec![0, 1, 0]);
        assert_eq!(sys.rank(), 1);
    }
}
