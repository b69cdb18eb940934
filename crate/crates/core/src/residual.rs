use alloc::vec;
use alloc::vec::Vec;

/// Largest absolute entry of a dense tensor together with its multi-index.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexedMax {
    pub max_abs: f64,
    pub indices: Vec<usize>,
}

impl IndexedMax {
    pub fn zero(order: usize) -> Self {
        Self {
            max_abs: 0.0,
            indices: vec![0; order],
        }
    }

    /// Scans a row-major tensor with the given shape. The first maximal entry
    /// wins ties; NaN entries are reported as infinite.
    pub fn of_dense(values: &[f64], shape: &[usize]) -> Self {
        debug_assert_eq!(values.len(), shape.iter().product::<usize>());
        let mut best = 0.0f64;
        let mut at = 0;
        for (pos, v) in values.iter().enumerate() {
            let a = if v.is_nan() { f64::INFINITY } else { v.abs() };
            if a > best {
                best = a;
                at = pos;
            }
        }
        let mut indices = vec![0; shape.len()];
        let mut rem = at;
        for (slot, &dim) in indices.iter_mut().zip(shape).rev() {
            *slot = rem % dim;
            rem /= dim;
        }
        Self {
            max_abs: best,
            indices,
        }
    }

    /// Keeps whichever of the two is larger.
    pub fn merge(self, other: Self) -> Self {
        if other.max_abs > self.max_abs {
            other
        } else {
            self
        }
    }
}
