use crate::error::{Error, Result};

const BITS: usize = 32;

/// Joe-Kuo `new-joe-kuo-6.21201` rows for dimensions 2..=10: (s, a, m_1..m_s).
const DIRECTION_TABLE: [(u32, u32, &[u32]); 9] = [
    (1, 0, &[1]),
    (2, 1, &[1, 3]),
    (3, 1, &[1, 3, 1]),
    (3, 2, &[1, 1, 1]),
    (4, 1, &[1, 1, 3, 3]),
    (4, 4, &[1, 3, 5, 13]),
    (5, 2, &[1, 1, 5, 5, 17]),
    (5, 4, &[1, 1, 5, 5, 5]),
    (5, 7, &[1, 1, 7, 11, 19]),
];

pub const MAX_SOBOL_DIM: usize = DIRECTION_TABLE.len() + 1;

/// Unscrambled Sobol sequence (Gray-code construction), leading zero point skipped.
#[derive(Clone, Debug)]
pub struct Sobol {
    directions: Vec<[u32; BITS]>,
    state: Vec<u32>,
    index: u64,
}

impl Sobol {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 || dim > MAX_SOBOL_DIM {
            return Err(Error::arg(format!("Sobol dimension must be in 1..={MAX_SOBOL_DIM}, got {dim}")));
        }
        let mut directions = Vec::with_capacity(dim);
        let mut first = [0u32; BITS];
        for (k, v) in first.iter_mut().enumerate() {
            *v = 1 << (BITS - 1 - k);
        }
        directions.push(first);
        for &(s, a, m) in DIRECTION_TABLE.iter().take(dim - 1) {
            let s = s as usize;
            let mut v = [0u32; BITS];
            for k in 0..s.min(BITS) {
                v[k] = m[k] << (BITS - 1 - k);
            }
            for k in s..BITS {
                let mut x = v[k - s] ^ (v[k - s] >> s);
                for j in 1..s {
                    if (a >> (s - 1 - j)) & 1 == 1 {
                        x ^= v[k - j];
                    }
                }
                v[k] = x;
            }
            directions.push(v);
        }
        let mut seq = Sobol { directions, state: vec![0; dim], index: 0 };
        // the all-zeros point is index 0
        seq.advance();
        Ok(seq)
    }

    fn advance(&mut self) -> Vec<f64> {
        let point = self.state.iter().map(|&s| s as f64 / 4_294_967_296.0).collect();
        let c = (!self.index).trailing_zeros() as usize;
        for (s, v) in self.state.iter_mut().zip(&self.directions) {
            *s ^= v[c.min(BITS - 1)];
        }
        self.index += 1;
        point
    }
}

impl Iterator for Sobol {
    type Item = Vec<f64>;

    fn next(&mut self) -> Option<Vec<f64>> {
        Some(self.advance())
    }
}

const PRIMES: [u64; 10] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29];

pub const MAX_HALTON_DIM: usize = PRIMES.len();

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while i > 0 {
        r += (i % base) as f64 * f;
        i /= base;
        f *= inv;
    }
    r
}

/// Unscrambled Halton sequence over the first `dim` primes, starting at index 1.
#[derive(Clone, Debug)]
pub struct Halton {
    dim: usize,
    index: u64,
}

impl Halton {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 || dim > MAX_HALTON_DIM {
            return Err(Error::arg(format!("Halton dimension must be in 1..={MAX_HALTON_DIM}, got {dim}")));
        }
        Ok(Halton { dim, index: 1 })
    }
}

impl Iterator for Halton {
    type Item = Vec<f64>;

    fn next(&mut self) -> Option<Vec<f64>> {
        let p = PRIMES[..self.dim].iter().map(|&b| radical_inverse(self.index, b)).collect();
        self.index += 1;
        Some(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sobol_first_dimension() {
        let pts: Vec<f64> = Sobol::new(1).unwrap().take(7).map(|p| p[0]).collect();
        assert_eq!(pts, vec![0.5, 0.75, 0.25, 0.375, 0.875, 0.625, 0.125]);
    }

    #[test]
    fn sobol_second_dimension() {
        let pts: Vec<Vec<f64>> = Sobol::new(2).unwrap().take(4).collect();
        assert_eq!(pts[0], vec![0.5, 0.5]);
        assert_eq!(pts[1], vec![0.75, 0.25]);
        assert_eq!(pts[2], vec![0.25, 0.75]);
        assert_eq!(pts[3], vec![0.375, 0.375]);
    }

    #[test]
    fn halton_leading_points() {
        let pts: Vec<Vec<f64>> = Halton::new(2).unwrap().take(3).collect();
        let close = |a: &[f64], b: &[f64]| a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-15);
        assert!(close(&pts[0], &[0.5, 1.0 / 3.0]));
        assert!(close(&pts[1], &[0.25, 2.0 / 3.0]));
        assert!(close(&pts[2], &[0.75, 1.0 / 9.0]));
    }

    #[test]
    fn dimension_limits() {
        assert!(Sobol::new(0).is_err());
        assert!(Sobol::new(MAX_SOBOL_DIM + 1).is_err());
        assert!(Halton::new(11).is_err());
    }
}
