use crate::error::{Error, Result};

/// Symmetric positive definite matrix stored by its lower band.
#[derive(Debug, Clone)]
pub struct BandedSpd {
    n: usize,
    w: usize,
    /// Row `i` holds `A[i][i-w..=i]`, so `data[i * (w + 1) + (w - k)] = A[i][i - k]`.
    data: Vec<f64>,
}

impl BandedSpd {
    pub fn zeros(n: usize, w: usize) -> Self {
        BandedSpd {
            n,
            w,
            data: vec![0.0; n * (w + 1)],
        }
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        i * (self.w + 1) + self.w + j - i
    }

    /// Adds `v` to `A[i][j]` (and implicitly `A[j][i]`).
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        debug_assert!(i - j <= self.w);
        let k = self.idx(i, j);
        self.data[k] += v;
    }

    /// In-place Cholesky factorization `A = L Lᵀ`.
    pub fn factor(&mut self) -> Result<()> {
        let w = self.w;
        for i in 0..self.n {
            let j0 = i.saturating_sub(w);
            for j in j0..=i {
                let k0 = j0.max(j.saturating_sub(w));
                let mut s = self.data[self.idx(i, j)];
                for k in k0..j {
                    s -= self.data[self.idx(i, k)] * self.data[self.idx(j, k)];
                }
                if j == i {
                    if !(s > 0.0) {
                        return Err(Error::Domain(format!("matrix is not positive definite at row {i}")));
                    }
                    let d = self.idx(i, i);
                    self.data[d] = s.sqrt();
                } else {
                    let d = self.data[self.idx(j, j)];
                    let k = self.idx(i, j);
                    self.data[k] = s / d;
                }
            }
        }
        Ok(())
    }

    /// Solves `A x = b` in place after [`BandedSpd::factor`].
    pub fn solve(&self, b: &mut [f64]) {
        let w = self.w;
        for i in 0..self.n {
            let mut s = b[i];
            for k in i.saturating_sub(w)..i {
                s -= self.data[self.idx(i, k)] * b[k];
            }
            b[i] = s / self.data[self.idx(i, i)];
        }
        for i in (0..self.n).rev() {
            let mut s = b[i];
            for k in i + 1..(i + w + 1).min(self.n) {
                s -= self.data[self.idx(k, i)] * b[k];
            }
            b[i] = s / self.data[self.idx(i, i)];
        }
    }
}
