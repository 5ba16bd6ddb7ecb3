//! Compact limited-memory BFGS approximation `B = gamma I - Q Qhat`.
//!
//! With `m` stored correction pairs `(s_i, t_i)`, oldest first,
//!
//! ```text
//! Q    = [gamma S, T]                                  (p x 2m)
//! R    = [[gamma S^T S, L], [L^T, -D]]^{-1}             (2m x 2m)
//! Qhat = R Q^T                                          (2m x p)
//! ```
//!
//! where `L` holds the strictly lower products `s_i^T t_j (i > j)` and
//! `D = diag(s_i^T t_i)`. The coordinate descent loop only needs `B_jj` and
//! `(B d)_j`, both of which cost `O(m)` given row `j` of `Q` and column `j` of
//! `Qhat`.
//!
//! Storage: the buffer keeps `[S, T]` row-major (`p x 2m`) and the
//! representation keeps `Qhat^T` (`p x 2m`), so that both `q_j` and `qhat_j`
//! are contiguous. Row `j` of `Q` is read from the buffer with the `gamma`
//! scaling applied on the fly, so no separate copy of `Q` is needed.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::flops::FlopCounter;
use crate::numkit::{small_solve, SmallSquareMatrix, TallThinMatrix};

/// Relative curvature threshold for accepting a pair: `s^T t > CURVATURE_EPS ||s|| ||t||`.
pub const CURVATURE_EPS: f64 = 1e-12;

/// Floor applied to diagonal entries of `B`.
pub const DIAG_FLOOR: f64 = 1e-10;

/// Ring buffer of the `m` most recent correction pairs.
#[derive(Clone, Debug)]
pub struct CorrectionPairBuffer {
    dim: usize,
    capacity: usize,
    len: usize,
    /// Row `j` holds `[s_0[j] .. s_{m-1}[j], t_0[j] .. t_{m-1}[j]]`.
    pairs: TallThinMatrix,
    /// `s_i^T s_j`, row-major `m x m` over logical slots.
    ss: Vec<f64>,
    /// `s_i^T t_j`, row-major `m x m` over logical slots.
    st: Vec<f64>,
    /// `t^T t` of the newest pair.
    newest_tt: f64,
}

impl CorrectionPairBuffer {
    pub fn new(dim: usize, capacity: usize) -> Self {
        assert!(capacity > 0, "memory parameter must be positive");
        Self {
            dim,
            capacity,
            len: 0,
            pairs: TallThinMatrix::zeros(dim, 2 * capacity),
            ss: vec![0.0; capacity * capacity],
            st: vec![0.0; capacity * capacity],
            newest_tt: 0.0,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn clear(&mut self) {
        self.len = 0;
        self.newest_tt = 0.0;
    }

    /// Stored `s_i` of logical slot `i` (0 = oldest), materialized.
    pub fn s(&self, i: usize) -> Vec<f64> {
        assert!(i < self.len);
        (0..self.dim).map(|j| self.pairs.get(j, i)).collect()
    }

    /// Stored `t_i` of logical slot `i` (0 = oldest), materialized.
    pub fn t(&self, i: usize) -> Vec<f64> {
        assert!(i < self.len);
        (0..self.dim)
            .map(|j| self.pairs.get(j, self.capacity + i))
            .collect()
    }

    /// `s_i^T t_j` over logical slots.
    pub fn s_dot_t(&self, i: usize, j: usize) -> f64 {
        self.st[i * self.capacity + j]
    }

    /// Stores `(s, t)` if `s^T t > 1e-12 ||s|| ||t||`, evicting the oldest pair
    /// when full. Returns whether the pair was accepted.
    pub fn push_pair(&mut self, s: &[f64], t: &[f64]) -> Result<bool> {
        for v in [s, t] {
            if v.len() != self.dim {
                return Err(Error::DimensionMismatch {
                    expected: self.dim,
                    found: v.len(),
                });
            }
        }
        let mut sty = 0.0;
        let mut ss = 0.0;
        let mut tt = 0.0;
        for (a, b) in s.iter().zip(t) {
            sty += a * b;
            ss += a * a;
            tt += b * b;
        }
        if !(sty > CURVATURE_EPS * ss.sqrt() * tt.sqrt()) || !sty.is_finite() {
            return Ok(false);
        }

        let m = self.capacity;
        if self.len == m {
            self.evict_oldest();
        }
        let slot = self.len;

        // Write the new columns and accumulate products with stored pairs in one pass.
        let mut s_dot_s = vec![0.0; slot + 1];
        let mut s_dot_tnew = vec![0.0; slot + 1];
        let mut snew_dot_t = vec![0.0; slot + 1];
        for j in 0..self.dim {
            let row = self.pairs.row_mut(j);
            row[slot] = s[j];
            row[m + slot] = t[j];
            for i in 0..=slot {
                s_dot_s[i] += row[i] * s[j];
                s_dot_tnew[i] += row[i] * t[j];
                snew_dot_t[i] += s[j] * row[m + i];
            }
        }
        for i in 0..=slot {
            self.ss[i * m + slot] = s_dot_s[i];
            self.ss[slot * m + i] = s_dot_s[i];
            self.st[i * m + slot] = s_dot_tnew[i];
            self.st[slot * m + i] = snew_dot_t[i];
        }
        self.newest_tt = tt;
        self.len += 1;
        Ok(true)
    }

    fn evict_oldest(&mut self) {
        let m = self.capacity;
        let n = self.len;
        for j in 0..self.dim {
            let row = self.pairs.row_mut(j);
            row.copy_within(1..n, 0);
            row.copy_within(m + 1..m + n, m);
        }
        for gram in [&mut self.ss, &mut self.st] {
            for i in 1..n {
                for k in 1..n {
                    gram[(i - 1) * m + (k - 1)] = gram[i * m + k];
                }
            }
        }
        self.len -= 1;
    }

    /// `gamma = t^T t / s^T t` of the newest pair, or 1 when empty.
    pub fn gamma(&self) -> f64 {
        if self.len == 0 {
            return 1.0;
        }
        let k = self.len - 1;
        self.newest_tt / self.s_dot_t(k, k)
    }

    /// The middle matrix `[[gamma S^T S, L], [L^T, -D]]` of order `2 len`.
    pub fn middle_matrix(&self) -> SmallSquareMatrix {
        let l = self.len;
        let m = self.capacity;
        let gamma = self.gamma();
        let mut mid = SmallSquareMatrix::zeros(2 * l);
        for i in 0..l {
            for j in 0..l {
                mid.set(i, j, gamma * self.ss[i * m + j]);
                if i > j {
                    let v = self.st[i * m + j];
                    mid.set(i, l + j, v);
                    mid.set(l + j, i, v);
                }
            }
            mid.set(l + i, l + i, -self.st[i * m + i]);
        }
        mid
    }

    /// Builds the compact representation of the current buffer. An empty
    /// buffer gives `B = I`.
    pub fn rebuild(&self) -> Result<CompactRepresentation<'_>> {
        let l = self.len;
        let p = self.dim;
        let m = self.capacity;
        let gamma = self.gamma();
        if l == 0 {
            return Ok(CompactRepresentation {
                gamma,
                buffer: self,
                qhat_t: TallThinMatrix::zeros(p, 0),
            });
        }
        let mid = self.middle_matrix();
        let r = small_solve(&mid, SmallSquareMatrix::identity(2 * l).as_slice(), 2 * l)?;

        let w = 2 * l;
        let mut qhat_t = TallThinMatrix::zeros(p, w);
        let mut q = vec![0.0; w];
        for j in 0..p {
            let row = self.pairs.row(j);
            for i in 0..l {
                q[i] = gamma * row[i];
                q[l + i] = row[m + i];
            }
            let out = qhat_t.row_mut(j);
            for a in 0..w {
                let mut acc = 0.0;
                for b in 0..w {
                    acc += r[a * w + b] * q[b];
                }
                out[a] = acc;
            }
        }
        Ok(CompactRepresentation {
            gamma,
            buffer: self,
            qhat_t,
        })
    }

    /// Reals held by the buffer that scale with `p`.
    pub fn storage_reals(&self) -> usize {
        self.pairs.len()
    }

    /// Reals held by the buffer independent of `p`.
    pub fn small_storage_reals(&self) -> usize {
        self.ss.len() + self.st.len() + 1
    }
}

/// `B = gamma I - Q Qhat` over a borrowed [`CorrectionPairBuffer`].
#[derive(Clone, Debug)]
pub struct CompactRepresentation<'a> {
    gamma: f64,
    buffer: &'a CorrectionPairBuffer,
    /// Row `j` is column `j` of `Qhat` (length `2 len`).
    qhat_t: TallThinMatrix,
}

impl CompactRepresentation<'_> {
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn dim(&self) -> usize {
        self.buffer.dim
    }

    /// Number of correction pairs `len`; `Q` has `2 len` columns.
    pub fn pairs(&self) -> usize {
        self.qhat_t.cols() / 2
    }

    /// Length of `dhat = Qhat d`.
    pub fn width(&self) -> usize {
        self.qhat_t.cols()
    }

    /// `q_j^T v` with `q_j = [gamma s_j, t_j]`: `2 len` multiply-adds and one multiply.
    #[inline]
    fn q_dot(&self, j: usize, v: &[f64]) -> f64 {
        let l = self.pairs();
        let m = self.buffer.capacity;
        let row = self.buffer.pairs.row(j);
        let mut s_part = 0.0;
        for i in 0..l {
            s_part += row[i] * v[i];
        }
        let mut t_part = 0.0;
        for i in 0..l {
            t_part += row[m + i] * v[l + i];
        }
        self.gamma * s_part + t_part
    }

    /// Row `j` of `Q = [gamma S, T]`.
    pub fn q_row(&self, j: usize) -> Vec<f64> {
        let l = self.pairs();
        let m = self.buffer.capacity;
        let row = self.buffer.pairs.row(j);
        (0..l)
            .map(|i| self.gamma * row[i])
            .chain((0..l).map(|i| row[m + i]))
            .collect()
    }

    /// Column `j` of `Qhat = R Q^T`.
    pub fn qhat_col(&self, j: usize) -> &[f64] {
        self.qhat_t.row(j)
    }

    /// `B_jj = gamma - q_j^T qhat_j`, floored at [`DIAG_FLOOR`].
    pub fn diag_entry(&self, j: usize) -> f64 {
        (self.gamma - self.q_dot(j, self.qhat_t.row(j))).max(DIAG_FLOOR)
    }

    /// `(B d)_j = gamma d_j - q_j^T dhat`, with `dhat = Qhat d` kept by the caller.
    /// Costs `4 len + 3` flops.
    #[inline]
    pub fn bd_entry(&self, j: usize, d_j: f64, dhat: &[f64], flops: &mut FlopCounter) -> f64 {
        flops.add(Self::bd_entry_flops(self.pairs()));
        self.gamma * d_j - self.q_dot(j, dhat)
    }

    pub const fn bd_entry_flops(pairs: usize) -> u64 {
        4 * pairs as u64 + 3
    }

    /// `dhat += z qhat_j`. Costs `4 len` flops.
    #[inline]
    pub fn update_dhat(&self, j: usize, z: f64, dhat: &mut [f64], flops: &mut FlopCounter) {
        let col = self.qhat_t.row(j);
        for (dh, &c) in dhat.iter_mut().zip(col) {
            *dh += z * c;
        }
        flops.add(2 * col.len() as u64);
    }

    /// `Qhat d`, computed from scratch.
    pub fn qhat_times(&self, d: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.width()];
        let mut scratch = FlopCounter::new();
        for (j, &dj) in d.iter().enumerate() {
            if dj != 0.0 {
                self.update_dhat(j, dj, &mut out, &mut scratch);
            }
        }
        out
    }

    /// Entry `(i, j)` of `B`.
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        let delta = if i == j { self.gamma } else { 0.0 };
        delta - self.q_dot(i, self.qhat_t.row(j))
    }

    /// `B d` through the low-rank form.
    pub fn apply(&self, d: &[f64]) -> Vec<f64> {
        let dhat = self.qhat_times(d);
        let mut scratch = FlopCounter::new();
        (0..self.dim())
            .map(|j| self.bd_entry(j, d[j], &dhat, &mut scratch))
            .collect()
    }

    /// Dense `p x p` matrix `B`, row-major. Intended for checks on small `p`.
    pub fn explicit_matrix(&self) -> Vec<f64> {
        let p = self.dim();
        let mut out = vec![0.0; p * p];
        for i in 0..p {
            for j in 0..p {
                out[i * p + j] = self.entry(i, j);
            }
        }
        out
    }

    /// Reals held by the representation that scale with `p`.
    pub fn storage_reals(&self) -> usize {
        self.qhat_t.len()
    }
}

/// Dense BFGS recursion `B <- B - B s s^T B / s^T B s + t t^T / t^T s` from
/// `B_0 = gamma I`, applied to `pairs` in order. Row-major `p x p`.
pub fn recursive_bfgs(p: usize, gamma: f64, pairs: &VecDeque<(Vec<f64>, Vec<f64>)>) -> Vec<f64> {
    let mut b = vec![0.0; p * p];
    for i in 0..p {
        b[i * p + i] = gamma;
    }
    for (s, t) in pairs {
        let bs: Vec<f64> = (0..p)
            .map(|i| (0..p).map(|k| b[i * p + k] * s[k]).sum())
            .collect();
        let sbs: f64 = s.iter().zip(&bs).map(|(a, c)| a * c).sum();
        let ts: f64 = t.iter().zip(s).map(|(a, c)| a * c).sum();
        for i in 0..p {
            for j in 0..p {
                b[i * p + j] += -bs[i] * bs[j] / sbs + t[i] * t[j] / ts;
            }
        }
    }
    b
}
