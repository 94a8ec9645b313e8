//! Dense kernel tensors over a finite orthonormal basis `e_0..e_{n−1}` and
//! their algebra: symmetrization, tensor products, classical and free
//! contractions, mirror adjoints and inner products.
//!
//! A kernel of order `q` on `n` basis vectors stores `n^q` coefficients in
//! row-major order: the tuple `(i_1, ..., i_q)` sits at
//! `Σ_k i_k·n^{q−k}`. Order-0 kernels hold one scalar so that chains of
//! contractions can end in a number without a special case.
//!
//! Index conventions:
//! * `contract(f, g, r)` pairs the **last** `r` arguments of `f` with the
//!   **last** `r` arguments of `g`, the result keeping `f`'s free arguments
//!   first.
//! * `free_contract(f, g, r)` pairs the last `r` arguments of `f` with the
//!   **first** `r` arguments of `g` in reversed order:
//!   `(f ⌢_r g)(t, s) = Σ_x f(t, x_1..x_r)·g(x_r..x_1, s)`.
//!
//! Serialization: a flat CSV with header `i1,...,iq,value` listing every
//! entry (0-based indices), and a binary layout of two little-endian `u64`
//! (order, dim) followed by the `n^q` coefficients as little-endian `f64`.

use crate::error::{Error, Result};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use std::path::Path;

/// Highest kernel order handled.
pub const MAX_ORDER: usize = 12;
/// Largest number of stored coefficients (`n^q`).
pub const MAX_ENTRIES: usize = 10_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    order: usize,
    dim: usize,
    coeffs: Vec<f64>,
    symmetric: bool,
    mirror_symmetric: bool,
}

fn entry_count(order: usize, dim: usize) -> Result<usize> {
    if order > MAX_ORDER {
        return Err(Error::capacity(format!(
            "kernel order {order} exceeds cap {MAX_ORDER}"
        )));
    }
    let mut count: usize = 1;
    for _ in 0..order {
        count = count
            .checked_mul(dim)
            .filter(|c| *c <= MAX_ENTRIES)
            .ok_or_else(|| {
                Error::capacity(format!(
                    "{dim}^{order} entries exceed the cap of {MAX_ENTRIES}"
                ))
            })?;
    }
    Ok(count)
}

impl Kernel {
    pub fn from_coeffs(order: usize, dim: usize, coeffs: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Shape("basis size must be at least 1".into()));
        }
        let count = entry_count(order, dim)?;
        if coeffs.len() != count {
            return Err(Error::Shape(format!(
                "order {order}, dim {dim} needs {count} coefficients, got {}",
                coeffs.len()
            )));
        }
        let mut k = Kernel {
            order,
            dim,
            coeffs,
            symmetric: false,
            mirror_symmetric: false,
        };
        k.refresh_flags();
        Ok(k)
    }

    pub fn zeros(order: usize, dim: usize) -> Result<Self> {
        let count = entry_count(order, dim)?;
        Kernel::from_coeffs(order, dim, vec![0.0; count])
    }

    pub fn scalar(dim: usize, value: f64) -> Self {
        Kernel::from_coeffs(0, dim, vec![value]).expect("order-0 kernel")
    }

    /// `e_{i_1} ⊗ ... ⊗ e_{i_q}`.
    pub fn basis(dim: usize, indices: &[usize]) -> Result<Self> {
        let mut k = Kernel::zeros(indices.len(), dim)?;
        if indices.iter().any(|i| *i >= dim) {
            return Err(Error::Shape(format!(
                "basis index out of range for dim {dim}"
            )));
        }
        let at = k.linear_index(indices);
        k.coeffs[at] = 1.0;
        k.refresh_flags();
        Ok(k)
    }

    /// A vector `Σ c_i e_i` as an order-1 kernel.
    pub fn vector(coeffs: Vec<f64>) -> Result<Self> {
        let n = coeffs.len();
        Kernel::from_coeffs(1, n, coeffs)
    }

    pub fn from_fn<F: FnMut(&[usize]) -> f64>(order: usize, dim: usize, mut f: F) -> Result<Self> {
        let count = entry_count(order, dim)?;
        let mut idx = vec![0usize; order];
        let mut coeffs = Vec::with_capacity(count);
        for lin in 0..count {
            decode(lin, dim, &mut idx);
            coeffs.push(f(&idx));
        }
        Kernel::from_coeffs(order, dim, coeffs)
    }

    /// Kernel with i.i.d. standard Gaussian entries (not symmetric).
    pub fn random<R: Rng + ?Sized>(order: usize, dim: usize, rng: &mut R) -> Result<Self> {
        let count = entry_count(order, dim)?;
        let coeffs = (0..count).map(|_| StandardNormal.sample(rng)).collect();
        Kernel::from_coeffs(order, dim, coeffs)
    }

    /// Symmetric `q = 2` kernel whose matrix is `a` (row-major, checked).
    pub fn from_symmetric_matrix(dim: usize, a: &[f64]) -> Result<Self> {
        let k = Kernel::from_coeffs(2, dim, a.to_vec())?;
        if !k.symmetric {
            return Err(Error::ContractViolation("matrix is not symmetric".into()));
        }
        Ok(k)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn is_mirror_symmetric(&self) -> bool {
        self.mirror_symmetric
    }

    /// Value of an order-0 kernel.
    pub fn as_scalar(&self) -> Option<f64> {
        (self.order == 0).then(|| self.coeffs[0])
    }

    pub fn get(&self, indices: &[usize]) -> f64 {
        self.coeffs[self.linear_index(indices)]
    }

    pub fn linear_index(&self, indices: &[usize]) -> usize {
        debug_assert_eq!(indices.len(), self.order);
        indices.iter().fold(0, |acc, i| acc * self.dim + i)
    }

    /// The `n × n` matrix of an order-2 kernel, row-major.
    pub fn matrix(&self) -> Option<nalgebra::DMatrix<f64>> {
        (self.order == 2)
            .then(|| nalgebra::DMatrix::from_row_slice(self.dim, self.dim, &self.coeffs))
    }

    fn refresh_flags(&mut self) {
        self.symmetric = self.check_symmetric();
        self.mirror_symmetric = self.check_mirror_symmetric();
    }

    fn check_symmetric(&self) -> bool {
        if self.order <= 1 {
            return true;
        }
        let mut idx = vec![0usize; self.order];
        for lin in 0..self.coeffs.len() {
            decode(lin, self.dim, &mut idx);
            idx.sort_unstable();
            if self.coeffs[lin] != self.coeffs[self.linear_index(&idx)] {
                return false;
            }
        }
        true
    }

    fn check_mirror_symmetric(&self) -> bool {
        if self.order <= 1 {
            return true;
        }
        let mut idx = vec![0usize; self.order];
        for lin in 0..self.coeffs.len() {
            decode(lin, self.dim, &mut idx);
            idx.reverse();
            if self.coeffs[lin] != self.coeffs[self.linear_index(&idx)] {
                return false;
            }
        }
        true
    }

    pub fn norm_sq(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn scaled(&self, c: f64) -> Kernel {
        let coeffs = self.coeffs.iter().map(|x| c * x).collect();
        Kernel::from_coeffs(self.order, self.dim, coeffs).expect("same shape")
    }

    pub fn add(&self, other: &Kernel) -> Result<Kernel> {
        self.same_shape(other)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a + b)
            .collect();
        Kernel::from_coeffs(self.order, self.dim, coeffs)
    }

    fn same_shape(&self, other: &Kernel) -> Result<()> {
        if self.order != other.order || self.dim != other.dim {
            return Err(Error::Shape(format!(
                "order/dim ({}, {}) vs ({}, {})",
                self.order, self.dim, other.order, other.dim
            )));
        }
        Ok(())
    }

    fn same_dim(&self, other: &Kernel) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::Shape(format!(
                "basis sizes {} and {} differ",
                self.dim, other.dim
            )));
        }
        Ok(())
    }

    /// Entrywise inner product.
    pub fn inner(&self, other: &Kernel) -> Result<f64> {
        self.same_shape(other)?;
        Ok(self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a * b)
            .sum())
    }

    /// Average over all index permutations.
    ///
    /// Computed as an average over each permutation orbit, which equals the
    /// `q!`-term average since every orbit element is hit equally often.
    pub fn symmetrize(&self) -> Result<Kernel> {
        if self.order > MAX_ORDER {
            return Err(Error::capacity(format!(
                "cannot symmetrize order {}",
                self.order
            )));
        }
        if self.symmetric {
            return Ok(self.clone());
        }
        let len = self.coeffs.len();
        let mut sums = vec![0.0; len];
        let mut counts = vec![0u32; len];
        let mut keys = vec![0usize; len];
        let mut idx = vec![0usize; self.order];
        for lin in 0..len {
            decode(lin, self.dim, &mut idx);
            idx.sort_unstable();
            let key = self.linear_index(&idx);
            keys[lin] = key;
            sums[key] += self.coeffs[lin];
            counts[key] += 1;
        }
        let coeffs = keys.iter().map(|&k| sums[k] / counts[k] as f64).collect();
        Kernel::from_coeffs(self.order, self.dim, coeffs)
    }

    /// `f ⊗ g`: `(x, y) ↦ f(x)·g(y)`.
    pub fn tensor(&self, other: &Kernel) -> Result<Kernel> {
        self.contract(other, 0)
    }

    /// Classical contraction `f ⊗_r g` (trailing arguments of both kernels).
    pub fn contract(&self, other: &Kernel, r: usize) -> Result<Kernel> {
        self.same_dim(other)?;
        let (p, q) = (self.order, other.order);
        if r > p.min(q) {
            return Err(Error::domain(format!(
                "contraction index {r} exceeds min({p}, {q})"
            )));
        }
        let out_order = p + q - 2 * r;
        let count = entry_count(out_order, self.dim)?;
        let inner = self.dim.pow(r as u32);
        let rows_f = self.coeffs.len() / inner;
        let rows_g = other.coeffs.len() / inner;
        let mut out = Vec::with_capacity(count);
        for a in 0..rows_f {
            let fa = &self.coeffs[a * inner..(a + 1) * inner];
            for b in 0..rows_g {
                let gb = &other.coeffs[b * inner..(b + 1) * inner];
                out.push(fa.iter().zip(gb).map(|(x, y)| x * y).sum());
            }
        }
        Kernel::from_coeffs(out_order, self.dim, out)
    }

    /// Free contraction `f ⌢_r g` (trailing of `f` against reversed leading of `g`).
    pub fn free_contract(&self, other: &Kernel, r: usize) -> Result<Kernel> {
        self.same_dim(other)?;
        let (p, q) = (self.order, other.order);
        if r > p.min(q) {
            return Err(Error::domain(format!(
                "contraction index {r} exceeds min({p}, {q})"
            )));
        }
        let out_order = p + q - 2 * r;
        let count = entry_count(out_order, self.dim)?;
        let inner = self.dim.pow(r as u32);
        let rows_f = self.coeffs.len() / inner;
        let cols_g = other.coeffs.len() / inner;
        // reversal of an r-tuple, as a map on linear indices
        let mut rev = vec![0usize; inner];
        let mut idx = vec![0usize; r];
        for (lin, slot) in rev.iter_mut().enumerate() {
            decode(lin, self.dim, &mut idx);
            *slot = idx.iter().rev().fold(0, |acc, i| acc * self.dim + i);
        }
        let mut out = vec![0.0; count];
        for a in 0..rows_f {
            let fa = &self.coeffs[a * inner..(a + 1) * inner];
            let row = &mut out[a * cols_g..(a + 1) * cols_g];
            for (x, fx) in fa.iter().enumerate() {
                if *fx == 0.0 {
                    continue;
                }
                let g_row = &other.coeffs[rev[x] * cols_g..(rev[x] + 1) * cols_g];
                for (o, g) in row.iter_mut().zip(g_row) {
                    *o += fx * g;
                }
            }
        }
        Kernel::from_coeffs(out_order, self.dim, out)
    }

    /// `f*(t_1..t_q) = f(t_q..t_1)`.
    pub fn mirror_adjoint(&self) -> Kernel {
        let mut idx = vec![0usize; self.order];
        let mut coeffs = vec![0.0; self.coeffs.len()];
        for (lin, c) in self.coeffs.iter().enumerate() {
            decode(lin, self.dim, &mut idx);
            idx.reverse();
            coeffs[self.linear_index(&idx)] = *c;
        }
        Kernel::from_coeffs(self.order, self.dim, coeffs).expect("same shape")
    }

    /// Section `f(·, k)`: fix the last argument.
    pub fn section_last(&self, k: usize) -> Result<Kernel> {
        if self.order == 0 || k >= self.dim {
            return Err(Error::Shape("no last argument to fix".into()));
        }
        let coeffs = self
            .coeffs
            .iter()
            .skip(k)
            .step_by(self.dim)
            .copied()
            .collect();
        Kernel::from_coeffs(self.order - 1, self.dim, coeffs)
    }

    pub fn to_csv_string(&self) -> String {
        let mut s = String::new();
        let mut header: Vec<String> = (1..=self.order).map(|k| format!("i{k}")).collect();
        header.push("value".into());
        s.push_str(&header.join(","));
        s.push('\n');
        let mut idx = vec![0usize; self.order];
        for (lin, c) in self.coeffs.iter().enumerate() {
            decode(lin, self.dim, &mut idx);
            for i in &idx {
                s.push_str(&i.to_string());
                s.push(',');
            }
            s.push_str(&format!("{c:?}\n"));
        }
        s
    }

    /// Parse the CSV layout. Rows may be omitted (zero) and in any order; the
    /// basis size is one more than the largest index seen.
    pub fn from_csv_str(text: &str) -> Result<Kernel> {
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            msg: "empty file".into(),
        })?;
        let cols: Vec<&str> = header.split(',').map(str::trim).collect();
        if cols.last() != Some(&"value") {
            return Err(Error::Parse {
                line: 1,
                msg: "last header column must be `value`".into(),
            });
        }
        let order = cols.len() - 1;
        let mut entries: Vec<(Vec<usize>, f64)> = Vec::new();
        let mut dim = 0usize;
        for (ln, line) in lines {
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != order + 1 {
                return Err(Error::Parse {
                    line: ln + 1,
                    msg: format!("expected {} fields, found {}", order + 1, fields.len()),
                });
            }
            let mut idx = Vec::with_capacity(order);
            for f in &fields[..order] {
                let i: usize = f.parse().map_err(|_| Error::Parse {
                    line: ln + 1,
                    msg: format!("bad index `{f}`"),
                })?;
                dim = dim.max(i + 1);
                idx.push(i);
            }
            let v: f64 = fields[order].parse().map_err(|_| Error::Parse {
                line: ln + 1,
                msg: format!("bad value `{}`", fields[order]),
            })?;
            entries.push((idx, v));
        }
        let dim = dim.max(1);
        let mut coeffs = vec![0.0; entry_count(order, dim)?];
        for (idx, v) in entries {
            let lin = idx.iter().fold(0, |acc, i| acc * dim + i);
            coeffs[lin] = v;
        }
        Kernel::from_coeffs(order, dim, coeffs)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(16 + 8 * self.coeffs.len());
        out.extend_from_slice(&(self.order as u64).to_le_bytes());
        out.extend_from_slice(&(self.dim as u64).to_le_bytes());
        for c in &self.coeffs {
            out.extend_from_slice(&c.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Kernel> {
        let word = |k: usize| -> Result<[u8; 8]> {
            bytes
                .get(8 * k..8 * k + 8)
                .map(|s| s.try_into().expect("8 bytes"))
                .ok_or(Error::Parse {
                    line: 0,
                    msg: format!("truncated at byte {}", 8 * k),
                })
        };
        let order = u64::from_le_bytes(word(0)?) as usize;
        let dim = u64::from_le_bytes(word(1)?) as usize;
        let count = entry_count(order, dim)?;
        if bytes.len() != 16 + 8 * count {
            return Err(Error::Parse {
                line: 0,
                msg: format!("expected {} bytes, found {}", 16 + 8 * count, bytes.len()),
            });
        }
        let coeffs = (0..count)
            .map(|k| word(k + 2).map(f64::from_le_bytes))
            .collect::<Result<_>>()?;
        Kernel::from_coeffs(order, dim, coeffs)
    }

    /// Save as CSV unless the extension is `.bin`.
    pub fn save(&self, path: &Path) -> Result<()> {
        if is_binary_path(path) {
            std::fs::write(path, self.to_bytes())?;
        } else {
            std::fs::write(path, self.to_csv_string())?;
        }
        Ok(())
    }

    /// Load from CSV or `.bin`; symmetry flags are recomputed from the data.
    pub fn load(path: &Path) -> Result<Kernel> {
        if is_binary_path(path) {
            Kernel::from_bytes(&std::fs::read(path)?)
        } else {
            Kernel::from_csv_str(&std::fs::read_to_string(path)?)
        }
    }

    /// True when the kernel vanishes on every diagonal `i_k = i_l`.
    pub fn vanishes_on_diagonals(&self) -> bool {
        let mut idx = vec![0usize; self.order];
        self.coeffs.iter().enumerate().all(|(lin, c)| {
            decode(lin, self.dim, &mut idx);
            idx.sort_unstable();
            *c == 0.0 || idx.windows(2).all(|w| w[0] != w[1])
        })
    }
}

fn is_binary_path(path: &Path) -> bool {
    path.extension().is_some_and(|e| e == "bin")
}

/// Row-major linear index → index tuple.
pub(crate) fn decode(mut lin: usize, dim: usize, out: &mut [usize]) {
    for slot in out.iter_mut().rev() {
        *slot = lin % dim;
        lin /= dim;
    }
}
