//! Banded matrices: symmetric storage with inertia counting, and general
//! storage with partially pivoted LU.

use crate::error::{Error, Result};

/// Symmetric banded matrix; `diags[k][i]` holds entry `(i, i + k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymBanded {
    n: usize,
    diags: Vec<Vec<f64>>,
}

impl SymBanded {
    pub fn zeros(n: usize, bandwidth: usize) -> Self {
        let diags = (0..=bandwidth)
            .map(|k| vec![0.0; n.saturating_sub(k)])
            .collect();
        Self { n, diags }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, 0);
        m.diags[0].iter_mut().for_each(|v| *v = 1.0);
        m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.diags.len() - 1
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        let k = j - i;
        if k > self.bandwidth() {
            0.0
        } else {
            self.diags[k][i]
        }
    }

    /// Adds `v` to entries `(i, j)` and `(j, i)` (once when `i = j`).
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        let k = j - i;
        assert!(k <= self.bandwidth(), "entry ({i}, {j}) outside the band");
        self.diags[k][i] += v;
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diags[0]
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y: Vec<f64> = self.diags[0].iter().zip(x).map(|(a, b)| a * b).collect();
        for (k, d) in self.diags.iter().enumerate().skip(1) {
            for (i, &a) in d.iter().enumerate() {
                y[i] += a * x[i + k];
                y[i + k] += a * x[i];
            }
        }
        y
    }

    pub fn dot(&self, x: &[f64], y: &[f64]) -> f64 {
        self.matvec(x).iter().zip(y).map(|(a, b)| a * b).sum()
    }

    /// `alpha·self + beta·other`.
    pub fn combine(&self, alpha: f64, other: &SymBanded, beta: f64) -> SymBanded {
        assert_eq!(self.n, other.n, "dimension mismatch");
        let bw = self.bandwidth().max(other.bandwidth());
        let mut out = SymBanded::zeros(self.n, bw);
        for k in 0..=bw {
            for i in 0..self.n.saturating_sub(k) {
                let a = if k <= self.bandwidth() {
                    self.diags[k][i]
                } else {
                    0.0
                };
                let b = if k <= other.bandwidth() {
                    other.diags[k][i]
                } else {
                    0.0
                };
                out.diags[k][i] = alpha * a + beta * b;
            }
        }
        out
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        self.diags
            .iter()
            .flatten()
            .fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Counts of negative, zero and positive pivots of an unpivoted `LDLᵀ`
    /// factorization, i.e. the inertia by Sylvester's law. Exactly zero
    /// pivots are perturbed to a tiny negative value and counted as zero.
    pub fn inertia(&self) -> Inertia {
        let n = self.n;
        let bw = self.bandwidth();
        let tiny = f64::EPSILON * self.max_abs().max(f64::MIN_POSITIVE) * 1e-3;
        let mut inertia = Inertia::default();
        if bw == 1 {
            let mut d_prev = 0.0;
            for i in 0..n {
                let mut d = self.diags[0][i];
                if i > 0 {
                    let e = self.diags[1][i - 1];
                    d -= e * e / d_prev;
                }
                if d == 0.0 {
                    inertia.zero += 1;
                    d = -tiny;
                } else if d < 0.0 {
                    inertia.negative += 1;
                } else {
                    inertia.positive += 1;
                }
                d_prev = d;
            }
            return inertia;
        }
        // General band: row-oriented LDLᵀ keeping only the band of L.
        let mut l = vec![vec![0.0; bw + 1]; n]; // l[i][k] = L(i, i-k)
        let mut d = vec![0.0; n];
        for i in 0..n {
            let j0 = i.saturating_sub(bw);
            for j in j0..i {
                let mut s = self.get(i, j);
                let kmin = i.saturating_sub(bw).max(j.saturating_sub(bw));
                for m in kmin..j {
                    s -= l[i][i - m] * l[j][j - m] * d[m];
                }
                l[i][i - j] = s / d[j];
            }
            let mut s = self.get(i, i);
            for m in j0..i {
                s -= l[i][i - m] * l[i][i - m] * d[m];
            }
            if s == 0.0 {
                inertia.zero += 1;
                s = -tiny;
            } else if s < 0.0 {
                inertia.negative += 1;
            } else {
                inertia.positive += 1;
            }
            d[i] = s;
            l[i][0] = 1.0;
        }
        inertia
    }

    pub fn to_general(&self) -> Banded {
        let bw = self.bandwidth();
        let mut g = Banded::zeros(self.n, bw, bw);
        for k in 0..=bw {
            for i in 0..self.n.saturating_sub(k) {
                g.set(i, i + k, self.diags[k][i]);
                g.set(i + k, i, self.diags[k][i]);
            }
        }
        g
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Inertia {
    pub negative: usize,
    pub zero: usize,
    pub positive: usize,
}

/// General banded matrix with `kl` sub- and `ku` super-diagonals. Rows are
/// stored as windows wide enough to absorb fill-in from row interchanges.
#[derive(Debug, Clone, PartialEq)]
pub struct Banded {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<f64>,
}

impl Banded {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let width = 2 * kl + ku + 1;
        Self {
            n,
            kl,
            ku,
            width,
            data: vec![0.0; n * width],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> Option<usize> {
        let off = j as isize - i as isize + self.kl as isize;
        if off < 0 || off as usize >= self.width || j >= self.n {
            None
        } else {
            Some(i * self.width + off as usize)
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.idx(i, j).map_or(0.0, |k| self.data[k])
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        assert!(
            j + self.kl >= i && j <= i + self.ku,
            "entry ({i}, {j}) outside the declared band"
        );
        let k = self.idx(i, j).unwrap();
        self.data[k] = v;
    }

    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let cur = self.get(i, j);
        self.set(i, j, cur + v);
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                let lo = i.saturating_sub(self.kl);
                let hi = (i + self.ku).min(self.n - 1);
                (lo..=hi).map(|j| self.get(i, j) * x[j]).sum()
            })
            .collect()
    }

    /// LU factorization with partial pivoting.
    pub fn lu(mut self) -> Result<BandLu> {
        let n = self.n;
        let kl = self.kl;
        let reach = self.kl + self.ku;
        let mut piv = vec![0usize; n];
        let scale = self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        if scale == 0.0 || !scale.is_finite() {
            return Err(Error::Conditioning("matrix is zero or non-finite".into()));
        }
        for j in 0..n {
            let last_row = (j + kl).min(n - 1);
            let mut p = j;
            let mut best = self.get(j, j).abs();
            for r in j + 1..=last_row {
                let v = self.get(r, j).abs();
                if v > best {
                    best = v;
                    p = r;
                }
            }
            piv[j] = p;
            if best == 0.0 {
                return Err(Error::Conditioning(format!("zero pivot in column {j}")));
            }
            let last_col = (j + reach).min(n - 1);
            if p != j {
                for c in j..=last_col {
                    let a = self.idx(j, c).unwrap();
                    let b = self.idx(p, c).unwrap();
                    self.data.swap(a, b);
                }
            }
            let pivot = self.get(j, j);
            for r in j + 1..=last_row {
                let m = self.get(r, j) / pivot;
                if m == 0.0 {
                    self.set_unchecked(r, j, 0.0);
                    continue;
                }
                self.set_unchecked(r, j, m);
                for c in j + 1..=last_col {
                    let u = self.get(j, c);
                    if u != 0.0 {
                        let k = self.idx(r, c).unwrap();
                        self.data[k] -= m * u;
                    }
                }
            }
        }
        let min_pivot = (0..n)
            .map(|i| self.get(i, i).abs())
            .fold(f64::INFINITY, f64::min);
        Ok(BandLu {
            m: self,
            piv,
            pivot_ratio: min_pivot / scale,
        })
    }

    fn set_unchecked(&mut self, i: usize, j: usize, v: f64) {
        let k = self.idx(i, j).unwrap();
        self.data[k] = v;
    }
}

/// Factorization produced by [`Banded::lu`].
#[derive(Debug, Clone)]
pub struct BandLu {
    m: Banded,
    piv: Vec<usize>,
    /// Smallest pivot magnitude relative to the largest matrix entry.
    pub pivot_ratio: f64,
}

impl BandLu {
    pub fn n(&self) -> usize {
        self.m.n
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.m.n;
        let kl = self.m.kl;
        let reach = self.m.kl + self.m.ku;
        let mut x = b.to_vec();
        for j in 0..n {
            let p = self.piv[j];
            if p != j {
                x.swap(j, p);
            }
            let xj = x[j];
            if xj != 0.0 {
                for r in j + 1..=(j + kl).min(n - 1) {
                    x[r] -= self.m.get(r, j) * xj;
                }
            }
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for c in i + 1..=(i + reach).min(n - 1) {
                s -= self.m.get(i, c) * x[c];
            }
            x[i] = s / self.m.get(i, i);
        }
        x
    }
}
