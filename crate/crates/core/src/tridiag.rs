//! Selected eigenpairs of a real symmetric tridiagonal matrix.
//!
//! Eigenvalues come from Sturm-sequence bisection, eigenvectors from inverse
//! iteration with a partially pivoted tridiagonal LU. Only a handful of
//! eigenpairs are ever needed, so this is O(n) per eigenpair and avoids
//! forming or reducing a dense matrix.

/// Symmetric tridiagonal matrix given by its diagonal and its
/// off-diagonal (`off[i]` couples rows `i` and `i + 1`).
#[derive(Debug, Clone)]
pub(crate) struct SymTridiag {
    diag: Vec<f64>,
    off: Vec<f64>,
}

impl SymTridiag {
    pub(crate) fn new(diag: Vec<f64>, off: Vec<f64>) -> Self {
        debug_assert_eq!(off.len() + 1, diag.len());
        Self { diag, off }
    }

    pub(crate) fn dim(&self) -> usize {
        self.diag.len()
    }

    /// Number of eigenvalues strictly below `x`.
    fn count_below(&self, x: f64) -> usize {
        let mut count = 0;
        let mut q = self.diag[0] - x;
        if q < 0.0 {
            count += 1;
        }
        for i in 1..self.diag.len() {
            let denom = if q == 0.0 { f64::EPSILON * self.off[i - 1].abs().max(1.0) } else { q };
            q = self.diag[i] - x - self.off[i - 1] * self.off[i - 1] / denom;
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    fn gershgorin(&self) -> (f64, f64) {
        let n = self.dim();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let left = if i > 0 { self.off[i - 1].abs() } else { 0.0 };
            let right = if i + 1 < n { self.off[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - left - right);
            hi = hi.max(self.diag[i] + left + right);
        }
        (lo, hi)
    }

    /// The `j`-th smallest eigenvalue (`j = 0` is the minimum).
    pub(crate) fn eigenvalue_ascending(&self, j: usize) -> f64 {
        let (mut lo, mut hi) = self.gershgorin();
        let pad = f64::EPSILON * (lo.abs().max(hi.abs())).max(1.0);
        lo -= pad;
        hi += pad;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.count_below(mid) > j {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Unit-norm eigenvector for an (accurately known) eigenvalue.
    pub(crate) fn eigenvector(&self, eigenvalue: f64) -> Vec<f64> {
        let n = self.dim();
        if n == 1 {
            return vec![1.0];
        }
        let scale = self.diag.iter().chain(self.off.iter()).fold(0.0_f64, |m, v| m.max(v.abs())).max(1.0);
        let lu = TridiagLu::factor(&self.diag, &self.off, eigenvalue, f64::EPSILON * scale);

        // Mixed-parity start so neither even nor odd eigenvectors are missed.
        let mut x: Vec<f64> = (0..n).map(|i| 1.0 + 0.5 * (i as f64 + 1.0) / n as f64).collect();
        normalize(&mut x);
        for _ in 0..4 {
            lu.solve(&mut x);
            normalize(&mut x);
        }
        x
    }
}

fn normalize(x: &mut [f64]) {
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm > 0.0 && norm.is_finite() {
        x.iter_mut().for_each(|v| *v /= norm);
    }
}

/// LU factorisation with partial pivoting of `T − shift·I`.
struct TridiagLu {
    dl: Vec<f64>,
    d: Vec<f64>,
    du: Vec<f64>,
    du2: Vec<f64>,
    swapped: Vec<bool>,
}

impl TridiagLu {
    fn factor(diag: &[f64], off: &[f64], shift: f64, tiny: f64) -> Self {
        let n = diag.len();
        let mut d: Vec<f64> = diag.iter().map(|v| v - shift).collect();
        let mut dl = off.to_vec();
        let mut du = off.to_vec();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut swapped = vec![false; n.saturating_sub(1)];

        for i in 0..n - 1 {
            if d[i].abs() >= dl[i].abs() {
                if d[i] != 0.0 {
                    let fact = dl[i] / d[i];
                    dl[i] = fact;
                    d[i + 1] -= fact * du[i];
                }
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let temp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = temp - fact * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] *= -fact;
                }
                swapped[i] = true;
            }
        }
        // exact singularity is expected when the shift is an eigenvalue
        for v in d.iter_mut() {
            if v.abs() < tiny {
                *v = if *v < 0.0 { -tiny } else { tiny };
            }
        }
        Self { dl, d, du, du2, swapped }
    }

    fn solve(&self, b: &mut [f64]) {
        let n = b.len();
        for i in 0..n - 1 {
            if self.swapped[i] {
                let temp = b[i];
                b[i] = b[i + 1];
                b[i + 1] = temp - self.dl[i] * b[i];
            } else {
                b[i + 1] -= self.dl[i] * b[i];
            }
        }
        b[n - 1] /= self.d[n - 1];
        if n > 1 {
            b[n - 2] = (b[n - 2] - self.du[n - 2] * b[n - 1]) / self.d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - self.du[i] * b[i + 1] - self.du2[i] * b[i + 2]) / self.d[i];
        }
    }
}
