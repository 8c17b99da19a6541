//! Shared numerical utilities: Gauss-Legendre rules, spherical Bessel
//! functions, interpolation, and a small Hermitian eigensolver.

use ndarray::Array2;
use num_complex::Complex64;

/// Gauss-Legendre nodes and weights on [-1, 1].
///
/// Newton iteration on the Legendre recurrence; accurate to machine
/// precision for the orders used here (n <= a few hundred).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "quadrature order must be positive");
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi initial guess for the i-th root.
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut pp = 0.0;
        for _ in 0..100 {
            let mut p0 = 1.0;
            let mut p1 = 0.0;
            for j in 0..n {
                let p2 = p1;
                p1 = p0;
                p0 = ((2 * j + 1) as f64 * z * p1 - j as f64 * p2) / (j + 1) as f64;
            }
            pp = n as f64 * (z * p0 - p1) / (z * z - 1.0);
            let dz = p0 / pp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * pp * pp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

/// Gauss-Legendre rule mapped to [a, b].
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    (
        x.iter().map(|&t| mid + half * t).collect(),
        w.iter().map(|&t| half * t).collect(),
    )
}

/// Integrate f over [a, b] with a composite Gauss-Legendre rule.
pub fn integrate_panels(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize, order: usize) -> f64 {
    let (x, w) = gauss_legendre(order);
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let lo = a + p as f64 * h;
        let mid = lo + 0.5 * h;
        for (xi, wi) in x.iter().zip(&w) {
            total += 0.5 * h * wi * f(mid + 0.5 * h * xi);
        }
    }
    total
}

/// Spherical Bessel function j_lam(x) for lam = 0, 1, 2.
///
/// Small arguments switch to the ascending series to avoid the cancellation
/// in the closed trigonometric forms.
pub fn spherical_bessel(lam: u32, x: f64) -> f64 {
    assert!(lam <= 2, "spherical_bessel implemented for lam <= 2");
    if x.abs() < 0.5 {
        // j_lam(x) = x^lam / (2lam+1)!! * sum_k (-x^2/2)^k / (k! (2lam+2k+1)!!)
        let mut term = x.powi(lam as i32) / double_factorial(2 * lam + 1);
        let mut sum = term;
        let x2 = x * x;
        for k in 1..24u32 {
            term *= -0.5 * x2 / (k as f64 * (2 * lam + 2 * k + 1) as f64);
            sum += term;
            if term.abs() < 1e-18 * sum.abs() {
                break;
            }
        }
        return sum;
    }
    let (s, c) = (x.sin(), x.cos());
    match lam {
        0 => s / x,
        1 => s / (x * x) - c / x,
        _ => (3.0 / (x * x * x) - 1.0 / x) * s - 3.0 * c / (x * x),
    }
}

/// (2n-1)!! style double factorial; double_factorial(0) = 1.
pub fn double_factorial(n: u32) -> f64 {
    let mut acc = 1.0;
    let mut k = n;
    while k > 1 {
        acc *= k as f64;
        k -= 2;
    }
    acc
}

/// Uniform-grid sampled function with cubic (Catmull-Rom) interpolation.
pub struct UniformTable {
    lo: f64,
    step: f64,
    values: Vec<f64>,
}

impl UniformTable {
    /// Tabulate f on n uniformly spaced points over [lo, hi].
    pub fn tabulate(mut f: impl FnMut(f64) -> f64, lo: f64, hi: f64, n: usize) -> Self {
        assert!(n >= 4 && hi > lo);
        let step = (hi - lo) / (n - 1) as f64;
        let values = (0..n).map(|i| f(lo + i as f64 * step)).collect();
        Self { lo, step, values }
    }

    /// Interpolated value; clamps to the tabulated range.
    pub fn eval(&self, x: f64) -> f64 {
        let n = self.values.len();
        let t = ((x - self.lo) / self.step).clamp(0.0, (n - 1) as f64);
        let i = (t.floor() as usize).clamp(1, n - 3);
        let u = t - i as f64;
        let (p0, p1, p2, p3) = (
            self.values[i - 1],
            self.values[i],
            self.values[i + 1],
            self.values[i + 2],
        );
        // Catmull-Rom basis.
        0.5 * ((2.0 * p1)
            + (-p0 + p2) * u
            + (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3) * u * u
            + (-p0 + 3.0 * p1 - 3.0 * p2 + p3) * u * u * u)
    }
}

/// Eigendecomposition of a Hermitian matrix via the real symmetric embedding
/// [[X, -Y], [Y, X]] and cyclic Jacobi rotations.
///
/// Returns eigenvalues in ascending order with matching unit eigenvectors.
/// Intended for the small (<= 10 x 10) matrices used in this crate.
pub fn hermitian_eigen(h: &Array2<Complex64>) -> (Vec<f64>, Vec<Vec<Complex64>>) {
    let n = h.nrows();
    assert_eq!(n, h.ncols(), "matrix must be square");
    let m = 2 * n;
    // embed: M = [[X, -Y], [Y, X]] with H = X + iY
    let mut a = vec![vec![0.0f64; m]; m];
    for i in 0..n {
        for j in 0..n {
            let z = h[(i, j)];
            a[i][j] = z.re;
            a[i + n][j + n] = z.re;
            a[i][j + n] = -z.im;
            a[i + n][j] = z.im;
        }
    }
    let mut v = vec![vec![0.0f64; m]; m];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    // cyclic Jacobi sweeps
    for _sweep in 0..100 {
        let mut off = 0.0;
        for i in 0..m {
            for j in (i + 1)..m {
                off += a[i][j] * a[i][j];
            }
        }
        if off < 1e-28 {
            break;
        }
        for p in 0..m {
            for q in (p + 1)..m {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..m {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..m {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for k in 0..m {
                    let vkp = v[k][p];
                    let vkq = v[k][q];
                    v[k][p] = c * vkp - s * vkq;
                    v[k][q] = s * vkp + c * vkq;
                }
            }
        }
    }
    // Every complex eigenvector appears twice in the real lift (as z and
    // iz, possibly mixed within degenerate blocks). Walk candidates in
    // ascending eigenvalue order and keep one complex representative per
    // dimension by Gram-Schmidt against everything kept so far: within a
    // degenerate block the lift's arbitrary internal rotation still spans
    // the same complex eigenspace, so exactly the right number of
    // candidates survive the residual test.
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&i, &j| a[i][i].partial_cmp(&a[j][j]).unwrap());
    let mut vals = Vec::with_capacity(n);
    let mut vecs: Vec<Vec<Complex64>> = Vec::with_capacity(n);
    for &idx in &order {
        if vals.len() == n {
            break;
        }
        let mut cand: Vec<Complex64> = (0..n)
            .map(|i| Complex64::new(v[i][idx], v[i + n][idx]))
            .collect();
        for kept in &vecs {
            let overlap: Complex64 = kept.iter().zip(&cand).map(|(x, y)| x.conj() * y).sum();
            for (c, k) in cand.iter_mut().zip(kept) {
                *c -= overlap * k;
            }
        }
        let norm: f64 = cand.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-6 {
            continue;
        }
        vals.push(a[idx][idx]);
        vecs.push(cand.iter().map(|z| z / norm).collect());
    }
    (vals, vecs)
}
