//! Small dense linear-algebra kernels shared by the classifiers and the
//! dynamics code: ranks with certification margins, orthonormal frames,
//! exterior powers and random matrices.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

/// Relative singular-value threshold below which a direction counts as zero.
pub const RANK_TOL: f64 = 1e-8;
/// A decision whose margin falls below this value is reported as uncertain.
pub const BOUNDARY_MARGIN: f64 = 1e-6;

/// Thin singular value decomposition `m = u diag(s) vt`, singular values in
/// descending order.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: DMatrix<f64>,
    pub s: Vec<f64>,
    pub vt: DMatrix<f64>,
}

/// Thin SVD with singular values in descending order. Small matrices go
/// through one-sided Jacobi; larger ones through bidiagonalization, checked
/// and redone by Jacobi when the factors do not recompose the input.
pub fn svd(m: &DMatrix<f64>) -> Svd {
    if m.nrows() < m.ncols() {
        let t = svd(&m.transpose());
        return Svd { u: t.vt.transpose(), s: t.s, vt: t.u.transpose() };
    }
    if m.nrows() <= 6 {
        return jacobi_svd(m);
    }
    fast_svd(m).unwrap_or_else(|| jacobi_svd(m))
}

/// LAPACK-style SVD, accepted only when it recomposes `m` with orthonormal
/// factors.
fn fast_svd(m: &DMatrix<f64>) -> Option<Svd> {
    let (r, n) = m.shape();
    let f = m.clone().svd(true, true);
    let (u0, vt0) = (f.u?, f.v_t?);
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&x, &y| f.singular_values[y].total_cmp(&f.singular_values[x]));
    let s: Vec<f64> = idx.iter().map(|&j| f.singular_values[j]).collect();
    let u = DMatrix::from_fn(r, n, |i, k| u0[(i, idx[k])]);
    let vt = DMatrix::from_fn(n, n, |k, i| vt0[(idx[k], i)]);
    let scale = m.norm().max(f64::MIN_POSITIVE);
    let back = &u * DMatrix::from_diagonal(&DVector::from_vec(s.clone())) * &vt;
    let tol = 1e-12 * (r.max(n) as f64);
    let eye = DMatrix::<f64>::identity(n, n);
    let ok = (back - m).norm() <= tol * scale
        && (u.transpose() * &u - &eye).norm() <= tol
        && (&vt * vt.transpose() - &eye).norm() <= tol
        && s.iter().all(|x| x.is_finite() && *x >= 0.0);
    ok.then_some(Svd { u, s, vt })
}

/// One-sided Jacobi SVD of a matrix with at least as many rows as columns.
fn jacobi_svd(m: &DMatrix<f64>) -> Svd {
    let (r, n) = m.shape();
    let mut a = m.clone();
    let mut v = DMatrix::<f64>::identity(n, n);
    rotate_columns(&mut a, Some(&mut v));
    let norms: Vec<f64> = (0..n).map(|j| a.column(j).norm()).collect();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&x, &y| norms[y].total_cmp(&norms[x]));
    let s: Vec<f64> = idx.iter().map(|&j| norms[j]).collect();
    let mut u = DMatrix::zeros(r, n);
    let mut filled = 0;
    for (k, &j) in idx.iter().enumerate() {
        if s[k] > 0.0 {
            u.set_column(k, &(a.column(j) / s[k]));
            filled = k + 1;
        } else {
            break;
        }
    }
    if filled < n {
        let rest = complement_basis(&orthonormal_span(&u.columns(0, filled).into_owned(), filled));
        for k in filled..n {
            u.set_column(k, &rest.column(k - filled));
        }
    }
    let vt = DMatrix::from_fn(n, n, |k, i| v[(i, idx[k])]);
    Svd { u, s, vt }
}

/// One-sided Jacobi sweeps until the columns of `a` are orthogonal, applying
/// the same rotations to `v`.
fn rotate_columns(a: &mut DMatrix<f64>, mut v: Option<&mut DMatrix<f64>>) {
    let (r, n) = a.shape();
    for _ in 0..80 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = a.column(p).norm_squared();
                let beta = a.column(q).norm_squared();
                let gamma = a.column(p).dot(&a.column(q));
                if gamma == 0.0 || gamma.abs() <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let sn = c * t;
                for i in 0..r {
                    let (x, y) = (a[(i, p)], a[(i, q)]);
                    a[(i, p)] = c * x - sn * y;
                    a[(i, q)] = sn * x + c * y;
                }
                if let Some(v) = v.as_deref_mut() {
                    for i in 0..n {
                        let (x, y) = (v[(i, p)], v[(i, q)]);
                        v[(i, p)] = c * x - sn * y;
                        v[(i, q)] = sn * x + c * y;
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }
}

/// Singular values in descending order.
pub fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut a = if m.nrows() < m.ncols() { m.transpose() } else { m.clone() };
    let n = a.ncols();
    rotate_columns(&mut a, None);
    let mut s: Vec<f64> = (0..n).map(|j| a.column(j).norm()).collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

/// Relative size below which a singular value or sign test is treated as an
/// exact zero rather than a near miss.
pub const NOISE_FLOOR: f64 = 1e-13;

/// Numerical rank of `m` together with the margin that certified it.
///
/// The rank counts singular values above `tol * sigma_max`. The margin is the
/// smallest scaled singular value `sigma / sigma_max` above [`NOISE_FLOOR`]:
/// exact degeneracies never lower it, while any direction that is neither
/// clearly present nor clearly absent does.
pub fn rank_with_margin(m: &DMatrix<f64>, tol: f64) -> (usize, f64) {
    let s = singular_values(m);
    let smax = s.first().copied().unwrap_or(0.0);
    if smax == 0.0 || !smax.is_finite() {
        return (0, f64::INFINITY);
    }
    let mut rank = 0;
    let mut margin = f64::INFINITY;
    for &v in &s {
        if v > tol * smax {
            rank += 1;
        }
        if v > NOISE_FLOOR * smax {
            margin = margin.min(v / smax);
        }
    }
    (rank, margin)
}

/// Concatenate two matrices with the same number of rows.
pub fn hstack(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    assert_eq!(a.nrows(), b.nrows());
    let mut out = DMatrix::zeros(a.nrows(), a.ncols() + b.ncols());
    out.columns_mut(0, a.ncols()).copy_from(a);
    out.columns_mut(a.ncols(), b.ncols()).copy_from(b);
    out
}

/// Gram-Schmidt over the columns of `m` (two passes), keeping only columns
/// that add a new direction, until `want` columns are collected.
pub fn orthonormal_span(m: &DMatrix<f64>, want: usize) -> DMatrix<f64> {
    let d = m.nrows();
    let mut cols: Vec<DVector<f64>> = Vec::with_capacity(want);
    for j in 0..m.ncols() {
        if cols.len() == want {
            break;
        }
        let orig = m.column(j).into_owned();
        let n0 = orig.norm();
        if n0 == 0.0 {
            continue;
        }
        let mut v = orig;
        for _ in 0..2 {
            for q in &cols {
                let c = q.dot(&v);
                v.axpy(-c, q, 1.0);
            }
        }
        let n = v.norm();
        if n > 1e-10 * n0 {
            cols.push(v / n);
        }
    }
    let mut out = DMatrix::zeros(d, cols.len());
    for (j, c) in cols.iter().enumerate() {
        out.set_column(j, c);
    }
    out
}

/// Orthonormalize all columns, failing if they are dependent.
pub fn orthonormalize(m: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let q = orthonormal_span(m, m.ncols());
    (q.ncols() == m.ncols()).then_some(q)
}

/// Orthonormal basis of the column space of `m` (rank decided at `RANK_TOL`).
pub fn column_space(m: &DMatrix<f64>) -> DMatrix<f64> {
    if m.ncols() == 0 {
        return DMatrix::zeros(m.nrows(), 0);
    }
    let svd = svd(m);
    let smax = svd.s[0];
    let keep = svd.s.iter().filter(|&&x| smax > 0.0 && x > RANK_TOL * smax).count();
    svd.u.columns(0, keep).into_owned()
}

/// Orthonormal basis of the orthogonal complement of the span of `b`.
pub fn complement_basis(b: &DMatrix<f64>) -> DMatrix<f64> {
    let d = b.nrows();
    let q = orthonormal_span(b, b.ncols());
    let mut cols = Vec::new();
    for i in 0..d {
        let mut e = DVector::zeros(d);
        e[i] = 1.0;
        cols.push(e);
    }
    let stacked = hstack(&q, &DMatrix::from_columns(&cols));
    let full = orthonormal_span(&stacked, d);
    full.columns(q.ncols(), d - q.ncols()).into_owned()
}

/// Orthogonal projector onto the span of an orthonormal basis.
pub fn projector(b: &DMatrix<f64>) -> DMatrix<f64> {
    b * b.transpose()
}

/// Sine of the angle between two lines.
pub fn line_distance(u: &DVector<f64>, v: &DVector<f64>) -> f64 {
    let c = u.dot(v) / (u.norm() * v.norm());
    (1.0 - c * c).max(0.0).sqrt()
}

/// All `k`-subsets of `0..n` in lexicographic order.
pub fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if k <= n {
        rec(0, n, k, &mut Vec::with_capacity(k), &mut out);
    }
    out
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut r: u128 = 1;
    for i in 0..k {
        r = r * (n - i) as u128 / (i + 1) as u128;
    }
    r as usize
}

fn submatrix_det(g: &DMatrix<f64>, rows: &[usize], cols: &[usize]) -> f64 {
    match rows.len() {
        0 => 1.0,
        1 => g[(rows[0], cols[0])],
        2 => {
            g[(rows[0], cols[0])] * g[(rows[1], cols[1])]
                - g[(rows[0], cols[1])] * g[(rows[1], cols[0])]
        }
        k => DMatrix::from_fn(k, k, |i, j| g[(rows[i], cols[j])]).determinant(),
    }
}

/// Index tables for the basis `e_S` of the `k`-th exterior power of `R^d`.
#[derive(Debug, Clone)]
pub struct Wedge {
    pub d: usize,
    pub k: usize,
    pub sets: Vec<Vec<usize>>,
    by_mask: Vec<usize>,
}

impl Wedge {
    pub fn new(d: usize, k: usize) -> Self {
        let sets = subsets(d, k);
        let mut by_mask = vec![usize::MAX; 1 << d];
        for (i, s) in sets.iter().enumerate() {
            let m: usize = s.iter().map(|&j| 1usize << j).sum();
            by_mask[m] = i;
        }
        Wedge { d, k, sets, by_mask }
    }

    pub fn dim(&self) -> usize {
        self.sets.len()
    }

    /// Matrix of `Λ^k g` in the basis of sorted subsets.
    pub fn power(&self, g: &DMatrix<f64>) -> DMatrix<f64> {
        let n = self.dim();
        DMatrix::from_fn(n, n, |i, j| submatrix_det(g, &self.sets[i], &self.sets[j]))
    }

    /// Plücker vector of the span of the `k` columns of `basis`.
    pub fn plucker(&self, basis: &DMatrix<f64>) -> DVector<f64> {
        assert_eq!(basis.ncols(), self.k);
        let cols: Vec<usize> = (0..self.k).collect();
        DVector::from_iterator(
            self.dim(),
            self.sets.iter().map(|s| submatrix_det(basis, s, &cols)),
        )
    }

    /// Recover an orthonormal basis of the subspace whose Plücker vector is
    /// (approximately) `omega`, by contracting against all `(k-1)`-covectors.
    pub fn decompose(&self, omega: &DVector<f64>) -> DMatrix<f64> {
        let (d, k) = (self.d, self.k);
        if k == 0 {
            return DMatrix::zeros(d, 0);
        }
        if k == d {
            return DMatrix::identity(d, d);
        }
        let lower = subsets(d, k - 1);
        let mut m = DMatrix::zeros(d, lower.len());
        for (c, j) in lower.iter().enumerate() {
            let jm: usize = j.iter().map(|&x| 1usize << x).sum();
            for i in 0..d {
                if jm & (1 << i) != 0 {
                    continue;
                }
                let pos = j.iter().filter(|&&x| x < i).count();
                let sign = if pos % 2 == 0 { 1.0 } else { -1.0 };
                m[(i, c)] = sign * omega[self.by_mask[jm | (1 << i)]];
            }
        }
        top_left_singular(&m, k)
    }
}

/// The `k` leading left singular vectors of `m`.
pub fn top_left_singular(m: &DMatrix<f64>, k: usize) -> DMatrix<f64> {
    svd(m).u.columns(0, k).into_owned()
}

/// Orthonormal frame whose leading blocks span the given nested subspaces.
/// Subspaces only need to be nested up to numerical noise.
pub fn nested_frame(d: usize, nested: &[DMatrix<f64>]) -> DMatrix<f64> {
    let mut frame = DMatrix::zeros(d, 0);
    for s in nested {
        let have = frame.ncols();
        let target = s.ncols();
        if target <= have {
            continue;
        }
        let proj = s - &frame * (frame.transpose() * s);
        let extra = top_left_singular(&proj, target - have);
        frame = orthonormal_span(&hstack(&frame, &extra), target);
    }
    if frame.ncols() < d {
        let rest = complement_basis(&frame);
        frame = hstack(&frame, &rest);
    }
    frame
}

/// Scale `g` to determinant one. Returns `None` when that needs a negative
/// real root (even dimension and negative determinant) or `g` is singular.
pub fn det_normalize(g: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let d = g.nrows();
    let det = g.determinant();
    if det == 0.0 || !det.is_finite() {
        return None;
    }
    if det > 0.0 {
        Some(g / det.powf(1.0 / d as f64))
    } else if d % 2 == 1 {
        Some(g / -((-det).powf(1.0 / d as f64)))
    } else {
        None
    }
}

pub fn random_gaussian<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample::<f64, _>(StandardNormal))
}

/// Random element of `SL(d, R)` with Gaussian entries, rescaled.
pub fn random_sl<R: Rng + ?Sized>(d: usize, rng: &mut R) -> DMatrix<f64> {
    loop {
        let mut g = random_gaussian(d, d, rng);
        if g.determinant() < 0.0 {
            g.row_mut(0).neg_mut();
        }
        if let Some(h) = det_normalize(&g) {
            return h;
        }
    }
}

/// Random rotation (determinant one), Haar distributed.
pub fn random_orthogonal<R: Rng + ?Sized>(d: usize, rng: &mut R) -> DMatrix<f64> {
    loop {
        let g = random_gaussian(d, d, rng);
        if let Some(mut q) = orthonormalize(&g) {
            if q.determinant() < 0.0 {
                q.column_mut(d - 1).neg_mut();
            }
            return q;
        }
    }
}

/// Matrix exponential.
pub fn expm(y: &DMatrix<f64>) -> DMatrix<f64> {
    y.clone().exp()
}

/// Largest absolute entry.
pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |a, &b| a.max(b.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn rank_examples() {
        let (r, m) = rank_with_margin(&DMatrix::identity(3, 3), RANK_TOL);
        assert_eq!(r, 3);
        assert!(m > 0.5);
        let (r, m) = rank_with_margin(&DMatrix::zeros(3, 3), RANK_TOL);
        assert_eq!((r, m), (0, f64::INFINITY));
        let (r, m) = rank_with_margin(&DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 1e-12])), RANK_TOL);
        assert_eq!(r, 1);
        assert!((m / 1e-12 - 1.0).abs() < 1e-6);
        let (r, m) = rank_with_margin(&DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 1e-16])), RANK_TOL);
        assert_eq!((r, m), (1, 1.0));
        let (r, m) = rank_with_margin(&DMatrix::zeros(0, 0), RANK_TOL);
        assert_eq!((r, m), (0, f64::INFINITY));
    }

    #[test]
    fn plucker_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for k in 1..4 {
            let w = Wedge::new(5, k);
            let b = random_gaussian(5, k, &mut rng);
            let back = w.decompose(&w.plucker(&b));
            let pb = projector(&orthonormalize(&b).unwrap());
            assert!((projector(&back) - pb).norm() < 1e-10);
        }
    }

    #[test]
    fn exterior_power_is_multiplicative() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let a = random_gaussian(4, 4, &mut rng);
        let b = random_gaussian(4, 4, &mut rng);
        let w = Wedge::new(4, 2);
        let lhs = w.power(&(&a * &b));
        let rhs = w.power(&a) * w.power(&b);
        assert!((lhs - rhs).norm() < 1e-10);
    }

    #[test]
    fn nested_frame_respects_blocks() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let b = random_gaussian(4, 3, &mut rng);
        let s1 = b.columns(0, 1).into_owned();
        let f = nested_frame(4, &[s1.clone(), b.clone()]);
        assert!((f.transpose() * &f - DMatrix::identity(4, 4)).norm() < 1e-12);
        let (r, _) = rank_with_margin(&hstack(&f.columns(0, 1).into_owned(), &s1), RANK_TOL);
        assert_eq!(r, 1);
        let (r, _) = rank_with_margin(&hstack(&f.columns(0, 3).into_owned(), &b), RANK_TOL);
        assert_eq!(r, 3);
    }

    #[test]
    fn svd_of_rank_deficient_products() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for trial in 0..400 {
            let r = 2 + trial % 5;
            let c = 2 + (trial / 5) % 5;
            let k = 1 + trial % r.min(c);
            let m = random_gaussian(r, k, &mut rng) * random_gaussian(k, c, &mut rng);
            let f = svd(&m);
            let n = r.min(c);
            let back = &f.u * DMatrix::from_diagonal(&DVector::from_vec(f.s.clone())) * &f.vt;
            assert!((back - &m).norm() < 1e-12 * m.norm().max(1.0));
            assert!((f.u.transpose() * &f.u - DMatrix::identity(n, n)).norm() < 1e-12);
            assert!(f.s.windows(2).all(|w| w[0] >= w[1]));
        }
    }
}
