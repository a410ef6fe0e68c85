use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use nalgebra::{DMatrix, DVector};

use crate::linalg::{self, Wedge};
use crate::spaces::{
    ComplementaryPair, GroupManifoldPoint, NegativeLine, PartialFlag, QuadraticForm, SpacePoint,
};
use crate::{Error, Result};

/// Gaps at or below this value do not define attractors.
pub const GAP_TOL: f64 = 1e-6;

pub(crate) fn wedge(d: usize, k: usize) -> &'static Wedge {
    static CACHE: OnceLock<Mutex<HashMap<(usize, usize), &'static Wedge>>> = OnceLock::new();
    let mut map = CACHE.get_or_init(|| Mutex::new(HashMap::new())).lock().expect("wedge cache");
    map.entry((d, k)).or_insert_with(|| Box::leak(Box::new(Wedge::new(d, k))))
}

/// Cartan projection with attractor and repellor.
#[derive(Debug, Clone)]
pub struct CartanData {
    /// Log singular values, descending.
    pub mu: Vec<f64>,
    pub theta: Vec<usize>,
    /// `α_k(μ) = μ_k − μ_{k+1}` for `k ∈ θ`.
    pub gaps: Vec<f64>,
    /// `U_θ(g)`, present only with a `θ`-gap.
    pub kflag: Option<PartialFlag>,
    /// `S_θ(g)`: `S^k` is spanned by the `k` least expanded right singular
    /// directions.
    pub lflag: Option<PartialFlag>,
}

impl CartanData {
    pub fn has_gap(&self) -> bool {
        self.gaps.iter().all(|&g| g > GAP_TOL)
    }

    /// Smallest `α(μ)` over `θ`.
    pub fn min_gap(&self) -> f64 {
        self.gaps.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

fn gaps_of(mu: &[f64], theta: &[usize]) -> Vec<f64> {
    theta.iter().map(|&k| (mu[k - 1] - mu[k]).max(0.0)).collect()
}

fn sorted_desc(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

/// Cartan data of a single moderate-size matrix through its SVD.
pub fn cartan(g: &DMatrix<f64>, theta: &[usize]) -> Result<CartanData> {
    let d = g.nrows();
    if g.ncols() != d {
        return Err(Error::InvalidDimension(format!("{}x{} matrix", d, g.ncols())));
    }
    let theta = crate::weyl::check_dims(d, theta)?;
    let svd = linalg::svd(g);
    let mu: Vec<f64> = svd.s.iter().map(|x| x.ln()).collect();
    let gaps = gaps_of(&mu, &theta);
    let mut data = CartanData { mu, theta: theta.clone(), gaps, kflag: None, lflag: None };
    if data.has_gap() {
        let kframe = svd.u.clone();
        let lframe = DMatrix::from_fn(d, d, |r, c| svd.vt[(d - 1 - c, r)]);
        data.kflag = Some(PartialFlag::new(&theta, &kframe)?);
        data.lflag = Some(PartialFlag::new(&theta, &lframe)?);
    }
    Ok(data)
}

/// Jordan projection: log moduli of eigenvalues, descending.
pub fn jordan(g: &DMatrix<f64>) -> Vec<f64> {
    sorted_desc(g.complex_eigenvalues().iter().map(|z| z.norm().ln()).collect())
}

/// One factor of a tracked element: `Λ^k g` for `k = 1..d-1`, each stored
/// as a matrix of largest entry 1 together with the log of the scale.
#[derive(Debug, Clone)]
struct Powers {
    d: usize,
    powers: Vec<(DMatrix<f64>, f64)>,
}

impl Powers {
    fn from_matrix(g: &DMatrix<f64>) -> Self {
        let d = g.nrows();
        let powers = (1..d)
            .map(|k| {
                let m = if k == 1 { g.clone() } else { wedge(d, k).power(g) };
                normalized(m, 0.0)
            })
            .collect();
        Powers { d, powers }
    }

    fn identity(d: usize) -> Self {
        Powers { d, powers: (1..d).map(|k| (DMatrix::identity(wedge(d, k).dim(), wedge(d, k).dim()), 0.0)).collect() }
    }

    fn mul(&self, other: &Powers) -> Powers {
        let powers = self
            .powers
            .iter()
            .zip(&other.powers)
            .map(|((a, sa), (b, sb))| normalized(a * b, sa + sb))
            .collect();
        Powers { d: self.d, powers }
    }

    /// `log σ_1(Λ^k g)` for `k = 1..d-1`.
    fn top_logs(&self) -> Vec<f64> {
        self.powers.iter().map(|(m, s)| linalg::singular_values(m)[0].ln() + s).collect()
    }

    fn mu(&self) -> Vec<f64> {
        let s = self.top_logs();
        let d = self.d;
        let mu = (0..d)
            .map(|i| {
                let hi = if i < d - 1 { s[i] } else { 0.0 };
                let lo = if i > 0 { s[i - 1] } else { 0.0 };
                hi - lo
            })
            .collect();
        sorted_desc(mu)
    }

    fn jordan(&self) -> Vec<f64> {
        let d = self.d;
        let s: Vec<f64> = self
            .powers
            .iter()
            .map(|(m, sc)| m.complex_eigenvalues().iter().fold(0.0_f64, |a, z| a.max(z.norm())).ln() + sc)
            .collect();
        sorted_desc(
            (0..d)
                .map(|i| {
                    let hi = if i < d - 1 { s[i] } else { 0.0 };
                    let lo = if i > 0 { s[i - 1] } else { 0.0 };
                    hi - lo
                })
                .collect(),
        )
    }

    fn cartan(&self, theta: &[usize]) -> Result<CartanData> {
        let d = self.d;
        let theta = crate::weyl::check_dims(d, theta)?;
        let mu = self.mu();
        let gaps = gaps_of(&mu, &theta);
        let mut data = CartanData { mu, theta: theta.clone(), gaps, kflag: None, lflag: None };
        if data.has_gap() {
            let mut ups = Vec::new();
            let mut downs = Vec::new();
            for &k in &theta {
                let (m, _) = &self.powers[k - 1];
                let u = linalg::svd(m).u.column(0).into_owned();
                ups.push(wedge(d, k).decompose(&u));
                let (m2, _) = &self.powers[d - k - 1];
                let v = linalg::svd(m2).vt.row(0).transpose();
                let expanded = wedge(d, d - k).decompose(&v);
                downs.push(linalg::complement_basis(&expanded));
            }
            data.kflag = Some(PartialFlag::new(&theta, &linalg::nested_frame(d, &ups))?);
            data.lflag = Some(PartialFlag::new(&theta, &linalg::nested_frame(d, &downs))?);
        }
        Ok(data)
    }

    /// `g · V` for a `k`-dimensional subspace `V`, through `Λ^k g`.
    fn act_subspace(&self, basis: &DMatrix<f64>) -> DMatrix<f64> {
        let k = basis.ncols();
        if k == 0 || k == self.d {
            return linalg::orthonormal_span(basis, k);
        }
        let w = wedge(self.d, k);
        let image = &self.powers[k - 1].0 * w.plucker(basis);
        w.decompose(&image)
    }

    fn act_flag(&self, flag: &PartialFlag) -> Result<PartialFlag> {
        let subspaces: Vec<DMatrix<f64>> = flag.dims().iter().map(|&k| self.act_subspace(&flag.subspace(k))).collect();
        PartialFlag::new(flag.dims(), &linalg::nested_frame(self.d, &subspaces))
    }

    /// `g` up to a positive scalar.
    fn direction(&self) -> &DMatrix<f64> {
        &self.powers[0].0
    }
}

fn normalized(m: DMatrix<f64>, log_scale: f64) -> (DMatrix<f64>, f64) {
    let s = linalg::max_abs(&m);
    if s == 0.0 || !s.is_finite() {
        return (m, log_scale);
    }
    (m / s, log_scale + s.ln())
}

/// A group element kept through all its exterior powers, each log-scaled, so
/// that products of long words keep accurate Cartan data and accurate
/// actions on subspaces.
#[derive(Debug, Clone)]
pub struct Tracked {
    factors: Vec<Powers>,
}

impl Tracked {
    pub fn from_matrices(ms: &[DMatrix<f64>]) -> Self {
        Tracked { factors: ms.iter().map(Powers::from_matrix).collect() }
    }

    pub fn identity(d: usize, factors: usize) -> Self {
        Tracked { factors: (0..factors).map(|_| Powers::identity(d)).collect() }
    }

    pub fn factors(&self) -> usize {
        self.factors.len()
    }

    pub fn d(&self) -> usize {
        self.factors[0].d
    }

    pub fn mul(&self, other: &Tracked) -> Tracked {
        Tracked { factors: self.factors.iter().zip(&other.factors).map(|(a, b)| a.mul(b)).collect() }
    }

    /// Cartan projection of each factor.
    pub fn mu(&self) -> Vec<Vec<f64>> {
        self.factors.iter().map(Powers::mu).collect()
    }

    pub fn jordan(&self) -> Vec<Vec<f64>> {
        self.factors.iter().map(Powers::jordan).collect()
    }

    pub fn cartan(&self, theta: &[usize]) -> Result<Vec<CartanData>> {
        self.factors.iter().map(|f| f.cartan(theta)).collect()
    }

    /// Each factor as a matrix, rescaled to determinant one. Accurate only
    /// while the element is moderately conditioned.
    pub fn matrices(&self) -> Vec<DMatrix<f64>> {
        self.factors
            .iter()
            .map(|f| linalg::det_normalize(f.direction()).unwrap_or_else(|| f.direction().clone()))
            .collect()
    }

    /// Image of a subspace under one factor.
    pub fn act_subspace(&self, factor: usize, basis: &DMatrix<f64>) -> DMatrix<f64> {
        self.factors[factor].act_subspace(basis)
    }

    pub fn act_flag(&self, factor: usize, flag: &PartialFlag) -> Result<PartialFlag> {
        self.factors[factor].act_flag(flag)
    }

    /// `g · x`. Subspaces move through exterior powers; forms and group
    /// manifold points through the matrices themselves.
    pub fn act_point(&self, x: &SpacePoint) -> Result<SpacePoint> {
        let f = &self.factors[0];
        Ok(match x {
            SpacePoint::ComplementaryPair(c) => {
                SpacePoint::ComplementaryPair(ComplementaryPair::new(&f.act_subspace(c.plus()), &f.act_subspace(c.minus()))?)
            }
            SpacePoint::NegativeLine(v) => {
                let col = DMatrix::from_column_slice(v.vector().len(), 1, v.vector().as_slice());
                let image = f.act_subspace(&col);
                SpacePoint::NegativeLine(NegativeLine::new(&DVector::from_column_slice(image.as_slice()), v.p(), v.q())?)
            }
            SpacePoint::Flag(fl) => SpacePoint::Flag(f.act_flag(fl)?),
            SpacePoint::QuadraticForm(s) => {
                let gi = f.direction().clone().try_inverse().ok_or_else(|| Error::InvalidInput("singular group element".into()))?;
                SpacePoint::QuadraticForm(QuadraticForm::new(&(gi.transpose() * s.matrix() * &gi))?)
            }
            SpacePoint::GroupManifold(p) => {
                if self.factors.len() != 2 {
                    return Err(Error::InvalidInput("group manifolds need a pair of elements".into()));
                }
                let (gl, gr) = (self.factors[0].direction(), self.factors[1].direction());
                let gri = gr.clone().try_inverse().ok_or_else(|| Error::InvalidInput("singular group element".into()))?;
                let m = gl * p.matrix() * gri;
                SpacePoint::GroupManifold(GroupManifoldPoint::new(&m)?)
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn diag(v: &[f64]) -> DMatrix<f64> {
        DMatrix::from_diagonal(&DVector::from_column_slice(v))
    }

    #[test]
    fn cartan_of_diagonal() {
        let g = diag(&[2f64.exp(), 1f64.exp(), (-3f64).exp()]);
        let c = cartan(&g, &[1, 2]).unwrap();
        for (a, b) in c.mu.iter().zip([2.0, 1.0, -3.0]) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(c.has_gap());
        let id = cartan(&DMatrix::identity(3, 3), &[1, 2]).unwrap();
        assert!(id.mu.iter().all(|m| m.abs() < 1e-14));
        assert!(id.kflag.is_none() && id.lflag.is_none());
    }

    #[test]
    fn tracked_matches_svd() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for d in 2..6 {
            let g = linalg::random_sl(d, &mut rng);
            let h = linalg::random_sl(d, &mut rng);
            let t = Tracked::from_matrices(&[g.clone()]).mul(&Tracked::from_matrices(&[h.clone()]));
            let direct = cartan(&(&g * &h), &crate::weyl::full_dims(d)).unwrap();
            for (a, b) in t.mu()[0].iter().zip(&direct.mu) {
                assert!((a - b).abs() < 1e-9, "{a} {b}");
            }
            let tc = &t.cartan(&crate::weyl::full_dims(d)).unwrap()[0];
            if let (Some(a), Some(b)) = (&tc.kflag, &direct.kflag) {
                for k in 1..d {
                    let pa = linalg::projector(&a.subspace(k));
                    let pb = linalg::projector(&b.subspace(k));
                    assert!((pa - pb).norm() < 1e-7);
                }
            }
            if let (Some(a), Some(b)) = (&tc.lflag, &direct.lflag) {
                for k in 1..d {
                    let pa = linalg::projector(&a.subspace(k));
                    let pb = linalg::projector(&b.subspace(k));
                    let e = (pa - pb).norm();
                    assert!(e < 1e-7, "d={d} k={k} {e}");
                }
            }
        }
    }

    #[test]
    fn subspaces_move_like_column_spaces() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for d in 2..6 {
            let g = linalg::random_sl(d, &mut rng);
            let t = Tracked::from_matrices(&[g.clone()]);
            for k in 1..d {
                let v = linalg::random_gaussian(d, k, &mut rng);
                let moved = t.act_subspace(0, &v);
                let direct = linalg::column_space(&(&g * &v));
                let e = (linalg::projector(&moved) - linalg::projector(&direct)).norm();
                assert!(e < 1e-9, "d={d} k={k} {e}");
            }
        }
    }

    #[test]
    fn jordan_of_unipotent_and_diagonal() {
        let mut u = DMatrix::<f64>::identity(3, 3);
        u[(0, 1)] = 1.0;
        u[(1, 2)] = 1.0;
        assert!(jordan(&u).iter().all(|x| x.abs() < 1e-5));
        let j = jordan(&diag(&[2f64.exp(), 1f64.exp(), (-3f64).exp()]));
        for (a, b) in j.iter().zip([2.0, 1.0, -3.0]) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn long_products_stay_accurate() {
        let a = diag(&[20f64, 1.0 / 20.0]);
        let lift = crate::spaces::symmetric_power_lift(&a, 4).unwrap();
        let one = Tracked::from_matrices(&[lift]);
        let mut t = Tracked::identity(4, 1);
        for _ in 0..40 {
            t = t.mul(&one);
        }
        let mu = &t.mu()[0];
        let l = 20f64.ln() * 40.0;
        for (m, w) in mu.iter().zip([3.0, 1.0, -1.0, -3.0]) {
            assert!((m - w * l).abs() < 1e-8 * l, "{m}");
        }
    }
}
