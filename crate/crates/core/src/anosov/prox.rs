use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::anosov::tracked::{jordan, wedge, GAP_TOL};
use crate::linalg;
use crate::spaces::PartialFlag;
use crate::weyl;
use crate::{Error, Result};

/// Size of the random part of the net on `B_ε(g₋)`.
const NET: usize = 256;

#[derive(Debug, Clone)]
pub struct ProximalityReport {
    pub theta: Vec<usize>,
    pub r: f64,
    pub eps: f64,
    pub jordan: Vec<f64>,
    /// `g₊` as a flag.
    pub attracting: PartialFlag,
    /// `d_α(g₊, g₋)` for each `α ∈ θ`.
    pub separation: Vec<f64>,
    /// Largest `d_α(g ξ, g₊)` over the net.
    pub worst_image_distance: f64,
    pub net_size: usize,
    pub separated: bool,
    pub contracted: bool,
}

impl ProximalityReport {
    pub fn is_proximal(&self) -> bool {
        self.separated && self.contracted
    }
}

/// Unit eigenvector of `m` for the real eigenvalue `lambda`.
fn eigenvector(m: &DMatrix<f64>, lambda: f64) -> DVector<f64> {
    let n = m.nrows();
    let shifted = m - DMatrix::identity(n, n) * lambda;
    let v = linalg::svd(&shifted).vt.row(n - 1).transpose();
    &v / v.norm()
}

fn dominant(m: &DMatrix<f64>) -> Result<f64> {
    let eig = m.complex_eigenvalues();
    let mut idx: Vec<usize> = (0..eig.len()).collect();
    idx.sort_by(|&a, &b| eig[b].norm().total_cmp(&eig[a].norm()));
    let top = eig[idx[0]];
    if idx.len() > 1 && eig[idx[1]].norm() >= top.norm() * (1.0 - 1e-9) {
        return Err(Error::NotProximal("leading eigenvalue is not simple".into()));
    }
    if top.im.abs() > 1e-9 * top.norm() {
        return Err(Error::NotProximal("leading eigenvalue is not real".into()));
    }
    Ok(top.re)
}

struct Levels {
    ks: Vec<usize>,
    plus: Vec<DVector<f64>>,
    /// Unit normals of the repelling hyperplanes.
    minus: Vec<DVector<f64>>,
}

impl Levels {
    fn dist_to_minus(&self, flag: &PartialFlag) -> f64 {
        let d = flag.d();
        self.ks
            .iter()
            .zip(&self.minus)
            .map(|(&k, n)| wedge(d, k).plucker(&flag.subspace(k)).dot(n).abs())
            .fold(f64::INFINITY, f64::min)
    }

    fn dist_to_plus(&self, flag: &PartialFlag) -> f64 {
        let d = flag.d();
        self.ks
            .iter()
            .zip(&self.plus)
            .map(|(&k, v)| {
                let c = wedge(d, k).plucker(&flag.subspace(k)).dot(v);
                (1.0 - c * c).max(0.0).sqrt()
            })
            .fold(0.0, f64::max)
    }
}

/// Flag whose first vector moves from `f`'s first column to `u` as `t` goes
/// from 0 to 1.
fn path(theta: &[usize], f: &DMatrix<f64>, u: &DVector<f64>, t: f64) -> Option<PartialFlag> {
    let f0 = f.column(0).into_owned();
    let s = if f0.dot(u) < 0.0 { -1.0 } else { 1.0 };
    let c = &f0 * (1.0 - t) + u * (s * t);
    let mut frame = f.clone();
    frame.set_column(0, &(&c / c.norm()));
    PartialFlag::new(theta, &frame).ok()
}

/// Quantified proximality on `F_θ`: attracting and repelling data of each
/// `Λ^k g`, `k ∈ θ`, the separation `d_α(g₊, g₋) ≥ 2r` and the inclusion
/// `g · B_ε(g₋) ⊂ b_ε(g₊)` checked on a fixed net of `B_ε(g₋)` that
/// includes points of its boundary.
pub fn proximality_check(g: &DMatrix<f64>, theta: &[usize], r: f64, eps: f64) -> Result<ProximalityReport> {
    let d = g.nrows();
    if g.ncols() != d {
        return Err(Error::InvalidDimension(format!("{}x{} matrix", d, g.ncols())));
    }
    let theta = weyl::check_dims(d, theta)?;
    if theta.is_empty() || !(0.0 < eps && eps <= r) {
        return Err(Error::InvalidInput(format!("need non-empty theta and 0 < eps <= r, got {eps} and {r}")));
    }
    let lambda = jordan(g);
    for &k in &theta {
        if lambda[k - 1] - lambda[k] <= GAP_TOL {
            return Err(Error::NotProximal(format!("alpha_{k}(lambda) = {:.3e}", lambda[k - 1] - lambda[k])));
        }
    }
    let mut levels = Levels { ks: theta.clone(), plus: Vec::new(), minus: Vec::new() };
    let mut ups = Vec::new();
    for &k in &theta {
        let m = if k == 1 { g.clone() } else { wedge(d, k).power(g) };
        let top = dominant(&m)?;
        let v = eigenvector(&m, top);
        let n = eigenvector(&m.transpose(), top);
        ups.push(wedge(d, k).decompose(&v));
        levels.plus.push(v);
        levels.minus.push(n);
    }
    let attracting = PartialFlag::new(&theta, &linalg::nested_frame(d, &ups))?;
    let separation: Vec<f64> = levels.plus.iter().zip(&levels.minus).map(|(v, n)| v.dot(n).abs()).collect();
    let separated = separation.iter().all(|&s| s >= 2.0 * r);

    // A vector lying in every repelling subspace g₋^{d-k}: the one for the
    // largest k is the smallest.
    let kmax = *theta.last().expect("non-empty");
    let annihilated = wedge(d, kmax).decompose(levels.minus.last().expect("non-empty"));
    let bad = linalg::complement_basis(&annihilated).column(0).into_owned();

    let mut rng = ChaCha8Rng::seed_from_u64(0xb0a11);
    let mut net = Vec::new();
    for _ in 0..NET {
        let frame = linalg::random_orthogonal(d, &mut rng);
        let Ok(xi) = PartialFlag::new(&theta, &frame) else { continue };
        if levels.dist_to_minus(&xi) < eps {
            continue;
        }
        let (mut lo, mut hi) = (0.0, 1.0);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            match path(&theta, &frame, &bad, mid) {
                Some(f) if levels.dist_to_minus(&f) >= eps => lo = mid,
                _ => hi = mid,
            }
        }
        if let Some(edge) = path(&theta, &frame, &bad, lo) {
            net.push(edge);
        }
        net.push(xi);
    }
    let mut worst: f64 = 0.0;
    for xi in &net {
        worst = worst.max(levels.dist_to_plus(&xi.act(g)?));
    }
    Ok(ProximalityReport {
        theta,
        r,
        eps,
        jordan: lambda,
        attracting,
        separation,
        worst_image_distance: worst,
        net_size: net.len(),
        separated,
        contracted: worst <= eps,
    })
}
