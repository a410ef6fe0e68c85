use nalgebra::{DMatrix, DVector};

use crate::linalg::{self, RANK_TOL};
use crate::spaces::PartialFlag;
use crate::{Error, Result};

/// A pair of complementary subspaces `(U⁺, U⁻)` with `dim U⁺ = p`.
#[derive(Debug, Clone)]
pub struct ComplementaryPair {
    plus: DMatrix<f64>,
    minus: DMatrix<f64>,
    proj_plus: DMatrix<f64>,
}

impl ComplementaryPair {
    pub fn new(plus: &DMatrix<f64>, minus: &DMatrix<f64>) -> Result<Self> {
        let d = plus.nrows();
        if minus.nrows() != d || plus.ncols() + minus.ncols() != d || plus.ncols() == 0 || minus.ncols() == 0 {
            return Err(Error::InvalidPoint(format!(
                "bases of sizes {}x{} and {}x{} do not split R^{d}",
                d,
                plus.ncols(),
                minus.nrows(),
                minus.ncols()
            )));
        }
        let plus = linalg::orthonormalize(plus).ok_or_else(|| Error::InvalidPoint("U+ basis is degenerate".into()))?;
        let minus = linalg::orthonormalize(minus).ok_or_else(|| Error::InvalidPoint("U- basis is degenerate".into()))?;
        let both = linalg::hstack(&plus, &minus);
        let (rank, margin) = linalg::rank_with_margin(&both, RANK_TOL);
        if rank < d || margin < linalg::BOUNDARY_MARGIN {
            return Err(Error::InvalidPoint("U+ and U- are not transverse".into()));
        }
        let inv = both.try_inverse().ok_or_else(|| Error::InvalidPoint("U+ and U- are not transverse".into()))?;
        let p = plus.ncols();
        let proj_plus = &plus * inv.rows(0, p);
        Ok(ComplementaryPair { plus, minus, proj_plus })
    }

    /// `(span(e_1..e_p), span(e_{p+1}..e_d))`.
    pub fn base(d: usize, p: usize) -> Result<Self> {
        if p == 0 || p >= d {
            return Err(Error::InvalidDimension(format!("p = {p} in dimension {d}")));
        }
        let id = DMatrix::<f64>::identity(d, d);
        Self::new(&id.columns(0, p).into_owned(), &id.columns(p, d - p).into_owned())
    }

    pub fn d(&self) -> usize {
        self.plus.nrows()
    }

    pub fn p(&self) -> usize {
        self.plus.ncols()
    }

    pub fn q(&self) -> usize {
        self.minus.ncols()
    }

    pub fn plus(&self) -> &DMatrix<f64> {
        &self.plus
    }

    pub fn minus(&self) -> &DMatrix<f64> {
        &self.minus
    }

    /// Projection onto `U⁺` along `U⁻`.
    pub fn projection_plus(&self) -> &DMatrix<f64> {
        &self.proj_plus
    }

    pub fn act(&self, g: &DMatrix<f64>) -> Result<Self> {
        Self::new(&(g * &self.plus), &(g * &self.minus))
    }
}

/// A nondegenerate quadratic form up to positive scaling, stored with
/// `p <= q` (`p` positive directions) and `|det| = 1`.
#[derive(Debug, Clone)]
pub struct QuadraticForm {
    matrix: DMatrix<f64>,
    p: usize,
    q: usize,
    norm: f64,
}

impl QuadraticForm {
    pub fn new(matrix: &DMatrix<f64>) -> Result<Self> {
        let d = matrix.nrows();
        if matrix.ncols() != d || d < 2 {
            return Err(Error::InvalidPoint("form matrix must be square".into()));
        }
        let mut s = (matrix + matrix.transpose()) * 0.5;
        let eig = s.clone().symmetric_eigenvalues();
        let top = eig.iter().fold(0.0_f64, |a, &b| a.max(b.abs()));
        if top == 0.0 || eig.iter().any(|v| v.abs() <= 1e-10 * top) {
            return Err(Error::InvalidPoint("form is degenerate".into()));
        }
        let pos = eig.iter().filter(|&&v| v > 0.0).count();
        let neg = d - pos;
        let (p, q) = if pos > neg {
            s = -s;
            (neg, pos)
        } else {
            (pos, neg)
        };
        let det: f64 = eig.iter().map(|v| v.abs()).product();
        s /= det.powf(1.0 / d as f64);
        let norm = top / det.powf(1.0 / d as f64);
        Ok(QuadraticForm { matrix: s, p, q, norm })
    }

    /// `diag(1^p, (-1)^q)`, needs `p <= q`.
    pub fn base(p: usize, q: usize) -> Result<Self> {
        if p == 0 || p > q {
            return Err(Error::InvalidDimension(format!("signature ({p},{q}); need 1 <= p <= q")));
        }
        let d = p + q;
        let diag = DVector::from_fn(d, |i, _| if i < p { 1.0 } else { -1.0 });
        Self::new(&DMatrix::from_diagonal(&diag))
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn d(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn q(&self) -> usize {
        self.q
    }

    /// Spectral norm of the stored matrix.
    pub fn norm(&self) -> f64 {
        self.norm
    }

    /// `g · x`, the form `v ↦ x(g⁻¹ v)`.
    pub fn act(&self, g: &DMatrix<f64>) -> Result<Self> {
        let gi = g.clone().try_inverse().ok_or_else(|| Error::InvalidInput("singular group element".into()))?;
        Self::new(&(gi.transpose() * &self.matrix * gi))
    }
}

/// A point of the group manifold `G₀ = SL(m, R)`.
#[derive(Debug, Clone)]
pub struct GroupManifoldPoint {
    g0: DMatrix<f64>,
}

impl GroupManifoldPoint {
    pub fn new(g0: &DMatrix<f64>) -> Result<Self> {
        if g0.nrows() != g0.ncols() {
            return Err(Error::InvalidPoint("group manifold point must be square".into()));
        }
        let det = g0.determinant();
        if det <= 0.0 || !det.is_finite() {
            return Err(Error::InvalidPoint(format!("determinant {det} is not positive")));
        }
        let g0 = linalg::det_normalize(g0).ok_or_else(|| Error::InvalidPoint("singular matrix".into()))?;
        Ok(GroupManifoldPoint { g0 })
    }

    pub fn identity(m: usize) -> Self {
        GroupManifoldPoint { g0: DMatrix::identity(m, m) }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.g0
    }

    pub fn m(&self) -> usize {
        self.g0.nrows()
    }

    /// `(g_L, g_R) · g = g_L g g_R⁻¹`.
    pub fn act(&self, gl: &DMatrix<f64>, gr: &DMatrix<f64>) -> Result<Self> {
        let gri = gr.clone().try_inverse().ok_or_else(|| Error::InvalidInput("singular group element".into()))?;
        Ok(GroupManifoldPoint { g0: gl * &self.g0 * gri })
    }
}

/// A negative line for `Q = diag(1^p, (-1)^q)`, i.e. a point of `H^{p,q-1}`.
#[derive(Debug, Clone)]
pub struct NegativeLine {
    vector: DVector<f64>,
    p: usize,
    q: usize,
}

impl NegativeLine {
    pub fn new(v: &DVector<f64>, p: usize, q: usize) -> Result<Self> {
        if v.len() != p + q {
            return Err(Error::InvalidPoint(format!("vector of length {} for signature ({p},{q})", v.len())));
        }
        let n = v.norm();
        if n == 0.0 {
            return Err(Error::InvalidPoint("zero vector".into()));
        }
        let u = v / n;
        if q_form(&u, &u, p) >= -1e-12 {
            return Err(Error::InvalidPoint("line is not negative".into()));
        }
        Ok(NegativeLine { vector: u, p, q })
    }

    /// `span(e_{p+q})`.
    pub fn base(p: usize, q: usize) -> Result<Self> {
        let mut v = DVector::zeros(p + q);
        v[p + q - 1] = 1.0;
        Self::new(&v, p, q)
    }

    pub fn vector(&self) -> &DVector<f64> {
        &self.vector
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn act(&self, g: &DMatrix<f64>) -> Result<Self> {
        Self::new(&(g * &self.vector), self.p, self.q)
    }
}

/// `Q(u, v)` for `Q = diag(1^p, -1^rest)`.
pub fn q_form(u: &DVector<f64>, v: &DVector<f64>, p: usize) -> f64 {
    u.iter().zip(v.iter()).enumerate().map(|(i, (a, b))| if i < p { a * b } else { -a * b }).sum()
}

/// `diag(1^p, (-1)^q)`.
pub fn q_matrix(p: usize, q: usize) -> DMatrix<f64> {
    DMatrix::from_diagonal(&DVector::from_fn(p + q, |i, _| if i < p { 1.0 } else { -1.0 }))
}

/// A point `x` of one of the supported homogeneous spaces.
#[derive(Debug, Clone)]
pub enum SpacePoint {
    ComplementaryPair(ComplementaryPair),
    QuadraticForm(QuadraticForm),
    GroupManifold(GroupManifoldPoint),
    NegativeLine(NegativeLine),
    Flag(PartialFlag),
}

impl SpacePoint {
    pub fn kind(&self) -> &'static str {
        match self {
            SpacePoint::ComplementaryPair(_) => "complementary pair",
            SpacePoint::QuadraticForm(_) => "quadratic form",
            SpacePoint::GroupManifold(_) => "group manifold point",
            SpacePoint::NegativeLine(_) => "negative line",
            SpacePoint::Flag(_) => "flag",
        }
    }

    /// Flattened coordinates, used for export.
    pub fn coordinates(&self) -> Vec<f64> {
        match self {
            SpacePoint::ComplementaryPair(x) => {
                let mut v: Vec<f64> = linalg::projector(x.plus()).iter().copied().collect();
                v.extend(linalg::projector(x.minus()).iter().copied());
                v
            }
            SpacePoint::QuadraticForm(x) => x.matrix().iter().copied().collect(),
            SpacePoint::GroupManifold(x) => x.matrix().iter().copied().collect(),
            SpacePoint::NegativeLine(x) => {
                let v = x.vector();
                let s = if v[v.len() - 1] < 0.0 { -1.0 } else { 1.0 };
                v.iter().map(|a| a * s).collect()
            }
            SpacePoint::Flag(f) => f.frame().iter().copied().collect(),
        }
    }
}
