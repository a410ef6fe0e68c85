use nalgebra::DMatrix;

use crate::linalg::{self, RANK_TOL};
use crate::weyl;
use crate::{Error, Result};

/// Nested subspaces `ξ^i`, `i ∈ dims`, stored as an orthonormal frame whose
/// first `i` columns span `ξ^i`. Columns between the listed dimensions carry
/// no meaning.
#[derive(Debug, Clone)]
pub struct PartialFlag {
    dims: Vec<usize>,
    frame: DMatrix<f64>,
}

impl PartialFlag {
    /// Build from any invertible frame; the columns are re-orthonormalized in
    /// order, which preserves every leading span.
    pub fn new(dims: &[usize], frame: &DMatrix<f64>) -> Result<Self> {
        let d = frame.nrows();
        if frame.ncols() != d || d < 2 {
            return Err(Error::InvalidDimension(format!("frame is {}x{}", d, frame.ncols())));
        }
        let dims = weyl::check_dims(d, dims)?;
        let frame = linalg::orthonormalize(frame)
            .ok_or_else(|| Error::InvalidInput("frame columns are dependent".into()))?;
        Ok(PartialFlag { dims, frame })
    }

    /// Like [`PartialFlag::new`] but additionally requires `i ∈ θ ⇔ d-i ∈ θ`.
    pub fn new_self_opposite(dims: &[usize], frame: &DMatrix<f64>) -> Result<Self> {
        let f = Self::new(dims, frame)?;
        if !f.is_self_opposite() {
            return Err(Error::InvalidInput(format!("{:?} is not self-opposite in dimension {}", f.dims, f.d())));
        }
        Ok(f)
    }

    /// The coordinate flag `span(e_1, ..., e_i)`.
    pub fn standard(d: usize, dims: &[usize]) -> Result<Self> {
        Self::new(dims, &DMatrix::identity(d, d))
    }

    /// `w0 · F_std`: `ξ^i = span(e_d, ..., e_{d-i+1})`.
    pub fn opposite_standard(d: usize, dims: &[usize]) -> Result<Self> {
        Self::new(dims, &weyl::longest_element(d)?.signed_lift())
    }

    pub fn d(&self) -> usize {
        self.frame.nrows()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn frame(&self) -> &DMatrix<f64> {
        &self.frame
    }

    /// Orthonormal basis of `ξ^i`.
    pub fn subspace(&self, i: usize) -> DMatrix<f64> {
        self.frame.columns(0, i).into_owned()
    }

    pub fn is_self_opposite(&self) -> bool {
        weyl::is_self_opposite(self.d(), &self.dims)
    }

    /// `g · ξ`.
    pub fn act(&self, g: &DMatrix<f64>) -> Result<Self> {
        let moved = g * &self.frame;
        let frame = linalg::orthonormalize(&moved)
            .ok_or_else(|| Error::InvalidInput("singular group element".into()))?;
        Ok(PartialFlag { dims: self.dims.clone(), frame })
    }

    /// Forget some of the subspaces.
    pub fn restrict(&self, dims: &[usize]) -> Result<Self> {
        let dims = weyl::check_dims(self.d(), dims)?;
        if let Some(i) = dims.iter().find(|i| !self.dims.contains(i)) {
            return Err(Error::InvalidInput(format!("flag has no subspace of dimension {i}")));
        }
        Ok(PartialFlag { dims, frame: self.frame.clone() })
    }

    /// The orthogonal flag `i ↦ (ξ^{d-i})^⊥`, obtained by reversing the frame.
    pub fn orthogonal(&self) -> Self {
        let d = self.d();
        let mut frame = DMatrix::zeros(d, d);
        for k in 0..d {
            frame.set_column(k, &self.frame.column(d - 1 - k));
        }
        let mut dims: Vec<usize> = self.dims.iter().map(|&i| d - i).collect();
        dims.sort_unstable();
        PartialFlag { dims, frame }
    }
}

/// Whether `ξ^i ⊕ η^{d-i} = R^d` for every `i ∈ dims(ξ)`. The margin is the
/// least singular value over all concatenated bases.
pub fn transverse(xi: &PartialFlag, eta: &PartialFlag) -> Result<(bool, f64)> {
    let d = xi.d();
    if eta.d() != d {
        return Err(Error::InvalidDimension(format!("flags in R^{d} and R^{}", eta.d())));
    }
    let mut ok = true;
    let mut margin = f64::INFINITY;
    for &i in xi.dims() {
        if !eta.dims().contains(&(d - i)) {
            return Err(Error::InvalidInput(format!("second flag lacks dimension {}", d - i)));
        }
        let m = linalg::hstack(&xi.subspace(i), &eta.subspace(d - i));
        let s = linalg::singular_values(&m);
        let smin = *s.last().unwrap();
        margin = margin.min(smin);
        if smin <= RANK_TOL * s[0] {
            ok = false;
        }
    }
    Ok((ok, margin))
}
