//! Representations shipped with the library.

use nalgebra::DMatrix;

use crate::anosov::{Generator, RepSpec};
use crate::spaces::q_matrix;
use crate::weyl;

/// Ping-pong pair in `SL(2, R)`: `a = diag(λ, λ⁻¹)` and a symmetric `b`
/// with the same trace 20, whose fixed points sit at 45° from those of `a`.
/// Both have translation length `2 arccosh 10`.
pub fn schottky_sl2() -> RepSpec {
    let r = 99f64.sqrt();
    let a = DMatrix::from_row_slice(2, 2, &[10.0 + r, 0.0, 0.0, 10.0 - r]);
    let b = DMatrix::from_row_slice(2, 2, &[10.0, r, r, 10.0]);
    RepSpec::new("schottky_sl2", 2, &[1], vec![Generator::new("a", a), Generator::new("b", b)]).expect("valid bundled rep")
}

/// `Sym^{d-1}` of [`schottky_sl2`], with `θ = Δ`.
pub fn sym_lift(d: usize) -> crate::Result<RepSpec> {
    let base = schottky_sl2();
    let gens: Vec<(String, DMatrix<f64>)> =
        base.generators.iter().map(|g| (g.label.clone(), g.factors[0].clone())).collect();
    RepSpec::symmetric_power(&format!("sym{}_schottky", d - 1), &gens, d, &weyl::full_dims(d))
}

/// One diagonal generator `(diag(e^{3/2}, e^{-3/2}), diag(e, e⁻¹))` of
/// `SL(2, R) × SL(2, R)` acting on the group manifold `SL(2, R)`.
pub fn diagonal_pair() -> RepSpec {
    let l = DMatrix::from_row_slice(2, 2, &[1.5f64.exp(), 0.0, 0.0, (-1.5f64).exp()]);
    let r = DMatrix::from_row_slice(2, 2, &[1f64.exp(), 0.0, 0.0, (-1f64).exp()]);
    RepSpec::new("diagonal_pair", 2, &[1], vec![Generator::pair("a", l, r)]).expect("valid bundled rep")
}

fn boost(d: usize, i: usize, j: usize, s: f64) -> DMatrix<f64> {
    let mut m = DMatrix::identity(d, d);
    m[(i, i)] = s.cosh();
    m[(j, j)] = s.cosh();
    m[(i, j)] = s.sinh();
    m[(j, i)] = s.sinh();
    m
}

fn rotation(d: usize, i: usize, j: usize, t: f64) -> DMatrix<f64> {
    let mut m = DMatrix::identity(d, d);
    m[(i, i)] = t.cos();
    m[(j, j)] = t.cos();
    m[(i, j)] = -t.sin();
    m[(j, i)] = t.sin();
    m
}

/// Two boosts of rapidity 3 in `SO(2, 2)` (form `diag(1, 1, -1, -1)`), the
/// second conjugated by a rotation of `SO(2) × SO(2)`.
pub fn schottky_so22() -> RepSpec {
    let a = boost(4, 0, 2, 3.0);
    let k = rotation(4, 0, 1, std::f64::consts::FRAC_PI_2) * rotation(4, 2, 3, std::f64::consts::FRAC_PI_4);
    let b = &k * &a * k.transpose();
    debug_assert!((b.transpose() * q_matrix(2, 2) * &b - q_matrix(2, 2)).norm() < 1e-9);
    RepSpec::new("schottky_so22", 4, &[1, 3], vec![Generator::new("a", a), Generator::new("b", b)]).expect("valid bundled rep")
}
