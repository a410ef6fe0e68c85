//! The Weyl group of `SL(d, R)`: the symmetric group on `d` letters.
//!
//! Permutations use one-line notation with 1-based images. Simple root
//! `alpha_i` corresponds to the transposition `s_i = (i, i+1)`, and dimension
//! sets `theta` are subsets of `{1, ..., d-1}`.

use std::fmt;

use nalgebra::DMatrix;

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    images: Vec<usize>,
}

impl Permutation {
    pub fn new(images: Vec<usize>) -> Result<Self> {
        let d = images.len();
        let mut seen = vec![false; d + 1];
        for &i in &images {
            if i == 0 || i > d || seen[i] {
                return Err(Error::InvalidInput(format!("{images:?} is not a permutation of 1..={d}")));
            }
            seen[i] = true;
        }
        Ok(Permutation { images })
    }

    pub fn identity(d: usize) -> Self {
        Permutation { images: (1..=d).collect() }
    }

    /// The simple transposition `s_i`, swapping `i` and `i + 1`.
    pub fn simple(d: usize, i: usize) -> Result<Self> {
        if i == 0 || i >= d {
            return Err(Error::InvalidInput(format!("s_{i} does not exist in S_{d}")));
        }
        let mut images: Vec<usize> = (1..=d).collect();
        images.swap(i - 1, i);
        Ok(Permutation { images })
    }

    pub fn d(&self) -> usize {
        self.images.len()
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    /// `w(i)` for 1-based `i`.
    pub fn apply(&self, i: usize) -> usize {
        self.images[i - 1]
    }

    /// Number of inversions.
    pub fn length(&self) -> usize {
        let w = &self.images;
        let mut n = 0;
        for i in 0..w.len() {
            for j in i + 1..w.len() {
                if w[i] > w[j] {
                    n += 1;
                }
            }
        }
        n
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Permutation) -> Permutation {
        assert_eq!(self.d(), other.d());
        Permutation { images: other.images.iter().map(|&i| self.apply(i)).collect() }
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.d()];
        for (k, &v) in self.images.iter().enumerate() {
            inv[v - 1] = k + 1;
        }
        Permutation { images: inv }
    }

    /// `s_i w < w`.
    pub fn has_left_descent(&self, i: usize) -> bool {
        let inv = self.inverse();
        inv.apply(i) > inv.apply(i + 1)
    }

    /// `w s_i < w`.
    pub fn has_right_descent(&self, i: usize) -> bool {
        self.apply(i) > self.apply(i + 1)
    }

    /// `s_i w`: swap the values `i` and `i + 1`.
    pub fn left_mul_simple(&self, i: usize) -> Permutation {
        let images = self
            .images
            .iter()
            .map(|&v| if v == i { i + 1 } else if v == i + 1 { i } else { v })
            .collect();
        Permutation { images }
    }

    /// `w s_i`: swap positions `i` and `i + 1`.
    pub fn right_mul_simple(&self, i: usize) -> Permutation {
        let mut images = self.images.clone();
        images.swap(i - 1, i);
        Permutation { images }
    }

    /// A reduced word `[i_1, ..., i_l]` with `w = s_{i_1} ... s_{i_l}`.
    pub fn reduced_word(&self) -> Vec<usize> {
        let mut w = self.clone();
        let mut word = Vec::new();
        while let Some(i) = (1..w.d()).find(|&i| w.has_right_descent(i)) {
            word.push(i);
            w = w.right_mul_simple(i);
        }
        word.reverse();
        word
    }

    /// `r_w(i, j) = #{k <= i : w(k) <= j}` for `0 <= i, j <= d`.
    pub fn rank_matrix(&self) -> Vec<Vec<usize>> {
        let d = self.d();
        let mut r = vec![vec![0; d + 1]; d + 1];
        for i in 1..=d {
            for j in 1..=d {
                r[i][j] = r[i - 1][j] + usize::from(self.apply(i) <= j);
            }
        }
        r
    }

    /// Permutation matrix sending `e_k` to `e_{w(k)}`.
    pub fn matrix(&self) -> DMatrix<f64> {
        let d = self.d();
        let mut m = DMatrix::zeros(d, d);
        for k in 0..d {
            m[(self.images[k] - 1, k)] = 1.0;
        }
        m
    }

    /// Lift to `SO(d)`: the permutation matrix with the column of the last
    /// moved basis vector negated when the sign is odd.
    pub fn signed_lift(&self) -> DMatrix<f64> {
        let mut m = self.matrix();
        if m.determinant() < 0.0 {
            let last = (0..self.d()).rev().find(|&k| self.images[k] != k + 1).unwrap_or(0);
            m.column_mut(last).neg_mut();
        }
        m
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.images.iter().map(|i| i.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// Validate and sort a dimension set for `SL(d)`.
pub fn check_dims(d: usize, dims: &[usize]) -> Result<Vec<usize>> {
    let mut out = dims.to_vec();
    out.sort_unstable();
    out.dedup();
    if out.len() != dims.len() || out.iter().any(|&i| i == 0 || i >= d) {
        return Err(Error::InvalidInput(format!("{dims:?} is not a subset of 1..{d}")));
    }
    Ok(out)
}

/// `{1, ..., d-1}`.
pub fn full_dims(d: usize) -> Vec<usize> {
    (1..d).collect()
}

/// `i in theta <=> d - i in theta`.
pub fn is_self_opposite(d: usize, dims: &[usize]) -> bool {
    dims.iter().all(|&i| dims.contains(&(d - i)))
}

pub fn longest_element(d: usize) -> Result<Permutation> {
    if d < 2 {
        return Err(Error::InvalidDimension(format!("d = {d}, need d >= 2")));
    }
    Ok(Permutation { images: (1..=d).rev().collect() })
}

/// Bruhat order by the rank-matrix criterion.
pub fn bruhat_leq(u: &Permutation, w: &Permutation) -> Result<bool> {
    if u.d() != w.d() {
        return Err(Error::InvalidInput(format!("S_{} vs S_{}", u.d(), w.d())));
    }
    let (ru, rw) = (u.rank_matrix(), w.rank_matrix());
    Ok(ru.iter().zip(&rw).all(|(a, b)| a.iter().zip(b).all(|(x, y)| x >= y)))
}

/// `w0 w w0`.
pub fn opposition(w: &Permutation) -> Permutation {
    let d = w.d();
    Permutation { images: (1..=d).map(|i| d + 1 - w.apply(d + 1 - i)).collect() }
}

/// Every permutation of `1..=d`, in lexicographic order.
pub fn all_permutations(d: usize) -> Vec<Permutation> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (1..=d).collect();
    loop {
        out.push(Permutation { images: cur.clone() });
        let Some(i) = (0..d.saturating_sub(1)).rev().find(|&i| cur[i] < cur[i + 1]) else {
            break;
        };
        let j = (i + 1..d).rev().find(|&j| cur[j] > cur[i]).unwrap();
        cur.swap(i, j);
        cur[i + 1..].reverse();
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DoubleCoset {
    pub theta: Vec<usize>,
    pub theta_prime: Vec<usize>,
    pub rep: Permutation,
}

/// Minimal-length representative of `<Δ∖θ> w <Δ∖θ'>`, reached by stripping
/// left descents in `Δ∖θ` and right descents in `Δ∖θ'`.
pub fn double_coset_rep(w: &Permutation, theta: &[usize], theta_prime: &[usize]) -> Result<DoubleCoset> {
    let d = w.d();
    let theta = check_dims(d, theta)?;
    let theta_prime = check_dims(d, theta_prime)?;
    let left: Vec<usize> = (1..d).filter(|i| !theta.contains(i)).collect();
    let right: Vec<usize> = (1..d).filter(|i| !theta_prime.contains(i)).collect();
    let mut cur = w.clone();
    loop {
        if let Some(&i) = left.iter().find(|&&i| cur.has_left_descent(i)) {
            cur = cur.left_mul_simple(i);
            continue;
        }
        if let Some(&i) = right.iter().find(|&&i| cur.has_right_descent(i)) {
            cur = cur.right_mul_simple(i);
            continue;
        }
        break;
    }
    Ok(DoubleCoset { theta, theta_prime, rep: cur })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(v: &[usize]) -> Permutation {
        Permutation::new(v.to_vec()).unwrap()
    }

    #[test]
    fn longest() {
        assert_eq!(longest_element(2).unwrap(), p(&[2, 1]));
        assert_eq!(longest_element(4).unwrap(), p(&[4, 3, 2, 1]));
        assert_eq!(longest_element(4).unwrap().length(), 6);
        assert!(longest_element(1).is_err());
    }

    #[test]
    fn bruhat_examples() {
        let e = Permutation::identity(3);
        for w in all_permutations(3) {
            assert!(bruhat_leq(&e, &w).unwrap());
        }
        assert!(bruhat_leq(&p(&[2, 1, 3]), &p(&[2, 3, 1])).unwrap());
        assert!(!bruhat_leq(&p(&[2, 1, 3]), &p(&[1, 3, 2])).unwrap());
        assert!(bruhat_leq(&e, &Permutation::identity(4)).is_err());
    }

    #[test]
    fn composition_convention() {
        let s1 = Permutation::simple(3, 1).unwrap();
        let s2 = Permutation::simple(3, 2).unwrap();
        assert_eq!(s1.compose(&s2), p(&[2, 3, 1]));
        assert_eq!(opposition(&s1.compose(&s2)), s2.compose(&s1));
    }

    #[test]
    fn opposition_examples() {
        assert_eq!(opposition(&Permutation::identity(4)), Permutation::identity(4));
        assert_eq!(opposition(&Permutation::simple(4, 1).unwrap()), Permutation::simple(4, 3).unwrap());
    }

    #[test]
    fn double_coset_examples() {
        let w = p(&[3, 1, 4, 2]);
        assert_eq!(double_coset_rep(&w, &[1, 2, 3], &[1, 2, 3]).unwrap().rep, w);
        let w0 = longest_element(3).unwrap();
        assert_eq!(double_coset_rep(&w0, &[1, 2], &[1, 2]).unwrap().rep, w0);
        let s2 = Permutation::simple(4, 2).unwrap();
        let r = double_coset_rep(&s2, &[1, 3], &[1, 3]).unwrap().rep;
        assert_eq!(double_coset_rep(&r, &[1, 3], &[1, 3]).unwrap().rep, r);
    }

    #[test]
    fn reduced_words_multiply_back() {
        for w in all_permutations(4) {
            let word = w.reduced_word();
            assert_eq!(word.len(), w.length());
            let mut acc = Permutation::identity(4);
            for &i in &word {
                acc = acc.compose(&Permutation::simple(4, i).unwrap());
            }
            assert_eq!(acc, w);
        }
    }

    #[test]
    fn signed_lift_has_det_one() {
        for w in all_permutations(4) {
            assert!((w.signed_lift().determinant() - 1.0).abs() < 1e-12);
        }
    }
}
