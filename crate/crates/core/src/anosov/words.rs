use rayon::prelude::*;

use crate::anosov::{RepSpec, Tracked};
use crate::{Error, Result};

/// Default cap on the number of products in a word ball.
pub const DEFAULT_BUDGET: u64 = 1_000_000;

/// Number of non-trivial reduced words of length at most `radius` over
/// `letters` letters (generators and inverses).
pub fn ball_size(letters: usize, radius: usize) -> u64 {
    let (l, mut sphere, mut total) = (letters as u64, letters as u64, 0u64);
    for n in 1..=radius {
        if n > 1 {
            sphere = sphere.saturating_mul(l.saturating_sub(1));
        }
        total = total.saturating_add(sphere);
        if l <= 1 {
            break;
        }
    }
    total
}

#[derive(Debug, Clone)]
pub struct BallEntry {
    /// Letters; `2i` is generator `i` and `2i + 1` its inverse.
    pub word: Vec<u16>,
    pub element: Tracked,
}

/// All reduced words of length `1..=radius` with their images, by length and
/// then in letter order.
#[derive(Debug, Clone)]
pub struct WordBall {
    pub radius: usize,
    pub entries: Vec<BallEntry>,
    starts: Vec<usize>,
}

impl WordBall {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Words of length exactly `n`.
    pub fn sphere(&self, n: usize) -> &[BallEntry] {
        if n == 0 || n > self.radius {
            return &[];
        }
        &self.entries[self.starts[n - 1]..self.starts[n]]
    }
}

/// Enumerate the word ball, refusing when it would exceed `budget` products.
pub fn word_ball(rep: &RepSpec, radius: usize, budget: u64) -> Result<WordBall> {
    let letters = rep.letters();
    let requested = ball_size(letters, radius);
    if requested > budget {
        return Err(Error::Budget { requested, cap: budget });
    }
    let images: Vec<Tracked> = (0..letters).map(|l| Tracked::from_matrices(rep.letter(l))).collect();
    let mut entries: Vec<BallEntry> = Vec::with_capacity(requested as usize);
    let mut starts = vec![0];
    if radius >= 1 {
        for (l, img) in images.iter().enumerate() {
            entries.push(BallEntry { word: vec![l as u16], element: img.clone() });
        }
        starts.push(entries.len());
    }
    let images = &images;
    for _ in 2..=radius {
        let prev = &entries[starts[starts.len() - 2]..];
        let next: Vec<BallEntry> = prev
            .par_iter()
            .flat_map_iter(|e| {
                let last = *e.word.last().expect("non-empty word") as usize;
                (0..letters).filter(move |&l| l != last ^ 1).map(move |l| {
                    let mut word = e.word.clone();
                    word.push(l as u16);
                    BallEntry { word, element: e.element.mul(&images[l]) }
                })
            })
            .collect();
        entries.extend(next);
        starts.push(entries.len());
    }
    Ok(WordBall { radius, entries, starts })
}
