//! Word-length balls of finitely generated Fuchsian groups and the two Poincaré series
//! evaluated over them.

use std::collections::HashMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mobius::{DiskPoint, MobiusTransform, PointPair};

/// Canonical-form distance below which two group elements are considered equal.
pub const DEDUP_THRESHOLD: f64 = 1e-9;
/// Distances in `(DEDUP_EXACT, DEDUP_THRESHOLD]` make deduplication ambiguous.
pub const DEDUP_EXACT: f64 = 1e-12;
/// Relation words must compose to the identity within this residual.
pub const RELATION_TOLERANCE: f64 = 1e-9;

/// Generators of a Fuchsian group, with optional relation words.
///
/// Relation letters are 1-based generator indices; a negative letter is the inverse.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSet {
    pub generators: Vec<MobiusTransform>,
    #[serde(default)]
    pub relations: Vec<Vec<i32>>,
}

impl GeneratorSet {
    pub fn new(generators: Vec<MobiusTransform>, relations: Vec<Vec<i32>>) -> Result<Self> {
        let set = Self {
            generators,
            relations,
        };
        set.check_letters()?;
        Ok(set)
    }

    /// Parses the generator JSON document and validates its relations.
    pub fn from_json(text: &str) -> Result<Self> {
        let set: Self = serde_json::from_str(text).map_err(|e| {
            Error::Config(format!(
                "generator config, line {} column {}: {e}",
                e.line(),
                e.column()
            ))
        })?;
        set.check_letters()?;
        set.validate()?;
        Ok(set)
    }

    /// Generators of the regular-octagon genus-2 surface group.
    ///
    /// `g_k` has `alpha = 1 + √2` and `beta = √(2 + 2√2) e^{ikπ/4}` for `k = 0..4`; the
    /// single relation is `g0 g1⁻¹ g2 g3⁻¹ g0⁻¹ g1 g2⁻¹ g3 = 1`.
    pub fn regular_octagon() -> Self {
        let alpha = Complex64::new(1.0 + 2f64.sqrt(), 0.0);
        let modulus = (2.0 + 2.0 * 2f64.sqrt()).sqrt();
        let generators = (0..4)
            .map(|k| {
                let beta = Complex64::from_polar(modulus, k as f64 * PI / 4.0);
                MobiusTransform::new(alpha, beta).expect("octagon generator is in SU(1,1)")
            })
            .collect();
        Self {
            generators,
            relations: vec![vec![1, -2, 3, -4, -1, 2, -3, 4]],
        }
    }

    fn check_letters(&self) -> Result<()> {
        if self.generators.is_empty() {
            return Err(Error::Config("generator list is empty".into()));
        }
        let k = self.generators.len() as i32;
        for (i, rel) in self.relations.iter().enumerate() {
            if let Some(bad) = rel.iter().find(|&&l| l == 0 || l.abs() > k) {
                return Err(Error::Config(format!(
                    "relation {} uses letter {bad}, valid letters are ±1..±{k}",
                    i + 1
                )));
            }
        }
        Ok(())
    }

    pub fn letter(&self, letter: i32) -> MobiusTransform {
        let g = self.generators[letter.unsigned_abs() as usize - 1];
        if letter > 0 {
            g
        } else {
            g.inverse()
        }
    }

    /// Left-to-right product of the letters of `word`.
    pub fn word(&self, word: &[i32]) -> MobiusTransform {
        word.iter().fold(MobiusTransform::identity(), |acc, &l| {
            acc.compose(&self.letter(l))
        })
    }

    /// Residual of each relation word against the identity.
    pub fn relation_residuals(&self) -> Vec<f64> {
        self.relations
            .iter()
            .map(|r| self.word(r).distance(&MobiusTransform::identity()))
            .collect()
    }

    /// Fails on the first relation whose residual exceeds [`RELATION_TOLERANCE`].
    pub fn validate(&self) -> Result<()> {
        for (i, residual) in self.relation_residuals().into_iter().enumerate() {
            if !(residual <= RELATION_TOLERANCE) {
                return Err(Error::RelationViolation {
                    index: i + 1,
                    residual,
                });
            }
        }
        Ok(())
    }

    /// The conjugate group `{σ g σ⁻¹}` with the same relations.
    pub fn conjugated(&self, sigma: &MobiusTransform) -> Self {
        Self {
            generators: self
                .generators
                .iter()
                .map(|g| g.conjugate_by(sigma))
                .collect(),
            relations: self.relations.clone(),
        }
    }

    /// Letters in enumeration order: `1, -1, 2, -2, ...`.
    fn letters(&self) -> Vec<i32> {
        (1..=self.generators.len() as i32)
            .flat_map(|i| [i, -i])
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BallElement {
    pub transform: MobiusTransform,
    /// Shortest word found (first in enumeration order).
    pub word: Vec<i32>,
}

/// Group elements of word length at most `max_word_length`, grouped by shell.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupBall {
    shells: Vec<Vec<BallElement>>,
}

impl GroupBall {
    /// The trivial ball `{identity}`.
    pub fn trivial() -> Self {
        Self {
            shells: vec![vec![BallElement {
                transform: MobiusTransform::identity(),
                word: Vec::new(),
            }]],
        }
    }

    pub fn max_word_length(&self) -> usize {
        self.shells.len() - 1
    }

    pub fn shells(&self) -> &[Vec<BallElement>] {
        &self.shells
    }

    pub fn shell_sizes(&self) -> Vec<usize> {
        self.shells.iter().map(Vec::len).collect()
    }

    pub fn len(&self) -> usize {
        self.shells.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn elements(&self) -> impl Iterator<Item = &BallElement> {
        self.shells.iter().flatten()
    }

    pub fn transforms(&self) -> impl Iterator<Item = MobiusTransform> + '_ {
        self.elements().map(|e| e.transform)
    }

    /// Words of non-identity elements that fail the hyperbolicity test `|tr| > 2`.
    ///
    /// Empty for a torsion-free cocompact group; reported rather than enforced.
    pub fn non_hyperbolic(&self) -> Vec<Vec<i32>> {
        self.shells
            .iter()
            .skip(1)
            .flatten()
            .filter(|e| e.transform.abs_trace() <= 2.0 + 1e-12)
            .map(|e| e.word.clone())
            .collect()
    }
}

/// Breadth-first enumeration of the ball of word length `<= max_len`.
///
/// Shell `l` holds the products `letter ∘ h` (h in shell `l-1`) not already present,
/// in lexicographic word order. Two words whose canonical forms are closer than
/// [`DEDUP_THRESHOLD`] but farther than [`DEDUP_EXACT`] abort the enumeration.
pub fn enumerate(gens: &GeneratorSet, max_len: usize) -> Result<GroupBall> {
    const CELL: f64 = 1e-6;
    let key = |g: &MobiusTransform| (g.beta().norm() / CELL).round() as i64;

    let mut ball = GroupBall::trivial();
    let mut index: HashMap<i64, Vec<(usize, usize)>> = HashMap::new();
    index
        .entry(key(&MobiusTransform::identity()))
        .or_default()
        .push((0, 0));
    let letters: Vec<(i32, MobiusTransform)> = gens
        .letters()
        .into_iter()
        .map(|l| (l, gens.letter(l)))
        .collect();

    for len in 1..=max_len {
        let mut shell: Vec<BallElement> = Vec::new();
        for &(letter, g) in &letters {
            for prev in &ball.shells[len - 1] {
                if prev.word.first() == Some(&-letter) {
                    continue;
                }
                let candidate = g.compose(&prev.transform);
                let k = key(&candidate);
                let mut nearest = f64::INFINITY;
                for cell in k - 1..=k + 1 {
                    for &(s, i) in index.get(&cell).into_iter().flatten() {
                        let other = if s == len {
                            &shell[i]
                        } else {
                            &ball.shells[s][i]
                        };
                        nearest = nearest.min(candidate.distance(&other.transform));
                    }
                }
                if nearest <= DEDUP_EXACT {
                    continue;
                }
                if nearest <= DEDUP_THRESHOLD {
                    return Err(Error::DiscretenessSuspect {
                        word_length: len,
                        distance: nearest,
                    });
                }
                let mut word = Vec::with_capacity(len);
                word.push(letter);
                word.extend_from_slice(&prev.word);
                index.entry(k).or_default().push((len, shell.len()));
                shell.push(BallElement {
                    transform: candidate,
                    word,
                });
            }
        }
        ball.shells.push(shell);
    }
    Ok(ball)
}

/// A truncated series value with its truncation indicator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeriesSum {
    pub value: Complex64,
    /// Sum of term magnitudes over the outermost shell.
    pub tail: f64,
    /// False for orders where the full series does not converge (`N < 2`).
    pub convergent: bool,
}

fn shell_sums<F>(ball: &GroupBall, term: F) -> (Complex64, Vec<f64>)
where
    F: Fn(&MobiusTransform) -> Complex64,
{
    let mut total = Complex64::new(0.0, 0.0);
    let mags = ball
        .shells
        .iter()
        .map(|shell| {
            shell.iter().fold(0.0, |acc, e| {
                let t = term(&e.transform);
                total += t;
                acc + t.norm()
            })
        })
        .collect();
    (total, mags)
}

fn finish(value: Complex64, mags: &[f64], order: usize) -> SeriesSum {
    SeriesSum {
        value,
        tail: *mags.last().unwrap_or(&0.0),
        convergent: order >= 2,
    }
}

/// `Σ_γ γ'(τ)^N`, the density of the Poincaré series `Σ_γ γ*(dτ)^N`.
pub fn poincare_density(ball: &GroupBall, order: usize, tau: DiskPoint) -> SeriesSum {
    let (value, mags) = density_shells(ball, order, tau.value());
    finish(value, &mags, order)
}

/// Per-shell magnitude sums `Σ_{γ in shell} |γ'(τ)|^N`.
pub fn density_shell_magnitudes(ball: &GroupBall, order: usize, tau: DiskPoint) -> Vec<f64> {
    density_shells(ball, order, tau.value()).1
}

pub(crate) fn density_shells(
    ball: &GroupBall,
    order: usize,
    tau: Complex64,
) -> (Complex64, Vec<f64>) {
    shell_sums(ball, |g| g.derivative(tau).powu(order as u32))
}

/// `Σ_γ (γ(z) - γ(w))^N`.
pub fn pair_series(ball: &GroupBall, order: usize, p: &PointPair) -> SeriesSum {
    let (z, w) = (p.z.value(), p.w.value());
    let (value, mags) = shell_sums(ball, |g| {
        (g.apply_complex(z) - g.apply_complex(w)).powu(order as u32)
    });
    finish(value, &mags, order)
}
