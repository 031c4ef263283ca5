//! Order-restricted least squares: isotonic and antitonic regression by pool
//! adjacent violators, the single-peak fit built from them, and the
//! circular polysemy index.
//!
//! The single-peak fit evaluates, for every split point `i`, the isotonic
//! residual of `x[..=i]` plus the antitonic residual of `x[i..]`; the split
//! point belongs to both halves. Both residual sequences come from one
//! left-to-right PAVA pass each (the antitonic one over the reversed input),
//! so a full scan costs `O(n · blocks)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profile::DEFAULT_BINS;

/// Candidates whose residual lies within this fraction of the input's
/// centered sum of squares of the minimum are treated as tied.
pub const TIE_RELATIVE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    /// Non-decreasing.
    Isotonic,
    /// Non-increasing.
    Antitonic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotoneFit {
    pub direction: Direction,
    pub fitted: Vec<f64>,
    pub sse: f64,
}

#[derive(Debug, Clone, Copy)]
struct Block {
    count: usize,
    mean: f64,
    /// Sum of squared deviations from `mean` inside the block.
    m2: f64,
}

impl Block {
    fn single(x: f64) -> Self {
        Block {
            count: 1,
            mean: x,
            m2: 0.0,
        }
    }

    fn merge(self, other: Block) -> Block {
        let count = self.count + other.count;
        let (na, nb) = (self.count as f64, other.count as f64);
        let delta = other.mean - self.mean;
        Block {
            count,
            mean: self.mean + delta * nb / count as f64,
            m2: self.m2 + other.m2 + delta * delta * na * nb / count as f64,
        }
    }
}

/// Incremental PAVA over a non-decreasing constraint.
#[derive(Debug, Default)]
struct Pava {
    blocks: Vec<Block>,
}

impl Pava {
    fn push(&mut self, x: f64) {
        let mut cur = Block::single(x);
        while let Some(&prev) = self.blocks.last() {
            if prev.mean > cur.mean {
                self.blocks.pop();
                cur = prev.merge(cur);
            } else {
                break;
            }
        }
        self.blocks.push(cur);
    }

    fn sse(&self) -> f64 {
        self.blocks.iter().map(|b| b.m2).sum()
    }

    fn fitted(&self) -> Vec<f64> {
        self.blocks
            .iter()
            .flat_map(|b| std::iter::repeat_n(b.mean, b.count))
            .collect()
    }
}

fn check_sequence(x: &[f64]) -> Result<()> {
    if x.is_empty() {
        return Err(Error::Parameter("empty sequence".into()));
    }
    if let Some(i) = x.iter().position(|v| !v.is_finite()) {
        return Err(Error::Parameter(format!("non-finite value at {i}")));
    }
    Ok(())
}

fn residual(fitted: &[f64], x: &[f64]) -> f64 {
    fitted.iter().zip(x).map(|(f, v)| (f - v) * (f - v)).sum()
}

/// Least-squares non-decreasing fit.
pub fn isotonic(x: &[f64]) -> Result<MonotoneFit> {
    check_sequence(x)?;
    let mut pava = Pava::default();
    for &v in x {
        pava.push(v);
    }
    let fitted = pava.fitted();
    let sse = residual(&fitted, x);
    Ok(MonotoneFit {
        direction: Direction::Isotonic,
        fitted,
        sse,
    })
}

/// Least-squares non-increasing fit.
pub fn antitonic(x: &[f64]) -> Result<MonotoneFit> {
    check_sequence(x)?;
    let mut pava = Pava::default();
    for &v in x.iter().rev() {
        pava.push(v);
    }
    let mut fitted = pava.fitted();
    fitted.reverse();
    let sse = residual(&fitted, x);
    Ok(MonotoneFit {
        direction: Direction::Antitonic,
        fitted,
        sse,
    })
}

/// `out[i]` is the isotonic residual of `x[..=i]`.
pub fn isotonic_prefix_sse(x: &[f64]) -> Vec<f64> {
    let mut pava = Pava::default();
    x.iter()
        .map(|&v| {
            pava.push(v);
            pava.sse()
        })
        .collect()
}

/// `out[i]` is the antitonic residual of `x[i..]`.
pub fn antitonic_suffix_sse(x: &[f64]) -> Vec<f64> {
    let mut pava = Pava::default();
    let mut out: Vec<f64> = x
        .iter()
        .rev()
        .map(|&v| {
            pava.push(v);
            pava.sse()
        })
        .collect();
    out.reverse();
    out
}

fn centered_sum_of_squares(x: &[f64]) -> f64 {
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    x.iter().map(|v| (v - mean) * (v - mean)).sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnimodalFit {
    /// 1-based position of the peak.
    pub peak: usize,
    pub combined_sse: f64,
    /// Combined residual for every candidate peak, 0-based.
    pub per_peak_sse: Vec<f64>,
    /// Bin at which a circular profile was cut; 0 for linear input.
    pub rotation: usize,
}

fn fit_with_tolerance(x: &[f64], tol: f64) -> UnimodalFit {
    let iso = isotonic_prefix_sse(x);
    let anti = antitonic_suffix_sse(x);
    let combined: Vec<f64> = iso.iter().zip(&anti).map(|(a, b)| a + b).collect();
    let min = combined.iter().copied().fold(f64::INFINITY, f64::min);
    let peak = combined
        .iter()
        .position(|&c| c <= min + tol)
        .expect("non-empty");
    UnimodalFit {
        peak: peak + 1,
        combined_sse: min,
        per_peak_sse: combined,
        rotation: 0,
    }
}

/// Best single-peaked fit of a linear sequence.
pub fn unimodal_fit(x: &[f64]) -> Result<UnimodalFit> {
    check_sequence(x)?;
    Ok(fit_with_tolerance(
        x,
        TIE_RELATIVE * centered_sum_of_squares(x),
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircularFit {
    /// Minimum single-peak residual over all cut points.
    pub index: f64,
    /// Peak in the input's own bin numbering.
    pub peak_bin: usize,
    /// First bin of the winning linearization.
    pub rotation: usize,
    /// Minimum combined residual of each rotation.
    pub per_rotation: Vec<f64>,
    /// Fit of the winning linearization.
    pub fit: UnimodalFit,
}

/// Polysemy index of a 90-bin circular profile.
pub fn circular_polysemy_index(profile: &[f64]) -> Result<CircularFit> {
    if profile.len() != DEFAULT_BINS {
        return Err(Error::Parameter(format!(
            "expected {DEFAULT_BINS} bins, got {}",
            profile.len()
        )));
    }
    circular_polysemy_index_any(profile)
}

/// Polysemy index of a circular profile of any length. Every cyclic
/// rotation is fitted; the smallest residual is the index.
pub fn circular_polysemy_index_any(profile: &[f64]) -> Result<CircularFit> {
    check_sequence(profile)?;
    if let Some(i) = profile.iter().position(|&v| v < 0.0) {
        return Err(Error::Parameter(format!("negative bin value at {i}")));
    }
    let n = profile.len();
    let tol = TIE_RELATIVE * centered_sum_of_squares(profile);
    let mut linear = Vec::with_capacity(n);
    let fits: Vec<UnimodalFit> = (0..n)
        .map(|r| {
            linear.clear();
            linear.extend_from_slice(&profile[r..]);
            linear.extend_from_slice(&profile[..r]);
            let mut fit = fit_with_tolerance(&linear, tol);
            fit.rotation = r;
            fit
        })
        .collect();
    let per_rotation: Vec<f64> = fits.iter().map(|f| f.combined_sse).collect();
    let index = per_rotation.iter().copied().fold(f64::INFINITY, f64::min);
    let best = per_rotation
        .iter()
        .position(|&v| v <= index + tol)
        .expect("non-empty");
    let fit = fits.into_iter().nth(best).expect("in range");
    Ok(CircularFit {
        index,
        peak_bin: (best + fit.peak - 1) % n,
        rotation: best,
        per_rotation,
        fit,
    })
}

/// Whether `x` is non-decreasing then non-increasing.
pub fn is_single_peaked(x: &[f64]) -> bool {
    let mut descending = false;
    x.windows(2).all(|w| {
        if w[1] < w[0] {
            descending = true;
            true
        } else {
            !descending || w[1] == w[0]
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn approx(a: &[f64], b: &[f64]) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-12)
    }

    #[test]
    fn isotonic_cases() {
        let f = isotonic(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(f.fitted, [1.0, 2.0, 3.0]);
        assert_eq!(f.sse, 0.0);

        let f = isotonic(&[1.0, 3.0, 2.0]).unwrap();
        assert!(approx(&f.fitted, &[1.0, 2.5, 2.5]));
        assert!((f.sse - 0.5).abs() < 1e-12);
    }

    #[test]
    fn antitonic_cases() {
        let f = antitonic(&[3.0, 2.0, 1.0]).unwrap();
        assert_eq!(f.fitted, [3.0, 2.0, 1.0]);
        assert_eq!(f.sse, 0.0);

        let f = antitonic(&[1.0, 0.0, 1.0]).unwrap();
        assert!(approx(&f.fitted, &[1.0, 0.5, 0.5]));
        assert!((f.sse - 0.5).abs() < 1e-12);
    }

    #[test]
    fn empty_and_non_finite_rejected() {
        assert!(matches!(isotonic(&[]), Err(Error::Parameter(_))));
        assert!(matches!(antitonic(&[]), Err(Error::Parameter(_))));
        assert!(matches!(unimodal_fit(&[]), Err(Error::Parameter(_))));
        assert!(matches!(
            isotonic(&[1.0, f64::NAN]),
            Err(Error::Parameter(_))
        ));
    }

    #[test]
    fn unimodal_cases() {
        let f = unimodal_fit(&[0.0, 2.0, 0.0]).unwrap();
        assert_eq!(f.peak, 2);
        assert_eq!(f.combined_sse, 0.0);

        // combined = [0.5, 1.0, 0.5]; the tie goes to the smaller index.
        let f = unimodal_fit(&[1.0, 0.0, 1.0]).unwrap();
        assert_eq!(f.peak, 1);
        assert!((f.combined_sse - 0.5).abs() < 1e-12);
        assert!(approx(&f.per_peak_sse, &[0.5, 1.0, 0.5]));

        let f = unimodal_fit(&[4.0]).unwrap();
        assert_eq!((f.peak, f.combined_sse), (1, 0.0));

        let f = unimodal_fit(&[2.0; 5]).unwrap();
        assert_eq!((f.peak, f.combined_sse), (1, 0.0));
    }

    #[test]
    fn circular_wrong_length() {
        assert!(matches!(
            circular_polysemy_index(&[1.0; 89]),
            Err(Error::Parameter(_))
        ));
        let mut p = vec![1.0; 90];
        p[3] = -0.5;
        assert!(matches!(
            circular_polysemy_index(&p),
            Err(Error::Parameter(_))
        ));
    }

    fn bump(center: usize, width: usize, height: f64) -> Vec<f64> {
        let mut p = vec![0.0; 90];
        for o in 0..=2 * width {
            let i = (center + 90 + o - width) % 90;
            let dist = (o as f64 - width as f64).abs();
            p[i] += height * (1.0 - dist / (width as f64 + 1.0));
        }
        p
    }

    #[test]
    fn linear_bump_scores_zero() {
        let p = bump(40, 6, 3.0);
        let fit = circular_polysemy_index(&p).unwrap();
        assert_eq!(fit.index, 0.0);
        assert_eq!(fit.peak_bin, 40);
    }

    #[test]
    fn wrapped_bump_scores_zero() {
        // Straddles bins 88..=1.
        let p = bump(89, 1, 5.0);
        assert!(p[88] > 0.0 && p[89] > 0.0 && p[0] > 0.0);
        assert!(unimodal_fit(&p).unwrap().combined_sse > 0.0);
        let fit = circular_polysemy_index(&p).unwrap();
        assert_eq!(fit.index, 0.0);
        assert_eq!(fit.peak_bin, 89);
    }

    #[test]
    fn two_bumps_score_above_zero() {
        let mut p = vec![0.0; 90];
        p[10] = 2.0;
        p[55] = 2.0;
        let fit = circular_polysemy_index(&p).unwrap();
        // Best cut leaves one spike as the peak; the other spike sits between
        // two zero runs and pools with one of them: a 2 pooled with k zeros
        // costs 4·k/(k+1), smallest for the shortest zero run (44 zeros).
        assert!(
            (fit.index - 4.0 * 44.0 / 45.0).abs() < 1e-9,
            "{}",
            fit.index
        );
    }

    #[test]
    fn single_peak_detection() {
        assert!(is_single_peaked(&[0.0, 1.0, 1.0, 3.0, 2.0, 2.0, 0.0]));
        assert!(is_single_peaked(&[3.0, 2.0]));
        assert!(!is_single_peaked(&[1.0, 0.0, 1.0]));
    }

    proptest! {
        #[test]
        fn antitonic_is_reversed_isotonic(x in prop::collection::vec(-10.0f64..10.0, 1..40)) {
            let anti = antitonic(&x).unwrap();
            let rev: Vec<f64> = x.iter().rev().copied().collect();
            let mut iso = isotonic(&rev).unwrap().fitted;
            iso.reverse();
            prop_assert_eq!(&anti.fitted, &iso);
            prop_assert!(anti.fitted.windows(2).all(|w| w[0] >= w[1]));
        }

        #[test]
        fn isotonic_fit_is_monotone(x in prop::collection::vec(-10.0f64..10.0, 1..60)) {
            let f = isotonic(&x).unwrap();
            prop_assert!(f.fitted.windows(2).all(|w| w[0] <= w[1]));
            let monotone = x.windows(2).all(|w| w[0] <= w[1]);
            prop_assert_eq!(f.sse == 0.0, monotone);
            let prefix = isotonic_prefix_sse(&x);
            prop_assert!((prefix[x.len() - 1] - f.sse).abs() < 1e-9);
        }

        #[test]
        fn residual_zero_iff_single_peaked(x in prop::collection::vec(0u8..4, 1..12)) {
            let x: Vec<f64> = x.into_iter().map(f64::from).collect();
            let f = unimodal_fit(&x).unwrap();
            prop_assert_eq!(f.combined_sse == 0.0, is_single_peaked(&x));
        }

        #[test]
        fn circular_zero_iff_some_rotation_single_peaked(x in prop::collection::vec(0u8..3, 3..12)) {
            let x: Vec<f64> = x.into_iter().map(f64::from).collect();
            let fit = circular_polysemy_index_any(&x).unwrap();
            let n = x.len();
            let any = (0..n).any(|r| {
                let lin: Vec<f64> = (0..n).map(|j| x[(r + j) % n]).collect();
                is_single_peaked(&lin)
            });
            prop_assert_eq!(fit.index == 0.0, any);
        }

        #[test]
        fn second_bump_never_lowers_index(
            c1 in 0usize..90, w1 in 1usize..8, h1 in 0.5f64..5.0,
            c2 in 0usize..90, w2 in 1usize..8, h2 in 0.5f64..5.0,
        ) {
            let one = bump(c1, w1, h1);
            let two: Vec<f64> = one.iter().zip(bump(c2, w2, h2)).map(|(a, b)| a + b).collect();
            let a = circular_polysemy_index(&one).unwrap().index;
            let b = circular_polysemy_index(&two).unwrap().index;
            prop_assert!(b >= a - 1e-12);
        }
    }
}
