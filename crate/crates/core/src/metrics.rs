//! Rank and distance functions on representation vectors.

use crate::error::{Error, Result};

/// Values closer than this fraction of the vector's largest magnitude share a rank.
///
/// Coordinates that are equal in exact arithmetic (mirror-symmetric pairs,
/// clamped entries) come out of floating point a few ulps apart; without a
/// tolerance their order would be decided by rounding noise.
pub const RANK_TIE_RTOL: f64 = 1e-9;

/// Fractional ranks, ascending, ties averaged.
#[derive(Debug, Clone, PartialEq)]
pub struct RankVector {
    ranks: Vec<f64>,
}

impl RankVector {
    pub fn ranks(&self) -> &[f64] {
        &self.ranks
    }

    pub fn len(&self) -> usize {
        self.ranks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranks.is_empty()
    }

    /// True when every entry is tied.
    pub fn is_constant(&self) -> bool {
        self.ranks.windows(2).all(|w| w[0] == w[1])
    }
}

pub fn rank_vector(x: &[f64]) -> Result<RankVector> {
    if x.len() < 2 {
        return Err(Error::TooShort {
            len: x.len(),
            min: 2,
        });
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidGeometry(
            "non-finite value in rank input".into(),
        ));
    }
    let scale = x.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let tol = RANK_TIE_RTOL * scale;
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]).then(a.cmp(&b)));
    let mut ranks = vec![0.0; x.len()];
    let mut start = 0;
    while start < order.len() {
        let base = x[order[start]];
        let mut end = start + 1;
        while end < order.len() && x[order[end]] - base <= tol {
            end += 1;
        }
        // Positions start..end are 0-based; ranks are 1-based.
        let mean = (start + end + 1) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = mean;
        }
        start = end;
    }
    Ok(RankVector { ranks })
}

fn check_lengths(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    Ok(())
}

pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    check_lengths(x, y)?;
    if x.len() < 2 {
        return Err(Error::TooShort {
            len: x.len(),
            min: 2,
        });
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::UndefinedCorrelation);
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// `1 − ρ(R(x), R(y))`, in `[0, 2]`.
pub fn spearman_distance(x: &[f64], y: &[f64]) -> Result<f64> {
    check_lengths(x, y)?;
    let rx = rank_vector(x)?;
    let ry = rank_vector(y)?;
    if rx.is_constant() || ry.is_constant() {
        return Err(Error::UndefinedDistance(
            "all entries tied, ranks are constant".into(),
        ));
    }
    if rx == ry {
        return Ok(0.0);
    }
    let rho = pearson(rx.ranks(), ry.ranks())?;
    Ok((1.0 - rho).clamp(0.0, 2.0))
}

pub fn euclidean_distance(x: &[f64], y: &[f64]) -> Result<f64> {
    check_lengths(x, y)?;
    Ok(x.iter()
        .zip(y)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt())
}
