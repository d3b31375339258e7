//! DC4 intra-prediction residuals and empirical covariance estimation.
//!
//! Decoded pixels are proxied by original pixels throughout: the pipeline
//! evaluates transform-domain energy compaction, not a closed quantization
//! loop, so no codec state is simulated.

use crate::error::{Error, Result};
use crate::pgm::GrayImage;
use crate::spectral::SymMatrix;

/// Sub-block edge length in pixels.
pub const BLOCK: u32 = 4;
/// Flattened sub-block length.
pub const BLOCK_LEN: usize = 16;
/// Target (covariance-sharing) block edge length in pixels.
pub const TARGET: u32 = 16;

/// Local-mean handling for extracted residuals.
///
/// The mean is taken from the 4x4 sub-block directly above, which is
/// decoder-reproducible. `ResidualDomain` subtracts the mean of that block's
/// own DC4 residual; `PixelDomain` subtracts its mean pixel intensity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MeanRemoval {
    Off,
    #[default]
    ResidualDomain,
    PixelDomain,
}

/// A 4x4 intra-prediction residual flattened to raster order.
#[derive(Debug, Clone)]
pub struct ResidualBlock {
    pub values: [f64; BLOCK_LEN],
    /// Pixel coordinates of the sub-block's top-left corner.
    pub origin: (u32, u32),
}

/// Empirical second-moment estimate `C̄ = (1/M) Σ yₘ yₘᵀ`.
#[derive(Debug, Clone)]
pub struct CovarianceEstimate {
    pub matrix: SymMatrix,
    /// Number of observations used.
    pub m: usize,
    /// Set when no causal neighbor existed and an identity placeholder was
    /// returned; callers should fall back to a fixed transform.
    pub fallback: bool,
}

/// Rectangular region in pixels, 4-aligned on every edge.
#[derive(Debug, Clone, Copy)]
pub struct Region {
    x: u32,
    y: u32,
    width: u32,
    height: u32,
}

impl Region {
    pub fn new(x: u32, y: u32, width: u32, height: u32) -> Result<Self> {
        if x % BLOCK != 0 || y % BLOCK != 0 || width % BLOCK != 0 || height % BLOCK != 0 {
            return Err(Error::InvalidArgument(
                "region coordinates and size must be multiples of 4".into(),
            ));
        }
        Ok(Self { x, y, width, height })
    }

    fn within(&self, img: &GrayImage) -> bool {
        self.x.checked_add(self.width).is_some_and(|r| r <= img.width())
            && self.y.checked_add(self.height).is_some_and(|b| b <= img.height())
    }
}

fn block_sum_above(img: &GrayImage, x: u32, y: u32) -> u32 {
    (0..BLOCK).map(|dx| u32::from(img.get(x + dx, y - 1))).sum()
}

fn block_sum_left(img: &GrayImage, x: u32, y: u32) -> u32 {
    (0..BLOCK).map(|dy| u32::from(img.get(x - 1, y + dy))).sum()
}

/// DC4 prediction for the 4x4 sub-block at `origin`.
///
/// With both reference borders present the predictor is the rounded average
/// `(Σ above + Σ left + 4) >> 3`; with one border it is
/// `round((Σ refs + 2) / 4)`; with neither it is 128. Depends only on
/// reference pixels, never on the block's own contents.
pub fn dc4_predict(img: &GrayImage, origin: (u32, u32)) -> Result<u8> {
    let (x, y) = origin;
    if x % BLOCK != 0 || y % BLOCK != 0 {
        return Err(Error::InvalidArgument(format!(
            "sub-block origin ({x}, {y}) is not 4-aligned"
        )));
    }
    if x + BLOCK > img.width() || y + BLOCK > img.height() {
        return Err(Error::InvalidArgument(format!(
            "sub-block at ({x}, {y}) exceeds the {}x{} image",
            img.width(),
            img.height()
        )));
    }
    let has_above = y > 0;
    let has_left = x > 0;
    let p = match (has_above, has_left) {
        (true, true) => (block_sum_above(img, x, y) + block_sum_left(img, x, y) + 4) >> 3,
        (true, false) => (block_sum_above(img, x, y) + 4) >> 2,
        (false, true) => (block_sum_left(img, x, y) + 4) >> 2,
        (false, false) => 128,
    };
    Ok(p.min(255) as u8)
}

fn raw_residual(img: &GrayImage, x: u32, y: u32) -> Result<[f64; BLOCK_LEN]> {
    let p = f64::from(dc4_predict(img, (x, y))?);
    let mut values = [0.0; BLOCK_LEN];
    for dy in 0..BLOCK {
        for dx in 0..BLOCK {
            values[(dy * BLOCK + dx) as usize] = f64::from(img.get(x + dx, y + dy)) - p;
        }
    }
    Ok(values)
}

/// Extracts the DC4 residual of every 4x4 sub-block in `region`, raster
/// order.
///
/// With mean removal on, the mean of the sub-block directly above (residual-
/// or pixel-domain per the mode) is subtracted; sub-blocks whose above
/// neighbor lies outside the image skip the removal.
pub fn extract_residuals(
    img: &GrayImage,
    region: Region,
    mean: MeanRemoval,
) -> Result<Vec<ResidualBlock>> {
    if !region.within(img) {
        return Err(Error::InvalidArgument("region exceeds image bounds".into()));
    }
    let mut blocks = Vec::with_capacity((region.width / BLOCK) as usize * (region.height / BLOCK) as usize);
    for by in 0..region.height / BLOCK {
        for bx in 0..region.width / BLOCK {
            let x = region.x + bx * BLOCK;
            let y = region.y + by * BLOCK;
            let mut values = raw_residual(img, x, y)?;
            if mean != MeanRemoval::Off && y >= BLOCK {
                let adjustment = match mean {
                    MeanRemoval::ResidualDomain => {
                        let above = raw_residual(img, x, y - BLOCK)?;
                        above.iter().sum::<f64>() / BLOCK_LEN as f64
                    }
                    MeanRemoval::PixelDomain => {
                        let mut sum = 0u32;
                        for dy in 0..BLOCK {
                            for dx in 0..BLOCK {
                                sum += u32::from(img.get(x + dx, y - BLOCK + dy));
                            }
                        }
                        f64::from(sum) / BLOCK_LEN as f64
                    }
                    MeanRemoval::Off => unreachable!(),
                };
                for v in &mut values {
                    *v -= adjustment;
                }
            }
            blocks.push(ResidualBlock { values, origin: (x, y) });
        }
    }
    Ok(blocks)
}

/// `C̄ = (1/M) Σ yₘ yₘᵀ` over the first `min(m_limit, available)` residuals.
/// No mean subtraction: this is the raw second moment.
pub fn estimate_covariance(
    residuals: &[ResidualBlock],
    m_limit: Option<usize>,
) -> Result<CovarianceEstimate> {
    if residuals.is_empty() {
        return Err(Error::Empty("no residual observations"));
    }
    if m_limit == Some(0) {
        return Err(Error::InvalidArgument("sample limit must be >= 1".into()));
    }
    let m = m_limit.map_or(residuals.len(), |l| l.min(residuals.len()));
    let mut acc = SymMatrix::zeros(BLOCK_LEN);
    for block in &residuals[..m] {
        acc.add_scaled_outer(1.0, &block.values);
    }
    acc.scale_mut(1.0 / m as f64);
    Ok(CovarianceEstimate { matrix: acc, m, fallback: false })
}

/// Covariance for a 16x16 target block from its causal neighbors.
///
/// Residuals are gathered from the left, above and above-left 16x16 blocks
/// that lie inside the image (in that order, raster order within each),
/// then passed to [`estimate_covariance`] with limit `m`. With no causal
/// neighbor at all, a flagged identity placeholder is returned so the caller
/// can fall back to a fixed transform.
pub fn neighbor_covariance(
    img: &GrayImage,
    target_origin: (u32, u32),
    m: Option<usize>,
    mean: MeanRemoval,
) -> Result<CovarianceEstimate> {
    let (x, y) = target_origin;
    if x % TARGET != 0 || y % TARGET != 0 {
        return Err(Error::InvalidArgument(format!(
            "target origin ({x}, {y}) is not 16-aligned"
        )));
    }
    if x + TARGET > img.width() || y + TARGET > img.height() {
        return Err(Error::InvalidArgument("target block exceeds image bounds".into()));
    }
    let mut residuals = Vec::new();
    let mut neighbors = Vec::new();
    if x >= TARGET {
        neighbors.push((x - TARGET, y));
    }
    if y >= TARGET {
        neighbors.push((x, y - TARGET));
    }
    if x >= TARGET && y >= TARGET {
        neighbors.push((x - TARGET, y - TARGET));
    }
    for (nx, ny) in neighbors {
        let region = Region::new(nx, ny, TARGET, TARGET)?;
        residuals.extend(extract_residuals(img, region, mean)?);
    }
    if residuals.is_empty() {
        return Ok(CovarianceEstimate {
            matrix: SymMatrix::identity(BLOCK_LEN),
            m: 0,
            fallback: true,
        });
    }
    estimate_covariance(&residuals, m)
}
