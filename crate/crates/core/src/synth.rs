//! Synthetic rectified stereo scenes with exact ground truth.
//!
//! Disparities are integer-valued, so resampling the right view at
//! `x - D(p)` hits pixel centers and reproduces the left view exactly. The
//! left image is defined through the right one: `IL(x, y) = T(x - D(x, y), y)`
//! and `IR(x', y) = T(x', y)` for a texture `T` over right-view columns.
//! The right disparity is the forward projection of the left disparity;
//! right pixels hit by no left pixel, or by more than one, are invalid.
//!
//! All randomness comes from [`Lcg`], a 64-bit linear congruential generator:
//!
//! ```text
//! state <- state * 6364136223846793005 + 1442695040888963407   (mod 2^64)
//! next_f64 = (state >> 11) * 2^-53                              in [0, 1)
//! ```
//!
//! The generator is seeded with `state = seed` and advanced before every draw.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::map::{ImageBuffer, ScalarMap};

/// Smallest disparity a corrupted estimate is clamped to.
pub const DISPARITY_FLOOR: f64 = 0.1;

#[derive(Debug, Clone)]
pub struct Lcg {
    state: u64,
}

impl Lcg {
    const MUL: u64 = 6364136223846793005;
    const INC: u64 = 1442695040888963407;

    pub fn new(seed: u64) -> Self {
        Lcg { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_mul(Self::MUL).wrapping_add(Self::INC);
        self.state
    }

    /// Uniform in `[0, 1)`.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Uniform integer in `0..n`.
    pub fn below(&mut self, n: usize) -> usize {
        ((self.next_f64() * n as f64) as usize).min(n.saturating_sub(1))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Layout {
    PlanarRamp,
    PiecewisePlanar { boxes: usize },
    StepEdge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Texture {
    Flat,
    Sinusoidal,
    Noise,
    TexturelessBand,
}

/// Monotone increasing map from disparity to relative depth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DepthTransform {
    Affine { scale: f64, offset: f64 },
    Power { exponent: f64 },
}

impl DepthTransform {
    pub fn apply(&self, d: f64) -> f64 {
        match *self {
            DepthTransform::Affine { scale, offset } => scale * d + offset,
            DepthTransform::Power { exponent } => d.powf(exponent),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Corruption {
    None,
    /// `round(fraction * W * H)` distinct pixels shifted by `±magnitude`.
    Salt { fraction: f64, magnitude: f64 },
    /// A rectangle shifted by `offset`.
    Region {
        x: usize,
        y: usize,
        width: usize,
        height: usize,
        offset: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneSpec {
    pub width: usize,
    pub height: usize,
    pub layout: Layout,
    pub texture: Texture,
    pub depth_transform: DepthTransform,
    pub corruption: Corruption,
    pub seed: u64,
}

impl Default for SceneSpec {
    fn default() -> Self {
        SceneSpec {
            width: 128,
            height: 128,
            layout: Layout::PiecewisePlanar { boxes: 4 },
            texture: Texture::Noise,
            depth_transform: DepthTransform::Affine {
                scale: 1.0,
                offset: 0.0,
            },
            corruption: Corruption::None,
            seed: 0,
        }
    }
}

impl SceneSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if self.width < 8 || self.height < 8 {
            return bad(format!("scene must be at least 8x8, got {}x{}", self.width, self.height));
        }
        if let Layout::PiecewisePlanar { boxes } = self.layout {
            if boxes > 64 {
                return bad(format!("at most 64 boxes, got {boxes}"));
            }
        }
        match self.depth_transform {
            DepthTransform::Affine { scale, offset } if !(scale > 0.0) || !offset.is_finite() || !scale.is_finite() => {
                return bad(format!("affine depth transform needs scale > 0, got {scale}"));
            }
            DepthTransform::Power { exponent } if !(exponent > 0.0) || !exponent.is_finite() => {
                return bad(format!("power depth transform needs exponent > 0, got {exponent}"));
            }
            _ => {}
        }
        match self.corruption {
            Corruption::Salt { fraction, magnitude } => {
                if !(0.0..=1.0).contains(&fraction) || !magnitude.is_finite() {
                    return bad(format!("salt needs fraction in [0, 1] and finite magnitude, got {fraction}, {magnitude}"));
                }
            }
            Corruption::Region { offset, .. } if !offset.is_finite() => {
                return bad("region offset must be finite".into());
            }
            _ => {}
        }
        Ok(())
    }
}

fn parse_numbers(s: &str, n: usize, what: &str) -> Result<Vec<f64>> {
    let vals: std::result::Result<Vec<f64>, _> = s.split(',').map(|t| t.trim().parse::<f64>()).collect();
    match vals {
        Ok(v) if v.len() == n => Ok(v),
        _ => Err(Error::InvalidParameter(format!("{what} expects {n} comma-separated numbers, got '{s}'"))),
    }
}

impl FromStr for Layout {
    type Err = Error;

    /// `planar-ramp`, `piecewise-planar[:N]` or `step-edge`.
    fn from_str(s: &str) -> Result<Self> {
        let (name, arg) = s.split_once(':').map_or((s, None), |(a, b)| (a, Some(b)));
        match (name, arg) {
            ("planar-ramp", None) => Ok(Layout::PlanarRamp),
            ("step-edge", None) => Ok(Layout::StepEdge),
            ("piecewise-planar", None) => Ok(Layout::PiecewisePlanar { boxes: 4 }),
            ("piecewise-planar", Some(n)) => n
                .parse()
                .map(|boxes| Layout::PiecewisePlanar { boxes })
                .map_err(|_| Error::InvalidParameter(format!("bad box count '{n}'"))),
            _ => Err(Error::InvalidParameter(format!(
                "unknown layout '{s}' (expected planar-ramp, piecewise-planar[:N], step-edge)"
            ))),
        }
    }
}

impl FromStr for Texture {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "flat" => Ok(Texture::Flat),
            "sinusoidal" => Ok(Texture::Sinusoidal),
            "noise" => Ok(Texture::Noise),
            "texture-less-band" => Ok(Texture::TexturelessBand),
            _ => Err(Error::InvalidParameter(format!(
                "unknown texture '{s}' (expected flat, sinusoidal, noise, texture-less-band)"
            ))),
        }
    }
}

impl FromStr for DepthTransform {
    type Err = Error;

    /// `affine:SCALE,OFFSET` or `power:EXPONENT`.
    fn from_str(s: &str) -> Result<Self> {
        match s.split_once(':') {
            Some(("affine", args)) => {
                let v = parse_numbers(args, 2, "affine")?;
                Ok(DepthTransform::Affine { scale: v[0], offset: v[1] })
            }
            Some(("power", args)) => {
                let v = parse_numbers(args, 1, "power")?;
                Ok(DepthTransform::Power { exponent: v[0] })
            }
            _ => Err(Error::InvalidParameter(format!(
                "unknown depth transform '{s}' (expected affine:SCALE,OFFSET or power:EXPONENT)"
            ))),
        }
    }
}

impl FromStr for Corruption {
    type Err = Error;

    /// `none`, `salt:FRACTION,MAGNITUDE` or `region:X,Y,W,H,OFFSET`.
    fn from_str(s: &str) -> Result<Self> {
        if s == "none" {
            return Ok(Corruption::None);
        }
        match s.split_once(':') {
            Some(("salt", args)) => {
                let v = parse_numbers(args, 2, "salt")?;
                Ok(Corruption::Salt { fraction: v[0], magnitude: v[1] })
            }
            Some(("region", args)) => {
                let v = parse_numbers(args, 5, "region")?;
                if v[..4].iter().any(|&c| c < 0.0 || c.fract() != 0.0) {
                    return Err(Error::InvalidParameter("region rectangle must be non-negative integers".into()));
                }
                Ok(Corruption::Region {
                    x: v[0] as usize,
                    y: v[1] as usize,
                    width: v[2] as usize,
                    height: v[3] as usize,
                    offset: v[4],
                })
            }
            _ => Err(Error::InvalidParameter(format!(
                "unknown corruption '{s}' (expected none, salt:FRACTION,MAGNITUDE, region:X,Y,W,H,OFFSET)"
            ))),
        }
    }
}

impl fmt::Display for Texture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Texture::Flat => "flat",
            Texture::Sinusoidal => "sinusoidal",
            Texture::Noise => "noise",
            Texture::TexturelessBand => "texture-less-band",
        })
    }
}

/// A generated scene.
#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub left: ImageBuffer,
    pub right: ImageBuffer,
    /// Ground-truth left disparity, integer-valued.
    pub disparity: ScalarMap,
    /// Ground truth plus the injected corruption.
    pub estimate: ScalarMap,
    pub depth: ScalarMap,
    pub right_disparity: ScalarMap,
    /// True exactly at perturbed pixels.
    pub corruption_mask: Vec<bool>,
}

impl Scene {
    pub fn corrupted_count(&self) -> usize {
        self.corruption_mask.iter().filter(|&&m| m).count()
    }
}

/// Plane `base + sx * (x - cx) + sy * (y - cy)`.
#[derive(Debug, Clone, Copy)]
struct Plane {
    base: f64,
    sx: f64,
    sy: f64,
    cx: f64,
    cy: f64,
}

impl Plane {
    fn at(&self, x: usize, y: usize) -> f64 {
        self.base + self.sx * (x as f64 - self.cx) + self.sy * (y as f64 - self.cy)
    }
}

fn continuous_disparity(spec: &SceneSpec, rng: &mut Lcg) -> Vec<f64> {
    let (w, h) = (spec.width, spec.height);
    let (fw, fh) = (w as f64, h as f64);
    // total variation across the frame stays within ±4 px per axis
    let plane = |rng: &mut Lcg, lo: f64, hi: f64, cx: f64, cy: f64, span_x: f64, span_y: f64| Plane {
        base: rng.uniform(lo, hi),
        sx: rng.uniform(-4.0, 4.0) / span_x,
        sy: rng.uniform(-4.0, 4.0) / span_y,
        cx,
        cy,
    };
    let mut d = vec![0.0; w * h];
    match spec.layout {
        Layout::PlanarRamp => {
            let p = plane(rng, 8.0, 16.0, fw / 2.0, fh / 2.0, fw, fh);
            for y in 0..h {
                for x in 0..w {
                    d[y * w + x] = p.at(x, y);
                }
            }
        }
        Layout::StepEdge => {
            let left = plane(rng, 6.0, 10.0, fw / 4.0, fh / 2.0, fw, fh);
            let near = rng.uniform(8.0, 16.0);
            let right = Plane {
                base: left.base + near,
                ..plane(rng, 0.0, 0.0, 3.0 * fw / 4.0, fh / 2.0, fw, fh)
            };
            for y in 0..h {
                for x in 0..w {
                    d[y * w + x] = if x < w / 2 { left.at(x, y) } else { right.at(x, y) };
                }
            }
        }
        Layout::PiecewisePlanar { boxes } => {
            let bg = plane(rng, 6.0, 12.0, fw / 2.0, fh / 2.0, fw, fh);
            for y in 0..h {
                for x in 0..w {
                    d[y * w + x] = bg.at(x, y);
                }
            }
            for _ in 0..boxes {
                let bw = (fw * rng.uniform(0.125, 0.33)) as usize;
                let bh = (fh * rng.uniform(0.125, 0.33)) as usize;
                let x0 = rng.below(w - bw.min(w - 1));
                let y0 = rng.below(h - bh.min(h - 1));
                let lift = rng.uniform(6.0, 20.0);
                let mut p = plane(rng, 0.0, 0.0, (x0 + bw / 2) as f64, (y0 + bh / 2) as f64, fw, fh);
                p.base = bg.base + lift;
                for y in y0..(y0 + bh).min(h) {
                    for x in x0..(x0 + bw).min(w) {
                        d[y * w + x] = p.at(x, y);
                    }
                }
            }
        }
    }
    d
}

/// Texture over right-view columns `u >= -margin`.
struct TextureField {
    kind: Texture,
    margin: usize,
    span: usize,
    noise: Vec<f64>,
    freq: (f64, f64, f64, f64),
    height: usize,
}

impl TextureField {
    fn new(kind: Texture, width: usize, height: usize, margin: usize, rng: &mut Lcg) -> Self {
        let span = width + margin;
        let tau = std::f64::consts::TAU;
        let freq = (
            tau / rng.uniform(5.0, 13.0),
            rng.uniform(0.0, tau),
            tau / rng.uniform(5.0, 13.0),
            rng.uniform(0.0, tau),
        );
        let noise = match kind {
            Texture::Noise | Texture::TexturelessBand => {
                (0..span * height).map(|_| rng.uniform(0.05, 0.95)).collect()
            }
            _ => Vec::new(),
        };
        TextureField {
            kind,
            margin,
            span,
            noise,
            freq,
            height,
        }
    }

    fn at(&self, u: i64, y: usize) -> f64 {
        let (fu, pu, fy, py) = self.freq;
        match self.kind {
            Texture::Flat => 0.5,
            Texture::Sinusoidal => 0.5 + 0.2 * (fu * u as f64 + pu).sin() + 0.2 * (fy * y as f64 + py).sin(),
            Texture::Noise => self.noise_at(u, y),
            Texture::TexturelessBand => {
                if y >= self.height / 3 && y < 2 * self.height / 3 {
                    0.5
                } else {
                    self.noise_at(u, y)
                }
            }
        }
    }

    fn noise_at(&self, u: i64, y: usize) -> f64 {
        let col = (u + self.margin as i64) as usize;
        self.noise[y * self.span + col]
    }
}

/// Generates the scene described by `spec`. Identical specs give identical scenes.
pub fn generate(spec: &SceneSpec) -> Result<Scene> {
    spec.validate()?;
    let (w, h) = (spec.width, spec.height);
    let mut rng = Lcg::new(spec.seed);

    let gt: Vec<f64> = continuous_disparity(spec, &mut rng)
        .into_iter()
        .map(|v| v.round().max(1.0))
        .collect();
    let max_d = gt.iter().copied().fold(0.0, f64::max) as usize;
    let texture = TextureField::new(spec.texture, w, h, max_d + 1, &mut rng);

    let right = ImageBuffer::gray_from_fn(w, h, |x, y| texture.at(x as i64, y))?;
    let left = ImageBuffer::gray_from_fn(w, h, |x, y| texture.at(x as i64 - gt[y * w + x] as i64, y))?;

    // forward projection; 0 = unclaimed, 1 = unique, 2 = conflict
    let mut claims = vec![0u8; w * h];
    let mut dr = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let d = gt[y * w + x];
            let xr = x as i64 - d as i64;
            if xr >= 0 {
                let i = y * w + xr as usize;
                claims[i] = (claims[i] + 1).min(2);
                dr[i] = d;
            }
        }
    }
    let right_disparity = ScalarMap::with_mask(w, h, dr, claims.iter().map(|&c| c == 1).collect())?;

    let depth: Vec<f64> = gt.iter().map(|&d| spec.depth_transform.apply(d)).collect();
    let mut estimate = gt.clone();
    let mut mask = vec![false; w * h];
    match spec.corruption {
        Corruption::None => {}
        Corruption::Salt { fraction, magnitude } => {
            let count = (fraction * (w * h) as f64).round() as usize;
            let mut idx: Vec<usize> = (0..w * h).collect();
            for i in 0..count {
                let j = i + rng.below(w * h - i);
                idx.swap(i, j);
                let p = idx[i];
                let sign = if rng.next_f64() < 0.5 { -1.0 } else { 1.0 };
                estimate[p] = (estimate[p] + sign * magnitude).max(DISPARITY_FLOOR);
                mask[p] = true;
            }
        }
        Corruption::Region {
            x,
            y,
            width,
            height,
            offset,
        } => {
            for yy in y.min(h)..(y + height).min(h) {
                for xx in x.min(w)..(x + width).min(w) {
                    let p = yy * w + xx;
                    estimate[p] = (estimate[p] + offset).max(DISPARITY_FLOOR);
                    mask[p] = true;
                }
            }
        }
    }

    Ok(Scene {
        left,
        right,
        disparity: ScalarMap::new(w, h, gt)?,
        estimate: ScalarMap::new(w, h, estimate)?,
        depth: ScalarMap::new(w, h, depth)?,
        right_disparity,
        corruption_mask: mask,
    })
}
