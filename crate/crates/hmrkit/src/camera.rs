//! Pinhole perspective camera model: focal-length conventions, projection,
//! ray unprojection, crop-intrinsics transform, dense ray maps, and the
//! bounding-box encoding used by fixed-focal crop pipelines.
//!
//! Pixel coordinates are real-valued. Scalar operations take coordinates
//! verbatim; only [`ray_map`] addresses pixel centers, where grid entry
//! `(row i, col j)` corresponds to the continuous coordinate
//! `(j + 0.5, i + 0.5)`.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};
use std::io::{Read, Write};

/// Fixed focal constant of the classic crop-based pipelines.
pub const F_CLIFF: f64 = 5000.0;

/// Focal constant used by the constant-focal tracking lineage, as printed.
pub const F_TRACE: f64 = 443.4;

/// Magic bytes of the binary ray-map format.
pub const RAYMAP_MAGIC: &[u8; 8] = b"RAYMAP01";

#[derive(Debug, thiserror::Error)]
pub enum CameraError {
    #[error("point has non-positive depth z = {z}")]
    NonPositiveDepth { z: f64 },
    #[error("invalid intrinsics: {0}")]
    InvalidIntrinsics(String),
    #[error("invalid image size: {0}")]
    InvalidImageSize(String),
    #[error("invalid bounding box: {0}")]
    InvalidBBox(String),
    #[error("ray map i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed ray map file: {0}")]
    MalformedRayMap(String),
}

/// Full-image resolution in pixels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImageSize {
    pub width: u32,
    pub height: u32,
}

impl ImageSize {
    pub fn new(width: u32, height: u32) -> Result<Self, CameraError> {
        if width < 1 || height < 1 {
            return Err(CameraError::InvalidImageSize(format!(
                "dimensions must be >= 1, got {width}x{height}"
            )));
        }
        Ok(Self { width, height })
    }
}

/// Pinhole intrinsics. The principal point is not required to be the image
/// center.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Intrinsics {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
}

impl Intrinsics {
    pub fn new(fx: f64, fy: f64, cx: f64, cy: f64) -> Result<Self, CameraError> {
        let k = Self { fx, fy, cx, cy };
        k.validate()?;
        Ok(k)
    }

    /// Square intrinsics with a single focal length.
    pub fn from_focal(f: f64, cx: f64, cy: f64) -> Result<Self, CameraError> {
        Self::new(f, f, cx, cy)
    }

    pub fn validate(&self) -> Result<(), CameraError> {
        if !(self.fx > 0.0 && self.fy > 0.0) {
            return Err(CameraError::InvalidIntrinsics(format!(
                "focal lengths must be positive, got fx={} fy={}",
                self.fx, self.fy
            )));
        }
        if !(self.cx.is_finite() && self.cy.is_finite()) {
            return Err(CameraError::InvalidIntrinsics(format!(
                "principal point must be finite, got cx={} cy={}",
                self.cx, self.cy
            )));
        }
        Ok(())
    }
}

/// Real-valued pixel coordinate; sub-pixel positions are allowed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pixel {
    pub u: f64,
    pub v: f64,
}

impl Pixel {
    pub fn new(u: f64, v: f64) -> Self {
        Self { u, v }
    }
}

/// A camera ray direction in one of two declared forms: homogeneous
/// (`z == 1` exactly) or unit-normalized.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ray {
    direction: Vector3<f64>,
    normalized: bool,
}

impl Ray {
    pub fn direction(&self) -> Vector3<f64> {
        self.direction
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// Homogeneous form of this ray (`z == 1`).
    pub fn homogeneous(&self) -> Vector3<f64> {
        if self.normalized {
            self.direction / self.direction.z
        } else {
            self.direction
        }
    }
}

/// Square crop window. `scale` is the ratio of the source-crop side to the
/// output-crop side, so the crop output resolution is `side / scale`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BBox {
    pub u0: f64,
    pub v0: f64,
    pub side: f64,
    pub scale: f64,
}

impl BBox {
    pub fn new(u0: f64, v0: f64, side: f64, scale: f64) -> Result<Self, CameraError> {
        if !(side > 0.0) {
            return Err(CameraError::InvalidBBox(format!(
                "side must be positive, got {side}"
            )));
        }
        if !(scale > 0.0) {
            return Err(CameraError::InvalidBBox(format!(
                "scale must be positive, got {scale}"
            )));
        }
        if !(u0.is_finite() && v0.is_finite()) {
            return Err(CameraError::InvalidBBox(format!(
                "corner must be finite, got ({u0}, {v0})"
            )));
        }
        Ok(Self { u0, v0, side, scale })
    }

    /// Output resolution `side / scale`, rounded to the nearest pixel count.
    pub fn crop_resolution(&self) -> u32 {
        (self.side / self.scale).round().max(1.0) as u32
    }

    /// Center of the box in full-image coordinates.
    pub fn center(&self) -> Pixel {
        Pixel::new(self.u0 + self.side / 2.0, self.v0 + self.side / 2.0)
    }
}

/// Focal-length conventions used by crop-based mesh-recovery pipelines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FocalConvention {
    /// Constant 5000 px regardless of resolution.
    Fixed5000,
    /// Full-image diagonal, `sqrt(W^2 + H^2)`.
    DiagFull,
    /// Mean of width and height, `(W + H) / 2`.
    MeanWh,
    /// Constant 443.4 px.
    TraceConst,
}

/// Focal length in pixels for a convention at a given image size.
pub fn focal_from_convention(convention: FocalConvention, size: ImageSize) -> f64 {
    let (w, h) = (size.width as f64, size.height as f64);
    match convention {
        FocalConvention::Fixed5000 => F_CLIFF,
        FocalConvention::DiagFull => (w * w + h * h).sqrt(),
        FocalConvention::MeanWh => (w + h) / 2.0,
        FocalConvention::TraceConst => F_TRACE,
    }
}

/// Perspective projection of a camera-frame point.
pub fn project(point: &Vector3<f64>, k: &Intrinsics) -> Result<Pixel, CameraError> {
    if point.z <= 0.0 {
        return Err(CameraError::NonPositiveDepth { z: point.z });
    }
    Ok(Pixel::new(
        k.fx * point.x / point.z + k.cx,
        k.fy * point.y / point.z + k.cy,
    ))
}

/// Weak-perspective (scaled orthographic) projection. Depth-independent;
/// kept as the contrast baseline for the perspective model.
pub fn project_weak(point: &Vector3<f64>, scale: f64, trans: [f64; 2]) -> Pixel {
    Pixel::new(scale * point.x + trans[0], scale * point.y + trans[1])
}

/// Ray through a pixel: `d = K^-1 [u, v, 1]`. With `normalize` the direction
/// is divided by its Euclidean norm, otherwise `z == 1` exactly.
pub fn unproject_ray(p: Pixel, k: &Intrinsics, normalize: bool) -> Ray {
    let d = Vector3::new((p.u - k.cx) / k.fx, (p.v - k.cy) / k.fy, 1.0);
    if normalize {
        Ray {
            direction: d / d.norm(),
            normalized: true,
        }
    } else {
        Ray {
            direction: d,
            normalized: false,
        }
    }
}

/// Intrinsics of the cropped image. Crop pixel `(u', v')` corresponds to
/// full-image pixel `(u0 + s*u', v0 + s*v')`; this transform divides the
/// focal length by `s` and moves the bbox offset into the principal point,
/// which is the form that keeps ray directions invariant under cropping.
pub fn crop_intrinsics(k: &Intrinsics, bbox: &BBox) -> Intrinsics {
    Intrinsics {
        fx: k.fx / bbox.scale,
        fy: k.fy / bbox.scale,
        cx: (k.cx - bbox.u0) / bbox.scale,
        cy: (k.cy - bbox.v0) / bbox.scale,
    }
}

/// Bounding-box encoding of the fixed-focal crop pipelines: offsets of the
/// box center from the image center and the box side, all divided by the
/// constant focal 5000.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CliffEncoding(pub [f64; 3]);

pub fn cliff_encoding(bbox: &BBox, size: ImageSize) -> CliffEncoding {
    let c = bbox.center();
    let dx = c.u - size.width as f64 / 2.0;
    let dy = c.v - size.height as f64 / 2.0;
    CliffEncoding([dx / F_CLIFF, dy / F_CLIFF, bbox.side / F_CLIFF])
}

/// Dense per-pixel ray directions, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct RayMap {
    width: u32,
    height: u32,
    normalized: bool,
    rays: Vec<Vector3<f64>>,
}

impl RayMap {
    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn rays(&self) -> &[Vector3<f64>] {
        &self.rays
    }

    /// Ray at grid row `i`, column `j`.
    pub fn at(&self, i: u32, j: u32) -> Vector3<f64> {
        self.rays[(i as usize) * (self.width as usize) + j as usize]
    }

    /// Binary encoding: 16-byte header (magic `RAYMAP01`, u32 width,
    /// u32 height, little-endian) followed by row-major xyz f64 triples.
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<(), CameraError> {
        w.write_all(RAYMAP_MAGIC)?;
        w.write_all(&self.width.to_le_bytes())?;
        w.write_all(&self.height.to_le_bytes())?;
        for r in &self.rays {
            for c in [r.x, r.y, r.z] {
                w.write_all(&c.to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self, CameraError> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != RAYMAP_MAGIC {
            return Err(CameraError::MalformedRayMap(format!(
                "bad magic {magic:?}"
            )));
        }
        let mut u32buf = [0u8; 4];
        r.read_exact(&mut u32buf)?;
        let width = u32::from_le_bytes(u32buf);
        r.read_exact(&mut u32buf)?;
        let height = u32::from_le_bytes(u32buf);
        let n = width as usize * height as usize;
        let mut rays = Vec::with_capacity(n);
        let mut f64buf = [0u8; 8];
        for _ in 0..n {
            let mut v = [0.0f64; 3];
            for c in &mut v {
                r.read_exact(&mut f64buf)?;
                *c = f64::from_le_bytes(f64buf);
            }
            rays.push(Vector3::new(v[0], v[1], v[2]));
        }
        // Re-derive the form from the data: a homogeneous map has z == 1.
        let normalized = !rays.iter().all(|r| r.z == 1.0);
        Ok(Self {
            width,
            height,
            normalized,
            rays,
        })
    }

    pub fn to_json(&self) -> RayMapFile {
        RayMapFile {
            width: self.width,
            height: self.height,
            normalized: self.normalized,
            rays: self.rays.iter().map(|r| [r.x, r.y, r.z]).collect(),
        }
    }

    pub fn from_json(file: RayMapFile) -> Result<Self, CameraError> {
        if file.rays.len() != file.width as usize * file.height as usize {
            return Err(CameraError::MalformedRayMap(format!(
                "ray count {} does not match {}x{}",
                file.rays.len(),
                file.width,
                file.height
            )));
        }
        Ok(Self {
            width: file.width,
            height: file.height,
            normalized: file.normalized,
            rays: file
                .rays
                .into_iter()
                .map(|r| Vector3::new(r[0], r[1], r[2]))
                .collect(),
        })
    }
}

/// Lossless JSON alternative to the binary ray-map format.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RayMapFile {
    pub width: u32,
    pub height: u32,
    pub normalized: bool,
    pub rays: Vec<[f64; 3]>,
}

/// Ray map over a `width x height` grid; entry `(i, j)` is the ray through
/// the pixel center `(j + 0.5, i + 0.5)`.
pub fn ray_map(k: &Intrinsics, width: u32, height: u32, normalize: bool) -> RayMap {
    assert!(width >= 1 && height >= 1, "ray map dimensions must be >= 1");
    let mut rays = Vec::with_capacity(width as usize * height as usize);
    for i in 0..height {
        for j in 0..width {
            let p = Pixel::new(j as f64 + 0.5, i as f64 + 0.5);
            rays.push(unproject_ray(p, k, normalize).direction());
        }
    }
    RayMap {
        width,
        height,
        normalized: normalize,
        rays,
    }
}

/// Camera document combining intrinsics and the full-image size; this is
/// the on-disk JSON schema used by the CLI.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CameraFile {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: u32,
    pub height: u32,
}

impl CameraFile {
    pub fn intrinsics(&self) -> Result<Intrinsics, CameraError> {
        Intrinsics::new(self.fx, self.fy, self.cx, self.cy)
    }

    pub fn size(&self) -> Result<ImageSize, CameraError> {
        ImageSize::new(self.width, self.height)
    }
}
