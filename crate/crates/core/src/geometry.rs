//! Depth-camera geometry: cached per-pixel ray directions, back-projection,
//! camera-to-body transforms, first-order depth uncertainty and point-cloud
//! down-sampling.
//!
//! The direction matrix holds `K⁻¹·(u, v, 1)` for every pixel (optionally
//! after undistorting the pixel coordinates). Back-projecting a depth image is
//! then a per-pixel scalar multiply by the metric depth, so the intrinsics are
//! inverted exactly once per camera.

use std::collections::HashMap;
use std::io::{BufRead, Write};
use std::path::Path;

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Raw depth units per meter used when nothing else is configured (millimeters).
pub const DEFAULT_DEPTH_SCALE: f64 = 1000.0;

/// Default pixel stride of the sub-sampling operator along each axis.
pub const DEFAULT_STRIDE: usize = 5;

const UNDISTORT_ITERATIONS: usize = 10;

/// Pinhole intrinsics with an optional radial-tangential distortion model.
///
/// `distortion` follows the usual `[k1, k2, p1, p2, k3]` ordering.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraIntrinsics {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: usize,
    pub height: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distortion: Option<[f64; 5]>,
}

impl CameraIntrinsics {
    pub fn new(fx: f64, fy: f64, cx: f64, cy: f64, width: usize, height: usize) -> Result<Self> {
        let intr = CameraIntrinsics {
            fx,
            fy,
            cx,
            cy,
            width,
            height,
            distortion: None,
        };
        intr.validate()?;
        Ok(intr)
    }

    pub fn with_distortion(mut self, coeffs: [f64; 5]) -> Self {
        self.distortion = Some(coeffs);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidIntrinsics(msg));
        if !(self.fx.is_finite() && self.fx > 0.0 && self.fy.is_finite() && self.fy > 0.0) {
            return bad(format!(
                "focal lengths must be positive (fx={}, fy={})",
                self.fx, self.fy
            ));
        }
        if self.width == 0 || self.height == 0 {
            return bad("image size must be non-zero".into());
        }
        if !(0.0..self.width as f64).contains(&self.cx) || !(0.0..self.height as f64).contains(&self.cy) {
            return bad(format!(
                "principal point ({}, {}) outside {}x{} image",
                self.cx, self.cy, self.width, self.height
            ));
        }
        if let Some(d) = self.distortion {
            if d.iter().any(|c| !c.is_finite()) {
                return bad("distortion coefficients must be finite".into());
            }
        }
        Ok(())
    }

    pub fn matrix(&self) -> Matrix3<f64> {
        Matrix3::new(self.fx, 0.0, self.cx, 0.0, self.fy, self.cy, 0.0, 0.0, 1.0)
    }

    pub fn inverse_matrix(&self) -> Result<Matrix3<f64>> {
        self.matrix()
            .try_inverse()
            .ok_or_else(|| Error::InvalidIntrinsics("K is not invertible".into()))
    }

    /// Undistort a pixel coordinate, returning the ideal pinhole pixel.
    pub fn undistort_pixel(&self, u: f64, v: f64) -> (f64, f64) {
        let Some(coeffs) = self.distortion else {
            return (u, v);
        };
        let xd = (u - self.cx) / self.fx;
        let yd = (v - self.cy) / self.fy;
        let (x, y) = undistort_normalized(xd, yd, &coeffs);
        (x * self.fx + self.cx, y * self.fy + self.cy)
    }

    /// Forward distortion of an ideal pixel coordinate.
    pub fn distort_pixel(&self, u: f64, v: f64) -> (f64, f64) {
        let Some(coeffs) = self.distortion else {
            return (u, v);
        };
        let x = (u - self.cx) / self.fx;
        let y = (v - self.cy) / self.fy;
        let (xd, yd) = distort_normalized(x, y, &coeffs);
        (xd * self.fx + self.cx, yd * self.fy + self.cy)
    }
}

fn distort_normalized(x: f64, y: f64, d: &[f64; 5]) -> (f64, f64) {
    let [k1, k2, p1, p2, k3] = *d;
    let r2 = x * x + y * y;
    let radial = 1.0 + r2 * (k1 + r2 * (k2 + r2 * k3));
    (
        x * radial + 2.0 * p1 * x * y + p2 * (r2 + 2.0 * x * x),
        y * radial + p1 * (r2 + 2.0 * y * y) + 2.0 * p2 * x * y,
    )
}

// Fixed-point inversion of the distortion model, fixed iteration count.
fn undistort_normalized(xd: f64, yd: f64, d: &[f64; 5]) -> (f64, f64) {
    let [k1, k2, p1, p2, k3] = *d;
    let (mut x, mut y) = (xd, yd);
    for _ in 0..UNDISTORT_ITERATIONS {
        let r2 = x * x + y * y;
        let radial = 1.0 + r2 * (k1 + r2 * (k2 + r2 * k3));
        let dx = 2.0 * p1 * x * y + p2 * (r2 + 2.0 * x * x);
        let dy = p1 * (r2 + 2.0 * y * y) + 2.0 * p2 * x * y;
        x = (xd - dx) / radial;
        y = (yd - dy) / radial;
    }
    (x, y)
}

/// Cached back-projection rays, one per pixel in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionMatrix {
    dirs: Vec<Vector3<f64>>,
    intrinsics: CameraIntrinsics,
    distortion_applied: bool,
}

impl DirectionMatrix {
    pub fn dirs(&self) -> &[Vector3<f64>] {
        &self.dirs
    }

    pub fn intrinsics(&self) -> &CameraIntrinsics {
        &self.intrinsics
    }

    pub fn distortion_applied(&self) -> bool {
        self.distortion_applied
    }

    pub fn direction(&self, u: usize, v: usize) -> Vector3<f64> {
        self.dirs[v * self.intrinsics.width + u]
    }
}

pub fn build_direction_matrix(intr: &CameraIntrinsics, apply_undistortion: bool) -> Result<DirectionMatrix> {
    intr.validate()?;
    let k_inv = intr.inverse_matrix()?;
    let undistort = apply_undistortion && intr.distortion.is_some();
    let mut dirs = Vec::with_capacity(intr.width * intr.height);
    for v in 0..intr.height {
        for u in 0..intr.width {
            let (pu, pv) = if undistort {
                intr.undistort_pixel(u as f64, v as f64)
            } else {
                (u as f64, v as f64)
            };
            dirs.push(k_inv * Vector3::new(pu, pv, 1.0));
        }
    }
    Ok(DirectionMatrix {
        dirs,
        intrinsics: *intr,
        distortion_applied: undistort,
    })
}

/// Raw single-channel depth image in integer sensor units.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthImage {
    width: usize,
    height: usize,
    data: Vec<u16>,
    depth_scale: f64,
}

impl DepthImage {
    pub fn new(width: usize, height: usize, data: Vec<u16>, depth_scale: f64) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::shape(format!(
                "depth data has {} samples, expected {width}x{height}",
                data.len()
            )));
        }
        if !(depth_scale.is_finite() && depth_scale > 0.0) {
            return Err(Error::invalid(format!(
                "depth_scale must be positive, got {depth_scale}"
            )));
        }
        Ok(DepthImage {
            width,
            height,
            data,
            depth_scale,
        })
    }

    pub fn zeros(width: usize, height: usize, depth_scale: f64) -> Result<Self> {
        DepthImage::new(width, height, vec![0; width * height], depth_scale)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[u16] {
        &self.data
    }

    pub fn depth_scale(&self) -> f64 {
        self.depth_scale
    }

    pub fn get(&self, u: usize, v: usize) -> u16 {
        self.data[v * self.width + u]
    }

    pub fn set(&mut self, u: usize, v: usize, raw: u16) {
        self.data[v * self.width + u] = raw;
    }

    /// Encode as binary 16-bit PGM (`P5`, maxval 65535, big-endian samples).
    pub fn write_pgm<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        write!(out, "P5\n{} {}\n65535\n", self.width, self.height)?;
        let mut buf = Vec::with_capacity(self.data.len() * 2);
        for &d in &self.data {
            buf.extend_from_slice(&d.to_be_bytes());
        }
        out.write_all(&buf)
    }

    pub fn save_pgm(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = std::io::BufWriter::new(file);
        self.write_pgm(&mut w)
            .and_then(|_| w.flush())
            .map_err(|e| Error::io(path, e))
    }

    /// Decode a binary PGM. 8-bit files (maxval < 256) are widened.
    pub fn read_pgm<R: BufRead>(mut input: R, depth_scale: f64, path: &Path) -> Result<Self> {
        let corrupt = |reason: &str| Error::corrupt(path, reason.to_string());
        let mut header = Vec::new();
        let mut fields = Vec::new();
        // Header: magic, width, height, maxval separated by whitespace, with
        // '#' comments running to end of line; one whitespace byte precedes data.
        let mut byte = [0u8; 1];
        let mut in_comment = false;
        while fields.len() < 4 {
            let n = input.read(&mut byte).map_err(|e| Error::io(path, e))?;
            if n == 0 {
                return Err(corrupt("truncated PGM header"));
            }
            let b = byte[0];
            if in_comment {
                in_comment = b != b'\n';
                continue;
            }
            if b == b'#' {
                in_comment = true;
            } else if b.is_ascii_whitespace() {
                if !header.is_empty() {
                    fields.push(String::from_utf8_lossy(&header).into_owned());
                    header.clear();
                }
            } else {
                header.push(b);
            }
        }
        if fields[0] != "P5" {
            return Err(corrupt("not a binary PGM (expected P5)"));
        }
        let parse = |s: &str| s.parse::<usize>().map_err(|_| corrupt("bad PGM header number"));
        let (width, height, maxval) = (parse(&fields[1])?, parse(&fields[2])?, parse(&fields[3])?);
        if maxval == 0 || maxval > 65535 {
            return Err(corrupt("PGM maxval out of range"));
        }
        let bytes_per = if maxval < 256 { 1 } else { 2 };
        let mut raw = vec![0u8; width * height * bytes_per];
        input
            .read_exact(&mut raw)
            .map_err(|_| corrupt("truncated PGM pixel data"))?;
        let data = if bytes_per == 2 {
            raw.chunks_exact(2).map(|c| u16::from_be_bytes([c[0], c[1]])).collect()
        } else {
            raw.into_iter().map(u16::from).collect()
        };
        DepthImage::new(width, height, data, depth_scale)
    }

    pub fn load_pgm(path: &Path, depth_scale: f64) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        DepthImage::read_pgm(std::io::BufReader::new(file), depth_scale, path)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CloudFrame {
    Camera,
    Body,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    pub points: Vec<Vector3<f64>>,
    pub frame: CloudFrame,
}

impl PointCloud {
    pub fn new(points: Vec<Vector3<f64>>, frame: CloudFrame) -> Result<Self> {
        if points.iter().any(|p| !p.iter().all(|c| c.is_finite())) {
            return Err(Error::invalid("point cloud coordinates must be finite"));
        }
        Ok(PointCloud { points, frame })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Back-project the stride-selected pixels of `depth` through the cached rays.
///
/// Pixels with raw depth 0 carry no return and are skipped. Output order is
/// row-major over the selected pixels.
pub fn backproject(dm: &DirectionMatrix, depth: &DepthImage, stride: usize) -> Result<PointCloud> {
    if stride == 0 {
        return Err(Error::invalid("stride must be positive"));
    }
    let intr = dm.intrinsics();
    if depth.width != intr.width || depth.height != intr.height {
        return Err(Error::shape(format!(
            "depth image is {}x{} but direction matrix is {}x{}",
            depth.width, depth.height, intr.width, intr.height
        )));
    }
    let inv_scale = 1.0 / depth.depth_scale;
    let mut points = Vec::with_capacity((depth.width / stride + 1) * (depth.height / stride + 1));
    for v in (0..depth.height).step_by(stride) {
        let row = v * depth.width;
        for u in (0..depth.width).step_by(stride) {
            let raw = depth.data[row + u];
            if raw == 0 {
                continue;
            }
            points.push(dm.dirs[row + u] * (f64::from(raw) * inv_scale));
        }
    }
    Ok(PointCloud {
        points,
        frame: CloudFrame::Camera,
    })
}

/// Rigid camera-to-body transform.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtrinsicTransform {
    rotation: Matrix3<f64>,
    translation: Vector3<f64>,
}

impl ExtrinsicTransform {
    pub fn new(rotation: Matrix3<f64>, translation: Vector3<f64>) -> Result<Self> {
        let ortho = (rotation.transpose() * rotation - Matrix3::identity()).amax();
        if ortho > 1e-9 || (rotation.determinant() - 1.0).abs() > 1e-9 {
            return Err(Error::invalid("rotation must be orthonormal with det +1"));
        }
        if !translation.iter().all(|c| c.is_finite()) {
            return Err(Error::invalid("translation must be finite"));
        }
        Ok(ExtrinsicTransform { rotation, translation })
    }

    pub fn identity() -> Self {
        ExtrinsicTransform {
            rotation: Matrix3::identity(),
            translation: Vector3::zeros(),
        }
    }

    pub fn rotation(&self) -> &Matrix3<f64> {
        &self.rotation
    }

    pub fn translation(&self) -> &Vector3<f64> {
        &self.translation
    }
}

pub fn transform_to_body(cloud: &PointCloud, ext: &ExtrinsicTransform) -> Result<PointCloud> {
    if cloud.frame != CloudFrame::Camera {
        return Err(Error::InvalidState("cloud is already in the body frame".into()));
    }
    let points = cloud
        .points
        .iter()
        .map(|p| ext.rotation * p + ext.translation)
        .collect();
    Ok(PointCloud {
        points,
        frame: CloudFrame::Body,
    })
}

/// Independent per-pixel depth noise, standard deviation in raw units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DepthNoiseModel {
    pub sigma_d: f64,
}

/// First-order covariance `σ_d² J Jᵀ` of the back-projected point at `pixel`,
/// with `J = K⁻¹ũ / s_depth`.
pub fn propagate_uncertainty(
    intr: &CameraIntrinsics,
    pixel: (usize, usize),
    noise: &DepthNoiseModel,
    depth_scale: f64,
) -> Result<Matrix3<f64>> {
    let (u, v) = pixel;
    if u >= intr.width || v >= intr.height {
        return Err(Error::OutOfBounds {
            u,
            v,
            width: intr.width,
            height: intr.height,
        });
    }
    if !(noise.sigma_d.is_finite() && noise.sigma_d >= 0.0) {
        return Err(Error::invalid("sigma_d must be non-negative"));
    }
    if !(depth_scale.is_finite() && depth_scale > 0.0) {
        return Err(Error::invalid("depth_scale must be positive"));
    }
    let jac = intr.inverse_matrix()? * Vector3::new(u as f64, v as f64, 1.0) / depth_scale;
    Ok(jac * jac.transpose() * (noise.sigma_d * noise.sigma_d))
}

/// Greedy farthest-point sampling seeded at index 0; ties go to the lowest index.
pub fn farthest_point_sample(cloud: &PointCloud, m: usize) -> Result<PointCloud> {
    let n = cloud.len();
    if m > n {
        return Err(Error::invalid(format!("cannot sample {m} points from a cloud of {n}")));
    }
    let mut selected = Vec::with_capacity(m);
    if m > 0 {
        let mut min_d2 = vec![f64::INFINITY; n];
        let mut taken = vec![false; n];
        let mut next = 0;
        for _ in 0..m {
            selected.push(next);
            taken[next] = true;
            let anchor = cloud.points[next];
            let mut best = None::<(usize, f64)>;
            for (i, p) in cloud.points.iter().enumerate() {
                if taken[i] {
                    continue;
                }
                let d2 = (p - anchor).norm_squared();
                if d2 < min_d2[i] {
                    min_d2[i] = d2;
                }
                if best.is_none_or(|(_, b)| min_d2[i] > b) {
                    best = Some((i, min_d2[i]));
                }
            }
            if let Some((i, _)) = best {
                next = i;
            }
        }
    }
    Ok(PointCloud {
        points: selected.into_iter().map(|i| cloud.points[i]).collect(),
        frame: cloud.frame,
    })
}

/// Replace every occupied voxel (key `floor(p / voxel_size)`) by the centroid
/// of its members. Output order follows first occupancy.
pub fn voxel_downsample(cloud: &PointCloud, voxel_size: f64) -> Result<PointCloud> {
    if !(voxel_size.is_finite() && voxel_size > 0.0) {
        return Err(Error::invalid(format!("voxel size must be positive, got {voxel_size}")));
    }
    let mut slots: HashMap<[i64; 3], usize> = HashMap::new();
    let mut sums: Vec<(Vector3<f64>, usize)> = Vec::new();
    for p in &cloud.points {
        let key = [
            (p.x / voxel_size).floor() as i64,
            (p.y / voxel_size).floor() as i64,
            (p.z / voxel_size).floor() as i64,
        ];
        let slot = *slots.entry(key).or_insert_with(|| {
            sums.push((Vector3::zeros(), 0));
            sums.len() - 1
        });
        sums[slot].0 += p;
        sums[slot].1 += 1;
    }
    Ok(PointCloud {
        points: sums.into_iter().map(|(s, n)| s / n as f64).collect(),
        frame: cloud.frame,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn identity_intr(w: usize, h: usize) -> CameraIntrinsics {
        CameraIntrinsics::new(1.0, 1.0, 0.0, 0.0, w, h).unwrap()
    }

    fn cloud(pts: &[[f64; 3]]) -> PointCloud {
        PointCloud::new(
            pts.iter().map(|p| Vector3::new(p[0], p[1], p[2])).collect(),
            CloudFrame::Camera,
        )
        .unwrap()
    }

    #[test]
    fn direction_matrix_examples() {
        let dm = build_direction_matrix(&identity_intr(4, 4), false).unwrap();
        assert_eq!(dm.direction(0, 0), Vector3::new(0.0, 0.0, 1.0));
        assert_eq!(dm.direction(2, 3), Vector3::new(2.0, 3.0, 1.0));
        let intr = CameraIntrinsics::new(600.0, 600.0, 320.0, 240.0, 640, 480).unwrap();
        let dm = build_direction_matrix(&intr, false).unwrap();
        assert!((dm.direction(320, 240) - Vector3::new(0.0, 0.0, 1.0)).norm() < 1e-15);
        assert!(dm.dirs().iter().all(|d| d.z == 1.0));
    }

    #[test]
    fn zero_focal_rejected() {
        let intr = CameraIntrinsics {
            fx: 0.0,
            fy: 1.0,
            cx: 0.0,
            cy: 0.0,
            width: 2,
            height: 2,
            distortion: None,
        };
        assert!(matches!(
            build_direction_matrix(&intr, false),
            Err(Error::InvalidIntrinsics(_))
        ));
    }

    #[test]
    fn undistortion_inverts_distortion() {
        let intr = CameraIntrinsics::new(300.0, 310.0, 160.0, 120.0, 320, 240)
            .unwrap()
            .with_distortion([-0.12, 0.03, 0.001, -0.0005, 0.0]);
        let dm = build_direction_matrix(&intr, true).unwrap();
        assert!(dm.distortion_applied());
        for &(u, v) in &[(0usize, 0usize), (50, 200), (319, 239), (160, 120)] {
            let d = dm.direction(u, v);
            let (pu, pv) = intr.distort_pixel(d.x * intr.fx + intr.cx, d.y * intr.fy + intr.cy);
            assert!(
                (pu - u as f64).abs() < 1e-3 && (pv - v as f64).abs() < 1e-3,
                "{u},{v} -> {pu},{pv}"
            );
        }
        // Without the flag the coefficients are ignored.
        let plain = build_direction_matrix(&intr, false).unwrap();
        assert!(!plain.distortion_applied());
    }

    #[test]
    fn backproject_examples() {
        let intr = identity_intr(3, 3);
        let dm = build_direction_matrix(&intr, false).unwrap();
        let mut depth = DepthImage::zeros(3, 3, 1.0).unwrap();
        depth.set(0, 0, 5);
        let pc = backproject(&dm, &depth, 1).unwrap();
        assert_eq!(pc.points, vec![Vector3::new(0.0, 0.0, 5.0)]);

        let empty = DepthImage::zeros(3, 3, 1.0).unwrap();
        assert!(backproject(&dm, &empty, 1).unwrap().is_empty());

        let other = DepthImage::zeros(4, 3, 1.0).unwrap();
        assert!(matches!(backproject(&dm, &other, 1), Err(Error::Shape(_))));
        assert!(backproject(&dm, &depth, 0).is_err());
    }

    #[test]
    fn ramp_stride_five_matches_brute_force() {
        let intr = CameraIntrinsics::new(8.0, 9.0, 4.5, 5.0, 10, 10).unwrap();
        let data: Vec<u16> = (0..100)
            .map(|i| 1000 + (i % 10) as u16 * 10 + (i / 10) as u16)
            .collect();
        let depth = DepthImage::new(10, 10, data, 1000.0).unwrap();
        let pc = backproject(&build_direction_matrix(&intr, false).unwrap(), &depth, 5).unwrap();
        assert_eq!(pc.len(), 4);
        let mut expected = Vec::new();
        for v in [0usize, 5] {
            for u in [0usize, 5] {
                let z = f64::from(depth.get(u, v)) / 1000.0;
                expected.push(Vector3::new(z * (u as f64 - 4.5) / 8.0, z * (v as f64 - 5.0) / 9.0, z));
            }
        }
        for (p, e) in pc.points.iter().zip(&expected) {
            assert!((p - e).amax() < 1e-12);
        }
    }

    #[test]
    fn transform_examples() {
        let c = cloud(&[[0.0, 0.0, 1.0], [1.0, 2.0, 3.0]]);
        let same = transform_to_body(&c, &ExtrinsicTransform::identity()).unwrap();
        assert_eq!(same.points, c.points);
        assert_eq!(same.frame, CloudFrame::Body);
        assert!(matches!(
            transform_to_body(&same, &ExtrinsicTransform::identity()),
            Err(Error::InvalidState(_))
        ));

        let t = ExtrinsicTransform::new(Matrix3::identity(), Vector3::new(1.0, 0.0, 0.0)).unwrap();
        let moved = transform_to_body(&cloud(&[[0.0, 0.0, 1.0]]), &t).unwrap();
        assert_eq!(moved.points[0], Vector3::new(1.0, 0.0, 1.0));

        let (s, co) = FRAC_PI_2.sin_cos();
        let yaw = Matrix3::new(co, -s, 0.0, s, co, 0.0, 0.0, 0.0, 1.0);
        let r = ExtrinsicTransform::new(yaw, Vector3::zeros()).unwrap();
        let rotated = transform_to_body(&cloud(&[[1.0, 0.0, 0.0]]), &r).unwrap();
        assert!((rotated.points[0] - Vector3::new(0.0, 1.0, 0.0)).amax() < 1e-12);

        assert!(ExtrinsicTransform::new(Matrix3::identity() * 2.0, Vector3::zeros()).is_err());
    }

    #[test]
    fn uncertainty_examples() {
        let intr = identity_intr(4, 4);
        let zero = propagate_uncertainty(&intr, (1, 1), &DepthNoiseModel { sigma_d: 0.0 }, 1.0).unwrap();
        assert_eq!(zero, Matrix3::zeros());
        let cov = propagate_uncertainty(&intr, (0, 0), &DepthNoiseModel { sigma_d: 2.0 }, 1.0).unwrap();
        assert_eq!(cov, Matrix3::from_diagonal(&Vector3::new(0.0, 0.0, 4.0)));
        let a = propagate_uncertainty(&intr, (3, 2), &DepthNoiseModel { sigma_d: 1.5 }, 1.0).unwrap();
        let b = propagate_uncertainty(&intr, (3, 2), &DepthNoiseModel { sigma_d: 3.0 }, 1.0).unwrap();
        assert_eq!(b, a * 4.0);
        assert!(matches!(
            propagate_uncertainty(&intr, (4, 0), &DepthNoiseModel { sigma_d: 1.0 }, 1.0),
            Err(Error::OutOfBounds { .. })
        ));
    }

    #[test]
    fn fps_examples() {
        let line = cloud(&[[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [2.0, 0.0, 0.0], [10.0, 0.0, 0.0]]);
        let xs = |pc: PointCloud| pc.points.iter().map(|p| p.x).collect::<Vec<_>>();
        assert_eq!(xs(farthest_point_sample(&line, 2).unwrap()), vec![0.0, 10.0]);
        // After {0, 10}: point 1 has min-distance 1, point 2 has 2.
        assert_eq!(xs(farthest_point_sample(&line, 3).unwrap()), vec![0.0, 10.0, 2.0]);
        assert_eq!(xs(farthest_point_sample(&line, 4).unwrap()), vec![0.0, 10.0, 2.0, 1.0]);
        assert!(farthest_point_sample(&line, 5).is_err());
        assert!(farthest_point_sample(&line, 0).unwrap().is_empty());
    }

    #[test]
    fn fps_tie_breaks_by_lowest_index() {
        let sym = cloud(&[[0.0, 0.0, 0.0], [-1.0, 0.0, 0.0], [1.0, 0.0, 0.0]]);
        let out = farthest_point_sample(&sym, 2).unwrap();
        assert_eq!(out.points[1].x, -1.0);
    }

    #[test]
    fn voxel_examples() {
        let c = cloud(&[[0.1, 0.0, 0.0], [0.3, 0.0, 0.0]]);
        let out = voxel_downsample(&c, 0.5).unwrap();
        assert_eq!(out.len(), 1);
        assert!((out.points[0] - Vector3::new(0.2, 0.0, 0.0)).amax() < 1e-15);

        let spread = cloud(&[[0.1, 0.0, 0.0], [2.3, 0.0, 0.0]]);
        assert_eq!(voxel_downsample(&spread, 0.5).unwrap().len(), 2);

        let big = voxel_downsample(&cloud(&[[0.1, 0.2, 0.3], [0.4, 0.1, 0.2], [0.2, 0.2, 0.2]]), 100.0).unwrap();
        assert_eq!(big.len(), 1);
        assert!(voxel_downsample(&c, 0.0).is_err());
        assert!(voxel_downsample(&c, -1.0).is_err());
    }

    #[test]
    fn pgm_round_trip_and_layout() {
        let img = DepthImage::new(3, 2, vec![0, 1, 256, 65535, 1234, 7], 1000.0).unwrap();
        let mut bytes = Vec::new();
        img.write_pgm(&mut bytes).unwrap();
        assert!(bytes.starts_with(b"P5\n3 2\n65535\n"));
        assert_eq!(&bytes[bytes.len() - 12..bytes.len() - 8], &[0x00, 0x00, 0x00, 0x01]);
        assert_eq!(&bytes[bytes.len() - 10..bytes.len() - 8], &[0x00, 0x01]);
        let back = DepthImage::read_pgm(&bytes[..], 1000.0, Path::new("mem")).unwrap();
        assert_eq!(back, img);
    }

    #[test]
    fn pgm_with_comments_and_truncation() {
        let mut bytes = b"P5\n# depth\n2 1 # dims\n65535\n".to_vec();
        bytes.extend_from_slice(&[0x01, 0x02, 0x00, 0x03]);
        let img = DepthImage::read_pgm(&bytes[..], 1.0, Path::new("mem")).unwrap();
        assert_eq!(img.data(), &[0x0102, 3]);
        assert!(DepthImage::read_pgm(&bytes[..bytes.len() - 1], 1.0, Path::new("mem")).is_err());
        assert!(DepthImage::read_pgm(&b"P2\n1 1\n255\n0"[..], 1.0, Path::new("mem")).is_err());
    }
}
