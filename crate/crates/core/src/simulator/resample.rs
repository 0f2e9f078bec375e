use crate::error::{Error, Result};
use crate::record::RawLog;
use crate::types::{angle_diff, OrientationVec, Pose2D, Trajectory};

/// Resample a log into `q` poses spaced uniformly along the path.
///
/// Path length is measured as `√(dx² + dy² + (ρ·dψ)²)` with
/// `ρ = rotation_scale` (m/rad); `ρ = 0` is plain arc length. A positive `ρ`
/// keeps in-place rotations from collapsing into a single segment. Positions
/// interpolate linearly, headings along the shortest arc. If the path has no
/// length the samples are spread uniformly in time instead.
pub fn resample_trajectory(log: &RawLog, q: usize, rotation_scale: f64) -> Result<Trajectory> {
    if q < 2 {
        return Err(Error::invalid(format!("need at least 2 waypoints, got {q}")));
    }
    if log.len() < 2 {
        return Err(Error::invalid("log needs at least 2 samples"));
    }
    if !(rotation_scale.is_finite() && rotation_scale >= 0.0) {
        return Err(Error::invalid("rotation_scale must be non-negative"));
    }
    let samples = log.samples();
    let poses: Vec<Pose2D> = samples.iter().map(|s| s.1).collect();

    let mut cum = Vec::with_capacity(poses.len());
    cum.push(0.0);
    for w in poses.windows(2) {
        let dpsi = angle_diff(w[1].psi, w[0].psi);
        let seg = (w[1].x - w[0].x).hypot(w[1].y - w[0].y).hypot(rotation_scale * dpsi);
        cum.push(cum[cum.len() - 1] + seg);
    }
    let total = cum[cum.len() - 1];
    if total <= 0.0 {
        let t0 = samples[0].0;
        cum = samples.iter().map(|s| s.0 - t0).collect();
    }
    let total = cum[cum.len() - 1];

    let mut out = Vec::with_capacity(q);
    let mut seg = 0;
    for j in 0..q {
        let pose = if j == 0 {
            poses[0]
        } else if j == q - 1 {
            poses[poses.len() - 1]
        } else {
            let target = total * j as f64 / (q - 1) as f64;
            while seg + 2 < cum.len() && cum[seg + 1] < target {
                seg += 1;
            }
            let (a, b) = (poses[seg], poses[seg + 1]);
            let len = cum[seg + 1] - cum[seg];
            let f = if len > 0.0 {
                ((target - cum[seg]) / len).clamp(0.0, 1.0)
            } else {
                0.0
            };
            Pose2D::new(
                a.x + f * (b.x - a.x),
                a.y + f * (b.y - a.y),
                a.psi + f * angle_diff(b.psi, a.psi),
            )
        };
        out.push(pose);
    }
    let positions = out.iter().map(|p| p.position()).collect();
    let orientations = out
        .iter()
        .map(|p| OrientationVec::from_angle(p.psi))
        .collect::<Result<_>>()?;
    Trajectory::new(positions, orientations)
}
