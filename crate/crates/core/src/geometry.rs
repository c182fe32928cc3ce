//! Spawn geometry, field-of-view tests and Fitts'-law difficulty.
//!
//! Angles are in degrees. Azimuth is negative to the left of central gaze,
//! elevation positive upward. Cartesian points are in meters with the origin
//! at the participant's head: `x` to the right, `y` up, `z` forward.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub const ORIGIN: Point3 = Point3 { x: 0.0, y: 0.0, z: 0.0 };

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn distance(&self, other: &Point3) -> f64 {
        (*self - *other).norm()
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    /// Linear interpolation, `t = 0` gives `self`, `t = 1` gives `other`.
    pub fn lerp(&self, other: &Point3, t: f64) -> Point3 {
        *self + (*other - *self) * t
    }
}

impl std::ops::Add for Point3 {
    type Output = Point3;
    fn add(self, rhs: Point3) -> Point3 {
        Point3::new(self.x + rhs.x, self.y + rhs.y, self.z + rhs.z)
    }
}

impl std::ops::Sub for Point3 {
    type Output = Point3;
    fn sub(self, rhs: Point3) -> Point3 {
        Point3::new(self.x - rhs.x, self.y - rhs.y, self.z - rhs.z)
    }
}

impl std::ops::Mul<f64> for Point3 {
    type Output = Point3;
    fn mul(self, k: f64) -> Point3 {
        Point3::new(self.x * k, self.y * k, self.z * k)
    }
}

/// Visible area and the band targets are drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FovConfig {
    /// Total horizontal width in degrees.
    pub horizontal_extent: f64,
    /// Total vertical height in degrees.
    pub vertical_extent: f64,
    pub spawn_azimuth_min: f64,
    pub spawn_azimuth_max: f64,
    pub reach_distance: f64,
}

impl Default for FovConfig {
    fn default() -> Self {
        Self {
            horizontal_extent: 30.0,
            vertical_extent: 50.0,
            spawn_azimuth_min: -15.0,
            spawn_azimuth_max: 0.0,
            reach_distance: 0.61,
        }
    }
}

impl FovConfig {
    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.horizontal_extent,
            self.vertical_extent,
            self.spawn_azimuth_min,
            self.spawn_azimuth_max,
            self.reach_distance,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return Err(Error::Config("fov: non-finite field".into()));
        }
        if self.horizontal_extent <= 0.0 {
            return Err(Error::Config("fov.horizontal_extent: must be > 0".into()));
        }
        if self.vertical_extent <= 0.0 {
            return Err(Error::Config("fov.vertical_extent: must be > 0".into()));
        }
        if self.reach_distance <= 0.0 {
            return Err(Error::Config("fov.reach_distance: must be > 0".into()));
        }
        if self.spawn_azimuth_min > self.spawn_azimuth_max {
            return Err(Error::Config(format!(
                "fov: empty spawn band [{}, {}]",
                self.spawn_azimuth_min, self.spawn_azimuth_max
            )));
        }
        let half = self.horizontal_extent / 2.0;
        if self.spawn_azimuth_min < -half || self.spawn_azimuth_max > half {
            return Err(Error::Config(format!(
                "fov: spawn band [{}, {}] exceeds ±{half}",
                self.spawn_azimuth_min, self.spawn_azimuth_max
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TargetLocation {
    pub azimuth: f64,
    pub elevation: f64,
    pub radius: f64,
    pub position: Point3,
}

impl TargetLocation {
    pub fn new(azimuth: f64, elevation: f64, radius: f64) -> Result<Self> {
        let position = spherical_to_cartesian(azimuth, elevation, radius)?;
        Ok(Self {
            azimuth,
            elevation,
            radius,
            position,
        })
    }

    /// Left of central gaze.
    pub fn is_contralesional(&self) -> bool {
        self.azimuth < 0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FittsParams {
    pub intercept_a: f64,
    pub slope_b: f64,
}

impl Default for FittsParams {
    fn default() -> Self {
        Self {
            intercept_a: 0.3,
            slope_b: 0.2,
        }
    }
}

/// Room extent, used only to keep the bouncing ball below the ceiling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoomBounds {
    pub width: f64,
    pub depth: f64,
    pub height: f64,
    /// Height of the participant's eyes above the floor.
    pub eye_height: f64,
}

impl Default for RoomBounds {
    fn default() -> Self {
        Self {
            width: 7.0,
            depth: 7.0,
            height: 3.5,
            eye_height: 1.2,
        }
    }
}

impl RoomBounds {
    /// Clamp a head-relative point to stay inside the room vertically.
    pub fn clamp(&self, p: Point3) -> Point3 {
        let floor = -self.eye_height;
        let ceiling = self.height - self.eye_height;
        Point3::new(
            p.x.clamp(-self.width / 2.0, self.width / 2.0),
            p.y.clamp(floor, ceiling),
            p.z.clamp(-self.depth / 2.0, self.depth / 2.0),
        )
    }
}

pub fn spherical_to_cartesian(azimuth: f64, elevation: f64, radius: f64) -> Result<Point3> {
    if !(azimuth.is_finite() && elevation.is_finite() && radius.is_finite()) {
        return Err(Error::Domain("non-finite spherical coordinate".into()));
    }
    if radius < 0.0 {
        return Err(Error::Domain(format!("negative radius {radius}")));
    }
    let (az, el) = (azimuth.to_radians(), elevation.to_radians());
    Ok(Point3::new(
        radius * el.cos() * az.sin(),
        radius * el.sin(),
        radius * el.cos() * az.cos(),
    ))
}

/// Inverse of [`spherical_to_cartesian`], returning `(azimuth, elevation, radius)`.
pub fn cartesian_to_spherical(p: Point3) -> (f64, f64, f64) {
    let radius = p.norm();
    if radius == 0.0 {
        return (0.0, 0.0, 0.0);
    }
    let azimuth = p.x.atan2(p.z).to_degrees();
    let elevation = (p.y / radius).clamp(-1.0, 1.0).asin().to_degrees();
    (azimuth, elevation, radius)
}

pub fn within_fov(azimuth: f64, elevation: f64, fov: &FovConfig) -> bool {
    azimuth.abs() <= fov.horizontal_extent / 2.0 && elevation.abs() <= fov.vertical_extent / 2.0
}

/// Uniform azimuth over the spawn band, uniform elevation over the vertical extent.
pub fn sample_spawn_location<R: Rng + ?Sized>(rng: &mut R, fov: &FovConfig) -> Result<TargetLocation> {
    fov.validate()?;
    let azimuth = if fov.spawn_azimuth_min == fov.spawn_azimuth_max {
        fov.spawn_azimuth_min
    } else {
        rng.random_range(fov.spawn_azimuth_min..=fov.spawn_azimuth_max)
    };
    let half_v = fov.vertical_extent / 2.0;
    let elevation = rng.random_range(-half_v..=half_v);
    TargetLocation::new(azimuth, elevation, fov.reach_distance)
}

/// The four fixed appearance locations: two azimuths in the left band
/// crossed with two elevations.
pub fn fixed_grid_locations(fov: &FovConfig) -> Result<[TargetLocation; 4]> {
    fov.validate()?;
    let left = fov.spawn_azimuth_min;
    let mid = (fov.spawn_azimuth_min + fov.spawn_azimuth_max) / 2.0;
    let el = fov.vertical_extent / 4.0;
    let r = fov.reach_distance;
    Ok([
        TargetLocation::new(left, el, r)?,
        TargetLocation::new(left, -el, r)?,
        TargetLocation::new(mid, el, r)?,
        TargetLocation::new(mid, -el, r)?,
    ])
}

/// Shannon index of difficulty, `log2(distance / width + 1)`.
pub fn fitts_index_of_difficulty(distance: f64, width: f64) -> Result<f64> {
    if !(width > 0.0) || !width.is_finite() {
        return Err(Error::Domain(format!("target width must be > 0, got {width}")));
    }
    if !(distance >= 0.0) || !distance.is_finite() {
        return Err(Error::Domain(format!("distance must be >= 0, got {distance}")));
    }
    Ok((distance / width + 1.0).log2())
}

pub fn fitts_movement_time(id: f64, params: &FittsParams) -> f64 {
    params.intercept_a + params.slope_b * id
}
