//! Emitter arrays: single rings, open chains and coplanar ring pairs.

use std::f64::consts::{PI, TAU};
use std::ops::Range;

use nalgebra::{Rotation3, Vector3};
use num_complex::Complex64 as C64;

use crate::emfield::{check_finite, DipoleOrientation, Point3};
use crate::error::{Error, Result};

/// How dipoles are oriented on a ring.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PolarizationScheme {
    /// Perpendicular to the ring plane (along ẑ).
    Transverse,
    /// Along the local tangent of the ring.
    Tangential,
    /// Along the local outward radius.
    Radial,
    /// Same orientation for every site.
    Fixed(DipoleOrientation),
}

impl PolarizationScheme {
    /// Whether the scheme is invariant under the discrete rotations of the ring.
    pub fn is_symmetric(&self) -> bool {
        !matches!(self, PolarizationScheme::Fixed(_))
    }

    pub fn dipole_at(&self, theta: f64) -> DipoleOrientation {
        let (s, c) = theta.sin_cos();
        let v = match self {
            PolarizationScheme::Transverse => return DipoleOrientation::z(),
            PolarizationScheme::Fixed(p) => return *p,
            PolarizationScheme::Tangential => Vector3::new(-s, c, 0.0),
            PolarizationScheme::Radial => Vector3::new(c, s, 0.0),
        };
        DipoleOrientation::new(v.map(C64::from)).expect("unit vector")
    }
}

/// Geometric description of a ring-shaped group.
#[derive(Clone, Debug, PartialEq)]
pub struct RingMeta {
    pub center: Point3,
    pub radius: f64,
    /// Nearest-neighbour chord length.
    pub spacing: f64,
    /// Azimuthal angle of every site, in site order.
    pub angles: Vec<f64>,
    pub polarization: PolarizationScheme,
}

impl RingMeta {
    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }
}

/// A contiguous block of emitters, optionally carrying ring metadata.
#[derive(Clone, Debug, PartialEq)]
pub struct Group {
    pub range: Range<usize>,
    pub ring: Option<RingMeta>,
}

impl Group {
    pub fn len(&self) -> usize {
        self.range.len()
    }

    pub fn is_empty(&self) -> bool {
        self.range.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EmitterArray {
    positions: Vec<Point3>,
    dipoles: Vec<DipoleOrientation>,
    groups: Vec<Group>,
}

impl EmitterArray {
    /// Validates that positions and dipoles match in length and that the
    /// groups partition `0..len` in order.
    pub fn new(positions: Vec<Point3>, dipoles: Vec<DipoleOrientation>, groups: Vec<Group>) -> Result<Self> {
        if positions.len() != dipoles.len() {
            return Err(Error::invalid(format!(
                "{} positions but {} dipoles",
                positions.len(),
                dipoles.len()
            )));
        }
        for p in &positions {
            check_finite(p, "emitter position")?;
        }
        let mut next = 0;
        for g in &groups {
            if g.range.start != next || g.range.end < g.range.start {
                return Err(Error::invalid("groups must partition the emitter indices in order"));
            }
            if let Some(ring) = &g.ring {
                if ring.len() != g.len() {
                    return Err(Error::invalid("ring metadata does not match group size"));
                }
            }
            next = g.range.end;
        }
        if next != positions.len() {
            return Err(Error::invalid("groups must cover every emitter"));
        }
        Ok(Self { positions, dipoles, groups })
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn positions(&self) -> &[Point3] {
        &self.positions
    }

    pub fn dipoles(&self) -> &[DipoleOrientation] {
        &self.dipoles
    }

    pub fn groups(&self) -> &[Group] {
        &self.groups
    }

    pub fn group(&self, index: usize) -> Result<&Group> {
        self.groups
            .get(index)
            .ok_or_else(|| Error::invalid(format!("no group {index} (array has {})", self.groups.len())))
    }

    /// Ring metadata of group `index`, or an error if that group is not a ring.
    pub fn ring(&self, index: usize) -> Result<(&Group, &RingMeta)> {
        let group = self.group(index)?;
        let ring = group
            .ring
            .as_ref()
            .ok_or_else(|| Error::invalid(format!("group {index} is not a ring")))?;
        Ok((group, ring))
    }

    /// Smallest distance between any two emitters, `None` for a single emitter.
    pub fn min_separation(&self) -> Option<f64> {
        let mut best: Option<f64> = None;
        for (i, a) in self.positions.iter().enumerate() {
            for b in &self.positions[i + 1..] {
                let d = (a - b).norm();
                best = Some(best.map_or(d, |x| x.min(d)));
            }
        }
        best
    }

    /// Rigid motion `r ↦ R r + t`; dipoles are rotated along with positions.
    pub fn transformed(&self, rotation: &Rotation3<f64>, translation: &Point3) -> Self {
        let rot_c = rotation.matrix().map(C64::from);
        let positions = self.positions.iter().map(|p| rotation * p + translation).collect();
        let dipoles = self
            .dipoles
            .iter()
            .map(|d| DipoleOrientation::new(rot_c * d.vector()).expect("rotation preserves norm"))
            .collect();
        let groups = self
            .groups
            .iter()
            .map(|g| Group {
                range: g.range.clone(),
                ring: g.ring.as_ref().map(|r| RingMeta {
                    center: rotation * r.center + translation,
                    ..r.clone()
                }),
            })
            .collect();
        Self { positions, dipoles, groups }
    }

    fn concat(parts: Vec<EmitterArray>) -> Self {
        let mut positions = Vec::new();
        let mut dipoles = Vec::new();
        let mut groups = Vec::new();
        for part in parts {
            let offset = positions.len();
            positions.extend(part.positions);
            dipoles.extend(part.dipoles);
            groups.extend(part.groups.into_iter().map(|g| Group {
                range: g.range.start + offset..g.range.end + offset,
                ring: g.ring,
            }));
        }
        Self { positions, dipoles, groups }
    }
}

fn check_count_spacing(n: usize, d: f64) -> Result<()> {
    if n == 0 {
        return Err(Error::invalid("emitter count must be at least 1"));
    }
    if !(d > 0.0 && d.is_finite()) {
        return Err(Error::invalid(format!("inter-particle distance d must be positive, got {d}")));
    }
    Ok(())
}

/// Circumradius of a regular `n`-gon with side `d`.
pub fn ring_radius(n: usize, d: f64) -> f64 {
    if n == 1 {
        0.0
    } else {
        d / (2.0 * (PI / n as f64).sin())
    }
}

/// Regular ring of `n` emitters in the plane `z = center.z`.
///
/// Site `j` (zero-based) sits at azimuth `2πj/n + angular_offset`.
pub fn build_ring(
    n: usize,
    d: f64,
    polarization: PolarizationScheme,
    center: Point3,
    angular_offset: f64,
) -> Result<EmitterArray> {
    check_count_spacing(n, d)?;
    check_finite(&center, "ring center")?;
    if !angular_offset.is_finite() {
        return Err(Error::invalid("angular offset must be finite"));
    }
    let radius = ring_radius(n, d);
    let angles: Vec<f64> = (0..n).map(|j| TAU * j as f64 / n as f64 + angular_offset).collect();
    let positions = angles
        .iter()
        .map(|&t| center + Point3::new(radius * t.cos(), radius * t.sin(), 0.0))
        .collect();
    let dipoles = angles.iter().map(|&t| polarization.dipole_at(t)).collect();
    Ok(EmitterArray {
        positions,
        dipoles,
        groups: vec![Group {
            range: 0..n,
            ring: Some(RingMeta { center, radius, spacing: d, angles, polarization }),
        }],
    })
}

/// Open chain along x̂ starting at the origin.
pub fn build_chain(n: usize, d: f64, dipole: DipoleOrientation) -> Result<EmitterArray> {
    check_count_spacing(n, d)?;
    Ok(EmitterArray {
        positions: (0..n).map(|j| Point3::new(j as f64 * d, 0.0, 0.0)).collect(),
        dipoles: vec![dipole; n],
        groups: vec![Group { range: 0..n, ring: None }],
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Arrangement {
    /// A site of each ring faces a site of the other.
    SiteSite,
    /// The second ring is rotated by π/N so an edge midpoint faces the first ring's site.
    SiteEdge,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwoRingConfig {
    pub arrangement: Arrangement,
    /// Gap between the facing features along the center line, in wavelengths.
    pub gap: f64,
    pub n: usize,
    pub spacing: f64,
    pub polarization: PolarizationScheme,
}

impl TwoRingConfig {
    /// Center-to-center distance implied by the gap.
    pub fn center_distance(&self) -> f64 {
        let radius = ring_radius(self.n, self.spacing);
        match self.arrangement {
            Arrangement::SiteSite => 2.0 * radius + self.gap,
            Arrangement::SiteEdge => radius + self.gap + radius * (PI / self.n as f64).cos(),
        }
    }
}

/// Two coplanar rings with centers on the x axis.
///
/// Ring 1 is centered at the origin with its first site at `(R, 0, 0)`,
/// facing ring 2. Ring 2 starts at azimuth π (plus π/N for site-edge), so its
/// first site (or first edge) faces ring 1.
pub fn build_two_rings(config: &TwoRingConfig) -> Result<EmitterArray> {
    check_count_spacing(config.n, config.spacing)?;
    if !(config.gap > 0.0 && config.gap.is_finite()) {
        return Err(Error::invalid(format!("ring gap x must be positive, got {}", config.gap)));
    }
    let n = config.n;
    let distance = config.center_distance();
    let offset2 = match config.arrangement {
        Arrangement::SiteSite => PI,
        Arrangement::SiteEdge => PI + PI / n as f64,
    };
    let ring1 = build_ring(n, config.spacing, config.polarization, Point3::zeros(), 0.0)?;
    let ring2 = build_ring(n, config.spacing, config.polarization, Point3::new(distance, 0.0, 0.0), offset2)?;
    Ok(EmitterArray::concat(vec![ring1, ring2]))
}
