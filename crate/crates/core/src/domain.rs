//! Coordinate domains centred at the basepoint and their starlike certificates.

use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};
use crate::geometry::{MetricKind, MetricModel, Point};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum Domain {
    GeodesicDisc {
        radius: f64,
    },
    GeodesicAnnulus {
        inner: f64,
        outer: f64,
    },
    /// `ρ ∈ [rho.0, rho.1]`, `θ ∈ [theta.0, theta.1]`. A zero inner radius
    /// puts the pole at the apex of a sector.
    PolarRectangle {
        rho: (f64, f64),
        theta: (f64, f64),
    },
}

impl Domain {
    pub fn validate(&self, model: &MetricModel) -> Result<()> {
        let (r0, r1) = self.radial_range();
        if !(r0.is_finite() && r1.is_finite()) || r0 < 0.0 {
            return Err(Error::DegenerateDomain(format!("invalid radial range [{r0}, {r1}]")));
        }
        if r0 >= r1 {
            return Err(Error::DegenerateDomain(format!(
                "inner radius {r0} is not below outer radius {r1}"
            )));
        }
        if r1 >= model.chart_limit() {
            return Err(Error::DegenerateDomain(format!(
                "outer radius {r1} reaches the chart limit {}",
                model.chart_limit()
            )));
        }
        if let Domain::GeodesicAnnulus { inner, .. } = *self {
            if inner <= 0.0 {
                return Err(Error::DegenerateDomain("annulus inner radius must be positive".into()));
            }
        }
        if let Domain::PolarRectangle { theta: (t0, t1), .. } = *self {
            if !(t1 > t0) {
                return Err(Error::DegenerateDomain(format!("empty angular range [{t0}, {t1}]")));
            }
            if t1 - t0 >= TAU {
                return Err(Error::DegenerateDomain(
                    "angular range of a polar rectangle must be shorter than 2π; use a disc or annulus"
                        .into(),
                ));
            }
        }
        Ok(())
    }

    pub fn radial_range(&self) -> (f64, f64) {
        match *self {
            Domain::GeodesicDisc { radius } => (0.0, radius),
            Domain::GeodesicAnnulus { inner, outer } => (inner, outer),
            Domain::PolarRectangle { rho, .. } => rho,
        }
    }

    /// Angular range and whether it wraps around.
    pub fn angular_range(&self) -> ((f64, f64), bool) {
        match *self {
            Domain::PolarRectangle { theta, .. } => (theta, false),
            _ => ((0.0, TAU), true),
        }
    }

    pub fn contains_pole(&self) -> bool {
        self.radial_range().0 == 0.0
    }

    fn angle_in_range(&self, theta: f64) -> bool {
        let ((t0, t1), periodic) = self.angular_range();
        if periodic {
            return true;
        }
        let mut t = theta;
        while t < t0 {
            t += TAU;
        }
        while t > t0 + TAU {
            t -= TAU;
        }
        t <= t1 + 1e-12
    }

    /// Closed-domain membership of a point given in polar coordinates.
    pub fn contains_polar(&self, rho: f64, theta: f64) -> bool {
        let (r0, r1) = self.radial_range();
        if rho < r0 - 1e-12 || rho > r1 + 1e-12 {
            return false;
        }
        rho == 0.0 || self.angle_in_range(theta)
    }

    /// Interior membership (strict in ρ, strict in θ for sectors).
    pub fn interior_polar(&self, rho: f64, theta: f64) -> bool {
        let (r0, r1) = self.radial_range();
        let ((t0, t1), periodic) = self.angular_range();
        match *self {
            Domain::GeodesicDisc { radius } => rho < radius,
            Domain::GeodesicAnnulus { inner, outer } => rho > inner && rho < outer,
            Domain::PolarRectangle { .. } => {
                if !(rho > r0 && rho < r1) || periodic {
                    return false;
                }
                let mut t = theta;
                while t < t0 {
                    t += TAU;
                }
                t > t0 && t < t1
            }
        }
    }
}

/// Outcome of a starlike check. `Undecided` is an explicit non-answer for
/// configurations outside the supported families.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum StarlikeVerdict {
    Certified { reason: String },
    Counterexample { point: Point, reason: String },
    Undecided { reason: String },
}

impl StarlikeVerdict {
    pub fn is_certified(&self) -> bool {
        matches!(self, StarlikeVerdict::Certified { .. })
    }
}

/// Decides whether `domain` is starlike with respect to `x0`.
///
/// Supported: any pole-centred family with `x0` at the pole (radial geodesics
/// are minimizing and stay in the domain), and convex/non-convex flat
/// domains checked by segment sampling. The apex of a polar sector is
/// accepted as centre even though it lies on the boundary of the sector.
pub fn starlike_check(model: &MetricModel, domain: &Domain, x0: Point) -> Result<StarlikeVerdict> {
    domain.validate(model)?;
    let (rho0, theta0) = model.polar(x0);
    let at_pole = rho0 < 1e-12;
    let apex = at_pole && matches!(domain, Domain::PolarRectangle { rho: (r, _), .. } if *r == 0.0);
    if !(domain.interior_polar(rho0, theta0) || apex) {
        return Err(Error::Precondition(format!(
            "x0 = ({}, {}) is not interior to the domain",
            x0[0], x0[1]
        )));
    }
    if at_pole {
        return Ok(StarlikeVerdict::Certified {
            reason: "radial geodesics from the pole are minimizing and remain in a pole-centred domain"
                .into(),
        });
    }
    if !matches!(model.kind(), MetricKind::Flat) {
        return Ok(StarlikeVerdict::Undecided {
            reason: "off-pole centres on curved models are outside the supported families".into(),
        });
    }
    let convex = match *domain {
        Domain::GeodesicDisc { .. } => true,
        Domain::PolarRectangle {
            rho: (r0, _),
            theta: (t0, t1),
        } => r0 == 0.0 && t1 - t0 <= PI,
        Domain::GeodesicAnnulus { .. } => false,
    };
    if convex {
        return Ok(StarlikeVerdict::Certified {
            reason: "flat convex domain: straight segments stay inside".into(),
        });
    }
    // search for a boundary point whose segment from x0 leaves the domain
    let (r0, r1) = domain.radial_range();
    let ((t0, t1), _) = domain.angular_range();
    let n = 256;
    for a in 0..=n {
        for &rho in &[r0, 0.5 * (r0 + r1), r1] {
            let theta = t0 + (t1 - t0) * a as f64 / n as f64;
            let target = model.point_from_polar(rho, theta);
            for k in 1..200 {
                let s = k as f64 / 200.0;
                let p = [x0[0] + s * (target[0] - x0[0]), x0[1] + s * (target[1] - x0[1])];
                let (pr, pt) = model.polar(p);
                if !domain.contains_polar(pr, pt) {
                    return Ok(StarlikeVerdict::Counterexample {
                        point: target,
                        reason: format!(
                            "segment from x0 leaves the domain at ({:.4}, {:.4})",
                            p[0], p[1]
                        ),
                    });
                }
            }
        }
    }
    Ok(StarlikeVerdict::Undecided {
        reason: "no counterexample found by segment sampling, but no certificate either".into(),
    })
}
