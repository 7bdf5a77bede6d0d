use num_complex::Complex64;
use std::f64::consts::PI;

use super::CoverPoint;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PathKind {
    /// Constant argument, modulus varies geometrically.
    Radial,
    /// Constant modulus around the origin, parametrized by angle.
    CircularArc,
    /// Arc of a circle around `center` (which must not enclose the origin),
    /// sweeping `sweep` radians.
    CenteredArc { center: Complex64, sweep: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ODEPath {
    pub start: CoverPoint,
    pub end: CoverPoint,
    pub kind: PathKind,
    pub steps_hint: usize,
}

const DEFAULT_STEPS_HINT: usize = 8;

impl ODEPath {
    pub fn radial(start: CoverPoint, end_modulus: f64) -> Self {
        ODEPath {
            start,
            end: CoverPoint::new(end_modulus, start.arg),
            kind: PathKind::Radial,
            steps_hint: DEFAULT_STEPS_HINT,
        }
    }

    pub fn arc(start: CoverPoint, end_arg: f64) -> Self {
        ODEPath {
            start,
            end: CoverPoint::new(start.modulus, end_arg),
            kind: PathKind::CircularArc,
            steps_hint: DEFAULT_STEPS_HINT,
        }
    }

    pub fn centered_arc(start: CoverPoint, center: Complex64, sweep: f64) -> Self {
        let rel = start.to_complex() - center;
        let endc = center + rel * Complex64::from_polar(1.0, sweep);
        ODEPath {
            start,
            end: CoverPoint::from_complex_near(endc, start.arg),
            kind: PathKind::CenteredArc { center, sweep },
            steps_hint: DEFAULT_STEPS_HINT.max((sweep.abs() / (PI / 8.0)).ceil() as usize),
        }
    }

    pub fn with_steps_hint(mut self, n: usize) -> Self {
        self.steps_hint = n.max(1);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Domain(format!("invalid path: {m}")));
        match self.kind {
            PathKind::Radial if (self.start.arg - self.end.arg).abs() > 1e-14 * (1.0 + self.start.arg.abs()) => {
                bad("radial path with differing arguments")
            }
            PathKind::CircularArc if (self.start.modulus - self.end.modulus).abs() > 1e-13 * self.start.modulus => {
                bad("circular arc with differing moduli")
            }
            PathKind::CenteredArc { center, .. } => {
                let rho = (self.start.to_complex() - center).norm();
                if rho >= center.norm() {
                    bad("recentred arc encloses the origin")
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }

    pub fn reversed(&self) -> Self {
        let kind = match self.kind {
            PathKind::CenteredArc { center, sweep } => PathKind::CenteredArc { center, sweep: -sweep },
            k => k,
        };
        ODEPath {
            start: self.end,
            end: self.start,
            kind,
            steps_hint: self.steps_hint,
        }
    }

    /// Point at parameter u ∈ [0, 1] and dz/du.
    pub(crate) fn point(&self, u: f64) -> (CoverPoint, Complex64) {
        match self.kind {
            PathKind::Radial => {
                let l = (self.end.modulus / self.start.modulus).ln();
                let p = CoverPoint::new(self.start.modulus * (u * l).exp(), self.start.arg);
                (p, p.to_complex() * l)
            }
            PathKind::CircularArc => {
                let d = self.end.arg - self.start.arg;
                let p = CoverPoint::new(self.start.modulus, self.start.arg + u * d);
                (p, Complex64::new(0.0, d) * p.to_complex())
            }
            PathKind::CenteredArc { center, sweep } => {
                let rel = (self.start.to_complex() - center) * Complex64::from_polar(1.0, u * sweep);
                let z = center + rel;
                (
                    CoverPoint::from_complex_near(z, self.start.arg),
                    Complex64::new(0.0, sweep) * rel,
                )
            }
        }
    }

    fn clearance(&self, s: Complex64) -> f64 {
        match self.kind {
            PathKind::Radial => {
                let sp = s * Complex64::from_polar(1.0, -self.start.arg);
                let lo = self.start.modulus.min(self.end.modulus);
                let hi = self.start.modulus.max(self.end.modulus);
                (sp - Complex64::new(sp.re.clamp(lo, hi), 0.0)).norm()
            }
            PathKind::CircularArc => {
                let r = self.start.modulus;
                let (a, b) = if self.start.arg <= self.end.arg {
                    (self.start.arg, self.end.arg)
                } else {
                    (self.end.arg, self.start.arg)
                };
                let phi = s.arg();
                let k = ((a - phi) / (2.0 * PI)).ceil();
                if phi + 2.0 * PI * k <= b {
                    (s.norm() - r).abs()
                } else {
                    (s - self.start.to_complex()).norm().min((s - self.end.to_complex()).norm())
                }
            }
            PathKind::CenteredArc { center, .. } => {
                let rho = (self.start.to_complex() - center).norm();
                ((s - center).norm() - rho).abs()
            }
        }
    }
}

fn wrap(x: f64) -> f64 {
    let y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y - 2.0 * PI
    } else {
        y
    }
}

/// Route from `from` to `to` (radial leg, then an arc at the target modulus)
/// with detours keeping every segment at distance ≥ `guard_frac`·|s| from each
/// singular point s. Detours never wind around the origin.
pub fn plan_path(from: CoverPoint, to: CoverPoint, singular: &[Complex64], guard_frac: f64) -> Result<Vec<ODEPath>> {
    let mut legs = Vec::new();
    if (from.modulus - to.modulus).abs() > 0.0 {
        legs.push(ODEPath::radial(from, to.modulus));
    }
    if from.arg != to.arg {
        legs.push(ODEPath::arc(CoverPoint::new(to.modulus, from.arg), to.arg));
    }
    let mut out = Vec::new();
    for leg in legs {
        route(leg, singular, guard_frac, 0, &mut out)?;
    }
    Ok(out)
}

fn route(leg: ODEPath, singular: &[Complex64], g: f64, depth: usize, out: &mut Vec<ODEPath>) -> Result<()> {
    let hit = singular.iter().copied().find(|s| leg.clearance(*s) < g * s.norm());
    let Some(s) = hit else {
        out.push(leg);
        return Ok(());
    };
    if depth > 6 {
        return Err(Error::SingularityOnPath(format!("no detour found around {s}")));
    }
    let f = 1.0 + 2.0 * g;
    let pieces = match leg.kind {
        PathKind::Radial => {
            let theta = leg.start.arg;
            let delta = wrap(s.arg() - theta);
            let turn = if delta > 0.0 { -0.8 } else { 0.8 };
            let a = ODEPath::arc(leg.start, theta + turn);
            let b = ODEPath::radial(a.end, leg.end.modulus);
            let c = ODEPath::arc(b.end, theta);
            vec![a, b, c]
        }
        PathKind::CircularArc => {
            let r = leg.start.modulus;
            let r2 = if r >= s.norm() { s.norm() * f } else { s.norm() / f };
            let a = ODEPath::radial(leg.start, r2);
            let b = ODEPath::arc(a.end, leg.end.arg);
            let c = ODEPath::radial(b.end, r);
            vec![a, b, c]
        }
        PathKind::CenteredArc { .. } => {
            return Err(Error::SingularityOnPath(format!("recentred arc passes near {s}")));
        }
    };
    for p in pieces {
        route(p, singular, g, depth + 1, out)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn straight_route_when_clear() {
        let p = plan_path(CoverPoint::real(100.0), CoverPoint::new(1.0, PI / 2.0), &[], 0.2).unwrap();
        assert_eq!(p.len(), 2);
        assert_eq!(p[0].kind, PathKind::Radial);
        assert_eq!(p[1].kind, PathKind::CircularArc);
        assert_eq!(p[1].end, CoverPoint::new(1.0, PI / 2.0));
    }

    #[test]
    fn detours_around_positive_axis_singularity() {
        let s = [Complex64::new(18.2, 0.0)];
        let p = plan_path(CoverPoint::real(1e4), CoverPoint::real(1.0), &s, 0.2).unwrap();
        assert!(p.len() > 1);
        for leg in &p {
            assert!(leg.clearance(s[0]) >= 0.2 * 18.2 - 1e-9);
            leg.validate().unwrap();
        }
        assert_eq!(p.last().unwrap().end.arg, 0.0);
        assert!((p.last().unwrap().end.modulus - 1.0).abs() < 1e-12);
        let total: f64 = p
            .iter()
            .filter(|l| l.kind == PathKind::CircularArc)
            .map(|l| l.end.arg - l.start.arg)
            .sum();
        assert!(total.abs() < 1e-12);
    }

    #[test]
    fn centered_arc_geometry() {
        let c = Complex64::new(-10.0, 0.0);
        let p = ODEPath::centered_arc(CoverPoint::from_complex(c + 2.0), c, 2.0 * PI);
        assert!((p.end.to_complex() - p.start.to_complex()).norm() < 1e-12);
        assert!((p.end.arg - p.start.arg).abs() < 1e-12);
        p.validate().unwrap();
    }
}
