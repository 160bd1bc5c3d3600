//! Fixed points certified by the degree of the displacement field.

use std::f64::consts::{FRAC_PI_2, TAU};

use serde::{Deserialize, Serialize};

use super::estimates::newton_fixed_point;
use super::{DiffeoMap, DynamicsError};
use crate::geom::{BoundingBox, ClosedPolyCurve, Point2};
use crate::untangle::SimpleLoop;
use crate::winding::turning_sum;

/// Initial samples per boundary segment.
const SEGMENT_SAMPLES: usize = 64;
const MAX_REFINE_DEPTH: u32 = 24;
/// Initial grid over the bounding box of the loop.
const GRID: usize = 8;
const MAX_CELLS: usize = 200_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FixedPointCertificate {
    pub point: Point2,
    pub residual: f64,
    /// Degree of `x -> f(x) - x` along the input loop.
    pub degree: i64,
    /// Degree along the boundary of the final cell.
    pub cell_degree: i64,
    pub cell_diameter: f64,
    pub cells_examined: usize,
}

/// Winding number of `x -> f(x) - x` along the closed polygon `vertices`.
///
/// Each edge is sampled at least 64 times and bisected wherever consecutive
/// displacement directions differ by more than `pi / 2`.
pub fn displacement_degree(f: &DiffeoMap, vertices: &[Point2], margin: f64) -> Result<i64, DynamicsError> {
    let n = vertices.len();
    if n < 2 {
        return Err(DynamicsError::InvalidParameter("loop needs at least 2 vertices".into()));
    }
    let disp = |x: Point2| -> Result<Point2, DynamicsError> {
        let d = f.displacement(x);
        if !d.is_finite() {
            return Err(DynamicsError::NonFiniteValue { at: x });
        }
        if d.norm() <= margin {
            return Err(DynamicsError::BoundaryFixedPoint { at: x });
        }
        Ok(d)
    };
    let mut total = 0.0;
    for i in 0..n {
        let a = vertices[i];
        let b = vertices[(i + 1) % n];
        let mut x0 = a;
        let mut d0 = disp(a)?;
        for k in 1..=SEGMENT_SAMPLES {
            let x1 = if k == SEGMENT_SAMPLES { b } else { a.lerp(b, k as f64 / SEGMENT_SAMPLES as f64) };
            let d1 = disp(x1)?;
            total += turn(&disp, x0, d0, x1, d1, 0)?;
            x0 = x1;
            d0 = d1;
        }
    }
    let turns = total / TAU;
    let degree = turns.round();
    let residual = (turns - degree).abs();
    if residual >= 0.25 {
        return Err(DynamicsError::AmbiguousDegree { residual });
    }
    Ok(degree as i64)
}

fn turn(
    disp: &impl Fn(Point2) -> Result<Point2, DynamicsError>,
    x0: Point2,
    d0: Point2,
    x1: Point2,
    d1: Point2,
    depth: u32,
) -> Result<f64, DynamicsError> {
    let angle = d0.cross(d1).atan2(d0.dot(d1));
    if angle.abs() <= FRAC_PI_2 || depth >= MAX_REFINE_DEPTH {
        return Ok(angle);
    }
    let xm = x0.lerp(x1, 0.5);
    let dm = disp(xm)?;
    Ok(turn(disp, x0, d0, xm, dm, depth + 1)? + turn(disp, xm, dm, x1, d1, depth + 1)?)
}

/// Locates a fixed point of `f` inside the disk bounded by `lp`.
pub fn fixed_point_in_disk(f: &DiffeoMap, lp: &SimpleLoop, tol: f64) -> Result<FixedPointCertificate, DynamicsError> {
    fixed_point_in_curve(f, &lp.curve, tol)
}

/// Locates a fixed point of `f` inside the region enclosed by `curve`.
///
/// The displacement degree along `curve` must be nonzero. A jittered grid
/// over the bounding box is refined by quadtree descent into cells of
/// nonzero boundary degree until they are smaller than `tol`; the cell
/// center is then polished by Newton's method.
pub fn fixed_point_in_curve(f: &DiffeoMap, curve: &ClosedPolyCurve, tol: f64) -> Result<FixedPointCertificate, DynamicsError> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(DynamicsError::InvalidParameter("tolerance must be positive".into()));
    }
    let degree = displacement_degree(f, curve.vertices(), tol)?;
    if degree == 0 {
        return Err(DynamicsError::ZeroDegree);
    }
    let inside = |x: Point2| turning_sum(curve.vertices(), x).round() != 0.0;
    let bb = curve.bbox();
    let (w, h) = (bb.width(), bb.height());
    let region = BoundingBox::new(
        Point2::new(bb.min.x - 0.0123 * w, bb.min.y - 0.0171 * h),
        Point2::new(bb.max.x + 0.0371 * w, bb.max.y + 0.0293 * h),
    );

    let mut cells_examined = 0;
    let mut jitter = 0usize;
    let mut stack: Vec<(BoundingBox, i64)> = Vec::new();
    let initial = split(&region, GRID, GRID, &mut jitter);
    push_nonzero(f, initial, &inside, &mut stack, &mut cells_examined)?;

    let mut best: Option<FixedPointCertificate> = None;
    while let Some((cell, cell_degree)) = stack.pop() {
        if cells_examined > MAX_CELLS {
            break;
        }
        let diameter = cell.diagonal();
        if diameter < tol {
            let center = cell.center();
            let point = newton_fixed_point(f, center, 20)
                .filter(|x| x.distance(center) <= diameter.max(tol))
                .unwrap_or(center);
            let residual = f.displacement(point).norm();
            let cert = FixedPointCertificate {
                point,
                residual,
                degree,
                cell_degree,
                cell_diameter: diameter,
                cells_examined,
            };
            if inside(point) && residual < tol {
                return Ok(cert);
            }
            if best.as_ref().is_none_or(|b| residual < b.residual) {
                best = Some(cert);
            }
            continue;
        }
        let children = split(&cell, 2, 2, &mut jitter);
        push_nonzero(f, children, &inside, &mut stack, &mut cells_examined)?;
    }
    Err(DynamicsError::LocalizationFailure {
        step: 0,
        trace: vec![match best {
            Some(b) => format!("best candidate {} has residual {:e}", b.point, b.residual),
            None => "no cell of nonzero degree converged".into(),
        }],
    })
}

fn push_nonzero(
    f: &DiffeoMap,
    cells: Vec<BoundingBox>,
    inside: &impl Fn(Point2) -> bool,
    stack: &mut Vec<(BoundingBox, i64)>,
    examined: &mut usize,
) -> Result<(), DynamicsError> {
    let mut found: Vec<(BoundingBox, i64, bool)> = Vec::new();
    for cell in cells {
        *examined += 1;
        let degree = match displacement_degree(f, &cell.corners(), 0.0) {
            Ok(d) => d,
            Err(DynamicsError::BoundaryFixedPoint { at }) => {
                // Shrink onto an exact fixed point hit by a sample.
                let tiny = BoundingBox::centered(at, 0.0);
                found.push((tiny, 1, inside(at)));
                continue;
            }
            Err(e) => return Err(e),
        };
        if degree != 0 {
            found.push((cell, degree, inside(cell.center())));
        }
    }
    // Cells centered inside the loop are explored first.
    found.sort_by_key(|c| c.2);
    stack.extend(found.into_iter().map(|(c, d, _)| (c, d)));
    Ok(())
}

/// Splits `cell` into `nx * ny` sub-cells with slightly irregular cut lines.
fn split(cell: &BoundingBox, nx: usize, ny: usize, jitter: &mut usize) -> Vec<BoundingBox> {
    let mut cut = |n: usize, lo: f64, hi: f64| -> Vec<f64> {
        (0..=n)
            .map(|k| {
                if k == 0 {
                    return lo;
                }
                if k == n {
                    return hi;
                }
                *jitter += 1;
                let offset = ((*jitter as f64 * 0.618_033_988_749_895).fract() - 0.5) * 0.1;
                lo + (hi - lo) * (k as f64 + offset) / n as f64
            })
            .collect()
    };
    let xs = cut(nx, cell.min.x, cell.max.x);
    let ys = cut(ny, cell.min.y, cell.max.y);
    let mut out = Vec::with_capacity(nx * ny);
    for i in 0..nx {
        for j in 0..ny {
            out.push(BoundingBox::new(Point2::new(xs[i], ys[j]), Point2::new(xs[i + 1], ys[j + 1])));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{Mat2, MapSpec};

    fn square() -> SimpleLoop {
        let c = ClosedPolyCurve::from_coords(&[(-0.5, -0.5), (0.5, -0.5), (0.5, 0.5), (-0.5, 0.5)], 1e-9).unwrap();
        SimpleLoop::new(c, vec![0, 1, 2, 3])
    }

    #[test]
    fn contraction_fixed_point() {
        let f = DiffeoMap::from_spec(MapSpec::Affine {
            matrix: Mat2::scaling(0.5),
            offset: Point2::ORIGIN,
        })
        .unwrap();
        let cert = fixed_point_in_disk(&f, &square(), 1e-9).unwrap();
        assert_eq!(cert.degree, 1);
        assert!(cert.point.norm() < 1e-9, "{cert:?}");
    }

    #[test]
    fn rotation_center() {
        let c = Point2::new(0.1, -0.2);
        let f = DiffeoMap::rotation(c, 0.3);
        let cert = fixed_point_in_disk(&f, &square(), 1e-9).unwrap();
        assert!(cert.point.distance(c) < 1e-9);
    }

    #[test]
    fn translation_has_zero_degree() {
        let f = DiffeoMap::translation(Point2::new(0.01, 0.02));
        assert_eq!(fixed_point_in_disk(&f, &square(), 1e-9), Err(DynamicsError::ZeroDegree));
    }

    #[test]
    fn saddle_has_negative_degree() {
        let f = DiffeoMap::from_spec(MapSpec::Affine {
            matrix: Mat2::new(2.0, 0.0, 0.0, 0.5),
            offset: Point2::ORIGIN,
        })
        .unwrap();
        assert_eq!(displacement_degree(&f, square().vertices(), 1e-9).unwrap(), -1);
    }

    #[test]
    fn boundary_fixed_point_detected() {
        let f = DiffeoMap::rotation(Point2::new(0.5, 0.0), 0.3);
        assert!(matches!(
            fixed_point_in_disk(&f, &square(), 1e-9),
            Err(DynamicsError::BoundaryFixedPoint { .. })
        ));
    }
}
