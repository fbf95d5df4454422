//! Convex compact values in `R^M`: points, boxes, balls and planar polygons.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Number of unit directions in the net used for polygon distances.
pub const DIRECTION_NET: usize = 4096;

#[derive(Debug, Clone, PartialEq)]
pub enum ConvexSet<T> {
    Singleton(Vec<T>),
    /// Box `prod [lower_i, upper_i]`; an interval when `M = 1`.
    Interval { lower: Vec<T>, upper: Vec<T> },
    Ball { center: Vec<T>, radius: T },
    /// Counterclockwise vertices of a convex polygon in the plane.
    Polygon(Vec<[T; 2]>),
}

fn cross<T: Scalar>(a: [T; 2], b: [T; 2]) -> T {
    a[0] * b[1] - a[1] * b[0]
}

fn sub<T: Scalar>(a: [T; 2], b: [T; 2]) -> [T; 2] {
    [a[0] - b[0], a[1] - b[1]]
}

impl<T: Scalar> ConvexSet<T> {
    pub fn interval(a: T, b: T) -> Result<Self> {
        let s = ConvexSet::Interval {
            lower: vec![a],
            upper: vec![b],
        };
        s.validate()?;
        Ok(s)
    }

    pub fn ball(center: Vec<T>, radius: T) -> Result<Self> {
        let s = ConvexSet::Ball { center, radius };
        s.validate()?;
        Ok(s)
    }

    pub fn polygon(vertices: Vec<[T; 2]>) -> Result<Self> {
        let s = ConvexSet::Polygon(vertices);
        s.validate()?;
        Ok(s)
    }

    /// Convex hull of a planar point cloud (monotone chain). Collinear and
    /// repeated points are dropped.
    pub fn convex_hull(points: &[[T; 2]]) -> Result<Self> {
        let mut pts = points.to_vec();
        pts.sort_by(|a, b| {
            a[0].partial_cmp(&b[0])
                .unwrap()
                .then(a[1].partial_cmp(&b[1]).unwrap())
        });
        pts.dedup();
        if pts.len() < 3 {
            return Err(Error::InvalidSet("hull needs three distinct points".into()));
        }
        let mut hull: Vec<[T; 2]> = Vec::with_capacity(2 * pts.len());
        for pass in 0..2 {
            let start = hull.len();
            let iter: Box<dyn Iterator<Item = &[T; 2]>> = if pass == 0 {
                Box::new(pts.iter())
            } else {
                Box::new(pts.iter().rev())
            };
            for p in iter {
                while hull.len() >= start + 2 {
                    let a = hull[hull.len() - 2];
                    let b = hull[hull.len() - 1];
                    if cross(sub(b, a), sub(*p, a)) <= T::zero() {
                        hull.pop();
                    } else {
                        break;
                    }
                }
                hull.push(*p);
            }
            hull.pop();
        }
        ConvexSet::polygon(hull)
    }

    pub fn dim(&self) -> usize {
        match self {
            ConvexSet::Singleton(p) => p.len(),
            ConvexSet::Interval { lower, .. } => lower.len(),
            ConvexSet::Ball { center, .. } => center.len(),
            ConvexSet::Polygon(_) => 2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |v: &[T]| v.iter().all(|x| x.is_finite());
        match self {
            ConvexSet::Singleton(p) => {
                if p.is_empty() || !finite(p) {
                    return Err(Error::InvalidSet("point must be finite and nonempty".into()));
                }
            }
            ConvexSet::Interval { lower, upper } => {
                if lower.is_empty() || lower.len() != upper.len() || !finite(lower) || !finite(upper)
                {
                    return Err(Error::InvalidSet("box bounds malformed".into()));
                }
                if let Some(i) = (0..lower.len()).find(|&i| lower[i] > upper[i]) {
                    return Err(Error::InvalidSet(format!(
                        "box side {i} has lower {} > upper {}",
                        lower[i], upper[i]
                    )));
                }
            }
            ConvexSet::Ball { center, radius } => {
                if center.is_empty() || !finite(center) || !(*radius >= T::zero()) || !radius.is_finite() {
                    return Err(Error::InvalidSet(format!("bad ball (radius {radius})")));
                }
            }
            ConvexSet::Polygon(v) => {
                let n = v.len();
                if n < 3 {
                    return Err(Error::InvalidSet(format!("polygon with {n} vertices")));
                }
                if v.iter().any(|p| !finite(p)) {
                    return Err(Error::InvalidSet("polygon vertex not finite".into()));
                }
                let mut turning = T::zero();
                for i in 0..n {
                    let e0 = sub(v[i], v[(i + n - 1) % n]);
                    let e1 = sub(v[(i + 1) % n], v[i]);
                    let c = cross(e0, e1);
                    if !(c > T::zero()) {
                        return Err(Error::InvalidSet(format!(
                            "polygon is not strictly convex and counterclockwise at vertex {i}"
                        )));
                    }
                    turning = turning + c.atan2(e0[0] * e1[0] + e0[1] * e1[1]);
                }
                let two_pi = T::lit(2.0) * T::PI();
                if (turning - two_pi).abs() > T::lit(1e-6) {
                    return Err(Error::InvalidSet(format!(
                        "polygon winds by {turning} (self-intersecting)"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Steiner point.
    pub fn steiner(&self) -> Result<Vec<T>> {
        self.validate()?;
        Ok(match self {
            ConvexSet::Singleton(p) => p.clone(),
            ConvexSet::Interval { lower, upper } => lower
                .iter()
                .zip(upper)
                .map(|(a, b)| (*a + *b) / T::lit(2.0))
                .collect(),
            ConvexSet::Ball { center, .. } => center.clone(),
            ConvexSet::Polygon(v) => {
                // vertex weights are the exterior angles (normal cone measures)
                let n = v.len();
                let (mut sx, mut sy, mut total) = (T::zero(), T::zero(), T::zero());
                for i in 0..n {
                    let e0 = sub(v[i], v[(i + n - 1) % n]);
                    let e1 = sub(v[(i + 1) % n], v[i]);
                    let a = cross(e0, e1).atan2(e0[0] * e1[0] + e0[1] * e1[1]);
                    sx = sx + a * v[i][0];
                    sy = sy + a * v[i][1];
                    total = total + a;
                }
                vec![sx / total, sy / total]
            }
        })
    }

    /// Support function `sup_{y in self} <d, y>` for a unit vector `d`.
    pub fn support(&self, d: &[T]) -> Result<T> {
        let norm = d.iter().fold(T::zero(), |s, x| s + *x * *x).sqrt();
        if (norm - T::one()).abs() > T::lit(1e-12).max(T::epsilon() * T::lit(8.0)) {
            return Err(Error::InvalidDirection(norm.to_f64().unwrap_or(f64::NAN)));
        }
        if d.len() != self.dim() {
            return Err(Error::InvalidSet(format!(
                "direction of dimension {} for a set in dimension {}",
                d.len(),
                self.dim()
            )));
        }
        Ok(self.support_unchecked(d))
    }

    fn support_unchecked(&self, d: &[T]) -> T {
        let dot = |p: &[T]| p.iter().zip(d).fold(T::zero(), |s, (a, b)| s + *a * *b);
        match self {
            ConvexSet::Singleton(p) => dot(p),
            ConvexSet::Interval { lower, upper } => d
                .iter()
                .enumerate()
                .fold(T::zero(), |s, (i, di)| {
                    s + *di * if *di > T::zero() { upper[i] } else { lower[i] }
                }),
            ConvexSet::Ball { center, radius } => dot(center) + *radius,
            ConvexSet::Polygon(v) => v
                .iter()
                .map(|p| p[0] * d[0] + p[1] * d[1])
                .fold(T::neg_infinity(), T::max),
        }
    }

    pub fn translate(&self, t: &[T]) -> Self {
        let sh = |p: &[T]| p.iter().zip(t).map(|(a, b)| *a + *b).collect::<Vec<T>>();
        match self {
            ConvexSet::Singleton(p) => ConvexSet::Singleton(sh(p)),
            ConvexSet::Interval { lower, upper } => ConvexSet::Interval {
                lower: sh(lower),
                upper: sh(upper),
            },
            ConvexSet::Ball { center, radius } => ConvexSet::Ball {
                center: sh(center),
                radius: *radius,
            },
            ConvexSet::Polygon(v) => {
                ConvexSet::Polygon(v.iter().map(|p| [p[0] + t[0], p[1] + t[1]]).collect())
            }
        }
    }

    /// Membership in the closed set up to `tol`.
    pub fn contains(&self, p: &[T], tol: T) -> bool {
        match self {
            ConvexSet::Singleton(q) => dist(p, q) <= tol,
            ConvexSet::Interval { lower, upper } => p
                .iter()
                .enumerate()
                .all(|(i, x)| *x >= lower[i] - tol && *x <= upper[i] + tol),
            ConvexSet::Ball { center, radius } => dist(p, center) <= *radius + tol,
            ConvexSet::Polygon(v) => {
                let n = v.len();
                (0..n).all(|i| {
                    let e = sub(v[(i + 1) % n], v[i]);
                    let len = (e[0] * e[0] + e[1] * e[1]).sqrt();
                    cross(e, sub([p[0], p[1]], v[i])) >= -tol * len
                })
            }
        }
    }

    /// Box corners `(lower, upper)` for point and box variants.
    fn as_box(&self) -> Option<(Vec<T>, Vec<T>)> {
        match self {
            ConvexSet::Singleton(p) => Some((p.clone(), p.clone())),
            ConvexSet::Interval { lower, upper } => Some((lower.clone(), upper.clone())),
            _ => None,
        }
    }
}

fn dist<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter()
        .zip(b)
        .fold(T::zero(), |s, (x, y)| s + (*x - *y) * (*x - *y))
        .sqrt()
}

/// `sup_{|d| = 1} sum_i |d_i| m_i`.
fn sup_abs_weighted<T: Scalar>(m: &[T]) -> T {
    if m.iter().any(|v| *v > T::zero()) {
        m.iter()
            .filter(|v| **v > T::zero())
            .fold(T::zero(), |s, v| s + *v * *v)
            .sqrt()
    } else {
        m.iter().copied().fold(T::neg_infinity(), T::max)
    }
}

/// `sup_d (support(a, d) - support(b, d))` for boxes.
fn box_box_excess<T: Scalar>(a: &(Vec<T>, Vec<T>), b: &(Vec<T>, Vec<T>)) -> T {
    let m: Vec<T> = (0..a.0.len())
        .map(|i| (a.1[i] - b.1[i]).max(b.0[i] - a.0[i]))
        .collect();
    sup_abs_weighted(&m)
}

/// Hausdorff distance. Closed forms for point, box and ball pairs; polygons
/// use a net of [`DIRECTION_NET`] directions.
pub fn hausdorff<T: Scalar>(a: &ConvexSet<T>, b: &ConvexSet<T>) -> Result<T> {
    a.validate()?;
    b.validate()?;
    if a.dim() != b.dim() {
        return Err(Error::InvalidSet(format!(
            "dimension mismatch {} vs {}",
            a.dim(),
            b.dim()
        )));
    }
    use ConvexSet::*;
    let d = match (a, b) {
        (Ball { center: c1, radius: r1 }, Ball { center: c2, radius: r2 }) => {
            dist(c1, c2) + (*r1 - *r2).abs()
        }
        (Ball { center, radius }, other) | (other, Ball { center, radius })
            if other.as_box().is_some() =>
        {
            let (lo, hi) = other.as_box().unwrap();
            let m_out: Vec<T> = (0..lo.len())
                .map(|i| (hi[i] - center[i]).max(center[i] - lo[i]))
                .collect();
            let m_in: Vec<T> = (0..lo.len())
                .map(|i| (center[i] - hi[i]).max(lo[i] - center[i]))
                .collect();
            (sup_abs_weighted(&m_out) - *radius)
                .max(*radius + sup_abs_weighted(&m_in))
                .max(T::zero())
        }
        _ => match (a.as_box(), b.as_box()) {
            (Some(ba), Some(bb)) => box_box_excess(&ba, &bb)
                .max(box_box_excess(&bb, &ba))
                .max(T::zero()),
            _ => {
                if a.dim() != 2 {
                    return Err(Error::InvalidSet("polygon distance needs M = 2".into()));
                }
                let mut worst = T::zero();
                for k in 0..DIRECTION_NET {
                    let th = T::lit(2.0) * T::PI() * T::count(k) / T::count(DIRECTION_NET);
                    let dir = [th.cos(), th.sin()];
                    let diff = (a.support_unchecked(&dir) - b.support_unchecked(&dir)).abs();
                    worst = worst.max(diff);
                }
                worst
            }
        },
    };
    Ok(d)
}

/// Lipschitz constant of the Steiner point map on convex bodies of `R^M`
/// under the Hausdorff metric: `2 Γ(M/2 + 1) / (√π Γ((M + 1)/2))`.
pub fn steiner_lipschitz_constant<T: Scalar>(m: usize) -> T {
    assert!(m >= 1, "dimension must be positive");
    // q(M) = Γ(M/2 + 1) / Γ(M/2 + 1/2) via the two-step recurrence
    let sqrt_pi = T::PI().sqrt();
    let mut q = if m % 2 == 1 {
        sqrt_pi / T::lit(2.0)
    } else {
        T::lit(2.0) / sqrt_pi
    };
    let mut k = if m % 2 == 1 { 1 } else { 2 };
    while k < m {
        let half = T::count(k) / T::lit(2.0);
        q = q * (half + T::one()) / (half + T::lit(0.5));
        k += 2;
    }
    T::lit(2.0) * q / sqrt_pi
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn square() -> ConvexSet<f64> {
        ConvexSet::polygon(vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]).unwrap()
    }

    fn random_polygon(rng: &mut ChaCha8Rng) -> ConvexSet<f64> {
        loop {
            let cx: f64 = rng.gen_range(-3.0..3.0);
            let cy: f64 = rng.gen_range(-3.0..3.0);
            let pts: Vec<[f64; 2]> = (0..rng.gen_range(3..12))
                .map(|_| [cx + rng.gen_range(-2.0..2.0), cy + rng.gen_range(-2.0..2.0)])
                .collect();
            if let Ok(p) = ConvexSet::convex_hull(&pts) {
                return p;
            }
        }
    }

    /// `(1/π) ∫ h(u) u dθ` by the midpoint rule.
    fn steiner_by_rotation(s: &ConvexSet<f64>) -> [f64; 2] {
        let n = 4096;
        let mut acc = [0.0, 0.0];
        for k in 0..n {
            let th = 2.0 * std::f64::consts::PI * (k as f64 + 0.5) / n as f64;
            let u = [th.cos(), th.sin()];
            let h = s.support(&u).unwrap();
            acc[0] += h * u[0];
            acc[1] += h * u[1];
        }
        let scale = 2.0 / n as f64;
        [acc[0] * scale, acc[1] * scale]
    }

    #[test]
    fn steiner_examples() {
        assert_eq!(ConvexSet::interval(2.0, 4.0).unwrap().steiner().unwrap(), vec![3.0]);
        assert_eq!(
            ConvexSet::ball(vec![1.0, 2.0], 5.0).unwrap().steiner().unwrap(),
            vec![1.0, 2.0]
        );
        let s = square().steiner().unwrap();
        assert_relative_eq!(s[0], 0.5, epsilon = 1e-15);
        assert_relative_eq!(s[1], 0.5, epsilon = 1e-15);
    }

    #[test]
    fn support_examples() {
        let b = ConvexSet::Interval {
            lower: vec![-1.0, -1.0],
            upper: vec![1.0, 1.0],
        };
        assert_eq!(b.support(&[1.0, 0.0]).unwrap(), 1.0);
        let ball = ConvexSet::ball(vec![0.0, 0.0], 2.0).unwrap();
        assert_eq!(ball.support(&[0.6, 0.8]).unwrap(), 2.0);
        let tri = ConvexSet::polygon(vec![[0.0, 0.0], [2.0, 0.0], [0.0, 2.0]]).unwrap();
        let r = 0.5f64.sqrt();
        assert_relative_eq!(tri.support(&[r, r]).unwrap(), 2.0f64.sqrt(), epsilon = 1e-15);
        assert!(matches!(tri.support(&[1.0, 1.0]), Err(Error::InvalidDirection(_))));
    }

    #[test]
    fn hausdorff_examples() {
        let a = ConvexSet::interval(0.0, 2.0).unwrap();
        let b = ConvexSet::interval(1.0, 3.0).unwrap();
        assert_eq!(hausdorff(&a, &a).unwrap(), 0.0);
        assert_eq!(hausdorff(&a, &b).unwrap(), 1.0);
        let b1 = ConvexSet::ball(vec![0.0, 0.0], 1.0).unwrap();
        let b2 = ConvexSet::ball(vec![0.0, 0.0], 2.0).unwrap();
        assert_eq!(hausdorff(&b1, &b2).unwrap(), 1.0);
    }

    #[test]
    fn closed_forms_agree_with_brute_force() {
        // brute force: farthest sampled point of one set from the other
        let bx = ConvexSet::Interval {
            lower: vec![0.0, 0.0],
            upper: vec![2.0, 1.0],
        };
        let ball = ConvexSet::ball(vec![0.5, 0.3], 0.4).unwrap();
        let pt = ConvexSet::Singleton(vec![3.0, -1.0]);
        let dist_to_box = |p: [f64; 2]| {
            let dx = (0.0 - p[0]).max(p[0] - 2.0).max(0.0);
            let dy = (0.0 - p[1]).max(p[1] - 1.0).max(0.0);
            (dx * dx + dy * dy).sqrt()
        };
        let corners = [[0.0f64, 0.0], [2.0, 0.0], [2.0, 1.0], [0.0, 1.0]];
        let c = [0.5, 0.3];
        let far_corner = corners
            .iter()
            .map(|q| ((q[0] - c[0]).powi(2) + (q[1] - c[1]).powi(2)).sqrt() - 0.4)
            .fold(0.0, f64::max);
        let far_ball = (0..20000)
            .map(|k| {
                let th = 2.0 * std::f64::consts::PI * k as f64 / 20000.0;
                dist_to_box([c[0] + 0.4 * th.cos(), c[1] + 0.4 * th.sin()])
            })
            .fold(0.0, f64::max);
        assert_relative_eq!(
            hausdorff(&bx, &ball).unwrap(),
            far_corner.max(far_ball),
            epsilon = 1e-7
        );
        let far_pt = corners
            .iter()
            .map(|q| ((q[0] - 3.0).powi(2) + (q[1] + 1.0).powi(2)).sqrt())
            .fold(0.0, f64::max);
        assert_relative_eq!(hausdorff(&bx, &pt).unwrap(), far_pt, epsilon = 1e-14);
    }

    #[test]
    fn lipschitz_constants() {
        assert_relative_eq!(steiner_lipschitz_constant::<f64>(1), 1.0, epsilon = 1e-12);
        assert_relative_eq!(
            steiner_lipschitz_constant::<f64>(2),
            4.0 / std::f64::consts::PI,
            epsilon = 1e-12
        );
        assert_relative_eq!(steiner_lipschitz_constant::<f64>(3), 1.5, epsilon = 1e-12);
        // M = 4: 2 Γ(3) / (√π Γ(5/2)) = 16 / (3π)
        assert_relative_eq!(
            steiner_lipschitz_constant::<f64>(4),
            16.0 / (3.0 * std::f64::consts::PI),
            epsilon = 1e-12
        );
        assert_relative_eq!(steiner_lipschitz_constant::<f32>(2), 1.2732395, epsilon = 1e-6);
    }

    #[test]
    fn polygon_steiner_matches_rotation_average() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let p = random_polygon(&mut rng);
            let s = p.steiner().unwrap();
            let r = steiner_by_rotation(&p);
            assert!((s[0] - r[0]).abs() < 1e-6 && (s[1] - r[1]).abs() < 1e-6);
            assert!(p.contains(&s, 1e-9));
        }
    }

    #[test]
    fn invalid_polygons_rejected() {
        let cw = vec![[0.0, 0.0], [0.0, 1.0], [1.0, 1.0], [1.0, 0.0]];
        assert!(ConvexSet::polygon(cw).is_err());
        let bow = vec![[0.0, 0.0], [1.0, 1.0], [1.0, 0.0], [0.0, 1.0]];
        assert!(ConvexSet::polygon(bow).is_err());
        assert!(ConvexSet::polygon(vec![[0.0, 0.0], [1.0, 0.0]]).is_err());
        assert!(ConvexSet::interval(3.0, 1.0).is_err());
        assert!(ConvexSet::ball(vec![0.0], -1.0).is_err());
    }

    #[test]
    fn hull_drops_interior_and_collinear_points() {
        let pts = [[0.0, 0.0], [1.0, 0.0], [2.0, 0.0], [1.0, 1.0], [2.0, 2.0], [0.0, 2.0]];
        let ConvexSet::Polygon(v) = ConvexSet::convex_hull(&pts).unwrap() else {
            panic!("polygon expected");
        };
        assert_eq!(v, vec![[0.0, 0.0], [2.0, 0.0], [2.0, 2.0], [0.0, 2.0]]);
    }

    #[test]
    fn polygon_hausdorff_is_a_metric() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..100 {
            let a = random_polygon(&mut rng);
            let b = random_polygon(&mut rng);
            let c = random_polygon(&mut rng);
            let ab = hausdorff(&a, &b).unwrap();
            assert_eq!(hausdorff(&a, &a).unwrap(), 0.0);
            assert!((ab - hausdorff(&b, &a).unwrap()).abs() < 1e-12);
            assert!(ab <= hausdorff(&a, &c).unwrap() + hausdorff(&c, &b).unwrap() + 1e-6);
        }
    }
}
