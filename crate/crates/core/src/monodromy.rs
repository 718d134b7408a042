//! Monodromy of the inverse branches of a Blaschke product.
//!
//! The branches are labeled by the fiber over a base point. Each critical
//! value gets a loop (a straight leg out from the base, a small
//! counterclockwise circle, the same leg back) and the whole fiber is
//! continued around it; matching the end fiber against the start gives one
//! permutation generator per critical value.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::Config;
use crate::error::{Error, Result};
use crate::permgroup::Permutation;
use crate::polyroots::{self, CriticalData};
use crate::product::BlaschkeProduct;
use crate::ComplexPoint;

const MIN_BASE_RADIUS: f64 = 1e-3;
const CIRCLE_SAMPLES: usize = 32;
const ARC_SAMPLES: usize = 24;
/// Detour radius around a puncture, as a fraction of its loop radius.
const DETOUR_FRACTION: f64 = 0.75;
const BASE_FIBER_SEPARATION: f64 = 1e-6;
const COLLISION: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LoopPath {
    /// Index into the puncture list handed to [`build_loops`].
    pub puncture_index: usize,
    pub waypoints: Vec<ComplexPoint>,
    pub clearance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MonodromyResult {
    pub base_point: ComplexPoint,
    /// The labeled branches: entry `i` is branch `i` evaluated at the base point.
    pub base_fiber: Vec<ComplexPoint>,
    /// Distinct critical values in loop order.
    pub punctures: Vec<ComplexPoint>,
    pub loop_radii: Vec<f64>,
    pub generators: Vec<Permutation>,
    #[serde(skip)]
    pub loops: Vec<LoopPath>,
}

impl MonodromyResult {
    pub fn degree(&self) -> usize {
        self.base_fiber.len()
    }

    /// Generators multiplied in loop order.
    pub fn boundary_product(&self) -> Permutation {
        self.generators
            .iter()
            .fold(Permutation::identity(self.degree()), |acc, g| acc.then(g))
    }

    /// `sum_k (n - cycles(sigma_k))`, which equals `n - 1` for a clean run.
    pub fn total_branching(&self) -> usize {
        let n = self.degree();
        self.generators.iter().map(|g| n - g.cycle_count()).sum()
    }
}

/// Smallest pairwise distance between punctures, infinite for fewer than two.
pub fn puncture_gap(punctures: &[ComplexPoint]) -> f64 {
    let mut gap = f64::INFINITY;
    for (i, a) in punctures.iter().enumerate() {
        for b in &punctures[i + 1..] {
            gap = gap.min((a - b).norm());
        }
    }
    gap
}

fn clearance_of(p: ComplexPoint, punctures: &[ComplexPoint]) -> f64 {
    punctures.iter().map(|v| (p - v).norm()).fold(f64::INFINITY, f64::min)
}

pub fn choose_base(b: &BlaschkeProduct, cfg: &Config) -> Result<ComplexPoint> {
    let data = polyroots::critical_data(b, cfg)?;
    choose_base_for(&data.critical_values)
}

/// 0 when it is comfortably regular, otherwise the first point on a small
/// circle around 0 that keeps its distance from every puncture.
pub fn choose_base_for(punctures: &[ComplexPoint]) -> Result<ComplexPoint> {
    let gap = puncture_gap(punctures);
    let mut delta = if gap.is_finite() {
        MIN_BASE_RADIUS.max(gap / 10.0)
    } else {
        MIN_BASE_RADIUS
    };
    let origin = Complex64::new(0.0, 0.0);
    if clearance_of(origin, punctures) > delta {
        return Ok(origin);
    }
    let first = delta;
    for _ in 0..3 {
        if let Some(p) = circle_point(delta, punctures, delta * (1.0 - 1e-12)) {
            return Ok(p);
        }
        delta /= 2.0;
    }
    // Crowded origin: settle for half the puncture gap, on wider circles too.
    let radii = (0..3)
        .map(|k| first / f64::from(1 << k))
        .chain((1..12).map(|k| first * f64::from(1 << k)).take_while(|r| *r < 0.5));
    for radius in radii {
        if let Some(p) = circle_point(radius, punctures, gap / 2.0) {
            return Ok(p);
        }
    }
    Err(Error::Degenerate("no admissible base point near the origin".into()))
}

fn circle_point(radius: f64, punctures: &[ComplexPoint], clearance: f64) -> Option<ComplexPoint> {
    (0..16)
        .map(|k| Complex64::from_polar(radius, k as f64 * PI / 8.0))
        .find(|p| clearance_of(*p, punctures) >= clearance)
}

/// Loop radius per puncture: a third of the puncture gap and of the distance
/// to the base, and at most half the distance to the unit circle.
pub fn loop_radii(punctures: &[ComplexPoint], base: ComplexPoint) -> Vec<f64> {
    let gap = puncture_gap(punctures);
    punctures
        .iter()
        .map(|v| (gap / 3.0).min((v - base).norm() / 3.0).min((1.0 - v.norm()) / 2.0))
        .collect()
}

fn angle_from(base: ComplexPoint, v: ComplexPoint) -> f64 {
    let a = (v - base).arg();
    if a < 0.0 {
        a + TAU
    } else {
        a
    }
}

#[derive(Clone, Copy)]
enum DetourSide {
    /// Keep each puncture on the side the straight segment already leaves it.
    Preserve,
    Left,
}

/// Straight segment from `from` to `to`, with circular detours around every
/// puncture it would pass closer than its detour radius. Punctures whose
/// detour disk holds an endpoint are left alone.
fn detoured_segment(
    from: ComplexPoint,
    to: ComplexPoint,
    punctures: &[ComplexPoint],
    radii: &[f64],
    skip: Option<usize>,
    side: DetourSide,
) -> Vec<ComplexPoint> {
    let length = (to - from).norm();
    let mut out = vec![from];
    if length == 0.0 {
        return out;
    }
    let u = (to - from) / length;
    let mut blockers: Vec<(f64, usize, f64, f64)> = Vec::new();
    for (j, v) in punctures.iter().enumerate() {
        if Some(j) == skip {
            continue;
        }
        let rho = DETOUR_FRACTION * radii[j];
        if (from - v).norm() <= rho || (to - v).norm() <= rho {
            continue;
        }
        let rel = (v - from) * u.conj();
        let (along, cross) = (rel.re, rel.im);
        if along <= 0.0 || along >= length || cross.abs() >= rho {
            continue;
        }
        blockers.push((along, j, cross, rho));
    }
    blockers.sort_by(|a, b| a.0.total_cmp(&b.0));
    for (along, j, cross, rho) in blockers {
        let v = punctures[j];
        let half = (rho * rho - cross * cross).sqrt();
        let entry = from + u * (along - half);
        let exit = from + u * (along + half);
        let normal = Complex64::new(0.0, 1.0) * u;
        // Collinear punctures count as lying to the right of the leg.
        let bulge = match side {
            DetourSide::Left => normal,
            DetourSide::Preserve if cross > 0.0 => -normal,
            DetourSide::Preserve => normal,
        };
        let start = (entry - v).arg();
        let mid = bulge.arg();
        let end = (exit - v).arg();
        let ccw = (end - start).rem_euclid(TAU);
        let mid_offset = (mid - start).rem_euclid(TAU);
        let sweep = if mid_offset < ccw { ccw } else { ccw - TAU };
        out.push(entry);
        for s in 1..ARC_SAMPLES {
            let t = start + sweep * s as f64 / ARC_SAMPLES as f64;
            out.push(v + Complex64::from_polar(rho, t));
        }
        out.push(exit);
    }
    out.push(to);
    out
}

/// Spider loops around `punctures` based at `base`, ordered by the angle at
/// which each puncture is seen from the base (ties: nearer first).
pub fn build_loops(punctures: &[ComplexPoint], base: ComplexPoint) -> Result<Vec<LoopPath>> {
    if punctures.is_empty() {
        return Ok(Vec::new());
    }
    if clearance_of(base, punctures) <= 0.0 {
        return Err(Error::Precondition("base point coincides with a puncture".into()));
    }
    if puncture_gap(punctures) <= 0.0 {
        return Err(Error::Precondition("punctures are not distinct".into()));
    }
    let radii = loop_radii(punctures, base);
    let mut order: Vec<usize> = (0..punctures.len()).collect();
    order.sort_by(|&a, &b| {
        angle_from(base, punctures[a])
            .total_cmp(&angle_from(base, punctures[b]))
            .then((punctures[a] - base).norm().total_cmp(&(punctures[b] - base).norm()))
    });
    let mut loops = Vec::with_capacity(punctures.len());
    for k in order {
        let v = punctures[k];
        let r = radii[k];
        let u = (v - base) / (v - base).norm();
        let approach = v - u * r;
        let leg = detoured_segment(base, approach, punctures, &radii, Some(k), DetourSide::Preserve);
        let mut waypoints = leg.clone();
        let start = (approach - v).arg();
        for s in 1..=CIRCLE_SAMPLES {
            let t = start + TAU * s as f64 / CIRCLE_SAMPLES as f64;
            waypoints.push(v + Complex64::from_polar(r, t));
        }
        // close the circle exactly on the approach point
        *waypoints.last_mut().expect("circle samples") = approach;
        waypoints.extend(leg.iter().rev().skip(1));
        let clearance = path_clearance(&waypoints, punctures);
        for (j, w) in punctures.iter().enumerate() {
            if j != k && polyline_distance(&waypoints, *w) < radii[j] / 2.0 {
                return Err(Error::Degenerate(format!(
                    "loop around puncture {k} passes within half a loop radius of puncture {j}"
                )));
            }
        }
        if !(clearance > 0.0) {
            return Err(Error::Degenerate(format!(
                "loop around puncture {k} touches a puncture"
            )));
        }
        loops.push(LoopPath {
            puncture_index: k,
            waypoints,
            clearance,
        });
    }
    Ok(loops)
}

fn segment_distance(a: ComplexPoint, b: ComplexPoint, p: ComplexPoint) -> f64 {
    let d = b - a;
    let len2 = d.norm_sqr();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let t = ((p - a) * d.conj()).re / len2;
    (a + d * t.clamp(0.0, 1.0) - p).norm()
}

pub fn polyline_distance(waypoints: &[ComplexPoint], p: ComplexPoint) -> f64 {
    if waypoints.len() == 1 {
        return (waypoints[0] - p).norm();
    }
    waypoints
        .windows(2)
        .map(|s| segment_distance(s[0], s[1], p))
        .fold(f64::INFINITY, f64::min)
}

fn path_clearance(waypoints: &[ComplexPoint], punctures: &[ComplexPoint]) -> f64 {
    punctures
        .iter()
        .map(|v| polyline_distance(waypoints, *v))
        .fold(f64::INFINITY, f64::min)
}

/// Discrete winding number of a closed polyline around `p`.
pub fn winding_number(waypoints: &[ComplexPoint], p: ComplexPoint) -> f64 {
    let total: f64 = waypoints.windows(2).map(|s| ((s[1] - p) / (s[0] - p)).arg()).sum();
    total / TAU
}

/// Path from `from` to `to` avoiding the punctures by detours to the left.
pub fn admissible_path(
    punctures: &[ComplexPoint],
    radii: &[f64],
    from: ComplexPoint,
    to: ComplexPoint,
) -> Vec<ComplexPoint> {
    detoured_segment(from, to, punctures, radii, None, DetourSide::Left)
}

/// Simultaneous tracking of a whole fiber along a polyline in the w-plane.
pub struct FiberTracker<'a> {
    product: &'a BlaschkeProduct,
    cfg: &'a Config,
}

impl<'a> FiberTracker<'a> {
    pub fn new(b: &'a BlaschkeProduct, cfg: &'a Config) -> Self {
        FiberTracker { product: b, cfg }
    }

    /// Entry `i` of the result is the continuation of `start[i]`.
    pub fn track(&self, path: &[ComplexPoint], start: &[ComplexPoint]) -> Result<Vec<ComplexPoint>> {
        let mut current = start.to_vec();
        for seg in path.windows(2) {
            current = self.segment(seg[0], seg[1], current)?;
        }
        Ok(current)
    }

    fn segment(
        &self,
        from: ComplexPoint,
        to: ComplexPoint,
        mut points: Vec<ComplexPoint>,
    ) -> Result<Vec<ComplexPoint>> {
        let length = (to - from).norm();
        if length == 0.0 {
            return Ok(points);
        }
        let h_max = (self.cfg.max_step / length).min(1.0);
        let h_min = h_max * 0.5f64.powi(self.cfg.max_bisections as i32);
        let mut s = 0.0;
        let mut h = h_max;
        while s < 1.0 {
            let (next_s, w) = if s + h >= 1.0 {
                (1.0, to)
            } else {
                (s + h, from + (to - from) * (s + h))
            };
            match self.correct(&points, w)? {
                Some(next) => {
                    points = next;
                    s = next_s;
                    h = (2.0 * h).min(h_max);
                }
                None => {
                    h /= 2.0;
                    if h < h_min {
                        return Err(Error::continuation("step bisection depth exhausted", w));
                    }
                }
            }
        }
        Ok(points)
    }

    /// Newton-corrects every point onto the fiber over `w`, or `None` when the
    /// step must be refined.
    fn correct(&self, points: &[ComplexPoint], w: ComplexPoint) -> Result<Option<Vec<ComplexPoint>>> {
        let separation = min_pairwise(points);
        if separation < COLLISION {
            return Err(Error::continuation("fiber points collided", w));
        }
        let guard = separation / 3.0;
        let mut out = Vec::with_capacity(points.len());
        for &z0 in points {
            let mut z = z0;
            let mut converged = false;
            for _ in 0..self.cfg.max_newton_iterations {
                let Ok((value, derivative)) = self.product.evaluate(z) else {
                    return Ok(None);
                };
                let delta = (value - w) / derivative;
                // below this the step is rounding noise of the evaluation
                let floor = 16.0 * self.product.degree() as f64 * f64::EPSILON / derivative.norm();
                if !(delta.norm() < guard) {
                    return Ok(None);
                }
                z -= delta;
                if !((z - z0).norm() < guard) {
                    return Ok(None);
                }
                if delta.norm() <= self.cfg.root_polish.max(floor) {
                    converged = true;
                    break;
                }
            }
            if !converged {
                return Ok(None);
            }
            out.push(z);
        }
        Ok(Some(out))
    }
}

pub fn continue_fiber(
    b: &BlaschkeProduct,
    path: &[ComplexPoint],
    start_fiber: &[ComplexPoint],
    cfg: &Config,
) -> Result<Vec<ComplexPoint>> {
    FiberTracker::new(b, cfg).track(path, start_fiber)
}

pub fn min_pairwise(points: &[ComplexPoint]) -> f64 {
    let mut best = f64::INFINITY;
    for (i, a) in points.iter().enumerate() {
        for b in &points[i + 1..] {
            best = best.min((a - b).norm());
        }
    }
    best
}

/// Matches each end point to the nearest start point. Entry `i` of the result
/// is the start label whose point is reached by continuing label `i`.
pub fn match_fibers(start: &[ComplexPoint], end: &[ComplexPoint], location: ComplexPoint) -> Result<Permutation> {
    let guard = min_pairwise(start) / 3.0;
    let images = end
        .iter()
        .map(|e| {
            let (j, d) = start
                .iter()
                .enumerate()
                .map(|(j, s)| (j, (e - s).norm()))
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .expect("non-empty fiber");
            if d < guard {
                Ok(j)
            } else {
                Err(Error::continuation("ambiguous fiber matching", location))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Permutation::from_images(images).map_err(|_| Error::continuation("fiber matching is not a bijection", location))
}

pub fn monodromy_group(b: &BlaschkeProduct, cfg: &Config) -> Result<MonodromyResult> {
    let data = polyroots::critical_data(b, cfg)?;
    monodromy_from_critical_data(b, &data, cfg)
}

pub fn monodromy_from_critical_data(b: &BlaschkeProduct, data: &CriticalData, cfg: &Config) -> Result<MonodromyResult> {
    if b.degree() < 2 {
        return Err(Error::Precondition("monodromy needs degree >= 2".into()));
    }
    let base = choose_base_for(&data.critical_values)?;
    let base_fiber = polyroots::fiber(b, base, cfg)?;
    if min_pairwise(&base_fiber) <= BASE_FIBER_SEPARATION {
        return Err(Error::Degenerate(format!("base fiber over {base} is not separated")));
    }
    let loops = build_loops(&data.critical_values, base)?;
    let tracker = FiberTracker::new(b, cfg);
    let generators = loops
        .par_iter()
        .map(|l| {
            let end = tracker.track(&l.waypoints, &base_fiber)?;
            match_fibers(&base_fiber, &end, data.critical_values[l.puncture_index])
        })
        .collect::<Result<Vec<_>>>()?;
    let punctures: Vec<ComplexPoint> = loops.iter().map(|l| data.critical_values[l.puncture_index]).collect();
    let loop_radii = loop_radii(&punctures, base);
    Ok(MonodromyResult {
        base_point: base,
        base_fiber,
        punctures,
        loop_radii,
        generators,
        loops,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn base_moves_off_critical_origin() {
        let z2 = BlaschkeProduct::monomial(2, c(1.0, 0.0)).unwrap();
        let base = choose_base(&z2, &Config::default()).unwrap();
        assert!(base.norm() > 0.0);
        assert!((base.norm() - 1e-3).abs() < 1e-15);
    }

    #[test]
    fn regular_origin_is_kept() {
        assert_eq!(choose_base_for(&[c(0.5, 0.0), c(0.0, -0.3)]).unwrap(), c(0.0, 0.0));
    }

    #[test]
    fn single_loop_winds_once() {
        let loops = build_loops(&[c(0.2, 0.0)], c(0.0, 0.0)).unwrap();
        assert_eq!(loops.len(), 1);
        let w = &loops[0].waypoints;
        assert_eq!(w.first(), w.last());
        assert!((winding_number(w, c(0.2, 0.0)) - 1.0).abs() < 0.01);
        assert!(w.len() >= CIRCLE_SAMPLES + 2);
    }

    #[test]
    fn two_loops_in_angular_order() {
        let punctures = [c(0.0, 0.3), c(0.3, 0.0)];
        let loops = build_loops(&punctures, c(0.0, 0.0)).unwrap();
        assert_eq!(loops[0].puncture_index, 1);
        assert_eq!(loops[1].puncture_index, 0);
        for l in &loops {
            for (j, v) in punctures.iter().enumerate() {
                let wn = winding_number(&l.waypoints, *v);
                let want = if j == l.puncture_index { 1.0 } else { 0.0 };
                assert!((wn - want).abs() < 0.01);
            }
        }
    }

    #[test]
    fn collinear_punctures_get_detours() {
        let punctures = [c(0.1, 0.0), c(0.6, 0.0), c(0.35, 0.001)];
        let loops = build_loops(&punctures, c(0.0, 0.0)).unwrap();
        let radii = loop_radii(&punctures, c(0.0, 0.0));
        for l in &loops {
            for (j, v) in punctures.iter().enumerate() {
                let wn = winding_number(&l.waypoints, *v);
                let want = if j == l.puncture_index { 1.0 } else { 0.0 };
                assert!((wn - want).abs() < 0.01);
                if j != l.puncture_index {
                    assert!(polyline_distance(&l.waypoints, *v) >= radii[j] / 2.0);
                }
            }
        }
    }

    #[test]
    fn constant_path_is_identity() {
        let cfg = Config::default();
        let z2 = BlaschkeProduct::monomial(2, c(1.0, 0.0)).unwrap();
        let base = c(1e-3, 0.0);
        let start = polyroots::fiber(&z2, base, &cfg).unwrap();
        let end = continue_fiber(&z2, &[base, base], &start, &cfg).unwrap();
        assert_eq!(end, start);
    }

    #[test]
    fn square_root_swaps() {
        let cfg = Config::default();
        let z2 = BlaschkeProduct::monomial(2, c(1.0, 0.0)).unwrap();
        let base = c(1e-3, 0.0);
        let start = polyroots::fiber(&z2, base, &cfg).unwrap();
        let loops = build_loops(&[c(0.0, 0.0)], base).unwrap();
        let end = continue_fiber(&z2, &loops[0].waypoints, &start, &cfg).unwrap();
        assert!((end[0] - start[1]).norm() < 1e-9);
        assert!((end[1] - start[0]).norm() < 1e-9);
    }

    #[test]
    fn monomial_generators() {
        let cfg = Config::default();
        let z2 = BlaschkeProduct::monomial(2, c(1.0, 0.0)).unwrap();
        let m = monodromy_group(&z2, &cfg).unwrap();
        assert_eq!(m.generators.len(), 1);
        assert_eq!(m.generators[0].cycle_notation(), "(1 2)");
        let z4 = BlaschkeProduct::monomial(4, c(1.0, 0.0)).unwrap();
        let m = monodromy_group(&z4, &cfg).unwrap();
        assert_eq!(m.generators.len(), 1);
        assert_eq!(m.generators[0].cycles().len(), 1);
        assert_eq!(m.total_branching(), 3);
    }
}
