//! Polynomial roots and the geometric queries built on them: critical points,
//! critical values and fibers `B⁻¹(w)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::config::Config;
use crate::error::{Error, Result};
use crate::product::{is_finite, BlaschkeProduct};
use crate::ComplexPoint;

/// Dense polynomials as ascending coefficient slices.
pub mod poly {
    use num_complex::Complex64;

    pub fn mul(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let mut out = vec![Complex64::new(0.0, 0.0); a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                out[i + j] += x * y;
            }
        }
        out
    }

    /// Monic polynomial with the given roots.
    pub fn from_roots(roots: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(1.0, 0.0)];
        for r in roots {
            out = mul(&out, &[-r, Complex64::new(1.0, 0.0)]);
        }
        out
    }

    pub fn derivative(p: &[Complex64]) -> Vec<Complex64> {
        p.iter().enumerate().skip(1).map(|(i, c)| c * i as f64).collect()
    }

    pub fn eval(p: &[Complex64], z: Complex64) -> Complex64 {
        p.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, c| acc * z + c)
    }

    pub fn eval_with_derivative(p: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
        let mut value = Complex64::new(0.0, 0.0);
        let mut derivative = Complex64::new(0.0, 0.0);
        for c in p.iter().rev() {
            derivative = derivative * z + value;
            value = value * z + c;
        }
        (value, derivative)
    }

    /// `sum |c_i| |z|^i`, the scale of rounding error in Horner evaluation.
    pub fn abs_eval(p: &[Complex64], r: f64) -> f64 {
        p.iter().rev().fold(0.0, |acc, c| acc * r + c.norm())
    }
}

const TRIM: f64 = 1e-14;

/// All roots of `coefficients` (ascending powers), polished by Newton.
pub fn all_roots(coefficients: &[ComplexPoint], cfg: &Config) -> Result<Vec<ComplexPoint>> {
    all_roots_with_budget(coefficients, cfg.max_root_iterations, cfg.root_polish)
}

pub fn all_roots_with_budget(
    coefficients: &[ComplexPoint],
    max_iterations: usize,
    polish_tol: f64,
) -> Result<Vec<ComplexPoint>> {
    let scale = coefficients.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if scale == 0.0 || !scale.is_finite() {
        return Err(Error::input("poly", "coefficients are zero or non-finite"));
    }
    let mut top = coefficients.len();
    while top > 0 && coefficients[top - 1].norm() < TRIM * scale {
        top -= 1;
    }
    let trimmed = &coefficients[..top];
    let zero_roots = trimmed.iter().take_while(|c| c.norm() == 0.0).count();
    let p = &trimmed[zero_roots..];
    let mut roots = vec![Complex64::new(0.0, 0.0); zero_roots];
    match p.len() {
        0 => return Err(Error::input("poly", "leading coefficient vanishes")),
        1 => return Ok(roots),
        2 => {
            roots.push(-p[0] / p[1]);
            return Ok(roots);
        }
        _ => {}
    }
    let mut found = aberth(p, max_iterations)?;
    for r in &mut found {
        *r = newton_polish(p, *r);
    }
    let worst = found.iter().map(|&r| backward_error(p, r)).fold(0.0, f64::max);
    if !(worst <= polish_tol) {
        return Err(Error::Solver {
            iterations: max_iterations,
            residual: worst,
        });
    }
    roots.extend(found);
    Ok(roots)
}

/// `|p(z)| / sum |c_i| |z|^i`.
fn backward_error(p: &[Complex64], z: Complex64) -> f64 {
    let scale = poly::abs_eval(p, z.norm());
    if scale == 0.0 {
        return 0.0;
    }
    poly::eval(p, z).norm() / scale
}

/// `p(z) / p'(z)`, evaluated through the reversed polynomial when `|z| > 1`.
fn newton_ratio(p: &[Complex64], z: Complex64) -> Complex64 {
    if z.norm() <= 1.0 {
        let (v, d) = poly::eval_with_derivative(p, z);
        v / d
    } else {
        let n = (p.len() - 1) as f64;
        let y = z.inv();
        let (q, dq) = p
            .iter()
            .fold((Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)), |(v, d), c| {
                (v * y + c, d * y + v)
            });
        z * q / (n * q - y * dq)
    }
}

/// Initial radii from the upper convex hull of `(i, ln |c_i|)`, which tracks
/// root moduli even when they span many orders of magnitude.
fn initial_guesses(p: &[Complex64]) -> Vec<Complex64> {
    let n = p.len() - 1;
    let pts: Vec<(f64, f64)> = p
        .iter()
        .enumerate()
        .map(|(i, c)| {
            (
                i as f64,
                if c.norm() > 0.0 {
                    c.norm().ln()
                } else {
                    f64::NEG_INFINITY
                },
            )
        })
        .collect();
    let mut hull: Vec<usize> = Vec::new();
    for i in 0..=n {
        if pts[i].1 == f64::NEG_INFINITY {
            continue;
        }
        while hull.len() >= 2 {
            let a = pts[hull[hull.len() - 2]];
            let b = pts[hull[hull.len() - 1]];
            let c = pts[i];
            // pop b when it lies on or below the chord a -> c
            if (b.0 - a.0) * (c.1 - a.1) - (b.1 - a.1) * (c.0 - a.0) >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(i);
    }
    let mut guesses = Vec::with_capacity(n);
    for w in hull.windows(2) {
        let (i, j) = (w[0], w[1]);
        let k = j - i;
        let radius = ((pts[i].1 - pts[j].1) / k as f64).exp();
        for m in 0..k {
            let angle = 2.0 * PI * m as f64 / k as f64 + 2.0 * PI * i as f64 / n as f64 + 0.4;
            guesses.push(Complex64::from_polar(radius, angle));
        }
    }
    guesses
}

fn aberth(p: &[Complex64], max_iterations: usize) -> Result<Vec<Complex64>> {
    let n = p.len() - 1;
    let mut z = initial_guesses(p);
    debug_assert_eq!(z.len(), n);
    let mut done = vec![false; n];
    let eps = f64::EPSILON;
    for _ in 0..max_iterations {
        for k in 0..n {
            if done[k] {
                continue;
            }
            let zk = z[k];
            let value = poly::eval(p, zk).norm();
            if value <= 4.0 * n as f64 * eps * poly::abs_eval(p, zk.norm()) {
                done[k] = true;
                continue;
            }
            let ratio = newton_ratio(p, zk);
            let repulsion: Complex64 = (0..n).filter(|&j| j != k).map(|j| (zk - z[j]).inv()).sum();
            let step = ratio / (1.0 - ratio * repulsion);
            if !(step.re.is_finite() && step.im.is_finite()) {
                return Err(Error::Solver {
                    iterations: 0,
                    residual: f64::INFINITY,
                });
            }
            z[k] = zk - step;
            if step.norm() <= 2.0 * eps * z[k].norm() {
                done[k] = true;
            }
        }
        if done.iter().all(|&d| d) {
            return Ok(z);
        }
    }
    // Out of iterations: hand back the iterate and let the residual check decide.
    Ok(z)
}

fn newton_polish(p: &[Complex64], mut z: Complex64) -> Complex64 {
    let mut residual = poly::eval(p, z).norm();
    for _ in 0..8 {
        if residual == 0.0 {
            break;
        }
        let next = z - newton_ratio(p, z);
        let next_residual = poly::eval(p, next).norm();
        if !(next_residual < residual) {
            break;
        }
        z = next;
        residual = next_residual;
    }
    z
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CriticalData {
    pub critical_points: Vec<ComplexPoint>,
    pub critical_values: Vec<ComplexPoint>,
    /// For each distinct critical value, the indices of the critical points above it.
    pub multiplicity_map: Vec<Vec<usize>>,
}

const BOUNDARY_GUARD: f64 = 1e-10;

pub fn critical_data(b: &BlaschkeProduct, cfg: &Config) -> Result<CriticalData> {
    let n = b.degree();
    if n < 2 {
        return Err(Error::Precondition("critical data needs degree >= 2".into()));
    }
    let numerator = b.to_rational().derivative_numerator();
    let roots = refine_critical(b.zeros(), all_roots(&numerator, cfg)?);
    let mut critical_points = Vec::with_capacity(n - 1);
    for r in roots {
        let modulus = r.norm();
        if (modulus - 1.0).abs() <= BOUNDARY_GUARD {
            return Err(Error::IllConditioned(format!(
                "critical point {r} lies within {BOUNDARY_GUARD:e} of the unit circle"
            )));
        }
        if modulus < 1.0 - BOUNDARY_GUARD {
            critical_points.push(r);
        }
    }
    if critical_points.len() != n - 1 {
        return Err(Error::Internal(format!(
            "found {} interior critical points, expected {}",
            critical_points.len(),
            n - 1
        )));
    }
    critical_points.sort_by(|x, y| fiber_order(*x, *y));
    let values = critical_points
        .iter()
        .map(|&c| b.value(c))
        .collect::<Result<Vec<_>>>()?;
    let groups = cluster(&values, 2.0 * cfg.cluster);
    let mut critical_values = Vec::with_capacity(groups.len());
    for g in &groups {
        let mean = g.iter().map(|&i| values[i]).sum::<Complex64>() / g.len() as f64;
        if mean.norm() >= 1.0 {
            return Err(Error::IllConditioned(format!("critical value {mean} is not interior")));
        }
        critical_values.push(mean);
    }
    Ok(CriticalData {
        critical_points,
        critical_values,
        multiplicity_map: groups,
    })
}

/// `N'/N` for `N = P'Q - PQ'`, from `N = (B'/B) P Q` with every factor kept
/// in partial-fraction form.
fn critical_log_derivative(zeros: &[ComplexPoint], z: ComplexPoint) -> ComplexPoint {
    let mut f = Complex64::new(0.0, 0.0);
    let mut df = Complex64::new(0.0, 0.0);
    let mut pq = Complex64::new(0.0, 0.0);
    for a in zeros {
        let u = z - a;
        let v = 1.0 - a.conj() * z;
        let t = (1.0 - a.norm_sqr()) / (u * v);
        f += t;
        df -= t * (v - a.conj() * u) / (u * v);
        pq += 1.0 / u - a.conj() / v;
    }
    df / f + pq
}

/// Aberth sweeps on the roots of `N` driven by the stable log-derivative.
/// Roots at exactly 0 are kept and divided out.
fn refine_critical(zeros: &[ComplexPoint], roots: Vec<ComplexPoint>) -> Vec<ComplexPoint> {
    let at_origin = roots.iter().filter(|r| r.re == 0.0 && r.im == 0.0).count() as f64;
    let mut moving: Vec<ComplexPoint> = roots.iter().copied().filter(|r| r.re != 0.0 || r.im != 0.0).collect();
    for _ in 0..100 {
        let mut largest: f64 = 0.0;
        for i in 0..moving.len() {
            let z = moving[i];
            let repulsion: Complex64 = moving
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, r)| 1.0 / (z - r))
                .sum();
            let step = 1.0 / (critical_log_derivative(zeros, z) - at_origin / z - repulsion);
            if is_finite(step) {
                moving[i] = z - step;
                largest = largest.max(step.norm() / z.norm().max(1.0));
            }
        }
        if largest <= 4.0 * f64::EPSILON {
            break;
        }
    }
    let mut out = roots
        .into_iter()
        .filter(|r| r.re == 0.0 && r.im == 0.0)
        .collect::<Vec<_>>();
    out.extend(moving);
    out
}

/// Single-linkage clusters of `points` at `radius`, each as a sorted index list,
/// ordered by first member. Clusters whose means end up within `radius` of
/// each other are merged.
pub fn cluster(points: &[ComplexPoint], radius: f64) -> Vec<Vec<usize>> {
    let n = points.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for i in 0..n {
        for j in i + 1..n {
            if (points[i] - points[j]).norm() <= radius {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    loop {
        let groups = collect_groups(&mut parent, find);
        let means: Vec<Complex64> = groups
            .iter()
            .map(|g| g.iter().map(|&i| points[i]).sum::<Complex64>() / g.len() as f64)
            .collect();
        let mut merged = false;
        'outer: for a in 0..groups.len() {
            for b in a + 1..groups.len() {
                if (means[a] - means[b]).norm() <= radius {
                    let (x, y) = (find(&mut parent, groups[a][0]), find(&mut parent, groups[b][0]));
                    parent[x.max(y)] = x.min(y);
                    merged = true;
                    break 'outer;
                }
            }
        }
        if !merged {
            return groups;
        }
    }
}

fn collect_groups(parent: &mut [usize], find: fn(&mut [usize], usize) -> usize) -> Vec<Vec<usize>> {
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; parent.len()];
    for i in 0..parent.len() {
        let r = find(parent, i);
        if slot[r] == usize::MAX {
            slot[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[r]].push(i);
    }
    groups
}

/// Deterministic order for fiber points: argument, then modulus, then real part.
pub fn fiber_order(a: ComplexPoint, b: ComplexPoint) -> std::cmp::Ordering {
    a.arg()
        .total_cmp(&b.arg())
        .then(a.norm().total_cmp(&b.norm()))
        .then(a.re.total_cmp(&b.re))
}

const OUTSIDE_SLACK: f64 = 1e-9;

/// The `n` solutions of `B(z) = w`, polished and sorted by [`fiber_order`].
pub fn fiber(b: &BlaschkeProduct, w: ComplexPoint, cfg: &Config) -> Result<Vec<ComplexPoint>> {
    if !(w.norm() < 1.0) {
        return Err(Error::Precondition(format!("fiber target {w} is not inside the disk")));
    }
    let pair = b.to_rational();
    let mut roots = all_roots(&pair.fiber_polynomial(w), cfg)?;
    if roots.len() != b.degree() {
        return Err(Error::Internal(format!(
            "fiber polynomial has {} roots, expected {}",
            roots.len(),
            b.degree()
        )));
    }
    for r in &mut roots {
        if r.norm() > 1.0 + OUTSIDE_SLACK {
            return Err(Error::Internal(format!("fiber point {r} lies outside the closed disk")));
        }
        *r = polish_fiber_point(b, *r, w, cfg)?;
    }
    roots.sort_by(|x, y| fiber_order(*x, *y));
    Ok(roots)
}

fn polish_fiber_point(b: &BlaschkeProduct, mut z: ComplexPoint, w: ComplexPoint, cfg: &Config) -> Result<ComplexPoint> {
    let (v, _) = b.evaluate(z)?;
    let mut residual = (v - w).norm();
    for _ in 0..cfg.max_newton_iterations {
        if residual <= cfg.fiber_residual * 1e-2 {
            break;
        }
        let (v, d) = b.evaluate(z)?;
        let next = z - (v - w) / d;
        if !(next.norm() <= 1.0 + OUTSIDE_SLACK) {
            break;
        }
        let next_residual = (b.value(next)? - w).norm();
        if !(next_residual < residual) {
            break;
        }
        z = next;
        residual = next_residual;
    }
    if residual > cfg.fiber_residual {
        return Err(Error::Solver {
            iterations: cfg.max_newton_iterations,
            residual,
        });
    }
    Ok(z)
}
