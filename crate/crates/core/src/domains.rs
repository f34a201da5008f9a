//! Compact convex domains and their linear minimization oracles.
//!
//! Every algorithm in this crate touches the feasible set only through
//! [`DomainSpec::lmo`], which returns an extreme point minimizing a linear
//! functional. No projection operator exists anywhere.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::point::{dot, Point};

/// Below this Euclidean norm a linear functional is treated as zero.
pub const ZERO_NORM: f64 = 1e-12;

/// Default stopping tolerance for the power iteration behind the nuclear LMO.
pub const POWER_TOL: f64 = 1e-9;

/// Iteration budget used by the nuclear-ball LMO. The residual test usually
/// stops the iteration far earlier; the budget only matters when the top two
/// singular values nearly coincide.
pub const NUCLEAR_LMO_MAX_ITERS: usize = 2000;

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DomainSpec {
    Box { lo: Vec<f64>, hi: Vec<f64> },
    L1Ball { radius: f64, dim: usize },
    Simplex { dim: usize },
    NuclearBall { radius: f64, rows: usize, cols: usize },
}

impl DomainSpec {
    pub fn boxed(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() {
            return Err(Error::DimensionMismatch {
                expected: lo.len(),
                got: hi.len(),
            });
        }
        if lo.is_empty() {
            return Err(Error::InvalidParameter("box must have dimension >= 1".into()));
        }
        if lo.iter().chain(&hi).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("box bounds must be finite".into()));
        }
        if lo.iter().zip(&hi).any(|(l, h)| l > h) {
            return Err(Error::InvalidParameter("box requires lo <= hi".into()));
        }
        let spec = DomainSpec::Box { lo, hi };
        if spec.diameter() <= 0.0 {
            return Err(Error::InvalidParameter("box must have positive diameter".into()));
        }
        Ok(spec)
    }

    /// The cube `[lo, hi]^dim`.
    pub fn cube(dim: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::boxed(vec![lo; dim], vec![hi; dim])
    }

    pub fn l1_ball(dim: usize, radius: f64) -> Result<Self> {
        check_radius(radius)?;
        if dim == 0 {
            return Err(Error::InvalidParameter("l1 ball must have dimension >= 1".into()));
        }
        Ok(DomainSpec::L1Ball { radius, dim })
    }

    pub fn simplex(dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidParameter("simplex needs dimension >= 2".into()));
        }
        Ok(DomainSpec::Simplex { dim })
    }

    pub fn nuclear_ball(rows: usize, cols: usize, radius: f64) -> Result<Self> {
        check_radius(radius)?;
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidParameter("nuclear ball needs a non-empty shape".into()));
        }
        Ok(DomainSpec::NuclearBall { radius, rows, cols })
    }

    pub fn dim(&self) -> usize {
        match self {
            DomainSpec::Box { lo, .. } => lo.len(),
            DomainSpec::L1Ball { dim, .. } | DomainSpec::Simplex { dim } => *dim,
            DomainSpec::NuclearBall { rows, cols, .. } => rows * cols,
        }
    }

    pub fn shape(&self) -> Option<(usize, usize)> {
        match self {
            DomainSpec::NuclearBall { rows, cols, .. } => Some((*rows, *cols)),
            _ => None,
        }
    }

    /// ℓ1 diameter `max ‖x - y‖₁` (an upper bound for the nuclear ball).
    ///
    /// For the nuclear ball every extreme point `k·u vᵀ` has entrywise ℓ1 norm
    /// at most `k·‖u‖₁‖v‖₁ ≤ k√(mn)`, attained by constant-sign unit vectors.
    pub fn diameter(&self) -> f64 {
        match self {
            DomainSpec::Box { lo, hi } => lo.iter().zip(hi).map(|(l, h)| h - l).sum(),
            DomainSpec::L1Ball { radius, .. } => 2.0 * radius,
            DomainSpec::Simplex { .. } => 2.0,
            DomainSpec::NuclearBall { radius, rows, cols } => {
                2.0 * radius * ((rows * cols) as f64).sqrt()
            }
        }
    }

    /// Euclidean (Frobenius) diameter.
    pub fn diameter_l2(&self) -> f64 {
        match self {
            DomainSpec::Box { lo, hi } => lo
                .iter()
                .zip(hi)
                .map(|(l, h)| (h - l) * (h - l))
                .sum::<f64>()
                .sqrt(),
            DomainSpec::L1Ball { radius, .. } => 2.0 * radius,
            DomainSpec::Simplex { .. } => std::f64::consts::SQRT_2,
            DomainSpec::NuclearBall { radius, .. } => 2.0 * radius,
        }
    }

    /// Largest absolute entry of any feasible point.
    pub fn max_abs_entry(&self) -> f64 {
        match self {
            DomainSpec::Box { lo, hi } => lo
                .iter()
                .chain(hi)
                .fold(0.0_f64, |acc, v| acc.max(v.abs())),
            DomainSpec::L1Ball { radius, .. } | DomainSpec::NuclearBall { radius, .. } => *radius,
            DomainSpec::Simplex { .. } => 1.0,
        }
    }

    /// Fixed feasible point returned for a vanishing linear functional.
    pub fn canonical_point(&self) -> Point {
        match self {
            DomainSpec::Box { lo, .. } => Point::from_raw(lo.clone(), None),
            DomainSpec::L1Ball { dim, .. } => Point::zeros(*dim),
            DomainSpec::Simplex { dim } => {
                let mut e = vec![0.0; *dim];
                e[0] = 1.0;
                Point::from_raw(e, None)
            }
            DomainSpec::NuclearBall { rows, cols, .. } => {
                Point::from_raw(vec![0.0; rows * cols], Some((*rows, *cols)))
            }
        }
    }

    fn check_dim(&self, x: &Point) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        Ok(())
    }

    /// Linear minimization oracle: a point of the domain minimizing `⟨w, v⟩`.
    ///
    /// The stream is consumed only by the nuclear ball (power-iteration start).
    pub fn lmo<R: Rng + ?Sized>(&self, w: &Point, rng: &mut R) -> Result<Point> {
        self.check_dim(w)?;
        if !w.is_finite() {
            return Err(Error::NonFinite {
                what: "lmo direction".into(),
            });
        }
        if w.norm_l2() < ZERO_NORM {
            return Ok(self.canonical_point());
        }
        let w = w.as_slice();
        let v = match self {
            DomainSpec::Box { lo, hi } => {
                let v = w
                    .iter()
                    .zip(lo.iter().zip(hi))
                    .map(|(&wi, (&l, &h))| if wi < 0.0 { h } else { l })
                    .collect();
                Point::from_raw(v, None)
            }
            DomainSpec::L1Ball { radius, dim } => {
                let i = argmax_abs(w);
                let mut v = vec![0.0; *dim];
                v[i] = -radius * w[i].signum();
                Point::from_raw(v, None)
            }
            DomainSpec::Simplex { dim } => {
                let i = argmin(w);
                let mut v = vec![0.0; *dim];
                v[i] = 1.0;
                Point::from_raw(v, None)
            }
            DomainSpec::NuclearBall { radius, rows, cols } => {
                let (m, n) = (*rows, *cols);
                match power_iteration(w, m, n, NUCLEAR_LMO_MAX_ITERS, POWER_TOL, rng) {
                    Some(top) => {
                        let mut v = vec![0.0; m * n];
                        for i in 0..m {
                            let ui = -radius * top.u[i];
                            for j in 0..n {
                                v[i * n + j] = ui * top.v[j];
                            }
                        }
                        Point::from_raw(v, Some((m, n)))
                    }
                    None => self.canonical_point(),
                }
            }
        };
        Ok(v)
    }

    /// Membership test up to `tol`. The nuclear norm is the full singular value sum.
    pub fn contains(&self, x: &Point, tol: f64) -> Result<bool> {
        self.check_dim(x)?;
        if !x.is_finite() {
            return Ok(false);
        }
        let x = x.as_slice();
        Ok(match self {
            DomainSpec::Box { lo, hi } => x
                .iter()
                .zip(lo.iter().zip(hi))
                .all(|(&xi, (&l, &h))| xi >= l - tol && xi <= h + tol),
            DomainSpec::L1Ball { radius, .. } => {
                x.iter().map(|v| v.abs()).sum::<f64>() <= radius + tol
            }
            DomainSpec::Simplex { .. } => {
                x.iter().all(|&v| v >= -tol) && (x.iter().sum::<f64>() - 1.0).abs() <= tol
            }
            DomainSpec::NuclearBall { radius, rows, cols } => {
                nuclear_norm(x, *rows, *cols) <= radius + tol
            }
        })
    }

    /// Random feasible point. Used by tests and the regret audit.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        match self {
            DomainSpec::Box { lo, hi } => {
                let v = lo
                    .iter()
                    .zip(hi)
                    .map(|(&l, &h)| l + (h - l) * rng.random::<f64>())
                    .collect();
                Point::from_raw(v, None)
            }
            DomainSpec::L1Ball { radius, dim } => {
                // Uniform in the ball: d+1 exponentials, one acting as slack.
                let e: Vec<f64> = (0..=*dim).map(|_| Exp1.sample(rng)).collect();
                let total: f64 = e.iter().sum();
                let v = e[..*dim]
                    .iter()
                    .map(|ei| {
                        let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
                        sign * radius * ei / total
                    })
                    .collect();
                Point::from_raw(v, None)
            }
            DomainSpec::Simplex { dim } => {
                let e: Vec<f64> = (0..*dim).map(|_| Exp1.sample(rng)).collect();
                let total: f64 = e.iter().sum();
                Point::from_raw(e.iter().map(|v| v / total).collect(), None)
            }
            DomainSpec::NuclearBall { radius, rows, cols } => {
                let g: Vec<f64> = (0..rows * cols).map(|_| StandardNormal.sample(rng)).collect();
                let nn = nuclear_norm(&g, *rows, *cols);
                let scale = radius * rng.random::<f64>() / nn;
                Point::from_raw(g.iter().map(|v| v * scale).collect(), Some((*rows, *cols)))
            }
        }
    }
}

fn check_radius(radius: f64) -> Result<()> {
    if radius.is_finite() && radius > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("radius must be positive, got {radius}")))
    }
}

fn argmax_abs(w: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in w.iter().enumerate() {
        if v.abs() > w[best].abs() {
            best = i;
        }
    }
    best
}

fn argmin(w: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in w.iter().enumerate() {
        if *v < w[best] {
            best = i;
        }
    }
    best
}

/// Sum of singular values of a row-major matrix.
pub fn nuclear_norm(data: &[f64], rows: usize, cols: usize) -> f64 {
    let m = DMatrix::from_row_slice(rows, cols, data);
    m.singular_values().iter().sum()
}

/// Approximate top singular triplet `W v ≈ σ u`.
#[derive(Clone, Debug)]
pub struct SingularTriplet {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub sigma: f64,
    pub iterations: usize,
}

/// Power-iteration budget `1 + ⌈10·ln max(m, n)⌉`.
pub fn default_power_iters(rows: usize, cols: usize) -> usize {
    1 + (10.0 * (rows.max(cols) as f64).ln()).ceil() as usize
}

/// Alternating power iteration on a row-major `rows x cols` matrix.
///
/// Returns `None` for a null matrix (`‖W‖_F < 1e-12`). Otherwise iterates
/// until `‖Wᵀu − σv‖ ≤ tol·σ` or `max_iters` is exhausted; the returned pair
/// satisfies `Wv = σu` with `σ ≥ 0`.
pub fn power_iteration<R: Rng + ?Sized>(
    w: &[f64],
    rows: usize,
    cols: usize,
    max_iters: usize,
    tol: f64,
    rng: &mut R,
) -> Option<SingularTriplet> {
    assert_eq!(w.len(), rows * cols, "matrix data does not match shape");
    assert!(max_iters >= 1, "power iteration needs at least one step");
    if dot(w, w).sqrt() < ZERO_NORM {
        return None;
    }

    let mut v: Vec<f64> = (0..cols).map(|_| StandardNormal.sample(rng)).collect();
    normalize(&mut v);
    let mut u = vec![0.0; rows];
    let mut z = vec![0.0; cols];
    let mut iterations = 0;

    for _ in 0..max_iters {
        iterations += 1;
        mat_vec(w, rows, cols, &v, &mut u);
        if normalize(&mut u) == 0.0 {
            // Start landed in the null space; restart along the largest column.
            v = largest_column_direction(w, rows, cols);
            continue;
        }
        mat_t_vec(w, rows, cols, &u, &mut z);
        let sigma = dot(&z, &z).sqrt();
        let residual = z
            .iter()
            .zip(&v)
            .map(|(zi, vi)| (zi - sigma * vi).powi(2))
            .sum::<f64>()
            .sqrt();
        for (vi, zi) in v.iter_mut().zip(&z) {
            *vi = zi / sigma;
        }
        if residual <= tol * sigma {
            break;
        }
    }

    mat_vec(w, rows, cols, &v, &mut u);
    let sigma = normalize(&mut u);
    if sigma == 0.0 {
        return None;
    }
    Some(SingularTriplet {
        u,
        v,
        sigma,
        iterations,
    })
}

fn mat_vec(w: &[f64], rows: usize, cols: usize, v: &[f64], out: &mut [f64]) {
    for i in 0..rows {
        out[i] = dot(&w[i * cols..(i + 1) * cols], v);
    }
}

fn mat_t_vec(w: &[f64], rows: usize, cols: usize, u: &[f64], out: &mut [f64]) {
    out.iter_mut().for_each(|o| *o = 0.0);
    for i in 0..rows {
        let ui = u[i];
        for (o, wij) in out.iter_mut().zip(&w[i * cols..(i + 1) * cols]) {
            *o += ui * wij;
        }
    }
}

fn normalize(x: &mut [f64]) -> f64 {
    let norm = dot(x, x).sqrt();
    if norm > 0.0 {
        x.iter_mut().for_each(|v| *v /= norm);
    }
    norm
}

fn largest_column_direction(w: &[f64], rows: usize, cols: usize) -> Vec<f64> {
    let mut best = 0;
    let mut best_norm = -1.0;
    for j in 0..cols {
        let norm: f64 = (0..rows).map(|i| w[i * cols + j].powi(2)).sum();
        if norm > best_norm {
            best = j;
            best_norm = norm;
        }
    }
    let mut v = vec![0.0; cols];
    v[best] = 1.0;
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    fn pt(v: &[f64]) -> Point {
        Point::new(v.to_vec()).unwrap()
    }

    #[test]
    fn box_lmo_follows_sign_rule() {
        let d = DomainSpec::cube(2, 0.0, 1.0).unwrap();
        let v = d.lmo(&pt(&[1.0, -1.0]), &mut rng::stream(0, "t")).unwrap();
        assert_eq!(v.as_slice(), &[0.0, 1.0]);
    }

    #[test]
    fn l1_lmo_puts_mass_on_largest_coordinate() {
        let d = DomainSpec::l1_ball(2, 2.0).unwrap();
        let v = d.lmo(&pt(&[3.0, -4.0]), &mut rng::stream(0, "t")).unwrap();
        assert_eq!(v.as_slice(), &[0.0, 2.0]);
    }

    #[test]
    fn simplex_lmo_picks_smallest_coordinate() {
        let d = DomainSpec::simplex(3).unwrap();
        let v = d.lmo(&pt(&[0.5, -1.0, 0.2]), &mut rng::stream(0, "t")).unwrap();
        assert_eq!(v.as_slice(), &[0.0, 1.0, 0.0]);
    }

    #[test]
    fn nuclear_lmo_on_diagonal_matrix() {
        let d = DomainSpec::nuclear_ball(2, 2, 5.0).unwrap();
        let w = Point::matrix(2, 2, vec![2.0, 0.0, 0.0, 1.0]).unwrap();
        let v = d.lmo(&w, &mut rng::stream(1, "t")).unwrap();
        assert!((w.dot(&v) + 10.0).abs() < 1e-9);
        let expected = [-5.0, 0.0, 0.0, 0.0];
        for (a, b) in v.as_slice().iter().zip(expected) {
            assert!((a - b).abs() < 1e-6, "{v:?}");
        }
        assert_eq!(v.shape(), Some((2, 2)));
    }

    #[test]
    fn zero_direction_returns_canonical_point() {
        let mut r = rng::stream(0, "t");
        let b = DomainSpec::boxed(vec![-1.0, 2.0], vec![1.0, 3.0]).unwrap();
        assert_eq!(b.lmo(&pt(&[0.0, 0.0]), &mut r).unwrap().as_slice(), &[-1.0, 2.0]);
        let s = DomainSpec::simplex(3).unwrap();
        assert_eq!(s.lmo(&pt(&[0.0; 3]), &mut r).unwrap().as_slice(), &[1.0, 0.0, 0.0]);
        let n = DomainSpec::nuclear_ball(2, 3, 1.0).unwrap();
        let z = Point::matrix(2, 3, vec![0.0; 6]).unwrap();
        assert_eq!(n.lmo(&z, &mut r).unwrap().as_slice(), &[0.0; 6]);
    }

    #[test]
    fn lmo_rejects_bad_input() {
        let d = DomainSpec::cube(2, 0.0, 1.0).unwrap();
        let mut r = rng::stream(0, "t");
        assert!(matches!(
            d.lmo(&pt(&[1.0]), &mut r),
            Err(Error::DimensionMismatch { .. })
        ));
        let mut w = pt(&[1.0, 1.0]);
        w.as_mut_slice()[0] = f64::NAN;
        assert!(matches!(d.lmo(&w, &mut r), Err(Error::NonFinite { .. })));
    }

    #[test]
    fn contains_examples() {
        let b = DomainSpec::cube(2, 0.0, 1.0).unwrap();
        assert!(b.contains(&pt(&[0.5, 1.0]), 0.0).unwrap());
        let l1 = DomainSpec::l1_ball(2, 1.0).unwrap();
        assert!(!l1.contains(&pt(&[0.7, 0.7]), 1e-9).unwrap());
        assert!(b.contains(&pt(&[0.5]), 0.0).is_err());
    }

    #[test]
    fn diameters() {
        assert_eq!(DomainSpec::simplex(4).unwrap().diameter(), 2.0);
        assert_eq!(DomainSpec::l1_ball(3, 1.5).unwrap().diameter(), 3.0);
        assert_eq!(
            DomainSpec::boxed(vec![0.0, -1.0], vec![1.0, 1.0]).unwrap().diameter(),
            3.0
        );
        // ‖k·11ᵀ/√(mn)‖₁ = k√(mn), so the ℓ1 diameter of the nuclear ball is 2k√(mn).
        let nb = DomainSpec::nuclear_ball(4, 9, 2.0).unwrap();
        assert!((nb.diameter() - 24.0).abs() < 1e-12);
    }

    #[test]
    fn invalid_domains_are_rejected() {
        assert!(DomainSpec::boxed(vec![1.0], vec![0.0]).is_err());
        assert!(DomainSpec::l1_ball(2, 0.0).is_err());
        assert!(DomainSpec::nuclear_ball(2, 2, -1.0).is_err());
        assert!(DomainSpec::boxed(vec![0.0], vec![0.0]).is_err());
    }

    #[test]
    fn power_iteration_diagonal() {
        let w = [3.0, 0.0, 0.0, 1.0];
        let top = power_iteration(&w, 2, 2, 100, 1e-12, &mut rng::stream(3, "p")).unwrap();
        assert!((top.sigma - 3.0).abs() < 1e-12);
        assert!((top.u[0].abs() - 1.0).abs() < 1e-9);
        assert!((top.v[0].abs() - 1.0).abs() < 1e-9);
        assert!(top.u[0] * top.v[0] > 0.0, "signs must agree");
    }

    #[test]
    fn power_iteration_rank_one_closed_form() {
        // a = (1, 2), b = (2, 0): σ = ‖a‖‖b‖ = 2√5.
        let w = [2.0, 0.0, 4.0, 0.0];
        let top = power_iteration(&w, 2, 2, 50, 1e-12, &mut rng::stream(4, "p")).unwrap();
        assert!((top.sigma - 2.0 * 5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn power_iteration_signals_null_matrix() {
        assert!(power_iteration(&[0.0; 6], 2, 3, 10, 1e-9, &mut rng::stream(0, "p")).is_none());
    }

    #[test]
    fn default_iteration_budget() {
        assert_eq!(default_power_iters(8, 8), 22);
        assert_eq!(default_power_iters(20, 5), 31);
    }
}
