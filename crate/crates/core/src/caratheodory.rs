//! Writing a point of a polytope as a convex combination of at most
//! `dim + 1` corners, given boundary, separation and corner oracles.
//!
//! Each round takes a corner `a` on every hyperplane collected so far, walks
//! from `a` through the current point `z` until the polytope boundary, and
//! adds the hyperplane hit there. The exit point is found exactly by
//! repeatedly intersecting the ray with whatever hyperplane the separation
//! oracle reports, so no perturbation is needed.

use num_traits::{One, Signed, Zero};

use crate::error::CaratheodoryError;
use crate::model::Hyperplane;
use crate::rational::{sparse_dot, Rational};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Separation {
    Inside,
    Violated(Hyperplane),
}

/// A vertex of the polytope together with whatever the oracle used to build
/// it (for mechanism polytopes, the mechanism).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corner<T> {
    pub point: Vec<Rational>,
    pub tag: T,
}

pub trait PolytopeOracles {
    type Tag: Clone;

    fn dimension(&self) -> usize;

    /// Whether `h` is one of the inequalities describing the polytope.
    fn is_boundary(&self, h: &Hyperplane) -> bool;

    fn separate(&self, x: &[Rational]) -> Separation;

    /// A vertex lying on every hyperplane in `tight`, or `None` if their
    /// intersection misses the polytope.
    fn corner(&self, tight: &[Hyperplane]) -> Option<Corner<Self::Tag>>;

    /// Every point of the polytope lies in `[-R, R]^dim`.
    fn bounding_radius(&self) -> Rational {
        Rational::one()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConvexCombination<T> {
    pub entries: Vec<(Rational, Corner<T>)>,
}

impl<T> ConvexCombination<T> {
    pub fn recompose(&self) -> Vec<Rational> {
        let dim = self.entries.first().map_or(0, |(_, c)| c.point.len());
        let mut out = vec![Rational::zero(); dim];
        for (w, c) in &self.entries {
            for (o, v) in out.iter_mut().zip(&c.point) {
                *o += w * v;
            }
        }
        out
    }
}

fn along(z: &[Rational], dir: &[Rational], d: &Rational) -> Vec<Rational> {
    z.iter().zip(dir).map(|(zi, di)| zi + d * di).collect()
}

/// Ray parameter where `z + d·dir` meets `h`, if the ray moves toward it.
fn crossing(h: &Hyperplane, z: &[Rational], dir: &[Rational]) -> Option<Rational> {
    let rate = sparse_dot(&h.coeffs, dir);
    if !rate.is_positive() {
        return None;
    }
    Some((&h.rhs - h.lhs(z)) / rate)
}

/// Largest `D` with `(1 + D)z − D·a` in the polytope, and a hyperplane that
/// is tight there and violated beyond.
pub fn ray_shoot<O: PolytopeOracles + ?Sized>(
    z: &[Rational],
    a: &[Rational],
    oracles: &O,
) -> Result<(Rational, Hyperplane), CaratheodoryError> {
    let dir: Vec<Rational> = z.iter().zip(a).map(|(zi, ai)| zi - ai).collect();
    let gap = dir
        .iter()
        .map(|v| v.abs())
        .max()
        .unwrap_or_else(Rational::zero);
    if gap.is_zero() {
        return Err(CaratheodoryError::DegenerateRay);
    }
    let two = Rational::from_integer(2.into());
    let mut d = two * oracles.bounding_radius() / &gap + Rational::one();
    let mut last: Option<Hyperplane> = None;
    loop {
        match oracles.separate(&along(z, &dir, &d)) {
            Separation::Inside => {
                return match last {
                    Some(h) => Ok((d, h)),
                    None => Err(CaratheodoryError::OracleInconsistency(
                        "probe beyond the bounding box is inside the polytope".into(),
                    )),
                };
            }
            Separation::Violated(h) => {
                let next = crossing(&h, z, &dir).ok_or_else(|| {
                    CaratheodoryError::OracleInconsistency(
                        "separating hyperplane does not cut the ray".into(),
                    )
                })?;
                if next.is_negative() || next >= d {
                    return Err(CaratheodoryError::OracleInconsistency(
                        "separating hyperplane is violated at the start of the ray".into(),
                    ));
                }
                d = next;
                last = Some(h);
            }
        }
    }
}

/// `ray_shoot` over an explicit list of hyperplanes: the smallest crossing,
/// ties broken by the hyperplane order.
pub fn ray_shoot_explicit(
    z: &[Rational],
    a: &[Rational],
    hyperplanes: &[Hyperplane],
) -> Result<(Rational, Hyperplane), CaratheodoryError> {
    let dir: Vec<Rational> = z.iter().zip(a).map(|(zi, ai)| zi - ai).collect();
    if dir.iter().all(Zero::is_zero) {
        return Err(CaratheodoryError::DegenerateRay);
    }
    hyperplanes
        .iter()
        .filter_map(|h| crossing(h, z, &dir).map(|d| (d, h)))
        .min_by(|x, y| x.0.cmp(&y.0).then_with(|| x.1.cmp(y.1)))
        .map(|(d, h)| (d, h.clone()))
        .ok_or_else(|| CaratheodoryError::OracleInconsistency("ray is unbounded".into()))
}

pub fn decompose<O: PolytopeOracles + ?Sized>(
    x: &[Rational],
    oracles: &O,
) -> Result<ConvexCombination<O::Tag>, CaratheodoryError> {
    decompose_traced(x, oracles, |_, _| {})
}

/// `decompose`, calling `step` with the tight set and the corner chosen in
/// every round.
pub fn decompose_traced<O, F>(
    x: &[Rational],
    oracles: &O,
    mut step: F,
) -> Result<ConvexCombination<O::Tag>, CaratheodoryError>
where
    O: PolytopeOracles + ?Sized,
    F: FnMut(&[Hyperplane], &Corner<O::Tag>),
{
    if oracles.separate(x) != Separation::Inside {
        return Err(CaratheodoryError::NotInPolytope);
    }
    let mut tight: Vec<Hyperplane> = Vec::new();
    let mut z = x.to_vec();
    let mut used = Rational::zero();
    let mut entries = Vec::new();
    for _ in 0..=oracles.dimension() {
        let corner = oracles.corner(&tight).ok_or_else(|| {
            CaratheodoryError::OracleInconsistency(
                "no corner on hyperplanes that contain a feasible point".into(),
            )
        })?;
        step(&tight, &corner);
        if corner.point == z {
            let rest = Rational::one() - &used;
            if rest.is_positive() {
                entries.push((rest, corner));
            }
            return Ok(ConvexCombination { entries });
        }
        let (d, h) = ray_shoot(&z, &corner.point, oracles)?;
        let weight = (Rational::one() - &used) * &d / (Rational::one() + &d);
        let dir: Vec<Rational> = z
            .iter()
            .zip(&corner.point)
            .map(|(zi, ai)| zi - ai)
            .collect();
        z = along(&z, &dir, &d);
        if weight.is_positive() {
            used += &weight;
            entries.push((weight, corner));
        }
        if !oracles.is_boundary(&h) {
            return Err(CaratheodoryError::OracleInconsistency(
                "separation returned a hyperplane the boundary oracle rejects".into(),
            ));
        }
        tight.push(h);
    }
    Err(CaratheodoryError::OracleInconsistency(
        "tight set exceeded the dimension".into(),
    ))
}
