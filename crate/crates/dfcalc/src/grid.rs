//! Finite integer-step grids with (possibly non-integer) rational base
//! points, grid functions over a scalar backend, the two reflection
//! transforms, and the CSV interchange format.

use std::io::{BufRead, Write};

use num::rational::BigRational;
use num::traits::{One, ToPrimitive};

use crate::error::{Error, Result};
use crate::scalar::{parse_big_rational, Scalar};

/// `count` points `base, base+1, ..., base+count-1`.
///
/// Bases are exact rationals under every backend: alignment and window
/// arithmetic never go through floating point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grid {
    base: BigRational,
    count: usize,
}

impl Grid {
    pub fn new(base: BigRational, count: usize) -> Grid {
        assert!(count >= 1, "a grid has at least one point");
        Grid { base, count }
    }

    pub fn from_integer(base: i64, count: usize) -> Grid {
        Grid::new(BigRational::from_integer(base.into()), count)
    }

    pub fn base(&self) -> &BigRational {
        &self.base
    }

    pub fn count(&self) -> usize {
        self.count
    }

    /// The largest point `base + count - 1`.
    pub fn top(&self) -> BigRational {
        &self.base + BigRational::from_integer((self.count - 1).into())
    }

    pub fn point(&self, index: usize) -> BigRational {
        debug_assert!(index < self.count);
        &self.base + BigRational::from_integer(index.into())
    }

    pub fn point_scalar<S: Scalar>(&self, index: usize) -> S {
        S::from_exact(&self.point(index))
    }

    pub fn points(&self) -> impl Iterator<Item = BigRational> + '_ {
        (0..self.count).map(|i| self.point(i))
    }

    /// Integer offset of `t` from the base, if `t` lies on the lattice
    /// (not necessarily inside the window).
    pub fn lattice_offset(&self, t: &BigRational) -> Option<i64> {
        let d = t - &self.base;
        if d.is_integer() {
            d.to_integer().to_i64()
        } else {
            None
        }
    }

    /// Index of `t` inside the window.
    pub fn index_of(&self, t: &BigRational) -> Option<usize> {
        match self.lattice_offset(t) {
            Some(k) if k >= 0 && (k as usize) < self.count => Some(k as usize),
            _ => None,
        }
    }

    /// Two grids are alignable iff their bases differ by an integer.
    pub fn aligned_with(&self, other: &Grid) -> bool {
        (&self.base - &other.base).is_integer()
    }

    pub fn shifted(&self, delta: &BigRational) -> Grid {
        Grid::new(&self.base + delta, self.count)
    }

    /// Points in `[-top, -base]`: the domain of the symmetric dual.
    pub fn reflected(&self) -> Grid {
        Grid::new(-self.top(), self.count)
    }

    /// The common window of two aligned grids.
    pub fn intersect(&self, other: &Grid) -> Option<Grid> {
        if !self.aligned_with(other) {
            return None;
        }
        let lo = if self.base >= other.base {
            self.base.clone()
        } else {
            other.base.clone()
        };
        let hi = if self.top() <= other.top() {
            self.top()
        } else {
            other.top()
        };
        if hi < lo {
            return None;
        }
        let count = (&hi - &lo).to_integer().to_usize()? + 1;
        Some(Grid::new(lo, count))
    }
}

/// A grid plus one scalar value per point.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction<S: Scalar> {
    grid: Grid,
    values: Vec<S>,
}

impl<S: Scalar> GridFunction<S> {
    pub fn new(grid: Grid, values: Vec<S>) -> Result<Self> {
        if values.len() != grid.count() {
            return Err(Error::Domain(format!(
                "{} values for a grid of {} points",
                values.len(),
                grid.count()
            )));
        }
        Ok(GridFunction { grid, values })
    }

    pub fn constant(grid: Grid, value: S) -> Self {
        let values = vec![value; grid.count()];
        GridFunction { grid, values }
    }

    /// Sample a function of the point value.
    pub fn sample(grid: Grid, f: impl Fn(&S) -> S) -> Self {
        let values = (0..grid.count())
            .map(|i| f(&grid.point_scalar::<S>(i)))
            .collect();
        GridFunction { grid, values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }

    pub fn into_parts(self) -> (Grid, Vec<S>) {
        (self.grid, self.values)
    }

    pub fn value_at(&self, t: &BigRational) -> Option<&S> {
        self.grid.index_of(t).map(|i| &self.values[i])
    }

    /// `f*(t) = f(-t)` on the reflected grid. An involution.
    pub fn symmetric_dual(&self) -> Self {
        let mut values = self.values.clone();
        values.reverse();
        GridFunction {
            grid: self.grid.reflected(),
            values,
        }
    }

    /// `Qf(t) = f(a+b-t)`: reflection within the window, same grid.
    pub fn q_reflect(&self) -> Self {
        let mut values = self.values.clone();
        values.reverse();
        GridFunction {
            grid: self.grid.clone(),
            values,
        }
    }

    pub fn restrict(&self, sub: &Grid) -> Result<Self> {
        if !self.grid.aligned_with(sub) {
            return Err(Error::Domain(format!(
                "restriction grid base {} is not aligned with {}",
                sub.base(),
                self.grid.base()
            )));
        }
        let start = self.grid.index_of(sub.base()).ok_or_else(|| {
            Error::Domain(format!("restriction base {} outside the window", sub.base()))
        })?;
        if start + sub.count() > self.grid.count() {
            return Err(Error::Domain(format!(
                "restriction window of {} points overruns the function",
                sub.count()
            )));
        }
        Ok(GridFunction {
            grid: sub.clone(),
            values: self.values[start..start + sub.count()].to_vec(),
        })
    }

    pub fn negated(&self) -> Self {
        GridFunction {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| -v.clone()).collect(),
        }
    }

    pub fn scaled(&self, c: &S) -> Self {
        GridFunction {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| c.clone() * v.clone()).collect(),
        }
    }

    /// `c1 f + c2 g` on a shared grid.
    pub fn linear_combination(c1: &S, f: &Self, c2: &S, g: &Self) -> Result<Self> {
        if f.grid != g.grid {
            return Err(Error::Domain(
                "linear combination requires identical grids".into(),
            ));
        }
        let values = f
            .values
            .iter()
            .zip(&g.values)
            .map(|(a, b)| c1.clone() * a.clone() + c2.clone() * b.clone())
            .collect();
        Ok(GridFunction {
            grid: f.grid.clone(),
            values,
        })
    }

    pub fn max_abs(&self) -> S {
        let mut m = S::zero();
        for v in &self.values {
            let a = v.abs();
            if a > m {
                m = a;
            }
        }
        m
    }
}

// --- CSV interchange ---------------------------------------------------------

/// Read a `t,value` CSV (header required). The `t` column must form a
/// step-one progression; `t` is always parsed exactly, values through the
/// backend's grammar.
pub fn read_csv<S: Scalar, R: BufRead>(reader: R) -> Result<GridFunction<S>> {
    let mut lines = reader.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty CSV".into()))?
        .map_err(|e| Error::Parse(format!("read failure: {e}")))?;
    let norm: String = header.split_whitespace().collect::<String>().to_lowercase();
    if norm != "t,value" {
        return Err(Error::Parse(format!(
            "expected header `t,value`, got {header:?}"
        )));
    }
    let mut ts: Vec<BigRational> = Vec::new();
    let mut values: Vec<S> = Vec::new();
    for (lineno, line) in lines.enumerate() {
        let line = line.map_err(|e| Error::Parse(format!("read failure: {e}")))?;
        if line.trim().is_empty() {
            continue;
        }
        let (t_str, v_str) = line.split_once(',').ok_or_else(|| {
            Error::Parse(format!("line {}: expected `t,value`", lineno + 2))
        })?;
        ts.push(parse_big_rational(t_str)?);
        values.push(S::parse_text(v_str)?);
    }
    if ts.is_empty() {
        return Err(Error::Parse("CSV has no data rows".into()));
    }
    // Exact backends demand an exact step of one. Float CSVs carry doubles
    // rounded point by point, so allow rounding slack there.
    let one = BigRational::one();
    for w in ts.windows(2) {
        let step = &w[1] - &w[0];
        let ok = match S::BACKEND {
            crate::scalar::Backend::Exact => step == one,
            crate::scalar::Backend::Float => {
                (crate::scalar::big_rational_to_f64(&step) - 1.0).abs() <= 1e-9
            }
        };
        if !ok {
            return Err(Error::Parse(format!(
                "t column must step by one: {} then {}",
                w[0], w[1]
            )));
        }
    }
    GridFunction::new(Grid::new(ts[0].clone(), ts.len()), values)
}

/// Write the `t,value` CSV form. Exact backends print `t` as a rational,
/// the float backend as the nearest double.
pub fn write_csv<S: Scalar, W: Write>(f: &GridFunction<S>, mut w: W) -> std::io::Result<()> {
    writeln!(w, "t,value")?;
    for (i, v) in f.values().iter().enumerate() {
        let t = f.grid().point(i);
        let t_str = match S::BACKEND {
            crate::scalar::Backend::Exact => {
                if t.denom().is_one() {
                    format!("{}", t.numer())
                } else {
                    format!("{}/{}", t.numer(), t.denom())
                }
            }
            crate::scalar::Backend::Float => {
                format!("{}", crate::scalar::big_rational_to_f64(&t))
            }
        };
        writeln!(w, "{},{}", t_str, v.render())?;
    }
    Ok(())
}

pub fn csv_string<S: Scalar>(f: &GridFunction<S>) -> String {
    let mut buf = Vec::new();
    write_csv(f, &mut buf).expect("write to Vec cannot fail");
    String::from_utf8(buf).expect("CSV is ASCII")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;


    type Q = BigRational;

    fn q(n: i64, d: i64) -> Q {
        Q::new(n.into(), d.into())
    }

    fn gf(base: i64, vals: &[i64]) -> GridFunction<Q> {
        GridFunction::new(
            Grid::from_integer(base, vals.len()),
            vals.iter().map(|&v| Q::from_int(v)).collect(),
        )
        .unwrap()
    }

    #[test]
    fn symmetric_dual_examples() {
        let f = gf(0, &[5, 6, 7, 8, 9]);
        let d = f.symmetric_dual();
        assert_eq!(d.grid(), &Grid::from_integer(-4, 5));
        assert_eq!(d.values(), gf(-4, &[9, 8, 7, 6, 5]).values());

        let c = GridFunction::constant(Grid::from_integer(2, 5), Q::from_int(3));
        let cd = c.symmetric_dual();
        assert_eq!(cd.grid(), &Grid::from_integer(-6, 5));
        assert!(cd.values().iter().all(|v| v == &Q::from_int(3)));

        let id = GridFunction::<Q>::sample(Grid::from_integer(0, 4), |t| t.clone());
        let idd = id.symmetric_dual();
        assert_eq!(idd.values(), gf(-3, &[3, 2, 1, 0]).values());
    }

    #[test]
    fn q_reflect_examples() {
        let f = gf(0, &[1, 2, 3, 4, 5]);
        let r = f.q_reflect();
        assert_eq!(r.grid(), f.grid());
        assert_eq!(r.values(), gf(0, &[5, 4, 3, 2, 1]).values());

        let c = GridFunction::constant(Grid::from_integer(1, 4), q(2, 3));
        assert_eq!(c.q_reflect(), c);

        let id = GridFunction::<Q>::sample(Grid::from_integer(1, 3), |t| t.clone());
        assert_eq!(id.q_reflect().values(), gf(1, &[3, 2, 1]).values());
    }

    #[test]
    fn q_reflect_is_dual_plus_shift() {
        let f = gf(2, &[4, -1, 7, 0]);
        let a_plus_b = f.grid().base() + f.grid().top();
        let via_dual = f.symmetric_dual();
        let shifted = Grid::new(via_dual.grid().base() + &a_plus_b, f.grid().count());
        let rebuilt = GridFunction::new(shifted, via_dual.values().to_vec()).unwrap();
        assert_eq!(rebuilt, f.q_reflect());
    }

    #[test]
    fn restrict_examples() {
        let f = gf(0, &[0, 1, 2, 3, 4, 5]);
        let mid = f.restrict(&Grid::from_integer(2, 3)).unwrap();
        assert_eq!(mid.values(), gf(2, &[2, 3, 4]).values());
        assert_eq!(f.restrict(f.grid()).unwrap(), f);

        // α-shifted case
        let g = GridFunction::new(
            Grid::new(q(1, 2), 3),
            vec![Q::from_int(10), Q::from_int(20), Q::from_int(30)],
        )
        .unwrap();
        let sub = Grid::new(q(3, 2), 2);
        assert_eq!(
            g.restrict(&sub).unwrap().values(),
            &[Q::from_int(20), Q::from_int(30)]
        );

        assert!(f.restrict(&Grid::new(q(1, 2), 2)).is_err());
        assert!(f.restrict(&Grid::from_integer(4, 5)).is_err());
    }

    #[test]
    fn alignment_and_intersection() {
        let a = Grid::new(q(1, 2), 6);
        let b = Grid::new(q(5, 2), 6);
        assert!(a.aligned_with(&b));
        assert!(!a.aligned_with(&Grid::from_integer(0, 3)));
        let i = a.intersect(&b).unwrap();
        assert_eq!(i, Grid::new(q(5, 2), 4));
        assert!(Grid::from_integer(0, 2).intersect(&Grid::from_integer(5, 2)).is_none());
    }

    #[test]
    fn csv_round_trip_exact_is_byte_stable() {
        let f = GridFunction::new(
            Grid::new(q(1, 2), 3),
            vec![q(1, 3), q(-7, 2), Q::from_int(4)],
        )
        .unwrap();
        let text = csv_string(&f);
        let back: GridFunction<Q> = read_csv(text.as_bytes()).unwrap();
        assert_eq!(back, f);
        assert_eq!(csv_string(&back), text);
    }

    #[test]
    fn csv_rejects_bad_steps_and_headers() {
        assert!(read_csv::<Q, _>("t,value\n0,1\n2,1\n".as_bytes()).is_err());
        assert!(read_csv::<Q, _>("x,y\n0,1\n".as_bytes()).is_err());
        assert!(read_csv::<Q, _>("t,value\n".as_bytes()).is_err());
    }

    proptest! {
        #[test]
        fn reflections_are_involutions(base in -20i64..20, vals in proptest::collection::vec(-50i64..50, 1..12)) {
            let f = gf(base, &vals);
            prop_assert_eq!(f.symmetric_dual().symmetric_dual(), f.clone());
            prop_assert_eq!(f.q_reflect().q_reflect(), f.clone());
            // value multisets preserved (here: sorted equality)
            let mut orig: Vec<_> = f.values().to_vec();
            let mut dual: Vec<_> = f.symmetric_dual().values().to_vec();
            orig.sort();
            dual.sort();
            prop_assert_eq!(orig, dual);
        }

        #[test]
        fn float_csv_round_trips_values(base in -5i64..5, vals in proptest::collection::vec(-1.0e6f64..1.0e6, 1..10)) {
            let f = GridFunction::<f64>::new(Grid::from_integer(base, vals.len()), vals).unwrap();
            let text = csv_string(&f);
            let back: GridFunction<f64> = read_csv(text.as_bytes()).unwrap();
            prop_assert_eq!(back.values(), f.values());
        }
    }
}
