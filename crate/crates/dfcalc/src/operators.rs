//! The twelve fractional operators (delta/nabla x left/right x
//! sum/Riemann–Liouville/Caputo), the signed integer differences, and their
//! dense matrices.
//!
//! Domain laws (window of `N` points, anchor `a` on the left / `b` on the
//! right, `n - 1 < alpha <= n`):
//!
//! | operator            | output window                                   |
//! |---------------------|-------------------------------------------------|
//! | delta left sum      | base `a + alpha`, `N` points                    |
//! | delta right sum     | top `b - alpha`, `N` points                     |
//! | nabla left sum      | base `a`, value 0 there                         |
//! | nabla right sum     | top `b`, value 0 there                          |
//! | delta left RL       | base `a + (n - alpha)`, `N - n` points          |
//! | delta right RL      | top `b - (n - alpha)`, `N - n` points           |
//! | nabla left RL       | base `a + n`, `N - n` points                    |
//! | nabla right RL      | top `b - n`, `N - n` points                     |
//! | delta left Caputo   | base `a + (n - alpha)`, `N - n` points          |
//! | delta right Caputo  | top `b - (n - alpha)`, `N - n` points           |
//! | nabla left Caputo   | base `a + n - 1`, `N - n + 1` points            |
//! | nabla right Caputo  | top `b - n + 1`, `N - n + 1` points             |
//!
//! An output point exists only when every kernel term it needs lies inside
//! the input window; outputs never extrapolate. Nabla sums admit an anchor
//! one step outside the window (the summation never reads the anchor
//! point), which the shifting identities between delta and nabla operators
//! rely on.

use num::rational::BigRational;
use num::traits::One;

use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction};
use crate::kernels::{kernel_sequence, FracOrder};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Delta,
    Nabla,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Flavor {
    Sum,
    RiemannLiouville,
    Caputo,
}

/// One fractional operator: direction, side, flavor, order, and the anchor
/// (`a` for left operators, `b` for right ones).
///
/// Caputo operators take the *window* endpoint as anchor and derive the
/// shifted summation anchor `a(alpha) = a + n - 1` (left nabla) or
/// `b(alpha) = b - n + 1` (right nabla) internally, so callers cannot get
/// that bookkeeping wrong.
#[derive(Debug, Clone)]
pub struct OperatorSpec<S: Scalar> {
    pub direction: Direction,
    pub side: Side,
    pub flavor: Flavor,
    pub order: FracOrder<S>,
    pub anchor: BigRational,
}

impl<S: Scalar> OperatorSpec<S> {
    pub fn new(
        direction: Direction,
        side: Side,
        flavor: Flavor,
        order: FracOrder<S>,
        anchor: BigRational,
    ) -> Self {
        OperatorSpec {
            direction,
            side,
            flavor,
            order,
            anchor,
        }
    }

    pub fn apply(&self, f: &GridFunction<S>) -> Result<GridFunction<S>> {
        match self.flavor {
            Flavor::Sum => frac_sum(self, f),
            Flavor::RiemannLiouville => frac_diff_rl(self, f),
            Flavor::Caputo => frac_diff_caputo(self, f),
        }
    }

    /// The output window mandated by the domain laws, computed structurally.
    pub fn output_grid(&self, input: &Grid) -> Result<Grid> {
        let n = self.order.n() as usize;
        let alpha_ex = self.order.exact().clone();
        let n_rat = BigRational::from_integer((self.order.n() as i64).into());
        match self.flavor {
            Flavor::Sum => sum_output_grid(self, input, &alpha_ex),
            Flavor::RiemannLiouville => {
                let inner = match self.order.complement()? {
                    Some(c) => sum_output_grid(self, input, c.exact())?,
                    None => effective_window(self, input)?
                        .intersect(input)
                        .ok_or_else(|| {
                            Error::Domain("operator window misses the grid".into())
                        })?,
                };
                if inner.count() <= n {
                    return Err(Error::Domain(format!(
                        "window of {} points is too small for order n = {n}",
                        inner.count()
                    )));
                }
                // The outer integer difference of the RL composition drops
                // points at the top for delta-left/nabla-right and at the
                // bottom for the other two.
                Ok(match (self.direction, self.side) {
                    (Direction::Delta, Side::Left) | (Direction::Nabla, Side::Right) => {
                        Grid::new(inner.base().clone(), inner.count() - n)
                    }
                    (Direction::Nabla, Side::Left) | (Direction::Delta, Side::Right) => {
                        Grid::new(inner.base() + n_rat, inner.count() - n)
                    }
                })
            }
            Flavor::Caputo => {
                if input.index_of(&self.anchor).is_none() {
                    return Err(Error::Domain(format!(
                        "Caputo anchor {} must be a grid point",
                        self.anchor
                    )));
                }
                let window = effective_window(self, input)?;
                if window.count() <= n {
                    return Err(Error::Domain(format!(
                        "window of {} points is too small for order n = {n}",
                        window.count()
                    )));
                }
                let m = window.count() - n;
                if self.order.is_integer() {
                    // order-zero outer sum: the result is the bare integer
                    // difference on its own window
                    return Ok(match (self.direction, self.side) {
                        (Direction::Delta, Side::Left) | (Direction::Nabla, Side::Right) => {
                            Grid::new(window.base().clone(), m)
                        }
                        (Direction::Nabla, Side::Left) | (Direction::Delta, Side::Right) => {
                            Grid::new(window.base() + n_rat, m)
                        }
                    });
                }
                Ok(match (self.direction, self.side) {
                    (Direction::Delta, Side::Left) => {
                        Grid::new(window.base() + (&n_rat - &alpha_ex), m)
                    }
                    (Direction::Delta, Side::Right) => {
                        let top = window.top() - (&n_rat - &alpha_ex);
                        Grid::new(top - BigRational::from_integer((m as i64 - 1).into()), m)
                    }
                    (Direction::Nabla, Side::Left) => {
                        Grid::new(window.base() + &n_rat - BigRational::one(), m + 1)
                    }
                    (Direction::Nabla, Side::Right) => {
                        let top = window.top() - &n_rat + BigRational::one();
                        Grid::new(top - BigRational::from_integer((m as i64).into()), m + 1)
                    }
                })
            }
        }
    }

    /// Dense matrix of the operator on a given input window: column `j` is
    /// the operator applied to the `j`-th indicator function.
    pub fn matrix(&self, input: &Grid) -> Result<OperatorMatrix<S>> {
        matrix_of(|f| self.apply(f), input)
    }
}

/// The window of input points the operator actually reads, given its anchor.
fn effective_window<S: Scalar>(spec: &OperatorSpec<S>, input: &Grid) -> Result<Grid> {
    let off = input.lattice_offset(&spec.anchor).ok_or_else(|| {
        Error::Domain(format!(
            "anchor {} is not aligned with the grid based at {}",
            spec.anchor,
            input.base()
        ))
    })?;
    let count = input.count() as i64;
    match (spec.direction, spec.side) {
        // Left operators read the points >= a.
        (Direction::Delta, Side::Left) => {
            if off < 0 || off >= count {
                return Err(Error::Domain(format!(
                    "left anchor {} outside the window",
                    spec.anchor
                )));
            }
            Ok(Grid::new(spec.anchor.clone(), (count - off) as usize))
        }
        // Right operators read the points <= b.
        (Direction::Delta, Side::Right) => {
            if off < 0 || off >= count {
                return Err(Error::Domain(format!(
                    "right anchor {} outside the window",
                    spec.anchor
                )));
            }
            Ok(Grid::new(input.base().clone(), off as usize + 1))
        }
        // Nabla sums never read the anchor itself, so the anchor may sit
        // one step outside the window.
        (Direction::Nabla, Side::Left) => {
            if off < -1 || off >= count {
                return Err(Error::Domain(format!(
                    "nabla left anchor {} outside the admissible range",
                    spec.anchor
                )));
            }
            let k = count - 1 - off; // summand count
            Ok(Grid::new(spec.anchor.clone(), k as usize + 1))
        }
        (Direction::Nabla, Side::Right) => {
            if off < 0 || off > count {
                return Err(Error::Domain(format!(
                    "nabla right anchor {} outside the admissible range",
                    spec.anchor
                )));
            }
            let k = off; // summand count
            Ok(Grid::new(
                &spec.anchor - BigRational::from_integer(k.into()),
                k as usize + 1,
            ))
        }
    }
}

fn sum_output_grid<S: Scalar>(
    spec: &OperatorSpec<S>,
    input: &Grid,
    alpha_ex: &BigRational,
) -> Result<Grid> {
    let window = effective_window(spec, input)?;
    Ok(match (spec.direction, spec.side) {
        (Direction::Delta, Side::Left) => Grid::new(window.base() + alpha_ex, window.count()),
        (Direction::Delta, Side::Right) => {
            let top = window.top() - alpha_ex;
            Grid::new(
                top - BigRational::from_integer((window.count() as i64 - 1).into()),
                window.count(),
            )
        }
        // Nabla sums live on {anchor, .., top} resp. {anchor-K, .., anchor};
        // effective_window already has that shape.
        (Direction::Nabla, _) => window,
    })
}

// --- raw kernel convolutions --------------------------------------------------
//
// These take the order as a bare scalar so the identity module can drive the
// extended (negative, non-integer) orders the commutation lemmas allow.

/// `out[0] = 0`, `out[k] = Σ_{m=1..k} c_{k-m}(alpha) v[m-1]` (nabla shape).
pub(crate) fn conv_nabla<S: Scalar>(alpha: &S, v: &[S]) -> Result<Vec<S>> {
    let k_max = v.len();
    let coeffs = if k_max == 0 {
        Vec::new()
    } else {
        kernel_sequence(alpha, k_max - 1)?.coeffs
    };
    let mut out = Vec::with_capacity(k_max + 1);
    out.push(S::zero());
    for k in 1..=k_max {
        let mut acc = S::zero();
        for m in 1..=k {
            acc = acc + coeffs[k - m].clone() * v[m - 1].clone();
        }
        out.push(acc);
    }
    Ok(out)
}

/// `out[k] = Σ_{j=0..k} c_{k-j}(alpha) v[j]` (delta shape).
pub(crate) fn conv_delta<S: Scalar>(alpha: &S, v: &[S]) -> Result<Vec<S>> {
    if v.is_empty() {
        return Ok(Vec::new());
    }
    let coeffs = kernel_sequence(alpha, v.len() - 1)?.coeffs;
    let mut out = Vec::with_capacity(v.len());
    for k in 0..v.len() {
        let mut acc = S::zero();
        for j in 0..=k {
            acc = acc + coeffs[k - j].clone() * v[j].clone();
        }
        out.push(acc);
    }
    Ok(out)
}

/// Nabla left sum of arbitrary real order (`alpha` not a nonpositive
/// integer). Anchor may be `base - 1`; the anchor point is never read.
pub(crate) fn nabla_left_sum_any<S: Scalar>(
    alpha: &S,
    anchor: &BigRational,
    f: &GridFunction<S>,
) -> Result<GridFunction<S>> {
    let off = f
        .grid()
        .lattice_offset(anchor)
        .ok_or_else(|| Error::Domain(format!("anchor {anchor} not aligned with the grid")))?;
    let count = f.grid().count() as i64;
    if off < -1 || off >= count {
        return Err(Error::Domain(format!(
            "nabla left anchor {anchor} outside the admissible range"
        )));
    }
    let first = (off + 1) as usize;
    let values = conv_nabla(alpha, &f.values()[first..])?;
    GridFunction::new(Grid::new(anchor.clone(), values.len()), values)
}

/// Nabla right sum of arbitrary real order; anchor may be `top + 1`.
pub(crate) fn nabla_right_sum_any<S: Scalar>(
    alpha: &S,
    anchor: &BigRational,
    f: &GridFunction<S>,
) -> Result<GridFunction<S>> {
    let off = f
        .grid()
        .lattice_offset(anchor)
        .ok_or_else(|| Error::Domain(format!("anchor {anchor} not aligned with the grid")))?;
    let count = f.grid().count() as i64;
    if off < 0 || off > count {
        return Err(Error::Domain(format!(
            "nabla right anchor {anchor} outside the admissible range"
        )));
    }
    let k = off as usize; // summands: points <= anchor - 1
    let mut v: Vec<S> = f.values()[..k].to_vec();
    v.reverse();
    let mut values = conv_nabla(alpha, &v)?;
    values.reverse();
    let base = anchor - BigRational::from_integer((k as i64).into());
    GridFunction::new(Grid::new(base, values.len()), values)
}

fn delta_left_sum<S: Scalar>(
    order: &FracOrder<S>,
    anchor: &BigRational,
    f: &GridFunction<S>,
) -> Result<GridFunction<S>> {
    let idx = f
        .grid()
        .index_of(anchor)
        .ok_or_else(|| Error::Domain(format!("delta left anchor {anchor} outside the window")))?;
    let values = conv_delta(order.alpha(), &f.values()[idx..])?;
    GridFunction::new(Grid::new(anchor + order.exact(), values.len()), values)
}

fn delta_right_sum<S: Scalar>(
    order: &FracOrder<S>,
    anchor: &BigRational,
    f: &GridFunction<S>,
) -> Result<GridFunction<S>> {
    let idx = f
        .grid()
        .index_of(anchor)
        .ok_or_else(|| Error::Domain(format!("delta right anchor {anchor} outside the window")))?;
    let mut v: Vec<S> = f.values()[..=idx].to_vec();
    v.reverse();
    let mut values = conv_delta(order.alpha(), &v)?;
    values.reverse();
    let top = anchor - order.exact();
    let base = top - BigRational::from_integer((values.len() as i64 - 1).into());
    GridFunction::new(Grid::new(base, values.len()), values)
}

/// Fractional sum of order `alpha > 0` (all four direction/side variants).
pub fn frac_sum<S: Scalar>(spec: &OperatorSpec<S>, f: &GridFunction<S>) -> Result<GridFunction<S>> {
    match (spec.direction, spec.side) {
        (Direction::Nabla, Side::Left) => nabla_left_sum_any(spec.order.alpha(), &spec.anchor, f),
        (Direction::Nabla, Side::Right) => nabla_right_sum_any(spec.order.alpha(), &spec.anchor, f),
        (Direction::Delta, Side::Left) => delta_left_sum(&spec.order, &spec.anchor, f),
        (Direction::Delta, Side::Right) => delta_right_sum(&spec.order, &spec.anchor, f),
    }
}

/// `p`-fold forward or backward difference; `signed` multiplies by `(-1)^p`.
pub fn int_diff<S: Scalar>(
    direction: Direction,
    signed: bool,
    p: u32,
    f: &GridFunction<S>,
) -> Result<GridFunction<S>> {
    if p == 0 {
        return Err(Error::Domain(
            "integer difference order must be positive".into(),
        ));
    }
    if f.grid().count() <= p as usize {
        return Err(Error::Domain(format!(
            "grid of {} points is too small for a difference of order {p}",
            f.grid().count()
        )));
    }
    let mut grid = f.grid().clone();
    let mut values = f.values().to_vec();
    for _ in 0..p {
        let m = values.len() - 1;
        let mut next = Vec::with_capacity(m);
        for i in 0..m {
            next.push(values[i + 1].clone() - values[i].clone());
        }
        values = next;
        grid = match direction {
            // Δf(t) = f(t+1) - f(t): the top point drops.
            Direction::Delta => Grid::new(grid.base().clone(), m),
            // ∇f(t) = f(t) - f(t-1): the bottom point drops.
            Direction::Nabla => Grid::new(grid.base() + BigRational::one(), m),
        };
    }
    if signed && p % 2 == 1 {
        values = values.into_iter().map(|v| -v).collect();
    }
    GridFunction::new(grid, values)
}

/// Riemann–Liouville fractional difference: integer difference of order `n`
/// after a fractional sum of order `n - alpha` (the order-zero sum is the
/// identity, so integer orders reduce to the signed integer differences).
pub fn frac_diff_rl<S: Scalar>(
    spec: &OperatorSpec<S>,
    f: &GridFunction<S>,
) -> Result<GridFunction<S>> {
    let n = spec.order.n();
    let inner = match spec.order.complement()? {
        Some(c) => {
            let sum_spec = OperatorSpec::new(
                spec.direction,
                spec.side,
                Flavor::Sum,
                c,
                spec.anchor.clone(),
            );
            frac_sum(&sum_spec, f)?
        }
        None => {
            // Order-zero inner sum: the identity on the points the sum
            // would read (a nabla anchor one step outside contributes no
            // readable point).
            let window = effective_window(spec, f.grid())?
                .intersect(f.grid())
                .ok_or_else(|| Error::Domain("operator window misses the grid".into()))?;
            f.restrict(&window)?
        }
    };
    match (spec.direction, spec.side) {
        (Direction::Delta, Side::Left) => int_diff(Direction::Delta, false, n, &inner),
        (Direction::Delta, Side::Right) => int_diff(Direction::Nabla, true, n, &inner),
        (Direction::Nabla, Side::Left) => int_diff(Direction::Nabla, false, n, &inner),
        (Direction::Nabla, Side::Right) => int_diff(Direction::Delta, true, n, &inner),
    }
}

/// Caputo fractional difference: fractional sum of order `n - alpha`
/// applied to the `n`-th integer difference. Annihilates polynomials of
/// degree below `n`.
pub fn frac_diff_caputo<S: Scalar>(
    spec: &OperatorSpec<S>,
    f: &GridFunction<S>,
) -> Result<GridFunction<S>> {
    let n = spec.order.n();
    if f.grid().index_of(&spec.anchor).is_none() {
        return Err(Error::Domain(format!(
            "Caputo anchor {} must be a grid point",
            spec.anchor
        )));
    }
    let window = effective_window(spec, f.grid())?;
    let f_eff = f.restrict(&window)?;
    let inner = match (spec.direction, spec.side) {
        (Direction::Delta, Side::Left) => int_diff(Direction::Delta, false, n, &f_eff)?,
        (Direction::Delta, Side::Right) => int_diff(Direction::Nabla, true, n, &f_eff)?,
        (Direction::Nabla, Side::Left) => int_diff(Direction::Nabla, false, n, &f_eff)?,
        (Direction::Nabla, Side::Right) => int_diff(Direction::Delta, true, n, &f_eff)?,
    };
    let n_rat = BigRational::from_integer((n as i64).into());
    match spec.order.complement()? {
        None => Ok(inner),
        Some(c) => match (spec.direction, spec.side) {
            (Direction::Delta, Side::Left) => delta_left_sum(&c, &spec.anchor, &inner),
            (Direction::Delta, Side::Right) => delta_right_sum(&c, &spec.anchor, &inner),
            (Direction::Nabla, Side::Left) => {
                // a(alpha) = a + n - 1
                let shifted = &spec.anchor + n_rat - BigRational::one();
                nabla_left_sum_any(c.alpha(), &shifted, &inner)
            }
            (Direction::Nabla, Side::Right) => {
                // b(alpha) = b - n + 1
                let shifted = &spec.anchor - n_rat + BigRational::one();
                nabla_right_sum_any(c.alpha(), &shifted, &inner)
            }
        },
    }
}

// --- dense matrices ------------------------------------------------------------

/// Dense matrix of a linear operator between two grids (rows = output
/// points, columns = input points).
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix<S: Scalar> {
    input: Grid,
    output: Grid,
    entries: Vec<S>, // row-major
}

impl<S: Scalar> OperatorMatrix<S> {
    pub fn from_entries(input: Grid, output: Grid, entries: Vec<S>) -> Result<Self> {
        if entries.len() != input.count() * output.count() {
            return Err(Error::Domain("matrix shape mismatch".into()));
        }
        Ok(OperatorMatrix {
            input,
            output,
            entries,
        })
    }

    pub fn input_grid(&self) -> &Grid {
        &self.input
    }

    pub fn output_grid(&self) -> &Grid {
        &self.output
    }

    pub fn rows(&self) -> usize {
        self.output.count()
    }

    pub fn cols(&self) -> usize {
        self.input.count()
    }

    pub fn entry(&self, row: usize, col: usize) -> &S {
        &self.entries[row * self.cols() + col]
    }

    pub fn row(&self, row: usize) -> &[S] {
        &self.entries[row * self.cols()..(row + 1) * self.cols()]
    }

    pub fn apply(&self, f: &GridFunction<S>) -> Result<GridFunction<S>> {
        if f.grid() != &self.input {
            return Err(Error::Domain("matrix applied to a mismatched grid".into()));
        }
        let mut values = Vec::with_capacity(self.rows());
        for r in 0..self.rows() {
            let mut acc = S::zero();
            for (c, v) in f.values().iter().enumerate() {
                acc = acc + self.entry(r, c).clone() * v.clone();
            }
            values.push(acc);
        }
        GridFunction::new(self.output.clone(), values)
    }

    /// `self · inner` (apply `inner` first).
    pub fn compose(&self, inner: &OperatorMatrix<S>) -> Result<OperatorMatrix<S>> {
        if inner.output != self.input {
            return Err(Error::Domain(
                "matrix composition: inner output grid does not match outer input".into(),
            ));
        }
        let rows = self.rows();
        let cols = inner.cols();
        let mid = self.cols();
        let mut entries = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                let mut acc = S::zero();
                for k in 0..mid {
                    acc = acc + self.entry(r, k).clone() * inner.entry(k, c).clone();
                }
                entries.push(acc);
            }
        }
        OperatorMatrix::from_entries(inner.input.clone(), self.output.clone(), entries)
    }

    /// Keep only the rows whose output points lie in `sub`.
    pub fn restrict_rows(&self, sub: &Grid) -> Result<OperatorMatrix<S>> {
        let start = self
            .output
            .index_of(sub.base())
            .ok_or_else(|| Error::Domain("row restriction outside the output grid".into()))?;
        if start + sub.count() > self.output.count() {
            return Err(Error::Domain(
                "row restriction overruns the output grid".into(),
            ));
        }
        let cols = self.cols();
        let entries = self.entries[start * cols..(start + sub.count()) * cols].to_vec();
        OperatorMatrix::from_entries(self.input.clone(), sub.clone(), entries)
    }

    /// Row-major CSV (exact rationals as `p/q`).
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for r in 0..self.rows() {
            let row: Vec<String> = self.row(r).iter().map(|v| v.render()).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

/// Build the matrix of any linear grid operator by applying it to every
/// indicator function on the input window.
pub fn matrix_of<S: Scalar>(
    op: impl Fn(&GridFunction<S>) -> Result<GridFunction<S>>,
    input: &Grid,
) -> Result<OperatorMatrix<S>> {
    let n = input.count();
    let mut columns: Vec<Vec<S>> = Vec::with_capacity(n);
    let mut output: Option<Grid> = None;
    for j in 0..n {
        let mut values = vec![S::zero(); n];
        values[j] = S::one();
        let e = GridFunction::new(input.clone(), values)?;
        let col = op(&e)?;
        match &output {
            None => output = Some(col.grid().clone()),
            Some(g) => {
                if g != col.grid() {
                    return Err(Error::Domain(
                        "operator output grid varies across basis vectors".into(),
                    ));
                }
            }
        }
        columns.push(col.into_parts().1);
    }
    let output = output.expect("input grids are nonempty");
    let rows = output.count();
    let mut entries = Vec::with_capacity(rows * n);
    for r in 0..rows {
        for col in columns.iter() {
            entries.push(col[r].clone());
        }
    }
    OperatorMatrix::from_entries(input.clone(), output, entries)
}

/// Matrix of the signed/unsigned integer difference.
pub fn int_diff_matrix<S: Scalar>(
    direction: Direction,
    signed: bool,
    p: u32,
    input: &Grid,
) -> Result<OperatorMatrix<S>> {
    matrix_of(|f| int_diff(direction, signed, p, f), input)
}

/// The stable operator naming scheme `{delta|nabla}-{left|right}-{sum|rl|caputo}`.
pub fn parse_operator_name(name: &str) -> Result<(Direction, Side, Flavor)> {
    let parts: Vec<&str> = name.split('-').collect();
    if parts.len() != 3 {
        return Err(Error::Parse(format!(
            "operator {name:?} is not of the form direction-side-flavor"
        )));
    }
    let direction = match parts[0] {
        "delta" => Direction::Delta,
        "nabla" => Direction::Nabla,
        other => return Err(Error::Parse(format!("unknown direction {other:?}"))),
    };
    let side = match parts[1] {
        "left" => Side::Left,
        "right" => Side::Right,
        other => return Err(Error::Parse(format!("unknown side {other:?}"))),
    };
    let flavor = match parts[2] {
        "sum" => Flavor::Sum,
        "rl" => Flavor::RiemannLiouville,
        "caputo" => Flavor::Caputo,
        other => return Err(Error::Parse(format!("unknown flavor {other:?}"))),
    };
    Ok((direction, side, flavor))
}

// --- iterated point differences (shared helper) ---------------------------------

/// `(∇^k f)(t)`: the k-fold backward difference read off the raw values.
pub(crate) fn nabla_iter_at<S: Scalar>(f: &GridFunction<S>, t: &BigRational, k: u32) -> Result<S> {
    let idx = f
        .grid()
        .index_of(t)
        .ok_or_else(|| Error::Domain(format!("point {t} outside the window")))?;
    if idx < k as usize {
        return Err(Error::Domain(format!(
            "not enough points below {t} for a difference of order {k}"
        )));
    }
    // ∇^k f(t) = Σ_j (-1)^j C(k,j) f(t-j)
    let mut acc = S::zero();
    let mut binom = S::one();
    for j in 0..=k as usize {
        let term = binom.clone() * f.values()[idx - j].clone();
        acc = if j % 2 == 0 { acc + term } else { acc - term };
        let kk = S::from_int(k as i64);
        let jj = S::from_int(j as i64 + 1);
        binom = binom * (kk - S::from_int(j as i64)) / jj;
    }
    Ok(acc)
}

/// `(_⊖Δ^k f)(t) = (-1)^k (Δ^k f)(t)`.
pub(crate) fn signed_delta_iter_at<S: Scalar>(
    f: &GridFunction<S>,
    t: &BigRational,
    k: u32,
) -> Result<S> {
    let idx = f
        .grid()
        .index_of(t)
        .ok_or_else(|| Error::Domain(format!("point {t} outside the window")))?;
    if idx + k as usize >= f.grid().count() {
        return Err(Error::Domain(format!(
            "not enough points above {t} for a difference of order {k}"
        )));
    }
    // (-1)^k Δ^k f(t) = Σ_j (-1)^j C(k,j) f(t+j)
    let mut acc = S::zero();
    let mut binom = S::one();
    for j in 0..=k as usize {
        let term = binom.clone() * f.values()[idx + j].clone();
        acc = if j % 2 == 0 { acc + term } else { acc - term };
        let kk = S::from_int(k as i64);
        let jj = S::from_int(j as i64 + 1);
        binom = binom * (kk - S::from_int(j as i64)) / jj;
    }
    Ok(acc)
}
