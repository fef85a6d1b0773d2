use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::levy::KernelFn;

/// A finite, duplicate-free set of lattice points in `ℤ^d`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Window {
    dim: usize,
    points: BTreeSet<Vec<i64>>,
}

impl Window {
    pub fn from_points(dim: usize, points: impl IntoIterator<Item = Vec<i64>>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::config("window dimension must be positive"));
        }
        let points: BTreeSet<Vec<i64>> = points.into_iter().collect();
        if points.iter().any(|p| p.len() != dim) {
            return Err(Error::Shape("window point of the wrong dimension"));
        }
        Ok(Window { dim, points })
    }

    /// The box `∏ [lo_i, lo_i + shape_i)`.
    pub fn boxed(lo: &[i64], shape: &[usize]) -> Result<Self> {
        if lo.len() != shape.len() {
            return Err(Error::Shape("box corner and shape differ in dimension"));
        }
        let mut pts = Vec::new();
        for_each_index(shape, |idx| {
            pts.push(idx.iter().zip(lo).map(|(i, l)| *i as i64 + l).collect())
        });
        Self::from_points(lo.len(), pts)
    }

    /// The cube `[0, side)^d`.
    pub fn cube(dim: usize, side: usize) -> Result<Self> {
        Self::boxed(&alloc::vec![0; dim], &alloc::vec![side; dim])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn contains(&self, p: &[i64]) -> bool {
        self.points.contains(p)
    }

    pub fn points(&self) -> impl Iterator<Item = &Vec<i64>> {
        self.points.iter()
    }
}

/// Calls `f` with every multi-index below `shape`, last axis fastest.
pub(crate) fn for_each_index(shape: &[usize], mut f: impl FnMut(&[usize])) {
    if shape.contains(&0) {
        return;
    }
    let mut idx = alloc::vec![0usize; shape.len()];
    loop {
        f(&idx);
        let mut ax = shape.len();
        loop {
            if ax == 0 {
                return;
            }
            ax -= 1;
            idx[ax] += 1;
            if idx[ax] < shape[ax] {
                break;
            }
            idx[ax] = 0;
        }
    }
}

/// `∂A = { j ∉ A : dist(j, A) = 1 }` in the sup-norm.
pub fn boundary(w: &Window) -> Window {
    let d = w.dim;
    let mut out = BTreeSet::new();
    let nbhd = alloc::vec![3usize; d];
    for p in w.points() {
        for_each_index(&nbhd, |off| {
            let q: Vec<i64> = p.iter().zip(off).map(|(x, o)| x + *o as i64 - 1).collect();
            if !w.contains(&q) {
                out.insert(q);
            }
        });
    }
    Window {
        dim: d,
        points: out,
    }
}

/// Cubes `[0, L_k)^d` of increasing side.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WindowSequence {
    pub dim: usize,
    pub sides: Vec<usize>,
}

impl WindowSequence {
    pub fn new(dim: usize, sides: Vec<usize>) -> Result<Self> {
        if dim == 0 || sides.is_empty() || sides.windows(2).any(|w| w[1] <= w[0]) || sides[0] == 0 {
            return Err(Error::config(
                "window sides must be positive and strictly increasing",
            ));
        }
        Ok(WindowSequence { dim, sides })
    }

    /// Sides `2^k`, `k = 0, …, k_max`.
    pub fn dyadic(dim: usize, k_max: u32) -> Result<Self> {
        Self::new(dim, (0..=k_max).map(|k| 1usize << k).collect())
    }

    pub fn window(&self, k: usize) -> Result<Window> {
        Window::cube(self.dim, self.sides[k])
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthRow {
    pub size: usize,
    pub boundary: usize,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GrowthReport {
    pub rows: Vec<GrowthRow>,
    /// `|∂A_k|/|A_k|` strictly decreasing along the prefix.
    pub decreasing: bool,
}

/// `|A_k|`, `|∂A_k|` and their ratio for the first `k_max` windows. Cube
/// boundaries are counted in closed form, `(L + 2)^d − L^d`.
pub fn regular_growth_report(seq: &WindowSequence, k_max: usize) -> GrowthReport {
    let rows: Vec<GrowthRow> = seq
        .sides
        .iter()
        .take(k_max)
        .map(|&l| {
            let size = l.pow(seq.dim as u32);
            let boundary = (l + 2).pow(seq.dim as u32) - size;
            GrowthRow {
                size,
                boundary,
                ratio: boundary as f64 / size as f64,
            }
        })
        .collect();
    let decreasing = rows.windows(2).all(|w| w[1].ratio < w[0].ratio);
    GrowthReport { rows, decreasing }
}

/// Axis-aligned box in `ℝ^d`, either closed or of the form `∏ (lo, hi]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RealBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub closed: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VhReport {
    /// Blocks `Π_j(a)` contained in the box.
    pub j_minus: usize,
    /// Blocks meeting the box.
    pub j_plus: usize,
    /// `ν(U⁻)/ν(U⁺)`.
    pub ratio: f64,
}

/// Counts the blocks `Π_j(a) = ∏ (j_i a_i, (j_i + 1) a_i]` inside and meeting
/// `u`.
pub fn vh_blocks(u: &RealBox, a: &[f64]) -> Result<VhReport> {
    if u.lo.len() != a.len() || u.hi.len() != a.len() {
        return Err(Error::Shape("box and block sizes differ in dimension"));
    }
    if a.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
        return Err(Error::config("block sizes must be positive"));
    }
    let (mut inside, mut meeting) = (1usize, 1usize);
    for ((&lo, &hi), &ai) in u.lo.iter().zip(&u.hi).zip(a) {
        if hi < lo || (hi == lo && !u.closed) {
            return Ok(VhReport {
                j_minus: 0,
                j_plus: 0,
                ratio: 0.0,
            });
        }
        // contained: k a ≥ lo and (k + 1) a ≤ hi
        let k_in_lo = (lo / ai).ceil() as i64;
        let k_in_hi = (hi / ai).floor() as i64 - 1;
        inside *= (k_in_hi - k_in_lo + 1).max(0) as usize;
        // meeting: (k + 1) a ≥ lo (closed) or > lo (half-open), and k a < hi
        let k_lo = if u.closed {
            (lo / ai).ceil() as i64 - 1
        } else {
            (lo / ai).floor() as i64
        };
        let k_hi = (hi / ai).ceil() as i64 - 1;
        meeting *= (k_hi - k_lo + 1).max(0) as usize;
    }
    let ratio = if meeting > 0 {
        inside as f64 / meeting as f64
    } else {
        0.0
    };
    Ok(VhReport {
        j_minus: inside,
        j_plus: meeting,
        ratio,
    })
}

/// Smallest integer strictly greater than `diam(supp f)/Δ`.
pub fn m_bound(f: &KernelFn, delta: f64) -> Result<usize> {
    if !(delta.is_finite() && delta > 0.0) {
        return Err(Error::config("grid mesh Δ must be positive"));
    }
    Ok(m_from_ratio(f.diam() / delta))
}

pub(crate) fn m_from_ratio(r: f64) -> usize {
    let near = r.round();
    if (r - near).abs() <= 1e-9 * r.max(1.0) {
        near as usize + 1
    } else {
        r.floor() as usize + 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn boundary_examples() {
        let s = Window::from_points(1, [alloc::vec![0]]).unwrap();
        let b = boundary(&s);
        assert_eq!(
            b.points().cloned().collect::<Vec<_>>(),
            alloc::vec![alloc::vec![-1], alloc::vec![1]]
        );
        assert_eq!(boundary(&Window::cube(2, 3).unwrap()).len(), 16);
    }

    #[test]
    fn dyadic_growth_is_regular() {
        let r = regular_growth_report(&WindowSequence::dyadic(1, 10).unwrap(), 11);
        assert!(r.decreasing);
        for (k, row) in r.rows.iter().enumerate() {
            assert_eq!(row.ratio, 2.0 / (1u64 << k) as f64);
        }
    }

    #[test]
    fn van_hove_blocks() {
        let u = RealBox {
            lo: alloc::vec![0.0],
            hi: alloc::vec![10.0],
            closed: true,
        };
        let r = vh_blocks(&u, &[1.0]).unwrap();
        assert_eq!((r.j_minus, r.j_plus), (10, 11));
        let p = RealBox {
            lo: alloc::vec![0.0, 0.0],
            hi: alloc::vec![2.0, 0.5],
            closed: false,
        };
        assert_eq!(vh_blocks(&p, &[2.0, 0.5]).unwrap().ratio, 1.0);
        let small = RealBox {
            lo: alloc::vec![0.2],
            hi: alloc::vec![0.7],
            closed: true,
        };
        let r = vh_blocks(&small, &[1.0]).unwrap();
        assert_eq!((r.j_minus, r.j_plus), (0, 1));
    }

    #[test]
    fn m_bound_examples() {
        let f = |d: f64| KernelFn::indicator_cube(alloc::vec![d]).unwrap();
        assert_eq!(m_bound(&f(1.0), 1.0).unwrap(), 2);
        assert_eq!(m_bound(&f(1.0), 0.25).unwrap(), 5);
        assert_eq!(m_bound(&f(0.9), 1.0).unwrap(), 1);
        assert_eq!(m_bound(&f(0.3), 0.1).unwrap(), 4);
        assert!(m_bound(&f(1.0), 0.0).is_err());
    }
}
