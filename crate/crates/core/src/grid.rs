use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

/// Relative distance (in cells) under which a query snaps to a node.
const SNAP: f64 = 1e-9;

/// Uniform grid `min, min + h, ..., max` with `n >= 2` nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UniformGrid<T> {
    pub min: T,
    pub max: T,
    pub n: usize,
}

/// Position of a query inside a grid: node `i` plus a fraction `theta in [0, 1)` towards `i + 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Locus<T> {
    pub i: usize,
    pub theta: T,
}

impl<T: Real> Locus<T> {
    pub fn is_node(&self) -> bool {
        self.theta == T::zero()
    }
}

impl<T: Real> UniformGrid<T> {
    pub fn new(min: T, max: T, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::invalid("n", format!("grid needs at least 2 nodes, got {n}")));
        }
        if !(max > min) || !min.is_finite() || !max.is_finite() {
            return Err(Error::invalid("range", format!("need finite min < max, got [{min}, {max}]")));
        }
        Ok(UniformGrid { min, max, n })
    }

    /// Symmetric grid on `[-half, half]`.
    pub fn symmetric(half: T, n: usize) -> Result<Self> {
        Self::new(-half, half, n)
    }

    /// Grid `[min, max]` with spacing `h`; `(max - min) / h` must be an integer.
    pub fn with_spacing(min: T, max: T, h: T) -> Result<Self> {
        let cells = ((max - min) / h).round();
        if !(h > T::zero()) || ((max - min) / h - cells).abs() > lit(1e-6) {
            return Err(Error::invalid("spacing", format!("{h} does not divide [{min}, {max}]")));
        }
        Self::new(min, max, cells.to_usize().unwrap_or(0) + 1)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> T {
        (self.max - self.min) / lit::<T>((self.n - 1) as f64)
    }

    pub fn node(&self, i: usize) -> T {
        if i + 1 == self.n {
            return self.max;
        }
        self.min + (self.max - self.min) * lit::<T>(i as f64) / lit::<T>((self.n - 1) as f64)
    }

    pub fn nodes(&self) -> Vec<T> {
        (0..self.n).map(|i| self.node(i)).collect()
    }

    /// Locates `x`; `None` outside `[min, max]` (beyond snapping distance).
    pub fn locate(&self, x: T) -> Option<Locus<T>> {
        let u = (x - self.min) / self.spacing();
        let snap: T = lit(SNAP);
        let last = lit::<T>((self.n - 1) as f64);
        if !(u >= -snap) || !(u <= last + snap) {
            return None;
        }
        let r = u.round();
        if (u - r).abs() <= snap {
            return Some(Locus { i: r.to_usize().unwrap_or(0).min(self.n - 1), theta: T::zero() });
        }
        let i = u.floor();
        Some(Locus { i: i.to_usize().unwrap_or(0), theta: u - i })
    }

    /// Index of the node equal to `x`, if any.
    pub fn node_index(&self, x: T) -> Option<usize> {
        self.locate(x).filter(Locus::is_node).map(|l| l.i)
    }

    pub fn contains(&self, x: T) -> bool {
        self.locate(x).is_some()
    }
}

/// Uniform velocity grid that has `0` as a node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VelocityGrid<T>(UniformGrid<T>);

impl<T: Real> VelocityGrid<T> {
    pub fn new(min: T, max: T, n: usize) -> Result<Self> {
        Self::try_from(UniformGrid::new(min, max, n)?)
    }

    /// Symmetric grid on `[-half, half]` with an odd node count.
    pub fn symmetric(half: T, n: usize) -> Result<Self> {
        Self::new(-half, half, n)
    }

    pub fn zero_index(&self) -> usize {
        self.0.node_index(T::zero()).expect("velocity grid contains 0")
    }

    pub fn grid(&self) -> &UniformGrid<T> {
        &self.0
    }
}

impl<T: Real> TryFrom<UniformGrid<T>> for VelocityGrid<T> {
    type Error = Error;

    fn try_from(g: UniformGrid<T>) -> Result<Self> {
        if g.node_index(T::zero()).is_none() {
            return Err(Error::invalid("velocity grid", format!("[{}, {}] with {} nodes misses v = 0", g.min, g.max, g.n)));
        }
        Ok(VelocityGrid(g))
    }
}

impl<T> From<VelocityGrid<T>> for UniformGrid<T> {
    fn from(g: VelocityGrid<T>) -> Self {
        g.0
    }
}

impl<T> std::ops::Deref for VelocityGrid<T> {
    type Target = UniformGrid<T>;

    fn deref(&self) -> &UniformGrid<T> {
        &self.0
    }
}
