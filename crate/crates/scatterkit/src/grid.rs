//! Square pixel lattice on `[-2, 2]²`.
//!
//! Pixels are centered at `p·h` for lattice points `p = (p₁, p₂)` with
//! `-N/2 < p_k ≤ N/2`, ordered lexicographically by `(p₁, p₂)`. The mapping
//! between the flat index `ℓ ∈ [0, M)` and the lattice point is a fixed
//! bijection used consistently by every operator and file format.

/// Side length of the square region of interest.
pub const REGION_HALF_WIDTH: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    n: usize,
    h: f64,
    p_min: i32,
}

impl Grid {
    /// Grid with `n` pixels per side; pixel width `h = 4/n`.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "grid must have at least one pixel");
        Grid {
            n,
            h: 2.0 * REGION_HALF_WIDTH / n as f64,
            p_min: 1 - ((n as i32 + 1) / 2),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Total pixel count `M = N²`.
    pub fn m(&self) -> usize {
        self.n * self.n
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    /// Lattice point of flat index `ℓ`.
    pub fn lattice(&self, l: usize) -> (i32, i32) {
        debug_assert!(l < self.m());
        let p1 = (l / self.n) as i32 + self.p_min;
        let p2 = (l % self.n) as i32 + self.p_min;
        (p1, p2)
    }

    /// Flat index of a lattice point; inverse of [`Grid::lattice`].
    pub fn index(&self, p: (i32, i32)) -> usize {
        let a1 = p.0 - self.p_min;
        let a2 = p.1 - self.p_min;
        debug_assert!(a1 >= 0 && (a1 as usize) < self.n && a2 >= 0 && (a2 as usize) < self.n);
        a1 as usize * self.n + a2 as usize
    }

    /// Physical pixel center `p·h`.
    pub fn center(&self, l: usize) -> (f64, f64) {
        let (p1, p2) = self.lattice(l);
        (p1 as f64 * self.h, p2 as f64 * self.h)
    }

    /// Whether a lattice point lies on this grid.
    pub fn contains(&self, p: (i32, i32)) -> bool {
        let max = self.p_min + self.n as i32 - 1;
        p.0 >= self.p_min && p.0 <= max && p.1 >= self.p_min && p.1 <= max
    }
}
