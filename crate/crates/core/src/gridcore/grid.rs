use serde::{Deserialize, Serialize};

use crate::{Error, Result, C64};

/// Inner radius of the annulus where the two CP¹ charts are compared.
pub const OVERLAP_INNER: f64 = 0.8;
/// Outer radius of the overlap annulus; points with |w| beyond it are ghosts.
pub const OVERLAP_OUTER: f64 = 1.25;
/// Default half width of the square carrying a CP¹ chart. Large enough that
/// every active point keeps its five-point stencil on the grid.
pub const CP1_HALF_WIDTH: f64 = 1.55;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Topology {
    Periodic,
    Bounded,
}

/// One real axis: `n` nodes at `origin + i * spacing`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub n: usize,
    pub origin: f64,
    pub spacing: f64,
    pub topology: Topology,
}

impl Axis {
    pub fn periodic(n: usize, period: f64) -> Self {
        Axis {
            n,
            origin: 0.0,
            spacing: period / n as f64,
            topology: Topology::Periodic,
        }
    }

    /// `n` nodes covering `[-half_width, half_width]` including both ends.
    pub fn bounded(n: usize, half_width: f64) -> Self {
        Axis {
            n,
            origin: -half_width,
            spacing: 2.0 * half_width / (n - 1) as f64,
            topology: Topology::Bounded,
        }
    }

    pub fn value(&self, i: usize) -> f64 {
        self.origin + i as f64 * self.spacing
    }

    pub fn period(&self) -> Option<f64> {
        match self.topology {
            Topology::Periodic => Some(self.n as f64 * self.spacing),
            Topology::Bounded => None,
        }
    }
}

/// A rectangular grid over one chart of a complex manifold. Complex
/// coordinate `k` uses real axes `2k` (real part) and `2k + 1` (imaginary part).
/// Nodes are stored row-major with the last axis fastest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChartGrid {
    pub chart_id: String,
    pub complex_dim: usize,
    pub axes: Vec<Axis>,
}

impl ChartGrid {
    pub fn new(chart_id: impl Into<String>, axes: Vec<Axis>) -> Result<Self> {
        if axes.is_empty() || !axes.len().is_multiple_of(2) {
            return Err(Error::Shape(format!(
                "a complex chart needs an even number of real axes, got {}",
                axes.len()
            )));
        }
        for (k, pair) in axes.chunks(2).enumerate() {
            if pair[0].topology != pair[1].topology {
                return Err(Error::Shape(format!(
                    "complex coordinate {k} mixes periodic and bounded axes"
                )));
            }
        }
        for (axis, a) in axes.iter().enumerate() {
            if a.n < 5 || !(a.spacing > 0.0) {
                return Err(Error::GridTooSmall {
                    axis,
                    n: a.n,
                    need: 5,
                });
            }
        }
        Ok(ChartGrid {
            chart_id: chart_id.into(),
            complex_dim: axes.len() / 2,
            axes,
        })
    }

    /// Flat torus ℂ^m / (period·ℤ)^{2m} with `n` nodes per real axis.
    pub fn torus(complex_dim: usize, n: usize, period: f64) -> Result<Self> {
        Self::new(
            "torus",
            (0..2 * complex_dim)
                .map(|_| Axis::periodic(n, period))
                .collect(),
        )
    }

    /// One chart of the standard two-chart atlas of CP¹.
    pub fn cp1_chart(chart: usize, n: usize, half_width: f64) -> Result<Self> {
        Self::new(
            format!("cp1:{chart}"),
            vec![Axis::bounded(n, half_width), Axis::bounded(n, half_width)],
        )
    }

    /// Product chart `base × fiber`, base axes first.
    pub fn product(base: &ChartGrid, fiber: &ChartGrid) -> Result<Self> {
        let mut axes = base.axes.clone();
        axes.extend(fiber.axes.iter().cloned());
        Self::new(format!("{}x{}", base.chart_id, fiber.chart_id), axes)
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.n).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn shape(&self) -> Vec<usize> {
        self.axes.iter().map(|a| a.n).collect()
    }

    pub fn strides(&self) -> Vec<usize> {
        let mut s = vec![1; self.axes.len()];
        for k in (0..self.axes.len() - 1).rev() {
            s[k] = s[k + 1] * self.axes[k + 1].n;
        }
        s
    }

    pub fn coords(&self, mut index: usize) -> Vec<usize> {
        let mut c = vec![0; self.axes.len()];
        for k in (0..self.axes.len()).rev() {
            c[k] = index % self.axes[k].n;
            index /= self.axes[k].n;
        }
        c
    }

    pub fn index(&self, coords: &[usize]) -> usize {
        coords
            .iter()
            .zip(&self.axes)
            .fold(0, |acc, (&c, a)| acc * a.n + c)
    }

    /// Real coordinates of a node.
    pub fn position(&self, index: usize) -> Vec<f64> {
        self.coords(index)
            .iter()
            .zip(&self.axes)
            .map(|(&c, a)| a.value(c))
            .collect()
    }

    /// Complex coordinate `k` of a node.
    pub fn complex_coord(&self, index: usize, k: usize) -> C64 {
        let p = self.position(index);
        C64::new(p[2 * k], p[2 * k + 1])
    }

    pub fn min_spacing(&self) -> f64 {
        self.axes
            .iter()
            .map(|a| a.spacing)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn check_axis(&self, axis: usize) -> Result<()> {
        if axis >= self.axes.len() {
            return Err(Error::AxisOutOfRange {
                axis,
                axes: self.axes.len(),
            });
        }
        let a = &self.axes[axis];
        let need = if a.topology == Topology::Periodic {
            8
        } else {
            5
        };
        if a.n < need {
            return Err(Error::GridTooSmall { axis, n: a.n, need });
        }
        Ok(())
    }

    /// Whether a node belongs to the region where this chart is authoritative:
    /// periodic coordinates always, bounded complex coordinates when |w| ≤ 1.25.
    pub fn is_active_coords(&self, coords: &[usize]) -> bool {
        for k in 0..self.complex_dim {
            let (ax, ay) = (&self.axes[2 * k], &self.axes[2 * k + 1]);
            if ax.topology == Topology::Bounded {
                let (x, y) = (ax.value(coords[2 * k]), ay.value(coords[2 * k + 1]));
                if x.hypot(y) > OVERLAP_OUTER + 1e-12 {
                    return false;
                }
            }
        }
        true
    }

    pub fn is_active(&self, index: usize) -> bool {
        let mut rest = index;
        let mut c = [0usize; 8];
        let k = self.axes.len();
        if k > c.len() {
            return self.is_active_coords(&self.coords(index));
        }
        for ax in (0..k).rev() {
            c[ax] = rest % self.axes[ax].n;
            rest /= self.axes[ax].n;
        }
        self.is_active_coords(&c[..k])
    }

    /// Linear offsets of the five stencil nodes `-2..=2` along `axis`, or
    /// `None` when the stencil leaves a bounded axis.
    pub fn stencil_offsets(
        &self,
        coords: &[usize],
        axis: usize,
        strides: &[usize],
    ) -> Option<[isize; 5]> {
        let a = &self.axes[axis];
        let c = coords[axis] as isize;
        let n = a.n as isize;
        let s = strides[axis] as isize;
        let mut off = [0isize; 5];
        for (k, o) in off.iter_mut().enumerate() {
            let mut j = c + k as isize - 2;
            match a.topology {
                Topology::Periodic => {
                    if j < 0 {
                        j += n;
                    } else if j >= n {
                        j -= n;
                    }
                    if !(0..n).contains(&j) {
                        j = j.rem_euclid(n);
                    }
                }
                Topology::Bounded => {
                    if j < 0 || j >= n {
                        return None;
                    }
                }
            }
            *o = (j - c) * s;
        }
        Some(off)
    }
}
