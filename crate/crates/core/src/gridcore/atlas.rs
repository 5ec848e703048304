use super::fd::FieldScalar;
use super::grid::{ChartGrid, OVERLAP_INNER, OVERLAP_OUTER};
use crate::{Error, Result, C64};

/// Nodes per axis of the tensor-product Lagrange stencil used to carry values
/// across the chart transition.
pub const INTERP_NODES: usize = 6;

/// How a stored quantity transforms under w ↦ w′ = 1/w.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GhostTransform {
    /// Functions: value(w) = value′(1/w).
    Scalar,
    /// Coefficients of a (1,1)-form on T(CP¹): g(w) = g′(1/w)/|w|⁴.
    Metric,
}

#[derive(Clone, Debug)]
struct Transfer {
    target: usize,
    inv_w4: f64,
    sources: Vec<(usize, f64)>,
}

/// The standard two-chart atlas of CP¹ on identical square grids. Points with
/// |w| ≤ 1.25 are active; the rest are ghosts refreshed from the partner chart.
#[derive(Clone, Debug)]
pub struct Cp1Atlas {
    pub charts: [ChartGrid; 2],
    pub nodes: usize,
    ghosts: Vec<Transfer>,
    band: Vec<Transfer>,
}

fn lagrange_weights(s: f64, first: usize, nodes: usize) -> Vec<f64> {
    (0..nodes)
        .map(|k| {
            let xk = (first + k) as f64;
            (0..nodes)
                .filter(|&m| m != k)
                .map(|m| {
                    let xm = (first + m) as f64;
                    (s - xm) / (xk - xm)
                })
                .product()
        })
        .collect()
}

impl Cp1Atlas {
    pub fn new(n: usize, half_width: f64, nodes: usize) -> Result<Self> {
        if half_width <= OVERLAP_OUTER {
            return Err(Error::Shape(format!(
                "chart half width {half_width} must exceed {OVERLAP_OUTER}"
            )));
        }
        let charts = [
            ChartGrid::cp1_chart(0, n, half_width)?,
            ChartGrid::cp1_chart(1, n, half_width)?,
        ];
        let mut atlas = Cp1Atlas {
            charts,
            nodes,
            ghosts: vec![],
            band: vec![],
        };
        let grid = &atlas.charts[0];
        let mut ghosts = vec![];
        let mut band = vec![];
        for idx in 0..grid.len() {
            let w = grid.complex_coord(idx, 0);
            let r = w.norm();
            let active = grid.is_active(idx);
            if active && r < OVERLAP_INNER - 1e-12 {
                continue;
            }
            if r == 0.0 {
                continue;
            }
            let sources = if active {
                atlas.interpolation_stencil(w.inv())?
            } else {
                atlas.active_interpolation_stencil(w.inv())?
            };
            let t = Transfer {
                target: idx,
                inv_w4: 1.0 / (r * r * r * r),
                sources,
            };
            if active {
                band.push(t);
            } else {
                ghosts.push(t);
            }
        }
        atlas.ghosts = ghosts;
        atlas.band = band;
        Ok(atlas)
    }

    pub fn grid(&self) -> &ChartGrid {
        &self.charts[0]
    }

    pub fn points_per_chart(&self) -> usize {
        self.charts[0].len()
    }

    pub fn ghost_count(&self) -> usize {
        self.ghosts.len()
    }

    /// Tensor-product Lagrange weights for evaluating a chart field at `w`,
    /// on the window centred on `w`.
    pub fn interpolation_stencil(&self, w: C64) -> Result<Vec<(usize, f64)>> {
        self.stencil(w, false)
    }

    /// As `interpolation_stencil`, but the window is shifted toward the chart
    /// centre until every source node is active. Ghost refreshes use this so
    /// they never read another ghost.
    pub fn active_interpolation_stencil(&self, w: C64) -> Result<Vec<(usize, f64)>> {
        self.stencil(w, true)
    }

    fn stencil(&self, w: C64, active_only: bool) -> Result<Vec<(usize, f64)>> {
        let grid = &self.charts[0];
        let ax = &grid.axes[0];
        let n = ax.n;
        let m = self.nodes;
        let edge = || {
            Error::InvalidPoint(format!(
                "w = {w} too close to the chart edge for interpolation"
            ))
        };
        let sx = (w.re - ax.origin) / ax.spacing;
        let sy = (w.im - ax.origin) / ax.spacing;
        let centred = |s: f64| s.floor() as isize - (m as isize / 2 - 1);
        let (mut fx, mut fy) = (centred(sx), centred(sy));
        // Valid window starts keep s inside [first, first + m − 1].
        let range = |s: f64| {
            (
                (s.ceil() as isize - (m as isize - 1)).max(0),
                (s.floor() as isize).min(n as isize - m as isize),
            )
        };
        let (rx, ry) = (range(sx), range(sy));
        let value = |i: isize| ax.value(i as usize);
        let window_active = |fx: isize, fy: isize| {
            (0..m as isize).all(|i| {
                (0..m as isize).all(|j| value(fx + i).hypot(value(fy + j)) <= OVERLAP_OUTER + 1e-12)
            })
        };
        let mut tries = 0;
        loop {
            fx = fx.clamp(rx.0, rx.1);
            fy = fy.clamp(ry.0, ry.1);
            if rx.0 > rx.1 || ry.0 > ry.1 {
                return Err(edge());
            }
            if !active_only || window_active(fx, fy) {
                break;
            }
            tries += 1;
            if tries > 2 * m {
                return Err(edge());
            }
            // Move the axis whose window reaches farther out, toward the centre.
            let reach = |f: isize| value(f).abs().max(value(f + m as isize - 1).abs());
            let step = |f: isize| {
                if value(f).abs() > value(f + m as isize - 1).abs() {
                    1
                } else {
                    -1
                }
            };
            let (cx, cy) = (fx + step(fx), fy + step(fy));
            let x_ok = cx >= rx.0 && cx <= rx.1;
            let y_ok = cy >= ry.0 && cy <= ry.1;
            if x_ok && (reach(fx) >= reach(fy) || !y_ok) {
                fx = cx;
            } else if y_ok {
                fy = cy;
            } else {
                return Err(edge());
            }
        }
        let wx = lagrange_weights(sx, fx as usize, m);
        let wy = lagrange_weights(sy, fy as usize, m);
        let mut out = Vec::with_capacity(m * m);
        for (i, a) in wx.iter().enumerate() {
            for (j, b) in wy.iter().enumerate() {
                out.push(((fx as usize + i) * n + fy as usize + j, a * b));
            }
        }
        Ok(out)
    }

    /// Refreshes every ghost node from the partner chart. `data` is laid out
    /// `[chart][block][fiber node][component]` with `blocks` copies of the
    /// fiber grid per chart (one per base node on a product grid).
    pub fn fill_ghosts<T: FieldScalar>(
        &self,
        data: &mut [T],
        ncomp: usize,
        blocks: usize,
        transform: GhostTransform,
    ) {
        let np = self.points_per_chart();
        let chart_len = blocks * np * ncomp;
        debug_assert_eq!(data.len(), 2 * chart_len);
        for c in 0..2 {
            let (dst_off, src_off) = (c * chart_len, (1 - c) * chart_len);
            for b in 0..blocks {
                let base = b * np * ncomp;
                for g in &self.ghosts {
                    let factor = match transform {
                        GhostTransform::Scalar => 1.0,
                        GhostTransform::Metric => g.inv_w4,
                    };
                    for k in 0..ncomp {
                        let mut acc = T::default();
                        for &(s, wgt) in &g.sources {
                            acc = acc + data[src_off + base + s * ncomp + k] * wgt;
                        }
                        data[dst_off + base + g.target * ncomp + k] = acc * factor;
                    }
                }
            }
        }
    }

    /// Largest relative disagreement between each chart's own values in the
    /// overlap annulus and the partner chart interpolated there. Returns the
    /// defect with (chart, block, fiber node) of the worst point.
    pub fn overlap_defect(
        &self,
        data: &[f64],
        blocks: usize,
        transform: GhostTransform,
    ) -> (f64, (usize, usize, usize)) {
        let np = self.points_per_chart();
        let chart_len = blocks * np;
        let mut worst = (0.0, (0, 0, 0));
        for c in 0..2 {
            for b in 0..blocks {
                let own = &data[c * chart_len + b * np..c * chart_len + (b + 1) * np];
                let other = &data[(1 - c) * chart_len + b * np..(1 - c) * chart_len + (b + 1) * np];
                for t in &self.band {
                    let factor = match transform {
                        GhostTransform::Scalar => 1.0,
                        GhostTransform::Metric => t.inv_w4,
                    };
                    let mapped: f64 =
                        t.sources.iter().map(|&(s, w)| other[s] * w).sum::<f64>() * factor;
                    let v = own[t.target];
                    let d = (v - mapped).abs() / v.abs().max(1.0);
                    if d > worst.0 {
                        worst = (d, (c, b, t.target));
                    }
                }
            }
        }
        worst
    }
}
