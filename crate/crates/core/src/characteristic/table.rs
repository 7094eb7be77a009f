//! Interpolation tables for the channels `(xi0, W, K+, K-)` as functions of
//! the Lagrangian coordinate `y`.
//!
//! `xi0` solves `dxi0/dy = tau0(xi0)`, `W' = v0(xi0)` and
//! `K_eps' = c_eps0(xi0)`, all normalised to vanish at `y = 0`.

/// Quasi-periodicity: channel `c` gains `inc[c]` per `y`-period.
#[derive(Debug, Clone)]
pub(crate) struct Period {
    pub y: f64,
    pub inc: Vec<f64>,
}

impl Period {
    /// `(m, r)` with `y = m P + r`, `r` in `[0, P)`.
    #[inline]
    fn reduce(&self, y: f64) -> (f64, f64) {
        let m = (y / self.y).floor();
        let r = (y - m * self.y).clamp(0.0, self.y);
        (m, r)
    }
}

/// Uniform nodes `y_j = j h` with values and exact slopes; cubic Hermite in
/// between, linear extension past the ends.
#[derive(Debug, Clone)]
pub(crate) struct NodeTable {
    pub h: f64,
    pub first: i64,
    pub width: usize,
    pub values: Vec<f64>,
    pub slopes: Vec<f64>,
    pub period: Option<Period>,
}

impl NodeTable {
    pub fn nodes(&self) -> usize {
        self.values.len() / self.width
    }

    /// Fritsch-Carlson limiting of the `xi` slopes so the Hermite
    /// interpolant stays strictly increasing.
    pub fn limit_monotone(&mut self) {
        let w = self.width;
        for j in 0..self.nodes() - 1 {
            let d = (self.values[(j + 1) * w] - self.values[j * w]) / self.h;
            let a = self.slopes[j * w] / d;
            let b = self.slopes[(j + 1) * w] / d;
            let r = a * a + b * b;
            if r > 9.0 {
                let k = 3.0 / r.sqrt();
                self.slopes[j * w] = k * a * d;
                self.slopes[(j + 1) * w] = k * b * d;
            }
        }
    }

    /// Channels `0..count` at `y`.
    pub fn eval(&self, y: f64, count: usize, out: &mut [f64]) {
        let (m, y) = match &self.period {
            Some(p) => p.reduce(y),
            None => (0.0, y),
        };
        let w = self.width;
        let n = self.nodes() as i64;
        let y_first = self.first as f64 * self.h;
        let y_last = (self.first + n - 1) as f64 * self.h;
        if self.period.is_none() && (y <= y_first || y >= y_last) {
            let (k, y0) = if y <= y_first { (0, y_first) } else { (n as usize - 1, y_last) };
            for c in 0..count {
                out[c] = self.values[k * w + c] + (y - y0) * self.slopes[k * w + c];
            }
            return;
        }
        let u = y / self.h - self.first as f64;
        let j = (u.floor() as i64).clamp(0, n - 2) as usize;
        let x = u - j as f64;
        let x2 = x * x;
        let x3 = x2 * x;
        let h00 = 2.0 * x3 - 3.0 * x2 + 1.0;
        let h10 = (x3 - 2.0 * x2 + x) * self.h;
        let h01 = -2.0 * x3 + 3.0 * x2;
        let h11 = (x3 - x2) * self.h;
        let (a, b) = (j * w, (j + 1) * w);
        for c in 0..count {
            out[c] = h00 * self.values[a + c] + h10 * self.slopes[a + c] + h01 * self.values[b + c] + h11 * self.slopes[b + c];
        }
        if let Some(p) = &self.period {
            for c in 0..count {
                out[c] += m * p.inc[c];
            }
        }
    }

    /// Derivative of the `xi` interpolant at `y`.
    pub fn xi_slope(&self, y: f64) -> f64 {
        let y = match &self.period {
            Some(p) => p.reduce(y).1,
            None => y,
        };
        let w = self.width;
        let n = self.nodes() as i64;
        let u = y / self.h - self.first as f64;
        if self.period.is_none() && (u <= 0.0 || u >= (n - 1) as f64) {
            return if u <= 0.0 { self.slopes[0] } else { self.slopes[(n as usize - 1) * w] };
        }
        let j = (u.floor() as i64).clamp(0, n - 2) as usize;
        let x = u - j as f64;
        let (a, b) = (j * w, (j + 1) * w);
        let d00 = (6.0 * x * x - 6.0 * x) / self.h;
        let d10 = 3.0 * x * x - 4.0 * x + 1.0;
        let d01 = (-6.0 * x * x + 6.0 * x) / self.h;
        let d11 = 3.0 * x * x - 2.0 * x;
        d00 * self.values[a] + d10 * self.slopes[a] + d01 * self.values[b] + d11 * self.slopes[b]
    }
}

/// Piecewise-linear channels with breakpoints `ybreaks`, produced by
/// piecewise-constant initial data. Stored in a raw coordinate `r = y + shift`
/// whose origin sits at the first breakpoint.
#[derive(Debug, Clone)]
pub(crate) struct LinearTable {
    pub width: usize,
    pub ybreaks: Vec<f64>,
    pub values: Vec<f64>,
    pub slopes: Vec<f64>,
    pub period: Option<Period>,
    pub shift: f64,
    pub base: Vec<f64>,
}

impl LinearTable {
    pub fn pieces(&self) -> usize {
        self.ybreaks.len() - 1
    }

    /// `(m, piece, r)` for raw coordinate `r`.
    #[inline]
    fn locate_raw(&self, r: f64) -> (f64, usize, f64) {
        let (m, r) = match &self.period {
            Some(p) => {
                let (m, rr) = p.reduce(r - self.ybreaks[0]);
                (m, rr + self.ybreaks[0])
            }
            None => (0.0, r),
        };
        let j = self.ybreaks.partition_point(|b| *b <= r).saturating_sub(1).min(self.pieces() - 1);
        (m, j, r)
    }

    fn eval_raw(&self, r: f64, count: usize, out: &mut [f64]) {
        let w = self.width;
        let last = self.pieces();
        if self.period.is_none() && r >= self.ybreaks[last] {
            for c in 0..count {
                out[c] = self.values[last * w + c] + (r - self.ybreaks[last]) * self.slopes[(last - 1) * w + c];
            }
            return;
        }
        let (m, j, rr) = self.locate_raw(r);
        // below the first break only for constant extension: piece 0 extends
        let dy = rr - self.ybreaks[j];
        for c in 0..count {
            out[c] = self.values[j * w + c] + dy * self.slopes[j * w + c];
        }
        if let Some(p) = &self.period {
            for c in 0..count {
                out[c] += m * p.inc[c];
            }
        }
    }

    pub fn eval(&self, y: f64, count: usize, out: &mut [f64]) {
        self.eval_raw(y + self.shift, count, out);
        for c in 0..count {
            out[c] -= self.base[c];
        }
    }

    /// Initial-data piece owning Lagrangian coordinate `y`.
    #[inline]
    pub fn piece(&self, y: f64) -> usize {
        self.locate_raw(y + self.shift).1
    }

    /// Breakpoints in `y` inside `(lo, hi)`, sorted, all periodic images.
    pub fn breaks_between(&self, lo: f64, hi: f64) -> Vec<f64> {
        let mut out = Vec::new();
        let (rlo, rhi) = (lo + self.shift, hi + self.shift);
        match &self.period {
            Some(p) => {
                let y0 = self.ybreaks[0];
                let m0 = ((rlo - y0) / p.y).floor() as i64 - 1;
                let m1 = ((rhi - y0) / p.y).ceil() as i64 + 1;
                for m in m0..=m1 {
                    let off = m as f64 * p.y;
                    for b in &self.ybreaks[..self.pieces()] {
                        let r = b + off;
                        if r > rlo && r < rhi {
                            out.push(r - self.shift);
                        }
                    }
                }
            }
            None => {
                for b in &self.ybreaks {
                    if *b > rlo && *b < rhi {
                        out.push(b - self.shift);
                    }
                }
            }
        }
        out.sort_by(f64::total_cmp);
        out
    }
}

#[derive(Debug, Clone)]
pub(crate) enum Table {
    Nodes(NodeTable),
    Linear(LinearTable),
}

impl Table {
    pub fn eval(&self, y: f64, count: usize, out: &mut [f64]) {
        match self {
            Table::Nodes(t) => t.eval(y, count, out),
            Table::Linear(t) => t.eval(y, count, out),
        }
    }

    pub fn y_period(&self) -> Option<f64> {
        match self {
            Table::Nodes(t) => t.period.as_ref().map(|p| p.y),
            Table::Linear(t) => t.period.as_ref().map(|p| p.y),
        }
    }
}
