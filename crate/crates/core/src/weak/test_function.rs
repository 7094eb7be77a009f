use serde::{Deserialize, Serialize};

/// `L1` test functions with closed-form antiderivatives.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TestFunction {
    /// `exp(-((s - center)/width)^2 / 2)`
    Gaussian { center: f64, width: f64 },
    /// `max(0, 1 - |s - center| / half_width)`
    Hat { center: f64, half_width: f64 },
    /// Indicator of `[a, b]`.
    Indicator { a: f64, b: f64 },
}

/// Gaussians are cut at this many widths.
const GAUSS_CUT: f64 = 12.0;

impl TestFunction {
    pub fn is_valid(&self) -> bool {
        match *self {
            TestFunction::Gaussian { center, width } => center.is_finite() && width > 0.0 && width.is_finite(),
            TestFunction::Hat { center, half_width } => center.is_finite() && half_width > 0.0 && half_width.is_finite(),
            TestFunction::Indicator { a, b } => a.is_finite() && b.is_finite() && b > a,
        }
    }

    pub fn eval(&self, s: f64) -> f64 {
        match *self {
            TestFunction::Gaussian { center, width } => {
                let x = (s - center) / width;
                (-0.5 * x * x).exp()
            }
            TestFunction::Hat { center, half_width } => (1.0 - (s - center).abs() / half_width).max(0.0),
            TestFunction::Indicator { a, b } => {
                if s >= a && s <= b {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// `int_R g`
    pub fn integral(&self) -> f64 {
        match *self {
            TestFunction::Gaussian { width, .. } => width * (2.0 * std::f64::consts::PI).sqrt(),
            TestFunction::Hat { half_width, .. } => half_width,
            TestFunction::Indicator { a, b } => b - a,
        }
    }

    /// `G(s) = int_{-inf}^s g`
    pub fn antiderivative(&self, s: f64) -> f64 {
        match *self {
            TestFunction::Gaussian { center, width } => {
                let x = (s - center) / (width * std::f64::consts::SQRT_2);
                0.5 * self.integral() * (1.0 + libm::erf(x))
            }
            TestFunction::Hat { center, half_width: r } => {
                if s <= center - r {
                    0.0
                } else if s <= center {
                    (s - center + r).powi(2) / (2.0 * r)
                } else if s < center + r {
                    r - (center + r - s).powi(2) / (2.0 * r)
                } else {
                    r
                }
            }
            TestFunction::Indicator { a, b } => s.clamp(a, b) - a,
        }
    }

    /// Interval outside which `g` vanishes (to rounding for Gaussians).
    pub fn support(&self) -> (f64, f64) {
        match *self {
            TestFunction::Gaussian { center, width } => (center - GAUSS_CUT * width, center + GAUSS_CUT * width),
            TestFunction::Hat { center, half_width } => (center - half_width, center + half_width),
            TestFunction::Indicator { a, b } => (a, b),
        }
    }

    /// Points where `g` is not smooth.
    pub fn kinks(&self) -> Vec<f64> {
        match *self {
            TestFunction::Gaussian { .. } => Vec::new(),
            TestFunction::Hat { center, half_width } => vec![center - half_width, center, center + half_width],
            TestFunction::Indicator { a, b } => vec![a, b],
        }
    }

    /// Smallest length scale of `g`, used to size quadrature panels.
    pub fn scale(&self) -> f64 {
        match *self {
            TestFunction::Gaussian { width, .. } => width,
            TestFunction::Hat { half_width, .. } => half_width,
            TestFunction::Indicator { a, b } => b - a,
        }
    }

    pub fn label(&self) -> String {
        match *self {
            TestFunction::Gaussian { center, width } => format!("gauss(c={center:.4},w={width:.4})"),
            TestFunction::Hat { center, half_width } => format!("hat(c={center:.4},r={half_width:.4})"),
            TestFunction::Indicator { a, b } => format!("ind[{a:.4},{b:.4}]"),
        }
    }
}

/// 8 Gaussians (widths 0.25 to 2), 8 hats and 4 indicators spread over
/// `[start, start + length)`.
pub fn default_family(start: f64, length: f64) -> Vec<TestFunction> {
    let mut out = Vec::with_capacity(20);
    let at = |x: f64| start + x * length;
    for k in 0..8 {
        let width = 0.25 * 2f64.powf(3.0 * k as f64 / 7.0);
        out.push(TestFunction::Gaussian { center: at((k as f64 + 0.5) / 8.0), width });
    }
    for k in 0..8 {
        let half_width = 0.3 + 0.9 * k as f64 / 7.0;
        out.push(TestFunction::Hat { center: at((k as f64 + 0.25) / 8.0), half_width });
    }
    for (a, b) in [(0.05, 0.3), (0.2, 0.49), (0.4, 0.94), (0.7, 0.955)] {
        out.push(TestFunction::Indicator { a: at(a), b: at(b) });
    }
    out
}

/// Narrow hats normalised to unit mass act as local averages.
pub fn probe_family(centers: &[f64], half_width: f64) -> Vec<TestFunction> {
    centers.iter().map(|&center| TestFunction::Hat { center, half_width }).collect()
}
