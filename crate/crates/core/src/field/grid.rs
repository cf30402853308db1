use std::f64::consts::PI;

use super::FieldError;

/// Uniform grid `x_q = q / M` on `[0, 1]` carrying `N - 1` channel sites at
/// `i / N`, each on a grid node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Grid {
    cells: usize,
    n: usize,
}

impl Grid {
    /// `cells` is `M`, `n` the channel parameter `N`; `M` must be a positive
    /// multiple of `N`.
    pub fn new(cells: usize, n: usize) -> Result<Self, FieldError> {
        if n == 0 || cells == 0 || !cells.is_multiple_of(n) {
            return Err(FieldError::IncompatibleGrid { cells, n });
        }
        Ok(Self { cells, n })
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nodes(&self) -> usize {
        self.cells + 1
    }

    #[inline]
    pub fn h(&self) -> f64 {
        1.0 / self.cells as f64
    }

    #[inline]
    pub fn x(&self, q: usize) -> f64 {
        q as f64 / self.cells as f64
    }

    /// Number of channels, `N - 1`.
    pub fn channels(&self) -> usize {
        self.n - 1
    }

    /// Grid node of channel `i` (0-based, at position `(i + 1) / N`).
    #[inline]
    pub fn channel_node(&self, i: usize) -> usize {
        (i + 1) * (self.cells / self.n)
    }

    pub fn channel_position(&self, i: usize) -> f64 {
        (i + 1) as f64 / self.n as f64
    }
}

/// Membrane potential on a grid at a given time; both end values are 0.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: Grid,
    values: Vec<f64>,
    time: f64,
}

impl Field {
    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.nodes()],
            time: 0.0,
        }
    }

    /// Samples `f` at the interior nodes; boundary values are set to 0.
    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Self {
        let mut values: Vec<f64> = (0..grid.nodes()).map(|q| f(grid.x(q))).collect();
        values[0] = 0.0;
        values[grid.cells()] = 0.0;
        Self {
            grid,
            values,
            time: 0.0,
        }
    }

    pub fn new(grid: Grid, values: Vec<f64>, time: f64) -> Result<Self, FieldError> {
        if values.len() != grid.nodes() {
            return Err(FieldError::Length {
                expected: grid.nodes(),
                got: values.len(),
            });
        }
        if values[0] != 0.0 || values[grid.cells()] != 0.0 {
            return Err(FieldError::Boundary);
        }
        Ok(Self { grid, values, time })
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn with_time(mut self, time: f64) -> Self {
        self.time = time;
        self
    }

    /// Potential at channel `i`.
    pub fn at_channel(&self, i: usize) -> f64 {
        self.values[self.grid.channel_node(i)]
    }

    pub fn sup_norm(&self) -> f64 {
        self.values
            .iter()
            .map(|v| v.abs())
            .fold(0.0, |m, d| if d.is_nan() || d > m { d } else { m })
    }

    pub fn sup_distance(&self, other: &Field) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, |m, d| if d.is_nan() || d > m { d } else { m })
    }

    /// Discrete `H¹₀` norm `(‖u‖²_{L²} + ‖u'‖²_{L²})^{1/2}`.
    pub fn h1_norm(&self) -> f64 {
        h1_norm(&self.values, self.grid.h())
    }
}

fn h1_norm(values: &[f64], h: f64) -> f64 {
    let l2: f64 = values.iter().map(|v| v * v).sum::<f64>() * h;
    let grad: f64 = values
        .windows(2)
        .map(|w| {
            let d = (w[1] - w[0]) / h;
            d * d
        })
        .sum::<f64>()
        * h;
    (l2 + grad).sqrt()
}

/// Smooth test function vanishing at both ends, with analytic `φ''`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TestFunction {
    /// `sin(kπx)`.
    Sine {
        mode: u32,
    },
    /// `x (1 - x)`.
    Parabola,
    Zero,
}

impl TestFunction {
    pub fn sine() -> Self {
        TestFunction::Sine { mode: 1 }
    }

    #[inline]
    pub fn value(&self, x: f64) -> f64 {
        match *self {
            TestFunction::Sine { mode } => (mode as f64 * PI * x).sin(),
            TestFunction::Parabola => x * (1.0 - x),
            TestFunction::Zero => 0.0,
        }
    }

    pub fn second_derivative(&self, x: f64) -> f64 {
        match *self {
            TestFunction::Sine { mode } => {
                let k = mode as f64 * PI;
                -k * k * (k * x).sin()
            }
            TestFunction::Parabola => -2.0,
            TestFunction::Zero => 0.0,
        }
    }
}

impl std::fmt::Display for TestFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match *self {
            TestFunction::Sine { mode: 1 } => f.write_str("sine"),
            TestFunction::Sine { mode } => write!(f, "sine:{mode}"),
            TestFunction::Parabola => f.write_str("parabola"),
            TestFunction::Zero => f.write_str("zero"),
        }
    }
}

impl std::str::FromStr for TestFunction {
    type Err = String;

    /// `sine`, `sine:K`, `parabola` or `zero`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "sine" => Ok(TestFunction::sine()),
            "parabola" => Ok(TestFunction::Parabola),
            "zero" => Ok(TestFunction::Zero),
            other => other
                .strip_prefix("sine:")
                .and_then(|k| k.parse().ok())
                .filter(|&k| k > 0)
                .map(|mode| TestFunction::Sine { mode })
                .ok_or_else(|| format!("unknown test function `{other}`")),
        }
    }
}
