//! Static edge functions `mu = psi(zeta)`, their cocontent integrals, zero
//! sets and passivity-based sign classes.

use std::fmt;

use thiserror::Error;

use crate::grid::Grid;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EdgeFnError {
    #[error("parameter {name} = {value} out of range ({expected})")]
    Parameter {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },
    #[error("edge function must vanish at the origin, got psi(0) = {0}")]
    NonzeroAtOrigin(f64),
    #[error("sampled table: {0}")]
    Table(String),
    #[error("sum of edge functions needs at least one term")]
    EmptySum,
    #[error("zero set around the origin is not an interval")]
    NotAnInterval,
    #[error(transparent)]
    InvalidGrid(#[from] crate::grid::GridError),
}

/// What a [`SampledTable`] does outside its sampled range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Extrapolation {
    /// Hold the end values.
    Hold,
    /// Continue the end segments.
    #[default]
    Linear,
}

/// Piecewise-linear interpolant through `(zeta, mu)` samples.
///
/// Linear interpolation keeps monotone samples monotone, so equivalent edge
/// tables can be fed back into a network as ordinary edge functions.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledTable {
    zeta: Vec<f64>,
    mu: Vec<f64>,
    extrapolation: Extrapolation,
    // integral of the interpolant from zeta[0] to zeta[i]
    cumulative: Vec<f64>,
    origin_integral: f64,
}

impl SampledTable {
    pub fn new(
        zeta: Vec<f64>,
        mu: Vec<f64>,
        extrapolation: Extrapolation,
    ) -> Result<Self, EdgeFnError> {
        if zeta.len() != mu.len() {
            return Err(EdgeFnError::Table(format!(
                "{} zeta values but {} mu values",
                zeta.len(),
                mu.len()
            )));
        }
        if zeta.len() < 2 {
            return Err(EdgeFnError::Table("need at least two samples".into()));
        }
        if zeta.iter().chain(&mu).any(|v| !v.is_finite()) {
            return Err(EdgeFnError::Table("samples must be finite".into()));
        }
        if let Some(i) = zeta.windows(2).position(|w| w[1] <= w[0]) {
            return Err(EdgeFnError::Table(format!(
                "zeta must be strictly increasing (sample {} = {} after {})",
                i + 1,
                zeta[i + 1],
                zeta[i]
            )));
        }
        let mut cumulative = Vec::with_capacity(zeta.len());
        cumulative.push(0.0);
        for i in 1..zeta.len() {
            let area = 0.5 * (mu[i] + mu[i - 1]) * (zeta[i] - zeta[i - 1]);
            cumulative.push(cumulative[i - 1] + area);
        }
        let mut table = Self {
            zeta,
            mu,
            extrapolation,
            cumulative,
            origin_integral: 0.0,
        };
        table.origin_integral = table.integral_from_start(0.0);
        Ok(table)
    }

    pub fn from_points(
        points: &[(f64, f64)],
        extrapolation: Extrapolation,
    ) -> Result<Self, EdgeFnError> {
        let (zeta, mu) = points.iter().copied().unzip();
        Self::new(zeta, mu, extrapolation)
    }

    pub fn zeta(&self) -> &[f64] {
        &self.zeta
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn extrapolation(&self) -> Extrapolation {
        self.extrapolation
    }

    /// Keeps the samples inside `[lo, hi]`.
    pub fn clipped(
        &self,
        lo: f64,
        hi: f64,
        extrapolation: Extrapolation,
    ) -> Result<Self, EdgeFnError> {
        let (zeta, mu): (Vec<f64>, Vec<f64>) = self
            .zeta
            .iter()
            .zip(&self.mu)
            .filter(|(z, _)| **z >= lo && **z <= hi)
            .map(|(z, m)| (*z, *m))
            .unzip();
        Self::new(zeta, mu, extrapolation)
    }

    fn last(&self) -> usize {
        self.zeta.len() - 1
    }

    fn end_slope(&self, left: bool) -> f64 {
        let (a, b) = if left {
            (0, 1)
        } else {
            (self.last() - 1, self.last())
        };
        (self.mu[b] - self.mu[a]) / (self.zeta[b] - self.zeta[a])
    }

    // index i with zeta[i] <= z < zeta[i+1], clamped to the segment range
    fn segment(&self, z: f64) -> usize {
        let idx = self.zeta.partition_point(|&v| v <= z);
        idx.saturating_sub(1).min(self.last() - 1)
    }

    pub fn eval(&self, z: f64) -> f64 {
        let last = self.last();
        if z <= self.zeta[0] || z >= self.zeta[last] {
            let left = z <= self.zeta[0];
            let (z0, m0) = if left {
                (self.zeta[0], self.mu[0])
            } else {
                (self.zeta[last], self.mu[last])
            };
            return match self.extrapolation {
                Extrapolation::Hold => m0,
                Extrapolation::Linear => m0 + self.end_slope(left) * (z - z0),
            };
        }
        let i = self.segment(z);
        let t = (z - self.zeta[i]) / (self.zeta[i + 1] - self.zeta[i]);
        self.mu[i] + t * (self.mu[i + 1] - self.mu[i])
    }

    pub fn slope(&self, z: f64) -> f64 {
        let last = self.last();
        if z < self.zeta[0] || z > self.zeta[last] {
            return match self.extrapolation {
                Extrapolation::Hold => 0.0,
                Extrapolation::Linear => self.end_slope(z < self.zeta[0]),
            };
        }
        let i = self.segment(z);
        (self.mu[i + 1] - self.mu[i]) / (self.zeta[i + 1] - self.zeta[i])
    }

    fn integral_from_start(&self, z: f64) -> f64 {
        let last = self.last();
        if z < self.zeta[0] {
            // negative of the integral over [z, zeta[0]]
            let width = self.zeta[0] - z;
            let m0 = self.mu[0];
            return match self.extrapolation {
                Extrapolation::Hold => -m0 * width,
                Extrapolation::Linear => {
                    let mz = self.eval(z);
                    -0.5 * (m0 + mz) * width
                }
            };
        }
        if z > self.zeta[last] {
            let width = z - self.zeta[last];
            let ml = self.mu[last];
            let tail = match self.extrapolation {
                Extrapolation::Hold => ml * width,
                Extrapolation::Linear => 0.5 * (ml + self.eval(z)) * width,
            };
            return self.cumulative[last] + tail;
        }
        let i = self.segment(z);
        let mz = self.eval(z);
        self.cumulative[i] + 0.5 * (self.mu[i] + mz) * (z - self.zeta[i])
    }

    /// Exact integral of the interpolant from 0 to `z`.
    pub fn integral(&self, z: f64) -> f64 {
        self.integral_from_start(z) - self.origin_integral
    }
}

/// A static edge function `psi`.
#[derive(Debug, Clone, PartialEq)]
pub enum EdgeFunction {
    /// `w * zeta`.
    Linear {
        w: f64,
    },
    /// `w * sign(zeta) * max(|zeta| - band, 0)`.
    DeadZone {
        w: f64,
        band: f64,
    },
    /// `w * sign(zeta) * |zeta|^alpha` with `0 < alpha < 1`.
    PowerSign {
        w: f64,
        alpha: f64,
    },
    /// `a * sin(zeta)`, a Josephson-junction-like characteristic.
    Sinusoid {
        a: f64,
    },
    Negated(Box<EdgeFunction>),
    Sum(Vec<EdgeFunction>),
    Table(SampledTable),
}

fn param(
    name: &'static str,
    value: f64,
    ok: bool,
    expected: &'static str,
) -> Result<(), EdgeFnError> {
    if ok && value.is_finite() {
        Ok(())
    } else {
        Err(EdgeFnError::Parameter {
            name,
            value,
            expected,
        })
    }
}

impl EdgeFunction {
    pub fn linear(w: f64) -> Result<Self, EdgeFnError> {
        Self::Linear { w }.validated()
    }

    pub fn dead_zone(w: f64, band: f64) -> Result<Self, EdgeFnError> {
        Self::DeadZone { w, band }.validated()
    }

    pub fn power_sign(w: f64, alpha: f64) -> Result<Self, EdgeFnError> {
        Self::PowerSign { w, alpha }.validated()
    }

    pub fn sinusoid(a: f64) -> Result<Self, EdgeFnError> {
        Self::Sinusoid { a }.validated()
    }

    pub fn negated(inner: EdgeFunction) -> Result<Self, EdgeFnError> {
        Self::Negated(Box::new(inner)).validated()
    }

    pub fn sum(terms: Vec<EdgeFunction>) -> Result<Self, EdgeFnError> {
        Self::Sum(terms).validated()
    }

    pub fn table(table: SampledTable) -> Result<Self, EdgeFnError> {
        Self::Table(table).validated()
    }

    fn validated(self) -> Result<Self, EdgeFnError> {
        self.validate()?;
        Ok(self)
    }

    /// Checks parameter ranges and `psi(0) = 0`.
    pub fn validate(&self) -> Result<(), EdgeFnError> {
        match self {
            Self::Linear { w } => param("w", *w, true, "finite")?,
            Self::DeadZone { w, band } => {
                param("w", *w, true, "finite")?;
                param("band", *band, *band > 0.0, "band > 0")?;
            }
            Self::PowerSign { w, alpha } => {
                param("w", *w, true, "finite")?;
                param(
                    "alpha",
                    *alpha,
                    *alpha > 0.0 && *alpha < 1.0,
                    "0 < alpha < 1",
                )?;
            }
            Self::Sinusoid { a } => param("a", *a, true, "finite")?,
            Self::Negated(inner) => inner.validate()?,
            Self::Sum(terms) => {
                if terms.is_empty() {
                    return Err(EdgeFnError::EmptySum);
                }
                for t in terms {
                    t.validate()?;
                }
            }
            Self::Table(t) => {
                let at_origin = t.eval(0.0);
                let scale = t.mu.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
                if at_origin.abs() > 1e-9 * scale {
                    return Err(EdgeFnError::NonzeroAtOrigin(at_origin));
                }
            }
        }
        Ok(())
    }

    /// `psi(zeta)`.
    pub fn eval(&self, z: f64) -> f64 {
        match self {
            Self::Linear { w } => w * z,
            Self::DeadZone { w, band } => w * z.signum() * (z.abs() - band).max(0.0),
            Self::PowerSign { w, alpha } => {
                if z == 0.0 {
                    0.0
                } else {
                    w * z.signum() * z.abs().powf(*alpha)
                }
            }
            Self::Sinusoid { a } => a * z.sin(),
            Self::Negated(inner) => -inner.eval(z),
            Self::Sum(terms) => terms.iter().map(|t| t.eval(z)).sum(),
            Self::Table(t) => t.eval(z),
        }
    }

    /// `d psi / d zeta`; `+inf` where a power law is vertical, one-sided at kinks.
    pub fn derivative(&self, z: f64) -> f64 {
        match self {
            Self::Linear { w } => *w,
            Self::DeadZone { w, band } => {
                if z.abs() > *band {
                    *w
                } else {
                    0.0
                }
            }
            Self::PowerSign { w, alpha } => {
                if z == 0.0 {
                    f64::INFINITY * w.signum()
                } else {
                    w * alpha * z.abs().powf(alpha - 1.0)
                }
            }
            Self::Sinusoid { a } => a * z.cos(),
            Self::Negated(inner) => -inner.derivative(z),
            Self::Sum(terms) => terms.iter().map(|t| t.derivative(z)).sum(),
            Self::Table(t) => t.slope(z),
        }
    }

    /// Cocontent `G(zeta) = integral of psi from 0 to zeta`, in closed form
    /// for every kind (tables integrate their interpolant exactly).
    pub fn cocontent(&self, z: f64) -> f64 {
        match self {
            Self::Linear { w } => 0.5 * w * z * z,
            Self::DeadZone { w, band } => {
                let excess = (z.abs() - band).max(0.0);
                0.5 * w * excess * excess
            }
            Self::PowerSign { w, alpha } => {
                if z == 0.0 {
                    0.0
                } else {
                    w * z.abs().powf(alpha + 1.0) / (alpha + 1.0)
                }
            }
            Self::Sinusoid { a } => a * (1.0 - z.cos()),
            Self::Negated(inner) => -inner.cocontent(z),
            Self::Sum(terms) => terms.iter().map(|t| t.cocontent(z)).sum(),
            Self::Table(t) => t.integral(z),
        }
    }

    /// The slope when the function is linear (possibly negated or summed).
    pub fn linear_weight(&self) -> Option<f64> {
        match self {
            Self::Linear { w } => Some(*w),
            Self::Negated(inner) => inner.linear_weight().map(|w| -w),
            Self::Sum(terms) => terms.iter().map(|t| t.linear_weight()).sum(),
            _ => None,
        }
    }

    /// The orientation-flipped function `zeta -> -psi(-zeta)`.
    pub fn conjugate(&self) -> EdgeFunction {
        match self {
            Self::Table(t) => {
                let zeta = t.zeta.iter().rev().map(|z| -z).collect();
                let mu = t.mu.iter().rev().map(|m| -m).collect();
                Self::Table(
                    SampledTable::new(zeta, mu, t.extrapolation)
                        .expect("mirrored samples stay strictly increasing"),
                )
            }
            Self::Negated(inner) => Self::Negated(Box::new(inner.conjugate())),
            Self::Sum(terms) => Self::Sum(terms.iter().map(|t| t.conjugate()).collect()),
            odd => odd.clone(),
        }
    }

    /// Passivity class of the static map, certified on `grid`.
    pub fn classify_sign(&self, grid: &Grid) -> SignClass {
        let mut nonneg = true;
        let mut nonpos = true;
        let mut neg_witness = None;
        let mut min_ratio = (f64::INFINITY, 0.0);
        let mut max_ratio = (f64::NEG_INFINITY, 0.0);
        for z in grid.points() {
            let m = self.eval(z);
            let s = z * m;
            let tol = 1e-12 * z * z;
            if s < -tol {
                nonneg = false;
                neg_witness.get_or_insert(z);
            }
            if s > tol {
                nonpos = false;
            }
            if z.abs() > 1e-9 {
                let r = m / z;
                if r < min_ratio.0 {
                    min_ratio = (r, z);
                }
                if r > max_ratio.0 {
                    max_ratio = (r, z);
                }
            }
        }
        let (sign, margin, witness) = if nonneg && min_ratio.0 > STRICT_FLOOR {
            (Sign::StrictlyPositive, min_ratio.0, None)
        } else if nonpos && !nonneg && max_ratio.0 < -STRICT_FLOOR {
            (Sign::StrictlyNegative, -max_ratio.0, None)
        } else if nonneg {
            (Sign::Positive, 0.0, Some(min_ratio.1))
        } else if nonpos {
            (Sign::Negative, 0.0, Some(max_ratio.1))
        } else {
            (Sign::Indefinite, 0.0, neg_witness)
        };
        SignClass {
            sign,
            margin,
            witness,
            grid: *grid,
        }
    }

    /// Closed interval containing the zero set around the origin.
    pub fn equilibria(&self) -> Result<EquilibriaInterval, EdgeFnError> {
        match self {
            Self::Linear { w } | Self::PowerSign { w, .. } => Ok(if *w == 0.0 {
                EquilibriaInterval::whole_line()
            } else {
                EquilibriaInterval::origin()
            }),
            Self::DeadZone { w, band } => Ok(if *w == 0.0 {
                EquilibriaInterval::whole_line()
            } else {
                EquilibriaInterval {
                    lower: -band,
                    upper: *band,
                }
            }),
            Self::Sinusoid { a } => {
                if *a == 0.0 {
                    Ok(EquilibriaInterval::whole_line())
                } else {
                    Err(EdgeFnError::NotAnInterval)
                }
            }
            Self::Negated(inner) => inner.equilibria(),
            Self::Sum(_) | Self::Table(_) => self.scan_equilibria(self.scan_half_width()),
        }
    }

    fn scan_half_width(&self) -> f64 {
        fn reach(f: &EdgeFunction) -> f64 {
            match f {
                EdgeFunction::Table(t) => t.zeta[0].abs().max(t.zeta[t.last()].abs()),
                EdgeFunction::DeadZone { band, .. } => 2.0 * band,
                EdgeFunction::Negated(inner) => reach(inner),
                EdgeFunction::Sum(terms) => terms.iter().map(reach).fold(0.0, f64::max),
                _ => 0.0,
            }
        }
        reach(self).max(100.0)
    }

    fn scan_equilibria(&self, half_width: f64) -> Result<EquilibriaInterval, EdgeFnError> {
        const STEPS: usize = 20_000;
        let step = half_width / STEPS as f64;
        let scale = (0..=STEPS)
            .flat_map(|i| {
                let z = i as f64 * step;
                [self.eval(z).abs(), self.eval(-z).abs()]
            })
            .fold(1.0_f64, f64::max);
        let tol = 1e-12 * scale;
        let is_zero = |z: f64| self.eval(z).abs() <= tol;

        let mut bounds = [0.0; 2];
        for (slot, dir) in [(0usize, -1.0), (1, 1.0)] {
            let mut last_zero = 0.0;
            let mut first_nonzero = None;
            for i in 1..=STEPS {
                let z = dir * i as f64 * step;
                if is_zero(z) {
                    if first_nonzero.is_some() {
                        return Err(EdgeFnError::NotAnInterval);
                    }
                    last_zero = z;
                } else {
                    let v = self.eval(z);
                    match first_nonzero {
                        None => first_nonzero = Some((z, v.signum())),
                        Some((_, s)) if s != v.signum() => return Err(EdgeFnError::NotAnInterval),
                        _ => {}
                    }
                }
            }
            bounds[slot] = match first_nonzero {
                None => dir * f64::INFINITY,
                Some((z_out, _)) => {
                    let (mut inside, mut outside) = (last_zero, z_out);
                    for _ in 0..80 {
                        let mid = 0.5 * (inside + outside);
                        if is_zero(mid) {
                            inside = mid;
                        } else {
                            outside = mid;
                        }
                    }
                    inside
                }
            };
        }
        Ok(EquilibriaInterval {
            lower: bounds[0],
            upper: bounds[1],
        })
    }

    /// Monotonicity of `psi` on `grid`, plus a check that it is still rising
    /// over the outer tenth of the grid on both sides.
    pub fn monotonicity(&self, grid: &Grid) -> Monotonicity {
        let values: Vec<f64> = grid.points().map(|z| self.eval(z)).collect();
        let scale = values.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
        let h = grid.spacing();
        let mut nondecreasing = true;
        let mut strictly_increasing = true;
        let mut min_slope = f64::INFINITY;
        for w in values.windows(2) {
            let d = w[1] - w[0];
            if d < -1e-12 * scale {
                nondecreasing = false;
            }
            if d <= 0.0 {
                strictly_increasing = false;
            }
            min_slope = min_slope.min(d / h);
        }
        let tenth = (values.len() / 10).max(1);
        let last = values.len() - 1;
        let unbounded = values[last] > values[last - tenth] && values[0] < values[tenth];
        Monotonicity {
            nondecreasing,
            strictly_increasing,
            min_slope,
            unbounded,
        }
    }
}

const STRICT_FLOOR: f64 = 1e-12;

impl fmt::Display for EdgeFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Linear { w } => write!(f, "linear(w={w})"),
            Self::DeadZone { w, band } => write!(f, "dead_zone(w={w}, band={band})"),
            Self::PowerSign { w, alpha } => write!(f, "power_sign(w={w}, alpha={alpha})"),
            Self::Sinusoid { a } => write!(f, "sinusoid(a={a})"),
            Self::Negated(inner) => write!(f, "-({inner})"),
            Self::Sum(terms) => {
                write!(f, "sum(")?;
                for (i, t) in terms.iter().enumerate() {
                    if i > 0 {
                        write!(f, " + ")?;
                    }
                    write!(f, "{t}")?;
                }
                write!(f, ")")
            }
            Self::Table(t) => write!(
                f,
                "table({} samples on [{}, {}])",
                t.zeta.len(),
                t.zeta[0],
                t.zeta[t.last()]
            ),
        }
    }
}

/// Passivity label of an edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    StrictlyPositive,
    Positive,
    StrictlyNegative,
    Negative,
    Indefinite,
}

impl Sign {
    pub fn is_positive(self) -> bool {
        matches!(self, Sign::StrictlyPositive | Sign::Positive)
    }

    pub fn is_strictly_positive(self) -> bool {
        self == Sign::StrictlyPositive
    }

    pub fn is_negative(self) -> bool {
        matches!(self, Sign::StrictlyNegative | Sign::Negative)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Sign::StrictlyPositive => "strictly-positive",
            Sign::Positive => "positive",
            Sign::StrictlyNegative => "strictly-negative",
            Sign::Negative => "negative",
            Sign::Indefinite => "indefinite",
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Grid certificate for an edge's passivity label.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignClass {
    pub sign: Sign,
    /// Largest `eps` with `zeta * psi(zeta) >= eps * zeta^2` (or its active
    /// mirror) on the grid; 0 unless strict.
    pub margin: f64,
    /// A grid point where the next stronger label fails.
    pub witness: Option<f64>,
    pub grid: Grid,
}

/// `[lower, upper]` with `lower <= 0 <= upper`; infinite ends mean the
/// function vanishes on the whole scanned line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquilibriaInterval {
    pub lower: f64,
    pub upper: f64,
}

impl EquilibriaInterval {
    pub fn origin() -> Self {
        Self {
            lower: 0.0,
            upper: 0.0,
        }
    }

    pub fn whole_line() -> Self {
        Self {
            lower: f64::NEG_INFINITY,
            upper: f64::INFINITY,
        }
    }

    pub fn is_whole_line(&self) -> bool {
        self.lower == f64::NEG_INFINITY && self.upper == f64::INFINITY
    }

    pub fn contains(&self, z: f64, tol: f64) -> bool {
        z >= self.lower - tol && z <= self.upper + tol
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Monotonicity {
    pub nondecreasing: bool,
    pub strictly_increasing: bool,
    /// Smallest difference quotient between neighboring grid points.
    pub min_slope: f64,
    pub unbounded: bool,
}
