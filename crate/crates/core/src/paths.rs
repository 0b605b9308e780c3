//! Paths, partition sums and the noncommutative line integral.

use serde::{Deserialize, Serialize};

use crate::elem::{exp, ln_principal, log_near};
use crate::error::{Error, Result};
use crate::quat::{Quaternion, ZERO};
use crate::words::{Hat, Phrase};

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// Deepest column of the extrapolation table.
const MAX_EXTRAPOLATION: usize = 8;

/// Levels accepted before the stopping test is allowed to fire.
const MIN_LEVELS: usize = 3;

/// `gamma(s) = a + r exp(2 pi (phase + s turns) M)` for `s` in `[0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Circle {
    pub a: Quaternion,
    pub r: f64,
    #[serde(rename = "M")]
    pub m: Quaternion,
    pub turns: f64,
    /// Starting angle in turns; zero puts the start at `a + r`.
    #[serde(default)]
    pub phase: f64,
}

impl Circle {
    /// Validates `r > 0` and that `M` is a unit imaginary quaternion (renormalized when
    /// off by rounding only).
    pub fn new(a: Quaternion, r: f64, m: Quaternion, turns: f64) -> Result<Circle> {
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::Domain(format!(
                "circle radius must be positive, got {r}"
            )));
        }
        if !turns.is_finite() || turns == 0.0 {
            return Err(Error::Domain(
                "circle needs a nonzero finite number of turns".into(),
            ));
        }
        let n = m.norm();
        if m.v.abs() > 1e-9 || (n - 1.0).abs() > 1e-9 {
            return Err(Error::Domain(format!(
                "circle generator must be unit imaginary, got {m}"
            )));
        }
        let m = Quaternion::new(0.0, m.w, m.x, m.y) / n;
        Ok(Circle {
            a,
            r,
            m,
            turns,
            phase: 0.0,
        })
    }

    pub fn point(&self, s: f64) -> Quaternion {
        self.a + exp(self.m * (TWO_PI * (self.phase + s * self.turns))) * self.r
    }

    pub fn is_closed(&self) -> bool {
        self.turns.fract() == 0.0
    }
}

/// Rectifiable path: a polyline through samples or a parametric circle.
#[derive(Clone, Debug, PartialEq)]
pub enum Path {
    Polyline(Vec<Quaternion>),
    Circle(Circle),
}

impl Path {
    pub fn polyline(points: Vec<Quaternion>) -> Result<Path> {
        if points.len() < 2 {
            return Err(Error::Domain("polyline needs at least two points".into()));
        }
        Ok(Path::Polyline(points))
    }

    pub fn start(&self) -> Quaternion {
        match self {
            Path::Polyline(p) => p[0],
            Path::Circle(c) => c.point(0.0),
        }
    }

    pub fn end(&self) -> Quaternion {
        match self {
            Path::Polyline(p) => *p.last().expect("nonempty polyline"),
            Path::Circle(c) => c.point(1.0),
        }
    }

    /// Closed when it returns to its start; circles exactly when `turns` is an integer.
    pub fn is_closed(&self) -> bool {
        match self {
            Path::Polyline(p) => p[0] == *p.last().expect("nonempty polyline"),
            Path::Circle(c) => c.is_closed(),
        }
    }

    pub fn reversed(&self) -> Path {
        match self {
            Path::Polyline(p) => Path::Polyline(p.iter().rev().copied().collect()),
            Path::Circle(c) => Path::Circle(Circle {
                turns: -c.turns,
                phase: c.phase + c.turns,
                ..*c
            }),
        }
    }

    /// Point at parameter `s`; polylines are parametrized by chord length.
    pub fn point(&self, s: f64) -> Quaternion {
        match self {
            Path::Circle(c) => c.point(s),
            Path::Polyline(p) => {
                let lengths: Vec<f64> = p.windows(2).map(|w| (w[1] - w[0]).norm()).collect();
                let total: f64 = lengths.iter().sum();
                if total == 0.0 {
                    return p[0];
                }
                let mut target = s.clamp(0.0, 1.0) * total;
                for (k, &len) in lengths.iter().enumerate() {
                    if target <= len || k + 1 == lengths.len() {
                        let t = if len > 0.0 {
                            (target / len).min(1.0)
                        } else {
                            0.0
                        };
                        return p[k] + (p[k + 1] - p[k]) * t;
                    }
                    target -= len;
                }
                *p.last().expect("nonempty polyline")
            }
        }
    }

    /// Number of partition steps at refinement level `level`.
    pub fn steps(&self, level: usize) -> usize {
        match self {
            Path::Circle(c) => (16 * (c.turns.abs().ceil() as usize).max(1)) << level,
            Path::Polyline(p) => (p.len() - 1) * (4usize << level),
        }
    }

    /// Node `i` of the level-`level` partition, `0 <= i <= steps(level)`.
    ///
    /// Circles are sampled uniformly in `s`. Polylines split every segment into the same
    /// number of equal pieces so that vertices are always nodes.
    pub fn node(&self, level: usize, i: usize) -> Quaternion {
        let n = self.steps(level);
        match self {
            Path::Circle(c) => {
                if i == n && c.is_closed() {
                    return c.point(0.0);
                }
                c.point(i as f64 / n as f64)
            }
            Path::Polyline(p) => {
                let per = 4usize << level;
                let (seg, k) = (i / per, i % per);
                if seg + 1 >= p.len() {
                    return *p.last().expect("nonempty polyline");
                }
                p[seg] + (p[seg + 1] - p[seg]) * (k as f64 / per as f64)
            }
        }
    }
}

/// Increasing parameters `0 = c_0 < ... < c_q = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct Partition {
    points: Vec<f64>,
}

impl Partition {
    pub fn new(points: Vec<f64>) -> Result<Partition> {
        if points.len() < 2 || points[0] != 0.0 || *points.last().unwrap() != 1.0 {
            return Err(Error::Domain("partition must run from 0 to 1".into()));
        }
        if points.iter().any(|p| p.is_nan()) || points.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Domain(
                "partition must be strictly increasing".into(),
            ));
        }
        Ok(Partition { points })
    }

    pub fn uniform(q: usize) -> Partition {
        let q = q.max(1);
        Partition {
            points: (0..=q).map(|k| k as f64 / q as f64).collect(),
        }
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    /// Largest step.
    pub fn norm(&self) -> f64 {
        self.points
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(0.0, f64::max)
    }

    /// Midpoint refinement.
    pub fn refine(&self) -> Partition {
        let mut out = Vec::with_capacity(2 * self.points.len());
        for w in self.points.windows(2) {
            out.push(w[0]);
            out.push(0.5 * (w[0] + w[1]));
        }
        out.push(1.0);
        Partition { points: out }
    }
}

/// `v(gamma; P) = sum |gamma(c_{k+1}) - gamma(c_k)|`.
pub fn total_variation(path: &Path, partition: &Partition) -> f64 {
    partition
        .points
        .windows(2)
        .map(|w| (path.point(w[1]) - path.point(w[0])).norm())
        .sum()
}

/// One row of the refinement trace.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub steps: usize,
    pub value: Quaternion,
    pub delta: f64,
}

/// Result of a refined partition sum.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureResult {
    pub value: Quaternion,
    /// Distance between the last two extrapolated values.
    pub error_estimate: f64,
    pub refinements: usize,
    pub trace: Vec<TraceEntry>,
}

/// Stopping tolerance and refinement budget.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadOptions {
    pub tol: f64,
    pub max_refine: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions {
            tol: 1e-8,
            max_refine: 20,
        }
    }
}

/// Continuous logarithm of `z - center` along successive nodes.
struct Lifter {
    center: Quaternion,
    prev: Option<(Quaternion, Quaternion)>,
}

/// True when the step from `p` to `q` turns by less than a right angle in 4-space and in
/// each of the three planes `(v, w)`, `(v, x)`, `(v, y)`.
///
/// A plane in which both points have no imaginary component projects the step onto the
/// real axis, where the planar angle carries no branch information; it is skipped.
fn step_is_fine(p: Quaternion, q: Quaternion) -> bool {
    if p.dot(q) <= 0.0 {
        return false;
    }
    let scale = p.norm().max(q.norm());
    for (a, b) in [(p.w, q.w), (p.x, q.x), (p.y, q.y)] {
        let (np, nq) = (p.v.hypot(a), q.v.hypot(b));
        if np <= 1e-12 * scale || nq <= 1e-12 * scale {
            continue;
        }
        if a.abs() <= 1e-9 * scale && b.abs() <= 1e-9 * scale {
            continue;
        }
        if p.v * q.v + a * b <= 0.0 {
            return false;
        }
    }
    true
}

impl Lifter {
    fn new(center: Quaternion) -> Self {
        Lifter { center, prev: None }
    }

    /// Logarithm of `z - center` continuing the previous one; `None` when the step is
    /// too coarse to be tracked.
    fn step(&mut self, z: Quaternion) -> Result<Option<Quaternion>> {
        let zeta = z - self.center;
        if zeta.norm() <= 1e-14 * (1.0 + z.norm()) {
            return Err(Error::OnPath(self.center));
        }
        let lift = match self.prev {
            None => ln_principal(zeta)?,
            Some((pz, pl)) => {
                if !step_is_fine(pz, zeta) {
                    return Ok(None);
                }
                log_near(zeta, pl)?
            }
        };
        self.prev = Some((zeta, lift));
        Ok(Some(lift))
    }
}

/// What multiplies the hat at each node.
enum Increment<'a> {
    Dz,
    Dq(&'a Phrase),
}

/// Right-endpoint sum `sum_k sum_j hat_j(z_{k+1}).(dz_k)` at one level, or `None` when
/// the branch tracking needs a finer partition.
fn partition_sum(
    hats: &[Hat],
    path: &Path,
    level: usize,
    inc: &Increment,
) -> Result<Option<Quaternion>> {
    let n = path.steps(level);
    let mut lifters: Vec<Option<Lifter>> = hats
        .iter()
        .map(|h| {
            if h.needs_ln() {
                Some(Lifter::new(h.center()))
            } else {
                None
            }
        })
        .collect();
    let mut prev = path.node(level, 0);
    for l in lifters.iter_mut().flatten() {
        l.step(prev)?;
    }
    let mut prev_q = match inc {
        Increment::Dz => ZERO,
        Increment::Dq(q) => q.eval(prev)?,
    };
    let mut acc = ZERO;
    for i in 1..=n {
        let z = path.node(level, i);
        let dz = match inc {
            Increment::Dz => z - prev,
            Increment::Dq(q) => {
                let qz = q.eval(z).map_err(on_path)?;
                let d = qz - prev_q;
                prev_q = qz;
                d
            }
        };
        for (j, hat) in hats.iter().enumerate() {
            let lift = match &mut lifters[j] {
                Some(l) => match l.step(z)? {
                    Some(v) => Some(v),
                    None => return Ok(None),
                },
                None => None,
            };
            acc += hat.apply(z, dz, lift).map_err(on_path)?;
        }
        prev = z;
    }
    Ok(Some(acc))
}

fn on_path(e: Error) -> Error {
    match e {
        Error::Pole(z) => Error::OnPath(z),
        other => other,
    }
}

/// Refines by doubling and extrapolates the sequence of level values.
///
/// The right-endpoint sums carry an error expansion in all powers of the step, so column
/// `j` of the table removes the `h^j` term with factor `2^j - 1`. A level whose value is
/// `None` restarts the table.
fn refine<F>(
    mut level_value: F,
    opts: &QuadOptions,
    steps: impl Fn(usize) -> usize,
) -> Result<QuadratureResult>
where
    F: FnMut(usize) -> Result<Option<Quaternion>>,
{
    let mut table: Vec<Vec<Quaternion>> = Vec::new();
    let mut trace: Vec<TraceEntry> = Vec::new();
    let mut best: Option<QuadratureResult> = None;
    for level in 0..=opts.max_refine {
        let Some(s) = level_value(level)? else {
            table.clear();
            continue;
        };
        let mut row = vec![s];
        if let Some(prev) = table.last() {
            for j in 1..=prev.len().min(MAX_EXTRAPOLATION) {
                let f = (1u64 << j) as f64 - 1.0;
                let r = row[j - 1] + (row[j - 1] - prev[j - 1]) / f;
                row.push(r);
            }
        }
        let diag = *row.last().expect("nonempty row");
        let delta = match table.last() {
            Some(prev) => (diag - *prev.last().expect("nonempty row")).norm(),
            None => f64::INFINITY,
        };
        table.push(row);
        trace.push(TraceEntry {
            steps: steps(level),
            value: diag,
            delta,
        });
        let result = QuadratureResult {
            value: diag,
            error_estimate: delta,
            refinements: level,
            trace: trace.clone(),
        };
        if table.len() >= MIN_LEVELS && delta < opts.tol {
            return Ok(result);
        }
        best = Some(result);
    }
    let best =
        best.ok_or_else(|| Error::Budget("branch tracking never resolved the path".into()))?;
    Err(Error::NoConvergence {
        levels: opts.max_refine,
        delta: best.error_estimate,
        best: Box::new(best),
    })
}

fn integrate_hats(
    hats: &[Hat],
    path: &Path,
    inc: Increment,
    opts: &QuadOptions,
) -> Result<QuadratureResult> {
    refine(
        |level| partition_sum(hats, path, level, &inc),
        opts,
        |l| path.steps(l),
    )
}

/// `int_gamma f dz` as the limit of `sum f_hat(z_{k+1}).(z_{k+1} - z_k)`.
pub fn line_integral(p: &Phrase, path: &Path, opts: &QuadOptions) -> Result<QuadratureResult> {
    line_integral_sum(std::slice::from_ref(p), path, opts)
}

/// Line integral of a sum of phrases with possibly different centers.
pub fn line_integral_sum(
    ps: &[Phrase],
    path: &Path,
    opts: &QuadOptions,
) -> Result<QuadratureResult> {
    let hats = ps.iter().map(Hat::new).collect::<Result<Vec<_>>>()?;
    integrate_hats(&hats, path, Increment::Dz, opts)
}

/// `sum f_hat(z_{k+1}).(q(z_{k+1}) - q(z_k))` with the same refinement contract.
pub fn stieltjes_integral(
    p: &Phrase,
    q: &Phrase,
    path: &Path,
    opts: &QuadOptions,
) -> Result<QuadratureResult> {
    let hats = vec![Hat::new(p)?];
    integrate_hats(&hats, path, Increment::Dq(q), opts)
}

/// `int_gamma d Ln(z - a)` as the sum of nearest-branch increments, refined until every
/// step is trackable.
pub fn integral_dln(path: &Path, a: Quaternion, opts: &QuadOptions) -> Result<QuadratureResult> {
    integral_dln_nodes(|level, i| path.node(level, i), |l| path.steps(l), a, opts)
}

/// Same for an arbitrary node generator, used for image paths.
pub(crate) fn integral_dln_nodes(
    node: impl Fn(usize, usize) -> Quaternion,
    steps: impl Fn(usize) -> usize,
    a: Quaternion,
    opts: &QuadOptions,
) -> Result<QuadratureResult> {
    let mut trace: Vec<TraceEntry> = Vec::new();
    let mut last: Option<Quaternion> = None;
    for level in 0..=opts.max_refine {
        let n = steps(level);
        let mut lifter = Lifter::new(a);
        let first = lifter
            .step(node(level, 0))?
            .expect("first step is always accepted");
        let mut end = first;
        let mut fine = true;
        for i in 1..=n {
            match lifter.step(node(level, i))? {
                Some(l) => end = l,
                None => {
                    fine = false;
                    break;
                }
            }
        }
        if !fine {
            continue;
        }
        let value = end - first;
        let delta = last.map_or(f64::INFINITY, |p| (value - p).norm());
        trace.push(TraceEntry {
            steps: n,
            value,
            delta,
        });
        if delta < opts.tol.max(1e-12 * (1.0 + value.norm())) {
            return Ok(QuadratureResult {
                value,
                error_estimate: delta,
                refinements: level,
                trace,
            });
        }
        last = Some(value);
    }
    match trace.last() {
        Some(t) => {
            let best = QuadratureResult {
                value: t.value,
                error_estimate: t.delta,
                refinements: opts.max_refine,
                trace: trace.clone(),
            };
            Err(Error::NoConvergence {
                levels: opts.max_refine,
                delta: t.delta,
                best: Box::new(best),
            })
        }
        None => Err(Error::Budget(
            "no refinement level resolved the logarithm branch".into(),
        )),
    }
}
