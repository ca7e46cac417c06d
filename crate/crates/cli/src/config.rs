//! Flat `key = value` experiment configs.
//!
//! One experiment per file, `#` starts a comment. Numbers accept products and
//! quotients with `pi` (`2*pi/1024`). Coefficients, reactions, initial data
//! and domains come from a small catalog of named analytic functions, written
//! as `name(arg, ...)`.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use dispersal_core::{
    BoundaryCondition, CoefficientShape, Domain, KernelFamily, LinearScheme, OperatorKind,
    RateCalibration, SolverKind,
};

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Experiment {
    Simulate,
    Spectrum,
    KppOrbit,
    ConvergeA,
    ConvergeB,
    ConvergeC,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Simulate => "simulate",
            Experiment::Spectrum => "spectrum",
            Experiment::KppOrbit => "kpp-orbit",
            Experiment::ConvergeA => "converge-a",
            Experiment::ConvergeB => "converge-b",
            Experiment::ConvergeC => "converge-c",
        }
    }

    pub fn is_sweep(self) -> bool {
        matches!(self, Experiment::ConvergeA | Experiment::ConvergeB | Experiment::ConvergeC)
    }
}

impl FromStr for Experiment {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        [
            Experiment::Simulate,
            Experiment::Spectrum,
            Experiment::KppOrbit,
            Experiment::ConvergeA,
            Experiment::ConvergeB,
            Experiment::ConvergeC,
        ]
        .into_iter()
        .find(|e| e.name() == s)
        .ok_or_else(|| format!("unknown experiment '{s}'"))
    }
}

/// Bounded box as per-axis `(lower, upper)` pairs, or a periodic cell.
#[derive(Clone, Debug, PartialEq)]
pub enum DomainSpec {
    Box(Vec<(f64, f64)>),
    Cell(Vec<f64>),
}

impl DomainSpec {
    pub fn build(&self) -> dispersal_core::Result<Domain> {
        match self {
            DomainSpec::Box(axes) => {
                let lower: Vec<f64> = axes.iter().map(|a| a.0).collect();
                let upper: Vec<f64> = axes.iter().map(|a| a.1).collect();
                Domain::bounded_box(&lower, &upper)
            }
            DomainSpec::Cell(periods) => Domain::periodic_cell(periods),
        }
    }

    pub fn dimension(&self) -> usize {
        match self {
            DomainSpec::Box(a) => a.len(),
            DomainSpec::Cell(p) => p.len(),
        }
    }

    pub fn is_periodic(&self) -> bool {
        matches!(self, DomainSpec::Cell(_))
    }
}

impl fmt::Display for DomainSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DomainSpec::Box(axes) if axes.len() == 1 => write!(f, "interval({}, {})", axes[0].0, axes[0].1),
            DomainSpec::Box(axes) => {
                let parts: Vec<String> = axes.iter().map(|(a, b)| format!("{a}, {b}")).collect();
                write!(f, "box({})", parts.join(", "))
            }
            DomainSpec::Cell(p) => {
                let parts: Vec<String> = p.iter().map(f64::to_string).collect();
                write!(f, "cell({})", parts.join(", "))
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ReactionSpec {
    Zero,
    /// `F = a u`
    Linear(CoefficientShape),
    /// `F = u (a − u)`
    Logistic(CoefficientShape),
}

impl fmt::Display for ReactionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ReactionSpec::Zero => write!(f, "zero"),
            ReactionSpec::Linear(a) => write!(f, "linear({a})"),
            ReactionSpec::Logistic(a) => write!(f, "logistic({a})"),
        }
    }
}

/// Initial data; `x` is the first coordinate and bumps vanish outside the box.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum InitialSpec {
    Const(f64),
    /// `cos(k x)`
    Cos(f64),
    /// `sin(k x)`
    Sin(f64),
    /// `Π ((x_i − a_i)(b_i − x_i))²`
    PolyBump,
    /// `Π sin(π (x_i − a_i)/(b_i − a_i))`
    SineBump,
}

impl InitialSpec {
    /// Evaluator on `domain`; bumps use the box corners (cell: `[0, p]`).
    pub fn evaluator(&self, domain: &DomainSpec) -> impl Fn(&[f64]) -> f64 + Sync {
        let axes: Vec<(f64, f64)> = match domain {
            DomainSpec::Box(a) => a.clone(),
            DomainSpec::Cell(p) => p.iter().map(|&p| (0.0, p)).collect(),
        };
        let spec = *self;
        move |x: &[f64]| {
            let inside = x.iter().zip(&axes).all(|(&v, &(a, b))| v >= a && v <= b);
            match spec {
                InitialSpec::Const(c) => c,
                InitialSpec::Cos(k) => (k * x[0]).cos(),
                InitialSpec::Sin(k) => (k * x[0]).sin(),
                InitialSpec::PolyBump if inside => x
                    .iter()
                    .zip(&axes)
                    .map(|(&v, &(a, b))| ((v - a) * (b - v)).powi(2))
                    .product(),
                InitialSpec::SineBump if inside => x
                    .iter()
                    .zip(&axes)
                    .map(|(&v, &(a, b))| (PI * (v - a) / (b - a)).sin().max(0.0))
                    .product(),
                _ => 0.0,
            }
        }
    }
}

impl fmt::Display for InitialSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InitialSpec::Const(c) => write!(f, "const({c})"),
            InitialSpec::Cos(k) => write!(f, "cos({k})"),
            InitialSpec::Sin(k) => write!(f, "sin({k})"),
            InitialSpec::PolyBump => write!(f, "poly-bump"),
            InitialSpec::SineBump => write!(f, "sine-bump"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub bc: BoundaryCondition,
    pub kind: OperatorKind,
    pub kernel: KernelFamily,
    pub domain: DomainSpec,
    pub h: f64,
    pub dt: f64,
    /// period `T` of the coefficient or reaction
    pub period: f64,
    /// start time `s`
    pub start: f64,
    /// integration length for `simulate` and `converge-a`
    pub horizon: f64,
    pub delta: Option<f64>,
    pub deltas: Vec<f64>,
    pub coefficient: Option<CoefficientShape>,
    pub reaction: ReactionSpec,
    pub initial: Option<InitialSpec>,
    pub snapshots: usize,
    pub tol: f64,
    pub max_iters: usize,
    pub max_periods: usize,
    pub orbit_snapshots: usize,
    pub scheme: LinearScheme,
    pub solver: SolverKind,
    pub calibration: RateCalibration,
}

fn invalid(key: &str, message: impl Into<String>) -> CliError {
    CliError::Config {
        key: key.to_string(),
        message: message.into(),
    }
}

/// `2*pi/1024`, `-1.5`, `pi`, `1e-3`.
pub fn parse_number(text: &str) -> Result<f64, String> {
    let t = text.trim();
    if t.is_empty() {
        return Err("empty number".into());
    }
    let mut value = 1.0;
    let mut op = '*';
    let mut rest = t;
    loop {
        let cut = rest.find(['*', '/']);
        let token = cut.map_or(rest, |i| &rest[..i]).trim();
        let (sign, body) = match token.strip_prefix('-') {
            Some(b) => (-1.0, b.trim()),
            None => (1.0, token),
        };
        let v = if body == "pi" {
            PI
        } else {
            body.parse::<f64>().map_err(|_| format!("cannot parse number '{t}'"))?
        };
        let v = sign * v;
        value = if op == '*' { value * v } else { value / v };
        match cut {
            Some(i) => {
                op = rest.as_bytes()[i] as char;
                rest = &rest[i + 1..];
            }
            None => break,
        }
    }
    if !value.is_finite() {
        return Err(format!("number '{t}' is not finite"));
    }
    Ok(value)
}

fn parse_list(text: &str) -> Result<Vec<f64>, String> {
    text.split(',').map(parse_number).collect()
}

/// Splits `name(a, b)` into `("name", Some("a, b"))`; bare names give `None`.
fn call(text: &str) -> Result<(&str, Option<&str>), String> {
    let t = text.trim();
    match t.find('(') {
        None => Ok((t, None)),
        Some(i) => {
            let inner = t[i + 1..]
                .strip_suffix(')')
                .ok_or_else(|| format!("unbalanced parentheses in '{t}'"))?;
            Ok((t[..i].trim(), Some(inner)))
        }
    }
}

fn args(name: &str, inner: Option<&str>, count: usize) -> Result<Vec<f64>, String> {
    let list = match inner {
        Some(s) if !s.trim().is_empty() => parse_list(s)?,
        _ => Vec::new(),
    };
    if list.len() != count {
        return Err(format!("{name} takes {count} argument(s), got {}", list.len()));
    }
    Ok(list)
}

pub fn parse_shape(text: &str) -> Result<CoefficientShape, String> {
    let (name, inner) = call(text)?;
    Ok(match name {
        "const" => CoefficientShape::Const(args(name, inner, 1)?[0]),
        "time-sine" => {
            let a = args(name, inner, 2)?;
            CoefficientShape::TimeSine { c0: a[0], c1: a[1] }
        }
        "space-cosine" => {
            let a = args(name, inner, 3)?;
            CoefficientShape::SpaceCosine { c0: a[0], c1: a[1], k: a[2] }
        }
        "tx-product" => {
            let a = args(name, inner, 3)?;
            CoefficientShape::TxProduct { c0: a[0], c1: a[1], k: a[2] }
        }
        other => {
            return Err(format!(
                "unknown coefficient '{other}' (expected const, time-sine, space-cosine, tx-product)"
            ))
        }
    })
}

pub fn parse_reaction(text: &str) -> Result<ReactionSpec, String> {
    let (name, inner) = call(text)?;
    let shape = || parse_shape(inner.ok_or_else(|| format!("{name} needs a coefficient argument"))?);
    Ok(match name {
        "zero" if inner.is_none() => ReactionSpec::Zero,
        "linear" => ReactionSpec::Linear(shape()?),
        "logistic" => ReactionSpec::Logistic(shape()?),
        other => return Err(format!("unknown reaction '{other}' (expected zero, linear, logistic)")),
    })
}

pub fn parse_initial(text: &str) -> Result<InitialSpec, String> {
    let (name, inner) = call(text)?;
    Ok(match name {
        "const" => InitialSpec::Const(args(name, inner, 1)?[0]),
        "cos" => InitialSpec::Cos(args(name, inner, 1)?[0]),
        "sin" => InitialSpec::Sin(args(name, inner, 1)?[0]),
        "poly-bump" => {
            args(name, inner, 0)?;
            InitialSpec::PolyBump
        }
        "sine-bump" => {
            args(name, inner, 0)?;
            InitialSpec::SineBump
        }
        other => {
            return Err(format!(
                "unknown initial data '{other}' (expected const, cos, sin, poly-bump, sine-bump)"
            ))
        }
    })
}

pub fn parse_domain(text: &str) -> Result<DomainSpec, String> {
    let (name, inner) = call(text)?;
    let list = parse_list(inner.ok_or_else(|| format!("{name} needs arguments"))?)?;
    match name {
        "interval" if list.len() == 2 => Ok(DomainSpec::Box(vec![(list[0], list[1])])),
        "box" if list.len() == 2 || list.len() == 4 => {
            Ok(DomainSpec::Box(list.chunks(2).map(|c| (c[0], c[1])).collect()))
        }
        "cell" if list.len() == 1 || list.len() == 2 => Ok(DomainSpec::Cell(list)),
        _ => Err(format!(
            "unsupported domain '{}' (expected interval(a, b), box(a1, b1[, a2, b2]), cell(p1[, p2]))",
            text.trim()
        )),
    }
}

const KEYS: &[&str] = &[
    "experiment",
    "bc",
    "kind",
    "kernel",
    "domain",
    "h",
    "dt",
    "T",
    "s",
    "horizon",
    "delta",
    "deltas",
    "coefficient",
    "reaction",
    "initial",
    "snapshots",
    "tol",
    "max_iters",
    "max_periods",
    "orbit_snapshots",
    "scheme",
    "solver",
    "calibration",
];

/// Raw `key = value` pairs, rejecting unknown and duplicate keys.
pub fn parse_pairs(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            invalid("<syntax>", format!("line {}: expected 'key = value', got '{line}'", lineno + 1))
        })?;
        let key = key.trim();
        if !KEYS.contains(&key) {
            return Err(invalid(key, format!("unknown key on line {}", lineno + 1)));
        }
        if map.insert(key.to_string(), value.trim().to_string()).is_some() {
            return Err(invalid(key, "key given more than once"));
        }
    }
    Ok(map)
}

struct Pairs(BTreeMap<String, String>);

impl Pairs {
    fn get(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    fn required(&self, key: &str) -> Result<&str, CliError> {
        self.get(key).ok_or_else(|| invalid(key, "missing required key"))
    }

    fn with<T>(&self, key: &str, parse: impl Fn(&str) -> Result<T, String>) -> Result<Option<T>, CliError> {
        self.get(key).map(|v| parse(v).map_err(|m| invalid(key, m))).transpose()
    }

    fn positive(&self, key: &str) -> Result<Option<f64>, CliError> {
        let v = self.with(key, parse_number)?;
        if let Some(x) = v {
            if !(x > 0.0) {
                return Err(invalid(key, format!("must be positive, got {x}")));
            }
        }
        Ok(v)
    }

    fn count(&self, key: &str) -> Result<Option<usize>, CliError> {
        let v = self.with(key, |s| s.trim().parse::<usize>().map_err(|_| format!("expected a positive integer, got '{s}'")))?;
        if v == Some(0) {
            return Err(invalid(key, "must be positive"));
        }
        Ok(v)
    }
}

fn parse_bc(s: &str) -> Result<BoundaryCondition, String> {
    s.trim().parse::<BoundaryCondition>().map_err(|e| e.to_string())
}

fn parse_kind(s: &str) -> Result<OperatorKind, String> {
    match s.trim() {
        "local" => Ok(OperatorKind::Local),
        "nonlocal" => Ok(OperatorKind::Nonlocal),
        other => Err(format!("unknown operator kind '{other}' (expected local, nonlocal)")),
    }
}

fn kind_name(k: OperatorKind) -> &'static str {
    match k {
        OperatorKind::Local => "local",
        OperatorKind::Nonlocal => "nonlocal",
    }
}

fn parse_scheme(s: &str) -> Result<LinearScheme, String> {
    match s.trim() {
        "backward-euler" => Ok(LinearScheme::BackwardEuler),
        "trapezoidal" => Ok(LinearScheme::Trapezoidal),
        other => Err(format!("unknown scheme '{other}' (expected backward-euler, trapezoidal)")),
    }
}

fn scheme_name(s: LinearScheme) -> &'static str {
    match s {
        LinearScheme::BackwardEuler => "backward-euler",
        LinearScheme::Trapezoidal => "trapezoidal",
    }
}

fn parse_solver(s: &str) -> Result<SolverKind, String> {
    match s.trim() {
        "auto" => Ok(SolverKind::Auto),
        "banded" => Ok(SolverKind::Banded),
        "cg" => Ok(SolverKind::ConjugateGradient),
        other => Err(format!("unknown solver '{other}' (expected auto, banded, cg)")),
    }
}

fn solver_name(s: SolverKind) -> &'static str {
    match s {
        SolverKind::Auto => "auto",
        SolverKind::Banded => "banded",
        SolverKind::ConjugateGradient => "cg",
    }
}

fn parse_calibration(s: &str) -> Result<RateCalibration, String> {
    match s.trim() {
        "lattice" => Ok(RateCalibration::Lattice),
        "continuum" => Ok(RateCalibration::Continuum),
        other => Err(format!("unknown calibration '{other}' (expected lattice, continuum)")),
    }
}

fn calibration_name(c: RateCalibration) -> &'static str {
    match c {
        RateCalibration::Lattice => "lattice",
        RateCalibration::Continuum => "continuum",
    }
}

impl ExperimentConfig {
    /// Parses and validates a config for the experiment named on the command line.
    pub fn parse(text: &str, experiment: Experiment) -> Result<Self, CliError> {
        let p = Pairs(parse_pairs(text)?);
        if let Some(named) = p.with("experiment", |s| s.trim().parse::<Experiment>())? {
            if named != experiment {
                return Err(invalid(
                    "experiment",
                    format!("config is for '{}' but '{}' was requested", named.name(), experiment.name()),
                ));
            }
        }
        let bc = p.with("bc", parse_bc)?.ok_or_else(|| invalid("bc", "missing required key"))?;
        let domain = parse_domain(p.required("domain")?).map_err(|m| invalid("domain", m))?;
        let h = p.positive("h")?.ok_or_else(|| invalid("h", "missing required key"))?;
        let dt = p.positive("dt")?.ok_or_else(|| invalid("dt", "missing required key"))?;
        let period = p.positive("T")?.unwrap_or(1.0);
        let start = p.with("s", parse_number)?.unwrap_or(0.0);
        let horizon = p.positive("horizon")?.unwrap_or(period);
        let kind = p.with("kind", parse_kind)?;
        let kernel = p
            .with("kernel", |s| s.trim().parse::<KernelFamily>().map_err(|e| e.to_string()))?
            .unwrap_or(KernelFamily::QuarticPolynomial);
        let delta = p.positive("delta")?;
        let deltas = p.with("deltas", parse_list)?.unwrap_or_default();
        let coefficient = p.with("coefficient", parse_shape)?;
        let reaction = p.with("reaction", parse_reaction)?.unwrap_or(ReactionSpec::Zero);
        let initial = p.with("initial", parse_initial)?;

        let sweep = experiment.is_sweep();
        let default_snapshots = if experiment == Experiment::ConvergeA { 10 } else { 1 };
        let cfg = ExperimentConfig {
            experiment,
            bc,
            kind: match (sweep, kind) {
                (false, None) => return Err(invalid("kind", "missing required key (local or nonlocal)")),
                (_, k) => k.unwrap_or(OperatorKind::Nonlocal),
            },
            kernel,
            domain,
            h,
            dt,
            period,
            start,
            horizon,
            delta,
            deltas,
            coefficient,
            reaction,
            initial,
            snapshots: p.count("snapshots")?.unwrap_or(default_snapshots),
            tol: p.positive("tol")?.unwrap_or(match experiment {
                Experiment::KppOrbit | Experiment::ConvergeC => 1e-8,
                _ => 1e-9,
            }),
            max_iters: p.count("max_iters")?.unwrap_or(20_000),
            max_periods: p.count("max_periods")?.unwrap_or(2000),
            orbit_snapshots: p.count("orbit_snapshots")?.unwrap_or(32),
            scheme: p.with("scheme", parse_scheme)?.unwrap_or_default(),
            solver: p.with("solver", parse_solver)?.unwrap_or_default(),
            calibration: p.with("calibration", parse_calibration)?.unwrap_or_default(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        if self.domain.is_periodic() != (self.bc == BoundaryCondition::Periodic) {
            return Err(invalid("bc", format!("{} does not fit domain {}", self.bc.name(), self.domain)));
        }
        let sweep = self.experiment.is_sweep();
        if sweep {
            if self.deltas.is_empty() {
                return Err(invalid("deltas", "missing required key"));
            }
            if self.deltas.iter().any(|&d| !(d > 0.0)) {
                return Err(invalid("deltas", "must all be positive"));
            }
            if self.deltas.windows(2).any(|w| w[1] >= w[0]) {
                return Err(invalid("deltas", "must be strictly decreasing"));
            }
            let min = *self.deltas.last().unwrap();
            if self.h > min / 8.0 * (1.0 + 1e-12) {
                return Err(invalid(
                    "h",
                    format!("h = {} violates the rule h <= min(deltas)/8 = {}", self.h, min / 8.0),
                ));
            }
        } else if self.kind == OperatorKind::Nonlocal && self.delta.is_none() {
            return Err(invalid("delta", "missing required key for a nonlocal operator"));
        }
        match self.experiment {
            Experiment::Simulate | Experiment::ConvergeA => {
                if self.initial.is_none() {
                    return Err(invalid("initial", "missing required key"));
                }
            }
            Experiment::Spectrum | Experiment::ConvergeB => {
                if self.coefficient.is_none() {
                    return Err(invalid("coefficient", "missing required key"));
                }
            }
            Experiment::KppOrbit | Experiment::ConvergeC => {
                if !matches!(self.reaction, ReactionSpec::Logistic(_)) {
                    return Err(invalid("reaction", "KPP experiments need reaction = logistic(<coefficient>)"));
                }
            }
        }
        Ok(())
    }

    /// Re-parseable rendering of every resolved field.
    pub fn render(&self) -> String {
        let mut lines = vec![
            format!("experiment = {}", self.experiment.name()),
            format!("bc = {}", self.bc.name()),
            format!("kind = {}", kind_name(self.kind)),
            format!("kernel = {}", self.kernel.name()),
            format!("domain = {}", self.domain),
            format!("h = {}", self.h),
            format!("dt = {}", self.dt),
            format!("T = {}", self.period),
            format!("s = {}", self.start),
            format!("horizon = {}", self.horizon),
        ];
        if let Some(d) = self.delta {
            lines.push(format!("delta = {d}"));
        }
        if !self.deltas.is_empty() {
            let parts: Vec<String> = self.deltas.iter().map(f64::to_string).collect();
            lines.push(format!("deltas = {}", parts.join(", ")));
        }
        if let Some(c) = self.coefficient {
            lines.push(format!("coefficient = {c}"));
        }
        lines.push(format!("reaction = {}", self.reaction));
        if let Some(i) = self.initial {
            lines.push(format!("initial = {i}"));
        }
        lines.extend([
            format!("snapshots = {}", self.snapshots),
            format!("tol = {:e}", self.tol),
            format!("max_iters = {}", self.max_iters),
            format!("max_periods = {}", self.max_periods),
            format!("orbit_snapshots = {}", self.orbit_snapshots),
            format!("scheme = {}", scheme_name(self.scheme)),
            format!("solver = {}", solver_name(self.solver)),
            format!("calibration = {}", calibration_name(self.calibration)),
        ]);
        lines.join("\n") + "\n"
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_with_pi() {
        assert_eq!(parse_number("2*pi/1024").unwrap(), 2.0 * PI / 1024.0);
        assert_eq!(parse_number("pi").unwrap(), PI);
        assert_eq!(parse_number(" -1.5 ").unwrap(), -1.5);
        assert_eq!(parse_number("1e-3").unwrap(), 1e-3);
        assert_eq!(parse_number("-pi/2").unwrap(), -PI / 2.0);
        assert!(parse_number("two").is_err());
        assert!(parse_number("1/0").is_err());
    }

    #[test]
    fn catalog_round_trips() {
        for s in ["const(0.7)", "time-sine(1, 0.5)", "space-cosine(1, -0.5, 2)", "tx-product(1, 0.5, 1)"] {
            assert_eq!(parse_shape(s).unwrap().to_string(), s);
        }
        for s in ["zero", "linear(const(0.7))", "logistic(tx-product(1, 0.5, 1))"] {
            assert_eq!(parse_reaction(s).unwrap().to_string(), s);
        }
        for s in ["const(3)", "cos(3.5)", "sin(1)", "poly-bump", "sine-bump"] {
            assert_eq!(parse_initial(s).unwrap().to_string(), s);
        }
        for s in ["interval(0, 1)", "box(0, 1, -1, 1)", "cell(1, 2)"] {
            assert_eq!(parse_domain(s).unwrap().to_string(), s);
        }
    }

    #[test]
    fn catalog_rejects_unknown_names() {
        assert!(parse_shape("gauss(1)").is_err());
        assert!(parse_shape("const(1, 2)").is_err());
        assert!(parse_reaction("bistable(const(1))").is_err());
        assert!(parse_initial("tanh(1)").is_err());
        assert!(parse_domain("disk(1)").is_err());
    }

    #[test]
    fn bumps_vanish_outside() {
        let d = parse_domain("interval(0, 1)").unwrap();
        let f = InitialSpec::PolyBump.evaluator(&d);
        assert_eq!(f(&[0.5]), 0.0625);
        assert_eq!(f(&[-0.1]), 0.0);
        assert_eq!(f(&[1.0]), 0.0);
    }
}
