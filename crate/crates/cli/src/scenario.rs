//! Scenario files: a versioned JSON schema, parsed strictly and then
//! range-checked. Every problem is reported with the path of the field.

use std::fmt;
use std::path::PathBuf;

use serde::Deserialize;

pub const SCHEMA: u32 = 1;

#[derive(Clone, Debug)]
pub struct Scenario {
    pub schema: u32,
    pub name: String,
    pub source: Source,
    pub seed: Option<u64>,
    pub analyses: Vec<Analysis>,
    pub output: Option<PathBuf>,
}

/// Analyses stay raw until their `op` is known, so that type errors inside
/// an analysis can name the field.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    schema: u32,
    name: String,
    source: RawSource,
    #[serde(default)]
    seed: Option<u64>,
    analyses: Vec<serde_json::Value>,
    #[serde(default)]
    output: Option<PathBuf>,
}

/// `{"generator": name, ...}` or `{"map": name, ...}`.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSource {
    #[serde(default)]
    generator: Option<Generator>,
    #[serde(default)]
    map: Option<MapName>,
    resolution: u32,
    #[serde(default)]
    slope: Option<f64>,
    #[serde(default)]
    depth: Option<u32>,
}

#[derive(Clone, Debug)]
pub enum Source {
    Generator {
        name: Generator,
        resolution: u32,
        slope: Option<f64>,
        depth: Option<u32>,
    },
    Map {
        name: MapName,
        resolution: u32,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Generator {
    Horizontal,
    Vertical,
    Sheared,
    HorizontalSegment,
    Cocarc,
    SinOneOverX,
    CantorSquare,
    Backgammon,
    AnomalousStableSet,
}

impl Generator {
    pub fn graphlike(self) -> bool {
        matches!(self, Generator::HorizontalSegment | Generator::Cocarc | Generator::SinOneOverX | Generator::CantorSquare)
    }

    /// Generators that produce a single decomposition of a disc.
    pub fn has_field(self) -> bool {
        self.graphlike() || matches!(self, Generator::Horizontal | Generator::Vertical | Generator::Sheared)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MapName {
    Torus,
    Sphere,
    Identity,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Dir {
    Stable,
    Unstable,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum Analysis {
    /// Quotient graph of the generated decomposition.
    Quotient,
    /// cw-decomposition check against the generated disc.
    Cw,
    /// Flow decomposition summary (graph-like generators).
    Flow,
    Semicontinuity { point: (f64, f64), resolutions: Vec<u32> },
    /// Label or mask raster of the source.
    Render,
    /// Components of the source set in a ball, optionally without the baseline row.
    LocalComponents { center: (f64, f64), radius: f64, #[serde(default)] exclude_baseline: bool },
    /// Leaf of the two-chart backgammon atlas against its V-plaques.
    BackgammonLeaf { samples: usize },
    Plaque { base: (f64, f64), delta: f64, horizon: usize, direction: Dir },
    Cwn { delta: f64, horizon: usize, samples: usize },
    Expansivity { horizon: usize, samples: usize },
    Cantor { eps: f64, levels: usize, horizon: usize },
    StableAtlas { delta: f64, horizon: usize, scale: f64, samples: usize },
}

impl Analysis {
    pub fn op(&self) -> &'static str {
        match self {
            Analysis::Quotient => "quotient",
            Analysis::Cw => "cw",
            Analysis::Flow => "flow",
            Analysis::Semicontinuity { .. } => "semicontinuity",
            Analysis::Render => "render",
            Analysis::LocalComponents { .. } => "local-components",
            Analysis::BackgammonLeaf { .. } => "backgammon-leaf",
            Analysis::Plaque { .. } => "plaque",
            Analysis::Cwn { .. } => "cwn",
            Analysis::Expansivity { .. } => "expansivity",
            Analysis::Cantor { .. } => "cantor",
            Analysis::StableAtlas { .. } => "stable-atlas",
        }
    }

    fn samples(&self) -> bool {
        matches!(
            self,
            Analysis::BackgammonLeaf { .. } | Analysis::Cwn { .. } | Analysis::Expansivity { .. } | Analysis::Cantor { .. } | Analysis::StableAtlas { .. }
        )
    }
}

#[derive(Debug)]
pub struct Invalid {
    pub field: String,
    pub message: String,
}

impl fmt::Display for Invalid {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

pub const RESOLUTIONS: (u32, u32) = (8, 2048);

fn invalid(field: impl Into<String>, message: impl Into<String>) -> Vec<Invalid> {
    vec![Invalid { field: field.into(), message: message.into() }]
}

fn path_error(prefix: &str, e: serde_path_to_error::Error<serde_json::Error>) -> Vec<Invalid> {
    let path = e.path().to_string();
    let field = match (prefix, path.as_str()) {
        ("", ".") => "scenario".to_string(),
        (p, ".") => p.to_string(),
        ("", q) => q.to_string(),
        (p, q) => format!("{p}.{q}"),
    };
    invalid(field, e.into_inner().to_string())
}

pub fn parse(text: &str) -> Result<Scenario, Vec<Invalid>> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| {
        invalid("scenario", format!("{} (line {}, column {})", strip_position(&e.to_string()), e.line(), e.column()))
    })?;
    let raw: RawScenario = serde_path_to_error::deserialize(value).map_err(|e| path_error("", e))?;
    let src = raw.source;
    let source = match (src.generator, src.map) {
        (Some(name), None) => Source::Generator { name, resolution: src.resolution, slope: src.slope, depth: src.depth },
        (None, Some(name)) => {
            if src.slope.is_some() || src.depth.is_some() {
                return Err(invalid(if src.slope.is_some() { "source.slope" } else { "source.depth" }, "maps take no generator parameters"));
            }
            Source::Map { name, resolution: src.resolution }
        }
        _ => return Err(invalid("source", "exactly one of `generator` or `map` is required")),
    };
    let mut analyses = Vec::new();
    for (i, v) in raw.analyses.into_iter().enumerate() {
        let at = format!("analyses[{i}]");
        let serde_json::Value::Object(mut map) = v else { return Err(invalid(at, "expected an object")) };
        let op = match map.remove("op") {
            Some(serde_json::Value::String(op)) => op,
            Some(_) => return Err(invalid(format!("{at}.op"), "expected a string")),
            None => return Err(invalid(format!("{at}.op"), "missing field")),
        };
        // externally tagged form: `"quotient"` or `{"cwn": {...}}`
        let tagged = if map.is_empty() {
            serde_json::Value::String(op.clone())
        } else {
            serde_json::Value::Object([(op.clone(), serde_json::Value::Object(map))].into_iter().collect())
        };
        let a: Analysis = serde_path_to_error::deserialize(tagged).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner().to_string();
            match path.split_once('.').filter(|(_, rest)| !rest.is_empty()) {
                Some((_, rest)) => invalid(format!("{at}.{rest}"), inner),
                None if inner.starts_with("unknown variant") => invalid(format!("{at}.op"), inner),
                None => invalid(at.clone(), inner),
            }
        })?;
        analyses.push(a);
    }
    let scenario = Scenario { schema: raw.schema, name: raw.name, source, seed: raw.seed, analyses, output: raw.output };
    let problems = check(&scenario);
    if problems.is_empty() {
        Ok(scenario)
    } else {
        Err(problems)
    }
}

fn strip_position(msg: &str) -> &str {
    msg.find(" at line ").map_or(msg, |i| &msg[..i])
}

fn check(s: &Scenario) -> Vec<Invalid> {
    let mut out = Vec::new();
    let mut bad = |field: String, message: &str| out.push(Invalid { field, message: message.to_string() });
    if s.schema != SCHEMA {
        bad("schema".into(), &format!("unsupported schema version {} (expected {SCHEMA})", s.schema));
    }
    if s.name.is_empty() || !s.name.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_') {
        bad("name".into(), "must be non-empty and use only letters, digits, '-' and '_'");
    }
    let in_range = |r: u32| (RESOLUTIONS.0..=RESOLUTIONS.1).contains(&r);
    let resolution_msg = format!("must be in {}..={}", RESOLUTIONS.0, RESOLUTIONS.1);
    let (generator, map) = match &s.source {
        Source::Generator { name, resolution, slope, depth } => {
            if !in_range(*resolution) {
                bad("source.resolution".into(), &resolution_msg);
            }
            match (name, slope) {
                (Generator::Sheared, Some(k)) if !(0.0..=1.0).contains(k) => bad("source.slope".into(), "must be within [0, 1]"),
                (Generator::Sheared, _) => {}
                (_, Some(_)) => bad("source.slope".into(), "only the sheared generator takes a slope"),
                _ => {}
            }
            match (name, depth) {
                (Generator::Backgammon, Some(d)) if !(1..=8).contains(d) => bad("source.depth".into(), "must be in 1..=8"),
                (Generator::Backgammon, _) => {}
                (_, Some(_)) => bad("source.depth".into(), "only the backgammon generator takes a depth"),
                _ => {}
            }
            (Some(*name), None)
        }
        Source::Map { name, resolution } => {
            if !in_range(*resolution) || resolution % 2 != 0 {
                bad("source.resolution".into(), &format!("{resolution_msg} and even"));
            }
            (None, Some(*name))
        }
    };
    if s.analyses.is_empty() {
        bad("analyses".into(), "at least one analysis is required");
    }
    let delta_ok = |d: f64| d.is_finite() && d > 0.0 && d <= 0.5;
    for (i, a) in s.analyses.iter().enumerate() {
        let f = |name: &str| format!("analyses[{i}].{name}");
        if a.samples() && s.seed.is_none() {
            bad("seed".into(), &format!("required by analyses[{i}] ({})", a.op()));
        }
        let needs_field = matches!(a, Analysis::Quotient | Analysis::Cw | Analysis::Semicontinuity { .. });
        let needs_map = matches!(
            a,
            Analysis::Plaque { .. } | Analysis::Cwn { .. } | Analysis::Expansivity { .. } | Analysis::Cantor { .. } | Analysis::StableAtlas { .. }
        );
        if needs_field && !generator.is_some_and(Generator::has_field) {
            bad(f("op"), &format!("{} needs a decomposition generator", a.op()));
        }
        if needs_map && map.is_none() {
            bad(f("op"), &format!("{} needs a map source", a.op()));
        }
        match a {
            Analysis::Flow if !generator.is_some_and(Generator::graphlike) => bad(f("op"), "flow needs a graph-like generator"),
            Analysis::Render if map.is_some() => bad(f("op"), "render needs a generator source"),
            Analysis::BackgammonLeaf { samples } => {
                if generator != Some(Generator::Backgammon) {
                    bad(f("op"), "backgammon-leaf needs the backgammon generator");
                }
                if !(1..=1000).contains(samples) {
                    bad(f("samples"), "must be in 1..=1000");
                }
            }
            Analysis::LocalComponents { radius, exclude_baseline, .. } => {
                if generator != Some(Generator::AnomalousStableSet) && *exclude_baseline {
                    bad(f("exclude_baseline"), "only the anomalous stable set has a baseline");
                }
                if generator.is_none() {
                    bad(f("op"), "local-components needs a generator source");
                }
                if !(radius.is_finite() && *radius > 0.0) {
                    bad(f("radius"), "must be positive");
                }
            }
            Analysis::Semicontinuity { point, resolutions } => {
                if !(point.0.is_finite() && point.1.is_finite()) {
                    bad(f("point"), "must be finite");
                }
                if resolutions.is_empty() {
                    bad(f("resolutions"), "must not be empty");
                }
                if resolutions.iter().any(|&r| !in_range(r)) {
                    bad(f("resolutions"), &resolution_msg);
                }
            }
            Analysis::Plaque { delta, horizon, .. } => {
                if !delta_ok(*delta) {
                    bad(f("delta"), "must be in (0, 0.5]");
                }
                if *horizon > 40 {
                    bad(f("horizon"), "must be at most 40");
                }
            }
            Analysis::Cwn { delta, horizon, samples } => {
                if !delta_ok(*delta) {
                    bad(f("delta"), "must be in (0, 0.5]");
                }
                if *horizon > 40 {
                    bad(f("horizon"), "must be at most 40");
                }
                if !(1..=10_000).contains(samples) {
                    bad(f("samples"), "must be in 1..=10000");
                }
            }
            Analysis::Expansivity { horizon, samples } => {
                if !(1..=40).contains(horizon) {
                    bad(f("horizon"), "must be in 1..=40");
                }
                if *samples > 100_000 {
                    bad(f("samples"), "must be at most 100000");
                }
            }
            Analysis::Cantor { eps, levels, horizon } => {
                if !delta_ok(*eps) {
                    bad(f("eps"), "must be in (0, 0.5]");
                }
                if *levels > 6 {
                    bad(f("levels"), "must be at most 6");
                }
                if !(1..=40).contains(horizon) {
                    bad(f("horizon"), "must be in 1..=40");
                }
            }
            Analysis::StableAtlas { delta, horizon, scale, samples } => {
                if !delta_ok(*delta) {
                    bad(f("delta"), "must be in (0, 0.5]");
                }
                if *horizon > 40 {
                    bad(f("horizon"), "must be at most 40");
                }
                if !(scale.is_finite() && *scale > 0.0 && scale <= delta) {
                    bad(f("scale"), "must be in (0, delta]");
                }
                if !(1..=100_000).contains(samples) {
                    bad(f("samples"), "must be in 1..=100000");
                }
            }
            _ => {}
        }
    }
    out
}
