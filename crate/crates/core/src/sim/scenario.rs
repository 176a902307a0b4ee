//! Scenario description, validation and the canonical file form.

use crate::coordination::InterRobotParams;
use crate::geometry::{hull_distance, ConvexObstacle, Point};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("dim must be 2 or 3, got {0}")]
    BadDim(usize),
    #[error("coordinate list {0} has wrong length for dim")]
    BadCoords(String),
    #[error("parameter out of range: {0}")]
    BadParam(String),
    #[error("obstacle {index}: {message}")]
    BadObstacle { index: usize, message: String },
    #[error("scenario needs at least one robot")]
    NoRobots,
    #[error("robot {index}: {message}")]
    BadRobot { index: usize, message: String },
    #[error("robots {a} and {b} start only {dist:.3} m apart (r_min = {r_min})")]
    StartsTooClose { a: usize, b: usize, dist: f64, r_min: f64 },
}

/// All planner parameters, with the defaults used across the bundled maps.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct Params {
    /// Minimum inter-robot center distance, m.
    pub r_min: f64,
    /// Robot radius for obstacle clearance, m.
    pub r_a: f64,
    pub v_max: f64,
    pub a_max: f64,
    /// Sampling step, s.
    pub h: f64,
    /// Horizon length K.
    pub horizon: usize,
    /// Facet count of the 2D norm-ball linearizations.
    pub facets: usize,
    /// Smoothness weight on consecutive planned positions.
    pub q_step: f64,
    /// Terminal attraction weight.
    pub q_terminal: f64,
    /// Warning-band width, m.
    pub epsilon: f64,
    /// Band-history smoothing factor, in (0, 1).
    pub beta: f64,
    /// Base band penalty weight.
    pub rho0: f64,
    /// Right-hand-rule escalation step.
    pub delta_eta: f64,
    /// Position tolerance of the terminal-overlap test, m.
    pub tol_pos: f64,
    /// Diagonal of the inter-robot scaling E (ellipsoid mode).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ellipsoid: Option<Vec<f64>>,
}

impl Default for Params {
    fn default() -> Self {
        Self {
            r_min: 0.6,
            r_a: 0.3,
            v_max: 3.0,
            a_max: 2.0,
            h: 0.2,
            horizon: 12,
            facets: 16,
            q_step: 1.0,
            q_terminal: 10.0,
            epsilon: 0.12,
            beta: 0.3,
            rho0: 10.0,
            delta_eta: 0.5,
            tol_pos: 1e-3,
            ellipsoid: None,
        }
    }
}

impl Params {
    pub fn inter(&self) -> InterRobotParams {
        InterRobotParams {
            r_min: self.r_min,
            epsilon: self.epsilon,
            beta: self.beta,
            rho0: self.rho0,
            delta_eta: self.delta_eta,
        }
    }

    pub fn r_min_ext(&self) -> f64 {
        self.inter().r_min_ext(self.h, self.v_max)
    }

    /// Obstacle consideration limit. Planned positions stay within one
    /// horizon of travel (`K·h·v_max`) of the anchor, which itself is at
    /// most one step from the filter's reference point; obstacles beyond
    /// that plus the clearance radius can never matter this round.
    pub fn horizon_reach(&self) -> f64 {
        (self.horizon as f64 + 1.0) * self.h * self.v_max + self.plan_clearance() + 0.1
    }

    /// Obstacle clearance used for planning. The corridor certifies the
    /// chords between planned positions, but the executed inter-sample
    /// motion is a quadratic arc that can sag up to `a_max·h²/8` off the
    /// chord, so planning inflates the robot radius by that bound.
    pub fn plan_clearance(&self) -> f64 {
        self.r_a + self.a_max * self.h * self.h / 8.0
    }

    /// Sampled-time separation used for planning. On top of the
    /// constant-velocity bound `sqrt(r_min² + h²·v_max²)`, relative
    /// acceleration bends the executed inter-sample arc by up to
    /// `2·a_max·h²/8`, which is folded into the minimum distance.
    pub fn plan_separation(&self) -> f64 {
        let r = self.r_min + self.a_max * self.h * self.h / 4.0;
        (r * r + self.h * self.h * self.v_max * self.v_max).sqrt()
    }

    fn validate(&self, dim: usize) -> Result<(), ScenarioError> {
        let positive: [(&str, f64); 10] = [
            ("r_min", self.r_min),
            ("r_a", self.r_a),
            ("v_max", self.v_max),
            ("a_max", self.a_max),
            ("h", self.h),
            ("q_terminal", self.q_terminal),
            ("epsilon", self.epsilon),
            ("rho0", self.rho0),
            ("delta_eta", self.delta_eta),
            ("tol_pos", self.tol_pos),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(ScenarioError::BadParam(format!("{name} must be positive, got {v}")));
            }
        }
        if self.q_step < 0.0 {
            return Err(ScenarioError::BadParam("q_step must be nonnegative".into()));
        }
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return Err(ScenarioError::BadParam(format!("beta must be in (0,1), got {}", self.beta)));
        }
        if self.horizon < 2 {
            return Err(ScenarioError::BadParam("horizon must be at least 2".into()));
        }
        if dim == 2 && self.facets < 3 {
            return Err(ScenarioError::BadParam("facets must be at least 3".into()));
        }
        if let Some(e) = &self.ellipsoid {
            if e.len() != dim {
                return Err(ScenarioError::BadParam(format!(
                    "ellipsoid needs {dim} entries, got {}",
                    e.len()
                )));
            }
            if e.iter().any(|&v| !(v > 0.0)) {
                return Err(ScenarioError::BadParam("ellipsoid entries must be positive".into()));
            }
        }
        Ok(())
    }
}

/// Raw scenario document: what scenario files contain, and the canonical
/// serialization target.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub name: String,
    pub dim: usize,
    pub time_cap: f64,
    #[serde(default)]
    pub params: Params,
    #[serde(default, rename = "obstacle")]
    pub obstacles: Vec<ObstacleSpec>,
    #[serde(rename = "robot")]
    pub robots: Vec<RobotSpec>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ObstacleSpec {
    pub vertices: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RobotSpec {
    pub start: Vec<f64>,
    pub target: Vec<f64>,
}

/// A validated scenario in `D` dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario<const D: usize> {
    pub name: String,
    pub time_cap: f64,
    pub params: Params,
    pub obstacles: Vec<ConvexObstacle<D>>,
    /// Per robot `(start, target)`.
    pub robots: Vec<(Point<D>, Point<D>)>,
}

impl<const D: usize> Scenario<D> {
    pub fn new(
        name: impl Into<String>,
        time_cap: f64,
        params: Params,
        obstacles: Vec<ConvexObstacle<D>>,
        robots: Vec<(Point<D>, Point<D>)>,
    ) -> Result<Self, ScenarioError> {
        let sc = Self { name: name.into(), time_cap, params, obstacles, robots };
        sc.validate()?;
        Ok(sc)
    }

    fn validate(&self) -> Result<(), ScenarioError> {
        self.params.validate(D)?;
        if !(self.time_cap > 0.0) {
            return Err(ScenarioError::BadParam("time_cap must be positive".into()));
        }
        if self.robots.is_empty() {
            return Err(ScenarioError::NoRobots);
        }
        for (i, (start, target)) in self.robots.iter().enumerate() {
            for (what, p) in [("start", start), ("target", target)] {
                let clear = self
                    .obstacles
                    .iter()
                    .map(|o| hull_distance(std::slice::from_ref(p), o.vertices()))
                    .fold(f64::INFINITY, f64::min);
                if clear < self.params.r_a {
                    return Err(ScenarioError::BadRobot {
                        index: i,
                        message: format!("{what} has clearance {clear:.3} < r_a"),
                    });
                }
            }
        }
        for a in 0..self.robots.len() {
            for b in (a + 1)..self.robots.len() {
                let dist = (self.robots[a].0 - self.robots[b].0).norm();
                if dist < self.params.r_min {
                    return Err(ScenarioError::StartsTooClose {
                        a,
                        b,
                        dist,
                        r_min: self.params.r_min,
                    });
                }
            }
        }
        Ok(())
    }

    pub fn to_file_form(&self) -> ScenarioFile {
        ScenarioFile {
            name: self.name.clone(),
            dim: D,
            time_cap: self.time_cap,
            params: self.params.clone(),
            obstacles: self
                .obstacles
                .iter()
                .map(|o| ObstacleSpec {
                    vertices: o.vertices().iter().map(|v| v.as_slice().to_vec()).collect(),
                })
                .collect(),
            robots: self
                .robots
                .iter()
                .map(|(s, t)| RobotSpec {
                    start: s.as_slice().to_vec(),
                    target: t.as_slice().to_vec(),
                })
                .collect(),
        }
    }
}

/// Dimension-erased scenario, the unit the CLI and logs work with.
#[derive(Debug, Clone, PartialEq)]
pub enum AnyScenario {
    D2(Scenario<2>),
    D3(Scenario<3>),
}

impl AnyScenario {
    pub fn name(&self) -> &str {
        match self {
            AnyScenario::D2(s) => &s.name,
            AnyScenario::D3(s) => &s.name,
        }
    }

    pub fn to_file_form(&self) -> ScenarioFile {
        match self {
            AnyScenario::D2(s) => s.to_file_form(),
            AnyScenario::D3(s) => s.to_file_form(),
        }
    }

    pub fn from_file_form(raw: &ScenarioFile) -> Result<Self, ScenarioError> {
        match raw.dim {
            2 => Ok(AnyScenario::D2(typed_scenario::<2>(raw)?)),
            3 => Ok(AnyScenario::D3(typed_scenario::<3>(raw)?)),
            d => Err(ScenarioError::BadDim(d)),
        }
    }
}

fn parse_point<const D: usize>(coords: &[f64], what: &str) -> Result<Point<D>, ScenarioError> {
    if coords.len() != D || coords.iter().any(|c| !c.is_finite()) {
        return Err(ScenarioError::BadCoords(format!("{what}: {coords:?}")));
    }
    Ok(Point::from_column_slice(coords))
}

fn typed_scenario<const D: usize>(raw: &ScenarioFile) -> Result<Scenario<D>, ScenarioError> {
    let mut obstacles = Vec::with_capacity(raw.obstacles.len());
    for (index, spec) in raw.obstacles.iter().enumerate() {
        let mut pts = Vec::with_capacity(spec.vertices.len());
        for v in &spec.vertices {
            pts.push(parse_point::<D>(v, &format!("obstacle {index} vertex"))?);
        }
        obstacles.push(ConvexObstacle::new(pts).map_err(|e| ScenarioError::BadObstacle {
            index,
            message: e.to_string(),
        })?);
    }
    let mut robots = Vec::with_capacity(raw.robots.len());
    for (i, r) in raw.robots.iter().enumerate() {
        robots.push((
            parse_point::<D>(&r.start, &format!("robot {i} start"))?,
            parse_point::<D>(&r.target, &format!("robot {i} target"))?,
        ));
    }
    Scenario::new(raw.name.clone(), raw.time_cap, raw.params.clone(), obstacles, robots)
}
