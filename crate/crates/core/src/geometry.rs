//! Point configurations, distances, Δ-pair tests and family validation.
//!
//! A [`Configuration`] is either a planar point set (the origin is a point at
//! `(0, 0)`) or an abstract pointed metric space given by its distance matrix.
//! Everything downstream only ever asks for pairwise distances and distances
//! to the origin, so both modes share one code path through
//! [`DistanceTable`].

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Additive tolerance used by every closed comparison in the crate.
pub const EPS: f64 = 1e-5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("index {index} out of range for configuration of {len} points")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("sigma {0} outside [1/2, 1]")]
    SigmaOutOfRange(f64),
    #[error("configuration has no points")]
    Empty,
    #[error("non-finite coordinate or distance")]
    NonFinite,
    #[error("origin point must be (0, 0) in planar mode, found {0}")]
    OriginNotAtZero(Point2),
    #[error("distance matrix: {0}")]
    BadMatrix(String),
    #[error("malformed family tree: {0}")]
    MalformedTree(String),
    #[error("{0} labels given for {1} points")]
    LabelCount(usize, usize),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const ORIGIN: Point2 = Point2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn norm(self) -> f64 {
        (self.x * self.x + self.y * self.y).sqrt()
    }

    pub fn dist(self, other: Point2) -> f64 {
        (self - other).norm()
    }
}

impl From<[f64; 2]> for Point2 {
    fn from([x, y]: [f64; 2]) -> Self {
        Self { x, y }
    }
}

impl From<Point2> for [f64; 2] {
    fn from(p: Point2) -> Self {
        [p.x, p.y]
    }
}

impl Add for Point2 {
    type Output = Point2;
    fn add(self, o: Point2) -> Point2 {
        Point2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point2 {
    type Output = Point2;
    fn sub(self, o: Point2) -> Point2 {
        Point2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<Point2> for f64 {
    type Output = Point2;
    fn mul(self, p: Point2) -> Point2 {
        Point2::new(self * p.x, self * p.y)
    }
}

impl fmt::Display for Point2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// How pairwise distances are obtained.
#[derive(Clone, Debug, PartialEq)]
pub enum Geometry {
    Planar(Vec<Point2>),
    /// Symmetric, zero diagonal, triangle inequality up to [`EPS`].
    Metric(Vec<Vec<f64>>),
}

/// Parent → (child, child) relations describing membership in a generation
/// family. Indices refer to the owning configuration.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FamilyTree {
    pub edges: Vec<(usize, usize, usize)>,
}

impl FamilyTree {
    pub fn new(edges: Vec<(usize, usize, usize)>) -> Self {
        Self { edges }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Configuration {
    labels: Vec<String>,
    geometry: Geometry,
    sigma: f64,
    origin: usize,
    tree: Option<FamilyTree>,
}

impl Configuration {
    /// Planar configuration. The origin is the first point equal to `(0, 0)`;
    /// if there is none, one is prepended.
    pub fn planar(points: Vec<Point2>, sigma: f64) -> Result<Self, GeometryError> {
        let mut points = points;
        let origin = match points.iter().position(|p| *p == Point2::ORIGIN) {
            Some(i) => i,
            None => {
                points.insert(0, Point2::ORIGIN);
                0
            }
        };
        Self::planar_with_origin(points, sigma, origin)
    }

    pub fn planar_with_origin(
        points: Vec<Point2>,
        sigma: f64,
        origin: usize,
    ) -> Result<Self, GeometryError> {
        let labels = (0..points.len()).map(|i| format!("p{i}")).collect();
        let cfg = Self {
            labels,
            geometry: Geometry::Planar(points),
            sigma,
            origin,
            tree: None,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn metric(distances: Vec<Vec<f64>>, sigma: f64, origin: usize) -> Result<Self, GeometryError> {
        let labels = (0..distances.len()).map(|i| format!("p{i}")).collect();
        let cfg = Self {
            labels,
            geometry: Geometry::Metric(distances),
            sigma,
            origin,
            tree: None,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self, GeometryError> {
        if labels.len() != self.len() {
            return Err(GeometryError::LabelCount(labels.len(), self.len()));
        }
        self.labels = labels;
        Ok(self)
    }

    pub fn with_tree(mut self, tree: FamilyTree) -> Result<Self, GeometryError> {
        self.check_tree_shape(&tree)?;
        self.tree = Some(tree);
        Ok(self)
    }

    pub fn with_sigma(&self, sigma: f64) -> Result<Self, GeometryError> {
        let mut cfg = self.clone();
        cfg.sigma = sigma;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        if !(0.5..=1.0).contains(&self.sigma) {
            return Err(GeometryError::SigmaOutOfRange(self.sigma));
        }
        let n = self.len();
        if n == 0 {
            return Err(GeometryError::Empty);
        }
        if self.origin >= n {
            return Err(GeometryError::IndexOutOfRange { index: self.origin, len: n });
        }
        match &self.geometry {
            Geometry::Planar(pts) => {
                if pts.iter().any(|p| !p.x.is_finite() || !p.y.is_finite()) {
                    return Err(GeometryError::NonFinite);
                }
                if pts[self.origin] != Point2::ORIGIN {
                    return Err(GeometryError::OriginNotAtZero(pts[self.origin]));
                }
            }
            Geometry::Metric(d) => validate_matrix(d)?,
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        match &self.geometry {
            Geometry::Planar(p) => p.len(),
            Geometry::Metric(d) => d.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn origin(&self) -> usize {
        self.origin
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn geometry(&self) -> &Geometry {
        &self.geometry
    }

    pub fn tree(&self) -> Option<&FamilyTree> {
        self.tree.as_ref()
    }

    pub fn points(&self) -> Option<&[Point2]> {
        match &self.geometry {
            Geometry::Planar(p) => Some(p),
            Geometry::Metric(_) => None,
        }
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn distance(&self, i: usize, j: usize) -> Result<f64, GeometryError> {
        let n = self.len();
        for index in [i, j] {
            if index >= n {
                return Err(GeometryError::IndexOutOfRange { index, len: n });
            }
        }
        Ok(self.distance_unchecked(i, j))
    }

    fn distance_unchecked(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return 0.0;
        }
        match &self.geometry {
            Geometry::Planar(p) => p[i].dist(p[j]),
            Geometry::Metric(d) => d[i][j],
        }
    }

    /// Distance to the distinguished point O.
    pub fn norm(&self, i: usize) -> Result<f64, GeometryError> {
        self.distance(self.origin, i)
    }

    /// `(q1, q2) ∈ Δ_σ(parent, radius)` with closed balls relaxed by `EPS`.
    pub fn in_delta(&self, q1: usize, q2: usize, parent: usize, radius: f64) -> Result<bool, GeometryError> {
        let d1 = self.distance(q1, parent)?;
        let d2 = self.distance(q2, parent)?;
        let gap = self.distance(q1, q2)?;
        Ok(delta_relation(d1, d2, gap, self.sigma, radius))
    }

    /// True iff the configuration, grown along `tree` from the origin, is a
    /// member of the generation family: every parent's two children form a
    /// Δ-pair at radius 1, and every non-origin point is somebody's child.
    pub fn validate_family(&self, tree: &FamilyTree) -> Result<bool, GeometryError> {
        self.check_tree_shape(tree)?;
        let mut reached = vec![false; self.len()];
        reached[self.origin] = true;
        // edges are processed in generation order: parents must already be reached
        let mut pending: Vec<_> = tree.edges.clone();
        loop {
            let before = pending.len();
            let mut rest = Vec::new();
            for (p, c1, c2) in pending {
                if reached[p] {
                    if !self.in_delta(c1, c2, p, 1.0)? {
                        return Ok(false);
                    }
                    reached[c1] = true;
                    reached[c2] = true;
                } else {
                    rest.push((p, c1, c2));
                }
            }
            pending = rest;
            if pending.is_empty() {
                break;
            }
            if pending.len() == before {
                return Err(GeometryError::MalformedTree(
                    "some parents are not reachable from the origin".into(),
                ));
            }
        }
        Ok(reached.into_iter().all(|r| r))
    }

    fn check_tree_shape(&self, tree: &FamilyTree) -> Result<(), GeometryError> {
        let n = self.len();
        let mut seen_parent = vec![false; n];
        for &(p, c1, c2) in &tree.edges {
            for index in [p, c1, c2] {
                if index >= n {
                    return Err(GeometryError::IndexOutOfRange { index, len: n });
                }
            }
            if seen_parent[p] {
                return Err(GeometryError::MalformedTree(format!(
                    "parent {} has more than one pair of children",
                    self.labels[p]
                )));
            }
            seen_parent[p] = true;
        }
        Ok(())
    }

    /// Sub-configuration on the given indices (origin kept as a reference
    /// point but not necessarily part of the subset is not supported: the
    /// origin index must be in `indices`).
    pub fn subset(&self, indices: &[usize]) -> Result<Self, GeometryError> {
        let origin = indices
            .iter()
            .position(|&i| i == self.origin)
            .ok_or_else(|| GeometryError::MalformedTree("subset must keep the origin".into()))?;
        let n = self.len();
        if let Some(&index) = indices.iter().find(|&&i| i >= n) {
            return Err(GeometryError::IndexOutOfRange { index, len: n });
        }
        let geometry = match &self.geometry {
            Geometry::Planar(p) => Geometry::Planar(indices.iter().map(|&i| p[i]).collect()),
            Geometry::Metric(d) => Geometry::Metric(
                indices
                    .iter()
                    .map(|&i| indices.iter().map(|&j| d[i][j]).collect())
                    .collect(),
            ),
        };
        Ok(Self {
            labels: indices.iter().map(|&i| self.labels[i].clone()).collect(),
            geometry,
            sigma: self.sigma,
            origin,
            tree: None,
        })
    }

    /// Dilation about the origin by `lambda`.
    pub fn scaled(&self, lambda: f64) -> Self {
        let geometry = match &self.geometry {
            Geometry::Planar(p) => Geometry::Planar(p.iter().map(|&q| lambda * q).collect()),
            Geometry::Metric(d) => Geometry::Metric(
                d.iter().map(|row| row.iter().map(|v| lambda * v).collect()).collect(),
            ),
        };
        Self { geometry, tree: None, ..self.clone() }
    }

    /// The same configuration expressed as an explicit distance matrix.
    pub fn to_metric(&self) -> Self {
        let n = self.len();
        let d = (0..n)
            .map(|i| (0..n).map(|j| self.distance_unchecked(i, j)).collect())
            .collect();
        Self { geometry: Geometry::Metric(d), ..self.clone() }
    }

    pub fn table(&self) -> DistanceTable {
        let n = self.len();
        let mut dist = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                dist[i * n + j] = self.distance_unchecked(i, j);
            }
        }
        let norms = (0..n).map(|i| dist[self.origin * n + i]).collect();
        DistanceTable { n, norms, dist }
    }
}

fn validate_matrix(d: &[Vec<f64>]) -> Result<(), GeometryError> {
    let n = d.len();
    for (i, row) in d.iter().enumerate() {
        if row.len() != n {
            return Err(GeometryError::BadMatrix(format!("row {i} has {} entries, expected {n}", row.len())));
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(GeometryError::NonFinite);
        }
        if row[i] != 0.0 {
            return Err(GeometryError::BadMatrix(format!("nonzero diagonal at {i}")));
        }
    }
    for i in 0..n {
        for j in 0..n {
            if d[i][j] < 0.0 {
                return Err(GeometryError::BadMatrix(format!("negative entry at ({i}, {j})")));
            }
            if (d[i][j] - d[j][i]).abs() > EPS {
                return Err(GeometryError::BadMatrix(format!("asymmetric at ({i}, {j})")));
            }
            for k in 0..n {
                if d[i][k] > d[i][j] + d[j][k] + EPS {
                    return Err(GeometryError::BadMatrix(format!(
                        "triangle inequality fails for ({i}, {j}, {k})"
                    )));
                }
            }
        }
    }
    Ok(())
}

/// The Δ-pair relation on raw distances: both children within `radius` of
/// the parent and at least `2σ·radius` apart, each relaxed by `EPS`.
pub fn delta_relation(d1: f64, d2: f64, gap: f64, sigma: f64, radius: f64) -> bool {
    d1 <= radius + EPS && d2 <= radius + EPS && gap + EPS >= 2.0 * sigma * radius
}

/// Membership of an ordered pair in the reduced first-generation region,
/// each constraint relaxed by its Lipschitz slack (`slack/2` on coordinate
/// bounds, `√2·slack` on norm comparisons) plus `EPS`.
pub fn omega_membership(p1: Point2, p2: Point2, sigma: f64, slack: f64) -> bool {
    omega_membership_eps(p1, p2, sigma, slack, EPS)
}

pub fn omega_membership_eps(p1: Point2, p2: Point2, sigma: f64, slack: f64, eps: f64) -> bool {
    let le = |a: f64, b: f64, lip: f64| a <= b + lip + eps;
    let coord = slack / 2.0;
    let norm_slack = std::f64::consts::SQRT_2 * slack;
    p1.x.abs() <= coord + eps
        && le(0.0, p1.y, coord)
        && le(p1.y, 1.0, coord)
        && le(p2.norm(), p1.norm(), norm_slack)
        && le(2.0 * sigma, p1.dist(p2), norm_slack)
        && le(0.0, p2.x, coord)
}

/// Precomputed distances for fast repeated objective evaluation.
#[derive(Clone, Debug, PartialEq)]
pub struct DistanceTable {
    n: usize,
    norms: Vec<f64>,
    dist: Vec<f64>,
}

impl DistanceTable {
    /// Planar points measured from `(0, 0)`; the origin need not be listed.
    pub fn from_points(points: &[Point2]) -> Self {
        let n = points.len();
        let mut dist = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let d = points[i].dist(points[j]);
                dist[i * n + j] = d;
                dist[j * n + i] = d;
            }
        }
        Self { n, norms: points.iter().map(|p| p.norm()).collect(), dist }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn norm(&self, i: usize) -> f64 {
        self.norms[i]
    }

    #[inline]
    pub fn dist(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.n + j]
    }
}

// ---------------------------------------------------------------------------
// Configuration files

/// On-disk configuration: `sigma`, then either `points` or `distances`,
/// an `origin` index, optional `labels` and an optional `tree` mapping a
/// parent (label or index) to its two children.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub sigma: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<Point2>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distances: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub origin: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tree: Option<BTreeMap<String, [String; 2]>>,
}

#[derive(Debug, Error)]
pub enum ConfigFileError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("exactly one of `points` or `distances` must be given")]
    Geometry,
    #[error("unknown point `{0}` in tree")]
    UnknownLabel(String),
    #[error(transparent)]
    Invalid(#[from] GeometryError),
}

impl ConfigFile {
    pub fn into_configuration(self) -> Result<Configuration, ConfigFileError> {
        let mut cfg = match (self.points, self.distances) {
            (Some(p), None) => Configuration::planar_with_origin(p, self.sigma, self.origin)?,
            (None, Some(d)) => Configuration::metric(d, self.sigma, self.origin)?,
            _ => return Err(ConfigFileError::Geometry),
        };
        if let Some(labels) = self.labels {
            cfg = cfg.with_labels(labels)?;
        }
        if let Some(tree) = self.tree {
            let resolve = |key: &str| -> Result<usize, ConfigFileError> {
                cfg.index_of(key)
                    .or_else(|| key.parse::<usize>().ok().filter(|&i| i < cfg.len()))
                    .ok_or_else(|| ConfigFileError::UnknownLabel(key.to_string()))
            };
            let mut edges = Vec::new();
            for (parent, [a, b]) in &tree {
                edges.push((resolve(parent)?, resolve(a)?, resolve(b)?));
            }
            cfg = cfg.with_tree(FamilyTree::new(edges))?;
        }
        Ok(cfg)
    }

    pub fn from_configuration(cfg: &Configuration) -> Self {
        let (points, distances) = match cfg.geometry() {
            Geometry::Planar(p) => (Some(p.clone()), None),
            Geometry::Metric(d) => (None, Some(d.clone())),
        };
        let tree = cfg.tree().map(|t| {
            t.edges
                .iter()
                .map(|&(p, a, b)| {
                    (cfg.labels[p].clone(), [cfg.labels[a].clone(), cfg.labels[b].clone()])
                })
                .collect()
        });
        Self {
            sigma: cfg.sigma(),
            points,
            distances,
            origin: cfg.origin(),
            labels: Some(cfg.labels().to_vec()),
            tree,
        }
    }
}

pub fn load_configuration(path: &std::path::Path) -> Result<Configuration, ConfigFileError> {
    let text = std::fs::read_to_string(path)?;
    parse_configuration(&text)
}

pub fn parse_configuration(text: &str) -> Result<Configuration, ConfigFileError> {
    let file: ConfigFile = serde_json::from_str(text)?;
    file.into_configuration()
}

pub fn configuration_to_json(cfg: &Configuration) -> String {
    serde_json::to_string_pretty(&ConfigFile::from_configuration(cfg)).expect("config serializes")
}
