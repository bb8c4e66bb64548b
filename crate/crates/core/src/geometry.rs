//! Domains, metrics and the two geometric quantities the limit problems
//! reduce to: the inradius `R` and the metric diameter `diam_d`.
//!
//! Points are stored as `[f64; 2]`; one-dimensional domains use the first
//! coordinate and keep the second at zero.

use std::cmp::Ordering;

use nalgebra::DMatrix;

use crate::error::{domain, invalid, precondition, Result};

pub type Point = [f64; 2];

/// Lexicographic order on points (first coordinate, then second).
pub fn lex_cmp(a: &Point, b: &Point) -> Ordering {
    a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1]))
}

pub fn euclid(a: &Point, b: &Point) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

#[derive(Clone, Debug, PartialEq)]
pub enum MetricKind {
    Euclidean,
    /// `sqrt(v^T M v)` with `M` symmetric positive definite, row-major `dim x dim`.
    WeightedEuclidean(Vec<f64>),
    /// `(sum |v_i|^q)^(1/q)`, `q >= 1`.
    QNorm(f64),
}

/// A norm-induced distance `d(x, y) = scale * |x - y|_kind`, together with
/// constants such that `equiv_lo |x-y| <= d(x,y) <= equiv_hi |x-y|`.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricSpec {
    kind: MetricKind,
    dim: usize,
    scale: f64,
    equiv_lo: f64,
    equiv_hi: f64,
}

impl MetricSpec {
    pub fn euclidean(dim: usize) -> Self {
        MetricSpec { kind: MetricKind::Euclidean, dim, scale: 1.0, equiv_lo: 1.0, equiv_hi: 1.0 }
    }

    pub fn weighted_euclidean(dim: usize, matrix: Vec<f64>) -> Result<Self> {
        check_dim(dim)?;
        if matrix.len() != dim * dim || matrix.iter().any(|v| !v.is_finite()) {
            return Err(invalid(format!("weight matrix must hold {} finite entries", dim * dim)));
        }
        let m = DMatrix::from_row_slice(dim, dim, &matrix);
        if (&m - m.transpose()).abs().max() > 1e-12 * m.abs().max() {
            return Err(invalid("weight matrix is not symmetric"));
        }
        let eig = m.clone().symmetric_eigen();
        let lo = eig.eigenvalues.min();
        let hi = eig.eigenvalues.max();
        if lo <= 0.0 || m.cholesky().is_none() {
            return Err(invalid("weight matrix is not positive definite"));
        }
        Ok(MetricSpec {
            kind: MetricKind::WeightedEuclidean(matrix),
            dim,
            scale: 1.0,
            equiv_lo: lo.sqrt(),
            equiv_hi: hi.sqrt(),
        })
    }

    pub fn q_norm(dim: usize, q: f64) -> Result<Self> {
        check_dim(dim)?;
        if !(q >= 1.0) || !q.is_finite() {
            return Err(invalid(format!("q-norm needs finite q >= 1, got {q}")));
        }
        // |v|_q / |v|_2 ranges between 1 and n^(1/q - 1/2)
        let c = (dim as f64).powf(1.0 / q - 0.5);
        let (lo, hi) = if q >= 2.0 { (c, 1.0) } else { (1.0, c) };
        Ok(MetricSpec { kind: MetricKind::QNorm(q), dim, scale: 1.0, equiv_lo: lo, equiv_hi: hi })
    }

    /// The metric `c * d`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !(c > 0.0) || !c.is_finite() {
            return Err(invalid(format!("metric scale must be positive, got {c}")));
        }
        Ok(MetricSpec {
            scale: self.scale * c,
            equiv_lo: self.equiv_lo * c,
            equiv_hi: self.equiv_hi * c,
            ..self.clone()
        })
    }

    pub fn kind(&self) -> &MetricKind {
        &self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn equiv_lo(&self) -> f64 {
        self.equiv_lo
    }

    pub fn equiv_hi(&self) -> f64 {
        self.equiv_hi
    }

    pub fn is_euclidean(&self) -> bool {
        matches!(self.kind, MetricKind::Euclidean) && self.scale == 1.0
    }

    /// Distance of the displacement `v` from the origin.
    pub fn norm(&self, v: &Point) -> f64 {
        let base = match &self.kind {
            MetricKind::Euclidean => v[0].hypot(v[1]),
            MetricKind::WeightedEuclidean(m) => {
                let n = self.dim;
                let mut acc = 0.0;
                for a in 0..n {
                    for b in 0..n {
                        acc += v[a] * m[a * n + b] * v[b];
                    }
                }
                acc.max(0.0).sqrt()
            }
            MetricKind::QNorm(q) => {
                let q = *q;
                let a = v[0].abs();
                let b = v[1].abs();
                let top = a.max(b);
                if top == 0.0 {
                    0.0
                } else {
                    top * ((a / top).powf(q) + (b / top).powf(q)).powf(1.0 / q)
                }
            }
        };
        self.scale * base
    }

    /// `d(x, y)`, evaluated on lexicographically sorted arguments so that
    /// `eval(x, y) == eval(y, x)` bitwise.
    pub fn eval(&self, x: &Point, y: &Point) -> f64 {
        let (a, b) = if lex_cmp(x, y) == Ordering::Greater { (y, x) } else { (x, y) };
        self.norm(&[b[0] - a[0], b[1] - a[1]])
    }
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 1 || dim == 2 {
        Ok(())
    } else {
        Err(invalid(format!("dimension must be 1 or 2, got {dim}")))
    }
}

pub fn metric_eval(m: &MetricSpec, x: &Point, y: &Point) -> f64 {
    m.eval(x, y)
}

#[derive(Clone, Debug, PartialEq)]
pub enum DomainShape {
    Interval { a: f64, b: f64 },
    Rectangle { lo: Point, hi: Point },
    Disk { center: Point, radius: f64 },
    /// `[o, o + size]^2` with the open corner square `(o + notch, o + size]^2` removed.
    LShape { origin: Point, size: f64, notch: f64 },
    /// Simple polygon, either orientation.
    Polygon { vertices: Vec<Point> },
}

impl DomainShape {
    pub fn dim(&self) -> usize {
        match self {
            DomainShape::Interval { .. } => 1,
            _ => 2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |p: &Point| p[0].is_finite() && p[1].is_finite();
        match self {
            DomainShape::Interval { a, b } => {
                if !(a.is_finite() && b.is_finite() && a < b) {
                    return Err(invalid(format!("interval needs a < b, got ({a}, {b})")));
                }
            }
            DomainShape::Rectangle { lo, hi } => {
                if !(finite(lo) && finite(hi) && lo[0] < hi[0] && lo[1] < hi[1]) {
                    return Err(invalid("rectangle needs lo < hi componentwise"));
                }
            }
            DomainShape::Disk { center, radius } => {
                if !(finite(center) && radius.is_finite() && *radius > 0.0) {
                    return Err(invalid("disk needs a finite center and positive radius"));
                }
            }
            DomainShape::LShape { origin, size, notch } => {
                if !(finite(origin) && size.is_finite() && *notch > 0.0 && notch < size) {
                    return Err(invalid("l_shape needs 0 < notch < size"));
                }
            }
            DomainShape::Polygon { vertices } => {
                if vertices.len() < 3 || !vertices.iter().all(finite) {
                    return Err(invalid("polygon needs at least 3 finite vertices"));
                }
                if polygon_area(vertices).abs() <= 0.0 {
                    return Err(invalid("polygon has empty interior"));
                }
                if !polygon_is_simple(vertices) {
                    return Err(invalid("polygon is not simple"));
                }
            }
        }
        Ok(())
    }

    /// Vertex list of the polygonal shapes.
    pub fn polygon(&self) -> Option<Vec<Point>> {
        match self {
            DomainShape::Rectangle { lo, hi } => {
                Some(vec![*lo, [hi[0], lo[1]], *hi, [lo[0], hi[1]]])
            }
            DomainShape::LShape { origin: o, size: l, notch: c } => Some(vec![
                [o[0], o[1]],
                [o[0] + l, o[1]],
                [o[0] + l, o[1] + c],
                [o[0] + c, o[1] + c],
                [o[0] + c, o[1] + l],
                [o[0], o[1] + l],
            ]),
            DomainShape::Polygon { vertices } => Some(vertices.clone()),
            _ => None,
        }
    }

    /// Lebesgue measure of the shape.
    pub fn measure(&self) -> f64 {
        match self {
            DomainShape::Interval { a, b } => b - a,
            DomainShape::Disk { radius, .. } => std::f64::consts::PI * radius * radius,
            _ => polygon_area(&self.polygon().unwrap()).abs(),
        }
    }

    /// Whether `p` lies in the open shape.
    pub fn contains(&self, p: &Point) -> bool {
        match self {
            DomainShape::Interval { a, b } => *a < p[0] && p[0] < *b,
            DomainShape::Disk { center, radius } => euclid(p, center) < *radius,
            _ => {
                let poly = self.polygon().unwrap();
                boundary_projection(&poly, p).0 > 0.0 && point_in_polygon(&poly, p)
            }
        }
    }

    /// Euclidean distance from an arbitrary point to the boundary, computed exactly.
    pub fn boundary_distance(&self, p: &Point) -> f64 {
        self.nearest_boundary(p).0
    }

    /// Exact Euclidean projection onto the boundary: `(distance, foot point)`.
    pub fn nearest_boundary(&self, p: &Point) -> (f64, Point) {
        match self {
            DomainShape::Interval { a, b } => {
                let da = (p[0] - a).abs();
                let db = (p[0] - b).abs();
                if da <= db {
                    (da, [*a, 0.0])
                } else {
                    (db, [*b, 0.0])
                }
            }
            DomainShape::Disk { center, radius } => {
                let r = euclid(p, center);
                let foot = if r == 0.0 {
                    [center[0] + radius, center[1]]
                } else {
                    [
                        center[0] + radius * (p[0] - center[0]) / r,
                        center[1] + radius * (p[1] - center[1]) / r,
                    ]
                };
                ((r - radius).abs(), foot)
            }
            _ => boundary_projection(&self.polygon().unwrap(), p),
        }
    }

    /// Axis-aligned bounding box `(lo, hi)`.
    pub fn bbox(&self) -> (Point, Point) {
        match self {
            DomainShape::Interval { a, b } => ([*a, 0.0], [*b, 0.0]),
            DomainShape::Disk { center, radius } => (
                [center[0] - radius, center[1] - radius],
                [center[0] + radius, center[1] + radius],
            ),
            _ => {
                let poly = self.polygon().unwrap();
                let mut lo = poly[0];
                let mut hi = poly[0];
                for v in &poly {
                    lo = [lo[0].min(v[0]), lo[1].min(v[1])];
                    hi = [hi[0].max(v[0]), hi[1].max(v[1])];
                }
                (lo, hi)
            }
        }
    }

    /// Closed-form inradius and incenter where one exists.
    pub fn exact_inradius(&self) -> Option<(f64, Point)> {
        match self {
            DomainShape::Interval { a, b } => Some(((b - a) / 2.0, [(a + b) / 2.0, 0.0])),
            DomainShape::Rectangle { lo, hi } => Some((
                (hi[0] - lo[0]).min(hi[1] - lo[1]) / 2.0,
                [(lo[0] + hi[0]) / 2.0, (lo[1] + hi[1]) / 2.0],
            )),
            DomainShape::Disk { center, radius } => Some((*radius, *center)),
            DomainShape::LShape { origin, size, notch } => {
                // ball in the corner block touching both outer edges and the reentrant corner
                let t = std::f64::consts::SQRT_2 * notch / (1.0 + std::f64::consts::SQRT_2);
                (2.0 * t <= *size).then(|| (t, [origin[0] + t, origin[1] + t]))
            }
            DomainShape::Polygon { .. } => None,
        }
    }

    /// Points that must be present as boundary nodes (corners, endpoints).
    fn corner_points(&self) -> Vec<Point> {
        match self {
            DomainShape::Interval { a, b } => vec![[*a, 0.0], [*b, 0.0]],
            DomainShape::Disk { .. } => Vec::new(),
            _ => self.polygon().unwrap(),
        }
    }
}

fn polygon_area(v: &[Point]) -> f64 {
    let n = v.len();
    (0..n)
        .map(|i| {
            let a = v[i];
            let b = v[(i + 1) % n];
            a[0] * b[1] - b[0] * a[1]
        })
        .sum::<f64>()
        / 2.0
}

fn cross(o: &Point, a: &Point, b: &Point) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

fn segments_intersect(p1: &Point, p2: &Point, q1: &Point, q2: &Point) -> bool {
    let d1 = cross(q1, q2, p1);
    let d2 = cross(q1, q2, p2);
    let d3 = cross(p1, p2, q1);
    let d4 = cross(p1, p2, q2);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    let on = |a: &Point, b: &Point, c: &Point, d: f64| {
        d == 0.0
            && c[0] >= a[0].min(b[0])
            && c[0] <= a[0].max(b[0])
            && c[1] >= a[1].min(b[1])
            && c[1] <= a[1].max(b[1])
    };
    on(q1, q2, p1, d1) || on(q1, q2, p2, d2) || on(p1, p2, q1, d3) || on(p1, p2, q2, d4)
}

fn polygon_is_simple(v: &[Point]) -> bool {
    let n = v.len();
    for i in 0..n {
        let (a1, a2) = (v[i], v[(i + 1) % n]);
        for j in (i + 1)..n {
            let adjacent = j == i + 1 || (i == 0 && j == n - 1);
            if adjacent {
                continue;
            }
            let (b1, b2) = (v[j], v[(j + 1) % n]);
            if segments_intersect(&a1, &a2, &b1, &b2) {
                return false;
            }
        }
    }
    true
}

fn point_in_polygon(v: &[Point], p: &Point) -> bool {
    let n = v.len();
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (v[i], v[j]);
        if (a[1] > p[1]) != (b[1] > p[1]) {
            let x = a[0] + (p[1] - a[1]) * (b[0] - a[0]) / (b[1] - a[1]);
            if p[0] < x {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

fn segment_projection(a: &Point, b: &Point, p: &Point) -> (f64, Point) {
    let ab = [b[0] - a[0], b[1] - a[1]];
    let len2 = ab[0] * ab[0] + ab[1] * ab[1];
    let t = if len2 == 0.0 {
        0.0
    } else {
        (((p[0] - a[0]) * ab[0] + (p[1] - a[1]) * ab[1]) / len2).clamp(0.0, 1.0)
    };
    let foot = [a[0] + t * ab[0], a[1] + t * ab[1]];
    (euclid(p, &foot), foot)
}

fn boundary_projection(v: &[Point], p: &Point) -> (f64, Point) {
    let n = v.len();
    let mut best = (f64::INFINITY, v[0]);
    for i in 0..n {
        let cand = segment_projection(&v[i], &v[(i + 1) % n], p);
        if cand.0 < best.0 {
            best = cand;
        }
    }
    best
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum NodeClass {
    Interior,
    Boundary,
    Exterior,
}

/// Lattice discretization of a shape together with an exterior buffer that
/// stands in for the complement of the domain.
///
/// Nodes are stored class by class (interior, boundary, exterior), each class
/// in lexicographic order. Interior and exterior nodes sit on the lattice
/// `h * Z^n`; boundary nodes lie on the boundary itself, either because a
/// lattice node falls on it, because a lattice node just outside was
/// projected onto it, or because it is a corner of the shape.
#[derive(Clone, Debug)]
pub struct DomainGrid {
    shape: DomainShape,
    h: f64,
    dim: usize,
    nodes: Vec<Point>,
    lattice: Vec<Option<[i64; 2]>>,
    n_interior: usize,
    n_boundary: usize,
    weight: f64,
    buffer_width: f64,
    buffer_euclid: f64,
}

impl DomainGrid {
    /// Builds the grid. The buffer covers every point whose `metric`-distance
    /// to the domain is at most `buffer_width`, which defaults to the metric
    /// diameter of the discretized closure.
    pub fn new(
        shape: DomainShape,
        h: f64,
        metric: &MetricSpec,
        buffer_width: Option<f64>,
    ) -> Result<Self> {
        shape.validate()?;
        if !(h > 0.0) || !h.is_finite() {
            return Err(invalid(format!("grid spacing must be positive, got {h}")));
        }
        let dim = shape.dim();
        if metric.dim() != dim {
            return Err(invalid(format!(
                "metric dimension {} does not match domain dimension {dim}",
                metric.dim()
            )));
        }
        let on_tol = 1e-9 * h;
        let (lo, hi) = shape.bbox();
        let range = |lo: f64, hi: f64| ((lo / h).floor() as i64 - 1, (hi / h).ceil() as i64 + 1);
        let (ix0, ix1) = range(lo[0], hi[0]);
        let (iy0, iy1) = if dim == 1 { (0, 0) } else { range(lo[1], hi[1]) };

        let mut interior = Vec::new();
        let mut boundary: Vec<(Point, Option<[i64; 2]>)> = Vec::new();
        for i in ix0..=ix1 {
            for j in iy0..=iy1 {
                let p = [i as f64 * h, j as f64 * h];
                let (dist, foot) = shape.nearest_boundary(&p);
                if dist <= on_tol {
                    boundary.push((p, Some([i, j])));
                } else if shape.contains(&p) {
                    interior.push((p, Some([i, j])));
                } else if dist < 0.5 * h {
                    boundary.push((foot, None));
                }
            }
        }
        for c in shape.corner_points() {
            boundary.push((c, None));
        }
        // lattice nodes first so they win over projections landing nearby
        boundary.sort_by_key(|b| std::cmp::Reverse(b.1.is_some()));
        let mut kept: Vec<(Point, Option<[i64; 2]>)> = Vec::new();
        for cand in boundary {
            let min_sep = if cand.1.is_some() { 0.0 } else { 0.25 * h };
            let dup = kept.iter().any(|k| euclid(&k.0, &cand.0) <= min_sep.max(1e-9 * h));
            if !dup {
                kept.push(cand);
            }
        }
        kept.sort_by(|a, b| lex_cmp(&a.0, &b.0));
        if interior.is_empty() {
            return Err(domain("grid has no interior node; refine h"));
        }

        let mut grid = DomainGrid {
            shape,
            h,
            dim,
            nodes: interior.iter().map(|n| n.0).chain(kept.iter().map(|n| n.0)).collect(),
            lattice: interior.iter().map(|n| n.1).chain(kept.iter().map(|n| n.1)).collect(),
            n_interior: interior.len(),
            n_boundary: kept.len(),
            weight: h.powi(dim as i32),
            buffer_width: 0.0,
            buffer_euclid: 0.0,
        };

        let diam = diameter(&grid, metric)?.value;
        let width = match buffer_width {
            Some(w) if !(w > 0.0) || !w.is_finite() => {
                return Err(invalid(format!("buffer width must be positive, got {w}")))
            }
            Some(w) => w,
            None => diam,
        };
        let reach = width / metric.equiv_lo();
        let (ix0, ix1) = range(lo[0] - reach, hi[0] + reach);
        let (iy0, iy1) = if dim == 1 { (0, 0) } else { range(lo[1] - reach, hi[1] + reach) };
        for i in ix0..=ix1 {
            for j in iy0..=iy1 {
                let p = [i as f64 * h, j as f64 * h];
                let dist = grid.shape.boundary_distance(&p);
                if dist >= 0.5 * h && dist <= reach && !grid.shape.contains(&p) {
                    grid.nodes.push(p);
                    grid.lattice.push(Some([i, j]));
                }
            }
        }
        grid.buffer_width = width;
        grid.buffer_euclid = reach;
        Ok(grid)
    }

    pub fn shape(&self) -> &DomainShape {
        &self.shape
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nodes(&self) -> &[Point] {
        &self.nodes
    }

    pub fn node(&self, i: usize) -> Point {
        self.nodes[i]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn n_interior(&self) -> usize {
        self.n_interior
    }

    pub fn n_boundary(&self) -> usize {
        self.n_boundary
    }

    /// Interior plus boundary nodes.
    pub fn n_closure(&self) -> usize {
        self.n_interior + self.n_boundary
    }

    pub fn n_exterior(&self) -> usize {
        self.nodes.len() - self.n_closure()
    }

    pub fn class(&self, i: usize) -> NodeClass {
        if i < self.n_interior {
            NodeClass::Interior
        } else if i < self.n_closure() {
            NodeClass::Boundary
        } else {
            NodeClass::Exterior
        }
    }

    /// Integer lattice coordinates for nodes on `h * Z^n`.
    pub fn lattice_index(&self, i: usize) -> Option<[i64; 2]> {
        self.lattice[i]
    }

    /// Quadrature weight `h^n` of node `i`.
    pub fn weight(&self, _i: usize) -> f64 {
        self.weight
    }

    pub fn cell_measure(&self) -> f64 {
        self.weight
    }

    /// Discrete measure of `U`: interior node count times `h^n`.
    pub fn interior_measure(&self) -> f64 {
        self.n_interior as f64 * self.weight
    }

    /// Buffer width in units of the metric the grid was built with.
    pub fn buffer_width(&self) -> f64 {
        self.buffer_width
    }

    /// Euclidean reach of the buffer beyond the boundary.
    pub fn buffer_euclid(&self) -> f64 {
        self.buffer_euclid
    }

    /// Index of the interior node closest (Euclidean) to `p`; ties go to the
    /// first node in storage order.
    pub fn nearest_interior(&self, p: &Point) -> usize {
        let mut best = (f64::INFINITY, 0);
        for i in 0..self.n_interior {
            let d = euclid(&self.nodes[i], p);
            if d < best.0 {
                best = (d, i);
            }
        }
        best.1
    }
}

/// Exact Euclidean distance from interior node `x` to the boundary.
pub fn distance_to_boundary(g: &DomainGrid, x: usize) -> Result<f64> {
    if x >= g.len() || g.class(x) != NodeClass::Interior {
        return Err(domain(format!("node {x} is not an interior node")));
    }
    Ok(g.shape.boundary_distance(&g.nodes[x]))
}

#[derive(Clone, Debug, PartialEq)]
pub struct Inradius {
    /// `max` over interior nodes of the distance to the boundary.
    pub value: f64,
    pub incenter: Point,
    pub incenter_index: usize,
    /// Closed-form inradius of the continuous shape, when available.
    pub exact: Option<f64>,
}

pub fn inradius(g: &DomainGrid) -> Result<Inradius> {
    if g.n_interior == 0 {
        return Err(domain("empty interior"));
    }
    let mut best = (f64::NEG_INFINITY, 0);
    for i in 0..g.n_interior {
        let d = g.shape.boundary_distance(&g.nodes[i]);
        if d > best.0 {
            best = (d, i);
        }
    }
    Ok(Inradius {
        value: best.0,
        incenter: g.nodes[best.1],
        incenter_index: best.1,
        exact: g.shape.exact_inradius().map(|r| r.0),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct Diameter {
    pub value: f64,
    /// Realizing pair, lexicographically smallest among maximizers.
    pub pair: (Point, Point),
    pub indices: (usize, usize),
}

/// Indices of closure nodes on the convex hull of the closure node set,
/// collinear hull points included, in lexicographic order.
fn hull_candidates(g: &DomainGrid) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..g.n_closure()).collect();
    idx.sort_by(|&a, &b| lex_cmp(&g.nodes[a], &g.nodes[b]).then(a.cmp(&b)));
    if g.dim == 1 || idx.len() < 3 {
        let first = idx[0];
        let last = *idx.last().unwrap();
        let mut v = vec![first];
        if last != first {
            v.push(last);
        }
        return v;
    }
    let pts = &g.nodes;
    let mut lower: Vec<usize> = Vec::new();
    for &i in &idx {
        while lower.len() >= 2
            && cross(&pts[lower[lower.len() - 2]], &pts[lower[lower.len() - 1]], &pts[i]) < 0.0
        {
            lower.pop();
        }
        lower.push(i);
    }
    let mut upper: Vec<usize> = Vec::new();
    for &i in idx.iter().rev() {
        while upper.len() >= 2
            && cross(&pts[upper[upper.len() - 2]], &pts[upper[upper.len() - 1]], &pts[i]) < 0.0
        {
            upper.pop();
        }
        upper.push(i);
    }
    let mut all: Vec<usize> = lower.into_iter().chain(upper).collect();
    all.sort_by(|&a, &b| lex_cmp(&pts[a], &pts[b]).then(a.cmp(&b)));
    all.dedup();
    all
}

/// Metric diameter of the closure nodes. The maximum of a norm distance over a
/// finite set is attained at convex-hull points, so only those are scanned.
pub fn diameter(g: &DomainGrid, m: &MetricSpec) -> Result<Diameter> {
    if g.n_closure() < 2 {
        return Err(precondition("diameter needs at least two closure nodes"));
    }
    let cand = hull_candidates(g);
    let mut best = Diameter { value: f64::NEG_INFINITY, pair: (g.nodes[0], g.nodes[0]), indices: (0, 0) };
    for (k, &a) in cand.iter().enumerate() {
        for &b in &cand[k + 1..] {
            let d = m.eval(&g.nodes[a], &g.nodes[b]);
            if d > best.value {
                best = Diameter { value: d, pair: (g.nodes[a], g.nodes[b]), indices: (a, b) };
            }
        }
    }
    Ok(best)
}
