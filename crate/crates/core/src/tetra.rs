//! Piecewise-linear interpolation on the five-tetrahedra subdivision of a
//! uniform cube grid.
//!
//! Every cube `Q_α = α h + [0, h]³` is split into the same five tetrahedra
//! (pure translation, no parity alternation): four corner tetrahedra cut off
//! at `O`, `AB`, `AC`, `BC` and the central one `{A, B, C, ABC}`. Corners are
//! named by the unit offsets they add to the cube origin `O`:
//! `A = e₁`, `B = e₂`, `C = e₃`, `AB = e₁ + e₂` and so on.
//!
//! Within tetrahedron `i` with reference vertex `v₄` and edges
//! `w_k = v_k - v₄`, the unit edges `ŵ_k` are related to the Cartesian axes
//! by `[e₁ e₂ e₃] = [ŵ₁ ŵ₂ ŵ₃] M^i`. The interpolant's gradient on the
//! tetrahedron is then `D^{α,i} M^i`, where
//!
//! ```text
//! D^{α,i}_{l,k} = (u_l(v_k) - u_l(v₄)) / |v_k - v₄|
//! ```
//!
//! are coarse directional derivatives read straight off the nodal data. This
//! gives the two-sided bound
//!
//! ```text
//! ‖M⁻¹‖⁻² Σ ‖D‖² ≤ ‖∇Iu‖² ≤ ‖M‖² Σ ‖D‖²
//! ```
//!
//! with volume-weighted Frobenius norms and the largest operator 2-norms over
//! the five tetrahedron types.
//!
//! Because the subdivision is translated rather than mirrored, face diagonals
//! of neighbouring cubes disagree and the interpolant may jump across cube
//! faces. Gradients are therefore broken (per tetrahedron) and
//! [`Interpolant::max_face_jump`] reports the size of the jumps.

use std::sync::OnceLock;

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::observers::{Boundary, NodalData};
use crate::spectral::SpectralField;

/// Barycentric coordinates may undershoot zero by this much on faces.
pub const BARY_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Corner {
    O,
    A,
    B,
    C,
    AB,
    AC,
    BC,
    ABC,
}

impl Corner {
    pub const fn offset(self) -> [usize; 3] {
        match self {
            Corner::O => [0, 0, 0],
            Corner::A => [1, 0, 0],
            Corner::B => [0, 1, 0],
            Corner::C => [0, 0, 1],
            Corner::AB => [1, 1, 0],
            Corner::AC => [1, 0, 1],
            Corner::BC => [0, 1, 1],
            Corner::ABC => [1, 1, 1],
        }
    }

    fn vector(self) -> Vector3<f64> {
        let o = self.offset();
        Vector3::new(o[0] as f64, o[1] as f64, o[2] as f64)
    }
}

/// Vertices `(v₁, v₂, v₃, v₄)` of one tetrahedron type; `v₄` is the
/// reference vertex.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TetraType {
    pub vertices: [Corner; 4],
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TetraTopology {
    pub tetras: [TetraType; 5],
}

impl TetraTopology {
    /// The fixed table `T₁ … T₅` (indices `0 … 4`), reference vertex last.
    pub fn standard() -> Self {
        use Corner::*;
        let t = |v: [Corner; 4]| TetraType { vertices: v };
        TetraTopology {
            tetras: [
                t([A, B, C, O]),
                t([A, B, C, ABC]),
                t([A, B, AB, ABC]),
                t([A, C, AC, ABC]),
                t([B, C, BC, ABC]),
            ],
        }
    }
}

/// Geometry of one tetrahedron type in unit-cube coordinates (multiply
/// lengths by `h`).
#[derive(Clone, Debug, PartialEq)]
pub struct TetraFrame {
    pub vertices: [Corner; 4],
    /// Columns `w₁, w₂, w₃`.
    pub edges: Matrix3<f64>,
    /// `|w_k|` on the unit cube.
    pub edge_lengths: [f64; 3],
    /// Columns `ŵ₁, ŵ₂, ŵ₃`.
    pub unit_edges: Matrix3<f64>,
    /// Change of basis with `I = unit_edges · m`.
    pub m: Matrix3<f64>,
    edges_inv: Matrix3<f64>,
    /// Volume as a fraction of the cube.
    pub volume_fraction: f64,
}

impl TetraFrame {
    /// Barycentric coordinates `(a₁, a₂, a₃, a₄)` of the local point `s`
    /// (cube coordinates in `[0, 1]³`).
    pub fn barycentric(&self, s: [f64; 3]) -> [f64; 4] {
        let rel = Vector3::new(s[0], s[1], s[2]) - self.vertices[3].vector();
        let a = self.edges_inv * rel;
        [a[0], a[1], a[2], 1.0 - a[0] - a[1] - a[2]]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TetraBasis {
    pub frames: [TetraFrame; 5],
    /// `max_i ‖M^i‖₂`
    pub m_norm: f64,
    /// `max_i ‖(M^i)⁻¹‖₂`
    pub m_inv_norm: f64,
}

fn operator_norm(m: &Matrix3<f64>) -> f64 {
    m.singular_values().max()
}

pub fn build_basis(topology: &TetraTopology) -> Result<TetraBasis> {
    let mut frames = Vec::with_capacity(5);
    for (i, t) in topology.tetras.iter().enumerate() {
        let v4 = t.vertices[3].vector();
        let cols: Vec<Vector3<f64>> = t.vertices[..3].iter().map(|v| v.vector() - v4).collect();
        let edges = Matrix3::from_columns(&cols);
        let det = edges.determinant();
        if det.abs() < 1e-12 {
            return Err(Error::MalformedTopology(format!(
                "tetrahedron {} has linearly dependent edges",
                i + 1
            )));
        }
        let edge_lengths = [cols[0].norm(), cols[1].norm(), cols[2].norm()];
        let unit_edges = Matrix3::from_columns(&[
            cols[0] / edge_lengths[0],
            cols[1] / edge_lengths[1],
            cols[2] / edge_lengths[2],
        ]);
        let m = unit_edges.try_inverse().ok_or_else(|| {
            Error::MalformedTopology(format!("unit-edge matrix of tetrahedron {} is singular", i + 1))
        })?;
        let edges_inv = edges.try_inverse().ok_or_else(|| {
            Error::MalformedTopology(format!("edge matrix of tetrahedron {} is singular", i + 1))
        })?;
        frames.push(TetraFrame {
            vertices: t.vertices,
            edges,
            edge_lengths,
            unit_edges,
            m,
            edges_inv,
            volume_fraction: det.abs() / 6.0,
        });
    }
    let total: f64 = frames.iter().map(|f| f.volume_fraction).sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::MalformedTopology(format!(
            "tetrahedron volumes sum to {total} of the cube"
        )));
    }
    let m_norm = frames.iter().map(|f| operator_norm(&f.m)).fold(0.0, f64::max);
    let m_inv_norm = frames
        .iter()
        .map(|f| operator_norm(&f.unit_edges))
        .fold(0.0, f64::max);
    let frames: [TetraFrame; 5] = frames.try_into().expect("five frames");
    Ok(TetraBasis {
        frames,
        m_norm,
        m_inv_norm,
    })
}

impl TetraBasis {
    /// Basis of [`TetraTopology::standard`], built once.
    pub fn standard() -> &'static TetraBasis {
        static BASIS: OnceLock<TetraBasis> = OnceLock::new();
        BASIS.get_or_init(|| build_basis(&TetraTopology::standard()).expect("standard topology is valid"))
    }

    /// First tetrahedron (in order `T₁ … T₅`) whose barycentric coordinates
    /// of `s` are all `≥ -BARY_TOL`.
    pub fn locate_local(&self, s: [f64; 3]) -> (usize, [f64; 4]) {
        let mut best = (0, [f64::NAN; 4], f64::NEG_INFINITY);
        for (i, frame) in self.frames.iter().enumerate() {
            let a = frame.barycentric(s);
            let worst = a.iter().copied().fold(f64::INFINITY, f64::min);
            if worst >= -BARY_TOL {
                return (i, a);
            }
            if worst > best.2 {
                best = (i, a, worst);
            }
        }
        // only reachable through rounding outside the unit cube
        (best.0, best.1)
    }
}

/// Containing cube, tetrahedron type (`0 … 4` for `T₁ … T₅`) and barycentric
/// coordinates ordered `(v₁, v₂, v₃, v₄)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Location {
    pub cube: [usize; 3],
    pub tetra: usize,
    pub bary: [f64; 4],
}

fn split(x: f64, h: f64, n_cubes: usize, periodic: bool) -> (usize, f64) {
    let length = h * n_cubes as f64;
    let x = if periodic { x.rem_euclid(length) } else { x.clamp(0.0, length) };
    let r = x / h;
    let j = (r.floor() as usize).min(n_cubes - 1);
    (j, r - j as f64)
}

/// Locates `x` (wrapped into `[0, L)³`, `L = n_cubes h`) in the periodic
/// cube grid.
pub fn locate(x: [f64; 3], h: f64, n_cubes: usize) -> Location {
    locate_with(TetraBasis::standard(), x, h, n_cubes, Boundary::Periodic)
}

fn locate_with(basis: &TetraBasis, x: [f64; 3], h: f64, n_cubes: usize, boundary: Boundary) -> Location {
    let periodic = boundary == Boundary::Periodic;
    let mut cube = [0; 3];
    let mut s = [0.0; 3];
    for d in 0..3 {
        (cube[d], s[d]) = split(x[d], h, n_cubes, periodic);
    }
    let (tetra, bary) = basis.locate_local(s);
    Location { cube, tetra, bary }
}

fn vertex_index(cube: [usize; 3], corner: Corner) -> [usize; 3] {
    let o = corner.offset();
    [cube[0] + o[0], cube[1] + o[1], cube[2] + o[2]]
}

/// `D^{α,i}` for one cube and tetrahedron type.
pub fn directional_matrix(nodal: &NodalData, cube: [usize; 3], tetra: usize) -> Matrix3<f64> {
    let frame = &TetraBasis::standard().frames[tetra];
    let base = nodal.sample(vertex_index(cube, frame.vertices[3]));
    let mut d = Matrix3::zeros();
    for k in 0..3 {
        let v = nodal.sample(vertex_index(cube, frame.vertices[k]));
        let len = nodal.h * frame.edge_lengths[k];
        for l in 0..3 {
            d[(l, k)] = (v[l] - base[l]) / len;
        }
    }
    d
}

fn cube_of(n_cubes: usize, alpha: usize) -> [usize; 3] {
    [alpha / (n_cubes * n_cubes), (alpha / n_cubes) % n_cubes, alpha % n_cubes]
}

/// All `D^{α,i}`, indexed by cube `(j·n + k)·n + l` and tetrahedron type.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DirectionalData {
    pub n_cubes: usize,
    pub h: f64,
    pub matrices: Vec<[Matrix3<f64>; 5]>,
}

impl DirectionalData {
    pub fn get(&self, cube: [usize; 3], tetra: usize) -> &Matrix3<f64> {
        let n = self.n_cubes;
        &self.matrices[(cube[0] * n + cube[1]) * n + cube[2]][tetra]
    }
}

pub fn directional_data(nodal: &NodalData) -> DirectionalData {
    let matrices = (0..nodal.n_cells())
        .map(|alpha| {
            let cube = cube_of(nodal.n_cubes, alpha);
            [0, 1, 2, 3, 4].map(|i| directional_matrix(nodal, cube, i))
        })
        .collect();
    DirectionalData {
        n_cubes: nodal.n_cubes,
        h: nodal.h,
        matrices,
    }
}

/// The interpolant `Iu = 𝓘u - mean(𝓘u)` built from nodal data.
#[derive(Clone, Debug, PartialEq)]
pub struct Interpolant {
    nodal: NodalData,
    mean_offset: [f64; 3],
}

/// Builds `Iu`, subtracting the exact mean of the piecewise-linear `𝓘u`.
///
/// A linear function averages to its vertex mean over a tetrahedron, so
/// `∫ 𝓘u = Σ_{α,i} vol(T_i^α) · (mean of the four vertex samples)`.
pub fn mean_correct(nodal: NodalData) -> Interpolant {
    let basis = TetraBasis::standard();
    let cell = nodal.h.powi(3);
    let mut integral = [0.0; 3];
    for alpha in 0..nodal.n_cells() {
        let cube = cube_of(nodal.n_cubes, alpha);
        for frame in &basis.frames {
            let w = cell * frame.volume_fraction * 0.25;
            for corner in frame.vertices {
                let v = nodal.sample(vertex_index(cube, corner));
                for d in 0..3 {
                    integral[d] += w * v[d];
                }
            }
        }
    }
    let vol = nodal.length().powi(3);
    Interpolant {
        mean_offset: integral.map(|x| x / vol),
        nodal,
    }
}

impl Interpolant {
    /// `𝓘u` without mean correction.
    pub fn raw(nodal: NodalData) -> Self {
        Interpolant {
            nodal,
            mean_offset: [0.0; 3],
        }
    }

    pub fn nodal(&self) -> &NodalData {
        &self.nodal
    }

    pub fn mean_offset(&self) -> [f64; 3] {
        self.mean_offset
    }

    pub fn locate(&self, x: [f64; 3]) -> Location {
        let n = &self.nodal;
        locate_with(TetraBasis::standard(), x, n.h, n.n_cubes, n.boundary)
    }

    /// `Σ a_k u(v_k)` at a located point, before mean correction.
    pub fn combine(&self, loc: &Location) -> [f64; 3] {
        let frame = &TetraBasis::standard().frames[loc.tetra];
        let mut out = [0.0; 3];
        for (corner, a) in frame.vertices.iter().zip(loc.bary) {
            let v = self.nodal.sample(vertex_index(loc.cube, *corner));
            for d in 0..3 {
                out[d] += a * v[d];
            }
        }
        out
    }

    /// `𝓘u(x)`
    pub fn evaluate_raw(&self, x: [f64; 3]) -> [f64; 3] {
        self.combine(&self.locate(x))
    }

    /// `Iu(x) = 𝓘u(x) - mean`
    pub fn evaluate(&self, x: [f64; 3]) -> [f64; 3] {
        let v = self.evaluate_raw(x);
        [0, 1, 2].map(|d| v[d] - self.mean_offset[d])
    }

    /// `Iu` at local coordinates `s ∈ [0, 1]³` of a given cube, so that
    /// points on shared faces can be evaluated from either side.
    pub fn evaluate_in_cube(&self, cube: [usize; 3], s: [f64; 3]) -> [f64; 3] {
        let (tetra, bary) = TetraBasis::standard().locate_local(s);
        let v = self.combine(&Location { cube, tetra, bary });
        [0, 1, 2].map(|d| v[d] - self.mean_offset[d])
    }

    /// `∇Iu` on `T_i^α`: the constant matrix `D^{α,i} M^i` (row `l` is
    /// `∇(Iu)_l`).
    pub fn gradient(&self, cube: [usize; 3], tetra: usize) -> Matrix3<f64> {
        directional_matrix(&self.nodal, cube, tetra) * TetraBasis::standard().frames[tetra].m
    }

    /// Largest jump `|𝓘u⁺ - 𝓘u⁻|` over sample points on interior cube faces
    /// (all faces when periodic).
    pub fn max_face_jump(&self) -> f64 {
        const FACE_POINTS: [[f64; 2]; 5] = [[0.5, 0.5], [0.25, 0.75], [0.75, 0.25], [0.25, 0.25], [0.75, 0.75]];
        let n = self.nodal.n_cubes;
        let periodic = self.nodal.boundary == Boundary::Periodic;
        let mut worst = 0.0f64;
        for alpha in 0..self.nodal.n_cells() {
            let cube = cube_of(n, alpha);
            for axis in 0..3 {
                if !periodic && cube[axis] + 1 == n {
                    continue;
                }
                let mut next = cube;
                next[axis] = (cube[axis] + 1) % n;
                let (p, q) = ((axis + 1) % 3, (axis + 2) % 3);
                for fp in FACE_POINTS {
                    let mut inner = [0.0; 3];
                    inner[p] = fp[0];
                    inner[q] = fp[1];
                    let mut outer = inner;
                    inner[axis] = 1.0;
                    outer[axis] = 0.0;
                    let a = self.evaluate_in_cube(cube, inner);
                    let b = self.evaluate_in_cube(next, outer);
                    let jump = ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt();
                    worst = worst.max(jump);
                }
            }
        }
        worst
    }
}

/// Broken H¹ seminorm of the interpolant against its data-side bounds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct H1Norms {
    /// `‖∇Iu‖_{L²}`, summed tetrahedron by tetrahedron.
    pub exact: f64,
    /// `(Σ vol(T_i^α) ‖D^{α,i}‖_F²)^{1/2}`
    pub data: f64,
    /// `data / max_i ‖(M^i)⁻¹‖`
    pub lower: f64,
    /// `data · max_i ‖M^i‖`
    pub upper: f64,
}

pub fn h1_data_norms(nodal: &NodalData) -> H1Norms {
    let basis = TetraBasis::standard();
    let cell = nodal.h.powi(3);
    let (mut exact2, mut data2) = (0.0, 0.0);
    for alpha in 0..nodal.n_cells() {
        let cube = cube_of(nodal.n_cubes, alpha);
        for (i, frame) in basis.frames.iter().enumerate() {
            let d = directional_matrix(nodal, cube, i);
            let vol = cell * frame.volume_fraction;
            data2 += vol * d.norm_squared();
            exact2 += vol * (d * frame.m).norm_squared();
        }
    }
    let data = data2.sqrt();
    H1Norms {
        exact: exact2.sqrt(),
        data,
        lower: data / basis.m_inv_norm,
        upper: data * basis.m_norm,
    }
}

/// `|u - Iu|` by dense midpoint sampling with `q³` points per cube.
pub fn l2_error(interp: &Interpolant, u: &SpectralField, q: usize) -> Result<f64> {
    let nodal = interp.nodal();
    if q == 0 {
        return Err(Error::InvalidConfig("quadrature order q must be positive".into()));
    }
    if (u.config().length - nodal.length()).abs() > 1e-12 * nodal.length() {
        return Err(Error::ResolutionMismatch(format!(
            "field lives on L = {}, interpolant on L = {}",
            u.config().length,
            nodal.length()
        )));
    }
    let n = nodal.n_cubes;
    let m = n * q;
    let step = nodal.h / q as f64;
    let coords: Vec<f64> = (0..m).map(|i| (i as f64 + 0.5) * step).collect();
    let exact = u.evaluate_on_lattice(&coords);
    let local = |i: usize| ((i / q), ((i % q) as f64 + 0.5) / q as f64);
    let mut sum = 0.0;
    for a in 0..m {
        let (ca, sa) = local(a);
        for b in 0..m {
            let (cb, sb) = local(b);
            for c in 0..m {
                let (cc, sc) = local(c);
                let iu = interp.evaluate_in_cube([ca, cb, cc], [sa, sb, sc]);
                let ue = exact[(a * m + b) * m + c];
                sum += (0..3).map(|d| (ue[d] - iu[d]).powi(2)).sum::<f64>();
            }
        }
    }
    Ok((sum * step.powi(3)).sqrt())
}
