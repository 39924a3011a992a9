//! Triangulated surfaces: polyhedral spheres built by octahedral subdivision
//! and inscribed-polygon approximations of the unit disc.
//!
//! Both families keep the experiment constraint points as exact mesh vertices
//! at every refinement level, so point evaluation is nodal.

use std::collections::HashMap;
use std::io::Write;

use crate::error::{Error, Result};
use crate::vec3;

/// Coincidence tolerance for constraint vertices and surface placement.
pub const GEOM_TOL: f64 = 1e-12;

const MAX_LEVEL: usize = 10;

/// Which smooth surface the mesh approximates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Geometry {
    Sphere { radius: f64 },
    FlatDisc,
}

/// A triangulated surface with a registry of constraint vertices.
///
/// Meshes are immutable after construction; refinement returns a new mesh.
#[derive(Clone, Debug)]
pub struct TriangleMesh {
    pub vertices: Vec<[f64; 3]>,
    /// Vertex-index triples with consistent (outward / counterclockwise)
    /// orientation.
    pub triangles: Vec<[usize; 3]>,
    pub geometry: Geometry,
    /// Sorted indices of boundary vertices (empty for closed surfaces).
    pub boundary_vertices: Vec<usize>,
    /// Constraint-point label -> vertex index, in experiment order.
    pub constraint_vertices: Vec<(String, usize)>,
}

/// Size measures of a mesh: `h` is the maximum edge length, which equals the
/// triangle diameter for simplices.
#[derive(Clone, Copy, Debug)]
pub struct MeshStats {
    pub h: f64,
    pub num_vertices: usize,
    pub num_triangles: usize,
    pub total_area: f64,
}

/// Closest-point projection onto the smooth surface.
pub fn lift_point(x: [f64; 3], geometry: Geometry) -> Result<[f64; 3]> {
    match geometry {
        Geometry::Sphere { radius } => {
            let r = vec3::norm(x);
            if r == 0.0 {
                return Err(Error::LiftZeroVector);
            }
            Ok(vec3::scale(radius / r, x))
        }
        Geometry::FlatDisc => Ok(x),
    }
}

/// Builds the level-`level` octahedral subdivision sphere of radius `radius`.
///
/// Level 0 is the regular octahedron; each refinement quadrisects every
/// triangle and projects edge midpoints radially. The six axis vertices are
/// registered as constraint vertices in the order +x, -x, +y, -y, +z, -z.
pub fn build_octasphere(level: usize, radius: f64) -> Result<TriangleMesh> {
    if level > MAX_LEVEL {
        return Err(Error::LevelOutOfRange(level, MAX_LEVEL));
    }
    assert!(radius > 0.0, "sphere radius must be positive");
    let r = radius;
    let vertices = vec![
        [r, 0.0, 0.0],
        [-r, 0.0, 0.0],
        [0.0, r, 0.0],
        [0.0, -r, 0.0],
        [0.0, 0.0, r],
        [0.0, 0.0, -r],
    ];
    // Outward-oriented octants.
    let triangles = vec![
        [0, 2, 4],
        [2, 1, 4],
        [1, 3, 4],
        [3, 0, 4],
        [2, 0, 5],
        [1, 2, 5],
        [3, 1, 5],
        [0, 3, 5],
    ];
    let constraint_vertices = vec![
        ("+x".to_string(), 0),
        ("-x".to_string(), 1),
        ("+y".to_string(), 2),
        ("-y".to_string(), 3),
        ("+z".to_string(), 4),
        ("-z".to_string(), 5),
    ];
    let mut mesh = TriangleMesh {
        vertices,
        triangles,
        geometry: Geometry::Sphere { radius },
        boundary_vertices: Vec::new(),
        constraint_vertices,
    };
    for _ in 0..level {
        mesh = refine(&mesh);
    }
    Ok(mesh)
}

/// Builds the level-`level` inscribed-polygon triangulation of the unit disc.
///
/// The level-0 template is a fan with a regular hexagonal core around the
/// origin, a 12-vertex ring at radius 0.5 carrying the four satellite
/// constraint points (±0.5,0), (0,±0.5), and a 12-vertex boundary ring on
/// the unit circle. The origin (the vertex carrying the Dirac singularity
/// of the flat experiment) therefore has valence 6, which quadrisection
/// preserves; an irregular valence there visibly degrades the L2 rate of
/// the split system. Refinement projects new boundary vertices onto the
/// circle, so the polygon approximates the disc from within. Constraint
/// vertices are registered in the order origin, +x, -x, +y, -y.
pub fn build_disc_mesh(level: usize) -> Result<TriangleMesh> {
    if level > MAX_LEVEL {
        return Err(Error::LevelOutOfRange(level, MAX_LEVEL));
    }
    let pi = std::f64::consts::PI;
    let mut vertices = vec![[0.0, 0.0, 0.0]];
    // Hexagon at r = 0.25 (indices 1..=6).
    for k in 0..6 {
        let a = pi / 3.0 * k as f64;
        vertices.push([0.25 * a.cos(), 0.25 * a.sin(), 0.0]);
    }
    // 12 vertices at r = 0.5 (indices 7..=18) and r = 1 (indices 19..=30).
    for radius in [0.5, 1.0] {
        for k in 0..12 {
            let a = pi / 6.0 * k as f64;
            vertices.push([radius * a.cos(), radius * a.sin(), 0.0]);
        }
    }
    // Pin the axis-aligned vertices exactly.
    vertices[7] = [0.5, 0.0, 0.0];
    vertices[10] = [0.0, 0.5, 0.0];
    vertices[13] = [-0.5, 0.0, 0.0];
    vertices[16] = [0.0, -0.5, 0.0];
    vertices[19] = [1.0, 0.0, 0.0];
    vertices[22] = [0.0, 1.0, 0.0];
    vertices[25] = [-1.0, 0.0, 0.0];
    vertices[28] = [0.0, -1.0, 0.0];

    let mut triangles = Vec::with_capacity(48);
    for k in 0..6 {
        triangles.push([0, 1 + k, 1 + (k + 1) % 6]);
    }
    // Transition 6 -> 12: hexagon vertex k aligns with ring vertex 2k.
    for k in 0..6 {
        let h0 = 1 + k;
        let h1 = 1 + (k + 1) % 6;
        let r0 = 7 + 2 * k;
        let r1 = 7 + 2 * k + 1;
        let r2 = 7 + (2 * k + 2) % 12;
        triangles.push([h0, r0, r1]);
        triangles.push([h0, r1, h1]);
        triangles.push([h1, r1, r2]);
    }
    // Annulus 12 -> 12 between the half-radius ring and the boundary.
    for k in 0..12 {
        let i0 = 7 + k;
        let i1 = 7 + (k + 1) % 12;
        let o0 = 19 + k;
        let o1 = 19 + (k + 1) % 12;
        triangles.push([i0, o0, o1]);
        triangles.push([i0, o1, i1]);
    }
    let constraint_vertices = vec![
        ("origin".to_string(), 0),
        ("+x0.5".to_string(), 7),
        ("-x0.5".to_string(), 13),
        ("+y0.5".to_string(), 10),
        ("-y0.5".to_string(), 16),
    ];
    let mut mesh = TriangleMesh {
        vertices,
        triangles,
        geometry: Geometry::FlatDisc,
        boundary_vertices: (19..31).collect(),
        constraint_vertices,
    };
    for _ in 0..level {
        mesh = refine(&mesh);
    }
    Ok(mesh)
}

/// Builds a triangulated unit sphere whose six axis points are vertices of
/// valence 6 at every level: hexagonal caps around the poles, 12-vertex
/// mid-latitude rings, and a 12-vertex equator ring through (±R,0,0),
/// (0,±R,0). This is the mesh family used by the sphere experiments; plain
/// octahedral subdivision leaves the axis vertices at valence 4, which
/// measurably degrades the L2 convergence of the constrained solves.
pub fn build_hexcap_sphere(level: usize, radius: f64) -> Result<TriangleMesh> {
    if level > MAX_LEVEL {
        return Err(Error::LevelOutOfRange(level, MAX_LEVEL));
    }
    assert!(radius > 0.0, "sphere radius must be positive");
    let pi = std::f64::consts::PI;
    let r = radius;
    // Colatitudes of the cap and mid rings.
    let theta_cap_lo = 31.0_f64.to_radians();
    let theta_cap_hi = 39.0_f64.to_radians();
    let theta_mid = 65.0_f64.to_radians();

    let mut vertices = vec![[0.0, 0.0, r], [0.0, 0.0, -r]];
    // North cap hexagon (2..=7) and south cap hexagon (8..=13). The cap
    // colatitude alternates so the polar patches are generic valence-6
    // vertex stars rather than perfectly symmetric ones.
    for &z_sign in &[1.0_f64, -1.0] {
        for k in 0..6 {
            let theta = if k % 2 == 0 { theta_cap_lo } else { theta_cap_hi };
            let a = pi / 3.0 * k as f64;
            vertices.push([
                r * theta.sin() * a.cos(),
                r * theta.sin() * a.sin(),
                z_sign * r * theta.cos(),
            ]);
        }
    }
    // North mid ring (14..=25) and south mid ring (26..=37).
    for &z_sign in &[1.0, -1.0] {
        for k in 0..12 {
            let a = pi / 6.0 * k as f64;
            vertices.push([
                r * theta_mid.sin() * a.cos(),
                r * theta_mid.sin() * a.sin(),
                z_sign * r * theta_mid.cos(),
            ]);
        }
    }
    // Equator ring (38..=49).
    for k in 0..12 {
        let a = pi / 6.0 * k as f64;
        vertices.push([r * a.cos(), r * a.sin(), 0.0]);
    }
    vertices[38] = [r, 0.0, 0.0];
    vertices[41] = [0.0, r, 0.0];
    vertices[44] = [-r, 0.0, 0.0];
    vertices[47] = [0.0, -r, 0.0];

    let mut triangles = Vec::with_capacity(96);
    // Caps: keep the outward orientation on both hemispheres.
    for k in 0..6 {
        triangles.push([0, 2 + k, 2 + (k + 1) % 6]);
        triangles.push([1, 8 + (k + 1) % 6, 8 + k]);
    }
    // Transitions cap (6) -> mid (12), aligned at even ring indices.
    for k in 0..6 {
        let (h0, h1) = (2 + k, 2 + (k + 1) % 6);
        let (r0, r1, r2) = (14 + 2 * k, 14 + 2 * k + 1, 14 + (2 * k + 2) % 12);
        triangles.push([h0, r0, r1]);
        triangles.push([h0, r1, h1]);
        triangles.push([h1, r1, r2]);
        let (s0, s1) = (8 + k, 8 + (k + 1) % 6);
        let (t0, t1, t2) = (26 + 2 * k, 26 + 2 * k + 1, 26 + (2 * k + 2) % 12);
        triangles.push([s0, t1, t0]);
        triangles.push([s0, s1, t1]);
        triangles.push([s1, t2, t1]);
    }
    // Bands mid (12) -> equator (12) on both hemispheres.
    for k in 0..12 {
        let (i0, i1) = (14 + k, 14 + (k + 1) % 12);
        let (e0, e1) = (38 + k, 38 + (k + 1) % 12);
        triangles.push([i0, e0, e1]);
        triangles.push([i0, e1, i1]);
        let (j0, j1) = (26 + k, 26 + (k + 1) % 12);
        triangles.push([j0, e1, e0]);
        triangles.push([j0, j1, e1]);
    }

    let constraint_vertices = vec![
        ("+x".to_string(), 38),
        ("-x".to_string(), 44),
        ("+y".to_string(), 41),
        ("-y".to_string(), 47),
        ("+z".to_string(), 0),
        ("-z".to_string(), 1),
    ];
    let mut mesh = TriangleMesh {
        vertices,
        triangles,
        geometry: Geometry::Sphere { radius },
        boundary_vertices: Vec::new(),
        constraint_vertices,
    };
    for _ in 0..level {
        mesh = refine(&mesh);
    }
    Ok(mesh)
}

/// Uniform quadrisection. New sphere vertices are projected radially; new
/// midpoints of disc boundary edges are projected onto the unit circle.
/// Existing vertices (and so the constraint registry) are kept bit-exactly.
pub fn refine(mesh: &TriangleMesh) -> TriangleMesh {
    let boundary_edges = boundary_edge_set(mesh);
    let mut vertices = mesh.vertices.clone();
    let mut midpoints: HashMap<(usize, usize), usize> = HashMap::new();
    let mut triangles = Vec::with_capacity(4 * mesh.triangles.len());

    let mut midpoint_of = |i: usize, j: usize, vertices: &mut Vec<[f64; 3]>| -> usize {
        let key = (i.min(j), i.max(j));
        if let Some(&idx) = midpoints.get(&key) {
            return idx;
        }
        let mut p = vec3::midpoint(vertices[i], vertices[j]);
        match mesh.geometry {
            Geometry::Sphere { radius } => {
                p = vec3::scale(radius / vec3::norm(p), p);
            }
            Geometry::FlatDisc => {
                if boundary_edges.contains(&key) {
                    let r = (p[0] * p[0] + p[1] * p[1]).sqrt();
                    p = [p[0] / r, p[1] / r, 0.0];
                }
            }
        }
        let idx = vertices.len();
        vertices.push(p);
        midpoints.insert(key, idx);
        idx
    };

    for &[v0, v1, v2] in &mesh.triangles {
        let m01 = midpoint_of(v0, v1, &mut vertices);
        let m12 = midpoint_of(v1, v2, &mut vertices);
        let m20 = midpoint_of(v2, v0, &mut vertices);
        triangles.push([v0, m01, m20]);
        triangles.push([v1, m12, m01]);
        triangles.push([v2, m20, m12]);
        triangles.push([m01, m12, m20]);
    }

    let mut refined = TriangleMesh {
        vertices,
        triangles,
        geometry: mesh.geometry,
        boundary_vertices: Vec::new(),
        constraint_vertices: mesh.constraint_vertices.clone(),
    };
    refined.boundary_vertices = detect_boundary_vertices(&refined);
    refined
}

/// Maximum edge length and total area.
pub fn mesh_size(mesh: &TriangleMesh) -> MeshStats {
    let mut h = 0.0_f64;
    let mut total_area = 0.0;
    for &[a, b, c] in &mesh.triangles {
        let (pa, pb, pc) = (mesh.vertices[a], mesh.vertices[b], mesh.vertices[c]);
        h = h.max(vec3::dist(pa, pb));
        h = h.max(vec3::dist(pb, pc));
        h = h.max(vec3::dist(pc, pa));
        total_area += triangle_area(pa, pb, pc);
    }
    MeshStats {
        h,
        num_vertices: mesh.vertices.len(),
        num_triangles: mesh.triangles.len(),
        total_area,
    }
}

pub fn triangle_area(a: [f64; 3], b: [f64; 3], c: [f64; 3]) -> f64 {
    0.5 * vec3::norm(vec3::cross(vec3::sub(b, a), vec3::sub(c, a)))
}

fn edge_counts(mesh: &TriangleMesh) -> HashMap<(usize, usize), usize> {
    let mut counts = HashMap::new();
    for &[a, b, c] in &mesh.triangles {
        for (i, j) in [(a, b), (b, c), (c, a)] {
            *counts.entry((i.min(j), i.max(j))).or_insert(0) += 1;
        }
    }
    counts
}

fn boundary_edge_set(mesh: &TriangleMesh) -> std::collections::HashSet<(usize, usize)> {
    edge_counts(mesh)
        .into_iter()
        .filter(|&(_, count)| count == 1)
        .map(|(edge, _)| edge)
        .collect()
}

fn detect_boundary_vertices(mesh: &TriangleMesh) -> Vec<usize> {
    let mut on_boundary = vec![false; mesh.vertices.len()];
    for (i, j) in boundary_edge_set(mesh) {
        on_boundary[i] = true;
        on_boundary[j] = true;
    }
    (0..mesh.vertices.len()).filter(|&v| on_boundary[v]).collect()
}

impl TriangleMesh {
    /// Coordinates of the registered constraint points, in registry order.
    pub fn constraint_points(&self) -> Vec<[f64; 3]> {
        self.constraint_vertices
            .iter()
            .map(|&(_, v)| self.vertices[v])
            .collect()
    }

    pub fn constraint_vertex(&self, label: &str) -> Option<usize> {
        self.constraint_vertices
            .iter()
            .find(|(name, _)| name == label)
            .map(|&(_, v)| v)
    }

    /// Checks the structural invariants: edge-manifoldness, consistent
    /// orientation, surface placement, and constraint-vertex coincidence.
    pub fn validate(&self) -> Result<()> {
        let closed = matches!(self.geometry, Geometry::Sphere { .. });
        for (&(i, j), &count) in edge_counts(self).iter() {
            let ok = if closed { count == 2 } else { count <= 2 };
            if !ok {
                return Err(Error::DimensionMismatch(format!(
                    "edge ({i}, {j}) shared by {count} triangles"
                )));
            }
        }
        // Consistent orientation: no directed edge may repeat.
        let mut directed = std::collections::HashSet::new();
        for &[a, b, c] in &self.triangles {
            for (i, j) in [(a, b), (b, c), (c, a)] {
                if !directed.insert((i, j)) {
                    return Err(Error::DimensionMismatch(format!(
                        "inconsistent orientation at directed edge ({i}, {j})"
                    )));
                }
            }
        }
        match self.geometry {
            Geometry::Sphere { radius } => {
                for v in &self.vertices {
                    if (vec3::norm(*v) - radius).abs() > GEOM_TOL {
                        return Err(Error::DimensionMismatch(format!(
                            "sphere vertex off surface: {v:?}"
                        )));
                    }
                }
            }
            Geometry::FlatDisc => {
                for v in &self.vertices {
                    if vec3::norm(*v) > 1.0 + GEOM_TOL {
                        return Err(Error::DimensionMismatch(format!(
                            "disc vertex outside unit circle: {v:?}"
                        )));
                    }
                }
                for &b in &self.boundary_vertices {
                    if (vec3::norm(self.vertices[b]) - 1.0).abs() > GEOM_TOL {
                        return Err(Error::DimensionMismatch(format!(
                            "boundary vertex off circle: {:?}",
                            self.vertices[b]
                        )));
                    }
                }
            }
        }
        for (label, v) in &self.constraint_vertices {
            let p = self.vertices[*v];
            let lifted = lift_point(p, self.geometry)?;
            if vec3::dist(p, lifted) > GEOM_TOL {
                return Err(Error::DimensionMismatch(format!(
                    "constraint vertex {label} off surface"
                )));
            }
        }
        Ok(())
    }

    /// Writes the mesh as OFF-format text (for external inspection only).
    pub fn write_off<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        writeln!(out, "OFF")?;
        writeln!(out, "{} {} 0", self.vertices.len(), self.triangles.len())?;
        for v in &self.vertices {
            writeln!(out, "{:.17} {:.17} {:.17}", v[0], v[1], v[2])?;
        }
        for t in &self.triangles {
            writeln!(out, "3 {} {} {}", t[0], t[1], t[2])?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn octahedron_combinatorics() {
        let mesh = build_octasphere(0, 1.0).unwrap();
        assert_eq!(mesh.vertices.len(), 6);
        assert_eq!(mesh.triangles.len(), 8);
        mesh.validate().unwrap();
    }

    #[test]
    fn octasphere_level_one_counts() {
        // V - E + F = 2 with E = 3F/2 under quadrisection.
        let mesh = build_octasphere(1, 1.0).unwrap();
        assert_eq!(mesh.vertices.len(), 18);
        assert_eq!(mesh.triangles.len(), 32);
        mesh.validate().unwrap();
    }

    #[test]
    fn octahedron_constraint_vertices() {
        let mesh = build_octasphere(0, 1.0).unwrap();
        let expected: [[f64; 3]; 6] = [
            [1.0, 0.0, 0.0],
            [-1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, -1.0, 0.0],
            [0.0, 0.0, 1.0],
            [0.0, 0.0, -1.0],
        ];
        let points = mesh.constraint_points();
        assert_eq!(points.len(), 6);
        for (p, e) in points.iter().zip(expected.iter()) {
            assert!(vec3::dist(*p, *e) <= GEOM_TOL);
        }
    }

    #[test]
    fn euler_counts_over_levels() {
        let mut expected_v = 6;
        let mut expected_f = 8;
        for level in 0..5 {
            let mesh = build_octasphere(level, 1.0).unwrap();
            assert_eq!(mesh.vertices.len(), expected_v, "level {level}");
            assert_eq!(mesh.triangles.len(), expected_f, "level {level}");
            let edges = expected_f * 3 / 2;
            expected_v += edges;
            expected_f *= 4;
        }
    }

    #[test]
    fn disc_level_zero_constraints() {
        let mesh = build_disc_mesh(0).unwrap();
        mesh.validate().unwrap();
        let pts = mesh.constraint_points();
        let expected: [[f64; 3]; 5] = [
            [0.0, 0.0, 0.0],
            [0.5, 0.0, 0.0],
            [-0.5, 0.0, 0.0],
            [0.0, 0.5, 0.0],
            [0.0, -0.5, 0.0],
        ];
        for (p, e) in pts.iter().zip(expected.iter()) {
            assert!(vec3::dist(*p, *e) <= GEOM_TOL, "{p:?} vs {e:?}");
        }
    }

    #[test]
    fn disc_boundary_on_circle() {
        for level in 0..4 {
            let mesh = build_disc_mesh(level).unwrap();
            for &b in &mesh.boundary_vertices {
                let r = vec3::norm(mesh.vertices[b]);
                assert!((r - 1.0).abs() <= GEOM_TOL);
            }
            mesh.validate().unwrap();
        }
    }

    #[test]
    fn disc_area_deficit_quarters() {
        let pi = std::f64::consts::PI;
        let mut prev_deficit = None;
        for level in 0..5 {
            let mesh = build_disc_mesh(level).unwrap();
            let stats = mesh_size(&mesh);
            let deficit = pi - stats.total_area;
            assert!(deficit > 0.0, "polygon must stay inside the disc");
            if let Some(prev) = prev_deficit {
                let ratio: f64 = prev / deficit;
                assert!(
                    (3.5..=4.5).contains(&ratio),
                    "level {level}: deficit ratio {ratio}"
                );
            }
            prev_deficit = Some(deficit);
        }
    }

    #[test]
    fn refine_matches_direct_build() {
        let refined = refine(&build_octasphere(0, 1.0).unwrap());
        let direct = build_octasphere(1, 1.0).unwrap();
        assert_eq!(refined.triangles, direct.triangles);
        for (a, b) in refined.vertices.iter().zip(direct.vertices.iter()) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn refine_quadruples_triangles_and_keeps_constraints_bit_exact() {
        for mesh in [build_octasphere(1, 2.5).unwrap(), build_disc_mesh(1).unwrap()] {
            let refined = refine(&mesh);
            assert_eq!(refined.triangles.len(), 4 * mesh.triangles.len());
            for ((la, va), (lb, vb)) in mesh
                .constraint_vertices
                .iter()
                .zip(refined.constraint_vertices.iter())
            {
                assert_eq!(la, lb);
                assert_eq!(mesh.vertices[*va], refined.vertices[*vb]);
            }
            refined.validate().unwrap();
        }
    }

    #[test]
    fn sphere_h_halves_per_level() {
        // The octahedron itself is preasymptotic (ratios 1.41 and 1.73 for
        // the first two refinements); from level 2 on the ratio settles.
        let mut prev = None;
        for level in 0..=6 {
            let stats = mesh_size(&build_octasphere(level, 1.0).unwrap());
            if let Some(prev_h) = prev {
                let ratio: f64 = prev_h / stats.h;
                if level >= 3 {
                    assert!((1.9..=2.1).contains(&ratio), "level {level}: {ratio}");
                } else {
                    assert!((1.3..=2.1).contains(&ratio), "level {level}: {ratio}");
                }
            }
            prev = Some(stats.h);
        }
    }

    #[test]
    fn octahedron_h_is_sqrt_two() {
        let stats = mesh_size(&build_octasphere(0, 1.0).unwrap());
        assert!((stats.h - 2.0_f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn octasphere_level3_area_near_sphere_area() {
        let stats = mesh_size(&build_octasphere(3, 1.0).unwrap());
        let exact = 4.0 * std::f64::consts::PI;
        assert!((stats.total_area - exact).abs() / exact <= 0.02);
    }

    #[test]
    fn sphere_area_deficit_ratio_near_four() {
        // O(h^2) geometric convergence; the first refinements of the raw
        // octahedron (ratios 2.62 and 3.51) are preasymptotic, so the band
        // is checked from level 2 on.
        let exact = 4.0 * std::f64::consts::PI;
        let mut prev = None;
        for level in 2..=6 {
            let stats = mesh_size(&build_octasphere(level, 1.0).unwrap());
            let deficit = exact - stats.total_area;
            assert!(deficit > 0.0);
            if let Some(prev_deficit) = prev {
                let ratio: f64 = prev_deficit / deficit;
                assert!((3.6..=4.4).contains(&ratio), "level {level}: {ratio}");
            }
            prev = Some(deficit);
        }
    }

    #[test]
    fn lift_examples() {
        let p = lift_point([2.0, 0.0, 0.0], Geometry::Sphere { radius: 1.0 }).unwrap();
        assert_eq!(p, [1.0, 0.0, 0.0]);
        let q = lift_point([0.3, 0.4, 0.0], Geometry::FlatDisc).unwrap();
        assert_eq!(q, [0.3, 0.4, 0.0]);
        assert!(lift_point([0.0; 3], Geometry::Sphere { radius: 1.0 }).is_err());
        // Normalization accuracy for generic points.
        for k in 0..50 {
            let t = k as f64 * 0.13 + 0.1;
            let x = [t.cos() * 1.7, t.sin() * 0.3, (t * 0.7).sin() * 2.0];
            let lifted = lift_point(x, Geometry::Sphere { radius: 2.0 }).unwrap();
            assert!((vec3::norm(lifted) - 2.0).abs() <= 1e-14);
        }
    }

    #[test]
    fn level_guard() {
        assert!(build_octasphere(11, 1.0).is_err());
        assert!(build_disc_mesh(11).is_err());
    }

    #[test]
    fn off_export_shape() {
        let mesh = build_octasphere(0, 1.0).unwrap();
        let mut buffer = Vec::new();
        mesh.write_off(&mut buffer).unwrap();
        let text = String::from_utf8(buffer).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("OFF"));
        assert_eq!(lines.next(), Some("6 8 0"));
        assert_eq!(text.lines().count(), 2 + 6 + 8);
    }
}
