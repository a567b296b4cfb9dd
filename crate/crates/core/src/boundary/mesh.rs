use std::path::Path;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{Error, Result, Vec3};

/// Triangle surface mesh.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TriMesh {
    pub vertices: Vec<Vec3>,
    pub triangles: Vec<[usize; 3]>,
}

impl TriMesh {
    pub fn area(&self) -> f64 {
        self.triangles.iter().map(|t| self.triangle_area(t)).sum()
    }

    fn triangle_area(&self, t: &[usize; 3]) -> f64 {
        let [a, b, c] = t.map(|i| self.vertices[i]);
        0.5 * (b - a).cross(&(c - a)).norm()
    }
}

/// Parse the vertex and face records of an ASCII OBJ file. Polygonal faces
/// are fan-triangulated; texture and normal indices are ignored, as are all
/// other record types.
pub fn parse_obj(text: &str, origin: &Path) -> Result<TriMesh> {
    let mut mesh = TriMesh::default();
    for (lineno, line) in text.lines().enumerate() {
        let mut fields = line.split_whitespace();
        let bad = |what: &str| Error::format(origin, format!("line {}: {what}", lineno + 1));
        match fields.next() {
            Some("v") => {
                let mut coords = [0.0; 3];
                for c in coords.iter_mut() {
                    *c = fields
                        .next()
                        .and_then(|f| f.parse::<f64>().ok())
                        .ok_or_else(|| bad("vertex needs three numbers"))?;
                }
                if !coords.iter().all(|c| c.is_finite()) {
                    return Err(bad("non-finite vertex"));
                }
                mesh.vertices.push(Vec3::from(coords));
            }
            Some("f") => {
                let mut idx = Vec::new();
                for f in fields {
                    let head = f.split('/').next().unwrap_or_default();
                    let raw: i64 = head.parse().map_err(|_| bad("bad face index"))?;
                    let n = mesh.vertices.len() as i64;
                    let resolved = if raw < 0 { n + raw } else { raw - 1 };
                    if resolved < 0 || resolved >= n {
                        return Err(bad("face index out of range"));
                    }
                    idx.push(resolved as usize);
                }
                if idx.len() < 3 {
                    return Err(bad("face needs at least three vertices"));
                }
                for k in 1..idx.len() - 1 {
                    mesh.triangles.push([idx[0], idx[k], idx[k + 1]]);
                }
            }
            _ => {}
        }
    }
    Ok(mesh)
}

pub fn read_obj(path: &Path) -> Result<TriMesh> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_obj(&text, path)
}

/// Area-weighted stratified sampling at roughly one point per `spacing^2`.
///
/// Each triangle receives `floor(area / s^2 + u)` points (u uniform), one per
/// distinct cell of a `k x k` subdivision of the triangle.
pub fn sample_mesh(mesh: &TriMesh, spacing: f64, seed: u64) -> Result<Vec<Vec3>> {
    if mesh.triangles.is_empty() {
        return Err(Error::invalid("mesh has no triangles"));
    }
    if !(spacing > 0.0 && spacing.is_finite()) {
        return Err(Error::invalid(format!(
            "sampling spacing must be positive, got {spacing}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for t in &mesh.triangles {
        let [a, b, c] = t.map(|i| mesh.vertices[i]);
        let area = mesh.triangle_area(t);
        let u: f64 = rng.gen();
        let count = (area / (spacing * spacing) + u).floor() as usize;
        if count == 0 {
            continue;
        }
        let k = (count as f64).sqrt().ceil() as usize;
        let cells = k * k;
        for cell in sample(&mut rng, cells, count).into_vec() {
            let (p0, p1, p2) = sub_triangle(cell, k);
            let (r1, r2): (f64, f64) = (rng.gen(), rng.gen());
            let s = r1.sqrt();
            let bary = p0 * (1.0 - s) + p1 * (s * (1.0 - r2)) + p2 * (s * r2);
            out.push(a + (b - a) * bary[0] + (c - a) * bary[1]);
        }
    }
    Ok(out)
}

/// Corners, in (beta, gamma) barycentric coordinates, of cell `cell` of the
/// `k x k` regular subdivision. The first `k(k+1)/2` cells point up.
fn sub_triangle(cell: usize, k: usize) -> (nalgebra::Vector2<f64>, nalgebra::Vector2<f64>, nalgebra::Vector2<f64>) {
    let kf = k as f64;
    let up = k * (k + 1) / 2;
    let (i, j, flipped) = if cell < up {
        unrank(cell, k)
    } else {
        let (i, j, _) = unrank(cell - up, k - 1);
        (i, j, true)
    };
    let v = |x: usize, y: usize| nalgebra::Vector2::new(x as f64 / kf, y as f64 / kf);
    if flipped {
        (v(i + 1, j), v(i, j + 1), v(i + 1, j + 1))
    } else {
        (v(i, j), v(i + 1, j), v(i, j + 1))
    }
}

/// Map a linear index to `(i, j)` with `i + j < rows`.
fn unrank(mut cell: usize, rows: usize) -> (usize, usize, bool) {
    for i in 0..rows {
        let width = rows - i;
        if cell < width {
            return (i, cell, false);
        }
        cell -= width;
    }
    unreachable!("cell index beyond subdivision")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_square() -> TriMesh {
        parse_obj(
            "# square\nv 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3\nf 1 3 4\n",
            Path::new("square.obj"),
        )
        .unwrap()
    }

    #[test]
    fn unit_square_density() {
        let s = 0.02;
        let pts = sample_mesh(&unit_square(), s, 7).unwrap();
        let expected = 1.0 / (s * s);
        assert!((pts.len() as f64 - expected).abs() <= 2.0, "{}", pts.len());
        for p in &pts {
            assert_eq!(p.z, 0.0);
            assert!((0.0..=1.0).contains(&p.x) && (0.0..=1.0).contains(&p.y));
        }
        // stratification: every 0.1 x 0.1 block gets close to 25 samples
        let mut counts = [0usize; 100];
        for p in &pts {
            let bx = ((p.x * 10.0) as usize).min(9);
            let by = ((p.y * 10.0) as usize).min(9);
            counts[by * 10 + bx] += 1;
        }
        assert!(counts.iter().all(|&c| (10..=40).contains(&c)), "{counts:?}");
    }

    #[test]
    fn degenerate_triangle_gives_nothing() {
        let mesh = parse_obj("v 0 0 0\nv 1 0 0\nv 2 0 0\nf 1 2 3\n", Path::new("line.obj")).unwrap();
        assert!(sample_mesh(&mesh, 0.01, 1).unwrap().is_empty());
    }

    #[test]
    fn seeded_output_is_reproducible() {
        let m = unit_square();
        assert_eq!(sample_mesh(&m, 0.05, 3).unwrap(), sample_mesh(&m, 0.05, 3).unwrap());
        assert_ne!(sample_mesh(&m, 0.05, 3).unwrap(), sample_mesh(&m, 0.05, 4).unwrap());
    }

    #[test]
    fn empty_mesh_is_an_error() {
        assert!(sample_mesh(&TriMesh::default(), 0.1, 0).is_err());
    }

    #[test]
    fn obj_polygons_and_slashes() {
        let m = parse_obj(
            "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nvn 0 0 1\nf 1//1 2//1 3//1 -1//1\n",
            Path::new("q.obj"),
        )
        .unwrap();
        assert_eq!(m.triangles, vec![[0, 1, 2], [0, 2, 3]]);
        assert!((m.area() - 1.0).abs() < 1e-12);
        assert!(parse_obj("v 0 0\n", Path::new("bad.obj")).is_err());
        assert!(parse_obj("v 0 0 0\nf 1 2 3\n", Path::new("bad.obj")).is_err());
    }

    #[test]
    fn subdivision_covers_the_triangle() {
        for k in 1..6 {
            let area: f64 = (0..k * k)
                .map(|c| {
                    let (a, b, c) = sub_triangle(c, k);
                    0.5 * ((b - a).perp(&(c - a))).abs()
                })
                .sum();
            assert!((area - 0.5).abs() < 1e-12);
        }
    }
}
