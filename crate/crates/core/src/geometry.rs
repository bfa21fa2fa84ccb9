//! PG(3,q): canonical points, lines and planes with full incidence tables.
//!
//! Points and planes are canonical 4-vectors (first nonzero coordinate 1)
//! enumerated in lexicographic order of coordinate ranks, so both families
//! share one enumeration and one reverse-lookup table. Lines are enumerated
//! once as row-reduced 2x4 bases (one per 2-subspace), then indexed by the
//! rank of their canonical Pluecker 6-vector in lexicographic order, which
//! makes line ids reproducible across runs and builds.
//!
//! Meet counting against a line set S uses the star-sum identity
//!   |{m in S : m meets l}| = sum_{P on l} star_S(P) - q * [l in S],
//! valid because a line other than l meets l in at most one point while l
//! itself is counted at all q+1 of its points. The quadratic all-pairs
//! method survives in [`crate::klein`] as a cross-check oracle.

use std::collections::HashMap;
use std::io::Write as IoWrite;

use sha2::{Digest, Sha256};

use crate::gf::{Fe, Field};
use crate::{Error, Result};

pub type PointId = u32;
pub type LineId = u32;
pub type PlaneId = u32;

/// Geometry is tabulated exhaustively, so memory grows like q^6.
pub const MAX_GEOMETRY_Q: u32 = 27;

/// 4x4 matrix over GF(q), row-major, acting on column vectors from the left.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Mat4(pub [[Fe; 4]; 4]);

impl Mat4 {
    pub fn identity(f: &Field) -> Mat4 {
        let mut m = [[Fe::ZERO; 4]; 4];
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = f.one();
        }
        Mat4(m)
    }

    pub fn apply(&self, f: &Field, v: &[Fe; 4]) -> [Fe; 4] {
        let mut out = [Fe::ZERO; 4];
        for i in 0..4 {
            let mut acc = Fe::ZERO;
            for j in 0..4 {
                acc = f.add(acc, f.mul(self.0[i][j], v[j]));
            }
            out[i] = acc;
        }
        out
    }

    pub fn mul(&self, f: &Field, rhs: &Mat4) -> Mat4 {
        let mut out = [[Fe::ZERO; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                let mut acc = Fe::ZERO;
                for l in 0..4 {
                    acc = f.add(acc, f.mul(self.0[i][l], rhs.0[l][j]));
                }
                out[i][j] = acc;
            }
        }
        Mat4(out)
    }

    pub fn transpose(&self) -> Mat4 {
        let mut out = [[Fe::ZERO; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                out[j][i] = self.0[i][j];
            }
        }
        Mat4(out)
    }

    pub fn det(&self, f: &Field) -> Fe {
        // elimination on a copy; determinant accumulates pivots and swaps
        let mut a = self.0;
        let mut det = f.one();
        for col in 0..4 {
            let pivot = (col..4).find(|&r| a[r][col] != Fe::ZERO);
            let Some(pr) = pivot else {
                return Fe::ZERO;
            };
            if pr != col {
                a.swap(pr, col);
                det = f.neg(det);
            }
            det = f.mul(det, a[col][col]);
            let inv = f.inv(a[col][col]).expect("pivot is nonzero");
            for r in col + 1..4 {
                if a[r][col] == Fe::ZERO {
                    continue;
                }
                let factor = f.mul(a[r][col], inv);
                for c in col..4 {
                    a[r][c] = f.sub(a[r][c], f.mul(factor, a[col][c]));
                }
            }
        }
        det
    }

    pub fn inverse(&self, f: &Field) -> Result<Mat4> {
        let mut a = self.0;
        let mut b = Mat4::identity(f).0;
        for col in 0..4 {
            let pivot = (col..4)
                .find(|&r| a[r][col] != Fe::ZERO)
                .ok_or(Error::SingularMatrix)?;
            a.swap(pivot, col);
            b.swap(pivot, col);
            let inv = f.inv(a[col][col]).expect("pivot is nonzero");
            for c in 0..4 {
                a[col][c] = f.mul(a[col][c], inv);
                b[col][c] = f.mul(b[col][c], inv);
            }
            for r in 0..4 {
                if r == col || a[r][col] == Fe::ZERO {
                    continue;
                }
                let factor = a[r][col];
                for c in 0..4 {
                    a[r][c] = f.sub(a[r][c], f.mul(factor, a[col][c]));
                    b[r][c] = f.sub(b[r][c], f.mul(factor, b[col][c]));
                }
            }
        }
        Ok(Mat4(b))
    }

    /// Scales so the first nonzero entry in row-major order is 1; the
    /// canonical representative of the projective class.
    pub fn canonical_projective(&self, f: &Field) -> Mat4 {
        let flat = self.0.iter().flatten().find(|&&e| e != Fe::ZERO);
        let Some(&lead) = flat else { return *self };
        let inv = f.inv(lead).expect("nonzero leading entry");
        let mut out = self.0;
        for row in &mut out {
            for e in row {
                *e = f.mul(inv, *e);
            }
        }
        Mat4(out)
    }
}

pub fn dot4(f: &Field, a: &[Fe; 4], b: &[Fe; 4]) -> Fe {
    let mut acc = Fe::ZERO;
    for i in 0..4 {
        acc = f.add(acc, f.mul(a[i], b[i]));
    }
    acc
}

/// One line of PG(3,q).
#[derive(Debug, Clone)]
pub struct LineRec {
    /// Canonical Pluecker vector (p12, p13, p14, p23, p24, p34).
    pub plucker: [Fe; 6],
    /// The two smallest-indexed points on the line.
    pub span: (PointId, PointId),
    points_on: Vec<PointId>,
    planes_on: Vec<PlaneId>,
}

/// Precomputed action of one collineation on every object family.
#[derive(Debug, Clone)]
pub struct Collineation {
    pub matrix: Mat4,
    pub point_map: Vec<PointId>,
    pub line_map: Vec<LineId>,
    pub plane_map: Vec<PlaneId>,
}

pub struct Geometry {
    field: Field,
    points: Vec<[Fe; 4]>,
    planes: Vec<[Fe; 4]>,
    /// canonical 4-vector key -> index; shared by points and dual planes
    vec_lookup: Vec<u32>,
    lines: Vec<LineRec>,
    line_lookup: HashMap<u64, LineId>,
    point_lines: Vec<Vec<LineId>>,
    plane_lines: Vec<Vec<LineId>>,
    table_hash: String,
}

const NO_VEC: u32 = u32::MAX;

impl Geometry {
    pub fn new(field: Field) -> Result<Geometry> {
        let q = field.q();
        if q > MAX_GEOMETRY_Q {
            return Err(Error::BadInput(format!(
                "geometry tables for q = {q} exceed the supported bound {MAX_GEOMETRY_Q}"
            )));
        }
        let f = &field;
        let qs = q as usize;

        // canonical 4-vectors in lexicographic order of coordinate ranks:
        // (0,0,0,1), (0,0,1,t), (0,1,t,u), (1,t,u,v)
        let one = f.one();
        let mut points: Vec<[Fe; 4]> = Vec::with_capacity(qs * qs * qs + qs * qs + qs + 1);
        points.push([Fe::ZERO, Fe::ZERO, Fe::ZERO, one]);
        for t in f.enumerate() {
            points.push([Fe::ZERO, Fe::ZERO, one, t]);
        }
        for t in f.enumerate() {
            for u in f.enumerate() {
                points.push([Fe::ZERO, one, t, u]);
            }
        }
        for t in f.enumerate() {
            for u in f.enumerate() {
                for v in f.enumerate() {
                    points.push([one, t, u, v]);
                }
            }
        }
        let n_points = points.len();

        let key4 = |v: &[Fe; 4]| -> usize {
            let q = qs;
            ((v[0].0 as usize * q + v[1].0 as usize) * q + v[2].0 as usize) * q + v[3].0 as usize
        };
        let mut vec_lookup = vec![NO_VEC; qs * qs * qs * qs];
        for (i, v) in points.iter().enumerate() {
            vec_lookup[key4(v)] = i as u32;
        }
        let planes = points.clone();

        // lines: one row-reduced 2x4 basis per 2-subspace, grouped by pivot
        // pattern; free entries sweep all of GF(q)
        struct Proto {
            rows: ([Fe; 4], [Fe; 4]),
            pivots: (usize, usize),
            free: (usize, usize),
        }
        let mut protos: Vec<Proto> = Vec::new();
        let z = Fe::ZERO;
        for a in f.enumerate() {
            for b in f.enumerate() {
                for c in f.enumerate() {
                    for d in f.enumerate() {
                        protos.push(Proto {
                            rows: ([one, z, a, b], [z, one, c, d]),
                            pivots: (0, 1),
                            free: (2, 3),
                        });
                    }
                    protos.push(Proto {
                        rows: ([one, a, z, b], [z, z, one, c]),
                        pivots: (0, 2),
                        free: (1, 3),
                    });
                }
                protos.push(Proto {
                    rows: ([one, a, b, z], [z, z, z, one]),
                    pivots: (0, 3),
                    free: (1, 2),
                });
                protos.push(Proto {
                    rows: ([z, one, z, a], [z, z, one, b]),
                    pivots: (1, 2),
                    free: (0, 3),
                });
            }
            protos.push(Proto {
                rows: ([z, one, a, z], [z, z, z, one]),
                pivots: (1, 3),
                free: (0, 2),
            });
        }
        protos.push(Proto {
            rows: ([z, z, one, z], [z, z, z, one]),
            pivots: (2, 3),
            free: (0, 1),
        });
        let n_lines_expected =
            (qs * qs + 1) * (qs * qs + qs + 1);
        assert_eq!(protos.len(), n_lines_expected, "one basis per line");

        let canon = |v: [Fe; 4]| -> Option<[Fe; 4]> {
            let lead = v.iter().find(|&&e| e != Fe::ZERO)?;
            let inv = f.inv(*lead).expect("nonzero");
            Some([
                f.mul(inv, v[0]),
                f.mul(inv, v[1]),
                f.mul(inv, v[2]),
                f.mul(inv, v[3]),
            ])
        };

        let mut lines: Vec<LineRec> = Vec::with_capacity(protos.len());
        for proto in &protos {
            let (r1, r2) = proto.rows;
            let mut pts: Vec<PointId> = Vec::with_capacity(qs + 1);
            pts.push(vec_lookup[key4(&canon(r2).expect("basis row nonzero"))]);
            for t in f.enumerate() {
                let v = [
                    f.add(r1[0], f.mul(t, r2[0])),
                    f.add(r1[1], f.mul(t, r2[1])),
                    f.add(r1[2], f.mul(t, r2[2])),
                    f.add(r1[3], f.mul(t, r2[3])),
                ];
                pts.push(vec_lookup[key4(&canon(v).expect("basis combination nonzero"))]);
            }
            pts.sort_unstable();
            debug_assert!(pts.windows(2).all(|w| w[0] != w[1]));

            // planes through the line: null space of the reduced basis,
            // then the pencil it spans
            let (pi, pj) = proto.pivots;
            let (f1, f2) = proto.free;
            let mut d1 = [Fe::ZERO; 4];
            d1[f1] = one;
            d1[pi] = f.neg(r1[f1]);
            d1[pj] = f.neg(r2[f1]);
            let mut d2 = [Fe::ZERO; 4];
            d2[f2] = one;
            d2[pi] = f.neg(r1[f2]);
            d2[pj] = f.neg(r2[f2]);
            let mut pls: Vec<PlaneId> = Vec::with_capacity(qs + 1);
            pls.push(vec_lookup[key4(&canon(d2).expect("dual basis nonzero"))]);
            for t in f.enumerate() {
                let v = [
                    f.add(d1[0], f.mul(t, d2[0])),
                    f.add(d1[1], f.mul(t, d2[1])),
                    f.add(d1[2], f.mul(t, d2[2])),
                    f.add(d1[3], f.mul(t, d2[3])),
                ];
                pls.push(vec_lookup[key4(&canon(v).expect("dual combination nonzero"))]);
            }
            pls.sort_unstable();
            debug_assert!(pls.windows(2).all(|w| w[0] != w[1]));

            let plucker = canonical_plucker(f, &points[pts[0] as usize], &points[pts[1] as usize])
                .expect("distinct points");
            lines.push(LineRec {
                plucker,
                span: (pts[0], pts[1]),
                points_on: pts,
                planes_on: pls,
            });
        }

        // index = rank of the canonical Pluecker vector
        lines.sort_unstable_by(|a, b| a.plucker.cmp(&b.plucker));
        debug_assert!(lines.windows(2).all(|w| w[0].plucker != w[1].plucker));

        let mut line_lookup = HashMap::with_capacity(lines.len());
        for (i, l) in lines.iter().enumerate() {
            line_lookup.insert(plucker_key(q, &l.plucker), i as LineId);
        }

        let mut point_lines: Vec<Vec<LineId>> = vec![Vec::with_capacity(qs * qs + qs + 1); n_points];
        let mut plane_lines: Vec<Vec<LineId>> = vec![Vec::with_capacity(qs * qs + qs + 1); n_points];
        for (i, l) in lines.iter().enumerate() {
            for &p in &l.points_on {
                point_lines[p as usize].push(i as LineId);
            }
            for &pl in &l.planes_on {
                plane_lines[pl as usize].push(i as LineId);
            }
        }
        for (p, ls) in point_lines.iter().enumerate() {
            assert_eq!(
                ls.len(),
                qs * qs + qs + 1,
                "point {p} must lie on q^2+q+1 lines"
            );
        }
        for (pl, ls) in plane_lines.iter().enumerate() {
            assert_eq!(
                ls.len(),
                qs * qs + qs + 1,
                "plane {pl} must carry q^2+q+1 lines"
            );
        }

        let table_hash = hash_line_table(&field, &lines);

        Ok(Geometry {
            field,
            points,
            planes,
            vec_lookup,
            lines,
            line_lookup,
            point_lines,
            plane_lines,
            table_hash,
        })
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn n_points(&self) -> usize {
        self.points.len()
    }

    pub fn n_lines(&self) -> usize {
        self.lines.len()
    }

    pub fn n_planes(&self) -> usize {
        self.planes.len()
    }

    pub fn point(&self, id: PointId) -> &[Fe; 4] {
        &self.points[id as usize]
    }

    pub fn plane(&self, id: PlaneId) -> &[Fe; 4] {
        &self.planes[id as usize]
    }

    pub fn line(&self, id: LineId) -> &LineRec {
        &self.lines[id as usize]
    }

    /// Stable content hash of the full Pluecker line table.
    pub fn line_table_hash(&self) -> &str {
        &self.table_hash
    }

    pub fn canonicalize(&self, v: [Fe; 4]) -> Option<[Fe; 4]> {
        let lead = v.iter().find(|&&e| e != Fe::ZERO)?;
        let f = &self.field;
        let inv = f.inv(*lead).expect("nonzero");
        Some([
            f.mul(inv, v[0]),
            f.mul(inv, v[1]),
            f.mul(inv, v[2]),
            f.mul(inv, v[3]),
        ])
    }

    fn vec_id(&self, v: [Fe; 4]) -> Option<u32> {
        let c = self.canonicalize(v)?;
        let q = self.field.q() as usize;
        let key = ((c[0].0 as usize * q + c[1].0 as usize) * q + c[2].0 as usize) * q
            + c[3].0 as usize;
        match self.vec_lookup[key] {
            NO_VEC => None,
            id => Some(id),
        }
    }

    /// Point with the given homogeneous coordinates (any representative).
    pub fn point_id(&self, v: [Fe; 4]) -> Option<PointId> {
        self.vec_id(v)
    }

    /// Plane with the given dual coordinates (any representative).
    pub fn plane_id(&self, v: [Fe; 4]) -> Option<PlaneId> {
        self.vec_id(v)
    }

    /// The point U_i of the standard frame (i in 1..=4).
    pub fn unit_point(&self, i: usize) -> PointId {
        let mut v = [Fe::ZERO; 4];
        v[i - 1] = self.field.one();
        self.point_id(v).expect("frame point exists")
    }

    pub fn line_id_by_plucker(&self, p: &[Fe; 6]) -> Option<LineId> {
        let c = canonical_plucker6(&self.field, *p)?;
        self.line_lookup.get(&plucker_key(self.field.q(), &c)).copied()
    }

    pub fn line_through(&self, a: PointId, b: PointId) -> Result<LineId> {
        if a == b {
            return Err(Error::DegenerateSpan);
        }
        let p = canonical_plucker(&self.field, self.point(a), self.point(b))
            .ok_or(Error::DegenerateSpan)?;
        Ok(self.line_lookup[&plucker_key(self.field.q(), &p)])
    }

    /// Incidence of two lines via the polarized Pluecker form; zero exactly
    /// when the lines are coplanar, i.e. meet in PG(3,q).
    pub fn lines_meet(&self, a: LineId, b: LineId) -> bool {
        let f = &self.field;
        let p = &self.lines[a as usize].plucker;
        let r = &self.lines[b as usize].plucker;
        // p12 q34 - p13 q24 + p14 q23 + p34 q12 - p24 q13 + p23 q14
        let mut acc = f.mul(p[0], r[5]);
        acc = f.sub(acc, f.mul(p[1], r[4]));
        acc = f.add(acc, f.mul(p[2], r[3]));
        acc = f.add(acc, f.mul(p[5], r[0]));
        acc = f.sub(acc, f.mul(p[4], r[1]));
        acc = f.add(acc, f.mul(p[3], r[2]));
        acc == Fe::ZERO
    }

    pub fn points_on_line(&self, l: LineId) -> &[PointId] {
        &self.lines[l as usize].points_on
    }

    pub fn planes_through_line(&self, l: LineId) -> &[PlaneId] {
        &self.lines[l as usize].planes_on
    }

    pub fn lines_through_point(&self, p: PointId) -> &[LineId] {
        &self.point_lines[p as usize]
    }

    pub fn lines_in_plane(&self, pl: PlaneId) -> &[LineId] {
        &self.plane_lines[pl as usize]
    }

    pub fn point_on_line(&self, p: PointId, l: LineId) -> bool {
        self.lines[l as usize].points_on.binary_search(&p).is_ok()
    }

    pub fn point_on_plane(&self, p: PointId, pl: PlaneId) -> bool {
        dot4(&self.field, self.point(p), self.plane(pl)) == Fe::ZERO
    }

    pub fn line_in_plane(&self, l: LineId, pl: PlaneId) -> bool {
        self.lines[l as usize].planes_on.binary_search(&pl).is_ok()
    }

    /// The unique plane containing the line and an off-line point.
    pub fn plane_through(&self, l: LineId, p: PointId) -> Result<PlaneId> {
        if self.point_on_line(p, l) {
            return Err(Error::DegeneratePlane);
        }
        let (a, b) = self.lines[l as usize].span;
        let d = cross4(&self.field, self.point(a), self.point(b), self.point(p));
        self.plane_id(d).ok_or(Error::DegeneratePlane)
    }

    /// Tabulates the action of an invertible matrix on points, lines and
    /// planes. Planes transform by the inverse transpose.
    pub fn collineation(&self, m: &Mat4) -> Result<Collineation> {
        let f = &self.field;
        if m.det(f) == Fe::ZERO {
            return Err(Error::SingularMatrix);
        }
        let inv_t = m.inverse(f)?.transpose();
        let point_map: Vec<PointId> = self
            .points
            .iter()
            .map(|v| self.point_id(m.apply(f, v)).expect("collineation permutes points"))
            .collect();
        let plane_map: Vec<PlaneId> = self
            .planes
            .iter()
            .map(|v| self.plane_id(inv_t.apply(f, v)).expect("collineation permutes planes"))
            .collect();
        let line_map: Vec<LineId> = self
            .lines
            .iter()
            .map(|l| {
                let a = point_map[l.span.0 as usize];
                let b = point_map[l.span.1 as usize];
                self.line_through(a, b).expect("images of distinct points differ")
            })
            .collect();
        Ok(Collineation {
            matrix: *m,
            point_map,
            line_map,
            plane_map,
        })
    }

    /// Per-point member counts of a line set; the shared half of the
    /// star-sum identity.
    pub fn star_counts(&self, members: &crate::bitset::BitSet) -> Vec<u32> {
        assert_eq!(members.len(), self.n_lines(), "line-set universe mismatch");
        let mut star = vec![0u32; self.n_points()];
        for l in members.iter_ones() {
            for &p in &self.lines[l].points_on {
                star[p as usize] += 1;
            }
        }
        star
    }

    /// Writes the line table as CSV: one row per line, k coefficient
    /// columns per Pluecker coordinate (single column in prime fields).
    pub fn write_csv_line_table(&self, w: &mut dyn IoWrite) -> Result<()> {
        let f = &self.field;
        let k = f.k() as usize;
        let names = ["p12", "p13", "p14", "p23", "p24", "p34"];
        let mut header = vec!["index".to_string()];
        for n in names {
            if k == 1 {
                header.push(n.to_string());
            } else {
                for i in 0..k {
                    header.push(format!("{n}_{i}"));
                }
            }
        }
        writeln!(w, "{}", header.join(","))?;
        for (i, l) in self.lines.iter().enumerate() {
            let mut row = vec![i.to_string()];
            for c in &l.plucker {
                for coeff in f.coeffs(*c) {
                    row.push(coeff.to_string());
                }
            }
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// Pluecker coordinates of the line through two points, canonicalized so
/// the first nonzero coordinate is 1. None when the points coincide.
pub fn canonical_plucker(f: &Field, x: &[Fe; 4], y: &[Fe; 4]) -> Option<[Fe; 6]> {
    let pl = |i: usize, j: usize| f.sub(f.mul(x[i], y[j]), f.mul(x[j], y[i]));
    let raw = [
        pl(0, 1),
        pl(0, 2),
        pl(0, 3),
        pl(1, 2),
        pl(1, 3),
        pl(2, 3),
    ];
    canonical_plucker6(f, raw)
}

fn canonical_plucker6(f: &Field, raw: [Fe; 6]) -> Option<[Fe; 6]> {
    let lead = raw.iter().find(|&&e| e != Fe::ZERO)?;
    let inv = f.inv(*lead).expect("nonzero");
    let out = raw.map(|e| f.mul(inv, e));
    debug_assert_eq!(
        // p12 p34 - p13 p24 + p14 p23 = 0
        f.add(
            f.sub(f.mul(out[0], out[5]), f.mul(out[1], out[4])),
            f.mul(out[2], out[3])
        ),
        Fe::ZERO,
        "Pluecker relation must hold"
    );
    Some(out)
}

fn plucker_key(q: u32, p: &[Fe; 6]) -> u64 {
    p.iter().fold(0u64, |acc, e| acc * q as u64 + e.0 as u64)
}

/// Generalized cross product: the dual vector orthogonal to three
/// independent 4-vectors, via signed 3x3 minors.
pub fn cross4(f: &Field, a: &[Fe; 4], b: &[Fe; 4], c: &[Fe; 4]) -> [Fe; 4] {
    let det3 = |c0: usize, c1: usize, c2: usize| -> Fe {
        let m = |r: &[Fe; 4], i: usize| r[i];
        let t1 = f.mul(m(a, c0), f.sub(f.mul(m(b, c1), m(c, c2)), f.mul(m(b, c2), m(c, c1))));
        let t2 = f.mul(m(a, c1), f.sub(f.mul(m(b, c0), m(c, c2)), f.mul(m(b, c2), m(c, c0))));
        let t3 = f.mul(m(a, c2), f.sub(f.mul(m(b, c0), m(c, c1)), f.mul(m(b, c1), m(c, c0))));
        f.add(f.sub(t1, t2), t3)
    };
    [
        det3(1, 2, 3),
        f.neg(det3(0, 2, 3)),
        det3(0, 1, 3),
        f.neg(det3(0, 1, 2)),
    ]
}

fn hash_line_table(f: &Field, lines: &[LineRec]) -> String {
    let mut h = Sha256::new();
    h.update(b"clq-line-table-v1");
    h.update(f.p().to_le_bytes());
    h.update(f.k().to_le_bytes());
    for &c in f.modulus() {
        h.update(c.to_le_bytes());
    }
    h.update((lines.len() as u64).to_le_bytes());
    for l in lines {
        for c in &l.plucker {
            for coeff in f.coeffs(*c) {
                h.update((coeff as u16).to_le_bytes());
            }
        }
    }
    let digest = h.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}
