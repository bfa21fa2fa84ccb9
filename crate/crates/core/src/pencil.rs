//! The pencil of quadrics Q_lam: X1 X3 - X2^2 + lam X4^2 = 0 in PG(3,q),
//! together with the base plane pi: X4 = 0, and the classification of every
//! point and line of the space relative to the pencil.
//!
//! All members share the conic C = {(1,t,t^2,0)} u {(0,0,1,0)} cut out on
//! pi. Q_0 is the cone over C with vertex U4 = (0,0,0,1); each point off pi
//! lies on exactly one member, the one with parameter
//! lam*(P) = (x2^2 - x1 x3) / x4^2, and Q_lam is hyperbolic for square
//! lam != 0, elliptic for non-square lam. Labels for points and lines are
//! computed from scratch here and then cross-checked against closed-form
//! censuses; the orbit machinery in [`crate::group_action`] verifies
//! independently that they are unions of PGL(2,q) orbits.

use crate::bitset::BitSet;
use crate::geometry::{Geometry, LineId, Mat4, PlaneId, PointId};
use crate::gf::{Fe, Field};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MemberKind {
    /// Q_0, the quadric cone over C with vertex U4.
    Cone,
    /// Q_lam for nonzero square lam; carries two reguli.
    Hyperbolic,
    /// Q_lam for non-square lam; line-free.
    Elliptic,
}

impl MemberKind {
    pub fn point_count(self, q: u64) -> usize {
        match self {
            MemberKind::Cone => (q * q + q + 1) as usize,
            MemberKind::Hyperbolic => ((q + 1) * (q + 1)) as usize,
            MemberKind::Elliptic => (q * q + 1) as usize,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PointLabel {
    /// U4, the vertex of the cone.
    Vertex,
    /// On the base conic C (hence on every member).
    Conic,
    /// In pi, off C, on no tangent line of C.
    Internal,
    /// In pi, off C, on two tangent lines of C.
    External,
    /// Off pi on the cone (lam* = 0), other than the vertex.
    ConeSmooth,
    /// Off pi on the member with this nonzero parameter.
    Quadric(Fe),
}

/// Position of the pi-trace of an off-pi point P != U4, i.e. of the point
/// (U4 P) n pi, relative to the conic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PointType {
    TraceConic,
    TraceInternal,
    TraceExternal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LineLabel {
    /// In pi, tangent to C.
    PiTangent,
    /// In pi, external to C.
    PiExternal,
    /// In pi, secant to C.
    PiSecant,
    /// Generator of the cone: joins U4 to a conic point.
    ConeGenerator,
    /// Joins U4 to an internal point; secant to every elliptic member.
    VertexInternal,
    /// Joins U4 to an external point; secant to every hyperbolic member.
    VertexExternal,
    /// Lies on the hyperbolic member with this parameter.
    Regulus(Fe),
    /// Tangent to the member with this nonzero parameter, trace internal.
    TangentInternal(Fe),
    /// Tangent to the member with this nonzero parameter, trace external.
    TangentExternal(Fe),
    /// Tangent to the cone at a smooth point; trace external.
    ConeTangent,
    /// Meets C in one point and every member off pi exactly once.
    FullSecant,
}

/// The eight line families that do not carry a member parameter, in the
/// fixed column order used by the incidence tallies.
pub const FAMILY_COUNT: usize = 8;

pub fn family_index(label: LineLabel) -> Option<usize> {
    match label {
        LineLabel::PiTangent => Some(0),
        LineLabel::PiExternal => Some(1),
        LineLabel::PiSecant => Some(2),
        LineLabel::ConeTangent => Some(3),
        LineLabel::ConeGenerator => Some(4),
        LineLabel::VertexInternal => Some(5),
        LineLabel::VertexExternal => Some(6),
        LineLabel::FullSecant => Some(7),
        _ => None,
    }
}

/// How a plane sits relative to the pencil; determines its line tally.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PlaneCategory {
    /// pi itself.
    Base,
    /// Through U4, meeting C in `conic_hits` points (0, 1 or 2).
    OnVertex { conic_hits: u8 },
    /// Off U4, meeting C in `conic_hits` points.
    OffVertex { conic_hits: u8 },
}

pub struct Pencil {
    geo: Geometry,
    pi: PlaneId,
    vertex: PointId,
    conic: Vec<PointId>,
    point_labels: Vec<PointLabel>,
    line_labels: Vec<LineLabel>,
}

impl Pencil {
    pub fn new(geo: Geometry) -> Pencil {
        let f = geo.field().clone();
        let one = f.one();
        let q = f.q() as usize;

        let pi = geo
            .plane_id([Fe::ZERO, Fe::ZERO, Fe::ZERO, one])
            .expect("base plane exists");
        let vertex = geo.unit_point(4);

        let mut conic: Vec<PointId> = f
            .enumerate()
            .map(|t| {
                geo.point_id([one, t, f.mul(t, t), Fe::ZERO])
                    .expect("conic point exists")
            })
            .chain([geo.unit_point(3)])
            .collect();
        conic.sort_unstable();
        let conic_set: BitSet = BitSet::from_indices(geo.n_points(), conic.iter().map(|&p| p as usize));

        let eval = |lam: Fe, v: &[Fe; 4]| -> Fe {
            let mut acc = f.sub(f.mul(v[0], v[2]), f.mul(v[1], v[1]));
            acc = f.add(acc, f.mul(lam, f.mul(v[3], v[3])));
            acc
        };

        // pi-lines first: tangent, external or secant by conic hits
        let mut line_labels: Vec<Option<LineLabel>> = vec![None; geo.n_lines()];
        let mut tangent_count = vec![0u8; geo.n_points()];
        for &l in geo.lines_in_plane(pi) {
            let hits = geo
                .points_on_line(l)
                .iter()
                .filter(|&&p| conic_set.contains(p as usize))
                .count();
            let label = match hits {
                0 => LineLabel::PiExternal,
                1 => LineLabel::PiTangent,
                2 => LineLabel::PiSecant,
                n => unreachable!("a line meets the conic in at most 2 points, got {n}"),
            };
            line_labels[l as usize] = Some(label);
            if label == LineLabel::PiTangent {
                for &p in geo.points_on_line(l) {
                    tangent_count[p as usize] += 1;
                }
            }
        }

        // point labels: pi points by conic/tangent position, off-pi points
        // by the unique member through them
        let mut point_labels: Vec<PointLabel> = Vec::with_capacity(geo.n_points());
        for p in 0..geo.n_points() as PointId {
            let label = if p == vertex {
                PointLabel::Vertex
            } else if conic_set.contains(p as usize) {
                PointLabel::Conic
            } else if geo.point_on_plane(p, pi) {
                match tangent_count[p as usize] {
                    0 => PointLabel::Internal,
                    2 => PointLabel::External,
                    n => unreachable!("pi point off C lies on 0 or 2 tangents, got {n}"),
                }
            } else {
                let v = geo.point(p);
                let lam = f
                    .mul(
                        f.sub(f.mul(v[1], v[1]), f.mul(v[0], v[2])),
                        f.inv(f.mul(v[3], v[3])).expect("off pi means x4 != 0"),
                    );
                debug_assert_eq!(eval(lam, v), Fe::ZERO);
                if lam == Fe::ZERO {
                    PointLabel::ConeSmooth
                } else {
                    PointLabel::Quadric(lam)
                }
            };
            point_labels.push(label);
        }

        // remaining lines: through the vertex by trace label, otherwise by
        // the multiset of member parameters over the q points off pi
        let mut occ = vec![0u32; q];
        for l in 0..geo.n_lines() as LineId {
            if line_labels[l as usize].is_some() {
                continue;
            }
            let pts = geo.points_on_line(l);
            if geo.point_on_line(vertex, l) {
                let trace = pts
                    .iter()
                    .copied()
                    .find(|&p| geo.point_on_plane(p, pi))
                    .expect("every line meets pi");
                line_labels[l as usize] = Some(match point_labels[trace as usize] {
                    PointLabel::Conic => LineLabel::ConeGenerator,
                    PointLabel::Internal => LineLabel::VertexInternal,
                    PointLabel::External => LineLabel::VertexExternal,
                    other => unreachable!("trace of a vertex line is a pi point, got {other:?}"),
                });
                continue;
            }
            let mut trace = None;
            occ.fill(0);
            for &p in pts {
                match point_labels[p as usize] {
                    PointLabel::Conic | PointLabel::Internal | PointLabel::External => {
                        debug_assert!(trace.is_none(), "one pi point per off-pi line");
                        trace = Some(p);
                    }
                    PointLabel::ConeSmooth => occ[0] += 1,
                    PointLabel::Quadric(lam) => occ[lam.0 as usize] += 1,
                    PointLabel::Vertex => unreachable!("vertex lines handled above"),
                }
            }
            let trace = trace.expect("every line meets pi");
            let label = if conic_set.contains(trace as usize) {
                if let Some(lam) = occ.iter().position(|&c| c == q as u32) {
                    // the line lies on one member entirely
                    let lam = Fe(lam as u16);
                    assert!(
                        lam != Fe::ZERO && f.is_square(lam),
                        "only hyperbolic members carry lines off the cone"
                    );
                    LineLabel::Regulus(lam)
                } else {
                    assert!(
                        occ.iter().all(|&c| c == 1),
                        "a non-ruling line through C meets every member once more"
                    );
                    LineLabel::FullSecant
                }
            } else {
                // restricted to l, the pencil cuts a pencil of binary forms
                // with exactly one tangent member
                let odd: Vec<usize> = (0..q).filter(|&lam| occ[lam] % 2 == 1).collect();
                assert_eq!(odd.len(), 1, "unique member tangent to the line");
                let lam = Fe(odd[0] as u16);
                if lam == Fe::ZERO {
                    assert_eq!(
                        point_labels[trace as usize],
                        PointLabel::External,
                        "cone tangents have external trace"
                    );
                    LineLabel::ConeTangent
                } else if point_labels[trace as usize] == PointLabel::Internal {
                    LineLabel::TangentInternal(lam)
                } else {
                    LineLabel::TangentExternal(lam)
                }
            };
            line_labels[l as usize] = Some(label);
        }
        let line_labels: Vec<LineLabel> = line_labels.into_iter().map(Option::unwrap).collect();

        let pencil = Pencil {
            geo,
            pi,
            vertex,
            conic,
            point_labels,
            line_labels,
        };
        pencil.check_censuses();
        pencil
    }

    /// Closed-form censuses for every label class; violations mean the
    /// classification itself went wrong, so this runs at construction.
    fn check_censuses(&self) {
        let f = self.field();
        let q = f.q() as u64;
        let mut point_census: std::collections::HashMap<PointLabel, u64> =
            std::collections::HashMap::new();
        for &lab in &self.point_labels {
            *point_census.entry(lab).or_insert(0) += 1;
        }
        assert_eq!(point_census[&PointLabel::Vertex], 1);
        assert_eq!(point_census[&PointLabel::Conic], q + 1);
        assert_eq!(point_census[&PointLabel::Internal], q * (q - 1) / 2);
        assert_eq!(point_census[&PointLabel::External], q * (q + 1) / 2);
        assert_eq!(point_census[&PointLabel::ConeSmooth], q * q - 1);
        for lam in f.enumerate() {
            if lam == Fe::ZERO {
                continue;
            }
            let expect = if f.is_square(lam) { q * q + q } else { q * q - q };
            assert_eq!(point_census[&PointLabel::Quadric(lam)], expect);
        }

        let mut line_census: std::collections::HashMap<LineLabel, u64> =
            std::collections::HashMap::new();
        for &lab in &self.line_labels {
            *line_census.entry(lab).or_insert(0) += 1;
        }
        assert_eq!(line_census[&LineLabel::PiTangent], q + 1);
        assert_eq!(line_census[&LineLabel::PiExternal], q * (q - 1) / 2);
        assert_eq!(line_census[&LineLabel::PiSecant], q * (q + 1) / 2);
        assert_eq!(line_census[&LineLabel::ConeGenerator], q + 1);
        assert_eq!(line_census[&LineLabel::VertexInternal], q * (q - 1) / 2);
        assert_eq!(line_census[&LineLabel::VertexExternal], q * (q + 1) / 2);
        assert_eq!(line_census[&LineLabel::ConeTangent], q * q * q - q);
        assert_eq!(line_census[&LineLabel::FullSecant], q * q * q - q);
        for lam in f.enumerate() {
            if lam == Fe::ZERO {
                continue;
            }
            if f.is_square(lam) {
                assert_eq!(line_census[&LineLabel::Regulus(lam)], 2 * (q + 1));
            } else {
                assert!(!line_census.contains_key(&LineLabel::Regulus(lam)));
            }
            assert_eq!(
                line_census[&LineLabel::TangentInternal(lam)],
                (q * q * q - q) / 2
            );
            assert_eq!(
                line_census[&LineLabel::TangentExternal(lam)],
                (q * q * q - q) / 2
            );
        }
    }

    pub fn geometry(&self) -> &Geometry {
        &self.geo
    }

    pub fn field(&self) -> &Field {
        self.geo.field()
    }

    /// The base plane pi: X4 = 0.
    pub fn base_plane(&self) -> PlaneId {
        self.pi
    }

    /// U4, the cone vertex.
    pub fn vertex(&self) -> PointId {
        self.vertex
    }

    /// The base conic, sorted by point id.
    pub fn conic(&self) -> &[PointId] {
        &self.conic
    }

    pub fn point_label(&self, p: PointId) -> PointLabel {
        self.point_labels[p as usize]
    }

    pub fn line_label(&self, l: LineId) -> LineLabel {
        self.line_labels[l as usize]
    }

    pub fn point_labels(&self) -> &[PointLabel] {
        &self.point_labels
    }

    pub fn line_labels(&self) -> &[LineLabel] {
        &self.line_labels
    }

    pub fn eval_quadric(&self, lam: Fe, v: &[Fe; 4]) -> Fe {
        let f = self.field();
        let mut acc = f.sub(f.mul(v[0], v[2]), f.mul(v[1], v[1]));
        acc = f.add(acc, f.mul(lam, f.mul(v[3], v[3])));
        acc
    }

    pub fn on_member(&self, lam: Fe, p: PointId) -> bool {
        self.eval_quadric(lam, self.geo.point(p)) == Fe::ZERO
    }

    pub fn member_kind(&self, lam: Fe) -> MemberKind {
        if lam == Fe::ZERO {
            MemberKind::Cone
        } else if self.field().is_square(lam) {
            MemberKind::Hyperbolic
        } else {
            MemberKind::Elliptic
        }
    }

    /// The parameter of the unique member through an off-pi point.
    pub fn lambda_star(&self, p: PointId) -> Option<Fe> {
        match self.point_labels[p as usize] {
            PointLabel::Vertex | PointLabel::ConeSmooth => Some(Fe::ZERO),
            PointLabel::Quadric(lam) => Some(lam),
            _ => None,
        }
    }

    /// The pi-trace of an off-pi point other than the vertex.
    pub fn trace(&self, p: PointId) -> Option<PointId> {
        if p == self.vertex || self.geo.point_on_plane(p, self.pi) {
            return None;
        }
        let l = self
            .geo
            .line_through(self.vertex, p)
            .expect("distinct points");
        self.geo
            .points_on_line(l)
            .iter()
            .copied()
            .find(|&t| self.geo.point_on_plane(t, self.pi))
    }

    pub fn point_type(&self, p: PointId) -> Option<PointType> {
        let t = self.trace(p)?;
        Some(match self.point_labels[t as usize] {
            PointLabel::Conic => PointType::TraceConic,
            PointLabel::Internal => PointType::TraceInternal,
            PointLabel::External => PointType::TraceExternal,
            other => unreachable!("trace is a pi point, got {other:?}"),
        })
    }

    pub fn member_points(&self, lam: Fe) -> BitSet {
        let mut out = BitSet::new(self.geo.n_points());
        for p in 0..self.geo.n_points() {
            if self.on_member(lam, p as PointId) {
                out.insert(p);
            }
        }
        out
    }

    /// Lines fully contained in Q_lam: the generators of the cone, the two
    /// reguli of a hyperbolic member, none for an elliptic one.
    pub fn member_lines(&self, lam: Fe) -> BitSet {
        let mut out = BitSet::new(self.geo.n_lines());
        for l in 0..self.geo.n_lines() {
            if self.line_member_count(lam, l as LineId) == self.field().q() as usize + 1 {
                out.insert(l);
            }
        }
        out
    }

    /// |l n Q_lam| as a point count (q+1 exactly when contained).
    pub fn line_member_count(&self, lam: Fe, l: LineId) -> usize {
        self.geo
            .points_on_line(l)
            .iter()
            .filter(|&&p| self.on_member(lam, p))
            .count()
    }

    /// Polarity of the nondegenerate member Q_lam, as a symmetric matrix.
    pub fn polarity_matrix(&self, lam: Fe) -> Result<Mat4> {
        if lam == Fe::ZERO {
            return Err(Error::DegeneratePolarity);
        }
        let f = self.field();
        let one = f.one();
        let two = f.from_int(2);
        let z = Fe::ZERO;
        Ok(Mat4([
            [z, z, one, z],
            [z, f.neg(two), z, z],
            [one, z, z, z],
            [z, z, z, f.mul(two, lam)],
        ]))
    }

    pub fn polar_plane(&self, lam: Fe, p: PointId) -> Result<PlaneId> {
        let a = self.polarity_matrix(lam)?;
        let d = a.apply(self.field(), self.geo.point(p));
        self.geo.plane_id(d).ok_or(Error::DegeneratePolarity)
    }

    pub fn polar_point(&self, lam: Fe, pl: PlaneId) -> Result<PointId> {
        let a = self.polarity_matrix(lam)?;
        let inv = a.inverse(self.field())?;
        let v = inv.apply(self.field(), self.geo.plane(pl));
        self.geo.point_id(v).ok_or(Error::DegeneratePolarity)
    }

    /// Square class of Q_lam_bar evaluated at a point off that member;
    /// None on the member. Well defined projectively because rescaling the
    /// representative multiplies the value by a square.
    pub fn square_class_off_member(&self, lam_bar: Fe, p: PointId) -> Option<bool> {
        let v = self.eval_quadric(lam_bar, self.geo.point(p));
        if v == Fe::ZERO {
            None
        } else {
            Some(self.field().is_square(v))
        }
    }

    /// Splits the complement of the elliptic member Q_lam_bar into the
    /// points where the form is a nonzero square (O_s) and a non-square
    /// (O_n); each half has (q^3+q)/2 points.
    pub fn sign_partition(&self, lam_bar: Fe) -> Result<(BitSet, BitSet)> {
        if self.member_kind(lam_bar) != MemberKind::Elliptic {
            return Err(Error::NotNonSquare(format!(
                "sign partition needs an elliptic member, lam = {} is not",
                self.field().fe_string(lam_bar)
            )));
        }
        let n = self.geo.n_points();
        let mut os = BitSet::new(n);
        let mut on = BitSet::new(n);
        for p in 0..n {
            match self.square_class_off_member(lam_bar, p as PointId) {
                Some(true) => os.insert(p),
                Some(false) => on.insert(p),
                None => {}
            }
        }
        let half = (self.field().q().pow(3) + self.field().q()) as usize / 2;
        assert_eq!(os.count(), half);
        assert_eq!(on.count(), half);
        Ok((os, on))
    }

    /// The complementary line families swapped by the derivation: A joins
    /// the vertex side (generators, vertex-internal, pi-secant, full
    /// secant), B the tangent side. Both have q^3 + q^2 + 1 lines.
    pub fn swap_sets(&self) -> (BitSet, BitSet) {
        let n = self.geo.n_lines();
        let mut a = BitSet::new(n);
        let mut b = BitSet::new(n);
        for (l, &lab) in self.line_labels.iter().enumerate() {
            match lab {
                LineLabel::ConeGenerator
                | LineLabel::VertexInternal
                | LineLabel::PiSecant
                | LineLabel::FullSecant => a.insert(l),
                LineLabel::PiTangent
                | LineLabel::PiExternal
                | LineLabel::VertexExternal
                | LineLabel::ConeTangent => b.insert(l),
                _ => {}
            }
        }
        let expect = (self.field().q().pow(3) + self.field().q().pow(2) + 1) as usize;
        assert_eq!(a.count(), expect);
        assert_eq!(b.count(), expect);
        (a, b)
    }

    /// The two rulings of a hyperbolic member: lines in one ruling are
    /// pairwise skew, lines of opposite rulings meet.
    pub fn rulings(&self, lam: Fe) -> Result<(Vec<LineId>, Vec<LineId>)> {
        if self.member_kind(lam) != MemberKind::Hyperbolic {
            return Err(Error::BadInput(format!(
                "rulings exist only on hyperbolic members, lam = {} is not square",
                self.field().fe_string(lam)
            )));
        }
        let all: Vec<LineId> = (0..self.geo.n_lines() as LineId)
            .filter(|&l| self.line_labels[l as usize] == LineLabel::Regulus(lam))
            .collect();
        let first = all[0];
        let (mut r1, mut r2) = (Vec::new(), Vec::new());
        for &l in &all {
            if l == first || !self.geo.lines_meet(first, l) {
                r1.push(l);
            } else {
                r2.push(l);
            }
        }
        let q = self.field().q() as usize;
        assert_eq!(r1.len(), q + 1);
        assert_eq!(r2.len(), q + 1);
        Ok((r1, r2))
    }

    pub fn plane_category(&self, pl: PlaneId) -> PlaneCategory {
        if pl == self.pi {
            return PlaneCategory::Base;
        }
        let hits = self
            .conic
            .iter()
            .filter(|&&p| self.geo.point_on_plane(p, pl))
            .count() as u8;
        if self.geo.point_on_plane(self.vertex, pl) {
            PlaneCategory::OnVertex { conic_hits: hits }
        } else {
            PlaneCategory::OffVertex { conic_hits: hits }
        }
    }

    /// Counts of the eight plain line families through a point.
    pub fn tally_through_point(&self, p: PointId) -> [u32; FAMILY_COUNT] {
        let mut out = [0u32; FAMILY_COUNT];
        for &l in self.geo.lines_through_point(p) {
            if let Some(i) = family_index(self.line_labels[l as usize]) {
                out[i] += 1;
            }
        }
        out
    }

    /// Counts of the eight plain line families inside a plane.
    pub fn tally_in_plane(&self, pl: PlaneId) -> [u32; FAMILY_COUNT] {
        let mut out = [0u32; FAMILY_COUNT];
        for &l in self.geo.lines_in_plane(pl) {
            if let Some(i) = family_index(self.line_labels[l as usize]) {
                out[i] += 1;
            }
        }
        out
    }

    /// Closed-form family tally through a point, keyed by its label (and
    /// for off-pi points by the member class through them).
    pub fn expected_point_tally(&self, p: PointId) -> [u32; FAMILY_COUNT] {
        let q = self.field().q();
        match self.point_labels[p as usize] {
            PointLabel::Vertex => [0, 0, 0, 0, q + 1, q * (q - 1) / 2, q * (q + 1) / 2, 0],
            PointLabel::Conic => [1, 0, q, 0, 1, 0, 0, q * q - q],
            PointLabel::Internal => [0, (q + 1) / 2, (q + 1) / 2, 0, 0, 1, 0, 0],
            PointLabel::External => [2, (q - 1) / 2, (q - 1) / 2, 2 * (q - 1), 0, 0, 1, 0],
            PointLabel::ConeSmooth => [0, 0, 0, q, 1, 0, 0, q],
            PointLabel::Quadric(lam) => {
                if self.field().is_square(lam) {
                    [0, 0, 0, 2 * (q - 1), 0, 0, 1, q - 1]
                } else {
                    [0, 0, 0, 0, 0, 1, 0, q + 1]
                }
            }
        }
    }

    /// Closed-form family tally inside a plane, keyed by its category.
    pub fn expected_plane_tally(&self, pl: PlaneId) -> [u32; FAMILY_COUNT] {
        let q = self.field().q();
        match self.plane_category(pl) {
            PlaneCategory::Base => [q + 1, q * (q - 1) / 2, q * (q + 1) / 2, 0, 0, 0, 0, 0],
            PlaneCategory::OnVertex { conic_hits: 0 } => {
                [0, 1, 0, 0, 0, (q + 1) / 2, (q + 1) / 2, 0]
            }
            PlaneCategory::OnVertex { conic_hits: 1 } => [1, 0, 0, q * q - q, 1, 0, q, 0],
            PlaneCategory::OnVertex { conic_hits: 2 } => {
                [0, 0, 1, 0, 2, (q - 1) / 2, (q - 1) / 2, 2 * (q - 1)]
            }
            PlaneCategory::OffVertex { conic_hits: 0 } => [0, 1, 0, q + 1, 0, 0, 0, 0],
            PlaneCategory::OffVertex { conic_hits: 1 } => [1, 0, 0, q, 0, 0, 0, q],
            PlaneCategory::OffVertex { conic_hits: 2 } => [0, 0, 1, q - 1, 0, 0, 0, 2 * (q - 1)],
            other => unreachable!("a plane meets the conic in at most 2 points, got {other:?}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Geometry;
    use crate::gf::Field;

    fn pencil(q: u64) -> Pencil {
        Pencil::new(Geometry::new(Field::from_order(q).unwrap()).unwrap())
    }

    #[test]
    fn conic_is_base_of_every_member() {
        let pc = pencil(9);
        let f = pc.field();
        assert_eq!(pc.conic().len(), 10);
        for lam in f.enumerate() {
            for &p in pc.conic() {
                assert!(pc.on_member(lam, p));
            }
            // the member cuts pi exactly in the conic
            for p in 0..pc.geometry().n_points() as u32 {
                if pc.geometry().point_on_plane(p, pc.base_plane()) {
                    assert_eq!(
                        pc.on_member(lam, p),
                        pc.conic().binary_search(&p).is_ok()
                    );
                }
            }
        }
    }

    #[test]
    fn member_kinds_match_exhaustive_point_counts() {
        for q in [5u64, 9, 13] {
            let pc = pencil(q);
            let f = pc.field();
            let mut kinds = std::collections::HashMap::new();
            for lam in f.enumerate() {
                let kind = pc.member_kind(lam);
                assert_eq!(
                    pc.member_points(lam).count(),
                    kind.point_count(q),
                    "member size at q = {q}"
                );
                *kinds.entry(kind).or_insert(0u64) += 1;
            }
            assert_eq!(kinds[&MemberKind::Cone], 1);
            assert_eq!(kinds[&MemberKind::Hyperbolic], (q - 1) / 2);
            assert_eq!(kinds[&MemberKind::Elliptic], (q - 1) / 2);
        }
    }

    #[test]
    fn lambda_star_is_the_unique_member() {
        let pc = pencil(5);
        let f = pc.field();
        for p in 0..pc.geometry().n_points() as u32 {
            match pc.lambda_star(p) {
                Some(star) => {
                    for lam in f.enumerate() {
                        assert_eq!(pc.on_member(lam, p), lam == star);
                    }
                }
                None => {
                    // pi points: on every member (conic) or none
                    let on: Vec<bool> = f.enumerate().map(|lam| pc.on_member(lam, p)).collect();
                    assert!(on.iter().all(|&b| b) || on.iter().all(|&b| !b));
                }
            }
        }
    }

    #[test]
    fn vertex_is_only_on_the_cone() {
        let pc = pencil(5);
        let f = pc.field();
        for lam in f.enumerate() {
            assert_eq!(pc.on_member(lam, pc.vertex()), lam == Fe::ZERO);
        }
        assert_eq!(pc.lambda_star(pc.vertex()), Some(Fe::ZERO));
    }

    #[test]
    fn polarity_is_an_involution() {
        let pc = pencil(9);
        let f = pc.field();
        for lam in f.enumerate().filter(|&l| l != Fe::ZERO) {
            for p in (0..pc.geometry().n_points() as u32).step_by(7) {
                let pl = pc.polar_plane(lam, p).unwrap();
                assert_eq!(pc.polar_point(lam, pl).unwrap(), p);
                // incidence with the polar plane is symmetric
                let r = (p + 11) % pc.geometry().n_points() as u32;
                let pr = pc.polar_plane(lam, r).unwrap();
                assert_eq!(
                    pc.geometry().point_on_plane(p, pr),
                    pc.geometry().point_on_plane(r, pl)
                );
            }
        }
        assert!(matches!(
            pc.polar_plane(Fe::ZERO, 0),
            Err(Error::DegeneratePolarity)
        ));
    }

    #[test]
    fn polar_plane_of_member_point_is_tangent() {
        let pc = pencil(5);
        let f = pc.field();
        for lam in f.enumerate().filter(|&l| l != Fe::ZERO) {
            let expect = match pc.member_kind(lam) {
                MemberKind::Hyperbolic => 2 * 5 + 1,
                MemberKind::Elliptic => 1,
                MemberKind::Cone => unreachable!(),
            };
            for p in pc.member_points(lam).iter_ones() {
                let pl = pc.polar_plane(lam, p as u32).unwrap();
                assert!(pc.geometry().point_on_plane(p as u32, pl));
                let on_member_in_plane = (0..pc.geometry().n_points() as u32)
                    .filter(|&r| {
                        pc.geometry().point_on_plane(r, pl) && pc.on_member(lam, r)
                    })
                    .count();
                assert_eq!(on_member_in_plane, expect, "tangent plane section");
            }
        }
    }

    #[test]
    fn point_type_tracks_member_class() {
        for q in [5u64, 9] {
            let pc = pencil(q);
            let f = pc.field();
            for p in 0..pc.geometry().n_points() as u32 {
                let ty = pc.point_type(p);
                match pc.point_label(p) {
                    PointLabel::ConeSmooth => assert_eq!(ty, Some(PointType::TraceConic)),
                    PointLabel::Quadric(lam) if f.is_square(lam) => {
                        assert_eq!(ty, Some(PointType::TraceExternal))
                    }
                    PointLabel::Quadric(_) => assert_eq!(ty, Some(PointType::TraceInternal)),
                    _ => assert_eq!(ty, None),
                }
            }
        }
    }

    #[test]
    fn member_lines_are_rulings_or_generators() {
        let pc = pencil(5);
        let f = pc.field();
        for lam in f.enumerate() {
            let lines = pc.member_lines(lam);
            match pc.member_kind(lam) {
                MemberKind::Cone => {
                    assert_eq!(lines.count(), 6);
                    for l in lines.iter_ones() {
                        assert_eq!(pc.line_label(l as u32), LineLabel::ConeGenerator);
                    }
                }
                MemberKind::Hyperbolic => {
                    assert_eq!(lines.count(), 12);
                    for l in lines.iter_ones() {
                        assert_eq!(pc.line_label(l as u32), LineLabel::Regulus(lam));
                    }
                }
                MemberKind::Elliptic => assert!(lines.is_empty()),
            }
        }
    }

    #[test]
    fn rulings_split_into_skew_halves() {
        for q in [5u64, 9] {
            let pc = pencil(q);
            let f = pc.field();
            for lam in f.enumerate().filter(|&l| l != Fe::ZERO && f.is_square(l)) {
                let (r1, r2) = pc.rulings(lam).unwrap();
                assert_eq!(r1.len(), q as usize + 1);
                assert_eq!(r2.len(), q as usize + 1);
                for (i, &a) in r1.iter().enumerate() {
                    for &b in &r1[i + 1..] {
                        assert!(!pc.geometry().lines_meet(a, b), "within a ruling: skew");
                    }
                    for &b in &r2 {
                        assert!(pc.geometry().lines_meet(a, b), "across rulings: meet");
                    }
                }
            }
            let nonsq = pc.field().distinguished_nonsquare();
            assert!(pc.rulings(nonsq).is_err());
        }
    }

    #[test]
    fn full_secants_meet_every_member_once() {
        let pc = pencil(5);
        let f = pc.field();
        for l in 0..pc.geometry().n_lines() as u32 {
            if pc.line_label(l) != LineLabel::FullSecant {
                continue;
            }
            for lam in f.enumerate() {
                let hits = pc.line_member_count(lam, l);
                // one conic point plus one more off pi, except the conic
                // point's own member contribution
                let on_conic = pc
                    .geometry()
                    .points_on_line(l)
                    .iter()
                    .filter(|&&p| pc.point_label(p) == PointLabel::Conic)
                    .count();
                assert_eq!(on_conic, 1);
                assert_eq!(hits, 2, "conic point plus exactly one off-pi point");
            }
        }
    }

    #[test]
    fn tangent_labels_are_tangent() {
        let pc = pencil(5);
        let f = pc.field();
        for l in 0..pc.geometry().n_lines() as u32 {
            match pc.line_label(l) {
                LineLabel::TangentInternal(lam) | LineLabel::TangentExternal(lam) => {
                    assert_eq!(pc.line_member_count(lam, l), 1);
                    // and secant or external to every other nondegenerate member
                    for mu in f.enumerate().filter(|&m| m != lam && m != Fe::ZERO) {
                        assert!(pc.line_member_count(mu, l) % 2 == 0);
                    }
                }
                LineLabel::ConeTangent => {
                    assert_eq!(pc.line_member_count(Fe::ZERO, l), 1);
                }
                LineLabel::Regulus(lam) => {
                    assert_eq!(pc.line_member_count(lam, l), 6);
                    // tangent to every other member at its conic point
                    for mu in f.enumerate().filter(|&m| m != lam) {
                        assert_eq!(pc.line_member_count(mu, l), 1);
                    }
                }
                _ => {}
            }
        }
    }

    #[test]
    fn vertex_lines_vs_members() {
        let pc = pencil(5);
        let f = pc.field();
        for l in 0..pc.geometry().n_lines() as u32 {
            let lab = pc.line_label(l);
            if !matches!(
                lab,
                LineLabel::VertexInternal | LineLabel::VertexExternal
            ) {
                continue;
            }
            for lam in f.enumerate().filter(|&m| m != Fe::ZERO) {
                let hits = pc.line_member_count(lam, l);
                let secant_to = if f.is_square(lam) {
                    LineLabel::VertexExternal
                } else {
                    LineLabel::VertexInternal
                };
                assert_eq!(hits, if lab == secant_to { 2 } else { 0 });
            }
        }
    }

    #[test]
    fn tallies_match_closed_forms() {
        for q in [5u64, 9] {
            let pc = pencil(q);
            for p in 0..pc.geometry().n_points() as u32 {
                assert_eq!(
                    pc.tally_through_point(p),
                    pc.expected_point_tally(p),
                    "point tally at q = {q}, p = {p}"
                );
            }
            for pl in 0..pc.geometry().n_planes() as u32 {
                assert_eq!(
                    pc.tally_in_plane(pl),
                    pc.expected_plane_tally(pl),
                    "plane tally at q = {q}, pl = {pl}"
                );
            }
        }
    }

    #[test]
    fn plane_category_census() {
        let pc = pencil(5);
        let q = 5u64;
        let mut census = std::collections::HashMap::new();
        for pl in 0..pc.geometry().n_planes() as u32 {
            *census.entry(pc.plane_category(pl)).or_insert(0u64) += 1;
        }
        assert_eq!(census[&PlaneCategory::Base], 1);
        // planes through U4 other than pi correspond to lines of pi
        assert_eq!(
            census[&PlaneCategory::OnVertex { conic_hits: 1 }],
            q + 1
        );
        assert_eq!(
            census[&PlaneCategory::OnVertex { conic_hits: 0 }],
            q * (q - 1) / 2
        );
        assert_eq!(
            census[&PlaneCategory::OnVertex { conic_hits: 2 }],
            q * (q + 1) / 2
        );
        // pi is off the vertex too but classified as Base, so the three
        // off-vertex kinds partition the remaining q^3 - 1 planes
        let off: u64 = census
            .iter()
            .filter(|(k, _)| matches!(k, PlaneCategory::OffVertex { .. }))
            .map(|(_, &v)| v)
            .sum();
        assert_eq!(off, q * q * q - 1);
    }

    #[test]
    fn sign_partition_halves_the_complement() {
        for q in [5u64, 9, 13] {
            let pc = pencil(q);
            let f = pc.field();
            let lam_bar = f.distinguished_nonsquare();
            let (os, on) = pc.sign_partition(lam_bar).unwrap();
            assert_eq!(os.count(), ((q * q * q + q) / 2) as usize);
            assert_eq!(on.count(), os.count());
            assert!(os.is_disjoint(&on));
            assert!(!os.contains(pc.vertex() as usize) || !on.contains(pc.vertex() as usize));
            // q = 1 mod 4 throughout: externals sit in O_s, internals in
            // O_n, and the vertex in O_n
            assert_eq!(q % 4, 1);
            assert!(on.contains(pc.vertex() as usize));
            for p in 0..pc.geometry().n_points() as u32 {
                match pc.point_label(p) {
                    PointLabel::External => assert!(os.contains(p as usize)),
                    PointLabel::Internal => assert!(on.contains(p as usize)),
                    _ => {}
                }
            }
            // a square member parameter must be rejected
            let sq = f
                .enumerate()
                .find(|&l| l != Fe::ZERO && f.is_square(l))
                .unwrap();
            assert!(pc.sign_partition(sq).is_err());
        }
    }

    #[test]
    fn swap_sets_partition_the_plain_families() {
        for q in [5u64, 9] {
            let pc = pencil(q);
            let (a, b) = pc.swap_sets();
            let expect = (q * q * q + q * q + 1) as usize;
            assert_eq!(a.count(), expect);
            assert_eq!(b.count(), expect);
            assert!(a.is_disjoint(&b));
            let rest = pc.geometry().n_lines() - 2 * expect;
            assert_eq!(rest as u64, (q * q - 1) + (q - 1) * (q * q * q - q));
        }
    }
}
