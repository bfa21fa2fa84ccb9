//! Cameron-Liebler line classes built from the pencil: the Bruen-Drudge
//! class of an elliptic member, the classical tangent plane derivation, and
//! the family swap that yields a class invariant under the conic stabiliser.
//! Also carries the character machinery, a regular spread sampler and the
//! comparison against the known classes with the same parameter.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::bitset::BitSet;
use crate::geometry::{Geometry, LineId, Mat4, PlaneId, PointId};
use crate::gf::{Fe, Field};
use crate::klein::meeting_counts;
use crate::pencil::{LineLabel, MemberKind, Pencil, PointLabel};
use crate::{Error, Result};

/// The two halves of the tangent lines of an elliptic member. A tangent
/// line evaluates the member form to a single square class off its tangency
/// point, so the class of any off point is an invariant of the line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Square,
    NonSquare,
}

impl Side {
    pub fn as_str(self) -> &'static str {
        match self {
            Side::Square => "os",
            Side::NonSquare => "on",
        }
    }

    pub fn parse(s: &str) -> Result<Side> {
        match s {
            "os" | "square" => Ok(Side::Square),
            "on" | "nonsquare" => Ok(Side::NonSquare),
            other => Err(Error::BadInput(format!(
                "unknown side {other:?}, expected os or on"
            ))),
        }
    }
}

/// x = (q^2+1)/2, the parameter shared by every class built in this module.
pub fn bruen_drudge_x(q: u64) -> u64 {
    (q * q + 1) / 2
}

/// Lines of PG(3,q) sorted against an elliptic member: secants meet it in
/// two points, externals in none, and the tangents split by the square
/// class their off points share.
pub struct LinePartition {
    pub tangents_square: BitSet,
    pub tangents_nonsquare: BitSet,
    pub secants: BitSet,
    pub externals: BitSet,
}

impl LinePartition {
    pub fn tangents(&self, side: Side) -> &BitSet {
        match side {
            Side::Square => &self.tangents_square,
            Side::NonSquare => &self.tangents_nonsquare,
        }
    }
}

pub fn partition_lines(pc: &Pencil, lam_bar: Fe) -> Result<LinePartition> {
    if pc.member_kind(lam_bar) != MemberKind::Elliptic {
        return Err(Error::NotNonSquare(format!(
            "the line partition needs an elliptic member, lam = {} is not",
            pc.field().fe_string(lam_bar)
        )));
    }
    let geo = pc.geometry();
    let n = geo.n_lines();
    let mut part = LinePartition {
        tangents_square: BitSet::new(n),
        tangents_nonsquare: BitSet::new(n),
        secants: BitSet::new(n),
        externals: BitSet::new(n),
    };
    for l in 0..n as LineId {
        match pc.line_member_count(lam_bar, l) {
            0 => part.externals.insert(l as usize),
            2 => part.secants.insert(l as usize),
            1 => {
                let mut class = None;
                for &p in geo.points_on_line(l) {
                    if let Some(sq) = pc.square_class_off_member(lam_bar, p) {
                        // all q off points of a tangent line share one class
                        assert!(class.is_none() || class == Some(sq));
                        class = Some(sq);
                    }
                }
                if class.expect("a tangent line has q points off the member") {
                    part.tangents_square.insert(l as usize)
                } else {
                    part.tangents_nonsquare.insert(l as usize)
                }
            }
            c => unreachable!("a line meets an elliptic quadric at most twice, got {c}"),
        }
    }
    let q = pc.field().q() as usize;
    let half_tangents = (q + 1) * (q * q + 1) / 2;
    let chords = q * q * (q * q + 1) / 2;
    assert_eq!(part.tangents_square.count(), half_tangents);
    assert_eq!(part.tangents_nonsquare.count(), half_tangents);
    assert_eq!(part.secants.count(), chords);
    assert_eq!(part.externals.count(), chords);
    Ok(part)
}

/// The Bruen-Drudge class: the secants of the member together with one half
/// of its tangents.
pub fn build_bruen_drudge(pc: &Pencil, lam_bar: Fe, side: Side) -> Result<BitSet> {
    let part = partition_lines(pc, lam_bar)?;
    let mut class = part.tangents(side).clone();
    class.union_with(&part.secants);
    let q = pc.field().q() as u64;
    assert_eq!(class.count() as u64, bruen_drudge_x(q) * (q * q + q + 1));
    Ok(class)
}

/// The complementary presentation: one half of the tangents together with
/// the external lines. Same parameter, complement of the other side's
/// secant form.
pub fn build_tangents_externals(pc: &Pencil, lam_bar: Fe, side: Side) -> Result<BitSet> {
    let part = partition_lines(pc, lam_bar)?;
    let mut class = part.tangents(side).clone();
    class.union_with(&part.externals);
    let q = pc.field().q() as u64;
    assert_eq!(class.count() as u64, bruen_drudge_x(q) * (q * q + q + 1));
    Ok(class)
}

/// Replaces a subset of a line set by a disjoint set of the same size.
/// Pure bookkeeping; whether the result is again Cameron-Liebler depends on
/// the count identity checked in check_swap_preconditions.
pub fn derive(base: &BitSet, remove: &BitSet, add: &BitSet) -> Result<BitSet> {
    if remove.len() != base.len() || add.len() != base.len() {
        return Err(Error::UniverseMismatch(format!(
            "swap sets live on {} and {} lines, the class on {}",
            remove.len(),
            add.len(),
            base.len()
        )));
    }
    if !remove.is_subset(base) {
        return Err(Error::Derivation(
            "the removed lines must all lie in the class".into(),
        ));
    }
    if !add.is_disjoint(base) {
        return Err(Error::Derivation(
            "the added lines must avoid the class".into(),
        ));
    }
    if remove.count() != add.count() {
        return Err(Error::Derivation(format!(
            "swap sizes differ: removing {}, adding {}",
            remove.count(),
            add.count()
        )));
    }
    let mut out = base.clone();
    out.difference_with(remove);
    out.union_with(add);
    Ok(out)
}

/// Swapping A out of a class for B keeps the Cameron-Liebler identity iff
/// every line l satisfies |B_l| - |A_l| = q^2 (chi_B(l) - chi_A(l)), where
/// the meeting counts include l itself. Checked exhaustively.
pub fn check_swap_preconditions(
    pc: &Pencil,
    class: &BitSet,
    a: &BitSet,
    b: &BitSet,
) -> Result<()> {
    if !a.is_subset(class) {
        return Err(Error::Derivation(
            "the swap family A must lie inside the class".into(),
        ));
    }
    if !b.is_disjoint(class) {
        return Err(Error::Derivation(
            "the swap family B must avoid the class".into(),
        ));
    }
    if a.count() != b.count() {
        return Err(Error::Derivation(format!(
            "swap families differ in size: {} vs {}",
            a.count(),
            b.count()
        )));
    }
    let geo = pc.geometry();
    let q2 = (pc.field().q() as i64).pow(2);
    let ca = meeting_counts(geo, a);
    let cb = meeting_counts(geo, b);
    for l in 0..geo.n_lines() {
        let want = q2 * (b.contains(l) as i64 - a.contains(l) as i64);
        let got = cb[l] as i64 - ca[l] as i64;
        if got != want {
            return Err(Error::Derivation(format!(
                "line {l} breaks the swap count identity: |B_l| - |A_l| = {got}, needs {want}"
            )));
        }
    }
    Ok(())
}

/// The pi line cut by the plane spanned by the vertex and l. Defined for
/// lines off the vertex and outside pi.
fn vertex_shadow(pc: &Pencil, l: LineId) -> LineId {
    let geo = pc.geometry();
    let pl = geo
        .plane_through(l, pc.vertex())
        .expect("the line avoids the vertex");
    *geo.lines_in_plane(pl)
        .iter()
        .find(|&&m| geo.line_in_plane(m, pc.base_plane()))
        .expect("every plane cuts pi in a line")
}

/// Closed forms for the number of swap family members meeting each line,
/// the line itself included, keyed by its pencil label. For the tangent
/// labels the count depends on whether the vertex shadow is a secant or an
/// external of the conic; shadows of tangent lines are never conic
/// tangents, those planes consist of generators, cone tangents, vertex
/// lines and ruling lines only.
pub fn expected_swap_counts(pc: &Pencil, l: LineId) -> (u64, u64) {
    let q = pc.field().q() as u64;
    let a_side = |base: u64| (q * q + base, base);
    let b_side = |base: u64| (base, q * q + base);
    match pc.line_label(l) {
        LineLabel::Regulus(_) => (2 * q * q - q + 1, 2 * q * q - q + 1),
        LineLabel::TangentInternal(_) | LineLabel::TangentExternal(_) => {
            let external_kind = matches!(pc.line_label(l), LineLabel::TangentExternal(_));
            let secant_shadow = match pc.line_label(vertex_shadow(pc, l)) {
                LineLabel::PiSecant => true,
                LineLabel::PiExternal => false,
                other => unreachable!("impossible tangent shadow {other:?}"),
            };
            let v = q * q + q + secant_shadow as u64 + external_kind as u64;
            (v, v)
        }
        LineLabel::PiTangent => b_side((3 * q * q - q + 2) / 2),
        LineLabel::PiExternal => b_side((q + 1) * (q + 1) / 2),
        LineLabel::PiSecant => a_side((3 * q * q - 2 * q + 3) / 2),
        LineLabel::ConeTangent => b_side((2 * q * q - q + 3) / 2),
        LineLabel::ConeGenerator => a_side((3 * q * q - q + 2) / 2),
        LineLabel::VertexInternal => a_side((q + 1) * (q + 1) / 2),
        LineLabel::VertexExternal => b_side((3 * q * q - 2 * q + 3) / 2),
        LineLabel::FullSecant => a_side((2 * q * q - q + 3) / 2),
    }
}

/// The canonical tangency point for the tangent plane derivation: the
/// member point with the smallest index. With the standard pencil this is
/// the conic point (0,0,1,0).
pub fn first_derived_base_point(pc: &Pencil, lam_bar: Fe) -> PointId {
    (0..pc.geometry().n_points() as PointId)
        .find(|&p| pc.on_member(lam_bar, p))
        .expect("an elliptic member has q^2+1 points")
}

/// The classical derivation: inside the tangent plane at one member point
/// trade the q^2 external lines for the q^2 secants through the point.
pub fn build_first_derived(pc: &Pencil, lam_bar: Fe, side: Side) -> Result<BitSet> {
    let part = partition_lines(pc, lam_bar)?;
    let geo = pc.geometry();
    let mut base = part.tangents(side).clone();
    base.union_with(&part.externals);
    let r = first_derived_base_point(pc, lam_bar);
    let rho = pc.polar_plane(lam_bar, r)?;
    let n = geo.n_lines();
    let mut remove = BitSet::new(n);
    for &l in geo.lines_in_plane(rho) {
        if part.externals.contains(l as usize) {
            remove.insert(l as usize);
        }
    }
    let mut add = BitSet::new(n);
    for &l in geo.lines_through_point(r) {
        if part.secants.contains(l as usize) {
            add.insert(l as usize);
        }
    }
    let q = pc.field().q() as usize;
    assert_eq!(remove.count(), q * q);
    assert_eq!(add.count(), q * q);
    derive(&base, &remove, &add)
}

/// The family swap. Start from the nonsquare side Bruen-Drudge class, whose
/// tangent half contains the cone generators, and swap the vertex side
/// families (generators, vertex-internal, pi-secant, full secants) for the
/// tangent side ones (pi-tangent, pi-external, vertex-external, cone
/// tangents). Needs q = 1 (mod 4) so that the external points of the conic
/// carry the square class and the familes sit on the right sides.
pub fn build_derived(pc: &Pencil, lam_bar: Fe) -> Result<BitSet> {
    let q = pc.field().q();
    if q % 4 != 1 {
        return Err(Error::Derivation(format!(
            "the family swap needs q = 1 (mod 4), q = {q} fails"
        )));
    }
    let class = build_bruen_drudge(pc, lam_bar, Side::NonSquare)?;
    let (a, b) = pc.swap_sets();
    check_swap_preconditions(pc, &class, &a, &b)?;
    derive(&class, &a, &b)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CharKind {
    Star,
    Plane,
}

impl CharKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CharKind::Star => "star",
            CharKind::Plane => "plane",
        }
    }

    pub fn parse(s: &str) -> Result<CharKind> {
        match s {
            "star" => Ok(CharKind::Star),
            "plane" => Ok(CharKind::Plane),
            other => Err(Error::BadInput(format!(
                "unknown character kind {other:?}, expected star or plane"
            ))),
        }
    }
}

/// Number of class lines through a point.
pub fn star_character(geo: &Geometry, class: &BitSet, p: PointId) -> u64 {
    geo.lines_through_point(p)
        .iter()
        .filter(|&&l| class.contains(l as usize))
        .count() as u64
}

/// Number of class lines inside a plane.
pub fn plane_character(geo: &Geometry, class: &BitSet, pl: PlaneId) -> u64 {
    geo.lines_in_plane(pl)
        .iter()
        .filter(|&&l| class.contains(l as usize))
        .count() as u64
}

/// Histogram of character values over all points or all planes.
pub fn character_histogram(geo: &Geometry, class: &BitSet, kind: CharKind) -> BTreeMap<u64, u64> {
    let n = match kind {
        CharKind::Star => geo.n_points(),
        CharKind::Plane => geo.n_planes(),
    };
    let mut hist = BTreeMap::new();
    for i in 0..n as u32 {
        let v = match kind {
            CharKind::Star => star_character(geo, class, i),
            CharKind::Plane => plane_character(geo, class, i),
        };
        *hist.entry(v).or_insert(0u64) += 1;
    }
    hist
}

pub fn value_set(geo: &Geometry, class: &BitSet, kind: CharKind) -> BTreeSet<u64> {
    character_histogram(geo, class, kind).into_keys().collect()
}

/// The six through-point values of the derived class, one per carrier
/// class: conic points, type I off points on the square and nonsquare
/// side, the bulk value, the external side value, and the member points
/// off the conic.
pub fn derived_star_formulas(q: u64) -> [u64; 6] {
    let h = q * (q + 1) / 2;
    [
        (q + 1) / 2,
        h - 2 * (q + 1),
        h - (q + 1),
        h,
        h + q + 1,
        q * q - (q + 3) / 2,
    ]
}

/// Carrier sizes matching derived_star_formulas position by position.
pub fn derived_star_carriers(q: u64) -> [u64; 6] {
    let ti_nonsquare = q * (q - 1) * (q - 5) / 4;
    let ti_square = q * (q - 1) * (q - 1) / 4;
    let te_half = (q * q * q - q) / 4;
    [
        q + 1,
        ti_square,
        ti_nonsquare,
        1 + q * (q - 1) / 2 + (q * q - 1) + te_half,
        q * (q + 1) / 2 + te_half,
        q * q - q,
    ]
}

/// The six in-plane values of the derived class, keyed by the class of the
/// plane's pole under the member polarity.
pub fn derived_plane_formulas(q: u64) -> [u64; 6] {
    let h = q * (q + 1) / 2;
    [
        (3 * q + 5) / 2,
        h - q,
        h + 1,
        h + q + 2,
        h + 2 * q + 3,
        q * q + (q + 1) / 2,
    ]
}

/// Carrier sizes matching derived_plane_formulas position by position.
pub fn derived_plane_carriers(q: u64) -> [u64; 6] {
    let ti_nonsquare = q * (q - 1) * (q - 5) / 4;
    let ti_square = q * (q - 1) * (q - 1) / 4;
    let te_half = (q * q * q - q) / 4;
    [
        q * q - q,
        q * (q + 1) / 2 + te_half,
        1 + q * (q - 1) / 2 + (q * q - 1) + te_half,
        ti_nonsquare,
        ti_square,
        q + 1,
    ]
}

fn attained(formulas: [u64; 6], carriers: [u64; 6]) -> BTreeSet<u64> {
    formulas
        .iter()
        .zip(carriers)
        .filter(|&(_, c)| c > 0)
        .map(|(&v, _)| v)
        .collect()
}

/// Values the derived class actually attains: formula values with a
/// nonempty carrier. At q = 5 the square side type I carrier is empty and
/// two collisions shrink the star set to {3, 15, 21}.
pub fn derived_star_values(q: u64) -> BTreeSet<u64> {
    attained(derived_star_formulas(q), derived_star_carriers(q))
}

/// In-plane counterpart; at q = 5 the set shrinks to {10, 16, 28}.
pub fn derived_plane_values(q: u64) -> BTreeSet<u64> {
    attained(derived_plane_formulas(q), derived_plane_carriers(q))
}

/// Through-point count of the derived class at one point, keyed by the
/// point's pencil label and, off the member, by its square class.
pub fn expected_derived_star(pc: &Pencil, lam_bar: Fe, p: PointId) -> u64 {
    let q = pc.field().q() as u64;
    let h = q * (q + 1) / 2;
    match pc.point_label(p) {
        PointLabel::Vertex => h,
        PointLabel::Conic => (q + 1) / 2,
        PointLabel::External => h + q + 1,
        PointLabel::Internal => h,
        PointLabel::ConeSmooth => h,
        PointLabel::Quadric(lam) => {
            if lam == lam_bar {
                return q * q - (q + 3) / 2;
            }
            let square_side = pc
                .square_class_off_member(lam_bar, p)
                .expect("the point avoids the member");
            match (pc.field().is_square(lam), square_side) {
                (true, false) => h + q + 1,
                (true, true) => h,
                (false, false) => h - (q + 1),
                (false, true) => h - 2 * (q + 1),
            }
        }
    }
}

/// In-plane count of the derived class for one plane, keyed by the class
/// of the plane's pole under the member polarity.
pub fn expected_derived_plane(pc: &Pencil, lam_bar: Fe, pl: PlaneId) -> u64 {
    let q = pc.field().q() as u64;
    let h = q * (q + 1) / 2;
    let pole = pc
        .polar_point(lam_bar, pl)
        .expect("an elliptic member has a nondegenerate polarity");
    match pc.point_label(pole) {
        PointLabel::Vertex => h + 1,
        PointLabel::Conic => q * q + (q + 1) / 2,
        PointLabel::External => h - q,
        PointLabel::Internal => h + 1,
        PointLabel::ConeSmooth => h + 1,
        PointLabel::Quadric(lam) => {
            if lam == lam_bar {
                return (3 * q + 5) / 2;
            }
            let square_side = pc
                .square_class_off_member(lam_bar, pole)
                .expect("the pole avoids the member");
            match (pc.field().is_square(lam), square_side) {
                (true, false) => h - q,
                (true, true) => h + 1,
                (false, false) => h + q + 2,
                (false, true) => h + 2 * q + 3,
            }
        }
    }
}

/// Character breakdown of a Bruen-Drudge class by position against the
/// member: through-point counts are constant on the member, on the off
/// points sharing the class side and on the far side, and dually for
/// planes keyed by their pole. Every tangent through an off point carries
/// that point's own class, so the far side sees only the (q^2-q)/2
/// secants.
#[derive(Debug, Clone, Copy)]
pub struct SideBreakdown {
    pub side: Side,
    pub star_member: u64,
    pub star_same_side: u64,
    pub star_other_side: u64,
    pub plane_pole_member: u64,
    pub plane_pole_same_side: u64,
    pub plane_pole_other_side: u64,
}

impl SideBreakdown {
    /// Weighted sum of the three star values, which must equal (q+1)|L|.
    /// Rules out misquoted values numerically.
    pub fn star_double_count(q: u64, member: u64, same: u64, other: u64) -> u64 {
        (q * q + 1) * member + (q * q * q + q) / 2 * (same + other)
    }
}

pub fn bruen_drudge_breakdown(pc: &Pencil, lam_bar: Fe, side: Side) -> Result<SideBreakdown> {
    let class = build_bruen_drudge(pc, lam_bar, side)?;
    let geo = pc.geometry();
    let mut star = [None; 3];
    for p in 0..geo.n_points() as PointId {
        let v = star_character(geo, &class, p);
        let slot = match pc.square_class_off_member(lam_bar, p) {
            None => 0,
            Some(sq) => {
                if (side == Side::Square) == sq {
                    1
                } else {
                    2
                }
            }
        };
        assert!(
            star[slot].is_none() || star[slot] == Some(v),
            "through-point count not constant on its side"
        );
        star[slot] = Some(v);
    }
    let mut plane = [None; 3];
    for pl in 0..geo.n_planes() as PlaneId {
        let v = plane_character(geo, &class, pl);
        let pole = pc.polar_point(lam_bar, pl)?;
        let slot = match pc.square_class_off_member(lam_bar, pole) {
            None => 0,
            Some(sq) => {
                if (side == Side::Square) == sq {
                    1
                } else {
                    2
                }
            }
        };
        assert!(
            plane[slot].is_none() || plane[slot] == Some(v),
            "in-plane count not constant for its pole side"
        );
        plane[slot] = Some(v);
    }
    Ok(SideBreakdown {
        side,
        star_member: star[0].unwrap(),
        star_same_side: star[1].unwrap(),
        star_other_side: star[2].unwrap(),
        plane_pole_member: plane[0].unwrap(),
        plane_pole_same_side: plane[1].unwrap(),
        plane_pole_other_side: plane[2].unwrap(),
    })
}

/// Star values of the tangents plus externals form: member points see only
/// their half of the tangents, off points on the class side see all their
/// tangents and the externals, far side points only the externals.
pub fn tangents_externals_star_values(q: u64) -> BTreeSet<u64> {
    let h = q * (q + 1) / 2;
    [(q + 1) / 2, h, h + q + 1].into_iter().collect()
}

pub fn tangents_externals_plane_values(q: u64) -> BTreeSet<u64> {
    let h = q * (q + 1) / 2;
    [h - q, h + 1, q * q + (q + 1) / 2].into_iter().collect()
}

/// Star values the tangent plane derivation can attain.
pub fn first_derived_star_values(q: u64) -> BTreeSet<u64> {
    let h = q * (q + 1) / 2;
    [(q + 3) / 2, h - q, h + 1, h + q + 2, q * q + (q + 1) / 2]
        .into_iter()
        .collect()
}

pub fn first_derived_plane_values(q: u64) -> BTreeSet<u64> {
    let h = q * (q + 1) / 2;
    [(q + 1) / 2, h - (q + 1), h, h + q + 1, q * q + (q - 1) / 2]
        .into_iter()
        .collect()
}

/// Superset of the star values of the cyclic stabilised family, defined
/// for q = 5, 9 (mod 12), q >= 7. Only the possible range is pinned down.
pub fn cyclic_family_star_superset(q: u64) -> BTreeSet<u64> {
    let h = q * (q + 1) / 2;
    [
        (q + 1) / 2,
        5 * (q + 1) / 2,
        h - 2 * (q + 1),
        h - (q + 1),
        h,
        h + q + 1,
        h + 2 * (q + 1),
        h + 3 * (q + 1),
    ]
    .into_iter()
    .collect()
}

pub fn cyclic_family_plane_superset(q: u64) -> BTreeSet<u64> {
    let h = q * (q + 1) / 2;
    [
        q * q + (q + 1) / 2,
        q * q - 3 * (q + 1) / 2,
        h + 2 * q + 3,
        h + q + 2,
        h + 1,
        h - q,
        h - 2 * q - 1,
        h - 2 * (q + 1),
    ]
    .into_iter()
    .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Distinct,
    Inconclusive,
    NotApplicable,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Distinct => "distinct",
            Verdict::Inconclusive => "inconclusive",
            Verdict::NotApplicable => "not-applicable",
        }
    }
}

#[derive(Debug, Clone)]
pub struct FamilyComparison {
    pub family: &'static str,
    pub verdict: Verdict,
    pub note: String,
}

#[derive(Debug, Clone)]
pub struct KnownComparison {
    pub star_values: Vec<u64>,
    pub plane_values: Vec<u64>,
    pub families: Vec<FamilyComparison>,
    pub overall: Verdict,
}

#[derive(Clone)]
struct Profile {
    star: BTreeSet<u64>,
    plane: BTreeSet<u64>,
}

fn profile_of(geo: &Geometry, class: &BitSet) -> Profile {
    Profile {
        star: value_set(geo, class, CharKind::Star),
        plane: value_set(geo, class, CharKind::Plane),
    }
}

/// Character sets of the complementary class: every count flips to
/// q^2+q+1 minus itself.
fn complement_profile(p: &Profile, total: u64) -> Profile {
    Profile {
        star: p.star.iter().map(|&v| total - v).collect(),
        plane: p.plane.iter().map(|&v| total - v).collect(),
    }
}

/// A value of ours the profile never attains, plane side preferred.
fn witness_outside(ours: &Profile, p: &Profile) -> Option<(CharKind, u64)> {
    if let Some(&v) = ours.plane.iter().find(|v| !p.plane.contains(v)) {
        return Some((CharKind::Plane, v));
    }
    ours.star
        .iter()
        .find(|v| !p.star.contains(v))
        .map(|&v| (CharKind::Star, v))
}

/// Compare against exactly known profiles. Character value sets are
/// collineation invariants, so inequality against every presentation
/// separates the classes; equality with one leaves the question open.
fn against_exact(family: &'static str, ours: &Profile, profiles: &[Profile]) -> FamilyComparison {
    for p in profiles {
        if ours.star == p.star && ours.plane == p.plane {
            return FamilyComparison {
                family,
                verdict: Verdict::Inconclusive,
                note: "character value sets coincide and cannot separate the classes".into(),
            };
        }
    }
    let note = match witness_outside(ours, &profiles[0]) {
        Some((k, v)) => format!("{} value {} never occurs for this family", k.as_str(), v),
        None => "character value sets differ".into(),
    };
    FamilyComparison {
        family,
        verdict: Verdict::Distinct,
        note,
    }
}

/// Compare against a family known only through supersets of its values.
/// Distinct needs a witness outside the superset and outside the
/// complement's superset; otherwise the data is compatible.
fn against_superset(
    family: &'static str,
    ours: &Profile,
    sup: &Profile,
    total: u64,
) -> FamilyComparison {
    let csup = complement_profile(sup, total);
    match (witness_outside(ours, sup), witness_outside(ours, &csup)) {
        (Some((k, v)), Some(_)) => FamilyComparison {
            family,
            verdict: Verdict::Distinct,
            note: format!(
                "{} value {} lies outside the family's possible values",
                k.as_str(),
                v
            ),
        },
        _ => FamilyComparison {
            family,
            verdict: Verdict::Inconclusive,
            note: "all character values lie inside the family's possible range".into(),
        },
    }
}

/// Compares a class, by its character value sets, against the known
/// families with the same parameter: the Bruen-Drudge class in both
/// presentations, its tangent plane derivation with complement, and the
/// cyclic stabilised family where defined.
pub fn compare_known(pc: &Pencil, lam_bar: Fe, class: &BitSet) -> Result<KnownComparison> {
    let geo = pc.geometry();
    let q = pc.field().q() as u64;
    let total = q * q + q + 1;
    let ours = profile_of(geo, class);

    let mut families = Vec::new();

    let secant_form = build_bruen_drudge(pc, lam_bar, Side::NonSquare)?;
    let external_form = build_tangents_externals(pc, lam_bar, Side::Square)?;
    families.push(against_exact(
        "bruen-drudge",
        &ours,
        &[
            profile_of(geo, &secant_form),
            profile_of(geo, &external_form),
        ],
    ));

    let fd = build_first_derived(pc, lam_bar, Side::Square)?;
    let fd_profile = profile_of(geo, &fd);
    let fd_complement = complement_profile(&fd_profile, total);
    families.push(against_exact(
        "first-derived",
        &ours,
        &[fd_profile, fd_complement],
    ));

    if q >= 7 && (q % 12 == 5 || q % 12 == 9) {
        let sup = Profile {
            star: cyclic_family_star_superset(q),
            plane: cyclic_family_plane_superset(q),
        };
        families.push(against_superset("cyclic-stabilised", &ours, &sup, total));
    } else {
        families.push(FamilyComparison {
            family: "cyclic-stabilised",
            verdict: Verdict::NotApplicable,
            note: "only defined for q = 5, 9 (mod 12) and q >= 7".into(),
        });
    }

    let overall = if families
        .iter()
        .filter(|f| f.verdict != Verdict::NotApplicable)
        .all(|f| f.verdict == Verdict::Distinct)
    {
        Verdict::Distinct
    } else {
        Verdict::Inconclusive
    };
    Ok(KnownComparison {
        star_values: ours.star.iter().copied().collect(),
        plane_values: ours.plane.iter().copied().collect(),
        families,
        overall,
    })
}

/// Embedding data for GF(q) inside GF(q^2): a root of the base modulus
/// induces the embedding, and 1, theta is a basis of the extension over
/// the embedded base field.
struct QuadraticExtension {
    ext: Field,
    theta: Fe,
    split: Vec<(Fe, Fe)>,
}

impl QuadraticExtension {
    fn new(base: &Field) -> Result<QuadraticExtension> {
        let q = base.q() as u64;
        let ext = Field::from_order(q * q)?;
        let mod_coeffs: Vec<Fe> = base
            .modulus()
            .iter()
            .map(|&c| ext.from_int(c as i64))
            .collect();
        let root = ext
            .enumerate()
            .find(|&r| ext.eval_poly(&mod_coeffs, r) == ext.zero())
            .expect("the base modulus splits in the quadratic extension");
        let embed: Vec<Fe> = base
            .enumerate()
            .map(|a| {
                let mut acc = ext.zero();
                for &c in base.coeffs(a).iter().rev() {
                    acc = ext.add(ext.mul(acc, root), ext.from_int(c as i64));
                }
                acc
            })
            .collect();
        for a in base.enumerate() {
            for b in base.enumerate() {
                // the embedding is a field homomorphism
                let (ea, eb) = (embed[a.0 as usize], embed[b.0 as usize]);
                assert_eq!(embed[base.add(a, b).0 as usize], ext.add(ea, eb));
                assert_eq!(embed[base.mul(a, b).0 as usize], ext.mul(ea, eb));
            }
        }
        let image: HashSet<Fe> = embed.iter().copied().collect();
        assert_eq!(image.len(), q as usize);
        let theta = ext
            .enumerate()
            .find(|w| !image.contains(w))
            .expect("the extension is larger than the base field");
        let mut split = vec![None; (q * q) as usize];
        for a in base.enumerate() {
            for b in base.enumerate() {
                let w = ext.add(embed[a.0 as usize], ext.mul(embed[b.0 as usize], theta));
                assert!(split[w.0 as usize].is_none(), "1, theta is a basis");
                split[w.0 as usize] = Some((a, b));
            }
        }
        let split = split.into_iter().map(|o| o.unwrap()).collect();
        Ok(QuadraticExtension { ext, theta, split })
    }
}

/// A regular spread of PG(3,q): identify GF(q)^4 with GF(q^2)^2 through
/// the basis 1, theta and take the GF(q^2) points as lines. Returns
/// q^2+1 pairwise skew lines covering every point.
pub fn regular_spread(geo: &Geometry) -> Result<Vec<LineId>> {
    let base = geo.field();
    let qe = QuadraticExtension::new(base)?;
    let psi = |w1: Fe, w2: Fe| -> [Fe; 4] {
        let (a1, b1) = qe.split[w1.0 as usize];
        let (a2, b2) = qe.split[w2.0 as usize];
        [a1, b1, a2, b2]
    };
    let one = qe.ext.one();
    let mut lines = Vec::new();
    for m in qe.ext.enumerate() {
        let p1 = geo.point_id(psi(one, m)).expect("nonzero vector");
        let p2 = geo
            .point_id(psi(qe.theta, qe.ext.mul(m, qe.theta)))
            .expect("nonzero vector");
        lines.push(geo.line_through(p1, p2)?);
    }
    let p1 = geo.point_id(psi(qe.ext.zero(), one)).unwrap();
    let p2 = geo.point_id(psi(qe.ext.zero(), qe.theta)).unwrap();
    lines.push(geo.line_through(p1, p2)?);

    let q = base.q() as usize;
    assert_eq!(lines.len(), q * q + 1);
    let mut seen = BitSet::new(geo.n_points());
    for &l in &lines {
        for &p in geo.points_on_line(l) {
            assert!(!seen.contains(p as usize), "spread lines are pairwise skew");
            seen.insert(p as usize);
        }
    }
    assert_eq!(seen.count(), geo.n_points());
    Ok(lines)
}

#[derive(Debug, Clone)]
pub struct SpreadSampleReport {
    pub samples: u32,
    pub expected: u64,
    pub histogram: BTreeMap<u64, u32>,
    pub all_match: bool,
}

fn random_invertible(f: &Field, rng: &mut impl Rng) -> Mat4 {
    let q = f.q() as u16;
    loop {
        let mut m = [[Fe(0); 4]; 4];
        for row in &mut m {
            for e in row.iter_mut() {
                *e = Fe(rng.gen_range(0..q));
            }
        }
        let m = Mat4(m);
        if m.det(f) != f.zero() {
            return m;
        }
    }
}

/// Applies seeded random collineations to a fixed regular spread and
/// counts the class lines in each image. A Cameron-Liebler class of
/// parameter x meets every spread in exactly x lines, so each sample must
/// give x.
pub fn spread_sample_check(
    geo: &Geometry,
    class: &BitSet,
    x: u64,
    samples: u32,
    seed: u64,
) -> Result<SpreadSampleReport> {
    let spread = regular_spread(geo)?;
    let f = geo.field();
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut histogram = BTreeMap::new();
    for _ in 0..samples {
        let m = random_invertible(f, &mut rng);
        let count = spread
            .iter()
            .filter(|&&l| {
                let (a, b) = geo.line(l).span;
                let pa = geo.point_id(m.apply(f, geo.point(a))).unwrap();
                let pb = geo.point_id(m.apply(f, geo.point(b))).unwrap();
                let img = geo
                    .line_through(pa, pb)
                    .expect("a collineation maps lines to lines");
                class.contains(img as usize)
            })
            .count() as u64;
        *histogram.entry(count).or_insert(0u32) += 1;
    }
    let all_match = histogram.keys().all(|&v| v == x);
    Ok(SpreadSampleReport {
        samples,
        expected: x,
        histogram,
        all_match,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Geometry;
    use crate::group_action::PglAction;
    use crate::klein::verify_tight;
    use std::sync::OnceLock;

    fn pencil(q: u64) -> &'static Pencil {
        static P5: OnceLock<Pencil> = OnceLock::new();
        static P9: OnceLock<Pencil> = OnceLock::new();
        static P13: OnceLock<Pencil> = OnceLock::new();
        let cell = match q {
            5 => &P5,
            9 => &P9,
            13 => &P13,
            _ => panic!("no cached pencil for q = {q}"),
        };
        cell.get_or_init(|| Pencil::new(Geometry::new(Field::from_order(q).unwrap()).unwrap()))
    }

    fn lam_bar(pc: &Pencil) -> Fe {
        pc.field().distinguished_nonsquare()
    }

    #[test]
    fn partition_rejects_non_elliptic_members() {
        let pc = pencil(5);
        let f = pc.field();
        assert!(partition_lines(pc, f.zero()).is_err());
        assert!(partition_lines(pc, f.one()).is_err());
    }

    #[test]
    fn tangent_sides_are_unions_of_label_classes() {
        // the tangents of the member are the conic tangents of pi, the
        // generators, all ruling lines and the member's own tangent
        // labels; the side of each piece is decided by one square class
        for q in [5u64, 9] {
            let pc = pencil(q);
            let f = pc.field();
            let lb = lam_bar(pc);
            let part = partition_lines(pc, lb).unwrap();
            for l in 0..pc.geometry().n_lines() as LineId {
                let side = if part.tangents_square.contains(l as usize) {
                    Some(Side::Square)
                } else if part.tangents_nonsquare.contains(l as usize) {
                    Some(Side::NonSquare)
                } else {
                    None
                };
                let want = match pc.line_label(l) {
                    LineLabel::PiTangent => Some(Side::Square),
                    LineLabel::ConeGenerator => Some(Side::NonSquare),
                    LineLabel::TangentInternal(lam) if lam == lb => Some(Side::NonSquare),
                    LineLabel::TangentExternal(lam) if lam == lb => Some(Side::Square),
                    LineLabel::Regulus(mu) => {
                        if f.is_square(f.sub(lb, mu)) {
                            Some(Side::Square)
                        } else {
                            Some(Side::NonSquare)
                        }
                    }
                    _ => None,
                };
                assert_eq!(side, want, "line {l} at q = {q}");
            }
        }
    }

    #[test]
    fn bruen_drudge_is_tight_and_invariant() {
        for q in [5u64, 9] {
            let pc = pencil(q);
            let lb = lam_bar(pc);
            let action = PglAction::new(pc.geometry()).unwrap();
            for side in [Side::Square, Side::NonSquare] {
                let class = build_bruen_drudge(pc, lb, side).unwrap();
                let report = verify_tight(pc.geometry(), &class);
                assert!(report.is_tight, "q = {q} side {side:?}");
                assert_eq!(report.parameter, Some(bruen_drudge_x(q)));
                assert!(action.is_invariant_line_set(&class));
            }
        }
    }

    #[test]
    fn tangents_externals_is_the_complement() {
        let pc = pencil(5);
        let lb = lam_bar(pc);
        let secant_form = build_bruen_drudge(pc, lb, Side::NonSquare).unwrap();
        let external_form = build_tangents_externals(pc, lb, Side::Square).unwrap();
        assert_eq!(external_form, secant_form.complement());
        let report = verify_tight(pc.geometry(), &external_form);
        assert!(report.is_tight);
        assert_eq!(report.parameter, Some(bruen_drudge_x(5)));
    }

    #[test]
    fn breakdown_matches_the_double_count() {
        for q in [5u64, 9, 13] {
            let pc = pencil(q);
            let lb = lam_bar(pc);
            let h = q * (q + 1) / 2;
            let b = bruen_drudge_breakdown(pc, lb, Side::NonSquare).unwrap();
            assert_eq!(b.star_member, q * q + (q + 1) / 2);
            assert_eq!(b.star_same_side, (q * q + q + 2) / 2);
            assert_eq!(b.star_other_side, (q * q - q) / 2);
            assert_eq!(b.plane_pole_member, (q + 1) / 2);
            assert_eq!(b.plane_pole_same_side, h);
            assert_eq!(b.plane_pole_other_side, h + q + 1);
            // the weighted star sum counts each class line q+1 times
            let lines = bruen_drudge_x(q) * (q * q + q + 1);
            assert_eq!(
                SideBreakdown::star_double_count(
                    q,
                    b.star_member,
                    b.star_same_side,
                    b.star_other_side
                ),
                (q + 1) * lines
            );
            // h + q on the far side fails the same double count
            assert_ne!(
                SideBreakdown::star_double_count(q, b.star_member, b.star_same_side, h + q),
                (q + 1) * lines
            );
        }
        // the side choice only renames the two off halves
        let pc = pencil(5);
        let b = bruen_drudge_breakdown(pc, lam_bar(pc), Side::Square).unwrap();
        assert_eq!(
            (b.star_member, b.star_same_side, b.star_other_side),
            (28, 16, 10)
        );
    }

    #[test]
    fn swap_counts_match_the_closed_forms() {
        for q in [5u64, 9] {
            let pc = pencil(q);
            let (a, b) = pc.swap_sets();
            let ca = meeting_counts(pc.geometry(), &a);
            let cb = meeting_counts(pc.geometry(), &b);
            for l in 0..pc.geometry().n_lines() {
                let want = expected_swap_counts(pc, l as LineId);
                assert_eq!((ca[l], cb[l]), want, "line {l} at q = {q}");
            }
        }
    }

    #[test]
    fn derive_rejects_malformed_swaps() {
        let pc = pencil(5);
        let lb = lam_bar(pc);
        let class = build_bruen_drudge(pc, lb, Side::NonSquare).unwrap();
        let n = pc.geometry().n_lines();
        let inside = class.iter_ones().take(3).collect::<Vec<_>>();
        let outside = class.complement().iter_ones().take(3).collect::<Vec<_>>();

        // removal set leaking outside the class
        let bad = BitSet::from_indices(n, [outside[0]]);
        let add = BitSet::from_indices(n, [outside[1]]);
        assert!(derive(&class, &bad, &add).is_err());

        // added lines already present
        let remove = BitSet::from_indices(n, [inside[0]]);
        let bad = BitSet::from_indices(n, [inside[1]]);
        assert!(derive(&class, &remove, &bad).is_err());

        // size mismatch
        let remove = BitSet::from_indices(n, [inside[0], inside[1]]);
        let add = BitSet::from_indices(n, [outside[0]]);
        assert!(derive(&class, &remove, &add).is_err());

        // a legal swap of one line for another is bookkeeping only
        let remove = BitSet::from_indices(n, [inside[0]]);
        let add = BitSet::from_indices(n, [outside[0]]);
        let swapped = derive(&class, &remove, &add).unwrap();
        assert_eq!(swapped.count(), class.count());
    }

    #[test]
    fn derived_is_tight_and_invariant() {
        for q in [5u64, 9] {
            let pc = pencil(q);
            let lb = lam_bar(pc);
            let class = build_derived(pc, lb).unwrap();
            let report = verify_tight(pc.geometry(), &class);
            assert!(report.is_tight, "q = {q}");
            assert_eq!(report.parameter, Some(bruen_drudge_x(q)));
            let action = PglAction::new(pc.geometry()).unwrap();
            assert!(action.is_invariant_line_set(&class));
        }
    }

    #[test]
    fn derived_needs_q_1_mod_4() {
        let pc = Pencil::new(Geometry::new(Field::from_order(7).unwrap()).unwrap());
        let lb = pc.field().distinguished_nonsquare();
        match build_derived(&pc, lb) {
            Err(Error::Derivation(msg)) => assert!(msg.contains("mod 4")),
            other => panic!("expected a derivation error, got {other:?}"),
        }
    }

    #[test]
    fn derived_star_values_match_the_keyed_table() {
        for q in [5u64, 9] {
            let pc = pencil(q);
            let lb = lam_bar(pc);
            let class = build_derived(pc, lb).unwrap();
            for p in 0..pc.geometry().n_points() as PointId {
                assert_eq!(
                    star_character(pc.geometry(), &class, p),
                    expected_derived_star(pc, lb, p),
                    "point {p} at q = {q}"
                );
            }
        }
    }

    #[test]
    fn derived_plane_values_match_the_keyed_table() {
        for q in [5u64, 9] {
            let pc = pencil(q);
            let lb = lam_bar(pc);
            let class = build_derived(pc, lb).unwrap();
            for pl in 0..pc.geometry().n_planes() as PlaneId {
                assert_eq!(
                    plane_character(pc.geometry(), &class, pl),
                    expected_derived_plane(pc, lb, pl),
                    "plane {pl} at q = {q}"
                );
            }
        }
    }

    #[test]
    fn derived_histograms_match_the_carriers() {
        fn expected(formulas: [u64; 6], carriers: [u64; 6]) -> BTreeMap<u64, u64> {
            let mut m = BTreeMap::new();
            for (v, c) in formulas.iter().zip(carriers) {
                if c > 0 {
                    *m.entry(*v).or_insert(0) += c;
                }
            }
            m
        }
        for q in [5u64, 9, 13] {
            let pc = pencil(q);
            let lb = lam_bar(pc);
            let class = build_derived(pc, lb).unwrap();
            let stars = character_histogram(pc.geometry(), &class, CharKind::Star);
            assert_eq!(
                stars,
                expected(derived_star_formulas(q), derived_star_carriers(q)),
                "q = {q}"
            );
            let planes = character_histogram(pc.geometry(), &class, CharKind::Plane);
            assert_eq!(
                planes,
                expected(derived_plane_formulas(q), derived_plane_carriers(q)),
                "q = {q}"
            );
        }
        // the q = 5 collapse: six formulas, three attained values
        assert_eq!(
            derived_star_values(5).into_iter().collect::<Vec<_>>(),
            [3, 15, 21]
        );
        assert_eq!(
            derived_plane_values(5).into_iter().collect::<Vec<_>>(),
            [10, 16, 28]
        );
        assert_eq!(derived_star_values(9).len(), 6);
        assert_eq!(derived_plane_values(13).len(), 6);
    }

    #[test]
    fn first_derived_is_tight_but_not_pencil_invariant() {
        for q in [5u64, 9] {
            let pc = pencil(q);
            let lb = lam_bar(pc);
            let class = build_first_derived(pc, lb, Side::Square).unwrap();
            let report = verify_tight(pc.geometry(), &class);
            assert!(report.is_tight, "q = {q}");
            assert_eq!(report.parameter, Some(bruen_drudge_x(q)));
            // the swap point breaks the conic stabiliser symmetry
            let action = PglAction::new(pc.geometry()).unwrap();
            assert!(!action.is_invariant_line_set(&class));
            let stars = value_set(pc.geometry(), &class, CharKind::Star);
            assert!(stars.is_subset(&first_derived_star_values(q)));
            let planes = value_set(pc.geometry(), &class, CharKind::Plane);
            assert!(planes.is_subset(&first_derived_plane_values(q)));
            if q > 5 {
                assert_eq!(stars, first_derived_star_values(q));
                assert_eq!(planes, first_derived_plane_values(q));
            }
        }
    }

    #[test]
    fn tangents_externals_values_match_the_formulas() {
        for q in [5u64, 9] {
            let pc = pencil(q);
            let lb = lam_bar(pc);
            let class = build_tangents_externals(pc, lb, Side::Square).unwrap();
            assert_eq!(
                value_set(pc.geometry(), &class, CharKind::Star),
                tangents_externals_star_values(q)
            );
            assert_eq!(
                value_set(pc.geometry(), &class, CharKind::Plane),
                tangents_externals_plane_values(q)
            );
        }
    }

    #[test]
    fn spread_meets_members_once_and_others_everywhere() {
        // a spread line meets no other spread line, and a line outside is
        // covered once at each of its q+1 points
        for q in [5u64, 9, 13] {
            let pc = pencil(q);
            let spread = regular_spread(pc.geometry()).unwrap();
            let mut set = BitSet::new(pc.geometry().n_lines());
            for &l in &spread {
                set.insert(l as usize);
            }
            let counts = meeting_counts(pc.geometry(), &set);
            for (l, &c) in counts.iter().enumerate() {
                let want = if set.contains(l) { 1 } else { q + 1 };
                assert_eq!(c, want, "line {l} at q = {q}");
            }
        }
    }

    #[test]
    fn spread_samples_meet_every_class_in_x() {
        let pc = pencil(5);
        let lb = lam_bar(pc);
        let x = bruen_drudge_x(5);
        for class in [
            build_bruen_drudge(pc, lb, Side::NonSquare).unwrap(),
            build_tangents_externals(pc, lb, Side::Square).unwrap(),
            build_first_derived(pc, lb, Side::Square).unwrap(),
            build_derived(pc, lb).unwrap(),
        ] {
            let report = spread_sample_check(pc.geometry(), &class, x, 30, 1).unwrap();
            assert!(report.all_match);
            assert_eq!(report.histogram.get(&x), Some(&30));
        }
        for q in [9u64, 13] {
            let pc = pencil(q);
            let class = build_derived(pc, lam_bar(pc)).unwrap();
            let report =
                spread_sample_check(pc.geometry(), &class, bruen_drudge_x(q), 6, 1).unwrap();
            assert!(report.all_match, "q = {q}");
        }
    }

    #[test]
    fn compare_known_separates_only_past_the_collapse() {
        let pc = pencil(5);
        let lb = lam_bar(pc);
        let class = build_derived(pc, lb).unwrap();
        let cmp = compare_known(pc, lb, &class).unwrap();
        assert_eq!(cmp.overall, Verdict::Inconclusive);
        assert_eq!(cmp.families[0].family, "bruen-drudge");
        assert_eq!(cmp.families[0].verdict, Verdict::Inconclusive);
        assert_eq!(cmp.families[2].verdict, Verdict::NotApplicable);

        for q in [9u64, 13] {
            let pc = pencil(q);
            let lb = lam_bar(pc);
            let class = build_derived(pc, lb).unwrap();
            let cmp = compare_known(pc, lb, &class).unwrap();
            assert_eq!(cmp.overall, Verdict::Distinct, "q = {q}");
            assert_eq!(cmp.families[0].verdict, Verdict::Distinct);
            assert_eq!(cmp.families[1].verdict, Verdict::Distinct);
            let cyclic = cmp.families[2].verdict;
            if q == 9 {
                assert_eq!(cyclic, Verdict::Distinct);
            } else {
                assert_eq!(cyclic, Verdict::NotApplicable);
            }
            // the tangent plane value of the member separates at q > 5
            assert!(cmp.plane_values.contains(&((3 * q + 5) / 2)));
        }
    }
}
