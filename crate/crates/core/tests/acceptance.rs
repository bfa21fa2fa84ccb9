//! Acceptance suite: ten numbered criteria, one test and one printed
//! pass/fail line each. Every threshold is exact; there are no
//! tolerances. Shared per-q contexts are built once.

use std::collections::BTreeSet;
use std::sync::OnceLock;

use clq::bitset::BitSet;
use clq::geometry::{Collineation, Geometry};
use clq::gf::{Fe, Field};
use clq::group_action::{partitions_equal, PglAction};
use clq::klein;
use clq::lineclass::{self, CharKind, Side, SideBreakdown};
use clq::pencil::{Pencil, PointLabel};

struct Ctx {
    pc: Pencil,
    lam: Fe,
    derived: BitSet,
}

fn ctx(q: u64) -> &'static Ctx {
    static C5: OnceLock<Ctx> = OnceLock::new();
    static C9: OnceLock<Ctx> = OnceLock::new();
    static C13: OnceLock<Ctx> = OnceLock::new();
    let cell = match q {
        5 => &C5,
        9 => &C9,
        13 => &C13,
        _ => panic!("no context for q = {q}"),
    };
    cell.get_or_init(|| {
        let f = Field::from_order(q).unwrap();
        let pc = Pencil::new(Geometry::new(f).unwrap());
        let lam = pc.field().distinguished_nonsquare();
        let derived = lineclass::build_derived(&pc, lam).unwrap();
        Ctx { pc, lam, derived }
    })
}

fn verdict(tag: u32, ok: bool) {
    println!("criterion {tag:02}: {}", if ok { "pass" } else { "FAIL" });
}

#[test]
fn a01_derived_class_is_tight_with_parameter_half_q_squared_plus_one() {
    let pinned = [(5u64, 103u64, 78u64), (9, 491, 410), (13, 1359, 1190)];
    for (q, member, outside) in pinned {
        let c = ctx(q);
        let x = (q * q + 1) / 2;
        let tr = klein::verify_tight(c.pc.geometry(), &c.derived);
        assert_eq!(tr.parameter, Some(x), "q = {q}");
        assert!(tr.is_tight, "q = {q}: violations {:?}", tr.violations);
        assert_eq!(tr.member_value, member, "q = {q}");
        assert_eq!(tr.outside_value, outside, "q = {q}");
        assert!(tr.violations.is_empty(), "q = {q}");
    }
    verdict(1, true);
}

fn expected_point_orbit_sizes(q: usize) -> Vec<usize> {
    let mut s = vec![1, q + 1, q * (q - 1) / 2, q * (q + 1) / 2, q * q - 1];
    s.extend(std::iter::repeat(q * q + q).take((q - 1) / 2));
    s.extend(std::iter::repeat(q * q - q).take((q - 1) / 2));
    s.sort_unstable();
    s
}

fn expected_line_orbit_sizes(q: usize) -> Vec<usize> {
    let mut s = vec![q + 1; q + 1];
    s.extend([q * (q - 1) / 2, q * (q - 1) / 2]);
    s.extend([q * (q + 1) / 2, q * (q + 1) / 2]);
    s.extend(std::iter::repeat((q * q * q - q) / 2).take(2 * (q - 1)));
    s.extend([q * q * q - q, q * q * q - q]);
    s.sort_unstable();
    s
}

#[test]
fn a02_orbit_inventories_have_the_exact_counts_and_sizes() {
    for q in [5u64, 9, 13] {
        let c = ctx(q);
        let action = PglAction::new(c.pc.geometry()).unwrap();
        let po = action.point_orbits();
        let lo = action.line_orbits();
        assert_eq!(po.count() as u64, q + 4, "q = {q}: point orbit count");
        assert_eq!(lo.count() as u64, 3 * q + 5, "q = {q}: line orbit count");
        assert_eq!(
            PglAction::sorted_sizes(&po),
            expected_point_orbit_sizes(q as usize),
            "q = {q}: point orbit sizes"
        );
        assert_eq!(
            PglAction::sorted_sizes(&lo),
            expected_line_orbit_sizes(q as usize),
            "q = {q}: line orbit sizes"
        );
        assert!(
            po.refines(c.pc.point_labels()),
            "q = {q}: point orbits respect labels"
        );
        assert!(
            partitions_equal(&po, c.pc.point_labels()),
            "q = {q}: point orbits are the label classes"
        );
        assert!(
            lo.refines(c.pc.line_labels()),
            "q = {q}: line orbits refine labels"
        );
    }
    verdict(2, true);
}

#[test]
fn a03_swap_counts_match_the_closed_forms_on_every_line() {
    for q in [5u64, 9] {
        let c = ctx(q);
        let geo = c.pc.geometry();
        let (a, b) = c.pc.swap_sets();
        let am = klein::meeting_counts(geo, &a);
        let bm = klein::meeting_counts(geo, &b);
        for l in 0..geo.n_lines() as u32 {
            let (ea, eb) = lineclass::expected_swap_counts(&c.pc, l);
            assert_eq!(
                (am[l as usize], bm[l as usize]),
                (ea, eb),
                "q = {q}, line {l}"
            );
        }
        let base = lineclass::build_bruen_drudge(&c.pc, c.lam, Side::NonSquare).unwrap();
        lineclass::check_swap_preconditions(&c.pc, &base, &a, &b).unwrap();
    }
    verdict(3, true);
}

#[test]
fn a04_derived_character_spectra_match_the_six_formulas() {
    let c9 = ctx(9);
    let star9 = lineclass::value_set(c9.pc.geometry(), &c9.derived, CharKind::Star);
    let plane9 = lineclass::value_set(c9.pc.geometry(), &c9.derived, CharKind::Plane);
    assert_eq!(star9, BTreeSet::from([5, 25, 35, 45, 55, 75]));
    assert_eq!(plane9, BTreeSet::from([16, 36, 46, 56, 66, 86]));

    let c13 = ctx(13);
    let star13 = lineclass::value_set(c13.pc.geometry(), &c13.derived, CharKind::Star);
    let plane13 = lineclass::value_set(c13.pc.geometry(), &c13.derived, CharKind::Plane);
    assert_eq!(star13, BTreeSet::from([7, 63, 77, 91, 105, 161]));
    assert_eq!(plane13, BTreeSet::from([22, 78, 92, 106, 120, 176]));
    assert_eq!(star13, lineclass::derived_star_values(13));
    assert_eq!(plane13, lineclass::derived_plane_values(13));
    verdict(4, true);
}

#[test]
fn a05_plane_value_discriminator_separates_from_the_known_families() {
    for q in [9u64, 13] {
        let c = ctx(q);
        let geo = c.pc.geometry();
        let star = lineclass::value_set(geo, &c.derived, CharKind::Star);
        let plane = lineclass::value_set(geo, &c.derived, CharKind::Plane);
        let disc = (3 * q + 5) / 2;
        assert!(plane.contains(&disc), "q = {q}: {disc} is a plane value");
        let family_lists = [
            lineclass::tangents_externals_star_values(q),
            lineclass::tangents_externals_plane_values(q),
            lineclass::first_derived_star_values(q),
            lineclass::first_derived_plane_values(q),
            lineclass::cyclic_family_star_superset(q),
            lineclass::cyclic_family_plane_superset(q),
        ];
        for (i, list) in family_lists.iter().enumerate() {
            assert!(
                !list.contains(&disc),
                "q = {q}: {disc} appears in family list {i}: {list:?}"
            );
        }
        let full = q * q + q + 1;
        assert!(!star.contains(&full), "q = {q}: no full star");
        assert!(!plane.contains(&full), "q = {q}: no full plane");
    }
    verdict(5, true);
}

#[test]
fn a06_every_point_and_plane_tally_matches_its_table_row() {
    let c = ctx(5);
    let geo = c.pc.geometry();
    for p in 0..geo.n_points() as u32 {
        assert_eq!(
            c.pc.tally_through_point(p),
            c.pc.expected_point_tally(p),
            "point {p}"
        );
    }
    for pl in 0..geo.n_planes() as u32 {
        assert_eq!(
            c.pc.tally_in_plane(pl),
            c.pc.expected_plane_tally(pl),
            "plane {pl}"
        );
    }
    verdict(6, true);
}

#[test]
fn a07_hundred_sampled_spreads_each_carry_x_members() {
    for q in [5u64, 9] {
        let c = ctx(q);
        let x = (q * q + 1) / 2;
        let sr = lineclass::spread_sample_check(c.pc.geometry(), &c.derived, x, 100, 1).unwrap();
        assert!(sr.all_match, "q = {q}: histogram {:?}", sr.histogram);
        assert_eq!(sr.histogram.get(&x), Some(&100), "q = {q}");
    }
    verdict(7, true);
}

#[test]
fn a08_star_sum_meeting_counts_equal_the_all_pairs_oracle() {
    let c = ctx(5);
    let geo = c.pc.geometry();
    let (a, _) = c.pc.swap_sets();
    for set in [&c.derived, &a] {
        assert_eq!(
            klein::meeting_counts(geo, set),
            klein::meeting_counts_oracle(geo, set)
        );
    }
    verdict(8, true);
}

#[test]
fn a09_generators_fix_the_class_the_swap_sets_and_every_quadric() {
    fn line_set_fixed(g: &Collineation, s: &BitSet) -> bool {
        s.iter_ones().all(|l| s.contains(g.line_map[l] as usize))
    }
    fn point_set_fixed(g: &Collineation, s: &BitSet) -> bool {
        s.iter_ones().all(|p| s.contains(g.point_map[p] as usize))
    }
    for q in [5u64, 9, 13] {
        let c = ctx(q);
        let geo = c.pc.geometry();
        let n = geo.n_points();
        let action = PglAction::new(geo).unwrap();
        let gens = action.generators();
        assert_eq!(gens.len(), 3, "q = {q}");
        let (a, b) = c.pc.swap_sets();
        let conic =
            BitSet::from_indices(n, c.pc.conic().iter().map(|&p| p as usize));
        let by_label = |want: PointLabel| {
            BitSet::from_indices(
                n,
                (0..n).filter(|&p| c.pc.point_label(p as u32) == want),
            )
        };
        let internal = by_label(PointLabel::Internal);
        let external = by_label(PointLabel::External);
        for (i, g) in gens.iter().enumerate() {
            assert!(line_set_fixed(g, &c.derived), "q = {q}, generator {i}: class");
            assert!(line_set_fixed(g, &a), "q = {q}, generator {i}: A");
            assert!(line_set_fixed(g, &b), "q = {q}, generator {i}: B");
            assert!(point_set_fixed(g, &conic), "q = {q}, generator {i}: conic");
            assert!(
                point_set_fixed(g, &internal),
                "q = {q}, generator {i}: internal points"
            );
            assert!(
                point_set_fixed(g, &external),
                "q = {q}, generator {i}: external points"
            );
            for lam in c.pc.field().enumerate() {
                assert!(
                    point_set_fixed(g, &c.pc.member_points(lam)),
                    "q = {q}, generator {i}: quadric at {}",
                    c.pc.field().fe_string(lam)
                );
            }
        }
    }
    verdict(9, true);
}

/// Reference through-point triple 28/16/18 and in-polar-plane triple
/// 3/15/21 for the q = 5 secant-side class. The plane triple and the
/// first two star entries hold; the far-side star entry is pinned at 18
/// here and the computation disagrees, so this criterion records the
/// discrepancy by failing. The weighted sum
/// 26*star_member + 65*(star_same + star_other) must equal
/// (q+1)*|class| = 2418, which no triple starting 28, 16 can satisfy
/// except with far side 10.
#[test]
fn a10_reference_breakdown_triples_hold_at_q5() {
    let c = ctx(5);
    let bd = lineclass::bruen_drudge_breakdown(&c.pc, c.lam, Side::NonSquare).unwrap();
    assert_eq!(
        (
            bd.plane_pole_member,
            bd.plane_pole_same_side,
            bd.plane_pole_other_side
        ),
        (3, 15, 21),
        "in-polar-plane triple"
    );
    assert_eq!(bd.star_member, 28, "through-point value on the quadric");
    assert_eq!(bd.star_same_side, 16, "through-point value on the class side");
    let got = (bd.star_member, bd.star_same_side, bd.star_other_side);
    let stated = (28, 16, 18);
    verdict(10, got == stated);
    let class_size = lineclass::bruen_drudge_x(5) * 31;
    assert_eq!(
        got,
        stated,
        "through-point triple is {got:?}; the double count \
         {} must equal (q+1)|class| = {}, and it holds only with far side {} \
         (18 gives {}, the other circulating value 20 gives {})",
        SideBreakdown::star_double_count(5, got.0, got.1, got.2),
        6 * class_size,
        bd.star_other_side,
        SideBreakdown::star_double_count(5, 28, 16, 18),
        SideBreakdown::star_double_count(5, 28, 16, 20),
    );
}
