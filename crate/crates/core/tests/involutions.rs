use kgrass::involutions::{
    build_matching, intersnake, reduce, verify_matching, FirstInvolution, NearRectangleCase,
    SecondOutcome, Snake,
};
use kgrass::partition::{partitions_in_box, partitions_up_to};
use kgrass::richardson::{is_multiplicity_free, RichardsonQuadruple};
use kgrass::svt::enumerate_buch_tableaux;
use kgrass::{AmbientBox, Partition};

fn boxes(max_rows: u32, max_cols: u32) -> impl Iterator<Item = AmbientBox> {
    (1..=max_rows).flat_map(move |r| (1..=max_cols).map(move |c| AmbientBox::new(r, c).unwrap()))
}

fn rectangles(bx: AmbientBox) -> Vec<Partition> {
    partitions_in_box(bx).into_iter().filter(|p| !p.is_empty() && p.is_rectangle()).collect()
}

#[test]
fn first_involution_is_an_involution_on_rectangles() {
    let mut checked = 0;
    for bx in boxes(6, 6) {
        for l in rectangles(bx) {
            for m in rectangles(bx) {
                if l.len() > 3 || l.width() > 3 || m.len() > 3 || m.width() > 3 {
                    continue;
                }
                let Ok(inv) = FirstInvolution::new(&l, &m, bx, None) else {
                    assert!(enumerate_buch_tableaux(&l, &m, bx).is_empty());
                    continue;
                };
                for t in enumerate_buch_tableaux(&l, &m, bx) {
                    let u = inv.apply(&t).unwrap();
                    assert_eq!(inv.apply(&u).unwrap(), t, "{l:?} {m:?} {bx:?}");
                    if u != t {
                        assert_eq!(t.size().abs_diff(u.size()), 1);
                    } else {
                        assert_eq!(t, inv.m);
                    }
                    checked += 1;
                }
            }
        }
    }
    assert!(checked > 1000);
}

#[test]
fn reduction_witness_is_a_bijection() {
    let mut checked = 0;
    for bx in boxes(5, 5) {
        for l in rectangles(bx) {
            for m in partitions_up_to(6, bx) {
                if m.is_empty() || l.size() > 6 {
                    continue;
                }
                let all = enumerate_buch_tableaux(&l, &m, bx);
                if all.is_empty() {
                    continue;
                }
                let r = reduce(&l, &m, bx).unwrap();
                r.verify(&all).unwrap_or_else(|e| panic!("{l:?} {m:?} {bx:?}: {e}"));
                checked += 1;
            }
        }
    }
    assert!(checked > 1000);
}

#[test]
fn snakes_decompose_and_rebuild() {
    let mut checked = 0;
    for bx in boxes(7, 6) {
        for l in partitions_up_to(8, bx) {
            for m in rectangles(bx) {
                let covered = l.is_rectangle() || NearRectangleCase::new(&l, &m, bx).is_ok();
                if l.is_empty() || m.size() > 9 || !covered {
                    continue;
                }
                for t in enumerate_buch_tableaux(&l, &m, bx) {
                    let s = Snake::from_filling(&t).unwrap();
                    assert_eq!(s.base as usize, l.len() + 1);
                    assert_eq!(s.columns.len(), m.width() as usize);
                    assert_eq!(s.to_filling(t.shape(), t.context()).unwrap(), t);
                    checked += 1;
                }
            }
        }
    }
    assert!(checked > 5000);
}

#[test]
fn intersnake_marks_each_value_once() {
    for bx in boxes(6, 6) {
        for l in partitions_up_to(6, bx) {
            for m in rectangles(bx) {
                if l.is_empty() || m.size() > 6 {
                    continue;
                }
                for t in enumerate_buch_tableaux(&l, &m, bx) {
                    let s = intersnake(&t);
                    let mut values: Vec<u32> = s.iter().map(|p| p.2).collect();
                    values.sort_unstable();
                    values.dedup();
                    assert_eq!(values.len(), s.len(), "{t:?} {s:?}");
                    for &(i, j, v) in &s {
                        assert!(t.get(i + 1, j + 1).unwrap().contains(v));
                    }
                }
            }
        }
    }
}

#[test]
fn second_involution_pairs_survivors() {
    let mut instances = 0;
    for bx in boxes(7, 7) {
        for l in partitions_up_to(8, bx) {
            for m in rectangles(bx) {
                if l.size() + m.size() > 14 {
                    continue;
                }
                let Ok(case) = NearRectangleCase::new(&l, &m, bx) else { continue };
                let all = enumerate_buch_tableaux(&l, &m, bx);
                for t in all.iter().filter(|t| case.first.mismatch(t).is_none()) {
                    match case.i2(t) {
                        SecondOutcome::Fixed => assert_eq!(t, &case.first.m),
                        SecondOutcome::Partner(u) => {
                            assert_eq!(t.size().abs_diff(u.size()), 1);
                            assert_eq!(case.i2(&u), SecondOutcome::Partner(t.clone()));
                        }
                        SecondOutcome::Unmatched => {
                            let u = case.i3(t).unwrap();
                            assert_eq!(&case.i3(&u).unwrap(), t);
                        }
                    }
                }
                let matching = case.matching(&all).unwrap();
                assert!(verify_matching(&matching, &l, &m, bx, &all).all_pass());
                instances += 1;
            }
        }
    }
    assert!(instances > 200);
}

#[test]
fn matchings_in_the_multiplicity_free_range() {
    let mut built = 0;
    for bx in boxes(4, 4) {
        let shapes = partitions_in_box(bx);
        for l in &shapes {
            for m in &shapes {
                let q = RichardsonQuadruple::new(l.clone(), m.clone(), bx).unwrap();
                if q.is_zero_product() || !is_multiplicity_free(&q).verdict {
                    continue;
                }
                let all = enumerate_buch_tableaux(l, m, bx);
                let matching = build_matching(l, m, bx).unwrap();
                let rep = verify_matching(&matching, l, m, bx, &all);
                assert!(rep.all_pass(), "{q}: {rep:?}");
                built += 1;
            }
        }
    }
    assert!(built > 500);
}
