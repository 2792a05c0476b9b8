use super::*;
use crate::weights::{power_weight, Weight};

fn line(values: &[f64]) -> GridFunction {
    GridFunction::new(Grid::line(values.len(), 1.0).unwrap(), values.to_vec()).unwrap()
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * (1.0 + a.abs().max(b.abs()))
}

/// Independent oracle: every interval of a 1D grid, mean computed by hand.
fn interval_max(values: &[f64], x: usize) -> f64 {
    let n = values.len();
    let mut best = f64::NEG_INFINITY;
    for a in 0..=x {
        for e in x + 1..=n {
            let m = values[a..e].iter().map(|v| v.abs()).sum::<f64>() / (e - a) as f64;
            best = best.max(m);
        }
    }
    best
}

#[test]
fn spike_matches_interval_oracle() {
    let f = line(&[0.0, 0.0, 4.0, 0.0]);
    let out = hl_maximal(&f, &CubeFamily::all(*f.grid())).unwrap();
    for x in 0..4 {
        assert!(close(out.value(x), interval_max(f.values(), x)));
    }
    assert_eq!(out.value(2), 4.0);
    assert_eq!(out.value(0), 4.0 / 3.0);
}

#[test]
fn indicator_and_constant() {
    let g = Grid::plane(7, 6, 0.5).unwrap();
    let fam = CubeFamily::all(g);
    let q = Cube::square(2, 1, 3);
    let out = hl_maximal(&GridFunction::indicator(g, &q).unwrap(), &fam).unwrap();
    for k in q.rect(2).indices(&g) {
        assert_eq!(out.value(k), 1.0);
    }
    let c = hl_maximal(&GridFunction::constant(g, 0.7), &fam).unwrap();
    assert!(c.values.values().iter().all(|&v| v == 0.7));
    let s = sharp_maximal(&GridFunction::constant(g, 0.7), &fam).unwrap();
    assert!(s.values.values().iter().all(|&v| v == 0.0));
}

#[test]
fn sharp_two_points() {
    let f = line(&[0.0, 1.0]);
    let out = sharp_maximal(&f, &CubeFamily::all(*f.grid())).unwrap();
    assert_eq!(out.values.values(), &[0.5, 0.5]);
}

#[test]
fn sharp_of_indicator_reaches_one_half() {
    let g = Grid::line(8, 1.0).unwrap();
    let q = Cube::line(2, 4);
    let out = sharp_maximal(&GridFunction::indicator(g, &q).unwrap(), &CubeFamily::all(g)).unwrap();
    for k in 0..8 {
        assert!(out.value(k) <= 0.5);
    }
    for k in 2..6 {
        assert_eq!(out.value(k), 0.5);
    }
}

#[test]
fn argmax_reproduces_value() {
    let g = Grid::plane(9, 9, 1.0).unwrap();
    let f = GridFunction::from_profile(g, |u| (6.0 * u[0]).sin() * (3.0 * u[1]).cos()).unwrap();
    let fam = CubeFamily::all(g);
    let table = PrefixTable::new(&f.abs());
    let out = hl_maximal(&f, &fam).unwrap();
    for (k, c) in out.argmax.as_ref().unwrap().iter().enumerate() {
        assert!(c.contains_index(&g, k));
        assert!(close(table.cube_mean(c).unwrap(), out.value(k)));
    }
}

#[test]
fn argmax_is_first_in_enumeration_order() {
    // all intervals of a constant function tie; the side-1 cube comes first
    let f = line(&[2.0; 5]);
    let out = hl_maximal(&f, &CubeFamily::all(*f.grid())).unwrap();
    for (k, c) in out.argmax.unwrap().iter().enumerate() {
        assert_eq!(*c, Cube::line(k, 1));
    }
}

#[test]
fn restricted_matches_whole_domain_and_subgrid() {
    let g = Grid::line(12, 1.0).unwrap();
    let f = GridFunction::from_profile(g, |u| (9.0 * u[0]).cos()).unwrap();
    let fam = CubeFamily::all(g);
    let whole = restricted_maximal(&f, &Cube::whole(&g).unwrap(), &fam).unwrap();
    let global = hl_maximal(&f, &fam).unwrap();
    for k in 0..12 {
        assert_eq!(whole.value_at(k), Some(global.value(k)));
    }
    let q0 = Cube::line(3, 5);
    let r = restricted_maximal(&f, &q0, &fam).unwrap();
    assert_eq!(r.value_at(2), None);
    assert_eq!(r.value_at(8), None);
    let sub = line(&f.values()[3..8]);
    let m = hl_maximal(&sub, &CubeFamily::all(*sub.grid())).unwrap();
    for k in 3..8 {
        assert!(close(r.value_at(k).unwrap(), m.value(k - 3)));
    }
    assert_eq!(r.values_on_q0().len(), 5);
}

#[test]
fn restriction_identity_in_2d() {
    let g = Grid::plane(8, 8, 1.0).unwrap();
    let b = GridFunction::from_profile(g, |u| 1.0 + u[0] * u[1] + (5.0 * u[0]).sin()).unwrap();
    let fam = CubeFamily::all(g);
    let table = PrefixTable::new(&b.abs());
    for q in fam.enumerate() {
        let global = hl_maximal(&b.restrict(&q).unwrap(), &fam).unwrap();
        let local = restricted_values(&table, &q).unwrap();
        for (k, v) in q.rect(2).indices(&g).zip(local) {
            assert!(close(global.value(k), v), "{q:?}");
        }
    }
}

#[test]
fn maximal_commutator_examples() {
    let g = Grid::line(3, 0.5).unwrap();
    let b = GridFunction::new(g, vec![0.0, 0.5, 1.0]).unwrap();
    let out = maximal_commutator(&b, &b, &CubeFamily::all(g)).unwrap();
    // six intervals, hand-evaluated
    let oracle = |x: usize| {
        let mut best = 0.0f64;
        for a in 0..=x {
            for e in x + 1..=3 {
                let s: f64 = (a..e).map(|y| (b.values()[x] - b.values()[y]).abs() * b.values()[y]).sum();
                best = best.max(s / (e - a) as f64);
            }
        }
        best
    };
    for x in 0..3 {
        assert!(close(out.value(x), oracle(x)));
    }
    assert!(close(out.value(0), 1.25 / 3.0));
    let c = maximal_commutator(&GridFunction::constant(g, 3.0), &b, &CubeFamily::all(g)).unwrap();
    assert!(c.values.values().iter().all(|&v| v == 0.0));
}

#[test]
fn commutators_of_constant_symbol_vanish() {
    let g = Grid::line(10, 1.0).unwrap();
    let f = GridFunction::from_profile(g, |u| (7.0 * u[0]).sin()).unwrap();
    let b = GridFunction::constant(g, 0.3);
    let fam = CubeFamily::all(g);
    let cm = commutator_maximal(&b, &f, &fam).unwrap();
    let cs = commutator_sharp(&b, &f, &fam).unwrap();
    assert!(cm.max_abs() < 1e-15);
    assert!(cs.max_abs() < 1e-15);
}

#[test]
fn commutator_with_indicator_is_b_minus_restricted() {
    let g = Grid::line(16, 1.0 / 16.0).unwrap();
    let b = GridFunction::from_profile(g, |u| 1.0 + u[0] * (1.0 - u[0])).unwrap();
    let fam = CubeFamily::all(g);
    let table = PrefixTable::new(&b.abs());
    for q in fam.enumerate() {
        let chi = GridFunction::indicator(g, &q).unwrap();
        let c = commutator_maximal(&b, &chi, &fam).unwrap();
        let m_q = restricted_values(&table, &q).unwrap();
        for (k, m) in q.rect(1).indices(&g).zip(m_q) {
            assert!(close(c.values()[k], b.values()[k] - m));
        }
    }
}

#[test]
fn sharp_of_restriction_matches_generic() {
    for g in [Grid::line(11, 1.0).unwrap(), Grid::plane(6, 7, 1.0).unwrap()] {
        let b = GridFunction::from_profile(g, |u| (4.0 * u[0]).sin() + u[1] - 0.3).unwrap();
        let table = PrefixTable::new(&b);
        let fam = CubeFamily::all(g);
        for q in fam.enumerate() {
            let generic = sharp_maximal(&b.restrict(&q).unwrap(), &fam).unwrap();
            let fast = sharp_of_restriction(&b, &q, &table).unwrap();
            for (k, v) in q.rect(g.dim()).indices(&g).zip(fast) {
                assert!(close(generic.value(k), v));
            }
        }
    }
}

#[test]
fn commutator_of_indicator_matches_generic() {
    let g = Grid::plane(6, 5, 1.0).unwrap();
    let b = GridFunction::from_profile(g, |u| u[0] * u[0] + 0.5 * u[1]).unwrap();
    let fam = CubeFamily::all(g);
    for q in fam.enumerate() {
        let chi = GridFunction::indicator(g, &q).unwrap();
        let generic = maximal_commutator(&b, &chi, &fam).unwrap();
        let fast = maximal_commutator_of_indicator(&b, &q).unwrap();
        for (k, v) in q.rect(2).indices(&g).zip(fast) {
            assert!(close(generic.value(k), v));
        }
    }
}

#[test]
fn fractional_of_unit_function() {
    let g = Grid::line(9, 1.0).unwrap();
    let out = weighted_fractional_maximal(&GridFunction::constant(g, 1.0), &Weight::unit(g), 0.4, 2.0, &CubeFamily::all(g)).unwrap();
    let expected = 9f64.powf(0.4);
    assert!(out.values.values().iter().all(|&v| close(v, expected)));
}

#[test]
fn fractional_r1_matches_unweighted_fractional_average() {
    let g = Grid::line(13, 0.25).unwrap();
    let f = GridFunction::from_profile(g, |u| (5.0 * u[0]).cos() + 0.2).unwrap();
    let alpha = 0.35;
    let out = weighted_fractional_maximal(&f, &Weight::unit(g), alpha, 1.0, &CubeFamily::all(g)).unwrap();
    // |Q|^{α/n} · mean_Q |f|, coded directly
    for x in 0..13 {
        let mut best = 0.0f64;
        for a in 0..=x {
            for e in x + 1..=13 {
                let len = (e - a) as f64 * 0.25;
                let mean = f.values()[a..e].iter().map(|v| v.abs()).sum::<f64>() / (e - a) as f64;
                best = best.max(len.powf(alpha) * mean);
            }
        }
        assert!(close(out.value(x), best));
    }
}

#[test]
fn fractional_is_homogeneous_and_validates() {
    let g = Grid::plane(6, 6, 0.2).unwrap();
    let f = GridFunction::from_profile(g, |u| u[0] - u[1]).unwrap();
    let w = power_weight(g, &[0.6, 0.6], 0.5, 0.1).unwrap();
    let fam = CubeFamily::all(g);
    let a = weighted_fractional_maximal(&f, &w, 0.5, 1.5, &fam).unwrap();
    let b = weighted_fractional_maximal(&f.scale(-3.0), &w, 0.5, 1.5, &fam).unwrap();
    for k in 0..g.len() {
        assert!(close(3.0 * a.value(k), b.value(k)));
    }
    assert!(weighted_fractional_maximal(&f, &w, 2.0, 1.5, &fam).is_err());
    assert!(weighted_fractional_maximal(&f, &w, 0.5, 0.0, &fam).is_err());
}

#[test]
fn sampled_family_missing_a_point_errors() {
    let g = Grid::line(30, 1.0).unwrap();
    let f = GridFunction::constant(g, 1.0);
    let fam = CubeFamily::sampled(g, 1, 3);
    assert!(matches!(hl_maximal(&f, &fam), Err(Error::UncoveredPoint { .. })));
    assert!(matches!(brute::hl_maximal(&f, &fam), Err(Error::UncoveredPoint { .. })));
}

#[test]
fn dyadic_family_agrees_with_reference() {
    let g = Grid::plane(9, 6, 1.0).unwrap();
    let f = GridFunction::from_profile(g, |u| (11.0 * u[0] * u[1]).sin()).unwrap();
    let fam = CubeFamily::dyadic(g);
    let fast = hl_maximal(&f, &fam).unwrap();
    let slow = brute::hl_maximal(&f, &fam).unwrap();
    for k in 0..g.len() {
        assert!(close(fast.value(k), slow.value(k)));
    }
}

#[test]
fn grid_mismatch_is_rejected() {
    let f = line(&[1.0, 2.0, 3.0]);
    let other = CubeFamily::all(Grid::line(4, 1.0).unwrap());
    assert!(hl_maximal(&f, &other).is_err());
}
