use bbdegen::complex::{transport, vertex_chart, AffineComplex, ComplexSide};
use bbdegen::complex_basic::build_complex;
use bbdegen::complex_general::*;
use bbdegen::io::{example, EXAMPLES};

fn trivial_setup(name: &str) -> GeneralSetup {
    let np = example(name).unwrap();
    let hd = HeightData::anticanonical(&np).unwrap();
    GeneralSetup::new(&np, hd, None).unwrap()
}

fn same_cells(a: &AffineComplex, b: &AffineComplex) {
    assert_eq!(a.f_vector(), b.f_vector());
    for (x, y) in a.cells.iter().zip(&b.cells) {
        assert_eq!(x.polytope, y.polytope);
        assert_eq!(x.facets, y.facets);
    }
}

fn same_transport(a: &AffineComplex, b: &AffineComplex) -> usize {
    let mut count = 0;
    for &c in a.maximal_cells() {
        for &c2 in a.maximal_cells() {
            let shared: Vec<usize> =
                a.cells[c].vertices.iter().copied().filter(|v| a.cells[c2].vertices.contains(v)).collect();
            for &v in &shared {
                for &v2 in &shared {
                    assert_eq!(transport(a, v, c, v2, c2).unwrap(), transport(b, v, c, v2, c2).unwrap());
                    count += 1;
                }
            }
        }
    }
    count
}

#[test]
fn trivial_heights_reproduce_basic_complex() {
    for name in EXAMPLES {
        let setup = trivial_setup(name);
        for side in [ComplexSide::Nabla, ComplexSide::Delta] {
            let general = setup.complex(side).unwrap();
            let basic = build_complex(&setup.np, side).unwrap();
            same_cells(&general, &basic);
            for &v in general.vertex_cells() {
                vertex_chart(&general, v).unwrap();
            }
            assert!(same_transport(&general, &basic) > 0, "{} {}", name, side.name());
        }
    }
}

#[test]
fn trivial_setup_checks() {
    for name in EXAMPLES {
        let setup = trivial_setup(name);
        let inv = verify_involution(&setup);
        assert_eq!(inv.discrepancy, None, "{}", name);
        assert!(inv.checked > 0);
        let alpha = alpha_check(&setup);
        assert!(alpha.is_ok(), "{}: {:?}", name, alpha.problems);
        let dlt = dlt_general_verify(&setup).unwrap();
        assert!(dlt.nabla_checked > 0 && dlt.delta_checked > 0);
    }
}

#[test]
fn quintic_anticanonical_is_not_simple() {
    let setup = trivial_setup("quintic");
    let ac = setup.complex(ComplexSide::Nabla).unwrap();
    let report = simplicity_check(&setup.np, &setup.heights, &setup.good, &ac);
    assert!(!report.is_simple());
    assert!(report.failures() > 0);
}

#[test]
fn existence_on_anticanonical_schoen() {
    let np = example("schoen").unwrap();
    let hd = HeightData::anticanonical(&np).unwrap();
    let ld = LiftedData::new(&np, &hd).unwrap();
    let ex = existence_construction(&np, &hd, &ld).unwrap();
    assert!(ex.report.is_good(), "{:?}", ex.report.problems);
    assert_eq!((ex.m0, ex.n0), (1.into(), 1.into()));
}

fn mpcp_setup(name: &str) -> GeneralSetup {
    let np = example(name).unwrap();
    let file = bbdegen::io::mpcp_heights(name).unwrap();
    let hd = HeightData::new(&np, file.h.as_deref(), file.check_h.as_deref()).unwrap();
    GeneralSetup::new(&np, hd, None).unwrap()
}

fn simplicity(setup: &GeneralSetup, side: ComplexSide, ac: &AffineComplex) -> SimplicityReport {
    match side {
        ComplexSide::Nabla => simplicity_check(&setup.np, &setup.heights, &setup.good, ac),
        ComplexSide::Delta => simplicity_check(&setup.dual.np, &setup.dual.heights, &setup.dual.good, ac),
    }
}

#[test]
fn mpcp_examples_are_simple() {
    for name in ["schoen", "cube"] {
        let setup = mpcp_setup(name);
        for side in [ComplexSide::Nabla, ComplexSide::Delta] {
            let ac = setup.complex(side).unwrap();
            let report = simplicity(&setup, side, &ac);
            assert!(report.mpcp_h && report.mpcp_check_h, "{} {}", name, side.name());
            assert!(report.is_simple(), "{} {}: {:?}", name, side.name(), report.anomalies);
        }
    }
}

#[test]
fn schoen_mpcp_setup() {
    let setup = mpcp_setup("schoen");
    let expected = [vec![486, 1215, 990, 261], vec![261, 990, 1215, 486]];
    for (side, f) in [ComplexSide::Nabla, ComplexSide::Delta].into_iter().zip(expected) {
        let ac = setup.complex(side).unwrap();
        assert_eq!(ac.f_vector(), f);
        for &v in ac.vertex_cells() {
            vertex_chart(&ac, v).unwrap();
        }
    }
    let inv = verify_involution(&setup);
    assert_eq!(inv.discrepancy, None);
    let alpha = alpha_check(&setup);
    assert!(alpha.is_ok(), "{:?}", alpha.problems);
    dlt_general_verify(&setup).unwrap();
}
