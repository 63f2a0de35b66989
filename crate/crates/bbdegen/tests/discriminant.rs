use std::sync::OnceLock;

use bbdegen::complex::{AffineComplex, ComplexSide};
use bbdegen::complex_basic::build_complex;
use bbdegen::complex_general::*;
use bbdegen::discriminant::*;
use bbdegen::geometry::*;
use bbdegen::io::{example, mpcp_heights};

fn mpcp_setup(name: &str) -> GeneralSetup {
    let np = example(name).unwrap();
    let file = mpcp_heights(name).unwrap();
    let hd = HeightData::new(&np, file.h.as_deref(), file.check_h.as_deref()).unwrap();
    GeneralSetup::new(&np, hd, None).unwrap()
}

fn schoen() -> &'static (GeneralSetup, AffineComplex) {
    static CELL: OnceLock<(GeneralSetup, AffineComplex)> = OnceLock::new();
    CELL.get_or_init(|| {
        let setup = mpcp_setup("schoen");
        let ac = setup.complex(ComplexSide::Delta).unwrap();
        (setup, ac)
    })
}

fn triangle() -> AffineComplex {
    let space = LatticeSpace::new(2, Side::N);
    let p = Polyhedron::from_integral(space, &[zv(&[0, 0]), zv(&[1, 0]), zv(&[0, 1])]).unwrap();
    let fl = face_lattice(&p);
    let raw: Vec<(Polyhedron, usize)> =
        (0..fl.faces.len()).filter(|&i| !fl.faces[i].is_empty()).map(|i| (p.face_polyhedron(&fl.faces[i]), i)).collect();
    AffineComplex::assemble(ComplexSide::Nabla, 2, 1, raw, |a, b| fl.subfaces(b).contains(&a))
}

fn zv(x: &[i64]) -> ZVec {
    x.iter().map(|&c| Int::from(c)).collect()
}

#[test]
fn triangle_subdivision_counts() {
    let ac = triangle();
    assert_eq!(ac.f_vector(), vec![3, 3, 1]);
    let bar = barycentric(&ac);
    assert_eq!(bar.counts(), vec![7, 12, 6]);
    // only the three edge barycentres avoid vertices and the 2-cell
    let gamma = initial_gamma(&ac, &bar);
    assert_eq!(gamma.simplices.len(), 3);
    assert!(gamma.simplices.iter().all(|s| s.len() == 1 && ac.cells[s[0]].dim == 1));
    assert_eq!(gamma.closure().len(), 3);
}

#[test]
fn one_dimensional_base_has_empty_locus() {
    let np = example("square").unwrap();
    for side in [ComplexSide::Nabla, ComplexSide::Delta] {
        let ac = build_complex(&np, side).unwrap();
        assert!(ac.dim() < 2);
        let bar = barycentric(&ac);
        assert!(initial_gamma(&ac, &bar).is_empty());
    }
}

#[test]
fn schoen_mpcp_discriminant() {
    let (setup, ac) = schoen();
    assert_eq!(ac.f_vector(), vec![261, 990, 1215, 486]);
    let report = discriminant(ac, |c| setup.summand_dims(ComplexSide::Delta, ac, c).unwrap()).unwrap();
    assert_eq!(report.initial, 4374);
    assert_eq!(report.removed, 3942);
    assert_eq!(report.components.len(), 24);
    assert_eq!(report.family_sizes(), vec![12, 12]);
    assert!(report.all_primitive());
    for c in &report.components {
        assert_eq!(c.shape, ComponentShape::Circle);
        assert_eq!(c.simplices.len(), 18);
        assert_eq!(c.trace, Int::from(3));
        assert_eq!(c.rank, 1);
    }
    assert!(report.to_string().starts_with("24 components (12 + 12)\n"));
}

#[test]
fn prune_is_idempotent() {
    let (_, ac) = schoen();
    let bar = barycentric(ac);
    let once = prune(&initial_gamma(ac, &bar), ac).unwrap();
    let twice = prune(&once.locus, ac).unwrap();
    assert_eq!(twice.removed, 0);
    assert_eq!(twice.locus, once.locus);
}

#[test]
fn cube_k3_points() {
    let setup = mpcp_setup("cube");
    for side in [ComplexSide::Nabla, ComplexSide::Delta] {
        let ac = setup.complex(side).unwrap();
        assert_eq!(ac.dim(), 2);
        let report = discriminant(&ac, |c| setup.summand_dims(side, &ac, c).unwrap()).unwrap();
        // census: interior edges whose two triangles disagree
        let census = ac.by_dim[1]
            .iter()
            .filter(|&&e| !loop_transport(&ac, &vec![e]).unwrap().matrix.is_identity())
            .count();
        assert_eq!(report.components.len(), census);
        // one focus-focus point per unit of the K3 Euler number
        assert_eq!(census, 24, "{}", side.name());
        assert!(report.all_primitive());
        for c in &report.components {
            assert_eq!(c.shape, ComponentShape::Point);
            assert_eq!(c.trace, Int::from(2));
        }
    }
}
