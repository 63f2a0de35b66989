//! Acceptance run: one line per criterion with its measurement and timing.
//! Exits nonzero if any criterion fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use bbdegen::complex::{transport, AffineComplex, ComplexSide};
use bbdegen::complex_basic::{build_complex, dlt_verify, face_quartet};
use bbdegen::complex_general::*;
use bbdegen::discriminant::{discriminant, ComponentShape};
use bbdegen::geometry::linalg::*;
use bbdegen::geometry::*;
use bbdegen::homology::cellular_homology;
use bbdegen::io::{example, mpcp_heights, EXAMPLES};
use bbdegen::nef::NefPartition;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

struct Runner {
    failed: Vec<usize>,
}

impl Runner {
    fn run(&mut self, id: usize, title: &str, limit: Option<Duration>, check: impl FnOnce() -> Check) {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {}", msg))
        });
        let elapsed = start.elapsed();
        let late = limit.is_some_and(|l| elapsed > l);
        let ok = outcome.is_ok() && !late;
        let limit_note = limit.map_or(String::new(), |l| format!(", limit {} s", l.as_secs()));
        let detail = match outcome {
            Ok(d) if late => format!("{}; over time", d),
            Ok(d) | Err(d) => d,
        };
        println!(
            "criterion {:>2} {}: {}: {} [{:.2} s{}]",
            id,
            if ok { "PASS" } else { "FAIL" },
            title,
            detail,
            elapsed.as_secs_f64(),
            limit_note
        );
        if !ok {
            self.failed.push(id);
        }
    }
}

fn secs(s: u64) -> Option<Duration> {
    Some(Duration::from_secs(s))
}

fn schoen() -> &'static NefPartition {
    static CELL: OnceLock<NefPartition> = OnceLock::new();
    CELL.get_or_init(|| example("schoen").unwrap())
}

fn mpcp_setup(name: &str) -> GeneralSetup {
    let np = example(name).unwrap();
    let file = mpcp_heights(name).unwrap();
    let hd = HeightData::new(&np, file.h.as_deref(), file.check_h.as_deref()).unwrap();
    GeneralSetup::new(&np, hd, None).unwrap()
}

fn schoen_mpcp() -> &'static GeneralSetup {
    static CELL: OnceLock<GeneralSetup> = OnceLock::new();
    CELL.get_or_init(|| mpcp_setup("schoen"))
}

fn anticanonical_setup(np: &NefPartition) -> GeneralSetup {
    GeneralSetup::new(np, HeightData::anticanonical(np).unwrap(), None).unwrap()
}

fn sorted_vertices(p: &Polyhedron) -> Vec<QVec> {
    let mut v = p.vertices.clone();
    v.sort();
    v
}

fn hull(pts: &[ZVec]) -> Polyhedron {
    Polyhedron::from_integral(LatticeSpace::new(pts[0].len(), Side::M), pts).unwrap()
}

fn nabla_vertices() -> Check {
    let np = schoen();
    let r = |s: i64| zvec(&[s, 0, 0, 0, 0]);
    let s = [zvec(&[0, -1, -1, 0, 0]), zvec(&[0, 1, 0, 0, 0]), zvec(&[0, 0, 1, 0, 0])];
    let t = [zvec(&[0, 0, 0, -1, -1]), zvec(&[0, 0, 0, 1, 0]), zvec(&[0, 0, 0, 0, 1])];
    let mut expected: Vec<QVec> = Vec::new();
    for j in 0..3 {
        expected.push(to_q(&add(&r(-1), &t[j])));
        expected.push(to_q(&add(&r(1), &s[j])));
        for i in 0..3 {
            expected.push(to_q(&add(&s[i], &t[j])));
        }
    }
    expected.sort();
    let got = sorted_vertices(&np.nabla);
    ensure(got == expected, || format!("{} vertices, differing from R-+T, R++S, S+T", got.len()))?;
    Ok(format!("{} vertices, exact match", got.len()))
}

/// The 15 expected cells by type, each as (summand in part 1, summand in part 2).
fn expected_cells() -> Vec<(&'static str, Vec<ZVec>, Vec<ZVec>)> {
    let p0 = |i: usize| [zvec(&[0, -1, -1, 0, 0]), zvec(&[0, 2, -1, 0, 0]), zvec(&[0, -1, 2, 0, 0])][i % 3].clone();
    let p1 = |i: usize| [zvec(&[1, -1, -1, 0, 0]), zvec(&[1, 2, -1, 0, 0]), zvec(&[1, -1, 2, 0, 0])][i % 3].clone();
    let q0 = |j: usize| [zvec(&[0, 0, 0, -1, -1]), zvec(&[0, 0, 0, 2, -1]), zvec(&[0, 0, 0, -1, 2])][j % 3].clone();
    let q1 = |j: usize| [zvec(&[-1, 0, 0, -1, -1]), zvec(&[-1, 0, 0, 2, -1]), zvec(&[-1, 0, 0, -1, 2])][j % 3].clone();
    let mut out = Vec::new();
    for j in 0..3 {
        out.push(("plus", (0..3).map(p1).collect(), vec![q0(j + 1), q0(j + 2)]));
    }
    for i in 0..3 {
        out.push(("minus", vec![p0(i + 1), p0(i + 2)], (0..3).map(q1).collect()));
    }
    for i in 0..3 {
        for j in 0..3 {
            out.push((
                "mixed",
                vec![p0(i + 1), p0(i + 2), p1(i + 1), p1(i + 2)],
                vec![q0(j + 1), q0(j + 2), q1(j + 1), q1(j + 2)],
            ));
        }
    }
    out
}

fn is_face_of(a: &Polyhedron, part: &Polyhedron) -> bool {
    let want = sorted_vertices(a);
    let fl = face_lattice(part);
    fl.faces.iter().filter(|f| !f.is_empty()).any(|f| sorted_vertices(&part.face_polyhedron(f)) == want)
}

fn delta_cells() -> Check {
    let np = schoen();
    let ac = build_complex(np, ComplexSide::Delta).map_err(|e| e.to_string())?;
    let mut got: Vec<Vec<QVec>> = ac.maximal_cells().iter().map(|&c| sorted_vertices(&ac.cells[c].polytope)).collect();
    got.sort();
    let mut counts = [0usize; 3];
    let mut expected = Vec::new();
    for (kind, a, b) in expected_cells() {
        let (pa, pb) = (hull(&a), hull(&b));
        ensure(is_face_of(&pa, &np.parts[0]) && is_face_of(&pb, &np.parts[1]), || {
            format!("{} summand is not a face of its part", kind)
        })?;
        let sums: Vec<ZVec> = a.iter().flat_map(|x| b.iter().map(move |y| add(x, y))).collect();
        let cell = hull(&sums);
        ensure(cell.dim == 3, || format!("{} cell of dimension {}", kind, cell.dim))?;
        counts[["plus", "minus", "mixed"].iter().position(|k| *k == kind).unwrap()] += 1;
        expected.push(sorted_vertices(&cell));
    }
    expected.sort();
    ensure(got == expected, || format!("{} maximal cells, differing from the expected 15", got.len()))?;
    Ok(format!("{} maximal cells: {} + {} + {} with matching Minkowski summands", got.len(), counts[0], counts[1], counts[2]))
}

fn delta_homology() -> Check {
    let ac = build_complex(schoen(), ComplexSide::Delta).map_err(|e| e.to_string())?;
    let h: Vec<String> = cellular_homology(&ac).iter().map(|g| g.to_string()).collect();
    ensure(h == ["Z", "0", "0", "Z"], || format!("homology {}", h.join(", ")))?;
    Ok(format!("H_0..H_3 = {}", h.join(", ")))
}

fn mpcp_discriminant() -> Check {
    let setup = schoen_mpcp();
    let ac = setup.complex(ComplexSide::Delta).map_err(|e| e.to_string())?;
    let report = discriminant(&ac, |c| setup.summand_dims(ComplexSide::Delta, &ac, c).unwrap()).map_err(|e| e.to_string())?;
    let sizes = report.family_sizes();
    let circles = report.components.iter().filter(|c| c.shape == ComponentShape::Circle).count();
    let summary = format!(
        "{} components, families {:?}, {} circles, all primitive transvections {}",
        report.components.len(),
        sizes,
        circles,
        report.all_primitive()
    );
    let unipotent = report.components.iter().all(|c| c.rank == 1 && c.trace == Int::from(ac.dim() as i64));
    ensure(
        report.components.len() == 24 && sizes == [12, 12] && circles == 24 && report.all_primitive() && unipotent,
        || summary.clone(),
    )?;
    Ok(summary)
}

fn quartet_identities() -> Check {
    let (mut checked, mut violations) = (0, 0);
    for name in EXAMPLES {
        let np = example(name).map_err(|e| e.to_string())?;
        for sp in [np.clone(), np.swap_sides().map_err(|e| e.to_string())?] {
            let fl = face_lattice(&sp.delta_star);
            let (r, n) = (sp.r(), sp.rank());
            for f in fl.faces.iter().filter(|f| !f.is_empty() && (f.dim as usize) < sp.delta_star.dim) {
                let sigma_star = sp.delta_star.face_polyhedron(f);
                if (0..r).any(|i| sp.beta_star(&sigma_star, i).unwrap().is_none()) {
                    continue;
                }
                match face_quartet(&sp, &sigma_star) {
                    Ok(q) if q.check.dim + r == sigma_star.dim + 1
                        && q.sigma.dim + r == q.check_star.dim + 1
                        && q.check.dim + q.sigma.dim == n - r => {}
                    _ => violations += 1,
                }
                checked += 1;
            }
        }
    }
    ensure(violations == 0, || format!("{} violations in {} quartets", violations, checked))?;
    Ok(format!("{} quartets over {} instances, 0 violations", checked, EXAMPLES.len()))
}

fn general_checks(label: &str, setup: &GeneralSetup) -> Result<usize, String> {
    let dlt = dlt_general_verify(setup).map_err(|e| format!("{}: {}", label, e))?;
    let inv = verify_involution(setup);
    ensure(inv.discrepancy.is_none(), || format!("{}: {}", label, inv.discrepancy.clone().unwrap()))?;
    Ok(dlt.nabla_checked + dlt.delta_checked + inv.checked)
}

fn legendre_checks() -> Check {
    let mut checked = 0;
    for name in EXAMPLES {
        let np = example(name).map_err(|e| e.to_string())?;
        let rep = dlt_verify(&np).map_err(|e| format!("{}: {}", name, e))?;
        checked += rep.nabla_vertices + rep.delta_vertices;
        checked += general_checks(name, &anticanonical_setup(&np))?;
    }
    checked += general_checks("schoen mpcp", schoen_mpcp())?;
    checked += general_checks("cube mpcp", &mpcp_setup("cube"))?;
    Ok(format!("{} instances plus 2 MPCP setups, {} local checks, 0 discrepancies", EXAMPLES.len(), checked))
}

fn specialization_mismatches(general: &AffineComplex, basic: &AffineComplex) -> (usize, usize) {
    let mut mismatches = 0;
    if general.f_vector() != basic.f_vector() {
        return (1, 0);
    }
    for (x, y) in general.cells.iter().zip(&basic.cells) {
        if x.polytope != y.polytope || x.facets != y.facets {
            mismatches += 1;
        }
    }
    let mut transports = 0;
    for &c in general.maximal_cells() {
        for &c2 in general.maximal_cells() {
            let shared: Vec<usize> =
                general.cells[c].vertices.iter().copied().filter(|v| general.cells[c2].vertices.contains(v)).collect();
            for &v in &shared {
                for &v2 in &shared {
                    if transport(general, v, c, v2, c2).ok() != transport(basic, v, c, v2, c2).ok() {
                        mismatches += 1;
                    }
                    transports += 1;
                }
            }
        }
    }
    (mismatches, transports)
}

fn specialization() -> Check {
    let (mut mismatches, mut cells, mut transports) = (0, 0, 0);
    for name in EXAMPLES {
        let setup = anticanonical_setup(&example(name).map_err(|e| e.to_string())?);
        for side in [ComplexSide::Nabla, ComplexSide::Delta] {
            let general = setup.complex(side).map_err(|e| e.to_string())?;
            let basic = build_complex(&setup.np, side).map_err(|e| e.to_string())?;
            let (m, t) = specialization_mismatches(&general, &basic);
            mismatches += m;
            transports += t;
            cells += basic.cells.len();
        }
    }
    let summary = format!("{} cells and {} transports compared, {} mismatches", cells, transports, mismatches);
    ensure(mismatches == 0, || summary.clone())?;
    Ok(summary)
}

fn simplicity(setup: &GeneralSetup, side: ComplexSide) -> Result<SimplicityReport, String> {
    let ac = setup.complex(side).map_err(|e| e.to_string())?;
    Ok(match side {
        ComplexSide::Nabla => simplicity_check(&setup.np, &setup.heights, &setup.good, &ac),
        ComplexSide::Delta => simplicity_check(&setup.dual.np, &setup.dual.heights, &setup.dual.good, &ac),
    })
}

fn simplicity_verdicts(setup: &GeneralSetup, expect_simple: bool) -> Check {
    let mut verdicts = Vec::new();
    for side in [ComplexSide::Nabla, ComplexSide::Delta] {
        let report = simplicity(setup, side)?;
        let simple = report.is_simple();
        verdicts.push(format!("{} {}", side.name(), if simple { "simple" } else { "not simple" }));
        ensure(simple == expect_simple, || verdicts.join(", "))?;
    }
    Ok(verdicts.join(", "))
}

fn random_points(rng: &mut ChaCha8Rng, d: usize, n: usize) -> Vec<common::Pt> {
    let mut pts: Vec<common::Pt> = (0..n).map(|_| (0..d).map(|_| rng.gen_range(-2..=2)).collect()).collect();
    pts.sort();
    pts.dedup();
    pts
}

fn oracle_equivalence() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut errors = Vec::new();
    let mut lattices = 0;
    while lattices < 128 {
        let (d, n) = (rng.gen_range(2..=5), rng.gen_range(6..=20));
        let pts = random_points(&mut rng, d, n);
        if !common::full_dimensional(&pts) {
            continue;
        }
        if let Err(e) = common::check_face_lattice(&pts) {
            errors.push(e);
        }
        lattices += 1;
    }
    let mut minkowski_faces = 0;
    for _ in 0..128 {
        let d = rng.gen_range(1..=3);
        let (na, nb) = (rng.gen_range(1..=6), rng.gen_range(1..=6));
        let (a, b) = (random_points(&mut rng, d, na), random_points(&mut rng, d, nb));
        match common::check_minkowski(&a, &b) {
            Ok(k) => minkowski_faces += k,
            Err(e) => errors.push(e),
        }
    }
    let complexes: Vec<&AffineComplex> = common::corpus_complexes().iter().filter(|ac| ac.dim() >= 1).collect();
    let mut nontrivial = 0;
    for _ in 0..400 {
        let ac = complexes[rng.gen_range(0..complexes.len())];
        let (v, c, v2, c2) = common::pick_loop(ac, rng.gen(), rng.gen(), rng.gen(), rng.gen());
        match common::check_transport(ac, v, c, v2, c2) {
            Ok(true) => nontrivial += 1,
            Ok(false) => {}
            Err(e) => errors.push(e),
        }
    }
    let summary = format!(
        "face lattices 128, Minkowski pairs 128 ({} faces), transports 400 ({} nontrivial), {} mismatches",
        minkowski_faces,
        nontrivial,
        errors.len()
    );
    ensure(errors.is_empty(), || format!("{}; first: {}", summary, errors[0]))?;
    Ok(summary)
}

fn existence() -> Check {
    let np = schoen();
    let mut lines = Vec::new();
    let file = mpcp_heights("schoen").map_err(|e| e.to_string())?;
    let inputs = [
        ("anticanonical", HeightData::anticanonical(np).map_err(|e| e.to_string())?),
        ("mpcp", HeightData::new(np, file.h.as_deref(), file.check_h.as_deref()).map_err(|e| e.to_string())?),
    ];
    for (label, hd) in inputs {
        let ld = LiftedData::new(np, &hd).map_err(|e| e.to_string())?;
        let ex = existence_construction(np, &hd, &ld).map_err(|e| format!("{}: {}", label, e))?;
        lines.push(format!("{} m0 = {}, n0 = {}", label, ex.m0, ex.n0));
        ensure(ex.report.is_good(), || format!("{}: not good: {:?}", label, ex.report.problems))?;
    }
    Ok(format!("{}; good", lines.join("; ")))
}

fn main() -> ExitCode {
    let mut runner = Runner { failed: Vec::new() };
    runner.run(1, "Schoen nabla vertices", secs(1), nabla_vertices);
    runner.run(2, "Schoen B_Delta maximal cells", secs(5), delta_cells);
    runner.run(3, "Schoen B_Delta cellular homology", secs(60), delta_homology);
    runner.run(4, "Schoen MPCP discriminant", secs(300), mpcp_discriminant);
    runner.run(5, "face quartet dimension identities", None, quartet_identities);
    runner.run(6, "discrete Legendre transform and involution", None, legendre_checks);
    runner.run(7, "specialization to the basic complex", None, specialization);
    runner.run(8, "simplicity: Schoen MPCP", secs(300), || simplicity_verdicts(schoen_mpcp(), true));
    runner.run(8, "simplicity: cube K3 MPCP", secs(300), || simplicity_verdicts(&mpcp_setup("cube"), true));
    runner.run(8, "simplicity: anticanonical quintic", secs(300), || {
        simplicity_verdicts(&anticanonical_setup(&example("quintic").unwrap()), false)
    });
    runner.run(9, "oracle equivalence", None, oracle_equivalence);
    runner.run(10, "existence construction on Schoen", secs(600), existence);
    if runner.failed.is_empty() {
        println!("acceptance: all criteria pass");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failing criteria {:?}", runner.failed);
        ExitCode::FAILURE
    }
}
