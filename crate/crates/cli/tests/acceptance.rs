//! Acceptance checklist: one test per shipped claim, each with an oracle
//! independent of the code path under test. Run with `--nocapture` to see
//! one PASS line per criterion.

use std::process::Command;

use modalkit_core::nosignal::{
    CellId, LpOutcome, ProbabilityTable, RequirementIvVerdict, SymbolicCell, build_system,
    cell_forms, forced_zero_cells, lp_maximize, mobit_anchors, pr_box_check, relaxed_unique_table,
    requirement_iv_verdict, solve, symbolic_cells,
};
use modalkit_core::scenarios::{MobitScenario, possibility_table, singlet};
use modalkit_core::verifiers::{
    ColoringProblem, coloring_parity_certificate, find_colorings, find_local_models,
    local_model_candidates, mobit_triangle,
};
use modalkit_core::{
    Effect, FieldElement, Matrix, PrimeField, Rational, Scalar, State, Vector, compose, det,
    enumerate_effects, enumerate_measurements, is_possible, joint_effect, pair, rref,
};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const POSSIBILITY_GOLDEN: &str = include_str!("golden/possibility_table.txt");
const RELAXED_GOLDEN: &str = include_str!("golden/relaxed_table.txt");

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_modalkit"))
}

fn stdout_of(cmd: &mut Command) -> String {
    let out = cmd.output().expect("binary runs");
    assert!(out.status.success(), "expected exit 0, got {:?}", out.status);
    String::from_utf8(out.stdout).expect("utf-8 output")
}

#[test]
fn criterion_01_possibility_grid_reproduction() {
    let table = MobitScenario::new(2).unwrap().table().unwrap();
    // Rows and columns run X+, X-, Y+, Y-, Z+, Z-, which test the effects
    // a, b, c, a, b, c in that order; a joint outcome of the singlet is
    // impossible exactly when both sides test the same effect.
    let effect_of = [0, 1, 2, 0, 1, 2];
    for r in 0..6 {
        for c in 0..6 {
            assert_eq!(
                table.cell(r, c),
                effect_of[r] != effect_of[c],
                "cell ({r},{c})"
            );
        }
    }
    assert_eq!(table.possible_count(), 24);
    assert_eq!(table.render_text(), POSSIBILITY_GOLDEN);
    assert_eq!(stdout_of(bin().arg("table")), POSSIBILITY_GOLDEN);
    for p in [3, 5, 7] {
        assert_eq!(
            MobitScenario::new(p).unwrap().table().unwrap(),
            table,
            "table over GF({p})"
        );
    }
    println!("criterion 01 PASS: singlet possibility grid matches the golden file; p in {{2,3,5,7}} agree");
}

#[test]
fn criterion_02_singlet_blocks_repeated_effects() {
    for p in [2u64, 3, 5] {
        let field = PrimeField::new(p).unwrap();
        let s = singlet(p).unwrap();
        let effects = enumerate_effects(field, 2).unwrap();
        assert!(!effects.is_empty());
        for e in &effects {
            let joint = joint_effect(e, e).unwrap();
            assert!(
                pair(&joint, &s).unwrap().is_zero(),
                "effect {e} pairs nonzero over GF({p})"
            );
        }
    }
    println!("criterion 02 PASS: no effect can occur on both halves of the singlet for p in {{2,3,5}}");
}

#[test]
fn criterion_03_triangle_coloring_infeasible_with_parity_witness() {
    let triangle = mobit_triangle();
    assert_eq!(triangle.vertices.len(), 3);
    assert_eq!(1u32 << triangle.vertices.len(), 8);
    assert!(find_colorings(&triangle).unwrap().is_empty());

    let witness = coloring_parity_certificate(&triangle).unwrap().unwrap();
    // Every vertex sits on two edges, so a green set of size g covers 2g
    // edge slots; the quota demands 3.
    assert_eq!(witness.degrees, vec![2, 2, 2]);
    assert_eq!(witness.green_count * witness.edge_count, 3);

    let stdout = stdout_of(bin().arg("coloring"));
    assert!(stdout.contains("0 of 8 candidate colorings valid"));
    assert!(stdout.contains("parity certificate"));
    println!("criterion 03 PASS: 0 of 8 triangle colorings, parity witness 2g = 3");
}

#[test]
fn criterion_04_no_local_models_for_the_singlet() {
    let scenario = MobitScenario::new(2).unwrap();
    let table = scenario.table().unwrap();
    assert_eq!(local_model_candidates(&table), 64);
    assert!(find_local_models(&table).unwrap().is_empty());

    let zero = State::from_coords(scenario.field(), &[1, 0]).unwrap();
    let product = compose(&zero, &zero).unwrap();
    let product_table = possibility_table(&product, scenario.bases(), scenario.bases()).unwrap();
    let models = find_local_models(&product_table).unwrap();
    assert!(!models.is_empty());
    for m in &models {
        assert!(m.is_consistent_with(&product_table).unwrap());
    }

    assert_eq!(
        stdout_of(bin().arg("localmodels")),
        "0 of 64 local deterministic models consistent\n"
    );
    println!(
        "criterion 04 PASS: 0 of 64 singlet local models; product state admits {}",
        models.len()
    );
}

const SYMBOLIC_EXPECTED: [[&str; 6]; 6] = [
    ["0", "1/2+q", "1/2+q", "0", "1/2-s", "q+s"],
    ["1/2-q", "0", "-q-r", "1/2+r", "0", "1/2-q"],
    ["1/2-q", "q+r", "0", "1/2+r", "1/2+r", "0"],
    ["0", "1/2-r", "1/2-r", "0", "-r-s", "1/2+s"],
    ["1/2+s", "0", "1/2-r", "r+s", "0", "1/2+s"],
    ["-q-s", "1/2+q", "0", "1/2-s", "1/2-s", "0"],
];

#[test]
fn criterion_05_symbolic_family_has_dimension_three() {
    let table = MobitScenario::new(2).unwrap().table().unwrap();
    let sys = build_system(&table).unwrap();
    let space = solve(&sys).unwrap();
    assert_eq!(space.dimension(), 3);

    let symbolic = symbolic_cells(&sys, &space, &mobit_anchors()).unwrap();
    assert_eq!(symbolic.params(), &["q", "r", "s"]);
    for (r, row) in SYMBOLIC_EXPECTED.iter().enumerate() {
        for (c, want) in row.iter().enumerate() {
            assert_eq!(symbolic.cell_text(r, c), *want, "cell ({r},{c})");
        }
    }
    assert_eq!(symbolic.cell_text(1, 2), "-q-r");
    assert_eq!(symbolic.cell_text(4, 0), "1/2+s");
    println!("criterion 05 PASS: solution dimension 3 and all 36 symbolic cells verbatim");
}

#[test]
fn criterion_06_six_cells_forced_to_zero() {
    let table = MobitScenario::new(2).unwrap().table().unwrap();
    let sys = build_system(&table).unwrap();
    let space = solve(&sys).unwrap();
    let forced = forced_zero_cells(&sys, &space).unwrap();

    let expected = [
        (CellId::new("X", "+", "Z", "-"), "q+s"),
        (CellId::new("X", "-", "Y", "+"), "-q-r"),
        (CellId::new("Y", "+", "X", "-"), "q+r"),
        (CellId::new("Y", "-", "Z", "+"), "-r-s"),
        (CellId::new("Z", "+", "Y", "-"), "r+s"),
        (CellId::new("Z", "-", "X", "+"), "-q-s"),
    ];
    assert_eq!(
        forced,
        expected.iter().map(|(c, _)| c.clone()).collect::<Vec<_>>()
    );

    // The six expressions pair up as +/- of the three parameter sums.
    let symbolic = symbolic_cells(&sys, &space, &mobit_anchors()).unwrap();
    let rendered: Vec<String> = forced
        .iter()
        .map(|cell| {
            let i = sys.cell_index(cell).unwrap();
            symbolic.cell_text(i / 6, i % 6)
        })
        .collect();
    assert_eq!(
        rendered,
        expected.iter().map(|(_, e)| e.to_string()).collect::<Vec<_>>()
    );
    for sum in ["q+r", "q+s", "r+s"] {
        assert!(rendered.iter().any(|x| x == sum));
        let negated = format!("-{}", sum.replace('+', "-"));
        assert!(rendered.contains(&negated), "missing {negated}");
    }

    match requirement_iv_verdict(&sys, &space).unwrap() {
        RequirementIvVerdict::Violated { witnesses } => assert_eq!(witnesses, forced),
        RequirementIvVerdict::Satisfiable => panic!("expected a violation"),
    }
    println!("criterion 06 PASS: exactly 6 forced zeros, +/-(q+r), +/-(q+s), +/-(r+s); verdict VIOLATED");
}

#[test]
fn criterion_07_relaxed_table_is_unique_and_well_formed() {
    let possibility = MobitScenario::new(2).unwrap().table().unwrap();
    let sys = build_system(&possibility).unwrap();
    let space = solve(&sys).unwrap();
    let forced = forced_zero_cells(&sys, &space).unwrap();
    let relaxed = relaxed_unique_table(&sys, &space, &forced).unwrap();

    assert_eq!(relaxed.render_text(), RELAXED_GOLDEN);
    let half = Rational::new(1, 2).unwrap();
    let mut halves = 0;
    let mut zeros = 0;
    for r in 0..6 {
        for c in 0..6 {
            if *relaxed.cell(r, c) == half {
                halves += 1;
            } else if relaxed.cell(r, c).is_zero() {
                zeros += 1;
            }
        }
    }
    assert_eq!((halves, zeros), (18, 18));

    relaxed.check_requirements(&possibility).unwrap();
    // Independent recheck of the three probability requirements: cells lie
    // in [0,1] with zeros on impossible cells, every block sums to 1, and
    // one-sided marginals ignore the partner's measurement choice.
    let labels = ["X", "Y", "Z"];
    let signs = ["+", "-"];
    for m1 in labels {
        for m2 in labels {
            let mut sum = Rational::zero();
            for o1 in signs {
                for o2 in signs {
                    let v = relaxed.cell_by_labels(m1, o1, m2, o2).unwrap().clone();
                    assert!(!v.is_negative() && v <= Rational::one());
                    if !possibility.cell_by_labels(m1, o1, m2, o2).unwrap() {
                        assert!(v.is_zero());
                    }
                    sum = sum + v;
                }
            }
            assert_eq!(sum, Rational::one(), "block ({m1},{m2})");
        }
    }
    for m1 in labels {
        for o1 in signs {
            let marginal = |m2: &str| {
                signs.iter().fold(Rational::zero(), |acc, o2| {
                    acc + relaxed.cell_by_labels(m1, o1, m2, o2).unwrap().clone()
                })
            };
            assert_eq!(marginal("X"), marginal("Y"));
            assert_eq!(marginal("X"), marginal("Z"));
        }
    }
    for m2 in labels {
        for o2 in signs {
            let marginal = |m1: &str| {
                signs.iter().fold(Rational::zero(), |acc, o1| {
                    acc + relaxed.cell_by_labels(m1, o1, m2, o2).unwrap().clone()
                })
            };
            assert_eq!(marginal("X"), marginal("Y"));
            assert_eq!(marginal("X"), marginal("Z"));
        }
    }
    println!("criterion 07 PASS: unique relaxed table matches the golden grid (18 halves, 18 zeros), requirements re-verified");
}

fn correlator(table: &ProbabilityTable, m1: &str, m2: &str) -> Rational {
    let mut total = Rational::zero();
    for (o1, s1) in [("+", 1i64), ("-", -1)] {
        for (o2, s2) in [("+", 1i64), ("-", -1)] {
            let v = table.cell_by_labels(m1, o1, m2, o2).unwrap().clone();
            total = total + Rational::from_integer(s1 * s2) * v;
        }
    }
    total
}

#[test]
fn criterion_08_relaxed_table_contains_a_pr_box() {
    let possibility = MobitScenario::new(2).unwrap().table().unwrap();
    let sys = build_system(&possibility).unwrap();
    let space = solve(&sys).unwrap();
    let forced = forced_zero_cells(&sys, &space).unwrap();
    let relaxed = relaxed_unique_table(&sys, &space, &forced).unwrap();

    // Direct expectation computation over the four selected blocks.
    let one = Rational::one();
    assert_eq!(correlator(&relaxed, "X", "X"), -one.clone());
    assert_eq!(correlator(&relaxed, "X", "Z"), one.clone());
    assert_eq!(correlator(&relaxed, "Y", "X"), one.clone());
    assert_eq!(correlator(&relaxed, "Y", "Z"), one.clone());
    let chsh = -correlator(&relaxed, "X", "X")
        + correlator(&relaxed, "X", "Z")
        + correlator(&relaxed, "Y", "X")
        + correlator(&relaxed, "Y", "Z");
    assert_eq!(chsh, Rational::from_integer(4));

    let report = pr_box_check(&relaxed, ["X", "Y"], ["X", "Z"])
        .unwrap()
        .expect("PR box present");
    assert_eq!(report.chsh, Rational::from_integer(4));
    println!("criterion 08 PASS: {{X,Y}}x{{X,Z}} restriction is a PR box, CHSH = 4 exactly");
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = Vec::new();
    fn recurse(
        start: usize,
        n: usize,
        k: usize,
        current: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if current.len() == k {
            out.push(current.clone());
            return;
        }
        for i in start..n {
            current.push(i);
            recurse(i + 1, n, k, current, out);
            current.pop();
        }
    }
    recurse(0, n, k, &mut current, &mut out);
    out
}

fn det_cofactor<S: Scalar>(m: &Matrix<S>) -> S {
    let n = m.rows();
    if n == 1 {
        return m.get(0, 0).clone();
    }
    let mut total = m.get(0, 0).zero_of();
    for j in 0..n {
        let minor_entries: Vec<S> = (1..n)
            .flat_map(|r| (0..n).filter(|&c| c != j).map(move |c| m.get(r, c).clone()))
            .collect();
        let minor = Matrix::new(n - 1, n - 1, minor_entries).unwrap();
        let term = m.get(0, j).clone() * det_cofactor(&minor);
        total = if j % 2 == 0 { total + term } else { total - term };
    }
    total
}

fn binomial(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc = 1u128;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

#[test]
fn criterion_09_enumeration_counts() {
    let field2 = PrimeField::new(2).unwrap();
    assert_eq!(enumerate_effects(field2, 2).unwrap().len(), 3);
    assert_eq!(enumerate_measurements(field2, 2).unwrap().len(), 3);

    let primes = [
        2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61,
    ];
    let mut formula_cases = 0;
    let mut filter_cases = 0;
    for p in primes {
        let field = PrimeField::new(p).unwrap();
        for d in 1usize.. {
            let size = (p as u128).pow(d as u32);
            if size > 4096 {
                break;
            }
            let effects = enumerate_effects(field, d).unwrap();
            let expected = (size - 1) / (p as u128 - 1).max(1);
            assert_eq!(effects.len() as u128, expected, "effects p={p}, d={d}");
            formula_cases += 1;

            // Brute-force basis filter wherever the subset count is small
            // enough to re-derive on the spot.
            if d >= 2 && binomial(effects.len() as u128, d as u128) <= 100_000 {
                let mut brute = 0usize;
                for combo in combinations(effects.len(), d) {
                    let rows: Vec<Vec<FieldElement>> = combo
                        .iter()
                        .map(|&i| effects[i].covector().entries().to_vec())
                        .collect();
                    if !det_cofactor(&Matrix::from_rows(rows).unwrap()).is_zero() {
                        brute += 1;
                    }
                }
                assert_eq!(
                    enumerate_measurements(field, d).unwrap().len(),
                    brute,
                    "measurements p={p}, d={d}"
                );
                filter_cases += 1;
            }
        }
    }
    assert!(formula_cases >= 30);
    assert!(filter_cases >= 20);
    println!(
        "criterion 09 PASS: effect counts match (p^d-1)/(p-1) in {formula_cases} cases; \
         basis filter agrees in {filter_cases} cases"
    );
}

fn random_element(rng: &mut ChaCha8Rng, field: PrimeField) -> FieldElement {
    field.element(rng.random_range(0..field.modulus()) as i64)
}

fn random_nonzero_vector(
    rng: &mut ChaCha8Rng,
    field: PrimeField,
    dim: usize,
) -> Vector<FieldElement> {
    loop {
        let v = Vector::new((0..dim).map(|_| random_element(rng, field)).collect()).unwrap();
        if !v.is_zero() {
            return v;
        }
    }
}

#[test]
fn criterion_10_randomized_suites_with_pinned_seeds() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xacce97);

    // Field axioms, 100 cases per modulus.
    for p in [2u64, 3, 5, 7, 101] {
        let field = PrimeField::new(p).unwrap();
        for _ in 0..100 {
            let a = random_element(&mut rng, field);
            let b = random_element(&mut rng, field);
            let c = random_element(&mut rng, field);
            assert_eq!(a + b, b + a);
            assert_eq!(a * (b + c), a * b + a * c);
            assert!((a - a).is_zero());
            if !a.is_zero() {
                assert_eq!(a * a.inv().unwrap(), field.one());
            }
        }
    }

    // Linear algebra oracle agreement, 100 cases.
    for _ in 0..100 {
        let p = [2u64, 3, 5, 7][rng.random_range(0..4)];
        let field = PrimeField::new(p).unwrap();
        let n = rng.random_range(1..=4);
        let m = Matrix::new(
            n,
            n,
            (0..n * n).map(|_| random_element(&mut rng, field)).collect(),
        )
        .unwrap();
        assert_eq!(det(&m).unwrap(), det_cofactor(&m));
        let first = rref(&m);
        assert_eq!(rref(&first.reduced).reduced, first.reduced);
    }

    // Projective invariance of possibility, 100 cases.
    for _ in 0..100 {
        let p = [3u64, 5, 7, 11][rng.random_range(0..4)];
        let field = PrimeField::new(p).unwrap();
        let dim = rng.random_range(2..=4);
        let v = random_nonzero_vector(&mut rng, field, dim);
        let w = random_nonzero_vector(&mut rng, field, dim);
        let k = field.element(rng.random_range(1..p) as i64);
        let l = field.element(rng.random_range(1..p) as i64);
        let s = State::new(v.clone()).unwrap();
        let s2 = State::new(v.scale(&k)).unwrap();
        let e = Effect::new(w.clone()).unwrap();
        let e2 = Effect::new(w.scale(&l)).unwrap();
        assert_eq!(s, s2);
        assert_eq!(
            is_possible(&e, &s).unwrap(),
            is_possible(&e2, &s2).unwrap()
        );
    }

    // Search re-validation, 100 random coloring instances against a mask
    // brute force plus revalidation of each returned object.
    for _ in 0..100 {
        let n = rng.random_range(2..=10);
        let vertices: Vec<String> = (0..n).map(|i| format!("v{i}")).collect();
        let edges: Vec<Vec<String>> = (0..rng.random_range(1..=5))
            .map(|_| {
                let mut picked: Vec<usize> = Vec::new();
                while picked.len() < 2.min(n) {
                    let v = rng.random_range(0..n);
                    if !picked.contains(&v) {
                        picked.push(v);
                    }
                }
                picked.iter().map(|&v| format!("v{v}")).collect()
            })
            .collect();
        let problem = ColoringProblem::new(vertices, edges, 1).unwrap();
        let found = find_colorings(&problem).unwrap();
        let index_of =
            |label: &String| problem.vertices.iter().position(|v| v == label).unwrap();
        let masks: Vec<u64> = problem
            .edges
            .iter()
            .map(|edge| edge.iter().fold(0u64, |m, v| m | 1 << index_of(v)))
            .collect();
        let mut brute: Vec<Vec<usize>> = (0u64..1 << n)
            .filter(|mask| masks.iter().all(|e| (mask & e).count_ones() == 1))
            .map(|mask| (0..n).filter(|i| mask >> i & 1 == 1).collect())
            .collect();
        brute.sort();
        let got: Vec<Vec<usize>> = found.iter().map(|c| c.green_indices().to_vec()).collect();
        assert_eq!(got, brute);
        for c in &found {
            assert!(c.satisfies(&problem));
        }
    }

    // Local-model re-validation on 100 random possibility tables.
    let scenario = MobitScenario::new(2).unwrap();
    for _ in 0..100 {
        let rows = scenario.table().unwrap().rows().to_vec();
        let cols = rows.clone();
        let cells: Vec<Vec<bool>> = (0..6)
            .map(|_| (0..6).map(|_| rng.random_bool(0.6)).collect())
            .collect();
        let table =
            modalkit_core::PossibilityTable::from_parts(rows, cols, cells).unwrap();
        let models = find_local_models(&table).unwrap();
        for m in &models {
            assert!(m.is_consistent_with(&table).unwrap());
        }
        assert!(models.len() as u128 <= local_model_candidates(&table));
    }

    // Certificate re-verification: every cell objective of the singlet
    // system plus 100 random programs.
    let possibility = scenario.table().unwrap();
    let sys = build_system(&possibility).unwrap();
    let space = solve(&sys).unwrap();
    let forms = cell_forms(&sys, &space).unwrap();
    let mut verified = 0;
    for objective in &forms {
        if let LpOutcome::Optimal(opt) = lp_maximize(&forms, objective).unwrap() {
            assert!(opt.verify(&forms, objective).unwrap());
            verified += 1;
        }
    }
    assert_eq!(verified, 36);
    for _ in 0..100 {
        let d = rng.random_range(1..=3);
        let random_form = |rng: &mut ChaCha8Rng| SymbolicCell {
            constant: Rational::from_integer(rng.random_range(-4..=4)),
            coefficients: (0..d)
                .map(|_| Rational::from_integer(rng.random_range(-3..=3)))
                .collect(),
        };
        let constraints: Vec<SymbolicCell> = (0..rng.random_range(2..=8))
            .map(|_| random_form(&mut rng))
            .collect();
        let objective = random_form(&mut rng);
        if let Ok(LpOutcome::Optimal(opt)) = lp_maximize(&constraints, &objective) {
            assert!(opt.verify(&constraints, &objective).unwrap());
        }
    }

    println!("criterion 10 PASS: seeded randomized suites (fields, linalg, projective, searches, LP certificates)");
}
