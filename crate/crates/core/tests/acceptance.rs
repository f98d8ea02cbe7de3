//! End-to-end acceptance run: one PASS/FAIL line per criterion.

use std::collections::BTreeMap;
use std::time::Instant;

use num_bigint::BigUint;
use num_rational::BigRational;

use dpcodes::anticode::{self, AnticodeKind, AnticodeSpec};
use dpcodes::bounds::{self, ChiEvidence, Family};
use dpcodes::codes::{self, ConstantWeightCode, Expected};
use dpcodes::coloring::{self, Budget};
use dpcodes::steiner::{self, catalog, derive, resolvability_partition, rotate_block, DataDir, SteinerSystem};

type Check = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn ok<T, E: std::fmt::Display>(r: Result<T, E>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

/// Results later criteria reuse.
#[derive(Default)]
struct Shared {
    sts13_chis: Option<Vec<usize>>,
    sts19_chi: Option<usize>,
}

fn bundled_cyclic_code() -> Result<ConstantWeightCode, String> {
    let reps = ok(ConstantWeightCode::parse(&ok(DataDir::bundled().read("s45_11_cyclic_reps.txt"))?))?;
    ok(codes::expand_cyclic(reps.words(), reps.n(), reps.q()))
}

fn sorted_supports(code: &ConstantWeightCode) -> Vec<Vec<usize>> {
    let mut s = code.supports();
    s.sort();
    s
}

fn c1_fano() -> Check {
    let fano = ok(catalog("fano"))?;
    let code = ok(codes::construct_f5prime(&fano, 4))?;
    let report = codes::verify_code(
        &code,
        Expected { n: Some(7), w: Some(3), d: Some(5), q: Some(4), m: Some(7) },
        Some(2),
    );
    ensure!(report.passed(), "verification failed: {:?}", report.failures);
    ensure!(sorted_supports(&code) == fano.blocks(), "supports differ from the Fano blocks");
    let cert = ok(codes::diameter_perfect_check(&code, &ok(AnticodeSpec::prime(7, 3, 2, 4))?))?;
    ensure!(cert.holds, "code-anticode equality fails");
    ensure!(cert.anticode_size == BigUint::from(135u32), "anticode size {}", cert.anticode_size);
    ensure!(cert.product == BigUint::from(945u32) && cert.space_size == BigUint::from(35u32 * 27), "product {}", cert.product);
    Ok("(7,3,5)_4 with 7 words; 7*135 = 945 = 35*27".into())
}

fn c2_cyclic() -> Check {
    let code = bundled_cyclic_code()?;
    ensure!(code.len() == 66, "{} words", code.len());
    let report = codes::verify_code(&code, Expected { n: Some(11), w: Some(5), q: Some(11), m: Some(66), ..Default::default() }, Some(4));
    ensure!(report.passed(), "verification failed: {:?}", report.failures);
    ensure!(report.d_min == Some(7), "minimum distance {:?}", report.d_min);
    ensure!(ok(steiner::validate_system(4, 5, 11, &sorted_supports(&code))).is_ok(), "supports are not an S(4,5,11)");
    let cert = ok(codes::diameter_perfect_check(&code, &ok(AnticodeSpec::prime(11, 5, 4, 11))?))?;
    let expected = BigUint::from(462u32) * BigUint::from(10u32).pow(5);
    ensure!(cert.holds && cert.product == expected && cert.space_size == expected, "product {} vs space {}", cert.product, cert.space_size);
    Ok("66 words, d = 7, supports form S(4,5,11); 66*7*10^5 = 462*10^5".into())
}

fn c3_chromatic(shared: &mut Shared) -> Check {
    let mut notes = Vec::new();
    let mut chis = Vec::new();
    for name in ["sts13a", "sts13b"] {
        let start = Instant::now();
        let g = ok(coloring::min_distance_graph(&ok(catalog(name))?))?;
        let res = ok(coloring::chromatic_number(&g, Budget::default()))?;
        ensure!(g.graph.is_proper_partition(&res.partition), "{name}: partition is not a proper colouring");
        ensure!(res.chi == 8, "chi({name}) = {}", res.chi);
        notes.push(format!("chi({name}) = 8 in {:.1}s", start.elapsed().as_secs_f64()));
        chis.push(res.chi);
    }
    shared.sts13_chis = Some(chis);

    let sqs20 = ok(catalog("sqs20_paper"))?;
    let sts19 = ok(derive(&sqs20, &[1]))?.system;
    ensure!((sts19.t(), sts19.k(), sts19.n()) == (2, 3, 19), "derived system has wrong parameters");

    let start = Instant::now();
    let text = ok(DataDir::bundled().read("sts19_cells.txt"))?;
    let cells = ok(coloring::partition_from_blocks(&sts19, &ok(coloring::parse_block_cells(&text))?))?;
    ensure!(cells.len() == 10, "{} cells", cells.len());
    ensure!(ok(coloring::verify_block_coloring(&sts19, &cells))?, "the 10-cell partition is not a proper colouring");
    notes.push(format!("10-cell partition verified in {:.3}s", start.elapsed().as_secs_f64()));

    let start = Instant::now();
    let res = ok(coloring::chromatic_number(&ok(coloring::min_distance_graph(&sts19))?, Budget::default()))?;
    ensure!(res.chi == 10, "chi(derived STS(19)) = {}", res.chi);
    shared.sts19_chi = Some(res.chi);
    notes.push(format!("chi(derived STS(19)) = 10 in {:.1}s", start.elapsed().as_secs_f64()));
    Ok(notes.join("; "))
}

fn is_cyclic(sys: &SteinerSystem) -> bool {
    sys.blocks().iter().all(|b| sys.index_of(&rotate_block(b, 1, sys.n())).is_some())
}

fn c4_closed_forms(shared: &Shared) -> Check {
    let resolved = |t, k, n, evidence: &[ChiEvidence]| -> Result<u64, String> {
        let cert = ok(bounds::q0_closed_forms(t, k, n, evidence))?;
        ensure!(cert.consistent(), "({t},{k},{n}) bounds are inconsistent");
        cert.resolved.ok_or_else(|| format!("({t},{k},{n}) unresolved: [{:?}, {:?}]", cert.lower(), cert.upper()))
    };
    ensure!(resolved(2, 3, 7, &[])? == 4, "(2,3,7)");
    ensure!(resolved(2, 3, 9, &[])? == 5, "(2,3,9)");

    let chis = shared.sts13_chis.clone().ok_or("needs the STS(13) chromatic numbers")?;
    ensure!(resolved(3, 4, 14, &[ChiEvidence::AllDerivedClasses { chis }])? == 9, "(3,4,14)");

    let sqs20 = ok(catalog("sqs20_paper"))?;
    ensure!(is_cyclic(&sqs20), "SQS(20) is not invariant under the cyclic shift");
    let chi = shared.sts19_chi.ok_or("needs the derived STS(19) chromatic number")?;
    ensure!(resolved(3, 4, 20, &[ChiEvidence::PointTransitive { chi }])? == 11, "(3,4,20)");

    let sqs10 = ok(catalog("sqs10"))?;
    for p in 1..=10 {
        let d = ok(derive(&sqs10, &[p]))?.system;
        ensure!(resolvability_partition(&d).is_some(), "derived SQS(10) at {p} is not resolvable");
    }
    ensure!(resolved(3, 4, 10, &[ChiEvidence::AllDerivedResolvable])? == 5, "(3,4,10)");
    Ok("4, 5, 9, 11, 5".into())
}

fn c5_search() -> Check {
    let mut notes = Vec::new();
    for (name, family, want) in [("fano", Family::F5prime, 4), ("ag(2,3)", Family::F5prime, 5), ("fano", Family::F5double, 5)] {
        let sys = ok(catalog(name))?;
        let start = Instant::now();
        let out = ok(bounds::search_min_q(&sys, family, 2_000_000_000))?;
        ensure!(out.exact() == Some(want), "{name} {family:?}: {:?}..{:?}", out.lower, out.upper);
        ensure!(out.refuted.iter().any(|r| r.q == want - 1), "{name}: no refutation at q = {}", want - 1);
        let (w, d) = match family {
            Family::F5prime => (sys.k(), 2 * sys.k() - sys.t() + 1),
            Family::F5double => (sys.n() - sys.k(), sys.n() - sys.t() + 1),
        };
        let exp = Expected { n: Some(sys.n()), w: Some(w), d: Some(d), q: Some(want), m: Some(sys.block_count()) };
        let report = codes::verify_code(&out.witness, exp, Some(sys.t()));
        ensure!(report.passed(), "{name}: witness fails {:?}", report.failures);
        notes.push(format!("{name} {family:?} = {want} ({:.2}s)", start.elapsed().as_secs_f64()));
    }
    Ok(notes.join("; "))
}

fn c6_affine() -> Check {
    for k in 3u32..=5 {
        let code = ok(codes::construct_affine(k))?;
        let n = (k * k) as usize;
        let q = k * k - (k - 1) / 2;
        let exp = Expected { n: Some(n), w: Some(n - k as usize), d: Some(n - 1), q: Some(q), m: Some(n + k as usize) };
        let report = codes::verify_code(&code, exp, Some(2));
        ensure!(report.passed(), "k = {k}: {:?}", report.failures);
        for col in 0..n {
            let mut symbols: Vec<u32> = code.words().iter().map(|w| w[col]).filter(|&s| s != 0).collect();
            symbols.sort_unstable();
            symbols.dedup();
            ensure!(symbols.len() as u32 == q - 1, "k = {k}, column {col}: {} distinct symbols", symbols.len());
        }
    }
    Ok("k = 3, 4, 5 verified; every column uses q-1 symbols".into())
}

fn c7_projective() -> Check {
    for s in 2u32..=4 {
        let code = ok(codes::construct_projective(s))?;
        let n = (s * s + s + 1) as usize;
        let exp = Expected { n: Some(n), w: Some((s * s) as usize), d: Some((s * s + s) as usize), q: Some(s * s + 1), m: Some(n) };
        let report = codes::verify_code(&code, exp, Some(2));
        ensure!(report.passed(), "s = {s}: {:?}", report.failures);
    }
    Ok("s = 2, 3, 4 verified".into())
}

fn c8_collisions() -> Check {
    let b9 = ok(bounds::collision_lower_bound(2, 3, 9))?;
    ensure!(b9.ptilde == BigRational::new(4.into(), 3.into()), "ptilde(2,3,9) = {}", b9.ptilde);
    ensure!(b9.floor_ptilde == 1.into(), "floor = {}", b9.floor_ptilde);
    let affine = ok(codes::construct_affine(3))?;
    ensure!(b9.lower_bound == 8 && affine.q() == 8, "bound {} vs affine q {}", b9.lower_bound, affine.q());
    let b7 = ok(bounds::collision_lower_bound(2, 3, 7))?;
    let proj = ok(codes::construct_projective(2))?;
    ensure!(b7.lower_bound == 5 && proj.q() == 5, "bound {} vs projective q {}", b7.lower_bound, proj.q());
    Ok("q''0(2,3,9) = 8 (ptilde 4/3, floor 1); q''0(2,3,7) = 5".into())
}

fn c9_theorem4() -> Check {
    let mut notes = Vec::new();
    for (name, cap) in [("sqs10", 5u32), ("sqs8", 8)] {
        let sys = ok(catalog(name))?;
        let colorings = ok(codes::theorem4_colorings(&sys, Budget::default()))?;
        let cells: BTreeMap<_, _> = colorings.into_iter().map(|(w, c)| (w, c.partition)).collect();
        let built = ok(codes::construct_theorem4(&sys, &cells))?;
        ensure!(built.bound == cap as u64, "{name}: bound {}", built.bound);
        ensure!(built.q_used <= cap, "{name}: q_used {}", built.q_used);
        let n = sys.n();
        let exp = Expected { n: Some(n), w: Some(4), d: Some(6), m: Some(sys.block_count()), ..Default::default() };
        let report = codes::verify_code(&built.code, exp, Some(3));
        ensure!(report.passed(), "{name}: {:?}", report.failures);
        let cert = ok(codes::diameter_perfect_check(&built.code, &ok(AnticodeSpec::prime(n, 4, 3, built.q_used))?))?;
        ensure!(cert.holds, "{name}: not diameter perfect at q = {}", built.q_used);
        notes.push(format!("{name} q_used = {} <= {cap}", built.q_used));
    }
    Ok(notes.join("; "))
}

const MEMBER_BUDGET: u64 = 200_000;
const DIAMETER_BUDGET: u64 = 30_000;

fn c10_anticodes() -> Check {
    let (mut counted, mut diameters, mut binary, mut skipped, mut too_big) = (0, 0, 0, 0, 0);
    for n in 1..=9 {
        for w in 1..=6.min(n) {
            for t in 0..=w {
                for kind in [AnticodeKind::Prime, AnticodeKind::Double] {
                    for q in 2..=4 {
                        let Ok(spec) = AnticodeSpec::new(kind, n, w, t, q) else { continue };
                        let members = match spec.members(MEMBER_BUDGET) {
                            Ok(m) => m,
                            Err(_) => {
                                skipped += 1;
                                continue;
                            }
                        };
                        ensure!(BigUint::from(members.len()) == spec.size(), "{spec:?}: {} members", members.len());
                        counted += 1;
                        if members.len() as u64 > DIAMETER_BUDGET {
                            too_big += 1;
                            continue;
                        }
                        if q >= 3 {
                            let r = ok(anticode::anticode_diameter_check(&spec, DIAMETER_BUDGET))?;
                            ensure!(r.matches(), "{spec:?}: diameter {} vs {}", r.diameter, r.claimed);
                            diameters += 1;
                        } else {
                            // Binary members: supports pairwise meeting in >= s points.
                            let (d, _) = anticode::diameter_of(&members);
                            let s = match kind {
                                AnticodeKind::Prime => t,
                                AnticodeKind::Double => (2 * w).saturating_sub(n - t),
                            };
                            let expect = if members.len() > 1 { 2 * w - 2 * s } else { 0 };
                            ensure!(d <= 2 * w - 2 * s && (kind == AnticodeKind::Double || d == expect), "{spec:?}: binary diameter {d}");
                            binary += 1;
                        }
                    }
                }
            }
        }
    }
    Ok(format!(
        "{counted} sizes match; {diameters} diameters (q >= 3) match; {binary} binary diameters consistent; {skipped} specs above {MEMBER_BUDGET} words; {too_big} diameters above {DIAMETER_BUDGET} words not enumerated"
    ))
}

fn c11_max_anticode() -> Check {
    let m = ok(anticode::max_anticode_bruteforce(5, 2, 3, 3, 200, Budget::default()))?;
    let floor = ok(AnticodeSpec::prime(5, 2, 1, 3))?.size();
    ensure!(floor == BigUint::from(16u32), "A'(5,2,1) size {floor}");
    ensure!(BigUint::from(m.size) >= floor, "maximum {} below 16", m.size);
    ensure!(anticode::diameter_of(&m.witness).0 <= 3 && m.witness.len() == m.size, "witness is not a diameter-3 anticode");
    let relation = if BigUint::from(m.size) == floor { "equality holds" } else { "strictly larger" };
    Ok(format!("maximum diameter-3 anticode in J_3(5,2) has {} words ({relation})", m.size))
}

fn c12_projection() -> Check {
    let fano = ok(catalog("fano"))?;
    let cases = [
        (ok(codes::construct_f5prime(&fano, 4))?, 2usize, fano.blocks().to_vec()),
        (bundled_cyclic_code()?, 4, sorted_supports(&bundled_cyclic_code()?)),
    ];
    for (code, t, blocks) in cases {
        let w = code.weight().ok_or("source code is not constant weight")?;
        let bin = ok(anticode::binary_projection_checked(&code, t))?;
        ensure!(bin.q() == 2, "projection alphabet {}", bin.q());
        let (d, _) = ok(codes::code_distance(&bin))?;
        ensure!(d >= 2 * w - 2 * t + 2, "binary distance {d} < {}", 2 * w - 2 * t + 2);
        ensure!(sorted_supports(&bin) == blocks, "projected supports differ from the source system");
        let k = blocks[0].len();
        ensure!(ok(steiner::validate_system(t, k, code.n(), &blocks)).is_ok(), "source supports are not an S({t},{k},{})", code.n());
    }
    Ok("Fano and S(4,5,11) codes project to binary codes with d >= 2w-2t+2".into())
}

fn main() {
    let mut shared = Shared::default();
    let mut failed = 0;
    let mut report = |id: u32, name: &str, run: &mut dyn FnMut() -> Check| {
        let start = Instant::now();
        let result = std::panic::catch_unwind(std::panic::AssertUnwindSafe(run))
            .unwrap_or_else(|p| Err(p.downcast_ref::<String>().cloned().unwrap_or_else(|| "panicked".into())));
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("criterion {id:>2} PASS  {name} [{secs:.2}s]: {detail}"),
            Err(why) => {
                failed += 1;
                println!("criterion {id:>2} FAIL  {name} [{secs:.2}s]: {why}");
            }
        }
    };
    report(1, "Fano pipeline", &mut c1_fano);
    report(2, "cyclic S(4,5,11) code", &mut c2_cyclic);
    report(3, "chromatic numbers", &mut || c3_chromatic(&mut shared));
    report(4, "q'0 closed forms", &mut || c4_closed_forms(&shared));
    report(5, "search agreement", &mut c5_search);
    report(6, "affine construction", &mut c6_affine);
    report(7, "projective construction", &mut c7_projective);
    report(8, "collision lower bound", &mut c8_collisions);
    report(9, "window construction", &mut c9_theorem4);
    report(10, "anticode grid", &mut c10_anticodes);
    report(11, "brute-force maximality", &mut c11_max_anticode);
    report(12, "binary projection", &mut c12_projection);
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
    println!("all 12 criteria passed");
}
