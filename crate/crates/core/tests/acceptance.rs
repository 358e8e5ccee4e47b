//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Runs without the libtest harness so the report stays readable.

use std::collections::BTreeSet;
use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use vinberg::cartan::{cosine_matrix, Circuit};
use vinberg::catalog::{self, ENTRIES};
use vinberg::coxeter::{triangle, GroupClass};
use vinberg::deform::{cell_chart, leaf_cox, ChartTag, CellChart, DeformationPoint};
use vinberg::integral::{self, compare_with_direct, divisor_pairs, integral_check, Enumeration};
use vinberg::polytope::{CircuitKind, LabeledPolytope};
use vinberg::realize::{realize_point, verify_relations, word_traces, VinbergRealization};
use vinberg::scalar::ratio;
use vinberg::{CartanMatrix, CoxeterMatrix, Error, PerronType, Scalar};

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn q(n: i64, d: i64) -> Scalar {
    Scalar::rational(ratio(n, d))
}

fn secs(t: Duration) -> String {
    format!("{:.2} s", t.as_secs_f64())
}

struct Enumerated {
    name: &'static str,
    g: LabeledPolytope,
    en: Enumeration,
}

fn enumerate_catalog() -> Vec<Enumerated> {
    ENTRIES
        .iter()
        .filter_map(|e| {
            let g = (e.build)();
            let en = integral::enumerate(&g).ok()?;
            Some(Enumerated { name: e.name, g, en })
        })
        .collect()
}

fn random_rational(rng: &mut ChaCha8Rng, max: i64) -> Scalar {
    q(rng.gen_range(1..=max), rng.gen_range(1..=max))
}

/// Valid Cartan matrix with rational entries and a triangle on 0, 1, 2.
fn random_cartan(rng: &mut ChaCha8Rng) -> CartanMatrix {
    let n = rng.gen_range(3..=6);
    let mut a = vec![vec![Scalar::zero(); n]; n];
    for (i, row) in a.iter_mut().enumerate() {
        row[i] = Scalar::int(2);
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let forced = j <= 2;
            let m = if forced { [3, 4, 6][rng.gen_range(0..3)] } else { [2, 3, 4, 6][rng.gen_range(0..4)] };
            let c = match m {
                3 => 1,
                4 => 2,
                6 => 3,
                _ => continue,
            };
            let t = random_rational(rng, 7);
            a[j][i] = -(&Scalar::int(c).div(&t).unwrap());
            a[i][j] = -t;
        }
    }
    CartanMatrix::new(vinberg::coxeter::names(n), a)
}

fn c1_equivalence() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for trial in 0..1000 {
        let a = random_cartan(&mut rng);
        ensure!(a.check().is_ok(), "trial {trial}: generated matrix is invalid");
        let d: Vec<Scalar> = (0..a.dim()).map(|_| random_rational(&mut rng, 9)).collect();
        let b = a.conjugate_by_diagonal(&d).unwrap();
        ensure!(b.is_exact(), "trial {trial}: conjugate left the exact field");
        ensure!(a.equivalent(&b).unwrap(), "trial {trial}: A and DAD^-1 judged inequivalent");
        let lambda = loop {
            let l = random_rational(&mut rng, 5);
            if l != Scalar::one() {
                break l;
            }
        };
        let mut single = a.clone();
        single.a[0][1] = &single.a[0][1] * &lambda;
        ensure!(!single.equivalent(&b).unwrap(), "trial {trial}: single-entry change not detected");
        let mut balanced = single.clone();
        balanced.a[1][0] = balanced.a[1][0].div(&lambda).unwrap();
        ensure!(balanced.edge_product(0, 1) == a.edge_product(0, 1), "trial {trial}: balanced change moved an edge product");
        ensure!(!balanced.equivalent(&b).unwrap(), "trial {trial}: cycle-breaking change not detected");
    }
    let t = start.elapsed();
    ensure!(t < Duration::from_secs(10), "took {}", secs(t));
    Ok(format!("1000 random matrices, {}", secs(t)))
}

fn c2_triangle() -> Outcome {
    for (m12, m13, m23) in [(3, 4, 6), (3, 3, 4), (4, 4, 4), (3, 6, 6)] {
        let chart = CellChart::simplex(&triangle(m12, m13, m23)).unwrap();
        ensure!(chart.tag == ChartTag::Triangle && chart.dimension == 1, "({m12},{m13},{m23}) chart is {:?}", chart.tag);
        for k in -5i32..=5 {
            let x = if k >= 0 { q(1 << k, 1) } else { q(1, 1 << -k) };
            let x2 = &x * &x;
            let mut a = cosine_matrix(&triangle(m12, m13, m23)).unwrap();
            a.a[1][2] = &a.a[1][2] * &x;
            a.a[2][1] = a.a[2][1].div(&x).unwrap();
            ensure!(a.canonical_gauge().unwrap() == a, "x = {x}: matrix is not in canonical gauge");
            let e = |i: usize, j: usize| a.a[i][j].clone();
            // direct products of the six entries
            let fwd = (&(&e(0, 1) * &e(1, 2)) * &e(2, 0)).div(&(&(&e(0, 2) * &e(2, 1)) * &e(1, 0))).unwrap();
            let back = fwd.inv().unwrap();
            let r321 = a.normalized_cyclic_product(&Circuit(vec![2, 1, 0])).unwrap();
            ensure!(r321.ratio == back && back == x2.inv().unwrap(), "x = {x}: ratio on (3,2,1) is {}", r321.ratio);
            ensure!((r321.log_value + 2.0 * x.to_f64().ln()).abs() < 1e-12, "x = {x}: log ratio off");
            ensure!(chart.coordinates_of(&a).unwrap() == vec![fwd.clone()], "x = {x}: chart coordinate differs");
            ensure!(fwd == x2, "x = {x}: ratio on (1,2,3) is {fwd}");
            ensure!(chart.point_from_coordinates(&[fwd]).unwrap() == a, "x = {x}: chart inverse differs");
        }
    }
    for (m12, m13, m23) in [(2, 3, 7), (2, 4, 5), (2, 3, 8), (2, 4, 6), (2, 5, 5)] {
        let chart = CellChart::simplex(&triangle(m12, m13, m23)).unwrap();
        ensure!(chart.dimension == 0, "right triangle ({m12},{m13},{m23}) has dimension {}", chart.dimension);
    }
    Ok("ratio x^-2 on (3,2,1), x^2 on (1,2,3), x = 2^-5..2^5; right triangles rigid".into())
}

fn c3_case1() -> Outcome {
    let chart = CellChart::simplex(&catalog::case1_simplex().coxeter()).unwrap();
    ensure!(chart.tag == ChartTag::Case1 && chart.coordinates.len() == 4, "case1 simplex chart is {:?}", chart.tag);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for trial in 0..100 {
        // squares times 1, 2, 3 or 6 keep every entry inside the exact field
        let r: Vec<Scalar> = (0..3)
            .map(|_| {
                let s = random_rational(&mut rng, 5);
                &(&s * &s) * &Scalar::int([1, 2, 3, 6][rng.gen_range(0..4)])
            })
            .collect();
        let r4 = (&(&r[0] * &r[1]) * &r[2]).inv().unwrap();
        let values = [r[0].clone(), r[1].clone(), r[2].clone(), r4];
        let a = chart.point_from_coordinates(&values).map_err(|e| format!("trial {trial}: {e}"))?;
        let mut prod = Scalar::one();
        for c in &chart.coordinates {
            prod = &prod * &a.normalized_cyclic_product(c).unwrap().ratio;
        }
        ensure!(a.is_exact(), "trial {trial}: entries left the exact field");
        ensure!(prod == Scalar::one(), "trial {trial}: product of link ratios is {prod}");
        ensure!(chart.coordinates_of(&a).unwrap() == values, "trial {trial}: coordinates not reproduced");
    }
    Ok("100 random chart points, product exactly 1".into())
}

fn c4_dimension() -> Outcome {
    let mut checked = Vec::new();
    let mut skipped = Vec::new();
    let mut empty = Vec::new();
    for e in ENTRIES {
        let g = (e.build)();
        match cell_chart(&g) {
            Ok(c) => {
                ensure!(c.e_plus >= g.dim && c.dimension == c.e_plus - g.dim, "{}: dim {} vs e+ {} - d {}", e.name, c.dimension, c.e_plus, g.dim);
                checked.push(e.name);
            }
            Err(Error::EmptyCell(_)) => {
                ensure!(g.dim > 9, "{}: flagged empty in dimension {}", e.name, g.dim);
                empty.push(e.name);
            }
            Err(err) => skipped.push(format!("{} ({err})", e.name)),
        }
    }
    ensure!(!empty.is_empty(), "no catalog entry above dimension 9 was flagged empty");
    ensure!(skipped.len() <= 1, "charts unavailable: {}", skipped.join("; "));
    Ok(format!("{} charts, empty: {}, out of scope: {}", checked.len(), empty.join(","), skipped.join(",")))
}

fn a_tilde_instance(g: &LabeledPolytope) -> bool {
    let Ok(tree) = g.gluing_tree() else { return false };
    let essential = g
        .prismatic_circuits()
        .map(|cs| cs.iter().any(|c| c.kind == CircuitKind::Essential && c.a_tilde))
        .unwrap_or(false);
    let vertex = tree.leaves.iter().any(|leaf| {
        leaf.free_truncations.iter().any(|t| {
            let v = leaf.truncated_vertex(t).unwrap();
            leaf_cox(&leaf.piece, &v).unwrap().is_a_tilde()
        })
    });
    essential || vertex
}

fn c5_a_tilde() -> Outcome {
    let start = Instant::now();
    let mut names = Vec::new();
    for e in ENTRIES {
        let g = (e.build)();
        if g.dim < 3 || !a_tilde_instance(&g) {
            continue;
        }
        let en = integral::enumerate(&g).map_err(|err| format!("{}: {err}", e.name))?;
        ensure!(en.points.is_empty(), "{}: enumerate found {} points", e.name, en.points.len());
        let direct = integral::direct_search(&g, 200).map_err(|err| format!("{}: {err}", e.name))?;
        ensure!(direct.is_empty(), "{}: direct search found {} points", e.name, direct.len());
        names.push(e.name);
    }
    ensure!(names.len() >= 3, "only {} instances in the catalog", names.len());
    let t = start.elapsed();
    ensure!(t < Duration::from_secs(30), "took {}", secs(t));
    Ok(format!("{} ({}), {}", names.len(), names.join(","), secs(t)))
}

fn tau(m: i64) -> usize {
    (1..=m).filter(|t| m % t == 0).count()
}

fn c6_divisors(cat: &[Enumerated]) -> Outcome {
    let set = [1i64, 2, 3, 4, 6, 8, 12];
    for &m in &set {
        for k in 2..=8 {
            let pairs = divisor_pairs(&[m], k).unwrap();
            let s = if k % 2 == 0 { 1 } else { -1 };
            ensure!(pairs.len() == tau(m), "M = {m}, k = {k}: {} pairs", pairs.len());
            let distinct: BTreeSet<_> = pairs.iter().collect();
            ensure!(distinct.len() == pairs.len(), "M = {m}: repeated pair");
            ensure!(
                pairs.iter().all(|&(c, cb)| c * cb == m && c.signum() == s && cb.signum() == s),
                "M = {m}, k = {k}: wrong product or sign"
            );
        }
    }
    let mut seen = 0;
    for c in cat {
        for p in &c.en.points {
            let a = p.point.assemble().unwrap().matrix;
            for entry in p.certificate.entries.iter().filter(|e| e.circuit.len() >= 3) {
                let idx: Vec<usize> = entry.circuit.iter().map(|n| a.index_of(n).unwrap()).collect();
                let circ = Circuit(idx);
                let edges: Vec<i64> = circ
                    .steps()
                    .map(|(i, j)| a.edge_product(i, j).is_integer().unwrap().unwrap().try_into().unwrap())
                    .collect();
                let m: i64 = edges.iter().product();
                let cb: i64 = a.cyclic_product(&circ.reversed()).is_integer().unwrap().unwrap().try_into().unwrap();
                let cv: i64 = (&entry.value).try_into().unwrap();
                let pairs = divisor_pairs(&edges, circ.len()).unwrap();
                ensure!(pairs.contains(&(cv, cb)), "{}: ({cv}, {cb}) on {:?} not a divisor pair of {m}", c.name, entry.circuit);
                if set.contains(&m) {
                    seen += 1;
                }
            }
        }
    }
    ensure!(seen > 0, "no enumerated circuit with M in the test set");
    Ok(format!("tau(M) pairs for M in {set:?}; {seen} enumerated circuits matched"))
}

/// Enumerated points with at least one cut.
fn glued_points(cat: &[Enumerated]) -> Vec<(&'static str, &DeformationPoint)> {
    cat.iter()
        .flat_map(|c| c.en.points.iter().filter(|p| !p.point.cuts.is_empty()).map(move |p| (c.name, &p.point)))
        .collect()
}

fn side_names(p: &DeformationPoint) -> Vec<String> {
    p.assemble().unwrap().matrix.names
}

fn c7_bending(cat: &[Enumerated]) -> Outcome {
    let pts = glued_points(cat);
    ensure!(!pts.is_empty(), "no glued points");
    let mut fibers = 0;
    for (name, p) in &pts {
        let a0 = p.assemble().unwrap().matrix;
        for k in 0..p.cuts.len() {
            for (x, y) in [(q(2, 1), q(3, 5)), (q(7, 3), q(1, 7)), (q(1, 1), q(9, 2))] {
                let two = p.bend(k, &x).unwrap().bend(k, &y).unwrap();
                ensure!(two == p.bend(k, &(&x * &y)).unwrap(), "{name}: cocycle fails at cut {k}");
                let a1 = two.assemble().unwrap().matrix;
                let delta = &p.cuts[k].delta;
                let (l0, r0, c0) = p.cut(delta).unwrap();
                let (l1, r1, c1) = two.cut(delta).unwrap();
                ensure!((&l0, &r0, &c0) == (&l1, &r1, &c1), "{name}: cut {k} changed by bending");
                for side in [&l0, &r0] {
                    let idx: Vec<usize> = side_names(side).iter().filter_map(|n| a0.index_of(n).ok()).collect();
                    ensure!(
                        a0.restrict(&idx).equivalent(&a1.restrict(&idx)).unwrap(),
                        "{name}: side of cut {k} not invariant under bending"
                    );
                }
            }
            let mut probe = (*p).clone();
            probe.e[k] = Scalar::one();
            let fd = probe.bending_data(k).unwrap();
            fd.check().map_err(|e| format!("{name}: {e}"))?;
            let e0 = p.e[k].to_f64();
            let grid: Vec<f64> = (0..1000).map(|i| -20.0 + 40.0 * i as f64 / 999.0).collect();
            let vals: Vec<f64> = grid.iter().map(|&u| fd.log_ratio(e0, u)).collect();
            ensure!(vals.iter().all(|v| v.is_finite()), "{name}: log ratio not finite on the grid");
            ensure!(vals.windows(2).all(|w| w[1] - w[0] > -1e-9), "{name}: log ratio not monotone at cut {k}");
            ensure!(vals[999] > vals[0], "{name}: log ratio constant at cut {k}");
            fibers += 1;
        }
    }
    Ok(format!("{} glued points, {fibers} fibers", pts.len()))
}

/// Survivors by grid search over u, confirmed exactly at the closed-form
/// bending values where the probe product is an integer.
fn brute_force_survivors(p: &DeformationPoint, k: usize) -> Result<Vec<Scalar>, String> {
    let mut probe = p.clone();
    probe.e[k] = Scalar::one();
    let fd = probe.bending_data(k).map_err(|e| e.to_string())?;
    let f = |s: &Scalar| s.to_f64().abs();
    let (k1, x1, y1, k2, x2, y2) = (f(&fd.k1), f(&fd.x1), f(&fd.y1), f(&fd.k2), f(&fd.x2), f(&fd.y2));
    let sign = if fd.k1.to_f64() < 0.0 { -1 } else { 1 };
    // |D| decreases towards this limit; only integers strictly above it count
    let limit = k2 * x2;
    let d1 = (p.dim + 1) as f64;
    let at = |i: usize| {
        let e = (d1 * (-20.0 + 1e-4 * i as f64)).exp();
        (k1 * (x1 + e * y1), k2 * (x2 + y2 / e))
    };
    let mut ns: BTreeSet<i64> = BTreeSet::new();
    let mut prev = at(0);
    for i in 1..=400_000 {
        let cur = at(i);
        let n_moves = prev.0.floor() != cur.0.floor();
        let d_moves = prev.1.ceil() != cur.1.ceil() && cur.1.ceil() > limit.floor();
        if n_moves && d_moves {
            let (lo, hi) = (prev.0.floor() as i64 - 1, cur.0.ceil() as i64 + 1);
            if hi - lo > 1_000_000 {
                return Err(format!("grid interval {i} spans {} probe values", hi - lo));
            }
            ns.extend(lo..=hi);
        }
        prev = cur;
    }
    let mut out = Vec::new();
    for m in ns {
        let n = Scalar::rational(num_rational::BigRational::from_integer(BigInt::from(sign * m)));
        let e = n.div(&fd.k1).and_then(|v| (&v - &fd.x1).div(&fd.y1)).map_err(|e| e.to_string())?;
        if e.sign() != Some(vinberg::Sign::Positive) {
            continue;
        }
        if fd.denominator(&e).map_err(|e| e.to_string())?.is_integer().map_err(|e| e.to_string())?.is_none() {
            continue;
        }
        let mut cand = p.clone();
        cand.e[k] = e.clone();
        if integral_check(&cand).map_err(|e| e.to_string())?.certificate().is_some() {
            out.push(e);
        }
    }
    Ok(out)
}

fn c8_sweep(cat: &[Enumerated]) -> Outcome {
    let start = Instant::now();
    let mut fibers = 0;
    let mut total = 0;
    for (name, p) in glued_points(cat) {
        for k in 0..p.cuts.len() {
            let sweep = integral::fiber_sweep(p, k).map_err(|e| format!("{name}: {e}"))?;
            let (lo, hi) = (sweep.band.lo.to_f64(), sweep.band.hi.to_f64());
            ensure!(lo > 0.0 && lo <= hi, "{name}: band [{lo}, {hi}]");
            let mut got: Vec<Scalar> = sweep.survivors.iter().map(|s| s.0.clone()).collect();
            for e in &got {
                let v = e.to_f64();
                ensure!(v >= lo * (1.0 - 1e-12) && v <= hi * (1.0 + 1e-12), "{name}: survivor {e} outside [{lo}, {hi}]");
            }
            ensure!(got.contains(&p.e[k]), "{name}: the point itself is not a survivor of cut {k}");
            let mut want = brute_force_survivors(p, k).map_err(|e| format!("{name}: {e}"))?;
            let key = |s: &Scalar| s.to_string();
            got.sort_by_key(key);
            want.sort_by_key(key);
            ensure!(got == want, "{name}, cut {k}: sweep {got:?} vs grid {want:?}");
            fibers += 1;
            total += got.len();
        }
    }
    Ok(format!("{fibers} fibers, {total} survivors, {}", secs(start.elapsed())))
}

fn c9_oracle(cat: &[Enumerated]) -> Outcome {
    let start = Instant::now();
    let mut names = Vec::new();
    for c in cat {
        let essential = c.g.prismatic_circuits().unwrap().iter().filter(|x| x.kind == CircuitKind::Essential).count();
        if essential > 2 || c.g.facet_count() > 10 {
            continue;
        }
        let cmp = compare_with_direct(&c.g, &c.en, 60).map_err(|e| format!("{}: {e}", c.name))?;
        ensure!(
            cmp.agrees(),
            "{}: recursive {} vs direct {} (bound {}), unmatched {:?}",
            c.name,
            cmp.recursive,
            cmp.direct,
            cmp.bound,
            cmp.unmatched
        );
        names.push(format!("{}={}", c.name, cmp.recursive));
    }
    let t = start.elapsed();
    ensure!(t < Duration::from_secs(300), "took {}", secs(t));
    Ok(format!("{} entries ({}), {}", names.len(), names.join(" "), secs(t)))
}

fn c10_realize(cat: &[Enumerated]) -> Outcome {
    let mut n = 0;
    let mut worst = (0.0f64, 0.0f64, 0.0f64);
    for c in cat {
        for (i, p) in c.en.points.iter().enumerate() {
            let a = p.point.assemble().unwrap().matrix;
            let r = realize_point(&p.point).map_err(|e| format!("{} #{i}: {e}", c.name))?;
            ensure!(r.epsilon < 1e-10, "{} #{i}: epsilon {}", c.name, r.epsilon);
            verify_relations(&r, &a.coxeter(), 1e-8).map_err(|e| format!("{} #{i}: {e}", c.name))?;
            let traces = word_traces(&r, 200, 8, 17 + i as u64);
            ensure!(traces.len() == 200, "{} #{i}: {} traces", c.name, traces.len());
            let gap = traces.iter().map(|t| (t - t.round()).abs()).fold(0.0, f64::max);
            ensure!(gap < 1e-6, "{} #{i}: trace gap {gap}", c.name);
            let float = VinbergRealization { exact: None, ..r.clone() };
            let drift = word_traces(&float, 200, 8, 17 + i as u64)
                .iter()
                .zip(&traces)
                .map(|(f, t)| (f - t).abs() / t.abs().max(1.0))
                .fold(0.0, f64::max);
            worst = (worst.0.max(r.epsilon), worst.1.max(gap), worst.2.max(drift));
            n += 1;
        }
    }
    ensure!(n > 0, "no enumerated points");
    Ok(format!(
        "{n} points, max epsilon {:.1e}, max trace gap {:.1e} (float words drift {:.1e} relative)",
        worst.0, worst.1, worst.2
    ))
}

fn c11_classify() -> Outcome {
    let known = catalog::known_diagrams();
    for k in &known {
        let cox: &CoxeterMatrix = &k.coxeter;
        let class = cox.classify(true).map_err(|e| format!("{}: {e}", k.name))?;
        ensure!(class == k.class, "{}: classified {class:?}, expected {:?}", k.name, k.class);
        let lanner = cox.refine().map_err(|e| format!("{}: {e}", k.name))?.is_lanner;
        ensure!(lanner == k.lanner, "{}: Lanner flag {lanner}", k.name);
        let expect = match k.class {
            GroupClass::Spherical => PerronType::Positive,
            GroupClass::Affine => PerronType::Zero,
            GroupClass::Large => PerronType::Negative,
        };
        // symmetric cosine matrix, -2 on infinite labels
        let kind = CartanMatrix::new(cox.names.clone(), cox.gram()).perron_type().map_err(|e| format!("{}: {e}", k.name))?.kind;
        ensure!(kind == expect, "{}: Perron type {kind:?}", k.name);
    }
    Ok(format!("{} known diagrams", known.len()))
}

fn run(id: usize, title: &str, f: impl FnOnce() -> Outcome) -> bool {
    let r = panic::catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
        let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
        Err(format!("panicked: {}", msg.unwrap_or_default()))
    });
    match r {
        Ok(detail) => {
            println!("PASS {id:>2} {title}: {detail}");
            true
        }
        Err(why) => {
            println!("FAIL {id:>2} {title}: {why}");
            false
        }
    }
}

fn main() -> ExitCode {
    panic::set_hook(Box::new(|_| {}));
    let cat = enumerate_catalog();
    let results = [
        run(1, "cyclic-product equivalence", c1_equivalence),
        run(2, "triangle chart", c2_triangle),
        run(3, "simplex case 1 constraint", c3_case1),
        run(4, "dimension formula", c4_dimension),
        run(5, "affine A nonexistence", c5_a_tilde),
        run(6, "divisor pairs", || c6_divisors(&cat)),
        run(7, "bending algebra", || c7_bending(&cat)),
        run(8, "fiber sweep", || c8_sweep(&cat)),
        run(9, "recursive and direct agree", || c9_oracle(&cat)),
        run(10, "realization fidelity", || c10_realize(&cat)),
        run(11, "classification regression", c11_classify),
    ];
    let failed = results.iter().filter(|&&ok| !ok).count();
    println!("{} passed, {failed} failed", results.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
