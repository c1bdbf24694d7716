//! Acceptance harness: one PASS/FAIL line per criterion.
//!
//! Always exits 0 so that failing criteria are reported rather than hidden
//! behind the first failure; set `OHD_ACCEPTANCE_STRICT=1` to exit 1 when any
//! criterion fails.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::error::Error as StdError;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use ohd::barricades::{
    barricade_energy, barricade_sweep, barricade_voltage, barricade_wrd, find_barricades, is_barricade,
};
use ohd::currents::{
    current_with_intensity, free_current, levels_from_first, min_energy_projection, raise_free_energy, LimitConfig, ProjectionOptions,
};
use ohd::exhaustion::{truncate_free, EdgeSelection, Exhaustion, Truncation, WithoutEdges};
use ohd::families::{
    ladder_ohd_closed_form, ladder_rung_key, ladder_side_key, n1_rungs, n2_parallels, Family, LadderSpec,
    SeriesRule,
};
use ohd::kirchhoff::{accumulations, cycle_voltage, find_positive_cycle};
use ohd::network::{fundamental_cycles, DirectedEdge, EdgeFunction, Network, NetworkBuilder, Potential, VertexId};
use ohd::ohd::{
    characterization_check, deletion_transfer_check, extract_along_current, finite_modification_check, gap_rows,
    gap_test, harmonic_witness, CertificateVerdict, OhdEvidence,
};
use ohd::transience::{nash_williams_bound, resistance_at, resistance_to_infinity, Transience};
use ohd::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{bfs_distances, random_network, relative_gap};

type Outcome = Result<(bool, String), Box<dyn StdError>>;

fn cfg() -> LimitConfig {
    LimitConfig::default()
}

fn family(name: &str) -> Result<Family, Error> {
    Family::named(name)
}

/// `R(p, q)` from the grounded Laplacian, solved densely.
fn dense_resistance(net: &Network, p: VertexId, q: VertexId) -> f64 {
    let n = net.vertex_count();
    let index = |v: usize| if v < q.0 { v } else { v - 1 };
    let mut l = DMatrix::<f64>::zeros(n - 1, n - 1);
    for e in net.edges() {
        let c = e.conductance();
        let (a, b) = (e.tail.0, e.head.0);
        if a != q.0 {
            l[(index(a), index(a))] += c;
        }
        if b != q.0 {
            l[(index(b), index(b))] += c;
        }
        if a != q.0 && b != q.0 {
            l[(index(a), index(b))] -= c;
            l[(index(b), index(a))] -= c;
        }
    }
    let mut rhs = DVector::<f64>::zeros(n - 1);
    rhs[index(p.0)] = 1.0;
    let x = l.cholesky().expect("grounded Laplacian is positive definite").solve(&rhs);
    x[index(p.0)]
}

fn ac1_finite_identities() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut k1, mut k2, mut iu, mut ur, mut oracle) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for _ in 0..50 {
        let n = rng.gen_range(2..=100);
        let extra = rng.gen_range(0..=2 * n);
        let net = random_network(&mut rng, n, extra, 0.1, 10.0);
        let p = VertexId(rng.gen_range(0..n));
        let q = VertexId((p.0 + rng.gen_range(1..n)) % n);
        let u = rng.gen_range(0.5..5.0);
        let sol = free_current(&net, p, q, u)?;
        let acc = accumulations(&net, &sol.flow)?;
        for v in net.vertices().filter(|&v| v != p && v != q) {
            k1 = k1.max(acc[v.0].abs());
        }
        for c in fundamental_cycles(&net) {
            k2 = k2.max(cycle_voltage(&net, &sol.flow, &c)?.abs());
        }
        iu = iu.max(relative_gap(sol.energy, sol.intensity * u));
        ur = ur.max(relative_gap(sol.energy, u * u / sol.resistance));
        oracle = oracle.max(relative_gap(sol.resistance, dense_resistance(&net, p, q)));
    }
    let elapsed = start.elapsed();
    let pass = k1 < 1e-8 && k2 < 1e-8 && iu < 1e-9 && ur < 1e-9 && oracle < 1e-9 && elapsed < Duration::from_secs(10);
    Ok((
        pass,
        format!(
            "50 networks: K1 {k1:.1e}, K2 {k2:.1e}, E=IU {iu:.1e}, E=U^2/R {ur:.1e}, R vs dense solve {oracle:.1e}"
        ),
    ))
}

/// Monotonicity of `R_F^{(n)}` and `R_W^{(n)}` over the given levels.
fn rayleigh(ex: &dyn Exhaustion, p: &str, q: &str, levels: &[usize]) -> Result<Option<String>, Error> {
    let rows = gap_rows(ex, p, q, levels, &cfg())?;
    let slack = |a: f64, b: f64| 1e-10 * a.abs().max(b.abs()).max(1.0);
    for w in rows.windows(2) {
        if w[1].r_free > w[0].r_free + slack(w[0].r_free, w[1].r_free) {
            return Ok(Some(format!("R_F rises at n={}", w[1].n)));
        }
        if w[1].r_wired < w[0].r_wired - slack(w[0].r_wired, w[1].r_wired) {
            return Ok(Some(format!("R_W falls at n={}", w[1].n)));
        }
    }
    for a in &rows {
        for b in &rows {
            if a.r_wired > b.r_free + slack(a.r_wired, b.r_free) {
                return Ok(Some(format!("R_W at n={} exceeds R_F at n={}", a.n, b.n)));
            }
        }
    }
    Ok(None)
}

fn ac2_rayleigh() -> Outcome {
    let start = Instant::now();
    // 2^200 tree vertices and ~8·10^4-vertex grid balls are out of reach;
    // these are the deepest levels that fit the time budget on one core
    let cases = [
        ("ladder:unit", "a1", "b1", 200),
        ("ladder:geometric", "a1", "b1", 200),
        ("grid2:unit", "0,0", "1,0", 100),
        ("btree:unit", "root", "t2", 18),
    ];
    let mut notes = Vec::new();
    let mut monotone = true;
    for (name, p, q, depth) in cases {
        let f = family(name)?;
        let levels = levels_from_first(&*f.exhaustion, &[p, q], depth)?;
        if let Some(problem) = rayleigh(&*f.exhaustion, p, q, &levels)? {
            monotone = false;
            notes.push(format!("{name}: {problem}"));
        } else {
            notes.push(format!("{name} ok to n={depth}"));
        }
    }
    let elapsed = start.elapsed();
    let full_depth = cases.iter().all(|c| c.3 >= 200);
    let pass = monotone && full_depth && elapsed < Duration::from_secs(60);
    let scope = if full_depth { "" } else { "; n=200 not reached for grid and tree" };
    Ok((pass, format!("{}{scope}", notes.join(", "))))
}

fn ac3_trichotomy() -> Outcome {
    let mut notes = Vec::new();
    let mut pass = true;
    for name in ["ladder:unit", "ladder:geometric", "ladder:one-unit-side"] {
        let f = family(name)?;
        let closed = f.ohd.clone().ok_or("ladder without a closed form")?;
        let v = gap_test(&*f.exhaustion, "a1", "b1", 200, &cfg())?;
        let gaps: Vec<f64> = v.gap.values.iter().map(|&(_, g)| g).collect();
        let last = *gaps.last().ok_or("empty gap sequence")?;
        let ok = if closed.in_ohd {
            last < 1e-3 && v.verdict == OhdEvidence::InOhd
        } else {
            let tail = &gaps[gaps.len() - 4..];
            let flat = tail.windows(2).all(|w| (w[1] - w[0]).abs() / w[1].abs() < 1e-4);
            last > 1e-3 && flat && v.verdict == OhdEvidence::NotInOhd
        };
        pass &= ok;
        notes.push(format!("{name} gap {last:.3e} ({:?}, closed form in_ohd={})", v.verdict, closed.in_ohd));
    }
    Ok((pass, notes.join(", ")))
}

fn ac4_transience() -> Outcome {
    let mut notes = Vec::new();

    let tree = family("btree:unit")?;
    let t = resistance_to_infinity(&*tree.exhaustion, "root", 18, &cfg(), None)?;
    // level symmetry: R^{(n)} = Σ_{k=1..n} 2^{-k}
    let tree_levels = t
        .sequence
        .values
        .iter()
        .all(|&(n, r)| (r - (1.0 - 0.5f64.powi(n as i32))).abs() < 1e-9);
    let tree_ok = t.verdict == Transience::Transient && (t.sequence.extrapolated - 1.0).abs() <= 1e-3 && tree_levels;
    notes.push(format!("tree R={:.6} ({:?})", t.sequence.extrapolated, t.verdict));

    // two rays of n unit edges in parallel
    let ray = family("ray:unit")?;
    let mut ray_err = 0.0f64;
    for n in 1..=200 {
        let r = resistance_at(&*ray.exhaustion, "v0", n, &Default::default())?;
        ray_err = ray_err.max((r - n as f64 / 2.0).abs());
    }
    notes.push(format!("ray |R-n/2| {ray_err:.1e}"));

    let grid = family("grid2:unit")?;
    let mut nw_ok = true;
    let mut worst = f64::INFINITY;
    for n in 1..=60 {
        let nw = nash_williams_bound(&*grid.exhaustion, "0,0", &(1..=n).collect::<Vec<_>>())?.total();
        let r = resistance_at(&*grid.exhaustion, "0,0", n, &Default::default())?;
        nw_ok &= nw <= r * (1.0 + 1e-12);
        worst = worst.min(r - nw);
    }
    notes.push(format!("Z^2 min(R-NW) {worst:.3e} over n<=60"));
    Ok((tree_ok && ray_err < 1e-9 && nw_ok, notes.join(", ")))
}

fn ac5_round_trip() -> Outcome {
    let f = family("ladder:geometric")?;
    let n = 50;
    let w = harmonic_witness(&*f.exhaustion, "a1", "b1", n, &cfg())?;
    let parts = extract_along_current(&w.network, &w.current)?;
    let names = |vs: &[VertexId]| -> BTreeSet<String> { vs.iter().map(|&v| w.network.name(v).to_string()).collect() };
    let (a, b) = (names(&parts.a), names(&parts.b));
    let side = |c: char| -> BTreeSet<String> { (1..=n).map(|j| format!("{c}{j}")).collect() };
    let (sa, sb) = (side('a'), side('b'));
    let diff = |x: &BTreeSet<String>, y: &BTreeSet<String>| x.symmetric_difference(y).count();
    let sd = (diff(&a, &sa) + diff(&b, &sb)).min(diff(&a, &sb) + diff(&b, &sa));

    // the parts are finite subsets of V_50, so only levels below 50 see them
    // as the infinite sides they approximate
    let sel = |s: &BTreeSet<String>| ohd::exhaustion::VertexSelector::names(s.iter().cloned());
    let cert = characterization_check(f.exhaustion.clone(), &sel(&a), &sel(&b), n - 1, &cfg(), [None, None], true)?;

    let unit = family("ladder:unit")?;
    let hints = [unit.part_recurrence("side1"), unit.part_recurrence("side2")];
    let unit_cert = characterization_check(
        unit.exhaustion.clone(),
        unit.part("side1").ok_or("no side1")?,
        unit.part("side2").ok_or("no side2")?,
        n,
        &cfg(),
        [hints[0].as_deref(), hints[1].as_deref()],
        false,
    )?;
    let pass = sd <= 4
        && cert.verdict == CertificateVerdict::NotInOhdCertified
        && unit_cert.verdict == CertificateVerdict::FailedTransience;
    Ok((
        pass,
        format!(
            "symmetric difference {sd}, geometric {:?} (cross-check {:?}), unit {:?}",
            cert.verdict, cert.cross_check, unit_cert.verdict
        ),
    ))
}

/// Every simple directed cycle through `e` on which `f` is strictly positive.
fn positive_cycles_through(net: &Network, f: &EdgeFunction, e: DirectedEdge) -> Vec<Vec<DirectedEdge>> {
    fn walk(
        net: &Network,
        f: &EdgeFunction,
        e: DirectedEdge,
        v: VertexId,
        seen: &mut Vec<bool>,
        path: &mut Vec<DirectedEdge>,
        out: &mut Vec<Vec<DirectedEdge>>,
    ) {
        if v == e.tail {
            out.push(path.clone());
            return;
        }
        for d in net.out_edges(v) {
            if d.edge != e.edge && !seen[d.head.0] && f.at(net, &d) > 0.0 {
                seen[d.head.0] = true;
                path.push(d);
                walk(net, f, e, d.head, seen, path, out);
                path.pop();
                seen[d.head.0] = false;
            }
        }
    }
    let mut seen = vec![false; net.vertex_count()];
    seen[e.head.0] = true;
    let mut out = Vec::new();
    walk(net, f, e, e.head, &mut seen, &mut vec![e], &mut out);
    out
}

fn ac6_positive_cycles() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut instances = 0;
    let mut total_cycles = 0;
    while instances < 100 {
        let n = rng.gen_range(3..=12);
        let extra = rng.gen_range(1..=n);
        let net = random_network(&mut rng, n, extra, 0.5, 2.0);
        let cycles = fundamental_cycles(&net);
        if cycles.is_empty() {
            continue;
        }
        let mut f = EdgeFunction::zero(&net);
        for _ in 0..rng.gen_range(1..=5) {
            let c = &cycles[rng.gen_range(0..cycles.len())];
            let w = rng.gen_range(0.1..2.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            for d in c {
                f.push(&net, d, w);
            }
        }
        let support: Vec<DirectedEdge> = net
            .edge_ids()
            .map(|e| net.forward(e))
            .flat_map(|d| [d, d.reversed()])
            .filter(|d| f.at(&net, d) > 1e-9)
            .collect();
        if support.is_empty() {
            continue;
        }
        instances += 1;
        let e = support[rng.gen_range(0..support.len())];
        let cycle = find_positive_cycle(&net, &f, e, 1e-8)?;
        let brute = positive_cycles_through(&net, &f, e);
        total_cycles += brute.len();
        if !brute.contains(&cycle) {
            return Ok((false, format!("instance {instances}: returned cycle is not a positive simple cycle through e")));
        }
    }
    Ok((true, format!("100 circulations, {total_cycles} positive cycles enumerated")))
}

const STEP: i64 = 1; // grid units
const UNIT: f64 = 1e-3;

struct BoxInstance {
    net: Network,
    /// Allowed range of each edge in grid units.
    range: Vec<(i64, i64)>,
    z: usize,
    a: usize,
}

impl BoxInstance {
    /// Best grid point under `objective`, enumerating all but the last edge
    /// and solving the last one exactly on the grid.
    fn search(&self, demand_a: i64, objective: &dyn Fn(&[i64]) -> f64) -> Option<(f64, Vec<i64>)> {
        let mut x = vec![0i64; self.range.len()];
        let mut best: Option<(f64, Vec<i64>)> = None;
        self.enumerate(0, &mut x, demand_a, objective, &mut best);
        best
    }

    fn enumerate(
        &self,
        k: usize,
        x: &mut Vec<i64>,
        demand_a: i64,
        objective: &dyn Fn(&[i64]) -> f64,
        best: &mut Option<(f64, Vec<i64>)>,
    ) {
        let m = self.range.len();
        if k + 1 < m {
            let (lo, hi) = self.range[k];
            let mut v = lo;
            while v <= hi {
                x[k] = v;
                self.enumerate(k + 1, x, demand_a, objective, best);
                v += STEP;
            }
            return;
        }
        // last edge: every node constraint is an interval for x[m-1]
        let last = &self.net.edges()[m - 1];
        let (mut lo, mut hi) = self.range[m - 1];
        let mut acc = vec![0i64; self.net.vertex_count()];
        for (e, &v) in self.net.edges()[..m - 1].iter().zip(x.iter()) {
            acc[e.tail.0] -= v;
            acc[e.head.0] += v;
        }
        for v in 0..acc.len() {
            if v == self.z {
                continue;
            }
            let need = if v == self.a { demand_a } else { 0 };
            let coef = (last.head.0 == v) as i64 - (last.tail.0 == v) as i64;
            match coef {
                1 => lo = lo.max(need - acc[v]),
                -1 => hi = hi.min(acc[v] - need),
                _ if acc[v] < need => return,
                _ => {}
            }
        }
        if lo > hi {
            return;
        }
        for cand in [lo, hi, 0i64.clamp(lo, hi)] {
            x[m - 1] = cand;
            let value = objective(x);
            if best.as_ref().map_or(true, |(b, _)| value < *b) {
                *best = Some((value, x.clone()));
            }
        }
    }

    fn energy(&self, x: &[i64]) -> f64 {
        self.net
            .edges()
            .iter()
            .zip(x)
            .map(|(e, &v)| e.resistance * (v as f64 * UNIT).powi(2))
            .sum()
    }

    fn inflow(&self, x: &[i64]) -> i64 {
        self.net
            .edges()
            .iter()
            .zip(x)
            .map(|(e, &v)| (e.head.0 == self.a) as i64 * v - (e.tail.0 == self.a) as i64 * v)
            .sum()
    }
}

fn random_box(rng: &mut ChaCha8Rng) -> BoxInstance {
    loop {
        let mut b = NetworkBuilder::new();
        let names = ["z", "a", "m1", "m2"];
        let ids: Vec<VertexId> = names.iter().map(|n| b.vertex(n)).collect();
        let edges = rng.gen_range(2..=4);
        let mut range = Vec::new();
        for _ in 0..edges {
            let (x, y) = loop {
                let x = rng.gen_range(0..4);
                let y = rng.gen_range(0..4);
                if x != y {
                    break (x, y);
                }
            };
            b.edge(ids[x], ids[y], rng.gen_range(1.0..10.0)).unwrap();
            let cap = rng.gen_range(50..=200);
            range.push(if rng.gen_bool(0.5) { (0, cap) } else { (-cap, 0) });
        }
        let net = b.build();
        let inst = BoxInstance {
            net,
            range,
            z: 0,
            a: 1,
        };
        let inflow = |x: &[i64]| -(inst.inflow(x) as f64);
        if let Some((neg, _)) = inst.search(0, &inflow) {
            if -neg >= 20.0 {
                return inst;
            }
        }
    }
}

fn ac7_projection_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let inst = random_box(&mut rng);
        let inflow = |x: &[i64]| -(inst.inflow(x) as f64);
        let max_flow = -inst.search(0, &inflow).ok_or("no feasible point")?.0;
        let demand = (0.7 * max_flow).floor() as i64;
        let energy = |x: &[i64]| inst.energy(x);
        let (grid_energy, _) = inst.search(demand, &energy).ok_or("no feasible point at the demand")?;
        let upper = EdgeFunction(
            inst.range
                .iter()
                .map(|&(lo, hi)| if hi > 0 { hi as f64 * UNIT } else { lo as f64 * UNIT })
                .collect(),
        );
        let opts = ProjectionOptions {
            exempt: vec![VertexId(inst.z)],
            ..Default::default()
        };
        let out = min_energy_projection(&inst.net, &upper, VertexId(inst.a), demand as f64 * UNIT, &opts)?;
        if out.energy > grid_energy + 1e-9 {
            return Ok((false, format!("projection energy {} above grid optimum {grid_energy}", out.energy)));
        }
        worst = worst.max(grid_energy - out.energy);
    }
    Ok((worst <= 1e-2, format!("20 instances, largest energy difference {worst:.2e}")))
}

fn ac8_inflation() -> Outcome {
    let mut cases: Vec<(String, Network)> = Vec::new();
    for (name, n) in [
        ("ladder:unit", 6),
        ("ladder:geometric", 8),
        ("grid2:unit", 4),
        ("grid2:unit", 6),
        ("btree:unit", 5),
        ("btree:unit", 7),
        ("ray:unit", 10),
        ("twin-trees", 4),
        ("n1", 10),
    ] {
        let f = family(name)?;
        cases.push((format!("{name}@{n}"), truncate_free(&*f.exhaustion, n)?.network));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    cases.push(("random".into(), random_network(&mut rng, 40, 30, 0.1, 10.0)));

    let mut notes = Vec::new();
    let mut pass = true;
    for (i, (label, net)) in cases.iter().enumerate() {
        let p = VertexId(0);
        let dist = bfs_distances(net, p);
        let q = VertexId((0..net.vertex_count()).max_by_key(|&v| (dist[v], v)).unwrap());
        // a potential with many level edges: linear in the distance up to
        // half way to q, then flat
        let k = (dist[q.0] as f64 / 2.0).ceil().max(1.0);
        let rho = Potential(dist.iter().map(|&d| (1.0 - d as f64 / k).max(0.0)).collect());
        let before = current_with_intensity(net, p, q, 1.0, &Default::default())?.energy;
        let target = before * 10f64.powi(i as i32 % 4 + 1);
        let out = raise_free_energy(net, &rho, p, q, 1.0, target, &Default::default())?;
        let resolved = current_with_intensity(&out.network, p, q, 1.0, &Default::default())?.energy;
        let level_free = out.edges.iter().all(|&e| {
            let edge = net.edge(e);
            rho.get(edge.tail) != rho.get(edge.head)
        });
        let untouched = net
            .edge_ids()
            .filter(|e| !out.edges.contains(e))
            .all(|e| out.network.edge(e).resistance == net.edge(e).resistance);
        let ok = resolved >= target && level_free && untouched;
        pass &= ok;
        if !ok {
            notes.push(format!("{label}: energy {resolved} vs target {target}, level-free {level_free}"));
        }
    }
    Ok((pass, if pass { "10 truncations reach their targets without touching level edges".into() } else { notes.join(", ") }))
}

fn check_barricades(f: &Family, n: usize, count: usize) -> Result<(usize, Vec<String>), Error> {
    let search = find_barricades(&*f.exhaustion, f.anchor_edge, count, n)?;
    let t: Truncation = truncate_free(&*f.exhaustion, n)?;
    let mut problems = Vec::new();
    let mut used = BTreeSet::new();
    for (i, b) in search.barricades.iter().enumerate() {
        let check = is_barricade(&t, &b.subgraph, f.anchor_edge)?;
        if !check.passed() {
            problems.push(format!("{} #{i}: {:?}", f.name, check.violations));
        }
        if !b.subgraph.edges.iter().all(|k| used.insert(*k)) {
            problems.push(format!("{} #{i} shares an edge", f.name));
        }
        let unit = b
            .subgraph
            .edges
            .iter()
            .all(|&k| t.network.edge_by_key(k).is_some_and(|e| t.network.edge(e).resistance == 1.0));
        if unit {
            let w = barricade_wrd(&t.network, b)?;
            if w.wrd > w.diameter as f64 + 1e-9 {
                problems.push(format!("{} #{i}: wRD {} above diameter {}", f.name, w.wrd, w.diameter));
            }
        }
    }
    Ok((search.barricades.len(), problems))
}

fn ac9_barricades() -> Outcome {
    let mut problems = Vec::new();
    let mut counts = Vec::new();
    for (name, n, count) in [("ladder:unit", 30, 10), ("grid2:unit", 16, 5), ("n1", 40, 30)] {
        let (found, mut p) = check_barricades(&family(name)?, n, count)?;
        if found < count {
            p.push(format!("{name}: only {found} of {count} barricades"));
        }
        counts.push(format!("{name} {found}"));
        problems.append(&mut p);
    }

    let f = family("ladder:geometric")?;
    let n = 50;
    let w = harmonic_witness(&*f.exhaustion, "a1", "b1", n, &cfg())?;
    let search = find_barricades(&*f.exhaustion, f.anchor_edge, 30, n)?;
    let mut worst_ratio = 0.0f64;
    for b in &search.barricades {
        let u = barricade_voltage(&w.network, &w.potential, b)?;
        let e = barricade_energy(&w.network, &w.potential, b)?;
        let wrd = barricade_wrd(&w.network, b)?.wrd;
        if u * u > wrd * e * (1.0 + 1e-8) {
            problems.push(format!("U^2 {} above wRD*E {}", u * u, wrd * e));
        }
        if wrd * e > 0.0 {
            worst_ratio = worst_ratio.max(u * u / (wrd * e));
        }
    }
    let pass = problems.is_empty() && !search.barricades.is_empty();
    let detail = if pass {
        format!(
            "found {}; geometric witness over {} barricades, max U^2/(wRD*E) {worst_ratio:.6}",
            counts.join(", "),
            search.barricades.len()
        )
    } else {
        problems.join("; ")
    };
    Ok((pass, detail))
}

fn ac10_counterexamples() -> Outcome {
    let mut notes = Vec::new();
    let pairs = vec![("a1".to_string(), "b1".to_string())];

    let n1 = family("n1")?;
    let (search, report) = barricade_sweep(&*n1.exhaustion, n1.anchor_edge, 50, 60, n1.wrd_bound.as_ref(), None)?;
    let reduced = WithoutEdges {
        base: n1.exhaustion.clone(),
        removed: n1_rungs(),
    };
    let g_minus_s = gap_test(&reduced, "a1", "b1", 200, &cfg())?;
    // G - S is a double ray through the first rung: R_F = 1/3, R_W = 1/3 || 2/3
    let n1_gap = g_minus_s.gap.extrapolated;
    let n1_ok = report.certified
        && search.barricades.len() == 50
        && g_minus_s.verdict == OhdEvidence::NotInOhd
        && (n1_gap - 1.0 / 9.0).abs() < 1e-3;
    notes.push(format!(
        "N1: sum 1/wRD {:.1} over 50 ({}), G-S gap {n1_gap:.5}",
        report.partial_sum(),
        if report.certified { "certified" } else { "not certified" }
    ));

    let n2 = family("n2")?;
    let g = gap_test(&*n2.exhaustion, "a1", "b1", 100, &cfg())?;
    let spec = LadderSpec {
        rungs: SeriesRule::Geometric { a: 4.0, q: 2.0 },
        side1: SeriesRule::Geometric { a: 8.0, q: 2.0 },
        side2: SeriesRule::Geometric { a: 8.0, q: 2.0 },
    };
    let closed = ladder_ohd_closed_form(&spec)?;
    let n2_reduced = WithoutEdges {
        base: n2.exhaustion.clone(),
        removed: n2_parallels(),
    };
    let numeric = gap_test(&n2_reduced, "a1", "b1", 100, &cfg())?;
    let n2_ok = g.verdict == OhdEvidence::NotInOhd && closed.in_ohd && numeric.verdict == OhdEvidence::InOhd;
    notes.push(format!(
        "N2: G gap {:.4} ({:?}), G-S closed form in_ohd={} (numeric {:?})",
        g.gap.extrapolated, g.verdict, closed.in_ohd, numeric.verdict
    ));

    let refused = |r: Result<_, Error>| matches!(r, Err(Error::DivergentConductance));
    let refusals = refused(deletion_transfer_check(n1.exhaustion.clone(), &n1_rungs(), &pairs, 60, &cfg()))
        && refused(deletion_transfer_check(n2.exhaustion.clone(), &n2_parallels(), &pairs, 60, &cfg()));
    notes.push(format!("divergent deletions refused: {refusals}"));

    let mut finite_ok = true;
    for name in ["ladder:geometric", "ladder:unit"] {
        let f = family(name)?;
        let s = EdgeSelection::keys("rungs 2 to 5", (2..=5).map(ladder_rung_key));
        let t = deletion_transfer_check(f.exhaustion.clone(), &s, &pairs, 200, &cfg())?;
        let decided = t.pairs.iter().all(|p| p.original.is_decided() && p.modified.is_decided());
        finite_ok &= t.consistent && decided;
        notes.push(format!(
            "{name} minus 4 rungs: {:?} vs {:?}",
            t.pairs[0].original, t.pairs[0].modified
        ));
    }
    Ok((n1_ok && n2_ok && refusals && finite_ok, notes.join(", ")))
}

fn ac11_finite_modification() -> Outcome {
    let mut notes = Vec::new();
    let mut pass = true;
    let pairs = vec![("a1".to_string(), "b1".to_string())];
    for name in ["ladder:unit", "ladder:geometric"] {
        let f = family(name)?;
        let net = truncate_free(&*f.exhaustion, 200)?.network;
        let mut keys: Vec<u64> = [1, 2, 3, 10, 50, 150].into_iter().map(ladder_rung_key).collect();
        keys.extend([(0, 1), (1, 1), (0, 2), (1, 10), (0, 100)].map(|(s, j)| ladder_side_key(s, j)));
        let mut verdicts = BTreeSet::new();
        for key in keys {
            let r = net.edge(net.edge_by_key(key).ok_or("edge outside V_200")?).resistance;
            let patch = BTreeMap::from([(key, 2.0 * r)]);
            let t = finite_modification_check(f.exhaustion.clone(), patch, &pairs, 200, &cfg())?;
            let row = &t.pairs[0];
            let ok = t.consistent && row.original.is_decided() && row.original == row.modified;
            pass &= ok;
            verdicts.insert(format!("{:?}", row.modified));
            if !ok {
                notes.push(format!("{name} edge {key}: {:?} -> {:?}", row.original, row.modified));
            }
        }
        notes.push(format!("{name}: 11 edges doubled, verdicts {verdicts:?}"));
    }
    Ok((pass, notes.join(", ")))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("finite-network identities", ac1_finite_identities),
        ("Rayleigh monotonicity", ac2_rayleigh),
        ("ladder trichotomy", ac3_trichotomy),
        ("transience values", ac4_transience),
        ("transient-parts round trip", ac5_round_trip),
        ("positive cycles in circulations", ac6_positive_cycles),
        ("min-energy projection vs grid search", ac7_projection_oracle),
        ("resistance inflation", ac8_inflation),
        ("barricade suite", ac9_barricades),
        ("deletion counterexamples", ac10_counterexamples),
        ("finite-modification invariance", ac11_finite_modification),
    ];
    let mut passed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (ok, detail) = match std::panic::catch_unwind(run) {
            Ok(Ok(result)) => result,
            Ok(Err(e)) => (false, format!("error: {e}")),
            Err(_) => (false, "panicked".into()),
        };
        passed += ok as usize;
        println!(
            "AC{:<2} {} {name}: {detail} [{:.1}s]",
            i + 1,
            if ok { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {passed}/{} criteria passed", criteria.len());
    let strict = std::env::var("OHD_ACCEPTANCE_STRICT").is_ok_and(|v| v == "1");
    if strict && passed < criteria.len() {
        std::process::exit(1);
    }
}
