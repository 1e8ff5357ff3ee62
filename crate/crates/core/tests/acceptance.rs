//! Acceptance suite. Each test prints one `PASS`/`FAIL` line (bypassing the
//! test harness's output capture) and then asserts its criterion.

use std::collections::VecDeque;
use std::io::Write;
use std::sync::{Arc, OnceLock};

use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use rhtn_core::directives::project;
use rhtn_core::domains::{
    alternatives, move_task, navigation_domain, reach, redzone_directives, DomainKind, ReschuRepair, TickingEnv,
};
use rhtn_core::gridworld::{
    generate_map, resolve_fight, Cell, Destination, Dir, GridMap, Rules, WorldState, Zone, Winner, GOLD_PER_SITE,
    RESCHU_BUDGET,
};
use rhtn_core::harness::{emit_csv, run_sweep, ExperimentConfig, SweepResult, PROBABILITIES};
use rhtn_core::htn::{concat, Arg, Task, TaskList, TaskName};
use rhtn_core::planner::{AgentPolicy, PlanStatus, RepairHooks};

const BASE_SEED: u64 = 0;

const ADAPTIVE_GOALS: (f64, f64) = (4.0 - 0.3, 4.5 + 0.3);
const COMPLIANT_GOALS: (f64, f64) = (2.0 - 0.3, 3.0 + 0.3);
const NONADAPTIVE_GOALS: (f64, f64) = (2.0 - 0.3, 2.5 + 0.3);
const COMPLIANT_PENALTY: (f64, f64) = (140.0 - 15.0, 160.0 + 15.0);
const PENALTY_RATIO: f64 = 1.7;
const COMPLIANT_VIOLATIONS: (f64, f64) = (4.0 - 1.0, 6.0 + 1.0);
const MONSTER_DEATH_RATE: f64 = 0.5;
const MONSTER_DISCREPANCIES: (f64, f64) = (0.6, 1.3);
const FIGHT_TRIALS: u32 = 100_000;
const FIGHT_TOLERANCE: f64 = 0.01;
const ORACLE_MAPS: u64 = 200;
const PROPERTY_CASES: u32 = 1000;

use AgentPolicy::{Adaptive, Compliant, Nonadaptive};

fn report(n: u32, name: &str, pass: bool, detail: &str) {
    let line = format!("criterion {n:>2} {} {name}: {detail}\n", if pass { "PASS" } else { "FAIL" });
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(line.as_bytes());
    let _ = out.flush();
}

fn config(domain: DomainKind) -> ExperimentConfig {
    ExperimentConfig {
        trace: true,
        ..ExperimentConfig::full(domain, BASE_SEED)
    }
}

fn sweeps() -> &'static (SweepResult, SweepResult) {
    static SWEEPS: OnceLock<(SweepResult, SweepResult)> = OnceLock::new();
    SWEEPS.get_or_init(|| {
        let reschu = run_sweep(&config(DomainKind::Oreschu)).expect("valid config");
        let monster = run_sweep(&config(DomainKind::Monster)).expect("valid config");
        assert_eq!(reschu.failures().count() + monster.failures().count(), 0, "episodes failed");
        (reschu, monster)
    })
}

fn in_range(x: f64, (lo, hi): (f64, f64)) -> bool {
    (lo..=hi).contains(&x)
}

/// Mean of one measure for a policy, pooled over every probability.
fn pooled(result: &SweepResult, policy: AgentPolicy, f: impl Fn(&rhtn_core::harness::CellMeans) -> f64) -> f64 {
    let cells: Vec<f64> = PROBABILITIES.iter().map(|&p| f(result.cell(policy, p).unwrap())).collect();
    cells.iter().sum::<f64>() / cells.len() as f64
}

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let num: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    num / den
}

#[test]
fn c01_directive_aware_agents_never_violate() {
    let (reschu, monster) = sweeps();
    let mut worst = 0;
    let mut episodes = 0;
    for result in [reschu, monster] {
        for r in result.records.iter().filter(|r| r.policy != Compliant) {
            worst = worst.max(r.discrepancies + r.fights + r.deaths);
            episodes += 1;
        }
    }
    let pass = worst == 0 && episodes == 2 * 2 * 11 * 100;
    report(1, "zero violations", pass, &format!("{episodes} episodes, max discrepancies+fights+deaths {worst}"));
    assert!(pass);
}

#[test]
fn c02_oreschu_goals() {
    let (reschu, _) = sweeps();
    let mut problems = Vec::new();
    for p in PROBABILITIES {
        let g = |pol| reschu.cell(pol, p).unwrap().goals;
        let (a, c, n) = (g(Adaptive), g(Compliant), g(Nonadaptive));
        for (name, v, range) in [("adaptive", a, ADAPTIVE_GOALS), ("compliant", c, COMPLIANT_GOALS), ("nonadaptive", n, NONADAPTIVE_GOALS)] {
            if !in_range(v, range) {
                problems.push(format!("p={p} {name} {v:.2} outside [{:.1},{:.1}]", range.0, range.1));
            }
        }
        if !(a > c && c >= n) {
            problems.push(format!("p={p} order A {a:.2} C {c:.2} N {n:.2}"));
        }
    }
    let summary = format!(
        "pooled A {:.2} C {:.2} N {:.2}",
        pooled(reschu, Adaptive, |m| m.goals),
        pooled(reschu, Compliant, |m| m.goals),
        pooled(reschu, Nonadaptive, |m| m.goals)
    );
    let detail = if problems.is_empty() { summary } else { format!("{summary}; {}", problems.join("; ")) };
    report(2, "O-RESCHU goals", problems.is_empty(), &detail);
    assert!(problems.is_empty(), "{detail}");
}

#[test]
fn c03_oreschu_penalties() {
    let (reschu, _) = sweeps();
    let a = pooled(reschu, Adaptive, |m| m.penalty_points);
    let c = pooled(reschu, Compliant, |m| m.penalty_points);
    let n = pooled(reschu, Nonadaptive, |m| m.penalty_points);
    let pass = in_range(c, COMPLIANT_PENALTY) && c >= PENALTY_RATIO * a && n < a && n < c;
    let detail = format!("C {c:.1} A {a:.1} N {n:.1} ratio C/A {:.2}", c / a);
    report(3, "O-RESCHU penalties", pass, &detail);
    assert!(pass, "{detail}");
}

#[test]
fn c04_oreschu_compliant_violations() {
    let (reschu, _) = sweeps();
    let mean = pooled(reschu, Compliant, |m| m.discrepancies);
    let trend: Vec<u8> = PROBABILITIES.iter().copied().filter(|&p| p >= 10).collect();
    let xs: Vec<f64> = trend.iter().map(|&p| f64::from(p)).collect();
    let ys: Vec<f64> = trend.iter().map(|&p| reschu.cell(Compliant, p).unwrap().discrepancies).collect();
    let s = slope(&xs, &ys);
    let pass = in_range(mean, COMPLIANT_VIOLATIONS) && s <= 0.0;
    let detail = format!("mean {mean:.2}, slope over 10..50% {s:.4}");
    report(4, "O-RESCHU compliant violations", pass, &detail);
    assert!(pass, "{detail}");
}

#[test]
fn c05_monster_outcomes() {
    let (_, monster) = sweeps();
    let deaths = pooled(monster, Compliant, |m| m.deaths);
    let disc = pooled(monster, Compliant, |m| m.discrepancies);
    let safe_deaths: u32 = monster.records.iter().filter(|r| r.policy != Compliant).map(|r| r.deaths).sum();
    let gold_first = PROBABILITIES.iter().all(|&p| {
        let g = |pol| monster.cell(pol, p).unwrap().gold;
        g(Adaptive) > g(Compliant) && g(Adaptive) > g(Nonadaptive)
    });
    let goals = |pol| pooled(monster, pol, |m| m.goals);
    let order = goals(Adaptive) > goals(Compliant) && goals(Compliant) > goals(Nonadaptive);
    let pass = deaths > MONSTER_DEATH_RATE && in_range(disc, MONSTER_DISCREPANCIES) && safe_deaths == 0 && gold_first && order;
    let detail = format!(
        "compliant deaths {deaths:.2}, discrepancies {disc:.2}; A/N deaths {safe_deaths}; gold A>C,N everywhere {gold_first}; goals A {:.2} C {:.2} N {:.2}",
        goals(Adaptive),
        goals(Compliant),
        goals(Nonadaptive)
    );
    report(5, "MONSTER outcomes", pass, &detail);
    assert!(pass, "{detail}");
}

/// Probability that the NPC wins, by exhaustive recursion over hp states.
fn win_probability(npc: u32, monster: u32) -> f64 {
    let (n, m) = (npc as usize, monster as usize);
    let mut p = vec![vec![0.0; m + 1]; n + 1];
    for a in 0..=n {
        for b in 0..=m {
            p[a][b] = match (a, b) {
                (_, 0) => 1.0,
                (0, _) => 0.0,
                _ => 0.5 * p[a][b - 1] + 0.5 * p[a - 1][b],
            };
        }
    }
    p[n][m]
}

#[test]
fn c06_fight_matches_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(BASE_SEED);
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for (npc, monster) in [(10, 10), (1, 10), (10, 1), (5, 5)] {
        let wins = (0..FIGHT_TRIALS)
            .filter(|_| resolve_fight(npc, monster, &mut rng).winner == Winner::Npc)
            .count();
        let mc = wins as f64 / f64::from(FIGHT_TRIALS);
        let exact = win_probability(npc, monster);
        worst = worst.max((mc - exact).abs());
        parts.push(format!("({npc},{monster}) {mc:.4} vs {exact:.4}"));
    }
    let pass = worst <= FIGHT_TOLERANCE;
    report(6, "fight oracle", pass, &parts.join(", "));
    assert!(pass);
}

fn open_map(zones: Vec<Zone>, dests: &[(&str, Cell)], start: Cell) -> GridMap {
    GridMap {
        width: 20,
        height: 20,
        zones,
        destinations: dests
            .iter()
            .map(|(n, c)| Destination {
                name: Arc::from(*n),
                cell: *c,
            })
            .collect(),
        start,
    }
}

#[test]
fn c07_repair_worked_example() {
    // Agent 3 heads for pink, down and to the left; a zone lies directly
    // below it.
    let map = open_map(
        vec![Zone::new(0, Cell::new(10, 11))],
        &[("pink", Cell::new(6, 16)), ("green", Cell::new(12, 10))],
        Cell::new(9, 12),
    );
    let mut s = WorldState::new(map, 5, Rules::reschu(), 0);
    s.agents[3].pos = Cell::new(10, 10);
    let domain = Arc::new(navigation_domain());
    let ds = Arc::new(redzone_directives(&s.map));
    let tasks = TaskList::from(vec![move_task(Dir::Down, 3), reach(3, "pink")]);
    let a0 = move_task(Dir::Down, 3);
    let projected = domain.apply_action(&s, &a0).unwrap().unwrap();
    let delta = ds.first_violated(&projected).expect("down(3) enters the zone");
    let alts = alternatives(&domain, &ds, &s, 3);
    let expected_alts = vec![move_task(Dir::Up, 3), move_task(Dir::Left, 3), move_task(Dir::Right, 3)];
    let repaired = ReschuRepair::new(domain.clone(), ds.clone()).repair_effect(delta, &s, &tasks, &a0);
    let expected = TaskList::from(vec![move_task(Dir::Left, 3), reach(3, "pink")]);
    let pass = alts == expected_alts && repaired == expected;
    report(7, "repair worked example", pass, &format!("A(s) = {:?} -> {repaired}", alts.iter().map(|t| t.to_string()).collect::<Vec<_>>()));
    assert!(pass);
}

/// Shortest path length between two cells of a zone-free grid.
fn bfs(width: i32, height: i32, from: Cell, to: Cell) -> Option<usize> {
    let idx = |c: Cell| (c.y * width + c.x) as usize;
    let mut dist = vec![usize::MAX; (width * height) as usize];
    let mut queue = VecDeque::from([from]);
    dist[idx(from)] = 0;
    while let Some(c) = queue.pop_front() {
        if c == to {
            return Some(dist[idx(c)]);
        }
        for (dx, dy) in [(0, -1), (0, 1), (-1, 0), (1, 0)] {
            let n = Cell::new(c.x + dx, c.y + dy);
            if n.x >= 0 && n.y >= 0 && n.x < width && n.y < height && dist[idx(n)] == usize::MAX {
                dist[idx(n)] = dist[idx(c)] + 1;
                queue.push_back(n);
            }
        }
    }
    None
}

#[test]
fn c08_planner_matches_bfs() {
    let mut mismatches = Vec::new();
    let mut runs = 0;
    for seed in 0..ORACLE_MAPS {
        let mut map = generate_map(seed).unwrap();
        map.zones.clear();
        for policy in AgentPolicy::ALL {
            let plugin = rhtn_core::domains::DomainPlugin::oreschu(&map);
            let planner = plugin.planner(policy);
            for d in &map.destinations {
                let world = WorldState::new(map.clone(), 1, Rules::reschu(), seed);
                let mut env = TickingEnv::new(world, 0, 0, 1_000);
                let out = planner.rhtn(&mut env, TaskList::single(reach(0, &d.name))).unwrap();
                let oracle = bfs(map.width, map.height, map.start, d.cell).unwrap();
                runs += 1;
                if out.status != PlanStatus::Completed || out.executed.len() != oracle || out.final_state.agents[0].pos != d.cell {
                    mismatches.push(format!("seed {seed} {policy} {}: {} vs {oracle}", d.name, out.executed.len()));
                }
            }
        }
    }
    let pass = mismatches.is_empty();
    report(8, "planner vs BFS", pass, &format!("{runs} runs, {} mismatches", mismatches.len()));
    assert!(pass, "{mismatches:?}");
}

#[test]
fn c09_sweeps_are_deterministic() {
    let (reschu, monster) = sweeps();
    let dir = tempfile::tempdir().unwrap();
    let again_reschu = run_sweep(&config(DomainKind::Oreschu)).unwrap();
    let again_monster = run_sweep(&config(DomainKind::Monster)).unwrap();
    let write = |name: &str, a: &SweepResult, b: &SweepResult| {
        let csv = dir.path().join(format!("{name}.csv"));
        emit_csv(&[a, b], &csv).unwrap();
        let trace = dir.path().join(format!("{name}.trace"));
        let text: String = [a, b].iter().filter_map(|r| r.trace.as_deref()).collect();
        std::fs::write(&trace, text).unwrap();
        (std::fs::read(csv).unwrap(), std::fs::read(trace).unwrap())
    };
    let first = write("first", reschu, monster);
    let second = write("second", &again_reschu, &again_monster);
    let pass = first == second && !first.1.is_empty();
    report(
        9,
        "determinism",
        pass,
        &format!("csv {} bytes, trace {} bytes, identical {}", first.0.len(), first.1.len(), first == second),
    );
    assert!(pass);
}

fn prim(name: &str) -> Task {
    Task::new(TaskName::primitive(name), vec![Arg::Agent(0)])
}

fn task_list() -> impl Strategy<Value = TaskList> {
    prop::collection::vec(prop::sample::select(vec!["up", "down", "left", "right", "stay"]), 0..8)
        .prop_map(|names| names.into_iter().map(prim).collect())
}

fn moves() -> impl Strategy<Value = Vec<Dir>> {
    prop::collection::vec(prop::sample::select(Dir::PRIORITY.to_vec()), 0..60)
}

fn run_property<S: Strategy>(name: &str, strategy: S, test: impl Fn(S::Value) -> Result<(), TestCaseError>) -> Result<(), String>
where
    S::Value: std::fmt::Debug,
{
    let mut runner = TestRunner::new(Config {
        cases: PROPERTY_CASES,
        failure_persistence: None,
        ..Config::default()
    });
    runner.run(&strategy, test).map_err(|e| format!("{name}: {e}"))
}

#[test]
fn c10_property_suites() {
    let domain = navigation_domain();
    let mut results = Vec::new();

    results.push(run_property("concat laws", (task_list(), task_list(), task_list()), |(a, b, c)| {
        prop_assert_eq!(concat(&concat(&a, &b), &c), concat(&a, &concat(&b, &c)));
        prop_assert_eq!(concat(&a, &TaskList::new()), a.clone());
        prop_assert_eq!(concat(&TaskList::new(), &a), a.clone());
        prop_assert_eq!(concat(&a, &b).len(), a.len() + b.len());
        let joined = concat(&a, &b);
        prop_assert_eq!(joined.first(), a.first().or(b.first()));
        Ok(())
    }));

    results.push(run_property("projection composition", (0u64..10_000, moves(), moves()), |(seed, xs, ys)| {
        let s = WorldState::new(generate_map(seed).unwrap(), 1, Rules::reschu(), seed);
        let to_tasks = |ds: &[Dir]| ds.iter().map(|d| move_task(*d, 0)).collect::<Vec<_>>();
        let (a, b) = (to_tasks(&xs), to_tasks(&ys));
        let joined: Vec<Task> = a.iter().chain(&b).cloned().collect();
        let whole = project(&domain, &s, &joined).unwrap();
        let staged = project(&domain, &s, &a).unwrap().map(|mid| project(&domain, &mid, &b).unwrap());
        prop_assert_eq!(whole, staged.flatten());
        prop_assert_eq!(project(&domain, &s, &[]).unwrap(), Some(s.clone()));
        Ok(())
    }));

    results.push(run_property("zone generation", any::<u64>(), |seed| {
        let m = generate_map(seed).unwrap();
        prop_assert_eq!(m.zones.len(), 10);
        prop_assert_eq!(m.destinations.len(), 7);
        prop_assert!(m.validate().is_ok());
        prop_assert!(!m.in_zone(m.start));
        for (i, z) in m.zones.iter().enumerate() {
            prop_assert!(z.in_bounds(m.width, m.height));
            for o in &m.zones[..i] {
                prop_assert!(z.anchor.x.abs_diff(o.anchor.x) >= 3 || z.anchor.y.abs_diff(o.anchor.y) >= 3);
            }
        }
        Ok(())
    }));

    results.push(run_property("budget monotonicity", (0u64..10_000, 0u8..=10, moves()), |(seed, p, dirs)| {
        let mut w = WorldState::new(generate_map(seed).unwrap(), 1, Rules::reschu(), seed);
        let mut incurred = 0;
        for d in dirs {
            w.begin_tick(p * 5);
            let before = w.agents[0].budget;
            match w.step_move(0, d) {
                Ok(r) => {
                    incurred += r.penalty;
                    prop_assert!(w.agents[0].budget <= before);
                    prop_assert_eq!(w.agents[0].budget, RESCHU_BUDGET.saturating_sub(incurred));
                }
                Err(_) => prop_assert_eq!(w.agents[0].budget, before),
            }
            w.end_tick();
            prop_assert_eq!(w.penalties()[0], incurred);
            prop_assert_eq!(w.agents[0].active, w.agents[0].budget > 0);
        }
        Ok(())
    }));

    results.push(run_property("gold conservation", (0u64..10_000, 0u8..=10, moves()), |(seed, p, dirs)| {
        let mut w = WorldState::new(generate_map(seed).unwrap(), 1, Rules::monster(), seed);
        let total = GOLD_PER_SITE * 7;
        for d in dirs {
            w.begin_tick(p * 5);
            if w.agents[0].active {
                prop_assert!(!w.map.in_zone(w.agents[0].pos));
                let _ = w.step_move(0, d);
            }
            w.end_tick();
            prop_assert_eq!(w.gold_collected() + w.gold_remaining().iter().sum::<u32>(), total);
        }
        Ok(())
    }));

    let failures: Vec<&String> = results.iter().filter_map(|r| r.as_ref().err()).collect();
    let pass = failures.is_empty();
    let detail = if pass {
        format!("5 suites x {PROPERTY_CASES} cases")
    } else {
        failures.iter().map(|s| s.as_str()).collect::<Vec<_>>().join("; ")
    };
    report(10, "property suites", pass, &detail);
    assert!(pass, "{detail}");
}
