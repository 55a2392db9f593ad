//! Command-level behaviour on the ready-made configurations.

use ioncav::cli::read_numeric;
use ioncav::cli::{long_chain, run, Command, ResultTable, Seed, Value};

fn summary(dir: &std::path::Path, name: &str) -> Vec<(String, String)> {
    let text = std::fs::read_to_string(dir.join(format!("{name}.tsv"))).unwrap();
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(2)
        .map(|l| {
            let mut c = l.split('\t');
            (c.next().unwrap().to_string(), c.next().unwrap().to_string())
        })
        .collect()
}

fn value(rows: &[(String, String)], key: &str) -> String {
    rows.iter().find(|(k, _)| k == key).map(|(_, v)| v.clone()).unwrap_or_else(|| panic!("no {key}"))
}

#[test]
fn long_chain_equilibria() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = long_chain();
    cfg.out_dir = dir.path().to_string_lossy().into_owned();
    run(Command::Equilibrium, &cfg).unwrap();
    let s = summary(dir.path(), "equilibrium_summary");
    assert_eq!(value(&s, "structure"), "linear");
    let spacing: f64 = value(&s, "central_spacing").parse().unwrap();
    assert!((spacing - 4.3).abs() < 0.15, "{spacing}");
    let (_, rows) = read_numeric(&std::fs::read_to_string(dir.path().join("equilibrium_positions.tsv")).unwrap());
    assert_eq!(rows.len(), 60);

    cfg.system.pump_power = 160.0;
    cfg.equilibrium.seed = Seed::Zigzag;
    run(Command::Equilibrium, &cfg).unwrap();
    assert_eq!(value(&summary(dir.path(), "equilibrium_summary"), "structure"), "zigzag");
}

#[test]
fn weak_cooperativity_has_no_bistability() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = long_chain();
    cfg.out_dir = dir.path().to_string_lossy().into_owned();
    cfg.system.g0_mhz = None;
    cfg.system.cooperativity = Some(0.05);
    cfg.sweep.steps = 61;
    run(Command::Sweep, &cfg).unwrap();
    assert_eq!(value(&summary(dir.path(), "sweep_summary"), "bistable"), "false");
}

#[test]
fn result_table_values_round_trip() {
    let mut t = ResultTable::new("t", &[("a", "")]);
    t.push(vec![Value::Num(0.1 + 0.2)]);
    let text = t.render(&ioncav::cli::Metadata::new("x", String::new()), 0);
    assert_eq!(read_numeric(&text).1[0][0], 0.1 + 0.2);
}

#[test]
fn linear_chain_decouples_transverse_motion() {
    let mut cfg = ioncav::cli::edge_coupled_trio(0.5, 0.1);
    cfg.equilibrium.seed = Seed::Linear;
    let lp = ioncav::cli::linearization_point(&cfg).unwrap();
    assert_eq!(lp.equilibrium.config.structure().to_string(), "linear");
    for n in 0..lp.modes.len() {
        if lp.modes.transverse_weight(n) > 0.5 {
            assert_eq!(lp.modes.couplings[n], 0.0);
        }
    }
}
