use skylink::model::{FailureEvent, Region};
use skylink::render::render_svg;
use skylink::runner::{
    records_from_csv, records_to_csv, run, run_with, sweep, RunOptions, Simulation, Stage,
    SweepParam,
};
use skylink::{Config, Config32, Error, Output, Record, Vec2};

fn small() -> Config {
    let mut cfg = Config::table_one();
    cfg.msd_count = 300;
    cfg.map_count = 16;
    cfg.horizon = 1.0;
    cfg.run.snapshot_every = 25;
    cfg
}

fn configs_dir() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

#[test]
fn repeated_runs_are_byte_identical() {
    let mut cfg = small();
    cfg.failure_events.push(FailureEvent {
        time: 0.5,
        fraction: 0.25,
    });
    cfg.run.recovery_window = 0.2;
    let a = run(&cfg).unwrap();
    let b = run(&cfg).unwrap();
    assert_eq!(a.metrics_csv().unwrap(), b.metrics_csv().unwrap());
    assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
}

#[test]
fn seeds_change_the_run() {
    let a = run(&small()).unwrap();
    let mut cfg = small();
    cfg.seed = 2;
    assert_ne!(
        a.metrics_csv().unwrap(),
        run(&cfg).unwrap().metrics_csv().unwrap()
    );
}

#[test]
fn one_record_per_step_plus_the_initial_one() {
    let cfg = small();
    let out = run(&cfg).unwrap();
    assert_eq!(out.records.len(), cfg.step_count() + 1);
    for (k, r) in out.records.iter().enumerate() {
        assert!((r.t - k as f64 * cfg.sampling_interval).abs() < 1e-9);
    }
    let steps: Vec<_> = out.snapshots.iter().map(|s| s.step_index).collect();
    assert_eq!(steps, vec![0, 25, 50, 75, 100]);
}

#[test]
fn stages_run_in_loop_order() {
    let cfg = small();
    let out = run_with(&cfg, RunOptions { trace: true }).unwrap();
    let order = [
        Stage::Cluster,
        Stage::Match,
        Stage::Control,
        Stage::Integrate,
        Stage::Failure,
        Stage::Mobility,
        Stage::Metrics,
    ];
    assert_eq!(out.trace.len(), order.len() * cfg.step_count());
    for (k, chunk) in out.trace.chunks(order.len()).enumerate() {
        assert!(chunk.iter().all(|e| e.step == k + 1));
        assert_eq!(chunk.iter().map(|e| e.stage).collect::<Vec<_>>(), order);
    }
}

#[test]
fn single_agent_follows_the_closed_loop_recurrence() {
    let mut cfg = Config::table_one();
    cfg.msd_count = 1;
    cfg.map_count = 1;
    cfg.clusters = 1;
    cfg.mobility_scale = 0.0;
    cfg.horizon = 25.0;
    let mut sim = Simulation::new(cfg.clone(), RunOptions::default()).unwrap();
    let goal = sim.state().msds[0].position;
    let m0 = sim.state().maps[0].clone();
    for _ in 0..cfg.step_count() {
        sim.step().unwrap();
    }

    // x_{k+1} = M x_k per axis, M = A + B [-c1, -c2], raised by repeated squaring
    let (ts, c1, c2) = (cfg.sampling_interval, cfg.goal_gain, cfg.damping_gain);
    let m = [
        [1.0 - c1 * ts * ts / 2.0, ts - c2 * ts * ts / 2.0],
        [-c1 * ts, 1.0 - c2 * ts],
    ];
    let mul = |a: [[f64; 2]; 2], b: [[f64; 2]; 2]| {
        [
            [
                a[0][0] * b[0][0] + a[0][1] * b[1][0],
                a[0][0] * b[0][1] + a[0][1] * b[1][1],
            ],
            [
                a[1][0] * b[0][0] + a[1][1] * b[1][0],
                a[1][0] * b[0][1] + a[1][1] * b[1][1],
            ],
        ]
    };
    let (mut power, mut base, mut n) = ([[1.0, 0.0], [0.0, 1.0]], m, cfg.step_count());
    while n > 0 {
        if n & 1 == 1 {
            power = mul(power, base);
        }
        base = mul(base, base);
        n >>= 1;
    }
    let end = &sim.state().maps[0];
    for (e0, v0, e, v) in [
        (
            m0.position.x - goal.x,
            m0.velocity.x,
            end.position.x - goal.x,
            end.velocity.x,
        ),
        (
            m0.position.y - goal.y,
            m0.velocity.y,
            end.position.y - goal.y,
            end.velocity.y,
        ),
    ] {
        let want_e = power[0][0] * e0 + power[0][1] * v0;
        let want_v = power[1][0] * e0 + power[1][1] * v0;
        assert!((e - want_e).abs() < 1e-9, "{e} vs {want_e}");
        assert!((v - want_v).abs() < 1e-9, "{v} vs {want_v}");
    }

    // and the sampled trajectory tracks the continuous damped oscillator
    let w = (c1 - c2 * c2 / 4.0).sqrt();
    let t = cfg.horizon;
    let e0 = m0.position.x - goal.x;
    let v0 = m0.velocity.x;
    let decay = (-c2 * t / 2.0).exp();
    let cont = decay * (e0 * (w * t).cos() + (v0 + c2 / 2.0 * e0) / w * (w * t).sin());
    assert!((end.position.x - goal.x - cont).abs() < 1e-2 * (1.0 + e0.abs() + v0.abs()));
}

#[test]
fn failures_disable_the_floor_share_at_the_scheduled_step() {
    let mut cfg = small();
    cfg.failure_events.push(FailureEvent {
        time: 0.5,
        fraction: 0.3,
    });
    let out = run(&cfg).unwrap();
    for r in &out.records {
        let want = if r.t + 1e-9 >= 0.5 { 16 - 4 } else { 16 };
        assert_eq!(r.alive_maps, want, "t = {}", r.t);
    }
    let last = out.snapshots.last().unwrap();
    let dead: Vec<_> = last.maps.iter().filter(|m| !m.alive).collect();
    assert_eq!(dead.len(), 4);
    assert!(dead.iter().all(|m| m.load == 0));
    let at_failure = out.snapshots.iter().find(|s| s.step_index == 50).unwrap();
    for m in dead {
        assert_eq!(m.position, at_failure.maps[m.id].position);
    }
    assert_eq!(out.recovery.len(), 3);
}

#[test]
fn streams_do_not_leak_into_each_other() {
    let base = small();
    let mut still = base.clone();
    still.mobility_scale = 0.0;
    let a = Simulation::new(base.clone(), RunOptions::default()).unwrap();
    let b = Simulation::new(still, RunOptions::default()).unwrap();
    assert_eq!(a.state().maps, b.state().maps);

    let mut failing = base.clone();
    failing.failure_events.push(FailureEvent {
        time: 0.2,
        fraction: 0.5,
    });
    let x = run(&base).unwrap();
    let y = run(&failing).unwrap();
    let devices = |o: &Output| {
        o.snapshots
            .last()
            .unwrap()
            .msds
            .iter()
            .map(|d| d.position)
            .collect::<Vec<_>>()
    };
    assert_eq!(devices(&x), devices(&y));
}

#[test]
fn configuration_round_trips() {
    let cfg = Config::table_one();
    let text = cfg.to_toml_string().unwrap();
    assert_eq!(Config::from_toml_str(&text).unwrap(), cfg);

    let mut odd = small();
    odd.map_init.region = Some(Region {
        min: Vec2::new(-1.5, 2.25),
        max: Vec2::new(3.0, 4.0),
    });
    odd.run.control_limit = Some(7.5);
    odd.failure_events = vec![
        FailureEvent {
            time: 3.0,
            fraction: 0.1,
        },
        FailureEvent {
            time: 9.5,
            fraction: 1.0 / 3.0,
        },
    ];
    let again = Config::from_toml_str(&odd.to_toml_string().unwrap()).unwrap();
    assert_eq!(again, odd);
    assert_eq!(
        again.to_toml_string().unwrap(),
        odd.to_toml_string().unwrap()
    );
}

#[test]
fn shipped_configurations_load() {
    let mut seen = 0;
    for entry in std::fs::read_dir(configs_dir()).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            let cfg = Config::load(&path).unwrap();
            assert_eq!(
                Config::from_toml_str(&cfg.to_toml_string().unwrap()).unwrap(),
                cfg
            );
            seen += 1;
        }
    }
    assert!(seen >= 2);
    assert_eq!(
        Config::load(configs_dir().join("table1.toml")).unwrap(),
        Config::table_one()
    );
}

#[test]
fn bad_configurations_are_config_errors() {
    let text = Config::table_one().to_toml_string().unwrap();
    for (from, to) in [
        ("range = 24.0", "range = -1.0"),
        ("separation = 20.0", "separation = 30.0"),
        ("gamma = 0.2", "gamma = 1.5"),
        ("capacity = 80", "capacity = 0"),
        (
            "covariance = [[200.0, 0.0], [0.0, 100.0]]",
            "covariance = [[200.0, 300.0], [300.0, 100.0]]",
        ),
        ("seed = 1", "seed = 1\nbogus = 3"),
    ] {
        let err = Config::from_toml_str(&text.replace(from, to)).unwrap_err();
        assert!(err.is_config(), "{from} -> {to}: {err}");
    }
    assert!(Config::load("/nonexistent/skylink.toml")
        .unwrap_err()
        .is_config());
}

#[test]
fn zero_covariance_component_is_a_point_mass() {
    let mut cfg = small();
    cfg.mixture.truncate(1);
    cfg.mixture[0].covariance = [[0.0, 0.0], [0.0, 0.0]];
    cfg.clusters = 1;
    let sim = Simulation::new(cfg.clone(), RunOptions::default()).unwrap();
    assert!(sim
        .state()
        .msds
        .iter()
        .all(|d| d.position == cfg.mixture[0].mean));
}

#[test]
fn csv_and_json_round_trip() {
    let mut cfg = small();
    cfg.failure_events.push(FailureEvent {
        time: 0.5,
        fraction: 0.25,
    });
    cfg.run.recovery_window = 0.2;
    let out = run(&cfg).unwrap();
    let csv = out.metrics_csv().unwrap();
    assert!(csv.starts_with("t,coverage,fiedler,info_penetration,alive_maps\n"));
    let back: Vec<Record> = records_from_csv(&csv).unwrap();
    assert_eq!(back, out.records);
    assert_eq!(records_to_csv(&back).unwrap(), csv);

    let doc = Output::from_json(&out.to_json().unwrap()).unwrap();
    assert_eq!(doc.snapshots, out.snapshots);
    assert_eq!(doc.recovery, out.recovery);
    assert_eq!(doc.config, out.config);
    assert_eq!(doc.seed, cfg.seed);
    for s in &doc.snapshots {
        assert_eq!(s.maps.len(), cfg.map_count);
        assert_eq!(s.msds.len(), cfg.msd_count);
        assert_eq!(s.cluster_centers.len(), cfg.clusters);
    }
}

#[test]
fn runtime_errors_carry_their_step() {
    let mut cfg = small();
    cfg.clusters = 1;
    cfg.goal_gain = 1e300;
    let err = run(&cfg).unwrap_err();
    assert!(matches!(err, Error::Step { .. }), "{err}");
    assert!(!err.is_config());
}

#[test]
fn sweeps_report_one_point_per_value() {
    let cfg = small();
    let points = sweep(&cfg, "L".parse().unwrap(), &[4.0, 8.0]).unwrap();
    assert_eq!(points.len(), 2);
    assert_eq!(points[0].result.alive_maps, 4);
    assert_eq!(points[1].result.alive_maps, 8);
    assert!(sweep(&cfg, SweepParam::FailureFraction, &[0.1])
        .unwrap_err()
        .is_config());
    assert!("altitude".parse::<SweepParam>().unwrap_err().is_config());
    assert!(sweep(&cfg, SweepParam::MapCount, &[2.5])
        .unwrap_err()
        .is_config());
}

#[test]
fn single_precision_runs() {
    let mut cfg = Config32::table_one();
    cfg.msd_count = 200;
    cfg.map_count = 10;
    cfg.horizon = 0.5;
    let out = run(&cfg).unwrap();
    let last = out.records.last().unwrap();
    assert!(last.coverage.is_finite() && last.fiedler >= 0.0 && last.info_penetration.is_finite());
}

#[test]
fn render_draws_every_entity() {
    let cfg = small();
    let out = run(&cfg).unwrap();
    let snap = out.snapshots.last().unwrap();
    let svg = render_svg(snap, &cfg).unwrap();
    assert!(svg.starts_with("<svg") || svg.starts_with("<?xml"));
    assert!(svg.trim_end().ends_with("</svg>"));
    let alive = snap.maps.iter().filter(|m| m.alive).count();
    assert_eq!(svg.matches("fill=\"#d9534f\"/>").count(), alive);
    assert!(svg.matches("<circle").count() >= cfg.msd_count);
}
