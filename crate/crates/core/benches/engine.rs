use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use holotunnel::analytics::{analyze_path, AnalysisConfig, Space};
use holotunnel::arm::ArmGeometry;
use holotunnel::exec::ExecMode;
use holotunnel::feedback::{Command, HandSample, Session};
use holotunnel::geometry::{generate_exercise, ExerciseId, ExerciseParams, Vec3};
use holotunnel::labels::{Condition, SessionLabels};
use holotunnel::sim::{run_open_loop, SimConfig, SimRun};
use holotunnel::sweep::{run_sweep, SweepConfig};

fn small_sweep() -> SweepConfig {
    SweepConfig {
        subjects: 4,
        joint_space: false,
        ..SweepConfig::default()
    }
}

fn sweep(c: &mut Criterion) {
    let cfg = small_sweep();
    let mut g = c.benchmark_group("sweep");
    g.sample_size(10);
    for mode in [ExecMode::Sequential, ExecMode::Parallel] {
        g.bench_with_input(BenchmarkId::from_parameter(format!("{mode:?}")), &mode, |b, &mode| {
            b.iter(|| run_sweep(black_box(&cfg), mode).unwrap())
        });
    }
    g.finish();
}

fn batch_analytics(c: &mut Criterion) {
    let params = ExerciseParams::default();
    let runs: Vec<SimRun> = (0..32)
        .map(|k| {
            let id = ExerciseId::ALL[k % 4];
            let traj = generate_exercise(id, &params).unwrap();
            run_open_loop(&SimConfig::new(id, Condition::NoFeedback).with_seed(k as u64), &traj).unwrap()
        })
        .collect();
    let arm = ArmGeometry::default();
    let cfg = AnalysisConfig::default();
    let labels = SessionLabels::default();
    let mut g = c.benchmark_group("batch_analytics");
    g.sample_size(10);
    for space in [Space::EndEffector, Space::Joint] {
        for mode in [ExecMode::Sequential, ExecMode::Parallel] {
            let id = BenchmarkId::new(space.as_str(), format!("{mode:?}"));
            g.bench_with_input(id, &mode, |b, &mode| {
                b.iter(|| {
                    mode.map(&runs, |r| analyze_path(r.path(), &r.trajectory, space, &arm, &cfg, &labels).unwrap().err)
                })
            });
        }
    }
    g.finish();
}

fn process_sample(c: &mut Criterion) {
    let traj = generate_exercise(ExerciseId::T4, &ExerciseParams::default()).unwrap();
    let mut s = Session::default();
    for p in [Vec3::ZERO, Vec3::X, Vec3::Y] {
        s.apply_command(Command::Calibrate(p)).unwrap();
    }
    s.apply_command(Command::SelectTrajectory(traj.clone())).unwrap();
    s.apply_command(Command::Start).unwrap();
    let n = traj.via_points.len();
    let mut k = 0usize;
    c.bench_function("process_sample", |b| {
        b.iter(|| {
            k += 1;
            let p = traj.via_points[k % n] + Vec3::new(0.003, -0.002, 0.001);
            s.process_sample(black_box(HandSample::new(k as f64, p))).unwrap()
        })
    });
}

criterion_group!(benches, sweep, batch_analytics, process_sample);
criterion_main!(benches);
