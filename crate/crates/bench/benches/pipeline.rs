use std::f64::consts::TAU;
use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};

use swimlab_bench::{plane_cloud, triangle_scene};
use swimlab_core::lockin::{demodulate, settle_samples, LockInConfig};
use swimlab_core::render::{animate, rasterize};
use swimlab_core::scan::{acquire_lockin, linear_path};
use swimlab_core::wavecore::baseband_field_at;
use swimlab_core::Vec3;

fn field(c: &mut Criterion) {
    let scene = triangle_scene();
    let points: Vec<Vec3> = (0..1000).map(|i| Vec3::new(i as f64 * 1e-4, 0.02, 0.05)).collect();
    let mut g = c.benchmark_group("field");
    g.throughput(Throughput::Elements(points.len() as u64));
    g.bench_function("baseband_1000_points", |b| {
        b.iter(|| points.iter().map(|&p| baseband_field_at(&scene, black_box(p)).unwrap().re).sum::<f64>())
    });
    g.finish();
}

fn lockin(c: &mut Criterion) {
    let mut g = c.benchmark_group("lockin");
    for tau in [1e-3, 5e-3] {
        let cfg = LockInConfig::new(5000.0, 100_000.0, tau).unwrap();
        let n = settle_samples(&cfg) + 1;
        let x: Vec<f64> = (0..n).map(|k| (TAU * 5000.0 * k as f64 / 100_000.0 + 0.3).cos()).collect();
        g.throughput(Throughput::Elements(n as u64));
        g.bench_with_input(BenchmarkId::new("demodulate", n), &x, |b, x| {
            b.iter(|| demodulate(black_box(x), &cfg).unwrap())
        });
    }
    let scene = triangle_scene();
    let cfg = LockInConfig::new(40_000.0, 400_000.0, 2.5e-4).unwrap();
    let path = linear_path(Vec3::new(-0.1, 0.0, 0.05), Vec3::new(0.1, 0.0, 0.05), 200, cfg.min_dwell()).unwrap();
    g.throughput(Throughput::Elements(path.len() as u64));
    g.bench_function("acquire_200_poses", |b| b.iter(|| acquire_lockin(&scene, &path, &cfg).unwrap()));
    g.finish();
}

fn render(c: &mut Criterion) {
    let mut g = c.benchmark_group("render");
    for n in [100usize, 300] {
        let (cloud, cfg) = plane_cloud(n);
        g.throughput(Throughput::Elements(cloud.len() as u64));
        g.bench_with_input(BenchmarkId::new("rasterize", n), &cloud, |b, cloud| {
            b.iter(|| rasterize(cloud, &cfg).unwrap())
        });
    }
    let (cloud, cfg) = plane_cloud(100);
    g.bench_function("animate_12_frames_100", |b| b.iter(|| animate(&cloud, &cfg, 12, TAU / 12.0).unwrap()));
    g.finish();
}

criterion_group!(benches, field, lockin, render);
criterion_main!(benches);
