//! Fixtures shared by the swimlab benchmarks.

use std::f64::consts::TAU;

use swimlab_core::scan::{acquire_ideal, raster_path};
use swimlab_core::{Extent, FieldCloud, Medium, Plane, RenderConfig, Scene, Source, Vec3};

/// Three transducers on a 10 cm triangle at 40 kHz in air.
pub fn triangle_scene() -> Scene {
    let sources = (0..3)
        .map(|i| {
            let a = TAU * i as f64 / 3.0;
            let r = 0.1 / 3f64.sqrt();
            Source::new(Vec3::new(r * a.cos(), r * a.sin(), 0.0), 1.0, a, 40_000.0)
        })
        .collect();
    Scene::new(sources, Medium::with_speed(343.0).unwrap(), 0.0, 0).unwrap()
}

/// `n x n` ideal scan of the plane `z = 0.05` and a matching render config.
pub fn plane_cloud(n: usize) -> (FieldCloud, RenderConfig) {
    let path = raster_path(Vec3::new(-0.1, -0.1, 0.05), Vec3::new(0.1, 0.1, 0.05), [n, n, 1], 0.01).unwrap();
    let cloud = acquire_ideal(&triangle_scene(), &path).unwrap();
    let cfg = RenderConfig::new(n as u32, n as u32, Plane::Xy, Extent::new(-0.1, 0.1, -0.1, 0.1));
    (cloud, cfg)
}
