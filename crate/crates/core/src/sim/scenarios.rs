//! Bundled scenario definitions and the seeded random-world generator.

use super::scenario::{AnyScenario, Params, Scenario};
use crate::geometry::{hull_distance, ConvexObstacle, Point};
use crate::pathfind::plan_path;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

fn p2(x: f64, y: f64) -> Point<2> {
    Point::<2>::new(x, y)
}

fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> ConvexObstacle<2> {
    ConvexObstacle::new(vec![p2(x0, y0), p2(x1, y0), p2(x1, y1), p2(x0, y1)])
        .expect("axis-aligned rectangle")
}

/// Single robot through an L-shaped passage, 1.4 m wide.
pub fn l_passage() -> Scenario<2> {
    let obstacles = vec![
        rect(-5.5, -1.2, 1.2, -0.7),  // below the horizontal leg
        rect(-5.5, 0.7, -0.7, 1.2),   // above it, left of the turn
        rect(-1.2, 1.2, -0.7, 5.5),   // left of the vertical leg
        rect(0.7, -0.7, 1.2, 5.5),    // right wall
    ];
    Scenario::new(
        "l_passage",
        20.0,
        Params::default(),
        obstacles,
        vec![(p2(-4.5, 0.0), p2(0.0, 4.5))],
    )
    .expect("bundled scenario")
}

/// Eight robots swapping sides through the 1.4 m bottleneck of an
/// H-shaped map — the deadlock stress test.
pub fn h_passage() -> Scenario<2> {
    let obstacles = vec![
        rect(-1.5, 0.9, 1.5, 4.5),   // upper middle block
        rect(-1.5, -4.5, 1.5, -0.9), // lower middle block
    ];
    let ys = [-3.0, -1.0, 1.0, 3.0];
    let mut robots = Vec::new();
    for &y in &ys {
        robots.push((p2(-4.0, y), p2(4.0, -y)));
    }
    for &y in &ys {
        robots.push((p2(4.0, y), p2(-4.0, -y)));
    }
    Scenario::new("h_passage", 60.0, Params::default(), obstacles, robots)
        .expect("bundled scenario")
}

/// Six robots crossing through the top passage of an n-shaped map.
pub fn n_passage() -> Scenario<2> {
    let obstacles = vec![
        rect(-2.4, -5.0, 2.4, 1.2),  // central block
        rect(-4.7, -5.0, -4.2, 3.5), // left outer wall
        rect(4.2, -5.0, 4.7, 3.5),   // right outer wall
        rect(-4.7, 3.0, 4.7, 3.5),   // top wall
    ];
    let ys = [-4.4, -3.2, -2.0];
    let mut robots = Vec::new();
    for &y in &ys {
        robots.push((p2(-3.3, y), p2(3.3, y)));
    }
    for &y in &ys {
        robots.push((p2(3.3, y), p2(-3.3, y)));
    }
    Scenario::new("n_passage", 60.0, Params::default(), obstacles, robots)
        .expect("bundled scenario")
}

/// Eight robots crossing a randomized convex-obstacle field (fixed seed).
pub fn forest() -> Scenario<2> {
    forest_seeded(7)
}

pub fn forest_seeded(seed: u64) -> Scenario<2> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let radius = 6.4;
    let n_robots = 8;
    let robots: Vec<(Point<2>, Point<2>)> = (0..n_robots)
        .map(|i| {
            let ang = std::f64::consts::TAU * i as f64 / n_robots as f64;
            let start = p2(radius * ang.cos(), radius * ang.sin());
            (start, -start)
        })
        .collect();
    let keep_outs: Vec<Point<2>> = robots.iter().flat_map(|(s, t)| [*s, *t]).collect();
    let mut obstacles = Vec::new();
    let mut centers: Vec<Point<2>> = Vec::new();
    while obstacles.len() < 10 {
        let c = p2(rng.random_range(-4.2..4.2), rng.random_range(-4.2..4.2));
        if centers.iter().any(|e| (e - c).norm() < 2.0) {
            continue;
        }
        let verts: Vec<Point<2>> = (0..7)
            .map(|_| {
                let ang = rng.random_range(0.0..std::f64::consts::TAU);
                let rad = rng.random_range(0.3..0.75);
                c + p2(rad * ang.cos(), rad * ang.sin())
            })
            .collect();
        let Ok(obs) = ConvexObstacle::new(verts) else { continue };
        if keep_outs
            .iter()
            .any(|p| hull_distance(std::slice::from_ref(p), obs.vertices()) < 0.6)
        {
            continue;
        }
        centers.push(c);
        obstacles.push(obs);
    }
    Scenario::new(format!("forest_{seed}"), 40.0, Params::default(), obstacles, robots)
        .expect("bundled scenario")
}

/// Four robots swapping corners inside a walled room with interior
/// obstacles.
pub fn polygon_room() -> Scenario<2> {
    let obstacles = vec![
        rect(-4.5, 4.0, 4.5, 4.5),
        rect(-4.5, -4.5, 4.5, -4.0),
        rect(-4.5, -4.0, -4.0, 4.0),
        rect(4.0, -4.0, 4.5, 4.0),
        ConvexObstacle::new(vec![
            p2(-1.6, -0.6),
            p2(-0.5, -1.1),
            p2(0.2, -0.3),
            p2(-0.4, 0.8),
            p2(-1.5, 0.5),
        ])
        .expect("interior polygon"),
        ConvexObstacle::new(vec![p2(1.4, 1.0), p2(2.6, 1.3), p2(2.3, 2.4), p2(1.2, 2.1)])
            .expect("interior polygon"),
    ];
    let corners = [p2(-3.0, -3.0), p2(3.0, -3.0), p2(3.0, 3.0), p2(-3.0, 3.0)];
    let robots: Vec<(Point<2>, Point<2>)> =
        (0..4).map(|i| (corners[i], corners[(i + 2) % 4])).collect();
    Scenario::new("polygon_room", 40.0, Params::default(), obstacles, robots)
        .expect("bundled scenario")
}

/// Eight robots in 3D crossing through and around a 0.6 m cubic frame,
/// with the ellipsoidal inter-robot scaling of small quadrotors.
pub fn cube_frame() -> Scenario<3> {
    let params = Params {
        r_min: 0.24,
        r_a: 0.12,
        v_max: 1.0,
        a_max: 2.0,
        ellipsoid: Some(vec![1.0, 1.0, 0.24 / 0.6]),
        ..Params::default()
    };
    let half = 0.3;
    let t = 0.025; // beam half-thickness
    let mut obstacles = Vec::new();
    let beam = |ax: usize, c1: f64, c2: f64| -> ConvexObstacle<3> {
        // A box spanning the cube edge along axis `ax`, centered at the
        // two fixed coordinates (c1, c2) of the remaining axes.
        let mut verts = Vec::new();
        for s0 in [-(half + t), half + t] {
            for s1 in [c1 - t, c1 + t] {
                for s2 in [c2 - t, c2 + t] {
                    let mut v = [0.0; 3];
                    v[ax] = s0;
                    v[(ax + 1) % 3] = s1;
                    v[(ax + 2) % 3] = s2;
                    verts.push(Point::<3>::from_column_slice(&v));
                }
            }
        }
        ConvexObstacle::new(verts).expect("beam box")
    };
    for ax in 0..3 {
        for s1 in [-half, half] {
            for s2 in [-half, half] {
                obstacles.push(beam(ax, s1, s2));
            }
        }
    }
    let n_robots = 8;
    let radius = 2.2;
    let robots: Vec<(Point<3>, Point<3>)> = (0..n_robots)
        .map(|i| {
            let ang = std::f64::consts::TAU * i as f64 / n_robots as f64;
            let start = Point::<3>::new(radius * ang.cos(), radius * ang.sin(), 0.0);
            (start, -start)
        })
        .collect();
    Scenario::new("cube_frame", 40.0, params, obstacles, robots).expect("bundled scenario")
}

/// All bundled scenarios, in a stable order.
pub fn bundled() -> Vec<AnyScenario> {
    vec![
        AnyScenario::D2(l_passage()),
        AnyScenario::D2(forest()),
        AnyScenario::D2(h_passage()),
        AnyScenario::D2(n_passage()),
        AnyScenario::D2(polygon_room()),
        AnyScenario::D3(cube_frame()),
    ]
}

/// Seeded random 2D world: 4-8 robots on a ring crossing a field of 5-15
/// random convex obstacles. Worlds where some robot has no path to its
/// target are rejected and retried deterministically.
pub fn random_2d(seed: u64) -> Scenario<2> {
    for attempt in 0..64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9e37_79b9).wrapping_add(attempt));
        if let Some(sc) = try_random_2d(seed, &mut rng) {
            return sc;
        }
    }
    panic!("random scenario generation failed for seed {seed}");
}

fn try_random_2d(seed: u64, rng: &mut ChaCha8Rng) -> Option<Scenario<2>> {
    let params = Params::default();
    let n_robots = rng.random_range(4..=8);
    let n_obstacles = rng.random_range(5..=15);
    let ring = 5.5;
    let phase = rng.random_range(0.0..std::f64::consts::TAU);
    let robots: Vec<(Point<2>, Point<2>)> = (0..n_robots)
        .map(|i| {
            let ang = phase + std::f64::consts::TAU * i as f64 / n_robots as f64;
            let start = p2(ring * ang.cos(), ring * ang.sin());
            (start, -start)
        })
        .collect();
    let keep_outs: Vec<Point<2>> = robots.iter().flat_map(|(s, t)| [*s, *t]).collect();

    let mut obstacles: Vec<ConvexObstacle<2>> = Vec::new();
    let mut tries = 0;
    while obstacles.len() < n_obstacles {
        tries += 1;
        if tries > 400 {
            return None;
        }
        let c = p2(rng.random_range(-4.0..4.0), rng.random_range(-4.0..4.0));
        let verts: Vec<Point<2>> = (0..rng.random_range(4..9))
            .map(|_| {
                let ang = rng.random_range(0.0..std::f64::consts::TAU);
                let rad = rng.random_range(0.3..0.8);
                c + p2(rad * ang.cos(), rad * ang.sin())
            })
            .collect();
        let Ok(obs) = ConvexObstacle::new(verts) else { continue };
        if keep_outs
            .iter()
            .any(|p| hull_distance(std::slice::from_ref(p), obs.vertices()) < params.r_a + 0.25)
        {
            continue;
        }
        obstacles.push(obs);
    }
    // Every robot must actually be able to reach its target.
    for (start, target) in &robots {
        plan_path(*start, *target, &obstacles, params.r_a).ok()?;
    }
    Scenario::new(format!("random_{seed}"), 30.0, params, obstacles, robots).ok()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_scenarios_validate() {
        // Construction itself validates; touch each one.
        assert_eq!(bundled().len(), 6);
    }

    #[test]
    fn forest_is_reproducible() {
        let a = forest_seeded(7);
        let b = forest_seeded(7);
        assert_eq!(a, b);
        assert_eq!(a.obstacles.len(), 10);
    }

    #[test]
    fn random_worlds_are_reproducible_and_valid() {
        for seed in 0..5 {
            let a = random_2d(seed);
            let b = random_2d(seed);
            assert_eq!(a, b);
            assert!(a.robots.len() >= 4 && a.robots.len() <= 8);
            assert!(a.obstacles.len() >= 5 && a.obstacles.len() <= 15);
        }
    }
}
