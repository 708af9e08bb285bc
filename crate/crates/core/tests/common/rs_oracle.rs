//! Independent Reeds-Shepp length oracle.
//!
//! Every optimal word has at most five pieces and exactly three free
//! parameters (the remaining pieces are either tied to another parameter or
//! fixed to a quarter turn). For each word family and every sign pattern of
//! the tied pieces we solve the three endpoint equations by damped Newton
//! iteration from a grid of seeds and keep the shortest converged solution.
//! Nothing here shares code with the closed-form solver.

use locomanip::se2::{normalize_angle, Pose2};
use std::f64::consts::FRAC_PI_2;

#[derive(Clone, Copy)]
enum K {
    L,
    R,
    S,
}

#[derive(Clone, Copy)]
enum P {
    Free(usize),
    /// `sign * free[i]`
    Tied(usize, f64),
    Fixed(f64),
}

struct Family {
    kinds: Vec<K>,
    params: Vec<P>,
}

fn families() -> Vec<Family> {
    use K::*;
    use P::*;
    let mut out = Vec::new();
    let three = |k: [K; 3]| Family {
        kinds: k.to_vec(),
        params: vec![Free(0), Free(1), Free(2)],
    };
    for k in [
        [L, S, L],
        [L, S, R],
        [R, S, L],
        [R, S, R],
        [L, R, L],
        [R, L, R],
    ] {
        out.push(three(k));
    }
    for k in [[L, R, L, R], [R, L, R, L]] {
        for sign in [1.0, -1.0] {
            out.push(Family {
                kinds: k.to_vec(),
                params: vec![Free(0), Free(1), Tied(1, sign), Free(2)],
            });
        }
    }
    for k in [[L, R, S, L], [L, R, S, R], [R, L, S, R], [R, L, S, L]] {
        for q in [FRAC_PI_2, -FRAC_PI_2] {
            out.push(Family {
                kinds: k.to_vec(),
                params: vec![Free(0), Fixed(q), Free(1), Free(2)],
            });
        }
    }
    for k in [[L, S, R, L], [L, S, L, R], [R, S, L, R], [R, S, R, L]] {
        for q in [FRAC_PI_2, -FRAC_PI_2] {
            out.push(Family {
                kinds: k.to_vec(),
                params: vec![Free(0), Free(1), Fixed(q), Free(2)],
            });
        }
    }
    for k in [[L, R, S, L, R], [R, L, S, R, L]] {
        for q1 in [FRAC_PI_2, -FRAC_PI_2] {
            for q2 in [FRAC_PI_2, -FRAC_PI_2] {
                out.push(Family {
                    kinds: k.to_vec(),
                    params: vec![Free(0), Fixed(q1), Free(1), Fixed(q2), Free(2)],
                });
            }
        }
    }
    out
}

fn lengths(f: &Family, free: &[f64; 3]) -> [f64; 5] {
    let mut out = [0.0; 5];
    for (o, p) in out.iter_mut().zip(&f.params) {
        *o = match *p {
            P::Free(i) => free[i],
            P::Tied(i, s) => s * free[i],
            P::Fixed(q) => q,
        };
    }
    out
}

/// Unit-radius forward kinematics, kept independent of the library's tracing code.
fn endpoint(f: &Family, free: &[f64; 3]) -> (f64, f64, f64) {
    let lens = lengths(f, free);
    let (mut x, mut y, mut th) = (0.0f64, 0.0f64, 0.0f64);
    for (k, &v) in f.kinds.iter().zip(lens.iter()) {
        match k {
            K::S => {
                x += v * th.cos();
                y += v * th.sin();
            }
            K::L => {
                x += (th + v).sin() - th.sin();
                y += th.cos() - (th + v).cos();
                th += v;
            }
            K::R => {
                x += th.sin() - (th - v).sin();
                y += (th - v).cos() - th.cos();
                th -= v;
            }
        }
    }
    (x, y, th)
}

fn residual(f: &Family, free: &[f64; 3], goal: (f64, f64, f64)) -> [f64; 3] {
    let (x, y, th) = endpoint(f, free);
    [x - goal.0, y - goal.1, normalize_angle(th - goal.2)]
}

fn norm(r: &[f64; 3]) -> f64 {
    (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt()
}

fn solve3(j: &[[f64; 3]; 3], b: &[f64; 3]) -> Option<[f64; 3]> {
    let det = j[0][0] * (j[1][1] * j[2][2] - j[1][2] * j[2][1])
        - j[0][1] * (j[1][0] * j[2][2] - j[1][2] * j[2][0])
        + j[0][2] * (j[1][0] * j[2][1] - j[1][1] * j[2][0]);
    if det.abs() < 1e-14 {
        return None;
    }
    let mut out = [0.0; 3];
    for (c, o) in out.iter_mut().enumerate() {
        let mut m = *j;
        for r in 0..3 {
            m[r][c] = b[r];
        }
        *o = (m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]))
            / det;
    }
    Some(out)
}

fn newton(f: &Family, seed: [f64; 3], goal: (f64, f64, f64)) -> Option<[f64; 3]> {
    let mut p = seed;
    let mut r = residual(f, &p, goal);
    for _ in 0..60 {
        let n = norm(&r);
        if n < 1e-13 {
            return Some(p);
        }
        let h = 1e-7;
        let mut jac = [[0.0; 3]; 3];
        for c in 0..3 {
            let mut a = p;
            let mut b = p;
            a[c] += h;
            b[c] -= h;
            let ra = residual(f, &a, goal);
            let rb = residual(f, &b, goal);
            for row in 0..3 {
                jac[row][c] = (ra[row] - rb[row]) / (2.0 * h);
            }
        }
        let step = solve3(&jac, &r)?;
        let mut t = 1.0;
        loop {
            let cand = [p[0] - t * step[0], p[1] - t * step[1], p[2] - t * step[2]];
            let rc = residual(f, &cand, goal);
            if norm(&rc) < n {
                p = cand;
                r = rc;
                break;
            }
            t *= 0.5;
            if t < 1e-6 {
                return None;
            }
        }
    }
    (norm(&r) < 1e-10).then_some(p)
}

/// Shortest Reeds-Shepp length found by seeded root finding over all word families.
pub fn rs_oracle_length(start: &Pose2, goal: &Pose2, radius: f64) -> f64 {
    let rel = start.inverse().compose(goal);
    let g = (rel.x / radius, rel.y / radius, rel.yaw);
    if g.0.abs() < 1e-15 && g.1.abs() < 1e-15 && g.2.abs() < 1e-15 {
        return 0.0;
    }
    let reach = (g.0.hypot(g.1) + 4.0).max(4.0);
    let angle_seeds = [-2.6, -1.3, -0.4, 0.4, 1.3, 2.6];
    let straight_seeds = [-reach, -0.5 * reach, -0.5, 0.5, 0.5 * reach, reach];
    let mut best = f64::INFINITY;
    for fam in families() {
        let seeds_for = |i: usize| -> &[f64] {
            let pos = fam
                .params
                .iter()
                .position(|p| matches!(p, P::Free(j) if *j == i))
                .unwrap();
            if matches!(fam.kinds[pos], K::S) {
                &straight_seeds
            } else {
                &angle_seeds
            }
        };
        for &a in seeds_for(0) {
            for &b in seeds_for(1) {
                for &c in seeds_for(2) {
                    if let Some(p) = newton(&fam, [a, b, c], g) {
                        let l: f64 = lengths(&fam, &p).iter().map(|v| v.abs()).sum();
                        best = best.min(l);
                    }
                }
            }
        }
    }
    best * radius
}
