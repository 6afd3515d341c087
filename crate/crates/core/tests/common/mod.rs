#![allow(dead_code)]

use std::collections::BTreeMap;

use msgeo::exterior::{pullback, Vector};
use msgeo::field::{self, euler_lagrange, FieldTheoryProblem, JetSpace};
use msgeo::multisymplectic::{model_space, ModelSpace, MultisymplecticSpace, Subspace};
use msgeo::symbolic::{Poly, VarName};
use msgeo::{Matrix, Scalar};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Random invertible integer matrix as `L * U` with unit diagonals and a
/// random permutation of rows.
pub fn random_invertible(rng: &mut ChaCha8Rng, n: usize) -> Matrix {
    let mut l = Matrix::identity(n);
    let mut u = Matrix::identity(n);
    for i in 0..n {
        for j in 0..n {
            let x = Scalar::from_int(rng.gen_range(-2..=2));
            if i > j {
                l[(i, j)] = x;
            } else if i < j {
                u[(i, j)] = x;
            }
        }
    }
    let mut perm: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        perm.swap(i, rng.gen_range(0..=i));
    }
    let p = Matrix::from_rows(perm.iter().map(|&i| Matrix::identity(n).row(i).to_vec()).collect());
    &p * &(&l * &u)
}

pub fn random_vector(rng: &mut ChaCha8Rng, n: usize) -> Vector {
    Vector((0..n).map(|_| Scalar::from_int(rng.gen_range(-3..=3))).collect())
}

pub fn random_subspace(rng: &mut ChaCha8Rng, n: usize, d: usize) -> Subspace {
    let vs: Vec<Vector> = (0..d).map(|_| random_vector(rng, n)).collect();
    Subspace::span(n, &vs)
}

/// Image of a subspace under a linear map.
pub fn image(a: &Matrix, w: &Subspace) -> Subspace {
    let vs: Vec<Vector> = w.basis().iter().map(|v| Vector(a.apply(&v.0))).collect();
    Subspace::span(a.rows(), &vs)
}

/// Vertical subspace spanned by the last `n0 - k` coordinates (the first
/// `max(1, n0 - k)` when that would be empty).
pub fn vertical(n0: usize, k: usize) -> Subspace {
    let e = n0.saturating_sub(k).max(1);
    Subspace::coordinate(n0, &(n0 - e + 1..=n0).collect::<Vec<_>>())
}

/// Model with `r in {0, 2}`; `r = 2` uses [`vertical`] as `E`.
pub fn model(n0: usize, k: usize, r: usize) -> (ModelSpace, MultisymplecticSpace) {
    if r == 0 {
        model_space(n0, k, 0, None).unwrap()
    } else {
        model_space(n0, k, r, Some(&vertical(n0, k))).unwrap()
    }
}

/// `(A^* Omega, A^{-1} W, A^{-1} E_lift)` for a model.
pub struct Scrambled {
    pub space: MultisymplecticSpace,
    pub w: Subspace,
    pub e: Subspace,
    pub a: Matrix,
}

pub fn scramble(m: &ModelSpace, s: &MultisymplecticSpace, a: Matrix) -> Scrambled {
    let ainv = a.inverse().expect("invertible");
    let omega = pullback(&a, s.omega()).unwrap();
    let e_lift: Vec<Vector> = m
        .horizontal
        .basis()
        .iter()
        .map(|v| {
            let mut x = v.0.clone();
            x.resize(m.dim(), Scalar::zero());
            Vector(x)
        })
        .collect();
    let e = Subspace::span(m.dim(), &e_lift);
    Scrambled {
        space: MultisymplecticSpace::new(omega).unwrap(),
        w: image(&ainv, &m.form_subspace()),
        e: image(&ainv, &e),
        a,
    }
}

/// Random monomial-sum polynomial of total degree `1..=max_deg` in `vars`.
pub fn random_poly(rng: &mut ChaCha8Rng, vars: &[VarName], terms: usize, max_deg: usize) -> Poly {
    let mut out = Poly::zero();
    for _ in 0..terms {
        let deg = rng.gen_range(1..=max_deg);
        let mut t = Poly::constant(Scalar::new(rng.gen_range(-3..=3), rng.gen_range(1..=2)));
        for _ in 0..deg {
            t = t.mul(&Poly::var(vars[rng.gen_range(0..vars.len())].clone()));
        }
        out = out.add(&t);
    }
    out
}

/// Random polynomial lagrangian of degree `<= 3` with a nontrivial
/// Euler-Lagrange system.
pub fn random_lagrangian(rng: &mut ChaCha8Rng, n: usize, m: usize) -> FieldTheoryProblem {
    let vars = JetSpace::FirstJet.coordinates(n, m);
    loop {
        let terms = rng.gen_range(3..=6);
        let l = random_poly(rng, &vars, terms, 3);
        let p = FieldTheoryProblem::new(n, m, l.to_expr(), BTreeMap::new()).unwrap();
        if !euler_lagrange(&p).polys().iter().any(Poly::is_zero) {
            return p;
        }
    }
}

/// `1/2 z^T A z + c(x, y) . z + V(x, y)` with `A` symmetric and strictly
/// diagonally dominant (so well conditioned and invertible).
pub fn random_quadratic_lagrangian(rng: &mut ChaCha8Rng, n: usize, m: usize) -> FieldTheoryProblem {
    let zs = field::z_vars(n, m);
    let d = zs.len();
    let mut a = Matrix::zeros(d, d);
    for r in 0..d {
        a[(r, r)] = Scalar::from_int(rng.gen_range(1..=3) * if rng.gen_bool(0.5) { 1 } else { -1 });
        for c in r + 1..d {
            let off = Scalar::new(rng.gen_range(-1..=1), 4);
            a[(r, c)] = off.clone();
            a[(c, r)] = off;
        }
    }
    let mut base = field::x_vars(n);
    base.extend(field::y_vars(m));
    let mut l = random_poly(rng, &base, 3, 3);
    let half = Scalar::new(1, 2);
    for r in 0..d {
        for c in 0..d {
            let term = Poly::var(zs[r].clone())
                .mul(&Poly::var(zs[c].clone()))
                .scale(&(&a[(r, c)] * &half));
            l = l.add(&term);
        }
        l = l.add(&random_poly(rng, &base, 1, 1).mul(&Poly::var(zs[r].clone())));
    }
    FieldTheoryProblem::new(n, m, l.to_expr(), BTreeMap::new()).unwrap()
}

/// Result of comparing a discrete action gradient with the symbolic
/// Euler-Lagrange expressions.
#[derive(Debug, Clone, Copy)]
pub struct OracleStats {
    pub compared: usize,
    pub within: usize,
    pub worst: f64,
}

impl OracleStats {
    pub fn fraction(&self) -> f64 {
        self.within as f64 / self.compared as f64
    }
}

/// Random polynomial section of degree `<= 3`, one polynomial in `x` per
/// field component.
pub fn random_section(rng: &mut ChaCha8Rng, n: usize, m: usize) -> Vec<Poly> {
    let xs = field::x_vars(n);
    (0..m)
        .map(|_| {
            let c = Scalar::new(rng.gen_range(-4..=4), 8);
            random_poly(rng, &xs, 3, 3)
                .scale(&Scalar::new(1, 4))
                .add(&Poly::constant(c))
        })
        .collect()
}

/// Discrete action `sum_k L(x_k, y_k, grad_h y_k) h^n` on a `grid^n` mesh of
/// `[0, 1]^n` with the fourth-order central difference; its gradient with
/// respect to nodal values, divided by `h^n`, against the Euler-Lagrange
/// expressions on the exact jets of `section`.
pub fn el_oracle(p: &FieldTheoryProblem, section: &[Poly], grid: usize, rel_tol: f64) -> OracleStats {
    let (n, m) = (p.n, p.m);
    let h = 1.0 / (grid - 1) as f64;
    let l = p.numeric_lagrangian();
    let el = euler_lagrange(p).polys();
    let node_count = grid.pow(n as u32);
    let idx = |k: usize| -> Vec<usize> { (0..n).map(|a| (k / grid.pow(a as u32)) % grid).collect() };
    let flat = |ix: &[usize]| -> usize { ix.iter().enumerate().map(|(a, &v)| v * grid.pow(a as u32)).sum() };
    let coords = |ix: &[usize]| -> Vec<f64> { ix.iter().map(|&v| v as f64 * h).collect() };
    let eval_x = |e: &Poly, x: &[f64]| {
        e.eval_f64(&|v| if let VarName::X(mu) = v { Some(x[mu - 1]) } else { None })
            .unwrap()
    };

    let mut values: Vec<Vec<f64>> = (0..node_count)
        .map(|k| section.iter().map(|s| eval_x(s, &coords(&idx(k)))).collect())
        .collect();
    let in_action = |ix: &[usize]| ix.iter().all(|&v| v >= 2 && v + 2 < grid);
    let local_l = |values: &Vec<Vec<f64>>, ix: &[usize]| -> f64 {
        let x = coords(ix);
        let at = |shift: &dyn Fn(&mut Vec<usize>)| {
            let mut j = ix.to_vec();
            shift(&mut j);
            flat(&j)
        };
        let mut pt: BTreeMap<VarName, f64> = BTreeMap::new();
        for mu in 0..n {
            pt.insert(VarName::X(mu + 1), x[mu]);
            for i in 0..m {
                let v = |s: i64| values[at(&|j: &mut Vec<usize>| j[mu] = (j[mu] as i64 + s) as usize)][i];
                let d = (-v(2) + 8.0 * v(1) - 8.0 * v(-1) + v(-2)) / (12.0 * h);
                pt.insert(VarName::Z(i + 1, mu + 1), d);
            }
        }
        for i in 0..m {
            pt.insert(VarName::Y(i + 1), values[flat(ix)][i]);
        }
        l.eval_f64(&|v| pt.get(v).copied()).unwrap()
    };
    let neighbourhood = |ix: &[usize]| -> Vec<Vec<usize>> {
        let mut out = vec![ix.to_vec()];
        for mu in 0..n {
            for s in [-2i64, -1, 1, 2] {
                let mut j = ix.to_vec();
                j[mu] = (j[mu] as i64 + s) as usize;
                if in_action(&j) {
                    out.push(j);
                }
            }
        }
        out
    };

    let mut stats = OracleStats {
        compared: 0,
        within: 0,
        worst: 0.0,
    };
    let eps = 1e-2;
    for k in 0..node_count {
        let ix = idx(k);
        if !ix.iter().all(|&v| v >= 4 && v + 4 < grid) {
            continue;
        }
        let near = neighbourhood(&ix);
        let x = coords(&ix);
        let mut jet: BTreeMap<VarName, f64> = BTreeMap::new();
        for (mu, xv) in x.iter().enumerate() {
            jet.insert(VarName::X(mu + 1), *xv);
        }
        for (i, s) in section.iter().enumerate() {
            jet.insert(VarName::Y(i + 1), eval_x(s, &x));
            for mu in 1..=n {
                let d = s.diff(&VarName::X(mu));
                jet.insert(VarName::Z(i + 1, mu), eval_x(&d, &x));
                for nu in mu..=n {
                    jet.insert(VarName::z2(i + 1, mu, nu), eval_x(&d.diff(&VarName::X(nu)), &x));
                }
            }
        }
        for i in 0..m {
            let base = values[k][i];
            let mut action = |delta: f64| {
                values[k][i] = base + delta;
                let s: f64 = near.iter().map(|j| local_l(&values, j)).sum();
                values[k][i] = base;
                s
            };
            let grad = (action(-2.0 * eps) - 8.0 * action(-eps) + 8.0 * action(eps) - action(2.0 * eps)) / (12.0 * eps);
            let exact = el[i].eval_f64(&|v| jet.get(v).copied()).unwrap();
            let rel = (grad - exact).abs() / exact.abs();
            stats.compared += 1;
            if rel <= rel_tol {
                stats.within += 1;
            }
            if rel.is_finite() {
                stats.worst = stats.worst.max(rel);
            }
        }
    }
    stats
}
