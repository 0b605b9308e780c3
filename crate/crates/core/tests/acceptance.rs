//! Acceptance suite: one line per criterion, nonzero exit when any criterion fails.

use std::f64::consts::PI;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qholo::cauchy::{
    cauchy_derivative, cauchy_eval, laurent_components, quaternion_index, symbolic_derivative,
};
use qholo::crcheck::check_cr;
use qholo::crcheck::check_harmonic;
use qholo::elem::{arg, exp, exp_series, ln_principal};
use qholo::paths::line_integral;
use qholo::residues::{
    argument_principle_check, residue_closed_form, residue_numeric, residue_theorem_check,
    residue_word_reduction,
};
use qholo::roots::{directional_limits, find_root, RootOptions};
use qholo::words::{eliminate_conjugate, primitive, CFactor, CWord, ConjugatePhrase, Sym};
use qholo::{Circle, Factor, Path, Phrase, QuadOptions, Quaternion, Word, I, J, K, L, ZERO};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn rng(tag: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(0x5eed_0000 + tag)
}

fn rand_q(r: &mut ChaCha8Rng, scale: f64) -> Quaternion {
    Quaternion::new(
        r.gen_range(-scale..scale),
        r.gen_range(-scale..scale),
        r.gen_range(-scale..scale),
        r.gen_range(-scale..scale),
    )
}

fn rand_unit_imag(r: &mut ChaCha8Rng) -> Quaternion {
    loop {
        let q = rand_q(r, 1.0).imag();
        let n = q.norm();
        if n > 0.2 && n <= 1.0 {
            return q / n;
        }
    }
}

/// Point of the plane `a + span(1, m)` at polar offset `(rho, theta)` from `a`.
fn in_plane(a: Quaternion, m: Quaternion, rho: f64, theta: f64) -> Quaternion {
    a + (Quaternion::real(theta.cos()) + m * theta.sin()) * rho
}

fn bound(name: &str, value: f64, limit: f64) -> Result<(), String> {
    if value <= limit && value.is_finite() {
        Ok(())
    } else {
        Err(format!("{name} = {value:.3e} exceeds {limit:.0e}"))
    }
}

fn num<T>(r: qholo::Result<T>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn algebra() -> Outcome {
    let mut r = rng(1);
    let (mut mult, mut conj) = (0.0_f64, 0.0_f64);
    for _ in 0..10_000 {
        let (a, b) = (rand_q(&mut r, 3.0), rand_q(&mut r, 3.0));
        mult = mult.max(((a * b).norm() - a.norm() * b.norm()).abs() / (a.norm() * b.norm()));
        let p = a * a.conj();
        conj = conj.max((p - Quaternion::real(a.norm_sqr())).norm() / a.norm_sqr());
    }
    let table = [
        (J * J, -I),
        (K * K, -I),
        (L * L, -I),
        (J * K, L),
        (K * L, J),
        (L * J, K),
        (K * J, -L),
        (L * K, -J),
        (J * L, -K),
    ];
    if table.iter().any(|(x, y)| x != y) {
        return Err("basis table mismatch".into());
    }
    bound("|ab| - |a||b|", mult, 1e-12)?;
    bound("z conj(z) - |z|^2", conj, 1e-12)?;
    Ok(format!(
        "max rel err {:.1e}, {:.1e}; basis table exact",
        mult, conj
    ))
}

fn exponential() -> Outcome {
    let mut r = rng(2);
    let (mut series, mut modulus, mut period) = (0.0_f64, 0.0_f64, 0.0_f64);
    for _ in 0..1000 {
        let z = loop {
            let z = rand_q(&mut r, 3.0);
            if z.norm() <= 3.0 {
                break z;
            }
        };
        let e = exp(z);
        series = series.max((e - exp_series(z, 40)).norm() / e.norm());
        modulus = modulus.max((e.norm() - z.v.exp()).abs() / z.v.exp());
        let zi = z.imag();
        for n in 1..=3 {
            let shifted = zi * (1.0 + 2.0 * PI * n as f64 / zi.norm());
            period = period.max((exp(shifted) - exp(zi)).norm());
        }
    }
    bound("closed vs series", series, 1e-12)?;
    bound("|exp z| - e^v", modulus, 1e-12)?;
    bound("periodicity", period, 1e-10)?;
    Ok(format!(
        "series {series:.1e}, modulus {modulus:.1e}, periodicity {period:.1e}"
    ))
}

fn logarithm() -> Outcome {
    let mut r = rng(3);
    let mut worst = 0.0_f64;
    for i in 0..10_000 {
        let z = match i {
            0 => Quaternion::real(-2.0),
            1 => Quaternion::real(0.5),
            2 => Quaternion::new(0.0, 0.0, -1.0, 0.0),
            _ => rand_q(&mut r, 3.0),
        };
        let l = num(ln_principal(z))?;
        worst = worst.max((exp(l) - z).norm() / z.norm());
        let a = num(arg(z))?;
        if !a.satisfies_convention() || a.w_z < 0.0 || a.norm() >= 1.0 {
            return Err(format!("arg convention violated at {z}: {a:?}"));
        }
    }
    bound("exp(ln z) - z", worst, 1e-10)?;
    Ok(format!(
        "max rel err {worst:.1e}; conventions hold on all samples"
    ))
}

fn line_integral_inverse() -> Outcome {
    let mut r = rng(4);
    let f = Phrase::left_form(ZERO, &[(I, -1)]);
    let (mut worst, mut refinements) = (0.0_f64, 0usize);
    for _ in 0..5 {
        let m = rand_unit_imag(&mut r);
        for n in 1..=3 {
            let c = num(Circle::new(ZERO, 1.0, m, n as f64))?;
            let q = num(line_integral(&f, &Path::Circle(c), &QuadOptions::default()))?;
            worst = worst.max((q.value - m * (2.0 * PI * n as f64)).norm());
            refinements = refinements.max(q.refinements);
        }
    }
    bound("|int - 2 pi n M|", worst, 1e-6)?;
    if refinements > 20 {
        return Err(format!("{refinements} refinements"));
    }
    Ok(format!(
        "max err {worst:.1e}, at most {refinements} refinements"
    ))
}

/// A random word shape with a primitive: left-form monomial, two-factor polynomial word,
/// or a polynomial factor followed by a single negative power.
fn random_supported(r: &mut ChaCha8Rng, center: Quaternion) -> Phrase {
    let word = match r.gen_range(0..3) {
        0 => {
            let n = loop {
                let n = r.gen_range(-4..=4);
                if n != -1 {
                    break n;
                }
            };
            Word::monomial(rand_q(r, 1.0), n)
        }
        1 => Word::new(vec![
            Factor::new(rand_q(r, 1.0), r.gen_range(1..=3)),
            Factor::new(rand_q(r, 1.0), r.gen_range(1..=3)),
            Factor::new(rand_q(r, 1.0), 0),
        ]),
        _ => Word::new(vec![
            Factor::new(rand_q(r, 1.0), r.gen_range(1..=3)),
            Factor::new(rand_q(r, 1.0), r.gen_range(-4..=-2)),
            Factor::new(rand_q(r, 1.0), 0),
        ]),
    };
    Phrase::new(center, vec![word])
}

fn fundamental_theorem() -> Outcome {
    let mut r = rng(5);
    let mut worst = 0.0_f64;
    let mut done = 0;
    let mut skipped = 0;
    while done < 100 {
        let center = Quaternion::new(
            r.gen_range(-0.2..0.2),
            r.gen_range(-0.2..0.2),
            r.gen_range(-0.2..0.2),
            r.gen_range(-0.2..0.2),
        );
        let f = random_supported(&mut r, center);
        let g = match primitive(&f) {
            Ok(g) if !g.has_ln() => g,
            _ => {
                skipped += 1;
                continue;
            }
        };
        let vertices: Vec<Quaternion> = (0..r.gen_range(2..=4))
            .map(|_| {
                Quaternion::new(
                    r.gen_range(0.6..1.4),
                    r.gen_range(-0.5..0.5),
                    r.gen_range(-0.5..0.5),
                    r.gen_range(-0.5..0.5),
                )
            })
            .collect();
        let path = num(Path::polyline(vertices))?;
        let q = num(line_integral(&f, &path, &QuadOptions::default()))?;
        let exact = num(g.eval(path.end()))? - num(g.eval(path.start()))?;
        worst = worst.max((q.value - exact).norm());
        done += 1;
    }
    bound("|quadrature - (g(end) - g(start))|", worst, 1e-7)?;
    Ok(format!(
        "100 phrases ({skipped} with Ln primitives skipped), max err {worst:.1e}"
    ))
}

/// Left-form polynomial of degree at most 4 centered in the plane `a + span(1, m)`.
fn random_left_polynomial(r: &mut ChaCha8Rng, a: Quaternion, m: Quaternion) -> Phrase {
    let deg = r.gen_range(0..=4);
    let terms: Vec<(Quaternion, i32)> = (0..=deg).map(|n| (rand_q(r, 1.0), n)).collect();
    let center = in_plane(a, m, r.gen_range(0.0..0.5), r.gen_range(0.0..2.0 * PI));
    Phrase::left_form(center, &terms)
}

fn cauchy_formula() -> Outcome {
    let mut r = rng(6);
    let opts = QuadOptions::default();
    let (mut rel, mut radius) = (0.0_f64, 0.0_f64);
    for _ in 0..5 {
        let m = rand_unit_imag(&mut r);
        let a = rand_q(&mut r, 0.5);
        let f = random_left_polynomial(&mut r, a, m);
        let big = num(Circle::new(a, 1.5, m, 1.0))?;
        let small = num(Circle::new(a, 1.0, m, 1.0))?;
        for _ in 0..20 {
            let z = in_plane(a, m, r.gen_range(0.0..0.9), r.gen_range(0.0..2.0 * PI));
            let exact = num(f.eval(z))?;
            let v1 = num(cauchy_eval(&f, &big, z, &opts))?.value;
            let v2 = num(cauchy_eval(&f, &small, z, &opts))?.value;
            rel = rel.max((v1 - exact).norm() / exact.norm());
            radius = radius.max((v1 - v2).norm());
        }
    }
    bound("relative reconstruction error", rel, 1e-6)?;
    bound("radius dependence", radius, 1e-6)?;
    Ok(format!(
        "100 points, max rel err {rel:.1e}, radius spread {radius:.1e}"
    ))
}

fn derivative_formula() -> Outcome {
    let mut r = rng(7);
    let opts = QuadOptions {
        tol: 1e-10,
        max_refine: 20,
    };
    let mut worst = 0.0_f64;
    for _ in 0..5 {
        let m = rand_unit_imag(&mut r);
        let a = rand_q(&mut r, 0.5);
        let f = random_left_polynomial(&mut r, a, m);
        let c = num(Circle::new(a, 1.2, m, 1.0))?;
        for _ in 0..4 {
            let z = in_plane(a, m, r.gen_range(0.0..0.6), r.gen_range(0.0..2.0 * PI));
            for k in 1..=2 {
                let exact = num(symbolic_derivative(&f, k).eval(z))?;
                let v = num(cauchy_derivative(&f, &c, z, k, &opts))?.value;
                worst = worst.max((v - exact).norm());
            }
        }
    }
    bound("|Cauchy derivative - symbolic|", worst, 1e-6)?;
    Ok(format!("k = 1, 2 at 20 points, max err {worst:.1e}"))
}

fn laurent() -> Outcome {
    let mut r = rng(8);
    let (b1, b2) = (rand_q(&mut r, 1.0), rand_q(&mut r, 1.0));
    let f = Phrase::left_form(ZERO, &[(b1, 1), (b2, -2)]);
    let opts = QuadOptions {
        tol: 1e-10,
        max_refine: 20,
    };
    let (mut sum, mut parts) = (0.0_f64, 0.0_f64);
    for _ in 0..10 {
        let z = loop {
            let z = rand_q(&mut r, 2.0);
            if z.norm() > 0.6 && z.norm() < 1.9 {
                break z;
            }
        };
        let lc = num(laurent_components(&f, ZERO, 0.5, 2.0, z, 4, &opts))?;
        sum = sum.max((lc.sum - num(f.eval(z))?).norm());
        for k in 0..=4 {
            let phi = if k == 1 { b1 * z } else { ZERO };
            let psi = if k == 1 { b2 * num(z.powi(-2))? } else { ZERO };
            parts = parts
                .max((lc.phi[k] - phi).norm())
                .max((lc.psi[k] - psi).norm());
        }
    }
    bound("|sum - f(z)|", sum, 1e-5)?;
    bound("component error", parts, 1e-5)?;
    Ok(format!(
        "10 points, sum err {sum:.1e}, component err {parts:.1e}"
    ))
}

fn residues() -> Outcome {
    let mut r = rng(9);
    let opts = QuadOptions::default();
    let (mut quad, mut radius, mut cross, mut theorem) = (0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64);
    for _ in 0..5 {
        let (b, p, m) = (
            rand_q(&mut r, 1.0),
            rand_q(&mut r, 1.0),
            rand_unit_imag(&mut r),
        );
        let f = Phrase::left_form(p, &[(b, -1)]);
        if num(residue_closed_form(&f, p))? != b {
            return Err("closed-form residue is not exact".into());
        }
        let g = Phrase::left_form(
            p,
            &[(rand_q(&mut r, 1.0), -3), (b, -1), (rand_q(&mut r, 1.0), 2)],
        );
        let r1 = num(residue_numeric(&g, p, m, 0.5, &opts))?.value;
        let r2 = num(residue_numeric(&g, p, m, 0.25, &opts))?.value;
        quad = quad
            .max((num(residue_numeric(&f, p, m, 0.5, &opts))?.value - b).norm())
            .max((r1 - b).norm());
        radius = radius.max((r1 - r2).norm());
    }
    let shapes: [(i32, i32); 4] = [(-1, 0), (1, -2), (2, -3), (0, -1)];
    for &(n, k) in &shapes {
        for _ in 0..3 {
            let m = rand_unit_imag(&mut r);
            let p = rand_q(&mut r, 1.0);
            let w = Word::new(vec![
                Factor::new(rand_q(&mut r, 1.0), n),
                Factor::new(rand_q(&mut r, 1.0), k),
                Factor::new(rand_q(&mut r, 1.0), 0),
            ]);
            let f = Phrase::new(p, vec![w.clone()]);
            let rq = num(residue_numeric(&f, p, m, 0.7, &opts))?.value;
            let rw = num(residue_word_reduction(&w, m, 0.7))?;
            cross = cross.max((rq - rw).norm());
        }
    }
    for _ in 0..4 {
        let m = rand_unit_imag(&mut r);
        let a = Quaternion::real(r.gen_range(-0.5..0.5)) + m * r.gen_range(-0.5..0.5);
        let c = num(Circle::new(a, 2.0, m, 1.0))?;
        let p1 = in_plane(a, m, r.gen_range(0.2..1.2), r.gen_range(0.0..2.0 * PI));
        let p2 = in_plane(a, m, r.gen_range(0.2..1.2), r.gen_range(0.0..2.0 * PI));
        let fs = [
            Phrase::left_form(
                p1,
                &[
                    (rand_q(&mut r, 1.0), -1),
                    (rand_q(&mut r, 1.0), -2),
                    (rand_q(&mut r, 1.0), 1),
                ],
            ),
            Phrase::left_form(p2, &[(rand_q(&mut r, 1.0), -1), (rand_q(&mut r, 1.0), 3)]),
        ];
        let chk = num(residue_theorem_check(&fs, &Path::Circle(c), &opts))?;
        theorem = theorem.max(chk.delta);
    }
    bound("quadrature residue", quad, 1e-7)?;
    bound("radius dependence", radius, 1e-6)?;
    bound("word reduction vs quadrature", cross, 1e-6)?;
    bound("residue theorem", theorem, 1e-6)?;
    Ok(format!(
        "quad {quad:.1e}, radius {radius:.1e}, word reduction {cross:.1e}, theorem {theorem:.1e}"
    ))
}

fn argument_principle() -> Outcome {
    let mut r = rng(10);
    let opts = QuadOptions::default();
    let (mut single, mut pair) = (0.0_f64, 0.0_f64);
    for n in 1..=3 {
        for _ in 0..2 {
            let m = rand_unit_imag(&mut r);
            let c0 = Quaternion::real(r.gen_range(-0.5..0.5)) + m * r.gen_range(-0.5..0.5);
            let c = num(Circle::new(c0, 1.0, m, 1.0))?;
            let a = in_plane(c0, m, r.gen_range(0.0..0.6), r.gen_range(0.0..2.0 * PI));
            let f = Phrase::left_form(a, &[(I, n)]);
            let chk = num(argument_principle_check(&f, &c, &[(a, None)], &opts))?;
            if chk.zeros[0].divisor != n {
                return Err(format!("divisor {} for (z - a)^{n}", chk.zeros[0].divisor));
            }
            let index = num(quaternion_index(&Path::Circle(c), a, &opts))?.value;
            single = single.max((chk.lhs - index * n as f64).norm());
        }
    }
    for _ in 0..3 {
        let m = rand_unit_imag(&mut r);
        let c = num(Circle::new(ZERO, 1.0, m, 1.0))?;
        let a = in_plane(ZERO, m, r.gen_range(0.0..0.6), r.gen_range(0.0..2.0 * PI));
        let b = in_plane(ZERO, m, r.gen_range(0.0..0.6), r.gen_range(0.0..2.0 * PI));
        // (z - a)(z - b) = (z - a)^2 + (z - a)(a - b)
        let f = Phrase::new(
            a,
            vec![
                Word::monomial(I, 2),
                Word::new(vec![Factor::new(I, 1), Factor::new(a - b, 0)]),
            ],
        );
        let chk = num(argument_principle_check(
            &f,
            &c,
            &[(a, None), (b, None)],
            &opts,
        ))?;
        pair = pair.max(chk.delta);
    }
    bound("(z - a)^n", single, 1e-6)?;
    bound("two zeros", pair, 1e-5)?;
    Ok(format!(
        "single zero err {single:.1e}, two zeros err {pair:.1e}"
    ))
}

fn cr_checker() -> Outcome {
    let mut r = rng(11);
    let mut affine = 0.0_f64;
    let mut conj = f64::INFINITY;
    for _ in 0..10 {
        let (a, b, z) = (
            rand_q(&mut r, 2.0),
            rand_q(&mut r, 2.0),
            rand_q(&mut r, 2.0),
        );
        affine = affine.max(num(check_cr(|q| Ok(a * q + b), z, 1e-4, 1e-6))?.max_residual);
        conj = conj.min(num(check_cr(|q: Quaternion| Ok(q.conj()), z, 1e-4, 1e-6))?.max_residual);
    }
    bound("Az + b residual", affine, 1e-6)?;
    if conj < 0.5 {
        return Err(format!("conjugate residual {conj:.3} below 0.5"));
    }
    let field = |q: Quaternion| Ok(I * ((q.v + q.x).exp() * q.w.cos() * q.y.cos()));
    let z = Quaternion::new(0.3, 0.2, -0.1, 0.4);
    let coarse = num(check_harmonic(field, z, 0.02, 1e-5))?.max_residual;
    let fine = num(check_harmonic(field, z, 0.01, 1e-5))?.max_residual;
    let factor = coarse / fine;
    if !(3.0..=5.0).contains(&factor) {
        return Err(format!("step-halving factor {factor:.3} outside [3, 5]"));
    }
    Ok(format!(
        "Az + b {affine:.1e}, conj >= {conj:.2}, halving factor {factor:.2}"
    ))
}

fn symbolic_identities() -> Outcome {
    let mut r = rng(12);
    let p = Phrase::new(
        ZERO,
        vec![
            Word::monomial(I, 2),
            Word::new(vec![
                Factor::new(I, 1),
                Factor::new(J, 1),
                Factor::new(J, 0),
            ]),
            Word::new(vec![
                Factor::new(I, 1),
                Factor::new(K, 1),
                Factor::new(K, 0),
            ]),
            Word::new(vec![
                Factor::new(I, 1),
                Factor::new(L, 1),
                Factor::new(L, 0),
            ]),
            Word::constant(-I),
        ],
    );
    let zc = ConjugatePhrase {
        center: ZERO,
        words: vec![CWord {
            factors: vec![CFactor {
                coef: I,
                sym: Sym::ZConj,
                exp: 1,
            }],
        }],
    };
    let elim = num(eliminate_conjugate(&zc))?;
    let (mut poly, mut conj) = (0.0_f64, 0.0_f64);
    for _ in 0..1000 {
        let z = rand_q(&mut r, 2.0);
        poly = poly.max((num(p.eval(z))? - Quaternion::real(-2.0 * z.norm_sqr() - 1.0)).norm());
        conj = conj.max((num(elim.eval(z))? - z.conj()).norm());
    }
    bound("P(z) + 2|z|^2 + 1", poly, 1e-12)?;
    bound("eliminated conjugate", conj, 1e-12)?;
    Ok(format!(
        "polynomial err {poly:.1e}, conjugate err {conj:.1e}"
    ))
}

fn roots() -> Outcome {
    let mut r = rng(13);
    let opts = RootOptions::default();
    let mut worst = 0.0_f64;
    let a = Quaternion::new(0.5, -0.3, 0.2, 0.1);
    let mut cases = vec![
        Phrase::left_form(ZERO, &[(I, 2), (I, 0)]),
        Phrase::new(
            a,
            vec![
                Word::monomial(I, 2),
                Word::new(vec![Factor::new(J, 1), Factor::new(K, 0)]),
            ],
        ),
    ];
    for _ in 0..10 {
        cases.push(Phrase::left_form(
            rand_q(&mut r, 0.5),
            &[
                (I, 3),
                (rand_q(&mut r, 1.0), 2),
                (rand_q(&mut r, 1.0), 1),
                (rand_q(&mut r, 1.0), 0),
            ],
        ));
    }
    for p in &cases {
        let res = num(find_root(p, None, &opts))?;
        let check = num(p.eval(res.root))?.norm();
        worst = worst.max(check);
    }
    bound("|P(z*)|", worst, 1e-8)?;
    Ok(format!("12 polynomials, max |P(z*)| {worst:.1e}"))
}

fn limit_obstruction() -> Outcome {
    let (along_real, along_k, diff) = num(directional_limits(J, K))?;
    let direct = |s: f64, h: Quaternion| -> qholo::Result<Quaternion> {
        let z = h * s;
        Ok(z.inv()? * J * z)
    };
    let sampled_real = num(direct(1e-6, I))?;
    let sampled_k = num(direct(1e-6, K))?;
    if sampled_real != along_real
        || sampled_k != along_k
        || (J - num(K.inv())? * J * K).norm() != diff
    {
        return Err("sampled quotients disagree with the computed limits".into());
    }
    if diff < 1.0 {
        return Err(format!("limits differ by only {diff}"));
    }
    Ok(format!(
        "limits {along_real} and {along_k}, |difference| = {diff}"
    ))
}

fn main() {
    let criteria: [Criterion; 14] = [
        ("algebra", algebra),
        ("exponential", exponential),
        ("logarithm", logarithm),
        ("line integral of z^-1", line_integral_inverse),
        ("fundamental theorem", fundamental_theorem),
        ("Cauchy formula", cauchy_formula),
        ("derivative formula", derivative_formula),
        ("Laurent components", laurent),
        ("residues", residues),
        ("argument principle", argument_principle),
        ("CR checker", cr_checker),
        ("symbolic identities", symbolic_identities),
        ("root existence", roots),
        ("limit obstruction", limit_obstruction),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (tag, detail) = match f() {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!(
            "{tag} {:>2} {name}: {detail} ({:.2}s)",
            i + 1,
            start.elapsed().as_secs_f64()
        );
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
