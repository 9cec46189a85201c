//! Seeded random instance generator for property testing.

use clap::{Parser, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::instance::{BlockJson, InstanceFile, RoundingJson, SystemJson, ValueJson, VERSION};
use crate::error::Result;
use crate::hyperbolic::linalg::{identity, inverse, jordan_matrix, mul, Mat};
use crate::numerics::{fmt_rational, int, rat, Angle, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum GenKind {
    /// Jordan form with real eigenvalues of modulus other than one.
    Hyperbolic,
    /// Rational matrix `P J P^-1` with hyperbolic rational spectrum.
    Rational,
    /// Modulus-one Jordan blocks with polar rounding.
    Polar,
    /// Modulus-one Jordan blocks with truncation or expansion.
    Argand,
    /// Random quantified formula in text syntax.
    Qbf,
}

#[derive(Parser, Debug)]
#[command(name = "rounded-reach-gen", about = "Emit seeded random instances")]
pub struct GenArgs {
    #[arg(long)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "hyperbolic")]
    pub kind: GenKind,
    #[arg(long, default_value_t = 1)]
    pub count: usize,
    /// Directory for the files; standard output if absent.
    #[arg(long)]
    pub out_dir: Option<std::path::PathBuf>,
}

fn r(v: &Rational) -> String {
    fmt_rational(v)
}

fn real_values(rng: &mut ChaCha8Rng, d: usize, max: i64) -> Vec<ValueJson> {
    (0..d).map(|_| ValueJson::Real(rng.gen_range(-max..=max).to_string())).collect()
}

fn gaussian_values(rng: &mut ChaCha8Rng, d: usize, max: i64) -> Vec<ValueJson> {
    (0..d)
        .map(|_| ValueJson::Cartesian { re: rng.gen_range(-max..=max).to_string(), im: rng.gen_range(-max..=max).to_string() })
        .collect()
}

fn random_blocks(rng: &mut ChaCha8Rng, d: usize, mut pick: impl FnMut(&mut ChaCha8Rng) -> (Rational, Angle)) -> Vec<BlockJson> {
    let mut out = Vec::new();
    let mut left = d;
    while left > 0 {
        let size = rng.gen_range(1..=left);
        let (m, a) = pick(rng);
        out.push(BlockJson { size, modulus: r(&m), angle: a.to_string() });
        left -= size;
    }
    out
}

fn hyperbolic_modulus(rng: &mut ChaCha8Rng) -> Rational {
    [rat(1, 3), rat(1, 2), int(2), int(3)][rng.gen_range(0..4)].clone()
}

/// A random instance file of the given kind.
pub fn generate_instance(rng: &mut ChaCha8Rng, kind: GenKind) -> InstanceFile {
    let d = rng.gen_range(1..=3);
    let argand = |k: &str| RoundingJson { shape: "argand".into(), kind: k.into(), r: None, g: "1".into() };
    let hyper_kinds = ["floor", "minimal-error-up", "truncate"];
    match kind {
        GenKind::Hyperbolic => {
            let blocks = random_blocks(rng, d, |g| (hyperbolic_modulus(g), if g.gen_bool(0.5) { Angle::zero() } else { Angle::new(1, 1) }));
            InstanceFile {
                version: VERSION,
                system: SystemJson::Jnf { blocks },
                rounding: argand(hyper_kinds[rng.gen_range(0..3)]),
                initial: real_values(rng, d, 10),
                target: real_values(rng, d, 10),
                meta: None,
            }
        }
        GenKind::Rational => {
            let blocks: Vec<(Rational, usize)> = (0..d)
                .map(|_| {
                    let m = hyperbolic_modulus(rng);
                    (if rng.gen_bool(0.5) { m } else { -m }, 1)
                })
                .collect();
            let j = jordan_matrix(&blocks);
            let p = loop {
                let mut p: Mat = identity(d);
                for (i, row) in p.iter_mut().enumerate() {
                    for (k, e) in row.iter_mut().enumerate() {
                        if i != k {
                            *e = int(rng.gen_range(-1..=1));
                        }
                    }
                }
                if inverse(&p).is_ok() {
                    break p;
                }
            };
            let m = mul(&mul(&p, &j), &inverse(&p).expect("checked invertible"));
            let s = |m: &Mat| m.iter().map(|row| row.iter().map(r).collect()).collect();
            InstanceFile {
                version: VERSION,
                system: SystemJson::Rational { matrix: s(&m), jordan: None },
                rounding: argand(hyper_kinds[rng.gen_range(0..3)]),
                initial: real_values(rng, d, 10),
                target: real_values(rng, d, 10),
                meta: None,
            }
        }
        GenKind::Polar => {
            let d = rng.gen_range(1..=2);
            let rr = rng.gen_range(2..=4);
            let angles = [Angle::new(1, 2), Angle::new(1, 3), Angle::new(1, 4)];
            let blocks = random_blocks(rng, d, |g| (int(1), angles[g.gen_range(0..3)]));
            let values = |g: &mut ChaCha8Rng| -> Vec<ValueJson> {
                (0..d)
                    .map(|_| ValueJson::Polar {
                        modulus: g.gen_range(0..=8).to_string(),
                        angle: Angle::new(g.gen_range(0..2 * rr as i64), rr as i64).to_string(),
                    })
                    .collect()
            };
            let kinds = ["floor", "ceil", "truncate", "expand", "minimal-error-up"];
            InstanceFile {
                version: VERSION,
                system: SystemJson::Jnf { blocks },
                rounding: RoundingJson { shape: "polar".into(), kind: kinds[rng.gen_range(0..5)].into(), r: Some(rr), g: "1".into() },
                initial: values(rng),
                target: values(rng),
                meta: None,
            }
        }
        GenKind::Argand => {
            let d = rng.gen_range(1..=2);
            let angles = [Angle::new(1, 4), Angle::new(1, 3), Angle::new(1, 2)];
            let blocks = random_blocks(rng, d, |g| (int(1), angles[g.gen_range(0..3)]));
            InstanceFile {
                version: VERSION,
                system: SystemJson::Jnf { blocks },
                rounding: argand(if rng.gen_bool(0.5) { "truncate" } else { "expand" }),
                initial: gaussian_values(rng, d, 8),
                target: gaussian_values(rng, d, 8),
                meta: None,
            }
        }
        GenKind::Qbf => unreachable!("formulas are text, see generate_qbf_text"),
    }
}

/// A random formula with `n` variables and up to `ops` operations, in text syntax.
pub fn generate_qbf_text(rng: &mut ChaCha8Rng, n: usize, ops: usize) -> String {
    fn expr(rng: &mut ChaCha8Rng, n: usize, ops: usize) -> String {
        if ops == 0 {
            return format!("x{}", rng.gen_range(1..=n));
        }
        match rng.gen_range(0..3) {
            0 => format!("!{}", expr(rng, n, ops - 1)),
            k => {
                let left = rng.gen_range(0..ops);
                let op = if k == 1 { "&" } else { "|" };
                format!("({} {op} {})", expr(rng, n, left), expr(rng, n, ops - 1 - left))
            }
        }
    }
    let prefix: Vec<String> =
        (1..=n).map(|i| format!("{} x{i}", if i % 2 == 1 { "forall" } else { "exists" })).collect();
    let k = rng.gen_range(0..=ops);
    format!("{} : {}", prefix.join(" "), expr(rng, n, k))
}

/// Entry point of the generator binary.
pub fn gen_main() -> i32 {
    let args = GenArgs::parse();
    match run_gen(&args) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn run_gen(args: &GenArgs) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    for i in 0..args.count {
        let (text, ext) = match args.kind {
            GenKind::Qbf => {
                let n = 2 * rng.gen_range(1..=2);
                (format!("{}\n", generate_qbf_text(&mut rng, n, 6)), "qbf")
            }
            k => (generate_instance(&mut rng, k).to_json(), "json"),
        };
        match &args.out_dir {
            Some(dir) => {
                std::fs::create_dir_all(dir)?;
                std::fs::write(dir.join(format!("instance-{i:04}.{ext}")), text)?;
            }
            None => print!("{text}"),
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qbf::parse::parse_text;

    #[test]
    fn generated_instances_parse() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for kind in [GenKind::Hyperbolic, GenKind::Rational, GenKind::Polar, GenKind::Argand] {
            for _ in 0..10 {
                let f = generate_instance(&mut rng, kind);
                f.to_instance().unwrap();
                assert_eq!(InstanceFile::from_json(&f.to_json()).unwrap(), f);
            }
        }
        for _ in 0..20 {
            let s = generate_qbf_text(&mut rng, 4, 6);
            let phi = parse_text(&s).unwrap();
            assert!(phi.ell() <= 6);
            assert_eq!(phi.n(), 4);
        }
    }

    #[test]
    fn seeds_are_deterministic() {
        let a = generate_instance(&mut ChaCha8Rng::seed_from_u64(3), GenKind::Polar);
        let b = generate_instance(&mut ChaCha8Rng::seed_from_u64(3), GenKind::Polar);
        assert_eq!(a, b);
    }
}
