use super::commands::convert;
use super::*;
use num_complex::Complex64 as C;

fn parse(args: &[&str]) -> Cli {
    Cli::try_parse_from(std::iter::once("qkdv").chain(args.iter().copied())).unwrap()
}

fn params_args(args: &[&str]) -> ParamsArgs {
    let mut v = vec!["params"];
    v.extend_from_slice(args);
    match parse(&v).command {
        Command::Params(a) => a,
        c => panic!("{c:?}"),
    }
}

#[test]
fn complex_literals() {
    let cases = [
        ("1", C::new(1.0, 0.0)),
        ("-2.5", C::new(-2.5, 0.0)),
        ("0.5-2i", C::new(0.5, -2.0)),
        ("0.5+2j", C::new(0.5, 2.0)),
        ("-i", C::new(0.0, -1.0)),
        ("3i", C::new(0.0, 3.0)),
        ("1e-3+2e-1i", C::new(1e-3, 0.2)),
        ("0.5,-2", C::new(0.5, -2.0)),
    ];
    for (s, want) in cases {
        assert_eq!(parse_complex(s).unwrap(), want, "{s}");
    }
    for s in ["", "abc", "1+2", "i2"] {
        assert!(parse_complex(s).is_err(), "{s}");
    }
}

#[test]
fn config_file_and_precedence() {
    let cfg = ConfigFile::parse("# comment\nk = -2.4\nseed-box = 12\n\nrng_seed=7 # trailing\n").unwrap();
    assert_eq!(cfg.get::<f64>("k").unwrap(), Some(-2.4));
    assert_eq!(cfg.get::<f64>("seed_box").unwrap(), Some(12.0));
    assert_eq!(cfg.pick(&Some(3u64), "rng_seed", 0).unwrap(), 3);
    assert_eq!(cfg.pick(&None, "rng_seed", 0u64).unwrap(), 7);
    assert_eq!(cfg.pick(&None, "missing", 5usize).unwrap(), 5);
    assert!(cfg.get::<usize>("k").is_err());
    assert!(ConfigFile::parse("no equals sign").is_err());
}

#[test]
fn params_desk_values() {
    let r = convert(
        &params_args(&["--k", "-2.5", "--r1bar", "1", "--r2bar", "0"]),
        &ConfigFile::default(),
    )
    .unwrap();
    assert!((r.cft.c - C::new(-15.0, 0.0)).norm() < 1e-12);
    assert!((r.cft.delta2 - C::new(-7.0 / 18.0, 0.0)).norm() < 1e-12);
    assert!((r.cft.delta3 - C::new(2f64.powf(-1.5) / 27.0, 0.0)).norm() < 1e-12);
}

#[test]
fn params_from_legacy_and_r() {
    let r = convert(&params_args(&["--from", "legacy", "--M", "1"]), &ConfigFile::default()).unwrap();
    assert_eq!(r.oper.k, -2.5);
    let r = convert(
        &params_args(&["--from", "r", "--r1", "1.2", "--r2", "0.7"]),
        &ConfigFile::default(),
    )
    .unwrap();
    assert!((r.oper.r1bar - C::new(-0.81, 0.0)).norm() < 1e-12);
    assert!((r.oper.r2bar - C::new(-0.84, 0.0)).norm() < 1e-12);
}

#[test]
fn params_domain_violation_is_a_usage_error() {
    let e = convert(
        &params_args(&["--k", "-1.5", "--r1bar", "1", "--r2bar", "0"]),
        &ConfigFile::default(),
    )
    .unwrap_err();
    assert_eq!(e.code(), 2);
    let e = convert(&params_args(&["--r1bar", "1", "--r2bar", "0"]), &ConfigFile::default()).unwrap_err();
    assert_eq!(e.code(), 2);
}

#[test]
fn error_classes_map_to_exit_codes() {
    assert_eq!(CliError::from(crate::Error::Domain("x".into())).code(), 2);
    assert_eq!(CliError::from(crate::Error::IllConditioned(1e9)).code(), 1);
    assert_eq!(CliError::from(crate::Error::InsufficientGrid).code(), 1);
}

#[test]
fn global_flags_anywhere() {
    let c = parse(&["qq", "sol.json", "--sector", "sigma", "--system", "printed", "--threads", "2"]);
    assert_eq!(c.system, Some(SystemArg::Printed));
    assert_eq!(c.threads, Some(2));
    let c = parse(&["bethe", "sol.json", "--ray", "real-E", "--window", "0", "50"]);
    match c.command {
        Command::Bethe(b) => {
            assert_eq!(b.window, Some(vec![0.0, 50.0]));
            assert_eq!(b.ray, Some(RayKind::RealE));
        }
        c => panic!("{c:?}"),
    }
}

#[test]
fn lambda_samples_are_deterministic() {
    let a = commands::lambda_samples(4, 11);
    assert_eq!(a, commands::lambda_samples(4, 11));
    assert_ne!(a, commands::lambda_samples(4, 12));
    assert!(a.iter().all(|l| (0.2..1.0).contains(&l.norm())));
}
