use tfcop::dependence::kendall_tau;
use tfcop::sampling::{empirical_marginals, sample};
use tfcop::transform::{build, BuildOptions, Gate, TransformedCopula};
use tfcop::{CopulaSpec, GeneratorPair, MonotoneMap};

fn tf(base: CopulaSpec, pair: GeneratorPair) -> TransformedCopula {
    build(base, pair, Gate::Theorem, &BuildOptions::default()).unwrap()
}

#[test]
fn cuadras_auge_atom_fraction() {
    let c = tf(CopulaSpec::independence(), GeneratorPair::powers(1.0, 0.5).unwrap());
    let b = sample(&c, 200_000, 17).unwrap();
    assert!((b.diagonal_fraction() - 1.0 / 3.0).abs() <= 0.005, "{}", b.diagonal_fraction());
}

#[test]
fn independence_has_no_atom_and_no_concordance() {
    let c = tf(CopulaSpec::independence(), GeneratorPair::identity());
    let b = sample(&c, 100_000, 5).unwrap();
    assert_eq!(b.diagonal_fraction(), 0.0);
    assert!(kendall_tau(&b).unwrap().abs() <= 0.01);
}

#[test]
fn identity_clayton_tau() {
    let c = tf(CopulaSpec::clayton(2.0).unwrap(), GeneratorPair::identity());
    let b = sample(&c, 10_000, 23).unwrap();
    assert!((kendall_tau(&b).unwrap() - 0.5).abs() <= 0.03);
}

#[test]
fn atom_fraction_within_three_standard_errors() {
    let fgm = |t| tf(CopulaSpec::fgm(t).unwrap(), GeneratorPair::powers(1.0, 0.5).unwrap());
    let ca = |a: f64, g| {
        let pair = GeneratorPair::new(MonotoneMap::power(a), MonotoneMap::ca(a, g).unwrap()).unwrap();
        tf(CopulaSpec::cuadras_auge(a).unwrap(), pair)
    };
    let n = 50_000;
    for c in [fgm(0.0), fgm(1.0), ca(0.5, 0.25), ca(0.75, 0.0)] {
        let m = c.closed_form().mass().unwrap();
        let frac = sample(&c, n, 41).unwrap().diagonal_fraction();
        let band = 3.0 * (m * (1.0 - m) / n as f64).sqrt();
        assert!((frac - m).abs() <= band, "{}: {frac} vs {m} (band {band})", c.name());
    }
}

#[test]
fn margins_are_uniform() {
    let mut configs = vec![
        tf(CopulaSpec::fgm(1.0).unwrap(), GeneratorPair::powers(1.0, 0.5).unwrap()),
        tf(CopulaSpec::independence(), GeneratorPair::powers(1.0, 0.5).unwrap()),
    ];
    for base in [CopulaSpec::clayton(2.0).unwrap(), CopulaSpec::gumbel(3.0).unwrap(), CopulaSpec::frank(4.0).unwrap()] {
        for case in ["a", "b", "c", "d"] {
            configs.push(tf(base.clone(), GeneratorPair::preset(case).unwrap()));
        }
    }
    for c in &configs {
        let b = sample(c, 100_000, 3).unwrap();
        let ks = empirical_marginals(&b).unwrap();
        assert!(ks.passed(), "{}: {ks:?}", c.name());
        assert_eq!(ks, empirical_marginals(&sample(c, 100_000, 3).unwrap()).unwrap());
    }
}
