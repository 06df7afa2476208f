//! Two-sample data sets: simulated scenarios, the Iris petal widths and CSV input/output.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const CSV_HEADER: &str = "value,sample";

/// Where a data set came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    ScenarioI,
    ScenarioII,
    ScenarioIII,
    Motivating,
    Iris,
    File,
}

/// Simulated designs, each a pair of two-component normal mixtures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scenario {
    /// Both samples from `½N(0,1) + ½N(5,1)`.
    I,
    /// `0.9N(5,0.6) + 0.1N(10,0.6)` against `0.1N(5,0.6) + 0.9N(0,0.6)`.
    II,
    /// `0.8N(5,1) + 0.2N(0,1)` against `0.2N(5,1) + 0.8N(0,1)`.
    III,
    /// `½N(5,0.6) + ½N(10,0.6)` against `½N(5,0.6) + ½N(0,0.6)`.
    Motivating,
}

/// `(weight, mean, variance)` of each component.
type Mixture = [(f64, f64, f64); 2];

impl Scenario {
    pub fn mixtures(&self) -> [Mixture; 2] {
        match self {
            Scenario::I => [[(0.5, 0.0, 1.0), (0.5, 5.0, 1.0)]; 2],
            Scenario::II => [[(0.9, 5.0, 0.6), (0.1, 10.0, 0.6)], [(0.1, 5.0, 0.6), (0.9, 0.0, 0.6)]],
            Scenario::III => [[(0.8, 5.0, 1.0), (0.2, 0.0, 1.0)], [(0.2, 5.0, 1.0), (0.8, 0.0, 1.0)]],
            Scenario::Motivating => [[(0.5, 5.0, 0.6), (0.5, 10.0, 0.6)], [(0.5, 5.0, 0.6), (0.5, 0.0, 0.6)]],
        }
    }

    pub fn provenance(&self) -> Provenance {
        match self {
            Scenario::I => Provenance::ScenarioI,
            Scenario::II => Provenance::ScenarioII,
            Scenario::III => Provenance::ScenarioIII,
            Scenario::Motivating => Provenance::Motivating,
        }
    }

    /// True density of `sample` (0 or 1) at `x`.
    pub fn density(&self, sample: usize, x: f64) -> f64 {
        self.mixtures()[sample]
            .iter()
            .map(|&(w, m, v)| w * (-(x - m).powi(2) / (2.0 * v)).exp() / (2.0 * std::f64::consts::PI * v).sqrt())
            .sum()
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "i" | "1" => Ok(Scenario::I),
            "ii" | "2" => Ok(Scenario::II),
            "iii" | "3" => Ok(Scenario::III),
            "motivating" => Ok(Scenario::Motivating),
            _ => Err(Error::domain(format!("unknown scenario '{s}' (expected I, II, III or motivating)"))),
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Scenario::I => "I",
            Scenario::II => "II",
            Scenario::III => "III",
            Scenario::Motivating => "motivating",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoSampleData {
    pub sample1: Vec<f64>,
    pub sample2: Vec<f64>,
    pub provenance: Provenance,
    pub seed: Option<u64>,
}

impl TwoSampleData {
    pub fn new(sample1: Vec<f64>, sample2: Vec<f64>, provenance: Provenance, seed: Option<u64>) -> Result<Self> {
        if sample1.is_empty() || sample2.is_empty() {
            return Err(Error::Schema("both samples must be nonempty".into()));
        }
        if sample1.iter().chain(&sample2).any(|x| !x.is_finite()) {
            return Err(Error::Schema("all values must be finite".into()));
        }
        Ok(Self {
            sample1,
            sample2,
            provenance,
            seed,
        })
    }

    pub fn pooled_mean(&self) -> f64 {
        let n = (self.sample1.len() + self.sample2.len()) as f64;
        self.sample1.iter().chain(&self.sample2).sum::<f64>() / n
    }

    /// CSV text under [`CSV_HEADER`], sample 1 first.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for (s, xs) in [(1, &self.sample1), (2, &self.sample2)] {
            for x in xs {
                out.push_str(&format!("{x},{s}\n"));
            }
        }
        out
    }
}

fn draw_mixture<R: Rng>(mix: &Mixture, n: usize, rng: &mut R) -> Vec<f64> {
    let normals: Vec<Normal<f64>> = mix
        .iter()
        .map(|&(_, m, v)| Normal::new(m, v.sqrt()).expect("fixed mixture parameters"))
        .collect();
    (0..n)
        .map(|_| {
            let c = if rng.random::<f64>() < mix[0].0 { 0 } else { 1 };
            normals[c].sample(rng)
        })
        .collect()
}

/// I.i.d. draws from the scenario's mixtures; the two samples use separate streams of the seed.
pub fn generate_scenario(which: Scenario, n1: usize, n2: usize, seed: u64) -> Result<TwoSampleData> {
    if n1 == 0 || n2 == 0 {
        return Err(Error::domain("sample sizes must be at least 1"));
    }
    let mix = which.mixtures();
    let draw = |l: usize, n: usize| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(l as u64 + 1);
        draw_mixture(&mix[l], n, &mut rng)
    };
    TwoSampleData::new(draw(0, n1), draw(1, n2), which.provenance(), Some(seed))
}

// Fisher's iris petal widths in millimetres, in dataset order.
const SETOSA: [u8; 50] = [
    2, 2, 2, 2, 2, 4, 3, 2, 2, 1, 2, 2, 1, 1, 2, 4, 4, 3, 3, 3, 2, 4, 2, 5, 2, 2, 4, 2, 2, 2, 2, 4, 1, 2, 2, 2, 2, 1, 2, 2,
    3, 3, 2, 6, 4, 3, 2, 2, 2, 2,
];
const VERSICOLOR: [u8; 50] = [
    14, 15, 15, 13, 15, 13, 16, 10, 13, 14, 10, 15, 10, 14, 13, 14, 15, 10, 15, 11, 18, 13, 15, 12, 13, 14, 14, 17, 15,
    10, 11, 10, 12, 16, 15, 16, 15, 13, 13, 13, 12, 14, 12, 10, 13, 12, 13, 13, 11, 13,
];
const VIRGINICA: [u8; 50] = [
    25, 19, 21, 18, 22, 21, 17, 18, 18, 25, 20, 19, 21, 20, 24, 23, 18, 22, 23, 15, 23, 20, 20, 18, 21, 18, 18, 18, 21,
    16, 19, 20, 22, 15, 14, 23, 24, 18, 18, 21, 24, 23, 19, 23, 25, 23, 19, 20, 23, 18,
];

/// Petal widths in millimetres: setosa and the first 40 versicolor against the last 10 versicolor and virginica.
pub fn iris_petal_width() -> TwoSampleData {
    let mm = |v: &[u8]| v.iter().map(|&x| x as f64).collect::<Vec<f64>>();
    let mut s1 = mm(&SETOSA);
    s1.extend(mm(&VERSICOLOR[..40]));
    let mut s2 = mm(&VERSICOLOR[40..]);
    s2.extend(mm(&VIRGINICA));
    TwoSampleData::new(s1, s2, Provenance::Iris, None).expect("embedded data are valid")
}

/// Parses CSV text with header `value,sample`; lines starting with `#` are skipped.
pub fn parse_csv(text: &str) -> Result<TwoSampleData> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    match lines.next() {
        Some((_, h)) if h.replace(' ', "") == CSV_HEADER => {}
        Some((line, h)) => {
            return Err(Error::Parse {
                line,
                message: format!("expected header '{CSV_HEADER}', found '{h}'"),
            })
        }
        None => return Err(Error::Schema("empty data file".into())),
    }
    let (mut s1, mut s2) = (Vec::new(), Vec::new());
    for (line, l) in lines {
        let parse_err = |message: String| Error::Parse { line, message };
        let mut fields = l.split(',').map(str::trim);
        let (Some(v), Some(s), None) = (fields.next(), fields.next(), fields.next()) else {
            return Err(parse_err(format!("expected two fields, found '{l}'")));
        };
        let x: f64 = v.parse().map_err(|_| parse_err(format!("'{v}' is not a number")))?;
        if !x.is_finite() {
            return Err(parse_err(format!("'{v}' is not finite")));
        }
        match s {
            "1" => s1.push(x),
            "2" => s2.push(x),
            _ => return Err(parse_err(format!("sample must be 1 or 2, found '{s}'"))),
        }
    }
    if s1.is_empty() || s2.is_empty() {
        let missing = if s1.is_empty() { 1 } else { 2 };
        return Err(Error::Schema(format!("no observations for sample {missing}")));
    }
    TwoSampleData::new(s1, s2, Provenance::File, None)
}

pub fn load_csv(path: impl AsRef<Path>) -> Result<TwoSampleData> {
    parse_csv(&std::fs::read_to_string(path)?)
}

pub fn write_csv(data: &TwoSampleData, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, data.to_csv())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scenario_one_mean() {
        let d = generate_scenario(Scenario::I, 1_000_000, 1, 11).unwrap();
        let n = d.sample1.len() as f64;
        let mean = d.sample1.iter().sum::<f64>() / n;
        // variance of ½N(0,1)+½N(5,1) is 1 + 6.25
        let se = (7.25f64 / n).sqrt();
        assert!((mean - 2.5).abs() < 4.0 * se, "mean {mean}");
    }

    #[test]
    fn scenario_two_proportion() {
        let d = generate_scenario(Scenario::II, 1_000_000, 1, 5).unwrap();
        let n = d.sample1.len() as f64;
        let near5 = d.sample1.iter().filter(|&&x| (x - 5.0).abs() < (x - 10.0).abs()).count() as f64 / n;
        assert!((near5 - 0.9).abs() < 4.0 * (0.09f64 / n).sqrt(), "proportion {near5}");
    }

    #[test]
    fn seeds_are_reproducible_and_streams_differ() {
        let a = generate_scenario(Scenario::III, 50, 50, 3).unwrap();
        let b = generate_scenario(Scenario::III, 50, 50, 3).unwrap();
        assert_eq!(a, b);
        let c = generate_scenario(Scenario::I, 20, 20, 3).unwrap();
        assert_ne!(c.sample1, c.sample2);
    }

    #[test]
    fn unknown_scenario() {
        assert!(matches!("IV".parse::<Scenario>(), Err(Error::Domain(_))));
        assert_eq!("ii".parse::<Scenario>().unwrap(), Scenario::II);
    }

    #[test]
    fn iris_layout() {
        let d = iris_petal_width();
        assert_eq!((d.sample1.len(), d.sample2.len()), (90, 60));
        assert!(d.sample1.iter().chain(&d.sample2).all(|&x| (0.0..=30.0).contains(&x)));
        assert!(d.sample1[..50].iter().all(|&x| x <= 6.0));
        let total: f64 = d.sample1.iter().chain(&d.sample2).sum();
        assert_eq!(total, 123.0 + 663.0 + 1013.0);
    }

    #[test]
    fn csv_round_trip_and_errors() {
        let d = generate_scenario(Scenario::II, 7, 4, 1).unwrap();
        let back = parse_csv(&d.to_csv()).unwrap();
        assert_eq!(back.sample1, d.sample1);
        assert_eq!(back.sample2, d.sample2);
        match parse_csv("value,sample\n1.0,1\nabc,1\n2,2\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_csv("value,sample\n1.0,1\n2.0,1\n"), Err(Error::Schema(_))));
        assert!(matches!(parse_csv("# note\nvalue,sample\n1,1\n2,2\n"), Ok(_)));
    }
}
