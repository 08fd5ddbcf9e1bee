//! Benchmark functions with known optima: the Jones set (Shekel, Hartman,
//! Branin, Goldstein-Price, six-hump camel, Shubert) and thirteen scalable
//! functions from the Hedar collection.

mod data;
pub mod functions;
mod validate;

use std::f64::consts::PI;
use std::fmt;

use serde::Serialize;

pub use validate::{validate_function, validate_registry, ValidationEntry};

use crate::error::{Error, Result};
use crate::problem::{Bounds, Problem};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TestSet {
    Jones,
    Hedar,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DimRule {
    Fixed(usize),
    Range { min: usize, max: Option<usize> },
}

impl DimRule {
    pub fn allows(self, n: usize) -> bool {
        match self {
            DimRule::Fixed(d) => n == d,
            DimRule::Range { min, max } => n >= min && max.map_or(true, |m| n <= m),
        }
    }

    pub fn smallest(self) -> usize {
        match self {
            DimRule::Fixed(d) => d,
            DimRule::Range { min, .. } => min,
        }
    }
}

impl fmt::Display for DimRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DimRule::Fixed(d) => write!(f, "{d}"),
            DimRule::Range { min, max: None } => write!(f, "{min}.."),
            DimRule::Range { min, max: Some(m) } => write!(f, "{min}..={m}"),
        }
    }
}

/// Where a stored optimum comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimumSource {
    /// Standard published value.
    Published,
    /// Computed numerically for this registry (the function is separable,
    /// so the optimum is a sum of one-dimensional minima).
    Computed,
}

/// Metadata of one instantiated test function.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestFunction {
    pub name: &'static str,
    pub set: TestSet,
    pub dims: DimRule,
    pub dim: usize,
    /// Dimensions used by the benchmark suites.
    pub suite_dims: Vec<usize>,
    /// Domain before [`adjust_bounds`].
    pub canonical_bounds: Bounds,
    /// Domain the returned problem uses.
    pub bounds: Bounds,
    pub f_star: f64,
    pub x_star: Option<Vec<f64>>,
    pub optimum_source: OptimumSource,
    pub local_count: Option<u32>,
    pub global_count: Option<u32>,
}

struct Entry {
    name: &'static str,
    aliases: &'static [&'static str],
    set: TestSet,
    dims: DimRule,
    suite_dims: &'static [usize],
    f: fn(&[f64]) -> f64,
    bounds: fn(usize) -> (Vec<f64>, Vec<f64>),
    x_star: fn(usize) -> Vec<f64>,
    /// `None` means `f(x_star)`.
    f_star: Option<fn(usize) -> f64>,
    source: OptimumSource,
    counts: Option<(u32, u32)>,
}

const HEDAR_DIMS: &[usize] = &[6, 12, 18];

const SHEKEL5_X: [f64; 4] = [4.00003715108039, 4.000133275843115, 4.000037153167726, 4.000133276877367];
const SHEKEL7_X: [f64; 4] = [4.00057291692814, 4.000689365361024, 3.999489706628529, 3.9996061565110934];
const SHEKEL10_X: [f64; 4] = [4.00074652969869, 4.000592932467785, 3.9996633989785417, 3.999509802462291];
const HARTMAN3_X: [f64; 3] = [0.11458889207919168, 0.5556488868979229, 0.8525469770712408];
const HARTMAN6_X: [f64; 6] = [
    0.20168950923409584,
    0.15001068876417922,
    0.4768739724329622,
    0.275332428312954,
    0.3116516115751367,
    0.6573005293804641,
];
const SHUBERT_X: [f64; 2] = [-1.4251284285389663, -0.8003211003675261];
const CAMEL_X: [f64; 2] = [0.08984200678905811, -0.712656410015068];

/// Minimizer of `sin(x) sin^20(i x² / π)` on `[0, π]` for `i = 1..=10`.
const MICHALEWICZ_X: [f64; 10] = [
    2.2029055173989227,
    1.5707963267621126,
    1.2849915705563995,
    1.9230584698628619,
    1.72046977142116,
    1.5707963267621126,
    1.4544139713577826,
    1.7560865209512249,
    1.6557174168170525,
    1.5707963267621126,
];

/// Minimizer of `-x sin(sqrt|x|)` on `[-500, 500]`.
const SCHWEFEL_X: f64 = 420.968_746_359_982_03;

fn fixed(v: &'static [f64]) -> Vec<f64> {
    v.to_vec()
}

fn shekel5(x: &[f64]) -> f64 {
    functions::shekel(x, 5)
}

fn shekel7(x: &[f64]) -> f64 {
    functions::shekel(x, 7)
}

fn shekel10(x: &[f64]) -> f64 {
    functions::shekel(x, 10)
}

fn registry() -> &'static [Entry] {
    static ENTRIES: &[Entry] = &[
        Entry {
            name: "S5",
            aliases: &["shekel5"],
            set: TestSet::Jones,
            dims: DimRule::Fixed(4),
            suite_dims: &[4],
            f: shekel5,
            bounds: |n| uniform(n, 0.0, 10.0),
            x_star: |_| fixed(&SHEKEL5_X),
            f_star: Some(|_| -10.153199679058229),
            source: OptimumSource::Published,
            counts: Some((5, 1)),
        },
        Entry {
            name: "S7",
            aliases: &["shekel7"],
            set: TestSet::Jones,
            dims: DimRule::Fixed(4),
            suite_dims: &[4],
            f: shekel7,
            bounds: |n| uniform(n, 0.0, 10.0),
            x_star: |_| fixed(&SHEKEL7_X),
            f_star: Some(|_| -10.402940566818664),
            source: OptimumSource::Published,
            counts: Some((7, 1)),
        },
        Entry {
            name: "S10",
            aliases: &["shekel10"],
            set: TestSet::Jones,
            dims: DimRule::Fixed(4),
            suite_dims: &[4],
            f: shekel10,
            bounds: |n| uniform(n, 0.0, 10.0),
            x_star: |_| fixed(&SHEKEL10_X),
            f_star: Some(|_| -10.536409816692046),
            source: OptimumSource::Published,
            counts: Some((10, 1)),
        },
        Entry {
            name: "H3",
            aliases: &["hartman3", "hartmann3"],
            set: TestSet::Jones,
            dims: DimRule::Fixed(3),
            suite_dims: &[3],
            f: functions::hartman3,
            bounds: |n| uniform(n, 0.0, 1.0),
            x_star: |_| fixed(&HARTMAN3_X),
            f_star: Some(|_| -3.8627797873326553),
            source: OptimumSource::Published,
            counts: Some((4, 1)),
        },
        Entry {
            name: "H6",
            aliases: &["hartman6", "hartmann6"],
            set: TestSet::Jones,
            dims: DimRule::Fixed(6),
            suite_dims: &[6],
            f: functions::hartman6,
            bounds: |n| uniform(n, 0.0, 1.0),
            x_star: |_| fixed(&HARTMAN6_X),
            f_star: Some(|_| -3.3223680114155125),
            source: OptimumSource::Published,
            counts: Some((4, 1)),
        },
        Entry {
            name: "BR",
            aliases: &["branin", "braninrcos"],
            set: TestSet::Jones,
            dims: DimRule::Fixed(2),
            suite_dims: &[2],
            f: functions::branin,
            bounds: |_| (vec![-5.0, 0.0], vec![10.0, 15.0]),
            x_star: |_| vec![PI, 2.275],
            f_star: Some(|_| 5.0 / (4.0 * PI)),
            source: OptimumSource::Published,
            counts: Some((3, 3)),
        },
        Entry {
            name: "GP",
            aliases: &["goldsteinprice", "goldstein"],
            set: TestSet::Jones,
            dims: DimRule::Fixed(2),
            suite_dims: &[2],
            f: functions::goldstein_price,
            bounds: |n| uniform(n, -2.0, 2.0),
            x_star: |_| vec![0.0, -1.0],
            f_star: Some(|_| 3.0),
            source: OptimumSource::Published,
            counts: Some((4, 1)),
        },
        Entry {
            name: "C6",
            aliases: &["sixhumpcamel", "camel6", "sixhump"],
            set: TestSet::Jones,
            dims: DimRule::Fixed(2),
            suite_dims: &[2],
            f: functions::six_hump_camel,
            bounds: |_| (vec![-3.0, -2.0], vec![3.0, 2.0]),
            x_star: |_| fixed(&CAMEL_X),
            f_star: Some(|_| -1.0316284534898768),
            source: OptimumSource::Published,
            counts: Some((6, 2)),
        },
        Entry {
            name: "SHU",
            aliases: &["shubert"],
            set: TestSet::Jones,
            dims: DimRule::Fixed(2),
            suite_dims: &[2],
            f: functions::shubert,
            bounds: |n| uniform(n, -10.0, 10.0),
            x_star: |_| fixed(&SHUBERT_X),
            f_star: Some(|_| -186.7309088310238),
            source: OptimumSource::Published,
            counts: Some((760, 18)),
        },
        Entry {
            name: "Ackley",
            aliases: &[],
            set: TestSet::Hedar,
            dims: DimRule::Range { min: 1, max: None },
            suite_dims: HEDAR_DIMS,
            f: functions::ackley,
            bounds: |n| uniform(n, -15.0, 30.0),
            x_star: |n| vec![0.0; n],
            f_star: Some(|_| 0.0),
            source: OptimumSource::Published,
            counts: None,
        },
        Entry {
            name: "Dixon-Price",
            aliases: &["dixon"],
            set: TestSet::Hedar,
            dims: DimRule::Range { min: 1, max: None },
            suite_dims: HEDAR_DIMS,
            f: functions::dixon_price,
            bounds: |n| uniform(n, -10.0, 10.0),
            x_star: |n| {
                (1..=n)
                    .map(|i| {
                        let p = 2f64.powi(i as i32);
                        2f64.powf(-(p - 2.0) / p)
                    })
                    .collect()
            },
            f_star: Some(|_| 0.0),
            source: OptimumSource::Published,
            counts: None,
        },
        Entry {
            name: "Griewank",
            aliases: &[],
            set: TestSet::Hedar,
            dims: DimRule::Range { min: 1, max: None },
            suite_dims: HEDAR_DIMS,
            f: functions::griewank,
            bounds: |n| uniform(n, -600.0, 600.0),
            x_star: |n| vec![0.0; n],
            f_star: Some(|_| 0.0),
            source: OptimumSource::Published,
            counts: None,
        },
        Entry {
            name: "Levy",
            aliases: &[],
            set: TestSet::Hedar,
            dims: DimRule::Range { min: 1, max: None },
            suite_dims: HEDAR_DIMS,
            f: functions::levy,
            bounds: |n| uniform(n, -10.0, 10.0),
            x_star: |n| vec![1.0; n],
            f_star: Some(|_| 0.0),
            source: OptimumSource::Published,
            counts: None,
        },
        Entry {
            name: "Michalewicz",
            aliases: &[],
            set: TestSet::Hedar,
            dims: DimRule::Range { min: 1, max: Some(10) },
            suite_dims: &[5, 10],
            f: functions::michalewicz,
            bounds: |n| uniform(n, 0.0, PI),
            x_star: |n| MICHALEWICZ_X[..n].to_vec(),
            f_star: None,
            source: OptimumSource::Computed,
            counts: None,
        },
        Entry {
            name: "Powell",
            aliases: &[],
            set: TestSet::Hedar,
            dims: DimRule::Range { min: 4, max: None },
            suite_dims: HEDAR_DIMS,
            f: functions::powell,
            bounds: |n| uniform(n, -4.0, 5.0),
            x_star: |n| vec![0.0; n],
            f_star: Some(|_| 0.0),
            source: OptimumSource::Published,
            counts: None,
        },
        Entry {
            name: "Rastrigin",
            aliases: &[],
            set: TestSet::Hedar,
            dims: DimRule::Range { min: 1, max: None },
            suite_dims: HEDAR_DIMS,
            f: functions::rastrigin,
            bounds: |n| uniform(n, -5.12, 5.12),
            x_star: |n| vec![0.0; n],
            f_star: Some(|_| 0.0),
            source: OptimumSource::Published,
            counts: None,
        },
        Entry {
            name: "Rosenbrock",
            aliases: &[],
            set: TestSet::Hedar,
            dims: DimRule::Range { min: 2, max: None },
            suite_dims: HEDAR_DIMS,
            f: functions::rosenbrock,
            bounds: |n| uniform(n, -5.0, 10.0),
            x_star: |n| vec![1.0; n],
            f_star: Some(|_| 0.0),
            source: OptimumSource::Published,
            counts: None,
        },
        Entry {
            name: "Schwefel",
            aliases: &[],
            set: TestSet::Hedar,
            dims: DimRule::Range { min: 1, max: None },
            suite_dims: HEDAR_DIMS,
            f: functions::schwefel,
            bounds: |n| uniform(n, -500.0, 500.0),
            x_star: |n| vec![SCHWEFEL_X; n],
            f_star: None,
            source: OptimumSource::Computed,
            counts: None,
        },
        Entry {
            name: "Sphere",
            aliases: &[],
            set: TestSet::Hedar,
            dims: DimRule::Range { min: 1, max: None },
            suite_dims: HEDAR_DIMS,
            f: functions::sphere,
            bounds: |n| uniform(n, -5.12, 5.12),
            x_star: |n| vec![0.0; n],
            f_star: Some(|_| 0.0),
            source: OptimumSource::Published,
            counts: None,
        },
        Entry {
            name: "Sum Square",
            aliases: &["sumsquares"],
            set: TestSet::Hedar,
            dims: DimRule::Range { min: 1, max: None },
            suite_dims: HEDAR_DIMS,
            f: functions::sum_squares,
            bounds: |n| uniform(n, -10.0, 10.0),
            x_star: |n| vec![0.0; n],
            f_star: Some(|_| 0.0),
            source: OptimumSource::Published,
            counts: None,
        },
        Entry {
            name: "Trid",
            aliases: &[],
            set: TestSet::Hedar,
            dims: DimRule::Range { min: 2, max: None },
            suite_dims: HEDAR_DIMS,
            f: functions::trid,
            bounds: |n| {
                let s = (n * n) as f64;
                uniform(n, -s, s)
            },
            x_star: |n| (1..=n).map(|i| (i * (n + 1 - i)) as f64).collect(),
            f_star: Some(|n| {
                let n = n as f64;
                -n * (n + 4.0) * (n - 1.0) / 6.0
            }),
            source: OptimumSource::Published,
            counts: None,
        },
        Entry {
            name: "Zakharov",
            aliases: &[],
            set: TestSet::Hedar,
            dims: DimRule::Range { min: 1, max: None },
            suite_dims: HEDAR_DIMS,
            f: functions::zakharov,
            bounds: |n| uniform(n, -5.0, 10.0),
            x_star: |n| vec![0.0; n],
            f_star: Some(|_| 0.0),
            source: OptimumSource::Published,
            counts: None,
        },
    ];
    ENTRIES
}

fn uniform(n: usize, lo: f64, hi: f64) -> (Vec<f64>, Vec<f64>) {
    (vec![lo; n], vec![hi; n])
}

fn canonical_bounds(entry: &Entry, n: usize) -> Bounds {
    let (lower, upper) = (entry.bounds)(n);
    Bounds::new(lower, upper).expect("registry bounds are valid")
}

fn normalize_name(s: &str) -> String {
    s.chars()
        .filter(|c| !matches!(c, ' ' | '-' | '_'))
        .flat_map(char::to_lowercase)
        .collect()
}

fn lookup(name: &str) -> Result<&'static Entry> {
    let key = normalize_name(name);
    registry()
        .iter()
        .find(|e| normalize_name(e.name) == key || e.aliases.iter().any(|a| *a == key))
        .ok_or_else(|| Error::UnknownFunction {
            name: name.to_string(),
            valid: function_names().join(", "),
        })
}

/// Canonical names of every registered function, Jones set first.
pub fn function_names() -> Vec<&'static str> {
    registry().iter().map(|e| e.name).collect()
}

/// Names of one test set, in registry order.
pub fn set_names(set: TestSet) -> Vec<&'static str> {
    registry().iter().filter(|e| e.set == set).map(|e| e.name).collect()
}

/// Shifts symmetric domains whose optimum sits at the origin to
/// `[0.8 lower, 1.2 upper]`, so that the first sample at the center does not
/// land on the optimum. Other domains are returned unchanged.
pub fn adjust_bounds(bounds: &Bounds, x_star: Option<&[f64]>) -> Bounds {
    let symmetric = (0..bounds.dim()).all(|i| bounds.lower()[i] == -bounds.upper()[i]);
    let at_origin = x_star.is_some_and(|x| x.iter().all(|&v| v == 0.0));
    if !(symmetric && at_origin) {
        return bounds.clone();
    }
    let lower = bounds.lower().iter().map(|v| 0.8 * v).collect();
    let upper = bounds.upper().iter().map(|v| 1.2 * v).collect();
    Bounds::new(lower, upper).expect("scaled symmetric bounds stay valid")
}

/// Metadata for `name` at dimension `dim`.
pub fn describe(name: &str, dim: usize) -> Result<TestFunction> {
    let entry = lookup(name)?;
    if !entry.dims.allows(dim) {
        return Err(Error::InvalidDimension {
            name: entry.name.to_string(),
            dim,
            allowed: entry.dims.to_string(),
        });
    }
    let canonical = canonical_bounds(entry, dim);
    let x_star = (entry.x_star)(dim);
    let bounds = adjust_bounds(&canonical, Some(&x_star));
    let f_star = match entry.f_star {
        Some(f) => f(dim),
        None => (entry.f)(&x_star),
    };
    Ok(TestFunction {
        name: entry.name,
        set: entry.set,
        dims: entry.dims,
        dim,
        suite_dims: entry.suite_dims.to_vec(),
        canonical_bounds: canonical,
        bounds,
        f_star,
        x_star: Some(x_star),
        optimum_source: entry.source,
        local_count: entry.counts.map(|c| c.0),
        global_count: entry.counts.map(|c| c.1),
    })
}

/// The problem for `name` at dimension `dim`, over adjusted bounds and
/// carrying its known optimum, plus its metadata.
pub fn get_function(name: &str, dim: usize) -> Result<(Problem, TestFunction)> {
    let meta = describe(name, dim)?;
    let f = lookup(name)?.f;
    let problem = Problem::new(f, meta.bounds.clone()).with_known_optimum(meta.f_star);
    Ok((problem, meta))
}

/// Metadata for every function at its smallest suite dimension.
pub fn catalog() -> Vec<TestFunction> {
    registry()
        .iter()
        .map(|e| describe(e.name, e.suite_dims[0]).expect("suite dims are allowed"))
        .collect()
}
