//! Table reproduction: runs the see-saw for each embedded target row and compares.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::local::local_bound;
use crate::quantum::state_factory;
use crate::scenario::{catalog, catalog_any_k, parse_expression, BellExpression, Comparator};
use crate::seesaw::{seesaw, SeesawConfig, SeesawMode};

const TARGETS_JSON: &str = include_str!("../data/targets.json");

/// Reads an inequality in the bracket text format.
pub fn parse_inequality_file(path: &Path) -> Result<BellExpression> {
    parse_expression(&std::fs::read_to_string(path)?)
}

/// `catalog:<name>:<K>` or a path to a text file.
///
/// Catalog entries outside their published K range are built anyway, with the
/// bound replaced by the enumerated local bound.
pub fn resolve_inequality(spec: &str) -> Result<BellExpression> {
    let Some(rest) = spec.strip_prefix("catalog:") else {
        return parse_inequality_file(Path::new(spec));
    };
    let (name, k) = rest
        .rsplit_once(':')
        .ok_or_else(|| Error::InvalidConfig(format!("expected catalog:<name>:<K>, got `{spec}`")))?;
    let k: usize = k
        .parse()
        .map_err(|_| Error::InvalidConfig(format!("bad output count `{k}`")))?;
    match catalog(name, k) {
        Err(Error::UnsupportedOutputs { .. }) => {
            let (expr, stated) = catalog_any_k(name, k)?;
            if stated {
                Ok(expr)
            } else {
                let bound = local_bound(&expr)?.value;
                Ok(expr.with_bound(bound))
            }
        }
        other => other,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum TableId {
    I,
    II,
    III,
    IV,
    V,
}

impl TableId {
    pub const ALL: [TableId; 5] = [TableId::I, TableId::II, TableId::III, TableId::IV, TableId::V];
}

impl fmt::Display for TableId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl FromStr for TableId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TableId::ALL
            .into_iter()
            .find(|t| t.to_string().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidConfig(format!("unknown table `{s}` (expected I, II, III, IV or V)")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tier {
    Baseline,
    /// Deep optima: the row passes when it does at least as well as `baseline_value`.
    Extended,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Target {
    pub table: TableId,
    pub label: String,
    pub ineq: String,
    pub k: usize,
    pub dims: Vec<usize>,
    /// Fixed state for measurement-only optimization.
    pub state: Option<String>,
    pub value: f64,
    pub visibility: Option<f64>,
    pub ranks: Vec<usize>,
    pub value_tol: f64,
    pub visibility_tol: f64,
    pub tier: Tier,
    pub restarts: usize,
    pub baseline_value: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TargetSet {
    pub version: u32,
    pub targets: Vec<Target>,
}

pub fn embedded_targets() -> TargetSet {
    serde_json::from_str(TARGETS_JSON).expect("embedded targets parse")
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(Self::Json),
            "csv" => Ok(Self::Csv),
            _ => Err(Error::InvalidConfig(format!("unknown format `{s}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportSpec {
    pub table: TableId,
    /// Inclusive; rows outside are dropped. An empty range gives an empty report.
    pub k_range: Option<(usize, usize)>,
    /// Only rows at these dimensions.
    pub dims: Option<Vec<usize>>,
    /// Overrides every row's restart budget.
    pub restarts: Option<usize>,
    /// Rows not started before this many seconds are reported as not run.
    pub time_cap_secs: Option<f64>,
    pub seed: u64,
    pub extended: bool,
    pub format: OutputFormat,
    pub output: Option<PathBuf>,
}

impl ReportSpec {
    pub fn new(table: TableId) -> Self {
        Self {
            table,
            k_range: None,
            dims: None,
            restarts: None,
            time_cap_secs: None,
            seed: 0,
            extended: false,
            format: OutputFormat::Json,
            output: None,
        }
    }

    pub fn targets(&self) -> Vec<Target> {
        embedded_targets()
            .targets
            .into_iter()
            .filter(|t| t.table == self.table)
            .filter(|t| self.k_range.is_none_or(|(lo, hi)| (lo..=hi).contains(&t.k)))
            .filter(|t| self.dims.as_ref().is_none_or(|d| *d == t.dims))
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowStatus {
    Pass,
    Fail,
    /// Extended row without `extended` set.
    Skipped,
    /// Time cap reached before the row started.
    NotRun,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub label: String,
    pub ineq: String,
    pub k: usize,
    pub dims: Vec<usize>,
    pub state: Option<String>,
    pub tier: Tier,
    pub restarts: usize,
    pub seed: u64,
    pub value: Option<f64>,
    pub visibility: Option<f64>,
    pub ranks: Option<Vec<usize>>,
    pub runtime_secs: Option<f64>,
    pub target_value: f64,
    pub target_visibility: Option<f64>,
    pub target_ranks: Vec<usize>,
    pub value_ok: Option<bool>,
    pub visibility_ok: Option<bool>,
    /// Whether the published value itself was reached (informative for extended rows).
    pub target_reached: Option<bool>,
    pub status: RowStatus,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub version: String,
    pub seed: u64,
    pub config_hash: String,
    pub table: TableId,
    pub incomplete: bool,
    pub rows: Vec<ReportRow>,
}

/// Hex SHA-256 of the JSON encoding of `config`.
pub fn config_hash<T: Serialize>(config: &T) -> String {
    let bytes = serde_json::to_vec(config).expect("config serializes");
    Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn run_row(target: &Target, spec: &ReportSpec) -> Result<ReportRow> {
    let expr = catalog(&target.ineq, target.k)?;
    let restarts = spec.restarts.unwrap_or(target.restarts);
    let mut config = SeesawConfig::new(target.dims.clone())
        .with_restarts(restarts)
        .with_seed(spec.seed);
    if let Some(name) = &target.state {
        let ket = state_factory(name, target.k)?;
        config.dims = ket.dims().to_vec();
        config.mode = SeesawMode::FixedState(ket);
    }
    let start = Instant::now();
    let result = seesaw(&expr, &config)?;
    let runtime = start.elapsed().as_secs_f64();

    let reached = (result.value - target.value).abs() <= target.value_tol;
    let visibility_ok = target
        .visibility
        .map(|v| (result.visibility.visibility - v).abs() <= target.visibility_tol);
    let value_ok = match (target.tier, target.baseline_value) {
        (Tier::Extended, Some(base)) => {
            let cmp = expr.comparator();
            let slack = match cmp {
                Comparator::AtLeast => base + target.value_tol,
                Comparator::AtMost => base - target.value_tol,
            };
            !cmp.better(slack, result.value)
        }
        _ => reached,
    };
    let pass = match target.tier {
        Tier::Baseline => value_ok && visibility_ok.unwrap_or(true),
        Tier::Extended => value_ok,
    };
    Ok(ReportRow {
        value: Some(result.value),
        visibility: Some(result.visibility.visibility),
        ranks: Some(result.ranks),
        runtime_secs: Some(runtime),
        value_ok: Some(value_ok),
        visibility_ok,
        target_reached: Some(reached),
        status: if pass { RowStatus::Pass } else { RowStatus::Fail },
        ..pending_row(target, spec, RowStatus::NotRun)
    })
}

fn pending_row(target: &Target, spec: &ReportSpec, status: RowStatus) -> ReportRow {
    ReportRow {
        label: target.label.clone(),
        ineq: target.ineq.clone(),
        k: target.k,
        dims: target.dims.clone(),
        state: target.state.clone(),
        tier: target.tier,
        restarts: spec.restarts.unwrap_or(target.restarts),
        seed: spec.seed,
        value: None,
        visibility: None,
        ranks: None,
        runtime_secs: None,
        target_value: target.value,
        target_visibility: target.visibility,
        target_ranks: target.ranks.clone(),
        value_ok: None,
        visibility_ok: None,
        target_reached: None,
        status,
    }
}

pub fn run_report(spec: &ReportSpec) -> Result<Report> {
    let start = Instant::now();
    let mut rows = Vec::new();
    let mut incomplete = false;
    for target in spec.targets() {
        if target.tier == Tier::Extended && !spec.extended {
            rows.push(pending_row(&target, spec, RowStatus::Skipped));
            continue;
        }
        if spec.time_cap_secs.is_some_and(|cap| start.elapsed().as_secs_f64() >= cap) {
            incomplete = true;
            rows.push(pending_row(&target, spec, RowStatus::NotRun));
            continue;
        }
        rows.push(run_row(&target, spec)?);
    }
    Ok(Report {
        version: env!("CARGO_PKG_VERSION").to_string(),
        seed: spec.seed,
        config_hash: config_hash(spec),
        table: spec.table,
        incomplete,
        rows,
    })
}

#[derive(Serialize, Deserialize)]
struct CsvRow {
    version: String,
    seed: u64,
    config_hash: String,
    table: TableId,
    label: String,
    ineq: String,
    k: usize,
    dims: String,
    state: Option<String>,
    tier: Tier,
    restarts: usize,
    value: Option<f64>,
    visibility: Option<f64>,
    ranks: Option<String>,
    runtime_secs: Option<f64>,
    target_value: f64,
    target_visibility: Option<f64>,
    target_ranks: String,
    value_ok: Option<bool>,
    visibility_ok: Option<bool>,
    target_reached: Option<bool>,
    status: RowStatus,
}

fn join(v: &[usize]) -> String {
    v.iter().map(usize::to_string).collect::<Vec<_>>().join(";")
}

impl Report {
    /// 0 when every run row passed, 1 when a baseline row failed or was not run,
    /// 2 when only extended rows failed.
    pub fn exit_code(&self) -> i32 {
        let unmet = |tier: Tier| {
            self.rows
                .iter()
                .any(|r| r.tier == tier && matches!(r.status, RowStatus::Fail | RowStatus::NotRun))
        };
        if unmet(Tier::Baseline) {
            1
        } else if unmet(Tier::Extended) {
            2
        } else {
            0
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &self.rows {
            w.serialize(CsvRow {
                version: self.version.clone(),
                seed: self.seed,
                config_hash: self.config_hash.clone(),
                table: self.table,
                label: r.label.clone(),
                ineq: r.ineq.clone(),
                k: r.k,
                dims: join(&r.dims),
                state: r.state.clone(),
                tier: r.tier,
                restarts: r.restarts,
                value: r.value,
                visibility: r.visibility,
                ranks: r.ranks.as_deref().map(join),
                runtime_secs: r.runtime_secs,
                target_value: r.target_value,
                target_visibility: r.target_visibility,
                target_ranks: join(&r.target_ranks),
                value_ok: r.value_ok,
                visibility_ok: r.visibility_ok,
                target_reached: r.target_reached,
                status: r.status,
            })
            .map_err(|e| Error::InvalidConfig(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| Error::InvalidConfig(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
    }

    pub fn render(&self, format: OutputFormat) -> Result<String> {
        match format {
            OutputFormat::Json => self.to_json(),
            OutputFormat::Csv => self.to_csv(),
        }
    }

    pub fn write(&self, path: &Path, format: OutputFormat) -> Result<()> {
        std::fs::write(path, self.render(format)?)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn targets_reference_known_entries() {
        let set = embedded_targets();
        assert_eq!(set.version, 1);
        for t in &set.targets {
            catalog(&t.ineq, t.k).unwrap();
            if let Some(s) = &t.state {
                assert_eq!(state_factory(s, t.k).unwrap().dims(), t.dims.as_slice(), "{}", t.label);
            }
            assert_eq!(t.tier == Tier::Extended, t.baseline_value.is_some(), "{}", t.label);
        }
        for table in TableId::ALL {
            assert!(set.targets.iter().any(|t| t.table == table));
        }
    }

    #[test]
    fn inequality_specs() {
        assert_eq!(resolve_inequality("catalog:mermin-cglmp:3").unwrap(), catalog("mermin-cglmp", 3).unwrap());
        let sym4 = resolve_inequality("catalog:mermin-sym:4").unwrap();
        assert_eq!(sym4.bound(), crate::scenario::Rational::from_integer(-2));
        assert!(resolve_inequality("catalog:nope:3").is_err());
        assert!(resolve_inequality("catalog:mermin-cglmp").is_err());

        let dir = std::env::temp_dir().join(format!("bellkit-ineq-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("s3.txt");
        let expr = catalog("mermin-cglmp", 3).unwrap();
        std::fs::write(&path, crate::scenario::serialize_expression(&expr)).unwrap();
        assert_eq!(resolve_inequality(path.to_str().unwrap()).unwrap(), expr);
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn table_ids_parse() {
        assert_eq!("iv".parse::<TableId>().unwrap(), TableId::IV);
        assert!("VI".parse::<TableId>().is_err());
    }

    #[test]
    fn empty_range_gives_empty_report() {
        let spec = ReportSpec {
            k_range: Some((5, 4)),
            ..ReportSpec::new(TableId::V)
        };
        let r = run_report(&spec).unwrap();
        assert!(r.rows.is_empty());
        assert_eq!(r.exit_code(), 0);
        assert_eq!(r.config_hash.len(), 64);
    }

    #[test]
    fn csv_and_json_carry_the_same_values() {
        let spec = ReportSpec {
            k_range: Some((2, 2)),
            restarts: Some(5),
            seed: 3,
            ..ReportSpec::new(TableId::V)
        };
        let r = run_report(&spec).unwrap();
        assert_eq!(r.rows.len(), 1);
        let json: Report = serde_json::from_str(&r.to_json().unwrap()).unwrap();
        let csv_text = r.to_csv().unwrap();
        let mut reader = csv::Reader::from_reader(csv_text.as_bytes());
        let rows: Vec<CsvRow> = reader.deserialize().collect::<std::result::Result<_, _>>().unwrap();
        assert_eq!(rows.len(), 1);
        let (a, b) = (&json.rows[0], &rows[0]);
        assert_eq!(a.value, b.value);
        assert_eq!(a.visibility, b.visibility);
        assert_eq!(a.runtime_secs, b.runtime_secs);
        assert_eq!(a.ranks.as_deref().map(join), b.ranks);
        assert_eq!(a.status, b.status);
        assert_eq!(json.config_hash, b.config_hash);
    }

    #[test]
    fn extended_rows_skip_without_flag() {
        let spec = ReportSpec {
            k_range: Some((4, 6)),
            ..ReportSpec::new(TableId::V)
        };
        let r = run_report(&spec).unwrap();
        assert_eq!(r.rows.len(), 3);
        assert!(r.rows.iter().all(|row| row.status == RowStatus::Skipped));
        assert_eq!(r.exit_code(), 0);
    }

    #[test]
    fn time_cap_marks_rows_not_run() {
        let spec = ReportSpec {
            k_range: Some((2, 3)),
            time_cap_secs: Some(0.0),
            ..ReportSpec::new(TableId::V)
        };
        let r = run_report(&spec).unwrap();
        assert!(r.incomplete);
        assert!(r.rows.iter().all(|row| row.status == RowStatus::NotRun));
        assert_eq!(r.exit_code(), 1);
    }
}
