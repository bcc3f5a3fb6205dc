//! Ranking metrics and the grouped comparison of ranking methods.
//!
//! Fixture files hold one JSON object per line:
//!
//! ```json
//! {"id": "walle-1", "group": "introducing",
//!  "context": ["以后叫你伊娃。", "...", "啊…"],
//!  "candidates": [{"text": "我不是瓦力，我没有伊娃", "label": 1}, ...],
//!  "entities": ["伊娃"]}
//! ```
//!
//! `group` is `introducing` (candidates retrieved through entity expansion)
//! or `non_introducing` (context-only candidates). MAP and nDCG depend on
//! the candidate pool, so the report never averages across groups.

use std::collections::BTreeMap;
use std::fmt;
use std::fmt::Write as _;
use std::io::BufRead;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ranking::{rank_with, RankError, RankMethod, RankParams, RerankState};
use crate::text::{CorpusStats, RelevanceScorer};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("ranked id {0} has no label")]
    Unlabeled(usize),
    #[error("empty ranking")]
    EmptyRanking,
    #[error("no fixtures to evaluate")]
    NoFixtures,
    #[error("unknown group `{0}`")]
    UnknownGroup(String),
    #[error("fixture line {line}: {message}")]
    Fixture { line: usize, message: String },
    #[error("instance {id}: {source}")]
    Rank {
        id: String,
        #[source]
        source: RankError,
    },
    #[error(transparent)]
    Method(#[from] RankError),
    #[error("reading fixtures: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Group {
    NonIntroducing,
    Introducing,
}

impl Group {
    pub const ALL: [Group; 2] = [Group::NonIntroducing, Group::Introducing];

    pub fn label(self) -> &'static str {
        match self {
            Self::NonIntroducing => "non_introducing",
            Self::Introducing => "introducing",
        }
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Group {
    type Err = EvalError;

    fn from_str(s: &str) -> Result<Self, EvalError> {
        Self::ALL.into_iter().find(|g| g.label() == s).ok_or_else(|| EvalError::UnknownGroup(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledCandidate {
    pub text: String,
    /// 1 appropriate, 0 inappropriate.
    pub label: u8,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledInstance {
    #[serde(default)]
    pub id: String,
    pub group: Group,
    pub context: Vec<String>,
    pub candidates: Vec<LabeledCandidate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub entities: Option<Vec<String>>,
}

impl LabeledInstance {
    fn validate(&self) -> Result<(), String> {
        if self.context.is_empty() {
            return Err("context is empty".into());
        }
        if self.candidates.is_empty() {
            return Err("no candidates".into());
        }
        if let Some(c) = self.candidates.iter().find(|c| c.label > 1) {
            return Err(format!("label {} is not 0 or 1", c.label));
        }
        Ok(())
    }
}

pub fn parse_fixtures(reader: impl BufRead) -> Result<Vec<LabeledInstance>, EvalError> {
    let mut out = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fixture = |message: String| EvalError::Fixture { line: idx + 1, message };
        let mut inst: LabeledInstance = serde_json::from_str(&line).map_err(|e| fixture(e.to_string()))?;
        inst.validate().map_err(fixture)?;
        if inst.id.is_empty() {
            inst.id = format!("line-{}", idx + 1);
        }
        out.push(inst);
    }
    Ok(out)
}

pub fn load_fixtures(path: impl AsRef<Path>) -> Result<Vec<LabeledInstance>, EvalError> {
    let file = std::fs::File::open(path)?;
    parse_fixtures(std::io::BufReader::new(file))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub p_at_1: f64,
    pub average_precision: f64,
    pub ndcg: f64,
}

/// p@1, average precision and nDCG of one ranked list with binary labels.
///
/// Lists without any relevant item score 0 on every metric. nDCG uses the
/// whole list with gain = label and discount `1 / log2(rank + 1)`.
pub fn compute_metrics(ranking: &[usize], labels: &BTreeMap<usize, u8>) -> Result<Metrics, EvalError> {
    if ranking.is_empty() {
        return Err(EvalError::EmptyRanking);
    }
    let rels = ranking
        .iter()
        .map(|id| labels.get(id).map(|&l| f64::from(l)).ok_or(EvalError::Unlabeled(*id)))
        .collect::<Result<Vec<f64>, _>>()?;

    let num_relevant = rels.iter().filter(|&&r| r > 0.0).count();
    if num_relevant == 0 {
        return Ok(Metrics { p_at_1: 0.0, average_precision: 0.0, ndcg: 0.0 });
    }
    let mut hits = 0.0;
    let mut precision_sum = 0.0;
    for (k, r) in rels.iter().enumerate() {
        if *r > 0.0 {
            hits += 1.0;
            precision_sum += hits / (k + 1) as f64;
        }
    }
    let dcg = |gains: &[f64]| -> f64 { gains.iter().enumerate().map(|(k, g)| g / ((k + 2) as f64).log2()).sum() };
    let mut ideal = rels.clone();
    ideal.sort_by(|a, b| b.total_cmp(a));
    Ok(Metrics {
        p_at_1: rels[0],
        average_precision: precision_sum / num_relevant as f64,
        ndcg: dcg(&rels) / dcg(&ideal),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub group: Group,
    pub method: RankMethod,
    pub instances: usize,
    pub p_at_1: f64,
    pub map: f64,
    pub ndcg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub rows: Vec<ReportRow>,
}

impl MetricReport {
    pub fn row(&self, group: Group, method: RankMethod) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.group == group && r.method == method)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{:<16} {:<20} {:>4} {:>7} {:>7} {:>7}", "Group", "Method", "n", "p@1", "MAP", "nDCG");
        let mut last_group = None;
        for r in &self.rows {
            if last_group.is_some_and(|g| g != r.group) {
                let _ = writeln!(out, "{}", "-".repeat(66));
            }
            last_group = Some(r.group);
            let _ = writeln!(
                out,
                "{:<16} {:<20} {:>4} {:>7.4} {:>7.4} {:>7.4}",
                r.group.label(),
                r.method.display_name(),
                r.instances,
                r.p_at_1,
                r.map,
                r.ndcg
            );
        }
        out
    }
}

/// Reranks one labeled instance. tf·idf statistics come from the instance's
/// own context and candidate texts.
pub fn evaluate_instance(
    inst: &LabeledInstance,
    method: RankMethod,
    params: &RankParams,
    scorer: &dyn RelevanceScorer,
) -> Result<Metrics, EvalError> {
    let texts: Vec<String> = inst.candidates.iter().map(|c| c.text.clone()).collect();
    let stats = CorpusStats::from_documents(inst.context.iter().chain(&texts).map(String::as_str));
    let rank_err = |source| EvalError::Rank { id: inst.id.clone(), source };
    let state = RerankState::from_texts(inst.context.clone(), texts, &stats, scorer).map_err(rank_err)?;
    let ranking = rank_with(method, &state, params).map_err(rank_err)?;
    let labels: BTreeMap<usize, u8> = inst.candidates.iter().enumerate().map(|(i, c)| (i, c.label)).collect();
    compute_metrics(&ranking.order(), &labels)
}

/// Averages the three metrics per (group, method), groups outermost.
pub fn run_eval(
    fixtures: &[LabeledInstance],
    methods: &[RankMethod],
    groups: &[Group],
    params: &RankParams,
    scorer: &dyn RelevanceScorer,
) -> Result<MetricReport, EvalError> {
    if fixtures.is_empty() {
        return Err(EvalError::NoFixtures);
    }
    let mut rows = Vec::new();
    for &group in groups {
        let members: Vec<&LabeledInstance> = fixtures.iter().filter(|i| i.group == group).collect();
        for &method in methods {
            let (mut p1, mut map, mut ndcg) = (0.0, 0.0, 0.0);
            for inst in &members {
                let m = evaluate_instance(inst, method, params, scorer)?;
                p1 += m.p_at_1;
                map += m.average_precision;
                ndcg += m.ndcg;
            }
            let n = members.len();
            let mean = |s: f64| if n == 0 { 0.0 } else { s / n as f64 };
            rows.push(ReportRow { group, method, instances: n, p_at_1: mean(p1), map: mean(map), ndcg: mean(ndcg) });
        }
    }
    Ok(MetricReport { rows })
}
