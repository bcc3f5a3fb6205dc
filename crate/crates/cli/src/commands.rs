use std::io::BufRead;
use std::path::Path;

use anyhow::{bail, Context, Result};
use rekindle_core::eval::load_fixtures;
use rekindle_core::retrieval::load_corpus;
use rekindle_core::text::{BlendedRelevance, CorpusStats};
use rekindle_core::{
    build_index, rank_with, respond, run_eval, ConversationSession, DialogueError, Group, RankMethod, RankParams,
    RerankState, Resources, ResponseMode, ResponseTrace, Speaker,
};
use serde::Serialize;

/// Builds the index for `corpus` and writes it as JSON. Returns the pair count.
pub fn index(corpus: &Path, out: &Path) -> Result<usize> {
    let pairs = load_corpus(corpus).with_context(|| format!("loading corpus {}", corpus.display()))?;
    let index = build_index(pairs)?;
    index.save(out).with_context(|| format!("writing {}", out.display()))?;
    Ok(index.pairs().len())
}

/// Parses a `respond` transcript: one utterance per line, optionally prefixed
/// with `human\t` or `computer\t`. The last line is the new human utterance;
/// unprefixed earlier lines alternate speakers backwards from it.
pub fn parse_transcript(input: impl BufRead) -> Result<(ConversationSession, String)> {
    let mut lines = Vec::new();
    for line in input.lines() {
        let line = line?;
        if !line.trim().is_empty() {
            lines.push(line);
        }
    }
    let Some(last) = lines.pop() else {
        bail!("no utterance on stdin");
    };
    let (_, utterance) = split_speaker(&last);
    let n = lines.len();
    let mut session = ConversationSession::new("cli");
    for (i, line) in lines.iter().enumerate() {
        let (speaker, text) = split_speaker(line);
        let default = if (n - i) % 2 == 1 { Speaker::Computer } else { Speaker::Human };
        session.push(speaker.unwrap_or(default), text);
    }
    Ok((session, utterance.to_string()))
}

fn split_speaker(line: &str) -> (Option<Speaker>, &str) {
    if let Some(rest) = line.strip_prefix("human\t") {
        (Some(Speaker::Human), rest)
    } else if let Some(rest) = line.strip_prefix("computer\t") {
        (Some(Speaker::Computer), rest)
    } else {
        (None, line)
    }
}

#[derive(Debug, Serialize)]
pub struct RespondOutput<'a> {
    pub reply: &'a str,
    pub mode: ResponseMode,
    pub trace: &'a ResponseTrace,
}

#[derive(Debug, Serialize)]
pub struct RespondFailure<'a> {
    pub error: String,
    pub trace: Option<&'a ResponseTrace>,
}

pub enum RespondOutcome {
    Reply(String),
    /// Printed to stdout, but the command fails.
    NoReply(String),
}

pub fn respond_once(resources: &Resources, input: impl BufRead) -> Result<RespondOutcome> {
    let (mut session, utterance) = parse_transcript(input)?;
    match respond(&mut session, &utterance, resources) {
        Ok((reply, trace)) => {
            let out = RespondOutput { reply: &reply, mode: trace.mode, trace: &trace };
            Ok(RespondOutcome::Reply(pretty(&out)?))
        }
        Err(DialogueError::NoReply { trace }) => {
            let out = RespondFailure { error: "no candidate reply found".into(), trace: Some(&trace) };
            Ok(RespondOutcome::NoReply(pretty(&out)?))
        }
        Err(e) => Err(e.into()),
    }
}

pub struct EvalOutput {
    pub table: String,
    pub json: String,
}

pub fn eval(fixtures: &Path, methods: &[RankMethod], params: &RankParams) -> Result<EvalOutput> {
    let instances = load_fixtures(fixtures).with_context(|| format!("loading fixtures {}", fixtures.display()))?;
    let report = run_eval(&instances, methods, &Group::ALL, params, &BlendedRelevance::default())?;
    Ok(EvalOutput { table: report.to_table(), json: report.to_json() })
}

#[derive(Debug, Serialize)]
pub struct RerankRow<'a> {
    pub rank: usize,
    pub index: usize,
    pub score: f64,
    pub text: &'a str,
}

#[derive(Debug, Serialize)]
pub struct RerankOutput<'a> {
    pub method: RankMethod,
    pub ranking: Vec<RerankRow<'a>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub global_iterations: Option<usize>,
}

fn read_lines(path: &Path) -> Result<Vec<String>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let lines: Vec<String> = text.lines().filter(|l| !l.trim().is_empty()).map(str::to_string).collect();
    if lines.is_empty() {
        bail!("{} has no lines", path.display());
    }
    Ok(lines)
}

/// Ranks the lines of `candidates` against the lines of `context`.
pub fn rerank(context: &Path, candidates: &Path, method: RankMethod, params: &RankParams) -> Result<String> {
    let context = read_lines(context)?;
    let candidates = read_lines(candidates)?;
    let stats = CorpusStats::from_documents(context.iter().chain(&candidates).map(String::as_str));
    let state = RerankState::from_texts(context, candidates.clone(), &stats, &BlendedRelevance::default())?;
    let ranked = rank_with(method, &state, params)?;
    let ranking = ranked
        .entries
        .iter()
        .enumerate()
        .map(|(rank, e)| RerankRow { rank: rank + 1, index: e.index, score: e.score, text: &candidates[e.index] })
        .collect();
    let global_iterations = (!ranked.trace.is_empty()).then_some(ranked.trace.len());
    pretty(&RerankOutput { method, ranking, global_iterations })
}

fn pretty<T: Serialize>(v: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn transcript_alternates_back_from_the_utterance() {
        let (s, u) = parse_transcript("a\nb\nc\nErrr\n".as_bytes()).unwrap();
        assert_eq!(u, "Errr");
        let speakers: Vec<Speaker> = s.utterances().iter().map(|u| u.speaker).collect();
        assert_eq!(speakers, vec![Speaker::Computer, Speaker::Human, Speaker::Computer]);
    }

    #[test]
    fn transcript_prefixes() {
        let (s, u) = parse_transcript("human\thi\n\nhuman\tagain\nhuman\tErrr".as_bytes()).unwrap();
        assert_eq!(u, "Errr");
        assert!(s.utterances().iter().all(|u| u.speaker == Speaker::Human));
        assert_eq!(s.utterances()[1].text, "again");
        assert!(parse_transcript("\n\n".as_bytes()).is_err());
    }
}
