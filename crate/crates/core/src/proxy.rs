//! Ranking candidates against the annual target and picking a consensus proxy.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{z_normalize_annual, AnnualSeries};
use crate::similarity::{Method, SimilarityConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankEntry {
    pub candidate: String,
    pub distance: f64,
}

/// Candidates ordered by ascending distance under one measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodRanking {
    pub method: Method,
    pub entries: Vec<RankEntry>,
    /// Candidates whose distance was not finite under this measure.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub excluded: Vec<String>,
}

impl MethodRanking {
    pub fn top(&self, k: usize) -> &[RankEntry] {
        &self.entries[..k.min(self.entries.len())]
    }

    pub fn position(&self, candidate: &str) -> Option<usize> {
        self.entries.iter().position(|e| e.candidate == candidate)
    }
}

/// Ranks every candidate against the target under `method`.
///
/// Ties are broken by candidate id, so the order is fully deterministic.
pub fn rank_by_method(
    target: &AnnualSeries,
    candidates: &[AnnualSeries],
    method: Method,
    config: &SimilarityConfig,
) -> Result<MethodRanking> {
    config.validate()?;
    let mut entries = Vec::with_capacity(candidates.len());
    let mut excluded = Vec::new();
    for cand in candidates {
        if cand.years() != target.years() {
            return Err(Error::YearMismatch {
                id: cand.id().to_string(),
                expected: target.years().to_vec(),
                got: cand.years().to_vec(),
            });
        }
        let distance = method.distance(target.values(), cand.values(), config)?;
        if distance.is_finite() {
            entries.push(RankEntry {
                candidate: cand.id().to_string(),
                distance,
            });
        } else {
            excluded.push(cand.id().to_string());
        }
    }
    entries.sort_by(|a, b| {
        a.distance
            .total_cmp(&b.distance)
            .then_with(|| a.candidate.cmp(&b.candidate))
    });
    excluded.sort();
    Ok(MethodRanking {
        method,
        entries,
        excluded,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsensusResult {
    pub winner: String,
    pub k: usize,
    /// Top-k candidates per method, in the order the rankings were given.
    pub top_k: Vec<(Method, Vec<String>)>,
    pub borda: BTreeMap<String, u32>,
    pub top1: BTreeMap<String, u32>,
}

impl ConsensusResult {
    pub fn winner_top1_count(&self) -> u32 {
        self.top1.get(&self.winner).copied().unwrap_or(0)
    }
}

/// Borda aggregation over each method's top `k`.
///
/// Rank `r` earns `k - r + 1` points. The highest total wins; ties go to the
/// candidate ranked first under more methods, then to the smaller id.
pub fn consensus_select(rankings: &[MethodRanking], k: usize) -> Result<ConsensusResult> {
    if rankings.is_empty() {
        return Err(Error::InvalidArgument(
            "consensus needs at least one ranking".into(),
        ));
    }
    if k == 0 {
        return Err(Error::InvalidArgument("k must be >= 1".into()));
    }
    let mut borda: BTreeMap<String, u32> = BTreeMap::new();
    let mut top1: BTreeMap<String, u32> = BTreeMap::new();
    let mut top_k = Vec::with_capacity(rankings.len());
    for ranking in rankings {
        let top = ranking.top(k);
        for (r, entry) in top.iter().enumerate() {
            *borda.entry(entry.candidate.clone()).or_default() += (k - r) as u32;
        }
        if let Some(first) = top.first() {
            *top1.entry(first.candidate.clone()).or_default() += 1;
        }
        top_k.push((
            ranking.method,
            top.iter().map(|e| e.candidate.clone()).collect(),
        ));
    }
    // BTreeMap iteration is by id, so keeping the first maximum breaks the
    // final tie lexicographically.
    let winner = borda
        .iter()
        .map(|(id, &score)| (id, score, top1.get(id).copied().unwrap_or(0)))
        .fold(None::<(&String, u32, u32)>, |best, cur| match best {
            Some(b) if (b.1, b.2) >= (cur.1, cur.2) => Some(b),
            _ => Some(cur),
        })
        .map(|(id, _, _)| id.clone())
        .ok_or_else(|| Error::Data("no candidate appears in any ranking".into()))?;
    Ok(ConsensusResult {
        winner,
        k,
        top_k,
        borda,
        top1,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionOptions {
    pub methods: Vec<Method>,
    pub similarity: SimilarityConfig,
    pub k: usize,
    /// Standardize the target and every candidate before comparing.
    pub normalize: bool,
}

impl Default for SelectionOptions {
    fn default() -> Self {
        Self {
            methods: Method::STANDARD.to_vec(),
            similarity: SimilarityConfig::default(),
            k: 5,
            normalize: true,
        }
    }
}

/// A note attached to a candidate that was kept with a caveat or dropped.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Flag {
    pub candidate: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    pub consensus: ConsensusResult,
    pub rankings: Vec<MethodRanking>,
    pub flags: Vec<Flag>,
}

/// Aligns annualized candidates to the target years, standardizes them when
/// requested, ranks under every method and aggregates.
pub fn select_proxy(
    target: &AnnualSeries,
    candidates: &[AnnualSeries],
    options: &SelectionOptions,
) -> Result<Selection> {
    if options.methods.is_empty() {
        return Err(Error::InvalidArgument(
            "no similarity methods selected".into(),
        ));
    }
    let mut flags = Vec::new();
    let target = if options.normalize {
        z_normalize_annual(target)?.0
    } else {
        target.clone()
    };
    let mut prepared = Vec::with_capacity(candidates.len());
    for cand in candidates {
        let aligned = cand.restrict_to(target.years())?;
        let sparse = aligned.sparse_years();
        if !sparse.is_empty() {
            flags.push(Flag {
                candidate: cand.id().to_string(),
                reason: format!("fewer than 30 observed days in years {sparse:?}"),
            });
        }
        if options.normalize {
            match z_normalize_annual(&aligned) {
                Ok((norm, _)) => prepared.push(norm),
                Err(Error::ZeroVariance { .. }) => flags.push(Flag {
                    candidate: cand.id().to_string(),
                    reason: "constant annual means; excluded".into(),
                }),
                Err(e) => return Err(e),
            }
        } else {
            prepared.push(aligned);
        }
    }
    let rankings = options
        .methods
        .iter()
        .map(|&m| rank_by_method(&target, &prepared, m, &options.similarity))
        .collect::<Result<Vec<_>>>()?;
    for r in &rankings {
        for id in &r.excluded {
            flags.push(Flag {
                candidate: id.clone(),
                reason: format!(
                    "non-finite {} distance; excluded from that ranking",
                    r.method
                ),
            });
        }
    }
    let consensus = consensus_select(&rankings, options.k)?;
    Ok(Selection {
        consensus,
        rankings,
        flags,
    })
}

/// One column per method, `k` rows of candidate ids.
pub fn ranking_table_csv(consensus: &ConsensusResult) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let header: Vec<&str> = consensus.top_k.iter().map(|(m, _)| m.title()).collect();
    w.write_record(&header).map_err(csv_err)?;
    for row in 0..consensus.k {
        let cells: Vec<&str> = consensus
            .top_k
            .iter()
            .map(|(_, ids)| ids.get(row).map_or("", String::as_str))
            .collect();
        w.write_record(&cells).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Data(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Data(e.to_string()))
}

fn csv_err(e: csv::Error) -> Error {
    Error::Data(format!("csv: {e}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ranking(method: Method, ids: &[&str]) -> MethodRanking {
        MethodRanking {
            method,
            entries: ids
                .iter()
                .enumerate()
                .map(|(i, id)| RankEntry {
                    candidate: id.to_string(),
                    distance: i as f64,
                })
                .collect(),
            excluded: vec![],
        }
    }

    fn annual(id: &str, values: &[f64]) -> AnnualSeries {
        let years = (2011..).take(values.len()).collect();
        AnnualSeries::new(id, years, values.to_vec()).unwrap()
    }

    #[test]
    fn single_method_picks_its_first() {
        let r = ranking(Method::Dtw, &["b", "a", "c"]);
        let c = consensus_select(&[r], 5).unwrap();
        assert_eq!(c.winner, "b");
    }

    #[test]
    fn unanimous_winner() {
        let rs: Vec<MethodRanking> = Method::STANDARD
            .iter()
            .map(|&m| ranking(m, &["x", "y", "z", "u", "v", "w"]))
            .collect();
        let c = consensus_select(&rs, 5).unwrap();
        assert_eq!(c.winner, "x");
        assert_eq!(c.borda["x"], 25);
        assert_eq!(c.winner_top1_count(), 5);
        assert!(!c.borda.contains_key("w"));
    }

    #[test]
    fn hand_evaluated_borda() {
        let rs = [
            ranking(Method::Dtw, &["A", "B"]),
            ranking(Method::Lcss, &["B", "A"]),
            ranking(Method::Edr, &["A", "C"]),
        ];
        let c = consensus_select(&rs, 2).unwrap();
        assert_eq!(c.winner, "A");
        assert_eq!(c.borda["A"], 5);
        assert_eq!(c.borda["B"], 3);
        assert_eq!(c.borda["C"], 1);
    }

    #[test]
    fn ties_use_top1_then_id() {
        // A: 2 + 0 + 1 = 3 with one first place; B: 1 + 2 + 0 = 3 with one;
        // C: 0 + 1 + 2 = 3 with one. All tied: smallest id.
        let rs = [
            ranking(Method::Dtw, &["A", "B"]),
            ranking(Method::Lcss, &["B", "C"]),
            ranking(Method::Edr, &["C", "A"]),
        ];
        assert_eq!(consensus_select(&rs, 2).unwrap().winner, "A");
        // A and B both score 4; B has the only first place among them.
        let rs = [
            ranking(Method::Dtw, &["B", "A", "X"]),
            ranking(Method::Lcss, &["C", "A", "B"]),
        ];
        let c = consensus_select(&rs, 3).unwrap();
        assert_eq!((c.borda["A"], c.borda["B"]), (4, 4));
        assert_eq!(c.winner, "B");
        let rs = [
            ranking(Method::Dtw, &["D", "Z"]),
            ranking(Method::Lcss, &["A", "Z"]),
            ranking(Method::Edr, &["Z", "A"]),
        ];
        // A: 2+1 = 3, Z: 1+1+2 = 4
        assert_eq!(consensus_select(&rs, 2).unwrap().winner, "Z");
        let rs = [
            ranking(Method::Dtw, &["D", "A"]),
            ranking(Method::Lcss, &["D", "A"]),
            ranking(Method::Edr, &["A", "B"]),
            ranking(Method::Hausdorff, &["A", "B"]),
            ranking(Method::SoftDtw, &["B", "D"]),
        ];
        // A: 1+1+2+2 = 6 (two firsts), D: 2+2+1 = 5.
        assert_eq!(consensus_select(&rs, 2).unwrap().winner, "A");
    }

    #[test]
    fn rejects_empty_input() {
        assert!(consensus_select(&[], 5).is_err());
        assert!(consensus_select(&[ranking(Method::Dtw, &["a"])], 0).is_err());
    }

    #[test]
    fn identical_candidate_ranks_first_everywhere() {
        let target = annual("t", &[0.1, 0.5, -0.3, 1.2, 0.9]);
        let twin = annual("twin", target.values());
        let other = annual("other", &[1.0, -1.0, 1.0, -1.0, 1.0]);
        for m in Method::STANDARD {
            let r = rank_by_method(
                &target,
                &[other.clone(), twin.clone()],
                m,
                &SimilarityConfig::default(),
            )
            .unwrap();
            assert_eq!(r.entries[0].candidate, "twin", "{m}");
            if m != Method::SoftDtw {
                assert_eq!(r.entries[0].distance, 0.0);
            }
        }
        let empty =
            rank_by_method(&target, &[], Method::Dtw, &SimilarityConfig::default()).unwrap();
        assert!(empty.entries.is_empty());
    }

    #[test]
    fn year_mismatch_names_candidate() {
        let target = annual("t", &[1.0, 2.0, 3.0]);
        let short = annual("short_one", &[1.0, 2.0]);
        let err = rank_by_method(&target, &[short], Method::Dtw, &SimilarityConfig::default())
            .unwrap_err();
        assert!(err.to_string().contains("short_one"));
    }

    #[test]
    fn equal_distances_sorted_by_id() {
        let target = annual("t", &[0.0, 1.0, 2.0]);
        let r = rank_by_method(
            &target,
            &[
                annual("zeta", &[0.0, 1.0, 2.0]),
                annual("alpha", &[0.0, 1.0, 2.0]),
            ],
            Method::Edr,
            &SimilarityConfig::default(),
        )
        .unwrap();
        assert_eq!(r.entries[0].candidate, "alpha");
    }

    #[test]
    fn table_shape() {
        let rs: Vec<MethodRanking> = Method::STANDARD
            .iter()
            .map(|&m| ranking(m, &["a", "b", "c"]))
            .collect();
        let c = consensus_select(&rs, 5).unwrap();
        let csv = ranking_table_csv(&c).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 6);
        assert_eq!(
            lines[0],
            "Soft-DTW Distance,DTW Distance,LCSS,edr,hausdorff"
        );
        assert_eq!(lines[1], "a,a,a,a,a");
        assert_eq!(lines[5], ",,,,");
    }
}
