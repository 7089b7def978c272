//! Adaptive transmission policy: probe a set of candidate configurations over
//! scheduled packets, measure per-candidate BER, and pick the configuration
//! for future transmission. Feedback is modeled as ideal and instantaneous.

use crate::error::{McdmError, Result};
use crate::transmitter::FrameConfig;

/// One probe assignment: packets `packets` (1-based, half-open) use `config`.
#[derive(Debug, Clone)]
pub struct ScheduleEntry {
    pub packets: std::ops::Range<usize>,
    pub config: FrameConfig,
}

/// Contiguous, non-overlapping probe schedule covering packets 1..=N.
#[derive(Debug, Clone)]
pub struct ProbeSchedule {
    pub entries: Vec<ScheduleEntry>,
}

impl ProbeSchedule {
    pub fn n_packets(&self) -> usize {
        self.entries.last().map(|e| e.packets.end - 1).unwrap_or(0)
    }

    /// The candidate probed by 1-based packet index `i`, if scheduled.
    pub fn candidate_for(&self, i: usize) -> Option<&FrameConfig> {
        self.entries.iter().find(|e| e.packets.contains(&i)).map(|e| &e.config)
    }
}

/// Split `n_packets` probes evenly over the candidates, remainder to the
/// first. Four candidates over ten packets gives the 4/2/2/2 split.
pub fn default_schedule(candidates: &[FrameConfig], n_packets: usize) -> Result<ProbeSchedule> {
    if candidates.is_empty() {
        return Err(McdmError::Config("candidate list must not be empty".into()));
    }
    if n_packets < candidates.len() {
        return Err(McdmError::Config(format!(
            "{} probe packets cannot cover {} candidates",
            n_packets,
            candidates.len()
        )));
    }
    let base = n_packets / candidates.len();
    let rem = n_packets % candidates.len();
    let mut entries = Vec::with_capacity(candidates.len());
    let mut next = 1usize;
    for (i, config) in candidates.iter().enumerate() {
        let count = base + if i == 0 { rem } else { 0 };
        entries.push(ScheduleEntry { packets: next..next + count, config: config.clone() });
        next += count;
    }
    Ok(ProbeSchedule { entries })
}

/// Measured probe outcome for one candidate.
#[derive(Debug, Clone)]
pub struct ProbeResult {
    pub config: FrameConfig,
    pub bit_errors: u64,
    pub bits: u64,
}

impl ProbeResult {
    pub fn ber(&self) -> f64 {
        self.bit_errors as f64 / self.bits as f64
    }
}

/// Decision record: the chosen configuration, every candidate's measured BER,
/// and the argmin rationale.
#[derive(Debug, Clone)]
pub struct AdaptationDecision {
    pub chosen: FrameConfig,
    pub per_candidate_ber: Vec<(usize, f64)>,
    pub rationale: String,
}

/// Pick the candidate with the minimum measured BER; ties break to the
/// larger subcarrier count.
pub fn select_config(probe_results: &[ProbeResult]) -> Result<AdaptationDecision> {
    if probe_results.is_empty() {
        return Err(McdmError::IncompleteProbe("no candidates probed".into()));
    }
    for r in probe_results {
        if r.bits == 0 {
            return Err(McdmError::IncompleteProbe(format!(
                "candidate K={} has no probed bits",
                r.config.chirp.k()
            )));
        }
    }
    let mut best = &probe_results[0];
    for r in &probe_results[1..] {
        let better = r.ber() < best.ber()
            || (r.ber() == best.ber() && r.config.chirp.k() > best.config.chirp.k());
        if better {
            best = r;
        }
    }
    let per_candidate_ber = probe_results.iter().map(|r| (r.config.chirp.k(), r.ber())).collect();
    Ok(AdaptationDecision {
        chosen: best.config.clone(),
        per_candidate_ber,
        rationale: format!(
            "argmin measured BER over {} candidates; ties break to larger K; chose K={}",
            probe_results.len(),
            best.config.chirp.k()
        ),
    })
}

/// Ideal lossless feedback: the decided configuration arrives unchanged at
/// the transmitter.
pub fn feedback(decision: &AdaptationDecision) -> FrameConfig {
    decision.chosen.clone()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn candidates(ks: &[usize]) -> Vec<FrameConfig> {
        ks.iter().map(|&k| FrameConfig::stock(k, k / 4).unwrap()).collect()
    }

    #[test]
    fn ten_packet_schedule_splits_4_2_2_2() {
        let sched = default_schedule(&candidates(&[128, 256, 512, 1024]), 10).unwrap();
        let spans: Vec<(usize, usize, usize)> = sched
            .entries
            .iter()
            .map(|e| (e.packets.start, e.packets.end, e.config.chirp.k()))
            .collect();
        assert_eq!(spans, vec![(1, 5, 128), (5, 7, 256), (7, 9, 512), (9, 11, 1024)]);
        assert_eq!(sched.candidate_for(4).unwrap().chirp.k(), 128);
        assert_eq!(sched.candidate_for(5).unwrap().chirp.k(), 256);
        assert_eq!(sched.candidate_for(10).unwrap().chirp.k(), 1024);
        assert_eq!(sched.n_packets(), 10);
    }

    #[test]
    fn single_candidate_takes_every_probe() {
        let sched = default_schedule(&candidates(&[512]), 10).unwrap();
        assert_eq!(sched.entries.len(), 1);
        assert_eq!(sched.entries[0].packets, 1..11);
    }

    #[test]
    fn five_candidates_split_evenly() {
        let ks = [128usize, 256, 512, 1024, 1024];
        let sched = default_schedule(&candidates(&ks), 10).unwrap();
        assert!(sched.entries.iter().all(|e| e.packets.len() == 2));
    }

    #[test]
    fn empty_candidate_list_is_config_error() {
        assert!(matches!(default_schedule(&[], 10), Err(McdmError::Config(_))));
    }

    fn probe(k: usize, errors: u64, bits: u64) -> ProbeResult {
        ProbeResult { config: FrameConfig::stock(k, k / 4).unwrap(), bit_errors: errors, bits }
    }

    #[test]
    fn select_takes_argmin() {
        let results = vec![
            probe(128, 90, 1000),
            probe(256, 60, 1000),
            probe(512, 30, 1000),
            probe(1024, 13, 1000),
        ];
        let d = select_config(&results).unwrap();
        assert_eq!(d.chosen.chirp.k(), 1024);
        assert_eq!(d.per_candidate_ber.len(), 4);
        assert!(d
            .per_candidate_ber
            .iter()
            .all(|&(_, ber)| ber >= d.per_candidate_ber[3].1));
    }

    #[test]
    fn select_breaks_ties_to_larger_k() {
        let results = vec![probe(256, 10, 1000), probe(512, 10, 1000), probe(128, 10, 1000)];
        assert_eq!(select_config(&results).unwrap().chosen.chirp.k(), 512);
    }

    #[test]
    fn select_single_candidate() {
        let results = vec![probe(256, 5, 100)];
        assert_eq!(select_config(&results).unwrap().chosen.chirp.k(), 256);
    }

    #[test]
    fn select_rejects_unprobed_candidate() {
        let results = vec![probe(256, 0, 0)];
        assert!(matches!(select_config(&results), Err(McdmError::IncompleteProbe(_))));
    }

    #[test]
    fn select_is_deterministic() {
        let results = vec![probe(128, 7, 500), probe(256, 9, 500)];
        let a = select_config(&results).unwrap();
        let b = select_config(&results).unwrap();
        assert_eq!(a.chosen, b.chosen);
        assert_eq!(a.per_candidate_ber, b.per_candidate_ber);
    }

    #[test]
    fn feedback_returns_decision_unchanged() {
        let d = select_config(&[probe(1024, 1, 100)]).unwrap();
        assert_eq!(feedback(&d), d.chosen);
    }
}
