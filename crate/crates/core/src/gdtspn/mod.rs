//! Generally distributed transition stochastic Petri nets.
//!
//! Labeled transitions are timed and carry a [`DurationDistribution`]; silent
//! transitions are immediate (they preempt timed ones) and carry a positive
//! routing weight. Durations are in milliseconds.

mod distribution;
pub mod normal;
mod simulate;

use serde::{Deserialize, Serialize};

pub use distribution::{DistributionKind, DurationDistribution, EXHAUSTED_SURVIVAL};
pub use simulate::{RemainingEstimate, SimulationConfig};

use crate::error::{Error, Result};
use crate::event_log::Trace;
use crate::petri::{read_pnml, replay_complete, to_dot, write_pnml, PetriNet, PnmlAnnotations, TransitionId};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "timing", rename_all = "snake_case")]
pub enum Timing {
    Timed(DurationDistribution),
    Immediate { weight: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct GdtSpn {
    net: PetriNet,
    timing: Vec<Timing>,
    unobserved: Vec<TransitionId>,
}

impl GdtSpn {
    /// Pairs a net with one timing entry per transition. Labeled transitions
    /// must be timed and silent ones immediate with a positive weight.
    pub fn new(net: PetriNet, timing: Vec<Timing>) -> Result<Self> {
        if timing.len() != net.transition_count() {
            return Err(Error::InvalidNet(format!(
                "{} timing entries for {} transitions",
                timing.len(),
                net.transition_count()
            )));
        }
        for (t, tm) in timing.iter().enumerate() {
            let name = &net.transition(t).name;
            match (net.is_silent(t), tm) {
                (false, Timing::Timed(_)) => {}
                (true, Timing::Immediate { weight }) if *weight > 0.0 && weight.is_finite() => {}
                (true, Timing::Immediate { weight }) => {
                    return Err(Error::InvalidNet(format!(
                        "silent transition '{name}' has weight {weight}"
                    )))
                }
                (false, _) => {
                    return Err(Error::InvalidNet(format!(
                        "labeled transition '{name}' needs a duration"
                    )))
                }
                (true, _) => {
                    return Err(Error::InvalidNet(format!(
                        "silent transition '{name}' needs a weight"
                    )))
                }
            }
        }
        Ok(Self {
            net,
            timing,
            unobserved: Vec::new(),
        })
    }

    pub fn net(&self) -> &PetriNet {
        &self.net
    }

    pub fn timing(&self, t: TransitionId) -> &Timing {
        &self.timing[t]
    }

    pub fn duration(&self, t: TransitionId) -> Option<&DurationDistribution> {
        match &self.timing[t] {
            Timing::Timed(d) => Some(d),
            Timing::Immediate { .. } => None,
        }
    }

    pub fn weight(&self, t: TransitionId) -> Option<f64> {
        match self.timing[t] {
            Timing::Immediate { weight } => Some(weight),
            Timing::Timed(_) => None,
        }
    }

    /// Timed transitions that received no duration sample during enrichment.
    pub fn unobserved(&self) -> &[TransitionId] {
        &self.unobserved
    }

    /// Annotated PNML with duration parameters and weights per transition.
    pub fn to_pnml(&self) -> String {
        let annotations: PnmlAnnotations = self
            .timing
            .iter()
            .map(|tm| match tm {
                Timing::Timed(d) => {
                    let mut a = match d.kind {
                        DistributionKind::Normal { mean, std_dev } => vec![
                            kv("distribution", "normal"),
                            kv("mean_ms", mean),
                            kv("std_dev_ms", std_dev),
                        ],
                        DistributionKind::Dirac { value } => {
                            vec![kv("distribution", "dirac"), kv("value_ms", value)]
                        }
                    };
                    a.push(kv("samples", d.sample_count));
                    a.push(kv("priority", 0));
                    a
                }
                Timing::Immediate { weight } => vec![kv("weight", weight), kv("priority", 1)],
            })
            .collect();
        write_pnml(&self.net, Some(&annotations))
    }

    /// Graphviz rendering with the timing of each transition; durations in
    /// seconds.
    pub fn to_dot(&self) -> String {
        let line = |t: usize| {
            Some(match self.timing[t] {
                Timing::Timed(d) => match d.kind {
                    DistributionKind::Normal { mean, std_dev } => {
                        format!("N({:.1}s, {:.1}s)", mean / 1000.0, std_dev / 1000.0)
                    }
                    DistributionKind::Dirac { value } => format!("δ({:.1}s)", value / 1000.0),
                },
                Timing::Immediate { weight } => format!("w={weight}"),
            })
        };
        to_dot(&self.net, Some(&line))
    }

    /// Reads a net written by [`GdtSpn::to_pnml`].
    pub fn from_pnml(source: &[u8]) -> Result<Self> {
        let (net, annotations) = read_pnml(source)?;
        let timing = (0..net.transition_count())
            .map(|t| {
                let attrs = annotations.get(t).map(Vec::as_slice).unwrap_or(&[]);
                parse_timing(&net, t, attrs)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(net, timing)
    }
}

fn kv(k: &str, v: impl ToString) -> (String, String) {
    (k.to_string(), v.to_string())
}

fn parse_timing(net: &PetriNet, t: TransitionId, attrs: &[(String, String)]) -> Result<Timing> {
    let name = &net.transition(t).name;
    let get = |key: &str| -> Result<f64> {
        let raw = attrs
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v)
            .ok_or_else(|| Error::Pnml(format!("transition '{name}' lacks '{key}'")))?;
        raw.parse()
            .map_err(|_| Error::Pnml(format!("transition '{name}': bad {key} '{raw}'")))
    };
    if net.is_silent(t) {
        return Ok(Timing::Immediate {
            weight: get("weight")?,
        });
    }
    let kind = attrs
        .iter()
        .find(|(k, _)| k == "distribution")
        .map(|(_, v)| v.as_str());
    let d = match kind {
        Some("normal") => DurationDistribution::normal(get("mean_ms")?, get("std_dev_ms")?)?,
        Some("dirac") => DurationDistribution::dirac(get("value_ms")?)?,
        other => {
            return Err(Error::Pnml(format!(
                "transition '{name}': unknown distribution {other:?}"
            )))
        }
    };
    let samples = get("samples").map(|x| x as usize).unwrap_or(0);
    Ok(Timing::Timed(d.with_sample_count(samples)))
}

/// Fits durations and routing weights by replaying `traces` on `net`.
///
/// A labeled transition's sample is its event timestamp minus its enabling
/// time. A silent transition's weight is the number of times it fired, or 1
/// if it never fired.
pub fn enrich<'a>(net: &PetriNet, traces: impl IntoIterator<Item = &'a Trace>) -> Result<GdtSpn> {
    let n = net.transition_count();
    let mut samples: Vec<Vec<f64>> = vec![Vec::new(); n];
    let mut fired = vec![0usize; n];
    for trace in traces {
        let r = replay_complete(net, trace).map_err(|e| Error::Enrich {
            case_id: trace.case_id().to_string(),
            source: Box::new(e),
        })?;
        for f in r.firings {
            if net.is_silent(f.transition) {
                fired[f.transition] += 1;
            } else {
                samples[f.transition].push((f.fired_at - f.enabled_at) as f64);
            }
        }
    }
    let mut unobserved = Vec::new();
    let timing = (0..n)
        .map(|t| {
            if net.is_silent(t) {
                Timing::Immediate {
                    weight: fired[t].max(1) as f64,
                }
            } else {
                if samples[t].is_empty() {
                    log::warn!(
                        "transition '{}' has no duration samples; using dirac(0)",
                        net.transition(t).name
                    );
                    unobserved.push(t);
                }
                Timing::Timed(DurationDistribution::fit(&samples[t]))
            }
        })
        .collect();
    let mut model = GdtSpn::new(net.clone(), timing)?;
    model.unobserved = unobserved;
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::petri::fixtures;

    #[test]
    fn sequence_durations() {
        let net = fixtures::sequence_ab();
        // A is the first event, so it always takes 0; B carries the spread
        let t1 = Trace::from_pairs("1", &[("A", 0), ("B", 10_000)]).unwrap();
        let t2 = Trace::from_pairs("2", &[("A", 0), ("B", 20_000)]).unwrap();
        let m = enrich(&net, [&t1, &t2]).unwrap();
        let a = net.transition_by_label("A").unwrap();
        let b = net.transition_by_label("B").unwrap();
        assert_eq!(
            m.duration(b).unwrap().kind,
            DistributionKind::Normal {
                mean: 15_000.0,
                std_dev: 5_000.0
            }
        );
        assert_eq!(m.duration(a).unwrap().kind, DistributionKind::Dirac { value: 0.0 });
        assert_eq!(m.duration(a).unwrap().sample_count, 2);
        assert!(m.unobserved().is_empty());
    }

    #[test]
    fn single_sample_is_dirac() {
        let net = fixtures::sequence_ab();
        let t = Trace::from_pairs("1", &[("A", 0), ("B", 7_000)]).unwrap();
        let m = enrich(&net, [&t]).unwrap();
        let b = net.transition_by_label("B").unwrap();
        assert_eq!(m.duration(b).unwrap().kind, DistributionKind::Dirac { value: 7_000.0 });
    }

    #[test]
    fn branch_weights_count_choices() {
        let net = fixtures::xor_abc();
        let traces: Vec<Trace> = (0..100)
            .map(|i| {
                let second = if i < 30 { "B" } else { "C" };
                Trace::from_pairs(&i.to_string(), &[("A", 0), (second, 5)]).unwrap()
            })
            .collect();
        let m = enrich(&net, &traces).unwrap();
        let tb = (0..net.transition_count())
            .find(|&t| net.transition(t).name == "tau_b")
            .unwrap();
        let tc = (0..net.transition_count())
            .find(|&t| net.transition(t).name == "tau_c")
            .unwrap();
        assert_eq!(m.weight(tb), Some(30.0));
        assert_eq!(m.weight(tc), Some(70.0));
    }

    #[test]
    fn unfired_silent_gets_unit_weight_and_unseen_activity_is_flagged() {
        let net = fixtures::xor_abc();
        let t = Trace::from_pairs("1", &[("A", 0), ("B", 5)]).unwrap();
        let m = enrich(&net, [&t]).unwrap();
        let c = net.transition_by_label("C").unwrap();
        assert_eq!(m.unobserved(), &[c]);
        assert_eq!(m.duration(c).unwrap().kind, DistributionKind::Dirac { value: 0.0 });
        for t in 0..net.transition_count() {
            if let Some(w) = m.weight(t) {
                assert!(w >= 1.0);
            }
        }
    }

    #[test]
    fn replay_failure_names_the_case() {
        let net = fixtures::sequence_ab();
        let bad = Trace::from_pairs("broken", &[("B", 0)]).unwrap();
        match enrich(&net, [&bad]) {
            Err(Error::Enrich { case_id, .. }) => assert_eq!(case_id, "broken"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn pnml_round_trip() {
        let net = fixtures::xor_abc();
        let traces: Vec<Trace> = (0..10)
            .map(|i| {
                let second = if i < 3 { "B" } else { "C" };
                Trace::from_pairs(&i.to_string(), &[("A", i * 100), (second, i * 100 + 5 + i)])
                    .unwrap()
            })
            .collect();
        let m = enrich(&net, &traces).unwrap();
        let back = GdtSpn::from_pnml(m.to_pnml().as_bytes()).unwrap();
        for t in 0..net.transition_count() {
            assert_eq!(back.timing(t), m.timing(t), "transition {t}");
        }
        let dot = m.to_dot();
        assert!(dot.contains("w=3") && dot.contains("w=7"), "{dot}");
        assert!(dot.contains("A\nδ(0.0s)"), "{dot}");
    }

    #[test]
    fn rejects_bad_weights() {
        let net = fixtures::xor_abc();
        let timing = (0..net.transition_count())
            .map(|t| {
                if net.is_silent(t) {
                    Timing::Immediate { weight: 0.0 }
                } else {
                    Timing::Timed(DurationDistribution::dirac(1.0).unwrap())
                }
            })
            .collect();
        assert!(GdtSpn::new(net, timing).is_err());
    }
}
