//! Experiment descriptions and their TOML file format.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::ba::TrainingConfig;
use crate::benchmarks::RfSplit;
use crate::channels::{dbm_to_watt, NetworkConfig};
use crate::delay::RfTxMetric;
use crate::error::{Error, Result};
use crate::nonba::MixedRule;

/// Policies the engine can run side by side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PolicyKind {
    /// Optimal non-buffered selection.
    NonBa,
    /// Non-buffered selection with the all-or-nothing mixed-mode score.
    NonBaAllOrNothing,
    /// Optimal buffer-aided selection with trained weights.
    Ba,
    /// Buffer-aided selection with finite buffers.
    DelayBa,
    NonBaMaxMinFso,
    NonBaIndependent,
    BaBestFso,
    BaIndependent,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 8] = [
        PolicyKind::NonBa,
        PolicyKind::NonBaAllOrNothing,
        PolicyKind::Ba,
        PolicyKind::DelayBa,
        PolicyKind::NonBaMaxMinFso,
        PolicyKind::NonBaIndependent,
        PolicyKind::BaBestFso,
        PolicyKind::BaIndependent,
    ];

    pub fn label(self) -> &'static str {
        match self {
            PolicyKind::NonBa => "nonba",
            PolicyKind::NonBaAllOrNothing => "nonba-all-or-nothing",
            PolicyKind::Ba => "ba",
            PolicyKind::DelayBa => "delay-ba",
            PolicyKind::NonBaMaxMinFso => "nonba-maxmin-fso",
            PolicyKind::NonBaIndependent => "nonba-independent",
            PolicyKind::BaBestFso => "ba-best-fso",
            PolicyKind::BaIndependent => "ba-independent",
        }
    }

    /// Whether the policy needs trained weights.
    pub fn needs_weights(self) -> bool {
        matches!(self, PolicyKind::Ba | PolicyKind::DelayBa)
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for PolicyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PolicyKind::ALL
            .into_iter()
            .find(|p| p.label() == s.trim())
            .ok_or_else(|| {
                let known: Vec<_> = PolicyKind::ALL.iter().map(|p| p.label()).collect();
                Error::invalid(
                    "policies",
                    format!("unknown policy `{s}` (known: {})", known.join(", ")),
                )
            })
    }
}

impl Serialize for PolicyKind {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.label())
    }
}

impl<'de> Deserialize<'de> for PolicyKind {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Which parameter a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepAxis {
    /// A single point.
    None,
    /// FSO attenuation in dB/m on the links listed in [`Sweep::links`].
    Attenuation,
    /// RF transmit power in dBm on every RF link.
    RfPower,
    /// Number of relays.
    Relays,
    /// Relay buffer size in bits for the finite-buffer policy.
    Qmax,
}

impl SweepAxis {
    pub fn label(self) -> &'static str {
        match self {
            SweepAxis::None => "none",
            SweepAxis::Attenuation => "attenuation",
            SweepAxis::RfPower => "rf-power",
            SweepAxis::Relays => "relays",
            SweepAxis::Qmax => "qmax",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Sweep {
    pub axis: SweepAxis,
    /// `[hop, relay]` pairs (1-based) whose FSO attenuation is swept.
    pub links: Vec<[usize; 2]>,
    pub values: Vec<f64>,
}

impl Default for Sweep {
    fn default() -> Self {
        Sweep {
            axis: SweepAxis::None,
            links: Vec::new(),
            values: Vec::new(),
        }
    }
}

/// Per-link parameter change, applied after the defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkOverride {
    /// `"fso"` or `"rf"`.
    pub medium: String,
    /// 1 for source-relay, 2 for relay-destination.
    pub hop: usize,
    /// 1-based relay index.
    pub relay: usize,
    /// Parameter values keyed by the field names of
    /// [`crate::channels::FsoLinkParams`] or [`crate::channels::RfLinkParams`].
    pub set: toml::Table,
}

/// Relay count and hop distances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkSpec {
    pub relays: usize,
    pub first_hop_distance: f64,
    pub second_hop_distance: f64,
}

/// Changes to the default link parameters.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinkSpec {
    /// Overrides for every FSO link.
    pub fso: toml::Table,
    /// Overrides for every RF link.
    pub rf: toml::Table,
    #[serde(rename = "override")]
    pub overrides: Vec<LinkOverride>,
}

impl NetworkSpec {
    pub fn standard(relays: usize, first_hop: f64, second_hop: f64) -> Self {
        NetworkSpec {
            relays,
            first_hop_distance: first_hop,
            second_hop_distance: second_hop,
        }
    }
}

impl LinkSpec {
    /// Builds the configuration of a `relays`-relay network with the given
    /// distances; overrides addressing relays beyond that count are skipped.
    pub fn build(
        &self,
        net: &NetworkSpec,
        relays: usize,
        slots: usize,
        seed: u64,
    ) -> Result<NetworkConfig> {
        if relays == 0 {
            return Err(Error::invalid(
                "network.relays",
                "at least one relay is required",
            ));
        }
        let mut cfg =
            NetworkConfig::standard(relays, net.first_hop_distance, net.second_hop_distance);
        cfg.slots = slots;
        cfg.seed = seed;
        for l in 0..2 {
            for p in cfg.fso[l].iter_mut() {
                *p = merge(p, &self.fso, "links.fso")?;
            }
            for p in cfg.rf[l].iter_mut() {
                *p = merge(p, &self.rf, "links.rf")?;
            }
        }
        for (i, o) in self.overrides.iter().enumerate() {
            let path = format!("links.override[{}]", i + 1);
            if !(1..=2).contains(&o.hop) {
                return Err(Error::invalid(format!("{path}.hop"), "must be 1 or 2"));
            }
            if o.relay == 0 {
                return Err(Error::invalid(
                    format!("{path}.relay"),
                    "relays are numbered from 1",
                ));
            }
            if o.relay > relays {
                continue;
            }
            let (l, m) = (o.hop - 1, o.relay - 1);
            match o.medium.as_str() {
                "fso" => cfg.fso[l][m] = merge(&cfg.fso[l][m], &o.set, &format!("{path}.set"))?,
                "rf" => cfg.rf[l][m] = merge(&cfg.rf[l][m], &o.set, &format!("{path}.set"))?,
                other => {
                    return Err(Error::invalid(
                        format!("{path}.medium"),
                        format!("expected \"fso\" or \"rf\", got {other:?}"),
                    ))
                }
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Replaces fields of `base` by the entries of `patch`, recursing into
/// nested tables. Unknown keys are rejected with their path.
fn merge<P>(base: &P, patch: &toml::Table, path: &str) -> Result<P>
where
    P: Serialize + for<'de> Deserialize<'de>,
{
    fn apply(target: &mut toml::Table, patch: &toml::Table, path: &str) -> Result<()> {
        for (key, value) in patch {
            let here = format!("{path}.{key}");
            let Some(slot) = target.get_mut(key) else {
                return Err(Error::invalid(here, "unknown link parameter"));
            };
            match (slot, value) {
                (toml::Value::Table(t), toml::Value::Table(p)) => apply(t, p, &here)?,
                (slot @ toml::Value::Float(_), toml::Value::Integer(i)) => {
                    *slot = toml::Value::Float(*i as f64)
                }
                (slot, v) => *slot = v.clone(),
            }
        }
        Ok(())
    }
    let mut table = toml::Table::try_from(base).map_err(|e| Error::Parse {
        what: path.into(),
        reason: e.to_string(),
    })?;
    apply(&mut table, patch, path)?;
    table.try_into().map_err(|e: toml::de::Error| Error::Parse {
        what: path.into(),
        reason: e.to_string(),
    })
}

/// Options shared by the policies of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PolicySettings {
    pub include: Vec<PolicyKind>,
    pub rf_tx_metric: RfTxMetric,
    pub benchmark_rf_split: RfSplit,
    /// Mixed-mode scoring of the `nonba` policy.
    #[serde(with = "mixed_rule_label")]
    pub mixed_rule: MixedRule,
    /// Slots over which the `ba` weights absorb relay flow imbalance; 0
    /// keeps the trained weights fixed.
    pub ba_tracking_horizon: usize,
}

impl Default for PolicySettings {
    fn default() -> Self {
        PolicySettings {
            include: vec![
                PolicyKind::NonBa,
                PolicyKind::Ba,
                PolicyKind::NonBaMaxMinFso,
                PolicyKind::NonBaIndependent,
                PolicyKind::BaBestFso,
                PolicyKind::BaIndependent,
            ],
            rf_tx_metric: RfTxMetric::default(),
            benchmark_rf_split: RfSplit::default(),
            mixed_rule: MixedRule::default(),
            ba_tracking_horizon: 1000,
        }
    }
}

mod mixed_rule_label {
    use super::MixedRule;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &MixedRule, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(match r {
            MixedRule::Exact => "exact",
            MixedRule::AllOrNothing => "all-or-nothing",
        })
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<MixedRule, D::Error> {
        match String::deserialize(d)?.as_str() {
            "exact" => Ok(MixedRule::Exact),
            "all-or-nothing" => Ok(MixedRule::AllOrNothing),
            other => Err(serde::de::Error::custom(format!(
                "unknown mixed rule `{other}` (expected exact or all-or-nothing)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSettings {
    pub slots: usize,
    pub seeds: Vec<u64>,
    /// Batches per run for the batch-means standard error.
    pub batches: usize,
    /// Buffer size in bits for the finite-buffer policy (unless swept).
    pub qmax: f64,
    /// Buffer size in bits for the buffered benchmarks.
    pub benchmark_qmax: f64,
    /// Timer scale of the distributed protocols.
    pub eta: f64,
    /// Track per-bit ages in the finite-buffer policy.
    pub fifo_ledger: bool,
}

impl Default for RunSettings {
    fn default() -> Self {
        RunSettings {
            slots: 100_000,
            seeds: vec![1],
            batches: 20,
            qmax: 1e10,
            benchmark_qmax: f64::INFINITY,
            eta: 1.0,
            fifo_ledger: false,
        }
    }
}

/// A complete experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default)]
    pub name: String,
    pub network: NetworkSpec,
    #[serde(default)]
    pub links: LinkSpec,
    #[serde(default)]
    pub sweep: Sweep,
    #[serde(default)]
    pub policies: PolicySettings,
    #[serde(default)]
    pub run: RunSettings,
    #[serde(default)]
    pub training: TrainingConfig,
}

/// Parameters of one sweep point.
#[derive(Debug, Clone)]
pub struct PointConfig {
    pub value: f64,
    pub network: NetworkConfig,
    pub qmax: f64,
}

impl Scenario {
    pub fn new(network: NetworkSpec) -> Self {
        Scenario {
            name: String::new(),
            network,
            links: LinkSpec::default(),
            sweep: Sweep::default(),
            policies: PolicySettings::default(),
            run: RunSettings::default(),
            training: TrainingConfig::default(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let s: Scenario = toml::from_str(text).map_err(|e| Error::Parse {
            what: "scenario".into(),
            reason: e.to_string(),
        })?;
        s.validate()?;
        Ok(s)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario serializes to TOML")
    }

    pub fn validate(&self) -> Result<()> {
        if self.network.relays == 0 {
            return Err(Error::invalid(
                "network.relays",
                "at least one relay is required",
            ));
        }
        if self.run.seeds.is_empty() {
            return Err(Error::invalid("run.seeds", "at least one seed is required"));
        }
        if self.run.batches == 0 {
            return Err(Error::invalid("run.batches", "must be at least 1"));
        }
        if !(self.run.eta > 0.0 && self.run.eta.is_finite()) {
            return Err(Error::invalid("run.eta", "must be positive"));
        }
        if !(self.run.qmax >= 0.0) {
            return Err(Error::invalid("run.qmax", "must be >= 0"));
        }
        if !(self.run.benchmark_qmax >= 0.0) {
            return Err(Error::invalid("run.benchmark_qmax", "must be >= 0"));
        }
        if self.policies.include.is_empty() {
            return Err(Error::invalid("policies.include", "no policies selected"));
        }
        self.training.validate()?;
        if self.sweep.axis != SweepAxis::None && self.sweep.values.is_empty() {
            return Err(Error::invalid(
                "sweep.values",
                "a sweep needs at least one value",
            ));
        }
        for (i, v) in self.sweep.values.iter().enumerate() {
            let path = format!("sweep.values[{}]", i + 1);
            let ok = match self.sweep.axis {
                SweepAxis::None => true,
                SweepAxis::Attenuation | SweepAxis::Qmax => *v >= 0.0 && v.is_finite(),
                SweepAxis::RfPower => v.is_finite(),
                SweepAxis::Relays => *v >= 1.0 && v.fract() == 0.0,
            };
            if !ok {
                return Err(Error::invalid(
                    path,
                    format!("{v} is not valid for axis {}", self.sweep.axis.label()),
                ));
            }
        }
        if self.sweep.axis == SweepAxis::Attenuation {
            let links = &self.sweep.links;
            if links.is_empty() {
                return Err(Error::invalid(
                    "sweep.links",
                    "list at least one [hop, relay] pair",
                ));
            }
            for (i, [hop, relay]) in links.iter().enumerate() {
                if !(1..=2).contains(hop) || *relay == 0 || *relay > self.network.relays {
                    return Err(Error::invalid(
                        format!("sweep.links[{}]", i + 1),
                        format!(
                            "[{hop}, {relay}] is not a link of a {}-relay network",
                            self.network.relays
                        ),
                    ));
                }
            }
        }
        // surface link parameter errors before any work starts
        for p in self.points()? {
            p.network.validate()?;
        }
        Ok(())
    }

    /// Axis values; a single `NaN` placeholder when nothing is swept.
    pub fn axis_values(&self) -> Vec<f64> {
        if self.sweep.axis == SweepAxis::None || self.sweep.values.is_empty() {
            vec![f64::NAN]
        } else {
            self.sweep.values.clone()
        }
    }

    /// Network and buffer size of every sweep point.
    pub fn points(&self) -> Result<Vec<PointConfig>> {
        let base_seed = self.run.seeds.first().copied().unwrap_or(0);
        self.axis_values()
            .into_iter()
            .map(|value| {
                let relays = match self.sweep.axis {
                    SweepAxis::Relays => value as usize,
                    _ => self.network.relays,
                };
                let mut network =
                    self.links
                        .build(&self.network, relays, self.run.slots, base_seed)?;
                let mut qmax = self.run.qmax;
                match self.sweep.axis {
                    SweepAxis::Attenuation => {
                        for &[hop, relay] in &self.sweep.links {
                            network.fso[hop - 1][relay - 1].attenuation = value;
                        }
                    }
                    SweepAxis::RfPower => {
                        for p in network.rf.iter_mut().flatten() {
                            p.tx_power = dbm_to_watt(value);
                        }
                    }
                    SweepAxis::Qmax => qmax = value,
                    SweepAxis::None | SweepAxis::Relays => {}
                }
                Ok(PointConfig {
                    value,
                    network,
                    qmax,
                })
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXAMPLE: &str = r#"
name = "example"

[network]
relays = 3
first_hop_distance = 1000.0
second_hop_distance = 800.0

[links.fso]
attenuation = 0.04

[[links.override]]
medium = "rf"
hop = 2
relay = 3
set = { tx_power = 1 }

[sweep]
axis = "attenuation"
links = [[1, 1], [1, 2]]
values = [0.01, 0.05]

[policies]
include = ["nonba", "ba"]

[run]
slots = 1000
seeds = [4, 5]
"#;

    #[test]
    fn parses_and_applies_overrides() {
        let s = Scenario::from_toml(EXAMPLE).unwrap();
        let points = s.points().unwrap();
        assert_eq!(points.len(), 2);
        let net = &points[1].network;
        assert_eq!(net.fso[0][0].attenuation, 0.05);
        assert_eq!(net.fso[0][2].attenuation, 0.04);
        assert_eq!(net.fso[1][0].attenuation, 0.04);
        assert_eq!(net.rf[1][2].tx_power, 1.0);
        assert_eq!(net.rf[1][1].tx_power, 0.2);
        assert_eq!(net.fso[0][0].distance, 1000.0);
    }

    #[test]
    fn round_trips_through_toml() {
        let s = Scenario::from_toml(EXAMPLE).unwrap();
        assert_eq!(Scenario::from_toml(&s.to_toml()).unwrap(), s);
    }

    #[test]
    fn errors_name_the_field() {
        let bad = EXAMPLE.replace("attenuation = 0.04", "attenuaton = 0.04");
        let err = Scenario::from_toml(&bad).unwrap_err().to_string();
        assert!(err.contains("links.fso.attenuaton"), "{err}");

        let bad = EXAMPLE.replace("[[1, 1], [1, 2]]", "[[1, 7]]");
        let err = Scenario::from_toml(&bad).unwrap_err().to_string();
        assert!(err.contains("sweep.links[1]"), "{err}");

        let bad = EXAMPLE.replace("\"ba\"]", "\"bb\"]");
        let err = Scenario::from_toml(&bad).unwrap_err().to_string();
        assert!(err.contains("unknown policy `bb`"), "{err}");

        let bad = EXAMPLE.replace(
            "set = { tx_power = 1 }",
            "set = { path_loss_exponent = 1.0 }",
        );
        let err = Scenario::from_toml(&bad).unwrap_err().to_string();
        assert!(err.contains("links.rf[2][3].path_loss_exponent"), "{err}");
    }

    #[test]
    fn relay_axis_rebuilds_network() {
        let mut s = Scenario::new(NetworkSpec::standard(1, 1000.0, 800.0));
        s.sweep = Sweep {
            axis: SweepAxis::Relays,
            values: vec![1.0, 5.0, 10.0],
            ..Default::default()
        };
        let sizes: Vec<usize> = s
            .points()
            .unwrap()
            .iter()
            .map(|p| p.network.relays())
            .collect();
        assert_eq!(sizes, vec![1, 5, 10]);
    }
}
