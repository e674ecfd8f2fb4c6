//! The on-disk certificate format and per-party graph export.
//!
//! Documents are JSON with a fixed field order and layout:
//!
//! ```json
//! {
//!   "version": 1,
//!   "num_states": 4,
//!   "num_parties": 1,
//!   "parties": [
//!     {
//!       "regions": [[0,1],[2,3]],
//!       "pairs": [[0,1]]
//!     }
//!   ],
//!   "assignment": [
//!     [{"basis":0,"side":"plus"},{"basis":0,"side":"perp"}]
//!   ],
//!   "provenance": {"note":"example","seed":7}
//! }
//! ```
//!
//! `assignment` and `provenance` are optional. Writing a parsed document
//! reproduces it byte for byte.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::constructions::{Certificate, Provenance};
use crate::error::{Error, Result};
use crate::model::{Configuration, PartyLayout};
use crate::states::{BasisLabel, SymbolicAssignment};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartyDocument {
    pub regions: Vec<Vec<usize>>,
    pub pairs: Vec<(usize, usize)>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigDocument {
    pub version: u32,
    pub num_states: usize,
    pub num_parties: usize,
    pub parties: Vec<PartyDocument>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub assignment: Option<Vec<Vec<BasisLabel>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<Provenance>,
}

impl ConfigDocument {
    pub fn from_configuration(c: &Configuration) -> Self {
        ConfigDocument {
            version: FORMAT_VERSION,
            num_states: c.num_states(),
            num_parties: c.num_parties(),
            parties: c
                .parties()
                .iter()
                .map(|layout| PartyDocument {
                    regions: layout.regions().to_vec(),
                    pairs: layout.pairs(),
                })
                .collect(),
            assignment: None,
            provenance: None,
        }
    }

    pub fn from_certificate(cert: &Certificate) -> Self {
        let mut doc = Self::from_configuration(&cert.config);
        doc.assignment = Some(cert.assignment.parties().to_vec());
        doc.provenance = Some(cert.provenance.clone());
        doc
    }

    pub fn parse(text: &str) -> Result<Self> {
        let doc: ConfigDocument =
            serde_json::from_str(text).map_err(|e| Error::Document(e.to_string()))?;
        if doc.version != FORMAT_VERSION {
            return Err(Error::Document(format!(
                "unsupported version {} (expected {FORMAT_VERSION})",
                doc.version
            )));
        }
        Ok(doc)
    }

    /// Two-space indented JSON with one party, or one party's labels, per
    /// line group. The layout depends only on the data.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let w = &mut out;
        let _ = writeln!(w, "{{");
        let _ = writeln!(w, "  \"version\": {},", self.version);
        let _ = writeln!(w, "  \"num_states\": {},", self.num_states);
        let _ = writeln!(w, "  \"num_parties\": {},", self.num_parties);
        let _ = write!(w, "  \"parties\": [");
        for (j, party) in self.parties.iter().enumerate() {
            let sep = if j == 0 { "" } else { "," };
            let _ = write!(w, "{sep}\n    {{\n");
            let _ = writeln!(w, "      \"regions\": {},", json(&party.regions));
            let _ = writeln!(w, "      \"pairs\": {}", json(&party.pairs));
            let _ = write!(w, "    }}");
        }
        let tail_parties = if self.parties.is_empty() {
            "]"
        } else {
            "\n  ]"
        };
        let _ = write!(w, "{tail_parties}");
        if let Some(assignment) = &self.assignment {
            let _ = write!(w, ",\n  \"assignment\": [");
            for (j, labels) in assignment.iter().enumerate() {
                let sep = if j == 0 { "" } else { "," };
                let _ = write!(w, "{sep}\n    {}", json(labels));
            }
            let tail = if assignment.is_empty() { "]" } else { "\n  ]" };
            let _ = write!(w, "{tail}");
        }
        if let Some(provenance) = &self.provenance {
            let _ = write!(w, ",\n  \"provenance\": {}", json(provenance));
        }
        let _ = writeln!(w, "\n}}");
        out
    }

    pub fn configuration(&self) -> Result<Configuration> {
        if self.parties.len() != self.num_parties {
            return Err(Error::Document(format!(
                "num_parties is {} but {} parties are listed",
                self.num_parties,
                self.parties.len()
            )));
        }
        let parties = self
            .parties
            .iter()
            .enumerate()
            .map(|(j, p)| {
                PartyLayout::new(self.num_states, p.regions.clone(), &p.pairs)
                    .map_err(|e| Error::Document(format!("party {j}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Configuration::new(self.num_states, parties)
    }

    /// The configuration with its assignment, defaulting to the standard
    /// labels when the document carries none.
    pub fn certificate(&self) -> Result<Certificate> {
        let config = self.configuration()?;
        let assignment = match &self.assignment {
            Some(labels) => SymbolicAssignment::new(labels.clone()),
            None => SymbolicAssignment::standard(&config),
        };
        assignment.validate(&config)?;
        Ok(Certificate {
            config,
            assignment,
            provenance: self.provenance.clone().unwrap_or_default(),
        })
    }
}

fn json<T: Serialize + ?Sized>(value: &T) -> String {
    serde_json::to_string(value).expect("document parts serialize")
}

pub fn certificate_from_str(text: &str) -> Result<Certificate> {
    ConfigDocument::parse(text)?.certificate()
}

pub fn certificate_to_string(cert: &Certificate) -> String {
    ConfigDocument::from_certificate(cert).to_text()
}

/// Graphviz text for one party: a cluster per region and one edge per
/// pairing, drawn between the two clusters.
pub fn party_to_dot(c: &Configuration, party: usize) -> Result<String> {
    let layout = c.party(party).ok_or_else(|| {
        Error::Parameter(format!(
            "party {party} out of range (have {})",
            c.num_parties()
        ))
    })?;
    let mut out = String::new();
    let w = &mut out;
    let _ = writeln!(w, "graph party{party} {{");
    let _ = writeln!(w, "  compound=true;");
    let _ = writeln!(w, "  label=\"party {party}\";");
    let _ = writeln!(w, "  node [shape=circle];");
    for (r, region) in layout.regions().iter().enumerate() {
        let _ = writeln!(w, "  subgraph cluster_r{r} {{");
        let shade = if layout.partner(r).is_some() {
            "lightgrey"
        } else {
            "white"
        };
        let _ = writeln!(w, "    style=filled; color=black; fillcolor={shade};");
        let _ = writeln!(w, "    label=\"r{r}\";");
        for v in region {
            let _ = writeln!(w, "    v{v};");
        }
        let _ = writeln!(w, "  }}");
    }
    for (a, b) in layout.pairs() {
        let va = layout.regions()[a][0];
        let vb = layout.regions()[b][0];
        let _ = writeln!(
            w,
            "  v{va} -- v{vb} [ltail=cluster_r{a}, lhead=cluster_r{b}];"
        );
    }
    let _ = writeln!(w, "}}");
    Ok(out)
}

/// One DOT document per party, in party order.
pub fn configuration_to_dot(c: &Configuration) -> Vec<String> {
    (0..c.num_parties())
        .map(|j| party_to_dot(c, j).expect("party index in range"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::construct_upb_4k4;
    use crate::fixtures::{seven_state, seven_state_certificate};
    use crate::testing::arb_configuration;
    use proptest::prelude::*;

    #[test]
    fn field_order_is_fixed() {
        let (config, assignment) = seven_state_certificate();
        let cert = Certificate {
            config,
            assignment,
            provenance: Provenance {
                note: "seven".into(),
                seed: Some(3),
            },
        };
        let text = certificate_to_string(&cert);
        let keys = [
            "\"version\"",
            "\"num_states\"",
            "\"num_parties\"",
            "\"parties\"",
            "\"assignment\"",
            "\"provenance\"",
        ];
        let pos: Vec<usize> = keys.iter().map(|k| text.find(k).unwrap()).collect();
        assert!(pos.windows(2).all(|w| w[0] < w[1]));
        assert!(text.contains("\"side\":\"perp\""));
        let value: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(value["num_states"], 7);
        let back = certificate_from_str(&text).unwrap();
        assert_eq!(back, cert);
        assert_eq!(certificate_to_string(&back), text);
    }

    #[test]
    fn optional_fields_are_omitted() {
        let text = ConfigDocument::from_configuration(&seven_state()).to_text();
        assert!(!text.contains("assignment"));
        assert!(!text.contains("provenance"));
        let cert = certificate_from_str(&text).unwrap();
        assert_eq!(cert.config, seven_state());
    }

    #[test]
    fn malformed_documents_are_rejected() {
        let good = ConfigDocument::from_configuration(&seven_state()).to_text();
        assert!(matches!(
            ConfigDocument::parse(&good[..good.len() / 2]),
            Err(Error::Document(_))
        ));
        let bumped = good.replace("\"version\": 1", "\"version\": 2");
        assert!(ConfigDocument::parse(&bumped).is_err());
        let extra = good.replacen('{', "{\n  \"extra\": 0,", 1);
        assert!(ConfigDocument::parse(&extra).is_err());
        let mut doc = ConfigDocument::parse(&good).unwrap();
        doc.num_parties = 4;
        assert!(doc.configuration().is_err());
        let mut doc = ConfigDocument::parse(&good).unwrap();
        doc.parties[0].regions[0].push(3);
        assert!(doc.configuration().is_err());
        let mut doc = ConfigDocument::parse(&good).unwrap();
        doc.parties[0].pairs.push((0, 0));
        assert!(doc.configuration().is_err());
    }

    #[test]
    fn bad_assignment_is_rejected() {
        let (config, assignment) = seven_state_certificate();
        let mut doc = ConfigDocument::from_certificate(&Certificate {
            config,
            assignment,
            provenance: Provenance::default(),
        });
        doc.assignment.as_mut().unwrap()[0][1] = BasisLabel::plus(5);
        assert!(matches!(
            doc.certificate(),
            Err(Error::InvalidAssignment(_))
        ));
    }

    #[test]
    fn dot_for_seven_state() {
        let dots = configuration_to_dot(&seven_state());
        assert_eq!(dots.len(), 3);
        let first = &dots[0];
        assert!(first.starts_with("graph party0 {"));
        assert!(first.contains("compound=true"));
        assert_eq!(first.matches("subgraph cluster_").count(), 2);
        assert!(first.contains("v0 -- v3 [ltail=cluster_r0, lhead=cluster_r1]"));
        for v in 0..7 {
            assert!(first.contains(&format!("    v{v};")));
        }
        assert_eq!(dots[2].matches(" -- ").count(), 3);
        assert!(party_to_dot(&seven_state(), 3).is_err());
    }

    #[test]
    fn dot_for_single_vertex() {
        let c = Configuration::new(1, vec![PartyLayout::singletons(1).unwrap()]).unwrap();
        let dot = party_to_dot(&c, 0).unwrap();
        assert!(dot.contains("v0;"));
        assert!(!dot.contains(" -- "));
    }

    #[test]
    fn construction_round_trips() {
        let cert = construct_upb_4k4(3).unwrap();
        let text = certificate_to_string(&cert);
        assert_eq!(certificate_from_str(&text).unwrap(), cert);
    }

    proptest! {
        #[test]
        fn configuration_text_is_byte_stable(c in arb_configuration(10, 4)) {
            let text = ConfigDocument::from_configuration(&c).to_text();
            let doc = ConfigDocument::parse(&text).unwrap();
            let back = doc.configuration().unwrap();
            prop_assert_eq!(back.canonical(), c.canonical());
            prop_assert_eq!(ConfigDocument::from_configuration(&back).to_text(), text);
        }
    }
}
