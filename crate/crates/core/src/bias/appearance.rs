use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::model::CategoryId;
use crate::network::{PartySide, PartyTable};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AppearanceShare {
    pub bjp_appearances: usize,
    pub opposition_appearances: usize,
    pub bjp_fraction: f64,
    pub opposition_fraction: f64,
}

/// BJP and opposition shares of panelist appearances per category. Each
/// entry of a video's affiliation list is one panelist appearing once.
/// Panelists on neither side are not counted, and categories with no
/// BJP or opposition appearances are omitted.
pub fn appearance_bias(
    affiliations: &BTreeMap<String, Vec<String>>,
    categories: &BTreeMap<String, CategoryId>,
    table: &PartyTable,
) -> BTreeMap<CategoryId, AppearanceShare> {
    let mut counts: BTreeMap<&CategoryId, (usize, usize)> = BTreeMap::new();
    for (video, affs) in affiliations {
        let Some(cat) = categories.get(video) else {
            continue;
        };
        let entry = counts.entry(cat).or_insert((0, 0));
        for a in affs {
            match table.side(a) {
                Some(PartySide::Bjp) => entry.0 += 1,
                Some(PartySide::Opposition) => entry.1 += 1,
                _ => {}
            }
        }
    }
    counts
        .into_iter()
        .filter(|(_, (b, o))| b + o > 0)
        .map(|(cat, (b, o))| {
            let total = (b + o) as f64;
            (
                cat.clone(),
                AppearanceShare {
                    bjp_appearances: b,
                    opposition_appearances: o,
                    bjp_fraction: b as f64 / total,
                    opposition_fraction: o as f64 / total,
                },
            )
        })
        .collect()
}
