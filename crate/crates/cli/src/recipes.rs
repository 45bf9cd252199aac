//! Scenario files shipped with the binary, grouped by figure.

pub struct Recipe {
    pub name: &'static str,
    pub text: &'static str,
}

macro_rules! recipe {
    ($name:literal) => {
        Recipe {
            name: $name,
            text: include_str!(concat!("../recipes/", $name, ".toml")),
        }
    };
}

pub const FIGURES: &[(&str, &[Recipe])] = &[
    (
        "fig3",
        &[
            recipe!("fig3-k11"),
            recipe!("fig3-k11-k12"),
            recipe!("fig3-first-hop"),
        ],
    ),
    (
        "fig4",
        &[
            recipe!("fig4-k11"),
            recipe!("fig4-k11-k12"),
            recipe!("fig4-first-hop"),
        ],
    ),
    ("fig5", &[recipe!("fig5")]),
    ("fig6", &[recipe!("fig6")]),
    (
        "fig7",
        &[recipe!("fig7-m1"), recipe!("fig7-m3"), recipe!("fig7-m5")],
    ),
    (
        "fig8",
        &[
            recipe!("fig8-delay5"),
            recipe!("fig8-delay10"),
            recipe!("fig8-delay20"),
        ],
    ),
];

pub fn figure(id: &str) -> Option<&'static [Recipe]> {
    FIGURES.iter().find(|(f, _)| *f == id).map(|(_, r)| *r)
}

pub fn ids() -> Vec<&'static str> {
    FIGURES.iter().map(|(f, _)| *f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use hybrid_relay::engine::Scenario;

    #[test]
    fn every_recipe_parses() {
        for (_, recipes) in FIGURES {
            for r in *recipes {
                let s = Scenario::from_toml(r.text).unwrap_or_else(|e| panic!("{}: {e}", r.name));
                assert_eq!(s.name, r.name);
            }
        }
    }
}
