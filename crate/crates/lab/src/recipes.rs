//! Built-in scenarios, one per worked example.

pub struct Recipe {
    pub name: &'static str,
    pub source: &'static str,
}

macro_rules! recipes {
    ($($name:literal),* $(,)?) => {
        pub const RECIPES: &[Recipe] = &[
            $(Recipe { name: $name, source: include_str!(concat!("../recipes/", $name, ".scn")) },)*
        ];
    };
}

recipes!(
    "minkowski-line",
    "schwarzschild-vacuum",
    "schwarzschild-interior-vacuum",
    "de-sitter-lambda",
    "anti-de-sitter-lambda",
    "flrw-dust",
    "flrw-scale-factor",
    "flrw-closed-recollapse",
    "circular-orbit",
    "clifton-pohl-incomplete",
    "ads2-geodesic",
    "ads2-refocus",
    "schwarzschild-interior-collapse",
    "flrw-bigbang",
    "flrw-contracting-focus",
    "schwarzschild-interior-focus",
    "minkowski-marginal-focus",
    "milne-incomplete",
    "twin-minkowski",
    "twin-schwarzschild",
    "twin-reparametrization",
    "ads2-long-curve",
);

pub fn find(name: &str) -> Option<&'static Recipe> {
    let name = name.strip_suffix(".scn").unwrap_or(name);
    RECIPES.iter().find(|r| r.name == name)
}

impl Recipe {
    pub fn description(&self) -> String {
        crate::scenario::Scenario::parse(self.source)
            .ok()
            .and_then(|s| s.description)
            .unwrap_or_default()
    }

    pub fn kind(&self) -> String {
        crate::scenario::Scenario::parse(self.source)
            .map(|s| s.run.kind().to_string())
            .unwrap_or_default()
    }
}

/// One line per recipe: name, run kind and what it reproduces.
pub fn listing() -> String {
    let width = RECIPES.iter().map(|r| r.name.len()).max().unwrap_or(0);
    let mut s = String::new();
    for r in RECIPES {
        s.push_str(&format!("{:width$}  {:14}  {}\n", r.name, r.kind(), r.description()));
    }
    s
}
