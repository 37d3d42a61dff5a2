//! Flat `key = value` text form of [`LVParams`], one coefficient per line.

use std::path::Path;

use super::{LVParams, TrophicGroup};
use crate::error::{Error, Result};

fn entries(p: &LVParams) -> Vec<(String, f64)> {
    let mut out = Vec::new();
    for g in TrophicGroup::ALL {
        out.push((format!("alpha.{}", g.name()), p.alpha(g)));
    }
    for g in TrophicGroup::FISH {
        out.push((format!("gamma.{}", g.name()), p.gamma(g)));
    }
    let named = [
        ("beta.coral.turf", p.coral_by_turf),
        ("beta.coral.corallivores", p.coral_by_corallivores),
        ("beta.turf.herbivores", p.turf_by_herbivores),
        ("beta.turf.coral", p.turf_by_coral),
        ("beta.herbivores.carnivores", p.herbivores_by_carnivores),
        ("beta.herbivores.fishers", p.herbivores_by_fishers),
        ("beta.corallivores.carnivores", p.corallivores_by_carnivores),
        ("beta.carnivores.fishers", p.carnivores_by_fishers),
        ("delta.herbivores.turf", p.herbivores_by_turf),
        ("delta.corallivores.coral", p.corallivores_by_coral),
        (
            "delta.carnivores.herbivores+corallivores",
            p.carnivores_by_prey,
        ),
        ("cots_destruction", p.cots_destruction),
    ];
    out.extend(named.into_iter().map(|(k, v)| (k.to_string(), v)));
    out
}

pub fn dump_params(p: &LVParams) -> String {
    entries(p)
        .into_iter()
        .map(|(k, v)| format!("{k} = {v:e}\n"))
        .collect()
}

pub fn parse_params(text: &str, source: &Path) -> Result<LVParams> {
    let mut p = LVParams::default();
    let mut seen = std::collections::HashSet::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::parse(source, lineno + 1, "expected `key = value`"))?;
        let key = key.trim();
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| Error::parse(source, lineno + 1, format!("bad number for `{key}`")))?;
        if !(value >= 0.0) {
            return Err(Error::parse(
                source,
                lineno + 1,
                format!("`{key}` must be >= 0"),
            ));
        }
        let slot = match key {
            "beta.coral.turf" => &mut p.coral_by_turf,
            "beta.coral.corallivores" => &mut p.coral_by_corallivores,
            "beta.turf.herbivores" => &mut p.turf_by_herbivores,
            "beta.turf.coral" => &mut p.turf_by_coral,
            "beta.herbivores.carnivores" => &mut p.herbivores_by_carnivores,
            "beta.herbivores.fishers" => &mut p.herbivores_by_fishers,
            "beta.corallivores.carnivores" => &mut p.corallivores_by_carnivores,
            "beta.carnivores.fishers" => &mut p.carnivores_by_fishers,
            "delta.herbivores.turf" => &mut p.herbivores_by_turf,
            "delta.corallivores.coral" => &mut p.corallivores_by_coral,
            "delta.carnivores.herbivores+corallivores" => &mut p.carnivores_by_prey,
            "cots_destruction" => &mut p.cots_destruction,
            other => {
                let group = |prefix: &str| {
                    other
                        .strip_prefix(prefix)
                        .and_then(|name| TrophicGroup::ALL.into_iter().find(|g| g.name() == name))
                };
                if let Some(g) = group("alpha.") {
                    &mut p.alpha[g as usize]
                } else if let Some(g) = group("gamma.").filter(|g| !g.is_benthic()) {
                    &mut p.gamma[g as usize]
                } else {
                    return Err(Error::parse(
                        source,
                        lineno + 1,
                        format!("unknown key `{other}`"),
                    ));
                }
            }
        };
        *slot = value;
        if !seen.insert(key.to_string()) {
            return Err(Error::parse(
                source,
                lineno + 1,
                format!("duplicate key `{key}`"),
            ));
        }
    }
    let missing: Vec<String> = entries(&p)
        .into_iter()
        .map(|(k, _)| k)
        .filter(|k| !seen.contains(k))
        .collect();
    if !missing.is_empty() {
        return Err(Error::parse(
            source,
            0,
            format!("missing keys: {}", missing.join(", ")),
        ));
    }
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ecology::{CalibrationMode, CellState};

    fn sample() -> LVParams {
        LVParams::calibrated_for(
            &CellState::new(0.35, 0.27, 305.0, 25.3, 78.5),
            CalibrationMode::BalancedPartition,
            2244.0 / 5320.0,
        )
        .unwrap()
    }

    #[test]
    fn dump_then_parse_is_exact() {
        let p = sample();
        let text = dump_params(&p);
        assert_eq!(text.lines().count(), 20);
        assert!(text.contains("alpha.coral = 3e-5\n"));
        let back = parse_params(&text, Path::new("lv.txt")).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn missing_and_unknown_keys_are_errors() {
        let text = dump_params(&sample());
        let truncated: String = text.lines().skip(1).map(|l| format!("{l}\n")).collect();
        assert!(parse_params(&truncated, Path::new("x")).is_err());
        let extra = format!("{text}beta.coral.sunlight = 1\n");
        assert!(parse_params(&extra, Path::new("x")).is_err());
    }
}
