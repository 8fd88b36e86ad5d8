//! Built-in figure presets. Each encodes a figure caption's parameters and
//! the sweep that produces the figure's data.

use toml::Table;

use crate::config::parse_document;
use crate::error::{AppError, AppResult};

const PRESETS: &[(&str, &str)] = &[
    ("fig3", include_str!("../presets/fig3.toml")),
    ("fig4", include_str!("../presets/fig4.toml")),
    ("fig5", include_str!("../presets/fig5.toml")),
    ("fig6", include_str!("../presets/fig6.toml")),
    ("fig8", include_str!("../presets/fig8.toml")),
    ("fig9", include_str!("../presets/fig9.toml")),
    ("fig10", include_str!("../presets/fig10.toml")),
    ("fig11", include_str!("../presets/fig11.toml")),
    ("fig12", include_str!("../presets/fig12.toml")),
];

/// Names of all presets, in figure order.
pub fn names() -> impl Iterator<Item = &'static str> {
    PRESETS.iter().map(|(n, _)| *n)
}

/// Canonical preset name: accepts `fig8`, `Fig8`, `8`.
fn canonical(name: &str) -> String {
    let lower = name.trim().to_ascii_lowercase();
    if lower.chars().all(|c| c.is_ascii_digit()) && !lower.is_empty() {
        format!("fig{lower}")
    } else {
        lower
    }
}

/// Source text of a preset.
pub fn text(name: &str) -> AppResult<&'static str> {
    let key = canonical(name);
    PRESETS.iter().find(|(n, _)| *n == key).map(|(_, t)| *t).ok_or_else(|| AppError::UnknownFigure(name.to_string()))
}

/// Parsed preset document.
pub fn document(name: &str) -> AppResult<Table> {
    let key = canonical(name);
    parse_document(text(&key)?, &format!("preset {key}"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::resolve;

    #[test]
    fn every_preset_resolves() {
        for name in names() {
            let cfg = resolve(&document(name).unwrap()).unwrap_or_else(|e| panic!("{name}: {e}"));
            assert_eq!(cfg.metadata.get("figure").map(String::as_str), Some(name));
            assert!(cfg.sweep.is_some());
        }
    }

    #[test]
    fn fig7_is_not_a_preset() {
        assert!(matches!(document("fig7"), Err(AppError::UnknownFigure(_))));
        assert!(matches!(document("fig13"), Err(AppError::UnknownFigure(_))));
    }

    #[test]
    fn aliases() {
        assert_eq!(text("8").unwrap(), text("Fig8").unwrap());
    }

    #[test]
    fn fig8_matches_caption() {
        let cfg = resolve(&document("fig8").unwrap()).unwrap();
        let mech = cfg.mech().unwrap();
        assert_eq!(mech.quality_factor, 5e7);
        assert_eq!(mech.bath_temperature, 300.0);
        assert!((mech.g0.hz() - 200.0).abs() < 1e-9);
        assert!((mech.omega_m.hz() - 300e3).abs() < 1e-6);
        let cm = cfg.cavity_m().unwrap();
        assert_eq!(cm.input_power, 200e-9);
        assert!((cm.kappa.hz() - 240e3).abs() < 1e-6);
        let ca = cfg.cavity_a().unwrap();
        assert!((ca.kappa.hz() - 70e6).abs() < 1e-3);
        let eit = cfg.eit().unwrap().params;
        assert_eq!(eit.n_atoms, 1e8);
        assert!((eit.rabi_control.get() / eit.gamma_e.get() - 6.0).abs() < 1e-12);
        assert!((eit.delta_a.get() / eit.gamma_e.get() - 500.0).abs() < 1e-12);
    }
}
