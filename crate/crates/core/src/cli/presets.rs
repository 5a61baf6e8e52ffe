//! Named parameter sets.

use super::config::{ExperimentConfig, Method, Sweep, SweepVar};

fn preset(name: &str, method: Method) -> ExperimentConfig {
    ExperimentConfig {
        name: name.into(),
        method,
        ..Default::default()
    }
}

/// Every shipped preset, in a fixed order.
pub fn presets() -> Vec<ExperimentConfig> {
    let fig1 = ExperimentConfig {
        epsilon: 1.0,
        sweep: Some(Sweep {
            var: SweepVar::Q,
            start: 1.0,
            stop: 8.0,
            steps: 15,
        }),
        ..preset("fig1", Method::Compare)
    };
    let fig3 = ExperimentConfig {
        q: 5.0,
        epsilon: 1.0,
        z_i: 13.0,
        spectrum: true,
        orders: vec![-3, -2, -1, 1, 2, 3],
        ..preset("fig3", Method::Tdse)
    };
    let fig4a = ExperimentConfig {
        q: 4.2,
        epsilon: 0.6,
        spectrum: true,
        ..preset("fig4a", Method::Tdse)
    };
    let fig4b = ExperimentConfig {
        name: "fig4b".into(),
        epsilon: 1.0,
        ..fig4a.clone()
    };
    let optimum = ExperimentConfig {
        q: 4.2,
        bounce_epsilon: [0.6, 1.0, 0.6],
        ..preset("section6-optimum", Method::Interferometer)
    };
    let cesium = preset("cesium-units", Method::Units);
    vec![fig1, fig3, fig4a, fig4b, optimum, cesium]
}

pub fn preset_names() -> Vec<String> {
    presets().into_iter().map(|p| p.name).collect()
}

pub fn find_preset(name: &str) -> Option<ExperimentConfig> {
    presets().into_iter().find(|p| p.name == name)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_names() {
        assert_eq!(
            preset_names(),
            ["fig1", "fig3", "fig4a", "fig4b", "section6-optimum", "cesium-units"]
        );
    }

    #[test]
    fn figure_parameters() {
        let f4b = find_preset("fig4b").unwrap();
        assert_eq!(f4b.epsilon, 1.0);
        assert_eq!(f4b.q, 4.2);
        assert_eq!(f4b.dz_i, 2.0);
        assert_eq!(find_preset("fig4a").unwrap().epsilon, 0.6);
        let f3 = find_preset("fig3").unwrap();
        assert_eq!((f3.q, f3.z_i), (5.0, 13.0));
        let f1 = find_preset("fig1").unwrap();
        assert_eq!(f1.p_i, 100.0);
        assert_eq!(f1.methods, vec![Method::Born, Method::Semiclassical, Method::Tdse]);
        let s = f1.sweep.unwrap();
        assert_eq!((s.var, s.start, s.stop), (SweepVar::Q, 1.0, 8.0));
        assert!(find_preset("fig5").is_none());
    }

    #[test]
    fn presets_round_trip_and_validate() {
        for p in presets() {
            p.validate().unwrap();
            assert_eq!(ExperimentConfig::parse(&p.to_text()).unwrap(), p, "{}", p.name);
        }
    }
}
