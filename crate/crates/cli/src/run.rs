//! Dispatch of a validated [`RunConfig`] to the library.

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::time::{SystemTime, UNIX_EPOCH};

use soundcone::bounds::bound_grid;
use soundcone::channel::{
    contour_exponent, ed_oracle_probability, signal_curve, ChannelSpec, Couplings,
};
use soundcone::hopping::{
    cone_velocity, correlation_grid, delta_frequencies, density_of_states, dispersion_finite,
    dispersion_infinite, mutual_information_grid, occupation_grid, HoppingModel,
};

use crate::config::{DispersionSel, HoppingSel, Job, RunConfig};
use crate::output::{Column, Curve, Data, GridFile};
use crate::CliError;

pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Seconds since the epoch, taken from `SOURCE_DATE_EPOCH` when set so that
/// whole files can be reproduced byte for byte.
pub fn timestamp() -> String {
    match std::env::var("SOURCE_DATE_EPOCH") {
        Ok(s) if !s.trim().is_empty() => s.trim().to_string(),
        _ => SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0)
            .to_string(),
    }
}

pub fn run(cfg: &RunConfig) -> Result<GridFile, CliError> {
    let mut meta = cfg.meta.clone();
    meta.insert("artifact_version".into(), ARTIFACT_VERSION.into());
    meta.insert("timestamp".into(), timestamp());
    match &cfg.job {
        Job::Bound {
            kind,
            deltas,
            times,
        } => GridFile::from_grid(bound_grid(kind, deltas, times)?, meta),
        Job::Hopping {
            model,
            quantity,
            rows,
            times,
            threshold,
        } => match quantity {
            HoppingSel::Occupation => {
                GridFile::from_grid(occupation_grid(model, rows, times)?, meta)
            }
            HoppingSel::Correlations => {
                GridFile::from_grid(correlation_grid(model, rows, times)?, meta)
            }
            HoppingSel::MutualInfo => {
                GridFile::from_grid(mutual_information_grid(model, rows, times)?, meta)
            }
            HoppingSel::Velocity => velocity(model, rows, times, *threshold, meta),
        },
        Job::Dispersion { form, alpha, n } => dispersion(*form, *alpha, *n, meta),
        Job::Dos { alpha, n_k, edges } => {
            let d = density_of_states(*alpha, *n_k, edges)?;
            meta.insert("quantity".into(), "group_velocity_density".into());
            meta.insert("out_of_range_mass".into(), d.out_of_range_mass.to_string());
            meta.insert(
                "normalisation".into(),
                "density integrates to 1 - out_of_range_mass".into(),
            );
            meta.insert(
                "derivative".into(),
                "central difference on the k grid".into(),
            );
            if *alpha <= 2.0 {
                meta.insert("excluded_modes".into(), "m = 0, 1, n_k-1".into());
            }
            let curve = Curve::new(vec![
                Column::dense("v_lo", d.edges[..d.edges.len() - 1].iter().copied()),
                Column::dense("v_hi", d.edges[1..].iter().copied()),
                Column::dense("density", d.density.iter().copied()),
            ])?;
            Ok(GridFile {
                meta,
                data: Data::Curve(curve),
            })
        }
        Job::ChannelCurve {
            spec,
            times,
            oracle,
        } => channel_curve(spec, times, *oracle, meta),
        Job::ChannelExponent {
            alpha,
            epsilon,
            n_list,
        } => {
            let c = contour_exponent(*alpha, *epsilon, n_list)?;
            meta.insert("quantity".into(), "channel_contour".into());
            meta.insert("exponent".into(), c.fit.exponent.to_string());
            meta.insert("prefactor".into(), c.fit.prefactor.to_string());
            meta.insert("fit_residual".into(), c.fit.residual.to_string());
            meta.insert(
                "fit".into(),
                "least squares of ln delta against ln t".into(),
            );
            let pruned: Vec<String> = c.pruned.iter().map(|n| n.to_string()).collect();
            meta.insert("pruned_beyond_horizon".into(), pruned.join(" "));
            let curve = Curve::new(vec![
                Column::dense("t", c.points.iter().map(|p| p.0)),
                Column::dense("delta", c.points.iter().map(|p| p.1)),
            ])?;
            Ok(GridFile {
                meta,
                data: Data::Curve(curve),
            })
        }
    }
}

fn velocity(
    model: &HoppingModel,
    deltas: &[usize],
    times: &[f64],
    relative: f64,
    mut meta: BTreeMap<String, String>,
) -> Result<GridFile, CliError> {
    let grid = correlation_grid(model, deltas, times)?;
    let absolute = relative * grid.max_value();
    let cone = cone_velocity(&grid, absolute)?;
    meta.extend(grid.meta().iter().map(|(k, v)| (k.clone(), v.clone())));
    meta.insert("quantity".into(), "cone_front".into());
    meta.insert("threshold_absolute".into(), absolute.to_string());
    meta.insert(
        "threshold_reference".into(),
        "maximum of the correlation grid".into(),
    );
    meta.insert("velocity".into(), cone.velocity.to_string());
    meta.insert("intercept".into(), cone.intercept.to_string());
    let curve = Curve::new(vec![
        Column::dense("t", cone.points.iter().map(|p| p.0)),
        Column::dense("front_delta", cone.points.iter().map(|p| p.1)),
    ])?;
    Ok(GridFile {
        meta,
        data: Data::Curve(curve),
    })
}

fn dispersion(
    form: DispersionSel,
    alpha: f64,
    n: usize,
    mut meta: BTreeMap<String, String>,
) -> Result<GridFile, CliError> {
    let ms: Vec<f64> = (0..n).map(|m| m as f64).collect();
    let ks: Vec<f64> = (0..n).map(|m| TAU * m as f64 / n as f64).collect();
    let (name, values) = match form {
        DispersionSel::Finite => {
            let model = HoppingModel::new(n, alpha)?;
            let eps = (0..n)
                .map(|m| dispersion_finite(&model, m))
                .collect::<soundcone::Result<Vec<_>>>()?;
            ("epsilon", eps)
        }
        DispersionSel::Infinite => {
            let eps = ks
                .iter()
                .map(|&k| dispersion_infinite(alpha, k))
                .collect::<soundcone::Result<Vec<_>>>()?;
            ("epsilon", eps)
        }
        DispersionSel::Delta => ("delta", delta_frequencies(&HoppingModel::new(n, alpha)?)?),
    };
    meta.insert(
        "quantity".into(),
        format!(
            "dispersion_{}",
            match form {
                DispersionSel::Finite => "finite",
                DispersionSel::Infinite => "infinite",
                DispersionSel::Delta => "delta",
            }
        ),
    );
    meta.insert("hopping".into(), "d^-alpha".into());
    let curve = Curve::new(vec![
        Column::dense("m", ms),
        Column::dense("k", ks),
        Column::dense(name, values),
    ])?;
    Ok(GridFile {
        meta,
        data: Data::Curve(curve),
    })
}

fn channel_curve(
    spec: &ChannelSpec,
    times: &[f64],
    oracle: bool,
    mut meta: BTreeMap<String, String>,
) -> Result<GridFile, CliError> {
    let c = signal_curve(spec, times)?;
    meta.insert("quantity".into(), "signal_probability".into());
    meta.insert("sender".into(), spec.sender().to_string());
    meta.insert("receiver".into(), spec.receiver().to_string());
    meta.insert("encoding".into(), "sigma^x on the sender".into());
    meta.insert("measurement".into(), "|+><+| on the receiver".into());
    meta.insert("direct_coupling".into(), spec.direct_coupling().to_string());
    meta.insert(
        "spectator_coupling".into(),
        spec.spectator_coupling().to_string(),
    );
    if let Couplings::PowerLaw { .. } = spec.kind() {
        meta.insert("coupling_convention".into(), "d^-alpha".into());
    }
    meta.insert(
        "horizon".into(),
        c.horizon
            .map(|h| h.to_string())
            .unwrap_or_else(|| "none".into()),
    );
    let mut columns = vec![
        Column::dense("t", c.times.iter().copied()),
        Column::dense("p_exact", c.p_exact.iter().copied()),
        Column::sparse("p_lower", c.p_lower.clone()),
        Column::sparse("horizon", vec![c.horizon; c.times.len()]),
    ];
    if oracle {
        let ed = times
            .iter()
            .map(|&t| ed_oracle_probability(spec, t))
            .collect::<soundcone::Result<Vec<_>>>()?;
        columns.push(Column::dense("p_ed", ed));
    }
    Ok(GridFile {
        meta,
        data: Data::Curve(Curve::new(columns)?),
    })
}
