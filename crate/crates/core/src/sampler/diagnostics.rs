//! Split potential-scale reduction and autocorrelation-based effective
//! sample size, following the multi-chain estimators used by Stan.

use super::{PosteriorDraws, SamplerError};
use crate::model::{N_STATIC, SIGMA_LAMBDA, STATIC_NAMES};

const MIN_CHAINS: usize = 2;
const MIN_DRAWS: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct ParamDiagnostic {
    pub name: String,
    pub rhat: f64,
    pub ess: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Diagnostics {
    pub params: Vec<ParamDiagnostic>,
    pub mean_accept: f64,
    pub divergence_count: usize,
}

impl Diagnostics {
    pub fn get(&self, name: &str) -> Option<&ParamDiagnostic> {
        self.params.iter().find(|p| p.name == name)
    }

    /// Largest R̂ over the named parameters (all when `names` is empty).
    pub fn max_rhat(&self, names: &[&str]) -> f64 {
        self.params
            .iter()
            .filter(|p| names.is_empty() || names.contains(&p.name.as_str()))
            .map(|p| p.rhat)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("parameter,rhat,ess\n");
        for p in &self.params {
            out.push_str(&format!("{},{},{}\n", p.name, p.rhat, p.ess));
        }
        out.push_str(&format!("mean_accept,{},\n", self.mean_accept));
        out.push_str(&format!("divergences,{},\n", self.divergence_count));
        out
    }
}

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

fn sample_var(x: &[f64]) -> f64 {
    let m = mean(x);
    x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (x.len() as f64 - 1.0)
}

fn rhat_of(chains: &[&[f64]]) -> f64 {
    let n = chains.iter().map(|c| c.len()).min().unwrap_or(0);
    let means: Vec<f64> = chains.iter().map(|c| mean(&c[..n])).collect();
    let vars: Vec<f64> = chains.iter().map(|c| sample_var(&c[..n])).collect();
    let w = mean(&vars);
    let between = if means.len() > 1 { sample_var(&means) } else { 0.0 };
    if w == 0.0 {
        return if between == 0.0 { 1.0 } else { f64::INFINITY };
    }
    let nf = n as f64;
    let var_plus = w * (nf - 1.0) / nf + between;
    (var_plus / w).sqrt()
}

/// Split-R̂: each chain is halved (the middle draw dropped when odd).
pub fn split_rhat(chains: &[&[f64]]) -> f64 {
    let n = chains.iter().map(|c| c.len()).min().unwrap_or(0);
    let half = n / 2;
    let mut split = Vec::with_capacity(2 * chains.len());
    for c in chains {
        split.push(&c[..half]);
        split.push(&c[n - half..n]);
    }
    rhat_of(&split)
}

/// Multi-chain ESS with Geyer's initial monotone sequence, capped at
/// `N log₁₀ N` for antithetic chains.
pub fn effective_sample_size(chains: &[&[f64]]) -> f64 {
    let m = chains.len();
    let n = chains.iter().map(|c| c.len()).min().unwrap_or(0);
    let total = (m * n) as f64;
    if n < 4 {
        return f64::NAN;
    }
    let centered: Vec<Vec<f64>> = chains
        .iter()
        .map(|c| {
            let mu = mean(&c[..n]);
            c[..n].iter().map(|v| v - mu).collect()
        })
        .collect();
    let acov = |lag: usize| -> f64 {
        centered
            .iter()
            .map(|c| c[..n - lag].iter().zip(&c[lag..]).map(|(a, b)| a * b).sum::<f64>() / n as f64)
            .sum::<f64>()
            / m as f64
    };
    let nf = n as f64;
    let acov0 = acov(0);
    let mean_var = acov0 * nf / (nf - 1.0);
    let chain_means: Vec<f64> = chains.iter().map(|c| mean(&c[..n])).collect();
    let mut var_plus = mean_var * (nf - 1.0) / nf;
    if m > 1 {
        var_plus += sample_var(&chain_means);
    }
    if var_plus == 0.0 {
        return total;
    }

    let mut rho = vec![0.0; n + 2];
    let mut rho_even = 1.0;
    rho[0] = rho_even;
    let mut rho_odd = 1.0 - (mean_var - acov(1)) / var_plus;
    rho[1] = rho_odd;
    let mut s = 1;
    while s < n - 4 && rho_even + rho_odd > 0.0 {
        rho_even = 1.0 - (mean_var - acov(s + 1)) / var_plus;
        rho_odd = 1.0 - (mean_var - acov(s + 2)) / var_plus;
        if rho_even + rho_odd >= 0.0 {
            rho[s + 1] = rho_even;
            rho[s + 2] = rho_odd;
        }
        s += 2;
    }
    let max_s = s;
    if rho_even > 0.0 {
        rho[max_s + 1] = rho_even;
    }
    let mut k = 1;
    while k + 3 <= max_s {
        if rho[k + 1] + rho[k + 2] > rho[k - 1] + rho[k] {
            rho[k + 1] = (rho[k - 1] + rho[k]) / 2.0;
            rho[k + 2] = rho[k + 1];
        }
        k += 2;
    }
    let tau = -1.0 + 2.0 * rho[..max_s].iter().sum::<f64>() + rho[max_s + 1];
    let tau = tau.max(1.0 / total.log10());
    (total / tau).min(total * m as f64)
}

/// R̂ and ESS for named scalar series, each given as one slice per chain.
pub fn diagnose(columns: &[(String, Vec<Vec<f64>>)]) -> Result<Vec<ParamDiagnostic>, SamplerError> {
    let mut out = Vec::with_capacity(columns.len());
    for (name, chains) in columns {
        let draws = chains.iter().map(|c| c.len()).min().unwrap_or(0);
        if chains.len() < MIN_CHAINS || draws < MIN_DRAWS {
            return Err(SamplerError::InsufficientDraws {
                min_chains: MIN_CHAINS,
                min_draws: MIN_DRAWS,
                chains: chains.len(),
                draws,
            });
        }
        let slices: Vec<&[f64]> = chains.iter().map(|c| c.as_slice()).collect();
        out.push(ParamDiagnostic { name: name.clone(), rhat: split_rhat(&slices), ess: effective_sample_size(&slices) });
    }
    Ok(out)
}

/// Diagnostics over the static parameters, with `σ_λ` taken in absolute
/// value since its sign is not identified.
pub fn diagnostics(draws: &PosteriorDraws) -> Result<Diagnostics, SamplerError> {
    let columns: Vec<(String, Vec<Vec<f64>>)> = (0..N_STATIC)
        .map(|i| {
            let mut chains = draws.column(i);
            if i == SIGMA_LAMBDA {
                chains.iter_mut().flatten().for_each(|v| *v = v.abs());
            }
            (STATIC_NAMES[i].to_string(), chains)
        })
        .collect();
    let params = diagnose(&columns)?;
    Ok(Diagnostics { params, mean_accept: draws.mean_accept(), divergence_count: draws.divergences() })
}
