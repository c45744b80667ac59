use std::fmt::Write;

pub const METRICS_HEADER: &str = "episode,steps,total_reward,discounted_return,mean_loss,epsilon,laps";

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeMetrics {
    pub episode: usize,
    pub steps: u32,
    pub total_reward: f64,
    pub discounted_return: f64,
    /// NaN when no gradient step ran during the episode.
    pub mean_loss: f64,
    pub epsilon: f64,
    pub laps: u32,
}

impl EpisodeMetrics {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.episode,
            self.steps,
            format_g6(self.total_reward),
            format_g6(self.discounted_return),
            format_g6(self.mean_loss),
            format_g6(self.epsilon),
            self.laps
        )
    }
}

/// Header plus one row per episode, newline-terminated.
pub fn metrics_csv(rows: &[EpisodeMetrics]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    writeln!(out, "{METRICS_HEADER}").unwrap();
    for r in rows {
        writeln!(out, "{}", r.csv_row()).unwrap();
    }
    out
}

/// C's `%.6g`: six significant digits, trailing zeros dropped, exponent form
/// outside `[1e-4, 1e6)`.
pub fn format_g6(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').unwrap();
    let exp: i32 = exp.parse().unwrap();
    if !(-4..6).contains(&exp) {
        let mantissa = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        return format!("{mantissa}e{sign}{:02}", exp.abs());
    }
    let decimals = (5 - exp) as usize;
    trim_zeros(&format!("{x:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}
