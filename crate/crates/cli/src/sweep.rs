use anyhow::{bail, Context, Result};

/// One swept SNR axis, evenly spaced in dB.
#[derive(Clone, Debug, PartialEq)]
pub struct Axis {
    pub user: usize,
    pub start_db: f64,
    pub stop_db: f64,
    pub steps: usize,
}

impl Axis {
    pub fn parse(text: &str) -> Result<Self> {
        let parts: Vec<&str> = text.split(':').collect();
        if parts.len() != 4 {
            bail!("axis '{text}': expected user:start_db:stop_db:steps");
        }
        let axis = Axis {
            user: parts[0].trim().parse().with_context(|| format!("axis '{text}': user"))?,
            start_db: parts[1].trim().parse().with_context(|| format!("axis '{text}': start"))?,
            stop_db: parts[2].trim().parse().with_context(|| format!("axis '{text}': stop"))?,
            steps: parts[3].trim().parse().with_context(|| format!("axis '{text}': steps"))?,
        };
        if axis.steps < 2 {
            bail!("axis '{text}': steps must be at least 2");
        }
        if axis.start_db == axis.stop_db {
            bail!("axis '{text}': start and stop coincide");
        }
        Ok(axis)
    }

    pub fn value(&self, i: usize) -> f64 {
        self.start_db + (self.stop_db - self.start_db) * i as f64 / (self.steps - 1) as f64
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepSpec {
    pub axes: [Axis; 2],
    pub fixed: Vec<(usize, f64)>,
}

impl SweepSpec {
    pub fn parse(axes: &[String], overrides: &[String]) -> Result<Self> {
        if axes.len() != 2 {
            bail!("stability-map needs exactly two --axis flags, got {}", axes.len());
        }
        let a = Axis::parse(&axes[0])?;
        let b = Axis::parse(&axes[1])?;
        if a.user == b.user {
            bail!("both axes sweep user {}", a.user);
        }
        let fixed = overrides
            .iter()
            .map(|o| {
                let (u, v) = o.split_once('=').with_context(|| format!("override '{o}': expected user=snr_db"))?;
                Ok((u.trim().parse()?, v.trim().parse()?))
            })
            .collect::<Result<Vec<(usize, f64)>>>()?;
        Ok(SweepSpec { axes: [a, b], fixed })
    }

    /// Grid points in row-major order (first axis outer).
    pub fn points(&self) -> Vec<(f64, f64)> {
        let [a, b] = &self.axes;
        (0..a.steps)
            .flat_map(|i| (0..b.steps).map(move |j| (a.value(i), b.value(j))))
            .collect()
    }

    /// Base SNRs with overrides and one grid point applied.
    pub fn apply(&self, base: &[f64], point: (f64, f64)) -> Result<Vec<f64>> {
        let mut snr = base.to_vec();
        let k = snr.len();
        for &(u, v) in &self.fixed {
            *snr.get_mut(u).with_context(|| format!("override user {u} out of range for K={k}"))? = v;
        }
        for (axis, v) in self.axes.iter().zip([point.0, point.1]) {
            *snr.get_mut(axis.user)
                .with_context(|| format!("axis user {} out of range for K={k}", axis.user))? = v;
        }
        Ok(snr)
    }
}
