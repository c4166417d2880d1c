//! Collectors that persist whole configurations.

use std::any::Any;

use drc_core::clusters::decompose;
use drc_core::report::Table;
use drc_core::sampler::{downcast_collector, Collector, MasterSample, SamplerContext};
use drc_core::Result;

/// `omega` of every sample as a hex bitstring in the canonical edge order.
#[derive(Clone, Default)]
pub struct RawDump {
    pub lines: Vec<String>,
}

impl Collector for RawDump {
    fn name(&self) -> String {
        "raw".into()
    }

    fn fresh(&self) -> Box<dyn Collector> {
        Box::new(RawDump::default())
    }

    fn observe(&mut self, s: &MasterSample, _: &SamplerContext) -> Result<()> {
        self.lines.push(s.omega.to_hex());
        Ok(())
    }

    fn merge(&mut self, other: Box<dyn Collector>) -> Result<()> {
        let o: RawDump = downcast_collector(other, "raw")?;
        self.lines.extend(o.lines);
        Ok(())
    }

    fn summary(&self) -> serde_json::Value {
        serde_json::json!({ "n_samples": self.lines.len() })
    }

    fn table(&self) -> Table {
        let mut t = Table::new(&["sample", "omega"]);
        for (i, l) in self.lines.iter().enumerate() {
            t.push(vec![i.to_string(), l.clone()]);
        }
        t
    }

    fn as_any(&self) -> &dyn Any {
        self
    }

    fn into_any(self: Box<Self>) -> Box<dyn Any> {
        self
    }
}

#[derive(Clone, Debug)]
struct ClusterLine {
    size: usize,
    diameter: i32,
    touches_boundary: bool,
    min: (i32, i32),
    max: (i32, i32),
}

/// Clusters of `omega` per sample, ranked by diameter, plus the rank of every vertex.
#[derive(Clone, Default)]
pub struct ClusterDump {
    samples: Vec<(Vec<ClusterLine>, Vec<(i32, i32, u32)>)>,
}

impl ClusterDump {
    /// Vertex raster: `sample, x, y, cluster_rank`.
    pub fn map_table(&self) -> Table {
        let mut t = Table::new(&["sample", "x", "y", "cluster_rank"]);
        for (i, (_, map)) in self.samples.iter().enumerate() {
            for &(x, y, r) in map {
                t.push(vec![i.to_string(), x.to_string(), y.to_string(), r.to_string()]);
            }
        }
        t
    }
}

impl Collector for ClusterDump {
    fn name(&self) -> String {
        "clusters".into()
    }

    fn fresh(&self) -> Box<dyn Collector> {
        Box::new(ClusterDump::default())
    }

    fn observe(&mut self, s: &MasterSample, ctx: &SamplerContext) -> Result<()> {
        let d = ctx.domain();
        let dec = decompose(&s.omega, d)?;
        let lines = dec
            .clusters
            .iter()
            .map(|c| ClusterLine {
                size: c.size(),
                diameter: c.diameter(),
                touches_boundary: c.touches_boundary,
                min: c.min,
                max: c.max,
            })
            .collect();
        let map = (0..d.n_vertices())
            .map(|v| {
                let (x, y) = d.coords(v);
                (x, y, dec.rank_of_vertex[v])
            })
            .collect();
        self.samples.push((lines, map));
        Ok(())
    }

    fn merge(&mut self, other: Box<dyn Collector>) -> Result<()> {
        let o: ClusterDump = downcast_collector(other, "clusters")?;
        self.samples.extend(o.samples);
        Ok(())
    }

    fn summary(&self) -> serde_json::Value {
        let total: usize = self.samples.iter().map(|(l, _)| l.len()).sum();
        let mean = total as f64 / self.samples.len().max(1) as f64;
        serde_json::json!({ "n_samples": self.samples.len(), "mean_clusters": mean })
    }

    fn table(&self) -> Table {
        let mut t = Table::new(&[
            "sample",
            "cluster_rank",
            "size",
            "diameter",
            "touches_boundary",
            "min_x",
            "min_y",
            "max_x",
            "max_y",
        ]);
        for (i, (lines, _)) in self.samples.iter().enumerate() {
            for (r, c) in lines.iter().enumerate() {
                t.push(vec![
                    i.to_string(),
                    r.to_string(),
                    c.size.to_string(),
                    c.diameter.to_string(),
                    c.touches_boundary.to_string(),
                    c.min.0.to_string(),
                    c.min.1.to_string(),
                    c.max.0.to_string(),
                    c.max.1.to_string(),
                ]);
            }
        }
        t
    }

    fn as_any(&self) -> &dyn Any {
        self
    }

    fn into_any(self: Box<Self>) -> Box<dyn Any> {
        self
    }
}
