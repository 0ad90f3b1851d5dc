//! Method catalogue: FALQON variants, QAOA variants and FALQON-to-QAOA warm
//! starts, with their ids, display labels and fixed hyperparameters.

use std::fmt;
use std::str::FromStr;

use falqon::falqon::{FalqonConfig, FalqonMode, FalqonOrder};
use falqon::qaoa::{QaoaVariant, WarmStartKind, WarmStartSource};
use falqon::{OptimizerBudget, OptimizerKind, ShotPolicy};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::BenchError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FalqonMethod {
    pub order: FalqonOrder,
    pub mode: FalqonMode,
}

/// Hyperparameters of QAOA gradient descent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradientSettings {
    pub learning_rate: f64,
    pub fd_step: f64,
}

impl Default for GradientSettings {
    fn default() -> Self {
        Self {
            learning_rate: OptimizerKind::DEFAULT_LEARNING_RATE,
            fd_step: OptimizerKind::DEFAULT_FD_STEP,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum QaoaOptimizer {
    GradientDescent,
    Powell,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct QaoaMethod {
    pub variant: QaoaVariant,
    pub optimizer: QaoaOptimizer,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MethodSpec {
    Falqon(FalqonMethod),
    Qaoa(QaoaMethod),
    /// FALQON run to the target depth, its angles then seed the QAOA optimizer.
    WarmStart {
        source: FalqonMethod,
        target: QaoaMethod,
    },
}

impl FalqonMethod {
    pub const ALL: [FalqonMethod; 4] = [
        Self::new(FalqonOrder::FirstOrder, FalqonMode::Standard),
        Self::new(FalqonOrder::FirstOrder, FalqonMode::Optimal),
        Self::new(FalqonOrder::SecondOrder, FalqonMode::Standard),
        Self::new(FalqonOrder::SecondOrder, FalqonMode::Optimal),
    ];

    pub const fn new(order: FalqonOrder, mode: FalqonMode) -> Self {
        Self { order, mode }
    }

    pub fn config(self, depth: usize, shots: ShotPolicy) -> FalqonConfig {
        let base = match self.mode {
            FalqonMode::Standard => FalqonConfig::standard(self.order, depth),
            FalqonMode::Optimal => FalqonConfig::optimal(self.order, depth),
        };
        base.with_shots(shots)
    }

    fn id(self) -> &'static str {
        match (self.mode, self.order) {
            (FalqonMode::Standard, FalqonOrder::FirstOrder) => "falqon-fo",
            (FalqonMode::Standard, FalqonOrder::SecondOrder) => "falqon-so",
            (FalqonMode::Optimal, FalqonOrder::FirstOrder) => "opt-falqon-fo",
            (FalqonMode::Optimal, FalqonOrder::SecondOrder) => "opt-falqon-so",
        }
    }

    fn label(self) -> String {
        let order = match self.order {
            FalqonOrder::FirstOrder => "FO",
            FalqonOrder::SecondOrder => "SO",
        };
        match self.mode {
            FalqonMode::Standard => format!("FALQON {order}"),
            FalqonMode::Optimal => format!("Optimal FALQON {order}"),
        }
    }

    fn warm_start_source(self) -> WarmStartSource {
        let kind = match self.mode {
            FalqonMode::Standard => WarmStartKind::FalqonStandard,
            FalqonMode::Optimal => WarmStartKind::FalqonOptimal,
        };
        WarmStartSource::falqon(kind, self.order)
    }
}

impl QaoaMethod {
    pub const ALL: [QaoaMethod; 4] = [
        Self::new(QaoaVariant::Standard, QaoaOptimizer::GradientDescent),
        Self::new(QaoaVariant::Standard, QaoaOptimizer::Powell),
        Self::new(QaoaVariant::MultiAngle, QaoaOptimizer::GradientDescent),
        Self::new(QaoaVariant::MultiAngle, QaoaOptimizer::Powell),
    ];

    pub const fn new(variant: QaoaVariant, optimizer: QaoaOptimizer) -> Self {
        Self { variant, optimizer }
    }

    pub fn optimizer_kind(self, gradient: GradientSettings) -> OptimizerKind {
        match self.optimizer {
            QaoaOptimizer::GradientDescent => OptimizerKind::GradientDescent {
                learning_rate: gradient.learning_rate,
                fd_step: gradient.fd_step,
            },
            QaoaOptimizer::Powell => OptimizerKind::Powell,
        }
    }

    /// 20 outer iterations for both optimizers.
    pub fn budget(self) -> OptimizerBudget {
        OptimizerBudget::default().with_max_iterations(20)
    }

    fn id(self) -> &'static str {
        match (self.variant, self.optimizer) {
            (QaoaVariant::Standard, QaoaOptimizer::GradientDescent) => "qaoa-gd",
            (QaoaVariant::Standard, QaoaOptimizer::Powell) => "qaoa-powell",
            (QaoaVariant::MultiAngle, QaoaOptimizer::GradientDescent) => "qaoa-ma-gd",
            (QaoaVariant::MultiAngle, QaoaOptimizer::Powell) => "qaoa-ma-powell",
        }
    }

    fn label(self) -> String {
        let variant = match self.variant {
            QaoaVariant::Standard => "QAOA",
            QaoaVariant::MultiAngle => "QAOA-MA",
        };
        let optimizer = match self.optimizer {
            QaoaOptimizer::GradientDescent => "GD",
            QaoaOptimizer::Powell => "Powell",
        };
        format!("{variant} ({optimizer})")
    }
}

impl MethodSpec {
    pub fn falqon(order: FalqonOrder, mode: FalqonMode) -> Self {
        Self::Falqon(FalqonMethod::new(order, mode))
    }

    pub fn qaoa(variant: QaoaVariant, optimizer: QaoaOptimizer) -> Self {
        Self::Qaoa(QaoaMethod::new(variant, optimizer))
    }

    pub fn warm_start(source: FalqonMethod, target: QaoaMethod) -> Self {
        Self::WarmStart { source, target }
    }

    /// Stable identifier used in stores, seeds and on the command line.
    pub fn id(&self) -> String {
        match self {
            Self::Falqon(f) => f.id().to_string(),
            Self::Qaoa(q) => q.id().to_string(),
            Self::WarmStart { source, target } => format!("ws-{}-{}", source.id(), target.id()),
        }
    }

    /// Human-readable name for tables.
    pub fn label(&self) -> String {
        match self {
            Self::Falqon(f) => f.label(),
            Self::Qaoa(q) => q.label(),
            Self::WarmStart { source, target } => {
                format!("Warm-Start {} -> {}", source.label(), target.label())
            }
        }
    }

    pub fn warm_start_source(&self) -> Option<WarmStartSource> {
        match self {
            Self::WarmStart { source, .. } => Some(source.warm_start_source()),
            Self::Qaoa(_) => Some(WarmStartSource::fixed()),
            Self::Falqon(_) => None,
        }
    }

    /// The full method list, in reporting order: the four FALQON rows, the
    /// QAOA rows, and every FALQON-to-QAOA warm start grouped by target.
    pub fn catalogue() -> Vec<MethodSpec> {
        use FalqonMode::*;
        use FalqonOrder::*;
        let ws_group = |target: QaoaMethod| {
            [
                (FirstOrder, Standard),
                (FirstOrder, Optimal),
                (SecondOrder, Standard),
                (SecondOrder, Optimal),
            ]
            .map(|(o, m)| Self::warm_start(FalqonMethod::new(o, m), target))
        };
        let [gd, powell, ma_gd, ma_powell] = QaoaMethod::ALL;
        let mut out = vec![
            Self::falqon(FirstOrder, Standard),
            Self::falqon(FirstOrder, Optimal),
            Self::falqon(SecondOrder, Standard),
            Self::falqon(SecondOrder, Optimal),
            Self::Qaoa(gd),
            Self::Qaoa(powell),
        ];
        out.extend(ws_group(gd));
        out.extend(ws_group(powell));
        out.extend([Self::Qaoa(ma_gd), Self::Qaoa(ma_powell)]);
        out.extend(ws_group(ma_gd));
        out.extend(ws_group(ma_powell));
        out
    }

    /// Parses a comma-separated list; `all` expands to [`catalogue`](Self::catalogue).
    pub fn parse_list(text: &str) -> Result<Vec<MethodSpec>, BenchError> {
        let mut out = Vec::new();
        for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            if item == "all" {
                out.extend(Self::catalogue());
            } else {
                out.push(item.parse()?);
            }
        }
        Ok(out)
    }
}

impl FromStr for MethodSpec {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let falqon = |id: &str| FalqonMethod::ALL.into_iter().find(|f| f.id() == id);
        let qaoa = |id: &str| QaoaMethod::ALL.into_iter().find(|q| q.id() == id);
        if let Some(rest) = s.strip_prefix("ws-") {
            if let Some(pos) = rest.find("-qaoa") {
                if let (Some(source), Some(target)) = (falqon(&rest[..pos]), qaoa(&rest[pos + 1..]))
                {
                    return Ok(Self::warm_start(source, target));
                }
            }
        } else if let Some(f) = falqon(s) {
            return Ok(Self::Falqon(f));
        } else if let Some(q) = qaoa(s) {
            return Ok(Self::Qaoa(q));
        }
        Err(BenchError::UnknownMethod(s.to_string()))
    }
}

impl fmt::Display for MethodSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.id())
    }
}

impl Serialize for MethodSpec {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.id())
    }
}

impl<'de> Deserialize<'de> for MethodSpec {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let id = String::deserialize(deserializer)?;
        id.parse().map_err(serde::de::Error::custom)
    }
}
