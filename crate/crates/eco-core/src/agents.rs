//! Deterministic agent scenarios: investors, profit scalpers, and sandwich
//! attackers trading against one ECO.
//!
//! A scenario is a genesis configuration, a cast of agents with budgets, and
//! a strictly ordered action schedule. Execution is single-threaded and
//! block-like: one action per step, in schedule order, with no mempool or
//! latency model. Actions an agent cannot afford are skipped and logged, not
//! failed. Two runs of the same scenario produce byte-identical traces.
//!
//! Accounting per agent uses average cost basis. Realized PnL books on each
//! burn; unrealized PnL marks remaining holdings at their exit value — the
//! burn reward for the full position — rather than spot times holdings,
//! which would overstate a falling integral.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::exchange;
use crate::numeric::{Dec, NumericError, RoundDir};
use crate::organization::{
    EcoError, EcoState, GenesisConfig, Receipt, Weighting,
};

/// How an agent picks the assessment submitted with a mint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AssessmentPolicy {
    /// Vote the current aggregate (price-neutral).
    #[default]
    MatchAggregate,
    /// Vote a fixed value.
    Fixed(Dec),
    /// Vote `ratio · ā`, evaluated at execution time.
    RatioOfAggregate(Dec),
}

impl AssessmentPolicy {
    fn resolve(&self, state: &EcoState) -> Result<Dec, NumericError> {
        match self {
            AssessmentPolicy::MatchAggregate => Ok(state.aggregate_assessment()),
            AssessmentPolicy::Fixed(v) => Ok(*v),
            AssessmentPolicy::RatioOfAggregate(r) => {
                state.aggregate_assessment().mul(*r, RoundDir::Nearest)
            }
        }
    }
}

impl fmt::Display for AssessmentPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AssessmentPolicy::MatchAggregate => write!(f, "aggregate"),
            AssessmentPolicy::Fixed(v) => write!(f, "{v}"),
            AssessmentPolicy::RatioOfAggregate(r) => write!(f, "ratio:{r}"),
        }
    }
}

impl FromStr for AssessmentPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "aggregate" {
            return Ok(AssessmentPolicy::MatchAggregate);
        }
        if let Some(rest) = s.strip_prefix("ratio:") {
            let r: Dec = rest.parse().map_err(|e| format!("bad ratio: {e}"))?;
            return Ok(AssessmentPolicy::RatioOfAggregate(r));
        }
        let v: Dec = s.parse().map_err(|e| format!("bad assessment: {e}"))?;
        Ok(AssessmentPolicy::Fixed(v))
    }
}

impl Serialize for AssessmentPolicy {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for AssessmentPolicy {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        String::deserialize(deserializer)?.parse().map_err(serde::de::Error::custom)
    }
}

/// When a scalper plans to leave.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExitTrigger {
    /// Sell immediately after the next mint by someone else.
    #[default]
    AfterNextExternalMint,
    /// Sell at a fixed step.
    AtStep(u64),
}

impl fmt::Display for ExitTrigger {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExitTrigger::AfterNextExternalMint => write!(f, "after_next_external_mint"),
            ExitTrigger::AtStep(n) => write!(f, "at_step:{n}"),
        }
    }
}

impl FromStr for ExitTrigger {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "after_next_external_mint" {
            return Ok(ExitTrigger::AfterNextExternalMint);
        }
        if let Some(rest) = s.strip_prefix("at_step:") {
            let n: u64 = rest.parse().map_err(|_| "bad step number".to_string())?;
            return Ok(ExitTrigger::AtStep(n));
        }
        Err(format!("unknown exit trigger {s:?}"))
    }
}

impl Serialize for ExitTrigger {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ExitTrigger {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        String::deserialize(deserializer)?.parse().map_err(serde::de::Error::custom)
    }
}

/// Agent archetypes. The kind documents intent and parameterizes scenario
/// builders; execution itself follows the explicit schedule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "role", rename_all = "snake_case")]
pub enum AgentKind {
    /// Long horizon, buys on due diligence; valuation prices their utility.
    Investor {
        valuation: Dec,
        #[serde(default)]
        assessment: AssessmentPolicy,
    },
    /// Buys early at near-zero prices, exits on the next external mint.
    Scalper {
        entry_step: u64,
        #[serde(default)]
        exit_trigger: ExitTrigger,
    },
    /// Mints just before and burns just after a victim's mint.
    Sandwicher { victim_step: u64, front_amount: Dec },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgentSpec {
    pub id: String,
    #[serde(flatten)]
    pub kind: AgentKind,
    pub budget: Dec,
}

/// One scheduled action.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum AgentAction {
    Mint { payment: Dec, assessment: AssessmentPolicy },
    /// Sell `tokens > 0` from holdings.
    Burn { tokens: Dec },
    BurnAll,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScheduledAction {
    pub step: u64,
    pub agent: String,
    #[serde(flatten)]
    pub action: AgentAction,
}

/// A full scenario: organization config, cast, and ordered schedule.
/// `rng_seed` is carried for policies that want randomness; every packaged
/// policy is deterministic, so it only pins the trace contract.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    #[serde(default)]
    pub rng_seed: u64,
    pub eco: GenesisConfig,
    pub agents: Vec<AgentSpec>,
    #[serde(rename = "actions")]
    pub schedule: Vec<ScheduledAction>,
}

#[derive(Debug, thiserror::Error)]
pub enum AgentError {
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error(transparent)]
    Eco(#[from] EcoError),
    #[error("scenario file: {0}")]
    File(String),
}

impl Scenario {
    pub fn validate(&self) -> Result<(), AgentError> {
        let mut ids = std::collections::BTreeSet::new();
        for agent in &self.agents {
            if agent.budget.is_negative() {
                return Err(AgentError::InvalidScenario(format!(
                    "agent {:?} has negative budget",
                    agent.id
                )));
            }
            if let AgentKind::Investor { valuation, .. } = agent.kind {
                if !valuation.is_positive() {
                    return Err(AgentError::InvalidScenario(format!(
                        "investor {:?} needs a positive valuation",
                        agent.id
                    )));
                }
            }
            if !ids.insert(agent.id.clone()) {
                return Err(AgentError::InvalidScenario(format!("duplicate agent id {:?}", agent.id)));
            }
        }
        let mut last_step = None;
        for action in &self.schedule {
            if !ids.contains(&action.agent) {
                return Err(AgentError::InvalidScenario(format!(
                    "action at step {} names unknown agent {:?}",
                    action.step, action.agent
                )));
            }
            if let Some(prev) = last_step {
                if action.step <= prev {
                    return Err(AgentError::InvalidScenario(format!(
                        "schedule must be strictly ordered by step ({} after {prev})",
                        action.step
                    )));
                }
            }
            last_step = Some(action.step);
        }
        Ok(())
    }

    pub fn from_toml_str(text: &str) -> Result<Scenario, AgentError> {
        let scenario: Scenario =
            toml::from_str(text).map_err(|e| AgentError::File(e.to_string()))?;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("scenario serializes")
    }
}

/// Cash, holdings, and average-cost book for one agent.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AgentBook {
    pub cash: Dec,
    pub holdings: Dec,
    pub cost_basis: Dec,
    pub realized: Dec,
}

/// Final per-agent profit figures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AgentPnl {
    pub cash: Dec,
    pub holdings: Dec,
    pub cost_basis: Dec,
    /// Booked trading profit from completed burns.
    pub realized: Dec,
    /// Exit value of remaining holdings minus their basis.
    pub unrealized: Dec,
    /// realized + unrealized.
    pub mark_to_market: Dec,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceRow {
    pub step: u64,
    pub agent: String,
    pub receipt: Option<Receipt>,
    pub skipped: Option<String>,
    pub cash_after: Dec,
    pub holdings_after: Dec,
}

/// Full run record: every step, the receipt stream, the final state, and
/// per-agent PnL.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceLog {
    pub scenario: String,
    pub config: GenesisConfig,
    pub rows: Vec<TraceRow>,
    pub receipts: Vec<Receipt>,
    pub final_state: EcoState,
    pub pnl: BTreeMap<String, AgentPnl>,
}

impl TraceLog {
    /// Exit value of a token position at the final state: the burn reward
    /// for selling it all, zero for an empty position.
    pub fn exit_value(&self, holdings: Dec) -> Result<Dec, EcoError> {
        exit_value_at(&self.final_state, holdings)
    }

    /// Trace CSV: receipt-journal columns plus agent id, book, and skip
    /// reason.
    pub fn trace_csv(&self) -> String {
        let mut out = String::from(
            "step,agent,seq,kind,m,x,a,a_bar_before,a_bar_after,s_after,r_after,cash,holdings,skipped\n",
        );
        for row in &self.rows {
            match &row.receipt {
                Some(r) => {
                    out.push_str(&format!(
                        "{},{},{},{},{},{},{},{},{},{},{},{},{},\n",
                        row.step,
                        row.agent,
                        r.seq,
                        r.kind.as_str(),
                        r.money,
                        r.tokens,
                        r.assessment.unwrap_or(Dec::ZERO),
                        r.a_bar_before,
                        r.a_bar_after,
                        r.s_after,
                        r.r_after,
                        row.cash_after,
                        row.holdings_after,
                    ));
                }
                None => {
                    out.push_str(&format!(
                        "{},{},,,,,,,,,,{},{},{}\n",
                        row.step,
                        row.agent,
                        row.cash_after,
                        row.holdings_after,
                        row.skipped.as_deref().unwrap_or(""),
                    ));
                }
            }
        }
        out
    }

    /// PnL CSV, one row per agent in id order.
    pub fn pnl_csv(&self) -> String {
        let mut out =
            String::from("agent,cash,holdings,cost_basis,realized,unrealized,mark_to_market\n");
        for (id, pnl) in &self.pnl {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                id, pnl.cash, pnl.holdings, pnl.cost_basis, pnl.realized, pnl.unrealized,
                pnl.mark_to_market,
            ));
        }
        out
    }

    /// The receipt journal for this run (replayable via `organization::replay`).
    pub fn journal_string(&self) -> String {
        let mut buf = Vec::new();
        crate::organization::write_journal(&mut buf, &self.config, &self.receipts)
            .expect("in-memory write");
        String::from_utf8(buf).expect("journal is utf-8")
    }
}

fn exit_value_at(state: &EcoState, holdings: Dec) -> Result<Dec, EcoError> {
    if !holdings.is_positive() {
        return Ok(Dec::ZERO);
    }
    let params = crate::curves::AllocativeParams::new(state.aggregate_assessment(), state.tau())
        .map_err(|_| EcoError::InvalidParams("state params"))?;
    let m = exchange::burn_reward_exact(state.k(), &params, state.supply(), -holdings)?;
    Ok(-m)
}

/// Investor utility: valuation times holdings minus money paid.
pub fn investor_utility(valuation: Dec, tokens: Dec, paid: Dec) -> Result<Dec, NumericError> {
    valuation.mul(tokens, RoundDir::Nearest)?.checked_sub(paid)
}

/// Runs a scenario to completion. Deterministic: identical scenarios give
/// byte-identical trace logs.
pub fn run(scenario: &Scenario) -> Result<TraceLog, AgentError> {
    scenario.validate()?;
    let mut state = EcoState::from_config(&scenario.eco)?;
    let mut books: BTreeMap<String, AgentBook> = scenario
        .agents
        .iter()
        .map(|a| {
            (
                a.id.clone(),
                AgentBook {
                    cash: a.budget,
                    holdings: Dec::ZERO,
                    cost_basis: Dec::ZERO,
                    realized: Dec::ZERO,
                },
            )
        })
        .collect();

    let mut rows = Vec::with_capacity(scenario.schedule.len());
    let mut receipts = Vec::new();

    for action in &scenario.schedule {
        let book = books.get_mut(&action.agent).expect("validated agent");
        let mut receipt = None;
        let mut skipped = None;

        match action.action {
            AgentAction::Mint { payment, assessment } => {
                let a = assessment.resolve(&state).map_err(EcoError::from)?;
                if payment > book.cash {
                    skipped = Some(format!("budget exceeded: cost {payment} cash {}", book.cash));
                } else {
                    match state.mint(payment, a) {
                        Ok(r) => {
                            book.cash = book.cash.checked_sub(payment).map_err(EcoError::from)?;
                            book.holdings =
                                book.holdings.checked_add(r.tokens).map_err(EcoError::from)?;
                            book.cost_basis =
                                book.cost_basis.checked_add(payment).map_err(EcoError::from)?;
                            receipt = Some(r);
                        }
                        Err(e) => skipped = Some(format!("mint rejected: {e}")),
                    }
                }
            }
            AgentAction::Burn { .. } | AgentAction::BurnAll => {
                let tokens = match action.action {
                    AgentAction::BurnAll => book.holdings,
                    AgentAction::Burn { tokens } => tokens,
                    AgentAction::Mint { .. } => unreachable!(),
                };
                if !tokens.is_positive() {
                    skipped = Some("nothing to burn".to_string());
                } else if tokens > book.holdings {
                    skipped = Some(format!(
                        "holdings exceeded: selling {tokens} holds {}",
                        book.holdings
                    ));
                } else {
                    match state.burn(-tokens) {
                        Ok(r) => {
                            let reward = -r.money;
                            // Average-cost release; a full exit clears the
                            // basis exactly.
                            let released = book
                                .cost_basis
                                .mul_div(tokens, book.holdings, RoundDir::Nearest)
                                .map_err(EcoError::from)?;
                            book.cash = book.cash.checked_add(reward).map_err(EcoError::from)?;
                            book.holdings =
                                book.holdings.checked_sub(tokens).map_err(EcoError::from)?;
                            book.cost_basis =
                                book.cost_basis.checked_sub(released).map_err(EcoError::from)?;
                            book.realized = book
                                .realized
                                .checked_add(reward.checked_sub(released).map_err(EcoError::from)?)
                                .map_err(EcoError::from)?;
                            receipt = Some(r);
                        }
                        Err(e) => skipped = Some(format!("burn rejected: {e}")),
                    }
                }
            }
        }

        if let Some(r) = receipt {
            receipts.push(r);
        }
        let book = books[&action.agent];
        rows.push(TraceRow {
            step: action.step,
            agent: action.agent.clone(),
            receipt,
            skipped,
            cash_after: book.cash,
            holdings_after: book.holdings,
        });
    }

    let mut pnl = BTreeMap::new();
    for (id, book) in &books {
        let exit = exit_value_at(&state, book.holdings)?;
        let unrealized = exit.checked_sub(book.cost_basis).map_err(EcoError::from)?;
        let mark_to_market =
            book.realized.checked_add(unrealized).map_err(EcoError::from)?;
        pnl.insert(
            id.clone(),
            AgentPnl {
                cash: book.cash,
                holdings: book.holdings,
                cost_basis: book.cost_basis,
                realized: book.realized,
                unrealized,
                mark_to_market,
            },
        );
    }

    Ok(TraceLog {
        scenario: scenario.name.clone(),
        config: scenario.eco,
        rows,
        receipts,
        final_state: state,
        pnl,
    })
}

// ---------------------------------------------------------------------------
// Packaged scenarios
// ---------------------------------------------------------------------------

/// Down-voting regime where a sandwich attack loses: τ=0.7, θ=0.5, c=0.4.
pub fn sandwich_eco_config() -> GenesisConfig {
    GenesisConfig {
        k: Dec::ONE,
        tau: "0.7".parse().unwrap(),
        theta_avg: "0.5".parse().unwrap(),
        clamp: "0.4".parse().unwrap(),
        weighting: Weighting::EqualPerTransaction,
        a_bar0: Dec::from_int(2),
        solvency_guard: false,
    }
}

/// Near-zero tax rate: the allocative curve tracks the bare bonding curve to
/// within ~1e-9, which is the paper's "τ → 0" plain-curve configuration.
pub fn plain_curve_config() -> GenesisConfig {
    GenesisConfig {
        k: Dec::ONE,
        tau: "0.000000001".parse().unwrap(),
        theta_avg: "0.5".parse().unwrap(),
        clamp: "0.4".parse().unwrap(),
        weighting: Weighting::EqualPerTransaction,
        a_bar0: Dec::from_int(2),
        solvency_guard: false,
    }
}

/// Sandwich attack around a victim mint whose vote drags the aggregate to
/// `ratio · ā`: a seed investor establishes the market, the attacker
/// front-mints, the victim mints and votes, the attacker exits.
pub fn scenario_sandwich(eco: GenesisConfig, victim_assessment_ratio: Dec) -> Scenario {
    let schedule = vec![
        ScheduledAction {
            step: 1,
            agent: "seed".into(),
            action: AgentAction::Mint {
                payment: Dec::from_int(10),
                assessment: AssessmentPolicy::MatchAggregate,
            },
        },
        ScheduledAction {
            step: 2,
            agent: "sandwicher".into(),
            action: AgentAction::Mint {
                payment: Dec::ONE,
                assessment: AssessmentPolicy::MatchAggregate,
            },
        },
        ScheduledAction {
            step: 3,
            agent: "victim".into(),
            action: AgentAction::Mint {
                payment: Dec::from_int(5),
                assessment: AssessmentPolicy::RatioOfAggregate(victim_assessment_ratio),
            },
        },
        ScheduledAction { step: 4, agent: "sandwicher".into(), action: AgentAction::BurnAll },
    ];
    Scenario {
        name: "sandwich".into(),
        rng_seed: 0,
        eco,
        agents: vec![
            AgentSpec {
                id: "seed".into(),
                kind: AgentKind::Investor {
                    valuation: Dec::from_int(2),
                    assessment: AssessmentPolicy::MatchAggregate,
                },
                budget: Dec::from_int(10),
            },
            AgentSpec {
                id: "sandwicher".into(),
                kind: AgentKind::Sandwicher { victim_step: 3, front_amount: Dec::ONE },
                budget: Dec::ONE,
            },
            AgentSpec {
                id: "victim".into(),
                kind: AgentKind::Investor {
                    valuation: Dec::from_int(2),
                    assessment: AssessmentPolicy::RatioOfAggregate(victim_assessment_ratio),
                },
                budget: Dec::from_int(5),
            },
        ],
        schedule,
    }
}

/// The packaged losing-sandwich scenario: victim votes ā/3, so with θ=0.5
/// the aggregate lands at 2ā/3 and the post-mint spot drops.
pub fn scenario_fig_sandwich() -> Scenario {
    let mut s = scenario_sandwich(sandwich_eco_config(), "0.333333333333333333".parse().unwrap());
    s.name = "fig4_sandwich".into();
    s
}

/// Control case: same attack with voting effectively disabled (plain curve);
/// the classic sandwich profits.
pub fn scenario_fig_sandwich_plain() -> Scenario {
    let mut s = scenario_sandwich(plain_curve_config(), "0.333333333333333333".parse().unwrap());
    s.name = "fig4_sandwich_plain_curve".into();
    s
}

/// Profit scalping on a plain curve: the scalper enters first at near-zero
/// prices, one significant investor follows, the scalper exits immediately
/// after.
pub fn scenario_scalper_plain_curve() -> Scenario {
    Scenario {
        name: "fig5_scalper".into(),
        rng_seed: 0,
        eco: plain_curve_config(),
        agents: vec![
            AgentSpec {
                id: "scalper".into(),
                kind: AgentKind::Scalper {
                    entry_step: 1,
                    exit_trigger: ExitTrigger::AfterNextExternalMint,
                },
                budget: Dec::ONE,
            },
            AgentSpec {
                id: "investor".into(),
                kind: AgentKind::Investor {
                    valuation: Dec::from_int(2),
                    assessment: AssessmentPolicy::MatchAggregate,
                },
                budget: Dec::from_int(10),
            },
        ],
        schedule: vec![
            ScheduledAction {
                step: 1,
                agent: "scalper".into(),
                action: AgentAction::Mint {
                    payment: Dec::ONE,
                    assessment: AssessmentPolicy::MatchAggregate,
                },
            },
            ScheduledAction {
                step: 2,
                agent: "investor".into(),
                action: AgentAction::Mint {
                    payment: Dec::from_int(10),
                    assessment: AssessmentPolicy::MatchAggregate,
                },
            },
            ScheduledAction { step: 3, agent: "scalper".into(), action: AgentAction::BurnAll },
        ],
    }
}

/// All packaged scenarios by name.
pub fn builtin_scenarios() -> Vec<Scenario> {
    vec![scenario_fig_sandwich(), scenario_fig_sandwich_plain(), scenario_scalper_plain_curve()]
}

pub fn builtin_scenario(name: &str) -> Option<Scenario> {
    builtin_scenarios().into_iter().find(|s| s.name == name)
}
