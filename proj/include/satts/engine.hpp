#pragma once

// Deterministic drivers for the transition systems: eager unit propagation,
// ascending or seeded decision order, 1-UIP conflict analysis, minimal
// backjump levels, and learn/forget/restart policies. Every emitted step is
// a legal rule instance of the chosen system.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "satts/core.hpp"
#include "satts/rules.hpp"

namespace satts::engine {

using rules::CdclState;
using rules::Context;
using rules::FullState;
using rules::RuleInstance;
using rules::SearchState;
using rules::System;

/// The standard restart-interval sequence 1,1,2,1,1,2,4,... (1-based).
inline int lubySequence(int i) {
  if (i < 1)
    throw PreconditionError("lubySequence: index must be positive");
  for (;;) {
    int k = 1;
    while ((1 << (k + 1)) - 1 <= i)
      ++k;
    if (i == (1 << k) - 1)
      return 1 << (k - 1);
    i -= (1 << k) - 1; // recurse on i - 2^k + 1 within the next block
  }
}

enum class SystemChoice { dpll, backjump, learn, cdcl, full };

inline const char* name(SystemChoice s) {
  switch (s) {
  case SystemChoice::dpll: return "dpll";
  case SystemChoice::backjump: return "backjump";
  case SystemChoice::learn: return "learn";
  case SystemChoice::cdcl: return "cdcl";
  case SystemChoice::full: return "full";
  }
  return "?";
}

inline std::optional<SystemChoice> systemChoiceFromName(const std::string& s) {
  for (SystemChoice c : {SystemChoice::dpll, SystemChoice::backjump, SystemChoice::learn,
                         SystemChoice::cdcl, SystemChoice::full})
    if (s == name(c))
      return c;
  return std::nullopt;
}

enum class DecideOrder { ascending, randomSeeded };

struct RestartPolicy {
  enum class Kind { none, everyConflict, luby, geometric };
  Kind kind = Kind::none;
  int lubyUnit = 32;
  double geometricBase = 100.0;
  double geometricFactor = 1.5;

  static RestartPolicy none() { return RestartPolicy{}; }
  static RestartPolicy everyConflict() { return RestartPolicy{Kind::everyConflict, 0, 0, 0}; }
  static RestartPolicy luby(int unit) { return RestartPolicy{Kind::luby, unit, 0, 0}; }
  static RestartPolicy geometric(double base, double factor) {
    return RestartPolicy{Kind::geometric, 0, base, factor};
  }
};

struct ForgetPolicy {
  enum class Kind { none, sizeThreshold };
  Kind kind = Kind::none;
  int maxLearnt = 0;
  int keepRecent = 0;

  static ForgetPolicy none() { return ForgetPolicy{}; }
  static ForgetPolicy sizeThreshold(int maxLearnt, int keepRecent) {
    return ForgetPolicy{Kind::sizeThreshold, maxLearnt, keepRecent};
  }
};

using TraceSink = std::function<void(const RuleInstance&)>;

struct Strategy {
  SystemChoice system = SystemChoice::cdcl;
  DecideOrder decideOrder = DecideOrder::ascending;
  std::uint64_t seed = 0;
  RestartPolicy restart = RestartPolicy::none();
  ForgetPolicy forget = ForgetPolicy::none();
  long long stepBudget = 10'000'000;
  TraceSink traceSink;
};

struct Stats {
  long long steps = 0;
  long long decisions = 0;
  long long propagations = 0;
  long long conflicts = 0;
  long long learnt = 0;
  long long restarts = 0;
  long long forgotten = 0;
};

struct Answer {
  bool satisfiable = false;
  std::optional<Valuation> model;
  Stats stats;
};

/// The solve step budget was exhausted; carries the partial statistics.
class StepBudgetError : public BudgetError {
public:
  StepBudgetError(const std::string& what, Stats s) : BudgetError(what), stats(s) {}
  Stats stats;
};

/// The rule system a run of this strategy is a derivation of (and therefore
/// the system its trace verifies under).
inline System traceSystem(const Strategy& strat) {
  switch (strat.system) {
  case SystemChoice::dpll: return System::dpll;
  case SystemChoice::backjump: return System::backjump;
  case SystemChoice::learn: return System::learn;
  case SystemChoice::cdcl: return System::cdcl;
  case SystemChoice::full:
    if (strat.restart.kind != RestartPolicy::Kind::none &&
        strat.forget.kind != ForgetPolicy::Kind::none)
      return System::full;
    if (strat.restart.kind != RestartPolicy::Kind::none)
      return System::cdclRestart;
    return System::cdclForget;
  }
  return System::cdcl;
}

// --- pure helper operations ---------------------------------------------------

/// Minimal backjump level for a UIP clause: the greatest level among the
/// opposites of the non-UIP literals, or 0 for a singleton clause.
inline int minimalBackjumpLevel(const Clause& c, Literal l, const Trail& m) {
  if (!rules::isUIP(l, c, m) || level(l.opposite(), m) == 0)
    throw PreconditionError("minimalBackjumpLevel: clause has no unique implication point "
                            "above level 0");
  int best = 0;
  for (Literal x : removeAll(c, l))
    best = std::max(best, level(x.opposite(), m));
  return best;
}

/// The unit propagations a deterministic exhaustive pass performs from the
/// given trail: smallest clause index first, stopping at a false clause.
inline std::vector<RuleInstance> propagateExhaustively(const Trail& start, const Formula& f) {
  std::vector<RuleInstance> steps;
  Trail m = start;
  for (;;) {
    if (formulaFalse(f, m))
      return steps;
    bool found = false;
    for (const Clause& c : f) {
      for (Literal l : removeDuplicateLiterals(c)) {
        if (isUnit(c, l, m)) {
          steps.push_back(rules::propagateStep(c, l));
          m.push_back(implied(l));
          found = true;
          break;
        }
      }
      if (found)
        break;
    }
    if (!found)
      return steps;
  }
}

namespace detail {

/// Search the formula for the first clause that is a reason for l.
inline std::optional<Clause> findReason(const Formula& f, Literal l, const Trail& m) {
  for (const Clause& c : f)
    if (isReason(c, l, m))
      return c;
  return std::nullopt;
}

template <class GetReason>
std::vector<RuleInstance> analyze(Clause conflict, const Trail& m, GetReason&& reasonOf) {
  std::vector<RuleInstance> steps;
  Clause c = std::move(conflict);
  for (;;) {
    if (c.empty())
      return steps;
    Literal lastOpp = lastAssertedLiteral(oppositesOf(c), m);
    Literal l = lastOpp.opposite();
    if (level(lastOpp, m) > 0 && rules::isUIP(l, c, m))
      return steps;
    Clause reason = reasonOf(lastOpp);
    steps.push_back(rules::explainStep(l, reason));
    c = resolvent(c, reason, l);
  }
}

} // namespace detail

/// 1-UIP conflict analysis as explain steps: repeatedly explain the last
/// falsified literal of the conflict-analysis clause with a reason clause
/// from the formula, until the clause is empty or has a unique implication
/// point above level 0.
inline std::vector<RuleInstance> analyzeConflict(const CdclState& s, const Context& ctx) {
  if (!s.inConflict)
    throw PreconditionError("analyzeConflict: conflict flag is not set");
  return detail::analyze(s.conflictClause, s.trail, [&](Literal l) {
    auto c = detail::findReason(s.formula, l, s.trail);
    if (!c)
      throw PreconditionError("analyzeConflict: internal-invariant error, no reason clause "
                              "for implied literal " + toString(l));
    return *c;
  });
}

inline std::vector<RuleInstance> analyzeConflict(const FullState& s, const Context& ctx) {
  if (!s.inConflict)
    throw PreconditionError("analyzeConflict: conflict flag is not set");
  Formula f = rules::combinedFormula(ctx, s);
  return detail::analyze(s.conflictClause, s.trail, [&](Literal l) {
    auto c = detail::findReason(f, l, s.trail);
    if (!c)
      throw PreconditionError("analyzeConflict: internal-invariant error, no reason clause "
                              "for implied literal " + toString(l));
    return *c;
  });
}

// --- the driver ------------------------------------------------------------------

namespace detail {

// Indexed, counter-based working state. Clause counters are kept over the
// deduplicated literal sets so duplicate-literal clauses report unit and
// false status exactly as the semantic predicates do.
class Driver {
public:
  Driver(const Context& ctx, const Strategy& strat)
      : ctx_(ctx), strat_(strat), system_(traceSystem(strat)) {
    for (int v : ctx_.vars)
      slotOf_[v] = static_cast<int>(varList_.size()), varList_.push_back(v);
    values_.assign(varList_.size(), 0);
    levels_.assign(varList_.size(), 0);
    positions_.assign(varList_.size(), -1);

    decideVars_.assign(ctx_.config.decisionVars.begin(), ctx_.config.decisionVars.end());
    polarity_.assign(decideVars_.size(), true);
    if (strat_.decideOrder == DecideOrder::randomSeeded) {
      std::mt19937_64 rng(strat_.seed);
      std::shuffle(decideVars_.begin(), decideVars_.end(), rng);
      for (std::size_t i = 0; i < polarity_.size(); ++i)
        polarity_[i] = (rng() & 1u) != 0;
    }

    for (const Clause& c : ctx_.f0)
      addClause(c);
    inputCount_ = ctx_.f0.size();
  }

  Answer run() {
    for (;;) {
      int conflictIdx = propagate();
      if (conflictIdx < 0) {
        std::optional<Literal> next = pickBranch();
        if (!next) {
          Answer a;
          a.satisfiable = true;
          a.model = elements(trail_);
          a.stats = stats_;
          return a;
        }
        emit(rules::decideStep(*next));
        ++stats_.decisions;
        assertLiteral(*next, true, {});
        continue;
      }
      ++stats_.conflicts;
      if (!repairConflict(conflictIdx)) {
        Answer a;
        a.satisfiable = false;
        a.stats = stats_;
        return a;
      }
    }
  }

private:
  static constexpr std::int8_t kUndef = 0, kTrue = 1, kFalse = 2;

  const Context& ctx_;
  const Strategy& strat_;
  System system_;

  std::vector<int> varList_;
  std::map<int, int> slotOf_;
  std::vector<std::int8_t> values_;
  std::vector<int> levels_;
  std::vector<int> positions_;

  Trail trail_;
  std::vector<Clause> reasons_; // parallel to trail_; empty when none
  std::vector<int> decisionPositions_;

  std::vector<Clause> clauses_;   // input clauses then learnt clauses
  std::vector<Clause> distinct_;  // per-clause deduplicated literals
  std::size_t inputCount_ = 0;
  std::vector<int> numFalse_, numTrue_;
  std::map<int, std::vector<int>> occ_; // literal code -> clause indices
  std::set<int> unitCandidates_, falseClauses_;

  std::vector<int> decideVars_;
  std::vector<bool> polarity_;

  Stats stats_;
  long long conflictsSinceRestart_ = 0;
  int restartsSoFar_ = 0;

  // --- bookkeeping -------------------------------------------------------

  std::int8_t valueOf(Literal l) const {
    std::int8_t v = values_[static_cast<std::size_t>(slotOf_.at(l.var()))];
    if (v == kUndef)
      return kUndef;
    return (v == kTrue) == l.positive() ? kTrue : kFalse;
  }

  void addClause(const Clause& c) {
    int idx = static_cast<int>(clauses_.size());
    clauses_.push_back(c);
    distinct_.push_back(removeDuplicateLiterals(c));
    numFalse_.push_back(0);
    numTrue_.push_back(0);
    for (Literal l : distinct_.back()) {
      occ_[l.code()].push_back(idx);
      std::int8_t v = valueOf(l);
      if (v == kTrue)
        ++numTrue_[idx];
      else if (v == kFalse)
        ++numFalse_[idx];
    }
    updateClauseStatus(idx);
  }

  void updateClauseStatus(int idx) {
    int size = static_cast<int>(distinct_[static_cast<std::size_t>(idx)].size());
    bool isFalse = numFalse_[idx] == size;
    bool isUnitCandidate = numTrue_[idx] == 0 && numFalse_[idx] == size - 1;
    if (isFalse)
      falseClauses_.insert(idx);
    else
      falseClauses_.erase(idx);
    if (isUnitCandidate)
      unitCandidates_.insert(idx);
    else
      unitCandidates_.erase(idx);
  }

  void assertLiteral(Literal l, bool isDecision, Clause reason) {
    int slot = slotOf_.at(l.var());
    values_[static_cast<std::size_t>(slot)] = l.positive() ? kTrue : kFalse;
    positions_[static_cast<std::size_t>(slot)] = static_cast<int>(trail_.size());
    if (isDecision)
      decisionPositions_.push_back(static_cast<int>(trail_.size()));
    levels_[static_cast<std::size_t>(slot)] = static_cast<int>(decisionPositions_.size());
    trail_.push_back(TrailEntry{l, isDecision});
    reasons_.push_back(std::move(reason));
    if (auto it = occ_.find(l.code()); it != occ_.end())
      for (int idx : it->second) {
        ++numTrue_[idx];
        updateClauseStatus(idx);
      }
    if (auto it = occ_.find(-l.code()); it != occ_.end())
      for (int idx : it->second) {
        ++numFalse_[idx];
        updateClauseStatus(idx);
      }
  }

  void popLiteral() {
    TrailEntry e = trail_.back();
    trail_.pop_back();
    reasons_.pop_back();
    if (e.isDecision)
      decisionPositions_.pop_back();
    int slot = slotOf_.at(e.lit.var());
    values_[static_cast<std::size_t>(slot)] = kUndef;
    positions_[static_cast<std::size_t>(slot)] = -1;
    if (auto it = occ_.find(e.lit.code()); it != occ_.end())
      for (int idx : it->second) {
        --numTrue_[idx];
        updateClauseStatus(idx);
      }
    if (auto it = occ_.find(-e.lit.code()); it != occ_.end())
      for (int idx : it->second) {
        --numFalse_[idx];
        updateClauseStatus(idx);
      }
  }

  /// Shrink the trail to the prefix whose entries have level <= lvl.
  void shrinkToLevel(int lvl) {
    while (static_cast<int>(decisionPositions_.size()) > lvl)
      popLiteral();
    // entries after the lvl-th decision are exactly those above it
  }

  void emit(const RuleInstance& r) {
    ++stats_.steps;
    if (stats_.steps > strat_.stepBudget)
      throw StepBudgetError("solve: step budget of " + std::to_string(strat_.stepBudget) +
                                " rule applications exceeded",
                            stats_);
    if (strat_.traceSink)
      strat_.traceSink(r);
  }

  // --- propagation and branching -------------------------------------------

  /// Returns the smallest false clause index, or -1 once no unit or false
  /// clause remains.
  int propagate() {
    for (;;) {
      if (!falseClauses_.empty())
        return *falseClauses_.begin();
      if (unitCandidates_.empty())
        return -1;
      int idx = *unitCandidates_.begin();
      std::optional<Literal> unit;
      for (Literal l : distinct_[static_cast<std::size_t>(idx)])
        if (valueOf(l) == kUndef) {
          unit = l;
          break;
        }
      emit(rules::propagateStep(clauses_[static_cast<std::size_t>(idx)], *unit));
      ++stats_.propagations;
      assertLiteral(*unit, false, clauses_[static_cast<std::size_t>(idx)]);
    }
  }

  std::optional<Literal> pickBranch() const {
    for (std::size_t i = 0; i < decideVars_.size(); ++i) {
      int v = decideVars_[i];
      if (values_[static_cast<std::size_t>(slotOf_.at(v))] == kUndef)
        return Literal(polarity_[i] ? v : -v);
    }
    return std::nullopt;
  }

  // --- conflict repair -------------------------------------------------------

  /// Handle the conflict; false means the formula was refuted.
  bool repairConflict(int conflictIdx) {
    const Clause& conflict = clauses_[static_cast<std::size_t>(conflictIdx)];
    switch (strat_.system) {
    case SystemChoice::dpll: {
      if (decisionPositions_.empty())
        return false;
      emit(rules::backtrackStep());
      int lastPos = decisionPositions_.back();
      Literal lastLit = trail_[static_cast<std::size_t>(lastPos)].lit;
      while (static_cast<int>(trail_.size()) > lastPos)
        popLiteral();
      assertLiteral(lastLit.opposite(), false, {});
      return true;
    }
    case SystemChoice::backjump:
    case SystemChoice::learn: {
      if (decisionPositions_.empty())
        return false;
      auto [c, l] = runAnalysis(conflict, nullptr);
      int lvl = backjumpTarget(c, l);
      emit(rules::backjumpStep(c, l, lvl));
      shrinkToLevel(lvl);
      assertLiteral(l, false, c);
      if (strat_.system == SystemChoice::learn && !containsSetEqual(formulaView(), c)) {
        emit(rules::learnStep(c));
        ++stats_.learnt;
        addClause(c);
      }
      return true;
    }
    case SystemChoice::cdcl: {
      emit(rules::conflictStep(conflict));
      auto [c, l] = runAnalysis(conflict, &Driver::emitExplain);
      if (c.empty())
        return false;
      int lvl = backjumpTarget(c, l);
      if (!containsSetEqual(formulaView(), c)) {
        emit(rules::learnStep(c));
        ++stats_.learnt;
        addClause(c);
      }
      emit(rules::backjumpStep(c, l, lvl));
      shrinkToLevel(lvl);
      assertLiteral(l, false, c);
      return true;
    }
    case SystemChoice::full: {
      emit(rules::conflictStep(conflict));
      auto [c, l] = runAnalysis(conflict, &Driver::emitExplain);
      if (c.empty())
        return false;
      int lvl = backjumpTarget(c, l);
      emit(rules::backjumpLearnStep(c, l, lvl));
      ++stats_.learnt;
      addClause(c);
      shrinkToLevel(lvl);
      assertLiteral(l, false, c);
      ++conflictsSinceRestart_;
      learntWindow();
      return true;
    }
    }
    return false;
  }

  void emitExplain(Literal l, const Clause& reason) {
    emit(rules::explainStep(l, reason));
  }

  /// 1-UIP resolution over the recorded reasons. Returns the final
  /// conflict-analysis clause and its unit literal (unset for empty).
  std::pair<Clause, Literal> runAnalysis(Clause c, void (Driver::*explainCb)(Literal,
                                                                             const Clause&)) {
    for (;;) {
      if (c.empty())
        return {c, Literal(1)};
      int bestPos = -1;
      for (Literal x : c)
        bestPos = std::max(bestPos, positions_[static_cast<std::size_t>(
                                        slotOf_.at(x.var()))]);
      Literal lastOpp = trail_[static_cast<std::size_t>(bestPos)].lit;
      Literal l = lastOpp.opposite();
      int top = levels_[static_cast<std::size_t>(slotOf_.at(lastOpp.var()))];
      if (top > 0) {
        bool uip = true;
        for (Literal x : c) {
          if (x == l)
            continue;
          if (levels_[static_cast<std::size_t>(slotOf_.at(x.var()))] >= top &&
              x.opposite() != lastOpp) {
            uip = false;
            break;
          }
        }
        if (uip)
          return {c, l};
      }
      const Clause& reason = reasons_[static_cast<std::size_t>(bestPos)];
      if (reason.empty())
        throw PreconditionError("conflict analysis: internal-invariant error, no recorded "
                                "reason for " + toString(lastOpp));
      if (explainCb)
        (this->*explainCb)(l, reason);
      c = resolvent(c, reason, l);
    }
  }

  int backjumpTarget(const Clause& c, Literal l) const {
    int best = 0;
    for (Literal x : removeAll(c, l))
      best = std::max(best, levels_[static_cast<std::size_t>(slotOf_.at(x.var()))]);
    return best;
  }

  Formula formulaView() const { return clauses_; }

  // --- learn/forget/restart window -------------------------------------------

  void learntWindow() {
    if (strat_.forget.kind == ForgetPolicy::Kind::sizeThreshold && tryForget())
      return;
    if (restartDue()) {
      emit(rules::restartStep());
      ++stats_.restarts;
      shrinkToLevel(0);
      conflictsSinceRestart_ = 0;
      ++restartsSoFar_;
    }
  }

  bool restartDue() const {
    switch (strat_.restart.kind) {
    case RestartPolicy::Kind::none:
      return false;
    case RestartPolicy::Kind::everyConflict:
      return true;
    case RestartPolicy::Kind::luby:
      return conflictsSinceRestart_ >=
             static_cast<long long>(strat_.restart.lubyUnit) * lubySequence(restartsSoFar_ + 1);
    case RestartPolicy::Kind::geometric:
      return static_cast<double>(conflictsSinceRestart_) >=
             strat_.restart.geometricBase *
                 std::pow(strat_.restart.geometricFactor, restartsSoFar_);
    }
    return false;
  }

  bool tryForget() {
    long long learntCount = static_cast<long long>(clauses_.size() - inputCount_);
    if (learntCount <= strat_.forget.maxLearnt)
      return false;
    std::set<std::vector<int>> reasonKeys;
    for (const Clause& r : reasons_)
      if (!r.empty())
        reasonKeys.insert(clauseKey(r));
    std::vector<Clause> fc;
    long long dropCandidates = learntCount - strat_.forget.keepRecent;
    for (long long i = 0; i < dropCandidates; ++i) {
      const Clause& c = clauses_[inputCount_ + static_cast<std::size_t>(i)];
      if (!reasonKeys.count(clauseKey(c)))
        fc.push_back(c);
    }
    if (fc.empty())
      return false;
    emit(rules::forgetStep(fc));
    stats_.forgotten += static_cast<long long>(fc.size());
    removeLearnt(fc);
    return true;
  }

  void removeLearnt(const std::vector<Clause>& fc) {
    std::vector<Clause> keep(clauses_.begin(),
                             clauses_.begin() + static_cast<std::ptrdiff_t>(inputCount_));
    std::vector<Clause> learnt(clauses_.begin() + static_cast<std::ptrdiff_t>(inputCount_),
                               clauses_.end());
    for (const Clause& c : fc) {
      auto it = std::find(learnt.begin(), learnt.end(), c);
      if (it != learnt.end())
        learnt.erase(it);
    }
    keep.insert(keep.end(), learnt.begin(), learnt.end());

    clauses_.clear();
    distinct_.clear();
    numFalse_.clear();
    numTrue_.clear();
    occ_.clear();
    unitCandidates_.clear();
    falseClauses_.clear();
    for (const Clause& c : keep)
      addClause(c);
  }
};

inline Answer runDriver(const Context& ctx, const Strategy& strat) {
  Driver d(ctx, strat);
  return d.run();
}

} // namespace detail

/// Drive the chosen system from the initial state for f0 until an outcome
/// state is reached. Throws StepBudgetError when the step budget runs out
/// and PreconditionError for malformed strategies.
inline Answer solve(const Formula& f0, const rules::SolverConfig& config,
                    const Strategy& strat) {
  if (strat.system != SystemChoice::full &&
      (strat.restart.kind != RestartPolicy::Kind::none ||
       strat.forget.kind != ForgetPolicy::Kind::none))
    throw PreconditionError("solve: restart and forget policies require the full system");
  Context ctx = rules::makeContext(f0, config);
  return detail::runDriver(ctx, strat);
}

/// Context-reusing overload for callers that already built one.
inline Answer solve(const Context& ctx, const Strategy& strat) {
  if (strat.system != SystemChoice::full &&
      (strat.restart.kind != RestartPolicy::Kind::none ||
       strat.forget.kind != ForgetPolicy::Kind::none))
    throw PreconditionError("solve: restart and forget policies require the full system");
  return detail::runDriver(ctx, strat);
}

} // namespace satts::engine
