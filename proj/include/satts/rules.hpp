#pragma once

// The transition systems as data: states, guarded rule application,
// applicable-instance enumeration and outcome classification. Seven system
// flavours share ten rule shapes; each apply function checks the exact
// guard conjuncts of its system and reports the first failed one.

#include <algorithm>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "satts/core.hpp"
#include "satts/oracle.hpp"

namespace satts::rules {

enum class System {
  dpll,        // decide / unitPropagate / backtrack
  backjump,    // decide / unitPropagate / backjump
  learn,       // backjump system plus learn / forget
  cdcl,        // four-tuple state with conflict analysis
  cdclForget,  // five-tuple state, forget allowed, no restart
  cdclRestart, // five-tuple state, restart allowed, no forget
  full         // five-tuple state, both forget and restart
};

enum class Rule {
  decide,
  unitPropagate,
  backtrack,
  backjump,
  learn,
  forget,
  conflict,
  explain,
  backjumpLearn,
  restart
};

inline const char* name(System s) {
  switch (s) {
  case System::dpll: return "dpll";
  case System::backjump: return "backjump";
  case System::learn: return "learn";
  case System::cdcl: return "cdcl";
  case System::cdclForget: return "cdcl_forget";
  case System::cdclRestart: return "cdcl_restart";
  case System::full: return "full";
  }
  return "?";
}

inline const char* name(Rule r) {
  switch (r) {
  case Rule::decide: return "decide";
  case Rule::unitPropagate: return "unitPropagate";
  case Rule::backtrack: return "backtrack";
  case Rule::backjump: return "backjump";
  case Rule::learn: return "learn";
  case Rule::forget: return "forget";
  case Rule::conflict: return "conflict";
  case Rule::explain: return "explain";
  case Rule::backjumpLearn: return "backjumpLearn";
  case Rule::restart: return "restart";
  }
  return "?";
}

inline std::optional<System> systemFromName(const std::string& s) {
  for (System sys : {System::dpll, System::backjump, System::learn, System::cdcl,
                     System::cdclForget, System::cdclRestart, System::full})
    if (s == name(sys))
      return sys;
  return std::nullopt;
}

inline std::optional<Rule> ruleFromName(const std::string& s) {
  for (Rule r : {Rule::decide, Rule::unitPropagate, Rule::backtrack, Rule::backjump,
                 Rule::learn, Rule::forget, Rule::conflict, Rule::explain,
                 Rule::backjumpLearn, Rule::restart})
    if (s == name(r))
      return r;
  return std::nullopt;
}

/// True for the systems whose state is the five-tuple with a learnt-clause
/// list and the just-learnt flag.
inline bool fiveTupleSystem(System s) {
  return s == System::cdclForget || s == System::cdclRestart || s == System::full;
}

/// One named rule application with its parameters. The unit of traces.
struct RuleInstance {
  Rule rule = Rule::decide;
  std::optional<Clause> clause;
  std::optional<Literal> literal;
  std::optional<int> level;
  std::optional<std::vector<Clause>> forgotten;

  friend bool operator==(const RuleInstance& a, const RuleInstance& b) {
    return a.rule == b.rule && a.clause == b.clause && a.literal == b.literal &&
           a.level == b.level && a.forgotten == b.forgotten;
  }
  friend bool operator!=(const RuleInstance& a, const RuleInstance& b) { return !(a == b); }
};

inline RuleInstance decideStep(Literal l) {
  RuleInstance r;
  r.rule = Rule::decide;
  r.literal = l;
  return r;
}

inline RuleInstance propagateStep(Clause c, Literal l) {
  RuleInstance r;
  r.rule = Rule::unitPropagate;
  r.clause = std::move(c);
  r.literal = l;
  return r;
}

inline RuleInstance backtrackStep() {
  RuleInstance r;
  r.rule = Rule::backtrack;
  return r;
}

inline RuleInstance backjumpStep(Clause c, Literal l, int lvl) {
  RuleInstance r;
  r.rule = Rule::backjump;
  r.clause = std::move(c);
  r.literal = l;
  r.level = lvl;
  return r;
}

inline RuleInstance learnStep(Clause c) {
  RuleInstance r;
  r.rule = Rule::learn;
  r.clause = std::move(c);
  return r;
}

inline RuleInstance forgetStep(Clause c) {
  RuleInstance r;
  r.rule = Rule::forget;
  r.clause = std::move(c);
  return r;
}

inline RuleInstance forgetStep(std::vector<Clause> fc) {
  RuleInstance r;
  r.rule = Rule::forget;
  r.forgotten = std::move(fc);
  return r;
}

inline RuleInstance conflictStep(Clause c) {
  RuleInstance r;
  r.rule = Rule::conflict;
  r.clause = std::move(c);
  return r;
}

inline RuleInstance explainStep(Literal l, Clause reason) {
  RuleInstance r;
  r.rule = Rule::explain;
  r.literal = l;
  r.clause = std::move(reason);
  return r;
}

inline RuleInstance backjumpLearnStep(Clause c, Literal l, int lvl) {
  RuleInstance r;
  r.rule = Rule::backjumpLearn;
  r.clause = std::move(c);
  r.literal = l;
  r.level = lvl;
  return r;
}

inline RuleInstance restartStep() {
  RuleInstance r;
  r.rule = Rule::restart;
  return r;
}

struct SolverConfig {
  std::set<int> decisionVars;
  int oracleVarBudget = oracle::kDefaultVarBudget;
  // Permit oracle certification of entailment guards for clauses that are
  // not formula members. When off, such steps are reported uncertified.
  bool certifyWithOracle = true;
};

/// Immutable per-run environment: input formula, configuration and the
/// variable universe Vars = vars(F0) + decision variables.
struct Context {
  Formula f0;
  SolverConfig config;
  std::set<int> vars;
};

inline Context makeContext(Formula f0, SolverConfig config) {
  Context ctx;
  ctx.vars = varsOf(f0);
  for (int v : config.decisionVars)
    ctx.vars.insert(v);
  ctx.f0 = std::move(f0);
  ctx.config = std::move(config);
  return ctx;
}

// --- states ---------------------------------------------------------------

/// (M, F) state of the search-only systems.
struct SearchState {
  Trail trail;
  Formula formula;

  friend bool operator==(const SearchState& a, const SearchState& b) {
    return a.trail == b.trail && a.formula == b.formula;
  }
  friend bool operator!=(const SearchState& a, const SearchState& b) { return !(a == b); }
};

/// (M, F, C, cflct) state of the conflict-analysis system.
struct CdclState {
  Trail trail;
  Formula formula;
  Clause conflictClause;
  bool inConflict = false;

  friend bool operator==(const CdclState& a, const CdclState& b) {
    return a.trail == b.trail && a.formula == b.formula &&
           a.conflictClause == b.conflictClause && a.inConflict == b.inConflict;
  }
  friend bool operator!=(const CdclState& a, const CdclState& b) { return !(a == b); }
};

/// (M, Fl, C, cflct, lnt) state of the five-tuple systems. The input
/// formula is a run parameter, not part of the state; the working formula
/// is F0 followed by the learnt clauses.
struct FullState {
  Trail trail;
  Formula learnt;
  Clause conflictClause;
  bool inConflict = false;
  bool justLearnt = false;

  friend bool operator==(const FullState& a, const FullState& b) {
    return a.trail == b.trail && a.learnt == b.learnt &&
           a.conflictClause == b.conflictClause && a.inConflict == b.inConflict &&
           a.justLearnt == b.justLearnt;
  }
  friend bool operator!=(const FullState& a, const FullState& b) { return !(a == b); }
};

inline SearchState initialSearchState(Formula f0) { return SearchState{{}, std::move(f0)}; }
inline CdclState initialCdclState(Formula f0) { return CdclState{{}, std::move(f0), {}, false}; }
inline FullState initialFullState() { return FullState{{}, {}, {}, false, false}; }

inline Formula combinedFormula(const Context& ctx, const FullState& s) {
  Formula f = ctx.f0;
  f.insert(f.end(), s.learnt.begin(), s.learnt.end());
  return f;
}

// --- step results ----------------------------------------------------------

enum class StepStatus {
  applied,
  rejected,    // a guard conjunct is false
  uncertified  // an entailment guard could not be decided under the budget
};

template <class S>
struct StepResult {
  StepStatus status = StepStatus::rejected;
  std::optional<S> state;
  std::string detail;

  bool ok() const { return status == StepStatus::applied; }
};

template <class S>
StepResult<S> appliedStep(S s) {
  return StepResult<S>{StepStatus::applied, std::move(s), ""};
}

template <class S>
StepResult<S> rejectedStep(std::string why) {
  return StepResult<S>{StepStatus::rejected, std::nullopt, std::move(why)};
}

template <class S>
StepResult<S> uncertifiedStep(std::string why) {
  return StepResult<S>{StepStatus::uncertified, std::nullopt, std::move(why)};
}

// --- entailment certification ----------------------------------------------

enum class Certified { holds, refuted, undecidable };

/// Decide F |= c. Member clauses (up to literal-set equality) are entailed
/// by construction; anything else goes to the oracle when permitted.
inline std::pair<Certified, std::string> certifyEntailed(const Formula& f, const Clause& c,
                                                         const Context& ctx) {
  if (containsSetEqual(f, c))
    return {Certified::holds, ""};
  if (!ctx.config.certifyWithOracle)
    return {Certified::undecidable,
            "uncertifiable entailment: " + toString(c) +
                " is not a formula member and oracle certification is disabled"};
  try {
    if (oracle::entails(f, c, ctx.config.oracleVarBudget))
      return {Certified::holds, ""};
    return {Certified::refuted, "entailment guard: formula does not entail " + toString(c)};
  } catch (const BudgetError& e) {
    return {Certified::undecidable, std::string("uncertifiable entailment: ") + e.what()};
  }
}

// --- backjump levels and UIP -----------------------------------------------

/// level is a backjump level for clause c (false in M) with unit literal l:
/// strictly below the level of the last falsified literal of c and at or
/// above the levels of the remaining ones.
inline bool isBackjumpLevel(int lvl, Literal l, const Clause& c, const Trail& m) {
  if (c.empty() || !clauseFalse(c, m))
    return false;
  Clause opposites = oppositesOf(c);
  if (lastAssertedLiteral(opposites, m) != l.opposite())
    return false;
  if (lvl < 0 || lvl >= level(l.opposite(), m))
    return false;
  for (Literal x : removeAll(c, l))
    if (level(x.opposite(), m) > lvl)
      return false;
  return true;
}

inline bool isMinimalBackjumpLevel(int lvl, Literal l, const Clause& c, const Trail& m) {
  if (!isBackjumpLevel(lvl, l, c, m))
    return false;
  for (int smaller = 0; smaller < lvl; ++smaller)
    if (isBackjumpLevel(smaller, l, c, m))
      return false;
  return true;
}

/// c (false in M) has a unique implication point at l: the last falsified
/// literal of c sits strictly above the levels of all the others.
inline bool isUIP(Literal l, const Clause& c, const Trail& m) {
  if (c.empty() || !clauseFalse(c, m))
    return false;
  Clause opposites = oppositesOf(c);
  if (lastAssertedLiteral(opposites, m) != l.opposite())
    return false;
  int top = level(l.opposite(), m);
  for (Literal x : removeAll(c, l))
    if (level(x.opposite(), m) >= top)
      return false;
  return true;
}

// --- shared guard pieces -----------------------------------------------------

namespace detail {

inline std::string checkDecideGuard(const Trail& m, Literal l, const Context& ctx) {
  if (!ctx.config.decisionVars.count(l.var()))
    return "decide: variable " + std::to_string(l.var()) + " is not a decision variable";
  if (literalTrue(l, m) || literalFalse(l, m))
    return "decide: literal " + toString(l) + " is already defined in the trail";
  return "";
}

inline Trail extended(const Trail& m, TrailEntry e) {
  Trail out = m;
  out.push_back(e);
  return out;
}

/// Does any clause of f have a unit literal in m?
inline bool unitClauseExists(const Formula& f, const Trail& m) {
  for (const Clause& c : f) {
    Clause distinct = removeDuplicateLiterals(c);
    int undef = 0;
    std::optional<Literal> cand;
    bool sat = false;
    for (Literal l : distinct) {
      if (literalTrue(l, m)) {
        sat = true;
        break;
      }
      if (!literalFalse(l, m)) {
        ++undef;
        cand = l;
        if (undef > 1)
          break;
      }
    }
    if (!sat && undef == 1 && isUnit(c, *cand, m))
      return true;
  }
  return false;
}

/// Remove each clause of fc (one occurrence per occurrence) from f.
/// Returns nullopt when some clause of fc is not available.
inline std::optional<Formula> removeOccurrences(const Formula& f, const std::vector<Clause>& fc) {
  Formula out = f;
  for (const Clause& c : fc) {
    auto it = std::find(out.begin(), out.end(), c);
    if (it == out.end())
      return std::nullopt;
    out.erase(it);
  }
  return out;
}

} // namespace detail

// --- the DPLL search system -------------------------------------------------

inline StepResult<SearchState> applyDpll(const SearchState& s, const RuleInstance& r,
                                         const Context& ctx) {
  switch (r.rule) {
  case Rule::decide: {
    if (!r.literal)
      return rejectedStep<SearchState>("decide: missing literal parameter");
    if (std::string why = detail::checkDecideGuard(s.trail, *r.literal, ctx); !why.empty())
      return rejectedStep<SearchState>(why);
    return appliedStep(SearchState{detail::extended(s.trail, decision(*r.literal)), s.formula});
  }
  case Rule::unitPropagate: {
    if (!r.clause || !r.literal)
      return rejectedStep<SearchState>("unitPropagate: missing clause or literal parameter");
    if (!containsExact(s.formula, *r.clause))
      return rejectedStep<SearchState>("unitPropagate: clause " + toString(*r.clause) +
                                       " is not a member of the formula");
    if (!isUnit(*r.clause, *r.literal, s.trail))
      return rejectedStep<SearchState>("unitPropagate: isUnit guard fails for " +
                                       toString(*r.clause) + " with " + toString(*r.literal));
    return appliedStep(SearchState{detail::extended(s.trail, implied(*r.literal)), s.formula});
  }
  case Rule::backtrack: {
    if (!formulaFalse(s.formula, s.trail))
      return rejectedStep<SearchState>("backtrack: formula is not false in the trail");
    if (decisions(s.trail).empty())
      return rejectedStep<SearchState>("backtrack: trail has no decision to undo");
    Literal last = lastDecision(s.trail);
    Trail next = prefixBeforeLastDecision(s.trail);
    next.push_back(implied(last.opposite()));
    return appliedStep(SearchState{std::move(next), s.formula});
  }
  default:
    return rejectedStep<SearchState>(std::string(name(r.rule)) +
                                     ": rule is not part of the dpll system");
  }
}

// --- the backjumping system ---------------------------------------------------

namespace detail {

inline StepResult<SearchState> applyRelaxedPropagate(const SearchState& s, const RuleInstance& r,
                                                     const Context& ctx) {
  if (!r.clause || !r.literal)
    return rejectedStep<SearchState>("unitPropagate: missing clause or literal parameter");
  auto [cert, why] = certifyEntailed(s.formula, *r.clause, ctx);
  if (cert == Certified::refuted)
    return rejectedStep<SearchState>("unitPropagate: " + why);
  if (cert == Certified::undecidable)
    return uncertifiedStep<SearchState>("unitPropagate: " + why);
  if (!ctx.vars.count(r.literal->var()))
    return rejectedStep<SearchState>("unitPropagate: variable " +
                                     std::to_string(r.literal->var()) + " is outside Vars");
  if (!isUnit(*r.clause, *r.literal, s.trail))
    return rejectedStep<SearchState>("unitPropagate: isUnit guard fails for " +
                                     toString(*r.clause) + " with " + toString(*r.literal));
  return appliedStep(SearchState{detail::extended(s.trail, implied(*r.literal)), s.formula});
}

inline StepResult<SearchState> applyBackjumpRule(const SearchState& s, const RuleInstance& r,
                                                 const Context& ctx) {
  if (!r.clause || !r.literal || !r.level)
    return rejectedStep<SearchState>("backjump: missing clause, literal or level parameter");
  auto [cert, why] = certifyEntailed(s.formula, *r.clause, ctx);
  if (cert == Certified::refuted)
    return rejectedStep<SearchState>("backjump: " + why);
  if (cert == Certified::undecidable)
    return uncertifiedStep<SearchState>("backjump: " + why);
  if (!ctx.vars.count(r.literal->var()))
    return rejectedStep<SearchState>("backjump: variable " + std::to_string(r.literal->var()) +
                                     " is outside Vars");
  if (*r.level < 0 || *r.level >= currentLevel(s.trail))
    return rejectedStep<SearchState>("backjump: level " + std::to_string(*r.level) +
                                     " is not below the current level " +
                                     std::to_string(currentLevel(s.trail)));
  Trail prefix = prefixToLevel(s.trail, *r.level);
  if (!isUnit(*r.clause, *r.literal, prefix))
    return rejectedStep<SearchState>("backjump: isUnit guard fails for " + toString(*r.clause) +
                                     " in the level-" + std::to_string(*r.level) + " prefix");
  prefix.push_back(implied(*r.literal));
  return appliedStep(SearchState{std::move(prefix), s.formula});
}

} // namespace detail

inline StepResult<SearchState> applyBackjump(const SearchState& s, const RuleInstance& r,
                                             const Context& ctx) {
  switch (r.rule) {
  case Rule::decide:
    return applyDpll(s, r, ctx);
  case Rule::unitPropagate:
    return detail::applyRelaxedPropagate(s, r, ctx);
  case Rule::backjump:
    return detail::applyBackjumpRule(s, r, ctx);
  default:
    return rejectedStep<SearchState>(std::string(name(r.rule)) +
                                     ": rule is not part of the backjump system");
  }
}

// --- the learning system -------------------------------------------------------

inline StepResult<SearchState> applyLearning(const SearchState& s, const RuleInstance& r,
                                             const Context& ctx) {
  switch (r.rule) {
  case Rule::decide:
  case Rule::unitPropagate:
  case Rule::backjump:
    return applyBackjump(s, r, ctx);
  case Rule::learn: {
    if (!r.clause)
      return rejectedStep<SearchState>("learn: missing clause parameter");
    auto [cert, why] = certifyEntailed(s.formula, *r.clause, ctx);
    if (cert == Certified::refuted)
      return rejectedStep<SearchState>("learn: " + why);
    if (cert == Certified::undecidable)
      return uncertifiedStep<SearchState>("learn: " + why);
    for (Literal l : *r.clause)
      if (!ctx.vars.count(l.var()))
        return rejectedStep<SearchState>("learn: variable " + std::to_string(l.var()) +
                                         " is outside Vars");
    Formula next = s.formula;
    next.push_back(*r.clause);
    return appliedStep(SearchState{s.trail, std::move(next)});
  }
  case Rule::forget: {
    if (!r.clause)
      return rejectedStep<SearchState>("forget: missing clause parameter");
    auto it = std::find(s.formula.begin(), s.formula.end(), *r.clause);
    if (it == s.formula.end())
      return rejectedStep<SearchState>("forget: clause " + toString(*r.clause) +
                                       " is not a member of the formula");
    Formula next = s.formula;
    next.erase(next.begin() + (it - s.formula.begin()));
    auto [cert, why] = certifyEntailed(next, *r.clause, ctx);
    if (cert == Certified::refuted)
      return rejectedStep<SearchState>("forget: remaining formula does not entail the clause");
    if (cert == Certified::undecidable)
      return uncertifiedStep<SearchState>("forget: " + why);
    return appliedStep(SearchState{s.trail, std::move(next)});
  }
  default:
    return rejectedStep<SearchState>(std::string(name(r.rule)) +
                                     ": rule is not part of the learn system");
  }
}

// --- the conflict-analysis system -----------------------------------------------

inline StepResult<CdclState> applyCdcl(const CdclState& s, const RuleInstance& r,
                                       const Context& ctx) {
  switch (r.rule) {
  case Rule::decide: {
    if (!r.literal)
      return rejectedStep<CdclState>("decide: missing literal parameter");
    if (std::string why = detail::checkDecideGuard(s.trail, *r.literal, ctx); !why.empty())
      return rejectedStep<CdclState>(why);
    CdclState next = s;
    next.trail.push_back(decision(*r.literal));
    return appliedStep(std::move(next));
  }
  case Rule::unitPropagate: {
    if (!r.clause || !r.literal)
      return rejectedStep<CdclState>("unitPropagate: missing clause or literal parameter");
    auto [cert, why] = certifyEntailed(s.formula, *r.clause, ctx);
    if (cert == Certified::refuted)
      return rejectedStep<CdclState>("unitPropagate: " + why);
    if (cert == Certified::undecidable)
      return uncertifiedStep<CdclState>("unitPropagate: " + why);
    if (!ctx.vars.count(r.literal->var()))
      return rejectedStep<CdclState>("unitPropagate: variable " +
                                     std::to_string(r.literal->var()) + " is outside Vars");
    if (!isUnit(*r.clause, *r.literal, s.trail))
      return rejectedStep<CdclState>("unitPropagate: isUnit guard fails for " +
                                     toString(*r.clause) + " with " + toString(*r.literal));
    CdclState next = s;
    next.trail.push_back(implied(*r.literal));
    return appliedStep(std::move(next));
  }
  case Rule::conflict: {
    if (!r.clause)
      return rejectedStep<CdclState>("conflict: missing clause parameter");
    if (s.inConflict)
      return rejectedStep<CdclState>("conflict: conflict flag is already set");
    auto [cert, why] = certifyEntailed(s.formula, *r.clause, ctx);
    if (cert == Certified::refuted)
      return rejectedStep<CdclState>("conflict: " + why);
    if (cert == Certified::undecidable)
      return uncertifiedStep<CdclState>("conflict: " + why);
    if (!clauseFalse(*r.clause, s.trail))
      return rejectedStep<CdclState>("conflict: clause " + toString(*r.clause) +
                                     " is not false in the trail");
    CdclState next = s;
    next.conflictClause = *r.clause;
    next.inConflict = true;
    return appliedStep(std::move(next));
  }
  case Rule::explain: {
    if (!r.clause || !r.literal)
      return rejectedStep<CdclState>("explain: missing clause or literal parameter");
    if (!s.inConflict)
      return rejectedStep<CdclState>("explain: conflict flag is not set");
    Literal l = *r.literal;
    if (std::find(s.conflictClause.begin(), s.conflictClause.end(), l) ==
        s.conflictClause.end())
      return rejectedStep<CdclState>("explain: literal " + toString(l) +
                                     " does not occur in the conflict-analysis clause");
    if (!isReason(*r.clause, l.opposite(), s.trail))
      return rejectedStep<CdclState>("explain: isReason guard fails for " + toString(*r.clause) +
                                     " with " + toString(l.opposite()));
    auto [cert, why] = certifyEntailed(s.formula, *r.clause, ctx);
    if (cert == Certified::refuted)
      return rejectedStep<CdclState>("explain: " + why);
    if (cert == Certified::undecidable)
      return uncertifiedStep<CdclState>("explain: " + why);
    CdclState next = s;
    next.conflictClause = resolvent(s.conflictClause, *r.clause, l);
    return appliedStep(std::move(next));
  }
  case Rule::learn: {
    if (!s.inConflict)
      return rejectedStep<CdclState>("learn: conflict flag is not set");
    if (r.clause && !clauseSetEqual(*r.clause, s.conflictClause))
      return rejectedStep<CdclState>("learn: clause parameter " + toString(*r.clause) +
                                     " differs from the conflict-analysis clause " +
                                     toString(s.conflictClause));
    if (containsSetEqual(s.formula, s.conflictClause))
      return rejectedStep<CdclState>("learn: conflict-analysis clause is already in the formula");
    CdclState next = s;
    next.formula.push_back(s.conflictClause);
    return appliedStep(std::move(next));
  }
  case Rule::backjump: {
    if (!r.literal || !r.level)
      return rejectedStep<CdclState>("backjump: missing literal or level parameter");
    if (!s.inConflict)
      return rejectedStep<CdclState>("backjump: conflict flag is not set");
    if (r.clause && !clauseSetEqual(*r.clause, s.conflictClause))
      return rejectedStep<CdclState>("backjump: clause parameter " + toString(*r.clause) +
                                     " differs from the conflict-analysis clause " +
                                     toString(s.conflictClause));
    if (!isBackjumpLevel(*r.level, *r.literal, s.conflictClause, s.trail))
      return rejectedStep<CdclState>("backjump: isBackjumpLevel guard fails for level " +
                                     std::to_string(*r.level) + " and " + toString(*r.literal));
    CdclState next = s;
    next.trail = prefixToLevel(s.trail, *r.level);
    next.trail.push_back(implied(*r.literal));
    next.conflictClause.clear();
    next.inConflict = false;
    return appliedStep(std::move(next));
  }
  default:
    return rejectedStep<CdclState>(std::string(name(r.rule)) +
                                   ": rule is not part of the cdcl system");
  }
}

// --- the five-tuple systems --------------------------------------------------

inline StepResult<FullState> applyFive(const FullState& s, const RuleInstance& r,
                                       const Context& ctx, System sys) {
  if (!fiveTupleSystem(sys))
    throw PreconditionError("applyFive: not a five-tuple system");
  if (r.rule == Rule::restart && sys == System::cdclForget)
    return rejectedStep<FullState>("restart: rule is not part of the no-restart system");
  if (r.rule == Rule::forget && sys == System::cdclRestart)
    return rejectedStep<FullState>("forget: rule is not part of the no-forget system");

  Formula f = combinedFormula(ctx, s);
  switch (r.rule) {
  case Rule::decide: {
    if (!r.literal)
      return rejectedStep<FullState>("decide: missing literal parameter");
    if (std::string why = detail::checkDecideGuard(s.trail, *r.literal, ctx); !why.empty())
      return rejectedStep<FullState>(why);
    if (detail::unitClauseExists(f, s.trail))
      return rejectedStep<FullState>(
          "decide: a unit clause exists, unit propagation must be performed first");
    FullState next = s;
    next.trail.push_back(decision(*r.literal));
    return appliedStep(std::move(next));
  }
  case Rule::unitPropagate: {
    if (!r.clause || !r.literal)
      return rejectedStep<FullState>("unitPropagate: missing clause or literal parameter");
    if (!containsExact(f, *r.clause))
      return rejectedStep<FullState>("unitPropagate: clause " + toString(*r.clause) +
                                     " is not a member of the formula");
    if (!isUnit(*r.clause, *r.literal, s.trail))
      return rejectedStep<FullState>("unitPropagate: isUnit guard fails for " +
                                     toString(*r.clause) + " with " + toString(*r.literal));
    FullState next = s;
    next.trail.push_back(implied(*r.literal));
    return appliedStep(std::move(next));
  }
  case Rule::conflict: {
    if (!r.clause)
      return rejectedStep<FullState>("conflict: missing clause parameter");
    if (s.inConflict)
      return rejectedStep<FullState>("conflict: conflict flag is already set");
    if (!containsExact(f, *r.clause))
      return rejectedStep<FullState>("conflict: clause " + toString(*r.clause) +
                                     " is not a member of the formula");
    if (!clauseFalse(*r.clause, s.trail))
      return rejectedStep<FullState>("conflict: clause " + toString(*r.clause) +
                                     " is not false in the trail");
    FullState next = s;
    next.conflictClause = *r.clause;
    next.inConflict = true;
    return appliedStep(std::move(next));
  }
  case Rule::explain: {
    if (!r.clause || !r.literal)
      return rejectedStep<FullState>("explain: missing clause or literal parameter");
    if (!s.inConflict)
      return rejectedStep<FullState>("explain: conflict flag is not set");
    Literal l = *r.literal;
    if (std::find(s.conflictClause.begin(), s.conflictClause.end(), l) ==
        s.conflictClause.end())
      return rejectedStep<FullState>("explain: literal " + toString(l) +
                                     " does not occur in the conflict-analysis clause");
    if (!isReason(*r.clause, l.opposite(), s.trail))
      return rejectedStep<FullState>("explain: isReason guard fails for " + toString(*r.clause) +
                                     " with " + toString(l.opposite()));
    if (!containsExact(f, *r.clause))
      return rejectedStep<FullState>("explain: clause " + toString(*r.clause) +
                                     " is not a member of the formula");
    FullState next = s;
    next.conflictClause = resolvent(s.conflictClause, *r.clause, l);
    return appliedStep(std::move(next));
  }
  case Rule::backjumpLearn: {
    if (!r.literal || !r.level)
      return rejectedStep<FullState>("backjumpLearn: missing literal or level parameter");
    if (!s.inConflict)
      return rejectedStep<FullState>("backjumpLearn: conflict flag is not set");
    if (r.clause && !clauseSetEqual(*r.clause, s.conflictClause))
      return rejectedStep<FullState>("backjumpLearn: clause parameter " + toString(*r.clause) +
                                     " differs from the conflict-analysis clause " +
                                     toString(s.conflictClause));
    if (!isMinimalBackjumpLevel(*r.level, *r.literal, s.conflictClause, s.trail))
      return rejectedStep<FullState>(
          "backjumpLearn: isMinimalBackjumpLevel guard fails for level " +
          std::to_string(*r.level) + " and " + toString(*r.literal));
    FullState next = s;
    next.trail = prefixToLevel(s.trail, *r.level);
    next.trail.push_back(implied(*r.literal));
    next.learnt.push_back(s.conflictClause);
    next.conflictClause.clear();
    next.inConflict = false;
    next.justLearnt = true;
    return appliedStep(std::move(next));
  }
  case Rule::forget: {
    if (!r.forgotten)
      return rejectedStep<FullState>("forget: missing forgotten-clauses parameter");
    if (s.inConflict)
      return rejectedStep<FullState>("forget: conflict flag is set");
    if (!s.justLearnt)
      return rejectedStep<FullState>("forget: just-learnt flag is not set");
    auto remaining = detail::removeOccurrences(s.learnt, *r.forgotten);
    if (!remaining)
      return rejectedStep<FullState>("forget: forgotten clauses are not a sub-multiset of the "
                                     "learnt clauses");
    FullState next = s;
    next.learnt = std::move(*remaining);
    next.justLearnt = false;
    return appliedStep(std::move(next));
  }
  case Rule::restart: {
    if (s.inConflict)
      return rejectedStep<FullState>("restart: conflict flag is set");
    if (!s.justLearnt)
      return rejectedStep<FullState>("restart: just-learnt flag is not set");
    FullState next = s;
    next.trail = prefixToLevel(s.trail, 0);
    next.justLearnt = false;
    return appliedStep(std::move(next));
  }
  default:
    return rejectedStep<FullState>(std::string(name(r.rule)) + ": rule is not part of the " +
                                   name(sys) + " system");
  }
}

// --- outcome classification -----------------------------------------------------

enum class Outcome { accepting, rejecting, intermediate };

inline const char* name(Outcome o) {
  switch (o) {
  case Outcome::accepting: return "accepting";
  case Outcome::rejecting: return "rejecting";
  case Outcome::intermediate: return "intermediate";
  }
  return "?";
}

namespace detail {

inline bool allDecisionVarsDefined(const Trail& m, const Context& ctx) {
  for (int v : ctx.config.decisionVars)
    if (literalUndefined(Literal(v), m))
      return false;
  return true;
}

} // namespace detail

inline Outcome classify(System sys, const SearchState& s, const Context& ctx) {
  if (sys != System::dpll && sys != System::backjump && sys != System::learn)
    throw PreconditionError("classify: system does not use the (M, F) state");
  bool falsified = formulaFalse(s.formula, s.trail);
  if (!falsified && detail::allDecisionVarsDefined(s.trail, ctx))
    return Outcome::accepting;
  if (falsified && decisions(s.trail).empty())
    return Outcome::rejecting;
  return Outcome::intermediate;
}

inline Outcome classify(System sys, const CdclState& s, const Context& ctx) {
  if (sys != System::cdcl)
    throw PreconditionError("classify: system does not use the four-tuple state");
  if (s.inConflict && s.conflictClause.empty())
    return Outcome::rejecting;
  if (!s.inConflict && !formulaFalse(s.formula, s.trail) &&
      detail::allDecisionVarsDefined(s.trail, ctx))
    return Outcome::accepting;
  return Outcome::intermediate;
}

inline Outcome classify(System sys, const FullState& s, const Context& ctx) {
  if (!fiveTupleSystem(sys))
    throw PreconditionError("classify: system does not use the five-tuple state");
  if (s.inConflict && s.conflictClause.empty())
    return Outcome::rejecting;
  if (!s.inConflict && !formulaFalse(combinedFormula(ctx, s), s.trail) &&
      detail::allDecisionVarsDefined(s.trail, ctx))
    return Outcome::accepting;
  return Outcome::intermediate;
}

// --- applicable-instance enumeration ---------------------------------------------

namespace detail {

inline void enumerateDecides(const Trail& m, const Context& ctx, std::vector<RuleInstance>& out) {
  for (int v : ctx.config.decisionVars) {
    for (Literal l : {Literal(v), Literal(-v)})
      if (literalUndefined(l, m))
        out.push_back(decideStep(l));
  }
}

inline void enumerateMemberPropagations(const Formula& f, const Trail& m,
                                        std::vector<RuleInstance>& out) {
  for (const Clause& c : f) {
    for (Literal l : removeDuplicateLiterals(c)) {
      if (isUnit(c, l, m)) {
        out.push_back(propagateStep(c, l));
        break; // the unit literal of a clause is unique
      }
    }
  }
}

// Clause pool for entailment-guarded rules: members first, then the
// caller-supplied certified clauses.
inline std::vector<Clause> entailedPool(const Formula& f, const std::vector<Clause>& extras) {
  std::vector<Clause> pool = f;
  pool.insert(pool.end(), extras.begin(), extras.end());
  return pool;
}

} // namespace detail

/// Every rule instance whose guard holds, deterministically ordered. Clause
/// existentials range over the formula members plus, for entailment-guarded
/// systems, the caller-supplied certified clauses. Forget instances in the
/// five-tuple systems are enumerated one learnt clause at a time.
inline std::vector<RuleInstance> enumerateApplicable(System sys, const SearchState& s,
                                                     const Context& ctx,
                                                     const std::vector<Clause>& certified = {}) {
  std::vector<RuleInstance> out;
  int curLevel = currentLevel(s.trail);
  switch (sys) {
  case System::dpll: {
    if (formulaFalse(s.formula, s.trail) && !decisions(s.trail).empty())
      out.push_back(backtrackStep());
    detail::enumerateMemberPropagations(s.formula, s.trail, out);
    detail::enumerateDecides(s.trail, ctx, out);
    return out;
  }
  case System::backjump:
  case System::learn: {
    std::vector<Clause> pool = detail::entailedPool(s.formula, certified);
    for (const Clause& c : pool) {
      for (Literal l : removeDuplicateLiterals(c)) {
        for (int lvl = 0; lvl < curLevel; ++lvl) {
          RuleInstance r = backjumpStep(c, l, lvl);
          if (applyBackjump(s, r, ctx).ok())
            out.push_back(std::move(r));
        }
      }
    }
    if (sys == System::learn) {
      for (const Clause& c : pool) {
        RuleInstance r = learnStep(c);
        if (applyLearning(s, r, ctx).ok())
          out.push_back(std::move(r));
      }
      for (const Clause& c : s.formula) {
        RuleInstance r = forgetStep(c);
        if (applyLearning(s, r, ctx).ok())
          out.push_back(std::move(r));
      }
    }
    for (const Clause& c : pool) {
      for (Literal l : removeDuplicateLiterals(c)) {
        if (isUnit(c, l, s.trail) && ctx.vars.count(l.var())) {
          RuleInstance r = propagateStep(c, l);
          if (applyBackjump(s, r, ctx).ok()) {
            out.push_back(std::move(r));
            break;
          }
        }
      }
    }
    detail::enumerateDecides(s.trail, ctx, out);
    return out;
  }
  default:
    throw PreconditionError("enumerateApplicable: system does not use the (M, F) state");
  }
}

inline std::vector<RuleInstance> enumerateApplicable(System sys, const CdclState& s,
                                                     const Context& ctx,
                                                     const std::vector<Clause>& certified = {}) {
  if (sys != System::cdcl)
    throw PreconditionError("enumerateApplicable: system does not use the four-tuple state");
  std::vector<RuleInstance> out;
  std::vector<Clause> pool = detail::entailedPool(s.formula, certified);
  if (!s.inConflict) {
    for (const Clause& c : pool)
      if (clauseFalse(c, s.trail))
        out.push_back(conflictStep(c));
  } else {
    for (Literal l : removeDuplicateLiterals(s.conflictClause))
      for (const Clause& c : pool)
        if (isReason(c, l.opposite(), s.trail))
          out.push_back(explainStep(l, c));
    {
      RuleInstance r = learnStep(s.conflictClause);
      if (applyCdcl(s, r, ctx).ok())
        out.push_back(std::move(r));
    }
    for (Literal l : removeDuplicateLiterals(s.conflictClause))
      for (int lvl = 0; lvl < currentLevel(s.trail); ++lvl)
        if (isBackjumpLevel(lvl, l, s.conflictClause, s.trail))
          out.push_back(backjumpStep(s.conflictClause, l, lvl));
  }
  for (const Clause& c : pool) {
    for (Literal l : removeDuplicateLiterals(c)) {
      if (isUnit(c, l, s.trail) && ctx.vars.count(l.var())) {
        out.push_back(propagateStep(c, l));
        break;
      }
    }
  }
  detail::enumerateDecides(s.trail, ctx, out);
  return out;
}

inline std::vector<RuleInstance> enumerateApplicable(System sys, const FullState& s,
                                                     const Context& ctx) {
  if (!fiveTupleSystem(sys))
    throw PreconditionError("enumerateApplicable: system does not use the five-tuple state");
  std::vector<RuleInstance> out;
  Formula f = combinedFormula(ctx, s);
  if (!s.inConflict) {
    for (const Clause& c : f)
      if (clauseFalse(c, s.trail))
        out.push_back(conflictStep(c));
  } else {
    for (Literal l : removeDuplicateLiterals(s.conflictClause))
      for (const Clause& c : f)
        if (isReason(c, l.opposite(), s.trail))
          out.push_back(explainStep(l, c));
    for (Literal l : removeDuplicateLiterals(s.conflictClause))
      for (int lvl = 0; lvl < currentLevel(s.trail); ++lvl)
        if (isMinimalBackjumpLevel(lvl, l, s.conflictClause, s.trail))
          out.push_back(backjumpLearnStep(s.conflictClause, l, lvl));
  }
  detail::enumerateMemberPropagations(f, s.trail, out);
  if (sys != System::cdclRestart && !s.inConflict && s.justLearnt) {
    for (const Clause& c : s.learnt) {
      RuleInstance r = forgetStep(std::vector<Clause>{c});
      if (applyFive(s, r, ctx, sys).ok())
        out.push_back(std::move(r));
    }
  }
  if (sys != System::cdclForget && !s.inConflict && s.justLearnt)
    out.push_back(restartStep());
  if (!detail::unitClauseExists(f, s.trail))
    detail::enumerateDecides(s.trail, ctx, out);
  return out;
}

} // namespace satts::rules
