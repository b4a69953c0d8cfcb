#pragma once

// Well-founded termination orderings and the step certifier: given two
// successive states of a system, decide whether the step was legal, whether
// the state invariants still hold, and which lexicographic slot of the
// system's termination measure strictly decreased.
//
// Orientation: shorter trails are greater, so decide and unitPropagate
// descend; likewise a formula that is a proper subset after deduplication
// is greater, so learning a fresh clause descends.

#include <map>
#include <set>
#include <string>
#include <vector>

#include "satts/core.hpp"
#include "satts/oracle.hpp"
#include "satts/rules.hpp"

namespace satts::orderings {

using rules::CdclState;
using rules::Context;
using rules::FullState;
using rules::RuleInstance;
using rules::SearchState;
using rules::System;

/// Trail-entry ordering: a decision entry dominates an implied one.
inline bool succLit(const TrailEntry& a, const TrailEntry& b) {
  return a.isDecision && !b.isDecision;
}

/// Lexicographic extension of succLit to trails: m1 is greater when it is a
/// proper prefix of m2, or when the first differing entries a (in m1) and
/// b (in m2) satisfy succLit(a, b).
inline bool succTr(const Trail& m1, const Trail& m2) {
  std::size_t n = std::min(m1.size(), m2.size());
  for (std::size_t i = 0; i < n; ++i)
    if (m1[i] != m2[i])
      return succLit(m1[i], m2[i]);
  return m1.size() < m2.size();
}

/// succTr restricted to distinct trails over a finite variable set; this
/// restriction is the well-founded one.
inline bool succTrRestricted(const Trail& m1, const Trail& m2, const std::set<int>& vbl) {
  auto inside = [&](const Trail& m) {
    for (const TrailEntry& e : m)
      if (!vbl.count(e.lit.var()))
        return false;
    return true;
  };
  return isDistinct(m1) && inside(m1) && isDistinct(m2) && inside(m2) && succTr(m1, m2);
}

/// Multiset extension of > on naturals, by the decidable characterization:
/// s1 > s2 iff they differ and every value with surplus in s2 is dominated
/// by a strictly larger value with surplus in s1.
inline bool multisetGreater(const std::vector<int>& s1, const std::vector<int>& s2) {
  std::map<int, int> c1, c2;
  for (int x : s1)
    ++c1[x];
  for (int x : s2)
    ++c2[x];
  if (c1 == c2)
    return false;
  std::set<int, std::greater<int>> values;
  for (auto& [v, n] : c1)
    values.insert(v);
  for (auto& [v, n] : c2)
    values.insert(v);
  bool surplusAbove = false;
  for (int v : values) {
    int n1 = c1.count(v) ? c1[v] : 0;
    int n2 = c2.count(v) ? c2[v] : 0;
    if (n2 > n1 && !surplusAbove)
      return false;
    if (n1 > n2)
      surplusAbove = true;
  }
  return true;
}

/// Conflict-clause ordering relative to a trail: compare the multisets of
/// trail positions of the opposites of the deduplicated clauses.
inline bool succC(const Clause& c1, const Clause& c2, const Trail& m) {
  auto positions = [&](const Clause& c) {
    std::vector<int> ps;
    for (Literal l : removeDuplicateLiterals(c)) {
      std::size_t p = firstPos(l.opposite(), m);
      if (p >= m.size())
        throw PreconditionError("succC: opposite of " + toString(l) + " is not on the trail");
      ps.push_back(static_cast<int>(p));
    }
    return ps;
  };
  return multisetGreater(positions(c1), positions(c2));
}

/// Formula ordering relative to a clause: f1 is greater when c is new to f1
/// but present in f2 (clauses compared as literal sets).
inline bool succF(const Formula& f1, const Formula& f2, const Clause& c) {
  return !containsSetEqual(f1, c) && containsSetEqual(f2, c);
}

namespace detail {

inline std::set<std::vector<int>> dedupKeys(const Formula& f) {
  std::set<std::vector<int>> keys;
  for (const Clause& c : f)
    keys.insert(clauseKey(c));
  return keys;
}

} // namespace detail

/// Inclusion ordering on formulae after deduplicating literals and clauses,
/// restricted to a variable set: the proper subset is greater.
inline bool formulaInclusionGreater(const Formula& f1, const Formula& f2,
                                    const std::set<int>& vbl) {
  auto inside = [&](const Formula& f) {
    for (int v : varsOf(f))
      if (!vbl.count(v))
        return false;
    return true;
  };
  if (!inside(f1) || !inside(f2))
    return false;
  std::set<std::vector<int>> k1 = detail::dedupKeys(f1), k2 = detail::dedupKeys(f2);
  return k1 != k2 && std::includes(k2.begin(), k2.end(), k1.begin(), k1.end());
}

// --- measure verdicts -------------------------------------------------------

enum class MeasureStatus { decreased, violated, notApplicable };

/// Outcome of comparing two successive states under a system's measure.
struct MeasureVerdict {
  MeasureStatus status = MeasureStatus::violated;
  std::string component; // lexicographic slot that strictly decreased
  std::string detail;

  bool decreased() const { return status == MeasureStatus::decreased; }
};

namespace detail {

enum class SlotCmp { equal, decreased, violated };

inline SlotCmp trailSlot(const Trail& m1, const Trail& m2, const std::set<int>& vars) {
  if (m1 == m2)
    return SlotCmp::equal;
  return succTrRestricted(m1, m2, vars) ? SlotCmp::decreased : SlotCmp::violated;
}

// cflct slot: flipping bottom to top descends.
inline SlotCmp conflictFlagSlot(bool b1, bool b2) {
  if (b1 == b2)
    return SlotCmp::equal;
  return (!b1 && b2) ? SlotCmp::decreased : SlotCmp::violated;
}

// lnt slot enters the product negated, so top-to-bottom descends.
inline SlotCmp learntFlagSlot(bool b1, bool b2) {
  if (b1 == b2)
    return SlotCmp::equal;
  return (b1 && !b2) ? SlotCmp::decreased : SlotCmp::violated;
}

inline SlotCmp conflictClauseSlot(const Clause& c1, const Clause& c2, const Trail& m) {
  if (c1 == c2)
    return SlotCmp::equal;
  try {
    return succC(c1, c2, m) ? SlotCmp::decreased : SlotCmp::violated;
  } catch (const PreconditionError&) {
    return SlotCmp::violated;
  }
}

inline SlotCmp learnFormulaSlot(const Formula& f1, const Formula& f2, const Clause& c) {
  if (f1 == f2)
    return SlotCmp::equal;
  return succF(f1, f2, c) ? SlotCmp::decreased : SlotCmp::violated;
}

// Deduplicated-inclusion slot over F0 @ learnt. The common shapes (learnt
// lists equal; one freshly appended clause) avoid building the full key sets.
inline SlotCmp inclusionSlot(const Formula& f0, const Formula& l1, const Formula& l2) {
  if (l1 == l2)
    return SlotCmp::equal;
  if (l2.size() == l1.size() + 1 &&
      std::equal(l1.begin(), l1.end(), l2.begin())) {
    std::vector<int> key = clauseKey(l2.back());
    for (const Clause& c : f0)
      if (clauseKey(c) == key)
        return SlotCmp::equal;
    for (const Clause& c : l1)
      if (clauseKey(c) == key)
        return SlotCmp::equal;
    return SlotCmp::decreased;
  }
  Formula a = f0, b = f0;
  a.insert(a.end(), l1.begin(), l1.end());
  b.insert(b.end(), l2.begin(), l2.end());
  std::set<std::vector<int>> k1 = dedupKeys(a), k2 = dedupKeys(b);
  if (k1 == k2)
    return SlotCmp::equal;
  return std::includes(k2.begin(), k2.end(), k1.begin(), k1.end()) ? SlotCmp::decreased
                                                                   : SlotCmp::violated;
}

struct NamedSlot {
  const char* component;
  SlotCmp cmp;
};

inline MeasureVerdict walkSlots(const std::vector<NamedSlot>& slots) {
  for (const NamedSlot& s : slots) {
    if (s.cmp == SlotCmp::decreased)
      return MeasureVerdict{MeasureStatus::decreased, s.component,
                            std::string("slot ") + s.component + " strictly decreased"};
    if (s.cmp == SlotCmp::violated)
      return MeasureVerdict{MeasureStatus::violated, s.component,
                            std::string("slot ") + s.component +
                                " neither equal nor strictly decreased"};
  }
  return MeasureVerdict{MeasureStatus::violated, "",
                        "no lexicographic slot strictly decreased"};
}

} // namespace detail

/// Measure comparison for one step of a system. For the learn and full
/// systems the measure is reported not applicable: those relations are not
/// well-founded.
inline MeasureVerdict measureVerdict(System sys, const SearchState& s1, const SearchState& s2,
                                     const Context& ctx) {
  if (sys == System::learn)
    return MeasureVerdict{MeasureStatus::notApplicable, "n/a (learn system)",
                          "the learn/forget system is not well-founded"};
  return detail::walkSlots({{"M", detail::trailSlot(s1.trail, s2.trail, ctx.vars)}});
}

inline MeasureVerdict measureVerdict(System, const CdclState& s1, const CdclState& s2,
                                     const Context& ctx) {
  return detail::walkSlots({
      {"M", detail::trailSlot(s1.trail, s2.trail, ctx.vars)},
      {"cflct", detail::conflictFlagSlot(s1.inConflict, s2.inConflict)},
      {"C", detail::conflictClauseSlot(s1.conflictClause, s2.conflictClause, s1.trail)},
      {"F", detail::learnFormulaSlot(s1.formula, s2.formula, s1.conflictClause)},
  });
}

inline MeasureVerdict measureVerdict(System sys, const FullState& s1, const FullState& s2,
                                     const Context& ctx) {
  switch (sys) {
  case System::cdclForget:
    return detail::walkSlots({
        {"M", detail::trailSlot(s1.trail, s2.trail, ctx.vars)},
        {"cflct", detail::conflictFlagSlot(s1.inConflict, s2.inConflict)},
        {"C", detail::conflictClauseSlot(s1.conflictClause, s2.conflictClause, s1.trail)},
        {"lnt", detail::learntFlagSlot(s1.justLearnt, s2.justLearnt)},
    });
  case System::cdclRestart:
    return detail::walkSlots({
        {"F", detail::inclusionSlot(ctx.f0, s1.learnt, s2.learnt)},
        {"lnt", detail::learntFlagSlot(s1.justLearnt, s2.justLearnt)},
        {"M", detail::trailSlot(s1.trail, s2.trail, ctx.vars)},
        {"cflct", detail::conflictFlagSlot(s1.inConflict, s2.inConflict)},
        {"C", detail::conflictClauseSlot(s1.conflictClause, s2.conflictClause, s1.trail)},
    });
  case System::full:
    return MeasureVerdict{MeasureStatus::notApplicable, "n/a (full system)",
                          "the full system is not well-founded"};
  default:
    throw PreconditionError("measureVerdict: not a five-tuple system");
  }
}

// --- invariant checking -------------------------------------------------------

enum class InvariantDepth {
  structural, // consistent, distinct, varsM, varsF, Cfalse
  oracle      // additionally impliedLits, equiv, Centailed, reasonClauses
};

struct InvariantReport {
  bool ok = true;
  std::string violated; // name and detail of the first failed invariant
};

namespace detail {

inline bool varsInside(const std::set<int>& vars, const std::set<int>& universe) {
  return std::includes(universe.begin(), universe.end(), vars.begin(), vars.end());
}

inline InvariantReport fail(const std::string& name, const std::string& detail) {
  return InvariantReport{false, name + ": " + detail};
}

inline InvariantReport checkTrailAndFormula(const Trail& m, const Formula& f,
                                            const Context& ctx, InvariantDepth depth) {
  if (!isConsistent(m))
    return fail("consistent", "trail contains a literal and its opposite");
  if (!isDistinct(m))
    return fail("distinct", "trail contains a repeated literal");
  if (!varsInside(varsOf(m), ctx.vars))
    return fail("varsM", "trail variable outside Vars");
  if (!varsInside(varsOf(f), ctx.vars))
    return fail("varsF", "formula variable outside Vars");
  if (depth == InvariantDepth::oracle) {
    int budget = ctx.config.oracleVarBudget;
    if (!oracle::equivalent(f, ctx.f0, budget))
      return fail("equiv", "formula is not equivalent to the input formula");
    for (const TrailEntry& e : m) {
      Formula premise = f;
      for (Literal d : decisionsTo(m, e.lit))
        premise.push_back(Clause{d});
      if (!oracle::entails(premise, Clause{e.lit}, budget))
        return fail("impliedLits", "literal " + toString(e.lit) +
                                       " is not entailed by the formula with its "
                                       "preceding decisions");
    }
  }
  return InvariantReport{};
}

// Reasons are searched among formula members first; failing that, the
// clause made of the opposites of the preceding decisions plus the literal
// itself is a structural reason, and entailment of that clause is exactly
// the implied-literal invariant.
inline InvariantReport checkReasonClauses(const Trail& m, const Formula& f, const Context& ctx) {
  int budget = ctx.config.oracleVarBudget;
  for (const TrailEntry& e : m) {
    if (e.isDecision)
      continue;
    bool found = false;
    for (const Clause& c : f) {
      if (isReason(c, e.lit, m)) {
        found = true;
        break;
      }
    }
    if (!found) {
      Clause witness;
      for (Literal d : decisionsTo(m, e.lit))
        witness.push_back(d.opposite());
      witness.push_back(e.lit);
      found = isReason(witness, e.lit, m) && oracle::entails(f, witness, budget);
    }
    if (!found)
      return fail("reasonClauses", "no entailed reason clause for implied literal " +
                                       toString(e.lit));
  }
  return InvariantReport{};
}

inline InvariantReport checkConflictInvariants(const Trail& m, const Formula& f,
                                               const Clause& c, bool inConflict,
                                               const Context& ctx, InvariantDepth depth) {
  if (inConflict && !clauseFalse(c, m))
    return fail("Cfalse", "conflict-analysis clause is not false in the trail");
  if (depth == InvariantDepth::oracle) {
    if (inConflict && !oracle::entails(f, c, ctx.config.oracleVarBudget))
      return fail("Centailed", "conflict-analysis clause is not entailed by the formula");
    return checkReasonClauses(m, f, ctx);
  }
  return InvariantReport{};
}

} // namespace detail

inline InvariantReport checkInvariants(System sys, const SearchState& s, const Context& ctx,
                                       InvariantDepth depth) {
  (void)sys;
  return detail::checkTrailAndFormula(s.trail, s.formula, ctx, depth);
}

inline InvariantReport checkInvariants(System sys, const CdclState& s, const Context& ctx,
                                       InvariantDepth depth) {
  (void)sys;
  InvariantReport r = detail::checkTrailAndFormula(s.trail, s.formula, ctx, depth);
  if (!r.ok)
    return r;
  return detail::checkConflictInvariants(s.trail, s.formula, s.conflictClause, s.inConflict,
                                         ctx, depth);
}

inline InvariantReport checkInvariants(System sys, const FullState& s, const Context& ctx,
                                       InvariantDepth depth) {
  (void)sys;
  Formula f = rules::combinedFormula(ctx, s);
  InvariantReport r = detail::checkTrailAndFormula(s.trail, f, ctx, depth);
  if (!r.ok)
    return r;
  return detail::checkConflictInvariants(s.trail, f, s.conflictClause, s.inConflict, ctx,
                                         depth);
}

// --- step certification ---------------------------------------------------------

/// The full verdict on one step: guard legality, next-state agreement,
/// invariant preservation and measure decrease.
struct StepCertificate {
  bool ok = false;
  std::string failure;
  MeasureVerdict measure;
};

namespace detail {

inline std::string firstDifference(const SearchState& a, const SearchState& b) {
  if (a.trail != b.trail)
    return "trail";
  if (a.formula != b.formula)
    return "formula";
  return "";
}

inline std::string firstDifference(const CdclState& a, const CdclState& b) {
  if (a.trail != b.trail)
    return "trail";
  if (a.formula != b.formula)
    return "formula";
  if (a.conflictClause != b.conflictClause)
    return "conflict clause";
  if (a.inConflict != b.inConflict)
    return "conflict flag";
  return "";
}

inline std::string firstDifference(const FullState& a, const FullState& b) {
  if (a.trail != b.trail)
    return "trail";
  if (a.learnt != b.learnt)
    return "learnt clauses";
  if (a.conflictClause != b.conflictClause)
    return "conflict clause";
  if (a.inConflict != b.inConflict)
    return "conflict flag";
  if (a.justLearnt != b.justLearnt)
    return "just-learnt flag";
  return "";
}

template <class S, class ApplyFn>
StepCertificate certify(System sys, const S& s1, const S& s2, const RuleInstance& r,
                        const Context& ctx, InvariantDepth depth, ApplyFn&& apply) {
  StepCertificate cert;
  auto res = apply(s1, r);
  if (!res.ok()) {
    cert.failure = (res.status == rules::StepStatus::uncertified ? "uncertified step: "
                                                                 : "rejected step: ") +
                   res.detail;
    return cert;
  }
  if (*res.state != s2) {
    cert.failure = "state mismatch after " + std::string(rules::name(r.rule)) +
                   ": first differing field is " + firstDifference(*res.state, s2);
    return cert;
  }
  InvariantReport inv = checkInvariants(sys, s2, ctx, depth);
  if (!inv.ok) {
    cert.failure = "invariant " + inv.violated;
    return cert;
  }
  cert.measure = measureVerdict(sys, s1, s2, ctx);
  if (cert.measure.status == MeasureStatus::violated) {
    cert.failure = "measure violation: " + cert.measure.detail;
    return cert;
  }
  cert.ok = true;
  return cert;
}

} // namespace detail

inline StepCertificate certifyStep(System sys, const SearchState& s1, const SearchState& s2,
                                   const RuleInstance& r, const Context& ctx,
                                   InvariantDepth depth = InvariantDepth::structural) {
  switch (sys) {
  case System::dpll:
    return detail::certify(sys, s1, s2, r, ctx, depth, [&](const SearchState& s,
                                                           const RuleInstance& ri) {
      return rules::applyDpll(s, ri, ctx);
    });
  case System::backjump:
    return detail::certify(sys, s1, s2, r, ctx, depth, [&](const SearchState& s,
                                                           const RuleInstance& ri) {
      return rules::applyBackjump(s, ri, ctx);
    });
  case System::learn:
    return detail::certify(sys, s1, s2, r, ctx, depth, [&](const SearchState& s,
                                                           const RuleInstance& ri) {
      return rules::applyLearning(s, ri, ctx);
    });
  default:
    throw PreconditionError("certifyStep: system does not use the (M, F) state");
  }
}

inline StepCertificate certifyStep(System sys, const CdclState& s1, const CdclState& s2,
                                   const RuleInstance& r, const Context& ctx,
                                   InvariantDepth depth = InvariantDepth::structural) {
  if (sys != System::cdcl)
    throw PreconditionError("certifyStep: system does not use the four-tuple state");
  return detail::certify(sys, s1, s2, r, ctx, depth,
                         [&](const CdclState& s, const RuleInstance& ri) {
                           return rules::applyCdcl(s, ri, ctx);
                         });
}

inline StepCertificate certifyStep(System sys, const FullState& s1, const FullState& s2,
                                   const RuleInstance& r, const Context& ctx,
                                   InvariantDepth depth = InvariantDepth::structural) {
  if (!rules::fiveTupleSystem(sys))
    throw PreconditionError("certifyStep: system does not use the five-tuple state");
  return detail::certify(sys, s1, s2, r, ctx, depth,
                         [&](const FullState& s, const RuleInstance& ri) {
                           return rules::applyFive(s, ri, ctx, sys);
                         });
}

} // namespace satts::orderings
