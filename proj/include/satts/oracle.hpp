#pragma once

// Truth-table ground truth: satisfiability, entailment and equivalence by
// exhaustive enumeration. Deliberately naive; used to cross-check the
// transition systems, never the other way around.

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "satts/core.hpp"

namespace satts::oracle {

inline constexpr int kDefaultVarBudget = 20;

struct OracleResult {
  bool satisfiable = false;
  std::optional<Valuation> model;
};

namespace detail {

// A formula compiled to dense variable slots for fast enumeration.
struct Compiled {
  std::vector<int> vars; // ascending
  std::map<int, int> slotOf;
  // Per clause: (slot, wantedValue) pairs.
  std::vector<std::vector<std::pair<int, bool>>> clauses;

  Compiled(const Formula& f, const std::set<int>& varSet) {
    vars.assign(varSet.begin(), varSet.end());
    for (std::size_t i = 0; i < vars.size(); ++i)
      slotOf[vars[i]] = static_cast<int>(i);
    clauses.reserve(f.size());
    for (const Clause& c : f) {
      std::vector<std::pair<int, bool>> cc;
      cc.reserve(c.size());
      for (Literal l : c)
        cc.push_back({slotOf.at(l.var()), l.positive()});
      clauses.push_back(std::move(cc));
    }
  }

  bool clauseTrueUnder(std::uint64_t mask, const std::vector<std::pair<int, bool>>& c) const {
    for (auto [slot, want] : c) {
      bool val = (mask >> (vars.size() - 1 - static_cast<std::size_t>(slot))) & 1u;
      if (val == want)
        return true;
    }
    return false;
  }

  bool trueUnder(std::uint64_t mask) const {
    for (const auto& c : clauses)
      if (!clauseTrueUnder(mask, c))
        return false;
    return true;
  }

  // Total valuation for the mask, literals ordered by ascending variable.
  Valuation valuationOf(std::uint64_t mask) const {
    Valuation v;
    v.reserve(vars.size());
    for (std::size_t i = 0; i < vars.size(); ++i) {
      bool val = (mask >> (vars.size() - 1 - i)) & 1u;
      v.push_back(Literal(val ? vars[i] : -vars[i]));
    }
    return v;
  }
};

inline void checkBudget(const std::set<int>& vars, int budget, const char* what) {
  if (static_cast<int>(vars.size()) > budget)
    throw BudgetError(std::string(what) + ": " + std::to_string(vars.size()) +
                      " variables exceed the oracle budget of " + std::to_string(budget));
}

} // namespace detail

/// Exhaustively enumerate total valuations of vars (which must cover the
/// formula's variables) and return the first model in lexicographic order,
/// where smaller variables vary slowest and false comes before true.
inline OracleResult bruteSat(const Formula& f, const std::set<int>& vars,
                             int budget = kDefaultVarBudget) {
  std::set<int> fv = varsOf(f);
  for (int v : fv)
    if (!vars.count(v))
      throw PreconditionError("bruteSat: variable set does not cover the formula");
  detail::checkBudget(vars, budget, "bruteSat");

  detail::Compiled comp(f, vars);
  std::uint64_t total = std::uint64_t{1} << vars.size();
  for (std::uint64_t mask = 0; mask < total; ++mask) {
    if (comp.trueUnder(mask))
      return OracleResult{true, comp.valuationOf(mask)};
  }
  return OracleResult{false, std::nullopt};
}

/// F entails c: c is true in every model of F, over vars(F) + vars(c).
inline bool entails(const Formula& f, const Clause& c, int budget = kDefaultVarBudget) {
  std::set<int> vars = varsOf(f);
  for (Literal l : c)
    vars.insert(l.var());
  detail::checkBudget(vars, budget, "entails");

  Formula negated = f;
  for (Literal l : c)
    negated.push_back(Clause{l.opposite()});
  detail::Compiled comp(negated, vars);
  std::uint64_t total = vars.empty() ? 1 : (std::uint64_t{1} << vars.size());
  for (std::uint64_t mask = 0; mask < total; ++mask)
    if (comp.trueUnder(mask))
      return false; // model of F falsifying every literal of c
  return true;
}

inline bool entailsLiteral(const Formula& f, Literal l, int budget = kDefaultVarBudget) {
  return entails(f, Clause{l}, budget);
}

inline bool entailsValuation(const Formula& f, const Valuation& v,
                             int budget = kDefaultVarBudget) {
  for (Literal l : v)
    if (!entailsLiteral(f, l, budget))
      return false;
  return true;
}

/// Mutual entailment: the two formulae agree on every total valuation of
/// their combined variables.
inline bool equivalent(const Formula& f1, const Formula& f2, int budget = kDefaultVarBudget) {
  std::set<int> vars = varsOf(f1);
  for (int v : varsOf(f2))
    vars.insert(v);
  detail::checkBudget(vars, budget, "equivalent");

  detail::Compiled c1(f1, vars), c2(f2, vars);
  std::uint64_t total = vars.empty() ? 1 : (std::uint64_t{1} << vars.size());
  for (std::uint64_t mask = 0; mask < total; ++mask)
    if (c1.trueUnder(mask) != c2.trueUnder(mask))
      return false;
  return true;
}

inline bool isModel(const Valuation& v, const Formula& f) {
  return isConsistent(v) && formulaTrue(f, v);
}

} // namespace satts::oracle
