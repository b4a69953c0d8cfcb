#pragma once

// CNF data model and trail/valuation semantics. Clauses and formulae are
// plain lists: duplicates are permitted everywhere and order is meaningful.
// All types are immutable values; every function here is pure.

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace satts {

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// A caller broke a stated precondition (e.g. asked for the level of a
// literal that is not on the trail).
class PreconditionError : public Error {
public:
  using Error::Error;
};

// An operation refused to run because it would exceed a configured budget
// (oracle variable limit, solver step limit). Never silently skipped.
class BudgetError : public Error {
public:
  using Error::Error;
};

class ParseError : public Error {
public:
  using Error::Error;
};

/// A signed propositional literal. Encoded as a nonzero integer whose
/// absolute value is the variable, DIMACS style.
class Literal {
public:
  Literal() = delete;
  constexpr explicit Literal(int code) : code_(code) {
    if (code == 0)
      throw PreconditionError("literal code must be nonzero");
  }

  constexpr int code() const { return code_; }
  constexpr int var() const { return code_ < 0 ? -code_ : code_; }
  constexpr bool positive() const { return code_ > 0; }
  constexpr Literal opposite() const { return Literal(-code_); }

  friend constexpr bool operator==(Literal a, Literal b) { return a.code_ == b.code_; }
  friend constexpr bool operator!=(Literal a, Literal b) { return a.code_ != b.code_; }
  friend constexpr bool operator<(Literal a, Literal b) { return a.code_ < b.code_; }

private:
  int code_;
};

using Clause = std::vector<Literal>;
using Formula = std::vector<Clause>;
using Valuation = std::vector<Literal>;

/// One trail element: a literal plus its decision mark.
struct TrailEntry {
  Literal lit;
  bool isDecision = false;

  friend bool operator==(const TrailEntry& a, const TrailEntry& b) {
    return a.lit == b.lit && a.isDecision == b.isDecision;
  }
  friend bool operator!=(const TrailEntry& a, const TrailEntry& b) { return !(a == b); }
};

using Trail = std::vector<TrailEntry>;

inline Literal opposite(Literal l) { return l.opposite(); }

inline Clause makeClause(std::initializer_list<int> codes) {
  Clause c;
  c.reserve(codes.size());
  for (int x : codes)
    c.push_back(Literal(x));
  return c;
}

inline Valuation elements(const Trail& m) {
  Valuation v;
  v.reserve(m.size());
  for (const TrailEntry& e : m)
    v.push_back(e.lit);
  return v;
}

inline TrailEntry decision(Literal l) { return TrailEntry{l, true}; }
inline TrailEntry implied(Literal l) { return TrailEntry{l, false}; }

// Generic access so the semantic predicates work on both valuations and
// trails (a trail is treated as its underlying literal list).
inline std::size_t litCount(const Valuation& v) { return v.size(); }
inline std::size_t litCount(const Trail& m) { return m.size(); }
inline Literal litAt(const Valuation& v, std::size_t i) { return v[i]; }
inline Literal litAt(const Trail& m, std::size_t i) { return m[i].lit; }

/// Zero-based index of the first occurrence of l, or the length if absent.
template <class Lits>
std::size_t firstPos(Literal l, const Lits& v) {
  std::size_t n = litCount(v);
  for (std::size_t i = 0; i < n; ++i)
    if (litAt(v, i) == l)
      return i;
  return n;
}

/// Both literals occur and a comes strictly before b.
template <class Lits>
bool precedes(Literal a, Literal b, const Lits& v) {
  std::size_t pa = firstPos(a, v), pb = firstPos(b, v), n = litCount(v);
  return pa < n && pb < n && pa < pb;
}

template <class Lits>
bool literalTrue(Literal l, const Lits& v) {
  return firstPos(l, v) < litCount(v);
}

template <class Lits>
bool literalFalse(Literal l, const Lits& v) {
  return literalTrue(l.opposite(), v);
}

template <class Lits>
bool literalUndefined(Literal l, const Lits& v) {
  return !literalTrue(l, v) && !literalFalse(l, v);
}

template <class Lits>
bool clauseTrue(const Clause& c, const Lits& v) {
  return std::any_of(c.begin(), c.end(), [&](Literal l) { return literalTrue(l, v); });
}

template <class Lits>
bool clauseFalse(const Clause& c, const Lits& v) {
  return std::all_of(c.begin(), c.end(), [&](Literal l) { return literalFalse(l, v); });
}

template <class Lits>
bool formulaTrue(const Formula& f, const Lits& v) {
  return std::all_of(f.begin(), f.end(), [&](const Clause& c) { return clauseTrue(c, v); });
}

template <class Lits>
bool formulaFalse(const Formula& f, const Lits& v) {
  return std::any_of(f.begin(), f.end(), [&](const Clause& c) { return clauseFalse(c, v); });
}

template <class Lits>
bool isConsistent(const Lits& v) {
  std::set<int> codes;
  std::size_t n = litCount(v);
  for (std::size_t i = 0; i < n; ++i)
    codes.insert(litAt(v, i).code());
  for (std::size_t i = 0; i < n; ++i)
    if (codes.count(-litAt(v, i).code()))
      return false;
  return true;
}

template <class Lits>
bool isDistinct(const Lits& v) {
  std::set<int> seen;
  std::size_t n = litCount(v);
  for (std::size_t i = 0; i < n; ++i)
    if (!seen.insert(litAt(v, i).code()).second)
      return false;
  return true;
}

inline std::set<int> varsOf(const Clause& c) {
  std::set<int> vars;
  for (Literal l : c)
    vars.insert(l.var());
  return vars;
}

inline std::set<int> varsOf(const Formula& f) {
  std::set<int> vars;
  for (const Clause& c : f)
    for (Literal l : c)
      vars.insert(l.var());
  return vars;
}

inline std::set<int> varsOf(const Trail& m) {
  std::set<int> vars;
  for (const TrailEntry& e : m)
    vars.insert(e.lit.var());
  return vars;
}

/// Clause minus all occurrences of l.
inline Clause removeAll(const Clause& c, Literal l) {
  Clause out;
  out.reserve(c.size());
  for (Literal x : c)
    if (x != l)
      out.push_back(x);
  return out;
}

/// Remove duplicate literals, keeping first occurrences.
inline Clause removeDuplicateLiterals(const Clause& c) {
  Clause out;
  std::set<int> seen;
  for (Literal x : c)
    if (seen.insert(x.code()).second)
      out.push_back(x);
  return out;
}

inline Clause oppositesOf(const Clause& c) {
  Clause out;
  out.reserve(c.size());
  for (Literal x : c)
    out.push_back(x.opposite());
  return out;
}

/// Resolvent of c1 and c2 over l: drop l from c1 and opposite(l) from c2,
/// concatenate, then deduplicate literals.
inline Clause resolvent(const Clause& c1, const Clause& c2, Literal l) {
  Clause out = removeAll(c1, l);
  Clause rest = removeAll(c2, l.opposite());
  out.insert(out.end(), rest.begin(), rest.end());
  return removeDuplicateLiterals(out);
}

inline bool clauseTautology(const Clause& c) {
  std::set<int> seen;
  for (Literal l : c)
    seen.insert(l.code());
  for (Literal l : c)
    if (seen.count(-l.code()))
      return true;
  return false;
}

/// One singleton clause per literal of v, in order.
inline Formula valuationToFormula(const Valuation& v) {
  Formula f;
  f.reserve(v.size());
  for (Literal l : v)
    f.push_back(Clause{l});
  return f;
}

/// c is unit in v with unit literal l: l occurs in c, is undefined in v,
/// and every other literal of c is false in v.
template <class Lits>
bool isUnit(const Clause& c, Literal l, const Lits& v) {
  if (std::find(c.begin(), c.end(), l) == c.end())
    return false;
  if (!literalUndefined(l, v))
    return false;
  return clauseFalse(removeAll(c, l), v);
}

/// c is a reason for the propagation of l in v: l occurs in c and is true,
/// the rest of c is false, and each opposite precedes l in v.
template <class Lits>
bool isReason(const Clause& c, Literal l, const Lits& v) {
  if (std::find(c.begin(), c.end(), l) == c.end())
    return false;
  if (!literalTrue(l, v))
    return false;
  Clause rest = removeAll(c, l);
  if (!clauseFalse(rest, v))
    return false;
  for (Literal x : rest)
    if (!precedes(x.opposite(), l, v))
      return false;
  return true;
}

inline Valuation decisions(const Trail& m) {
  Valuation ds;
  for (const TrailEntry& e : m)
    if (e.isDecision)
      ds.push_back(e.lit);
  return ds;
}

inline int currentLevel(const Trail& m) {
  int n = 0;
  for (const TrailEntry& e : m)
    if (e.isDecision)
      ++n;
  return n;
}

inline Literal lastDecision(const Trail& m) {
  for (auto it = m.rbegin(); it != m.rend(); ++it)
    if (it->isDecision)
      return it->lit;
  throw PreconditionError("lastDecision: trail has no decision entry");
}

/// Trail prefix up to and including the first occurrence of l.
inline Trail prefixTo(Literal l, const Trail& m) {
  Trail p;
  for (const TrailEntry& e : m) {
    p.push_back(e);
    if (e.lit == l)
      return p;
  }
  return p;
}

/// The decision literals at or before the first occurrence of l.
inline Valuation decisionsTo(const Trail& m, Literal l) {
  return decisions(prefixTo(l, m));
}

/// Number of decisions up to and including the first occurrence of l.
inline int level(Literal l, const Trail& m) {
  int n = 0;
  for (const TrailEntry& e : m) {
    if (e.isDecision)
      ++n;
    if (e.lit == l)
      return n;
  }
  throw PreconditionError("level: literal " + std::to_string(l.code()) + " not on trail");
}

/// Maximal prefix whose entries all have level <= lvl.
inline Trail prefixToLevel(const Trail& m, int lvl) {
  Trail p;
  int seen = 0;
  for (const TrailEntry& e : m) {
    if (e.isDecision && seen + 1 > lvl)
      break;
    if (e.isDecision)
      ++seen;
    p.push_back(e);
  }
  return p;
}

/// Prefix strictly before the last decision entry; the whole trail when
/// there is none.
inline Trail prefixBeforeLastDecision(const Trail& m) {
  std::size_t cut = m.size();
  for (std::size_t i = m.size(); i > 0; --i) {
    if (m[i - 1].isDecision) {
      cut = i - 1;
      break;
    }
    if (i == 1)
      return m;
  }
  if (cut == m.size())
    return m;
  return Trail(m.begin(), m.begin() + static_cast<std::ptrdiff_t>(cut));
}

/// The literal of c occurring in m whose first position is greatest.
inline Literal lastAssertedLiteral(const Clause& c, const Trail& m) {
  std::optional<Literal> best;
  std::size_t bestPos = 0;
  for (Literal l : c) {
    std::size_t p = firstPos(l, m);
    if (p < m.size() && (!best || p > bestPos)) {
      best = l;
      bestPos = p;
    }
  }
  if (!best)
    throw PreconditionError("lastAssertedLiteral: no literal of the clause is on the trail");
  return *best;
}

/// Maximum level of the clause's literals asserted in m.
inline int maxLevel(const Clause& c, const Trail& m) {
  std::optional<int> best;
  for (Literal l : c) {
    if (firstPos(l, m) < m.size()) {
      int lv = level(l, m);
      if (!best || lv > *best)
        best = lv;
    }
  }
  if (!best)
    throw PreconditionError("maxLevel: no literal of the clause is on the trail");
  return *best;
}

// --- order-insensitive clause comparison helpers -------------------------

/// Canonical key for clause-as-set comparisons: sorted, deduplicated codes.
inline std::vector<int> clauseKey(const Clause& c) {
  std::vector<int> key;
  key.reserve(c.size());
  for (Literal l : c)
    key.push_back(l.code());
  std::sort(key.begin(), key.end());
  key.erase(std::unique(key.begin(), key.end()), key.end());
  return key;
}

inline bool clauseSetEqual(const Clause& a, const Clause& b) {
  return clauseKey(a) == clauseKey(b);
}

/// Clause membership in a formula up to literal-set equality.
inline bool containsSetEqual(const Formula& f, const Clause& c) {
  std::vector<int> key = clauseKey(c);
  return std::any_of(f.begin(), f.end(),
                     [&](const Clause& x) { return clauseKey(x) == key; });
}

/// Exact (list) clause membership.
inline bool containsExact(const Formula& f, const Clause& c) {
  return std::find(f.begin(), f.end(), c) != f.end();
}

inline std::string toString(Literal l) { return std::to_string(l.code()); }

inline std::string toString(const Clause& c) {
  std::string s = "[";
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (i)
      s += ",";
    s += toString(c[i]);
  }
  return s + "]";
}

inline std::string toString(const Trail& m) {
  std::string s = "[";
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (i)
      s += ",";
    s += toString(m[i].lit);
    if (m[i].isDecision)
      s += "*";
  }
  return s + "]";
}

inline std::string toString(const Formula& f) {
  std::string s = "[";
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (i)
      s += ",";
    s += toString(f[i]);
  }
  return s + "]";
}

} // namespace satts
