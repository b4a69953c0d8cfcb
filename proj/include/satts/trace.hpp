#pragma once

// Trace files and the step-by-step verifier. A trace is one header line
// followed by one JSON record per rule application; replaying it from the
// initial state certifies every guard, invariant and measure slot without
// trusting the producer.

#include <cstdint>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "satts/core.hpp"
#include "satts/orderings.hpp"
#include "satts/rules.hpp"

namespace satts::trace {

using orderings::InvariantDepth;
using rules::RuleInstance;
using rules::System;

inline constexpr int kFormatVersion = 1;
inline constexpr const char* kFileExtension = ".satt";

/// Order-sensitive digest of the exact clause list (FNV-1a over sizes and
/// literal codes), hex encoded. Pins a trace to its input formula.
inline std::string digest(const Formula& f) {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](std::int64_t x) {
    for (int i = 0; i < 8; ++i) {
      h ^= static_cast<std::uint64_t>(x >> (8 * i)) & 0xffu;
      h *= 1099511628211ull;
    }
  };
  mix(static_cast<std::int64_t>(f.size()));
  for (const Clause& c : f) {
    mix(static_cast<std::int64_t>(c.size()));
    for (Literal l : c)
      mix(l.code());
  }
  std::ostringstream out;
  out << std::hex << h;
  return out.str();
}

struct TraceHeader {
  int format = kFormatVersion;
  System system = System::dpll;
  std::set<int> decisionVars;
  std::string formulaDigest;

  friend bool operator==(const TraceHeader& a, const TraceHeader& b) {
    return a.format == b.format && a.system == b.system && a.decisionVars == b.decisionVars &&
           a.formulaDigest == b.formulaDigest;
  }
};

struct TraceFile {
  TraceHeader header;
  std::vector<RuleInstance> steps;

  friend bool operator==(const TraceFile& a, const TraceFile& b) {
    return a.header == b.header && a.steps == b.steps;
  }
};

namespace detail {

inline nlohmann::json clauseJson(const Clause& c) {
  nlohmann::json arr = nlohmann::json::array();
  for (Literal l : c)
    arr.push_back(l.code());
  return arr;
}

inline Clause clauseFromJson(const nlohmann::json& j) {
  if (!j.is_array())
    throw ParseError("clause field is not an array");
  Clause c;
  for (const auto& x : j) {
    if (!x.is_number_integer())
      throw ParseError("clause literal is not an integer");
    int code = x.get<int>();
    if (code == 0)
      throw ParseError("clause literal 0 is not a valid literal");
    c.push_back(Literal(code));
  }
  return c;
}

} // namespace detail

/// One self-delimiting line per rule application.
inline std::string emit(const RuleInstance& r) {
  nlohmann::json j;
  j["rule"] = rules::name(r.rule);
  if (r.clause)
    j["clause"] = detail::clauseJson(*r.clause);
  if (r.literal)
    j["lit"] = r.literal->code();
  if (r.level)
    j["level"] = *r.level;
  if (r.forgotten) {
    nlohmann::json arr = nlohmann::json::array();
    for (const Clause& c : *r.forgotten)
      arr.push_back(detail::clauseJson(c));
    j["forgotten"] = arr;
  }
  return j.dump();
}

inline RuleInstance parse(const std::string& line) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed step record: ") + e.what());
  }
  if (!j.is_object() || !j.contains("rule") || !j["rule"].is_string())
    throw ParseError("step record has no rule name");
  RuleInstance r;
  auto rule = rules::ruleFromName(j["rule"].get<std::string>());
  if (!rule)
    throw ParseError("unknown rule name " + j["rule"].get<std::string>());
  r.rule = *rule;
  for (const auto& [key, value] : j.items()) {
    if (key == "rule")
      continue;
    if (key == "clause")
      r.clause = detail::clauseFromJson(value);
    else if (key == "lit") {
      if (!value.is_number_integer() || value.get<int>() == 0)
        throw ParseError("lit field is not a nonzero integer");
      r.literal = Literal(value.get<int>());
    } else if (key == "level") {
      if (!value.is_number_integer())
        throw ParseError("level field is not an integer");
      r.level = value.get<int>();
    } else if (key == "forgotten") {
      if (!value.is_array())
        throw ParseError("forgotten field is not an array");
      std::vector<Clause> fs;
      for (const auto& x : value)
        fs.push_back(detail::clauseFromJson(x));
      r.forgotten = std::move(fs);
    } else {
      throw ParseError("unknown step field " + key);
    }
  }
  return r;
}

inline std::string emitHeader(const TraceHeader& h) {
  nlohmann::json j;
  j["format"] = h.format;
  j["system"] = rules::name(h.system);
  j["decVars"] = h.decisionVars;
  j["f0"] = h.formulaDigest;
  return j.dump();
}

inline TraceHeader parseHeader(const std::string& line) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed header record: ") + e.what());
  }
  if (!j.is_object() || !j.contains("format") || !j.contains("system") ||
      !j.contains("decVars") || !j.contains("f0"))
    throw ParseError("header record is missing a required field");
  TraceHeader h;
  if (!j["format"].is_number_integer())
    throw ParseError("header format is not an integer");
  h.format = j["format"].get<int>();
  auto sys = rules::systemFromName(j["system"].get<std::string>());
  if (!sys)
    throw ParseError("unknown system name " + j["system"].get<std::string>());
  h.system = *sys;
  for (const auto& x : j["decVars"]) {
    if (!x.is_number_integer() || x.get<int>() < 1)
      throw ParseError("decVars entries must be positive integers");
    h.decisionVars.insert(x.get<int>());
  }
  h.formulaDigest = j["f0"].get<std::string>();
  return h;
}

inline std::string serialize(const TraceFile& t) {
  std::string out = emitHeader(t.header);
  out += '\n';
  for (const RuleInstance& r : t.steps) {
    out += emit(r);
    out += '\n';
  }
  return out;
}

inline TraceFile parseTraceFile(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t lineNo = 0;
  TraceFile t;
  bool sawHeader = false;
  while (std::getline(in, line)) {
    ++lineNo;
    if (line.empty())
      continue;
    try {
      if (!sawHeader) {
        t.header = parseHeader(line);
        sawHeader = true;
      } else {
        t.steps.push_back(parse(line));
      }
    } catch (const ParseError& e) {
      throw ParseError("line " + std::to_string(lineNo) + ": " + e.what());
    }
  }
  if (!sawHeader)
    throw ParseError("trace file has no header line");
  if (t.header.format != kFormatVersion)
    throw ParseError("unsupported trace format version " + std::to_string(t.header.format));
  return t;
}

inline void writeTraceFile(const std::string& path, const TraceFile& t) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw Error("cannot open " + path + " for writing");
  out << serialize(t);
}

inline TraceFile readTraceFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw Error("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parseTraceFile(buf.str());
}

// --- verification ------------------------------------------------------------

struct VerifyResult {
  bool ok = false;
  std::size_t failedStep = SIZE_MAX; // SIZE_MAX with !ok means a header failure
  std::string reason;
  rules::Outcome finalOutcome = rules::Outcome::intermediate;
  std::size_t stepsVerified = 0;
};

/// Optional callbacks receiving every replayed state: index 0 is the
/// initial state, index i+1 the state after step i.
struct ReplayObservers {
  std::function<void(std::size_t, const rules::SearchState&)> searchState;
  std::function<void(std::size_t, const rules::CdclState&)> cdclState;
  std::function<void(std::size_t, const rules::FullState&)> fullState;
};

namespace detail {

template <class S, class ApplyFn, class Observe>
VerifyResult replay(System sys, S state, const std::vector<RuleInstance>& steps,
                    const rules::Context& ctx, InvariantDepth depth, ApplyFn&& apply,
                    Observe&& observe) {
  VerifyResult out;
  observe(0, state);
  for (std::size_t i = 0; i < steps.size(); ++i) {
    auto res = apply(state, steps[i]);
    if (!res.ok()) {
      out.failedStep = i;
      out.reason = (res.status == rules::StepStatus::uncertified ? "uncertified step: "
                                                                 : "rejected step: ") +
                   res.detail;
      return out;
    }
    orderings::InvariantReport inv = orderings::checkInvariants(sys, *res.state, ctx, depth);
    if (!inv.ok) {
      out.failedStep = i;
      out.reason = "invariant " + inv.violated;
      return out;
    }
    orderings::MeasureVerdict mv = orderings::measureVerdict(sys, state, *res.state, ctx);
    if (mv.status == orderings::MeasureStatus::violated) {
      out.failedStep = i;
      out.reason = "measure violation: " + mv.detail;
      return out;
    }
    state = std::move(*res.state);
    observe(i + 1, state);
    ++out.stepsVerified;
  }
  out.ok = true;
  out.finalOutcome = rules::classify(sys, state, ctx);
  return out;
}

} // namespace detail

/// Replay a trace from the initial state, certifying each step's guard, the
/// state invariants at the requested depth, and strict measure decrease for
/// the well-founded systems. Never aborts mid-file: the first offending
/// step is reported with its reason.
inline VerifyResult verifyTrace(const Formula& f0, const rules::SolverConfig& config,
                                const TraceFile& t,
                                InvariantDepth depth = InvariantDepth::structural,
                                const ReplayObservers& observers = {}) {
  VerifyResult out;
  if (t.header.formulaDigest != digest(f0)) {
    out.reason = "header: formula digest mismatch (trace was produced for a different "
                 "clause list)";
    return out;
  }
  rules::SolverConfig effective = config;
  if (effective.decisionVars.empty())
    effective.decisionVars = t.header.decisionVars;
  else if (effective.decisionVars != t.header.decisionVars) {
    out.reason = "header: decision-variable set disagrees with the caller's configuration";
    return out;
  }
  rules::Context ctx = rules::makeContext(f0, effective);

  System sys = t.header.system;
  switch (sys) {
  case System::dpll:
    return detail::replay(
        sys, rules::initialSearchState(f0), t.steps, ctx, depth,
        [&](const rules::SearchState& s, const RuleInstance& r) {
          return rules::applyDpll(s, r, ctx);
        },
        [&](std::size_t i, const rules::SearchState& s) {
          if (observers.searchState)
            observers.searchState(i, s);
        });
  case System::backjump:
    return detail::replay(
        sys, rules::initialSearchState(f0), t.steps, ctx, depth,
        [&](const rules::SearchState& s, const RuleInstance& r) {
          return rules::applyBackjump(s, r, ctx);
        },
        [&](std::size_t i, const rules::SearchState& s) {
          if (observers.searchState)
            observers.searchState(i, s);
        });
  case System::learn:
    return detail::replay(
        sys, rules::initialSearchState(f0), t.steps, ctx, depth,
        [&](const rules::SearchState& s, const RuleInstance& r) {
          return rules::applyLearning(s, r, ctx);
        },
        [&](std::size_t i, const rules::SearchState& s) {
          if (observers.searchState)
            observers.searchState(i, s);
        });
  case System::cdcl:
    return detail::replay(
        sys, rules::initialCdclState(f0), t.steps, ctx, depth,
        [&](const rules::CdclState& s, const RuleInstance& r) {
          return rules::applyCdcl(s, r, ctx);
        },
        [&](std::size_t i, const rules::CdclState& s) {
          if (observers.cdclState)
            observers.cdclState(i, s);
        });
  case System::cdclForget:
  case System::cdclRestart:
  case System::full:
    return detail::replay(
        sys, rules::initialFullState(), t.steps, ctx, depth,
        [&](const rules::FullState& s, const RuleInstance& r) {
          return rules::applyFive(s, r, ctx, sys);
        },
        [&](std::size_t i, const rules::FullState& s) {
          if (observers.fullState)
            observers.fullState(i, s);
        });
  }
  out.reason = "header: unknown system";
  return out;
}

// --- shipped fixtures -----------------------------------------------------------

/// A named formula/trace pair.
struct Fixture {
  std::string name;
  Formula f0;
  TraceFile trace;
};

namespace detail {

inline Formula exampleFormula() {
  return Formula{
      makeClause({-1, 2}),         makeClause({-1, -3, 5, 7}), makeClause({-1, -2, 5, -7}),
      makeClause({-2, 3}),         makeClause({2, 4}),         makeClause({-2, -5, 7}),
      makeClause({-3, -6, -7}),    makeClause({-5, 6}),
  };
}

inline Formula restartCycleFormula() {
  return Formula{
      makeClause({-1, -2, 3}), makeClause({-1, -2, 4}), makeClause({-1, -3, -4}),
      makeClause({-5, -6, 7}), makeClause({-5, -6, 8}), makeClause({-5, -7, -8}),
  };
}

inline TraceFile makeTrace(System sys, const Formula& f0, std::vector<RuleInstance> steps) {
  TraceFile t;
  t.header.system = sys;
  t.header.decisionVars = varsOf(f0);
  t.header.formulaDigest = digest(f0);
  t.steps = std::move(steps);
  return t;
}

} // namespace detail

/// The worked search-and-repair runs shipped with the library, one per
/// system flavour, plus the derivation that revisits a state of the full
/// system and thereby witnesses that unrestricted restarting and forgetting
/// admit cycles.
inline std::vector<Fixture> fixtures() {
  using rules::backjumpLearnStep;
  using rules::backjumpStep;
  using rules::backtrackStep;
  using rules::conflictStep;
  using rules::decideStep;
  using rules::explainStep;
  using rules::forgetStep;
  using rules::learnStep;
  using rules::propagateStep;
  using rules::restartStep;

  std::vector<Fixture> out;
  const Formula f0 = detail::exampleFormula();
  const Clause c12 = makeClause({-1, 2});
  const Clause c1357 = makeClause({-1, -3, 5, 7});
  const Clause c23 = makeClause({-2, 3});
  const Clause c257 = makeClause({-2, -5, 7});
  const Clause c367 = makeClause({-3, -6, -7});
  const Clause c56 = makeClause({-5, 6});
  const Clause learnt = makeClause({-2, -3, -5});
  const Literal p2(2), p3(3), p6(6), p7(7), n1(-1), n5(-5), n7(-7);

  out.push_back(Fixture{
      "dpll-example", f0,
      detail::makeTrace(
          System::dpll, f0,
          {decideStep(Literal(1)), propagateStep(c12, p2), propagateStep(c23, p3),
           decideStep(Literal(4)), decideStep(Literal(5)), propagateStep(c56, p6),
           propagateStep(c257, p7), backtrackStep(), propagateStep(c1357, p7),
           backtrackStep(), decideStep(Literal(5)), propagateStep(c56, p6),
           propagateStep(c257, p7), backtrackStep(), propagateStep(c1357, p7),
           backtrackStep(), decideStep(Literal(2)), propagateStep(c23, p3),
           decideStep(Literal(4)), decideStep(Literal(5)), propagateStep(c56, p6),
           propagateStep(c257, p7), backtrackStep(), decideStep(Literal(6)),
           propagateStep(c367, n7)})});

  out.push_back(Fixture{
      "backjump-example", f0,
      detail::makeTrace(
          System::backjump, f0,
          {decideStep(Literal(1)), propagateStep(c12, p2), propagateStep(c23, p3),
           decideStep(Literal(4)), decideStep(Literal(5)), propagateStep(c56, p6),
           propagateStep(c257, p7), backjumpStep(learnt, n5, 1), propagateStep(c1357, p7),
           backjumpStep(makeClause({-1}), n1, 0), decideStep(Literal(2)),
           propagateStep(c23, p3), decideStep(Literal(4)), decideStep(Literal(5)),
           propagateStep(c56, p6), propagateStep(c257, p7), backjumpStep(learnt, n5, 1),
           decideStep(Literal(4)), decideStep(Literal(6)), propagateStep(c367, n7)})});

  out.push_back(Fixture{
      "learn-example", f0,
      detail::makeTrace(
          System::learn, f0,
          {decideStep(Literal(1)), propagateStep(c12, p2), propagateStep(c23, p3),
           decideStep(Literal(4)), decideStep(Literal(5)), propagateStep(c56, p6),
           propagateStep(c257, p7), backjumpStep(learnt, n5, 1), learnStep(learnt),
           propagateStep(c1357, p7), backjumpStep(makeClause({-1}), n1, 0),
           decideStep(Literal(2)), propagateStep(c23, p3), propagateStep(learnt, n5),
           decideStep(Literal(4)), decideStep(Literal(6)), propagateStep(c367, n7)})});

  out.push_back(Fixture{
      "cdcl-example", f0,
      detail::makeTrace(
          System::cdcl, f0,
          {decideStep(Literal(1)), propagateStep(c12, p2), propagateStep(c23, p3),
           decideStep(Literal(4)), decideStep(Literal(5)), propagateStep(c56, p6),
           propagateStep(c257, p7), conflictStep(c367), explainStep(n7, c257),
           explainStep(Literal(-6), c56), learnStep(learnt), backjumpStep(learnt, n5, 1)})});

  const Formula fr = detail::restartCycleFormula();
  const Clause r123 = makeClause({-1, -2, 3});
  const Clause r124 = makeClause({-1, -2, 4});
  const Clause r134 = makeClause({-1, -3, -4});
  const Clause r567 = makeClause({-5, -6, 7});
  const Clause r568 = makeClause({-5, -6, 8});
  const Clause r578 = makeClause({-5, -7, -8});
  const Clause l12 = makeClause({-1, -2});
  const Clause l56 = makeClause({-5, -6});

  out.push_back(Fixture{
      "restart-cycle", fr,
      detail::makeTrace(
          System::full, fr,
          {decideStep(Literal(1)), decideStep(Literal(2)), propagateStep(r123, p3),
           propagateStep(r124, Literal(4)), conflictStep(r134),
           explainStep(Literal(-4), r124), explainStep(Literal(-3), r123),
           backjumpLearnStep(l12, Literal(-2), 1), restartStep(),
           decideStep(Literal(5)), decideStep(Literal(6)), propagateStep(r567, p7),
           propagateStep(r568, Literal(8)), conflictStep(r578),
           explainStep(Literal(-8), r568), explainStep(Literal(-7), r567),
           backjumpLearnStep(l56, Literal(-6), 1),
           forgetStep(std::vector<Clause>{l12, l56}), decideStep(Literal(1)),
           decideStep(Literal(2)), propagateStep(r123, p3),
           propagateStep(r124, Literal(4)), conflictStep(r134),
           explainStep(Literal(-4), r124), explainStep(Literal(-3), r123),
           backjumpLearnStep(l12, Literal(-2), 2), restartStep()})});

  return out;
}

inline Fixture fixture(const std::string& name) {
  for (Fixture& f : fixtures())
    if (f.name == name)
      return f;
  throw PreconditionError("unknown fixture " + name);
}

} // namespace satts::trace
