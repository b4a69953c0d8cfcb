#pragma once

// DIMACS CNF reader/writer. Clauses are kept exactly as written: duplicate
// literals, duplicate clauses and tautologies all survive parsing.

#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "satts/core.hpp"

namespace satts::dimacs {

struct DimacsProblem {
  int declaredVars = 0;
  int declaredClauses = 0;
  Formula formula;
  std::vector<std::string> warnings;

  /// Default branching universe: declared variables plus any that actually
  /// occur in the clauses.
  std::set<int> defaultDecisionVars() const {
    std::set<int> vars = varsOf(formula);
    for (int v = 1; v <= declaredVars; ++v)
      vars.insert(v);
    return vars;
  }
};

/// Parse DIMACS CNF text. Comment lines start with 'c'; the problem line is
/// "p cnf VARS CLAUSES"; clauses are zero-terminated and may span lines.
/// Header/clause-count mismatches warn; in strict mode a literal whose
/// variable exceeds the declared count is an error instead of a warning.
inline DimacsProblem parseDimacs(const std::string& text, bool strict = false) {
  DimacsProblem p;
  std::istringstream in(text);
  std::string line;
  bool sawHeader = false;
  Clause current;
  bool inClause = false;
  std::size_t lineNo = 0;

  while (std::getline(in, line)) {
    ++lineNo;
    if (line.empty())
      continue;
    if (line[0] == 'c' || line[0] == 'C')
      continue;
    if (line[0] == 'p') {
      if (sawHeader)
        throw ParseError("line " + std::to_string(lineNo) + ": duplicate problem line");
      std::istringstream hs(line);
      std::string pTok, fmt;
      hs >> pTok >> fmt >> p.declaredVars >> p.declaredClauses;
      if (pTok != "p" || fmt != "cnf" || hs.fail() || p.declaredVars < 0 ||
          p.declaredClauses < 0)
        throw ParseError("line " + std::to_string(lineNo) + ": malformed problem line");
      sawHeader = true;
      continue;
    }
    if (!sawHeader)
      throw ParseError("line " + std::to_string(lineNo) +
                       ": clause data before the problem line (missing header)");
    std::istringstream ls(line);
    std::string tok;
    while (ls >> tok) {
      if (tok == "%")
        goto done; // some benchmark files end with "% 0"
      long value = 0;
      try {
        std::size_t used = 0;
        value = std::stol(tok, &used);
        if (used != tok.size())
          throw std::invalid_argument(tok);
      } catch (const std::exception&) {
        throw ParseError("line " + std::to_string(lineNo) + ": bad literal token '" + tok +
                         "'");
      }
      if (value == 0) {
        p.formula.push_back(current);
        current.clear();
        inClause = false;
        continue;
      }
      int var = static_cast<int>(value < 0 ? -value : value);
      if (var > p.declaredVars) {
        if (strict)
          throw ParseError("line " + std::to_string(lineNo) + ": variable " +
                           std::to_string(var) + " exceeds the declared count " +
                           std::to_string(p.declaredVars));
        p.warnings.push_back("variable " + std::to_string(var) +
                             " exceeds the declared count " +
                             std::to_string(p.declaredVars));
      }
      current.push_back(Literal(static_cast<int>(value)));
      inClause = true;
    }
  }
done:
  if (!sawHeader)
    throw ParseError("missing problem line");
  if (inClause)
    throw ParseError("unterminated final clause (missing trailing 0)");
  if (static_cast<int>(p.formula.size()) != p.declaredClauses)
    p.warnings.push_back("clause count " + std::to_string(p.formula.size()) +
                         " disagrees with the declared count " +
                         std::to_string(p.declaredClauses));
  return p;
}

inline DimacsProblem parseDimacsFile(const std::string& path, bool strict = false) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw Error("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parseDimacs(buf.str(), strict);
}

inline std::string printDimacs(const DimacsProblem& p) {
  std::ostringstream out;
  out << "p cnf " << p.declaredVars << " " << p.formula.size() << "\n";
  for (const Clause& c : p.formula) {
    for (Literal l : c)
      out << l.code() << " ";
    out << "0\n";
  }
  return out.str();
}

} // namespace satts::dimacs
