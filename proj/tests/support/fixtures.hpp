#pragma once

#include <fstream>
#include <sstream>

#include "ctkb/ctkb.hpp"

namespace ctkb::testing {

inline std::string kb_dir() { return CTKB_KB_DIR; }

inline std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::string shipped(const std::string& name) { return slurp(kb_dir() + "/" + name); }

inline const KnowledgeBase& cardiac() {
  static const KnowledgeBase kb = parse_kb(shipped("cardiac.ckb"), "cardiac.ckb");
  return kb;
}

inline const KnowledgeBase& cardiac_actions() {
  static const KnowledgeBase kb = parse_kb(shipped("cardiac_actions.ckb"), "cardiac_actions.ckb");
  return kb;
}

inline SessionInput heart_attack(const std::string& query = "rhythm(john,3,V)", Bounds b = {0, 3}) {
  return make_session_input(cardiac(), query, shipped("heart_attack.context"), shipped("heart_attack.evidence"), b);
}

inline SessionInput drowning(const std::string& query = "cd(john,4,V)", Bounds b = {0, 4}) {
  return make_session_input(cardiac(), query, shipped("drowning.context"), shipped("drowning.evidence"), b);
}

inline Object obj(const std::string& pred, std::vector<Symbol> args) { return {pred, std::move(args)}; }

inline Object rhythm(std::int64_t t) { return obj("rhythm", {std::string("john"), t}); }

// Two-node chain a -> b used throughout: P(a) = (0.3, 0.7),
// P(b=v1 | a=v1) = 0.6, P(b=v1 | a=v2) = 0.2.
inline const char* kChainKb = R"(
domain unit = {u}.
value a = {v1, v2}.
value b = {v1, v2}.
pred a(unit).
pred b(unit).
prob a(X,v1) = 0.3.
prob a(X,v2) = 0.7.
prob b(X,v1) | a(X,v1) = 0.6.
prob b(X,v2) | a(X,v1) = 0.4.
prob b(X,v1) | a(X,v2) = 0.2.
prob b(X,v2) | a(X,v2) = 0.8.
)";

inline SessionInput session_for(const KnowledgeBase& kb, const std::string& query, const std::string& context = "",
                                const std::string& evidence = "", Bounds b = {0, 0}) {
  return make_session_input(kb, query, context, evidence, b);
}

}  // namespace ctkb::testing
