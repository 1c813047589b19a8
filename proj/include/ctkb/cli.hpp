#pragma once

// Command-line front end. run_cli() is the whole program; tools/ctkb.cpp
// only forwards argv and the standard streams.

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "ctkb/bench.hpp"
#include "ctkb/oracle.hpp"

namespace ctkb {

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int invalid = 1;  // parse, validation, bounds
inline constexpr int cycle = 2;
inline constexpr int not_allowed = 3;
inline constexpr int impossible_evidence = 4;
inline constexpr int enumeration_guard = 5;
inline constexpr int ill_formed = 6;  // quantification, consistency, combining
inline constexpr int other = 7;
}  // namespace exit_code

inline int exit_code_for(ErrorKind k) {
  switch (k) {
    case ErrorKind::Parse:
    case ErrorKind::Validation:
    case ErrorKind::Bounds: return exit_code::invalid;
    case ErrorKind::Cycle:
    case ErrorKind::DepthExceeded: return exit_code::cycle;
    case ErrorKind::NotAllowed: return exit_code::not_allowed;
    case ErrorKind::ImpossibleEvidence: return exit_code::impossible_evidence;
    case ErrorKind::EnumerationGuard: return exit_code::enumeration_guard;
    case ErrorKind::Quantification:
    case ErrorKind::Consistency:
    case ErrorKind::Combine: return exit_code::ill_formed;
    default: return exit_code::other;
  }
}

struct RunConfig {
  std::string kb_path;
  std::string context_path;
  std::string evidence_path;
  std::string plan_path;
  std::string action_kb_path;
  std::string output_path;
  std::string query_text;
  std::optional<std::int64_t> from;
  std::optional<std::int64_t> to;
  std::string format = "table";
  std::uint64_t seed = 1;
  std::size_t samples = 0;

  bool json() const { return format == "json"; }
};

namespace detail {

using ojson = nlohmann::ordered_json;

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Validation, "cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline ojson symbol_json(const Term& t) {
  if (t.kind == Term::Kind::Integer) return t.offset;
  return t.name;
}

inline ojson bindings_json(const Substitution& s) {
  ojson out = ojson::object();
  for (const auto& [k, v] : s.bindings) out[k] = symbol_json(v);
  return out;
}

inline std::string bindings_text(const Substitution& s) {
  if (s.bindings.empty()) return "{}";
  return to_string(s);
}

inline ojson instance_json(const InstanceAnswer& a) {
  ojson out;
  out["bindings"] = bindings_json(a.bindings);
  out["object"] = to_string(a.posterior.query_object);
  out["values"] = a.posterior.values;
  out["posterior"] = a.posterior.probabilities;
  return out;
}

inline ojson diagnostics_json(const Error& e) {
  ojson out;
  out["ok"] = false;
  out["kind"] = to_string(e.kind());
  out["exit"] = exit_code_for(e.kind());
  out["message"] = e.what();
  out["diagnostics"] = ojson::array();
  for (const auto& d : e.diagnostics())
    out["diagnostics"].push_back({{"file", d.file},
                                  {"line", d.loc.line},
                                  {"col", d.loc.col},
                                  {"severity", to_string(d.severity)},
                                  {"message", d.message}});
  return out;
}

// Inputs of one session as read from disk. Missing `to` defaults to the
// latest time point mentioned by the query, evidence or context.
struct LoadedSession {
  KnowledgeBase kb;
  SessionInput input;
};

inline std::int64_t latest_time(const KnowledgeBase& kb, const std::vector<Atom>& atoms) {
  std::int64_t t = 0;
  for (const auto& a : atoms)
    if (auto ct = constant_time(kb, a)) t = std::max(t, *ct);
  return t;
}

inline SessionInput load_session(const KnowledgeBase& kb, const RunConfig& cfg) {
  SessionInput in;
  if (cfg.query_text.empty()) throw Error(ErrorKind::Validation, "--query is required");
  in.query = parse_atom(kb, cfg.query_text, PredKind::Probabilistic, in.query_file);
  for (const auto* path : {&cfg.context_path, &cfg.plan_path}) {
    if (path->empty()) continue;
    in.context_file = *path;
    auto facts = parse_facts(kb, read_file(*path), PredKind::Context, *path);
    in.context.insert(in.context.end(), facts.begin(), facts.end());
  }
  if (!cfg.evidence_path.empty()) {
    in.evidence_file = cfg.evidence_path;
    in.evidence = parse_facts(kb, read_file(cfg.evidence_path), PredKind::Probabilistic, cfg.evidence_path);
  }
  std::vector<Atom> all = in.context;
  all.insert(all.end(), in.evidence.begin(), in.evidence.end());
  all.push_back(in.query);
  in.bounds.from = cfg.from.value_or(0);
  in.bounds.to = cfg.to.value_or(std::max(latest_time(kb, all), in.bounds.from));
  return in;
}

inline KnowledgeBase load_kb(const std::string& path) { return parse_kb(read_file(path), path); }

inline void print_answer_table(std::ostream& out, const Atom& query, const Bounds& b,
                               const std::vector<InstanceAnswer>& instances) {
  out << "query: " << to_string(query) << "\n";
  out << "bounds: [" << b.from << ", " << b.to << "]\n";
  if (instances.empty()) {
    out << "no answer: no instance of the query has a supporting network\n";
    return;
  }
  out << "instance";
  for (const auto& v : instances.front().posterior.values) out << '\t' << v;
  out << '\n';
  for (const auto& a : instances) {
    out << bindings_text(a.bindings);
    for (double p : a.posterior.probabilities) out << '\t' << format_number(p);
    out << '\n';
  }
}

inline ojson answer_json(const Atom& query, const Bounds& b, const std::vector<InstanceAnswer>& instances) {
  ojson out;
  out["query"] = to_string(query);
  out["bounds"] = {{"from", b.from}, {"to", b.to}};
  out["instances"] = ojson::array();
  for (const auto& a : instances) out["instances"].push_back(instance_json(a));
  return out;
}

inline int cmd_check(const RunConfig& cfg, std::ostream& out) {
  auto kb = load_kb(cfg.kb_path);
  SessionInput in;
  if (!cfg.context_path.empty())
    in.context = parse_facts(kb, read_file(cfg.context_path), PredKind::Context, cfg.context_path);
  if (!cfg.evidence_path.empty())
    in.evidence = parse_facts(kb, read_file(cfg.evidence_path), PredKind::Probabilistic, cfg.evidence_path);
  std::vector<Atom> all = in.context;
  all.insert(all.end(), in.evidence.begin(), in.evidence.end());
  in.bounds.from = cfg.from.value_or(0);
  // Wide enough that every sentence grounds with all its time offsets inside.
  std::int64_t span = 0;
  for (const auto& s : kb.pb)
    for (const auto& [_, r] : sentence_offsets(kb, s)) span = std::max(span, r.second - r.first);
  in.bounds.to = cfg.to.value_or(std::max(latest_time(kb, all), in.bounds.from + span));
  require_static_checks(kb, in.bounds);

  // The relevance pipeline needs a query-shaped session; any p-predicate works.
  Session session;
  session.bounds = in.bounds;
  if (!in.context.empty() || !in.evidence.empty()) {
    const PredicateDecl* p = nullptr;
    for (const auto& d : kb.predicates)
      if (d.probabilistic()) p = &d;
    if (p) {
      in.query.pred = p->name;
      for (std::size_t i = 0; i <= p->args.size(); ++i)
        in.query.args.push_back(Term::variable("Q" + std::to_string(i)));
      if (auto tp = p->time_position()) in.query.args[*tp] = Term::integer(in.bounds.from);
      session = validate_session(kb, in);
    }
  }
  auto rb = build_relevant_base(kb, session);
  // Consistency covers every instance in the window, relevant or not.
  auto whole = combine_rpb(kb, rb.discharged.sentences);
  auto cons = check_consistency(whole);
  if (!cons.cycle.empty())
    throw Error(ErrorKind::Cycle, "influenced-by cycle: " + describe_cycle(cons.cycle));
  if (!cons.row_sums.empty()) throw Error(ErrorKind::Consistency, describe(cons.row_sums.front()));
  require_well_formed(rb.crpb, rb.ras);

  std::size_t cpreds = 0;
  for (const auto& d : kb.predicates) cpreds += d.probabilistic() ? 0 : 1;
  if (cfg.json()) {
    ojson j;
    j["ok"] = true;
    j["kb"] = cfg.kb_path;
    j["bounds"] = {{"from", in.bounds.from}, {"to", in.bounds.to}};
    j["p_predicates"] = kb.predicates.size() - cpreds;
    j["c_predicates"] = cpreds;
    j["sentences"] = kb.pb.size();
    j["clauses"] = kb.cb.size();
    j["relevant_objects"] = rb.ras.objects.size();
    j["diagnostics"] = ojson::array();
    out << j.dump(2) << '\n';
  } else {
    out << "ok: " << cfg.kb_path << ": " << kb.predicates.size() - cpreds << " p-predicates, " << cpreds
        << " c-predicates, " << kb.pb.size() << " sentences, " << kb.cb.size() << " clauses; "
        << rb.ras.objects.size() << " relevant objects over [" << in.bounds.from << ", " << in.bounds.to
        << "]\n";
  }
  return exit_code::ok;
}

inline int cmd_query(const RunConfig& cfg, std::ostream& out) {
  auto kb = load_kb(cfg.kb_path);
  auto in = load_session(kb, cfg);
  auto answer = answer_query(kb, in);
  if (cfg.json())
    out << answer_json(answer.query, answer.bounds, answer.instances).dump(2) << '\n';
  else
    print_answer_table(out, answer.query, answer.bounds, answer.instances);
  return exit_code::ok;
}

inline int cmd_project(const RunConfig& cfg, std::ostream& out) {
  if (cfg.plan_path.empty()) throw Error(ErrorKind::Validation, "--plan is required");
  auto kb = load_kb(cfg.kb_path);
  auto in = load_session(kb, cfg);
  const auto* decl = kb.predicate(in.query.pred);
  auto tp = decl ? decl->time_position() : std::nullopt;
  if (!tp || !in.query.args[*tp].is_variable() || in.query.args[*tp].offset != 0)
    throw Error(ErrorKind::Validation, "projection needs a query with a variable time argument");
  std::string tvar = in.query.args[*tp].name;
  auto answer = answer_query(kb, in);

  std::map<std::int64_t, std::vector<const InstanceAnswer*>> steps;
  for (std::int64_t t = answer.bounds.from; t <= answer.bounds.to; ++t) steps[t];
  for (const auto& a : answer.instances) steps[*time_of(kb, a.posterior.query_object)].push_back(&a);

  if (cfg.json()) {
    ojson j;
    j["query"] = to_string(answer.query);
    j["bounds"] = {{"from", answer.bounds.from}, {"to", answer.bounds.to}};
    j["plan"] = ojson::array();
    for (const auto& c : in.context) j["plan"].push_back(to_string(c));
    j["steps"] = ojson::array();
    for (const auto& [t, rows] : steps) {
      ojson step{{"t", t}, {"instances", ojson::array()}};
      for (const auto* a : rows) step["instances"].push_back(instance_json(*a));
      j["steps"].push_back(std::move(step));
    }
    out << j.dump(2) << '\n';
    return exit_code::ok;
  }
  out << "query: " << to_string(answer.query) << "\n";
  out << "bounds: [" << answer.bounds.from << ", " << answer.bounds.to << "]\n";
  if (answer.instances.empty()) {
    out << "no answer: no instance of the query has a supporting network\n";
    return exit_code::ok;
  }
  out << tvar << "\tinstance";
  for (const auto& v : answer.instances.front().posterior.values) out << '\t' << v;
  out << '\n';
  for (const auto& [t, rows] : steps) {
    if (rows.empty()) out << t << "\t-\tno answer\n";
    for (const auto* a : rows) {
      Substitution rest = a->bindings;
      rest.bindings.erase(tvar);
      out << t << '\t' << bindings_text(rest);
      for (double p : a->posterior.probabilities) out << '\t' << format_number(p);
      out << '\n';
    }
  }
  return exit_code::ok;
}

inline int cmd_export_dot(const RunConfig& cfg, std::ostream& out) {
  auto kb = load_kb(cfg.kb_path);
  auto in = load_session(kb, cfg);
  require_static_checks(kb, in.bounds);
  auto built = build_net(kb, validate_session(kb, in));
  auto dot = export_dot(kb, built.net);
  if (cfg.output_path.empty()) {
    out << dot;
  } else {
    std::ofstream f(cfg.output_path, std::ios::binary);
    if (!f) throw Error(ErrorKind::Validation, "cannot write '" + cfg.output_path + "'");
    f << dot;
  }
  return exit_code::ok;
}

inline int cmd_oracle_diff(const RunConfig& cfg, std::ostream& out) {
  auto kb = load_kb(cfg.kb_path);
  auto in = load_session(kb, cfg);
  auto answer = answer_query(kb, in);
  auto reference = reference_answer(kb, in);

  double worst = 0;
  bool same_instances = answer.instances.size() == reference.instances.size();
  ojson rows = ojson::array();
  for (std::size_t i = 0; same_instances && i < answer.instances.size(); ++i) {
    const auto& a = answer.instances[i].posterior;
    const auto& r = reference.instances[i].posterior;
    if (a.query_object != r.query_object) {
      same_instances = false;
      break;
    }
    double d = max_deviation(a, r);
    worst = std::max(worst, d);
    rows.push_back({{"object", to_string(a.query_object)},
                    {"network", a.probabilities},
                    {"oracle", r.probabilities},
                    {"max_deviation", d}});
  }
  if (!same_instances) worst = std::numeric_limits<double>::infinity();

  std::optional<double> sampled;
  std::size_t accepted = 0;
  if (cfg.samples > 0 && !answer.instances.empty()) {
    std::vector<std::size_t> targets;
    for (const auto& a : answer.instances) targets.push_back(*answer.net.index_of(a.posterior.query_object));
    auto evidence = net_evidence(answer.net, validate_session(kb, in).evidence);
    auto s = forward_sample(answer.net, cfg.samples, cfg.seed, evidence, targets);
    accepted = s.accepted;
    double d = 0;
    for (std::size_t i = 0; i < targets.size(); ++i)
      d = std::max(d, max_deviation(s.posteriors[i], answer.instances[i].posterior));
    sampled = d;
  }

  bool pass = worst <= kSumTolerance;
  if (cfg.json()) {
    ojson j;
    j["query"] = to_string(answer.query);
    j["bounds"] = {{"from", answer.bounds.from}, {"to", answer.bounds.to}};
    j["models"] = reference.joint.models.size();
    j["same_instances"] = same_instances;
    if (same_instances) j["max_deviation"] = worst;
    else j["max_deviation"] = nullptr;
    j["tolerance"] = kSumTolerance;
    j["instances"] = rows;
    if (sampled) j["sampling"] = {{"seed", cfg.seed}, {"samples", cfg.samples}, {"accepted", accepted},
                                  {"max_deviation", *sampled}};
    j["ok"] = pass;
    out << j.dump(2) << '\n';
  } else {
    out << "query: " << to_string(answer.query) << "\n";
    out << "possible models: " << reference.joint.models.size() << "\n";
    if (!same_instances) out << "instance sets differ\n";
    for (const auto& r : rows)
      out << r["object"].get<std::string>() << "\t" << format_number(r["max_deviation"].get<double>()) << "\n";
    if (sampled)
      out << "sampling: " << accepted << " of " << cfg.samples << " accepted (seed " << cfg.seed
          << "), max |delta| = " << format_number(*sampled) << "\n";
    out << "max |delta| = " << (same_instances ? format_number(worst) : std::string("inf")) << "\n";
  }
  return pass ? exit_code::ok : exit_code::other;
}

inline int cmd_bench(const RunConfig& cfg, std::ostream& out) {
  if (cfg.action_kb_path.empty()) throw Error(ErrorKind::Validation, "--action-kb is required");
  auto ckb = load_kb(cfg.kb_path);
  auto akb = load_kb(cfg.action_kb_path);
  auto cin = load_session(ckb, cfg);
  auto ain = load_session(akb, cfg);
  // Both sides share the bounds derived from the context-indexed KB.
  ain.bounds = cin.bounds;
  auto cmp = compare_encodings(ckb, cin, akb, ain);
  if (cfg.json()) {
    ojson j;
    j["query"] = to_string(cin.query);
    j["bounds"] = {{"from", cin.bounds.from}, {"to", cin.bounds.to}};
    j["encodings"] = ojson::array();
    for (const auto* m : {&cmp.context, &cmp.action}) {
      ojson steps = ojson::object();
      for (const auto& [t, n] : m->step_entries) steps[std::to_string(t)] = n;
      j["encodings"].push_back({{"encoding", m->encoding},
                                {"nodes", m->nodes},
                                {"cpt_entries", m->cpt_entries},
                                {"build_ms", m->build_ms},
                                {"infer_ms", m->infer_ms},
                                {"step_entries", steps}});
    }
    j["max_deviation"] = cmp.max_deviation;
    out << j.dump(2) << '\n';
  } else {
    out << metrics_csv({cmp.context, cmp.action});
  }
  return exit_code::ok;
}

}  // namespace detail

/// Runs one command line (args[0] is the program name) and returns the exit
/// code. Results go to `out`; diagnostics to `err`, or to `out` as json.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out = std::cout,
                   std::ostream& err = std::cerr) {
  CLI::App app{"context-indexed temporal Bayesian knowledge bases", "ctkb"};
  app.require_subcommand(1);
  RunConfig cfg;

  auto add_common = [&](CLI::App* sub, bool session) {
    sub->add_option("kb", cfg.kb_path, "knowledge base file")->required();
    sub->add_option("--from", cfg.from, "first time point");
    sub->add_option("--to", cfg.to, "last time point");
    sub->add_option("--format", cfg.format, "output format")->check(CLI::IsMember({"table", "json"}));
    sub->add_option("--context", cfg.context_path, "context facts file");
    sub->add_option("--evidence", cfg.evidence_path, "evidence file");
    if (session) sub->add_option("--query", cfg.query_text, "query atom, value argument a variable")->required();
  };
  auto* check = app.add_subcommand("check", "parse and validate a knowledge base");
  add_common(check, false);
  auto* query = app.add_subcommand("query", "posterior of every instance of a query");
  add_common(query, true);
  query->add_option("--plan", cfg.plan_path, "plan file (timed context facts)");
  auto* project = app.add_subcommand("project", "per-time-point posteriors under a plan");
  add_common(project, true);
  project->add_option("--plan", cfg.plan_path, "plan file (timed context facts)")->required();
  auto* dot = app.add_subcommand("export-dot", "write the supporting network as a graph");
  add_common(dot, true);
  dot->add_option("--plan", cfg.plan_path, "plan file (timed context facts)");
  dot->add_option("--output,-o", cfg.output_path, "output file (default stdout)");
  auto* diff = app.add_subcommand("oracle-diff", "compare against possible-model enumeration");
  add_common(diff, true);
  diff->add_option("--plan", cfg.plan_path, "plan file (timed context facts)");
  diff->add_option("--seed", cfg.seed, "sampler seed");
  diff->add_option("--samples", cfg.samples, "forward samples to draw (0 = none)");
  auto* bench = app.add_subcommand("bench", "compare context and action-node encodings");
  add_common(bench, true);
  bench->add_option("--action-kb", cfg.action_kb_path, "action-node encoding of the same process")->required();
  bench->add_option("--plan", cfg.plan_path, "plan file (timed context facts)");

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? exit_code::ok : exit_code::invalid;
  }

  try {
    if (*check) return detail::cmd_check(cfg, out);
    if (*query) return detail::cmd_query(cfg, out);
    if (*project) return detail::cmd_project(cfg, out);
    if (*dot) return detail::cmd_export_dot(cfg, out);
    if (*diff) return detail::cmd_oracle_diff(cfg, out);
    if (*bench) return detail::cmd_bench(cfg, out);
  } catch (const Error& e) {
    if (cfg.json()) out << detail::diagnostics_json(e).dump(2) << '\n';
    else err << e.report() << '\n';
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return exit_code::other;
  }
  return exit_code::other;
}

}  // namespace ctkb
