#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <json.hpp>

#include "ctkb/cli.hpp"
#include "support/fixtures.hpp"

using namespace ctkb;
using namespace ctkb::testing;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "ctkb");
  std::ostringstream out, err;
  int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string kb(const std::string& name) { return kb_dir() + "/" + name; }

class TempDir {
 public:
  TempDir() {
    static int n = 0;
    path_ = fs::temp_directory_path() / ("ctkb-cli-" + std::to_string(::getpid()) + "-" + std::to_string(n++));
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  std::string write(const std::string& name, const std::string& text) const {
    auto p = path_ / name;
    std::ofstream(p, std::ios::binary) << text;
    return p.string();
  }
  std::string path(const std::string& name) const { return (path_ / name).string(); }

 private:
  fs::path path_;
};

std::vector<std::string> heart_attack_args(const std::string& cmd) {
  return {cmd, kb("cardiac.ckb"), "--query", "rhythm(john,3,V)", "--context", kb("heart_attack.context"),
          "--evidence", kb("heart_attack.evidence")};
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

std::vector<std::string> split_tabs(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string f; std::getline(in, f, '\t');) out.push_back(f);
  return out;
}

}  // namespace

TEST(Cli, ExitCodeTable) {
  EXPECT_EQ(exit_code_for(ErrorKind::Parse), 1);
  EXPECT_EQ(exit_code_for(ErrorKind::Validation), 1);
  EXPECT_EQ(exit_code_for(ErrorKind::Bounds), 1);
  EXPECT_EQ(exit_code_for(ErrorKind::Cycle), 2);
  EXPECT_EQ(exit_code_for(ErrorKind::DepthExceeded), 2);
  EXPECT_EQ(exit_code_for(ErrorKind::NotAllowed), 3);
  EXPECT_EQ(exit_code_for(ErrorKind::ImpossibleEvidence), 4);
  EXPECT_EQ(exit_code_for(ErrorKind::EnumerationGuard), 5);
  EXPECT_EQ(exit_code_for(ErrorKind::Quantification), 6);
  EXPECT_EQ(exit_code_for(ErrorKind::Consistency), 6);
  EXPECT_EQ(exit_code_for(ErrorKind::Combine), 6);
  EXPECT_EQ(exit_code_for(ErrorKind::Sampling), 7);
  EXPECT_EQ(exit_code_for(ErrorKind::EncodingMismatch), 7);
}

TEST(Cli, CheckShippedKbs) {
  for (auto name : {"cardiac.ckb", "cardiac_actions.ckb", "paint_context.ckb", "paint_action.ckb"}) {
    auto r = run({"check", kb(name)});
    EXPECT_EQ(r.code, 0) << name << "\n" << r.err;
    EXPECT_EQ(r.out.rfind("ok: ", 0), 0u);
  }
  auto r = run({"check", kb("cardiac.ckb"), "--context", kb("drowning.context"), "--evidence", kb("drowning.evidence")});
  EXPECT_EQ(r.code, 0) << r.err;
}

TEST(Cli, CheckRejectsRowSummingAbove1) {
  TempDir d;
  auto f = d.write("bad.ckb", R"(domain unit = {u}.
value a = {no, yes}.
value b = {no, yes}.
pred a(unit, time).
pred b(unit, time).
prob a(X,0,no) = 0.5.
prob a(X,0,yes) = 0.5.
prob b(X,T,no) | a(X,T,no) = 0.7.
prob b(X,T,yes) | a(X,T,no) = 0.5.
prob b(X,T,no) | a(X,T,yes) = 0.5.
prob b(X,T,yes) | a(X,T,yes) = 0.5.
prob a(X,T,no) | a(X,T-1,no) = 0.5.
prob a(X,T,yes) | a(X,T-1,no) = 0.5.
prob a(X,T,no) | a(X,T-1,yes) = 0.5.
prob a(X,T,yes) | a(X,T-1,yes) = 0.5.
)");
  auto r = run({"check", f});
  EXPECT_EQ(r.code, 6);
  EXPECT_NE(r.err.find("sum to 1.2"), std::string::npos) << r.err;
}

TEST(Cli, CheckRejectsTransitionRowSum) {
  TempDir d;
  auto f = d.write("bad.ckb", R"(domain unit = {u}.
value a = {no, yes}.
pred a(unit, time).
prob a(X,0,no) = 0.5.
prob a(X,0,yes) = 0.5.
prob a(X,T,no) | a(X,T-1,no) = 0.6.
prob a(X,T,yes) | a(X,T-1,no) = 0.6.
prob a(X,T,no) | a(X,T-1,yes) = 0.5.
prob a(X,T,yes) | a(X,T-1,yes) = 0.5.
)");
  auto r = run({"check", f});
  EXPECT_EQ(r.code, 6) << r.out << r.err;
}

TEST(Cli, CheckRejectsSelfInfluence) {
  TempDir d;
  auto f = d.write("cyc.ckb", R"(domain unit = {u}.
value a = {no, yes}.
pred a(unit).
prob a(X,no) | a(X,yes) = 0.5.
prob a(X,yes) | a(X,yes) = 0.5.
prob a(X,no) | a(X,no) = 0.5.
prob a(X,yes) | a(X,no) = 0.5.
)");
  auto r = run({"check", f});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("a(u) -> a(u)"), std::string::npos) << r.err;
}

TEST(Cli, MutualRecursionInContextRules) {
  TempDir d;
  auto f = d.write("rec.ckb", R"(domain unit = {u}.
value a = {no, yes}.
pred a(unit).
cpred p(unit).
cpred q(unit).
ctx p(X) <- not q(X).
ctx q(X) <- not p(X).
prob a(X,no) = 0.5.
prob a(X,yes) = 0.5.
)");
  auto r = run({"check", f});
  EXPECT_EQ(r.code, 2) << r.err;
  EXPECT_NE(r.err.find("cyclic"), std::string::npos) << r.err;
}

TEST(Cli, NotAllowed) {
  TempDir d;
  auto f = d.write("na.ckb", R"(domain unit = {u, w}.
value a = {no, yes}.
pred a(unit).
cpred p(unit).
cpred q(unit, unit).
ctx p(X) <- not q(X, Y).
prob a(X,no) = 0.5.
prob a(X,yes) = 0.5.
)");
  auto r = run({"check", f});
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("'Y'"), std::string::npos) << r.err;
}

TEST(Cli, MalformedFileReportsLocation) {
  TempDir d;
  auto f = d.write("broken.ckb", "domain unit = {u}.\nvalue a = {no, yes}.\npred a(unit.\n");
  auto r = run({"check", f});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find(f + ":3:"), std::string::npos) << r.err;
}

TEST(Cli, MissingFile) {
  auto r = run({"check", "/nonexistent/kb.ckb"});
  EXPECT_EQ(r.code, 1);
}

TEST(Cli, UnknownSubcommandIsAUsageError) {
  EXPECT_EQ(run({"frobnicate"}).code, 1);
  EXPECT_EQ(run({"query", kb("cardiac.ckb")}).code, 1);  // --query missing
}

TEST(Cli, QueryTable) {
  auto r = run(heart_attack_args("query"));
  ASSERT_EQ(r.code, 0) << r.err;
  auto ls = lines(r.out);
  ASSERT_EQ(ls.size(), 4u);
  EXPECT_EQ(ls[0], "query: rhythm(john, 3, V)");
  EXPECT_EQ(ls[1], "bounds: [0, 3]");
  EXPECT_EQ(ls[2], "instance\tnsr\tvf\tvt\taf\tsvt\tb\ta");
  EXPECT_EQ(split_tabs(ls[3]).size(), 8u);
}

TEST(Cli, TableAndJsonCarryTheSameNumbers) {
  auto table = run(heart_attack_args("query"));
  auto args = heart_attack_args("query");
  args.insert(args.end(), {"--format", "json"});
  auto js = run(args);
  ASSERT_EQ(js.code, 0);
  auto j = nlohmann::json::parse(js.out);
  EXPECT_EQ(j["query"], "rhythm(john, 3, V)");
  EXPECT_EQ(j["bounds"]["from"], 0);
  EXPECT_EQ(j["bounds"]["to"], 3);
  ASSERT_EQ(j["instances"].size(), 1u);
  auto fields = split_tabs(lines(table.out)[3]);
  auto post = j["instances"][0]["posterior"];
  std::vector<double> from_json;
  if (post.is_object()) {
    for (auto v : {"nsr", "vf", "vt", "af", "svt", "b", "a"}) from_json.push_back(post[v].get<double>());
  } else {
    for (const auto& x : post) from_json.push_back(x.get<double>());
  }
  ASSERT_EQ(from_json.size(), 7u);
  for (std::size_t i = 0; i < 7; ++i) EXPECT_EQ(std::stod(fields[i + 1]), from_json[i]);
  // Round trip through the library answer.
  auto a = answer_query(cardiac(), heart_attack());
  EXPECT_EQ(a.instances[0].posterior.probabilities, from_json);
}

TEST(Cli, UnboundPersonGivesTwoRows) {
  auto r = run({"query", kb("cardiac.ckb"), "--query", "rhythm(P,0,V)"});
  ASSERT_EQ(r.code, 0) << r.err;
  auto ls = lines(r.out);
  ASSERT_EQ(ls.size(), 5u);
  EXPECT_NE(ls[3].find("john"), std::string::npos);
  EXPECT_NE(ls[4].find("mary"), std::string::npos);
}

TEST(Cli, UnansweredQuery) {
  TempDir d;
  auto f = d.write("u.ckb", R"(domain unit = {u}.
value a = {v1, v2}.
value b = {v1, v2}.
pred a(unit).
pred b(unit).
prob b(X,v1) | a(X,v1) = 0.6.
prob b(X,v2) | a(X,v1) = 0.4.
prob b(X,v1) | a(X,v2) = 0.2.
prob b(X,v2) | a(X,v2) = 0.8.
)");
  auto r = run({"query", f, "--query", "b(u,V)"});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("no answer"), std::string::npos);
}

TEST(Cli, ImpossibleEvidence) {
  TempDir d;
  auto ev = d.write("e.evidence", "rhythm(john, 0, vf).\ncbf(john, 0, present).\n");
  auto r = run({"query", kb("cardiac.ckb"), "--query", "rhythm(john,0,V)", "--evidence", ev});
  EXPECT_EQ(r.code, 4);
}

TEST(Cli, BoundsErrors) {
  auto late = run({"query", kb("cardiac.ckb"), "--query", "rhythm(john,5,V)", "--to", "3"});
  EXPECT_EQ(late.code, 1);
  auto args = heart_attack_args("query");
  args.insert(args.end(), {"--from", "1"});
  EXPECT_EQ(run(args).code, 1);
  auto cut = run({"query", kb("cardiac.ckb"), "--query", "rhythm(john,3,V)", "--from", "2", "--to", "3"});
  EXPECT_EQ(cut.code, 1);
  EXPECT_NE(cut.err.find("rhythm(john,1)"), std::string::npos) << cut.err;
}

TEST(Cli, JsonErrorsGoToStdout) {
  TempDir d;
  auto ev = d.write("e.evidence", "rhythm(john, 0, vf).\ncbf(john, 0, present).\n");
  auto r = run({"query", kb("cardiac.ckb"), "--query", "rhythm(john,0,V)", "--evidence", ev, "--format", "json"});
  EXPECT_EQ(r.code, 4);
  auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["ok"], false);
  EXPECT_EQ(j["kind"], "impossible-evidence");
  EXPECT_EQ(j["exit"], 4);
}

TEST(Cli, ProjectPaint) {
  auto r = run({"project", kb("paint_context.ckb"), "--query", "painted(x,T,V)", "--plan", kb("paint.plan"),
                "--to", "3"});
  ASSERT_EQ(r.code, 0) << r.err;
  auto ls = lines(r.out);
  ASSERT_EQ(ls.size(), 7u);
  EXPECT_EQ(ls[2], "T\tinstance\tyes\tno");
  for (int t = 0; t <= 3; ++t) EXPECT_EQ(ls[3 + t].rfind(std::to_string(t) + "\t", 0), 0u);
  EXPECT_NE(ls[3].find("0.2"), std::string::npos);

  auto js = run({"project", kb("paint_context.ckb"), "--query", "painted(x,T,V)", "--plan", kb("paint.plan"), "--to",
                 "3", "--format", "json"});
  auto j = nlohmann::json::parse(js.out);
  EXPECT_EQ(j["steps"].size(), 4u);
  EXPECT_EQ(j["plan"].size(), 2u);
}

TEST(Cli, ProjectCardiacPlan) {
  auto r = run({"project", kb("cardiac.ckb"), "--query", "rhythm(john,T,V)", "--plan", kb("heart_attack.context"),
                "--evidence", kb("heart_attack.evidence"), "--to", "3", "--format", "json"});
  ASSERT_EQ(r.code, 0) << r.err;
  auto j = nlohmann::json::parse(r.out);
  ASSERT_EQ(j["steps"].size(), 4u);
  for (const auto& step : j["steps"]) {
    ASSERT_EQ(step["instances"].size(), 1u);
    double sum = 0;
    for (const auto& [_, p] : step["instances"][0]["posterior"].items()) sum += p.get<double>();
    EXPECT_NEAR(sum, 1.0, 1e-9);
  }
}

TEST(Cli, ProjectEmptyPlan) {
  TempDir d;
  auto plan = d.write("empty.plan", "");
  auto r = run({"project", kb("paint_context.ckb"), "--query", "painted(x,T,V)", "--plan", plan, "--to", "2"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(lines(r.out).size(), 6u);
}

TEST(Cli, ProjectPlanOutsideBounds) {
  auto r = run({"project", kb("paint_context.ckb"), "--query", "painted(x,T,V)", "--plan", kb("paint.plan"), "--to",
                "1"});
  EXPECT_EQ(r.code, 1);
}

TEST(Cli, ProjectNeedsTimeVariable) {
  auto r = run({"project", kb("paint_context.ckb"), "--query", "painted(x,1,V)", "--plan", kb("paint.plan")});
  EXPECT_EQ(r.code, 1);
}

TEST(Cli, ExportDot) {
  auto r = run(heart_attack_args("export-dot"));
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(r.out.rfind("digraph bayesnet {", 0), 0u);
  EXPECT_EQ(r.out, export_dot(cardiac(), answer_query(cardiac(), heart_attack()).net));
  TempDir d;
  auto args = heart_attack_args("export-dot");
  args.insert(args.end(), {"--output", d.path("net.dot")});
  ASSERT_EQ(run(args).code, 0);
  EXPECT_EQ(slurp(d.path("net.dot")), r.out);
}

TEST(Cli, OracleDiff) {
  auto args = heart_attack_args("oracle-diff");
  args.insert(args.end(), {"--samples", "20000", "--seed", "5", "--format", "json"});
  auto r = run(args);
  ASSERT_EQ(r.code, 0) << r.out << r.err;
  auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["ok"], true);
  EXPECT_EQ(j["models"], 2401);
  EXPECT_LE(j["max_deviation"].get<double>(), 1e-9);
  EXPECT_EQ(j["sampling"]["samples"], 20000);
}

TEST(Cli, EnumerationGuard) {
  TempDir d;
  std::string text = "domain item = {";
  for (int i = 0; i < 12; ++i) text += (i ? ", i" : "i") + std::to_string(i);
  text += "}.\nvalue a = {v1, v2, v3, v4}.\npred a(item).\n";
  for (int v = 1; v <= 4; ++v) text += "prob a(X,v" + std::to_string(v) + ") = 0.25.\n";
  auto f = d.write("huge.ckb", text);
  EXPECT_EQ(run({"query", f, "--query", "a(I,V)"}).code, 0);
  EXPECT_EQ(run({"oracle-diff", f, "--query", "a(I,V)"}).code, 5);
}

TEST(Cli, BenchCsvAndJson) {
  std::vector<std::string> args{"bench", kb("paint_context.ckb"), "--action-kb", kb("paint_action.ckb"),
                                "--query", "painted(x,T,V)", "--plan", kb("paint.plan"), "--to", "3"};
  auto r = run(args);
  ASSERT_EQ(r.code, 0) << r.err;
  auto ls = lines(r.out);
  ASSERT_EQ(ls.size(), 3u);
  EXPECT_EQ(ls[0], "encoding,nodes,cpt_entries,build_ms,infer_ms");
  EXPECT_EQ(ls[1].rfind("context,4,14,", 0), 0u);
  EXPECT_EQ(ls[2].rfind("action,7,", 0), 0u);
  args.insert(args.end(), {"--format", "json"});
  auto j = nlohmann::json::parse(run(args).out);
  EXPECT_EQ(j["encodings"][0]["step_entries"]["1"], 4);
  EXPECT_EQ(j["encodings"][1]["step_entries"]["1"], 8);
}

TEST(Cli, BenchMismatchExits7) {
  TempDir d;
  auto text = slurp(kb("paint_context.ckb"));
  for (auto p = text.find("= 0.99"); p != std::string::npos; p = text.find("= 0.99", p)) text.replace(p, 6, "= 0.98");
  for (auto p = text.find("= 0.01"); p != std::string::npos; p = text.find("= 0.01", p)) text.replace(p, 6, "= 0.02");
  auto f = d.write("paint98.ckb", text);
  auto r = run({"bench", f, "--action-kb", kb("paint_action.ckb"), "--query", "painted(x,T,V)", "--plan",
                kb("paint.plan"), "--to", "3"});
  EXPECT_EQ(r.code, 7);
  EXPECT_NE(r.err.find("disagree"), std::string::npos) << r.err;
}
