#include <gtest/gtest.h>

#include "support/fixtures.hpp"
#include "support/random_kb.hpp"

using namespace ctkb;
using ctkb::testing::cardiac;

namespace {

// Messages of the diagnostics raised by parsing `text`.
std::vector<std::string> parse_errors(const std::string& text) {
  try {
    parse_kb(text, "t.ckb");
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Parse);
    std::vector<std::string> out;
    for (const auto& d : e.diagnostics()) out.push_back(d.format());
    return out;
  }
  return {};
}

bool mentions(const std::vector<std::string>& errs, const std::string& needle) {
  return std::any_of(errs.begin(), errs.end(), [&](const auto& s) { return s.find(needle) != std::string::npos; });
}

const char* kSmall = R"(
domain person = {john, mary}.
value rhythm = {nsr, vf, vt}.
pred rhythm(person, time).
cpred epi(person, time).
cpred no_inter(person, time).
cpred dfib(person, time).
prob rhythm(X,0,nsr) = 0.2.
prob rhythm(X,0,vf) = 0.5.
prob rhythm(X,0,vt) = .3.
prob rhythm(X,t,nsr) | rhythm(X,t-1,nsr) = 0.05 <- no_inter(X,t-1), epi(X,t-1).
ctx no_inter(X,t) <- not dfib(X,t).
combine rhythm with noisy_max(distinguished=vf).
)";

}  // namespace

TEST(Lang, ParsesDeclarations) {
  auto kb = parse_kb(kSmall);
  ASSERT_NE(kb.predicate("rhythm"), nullptr);
  EXPECT_TRUE(kb.predicate("rhythm")->probabilistic());
  EXPECT_FALSE(kb.predicate("epi")->probabilistic());
  EXPECT_EQ(kb.predicate("rhythm")->time_position(), std::optional<std::size_t>(1));
  EXPECT_EQ(kb.values_of("rhythm")->members, (std::vector<std::string>{"nsr", "vf", "vt"}));
  EXPECT_EQ(kb.pb.size(), 4u);
  EXPECT_EQ(kb.cb.size(), 1u);
  EXPECT_EQ(kb.combining_rule("rhythm").rule, "noisy_max");
  EXPECT_EQ(kb.combining_rule("rhythm").param("distinguished"), std::optional<std::string>("vf"));
}

TEST(Lang, TimeTermsAndNumbers) {
  auto kb = parse_kb(kSmall);
  const auto& s = kb.pb[3];
  EXPECT_DOUBLE_EQ(s.alpha, 0.05);
  EXPECT_EQ(s.cons.args[1].kind, Term::Kind::Variable);
  EXPECT_EQ(s.ante[0].args[1].offset, -1);
  EXPECT_EQ(kb.pb[0].cons.args[1].kind, Term::Kind::Integer);
  EXPECT_DOUBLE_EQ(kb.pb[2].alpha, 0.3);
  ASSERT_EQ(s.context.size(), 2u);
  EXPECT_TRUE(kb.cb[0].body[0].negated);
}

TEST(Lang, ShippedCardiacKbParses) {
  const auto& kb = cardiac();
  EXPECT_EQ(kb.values_of("rhythm")->members.size(), 7u);
  EXPECT_EQ(kb.values_of("poa")->members.size(), 7u);
  EXPECT_EQ(kb.values_of("cd")->members.size(), 4u);
  EXPECT_EQ(kb.values_of("cbf")->members.size(), 2u);
  EXPECT_EQ(kb.cb.size(), 2u);
  // 12 regimes x 49 rhythm transitions
  auto n = std::count_if(kb.pb.begin(), kb.pb.end(), [](const ProbSentence& s) {
    return s.cons.pred == "rhythm" && !s.ante.empty();
  });
  EXPECT_EQ(n, 12 * 49);
}

TEST(Lang, PrettyPrintRoundTrips) {
  auto kb = parse_kb(kSmall);
  EXPECT_EQ(parse_kb(pretty_print(kb)), kb);
  EXPECT_EQ(parse_kb(pretty_print(cardiac())), cardiac());
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    auto rc = ctkb::testing::make_random_case(seed);
    auto printed = pretty_print(rc.kb);
    EXPECT_EQ(parse_kb(printed), rc.kb) << printed;
    EXPECT_EQ(pretty_print(parse_kb(printed)), printed);
  }
}

TEST(Lang, CommentsAndCaseInsensitivity) {
  auto kb = parse_kb(R"(
# a comment
DOMAIN Person = {John}.   # trailing
value p = {Yes, no}.
Pred P(person).
prob p(X, yes) = 1.0.
prob p(X, NO) = 0.
)");
  EXPECT_EQ(kb.domain("person")->members, std::vector<std::string>{"john"});
  EXPECT_EQ(kb.pb[0].cons.args[1].name, "yes");
  EXPECT_EQ(kb.pb[1].cons.args[1].kind, Term::Kind::Variable);  // uppercase start
}

TEST(Lang, ValuesMayStartWithDigits) {
  auto kb = parse_kb("value poa = {none, 1min, 2min}.\npred poa.\nprob poa(1min) = 1.\n");
  EXPECT_EQ(kb.values_of("poa")->members[1], "1min");
  EXPECT_EQ(kb.pb[0].cons.args[0].name, "1min");
}

TEST(Lang, UndeclaredPredicateIsReported) {
  auto errs = parse_errors("value p = {a}.\npred p.\nprob q(a) = 1.\n");
  ASSERT_EQ(errs.size(), 1u);
  EXPECT_TRUE(mentions(errs, "t.ckb:3:6")) << errs[0];
  EXPECT_TRUE(mentions(errs, "undeclared predicate 'q'"));
}

TEST(Lang, ValueOutsideVal) {
  auto errs = parse_errors("value p = {a, b}.\npred p.\nprob p(c) = 1.\n");
  EXPECT_TRUE(mentions(errs, "value 'c' is not in VAL(p)"));
}

TEST(Lang, ProbabilityOutOfRange) {
  auto errs = parse_errors("value p = {a, b}.\npred p.\nprob p(a) = 1.5.\n");
  EXPECT_TRUE(mentions(errs, "out of range [0,1]"));
}

TEST(Lang, ArityMismatch) {
  auto errs = parse_errors("domain d = {x}.\nvalue p = {a}.\npred p(d).\nprob p(a) = 1.\n");
  EXPECT_TRUE(mentions(errs, "arity") || mentions(errs, "argument")) << errs.front();
}

TEST(Lang, ConstantOutsideDomain) {
  auto errs = parse_errors("domain d = {x}.\nvalue p = {a}.\npred p(d).\nprob p(y, a) = 1.\n");
  EXPECT_TRUE(mentions(errs, "constant 'y' is not in domain 'd'"));
}

TEST(Lang, PPredicateWithoutValueDeclaration) {
  auto errs = parse_errors("pred p.\n");
  EXPECT_TRUE(mentions(errs, "has no 'value p"));
}

TEST(Lang, DuplicateDeclarations) {
  auto errs = parse_errors("domain d = {x}.\ndomain d = {y}.\nvalue p = {a, a}.\npred p.\npred p.\n");
  EXPECT_TRUE(mentions(errs, "duplicate declaration of domain 'd'"));
  EXPECT_TRUE(mentions(errs, "duplicate member 'a'"));
  EXPECT_TRUE(mentions(errs, "duplicate declaration of predicate 'p'"));
}

TEST(Lang, ContextPredicateInProbabilisticPosition) {
  auto errs = parse_errors("value p = {a}.\npred p.\ncpred c.\nprob c = 1.\n");
  EXPECT_FALSE(errs.empty());
}

TEST(Lang, SyntaxErrorRecoveryReportsEveryStatement) {
  auto errs = parse_errors("value p = {a, b}.\npred p.\nprob p(a) = .\nprob p(b) 0.5.\nprob p(a) = 0.5.\n");
  ASSERT_EQ(errs.size(), 2u);
  EXPECT_TRUE(mentions(errs, "t.ckb:3:"));
  EXPECT_TRUE(mentions(errs, "t.ckb:4:"));
}

TEST(Lang, DiagnosticsAreSortedByPosition) {
  auto errs = parse_errors("value p = {a}.\npred p.\nprob p(z) = 1.\nprob q(a) = 1.\nprob p(a) = 2.\n");
  ASSERT_EQ(errs.size(), 3u);
  EXPECT_TRUE(errs[0].rfind("t.ckb:3:", 0) == 0);
  EXPECT_TRUE(errs[1].rfind("t.ckb:4:", 0) == 0);
  EXPECT_TRUE(errs[2].rfind("t.ckb:5:", 0) == 0);
}

TEST(Lang, UnknownCombiningRule) {
  auto errs = parse_errors("value p = {a}.\npred p.\ncombine p with noisy_and.\n");
  EXPECT_TRUE(mentions(errs, "noisy_and"));
}

TEST(Lang, DistinguishedValueMustBeInVal) {
  auto errs = parse_errors("value p = {a, b}.\npred p.\ncombine p with noisy_max(distinguished=c).\n");
  EXPECT_FALSE(errs.empty());
}

TEST(Lang, MoreThanOneTimeAttribute) {
  auto errs = parse_errors("value p = {a}.\npred p(time, time).\n");
  EXPECT_TRUE(mentions(errs, "more than one time attribute"));
}

TEST(Lang, ParseAtomAndFacts) {
  const auto& kb = cardiac();
  auto q = parse_atom(kb, "rhythm(john, 3, V)", PredKind::Probabilistic);
  EXPECT_EQ(q.args[1].kind, Term::Kind::Integer);
  EXPECT_EQ(q.args[2].kind, Term::Kind::Variable);
  auto facts = parse_facts(kb, "epi(john,0).\n# x\ndfib(john, 2).\n", PredKind::Context);
  ASSERT_EQ(facts.size(), 2u);
  EXPECT_EQ(to_string(facts[1]), "dfib(john, 2)");
  EXPECT_THROW(parse_atom(kb, "epi(john,0)", PredKind::Probabilistic), Error);
  EXPECT_THROW(parse_atom(kb, "rhythm(john, 3, V) extra", PredKind::Probabilistic), Error);
  EXPECT_THROW(parse_facts(kb, "rhythm(john, 0, vf).", PredKind::Context), Error);
}

TEST(Lang, FormatNumberIsShortestRoundTrip) {
  EXPECT_EQ(format_number(0.05), "0.05");
  EXPECT_EQ(format_number(1.0), "1");
  EXPECT_EQ(format_number(0.1 + 0.2), "0.30000000000000004");
  for (double x : {1.0 / 3, 2.0 / 7, 1e-300, 0.99}) EXPECT_EQ(std::stod(format_number(x)), x);
}

TEST(Lang, ExtAndCoherence) {
  const auto& kb = cardiac();
  GroundAtom a{ctkb::testing::rhythm(1), "vf"};
  auto e = ext(kb, a);
  EXPECT_EQ(e.size(), 7u);
  EXPECT_TRUE(coherent({a, {ctkb::testing::rhythm(2), "vf"}}));
  EXPECT_FALSE(coherent({a, {ctkb::testing::rhythm(1), "nsr"}}));
}
