#include <gtest/gtest.h>

#include "support/fixtures.hpp"

using namespace ctkb;
using namespace ctkb::testing;

namespace {

const KnowledgeBase& paint_context() {
  static const auto kb = parse_kb(shipped("paint_context.ckb"), "paint_context.ckb");
  return kb;
}

const KnowledgeBase& paint_action() {
  static const auto kb = parse_kb(shipped("paint_action.ckb"), "paint_action.ckb");
  return kb;
}

SessionInput paint_session(const KnowledgeBase& kb, const std::string& evidence = "") {
  return make_session_input(kb, "painted(x,T,V)", shipped("paint.plan"), evidence, {0, 3});
}

}  // namespace

TEST(Bench, PaintLinkMatrixHalves) {
  auto cmp = compare_encodings(paint_context(), paint_session(paint_context()), paint_action(),
                               paint_session(paint_action()));
  ASSERT_EQ(cmp.context.step_entries.size(), 4u);
  ASSERT_EQ(cmp.action.step_entries.size(), 4u);
  // Time 0 is the shared prior; every later step carries the action.
  EXPECT_EQ(cmp.context.step_entries.at(0), cmp.action.step_entries.at(0));
  for (std::int64_t t = 1; t <= 3; ++t) {
    EXPECT_EQ(cmp.context.step_entries.at(t), 4u);
    EXPECT_EQ(2 * cmp.context.step_entries.at(t), cmp.action.step_entries.at(t));
  }
  EXPECT_LE(cmp.max_deviation, 1e-9);
  EXPECT_EQ(cmp.context.answers.size(), 4u);
}

TEST(Bench, PaintAgreesUnderEvidence) {
  auto cmp = compare_encodings(paint_context(), paint_session(paint_context(), "painted(x,1,no).\n"),
                               paint_action(), paint_session(paint_action(), "painted(x,1,no).\n"));
  EXPECT_LE(cmp.max_deviation, 1e-9);
}

TEST(Bench, CardiacContextEncodingIsSmaller) {
  auto q = "rhythm(john,4,V)";
  auto ctx = shipped("drowning.context");
  auto cmp = compare_encodings(cardiac(), make_session_input(cardiac(), q, ctx, "", {0, 4}), cardiac_actions(),
                               make_session_input(cardiac_actions(), q, ctx, "", {0, 4}));
  EXPECT_LT(cmp.context.cpt_entries, cmp.action.cpt_entries);
  EXPECT_LT(cmp.context.nodes, cmp.action.nodes);
  EXPECT_LE(cmp.max_deviation, 1e-9);
}

TEST(Bench, IdenticalEncodingsHaveNoDeltas) {
  auto in = paint_session(paint_context());
  auto cmp = compare_encodings(paint_context(), in, paint_context(), in);
  EXPECT_EQ(cmp.context.nodes, cmp.action.nodes);
  EXPECT_EQ(cmp.context.cpt_entries, cmp.action.cpt_entries);
  EXPECT_EQ(cmp.context.step_entries, cmp.action.step_entries);
  EXPECT_EQ(cmp.max_deviation, 0.0);
}

TEST(Bench, MismatchIsReported) {
  // Without the plan the action priors say nothing is painted.
  auto action = make_session_input(paint_action(), "painted(x,T,V)", "", "", {0, 3});
  try {
    compare_encodings(paint_context(), paint_session(paint_context()), paint_action(), action);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::EncodingMismatch);
  }
}

TEST(Bench, CsvLayout) {
  EncodingMetrics m;
  m.encoding = "context";
  m.nodes = 4;
  m.cpt_entries = 14;
  m.build_ms = 1.5;
  m.infer_ms = 0.25;
  EXPECT_EQ(metrics_csv({m}), "encoding,nodes,cpt_entries,build_ms,infer_ms\ncontext,4,14,1.500,0.250\n");
}
