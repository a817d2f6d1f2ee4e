#include <gtest/gtest.h>

#include <cstring>
#include <fstream>
#include <sstream>

#include "buchi_dp/analysis.hpp"
#include "buchi_dp/contraction.hpp"
#include "buchi_dp/parser.hpp"
#include "buchi_dp/prng.hpp"
#include "buchi_dp/random_chain.hpp"
#include "support/instances.hpp"

namespace buchi_dp {
namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TEST(ParseModel, ThreeStateFixture) {
  const auto doc = parse_document(slurp(testing::fixture("three_state_chain.mdp")));
  EXPECT_EQ(doc.kind, ModelKind::Mc);
  EXPECT_EQ(doc.model.state_names, (std::vector<std::string>{"s_a", "s_b", "s_c"}));
  EXPECT_EQ(doc.model.accepting, (std::vector<bool>{true, false, false}));
  EXPECT_EQ(doc.model.initial, 2u);
  EXPECT_TRUE(validate_mdp(doc.model).empty());
  EXPECT_EQ(apply_policy(doc.model, trivial_policy(doc.model)), testing::three_state_chain());
}

TEST(ParseModel, EmptyAcceptingList) {
  const auto m = parse_model("mc\ninitial: a\naccepting:\nt a a 1\n");
  EXPECT_EQ(m.accepting, std::vector<bool>{false});
}

TEST(ParseModel, ImplicitDeclarationOrderAndComments) {
  const auto m = parse_model(
      "# leading comment\n"
      "mdp   # kind\n"
      "initial: x\n"
      "t x go y 0.25\n"
      "t x go x 0.75   # trailing\n"
      "t y stay y 1\n");
  EXPECT_EQ(m.state_names, (std::vector<std::string>{"x", "y"}));
  EXPECT_EQ(m.action_names, (std::vector<std::string>{"go", "stay"}));
  ASSERT_EQ(m.choices[0].size(), 1u);
  EXPECT_EQ(m.choices[0][0].successors, (std::vector<Transition>{{1, 0.25}, {0, 0.75}}));
}

TEST(ParseModel, DuplicateTransitionNamesLine) {
  try {
    parse_model("mc\ninitial: a\nt a a 0.5\nt a a 0.5\n");
    FAIL() << "expected SemanticError";
  } catch (const SemanticError& e) {
    EXPECT_EQ(e.line(), 4u);
    EXPECT_NE(std::string(e.what()).find("duplicate transition"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
  }
}

TEST(ParseModel, RowSumOutsideToleranceIsRejected) {
  EXPECT_THROW(parse_model("mc\ninitial: a\nt a a 0.9\n"), SemanticError);
}

TEST(ParseModel, RowSumWithinToleranceIsRenormalized) {
  const auto m = parse_model("mc\ninitial: a\nt a a 0.5\nt a b 0.5000000001\nt b b 1\n");
  const auto& row = m.choices[0][0].successors;
  EXPECT_NEAR(row[0].probability + row[1].probability, 1.0, 1e-15);
}

TEST(ParseModel, SyntaxErrorsCarryLineAndColumn) {
  struct Case {
    const char* text;
    std::size_t line;
    std::size_t column;
  };
  const Case cases[] = {
      {"mc\ninitial: a\nt a a x\n", 3, 7},
      {"mc\ninitial: a\nt a a 1.5\n", 3, 7},
      {"mc\ninitial: a\nt a a 1 extra\n", 3, 9},
      {"markov\n", 1, 1},
      {"mc\nfoo bar\n", 2, 1},
  };
  for (const auto& c : cases) {
    try {
      parse_model(c.text);
      ADD_FAILURE() << "no error for: " << c.text;
    } catch (const SyntaxError& e) {
      EXPECT_EQ(e.line(), c.line) << c.text;
      EXPECT_EQ(e.column(), c.column) << c.text;
    }
  }
}

TEST(ParseModel, SemanticErrors) {
  EXPECT_THROW(parse_model("mc\nt a a 1\n"), SemanticError);                          // no initial
  EXPECT_THROW(parse_model("mc\ninitial: a\nt a b 1\n"), SemanticError);              // b deadlocks
  EXPECT_THROW(parse_model("mc\ninitial: a\ninitial: a\nt a a 1\n"), SemanticError);  // repeated
  EXPECT_THROW(parse_model("mc\ninitial: a\naccepting: a a\nt a a 1\n"), SemanticError);
  EXPECT_THROW(parse_model(""), SyntaxError);
}

TEST(ParsePolicy, DirectMapping) {
  const auto m = parse_model(slurp(testing::fixture("two_action.mdp")));
  const auto p = parse_policy(slurp(testing::fixture("two_action_cycle.pol")), m);
  EXPECT_EQ(p.choice, (std::vector<ActionIndex>{1, 1}));
  EXPECT_EQ(parse_policy(serialize_policy(p, m), m), p);
}

TEST(ParsePolicy, MissingStateIsNotTotal) {
  const auto m = parse_model(slurp(testing::fixture("two_action.mdp")));
  try {
    parse_policy("s0 a1\n", m);
    FAIL();
  } catch (const SemanticError& e) {
    EXPECT_NE(std::string(e.what()).find("policy not total"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("s1"), std::string::npos);
  }
}

TEST(ParsePolicy, DisabledActionNamesPair) {
  const auto m = parse_model("mdp\ninitial: s0\nt s0 a0 s1 1\nt s1 a1 s0 1\n");
  try {
    parse_policy("s0 a1\ns1 a1\n", m);
    FAIL();
  } catch (const SemanticError& e) {
    EXPECT_NE(std::string(e.what()).find("(s0, a1)"), std::string::npos);
    EXPECT_EQ(e.line(), 1u);
  }
  EXPECT_THROW(parse_policy("s0 zz\ns1 a1\n", m), SemanticError);
  EXPECT_THROW(parse_policy("q a0\n", m), SemanticError);
  EXPECT_THROW(parse_policy("s0 a0\ns0 a0\ns1 a1\n", m), SemanticError);
  EXPECT_THROW(parse_policy("s0\n", m), SyntaxError);
}

TEST(Serialize, RoundTripRandomModels) {
  for (std::uint64_t seed = 1; seed <= 60; ++seed) {
    RandomMdpSpec spec;
    spec.size = 1 + seed % 10;
    spec.max_actions = 1 + seed % 3;
    spec.seed = seed;
    ModelDocument doc{ModelKind::Mdp, random_mdp(spec)};
    doc.model.initial = seed % spec.size;
    const auto back = parse_document(serialize_model(doc));
    EXPECT_EQ(back.kind, doc.kind);
    EXPECT_EQ(back.model.state_names, doc.model.state_names);
    EXPECT_EQ(back.model.initial, doc.model.initial);
    EXPECT_EQ(back.model.accepting, doc.model.accepting);
    ASSERT_EQ(back.model.choices.size(), doc.model.choices.size());
    for (StateIndex s = 0; s < doc.model.num_states(); ++s) {
      ASSERT_EQ(back.model.choices[s].size(), doc.model.choices[s].size());
      for (std::size_t r = 0; r < doc.model.choices[s].size(); ++r) {
        const auto& a = doc.model.choices[s][r];
        const auto& b = back.model.choices[s][r];
        EXPECT_EQ(back.model.action_names[b.action], doc.model.action_names[a.action]);
        ASSERT_EQ(a.successors.size(), b.successors.size());
        for (std::size_t i = 0; i < a.successors.size(); ++i) {
          EXPECT_EQ(a.successors[i].target, b.successors[i].target);
          // Renormalization of a row summing to 1 ± ulp may move the last bits.
          EXPECT_DOUBLE_EQ(a.successors[i].probability, b.successors[i].probability);
        }
      }
    }
  }
}

TEST(Serialize, ChainDocumentRoundTrip) {
  const ModelDocument doc{ModelKind::Mc, as_mdp(testing::three_state_chain(), "step")};
  const auto text = serialize_model(doc);
  EXPECT_EQ(text.rfind("mc\n", 0), 0u);
  EXPECT_EQ(parse_document(text).model, doc.model);
}

// Arbitrary bytes and mutated documents produce a model or a ParseError,
// never anything else.
TEST(ParseModel, FuzzNeverEscapesWithOtherErrors) {
  const std::string seed_doc = serialize_model({ModelKind::Mdp, random_mdp({})});
  const std::string alphabet = "mdpc: \n\t#t0123456789.e-+sainitlcepg\r\x01\xff";
  Xorshift64Star rng(42);
  for (int iter = 0; iter < 4000; ++iter) {
    std::string text;
    if (iter % 2 == 0) {
      const auto len = rng.next() % 120;
      for (std::size_t i = 0; i < len; ++i) text += alphabet[rng.next() % alphabet.size()];
    } else {
      text = seed_doc;
      const auto edits = 1 + rng.next() % 4;
      for (std::size_t e = 0; e < edits; ++e) {
        const auto pos = rng.next() % text.size();
        switch (rng.next() % 3) {
          case 0: text[pos] = alphabet[rng.next() % alphabet.size()]; break;
          case 1: text.erase(pos, 1 + rng.next() % 8); break;
          default: text.insert(pos, 1, static_cast<char>(rng.next() & 0xff)); break;
        }
        if (text.empty()) text = "x";
      }
    }
    try {
      const auto doc = parse_document(text);
      EXPECT_TRUE(validate_mdp(doc.model).empty());
    } catch (const ParseError&) {
    }
  }
}

DpTrace three_state_trace(std::size_t k_max) {
  const auto mc = testing::three_state_chain();
  const auto a = analyze_chain(mc, {0.99, 1.0});
  return run_dp(*a.system, k_max, a.reduced_value);
}

TEST(TraceCsv, CaseStudyRows) {
  const auto trace = three_state_trace(3);
  const auto csv = emit_trace_csv(trace, {1.0, 1.0, 1.0, 0.99});
  const auto rows = read_trace_csv(csv);
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "k,sup_error,bound");
  EXPECT_NEAR(rows[0].sup_error, 1.0, 1e-12);
  EXPECT_NEAR(rows[1].sup_error, 1.0, 1e-12);
  EXPECT_NEAR(rows[2].sup_error, 1.0, 1e-12);
  EXPECT_NEAR(rows[3].sup_error, 0.99, 1e-12);
  EXPECT_EQ(rows[3].k, 3u);
}

TEST(TraceCsv, EmptyOrMismatched) {
  EXPECT_THROW(emit_trace_csv(DpTrace{}, {}), LengthMismatch);
  EXPECT_THROW(emit_trace_csv(three_state_trace(3), {1.0}), LengthMismatch);
}

TEST(TraceCsv, ParseBackIsBitExact) {
  const auto trace = three_state_trace(40);
  std::vector<double> bound;
  for (std::size_t k = 0; k <= 40; ++k) bound.push_back(std::pow(0.99, static_cast<double>(k / 3)) / 3.0);
  const auto rows = read_trace_csv(emit_trace_csv(trace, bound));
  ASSERT_EQ(rows.size(), 41u);
  for (std::size_t k = 0; k <= 40; ++k) {
    EXPECT_EQ(rows[k].k, k);
    EXPECT_EQ(std::memcmp(&rows[k].sup_error, &trace.sup_errors[k], sizeof(double)), 0);
    EXPECT_EQ(std::memcmp(&rows[k].bound, &bound[k], sizeof(double)), 0);
  }
}

}  // namespace
}  // namespace buchi_dp
