#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "euc/build.hpp"
#include "euc/eu_ops.hpp"
#include "test_support.hpp"

using euc::Bbox;
using euc::BuildResult;
using euc::CanonRole;
using euc::ConstructionParams;
using euc::Embeddings;
using euc::EuKind;
using euc::EvidenceUnit;
using euc::ProviderKind;
using euc_test::make_el;
using euc_test::with_vec;

namespace {

BuildResult build(std::vector<euc::LayoutElement>& elements, int dim = 4) {
  const ConstructionParams params;
  const Embeddings embeddings(ProviderKind::precomputed, dim);
  return euc::build_eus(elements, params, embeddings);
}

const EvidenceUnit* eu_of(const BuildResult& r, const std::string& member) {
  for (const EvidenceUnit& eu : r.eus)
    if (std::find(eu.members.begin(), eu.members.end(), member) !=
        eu.members.end())
      return &eu;
  return nullptr;
}

}  // namespace

TEST_CASE("every visual element seeds an evidence unit") {
  std::vector<euc::LayoutElement> els = {
      make_el("t", CanonRole::table, {0.1, 0.1, 0.9, 0.3}, 0, "t"),
      make_el("c", CanonRole::chart, {0.1, 0.6, 0.9, 0.7}, 1, "c"),
      make_el("p", CanonRole::picture, {0.1, 0.9, 0.9, 0.95}, 2, ""),
  };
  const BuildResult r = build(els);
  REQUIRE(r.eus.size() == 3);
  CHECK(eu_of(r, "t")->kind == EuKind::table_panel);
  CHECK(eu_of(r, "c")->kind == EuKind::chart_panel);
  CHECK(eu_of(r, "p")->kind == EuKind::visual_panel);
  // Sequential ids on the page.
  CHECK(r.eus[0].eu_id == "p1/eu1");
  CHECK(r.eus[1].eu_id == "p1/eu2");
  CHECK(r.eus[2].eu_id == "p1/eu3");
}

TEST_CASE("three touching table fragments reunify into one core") {
  std::vector<euc::LayoutElement> els = {
      make_el("r1", CanonRole::table, {0.05, 0.27, 0.95, 0.33}, 0, "h"),
      make_el("r2", CanonRole::table, {0.05, 0.33, 0.95, 0.51}, 1, "m"),
      make_el("r3", CanonRole::table, {0.05, 0.51, 0.95, 0.57}, 2, "t"),
  };
  const BuildResult r = build(els);
  REQUIRE(r.eus.size() == 1);
  CHECK(r.eus[0].kind == EuKind::table_panel);
  CHECK(r.eus[0].members.size() == 3);
  auto index = euc::make_element_index(els);
  const auto core = euc::visual_core(r.eus[0], index);
  REQUIRE(core.has_value());
  CHECK(*core == Bbox{0.05, 0.27, 0.95, 0.57});
  CHECK(r.eus[0].footprint == Bbox{0.05, 0.27, 0.95, 0.57});
}

TEST_CASE("distinct same-type visuals never merge at a positive gap") {
  for (double gap : {0.001, 0.05, 0.2}) {
    std::vector<euc::LayoutElement> els = {
        make_el("t1", CanonRole::table, {0.1, 0.10, 0.9, 0.30}, 0, "a"),
        make_el("t2", CanonRole::table, {0.1, 0.30 + gap, 0.9, 0.50 + gap}, 1,
                "b"),
    };
    const BuildResult r = build(els);
    CHECK(r.eus.size() == 2);
    CHECK(eu_of(r, "t1") != eu_of(r, "t2"));
  }
}

TEST_CASE("table and chart within the panel radius merge into a stat panel") {
  std::vector<euc::LayoutElement> els = {
      make_el("t", CanonRole::table, {0.1, 0.10, 0.9, 0.30}, 0, "tab"),
      make_el("c", CanonRole::chart, {0.1, 0.40, 0.9, 0.60}, 1, "cha"),
  };
  const BuildResult r = build(els);  // gap 0.10 < 0.22
  REQUIRE(r.eus.size() == 1);
  CHECK(r.eus[0].kind == EuKind::stat_panel);
  CHECK(r.eus[0].members.size() == 2);

  std::vector<euc::LayoutElement> far = {
      make_el("t", CanonRole::table, {0.1, 0.10, 0.9, 0.30}, 0, "tab"),
      make_el("c", CanonRole::chart, {0.1, 0.55, 0.9, 0.75}, 1, "cha"),
  };
  const BuildResult r2 = build(far);  // gap 0.25 >= 0.22
  CHECK(r2.eus.size() == 2);
}

TEST_CASE("structural elements attach to the nearest seed within reach") {
  std::vector<euc::LayoutElement> els = {
      make_el("h", CanonRole::section_header, {0.1, 0.05, 0.9, 0.09}, 0, "H"),
      make_el("t1", CanonRole::table, {0.1, 0.10, 0.9, 0.30}, 1, "a"),
      make_el("t2", CanonRole::table, {0.1, 0.60, 0.9, 0.80}, 2, "b"),
      make_el("u", CanonRole::unit_label, {0.1, 0.82, 0.9, 0.85}, 3, "(u)"),
  };
  const BuildResult r = build(els);
  REQUIRE(r.eus.size() == 2);
  CHECK(eu_of(r, "h") == eu_of(r, "t1"));  // 0.01 above the first table
  CHECK(eu_of(r, "u") == eu_of(r, "t2"));  // 0.02 below the second
}

TEST_CASE("structural elements beyond the reach stay out") {
  std::vector<euc::LayoutElement> els = {
      make_el("t", CanonRole::table, {0.1, 0.10, 0.9, 0.30}, 0, "a"),
      make_el("h", CanonRole::section_header, {0.1, 0.65, 0.9, 0.70}, 1, "H"),
  };
  const BuildResult r = build(els);  // distance 0.35 > 0.30
  REQUIRE(r.eus.size() == 2);
  CHECK(eu_of(r, "h")->kind == EuKind::section_text);
}

TEST_CASE("caption-labeled text attaches by raw label") {
  auto cap = make_el("cap", CanonRole::plain_text, {0.1, 0.32, 0.9, 0.36}, 1,
                     "Table 1. Summary.", "table_caption");
  std::vector<euc::LayoutElement> els = {
      make_el("t", CanonRole::table, {0.1, 0.10, 0.9, 0.30}, 0, "a"),
      cap,
  };
  const BuildResult r = build(els);
  REQUIRE(r.eus.size() == 1);
  CHECK(eu_of(r, "cap") == eu_of(r, "t"));
}

TEST_CASE("semantic allocation joins paragraphs at the similarity floor") {
  std::vector<euc::LayoutElement> els = {
      with_vec(make_el("t", CanonRole::table, {0.1, 0.1, 0.9, 0.3}, 0, "tab"),
               {1, 0, 0, 0}),
      with_vec(make_el("near", CanonRole::support_paragraph,
                       {0.1, 0.8, 0.9, 0.84}, 1, "close"),
               {0.8, 0.6, 0, 0}),  // cos 0.8 >= 0.40
      with_vec(make_el("far", CanonRole::support_paragraph,
                       {0.1, 0.9, 0.9, 0.94}, 2, "other"),
               {0, 1, 0, 0}),  // cos 0.0 < 0.40
  };
  const BuildResult r = build(els);
  CHECK(eu_of(r, "near") == eu_of(r, "t"));
  CHECK(eu_of(r, "far") != eu_of(r, "t"));
  CHECK(eu_of(r, "far")->kind == EuKind::text_cluster);
}

TEST_CASE("allocation scores against the member state before any assignment") {
  // p2 is similar to p1 (0.866) but orthogonal to the seed. If assignments
  // leaked into the member vectors, p2 would ride in after p1; frozen
  // vectors leave it below the floor.
  std::vector<euc::LayoutElement> els = {
      with_vec(make_el("t", CanonRole::table, {0.1, 0.1, 0.9, 0.3}, 0, "tab"),
               {1, 0, 0, 0}),
      with_vec(make_el("p1", CanonRole::support_paragraph,
                       {0.1, 0.70, 0.9, 0.74}, 1, "first"),
               {0.5, 0.86602540378443871, 0, 0}),
      with_vec(make_el("p2", CanonRole::support_paragraph,
                       {0.1, 0.80, 0.9, 0.84}, 2, "second"),
               {0, 1, 0, 0}),
  };
  const BuildResult r = build(els);
  CHECK(eu_of(r, "p1") == eu_of(r, "t"));
  CHECK(eu_of(r, "p2") != eu_of(r, "t"));
  CHECK(eu_of(r, "p2")->kind == EuKind::text_cluster);
}

TEST_CASE("allocation ties keep the earlier evidence unit") {
  std::vector<euc::LayoutElement> els = {
      with_vec(make_el("t1", CanonRole::table, {0.1, 0.10, 0.9, 0.20}, 0, "a"),
               {1, 0, 0, 0}),
      with_vec(make_el("t2", CanonRole::table, {0.1, 0.50, 0.9, 0.60}, 1, "b"),
               {1, 0, 0, 0}),
      with_vec(make_el("p", CanonRole::support_paragraph,
                       {0.1, 0.80, 0.9, 0.84}, 2, "p"),
               {1, 0, 0, 0}),
  };
  const BuildResult r = build(els);
  CHECK(eu_of(r, "p") == eu_of(r, "t1"));
}

TEST_CASE("paragraphs without any vector skip allocation but stay covered") {
  auto p = make_el("p", CanonRole::support_paragraph, {0.1, 0.8, 0.9, 0.84}, 1,
                   "");  // empty text, no stored vector -> zero norm
  std::vector<euc::LayoutElement> els = {
      with_vec(make_el("t", CanonRole::table, {0.1, 0.1, 0.9, 0.3}, 0, "tab"),
               {1, 0, 0, 0}),
      p,
  };
  const BuildResult r = build(els);
  REQUIRE(eu_of(r, "p") != nullptr);
  CHECK(eu_of(r, "p")->kind == EuKind::text_cluster);
  bool skipped = false;
  for (const euc::TraceEntry& t : r.trace)
    if (t.rule_id == "D1_040" && t.subject == "p" &&
        t.outcome == "skipped_no_embedding")
      skipped = true;
  CHECK(skipped);
}

TEST_CASE("headers collect their section paragraphs") {
  std::vector<euc::LayoutElement> els = {
      make_el("h1", CanonRole::section_header, {0.1, 0.05, 0.9, 0.08}, 0, "A"),
      make_el("p1", CanonRole::support_paragraph, {0.1, 0.10, 0.9, 0.20}, 1,
              "one"),
      make_el("p2", CanonRole::support_paragraph, {0.1, 0.22, 0.9, 0.30}, 2,
              "two"),
      make_el("h2", CanonRole::section_header, {0.1, 0.40, 0.9, 0.43}, 3, "B"),
      make_el("p3", CanonRole::support_paragraph, {0.1, 0.45, 0.9, 0.55}, 4,
              "three"),
  };
  const BuildResult r = build(els);
  REQUIRE(r.eus.size() == 2);
  const EvidenceUnit* a = eu_of(r, "h1");
  REQUIRE(a != nullptr);
  CHECK(a->kind == EuKind::section_text);
  CHECK(a->members == std::vector<std::string>{"h1", "p1", "p2"});
  const EvidenceUnit* b = eu_of(r, "h2");
  CHECK(b->members == std::vector<std::string>{"h2", "p3"});
}

TEST_CASE("order-gated labels are rescued in consolidation") {
  // The header between the unit label and the table blocks the spatial
  // attach; the rescue pass has no order gate and pulls it back in.
  std::vector<euc::LayoutElement> els = {
      make_el("t", CanonRole::table, {0.1, 0.20, 0.9, 0.40}, 0, "tab"),
      make_el("h", CanonRole::section_header, {0.1, 0.42, 0.9, 0.46}, 1, "H"),
      make_el("u", CanonRole::unit_label, {0.1, 0.52, 0.9, 0.56}, 2, "(u)"),
  };
  const BuildResult r = build(els);
  REQUIRE(eu_of(r, "u") != nullptr);
  CHECK(eu_of(r, "u") == eu_of(r, "t"));
  bool rescued = false;
  for (const euc::TraceEntry& t : r.trace)
    if (t.rule_id == "C-2" && t.subject == "u" && t.outcome == "reattach")
      rescued = true;
  CHECK(rescued);
}

TEST_CASE("unreachable labels demote to plain text and cluster") {
  std::vector<euc::LayoutElement> els = {
      make_el("t", CanonRole::table, {0.1, 0.05, 0.9, 0.15}, 0, "tab"),
      make_el("h", CanonRole::section_header, {0.1, 0.17, 0.9, 0.20}, 1, "H"),
      make_el("u", CanonRole::unit_label, {0.1, 0.90, 0.9, 0.95}, 2, "(u)"),
  };
  const BuildResult r = build(els);  // label 0.70 below the core
  const EvidenceUnit* cluster = eu_of(r, "u");
  REQUIRE(cluster != nullptr);
  CHECK(cluster->kind == EuKind::text_cluster);
  CHECK(els[2].canon_role == CanonRole::plain_text);  // demotion is recorded
}

TEST_CASE("residual text clusters split on each greedy bound") {
  std::vector<euc::LayoutElement> els = {
      // Run 1: tight column.
      make_el("a1", CanonRole::plain_text, {0.10, 0.05, 0.90, 0.10}, 0, "x"),
      make_el("a2", CanonRole::plain_text, {0.10, 0.11, 0.90, 0.16}, 1, "x"),
      // Vertical gap 0.08 >= 0.07 starts a new cluster.
      make_el("b1", CanonRole::plain_text, {0.10, 0.24, 0.90, 0.30}, 2, "x"),
      // Left-x misalignment 0.20 >= 0.18 starts a new cluster.
      make_el("c1", CanonRole::plain_text, {0.30, 0.31, 0.90, 0.36}, 3, "x"),
      // Reading-order jump 7-3=4 > 3 starts a new cluster.
      make_el("d1", CanonRole::plain_text, {0.30, 0.37, 0.90, 0.42}, 7, "x"),
  };
  const BuildResult r = build(els);
  REQUIRE(r.eus.size() == 4);
  CHECK(eu_of(r, "a1") == eu_of(r, "a2"));
  CHECK(eu_of(r, "b1") != eu_of(r, "a1"));
  CHECK(eu_of(r, "c1") != eu_of(r, "b1"));
  CHECK(eu_of(r, "d1") != eu_of(r, "c1"));
  for (const EvidenceUnit& eu : r.eus) CHECK(eu.kind == EuKind::text_cluster);
}

TEST_CASE("switching rules off changes construction accordingly") {
  ConstructionParams params;
  const Embeddings embeddings(ProviderKind::precomputed, 4);

  euc::DecisionChain chain = euc::default_rule_chain(params);
  auto deactivate = [&](const std::string& id) {
    for (euc::DecisionRule& rule : chain.rules)
      if (rule.rule_id == id) rule.active = false;
  };

  SUBCASE("without the type guard, nearby same-type visuals merge") {
    std::vector<euc::LayoutElement> els = {
        make_el("t1", CanonRole::table, {0.1, 0.10, 0.9, 0.30}, 0, "a"),
        make_el("t2", CanonRole::table, {0.1, 0.40, 0.9, 0.60}, 1, "b"),
    };
    const BuildResult guarded = euc::build_eus(els, params, embeddings, chain);
    CHECK(guarded.eus.size() == 2);
    deactivate("D1_051");
    std::vector<euc::LayoutElement> els2 = els;
    const BuildResult unguarded =
        euc::build_eus(els2, params, embeddings, chain);
    CHECK(unguarded.eus.size() == 1);
  }

  SUBCASE("without the cross-type rule, no stat panels form") {
    deactivate("D1_021");
    std::vector<euc::LayoutElement> els = {
        make_el("t", CanonRole::table, {0.1, 0.10, 0.9, 0.30}, 0, "tab"),
        make_el("c", CanonRole::chart, {0.1, 0.40, 0.9, 0.60}, 1, "cha"),
    };
    const BuildResult r = euc::build_eus(els, params, embeddings, chain);
    CHECK(r.eus.size() == 2);
  }

  SUBCASE("without semantic allocation, paragraphs cluster") {
    deactivate("D1_040");
    std::vector<euc::LayoutElement> els = {
        with_vec(make_el("t", CanonRole::table, {0.1, 0.1, 0.9, 0.3}, 0, "t"),
                 {1, 0, 0, 0}),
        with_vec(make_el("p", CanonRole::support_paragraph,
                         {0.1, 0.8, 0.9, 0.84}, 1, "p"),
                 {1, 0, 0, 0}),
    };
    const BuildResult r = euc::build_eus(els, params, embeddings, chain);
    CHECK(eu_of(r, "p") != eu_of(r, "t"));
    CHECK(eu_of(r, "p")->kind == EuKind::text_cluster);
  }

  SUBCASE("without the order gate, blocked labels attach spatially") {
    deactivate("D1_031");
    std::vector<euc::LayoutElement> els = {
        make_el("t", CanonRole::table, {0.1, 0.20, 0.9, 0.40}, 0, "tab"),
        make_el("h", CanonRole::section_header, {0.1, 0.42, 0.9, 0.46}, 1,
                "H"),
        make_el("u", CanonRole::unit_label, {0.1, 0.52, 0.9, 0.56}, 2, "(u)"),
    };
    const BuildResult r = euc::build_eus(els, params, embeddings, chain);
    CHECK(eu_of(r, "u") == eu_of(r, "t"));
    // Attached in the spatial phase, not by rescue.
    for (const euc::TraceEntry& t : r.trace)
      if (t.subject == "u") CHECK(t.rule_id != "C-2");
  }
}

TEST_CASE("allocation equals the brute-force reference on random fixtures") {
  std::mt19937_64 rng(777);
  const ConstructionParams params;
  const Embeddings embeddings(ProviderKind::precomputed, 8);
  for (int trial = 0; trial < 50; ++trial) {
    euc_test::AllocationFixture fx = euc_test::random_allocation_fixture(rng);
    const auto expected = euc_test::allocation_oracle(fx, params.tau);
    const BuildResult r = euc::build_eus(fx.elements, params, embeddings);

    std::map<std::string, std::string> actual;  // para -> table id
    for (const std::string& pid : fx.para_ids) {
      const EvidenceUnit* eu = eu_of(r, pid);
      REQUIRE(eu != nullptr);  // partition: nothing is dropped
      std::string table;
      for (const std::string& mid : eu->members)
        if (std::find(fx.table_ids.begin(), fx.table_ids.end(), mid) !=
            fx.table_ids.end())
          table = mid;
      actual[pid] = table;
    }
    for (const std::string& pid : fx.para_ids) {
      INFO("trial ", trial, " paragraph ", pid);
      CHECK(actual.at(pid) == expected.at(pid));
    }
  }
}

TEST_CASE("every non-excluded element lands in exactly one evidence unit") {
  std::mt19937_64 rng(1234);
  const ConstructionParams params;
  const Embeddings embeddings(ProviderKind::hash_ngram, 16);
  for (int page = 0; page < 200; ++page) {
    std::vector<euc::LayoutElement> els =
        euc_test::random_page(rng, "pg" + std::to_string(page));
    const BuildResult r = euc::build_eus(els, params, embeddings);

    std::multiset<std::string> expected;
    for (const euc::LayoutElement& e : els)
      if (!e.excluded) expected.insert(e.element_id);
    std::multiset<std::string> actual;
    auto index = euc::make_element_index(els);
    for (const EvidenceUnit& eu : r.eus) {
      CHECK_FALSE(eu.members.empty());
      for (const std::string& mid : eu.members) {
        actual.insert(mid);
        CHECK(euc::bbox_contains(eu.footprint,
                                 euc::element_at(index, mid).bbox));
      }
      CHECK(eu.footprint == euc::eu_footprint(eu, index));
    }
    REQUIRE(actual == expected);
  }
}

TEST_CASE("similarity matrix holds the max member cosine") {
  const Embeddings embeddings(ProviderKind::precomputed, 2);
  auto p1 = with_vec(make_el("p1", CanonRole::support_paragraph,
                             {0.1, 0.1, 0.9, 0.2}, 0, "p1"),
                     {1, 0});
  auto p2 = with_vec(make_el("p2", CanonRole::support_paragraph,
                             {0.1, 0.3, 0.9, 0.4}, 1, "p2"),
                     {0, 1});
  auto m1 = with_vec(
      make_el("m1", CanonRole::table, {0.1, 0.5, 0.9, 0.6}, 2, "m1"), {1, 0});
  auto m2a = with_vec(
      make_el("m2a", CanonRole::table, {0.1, 0.7, 0.9, 0.8}, 3, "m2a"),
      {0.6, 0.8});
  auto m2b = with_vec(make_el("m2b", CanonRole::support_paragraph,
                              {0.1, 0.8, 0.9, 0.9}, 4, "m2b"),
                      {0, 1});
  const euc::SimilarityMatrix m = euc::build_similarity(
      {&p1, &p2}, {{&m1}, {&m2a, &m2b}}, embeddings);
  CHECK(m.paragraph_ids == std::vector<std::string>{"p1", "p2"});
  CHECK(m.eu_head_ids == std::vector<std::string>{"m1", "m2a"});
  CHECK(m.scores(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(m.scores(0, 1) == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(m.scores(1, 0) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(m.scores(1, 1) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("construction emits a phase-tagged trace") {
  std::vector<euc::LayoutElement> els = {
      make_el("t", CanonRole::table, {0.1, 0.1, 0.9, 0.3}, 0, "tab"),
      make_el("h", CanonRole::section_header, {0.1, 0.32, 0.9, 0.36}, 1, "H"),
  };
  const BuildResult r = build(els);
  bool seeded = false, attached = false;
  for (const euc::TraceEntry& t : r.trace) {
    if (t.rule_id == "D1_010" && t.subject == "t" && t.outcome == "seed")
      seeded = true;
    if (t.rule_id == "D1_010" && t.subject == "h" && t.outcome == "attach") {
      attached = true;
      CHECK(t.phase == "A");
      CHECK(t.object == "t");
      REQUIRE(t.metric.has_value());
      CHECK(*t.metric == doctest::Approx(0.02).epsilon(1e-9));
      CHECK(t.threshold == 0.30);
    }
  }
  CHECK(seeded);
  CHECK(attached);
}

TEST_CASE("structural attachment requires strictly less than the reach") {
  ConstructionParams params;
  params.max_gravity_reach = 0.25;
  const Embeddings embeddings(ProviderKind::precomputed, 4);

  // 0.75 - 0.5 == 0.25 exactly in binary: distance equal to the reach.
  std::vector<euc::LayoutElement> at_limit = {
      make_el("t", CanonRole::table, {0.1, 0.25, 0.9, 0.5}, 0, "tab"),
      make_el("h", CanonRole::section_header, {0.1, 0.75, 0.9, 0.8}, 1, "H"),
  };
  const BuildResult out = euc::build_eus(at_limit, params, embeddings);
  REQUIRE(eu_of(out, "h") != nullptr);
  CHECK(eu_of(out, "t") != eu_of(out, "h"));

  std::vector<euc::LayoutElement> inside = {
      make_el("t", CanonRole::table, {0.1, 0.25, 0.9, 0.5}, 0, "tab"),
      make_el("h", CanonRole::section_header, {0.1, 0.625, 0.9, 0.7}, 1, "H"),
  };
  const BuildResult in = euc::build_eus(inside, params, embeddings);
  CHECK(eu_of(in, "t") == eu_of(in, "h"));
}

TEST_CASE("semantic allocation admits similarity exactly at the gate") {
  ConstructionParams params;
  params.tau = 0.6;
  const Embeddings embeddings(ProviderKind::precomputed, 2);
  // cos((3,4),(1,0)) = 3/5, bit-for-bit equal to the 0.6 gate.
  auto t = with_vec(
      make_el("t", CanonRole::table, {0.1, 0.1, 0.9, 0.2}, 0, "tab"), {3, 4});
  auto at_gate = with_vec(make_el("p", CanonRole::support_paragraph,
                                  {0.1, 0.8, 0.9, 0.82}, 1, "at"),
                          {1, 0});
  auto orthogonal = with_vec(make_el("q", CanonRole::support_paragraph,
                                     {0.1, 0.85, 0.9, 0.87}, 2, "below"),
                             {4, -3});
  std::vector<euc::LayoutElement> els = {t, at_gate, orthogonal};
  const BuildResult r = euc::build_eus(els, params, embeddings);
  CHECK(eu_of(r, "t") == eu_of(r, "p"));
  CHECK(eu_of(r, "t") != eu_of(r, "q"));
}

TEST_CASE("label rescue is strictly inside its radius") {
  // The header between the seed and the label gates the phase-A attach, so
  // the label reaches the rescue pass; at exactly the rescue radius it is
  // demoted instead of reattached.
  const ConstructionParams params;  // label_reattach_dist = 0.25
  const Embeddings embeddings(ProviderKind::precomputed, 4);
  std::vector<euc::LayoutElement> els = {
      make_el("t", CanonRole::table, {0.1, 0.25, 0.9, 0.5}, 0, "tab"),
      make_el("h", CanonRole::section_header, {0.1, 0.52, 0.9, 0.56}, 1, "H"),
      make_el("u", CanonRole::unit_label, {0.1, 0.75, 0.9, 0.8}, 2, "(u)"),
  };
  const BuildResult r = euc::build_eus(els, params, embeddings);
  REQUIRE(eu_of(r, "u") != nullptr);
  CHECK(eu_of(r, "u") != eu_of(r, "t"));
  CHECK(eu_of(r, "u")->kind == EuKind::text_cluster);
  CHECK(els[2].canon_role == CanonRole::plain_text);

  // A hair closer and the rescue takes it.
  std::vector<euc::LayoutElement> near = {
      make_el("t", CanonRole::table, {0.1, 0.25, 0.9, 0.5}, 0, "tab"),
      make_el("h", CanonRole::section_header, {0.1, 0.52, 0.9, 0.56}, 1, "H"),
      make_el("u", CanonRole::unit_label, {0.1, 0.7265625, 0.9, 0.78}, 2,
              "(u)"),
  };
  const BuildResult r2 = euc::build_eus(near, params, embeddings);
  CHECK(eu_of(r2, "u") == eu_of(r2, "t"));
}
