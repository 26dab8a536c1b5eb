#include <gtest/gtest.h>

#include <random>

#include "cpm/ext_redundancy.hpp"
#include "support/oracles.hpp"

namespace cpm::redundancy {
namespace {

std::string lower(const std::string& text, PassConfig cfg = {}, Diagnostics* diags = nullptr) {
  auto r = RedundancyPass().transform(load_unit(text), cfg);
  if (diags) *diags = r.diagnostics;
  return render(r.unit);
}

TEST(Scan, RecordsDeclarations) {
  const auto s = scan_redundant(load_unit("int a;\nredundant_t int x;\nextern redundant_t long y;\n"), {});
  ASSERT_EQ(s.decls.size(), 2u);
  EXPECT_EQ(s.decls[0], (RedundantDecl{"x", "int", 3, false, 2}));
  EXPECT_EQ(s.decls[1], (RedundantDecl{"y", "long", 3, true, 3}));
}

TEST(Lower, StorageAndExtern) {
  EXPECT_EQ(lower("redundant_t int x;\nextern redundant_t int z;\n"),
            "cpm_red_storage(x, int, 3);\ncpm_red_extern(z, int);\n");
}

TEST(Lower, InitializerBecomesWrite) {
  Diagnostics d;
  EXPECT_EQ(lower("redundant_t int x = 4;\n", {}, &d),
            "cpm_red_storage(x, int, 3); cpm_red_write(x, (4));\n");
  ASSERT_EQ(d.size(), 1u);
  EXPECT_EQ(d[0].severity, Severity::kInfo);
}

TEST(Lower, ReadsAndWrites) {
  EXPECT_EQ(lower("redundant_t int x;\nx = 5;\ny = x + 1;\nx += 2;\nx++;\n--x;\n"),
            "cpm_red_storage(x, int, 3);\n"
            "cpm_red_write(x, (5));\n"
            "y = cpm_red_read(x) + 1;\n"
            "cpm_red_write(x, cpm_red_read(x) + (2));\n"
            "cpm_red_write(x, cpm_red_read(x) + (1));\n"
            "cpm_red_write(x, cpm_red_read(x) - (1));\n");
}

TEST(Lower, NestedWriteInsideBlock) {
  EXPECT_EQ(lower("redundant_t int x;\nif (x > 3) { x = x - 1; }\n"),
            "cpm_red_storage(x, int, 3);\n"
            "if (cpm_red_read(x) > 3) { cpm_red_write(x, (cpm_red_read(x) - 1)); }\n");
}

TEST(Lower, CommentsStringsAndOtherIdentifiersUntouched) {
  EXPECT_EQ(lower("redundant_t int x;\n/* x = 1; */\ns = \"x = 5\";\ny = xx; // x\n"),
            "cpm_red_storage(x, int, 3);\n/* x = 1; */\ns = \"x = 5\";\ny = xx; // x\n");
}

TEST(Lower, DeclarationInsideCommentIgnored) {
  EXPECT_EQ(lower("/* redundant_t int q; */\nq = 1;\n"), "/* redundant_t int q; */\nq = 1;\n");
}

// Redundant variables have file scope: every access in the unit is routed.
TEST(Lower, AccessesAnywhereInUnitAreLowered) {
  EXPECT_EQ(lower("x = 1;\nredundant_t int x;\nx = 2;\n"),
            "cpm_red_write(x, (1));\ncpm_red_storage(x, int, 3);\ncpm_red_write(x, (2));\n");
}

TEST(Lower, MalformedAndDuplicateFlushThrough) {
  Diagnostics d;
  const std::string out = lower("redundant_t int x;\nredundant_t int x;\nredundant_t int a, b;\n", {}, &d);
  EXPECT_EQ(out, "cpm_red_storage(x, int, 3);\nredundant_t int x;\nredundant_t int a, b;\n");
  EXPECT_GE(d.size(), 2u);
  for (const auto& diag : d) EXPECT_EQ(diag.emitted_by, "cpm://redundancy/1.1");
}

TEST(Config, ReplicaCountAdjustment) {
  Diagnostics d;
  EXPECT_EQ(configured_replicas({}, &d), 3);
  EXPECT_TRUE(d.empty());
  EXPECT_EQ(configured_replicas({{"redundancy.replicas", "5"}}, &d), 5);
  EXPECT_TRUE(d.empty());
  EXPECT_EQ(configured_replicas({{"redundancy.replicas", "4"}}, &d), 5);
  EXPECT_EQ(d.size(), 1u);
  EXPECT_EQ(configured_replicas({{"redundancy.replicas", "1"}}, &d), 3);
  EXPECT_EQ(configured_replicas({{"redundancy.replicas", "many"}}, &d), 3);
  EXPECT_EQ(d.size(), 3u);
}

TEST(Config, ReplicasAppearInStorage) {
  EXPECT_EQ(lower("redundant_t int x;\n", {{"redundancy.replicas", "7"}}),
            "cpm_red_storage(x, int, 7);\n");
}

TEST(Config, AcceptedKeys) {
  RedundancyPass p;
  EXPECT_TRUE(p.accepts_key("replicas"));
  EXPECT_FALSE(p.accepts_key("colour"));
}

TEST(Property, PlainTextPassesThrough) {
  std::mt19937_64 rng(23);
  for (int i = 0; i < 500; ++i) {
    std::string t = gen::random_text(rng, 200);
    // Drop declarations so no variable is introduced.
    for (auto pos = t.find("redundant_t"); pos != std::string::npos; pos = t.find("redundant_t"))
      t.erase(pos, 11);
    ASSERT_EQ(lower(t), t);
  }
}

TEST(Property, NeverThrowsOnRandomText) {
  std::mt19937_64 rng(29);
  for (int i = 0; i < 1000; ++i) {
    EXPECT_NO_THROW(lower("redundant_t int x;\n" + gen::random_text(rng, 200)));
  }
}

TEST(Property, Idempotent) {
  std::mt19937_64 rng(31);
  for (int i = 0; i < 300; ++i) {
    const std::string once = lower("redundant_t int x;\n" + gen::random_text(rng, 120));
    EXPECT_EQ(lower(once), once);
  }
}

}  // namespace
}  // namespace cpm::redundancy
