#include <catch2/catch_amalgamated.hpp>

#include <fstream>
#include <sstream>

#include "refine/prover.hpp"

using namespace refine;

namespace {

std::string slurp(const std::string& name) {
  std::ifstream in(std::string(CASES_DIR) + "/" + name);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ProofReport checkText(const std::string& text, bool oracle = true) {
  ProofFile f = parseProofFile(text);
  ProofChecker checker(f);
  return checker.run(oracle);
}

const char* kSkipProof = R"(
lowvar x : int[0..1];
highvar y : int[0..1];
high { skip }
pre: Exec[ true ; @high ] && x == 0
post: Exec[ true ; skip ] && x == 0
proof {
  skip
}
)";

}  // namespace

TEST_CASE("a trivial skip proof certifies with one entailment") {
  ProofReport rep = checkText(kSkipProof);
  REQUIRE(rep.outcome == ProofReport::Certified);
  REQUIRE(rep.obligations.size() == 1);
  REQUIRE(rep.oracleNote.find("confirmed") != std::string::npos);
}

TEST_CASE("the regression proofs certify and the oracle agrees") {
  for (const char* name :
       {"nondet.proof", "bitmask.proof", "bitmask_loop.proof",
        "bitmask_loop_init.proof", "bitmask_loop_two.proof",
        "array_assert.proof"}) {
    DYNAMIC_SECTION(name) {
      ProofReport rep = checkText(slurp(name));
      for (const auto& ob : rep.obligations) {
        INFO(ob.desc << ": " << ob.message);
        CHECK(ob.ok);
      }
      INFO(rep.structuralError);
      REQUIRE(rep.outcome == ProofReport::Certified);
      REQUIRE(rep.exitCode() == 0);
    }
  }
}

TEST_CASE("a mutated loop invariant fails exactly one named obligation") {
  std::string text = slurp("bitmask_loop.proof");
  const std::string from = "// @invariant exists l : set{0..3}, n : int[0..8].";
  const std::string to = "// @invariant exists l : set{0..3}, n : int[0..7].";
  auto pos = text.find(from);
  REQUIRE(pos != std::string::npos);
  text.replace(pos, from.size(), to);
  ProofReport rep = checkText(text, false);
  REQUIRE(rep.outcome == ProofReport::ObligationFailed);
  int failures = 0;
  std::string failedDesc;
  for (const auto& ob : rep.obligations)
    if (!ob.ok) {
      ++failures;
      failedDesc = ob.desc;
    }
  REQUIRE(failures == 1);
  REQUIRE(failedDesc == "loop invariant preservation");
}

TEST_CASE("annotation mutations never go unnoticed") {
  // weakening or skewing any single annotation of the straight-line proof
  // must fail at least one obligation
  const std::string original = slurp("bitmask.proof");
  const std::vector<std::pair<std::string, std::string>> mutations = {
      {"Exec[ s == {} ; s := s \\/ {a0}; s := s \\/ {a1}; ] && x == 0",
       "Exec[ s == {} ; s := s \\/ {a0}; s := s \\/ {a1}; ] && x == 1"},
      {"Exec[ s == {a0} ; s := s \\/ {a1}; ] && x == sum2({a0})",
       "Exec[ s == {a0, a1} ; s := s \\/ {a1}; ] && x == sum2({a0})"},
      {"Exec[ s == {a0, a1} ; skip ] && x == sum2({a0, a1})",
       "Exec[ s == {a0, a1} ; skip ] && x == sum2({a0})"},
      {"// @assert Exec[ s == {} ; s := s \\/ {a0}; s := s \\/ {a1}; ]\n",
       "// @assert Exec[ s == {a1} ; s := s \\/ {a0}; s := s \\/ {a1}; ]\n"},
  };
  for (std::size_t m = 0; m < mutations.size(); ++m) {
    DYNAMIC_SECTION("mutation " << m) {
      std::string text = original;
      auto pos = text.find(mutations[m].first);
      REQUIRE(pos != std::string::npos);
      text.replace(pos, mutations[m].first.size(), mutations[m].second);
      ProofReport rep = checkText(text, false);
      REQUIRE(rep.outcome == ProofReport::ObligationFailed);
    }
  }
}

TEST_CASE("structural errors are reported as such") {
  SECTION("pending exec directives before a statement") {
    ProofReport rep = checkText(R"(
lowvar x : int[0..1];
highvar y : int[0..1];
high { y := 0; }
pre: Exec[ true ; @high ]
post: Exec[ true ; skip ]
proof {
  // @exec assign
  x := 0;
}
)");
    REQUIRE(rep.outcome == ProofReport::StructuralError);
    REQUIRE(rep.exitCode() == 2);
  }
  SECTION("a while loop without an invariant") {
    ProofReport rep = checkText(R"(
lowvar x : int[0..2];
highvar y : int[0..1];
high { skip }
pre: Exec[ true ; @high ]
post: Exec[ true ; skip ]
proof {
  while (x < 2) { x := x + 1; }
}
)");
    REQUIRE(rep.outcome == ProofReport::StructuralError);
  }
  SECTION("exintro without a leading existential") {
    ProofReport rep = checkText(R"(
lowvar x : int[0..1];
highvar y : int[0..1];
high { skip }
pre: Exec[ true ; @high ]
post: Exec[ true ; skip ]
proof {
  // @exintro l
}
)");
    REQUIRE(rep.outcome == ProofReport::StructuralError);
  }
}

TEST_CASE("a low statement that can fault fails its obligation") {
  ProofReport rep = checkText(R"(
lowvar x : int[0..1];
highvar y : int[0..1];
high { skip }
pre: Exec[ true ; @high ]
post: Exec[ true ; skip ]
proof {
  x := x + 1;
}
)",
                              false);
  REQUIRE(rep.outcome == ProofReport::ObligationFailed);
  bool sawFault = false;
  for (const auto& ob : rep.obligations)
    if (!ob.ok && ob.message.find("fault") != std::string::npos) sawFault = true;
  REQUIRE(sawFault);
}

TEST_CASE("choice blocks join at an explicit annotation") {
  ProofReport rep = checkText(R"(
lowvar x : int[0..3];
highvar y : int[0..1];
high { skip }
pre: Exec[ true ; @high ] && x == 0
post: exists n : int[0..2]. Exec[ true ; skip ] && x == n
proof {
  choice(
    x := 1;
  ,
    x := 2;
  )
  // @assert exists n : int[0..2]. Exec[ true ; @high ] && x == n
}
)");
  REQUIRE(rep.outcome == ProofReport::Certified);
}

TEST_CASE("exec side-condition failures carry a counterexample state") {
  ProofReport rep = checkText(R"(
lowvar x : int[0..1];
highvar j : int[0..3];
high { assume(j < 0); }
pre: Exec[ true ; @high ]
post: Exec[ true ; skip ]
proof {
  // @exec assume
  // @assert Exec[ true ; skip ]
}
)",
                              false);
  REQUIRE(rep.outcome == ProofReport::ObligationFailed);
  REQUIRE(rep.obligations.size() >= 1);
  REQUIRE_FALSE(rep.obligations[0].ok);
  REQUIRE(rep.obligations[0].message.find("rule failure") != std::string::npos);
}

TEST_CASE("pure head rewrites, semantic and certified variants") {
  const char* base = R"(
lowvar x : int[0..3];
highvar y : int[0..3];
high { choice(y := 1; , y := 2;); y := y + 1; }
pre: Exec[ true ; @high ]
post: Exec[ y == 2 ; skip ]
proof {
  // @exec pure -> { y := 1; }
  // @exec assign
  // @exec assign
  // @assert Exec[ y == 2 ; skip ]
  x := 0;
}
)";
  SECTION("semantic refinement certificate") {
    ProofReport rep = checkText(base);
    for (const auto& ob : rep.obligations) {
      INFO(ob.desc << ": " << ob.message);
      CHECK(ob.ok);
    }
    REQUIRE(rep.outcome == ProofReport::Certified);
  }
  SECTION("nested-chain certificate") {
    std::string text(base);
    auto pos = text.find("pure -> { y := 1; }");
    text.replace(pos, 19, "pure -> { y := 1; } via [ choice-left ]");
    ProofReport rep = checkText(text);
    REQUIRE(rep.outcome == ProofReport::Certified);
  }
  SECTION("a non-refining replacement is rejected") {
    std::string text(base);
    auto pos = text.find("pure -> { y := 1; }");
    text.replace(pos, 19, "pure -> { y := 3; }");
    ProofReport rep = checkText(text, false);
    REQUIRE(rep.outcome == ProofReport::ObligationFailed);
  }
}

TEST_CASE("the focus directive runs an angelic block") {
  ProofReport rep = checkText(R"(
lowvar x : int[0..1];
highvar y : int[0..3];
high { y := nondet(0,2); y := y + 1; }
pre: Exec[ true ; @high ]
post: Exec[ y == 3 ; skip ]
proof {
  // @exec focus { y == 2 }
  // @exec assign
  // @assert Exec[ y == 3 ; skip ]
  skip
}
)");
  for (const auto& ob : rep.obligations) {
    INFO(ob.desc << ": " << ob.message);
    CHECK(ob.ok);
  }
  REQUIRE(rep.outcome == ProofReport::Certified);
}

TEST_CASE("statement obligations document Exec framing") {
  ProofFile f = parseProofFile(slurp("bitmask.proof"));
  ProofChecker checker(f);
  checker.run(false);
  bool framed = false;
  for (const auto& ob : checker.obligations())
    if (ob.desc.find("(Exec atoms framed)") != std::string::npos) framed = true;
  REQUIRE(framed);
}

TEST_CASE("nested loops certify with inner and outer invariants") {
  ProofReport rep = checkText(R"(
lowvar x : int[0..4];
lowvar i : int[0..2];
lowvar k : int[0..2];
highvar y : int[0..4];
highvar j : int[0..4];
high { y := 0; j := 0; while (j < 4) { y := y + 1; j := j + 1; } }
pre: Exec[ true ; @high ]
post: Exec[ y == 4 ; skip ] && x == 4
proof {
  // @exec assign
  // @exec assign
  // @assert Exec[ y == 0 && j == 0 ; while (j < 4) { y := y + 1; j := j + 1; } ]
  x := 0;
  i := 0;
  // @invariant exists n : int[0..2]. Exec[ y == 2 * n && j == 2 * n ; while (j < 4) { y := y + 1; j := j + 1; } ] && x == 2 * n && i == n
  while (i < 2) {
    k := 0;
    // @invariant exists n : int[0..1], c : int[0..2]. Exec[ y == 2 * n + c && j == 2 * n + c ; while (j < 4) { y := y + 1; j := j + 1; } ] && x == 2 * n + c && i == n && k == c
    while (k < 2) {
      // @exec while-unroll
      // @exec assign
      // @exec assign
      // @assert exists n : int[0..1], c : int[0..2]. c < 2 && Exec[ y == 2 * n + c + 1 && j == 2 * n + c + 1 ; while (j < 4) { y := y + 1; j := j + 1; } ] && x == 2 * n + c && i == n && k == c
      x := x + 1;
      k := k + 1;
    }
    i := i + 1;
  }
  // @exec while-end
}
)");
  for (const auto& ob : rep.obligations) {
    INFO(ob.desc << ": " << ob.message);
    CHECK(ob.ok);
  }
  REQUIRE(rep.outcome == ProofReport::Certified);
}
