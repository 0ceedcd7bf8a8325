#include <catch2/catch_amalgamated.hpp>

#include "refine/execpred.hpp"
#include "refine/parser.hpp"
#include "refine/properties.hpp"

using namespace refine;

namespace {

struct HighSide {
  ProgramDecl decl;
  std::shared_ptr<StateSpace> space;
  std::shared_ptr<Interp> interp;

  explicit HighSide(bool sets = true) {
    if (sets) {
      decl.vars.emplace_back("s", Sort(SetOver{{0, 1, 2, 3}}));
      decl.vars.emplace_back("j", Sort(IntRange{0, 8}));
    } else {
      decl.vars.emplace_back("y", Sort(IntRange{0, 3}));
    }
    space = std::make_shared<StateSpace>(decl);
    interp = std::make_shared<Interp>(*space);
  }

  StateSet ground(const std::string& text) {
    Parser p(text);
    AssertRef a = p.parseAssertionChecked(decl, nullptr);
    LogicalEnv env;
    return groundAssert(a, *space, env);
  }
  StmtRef prog(const std::string& text) { return parseProgramText(text, decl); }
};

}  // namespace

TEST_CASE("the execution predicate quantifies existentially") {
  HighSide h(false);
  SECTION("true with skip holds exactly when X is nonempty") {
    StateSet t = h.space->fullSet();
    StateSet x(h.space->size());
    REQUIRE_FALSE(execHolds(t, skipStmt(), *h.interp, x));
    x.set(1);
    REQUIRE(execHolds(t, skipStmt(), *h.interp, x));
  }
  SECTION("false never holds") {
    StateSet f(h.space->size());
    REQUIRE_FALSE(execHolds(f, h.prog("y := nondet(0,2);"), *h.interp,
                            h.space->fullSet()));
  }
}

TEST_CASE("single-outcome assignment pins the required X membership") {
  HighSide h;
  StateSet pre = h.ground("s == {} && j == 0");
  StmtRef prog = h.prog("s := s \\/ {1};");
  StateSet x(h.space->size());
  REQUIRE_FALSE(execHolds(pre, prog, *h.interp, x));
  x.set(*h.space->encode(State{Value(makeSet({1})), Value(0)}));
  REQUIRE(execHolds(pre, prog, *h.interp, x));
}

TEST_CASE("assignment rule computes the strongest-post image") {
  HighSide h;
  StmtRef prog = h.prog("s := {}; s := s \\/ {1}; s := s \\/ {2};");
  GroundExec p{h.space->fullSet(), prog};
  RuleResult r = applyRule(p, ruleApp(ExecRule::Assign), *h.interp, {});
  REQUIRE(ruleOk(r));
  const GroundExec& g = std::get<GroundExec>(r);
  REQUIRE(g.states == h.ground("s == {}"));
  REQUIRE(structEq(g.prog, h.prog("s := s \\/ {1}; s := s \\/ {2};")));
}

TEST_CASE("nondet rule picks a value angelically") {
  HighSide h(false);
  GroundExec p{h.space->fullSet(), h.prog("y := nondet(0,2);")};
  RuleApp r = ruleApp(ExecRule::Nondet);
  r.nondetValue = intLit(1);
  RuleResult res = applyRule(p, r, *h.interp, {});
  REQUIRE(ruleOk(res));
  const GroundExec& g = std::get<GroundExec>(res);
  REQUIRE(g.prog->kind == StmtKind::Skip);
  REQUIRE(g.states == h.ground("y == 1"));

  SECTION("values outside the range are rejected with a witness") {
    RuleApp bad = ruleApp(ExecRule::Nondet);
    bad.nondetValue = intLit(3);
    RuleResult res2 = applyRule(p, bad, *h.interp, {});
    REQUIRE_FALSE(ruleOk(res2));
    REQUIRE(std::get<RuleError>(res2).kind == RuleError::NondetOutOfRange);
  }
}

TEST_CASE("loop rules check their guard side conditions") {
  HighSide h;
  StmtRef loop = h.prog("while (j < 8) { s := s \\/ {1}; j := j + 1; }");
  SECTION("exit needs the guard refuted") {
    GroundExec p{h.ground("j == 8"), loop};
    RuleResult r = applyRule(p, ruleApp(ExecRule::WhileEnd), *h.interp, {});
    REQUIRE(ruleOk(r));
    REQUIRE(std::get<GroundExec>(r).prog->kind == StmtKind::Skip);
    GroundExec bad{h.ground("j == 3"), loop};
    RuleResult r2 = applyRule(bad, ruleApp(ExecRule::WhileEnd), *h.interp, {});
    REQUIRE_FALSE(ruleOk(r2));
    REQUIRE(std::get<RuleError>(r2).kind == RuleError::SideConditionFails);
    REQUIRE(std::get<RuleError>(r2).witness.has_value());
  }
  SECTION("unrolling needs the guard implied") {
    GroundExec p{h.ground("s == {} && j == 0"), loop};
    RuleResult r = applyRule(p, ruleApp(ExecRule::WhileUnroll), *h.interp, {});
    REQUIRE(ruleOk(r));
    const GroundExec& g = std::get<GroundExec>(r);
    auto [head, rest] = splitSeq(g.prog);
    REQUIRE(head->kind == StmtKind::Assign);  // the unrolled body comes first
    REQUIRE(g.states == p.states);
  }
}

TEST_CASE("head mismatches are reported") {
  HighSide h;
  GroundExec p{h.space->fullSet(), h.prog("s := {};")};
  RuleResult r = applyRule(p, ruleApp(ExecRule::WhileEnd), *h.interp, {});
  REQUIRE_FALSE(ruleOk(r));
  REQUIRE(std::get<RuleError>(r).kind == RuleError::HeadMismatch);
}

TEST_CASE("assume rule demands the guard on every state") {
  HighSide h;
  GroundExec ok{h.ground("j == 2"), h.prog("assume(j < 8);")};
  REQUIRE(ruleOk(applyRule(ok, ruleApp(ExecRule::Assume), *h.interp, {})));
  GroundExec bad{h.space->fullSet(), h.prog("assume(j < 0);")};
  RuleResult r = applyRule(bad, ruleApp(ExecRule::Assume), *h.interp, {});
  REQUIRE_FALSE(ruleOk(r));
  REQUIRE(std::get<RuleError>(r).witness.has_value());
}

TEST_CASE("the assert rule conjoins the asserted fact") {
  HighSide h;
  GroundExec p{h.ground("j == 2 || j == 8"),
               h.prog("assert(j < 8); s := {};")};
  RuleResult r = applyRule(p, ruleApp(ExecRule::AssertStep), *h.interp, {});
  REQUIRE(ruleOk(r));
  const GroundExec& g = std::get<GroundExec>(r);
  REQUIRE(g.states == h.ground("j == 2"));
  REQUIRE(structEq(g.prog, h.prog("s := {};")));
}

TEST_CASE("angelic triples") {
  HighSide h(false);
  SECTION("a nondet can reach the chosen value") {
    AngelicResult r = angelicValid(*h.interp, h.space->fullSet(),
                                   h.prog("y := nondet(0,2);"), h.ground("y == 1"));
    REQUIRE(r.valid);
  }
  SECTION("skip preserves any assertion") {
    StateSet p = h.ground("y == 2");
    REQUIRE(angelicValid(*h.interp, p, skipStmt(), p).valid);
  }
  SECTION("a blocking test has no successful run") {
    AngelicResult r = angelicValid(*h.interp, h.space->fullSet(),
                                   h.prog("assume(false);"), h.space->fullSet());
    REQUIRE_FALSE(r.valid);
    REQUIRE(r.witness.has_value());
  }
}

TEST_CASE("focus rule replaces the head by an angelic step") {
  HighSide h(false);
  GroundExec p{h.space->fullSet(), h.prog("y := nondet(0,2); y := y + 1;")};
  RuleApp r = ruleApp(ExecRule::FocusAngelic);
  Parser ap("y == 1");
  r.focusIntermediate = ap.parseAssertionChecked(h.decl, nullptr);
  RuleResult res = applyRule(p, r, *h.interp, {});
  REQUIRE(ruleOk(res));
  const GroundExec& g = std::get<GroundExec>(res);
  REQUIRE(g.states == h.ground("y == 1"));
  REQUIRE(structEq(g.prog, h.prog("y := y + 1;")));
}

TEST_CASE("exec holds monotonically in X") {
  HighSide h;
  GenConfig cfg;
  cfg.seed = 31;
  Rng rng(cfg.seed);
  for (int i = 0; i < 40; ++i) {
    StmtRef c = genStmt(rng, h.decl, 3);
    StateSet p(h.space->size());
    StateSet x1(h.space->size()), x2(h.space->size());
    for (std::size_t s = 0; s < h.space->size(); ++s) {
      if (rng.chance(1, 2)) p.set(s);
      if (rng.chance(1, 3)) x1.set(s);
      if (x1.test(s) || rng.chance(1, 3)) x2.set(s);
    }
    if (execHolds(p, c, *h.interp, x1)) REQUIRE(execHolds(p, c, *h.interp, x2));
  }
}

TEST_CASE("every rule is sound for every X, on generated instances") {
  GenConfig cfg;
  cfg.seed = 404;
  PropertyOutcome out = runExecRules(cfg, 25);
  INFO((out.failures.empty() ? std::string() : out.failures.front()));
  REQUIRE(out.failed == 0);
  REQUIRE(out.count == 25 * 11);
}
