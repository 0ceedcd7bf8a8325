#include <catch2/catch_amalgamated.hpp>

#include "refine/parser.hpp"
#include "refine/pretty.hpp"
#include "refine/state.hpp"
#include "refine/testkit.hpp"

using namespace refine;

namespace {

ProgramDecl declXY() {
  ProgramDecl d;
  d.vars.emplace_back("x", Sort(IntRange{0, 7}));
  d.vars.emplace_back("s", Sort(SetOver{{0, 1, 2, 3}}));
  return d;
}

}  // namespace

TEST_CASE("parsing the masking program") {
  ProgramDecl d;
  d.vars.emplace_back("x", Sort(IntRange{0, 7}));
  StmtRef s = parseProgramText("x := 0; x := x | (1 << 1);", d);
  REQUIRE(s->kind == StmtKind::Seq);
  auto [first, rest] = splitSeq(s);
  REQUIRE(first->kind == StmtKind::Assign);
  REQUIRE(rest->kind == StmtKind::Assign);
  REQUIRE(rest->e1->kind == ExprKind::BitOr);
  REQUIRE(rest->e1->b->kind == ExprKind::Shl);
}

TEST_CASE("skip parses to the identity program") {
  ProgramDecl d = declXY();
  StmtRef s = parseProgramText("skip", d);
  REQUIRE(s->kind == StmtKind::Skip);
}

TEST_CASE("set union assignment parses") {
  ProgramDecl d = declXY();
  StmtRef s = parseProgramText("s := s \\/ {2};", d);
  REQUIRE(s->kind == StmtKind::Assign);
  REQUIRE(s->e1->kind == ExprKind::SetUnion);
  REQUIRE(s->e1->b->kind == ExprKind::SetLit);
  // the utf-8 union sign is an alias
  StmtRef s2 = parseProgramText("s := s ∪ {2};", d);
  REQUIRE(structEq(s, s2));
}

TEST_CASE("if/else desugars to guarded choice") {
  ProgramDecl d = declXY();
  StmtRef s = parseProgramText(
      "if (x < 2) then { x := x + 1; } else { x := 0; }", d);
  REQUIRE(s->kind == StmtKind::Choice);
  REQUIRE(splitSeq(s->s1).first->kind == StmtKind::Test);
  REQUIRE(splitSeq(s->s2).first->kind == StmtKind::Test);
}

TEST_CASE("load-time rejection of bad programs") {
  ProgramDecl d = declXY();
  REQUIRE_THROWS_AS(parseProgramText("y := 1;", d), LoadError);
  REQUIRE_THROWS_AS(parseProgramText("x := {1};", d), LoadError);
  REQUIRE_THROWS_AS(parseProgramText("x := 1 +;", d), LoadError);
  REQUIRE_THROWS_AS(parseProgramText("s := nondet(0,1);", d), LoadError);
}

TEST_CASE("expression evaluation") {
  ProgramDecl d = declXY();
  StateSpace space(d);
  // x=3, s={}
  State st{Value(3), Value(SetVal{})};
  auto idx = space.encode(st);
  REQUIRE(idx);
  EvalEnv env{&space, *idx, nullptr};

  SECTION("bit arithmetic") {
    ExprRef e = mkExpr(ExprKind::BitOr, mkExpr(ExprKind::Shl, intLit(1), intLit(1)),
                       mkExpr(ExprKind::Shl, intLit(1), intLit(2)));
    auto v = evalExpr(e, env);
    REQUIRE(v);
    REQUIRE(v->asInt() == 6);
  }
  SECTION("variable lookup") {
    auto v = evalExpr(varRef("x"), env);
    REQUIRE(v);
    REQUIRE(v->asInt() == 3);
  }
  SECTION("out-of-bounds indexing faults") {
    ProgramDecl d2;
    d2.vars.emplace_back("x", Sort(IntRange{0, 7}));
    d2.constants["A"] = Value(ArrayVal{{1, 2, 3, 0, 1, 2, 3, 0}});
    StateSpace space2(d2);
    EvalEnv env2{&space2, 0, nullptr};
    auto v = evalExpr(mkExpr(ExprKind::ArrayIndex, varRef("A"), intLit(9)), env2);
    REQUIRE_FALSE(v);
    auto ok = evalExpr(mkExpr(ExprKind::ArrayIndex, varRef("A"), intLit(2)), env2);
    REQUIRE(ok);
    REQUIRE(ok->asInt() == 3);
  }
  SECTION("negative shifts fault") {
    auto v = evalExpr(mkExpr(ExprKind::Shl, intLit(1), intLit(-1)), env);
    REQUIRE_FALSE(v);
  }
  SECTION("sum of powers of two") {
    ExprRef e = mkExpr(ExprKind::Sum2, setLit(SetVal{{1, 2}}));
    auto v = evalExpr(e, env);
    REQUIRE(v);
    REQUIRE(v->asInt() == 6);
  }
}

TEST_CASE("sort enumeration round-trips") {
  Rng rng(11);
  std::vector<Sort> sorts{Sort(IntRange{-2, 3}), Sort(SetOver{{0, 1, 5}}),
                          Sort(ArrayOf{3, IntRange{0, 2}})};
  for (const Sort& s : sorts) {
    for (std::uint64_t i = 0; i < s.cardinality(); ++i) {
      Value v = s.valueAt(i);
      auto back = s.indexOf(v);
      REQUIRE(back);
      REQUIRE(*back == i);
      REQUIRE(s.contains(v));
    }
  }
}

TEST_CASE("parse of pretty-printed programs is structural identity") {
  GenConfig cfg;
  cfg.seed = 5;
  for (int i = 0; i < 300; ++i) {
    Rng rng(cfg.seed + static_cast<std::uint64_t>(i) * 7919);
    ProgramDecl d = genDecl(rng, cfg, "v");
    StmtRef s = genStmt(rng, d, 4, true);
    std::string text = printStmt(s);
    INFO(text);
    StmtRef back = parseProgramText(text, d);
    REQUIRE(structEq(s, back));
  }
}

TEST_CASE("evaluation stays in the expression's kind") {
  // the sort-preservation property: an in-sort state evaluates every
  // sort-checked expression to a value of that expression's kind, or faults
  GenConfig cfg;
  cfg.seed = 23;
  int evaluated = 0;
  for (int i = 0; i < 200; ++i) {
    Rng rng(cfg.seed + static_cast<std::uint64_t>(i) * 104729);
    ProgramDecl d = genDecl(rng, cfg, "v");
    StateSpace space(d);
    ExprRef e = rng.chance(1, 2) ? genIntExpr(rng, d, 3) : genSetExpr(rng, d, 3);
    SortCtx ctx{&d, {}};
    Sort sort = sortOfExpr(e, ctx);
    for (std::size_t st = 0; st < space.size(); ++st) {
      EvalEnv env{&space, st, nullptr};
      auto v = evalExpr(e, env);
      if (!v) continue;
      ++evaluated;
      if (sort.kind() == Sort::Kind::Int) REQUIRE(v->isInt());
      if (sort.kind() == Sort::Kind::Set) REQUIRE(v->isSet());
    }
  }
  REQUIRE(evaluated > 100);
}
