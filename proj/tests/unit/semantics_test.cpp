#include <catch2/catch_amalgamated.hpp>

#include "refine/parser.hpp"
#include "refine/semantics.hpp"
#include "refine/testkit.hpp"

using namespace refine;

namespace {

ProgramDecl intVar(const char* name, long long lo, long long hi) {
  ProgramDecl d;
  d.vars.emplace_back(name, Sort(IntRange{lo, hi}));
  return d;
}

std::uint64_t stateOf(const StateSpace& space, long long x) {
  return *space.encode(State{Value(x)});
}

}  // namespace

TEST_CASE("skip denotes the identity") {
  ProgramDecl d = intVar("x", 0, 3);
  StateSpace space(d);
  Interp interp(space);
  const Denotation& den = interp.denote(skipStmt());
  for (std::size_t s = 0; s < space.size(); ++s) {
    REQUIRE(den.nrm[s].count() == 1);
    REQUIRE(den.nrm[s].test(s));
  }
  REQUIRE(den.err.none());
}

TEST_CASE("nondet assignment fans out over the inclusive range") {
  ProgramDecl d = intVar("x", 0, 2);
  StateSpace space(d);
  Interp interp(space);
  StmtRef s = parseProgramText("x := nondet(0,1);", d);
  const Denotation& den = interp.denote(s);
  for (std::size_t st = 0; st < space.size(); ++st) {
    REQUIRE(den.nrm[st].count() == 2);
    REQUIRE(den.nrm[st].test(stateOf(space, 0)));
    REQUIRE(den.nrm[st].test(stateOf(space, 1)));
  }
  REQUIRE(den.err.none());
}

TEST_CASE("failed assertions are error transitions") {
  ProgramDecl d = intVar("x", 0, 2);
  StateSpace space(d);
  Interp interp(space);
  const Denotation& den = interp.denote(parseProgramText("assert(false);", d));
  for (std::size_t st = 0; st < space.size(); ++st)
    REQUIRE(den.nrm[st].none());
  REQUIRE(den.err.count() == space.size());
}

TEST_CASE("loop fixpoint matches the hand-unrolled relation") {
  ProgramDecl d = intVar("x", 0, 3);
  StateSpace space(d);
  Interp interp(space);
  const Denotation& den =
      interp.denote(parseProgramText("while (x < 2) { x := x + 1; }", d));
  // from x=0,1,2 the loop exits at x=2; from x=3 it never runs
  for (long long x0 : {0, 1, 2}) {
    REQUIRE(den.nrm[stateOf(space, x0)].count() == 1);
    REQUIRE(den.nrm[stateOf(space, x0)].test(stateOf(space, 2)));
  }
  REQUIRE(den.nrm[stateOf(space, 3)].count() == 1);
  REQUIRE(den.nrm[stateOf(space, 3)].test(stateOf(space, 3)));
  REQUIRE(den.err.none());
}

TEST_CASE("divergence is unobserved") {
  ProgramDecl d = intVar("x", 0, 1);
  StateSpace space(d);
  Interp interp(space);
  const Denotation& den =
      interp.denote(parseProgramText("while (true) { skip }", d));
  for (std::size_t st = 0; st < space.size(); ++st)
    REQUIRE(den.nrm[st].none());
  REQUIRE(den.err.none());
}

TEST_CASE("out-of-sort results are error transitions, not wraparound") {
  ProgramDecl d = intVar("x", 0, 2);
  StateSpace space(d);
  Interp interp(space);
  SECTION("assignment") {
    const Denotation& den = interp.denote(parseProgramText("x := 9;", d));
    REQUIRE(den.err.count() == space.size());
    for (std::size_t st = 0; st < space.size(); ++st)
      REQUIRE(den.nrm[st].none());
  }
  SECTION("nondet with a partly out-of-sort range") {
    const Denotation& den =
        interp.denote(parseProgramText("x := nondet(0, 5);", d));
    REQUIRE(den.err.count() == space.size());  // 3..5 fall outside the sort
    for (std::size_t st = 0; st < space.size(); ++st)
      REQUIRE(den.nrm[st].count() == 3);  // 0..2 still happen
  }
  SECTION("inverted nondet range blocks") {
    const Denotation& den =
        interp.denote(parseProgramText("x := nondet(1, 0);", d));
    REQUIRE(den.err.none());
    for (std::size_t st = 0; st < space.size(); ++st)
      REQUIRE(den.nrm[st].none());
  }
}

TEST_CASE("terminal sets") {
  ProgramDecl d = intVar("x", 0, 3);
  StateSpace space(d);
  Interp interp(space);
  StateSet skipT = interp.terminalSet(stateOf(space, 1), skipStmt());
  REQUIRE(skipT.count() == 1);
  REQUIRE(skipT.test(stateOf(space, 1)));
  StateSet t = interp.terminalSet(stateOf(space, 0),
                                  parseProgramText("x := nondet(0,1);", d));
  REQUIRE(t.count() == 2);
  StateSet blocked = interp.terminalSet(stateOf(space, 3),
                                        parseProgramText("assume(x < 2);", d));
  REQUIRE(blocked.none());
}

TEST_CASE("configuration refinement") {
  ProgramDecl d = intVar("x", 0, 2);
  StateSpace space(d);
  Interp interp(space);
  StmtRef dec = parseProgramText("x := x - 1;", d);
  StmtRef pick = parseProgramText("x := nondet(0,1);", d);

  SECTION("skip at 0 is refined by decrement at 1") {
    REQUIRE(interp.configRefines(stateOf(space, 0), skipStmt(),
                                 stateOf(space, 1), dec));
  }
  SECTION("reflexivity, on random configurations") {
    GenConfig cfg;
    cfg.seed = 3;
    for (int i = 0; i < 50; ++i) {
      Rng rng(cfg.seed + static_cast<std::uint64_t>(i));
      StmtRef c = genStmt(rng, d, 3);
      std::uint64_t s = rng.below(space.size());
      REQUIRE(interp.configRefines(s, c, s, c));
    }
  }
  SECTION("a wider nondet is not refined from skip's configuration") {
    REQUIRE_FALSE(interp.configRefines(stateOf(space, 0), skipStmt(),
                                       stateOf(space, 0), pick));
  }
}

TEST_CASE("decomposition equivalence on known instances") {
  ProgramDecl d = intVar("x", 0, 2);
  StateSpace space(d);
  Interp interp(space);
  StmtRef dec = parseProgramText("x := x - 1;", d);

  DecompositionResult r = checkDecomposition(
      interp, stateOf(space, 0), skipStmt(), stateOf(space, 1), dec, 8);
  REQUIRE(r.refines);
  REQUIRE(r.allX);
  REQUIRE(r.agree);

  StmtRef pick = parseProgramText("x := nondet(0,1);", d);
  DecompositionResult r2 = checkDecomposition(
      interp, stateOf(space, 0), skipStmt(), stateOf(space, 0), pick, 8);
  REQUIRE_FALSE(r2.refines);
  REQUIRE_FALSE(r2.allX);
  REQUIRE(r2.agree);
  REQUIRE(r2.canonicalWitnessFalsifies);

  DecompositionResult r3 = checkDecomposition(
      interp, stateOf(space, 1), skipStmt(), stateOf(space, 1), skipStmt(), 8);
  REQUIRE(r3.refines);
  REQUIRE(r3.allX);

  REQUIRE_THROWS_AS(checkDecomposition(interp, 0, skipStmt(), 0, skipStmt(), 2),
                    CapExceeded);
}

TEST_CASE("wlp") {
  ProgramDecl d = intVar("x", 0, 3);
  StateSpace space(d);
  Interp interp(space);
  SECTION("wlp of skip is the postcondition") {
    StateSet x(space.size());
    x.set(stateOf(space, 2));
    REQUIRE(interp.wlp(skipStmt(), x) == x);
  }
  SECTION("error states drop out of wlp") {
    StateSet sigma = space.fullSet();
    StateSet w = interp.wlp(parseProgramText("assert(x < 2);", d), sigma);
    REQUIRE(w.count() == 2);
    REQUIRE(w.test(stateOf(space, 0)));
    REQUIRE(w.test(stateOf(space, 1)));
  }
  SECTION("wlp(c, all) is the complement of err(c)") {
    GenConfig cfg;
    cfg.seed = 9;
    for (int i = 0; i < 80; ++i) {
      Rng rng(cfg.seed + static_cast<std::uint64_t>(i) * 31);
      StmtRef c = genStmt(rng, d, 3, true);
      REQUIRE(interp.wlp(c, space.fullSet()) == ~interp.denote(c).err);
    }
  }
  SECTION("wlp is monotone in the postcondition") {
    GenConfig cfg;
    cfg.seed = 10;
    for (int i = 0; i < 80; ++i) {
      Rng rng(cfg.seed + static_cast<std::uint64_t>(i) * 37);
      StmtRef c = genStmt(rng, d, 3, true);
      StateSet x1(space.size()), x2(space.size());
      for (std::size_t s = 0; s < space.size(); ++s) {
        if (rng.chance(1, 2)) x1.set(s);
        if (x1.test(s) || rng.chance(1, 2)) x2.set(s);
      }
      REQUIRE(interp.wlp(c, x1).is_subset_of(interp.wlp(c, x2)));
    }
  }
}

TEST_CASE("nondet wlp needs every outcome inside the postcondition") {
  ProgramDecl d = intVar("y", 0, 3);
  StateSpace space(d);
  Interp interp(space);
  StateSet x(space.size());
  x.set(stateOf(space, 1));
  StateSet w = interp.wlp(parseProgramText("y := nondet(0,2);", d), x);
  REQUIRE(w.none());
}

TEST_CASE("denotational laws hold exactly") {
  ProgramDecl d;
  d.vars.emplace_back("x", Sort(IntRange{0, 2}));
  d.vars.emplace_back("s", Sort(SetOver{{0, 1}}));
  StateSpace space(d);
  Interp interp(space);
  GenConfig cfg;
  cfg.seed = 77;
  for (int i = 0; i < 60; ++i) {
    Rng rng(cfg.seed + static_cast<std::uint64_t>(i) * 131);
    StmtRef a = genStmt(rng, d, 2, true);
    StmtRef b = genStmt(rng, d, 2, true);
    StmtRef c = genStmt(rng, d, 2, true);
    // raw sequence nodes, so the law is tested rather than canonicalization
    REQUIRE(interp.denote(seqStmt(seqStmt(a, b), c)) ==
            interp.denote(seqStmt(a, seqStmt(b, c))));
    REQUIRE(interp.denote(choiceStmt(a, b)) == interp.denote(choiceStmt(b, a)));
    REQUIRE(interp.denote(seqStmt(skipStmt(), c)) == interp.denote(c));
    REQUIRE(interp.denote(seqStmt(c, skipStmt())) == interp.denote(c));
  }
}

TEST_CASE("poset fact: inclusion is equivalent to upper-set containment") {
  Rng rng(123);
  for (int i = 0; i < 200; ++i) {
    const std::size_t n = 6;
    StateSet a(n), b(n);
    for (std::size_t k = 0; k < n; ++k) {
      if (rng.chance(1, 2)) a.set(k);
      if (rng.chance(1, 2)) b.set(k);
    }
    bool lhs = b.is_subset_of(a);
    bool rhs = true;
    for (std::uint64_t mask = 0; mask < (1u << n); ++mask) {
      StateSet c = subsetFromMask(mask, n);
      if (a.is_subset_of(c) && !b.is_subset_of(c)) {
        rhs = false;
        break;
      }
    }
    REQUIRE(lhs == rhs);
  }
}

TEST_CASE("loops are the limit of monotone unrollings") {
  // independent oracle: iterate the loop equation from the empty relation
  // and compare the limit with the interpreter's fixpoint
  ProgramDecl d;
  d.vars.emplace_back("x", Sort(IntRange{0, 3}));
  d.vars.emplace_back("y", Sort(IntRange{0, 1}));
  StateSpace space(d);
  Interp interp(space);
  GenConfig cfg;
  cfg.seed = 321;
  for (int i = 0; i < 40; ++i) {
    Rng rng(cfg.seed + static_cast<std::uint64_t>(i) * 613);
    BoolRef guard = genBoolExpr(rng, d, 1);
    StmtRef body = genStmt(rng, d, 3, true);
    GuardSets gs = evalGuard(guard, space);
    const Denotation& db = interp.denote(body);
    const std::size_t n = space.size();

    Denotation prev(n);  // bottom: no terminations, no errors
    for (;;) {
      Denotation next(n);
      next.err = gs.fault;
      for (std::size_t s = 0; s < n; ++s) {
        if (gs.no.test(s)) next.nrm[s].set(s);
        if (gs.yes.test(s)) {
          if (db.err.test(s)) next.err.set(s);
          for (std::size_t m = db.nrm[s].find_first(); m != StateSet::npos;
               m = db.nrm[s].find_next(m)) {
            next.nrm[s] |= prev.nrm[m];
            if (prev.err.test(m)) next.err.set(s);
          }
        }
      }
      // each iterate grows monotonically
      for (std::size_t s = 0; s < n; ++s)
        REQUIRE(prev.nrm[s].is_subset_of(next.nrm[s]));
      REQUIRE(prev.err.is_subset_of(next.err));
      if (next == prev) break;
      prev = std::move(next);
    }
    REQUIRE(prev == interp.denote(whileStmt(guard, body)));
  }
}
