#pragma once

#include <sstream>
#include <string>
#include <vector>

#include "refine/prover.hpp"

namespace refine {

// ---------------------------------------------------------------------------
// Deterministic RNG (splitmix64). All randomness in the tool flows through
// explicit seeds; identical (seed, config) yields identical artifacts.
// ---------------------------------------------------------------------------

class Rng {
public:
  explicit Rng(std::uint64_t seed) : s_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (s_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  std::uint64_t below(std::uint64_t n) { return n ? next() % n : 0; }
  long long range(long long lo, long long hi) {
    return lo + static_cast<long long>(below(static_cast<std::uint64_t>(hi - lo + 1)));
  }
  bool chance(unsigned num, unsigned den) { return below(den) < num; }

private:
  std::uint64_t s_;
};

struct GenWeights {
  // inner-node frequencies
  unsigned seq = 1, choice = 1, loop = 1, leaf = 1;
  // leaf split between assignments and guards
  unsigned assignLeaf = 7, guardLeaf = 3;
};

struct GenConfig {
  std::uint64_t seed = 0;
  int maxDepth = 3;
  int maxVars = 2;
  std::size_t maxStates = 12;  // per-space cap for generated declarations
  bool allowAssert = false;    // asserts excluded from loop bodies by default
  unsigned perturbPercent = 0; // share of deliberately perturbed instances
  std::vector<Sort> sortPool;  // empty: the default pool below
  GenWeights weights;
};

inline const std::vector<Sort>& defaultSortPool() {
  static const std::vector<Sort> pool{
      Sort(IntRange{0, 1}), Sort(IntRange{0, 2}), Sort(IntRange{0, 3}),
      Sort(SetOver{{0, 1}})};
  return pool;
}

// ---------------------------------------------------------------------------
// Generators. Everything produced is sort-correct by construction.
// ---------------------------------------------------------------------------

inline ProgramDecl genDecl(Rng& rng, const GenConfig& cfg,
                           const std::string& prefix) {
  const std::vector<Sort>& pool =
      cfg.sortPool.empty() ? defaultSortPool() : cfg.sortPool;
  ProgramDecl decl;
  std::size_t states = 1;
  int vars = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(cfg.maxVars)));
  for (int i = 0; i < vars; ++i) {
    Sort s = pool[rng.below(pool.size())];
    if (states * s.cardinality() > cfg.maxStates) {
      if (states * 2 <= cfg.maxStates)
        s = Sort(IntRange{0, 1});
      else
        break;
    }
    states *= s.cardinality();
    decl.vars.emplace_back(prefix + std::to_string(i), s);
  }
  if (decl.vars.empty()) decl.vars.emplace_back(prefix + "0", Sort(IntRange{0, 1}));
  return decl;
}

inline std::vector<int> varsOfKind(const ProgramDecl& decl, Sort::Kind k) {
  std::vector<int> out;
  for (std::size_t i = 0; i < decl.vars.size(); ++i)
    if (decl.vars[i].second.kind() == k) out.push_back(static_cast<int>(i));
  return out;
}

inline ExprRef genIntExpr(Rng& rng, const ProgramDecl& decl, int depth) {
  auto ints = varsOfKind(decl, Sort::Kind::Int);
  if (depth <= 0 || rng.chance(2, 5)) {
    if (!ints.empty() && rng.chance(3, 5))
      return varRef(decl.vars[static_cast<std::size_t>(
                                  ints[rng.below(ints.size())])]
                        .first);
    return intLit(rng.range(-1, 4));
  }
  switch (rng.below(5)) {
    case 0: return mkExpr(ExprKind::Add, genIntExpr(rng, decl, depth - 1),
                          genIntExpr(rng, decl, depth - 1));
    case 1: return mkExpr(ExprKind::Sub, genIntExpr(rng, decl, depth - 1),
                          genIntExpr(rng, decl, depth - 1));
    case 2: return mkExpr(ExprKind::Mul, genIntExpr(rng, decl, depth - 1),
                          intLit(rng.range(0, 2)));
    case 3: return mkExpr(ExprKind::BitOr, genIntExpr(rng, decl, depth - 1),
                          genIntExpr(rng, decl, depth - 1));
    default: return mkExpr(ExprKind::Shl, intLit(rng.range(0, 2)),
                           genIntExpr(rng, decl, depth - 1));
  }
}

inline ExprRef genSetExpr(Rng& rng, const ProgramDecl& decl, int depth) {
  auto sets = varsOfKind(decl, Sort::Kind::Set);
  if (depth <= 0 || rng.chance(1, 2)) {
    if (!sets.empty() && rng.chance(3, 5))
      return varRef(decl.vars[static_cast<std::size_t>(
                                  sets[rng.below(sets.size())])]
                        .first);
    std::vector<long long> elems;
    for (long long v = 0; v <= 1; ++v)
      if (rng.chance(1, 2)) elems.push_back(v);
    return setLit(makeSet(std::move(elems)));
  }
  if (rng.chance(1, 3))
    return mkExpr(ExprKind::SetSingleton, genIntExpr(rng, decl, 0));
  return mkExpr(ExprKind::SetUnion, genSetExpr(rng, decl, depth - 1),
                genSetExpr(rng, decl, depth - 1));
}

inline BoolRef genBoolExpr(Rng& rng, const ProgramDecl& decl, int depth) {
  auto sets = varsOfKind(decl, Sort::Kind::Set);
  if (depth <= 0 || rng.chance(1, 2)) {
    switch (rng.below(4)) {
      case 0: return mkCmp(BoolKind::Eq, genIntExpr(rng, decl, 1),
                           genIntExpr(rng, decl, 1));
      case 1: return mkCmp(BoolKind::Lt, genIntExpr(rng, decl, 1),
                           genIntExpr(rng, decl, 1));
      case 2: return mkCmp(BoolKind::Le, genIntExpr(rng, decl, 1),
                           genIntExpr(rng, decl, 1));
      default:
        if (!sets.empty())
          return mkCmp(BoolKind::Member, genIntExpr(rng, decl, 0),
                       genSetExpr(rng, decl, 1));
        return boolLit(rng.chance(1, 2));
    }
  }
  switch (rng.below(3)) {
    case 0: return mkBool(BoolKind::And, genBoolExpr(rng, decl, depth - 1),
                          genBoolExpr(rng, decl, depth - 1));
    case 1: return mkBool(BoolKind::Or, genBoolExpr(rng, decl, depth - 1),
                          genBoolExpr(rng, decl, depth - 1));
    default: return mkNot(genBoolExpr(rng, decl, depth - 1));
  }
}

inline StmtRef genAssignLike(Rng& rng, const ProgramDecl& decl) {
  std::size_t vi = rng.below(decl.vars.size());
  const auto& [name, sort] = decl.vars[vi];
  if (sort.kind() == Sort::Kind::Set)
    return assignStmt(name, genSetExpr(rng, decl, 2));
  if (sort.kind() == Sort::Kind::Int && rng.chance(1, 3)) {
    long long a = rng.range(sort.intRange().lo, sort.intRange().hi);
    long long b = rng.range(a, sort.intRange().hi);
    return nondetStmt(name, intLit(a), intLit(b));
  }
  return assignStmt(name, genIntExpr(rng, decl, 2));
}

inline StmtRef genStmt(Rng& rng, const ProgramDecl& decl, int depth,
                       bool allowAssert = false, const GenWeights& w = {}) {
  if (depth <= 0) return skipStmt();
  if (depth == 1) return genAssignLike(rng, decl);
  if (rng.chance(2, 5)) {
    // leaves, split by the configured weights
    if (rng.chance(w.assignLeaf, w.assignLeaf + w.guardLeaf))
      return genAssignLike(rng, decl);
    if (allowAssert && rng.chance(1, 3))
      return assertStmt(genBoolExpr(rng, decl, 1));
    return testStmt(genBoolExpr(rng, decl, 1));
  }
  std::uint64_t pick = rng.below(w.seq + w.choice + w.loop + w.leaf);
  if (pick < w.seq)
    return seqOrSkip(genStmt(rng, decl, depth - 1, allowAssert, w),
                     genStmt(rng, decl, depth - 1, allowAssert, w));
  pick -= w.seq;
  if (pick < w.choice)
    return choiceStmt(genStmt(rng, decl, depth - 1, allowAssert, w),
                      genStmt(rng, decl, depth - 1, allowAssert, w));
  pick -= w.choice;
  if (pick < w.loop) {
    // loops over a bounded counter, counting up to keep fixpoints small
    auto ints = varsOfKind(decl, Sort::Kind::Int);
    if (ints.empty()) return genAssignLike(rng, decl);
    const auto& [name, sort] =
        decl.vars[static_cast<std::size_t>(ints[rng.below(ints.size())])];
    long long bound = rng.range(sort.intRange().lo, sort.intRange().hi);
    StmtRef body = seqOrSkip(
        rng.chance(1, 2) ? genStmt(rng, decl, depth - 2, false, w) : skipStmt(),
        assignStmt(name, mkExpr(ExprKind::Add, varRef(name), intLit(1))));
    return whileStmt(mkCmp(BoolKind::Lt, varRef(name), intLit(bound)), body);
  }
  return genAssignLike(rng, decl);
}

// ---------------------------------------------------------------------------
// State-equality formulas (used to serialize semantic sets as syntax)
// ---------------------------------------------------------------------------

inline AssertRef stateEqAssert(const StateSpace& space, std::uint64_t idx) {
  State st = space.decode(idx);
  BoolRef conj;
  for (std::size_t i = 0; i < space.varCount(); ++i) {
    const std::string& name = space.decl().vars[i].first;
    BoolRef eq;
    if (st[i].isInt()) {
      eq = mkCmp(BoolKind::Eq, varRef(name), intLit(st[i].asInt()));
    } else if (st[i].isSet()) {
      eq = mkCmp(BoolKind::Eq, varRef(name), setLit(st[i].asSet()));
    } else {
      const auto& elems = st[i].asArray().elems;
      for (std::size_t k = 0; k < elems.size(); ++k) {
        BoolRef e = mkCmp(
            BoolKind::Eq,
            mkExpr(ExprKind::ArrayIndex, varRef(name), intLit(static_cast<long long>(k))),
            intLit(elems[k]));
        eq = eq ? mkBool(BoolKind::And, eq, e) : e;
      }
    }
    conj = conj ? mkBool(BoolKind::And, conj, eq) : eq;
  }
  return predAssert(conj ? conj : boolLit(true));
}

inline AssertRef stateSetAssert(const StateSpace& space, const StateSet& set) {
  AssertRef out;
  for (std::size_t s = set.find_first(); s != StateSet::npos;
       s = set.find_next(s)) {
    AssertRef eq = stateEqAssert(space, s);
    out = out ? orAssert(out, eq) : eq;
  }
  return out ? out : falseAssert();
}

// ---------------------------------------------------------------------------
// Serialization of semantic relational triples to the triple-file syntax;
// the written file re-parses and re-semantifies to the same sets, which is
// what makes generated counterexamples replayable.
// ---------------------------------------------------------------------------

inline std::string writeDecls(const ProgramDecl& low, const ProgramDecl& high) {
  std::ostringstream os;
  for (auto& [n, s] : low.vars) os << "lowvar " << n << " : " << printSort(s) << ";\n";
  for (auto& [n, s] : high.vars) os << "highvar " << n << " : " << printSort(s) << ";\n";
  for (auto& [n, v] : low.constants) {
    Sort s = v.isInt() ? Sort(IntRange{v.asInt(), v.asInt()})
             : v.isSet()
                 ? Sort(SetOver{v.asSet().elems})
                 : Sort(ArrayOf{v.asArray().elems.size(), IntRange{-8, 8}});
    os << "const " << n << " : " << printSort(s) << " = " << toString(v) << ";\n";
  }
  return os.str();
}

inline std::string writeRelAssertion(const RelAssertionSem& sem,
                                     const StateSpace& lowSpace,
                                     const StateSpace& highSpace) {
  std::ostringstream os;
  bool first = true;
  for (std::size_t t = 0; t < sem.progs.size(); ++t) {
    for (std::size_t sl = 0; sl < sem.nLow; ++sl) {
      const StateSet& hs = sem.parts[t].rows[sl];
      if (!hs.any()) continue;
      if (!first) os << "\n  || ";
      first = false;
      os << "low(" << printAssert(stateEqAssert(lowSpace, sl)) << ") && high("
         << printAssert(stateSetAssert(highSpace, hs)) << ") && prog";
      if (sem.progs[t]->kind == StmtKind::Skip)
        os << " skip";
      else
        os << " { " << printStmt(sem.progs[t]) << " }";
    }
  }
  if (first) os << "low(false) && high(false) && prog skip";
  return os.str();
}

inline std::string writeTripleFile(const ProgramDecl& lowDecl,
                                   const ProgramDecl& highDecl,
                                   const RelTripleSem& t,
                                   const StateSpace& lowSpace,
                                   const StateSpace& highSpace) {
  std::ostringstream os;
  os << writeDecls(lowDecl, highDecl);
  os << "low { " << printStmt(t.lowStmt) << " }\n";
  StmtRef highMain;
  for (auto& p : t.pre.progs)
    if (p->kind != StmtKind::Skip) highMain = p;
  if (highMain) os << "high { " << printStmt(highMain) << " }\n";
  os << "pre: " << writeRelAssertion(t.pre, lowSpace, highSpace) << "\n";
  os << "post: " << writeRelAssertion(t.post, lowSpace, highSpace) << "\n";
  return os.str();
}

// ---------------------------------------------------------------------------
// Relational triple generation: declarations and programs are random; the
// postcondition is built from the correlated reachable pairs of joint
// executions, so unperturbed instances are valid by construction. A
// configured fraction is perturbed afterwards and is usually invalid.
// ---------------------------------------------------------------------------

struct GeneratedRelTriple {
  ProgramDecl lowDecl, highDecl;
  std::shared_ptr<StateSpace> lowSpace, highSpace;
  RelTripleSem triple;
  bool perturbed = false;
};

inline GeneratedRelTriple genRelTriple(Rng& rng, const GenConfig& cfg) {
  GeneratedRelTriple g;
  g.lowDecl = genDecl(rng, cfg, "x");
  g.highDecl = genDecl(rng, cfg, "y");
  g.lowSpace = std::make_shared<StateSpace>(g.lowDecl);
  g.highSpace = std::make_shared<StateSpace>(g.highDecl);
  StmtRef cl = genStmt(rng, g.lowDecl, cfg.maxDepth, cfg.allowAssert, cfg.weights);
  StmtRef ch = genStmt(rng, g.highDecl, cfg.maxDepth, cfg.allowAssert, cfg.weights);
  Interp low(*g.lowSpace), high(*g.highSpace);
  const Denotation& dl = low.denote(cl);
  const Denotation& dh = high.denote(ch);
  const std::size_t nl = g.lowSpace->size(), nh = g.highSpace->size();

  StateSet preLow = ~dl.err;
  StateSet preHigh(nh);
  for (std::size_t s = 0; s < nh; ++s)
    if (dh.nrm[s].any() || dh.err.test(s)) preHigh.set(s);

  g.triple.lowStmt = cl;
  g.triple.pre = RelAssertionSem(nl, nh);
  g.triple.pre.ensureProg(ch);
  for (std::size_t sl = preLow.find_first(); sl != StateSet::npos;
       sl = preLow.find_next(sl))
    g.triple.pre.parts[0].rows[sl] = preHigh;

  g.triple.post = RelAssertionSem(nl, nh);
  g.triple.post.ensureProg(skipStmt());
  for (std::size_t sl = preLow.find_first(); sl != StateSet::npos;
       sl = preLow.find_next(sl)) {
    if (!dl.nrm[sl].any()) continue;
    StateSet highFinals(nh);
    for (std::size_t sh = preHigh.find_first(); sh != StateSet::npos;
         sh = preHigh.find_next(sh))
      highFinals |= dh.nrm[sh];
    for (std::size_t sl2 = dl.nrm[sl].find_first(); sl2 != StateSet::npos;
         sl2 = dl.nrm[sl].find_next(sl2))
      g.triple.post.parts[0].rows[sl2] |= highFinals;
  }

  if (cfg.perturbPercent && rng.chance(cfg.perturbPercent, 100)) {
    g.perturbed = true;
    // drop one populated post row bit, or grow the pre
    std::vector<std::pair<std::size_t, std::size_t>> bits;
    for (std::size_t sl = 0; sl < nl; ++sl)
      for (std::size_t sh = g.triple.post.parts[0].rows[sl].find_first();
           sh != StateSet::npos;
           sh = g.triple.post.parts[0].rows[sl].find_next(sh))
        bits.emplace_back(sl, sh);
    if (!bits.empty() && rng.chance(1, 2)) {
      auto [sl, sh] = bits[rng.below(bits.size())];
      g.triple.post.parts[0].rows[sl].reset(sh);
    } else {
      for (std::size_t sl = 0; sl < nl; ++sl)
        g.triple.pre.parts[0].rows[sl].set(rng.below(nh));
    }
  }
  return g;
}

}  // namespace refine
