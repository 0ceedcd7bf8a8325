#pragma once

#include <functional>
#include <string>
#include <vector>

#include "refine/testkit.hpp"

namespace refine {

// Property suites shared by the fuzz subcommand and the acceptance tests.
// Every run is fully determined by (seed, config).

struct PropertyOutcome {
  std::string property;
  std::uint64_t seed = 0;
  int count = 0, passed = 0, failed = 0;
  std::vector<std::string> failures;

  bool ok() const { return failed == 0; }
};

using FailureSaver =
    std::function<void(const std::string& name, const std::string& content)>;

namespace detail {
inline Rng instanceRng(std::uint64_t seed, int i) {
  return Rng(seed ^ (0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(i + 1)));
}
}  // namespace detail

// ---------------------------------------------------------------------------
// Encoding equivalence: the relational verdict and the all-X encoded verdict
// must agree on every generated triple. `injectBug` deliberately desyncs the
// two sides to exercise counterexample persistence.
// ---------------------------------------------------------------------------

inline PropertyOutcome runThm4(const GenConfig& cfg, int count,
                               bool injectBug = false,
                               const FailureSaver& save = nullptr) {
  PropertyOutcome out;
  out.property = "thm4";
  out.seed = cfg.seed;
  out.count = count;
  for (int i = 0; i < count; ++i) {
    Rng rng = detail::instanceRng(cfg.seed, i);
    GenConfig local = cfg;
    local.perturbPercent = cfg.perturbPercent ? cfg.perturbPercent : 30;
    GeneratedRelTriple g = genRelTriple(rng, local);
    Interp low(*g.lowSpace), high(*g.highSpace);
    bool agree;
    std::string detail;
    if (!injectBug) {
      EncodeEquivReport rep =
          checkEncodingEquiv(low, high, g.triple, cfg.maxStates);
      agree = rep.agree;
      detail = std::string("relational=") +
               (rep.relational.valid ? "valid" : "invalid") + " encoded=" +
               (rep.encodedAllX ? "valid" : "invalid");
    } else {
      // Tamper with the encoded side only: remove one populated post pair.
      RelTripleSem t2 = g.triple;
      bool tampered = false;
      for (auto& row : t2.post.parts[0].rows) {
        if (row.any() && !tampered) {
          row.reset(row.find_first());
          tampered = true;
        }
      }
      bool relOk = relValid(low, high, g.triple).valid;
      EncodeEquivReport rep = checkEncodingEquiv(low, high, t2, cfg.maxStates);
      agree = !tampered || (relOk == rep.encodedAllX);
      detail = "fault-injected";
    }
    if (agree) {
      ++out.passed;
    } else {
      ++out.failed;
      std::string name = "thm4-" + std::to_string(i) + ".triple";
      out.failures.push_back("instance " + std::to_string(i) + ": " + detail);
      if (save)
        save(name, writeTripleFile(g.lowDecl, g.highDecl, g.triple,
                                   *g.lowSpace, *g.highSpace));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Decomposition: configuration refinement agrees with the all-X wlp
// implication, and whenever refinement fails the canonical witness X (the
// terminal-state set of the left configuration) falsifies the implication.
// Initial states are drawn outside err(c1); from an erroring initial state
// the wlp side is vacuous and the two sides are incomparable.
// ---------------------------------------------------------------------------

inline PropertyOutcome runDecomp(const GenConfig& cfg, int count) {
  PropertyOutcome out;
  out.property = "decomp";
  out.seed = cfg.seed;
  out.count = count;
  for (int i = 0; i < count; ++i) {
    Rng rng = detail::instanceRng(cfg.seed, i);
    GenConfig local = cfg;
    local.maxStates = std::min<std::size_t>(cfg.maxStates, 10);
    ProgramDecl decl = genDecl(rng, local, "v");
    StateSpace space(decl);
    Interp interp(space);
    StmtRef c1, c2;
    std::uint64_t s1 = 0;
    bool found = false;
    for (int attempt = 0; attempt < 8 && !found; ++attempt) {
      c1 = genStmt(rng, decl, cfg.maxDepth, cfg.allowAssert, cfg.weights);
      const Denotation& d1 = interp.denote(c1);
      StateSet ok = ~d1.err;
      if (ok.any()) {
        std::uint64_t pick = rng.below(ok.count());
        for (std::size_t s = ok.find_first(); s != StateSet::npos;
             s = ok.find_next(s))
          if (pick-- == 0) {
            s1 = s;
            found = true;
            break;
          }
      }
    }
    if (!found) {
      ++out.passed;  // nothing to check: c1 errs everywhere
      continue;
    }
    c2 = genStmt(rng, decl, cfg.maxDepth, cfg.allowAssert, cfg.weights);
    std::uint64_t s2 = rng.below(space.size());
    DecompositionResult r =
        checkDecomposition(interp, s1, c1, s2, c2, space.size());
    bool pass = r.agree && (r.refines || r.canonicalWitnessFalsifies);
    if (pass) {
      ++out.passed;
    } else {
      ++out.failed;
      out.failures.push_back("instance " + std::to_string(i) +
                             ": agree=" + std::to_string(r.agree) +
                             " canonical=" +
                             std::to_string(r.canonicalWitnessFalsifies));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Exec rule soundness: for each accepted application and every X within the
// cap, the old predicate implies the new one.
// ---------------------------------------------------------------------------

struct ExecRuleCase {
  GroundExec before;
  RuleApp rule;
  bool usable = false;
};

namespace detail {

inline StateSet randomSubset(Rng& rng, std::size_t n, bool nonempty) {
  StateSet s(n);
  for (std::size_t i = 0; i < n; ++i)
    if (rng.chance(1, 2)) s.set(i);
  if (nonempty && !s.any() && n) s.set(rng.below(n));
  return s;
}

inline StmtRef maybeRest(Rng& rng, const ProgramDecl& decl, StmtRef head) {
  if (rng.chance(1, 2))
    return seqOrSkip(std::move(head), genAssignLike(rng, decl));
  return head;
}

inline ExecRuleCase genExecRuleCase(Rng& rng, ExecRule rule,
                                    const ProgramDecl& decl,
                                    const StateSpace& space, Interp& interp) {
  ExecRuleCase c;
  c.rule = ruleApp(rule);
  const std::size_t n = space.size();
  switch (rule) {
    case ExecRule::Assign: {
      std::size_t vi = rng.below(decl.vars.size());
      const auto& [name, sort] = decl.vars[vi];
      StmtRef head = sort.kind() == Sort::Kind::Set
                         ? assignStmt(name, genSetExpr(rng, decl, 2))
                         : assignStmt(name, genIntExpr(rng, decl, 2));
      c.before = {randomSubset(rng, n, true), maybeRest(rng, decl, head)};
      c.usable = true;
      return c;
    }
    case ExecRule::Nondet: {
      auto ints = varsOfKind(decl, Sort::Kind::Int);
      if (ints.empty()) return c;
      const auto& [name, sort] =
          decl.vars[static_cast<std::size_t>(ints[rng.below(ints.size())])];
      long long a = rng.range(sort.intRange().lo, sort.intRange().hi);
      long long b = rng.range(a, sort.intRange().hi);
      c.rule.nondetValue = intLit(rng.range(a, b));
      c.before = {randomSubset(rng, n, true),
                  maybeRest(rng, decl, nondetStmt(name, intLit(a), intLit(b)))};
      c.usable = true;
      return c;
    }
    case ExecRule::ChoiceL:
    case ExecRule::ChoiceR: {
      StmtRef head = choiceStmt(genStmt(rng, decl, 2), genStmt(rng, decl, 2));
      c.before = {randomSubset(rng, n, true), maybeRest(rng, decl, head)};
      c.usable = true;
      return c;
    }
    case ExecRule::Assume: {
      BoolRef g = genBoolExpr(rng, decl, 2);
      GuardSets gs = evalGuard(g, space);
      StateSet p = randomSubset(rng, n, false) & gs.yes;
      if (!p.any() && gs.yes.any()) p.set(gs.yes.find_first());
      c.before = {std::move(p), maybeRest(rng, decl, testStmt(g))};
      c.usable = true;
      return c;
    }
    case ExecRule::AssertStep: {
      c.before = {randomSubset(rng, n, true),
                  maybeRest(rng, decl, assertStmt(genBoolExpr(rng, decl, 2)))};
      c.usable = true;
      return c;
    }
    case ExecRule::WhileEnd:
    case ExecRule::WhileUnroll: {
      auto ints = varsOfKind(decl, Sort::Kind::Int);
      if (ints.empty()) return c;
      const auto& [name, sort] =
          decl.vars[static_cast<std::size_t>(ints[rng.below(ints.size())])];
      long long bound = rng.range(sort.intRange().lo, sort.intRange().hi);
      BoolRef g = mkCmp(BoolKind::Lt, varRef(name), intLit(bound));
      StmtRef body =
          seqOrSkip(genStmt(rng, decl, 1),
                    assignStmt(name, mkExpr(ExprKind::Add, varRef(name), intLit(1))));
      GuardSets gs = evalGuard(g, space);
      const StateSet& side = rule == ExecRule::WhileEnd ? gs.no : gs.yes;
      StateSet p = randomSubset(rng, n, false) & side;
      if (!p.any() && side.any()) p.set(side.find_first());
      if (!p.any()) return c;
      c.before = {std::move(p), maybeRest(rng, decl, whileStmt(g, body))};
      c.usable = true;
      return c;
    }
    case ExecRule::Pure: {
      if (rng.chance(1, 2)) {
        StmtRef keep = genStmt(rng, decl, 2);
        StmtRef head = choiceStmt(keep, genStmt(rng, decl, 2));
        c.rule.pureReplacement = keep;
        c.before = {randomSubset(rng, n, true), maybeRest(rng, decl, head)};
      } else {
        auto ints = varsOfKind(decl, Sort::Kind::Int);
        if (ints.empty()) return c;
        const auto& [name, sort] =
            decl.vars[static_cast<std::size_t>(ints[rng.below(ints.size())])];
        long long a = rng.range(sort.intRange().lo, sort.intRange().hi);
        long long b = rng.range(a, sort.intRange().hi);
        long long v = rng.range(a, b);
        c.rule.pureReplacement = assignStmt(name, intLit(v));
        c.before = {randomSubset(rng, n, true),
                    maybeRest(rng, decl, nondetStmt(name, intLit(a), intLit(b)))};
      }
      c.usable = true;
      return c;
    }
    case ExecRule::SeqStep: {
      std::size_t vi = rng.below(decl.vars.size());
      const auto& [name, sort] = decl.vars[vi];
      StmtRef head = sort.kind() == Sort::Kind::Set
                         ? assignStmt(name, genSetExpr(rng, decl, 1))
                         : assignStmt(name, genIntExpr(rng, decl, 1));
      c.rule.nested.push_back(ruleApp(ExecRule::Assign));
      c.before = {randomSubset(rng, n, true),
                  seqOrSkip(head, genAssignLike(rng, decl))};
      c.usable = true;
      return c;
    }
    case ExecRule::FocusAngelic: {
      StmtRef head = genStmt(rng, decl, 2);
      const Denotation& d = interp.denote(head);
      StateSet p(n);
      for (std::size_t s = 0; s < n; ++s)
        if (!d.err.test(s) && d.nrm[s].any() && rng.chance(2, 3)) p.set(s);
      if (!p.any()) {
        for (std::size_t s = 0; s < n; ++s)
          if (!d.err.test(s) && d.nrm[s].any()) {
            p.set(s);
            break;
          }
      }
      if (!p.any()) return c;
      c.rule.focusIntermediate = stateSetAssert(space, imageSet(d, p));
      c.before = {std::move(p), maybeRest(rng, decl, head)};
      c.usable = true;
      return c;
    }
  }
  return c;
}

}  // namespace detail

inline bool execRuleSound(Interp& high, const GroundExec& before,
                          const GroundExec& after) {
  const std::size_t n = high.space().size();
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    StateSet x = subsetFromMask(mask, n);
    if (execHolds(before.states, before.prog, high, x) &&
        !execHolds(after.states, after.prog, high, x))
      return false;
  }
  return true;
}

inline PropertyOutcome runExecRules(const GenConfig& cfg, int countPerRule) {
  PropertyOutcome out;
  out.property = "exec-rules";
  out.seed = cfg.seed;
  static const ExecRule rules[] = {
      ExecRule::Assign,     ExecRule::Nondet,      ExecRule::ChoiceL,
      ExecRule::ChoiceR,    ExecRule::Assume,      ExecRule::AssertStep,
      ExecRule::WhileEnd,   ExecRule::WhileUnroll, ExecRule::Pure,
      ExecRule::SeqStep,    ExecRule::FocusAngelic};
  int i = 0;
  for (ExecRule rule : rules) {
    int accepted = 0, attempts = 0;
    while (accepted < countPerRule && attempts < countPerRule * 20) {
      ++attempts;
      Rng rng = detail::instanceRng(cfg.seed, i++);
      GenConfig local = cfg;
      local.maxStates = std::min<std::size_t>(cfg.maxStates, 8);
      ProgramDecl decl = genDecl(rng, local, "h");
      StateSpace space(decl);
      Interp interp(space);
      ExecRuleCase c =
          detail::genExecRuleCase(rng, rule, decl, space, interp);
      if (!c.usable) continue;
      RuleResult r = applyRule(c.before, c.rule, interp, {});
      if (!ruleOk(r)) continue;  // only accepted applications count
      ++accepted;
      ++out.count;
      if (execRuleSound(interp, c.before, std::get<GroundExec>(r))) {
        ++out.passed;
      } else {
        ++out.failed;
        out.failures.push_back(std::string("rule ") + execRuleName(rule) +
                               " instance " + std::to_string(i));
      }
    }
    if (accepted < countPerRule) {
      ++out.failed;
      out.failures.push_back(std::string("rule ") + execRuleName(rule) +
                             ": could not generate enough accepted cases");
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Vertical composition: conclusions hold whenever premises do, across the
// three rule shapes.
// ---------------------------------------------------------------------------

namespace detail {

// Valid-by-construction refinement between the two given declarations, with
// an optional fixed low-level program.
inline GeneratedRelTriple genRelTripleBetween(Rng& rng, const GenConfig& cfg,
                                              ProgramDecl lowDecl,
                                              ProgramDecl highDecl,
                                              StmtRef fixedLow = nullptr) {
  GeneratedRelTriple g;
  g.lowDecl = std::move(lowDecl);
  g.highDecl = std::move(highDecl);
  g.lowSpace = std::make_shared<StateSpace>(g.lowDecl);
  g.highSpace = std::make_shared<StateSpace>(g.highDecl);
  StmtRef cl = fixedLow ? fixedLow : genStmt(rng, g.lowDecl, cfg.maxDepth, false, cfg.weights);
  StmtRef ch = genStmt(rng, g.highDecl, cfg.maxDepth, false, cfg.weights);
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
  StateSet highFinals(nh);
  for (std::size_t sh = preHigh.find_first(); sh != StateSet::npos;
       sh = preHigh.find_next(sh))
    highFinals |= dh.nrm[sh];
  for (std::size_t sl = preLow.find_first(); sl != StateSet::npos;
       sl = preLow.find_next(sl))
    g.triple.pre.parts[0].rows[sl] = preHigh;
  g.triple.post = RelAssertionSem(nl, nh);
  g.triple.post.ensureProg(skipStmt());
  for (std::size_t sl = preLow.find_first(); sl != StateSet::npos;
       sl = preLow.find_next(sl))
    for (std::size_t sl2 = dl.nrm[sl].find_first(); sl2 != StateSet::npos;
         sl2 = dl.nrm[sl].find_next(sl2))
      g.triple.post.parts[0].rows[sl2] |= highFinals;
  return g;
}

}  // namespace detail

inline PropertyOutcome runVc(const GenConfig& cfg, int countPerShape) {
  PropertyOutcome out;
  out.property = "vc";
  out.seed = cfg.seed;
  int i = 0;
  // --- linking a refinement with a high-level correctness triple ---
  for (int k = 0; k < countPerShape; ++k) {
    Rng rng = detail::instanceRng(cfg.seed, i++);
    GeneratedRelTriple g = genRelTriple(rng, cfg);
    Interp low(*g.lowSpace), high(*g.highSpace);
    StateSet q = detail::randomSubset(rng, g.highSpace->size(), false);
    StmtRef ch = g.triple.pre.progs[0];
    StateSet p = high.wlp(ch, q);
    VcFcInput in{g.triple.pre.parts[0], g.triple.post.parts[0], g.triple.lowStmt,
                 ch, std::move(p), std::move(q)};
    VcFcResult r = vcFc(low, high, in);
    ++out.count;
    if (r.ok) {
      ++out.passed;
    } else {
      ++out.failed;
      out.failures.push_back("vc-fc instance " + std::to_string(k) + ": " +
                             (r.error ? r.error->premise : ""));
    }
  }
  // --- chaining two refinements ---
  for (int k = 0; k < countPerShape; ++k) {
    Rng rng = detail::instanceRng(cfg.seed, i++);
    ProgramDecl d1 = genDecl(rng, cfg, "a");
    ProgramDecl d2 = genDecl(rng, cfg, "b");
    ProgramDecl d3 = genDecl(rng, cfg, "c");
    GeneratedRelTriple g12 = detail::genRelTripleBetween(rng, cfg, d1, d2);
    StmtRef c2 = g12.triple.pre.progs[0];
    GeneratedRelTriple g23 =
        detail::genRelTripleBetween(rng, cfg, d2, d3, c2);
    Interp i1(*g12.lowSpace), i2(*g12.highSpace), i3(*g23.highSpace);
    VcRefineInput in{g12.triple.pre.parts[0],  g12.triple.post.parts[0],
                     g23.triple.pre.parts[0],  g23.triple.post.parts[0],
                     g12.triple.lowStmt,       c2,
                     g23.triple.pre.progs[0]};
    VcRefineResult r = vcRefine(i1, i2, i3, in);
    ++out.count;
    if (r.ok) {
      ++out.passed;
    } else {
      ++out.failed;
      out.failures.push_back("vc-refine instance " + std::to_string(k) + ": " +
                             (r.error ? r.error->premise : ""));
    }
  }
  // --- store-shaped composition with the inhabitation side condition ---
  for (int k = 0; k < countPerShape; ++k) {
    Rng rng = detail::instanceRng(cfg.seed, i++);
    ProgramDecl lowDecl = genDecl(rng, cfg, "x");
    ProgramDecl highDecl = genDecl(rng, cfg, "y");
    StateSpace lowSpace(lowDecl), highSpace(highDecl);
    Interp low(lowSpace), high(highSpace);
    StmtRef cl = genStmt(rng, lowDecl, cfg.maxDepth, false, cfg.weights);
    StmtRef ch = genStmt(rng, highDecl, cfg.maxDepth, false, cfg.weights);
    const Denotation& dl = low.denote(cl);
    const Denotation& dh = high.denote(ch);
    StateSet lowOk = ~dl.err;
    StateSet highOk(highSpace.size());
    for (std::size_t s = 0; s < highSpace.size(); ++s)
      if (!dh.err.test(s) && dh.nrm[s].any()) highOk.set(s);
    if (!lowOk.any() || !highOk.any()) {
      ++out.count;
      ++out.passed;  // degenerate instance, nothing to compose
      continue;
    }
    const std::uint64_t uCount = 1 + rng.below(2);
    VcStoreInput in;
    in.lowStmt = cl;
    in.highStmt = ch;
    in.domU = Sort(IntRange{0, static_cast<long long>(uCount) - 1});
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::uint64_t u = 0; u < uCount; ++u) {
      std::uint64_t pl = rng.below(lowOk.count());
      std::size_t sl = lowOk.find_first();
      while (pl--) sl = lowOk.find_next(sl);
      std::uint64_t ph = rng.below(highOk.count());
      std::size_t sh = highOk.find_first();
      while (ph--) sh = highOk.find_next(sh);
      StateSet l(lowSpace.size()), h(highSpace.size());
      l.set(sl);
      h.set(sh);
      in.storePreL.push_back(std::move(l));
      in.storePreH.push_back(std::move(h));
      in.b1.push_back(rng.chance(3, 4));
      for (std::size_t sl2 = dl.nrm[sl].find_first(); sl2 != StateSet::npos;
           sl2 = dl.nrm[sl].find_next(sl2))
        for (std::size_t sh2 = dh.nrm[sh].find_first(); sh2 != StateSet::npos;
             sh2 = dh.nrm[sh].find_next(sh2))
          pairs.emplace_back(sl2, sh2);
    }
    bool anyB1 = false;
    for (bool b : in.b1) anyB1 = anyB1 || b;
    if (!anyB1) in.b1[0] = true;
    if (pairs.empty()) {
      ++out.count;
      ++out.passed;
      continue;
    }
    in.domV = Sort(IntRange{0, static_cast<long long>(pairs.size()) - 1});
    StateSet reachableH(highSpace.size());
    for (std::uint64_t u = 0; u < uCount; ++u)
      if (in.b1[u])
        reachableH |= dh.nrm[in.storePreH[u].find_first()];
    for (auto& [sl2, sh2] : pairs) {
      StateSet l(lowSpace.size()), h(highSpace.size());
      l.set(sl2);
      h.set(sh2);
      in.storePostL.push_back(std::move(l));
      in.storePostH.push_back(std::move(h));
      in.b2.push_back(reachableH.test(sh2));
    }
    VcStoreResult r = vcStore(low, high, in);
    ++out.count;
    if (r.ok) {
      ++out.passed;
    } else {
      ++out.failed;
      out.failures.push_back("vc-store instance " + std::to_string(k) + ": " +
                             (r.error ? r.error->premise : ""));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Encoded-assertion transformations and syntactic/semantic agreement of the
// encoding, on generated decomposed assertions and X values.
// ---------------------------------------------------------------------------

namespace detail {

inline ProgramDecl withBinderVars(const ProgramDecl& decl,
                                  const std::vector<std::pair<std::string, Sort>>& binders) {
  ProgramDecl d = decl;
  for (auto& b : binders) d.vars.push_back(b);
  return d;
}

inline RelDisjunct genRelDisjunct(Rng& rng, const ProgramDecl& lowDecl,
                                  const ProgramDecl& highDecl,
                                  const std::vector<StmtRef>& progs) {
  RelDisjunct d;
  int nb = static_cast<int>(rng.below(3));
  for (int b = 0; b < nb; ++b) {
    Sort s = rng.chance(1, 3) ? Sort(SetOver{{0, 1}}) : Sort(IntRange{0, 1});
    d.binders.emplace_back("q" + std::to_string(b), s);
  }
  ProgramDecl lowX = withBinderVars(lowDecl, d.binders);
  ProgramDecl highX = withBinderVars(highDecl, d.binders);
  ProgramDecl pureX;
  pureX.vars = d.binders;
  d.pure = d.binders.empty() || rng.chance(1, 2)
               ? boolLit(true)
               : genBoolExpr(rng, pureX, 1);
  d.low = predAssert(genBoolExpr(rng, lowX, 2));
  d.high = predAssert(genBoolExpr(rng, highX, 2));
  d.prog = progs[rng.below(progs.size())];
  return d;
}

}  // namespace detail

inline PropertyOutcome runEncTransforms(const GenConfig& cfg, int count) {
  PropertyOutcome out;
  out.property = "enc-transforms";
  out.seed = cfg.seed;
  for (int i = 0; i < count; ++i) {
    Rng rng = detail::instanceRng(cfg.seed, i);
    ProgramDecl lowDecl = genDecl(rng, cfg, "x");
    ProgramDecl highDecl = genDecl(rng, cfg, "y");
    StateSpace lowSpace(lowDecl), highSpace(highDecl);
    Interp high(highSpace);
    std::vector<StmtRef> progs{skipStmt(), genStmt(rng, highDecl, 2),
                               genStmt(rng, highDecl, 3)};
    DecomposedRel p;
    p.disjuncts.push_back(
        detail::genRelDisjunct(rng, lowDecl, highDecl, progs));
    StateSet x = detail::randomSubset(rng, highSpace.size(), false);
    bool pass = true;
    std::string what;

    // (a) the encoding commutes with existential introduction
    if (!p.disjuncts[0].binders.empty()) {
      RelDisjunct inner = p.disjuncts[0];
      auto binder = inner.binders.front();
      inner.binders.erase(inner.binders.begin());
      DecomposedRel stripped{{inner}};
      StateSet lhs = encode(semantify(p, lowSpace, highSpace), x, high);
      StateSet rhs(lowSpace.size());
      for (std::uint64_t v = 0; v < binder.second.cardinality(); ++v) {
        LogicalEnv env{{binder.first, binder.second.valueAt(v)}};
        rhs |= encode(semantify(stripped, lowSpace, highSpace, env), x, high);
      }
      if (lhs != rhs) { pass = false; what = "exists"; }
    }
    // (b) closed pure conjuncts lift out
    {
      bool b0 = rng.chance(1, 2);
      DecomposedRel pb = p;
      pb.disjuncts[0].pure =
          mkBool(BoolKind::And, pb.disjuncts[0].pure, boolLit(b0));
      StateSet lhs = encode(semantify(pb, lowSpace, highSpace), x, high);
      StateSet rhs = b0 ? encode(semantify(p, lowSpace, highSpace), x, high)
                        : StateSet(lowSpace.size());
      if (lhs != rhs) { pass = false; what = "pure"; }
    }
    // (c) low-level conjuncts lift out
    {
      AssertRef l0 = predAssert(genBoolExpr(rng, lowDecl, 2));
      DecomposedRel pc = p;
      pc.disjuncts[0].low = andAssert(pc.disjuncts[0].low, l0);
      StateSet lhs = encode(semantify(pc, lowSpace, highSpace), x, high);
      LogicalEnv empty;
      StateSet rhs =
          encode(semantify(p, lowSpace, highSpace), x, high);
      // the added conjunct may mention binders only when none exist
      StateSet l0states = groundAssert(l0, lowSpace, empty);
      rhs &= l0states;
      if (p.disjuncts[0].binders.empty() && lhs != rhs) {
        pass = false;
        what = "low-lift";
      }
    }
    // (d) the encoding distributes over disjunction
    {
      DecomposedRel p2;
      p2.disjuncts.push_back(
          detail::genRelDisjunct(rng, lowDecl, highDecl, progs));
      DecomposedRel both;
      both.disjuncts = {p.disjuncts[0], p2.disjuncts[0]};
      StateSet lhs = encode(semantify(both, lowSpace, highSpace), x, high);
      StateSet rhs = encode(semantify(p, lowSpace, highSpace), x, high) |
                     encode(semantify(p2, lowSpace, highSpace), x, high);
      if (lhs != rhs) { pass = false; what = "disjunction"; }
    }
    // syntactic vs semantic encoding
    {
      AssertRef syn = encodeSyntactic(p);
      StateSet sem = encode(semantify(p, lowSpace, highSpace), x, high);
      HoldCtx ctx{&lowSpace, &high, &x};
      for (std::size_t s = 0; s < lowSpace.size(); ++s) {
        LogicalEnv env;
        if (holds(syn, s, ctx, env) != sem.test(s)) {
          pass = false;
          what = "syntactic-agreement";
          break;
        }
      }
    }
    ++out.count;
    if (pass) {
      ++out.passed;
    } else {
      ++out.failed;
      out.failures.push_back("instance " + std::to_string(i) + ": " + what);
    }
  }
  return out;
}

}  // namespace refine
