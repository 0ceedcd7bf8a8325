#pragma once

#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "refine/entail.hpp"

namespace refine {

// ---------------------------------------------------------------------------
// Standard triples
// ---------------------------------------------------------------------------

// Semantic standard triple over one space.
struct StdTripleSem {
  StateSet pre;
  StmtRef stmt;
  StateSet post;
};

struct StdCounterexample {
  std::uint64_t initial = 0;
  std::optional<std::uint64_t> final;  // absent: the initial state errors
};

struct StdVerdict {
  bool valid = true;
  std::optional<StdCounterexample> cex;
};

// No error from any pre state, and every normal result lands in post.
inline StdVerdict stdValidSem(Interp& interp, const StdTripleSem& t) {
  const Denotation& d = interp.denote(t.stmt);
  for (std::size_t s = t.pre.find_first(); s != StateSet::npos;
       s = t.pre.find_next(s)) {
    if (d.err.test(s)) return {false, StdCounterexample{s, std::nullopt}};
    if (!d.nrm[s].is_subset_of(t.post)) {
      StateSet bad = d.nrm[s] - t.post;
      return {false, StdCounterexample{s, bad.find_first()}};
    }
  }
  return {true, std::nullopt};
}

// Syntactic standard triple; pre/post may contain Exec atoms, in which case
// the triple is implicitly quantified over every X.
struct StdTriple {
  AssertRef pre;
  StmtRef stmt;
  AssertRef post;
};

// Validity at one bound X (or with no X, for Exec-free triples).
inline StdVerdict stdValidAtX(Interp& low, Interp* high, const StdTriple& t,
                              const StateSet* x) {
  HoldCtx ctx{&low.space(), high, x};
  const Denotation& d = low.denote(t.stmt);
  for (std::size_t s = 0; s < low.space().size(); ++s) {
    LogicalEnv env;
    if (!holds(t.pre, s, ctx, env)) continue;
    if (d.err.test(s)) return {false, StdCounterexample{s, std::nullopt}};
    for (std::size_t s2 = d.nrm[s].find_first(); s2 != StateSet::npos;
         s2 = d.nrm[s].find_next(s2)) {
      LogicalEnv env2;
      if (!holds(t.post, s2, ctx, env2))
        return {false, StdCounterexample{s, s2}};
    }
  }
  return {true, std::nullopt};
}

// Exhaustive sweep of a (possibly Exec-bearing) standard triple over every
// X within the cap. Assertions are grounded to normal form once; only the
// wlp of each distinct high program is recomputed per X.
struct SweepResult {
  bool valid = true;
  std::optional<std::uint64_t> witnessMask;
};

inline SweepResult sweepStdAllX(const AssertRef& pre, const StmtRef& stmt,
                                const AssertRef& post, Interp& low,
                                Interp& high, std::size_t capStates,
                                const LogicalEnv& rigid = {}) {
  requireEnumerable(high.space(), capStates, "exhaustive X sweep");
  NormalForm preNf = normalize(pre, low.space(), &high.space(), rigid);
  NormalForm postNf = normalize(post, low.space(), &high.space(), rigid);
  std::vector<StmtRef> progs;
  auto progIndex = [&](const StmtRef& p) {
    for (std::size_t i = 0; i < progs.size(); ++i)
      if (structEq(progs[i], p)) return i;
    progs.push_back(p);
    return progs.size() - 1;
  };
  struct Inst {
    std::size_t prog = 0;
    bool hasExec = false;
    StateSet low, high;
  };
  auto flatten = [&](const NormalForm& nf) {
    std::vector<Inst> insts;
    for (const auto& d : nf.disjuncts) {
      BinderIter it(d.binders);
      for (std::uint64_t v = 0; v < it.count(); ++v) {
        Inst inst;
        inst.low = d.low[v];
        if (!inst.low.any()) continue;
        if (d.prog) {
          inst.hasExec = true;
          inst.prog = progIndex(d.prog);
          inst.high = d.high[v];
        }
        insts.push_back(std::move(inst));
      }
    }
    return insts;
  };
  std::vector<Inst> preInsts = flatten(preNf);
  std::vector<Inst> postInsts = flatten(postNf);
  const Denotation& dl = low.denote(stmt);
  const std::size_t n = high.space().size();
  const std::size_t nl = low.space().size();
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    StateSet x = subsetFromMask(mask, n);
    std::vector<StateSet> wlps;
    wlps.reserve(progs.size());
    for (auto& p : progs) wlps.push_back(high.wlp(p, x));
    auto satisfying = [&](const std::vector<Inst>& insts) {
      StateSet s(nl);
      for (const auto& inst : insts)
        if (!inst.hasExec || (inst.high & wlps[inst.prog]).any()) s |= inst.low;
      return s;
    };
    StateSet preSet = satisfying(preInsts);
    if ((preSet & dl.err).any()) return {false, mask};
    StateSet postSet = satisfying(postInsts);
    for (std::size_t s = preSet.find_first(); s != StateSet::npos;
         s = preSet.find_next(s))
      if (!dl.nrm[s].is_subset_of(postSet)) return {false, mask};
  }
  return {true, std::nullopt};
}

// ---------------------------------------------------------------------------
// Relational triples
// ---------------------------------------------------------------------------

struct RelTripleSem {
  RelAssertionSem pre, post;
  StmtRef lowStmt;
};

struct RelTriple {
  DecomposedRel pre, post;
  StmtRef lowStmt;
};

inline RelTripleSem semantify(const RelTriple& t, const StateSpace& lowSpace,
                              const StateSpace& highSpace) {
  return RelTripleSem{semantify(t.pre, lowSpace, highSpace),
                      semantify(t.post, lowSpace, highSpace), t.lowStmt};
}

struct RelCounterexample {
  std::uint64_t lowInit = 0, highInit = 0;
  StmtRef highProg;
  std::optional<std::uint64_t> lowFinal;
  std::string reason;  // "error-simulation" or "result-simulation"
};

struct RelVerdict {
  bool valid = true;
  std::optional<RelCounterexample> cex;
};

// Validity per the program-as-resource reading: errors of the low program
// are simulated, and every low result is matched by some refining high
// configuration drawn from the postcondition's program terms.
inline RelVerdict relValid(Interp& low, Interp& high, const RelTripleSem& t) {
  const Denotation& dl = low.denote(t.lowStmt);
  for (std::size_t ti = 0; ti < t.pre.progs.size(); ++ti) {
    const StmtRef& ch1 = t.pre.progs[ti];
    const Denotation& dh = high.denote(ch1);
    // Admissible successors per post term, precomputed per source high state.
    std::vector<const std::vector<StateSet>*> refmats;
    for (auto& p2 : t.post.progs)
      refmats.push_back(&high.refinementMatrix(ch1, p2));
    for (std::size_t sl1 = 0; sl1 < t.pre.nLow; ++sl1) {
      const StateSet& highs = t.pre.parts[ti].rows[sl1];
      for (std::size_t sh1 = highs.find_first(); sh1 != StateSet::npos;
           sh1 = highs.find_next(sh1)) {
        if (dl.err.test(sl1) && !dh.err.test(sh1))
          return {false, RelCounterexample{sl1, sh1, ch1, std::nullopt,
                                           "error-simulation"}};
        if (dh.err.test(sh1)) continue;  // result clause holds trivially
        for (std::size_t sl2 = dl.nrm[sl1].find_first(); sl2 != StateSet::npos;
             sl2 = dl.nrm[sl1].find_next(sl2)) {
          bool matched = false;
          for (std::size_t t2 = 0; t2 < t.post.progs.size() && !matched; ++t2)
            if ((t.post.parts[t2].rows[sl2] & (*refmats[t2])[sh1]).any())
              matched = true;
          if (!matched)
            return {false, RelCounterexample{sl1, sh1, ch1, sl2,
                                             "result-simulation"}};
        }
      }
    }
  }
  return {true, std::nullopt};
}

// ---------------------------------------------------------------------------
// Encoding equivalence: the relational verdict against the standard triple
// of encoded assertions, quantified over X.
// ---------------------------------------------------------------------------

struct EncodeEquivReport {
  RelVerdict relational;
  bool encodedAllX = true;
  std::optional<StateSet> witnessX;  // an X whose standard triple is invalid
  std::optional<StdCounterexample> witnessCex;
  bool exhaustive = true;  // false: sampled X plus canonical witnesses
  std::uint64_t xChecked = 0;
  bool agree = false;
};

inline EncodeEquivReport checkEncodingEquiv(Interp& low, Interp& high,
                                            const RelTripleSem& t,
                                            std::size_t capStates = 16,
                                            int jobs = 1) {
  EncodeEquivReport rep;
  rep.relational = relValid(low, high, t);
  const std::size_t n = high.space().size();
  auto checkX = [&](const StateSet& x) {
    ++rep.xChecked;
    StdTripleSem st{encode(t.pre, x, high), t.lowStmt, encode(t.post, x, high)};
    StdVerdict v = stdValidSem(low, st);
    if (!v.valid && rep.encodedAllX) {
      rep.encodedAllX = false;
      rep.witnessX = x;
      rep.witnessCex = v.cex;
    }
    return v.valid;
  };
  if (n <= capStates && n < 32) {
    const std::uint64_t total = std::uint64_t{1} << n;
    if (jobs > 1 && total >= 256) {
      // Denotations are memoized up front; the sweep then only reads them.
      low.denote(t.lowStmt);
      for (auto& p : t.pre.progs) high.denote(p);
      for (auto& p : t.post.progs) high.denote(p);
      std::vector<std::uint64_t> firstBad(static_cast<std::size_t>(jobs),
                                          total);
      std::vector<std::thread> workers;
      for (int w = 0; w < jobs; ++w) {
        workers.emplace_back([&, w] {
          for (std::uint64_t mask = static_cast<std::uint64_t>(w);
               mask < total; mask += static_cast<std::uint64_t>(jobs)) {
            StateSet x = subsetFromMask(mask, n);
            StdTripleSem st{encode(t.pre, x, high), t.lowStmt,
                            encode(t.post, x, high)};
            if (!stdValidSem(low, st).valid) {
              firstBad[static_cast<std::size_t>(w)] = mask;
              return;
            }
          }
        });
      }
      for (auto& th : workers) th.join();
      std::uint64_t bad = total;
      for (std::uint64_t b : firstBad) bad = std::min(bad, b);
      rep.xChecked = total;
      if (bad < total) {
        StateSet x = subsetFromMask(bad, n);
        StdTripleSem st{encode(t.pre, x, high), t.lowStmt,
                        encode(t.post, x, high)};
        rep.encodedAllX = false;
        rep.witnessX = x;
        rep.witnessCex = stdValidSem(low, st).cex;
      }
    } else {
      for (std::uint64_t mask = 0; mask < total; ++mask) {
        if (!checkX(subsetFromMask(mask, n))) break;
      }
    }
  } else {
    rep.exhaustive = false;
    // Canonical witnesses from the backward direction of the equivalence
    // proof: the terminal-state set of every high configuration in the pre.
    for (std::size_t ti = 0; ti < t.pre.progs.size() && rep.encodedAllX; ++ti) {
      const Denotation& dh = high.denote(t.pre.progs[ti]);
      StateSet seen(n);
      for (std::size_t sl = 0; sl < t.pre.nLow && rep.encodedAllX; ++sl) {
        const StateSet& hs = t.pre.parts[ti].rows[sl];
        for (std::size_t sh = hs.find_first(); sh != StateSet::npos;
             sh = hs.find_next(sh)) {
          if (seen.test(sh)) continue;
          seen.set(sh);
          if (!checkX(dh.nrm[sh])) break;
        }
      }
    }
    // Deterministic pseudo-random subsets on top.
    std::uint64_t seed = 0x9e3779b97f4a7c15ULL;
    for (int k = 0; k < 64 && rep.encodedAllX; ++k) {
      StateSet x(n);
      for (std::size_t i = 0; i < n; ++i) {
        seed ^= seed << 13; seed ^= seed >> 7; seed ^= seed << 17;
        if (seed & 1) x.set(i);
      }
      checkX(x);
    }
  }
  rep.agree = (rep.relational.valid == rep.encodedAllX);
  return rep;
}

// ---------------------------------------------------------------------------
// Vertical composition
// ---------------------------------------------------------------------------

struct VcError {
  std::string premise;  // which premise failed
  std::string detail;
};

// Composes a refinement (pre/post binary assertions around a high program)
// with a functional-correctness triple of that high program. Returns the
// linked low-level triple, verified valid.
struct VcFcInput {
  BinAssertion binPre, binPost;  // over lowSpace x highSpace
  StmtRef lowStmt, highStmt;
  StateSet highPre, highPost;  // unary high assertions
};

struct VcFcResult {
  bool ok = false;
  std::optional<VcError> error;
  StdTripleSem conclusion;
};

inline VcFcResult vcFc(Interp& low, Interp& high, const VcFcInput& in) {
  VcFcResult res;
  RelTripleSem ref;
  ref.lowStmt = in.lowStmt;
  ref.pre = RelAssertionSem(low.space().size(), high.space().size());
  ref.pre.ensureProg(in.highStmt);
  ref.pre.parts[0] = in.binPre;
  ref.post = RelAssertionSem(low.space().size(), high.space().size());
  ref.post.ensureProg(skipStmt());
  ref.post.parts[0] = in.binPost;
  if (RelVerdict v = relValid(low, high, ref); !v.valid) {
    res.error = VcError{"refinement", v.cex ? v.cex->reason : ""};
    return res;
  }
  if (StdVerdict v = stdValidSem(high, {in.highPre, in.highStmt, in.highPost});
      !v.valid) {
    res.error = VcError{"high-triple", ""};
    return res;
  }
  res.conclusion = StdTripleSem{linkBinUnary(in.binPre, in.highPre), in.lowStmt,
                                linkBinUnary(in.binPost, in.highPost)};
  if (StdVerdict v = stdValidSem(low, res.conclusion); !v.valid) {
    // Premises held but the linked conclusion failed: soundness alarm.
    res.error = VcError{"conclusion", "composed triple is invalid"};
    return res;
  }
  res.ok = true;
  return res;
}

// Chains two refinements over a shared middle space.
struct VcRefineInput {
  BinAssertion pre1, post1;  // over s1 x s2
  BinAssertion pre2, post2;  // over s2 x s3
  StmtRef c1, c2, c3;
};

struct VcRefineResult {
  bool ok = false;
  std::optional<VcError> error;
  RelTripleSem conclusion;  // over s1 x s3
};

inline VcRefineResult vcRefine(Interp& i1, Interp& i2, Interp& i3,
                               const VcRefineInput& in) {
  VcRefineResult res;
  if (in.pre1.n2 != in.pre2.n1 || in.post1.n2 != in.post2.n1) {
    res.error = VcError{"space-mismatch", "middle spaces differ"};
    return res;
  }
  auto mkRef = [](std::size_t nl, std::size_t nh, const BinAssertion& p,
                  const BinAssertion& q, StmtRef cl, StmtRef ch) {
    RelTripleSem r;
    r.lowStmt = std::move(cl);
    r.pre = RelAssertionSem(nl, nh);
    r.pre.ensureProg(std::move(ch));
    r.pre.parts[0] = p;
    r.post = RelAssertionSem(nl, nh);
    r.post.ensureProg(skipStmt());
    r.post.parts[0] = q;
    return r;
  };
  RelTripleSem ref1 = mkRef(i1.space().size(), i2.space().size(), in.pre1,
                            in.post1, in.c1, in.c2);
  if (RelVerdict v = relValid(i1, i2, ref1); !v.valid) {
    res.error = VcError{"first-refinement", v.cex ? v.cex->reason : ""};
    return res;
  }
  RelTripleSem ref2 = mkRef(i2.space().size(), i3.space().size(), in.pre2,
                            in.post2, in.c2, in.c3);
  if (RelVerdict v = relValid(i2, i3, ref2); !v.valid) {
    res.error = VcError{"second-refinement", v.cex ? v.cex->reason : ""};
    return res;
  }
  res.conclusion = mkRef(i1.space().size(), i3.space().size(),
                         composeBin(in.pre1, in.pre2),
                         composeBin(in.post1, in.post2), in.c1, in.c3);
  if (RelVerdict v = relValid(i1, i3, res.conclusion); !v.valid) {
    res.error = VcError{"conclusion", "composed refinement is invalid"};
    return res;
  }
  res.ok = true;
  return res;
}

// Vertical composition for store-shaped refinements: data-indexed pre/post
// stores, a data constraint on the input, and a derived constraint on the
// output, with an inhabitation side condition on the high-level pre store.
struct VcStoreInput {
  Sort domU, domV;
  std::vector<StateSet> storePreL, storePreH;    // indexed by u
  std::vector<StateSet> storePostL, storePostH;  // indexed by v
  std::vector<bool> b1;                          // data constraint on u
  std::vector<bool> b2;                          // data constraint on v
  StmtRef lowStmt, highStmt;
};

struct VcStoreResult {
  bool ok = false;
  std::optional<VcError> error;
  std::optional<std::uint64_t> uninhabitedU;
  StdTripleSem conclusion;
};

inline VcStoreResult vcStore(Interp& low, Interp& high, const VcStoreInput& in) {
  VcStoreResult res;
  const std::size_t nl = low.space().size(), nh = high.space().size();
  const std::uint64_t uCount = in.domU.cardinality();
  const std::uint64_t vCount = in.domV.cardinality();
  for (std::uint64_t u = 0; u < uCount; ++u)
    if (in.b1[u] && !in.storePreH[u].any()) {
      res.uninhabitedU = u;
      res.error = VcError{"inhabitant",
                          "no high state realizes the pre store at u=" +
                              toString(in.domU.valueAt(u))};
      return res;
    }
  RelTripleSem ref;
  ref.lowStmt = in.lowStmt;
  ref.pre = RelAssertionSem(nl, nh);
  ref.pre.ensureProg(in.highStmt);
  ref.post = RelAssertionSem(nl, nh);
  ref.post.ensureProg(skipStmt());
  for (std::uint64_t u = 0; u < uCount; ++u)
    for (std::size_t sl = in.storePreL[u].find_first(); sl != StateSet::npos;
         sl = in.storePreL[u].find_next(sl))
      ref.pre.parts[0].rows[sl] |= in.storePreH[u];
  for (std::uint64_t v = 0; v < vCount; ++v)
    for (std::size_t sl = in.storePostL[v].find_first(); sl != StateSet::npos;
         sl = in.storePostL[v].find_next(sl))
      ref.post.parts[0].rows[sl] |= in.storePostH[v];
  if (RelVerdict v = relValid(low, high, ref); !v.valid) {
    res.error = VcError{"refinement", v.cex ? v.cex->reason : ""};
    return res;
  }
  StateSet hpre(nh), hpost(nh);
  for (std::uint64_t u = 0; u < uCount; ++u)
    if (in.b1[u]) hpre |= in.storePreH[u];
  hpost.set();
  for (std::uint64_t v = 0; v < vCount; ++v)
    if (!in.b2[v]) hpost -= in.storePostH[v];
  if (StdVerdict v = stdValidSem(high, {hpre, in.highStmt, hpost}); !v.valid) {
    res.error = VcError{"high-triple", ""};
    return res;
  }
  StateSet cpre(nl), cpost(nl);
  for (std::uint64_t u = 0; u < uCount; ++u)
    if (in.b1[u]) cpre |= in.storePreL[u];
  for (std::uint64_t v = 0; v < vCount; ++v)
    if (in.b2[v]) cpost |= in.storePostL[v];
  res.conclusion = StdTripleSem{std::move(cpre), in.lowStmt, std::move(cpost)};
  if (StdVerdict v = stdValidSem(low, res.conclusion); !v.valid) {
    res.error = VcError{"conclusion", "composed triple is invalid"};
    return res;
  }
  res.ok = true;
  return res;
}

}  // namespace refine
